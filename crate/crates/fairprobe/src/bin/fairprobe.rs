fn main() {
    std::process::exit(fairprobe::cli::run(std::env::args_os()));
}
