#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use fairprobe::{render_domain, render_model, write_csv};
use fairprobe_core::planted::{make_planted, PlantedBiasSpec, Region, RegionBound};
use fairprobe_core::{InputDomain, Label, LabeledDataset, NativeModel, ParameterSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tempfile::TempDir;

pub const BIN: &str = env!("CARGO_BIN_EXE_fairprobe");

/// Two free parameters over `[0, 99]` and a binary protected `g`.
pub fn grid_domain() -> InputDomain {
    InputDomain::new(vec![
        ParameterSpec::new("x0", 0, 99, false),
        ParameterSpec::new("x1", 0, 99, false),
        ParameterSpec::new("g", 0, 1, true),
    ])
    .unwrap()
}

/// Planted model over [`grid_domain`] that flips on `g = 1` inside the box.
pub fn planted(bounds: &[(usize, i64, i64)]) -> NativeModel {
    let d = grid_domain();
    let region = Region::Box(bounds.iter().map(|&(p, lo, hi)| RegionBound::new(p, lo, hi)).collect());
    make_planted(&d, PlantedBiasSpec::new(&d, region, 1)).unwrap().into()
}

pub fn fair_planted() -> NativeModel {
    let d = grid_domain();
    make_planted(&d, PlantedBiasSpec::new(&d, Region::Empty, 1))
        .unwrap()
        .into()
}

/// A 5% region, contiguous in both free parameters.
pub fn clustered_five_percent() -> NativeModel {
    planted(&[(0, 0, 19), (1, 0, 24)])
}

/// Small census-like domain used for training.
pub fn census_domain() -> InputDomain {
    InputDomain::new(vec![
        ParameterSpec::new("age", 17, 90, false),
        ParameterSpec::new("hours", 0, 99, false),
        ParameterSpec::new("edu", 1, 16, false),
        ParameterSpec::new("sex", 0, 1, true),
    ])
    .unwrap()
}

/// Income labels driven by education and hours, with women under 40
/// rejected outright.
pub fn census_data(seed: u64, rows: usize) -> LabeledDataset {
    let d = census_domain();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = (0..rows)
        .map(|_| {
            let x = d.sample_uniform(&mut rng);
            let v = x.values();
            let score = v[2] * 4 + v[1] / 2 + rng.gen_range(-5..=5);
            let fair = if score >= 55 { 1 } else { -1 };
            let label = if v[3] == 1 && v[0] < 40 { -1 } else { fair };
            (x, Label(label))
        })
        .collect();
    LabeledDataset::new(d, rows, "census").unwrap()
}

/// Temporary directory the binary runs in, so relative paths in reports are
/// the same on every run.
pub struct Scratch {
    pub dir: TempDir,
}

impl Scratch {
    pub fn new() -> Self {
        Self {
            dir: TempDir::new().unwrap(),
        }
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    pub fn domain(&self, name: &str, domain: &InputDomain) -> &Self {
        std::fs::write(self.path(name), render_domain(domain)).unwrap();
        self
    }

    pub fn model(&self, name: &str, model: &NativeModel) -> &Self {
        std::fs::write(self.path(name), render_model(model)).unwrap();
        self
    }

    pub fn csv(&self, name: &str, data: &LabeledDataset) -> &Self {
        write_csv(&self.path(name), data, "label").unwrap();
        self
    }

    pub fn run(&self, args: &[&str]) -> Output {
        self.run_with_env(args, &[])
    }

    pub fn run_with_env(&self, args: &[&str], env: &[(&str, &str)]) -> Output {
        let mut cmd = Command::new(BIN);
        cmd.args(args).current_dir(self.dir.path()).env_remove("FAIRPROBE_SEED");
        for (k, v) in env {
            cmd.env(k, v);
        }
        cmd.output().unwrap()
    }

    pub fn read(&self, name: &str) -> String {
        std::fs::read_to_string(self.path(name)).unwrap()
    }

    pub fn report(&self, name: &str) -> serde_json::Value {
        serde_json::from_str(&self.read(name)).unwrap()
    }
}

pub fn code(out: &Output) -> i32 {
    out.status.code().expect("terminated by a signal")
}

pub fn ok(out: &Output) {
    assert_eq!(
        code(out),
        0,
        "stdout:\n{}\nstderr:\n{}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

/// The report text with every `wall_time_secs` value zeroed.
pub fn without_wall_time(text: &str) -> String {
    fn scrub(v: &mut serde_json::Value) {
        match v {
            serde_json::Value::Object(map) => {
                for (k, val) in map.iter_mut() {
                    if k.ends_with("wall_time_secs") {
                        *val = serde_json::json!(0.0);
                    } else {
                        scrub(val);
                    }
                }
            }
            serde_json::Value::Array(items) => items.iter_mut().for_each(scrub),
            _ => {}
        }
    }
    let mut value: serde_json::Value = serde_json::from_str(text).unwrap();
    scrub(&mut value);
    serde_json::to_string_pretty(&value).unwrap()
}

pub fn adapter_command(spec: &str) -> String {
    let script = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/adapter.py");
    format!("python3 {} --model {spec}", script.display())
}
