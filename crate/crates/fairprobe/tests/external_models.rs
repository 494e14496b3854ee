use std::path::PathBuf;

use fairprobe::{connect_external, ModelHandle};
use fairprobe_core::logistic::LogisticModel;
use fairprobe_core::{check_discriminatory, Classifier, InputDomain, Label, ModelError, ParameterSpec, PointInput};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn adapter(spec: &str) -> String {
    let script = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/adapter.py");
    format!("python3 {} --model {spec}", script.display())
}

fn domain() -> InputDomain {
    InputDomain::new(vec![
        ParameterSpec::new("age", 17, 90, false),
        ParameterSpec::new("hours", 0, 99, false),
        ParameterSpec::new("edu", 1, 16, false),
        ParameterSpec::new("sex", 0, 1, true),
    ])
    .unwrap()
}

#[test]
fn constant_adapter_answers_positive() {
    let d = domain();
    let model = connect_external(&adapter("constant:4:1"), &d).unwrap();
    assert_eq!(model.alphabet().labels(), &[Label(-1), Label(1)]);
    assert_eq!(model.description(), "constant");
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for _ in 0..20 {
        let x = d.sample_uniform(&mut rng);
        assert_eq!(model.predict(&x).unwrap(), Label(1));
        assert!(check_discriminatory(&model, &x, &d, &Default::default())
            .unwrap()
            .is_none());
    }
}

#[test]
fn linear_adapter_agrees_with_native_logistic() {
    let d = domain();
    let weights = vec![1.7, -2.25, 0.8, -0.6];
    let bias = -0.1;
    let native = LogisticModel::from_parts(&d, weights.clone(), bias).unwrap();
    let spec = serde_json::json!({
        "bounds": native.bounds().iter().map(|(lo, hi)| [*lo, *hi]).collect::<Vec<_>>(),
        "weights": weights,
        "bias": bias,
    });
    let file = tempfile::NamedTempFile::new().unwrap();
    std::fs::write(file.path(), spec.to_string()).unwrap();

    let external = connect_external(&adapter(&format!("linear:{}", file.path().display())), &d).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let inputs: Vec<PointInput> = (0..1000).map(|_| d.sample_uniform(&mut rng)).collect();
    let expected: Vec<Label> = inputs.iter().map(|x| native.predict(x).unwrap()).collect();
    assert!(expected.contains(&Label(1)) && expected.contains(&Label(-1)));
    assert_eq!(external.predict_batch(&inputs).unwrap(), expected);
}

#[test]
fn parameter_count_mismatch_fails_the_handshake() {
    let err = connect_external(&adapter("constant:3:1"), &domain()).unwrap_err();
    assert!(
        matches!(&err, ModelError::Protocol(m) if m.contains("3 parameters")),
        "{err}"
    );
}

#[test]
fn dying_child_is_a_transport_error() {
    let model = connect_external(&adapter("dies:4"), &domain()).unwrap();
    let err = model.predict(&PointInput(vec![20, 40, 10, 0])).unwrap_err();
    assert!(err.is_retryable(), "{err}");
}

#[test]
fn missing_program_is_a_transport_error() {
    let err = connect_external("/nonexistent/model-server", &domain()).unwrap_err();
    assert!(matches!(err, ModelError::Transport(_)), "{err}");
}

#[test]
fn broken_responses_are_protocol_errors() {
    let model = connect_external(&adapter("garbage:4"), &domain()).unwrap();
    let err = model.predict(&PointInput(vec![20, 40, 10, 0])).unwrap_err();
    assert!(matches!(err, ModelError::Protocol(_)), "{err}");

    let model = connect_external(&adapter("constant:4:5"), &domain()).unwrap();
    let err = model.predict(&PointInput(vec![20, 40, 10, 0])).unwrap_err();
    assert!(
        matches!(&err, ModelError::Protocol(m) if m.contains("alphabet")),
        "{err}"
    );
}

#[test]
fn exec_references_open_external_handles() {
    let d = domain();
    let handle = ModelHandle::open(&format!("exec:{}", adapter("constant:4:-1")), &d).unwrap();
    assert!(matches!(handle, ModelHandle::External(_)));
    assert_eq!(handle.predict(&PointInput(vec![20, 40, 10, 1])).unwrap(), Label(-1));
    let again = ModelHandle::open(&format!("exec:{}", adapter("constant:4:-1")), &d).unwrap();
    assert_eq!(handle.digest(), again.digest());
}
