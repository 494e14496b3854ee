//! Client for models hosted in a separate process.
//!
//! The child reads one JSON request per line on stdin and answers with one
//! JSON response per line on stdout:
//!
//! ```text
//! -> {"op":"handshake"}
//! <- {"ok":true,"params":4,"alphabet":[-1,1],"model":"logistic"}
//! -> {"op":"predict","rows":[[1,2,3,0],[1,2,3,1]]}
//! <- {"ok":true,"labels":[1,-1]}
//! <- {"ok":false,"error":{"code":"protocol","msg":"row 0 has 3 values"}}
//! ```
//!
//! Requests and responses alternate strictly; the client holds a lock for the
//! whole exchange so only one request is ever in flight.

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, ChildStdout, Command, Stdio};
use std::sync::Mutex;

use fairprobe_core::{Alphabet, Classifier, InputDomain, Label, ModelError, PointInput};
use serde::{Deserialize, Serialize};

#[derive(Serialize)]
#[serde(tag = "op", rename_all = "lowercase")]
enum Request<'a> {
    Handshake,
    Predict { rows: Vec<&'a [i64]> },
}

#[derive(Deserialize)]
struct Response {
    ok: bool,
    #[serde(default)]
    params: Option<usize>,
    #[serde(default)]
    alphabet: Option<Vec<i64>>,
    #[serde(default)]
    model: Option<serde_json::Value>,
    #[serde(default)]
    labels: Option<Vec<i64>>,
    #[serde(default)]
    error: Option<WireError>,
}

#[derive(Deserialize)]
struct WireError {
    code: String,
    msg: String,
}

struct Channel {
    child: Child,
    stdin: ChildStdin,
    stdout: BufReader<ChildStdout>,
}

impl Channel {
    fn exchange(&mut self, request: &Request<'_>) -> Result<Response, ModelError> {
        let mut line = serde_json::to_string(request).map_err(|e| ModelError::Protocol(e.to_string()))?;
        line.push('\n');
        self.stdin
            .write_all(line.as_bytes())
            .and_then(|()| self.stdin.flush())
            .map_err(|e| ModelError::Transport(format!("writing to model process: {e}")))?;

        let mut reply = String::new();
        let n = self
            .stdout
            .read_line(&mut reply)
            .map_err(|e| ModelError::Transport(format!("reading from model process: {e}")))?;
        if n == 0 {
            let status = match self.child.try_wait() {
                Ok(Some(status)) => format!(" ({status})"),
                _ => String::new(),
            };
            return Err(ModelError::Transport(format!(
                "model process closed its output{status}"
            )));
        }
        let response: Response = serde_json::from_str(reply.trim_end())
            .map_err(|e| ModelError::Protocol(format!("unparseable response `{}`: {e}", reply.trim_end())))?;
        if !response.ok {
            return Err(match response.error {
                Some(err) => ModelError::Protocol(format!("model reported {}: {}", err.code, err.msg)),
                None => ModelError::Protocol("model answered ok=false without an error".into()),
            });
        }
        Ok(response)
    }
}

/// A classifier behind the line protocol.
pub struct ExternalModel {
    channel: Mutex<Channel>,
    alphabet: Alphabet,
    arity: usize,
    command: String,
    description: String,
}

impl std::fmt::Debug for ExternalModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ExternalModel")
            .field("command", &self.command)
            .field("arity", &self.arity)
            .field("alphabet", &self.alphabet)
            .field("description", &self.description)
            .finish()
    }
}

/// Spawns `launch_command` through `sh -c` and performs the handshake.
///
/// The handshake must declare exactly `domain.len()` parameters and a
/// non-empty alphabet of distinct labels.
pub fn connect_external(launch_command: &str, domain: &InputDomain) -> Result<ExternalModel, ModelError> {
    let mut child = Command::new("sh")
        .arg("-c")
        .arg(launch_command)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::inherit())
        .spawn()
        .map_err(|e| ModelError::Transport(format!("cannot start `{launch_command}`: {e}")))?;
    let stdin = child.stdin.take().expect("piped stdin");
    let stdout = BufReader::new(child.stdout.take().expect("piped stdout"));
    let mut channel = Channel { child, stdin, stdout };

    let hello = channel.exchange(&Request::Handshake)?;
    let params = hello
        .params
        .ok_or_else(|| ModelError::Protocol("handshake lacks `params`".into()))?;
    if params != domain.len() {
        return Err(ModelError::Protocol(format!(
            "model declares {params} parameters, domain has {}",
            domain.len()
        )));
    }
    let raw = hello
        .alphabet
        .ok_or_else(|| ModelError::Protocol("handshake lacks `alphabet`".into()))?;
    let alphabet = Alphabet::new(raw.iter().copied().map(Label));
    if alphabet.labels().is_empty() || alphabet.labels().len() != raw.len() {
        return Err(ModelError::Protocol(format!("invalid alphabet {raw:?}")));
    }
    let description = match hello.model {
        Some(serde_json::Value::String(s)) => s,
        Some(other) => other.to_string(),
        None => String::new(),
    };
    Ok(ExternalModel {
        channel: Mutex::new(channel),
        alphabet,
        arity: params,
        command: launch_command.to_string(),
        description,
    })
}

impl ExternalModel {
    pub fn command(&self) -> &str {
        &self.command
    }

    /// The `model` field of the handshake.
    pub fn description(&self) -> &str {
        &self.description
    }
}

impl Classifier for ExternalModel {
    fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    fn predict(&self, input: &PointInput) -> Result<Label, ModelError> {
        Ok(self.predict_batch(std::slice::from_ref(input))?[0])
    }

    fn predict_batch(&self, inputs: &[PointInput]) -> Result<Vec<Label>, ModelError> {
        if let Some(bad) = inputs.iter().find(|x| x.len() != self.arity) {
            return Err(ModelError::Protocol(format!(
                "input has {} values, model takes {}",
                bad.len(),
                self.arity
            )));
        }
        let rows = inputs.iter().map(|x| x.values()).collect();
        let mut channel = self
            .channel
            .lock()
            .map_err(|_| ModelError::Transport("model channel poisoned".into()))?;
        let response = channel.exchange(&Request::Predict { rows })?;
        let labels = response
            .labels
            .ok_or_else(|| ModelError::Protocol("predict response lacks `labels`".into()))?;
        if labels.len() != inputs.len() {
            return Err(ModelError::Protocol(format!(
                "{} labels for {} rows",
                labels.len(),
                inputs.len()
            )));
        }
        labels
            .into_iter()
            .map(|l| {
                let label = Label(l);
                if self.alphabet.contains(label) {
                    Ok(label)
                } else {
                    Err(ModelError::Protocol(format!("label {l} outside the declared alphabet")))
                }
            })
            .collect()
    }
}

impl Drop for ExternalModel {
    fn drop(&mut self) {
        if let Ok(channel) = self.channel.get_mut() {
            let _ = channel.child.kill();
            let _ = channel.child.wait();
        }
    }
}
