use std::time::Instant;

use serde_json::{json, Map, Value};

/// One command's output: parameters, result and per-phase wall-clock times.
pub struct Report {
    command: String,
    params: Map<String, Value>,
    result: Value,
    timings: Map<String, Value>,
}

impl Report {
    pub fn new(command: &str) -> Self {
        Self {
            command: command.to_string(),
            params: Map::new(),
            result: Value::Null,
            timings: Map::new(),
        }
    }

    pub fn param(&mut self, key: &str, value: impl Into<Value>) {
        self.params.insert(key.to_string(), value.into());
    }

    pub fn result(&mut self, value: Value) {
        self.result = value;
    }

    /// Runs `f`, recording its duration under `phase`.
    pub fn time<T>(&mut self, phase: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        let ms = start.elapsed().as_secs_f64() * 1e3;
        self.timings.insert(phase.to_string(), json!(ms));
        out
    }

    pub fn to_json(&self) -> Value {
        json!({
            "command": self.command,
            "params": self.params,
            "result": self.result,
            "timings_ms": self.timings,
        })
    }

    /// Prints the JSON record, or the text produced by `text` followed by the
    /// timings.
    pub fn emit(&self, as_json: bool, text: impl FnOnce() -> String) -> anyhow::Result<()> {
        if as_json {
            println!("{}", serde_json::to_string_pretty(&self.to_json())?);
        } else {
            println!("{}", text());
            for (phase, ms) in &self.timings {
                eprintln!("{phase}: {:.3} ms", ms.as_f64().unwrap_or(0.0));
            }
        }
        Ok(())
    }
}
