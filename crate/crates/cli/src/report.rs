use std::fmt::Write as _;
use std::time::Duration;

use clap::ValueEnum;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Kv,
}

/// Ordered key/value results plus free-form blocks such as matrices.
#[derive(Debug, Clone, Default)]
pub struct Report {
    command: String,
    config: Vec<(String, String)>,
    results: Vec<(String, String)>,
    blocks: Vec<(String, Vec<String>)>,
    warnings: Vec<String>,
    wall_time: Option<Duration>,
}

impl Report {
    pub fn new(command: &str) -> Self {
        Report {
            command: command.to_string(),
            ..Default::default()
        }
    }

    pub fn config(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.config.push((key.to_string(), value.to_string()));
        self
    }

    pub fn result(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.results.push((key.to_string(), value.to_string()));
        self
    }

    pub fn block(&mut self, name: &str, lines: Vec<String>) -> &mut Self {
        self.blocks.push((name.to_string(), lines));
        self
    }

    pub fn warn(&mut self, message: impl ToString) -> &mut Self {
        self.warnings.push(message.to_string());
        self
    }

    pub fn set_wall_time(&mut self, t: Duration) {
        self.wall_time = Some(t);
    }

    pub fn render(&self, format: Format) -> String {
        let mut out = String::new();
        match format {
            Format::Text => {
                let _ = writeln!(out, "{}", self.command);
                let width = self
                    .config
                    .iter()
                    .chain(&self.results)
                    .map(|(k, _)| k.len())
                    .max()
                    .unwrap_or(0);
                for (k, v) in self.config.iter().chain(&self.results) {
                    let _ = writeln!(out, "  {k:<width$}  {v}");
                }
                for (name, lines) in &self.blocks {
                    let _ = writeln!(out, "  {name}:");
                    for l in lines {
                        let _ = writeln!(out, "    {l}");
                    }
                }
                for w in &self.warnings {
                    let _ = writeln!(out, "  warning: {w}");
                }
                if let Some(t) = self.wall_time {
                    let _ = writeln!(out, "  {:<width$}  {:.3}s", "wall_time", t.as_secs_f64());
                }
            }
            Format::Kv => {
                let _ = writeln!(out, "command={}", self.command);
                for (k, v) in &self.config {
                    let _ = writeln!(out, "config.{k}={v}");
                }
                for (k, v) in &self.results {
                    let _ = writeln!(out, "{k}={v}");
                }
                for (name, lines) in &self.blocks {
                    for (i, l) in lines.iter().enumerate() {
                        let _ = writeln!(out, "{name}.{i}={l}");
                    }
                }
                for (i, w) in self.warnings.iter().enumerate() {
                    let _ = writeln!(out, "warning.{i}={w}");
                }
            }
        }
        out
    }
}

/// Round-trip precision for reported floats.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn list(xs: &[f64]) -> String {
    xs.iter().map(|&x| num(x)).collect::<Vec<_>>().join(",")
}
