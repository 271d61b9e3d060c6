//! Run reports: `key=value` lines or one JSON object.

use serde::Serialize;
use serde_json::{Map, Value};

use pse_core::pse::PseStats;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum StatsFormat {
    Text,
    Structured,
}

/// Ordered list of report fields.
#[derive(Debug, Default)]
pub struct Report {
    fields: Vec<(String, Value)>,
}

impl Report {
    pub fn push(&mut self, key: &str, value: impl Into<Value>) {
        self.fields.push((key.to_string(), value.into()));
    }

    /// Entropy is rendered with the shortest representation that round-trips.
    pub fn entropy(&mut self, key: &str, h: f64) {
        self.push(key, format!("{h}"));
    }

    pub fn stats(&mut self, s: &PseStats) {
        self.push("decisions", s.decisions);
        self.push("x_decisions", s.x_decisions);
        self.push("components", s.components);
        self.push("trace_nodes", s.trace_nodes);
        self.push("cache_entries", s.cache_entries as u64);
        self.push("x_hits", s.cache.x_hits);
        self.push("x_misses", s.cache.x_misses);
        self.push("y_hits", s.cache.y_hits);
        self.push("y_misses", s.cache.y_misses);
        self.push("cache_resets", s.cache.resets);
        match s.treewidth {
            Some(w) => self.push("treewidth", w as u64),
            None => self.push("treewidth", "none"),
        }
        if let Some(p) = &s.pre {
            self.push("pre_merged", p.merged_vars as u64);
            self.push("pre_forced", p.forced_units as u64);
        }
        self.push("time_ms", format!("{:.3}", s.time_ms));
    }

    pub fn render(&self, format: StatsFormat) -> String {
        match format {
            StatsFormat::Text => {
                let mut out = String::new();
                for (k, v) in &self.fields {
                    let text = match v {
                        Value::String(s) => s.clone(),
                        other => other.to_string(),
                    };
                    out.push_str(&format!("{k}={text}\n"));
                }
                out
            }
            StatsFormat::Structured => {
                let map: Map<String, Value> = self.fields.iter().cloned().collect();
                let mut s = serde_json::to_string_pretty(&Value::Object(map)).expect("plain JSON values");
                s.push('\n');
                s
            }
        }
    }
}

/// Generator manifest entry.
#[derive(Debug, Serialize)]
pub struct ManifestEntry {
    pub file: String,
    pub seed: u64,
    pub inputs: u32,
    pub outputs: u32,
    pub max_arity: u32,
}
