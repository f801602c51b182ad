use serde::Serialize;
use serde_json::json;

use claimbridge::Error;

#[derive(Debug, Clone, Copy)]
pub struct Output {
    json: bool,
}

impl Output {
    pub fn new(json: bool) -> Self {
        Output { json }
    }

    /// Prints `value` as pretty JSON, or the human rendering otherwise.
    pub fn emit<T: Serialize>(&self, value: &T, text: impl FnOnce() -> String) -> anyhow::Result<()> {
        if self.json {
            println!("{}", serde_json::to_string_pretty(value)?);
        } else {
            print!("{}", text());
        }
        Ok(())
    }

    pub fn error(&self, e: &anyhow::Error) {
        if self.json {
            let body = json!({ "error": { "kind": error_kind(e), "message": message(e) } });
            println!("{}", serde_json::to_string_pretty(&body).expect("error JSON serializes"));
        } else {
            eprintln!("error: {}", message(e));
        }
    }
}

/// The context chain joined by `: `, skipping links already quoted by the
/// link before them.
fn message(e: &anyhow::Error) -> String {
    let mut parts: Vec<String> = Vec::new();
    for link in e.chain() {
        let text = link.to_string();
        if parts.last().is_some_and(|prev| prev.ends_with(&text)) {
            continue;
        }
        parts.push(text);
    }
    parts.join(": ")
}

fn error_kind(e: &anyhow::Error) -> &'static str {
    let Some(inner) = e.chain().find_map(|c| c.downcast_ref::<Error>()) else {
        return "error";
    };
    match inner {
        Error::Io { .. } => "io",
        Error::Parse { .. } => "parse",
        Error::Validation(_) => "validation",
        Error::Config(_) => "config",
        Error::Translation { .. } => "translation",
        Error::Capability(_) => "capability",
        Error::Metric(_) => "metric",
        Error::EmptyDistribution => "empty_distribution",
        Error::Experiment { .. } => "experiment",
        Error::Json(_) => "json",
    }
}
