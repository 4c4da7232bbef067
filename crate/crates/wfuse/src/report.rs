//! Report plumbing shared by the CLI commands.
//!
//! Every numeric value is rounded to 12 significant digits before it enters
//! a report, and both the JSON and CSV renderers print that same rounded
//! value through the JSON number formatter, so the two renderings agree
//! byte-for-byte on every numeric field. Text mode prints 4 decimals for
//! eyeball comparison against published tables.

use serde_json::{json, Map, Value};

/// Rounds to 12 significant digits (the printing precision of all reports).
pub fn sig12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

/// A rounded numeric JSON value.
pub fn num(x: f64) -> Value {
    serde_json::Number::from_f64(sig12(x))
        .map(Value::Number)
        .unwrap_or(Value::Null)
}

/// The exact string a number prints as, identical in CSV and JSON output.
pub fn num_str(x: f64) -> String {
    num(x).to_string()
}

/// Fixed 4-decimal rendering for text tables.
pub fn text4(x: f64) -> String {
    format!("{x:.4}")
}

/// Output format selected on the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Text,
    Json,
    Csv,
}

/// A reference-vs-computed deviation surfaced by a command.
#[derive(Clone, Debug)]
pub struct DiscrepancyEntry {
    pub location: String,
    pub reference: f64,
    pub computed: f64,
    pub note: String,
}

impl DiscrepancyEntry {
    pub fn to_json(&self) -> Value {
        json!({
            "location": self.location,
            "reference": num(self.reference),
            "computed": num(self.computed),
            "note": self.note,
        })
    }

    pub fn to_text(&self) -> String {
        format!(
            "  {}: reference {} vs computed {} ({})",
            self.location,
            text4(self.reference),
            text4(self.computed),
            self.note
        )
    }
}

/// One command's result: the same data rendered as JSON, CSV rows, or
/// aligned text.
#[derive(Clone, Debug)]
pub struct RunReport {
    pub command: String,
    pub inputs: Value,
    pub outputs: Value,
    pub discrepancies: Vec<DiscrepancyEntry>,
    /// CSV payload: header plus rows of already-formatted cells.
    pub csv_header: Vec<String>,
    pub csv_rows: Vec<Vec<String>>,
    /// Pre-built text body (everything below the command echo).
    pub text_body: String,
}

impl RunReport {
    pub fn to_json_value(&self) -> Value {
        let mut map = Map::new();
        map.insert("schema".into(), json!("wfuse/1"));
        map.insert("command".into(), json!(self.command));
        map.insert("inputs".into(), self.inputs.clone());
        map.insert("outputs".into(), self.outputs.clone());
        map.insert(
            "discrepancies".into(),
            Value::Array(self.discrepancies.iter().map(|d| d.to_json()).collect()),
        );
        Value::Object(map)
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => {
                let mut out = serde_json::to_string_pretty(&self.to_json_value())
                    .expect("report values are valid JSON");
                out.push('\n');
                out
            }
            Format::Csv => {
                let mut out = String::new();
                out.push_str(&self.csv_header.join(","));
                out.push('\n');
                for row in &self.csv_rows {
                    out.push_str(&row.join(","));
                    out.push('\n');
                }
                out
            }
            Format::Text => {
                let mut out = format!("command: {}\n", self.command);
                out.push_str(&self.text_body);
                if !self.discrepancies.is_empty() {
                    out.push_str("discrepancies:\n");
                    for d in &self.discrepancies {
                        out.push_str(&d.to_text());
                        out.push('\n');
                    }
                }
                out
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sig12_rounds_and_round_trips() {
        assert_eq!(sig12(0.0), 0.0);
        assert_eq!(sig12(1.0 / 3.0), 0.333333333333);
        assert_eq!(sig12(12.0), 12.0);
        assert_eq!(num_str(12.0), "12.0");
        assert_eq!(num_str(1.0 / 6.0), "0.166666666667");
    }

    #[test]
    fn csv_and_json_numbers_share_formatting() {
        let x = 0.193394908464_f64;
        let report = RunReport {
            command: "demo".into(),
            inputs: json!({}),
            outputs: json!({ "x": num(x) }),
            discrepancies: vec![],
            csv_header: vec!["x".into()],
            csv_rows: vec![vec![num_str(x)]],
            text_body: String::new(),
        };
        let json_out = report.render(Format::Json);
        let csv_out = report.render(Format::Csv);
        let cell = csv_out.lines().nth(1).unwrap();
        assert!(json_out.contains(cell));
    }
}
