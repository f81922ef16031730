use std::io::{self, Write};

use serde::Serialize;
use serde_json::{Map, Value};

use sudlerlab_core::VERSION;

/// A tabular result plus scalar summary fields.
///
/// CSV output is the table (or the summary as a single row when there is no
/// table); JSON output carries both.
#[derive(Clone, Debug)]
pub struct Report {
    pub report_type: &'static str,
    pub summary: Map<String, Value>,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Value>>,
}

impl Report {
    pub fn new(report_type: &'static str) -> Self {
        Self {
            report_type,
            summary: Map::new(),
            columns: Vec::new(),
            rows: Vec::new(),
        }
    }

    pub fn set(&mut self, key: &str, value: impl Into<Value>) -> &mut Self {
        self.summary.insert(key.to_string(), value.into());
        self
    }

    pub fn set_f64(&mut self, key: &str, value: f64) -> &mut Self {
        self.set(key, num(value))
    }

    /// Flattens a serializable struct into the summary.
    pub fn merge<T: Serialize>(&mut self, value: &T) -> &mut Self {
        if let Value::Object(map) = serde_json::to_value(value).expect("serializable") {
            self.summary.extend(map);
        }
        self
    }

    pub fn table(&mut self, columns: Vec<&'static str>) -> &mut Self {
        self.columns = columns;
        self
    }

    pub fn row(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_json(&self) -> Value {
        let mut root = Map::new();
        root.insert("report_type".into(), self.report_type.into());
        root.insert("artifact_version".into(), VERSION.into());
        root.extend(self.summary.clone());
        if !self.columns.is_empty() {
            root.insert(
                "columns".into(),
                Value::Array(self.columns.iter().map(|&c| c.into()).collect()),
            );
            root.insert(
                "rows".into(),
                Value::Array(self.rows.iter().cloned().map(Value::Array).collect()),
            );
        }
        Value::Object(root)
    }

    pub fn write_json<W: Write>(&self, mut w: W) -> io::Result<()> {
        serde_json::to_writer_pretty(&mut w, &self.to_json())?;
        writeln!(w)
    }

    pub fn write_csv<W: Write>(&self, w: W) -> io::Result<()> {
        let mut out = csv::Writer::from_writer(w);
        if self.columns.is_empty() {
            let keys: Vec<&str> = self
                .summary
                .iter()
                .filter(|(_, v)| !v.is_object() && !v.is_array())
                .map(|(k, _)| k.as_str())
                .collect();
            out.write_record(&keys)?;
            out.write_record(keys.iter().map(|k| cell(&self.summary[*k])))?;
        } else {
            out.write_record(&self.columns)?;
            for row in &self.rows {
                out.write_record(row.iter().map(cell))?;
            }
        }
        out.flush()
    }
}

/// JSON number, or `null` for non-finite values.
pub fn num(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_of_summary_only_report() {
        let mut r = Report::new("vconst");
        r.set_f64("V", 0.5).set_f64("tol", 1e-8);
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "V,tol\n0.5,1e-8\n");
    }

    #[test]
    fn non_finite_values_are_null() {
        assert_eq!(num(f64::NAN), Value::Null);
        let mut r = Report::new("t");
        r.table(vec!["x"]).row(vec![num(f64::INFINITY)]);
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "x\n\"\"\n");
    }
}
