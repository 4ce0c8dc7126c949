use std::fs;
use std::io::{self, Write};
use std::path::Path;

use serde_json::{json, Map, Value};

/// JSON number, or the strings `"inf"`, `"-inf"`, `"nan"`, which JSON
/// cannot represent as numbers.
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else if x.is_nan() {
        json!("nan")
    } else if x > 0.0 {
        json!("inf")
    } else {
        json!("-inf")
    }
}

/// Seventeen significant digits, enough to round-trip any double.
pub fn csv_num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        num(x).as_str().unwrap_or_default().to_string()
    }
}

pub struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Table {
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for row in &self.rows {
            s.push_str(&row.join(","));
            s.push('\n');
        }
        s
    }
}

#[derive(Debug, Default)]
pub struct Meta {
    pub command: &'static str,
    pub law: Option<String>,
    pub spectrum: Option<String>,
    pub seed: Option<u64>,
    pub method: Option<String>,
    pub k_b: Option<f64>,
    pub extra: Map<String, Value>,
}

impl Meta {
    pub fn new(command: &'static str) -> Self {
        Meta {
            command,
            ..Meta::default()
        }
    }

    pub fn to_value(&self) -> Value {
        let mut m = Map::new();
        m.insert("command".into(), json!(self.command));
        m.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
        m.insert("law".into(), json!(self.law));
        m.insert("spectrum".into(), json!(self.spectrum));
        m.insert("seed".into(), json!(self.seed));
        m.insert("method".into(), json!(self.method));
        if let Some(k_b) = self.k_b {
            m.insert("k_b".into(), num(k_b));
        }
        for (k, v) in &self.extra {
            m.insert(k.clone(), v.clone());
        }
        Value::Object(m)
    }
}

pub fn document(meta: &Meta, data: Value) -> String {
    let mut s = serde_json::to_string_pretty(&json!({ "meta": meta.to_value(), "data": data }))
        .expect("JSON values always serialize");
    s.push('\n');
    s
}

pub fn emit(path: Option<&Path>, content: &str) -> io::Result<()> {
    match path {
        Some(p) => fs::write(p, content),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(content.as_bytes())?;
            out.flush()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn non_finite_values() {
        assert_eq!(num(f64::INFINITY), json!("inf"));
        assert_eq!(num(f64::NEG_INFINITY), json!("-inf"));
        assert_eq!(csv_num(f64::NEG_INFINITY), "-inf");
        assert_eq!(csv_num(0.1), "1.0000000000000001e-1");
        assert_eq!(csv_num(0.1).parse::<f64>().unwrap(), 0.1);
    }

    #[test]
    fn table_csv() {
        let mut t = Table::new(&["a", "b"]);
        t.push(vec!["1".into(), "2".into()]);
        assert_eq!(t.to_csv(), "a,b\n1,2\n");
    }
}
