use crate::args::{Cli, Format};
use serde_json::{json, Map, Value};
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

/// Column-oriented numeric table.
pub struct Table {
    pub header: Vec<&'static str>,
    pub columns: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(header: Vec<&'static str>, columns: Vec<Vec<f64>>) -> Self {
        debug_assert_eq!(header.len(), columns.len());
        Table { header, columns }
    }

    fn rows(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }

    fn write_csv<W: Write>(&self, out: &mut W) -> io::Result<()> {
        writeln!(out, "{}", self.header.join(","))?;
        let mut line = String::new();
        for r in 0..self.rows() {
            line.clear();
            for (c, col) in self.columns.iter().enumerate() {
                if c > 0 {
                    line.push(',');
                }
                line.push_str(&number(col[r]));
            }
            writeln!(out, "{line}")?;
        }
        Ok(())
    }

    fn to_json(&self) -> Value {
        let mut m = Map::new();
        for (h, col) in self.header.iter().zip(&self.columns) {
            m.insert(h.to_string(), json!(col));
        }
        Value::Object(m)
    }
}

/// Plain decimals in the usual range, exponent form outside it.
pub fn number(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 || (1e-4..1e15).contains(&a) || !v.is_finite() {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

pub struct Report {
    pub result: Value,
    pub error_budget: Value,
    pub table: Option<Table>,
}

fn metadata(cli: &Cli, budget: &Value) -> Value {
    let stamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    json!({
        "command": cli.command,
        "library_version": etadist::VERSION,
        "parameters": cli,
        "error_budget": budget,
        "timestamp": stamp,
    })
}

fn sidecar(path: &Path) -> PathBuf {
    path.with_extension("meta.json")
}

fn write_json<W: Write>(out: W, v: &Value) -> io::Result<()> {
    let mut out = out;
    serde_json::to_writer_pretty(&mut out, v)?;
    writeln!(out)?;
    out.flush()
}

fn sink(path: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

pub fn emit(cli: &Cli, report: Report) -> io::Result<()> {
    let meta = metadata(cli, &report.error_budget);
    let path = cli.output.as_deref();
    match cli.format {
        Format::Json => {
            let mut doc = json!({ "metadata": meta, "result": report.result });
            if let Some(t) = &report.table {
                doc["data"] = t.to_json();
            }
            write_json(sink(path)?, &doc)
        }
        Format::Csv => {
            let mut out = sink(path)?;
            match &report.table {
                Some(t) => t.write_csv(&mut out)?,
                None => {
                    writeln!(out, "name,value")?;
                    let mut flat = Vec::new();
                    flatten("", &report.result, &mut flat);
                    for (k, v) in flat {
                        writeln!(out, "{k},{v}")?;
                    }
                }
            }
            out.flush()?;
            if let Some(p) = path {
                write_json(File::create(sidecar(p))?, &json!({ "metadata": meta, "result": report.result }))?;
            }
            Ok(())
        }
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    let key = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match v {
        Value::Object(m) => m.iter().for_each(|(k, v)| flatten(&key(k), v, out)),
        Value::Array(a) => a.iter().enumerate().for_each(|(i, v)| flatten(&key(&i.to_string()), v, out)),
        Value::Number(n) => out.push((prefix.to_string(), n.as_f64().map_or_else(|| n.to_string(), number))),
        Value::Null => out.push((prefix.to_string(), String::new())),
        Value::String(s) => out.push((prefix.to_string(), format!("\"{}\"", s.replace('"', "\"\"")))),
        Value::Bool(b) => out.push((prefix.to_string(), b.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_format() {
        assert_eq!(number(0.5), "0.5");
        assert_eq!(number(1e-300), "1e-300");
        assert_eq!(number(0.0), "0");
        assert_eq!(number(-2.5e20), "-2.5e20");
    }

    #[test]
    fn flattening_is_ordered() {
        let mut out = Vec::new();
        flatten("", &json!({"b": {"y": 1.0, "x": [2.0, null]}, "a": "q"}), &mut out);
        let keys: Vec<&str> = out.iter().map(|(k, _)| k.as_str()).collect();
        assert_eq!(keys, ["a", "b.x.0", "b.x.1", "b.y"]);
    }

    #[test]
    fn sidecar_name() {
        assert_eq!(sidecar(Path::new("out/grid.csv")), PathBuf::from("out/grid.meta.json"));
    }
}
