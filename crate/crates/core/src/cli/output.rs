//! Record serialization. Every float is written with 17 significant digits so
//! that records round-trip losslessly and repeat runs are byte-identical.

use std::io::{self, Write};

use serde::Serialize;
use serde_json::Value;

/// Formats `x` with 17 significant digits in scientific notation.
pub fn fmt17(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

/// Compact JSON formatter that overrides only float rendering.
struct Digits17;

impl serde_json::ser::Formatter for Digits17 {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(fmt17(value).as_bytes())
    }
}

/// One JSON document followed by a newline.
pub fn to_json<T: Serialize>(record: &T) -> Result<String, String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Digits17);
    record.serialize(&mut ser).map_err(|e| e.to_string())?;
    buf.push(b'\n');
    String::from_utf8(buf).map_err(|e| e.to_string())
}

fn flatten(prefix: &str, value: &Value, out: &mut Vec<(String, String)>) {
    let key = |k: &str| {
        if prefix.is_empty() {
            k.to_string()
        } else {
            format!("{prefix}.{k}")
        }
    };
    match value {
        Value::Object(map) => {
            for (k, v) in map {
                flatten(&key(k), v, out);
            }
        }
        Value::Array(items) => {
            let cells: Vec<String> = items.iter().map(cell).collect();
            out.push((prefix.to_string(), cells.join(";")));
        }
        other => out.push((prefix.to_string(), cell(other))),
    }
}

fn cell(value: &Value) -> String {
    match value {
        Value::Null => String::new(),
        Value::Bool(b) => b.to_string(),
        Value::Number(n) if n.is_f64() => fmt17(n.as_f64().unwrap_or(f64::NAN)),
        Value::Number(n) => n.to_string(),
        Value::String(s) => quote(s),
        Value::Array(items) => items.iter().map(cell).collect::<Vec<_>>().join(" "),
        Value::Object(_) => String::new(),
    }
}

fn quote(s: &str) -> String {
    if s.contains([',', '"', '\n', ';']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// A record flattened into a two-line CSV: dotted keys, then values.
pub fn to_csv_record<T: Serialize>(record: &T) -> Result<String, String> {
    let value = serde_json::to_value(record).map_err(|e| e.to_string())?;
    let mut pairs = Vec::new();
    flatten("", &value, &mut pairs);
    let (keys, values): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
    Ok(format!("{}\n{}\n", keys.join(","), values.join(",")))
}

/// `alpha,t,value` rows.
pub fn paths_csv(rows: &[(f64, f64, f64)]) -> String {
    let mut s = String::with_capacity(64 * (rows.len() + 1));
    s.push_str("alpha,t,value\n");
    for &(a, t, v) in rows {
        s.push_str(&fmt17(a));
        s.push(',');
        s.push_str(&fmt17(t));
        s.push(',');
        s.push_str(&fmt17(v));
        s.push('\n');
    }
    s
}
