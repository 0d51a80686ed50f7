//! Output renderers. Every format is derived from one JSON document, whose
//! object keys are sorted, so output is a pure function of the inputs.

use serde_json::Value;

pub fn json(doc: &Value) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("a Value always serializes");
    s.push('\n');
    s
}

fn scalar(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

/// Depth-first `(dotted.path, value)` pairs of all leaves.
fn leaves(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    let join = |k: &str| {
        if prefix.is_empty() {
            k.to_owned()
        } else {
            format!("{prefix}.{k}")
        }
    };
    match v {
        Value::Object(map) => {
            // A {"num","den"} pair reads better as one fraction.
            if let (Some(Value::String(n)), Some(Value::String(d)), 2) =
                (map.get("num"), map.get("den"), map.len())
            {
                out.push((prefix.to_owned(), format!("{n}/{d}")));
                return;
            }
            for (k, x) in map {
                leaves(&join(k), x, out);
            }
        }
        Value::Array(items) if items.iter().any(|x| x.is_object() || x.is_array()) => {
            for (i, x) in items.iter().enumerate() {
                leaves(&join(&i.to_string()), x, out);
            }
        }
        Value::Array(items) => {
            let parts: Vec<_> = items.iter().map(scalar).collect();
            out.push((prefix.to_owned(), parts.join(" ")));
        }
        other => out.push((prefix.to_owned(), scalar(other))),
    }
}

pub fn flat_csv(doc: &Value) -> String {
    let mut rows = Vec::new();
    leaves("", doc, &mut rows);
    let mut s = String::from("field,value\n");
    for (k, v) in rows {
        s.push_str(&format!("{},{}\n", csv_field(&k), csv_field(&v)));
    }
    s
}

pub fn flat_text(doc: &Value) -> String {
    let mut rows = Vec::new();
    leaves("", doc, &mut rows);
    let width = rows
        .iter()
        .map(|(k, _)| k.chars().count())
        .max()
        .unwrap_or(0);
    let mut s = String::new();
    for (k, v) in rows {
        if v.contains('\n') {
            s.push_str(&format!("{k}:\n"));
            for line in v.lines() {
                s.push_str(&format!("    {line}\n"));
            }
        } else {
            s.push_str(&format!("{k:<width$}  {v}\n"));
        }
    }
    s
}

fn columns(doc: &Value) -> Vec<String> {
    doc["columns"]
        .as_array()
        .map(|c| c.iter().map(scalar).collect())
        .unwrap_or_default()
}

fn cells(doc: &Value, key: &str) -> Vec<Vec<String>> {
    let cols = columns(doc);
    doc[key]
        .as_array()
        .map(|rows| {
            rows.iter()
                .map(|r| cols.iter().map(|c| scalar(&r[c.as_str()])).collect())
                .collect()
        })
        .unwrap_or_default()
}

/// Header plus one line per row, in the document's fixed column order.
pub fn table_csv(doc: &Value, key: &str) -> String {
    let mut s = columns(doc).join(",");
    s.push('\n');
    for row in cells(doc, key) {
        let fields: Vec<_> = row.iter().map(|c| csv_field(c)).collect();
        s.push_str(&fields.join(","));
        s.push('\n');
    }
    s
}

pub fn table_text(doc: &Value, key: &str) -> String {
    let mut meta = Vec::new();
    leaves("", &doc["meta"], &mut meta);
    let mut s = String::new();
    for (k, v) in meta {
        s.push_str(&format!("# {k}: {v}\n"));
    }
    let cols = columns(doc);
    let rows = cells(doc, key);
    let widths: Vec<usize> = cols
        .iter()
        .enumerate()
        .map(|(i, c)| {
            rows.iter()
                .map(|r| r[i].chars().count())
                .chain([c.chars().count()])
                .max()
                .unwrap_or(0)
        })
        .collect();
    let line = |cells: &[String]| {
        let parts: Vec<_> = cells
            .iter()
            .zip(&widths)
            .map(|(c, &w)| format!("{c:>w$}"))
            .collect();
        format!("{}\n", parts.join("  ").trim_end())
    };
    s.push_str(&line(&cols));
    for r in &rows {
        s.push_str(&line(r));
    }
    s
}
