use serde_json::Value;
use sosreg::counterex::SosVerdict;
use sosreg::exprlang::catalog_entries;

pub fn sos_label(v: SosVerdict) -> &'static str {
    match v {
        SosVerdict::FailsSos => "fails-SOS",
        SosVerdict::Inconclusive => "inconclusive",
        SosVerdict::DoesNotTrigger => "does-not-trigger",
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) if s.contains(',') || s.contains('"') => format!("\"{}\"", s.replace('"', "\"\"")),
        Value::String(s) => s.clone(),
        Value::Array(a) => a.iter().map(cell).collect::<Vec<_>>().join(" "),
        other => other.to_string(),
    }
}

/// CSV of flat JSON objects, columns from the first row.
pub fn csv(rows: &[Value]) -> String {
    let Some(Value::Object(first)) = rows.first() else {
        return String::new();
    };
    let keys: Vec<&String> = first.keys().collect();
    let mut out = keys.iter().map(|k| k.as_str()).collect::<Vec<_>>().join(",");
    out.push('\n');
    for r in rows {
        let line: Vec<String> = keys.iter().map(|k| cell(r.get(k.as_str()).unwrap_or(&Value::Null))).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

pub fn catalog_table() -> String {
    let entries = catalog_entries();
    let w = entries.iter().map(|e| e.name.len()).max().unwrap_or(4);
    let mut out = String::new();
    for e in &entries {
        out.push_str(&format!("{:<w$}  {}\n", e.name, e.formula));
        if !e.params.is_empty() {
            out.push_str(&format!("{:<w$}  params: {}\n", "", e.params));
        }
        out.push_str(&format!("{:<w$}  {}\n", "", e.note));
    }
    out.trim_end().to_string()
}
