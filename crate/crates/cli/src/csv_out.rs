//! CSV projection of JSON-lines reports.
//!
//! Columns are the union of the row keys in sorted order. Strings are written
//! bare, other scalars as their JSON text, and nested values as compact JSON.

use std::collections::BTreeSet;

use anyhow::Result;
use serde_json::Value;

fn cell(v: Option<&Value>) -> String {
    match v {
        None | Some(Value::Null) => String::new(),
        Some(Value::String(s)) => s.clone(),
        Some(other) => other.to_string(),
    }
}

pub fn project(rows: &[Value]) -> Result<String> {
    let columns: BTreeSet<&str> = rows
        .iter()
        .filter_map(Value::as_object)
        .flat_map(|o| o.keys().map(String::as_str))
        .collect();
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&columns)?;
    for row in rows {
        w.write_record(columns.iter().map(|c| cell(row.get(*c))))?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn projects_union_of_columns() {
        let rows = vec![json!({"row": "a", "x": 1.5}), json!({"row": "b", "y": [1, 2], "z": "q,r"})];
        let text = project(&rows).unwrap();
        let mut r = csv::Reader::from_reader(text.as_bytes());
        assert_eq!(r.headers().unwrap(), vec!["row", "x", "y", "z"]);
        let recs: Vec<csv::StringRecord> = r.records().map(|x| x.unwrap()).collect();
        assert_eq!(&recs[0], vec!["a", "1.5", "", ""]);
        assert_eq!(&recs[1], vec!["b", "", "[1,2]", "q,r"]);
    }
}
