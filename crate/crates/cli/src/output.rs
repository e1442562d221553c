use serde_json::Value;

use crate::args::Format;
use crate::record::ResultRecord;

pub fn render(rec: &ResultRecord, format: Format) -> String {
    match format {
        Format::Json => serde_json::to_string_pretty(rec).expect("records always serialize") + "\n",
        Format::Csv => csv(rec),
        Format::Plain => plain(rec),
    }
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

fn table(value: &Value) -> Option<(Vec<String>, Vec<Vec<String>>)> {
    let rows = value.as_array()?;
    let first = rows.first()?.as_object()?;
    let header: Vec<String> = first.keys().cloned().collect();
    let body = rows
        .iter()
        .map(|r| header.iter().map(|k| scalar(&r[k])).collect())
        .collect();
    Some((header, body))
}

fn csv(rec: &ResultRecord) -> String {
    let mut w = ::csv::Writer::from_writer(Vec::new());
    let write = |w: &mut ::csv::Writer<Vec<u8>>, row: &[String]| w.write_record(row).expect("in-memory write");
    if let Some((header, body)) = table(&rec.value) {
        write(&mut w, &header);
        for row in &body {
            write(&mut w, row);
        }
    } else if let Some(items) = rec.value.as_array() {
        write(&mut w, &["index".into(), "value".into()]);
        for (i, v) in items.iter().enumerate() {
            write(&mut w, &[i.to_string(), scalar(v)]);
        }
    } else {
        let mut header = vec!["quantity".to_string()];
        header.extend(rec.params.keys().cloned());
        header.extend(["value".into(), "stderr".into()]);
        let mut row = vec![rec.quantity.clone()];
        row.extend(rec.params.values().map(scalar));
        row.push(scalar(&rec.value));
        row.push(rec.stderr.map(|s| s.to_string()).unwrap_or_default());
        write(&mut w, &header);
        write(&mut w, &row);
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv of utf-8 fields")
}

fn plain(rec: &ResultRecord) -> String {
    let mut out = String::new();
    if rec.quantity == "verify-all" {
        for row in rec.value.as_array().into_iter().flatten() {
            let mark = if row["passed"] == true { "PASS" } else { "FAIL" };
            out += &format!(
                "[{mark}] {} {}: {} ({:.1}s)\n",
                scalar(&row["id"]),
                scalar(&row["name"]),
                scalar(&row["detail"]),
                row["seconds"].as_f64().unwrap_or(0.0)
            );
        }
        return out;
    }
    let args: Vec<String> = rec.params.iter().map(|(k, v)| format!("{k}={}", scalar(v))).collect();
    out += &format!("{}({})", rec.quantity, args.join(", "));
    if let Some((header, body)) = table(&rec.value) {
        out += "\n";
        let widths: Vec<usize> = (0..header.len())
            .map(|i| body.iter().map(|r| r[i].len()).chain([header[i].len()]).max().unwrap_or(0))
            .collect();
        for row in std::iter::once(&header).chain(&body) {
            let cells: Vec<String> = row.iter().zip(&widths).map(|(c, w)| format!("{c:>w$}")).collect();
            out += &format!("  {}\n", cells.join("  "));
        }
    } else {
        out += &format!(" = {}", scalar(&rec.value));
        if let Some(se) = rec.stderr {
            out += &format!(" ± {se}");
        }
        out += "\n";
    }
    if let Some(Value::Object(detail)) = &rec.detail {
        for (k, v) in detail {
            out += &format!("  {k}: {}\n", scalar(v));
        }
    }
    if rec.meta.cached {
        out += "  (cached)\n";
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn csv_single_and_table() {
        let rec = ResultRecord::new("mc-l1", 2.75).param("m", 2).param("n", 50).stderr(0.01);
        assert_eq!(csv(&rec), "quantity,m,n,value,stderr\nmc-l1,2,50,2.75,0.01\n");
        let rec = ResultRecord::new("recip-series", json!([{"k": 0, "c": "1"}, {"k": 1, "c": "-1/4"}]));
        assert_eq!(csv(&rec), "c,k\n1,0\n-1/4,1\n");
    }

    #[test]
    fn plain_scalar() {
        let rec = ResultRecord::new("invgamma", 5.0).param("y", 24.0);
        assert_eq!(plain(&rec), "invgamma(y=24.0) = 5.0\n");
    }
}
