//! CSV and JSON writers. Every artifact carries the format version and the
//! effective configuration.

use std::io::Write;
use std::path::Path;

use serde_json::{Map, Value};

use crate::error::Result;

pub const FORMAT_VERSION: &str = "pflow-artifact/1";

/// 17 significant digits in scientific notation, enough to round-trip an f64.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.16e}")
    }
}

/// Writes `# key = value` preamble lines, the header row and the rows.
pub fn write_csv<W: Write>(
    out: &mut W,
    echo: &[(&str, String)],
    header: &[&str],
    rows: impl IntoIterator<Item = Vec<f64>>,
) -> Result<()> {
    write_table(out, echo, header, rows.into_iter().map(|r| r.into_iter().map(fmt_num).collect()))
}

/// Like [`write_csv`] with preformatted cells.
pub fn write_table<W: Write>(
    out: &mut W,
    echo: &[(&str, String)],
    header: &[&str],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> Result<()> {
    writeln!(out, "# format_version = {FORMAT_VERSION}")?;
    for (k, v) in echo {
        writeln!(out, "# {k} = {v}")?;
    }
    writeln!(out, "{}", header.join(","))?;
    for row in rows {
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

pub fn write_csv_file(
    path: &Path,
    echo: &[(&str, String)],
    header: &[&str],
    rows: impl IntoIterator<Item = Vec<f64>>,
) -> Result<()> {
    let mut buf = Vec::new();
    write_csv(&mut buf, echo, header, rows)?;
    std::fs::write(path, buf)?;
    Ok(())
}

/// The rows of a CSV artifact, skipping the preamble and header.
pub fn csv_body(text: &str) -> Vec<&str> {
    text.lines().filter(|l| !l.starts_with('#')).skip(1).collect()
}

/// Wraps `body` (a JSON object) with `format_version` and `config`.
pub fn json_artifact(echo: &[(&str, String)], body: Value) -> Value {
    let mut top = Map::new();
    top.insert("format_version".into(), Value::String(FORMAT_VERSION.into()));
    let config: Map<String, Value> = echo.iter().map(|(k, v)| (k.to_string(), Value::String(v.clone()))).collect();
    top.insert("config".into(), Value::Object(config));
    if let Value::Object(fields) = body {
        top.extend(fields);
    } else {
        top.insert("body".into(), body);
    }
    Value::Object(top)
}

pub fn write_json_file(path: &Path, value: &Value) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    std::fs::write(path, text + "\n")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, std::f64::consts::PI] {
            let s = fmt_num(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
            let digits = s.split('e').next().unwrap().chars().filter(|c| c.is_ascii_digit()).count();
            assert_eq!(digits, 17);
        }
        assert_eq!(fmt_num(f64::NAN), "nan");
    }

    #[test]
    fn csv_has_preamble_and_header() {
        let mut buf = Vec::new();
        write_csv(&mut buf, &[("p", "1.5".into())], &["t", "x"], vec![vec![0.0, 1.0]]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("# format_version = pflow-artifact/1\n# p = 1.5\nt,x\n"));
        assert_eq!(csv_body(&text), vec!["0.0000000000000000e0,1.0000000000000000e0"]);
    }

    #[test]
    fn json_embeds_config() {
        let v = json_artifact(&[("p", "1.5".into())], serde_json::json!({"H": 2.0}));
        assert_eq!(v["format_version"], FORMAT_VERSION);
        assert_eq!(v["config"]["p"], "1.5");
        assert_eq!(v["H"], 2.0);
    }
}
