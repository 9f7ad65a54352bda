//! Table serialization: CSV and JSONL.
//!
//! CSV rows use Rust's shortest-round-trip float formatting, which emits as
//! many significant digits as the value needs (up to 17) and parses back to
//! the identical bits. Non-finite entries render as `nan`. JSONL emits one
//! object per row with the same keys; NaN maps to `null` both ways, so
//! `parse_jsonl(emit(t)) == t` bitwise.

use crate::config::OutputFormat;
use crate::sweep::{ResultRow, ResultTable};

const CSV_COMMENT: &str =
    "# gamma_g is reported in (-pi, pi]; treat pi and -pi as the same plateau value\n";
const CSV_HEADER: &str = "param,re_z,im_z,abs_z,log_abs_z,gamma_g,min_gap,n_singular\n";

fn field(v: f64) -> String {
    if v.is_nan() {
        "nan".to_string()
    } else {
        format!("{v}")
    }
}

/// Serialize a table.
pub fn emit(table: &ResultTable, format: OutputFormat) -> Vec<u8> {
    match format {
        OutputFormat::Csv => {
            let mut out = String::new();
            out.push_str(CSV_COMMENT);
            out.push_str(CSV_HEADER);
            for r in &table.rows {
                out.push_str(&format!(
                    "{},{},{},{},{},{},{},{}\n",
                    field(r.param),
                    field(r.re_z),
                    field(r.im_z),
                    field(r.abs_z),
                    field(r.log_abs_z),
                    r.gamma_g.map_or_else(|| "nan".to_string(), field),
                    field(r.min_gap),
                    r.n_singular
                ));
            }
            out.into_bytes()
        }
        OutputFormat::Jsonl => {
            let mut out = Vec::new();
            for r in &table.rows {
                serde_json::to_writer(&mut out, r).expect("row serialization cannot fail");
                out.push(b'\n');
            }
            out
        }
    }
}

/// Parse a JSONL byte stream back into a table.
pub fn parse_jsonl(bytes: &[u8]) -> Result<ResultTable, serde_json::Error> {
    let text = String::from_utf8_lossy(bytes);
    let rows: Result<Vec<ResultRow>, _> = text
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(serde_json::from_str)
        .collect();
    Ok(ResultTable { rows: rows? })
}
