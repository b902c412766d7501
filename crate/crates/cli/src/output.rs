//! Result envelopes, provenance and the csv/table renderers.

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use unitlat::estimator::EstimateRow;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Table,
}

/// Everything needed to replay a run. Deliberately free of timestamps and
/// host details so identical invocations produce identical bytes.
#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub seed: u64,
    pub precision_bits: u32,
    pub config_sha256: String,
}

impl Provenance {
    pub fn new(command: &str, seed: u64, precision_bits: u32, config: &[u8]) -> Self {
        let digest = Sha256::digest(config);
        Self {
            tool: "unitlat",
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            seed,
            precision_bits,
            config_sha256: digest.iter().map(|b| format!("{b:02x}")).collect(),
        }
    }

    fn comment_lines(&self) -> String {
        format!(
            "# tool={} version={} command={} seed={} precision_bits={} config_sha256={}\n",
            self.tool, self.version, self.command, self.seed, self.precision_bits, self.config_sha256
        )
    }
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    provenance: &'a Provenance,
    result: &'a T,
}

pub fn json<T: Serialize>(prov: &Provenance, result: &T) -> String {
    let mut s = serde_json::to_string_pretty(&Envelope { provenance: prov, result }).expect("serializable");
    s.push('\n');
    s
}

pub fn estimate_csv(prov: &Provenance, rows: &[EstimateRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).expect("csv row");
    }
    let body = String::from_utf8(w.into_inner().expect("flush")).expect("utf8");
    prov.comment_lines() + &body
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(|| "-".into(), |v| format!("{v:.4e}"))
}

pub fn estimate_table(prov: &Provenance, rows: &[EstimateRow]) -> String {
    let header = ["model", "m", "n", "logD", "Q", "term1", "term2", "term3", "term4", "term5", "term6", "log10(total)"];
    let mut cells: Vec<Vec<String>> = vec![header.iter().map(|s| s.to_string()).collect()];
    for r in rows {
        cells.push(vec![
            r.model.clone(),
            r.m.to_string(),
            r.n.to_string(),
            format!("{:.2}", r.log_d),
            format!("{:.2}", r.q),
            fmt_opt(r.term1),
            fmt_opt(r.term2),
            fmt_opt(r.term3),
            fmt_opt(r.term4),
            fmt_opt(r.term5),
            fmt_opt(r.term6),
            format!("{:.3}", r.total_log10),
        ]);
    }
    prov.comment_lines() + &align(&cells)
}

fn align(cells: &[Vec<String>]) -> String {
    let cols = cells.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> =
        (0..cols).map(|c| cells.iter().filter_map(|r| r.get(c)).map(|s| s.chars().count()).max().unwrap_or(0)).collect();
    let mut out = String::new();
    for row in cells {
        let line: Vec<String> = row.iter().enumerate().map(|(i, s)| format!("{s:>w$}", w = widths[i])).collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
    }
    out
}

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::Null => Some("-".into()),
        Value::Bool(b) => Some(b.to_string()),
        Value::Number(n) => Some(n.to_string()),
        Value::String(s) => Some(s.clone()),
        _ => None,
    }
}

fn render(key: &str, v: &Value, out: &mut String) {
    if let Some(s) = scalar(v) {
        out.push_str(&format!("{key}: {s}\n"));
        return;
    }
    match v {
        Value::Array(items) if items.iter().all(|r| matches!(r, Value::Array(c) if c.iter().all(|x| scalar(x).is_some()))) => {
            out.push_str(&format!("{key}:\n"));
            let cells: Vec<Vec<String>> = items
                .iter()
                .map(|r| r.as_array().map(|c| c.iter().filter_map(scalar).collect()).unwrap_or_default())
                .collect();
            for line in align(&cells).lines() {
                out.push_str("  ");
                out.push_str(line);
                out.push('\n');
            }
        }
        Value::Array(items) if items.iter().all(|x| scalar(x).is_some()) => {
            let parts: Vec<String> = items.iter().filter_map(scalar).collect();
            out.push_str(&format!("{key}: [{}]\n", parts.join(", ")));
        }
        Value::Array(items) => {
            for (i, x) in items.iter().enumerate() {
                render(&format!("{key}[{i}]"), x, out);
            }
        }
        Value::Object(map) => {
            for (k, x) in map {
                let name = if key.is_empty() { k.clone() } else { format!("{key}.{k}") };
                render(&name, x, out);
            }
        }
        _ => unreachable!(),
    }
}

/// Human-readable dump of any result: scalars as `key: value`, matrices as
/// aligned blocks.
pub fn table<T: Serialize>(prov: &Provenance, result: &T) -> String {
    let v = serde_json::to_value(result).expect("serializable");
    let mut out = prov.comment_lines();
    render("", &v, &mut out);
    out
}
