use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::run::ResultRow;
use super::spec::ExperimentSpec;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            _ => Err(Error::config("format", format!("unknown format `{s}`"))),
        }
    }
}

/// CSV column order. Matches the field order of [`ResultRow`].
pub const CSV_HEADER: [&str; 17] = [
    "experiment",
    "k_pairs",
    "n_relays",
    "n_capped",
    "snr_db",
    "scheme",
    "metric",
    "l_slots",
    "trials",
    "master_seed",
    "mean_sum_rate",
    "se_sum_rate",
    "mean_kth_min_til",
    "se_kth_min_til",
    "mean_inv_kth_min_til",
    "se_inv_kth_min_til",
    "ks_distance",
];

/// JSON document: the spec that produced the rows plus the rows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JsonReport {
    pub spec: ExperimentSpec,
    pub master_seed: u64,
    pub rows: Vec<ResultRow>,
}

/// Formats `x` with 9 significant digits, dropping trailing zeros.
pub fn format_sig9(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if !(-5..9).contains(&exp) {
        let mantissa = mantissa.trim_end_matches('0').trim_end_matches('.');
        return format!("{mantissa}e{exp}");
    }
    let decimals = (8 - exp).max(0) as usize;
    let fixed = format!("{x:.decimals$}");
    if fixed.contains('.') {
        fixed.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        fixed
    }
}

fn opt_f64(v: Option<f64>) -> String {
    v.map(format_sig9).unwrap_or_default()
}

fn csv_record(row: &ResultRow) -> Vec<String> {
    vec![
        row.experiment.clone(),
        row.k_pairs.to_string(),
        row.n_relays.to_string(),
        row.n_capped.to_string(),
        opt_f64(row.snr_db),
        row.scheme.clone().unwrap_or_default(),
        row.metric.clone().unwrap_or_default(),
        row.l_slots.to_string(),
        row.trials.to_string(),
        row.master_seed.to_string(),
        opt_f64(row.mean_sum_rate),
        opt_f64(row.se_sum_rate),
        opt_f64(row.mean_kth_min_til),
        opt_f64(row.se_kth_min_til),
        opt_f64(row.mean_inv_kth_min_til),
        opt_f64(row.se_inv_kth_min_til),
        opt_f64(row.ks_distance),
    ]
}

/// Renders rows as CSV text with a header line.
pub fn to_csv_string(rows: &[ResultRow]) -> Result<String> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(vec![]);
    let ser = |e: csv::Error| Error::Serialize(e.to_string());
    w.write_record(CSV_HEADER).map_err(ser)?;
    for row in rows {
        w.write_record(csv_record(row)).map_err(ser)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Serialize(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Serialize(e.to_string()))
}

pub fn to_json_string(spec: &ExperimentSpec, rows: &[ResultRow]) -> Result<String> {
    let report = JsonReport {
        spec: spec.clone(),
        master_seed: spec.master_seed,
        rows: rows.to_vec(),
    };
    let mut s = serde_json::to_string_pretty(&report).map_err(|e| Error::Serialize(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

/// Parses CSV produced by [`to_csv_string`].
pub fn parse_csv(text: &str) -> Result<Vec<ResultRow>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    r.deserialize()
        .map(|rec| rec.map_err(|e| Error::Serialize(e.to_string())))
        .collect()
}

pub fn parse_json(text: &str) -> Result<JsonReport> {
    serde_json::from_str(text).map_err(|e| Error::Serialize(e.to_string()))
}

/// Writes rows to `path` in `format`.
pub fn emit_results(
    spec: &ExperimentSpec,
    rows: &[ResultRow],
    format: OutputFormat,
    path: &Path,
) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::arg("rows", "nothing to write"));
    }
    let text = match format {
        OutputFormat::Csv => to_csv_string(rows)?,
        OutputFormat::Json => to_json_string(spec, rows)?,
    };
    let io = |source| Error::Io {
        path: path.display().to_string(),
        source,
    };
    let mut out = BufWriter::new(File::create(path).map_err(io)?);
    out.write_all(text.as_bytes()).map_err(io)?;
    out.flush().map_err(io)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sig9_formatting() {
        assert_eq!(format_sig9(0.0), "0");
        assert_eq!(format_sig9(1.0), "1");
        assert_eq!(format_sig9(10.0 / 11.0), "0.909090909");
        assert_eq!(format_sig9(123456.789012), "123456.789");
        assert_eq!(format_sig9(-2.5), "-2.5");
        assert_eq!(format_sig9(1.234567891e-7), "1.23456789e-7");
        assert_eq!(format_sig9(6.02214076e23), "6.02214076e23");
        assert_eq!(format_sig9(0.099999999999), "0.1");
        for x in [3.14159265358979, 1e-3 / 7.0, 98765.4321] {
            let back: f64 = format_sig9(x).parse().unwrap();
            assert!(((back - x) / x).abs() < 5e-9);
        }
    }

    #[test]
    fn header_matches_row_fields() {
        let row = ResultRow {
            experiment: "x".into(),
            k_pairs: 1,
            n_relays: 2,
            n_capped: false,
            snr_db: None,
            scheme: None,
            metric: None,
            l_slots: 3,
            trials: 1,
            master_seed: 0,
            mean_sum_rate: None,
            se_sum_rate: None,
            mean_kth_min_til: None,
            se_kth_min_til: None,
            mean_inv_kth_min_til: None,
            se_inv_kth_min_til: None,
            ks_distance: None,
        };
        let json = serde_json::to_value(&row).unwrap();
        let keys: Vec<&str> = json.as_object().unwrap().keys().map(String::as_str).collect();
        let mut sorted_header = CSV_HEADER.to_vec();
        sorted_header.sort_unstable();
        let mut keys_sorted = keys.clone();
        keys_sorted.sort_unstable();
        assert_eq!(sorted_header, keys_sorted);
        assert_eq!(csv_record(&row).len(), CSV_HEADER.len());
    }
}
