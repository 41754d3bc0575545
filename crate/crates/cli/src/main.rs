//! `ond`: run OND relay-channel experiments and write CSV/JSON results.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use ond_core::harness::{
    emit_results, run_experiment, to_csv_string, to_json_string, ExperimentKind, ExperimentSpec,
    NRule, OutputFormat,
};
use ond_core::{Convention, Error, Scheme};

#[derive(Debug, Parser)]
#[command(name = "ond", version, about = "Monte Carlo experiments for opportunistic network decoupling")]
struct Args {
    /// TOML experiment file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,

    /// rate-vs-snr, til-vs-n, scheme-comparison or cdf-validation.
    #[arg(long)]
    kind: Option<String>,

    /// Number of source-destination pairs.
    #[arg(long)]
    k: Option<usize>,

    /// Relay counts, comma separated.
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<usize>>,

    /// fixed, alternate (N = snr^(3K-2)) or no-alternate (N = snr^(2K-2)).
    #[arg(long)]
    n_rule: Option<String>,

    /// SNR grid in dB: a comma list or start:stop:step.
    #[arg(long, allow_hyphen_values = true)]
    snr_db: Option<String>,

    /// Data slots per block (odd, >= 3).
    #[arg(long)]
    slots: Option<usize>,

    #[arg(long)]
    trials: Option<usize>,

    /// ond-alternate, ond-no-alternate, max-min-snr; comma separated.
    #[arg(long, value_delimiter = ',')]
    scheme: Option<Vec<String>>,

    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,

    /// unit-complex-variance or unit-per-component.
    #[arg(long)]
    convention: Option<String>,

    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,

    /// csv or json.
    #[arg(long, default_value = "csv")]
    format: String,

    #[arg(long)]
    threads: Option<usize>,

    /// Upper limit on relay counts from the scaling rules.
    #[arg(long)]
    n_cap: Option<usize>,

    #[arg(long)]
    memory_cap_mb: Option<u64>,
}

fn parse_snr_grid(text: &str) -> Result<Vec<f64>, Error> {
    let bad = || Error::Config {
        field: "snr_db",
        reason: format!("cannot parse `{text}`"),
    };
    if text.contains(':') {
        let parts: Vec<f64> = text
            .split(':')
            .map(|p| p.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| bad())?;
        let [start, stop, step] = parts[..] else {
            return Err(bad());
        };
        if !(step > 0.0) || stop < start {
            return Err(bad());
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
        Ok((0..count).map(|i| start + step * i as f64).collect())
    } else {
        text.split(',')
            .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
            .collect()
    }
}

fn build_spec(args: &Args) -> Result<ExperimentSpec, Error> {
    let mut spec = match &args.config {
        Some(path) => ExperimentSpec::from_toml_file(path)?,
        None => ExperimentSpec::default(),
    };
    if let Some(kind) = &args.kind {
        spec.kind = kind.parse::<ExperimentKind>()?;
        if args.config.is_none() && args.scheme.is_none() && spec.kind == ExperimentKind::SchemeComparison {
            spec.schemes = Scheme::ALL.to_vec();
        }
    }
    if let Some(k) = args.k {
        spec.k_pairs = k;
    }
    if let Some(n) = &args.n {
        spec.n_list = n.clone();
    }
    if let Some(rule) = &args.n_rule {
        spec.n_rule = rule.parse::<NRule>()?;
    }
    if let Some(grid) = &args.snr_db {
        spec.snr_db = parse_snr_grid(grid)?;
    }
    if let Some(l) = args.slots {
        spec.l_slots = l;
    }
    if let Some(t) = args.trials {
        spec.trials = t;
    }
    if let Some(schemes) = &args.scheme {
        spec.schemes = schemes
            .iter()
            .map(|s| s.parse::<Scheme>())
            .collect::<Result<_, _>>()?;
    }
    if let Some(seed) = args.seed {
        spec.master_seed = seed;
    }
    if let Some(c) = &args.convention {
        spec.convention = c.parse::<Convention>()?;
    }
    if let Some(t) = args.threads {
        spec.threads = Some(t);
    }
    if let Some(cap) = args.n_cap {
        spec.n_cap = cap;
    }
    if let Some(cap) = args.memory_cap_mb {
        spec.memory_cap_mb = cap;
    }
    Ok(spec)
}

fn run(args: &Args) -> Result<(), Error> {
    let format = args.format.parse::<OutputFormat>()?;
    let spec = build_spec(args)?;
    let rows = run_experiment(&spec)?;
    match &args.out {
        Some(path) => emit_results(&spec, &rows, format, path),
        None => {
            let text = match format {
                OutputFormat::Csv => to_csv_string(&rows)?,
                OutputFormat::Json => to_json_string(&spec, &rows)?,
            };
            std::io::stdout()
                .write_all(text.as_bytes())
                .map_err(|source| Error::Io {
                    path: "<stdout>".into(),
                    source,
                })
        }
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("ond: {} error: {e}", e.category());
            ExitCode::from(match e.category() {
                "config" => 2,
                "resource" => 3,
                "io" => 4,
                _ => 1,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snr_grid_forms() {
        assert_eq!(parse_snr_grid("0:45:5").unwrap().len(), 10);
        assert_eq!(parse_snr_grid("0, 10,20").unwrap(), vec![0.0, 10.0, 20.0]);
        assert_eq!(parse_snr_grid("-5:5:5").unwrap(), vec![-5.0, 0.0, 5.0]);
        assert!(parse_snr_grid("0:10").is_err());
        assert!(parse_snr_grid("0:10:0").is_err());
        assert!(parse_snr_grid("x").is_err());
    }
}
