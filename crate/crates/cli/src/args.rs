use clap::{Parser, ValueEnum};
use serde::Serialize;
use std::ffi::OsString;
use std::path::PathBuf;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Density grid of eta_m(sigma, X) on [-extent, extent]^2.
    Density,
    /// Density and CDF of Re e^{-i alpha} eta_m(sigma, X) on an x grid.
    Marginal,
    /// Saddle-point tail P(Re e^{-i alpha} eta > tau) with the asymptotic alongside.
    Tail,
    /// Saddle point for tau and the tilted density around it.
    Saddle,
    /// Samples of the Dirichlet polynomial on [T, 2T].
    Empirical,
    /// Time moments against random-model moments.
    Moments,
    /// g_n table and the tail constants.
    Constants,
    /// Plain against Beurling-Selberg smoothed rectangle counting.
    SelbergCheck,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Parser, Serialize)]
#[command(name = "etadist", version, about = "Value distribution of log zeta and its iterated integrals")]
#[command(allow_negative_numbers = true, args_override_self = true)]
pub struct Cli {
    pub command: Command,

    /// key=value file of default flags; explicit flags override it.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,

    #[arg(long, default_value = "0.75", value_parser = real)]
    pub sigma: f64,
    #[arg(long, default_value = "0", value_parser = count_u32)]
    pub m: u32,
    #[arg(long, default_value = "0", value_parser = real)]
    pub alpha: f64,

    /// Accuracy target; the default depends on the command.
    #[arg(long, value_parser = real)]
    pub tol: Option<f64>,
    #[arg(long, default_value = "4", value_parser = real)]
    pub extent: f64,
    #[arg(long, default_value = "0.05", value_parser = real)]
    pub step: f64,

    /// Prime cutoff of the Dirichlet polynomial.
    #[arg(long = "Y", value_parser = real)]
    #[serde(rename = "Y")]
    pub y: Option<f64>,
    /// Height; samples cover [T, 2T].
    #[arg(long = "T", default_value = "1e6", value_parser = real)]
    #[serde(rename = "T")]
    pub t: f64,
    #[arg(long, default_value = "1e6", value_parser = count)]
    pub n_samples: u64,
    #[arg(long, default_value = "0", value_parser = count)]
    pub seed: u64,

    #[arg(long, value_parser = real)]
    pub tau: Option<f64>,
    /// Smallest kappa at which asymptotic formulas are reported.
    #[arg(long, default_value = "1e3", value_parser = real)]
    pub kappa_floor: f64,
    /// Smallest saddle point accepted by `tail`.
    #[arg(long, default_value = "10", value_parser = real)]
    pub kappa_min: f64,
    /// Primes up to this bound enter the cumulant individually.
    #[arg(long, default_value = "1e6", value_parser = count)]
    pub table_limit: u64,
    /// Monte Carlo draws for `tail`; 0 skips the check.
    #[arg(long, default_value = "0", value_parser = count)]
    pub mc_samples: u64,

    #[arg(long, default_value = "1", value_parser = count_u32)]
    pub k: u32,
    #[arg(long, default_value = "1", value_parser = count_u32)]
    pub l: u32,
    #[arg(long, default_value = "4", value_parser = count)]
    pub n_max: u64,

    /// Beurling-Selberg length; defaults to (log T)^sigma (log log T)^m.
    #[arg(long = "L", value_parser = real)]
    #[serde(rename = "L")]
    pub smoothing: Option<f64>,
    #[arg(long, default_value = "-1", value_parser = real)]
    pub c1: f64,
    #[arg(long, default_value = "1", value_parser = real)]
    pub d1: f64,
    #[arg(long, default_value = "-1", value_parser = real)]
    pub c2: f64,
    #[arg(long, default_value = "1", value_parser = real)]
    pub d2: f64,

    #[arg(long, value_parser = real)]
    pub x_min: Option<f64>,
    #[arg(long, value_parser = real)]
    pub x_max: Option<f64>,
    #[arg(long, value_parser = real)]
    pub x_step: Option<f64>,

    /// Also report the rectangle discrepancy against the model density.
    #[arg(long, default_value = "false", action = clap::ArgAction::Set)]
    pub discrepancy: bool,

    /// Output file; stdout when absent. CSV output gets a `.meta.json` sidecar.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    #[arg(long, value_parser = count)]
    #[serde(skip)]
    pub threads: Option<u64>,
}

fn real(s: &str) -> Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|_| format!("`{s}` is not a number"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("`{s}` is not finite"))
    }
}

/// Non-negative integer, also written as `1e6`.
fn count(s: &str) -> Result<u64, String> {
    let v = real(s)?;
    if v < 0.0 || v.fract() != 0.0 || v > 2f64.powi(53) {
        return Err(format!("`{s}` is not a non-negative integer"));
    }
    Ok(v as u64)
}

fn count_u32(s: &str) -> Result<u32, String> {
    let v = count(s)?;
    u32::try_from(v).map_err(|_| format!("`{s}` is too large"))
}

/// Splices `--key value` pairs from a `--config` file in front of the
/// explicit arguments, so later flags win.
pub fn expand_config(args: Vec<OsString>) -> Result<Vec<OsString>, String> {
    let mut path = None;
    for (i, a) in args.iter().enumerate() {
        let a = a.to_string_lossy();
        if a == "--config" {
            path = args.get(i + 1).map(PathBuf::from);
        } else if let Some(p) = a.strip_prefix("--config=") {
            path = Some(PathBuf::from(p));
        }
    }
    let Some(path) = path else { return Ok(args) };
    let text = std::fs::read_to_string(&path).map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
    let mut out = vec![args[0].clone()];
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("{}:{}: expected key=value", path.display(), n + 1))?;
        let key = key.trim();
        let key = if matches!(key, "Y" | "T" | "L") { key.to_string() } else { key.replace('_', "-") };
        if key == "config" || key == "command" {
            return Err(format!("{}:{}: `{key}` cannot be set from a config file", path.display(), n + 1));
        }
        out.push(format!("--{key}").into());
        out.push(value.trim().into());
    }
    out.extend(args.into_iter().skip(1));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_accept_scientific_notation() {
        assert_eq!(count("1e6"), Ok(1_000_000));
        assert!(count("1.5").is_err());
        assert!(count("-2").is_err());
        assert!(real("inf").is_err());
    }

    #[test]
    fn later_flags_override_config() {
        let dir = std::env::temp_dir().join(format!("etadist-args-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let file = dir.join("run.cfg");
        std::fs::write(&file, "# model\nsigma = 0.6\nn_samples=2e3\nT = 1e4\n").unwrap();
        let args: Vec<OsString> = ["etadist", "empirical", "--config", file.to_str().unwrap(), "--sigma", "0.8"]
            .iter()
            .map(OsString::from)
            .collect();
        let cli = Cli::try_parse_from(expand_config(args).unwrap()).unwrap();
        assert_eq!(cli.sigma, 0.8);
        assert_eq!(cli.n_samples, 2000);
        assert_eq!(cli.t, 1e4);
        assert_eq!(cli.command, Command::Empirical);
        std::fs::remove_dir_all(dir).unwrap();
    }
}
