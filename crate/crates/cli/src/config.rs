//! Run configuration: built-in defaults, then a `key = value` file with
//! `[section]` headers, then command-line flags.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::ValueEnum;
use ini::Ini;

use latlab::arith::DEFAULT_LIMIT_CAP;
use latlab::calib::P2_HELD_OUT;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, ValueEnum)]
pub enum Command {
    Sieve,
    Errterm,
    Series,
    Correlations,
    Theorem4,
    Theorem5,
    Kober,
    Jutila,
    Atkinson,
    Moments,
    Funceq,
    Mellin,
    All,
    Calibrate,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Sieve => "sieve",
            Command::Errterm => "errterm",
            Command::Series => "series",
            Command::Correlations => "correlations",
            Command::Theorem4 => "theorem4",
            Command::Theorem5 => "theorem5",
            Command::Kober => "kober",
            Command::Jutila => "jutila",
            Command::Atkinson => "atkinson",
            Command::Moments => "moments",
            Command::Funceq => "funceq",
            Command::Mellin => "mellin",
            Command::All => "all",
            Command::Calibrate => "calibrate",
        }
    }

    /// The suites `all` runs, in order.
    pub const SUITES: [Command; 12] = [
        Command::Sieve,
        Command::Errterm,
        Command::Series,
        Command::Correlations,
        Command::Theorem4,
        Command::Theorem5,
        Command::Kober,
        Command::Jutila,
        Command::Atkinson,
        Command::Moments,
        Command::Funceq,
        Command::Mellin,
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn err<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

/// Parameter grids, one field per suite parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct Grids {
    pub sieve_n: u64,
    pub errterm_x: Vec<f64>,
    pub errterm_mean_t: f64,
    pub series_x: Vec<f64>,
    pub series_n: usize,
    pub corr_x: f64,
    pub corr_h: Vec<u64>,
    pub motohashi_x: Vec<f64>,
    pub theorem4_t: Vec<f64>,
    pub theorem5_t: Vec<f64>,
    pub kober_sigma: Vec<f64>,
    pub jutila_s: Vec<f64>,
    pub atkinson_sigma: Vec<f64>,
    pub moments_e_t: Vec<f64>,
    pub moments_i2_t: Vec<f64>,
    pub sandwich_k1_t: Vec<f64>,
    pub sandwich_k2_t: Vec<f64>,
    pub mellin_c: Vec<f64>,
    /// Re/Im pairs.
    pub mellin_z: Vec<(f64, f64)>,
}

/// Ten points 10·100^{k/9} + 0.37, the last pulled below 10³.
pub fn default_series_x() -> Vec<f64> {
    (0..10)
        .map(|k| (10.0 * 100f64.powf(k as f64 / 9.0) + 0.37).min(999.37))
        .collect()
}

fn log_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64))
        .collect()
}

impl Default for Grids {
    fn default() -> Self {
        Self {
            sieve_n: 1_000_016,
            errterm_x: vec![10.5, 100.7, 1000.25, 12345.5],
            errterm_mean_t: 1000.0,
            series_x: default_series_x(),
            series_n: 100_000,
            corr_x: 1e5,
            corr_h: (1..=8).collect(),
            motohashi_x: log_spaced(1e4, 1e6, 10),
            theorem4_t: vec![200.0, 500.0, 1000.0, 2000.0],
            theorem5_t: P2_HELD_OUT.to_vec(),
            kober_sigma: (2..=10).map(|k| k as f64 / 100.0).collect(),
            jutila_s: vec![0.1, 0.5, 1.0, 2.0, 3.0],
            atkinson_sigma: log_spaced(1.0 / 3000.0, 1.0 / 200.0, 8),
            moments_e_t: vec![100.0, 1000.0, 5000.0],
            moments_i2_t: latlab::calib::fourth_moment_grid(),
            sandwich_k1_t: vec![200.0, 500.0],
            sandwich_k2_t: vec![1000.0],
            mellin_c: vec![0.5, 1.0, 2.0],
            mellin_z: vec![(1.0, 0.0), (0.5, 0.5), (2.0, -1.0), (3.0, 0.0)],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub out: PathBuf,
    pub format: Format,
    pub threads: Option<usize>,
    pub budget_seconds: f64,
    /// Largest sieve any suite may build (the memory budget).
    pub max_sieve: u64,
    pub cache: Option<PathBuf>,
    pub grids: Grids,
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        Self {
            command,
            out: PathBuf::from("reports"),
            format: Format::Csv,
            threads: None,
            budget_seconds: 3600.0,
            max_sieve: DEFAULT_LIMIT_CAP,
            cache: None,
            grids: Grids::default(),
        }
    }

    /// Applies a file, then `overrides` (`section.key` → value).
    pub fn load(
        command: Command,
        file: Option<&Path>,
        overrides: &BTreeMap<String, String>,
    ) -> Result<Self, ConfigError> {
        let mut cfg = Self::new(command);
        if let Some(path) = file {
            let ini = Ini::load_from_file(path)
                .map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
            for (section, props) in ini.iter() {
                let section = section.unwrap_or("run");
                for (key, value) in props.iter() {
                    cfg.set(section, key, value)?;
                }
            }
        }
        for (k, v) in overrides {
            let (section, key) = k
                .split_once('.')
                .ok_or_else(|| ConfigError(format!("override `{k}` needs section.key")))?;
            cfg.set(section, key, v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn set(&mut self, section: &str, key: &str, value: &str) -> Result<(), ConfigError> {
        let g = &mut self.grids;
        match (section, key) {
            ("run", "out") => self.out = PathBuf::from(value),
            ("run", "format") => {
                self.format = Format::from_str(value, true).map_err(ConfigError)?;
            }
            ("run", "threads") => self.threads = Some(scalar(key, value)?),
            ("run", "budget_seconds") => self.budget_seconds = scalar(key, value)?,
            ("run", "max_sieve") => self.max_sieve = scalar(key, value)?,
            ("run", "cache") => self.cache = Some(PathBuf::from(value)),
            ("sieve", "N") => g.sieve_n = scalar(key, value)?,
            ("errterm", "x") => g.errterm_x = list(key, value)?,
            ("errterm", "T") => g.errterm_mean_t = scalar(key, value)?,
            ("series", "x") => g.series_x = list(key, value)?,
            ("series", "N") => g.series_n = scalar(key, value)?,
            ("correlations", "x") => g.corr_x = scalar(key, value)?,
            ("correlations", "h") => g.corr_h = list(key, value)?,
            ("correlations", "fit_x") => g.motohashi_x = list(key, value)?,
            ("theorem4", "T") => g.theorem4_t = list(key, value)?,
            ("theorem5", "T") => g.theorem5_t = list(key, value)?,
            ("kober", "sigma") => g.kober_sigma = list(key, value)?,
            ("jutila", "s") => g.jutila_s = list(key, value)?,
            ("atkinson", "sigma") => g.atkinson_sigma = list(key, value)?,
            ("moments", "T") => g.moments_e_t = list(key, value)?,
            ("moments", "fit_T") => g.moments_i2_t = list(key, value)?,
            ("moments", "sandwich1_T") => g.sandwich_k1_t = list(key, value)?,
            ("moments", "sandwich2_T") => g.sandwich_k2_t = list(key, value)?,
            ("mellin", "c") => g.mellin_c = list(key, value)?,
            ("mellin", "z") => {
                let v: Vec<f64> = list(key, value)?;
                if v.len() % 2 != 0 {
                    return err("mellin.z takes re,im pairs");
                }
                g.mellin_z = v.chunks(2).map(|p| (p[0], p[1])).collect();
            }
            ("funceq", "grid") => {
                if value.trim() != "default" {
                    return err(format!("funceq.grid supports only `default`, got `{value}`"));
                }
            }
            _ => return err(format!("unknown key [{section}] {key}")),
        }
        Ok(())
    }

    fn validate(&self) -> Result<(), ConfigError> {
        if !(self.budget_seconds > 0.0) {
            return err("budget_seconds must be positive");
        }
        if self.max_sieve == 0 {
            return err("max_sieve must be positive");
        }
        if self.threads == Some(0) {
            return err("threads must be positive");
        }
        let g = &self.grids;
        let lists: [(&str, usize); 14] = [
            ("errterm.x", g.errterm_x.len()),
            ("series.x", g.series_x.len()),
            ("correlations.h", g.corr_h.len()),
            ("correlations.fit_x", g.motohashi_x.len()),
            ("theorem4.T", g.theorem4_t.len()),
            ("theorem5.T", g.theorem5_t.len()),
            ("kober.sigma", g.kober_sigma.len()),
            ("jutila.s", g.jutila_s.len()),
            ("atkinson.sigma", g.atkinson_sigma.len()),
            ("moments.T", g.moments_e_t.len()),
            ("moments.fit_T", g.moments_i2_t.len()),
            ("moments.sandwich1_T", g.sandwich_k1_t.len()),
            ("mellin.c", g.mellin_c.len()),
            ("mellin.z", g.mellin_z.len()),
        ];
        for (name, n) in lists {
            if n == 0 {
                return err(format!("{name} is empty"));
            }
        }
        if g.series_n < 2 || g.sieve_n == 0 {
            return err("series.N must be at least 2 and sieve.N positive");
        }
        Ok(())
    }

    /// Settings that determine report content, for the provenance block.
    pub fn echo(&self) -> serde_json::Value {
        let g = &self.grids;
        serde_json::json!({
            "command": self.command.name(),
            "max_sieve": self.max_sieve,
            "grids": {
                "sieve.N": g.sieve_n,
                "errterm.x": g.errterm_x,
                "errterm.T": g.errterm_mean_t,
                "series.x": g.series_x,
                "series.N": g.series_n,
                "correlations.x": g.corr_x,
                "correlations.h": g.corr_h,
                "correlations.fit_x": g.motohashi_x,
                "theorem4.T": g.theorem4_t,
                "theorem5.T": g.theorem5_t,
                "kober.sigma": g.kober_sigma,
                "jutila.s": g.jutila_s,
                "atkinson.sigma": g.atkinson_sigma,
                "moments.T": g.moments_e_t,
                "moments.fit_T": g.moments_i2_t,
                "moments.sandwich1_T": g.sandwich_k1_t,
                "moments.sandwich2_T": g.sandwich_k2_t,
                "mellin.c": g.mellin_c,
                "mellin.z": g.mellin_z,
            }
        })
    }
}

fn scalar<T: FromStr>(key: &str, value: &str) -> Result<T, ConfigError> {
    let v = value.trim();
    // allow 1e6 for integer keys
    v.parse::<T>()
        .or_else(|_| match v.parse::<f64>() {
            Ok(f) if f.fract() == 0.0 && f >= 0.0 => format!("{}", f as u64).parse::<T>(),
            _ => v.parse::<T>(),
        })
        .map_err(|_| ConfigError(format!("{key}: cannot parse `{value}`")))
}

fn list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>, ConfigError> {
    if value.trim().is_empty() {
        return Ok(Vec::new());
    }
    value.split(',').map(|p| scalar(key, p)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_then_overrides() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("run.cfg");
        std::fs::write(
            &p,
            "[run]\nformat = json\nbudget_seconds = 10\n\n[theorem4]\nT = 200, 500\n[sieve]\nN = 1e5\n",
        )
        .unwrap();
        let mut o = BTreeMap::new();
        o.insert("theorem4.T".to_string(), "1000".to_string());
        let c = RunConfig::load(Command::Theorem4, Some(&p), &o).unwrap();
        assert_eq!(c.format, Format::Json);
        assert_eq!(c.budget_seconds, 10.0);
        assert_eq!(c.grids.theorem4_t, vec![1000.0]);
        assert_eq!(c.grids.sieve_n, 100_000);
    }

    #[test]
    fn rejects_bad_input() {
        let mut o = BTreeMap::new();
        o.insert("theorem4.T".to_string(), "".to_string());
        assert!(RunConfig::load(Command::Theorem4, None, &o).is_err());
        let mut o = BTreeMap::new();
        o.insert("nowhere.key".to_string(), "1".to_string());
        assert!(RunConfig::load(Command::Sieve, None, &o).is_err());
        let mut o = BTreeMap::new();
        o.insert("run.budget_seconds".to_string(), "-1".to_string());
        assert!(RunConfig::load(Command::Sieve, None, &o).is_err());
    }

    #[test]
    fn series_points_are_non_integral_and_in_range() {
        let xs = default_series_x();
        assert_eq!(xs.len(), 10);
        assert!(xs.iter().all(|x| x.fract() != 0.0 && (10.0..=1000.0).contains(x)));
    }
}
