//! Experiment descriptions: which benchmark to run, over which parameter
//! grid, and where the results go. Values come from built-in defaults, an
//! optional flat key=value config file, and CLI flags, in that order of
//! precedence (flags win).

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use coharray_core::model::ProblemConfig;

use crate::{BenchError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExperimentKind {
    SweepP,
    SweepSize,
    Trace,
    Table1,
    Oracle,
    Single,
}

impl ExperimentKind {
    pub fn id(&self) -> &'static str {
        match self {
            ExperimentKind::SweepP => "sweep-p",
            ExperimentKind::SweepSize => "sweep-size",
            ExperimentKind::Trace => "trace",
            ExperimentKind::Table1 => "table1",
            ExperimentKind::Oracle => "oracle",
            ExperimentKind::Single => "single",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    Riap,
    RiapExpurgated,
    Diap,
}

impl Algorithm {
    pub fn id(&self) -> &'static str {
        match self {
            Algorithm::Riap => "riap",
            Algorithm::RiapExpurgated => "riap-expurgated",
            Algorithm::Diap => "diap",
        }
    }

    /// Whether this algorithm consumes the elimination budget `p`.
    pub fn uses_p(&self) -> bool {
        matches!(self, Algorithm::Diap)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Algorithm {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "riap" => Ok(Algorithm::Riap),
            "riap-expurgated" => Ok(Algorithm::RiapExpurgated),
            "diap" => Ok(Algorithm::Diap),
            other => Err(BenchError::InvalidArgument(format!(
                "unknown algorithm '{other}' (expected riap, riap-expurgated, or diap)"
            ))),
        }
    }
}

/// Fully resolved description of one experiment invocation.
#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub experiment: ExperimentKind,
    pub config: ProblemConfig,
    pub p_values: Vec<f64>,
    pub size_values: Vec<(usize, usize)>,
    pub runs: usize,
    pub base_seed: u64,
    pub algorithms: Vec<Algorithm>,
    pub expurgation_draws: usize,
    pub output_path: PathBuf,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        self.config.validate()?;
        if self.runs < 1 {
            return Err(BenchError::InvalidArgument("runs must be at least 1".into()));
        }
        if self.expurgation_draws < 1 {
            return Err(BenchError::InvalidArgument(
                "expurgation draws must be at least 1".into(),
            ));
        }
        match self.experiment {
            ExperimentKind::SweepP => {
                if self.p_values.is_empty() {
                    return Err(BenchError::InvalidArgument(
                        "sweep-p needs at least one p value".into(),
                    ));
                }
                if !self.algorithms.contains(&Algorithm::Diap) {
                    return Err(BenchError::InvalidArgument(
                        "sweep-p requires the diap algorithm".into(),
                    ));
                }
            }
            ExperimentKind::SweepSize => {
                if self.size_values.is_empty() {
                    return Err(BenchError::InvalidArgument(
                        "sweep-size needs at least one (M,N) size".into(),
                    ));
                }
            }
            ExperimentKind::Trace => {
                if !self.algorithms.contains(&Algorithm::Diap) {
                    return Err(BenchError::InvalidArgument(
                        "trace requires the diap algorithm".into(),
                    ));
                }
            }
            _ => {}
        }
        if self.experiment != ExperimentKind::Oracle && self.algorithms.is_empty() {
            return Err(BenchError::InvalidArgument(
                "at least one algorithm must be selected".into(),
            ));
        }
        for &p in &self.p_values {
            if !(p > 0.0) {
                return Err(BenchError::InvalidArgument(format!(
                    "p values must be positive, got {p}"
                )));
            }
        }
        Ok(())
    }
}

/// Optional overrides parsed from a config file or CLI flags. `None` fields
/// fall through to the next layer.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub g: Option<usize>,
    pub m_tilde: Option<usize>,
    pub n_tilde: Option<usize>,
    pub m: Option<usize>,
    pub n: Option<usize>,
    pub p_values: Option<Vec<f64>>,
    pub size_values: Option<Vec<(usize, usize)>>,
    pub runs: Option<usize>,
    pub base_seed: Option<u64>,
    pub algorithms: Option<Vec<Algorithm>>,
    pub expurgation_draws: Option<usize>,
    pub output_path: Option<PathBuf>,
}

impl Overrides {
    /// Layer `other` on top of `self`: fields set in `other` win.
    pub fn merged_with(mut self, other: Overrides) -> Overrides {
        macro_rules! take {
            ($($field:ident),*) => {
                $(if other.$field.is_some() { self.$field = other.$field; })*
            };
        }
        take!(
            g, m_tilde, n_tilde, m, n, p_values, size_values, runs, base_seed,
            algorithms, expurgation_draws, output_path
        );
        self
    }
}

/// Parse a flat key=value config file. Blank lines and `#` comments are
/// skipped; list values are comma-separated; sizes are `M` or `MxN`.
pub fn parse_config_file(path: &Path) -> Result<Overrides> {
    let text = fs::read_to_string(path)?;
    let mut out = Overrides::default();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(BenchError::InvalidArgument(format!(
                "{}:{}: expected key = value, got '{raw}'",
                path.display(),
                lineno + 1
            )));
        };
        let (key, value) = (key.trim(), value.trim());
        let bad = |what: &str| {
            BenchError::InvalidArgument(format!(
                "{}:{}: invalid {what} '{value}'",
                path.display(),
                lineno + 1
            ))
        };
        match key {
            "g" => out.g = Some(value.parse().map_err(|_| bad("integer"))?),
            "mtilde" => out.m_tilde = Some(value.parse().map_err(|_| bad("integer"))?),
            "ntilde" => out.n_tilde = Some(value.parse().map_err(|_| bad("integer"))?),
            "m" => out.m = Some(value.parse().map_err(|_| bad("integer"))?),
            "n" => out.n = Some(value.parse().map_err(|_| bad("integer"))?),
            "runs" => out.runs = Some(value.parse().map_err(|_| bad("integer"))?),
            "seed" => out.base_seed = Some(value.parse().map_err(|_| bad("integer"))?),
            "draws" => {
                out.expurgation_draws = Some(value.parse().map_err(|_| bad("integer"))?)
            }
            "out" => out.output_path = Some(PathBuf::from(value)),
            "p" => {
                let values: std::result::Result<Vec<f64>, _> =
                    value.split(',').map(|v| v.trim().parse()).collect();
                out.p_values = Some(values.map_err(|_| bad("p list"))?);
            }
            "algo" => {
                let algos: Result<Vec<Algorithm>> =
                    value.split(',').map(|v| v.trim().parse()).collect();
                out.algorithms = Some(algos?);
            }
            "sizes" => {
                let sizes: Result<Vec<(usize, usize)>> =
                    value.split(',').map(|v| parse_size(v.trim())).collect();
                out.size_values = Some(sizes?);
            }
            other => {
                return Err(BenchError::InvalidArgument(format!(
                    "{}:{}: unknown key '{other}'",
                    path.display(),
                    lineno + 1
                )));
            }
        }
    }
    Ok(out)
}

/// `"7"` means M=N=7; `"3x5"` means M=3, N=5.
pub fn parse_size(s: &str) -> Result<(usize, usize)> {
    let bad = || BenchError::InvalidArgument(format!("invalid size '{s}' (expected M or MxN)"));
    if let Some((m, n)) = s.split_once('x') {
        Ok((m.trim().parse().map_err(|_| bad())?, n.trim().parse().map_err(|_| bad())?))
    } else {
        let mn: usize = s.trim().parse().map_err(|_| bad())?;
        Ok((mn, mn))
    }
}

/// Assemble the final spec from defaults and override layers.
pub fn resolve(experiment: ExperimentKind, overrides: Overrides) -> Result<ExperimentSpec> {
    let g = overrides.g.unwrap_or(200);
    let m_tilde = overrides.m_tilde.unwrap_or(100);
    let n_tilde = overrides.n_tilde.unwrap_or(100);
    let m = overrides.m.unwrap_or(7);
    let n = overrides.n.unwrap_or(7);
    let config = ProblemConfig::new(m_tilde, n_tilde, m, n, g)?;

    let p_values = overrides.p_values.unwrap_or_else(|| match experiment {
        ExperimentKind::SweepP => vec![0.1, 0.3, 0.5, 0.7, 0.9],
        ExperimentKind::Table1 => vec![0.33, 1.0, 3.0],
        _ => vec![0.33],
    });
    let size_values = overrides
        .size_values
        .unwrap_or_else(|| vec![(4, 4), (7, 7), (10, 10), (14, 14)]);
    let algorithms = overrides.algorithms.unwrap_or_else(|| match experiment {
        ExperimentKind::SweepP | ExperimentKind::Trace | ExperimentKind::Single => {
            vec![Algorithm::Diap]
        }
        _ => vec![Algorithm::Riap, Algorithm::Diap],
    });
    let runs = overrides.runs.unwrap_or(match experiment {
        ExperimentKind::Single | ExperimentKind::Oracle => 1,
        _ => 100,
    });
    let output_path = overrides
        .output_path
        .unwrap_or_else(|| PathBuf::from(format!("{}.csv", experiment.id())));

    let spec = ExperimentSpec {
        experiment,
        config,
        p_values,
        size_values,
        runs,
        base_seed: overrides.base_seed.unwrap_or(1),
        algorithms,
        expurgation_draws: overrides.expurgation_draws.unwrap_or(30),
        output_path,
    };
    spec.validate()?;
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn parses_sizes() {
        assert_eq!(parse_size("7").unwrap(), (7, 7));
        assert_eq!(parse_size("3x5").unwrap(), (3, 5));
        assert!(parse_size("3x").is_err());
        assert!(parse_size("seven").is_err());
    }

    #[test]
    fn config_file_round_trip_with_cli_precedence() {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        writeln!(
            file,
            "# experiment settings\ng = 40\nmtilde = 20\nntilde = 20\nm = 3\nn = 3\n\
             p = 0.33, 1.0\nalgo = riap, diap\nruns = 5\nseed = 9\ndraws = 4\n\
             sizes = 4, 3x5\nout = results.csv"
        )
        .unwrap();
        let from_file = parse_config_file(file.path()).unwrap();
        let cli = Overrides { runs: Some(2), ..Default::default() };
        let spec = resolve(ExperimentKind::Table1, from_file.merged_with(cli)).unwrap();
        assert_eq!(spec.config.g_count, 40);
        assert_eq!(spec.config.m_tilde, 20);
        assert_eq!(spec.runs, 2, "CLI flag beats config file");
        assert_eq!(spec.base_seed, 9);
        assert_eq!(spec.p_values, vec![0.33, 1.0]);
        assert_eq!(spec.size_values, vec![(4, 4), (3, 5)]);
        assert_eq!(spec.algorithms, vec![Algorithm::Riap, Algorithm::Diap]);
        assert_eq!(spec.expurgation_draws, 4);
        assert_eq!(spec.output_path, PathBuf::from("results.csv"));
    }

    #[test]
    fn rejects_unknown_keys_and_malformed_lines() {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        writeln!(file, "bogus = 1").unwrap();
        assert!(parse_config_file(file.path()).is_err());

        let mut file = tempfile::NamedTempFile::new().unwrap();
        writeln!(file, "no equals sign here").unwrap();
        assert!(parse_config_file(file.path()).is_err());
    }

    #[test]
    fn defaults_match_experiment_kind() {
        let spec = resolve(ExperimentKind::Table1, Overrides::default()).unwrap();
        assert_eq!(spec.config.g_count, 200);
        assert_eq!(spec.config.m_tilde, 100);
        assert_eq!(spec.config.m, 7);
        assert_eq!(spec.p_values, vec![0.33, 1.0, 3.0]);
        assert_eq!(spec.runs, 100);
        assert_eq!(spec.algorithms, vec![Algorithm::Riap, Algorithm::Diap]);

        let spec = resolve(ExperimentKind::Single, Overrides::default()).unwrap();
        assert_eq!(spec.runs, 1);
        assert_eq!(spec.algorithms, vec![Algorithm::Diap]);
    }

    #[test]
    fn validation_rejects_bad_specs() {
        let no_p = Overrides { p_values: Some(vec![]), ..Default::default() };
        assert!(resolve(ExperimentKind::SweepP, no_p).is_err());
        let neg_p = Overrides { p_values: Some(vec![-0.5]), ..Default::default() };
        assert!(resolve(ExperimentKind::Table1, neg_p).is_err());
        let riap_only = Overrides {
            algorithms: Some(vec![Algorithm::Riap]),
            ..Default::default()
        };
        assert!(resolve(ExperimentKind::SweepP, riap_only).is_err());
        let zero_runs = Overrides { runs: Some(0), ..Default::default() };
        assert!(resolve(ExperimentKind::Table1, zero_runs).is_err());
    }
}
