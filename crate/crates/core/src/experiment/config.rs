//! Sweep configuration: the in-memory type, its validation rules, and the
//! flat `key = value` file format.
//!
//! Exactly one grid axis is given: `N` with `snr_db_grid` (sweep SNR at
//! fixed sample count) or `N_grid` with `snr_db` (sweep sample count at
//! fixed SNR). Arrays are comma-separated. `#` starts a comment.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("missing field '{0}'")]
    Missing(&'static str),
    #[error("field '{field}': cannot parse '{value}'")]
    BadValue { field: String, value: String },
    #[error("unknown field '{0}'")]
    Unknown(String),
    #[error("line {0}: expected 'key = value'")]
    BadLine(usize),
    #[error("exactly one of (N, snr_db_grid) or (N_grid, snr_db) must be given")]
    AxisConflict,
    #[error("field '{field}': {reason}")]
    Invalid { field: &'static str, reason: String },
}

/// One selection method to run per trial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    /// Criterion-based selection over the greedy path with the given ζ.
    EbicR { zeta: f64 },
    /// Greedy path truncated at the true cardinality.
    Oracle,
    /// Full enumeration up to the path-length cardinality.
    Exhaustive,
}

impl Method {
    pub fn label(&self) -> &'static str {
        match self {
            Method::EbicR { .. } => "ebicr",
            Method::Oracle => "oracle",
            Method::Exhaustive => "exhaustive",
        }
    }
}

/// The swept variable and its grid.
#[derive(Debug, Clone, PartialEq)]
pub enum GridAxis {
    Snr { n: usize, snr_grid_db: Vec<f64> },
    SampleCount { n_grid: Vec<usize>, snr_db: f64 },
}

impl GridAxis {
    pub fn len(&self) -> usize {
        match self {
            GridAxis::Snr { snr_grid_db, .. } => snr_grid_db.len(),
            GridAxis::SampleCount { n_grid, .. } => n_grid.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Column name of the swept variable in result files.
    pub fn variable(&self) -> &'static str {
        match self {
            GridAxis::Snr { .. } => "snr_db",
            GridAxis::SampleCount { .. } => "N",
        }
    }

    /// (N, snr_db, grid value) at grid index `g`.
    pub fn point(&self, g: usize) -> (usize, f64, f64) {
        match self {
            GridAxis::Snr { n, snr_grid_db } => (*n, snr_grid_db[g], snr_grid_db[g]),
            GridAxis::SampleCount { n_grid, snr_db } => (n_grid[g], *snr_db, n_grid[g] as f64),
        }
    }

    fn min_n(&self) -> usize {
        match self {
            GridAxis::Snr { n, .. } => *n,
            GridAxis::SampleCount { n_grid, .. } => n_grid.iter().copied().min().unwrap_or(0),
        }
    }
}

/// Where each trial's true support comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SupportPolicy {
    /// Blocks {1, …, K_B} every trial.
    FixedFirst,
    /// K_B blocks drawn uniformly without replacement per trial, from the
    /// trial's own support substream.
    RandomPerTrial,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub p: usize,
    pub l: usize,
    pub l_b: usize,
    pub k_b: usize,
    pub grid: GridAxis,
    pub support_policy: SupportPolicy,
    pub trials: usize,
    pub seed: u64,
    pub methods: Vec<Method>,
    /// Requested greedy path length K; clamped per grid point to
    /// min(K, N/L_B, p_B) so narrow geometries stay feasible.
    pub path_len: usize,
    pub var_floor_rel: f64,
}

impl ExperimentConfig {
    pub fn p_b(&self) -> usize {
        self.p / self.l_b
    }

    /// Effective path length at sample count `n`.
    pub fn path_len_at(&self, n: usize) -> usize {
        self.path_len.min(n / self.l_b).min(self.p_b())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.trials < 1 {
            return Err(ConfigError::Invalid {
                field: "trials",
                reason: "must be at least 1".into(),
            });
        }
        if self.grid.is_empty() {
            return Err(ConfigError::Invalid {
                field: "grid",
                reason: "grid is empty".into(),
            });
        }
        if self.l_b == 0 || self.p == 0 || self.l == 0 {
            return Err(ConfigError::Invalid {
                field: "p",
                reason: "dimensions must be at least 1".into(),
            });
        }
        if self.p % self.l_b != 0 {
            return Err(ConfigError::Invalid {
                field: "L_B",
                reason: format!("{} does not divide p = {}", self.l_b, self.p),
            });
        }
        if self.k_b < 1 || self.k_b > self.p_b() {
            return Err(ConfigError::Invalid {
                field: "K_B",
                reason: format!("must be in 1..={}", self.p_b()),
            });
        }
        let min_n = self.grid.min_n();
        if self.k_b * self.l_b >= min_n {
            return Err(ConfigError::Invalid {
                field: "K_B",
                reason: format!(
                    "K_B·L_B = {} must be below the smallest N = {min_n}",
                    self.k_b * self.l_b
                ),
            });
        }
        if self.path_len < self.k_b {
            return Err(ConfigError::Invalid {
                field: "K",
                reason: format!("path length {} is below K_B = {}", self.path_len, self.k_b),
            });
        }
        if self.methods.is_empty() {
            return Err(ConfigError::Invalid {
                field: "methods",
                reason: "at least one method is required".into(),
            });
        }
        for m in &self.methods {
            if let Method::EbicR { zeta } = m {
                if !(*zeta >= 0.0) {
                    return Err(ConfigError::Invalid {
                        field: "zeta",
                        reason: format!("must be nonnegative, got {zeta}"),
                    });
                }
            }
        }
        if !(self.var_floor_rel > 0.0) {
            return Err(ConfigError::Invalid {
                field: "var_floor_rel",
                reason: "must be positive".into(),
            });
        }
        Ok(())
    }
}

fn parse_field<T: std::str::FromStr>(field: &str, value: &str) -> Result<T, ConfigError> {
    value.trim().parse().map_err(|_| ConfigError::BadValue {
        field: field.to_string(),
        value: value.trim().to_string(),
    })
}

fn parse_list<T: std::str::FromStr>(field: &str, value: &str) -> Result<Vec<T>, ConfigError> {
    value
        .split(',')
        .map(|tok| parse_field(field, tok))
        .collect()
}

/// Parses the flat config format. Recognized keys: p, L, L_B, K_B, trials,
/// seed, methods, zeta, K, var_floor_rel, support, and the axis pair
/// (N + snr_db_grid) or (N_grid + snr_db).
pub fn parse_config_text(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let mut pairs: Vec<(String, String)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or(ConfigError::BadLine(i + 1))?;
        pairs.push((k.trim().to_string(), v.trim().to_string()));
    }
    let known = [
        "p", "L", "L_B", "K_B", "trials", "seed", "methods", "zeta", "K", "var_floor_rel",
        "support", "N", "snr_db_grid", "N_grid", "snr_db",
    ];
    for (k, _) in &pairs {
        if !known.contains(&k.as_str()) {
            return Err(ConfigError::Unknown(k.clone()));
        }
    }
    let get = |key: &'static str| -> Option<&str> {
        pairs
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    };
    let require = |key: &'static str| -> Result<&str, ConfigError> {
        get(key).ok_or(ConfigError::Missing(key))
    };

    let p: usize = parse_field("p", require("p")?)?;
    let l: usize = parse_field("L", require("L")?)?;
    let l_b: usize = parse_field("L_B", require("L_B")?)?;
    let k_b: usize = parse_field("K_B", require("K_B")?)?;
    let trials: usize = parse_field("trials", require("trials")?)?;
    let seed: u64 = parse_field("seed", require("seed")?)?;

    let grid = match (get("N"), get("snr_db_grid"), get("N_grid"), get("snr_db")) {
        (Some(n), Some(grid), None, None) => GridAxis::Snr {
            n: parse_field("N", n)?,
            snr_grid_db: parse_list("snr_db_grid", grid)?,
        },
        (None, None, Some(ns), Some(snr)) => GridAxis::SampleCount {
            n_grid: parse_list("N_grid", ns)?,
            snr_db: parse_field("snr_db", snr)?,
        },
        _ => return Err(ConfigError::AxisConflict),
    };

    let zetas: Vec<f64> = match get("zeta") {
        Some(v) => parse_list("zeta", v)?,
        None => vec![1.0],
    };
    let mut methods = Vec::new();
    for tok in require("methods")?.split(',') {
        match tok.trim() {
            "ebicr" => {
                for &zeta in &zetas {
                    methods.push(Method::EbicR { zeta });
                }
            }
            "oracle" => methods.push(Method::Oracle),
            "exhaustive" => methods.push(Method::Exhaustive),
            other => {
                return Err(ConfigError::BadValue {
                    field: "methods".into(),
                    value: other.into(),
                })
            }
        }
    }

    let support_policy = match get("support") {
        None | Some("fixed") => SupportPolicy::FixedFirst,
        Some("random") => SupportPolicy::RandomPerTrial,
        Some(other) => {
            return Err(ConfigError::BadValue {
                field: "support".into(),
                value: other.into(),
            })
        }
    };

    let path_len: usize = match get("K") {
        Some(v) => parse_field("K", v)?,
        None => 2 * k_b,
    };
    let var_floor_rel: f64 = match get("var_floor_rel") {
        Some(v) => parse_field("var_floor_rel", v)?,
        None => 1e-12,
    };

    let config = ExperimentConfig {
        p,
        l,
        l_b,
        k_b,
        grid,
        support_policy,
        trials,
        seed,
        methods,
        path_len,
        var_floor_rel,
    };
    config.validate()?;
    Ok(config)
}
