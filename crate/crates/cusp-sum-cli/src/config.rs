use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

/// Every key accepted in a config file, each also a `--key` flag.
pub const KEYS: &[(&str, &str)] = &[
    (
        "command",
        "coeff | kloosterman | delta | voronoi | bounds | scan | pipeline | all",
    ),
    ("out", "report path; '-' writes to stdout"),
    ("format", "csv | json (pipeline and all default to json)"),
    ("seed", "64-bit seed for randomized instances [0]"),
    (
        "threads",
        "worker threads; falls back to CUSP_SUM_THREADS, then all cores",
    ),
    ("form", "'tau' or a coefficient file path [tau]"),
    ("n-max", "coefficient table length for tau"),
    ("c-max", "largest modulus (kloosterman) [100]"),
    ("pairs", "random (m, n) pairs per modulus (kloosterman) [4]"),
    ("m-max", "|m|, |n| range for the random pairs (kloosterman) [1000]"),
    ("c-cut", "δ-method cutoff C (delta) [40]"),
    ("n-range", "reconstruct δ(n) for |n| ≤ n-range (delta) [20]"),
    ("a", "comma-separated additive twists (voronoi) [1]"),
    ("c", "comma-separated moduli (voronoi) [3]"),
    ("x", "comma-separated test-function scales X (voronoi) [30]"),
    ("tol", "identity tolerance (delta, voronoi)"),
    ("lemma", "karatsuba | majorant | squarefree | all (bounds) [all]"),
    ("trials", "random instances (bounds karatsuba) [10000]"),
    ("x-min", "lower end of the dyadic X range (scan) [16]"),
    ("x-max", "upper end of the dyadic X range (scan, pipeline) [65536]"),
    ("grid", "standard (α, β) grid size (scan) [50]"),
    ("random", "extra seeded random (α, β) points (scan) [0]"),
    ("sum", "quadratic | linear (scan) [quadratic]"),
    ("theta", "T₁ exponent knob (pipeline) [1/18]"),
    ("mellin-x", "X for the Mellin inversion check (pipeline) [20]"),
];

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn known(key: &str) -> bool {
    KEYS.iter().any(|(k, _)| *k == key)
}

/// Resolved key=value settings.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Config {
    values: BTreeMap<String, String>,
}

impl Config {
    /// Flat `key = value` lines; `#` starts a comment line.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut values = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| ConfigError(format!("line {}: expected key=value, found '{line}'", i + 1)))?;
            let key = k.trim().replace('_', "-");
            if !known(&key) {
                return Err(ConfigError(format!("line {}: unknown key '{key}'", i + 1)));
            }
            if values.insert(key.clone(), v.trim().to_string()).is_some() {
                return Err(ConfigError(format!("line {}: duplicate key '{key}'", i + 1)));
            }
        }
        Ok(Config { values })
    }

    pub fn set(&mut self, key: &str, value: &str) {
        self.values.insert(key.to_string(), value.to_string());
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn entries(&self) -> &BTreeMap<String, String> {
        &self.values
    }

    pub fn get<T: FromStr>(&self, key: &str, default: T) -> Result<T, ConfigError> {
        match self.raw(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| ConfigError(format!("{key}: cannot parse '{v}'"))),
        }
    }

    pub fn list<T: FromStr>(&self, key: &str, default: &[T]) -> Result<Vec<T>, ConfigError>
    where
        T: Clone,
    {
        match self.raw(key) {
            None => Ok(default.to_vec()),
            Some(v) => v
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse()
                        .map_err(|_| ConfigError(format!("{key}: cannot parse '{s}'")))
                })
                .collect(),
        }
    }

    pub fn choice<'a>(&self, key: &str, options: &[&'a str], default: &'a str) -> Result<&'a str, ConfigError> {
        let v = self.raw(key).unwrap_or(default);
        options
            .iter()
            .find(|o| **o == v)
            .copied()
            .ok_or_else(|| ConfigError(format!("{key}: '{v}' is not one of {}", options.join(", "))))
    }
}
