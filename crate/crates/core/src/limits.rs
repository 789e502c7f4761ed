/// Computational caps shared by the enumerating routines.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Limits {
    /// Maximum `N * s` numerator entries a generated point set may hold.
    pub max_entries: u64,
    /// Maximum number of critical corners visited by one exact discrepancy run.
    pub max_corner_ops: u64,
    /// Maximum number of frequency vectors enumerated by one exponential-sum sweep.
    pub max_frequencies: u64,
    /// Largest dimension for which all `2^s - 1` coordinate subsets are enumerated.
    pub max_subset_dim: usize,
}

/// Environment variable overriding the operation caps.
pub const MAX_OPS_ENV: &str = "PSET_DISC_MAX_OPS";

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_entries: 10_000_000,
            max_corner_ops: 1_000_000_000,
            max_frequencies: 10_000_000,
            max_subset_dim: 20,
        }
    }
}

impl Limits {
    /// Defaults, with `PSET_DISC_MAX_OPS` (if set to a positive integer)
    /// replacing the corner and frequency caps.
    pub fn from_env() -> Self {
        let mut limits = Limits::default();
        if let Some(ops) = std::env::var(MAX_OPS_ENV)
            .ok()
            .and_then(|v| v.trim().parse::<u64>().ok())
            .filter(|&v| v > 0)
        {
            limits.max_corner_ops = ops;
            limits.max_frequencies = ops;
        }
        limits
    }
}
