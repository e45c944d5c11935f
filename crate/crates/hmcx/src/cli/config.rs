//! Suite configuration: a JSON document describing a batch of jobs to run,
//! with per-suite defaults for seeding and output shape.

use serde::Deserialize;

use crate::convexity::Direction;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
pub(crate) enum OutputFormat {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct SuiteConfig {
    /// Base seed; jobs without an explicit seed derive theirs from this
    /// and their position.
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub format: OutputFormat,
    /// Write results here instead of stdout.
    #[serde(default)]
    pub output: Option<String>,
    pub jobs: Vec<JobConfig>,
}

fn default_kernel() -> String {
    "identity".to_string()
}

fn default_m() -> f64 {
    1.0
}

fn default_budget() -> u64 {
    100_000
}

fn default_tol() -> f64 {
    1e-9
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub(crate) enum JobConfig {
    Check {
        #[serde(default)]
        id: Option<String>,
        f: String,
        #[serde(default = "default_kernel")]
        h: String,
        #[serde(default = "default_m")]
        m: f64,
        /// `[0, b]` — the left endpoint must be 0.
        domain: [f64; 2],
        #[serde(default = "default_budget")]
        budget: u64,
        #[serde(default)]
        seed: Option<u64>,
        #[serde(default)]
        direction: Direction,
    },
    Audit {
        #[serde(default)]
        id: Option<String>,
        ineq: String,
        f: String,
        #[serde(default = "default_kernel")]
        h: String,
        #[serde(default = "default_m")]
        m: f64,
        a: f64,
        b: f64,
        #[serde(default)]
        s: Option<f64>,
        #[serde(default = "default_tol")]
        tol_abs: f64,
        #[serde(default = "default_tol")]
        tol_rel: f64,
    },
    Reduce {
        #[serde(default)]
        id: Option<String>,
        case: String,
        f: String,
        #[serde(default = "default_m")]
        m: f64,
        a: f64,
        b: f64,
        #[serde(default)]
        s: Option<f64>,
        #[serde(default)]
        h: Option<String>,
    },
}

impl JobConfig {
    /// Explicit id, or a stable position-derived one.
    pub(crate) fn job_id(&self, index: usize) -> String {
        let explicit = match self {
            JobConfig::Check { id, .. }
            | JobConfig::Audit { id, .. }
            | JobConfig::Reduce { id, .. } => id.clone(),
        };
        explicit.unwrap_or_else(|| format!("job-{index}"))
    }
}
