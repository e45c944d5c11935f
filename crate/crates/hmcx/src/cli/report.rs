//! The one output shape every command emits: a versioned envelope holding
//! the echoed inputs, the effective tolerances, and the kind-specific
//! result fields. Field order is fixed by the struct, absent sections are
//! omitted entirely, and the only run-dependent field (the timestamp) can
//! be suppressed, so identical runs emit identical bytes.

use serde::Serialize;
use serde_json::Value;

use crate::convexity::{Verdict, ViolationCertificate};
use crate::inequalities::{MinBranch, Overall, PairVerdict, Term};
use crate::reductions::{ChainSummary, PairCheck};

pub(crate) const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Serialize)]
pub(crate) struct Envelope {
    pub schema_version: &'static str,
    pub kind: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub job_id: Option<String>,
    /// Unix seconds; omitted under `--deterministic` and for suite jobs.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<u64>,
    pub inputs: Value,
    pub tolerances: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,

    // Membership search results.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdict: Option<Verdict>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<ViolationCertificate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_defect_seen: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples_used: Option<u64>,

    // Inequality audit results.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub terms: Option<Vec<Term>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pair_verdicts: Option<Vec<PairVerdict>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_branch: Option<MinBranch>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub overall: Option<Overall>,

    // Reduction results.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub source: Option<ChainSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target: Option<ChainSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pairs: Option<Vec<PairCheck>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub matches: Option<bool>,

    /// Per-term propagated quadrature error, in term order (for reductions:
    /// source terms, then target terms).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quadrature_errors: Option<Vec<f64>>,

    // Suite results.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub jobs: Option<Vec<JobEntry>>,
}

impl Envelope {
    pub(crate) fn new(kind: &'static str, inputs: Value, tolerances: Value) -> Envelope {
        Envelope {
            schema_version: SCHEMA_VERSION,
            kind,
            job_id: None,
            timestamp: None,
            inputs,
            tolerances,
            seed: None,
            verdict: None,
            certificate: None,
            max_defect_seen: None,
            samples_used: None,
            terms: None,
            pair_verdicts: None,
            min_branch: None,
            overall: None,
            source: None,
            target: None,
            pairs: None,
            matches: None,
            quadrature_errors: None,
            jobs: None,
        }
    }

    pub(crate) fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self)
            .expect("envelope serialization cannot fail");
        out.push('\n');
        out
    }
}

/// One entry in a suite's `jobs` array: either a full result envelope or a
/// terse error record (recognizable by its `error` key).
#[derive(Debug, Serialize)]
#[serde(untagged)]
pub(crate) enum JobEntry {
    Ok(Box<Envelope>),
    Err {
        job_id: String,
        kind: &'static str,
        error: String,
    },
}

pub(crate) fn now_unix() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

/// One summary row per job. `worst_slack` is the job's headline number:
/// the largest defect seen for membership checks, the smallest pair slack
/// for audits, the largest absolute pair discrepancy for reductions.
pub(crate) struct CsvRow {
    pub job_id: String,
    pub kind: &'static str,
    pub inequality_id: String,
    pub overall: String,
    pub worst_slack: Option<f64>,
    pub seed: Option<u64>,
}

pub(crate) fn render_csv(rows: &[CsvRow]) -> String {
    let mut out = String::from("job_id,kind,inequality_id,overall,worst_slack,seed\n");
    for row in rows {
        let slack = row.worst_slack.map(|v| format!("{v:?}")).unwrap_or_default();
        let seed = row.seed.map(|s| s.to_string()).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            csv_field(&row.job_id),
            row.kind,
            csv_field(&row.inequality_id),
            row.overall,
            slack,
            seed
        ));
    }
    out
}

/// Quote a field only when it needs it.
fn csv_field(value: &str) -> String {
    if value.contains([',', '"', '\n']) {
        format!("\"{}\"", value.replace('"', "\"\""))
    } else {
        value.to_string()
    }
}
