//! Analysis report assembly: battery results, per-test verdicts, and the
//! configuration echo that makes a run reproducible.

use burstlab_core::burstiness::BurstinessMemory;
use burstlab_core::ripley::RipleyProfile;
use burstlab_core::stat_tests::KolmogorovResult;
use serde::Serialize;

pub const ANALYSIS_SCHEMA: &str = "burstlab.analysis_report.v1";

/// A battery entry that either produced a result or explains why not.
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Entry<T: Serialize> {
    Available {
        #[serde(flatten)]
        value: T,
    },
    Unavailable { reason: String },
}

impl<T: Serialize> Entry<T> {
    pub fn from_result<E: std::fmt::Display>(result: Result<T, E>) -> Self {
        match result {
            Ok(value) => Entry::Available { value },
            Err(e) => Entry::Unavailable {
                reason: e.to_string(),
            },
        }
    }

    pub fn value(&self) -> Option<&T> {
        match self {
            Entry::Available { value } => Some(value),
            Entry::Unavailable { .. } => None,
        }
    }
}

/// Table-style verdict symbol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "marginal+")]
    MarginalPlus,
    #[serde(rename = "-")]
    Minus,
    #[serde(rename = "unavailable")]
    Unavailable,
}

impl Verdict {
    /// Threshold rule shared by the Kolmogorov and K-profile columns.
    pub fn from_p_value(p: f64) -> Self {
        if p <= 0.001 {
            Verdict::Plus
        } else if p <= 0.05 {
            Verdict::MarginalPlus
        } else {
            Verdict::Minus
        }
    }

    fn from_flag(flag: bool) -> Self {
        if flag {
            Verdict::Plus
        } else {
            Verdict::Minus
        }
    }
}

/// Per-test +/- summary row.
#[derive(Debug, Clone, Serialize)]
pub struct VerdictRow {
    pub kolmogorov_arrival: Verdict,
    pub kolmogorov_interevent: Verdict,
    pub k_statistic: Verdict,
    pub burstiness: Verdict,
    pub memory: Verdict,
}

/// Effective configuration of an analyze run; rerunning with exactly these
/// settings reproduces the report byte for byte.
#[derive(Debug, Clone, Serialize)]
pub struct AnalyzeConfigEcho {
    pub input: String,
    pub network: String,
    pub seed: u64,
    pub mc_trials: usize,
    pub coverage: f64,
    pub grid: Vec<f64>,
    pub tie_policy: String,
    pub edge_policy: String,
    pub delimiter: char,
    pub time_format: String,
    pub has_header: bool,
    pub window: (f64, f64),
}

#[derive(Debug, Clone, Serialize)]
pub struct KolmogorovPair {
    pub arrival: Entry<KolmogorovResult>,
    pub interevent: Entry<KolmogorovResult>,
}

/// The full analyze output.
#[derive(Debug, Clone, Serialize)]
pub struct AnalysisReport {
    pub schema_version: String,
    pub network_id: String,
    pub event_count: usize,
    pub config: AnalyzeConfigEcho,
    pub kolmogorov: KolmogorovPair,
    pub ripley: Entry<RipleyProfile>,
    pub burstiness: Entry<BurstinessMemory>,
    pub verdict_row: VerdictRow,
}

impl AnalysisReport {
    pub fn build(
        network_id: String,
        event_count: usize,
        config: AnalyzeConfigEcho,
        arrival: Entry<KolmogorovResult>,
        interevent: Entry<KolmogorovResult>,
        ripley: Entry<RipleyProfile>,
        burstiness: Entry<BurstinessMemory>,
    ) -> Self {
        let verdict_row = VerdictRow {
            kolmogorov_arrival: arrival
                .value()
                .map_or(Verdict::Unavailable, |r| Verdict::from_p_value(r.p_value)),
            kolmogorov_interevent: interevent
                .value()
                .map_or(Verdict::Unavailable, |r| Verdict::from_p_value(r.p_value)),
            k_statistic: ripley
                .value()
                .map_or(Verdict::Unavailable, profile_verdict),
            burstiness: burstiness
                .value()
                .map_or(Verdict::Unavailable, |b| Verdict::from_flag(b.significant_delta)),
            memory: burstiness
                .value()
                .map_or(Verdict::Unavailable, |b| Verdict::from_flag(b.significant_mu)),
        };
        Self {
            schema_version: ANALYSIS_SCHEMA.to_string(),
            network_id,
            event_count,
            config,
            kolmogorov: KolmogorovPair {
                arrival,
                interevent,
            },
            ripley,
            burstiness,
            verdict_row,
        }
    }

    /// Single-row CSV rendering of the headline numbers and verdicts.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(
            w,
            "network_id,event_count,ks_arrival_d,ks_arrival_p,ks_interevent_d,ks_interevent_p,\
             k_min_p,delta,mu,significant_delta,significant_mu,\
             verdict_ks_arrival,verdict_ks_interevent,verdict_k,verdict_burstiness,verdict_memory"
        )?;
        let opt = |v: Option<String>| v.unwrap_or_default();
        let arrival = self.kolmogorov.arrival.value();
        let interevent = self.kolmogorov.interevent.value();
        let b = self.burstiness.value();
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.network_id,
            self.event_count,
            opt(arrival.map(|r| r.statistic.to_string())),
            opt(arrival.map(|r| r.p_value.to_string())),
            opt(interevent.map(|r| r.statistic.to_string())),
            opt(interevent.map(|r| r.p_value.to_string())),
            opt(self
                .ripley
                .value()
                .and_then(|p| p.min_p_value())
                .map(|p| p.to_string())),
            opt(b.map(|b| b.delta.to_string())),
            opt(b.map(|b| b.mu.to_string())),
            opt(b.map(|b| b.significant_delta.to_string())),
            opt(b.map(|b| b.significant_mu.to_string())),
            verdict_str(self.verdict_row.kolmogorov_arrival),
            verdict_str(self.verdict_row.kolmogorov_interevent),
            verdict_str(self.verdict_row.k_statistic),
            verdict_str(self.verdict_row.burstiness),
            verdict_str(self.verdict_row.memory),
        )
    }
}

fn verdict_str(v: Verdict) -> &'static str {
    match v {
        Verdict::Plus => "+",
        Verdict::MarginalPlus => "marginal+",
        Verdict::Minus => "-",
        Verdict::Unavailable => "unavailable",
    }
}

/// Verdict for the K-profile column: the smallest available entry p-value,
/// Bonferroni-adjusted for the number of grid points tested, against the
/// shared thresholds. The adjustment keeps a quiet Poisson series from
/// tripping the 20-point family by chance.
fn profile_verdict(profile: &RipleyProfile) -> Verdict {
    let available = profile
        .entries
        .iter()
        .filter(|e| e.stat.is_some())
        .count();
    match profile.min_p_value() {
        None => Verdict::Unavailable,
        Some(p) => Verdict::from_p_value((p * available as f64).min(1.0)),
    }
}
