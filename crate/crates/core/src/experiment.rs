//! Seeded Monte Carlo drivers.
//!
//! Trial `i` always uses the graph `sample_gnp(n, derive_seed(master, i))`,
//! trials run on the current rayon pool, and rows are emitted in trial order,
//! so output depends on the configuration only and never on the worker
//! count. Wall-clock time is deliberately kept out of the records.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::char_sums::{
    decay_profile, prob_symmetric, ratio_to_f64, sum_mod_error_bound, sum_mod_max_error, DecayMode, Method,
    GRAPH_ENUM_CAP,
};
use crate::combinat::binomial;
use crate::error::{capacity, domain, Error, Result};
use crate::graph::{sample_gnp, Graph, ModParams, ResidueVector};
use crate::partition::{exact_min_parts, search_partition, PartitionSearchParams, MIN_PARTS_CAP};
use crate::rng::derive_seed;
use crate::subgraph::{count_good, count_good_alpha, exact_f, EXACT_CAP};
use crate::thresholds::{threshold_k, DistributionSpec};

/// Largest `n` accepted by the threshold scan.
pub const SCAN_CAP: usize = 24;

#[derive(Debug, Clone, Default)]
pub struct ExperimentConfig {
    pub n: usize,
    pub q: u32,
    pub r: u32,
    pub alpha: Option<DistributionSpec>,
    pub k: Option<usize>,
    pub t: Option<usize>,
    pub cap: Option<usize>,
    pub trials: u64,
    pub seed: u64,
    /// Step budget per restart for heuristic searches.
    pub budget: Option<u64>,
    /// Use this graph in every trial instead of sampling.
    pub graph: Option<Graph>,
}

impl ExperimentConfig {
    fn validate(&self) -> Result<ModParams> {
        if self.trials == 0 {
            return domain("trials must be at least 1");
        }
        if let Some(g) = &self.graph {
            if g.n() != self.n {
                return domain(format!("graph has {} vertices but n = {}", g.n(), self.n));
            }
        }
        ModParams::new(self.r, self.q)
    }

    fn graph_for(&self, trial: u64) -> (u64, Graph) {
        let seed = derive_seed(self.seed, trial);
        match &self.graph {
            Some(g) => (seed, g.clone()),
            None => (seed, sample_gnp(self.n, seed)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RowType {
    Trial,
    Summary,
}

/// One output row. Trial rows carry the per-trial statistic in `value`;
/// the summary row carries statistics over the trial values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub experiment: String,
    pub row_type: RowType,
    pub trial: Option<u64>,
    pub seed: Option<u64>,
    pub n: usize,
    pub q: u32,
    pub r: u32,
    pub k: Option<usize>,
    pub t: Option<usize>,
    pub value: Option<f64>,
    pub success: Option<bool>,
    pub verified: Option<bool>,
    pub reference: Option<f64>,
    pub offset: Option<i64>,
    pub trials: Option<u64>,
    pub mean: Option<f64>,
    pub sd: Option<f64>,
    pub se: Option<f64>,
    pub leading_term: Option<f64>,
    pub detail: Option<String>,
}

impl ExperimentRecord {
    fn base(experiment: &str, row_type: RowType, cfg: &ExperimentConfig) -> Self {
        Self {
            experiment: experiment.to_string(),
            row_type,
            trial: None,
            seed: None,
            n: cfg.n,
            q: cfg.q,
            r: cfg.r,
            k: cfg.k,
            t: cfg.t,
            value: None,
            success: None,
            verified: None,
            reference: None,
            offset: None,
            trials: None,
            mean: None,
            sd: None,
            se: None,
            leading_term: None,
            detail: None,
        }
    }

    fn trial(experiment: &str, cfg: &ExperimentConfig, trial: u64, seed: u64) -> Self {
        Self {
            trial: Some(trial),
            seed: Some(seed),
            ..Self::base(experiment, RowType::Trial, cfg)
        }
    }
}

/// Mean, sample standard deviation and standard error, summed in input order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub count: u64,
    pub mean: f64,
    pub sd: f64,
    pub se: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let count = values.len() as u64;
        let nf = values.len() as f64;
        let mean = values.iter().sum::<f64>() / nf;
        let sd = if values.len() > 1 {
            (values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (nf - 1.0)).sqrt()
        } else {
            0.0
        };
        Some(Self {
            count,
            mean,
            sd,
            se: sd / nf.sqrt(),
        })
    }
}

fn summary_row(experiment: &str, cfg: &ExperimentConfig, rows: &[ExperimentRecord]) -> ExperimentRecord {
    let values: Vec<f64> = rows.iter().filter_map(|r| r.value).collect();
    let s = Summary::of(&values);
    ExperimentRecord {
        trials: Some(rows.len() as u64),
        mean: s.map(|s| s.mean),
        sd: s.map(|s| s.sd),
        se: s.map(|s| s.se),
        ..ExperimentRecord::base(experiment, RowType::Summary, cfg)
    }
}

fn run_trials<F>(cfg: &ExperimentConfig, f: F) -> Result<Vec<ExperimentRecord>>
where
    F: Fn(u64, u64, &Graph) -> Result<ExperimentRecord> + Sync,
{
    (0..cfg.trials)
        .into_par_iter()
        .map(|i| {
            let (seed, g) = cfg.graph_for(i);
            f(i, seed, &g)
        })
        .collect()
}

/// `C(n,k)·P[degree vector of G(k,1/2) ≡ r·1_k]`, exactly when enumeration
/// is in range and from the character sum otherwise.
pub fn expectation_reference(n: usize, k: usize, mp: ModParams) -> Result<f64> {
    let v = ResidueVector::constant(mp.q(), mp.r(), k)?;
    let method = if k * k.saturating_sub(1) / 2 <= GRAPH_ENUM_CAP {
        Method::Enumeration
    } else {
        Method::Fourier
    };
    let p = prob_symmetric(&v, method)?;
    let c = BigInt::from(binomial(n as u64, k as u64));
    Ok(match p.exact {
        Some(exact) => ratio_to_f64(&(exact * BigRational::from_integer(c))),
        None => p.approx * ratio_to_f64(&BigRational::from_integer(c)),
    })
}

/// `C(n,k)` times the leading term `1/q^k`, doubled for even `q` when the
/// handshake parity allows `r·1_k` and zero when it does not.
pub fn expectation_leading_term(n: usize, k: usize, mp: ModParams) -> f64 {
    let q = mp.q() as f64;
    let c = ratio_to_f64(&BigRational::from_integer(BigInt::from(binomial(n as u64, k as u64))));
    let lead = if mp.q() % 2 == 1 {
        1.0
    } else if (mp.r() as u64 * k as u64).is_multiple_of(2) {
        2.0
    } else {
        0.0
    };
    c * lead * q.powi(-(k as i32))
}

/// Exact `X_k` per sampled graph against the exact expectation.
pub fn expectation_experiment(cfg: &ExperimentConfig) -> Result<Vec<ExperimentRecord>> {
    const NAME: &str = "expectation";
    let mp = cfg.validate()?;
    if cfg.n > EXACT_CAP {
        return capacity(format!("expectation experiment needs n <= {EXACT_CAP}"));
    }
    let k = cfg.k.ok_or_else(|| Error::InputDomain("expectation experiment needs k".into()))?;
    if k == 0 || k > cfg.n {
        return domain(format!("need 1 <= k <= n, got k = {k}, n = {}", cfg.n));
    }
    let mut rows = run_trials(cfg, |i, seed, g| {
        let x = match &cfg.alpha {
            Some(a) => count_good_alpha(g, k, cfg.q, a)?,
            None => count_good(g, k, mp)?,
        };
        Ok(ExperimentRecord {
            value: Some(x as f64),
            ..ExperimentRecord::trial(NAME, cfg, i, seed)
        })
    })?;
    let mut summary = summary_row(NAME, cfg, &rows);
    if cfg.alpha.is_none() {
        summary.reference = Some(expectation_reference(cfg.n, k, mp)?);
        summary.leading_term = Some(expectation_leading_term(cfg.n, k, mp));
    } else {
        summary.detail = Some("alpha histogram predicate; no exact reference".into());
    }
    rows.push(summary);
    Ok(rows)
}

/// `f(G, r, q)` per sampled graph against the threshold `k(n, q)`.
pub fn threshold_scan(cfg: &ExperimentConfig) -> Result<Vec<ExperimentRecord>> {
    const NAME: &str = "scan";
    let mp = cfg.validate()?;
    if cfg.n > SCAN_CAP {
        return capacity(format!("threshold scan needs n <= {SCAN_CAP}, got {}", cfg.n));
    }
    let k_ref = threshold_k(cfg.n as u64, cfg.q)?.k;
    let mut rows = run_trials(cfg, |i, seed, g| {
        let res = exact_f(g, mp)?;
        Ok(ExperimentRecord {
            value: Some(res.best_size as f64),
            reference: Some(k_ref as f64),
            offset: Some(res.best_size as i64 - k_ref as i64),
            detail: res.witness.map(|w| join(&w.to_vec())),
            ..ExperimentRecord::trial(NAME, cfg, i, seed)
        })
    })?;
    let mut hist: BTreeMap<i64, u64> = BTreeMap::new();
    for r in &rows {
        *hist.entry(r.offset.expect("trial rows carry an offset")).or_default() += 1;
    }
    let mut summary = summary_row(NAME, cfg, &rows);
    summary.reference = Some(k_ref as f64);
    summary.detail = Some(
        hist.iter()
            .map(|(o, c)| format!("{o}:{c}"))
            .collect::<Vec<_>>()
            .join(" "),
    );
    rows.push(summary);
    Ok(rows)
}

fn join(v: &[usize]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PartitionMode {
    /// `p(G, r, q)` by exhaustive search, capped.
    Exact,
    /// Balanced search into `t` parts.
    Heuristic,
}

/// Exact minimum part counts or heuristic balanced partitions per graph.
/// Exact trial values are `p(G)` (absent when above the cap); heuristic
/// trial values are 1 for a verified success and 0 otherwise, so the summary
/// mean is the success rate.
pub fn partition_experiment(cfg: &ExperimentConfig, mode: PartitionMode) -> Result<Vec<ExperimentRecord>> {
    const NAME: &str = "partition";
    let mp = cfg.validate()?;
    let mut rows = match mode {
        PartitionMode::Exact => {
            if cfg.n > MIN_PARTS_CAP {
                return capacity(format!("exact partition mode needs n <= {MIN_PARTS_CAP}, got {}", cfg.n));
            }
            let cap = cfg.cap.unwrap_or((cfg.q as usize + 1).min(cfg.n));
            run_trials(cfg, |i, seed, g| {
                let p = exact_min_parts(g, mp, cap)?;
                Ok(ExperimentRecord {
                    value: p.map(|p| p as f64),
                    success: Some(p.is_some()),
                    reference: Some(cap as f64),
                    ..ExperimentRecord::trial(NAME, cfg, i, seed)
                })
            })?
        }
        PartitionMode::Heuristic => {
            let t = cfg.t.unwrap_or(cfg.q as usize + 1);
            let mut params = PartitionSearchParams::default();
            if let Some(b) = cfg.budget {
                params.max_steps = b;
            }
            run_trials(cfg, |i, seed, g| {
                let params = PartitionSearchParams {
                    seed,
                    ..params.clone()
                };
                let out = search_partition(g, mp, t, &params)?;
                let verified = match &out.partition {
                    Some(p) => p.verify_balanced(g, mp)? && p.t() == t,
                    None => false,
                };
                Ok(ExperimentRecord {
                    t: Some(t),
                    value: Some(if verified { 1.0 } else { 0.0 }),
                    success: Some(out.success()),
                    verified: Some(verified),
                    offset: Some(out.best_objective as i64),
                    detail: Some(format!("steps={} restarts={}", out.steps, out.restarts_used)),
                    ..ExperimentRecord::trial(NAME, cfg, i, seed)
                })
            })?
        }
    };
    let mut summary = summary_row(NAME, cfg, &rows);
    let successes = rows.iter().filter(|r| r.success == Some(true)).count();
    summary.detail = Some(format!("successes={successes}"));
    if mode == PartitionMode::Heuristic {
        summary.t = Some(cfg.t.unwrap_or(cfg.q as usize + 1));
    }
    rows.push(summary);
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DecayKind {
    /// `max_a |P[Σξ ≡ a] − 1/q|` against its proven bound.
    Sum,
    Symmetric,
    Asym,
}

impl fmt::Display for DecayKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DecayKind::Sum => "sum",
            DecayKind::Symmetric => "symmetric",
            DecayKind::Asym => "asym",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayRecord {
    pub m: usize,
    pub q: u32,
    pub mode: DecayKind,
    pub normalized_error: f64,
    pub max_abs_error: Option<f64>,
    pub analytic_bound: Option<f64>,
    pub within_bound: Option<bool>,
}

/// Per-`m` error of the leading-term approximation. The sum mode also
/// reports the proven bound `((q−1)/q)·e^{−2m/q²}` and whether it holds.
pub fn decay_experiment(q: u32, m_min: usize, m_max: usize, kind: DecayKind) -> Result<Vec<DecayRecord>> {
    match kind {
        DecayKind::Sum => {
            if q < 2 || m_min == 0 || m_min > m_max {
                return domain(format!("need q >= 2 and 1 <= m_min <= m_max, got q={q}, {m_min}..{m_max}"));
            }
            (m_min..=m_max)
                .map(|m| {
                    let err = ratio_to_f64(&sum_mod_max_error(m as u64, q)?);
                    let bound = sum_mod_error_bound(m as u64, q);
                    Ok(DecayRecord {
                        m,
                        q,
                        mode: kind,
                        normalized_error: err * q as f64,
                        max_abs_error: Some(err),
                        analytic_bound: Some(bound),
                        within_bound: Some(err <= bound + 1e-12),
                    })
                })
                .collect()
        }
        DecayKind::Symmetric | DecayKind::Asym => {
            let mode = if kind == DecayKind::Symmetric {
                DecayMode::Symmetric
            } else {
                DecayMode::Asym
            };
            Ok(decay_profile(q, m_min, m_max, mode)?
                .rows
                .into_iter()
                .map(|r| DecayRecord {
                    m: r.m,
                    q: r.q,
                    mode: kind,
                    normalized_error: r.normalized_error,
                    max_abs_error: None,
                    analytic_bound: None,
                    within_bound: None,
                })
                .collect())
        }
    }
}

/// Serializes rows as CSV with a header line.
pub fn to_csv<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row).map_err(|e| Error::Internal(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Internal(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Internal(e.to_string()))
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::Internal(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

/// Runs `f` on a dedicated pool of `workers` threads (the global pool when
/// `None`).
pub fn with_workers<R: Send>(workers: Option<usize>, f: impl FnOnce() -> R + Send) -> Result<R> {
    match workers {
        None => Ok(f()),
        Some(0) => domain("workers must be at least 1"),
        Some(w) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(w)
                .build()
                .map_err(|e| Error::Internal(e.to_string()))?;
            Ok(pool.install(f))
        }
    }
}
