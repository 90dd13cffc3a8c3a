//! Monte Carlo scaling series and the statistics built on them.
//!
//! A [`ScalingSeries`] records, for each scale `M` of a grid, the constrained
//! distance `d_(1,M)(0, M)` over independent replicas. Per-replica values are
//! kept (indexed by replica) so that bootstrap uncertainties can be computed
//! and so that merging batches of replicas is independent of arrival order.

use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, LrpError, Result};
use crate::metric::{distance_continuous, distance_discrete, MetricMode};
use crate::model::{sample_continuous, sample_discrete, ContinuousParams, DiscreteParams};
use crate::rng::{self, tag};
use crate::stats::{percentile_interval, std_dev};

/// Number of bootstrap resamples used throughout.
pub const BOOTSTRAP_RESAMPLES: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Discrete,
    Continuous,
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ModelKind::Discrete => "discrete",
            ModelKind::Continuous => "continuous",
        })
    }
}

impl std::str::FromStr for ModelKind {
    type Err = LrpError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "discrete" => Ok(ModelKind::Discrete),
            "continuous" => Ok(ModelKind::Continuous),
            other => Err(invalid("model", format!("unknown model `{other}`"))),
        }
    }
}

/// Statistics of one scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalePoint {
    pub scale: u64,
    pub replicas: usize,
    pub mean: f64,
    /// Standard error of the mean.
    pub se: f64,
    /// Raw moments `E[d^k]`, k = 2, 3, 4.
    pub m2: f64,
    pub m3: f64,
    pub m4: f64,
    /// Per-replica values in replica order; empty when only moments are known.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub samples: Vec<f64>,
}

impl ScalePoint {
    pub fn from_samples(scale: u64, samples: Vec<f64>) -> Result<Self> {
        if samples.is_empty() {
            return Err(LrpError::InsufficientData(format!("no replicas at scale {scale}")));
        }
        if samples.iter().any(|&d| !(d >= 0.0) || !d.is_finite()) {
            return Err(invalid("samples", "distances must be finite and non-negative"));
        }
        let r = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / r;
        let var_pop = samples.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / r;
        let se = if samples.len() > 1 {
            (var_pop * r / (r - 1.0) / r).sqrt()
        } else {
            0.0
        };
        Ok(Self {
            scale,
            replicas: samples.len(),
            mean,
            se,
            // written as mean^2 + variance so that m2 >= mean^2 holds exactly
            m2: mean * mean + var_pop,
            m3: samples.iter().map(|d| d.powi(3)).sum::<f64>() / r,
            m4: samples.iter().map(|d| d.powi(4)).sum::<f64>() / r,
            samples,
        })
    }

    /// Raw moment `E[d^k]` for `k` in `1..=4`.
    pub fn moment(&self, k: u32) -> Option<f64> {
        match k {
            1 => Some(self.mean),
            2 => Some(self.m2),
            3 => Some(self.m3),
            4 => Some(self.m4),
            _ => None,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.replicas == 0 {
            return Err(LrpError::InsufficientData(format!("no replicas at scale {}", self.scale)));
        }
        if !(self.mean >= 0.0) || !(self.se >= 0.0) {
            return Err(invalid("mean", format!("negative statistics at scale {}", self.scale)));
        }
        if self.m2 < self.mean * self.mean {
            return Err(invalid("m2", format!("E d^2 < (E d)^2 at scale {}", self.scale)));
        }
        Ok(())
    }

    /// Bootstrap mean: resample replicas, or perturb by the standard error
    /// when no samples are stored.
    fn resampled_mean<R: Rng>(&self, rng: &mut R) -> f64 {
        self.resampled_moment(rng, 1)
    }

    fn resampled_moment<R: Rng>(&self, rng: &mut R, k: i32) -> f64 {
        if self.samples.is_empty() {
            let z: f64 = rng.sample(StandardNormal);
            return if k == 1 { self.mean + self.se * z } else { f64::NAN };
        }
        let n = self.samples.len();
        (0..n)
            .map(|_| self.samples[rng.random_range(0..n)].powi(k))
            .sum::<f64>()
            / n as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingSeries {
    pub beta: f64,
    pub model: ModelKind,
    pub seed: u64,
    pub points: Vec<ScalePoint>,
    /// Set when a resource cap stopped the experiment before the full grid.
    #[serde(default)]
    pub truncated: bool,
}

impl ScalingSeries {
    pub fn new(beta: f64, model: ModelKind, seed: u64, points: Vec<ScalePoint>) -> Result<Self> {
        for w in points.windows(2) {
            if w[1].scale <= w[0].scale {
                return Err(invalid("grid", "scales must be strictly increasing"));
            }
        }
        for p in &points {
            p.validate()?;
        }
        Ok(Self {
            beta,
            model,
            seed,
            points,
            truncated: false,
        })
    }

    /// Aggregates replica batches; any batch order yields the same series.
    pub fn from_batches(
        beta: f64,
        model: ModelKind,
        seed: u64,
        batches: impl IntoIterator<Item = ReplicaBatch>,
    ) -> Result<Self> {
        let mut merged: BTreeMap<u64, ReplicaBatch> = BTreeMap::new();
        for b in batches {
            match merged.get_mut(&b.scale) {
                Some(acc) => acc.merge(b)?,
                None => {
                    merged.insert(b.scale, b);
                }
            }
        }
        let points = merged
            .into_values()
            .map(|b| ScalePoint::from_samples(b.scale, b.values.into_values().collect()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(beta, model, seed, points)
    }

    pub fn scales(&self) -> Vec<u64> {
        self.points.iter().map(|p| p.scale).collect()
    }

    pub fn point(&self, scale: u64) -> Option<&ScalePoint> {
        self.points
            .binary_search_by_key(&scale, |p| p.scale)
            .ok()
            .map(|i| &self.points[i])
    }

    fn bootstrap_rng(&self, purpose: u64) -> rand_chacha::ChaCha8Rng {
        rng::stream(self.seed, &[tag::BOOTSTRAP, purpose])
    }
}

/// Replica results for one scale, keyed by replica index.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ReplicaBatch {
    pub scale: u64,
    pub values: BTreeMap<u32, f64>,
}

impl ReplicaBatch {
    pub fn new(scale: u64) -> Self {
        Self {
            scale,
            values: BTreeMap::new(),
        }
    }

    pub fn insert(&mut self, replica: u32, value: f64) {
        self.values.insert(replica, value);
    }

    /// Union of two batches of the same scale. The same replica index may
    /// appear in both only with the same value.
    pub fn merge(&mut self, other: ReplicaBatch) -> Result<()> {
        if other.scale != self.scale {
            return Err(invalid("scale", "cannot merge batches of different scales"));
        }
        for (k, v) in other.values {
            match self.values.insert(k, v) {
                Some(old) if old.to_bits() != v.to_bits() => {
                    return Err(invalid("replica", format!("conflicting values for replica {k}")));
                }
                _ => {}
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingConfig {
    pub beta: f64,
    pub model: ModelKind,
    pub grid: Vec<u64>,
    pub replicas: usize,
    pub seed: u64,
    /// Connection exponent of the discrete model.
    #[serde(default = "two")]
    pub exponent: f64,
    /// Cap on `sum(scale * replicas)` over the grid; scales beyond it are dropped.
    #[serde(default)]
    pub max_work: Option<u64>,
}

fn two() -> f64 {
    2.0
}

impl ScalingConfig {
    pub fn new(beta: f64, model: ModelKind, grid: Vec<u64>, replicas: usize, seed: u64) -> Self {
        Self {
            beta,
            model,
            grid,
            replicas,
            seed,
            exponent: 2.0,
            max_work: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid.is_empty() {
            return Err(invalid("grid", "empty grid"));
        }
        if self.grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("grid", "scales must be strictly increasing"));
        }
        if self.grid[0] < 1 {
            return Err(invalid("grid", "scales must be at least 1"));
        }
        if self.replicas < 1 {
            return Err(invalid("replicas", "need at least one replica"));
        }
        if !(self.beta > 0.0) || !self.beta.is_finite() {
            return Err(invalid("beta", "must be positive"));
        }
        if self.model == ModelKind::Continuous && self.grid[0] < 2 {
            return Err(invalid("grid", "continuous scales need M > 1 for the window (1, M)"));
        }
        Ok(())
    }
}

/// Seed of replica `replica` at scale `scale`.
pub fn replica_seed(seed: u64, scale: u64, replica: u32) -> u64 {
    rng::derive_seed(seed, &[tag::REPLICA, scale, replica as u64])
}

/// Constrained distance `d(0, M)` for one replica of the configured model.
pub fn measure_replica(cfg: &ScalingConfig, scale: u64, replica: u32) -> Result<f64> {
    let seed = replica_seed(cfg.seed, scale, replica);
    match cfg.model {
        ModelKind::Discrete => {
            let params = DiscreteParams::new(scale as usize, cfg.beta, seed).with_exponent(cfg.exponent);
            let g = sample_discrete(&params)?;
            Ok(distance_discrete(&g, 0, g.n(), MetricMode::ConstrainedInterval)?.distance as f64)
        }
        ModelKind::Continuous => {
            let params = ContinuousParams {
                length: scale as f64,
                delta: 1.0,
                delta_prime: scale as f64,
                beta: cfg.beta,
                seed,
            };
            let es = sample_continuous(&params)?;
            Ok(distance_continuous(&es, 0.0, params.length, MetricMode::ConstrainedInterval)?.distance)
        }
    }
}

/// Runs every replica of every scale (in parallel) and aggregates.
pub fn run_scaling_experiment(cfg: &ScalingConfig) -> Result<ScalingSeries> {
    run_with(cfg, |scale, replica| measure_replica(cfg, scale, replica))
}

/// As [`run_scaling_experiment`] with a caller-supplied measurement.
pub fn run_with<F>(cfg: &ScalingConfig, measure: F) -> Result<ScalingSeries>
where
    F: Fn(u64, u32) -> Result<f64> + Sync,
{
    cfg.validate()?;
    let mut batches = Vec::new();
    let mut work = 0u64;
    let mut truncated = false;
    for &scale in &cfg.grid {
        let cost = scale.saturating_mul(cfg.replicas as u64);
        if cfg.max_work.is_some_and(|cap| work.saturating_add(cost) > cap) {
            truncated = true;
            break;
        }
        work += cost;
        let values = (0..cfg.replicas as u32)
            .into_par_iter()
            .map(|r| measure(scale, r).map(|d| (r, d)))
            .collect::<Result<BTreeMap<u32, f64>>>()?;
        batches.push(ReplicaBatch { scale, values });
    }
    if batches.is_empty() {
        return Err(LrpError::BudgetExceeded {
            budget: cfg.max_work.unwrap_or(0) as usize,
        });
    }
    let mut series = ScalingSeries::from_batches(cfg.beta, cfg.model, cfg.seed, batches)?;
    series.truncated = truncated;
    Ok(series)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub theta_hat: f64,
    pub std_error: f64,
    pub intercept: f64,
    pub scales: Vec<u64>,
    /// `ln(mean) - fitted` per scale.
    pub residuals: Vec<f64>,
}

/// Ordinary least squares slope and intercept of `y` on `x`.
fn ols(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Fits `ln E d = intercept + theta ln M` over the series.
pub fn fit_exponent(series: &ScalingSeries) -> Result<ExponentFit> {
    if series.points.len() < 3 {
        return Err(LrpError::InsufficientData("exponent fit needs at least 3 scales".into()));
    }
    for p in &series.points {
        if !(p.mean > 0.0) {
            return Err(LrpError::NonPositive {
                scale: p.scale,
                value: p.mean,
            });
        }
    }
    let x: Vec<f64> = series.points.iter().map(|p| (p.scale as f64).ln()).collect();
    let y: Vec<f64> = series.points.iter().map(|p| p.mean.ln()).collect();
    let (theta_hat, intercept) = ols(&x, &y);
    let residuals = x
        .iter()
        .zip(&y)
        .map(|(xi, yi)| yi - (intercept + theta_hat * xi))
        .collect();

    let mut rng = series.bootstrap_rng(1);
    let mut slopes = Vec::with_capacity(BOOTSTRAP_RESAMPLES);
    let mut yb = vec![0.0; y.len()];
    for _ in 0..BOOTSTRAP_RESAMPLES {
        let mut ok = true;
        for (slot, p) in yb.iter_mut().zip(&series.points) {
            let m = p.resampled_mean(&mut rng);
            ok &= m > 0.0;
            *slot = m.ln();
        }
        if ok {
            slopes.push(ols(&x, &yb).0);
        }
    }
    Ok(ExponentFit {
        theta_hat,
        std_error: std_dev(&slopes),
        intercept,
        scales: series.scales(),
        residuals,
    })
}

/// `ln(mean) / ln(delta)`: the exponent implied by one truncated-window mean.
pub fn theta_of_delta(mean_distance: f64, delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(invalid("delta", format!("{delta} outside (0, 1)")));
    }
    if !(mean_distance > 0.0) {
        return Err(invalid("mean_distance", "must be positive"));
    }
    Ok(mean_distance.ln() / delta.ln())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GoodPointCriteria {
    pub gamma: f64,
    pub theta_prime: f64,
    /// Ratio of the supergood window ladder.
    pub r: f64,
}

impl GoodPointCriteria {
    pub fn new(gamma: f64, theta_prime: f64, r: f64) -> Result<Self> {
        if !(gamma >= 1.0) {
            return Err(invalid("gamma", "must be at least 1"));
        }
        if !(theta_prime > 0.0 && theta_prime < 1.0) {
            return Err(invalid("theta_prime", "must lie in (0, 1)"));
        }
        if !(r > 1.0) {
            return Err(invalid("r", "must exceed 1"));
        }
        Ok(Self { gamma, theta_prime, r })
    }
}

/// Width, in standard errors, of the band used by the statistical goodness test.
pub const GOOD_POINT_SIGMA: f64 = 2.0;

/// Grid scales `M*` at which `E d(M) <= gamma (M/M*)^theta' E d(M*)` holds for
/// every grid scale `M <= M*`, with each mean moved by two standard errors in
/// the direction favouring the inequality ("statistical-good").
pub fn detect_good_points(series: &ScalingSeries, criteria: &GoodPointCriteria) -> Vec<u64> {
    let tp = criteria.theta_prime;
    let mut good = Vec::new();
    let mut worst_below = f64::NEG_INFINITY;
    for p in &series.points {
        let m = p.scale as f64;
        let rhs = criteria.gamma * (p.mean + GOOD_POINT_SIGMA * p.se) * m.powf(-tp);
        if worst_below <= rhs {
            good.push(p.scale);
        }
        worst_below = worst_below.max((p.mean - GOOD_POINT_SIGMA * p.se) * m.powf(-tp));
    }
    good
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "status", content = "scale")]
pub enum WindowStatus {
    /// A good grid point lies in the window.
    Good(u64),
    /// The window holds grid points, none good.
    NoGoodPoint,
    /// No grid point falls in the window.
    Undecidable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Supergood,
    NotSupergood,
    Undecidable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupergoodReport {
    pub scale: u64,
    pub verdict: Verdict,
    /// Window `j` covers `[M* e^{-r^j}, M* e^{-r^{j-1}}]`, j = 1, 2, ...
    pub windows: Vec<WindowStatus>,
}

/// Number of ladder windows below `m_star`: `floor(log_r ln M*)`, the largest
/// `j` with `M* e^{-r^j} >= 1`.
pub fn ladder_depth(m_star: u64, r: f64) -> usize {
    let l = (m_star as f64).ln();
    if l <= 1.0 {
        return 0;
    }
    (l.ln() / r.ln()).floor().max(0.0) as usize
}

pub fn detect_supergood(series: &ScalingSeries, criteria: &GoodPointCriteria) -> Vec<SupergoodReport> {
    let good = detect_good_points(series, criteria);
    let scales = series.scales();
    series
        .points
        .iter()
        .map(|p| {
            let m_star = p.scale as f64;
            let windows: Vec<WindowStatus> = (1..=ladder_depth(p.scale, criteria.r))
                .map(|j| {
                    let lo = m_star * (-criteria.r.powi(j as i32)).exp();
                    let hi = m_star * (-criteria.r.powi(j as i32 - 1)).exp();
                    let inside: Vec<u64> = scales
                        .iter()
                        .copied()
                        .filter(|&s| (s as f64) >= lo && (s as f64) <= hi)
                        .collect();
                    if inside.is_empty() {
                        WindowStatus::Undecidable
                    } else if let Some(&g) = inside.iter().find(|s| good.contains(s)) {
                        WindowStatus::Good(g)
                    } else {
                        WindowStatus::NoGoodPoint
                    }
                })
                .collect();
            let verdict = if windows.contains(&WindowStatus::NoGoodPoint) {
                Verdict::NotSupergood
            } else if windows.contains(&WindowStatus::Undecidable) {
                Verdict::Undecidable
            } else {
                Verdict::Supergood
            };
            SupergoodReport {
                scale: p.scale,
                verdict,
                windows,
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentRatio {
    pub scale: u64,
    pub ratio: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

/// `E[d^k] / (E d)^k` per scale with 95% percentile bootstrap intervals.
pub fn moment_ratio(series: &ScalingSeries, k: u32) -> Result<Vec<MomentRatio>> {
    if !(2..=4).contains(&k) {
        return Err(invalid("k", "stored moments cover k = 2..=4"));
    }
    let mut rng = series.bootstrap_rng(2 + k as u64);
    series
        .points
        .iter()
        .map(|p| {
            if !(p.mean > 0.0) {
                return Err(LrpError::NonPositive {
                    scale: p.scale,
                    value: p.mean,
                });
            }
            let ratio = p.moment(k).expect("k checked") / p.mean.powi(k as i32);
            let (ci_low, ci_high) = if p.samples.is_empty() {
                (ratio, ratio)
            } else {
                let boots = (0..BOOTSTRAP_RESAMPLES)
                    .map(|_| {
                        let n = p.samples.len();
                        let idx: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
                        let m1 = idx.iter().map(|&i| p.samples[i]).sum::<f64>() / n as f64;
                        let mk = idx.iter().map(|&i| p.samples[i].powi(k as i32)).sum::<f64>() / n as f64;
                        mk / m1.powi(k as i32)
                    })
                    .filter(|v| v.is_finite())
                    .collect();
                percentile_interval(boots, 0.025)
            };
            Ok(MomentRatio {
                scale: p.scale,
                ratio,
                ci_low,
                ci_high,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TripleRatio {
    pub a: u64,
    pub b: u64,
    pub product: u64,
    /// `E d(ab) / (E d(a) E d(b))`.
    pub ratio: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiplicativityReport {
    pub triples: Vec<TripleRatio>,
    /// Pairs `(a, b)` whose product is not on the grid.
    pub skipped: Vec<(u64, u64)>,
    /// Smallest and largest ratio over all triples.
    pub band: Option<(f64, f64)>,
    pub band_limit: f64,
    /// `band.1 / band.0 <= band_limit`.
    pub within_band: bool,
}

/// Ratios `E d(ab) / (E d(a) E d(b))` over all grid triples `(a, b, ab)`, `a <= b`.
pub fn check_multiplicativity(series: &ScalingSeries, band_limit: f64) -> Result<MultiplicativityReport> {
    let mut rng = series.bootstrap_rng(10);
    let mut triples = Vec::new();
    let mut skipped = Vec::new();
    for (i, pa) in series.points.iter().enumerate() {
        for pb in &series.points[i..] {
            let Some(pab) = pa.scale.checked_mul(pb.scale).and_then(|s| series.point(s)) else {
                skipped.push((pa.scale, pb.scale));
                continue;
            };
            if !(pa.mean > 0.0 && pb.mean > 0.0) {
                return Err(LrpError::NonPositive {
                    scale: pa.scale.min(pb.scale),
                    value: pa.mean.min(pb.mean),
                });
            }
            let ratio = pab.mean / (pa.mean * pb.mean);
            let boots = (0..BOOTSTRAP_RESAMPLES)
                .map(|_| {
                    let ma = pa.resampled_mean(&mut rng);
                    let mb = if pa.scale == pb.scale { ma } else { pb.resampled_mean(&mut rng) };
                    pab.resampled_mean(&mut rng) / (ma * mb)
                })
                .filter(|v| v.is_finite() && *v > 0.0)
                .collect();
            let (ci_low, ci_high) = percentile_interval(boots, 0.025);
            triples.push(TripleRatio {
                a: pa.scale,
                b: pb.scale,
                product: pab.scale,
                ratio,
                ci_low,
                ci_high,
            });
        }
    }
    let band = triples.iter().fold(None, |acc: Option<(f64, f64)>, t| {
        Some(acc.map_or((t.ratio, t.ratio), |(lo, hi)| (lo.min(t.ratio), hi.max(t.ratio))))
    });
    let within_band = band.is_some_and(|(lo, hi)| hi / lo <= band_limit);
    Ok(MultiplicativityReport {
        triples,
        skipped,
        band,
        band_limit,
        within_band,
    })
}

/// Minimum replica count for [`check_tightness`].
pub const TIGHTNESS_MIN_REPLICAS: usize = 200;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TightnessReport {
    pub mean: f64,
    pub replicas: usize,
    /// `(C, P(mean / C <= d <= C mean))`.
    pub levels: Vec<(f64, f64)>,
}

pub fn check_tightness(samples: &[f64]) -> Result<TightnessReport> {
    if samples.len() < TIGHTNESS_MIN_REPLICAS {
        return Err(LrpError::InsufficientData(format!(
            "tightness needs at least {TIGHTNESS_MIN_REPLICAS} replicas, got {}",
            samples.len()
        )));
    }
    let mean = samples.iter().sum::<f64>() / samples.len() as f64;
    let levels = [2.0, 4.0, 8.0]
        .into_iter()
        .map(|c| {
            let inside = samples.iter().filter(|&&d| d >= mean / c && d <= c * mean).count();
            (c, inside as f64 / samples.len() as f64)
        })
        .collect();
    Ok(TightnessReport {
        mean,
        replicas: samples.len(),
        levels,
    })
}
