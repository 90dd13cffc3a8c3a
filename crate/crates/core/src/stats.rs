//! Goodness-of-fit tests and small descriptive helpers.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{invalid, LrpError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestOutcome {
    pub statistic: f64,
    pub p_value: f64,
}

impl TestOutcome {
    /// True when the null hypothesis survives at `alpha`.
    pub fn passes(&self, alpha: f64) -> bool {
        self.p_value > alpha
    }
}

/// Survival function of the Kolmogorov distribution, `P(K > lambda)`.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda < 1e-3 {
        return 1.0;
    }
    if lambda < 1.18 {
        // Jacobi-theta form converges fast for small arguments.
        let x = (-std::f64::consts::PI.powi(2) / (8.0 * lambda * lambda)).exp();
        let pref = (2.0 * std::f64::consts::PI).sqrt() / lambda;
        let cdf = pref * (x + x.powi(9) + x.powi(25) + x.powi(49));
        return (1.0 - cdf).clamp(0.0, 1.0);
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let k = k as f64;
        let term = (-2.0 * k * k * lambda * lambda).exp();
        sum += if k as u64 % 2 == 1 { term } else { -term };
        if term < 1e-18 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

fn sorted(xs: &[f64]) -> Result<Vec<f64>> {
    if xs.iter().any(|x| x.is_nan()) {
        return Err(invalid("samples", "NaN in sample"));
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// Asymptotic p-value with the Stephens small-sample correction.
fn ks_p_value(d: f64, effective_n: f64) -> f64 {
    let s = effective_n.sqrt();
    kolmogorov_sf((s + 0.12 + 0.11 / s) * d)
}

/// Two-sample Kolmogorov-Smirnov test.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<TestOutcome> {
    if a.is_empty() || b.is_empty() {
        return Err(LrpError::InsufficientData("empty sample".into()));
    }
    let (a, b) = (sorted(a)?, sorted(b)?);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d = 0.0f64;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(TestOutcome {
        statistic: d,
        p_value: ks_p_value(d, na * nb / (na + nb)),
    })
}

/// One-sample Kolmogorov-Smirnov test against a continuous CDF.
pub fn ks_one_sample(xs: &[f64], cdf: impl Fn(f64) -> f64) -> Result<TestOutcome> {
    if xs.is_empty() {
        return Err(LrpError::InsufficientData("empty sample".into()));
    }
    let xs = sorted(xs)?;
    let n = xs.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    Ok(TestOutcome {
        statistic: d,
        p_value: ks_p_value(d, n),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChiSquareOutcome {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

impl ChiSquareOutcome {
    pub fn passes(&self, alpha: f64) -> bool {
        self.p_value > alpha
    }
}

fn chi_square_sf(statistic: f64, dof: usize) -> Result<f64> {
    let dist = ChiSquared::new(dof as f64).map_err(|e| invalid("dof", e.to_string()))?;
    Ok(dist.sf(statistic))
}

/// Pearson goodness of fit: observed counts against expected counts.
pub fn chi_square_gof(observed: &[u64], expected: &[f64]) -> Result<ChiSquareOutcome> {
    if observed.len() != expected.len() || observed.len() < 2 {
        return Err(invalid("observed", "need matching bins, at least two"));
    }
    let statistic = observed
        .iter()
        .zip(expected)
        .map(|(&o, &e)| (o as f64 - e).powi(2) / e)
        .sum();
    let dof = observed.len() - 1;
    Ok(ChiSquareOutcome {
        statistic,
        dof,
        p_value: chi_square_sf(statistic, dof)?,
    })
}

/// Goodness of fit of integer counts to `Poisson(lambda)`, pooling tail
/// bins so that every bin expects at least five observations.
pub fn poisson_gof(counts: &[u64], lambda: f64) -> Result<ChiSquareOutcome> {
    if !(lambda > 0.0) {
        return Err(invalid("lambda", "must be positive"));
    }
    let total = counts.len() as f64;
    let mut pmf = (-lambda).exp();
    let mut cum = 0.0;
    let mut edges = Vec::new(); // upper inclusive bound of each bin
    let mut expected = Vec::new();
    let mut acc = 0.0;
    let mut k = 0u64;
    while 1.0 - cum > 0.0 && k < 10_000 {
        acc += pmf;
        cum += pmf;
        if acc * total >= 5.0 && (1.0 - cum) * total >= 5.0 {
            edges.push(k);
            expected.push(acc * total);
            acc = 0.0;
        }
        if (1.0 - cum) * total < 5.0 {
            break;
        }
        k += 1;
        pmf *= lambda / k as f64;
    }
    // Last bin absorbs everything above the previous edge.
    let last_mass = 1.0 - expected.iter().sum::<f64>() / total;
    expected.push(last_mass * total);
    let mut observed = vec![0u64; expected.len()];
    for &c in counts {
        let bin = edges.partition_point(|&e| e < c);
        observed[bin] += 1;
    }
    chi_square_gof(&observed, &expected)
}

/// Pearson test of independence on an `r x c` contingency table.
pub fn chi_square_independence(table: &[Vec<u64>]) -> Result<ChiSquareOutcome> {
    let rows = table.len();
    let cols = table.first().map_or(0, Vec::len);
    if rows < 2 || cols < 2 || table.iter().any(|r| r.len() != cols) {
        return Err(invalid("table", "need a rectangular table of at least 2x2"));
    }
    let total: u64 = table.iter().flatten().sum();
    let row_sum: Vec<f64> = table.iter().map(|r| r.iter().sum::<u64>() as f64).collect();
    let col_sum: Vec<f64> = (0..cols)
        .map(|c| table.iter().map(|r| r[c]).sum::<u64>() as f64)
        .collect();
    let mut statistic = 0.0;
    for (r, row) in table.iter().enumerate() {
        for (c, &o) in row.iter().enumerate() {
            let e = row_sum[r] * col_sum[c] / total as f64;
            if e > 0.0 {
                statistic += (o as f64 - e).powi(2) / e;
            }
        }
    }
    let dof = (rows - 1) * (cols - 1);
    Ok(ChiSquareOutcome {
        statistic,
        dof,
        p_value: chi_square_sf(statistic, dof)?,
    })
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation (divisor `n - 1`).
pub fn std_dev(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

/// Linear-interpolated empirical quantile; `xs` must be sorted.
pub fn quantile_sorted(xs: &[f64], q: f64) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    let h = q.clamp(0.0, 1.0) * (xs.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    xs[lo] + (h - lo as f64) * (xs[hi] - xs[lo])
}

/// Percentile interval `[q, 1 - q]` of a bootstrap distribution.
pub fn percentile_interval(mut xs: Vec<f64>, q: f64) -> (f64, f64) {
    xs.sort_by(f64::total_cmp);
    (quantile_sorted(&xs, q), quantile_sorted(&xs, 1.0 - q))
}
