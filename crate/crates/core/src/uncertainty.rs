//! Uncertain return distributions and the quantile-grid moment method.
//!
//! Every asset return is an uncertain variable described by its uncertainty
//! distribution. The portfolio return is a nonnegative weighted sum of these
//! variables, so its inverse distribution at level `alpha` is the weighted
//! sum of the individual inverses. Tabulating the inverses on a fixed ladder
//! of levels turns expected value and variance into plain averages over the
//! ladder.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default number of quantile levels (`0.0001, 0.0002, ..., 0.9999`).
pub const DEFAULT_LEVELS: usize = 9999;

/// Smallest ladder accepted by [`QuantileGrid::build`].
pub const MIN_LEVELS: usize = 99;

/// Per-period return model of a single asset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum UncertainDistribution {
    /// Linear uncertainty distribution on `[a, b]`.
    Linear { a: f64, b: f64 },
    /// Normal uncertainty distribution with expected value `e` and spread `sigma`.
    Normal { e: f64, sigma: f64 },
    /// Degenerate return `c`.
    Constant { c: f64 },
}

impl UncertainDistribution {
    pub fn linear(a: f64, b: f64) -> Result<Self> {
        let d = Self::Linear { a, b };
        d.validate()?;
        Ok(d)
    }

    pub fn normal(e: f64, sigma: f64) -> Result<Self> {
        let d = Self::Normal { e, sigma };
        d.validate()?;
        Ok(d)
    }

    pub fn constant(c: f64) -> Result<Self> {
        let d = Self::Constant { c };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |v: f64| v.is_finite();
        match *self {
            Self::Linear { a, b } => {
                if !finite(a) || !finite(b) {
                    return Err(Error::InvalidDistribution(format!(
                        "linear({a}, {b}) has a non-finite bound"
                    )));
                }
                if a >= b {
                    return Err(Error::InvalidDistribution(format!(
                        "linear requires a < b, got a={a}, b={b}"
                    )));
                }
            }
            Self::Normal { e, sigma } => {
                if !finite(e) || !finite(sigma) {
                    return Err(Error::InvalidDistribution(format!(
                        "normal({e}, {sigma}) has a non-finite parameter"
                    )));
                }
                if sigma <= 0.0 {
                    return Err(Error::InvalidDistribution(format!(
                        "normal requires sigma > 0, got {sigma}"
                    )));
                }
            }
            Self::Constant { c } => {
                if !finite(c) {
                    return Err(Error::InvalidDistribution(format!("constant({c}) is not finite")));
                }
            }
        }
        Ok(())
    }

    /// Uncertainty distribution `M{xi <= x}`.
    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            Self::Linear { a, b } => ((x - a) / (b - a)).clamp(0.0, 1.0),
            Self::Normal { e, sigma } => 1.0 / (1.0 + (PI * (e - x) / (3f64.sqrt() * sigma)).exp()),
            Self::Constant { c } => {
                if x >= c {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// Inverse uncertainty distribution at `alpha` in the open unit interval.
    pub fn inverse_cdf(&self, alpha: f64) -> Result<f64> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::domain(format!("quantile level must lie in (0, 1), got {alpha}")));
        }
        Ok(self.inverse_unchecked(alpha))
    }

    fn inverse_unchecked(&self, alpha: f64) -> f64 {
        match *self {
            Self::Linear { a, b } => a + alpha * (b - a),
            Self::Normal { e, sigma } => e + sigma * 3f64.sqrt() / PI * (alpha / (1.0 - alpha)).ln(),
            Self::Constant { c } => c,
        }
    }

    /// Closed-form expected value.
    pub fn expected_value(&self) -> f64 {
        match *self {
            Self::Linear { a, b } => (a + b) / 2.0,
            Self::Normal { e, .. } => e,
            Self::Constant { c } => c,
        }
    }

    /// Closed-form variance.
    pub fn variance(&self) -> f64 {
        match *self {
            Self::Linear { a, b } => (b - a).powi(2) / 12.0,
            Self::Normal { sigma, .. } => sigma * sigma,
            Self::Constant { .. } => 0.0,
        }
    }

    pub fn family(&self) -> &'static str {
        match self {
            Self::Linear { .. } => "linear",
            Self::Normal { .. } => "normal",
            Self::Constant { .. } => "constant",
        }
    }
}

/// Expected value and variance of a portfolio's uncertain return.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub expected: f64,
    pub variance: f64,
}

/// Table of inverse distributions sampled on the ladder `alpha_j = j / (K + 1)`.
///
/// Row `i` holds asset `i` (row 0 is the risk-free asset), column `j` the
/// level `alpha_{j+1}`. Immutable once built.
#[derive(Debug, Clone)]
pub struct QuantileGrid {
    levels: Vec<f64>,
    values: Vec<f64>,
    rows: usize,
}

impl QuantileGrid {
    pub fn build(dists: &[UncertainDistribution], levels: usize) -> Result<Self> {
        if levels < MIN_LEVELS {
            return Err(Error::param(format!(
                "grid needs at least {MIN_LEVELS} levels, got {levels}"
            )));
        }
        for (i, d) in dists.iter().enumerate() {
            d.validate()
                .map_err(|e| Error::InvalidDistribution(format!("asset {i}: {e}")))?;
        }
        let denom = (levels + 1) as f64;
        let ladder: Vec<f64> = (1..=levels).map(|j| j as f64 / denom).collect();
        let mut values = Vec::with_capacity(dists.len() * levels);
        for d in dists {
            values.extend(ladder.iter().map(|&alpha| d.inverse_unchecked(alpha)));
        }
        Ok(Self {
            levels: ladder,
            values,
            rows: dists.len(),
        })
    }

    /// Number of quantile levels `K`.
    pub fn len_levels(&self) -> usize {
        self.levels.len()
    }

    /// Number of assets (rows), risk-free included.
    pub fn len_assets(&self) -> usize {
        self.rows
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn row(&self, asset: usize) -> &[f64] {
        let k = self.levels.len();
        &self.values[asset * k..(asset + 1) * k]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.levels.len())
    }

    fn check_weights(&self, weights: &[f64]) -> Result<()> {
        Error::check_len(self.rows, weights.len())?;
        if let Some((i, w)) = weights.iter().enumerate().find(|(_, w)| !(**w >= 0.0)) {
            return Err(Error::domain(format!("weight {i} must be nonnegative, got {w}")));
        }
        Ok(())
    }

    /// Inverse distribution of the weighted sum, one value per level.
    pub fn composite_row(&self, weights: &[f64]) -> Result<Vec<f64>> {
        self.check_weights(weights)?;
        let mut out = vec![0.0; self.levels.len()];
        for (row, &w) in self.rows().zip(weights) {
            if w == 0.0 {
                continue;
            }
            for (acc, t) in out.iter_mut().zip(row) {
                *acc += w * t;
            }
        }
        Ok(out)
    }

    /// Expected value and variance of `sum_i w_i xi_i` as plain averages over the ladder.
    pub fn portfolio_moments(&self, weights: &[f64]) -> Result<Moments> {
        let composite = self.composite_row(weights)?;
        let k = composite.len() as f64;
        let expected = composite.iter().sum::<f64>() / k;
        let variance = composite.iter().map(|v| (v - expected).powi(2)).sum::<f64>() / k;
        Ok(Moments { expected, variance })
    }
}

/// Precomputed row means and centered cross-products of a [`QuantileGrid`].
///
/// The grid variance is a quadratic form in the weights, so one pass over the
/// grid yields a matrix that evaluates any weight vector in `O(n^2)` instead
/// of `O(n K)`. Values agree with [`QuantileGrid::portfolio_moments`] up to
/// floating-point reassociation.
#[derive(Debug, Clone)]
pub struct MomentKernel {
    means: Vec<f64>,
    cross: Vec<f64>,
    n: usize,
}

impl MomentKernel {
    pub fn from_grid(grid: &QuantileGrid) -> Self {
        let n = grid.len_assets();
        let k = grid.len_levels() as f64;
        let means: Vec<f64> = grid.rows().map(|r| r.iter().sum::<f64>() / k).collect();
        let centered: Vec<Vec<f64>> = grid
            .rows()
            .zip(&means)
            .map(|(r, m)| r.iter().map(|t| t - m).collect())
            .collect();
        let mut cross = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let c = centered[i].iter().zip(&centered[j]).map(|(a, b)| a * b).sum::<f64>() / k;
                cross[i * n + j] = c;
                cross[j * n + i] = c;
            }
        }
        Self { means, cross, n }
    }

    pub fn len_assets(&self) -> usize {
        self.n
    }

    /// Grid expected value of each asset.
    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn expected(&self, weights: &[f64]) -> f64 {
        self.means.iter().zip(weights).map(|(m, w)| m * w).sum()
    }

    /// Expected value restricted to the risky assets (index 1 onward).
    pub fn expected_risky(&self, weights: &[f64]) -> f64 {
        self.means.iter().zip(weights).skip(1).map(|(m, w)| m * w).sum()
    }

    pub fn variance(&self, weights: &[f64]) -> f64 {
        let n = self.n;
        let mut total = 0.0;
        for (i, &wi) in weights.iter().enumerate() {
            if wi == 0.0 {
                continue;
            }
            let row = &self.cross[i * n..(i + 1) * n];
            let inner: f64 = row.iter().zip(weights).map(|(c, w)| c * w).sum();
            total += wi * inner;
        }
        total.max(0.0)
    }

    pub fn moments(&self, weights: &[f64]) -> Result<Moments> {
        Error::check_len(self.n, weights.len())?;
        if let Some((i, w)) = weights.iter().enumerate().find(|(_, w)| !(**w >= 0.0)) {
            return Err(Error::domain(format!("weight {i} must be nonnegative, got {w}")));
        }
        Ok(Moments {
            expected: self.expected(weights),
            variance: self.variance(weights),
        })
    }
}
