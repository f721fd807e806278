//! Exhaustive reference solver on a weight lattice, and the RPD metric.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ga::{Solution, BUDGET_PASSES, BUDGET_TOL};
use crate::model::{PortfolioWeights, RebalanceProblem};

/// Largest lattice the oracle agrees to enumerate.
pub const MAX_NODES: f64 = 1e8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleParams {
    /// Weight granularity as a fraction of wealth.
    pub step: f64,
    /// Cap on the support size, applied on top of the model's cardinality limit.
    pub max_assets_hint: Option<usize>,
}

impl Default for OracleParams {
    fn default() -> Self {
        Self {
            step: 0.02,
            max_assets_hint: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleOutcome {
    /// Minimum-risk lattice point meeting the return constraint; `None` if infeasible.
    pub best: Option<Solution>,
    pub nodes: usize,
}

fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Number of lattice nodes for `n` risky assets, support size at most `h` and `quanta` units.
pub fn lattice_size(n: usize, h: usize, quanta: usize) -> f64 {
    if quanta == 0 {
        return 1.0;
    }
    (1..=h.min(n))
        .map(|s| binomial(n, s) * binomial(quanta - 1, s - 1))
        .sum()
}

fn quanta_for(exposure: f64, step: f64) -> Result<usize> {
    if !(step > 0.0 && step <= 1.0) {
        return Err(Error::param(format!("oracle step must lie in (0, 1], got {step}")));
    }
    let q = (exposure / step).round();
    if (q * step - exposure).abs() > 1e-12 {
        return Err(Error::param(format!(
            "step {step} does not divide the exposure {exposure} into whole quanta"
        )));
    }
    Ok(q as usize)
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    // indices 1..=n, lexicographic
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (1..=k).collect();
    if k == 0 || k > n {
        return out;
    }
    loop {
        out.push(cur.clone());
        let mut i = k;
        while i > 0 && cur[i - 1] == n - k + i {
            i -= 1;
        }
        if i == 0 {
            return out;
        }
        cur[i - 1] += 1;
        for j in i..k {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

/// Visits every split of `total` into `parts` positive integers.
fn for_each_composition(total: usize, parts: usize, f: &mut impl FnMut(&[usize])) {
    fn rec(left: usize, parts: usize, buf: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
        if parts == 1 {
            buf.push(left);
            f(buf);
            buf.pop();
            return;
        }
        for first in 1..=left - (parts - 1) {
            buf.push(first);
            rec(left - first, parts - 1, buf, f);
            buf.pop();
        }
    }
    if parts == 0 || total < parts {
        return;
    }
    let mut buf = Vec::with_capacity(parts);
    rec(total, parts, &mut buf, f);
}

/// Rescales the risky weights so that their sum plus the induced cost equals
/// the exposure.
pub(crate) fn close_budget(problem: &RebalanceProblem, x: &mut [f64], exposure: f64) {
    for _ in 0..BUDGET_PASSES {
        let cost = problem.cost(x);
        let risky: f64 = x[1..].iter().sum();
        if (risky + cost - exposure).abs() <= BUDGET_TOL || risky <= 0.0 {
            return;
        }
        let target = exposure - cost;
        if target <= 0.0 {
            x[1..].iter_mut().for_each(|g| *g = 0.0);
            return;
        }
        let s = target / risky;
        x[1..].iter_mut().for_each(|g| *g *= s);
    }
}

struct Candidate {
    risk: f64,
    order: usize,
    x: Vec<f64>,
    net: f64,
}

/// Minimum-risk point of the step lattice that satisfies every constraint.
pub fn enumerate_optimum(problem: &RebalanceProblem, params: &OracleParams) -> Result<OracleOutcome> {
    let exposure = problem.exposure();
    let n = problem.n_risky();
    let mut h = problem.max_assets();
    if let Some(hint) = params.max_assets_hint {
        h = h.min(hint.max(1));
    }
    let quanta = quanta_for(exposure, params.step)?;
    let estimate = lattice_size(n, h, quanta);
    if estimate > MAX_NODES {
        return Err(Error::LatticeTooLarge {
            estimate,
            limit: MAX_NODES,
        });
    }
    let lambda = problem.config.min_return;
    let caps: Vec<f64> = problem.specs.iter().map(|s| s.upper).collect();

    if quanta == 0 {
        let mut x = vec![0.0; n + 1];
        x[0] = 1.0 - exposure;
        let net = problem.net_return(&x);
        let best = (net >= lambda).then(|| Solution {
            risk: problem.risk(&x),
            net_return: net,
            penalty: 0.0,
            weights: PortfolioWeights::new(x).expect("nonnegative"),
        });
        return Ok(OracleOutcome { best, nodes: 1 });
    }

    let supports: Vec<Vec<usize>> = (1..=h.min(n)).flat_map(|s| combinations(n, s)).collect();
    let results: Vec<(Option<Candidate>, usize)> = supports
        .par_iter()
        .enumerate()
        .map(|(si, support)| {
            let mut best: Option<Candidate> = None;
            let mut nodes = 0usize;
            let mut x = vec![0.0; n + 1];
            let mut local = 0usize;
            for_each_composition(quanta, support.len(), &mut |parts| {
                nodes += 1;
                local += 1;
                x.iter_mut().for_each(|g| *g = 0.0);
                x[0] = 1.0 - exposure;
                for (&i, &q) in support.iter().zip(parts) {
                    x[i] = q as f64 * exposure / quanta as f64;
                }
                close_budget(problem, &mut x, exposure);
                if x.iter().zip(&caps).skip(1).any(|(w, u)| *w > u + 1e-12) {
                    return;
                }
                let net = problem.net_return(&x);
                if net < lambda {
                    return;
                }
                let risk = problem.risk(&x);
                if best.as_ref().is_none_or(|b| risk < b.risk) {
                    best = Some(Candidate {
                        risk,
                        order: si,
                        x: x.clone(),
                        net,
                    });
                }
            });
            (best, nodes)
        })
        .collect();

    let nodes = results.iter().map(|(_, k)| k).sum();
    let best = results
        .into_iter()
        .filter_map(|(c, _)| c)
        .min_by(|a, b| a.risk.total_cmp(&b.risk).then(a.order.cmp(&b.order)))
        .map(|c| Solution {
            risk: c.risk,
            net_return: c.net,
            penalty: 0.0,
            weights: PortfolioWeights::new(c.x).expect("nonnegative"),
        });
    Ok(OracleOutcome { best, nodes })
}

/// Relative percentage deviation of a candidate risk from a baseline risk.
/// Negative values mean the candidate found lower risk.
pub fn rpd(candidate_risk: f64, baseline_risk: f64) -> Result<f64> {
    if !(baseline_risk > 0.0) {
        return Err(Error::domain(format!(
            "RPD baseline must be positive, got {baseline_risk}"
        )));
    }
    Ok((candidate_risk - baseline_risk) / baseline_risk * 100.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rpd_examples() {
        assert!((rpd(0.83, 1.0).unwrap() + 17.0).abs() < 1e-9);
        assert_eq!(rpd(1.0, 1.0).unwrap(), 0.0);
        assert!((rpd(1.02, 1.0).unwrap() - 2.0).abs() < 1e-9);
        assert!(rpd(1.0, 0.0).is_err());
        assert!(rpd(1.0, -1.0).is_err());
    }

    #[test]
    fn compositions_are_counted_by_binomials() {
        for (total, parts) in [(5, 1), (5, 2), (7, 3), (10, 4)] {
            let mut count = 0usize;
            for_each_composition(total, parts, &mut |p| {
                assert_eq!(p.iter().sum::<usize>(), total);
                assert!(p.iter().all(|&v| v >= 1));
                count += 1;
            });
            assert_eq!(count as f64, binomial(total - 1, parts - 1));
        }
    }

    #[test]
    fn combinations_enumerate_subsets() {
        let c = combinations(4, 2);
        assert_eq!(c.len(), 6);
        assert_eq!(c[0], vec![1, 2]);
        assert_eq!(c[5], vec![3, 4]);
        assert_eq!(combinations(3, 3), vec![vec![1, 2, 3]]);
    }

    #[test]
    fn lattice_size_matches_hand_count() {
        // n=4, h=3, 45 quanta: 4*1 + 6*44 + 4*946
        assert_eq!(lattice_size(4, 3, 45), 4.0 + 264.0 + 3784.0);
    }

    #[test]
    fn step_must_divide_exposure() {
        assert_eq!(quanta_for(0.9, 0.02).unwrap(), 45);
        assert_eq!(quanta_for(0.9, 0.1).unwrap(), 9);
        assert!(quanta_for(0.9, 0.07).is_err());
        assert!(quanta_for(0.9, 0.0).is_err());
    }
}
