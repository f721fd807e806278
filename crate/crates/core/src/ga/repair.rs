//! Repair of raw chromosomes into points of the feasible set (return
//! constraint excepted, which the fitness penalty handles).

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::RebalanceProblem;

use super::Chromosome;

/// Tolerance of the cost fixed point in [`RepairMode::CostConsistent`].
pub const BUDGET_TOL: f64 = 1e-10;
/// Pass limit of the cost fixed point.
pub const BUDGET_PASSES: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RepairMode {
    /// Risky genes sum to the exposure; costs are not charged to the budget.
    ExposureOnly,
    /// Risky genes plus transaction costs sum to the exposure.
    CostConsistent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CardinalityRule {
    /// Keep a random number `h'` in `[1, h]` of the largest genes.
    RandomCount,
    /// Always keep the `h` largest genes.
    KeepMax,
}

/// Fails when no `h` risky assets can hold the exposure under their caps.
pub fn check_caps(problem: &RebalanceProblem) -> Result<()> {
    let exposure = problem.exposure();
    let h = problem.max_assets();
    let mut caps: Vec<f64> = problem.specs[1..].iter().map(|s| s.upper).collect();
    caps.sort_by(|a, b| b.total_cmp(a));
    let cap_sum: f64 = caps.iter().take(h).sum();
    if cap_sum + BUDGET_TOL < exposure {
        return Err(Error::InfeasibleCaps { h, cap_sum, exposure });
    }
    Ok(())
}

pub fn repair<R: Rng + ?Sized>(
    chromosome: &Chromosome,
    problem: &RebalanceProblem,
    mode: RepairMode,
    rule: CardinalityRule,
    rng: &mut R,
) -> Result<Chromosome> {
    let n1 = problem.specs.len();
    Error::check_len(n1, chromosome.genes.len())?;
    check_caps(problem)?;
    let exposure = problem.exposure();
    let mut x: Vec<f64> = chromosome
        .genes
        .iter()
        .map(|g| if *g > 0.0 { *g } else { 0.0 })
        .collect();
    x[0] = 1.0 - exposure;

    if exposure <= 0.0 {
        x[1..].iter_mut().for_each(|g| *g = 0.0);
        return Ok(Chromosome { genes: x });
    }

    limit_cardinality(&mut x, problem.max_assets(), rule, rng);

    if x[1..].iter().all(|&g| g == 0.0) {
        let pick = rng.random_range(1..n1);
        x[pick] = exposure;
    }

    match mode {
        RepairMode::ExposureOnly => fill_to(&mut x, exposure, problem, rng),
        RepairMode::CostConsistent => {
            let mut target = exposure;
            for _ in 0..BUDGET_PASSES {
                fill_to(&mut x, target, problem, rng);
                let cost = problem.cost(&x);
                let risky: f64 = x[1..].iter().sum();
                if (risky + cost - exposure).abs() <= BUDGET_TOL {
                    break;
                }
                target = exposure - cost;
                if target <= 0.0 {
                    // costs of the forced trades exceed the exposure
                    x[1..].iter_mut().for_each(|g| *g = 0.0);
                    break;
                }
            }
        }
    }
    x[0] = 1.0 - exposure;
    Ok(Chromosome { genes: x })
}

/// Zeroes the smallest risky genes when more than `h` are nonzero.
fn limit_cardinality<R: Rng + ?Sized>(x: &mut [f64], h: usize, rule: CardinalityRule, rng: &mut R) {
    let held = x[1..].iter().filter(|&&g| g > 0.0).count();
    if held <= h {
        return;
    }
    let keep = match rule {
        CardinalityRule::RandomCount => rng.random_range(1..=h),
        CardinalityRule::KeepMax => h,
    };
    let n = x.len() - 1;
    let mut order: Vec<usize> = (1..=n).collect();
    // ascending by (value, index)
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]).then(a.cmp(&b)));
    for &i in &order[..n - keep] {
        x[i] = 0.0;
    }
}

/// Scales the nonzero risky genes proportionally so they sum to `target`,
/// clipping at the caps and redistributing the excess over unclipped genes.
fn fill_to<R: Rng + ?Sized>(x: &mut [f64], target: f64, problem: &RebalanceProblem, rng: &mut R) {
    let caps: Vec<f64> = problem.specs.iter().map(|s| s.upper).collect();
    let h = problem.max_assets();
    loop {
        let support: Vec<usize> = (1..x.len()).filter(|&i| x[i] > 0.0).collect();
        if support.is_empty() {
            return;
        }
        let mut capped = vec![false; x.len()];
        loop {
            let fixed: f64 = support.iter().filter(|&&i| capped[i]).map(|&i| caps[i]).sum();
            let free: f64 = support.iter().filter(|&&i| !capped[i]).map(|&i| x[i]).sum();
            if free <= 0.0 {
                break;
            }
            let scale = (target - fixed) / free;
            let mut newly = false;
            for &i in &support {
                if !capped[i] && scale * x[i] > caps[i] {
                    capped[i] = true;
                    newly = true;
                }
            }
            if !newly {
                for &i in &support {
                    x[i] = if capped[i] { caps[i] } else { scale * x[i] };
                }
                return;
            }
        }
        // every held gene sits at its cap
        for &i in &support {
            x[i] = caps[i];
        }
        let held: f64 = support.iter().map(|&i| caps[i]).sum();
        let mut remaining = target - held;
        if remaining <= BUDGET_TOL || support.len() >= h {
            return;
        }
        let empty: Vec<usize> = (1..x.len()).filter(|&i| x[i] == 0.0 && caps[i] > 0.0).collect();
        if empty.is_empty() {
            return;
        }
        let j = empty[rng.random_range(0..empty.len())];
        x[j] = remaining.min(caps[j]);
        remaining -= x[j];
        if remaining <= BUDGET_TOL {
            return;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{AssetSpec, Constraint, MarketState, ModelConfig, PortfolioWeights};
    use crate::uncertainty::UncertainDistribution;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn problem(n: usize, h: usize, caps: f64, costs: bool) -> RebalanceProblem {
        let mut specs = vec![AssetSpec::bond(0.00056)];
        for i in 1..=n {
            let mut s = AssetSpec::stock(i, UncertainDistribution::normal(0.001, 0.02).unwrap()).with_bounds(0.0, caps);
            if !costs {
                s = s.with_costs(0.0, 0.0);
            }
            specs.push(s);
        }
        if !costs {
            specs[0] = specs[0].clone().with_costs(0.0, 0.0);
        }
        let config = ModelConfig {
            max_assets: h,
            ..ModelConfig::default()
        };
        let market = MarketState::new(100_000.0, 70_000.0, 3.0).unwrap();
        RebalanceProblem::new(specs, config, market, PortfolioWeights::all_risk_free(n), 99).unwrap()
    }

    #[test]
    fn equal_genes_share_the_exposure() {
        let p = problem(10, 10, 1.0, false);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut genes = vec![0.0];
        genes.extend(std::iter::repeat_n(0.3, 10));
        let out = repair(
            &Chromosome { genes },
            &p,
            RepairMode::ExposureOnly,
            CardinalityRule::RandomCount,
            &mut rng,
        )
        .unwrap();
        assert!((out.genes[0] - 0.1).abs() < 1e-12);
        for g in &out.genes[1..] {
            assert!((g - 0.09).abs() < 1e-12);
        }
    }

    #[test]
    fn fixed_point_of_exposure_only_repair() {
        let p = problem(4, 4, 1.0, true);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let genes = vec![0.1, 0.2, 0.3, 0.4, 0.0];
        let out = repair(
            &Chromosome { genes: genes.clone() },
            &p,
            RepairMode::ExposureOnly,
            CardinalityRule::RandomCount,
            &mut rng,
        )
        .unwrap();
        for (a, b) in out.genes.iter().zip(&genes) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn capped_gene_is_clipped_and_budget_closed() {
        let mut p = problem(4, 4, 1.0, true);
        p.specs[1].upper = 0.3;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let genes = vec![0.0, 0.5, 0.1, 0.1, 0.1];
        let out = repair(
            &Chromosome { genes },
            &p,
            RepairMode::CostConsistent,
            CardinalityRule::RandomCount,
            &mut rng,
        )
        .unwrap();
        assert!(out.genes[1] <= 0.3 + 1e-12);
        let x = PortfolioWeights::new(out.genes.clone()).unwrap();
        let report = p.check(&x).unwrap().ignoring(&[Constraint::MinReturn]);
        assert!(report.is_feasible(), "{report}");
    }

    #[test]
    fn cardinality_repair_keeps_at_most_h() {
        let p = problem(8, 3, 1.0, true);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..200 {
            let mut genes = vec![0.0];
            genes.extend((0..8).map(|_| rng.random::<f64>()));
            let out = repair(
                &Chromosome { genes: genes.clone() },
                &p,
                RepairMode::CostConsistent,
                CardinalityRule::RandomCount,
                &mut rng,
            )
            .unwrap();
            let held = out.genes[1..].iter().filter(|&&g| g > 0.0).count();
            assert!((1..=3).contains(&held));
            // survivors are the largest originals
            let min_kept = (1..9)
                .filter(|&i| out.genes[i] > 0.0)
                .map(|i| genes[i])
                .fold(f64::INFINITY, f64::min);
            let max_dropped = (1..9)
                .filter(|&i| out.genes[i] == 0.0)
                .map(|i| genes[i])
                .fold(0.0, f64::max);
            assert!(min_kept >= max_dropped);
            let x = PortfolioWeights::new(out.genes).unwrap();
            assert!(p.check(&x).unwrap().ignoring(&[Constraint::MinReturn]).is_feasible());
        }
    }

    #[test]
    fn keep_max_rule_keeps_exactly_h() {
        let p = problem(6, 2, 1.0, false);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let genes = vec![0.0, 0.1, 0.6, 0.2, 0.5, 0.3, 0.4];
        let out = repair(
            &Chromosome { genes },
            &p,
            RepairMode::ExposureOnly,
            CardinalityRule::KeepMax,
            &mut rng,
        )
        .unwrap();
        let held: Vec<usize> = (1..7).filter(|&i| out.genes[i] > 0.0).collect();
        assert_eq!(held, vec![2, 4]);
    }

    #[test]
    fn ties_resolved_by_asset_index() {
        let p = problem(4, 2, 1.0, false);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let genes = vec![0.0, 0.2, 0.2, 0.2, 0.2];
        let out = repair(
            &Chromosome { genes },
            &p,
            RepairMode::ExposureOnly,
            CardinalityRule::KeepMax,
            &mut rng,
        )
        .unwrap();
        assert_eq!(out.genes[1], 0.0);
        assert_eq!(out.genes[2], 0.0);
        assert!(out.genes[3] > 0.0 && out.genes[4] > 0.0);
    }

    #[test]
    fn tight_caps_spill_into_empty_genes() {
        let p = problem(5, 5, 0.25, false);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let genes = vec![0.0, 0.9, 0.0, 0.0, 0.0, 0.0];
        let out = repair(
            &Chromosome { genes },
            &p,
            RepairMode::CostConsistent,
            CardinalityRule::RandomCount,
            &mut rng,
        )
        .unwrap();
        let sum: f64 = out.genes[1..].iter().sum();
        assert!((sum - 0.9).abs() < 1e-12);
        assert!(out.genes[1..].iter().all(|&g| g <= 0.25 + 1e-12));
    }

    #[test]
    fn infeasible_caps_error() {
        let p = problem(3, 2, 0.4, false);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let err = repair(
            &Chromosome {
                genes: vec![0.0, 0.3, 0.3, 0.3],
            },
            &p,
            RepairMode::ExposureOnly,
            CardinalityRule::KeepMax,
            &mut rng,
        );
        assert!(matches!(err, Err(Error::InfeasibleCaps { .. })));
    }

    #[test]
    fn zero_exposure_is_all_risk_free() {
        let mut p = problem(3, 3, 1.0, true);
        p.market = MarketState::new(60_000.0, 70_000.0, 5.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let out = repair(
            &Chromosome {
                genes: vec![0.0, 0.3, 0.3, 0.3],
            },
            &p,
            RepairMode::CostConsistent,
            CardinalityRule::RandomCount,
            &mut rng,
        )
        .unwrap();
        assert_eq!(out.genes, vec![1.0, 0.0, 0.0, 0.0]);
    }
}
