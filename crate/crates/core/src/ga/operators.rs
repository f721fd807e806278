use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;

use crate::error::{Error, Result};
use crate::model::RebalanceProblem;

use super::{Chromosome, Evaluated, GaParams};

/// Penalized objective `risk + M * shortfall`; fitness is `exp(-k * objective)`.
pub fn evaluate(chromosome: Chromosome, problem: &RebalanceProblem, params: &GaParams) -> Evaluated {
    let x = &chromosome.genes;
    let risk = problem.risk(x);
    let net_return = problem.net_return(x);
    let penalty = (problem.config.min_return - net_return).max(0.0);
    Evaluated {
        objective: risk + params.penalty_weight * penalty,
        risk,
        net_return,
        penalty,
        chromosome,
    }
}

/// Fitness in `(0, 1]`; values that underflow are clamped to the smallest positive double.
pub fn fitness(chromosome: &Chromosome, problem: &RebalanceProblem, params: &GaParams) -> f64 {
    evaluate(chromosome.clone(), problem, params).fitness(params.fitness_scale)
}

/// Draws `count` indices with probability proportional to `fitnesses`.
pub fn select_roulette<R: Rng + ?Sized>(fitnesses: &[f64], count: usize, rng: &mut R) -> Result<Vec<usize>> {
    if let Some(f) = fitnesses.iter().find(|f| !(**f > 0.0)) {
        return Err(Error::domain(format!("roulette needs positive fitness, got {f}")));
    }
    let logs: Vec<f64> = fitnesses.iter().map(|f| f.ln()).collect();
    select_roulette_log(&logs, count, rng)
}

/// Roulette selection on log-fitness values.
///
/// Weights are `exp(l_i - max l)`, which leaves the selection probabilities
/// `f_i / sum f` unchanged while staying representable when every `f_i`
/// underflows.
pub fn select_roulette_log<R: Rng + ?Sized>(log_fitness: &[f64], count: usize, rng: &mut R) -> Result<Vec<usize>> {
    if log_fitness.is_empty() {
        return Err(Error::EmptyPopulation);
    }
    if count == 0 {
        return Ok(Vec::new());
    }
    let top = log_fitness.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = log_fitness.iter().map(|l| (l - top).exp()).collect();
    let dist = WeightedIndex::new(&weights).map_err(|e| Error::domain(format!("roulette weights: {e}")))?;
    Ok((0..count).map(|_| dist.sample(rng)).collect())
}

/// One-point crossover. The risk-free gene never moves; genes from the cut
/// position onward are exchanged. Children are returned unrepaired.
pub fn crossover<R: Rng + ?Sized>(a: &Chromosome, b: &Chromosome, rng: &mut R) -> Result<(Chromosome, Chromosome)> {
    Error::check_len(a.genes.len(), b.genes.len())?;
    let len = a.genes.len();
    if len < 2 {
        return Ok((a.clone(), b.clone()));
    }
    // 1-based cut in [2, len] maps to 0-based start in [1, len - 1]
    let start = rng.random_range(1..len);
    Ok(crossover_at(a, b, start))
}

pub(crate) fn crossover_at(a: &Chromosome, b: &Chromosome, start: usize) -> (Chromosome, Chromosome) {
    let mut c1 = a.genes.clone();
    let mut c2 = b.genes.clone();
    c1[start..].copy_from_slice(&b.genes[start..]);
    c2[start..].copy_from_slice(&a.genes[start..]);
    (Chromosome { genes: c1 }, Chromosome { genes: c2 })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MutationKind {
    Swap(usize, usize),
    Replace(usize),
}

/// Swaps two risky genes or redraws one on `[0, exposure]`, with equal
/// probability. Gene 0 is never touched. The result is unrepaired.
pub fn mutate<R: Rng + ?Sized>(c: &Chromosome, exposure: f64, rng: &mut R) -> (Chromosome, MutationKind) {
    let n = c.genes.len() - 1;
    let mut genes = c.genes.clone();
    if n == 0 {
        return (Chromosome { genes }, MutationKind::Replace(0));
    }
    if n >= 2 && rng.random_bool(0.5) {
        let i = rng.random_range(1..=n);
        let mut j = rng.random_range(1..n);
        if j >= i {
            j += 1;
        }
        genes.swap(i, j);
        (Chromosome { genes }, MutationKind::Swap(i, j))
    } else {
        let i = rng.random_range(1..=n);
        genes[i] = rng.random::<f64>() * exposure;
        (Chromosome { genes }, MutationKind::Replace(i))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn roulette_equal_weights_uniform() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let picks = select_roulette(&[0.5; 4], 40_000, &mut rng).unwrap();
        let mut counts = [0usize; 4];
        for p in picks {
            counts[p] += 1;
        }
        for c in counts {
            // 1/4 with binomial sd sqrt(40000 * 0.25 * 0.75) ~ 86.6
            assert!((c as f64 - 10_000.0).abs() < 4.0 * 86.6, "{counts:?}");
        }
    }

    #[test]
    fn roulette_ratio_matches_fitness() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let draws = 100_000;
        let picks = select_roulette(&[0.9, 0.1], draws, &mut rng).unwrap();
        let first = picks.iter().filter(|&&p| p == 0).count() as f64;
        let sd = (draws as f64 * 0.9 * 0.1).sqrt();
        assert!((first - 0.9 * draws as f64).abs() < 3.0 * sd, "first={first}");
    }

    #[test]
    fn roulette_edge_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        assert!(select_roulette(&[0.3, 0.7], 0, &mut rng).unwrap().is_empty());
        assert!(matches!(select_roulette(&[], 3, &mut rng), Err(Error::EmptyPopulation)));
        assert!(select_roulette(&[0.3, 0.0], 3, &mut rng).is_err());
        // log-space survives total underflow
        let picks = select_roulette_log(&[-1e6, -1e6 - 1e3], 10, &mut rng).unwrap();
        assert!(picks.iter().all(|&p| p == 0));
    }

    #[test]
    fn crossover_keeps_risk_free_gene() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let a = Chromosome {
            genes: vec![0.1, 0.2, 0.3, 0.4],
        };
        let b = Chromosome {
            genes: vec![0.1, 0.5, 0.6, 0.7],
        };
        for _ in 0..100 {
            let (c1, c2) = crossover(&a, &b, &mut rng).unwrap();
            assert_eq!(c1.genes[0], 0.1);
            assert_eq!(c2.genes[0], 0.1);
            // per position the pair of values is preserved
            for i in 0..4 {
                let mut got = [c1.genes[i], c2.genes[i]];
                let mut want = [a.genes[i], b.genes[i]];
                got.sort_by(f64::total_cmp);
                want.sort_by(f64::total_cmp);
                assert_eq!(got, want);
            }
        }
        let (c1, c2) = crossover(&a, &a, &mut rng).unwrap();
        assert_eq!(c1, a);
        assert_eq!(c2, a);
    }

    #[test]
    fn swap_and_replace_mutations() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let c = Chromosome {
            genes: vec![0.1, 0.2, 0.3, 0.4, 0.0],
        };
        let mut seen_swap = false;
        let mut seen_replace = false;
        for _ in 0..200 {
            let (m, kind) = mutate(&c, 0.9, &mut rng);
            assert_eq!(m.genes[0], 0.1);
            match kind {
                MutationKind::Swap(i, j) => {
                    seen_swap = true;
                    assert_ne!(i, j);
                    let mut before: Vec<f64> = c.genes[1..].to_vec();
                    let mut after: Vec<f64> = m.genes[1..].to_vec();
                    before.sort_by(f64::total_cmp);
                    after.sort_by(f64::total_cmp);
                    assert_eq!(before, after);
                }
                MutationKind::Replace(i) => {
                    seen_replace = true;
                    assert!((0.0..=0.9).contains(&m.genes[i]));
                }
            }
        }
        assert!(seen_swap && seen_replace);
    }
}
