//! Genetic algorithm for the epsilon-constrained rebalancing model.
//!
//! A chromosome holds the `n + 1` final weights, gene 0 being the risk-free
//! asset. Every chromosome is repaired after it is created or modified, so
//! the only constraint left to the fitness is the minimum net return, which
//! enters through a large penalty.

mod operators;
mod repair;

pub use operators::{crossover, evaluate, fitness, mutate, select_roulette, select_roulette_log, MutationKind};
pub use repair::{check_caps, repair, CardinalityRule, RepairMode, BUDGET_PASSES, BUDGET_TOL};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{PortfolioWeights, RebalanceProblem};

#[derive(Debug, Clone, PartialEq)]
pub struct Chromosome {
    pub genes: Vec<f64>,
}

impl Chromosome {
    pub fn to_weights(&self) -> PortfolioWeights {
        PortfolioWeights::new(self.genes.clone()).expect("repaired genes are nonnegative")
    }
}

/// A chromosome together with its scores.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluated {
    pub chromosome: Chromosome,
    pub risk: f64,
    pub net_return: f64,
    pub penalty: f64,
    pub objective: f64,
}

impl Evaluated {
    pub fn fitness(&self, scale: f64) -> f64 {
        (-scale * self.objective).exp().max(f64::MIN_POSITIVE)
    }

    pub fn is_penalty_free(&self) -> bool {
        self.penalty == 0.0
    }

    fn solution(&self) -> Solution {
        Solution {
            weights: self.chromosome.to_weights(),
            risk: self.risk,
            net_return: self.net_return,
            penalty: self.penalty,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub weights: PortfolioWeights,
    pub risk: f64,
    pub net_return: f64,
    pub penalty: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaParams {
    pub population_size: usize,
    pub crossover_rate: f64,
    pub mutation_rate: f64,
    /// `k` in `exp(-k (risk + M p))`.
    pub fitness_scale: f64,
    /// `M` in `exp(-k (risk + M p))`.
    pub penalty_weight: f64,
    pub generations: usize,
    pub seed: u64,
    pub repair_mode: RepairMode,
    pub cardinality_rule: CardinalityRule,
    /// Stop after this many generations without a better best objective.
    pub stall_window: usize,
    /// Place the repaired pre-rebalance portfolio in the initial population.
    pub seed_with_before: bool,
    /// Place every single-asset portfolio in the initial population.
    pub seed_with_corners: bool,
}

impl Default for GaParams {
    fn default() -> Self {
        Self {
            population_size: 100,
            crossover_rate: 0.7,
            mutation_rate: 0.2,
            fitness_scale: 10.0,
            penalty_weight: 1e6,
            generations: 500,
            seed: 0,
            repair_mode: RepairMode::CostConsistent,
            cardinality_rule: CardinalityRule::RandomCount,
            stall_window: 100,
            seed_with_before: true,
            seed_with_corners: true,
        }
    }
}

impl GaParams {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Elitism rate `1 - p_c - p_m`.
    pub fn elitism_rate(&self) -> f64 {
        1.0 - self.crossover_rate - self.mutation_rate
    }

    pub fn validate(&self) -> Result<()> {
        if self.population_size < 2 {
            return Err(Error::param("population_size must be at least 2"));
        }
        for (name, v) in [
            ("crossover_rate", self.crossover_rate),
            ("mutation_rate", self.mutation_rate),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::param(format!("{name} must lie in [0, 1], got {v}")));
            }
        }
        if self.elitism_rate() < -1e-12 {
            return Err(Error::param(format!(
                "crossover_rate + mutation_rate must not exceed 1 (got {} + {})",
                self.crossover_rate, self.mutation_rate
            )));
        }
        if !(self.fitness_scale > 0.0) {
            return Err(Error::param("fitness_scale must be positive"));
        }
        if !(self.penalty_weight > 0.0) {
            return Err(Error::param("penalty_weight must be positive"));
        }
        if self.generations == 0 {
            return Err(Error::param("generations must be at least 1"));
        }
        if self.stall_window == 0 {
            return Err(Error::param("stall_window must be at least 1"));
        }
        Ok(())
    }

    /// Sizes of the elite, crossover and mutation shares of a generation.
    pub fn shares(&self) -> (usize, usize, usize) {
        let n = self.population_size;
        let elites = ((self.elitism_rate().max(0.0) * n as f64 - 1e-9).ceil() as usize).clamp(1, n);
        let cross = ((self.crossover_rate * n as f64 - 1e-9).ceil() as usize).min(n - elites);
        (elites, cross, n - elites - cross)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaResult {
    /// Best chromosome by fitness.
    pub best: Solution,
    /// Best penalty-free chromosome, if any was found.
    pub best_feasible: Option<Solution>,
    pub fitness_trace: Vec<f64>,
    pub objective_trace: Vec<f64>,
    /// Lowest penalty-free risk seen so far, per generation.
    pub feasible_risk_trace: Vec<Option<f64>>,
    pub evaluations: usize,
    pub generations_run: usize,
}

impl GaResult {
    pub fn best_weights(&self) -> &PortfolioWeights {
        &self.best.weights
    }

    pub fn best_risk(&self) -> f64 {
        self.best.risk
    }

    pub fn best_return_net(&self) -> f64 {
        self.best.net_return
    }
}

fn draw_chromosome<R: Rng + ?Sized>(n1: usize, exposure: f64, rng: &mut R) -> Chromosome {
    let mut genes = vec![1.0 - exposure];
    genes.extend((1..n1).map(|_| rng.random::<f64>() * exposure));
    Chromosome { genes }
}

/// Random initial population, every member repaired.
pub fn init_population<R: Rng + ?Sized>(
    params: &GaParams,
    problem: &RebalanceProblem,
    rng: &mut R,
) -> Result<Vec<Chromosome>> {
    let n1 = problem.specs.len();
    let exposure = problem.exposure();
    let mut pop = Vec::with_capacity(params.population_size);
    if params.seed_with_before {
        let start = Chromosome {
            genes: problem.before.as_slice().to_vec(),
        };
        pop.push(repair(
            &start,
            problem,
            params.repair_mode,
            params.cardinality_rule,
            rng,
        )?);
    }
    if params.seed_with_corners {
        for i in 1..n1 {
            if pop.len() * 2 >= params.population_size {
                break;
            }
            let mut genes = vec![0.0; n1];
            genes[0] = 1.0 - exposure;
            genes[i] = exposure;
            pop.push(repair(
                &Chromosome { genes },
                problem,
                params.repair_mode,
                params.cardinality_rule,
                rng,
            )?);
        }
    }
    while pop.len() < params.population_size {
        let raw = draw_chromosome(n1, exposure, rng);
        pop.push(repair(&raw, problem, params.repair_mode, params.cardinality_rule, rng)?);
    }
    Ok(pop)
}

fn best_index(pop: &[Evaluated]) -> usize {
    let mut best = 0;
    for (i, e) in pop.iter().enumerate() {
        if e.objective < pop[best].objective {
            best = i;
        }
    }
    best
}

struct Tracker {
    best: Evaluated,
    best_feasible: Option<Evaluated>,
}

impl Tracker {
    fn observe(&mut self, pop: &[Evaluated]) -> bool {
        let mut improved = false;
        let i = best_index(pop);
        if pop[i].objective < self.best.objective {
            self.best = pop[i].clone();
            improved = true;
        }
        for e in pop.iter().filter(|e| e.is_penalty_free()) {
            if self.best_feasible.as_ref().is_none_or(|b| e.risk < b.risk) {
                self.best_feasible = Some(e.clone());
            }
        }
        improved
    }
}

/// Runs the generational loop and returns the best chromosome ever seen.
pub fn evolve(params: &GaParams, problem: &RebalanceProblem) -> Result<GaResult> {
    params.validate()?;
    problem.config.validate()?;
    check_caps(problem)?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let exposure = problem.exposure();
    let (n_elite, n_cross, n_mut) = params.shares();
    let scale = params.fitness_scale;
    let repair_with =
        |c: &Chromosome, rng: &mut ChaCha8Rng| repair(c, problem, params.repair_mode, params.cardinality_rule, rng);

    let mut pop: Vec<Evaluated> = init_population(params, problem, &mut rng)?
        .into_iter()
        .map(|c| evaluate(c, problem, params))
        .collect();
    let mut evaluations = pop.len();

    let first = pop[best_index(&pop)].clone();
    let mut tracker = Tracker {
        best: first,
        best_feasible: None,
    };
    tracker.observe(&pop);
    let mut fitness_trace = vec![tracker.best.fitness(scale)];
    let mut objective_trace = vec![tracker.best.objective];
    let mut feasible_risk_trace = vec![tracker.best_feasible.as_ref().map(|e| e.risk)];
    let mut stall = 0;
    let mut generations_run = 0;

    for _ in 0..params.generations {
        let mut order: Vec<usize> = (0..pop.len()).collect();
        order.sort_by(|&a, &b| pop[a].objective.total_cmp(&pop[b].objective).then(a.cmp(&b)));
        let mut next: Vec<Evaluated> = order[..n_elite].iter().map(|&i| pop[i].clone()).collect();
        let mut fresh: Vec<Chromosome> = Vec::with_capacity(n_cross + n_mut);

        if n_cross > 0 {
            let logs: Vec<f64> = pop.iter().map(|e| -scale * e.objective).collect();
            let draws = n_cross.div_ceil(2) * 2;
            let parents = select_roulette_log(&logs, draws, &mut rng)?;
            for pair in parents.chunks_exact(2) {
                let (c1, c2) = crossover(&pop[pair[0]].chromosome, &pop[pair[1]].chromosome, &mut rng)?;
                fresh.push(repair_with(&c1, &mut rng)?);
                if fresh.len() < n_cross {
                    fresh.push(repair_with(&c2, &mut rng)?);
                }
            }
        }
        for _ in 0..n_mut {
            let pick = rng.random_range(0..pop.len());
            let (m, _) = mutate(&pop[pick].chromosome, exposure, &mut rng);
            fresh.push(repair_with(&m, &mut rng)?);
        }

        evaluations += fresh.len();
        next.extend(fresh.into_iter().map(|c| evaluate(c, problem, params)));
        pop = next;
        generations_run += 1;

        if tracker.observe(&pop) {
            stall = 0;
        } else {
            stall += 1;
        }
        fitness_trace.push(tracker.best.fitness(scale));
        objective_trace.push(tracker.best.objective);
        feasible_risk_trace.push(tracker.best_feasible.as_ref().map(|e| e.risk));
        if stall >= params.stall_window {
            break;
        }
    }

    Ok(GaResult {
        best: tracker.best.solution(),
        best_feasible: tracker.best_feasible.as_ref().map(Evaluated::solution),
        fitness_trace,
        objective_trace,
        feasible_risk_trace,
        evaluations,
        generations_run,
    })
}

/// Best of `evaluations` independent random chromosomes (same draw and repair
/// as the initial population). Baseline for judging the evolutionary loop.
pub fn random_search(params: &GaParams, problem: &RebalanceProblem, evaluations: usize) -> Result<GaResult> {
    params.validate()?;
    check_caps(problem)?;
    if evaluations == 0 {
        return Err(Error::param("random search needs at least one evaluation"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let n1 = problem.specs.len();
    let exposure = problem.exposure();
    let scale = params.fitness_scale;
    let mut tracker: Option<Tracker> = None;
    let mut fitness_trace = Vec::with_capacity(evaluations);
    let mut objective_trace = Vec::with_capacity(evaluations);
    let mut feasible_risk_trace = Vec::with_capacity(evaluations);
    for _ in 0..evaluations {
        let raw = draw_chromosome(n1, exposure, &mut rng);
        let c = repair(&raw, problem, params.repair_mode, params.cardinality_rule, &mut rng)?;
        let e = evaluate(c, problem, params);
        let t = tracker.get_or_insert_with(|| Tracker {
            best: e.clone(),
            best_feasible: None,
        });
        t.observe(std::slice::from_ref(&e));
        fitness_trace.push(t.best.fitness(scale));
        objective_trace.push(t.best.objective);
        feasible_risk_trace.push(t.best_feasible.as_ref().map(|b| b.risk));
    }
    let t = tracker.expect("at least one evaluation");
    Ok(GaResult {
        best: t.best.solution(),
        best_feasible: t.best_feasible.as_ref().map(Evaluated::solution),
        fitness_trace,
        objective_trace,
        feasible_risk_trace,
        evaluations,
        generations_run: 0,
    })
}
