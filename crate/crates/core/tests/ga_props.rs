use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use uncertain_rebalance::ga::{crossover, evolve, mutate, repair, CardinalityRule, Chromosome, GaParams, RepairMode};
use uncertain_rebalance::presets::{extended_universe, level_assets, small_instance, standard_market};
use uncertain_rebalance::{AssetSpec, ModelConfig, PortfolioWeights, RebalanceProblem};

fn problem(h: usize, caps: Option<f64>) -> RebalanceProblem {
    let mut specs: Vec<AssetSpec> = level_assets(1, 10).unwrap();
    if let Some(u) = caps {
        for s in specs.iter_mut().skip(1) {
            s.upper = u;
        }
    }
    let config = ModelConfig {
        max_assets: h,
        ..ModelConfig::default()
    };
    RebalanceProblem::new(
        specs,
        config,
        standard_market(3.0),
        PortfolioWeights::all_risk_free(10),
        999,
    )
    .unwrap()
}

fn assert_repaired(c: &Chromosome, p: &RebalanceProblem, mode: RepairMode) {
    let e = p.exposure();
    assert_eq!(c.genes[0], 1.0 - e);
    assert!(c.genes.iter().all(|&g| g >= 0.0));
    assert!(c.genes[1..].iter().filter(|&&g| g > 0.0).count() <= p.max_assets());
    for (g, s) in c.genes.iter().zip(&p.specs).skip(1) {
        assert!(*g <= s.upper + 1e-12);
    }
    let risky: f64 = c.genes[1..].iter().sum();
    match mode {
        RepairMode::CostConsistent => assert!((risky + p.cost(&c.genes) - e).abs() <= 1e-9),
        RepairMode::ExposureOnly => assert!((risky - e).abs() <= 1e-9),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn repair_restores_every_invariant(
        genes in prop::collection::vec(-0.5f64..2.0, 11),
        h in 1usize..=10,
        cap in prop_oneof![Just(None), (0.3f64..1.0).prop_map(Some)],
        seed: u64,
        exact: bool,
        keep_max: bool,
    ) {
        let p = problem(h, cap);
        let mode = if exact { RepairMode::ExposureOnly } else { RepairMode::CostConsistent };
        let rule = if keep_max { CardinalityRule::KeepMax } else { CardinalityRule::RandomCount };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        match repair(&Chromosome { genes }, &p, mode, rule, &mut rng) {
            Ok(c) => assert_repaired(&c, &p, mode),
            Err(e) => prop_assert!(cap.is_some(), "unexpected {e}"),
        }
    }

    #[test]
    fn operators_then_repair_stay_feasible(seed: u64) {
        let p = problem(4, None);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let raw = |rng: &mut ChaCha8Rng| {
            let genes = (0..11).map(|_| rand::Rng::random::<f64>(rng)).collect();
            repair(&Chromosome { genes }, &p, RepairMode::CostConsistent, CardinalityRule::RandomCount, rng).unwrap()
        };
        let a = raw(&mut rng);
        let b = raw(&mut rng);
        let (c, d) = crossover(&a, &b, &mut rng).unwrap();
        prop_assert_eq!(c.genes[0], a.genes[0]);
        prop_assert_eq!(d.genes[0], b.genes[0]);
        let (m, _) = mutate(&c, p.exposure(), &mut rng);
        for x in [c, d, m] {
            let r = repair(&x, &p, RepairMode::CostConsistent, CardinalityRule::RandomCount, &mut rng).unwrap();
            assert_repaired(&r, &p, RepairMode::CostConsistent);
        }
    }
}

#[test]
fn runs_are_deterministic_per_seed() {
    let p = problem(10, None).with_min_return(0.01).unwrap();
    let params = GaParams {
        generations: 60,
        ..GaParams::default().with_seed(17)
    };
    let a = evolve(&params, &p).unwrap();
    let b = evolve(&params, &p).unwrap();
    assert_eq!(a, b);
    let c = evolve(&params.clone().with_seed(18), &p).unwrap();
    assert_ne!(a.fitness_trace, c.fitness_trace);
}

#[test]
fn best_so_far_traces_are_monotone() {
    let inst = small_instance();
    let small = RebalanceProblem::new(inst.specs, inst.config, inst.market, inst.before, 999).unwrap();
    let wide = RebalanceProblem::new(
        extended_universe(10, 3),
        ModelConfig::default(),
        standard_market(3.0),
        PortfolioWeights::all_risk_free(20),
        999,
    )
    .unwrap();
    for p in [small, wide] {
        for seed in 0..3 {
            let r = evolve(&GaParams::default().with_seed(seed), &p).unwrap();
            assert!(r.fitness_trace.windows(2).all(|w| w[1] >= w[0]));
            assert!(r.fitness_trace.iter().all(|&f| f > 0.0 && f <= 1.0));
            let risks: Vec<f64> = r.feasible_risk_trace.iter().flatten().copied().collect();
            assert!(risks.windows(2).all(|w| w[1] <= w[0]));
            if let Some(s) = &r.best_feasible {
                assert!(
                    p.check(&s.weights).unwrap().is_feasible(),
                    "{}",
                    p.check(&s.weights).unwrap()
                );
            }
        }
    }
}
