//! Fixed-budget baselines: evaluation accounting and basic behaviour.

mod common;

use common::Counting;
use dpsea::baselines::{run_cga, run_de, run_pso, total_iterations, CgaConfig, DeConfig, PsoConfig};
use dpsea::benchmark::{BenchmarkFunction, FunctionId, NoiseModel};
use dpsea::ga::GaParams;
use dpsea::stochastics::RngState;
use proptest::prelude::*;

fn counting(id: FunctionId, d: usize) -> Counting<BenchmarkFunction> {
    Counting::new(BenchmarkFunction::with_dimension(id, d))
}

#[test]
fn fixed_budget_schedule() {
    assert_eq!(total_iterations(100_000, 100, 5).unwrap(), 200);
    assert_eq!(total_iterations(100_000, 100, 100).unwrap(), 10);
    assert!(total_iterations(99, 100, 1).is_err());
}

#[test]
fn cga_counts_match_eq7_by_hand() {
    // 100 individuals, rs = 5, 100,000 evaluations: 200 passes; the first is
    // a full evaluation, each later one skips 10 elites.
    let f = counting(FunctionId::Sphere, 5);
    let cfg = CgaConfig::new(5, 100_000);
    let r = run_cga(&f, &NoiseModel::default(), &cfg, &mut RngState::new(1)).unwrap();
    assert_eq!(r.budget.total_it, 200);
    assert_eq!(r.budget.total_unchanged, 199 * 10 * 5);
    assert_eq!(r.budget.total_eval, 100 * 200 * 5 - 199 * 10 * 5);
    assert_eq!(r.budget.total_eval, f.calls.get());
    assert!(r.budget.identity_holds());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn identity_holds_for_every_baseline(
        algo in 0usize..3,
        rs in 1usize..6,
        passes in 1u64..12,
        sigma in 0.0f64..2.0,
        seed in any::<u64>(),
    ) {
        let f = counting(FunctionId::Rosenbrock, 6);
        let noise = NoiseModel::with_sigma(sigma).unwrap();
        let mut rng = RngState::new(seed);
        let r = match algo {
            0 => {
                let ga = GaParams { pop_size: 20, n_elites: 3, ..GaParams::default() };
                run_cga(&f, &noise, &CgaConfig { ga, rs, total_eval: passes * 20 * rs as u64 }, &mut rng).unwrap()
            }
            1 => run_de(&f, &noise, &DeConfig::new(rs, passes * 50 * rs as u64), &mut rng).unwrap(),
            _ => run_pso(&f, &noise, &PsoConfig::new(rs, passes * 20 * rs as u64), &mut rng).unwrap(),
        };
        prop_assert!(r.budget.identity_holds(), "{:?}", r.budget);
        prop_assert_eq!(r.budget.total_eval, f.calls.get());
        prop_assert_eq!(r.budget.total_it, passes);
        prop_assert!(r.best_true_fitness >= 0.0);
    }
}

#[test]
fn noiseless_baselines_make_progress() {
    let f = BenchmarkFunction::new(FunctionId::Sphere);
    let noise = NoiseModel::noiseless();
    let start = 5.0 * 100.0f64.powi(2) / 3.0; // mean of a uniform start
    for (name, best) in [
        ("cga", run_cga(&f, &noise, &CgaConfig::new(1, 20_000), &mut RngState::new(2)).unwrap().best_true_fitness),
        ("de", run_de(&f, &noise, &DeConfig::new(1, 20_000), &mut RngState::new(2)).unwrap().best_true_fitness),
        ("pso", run_pso(&f, &noise, &PsoConfig::new(1, 20_000), &mut RngState::new(2)).unwrap().best_true_fitness),
    ] {
        assert!(best < start * 1e-4, "{name}: {best}");
    }
}

#[test]
fn baselines_are_deterministic() {
    let f = BenchmarkFunction::new(FunctionId::Griewank);
    let noise = NoiseModel::default();
    let de = DeConfig::new(2, 10_000);
    let a = run_de(&f, &noise, &de, &mut RngState::new(8)).unwrap();
    let b = run_de(&f, &noise, &de, &mut RngState::new(8)).unwrap();
    assert_eq!(a.best_genome, b.best_genome);
    let pso = PsoConfig::new(1, 10_000);
    let a = run_pso(&f, &noise, &pso, &mut RngState::new(8)).unwrap();
    let b = run_pso(&f, &noise, &pso, &mut RngState::new(8)).unwrap();
    assert_eq!(a.best_genome, b.best_genome);
}
