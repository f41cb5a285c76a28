//! Structural properties of the DPSEA loop, checked with an independent
//! call counter wrapped around the objective.

mod common;

use common::Counting;
use dpsea::benchmark::{BenchmarkFunction, FunctionId, NoiseModel, Objective};
use dpsea::engine::{assess_eligibility, evolve_pseudo, merge_and_resample, run, self_organize, DpseaParams};
use dpsea::error::Error;
use dpsea::evaluator::Evaluator;
use dpsea::ga::{evolve_generation, Individual};
use dpsea::stochastics::RngState;

fn small_params(cap: u64) -> DpseaParams {
    DpseaParams { max_total_eval: cap, ..DpseaParams::default() }
}

#[test]
fn total_eval_matches_counted_calls_and_cap() {
    for (id, sigma, rs, cap) in [
        (FunctionId::Sphere, 1.0, 1, 9_000),
        (FunctionId::Sphere, 0.5, 5, 20_000),
        (FunctionId::Griewank, 0.0, 1, 3_000),
        (FunctionId::Rosenbrock, 1.0, 3, 4_000),
    ] {
        let f = Counting::new(BenchmarkFunction::new(id));
        let params = DpseaParams { rs_merge: rs, ..small_params(cap) };
        let result = run(&f, &NoiseModel::with_sigma(sigma).unwrap(), &params, &mut RngState::new(5)).unwrap();
        assert_eq!(result.budget.total_eval, f.calls.get(), "{id}");
        assert!(result.budget.total_eval <= cap, "{id}");
        // The run goes on until fewer than rs evaluations remain or a whole
        // main generation no longer fits.
        assert!(result.budget.total_eval + params.ga.pop_size as u64 * rs as u64 > cap, "{id}");
        for w in result.trace.windows(2) {
            assert!(w[1].total_eval > w[0].total_eval);
        }
    }
}

#[test]
fn zero_budget_returns_initial_population_best() {
    let f = Counting::new(BenchmarkFunction::new(FunctionId::Sphere));
    let result = run(&f, &NoiseModel::default(), &small_params(0), &mut RngState::new(1)).unwrap();
    assert_eq!(f.calls.get(), 100);
    assert!(result.trace.is_empty());
    assert!(result.best_true_fitness.is_finite());
}

#[test]
fn runs_are_bitwise_deterministic() {
    let f = BenchmarkFunction::new(FunctionId::Griewank);
    let params = small_params(5_000);
    let a = run(&f, &NoiseModel::default(), &params, &mut RngState::new(42)).unwrap();
    let b = run(&f, &NoiseModel::default(), &params, &mut RngState::new(42)).unwrap();
    assert_eq!(a.best_true_fitness.to_bits(), b.best_true_fitness.to_bits());
    assert_eq!(a.best_genome, b.best_genome);
    assert_eq!(a.trace, b.trace);
    assert_eq!(a.budget, b.budget);
    let c = run(&f, &NoiseModel::default(), &params, &mut RngState::new(43)).unwrap();
    assert_ne!(a.best_genome, c.best_genome);
}

#[test]
fn noiseless_best_is_nonincreasing_across_cycles() {
    for id in FunctionId::ALL {
        let f = BenchmarkFunction::with_dimension(id, 5);
        let result = run(&f, &NoiseModel::noiseless(), &small_params(20_000), &mut RngState::new(9)).unwrap();
        for w in result.trace.windows(2) {
            assert!(w[1].best_true_fitness <= w[0].best_true_fitness, "{id}");
        }
        assert_eq!(result.best_true_fitness, f.evaluate(&result.best_genome).unwrap());
    }
}

/// Drives the switching loop by hand and checks every phase.
#[test]
fn cycle_phases_respect_their_contracts() {
    let f = Counting::new(BenchmarkFunction::with_dimension(FunctionId::Rosenbrock, 4));
    let bounds = f.bounds();
    let params = DpseaParams { max_clusters: 6, radius_fraction: 0.05, kappa: 0.5, ..small_params(u64::MAX) };
    let mut rng = RngState::new(17);
    let mut eval = Evaluator::new(&f, NoiseModel::default(), rng.split(99), params.ga.pop_size, 1, u64::MAX);
    let mut pop: Vec<Individual> =
        (0..params.ga.pop_size).map(|_| Individual::random(f.dimension(), &bounds, &mut rng)).collect();
    for m in pop.iter_mut() {
        let v = eval.evaluate(&m.genome).unwrap();
        m.set_sampled(v);
    }
    let mut saw_ineligible = false;
    for _ in 0..40 {
        pop = evolve_generation(&pop, |x| eval.evaluate(x), &params.ga, &bounds, &mut rng).unwrap();
        assert_eq!(pop.len(), params.ga.pop_size);
        let mut clusters = self_organize(&pop, &bounds, &params).unwrap();
        assess_eligibility(&mut clusters, &params);
        for c in &clusters {
            assert!(c.staleness <= params.staleness_limit, "staleness {}", c.staleness);
            if c.eligible {
                assert!(c.len() >= params.s_min);
            }
        }
        saw_ineligible |= clusters.iter().any(|c| !c.eligible);

        let calls = f.calls.get();
        let budget = eval.budget;
        let frozen: Vec<Vec<Vec<f64>>> = clusters
            .iter()
            .filter(|c| !c.eligible)
            .map(|c| c.members.iter().map(|m| m.genome.clone()).collect())
            .collect();
        for _ in 0..params.t_switch {
            for c in clusters.iter_mut().filter(|c| c.eligible) {
                let size = c.len();
                evolve_pseudo(c, &bounds, &params, &mut rng).unwrap();
                assert_eq!(c.len(), size);
                assert!(c.model.is_some());
            }
        }
        assert_eq!(f.calls.get(), calls, "pseudo phase called the objective");
        assert_eq!(eval.budget, budget, "pseudo phase touched the budget");
        let after: Vec<Vec<Vec<f64>>> = clusters
            .iter()
            .filter(|c| !c.eligible)
            .map(|c| c.members.iter().map(|m| m.genome.clone()).collect())
            .collect();
        assert_eq!(frozen, after, "non-eligible clusters must stay frozen");
        if let Some(c) = clusters.iter_mut().find(|c| !c.eligible) {
            assert!(matches!(evolve_pseudo(c, &bounds, &params, &mut rng), Err(Error::State(_))));
        }

        pop = merge_and_resample(clusters, &mut eval, &params, &mut rng).unwrap();
        assert_eq!(pop.len(), params.ga.pop_size);
        assert_eq!(eval.budget.total_eval, f.calls.get());
    }
    assert!(saw_ineligible, "test setup should produce non-eligible clusters");
}

#[test]
fn stale_clusters_are_replaced_at_merge() {
    let f = BenchmarkFunction::new(FunctionId::Sphere);
    let bounds = f.bounds();
    let params = small_params(u64::MAX);
    let mut rng = RngState::new(3);
    let mut pop: Vec<Individual> = (0..100).map(|_| Individual::random(5, &bounds, &mut rng)).collect();
    for m in pop.iter_mut() {
        let v = f.evaluate(&m.genome).unwrap();
        m.set_sampled(v);
    }
    let mut clusters = self_organize(&pop, &bounds, &DpseaParams { radius_fraction: 1.0, ..params }).unwrap();
    assert_eq!(clusters.len(), 1);
    clusters[0].staleness = params.staleness_limit;
    let mut eval = Evaluator::new(&f, NoiseModel::noiseless(), rng.split(1), 100, 1, u64::MAX);
    let merged = merge_and_resample(clusters, &mut eval, &params, &mut rng).unwrap();
    assert_eq!(merged.len(), 100);
    assert!(merged.iter().all(|m| !pop.iter().any(|p| p.genome == m.genome)));
}

#[test]
fn merge_accounting_examples() {
    let f = BenchmarkFunction::new(FunctionId::Sphere);
    let bounds = f.bounds();
    let mut rng = RngState::new(12);
    let mut pop: Vec<Individual> = (0..100).map(|_| Individual::random(5, &bounds, &mut rng)).collect();
    for m in pop.iter_mut() {
        let v = f.evaluate(&m.genome).unwrap();
        m.set_sampled(v);
    }
    let params = DpseaParams { radius_fraction: 1.0, ..small_params(u64::MAX) };
    for (rs, expected) in [(1usize, 90u64), (5, 450)] {
        let clusters = self_organize(&pop, &bounds, &params).unwrap();
        let mut eval = Evaluator::new(&f, NoiseModel::noiseless(), rng.split(2), 100, rs, u64::MAX);
        let merged =
            merge_and_resample(clusters, &mut eval, &DpseaParams { rs_merge: rs, ..params }, &mut rng).unwrap();
        assert_eq!(eval.budget.total_eval, expected);
        assert_eq!(eval.budget.total_unchanged, 10 * rs as u64);
        let mut before: Vec<Vec<f64>> = pop.iter().map(|m| m.genome.clone()).collect();
        let mut after: Vec<Vec<f64>> = merged.iter().map(|m| m.genome.clone()).collect();
        before.sort_by(|a, b| a.partial_cmp(b).unwrap());
        after.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(before, after);
    }
}

#[test]
fn pseudo_phase_on_exact_quadratic_never_worsens_estimated_best() {
    // Archive from a noiseless 3-D bowl, enough points for a diagonal
    // quadratic, so the model is exact.
    let f = BenchmarkFunction::with_dimension(FunctionId::Sphere, 3);
    let bounds = f.bounds();
    let mut rng = RngState::new(21);
    let mut pop: Vec<Individual> =
        (0..40).map(|_| Individual::new((0..3).map(|_| rng.uniform(10.0, 20.0)).collect())).collect();
    for m in pop.iter_mut() {
        let v = f.evaluate(&m.genome).unwrap();
        m.set_sampled(v);
    }
    let params = DpseaParams {
        radius_fraction: 1.0,
        ga: dpsea::ga::GaParams { pop_size: 40, n_elites: 4, ..Default::default() },
        ..small_params(1)
    };
    let mut clusters = self_organize(&pop, &bounds, &params).unwrap();
    assess_eligibility(&mut clusters, &params);
    let cluster = &mut clusters[0];
    assert!(cluster.eligible);
    let mut last = f64::INFINITY;
    for _ in 0..params.t_switch {
        evolve_pseudo(cluster, &bounds, &params, &mut rng).unwrap();
        let best = cluster.best_fitness();
        assert!(best <= last + 1e-9);
        last = best;
        for m in &cluster.members {
            assert!((m.fitness - f.evaluate(&m.genome).unwrap()).abs() < 1e-6 * (1.0 + m.fitness));
        }
    }
}
