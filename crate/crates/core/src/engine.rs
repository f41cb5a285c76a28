//! Distributed population switching evolutionary algorithm.
//!
//! A single main population is periodically dissolved into pseudo-populations
//! (clusters) that evolve on regression-estimated fitness, at no evaluation
//! cost, and then merged back and re-scored with resampled true fitness.
//!
//! One switching cycle:
//!
//! 1. one generation of the main population on resampled fitness,
//! 2. greedy best-first clustering into pseudo-populations,
//! 3. eligibility by cluster size and best fitness,
//! 4. `t_switch` generations of every eligible cluster on its local model,
//!    with non-eligible clusters frozen,
//! 5. merge, replacing clusters idle for `staleness_limit` cycles, and
//!    resample.

use serde::{Deserialize, Serialize};

use crate::benchmark::{Bounds, NoiseModel, Objective};
use crate::error::{Error, Result};
use crate::evaluator::{Evaluator, NOISE_STREAM};
use crate::ga::{evolve_generation, evolve_generation_with, ranking, FitnessSource, GaParams, Individual};
use crate::outcome::{CycleTrace, RunResult};
use crate::regression::{self, fit, select_kind_with, ModelKind, RegressionModel};
use crate::stochastics::RngState;

/// Regression settings (config namespace `regression`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RegressionParams {
    pub lambda: f64,
    /// Diagonal quadratic models need `factor * (D + 1)` samples.
    pub quadratic_min_samples_factor: f64,
}

impl Default for RegressionParams {
    fn default() -> Self {
        Self { lambda: regression::DEFAULT_LAMBDA, quadratic_min_samples_factor: regression::DEFAULT_QUADRATIC_FACTOR }
    }
}

/// DPSEA settings (config namespace `dpsea`). The evaluation cap and the
/// regression settings come from the experiment level and are not read
/// from the `dpsea` section.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DpseaParams {
    pub ga: GaParams,
    /// Pseudo-population generations between merges.
    pub t_switch: usize,
    pub max_clusters: usize,
    /// Cluster radius as a fraction of the domain diagonal.
    pub radius_fraction: f64,
    /// Fraction of clusters, ranked by best fitness, granted evolution right.
    pub kappa: f64,
    /// Minimum size of an eligible cluster.
    pub s_min: usize,
    /// Idle cycles after which a non-eligible cluster is replaced.
    pub staleness_limit: u32,
    /// Resampling count for true evaluations.
    pub rs_merge: usize,
    #[serde(skip)]
    pub max_total_eval: u64,
    #[serde(skip)]
    pub regression: RegressionParams,
}

impl Default for DpseaParams {
    fn default() -> Self {
        Self {
            ga: GaParams::default(),
            t_switch: 10,
            max_clusters: 10,
            radius_fraction: 0.1,
            kappa: 0.5,
            s_min: 5,
            staleness_limit: 2,
            rs_merge: 1,
            max_total_eval: 90_000,
            regression: RegressionParams::default(),
        }
    }
}

impl DpseaParams {
    pub fn validate(&self) -> Result<()> {
        self.ga.validate()?;
        let fail = |msg: String| Err(Error::Config(msg));
        if self.t_switch == 0 {
            return fail("dpsea.t_switch must be at least 1".into());
        }
        if self.max_clusters == 0 {
            return fail("dpsea.max_clusters must be at least 1".into());
        }
        if !(self.radius_fraction > 0.0 && self.radius_fraction <= 1.0) {
            return fail(format!("dpsea.radius_fraction = {} is not in (0, 1]", self.radius_fraction));
        }
        if !(self.kappa > 0.0 && self.kappa <= 1.0) {
            return fail(format!("dpsea.kappa = {} is not in (0, 1]", self.kappa));
        }
        if self.s_min == 0 || self.s_min > self.ga.pop_size {
            return fail(format!("dpsea.s_min = {} must be in 1..={}", self.s_min, self.ga.pop_size));
        }
        if self.staleness_limit == 0 {
            return fail("dpsea.staleness_limit must be at least 1".into());
        }
        if self.rs_merge == 0 {
            return fail("dpsea.rs_merge must be at least 1".into());
        }
        if !(self.regression.lambda >= 0.0 && self.regression.lambda.is_finite()) {
            return fail(format!("regression.lambda = {} must be finite and nonnegative", self.regression.lambda));
        }
        if !(self.regression.quadratic_min_samples_factor > 0.0) {
            return fail("regression.quadratic_min_samples_factor must be positive".into());
        }
        Ok(())
    }
}

/// A self-organized cluster of the population.
#[derive(Debug, Clone, PartialEq)]
pub struct PseudoPopulation {
    pub members: Vec<Individual>,
    /// Population index of the founding member.
    pub seed_index: usize,
    pub centroid: Vec<f64>,
    pub eligible: bool,
    pub staleness: u32,
    pub model: Option<RegressionModel>,
    /// `(genome, resampled true fitness)` of the members at formation.
    pub archive: Vec<(Vec<f64>, f64)>,
}

impl PseudoPopulation {
    fn from_members(members: Vec<Individual>, seed_index: usize) -> Self {
        let archive = members.iter().filter_map(|m| m.sample.map(|s| (m.genome.clone(), s))).collect();
        let staleness = members.iter().map(|m| m.idle_cycles).max().unwrap_or(0);
        let mut cluster =
            Self { members, seed_index, centroid: Vec::new(), eligible: false, staleness, model: None, archive };
        cluster.update_centroid();
        cluster
    }

    fn update_centroid(&mut self) {
        let d = self.members[0].genome.len();
        let n = self.members.len() as f64;
        let mut c = vec![0.0; d];
        for m in &self.members {
            for (ci, g) in c.iter_mut().zip(&m.genome) {
                *ci += g;
            }
        }
        c.iter_mut().for_each(|v| *v /= n);
        self.centroid = c;
    }

    /// Lowest working fitness among the members.
    pub fn best_fitness(&self) -> f64 {
        self.members.iter().map(|m| m.fitness).fold(f64::INFINITY, f64::min)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Greedy best-first clustering.
///
/// The best unassigned individual founds a cluster and claims every
/// unassigned individual within `radius_fraction` of the domain diagonal.
/// After `max_clusters` seeds the remaining individuals join the nearest
/// seed. Members keep population order. Each cluster's archive holds the
/// true samples its members carry.
pub fn self_organize(pop: &[Individual], bounds: &Bounds, params: &DpseaParams) -> Result<Vec<PseudoPopulation>> {
    self_organize_with_samples(pop, &[], bounds, params)
}

/// [`self_organize`] with extra `(genome, sample)` pairs routed into the
/// archive of the cluster that would own the genome.
pub fn self_organize_with_samples(
    pop: &[Individual],
    extra: &[(Vec<f64>, f64)],
    bounds: &Bounds,
    params: &DpseaParams,
) -> Result<Vec<PseudoPopulation>> {
    if pop.is_empty() {
        return Err(Error::State("cannot organize an empty population".into()));
    }
    let dimension = pop[0].genome.len();
    let radius = params.radius_fraction * bounds.diagonal(dimension);
    let mut owner: Vec<Option<usize>> = vec![None; pop.len()];
    let mut seeds: Vec<usize> = Vec::new();

    for i in ranking(pop) {
        if owner[i].is_some() {
            continue;
        }
        if seeds.len() == params.max_clusters {
            break;
        }
        let cluster = seeds.len();
        seeds.push(i);
        owner[i] = Some(cluster);
        for j in 0..pop.len() {
            if owner[j].is_none() && distance(&pop[j].genome, &pop[i].genome) <= radius {
                owner[j] = Some(cluster);
            }
        }
    }

    // First seed within the radius, otherwise the nearest seed.
    let assign = |x: &[f64]| -> usize {
        let dists: Vec<f64> = seeds.iter().map(|&s| distance(x, &pop[s].genome)).collect();
        if let Some(c) = dists.iter().position(|&d| d <= radius) {
            return c;
        }
        (0..seeds.len())
            .min_by(|&a, &b| dists[a].total_cmp(&dists[b]).then(seeds[a].cmp(&seeds[b])))
            .expect("at least one seed")
    };

    let mut groups: Vec<Vec<Individual>> = vec![Vec::new(); seeds.len()];
    for (j, o) in owner.iter().enumerate() {
        let c = o.unwrap_or_else(|| assign(&pop[j].genome));
        groups[c].push(pop[j].clone());
    }
    let mut clusters: Vec<PseudoPopulation> = groups
        .into_iter()
        .zip(seeds.iter().copied())
        .map(|(members, seed)| PseudoPopulation::from_members(members, seed))
        .collect();
    for (x, y) in extra {
        clusters[assign(x)].archive.push((x.clone(), *y));
    }
    Ok(clusters)
}

/// Grants evolution right to clusters with at least `s_min` members whose
/// best fitness ranks in the top `ceil(kappa * clusters)`. Eligible clusters
/// reset their staleness, the others age by one cycle.
pub fn assess_eligibility(clusters: &mut [PseudoPopulation], params: &DpseaParams) {
    let mut order: Vec<usize> = (0..clusters.len()).collect();
    let bests: Vec<f64> = clusters.iter().map(PseudoPopulation::best_fitness).collect();
    order.sort_by(|&a, &b| bests[a].total_cmp(&bests[b]).then(clusters[a].seed_index.cmp(&clusters[b].seed_index)));
    let quota = (params.kappa * clusters.len() as f64).ceil() as usize;
    let mut rank = vec![0; clusters.len()];
    for (r, &c) in order.iter().enumerate() {
        rank[c] = r;
    }
    for (c, cluster) in clusters.iter_mut().enumerate() {
        cluster.eligible = cluster.len() >= params.s_min && rank[c] < quota;
        if cluster.eligible {
            cluster.staleness = 0;
        } else {
            cluster.staleness += 1;
            cluster.model = None;
        }
    }
}

/// Per-gene mutation rate for an individual at `rank_fraction` (0 = best,
/// 1 = worst) of a cluster with `cluster_size` members:
/// `p_m * (0.5 + rank_fraction) * sqrt(s_min / cluster_size)`, clamped to
/// `[0.05, 1]`.
pub fn adaptive_mutation_rate(rank_fraction: f64, cluster_size: usize, params: &DpseaParams) -> f64 {
    let size_factor = (params.s_min as f64 / cluster_size.max(1) as f64).sqrt();
    (params.ga.p_m * (0.5 + rank_fraction) * size_factor).clamp(0.05, 1.0)
}

/// Elites a cluster keeps: the main population's elite share, at least one.
fn cluster_elites(size: usize, params: &DpseaParams) -> usize {
    let share = params.ga.n_elites as f64 * size as f64 / params.ga.pop_size as f64;
    (share.round() as usize).clamp(1, size - 1)
}

fn fit_cluster_model(cluster: &PseudoPopulation, params: &DpseaParams) -> Result<RegressionModel> {
    let lambda = params.regression.lambda;
    if cluster.archive.is_empty() {
        let xs: Vec<&[f64]> = cluster.members.iter().map(|m| m.genome.as_slice()).collect();
        let ys: Vec<f64> = cluster.members.iter().map(|m| m.fitness).collect();
        return fit(&xs, &ys, ModelKind::Constant, lambda);
    }
    let dimension = cluster.archive[0].0.len();
    let kind = select_kind_with(cluster.archive.len(), dimension, params.regression.quadratic_min_samples_factor);
    let xs: Vec<&[f64]> = cluster.archive.iter().map(|(x, _)| x.as_slice()).collect();
    let ys: Vec<f64> = cluster.archive.iter().map(|(_, y)| *y).collect();
    fit(&xs, &ys, kind, lambda)
}

/// One generation of an eligible cluster on its local regression model.
///
/// The model is fitted from the archive on first use; from then on the
/// members' working fitness is the model's estimate. No true evaluations are
/// made.
pub fn evolve_pseudo(
    cluster: &mut PseudoPopulation,
    bounds: &Bounds,
    params: &DpseaParams,
    rng: &mut RngState,
) -> Result<()> {
    if !cluster.eligible {
        return Err(Error::State(format!("cluster seeded at {} has no evolution right", cluster.seed_index)));
    }
    if cluster.model.is_none() {
        let model = fit_cluster_model(cluster, params)?;
        for m in cluster.members.iter_mut() {
            let estimate = model.predict(&m.genome)?;
            m.set_estimated(estimate);
        }
        cluster.model = Some(model);
    }
    let size = cluster.len();
    if size < 2 {
        return Ok(());
    }
    let model = cluster.model.as_ref().expect("model fitted above");

    let order = ranking(&cluster.members);
    let mut rate = vec![0.0; size];
    for (r, &i) in order.iter().enumerate() {
        rate[i] = adaptive_mutation_rate(r as f64 / (size - 1) as f64, size, params);
    }
    let ga = GaParams { pop_size: size, n_elites: cluster_elites(size, params), ..params.ga };
    cluster.members = evolve_generation_with(
        &cluster.members,
        |x| model.predict(x),
        &ga,
        bounds,
        &|i| rate[i],
        FitnessSource::Estimated,
        rng,
    )?;
    cluster.update_centroid();
    Ok(())
}

/// Merges the clusters back into one population of `ga.pop_size` and
/// re-scores it with resampled true fitness.
///
/// Clusters idle for `staleness_limit` cycles are replaced by random
/// individuals and the population is topped up with random individuals.
/// Up to `ga.n_elites` members whose genome still carries a true sample keep
/// it without re-evaluation.
pub fn merge_and_resample<O: Objective + ?Sized>(
    clusters: Vec<PseudoPopulation>,
    eval: &mut Evaluator<'_, O>,
    params: &DpseaParams,
    rng: &mut RngState,
) -> Result<Vec<Individual>> {
    let dimension = eval.objective.dimension();
    let bounds = eval.objective.bounds();
    let pop_size = params.ga.pop_size;
    let total: usize = clusters.iter().map(PseudoPopulation::len).sum();
    if total > pop_size {
        return Err(Error::State(format!("clusters hold {total} members, population size is {pop_size}")));
    }

    let mut pop = Vec::with_capacity(pop_size);
    for cluster in clusters {
        if cluster.staleness >= params.staleness_limit {
            pop.extend((0..cluster.len()).map(|_| Individual::random(dimension, &bounds, rng)));
        } else {
            pop.extend(cluster.members.into_iter().map(|mut m| {
                m.idle_cycles = cluster.staleness;
                m
            }));
        }
    }
    while pop.len() < pop_size {
        pop.push(Individual::random(dimension, &bounds, rng));
    }

    let mut carried: Vec<usize> = (0..pop.len()).filter(|&i| pop[i].sample.is_some()).collect();
    carried.sort_by(|&a, &b| pop[a].sample.unwrap().total_cmp(&pop[b].sample.unwrap()).then(a.cmp(&b)));
    carried.truncate(params.ga.n_elites);
    let mut keep = vec![false; pop.len()];
    for &i in &carried {
        keep[i] = true;
    }
    eval.budget.total_it += 1;
    for (i, m) in pop.iter_mut().enumerate() {
        if keep[i] {
            let sample = m.sample.expect("carried members hold a sample");
            m.set_sampled(sample);
            m.unchanged = true;
        } else {
            let value = eval.evaluate(&m.genome)?;
            m.set_sampled(value);
            m.unchanged = false;
        }
    }
    eval.budget.carry_over(carried.len());
    Ok(pop)
}

/// Runs DPSEA until `max_total_eval` true evaluations are spent.
///
/// The initial population is always evaluated in full; afterwards no
/// evaluation is made that would pass the cap, so the run may stop in the
/// middle of a cycle.
pub fn run<O: Objective + ?Sized>(
    objective: &O,
    noise: &NoiseModel,
    params: &DpseaParams,
    rng: &mut RngState,
) -> Result<RunResult> {
    params.validate()?;
    let bounds = objective.bounds();
    let dimension = objective.dimension();
    let pop_size = params.ga.pop_size;
    let noise_rng = rng.split(NOISE_STREAM);
    let mut eval = Evaluator::new(objective, *noise, noise_rng, pop_size, params.rs_merge, params.max_total_eval);

    let mut pop: Vec<Individual> = (0..pop_size).map(|_| Individual::random(dimension, &bounds, rng)).collect();
    for m in pop.iter_mut() {
        let value = eval.evaluate_uncapped(&m.genome)?;
        m.set_sampled(value);
    }
    eval.budget.total_it = 1;

    let mut trace = Vec::new();
    let mut cycle = 0;
    while eval.budget.total_eval < params.max_total_eval {
        match step(pop, &mut eval, &bounds, params, rng) {
            Ok((next, clusters, eligible)) => {
                pop = next;
                trace.push(CycleTrace {
                    cycle,
                    total_eval: eval.budget.total_eval,
                    best_true_fitness: eval.best.value(),
                    clusters,
                    eligible,
                });
                cycle += 1;
            }
            Err(Error::BudgetExhausted { .. }) => break,
            Err(e) => return Err(e),
        }
    }
    Ok(eval.best.into_result(eval.budget, trace))
}

/// One switching cycle. Returns the merged population and the cluster and
/// eligible counts.
fn step<O: Objective + ?Sized>(
    pop: Vec<Individual>,
    eval: &mut Evaluator<'_, O>,
    bounds: &Bounds,
    params: &DpseaParams,
    rng: &mut RngState,
) -> Result<(Vec<Individual>, usize, usize)> {
    let main = evolve_generation(&pop, |x| eval.evaluate(x), &params.ga, bounds, rng)?;
    eval.budget.total_it += 1;
    eval.budget.carry_over(params.ga.n_elites);

    // Samples of the merged population that did not survive the main
    // generation still describe the landscape; route them to the archives.
    let survivors: Vec<&[f64]> = main.iter().filter(|m| m.unchanged).map(|m| m.genome.as_slice()).collect();
    let extra: Vec<(Vec<f64>, f64)> = pop
        .into_iter()
        .filter(|m| !survivors.contains(&m.genome.as_slice()))
        .filter_map(|m| m.sample.map(|s| (m.genome, s)))
        .collect();
    let mut clusters = self_organize_with_samples(&main, &extra, bounds, params)?;
    assess_eligibility(&mut clusters, params);
    let eligible = clusters.iter().filter(|c| c.eligible).count();
    for _ in 0..params.t_switch {
        for cluster in clusters.iter_mut().filter(|c| c.eligible) {
            evolve_pseudo(cluster, bounds, params, rng)?;
        }
    }
    let count = clusters.len();
    let merged = merge_and_resample(clusters, eval, params, rng)?;
    Ok((merged, count, eligible))
}
