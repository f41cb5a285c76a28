//! Real-coded genetic algorithm operators.
//!
//! Selection is a k-way tournament drawn with replacement, recombination is
//! whole arithmetic crossover with one blend factor per pair, and mutation
//! adds Gaussian noise to individual genes and clamps to the box.
//! [`evolve_generation`] strings them together with elitism.

use serde::{Deserialize, Serialize};

use crate::benchmark::Bounds;
use crate::error::{Error, Result};
use crate::stochastics::{gaussian, RngState};

/// A candidate solution.
#[derive(Debug, Clone, PartialEq)]
pub struct Individual {
    pub genome: Vec<f64>,
    /// Working fitness: a resampled true value or a model estimate.
    pub fitness: f64,
    /// `fitness` came from true (possibly noisy) evaluation.
    pub sampled: bool,
    /// Carried over as an elite without re-evaluation.
    pub unchanged: bool,
    /// `fitness` does not describe the current genome.
    pub stale: bool,
    /// Latest resampled true fitness of this exact genome, if any.
    pub sample: Option<f64>,
    /// Consecutive switching cycles spent in a pseudo-population without
    /// evolution right.
    pub idle_cycles: u32,
}

impl Individual {
    /// A fresh, unevaluated individual.
    pub fn new(genome: Vec<f64>) -> Self {
        Self {
            genome,
            fitness: f64::INFINITY,
            sampled: false,
            unchanged: false,
            stale: true,
            sample: None,
            idle_cycles: 0,
        }
    }

    pub fn random(dimension: usize, bounds: &Bounds, rng: &mut RngState) -> Self {
        Self::new((0..dimension).map(|_| rng.uniform(bounds.lower, bounds.upper)).collect())
    }

    /// Stores a resampled true fitness for the current genome.
    pub fn set_sampled(&mut self, value: f64) {
        self.fitness = value;
        self.sampled = true;
        self.stale = false;
        self.sample = Some(value);
    }

    /// Stores a model estimate; any earlier sample of this genome is kept.
    pub fn set_estimated(&mut self, value: f64) {
        self.fitness = value;
        self.sampled = false;
        self.stale = false;
    }
}

/// Canonical GA settings. Defaults are the canonical-GA column of the
/// parameter table: 100 individuals, crossover rate 1.0, mutation rate 0.3,
/// 10 elites and mutation variance 0.01.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaParams {
    pub pop_size: usize,
    pub p_c: f64,
    pub p_m: f64,
    pub n_elites: usize,
    /// Variance of the Gaussian mutation step.
    pub sigma_m: f64,
}

impl Default for GaParams {
    fn default() -> Self {
        Self { pop_size: 100, p_c: 1.0, p_m: 0.3, n_elites: 10, sigma_m: 0.01 }
    }
}

impl GaParams {
    pub fn validate(&self) -> Result<()> {
        if self.pop_size == 0 {
            return Err(Error::Config("ga.pop_size must be positive".into()));
        }
        if self.n_elites >= self.pop_size {
            return Err(Error::Config(format!(
                "ga.n_elites ({}) must be smaller than ga.pop_size ({})",
                self.n_elites, self.pop_size
            )));
        }
        for (name, v) in [("ga.p_c", self.p_c), ("ga.p_m", self.p_m)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Config(format!("{name} = {v} is not in [0, 1]")));
            }
        }
        if !(self.sigma_m >= 0.0 && self.sigma_m.is_finite()) {
            return Err(Error::Config(format!("ga.sigma_m = {} must be a finite nonnegative variance", self.sigma_m)));
        }
        Ok(())
    }
}

/// Indices of `pop` ordered by ascending fitness, ties by position.
pub fn ranking(pop: &[Individual]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..pop.len()).collect();
    order.sort_by(|&a, &b| pop[a].fitness.total_cmp(&pop[b].fitness).then(a.cmp(&b)));
    order
}

/// Index of the best member; ties resolve to the lower index.
pub fn best_index(pop: &[Individual]) -> Option<usize> {
    (0..pop.len()).reduce(|best, i| if pop[i].fitness < pop[best].fitness { i } else { best })
}

/// Winner among the given draws: lowest fitness, ties to the lower index.
pub fn tournament_winner(pop: &[Individual], draws: &[usize]) -> usize {
    draws
        .iter()
        .copied()
        .reduce(|w, i| match pop[i].fitness.total_cmp(&pop[w].fitness) {
            std::cmp::Ordering::Less => i,
            std::cmp::Ordering::Equal if i < w => i,
            _ => w,
        })
        .expect("tournament needs at least one draw")
}

/// Index of the winner of a `k`-way tournament with replacement.
pub fn tournament_select(pop: &[Individual], k: usize, rng: &mut RngState) -> Result<usize> {
    if pop.is_empty() {
        return Err(Error::State("tournament on an empty population".into()));
    }
    if k == 0 {
        return Err(Error::Argument("tournament size must be at least 1".into()));
    }
    let mut winner = rng.index(pop.len());
    for _ in 1..k {
        let challenger = rng.index(pop.len());
        winner = tournament_winner(pop, &[winner, challenger]);
    }
    Ok(winner)
}

/// `(alpha*a + (1-alpha)*b, (1-alpha)*a + alpha*b)`.
pub fn blend(a: &[f64], b: &[f64], alpha: f64) -> (Vec<f64>, Vec<f64>) {
    let beta = 1.0 - alpha;
    a.iter().zip(b).map(|(&x, &y)| (alpha * x + beta * y, beta * x + alpha * y)).unzip()
}

/// Whole arithmetic crossover. With probability `p_c` the children blend
/// both parents using one uniform factor; otherwise they copy them. Children
/// always come back stale.
pub fn arithmetic_crossover(
    a: &Individual,
    b: &Individual,
    p_c: f64,
    rng: &mut RngState,
) -> Result<(Individual, Individual)> {
    if a.genome.len() != b.genome.len() {
        return Err(Error::Argument(format!(
            "crossover of genomes with lengths {} and {}",
            a.genome.len(),
            b.genome.len()
        )));
    }
    if rng.bernoulli(p_c) {
        let alpha = rng.uniform(0.0, 1.0);
        let (x, y) = blend(&a.genome, &b.genome, alpha);
        Ok((Individual::new(x), Individual::new(y)))
    } else {
        Ok((Individual::new(a.genome.clone()), Individual::new(b.genome.clone())))
    }
}

/// Per-gene Gaussian mutation. `sigma_m` is a variance; steps use its
/// square root as standard deviation. Genes are clamped to `bounds` and the
/// individual is marked stale.
pub fn gaussian_mutate(
    ind: &mut Individual,
    p_m: f64,
    sigma_m: f64,
    bounds: &Bounds,
    rng: &mut RngState,
) -> Result<()> {
    if !(sigma_m >= 0.0) {
        return Err(Error::Argument(format!("mutation variance must be nonnegative, got {sigma_m}")));
    }
    let sd = sigma_m.sqrt();
    let mut changed = false;
    for gene in ind.genome.iter_mut() {
        if rng.bernoulli(p_m) {
            let moved = bounds.clamp(*gene + gaussian(rng, 0.0, sd)?);
            changed |= moved != *gene;
            *gene = moved;
        }
    }
    ind.stale = true;
    ind.unchanged = false;
    if changed {
        ind.sample = None;
    }
    Ok(())
}

/// Whether offspring fitness comes from true evaluation or from a model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitnessSource {
    Sampled,
    Estimated,
}

/// One generation with a fixed mutation rate and sampled fitness.
pub fn evolve_generation<F>(
    pop: &[Individual],
    fitness: F,
    params: &GaParams,
    bounds: &Bounds,
    rng: &mut RngState,
) -> Result<Vec<Individual>>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    evolve_generation_with(pop, fitness, params, bounds, &|_| params.p_m, FitnessSource::Sampled, rng)
}

/// One generation: the best `n_elites` are copied verbatim, the rest of the
/// slots are filled by binary tournament, crossover and mutation, and every
/// offspring is scored with `fitness`.
///
/// `mutation_rate(i)` gives the per-gene rate for a child derived from
/// parent `pop[i]`.
pub fn evolve_generation_with<F, M>(
    pop: &[Individual],
    mut fitness: F,
    params: &GaParams,
    bounds: &Bounds,
    mutation_rate: &M,
    source: FitnessSource,
    rng: &mut RngState,
) -> Result<Vec<Individual>>
where
    F: FnMut(&[f64]) -> Result<f64>,
    M: Fn(usize) -> f64 + ?Sized,
{
    params.validate()?;
    if pop.len() != params.pop_size {
        return Err(Error::Argument(format!("population has {} members, expected {}", pop.len(), params.pop_size)));
    }
    if let Some(i) = pop.iter().position(|ind| ind.stale) {
        return Err(Error::State(format!("individual {i} has a stale fitness")));
    }

    let mut next = Vec::with_capacity(params.pop_size);
    for &i in ranking(pop).iter().take(params.n_elites) {
        let mut elite = pop[i].clone();
        elite.unchanged = true;
        next.push(elite);
    }

    while next.len() < params.pop_size {
        let a = tournament_select(pop, 2, rng)?;
        let b = tournament_select(pop, 2, rng)?;
        let (mut c1, mut c2) = arithmetic_crossover(&pop[a], &pop[b], params.p_c, rng)?;
        gaussian_mutate(&mut c1, mutation_rate(a), params.sigma_m, bounds, rng)?;
        gaussian_mutate(&mut c2, mutation_rate(b), params.sigma_m, bounds, rng)?;
        for mut child in [c1, c2] {
            if next.len() == params.pop_size {
                break;
            }
            let value = fitness(&child.genome)?;
            match source {
                FitnessSource::Sampled => child.set_sampled(value),
                FitnessSource::Estimated => child.set_estimated(value),
            }
            next.push(child);
        }
    }
    Ok(next)
}
