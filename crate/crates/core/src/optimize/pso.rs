//! Random-search initialization followed by global-best particle swarm
//! optimization. Fitness is maximized.

use std::io::{self, Write};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::Span;

/// Objective evaluated by the optimizers. Must be safe to call concurrently.
pub trait Fitness: Sync {
    fn dim(&self) -> usize;
    fn evaluate(&self, x: &[f64]) -> Result<f64>;
}

/// Adapts a closure into a [`Fitness`].
pub struct FnFitness<F> {
    dim: usize,
    f: F,
}

impl<F> FnFitness<F>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F> Fitness for FnFitness<F>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn evaluate(&self, x: &[f64]) -> Result<f64> {
        (self.f)(x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SwarmConfig {
    pub inertia: f64,
    pub cognitive: f64,
    pub social: f64,
    /// Random-search population size.
    pub n_init: usize,
    pub n_particles: usize,
    pub n_iters: usize,
    /// Episodes averaged per fitness evaluation.
    pub n_episodes: usize,
    /// Steps per episode; must match the scenarios being trained on.
    pub n_steps: usize,
    pub seed: u64,
    /// Uniform sampling range for the random search.
    pub init_range: Span,
    /// Draw r1, r2 per dimension instead of one scalar pair per particle.
    pub per_dimension_r: bool,
}

impl Default for SwarmConfig {
    fn default() -> Self {
        Self {
            inertia: 0.6,
            cognitive: 1.0,
            social: 1.0,
            n_init: 30,
            n_particles: 15,
            n_iters: 150,
            n_episodes: 3,
            n_steps: 120,
            seed: 0,
            init_range: Span::new(-1.0, 1.0),
            per_dimension_r: false,
        }
    }
}

impl SwarmConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_init == 0 || self.n_particles == 0 {
            return Err(Error::Config("n_init and n_particles must be at least 1".into()));
        }
        if self.n_particles > self.n_init {
            return Err(Error::Config(format!(
                "n_particles ({}) cannot exceed the random-search population n_init ({})",
                self.n_particles, self.n_init
            )));
        }
        if self.n_episodes == 0 || self.n_steps == 0 {
            return Err(Error::Config("n_episodes and n_steps must be at least 1".into()));
        }
        if !(self.init_range.lo <= self.init_range.hi) {
            return Err(Error::Config("init_range must satisfy lo <= hi".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Particle {
    pub position: Vec<f64>,
    pub velocity: Vec<f64>,
    pub best_position: Vec<f64>,
    pub best_fitness: f64,
}

impl Particle {
    pub fn at_rest(position: Vec<f64>, fitness: f64) -> Self {
        let n = position.len();
        Self {
            best_position: position.clone(),
            position,
            velocity: vec![0.0; n],
            best_fitness: fitness,
        }
    }
}

/// One point of the learning curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitnessRecord {
    pub iteration: usize,
    pub best_fitness: f64,
    pub mean_fitness: f64,
    pub min_fitness: f64,
    pub particle_fitness: Vec<f64>,
    pub wall_time_s: f64,
}

impl FitnessRecord {
    fn new(iteration: usize, best: f64, fitness: &[f64], wall_time_s: f64) -> Self {
        let mean = fitness.iter().sum::<f64>() / fitness.len() as f64;
        let min = fitness.iter().copied().fold(f64::INFINITY, f64::min);
        Self {
            iteration,
            best_fitness: best,
            mean_fitness: mean,
            min_fitness: min,
            particle_fitness: fitness.to_vec(),
            wall_time_s,
        }
    }
}

pub const LEARNING_CURVE_HEADER: &str = "iteration,best_fitness,mean_fitness,min_fitness,wall_time_s";

/// Writes the learning curve. Without `include_wall_time` the timing column is
/// written as 0 so the file is a pure function of the configuration.
pub fn write_learning_curve<W: Write>(mut w: W, history: &[FitnessRecord], include_wall_time: bool) -> io::Result<()> {
    writeln!(w, "{LEARNING_CURVE_HEADER}")?;
    for r in history {
        let t = if include_wall_time { r.wall_time_s } else { 0.0 };
        writeln!(
            w,
            "{},{},{},{},{}",
            r.iteration, r.best_fitness, r.mean_fitness, r.min_fitness, t
        )?;
    }
    Ok(())
}

/// Random-search population and its fitness.
#[derive(Debug, Clone, PartialEq)]
pub struct InitResult {
    pub population: Vec<Vec<f64>>,
    pub fitness: Vec<f64>,
    /// Index of the fittest vector; ties go to the lowest index.
    pub best_index: usize,
}

impl InitResult {
    pub fn best(&self) -> (&[f64], f64) {
        (&self.population[self.best_index], self.fitness[self.best_index])
    }

    /// Indices by descending fitness, ties by ascending index.
    pub fn ranking(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.fitness.len()).collect();
        idx.sort_by(|&a, &b| self.fitness[b].total_cmp(&self.fitness[a]).then(a.cmp(&b)));
        idx
    }
}

fn evaluate_all(fitness: &dyn Fitness, xs: &[Vec<f64>]) -> Result<Vec<f64>> {
    xs.par_iter().map(|x| fitness.evaluate(x)).collect()
}

fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if v.total_cmp(&values[best]).is_gt() {
            best = i;
        }
    }
    best
}

/// Draws `n` vectors uniformly in `range` (in order, from `rng`) and evaluates them.
pub fn random_search_init<R: Rng>(n: usize, range: Span, rng: &mut R, fitness: &dyn Fitness) -> Result<InitResult> {
    if n == 0 {
        return Err(Error::Config("random search needs at least one sample".into()));
    }
    let dim = fitness.dim();
    let population: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..dim).map(|_| range.denormalize(rng.random::<f64>())).collect())
        .collect();
    let values = evaluate_all(fitness, &population)?;
    let best_index = argmax(&values);
    Ok(InitResult {
        population,
        fitness: values,
        best_index,
    })
}

/// Velocity and position update with given random factors:
/// `v ← w·v + c1·r1·(p − θ) + c2·r2·(g − θ)`, `θ ← θ + v`.
#[allow(clippy::needless_range_loop)]
pub fn pso_update_with(particle: &mut Particle, global_best: &[f64], cfg: &SwarmConfig, r1: &[f64], r2: &[f64]) {
    let n = particle.position.len();
    let pick = |r: &[f64], i: usize| if r.len() == 1 { r[0] } else { r[i] };
    for i in 0..n {
        let x = particle.position[i];
        let v = cfg.inertia * particle.velocity[i]
            + cfg.cognitive * pick(r1, i) * (particle.best_position[i] - x)
            + cfg.social * pick(r2, i) * (global_best[i] - x);
        particle.velocity[i] = v;
        particle.position[i] = x + v;
    }
}

/// [`pso_update_with`] drawing r1, r2 ~ U[0, 1) from `rng`.
pub fn pso_update<R: Rng>(particle: &mut Particle, global_best: &[f64], cfg: &SwarmConfig, rng: &mut R) {
    if cfg.per_dimension_r {
        let n = particle.position.len();
        let r1: Vec<f64> = (0..n).map(|_| rng.random()).collect();
        let r2: Vec<f64> = (0..n).map(|_| rng.random()).collect();
        pso_update_with(particle, global_best, cfg, &r1, &r2);
    } else {
        let r1: f64 = rng.random();
        let r2: f64 = rng.random();
        pso_update_with(particle, global_best, cfg, &[r1], &[r2]);
    }
}

/// Complete optimizer state; serializable as a checkpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Swarm {
    pub iteration: usize,
    pub particles: Vec<Particle>,
    pub global_best: Vec<f64>,
    pub global_best_fitness: f64,
    /// Random stream position; resuming from a checkpoint continues it exactly.
    #[serde(rename = "rng_state")]
    pub rng: ChaCha8Rng,
}

impl Swarm {
    /// Random search, then seeds the swarm with the `n_particles` fittest vectors at rest.
    pub fn initialize(cfg: &SwarmConfig, fitness: &dyn Fitness) -> Result<(Self, InitResult)> {
        cfg.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let init = random_search_init(cfg.n_init, cfg.init_range, &mut rng, fitness)?;
        let particles = init
            .ranking()
            .into_iter()
            .take(cfg.n_particles)
            .map(|i| Particle::at_rest(init.population[i].clone(), init.fitness[i]))
            .collect();
        let (best, best_fitness) = init.best();
        let swarm = Self {
            iteration: 0,
            particles,
            global_best: best.to_vec(),
            global_best_fitness: best_fitness,
            rng,
        };
        Ok((swarm, init))
    }

    /// One iteration: move every particle, evaluate all new positions, then
    /// update personal and global bests in particle order.
    pub fn step(&mut self, cfg: &SwarmConfig, fitness: &dyn Fitness) -> Result<Vec<f64>> {
        for particle in &mut self.particles {
            pso_update(particle, &self.global_best, cfg, &mut self.rng);
        }
        let positions: Vec<Vec<f64>> = self.particles.iter().map(|p| p.position.clone()).collect();
        let values = evaluate_all(fitness, &positions)?;
        for (particle, &f) in self.particles.iter_mut().zip(&values) {
            if f > particle.best_fitness {
                particle.best_fitness = f;
                particle.best_position.clone_from(&particle.position);
            }
            if f > self.global_best_fitness {
                self.global_best_fitness = f;
                self.global_best.clone_from(&particle.position);
            }
        }
        self.iteration += 1;
        Ok(values)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PsoOutcome {
    pub best: Vec<f64>,
    pub best_fitness: f64,
    /// Entry 0 is the random search; entry t is PSO iteration t.
    pub history: Vec<FitnessRecord>,
    pub swarm: Swarm,
}

/// Continues `swarm` until `cfg.n_iters` iterations are done.
pub fn pso_resume(
    cfg: &SwarmConfig,
    fitness: &dyn Fitness,
    mut swarm: Swarm,
    mut history: Vec<FitnessRecord>,
) -> Result<PsoOutcome> {
    let start = Instant::now();
    let offset = history.last().map_or(0.0, |r| r.wall_time_s);
    while swarm.iteration < cfg.n_iters {
        let values = swarm.step(cfg, fitness)?;
        let t = offset + start.elapsed().as_secs_f64();
        history.push(FitnessRecord::new(
            swarm.iteration,
            swarm.global_best_fitness,
            &values,
            t,
        ));
    }
    Ok(PsoOutcome {
        best: swarm.global_best.clone(),
        best_fitness: swarm.global_best_fitness,
        history,
        swarm,
    })
}

/// Random-search initialization followed by `cfg.n_iters` PSO iterations.
pub fn pso_optimize(cfg: &SwarmConfig, fitness: &dyn Fitness) -> Result<PsoOutcome> {
    let start = Instant::now();
    let (swarm, init) = Swarm::initialize(cfg, fitness)?;
    let first = FitnessRecord::new(
        0,
        swarm.global_best_fitness,
        &init.fitness,
        start.elapsed().as_secs_f64(),
    );
    pso_resume(cfg, fitness, swarm, vec![first])
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::atomic::{AtomicUsize, Ordering};

    fn sphere(center: Vec<f64>) -> FnFitness<impl Fn(&[f64]) -> Result<f64> + Sync> {
        let dim = center.len();
        FnFitness::new(dim, move |x: &[f64]| {
            Ok(-x.iter().zip(&center).map(|(a, c)| (a - c).powi(2)).sum::<f64>())
        })
    }

    fn distance(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
    }

    #[test]
    fn consensus_is_a_fixed_point() {
        let cfg = SwarmConfig::default();
        let mut p = Particle::at_rest(vec![0.3, -0.2], -1.0);
        let g = p.position.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        pso_update(&mut p, &g, &cfg, &mut rng);
        assert_eq!(p.position, vec![0.3, -0.2]);
        assert_eq!(p.velocity, vec![0.0, 0.0]);
    }

    #[test]
    fn hand_computed_update() {
        let cfg = SwarmConfig::default();
        let mut p = Particle {
            position: vec![0.0],
            velocity: vec![1.0],
            best_position: vec![1.0],
            best_fitness: 0.0,
        };
        pso_update_with(&mut p, &[2.0], &cfg, &[1.0], &[1.0]);
        assert!((p.velocity[0] - 3.6).abs() < 1e-15);
        assert!((p.position[0] - 3.6).abs() < 1e-15);
    }

    #[test]
    fn pure_inertia_without_acceleration() {
        let cfg = SwarmConfig {
            cognitive: 0.0,
            social: 0.0,
            ..SwarmConfig::default()
        };
        let mut p = Particle {
            position: vec![1.0, 2.0],
            velocity: vec![0.5, -1.0],
            best_position: vec![9.0, 9.0],
            best_fitness: 0.0,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        pso_update(&mut p, &[-9.0, -9.0], &cfg, &mut rng);
        assert_eq!(p.position, vec![1.0 + 0.6 * 0.5, 2.0 - 0.6]);
    }

    #[test]
    fn random_search_edge_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let f = sphere(vec![0.0; 3]);
        let one = random_search_init(1, Span::new(-1.0, 1.0), &mut rng, &f).unwrap();
        assert_eq!(one.best_index, 0);

        let flat = FnFitness::new(3, |_: &[f64]| Ok(-1.0));
        let init = random_search_init(10, Span::new(-1.0, 1.0), &mut rng, &flat).unwrap();
        assert_eq!(init.best_index, 0);

        let init = random_search_init(25, Span::new(-1.0, 1.0), &mut rng, &f).unwrap();
        let (_, best) = init.best();
        assert!(init.fitness.iter().all(|&v| best >= v));
        assert!(init.population.iter().flatten().all(|v| (-1.0..=1.0).contains(v)));
    }

    #[test]
    fn zero_iterations_return_random_search_best() {
        let cfg = SwarmConfig {
            n_iters: 0,
            ..SwarmConfig::default()
        };
        let f = sphere(vec![0.0; 4]);
        let out = pso_optimize(&cfg, &f).unwrap();
        let (_, init) = Swarm::initialize(&cfg, &f).unwrap();
        assert_eq!(out.best, init.best().0);
        assert_eq!(out.history.len(), 1);
    }

    #[test]
    fn global_best_is_monotone_and_sphere_is_solved() {
        let center = vec![0.3, -0.2, 0.5, -0.4, 0.1];
        let f = sphere(center.clone());
        for seed in 0..3 {
            let cfg = SwarmConfig {
                seed,
                ..SwarmConfig::default()
            };
            let out = pso_optimize(&cfg, &f).unwrap();
            assert_eq!(out.history.len(), 151);
            assert!(out.history.windows(2).all(|w| w[1].best_fitness >= w[0].best_fitness));
            assert!(distance(&out.best, &center) < 0.1, "seed {seed}: {:?}", out.best);
        }
    }

    #[test]
    fn runs_are_seed_deterministic() {
        let f = sphere(vec![0.1; 5]);
        let cfg = SwarmConfig {
            n_iters: 20,
            seed: 42,
            ..SwarmConfig::default()
        };
        let a = pso_optimize(&cfg, &f).unwrap();
        let b = pso_optimize(&cfg, &f).unwrap();
        assert_eq!(a.best, b.best);
        assert_eq!(a.swarm, b.swarm);
    }

    #[test]
    fn checkpoint_resume_matches_uninterrupted_run() {
        let f = sphere(vec![0.2; 5]);
        let cfg = SwarmConfig {
            n_iters: 30,
            seed: 7,
            ..SwarmConfig::default()
        };
        let full = pso_optimize(&cfg, &f).unwrap();

        let half = SwarmConfig { n_iters: 12, ..cfg };
        let partial = pso_optimize(&half, &f).unwrap();
        let restored = Swarm::from_json(&partial.swarm.to_json().unwrap()).unwrap();
        assert_eq!(restored, partial.swarm);
        let resumed = pso_resume(&cfg, &f, restored, partial.history).unwrap();
        assert_eq!(resumed.best, full.best);
        assert_eq!(resumed.swarm, full.swarm);
    }

    #[test]
    fn evaluation_count() {
        let calls = AtomicUsize::new(0);
        let f = FnFitness::new(2, |x: &[f64]| {
            calls.fetch_add(1, Ordering::Relaxed);
            Ok(-x[0].abs())
        });
        let cfg = SwarmConfig {
            n_init: 9,
            n_particles: 4,
            n_iters: 6,
            ..SwarmConfig::default()
        };
        pso_optimize(&cfg, &f).unwrap();
        assert_eq!(calls.load(Ordering::Relaxed), 9 + 6 * 4);
    }

    #[test]
    fn invalid_configs() {
        let f = sphere(vec![0.0]);
        let bad = SwarmConfig {
            n_particles: 40,
            ..SwarmConfig::default()
        };
        assert!(pso_optimize(&bad, &f).is_err());
        let bad = SwarmConfig {
            n_init: 0,
            ..SwarmConfig::default()
        };
        assert!(pso_optimize(&bad, &f).is_err());
    }

    #[test]
    fn learning_curve_layout() {
        let rec = FitnessRecord::new(3, -1.5, &[-2.0, -1.5, -3.0], 12.5);
        let mut out = Vec::new();
        write_learning_curve(&mut out, std::slice::from_ref(&rec), false).unwrap();
        assert_eq!(
            String::from_utf8(out).unwrap(),
            format!("{LEARNING_CURVE_HEADER}\n3,-1.5,-2.1666666666666665,-3,0\n")
        );
        let mut out = Vec::new();
        write_learning_curve(&mut out, &[rec], true).unwrap();
        assert!(String::from_utf8(out).unwrap().ends_with(",12.5\n"));
    }
}
