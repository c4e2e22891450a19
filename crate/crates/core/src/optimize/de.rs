//! Bound-constrained differential evolution (rand/1/bin), maximizing fitness.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::Span;

use super::pso::Fitness;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DeConfig {
    pub population: usize,
    /// Differential weight F.
    pub mutation: f64,
    /// Crossover probability CR.
    pub crossover: f64,
    pub generations: usize,
    pub seed: u64,
}

impl Default for DeConfig {
    fn default() -> Self {
        Self {
            population: 20,
            mutation: 0.8,
            crossover: 0.9,
            generations: 100,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeOutcome {
    pub best: Vec<f64>,
    pub best_fitness: f64,
    /// Best fitness after initialization and after each generation.
    pub history: Vec<f64>,
}

fn clip(v: f64, s: &Span) -> f64 {
    v.clamp(s.lo, s.hi)
}

/// Generational DE: all trial vectors of a generation are built first, then
/// evaluated, then selected greedily (ties keep the trial).
pub fn differential_evolution(bounds: &[Span], cfg: &DeConfig, fitness: &dyn Fitness) -> Result<DeOutcome> {
    if bounds.len() != fitness.dim() {
        return Err(Error::Shape {
            expected: fitness.dim(),
            actual: bounds.len(),
        });
    }
    if cfg.population < 4 {
        return Err(Error::Config(
            "differential evolution needs a population of at least 4".into(),
        ));
    }
    if bounds.iter().any(|s| !(s.lo <= s.hi)) {
        return Err(Error::Config("every bound must satisfy lo <= hi".into()));
    }
    let dim = bounds.len();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut pop: Vec<Vec<f64>> = (0..cfg.population)
        .map(|_| bounds.iter().map(|s| s.denormalize(rng.random::<f64>())).collect())
        .collect();
    let mut fit: Vec<f64> = pop.par_iter().map(|x| fitness.evaluate(x)).collect::<Result<_>>()?;

    let best_of = |fit: &[f64]| {
        let mut b = 0;
        for i in 1..fit.len() {
            if fit[i] > fit[b] {
                b = i;
            }
        }
        b
    };
    let mut history = vec![fit[best_of(&fit)]];

    for _ in 0..cfg.generations {
        let trials: Vec<Vec<f64>> = (0..cfg.population)
            .map(|i| {
                let picks = loop {
                    let s = sample(&mut rng, cfg.population, 3);
                    if !s.iter().any(|k| k == i) {
                        break [s.index(0), s.index(1), s.index(2)];
                    }
                };
                let [a, b, c] = picks;
                let forced = rng.random_range(0..dim);
                (0..dim)
                    .map(|d| {
                        let cross = d == forced || rng.random::<f64>() < cfg.crossover;
                        if cross {
                            clip(pop[a][d] + cfg.mutation * (pop[b][d] - pop[c][d]), &bounds[d])
                        } else {
                            pop[i][d]
                        }
                    })
                    .collect()
            })
            .collect();
        let trial_fit: Vec<f64> = trials.par_iter().map(|x| fitness.evaluate(x)).collect::<Result<_>>()?;
        for (i, (t, f)) in trials.into_iter().zip(trial_fit).enumerate() {
            if f >= fit[i] {
                pop[i] = t;
                fit[i] = f;
            }
        }
        history.push(fit[best_of(&fit)]);
    }
    let b = best_of(&fit);
    Ok(DeOutcome {
        best: pop[b].clone(),
        best_fitness: fit[b],
        history,
    })
}
