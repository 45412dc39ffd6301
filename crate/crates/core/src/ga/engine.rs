use std::collections::HashMap;
use std::fmt::Write as _;
use std::sync::{Arc, Mutex};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::domain::{AngleDomain, GeneSampler};
use super::oracle::objective_for_slope;
use crate::blade::{BladeModel, PitchSchedule, UnitResponse};
use crate::error::{Error, Result};
use crate::laminate::{Layup, Material};

#[derive(Debug, Clone, PartialEq)]
pub struct GaConfig {
    pub population_size: usize,
    pub generations: usize,
    pub crossover_rate: f64,
    /// Per-gene mutation probability.
    pub mutation_rate: f64,
    /// Standard deviation of the Gaussian step in the continuous domain (rad).
    pub mutation_scale: f64,
    pub elitism_count: usize,
    pub tournament_size: usize,
    pub rng_seed: u64,
    /// Stop after this many generations without improvement of the best objective.
    pub stall_generations: usize,
}

impl Default for GaConfig {
    fn default() -> Self {
        GaConfig {
            population_size: 60,
            generations: 200,
            crossover_rate: 0.9,
            mutation_rate: 0.05,
            mutation_scale: 10f64.to_radians(),
            elitism_count: 2,
            tournament_size: 3,
            rng_seed: 1,
            stall_generations: 40,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidOptimizer(msg));
        if self.population_size < 2 {
            return bad(format!("population size must be >= 2, got {}", self.population_size));
        }
        if self.generations == 0 {
            return bad("generations must be >= 1".into());
        }
        for (name, v) in [
            ("crossover_rate", self.crossover_rate),
            ("mutation_rate", self.mutation_rate),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return bad(format!("{name} must lie in [0, 1], got {v}"));
            }
        }
        if !(self.mutation_scale.is_finite() && self.mutation_scale > 0.0) {
            return bad(format!("mutation scale must be > 0, got {}", self.mutation_scale));
        }
        if self.elitism_count >= self.population_size {
            return bad(format!(
                "elitism count {} must be below the population size {}",
                self.elitism_count, self.population_size
            ));
        }
        if self.tournament_size == 0 || self.tournament_size > self.population_size {
            return bad(format!(
                "tournament size must lie in [1, population], got {}",
                self.tournament_size
            ));
        }
        if self.stall_generations == 0 {
            return bad("stall generations must be >= 1".into());
        }
        Ok(())
    }
}

/// Half-stack ply angles in radians; the laminate is their mirrored expansion.
#[derive(Debug, Clone, PartialEq)]
pub struct Chromosome {
    pub genes: Vec<f64>,
}

impl Chromosome {
    pub fn to_layup(&self, ply_thickness: f64, material: Material) -> Result<Layup> {
        let deg: Vec<f64> = self.genes.iter().map(|g| g.to_degrees()).collect();
        Layup::from_degrees(&deg, ply_thickness, material, true)
    }

    fn key(&self) -> Vec<u64> {
        self.genes.iter().map(|g| g.to_bits()).collect()
    }
}

/// Extra objective term for a candidate, e.g. a strain-limit penalty. Must be
/// pure: it is called concurrently from the fitness workers.
pub type Penalty = Arc<dyn Fn(&BladeModel, &Layup, &UnitResponse) -> Result<f64> + Send + Sync>;

/// A blade, its material and ply count, and the schedule to track.
#[derive(Clone)]
pub struct LayupProblem {
    pub model: Arc<BladeModel>,
    pub material: Material,
    pub ply_thickness: f64,
    /// Independent plies in the half stack.
    pub half_plies: usize,
    pub schedule: PitchSchedule,
    pub penalty: Option<Penalty>,
}

impl std::fmt::Debug for LayupProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LayupProblem")
            .field("material", &self.material)
            .field("ply_thickness", &self.ply_thickness)
            .field("half_plies", &self.half_plies)
            .field("schedule", &self.schedule)
            .field("penalty", &self.penalty.is_some())
            .finish()
    }
}

/// Objective value together with the linearized twist slope it came from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub objective: f64,
    pub slope: f64,
}

impl LayupProblem {
    pub fn new(
        model: Arc<BladeModel>,
        material: Material,
        ply_thickness: f64,
        half_plies: usize,
        schedule: PitchSchedule,
    ) -> Result<Self> {
        if half_plies == 0 {
            return Err(Error::InvalidOptimizer(
                "need at least one ply in the half stack".into(),
            ));
        }
        if !(ply_thickness.is_finite() && ply_thickness > 0.0) {
            return Err(Error::InvalidOptimizer(format!(
                "ply thickness must be > 0, got {ply_thickness}"
            )));
        }
        material.validate()?;
        Ok(LayupProblem {
            model,
            material,
            ply_thickness,
            half_plies,
            schedule,
            penalty: None,
        })
    }

    pub fn with_penalty(mut self, penalty: Penalty) -> Self {
        self.penalty = Some(penalty);
        self
    }

    /// Weighted mean tracking error with the achieved pitch change modelled as
    /// `slope * delta P`, the slope taken from one unit-pressure solve.
    pub fn evaluate_layup(&self, layup: &Layup) -> Result<Evaluation> {
        let unit = self.model.unit_response(layup)?;
        let mut objective = objective_for_slope(&self.schedule, unit.twist_slope);
        if let Some(p) = &self.penalty {
            objective += p(&self.model, layup, &unit)?;
        }
        Ok(Evaluation {
            objective,
            slope: unit.twist_slope,
        })
    }

    pub fn evaluate(&self, chromosome: &Chromosome, domain: &AngleDomain) -> Result<Evaluation> {
        if chromosome.genes.len() != self.half_plies {
            return Err(Error::InvalidOptimizer(format!(
                "chromosome has {} genes, expected {}",
                chromosome.genes.len(),
                self.half_plies
            )));
        }
        if let Some(g) = chromosome.genes.iter().find(|g| !domain.contains(**g)) {
            return Err(Error::InvalidOptimizer(format!(
                "gene {:.4} deg lies outside the {} domain",
                g.to_degrees(),
                domain.label()
            )));
        }
        self.evaluate_layup(&chromosome.to_layup(self.ply_thickness, self.material)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenerationStats {
    pub generation: usize,
    pub best: f64,
    pub mean: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationResult {
    pub best: Chromosome,
    pub best_layup: Layup,
    pub best_objective: f64,
    pub best_slope: f64,
    pub history: Vec<GenerationStats>,
    /// Distinct chromosomes solved.
    pub evaluations: usize,
}

impl OptimizationResult {
    pub fn history_csv(&self) -> String {
        let mut s = String::from("generation,best_rad,mean_rad\n");
        for h in &self.history {
            let _ = writeln!(s, "{},{:.9e},{:.9e}", h.generation, h.best, h.mean);
        }
        s
    }

    /// Half-stack angles in degrees in the config layup syntax, e.g. `[10.0/45.5]s`.
    pub fn layup_string(&self) -> String {
        let items: Vec<String> = self
            .best
            .genes
            .iter()
            .map(|g| format!("{:.1}", g.to_degrees()))
            .collect();
        format!("[{}]s", items.join("/"))
    }
}

fn tournament<R: Rng>(fitness: &[f64], size: usize, rng: &mut R) -> usize {
    let mut best = rng.random_range(0..fitness.len());
    for _ in 1..size {
        let c = rng.random_range(0..fitness.len());
        if fitness[c] < fitness[best] || (fitness[c] == fitness[best] && c < best) {
            best = c;
        }
    }
    best
}

struct Evaluator<'a> {
    problem: &'a LayupProblem,
    domain: &'a AngleDomain,
    cache: Mutex<HashMap<Vec<u64>, Evaluation>>,
}

impl Evaluator<'_> {
    /// Evaluates a population; results are returned in population order.
    fn run(&self, population: &[Chromosome]) -> Result<Vec<Evaluation>> {
        let cached: Vec<Option<Evaluation>> = {
            let cache = self.cache.lock().unwrap();
            population.iter().map(|c| cache.get(&c.key()).copied()).collect()
        };
        let fresh: Vec<(usize, Evaluation)> = population
            .par_iter()
            .zip(&cached)
            .enumerate()
            .filter(|(_, (_, hit))| hit.is_none())
            .map(|(i, (c, _))| self.problem.evaluate(c, self.domain).map(|e| (i, e)))
            .collect::<Result<Vec<_>>>()?;
        let mut out = cached;
        let mut cache = self.cache.lock().unwrap();
        for (i, e) in fresh {
            cache.insert(population[i].key(), e);
            out[i] = Some(e);
        }
        Ok(out.into_iter().map(|e| e.unwrap()).collect())
    }

    fn count(&self) -> usize {
        self.cache.lock().unwrap().len()
    }
}

/// Runs the genetic algorithm. The outcome depends only on the problem, the
/// domain and the configuration (including its seed), not on the thread count.
pub fn run_ga(problem: &LayupProblem, domain: &AngleDomain, config: &GaConfig) -> Result<OptimizationResult> {
    config.validate()?;
    let sampler = GeneSampler::new(domain, config.mutation_scale)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    let evaluator = Evaluator {
        problem,
        domain,
        cache: Mutex::new(HashMap::new()),
    };

    let n = config.population_size;
    let mut population: Vec<Chromosome> = (0..n)
        .map(|_| Chromosome {
            genes: (0..problem.half_plies).map(|_| sampler.sample(&mut rng)).collect(),
        })
        .collect();

    let mut history = Vec::new();
    let mut best: Option<(Chromosome, Evaluation)> = None;
    let mut stall = 0;

    for generation in 0..config.generations {
        let evals = evaluator.run(&population)?;
        let fitness: Vec<f64> = evals.iter().map(|e| e.objective).collect();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| fitness[a].total_cmp(&fitness[b]).then(a.cmp(&b)));

        let gen_best = order[0];
        let mean = fitness.iter().sum::<f64>() / n as f64;
        let improved = match &best {
            None => true,
            Some((_, e)) => fitness[gen_best] < e.objective,
        };
        if improved {
            best = Some((population[gen_best].clone(), evals[gen_best]));
            stall = 0;
        } else {
            stall += 1;
        }
        let best_so_far = best.as_ref().unwrap().1.objective;
        history.push(GenerationStats {
            generation,
            best: best_so_far,
            mean,
        });
        if stall >= config.stall_generations || generation + 1 == config.generations {
            break;
        }

        let mut next: Vec<Chromosome> = order[..config.elitism_count]
            .iter()
            .map(|&i| population[i].clone())
            .collect();
        while next.len() < n {
            let p1 = &population[tournament(&fitness, config.tournament_size, &mut rng)];
            let p2 = &population[tournament(&fitness, config.tournament_size, &mut rng)];
            let (mut c1, mut c2) = (p1.clone(), p2.clone());
            if rng.random::<f64>() < config.crossover_rate {
                for k in 0..c1.genes.len() {
                    if rng.random::<bool>() {
                        std::mem::swap(&mut c1.genes[k], &mut c2.genes[k]);
                    }
                }
            }
            for child in [&mut c1, &mut c2] {
                for g in child.genes.iter_mut() {
                    if rng.random::<f64>() < config.mutation_rate {
                        *g = sampler.mutate(*g, &mut rng);
                    }
                }
            }
            next.push(c1);
            if next.len() < n {
                next.push(c2);
            }
        }
        population = next;
    }

    let (best, eval) = best.expect("at least one generation ran");
    Ok(OptimizationResult {
        best_layup: best.to_layup(problem.ply_thickness, problem.material)?,
        best,
        best_objective: eval.objective,
        best_slope: eval.slope,
        history,
        evaluations: evaluator.count(),
    })
}
