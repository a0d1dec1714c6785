//! NSGA-II over the mixed categorical/continuous design genome.
//!
//! Categorical genes (joint kinds) recombine by uniform exchange and mutate by
//! uniform resampling; continuous genes (length coefficients) use simulated
//! binary crossover and polynomial mutation on `[0, 1]`.

use std::cmp::Ordering;
use std::sync::atomic::{AtomicBool, Ordering as AtomicOrdering};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::archive::{ArchiveRecord, ParetoArchive, RunSnapshot};
use crate::error::{Error, Result};
use crate::ik::IkConfig;
use crate::model::{Genome, JointKind};
use crate::objectives::Evaluator;
use crate::scenario::Scenario;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerConfig {
    pub population_size: usize,
    pub total_evaluations: usize,
    pub crossover_probability: f64,
    pub mutation_probability_categorical: f64,
    pub mutation_probability_continuous: f64,
    pub sbx_eta: f64,
    pub pm_eta: f64,
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            population_size: 100,
            total_evaluations: 10_000,
            crossover_probability: 0.9,
            mutation_probability_categorical: 1.0 / 6.0,
            mutation_probability_continuous: 1.0 / 6.0,
            sbx_eta: 15.0,
            pm_eta: 20.0,
            seed: 0,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.population_size == 0 || self.population_size % 2 != 0 {
            return Err(Error::config(
                "population_size",
                format!("must be a positive even number, got {}", self.population_size),
            ));
        }
        if self.total_evaluations < self.population_size {
            return Err(Error::config(
                "total_evaluations",
                format!(
                    "{} is smaller than the population size {}",
                    self.total_evaluations, self.population_size
                ),
            ));
        }
        for (field, p) in [
            ("crossover_probability", self.crossover_probability),
            ("mutation_probability_categorical", self.mutation_probability_categorical),
            ("mutation_probability_continuous", self.mutation_probability_continuous),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::config(field, format!("{p} is not a probability")));
            }
        }
        for (field, eta) in [("sbx_eta", self.sbx_eta), ("pm_eta", self.pm_eta)] {
            if !(eta.is_finite() && eta > 0.0) {
                return Err(Error::config(field, "must be finite and > 0"));
            }
        }
        Ok(())
    }
}

/// `a` Pareto-dominates `b` under minimization.
pub fn dominates(a: &[f64], b: &[f64]) -> bool {
    let mut strictly_better = false;
    for (x, y) in a.iter().zip(b) {
        if x > y {
            return false;
        }
        if x < y {
            strictly_better = true;
        }
    }
    strictly_better
}

/// Partitions `points` into non-domination fronts (indices, front 0 first).
///
/// Two objectives use an `O(n log n)` sweep; anything else falls back to the
/// classic fast non-dominated sort.
pub fn non_dominated_sort<P: AsRef<[f64]>>(points: &[P]) -> Vec<Vec<usize>> {
    if points.is_empty() {
        return Vec::new();
    }
    if points.iter().all(|p| p.as_ref().len() == 2) {
        sweep_sort_2d(points)
    } else {
        fast_non_dominated_sort(points)
    }
}

fn sweep_sort_2d<P: AsRef<[f64]>>(points: &[P]) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    let key = |i: usize| {
        let p = points[i].as_ref();
        (p[0], p[1])
    };
    order.sort_by(|&a, &b| {
        let (a0, a1) = key(a);
        let (b0, b1) = key(b);
        a0.total_cmp(&b0).then(a1.total_cmp(&b1)).then(a.cmp(&b))
    });
    // Within a front, members arrive with non-increasing second objective, so
    // the most recently added member decides whether the front dominates.
    let mut fronts: Vec<Vec<usize>> = Vec::new();
    let mut last: Vec<(f64, f64)> = Vec::new();
    for i in order {
        let (x, y) = key(i);
        let dominated_by = |&(lx, ly): &(f64, f64)| ly < y || (ly == y && lx < x);
        let k = last.partition_point(dominated_by);
        if k == fronts.len() {
            fronts.push(vec![i]);
            last.push((x, y));
        } else {
            fronts[k].push(i);
            last[k] = (x, y);
        }
    }
    for front in &mut fronts {
        front.sort_unstable();
    }
    fronts
}

fn fast_non_dominated_sort<P: AsRef<[f64]>>(points: &[P]) -> Vec<Vec<usize>> {
    let n = points.len();
    let mut dominated: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut counts = vec![0usize; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let (a, b) = (points[i].as_ref(), points[j].as_ref());
            if dominates(a, b) {
                dominated[i].push(j);
                counts[j] += 1;
            } else if dominates(b, a) {
                dominated[j].push(i);
                counts[i] += 1;
            }
        }
    }
    let mut fronts = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|&i| counts[i] == 0).collect();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &i in &current {
            for &j in &dominated[i] {
                counts[j] -= 1;
                if counts[j] == 0 {
                    next.push(j);
                }
            }
        }
        next.sort_unstable();
        fronts.push(current);
        current = next;
    }
    fronts
}

/// Crowding distance of each member of `front` (aligned with `front`).
///
/// Boundary members get `+inf`; an objective whose range collapses to a
/// single value contributes nothing.
pub fn crowding_distance<P: AsRef<[f64]>>(points: &[P], front: &[usize]) -> Vec<f64> {
    let n = front.len();
    if n <= 2 {
        return vec![f64::INFINITY; n];
    }
    let m = points[front[0]].as_ref().len();
    let mut distance = vec![0.0; n];
    let mut order: Vec<usize> = (0..n).collect();
    for obj in 0..m {
        let value = |k: usize| points[front[k]].as_ref()[obj];
        order.sort_by(|&a, &b| value(a).total_cmp(&value(b)).then(front[a].cmp(&front[b])));
        let lo = value(order[0]);
        let hi = value(order[n - 1]);
        distance[order[0]] = f64::INFINITY;
        distance[order[n - 1]] = f64::INFINITY;
        let span = hi - lo;
        if span <= 0.0 || !span.is_finite() {
            continue;
        }
        for w in 1..n - 1 {
            let k = order[w];
            if distance[k].is_finite() {
                distance[k] += (value(order[w + 1]) - value(order[w - 1])) / span;
            }
        }
    }
    distance
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Individual {
    pub genome: Genome,
    pub objectives: [f64; 2],
    pub rank: usize,
    pub crowding: f64,
    pub eval_index: usize,
}

/// Crowded comparison: lower rank wins, then larger crowding distance.
fn crowded_cmp(a: &Individual, b: &Individual) -> Ordering {
    a.rank
        .cmp(&b.rank)
        .then_with(|| b.crowding.total_cmp(&a.crowding))
}

/// Binary tournament under the crowded comparison; a full tie keeps the first pick.
pub fn select_parent<'a>(population: &'a [Individual], rng: &mut impl Rng) -> &'a Individual {
    let a = &population[rng.random_range(0..population.len())];
    let b = &population[rng.random_range(0..population.len())];
    tournament(a, b)
}

pub fn tournament<'a>(a: &'a Individual, b: &'a Individual) -> &'a Individual {
    if crowded_cmp(b, a) == Ordering::Less {
        b
    } else {
        a
    }
}

fn sbx_spread(rand: f64, beta: f64, eta: f64) -> f64 {
    let alpha = 2.0 - beta.powf(-(eta + 1.0));
    if rand <= 1.0 / alpha {
        (rand * alpha).powf(1.0 / (eta + 1.0))
    } else {
        (1.0 / (2.0 - rand * alpha)).powf(1.0 / (eta + 1.0))
    }
}

/// Bounded simulated binary crossover of two values in `[0, 1]`.
fn sbx_pair(x1: f64, x2: f64, eta: f64, rng: &mut impl Rng) -> (f64, f64) {
    let (y1, y2) = if x1 <= x2 { (x1, x2) } else { (x2, x1) };
    let gap = y2 - y1;
    let rand: f64 = rng.random();
    let beta_lo = 1.0 + 2.0 * y1 / gap;
    let beta_hi = 1.0 + 2.0 * (1.0 - y2) / gap;
    let c1 = 0.5 * ((y1 + y2) - sbx_spread(rand, beta_lo, eta) * gap);
    let c2 = 0.5 * ((y1 + y2) + sbx_spread(rand, beta_hi, eta) * gap);
    let (c1, c2) = (c1.clamp(0.0, 1.0), c2.clamp(0.0, 1.0));
    if rng.random_bool(0.5) {
        (c2, c1)
    } else {
        (c1, c2)
    }
}

pub fn crossover(
    pa: &Genome,
    pb: &Genome,
    cfg: &OptimizerConfig,
    rng: &mut impl Rng,
) -> (Genome, Genome) {
    let mut a = pa.clone();
    let mut b = pb.clone();
    if !rng.random_bool(cfg.crossover_probability) {
        return (a, b);
    }
    for i in 0..a.len().min(b.len()) {
        if rng.random_bool(0.5) {
            std::mem::swap(&mut a.kinds[i], &mut b.kinds[i]);
        }
    }
    for i in 0..a.len().min(b.len()) {
        let (x1, x2) = (a.coefficients[i], b.coefficients[i]);
        if rng.random_bool(0.5) && (x1 - x2).abs() > 1e-14 {
            let (c1, c2) = sbx_pair(x1, x2, cfg.sbx_eta, rng);
            a.coefficients[i] = c1;
            b.coefficients[i] = c2;
        }
    }
    (a, b)
}

/// Bounded polynomial mutation of a value in `[0, 1]`.
fn polynomial_mutation(y: f64, eta: f64, rng: &mut impl Rng) -> f64 {
    let rand: f64 = rng.random();
    let power = 1.0 / (eta + 1.0);
    let delta = if rand < 0.5 {
        let xy = 1.0 - y;
        let val = 2.0 * rand + (1.0 - 2.0 * rand) * xy.powf(eta + 1.0);
        val.powf(power) - 1.0
    } else {
        let xy = y;
        let val = 2.0 * (1.0 - rand) + 2.0 * (rand - 0.5) * xy.powf(eta + 1.0);
        1.0 - val.powf(power)
    };
    (y + delta).clamp(0.0, 1.0)
}

pub fn mutate(genome: &Genome, cfg: &OptimizerConfig, rng: &mut impl Rng) -> Genome {
    let mut out = genome.clone();
    for kind in &mut out.kinds {
        if rng.random_bool(cfg.mutation_probability_categorical) {
            *kind = JointKind::ALL[rng.random_range(0..JointKind::ALL.len())];
        }
    }
    for c in &mut out.coefficients {
        if rng.random_bool(cfg.mutation_probability_continuous) {
            *c = polynomial_mutation(*c, cfg.pm_eta, rng);
        }
    }
    out
}

/// Recomputes rank and crowding for every member of `population` in place.
pub fn assign_rank_and_crowding(population: &mut [Individual]) {
    let points: Vec<[f64; 2]> = population.iter().map(|i| i.objectives).collect();
    for (rank, front) in non_dominated_sort(&points).into_iter().enumerate() {
        let crowding = crowding_distance(&points, &front);
        for (&i, d) in front.iter().zip(crowding) {
            population[i].rank = rank;
            population[i].crowding = d;
        }
    }
}

/// Picks `size` survivors from the merged pool: whole fronts first, the split
/// front by descending crowding then ascending evaluation index.
pub fn environmental_selection(pool: Vec<Individual>, size: usize) -> Vec<Individual> {
    let points: Vec<[f64; 2]> = pool.iter().map(|i| i.objectives).collect();
    let mut keep: Vec<usize> = Vec::with_capacity(size);
    for front in non_dominated_sort(&points) {
        if keep.len() + front.len() <= size {
            keep.extend(&front);
            if keep.len() == size {
                break;
            }
            continue;
        }
        let crowding = crowding_distance(&points, &front);
        let mut ranked: Vec<(usize, f64)> = front.into_iter().zip(crowding).collect();
        ranked.sort_by(|a, b| {
            b.1.total_cmp(&a.1)
                .then(pool[a.0].eval_index.cmp(&pool[b.0].eval_index))
        });
        keep.extend(ranked.iter().take(size - keep.len()).map(|r| r.0));
        break;
    }
    keep.sort_unstable();
    let mut slots: Vec<Option<Individual>> = pool.into_iter().map(Some).collect();
    let mut next: Vec<Individual> = keep
        .into_iter()
        .map(|i| slots[i].take().expect("each index kept once"))
        .collect();
    assign_rank_and_crowding(&mut next);
    next
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProgressEvent {
    pub evaluations: usize,
    pub best_e_task: f64,
    pub front_size: usize,
}

/// Receives progress reports; may be called from worker threads.
pub trait ProgressSink: Send + Sync {
    fn report(&self, event: ProgressEvent);
}

impl<F: Fn(ProgressEvent) + Send + Sync> ProgressSink for F {
    fn report(&self, event: ProgressEvent) {
        self(event)
    }
}

pub struct NoProgress;

impl ProgressSink for NoProgress {
    fn report(&self, _: ProgressEvent) {}
}

/// Generational NSGA-II state over an arbitrary objective function.
pub struct Nsga2<F> {
    cfg: OptimizerConfig,
    n_modules: usize,
    objective: F,
    rng: ChaCha8Rng,
    threads: Option<rayon::ThreadPool>,
    population: Vec<Individual>,
    evaluated: Vec<Individual>,
}

impl<F> Nsga2<F>
where
    F: Fn(&Genome) -> Result<[f64; 2]> + Sync,
{
    pub fn new(cfg: OptimizerConfig, n_modules: usize, objective: F) -> Result<Self> {
        cfg.validate()?;
        if n_modules == 0 {
            return Err(Error::config("n_modules", "must be at least 1"));
        }
        Ok(Self {
            rng: ChaCha8Rng::seed_from_u64(cfg.seed),
            cfg,
            n_modules,
            objective,
            threads: None,
            population: Vec::new(),
            evaluated: Vec::new(),
        })
    }

    /// Evaluate with exactly `workers` threads instead of rayon's global pool.
    pub fn workers(mut self, workers: usize) -> Result<Self> {
        if workers == 0 {
            return Err(Error::config("workers", "must be at least 1"));
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::Internal(format!("thread pool: {e}")))?;
        self.threads = Some(pool);
        Ok(self)
    }

    pub fn population(&self) -> &[Individual] {
        &self.population
    }

    /// Every individual evaluated so far, in evaluation order.
    pub fn evaluated(&self) -> &[Individual] {
        &self.evaluated
    }

    pub fn evaluations(&self) -> usize {
        self.evaluated.len()
    }

    pub fn is_finished(&self) -> bool {
        self.evaluated.len() >= self.cfg.total_evaluations
    }

    fn evaluate_batch(&mut self, genomes: Vec<Genome>) -> Result<Vec<Individual>> {
        let objective = &self.objective;
        let work = || -> Result<Vec<[f64; 2]>> { genomes.par_iter().map(objective).collect() };
        let objectives = match &self.threads {
            Some(pool) => pool.install(work),
            None => work(),
        }?;
        let start = self.evaluated.len();
        let batch: Vec<Individual> = genomes
            .into_iter()
            .zip(objectives)
            .enumerate()
            .map(|(k, (genome, objectives))| Individual {
                genome,
                objectives,
                rank: 0,
                crowding: 0.0,
                eval_index: start + k,
            })
            .collect();
        self.evaluated.extend(batch.iter().cloned());
        Ok(batch)
    }

    /// Evaluates the random initial population.
    pub fn initialize(&mut self) -> Result<()> {
        let genomes = (0..self.cfg.population_size)
            .map(|_| Genome::random(self.n_modules, &mut self.rng))
            .collect();
        self.population = self.evaluate_batch(genomes)?;
        assign_rank_and_crowding(&mut self.population);
        Ok(())
    }

    /// Produces, evaluates and selects one generation of offspring.
    /// Returns the offspring that were evaluated.
    pub fn step(&mut self) -> Result<Vec<Individual>> {
        let remaining = self.cfg.total_evaluations.saturating_sub(self.evaluated.len());
        let count = remaining.min(self.cfg.population_size);
        if count == 0 {
            return Ok(Vec::new());
        }
        let mut children = Vec::with_capacity(count);
        while children.len() < count {
            let pa = select_parent(&self.population, &mut self.rng).genome.clone();
            let pb = select_parent(&self.population, &mut self.rng).genome.clone();
            let (ca, cb) = crossover(&pa, &pb, &self.cfg, &mut self.rng);
            children.push(mutate(&ca, &self.cfg, &mut self.rng));
            if children.len() < count {
                children.push(mutate(&cb, &self.cfg, &mut self.rng));
            }
        }
        let offspring = self.evaluate_batch(children)?;
        let mut pool = std::mem::take(&mut self.population);
        pool.extend(offspring.iter().cloned());
        self.population = environmental_selection(pool, self.cfg.population_size);
        Ok(offspring)
    }

    pub fn progress(&self) -> ProgressEvent {
        ProgressEvent {
            evaluations: self.evaluated.len(),
            best_e_task: self
                .evaluated
                .iter()
                .map(|i| i.objectives[0])
                .fold(f64::INFINITY, f64::min),
            front_size: self.population.iter().filter(|i| i.rank == 0).count(),
        }
    }

    pub fn into_evaluated(self) -> Vec<Individual> {
        self.evaluated
    }
}

/// Full optimization run of a scenario: builds the evaluator, evolves until
/// the evaluation budget is spent and returns the complete archive.
pub struct Optimizer<'a> {
    scenario: Scenario,
    cfg: OptimizerConfig,
    ik: IkConfig,
    workers: Option<usize>,
    sink: &'a dyn ProgressSink,
    cancel: Option<Arc<AtomicBool>>,
}

impl<'a> Optimizer<'a> {
    pub fn new(scenario: Scenario, cfg: OptimizerConfig, ik: IkConfig) -> Self {
        Self {
            scenario,
            cfg,
            ik,
            workers: None,
            sink: &NoProgress,
            cancel: None,
        }
    }

    pub fn workers(mut self, workers: usize) -> Self {
        self.workers = Some(workers);
        self
    }

    pub fn progress(mut self, sink: &'a dyn ProgressSink) -> Self {
        self.sink = sink;
        self
    }

    /// Checked between generations; a set flag aborts the run with [`Error::Cancelled`].
    pub fn cancel_flag(mut self, flag: Arc<AtomicBool>) -> Self {
        self.cancel = Some(flag);
        self
    }

    pub fn run(self) -> Result<ParetoArchive> {
        self.cfg.validate()?;
        self.ik.validate()?;
        let evaluator = Evaluator::new(self.scenario.clone(), self.ik)?;
        let objective = |g: &Genome| evaluator.evaluate(g).map(|r| r.objectives());
        let mut engine = Nsga2::new(self.cfg, self.scenario.n_modules, objective)?;
        if let Some(w) = self.workers {
            engine = engine.workers(w)?;
        }
        let cancelled = || {
            self.cancel
                .as_ref()
                .is_some_and(|c| c.load(AtomicOrdering::Relaxed))
        };
        engine.initialize()?;
        self.sink.report(engine.progress());
        while !engine.is_finished() {
            if cancelled() {
                return Err(Error::Cancelled);
            }
            engine.step()?;
            self.sink.report(engine.progress());
        }
        let records = engine
            .into_evaluated()
            .into_iter()
            .map(|i| ArchiveRecord {
                eval_index: i.eval_index,
                genome: i.genome,
                e_task: i.objectives[0],
                e_design: i.objectives[1],
                rank: 0,
            })
            .collect();
        ParetoArchive::new(
            self.scenario.name.clone(),
            self.cfg.seed,
            RunSnapshot {
                optimizer: self.cfg,
                ik: self.ik,
                n_modules: self.scenario.n_modules,
            },
            records,
        )
    }
}

/// Runs NSGA-II on `scenario` without progress reporting.
pub fn run(
    scenario: &Scenario,
    cfg: &OptimizerConfig,
    ik: &IkConfig,
    sink: &dyn ProgressSink,
) -> Result<ParetoArchive> {
    Optimizer::new(scenario.clone(), *cfg, *ik).progress(sink).run()
}
