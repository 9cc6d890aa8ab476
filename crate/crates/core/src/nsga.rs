//! NSGA-II over the genome space, minimizing three objectives at once:
//! quantum FLOPs per training step, validation error, and parameter count.
//!
//! The loop is the classic elitist scheme: rank the union of parents and
//! offspring by non-dominated sorting, fill the next population front by
//! front, and break the boundary front by descending crowding distance.
//! Parents are picked by crowded binary tournament; variation is uniform
//! crossover plus pointwise mutation. The run stops after a fixed number of
//! generations or earlier once the first front's objective values have not
//! changed for a configured number of consecutive generations.
//!
//! Evaluation is delegated to a caller-supplied batch function so the
//! expensive part (training a model per genome) can be cached or spread
//! over threads. The engine itself is deterministic: every random draw
//! comes from a stream derived from `SearchConfig::seed`, and per-offspring
//! streams make the result independent of evaluation order.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand::Rng;

use crate::genome::Genome;
use crate::seed;

/// One candidate's objective values; all three are minimized.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Objectives {
    /// Quantum FLOPs per training step.
    pub f_quantum: u64,
    /// 1 minus best validation accuracy, in [0, 1].
    pub error: f64,
    /// Trainable parameter count.
    pub params: u64,
}

impl Objectives {
    /// Pareto dominance for minimization: no objective worse, at least one
    /// strictly better.
    pub fn dominates(&self, other: &Objectives) -> bool {
        let no_worse = self.f_quantum <= other.f_quantum
            && self.error <= other.error
            && self.params <= other.params;
        let better = self.f_quantum < other.f_quantum
            || self.error < other.error
            || self.params < other.params;
        no_worse && better
    }

    fn as_array(&self) -> [f64; 3] {
        [self.f_quantum as f64, self.error, self.params as f64]
    }

    /// Exact-comparison key: two candidates with equal keys are
    /// indistinguishable to the search.
    fn signature(&self) -> (u64, u64, u64) {
        (self.f_quantum, self.error.to_bits(), self.params)
    }
}

/// What the evaluator reports for one genome.
#[derive(Clone, Copy, Debug)]
pub struct Evaluation {
    /// Objective values. A failed evaluation still carries real FLOP and
    /// parameter counts, with `error` pinned to 1.
    pub objectives: Objectives,
    /// True if training failed and the error value is the failure penalty.
    pub failed: bool,
}

/// A genome with its evaluation and its place in the current ranking.
#[derive(Clone, Copy, Debug)]
pub struct Individual {
    /// The architecture.
    pub genome: Genome,
    /// Its measured objectives.
    pub objectives: Objectives,
    /// Whether the evaluation failed.
    pub failed: bool,
    /// Non-domination rank; 0 is the Pareto front.
    pub rank: usize,
    /// Crowding distance within its front; boundary points get infinity.
    pub crowding: f64,
}

/// Search hyperparameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SearchConfig {
    /// Population size.
    pub pop_size: usize,
    /// Maximum number of generations after the initial population.
    pub generations: usize,
    /// Probability that a child is produced by crossover rather than by
    /// copying its first parent.
    pub crossover_prob: f64,
    /// Per-gene mutation probability.
    pub mutation_prob: f64,
    /// Stop once the front is unchanged for this many consecutive
    /// generations.
    pub stagnation_patience: usize,
    /// How many individuals [`SearchResult::top_k`] reports.
    pub top_k: usize,
    /// Base seed; every random stream of the run derives from it.
    pub seed: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            pop_size: 20,
            generations: 8,
            crossover_prob: 0.8,
            mutation_prob: 0.2,
            stagnation_patience: 2,
            top_k: 5,
            seed: 0,
        }
    }
}

/// Error for out-of-range search settings.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BadSearchConfig(&'static str);

impl fmt::Display for BadSearchConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid search config: {}", self.0)
    }
}

impl core::error::Error for BadSearchConfig {}

impl SearchConfig {
    /// Checks field ranges.
    pub fn validate(&self) -> Result<(), BadSearchConfig> {
        if self.pop_size < 2 {
            return Err(BadSearchConfig("population size must be at least 2"));
        }
        if !(0.0..=1.0).contains(&self.crossover_prob) {
            return Err(BadSearchConfig("crossover probability must be in [0, 1]"));
        }
        if !(0.0..=1.0).contains(&self.mutation_prob) {
            return Err(BadSearchConfig("mutation probability must be in [0, 1]"));
        }
        if self.stagnation_patience == 0 {
            return Err(BadSearchConfig("stagnation patience must be at least 1"));
        }
        if self.top_k == 0 {
            return Err(BadSearchConfig("top-k must be at least 1"));
        }
        Ok(())
    }
}

/// One logged individual: every evaluated candidate produces exactly one
/// record, tagged with the generation that created it (0 for the initial
/// population). Rank and crowding are taken from the sort that first placed
/// the candidate: the initial ranking for generation 0, the parent/offspring
/// union ranking afterwards.
#[derive(Clone, Copy, Debug)]
pub struct LogRecord {
    /// Generation that created the candidate.
    pub generation: usize,
    /// The candidate itself.
    pub individual: Individual,
}

/// Everything a finished search reports.
#[derive(Clone, Debug)]
pub struct SearchResult {
    /// One record per evaluated candidate, in evaluation order:
    /// `pop_size * (generations_executed + 1)` rows.
    pub records: Vec<LogRecord>,
    /// Final population with its ranking.
    pub population: Vec<Individual>,
    /// Rank-0 members of the final population, in population order.
    pub pareto_front: Vec<Individual>,
    /// Best `top_k` of the final population by (rank, descending crowding).
    pub top_k: Vec<Individual>,
    /// Front member closest (L2, after per-objective max normalization) to
    /// the ideal point.
    pub compromise: Individual,
    /// Rank-0 objective values of the population after each selection step:
    /// entry 0 is the initial population's front, entry g the front after
    /// generation g. Length is `generations_executed + 1`.
    pub front_history: Vec<Vec<Objectives>>,
    /// Generations actually run after the initial population.
    pub generations_executed: usize,
    /// True if stagnation stopped the run before the generation budget.
    pub stopped_early: bool,
    /// Number of failed evaluations across the whole run.
    pub failures: u64,
}

/// Fast non-dominated sort. Writes `rank` into each individual and returns
/// the fronts as index lists, best first. Within a front, indices keep
/// their population order.
pub fn fast_non_dominated_sort(pop: &mut [Individual]) -> Vec<Vec<usize>> {
    let n = pop.len();
    let mut dominated_by: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut domination_count = vec![0usize; n];
    for p in 0..n {
        for q in (p + 1)..n {
            if pop[p].objectives.dominates(&pop[q].objectives) {
                dominated_by[p].push(q);
                domination_count[q] += 1;
            } else if pop[q].objectives.dominates(&pop[p].objectives) {
                dominated_by[q].push(p);
                domination_count[p] += 1;
            }
        }
    }

    let mut fronts: Vec<Vec<usize>> = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|&p| domination_count[p] == 0).collect();
    let mut rank = 0;
    while !current.is_empty() {
        let mut next = Vec::new();
        for &p in &current {
            pop[p].rank = rank;
            for &q in &dominated_by[p] {
                domination_count[q] -= 1;
                if domination_count[q] == 0 {
                    next.push(q);
                }
            }
        }
        next.sort_unstable();
        fronts.push(core::mem::take(&mut current));
        current = next;
        rank += 1;
    }
    fronts
}

/// Crowding distance of one front, written into the individuals.
///
/// For each objective the front is ordered by value (ties by index);
/// extremes get infinity, interior points accumulate the normalized gap
/// between their neighbors. An objective that is constant across the front
/// contributes nothing.
pub fn assign_crowding(pop: &mut [Individual], front: &[usize]) {
    for &i in front {
        pop[i].crowding = 0.0;
    }
    if front.len() <= 2 {
        for &i in front {
            pop[i].crowding = f64::INFINITY;
        }
        return;
    }
    for obj in 0..3 {
        let mut order: Vec<(f64, usize)> = front
            .iter()
            .map(|&i| (pop[i].objectives.as_array()[obj], i))
            .collect();
        order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let lo = order[0].0;
        let hi = order[order.len() - 1].0;
        pop[order[0].1].crowding = f64::INFINITY;
        pop[order[order.len() - 1].1].crowding = f64::INFINITY;
        if hi <= lo {
            continue;
        }
        for w in order.windows(3) {
            let ((prev, _), (_, mid), (next, _)) = (w[0], w[1], w[2]);
            pop[mid].crowding += (next - prev) / (hi - lo);
        }
    }
}

fn sort_and_crowd(pop: &mut [Individual]) -> Vec<Vec<usize>> {
    let fronts = fast_non_dominated_sort(pop);
    for front in &fronts {
        assign_crowding(pop, front);
    }
    fronts
}

/// Winner of a crowded binary tournament: two uniform draws (with
/// replacement); lower rank wins, then higher crowding, then the first
/// draw. Returns an index into `pop`.
pub fn tournament_select<R: Rng + ?Sized>(pop: &[Individual], rng: &mut R) -> usize {
    let a = rng.random_range(0..pop.len());
    let b = rng.random_range(0..pop.len());
    if pop[b].rank < pop[a].rank
        || (pop[b].rank == pop[a].rank && pop[b].crowding > pop[a].crowding)
    {
        b
    } else {
        a
    }
}

/// Index of the front member whose max-normalized objective vector has the
/// smallest L2 norm (closest to the all-zeros ideal). An objective whose
/// maximum over the front is zero contributes nothing. Earliest index wins
/// ties.
pub fn compromise_index(front: &[Individual]) -> Option<usize> {
    let mut maxima = [0.0f64; 3];
    for ind in front {
        for (m, v) in maxima.iter_mut().zip(ind.objectives.as_array()) {
            *m = m.max(v);
        }
    }
    let dist_sqr = |ind: &Individual| -> f64 {
        ind.objectives
            .as_array()
            .iter()
            .zip(maxima)
            .map(|(&v, m)| if m > 0.0 { (v / m) * (v / m) } else { 0.0 })
            .sum()
    };
    let mut best: Option<(usize, f64)> = None;
    for (i, ind) in front.iter().enumerate() {
        let d = dist_sqr(ind);
        if best.is_none_or(|(_, bd)| d < bd) {
            best = Some((i, d));
        }
    }
    best.map(|(i, _)| i)
}

/// Builds offspring `index` of `generation` from the current population.
///
/// All draws come from a stream private to this (generation, index) pair,
/// in a fixed order: two tournaments (two index draws each), one crossover
/// coin, then the crossover gene picks if the coin passed, then mutation.
fn make_offspring(
    pop: &[Individual],
    cfg: &SearchConfig,
    generation: usize,
    index: usize,
) -> Genome {
    let mut rng = seed::stream_rng(
        cfg.seed,
        &[seed::STREAM_VARIATION, generation as u64, index as u64],
    );
    let first = tournament_select(pop, &mut rng);
    let second = tournament_select(pop, &mut rng);
    let child = if rng.random::<f64>() < cfg.crossover_prob {
        pop[first].genome.crossover(&pop[second].genome, &mut rng)
    } else {
        pop[first].genome
    };
    child.mutate(cfg.mutation_prob, &mut rng)
}

/// Multiset of rank-0 objective signatures, as a sorted list.
fn front_signature(pop: &[Individual]) -> Vec<(u64, u64, u64)> {
    let mut sig: Vec<_> = pop
        .iter()
        .filter(|ind| ind.rank == 0)
        .map(|ind| ind.objectives.signature())
        .collect();
    sig.sort_unstable();
    sig
}

/// Elitist environmental selection: keep whole fronts while they fit, then
/// fill the remainder from the boundary front by descending crowding
/// distance (ties keep the earlier union index, so parents win over equally
/// crowded offspring).
fn select_survivors(
    union: &[Individual],
    fronts: &[Vec<usize>],
    pop_size: usize,
) -> Vec<Individual> {
    let mut survivors = Vec::with_capacity(pop_size);
    for front in fronts {
        if survivors.len() + front.len() <= pop_size {
            survivors.extend(front.iter().map(|&i| union[i]));
            if survivors.len() == pop_size {
                break;
            }
        } else {
            let mut boundary = front.clone();
            boundary.sort_by(|&a, &b| union[b].crowding.total_cmp(&union[a].crowding));
            survivors.extend(
                boundary[..pop_size - survivors.len()]
                    .iter()
                    .map(|&i| union[i]),
            );
            break;
        }
    }
    survivors
}

/// Runs the full search.
///
/// `evaluate` receives each generation's genomes as one batch and must
/// return one [`Evaluation`] per genome, in order. For a fixed
/// `cfg.seed` the evaluator must be a pure function of the genome;
/// under that precondition the whole result is deterministic.
///
/// # Panics
///
/// Panics if the evaluator returns the wrong number of results.
pub fn run_search<F>(cfg: &SearchConfig, mut evaluate: F) -> Result<SearchResult, BadSearchConfig>
where
    F: FnMut(&[Genome]) -> Vec<Evaluation>,
{
    cfg.validate()?;
    let p = cfg.pop_size;
    let mut failures = 0u64;
    let mut records = Vec::new();

    let mut evaluate_all = |genomes: &[Genome], failures: &mut u64| -> Vec<Individual> {
        let evals = evaluate(genomes);
        assert_eq!(
            evals.len(),
            genomes.len(),
            "evaluator must return one result per genome"
        );
        genomes
            .iter()
            .zip(evals)
            .map(|(&genome, e)| {
                if e.failed {
                    *failures += 1;
                }
                Individual {
                    genome,
                    objectives: e.objectives,
                    failed: e.failed,
                    rank: 0,
                    crowding: 0.0,
                }
            })
            .collect()
    };

    let mut init_rng = seed::stream_rng(cfg.seed, &[seed::STREAM_INIT]);
    let init_genomes: Vec<Genome> = (0..p).map(|_| Genome::sample(&mut init_rng)).collect();
    let mut population = evaluate_all(&init_genomes, &mut failures);
    sort_and_crowd(&mut population);
    records.extend(population.iter().map(|&individual| LogRecord {
        generation: 0,
        individual,
    }));

    let front_objectives = |pop: &[Individual]| -> Vec<Objectives> {
        pop.iter()
            .filter(|ind| ind.rank == 0)
            .map(|ind| ind.objectives)
            .collect()
    };

    let mut previous_front = front_signature(&population);
    let mut front_history = vec![front_objectives(&population)];
    let mut stagnant = 0usize;
    let mut generations_executed = 0usize;
    let mut stopped_early = false;

    for generation in 1..=cfg.generations {
        let offspring: Vec<Genome> = (0..p)
            .map(|index| make_offspring(&population, cfg, generation, index))
            .collect();
        let evaluated = evaluate_all(&offspring, &mut failures);
        generations_executed = generation;

        let mut union = population;
        union.extend(evaluated);
        let fronts = sort_and_crowd(&mut union);
        records.extend(union[p..].iter().map(|&individual| LogRecord {
            generation,
            individual,
        }));

        population = select_survivors(&union, &fronts, p);
        front_history.push(front_objectives(&population));

        let front = front_signature(&population);
        if front == previous_front {
            stagnant += 1;
        } else {
            stagnant = 0;
        }
        previous_front = front;
        if stagnant >= cfg.stagnation_patience {
            stopped_early = true;
            break;
        }
    }

    let pareto_front: Vec<Individual> = population
        .iter()
        .filter(|ind| ind.rank == 0)
        .copied()
        .collect();
    let mut order: Vec<usize> = (0..population.len()).collect();
    order.sort_by(|&a, &b| {
        population[a]
            .rank
            .cmp(&population[b].rank)
            .then(population[b].crowding.total_cmp(&population[a].crowding))
            .then(a.cmp(&b))
    });
    let top_k: Vec<Individual> = order
        .iter()
        .take(cfg.top_k.min(population.len()))
        .map(|&i| population[i])
        .collect();
    let compromise =
        pareto_front[compromise_index(&pareto_front).expect("front of a nonempty population")];

    Ok(SearchResult {
        records,
        population,
        pareto_front,
        top_k,
        compromise,
        front_history,
        generations_executed,
        stopped_early,
        failures,
    })
}
