//! Genetic search over weight vectors for the standard game.
//!
//! A genome is a flat list of genes in `[0.1, 1.0]`. Fixed mode has one gene
//! per feedback type; staged mode concatenates the turn 1 to 6 vectors, and
//! drops turn 1 when the opening is forced (the turn-1 vector is never
//! consulted then).
//!
//! Every random draw comes from a ChaCha stream keyed by the master seed, the
//! generation and the population slot, so parallel fitness evaluation cannot
//! change a run.

use std::collections::HashMap;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::heuristics::{Policy, StageWeights, WeightVector, FEEDBACK_TYPES, STAGES};
use crate::rules::{FeedbackTable, GameParams};
use crate::strategy::{solve_turns, DEFAULT_MAX_TURNS};
use crate::weights::{WeightFile, STAGED_OPENING};

pub const GENE_MIN: f64 = 0.1;
pub const GENE_MAX: f64 = 1.0;

/// Extra turns charged per unsolved game on top of `max_turns`.
pub const DEFAULT_UNSOLVED_PENALTY: u32 = 5;

// Fitness memo entries kept before the memo is flushed.
const MEMO_LIMIT: usize = 20_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GaMode {
    Fixed,
    Staged,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaConfig {
    pub population_size: usize,
    pub elite_count: usize,
    pub tournament_size: usize,
    /// Chance per gene of taking it from the second parent.
    pub crossover_rate: f64,
    /// Chance per gene of a mutation step.
    pub mutation_rate: f64,
    /// Mutations add a uniform draw from `[-mutation_step, mutation_step]`.
    pub mutation_step: f64,
    pub stagnation_limit: u32,
    pub max_generations: u32,
    pub seed: u64,
    pub mode: GaMode,
    pub force_opening: bool,
    pub max_turns: u32,
    pub unsolved_penalty: u32,
}

impl Default for GaConfig {
    fn default() -> Self {
        GaConfig {
            population_size: 64,
            elite_count: 10,
            tournament_size: 3,
            crossover_rate: 0.5,
            mutation_rate: 0.05,
            mutation_step: 0.1,
            stagnation_limit: 250,
            max_generations: 50_000,
            seed: 0,
            mode: GaMode::Staged,
            force_opening: true,
            max_turns: DEFAULT_MAX_TURNS,
            unsolved_penalty: DEFAULT_UNSOLVED_PENALTY,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if self.population_size < 2 {
            return fail("population size must be at least 2");
        }
        if self.elite_count >= self.population_size {
            return fail("elite count must be below the population size");
        }
        if self.tournament_size == 0 {
            return fail("tournament size must be positive");
        }
        for (name, p) in [
            ("crossover rate", self.crossover_rate),
            ("mutation rate", self.mutation_rate),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidConfig(format!("{name} must lie in [0, 1]")));
            }
        }
        if !(self.mutation_step.is_finite() && self.mutation_step >= 0.0) {
            return fail("mutation step must be a non-negative number");
        }
        if self.stagnation_limit == 0 {
            return fail("stagnation limit must be at least 1");
        }
        if self.max_turns == 0 {
            return fail("max turns must be at least 1");
        }
        Ok(())
    }

    /// Genes per genome.
    pub fn genome_len(&self) -> usize {
        match (self.mode, self.force_opening) {
            (GaMode::Fixed, _) => FEEDBACK_TYPES,
            (GaMode::Staged, false) => FEEDBACK_TYPES * STAGES,
            (GaMode::Staged, true) => FEEDBACK_TYPES * (STAGES - 1),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Genome(Vec<f64>);

impl Genome {
    /// Checks bounds only; the length is checked against a config on use.
    pub fn new(genes: Vec<f64>) -> Result<Self> {
        if let Some((i, g)) = genes
            .iter()
            .enumerate()
            .find(|(_, g)| !(GENE_MIN..=GENE_MAX).contains(*g))
        {
            return Err(Error::InvalidGenome(format!(
                "gene {i} = {g} outside [{GENE_MIN}, {GENE_MAX}]"
            )));
        }
        Ok(Genome(genes))
    }

    pub fn genes(&self) -> &[f64] {
        &self.0
    }

    pub fn random<R: Rng>(len: usize, rng: &mut R) -> Self {
        Genome((0..len).map(|_| rng.gen_range(GENE_MIN..=GENE_MAX)).collect())
    }

    /// The genome encoding `wf` under `config`'s layout.
    pub fn from_weights(wf: &WeightFile<f64>, config: &GaConfig) -> Result<Self> {
        let genes: Vec<f64> = match (wf, config.mode) {
            (WeightFile::Fixed(w), GaMode::Fixed) => w.as_slice().to_vec(),
            (WeightFile::Staged(s), GaMode::Staged) => {
                let skip = usize::from(config.force_opening);
                s.turns()[skip..]
                    .iter()
                    .flat_map(|w| w.as_slice().iter().copied())
                    .collect()
            }
            _ => {
                return Err(Error::InvalidGenome(format!(
                    "{} weights do not fit a {:?} run",
                    wf.mode(),
                    config.mode
                )))
            }
        };
        Genome::new(genes)
    }

    fn check_len(&self, config: &GaConfig) -> Result<()> {
        if self.0.len() != config.genome_len() {
            return Err(Error::InvalidGenome(format!(
                "expected {} genes, found {}",
                config.genome_len(),
                self.0.len()
            )));
        }
        Ok(())
    }

    pub fn to_weights(&self, config: &GaConfig) -> Result<WeightFile<f64>> {
        self.check_len(config)?;
        Ok(match config.mode {
            GaMode::Fixed => WeightFile::Fixed(WeightVector::from_slice(&self.0)?),
            GaMode::Staged => {
                let mut turns = Vec::with_capacity(STAGES);
                if config.force_opening {
                    turns.push(WeightVector::uniform());
                }
                for chunk in self.0.chunks(FEEDBACK_TYPES) {
                    turns.push(WeightVector::from_slice(chunk)?);
                }
                WeightFile::Staged(StageWeights::from_vec(turns)?)
            }
        })
    }

    pub fn to_policy(&self, config: &GaConfig) -> Result<Policy<f64>> {
        let policy = self.to_weights(config)?.to_policy();
        Ok(if config.force_opening {
            let opening = GameParams::STANDARD.parse_code(STAGED_OPENING)?;
            policy.with_forced_opening(opening)
        } else {
            policy
        })
    }

    fn key(&self) -> Vec<u64> {
        self.0.iter().map(|g| g.to_bits()).collect()
    }
}

/// Outcome of playing all secrets with one genome.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitnessRecord {
    /// Sum of turns over all games, unsolved games charged `max_turns + unsolved_penalty`.
    pub total_guesses: u64,
    pub average: f64,
    pub maximum: u32,
}

impl FitnessRecord {
    /// Ordering key; lower is better.
    pub fn key(&self) -> (u64, u32) {
        (self.total_guesses, self.maximum)
    }
}

pub fn fitness(genome: &Genome, config: &GaConfig) -> Result<FitnessRecord> {
    Genome::new(genome.0.clone())?;
    let policy = genome.to_policy(config)?;
    let table = FeedbackTable::standard();
    let turns = solve_turns(table, &policy, config.max_turns)?;
    let charge = config.max_turns + config.unsolved_penalty;
    let mut total = 0u64;
    let mut maximum = 0u32;
    for t in &turns {
        let t = t.unwrap_or(charge);
        total += t as u64;
        maximum = maximum.max(t);
    }
    Ok(FitnessRecord {
        total_guesses: total,
        average: total as f64 / turns.len() as f64,
        maximum,
    })
}

// Stream domains, so the same (generation, slot) never shares draws across uses.
const DOMAIN_SEED: u64 = 0;
const DOMAIN_BREED: u64 = 1;
const DOMAIN_RESTART: u64 = 2;

fn slot_rng(seed: u64, domain: u64, generation: u32, slot: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((domain << 56) | ((generation as u64) << 20) | slot as u64);
    rng
}

/// Anchors first, then random genomes up to the population size.
pub fn seed_population(config: &GaConfig, anchors: &[Genome]) -> Result<Vec<Genome>> {
    config.validate()?;
    if anchors.len() > config.population_size {
        return Err(Error::InvalidConfig(format!(
            "{} anchors exceed the population size {}",
            anchors.len(),
            config.population_size
        )));
    }
    let mut population = Vec::with_capacity(config.population_size);
    for a in anchors {
        let a = Genome::new(a.0.clone())?;
        a.check_len(config)?;
        population.push(a);
    }
    for slot in anchors.len()..config.population_size {
        let mut rng = slot_rng(config.seed, DOMAIN_SEED, 0, slot);
        population.push(Genome::random(config.genome_len(), &mut rng));
    }
    Ok(population)
}

/// Best fitness after one generation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenerationRecord {
    pub generation: u32,
    pub best: FitnessRecord,
    /// The non-elite genomes were re-randomized after this generation.
    pub restarted: bool,
}

/// A population ranked best first.
#[derive(Debug, Clone, PartialEq)]
pub struct Ranked {
    pub generation: u32,
    pub members: Vec<(Genome, FitnessRecord)>,
}

impl Ranked {
    pub fn best(&self) -> &(Genome, FitnessRecord) {
        &self.members[0]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evolution {
    pub best: Genome,
    pub best_fitness: FitnessRecord,
    /// One entry per generation, starting with the initial population.
    pub history: Vec<GenerationRecord>,
    pub final_population: Ranked,
}

struct Evaluator<'a> {
    config: &'a GaConfig,
    memo: HashMap<Vec<u64>, FitnessRecord>,
}

impl Evaluator<'_> {
    fn evaluate(&mut self, genomes: Vec<Genome>) -> Result<Vec<(Genome, FitnessRecord)>> {
        let known: Vec<Option<FitnessRecord>> =
            genomes.iter().map(|g| self.memo.get(&g.key()).copied()).collect();
        let fresh: Vec<FitnessRecord> = genomes
            .par_iter()
            .zip(&known)
            .filter(|(_, k)| k.is_none())
            .map(|(g, _)| fitness(g, self.config))
            .collect::<Result<_>>()?;
        if self.memo.len() + fresh.len() > MEMO_LIMIT {
            self.memo.clear();
        }
        let mut fresh = fresh.into_iter();
        Ok(genomes
            .into_iter()
            .zip(known)
            .map(|(g, k)| {
                let f = k.unwrap_or_else(|| {
                    let f = fresh.next().expect("one result per miss");
                    self.memo.insert(g.key(), f);
                    f
                });
                (g, f)
            })
            .collect())
    }
}

// Stable, so equal records keep slot order.
fn rank(members: &mut [(Genome, FitnessRecord)]) {
    members.sort_by_key(|(_, f)| f.key());
}

fn tournament<'p, R: Rng>(ranked: &'p [(Genome, FitnessRecord)], size: usize, rng: &mut R) -> &'p Genome {
    let pick = (0..size)
        .map(|_| rng.gen_range(0..ranked.len()))
        .min()
        .expect("tournament size is positive");
    &ranked[pick].0
}

fn offspring<R: Rng>(a: &Genome, b: &Genome, config: &GaConfig, rng: &mut R) -> Genome {
    let genes = a
        .0
        .iter()
        .zip(&b.0)
        .map(|(&x, &y)| {
            let mut g = if rng.gen_bool(config.crossover_rate) { y } else { x };
            if rng.gen_bool(config.mutation_rate) {
                let step = config.mutation_step;
                g = (g + rng.gen_range(-step..=step)).clamp(GENE_MIN, GENE_MAX);
            }
            g
        })
        .collect();
    Genome(genes)
}

/// Runs the genetic algorithm; `initial` seeds generation 0 as anchors.
pub fn evolve(config: &GaConfig, initial: &[Genome]) -> Result<Evolution> {
    evolve_with(config, initial, |_, _| Ok(()))
}

/// Like [`evolve`], calling `observe` after every generation with its record
/// and ranked population.
pub fn evolve_with<F>(config: &GaConfig, initial: &[Genome], mut observe: F) -> Result<Evolution>
where
    F: FnMut(&GenerationRecord, &Ranked) -> Result<()>,
{
    let population = seed_population(config, initial)?;
    resume_with(config, 0, population, &mut observe)
}

/// Continues a run from a checkpointed population, treating it as `generation`.
pub fn resume_with<F>(
    config: &GaConfig,
    generation: u32,
    population: Vec<Genome>,
    mut observe: F,
) -> Result<Evolution>
where
    F: FnMut(&GenerationRecord, &Ranked) -> Result<()>,
{
    config.validate()?;
    if population.len() != config.population_size {
        return Err(Error::InvalidConfig(format!(
            "population has {} genomes, expected {}",
            population.len(),
            config.population_size
        )));
    }
    for g in &population {
        Genome::new(g.0.clone())?;
        g.check_len(config)?;
    }
    let mut eval = Evaluator {
        config,
        memo: HashMap::new(),
    };
    let mut members = eval.evaluate(population)?;
    rank(&mut members);
    let mut ranked = Ranked {
        generation,
        members,
    };
    let mut best = ranked.best().clone();
    let mut history = Vec::new();
    let mut stagnant = 0u32;

    let record = GenerationRecord {
        generation,
        best: best.1,
        restarted: false,
    };
    observe(&record, &ranked)?;
    history.push(record);

    let last = generation.saturating_add(config.max_generations);
    for g in generation + 1..=last {
        let elites = ranked.members[..config.elite_count].to_vec();
        let children: Vec<Genome> = (config.elite_count..config.population_size)
            .map(|slot| {
                let mut rng = slot_rng(config.seed, DOMAIN_BREED, g, slot);
                let a = tournament(&ranked.members, config.tournament_size, &mut rng);
                let b = tournament(&ranked.members, config.tournament_size, &mut rng);
                offspring(a, b, config, &mut rng)
            })
            .collect();
        let mut members = elites;
        members.extend(eval.evaluate(children)?);
        rank(&mut members);

        if members[0].1.key() < best.1.key() {
            best = members[0].clone();
            stagnant = 0;
        } else {
            stagnant += 1;
        }
        let restarted = stagnant >= config.stagnation_limit;
        if restarted {
            stagnant = 0;
            members.truncate(config.elite_count);
            let fresh: Vec<Genome> = (config.elite_count..config.population_size)
                .map(|slot| {
                    let mut rng = slot_rng(config.seed, DOMAIN_RESTART, g, slot);
                    Genome::random(config.genome_len(), &mut rng)
                })
                .collect();
            members.extend(eval.evaluate(fresh)?);
            rank(&mut members);
        }
        ranked = Ranked {
            generation: g,
            members,
        };
        let record = GenerationRecord {
            generation: g,
            best: best.1,
            restarted,
        };
        observe(&record, &ranked)?;
        history.push(record);
    }

    Ok(Evolution {
        best: best.0,
        best_fitness: best.1,
        history,
        final_population: ranked,
    })
}

pub const PROGRESS_HEADER: &str = "generation,bestTotalGuesses,bestAverage,bestMax";

pub fn progress_line(record: &GenerationRecord) -> String {
    format!(
        "{},{},{:.4},{}",
        record.generation, record.best.total_guesses, record.best.average, record.best.maximum
    )
}

/// Checkpoint text: a `generation <g> seed <s>` line, then one genome per line, best first.
pub fn write_checkpoint(ranked: &Ranked, seed: u64) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "generation {} seed {}", ranked.generation, seed);
    for (g, _) in &ranked.members {
        let line: Vec<String> = g.0.iter().map(|v| format!("{v:?}")).collect();
        let _ = writeln!(out, "{}", line.join(" "));
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub generation: u32,
    pub seed: u64,
    pub population: Vec<Genome>,
}

pub fn parse_checkpoint(text: &str) -> Result<Checkpoint> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        message: "empty checkpoint".into(),
    })?;
    let bad_header = || Error::Parse {
        line: 1,
        message: "expected `generation <g> seed <s>`".into(),
    };
    let (generation, seed) = match header.split_whitespace().collect::<Vec<_>>()[..] {
        ["generation", g, "seed", s] => (
            g.parse().map_err(|_| bad_header())?,
            s.parse().map_err(|_| bad_header())?,
        ),
        _ => return Err(bad_header()),
    };
    let mut population = Vec::new();
    for (i, line) in lines {
        let genes = line
            .split_whitespace()
            .map(|t| t.parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Parse {
                line: i + 1,
                message: e.to_string(),
            })?;
        population.push(Genome::new(genes).map_err(|e| Error::Parse {
            line: i + 1,
            message: e.to_string(),
        })?);
    }
    Ok(Checkpoint {
        generation,
        seed,
        population,
    })
}
