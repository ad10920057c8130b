//! Guess scoring and selection.
//!
//! Every policy scores all codes of the game as candidate guesses (not just the
//! consistent ones) and picks the winner by strict precedence: highest score,
//! then a consistent guess over an inconsistent one, then the smallest index.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rules::{Code, Feedback, FeedbackTable, PartitionCounts};
use crate::scalar::Scalar;
use crate::symmetry::SymmetryGroup;

/// Feedback types of MM(4,6); the length of every weight vector.
pub const FEEDBACK_TYPES: usize = 14;
/// Turns covered by stage weights. Later turns reuse the last vector.
pub const STAGES: usize = 6;
/// Two scores within this absolute distance are treated as tied.
pub const SCORE_TIE_TOLERANCE: f64 = 1e-9;

// Candidate scoring fans out to the thread pool only for larger remaining sets.
const PARALLEL_MIN_REMAINING: usize = 256;
// Orbit reduction pays off only when scoring a candidate costs more than finding orbits.
pub(crate) const SYMMETRY_MIN_REMAINING: usize = 64;
// Up to this many remaining codes, buckets are found by sorting instead of counting.
const SMALL_REMAINING: usize = 16;

/// One positive utility per feedback type, in canonical feedback order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightVector<T>([T; FEEDBACK_TYPES]);

impl<T: Scalar> WeightVector<T> {
    pub fn new(values: [T; FEEDBACK_TYPES]) -> Result<Self> {
        for (i, v) in values.iter().enumerate() {
            if !(v.is_finite() && *v > T::zero()) {
                return Err(Error::InvalidWeights(format!(
                    "weight {i} is {v}; weights must be positive and finite"
                )));
            }
        }
        Ok(WeightVector(values))
    }

    pub fn from_slice(values: &[T]) -> Result<Self> {
        let arr: [T; FEEDBACK_TYPES] = values.try_into().map_err(|_| {
            Error::InvalidWeights(format!(
                "expected {FEEDBACK_TYPES} weights, got {}",
                values.len()
            ))
        })?;
        Self::new(arr)
    }

    /// All weights 1: plain Shannon entropy.
    pub fn uniform() -> Self {
        WeightVector([T::one(); FEEDBACK_TYPES])
    }

    pub fn as_slice(&self) -> &[T] {
        &self.0
    }

    pub fn get(&self, feedback_index: usize) -> T {
        self.0[feedback_index]
    }

    /// Multiplies every weight by `factor` (> 0).
    pub fn scaled(&self, factor: T) -> Result<Self> {
        Self::new(self.0.map(|w| w * factor))
    }
}

/// Six per-turn weight vectors; turns past the sixth reuse the sixth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StageWeights<T>([WeightVector<T>; STAGES]);

impl<T: Scalar> StageWeights<T> {
    pub fn new(per_turn: [WeightVector<T>; STAGES]) -> Self {
        StageWeights(per_turn)
    }

    pub fn from_vec(per_turn: Vec<WeightVector<T>>) -> Result<Self> {
        let n = per_turn.len();
        let arr: [WeightVector<T>; STAGES] = per_turn.try_into().map_err(|_| {
            Error::InvalidWeights(format!("expected {STAGES} stage vectors, got {n}"))
        })?;
        Ok(StageWeights(arr))
    }

    pub fn for_turn(&self, turn: u32) -> &WeightVector<T> {
        let t = (turn.max(1) as usize).min(STAGES);
        &self.0[t - 1]
    }

    pub fn turns(&self) -> &[WeightVector<T>; STAGES] {
        &self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BaselineKind {
    Shannon,
    KnuthMinimax,
    MostParts,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PolicyKind<T> {
    FixedWeight(WeightVector<T>),
    StageWeight(StageWeights<T>),
    Baseline(BaselineKind),
}

/// A complete guess-selection rule.
#[derive(Debug, Clone, PartialEq)]
pub struct Policy<T> {
    pub kind: PolicyKind<T>,
    pub forced_opening: Option<Code>,
    pub tie_tolerance: T,
}

impl<T: Scalar> Policy<T> {
    fn with_kind(kind: PolicyKind<T>) -> Self {
        Policy {
            kind,
            forced_opening: None,
            tie_tolerance: T::lit(SCORE_TIE_TOLERANCE),
        }
    }

    pub fn fixed(weights: WeightVector<T>) -> Self {
        Self::with_kind(PolicyKind::FixedWeight(weights))
    }

    pub fn staged(weights: StageWeights<T>) -> Self {
        Self::with_kind(PolicyKind::StageWeight(weights))
    }

    pub fn baseline(kind: BaselineKind) -> Self {
        Self::with_kind(PolicyKind::Baseline(kind))
    }

    pub fn shannon() -> Self {
        Self::baseline(BaselineKind::Shannon)
    }

    pub fn knuth() -> Self {
        Self::baseline(BaselineKind::KnuthMinimax)
    }

    pub fn most_parts() -> Self {
        Self::baseline(BaselineKind::MostParts)
    }

    pub fn with_forced_opening(mut self, opening: Code) -> Self {
        self.forced_opening = Some(opening);
        self
    }

    pub fn with_tie_tolerance(mut self, tolerance: T) -> Self {
        self.tie_tolerance = tolerance;
        self
    }

    fn weights_for_turn(&self, turn: u32) -> Option<&WeightVector<T>> {
        match &self.kind {
            PolicyKind::FixedWeight(w) => Some(w),
            PolicyKind::StageWeight(s) => Some(s.for_turn(turn)),
            PolicyKind::Baseline(_) => None,
        }
    }

    /// Score this policy assigns to a partition at `turn`.
    pub fn score(&self, counts: &PartitionCounts, turn: u32) -> Result<T> {
        match &self.kind {
            PolicyKind::Baseline(kind) => baseline_score(counts, *kind),
            _ => {
                let w = self.weights_for_turn(turn).expect("weighted policy");
                weighted_entropy_score(counts, w)
            }
        }
    }

    fn check_table(&self, table: &FeedbackTable) -> Result<()> {
        let fc = table.params().feedback_count();
        if !matches!(self.kind, PolicyKind::Baseline(_)) && fc != FEEDBACK_TYPES {
            return Err(Error::InvalidPolicy(format!(
                "weighted policies need {FEEDBACK_TYPES} feedback types, game has {fc}"
            )));
        }
        if let Some(o) = self.forced_opening {
            table.params().check(o)?;
        }
        Ok(())
    }
}

/// A selected guess with its score and whether it could itself be the secret.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoredGuess<T> {
    pub guess: Code,
    pub score: T,
    pub consistent: bool,
}

/// `p·log₂ p` for a bucket of `count` out of `total`. Callers skip empty buckets.
#[inline]
fn plogp<T: Scalar>(count: u32, total: u32) -> T {
    let p = T::from_u32(count).unwrap() / T::from_u32(total).unwrap();
    p * p.log2()
}

/// Weighted entropy `−Σ wᵢ pᵢ log₂ pᵢ` of a partition; empty buckets contribute nothing.
pub fn weighted_entropy_score<T: Scalar>(
    counts: &PartitionCounts,
    weights: &WeightVector<T>,
) -> Result<T> {
    if counts.total == 0 {
        return Err(Error::EmptyState);
    }
    if counts.counts.len() != FEEDBACK_TYPES {
        return Err(Error::InvalidWeights(format!(
            "{} partition buckets for {FEEDBACK_TYPES} weights",
            counts.counts.len()
        )));
    }
    let mut acc = T::zero();
    for (i, &c) in counts.counts.iter().enumerate() {
        if c > 0 {
            acc = acc + weights.get(i) * plogp::<T>(c, counts.total);
        }
    }
    Ok(-acc)
}

/// Score of one of the unweighted baselines; larger is better for all of them.
pub fn baseline_score<T: Scalar>(counts: &PartitionCounts, kind: BaselineKind) -> Result<T> {
    if counts.total == 0 {
        return Err(Error::EmptyState);
    }
    Ok(match kind {
        BaselineKind::Shannon => {
            // Same summation as the weighted score so all-ones weights agree bit for bit.
            let mut acc = T::zero();
            for &c in counts.counts.iter().filter(|&&c| c > 0) {
                acc = acc + T::one() * plogp::<T>(c, counts.total);
            }
            -acc
        }
        BaselineKind::KnuthMinimax => -T::from_u32(counts.largest()).unwrap(),
        BaselineKind::MostParts => T::from_usize(counts.non_empty()).unwrap(),
    })
}

/// Codes of `remaining` that answer `guess` with `observed`, in the input order.
pub fn filter_remaining(
    table: &FeedbackTable,
    remaining: &[Code],
    guess: Code,
    observed: Feedback,
) -> Vec<Code> {
    let idx = table.params().feedback_index(observed) as u8;
    let row = table.row(guess);
    remaining
        .iter()
        .copied()
        .filter(|s| row[s.index()] == idx)
        .collect()
}

/// Picks the next guess for `remaining` (sorted ascending) at `turn`.
pub fn select_guess<T: Scalar>(
    table: &FeedbackTable,
    remaining: &[Code],
    turn: u32,
    policy: &Policy<T>,
) -> Result<ScoredGuess<T>> {
    select_guess_with(table, remaining, turn, policy, None)
}

/// [`select_guess`] given a group of relabellings that fix every earlier guess.
/// Only one candidate per orbit is scored; the result is identical.
pub(crate) fn select_guess_with<T: Scalar>(
    table: &FeedbackTable,
    remaining: &[Code],
    turn: u32,
    policy: &Policy<T>,
    symmetry: Option<&SymmetryGroup>,
) -> Result<ScoredGuess<T>> {
    if remaining.is_empty() {
        return Err(Error::EmptyState);
    }
    policy.check_table(table)?;
    let mut member = vec![false; table.code_count()];
    for s in remaining {
        member[s.index()] = true;
    }
    if turn == 1 {
        if let Some(opening) = policy.forced_opening {
            let counts = table.partition_counts(opening, remaining)?;
            return Ok(ScoredGuess {
                guess: opening,
                score: policy.score(&counts, turn)?,
                consistent: member[opening.index()],
            });
        }
    }

    if let [only] = remaining {
        // Every candidate yields one bucket and the same score; the member wins the tie.
        let counts = table.partition_counts(*only, remaining)?;
        return Ok(ScoredGuess {
            guess: *only,
            score: policy.score(&counts, turn)?,
            consistent: true,
        });
    }

    let scorer = CandidateScorer::new(policy, turn, remaining.len() as u32, table);
    let tol = policy.tie_tolerance;

    if let Some(group) = symmetry {
        if group.order() > 1 && remaining.len() >= SYMMETRY_MIN_REMAINING {
            let reps = group.orbit_representatives();
            let scores = scorer.score_list(table, remaining, reps);
            // With no two distinct scores inside the tolerance, the tolerant scan
            // reduces to exact comparison, so skipped orbit members cannot matter.
            if !has_near_tie(&scores, tol) {
                let mut best: Option<ScoredGuess<T>> = None;
                for (&g, &score) in reps.iter().zip(&scores) {
                    let consistent = member[g.index()];
                    let better = best.is_none_or(|b| {
                        score > b.score || (score == b.score && consistent && !b.consistent)
                    });
                    if better {
                        best = Some(ScoredGuess {
                            guess: g,
                            score,
                            consistent,
                        });
                    }
                }
                return Ok(best.expect("at least one orbit"));
            }
        }
    }

    let scores = scorer.score_all(table, remaining);
    // Ascending scan; the incumbent only yields to a strictly better candidate.
    let mut best = ScoredGuess {
        guess: Code(0),
        score: scores[0],
        consistent: member[0],
    };
    for (g, &score) in scores.iter().enumerate().skip(1) {
        let consistent = member[g];
        let better = if score > best.score + tol {
            true
        } else if (score - best.score).abs() <= tol {
            consistent && !best.consistent
        } else {
            false
        };
        if better {
            best = ScoredGuess {
                guess: Code(g as u32),
                score,
                consistent,
            };
        }
    }
    Ok(best)
}

fn has_near_tie<T: Scalar>(scores: &[T], tol: T) -> bool {
    if tol <= T::zero() {
        return false;
    }
    let mut sorted = scores.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite scores"));
    sorted.windows(2).any(|w| {
        let d = w[1] - w[0];
        d > T::zero() && d <= tol
    })
}

/// Scores every candidate against one remaining set.
///
/// Entropy terms `p·log₂ p` are tabulated per bucket size and buckets are
/// always visited in ascending feedback order, so each score is bit-identical
/// to [`weighted_entropy_score`] / [`baseline_score`] on the same partition.
struct CandidateScorer<T> {
    mode: ScoreMode<T>,
    feedbacks: usize,
}

enum ScoreMode<T> {
    Entropy { weights: Vec<T>, plogp: Vec<T> },
    Knuth,
    MostParts,
}

// Candidates per block of the dense counting pass.
const BLOCK: usize = 128;

impl<T: Scalar> CandidateScorer<T> {
    fn new(policy: &Policy<T>, turn: u32, total: u32, table: &FeedbackTable) -> Self {
        let feedbacks = table.params().feedback_count();
        let tabulate = || {
            let mut v = vec![T::zero(); total as usize + 1];
            for c in 1..=total {
                v[c as usize] = plogp::<T>(c, total);
            }
            v
        };
        let mode = match &policy.kind {
            PolicyKind::FixedWeight(_) | PolicyKind::StageWeight(_) => ScoreMode::Entropy {
                weights: policy.weights_for_turn(turn).expect("weighted policy").0.to_vec(),
                plogp: tabulate(),
            },
            // Multiplying by one is exact, so this matches the baseline summation.
            PolicyKind::Baseline(BaselineKind::Shannon) => ScoreMode::Entropy {
                weights: vec![T::one(); feedbacks],
                plogp: tabulate(),
            },
            PolicyKind::Baseline(BaselineKind::KnuthMinimax) => ScoreMode::Knuth,
            PolicyKind::Baseline(BaselineKind::MostParts) => ScoreMode::MostParts,
        };
        CandidateScorer { mode, feedbacks }
    }

    fn score_all(&self, table: &FeedbackTable, remaining: &[Code]) -> Vec<T> {
        let n = table.code_count();
        if remaining.len() <= SMALL_REMAINING {
            if self.feedbacks <= 16 {
                return self.score_sparse16(table, remaining);
            }
            let mut scratch = [0u32; 128];
            return (0..n)
                .map(|g| self.score_sparse(table.row(Code(g as u32)), remaining, &mut scratch))
                .collect();
        }
        // Dense pass over blocks of candidates. Mark is symmetric, so the row of
        // a remaining code lists its feedback against every candidate.
        let block = |start: usize| -> Vec<T> {
            let end = (start + BLOCK).min(n);
            let f = self.feedbacks;
            let mut counts = vec![0u32; (end - start) * f];
            for s in remaining {
                let col = &table.row(*s)[start..end];
                for (j, &fb) in col.iter().enumerate() {
                    counts[j * f + fb as usize] += 1;
                }
            }
            counts.chunks_exact(f).map(|c| self.score_dense(c)).collect()
        };
        let starts: Vec<usize> = (0..n).step_by(BLOCK).collect();
        let parts: Vec<Vec<T>> = if remaining.len() >= PARALLEL_MIN_REMAINING {
            starts.into_par_iter().map(block).collect()
        } else {
            starts.into_iter().map(block).collect()
        };
        parts.concat()
    }

    /// Dense scoring of an explicit candidate list.
    fn score_list(&self, table: &FeedbackTable, remaining: &[Code], cands: &[Code]) -> Vec<T> {
        let f = self.feedbacks;
        let block = |chunk: &[Code]| -> Vec<T> {
            let mut counts = vec![0u32; chunk.len() * f];
            for s in remaining {
                let col = table.row(*s);
                for (j, g) in chunk.iter().enumerate() {
                    counts[j * f + col[g.index()] as usize] += 1;
                }
            }
            counts.chunks_exact(f).map(|c| self.score_dense(c)).collect()
        };
        let parts: Vec<Vec<T>> = if remaining.len() >= PARALLEL_MIN_REMAINING {
            cands.par_chunks(BLOCK).map(block).collect()
        } else {
            cands.chunks(BLOCK).map(block).collect()
        };
        parts.concat()
    }

    fn score_dense(&self, counts: &[u32]) -> T {
        match &self.mode {
            ScoreMode::Entropy { weights, plogp } => {
                let mut acc = T::zero();
                for (i, &c) in counts.iter().enumerate() {
                    if c > 0 {
                        acc = acc + weights[i] * plogp[c as usize];
                    }
                }
                -acc
            }
            ScoreMode::Knuth => -T::from_u32(counts.iter().copied().max().unwrap_or(0)).unwrap(),
            ScoreMode::MostParts => T::from_usize(counts.iter().filter(|&&c| c > 0).count()).unwrap(),
        }
    }

    /// [`Self::score_sparse`] for games with at most 16 feedback types, reading
    /// the rows of the remaining codes sequentially.
    fn score_sparse16(&self, table: &FeedbackTable, remaining: &[Code]) -> Vec<T> {
        let n = table.code_count();
        let cols: Vec<&[u8]> = remaining.iter().map(|s| table.row(*s)).collect();
        let (weights, plogp) = match &self.mode {
            ScoreMode::Entropy { weights, plogp } => {
                let mut w = [T::zero(); 16];
                w[..weights.len()].copy_from_slice(weights);
                (w, plogp.as_slice())
            }
            _ => ([T::zero(); 16], &[][..]),
        };
        let mut scores = Vec::with_capacity(n);
        let mut counts = [0u16; 16];
        for g in 0..n {
            let mut touched: u32 = 0;
            for col in &cols {
                let fb = (col[g] & 15) as usize;
                counts[fb] += 1;
                touched |= 1 << fb;
            }
            let score = match self.mode {
                ScoreMode::Entropy { .. } => {
                    let mut acc = T::zero();
                    while touched != 0 {
                        let i = touched.trailing_zeros() as usize & 15;
                        touched &= touched - 1;
                        acc = acc + weights[i] * plogp[counts[i] as usize];
                        counts[i] = 0;
                    }
                    -acc
                }
                ScoreMode::Knuth => {
                    let mut largest = 0;
                    while touched != 0 {
                        let i = touched.trailing_zeros() as usize & 15;
                        touched &= touched - 1;
                        largest = largest.max(counts[i]);
                        counts[i] = 0;
                    }
                    -T::from_u16(largest).unwrap()
                }
                ScoreMode::MostParts => {
                    let parts = touched.count_ones();
                    counts = [0; 16];
                    T::from_u32(parts).unwrap()
                }
            };
            scores.push(score);
        }
        scores
    }

    /// Small remaining sets: count into `scratch`, then visit the touched
    /// buckets in ascending order via a bitmask, clearing them for the next call.
    fn score_sparse(&self, row: &[u8], remaining: &[Code], scratch: &mut [u32; 128]) -> T {
        let mut touched: u128 = 0;
        for s in remaining {
            let fb = row[s.index()];
            scratch[fb as usize] += 1;
            touched |= 1u128 << fb;
        }
        let mut acc = T::zero();
        let mut parts = 0u32;
        let mut largest = 0u32;
        while touched != 0 {
            let i = touched.trailing_zeros() as usize;
            touched &= touched - 1;
            let c = scratch[i];
            scratch[i] = 0;
            parts += 1;
            largest = largest.max(c);
            if let ScoreMode::Entropy { weights, plogp } = &self.mode {
                acc = acc + weights[i] * plogp[c as usize];
            }
        }
        match &self.mode {
            ScoreMode::Entropy { .. } => -acc,
            ScoreMode::Knuth => -T::from_u32(largest).unwrap(),
            ScoreMode::MostParts => T::from_u32(parts).unwrap(),
        }
    }
}
