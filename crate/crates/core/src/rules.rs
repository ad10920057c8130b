//! Game mechanics for MM(n,c): code indexing, the bulls/cows marker, feedback
//! enumeration and partition counting.

use std::fmt;
use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Upper bound on the number of positions; keeps peg buffers on the stack.
pub const MAX_POSITIONS: usize = 12;
/// Upper bound on the number of colors.
pub const MAX_COLORS: usize = 64;
/// Default budget for a materialized feedback table (entries = codes²).
pub const DEFAULT_TABLE_BUDGET: u64 = 1 << 26;

/// Shape of a Mastermind game: `positions` pegs drawn from `colors` colors, repetition allowed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GameParams {
    positions: u8,
    colors: u8,
}

impl GameParams {
    /// The standard MM(4,6) game.
    pub const STANDARD: GameParams = GameParams {
        positions: 4,
        colors: 6,
    };

    pub fn new(positions: usize, colors: usize) -> Result<Self> {
        if positions == 0 || positions > MAX_POSITIONS {
            return Err(Error::InvalidParams(format!(
                "position count {positions} outside 1..={MAX_POSITIONS}"
            )));
        }
        if colors == 0 || colors > MAX_COLORS {
            return Err(Error::InvalidParams(format!(
                "color count {colors} outside 1..={MAX_COLORS}"
            )));
        }
        let fits = (colors as u64)
            .checked_pow(positions as u32)
            .is_some_and(|n| n <= u32::MAX as u64);
        if !fits {
            return Err(Error::InvalidParams(format!(
                "{colors}^{positions} codes do not fit a 32-bit index"
            )));
        }
        Ok(GameParams {
            positions: positions as u8,
            colors: colors as u8,
        })
    }

    pub fn positions(&self) -> usize {
        self.positions as usize
    }

    pub fn colors(&self) -> usize {
        self.colors as usize
    }

    /// Number of codes, `c^n`.
    pub fn code_count(&self) -> usize {
        self.colors().pow(self.positions as u32)
    }

    /// Number of attainable feedback values, `n(n+3)/2`.
    pub fn feedback_count(&self) -> usize {
        let n = self.positions();
        n * (n + 3) / 2
    }

    /// Iterator over every code in ascending index order.
    pub fn codes(&self) -> impl DoubleEndedIterator<Item = Code> + ExactSizeIterator {
        (0..self.code_count() as u32).map(Code)
    }

    pub fn encode(&self, pegs: &[u8]) -> Result<Code> {
        if pegs.len() != self.positions() {
            return Err(Error::InvalidCode(format!(
                "expected {} pegs, got {}",
                self.positions(),
                pegs.len()
            )));
        }
        let mut index = 0u32;
        for &p in pegs {
            if p >= self.colors {
                return Err(Error::InvalidCode(format!(
                    "peg color {p} outside 0..{}",
                    self.colors
                )));
            }
            index = index * self.colors as u32 + p as u32;
        }
        Ok(Code(index))
    }

    pub fn decode(&self, code: Code) -> Result<Vec<u8>> {
        self.check(code)?;
        Ok(self.pegs(code).as_slice().to_vec())
    }

    pub fn check(&self, code: Code) -> Result<()> {
        if (code.0 as usize) < self.code_count() {
            Ok(())
        } else {
            Err(Error::InvalidCode(format!(
                "index {} outside 0..{}",
                code.0,
                self.code_count()
            )))
        }
    }

    fn pegs(&self, code: Code) -> Pegs {
        let mut pegs = Pegs {
            buf: [0; MAX_POSITIONS],
            len: self.positions(),
        };
        let c = self.colors as u32;
        let mut rest = code.0;
        for slot in pegs.buf[..pegs.len].iter_mut().rev() {
            *slot = (rest % c) as u8;
            rest /= c;
        }
        pegs
    }

    /// Parses the 1-based digit notation (`"1123"`). Only games with at most nine colors have one.
    pub fn parse_code(&self, text: &str) -> Result<Code> {
        if self.colors > 9 {
            return Err(Error::InvalidCode(format!(
                "digit notation needs at most 9 colors, game has {}",
                self.colors
            )));
        }
        let pegs = text
            .trim()
            .chars()
            .map(|ch| match ch.to_digit(10) {
                Some(d) if d >= 1 => Ok((d - 1) as u8),
                _ => Err(Error::InvalidCode(format!("`{text}`: `{ch}` is not a color digit"))),
            })
            .collect::<Result<Vec<u8>>>()?;
        self.encode(&pegs)
    }

    /// Formats a code in 1-based digit notation.
    pub fn format_code(&self, code: Code) -> String {
        self.pegs(code)
            .as_slice()
            .iter()
            .map(|&p| char::from_digit(p as u32 + 1, 36).unwrap_or('?'))
            .collect()
    }

    pub fn feedback(&self, bulls: u8, cows: u8) -> Result<Feedback> {
        let n = self.positions;
        if bulls as usize + cows as usize > n as usize {
            return Err(Error::InvalidFeedback(format!(
                "{bulls} bulls and {cows} cows exceed {n} positions"
            )));
        }
        if bulls + 1 == n && cows == 1 {
            return Err(Error::InvalidFeedback(format!(
                "{bulls} bulls and 1 cow is impossible: the last peg cannot be misplaced alone"
            )));
        }
        Ok(Feedback { bulls, cows })
    }

    /// The all-bulls feedback that ends a game.
    pub fn win(&self) -> Feedback {
        Feedback {
            bulls: self.positions,
            cows: 0,
        }
    }

    /// Canonical index: ascending bulls, then ascending cows.
    pub fn feedback_index(&self, fb: Feedback) -> usize {
        let n = self.positions();
        let b = fb.bulls as usize;
        let offset: usize = (0..b).map(|x| cows_options(n, x)).sum();
        offset + fb.cows as usize
    }

    pub fn feedback_at(&self, index: usize) -> Result<Feedback> {
        self.all_feedbacks()
            .nth(index)
            .ok_or_else(|| Error::InvalidFeedback(format!("feedback index {index} out of range")))
    }

    /// All attainable feedbacks in canonical order.
    pub fn all_feedbacks(&self) -> impl Iterator<Item = Feedback> {
        let n = self.positions;
        (0..=n).flat_map(move |b| {
            (0..cows_options(n as usize, b as usize) as u8).map(move |c| Feedback { bulls: b, cows: c })
        })
    }

    /// Bulls and cows of guess `g` against secret `s`.
    pub fn mark(&self, g: Code, s: Code) -> Feedback {
        let gp = self.pegs(g);
        let sp = self.pegs(s);
        let mut bulls = 0u8;
        let mut in_guess = [0u8; MAX_COLORS];
        let mut in_secret = [0u8; MAX_COLORS];
        for (&a, &b) in gp.as_slice().iter().zip(sp.as_slice()) {
            if a == b {
                bulls += 1;
            }
            in_guess[a as usize] += 1;
            in_secret[b as usize] += 1;
        }
        let common: u8 = in_guess[..self.colors()]
            .iter()
            .zip(&in_secret[..self.colors()])
            .map(|(&x, &y)| x.min(y))
            .sum();
        Feedback {
            bulls,
            cows: common - bulls,
        }
    }

    /// Counts how `remaining` splits under guess `g`.
    pub fn partition_counts(&self, g: Code, remaining: &[Code]) -> Result<PartitionCounts> {
        if remaining.is_empty() {
            return Err(Error::EmptyState);
        }
        let mut counts = vec![0u32; self.feedback_count()];
        for &s in remaining {
            counts[self.feedback_index(self.mark(g, s))] += 1;
        }
        Ok(PartitionCounts {
            counts,
            total: remaining.len() as u32,
        })
    }
}

fn cows_options(n: usize, bulls: usize) -> usize {
    if bulls + 1 == n || bulls == n {
        1
    } else {
        n - bulls + 1
    }
}

struct Pegs {
    buf: [u8; MAX_POSITIONS],
    len: usize,
}

impl Pegs {
    fn as_slice(&self) -> &[u8] {
        &self.buf[..self.len]
    }
}

/// A code, identified by its mixed-radix index (first peg most significant).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Code(pub u32);

impl Code {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// A bulls/cows response.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Feedback {
    pub bulls: u8,
    pub cows: u8,
}

impl Feedback {
    /// Parses `1B2C` or `1B-2C` (case-insensitive).
    pub fn parse(text: &str, params: &GameParams) -> Result<Feedback> {
        let err = || Error::InvalidFeedback(format!("`{text}` is not of the form <b>B<c>C"));
        let upper = text.trim().to_ascii_uppercase();
        let (b, rest) = upper.split_once('B').ok_or_else(err)?;
        let c = rest
            .trim_start_matches('-')
            .strip_suffix('C')
            .ok_or_else(err)?;
        let bulls = b.parse().map_err(|_| err())?;
        let cows = c.parse().map_err(|_| err())?;
        params.feedback(bulls, cows)
    }
}

impl fmt::Display for Feedback {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}B{}C", self.bulls, self.cows)
    }
}

/// Bucket sizes of a remaining set under one guess, indexed by canonical feedback index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionCounts {
    pub counts: Vec<u32>,
    pub total: u32,
}

impl PartitionCounts {
    /// Builds counts from explicit buckets; the total is their sum.
    pub fn from_counts(counts: Vec<u32>) -> Self {
        let total = counts.iter().sum();
        PartitionCounts { counts, total }
    }

    pub fn non_empty(&self) -> usize {
        self.counts.iter().filter(|&&c| c > 0).count()
    }

    pub fn largest(&self) -> u32 {
        self.counts.iter().copied().max().unwrap_or(0)
    }
}

/// Precomputed `mark(g, s)` feedback indices for every pair of codes.
#[derive(Debug, Clone)]
pub struct FeedbackTable {
    params: GameParams,
    size: usize,
    entries: Vec<u8>,
}

impl FeedbackTable {
    pub fn build(params: GameParams) -> Result<Self> {
        Self::build_with_budget(params, DEFAULT_TABLE_BUDGET)
    }

    pub fn build_with_budget(params: GameParams, budget: u64) -> Result<Self> {
        let size = params.code_count();
        let entries = (size as u64) * (size as u64);
        if entries > budget {
            return Err(Error::TableTooLarge { entries, budget });
        }
        if params.feedback_count() > u8::MAX as usize {
            return Err(Error::InvalidParams("too many feedback values for a byte table".into()));
        }
        let mut table = vec![0u8; size * size];
        for (g, row) in table.chunks_mut(size).enumerate() {
            for (s, slot) in row.iter_mut().enumerate() {
                let fb = params.mark(Code(g as u32), Code(s as u32));
                *slot = params.feedback_index(fb) as u8;
            }
        }
        Ok(FeedbackTable {
            params,
            size,
            entries: table,
        })
    }

    /// The process-wide MM(4,6) table, built on first use.
    pub fn standard() -> &'static FeedbackTable {
        static TABLE: OnceLock<FeedbackTable> = OnceLock::new();
        TABLE.get_or_init(|| FeedbackTable::build(GameParams::STANDARD).expect("MM(4,6) fits"))
    }

    pub fn params(&self) -> &GameParams {
        &self.params
    }

    pub fn code_count(&self) -> usize {
        self.size
    }

    pub fn get(&self, g: Code, s: Code) -> u8 {
        self.entries[g.index() * self.size + s.index()]
    }

    /// Feedback indices of guess `g` against every secret, by secret index.
    pub fn row(&self, g: Code) -> &[u8] {
        &self.entries[g.index() * self.size..(g.index() + 1) * self.size]
    }

    pub fn win_index(&self) -> u8 {
        (self.params.feedback_count() - 1) as u8
    }

    /// Table-backed equivalent of [`GameParams::partition_counts`].
    pub fn partition_counts(&self, g: Code, remaining: &[Code]) -> Result<PartitionCounts> {
        if remaining.is_empty() {
            return Err(Error::EmptyState);
        }
        let mut counts = vec![0u32; self.params.feedback_count()];
        count_into(self.row(g), remaining, &mut counts);
        Ok(PartitionCounts {
            counts,
            total: remaining.len() as u32,
        })
    }
}

pub(crate) fn count_into(row: &[u8], remaining: &[Code], counts: &mut [u32]) {
    counts.iter_mut().for_each(|c| *c = 0);
    for s in remaining {
        counts[row[s.index()] as usize] += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const P: GameParams = GameParams::STANDARD;

    fn code(s: &str) -> Code {
        P.parse_code(s).unwrap()
    }

    // Direct per-position/per-color counting, independent of the min-count formula.
    fn reference_mark(g: &[u8], s: &[u8]) -> (u8, u8) {
        let mut used_g = vec![false; g.len()];
        let mut used_s = vec![false; s.len()];
        let mut bulls = 0;
        for i in 0..g.len() {
            if g[i] == s[i] {
                bulls += 1;
                used_g[i] = true;
                used_s[i] = true;
            }
        }
        let mut cows = 0;
        for i in 0..g.len() {
            if used_g[i] {
                continue;
            }
            if let Some(j) = (0..s.len()).find(|&j| !used_s[j] && s[j] == g[i]) {
                used_s[j] = true;
                cows += 1;
            }
        }
        (bulls, cows)
    }

    #[test]
    fn encode_examples() {
        assert_eq!(P.encode(&[0, 0, 0, 0]).unwrap(), Code(0));
        assert_eq!(P.encode(&[5, 5, 5, 5]).unwrap(), Code(1295));
        assert_eq!(P.encode(&[0, 0, 1, 2]).unwrap(), Code(8));
    }

    #[test]
    fn encode_rejects_bad_pegs() {
        assert!(matches!(P.encode(&[0, 0, 6, 0]), Err(Error::InvalidCode(_))));
        assert!(matches!(P.encode(&[0, 0, 0]), Err(Error::InvalidCode(_))));
        assert!(P.decode(Code(1296)).is_err());
        assert!(P.parse_code("1170").is_err());
        assert!(P.parse_code("11234").is_err());
    }

    #[test]
    fn index_bijection_and_order() {
        let mut prev: Option<Vec<u8>> = None;
        for c in P.codes() {
            let pegs = P.decode(c).unwrap();
            assert_eq!(P.encode(&pegs).unwrap(), c);
            if let Some(p) = prev {
                assert!(p < pegs);
            }
            prev = Some(pegs);
        }
        assert_eq!(P.format_code(code("1123")), "1123");
    }

    #[test]
    fn mark_examples() {
        assert_eq!(P.mark(code("1123"), code("1123")), Feedback { bulls: 4, cows: 0 });
        assert_eq!(P.mark(code("1122"), code("3456")), Feedback { bulls: 0, cows: 0 });
        assert_eq!(P.mark(code("1234"), code("2143")), Feedback { bulls: 0, cows: 4 });
        assert_eq!(P.mark(code("1123"), code("2211")), Feedback { bulls: 0, cows: 3 });
    }

    #[test]
    fn mark_matches_reference_marker_on_small_game() {
        let p = GameParams::new(3, 4).unwrap();
        for g in p.codes() {
            for s in p.codes() {
                let fb = p.mark(g, s);
                let (b, c) = reference_mark(&p.decode(g).unwrap(), &p.decode(s).unwrap());
                assert_eq!((fb.bulls, fb.cows), (b, c));
            }
        }
    }

    #[test]
    fn feedback_counts() {
        assert_eq!(P.feedback_count(), 14);
        assert_eq!(GameParams::new(1, 6).unwrap().feedback_count(), 2);
        assert_eq!(GameParams::new(5, 8).unwrap().feedback_count(), 20);
    }

    #[test]
    fn feedback_order_and_validation() {
        let labels: Vec<String> = P.all_feedbacks().map(|f| f.to_string()).collect();
        assert_eq!(labels.first().unwrap(), "0B0C");
        assert_eq!(labels[5], "1B0C");
        assert_eq!(labels[12], "3B0C");
        assert_eq!(labels.last().unwrap(), "4B0C");
        for (i, fb) in P.all_feedbacks().enumerate() {
            assert_eq!(P.feedback_index(fb), i);
            assert_eq!(P.feedback_at(i).unwrap(), fb);
        }
        assert!(P.feedback(3, 1).is_err());
        assert!(P.feedback(2, 3).is_err());
        assert!(Feedback::parse("3B1C", &P).is_err());
        assert_eq!(Feedback::parse("1b-2c", &P).unwrap(), Feedback { bulls: 1, cows: 2 });
    }

    #[test]
    fn partition_examples() {
        let all: Vec<Code> = P.codes().collect();
        let g = code("1123");
        let single = P.partition_counts(g, &[g]).unwrap();
        assert_eq!(single.counts[13], 1);
        assert_eq!(single.total, 1);
        assert_eq!(single.counts.iter().sum::<u32>(), 1);

        let full = P.partition_counts(code("1122"), &all).unwrap();
        assert_eq!(full.counts.iter().sum::<u32>(), 1296);

        let p1234 = P.partition_counts(code("1234"), &all).unwrap();
        let brute = all
            .iter()
            .filter(|&&s| P.decode(s).unwrap().iter().all(|&x| x >= 4))
            .count();
        assert_eq!(brute, 16);
        assert_eq!(p1234.counts[0], 16);
        assert_eq!(P.partition_counts(g, &[]), Err(Error::EmptyState));
    }

    #[test]
    fn table_agrees_with_mark() {
        let t = FeedbackTable::standard();
        for g in P.codes() {
            assert_eq!(t.get(g, g), t.win_index());
        }
        let mut x = 12345u64;
        for _ in 0..100 {
            x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let g = Code(((x >> 33) % 1296) as u32);
            let s = Code(((x >> 11) % 1296) as u32);
            assert_eq!(t.get(g, s) as usize, P.feedback_index(P.mark(g, s)));
        }
    }

    #[test]
    fn table_budget_guard() {
        assert!(matches!(
            FeedbackTable::build_with_budget(P, 1000),
            Err(Error::TableTooLarge { .. })
        ));
    }
}
