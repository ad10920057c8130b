//! Deterministic play, exhaustive evaluation over every secret, and strategy trees.

use std::borrow::Cow;
use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::heuristics::{filter_remaining, select_guess_with, Policy, SYMMETRY_MIN_REMAINING};
use crate::rules::{Code, Feedback, FeedbackTable, GameParams};
use crate::scalar::Scalar;
use crate::symmetry::SymmetryGroup;

pub const DEFAULT_MAX_TURNS: u32 = 10;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Move {
    pub guess: Code,
    pub feedback: Feedback,
    pub remaining_after: usize,
}

/// One game from the first guess to the win (or the turn limit).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transcript {
    pub moves: Vec<Move>,
    pub solved_in: Option<u32>,
}

impl Transcript {
    pub fn guesses(&self) -> Vec<Code> {
        self.moves.iter().map(|m| m.guess).collect()
    }
}

/// Plays `secret` against `policy`, answering every guess truthfully.
pub fn play_game<T: Scalar>(
    table: &FeedbackTable,
    secret: Code,
    policy: &Policy<T>,
    max_turns: u32,
) -> Result<Transcript> {
    let params = *table.params();
    params.check(secret)?;
    if max_turns == 0 {
        return Err(Error::InvalidParams("max turns must be at least 1".into()));
    }
    let mut remaining: Vec<Code> = params.codes().collect();
    let mut moves = Vec::new();
    let mut group = SymmetryGroup::for_game(params);
    for turn in 1..=max_turns {
        let guess = select_guess_with(table, &remaining, turn, policy, group.as_deref())?.guess;
        let feedback = params.mark(guess, secret);
        remaining = filter_remaining(table, &remaining, guess, feedback);
        group = narrow(group.as_deref(), guess, remaining.len()).map(Cow::Owned);
        moves.push(Move {
            guess,
            feedback,
            remaining_after: remaining.len(),
        });
        if feedback == params.win() {
            return Ok(Transcript {
                moves,
                solved_in: Some(turn),
            });
        }
        if remaining.is_empty() {
            return Err(Error::InvariantViolation(format!(
                "no code left after truthful feedback {feedback} to guess {}",
                params.format_code(guess)
            )));
        }
    }
    Ok(Transcript {
        moves,
        solved_in: None,
    })
}

/// Aggregate results of playing every secret.
#[derive(Debug, Clone, PartialEq)]
pub struct GameStats {
    /// Turns needed → number of secrets.
    pub histogram: BTreeMap<u32, u64>,
    pub total_guesses: u64,
    pub average: f64,
    pub maximum: u32,
    pub unsolved: u64,
}

impl GameStats {
    pub fn from_turns(turns: &[Option<u32>]) -> Self {
        let mut histogram = BTreeMap::new();
        let mut unsolved = 0;
        for t in turns {
            match t {
                Some(t) => *histogram.entry(*t).or_insert(0u64) += 1,
                None => unsolved += 1,
            }
        }
        let total_guesses: u64 = histogram.iter().map(|(&t, &n)| t as u64 * n).sum();
        let solved: u64 = histogram.values().sum();
        GameStats {
            average: if solved == 0 {
                0.0
            } else {
                total_guesses as f64 / solved as f64
            },
            maximum: histogram.keys().next_back().copied().unwrap_or(0),
            histogram,
            total_guesses,
            unsolved,
        }
    }

    pub fn games(&self) -> u64 {
        self.histogram.values().sum::<u64>() + self.unsolved
    }

    /// Human-readable table.
    pub fn to_text(&self) -> String {
        let mut out = String::from("turns  games\n");
        for (t, n) in &self.histogram {
            let _ = writeln!(out, "{t:>5}  {n:>5}");
        }
        if self.unsolved > 0 {
            let _ = writeln!(out, "unsolved {}", self.unsolved);
        }
        let _ = writeln!(out, "total   {}", self.total_guesses);
        let _ = writeln!(out, "average {:.4}", self.average);
        let _ = writeln!(out, "max     {}", self.maximum);
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("turns,count\n");
        for (t, n) in &self.histogram {
            let _ = writeln!(out, "{t},{n}");
        }
        if self.unsolved > 0 {
            let _ = writeln!(out, "unsolved,{}", self.unsolved);
        }
        let _ = writeln!(out, "average,{:.4}", self.average);
        let _ = writeln!(out, "max,{}", self.maximum);
        out
    }
}

/// Turns needed for every secret, indexed by code; `None` when not solved within `max_turns`.
///
/// Equivalent to calling [`play_game`] per secret, but the selection at each
/// reachable game state is computed once and shared by every secret in it.
pub fn solve_turns<T: Scalar>(
    table: &FeedbackTable,
    policy: &Policy<T>,
    max_turns: u32,
) -> Result<Vec<Option<u32>>> {
    let mut turns = vec![None; table.code_count()];
    let all: Vec<Code> = table.params().codes().collect();
    let group = SymmetryGroup::for_game(*table.params());
    solve_node(table, policy, max_turns, &all, 1, group.as_deref(), &mut turns)?;
    Ok(turns)
}

/// The part of `group` that still applies after `guess`, if worth keeping.
fn narrow(group: Option<&SymmetryGroup>, guess: Code, largest_next: usize) -> Option<SymmetryGroup> {
    if largest_next < SYMMETRY_MIN_REMAINING {
        return None;
    }
    group
        .map(|g| g.stabilizer(guess))
        .filter(|g| g.order() > 1)
}

fn solve_node<T: Scalar>(
    table: &FeedbackTable,
    policy: &Policy<T>,
    max_turns: u32,
    remaining: &[Code],
    turn: u32,
    group: Option<&SymmetryGroup>,
    out: &mut [Option<u32>],
) -> Result<()> {
    if turn > max_turns {
        return Ok(());
    }
    if let [only] = remaining {
        out[only.index()] = Some(turn);
        return Ok(());
    }
    let guess = select_guess_with(table, remaining, turn, policy, group)?.guess;
    let buckets = split(table, remaining, guess);
    let largest = buckets.iter().map(|(_, b)| b.len()).max().unwrap_or(0);
    let child_group = narrow(group, guess, largest);
    for (fb, bucket) in buckets {
        if fb == table.win_index() {
            out[guess.index()] = Some(turn);
        } else {
            solve_node(table, policy, max_turns, &bucket, turn + 1, child_group.as_ref(), out)?;
        }
    }
    Ok(())
}

/// Non-empty buckets of `remaining` under `guess`, ascending by feedback index.
fn split(table: &FeedbackTable, remaining: &[Code], guess: Code) -> Vec<(u8, Vec<Code>)> {
    let row = table.row(guess);
    let mut buckets = vec![Vec::new(); table.params().feedback_count()];
    for &s in remaining {
        buckets[row[s.index()] as usize].push(s);
    }
    buckets
        .into_iter()
        .enumerate()
        .filter(|(_, b)| !b.is_empty())
        .map(|(i, b)| (i as u8, b))
        .collect()
}

/// Plays every secret and aggregates the outcome.
pub fn evaluate_all<T: Scalar>(
    table: &FeedbackTable,
    policy: &Policy<T>,
    max_turns: u32,
) -> Result<GameStats> {
    Ok(GameStats::from_turns(&solve_turns(table, policy, max_turns)?))
}

/// Decision tree: the guess at this state and the subtree for each non-winning,
/// non-empty feedback.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StrategyTree {
    pub guess: Code,
    pub children: BTreeMap<u8, StrategyTree>,
}

impl StrategyTree {
    pub fn leaf(guess: Code) -> Self {
        StrategyTree {
            guess,
            children: BTreeMap::new(),
        }
    }

    /// Number of guess levels on the longest path.
    pub fn depth(&self) -> u32 {
        1 + self.children.values().map(|c| c.depth()).max().unwrap_or(0)
    }

    pub fn node_count(&self) -> usize {
        1 + self.children.values().map(|c| c.node_count()).sum::<usize>()
    }

    /// Guess sequence the tree prescribes for `secret`, ending with the secret
    /// itself, or `None` if the tree does not cover it.
    pub fn path_for(&self, table: &FeedbackTable, secret: Code) -> Option<Vec<Code>> {
        let mut path = vec![self.guess];
        let mut node = self;
        loop {
            let fb = table.get(node.guess, secret);
            if fb == table.win_index() {
                return Some(path);
            }
            node = node.children.get(&fb)?;
            path.push(node.guess);
        }
    }

    /// Σ over all secrets of the guesses needed; `None` if some secret is not covered.
    pub fn total_guesses(&self, table: &FeedbackTable) -> Option<u64> {
        table
            .params()
            .codes()
            .map(|s| self.path_for(table, s).map(|p| p.len() as u64))
            .sum()
    }
}

/// Builds the complete decision tree of `policy`; fails if any branch needs more than `max_depth` guesses.
pub fn build_tree<T: Scalar>(
    table: &FeedbackTable,
    policy: &Policy<T>,
    max_depth: u32,
) -> Result<StrategyTree> {
    if max_depth == 0 {
        return Err(Error::InvalidParams("max depth must be at least 1".into()));
    }
    let all: Vec<Code> = table.params().codes().collect();
    let mut branch = Vec::new();
    let group = SymmetryGroup::for_game(*table.params());
    build_node(table, policy, max_depth, &all, 1, group.as_deref(), &mut branch)
}

fn build_node<T: Scalar>(
    table: &FeedbackTable,
    policy: &Policy<T>,
    max_depth: u32,
    remaining: &[Code],
    turn: u32,
    group: Option<&SymmetryGroup>,
    branch: &mut Vec<String>,
) -> Result<StrategyTree> {
    let params = table.params();
    let guess = select_guess_with(table, remaining, turn, policy, group)?.guess;
    let mut node = StrategyTree::leaf(guess);
    let buckets = split(table, remaining, guess);
    let largest = buckets.iter().map(|(_, b)| b.len()).max().unwrap_or(0);
    let child_group = narrow(group, guess, largest);
    for (fb, bucket) in buckets {
        if fb == table.win_index() {
            continue;
        }
        let label = format!(
            "{} {}",
            params.format_code(guess),
            params.feedback_at(fb as usize)?
        );
        if turn + 1 > max_depth {
            branch.push(label);
            return Err(Error::DepthExceeded {
                max_depth,
                branch: branch.join(" > "),
            });
        }
        branch.push(label);
        let child = build_node(
            table,
            policy,
            max_depth,
            &bucket,
            turn + 1,
            child_group.as_ref(),
            branch,
        )?;
        branch.pop();
        node.children.insert(fb, child);
    }
    Ok(node)
}

/// Canonical text form: one node per line, two spaces of indent per level,
/// `<code> | <feedback>` where the feedback labels the edge into the node.
pub fn serialize_tree(tree: &StrategyTree, params: &GameParams) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{}", params.format_code(tree.guess));
    write_children(tree, params, 1, &mut out);
    out
}

fn write_children(node: &StrategyTree, params: &GameParams, depth: usize, out: &mut String) {
    for (&fb, child) in &node.children {
        let label = params
            .feedback_at(fb as usize)
            .map(|f| f.to_string())
            .unwrap_or_default();
        let _ = writeln!(
            out,
            "{:indent$}{} | {}",
            "",
            params.format_code(child.guess),
            label,
            indent = 2 * depth
        );
        write_children(child, params, depth + 1, out);
    }
}

/// Parses the canonical text form produced by [`serialize_tree`].
pub fn parse_tree(text: &str, params: &GameParams) -> Result<StrategyTree> {
    // Stack of (depth, node); completed nodes are attached to their parent on pop.
    let mut stack: Vec<(usize, Option<u8>, StrategyTree)> = Vec::new();
    let perr = |line: usize, message: String| Error::Parse { line, message };

    fn attach(stack: &mut Vec<(usize, Option<u8>, StrategyTree)>) {
        let (_, fb, node) = stack.pop().expect("non-empty stack");
        if let Some(parent) = stack.last_mut() {
            parent.2.children.insert(fb.expect("child edge"), node);
        } else {
            stack.push((0, None, node));
        }
    }

    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let body = raw.trim_start_matches(' ');
        let indent = raw.len() - body.len();
        if indent % 2 != 0 {
            return Err(perr(line_no, "indent must be a multiple of two spaces".into()));
        }
        let depth = indent / 2;
        let (code_text, fb) = match body.split_once(" | ") {
            Some((c, f)) => (c, Some(Feedback::parse(f, params).map_err(|e| perr(line_no, e.to_string()))?)),
            None => (body, None),
        };
        let code = params
            .parse_code(code_text)
            .map_err(|e| perr(line_no, e.to_string()))?;
        let node = StrategyTree::leaf(code);

        if depth == 0 {
            if !stack.is_empty() || fb.is_some() {
                return Err(perr(line_no, "exactly one root line without an edge label".into()));
            }
            stack.push((0, None, node));
            continue;
        }
        let fb = fb.ok_or_else(|| perr(line_no, "child line needs `| <feedback>`".into()))?;
        if stack.is_empty() {
            return Err(perr(line_no, "child before root".into()));
        }
        while stack.last().is_some_and(|(d, _, _)| *d >= depth) {
            attach(&mut stack);
        }
        let parent_depth = stack.last().map(|(d, _, _)| *d).unwrap_or(0);
        if parent_depth + 1 != depth {
            return Err(perr(line_no, format!("indent jumps to depth {depth}")));
        }
        let idx = params.feedback_index(fb) as u8;
        if stack.last().unwrap().2.children.contains_key(&idx) {
            return Err(perr(line_no, format!("duplicate child for {fb}")));
        }
        stack.push((depth, Some(idx), node));
    }
    while stack.len() > 1 {
        attach(&mut stack);
    }
    stack
        .pop()
        .map(|(_, _, n)| n)
        .ok_or_else(|| perr(0, "empty tree".into()))
}
