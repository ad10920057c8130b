use std::time::Instant;

use mastermind_core::{
    filter_remaining, select_guess, Code, Error, Feedback, FeedbackTable, GameParams, Policy,
    Result,
};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Active,
    Solved,
    Contradicted,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub guess: Code,
    pub feedback: Feedback,
    pub remaining_after: usize,
}

/// One live game: the history the human relayed and everything derived from it.
#[derive(Debug, Clone)]
pub struct Session {
    pub id: String,
    pub policy_name: String,
    policy: Policy,
    history: Vec<Entry>,
    remaining: Vec<Code>,
    suggestion: Option<Code>,
    pub last_used: Instant,
}

/// Partition of the remaining set by a hypothetical guess.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WhatIf {
    pub guess: String,
    pub counts: Vec<u32>,
    pub probabilities: Vec<f64>,
    pub score: f64,
    pub consistent: bool,
}

fn table() -> &'static FeedbackTable {
    FeedbackTable::standard()
}

fn params() -> GameParams {
    GameParams::STANDARD
}

impl Session {
    pub fn new(id: String, policy_name: String, policy: Policy) -> Result<Self> {
        let mut s = Session {
            id,
            policy_name,
            policy,
            history: Vec::new(),
            remaining: params().codes().collect(),
            suggestion: None,
            last_used: Instant::now(),
        };
        s.refresh()?;
        Ok(s)
    }

    pub fn turn(&self) -> u32 {
        self.history.len() as u32 + 1
    }

    pub fn status(&self) -> Status {
        if self.remaining.is_empty() {
            Status::Contradicted
        } else if self.history.last().is_some_and(|e| e.feedback == params().win()) {
            Status::Solved
        } else {
            Status::Active
        }
    }

    pub fn history(&self) -> &[Entry] {
        &self.history
    }

    pub fn remaining(&self) -> &[Code] {
        &self.remaining
    }

    pub fn suggestion(&self) -> Option<Code> {
        self.suggestion
    }

    pub fn policy(&self) -> &Policy {
        &self.policy
    }

    pub fn message(&self) -> Option<String> {
        match self.status() {
            Status::Active => None,
            Status::Solved => Some(format!(
                "solved in {} guesses",
                self.history.len()
            )),
            Status::Contradicted => Some(
                "no code is consistent with every feedback entered; \
                 one of them is wrong, undo to correct it"
                    .to_string(),
            ),
        }
    }

    fn refresh(&mut self) -> Result<()> {
        debug_assert_eq!(self.remaining, replay(&self.history));
        self.suggestion = match self.status() {
            Status::Active => {
                Some(select_guess(table(), &self.remaining, self.turn(), &self.policy)?.guess)
            }
            _ => None,
        };
        Ok(())
    }

    fn require_active(&self) -> Result<()> {
        match self.status() {
            Status::Active => Ok(()),
            other => Err(Error::InvariantViolation(format!(
                "session is {}",
                serde_json::to_value(other).expect("status serializes")
            ))),
        }
    }

    /// Applies the feedback the human got for `guess`, or for the current suggestion.
    pub fn submit(&mut self, guess: Option<Code>, feedback: Feedback) -> Result<()> {
        self.require_active()?;
        let guess = match guess {
            Some(g) => g,
            None => self.suggestion.expect("active sessions have a suggestion"),
        };
        self.remaining = filter_remaining(table(), &self.remaining, guess, feedback);
        self.history.push(Entry {
            guess,
            feedback,
            remaining_after: self.remaining.len(),
        });
        self.refresh()
    }

    /// Drops the last entry. Returns false when there is nothing to undo.
    pub fn undo(&mut self) -> Result<bool> {
        if self.history.pop().is_none() {
            return Ok(false);
        }
        self.remaining = replay(&self.history);
        self.refresh()?;
        Ok(true)
    }

    pub fn what_if(&self, guess: Code) -> Result<WhatIf> {
        self.require_active()?;
        let counts = table().partition_counts(guess, &self.remaining)?;
        let total = counts.total as f64;
        let score = self.policy.score(&counts, self.turn())?;
        Ok(WhatIf {
            guess: params().format_code(guess),
            probabilities: counts.counts.iter().map(|&c| c as f64 / total).collect(),
            counts: counts.counts,
            score,
            consistent: self.remaining.binary_search(&guess).is_ok(),
        })
    }
}

/// The full space filtered by every history entry.
pub fn replay(history: &[Entry]) -> Vec<Code> {
    history.iter().fold(params().codes().collect(), |rem, e| {
        filter_remaining(table(), &rem, e.guess, e.feedback)
    })
}
