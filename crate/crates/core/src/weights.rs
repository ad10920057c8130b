//! Weight files and the bundled weight sets.
//!
//! File grammar: `#` comment lines and blank lines are ignored; every other line
//! holds 14 positive decimals separated by spaces or tabs, in canonical feedback
//! order (0B0C, 0B1C, … 3B0C, 4B0C). One data line is a fixed vector, six are
//! per-turn vectors for turns 1 to 6.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::heuristics::{Policy, StageWeights, WeightVector, FEEDBACK_TYPES, STAGES};
use crate::rules::GameParams;
use crate::scalar::Scalar;

/// Optimized weight vector applied at every turn.
pub const FIXED_PAPER: [f64; FEEDBACK_TYPES] = [
    0.473, 0.446, 0.523, 0.410, 0.350, 0.534, 0.486, 0.423, 0.383, 0.406, 0.413, 0.458, 0.424,
    0.800,
];

/// Optimized per-turn weights, turns 1 to 6.
pub const STAGED_PAPER: [[f64; FEEDBACK_TYPES]; STAGES] = [
    [1.00, 1.00, 0.70, 1.00, 1.00, 1.00, 1.00, 1.00, 1.00, 1.00, 1.00, 1.00, 1.00, 1.00],
    [0.70, 0.60, 0.60, 0.51, 0.43, 0.60, 0.85, 0.60, 0.32, 0.34, 0.40, 0.60, 0.40, 1.00],
    [0.70, 0.41, 0.53, 0.47, 0.37, 0.40, 0.47, 0.50, 0.46, 0.48, 0.46, 0.50, 0.50, 0.90],
    [0.30, 0.50, 0.40, 0.50, 0.40, 0.50, 0.50, 0.40, 0.60, 0.40, 0.50, 0.50, 0.50, 1.00],
    [0.40, 0.60, 0.30, 0.60, 0.50, 0.40, 0.50, 0.50, 0.50, 0.60, 0.60, 0.70, 0.60, 0.80],
    [0.20, 0.80, 0.40, 0.60, 0.60, 0.60, 0.70, 0.50, 0.20, 0.60, 0.40, 0.30, 0.50, 0.40],
];

/// Opening the per-turn optimizer runs force.
pub const STAGED_OPENING: &str = "1123";

pub const BUNDLED_NAMES: [&str; 3] = ["fixed-paper", "staged-paper", "uniform"];

#[derive(Debug, Clone, PartialEq)]
pub enum WeightFile<T> {
    Fixed(WeightVector<T>),
    Staged(StageWeights<T>),
}

impl<T: Scalar> WeightFile<T> {
    pub fn vectors(&self) -> Vec<&WeightVector<T>> {
        match self {
            WeightFile::Fixed(w) => vec![w],
            WeightFile::Staged(s) => s.turns().iter().collect(),
        }
    }

    pub fn mode(&self) -> &'static str {
        match self {
            WeightFile::Fixed(_) => "fixed",
            WeightFile::Staged(_) => "staged",
        }
    }

    /// Fixed files become fixed-weight policies, staged files stage-weight policies.
    pub fn to_policy(&self) -> Policy<T> {
        match self {
            WeightFile::Fixed(w) => Policy::fixed(*w),
            WeightFile::Staged(s) => Policy::staged(*s),
        }
    }
}

fn convert<T: Scalar>(values: &[f64; FEEDBACK_TYPES]) -> WeightVector<T> {
    WeightVector::new(values.map(T::lit)).expect("bundled weights are positive")
}

/// Looks up one of [`BUNDLED_NAMES`].
pub fn bundled_weights<T: Scalar>(name: &str) -> Result<WeightFile<T>> {
    match name {
        "fixed-paper" => Ok(WeightFile::Fixed(convert(&FIXED_PAPER))),
        "staged-paper" => Ok(WeightFile::Staged(StageWeights::new(
            STAGED_PAPER.map(|row| convert(&row)),
        ))),
        "uniform" => Ok(WeightFile::Fixed(WeightVector::uniform())),
        other => Err(Error::UnknownWeights(other.to_string())),
    }
}

/// Names accepted by [`named_policy`] besides the `fixed:`/`staged:` forms.
pub const POLICY_NAMES: [&str; 6] = [
    "staged-paper",
    "fixed-paper",
    "uniform",
    "shannon",
    "knuth",
    "most-parts",
];

/// Resolves a baseline name, a bundled weight name, or `fixed:<name>` /
/// `staged:<name>` where the mode must match the bundled set.
pub fn named_policy<T: Scalar>(name: &str) -> Result<Policy<T>> {
    match name {
        "shannon" => return Ok(Policy::shannon()),
        "knuth" => return Ok(Policy::knuth()),
        "most-parts" => return Ok(Policy::most_parts()),
        _ => {}
    }
    let (mode, weights) = match name.split_once(':') {
        Some((mode @ ("fixed" | "staged"), rest)) => (Some(mode), rest),
        Some(_) => return Err(Error::UnknownPolicy(name.to_string())),
        None => (None, name),
    };
    let wf = bundled_weights::<T>(weights).map_err(|_| Error::UnknownPolicy(name.to_string()))?;
    check_mode(&wf, mode)?;
    Ok(wf.to_policy())
}

/// Fails when `wf` is not of the requested mode.
pub fn check_mode<T: Scalar>(wf: &WeightFile<T>, mode: Option<&str>) -> Result<()> {
    match mode {
        Some(m) if m != wf.mode() => Err(Error::InvalidPolicy(format!(
            "{m} policy given {} weights",
            wf.mode()
        ))),
        _ => Ok(()),
    }
}

pub fn parse_weights<T: Scalar>(text: &str) -> Result<WeightFile<T>> {
    let mut rows: Vec<(usize, WeightVector<T>)> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let values = trimmed
            .split([' ', '\t'])
            .filter(|t| !t.is_empty())
            .map(|tok| {
                let v: T = tok.parse().map_err(|_| Error::Parse {
                    line: line_no,
                    message: format!("`{tok}` is not a number"),
                })?;
                if !(v.is_finite() && v > T::zero()) {
                    return Err(Error::Parse {
                        line: line_no,
                        message: format!("weight `{tok}` must be positive"),
                    });
                }
                Ok(v)
            })
            .collect::<Result<Vec<T>>>()?;
        if values.len() != FEEDBACK_TYPES {
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected {FEEDBACK_TYPES} values, found {}", values.len()),
            });
        }
        let w = WeightVector::from_slice(&values).map_err(|e| Error::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        rows.push((line_no, w));
    }
    match rows.len() {
        1 => Ok(WeightFile::Fixed(rows[0].1)),
        STAGES => Ok(WeightFile::Staged(StageWeights::from_vec(
            rows.into_iter().map(|(_, w)| w).collect(),
        )?)),
        n => Err(Error::Parse {
            line: rows.last().map(|r| r.0).unwrap_or(0),
            message: format!("found {n} data lines; expected 1 (fixed) or {STAGES} (staged)"),
        }),
    }
}

/// Writes a file that parses back to exactly the same values.
pub fn emit_weights<T: Scalar>(wf: &WeightFile<T>) -> String {
    let params = GameParams::STANDARD;
    let order: Vec<String> = params.all_feedbacks().map(|f| f.to_string()).collect();
    let mut out = String::new();
    let _ = writeln!(out, "# mode: {}", wf.mode());
    let _ = writeln!(out, "# order: {}", order.join(" "));
    for (i, w) in wf.vectors().into_iter().enumerate() {
        if let WeightFile::Staged(_) = wf {
            let _ = writeln!(out, "# turn {}", i + 1);
        }
        let line: Vec<String> = w.as_slice().iter().map(|v| format!("{v:?}")).collect();
        let _ = writeln!(out, "{}", line.join(" "));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_literals() {
        let WeightFile::Fixed(f) = bundled_weights::<f64>("fixed-paper").unwrap() else {
            panic!("fixed expected")
        };
        assert_eq!(f.get(13), 0.800);
        let WeightFile::Staged(s) = bundled_weights::<f64>("staged-paper").unwrap() else {
            panic!("staged expected")
        };
        assert_eq!(s.for_turn(2).get(13), 1.00);
        assert_eq!(s.for_turn(6).get(0), 0.20);
        assert_eq!(s.for_turn(1).get(2), 0.70);
        assert!(matches!(
            bundled_weights::<f64>("nope"),
            Err(Error::UnknownWeights(_))
        ));
    }

    #[test]
    fn policy_names() {
        use crate::heuristics::{BaselineKind, PolicyKind};
        for name in POLICY_NAMES {
            assert!(named_policy::<f64>(name).is_ok(), "{name}");
        }
        assert_eq!(
            named_policy::<f64>("knuth").unwrap().kind,
            PolicyKind::Baseline(BaselineKind::KnuthMinimax)
        );
        assert!(matches!(
            named_policy::<f64>("staged:staged-paper").unwrap().kind,
            PolicyKind::StageWeight(_)
        ));
        assert!(matches!(
            named_policy::<f64>("fixed:uniform").unwrap().kind,
            PolicyKind::FixedWeight(_)
        ));
        assert!(matches!(
            named_policy::<f64>("fixed:staged-paper"),
            Err(Error::InvalidPolicy(_))
        ));
        for bad in ["nope", "tree:fixed-paper", "fixed:nope"] {
            assert!(matches!(named_policy::<f64>(bad), Err(Error::UnknownPolicy(_))));
        }
    }

    #[test]
    fn parse_fixed_file() {
        let text = "# fixed\n0.473 0.446 0.523 0.410 0.350 0.534 0.486\t0.423 0.383 0.406 0.413 0.458 0.424 0.800\n";
        assert_eq!(
            parse_weights::<f64>(text).unwrap(),
            bundled_weights("fixed-paper").unwrap()
        );
    }

    #[test]
    fn parse_uniform_staged() {
        let line = vec!["1.0"; 14].join(" ");
        let text = format!("{}\n", vec![line; 6].join("\n"));
        let WeightFile::Staged(s) = parse_weights::<f64>(&text).unwrap() else {
            panic!("staged expected")
        };
        assert!(s.turns().iter().all(|w| *w == WeightVector::uniform()));
    }

    #[test]
    fn parse_errors() {
        let line = vec!["0.5"; 14].join(" ");
        let three = format!("{line}\n{line}\n\n{line}\n");
        match parse_weights::<f64>(&three) {
            Err(Error::Parse { line, message }) => {
                assert_eq!(line, 4);
                assert!(message.contains("3 data lines"), "{message}");
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            parse_weights::<f64>("0.5 0.5\n"),
            Err(Error::Parse { line: 1, .. })
        ));
        let neg = format!("# c\n{}\n", line.replacen("0.5", "-0.5", 1));
        assert!(matches!(parse_weights::<f64>(&neg), Err(Error::Parse { line: 2, .. })));
        let nan = line.replacen("0.5", "abc", 1);
        assert!(matches!(parse_weights::<f64>(&nan), Err(Error::Parse { line: 1, .. })));
        assert!(parse_weights::<f64>("").is_err());
    }

    #[test]
    fn emit_roundtrip_bundled() {
        for name in BUNDLED_NAMES {
            let wf = bundled_weights::<f64>(name).unwrap();
            let text = emit_weights(&wf);
            assert!(text.starts_with("# mode: "));
            assert!(text.contains("0B0C 0B1C"));
            assert_eq!(parse_weights::<f64>(&text).unwrap(), wf);
        }
        let staged = emit_weights(&bundled_weights::<f64>("staged-paper").unwrap());
        let data = staged.lines().filter(|l| !l.starts_with('#')).count();
        assert_eq!(data, 6);
        assert!(staged.contains("0.85"));
    }
}
