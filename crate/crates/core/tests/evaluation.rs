use std::collections::BTreeMap;

use mastermind_core::{
    build_tree, bundled_weights, evaluate_all, parse_tree, play_game, serialize_tree, Error,
    FeedbackTable, GameParams, Policy, DEFAULT_MAX_TURNS,
};

const P: GameParams = GameParams::STANDARD;

fn table() -> &'static FeedbackTable {
    FeedbackTable::standard()
}

fn bundled(name: &str) -> Policy {
    bundled_weights(name).unwrap().to_policy()
}

fn forced_staged() -> Policy {
    bundled("staged-paper").with_forced_opening(P.parse_code("1123").unwrap())
}

fn hist(pairs: &[(u32, u64)]) -> BTreeMap<u32, u64> {
    pairs.iter().copied().collect()
}

// Totals over all 1296 secrets, frozen from the exhaustive evaluation.
#[test]
fn regression_totals() {
    let cases: [(&str, Policy, u64, u32); 6] = [
        ("fixed-paper", bundled("fixed-paper"), 5646, 5),
        ("staged-paper", bundled("staged-paper"), 5636, 6),
        ("staged-paper forced", forced_staged(), 5636, 6),
        ("shannon", Policy::shannon(), 5722, 6),
        ("knuth", Policy::knuth(), 5801, 5),
        ("most-parts", Policy::most_parts(), 5668, 6),
    ];
    for (name, policy, total, max) in cases {
        let stats = evaluate_all(table(), &policy, DEFAULT_MAX_TURNS).unwrap();
        assert_eq!((stats.total_guesses, stats.maximum), (total, max), "{name}");
        assert_eq!(stats.unsolved, 0, "{name}");
        assert_eq!(stats.games(), 1296, "{name}");
        let weighted: u64 = stats.histogram.iter().map(|(&t, &n)| t as u64 * n).sum();
        assert_eq!(weighted, stats.total_guesses);
    }
}

#[test]
fn regression_histograms() {
    let fixed = evaluate_all(table(), &bundled("fixed-paper"), 10).unwrap();
    assert_eq!(fixed.histogram, hist(&[(1, 1), (2, 8), (3, 83), (4, 640), (5, 564)]));
    let staged = evaluate_all(table(), &forced_staged(), 10).unwrap();
    assert_eq!(
        staged.histogram,
        hist(&[(1, 1), (2, 8), (3, 93), (4, 636), (5, 552), (6, 6)])
    );
    assert_eq!(format!("{:.4}", staged.average), "4.3488");
    assert!(staged.to_csv().ends_with("average,4.3488\nmax,6\n"));
}

#[test]
fn uniform_weights_play_like_shannon() {
    let uniform = evaluate_all(table(), &bundled("uniform"), 10).unwrap();
    assert_eq!(uniform, evaluate_all(table(), &Policy::shannon(), 10).unwrap());
}

#[test]
fn short_turn_limit_records_unsolved_games() {
    let stats = evaluate_all(table(), &bundled("fixed-paper"), 4).unwrap();
    assert_eq!(stats.unsolved, 564);
    assert_eq!(stats.games(), 1296);
    assert_eq!(stats.maximum, 4);
    assert!(stats.to_csv().contains("unsolved,564\n"));
}

#[test]
fn fixed_tree_matches_play_for_every_secret() {
    let policy = bundled("fixed-paper");
    let tree = build_tree(table(), &policy, 10).unwrap();
    assert_eq!(tree.depth(), 5);
    assert_eq!(P.format_code(tree.guess), "1123");
    for secret in P.codes() {
        let played = play_game(table(), secret, &policy, 10).unwrap();
        assert_eq!(tree.path_for(table(), secret).unwrap(), played.guesses());
    }
    assert_eq!(tree.total_guesses(table()), Some(5646));

    let text = serialize_tree(&tree, &P);
    assert_eq!(parse_tree(&text, &P).unwrap(), tree);
    assert_eq!(text.lines().count(), tree.node_count());
    assert!(text.lines().all(|l| !l.ends_with(' ')));
    assert!(text.starts_with("1123\n  "));
}

#[test]
fn tree_children_are_in_feedback_order() {
    let tree = build_tree(table(), &bundled("staged-paper"), 10).unwrap();
    let text = serialize_tree(&tree, &P);
    let labels: Vec<&str> = text
        .lines()
        .filter(|l| l.starts_with("  ") && !l.starts_with("    "))
        .map(|l| l.rsplit(' ').next().unwrap())
        .collect();
    let order: Vec<String> = P.all_feedbacks().map(|f| f.to_string()).collect();
    let positions: Vec<usize> = labels
        .iter()
        .map(|l| order.iter().position(|o| o == l).unwrap())
        .collect();
    assert!(positions.windows(2).all(|w| w[0] < w[1]));
    assert_eq!(labels.len(), 13);
}

#[test]
fn depth_limit_names_the_branch() {
    match build_tree(table(), &bundled("staged-paper"), 5) {
        Err(Error::DepthExceeded { max_depth, branch }) => {
            assert_eq!(max_depth, 5);
            assert!(branch.starts_with("1123 "), "{branch}");
        }
        other => panic!("{other:?}"),
    }
    assert!(build_tree(table(), &bundled("staged-paper"), 6).is_ok());
}
