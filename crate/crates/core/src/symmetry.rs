//! Color and position permutations of a game, used to skip candidates whose
//! partition is a relabelling of one already scored.
//!
//! If every permutation in a group fixes every guess played so far, the group
//! maps the remaining set onto itself, and two candidates in the same orbit
//! split it into identical bucket counts.

use std::borrow::Cow;
use std::sync::OnceLock;

use crate::rules::{Code, GameParams, MAX_COLORS, MAX_POSITIONS};

// Groups larger than this are never enumerated.
const MAX_GROUP_ORDER: u64 = 50_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Perm {
    colors: [u8; MAX_COLORS],
    positions: [u8; MAX_POSITIONS],
}

/// A group of peg relabellings, stored as its full element list.
#[derive(Debug, Clone)]
pub(crate) struct SymmetryGroup {
    params: GameParams,
    elems: Vec<Perm>,
    /// Adjacent transpositions; set only for the full group, whose orbits they generate.
    generators: Option<Vec<Perm>>,
    representatives: OnceLock<Vec<Code>>,
}

fn factorial(n: usize) -> u64 {
    (1..=n as u64).product()
}

fn permutations(n: usize) -> Vec<Vec<u8>> {
    let mut out = Vec::new();
    let mut cur: Vec<u8> = (0..n as u8).collect();
    heap_permute(n, &mut cur, &mut out);
    out.sort();
    out
}

fn heap_permute(k: usize, cur: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
    if k <= 1 {
        out.push(cur.clone());
        return;
    }
    for i in 0..k - 1 {
        heap_permute(k - 1, cur, out);
        if k % 2 == 0 {
            cur.swap(i, k - 1);
        } else {
            cur.swap(0, k - 1);
        }
    }
    heap_permute(k - 1, cur, out);
}

impl Perm {
    fn identity() -> Self {
        let mut p = Perm {
            colors: [0; MAX_COLORS],
            positions: [0; MAX_POSITIONS],
        };
        for (i, c) in p.colors.iter_mut().enumerate() {
            *c = i as u8;
        }
        for (i, c) in p.positions.iter_mut().enumerate() {
            *c = i as u8;
        }
        p
    }

    #[inline]
    fn apply(&self, params: &GameParams, pegs: &[u8]) -> Code {
        let c = params.colors() as u32;
        let mut index = 0u32;
        for j in 0..params.positions() {
            let peg = pegs[self.positions[j] as usize];
            index = index * c + self.colors[peg as usize] as u32;
        }
        Code(index)
    }
}

impl SymmetryGroup {
    /// The full group of the standard game, built once per process.
    pub(crate) fn standard() -> &'static SymmetryGroup {
        static GROUP: OnceLock<SymmetryGroup> = OnceLock::new();
        GROUP.get_or_init(|| SymmetryGroup::full(GameParams::STANDARD).expect("small group"))
    }

    /// The full group of `params`, shared for the standard game.
    pub(crate) fn for_game(params: GameParams) -> Option<Cow<'static, SymmetryGroup>> {
        if params == GameParams::STANDARD {
            Some(Cow::Borrowed(Self::standard()))
        } else {
            Self::full(params).map(Cow::Owned)
        }
    }

    /// All color × position permutations, if the group is small enough to enumerate.
    pub(crate) fn full(params: GameParams) -> Option<Self> {
        let (n, c) = (params.positions(), params.colors());
        if factorial(n).saturating_mul(factorial(c)) > MAX_GROUP_ORDER {
            return None;
        }
        let color_perms = permutations(c);
        let position_perms = permutations(n);
        let mut elems = Vec::with_capacity(color_perms.len() * position_perms.len());
        for cp in &color_perms {
            for pp in &position_perms {
                let mut p = Perm::identity();
                p.colors[..c].copy_from_slice(cp);
                p.positions[..n].copy_from_slice(pp);
                elems.push(p);
            }
        }
        let mut generators = Vec::new();
        for i in 0..c.saturating_sub(1) {
            let mut p = Perm::identity();
            p.colors.swap(i, i + 1);
            generators.push(p);
        }
        for i in 0..n.saturating_sub(1) {
            let mut p = Perm::identity();
            p.positions.swap(i, i + 1);
            generators.push(p);
        }
        Some(SymmetryGroup {
            params,
            elems,
            generators: Some(generators),
            representatives: OnceLock::new(),
        })
    }

    pub(crate) fn order(&self) -> usize {
        self.elems.len()
    }

    /// Subgroup of elements that map `guess` to itself.
    pub(crate) fn stabilizer(&self, guess: Code) -> Self {
        let pegs = self.params.decode(guess).expect("valid guess");
        let elems = self
            .elems
            .iter()
            .filter(|p| p.apply(&self.params, &pegs) == guess)
            .copied()
            .collect();
        SymmetryGroup {
            params: self.params,
            elems,
            generators: None,
            representatives: OnceLock::new(),
        }
    }

    /// The smallest code of every orbit, ascending.
    pub(crate) fn orbit_representatives(&self) -> &[Code] {
        self.representatives.get_or_init(|| self.compute_representatives())
    }

    fn compute_representatives(&self) -> Vec<Code> {
        let n = self.params.code_count();
        let mut parent: Vec<u32> = (0..n as u32).collect();
        fn find(parent: &mut [u32], mut x: u32) -> u32 {
            while parent[x as usize] != x {
                let up = parent[parent[x as usize] as usize];
                parent[x as usize] = up;
                x = up;
            }
            x
        }
        let gens = self.generators.as_deref().unwrap_or(&self.elems);
        let width = self.params.positions();
        let all_pegs: Vec<u8> = (0..n as u32)
            .flat_map(|c| self.params.decode(Code(c)).expect("in range"))
            .collect();
        for code in 0..n as u32 {
            let pegs = &all_pegs[code as usize * width..][..width];
            for g in gens {
                let image = g.apply(&self.params, pegs).0;
                let (a, b) = (find(&mut parent, code), find(&mut parent, image));
                if a != b {
                    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
                    parent[hi as usize] = lo;
                }
            }
        }
        (0..n as u32)
            .filter(|&c| find(&mut parent, c) == c)
            .map(Code)
            .collect()
    }
}
