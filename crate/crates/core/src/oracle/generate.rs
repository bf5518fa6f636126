//! Seeded random pointed structures and structure pairs.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::structures::{PointedStructure, Signature, Structure};

/// Edge probability per ordered pair of distinct states and action.
pub const EDGE_DENSITY: f64 = 0.3;
/// Probability that a proposition holds at a state.
pub const VALUATION_DENSITY: f64 = 0.5;

const PROPS: [&str; 2] = ["p", "q"];
const ACTS: [&str; 2] = ["a", "b"];

/// Random number generator of sample `index` under `seed`.
pub fn sample_rng(seed: u64, index: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed.wrapping_add(index as u64))
}

/// Modal signature with the first `props` of `p, q` and first `acts` of `a, b`.
pub fn signature(props: usize, acts: usize) -> Signature {
    Signature::modal(&PROPS[..props.min(2)], &ACTS[..acts.clamp(1, 2)])
}

/// Random modal signature: one or two actions, up to two propositions.
pub fn random_signature(rng: &mut impl Rng) -> Signature {
    let acts = rng.random_range(1..=2);
    let props = rng.random_range(0..=2);
    signature(props, acts)
}

/// Random structure over `sig` with exactly `n` states `s0 …`, pointed at
/// `s0`. Actions never relate a state to itself.
pub fn random_structure(rng: &mut impl Rng, sig: &Signature, n: usize) -> PointedStructure {
    let universe: Vec<String> = (0..n).map(|i| format!("s{i}")).collect();
    let mut interp: BTreeMap<String, BTreeSet<Vec<usize>>> = BTreeMap::new();
    for r in &sig.relations {
        let set = interp.entry(r.name.clone()).or_default();
        if r.arity == 1 {
            for x in 0..n {
                if rng.random_bool(VALUATION_DENSITY) {
                    set.insert(vec![x]);
                }
            }
        } else {
            for x in 0..n {
                for y in 0..n {
                    if x != y && rng.random_bool(EDGE_DENSITY) {
                        set.insert(vec![x, y]);
                    }
                }
            }
        }
    }
    let base = Structure::from_parts(sig.clone(), universe, interp);
    PointedStructure::new(base, 0).expect("nonempty structure")
}

/// Random structure with between one and `max_size` states.
pub fn random_pointed(rng: &mut impl Rng, sig: &Signature, max_size: usize) -> PointedStructure {
    let n = rng.random_range(1..=max_size.max(1));
    random_structure(rng, sig, n)
}

/// How the two structures of a pair relate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PairMode {
    /// Drawn independently over one signature.
    Independent,
    /// The second is a small edit of the first.
    Perturbed,
    /// The second is the first with a state split into two copies, which
    /// keeps the traces and usually breaks bisimilarity.
    Split,
    /// The second is a renamed copy of the first.
    Copy,
}

impl PairMode {
    pub const ALL: [PairMode; 4] = [PairMode::Independent, PairMode::Perturbed, PairMode::Split, PairMode::Copy];
}

fn rebuild(sig: &Signature, n: usize, interp: BTreeMap<String, BTreeSet<Vec<usize>>>) -> PointedStructure {
    let universe = (0..n).map(|i| format!("s{i}")).collect();
    PointedStructure::new(Structure::from_parts(sig.clone(), universe, interp), 0).expect("nonempty")
}

/// Toggles one action edge between distinct states, or one proposition if
/// there is a single state.
pub fn toggle_edge(rng: &mut impl Rng, p: &PointedStructure) -> PointedStructure {
    let sig = p.signature().clone();
    let n = p.base.len();
    let mut interp = p.base.interp().clone();
    let acts = sig.acts();
    let props = sig.props();
    if n >= 2 {
        let act = &acts[rng.random_range(0..acts.len())];
        let x = rng.random_range(0..n);
        let mut y = rng.random_range(0..n - 1);
        if y >= x {
            y += 1;
        }
        let set = interp.get_mut(act).expect("declared action");
        if !set.remove(&vec![x, y]) {
            set.insert(vec![x, y]);
        }
    } else if !props.is_empty() {
        let prop = &props[rng.random_range(0..props.len())];
        let set = interp.get_mut(prop).expect("declared proposition");
        if !set.remove(&vec![0]) {
            set.insert(vec![0]);
        }
    }
    rebuild(&sig, n, interp)
}

/// Splits a random state into two states with the same valuation and the
/// same outgoing edges; each incoming edge goes to one or both copies.
pub fn split_state(rng: &mut impl Rng, p: &PointedStructure) -> PointedStructure {
    let sig = p.signature().clone();
    let n = p.base.len();
    let x = rng.random_range(0..n);
    let twin = n;
    let mut interp: BTreeMap<String, BTreeSet<Vec<usize>>> = BTreeMap::new();
    for (name, tuples) in p.base.interp() {
        let set = interp.entry(name.clone()).or_default();
        for t in tuples {
            set.insert(t.clone());
            match t.as_slice() {
                [e] if *e == x => {
                    set.insert(vec![twin]);
                }
                [u, v] => {
                    if *u == x {
                        set.insert(vec![twin, *v]);
                    }
                    if *v == x {
                        match rng.random_range(0..3) {
                            0 => {}
                            1 => {
                                set.remove(t);
                                set.insert(vec![*u, twin]);
                            }
                            _ => {
                                set.insert(vec![*u, twin]);
                            }
                        }
                    }
                }
                _ => {}
            }
        }
    }
    rebuild(&sig, n + 1, interp)
}

/// A random pair of structures over one random signature, each with at most
/// `max_size` states (a split may add one state).
pub fn random_pair(seed: u64, index: usize, max_size: usize, mode: PairMode) -> (PointedStructure, PointedStructure) {
    let mut rng = sample_rng(seed, index);
    let sig = random_signature(&mut rng);
    let a = random_pointed(&mut rng, &sig, max_size);
    let b = match mode {
        PairMode::Independent => random_pointed(&mut rng, &sig, max_size),
        PairMode::Perturbed => toggle_edge(&mut rng, &a),
        PairMode::Split if a.base.len() < max_size => split_state(&mut rng, &a),
        PairMode::Split => toggle_edge(&mut rng, &a),
        PairMode::Copy => a.clone(),
    };
    (a, b)
}

/// Pair mode used for sample `index`, cycling through all modes.
pub fn mode_for(index: usize) -> PairMode {
    PairMode::ALL[index % PairMode::ALL.len()]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproducible_and_loop_free() {
        for i in 0..20 {
            let (a, b) = random_pair(5, i, 4, mode_for(i));
            let (a2, b2) = random_pair(5, i, 4, mode_for(i));
            assert_eq!(a, a2);
            assert_eq!(b, b2);
            for s in [&a, &b] {
                assert!(s.base.len() <= 4);
                for act in s.signature().acts() {
                    assert!(s.base.tuples(&act).iter().all(|t| t[0] != t[1]));
                }
            }
        }
    }

    #[test]
    fn split_keeps_outgoing_edges() {
        let mut rng = sample_rng(1, 0);
        let sig = signature(1, 1);
        let a = random_structure(&mut rng, &sig, 3);
        let b = split_state(&mut rng, &a);
        assert_eq!(b.base.len(), 4);
        assert!(b.base.tuple_count() >= a.base.tuple_count());
    }
}
