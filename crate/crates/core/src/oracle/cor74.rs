//! Desk-scale check that sentences invariant under bounded trace inclusion
//! are equivalent to disjunctions of positive characteristic formulas.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::logic::{classify, synth_characteristic, Formula, Fragment, Model};
use crate::oracle::generate::{random_pointed, sample_rng, signature};
use crate::structures::{PointedStructure, Signature, Structure};
use crate::traces::{check_trace_relation, Bound, Relation};

/// Largest admissible structure size, depth and symbol counts.
pub const MAX_SIZE: usize = 3;
pub const MAX_DEPTH: usize = 2;
pub const MAX_SYMBOLS: usize = 2;
/// Largest enumerated formula size (syntax tree nodes).
pub const MAX_FORMULA_SIZE: usize = 5;

/// Parameters of the check.
#[derive(Clone, Copy, Debug)]
pub struct Cor74Params {
    pub size: usize,
    pub k: usize,
    pub props: usize,
    pub acts: usize,
    pub samples: usize,
    pub seed: u64,
}

/// Outcome of the check.
#[derive(Clone, Debug)]
pub struct Cor74Outcome {
    pub universe: usize,
    pub formulas: usize,
    pub invariant: usize,
    pub failures: Vec<String>,
}

/// Refuses parameters beyond the enumeration budget.
pub fn check_budget(p: &Cor74Params) -> Result<()> {
    if p.size > MAX_SIZE || p.k > MAX_DEPTH || p.props > MAX_SYMBOLS || p.acts > MAX_SYMBOLS || p.acts == 0 {
        return Err(Error::Unsupported(format!(
            "cor74 enumerates only size <= {MAX_SIZE}, k <= {MAX_DEPTH}, 1 <= actions <= {MAX_SYMBOLS}, \
             propositions <= {MAX_SYMBOLS}"
        )));
    }
    Ok(())
}

/// Every one-state structure over `sig`, followed by `samples` random ones.
fn universe(sig: &Signature, size: usize, samples: usize, seed: u64) -> Vec<PointedStructure> {
    let (props, acts) = (sig.props(), sig.acts());
    let mut out = Vec::new();
    for v in 0..1u64 << props.len() {
        for loops in 0..1u64 << acts.len() {
            let mut interp: BTreeMap<String, BTreeSet<Vec<usize>>> = BTreeMap::new();
            for (i, p) in props.iter().enumerate() {
                if v >> i & 1 == 1 {
                    interp.entry(p.clone()).or_default().insert(vec![0]);
                }
            }
            for (i, a) in acts.iter().enumerate() {
                if loops >> i & 1 == 1 {
                    interp.entry(a.clone()).or_default().insert(vec![0, 0]);
                }
            }
            let base = Structure::from_parts(sig.clone(), vec!["s0".into()], interp);
            out.push(PointedStructure::new(base, 0).expect("one state"));
        }
    }
    for i in 0..samples {
        let mut rng = sample_rng(seed, i);
        out.push(random_pointed(&mut rng, sig, size));
    }
    out
}

/// Formulas of the deadlock fragment with depth `≤ k` and at most
/// `max_size` nodes; commutative operators list their arguments once.
pub fn enumerate_formulas(sig: &Signature, k: usize, max_size: usize) -> Vec<Formula> {
    let mut by_size: Vec<Vec<Formula>> = vec![Vec::new(); max_size + 1];
    if max_size == 0 {
        return Vec::new();
    }
    by_size[1].push(Formula::True);
    by_size[1].push(Formula::False);
    for p in sig.props() {
        by_size[1].push(Formula::Prop(p.clone()));
        by_size[1].push(Formula::NotProp(p));
    }
    if k >= 1 {
        by_size[1].push(Formula::Deadlock);
    }
    for s in 2..=max_size {
        let mut level = Vec::new();
        for f in &by_size[s - 1] {
            if f.depth() < k && *f != Formula::False {
                for a in sig.acts() {
                    level.push(Formula::Dia(a, Box::new(f.clone())));
                }
            }
        }
        for i in 1..s - 1 {
            let j = s - 1 - i;
            if i > j {
                break;
            }
            for (x, f) in by_size[i].iter().enumerate() {
                let start = if i == j { x + 1 } else { 0 };
                for g in &by_size[j][start..] {
                    level.push(Formula::And(vec![f.clone(), g.clone()]));
                    level.push(Formula::Or(vec![f.clone(), g.clone()]));
                }
            }
        }
        by_size[s] = level;
    }
    by_size.into_iter().flatten().collect()
}

/// Runs the check over a random universe.
pub fn run_cor74(p: &Cor74Params) -> Result<Cor74Outcome> {
    check_budget(p)?;
    let sig = signature(p.props, p.acts);
    let models = universe(&sig, p.size, p.samples, p.seed);
    let prepared: Vec<Model> = models.iter().map(Model::new).collect::<Result<_>>()?;
    let n = models.len();
    let below: Vec<Vec<bool>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (0..n)
                .map(|j| {
                    check_trace_relation(Relation::Tr, &models[i], &models[j], Bound::Depth(p.k))
                        .map(|v| v.holds)
                        .unwrap_or(false)
                })
                .collect()
        })
        .collect();
    let formulas = enumerate_formulas(&sig, p.k, MAX_FORMULA_SIZE);
    let mut extensions: BTreeMap<Vec<bool>, Formula> = BTreeMap::new();
    for f in &formulas {
        let ext: Vec<bool> = prepared.iter().map(|m| m.sat(f, m.kripke.point)).collect();
        extensions.entry(ext).or_insert_with(|| f.clone());
    }
    let invariant: Vec<(Vec<bool>, Formula)> = extensions
        .into_iter()
        .filter(|(ext, _)| (0..n).all(|i| !ext[i] || (0..n).all(|j| !below[i][j] || ext[j])))
        .collect();
    let characteristic: Vec<Formula> = models
        .iter()
        .map(|m| synth_characteristic(m, p.k, Fragment::DiamondPos))
        .collect::<Result<_>>()?;
    let failures: Vec<String> = invariant
        .par_iter()
        .filter_map(|(ext, phi)| {
            let minimal: Vec<usize> = (0..n)
                .filter(|&i| ext[i])
                .filter(|&i| !(0..n).any(|j| ext[j] && below[j][i] && !below[i][j]))
                .collect();
            let psi = Formula::or(minimal.iter().map(|&i| characteristic[i].clone()));
            let class = classify(&psi);
            if !class.contains(Fragment::DiamondPos) || class.depth > p.k {
                return Some(format!("{phi}: disjunction leaves the positive fragment"));
            }
            (0..n)
                .find(|&u| prepared[u].sat(&psi, prepared[u].kripke.point) != ext[u])
                .map(|u| format!("{phi}: differs from {psi} on {}", serde_json::to_string(&models[u].to_file()).unwrap()))
        })
        .collect();
    Ok(Cor74Outcome { universe: n, formulas: formulas.len(), invariant: invariant.len(), failures })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enumeration_respects_bounds() {
        let sig = signature(1, 1);
        let fs = enumerate_formulas(&sig, 1, 4);
        assert!(fs.iter().all(|f| f.depth() <= 1 && f.size() <= 4));
        assert!(fs.iter().all(|f| classify(f).contains(Fragment::DeadlockDiamond)));
        assert!(fs.contains(&Formula::Dia("a".into(), Box::new(Formula::Prop("p".into())))));
    }

    #[test]
    fn refuses_outside_budget() {
        let p = Cor74Params { size: 4, k: 2, props: 1, acts: 1, samples: 1, seed: 0 };
        assert!(matches!(run_cor74(&p), Err(Error::Unsupported(_))));
        let p = Cor74Params { size: 3, k: 3, props: 1, acts: 1, samples: 1, seed: 0 };
        assert!(run_cor74(&p).is_err());
    }

    #[test]
    fn small_run_passes() {
        let p = Cor74Params { size: 2, k: 1, props: 1, acts: 1, samples: 10, seed: 3 };
        let out = run_cor74(&p).unwrap();
        assert!(out.invariant > 0);
        assert!(out.failures.is_empty(), "{:?}", out.failures);
    }
}
