//! Randomised verification suites. Each sample is decided independently
//! through separate code paths and the suite reports how many agree.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::games::{
    replay_back_and_forth, replay_bisim, replay_ef, replay_ppeb, solve_back_and_forth, solve_bisim, solve_ef,
    solve_ppeb, TupleStructure, Variant, Witness,
};
use crate::logic::{classify, graded_counts_agree, synth_characteristic, synth_distinguishing, Fragment, Model};
use crate::oracle::cor74::{run_cor74, Cor74Params};
use crate::oracle::generate::{mode_for, random_pair, random_pointed, random_signature, sample_rng};
use crate::oracle::iso::find_isomorphism;
use crate::oracle::morphism::{check_morphism, find_morphism, MorphismKind};
use crate::structures::{copies, disjoint_union, PointedStructure};
use crate::traces::{check_trace_relation, gltr_bijection, Bound, Relation};
use crate::unravel::{ml_graft, ml_unravel, pr_unravel, tree_unravel, ForestObject};

/// Names of the available suites.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Thm61,
    Thm48,
    Thm54,
    Prop84,
    Prop85,
    Lemma83,
    Cor74,
    Lemma313,
    Distinguish,
    Idempotence,
    Coherence,
}

impl Suite {
    pub const ALL: [Suite; 11] = [
        Suite::Thm61,
        Suite::Thm48,
        Suite::Thm54,
        Suite::Prop84,
        Suite::Prop85,
        Suite::Lemma83,
        Suite::Cor74,
        Suite::Lemma313,
        Suite::Distinguish,
        Suite::Idempotence,
        Suite::Coherence,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Thm61 => "thm61",
            Suite::Thm48 => "thm48",
            Suite::Thm54 => "thm54",
            Suite::Prop84 => "prop84",
            Suite::Prop85 => "prop85",
            Suite::Lemma83 => "lemma83",
            Suite::Cor74 => "cor74",
            Suite::Lemma313 => "lemma313",
            Suite::Distinguish => "distinguish",
            Suite::Idempotence => "idempotence",
            Suite::Coherence => "coherence",
        }
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown suite `{s}`")))
    }
}

/// Suite parameters. `k` is the depth bound (the rank `r` for lemma83);
/// `len` is the pebble-sequence bound of thm54; `props` and `acts` size
/// the cor74 signature.
#[derive(Clone, Copy, Debug)]
pub struct SuiteParams {
    pub size: usize,
    pub k: usize,
    pub samples: usize,
    pub seed: u64,
    pub len: usize,
    pub props: usize,
    pub acts: usize,
}

impl Default for SuiteParams {
    fn default() -> Self {
        SuiteParams { size: 3, k: 2, samples: 20, seed: 0, len: 4, props: 2, acts: 2 }
    }
}

/// Aggregated outcome of a suite.
#[derive(Clone, Debug)]
pub struct Report {
    pub name: String,
    pub samples: usize,
    pub agree: usize,
    pub fail: usize,
    pub counterexamples: Vec<String>,
    pub notes: Vec<String>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.fail == 0
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "SUITE {} SAMPLES {} AGREE {} FAIL {}", self.name, self.samples, self.agree, self.fail)?;
        for n in &self.notes {
            writeln!(f, "NOTE {n}")?;
        }
        for c in &self.counterexamples {
            writeln!(f, "COUNTEREXAMPLE {c}")?;
        }
        Ok(())
    }
}

type Outcome = std::result::Result<(), String>;

fn json(p: &PointedStructure) -> String {
    serde_json::to_string(&p.to_file()).expect("structure files serialise")
}

fn err(e: Error) -> String {
    e.to_string()
}

fn collect(name: &str, outcomes: Vec<Outcome>) -> Report {
    let samples = outcomes.len();
    let counterexamples: Vec<String> = outcomes
        .into_iter()
        .enumerate()
        .filter_map(|(i, o)| o.err().map(|e| format!("sample {i}: {e}")))
        .collect();
    let fail = counterexamples.len();
    Report { name: name.to_string(), samples, agree: samples - fail, fail, counterexamples, notes: Vec::new() }
}

fn per_sample(p: &SuiteParams, f: impl Fn(usize) -> Outcome + Sync + Send) -> Vec<Outcome> {
    (0..p.samples).into_par_iter().map(f).collect()
}

fn pair(p: &SuiteParams, i: usize) -> (PointedStructure, PointedStructure) {
    random_pair(p.seed, i, p.size, mode_for(i))
}

fn single(p: &SuiteParams, i: usize) -> PointedStructure {
    let mut rng = sample_rng(p.seed, i);
    let sig = random_signature(&mut rng);
    random_pointed(&mut rng, &sig, p.size)
}

fn describe(a: &PointedStructure, b: &PointedStructure) -> String {
    format!("left {} right {}", json(a), json(b))
}

fn morphism(x: &ForestObject, y: &ForestObject, kind: MorphismKind) -> std::result::Result<bool, String> {
    match find_morphism(x, y, kind).map_err(err)? {
        Some(w) => {
            check_morphism(x, y, &w).map_err(|e| format!("{kind:?} witness rejected: {e}"))?;
            Ok(true)
        }
        None => Ok(false),
    }
}

/// Categorical, behavioural and logical decisions of one relation.
fn thm61_item(
    rel: Relation,
    a: &PointedStructure,
    b: &PointedStructure,
    k: usize,
) -> std::result::Result<[bool; 3], String> {
    let (ua, ub) = (ml_unravel(a, k).map_err(err)?, ml_unravel(b, k).map_err(err)?);
    let (ma, mb) = (Model::new(a).map_err(err)?, Model::new(b).map_err(err)?);
    let at = |m: &Model, f: &crate::logic::Formula| m.sat(f, m.kripke.point);
    let characteristic = |p: &PointedStructure, frag| synth_characteristic(p, k, frag).map_err(err);
    Ok(match rel {
        Relation::Tr => [
            morphism(&ua, &ub, MorphismKind::Homomorphism)?,
            check_trace_relation(rel, a, b, Bound::Depth(k)).map_err(err)?.holds,
            at(&mb, &characteristic(a, Fragment::DiamondPos)?),
        ],
        Relation::Ltr => [
            morphism(&ua, &ub, MorphismKind::PathwiseEmbedding)?,
            check_trace_relation(rel, a, b, Bound::Depth(k)).map_err(err)?.holds,
            at(&mb, &characteristic(a, Fragment::Diamond)?),
        ],
        Relation::Cltr => [
            morphism(&ua, &ub, MorphismKind::OpenSpan)?,
            check_trace_relation(rel, a, b, Bound::Depth(k)).map_err(err)?.holds,
            at(&mb, &characteristic(a, Fragment::DeadlockDiamond)?)
                && at(&ma, &characteristic(b, Fragment::DeadlockDiamond)?),
        ],
        Relation::Gltr => [
            morphism(&ua, &ub, MorphismKind::Isomorphism)?,
            gltr_bijection(a, b, k).map_err(err)?.is_some(),
            graded_counts_agree(a, b, k).map_err(err)?,
        ],
        Relation::Rt => unreachable!("ready traces are not part of this suite"),
    })
}

const THM61_RELATIONS: [Relation; 4] = [Relation::Tr, Relation::Ltr, Relation::Cltr, Relation::Gltr];

fn thm61(p: &SuiteParams) -> Report {
    let k = p.k;
    let results: Vec<std::result::Result<[bool; 4], String>> = (0..p.samples)
        .into_par_iter()
        .map(|i| {
            let (a, b) = pair(p, i);
            let mut verdicts = [false; 4];
            for (slot, rel) in THM61_RELATIONS.into_iter().enumerate() {
                let [cat, beh, log] = thm61_item(rel, &a, &b, k)?;
                if !(cat == beh && beh == log) {
                    return Err(format!(
                        "{} categorical {cat} behavioural {beh} logical {log}; {}",
                        rel.name(),
                        describe(&a, &b)
                    ));
                }
                verdicts[slot] = cat;
            }
            Ok(verdicts)
        })
        .collect();
    let held: Vec<String> = THM61_RELATIONS
        .iter()
        .enumerate()
        .map(|(slot, rel)| {
            let n = results.iter().filter(|r| matches!(r, Ok(v) if v[slot])).count();
            format!("{} {n}", rel.name())
        })
        .collect();
    let mut report = collect("thm61", results.into_iter().map(|r| r.map(|_| ())).collect());
    report.notes.push(format!("holding pairs: {}", held.join(", ")));
    report
}

fn thm48(p: &SuiteParams) -> Report {
    let k = p.k;
    let outcomes = per_sample(p, |i| {
        let (a, b) = pair(p, i);
        let bisim = solve_bisim(&a, &b, k).map_err(err)?;
        replay_bisim(&a, &b, k, &bisim)?;
        let cltr = check_trace_relation(Relation::Cltr, &a, &b, Bound::Depth(k)).map_err(err)?.holds;
        if bisim.duplicator_wins() && !cltr {
            return Err(format!("bisimilar but not cltr; {}", describe(&a, &b)));
        }
        let (ua, ub) = (ml_unravel(&a, k).map_err(err)?, ml_unravel(&b, k).map_err(err)?);
        let emb = morphism(&ua, &ub, MorphismKind::PathwiseEmbedding)?
            && morphism(&ub, &ua, MorphismKind::PathwiseEmbedding)?;
        let ltr = check_trace_relation(Relation::Ltr, &a, &b, Bound::Depth(k)).map_err(err)?.holds
            && check_trace_relation(Relation::Ltr, &b, &a, Bound::Depth(k)).map_err(err)?.holds;
        if emb && !ltr {
            return Err(format!("embeddings both ways but not ltr; {}", describe(&a, &b)));
        }
        let (ta, tb) = (tree_unravel(&a, k).map_err(err)?, tree_unravel(&b, k).map_err(err)?);
        let iso = morphism(&ta, &tb, MorphismKind::Isomorphism)?;
        let gltr = gltr_bijection(&a, &b, k).map_err(err)?.is_some();
        if iso && !gltr {
            return Err(format!("isomorphic tree unravelings but not gltr; {}", describe(&a, &b)));
        }
        Ok(())
    });
    let mut report = collect("thm48", outcomes);
    let fixture = || -> Result<(bool, bool)> {
        let (a, b) = (crate::fixtures::load("fix1")?, crate::fixtures::load("fix2")?);
        Ok((
            solve_bisim(&a, &b, 2)?.duplicator_wins(),
            check_trace_relation(Relation::Cltr, &a, &b, Bound::Depth(3))?.holds,
        ))
    };
    match fixture() {
        Ok((false, true)) => report.notes.push("fixture fix1/fix2 bisim_2 false cltr_3 true".into()),
        other => {
            report.fail += 1;
            report.counterexamples.push(format!("fixture fix1/fix2 expected bisim false, cltr true, got {other:?}"));
        }
    }
    report
}

fn thm54(p: &SuiteParams) -> Report {
    let (k, n) = (p.k, p.len);
    collect(
        "thm54",
        per_sample(p, |i| {
            let (a, b) = pair(p, i);
            let ppeb = solve_ppeb(&a.base, &b.base, k, n).map_err(err)?;
            if let Witness::Sequence(_) = ppeb.witness {
                replay_ppeb(&a.base, &b.base, k, n, &ppeb)?;
            }
            let (x, y) = (pr_unravel(&a.base, k, n).map_err(err)?, pr_unravel(&b.base, k, n).map_err(err)?);
            let bf = solve_back_and_forth(&x, &y, Variant::Full).map_err(err)?;
            if ppeb.winner != bf.winner {
                return Err(format!(
                    "pebble game {} back-and-forth {}; {}",
                    ppeb.winner,
                    bf.winner,
                    describe(&a, &b)
                ));
            }
            Ok(())
        }),
    )
}

fn prop84(p: &SuiteParams) -> Report {
    collect(
        "prop84",
        per_sample(p, |i| {
            let a = single(p, i);
            let g = ml_graft(&a, p.k).map_err(err)?;
            let v = check_trace_relation(Relation::Cltr, &a, &g, Bound::Exact).map_err(err)?;
            if !v.holds {
                return Err(format!("{:?}; {}", v.witness, json(&a)));
            }
            Ok(())
        }),
    )
}

fn prop85(p: &SuiteParams) -> Report {
    collect(
        "prop85",
        per_sample(p, |i| {
            let a = single(p, i);
            let ball = ml_graft(&a, p.k).map_err(err)?.ball(p.k);
            let unravel = ml_unravel(&a, p.k).map_err(err)?.as_pointed().map_err(err)?;
            match find_isomorphism(&ball, &unravel) {
                Some(_) => Ok(()),
                None => Err(format!("ball of the graft is not the unraveling; {}", json(&a))),
            }
        }),
    )
}

fn lemma83(p: &SuiteParams) -> Report {
    let r = p.k;
    let mut report = collect(
        "lemma83",
        per_sample(p, |i| {
            let a = single(p, i);
            let k = 1usize << r.min(16);
            let ball = a.ball(k);
            let unit = disjoint_union(&a.base, &ball.base).map_err(err)?;
            let w = copies(&unit, 2 * r);
            let left = TupleStructure { base: disjoint_union(&a.base, &w).map_err(err)?, tuple: vec![a.point] };
            let right =
                TupleStructure { base: disjoint_union(&ball.base, &w).map_err(err)?, tuple: vec![ball.point] };
            let g = solve_ef(&left, &right, r).map_err(err)?;
            replay_ef(&left, &right, r, &g)?;
            if !g.duplicator_wins() {
                return Err(format!("Spoiler wins at rank {r}; {}", json(&a)));
            }
            Ok(())
        }),
    );
    report.notes.push(format!("rank {r} depth {}", 1usize << r.min(16)));
    report
}

fn lemma313(p: &SuiteParams) -> Report {
    let k = p.k;
    collect(
        "lemma313",
        per_sample(p, |i| {
            let (a, b) = pair(p, i);
            let (ua, ub) = (ml_unravel(&a, k).map_err(err)?, ml_unravel(&b, k).map_err(err)?);
            let mut wins = Vec::new();
            for v in [Variant::Full, Variant::Existential, Variant::ExistentialPositive] {
                let g = solve_back_and_forth(&ua, &ub, v).map_err(err)?;
                replay_back_and_forth(&ua, &ub, v, &g).map_err(|e| format!("{v:?} replay: {e}"))?;
                wins.push(g.duplicator_wins());
            }
            let (full, ex, pos) = (wins[0], wins[1], wins[2]);
            let fail = |what: &str| Err(format!("{what}; {}", describe(&a, &b)));
            if (full && !ex) || (ex && !pos) {
                return fail("variant ladder broken");
            }
            if full != morphism(&ua, &ub, MorphismKind::OpenSpan)? {
                return fail("full game disagrees with open span");
            }
            if ex != morphism(&ua, &ub, MorphismKind::PathwiseEmbedding)? {
                return fail("existential game disagrees with pathwise embedding");
            }
            if pos != morphism(&ua, &ub, MorphismKind::Homomorphism)? {
                return fail("positive game disagrees with homomorphism");
            }
            if full {
                let both = morphism(&ub, &ua, MorphismKind::PathwiseEmbedding)?
                    && morphism(&ub, &ua, MorphismKind::Homomorphism)?
                    && morphism(&ua, &ub, MorphismKind::Homomorphism)?;
                if !both {
                    return fail("full game without morphisms both ways");
                }
            }
            let (ta, tb) = (tree_unravel(&a, k).map_err(err)?, tree_unravel(&b, k).map_err(err)?);
            let tree = solve_back_and_forth(&ta, &tb, Variant::Full).map_err(err)?;
            if solve_bisim(&a, &b, k).map_err(err)?.winner != tree.winner {
                return fail("bisimulation disagrees with the game on tree unravelings");
            }
            Ok(())
        }),
    )
}

fn distinguish(p: &SuiteParams) -> Report {
    let k = p.k;
    collect(
        "distinguish",
        per_sample(p, |i| {
            let (a, b) = pair(p, i);
            let (ma, mb) = (Model::new(&a).map_err(err)?, Model::new(&b).map_err(err)?);
            for frag in Fragment::SYNTHESIS {
                let rel = frag.relation().expect("synthesis fragment");
                let holds = |x: &PointedStructure, y: &PointedStructure| {
                    check_trace_relation(rel, x, y, Bound::Depth(k)).map(|v| v.holds).map_err(err)
                };
                let equivalent = if rel.is_directed() { holds(&a, &b)? && holds(&b, &a)? } else { holds(&a, &b)? };
                match synth_distinguishing(&a, &b, Some(k), frag).map_err(err)? {
                    None if equivalent => {}
                    None => return Err(format!("{frag}: relation fails without a formula; {}", describe(&a, &b))),
                    Some(f) => {
                        let (x, y) = (ma.sat(&f, ma.kripke.point), mb.sat(&f, mb.kripke.point));
                        let class = classify(&f);
                        if equivalent || x == y || !class.contains(frag) || class.depth > k {
                            return Err(format!("{frag}: bad formula {f}; {}", describe(&a, &b)));
                        }
                    }
                }
            }
            Ok(())
        }),
    )
}

fn idempotence(p: &SuiteParams) -> Report {
    let k = p.k;
    collect(
        "idempotence",
        per_sample(p, |i| {
            let a = single(p, i);
            let u = ml_unravel(&a, k).map_err(err)?;
            let uu = ml_unravel(&u.as_pointed().map_err(err)?, k).map_err(err)?;
            if !morphism(&uu, &u, MorphismKind::Isomorphism)? {
                return Err(format!("linear unraveling not idempotent; {}", json(&a)));
            }
            let t = tree_unravel(&a, k).map_err(err)?;
            let tt = tree_unravel(&t.as_pointed().map_err(err)?, k).map_err(err)?;
            if !morphism(&tt, &t, MorphismKind::Isomorphism)? {
                return Err(format!("tree unraveling not idempotent; {}", json(&a)));
            }
            Ok(())
        }),
    )
}

fn coherence(p: &SuiteParams) -> Report {
    collect(
        "coherence",
        per_sample(p, |i| {
            let (a, b) = pair(p, i);
            let bound = a.base.len() * b.base.len();
            let bounded = check_trace_relation(Relation::Cltr, &a, &b, Bound::Depth(bound)).map_err(err)?.holds;
            let exact = check_trace_relation(Relation::Cltr, &a, &b, Bound::Exact).map_err(err)?.holds;
            if bounded != exact {
                return Err(format!("bounded {bounded} exact {exact} at depth {bound}; {}", describe(&a, &b)));
            }
            Ok(())
        }),
    )
}

fn cor74(p: &SuiteParams) -> Result<Report> {
    let params =
        Cor74Params { size: p.size, k: p.k, props: p.props, acts: p.acts, samples: p.samples, seed: p.seed };
    let out = run_cor74(&params)?;
    let fail = out.failures.len();
    Ok(Report {
        name: "cor74".into(),
        samples: out.invariant,
        agree: out.invariant - fail,
        fail,
        counterexamples: out.failures,
        notes: vec![format!("universe {} formulas {} invariant {}", out.universe, out.formulas, out.invariant)],
    })
}

/// Runs a suite by name.
pub fn run_suite(name: &str, params: &SuiteParams) -> Result<Report> {
    let suite: Suite = name.parse()?;
    Ok(match suite {
        Suite::Thm61 => thm61(params),
        Suite::Thm48 => thm48(params),
        Suite::Thm54 => thm54(params),
        Suite::Prop84 => prop84(params),
        Suite::Prop85 => prop85(params),
        Suite::Lemma83 => lemma83(params),
        Suite::Cor74 => cor74(params)?,
        Suite::Lemma313 => lemma313(params),
        Suite::Distinguish => distinguish(params),
        Suite::Idempotence => idempotence(params),
        Suite::Coherence => coherence(params),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(samples: usize) -> SuiteParams {
        SuiteParams { size: 3, k: 2, samples, seed: 11, len: 3, props: 1, acts: 1 }
    }

    #[test]
    fn unknown_suite() {
        assert!(run_suite("nope", &small(1)).is_err());
    }

    #[test]
    fn quick_runs_pass() {
        for suite in Suite::ALL {
            let mut p = small(6);
            if suite == Suite::Lemma83 {
                p.k = 1;
            }
            let r = run_suite(suite.name(), &p).unwrap();
            assert!(r.passed(), "{r}");
        }
    }

    #[test]
    fn report_format() {
        let r = run_suite("prop84", &small(3)).unwrap();
        assert!(r.to_string().starts_with("SUITE prop84 SAMPLES 3 AGREE 3 FAIL 0"));
    }
}
