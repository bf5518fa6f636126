//! Replay of the transfer chain from a structure to a complete-trace
//! equivalent one through grafts, workspace sums, balls and unravelings,
//! evaluating a modal sentence at every station.

use crate::error::{Error, Result};
use crate::games::{solve_ef, TupleStructure};
use crate::logic::{Formula, Model};
use crate::oracle::iso::find_isomorphism;
use crate::oracle::morphism::{find_morphism, MorphismKind};
use crate::structures::{copies, disjoint_union, disjoint_union_all, PointedStructure};
use crate::traces::{check_trace_relation, Bound, Relation};
use crate::unravel::{ml_graft_with, ml_unravel, Gluing};

/// One station of the chain.
#[derive(Clone, Debug)]
pub struct Station {
    pub name: String,
    pub structure: PointedStructure,
    pub value: bool,
    /// Check of the step from the previous station (`Ok` at the first).
    pub justification: std::result::Result<(), String>,
}

/// Outcome of a chain replay.
#[derive(Clone, Debug)]
pub struct ChainReport {
    pub k: usize,
    /// Whether the two ends are complete-trace equivalent at depth `k`.
    pub premise: bool,
    pub stations: Vec<Station>,
}

impl ChainReport {
    /// Whether all values agree and every step is justified.
    pub fn holds(&self) -> bool {
        self.stations.iter().all(|s| s.value == self.stations[0].value && s.justification.is_ok())
    }

    /// Index of the first station whose step fails, if any.
    pub fn first_break(&self) -> Option<usize> {
        self.stations.iter().position(|s| s.justification.is_err())
    }

    pub fn render(&self) -> String {
        let mut out = format!("CHAIN k {} PREMISE {}\n", self.k, self.premise);
        for (i, s) in self.stations.iter().enumerate() {
            let just = match &s.justification {
                Ok(()) => "ok".to_string(),
                Err(e) => format!("FAILED ({e})"),
            };
            out.push_str(&format!("{:>2} {:<24} {:<5} {}\n", i + 1, s.name, s.value, just));
        }
        out
    }
}

/// Workspace for a pointed structure `m` at depth `k` and rank `r`:
/// `2r` disjoint copies of `m + ball(m, k)`.
pub fn workspace(m: &PointedStructure, k: usize, r: usize) -> Result<crate::structures::Structure> {
    let unit = disjoint_union(&m.base, &m.ball(k).base)?;
    Ok(copies(&unit, 2 * r))
}

/// `x + w` pointed at the point of `x`.
fn extend(x: &PointedStructure, w: &crate::structures::Structure) -> Result<PointedStructure> {
    PointedStructure::new(disjoint_union_all(&[&x.base, w])?, x.point)
}

fn check(ok: Result<bool>, what: &str) -> std::result::Result<(), String> {
    match ok {
        Ok(true) => Ok(()),
        Ok(false) => Err(format!("{what} fails")),
        Err(e) => Err(e.to_string()),
    }
}

fn same_reachable_part(x: &PointedStructure, y: &PointedStructure) -> Result<bool> {
    Ok(find_isomorphism(&x.reachable_part(), &y.reachable_part()).is_some())
}

fn rank_equivalent(x: &PointedStructure, y: &PointedStructure, r: usize) -> Result<bool> {
    Ok(solve_ef(&TupleStructure::from(x), &TupleStructure::from(y), r)?.duplicator_wins())
}

/// The half chain from `a` to its unraveling: structure, graft, graft plus
/// workspace, ball plus workspace, ball, unraveling.
fn half(a: &PointedStructure, k: usize, r: usize, gluing: Gluing, tag: &str) -> Result<Vec<(String, PointedStructure, std::result::Result<(), String>)>> {
    let graft = ml_graft_with(a, k, gluing)?;
    let w = workspace(&graft, k, r)?;
    let graft_w = extend(&graft, &w)?;
    let ball = graft.ball(k);
    let ball_w = extend(&ball, &w)?;
    let unravel = ml_unravel(a, k)?.as_pointed()?;
    Ok(vec![
        (tag.to_string(), a.clone(), Ok(())),
        (
            format!("graft({tag})"),
            graft.clone(),
            check(check_trace_relation(Relation::Cltr, a, &graft, Bound::Exact).map(|v| v.holds), "cltr"),
        ),
        (format!("graft({tag}) + W"), graft_w.clone(), check(same_reachable_part(&graft, &graft_w), "extension")),
        (format!("ball({tag}) + W"), ball_w.clone(), check(rank_equivalent(&graft_w, &ball_w, r), "rank-r game")),
        (format!("ball({tag})"), ball.clone(), check(same_reachable_part(&ball_w, &ball), "extension")),
        (
            format!("unravel({tag})"),
            unravel.clone(),
            check(Ok(find_isomorphism(&ball, &unravel).is_some()), "ball isomorphism"),
        ),
    ])
}

/// Replays the chain for `phi` between `a` and `b` at rank `r`, depth
/// `k = 2^r`.
pub fn replay_prop86(a: &PointedStructure, b: &PointedStructure, r: usize, phi: &Formula) -> Result<ChainReport> {
    replay_prop86_with(a, b, r, phi, Gluing::Glued)
}

/// [`replay_prop86`] with a chosen graft gluing.
pub fn replay_prop86_with(
    a: &PointedStructure,
    b: &PointedStructure,
    r: usize,
    phi: &Formula,
    gluing: Gluing,
) -> Result<ChainReport> {
    a.signature().check_compatible(b.signature())?;
    let k = 1usize
        .checked_shl(r as u32)
        .filter(|&k| k <= 16)
        .ok_or_else(|| Error::InvalidArgument(format!("rank {r} is too large")))?;
    if phi.depth() > k {
        return Err(Error::InvalidArgument(format!("formula depth {} exceeds {k}", phi.depth())));
    }
    Model::new(a)?.check_symbols(phi)?;
    let premise = check_trace_relation(Relation::Cltr, a, b, Bound::Depth(k))?.holds;
    let left = half(a, k, r, gluing, "A")?;
    let mut right = half(b, k, r, gluing, "B")?;
    let (ua, ub) = (ml_unravel(a, k)?, ml_unravel(b, k)?);
    let span = check(find_morphism(&ua, &ub, MorphismKind::OpenSpan).map(|w| w.is_some()), "open span");
    let mut steps: Vec<(String, PointedStructure, std::result::Result<(), String>)> = left;
    right.reverse();
    let mut carried = span;
    for (name, s, just) in right {
        steps.push((name, s, carried));
        carried = just;
    }
    let stations = steps
        .into_iter()
        .map(|(name, structure, justification)| {
            let value = Model::new(&structure).and_then(|m| m.eval(phi))?;
            Ok(Station { name, structure, value, justification })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ChainReport { k, premise, stations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::logic::parse_formula;

    #[test]
    fn trivial_formula() {
        let (a, b) = (fixtures::load("fix1").unwrap(), fixtures::load("fix2").unwrap());
        let rep = replay_prop86(&a, &b, 1, &Formula::True).unwrap();
        assert_eq!(rep.stations.len(), 12);
        assert!(rep.premise);
        assert!(rep.holds(), "{}", rep.render());
    }

    #[test]
    fn fixture_chain_is_constant() {
        let (a, b) = (fixtures::load("fix1").unwrap(), fixtures::load("fix2").unwrap());
        let phi = parse_formula("(dia a tt)").unwrap();
        let rep = replay_prop86(&a, &b, 1, &phi).unwrap();
        assert!(rep.holds(), "{}", rep.render());
        assert!(rep.stations.iter().all(|s| s.value));
    }

    #[test]
    fn detached_graft_breaks_at_second_station() {
        let (a, b) = (fixtures::load("fix1").unwrap(), fixtures::load("fix2").unwrap());
        let phi = parse_formula("(dia a tt)").unwrap();
        let rep = replay_prop86_with(&a, &b, 0, &phi, Gluing::Detached).unwrap();
        assert_eq!(rep.first_break(), Some(1), "{}", rep.render());
    }

    #[test]
    fn rejects_deep_formula() {
        let a = fixtures::load("fix1").unwrap();
        let phi = parse_formula("(dia a (dia b (dia c tt)))").unwrap();
        assert!(replay_prop86(&a, &a, 1, &phi).is_err());
    }
}
