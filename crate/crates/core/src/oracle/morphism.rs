//! Exhaustive morphism search between forest objects: homomorphisms,
//! pathwise embeddings, isomorphisms and spans of open pathwise embeddings.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::error::{Error, Result};
use crate::games::tuples_agree;
use crate::structures::Structure;
use crate::unravel::{Flavor, ForestObject};

/// Kind of morphism searched for.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MorphismKind {
    Homomorphism,
    PathwiseEmbedding,
    OpenSpan,
    Isomorphism,
}

impl std::str::FromStr for MorphismKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "homomorphism" | "hom" => MorphismKind::Homomorphism,
            "pathwise_embedding" | "embedding" => MorphismKind::PathwiseEmbedding,
            "open_span" | "span" => MorphismKind::OpenSpan,
            "isomorphism" | "iso" => MorphismKind::Isomorphism,
            _ => return Err(Error::InvalidArgument(format!("unknown morphism kind `{s}`"))),
        })
    }
}

/// A span `X ← Z → Y` of open pathwise embeddings.
#[derive(Clone, Debug)]
pub struct Span {
    pub apex: ForestObject,
    pub left: Vec<usize>,
    pub right: Vec<usize>,
}

/// Evidence for a morphism: a node map from `X` to `Y`, or a span.
#[derive(Clone, Debug)]
pub struct MorphismWitness {
    pub kind: MorphismKind,
    pub map: Vec<usize>,
    pub span: Option<Span>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Local {
    /// Labels preserved from left to right.
    Preserve,
    /// Labels preserved and reflected.
    Reflect,
}

/// Whether mapping `xn` to `yn` respects the labels of the new node and the
/// relations it shares with its ancestors, given that the ancestors are
/// mapped to the corresponding ancestors of `yn`.
fn local_ok(x: &ForestObject, y: &ForestObject, xn: usize, yn: usize, mode: Local) -> bool {
    if x.depth(xn) != y.depth(yn) {
        return false;
    }
    match x.flavor {
        Flavor::Modal => {
            let (vx, vy) = (x.valuation(xn), y.valuation(yn));
            x.action(xn) == y.action(yn)
                && match mode {
                    Local::Preserve => vx & !vy == 0,
                    Local::Reflect => vx == vy,
                }
        }
        Flavor::Pebbled => {
            if x.pebble_of(xn) != y.pebble_of(yn) {
                return false;
            }
            let pairs: Vec<(usize, usize)> = x.path(xn).into_iter().zip(y.path(yn)).collect();
            tuples_agree(&x.structure, &y.structure, &pairs, pairs.len() - 1, mode == Local::Preserve)
        }
    }
}

fn compatible(x: &ForestObject, y: &ForestObject) -> Result<()> {
    if x.flavor != y.flavor {
        return Err(Error::InvalidArgument("objects of different kinds".into()));
    }
    x.structure.signature().check_compatible(y.structure.signature())
}

type Handle = Option<usize>;

struct Search<'a> {
    x: &'a ForestObject,
    y: &'a ForestObject,
    kind: MorphismKind,
    memo: HashMap<(usize, usize), bool>,
}

impl Search<'_> {
    fn mode(&self) -> Local {
        match self.kind {
            MorphismKind::Homomorphism => Local::Preserve,
            _ => Local::Reflect,
        }
    }

    /// Whether the subtree at `xn` maps onto the subtree at `yn`.
    fn node(&mut self, xn: usize, yn: usize) -> bool {
        if let Some(&r) = self.memo.get(&(xn, yn)) {
            return r;
        }
        let r = local_ok(self.x, self.y, xn, yn, self.mode()) && self.below(Some(xn), Some(yn));
        self.memo.insert((xn, yn), r);
        r
    }

    /// Whether the children of `hx` can be mapped to children of `hy`.
    fn below(&mut self, hx: Handle, hy: Handle) -> bool {
        let cx = self.x.handle_children(hx).to_vec();
        let cy = self.y.handle_children(hy).to_vec();
        match self.kind {
            MorphismKind::Homomorphism | MorphismKind::PathwiseEmbedding => {
                cx.iter().all(|&c| cy.iter().any(|&d| self.node(c, d)))
            }
            MorphismKind::Isomorphism => cx.len() == cy.len() && self.matching(&cx, &cy).is_some(),
            MorphismKind::OpenSpan => {
                cx.iter().all(|&c| cy.iter().any(|&d| self.node(c, d)))
                    && cy.iter().all(|&d| cx.iter().any(|&c| self.node(c, d)))
            }
        }
    }

    /// Perfect matching between equally long child lists, by augmenting paths.
    fn matching(&mut self, cx: &[usize], cy: &[usize]) -> Option<Vec<usize>> {
        let adj: Vec<Vec<usize>> =
            cx.iter().map(|&c| (0..cy.len()).filter(|&j| self.node(c, cy[j])).collect()).collect();
        let mut owner: Vec<Option<usize>> = vec![None; cy.len()];
        fn augment(i: usize, adj: &[Vec<usize>], owner: &mut [Option<usize>], seen: &mut [bool]) -> bool {
            for &j in &adj[i] {
                if !seen[j] {
                    seen[j] = true;
                    if owner[j].is_none() || augment(owner[j].unwrap(), adj, owner, seen) {
                        owner[j] = Some(i);
                        return true;
                    }
                }
            }
            false
        }
        for i in 0..cx.len() {
            let mut seen = vec![false; cy.len()];
            if !augment(i, &adj, &mut owner, &mut seen) {
                return None;
            }
        }
        let mut out = vec![0; cx.len()];
        for (j, o) in owner.iter().enumerate() {
            out[o.expect("perfect matching")] = cy[j];
        }
        Some(out)
    }

    fn build_map(&mut self, hx: Handle, hy: Handle, map: &mut [usize]) {
        let cx = self.x.handle_children(hx).to_vec();
        let cy = self.y.handle_children(hy).to_vec();
        let targets: Vec<usize> = if self.kind == MorphismKind::Isomorphism {
            self.matching(&cx, &cy).expect("matching exists")
        } else {
            cx.iter().map(|&c| *cy.iter().find(|&&d| self.node(c, d)).expect("image exists")).collect()
        };
        for (c, d) in cx.into_iter().zip(targets) {
            map[c] = d;
            self.build_map(Some(c), Some(d), map);
        }
    }

    /// The apex of the largest bisimulation: all related pairs reachable
    /// from related root pairs.
    fn build_span(&mut self) -> Span {
        let mut pairs: Vec<(usize, usize)> = Vec::new();
        let mut parent = Vec::new();
        let mut stack: Vec<(Handle, Handle, Option<usize>)> = vec![(None, None, None)];
        while let Some((hx, hy, up)) = stack.pop() {
            let cx = self.x.handle_children(hx).to_vec();
            let cy = self.y.handle_children(hy).to_vec();
            for &c in &cx {
                for &d in &cy {
                    if self.node(c, d) {
                        let z = pairs.len();
                        pairs.push((c, d));
                        parent.push(up);
                        stack.push((Some(c), Some(d), Some(z)));
                    }
                }
            }
        }
        let (x, y) = (self.x, self.y);
        let universe: Vec<String> =
            pairs.iter().map(|&(c, d)| format!("({},{})", x.id(c), y.id(d))).collect();
        let mut by_left: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (z, &(c, _)) in pairs.iter().enumerate() {
            by_left.entry(c).or_default().push(z);
        }
        let ancestor = |mut z: usize, depth: usize| {
            while x.depth(pairs[z].0) > depth {
                z = parent[z].expect("ancestor within the path");
            }
            z
        };
        let mut interp: BTreeMap<String, BTreeSet<Vec<usize>>> = BTreeMap::new();
        for (name, tuples) in x.structure.interp() {
            let set = interp.entry(name.clone()).or_default();
            for t in tuples {
                let deepest = *t.iter().max_by_key(|&&e| x.depth(e)).expect("nonempty tuple");
                for &z in by_left.get(&deepest).map(Vec::as_slice).unwrap_or(&[]) {
                    set.insert(t.iter().map(|&e| ancestor(z, x.depth(e))).collect());
                }
            }
        }
        let structure = Structure::from_parts(x.structure.signature().clone(), universe, interp);
        let origin = pairs.iter().map(|&(c, _)| x.origin[c].clone()).collect();
        let pebble = x.pebble.as_ref().map(|p| pairs.iter().map(|&(c, _)| p[c]).collect());
        let apex =
            ForestObject::new(x.flavor, structure, parent, origin, pebble).expect("apex is a forest");
        Span {
            apex,
            left: pairs.iter().map(|p| p.0).collect(),
            right: pairs.iter().map(|p| p.1).collect(),
        }
    }
}

/// Searches for a morphism of the given kind from `x` to `y`.
pub fn find_morphism(x: &ForestObject, y: &ForestObject, kind: MorphismKind) -> Result<Option<MorphismWitness>> {
    compatible(x, y)?;
    let mut s = Search { x, y, kind, memo: HashMap::new() };
    if !s.below(None, None) {
        return Ok(None);
    }
    if kind == MorphismKind::OpenSpan {
        let span = s.build_span();
        return Ok(Some(MorphismWitness { kind, map: Vec::new(), span: Some(span) }));
    }
    let mut map = vec![0; x.len()];
    s.build_map(None, None, &mut map);
    Ok(Some(MorphismWitness { kind, map, span: None }))
}

/// Checks that `map` sends roots to roots and children to children with
/// the label condition of `mode` at every node.
fn check_map(x: &ForestObject, y: &ForestObject, map: &[usize], mode: Local) -> std::result::Result<(), String> {
    if map.len() != x.len() {
        return Err("map does not cover the domain".into());
    }
    for n in 0..x.len() {
        let m = *map.get(n).ok_or("missing image")?;
        if m >= y.len() {
            return Err(format!("image of {} out of range", x.id(n)));
        }
        if x.parent[n].map(|p| map[p]) != y.parent[m] {
            return Err(format!("{} does not keep its parent", x.id(n)));
        }
        if !local_ok(x, y, n, m, mode) {
            return Err(format!("{} -> {} breaks the labels", x.id(n), y.id(m)));
        }
    }
    Ok(())
}

/// Whether every child of the image of `z` (and every root of `x`) is the
/// image of a child of `z`.
fn check_open(apex: &ForestObject, x: &ForestObject, map: &[usize]) -> std::result::Result<(), String> {
    let mut handles: Vec<Handle> = vec![None];
    handles.extend((0..apex.len()).map(Some));
    for h in handles {
        let covered: BTreeSet<usize> = apex.handle_children(h).iter().map(|&c| map[c]).collect();
        let target = x.handle_children(h.map(|z| map[z]));
        if let Some(miss) = target.iter().find(|t| !covered.contains(t)) {
            return Err(format!("extension to {} has no lift", x.id(*miss)));
        }
    }
    Ok(())
}

/// Independent verification of a morphism witness.
pub fn check_morphism(x: &ForestObject, y: &ForestObject, w: &MorphismWitness) -> std::result::Result<(), String> {
    compatible(x, y).map_err(|e| e.to_string())?;
    match w.kind {
        MorphismKind::Homomorphism => check_map(x, y, &w.map, Local::Preserve),
        MorphismKind::PathwiseEmbedding => check_map(x, y, &w.map, Local::Reflect),
        MorphismKind::Isomorphism => {
            check_map(x, y, &w.map, Local::Reflect)?;
            let image: BTreeSet<usize> = w.map.iter().copied().collect();
            if image.len() != y.len() || x.len() != y.len() {
                return Err("map is not a bijection".into());
            }
            Ok(())
        }
        MorphismKind::OpenSpan => {
            let span = w.span.as_ref().ok_or("missing span")?;
            check_map(&span.apex, x, &span.left, Local::Reflect)?;
            check_map(&span.apex, y, &span.right, Local::Reflect)?;
            check_open(&span.apex, x, &span.left)?;
            check_open(&span.apex, y, &span.right)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::structures::PointedStructure;
    use crate::unravel::{ml_unravel, pr_unravel, tree_unravel};

    fn fx(name: &str) -> PointedStructure {
        fixtures::load(name).unwrap()
    }

    const KINDS: [MorphismKind; 4] = [
        MorphismKind::Homomorphism,
        MorphismKind::PathwiseEmbedding,
        MorphismKind::OpenSpan,
        MorphismKind::Isomorphism,
    ];

    #[test]
    fn identity_witnesses() {
        let objects = [
            ml_unravel(&fx("fix2"), 2).unwrap(),
            tree_unravel(&fx("fix3"), 3).unwrap(),
            pr_unravel(&fixtures::load_structure("chain3").unwrap().0, 2, 2).unwrap(),
        ];
        for x in &objects {
            for kind in KINDS {
                let w = find_morphism(x, x, kind).unwrap().expect("identity");
                check_morphism(x, x, &w).unwrap();
            }
        }
    }

    #[test]
    fn fixture_examples() {
        let (u1, u2) = (ml_unravel(&fx("fix1"), 2).unwrap(), ml_unravel(&fx("fix2"), 2).unwrap());
        let w = find_morphism(&u1, &u2, MorphismKind::Homomorphism).unwrap().unwrap();
        check_morphism(&u1, &u2, &w).unwrap();
        let (v1, v2) = (ml_unravel(&fx("fix1"), 1).unwrap(), ml_unravel(&fx("fix2"), 1).unwrap());
        assert!(find_morphism(&v2, &v1, MorphismKind::Isomorphism).unwrap().is_none());
        let (t1, t2) = (tree_unravel(&fx("fix1"), 2).unwrap(), tree_unravel(&fx("fix2"), 2).unwrap());
        assert!(find_morphism(&t1, &t2, MorphismKind::OpenSpan).unwrap().is_none());
        let w = find_morphism(&u1, &u2, MorphismKind::OpenSpan).unwrap().unwrap();
        check_morphism(&u1, &u2, &w).unwrap();
    }

    #[test]
    fn rejects_bad_maps() {
        let (u3, u4) = (ml_unravel(&fx("fix3"), 2).unwrap(), ml_unravel(&fx("fix4"), 2).unwrap());
        let w = MorphismWitness { kind: MorphismKind::Homomorphism, map: vec![0; u3.len()], span: None };
        assert!(check_morphism(&u3, &u4, &w).is_err());
        assert!(find_morphism(&u3, &u4, MorphismKind::OpenSpan).unwrap().is_none());
    }
}
