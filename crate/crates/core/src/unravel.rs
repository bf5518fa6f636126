//! Unravelings: linear modal unravelings, tree unravelings, the branch
//! decomposition of forests, grafted structures and pebble-sequence
//! unravelings. Every construction records its counit, mapping each node to
//! the element of the source structure it came from.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::structures::{ForestBlock, Kripke, PointedStructure, Signature, Structure, StructureFile};
use crate::traces::{maximal_runs, runs_upto, Run};

/// Whether a forest object lives over a modal signature (covering pairs carry
/// an action) or over an arbitrary signature with pebbles.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Flavor {
    Modal,
    Pebbled,
}

/// A forest-ordered structure: nodes form the universe of `structure`, the
/// parent map gives the order, and every node remembers its origin.
#[derive(Clone, Debug)]
pub struct ForestObject {
    pub flavor: Flavor,
    pub structure: Structure,
    pub parent: Vec<Option<usize>>,
    pub roots: Vec<usize>,
    /// Counit: origin element id of each node.
    pub origin: Vec<String>,
    /// Pebble of each node, numbered from 1.
    pub pebble: Option<Vec<usize>>,
    children: Vec<Vec<usize>>,
    depth: Vec<usize>,
    /// Valuation of each node as a bit set over the sorted propositions.
    val: Vec<u64>,
    /// Incoming action of each non-root node, indexed in sorted action order.
    act: Vec<Option<usize>>,
}

impl ForestObject {
    /// Assembles a forest object and derives its order data.
    pub fn new(
        flavor: Flavor,
        structure: Structure,
        parent: Vec<Option<usize>>,
        origin: Vec<String>,
        pebble: Option<Vec<usize>>,
    ) -> Result<Self> {
        let n = structure.len();
        if parent.len() != n || origin.len() != n || pebble.as_ref().is_some_and(|p| p.len() != n) {
            return Err(Error::InvalidArgument("forest annotations do not match the universe".into()));
        }
        let mut children = vec![Vec::new(); n];
        let mut roots = Vec::new();
        for (x, p) in parent.iter().enumerate() {
            match p {
                Some(p) if *p >= n => {
                    return Err(Error::InvalidArgument(format!("parent of node {x} out of range")))
                }
                Some(p) => children[*p].push(x),
                None => roots.push(x),
            }
        }
        let mut depth = vec![usize::MAX; n];
        let mut stack: Vec<usize> = roots.clone();
        for &r in &roots {
            depth[r] = 0;
        }
        while let Some(x) = stack.pop() {
            for &c in &children[x] {
                depth[c] = depth[x] + 1;
                stack.push(c);
            }
        }
        if depth.contains(&usize::MAX) {
            return Err(Error::InvalidArgument("parent map has a cycle".into()));
        }
        let sig = structure.signature();
        let props = sig.props();
        let acts = sig.acts();
        let mut val = vec![0u64; n];
        for (i, p) in props.iter().enumerate().take(64) {
            for t in structure.tuples(p) {
                val[t[0]] |= 1 << i;
            }
        }
        let mut act = vec![None; n];
        if flavor == Flavor::Modal {
            for (x, p) in parent.iter().enumerate() {
                if let Some(p) = *p {
                    let found: Vec<usize> =
                        (0..acts.len()).filter(|&a| structure.holds(&acts[a], &[p, x])).collect();
                    if found.len() != 1 {
                        return Err(Error::InvalidArgument(format!(
                            "covering pair ({}, {}) carries {} actions",
                            structure.id(p),
                            structure.id(x),
                            found.len()
                        )));
                    }
                    act[x] = Some(found[0]);
                }
            }
        }
        Ok(ForestObject { flavor, structure, parent, roots, origin, pebble, children, depth, val, act })
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn id(&self, x: usize) -> &str {
        self.structure.id(x)
    }

    pub fn children(&self, x: usize) -> &[usize] {
        &self.children[x]
    }

    pub fn depth(&self, x: usize) -> usize {
        self.depth[x]
    }

    pub fn valuation(&self, x: usize) -> u64 {
        self.val[x]
    }

    pub fn action(&self, x: usize) -> Option<usize> {
        self.act[x]
    }

    pub fn pebble_of(&self, x: usize) -> Option<usize> {
        self.pebble.as_ref().map(|p| p[x])
    }

    /// Whether every node has at most one child (each tree is a chain).
    pub fn is_linear(&self) -> bool {
        self.children.iter().all(|c| c.len() <= 1)
    }

    /// Nodes without children.
    pub fn leaves(&self) -> Vec<usize> {
        (0..self.len()).filter(|&x| self.children[x].is_empty()).collect()
    }

    /// Root-to-node path, root first.
    pub fn path(&self, x: usize) -> Vec<usize> {
        let mut out = vec![x];
        let mut cur = x;
        while let Some(p) = self.parent[cur] {
            out.push(p);
            cur = p;
        }
        out.reverse();
        out
    }

    /// The unique root of a tree, or `None` for forests.
    pub fn tree_root(&self) -> Option<usize> {
        match self.roots.as_slice() {
            [r] if self.flavor == Flavor::Modal => Some(*r),
            _ => None,
        }
    }

    /// Children of a path handle: the roots for the empty path.
    pub fn handle_children(&self, h: Option<usize>) -> &[usize] {
        match h {
            Some(x) => &self.children[x],
            None => &self.roots,
        }
    }

    /// The least path handle: the root of a tree, the empty path of a forest.
    pub fn bottom(&self) -> Option<usize> {
        self.tree_root()
    }

    /// The structure rooted at its tree root.
    pub fn as_pointed(&self) -> Result<PointedStructure> {
        let root = match self.roots.as_slice() {
            [r] => *r,
            _ => return Err(Error::InvalidArgument("forest has more than one root".into())),
        };
        PointedStructure::new(self.structure.clone(), root)
    }

    /// Serialized form: the node structure plus a forest block.
    pub fn to_file(&self) -> StructureFile {
        let point = match self.roots.as_slice() {
            [r] => Some(*r),
            _ => None,
        };
        let mut file = self.structure.to_file(point);
        let id = |x: usize| self.structure.id(x).to_string();
        file.forest = Some(ForestBlock {
            parent: (0..self.len()).filter_map(|x| self.parent[x].map(|p| (id(x), id(p)))).collect(),
            pebble: self.pebble.as_ref().map(|p| (0..self.len()).map(|x| (id(x), p[x])).collect()),
            roots: self.roots.iter().map(|&r| id(r)).collect(),
            origin: Some((0..self.len()).map(|x| (id(x), self.origin[x].clone())).collect()),
        });
        file
    }

    pub fn to_json(&self) -> String {
        self.to_file().to_json()
    }

    /// Identifies all roots of a modal forest into one root (the first),
    /// provided they carry the same valuation.
    pub fn glue_roots(&self) -> Result<ForestObject> {
        let Some(&keep) = self.roots.first() else {
            return Ok(self.clone());
        };
        if self.roots.iter().any(|&r| self.val[r] != self.val[keep]) {
            return Err(Error::InvalidArgument("roots carry different valuations".into()));
        }
        let dropped: BTreeSet<usize> = self.roots[1..].iter().copied().collect();
        let mut renum = vec![0; self.len()];
        let mut universe = Vec::new();
        for x in 0..self.len() {
            if dropped.contains(&x) {
                continue;
            }
            renum[x] = universe.len();
            universe.push(self.id(x).to_string());
        }
        for &r in &dropped {
            renum[r] = renum[keep];
        }
        let interp = self
            .structure
            .interp()
            .iter()
            .map(|(name, ts)| {
                (name.clone(), ts.iter().map(|t| t.iter().map(|&e| renum[e]).collect()).collect())
            })
            .collect();
        let structure = Structure::from_parts(self.structure.signature().clone(), universe, interp);
        let keep_nodes: Vec<usize> = (0..self.len()).filter(|x| !dropped.contains(x)).collect();
        let parent = keep_nodes.iter().map(|&x| self.parent[x].map(|p| renum[p])).collect();
        let origin = keep_nodes.iter().map(|&x| self.origin[x].clone()).collect();
        let pebble = self.pebble.as_ref().map(|p| keep_nodes.iter().map(|&x| p[x]).collect());
        ForestObject::new(self.flavor, structure, parent, origin, pebble)
    }
}

/// A path of a forest object, identified by its top node (`None` is the
/// empty path of a forest).
#[derive(Clone, Copy, Debug)]
pub struct PathHandle<'a> {
    pub owner: &'a ForestObject,
    pub node: Option<usize>,
}

impl<'a> PathHandle<'a> {
    pub fn new(owner: &'a ForestObject, node: Option<usize>) -> Self {
        PathHandle { owner, node }
    }

    /// Nodes of the path, lowest first.
    pub fn nodes(&self) -> Vec<usize> {
        self.node.map(|x| self.owner.path(x)).unwrap_or_default()
    }

    /// Whether this path is maximal.
    pub fn is_maximal(&self) -> bool {
        self.owner.handle_children(self.node).is_empty()
    }
}

fn modal_kripke(p: &PointedStructure) -> Result<Kripke> {
    if !p.signature().modal {
        return Err(Error::NonModal);
    }
    Kripke::new(p)
}

/// Builds a modal forest object from chains of runs. Each entry in `chains`
/// is a run; `shared_root` makes all chains hang from one root node.
fn chains_object(
    k: &Kripke,
    sig: &Signature,
    runs: &[Run],
    shared_root: bool,
    prefix: &str,
) -> Result<ForestObject> {
    let mut universe = Vec::new();
    let mut parent = Vec::new();
    let mut origin = Vec::new();
    let mut interp: BTreeMap<String, BTreeSet<Vec<usize>>> = BTreeMap::new();
    let mut push = |id: String, par: Option<usize>, elem: usize, act: Option<usize>| -> usize {
        let x = universe.len();
        universe.push(id);
        parent.push(par);
        origin.push(k.names[elem].clone());
        for p in crate::structures::bits(k.val[elem]) {
            interp.entry(k.props[p].clone()).or_default().insert(vec![x]);
        }
        if let (Some(p), Some(a)) = (par, act) {
            interp.entry(k.acts[a].clone()).or_default().insert(vec![p, x]);
        }
        x
    };
    let root = shared_root.then(|| push("root".to_string(), None, k.point, None));
    for (j, run) in runs.iter().enumerate() {
        let mut prev = root;
        let start = if shared_root { 1 } else { 0 };
        for i in start..run.states.len() {
            let act = (i > 0).then(|| run.actions[i - 1]);
            prev = Some(push(format!("{prefix}{j}.{i}"), prev, run.states[i], act));
        }
    }
    let structure = Structure::from_parts(sig.clone(), universe, interp);
    ForestObject::new(Flavor::Modal, structure, parent, origin, None)
}

/// Linear modal unraveling at depth `k`: a root labelled by the point, and
/// below it one chain per maximal run of depth at most `k` (runs of length
/// `k` and runs ending in a terminal state). Node `m{j}.{i}` is the `i`-th
/// state of the `j`-th maximal run.
pub fn ml_unravel(p: &PointedStructure, k: usize) -> Result<ForestObject> {
    let kr = modal_kripke(p)?;
    let runs = maximal_runs(&kr, k);
    let runs: Vec<Run> = runs.into_iter().filter(|r| !r.is_empty()).collect();
    chains_object(&kr, p.signature(), &runs, true, "m")
}

/// Tree unraveling at depth `k`: one node per run of length at most `k`,
/// children extend a run by one transition.
pub fn tree_unravel(p: &PointedStructure, k: usize) -> Result<ForestObject> {
    let kr = modal_kripke(p)?;
    let runs = runs_upto(&kr, k);
    let index: BTreeMap<&Run, usize> = runs.iter().enumerate().map(|(i, r)| (r, i)).collect();
    let mut interp: BTreeMap<String, BTreeSet<Vec<usize>>> = BTreeMap::new();
    let mut parent = Vec::new();
    for (x, run) in runs.iter().enumerate() {
        for pbit in crate::structures::bits(kr.val[run.last()]) {
            interp.entry(kr.props[pbit].clone()).or_default().insert(vec![x]);
        }
        if run.is_empty() {
            parent.push(None);
        } else {
            let prefix = Run {
                states: run.states[..run.states.len() - 1].to_vec(),
                actions: run.actions[..run.len() - 1].to_vec(),
            };
            let p = index[&prefix];
            parent.push(Some(p));
            let a = *run.actions.last().expect("non-empty run");
            interp.entry(kr.acts[a].clone()).or_default().insert(vec![p, x]);
        }
    }
    let universe = (0..runs.len()).map(|i| format!("t{i}")).collect();
    let origin = runs.iter().map(|r| kr.names[r.last()].clone()).collect();
    let structure = Structure::from_parts(p.signature().clone(), universe, interp);
    ForestObject::new(Flavor::Modal, structure, parent, origin, None)
}

/// Branch decomposition: the disjoint union of the down-sets of all maximal
/// nodes, each copied as a separate chain. Node `b{j}.{i}` is the `i`-th node
/// of the `j`-th branch.
pub fn coreflect(x: &ForestObject) -> ForestObject {
    let mut universe = Vec::new();
    let mut parent = Vec::new();
    let mut origin = Vec::new();
    let mut pebble = x.pebble.as_ref().map(|_| Vec::new());
    let mut copies: Vec<Vec<usize>> = Vec::new();
    for (j, leaf) in x.leaves().into_iter().enumerate() {
        let path = x.path(leaf);
        let mut copy = Vec::new();
        for (i, &node) in path.iter().enumerate() {
            let n = universe.len();
            universe.push(format!("b{j}.{i}"));
            parent.push(i.checked_sub(1).map(|_| n - 1));
            origin.push(x.origin[node].clone());
            if let (Some(out), Some(src)) = (pebble.as_mut(), x.pebble.as_ref()) {
                out.push(src[node]);
            }
            copy.push(n);
        }
        copies.push(copy);
    }
    let mut interp: BTreeMap<String, BTreeSet<Vec<usize>>> = BTreeMap::new();
    for (j, leaf) in x.leaves().into_iter().enumerate() {
        let path = x.path(leaf);
        let local: BTreeMap<usize, usize> =
            path.iter().enumerate().map(|(i, &node)| (node, copies[j][i])).collect();
        for (name, tuples) in x.structure.interp() {
            let set = interp.entry(name.clone()).or_default();
            for t in tuples {
                if let Some(mapped) = t.iter().map(|e| local.get(e).copied()).collect::<Option<Vec<_>>>()
                {
                    set.insert(mapped);
                }
            }
        }
    }
    let structure = Structure::from_parts(x.structure.signature().clone(), universe, interp);
    ForestObject::new(x.flavor, structure, parent, origin, pebble)
        .expect("branches of a forest form a forest")
}

/// Whether grafting identifies each leaf with the designated copy element.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Gluing {
    Glued,
    /// Fault-injection variant: copies stay disjoint from the leaves.
    Detached,
}

/// The grafted structure at depth `k`: the linear unraveling as a pointed
/// structure with, at every depth-`k` leaf, a copy of the part of the source
/// reachable from the leaf's origin, glued so that the origin becomes the leaf.
/// Copy elements are named `leaf-id/element-id`.
pub fn ml_graft(p: &PointedStructure, k: usize) -> Result<PointedStructure> {
    ml_graft_with(p, k, Gluing::Glued)
}

pub fn ml_graft_with(p: &PointedStructure, k: usize, gluing: Gluing) -> Result<PointedStructure> {
    let unravel = ml_unravel(p, k)?;
    let base = &unravel.structure;
    let mut universe: Vec<String> = base.universe().to_vec();
    let mut interp: BTreeMap<String, BTreeSet<Vec<usize>>> = base.interp().clone();
    for leaf in unravel.leaves() {
        if unravel.depth(leaf) != k {
            continue;
        }
        let x = p.base.element(&unravel.origin[leaf])?;
        let part = PointedStructure { base: p.base.clone(), point: x }.reachable_part();
        let mut map = vec![0; part.base.len()];
        for (e, id) in part.base.universe().iter().enumerate() {
            if e == part.point && gluing == Gluing::Glued {
                map[e] = leaf;
            } else {
                map[e] = universe.len();
                universe.push(format!("{}/{}", base.id(leaf), id));
            }
        }
        for (name, tuples) in part.base.interp() {
            let set = interp.entry(name.clone()).or_default();
            set.extend(tuples.iter().map(|t| t.iter().map(|&e| map[e]).collect::<Vec<_>>()));
        }
    }
    let structure = Structure::from_parts(p.signature().clone(), universe, interp);
    PointedStructure::new(structure, unravel.roots[0])
}

/// One placement of a pebble on an element.
pub type Placement = (usize, usize);

/// All pebble-placement sequences of length `1..=n` over `k` pebbles and
/// `size` elements, in lexicographic depth-first order.
pub fn placement_sequences(size: usize, k: usize, n: usize) -> Vec<Vec<Placement>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(size: usize, k: usize, n: usize, cur: &mut Vec<Placement>, out: &mut Vec<Vec<Placement>>) {
        if cur.len() == n {
            return;
        }
        for p in 1..=k {
            for e in 0..size {
                cur.push((p, e));
                out.push(cur.clone());
                rec(size, k, n, cur, out);
                cur.pop();
            }
        }
    }
    rec(size, k, n, &mut cur, &mut out);
    out
}

/// Whether positions `positions` (indices into `seq`) are all still carrying
/// their pebble at the latest of them.
pub(crate) fn all_live(seq: &[usize], positions: &[usize]) -> bool {
    let last = positions.iter().copied().max().unwrap_or(0);
    positions.iter().all(|&i| !seq[i + 1..=last].contains(&seq[i]))
}

/// Pebble-sequence unraveling truncated at play length `n`: one chain per
/// sequence of at most `n` placements of pebbles `1..=k`. A tuple of chain
/// nodes is related when its origins are related and no pebble involved is
/// moved again before the latest of them. Node `s{j}.{i}` is the `i`-th
/// placement (from 1) of the `j`-th sequence.
pub fn pr_unravel(a: &Structure, k: usize, n: usize) -> Result<ForestObject> {
    if k < 1 {
        return Err(Error::InvalidArgument("the number of pebbles must be at least 1".into()));
    }
    let mut universe = Vec::new();
    let mut parent = Vec::new();
    let mut origin = Vec::new();
    let mut pebble = Vec::new();
    let mut interp: BTreeMap<String, BTreeSet<Vec<usize>>> = BTreeMap::new();
    for (j, seq) in placement_sequences(a.len(), k, n).into_iter().enumerate() {
        let base = universe.len();
        for (i, &(p, e)) in seq.iter().enumerate() {
            universe.push(format!("s{j}.{}", i + 1));
            parent.push(i.checked_sub(1).map(|i| base + i));
            origin.push(a.id(e).to_string());
            pebble.push(p);
        }
        let pebbles: Vec<usize> = seq.iter().map(|&(p, _)| p).collect();
        for r in &a.signature().relations {
            let set = interp.entry(r.name.clone()).or_default();
            for positions in tuples_of(seq.len(), r.arity) {
                let elems: Vec<usize> = positions.iter().map(|&i| seq[i].1).collect();
                if a.holds(&r.name, &elems) && all_live(&pebbles, &positions) {
                    set.insert(positions.iter().map(|&i| base + i).collect());
                }
            }
        }
    }
    let structure = Structure::from_parts(a.signature().clone(), universe, interp);
    ForestObject::new(Flavor::Pebbled, structure, parent, origin, Some(pebble))
}

/// All `arity`-tuples over `0..len`.
fn tuples_of(len: usize, arity: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..arity {
        out = out
            .into_iter()
            .flat_map(|t| {
                (0..len).map(move |i| {
                    let mut t = t.clone();
                    t.push(i);
                    t
                })
            })
            .collect();
    }
    out
}

/// Checks that the origin map is a homomorphism into `source` and, for modal
/// trees, that the root maps to `point`. Reports the first offending tuple.
pub fn counit_check(
    x: &ForestObject,
    source: &Structure,
    point: Option<usize>,
) -> std::result::Result<(), String> {
    let origin: Vec<usize> = x
        .origin
        .iter()
        .map(|id| source.element(id).map_err(|e| e.to_string()))
        .collect::<std::result::Result<_, _>>()?;
    for (name, tuples) in x.structure.interp() {
        for t in tuples {
            let image: Vec<usize> = t.iter().map(|&e| origin[e]).collect();
            if !source.holds(name, &image) {
                let nodes: Vec<&str> = t.iter().map(|&e| x.id(e)).collect();
                let elems: Vec<&str> = image.iter().map(|&e| source.id(e)).collect();
                return Err(format!(
                    "{name}({}) maps to {name}({}) which does not hold",
                    nodes.join(","),
                    elems.join(",")
                ));
            }
        }
    }
    if let (Some(point), Some(root)) = (point, x.tree_root()) {
        if origin[root] != point {
            return Err(format!("root {} does not map to the point", x.id(root)));
        }
    }
    Ok(())
}

/// Checks that no pebble is reused strictly between two related nodes and
/// up to the later one.
pub fn check_condition_p(x: &ForestObject) -> std::result::Result<(), String> {
    let Some(pebble) = &x.pebble else { return Ok(()) };
    for (name, tuples) in x.structure.interp() {
        for t in tuples {
            for &u in t {
                for &v in t {
                    if x.depth(u) >= x.depth(v) {
                        continue;
                    }
                    let mut cur = v;
                    while cur != u {
                        if pebble[cur] == pebble[u] {
                            return Err(format!(
                                "pebble {} reused between {} and {} in {name}",
                                pebble[u],
                                x.id(u),
                                x.id(v)
                            ));
                        }
                        match x.parent[cur] {
                            Some(p) => cur = p,
                            None => return Err(format!("{} is not below {}", x.id(v), x.id(u))),
                        }
                    }
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::oracle::{find_morphism, MorphismKind};

    fn fx(name: &str) -> PointedStructure {
        fixtures::load(name).unwrap()
    }

    #[test]
    fn isolated_point_unravels_to_a_root() {
        let u = ml_unravel(&fx("terminal"), 3).unwrap();
        assert_eq!(u.len(), 1);
        assert_eq!(u.structure.tuple_count(), 0);
    }

    #[test]
    fn fix4_linear_unraveling_has_one_chain() {
        let u = ml_unravel(&fx("fix4"), 2).unwrap();
        assert_eq!(u.len(), 3);
        assert!(u.is_linear());
        assert_eq!(u.origin, ["d0", "d1", "d2"]);
    }

    #[test]
    fn loop_linear_unraveling() {
        let u = ml_unravel(&fx("loop"), 2).unwrap();
        assert_eq!(u.len(), 3);
    }

    #[test]
    fn tree_unravel_sizes() {
        assert_eq!(tree_unravel(&fx("fix4"), 2).unwrap().len(), 3);
        assert_eq!(tree_unravel(&fx("fix2"), 2).unwrap().len(), 5);
        assert_eq!(tree_unravel(&fx("fix2"), 0).unwrap().len(), 1);
    }

    #[test]
    fn coreflect_examples() {
        let chain = tree_unravel(&fx("fix4"), 2).unwrap();
        let c = coreflect(&chain);
        assert_eq!(c.len(), 3);
        assert!(find_morphism(&c, &chain, MorphismKind::Isomorphism).unwrap().is_some());
        let t = tree_unravel(&fx("fix2"), 2).unwrap();
        let c = coreflect(&t);
        assert_eq!(c.roots.len(), 2);
        assert_eq!(c.len(), 6);
        assert!(c.is_linear());
        let single = tree_unravel(&fx("terminal"), 2).unwrap();
        assert_eq!(coreflect(&single).len(), 1);
    }

    #[test]
    fn coreflected_tree_matches_linear_unraveling() {
        for name in ["fix1", "fix2", "fix3", "fix4", "loop"] {
            let t = coreflect(&tree_unravel(&fx(name), 3).unwrap()).glue_roots().unwrap();
            let m = ml_unravel(&fx(name), 3).unwrap();
            assert!(find_morphism(&t, &m, MorphismKind::Isomorphism).unwrap().is_some(), "{name}");
        }
    }

    #[test]
    fn graft_without_deep_runs_is_the_unraveling() {
        let g = ml_graft(&fx("fix4"), 3).unwrap();
        assert_eq!(g.base.len(), 3);
    }

    #[test]
    fn graft_of_loop_keeps_the_loop_on_the_leaf() {
        let g = ml_graft(&fx("loop"), 1).unwrap();
        assert_eq!(g.base.len(), 2);
        assert!(g.base.holds("a", &[0, 1]));
        assert!(g.base.holds("a", &[1, 1]));
        assert_eq!(g.base.tuple_count(), 2);
    }

    #[test]
    fn loop_graft_ball_is_not_the_unraveling() {
        let l = fx("loop");
        let ball = ml_graft(&l, 1).unwrap().ball(1);
        let u = ml_unravel(&l, 1).unwrap().as_pointed().unwrap();
        assert!(crate::oracle::find_isomorphism(&ball, &u).is_none());
    }

    #[test]
    fn graft_of_fix4_copies_the_reachable_part() {
        let g = ml_graft(&fx("fix4"), 1).unwrap();
        assert_eq!(g.base.universe(), ["root", "m0.1", "m0.1/d2"]);
        assert!(g.base.holds("b", &[1, 2]));
    }

    #[test]
    fn detached_graft_leaves_leaves_terminal() {
        let g = ml_graft_with(&fx("loop"), 1, Gluing::Detached).unwrap();
        assert_eq!(g.base.len(), 3);
        assert!(!g.base.holds("a", &[1, 1]));
    }

    #[test]
    fn pr_unravel_single_element() {
        let a = fx("terminal").base;
        let u = pr_unravel(&a, 1, 1).unwrap();
        assert_eq!(u.len(), 1);
        assert_eq!(u.roots.len(), 1);
    }

    #[test]
    fn pr_unravel_loop_relations() {
        let a = fx("loop").base;
        let u = pr_unravel(&a, 1, 2).unwrap();
        assert_eq!(u.roots.len(), 2);
        let s = u.structure.element("s1.1").unwrap();
        let t = u.structure.element("s1.2").unwrap();
        assert!(u.structure.holds("a", &[t, t]));
        assert!(!u.structure.holds("a", &[s, t]));
        let u2 = pr_unravel(&a, 2, 2).unwrap();
        let seq = placement_sequences(1, 2, 2);
        let j = seq.iter().position(|s| s == &vec![(1, 0), (2, 0)]).unwrap();
        let s = u2.structure.element(&format!("s{j}.1")).unwrap();
        let t = u2.structure.element(&format!("s{j}.2")).unwrap();
        assert!(u2.structure.holds("a", &[s, t]));
        assert!(check_condition_p(&u2).is_ok());
    }

    #[test]
    fn pr_unravel_needs_a_pebble() {
        assert!(pr_unravel(&fx("loop").base, 0, 2).is_err());
    }

    #[test]
    fn counit_checks() {
        let p = fx("fix1");
        let u = ml_unravel(&p, 3).unwrap();
        assert!(counit_check(&u, &p.base, Some(p.point)).is_ok());
        let mut bad = u.clone();
        bad.origin[1] = "a3".into();
        assert!(counit_check(&bad, &p.base, Some(p.point)).unwrap_err().contains("does not hold"));
        let pr = pr_unravel(&fx("loop").base, 2, 3).unwrap();
        assert!(counit_check(&pr, &fx("loop").base, None).is_ok());
    }

    #[test]
    fn forest_serialization_has_forest_block() {
        let u = pr_unravel(&fx("loop").base, 1, 2).unwrap();
        let file = u.to_file();
        let block = file.forest.unwrap();
        assert_eq!(block.roots.len(), 2);
        assert_eq!(block.pebble.unwrap().len(), 3);
    }
}
