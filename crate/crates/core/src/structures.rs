//! Finite relational structures, pointed structures, and the constructions
//! built from them: Gaifman graphs, distances, balls, disjoint unions,
//! copies and products.
//!
//! A structure whose signature only has unary and binary relations doubles
//! as a Kripke model: unary relations are propositions and binary relations
//! are actions. [`Kripke`] is the indexed view used by the modal algorithms.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, ValidationReport, Violation};

/// A relation symbol with its arity.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelationSymbol {
    pub name: String,
    pub arity: usize,
}

/// A relational signature. Modal signatures only carry arities 1 and 2.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Signature {
    pub modal: bool,
    pub relations: Vec<RelationSymbol>,
}

impl Signature {
    /// Builds a modal signature from proposition and action names.
    pub fn modal(props: &[&str], acts: &[&str]) -> Self {
        let mut relations: Vec<RelationSymbol> = props
            .iter()
            .map(|p| RelationSymbol { name: p.to_string(), arity: 1 })
            .chain(acts.iter().map(|a| RelationSymbol { name: a.to_string(), arity: 2 }))
            .collect();
        relations.sort();
        Signature { modal: true, relations }
    }

    pub fn arity(&self, name: &str) -> Option<usize> {
        self.relations.iter().find(|r| r.name == name).map(|r| r.arity)
    }

    /// Names of unary relations, sorted.
    pub fn props(&self) -> Vec<String> {
        let mut v: Vec<String> =
            self.relations.iter().filter(|r| r.arity == 1).map(|r| r.name.clone()).collect();
        v.sort();
        v
    }

    /// Names of binary relations, sorted.
    pub fn acts(&self) -> Vec<String> {
        let mut v: Vec<String> =
            self.relations.iter().filter(|r| r.arity == 2).map(|r| r.name.clone()).collect();
        v.sort();
        v
    }

    /// True when both signatures declare the same symbols with the same arities.
    pub fn same_symbols(&self, other: &Signature) -> bool {
        let mut a = self.relations.clone();
        let mut b = other.relations.clone();
        a.sort();
        b.sort();
        a == b
    }

    pub fn check_compatible(&self, other: &Signature) -> Result<()> {
        if self.same_symbols(other) {
            Ok(())
        } else {
            Err(Error::SignatureMismatch(format!(
                "{} vs {}",
                render_symbols(&self.relations),
                render_symbols(&other.relations)
            )))
        }
    }

    fn problems(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut seen = BTreeSet::new();
        for r in &self.relations {
            if !seen.insert(r.name.as_str()) {
                out.push(Violation::DuplicateRelation(r.name.clone()));
            }
            if r.arity == 0 {
                out.push(Violation::ZeroArity(r.name.clone()));
            } else if self.modal && r.arity > 2 {
                out.push(Violation::NonModalArity { relation: r.name.clone(), arity: r.arity });
            }
        }
        out
    }
}

fn render_symbols(rels: &[RelationSymbol]) -> String {
    let mut v: Vec<String> = rels.iter().map(|r| format!("{}/{}", r.name, r.arity)).collect();
    v.sort();
    format!("[{}]", v.join(","))
}

/// Forest annotation carried by serialized unraveling objects.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForestBlock {
    pub parent: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pebble: Option<BTreeMap<String, usize>>,
    pub roots: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub origin: Option<BTreeMap<String, String>>,
}

/// On-disk JSON form of a (pointed) structure.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StructureFile {
    pub signature: Signature,
    pub universe: Vec<String>,
    #[serde(default)]
    pub point: Option<String>,
    pub interp: BTreeMap<String, Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub forest: Option<ForestBlock>,
}

impl StructureFile {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("structure files always serialize")
    }
}

/// Checks every invariant of a structure file and reports all violations.
pub fn validate(file: &StructureFile) -> std::result::Result<(), ValidationReport> {
    let mut violations = file.signature.problems();
    let mut elems = BTreeSet::new();
    for e in &file.universe {
        if !elems.insert(e.as_str()) {
            violations.push(Violation::DuplicateElement(e.clone()));
        }
    }
    for (name, tuples) in &file.interp {
        let Some(arity) = file.signature.arity(name) else {
            violations.push(Violation::UnknownRelation(name.clone()));
            continue;
        };
        for t in tuples {
            if t.len() != arity {
                violations.push(Violation::ArityMismatch {
                    relation: name.clone(),
                    expected: arity,
                    found: t.len(),
                });
            }
            for e in t {
                if !elems.contains(e.as_str()) {
                    violations.push(Violation::UnknownElement {
                        relation: name.clone(),
                        element: e.clone(),
                    });
                }
            }
        }
    }
    if let Some(p) = &file.point {
        if !elems.contains(p.as_str()) {
            violations.push(Violation::UnknownPoint(p.clone()));
        }
    }
    if violations.is_empty() {
        Ok(())
    } else {
        Err(ValidationReport { violations })
    }
}

/// A finite relational structure. Elements are addressed by their position in
/// the ordered universe; ids are opaque strings used for I/O.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Structure {
    signature: Signature,
    universe: Vec<String>,
    index: HashMap<String, usize>,
    interp: BTreeMap<String, BTreeSet<Vec<usize>>>,
}

impl Structure {
    /// Structure with an empty universe.
    pub fn empty(signature: Signature) -> Self {
        Self::from_parts(signature, Vec::new(), BTreeMap::new())
    }

    /// Builds a structure from indexed tuples. Panics on out-of-range indices,
    /// unknown relations or arity errors; intended for constructions whose
    /// inputs are already valid.
    pub fn from_parts(
        signature: Signature,
        universe: Vec<String>,
        mut interp: BTreeMap<String, BTreeSet<Vec<usize>>>,
    ) -> Self {
        for r in &signature.relations {
            interp.entry(r.name.clone()).or_default();
        }
        for (name, tuples) in &interp {
            let arity = signature.arity(name).unwrap_or_else(|| panic!("undeclared relation {name}"));
            for t in tuples {
                assert_eq!(t.len(), arity, "arity mismatch in {name}");
                assert!(t.iter().all(|&e| e < universe.len()), "tuple out of range in {name}");
            }
        }
        let index = universe.iter().enumerate().map(|(i, e)| (e.clone(), i)).collect();
        Structure { signature, universe, index, interp }
    }

    /// Builds a structure from named tuples, validating everything.
    pub fn new(
        signature: Signature,
        universe: Vec<String>,
        interp: BTreeMap<String, Vec<Vec<String>>>,
    ) -> Result<Self> {
        let file = StructureFile { signature, universe, point: None, interp, forest: None };
        Ok(Self::from_file(&file)?.0)
    }

    /// Validates a file and returns the structure and its optional point.
    pub fn from_file(file: &StructureFile) -> Result<(Self, Option<usize>)> {
        validate(file).map_err(Error::Invalid)?;
        let index: HashMap<&str, usize> =
            file.universe.iter().enumerate().map(|(i, e)| (e.as_str(), i)).collect();
        let mut interp: BTreeMap<String, BTreeSet<Vec<usize>>> = BTreeMap::new();
        for (name, tuples) in &file.interp {
            let set = interp.entry(name.clone()).or_default();
            for t in tuples {
                set.insert(t.iter().map(|e| index[e.as_str()]).collect());
            }
        }
        let point = file.point.as_ref().map(|p| index[p.as_str()]);
        Ok((Self::from_parts(file.signature.clone(), file.universe.clone(), interp), point))
    }

    pub fn to_file(&self, point: Option<usize>) -> StructureFile {
        let interp = self
            .interp
            .iter()
            .map(|(name, tuples)| {
                let rows = tuples
                    .iter()
                    .map(|t| t.iter().map(|&e| self.universe[e].clone()).collect())
                    .collect();
                (name.clone(), rows)
            })
            .collect();
        StructureFile {
            signature: self.signature.clone(),
            universe: self.universe.clone(),
            point: point.map(|p| self.universe[p].clone()),
            interp,
            forest: None,
        }
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn universe(&self) -> &[String] {
        &self.universe
    }

    pub fn len(&self) -> usize {
        self.universe.len()
    }

    pub fn is_empty(&self) -> bool {
        self.universe.is_empty()
    }

    pub fn element(&self, id: &str) -> Result<usize> {
        self.index.get(id).copied().ok_or_else(|| Error::UnknownElement(id.to_string()))
    }

    pub fn id(&self, e: usize) -> &str {
        &self.universe[e]
    }

    pub fn tuples(&self, relation: &str) -> &BTreeSet<Vec<usize>> {
        static EMPTY: BTreeSet<Vec<usize>> = BTreeSet::new();
        self.interp.get(relation).unwrap_or(&EMPTY)
    }

    pub fn interp(&self) -> &BTreeMap<String, BTreeSet<Vec<usize>>> {
        &self.interp
    }

    pub fn holds(&self, relation: &str, tuple: &[usize]) -> bool {
        self.interp.get(relation).is_some_and(|s| s.contains(tuple))
    }

    /// Total number of interpreted tuples.
    pub fn tuple_count(&self) -> usize {
        self.interp.values().map(BTreeSet::len).sum()
    }

    /// Adjacency lists of the Gaifman graph. Every element is adjacent to
    /// itself; distinct elements are adjacent iff they share a tuple.
    pub fn gaifman_graph(&self) -> Vec<BTreeSet<usize>> {
        let mut adj: Vec<BTreeSet<usize>> = (0..self.len()).map(|i| BTreeSet::from([i])).collect();
        for tuples in self.interp.values() {
            for t in tuples {
                for &x in t {
                    for &y in t {
                        adj[x].insert(y);
                    }
                }
            }
        }
        adj
    }

    /// Breadth-first distances from `from`; `None` marks unreachable elements.
    pub fn distances_from(&self, from: usize) -> Vec<Option<usize>> {
        let adj = self.gaifman_graph();
        let mut dist = vec![None; self.len()];
        let mut queue = VecDeque::from([from]);
        dist[from] = Some(0);
        while let Some(x) = queue.pop_front() {
            let d = dist[x].expect("queued elements have a distance");
            for &y in &adj[x] {
                if dist[y].is_none() {
                    dist[y] = Some(d + 1);
                    queue.push_back(y);
                }
            }
        }
        dist
    }

    /// Shortest-path distance in the Gaifman graph; `None` means infinity.
    pub fn distance(&self, a: &str, b: &str) -> Result<Option<usize>> {
        let (a, b) = (self.element(a)?, self.element(b)?);
        Ok(self.distances_from(a)[b])
    }

    /// Induced substructure on `keep`, preserving universe order.
    pub fn induced(&self, keep: &BTreeSet<usize>) -> (Structure, Vec<Option<usize>>) {
        let mut renum = vec![None; self.len()];
        let mut universe = Vec::new();
        for (i, id) in self.universe.iter().enumerate() {
            if keep.contains(&i) {
                renum[i] = Some(universe.len());
                universe.push(id.clone());
            }
        }
        let interp = self
            .interp
            .iter()
            .map(|(name, tuples)| {
                let kept = tuples
                    .iter()
                    .filter_map(|t| t.iter().map(|&e| renum[e]).collect::<Option<Vec<_>>>())
                    .collect();
                (name.clone(), kept)
            })
            .collect();
        (Structure::from_parts(self.signature.clone(), universe, interp), renum)
    }

    fn retagged(&self, tag: &str) -> Vec<String> {
        self.universe.iter().map(|e| format!("{e}{tag}")).collect()
    }
}

impl fmt::Display for Structure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_file(None).to_json())
    }
}

/// Disjoint union of several structures over one signature. Elements of the
/// `i`-th summand are tagged with the suffix `#i`.
pub fn disjoint_union_all(parts: &[&Structure]) -> Result<Structure> {
    let Some(first) = parts.first() else {
        return Err(Error::InvalidArgument("disjoint union of no structures".into()));
    };
    let mut universe = Vec::new();
    let mut interp: BTreeMap<String, BTreeSet<Vec<usize>>> = BTreeMap::new();
    for (i, part) in parts.iter().enumerate() {
        first.signature.check_compatible(&part.signature)?;
        let offset = universe.len();
        universe.extend(part.retagged(&format!("#{i}")));
        for (name, tuples) in &part.interp {
            let set = interp.entry(name.clone()).or_default();
            set.extend(tuples.iter().map(|t| t.iter().map(|&e| e + offset).collect::<Vec<_>>()));
        }
    }
    Ok(Structure::from_parts(first.signature.clone(), universe, interp))
}

/// `a + b`: elements of `a` get suffix `#0`, elements of `b` get `#1`.
pub fn disjoint_union(a: &Structure, b: &Structure) -> Result<Structure> {
    disjoint_union_all(&[a, b])
}

/// The `n`-fold disjoint union of `a`; the empty structure when `n = 0`.
pub fn copies(a: &Structure, n: usize) -> Structure {
    if n == 0 {
        return Structure::empty(a.signature.clone());
    }
    let parts = vec![a; n];
    disjoint_union_all(&parts).expect("copies share a signature")
}

/// A structure with a distinguished element.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PointedStructure {
    pub base: Structure,
    pub point: usize,
}

impl PointedStructure {
    pub fn new(base: Structure, point: usize) -> Result<Self> {
        if point >= base.len() {
            return Err(Error::InvalidArgument(format!("point index {point} out of range")));
        }
        Ok(PointedStructure { base, point })
    }

    /// Pointed structure from a file; the file must name a point.
    pub fn from_file(file: &StructureFile) -> Result<Self> {
        let (base, point) = Structure::from_file(file)?;
        let point = point.ok_or_else(|| Error::InvalidArgument("structure has no point".into()))?;
        Ok(PointedStructure { base, point })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_file(&StructureFile::from_json(text)?)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_file(&StructureFile::read(path)?)
    }

    pub fn to_file(&self) -> StructureFile {
        self.base.to_file(Some(self.point))
    }

    pub fn to_json(&self) -> String {
        self.to_file().to_json()
    }

    pub fn point_id(&self) -> &str {
        self.base.id(self.point)
    }

    pub fn signature(&self) -> &Signature {
        self.base.signature()
    }

    /// `S_k`: the ball of radius `k` around the point, keeping the point.
    pub fn ball(&self, k: usize) -> PointedStructure {
        let keep = self
            .base
            .distances_from(self.point)
            .iter()
            .enumerate()
            .filter(|(_, d)| d.is_some_and(|d| d <= k))
            .map(|(i, _)| i)
            .collect();
        let (base, renum) = self.base.induced(&keep);
        let point = renum[self.point].expect("the point is in its own ball");
        PointedStructure { base, point }
    }

    /// Restriction to the elements reachable from the point along binary
    /// relations in their forward direction.
    pub fn reachable_part(&self) -> PointedStructure {
        let mut seen = BTreeSet::from([self.point]);
        let mut stack = vec![self.point];
        let mut succ: Vec<Vec<usize>> = vec![Vec::new(); self.base.len()];
        for (name, tuples) in self.base.interp() {
            if self.base.signature().arity(name) == Some(2) {
                for t in tuples {
                    succ[t[0]].push(t[1]);
                }
            }
        }
        while let Some(x) = stack.pop() {
            for &y in &succ[x] {
                if seen.insert(y) {
                    stack.push(y);
                }
            }
        }
        let (base, renum) = self.base.induced(&seen);
        PointedStructure { base, point: renum[self.point].expect("point is reachable") }
    }
}

/// Product of two pointed structures: relations hold componentwise.
pub fn product(a: &PointedStructure, b: &PointedStructure) -> Result<PointedStructure> {
    a.signature().check_compatible(b.signature())?;
    let (na, nb) = (a.base.len(), b.base.len());
    let universe: Vec<String> = (0..na)
        .flat_map(|x| (0..nb).map(move |y| (x, y)))
        .map(|(x, y)| format!("({},{})", a.base.id(x), b.base.id(y)))
        .collect();
    let mut interp = BTreeMap::new();
    for r in &a.signature().relations {
        let mut set = BTreeSet::new();
        for ta in a.base.tuples(&r.name) {
            for tb in b.base.tuples(&r.name) {
                set.insert(ta.iter().zip(tb).map(|(&x, &y)| x * nb + y).collect());
            }
        }
        interp.insert(r.name.clone(), set);
    }
    let base = Structure::from_parts(a.signature().clone(), universe, interp);
    Ok(PointedStructure { base, point: a.point * nb + b.point })
}

/// Indexed Kripke view of a pointed structure with a modal signature.
/// Propositions and actions are numbered in sorted name order, so two
/// structures over the same signature share their numbering.
#[derive(Clone, Debug)]
pub struct Kripke {
    pub props: Vec<String>,
    pub acts: Vec<String>,
    /// Valuation of each state as a bit set over `props`.
    pub val: Vec<u64>,
    /// `succ[α][x]`: sorted α-successors of `x`.
    pub succ: Vec<Vec<Vec<usize>>>,
    pub names: Vec<String>,
    pub point: usize,
}

impl Kripke {
    pub fn new(p: &PointedStructure) -> Result<Self> {
        let sig = p.signature();
        if !sig.modal && sig.relations.iter().any(|r| r.arity > 2) {
            return Err(Error::NonModal);
        }
        let props = sig.props();
        let acts = sig.acts();
        if props.len() > 64 {
            return Err(Error::Unsupported("more than 64 propositions".into()));
        }
        let n = p.base.len();
        let mut val = vec![0u64; n];
        for (i, name) in props.iter().enumerate() {
            for t in p.base.tuples(name) {
                val[t[0]] |= 1 << i;
            }
        }
        let succ = acts
            .iter()
            .map(|name| {
                let mut s = vec![Vec::new(); n];
                for t in p.base.tuples(name) {
                    s[t[0]].push(t[1]);
                }
                s
            })
            .collect();
        Ok(Kripke { props, acts, val, succ, names: p.base.universe().to_vec(), point: p.point })
    }

    pub fn len(&self) -> usize {
        self.val.len()
    }

    pub fn is_empty(&self) -> bool {
        self.val.is_empty()
    }

    /// `I(x)`: the actions enabled at `x`, as a bit set over `acts`.
    pub fn ready(&self, x: usize) -> u64 {
        (0..self.acts.len()).filter(|&a| !self.succ[a][x].is_empty()).fold(0, |m, a| m | 1 << a)
    }

    pub fn is_terminal(&self, x: usize) -> bool {
        self.succ.iter().all(|s| s[x].is_empty())
    }

    /// Proposition names of a valuation bit set.
    pub fn prop_names(&self, v: u64) -> BTreeSet<String> {
        bits(v).map(|i| self.props[i].clone()).collect()
    }

    pub fn act_names(&self, v: u64) -> BTreeSet<String> {
        bits(v).map(|i| self.acts[i].clone()).collect()
    }
}

/// Indices of the set bits of `v`, ascending.
pub fn bits(v: u64) -> impl Iterator<Item = usize> {
    (0..64).filter(move |i| v >> i & 1 == 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain() -> PointedStructure {
        let file = StructureFile::from_json(
            r#"{"signature":{"modal":true,"relations":[{"name":"a","arity":2},{"name":"b","arity":2}]},
                "universe":["d0","d1","d2"],"point":"d0",
                "interp":{"a":[["d0","d1"]],"b":[["d1","d2"]]}}"#,
        )
        .unwrap();
        PointedStructure::from_file(&file).unwrap()
    }

    #[test]
    fn empty_structure_is_valid() {
        let file = StructureFile {
            signature: Signature { modal: true, relations: vec![] },
            universe: vec![],
            point: None,
            interp: BTreeMap::new(),
            forest: None,
        };
        assert!(validate(&file).is_ok());
    }

    #[test]
    fn validation_lists_every_violation() {
        let file = StructureFile::from_json(
            r#"{"signature":{"modal":true,"relations":[{"name":"p","arity":1}]},
                "universe":["x"],"point":"y","interp":{"p":[["x","z"]]}}"#,
        )
        .unwrap();
        let report = validate(&file).unwrap_err();
        let text = report.to_string();
        assert!(text.contains("arity mismatch"), "{text}");
        assert!(text.contains("unknown element `z`"), "{text}");
        assert!(text.contains("`y` given as point"), "{text}");
        assert_eq!(report.violations.len(), 3);
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let err = StructureFile::from_json(
            r#"{"signature":{"modal":true,"relations":[]},"universe":[],"interp":{},"extra":1}"#,
        );
        assert!(err.is_err());
    }

    #[test]
    fn gaifman_graph_of_chain_is_a_path() {
        let g = chain().base.gaifman_graph();
        assert_eq!(g[0], BTreeSet::from([0, 1]));
        assert_eq!(g[1], BTreeSet::from([0, 1, 2]));
        assert_eq!(g[2], BTreeSet::from([1, 2]));
    }

    #[test]
    fn distances_on_chain() {
        let c = chain();
        assert_eq!(c.base.distance("d0", "d0").unwrap(), Some(0));
        assert_eq!(c.base.distance("d0", "d2").unwrap(), Some(2));
        assert!(c.base.distance("d0", "nope").is_err());
        let two = disjoint_union(&c.base, &c.base).unwrap();
        assert_eq!(two.distance("d0#0", "d0#1").unwrap(), None);
    }

    #[test]
    fn balls_of_chain() {
        let c = chain();
        let b1 = c.ball(1);
        assert_eq!(b1.base.universe(), ["d0", "d1"]);
        assert_eq!(b1.base.tuples("a").len(), 1);
        assert!(b1.base.tuples("b").is_empty());
        assert_eq!(c.ball(5).base, c.base);
        assert_eq!(c.ball(0).base.universe(), ["d0"]);
    }

    #[test]
    fn radius_zero_ball_keeps_self_loops() {
        let file = StructureFile::from_json(
            r#"{"signature":{"modal":true,"relations":[{"name":"a","arity":2}]},
                "universe":["x","y"],"point":"x","interp":{"a":[["x","x"],["x","y"]]}}"#,
        )
        .unwrap();
        let p = PointedStructure::from_file(&file).unwrap();
        let b = p.ball(0);
        assert_eq!(b.base.len(), 1);
        assert!(b.base.holds("a", &[0, 0]));
    }

    #[test]
    fn union_and_copies_sizes() {
        let c = chain();
        assert_eq!(copies(&c.base, 0).len(), 0);
        assert_eq!(copies(&c.base, 3).len(), 9);
        let u = disjoint_union(&c.base, &Structure::empty(c.signature().clone())).unwrap();
        assert_eq!(u.len(), 3);
        assert_eq!(u.tuple_count(), c.base.tuple_count());
    }

    #[test]
    fn union_rejects_signature_mismatch() {
        let c = chain();
        let other = Structure::empty(Signature::modal(&["p"], &[]));
        assert!(matches!(disjoint_union(&c.base, &other), Err(Error::SignatureMismatch(_))));
    }

    #[test]
    fn product_of_chain_with_itself() {
        let c = chain();
        let p = product(&c, &c).unwrap();
        assert_eq!(p.base.len(), 9);
        let reach = p.reachable_part();
        assert_eq!(reach.base.len(), 3);
        assert_eq!(reach.base.tuple_count(), 2);
    }

    #[test]
    fn product_with_disjoint_actions_has_no_moves() {
        let a = chain();
        let file = StructureFile::from_json(
            r#"{"signature":{"modal":true,"relations":[{"name":"a","arity":2},{"name":"b","arity":2}]},
                "universe":["x","y"],"point":"x","interp":{"b":[["x","y"]]}}"#,
        )
        .unwrap();
        let b = PointedStructure::from_file(&file).unwrap();
        let p = product(&a, &b).unwrap();
        let k = Kripke::new(&p).unwrap();
        assert!(k.is_terminal(p.point));
    }

    #[test]
    fn kripke_view() {
        let k = Kripke::new(&chain()).unwrap();
        assert_eq!(k.acts, ["a", "b"]);
        assert_eq!(k.succ[0][0], [1]);
        assert_eq!(k.ready(1), 0b10);
        assert!(k.is_terminal(2));
    }
}
