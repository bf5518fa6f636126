//! Built-in fixture structures shipped with the crate, plus small generated
//! families used in tests.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::structures::{PointedStructure, Signature, Structure, StructureFile};

/// Names of the bundled fixtures.
pub const NAMES: [&str; 9] = ["fix1", "fix2", "fix3", "fix4", "fix5", "loop", "terminal", "chain2", "chain3"];

/// Raw JSON of a bundled fixture.
pub fn source(name: &str) -> Result<&'static str> {
    Ok(match name {
        "fix1" => include_str!("../fixtures/fix1.json"),
        "fix2" => include_str!("../fixtures/fix2.json"),
        "fix3" => include_str!("../fixtures/fix3.json"),
        "fix4" => include_str!("../fixtures/fix4.json"),
        "fix5" => include_str!("../fixtures/fix5.json"),
        "loop" => include_str!("../fixtures/loop.json"),
        "terminal" => include_str!("../fixtures/terminal.json"),
        "chain2" => include_str!("../fixtures/chain2.json"),
        "chain3" => include_str!("../fixtures/chain3.json"),
        _ => return Err(Error::InvalidArgument(format!("unknown fixture `{name}`"))),
    })
}

/// A bundled fixture as a pointed structure.
pub fn load(name: &str) -> Result<PointedStructure> {
    PointedStructure::from_json(source(name)?)
}

/// A bundled fixture as a structure with its optional point.
pub fn load_structure(name: &str) -> Result<(Structure, Option<usize>)> {
    Structure::from_file(&StructureFile::from_json(source(name)?)?)
}

fn single_action() -> Signature {
    Signature::modal(&[], &["a"])
}

fn build(signature: Signature, universe: Vec<String>, edges: &[(usize, usize)]) -> Structure {
    let set: BTreeSet<Vec<usize>> = edges.iter().map(|&(x, y)| vec![x, y]).collect();
    Structure::from_parts(signature, universe, BTreeMap::from([("a".to_string(), set)]))
}

/// Directed `a`-cycle on `n` elements `v0 … v{n-1}`.
pub fn cycle(n: usize) -> Structure {
    let edges: Vec<(usize, usize)> = (0..n).map(|i| (i, (i + 1) % n)).collect();
    build(single_action(), (0..n).map(|i| format!("v{i}")).collect(), &edges)
}

/// `n` elements and no edges, over the single-action signature.
pub fn edgeless(n: usize) -> Structure {
    build(single_action(), (0..n).map(|i| format!("v{i}")).collect(), &[])
}

/// Two states `u`, `v` with `a`-edges both ways, over the signature of
/// the `loop` fixture.
pub fn two_cycle() -> Structure {
    build(Signature::modal(&[], &["a", "b", "c"]), vec!["u".into(), "v".into()], &[(0, 1), (1, 0)])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_fixture_loads() {
        for name in NAMES {
            let (s, point) = load_structure(name).unwrap();
            assert!(!s.is_empty(), "{name}");
            assert_eq!(point.is_some(), !name.starts_with("chain"), "{name}");
        }
        assert!(load("nope").is_err());
    }

    #[test]
    fn shared_signature() {
        let sig = load("fix1").unwrap().signature().clone();
        for name in ["fix2", "fix3", "fix4", "loop", "terminal"] {
            assert_eq!(load(name).unwrap().signature(), &sig);
        }
        assert_eq!(two_cycle().signature(), &sig);
    }
}
