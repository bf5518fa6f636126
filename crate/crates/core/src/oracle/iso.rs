//! Isomorphism of pointed structures by colour refinement and backtracking.

use std::collections::BTreeMap;

use crate::structures::PointedStructure;

type Colour = usize;

/// Stable colouring of the elements of both structures with shared colour
/// names: the initial colour records the point, refinement adds the colours
/// of all tuple neighbours by relation and position.
fn refine(a: &PointedStructure, b: &PointedStructure) -> (Vec<Colour>, Vec<Colour>) {
    let sides = [a, b];
    let mut colours: Vec<Vec<Colour>> =
        sides.iter().map(|s| (0..s.base.len()).map(|e| usize::from(e == s.point)).collect()).collect();
    let mut count = 0;
    loop {
        let mut names: BTreeMap<(Colour, Vec<(String, usize, Vec<Colour>)>), Colour> = BTreeMap::new();
        let mut keys: Vec<Vec<(Colour, Vec<(String, usize, Vec<Colour>)>)>> = Vec::new();
        for (s, side) in sides.iter().enumerate() {
            let mut seen: Vec<Vec<(String, usize, Vec<Colour>)>> = vec![Vec::new(); side.base.len()];
            for (name, tuples) in side.base.interp() {
                for t in tuples {
                    let shape: Vec<Colour> = t.iter().map(|&e| colours[s][e]).collect();
                    for (pos, &e) in t.iter().enumerate() {
                        seen[e].push((name.clone(), pos, shape.clone()));
                    }
                }
            }
            let side_keys: Vec<_> = seen
                .into_iter()
                .enumerate()
                .map(|(e, mut v)| {
                    v.sort();
                    (colours[s][e], v)
                })
                .collect();
            for k in &side_keys {
                let next = names.len();
                names.entry(k.clone()).or_insert(next);
            }
            keys.push(side_keys);
        }
        let next: Vec<Vec<Colour>> = keys.iter().map(|ks| ks.iter().map(|k| names[k]).collect()).collect();
        let classes = names.len();
        colours = next;
        if classes == count {
            break;
        }
        count = classes;
    }
    let b_col = colours.pop().unwrap();
    (colours.pop().unwrap(), b_col)
}

/// An isomorphism from `a` onto `b` mapping point to point, as an element
/// map, if one exists.
pub fn find_isomorphism(a: &PointedStructure, b: &PointedStructure) -> Option<Vec<usize>> {
    if a.base.len() != b.base.len() || !a.signature().same_symbols(b.signature()) {
        return None;
    }
    for (name, tuples) in a.base.interp() {
        if tuples.len() != b.base.tuples(name).len() {
            return None;
        }
    }
    let (ca, cb) = refine(a, b);
    let mut sa = ca.clone();
    let mut sb = cb.clone();
    sa.sort_unstable();
    sb.sort_unstable();
    if sa != sb {
        return None;
    }
    let n = a.base.len();
    let mut order: Vec<usize> = (0..n).collect();
    let class_size = |c: Colour| ca.iter().filter(|&&x| x == c).count();
    order.sort_by_key(|&e| (class_size(ca[e]), e));
    let mut map = vec![usize::MAX; n];
    let mut used = vec![false; n];
    let consistent = |map: &[usize], e: usize| -> bool {
        a.base.interp().iter().all(|(name, tuples)| {
            tuples.iter().filter(|t| t.contains(&e)).all(|t| {
                let img: Option<Vec<usize>> =
                    t.iter().map(|&x| (map[x] != usize::MAX).then_some(map[x])).collect();
                img.is_none_or(|img| b.base.holds(name, &img))
            })
        })
    };
    fn go(
        i: usize,
        order: &[usize],
        ca: &[Colour],
        cb: &[Colour],
        map: &mut Vec<usize>,
        used: &mut Vec<bool>,
        consistent: &dyn Fn(&[usize], usize) -> bool,
    ) -> bool {
        let Some(&e) = order.get(i) else { return true };
        for f in 0..cb.len() {
            if used[f] || cb[f] != ca[e] {
                continue;
            }
            map[e] = f;
            used[f] = true;
            if consistent(map, e) && go(i + 1, order, ca, cb, map, used, consistent) {
                return true;
            }
            used[f] = false;
            map[e] = usize::MAX;
        }
        false
    }
    go(0, &order, &ca, &cb, &mut map, &mut used, &consistent).then_some(map)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::structures::PointedStructure;

    #[test]
    fn self_and_relabelled() {
        for name in ["fix1", "fix2", "fix5", "loop"] {
            let p = fixtures::load(name).unwrap();
            assert!(find_isomorphism(&p, &p).is_some());
        }
        let c3 = fixtures::cycle(3);
        let p0 = PointedStructure::new(c3.clone(), 0).unwrap();
        let p1 = PointedStructure::new(c3, 1).unwrap();
        let m = find_isomorphism(&p0, &p1).unwrap();
        assert_eq!(m[0], 1);
    }

    #[test]
    fn non_isomorphic() {
        let (a, b) = (fixtures::load("fix1").unwrap(), fixtures::load("fix3").unwrap());
        assert!(find_isomorphism(&a, &b).is_none());
        let c4 = PointedStructure::new(fixtures::cycle(4), 0).unwrap();
        let e4 = PointedStructure::new(fixtures::edgeless(4), 0).unwrap();
        assert!(find_isomorphism(&c4, &e4).is_none());
    }
}
