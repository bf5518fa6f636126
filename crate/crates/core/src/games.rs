//! Game solvers: the back-and-forth game on path posets of forest objects
//! (full, existential and existential-positive), depth-bounded bisimulation,
//! the all-in-one two-sided pebble game, and the Ehrenfeucht–Fraïssé game.
//!
//! Every solver returns a [`GameResult`] whose witness can be replayed by the
//! matching `replay_*` function.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use crate::error::{Error, Result};
use crate::structures::{Kripke, PointedStructure, Structure};
use crate::traces::Side;
use crate::unravel::{Flavor, ForestObject, PathHandle};

/// The player with a winning strategy.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Winner {
    Spoiler,
    Duplicator,
}

impl fmt::Display for Winner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Winner::Spoiler => "SPOILER",
            Winner::Duplicator => "DUPLICATOR",
        })
    }
}

/// A position of the back-and-forth game: one path handle per side.
#[derive(Clone, Copy, Debug)]
pub struct Position<'a> {
    pub left: PathHandle<'a>,
    pub right: PathHandle<'a>,
}

/// One entry of a Duplicator strategy table: at the position, when Spoiler
/// plays `moved` on `side`, Duplicator answers `response` on the other side.
/// Positions and moves are node or element indices of the respective game.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StrategyRecord {
    pub position: Vec<(Option<usize>, Option<usize>)>,
    pub rounds: usize,
    pub side: Side,
    pub label: Option<usize>,
    pub moved: usize,
    pub response: usize,
}

/// A Spoiler strategy tree: Spoiler plays `moved` on `side` and every
/// Duplicator reply is listed with Spoiler's continuation. A reply with no
/// continuation loses on the spot.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpoilerTree {
    pub side: Side,
    pub label: Option<usize>,
    pub moved: usize,
    pub replies: Vec<(usize, Option<SpoilerTree>)>,
}

/// One move of the pebble game: `pebble` placed on `element` of `side`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PebbleMove {
    pub pebble: usize,
    pub side: Side,
    pub element: usize,
}

/// Machine-checkable evidence for the winner.
#[derive(Clone, Debug)]
pub enum Witness {
    /// Duplicator strategy table.
    Strategy(Vec<StrategyRecord>),
    /// The starting position already violates the winning condition.
    Immediate,
    /// Spoiler strategy tree from the starting position.
    Spoiler(SpoilerTree),
    /// Duplicator answers any pebble sequence on demand.
    Responder(PebbleResponder),
    /// A pebble sequence that Duplicator cannot answer.
    Sequence(Vec<PebbleMove>),
}

/// Outcome of a game.
#[derive(Clone, Debug)]
pub struct GameResult {
    pub winner: Winner,
    pub witness: Witness,
}

impl GameResult {
    pub fn duplicator_wins(&self) -> bool {
        self.winner == Winner::Duplicator
    }
}

/// Side-specific name lookup used when rendering witnesses.
pub trait Names {
    fn name(&self, side: Side, index: usize) -> String;
    fn label(&self, _label: usize) -> String {
        String::new()
    }
}

/// Renders the first line of play of a Spoiler tree, e.g.
/// `left a1, reply b1; right b2, no reply`.
pub fn render_spoiler_line(tree: &SpoilerTree, names: &dyn Names) -> String {
    let mut parts = Vec::new();
    let mut cur = Some(tree);
    while let Some(t) = cur {
        let label = t.label.map(|l| format!(" -{}->", names.label(l))).unwrap_or_default();
        let other = match t.side {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        };
        match t.replies.first() {
            None => {
                parts.push(format!("{}{label} {}, no reply", t.side, names.name(t.side, t.moved)));
                cur = None;
            }
            Some((r, next)) => {
                let end = if next.is_none() { " loses" } else { "" };
                parts.push(format!(
                    "{}{label} {}, reply {}{end}",
                    t.side,
                    names.name(t.side, t.moved),
                    names.name(other, *r)
                ));
                cur = next.as_ref();
            }
        }
    }
    parts.join("; ")
}

/// Variants of the back-and-forth game.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variant {
    Full,
    Existential,
    ExistentialPositive,
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(Variant::Full),
            "existential" => Ok(Variant::Existential),
            "existential_positive" | "positive" => Ok(Variant::ExistentialPositive),
            _ => Err(Error::InvalidArgument(format!("unknown game variant `{s}`"))),
        }
    }
}

/// Nodes of the path to `x` still carrying their pebble, keyed by pebble.
fn live_nodes(x: &ForestObject, node: usize) -> BTreeMap<usize, usize> {
    let mut live = BTreeMap::new();
    for n in x.path(node).into_iter().rev() {
        live.entry(x.pebble_of(n).expect("pebbled forest")).or_insert(n);
    }
    live
}

/// Checks the step that places `xn` and `yn` on top of equally long paths.
/// With `positive`, only preservation from left to right is required.
fn step_ok(x: &ForestObject, y: &ForestObject, xn: usize, yn: usize, positive: bool) -> bool {
    match x.flavor {
        Flavor::Modal => {
            x.action(xn) == y.action(yn)
                && if positive {
                    x.valuation(xn) & !y.valuation(yn) == 0
                } else {
                    x.valuation(xn) == y.valuation(yn)
                }
        }
        Flavor::Pebbled => {
            if x.pebble_of(xn) != y.pebble_of(yn) {
                return false;
            }
            let (lx, ly) = (live_nodes(x, xn), live_nodes(y, yn));
            if lx.keys().ne(ly.keys()) {
                return false;
            }
            let pairs: Vec<(usize, usize)> = lx.values().copied().zip(ly.values().copied()).collect();
            let new = pairs.iter().position(|&(a, _)| a == xn).expect("new node is live");
            let same = |f: &ForestObject, u: usize, v: usize| f.origin[u] == f.origin[v];
            for &(a, b) in &pairs {
                let (ex, ey) = (same(x, xn, a), same(y, yn, b));
                if (positive && ex && !ey) || (!positive && ex != ey) {
                    return false;
                }
            }
            tuples_agree(&x.structure, &y.structure, &pairs, new, positive)
        }
    }
}

/// Whether every relation tuple over `pairs` that uses index `new` holds on
/// the right iff (or, with `positive`, whenever) it holds on the left.
pub(crate) fn tuples_agree(
    a: &Structure,
    b: &Structure,
    pairs: &[(usize, usize)],
    new: usize,
    positive: bool,
) -> bool {
    for r in &a.signature().relations {
        let mut idx = vec![0usize; r.arity];
        loop {
            if idx.contains(&new) {
                let ta: Vec<usize> = idx.iter().map(|&i| pairs[i].0).collect();
                let tb: Vec<usize> = idx.iter().map(|&i| pairs[i].1).collect();
                let (ha, hb) = (a.holds(&r.name, &ta), b.holds(&r.name, &tb));
                if (positive && ha && !hb) || (!positive && ha != hb) {
                    return false;
                }
            }
            let mut pos = 0;
            loop {
                if pos == r.arity {
                    break;
                }
                idx[pos] += 1;
                if idx[pos] < pairs.len() {
                    break;
                }
                idx[pos] = 0;
                pos += 1;
            }
            if pos == r.arity {
                break;
            }
        }
    }
    true
}

/// Whether the assignment `pairs` is a partial isomorphism (or, with
/// `positive`, a partial homomorphism) from `a` to `b`.
pub fn partial_iso(a: &Structure, b: &Structure, pairs: &[(usize, usize)], positive: bool) -> bool {
    (0..pairs.len()).all(|i| {
        (0..pairs.len()).all(|j| {
            let (ea, eb) = (pairs[i].0 == pairs[j].0, pairs[i].1 == pairs[j].1);
            if positive {
                !ea || eb
            } else {
                ea == eb
            }
        }) && tuples_agree(a, b, &pairs[..=i], i, positive)
    })
}

/// Whether two paths have isomorphic domains: equal label sequences on modal
/// objects; equal pebble sequences with partial-isomorphism prefixes on
/// pebbled objects.
pub fn path_iso(a: PathHandle<'_>, b: PathHandle<'_>) -> Result<bool> {
    if a.owner.flavor != b.owner.flavor {
        return Err(Error::InvalidArgument("paths from different kinds of objects".into()));
    }
    let (pa, pb) = (a.nodes(), b.nodes());
    if pa.len() != pb.len() {
        return Ok(false);
    }
    Ok(pa.iter().zip(&pb).all(|(&x, &y)| step_ok(a.owner, b.owner, x, y, false)))
}

struct BackAndForth<'a> {
    x: &'a ForestObject,
    y: &'a ForestObject,
    variant: Variant,
    memo: HashMap<(Option<usize>, Option<usize>), bool>,
}

type Handle = Option<usize>;

impl BackAndForth<'_> {
    fn positive(&self) -> bool {
        self.variant == Variant::ExistentialPositive
    }

    fn spoiler_moves(&self, px: Handle, py: Handle) -> Vec<(Side, usize)> {
        let mut moves: Vec<(Side, usize)> =
            self.x.handle_children(px).iter().map(|&c| (Side::Left, c)).collect();
        if self.variant == Variant::Full {
            moves.extend(self.y.handle_children(py).iter().map(|&c| (Side::Right, c)));
        }
        moves
    }

    fn next(&self, side: Side, moved: usize, reply: usize) -> (usize, usize) {
        match side {
            Side::Left => (moved, reply),
            Side::Right => (reply, moved),
        }
    }

    fn replies(&self, side: Side, px: Handle, py: Handle) -> &[usize] {
        match side {
            Side::Left => self.y.handle_children(py),
            Side::Right => self.x.handle_children(px),
        }
    }

    fn win(&mut self, px: Handle, py: Handle) -> bool {
        let branching = self.x.handle_children(px).len() + self.y.handle_children(py).len() > 2;
        if branching {
            if let Some(&w) = self.memo.get(&(px, py)) {
                return w;
            }
        }
        let mut result = true;
        for (side, moved) in self.spoiler_moves(px, py) {
            let answered = self.replies(side, px, py).to_vec().into_iter().any(|r| {
                let (nx, ny) = self.next(side, moved, r);
                step_ok(self.x, self.y, nx, ny, self.positive()) && self.win(Some(nx), Some(ny))
            });
            if !answered {
                result = false;
                break;
            }
        }
        if branching {
            self.memo.insert((px, py), result);
        }
        result
    }

    fn strategy(&mut self, px: Handle, py: Handle, out: &mut Vec<StrategyRecord>) {
        for (side, moved) in self.spoiler_moves(px, py) {
            let reply = self.replies(side, px, py).to_vec().into_iter().find(|&r| {
                let (nx, ny) = self.next(side, moved, r);
                step_ok(self.x, self.y, nx, ny, self.positive()) && self.win(Some(nx), Some(ny))
            });
            let r = reply.expect("winning positions have winning replies");
            out.push(StrategyRecord {
                position: vec![(px, py)],
                rounds: 0,
                side,
                label: None,
                moved,
                response: r,
            });
            let (nx, ny) = self.next(side, moved, r);
            self.strategy(Some(nx), Some(ny), out);
        }
    }

    fn spoiler_tree(&mut self, px: Handle, py: Handle) -> SpoilerTree {
        for (side, moved) in self.spoiler_moves(px, py) {
            let replies = self.replies(side, px, py).to_vec();
            let all_lose = replies.iter().all(|&r| {
                let (nx, ny) = self.next(side, moved, r);
                !(step_ok(self.x, self.y, nx, ny, self.positive()) && self.win(Some(nx), Some(ny)))
            });
            if all_lose {
                let replies = replies
                    .into_iter()
                    .map(|r| {
                        let (nx, ny) = self.next(side, moved, r);
                        let cont = step_ok(self.x, self.y, nx, ny, self.positive())
                            .then(|| self.spoiler_tree(Some(nx), Some(ny)));
                        (r, cont)
                    })
                    .collect();
                return SpoilerTree { side, label: None, moved, replies };
            }
        }
        unreachable!("losing positions have a refuting move")
    }
}

fn starting_position(x: &ForestObject, y: &ForestObject, variant: Variant) -> Result<Option<(Handle, Handle)>> {
    if x.flavor != y.flavor {
        return Err(Error::InvalidArgument("objects of different kinds".into()));
    }
    x.structure.signature().check_compatible(y.structure.signature())?;
    let (bx, by) = (x.bottom(), y.bottom());
    match (bx, by) {
        (None, None) => Ok(Some((None, None))),
        (Some(rx), Some(ry)) => {
            let positive = variant == Variant::ExistentialPositive;
            Ok(step_ok(x, y, rx, ry, positive).then_some((bx, by)))
        }
        _ => Err(Error::InvalidArgument("a tree cannot be compared with a forest".into())),
    }
}

/// Solves the back-and-forth game from the pair of least paths.
pub fn solve_back_and_forth(x: &ForestObject, y: &ForestObject, variant: Variant) -> Result<GameResult> {
    let Some((px, py)) = starting_position(x, y, variant)? else {
        return Ok(GameResult { winner: Winner::Spoiler, witness: Witness::Immediate });
    };
    let mut g = BackAndForth { x, y, variant, memo: HashMap::new() };
    if g.win(px, py) {
        let mut records = Vec::new();
        g.strategy(px, py, &mut records);
        Ok(GameResult { winner: Winner::Duplicator, witness: Witness::Strategy(records) })
    } else {
        let tree = g.spoiler_tree(px, py);
        Ok(GameResult { winner: Winner::Spoiler, witness: Witness::Spoiler(tree) })
    }
}

/// Replays a back-and-forth witness against every Spoiler move.
pub fn replay_back_and_forth(
    x: &ForestObject,
    y: &ForestObject,
    variant: Variant,
    result: &GameResult,
) -> std::result::Result<(), String> {
    let start = starting_position(x, y, variant).map_err(|e| e.to_string())?;
    let g = BackAndForth { x, y, variant, memo: HashMap::new() };
    let positive = variant == Variant::ExistentialPositive;
    match (&result.winner, &result.witness, start) {
        (Winner::Spoiler, Witness::Immediate, None) => Ok(()),
        (Winner::Duplicator, Witness::Strategy(records), Some((px, py))) => {
            let table: HashMap<(Handle, Handle, Side, usize), usize> = records
                .iter()
                .map(|r| ((r.position[0].0, r.position[0].1, r.side, r.moved), r.response))
                .collect();
            let mut stack = vec![(px, py)];
            while let Some((px, py)) = stack.pop() {
                for (side, moved) in g.spoiler_moves(px, py) {
                    let r = *table
                        .get(&(px, py, side, moved))
                        .ok_or_else(|| format!("no response to {side} {moved}"))?;
                    if !g.replies(side, px, py).contains(&r) {
                        return Err(format!("response {r} is not a legal move"));
                    }
                    let (nx, ny) = g.next(side, moved, r);
                    if !step_ok(x, y, nx, ny, positive) {
                        return Err(format!("response {r} leaves the winning region"));
                    }
                    stack.push((Some(nx), Some(ny)));
                }
            }
            Ok(())
        }
        (Winner::Spoiler, Witness::Spoiler(tree), Some((px, py))) => {
            fn check(
                g: &BackAndForth<'_>,
                positive: bool,
                t: &SpoilerTree,
                px: Handle,
                py: Handle,
            ) -> std::result::Result<(), String> {
                if !g.spoiler_moves(px, py).contains(&(t.side, t.moved)) {
                    return Err(format!("illegal Spoiler move {}", t.moved));
                }
                let listed: BTreeSet<usize> = t.replies.iter().map(|(r, _)| *r).collect();
                let legal: BTreeSet<usize> = g.replies(t.side, px, py).iter().copied().collect();
                if listed != legal {
                    return Err("Spoiler tree does not cover every reply".into());
                }
                for (r, cont) in &t.replies {
                    let (nx, ny) = g.next(t.side, t.moved, *r);
                    let ok = step_ok(g.x, g.y, nx, ny, positive);
                    match cont {
                        None if ok => return Err(format!("reply {r} does not lose")),
                        None => {}
                        Some(_) if !ok => return Err(format!("reply {r} already loses")),
                        Some(c) => check(g, positive, c, Some(nx), Some(ny))?,
                    }
                }
                Ok(())
            }
            check(&g, positive, tree, px, py)
        }
        _ => Err("witness does not match the game".into()),
    }
}

/// Depth-`k` bisimulation between pointed Kripke structures by backward
/// induction over pairs of states.
pub fn solve_bisim(a: &PointedStructure, b: &PointedStructure, k: usize) -> Result<GameResult> {
    a.signature().check_compatible(b.signature())?;
    let (ka, kb) = (Kripke::new(a)?, Kripke::new(b)?);
    let table = bisim_table(&ka, &kb, k);
    let (x, y) = (ka.point, kb.point);
    if !table[0][x][y] {
        return Ok(GameResult { winner: Winner::Spoiler, witness: Witness::Immediate });
    }
    if table[k][x][y] {
        let mut records = Vec::new();
        bisim_strategy(&ka, &kb, &table, x, y, k, &mut records);
        Ok(GameResult { winner: Winner::Duplicator, witness: Witness::Strategy(records) })
    } else {
        Ok(GameResult {
            winner: Winner::Spoiler,
            witness: Witness::Spoiler(bisim_spoiler(&ka, &kb, &table, x, y, k)),
        })
    }
}

/// `table[j][x][y]`: states `x` and `y` are bisimilar up to depth `j`.
fn bisim_table(a: &Kripke, b: &Kripke, k: usize) -> Vec<Vec<Vec<bool>>> {
    let base: Vec<Vec<bool>> =
        (0..a.len()).map(|x| (0..b.len()).map(|y| a.val[x] == b.val[y]).collect()).collect();
    let mut table = vec![base.clone()];
    for j in 1..=k {
        let prev = &table[j - 1];
        let layer = (0..a.len())
            .map(|x| {
                (0..b.len())
                    .map(|y| {
                        base[x][y]
                            && (0..a.acts.len()).all(|act| {
                                a.succ[act][x].iter().all(|&x2| b.succ[act][y].iter().any(|&y2| prev[x2][y2]))
                                    && b.succ[act][y]
                                        .iter()
                                        .all(|&y2| a.succ[act][x].iter().any(|&x2| prev[x2][y2]))
                            })
                    })
                    .collect()
            })
            .collect();
        table.push(layer);
    }
    table
}

fn bisim_moves(a: &Kripke, b: &Kripke, x: usize, y: usize) -> Vec<(Side, usize, usize)> {
    let mut out = Vec::new();
    for act in 0..a.acts.len() {
        out.extend(a.succ[act][x].iter().map(|&m| (Side::Left, act, m)));
        out.extend(b.succ[act][y].iter().map(|&m| (Side::Right, act, m)));
    }
    out
}

fn bisim_replies<'k>(a: &'k Kripke, b: &'k Kripke, side: Side, act: usize, x: usize, y: usize) -> &'k [usize] {
    match side {
        Side::Left => &b.succ[act][y],
        Side::Right => &a.succ[act][x],
    }
}

fn orient(side: Side, moved: usize, reply: usize) -> (usize, usize) {
    match side {
        Side::Left => (moved, reply),
        Side::Right => (reply, moved),
    }
}

fn bisim_strategy(
    a: &Kripke,
    b: &Kripke,
    table: &[Vec<Vec<bool>>],
    x: usize,
    y: usize,
    rounds: usize,
    out: &mut Vec<StrategyRecord>,
) {
    if rounds == 0 {
        return;
    }
    for (side, act, moved) in bisim_moves(a, b, x, y) {
        let r = *bisim_replies(a, b, side, act, x, y)
            .iter()
            .find(|&&r| {
                let (nx, ny) = orient(side, moved, r);
                table[rounds - 1][nx][ny]
            })
            .expect("bisimilar states answer every move");
        out.push(StrategyRecord {
            position: vec![(Some(x), Some(y))],
            rounds,
            side,
            label: Some(act),
            moved,
            response: r,
        });
        let (nx, ny) = orient(side, moved, r);
        bisim_strategy(a, b, table, nx, ny, rounds - 1, out);
    }
}

fn bisim_spoiler(a: &Kripke, b: &Kripke, table: &[Vec<Vec<bool>>], x: usize, y: usize, rounds: usize) -> SpoilerTree {
    for (side, act, moved) in bisim_moves(a, b, x, y) {
        let replies = bisim_replies(a, b, side, act, x, y);
        if replies.iter().all(|&r| {
            let (nx, ny) = orient(side, moved, r);
            !table[rounds - 1][nx][ny]
        }) {
            let replies = replies
                .iter()
                .map(|&r| {
                    let (nx, ny) = orient(side, moved, r);
                    let cont = table[0][nx][ny].then(|| bisim_spoiler(a, b, table, nx, ny, rounds - 1));
                    (r, cont)
                })
                .collect();
            return SpoilerTree { side, label: Some(act), moved, replies };
        }
    }
    unreachable!("non-bisimilar states have a refuting move")
}

/// Replays a bisimulation game witness.
pub fn replay_bisim(
    a: &PointedStructure,
    b: &PointedStructure,
    k: usize,
    result: &GameResult,
) -> std::result::Result<(), String> {
    let (ka, kb) = (Kripke::new(a).map_err(|e| e.to_string())?, Kripke::new(b).map_err(|e| e.to_string())?);
    let (x, y) = (ka.point, kb.point);
    let same = |x: usize, y: usize| ka.val[x] == kb.val[y];
    match (&result.winner, &result.witness) {
        (Winner::Spoiler, Witness::Immediate) => {
            if same(x, y) {
                Err("roots agree".into())
            } else {
                Ok(())
            }
        }
        (Winner::Duplicator, Witness::Strategy(records)) => {
            if !same(x, y) {
                return Err("roots differ".into());
            }
            let table: HashMap<(usize, usize, usize, Side, usize, usize), usize> = records
                .iter()
                .map(|r| {
                    let (px, py) = r.position[0];
                    ((px.unwrap(), py.unwrap(), r.rounds, r.side, r.label.unwrap(), r.moved), r.response)
                })
                .collect();
            let mut stack = vec![(x, y, k)];
            while let Some((x, y, rounds)) = stack.pop() {
                if rounds == 0 {
                    continue;
                }
                for (side, act, moved) in bisim_moves(&ka, &kb, x, y) {
                    let r = *table
                        .get(&(x, y, rounds, side, act, moved))
                        .ok_or_else(|| format!("no response to {side} {moved}"))?;
                    if !bisim_replies(&ka, &kb, side, act, x, y).contains(&r) {
                        return Err(format!("illegal reply {r}"));
                    }
                    let (nx, ny) = orient(side, moved, r);
                    if !same(nx, ny) {
                        return Err(format!("reply {r} has a different valuation"));
                    }
                    stack.push((nx, ny, rounds - 1));
                }
            }
            Ok(())
        }
        (Winner::Spoiler, Witness::Spoiler(tree)) => {
            fn check(
                ka: &Kripke,
                kb: &Kripke,
                t: &SpoilerTree,
                x: usize,
                y: usize,
                rounds: usize,
            ) -> std::result::Result<(), String> {
                let act = t.label.ok_or("missing action")?;
                if rounds == 0 || !bisim_moves(ka, kb, x, y).contains(&(t.side, act, t.moved)) {
                    return Err("illegal Spoiler move".into());
                }
                let legal: BTreeSet<usize> = bisim_replies(ka, kb, t.side, act, x, y).iter().copied().collect();
                let listed: BTreeSet<usize> = t.replies.iter().map(|(r, _)| *r).collect();
                if legal != listed {
                    return Err("Spoiler tree does not cover every reply".into());
                }
                for (r, cont) in &t.replies {
                    let (nx, ny) = orient(t.side, t.moved, *r);
                    let ok = ka.val[nx] == kb.val[ny];
                    match cont {
                        None if ok => return Err(format!("reply {r} does not lose")),
                        None => {}
                        Some(_) if !ok => return Err(format!("reply {r} already loses")),
                        Some(c) => check(ka, kb, c, nx, ny, rounds - 1)?,
                    }
                }
                Ok(())
            }
            check(&ka, &kb, tree, x, y, k)
        }
        _ => Err("witness does not match the game".into()),
    }
}

/// Pebble assignment: for each pebble, the pair of elements it marks.
type Assignment = Vec<Option<(usize, usize)>>;

/// Duplicator's answers in the all-in-one pebble game, computed on demand.
#[derive(Clone, Debug)]
pub struct PebbleResponder {
    a: Structure,
    b: Structure,
    k: usize,
}

impl PebbleResponder {
    /// Answer to a full Spoiler sequence: one element of the other side per
    /// move, or `None` when every answer fails.
    pub fn respond(&self, seq: &[PebbleMove]) -> Option<Vec<usize>> {
        let mut layers: Vec<BTreeMap<Assignment, (Assignment, usize)>> = Vec::new();
        let mut cur: BTreeSet<Assignment> = BTreeSet::from([vec![None; self.k]]);
        for mv in seq {
            let mut next = BTreeMap::new();
            for st in &cur {
                for (reply, st2) in pebble_successors(&self.a, &self.b, st, *mv) {
                    next.entry(st2).or_insert((st.clone(), reply));
                }
            }
            cur = next.keys().cloned().collect();
            layers.push(next);
        }
        let mut st = cur.into_iter().next()?;
        let mut replies = Vec::new();
        for layer in layers.iter().rev() {
            let (prev, reply) = layer[&st].clone();
            replies.push(reply);
            st = prev;
        }
        replies.reverse();
        Some(replies)
    }
}

/// All Duplicator answers to `mv` from assignment `st` that keep a partial
/// isomorphism, with the resulting assignments.
fn pebble_successors(a: &Structure, b: &Structure, st: &Assignment, mv: PebbleMove) -> Vec<(usize, Assignment)> {
    let p = mv.pebble - 1;
    let others = match mv.side {
        Side::Left => b.len(),
        Side::Right => a.len(),
    };
    let mut out = Vec::new();
    for reply in 0..others {
        let pair = orient(mv.side, mv.element, reply);
        let mut st2 = st.clone();
        st2[p] = Some(pair);
        let mut pairs: Vec<(usize, usize)> = st2.iter().flatten().copied().collect();
        let new = st2[..p].iter().flatten().count();
        let last = pairs.len() - 1;
        pairs.swap(new, last);
        let eq_ok = pairs.iter().all(|&(x, y)| (x == pair.0) == (y == pair.1));
        if eq_ok && tuples_agree(a, b, &pairs, last, false) {
            out.push((reply, st2));
        }
    }
    out
}

fn pebble_moves(a: &Structure, b: &Structure, k: usize) -> Vec<PebbleMove> {
    let mut out = Vec::new();
    for pebble in 1..=k {
        out.extend((0..a.len()).map(|element| PebbleMove { pebble, side: Side::Left, element }));
        out.extend((0..b.len()).map(|element| PebbleMove { pebble, side: Side::Right, element }));
    }
    out
}

/// Decides the all-in-one two-sided `k`-pebble game with Spoiler sequences
/// of length at most `n`. Duplicator sees the whole sequence before
/// answering, so the search tracks the set of all assignments Duplicator can
/// have reached after each prefix; Spoiler wins iff some sequence empties it.
pub fn solve_ppeb(a: &Structure, b: &Structure, k: usize, n: usize) -> Result<GameResult> {
    if k < 1 {
        return Err(Error::InvalidArgument("the number of pebbles must be at least 1".into()));
    }
    a.signature().check_compatible(b.signature())?;
    let moves = pebble_moves(a, b, k);
    let mut memo: HashMap<(usize, Vec<Assignment>), bool> = HashMap::new();
    let start: Vec<Assignment> = vec![vec![None; k]];
    let mut seq = Vec::new();
    if ppeb_survives(a, b, &moves, start, n, &mut memo, &mut seq) {
        let responder = PebbleResponder { a: a.clone(), b: b.clone(), k };
        Ok(GameResult { winner: Winner::Duplicator, witness: Witness::Responder(responder) })
    } else {
        Ok(GameResult { winner: Winner::Spoiler, witness: Witness::Sequence(seq) })
    }
}

/// Whether Duplicator survives every extension of the current prefix. On
/// failure `seq` holds a refuting continuation.
fn ppeb_survives(
    a: &Structure,
    b: &Structure,
    moves: &[PebbleMove],
    states: Vec<Assignment>,
    remaining: usize,
    memo: &mut HashMap<(usize, Vec<Assignment>), bool>,
    seq: &mut Vec<PebbleMove>,
) -> bool {
    if states.is_empty() {
        return false;
    }
    if remaining == 0 {
        return true;
    }
    let key = (remaining, states);
    if memo.get(&key) == Some(&true) {
        return true;
    }
    let states = key.1.clone();
    for &mv in moves {
        let next: BTreeSet<Assignment> = states
            .iter()
            .flat_map(|st| pebble_successors(a, b, st, mv).into_iter().map(|(_, s)| s))
            .collect();
        seq.push(mv);
        if !ppeb_survives(a, b, moves, next.into_iter().collect(), remaining - 1, memo, seq) {
            memo.insert(key, false);
            return false;
        }
        seq.pop();
    }
    memo.insert(key, true);
    true
}

/// Replays a pebble game witness: a Duplicator responder must answer every
/// Spoiler sequence of length `n`; a Spoiler sequence must admit no answer.
pub fn replay_ppeb(
    a: &Structure,
    b: &Structure,
    k: usize,
    n: usize,
    result: &GameResult,
) -> std::result::Result<(), String> {
    let moves = pebble_moves(a, b, k);
    let valid = |seq: &[PebbleMove], replies: &[usize]| -> bool {
        let mut st: Assignment = vec![None; k];
        for (mv, &r) in seq.iter().zip(replies) {
            st[mv.pebble - 1] = Some(orient(mv.side, mv.element, r));
            let pairs: Vec<(usize, usize)> = st.iter().flatten().copied().collect();
            if !partial_iso(a, b, &pairs, false) {
                return false;
            }
        }
        true
    };
    match (&result.winner, &result.witness) {
        (Winner::Duplicator, Witness::Responder(resp)) => {
            let mut seq = Vec::new();
            fn all(
                moves: &[PebbleMove],
                n: usize,
                seq: &mut Vec<PebbleMove>,
                f: &mut dyn FnMut(&[PebbleMove]) -> std::result::Result<(), String>,
            ) -> std::result::Result<(), String> {
                if seq.len() == n {
                    return f(seq);
                }
                for &m in moves {
                    seq.push(m);
                    all(moves, n, seq, f)?;
                    seq.pop();
                }
                Ok(())
            }
            all(&moves, n, &mut seq, &mut |s| match resp.respond(s) {
                Some(r) if r.len() == s.len() && valid(s, &r) => Ok(()),
                _ => Err(format!("no valid answer to {s:?}")),
            })
        }
        (Winner::Spoiler, Witness::Sequence(seq)) => {
            if seq.len() > n {
                return Err("Spoiler sequence too long".into());
            }
            let resp = PebbleResponder { a: a.clone(), b: b.clone(), k };
            match resp.respond(seq) {
                None => Ok(()),
                Some(r) => Err(format!("Duplicator answers with {r:?}")),
            }
        }
        _ => Err("witness does not match the game".into()),
    }
}

/// A structure with a distinguished tuple of elements.
#[derive(Clone, Debug)]
pub struct TupleStructure {
    pub base: Structure,
    pub tuple: Vec<usize>,
}

impl From<&PointedStructure> for TupleStructure {
    fn from(p: &PointedStructure) -> Self {
        TupleStructure { base: p.base.clone(), tuple: vec![p.point] }
    }
}

struct Ef<'a> {
    a: &'a Structure,
    b: &'a Structure,
    memo: HashMap<(Vec<(usize, usize)>, usize), bool>,
}

impl Ef<'_> {
    fn moves(&self) -> Vec<(Side, usize)> {
        (0..self.a.len())
            .map(|x| (Side::Left, x))
            .chain((0..self.b.len()).map(|y| (Side::Right, y)))
            .collect()
    }

    /// Candidate replies, the forced partner first when the element is
    /// already pebbled.
    fn replies(&self, pos: &[(usize, usize)], side: Side, moved: usize) -> Vec<usize> {
        let partner = pos.iter().find_map(|&(x, y)| match side {
            Side::Left if x == moved => Some(y),
            Side::Right if y == moved => Some(x),
            _ => None,
        });
        match partner {
            Some(p) => vec![p],
            None => (0..match side {
                Side::Left => self.b.len(),
                Side::Right => self.a.len(),
            })
                .collect(),
        }
    }

    fn extend(pos: &[(usize, usize)], pair: (usize, usize)) -> Vec<(usize, usize)> {
        let mut v = pos.to_vec();
        if !v.contains(&pair) {
            v.push(pair);
            v.sort_unstable();
        }
        v
    }

    fn ok(&self, pos: &[(usize, usize)]) -> bool {
        partial_iso(self.a, self.b, pos, false)
    }

    fn win(&mut self, pos: Vec<(usize, usize)>, rounds: usize) -> bool {
        if rounds == 0 {
            return true;
        }
        let key = (pos, rounds);
        if let Some(&w) = self.memo.get(&key) {
            return w;
        }
        let pos = key.0.clone();
        let mut result = true;
        for (side, moved) in self.moves() {
            let answered = self.replies(&pos, side, moved).into_iter().any(|r| {
                let next = Self::extend(&pos, orient(side, moved, r));
                self.ok(&next) && self.win(next, rounds - 1)
            });
            if !answered {
                result = false;
                break;
            }
        }
        self.memo.insert(key, result);
        result
    }

    fn strategy(&mut self, pos: Vec<(usize, usize)>, rounds: usize, out: &mut Vec<StrategyRecord>) {
        if rounds == 0 {
            return;
        }
        for (side, moved) in self.moves() {
            let r = self
                .replies(&pos, side, moved)
                .into_iter()
                .find(|&r| {
                    let next = Self::extend(&pos, orient(side, moved, r));
                    self.ok(&next) && self.win(next, rounds - 1)
                })
                .expect("winning positions answer every move");
            out.push(StrategyRecord {
                position: pos.iter().map(|&(x, y)| (Some(x), Some(y))).collect(),
                rounds,
                side,
                label: None,
                moved,
                response: r,
            });
            self.strategy(Self::extend(&pos, orient(side, moved, r)), rounds - 1, out);
        }
    }

    fn spoiler(&mut self, pos: Vec<(usize, usize)>, rounds: usize) -> SpoilerTree {
        for (side, moved) in self.moves() {
            let others = match side {
                Side::Left => self.b.len(),
                Side::Right => self.a.len(),
            };
            let all_lose = (0..others).all(|r| {
                let next = Self::extend(&pos, orient(side, moved, r));
                !(self.ok(&next) && self.win(next, rounds - 1))
            });
            if all_lose {
                let replies = (0..others)
                    .map(|r| {
                        let next = Self::extend(&pos, orient(side, moved, r));
                        let cont = self.ok(&next).then(|| self.spoiler(next, rounds - 1));
                        (r, cont)
                    })
                    .collect();
                return SpoilerTree { side, label: None, moved, replies };
            }
        }
        unreachable!("losing positions have a refuting move")
    }
}

fn ef_start(a: &TupleStructure, b: &TupleStructure) -> Result<Vec<(usize, usize)>> {
    if a.tuple.len() != b.tuple.len() {
        return Err(Error::InvalidArgument(format!(
            "distinguished tuples have lengths {} and {}",
            a.tuple.len(),
            b.tuple.len()
        )));
    }
    a.base.signature().check_compatible(b.base.signature())?;
    let mut pos: Vec<(usize, usize)> = a.tuple.iter().copied().zip(b.tuple.iter().copied()).collect();
    pos.sort_unstable();
    pos.dedup();
    Ok(pos)
}

/// The `r`-round Ehrenfeucht–Fraïssé game from the distinguished tuples.
pub fn solve_ef(a: &TupleStructure, b: &TupleStructure, r: usize) -> Result<GameResult> {
    let pos = ef_start(a, b)?;
    let mut g = Ef { a: &a.base, b: &b.base, memo: HashMap::new() };
    if !g.ok(&pos) {
        return Ok(GameResult { winner: Winner::Spoiler, witness: Witness::Immediate });
    }
    if g.win(pos.clone(), r) {
        let mut records = Vec::new();
        g.strategy(pos, r, &mut records);
        Ok(GameResult { winner: Winner::Duplicator, witness: Witness::Strategy(records) })
    } else {
        let tree = g.spoiler(pos, r);
        Ok(GameResult { winner: Winner::Spoiler, witness: Witness::Spoiler(tree) })
    }
}

/// Replays an Ehrenfeucht–Fraïssé witness.
pub fn replay_ef(
    a: &TupleStructure,
    b: &TupleStructure,
    r: usize,
    result: &GameResult,
) -> std::result::Result<(), String> {
    let pos = ef_start(a, b).map_err(|e| e.to_string())?;
    let g = Ef { a: &a.base, b: &b.base, memo: HashMap::new() };
    match (&result.winner, &result.witness) {
        (Winner::Spoiler, Witness::Immediate) => {
            if g.ok(&pos) {
                Err("starting position is a partial isomorphism".into())
            } else {
                Ok(())
            }
        }
        (Winner::Duplicator, Witness::Strategy(records)) => {
            if !g.ok(&pos) {
                return Err("starting position is not a partial isomorphism".into());
            }
            let table: HashMap<(Vec<(usize, usize)>, usize, Side, usize), usize> = records
                .iter()
                .map(|rec| {
                    let p = rec.position.iter().map(|&(x, y)| (x.unwrap(), y.unwrap())).collect();
                    ((p, rec.rounds, rec.side, rec.moved), rec.response)
                })
                .collect();
            let mut stack = vec![(pos, r)];
            while let Some((pos, rounds)) = stack.pop() {
                if rounds == 0 {
                    continue;
                }
                for (side, moved) in g.moves() {
                    let reply = *table
                        .get(&(pos.clone(), rounds, side, moved))
                        .ok_or_else(|| format!("no response to {side} {moved}"))?;
                    let next = Ef::extend(&pos, orient(side, moved, reply));
                    if !g.ok(&next) {
                        return Err(format!("reply {reply} breaks the partial isomorphism"));
                    }
                    stack.push((next, rounds - 1));
                }
            }
            Ok(())
        }
        (Winner::Spoiler, Witness::Spoiler(tree)) => {
            fn check(
                g: &Ef<'_>,
                t: &SpoilerTree,
                pos: &[(usize, usize)],
                rounds: usize,
            ) -> std::result::Result<(), String> {
                if rounds == 0 {
                    return Err("Spoiler tree deeper than the game".into());
                }
                let others = match t.side {
                    Side::Left => g.b.len(),
                    Side::Right => g.a.len(),
                };
                if t.replies.len() != others {
                    return Err("Spoiler tree does not cover every reply".into());
                }
                for (r, cont) in &t.replies {
                    let next = Ef::extend(pos, orient(t.side, t.moved, *r));
                    let ok = g.ok(&next);
                    match cont {
                        None if ok => return Err(format!("reply {r} does not lose")),
                        None => {}
                        Some(_) if !ok => return Err(format!("reply {r} already loses")),
                        Some(c) => check(g, c, &next, rounds - 1)?,
                    }
                }
                Ok(())
            }
            check(&g, tree, &pos, r)
        }
        _ => Err("witness does not match the game".into()),
    }
}
