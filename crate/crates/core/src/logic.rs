//! Modal formulas: syntax, Kripke semantics (with graded and deadlock
//! modalities), fragment classification and formula synthesis from runs,
//! ready traces and failing trace relations.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::structures::{bits, Kripke, PointedStructure};
use crate::traces::{
    check_trace_relation, maximal_trace_counts, runs_upto, Bound, LabelledTrace, ReadyTrace, Relation, Run, Side,
    TraceWitness,
};

/// Comparator of a graded diamond.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Cmp {
    AtLeast,
    AtMost,
}

impl Cmp {
    fn symbol(self) -> &'static str {
        match self {
            Cmp::AtLeast => ">=",
            Cmp::AtMost => "<=",
        }
    }
}

/// A modal formula over named propositions and actions.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    True,
    False,
    Prop(String),
    NotProp(String),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Dia(String, Box<Formula>),
    Box(String, Box<Formula>),
    Graded { act: String, cmp: Cmp, count: usize, body: Box<Formula> },
    Deadlock,
}

impl Formula {
    /// Conjunction with flattening, unit and zero laws, and sorted,
    /// duplicate-free conjuncts.
    pub fn and(parts: impl IntoIterator<Item = Formula>) -> Formula {
        let mut out = BTreeSet::new();
        for p in parts {
            match p {
                Formula::True => {}
                Formula::False => return Formula::False,
                Formula::And(inner) => out.extend(inner),
                other => {
                    out.insert(other);
                }
            }
        }
        match out.len() {
            0 => Formula::True,
            1 => out.into_iter().next().unwrap(),
            _ => Formula::And(out.into_iter().collect()),
        }
    }

    /// Disjunction, dual to [`Formula::and`].
    pub fn or(parts: impl IntoIterator<Item = Formula>) -> Formula {
        let mut out = BTreeSet::new();
        for p in parts {
            match p {
                Formula::False => {}
                Formula::True => return Formula::True,
                Formula::Or(inner) => out.extend(inner),
                other => {
                    out.insert(other);
                }
            }
        }
        match out.len() {
            0 => Formula::False,
            1 => out.into_iter().next().unwrap(),
            _ => Formula::Or(out.into_iter().collect()),
        }
    }

    pub fn dia(act: &str, body: Formula) -> Formula {
        match body {
            Formula::False => Formula::False,
            b => Formula::Dia(act.to_string(), Box::new(b)),
        }
    }

    pub fn boxed(act: &str, body: Formula) -> Formula {
        match body {
            Formula::True => Formula::True,
            b => Formula::Box(act.to_string(), Box::new(b)),
        }
    }

    pub fn graded(act: &str, cmp: Cmp, count: usize, body: Formula) -> Formula {
        match (cmp, count, &body) {
            (Cmp::AtLeast, 0, _) => Formula::True,
            (Cmp::AtLeast, _, Formula::False) => Formula::False,
            (Cmp::AtMost, _, Formula::False) => Formula::True,
            _ => Formula::Graded { act: act.to_string(), cmp, count, body: Box::new(body) },
        }
    }

    /// Negation pushed down to the literals. Graded diamonds absorb the
    /// negation of diamonds; `acts` lists the actions for negating deadlock.
    pub fn negate(&self, acts: &[String]) -> Formula {
        match self {
            Formula::True => Formula::False,
            Formula::False => Formula::True,
            Formula::Prop(p) => Formula::NotProp(p.clone()),
            Formula::NotProp(p) => Formula::Prop(p.clone()),
            Formula::And(fs) => Formula::or(fs.iter().map(|f| f.negate(acts))),
            Formula::Or(fs) => Formula::and(fs.iter().map(|f| f.negate(acts))),
            Formula::Dia(a, f) => Formula::graded(a, Cmp::AtMost, 0, (**f).clone()),
            Formula::Box(a, f) => Formula::dia(a, f.negate(acts)),
            Formula::Graded { act, cmp: Cmp::AtLeast, count, body } => match count.checked_sub(1) {
                Some(c) => Formula::graded(act, Cmp::AtMost, c, (**body).clone()),
                None => Formula::False,
            },
            Formula::Graded { act, cmp: Cmp::AtMost, count, body } => {
                Formula::graded(act, Cmp::AtLeast, count + 1, (**body).clone())
            }
            Formula::Deadlock => Formula::or(acts.iter().map(|a| Formula::dia(a, Formula::True))),
        }
    }

    /// Modal depth; the deadlock modality counts as one level.
    pub fn depth(&self) -> usize {
        match self {
            Formula::True | Formula::False | Formula::Prop(_) | Formula::NotProp(_) => 0,
            Formula::And(fs) | Formula::Or(fs) => fs.iter().map(Formula::depth).max().unwrap_or(0),
            Formula::Dia(_, f) | Formula::Box(_, f) => 1 + f.depth(),
            Formula::Graded { body, .. } => 1 + body.depth(),
            Formula::Deadlock => 1,
        }
    }

    /// Number of nodes of the syntax tree.
    pub fn size(&self) -> usize {
        match self {
            Formula::And(fs) | Formula::Or(fs) => 1 + fs.iter().map(Formula::size).sum::<usize>(),
            Formula::Dia(_, f) | Formula::Box(_, f) => 1 + f.size(),
            Formula::Graded { body, .. } => 1 + body.size(),
            _ => 1,
        }
    }

    /// Proposition and action names used by the formula.
    pub fn symbols(&self) -> (BTreeSet<String>, BTreeSet<String>) {
        let mut props = BTreeSet::new();
        let mut acts = BTreeSet::new();
        self.collect_symbols(&mut props, &mut acts);
        (props, acts)
    }

    fn collect_symbols(&self, props: &mut BTreeSet<String>, acts: &mut BTreeSet<String>) {
        match self {
            Formula::Prop(p) | Formula::NotProp(p) => {
                props.insert(p.clone());
            }
            Formula::And(fs) | Formula::Or(fs) => fs.iter().for_each(|f| f.collect_symbols(props, acts)),
            Formula::Dia(a, f) | Formula::Box(a, f) | Formula::Graded { act: a, body: f, .. } => {
                acts.insert(a.clone());
                f.collect_symbols(props, acts);
            }
            Formula::True | Formula::False | Formula::Deadlock => {}
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |f: &mut fmt::Formatter<'_>, head: &str, fs: &[Formula]| {
            write!(f, "({head}")?;
            for x in fs {
                write!(f, " {x}")?;
            }
            write!(f, ")")
        };
        match self {
            Formula::True => write!(f, "tt"),
            Formula::False => write!(f, "ff"),
            Formula::Prop(p) => write!(f, "{p}"),
            Formula::NotProp(p) => write!(f, "(not {p})"),
            Formula::And(fs) => list(f, "and", fs),
            Formula::Or(fs) => list(f, "or", fs),
            Formula::Dia(a, b) => write!(f, "(dia {a} {b})"),
            Formula::Box(a, b) => write!(f, "(box {a} {b})"),
            Formula::Graded { act, cmp, count, body } => {
                write!(f, "(gdia {} {count} {act} {body})", cmp.symbol())
            }
            Formula::Deadlock => write!(f, "(deadlock)"),
        }
    }
}

/// Renders a formula in the s-expression grammar.
pub fn render_formula(f: &Formula) -> String {
    f.to_string()
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Token {
    Open,
    Close,
    Atom(String),
}

fn tokenize(text: &str) -> Vec<(usize, Token)> {
    let mut out = Vec::new();
    let mut chars = text.char_indices().peekable();
    while let Some(&(i, c)) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
        } else if c == '(' {
            out.push((i, Token::Open));
            chars.next();
        } else if c == ')' {
            out.push((i, Token::Close));
            chars.next();
        } else {
            let mut atom = String::new();
            while let Some(&(_, c)) = chars.peek() {
                if c.is_whitespace() || c == '(' || c == ')' {
                    break;
                }
                atom.push(c);
                chars.next();
            }
            out.push((i, Token::Atom(atom)));
        }
    }
    out
}

struct Parser {
    tokens: Vec<(usize, Token)>,
    pos: usize,
    end: usize,
}

const KEYWORDS: [&str; 9] = ["tt", "ff", "not", "and", "or", "dia", "box", "gdia", "deadlock"];

impl Parser {
    fn offset(&self) -> usize {
        self.tokens.get(self.pos).map(|t| t.0).unwrap_or(self.end)
    }

    fn error<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Syntax { pos: self.offset(), msg: msg.into() })
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).map(|t| t.1.clone());
        self.pos += 1;
        t
    }

    fn name(&mut self, what: &str) -> Result<String> {
        match self.tokens.get(self.pos).map(|t| t.1.clone()) {
            Some(Token::Atom(a)) if valid_name(&a) => {
                self.pos += 1;
                Ok(a)
            }
            _ => self.error(format!("expected {what} name")),
        }
    }

    fn close(&mut self) -> Result<()> {
        match self.tokens.get(self.pos) {
            Some((_, Token::Close)) => {
                self.pos += 1;
                Ok(())
            }
            _ => self.error("expected `)`"),
        }
    }

    fn formula(&mut self) -> Result<Formula> {
        let start = self.pos;
        match self.next() {
            None => self.error("unexpected end of input"),
            Some(Token::Close) => {
                self.pos = start;
                self.error("unexpected `)`")
            }
            Some(Token::Atom(a)) => match a.as_str() {
                "tt" => Ok(Formula::True),
                "ff" => Ok(Formula::False),
                _ if valid_name(&a) => Ok(Formula::Prop(a)),
                _ => {
                    self.pos = start;
                    self.error(format!("unexpected `{a}`"))
                }
            },
            Some(Token::Open) => {
                let head = match self.next() {
                    Some(Token::Atom(h)) => h,
                    _ => {
                        self.pos = start + 1;
                        return self.error("expected an operator");
                    }
                };
                let f = match head.as_str() {
                    "not" => Formula::NotProp(self.name("proposition")?),
                    "and" | "or" => {
                        let mut fs = Vec::new();
                        while !matches!(self.tokens.get(self.pos), Some((_, Token::Close)) | None) {
                            fs.push(self.formula()?);
                        }
                        if head == "and" {
                            Formula::And(fs)
                        } else {
                            Formula::Or(fs)
                        }
                    }
                    "dia" | "box" => {
                        let a = self.name("action")?;
                        let body = Box::new(self.formula()?);
                        if head == "dia" {
                            Formula::Dia(a, body)
                        } else {
                            Formula::Box(a, body)
                        }
                    }
                    "gdia" => {
                        let cmp = match self.next() {
                            Some(Token::Atom(c)) if c == ">=" => Cmp::AtLeast,
                            Some(Token::Atom(c)) if c == "<=" => Cmp::AtMost,
                            _ => {
                                self.pos -= 1;
                                return self.error("expected `>=` or `<=`");
                            }
                        };
                        let count = match self.next() {
                            Some(Token::Atom(n)) => match n.parse::<usize>() {
                                Ok(n) => n,
                                Err(_) => {
                                    self.pos -= 1;
                                    return self.error("expected a natural number");
                                }
                            },
                            _ => {
                                self.pos -= 1;
                                return self.error("expected a natural number");
                            }
                        };
                        let act = self.name("action")?;
                        Formula::Graded { act, cmp, count, body: Box::new(self.formula()?) }
                    }
                    "deadlock" => Formula::Deadlock,
                    _ => {
                        self.pos = start + 1;
                        return self.error(format!("unknown operator `{head}`"));
                    }
                };
                self.close()?;
                Ok(f)
            }
        }
    }
}

fn valid_name(s: &str) -> bool {
    !s.is_empty()
        && !KEYWORDS.contains(&s)
        && s.chars().next().is_some_and(|c| c.is_alphabetic() || c == '_')
        && s.chars().all(|c| c.is_alphanumeric() || c == '_' || c == '\'' || c == '.')
}

/// Parses a formula in the s-expression grammar
/// `tt | ff | name | (not name) | (and f…) | (or f…) | (dia a f) | (box a f)
/// | (gdia >=|<= n a f) | (deadlock)`.
pub fn parse_formula(text: &str) -> Result<Formula> {
    let mut p = Parser { tokens: tokenize(text), pos: 0, end: text.len() };
    let f = p.formula()?;
    if p.pos < p.tokens.len() {
        return p.error("trailing input");
    }
    Ok(f)
}

impl FromStr for Formula {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_formula(s)
    }
}

/// A pointed Kripke structure prepared for repeated evaluation.
pub struct Model {
    pub kripke: Kripke,
    props: HashMap<String, usize>,
    acts: HashMap<String, usize>,
}

impl Model {
    pub fn new(p: &PointedStructure) -> Result<Self> {
        let kripke = Kripke::new(p)?;
        let props = kripke.props.iter().enumerate().map(|(i, n)| (n.clone(), i)).collect();
        let acts = kripke.acts.iter().enumerate().map(|(i, n)| (n.clone(), i)).collect();
        Ok(Model { kripke, props, acts })
    }

    /// Fails on propositions or actions missing from the signature.
    pub fn check_symbols(&self, f: &Formula) -> Result<()> {
        let (props, acts) = f.symbols();
        if let Some(p) = props.iter().find(|p| !self.props.contains_key(*p)) {
            return Err(Error::UnknownSymbol(p.clone()));
        }
        if let Some(a) = acts.iter().find(|a| !self.acts.contains_key(*a)) {
            return Err(Error::UnknownSymbol(a.clone()));
        }
        Ok(())
    }

    /// Satisfaction at state `x`; symbols must have been checked.
    pub fn sat(&self, f: &Formula, x: usize) -> bool {
        let k = &self.kripke;
        match f {
            Formula::True => true,
            Formula::False => false,
            Formula::Prop(p) => k.val[x] >> self.props[p] & 1 == 1,
            Formula::NotProp(p) => k.val[x] >> self.props[p] & 1 == 0,
            Formula::And(fs) => fs.iter().all(|g| self.sat(g, x)),
            Formula::Or(fs) => fs.iter().any(|g| self.sat(g, x)),
            Formula::Dia(a, g) => k.succ[self.acts[a]][x].iter().any(|&y| self.sat(g, y)),
            Formula::Box(a, g) => k.succ[self.acts[a]][x].iter().all(|&y| self.sat(g, y)),
            Formula::Graded { act, cmp, count, body } => {
                let n = k.succ[self.acts[act]][x].iter().filter(|&&y| self.sat(body, y)).count();
                match cmp {
                    Cmp::AtLeast => n >= *count,
                    Cmp::AtMost => n <= *count,
                }
            }
            Formula::Deadlock => k.is_terminal(x),
        }
    }

    /// Satisfaction at the point, checking symbols first.
    pub fn eval(&self, f: &Formula) -> Result<bool> {
        self.check_symbols(f)?;
        Ok(self.sat(f, self.kripke.point))
    }
}

/// Whether `p` satisfies `f` at its point.
pub fn eval_formula(f: &Formula, p: &PointedStructure) -> Result<bool> {
    Model::new(p)?.eval(f)
}

/// Syntactic fragments of modal logic.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Fragment {
    /// Full modal logic with graded and deadlock modalities.
    Ml,
    /// Positive existential: literals, `tt`, `ff`, `and`, `or`, `dia`.
    DiamondPos,
    /// Positive existential plus negated propositions.
    Diamond,
    /// [`Fragment::Diamond`] plus graded diamonds.
    Graded,
    /// [`Fragment::Diamond`] plus deadlock.
    DeadlockDiamond,
    /// Formulas whose conjunctions explore at most one branch.
    Linear,
}

impl Fragment {
    pub const ALL: [Fragment; 6] = [
        Fragment::Ml,
        Fragment::DiamondPos,
        Fragment::Diamond,
        Fragment::Graded,
        Fragment::DeadlockDiamond,
        Fragment::Linear,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Fragment::Ml => "ml",
            Fragment::DiamondPos => "pos",
            Fragment::Diamond => "diamond",
            Fragment::Graded => "graded",
            Fragment::DeadlockDiamond => "bot",
            Fragment::Linear => "linear",
        }
    }

    /// The trace relation characterised by the fragment.
    pub fn relation(self) -> Option<Relation> {
        match self {
            Fragment::DiamondPos => Some(Relation::Tr),
            Fragment::Diamond => Some(Relation::Ltr),
            Fragment::DeadlockDiamond => Some(Relation::Cltr),
            Fragment::Graded => Some(Relation::Gltr),
            Fragment::Ml | Fragment::Linear => None,
        }
    }

    /// The four fragments that formula synthesis targets.
    pub const SYNTHESIS: [Fragment; 4] =
        [Fragment::DiamondPos, Fragment::Diamond, Fragment::DeadlockDiamond, Fragment::Graded];
}

impl fmt::Display for Fragment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Fragment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "ml" => Fragment::Ml,
            "pos" | "diamondpos" | "diamond_pos" | "positive" => Fragment::DiamondPos,
            "diamond" | "dia" => Fragment::Diamond,
            "graded" | "gdia" => Fragment::Graded,
            "bot" | "deadlock" | "deadlockdiamond" | "deadlock_diamond" => Fragment::DeadlockDiamond,
            "linear" => Fragment::Linear,
            _ => return Err(Error::InvalidArgument(format!("unknown fragment `{s}`"))),
        })
    }
}

/// Fragment membership and modal depth of a formula.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Classification {
    pub fragments: BTreeSet<Fragment>,
    pub depth: usize,
}

impl Classification {
    pub fn contains(&self, f: Fragment) -> bool {
        self.fragments.contains(&f)
    }
}

#[derive(Clone, Copy, Default)]
struct Features {
    negation: bool,
    boxes: bool,
    graded: bool,
    deadlock: bool,
}

fn features(f: &Formula, out: &mut Features) {
    match f {
        Formula::NotProp(_) => out.negation = true,
        Formula::And(fs) | Formula::Or(fs) => fs.iter().for_each(|g| features(g, out)),
        Formula::Dia(_, g) => features(g, out),
        Formula::Box(_, g) => {
            out.boxes = true;
            features(g, out);
        }
        Formula::Graded { body, .. } => {
            out.graded = true;
            features(body, out);
        }
        Formula::Deadlock => out.deadlock = true,
        Formula::True | Formula::False | Formula::Prop(_) => {}
    }
}

/// Whether a formula applies a modality to a body other than `tt` or `ff`.
fn heavy(f: &Formula) -> bool {
    match f {
        Formula::And(fs) | Formula::Or(fs) => fs.iter().any(heavy),
        Formula::Dia(_, g) | Formula::Box(_, g) | Formula::Graded { body: g, .. } => {
            !matches!(**g, Formula::True | Formula::False)
        }
        _ => false,
    }
}

/// The linearity predicate: every conjunction has at most one heavy
/// conjunct, box bodies are not heavy, recursively.
pub fn is_linear(f: &Formula) -> bool {
    match f {
        Formula::And(fs) => fs.iter().filter(|g| heavy(g)).count() <= 1 && fs.iter().all(is_linear),
        Formula::Or(fs) => fs.iter().all(is_linear),
        Formula::Box(_, g) => !heavy(g) && is_linear(g),
        Formula::Dia(_, g) | Formula::Graded { body: g, .. } => is_linear(g),
        _ => true,
    }
}

/// Fragments containing `f`, and its modal depth.
pub fn classify(f: &Formula) -> Classification {
    let mut ft = Features::default();
    features(f, &mut ft);
    let mut fragments = BTreeSet::from([Fragment::Ml]);
    let diamond_only = !ft.boxes && !ft.graded && !ft.deadlock;
    if diamond_only && !ft.negation {
        fragments.insert(Fragment::DiamondPos);
    }
    if diamond_only {
        fragments.insert(Fragment::Diamond);
    }
    if !ft.boxes && !ft.graded {
        fragments.insert(Fragment::DeadlockDiamond);
    }
    if !ft.boxes && !ft.deadlock {
        fragments.insert(Fragment::Graded);
    }
    if is_linear(f) {
        fragments.insert(Fragment::Linear);
    }
    Classification { fragments, depth: f.depth() }
}

fn literals(v: u64, props: &[String], negative: bool) -> Vec<Formula> {
    let mut out: Vec<Formula> = bits(v).map(|i| Formula::Prop(props[i].clone())).collect();
    if negative {
        out.extend((0..props.len()).filter(|i| v >> i & 1 == 0).map(|i| Formula::NotProp(props[i].clone())));
    }
    out
}

fn synthesis_target(fragment: Fragment) -> Result<()> {
    match fragment {
        Fragment::Ml | Fragment::Linear => {
            Err(Error::InvalidArgument(format!("fragment {fragment} is not a synthesis target")))
        }
        _ => Ok(()),
    }
}

/// Formula for a run: literals of each state, nested under diamonds along
/// the run. `deadlock_at_end` adds the deadlock modality at the last state;
/// the graded fragment records the exact successor count at every step.
fn run_formula(run: &Run, k: &Kripke, fragment: Fragment, deadlock_at_end: bool) -> Formula {
    let negative = fragment != Fragment::DiamondPos;
    let mut f = Formula::and(
        literals(k.val[run.last()], &k.props, negative)
            .into_iter()
            .chain(deadlock_at_end.then_some(Formula::Deadlock)),
    );
    for i in (0..run.len()).rev() {
        let (x, act) = (run.states[i], run.actions[i]);
        let name = &k.acts[act];
        let mut parts = literals(k.val[x], &k.props, negative);
        if fragment == Fragment::Graded {
            let m = k.succ[act][x].len();
            parts.push(Formula::graded(name, Cmp::AtLeast, m, Formula::True));
            parts.push(Formula::graded(name, Cmp::AtMost, m, Formula::True));
        }
        parts.push(Formula::dia(name, f));
        f = Formula::and(parts);
    }
    f
}

/// Formula of a run of `p` in one of the synthesis fragments. In the
/// deadlock fragment a run ending in a terminal state adds the deadlock
/// modality at its end.
pub fn synth_trace_formula(p: &PointedStructure, run: &Run, fragment: Fragment) -> Result<Formula> {
    synthesis_target(fragment)?;
    let k = Kripke::new(p)?;
    if !run.is_valid(&k) {
        return Err(Error::InvalidArgument("run is not a run of the structure".into()));
    }
    let end = fragment == Fragment::DeadlockDiamond && k.is_terminal(run.last());
    Ok(run_formula(run, &k, fragment, end))
}

/// Conjunction of the run formulas of all runs of length `≤ k`. In the
/// deadlock fragment only runs shorter than `k` that end in a terminal
/// state carry the deadlock modality, so the result has depth `≤ k`.
pub fn synth_characteristic(p: &PointedStructure, k: usize, fragment: Fragment) -> Result<Formula> {
    synthesis_target(fragment)?;
    let kr = Kripke::new(p)?;
    Ok(Formula::and(runs_upto(&kr, k).iter().map(|r| {
        let end = fragment == Fragment::DeadlockDiamond && kr.is_terminal(r.last()) && r.len() < k;
        run_formula(r, &kr, fragment, end)
    })))
}

/// Linear formula expressing a ready trace: literals at every position, a
/// diamond for each other enabled action, a box to `ff` for each disabled
/// action, and the remaining trace under the diamond of the next action.
pub fn synth_ready_formula(rt: &ReadyTrace, props: &[String], acts: &[String]) -> Formula {
    let clause = |i: usize, next: Option<usize>| -> Vec<Formula> {
        let mut parts = literals(rt.valuations[i], props, true);
        if let Some(&ready) = rt.ready.get(i) {
            for (a, name) in acts.iter().enumerate() {
                if ready >> a & 1 == 0 {
                    parts.push(Formula::boxed(name, Formula::False));
                } else if Some(a) != next {
                    parts.push(Formula::dia(name, Formula::True));
                }
            }
        }
        parts
    };
    let n = rt.len();
    let mut f = Formula::and(clause(n, None));
    for i in (0..n).rev() {
        let act = rt.actions[i];
        let mut parts = clause(i, Some(act));
        parts.push(Formula::dia(&acts[act], f));
        f = Formula::and(parts);
    }
    f
}

/// Integer partitions of `n` into at most `max_parts` parts, each at most
/// `max_part`, listed as non-increasing sequences.
fn partitions(n: usize, max_parts: usize, max_part: usize) -> Vec<Vec<usize>> {
    fn go(n: usize, max: usize, slots: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if n == 0 {
            out.push(cur.clone());
            return;
        }
        if slots == 0 || slots.saturating_mul(max) < n {
            return;
        }
        for part in (1..=max.min(n)).rev() {
            cur.push(part);
            go(n - part, part, slots - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(n, max_part, max_parts, &mut Vec::new(), &mut out);
    out
}

/// Largest number of successors of one state under one action, over all
/// given structures (at least 1).
pub fn branching(models: &[&Kripke]) -> usize {
    models
        .iter()
        .flat_map(|k| k.succ.iter().flat_map(|per_state| per_state.iter().map(Vec::len)))
        .max()
        .unwrap_or(0)
        .max(1)
}

/// Graded formula stating that at least `n` maximal runs of depth `depth`
/// from the current state follow the suffix of `t` starting at `from`.
///
/// The formula implies the count on every structure and is equivalent to it
/// on structures where no state has more than `branch` successors under one
/// action; the bound keeps the number of successor partitions small.
pub fn at_least_runs(
    t: &LabelledTrace,
    from: usize,
    n: usize,
    depth: usize,
    branch: usize,
    props: &[String],
    acts: &[String],
) -> Formula {
    if n == 0 {
        return Formula::True;
    }
    let here = Formula::and(literals(t.valuations[from], props, true));
    if from == t.len() {
        if n > 1 {
            return Formula::False;
        }
        if depth == 0 {
            return here;
        }
        let terminal = acts.iter().map(|a| Formula::graded(a, Cmp::AtMost, 0, Formula::True));
        return Formula::and(std::iter::once(here).chain(terminal));
    }
    let act = &acts[t.actions[from]];
    let max_part = u32::try_from(depth - 1).ok().and_then(|e| branch.checked_pow(e)).unwrap_or(usize::MAX);
    let options: Vec<Formula> = partitions(n, branch, max_part)
        .into_iter()
        .map(|lambda| {
            let max = lambda[0];
            Formula::and((1..=max).map(|j| {
                let at_least_j = lambda.iter().filter(|&&p| p >= j).count();
                let body = at_least_runs(t, from + 1, j, depth - 1, branch, props, acts);
                Formula::graded(act, Cmp::AtLeast, at_least_j, body)
            }))
        })
        .collect();
    Formula::and([here, Formula::or(options)])
}

/// Graded formula stating that exactly `n` maximal runs of depth `depth`
/// have trace `t`, exact on structures with branching at most `branch`.
pub fn exactly_runs(
    t: &LabelledTrace,
    n: usize,
    depth: usize,
    branch: usize,
    props: &[String],
    acts: &[String],
) -> Formula {
    Formula::and([
        at_least_runs(t, 0, n, depth, branch, props, acts),
        at_least_runs(t, 0, n + 1, depth, branch, props, acts).negate(acts),
    ])
}

/// Whether `f` holds on exactly the side `side` of the pair.
fn separates(f: &Formula, ma: &Model, mb: &Model, side: Side) -> bool {
    let (x, y) = (ma.sat(f, ma.kripke.point), mb.sat(f, mb.kripke.point));
    match side {
        Side::Left => x && !y,
        Side::Right => y && !x,
    }
}

/// Greedily removes conjuncts and disjuncts anywhere in `f` while it keeps
/// separating.
fn minimise(mut f: Formula, ma: &Model, mb: &Model, side: Side) -> Formula {
    fn variants(f: &Formula) -> Vec<Formula> {
        let mut out = Vec::new();
        match f {
            Formula::And(fs) | Formula::Or(fs) => {
                let is_and = matches!(f, Formula::And(_));
                let rebuild = |v: Vec<Formula>| if is_and { Formula::and(v) } else { Formula::or(v) };
                if !is_and {
                    out.extend(fs.iter().cloned());
                }
                if is_and {
                    for i in 0..fs.len() {
                        let mut v = fs.clone();
                        v.remove(i);
                        out.push(rebuild(v));
                    }
                }
                for i in 0..fs.len() {
                    for g in variants(&fs[i]) {
                        let mut v = fs.clone();
                        v[i] = g;
                        out.push(rebuild(v));
                    }
                }
            }
            Formula::Dia(a, g) => out.extend(variants(g).into_iter().map(|h| Formula::dia(a, h))),
            Formula::Box(a, g) => out.extend(variants(g).into_iter().map(|h| Formula::boxed(a, h))),
            Formula::Graded { act, cmp, count, body } => {
                out.extend(variants(body).into_iter().map(|h| Formula::graded(act, *cmp, *count, h)))
            }
            _ => {}
        }
        out
    }
    while let Some(g) = variants(&f).into_iter().find(|g| separates(g, ma, mb, side)) {
        f = g;
    }
    f
}

/// A run of `k` whose labelled trace is `t`.
fn run_with_trace(k: &Kripke, t: &LabelledTrace) -> Option<Run> {
    fn go(k: &Kripke, t: &LabelledTrace, run: &mut Run) -> bool {
        let i = run.len();
        if k.val[run.last()] != t.valuations[i] {
            return false;
        }
        if i == t.len() {
            return !t.complete || k.is_terminal(run.last());
        }
        let act = t.actions[i];
        for &y in &k.succ[act][run.last()] {
            run.states.push(y);
            run.actions.push(act);
            if go(k, t, run) {
                return true;
            }
            run.states.pop();
            run.actions.pop();
        }
        false
    }
    let mut run = Run { states: vec![k.point], actions: vec![] };
    go(k, t, &mut run).then_some(run)
}

/// A formula of `fragment` true in exactly one of `a`, `b`, or `None` when
/// the relation characterised by the fragment holds in both directions.
/// Without a depth the check is exact (not available for graded formulas).
pub fn synth_distinguishing(
    a: &PointedStructure,
    b: &PointedStructure,
    k: Option<usize>,
    fragment: Fragment,
) -> Result<Option<Formula>> {
    synthesis_target(fragment)?;
    a.signature().check_compatible(b.signature())?;
    let rel = fragment.relation().expect("synthesis fragments have a relation");
    let bound = match k {
        Some(k) => Bound::Depth(k),
        None if rel == Relation::Gltr => {
            return Err(Error::InvalidArgument("graded distinction needs a depth bound".into()))
        }
        None => Bound::Exact,
    };
    let (ma, mb) = (Model::new(a)?, Model::new(b)?);
    let witness = if rel.is_directed() {
        let forward = check_trace_relation(rel, a, b, bound)?;
        match forward.witness {
            Some(w) => Some(w),
            None => check_trace_relation(rel, b, a, bound)?.witness.map(|w| match w {
                TraceWitness::Labelled { trace, .. } => TraceWitness::Labelled { side: Side::Right, trace },
                other => other,
            }),
        }
    } else {
        check_trace_relation(rel, a, b, bound)?.witness
    };
    let Some(witness) = witness else { return Ok(None) };
    let (props, acts) = (&ma.kripke.props, &ma.kripke.acts);
    let (f, side) = match witness {
        TraceWitness::Labelled { side, trace } => {
            let m = if side == Side::Left { &ma } else { &mb };
            let run = run_with_trace(&m.kripke, &trace).expect("witness traces are realised");
            (run_formula(&run, &m.kripke, fragment, trace.complete), side)
        }
        TraceWitness::Count { .. } => {
            let depth = k.expect("graded checks are bounded");
            let (ca, cb) = (maximal_trace_counts(&ma.kripke, depth), maximal_trace_counts(&mb.kripke, depth));
            let count = |c: &BTreeMap<LabelledTrace, usize>, t: &LabelledTrace| {
                c.get(t).copied().unwrap_or(0)
            };
            let (trace, l, r) = ca
                .keys()
                .chain(cb.keys())
                .map(|t| (t, count(&ca, t), count(&cb, t)))
                .filter(|(_, l, r)| l != r)
                .min_by_key(|(t, l, r)| (*l.min(r), (*t).clone()))
                .expect("count witnesses have a mismatch");
            let side = if l > r { Side::Left } else { Side::Right };
            let branch = branching(&[&ma.kripke, &mb.kripke]);
            (at_least_runs(trace, 0, l.min(r) + 1, depth, branch, props, acts), side)
        }
        TraceWitness::Ready { .. } => unreachable!("ready traces are not used by synthesis fragments"),
    };
    debug_assert!(separates(&f, &ma, &mb, side));
    Ok(Some(minimise(f, &ma, &mb, side)))
}

/// Whether `b` satisfies the formula of every maximal-run count of `a` at
/// depth `k` and vice versa, using graded counting formulas.
pub fn graded_counts_agree(a: &PointedStructure, b: &PointedStructure, k: usize) -> Result<bool> {
    let (ma, mb) = (Model::new(a)?, Model::new(b)?);
    let (props, acts) = (ma.kripke.props.clone(), ma.kripke.acts.clone());
    let branch = branching(&[&ma.kripke, &mb.kripke]);
    for (src, dst) in [(&ma, &mb), (&mb, &ma)] {
        for (t, n) in maximal_trace_counts(&src.kripke, k) {
            let f = exactly_runs(&t, n, k, branch, &props, &acts);
            if !dst.sat(&f, dst.kripke.point) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::traces::enumerate_runs;

    fn fx(name: &str) -> PointedStructure {
        fixtures::load(name).unwrap()
    }

    fn f(s: &str) -> Formula {
        parse_formula(s).unwrap()
    }

    #[test]
    fn parse_examples() {
        assert_eq!(f("(dia a tt)"), Formula::Dia("a".into(), Box::new(Formula::True)));
        assert_eq!(
            f("(and p (not q))"),
            Formula::And(vec![Formula::Prop("p".into()), Formula::NotProp("q".into())])
        );
        assert_eq!(
            f("(gdia >= 2 a (deadlock))"),
            Formula::Graded { act: "a".into(), cmp: Cmp::AtLeast, count: 2, body: Box::new(Formula::Deadlock) }
        );
    }

    #[test]
    fn round_trip() {
        for s in ["tt", "(and)", "(or p (box b ff) (gdia <= 0 a (not q)))", "(dia a (and (deadlock) p))"] {
            assert_eq!(render_formula(&f(s)), s);
        }
    }

    #[test]
    fn syntax_errors_carry_offsets() {
        for (s, pos) in [("(dia a", 6), ("(foo p)", 1), ("(gdia > 1 a tt)", 6), ("tt tt", 3), (")", 0)] {
            match parse_formula(s) {
                Err(Error::Syntax { pos: p, .. }) => assert_eq!(p, pos, "{s}"),
                other => panic!("{s}: {other:?}"),
            }
        }
    }

    #[test]
    fn evaluation_examples() {
        assert!(eval_formula(&f("(deadlock)"), &fx("terminal")).unwrap());
        assert!(eval_formula(&f("(dia a q)"), &fx("fix5")).unwrap());
        assert!(eval_formula(&f("(dia a (deadlock))"), &fx("fix3")).unwrap());
        assert!(!eval_formula(&f("(dia a (deadlock))"), &fx("fix4")).unwrap());
        assert!(matches!(eval_formula(&f("(dia z tt)"), &fx("fix4")), Err(Error::UnknownSymbol(_))));
        assert!(matches!(eval_formula(&f("a"), &fx("fix4")), Err(Error::UnknownSymbol(_))));
        assert!(eval_formula(&f("(gdia >= 2 a tt)"), &fx("fix2")).unwrap());
        assert!(!eval_formula(&f("(gdia >= 2 a tt)"), &fx("fix1")).unwrap());
    }

    #[test]
    fn classification() {
        let c = classify(&f("(dia a (box a (dia a p)))"));
        assert!(!c.contains(Fragment::Linear));
        assert_eq!(c.depth, 3);
        assert_eq!(classify(&Formula::Deadlock).depth, 1);
        assert!(classify(&f("(dia a p)")).contains(Fragment::DiamondPos));
        assert!(!classify(&f("(dia a (not p))")).contains(Fragment::DiamondPos));
        assert!(classify(&f("(dia a (deadlock))")).contains(Fragment::DeadlockDiamond));
        assert!(!classify(&f("(and (dia a p) (dia b q))")).contains(Fragment::Linear));
        assert!(classify(&f("(and (dia a tt) (box b ff) (dia c p))")).contains(Fragment::Linear));
    }

    #[test]
    fn trace_formula_examples() {
        let p = fx("fix5");
        let runs = enumerate_runs(&p, 0).unwrap();
        assert_eq!(synth_trace_formula(&p, &runs[0], Fragment::DiamondPos).unwrap(), f("p"));
        let runs = enumerate_runs(&p, 1).unwrap();
        let g = synth_trace_formula(&p, &runs[0], Fragment::Diamond).unwrap();
        assert_eq!(g, f("(and p (not q) (dia a (and q (not p))))"));
        let p4 = fx("fix4");
        let run = &enumerate_runs(&p4, 2).unwrap()[0];
        let g = synth_trace_formula(&p4, run, Fragment::DeadlockDiamond).unwrap();
        assert_eq!(g, f("(dia a (dia b (deadlock)))"));
        assert!(eval_formula(&g, &p4).unwrap());
        assert!(eval_formula(&g, &fx("fix3")).unwrap());
    }

    #[test]
    fn characteristic_examples() {
        let t = fx("terminal");
        assert_eq!(synth_characteristic(&t, 2, Fragment::DeadlockDiamond).unwrap(), Formula::Deadlock);
        let c = synth_characteristic(&fx("fix4"), 2, Fragment::DeadlockDiamond).unwrap();
        assert_eq!(c, f("(and (dia a tt) (dia a (dia b tt)))"));
        for name in ["fix1", "fix2", "fix3", "fix5", "loop"] {
            let p = fx(name);
            for frag in Fragment::SYNTHESIS {
                let c = synth_characteristic(&p, 3, frag).unwrap();
                assert!(eval_formula(&c, &p).unwrap(), "{name} {frag}");
                assert!(c.depth() <= 3);
            }
        }
    }

    #[test]
    fn ready_formula_examples() {
        let acts: Vec<String> = ["a", "b", "c"].map(String::from).to_vec();
        let one = ReadyTrace { valuations: vec![0], ready: vec![1], actions: vec![] };
        let g = synth_ready_formula(&one, &[], &acts);
        assert_eq!(g, f("(and (dia a tt) (box b ff) (box c ff))"));
        assert!(classify(&g).contains(Fragment::Linear));
        let k = Kripke::new(&fx("fix1")).unwrap();
        let run = &runs_upto(&k, 2)[2];
        let rt = run.ready_trace(&k, 3);
        let g = synth_ready_formula(&rt, &[], &k.acts);
        assert!(classify(&g).contains(Fragment::Linear));
        assert!(eval_formula(&g, &fx("fix1")).unwrap());
        assert!(!eval_formula(&g, &fx("fix2")).unwrap());
        let end = ReadyTrace { valuations: vec![0], ready: vec![0], actions: vec![] };
        let g = synth_ready_formula(&end, &[], &acts);
        assert!(eval_formula(&g, &fx("terminal")).unwrap());
        assert!(!eval_formula(&g, &fx("loop")).unwrap());
    }

    #[test]
    fn distinguishing_examples() {
        assert_eq!(synth_distinguishing(&fx("fix5"), &fx("fix5"), Some(2), Fragment::Diamond).unwrap(), None);
        let g = synth_distinguishing(&fx("fix3"), &fx("fix4"), Some(2), Fragment::DeadlockDiamond).unwrap();
        assert_eq!(g, Some(f("(dia a (deadlock))")));
        let g = synth_distinguishing(&fx("fix3"), &fx("fix4"), None, Fragment::DeadlockDiamond).unwrap();
        assert_eq!(g, Some(f("(dia a (deadlock))")));
        let g = synth_distinguishing(&fx("fix2"), &fx("fix1"), Some(1), Fragment::Graded).unwrap();
        assert_eq!(g, Some(f("(gdia >= 2 a tt)")));
    }

    #[test]
    fn counting_formulas() {
        let (a, b) = (fx("fix1"), fx("fix2"));
        assert!(!graded_counts_agree(&a, &b, 1).unwrap());
        assert!(graded_counts_agree(&a, &b, 2).unwrap());
        assert!(graded_counts_agree(&a, &a, 3).unwrap());
        assert_eq!(partitions(4, 4, 4).len(), 5);
        assert_eq!(partitions(4, 2, 4), vec![vec![4], vec![3, 1], vec![2, 2]]);
        assert_eq!(partitions(4, 2, 2), vec![vec![2, 2]]);
    }
}
