//! Command-line front end. Exit codes: 0 when the verdict is true (or the
//! command simply succeeded), 1 when it is false, 2 on any error.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use crate::games::{
    render_spoiler_line, solve_back_and_forth, solve_bisim, solve_ef, solve_ppeb, GameResult, Names, TupleStructure,
    Variant, Witness,
};
use crate::logic::{parse_formula, synth_distinguishing, Fragment, Model};
use crate::oracle::suites::{run_suite, SuiteParams};
use crate::structures::{PointedStructure, Structure, StructureFile};
use crate::traces::{check_trace_relation, Bound, Relation};
use crate::unravel::{ml_graft, ml_unravel, pr_unravel, tree_unravel};

#[derive(Parser, Debug)]
#[command(name = "arboreal", version, about = "Trace relations, unravelings and games on pointed Kripke structures")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Decide a trace relation or bounded bisimilarity between two structures.
    Check(CheckArgs),
    /// Synthesise a formula true on exactly one of two structures.
    Distinguish(DistinguishArgs),
    /// Print an unraveling (forest file) or graft (structure file).
    Unravel(UnravelArgs),
    /// Solve a game between two structures.
    Game(GameArgs),
    /// Evaluate a formula at the point of a structure.
    Eval(EvalArgs),
    /// Run a randomised verification suite.
    Verify(VerifyArgs),
}

#[derive(Args, Debug)]
struct CheckArgs {
    /// tr, ltr, cltr, gltr, rt or bisim.
    #[arg(long)]
    rel: String,
    #[arg(short = 'k', long = "k", conflicts_with = "exact")]
    k: Option<usize>,
    /// Decide the unbounded relation (tr, ltr and cltr only).
    #[arg(long)]
    exact: bool,
    left: PathBuf,
    right: PathBuf,
}

#[derive(Args, Debug)]
struct DistinguishArgs {
    /// ml, pos, diamond, bot or graded.
    #[arg(long)]
    fragment: String,
    /// Depth bound; omitted means unbounded (not for graded).
    #[arg(short = 'k', long = "k")]
    k: Option<usize>,
    left: PathBuf,
    right: PathBuf,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
#[value(rename_all = "UPPER")]
enum Comonad {
    Ml,
    Tree,
    Pr,
    Graft,
}

#[derive(Args, Debug)]
struct UnravelArgs {
    #[arg(long, value_enum, ignore_case = true)]
    comonad: Comonad,
    /// Depth (pebble count for PR).
    #[arg(short = 'k', long = "k")]
    k: usize,
    /// Longest placement sequence for PR.
    #[arg(long)]
    len: Option<usize>,
    file: PathBuf,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum GameType {
    Ef,
    Bisim,
    Bf,
    Ppeb,
}

#[derive(Args, Debug)]
struct GameArgs {
    #[arg(long = "type", value_enum)]
    kind: GameType,
    /// Rank of the EF game.
    #[arg(short = 'r', long = "r")]
    r: Option<usize>,
    /// Depth (bisim, bf) or pebble count (ppeb).
    #[arg(short = 'k', long = "k")]
    k: Option<usize>,
    /// Longest placement sequence of the pebble game.
    #[arg(short = 'n', long = "n")]
    n: Option<usize>,
    /// Variant of the back-and-forth game.
    #[arg(long, default_value = "full")]
    variant: String,
    /// Unraveling used by the back-and-forth game: ML or TREE.
    #[arg(long, value_enum, ignore_case = true, default_value = "ML")]
    comonad: Comonad,
    left: PathBuf,
    right: PathBuf,
}

#[derive(Args, Debug)]
struct EvalArgs {
    /// Formula text, or `@path` to read it from a file.
    #[arg(long)]
    formula: String,
    file: PathBuf,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long)]
    suite: String,
    #[arg(long, default_value_t = 3)]
    size: usize,
    #[arg(short = 'k', long = "k", default_value_t = 2)]
    k: usize,
    #[arg(long, default_value_t = 20)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Longest placement sequence (thm54).
    #[arg(long, default_value_t = 4)]
    len: usize,
    /// Proposition count (cor74).
    #[arg(long, default_value_t = 2)]
    props: usize,
    /// Action count (cor74).
    #[arg(long, default_value_t = 2)]
    acts: usize,
}

/// Element names of two structures and action names, for witness output.
struct Labels {
    left: Vec<String>,
    right: Vec<String>,
    acts: Vec<String>,
}

impl Labels {
    fn of(a: &Structure, b: &Structure) -> Self {
        Labels { left: a.universe().to_vec(), right: b.universe().to_vec(), acts: a.signature().acts() }
    }
}

impl Names for Labels {
    fn name(&self, side: crate::traces::Side, index: usize) -> String {
        let names = match side {
            crate::traces::Side::Left => &self.left,
            crate::traces::Side::Right => &self.right,
        };
        names.get(index).cloned().unwrap_or_else(|| index.to_string())
    }

    fn label(&self, label: usize) -> String {
        self.acts.get(label).cloned().unwrap_or_else(|| label.to_string())
    }
}

fn read_structure(path: &Path) -> Result<(Structure, Option<usize>)> {
    Structure::from_file(&StructureFile::read(path)?)
}

fn read_pointed(path: &Path) -> Result<PointedStructure> {
    PointedStructure::read(path)
}

fn verdict(out: &mut dyn Write, holds: bool) -> Result<i32> {
    writeln!(out, "{}", if holds { "TRUE" } else { "FALSE" })?;
    Ok(if holds { 0 } else { 1 })
}

fn game_output(out: &mut dyn Write, g: &GameResult, names: &Labels) -> Result<i32> {
    writeln!(out, "{}", g.winner)?;
    match &g.witness {
        Witness::Spoiler(tree) => writeln!(out, "{}", render_spoiler_line(tree, names))?,
        Witness::Immediate => writeln!(out, "start position is not a partial isomorphism")?,
        Witness::Sequence(seq) => {
            let moves: Vec<String> = seq
                .iter()
                .map(|m| format!("pebble {} {} {}", m.pebble, m.side, names.name(m.side, m.element)))
                .collect();
            writeln!(out, "{}", moves.join(", "))?;
        }
        Witness::Strategy(_) | Witness::Responder(_) => {}
    }
    Ok(if g.duplicator_wins() { 0 } else { 1 })
}

fn required(v: Option<usize>, flag: &str) -> Result<usize> {
    v.ok_or_else(|| Error::InvalidArgument(format!("{flag} is required")))
}

fn check(a: CheckArgs, out: &mut dyn Write) -> Result<i32> {
    let (x, y) = (read_pointed(&a.left)?, read_pointed(&a.right)?);
    if a.rel == "bisim" {
        if a.exact {
            return Err(Error::Unsupported("bisim is decided at a depth bound only".into()));
        }
        let g = solve_bisim(&x, &y, required(a.k, "-k")?)?;
        verdict(out, g.duplicator_wins())?;
        let labels = Labels::of(&x.base, &y.base);
        if let Witness::Spoiler(tree) = &g.witness {
            writeln!(out, "SPOILER {}", render_spoiler_line(tree, &labels))?;
        }
        return Ok(if g.duplicator_wins() { 0 } else { 1 });
    }
    let rel: Relation = a.rel.parse()?;
    let bound = if a.exact { Bound::Exact } else { Bound::Depth(required(a.k, "-k or --exact")?) };
    let v = check_trace_relation(rel, &x, &y, bound)?;
    let code = verdict(out, v.holds)?;
    if let Some(w) = v.witness {
        let sig = x.signature();
        writeln!(out, "{}", w.render(&sig.props(), &sig.acts()))?;
    }
    Ok(code)
}

fn distinguish(a: DistinguishArgs, out: &mut dyn Write) -> Result<i32> {
    let (x, y) = (read_pointed(&a.left)?, read_pointed(&a.right)?);
    let fragment: Fragment = a.fragment.parse()?;
    match synth_distinguishing(&x, &y, a.k, fragment)? {
        None => {
            writeln!(out, "equivalent")?;
            Ok(0)
        }
        Some(f) => {
            writeln!(out, "{f}")?;
            Ok(1)
        }
    }
}

fn unravel(a: UnravelArgs, out: &mut dyn Write) -> Result<i32> {
    let text = match a.comonad {
        Comonad::Ml => ml_unravel(&read_pointed(&a.file)?, a.k)?.to_json(),
        Comonad::Tree => tree_unravel(&read_pointed(&a.file)?, a.k)?.to_json(),
        Comonad::Graft => ml_graft(&read_pointed(&a.file)?, a.k)?.to_json(),
        Comonad::Pr => {
            let (s, _) = read_structure(&a.file)?;
            pr_unravel(&s, a.k, required(a.len, "--len")?)?.to_json()
        }
    };
    writeln!(out, "{text}")?;
    Ok(0)
}

fn game(a: GameArgs, out: &mut dyn Write) -> Result<i32> {
    match a.kind {
        GameType::Ef => {
            let ((x, px), (y, py)) = (read_structure(&a.left)?, read_structure(&a.right)?);
            let labels = Labels::of(&x, &y);
            let tx = TupleStructure { base: x, tuple: px.into_iter().collect() };
            let ty = TupleStructure { base: y, tuple: py.into_iter().collect() };
            let g = solve_ef(&tx, &ty, required(a.r, "-r")?)?;
            game_output(out, &g, &labels)
        }
        GameType::Bisim => {
            let (x, y) = (read_pointed(&a.left)?, read_pointed(&a.right)?);
            let g = solve_bisim(&x, &y, required(a.k, "-k")?)?;
            game_output(out, &g, &Labels::of(&x.base, &y.base))
        }
        GameType::Bf => {
            let (x, y) = (read_pointed(&a.left)?, read_pointed(&a.right)?);
            let k = required(a.k, "-k")?;
            let (ux, uy) = match a.comonad {
                Comonad::Ml => (ml_unravel(&x, k)?, ml_unravel(&y, k)?),
                Comonad::Tree => (tree_unravel(&x, k)?, tree_unravel(&y, k)?),
                _ => return Err(Error::InvalidArgument("bf uses the ML or TREE unraveling".into())),
            };
            let variant: Variant = a.variant.parse()?;
            let g = solve_back_and_forth(&ux, &uy, variant)?;
            let labels = Labels {
                left: (0..ux.len()).map(|i| ux.id(i).to_string()).collect(),
                right: (0..uy.len()).map(|i| uy.id(i).to_string()).collect(),
                acts: Vec::new(),
            };
            game_output(out, &g, &labels)
        }
        GameType::Ppeb => {
            let ((x, _), (y, _)) = (read_structure(&a.left)?, read_structure(&a.right)?);
            let g = solve_ppeb(&x, &y, required(a.k, "-k")?, required(a.n, "-n")?)?;
            game_output(out, &g, &Labels::of(&x, &y))
        }
    }
}

fn eval(a: EvalArgs, out: &mut dyn Write) -> Result<i32> {
    let text = match a.formula.strip_prefix('@') {
        Some(path) => std::fs::read_to_string(path)?,
        None => a.formula,
    };
    let f = parse_formula(&text)?;
    let p = read_pointed(&a.file)?;
    verdict(out, Model::new(&p)?.eval(&f)?)
}

fn verify(a: VerifyArgs, out: &mut dyn Write) -> Result<i32> {
    let params = SuiteParams {
        size: a.size,
        k: a.k,
        samples: a.samples,
        seed: a.seed,
        len: a.len,
        props: a.props,
        acts: a.acts,
    };
    let report = run_suite(&a.suite, &params)?;
    write!(out, "{report}")?;
    Ok(if report.passed() { 0 } else { 1 })
}

/// Runs the command line `args` (including the program name), writing
/// results to `out` and diagnostics to `err`. Returns the exit code.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = if e.use_stderr() { write!(err, "{e}") } else { write!(out, "{e}") };
            return code;
        }
    };
    let result = match cli.command {
        Command::Check(a) => check(a, out),
        Command::Distinguish(a) => distinguish(a, out),
        Command::Unravel(a) => unravel(a, out),
        Command::Game(a) => game(a, out),
        Command::Eval(a) => eval(a, out),
        Command::Verify(a) => verify(a, out),
    };
    match result {
        Ok(code) => code,
        Err(Error::Io(e)) if e.kind() == std::io::ErrorKind::BrokenPipe => 2,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            2
        }
    }
}

/// Runs the process command line against standard output and error.
pub fn run() -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixture(name: &str) -> String {
        format!("{}/fixtures/{name}.json", env!("CARGO_MANIFEST_DIR"))
    }

    fn call(args: &[&str]) -> (i32, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let mut full = vec!["arboreal".to_string()];
        full.extend(args.iter().map(|a| a.to_string()));
        let code = run_with(full, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn check_exit_codes() {
        let (code, out, _) = call(&["check", "--rel", "cltr", "-k", "3", &fixture("fix1"), &fixture("fix2")]);
        assert_eq!((code, out.as_str()), (0, "TRUE\n"));
        let (code, out, _) = call(&["check", "--rel", "bisim", "-k", "2", &fixture("fix1"), &fixture("fix2")]);
        assert_eq!(code, 1);
        assert!(out.starts_with("FALSE\nSPOILER "), "{out}");
    }

    #[test]
    fn errors_exit_two() {
        let (code, _, err) = call(&["check", "--rel", "cltr", "-k", "1", "/nonexistent.json", &fixture("fix1")]);
        assert_eq!(code, 2);
        assert!(err.starts_with("error:"));
        assert_eq!(call(&["bogus"]).0, 2);
        assert_eq!(call(&["eval", "--formula", "(dia a", &fixture("fix1")]).0, 2);
    }

    #[test]
    fn eval_and_game() {
        assert_eq!(call(&["eval", "--formula", "(deadlock)", &fixture("terminal")]).1, "TRUE\n");
        let (code, out, _) = call(&["game", "--type", "ef", "-r", "2", &fixture("chain2"), &fixture("chain3")]);
        assert_eq!(code, 1);
        assert!(out.starts_with("SPOILER\n"));
    }
}
