//! Command-line frontend: evaluation, meaning sets, equivalence checking,
//! rewriting, prenexing, primality testing, theorem suites and quantifier
//! inspection.
//!
//! Exit codes: 0 = true/holds/success, 1 = false/fails/stuck,
//! 2 = usage or input error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use teamsem::files::{load_quantifiers, parse_structure, parse_team, print_structure, print_team};
use teamsem::model::{mask_elems, Structure, Team};
use teamsem::parser::parse;
use teamsem::quantifiers::Registry;
use teamsem::rewrite::{self, PrimalityOutcome, RewriteStep};
use teamsem::semantics::{
    eval_bounded, eval_team, meaning_set, sentence_initial_meaning, BoundedUniformity, EvalConfig,
    ExistsMode,
};
use teamsem::syntax::{Formula, VarSet};
use teamsem::verify::{run_suite, SearchBounds, Verdict};
use teamsem::{Error, Result};

#[derive(Parser)]
#[command(name = "teamsem", about = "Team-semantics evaluator for slashed logics \
with generalized quantifiers", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct FormulaInput {
    /// Read the formula from a file.
    #[arg(long, conflicts_with = "expr")]
    formula: Option<PathBuf>,
    /// Give the formula inline.
    #[arg(long)]
    expr: Option<String>,
}

impl FormulaInput {
    fn read(&self) -> Result<Formula> {
        let text = match (&self.formula, &self.expr) {
            (Some(path), None) => std::fs::read_to_string(path)?,
            (None, Some(s)) => s.clone(),
            _ => return Err(Error::Config("provide exactly one of --formula/--expr".into())),
        };
        parse(text.trim())
    }
}

#[derive(Args)]
struct SemanticsFlags {
    /// Quantifier configuration file.
    #[arg(long)]
    quantifiers: Option<PathBuf>,
    /// Strict (singleton-witness) existential semantics instead of lax.
    #[arg(long)]
    strict: bool,
    /// Bounded (Engström second-clause) semantics; optional uniformity mode.
    #[arg(long, value_name = "uniform|raw", num_args = 0..=1,
          default_missing_value = "uniform")]
    bounded: Option<String>,
}

impl SemanticsFlags {
    fn registry(&self) -> Result<Registry> {
        let mut reg = Registry::new();
        if let Some(path) = &self.quantifiers {
            load_quantifiers(&std::fs::read_to_string(path)?, &mut reg)?;
        }
        Ok(reg)
    }

    fn config(&self) -> Result<EvalConfig> {
        let mut cfg = EvalConfig::default();
        if self.strict {
            cfg.mode = ExistsMode::Strict;
        }
        match self.bounded.as_deref() {
            None | Some("uniform") => cfg.bounded_uniformity = BoundedUniformity::Uniform,
            Some("raw") => cfg.bounded_uniformity = BoundedUniformity::Raw,
            Some(other) => {
                return Err(Error::Config(format!(
                    "--bounded takes `uniform` or `raw`, not `{other}`"
                )))
            }
        }
        Ok(cfg)
    }

    fn is_bounded(&self) -> bool {
        self.bounded.is_some()
    }
}

#[derive(Args)]
struct BoundsFlags {
    /// Largest domain size searched.
    #[arg(long)]
    size: Option<usize>,
    /// Fresh team variables added beyond the free variables.
    #[arg(long)]
    extra: Option<usize>,
    /// Corpus / sampling seed.
    #[arg(long)]
    seed: Option<u64>,
}

impl BoundsFlags {
    fn bounds(&self) -> SearchBounds {
        let mut b = SearchBounds::default();
        if let Some(n) = self.size {
            b.max_size = n;
        }
        if let Some(e) = self.extra {
            b.extra_vars = e;
        }
        if let Some(s) = self.seed {
            b.seed = s;
        }
        b
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Evaluate a formula on a structure and team.
    Eval {
        #[arg(long)]
        structure: PathBuf,
        #[arg(long)]
        team: PathBuf,
        #[command(flatten)]
        formula: FormulaInput,
        #[command(flatten)]
        sem: SemanticsFlags,
    },
    /// List the meaning set of a head-quantified formula.
    Meaning {
        #[arg(long)]
        structure: PathBuf,
        #[arg(long)]
        team: PathBuf,
        #[command(flatten)]
        formula: FormulaInput,
        #[command(flatten)]
        sem: SemanticsFlags,
    },
    /// Check Z-equivalence of two formulas by brute force.
    Equiv {
        psi: String,
        chi: String,
        /// Comma-separated modulus Z.
        #[arg(long, default_value = "")]
        modulus: String,
        #[command(flatten)]
        sem: SemanticsFlags,
        #[command(flatten)]
        bounds: BoundsFlags,
    },
    /// Apply a single rewrite rule at a position.
    Rewrite {
        #[command(flatten)]
        formula: FormulaInput,
        /// Rule name (weak_extract, and_extract, rename_a, rename_b,
        /// slash_elim_r, slash_elim_quantifier, verticalize,
        /// strong_extract, swap, drop_existential, drop_universal,
        /// regularize).
        #[arg(long)]
        rule: String,
        /// Dot-separated child path (e.g. `0.1`); omit for the root.
        #[arg(long, default_value = "")]
        at: String,
        /// Fresh variable for the renaming rules.
        #[arg(long)]
        to: Option<String>,
        /// Variable for verticalize.
        #[arg(long)]
        var: Option<String>,
        #[command(flatten)]
        sem: SemanticsFlags,
    },
    /// Rewrite to prenex normal form.
    Prenex {
        #[command(flatten)]
        formula: FormulaInput,
    },
    /// Primality reduction of a regular prenex sentence.
    Primality {
        #[command(flatten)]
        formula: FormulaInput,
        #[command(flatten)]
        sem: SemanticsFlags,
    },
    /// Run a theorem suite.
    Check {
        suite: String,
        #[command(flatten)]
        bounds: BoundsFlags,
    },
    /// Inspect a quantifier: localized table and property flags.
    Qinfo {
        name: String,
        #[arg(long, default_value_t = 2)]
        size: usize,
        #[command(flatten)]
        sem: SemanticsFlags,
    },
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn mask_to_names(m: &Structure, mask: u64) -> String {
    let names: Vec<&str> = mask_elems(mask).map(|e| m.elem_name(e)).collect();
    format!("{{{}}}", names.join(","))
}

fn print_counterexample(ce: &teamsem::verify::Counterexample) {
    if let Some(m) = &ce.structure {
        print!("{}", print_structure(m));
        if let Some(x) = &ce.team {
            print!("{}", print_team(x, m));
        }
    }
    for f in &ce.formulas {
        println!("formula: {f}");
    }
    println!("note: {}", ce.note);
}

fn verdict_exit(v: &Verdict, name: &str) -> ExitCode {
    if v.holds {
        println!("SUITE {name} HOLDS cases={}", v.cases);
        ExitCode::SUCCESS
    } else {
        println!("SUITE {name} FAILS");
        if let Some(ce) = &v.counterexample {
            print_counterexample(ce);
        }
        ExitCode::from(1)
    }
}

fn print_steps(steps: &[RewriteStep]) {
    for s in steps {
        let at = if s.path.is_empty() {
            "-".to_string()
        } else {
            s.path.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(".")
        };
        let z: Vec<&str> = s.z.iter().map(String::as_str).collect();
        println!("RULE {} AT {at} Z={{{}}}", s.rule, z.join(","));
    }
}

fn parse_modulus(s: &str) -> VarSet {
    s.split(',').map(str::trim).filter(|v| !v.is_empty()).map(str::to_string).collect()
}

fn parse_path(s: &str) -> Result<Vec<usize>> {
    s.split('.')
        .filter(|p| !p.is_empty())
        .map(|p| p.parse().map_err(|_| Error::Config(format!("bad path segment `{p}`"))))
        .collect()
}

fn run() -> Result<ExitCode> {
    let cli = Cli::parse();
    match cli.cmd {
        Cmd::Eval { structure, team, formula, sem } => {
            let m = parse_structure(&std::fs::read_to_string(structure)?)?;
            let x = parse_team(&std::fs::read_to_string(team)?, &m)?;
            let f = formula.read()?;
            let reg = sem.registry()?;
            let cfg = sem.config()?;
            let result = if sem.is_bounded() {
                eval_bounded(&m, &x, &f, &reg, &cfg)?
            } else {
                eval_team(&m, &x, &f, &reg, &cfg)?
            };
            println!("RESULT {result}");
            Ok(if result { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Cmd::Meaning { structure, team, formula, sem } => {
            let m = parse_structure(&std::fs::read_to_string(structure)?)?;
            let x = parse_team(&std::fs::read_to_string(team)?, &m)?;
            let f = formula.read()?;
            let Formula::Quant { var, slash, backslash, body, .. } = &f else {
                return Err(Error::Config(
                    "meaning requires a formula with a quantifier at the root".into(),
                ));
            };
            let v_eff: VarSet = if *backslash {
                x.var_set().difference(slash).cloned().collect()
            } else {
                slash.clone()
            };
            let reg = sem.registry()?;
            let cfg = sem.config()?;
            let fam = meaning_set(&m, &x, body, var, &v_eff, &reg, &cfg)?;
            for (i, func) in fam.iter().enumerate() {
                println!("F{i}:");
                for (row, &mask) in x.assignments().zip(func.values.iter()) {
                    let bind: Vec<String> = row
                        .bindings()
                        .iter()
                        .map(|(v, &e)| format!("{v}={}", m.elem_name(e)))
                        .collect();
                    let bind =
                        if bind.is_empty() { "-".to_string() } else { bind.join(" ") };
                    println!("  {bind} -> {}", mask_to_names(&m, mask));
                }
                if x.is_empty() {
                    println!("  (empty function)");
                }
            }
            let mut fv = body.free_variables();
            fv.remove(var);
            if fv.is_empty() {
                let initial = sentence_initial_meaning(&m, body, var, &reg, &cfg)?;
                let sets: Vec<String> =
                    initial.iter().map(|&s| mask_to_names(&m, s)).collect();
                println!("INITIAL {}", sets.join(" "));
            }
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Equiv { psi, chi, modulus, sem, bounds } => {
            let psi = parse(&psi)?;
            let chi = parse(&chi)?;
            let z = parse_modulus(&modulus);
            let reg = sem.registry()?;
            let cfg = sem.config()?;
            let v = teamsem::verify::z_equivalent(&psi, &chi, &z, &bounds.bounds(), &reg, &cfg)?;
            if v.holds {
                println!("RESULT true cases={}", v.cases);
                Ok(ExitCode::SUCCESS)
            } else {
                println!("RESULT false");
                if let Some(ce) = &v.counterexample {
                    print_counterexample(ce);
                }
                Ok(ExitCode::from(1))
            }
        }
        Cmd::Rewrite { formula, rule, at, to, var, sem } => {
            let f = formula.read()?;
            let path = parse_path(&at)?;
            let reg = sem.registry()?;
            let fresh = |to: &Option<String>| -> Result<String> {
                to.clone().ok_or_else(|| Error::Config("--to <fresh var> required".into()))
            };
            if rule == "regularize" {
                let (g, _, steps) = rewrite::strong_regularize(&f)?;
                print_steps(&steps);
                println!("{g}");
                return Ok(ExitCode::SUCCESS);
            }
            let step = match rule.as_str() {
                "weak_extract" => rewrite::weak_extract(&f, &path)?,
                "and_extract" => rewrite::and_extract(&f, &path)?,
                "rename_a" => {
                    rewrite::rename_bound(&f, &path, &fresh(&to)?, rewrite::RenameVariant::Plain)?
                }
                "rename_b" => rewrite::rename_bound(
                    &f,
                    &path,
                    &fresh(&to)?,
                    rewrite::RenameVariant::Shielded,
                )?,
                "slash_elim_r" => rewrite::slash_elim_r(&f, &path)?,
                "slash_elim_quantifier" => rewrite::slash_elim_quantifier(&f, &path)?,
                "verticalize" => {
                    let v = var
                        .ok_or_else(|| Error::Config("--var <variable> required".into()))?;
                    rewrite::verticalize(&f, &path, &v)?
                }
                "strong_extract" => rewrite::strong_extract(&f, &path)?,
                "swap" => rewrite::swap_quantifiers(&f, &path, sem.is_bounded(), &reg)?,
                "drop_existential" => rewrite::drop_existential_slashes(&f, &path)?,
                "drop_universal" => rewrite::drop_universal_slashes(&f, &path)?,
                other => return Err(Error::Config(format!("unknown rule `{other}`"))),
            };
            print_steps(std::slice::from_ref(&step));
            println!("{}", step.result);
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Prenex { formula } => {
            let f = formula.read()?;
            let (g, _, steps) = rewrite::prenexify(&f)?;
            print_steps(&steps);
            println!("{g}");
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Primality { formula, sem } => {
            let f = formula.read()?;
            let reg = sem.registry()?;
            match rewrite::primality_reduce(&f, &reg, 32)? {
                PrimalityOutcome::Reduced { result, steps } => {
                    println!("REDUCED");
                    print_steps(&steps);
                    println!("{result}");
                    Ok(ExitCode::SUCCESS)
                }
                PrimalityOutcome::Stuck { formula } => {
                    println!("STUCK");
                    println!("{formula}");
                    Ok(ExitCode::from(1))
                }
            }
        }
        Cmd::Check { suite, bounds } => {
            let v = run_suite(&suite, &bounds.bounds())?;
            Ok(verdict_exit(&v, &suite))
        }
        Cmd::Qinfo { name, size, sem } => {
            let reg = sem.registry()?;
            let m = Structure::with_size(size, Default::default(), Default::default())?;
            if let Ok(q) = reg.mostowski(&name) {
                let table: Vec<String> =
                    q.localize(&m)?.iter().map(|&s| mask_to_names(&m, s)).collect();
                println!("QUANTIFIER Q.{name} size={size}");
                println!("TABLE {}", table.join(" "));
                println!("monotone={}", q.is_monotone_on(&m)?);
                println!("union_closed={}", q.is_union_closed_on(&m)?);
                println!("emptyset_free={}", q.is_emptyset_free_on(&m)?);
                return Ok(ExitCode::SUCCESS);
            }
            let q = reg.team(&name)?;
            println!("QUANTIFIER TQ.{name} size={size}");
            let x = Team::from_rows(
                vec!["x".into()],
                (0..size).map(|e| vec![e]).collect(),
            )?;
            let flag = |label: &str, r: Result<bool>| match r {
                Ok(b) => println!("{label}={b}"),
                Err(Error::Guard(g)) => println!("{label}=skipped ({g})"),
                Err(e) => println!("{label}=error ({e})"),
            };
            flag("team_monotone", teamsem::quantifiers::team_monotone_on(&q, &m, &x));
            flag(
                "permutation_invariant",
                teamsem::quantifiers::permutation_invariant_on(&q, &m, &x),
            );
            flag(
                "cardinality_condition",
                teamsem::quantifiers::cardinality_condition_on(&q, &m, &x),
            );
            flag(
                "quality_condition",
                teamsem::quantifiers::quality_condition_on(&q, &m, &x),
            );
            Ok(ExitCode::SUCCESS)
        }
    }
}
