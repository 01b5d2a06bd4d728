//! `chop`: check, run, desugar, translate and trace `.chop` programs.
//!
//! Exit codes: 0 success, 1 type or evaluation error, 2 syntax error,
//! 3 fuel exhausted.

use std::io::{self, Read, Write};
use std::process::ExitCode;

use chop::check::{typecheck_decl, CheckOptions, TypeError};
use chop::eval::{eliminate_chops, path_string, run, RunOptions, Status, Trace, DEFAULT_FUEL};
use chop::syntax::{desugar, parse_with, print_decl, print_program, Decl, ParseOptions, Pos, Program};
use chop::translate::{correspondence_check, translate_judgement, translate_proc, Outcome};
use chop::ProcEnv;
use clap::{Args, Parser, Subcommand};
use serde_json::json;

#[derive(Parser)]
#[command(name = "chop", version, about = "Toolchain for a higher-order session-typed process calculus")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Type-check every declaration.
    Check {
        #[command(flatten)]
        common: Common,
        /// Accept only the first-order fragment, reserved names included.
        #[arg(long)]
        cp: bool,
    },
    /// Evaluate the main declaration and print its trace.
    Run {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        eval: EvalFlags,
    },
    /// Print the program with all syntactic sugar removed.
    Desugar {
        #[command(flatten)]
        common: Common,
    },
    /// Print the first-order translation of every declaration.
    Translate {
        #[command(flatten)]
        common: Common,
        /// Instead of the translation, report for each step of the main
        /// declaration whether a search on the translation reaches it.
        #[arg(long)]
        correspondence: bool,
        #[arg(long, default_value_t = 32)]
        max_depth: usize,
    },
    /// Print every declaration with its explicit substitutions eliminated.
    EliminateChops {
        #[command(flatten)]
        common: Common,
    },
    /// Evaluate the main declaration and print one record per step.
    Trace {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        eval: EvalFlags,
    },
}

#[derive(Args)]
struct Common {
    /// Input file, or `-` for standard input.
    input: String,
    /// Restrict links to atomic types.
    #[arg(long)]
    atomic_axioms: bool,
    /// Line-delimited JSON records on the output and error streams.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct EvalFlags {
    #[arg(long, default_value_t = DEFAULT_FUEL)]
    fuel: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also reduce under prefixes and inside abstraction bodies.
    #[arg(long)]
    deep: bool,
}

/// A failure carrying its exit code.
struct Failure {
    code: u8,
    kind: String,
    pos: Option<Pos>,
    message: String,
}

impl Failure {
    fn new(code: u8, kind: impl Into<String>, pos: Option<Pos>, message: impl Into<String>) -> Failure {
        Failure { code, kind: kind.into(), pos, message: message.into() }
    }

    fn io(e: io::Error) -> Failure {
        Failure::new(1, "IoError", None, e.to_string())
    }

    fn ty(e: TypeError) -> Failure {
        Failure::new(1, e.kind.to_string(), e.pos, e.message)
    }
}

struct Ctx {
    file: String,
    json: bool,
    check: CheckOptions,
}

impl Ctx {
    fn report(&self, f: &Failure) {
        let (line, col) = f.pos.map_or((0, 0), |p| (p.line, p.col));
        if self.json {
            let rec = json!({"kind": f.kind, "line": line, "col": col, "message": f.message});
            eprintln!("{rec}");
        } else if f.pos.is_some() {
            eprintln!("{}:{line}:{col}: {}: {}", self.file, f.kind, f.message);
        } else {
            eprintln!("{}: {}: {}", self.file, f.kind, f.message);
        }
    }

    fn load(&self, allow_reserved: bool) -> Result<Program, Failure> {
        let src = if self.file == "-" {
            let mut s = String::new();
            io::stdin().read_to_string(&mut s).map_err(Failure::io)?;
            s
        } else {
            std::fs::read_to_string(&self.file).map_err(Failure::io)?
        };
        let prog = parse_with(&src, ParseOptions { allow_reserved })
            .map_err(|e| Failure::new(2, e.kind(), Some(e.pos()), e.to_string()))?;
        desugar(&prog).map_err(|e| Failure::new(1, "DesugarError", Some(e.pos()), e.to_string()))
    }

    fn check_all(&self, prog: &Program) -> Result<(), Failure> {
        for d in &prog.decls {
            typecheck_decl(d, self.check).map_err(Failure::ty)?;
        }
        Ok(())
    }

    fn main_decl<'a>(&self, prog: &'a Program) -> Result<&'a Decl, Failure> {
        prog.main().ok_or_else(|| Failure::new(1, "NoDeclaration", None, "the program declares no process"))
    }

    fn trace(&self, prog: &Program, flags: &EvalFlags) -> Result<Trace, Failure> {
        self.check_all(prog)?;
        let d = self.main_decl(prog)?;
        let opts = RunOptions { fuel: flags.fuel, seed: flags.seed, deep: flags.deep };
        run(&d.body, &opts).map_err(|e| Failure::new(1, "EvalError", Some(d.pos), e.to_string()))
    }
}

fn status_code(t: &Trace) -> Result<u8, Failure> {
    match t.status {
        Status::NormalForm => Ok(0),
        Status::FuelExhausted => Ok(3),
        Status::Stuck => Err(Failure::new(1, "Stuck", None, "no step applies but a cut remains")),
    }
}

fn execute(cli: Cli, out: &mut impl Write) -> Result<u8, Failure> {
    let common = match &cli.command {
        Command::Check { common, .. }
        | Command::Run { common, .. }
        | Command::Desugar { common }
        | Command::Translate { common, .. }
        | Command::EliminateChops { common }
        | Command::Trace { common, .. } => common,
    };
    let cp = matches!(cli.command, Command::Check { cp: true, .. });
    let ctx = Ctx {
        file: common.input.clone(),
        json: common.json,
        check: CheckOptions { atomic_axioms: common.atomic_axioms, cp },
    };
    let prog = ctx.load(cp)?;
    let w = |out: &mut dyn Write, s: &str| match out.write_all(s.as_bytes()) {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(Failure::io(e)),
        _ => Ok(()),
    };
    match &cli.command {
        Command::Check { .. } => {
            ctx.check_all(&prog)?;
            if ctx.json {
                for d in &prog.decls {
                    w(out, &format!("{}\n", json!({"decl": d.name, "status": "ok"})))?;
                }
            }
            Ok(0)
        }
        Command::Desugar { .. } => {
            w(out, &print_program(&prog))?;
            Ok(0)
        }
        Command::EliminateChops { .. } => {
            ctx.check_all(&prog)?;
            let decls = prog.decls.iter().map(|d| Decl { body: eliminate_chops(&d.body), ..d.clone() }).collect();
            w(out, &print_program(&Program { decls, ..prog.clone() }))?;
            Ok(0)
        }
        Command::Translate { correspondence: false, .. } => {
            let mut text = String::new();
            for d in &prog.decls {
                let der = typecheck_decl(d, ctx.check).map_err(Failure::ty)?;
                let body =
                    translate_proc(&der).map_err(|e| Failure::new(1, "TranslateError", Some(d.pos), e.to_string()))?;
                let gamma = translate_judgement(&d.theta, &d.gamma);
                let t = Decl { name: d.name.clone(), theta: ProcEnv::new(), gamma, body, pos: d.pos };
                if !text.is_empty() {
                    text.push('\n');
                }
                text.push_str(&print_decl(&t));
            }
            w(out, &text)?;
            Ok(0)
        }
        Command::Translate { correspondence: true, max_depth, .. } => {
            ctx.check_all(&prog)?;
            let d = ctx.main_decl(&prog)?;
            let report = correspondence_check(&d.body, &d.gamma, *max_depth)
                .map_err(|e| Failure::new(1, "TranslateError", Some(d.pos), e.to_string()))?;
            for (i, e) in report.entries.iter().enumerate() {
                let (found, len) = match e.outcome {
                    Outcome::Found(n) => (true, Some(n)),
                    Outcome::SearchExhausted => (false, None),
                };
                let line = if ctx.json {
                    json!({"step": i + 1, "rule": e.tag.rule, "path": path_string(&e.tag.path), "found": found, "length": len})
                        .to_string()
                } else {
                    let res = len.map_or("SearchExhausted".to_string(), |n| format!("found in {n}"));
                    format!("{}\t{}\t{}\t{res}", i + 1, e.tag.rule, path_string(&e.tag.path))
                };
                w(out, &format!("{line}\n"))?;
            }
            Ok(if report.exhausted() == 0 { 0 } else { 1 })
        }
        Command::Run { eval, .. } => {
            let t = ctx.trace(&prog, eval)?;
            let mut text = format!("{}\n", t.initial);
            for (tag, p) in &t.steps {
                text.push_str(&format!("-> [{} @ {}] {p}\n", tag.rule, path_string(&tag.path)));
            }
            text.push_str(&format!("{:?} after {} steps\n", t.status, t.steps.len()));
            w(out, &text)?;
            status_code(&t)
        }
        Command::Trace { eval, .. } => {
            let t = ctx.trace(&prog, eval)?;
            let mut text = String::new();
            for (i, (tag, p)) in t.steps.iter().enumerate() {
                let family = format!("{:?}", tag.family);
                let path = path_string(&tag.path);
                if ctx.json {
                    let rec =
                        json!({"step": i + 1, "family": family, "rule": tag.rule, "path": path, "term": p.to_string()});
                    text.push_str(&format!("{rec}\n"));
                } else {
                    text.push_str(&format!("{}\t{family}\t{}\t{path}\t{p}\n", i + 1, tag.rule));
                }
            }
            w(out, &text)?;
            status_code(&t)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (file, json) = match &cli.command {
        Command::Check { common, .. }
        | Command::Run { common, .. }
        | Command::Desugar { common }
        | Command::Translate { common, .. }
        | Command::EliminateChops { common }
        | Command::Trace { common, .. } => (common.input.clone(), common.json),
    };
    let mut stdout = io::stdout().lock();
    match execute(cli, &mut stdout) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            Ctx { file, json, check: CheckOptions::default() }.report(&f);
            ExitCode::from(f.code)
        }
    }
}
