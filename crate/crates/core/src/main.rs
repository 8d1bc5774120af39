//! Command-line front end: `omq eval` answers an OMQ with one of the exact
//! or approximate algorithms, `omq oracle` runs the brute-force oracles.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use omq::kernel::{Database, Dialect, Omq, Ontology, Sym};
use omq::oracle::{
    chase_bounded, gen_instance, prefix_certain, ChaseRules, DbShape, InstanceSpec, PrefixMode, QueryShape,
};
use omq::querytools::all_tuples;
use omq::relax_tgd::{approx_tgd, approx_tgd_answers, TgdParams};
use omq::syntax::{parse_database, parse_ontology, parse_query, parse_tgds, print_database, print_ontology, print_query};
use omq::typesat::certain_beliq_limited;
use omq::unraveling::{lk_unravel_prefix, tree_unravel_prefix};
use omq::{relax_btw, relax_eliu, relax_tree, strengthen, Ctx, Error, Limits, Result};

#[derive(Parser)]
#[command(name = "omq", version, about = "Approximate answers to ontology-mediated queries")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Answer an OMQ over a database.
    Eval(EvalArgs),
    /// Brute-force oracles for manual cross-checks.
    #[command(subcommand)]
    Oracle(OracleCommand),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    ExactBeliq,
    RelaxEliu,
    RelaxTree,
    RelaxBtw,
    RelaxTgd,
    StrengthenOnt,
    StrengthenDb,
    /// Print a finite prefix of the unraveling at the answer constants.
    Unravel,
    /// Certain answers over a finite unraveling prefix (sound, incomplete).
    Oracle,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long, value_enum)]
    mode: Mode,
    /// Ontology file; omitted means the empty ontology.
    #[arg(short = 'O', long = "ontology")]
    ontology: Option<PathBuf>,
    #[arg(short = 'D', long = "database")]
    database: PathBuf,
    #[arg(short = 'Q', long = "query")]
    query: Option<PathBuf>,
    /// Check a single tuple, comma separated, instead of listing all answers.
    #[arg(long, value_delimiter = ',', num_args = 0..)]
    answer: Option<Vec<String>>,
    #[arg(long)]
    l: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    kp: Option<usize>,
    /// Prefix depth for the unravel and oracle modes.
    #[arg(long, default_value_t = 2)]
    depth: usize,
    #[arg(long)]
    json: bool,
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long)]
    dump_horn: Option<PathBuf>,
    #[arg(long)]
    max_adom: Option<usize>,
    #[arg(long)]
    max_closure: Option<usize>,
}

#[derive(Subcommand)]
enum OracleCommand {
    /// Fair bounded chase of a database with TGDs or an ELI⊥ ontology.
    Chase {
        #[arg(short = 'O', long = "ontology", conflicts_with = "tgds")]
        ontology: Option<PathBuf>,
        #[arg(long)]
        tgds: Option<PathBuf>,
        #[arg(short = 'D', long = "database")]
        database: PathBuf,
        #[arg(long, default_value_t = 3)]
        depth: usize,
    },
    /// Write a random instance; the seed defaults to OMQ_SEED, then 0.
    Gen {
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum, default_value_t = ShapeArg::Beliq)]
        shape: ShapeArg,
        #[arg(long, value_enum, default_value_t = DialectArg::Alci)]
        dialect: DialectArg,
        #[arg(long, default_value_t = 4)]
        max_cis: usize,
        #[arg(long, default_value_t = 6)]
        max_constants: usize,
        /// Directory receiving instance.onto, instance.db and instance.q.
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ShapeArg {
    Beliq,
    Cq,
    Ucq,
}

#[derive(Clone, Copy, ValueEnum)]
enum DialectArg {
    Eli,
    EliBot,
    EliuBot,
    EliuUnionBot,
    Alc,
    Alci,
}

/// A per-tuple membership test.
type TupleTest<'a> = Box<dyn Fn(&[Sym]) -> Result<bool> + 'a>;

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Invalid(format!("{}: {e}", path.display())))
}

/// Parses a file, prefixing parse diagnostics with its name.
fn load<T>(path: &Path, parse: fn(&str) -> Result<T>) -> Result<T> {
    parse(&read(path)?).map_err(|e| match e {
        Error::Parse { span, message } => Error::Invalid(format!("{}:{span}: {message}", path.display())),
        other => other,
    })
}

struct Outcome {
    /// Set when a single tuple or a Boolean query was asked.
    verdict: Option<bool>,
    answers: BTreeSet<Vec<Sym>>,
    /// Raw text output of the unravel mode.
    text: Option<String>,
}

fn check_params(args: &EvalArgs) -> Result<()> {
    let given = (args.l.is_some(), args.k.is_some(), args.kp.is_some());
    let ok = match args.mode {
        Mode::RelaxBtw => given == (true, true, false),
        Mode::RelaxTgd => given == (true, true, true),
        Mode::Unravel | Mode::Oracle => given.0 == given.1 && !given.2,
        _ => given == (false, false, false),
    };
    if !ok {
        return Err(Error::Invalid(
            "relax-btw takes --l and --k, relax-tgd takes --l, --k and --kp, unravel and oracle take optional --l and --k, other modes take none".into(),
        ));
    }
    Ok(())
}

/// Evaluates every tuple with a per-tuple test.
fn each_tuple(d: &Database, arity: usize, test: &dyn Fn(&[Sym]) -> Result<bool>) -> Result<BTreeSet<Vec<Sym>>> {
    let mut out = BTreeSet::new();
    for t in all_tuples(&d.adom(), arity) {
        if test(&t)? {
            out.insert(t);
        }
    }
    Ok(out)
}

fn evaluate(ctx: &Ctx, args: &EvalArgs) -> Result<Outcome> {
    check_params(args)?;
    let ontology = match &args.ontology {
        Some(p) => load(p, parse_ontology)?,
        None => Ontology::default(),
    };
    let d = load(&args.database, parse_database)?;
    let tuple: Option<Vec<Sym>> = args
        .answer
        .as_ref()
        .map(|names| names.iter().filter(|n| !n.is_empty()).map(|n| Sym::new(n.trim())).collect());
    if let Some(t) = &tuple {
        let adom = d.adom();
        if let Some(c) = t.iter().find(|c| !adom.contains(*c)) {
            return Err(Error::Invalid(format!("answer constant {c} is not in the database")));
        }
    }
    if args.mode == Mode::Unravel {
        let s: BTreeSet<Sym> = tuple.unwrap_or_default().into_iter().collect();
        let prefix = match (args.l, args.k) {
            (Some(l), Some(k)) => lk_unravel_prefix(&d, &s, l, k, args.depth)?,
            _ => tree_unravel_prefix(&d, &s, args.depth)?,
        };
        return Ok(Outcome { verdict: None, answers: BTreeSet::new(), text: Some(print_database(&prefix.db)) });
    }
    let query_path = args.query.as_ref().ok_or_else(|| Error::Invalid("-Q is required for this mode".into()))?;
    let omq = &Omq::new(ontology, load(query_path, parse_query)?);
    let d = &d;
    let o = &omq.ontology;
    let arity = omq.arity();
    if let Some(t) = &tuple {
        if t.len() != arity {
            return Err(Error::Invalid(format!("--answer has {} constants, query arity is {arity}", t.len())));
        }
    }
    let lk = || (args.l.unwrap_or(0), args.k.unwrap_or(0));
    let beliq = || {
        omq.query
            .as_beliq()
            .ok_or_else(|| Error::Unsupported(format!("mode needs a single bELIQ, got {}", omq.query)))
    };
    let single: TupleTest<'_> = match args.mode {
        Mode::ExactBeliq => {
            let q = beliq()?;
            Box::new(move |t| certain_beliq_limited(d, o, q, t, &ctx.limits))
        }
        Mode::RelaxEliu => Box::new(|t| relax_eliu::approx_eliu(ctx, omq, d, t)),
        Mode::RelaxTree => Box::new(|t| relax_tree::approx_tree(ctx, omq, d, t)),
        Mode::RelaxBtw => Box::new(|t| relax_btw::eliminate_ucq(ctx, omq, d, t, lk().0, lk().1)),
        Mode::RelaxTgd => {
            let params = TgdParams { l: lk().0, k: lk().1, kp: args.kp.unwrap_or(0) };
            params.validate()?;
            Box::new(move |t| approx_tgd(ctx, omq, d, t, params))
        }
        Mode::StrengthenOnt => Box::new(|t| strengthen::approx_up_ont(ctx, omq, d, t)),
        Mode::StrengthenDb => Box::new(|t| strengthen::approx_up_db(ctx, omq, d, t)),
        Mode::Oracle => {
            let q = beliq()?;
            let depth = args.depth;
            let mode = match (args.l, args.k) {
                (Some(l), Some(k)) => PrefixMode::Lk { l, k },
                _ => PrefixMode::Tree,
            };
            Box::new(move |t| {
                let s = t.iter().cloned().collect();
                prefix_certain(ctx, o, d, &s, mode, depth, q, t)
            })
        }
        Mode::Unravel => unreachable!("handled above"),
    };
    if let Some(t) = &tuple {
        return Ok(Outcome { verdict: Some(single(t)?), answers: BTreeSet::new(), text: None });
    }
    // Whole-answer algorithms share work across tuples.
    let answers = match args.mode {
        Mode::RelaxEliu => relax_eliu::approx_eliu_answers(ctx, omq, d)?,
        Mode::RelaxTree => relax_tree::approx_tree_answers(ctx, omq, d)?,
        Mode::RelaxTgd => {
            let params = TgdParams { l: lk().0, k: lk().1, kp: args.kp.unwrap_or(0) };
            approx_tgd_answers(ctx, omq, d, params)?
        }
        _ => each_tuple(d, arity, &*single)?,
    };
    let verdict = (arity == 0).then(|| answers.contains(&Vec::new()));
    Ok(Outcome { verdict, answers, text: None })
}

fn mode_name(mode: Mode) -> String {
    mode.to_possible_value().expect("named mode").get_name().to_string()
}

fn run_eval(args: EvalArgs) -> Result<()> {
    let mut limits = Limits::default();
    if let Some(n) = args.max_adom {
        limits.max_adom = n;
    }
    if let Some(n) = args.max_closure {
        limits.max_closure = n;
    }
    let mut ctx = Ctx::new(limits);
    if let Some(path) = &args.dump_horn {
        ctx = ctx.with_horn_dump(path)?;
    }
    if let Some(n) = args.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
            .map_err(|e| Error::Invalid(format!("--jobs: {e}")))?;
    }
    let start = Instant::now();
    let out = evaluate(&ctx, &args)?;
    let elapsed = start.elapsed().as_millis() as u64;
    if args.json {
        let answers: Vec<Vec<&str>> = out.answers.iter().map(|t| t.iter().map(Sym::as_str).collect()).collect();
        let mut value = json!({
            "v": 1,
            "mode": mode_name(args.mode),
            "answers": answers,
            "stats": {
                "time_ms": elapsed,
                "horn_vars": ctx.stats.horn_vars(),
                "assignments": ctx.stats.assignments(),
            },
        });
        if let Some(v) = out.verdict {
            value["result"] = json!(v);
        }
        if let Some(text) = &out.text {
            value["database"] = json!(text);
        }
        println!("{value}");
    } else if let Some(text) = out.text {
        print!("{text}");
    } else if let Some(v) = out.verdict {
        println!("{v}");
    } else {
        for t in &out.answers {
            let names: Vec<&str> = t.iter().map(Sym::as_str).collect();
            println!("{}", names.join(","));
        }
    }
    Ok(())
}

fn run_oracle(cmd: OracleCommand) -> Result<()> {
    let ctx = Ctx::default();
    match cmd {
        OracleCommand::Chase { ontology, tgds, database, depth } => {
            let d = load(&database, parse_database)?;
            let trace = match (ontology, tgds) {
                (_, Some(p)) => chase_bounded(&ctx, ChaseRules::Tgds(&load(&p, parse_tgds)?), &d, depth)?,
                (Some(p), None) => chase_bounded(&ctx, ChaseRules::Ontology(&load(&p, parse_ontology)?), &d, depth)?,
                (None, None) => chase_bounded(&ctx, ChaseRules::Tgds(&[]), &d, depth)?,
            };
            if trace.inconsistent {
                println!("# inconsistent");
            }
            print!("{}", print_database(&trace.db));
        }
        OracleCommand::Gen { seed, shape, dialect, max_cis, max_constants, out } => {
            let seed = match seed {
                Some(s) => s,
                None => match std::env::var("OMQ_SEED") {
                    Ok(v) => v.parse().map_err(|_| Error::Invalid(format!("OMQ_SEED={v} is not a number")))?,
                    Err(_) => 0,
                },
            };
            let spec = InstanceSpec {
                seed,
                dialect: match dialect {
                    DialectArg::Eli => Dialect::Eli,
                    DialectArg::EliBot => Dialect::EliBot,
                    DialectArg::EliuBot => Dialect::EliuBot,
                    DialectArg::EliuUnionBot => Dialect::EliuUnionBot,
                    DialectArg::Alc => Dialect::Alc,
                    DialectArg::Alci => Dialect::Alci,
                },
                max_cis,
                max_constants,
                db_shape: DbShape::Any,
                shape: match shape {
                    ShapeArg::Beliq => QueryShape::Beliq,
                    ShapeArg::Cq => QueryShape::Cq,
                    ShapeArg::Ucq => QueryShape::Ucq,
                },
                ..InstanceSpec::default()
            };
            let (q, d, a) = gen_instance(&spec);
            fs::create_dir_all(&out)?;
            fs::write(out.join("instance.onto"), print_ontology(&q.ontology))?;
            fs::write(out.join("instance.db"), print_database(&d))?;
            fs::write(out.join("instance.q"), print_query(&q.query))?;
            let names: Vec<&str> = a.iter().map(Sym::as_str).collect();
            println!("{}", names.join(","));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Eval(args) => run_eval(args),
        Command::Oracle(cmd) => run_oracle(cmd),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("omq: {e}");
            ExitCode::from(if e.is_guard() { 1 } else { 2 })
        }
    }
}
