use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use qcflp::oracle::{default_universe, mutants, mutation_check, run_oracle, Comparison, Fixpoints, OracleConfig, Outcome};
use qcflp::runtime::{solve_qualified, Answer, SolveLimits};
use qcflp::semantics::{check_certificate, holds, write_certificate, HoldsVerdict, SearchLimits, Verdict};
use qcflp::solver::Interval;
use qcflp::syntax::{parse_expr, parse_goal, parse_program, parse_statement, print_program, ParseOptions};
use qcflp::transform::{seed_from_env, simplify_goal, simplify_program, transform_goal, transform_program};
use qcflp::{Expr, Program, QcflpError, QualDomain};
use serde_json::{json, Map, Value};

#[derive(Parser)]
#[command(name = "qcflp", version, about = "Qualified constraint functional logic programming toolchain")]
struct Cli {
    /// Log every narrowing step to stderr.
    #[arg(long, global = true)]
    trace: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Qualification domain: u, uxu, ...
    #[arg(long, default_value = "u")]
    qdom: String,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate a program.
    Check {
        file: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Translate a program into a qualification-free one.
    Transform {
        file: PathBuf,
        #[command(flatten)]
        common: Common,
        /// Output path, `-` for stdout; defaults to the input with extension `.cflp`.
        #[arg(short = 'o', long = "output")]
        output: Option<PathBuf>,
        /// Merge qualification variables that only pass a bound to one call.
        #[arg(long)]
        simplify: bool,
        /// Also write a `.map` table relating source and translated rules.
        #[arg(long)]
        emit_map: bool,
        /// A goal to translate along with the program.
        #[arg(long)]
        goal: Option<String>,
    },
    /// Solve a qualified goal.
    Solve {
        file: PathBuf,
        goal: String,
        #[command(flatten)]
        common: Common,
        /// Deepen the rule nesting bound up to N.
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        depth: Option<u64>,
        /// Stop after N answers.
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        answers: Option<u64>,
        #[arg(long)]
        json: bool,
        #[arg(long)]
        simplify: bool,
    },
    /// Compare solver answers with the bounded fixpoint semantics.
    Oracle {
        file: PathBuf,
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 6, value_parser = clap::value_parser!(u64).range(1..))]
        depth: u64,
        /// Comma-separated ground terms; defaults to terms built from the program.
        #[arg(long)]
        universe: Option<String>,
        #[arg(long, default_value_t = 10)]
        max_rules: usize,
        #[arg(long, default_value_t = 20)]
        max_universe: usize,
        /// Step budget for each fixpoint computation and each goal.
        #[arg(long, default_value_t = 200_000)]
        steps: usize,
        /// Compare against the translation without its N-th qualification condition.
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        mutate: Option<u64>,
        /// Check every single-condition mutant of the translation.
        #[arg(long)]
        mutations: bool,
        #[arg(long)]
        json: bool,
    },
    /// Search for a proof of a qualified statement, or check a certificate.
    Prove {
        file: PathBuf,
        /// The statement, e.g. `(f(1) -> true) # 0.8`.
        statement: Option<String>,
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 24, value_parser = clap::value_parser!(u64).range(1..))]
        depth: u64,
        /// Certificate file to re-validate.
        #[arg(long, conflicts_with = "statement")]
        check: Option<PathBuf>,
        #[arg(short = 'o', long = "output")]
        output: Option<PathBuf>,
    },
}

/// Input that cannot be processed at all: exit status 2.
struct Fatal(anyhow::Error);

impl<E: Into<anyhow::Error>> From<E> for Fatal {
    fn from(e: E) -> Self {
        Fatal(e.into())
    }
}

type Run = Result<u8, Fatal>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.trace { "trace" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
    let code = match run(cli.command) {
        Ok(c) => c,
        Err(Fatal(e)) => {
            eprintln!("error: {e:#}");
            2
        }
    };
    ExitCode::from(code)
}

fn run(cmd: Command) -> Run {
    match cmd {
        Command::Check { file, common } => check(&file, &common),
        Command::Transform {
            file,
            common,
            output,
            simplify,
            emit_map,
            goal,
        } => transform(&file, &common, output, simplify, emit_map, goal.as_deref()),
        Command::Solve {
            file,
            goal,
            common,
            depth,
            answers,
            json,
            simplify,
        } => solve(&file, &goal, &common, depth, answers, json, simplify),
        Command::Oracle {
            file,
            common,
            depth,
            universe,
            max_rules,
            max_universe,
            steps,
            mutate,
            mutations,
            json,
        } => {
            let opts = OracleOpts {
                depth: depth as usize,
                universe,
                max_rules,
                max_universe,
                steps,
                mutate,
                mutations,
                json,
            };
            oracle(&file, &common, &opts)
        }
        Command::Prove {
            file,
            statement,
            common,
            depth,
            check,
            output,
        } => prove(&file, statement.as_deref(), &common, depth as usize, check, output),
    }
}

fn domain(common: &Common) -> Result<QualDomain, Fatal> {
    Ok(common.qdom.parse::<QualDomain>()?)
}

fn read(path: &Path) -> Result<String, Fatal> {
    Ok(fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?)
}

fn report_diagnostics(path: &Path, e: &QcflpError) {
    if e.diagnostics().is_empty() {
        eprintln!("{}: {e}", path.display());
    }
    for d in e.diagnostics() {
        eprintln!("{}:{d}", path.display());
    }
}

/// Loads a program; diagnostics are fatal for commands other than `check`.
fn load(path: &Path, dom: &QualDomain) -> Result<Program, Fatal> {
    let src = read(path)?;
    parse_program(&src, &ParseOptions::new(dom.clone())).map_err(|e| {
        report_diagnostics(path, &e);
        Fatal(anyhow!("{} does not check", path.display()))
    })
}

fn check(file: &Path, common: &Common) -> Run {
    let dom = domain(common)?;
    let src = read(file)?;
    match parse_program(&src, &ParseOptions::new(dom)) {
        Ok(p) => {
            println!("{}: ok, {} rules", file.display(), p.rules.len());
            Ok(0)
        }
        Err(e) => {
            report_diagnostics(file, &e);
            Ok(1)
        }
    }
}

fn transform(file: &Path, common: &Common, output: Option<PathBuf>, simplify: bool, emit_map: bool, goal: Option<&str>) -> Run {
    let dom = domain(common)?;
    let src = read(file)?;
    let program = match parse_program(&src, &ParseOptions::new(dom.clone())) {
        Ok(p) => p,
        Err(e) => {
            report_diagnostics(file, &e);
            return Ok(1);
        }
    };
    let (t, tr) = match transform_program(&program, &dom, seed_from_env()) {
        Ok(x) => x,
        Err(e) => {
            report_diagnostics(file, &e);
            return Ok(1);
        }
    };
    let translated = if simplify { simplify_program(&t.program, &dom) } else { t.program.clone() };
    let mut text = print_program(&translated);
    if let Some(g) = goal {
        let g = parse_goal(g, Some(&program), &ParseOptions::new(dom.clone()))?;
        let mut cg = transform_goal(&g, &program, &dom, Some(&tr), seed_from_env());
        if simplify {
            cg = simplify_goal(&cg, &dom);
        }
        text.push_str(&format!("\n-- goal: {cg}\n"));
    }
    let out = output.unwrap_or_else(|| file.with_extension("cflp"));
    if out.as_os_str() == "-" {
        print!("{text}");
    } else {
        fs::write(&out, &text).with_context(|| format!("cannot write {}", out.display()))?;
    }
    if emit_map {
        let map_path = if out.as_os_str() == "-" {
            file.with_extension("map")
        } else {
            PathBuf::from(format!("{}.map", out.display()))
        };
        let mut table = String::new();
        for m in &t.map {
            let introduced: Vec<&str> = m.introduced.iter().map(|v| v.as_str()).collect();
            table.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\n",
                m.source + 1,
                m.target + 1,
                program.rules[m.source].head,
                m.head_var,
                introduced.join(",")
            ));
        }
        fs::write(&map_path, table).with_context(|| format!("cannot write {}", map_path.display()))?;
    }
    Ok(0)
}

fn interval_json(i: &Interval) -> Value {
    json!({ "lo": i.lo, "hi": i.hi, "lo_open": i.lo_open, "hi_open": i.hi_open })
}

fn answer_json(a: &Answer) -> Value {
    let subst: Map<String, Value> = a.subst.iter().map(|(v, e)| (v.to_string(), Value::String(e.to_string()))).collect();
    let qual: Map<String, Value> = a
        .qual
        .iter()
        .map(|(v, is)| {
            let val = match is.as_slice() {
                [i] => interval_json(i),
                is => Value::Array(is.iter().map(interval_json).collect()),
            };
            (v.to_string(), val)
        })
        .collect();
    json!({
        "subst": subst,
        "qual": qual,
        "residual": a.residual.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
        "flags": { "incomplete": a.flags.incomplete, "conditional": a.flags.conditional },
    })
}

#[allow(clippy::too_many_arguments)]
fn solve(file: &Path, goal: &str, common: &Common, depth: Option<u64>, answers: Option<u64>, json: bool, simplify: bool) -> Run {
    let dom = domain(common)?;
    let program = load(file, &dom)?;
    let goal = parse_goal(goal, Some(&program), &ParseOptions::new(dom.clone()))?;
    let mut limits = SolveLimits {
        answers: answers.map(|n| n as usize),
        ..SolveLimits::default()
    };
    if let Some(d) = depth {
        limits.depth = d as usize;
        limits.deepen = true;
    }
    let sols = solve_qualified(&program, &dom, &goal, &limits, simplify)?;
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    for a in &sols.answers {
        if json {
            writeln!(out, "{}", answer_json(a))?;
        } else {
            writeln!(out, "{a}")?;
        }
    }
    if sols.answers.is_empty() && !json {
        writeln!(out, "no answers")?;
    }
    if let Some(note) = &sols.note {
        eprintln!("note: {note}");
    }
    Ok(match sols.answers.iter().any(|a| !a.flags.any()) {
        true => 0,
        false if sols.answers.is_empty() => 1,
        false => 3,
    })
}

struct OracleOpts {
    depth: usize,
    universe: Option<String>,
    max_rules: usize,
    max_universe: usize,
    steps: usize,
    mutate: Option<u64>,
    mutations: bool,
    json: bool,
}

fn parse_universe(text: &str) -> Result<Vec<Expr>, Fatal> {
    let list = parse_expr(&format!("[{text}]"))?;
    let mut out = Vec::new();
    let mut cur = &list;
    while let Expr::App(c, args) = cur {
        if c.as_str() != ":" {
            break;
        }
        out.push(args[0].clone());
        cur = &args[1];
    }
    Ok(out)
}

fn comparison_json(c: &Comparison) -> Value {
    let results = |rs: &qcflp::oracle::Results| -> Vec<Value> {
        rs.iter()
            .map(|(r, qs)| json!({ "result": r.to_string(), "qual": qs.iter().map(|q| q.to_string()).collect::<Vec<_>>() }))
            .collect()
    };
    let (outcome, reason) = match &c.outcome {
        Outcome::Match => ("match", None),
        Outcome::Mismatch(r) => ("mismatch", Some(r.clone())),
        Outcome::Inconclusive(r) => ("inconclusive", Some(r.clone())),
    };
    json!({
        "call": c.call.to_string(),
        "probe": c.probe.as_ref().map(|p| p.to_string()),
        "expected": results(&c.expected),
        "actual": results(&c.actual),
        "outcome": outcome,
        "reason": reason,
    })
}

fn oracle(file: &Path, common: &Common, opts: &OracleOpts) -> Run {
    let dom = domain(common)?;
    let program = load(file, &dom)?;
    let universe = match &opts.universe {
        Some(u) => parse_universe(u)?,
        None => default_universe(&program, opts.max_universe),
    };
    let cfg = OracleConfig {
        max_rules: opts.max_rules,
        max_universe: opts.max_universe,
        steps: opts.steps,
        ..OracleConfig::new(opts.depth, universe)
    };
    if opts.mutations {
        let m = mutation_check(&program, &dom, &cfg)?;
        for d in &m.detected {
            println!("detected\t{d}");
        }
        for d in &m.implied {
            println!("implied\t{d}");
        }
        for d in &m.survived {
            println!("survived\t{d}");
        }
        println!(
            "{} mutants: {} detected, {} implied by the remaining conditions, {} survived",
            m.total(),
            m.detected.len(),
            m.implied.len(),
            m.survived.len()
        );
        return Ok(u8::from(m.detected.len() != m.total()));
    }
    let report = match opts.mutate {
        None => run_oracle(&program, &dom, &cfg)?,
        Some(n) => {
            let (t, _) = transform_program(&program, &dom, 0)?;
            let all = mutants(&t.program);
            let m = all
                .get(n as usize - 1)
                .ok_or_else(|| anyhow!("the translation has only {} qualification conditions", all.len()))?;
            eprintln!("mutant: {m}");
            let lfp = Fixpoints::new(&program, &dom, &cfg);
            qcflp::oracle::compare(&program, &m.program, &dom, &cfg, &lfp)
        }
    };
    if opts.json {
        for c in &report.comparisons {
            println!("{}", comparison_json(c));
        }
    } else {
        println!("{report}");
    }
    Ok(if report.mismatches() > 0 {
        1
    } else if report.partial {
        4
    } else {
        0
    })
}

fn verdict_code(v: &Verdict) -> u8 {
    match v {
        Verdict::Valid => 0,
        Verdict::Invalid { .. } => 1,
        Verdict::Unknown { .. } => 3,
    }
}

fn prove(file: &Path, statement: Option<&str>, common: &Common, depth: usize, cert: Option<PathBuf>, output: Option<PathBuf>) -> Run {
    let dom = domain(common)?;
    let program = load(file, &dom)?;
    if let Some(path) = cert {
        let text = read(&path)?;
        let v = check_certificate(&program, &dom, &text);
        println!("{v}");
        return Ok(verdict_code(&v));
    }
    let text = statement.ok_or_else(|| anyhow!("either a statement or --check is required"))?;
    let stmt = parse_statement(text, Some(&program))?;
    let limits = SearchLimits {
        depth,
        ..SearchLimits::default()
    };
    match holds(&program, &dom, &stmt, limits) {
        HoldsVerdict::Derivable(tree) => {
            let cert = write_certificate(&stmt, &tree);
            match output {
                Some(p) => fs::write(&p, cert).with_context(|| format!("cannot write {}", p.display()))?,
                None => print!("{cert}"),
            }
            Ok(0)
        }
        HoldsVerdict::NotFound => {
            println!("not found");
            Ok(1)
        }
        HoldsVerdict::Unknown(why) => {
            println!("unknown: {why}");
            Ok(3)
        }
    }
}
