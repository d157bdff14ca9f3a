//! The `aspa` subcommands.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use aspa_core::aggregates::{self, Tristate};
use aspa_core::grounder::{self, ground_program};
use aspa_core::parser::format_program;
use aspa_core::semantics;
use aspa_core::solver::{self, NormalProgram, NormalRule};
use aspa_core::{unfold, BaseMode, Config, GroundProgram, Head, Interpretation, Limits, Program, SolutionMode};

use crate::bench;
use crate::output;
use crate::source::{self, AppError};

#[derive(Debug, Parser)]
#[command(name = "aspa", version, about = "Answer sets of logic programs with aggregates, by unfolding")]
pub struct Cli {
    #[command(flatten)]
    pub caps: Caps,
    #[command(subcommand)]
    pub command: Command,
}

/// Size caps; exceeding one exits with status 2.
#[derive(Debug, Args)]
pub struct Caps {
    /// Maximum number of ground (or unfolded) rules.
    #[arg(long, global = true, env = "ASPA_MAX_GROUND", default_value_t = Limits::default().max_ground_rules)]
    pub max_ground: usize,
    /// Maximum aggregate base for minimal complete solution sets.
    #[arg(long, global = true, env = "ASPA_MAX_BASE", default_value_t = Limits::default().minimal_solutions)]
    pub max_base: usize,
    /// Maximum aggregate base for enumerating all solutions.
    #[arg(long, global = true, env = "ASPA_MAX_FULL_BASE", default_value_t = Limits::default().full_solutions)]
    pub max_full_base: usize,
    /// Maximum undecided atoms in a brute-force solution check or truth table.
    #[arg(long, global = true, env = "ASPA_MAX_CHECK", default_value_t = Limits::default().solution_check)]
    pub max_check: usize,
    /// Maximum search nodes of the normal-program solver.
    #[arg(long, global = true, env = "ASPA_MAX_NODES", default_value_t = Limits::default().search_nodes)]
    pub max_nodes: u64,
    /// Maximum undetermined atoms in a minimal-model check.
    #[arg(long, global = true, env = "ASPA_MAX_MODEL", default_value_t = Limits::default().minimal_model)]
    pub max_model: usize,
    /// Maximum undetermined atoms for generate-and-test enumeration.
    #[arg(long, global = true, env = "ASPA_MAX_CANDIDATES", default_value_t = Limits::default().candidate_base)]
    pub max_candidates: usize,
    /// Maximum aggregate base for the monotonicity check (larger is "unknown").
    #[arg(long, global = true, env = "ASPA_MAX_MONOTONE", default_value_t = Limits::default().monotone_check)]
    pub max_monotone: usize,
    /// Use every instance of an aggregate pattern as its base, not only the
    /// possibly true ones.
    #[arg(long, global = true)]
    pub full_base: bool,
}

impl Caps {
    pub fn config(&self) -> Result<Config, AppError> {
        let caps = [
            self.max_ground,
            self.max_base,
            self.max_full_base,
            self.max_check,
            self.max_model,
            self.max_candidates,
            self.max_monotone,
        ];
        if caps.contains(&0) || self.max_nodes == 0 {
            return Err(AppError::Usage("caps must be positive".into()));
        }
        if self.max_model > 40 || self.max_candidates > 40 || self.max_check > 40 || self.max_full_base > 24 {
            return Err(AppError::Usage(
                "subset caps above 40 (24 for --max-full-base) cannot be searched exhaustively".into(),
            ));
        }
        Ok(Config {
            base_mode: if self.full_base {
                BaseMode::FullPattern
            } else {
                BaseMode::HeadRestricted
            },
            solution_mode: SolutionMode::Minimal,
            limits: Limits {
                max_ground_rules: self.max_ground,
                solution_check: self.max_check,
                full_solutions: self.max_full_base,
                minimal_solutions: self.max_base,
                truth_table: self.max_check,
                monotone_check: self.max_monotone,
                search_nodes: self.max_nodes,
                minimal_model: self.max_model,
                candidate_base: self.max_candidates,
            },
            relaxed_closure: false,
        })
    }
}

#[derive(Debug, Args)]
pub struct Input {
    /// Program file (`-` for standard input).
    pub file: PathBuf,
    /// Read weight-constraint syntax and translate it (implied by `.aspw`).
    #[arg(long)]
    pub weights: bool,
}

#[derive(Debug, Args)]
#[group(multiple = false)]
pub struct Mode {
    /// Use every aggregate solution.
    #[arg(long)]
    pub full: bool,
    /// Use a minimal complete solution set (the default).
    #[arg(long)]
    pub minimal: bool,
}

impl Mode {
    fn get(&self) -> SolutionMode {
        if self.full {
            SolutionMode::Full
        } else {
            SolutionMode::Minimal
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SemanticsArg {
    Aspa,
    Flp,
    Stableset,
    All,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the ground program.
    Ground {
        #[command(flatten)]
        input: Input,
    },
    /// Print the solution sets of the ground aggregate atoms.
    Solutions {
        #[command(flatten)]
        input: Input,
        /// Only the aggregate atom with this index (see the listing).
        #[arg(long)]
        atom: Option<usize>,
        #[command(flatten)]
        mode: Mode,
        #[arg(long)]
        json: bool,
    },
    /// Print the unfolded normal program, or with `--wrt` the definite
    /// program obtained relative to an interpretation.
    Unfold {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        mode: Mode,
        /// File holding an interpretation, e.g. `{p(a), q}`.
        #[arg(long, value_name = "MODELFILE")]
        wrt: Option<PathBuf>,
    },
    /// Enumerate answer sets.
    Solve {
        #[command(flatten)]
        input: Input,
        /// Stop after this many answer sets.
        #[arg(long)]
        limit: Option<usize>,
        #[command(flatten)]
        mode: Mode,
        #[arg(long)]
        json: bool,
    },
    /// Enumerate answer sets of a program without aggregates.
    SolveNormal {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        limit: Option<usize>,
        #[arg(long)]
        json: bool,
    },
    /// Check one interpretation under several semantics.
    Check {
        #[command(flatten)]
        input: Input,
        /// Comma separated ground atoms, e.g. "p(1),p(-1)".
        #[arg(long)]
        model: String,
        #[arg(long, value_enum, default_value_t = SemanticsArg::All)]
        semantics: SemanticsArg,
        #[arg(long)]
        json: bool,
    },
    /// Report stratification, monotonicity and related properties.
    Classify {
        #[command(flatten)]
        input: Input,
        /// Also print the predicate dependency graph.
        #[arg(long)]
        graph: bool,
        #[arg(long)]
        json: bool,
    },
    /// Translate weight constraints into aggregates and print the result.
    TranslateWeights {
        /// Program in weight-constraint syntax.
        file: PathBuf,
    },
    /// Compare answer sets with the reference semantics and report any
    /// implication that fails.
    CrossCheck {
        #[command(flatten)]
        input: Input,
    },
    /// Run generated benchmark instances through the whole pipeline.
    Bench {
        /// Benchmark name, or `all`.
        #[arg(default_value = "all")]
        name: String,
        /// Instance parameter, e.g. `--param companies=5`.
        #[arg(long = "param", value_parser = parse_param)]
        params: Vec<(String, i64)>,
        /// Print the generated program instead of running it.
        #[arg(long)]
        emit: bool,
        /// Skip the oracle comparison.
        #[arg(long)]
        no_oracle: bool,
        #[arg(long)]
        json: bool,
        /// List the benchmarks and their parameters.
        #[arg(long)]
        list: bool,
    },
}

fn parse_param(s: &str) -> Result<(String, i64), String> {
    let (k, v) = s.split_once('=').ok_or("expected KEY=VALUE")?;
    let v = v.trim().parse::<i64>().map_err(|e| format!("{v}: {e}"))?;
    Ok((k.trim().to_string(), v))
}

/// Output produced by a subcommand.
pub struct Run {
    pub stdout: String,
    pub status: i32,
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("output types serialize");
    s.push('\n');
    s
}

fn load(input: &Input, config: &Config) -> Result<(Program, GroundProgram), AppError> {
    let program = source::load_program(&input.file, input.weights)?;
    let ground = ground_program(&program, config)?;
    Ok((program, ground))
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn tristate(t: Tristate) -> &'static str {
    match t {
        Tristate::Yes => "yes",
        Tristate::No => "no",
        Tristate::Unknown => "unknown",
    }
}

fn answer_sets_text(sets: &[Interpretation]) -> String {
    let mut out = String::new();
    for (i, s) in sets.iter().enumerate() {
        let _ = writeln!(out, "Answer {}: {s}", i + 1);
    }
    out.push_str(if sets.is_empty() { "UNSATISFIABLE\n" } else { "SATISFIABLE\n" });
    out
}

fn to_normal(ground: &GroundProgram) -> Result<NormalProgram, AppError> {
    let mut out = NormalProgram::new();
    for r in ground.rules() {
        if !r.aggs.is_empty() {
            return Err(AppError::Usage(format!("rule `{r}` has an aggregate; use `aspa solve`")));
        }
        let head = match &r.head {
            Head::Atom(a) => Some(a.clone()),
            Head::Falsum => None,
            Head::Aggregate(_) => {
                return Err(AppError::Usage(format!("rule `{r}` has an aggregate head; use `aspa solve`")))
            }
        };
        out.push(NormalRule {
            head,
            pos: r.pos.iter().cloned().collect(),
            neg: r.neg.iter().cloned().collect(),
        });
    }
    Ok(out)
}

fn execute(cli: Cli) -> Result<Run, AppError> {
    let mut config = cli.caps.config()?;
    let ok = |stdout: String| Ok(Run { stdout, status: 0 });
    match cli.command {
        Command::Ground { input } => {
            let (_, ground) = load(&input, &config)?;
            ok(format_program(&ground.to_program()))
        }
        Command::Solutions { input, atom, mode, json: as_json } => {
            let (_, ground) = load(&input, &config)?;
            let all: Vec<_> = ground.aggregates().collect();
            if let Some(i) = atom {
                if i >= all.len() {
                    return Err(AppError::Usage(format!(
                        "aggregate index {i} out of range; the program has {} ground aggregate atoms",
                        all.len()
                    )));
                }
            }
            let mut sets = Vec::new();
            for (i, (g, base)) in all.iter().enumerate() {
                if atom.is_some_and(|a| a != i) {
                    continue;
                }
                let set = match mode.get() {
                    SolutionMode::Full => aggregates::all_solutions(g, base, &config.limits)?,
                    SolutionMode::Minimal => aggregates::minimal_complete_solutions(g, base, &config.limits)?,
                };
                sets.push(output::Aggregate::new(i, &set));
            }
            if as_json {
                return ok(json(&output::Solutions {
                    command: "solutions",
                    aggregates: sets,
                }));
            }
            let mut out = String::new();
            for a in &sets {
                let _ = writeln!(out, "[{}] {}", a.index, a.atom);
                let _ = writeln!(out, "    base: {{{}}}", a.base.join(", "));
                let _ = writeln!(out, "    {} solutions ({}):", a.solutions.len(), a.kind);
                for s in &a.solutions {
                    let _ = writeln!(out, "    <{{{}}}, {{{}}}>", s.p.join(", "), s.n.join(", "));
                }
            }
            ok(out)
        }
        Command::Unfold { input, mode, wrt } => {
            let (_, ground) = load(&input, &config)?;
            match wrt {
                Some(path) => {
                    let text = source::read_text(&path)?;
                    let model = source::parse_model(&text, &path.display().to_string())?;
                    let reduct = unfold::head_reduct(&ground, &model, &config.limits)?;
                    ok(unfold::unfold_program_wrt(&reduct, &model, &config.limits)?.to_string())
                }
                None => ok(unfold::unfold_program(&ground, mode.get(), &config.limits)?.to_string()),
            }
        }
        Command::Solve {
            input,
            limit,
            mode,
            json: as_json,
        } => {
            let (_, ground) = load(&input, &config)?;
            let sets = semantics::aspa_answer_sets(&ground, mode.get(), limit, &config.limits)?;
            ok(if as_json {
                json(&output::AnswerSets::new("solve", &sets))
            } else {
                answer_sets_text(&sets)
            })
        }
        Command::SolveNormal {
            input,
            limit,
            json: as_json,
        } => {
            let (_, ground) = load(&input, &config)?;
            let normal = to_normal(&ground)?;
            let sets = solver::enumerate_answer_sets(&normal, limit, &config.limits)?;
            ok(if as_json {
                json(&output::AnswerSets::new("solve-normal", &sets))
            } else {
                answer_sets_text(&sets)
            })
        }
        Command::Check {
            input,
            model,
            semantics: which,
            json: as_json,
        } => {
            config.relaxed_closure = matches!(which, SemanticsArg::Stableset | SemanticsArg::All);
            let (_, ground) = load(&input, &config)?;
            let m = source::parse_model(&model, "--model")?;
            let v = semantics::verdict(&ground, &m, &config)?;
            if as_json {
                return ok(json(&output::Check::from(&v)));
            }
            let opt = |b: Option<bool>| b.map_or("n/a", yes_no);
            let parts: Vec<String> = match which {
                SemanticsArg::Aspa => vec![format!("aspa:{}", yes_no(v.aspa()))],
                SemanticsArg::Flp => vec![format!("flp:{}", opt(v.flp))],
                SemanticsArg::Stableset => vec![format!("stableset:{}", opt(v.stable_set))],
                SemanticsArg::All => vec![
                    format!("aspa:{}", yes_no(v.aspa())),
                    format!("flp:{}", opt(v.flp)),
                    format!("stableset:{}", opt(v.stable_set)),
                ],
            };
            ok(format!("{}\n", parts.join(" ")))
        }
        Command::Classify {
            input,
            graph,
            json: as_json,
        } => {
            let (program, ground) = load(&input, &config)?;
            let c = grounder::classify(&program, &ground, &config.limits)?;
            let levels = c.stratification.as_ref().map(|l| {
                program
                    .predicates()
                    .into_iter()
                    .map(|p| (p.to_string(), l.level(&p)))
                    .collect::<Vec<_>>()
            });
            let report = output::Classify {
                command: "classify",
                aggregate_free: c.aggregate_free,
                head_aggregates: c.has_aggregate_heads,
                negation: c.has_negation,
                constraints: c.has_constraints,
                stratified: c.stratification.is_some(),
                monotone: tristate(c.monotone),
                levels,
            };
            if as_json {
                return ok(json(&report));
            }
            let mut out = String::new();
            let _ = writeln!(out, "aggregate-free: {}", yes_no(report.aggregate_free));
            let _ = writeln!(out, "head-aggregates: {}", yes_no(report.head_aggregates));
            let _ = writeln!(out, "negation: {}", yes_no(report.negation));
            let _ = writeln!(out, "constraints: {}", yes_no(report.constraints));
            let _ = writeln!(out, "stratified: {}", yes_no(report.stratified));
            let _ = writeln!(out, "monotone: {}", report.monotone);
            if let Some(levels) = &report.levels {
                for (p, l) in levels {
                    let _ = writeln!(out, "level {p}: {l}");
                }
            }
            if graph {
                for e in grounder::dependency_graph(&program).edges {
                    let kind = match e.kind {
                        grounder::EdgeKind::Positive => "positive",
                        grounder::EdgeKind::Negative => "negative",
                        grounder::EdgeKind::Aggregate => "aggregate",
                    };
                    let _ = writeln!(out, "{} -> {} ({kind})", e.from, e.to);
                }
            }
            ok(out)
        }
        Command::TranslateWeights { file } => {
            let program = source::load_program(&file, true)?;
            ok(format_program(&program))
        }
        Command::CrossCheck { input } => {
            let (program, ground) = load(&input, &config)?;
            let r = semantics::cross_check(&program, &ground, &config)?;
            let mut out = answer_sets_text(&r.aspa);
            if let Some(flp) = &r.flp {
                let _ = writeln!(out, "flp answer sets: {}", flp.len());
            }
            if let Some(m) = &r.perfect_model {
                let _ = writeln!(out, "perfect model: {m}");
            }
            if let Some(m) = &r.monotone_fixpoint {
                let _ = writeln!(out, "monotone fixpoint: {m}");
            }
            for n in &r.notes {
                let _ = writeln!(out, "note: {n}");
            }
            for f in &r.failures {
                let _ = writeln!(out, "FAILED: {f}");
            }
            let _ = writeln!(out, "{}", if r.passed() { "cross-check passed" } else { "cross-check failed" });
            Ok(Run {
                stdout: out,
                status: if r.passed() { 0 } else { 3 },
            })
        }
        Command::Bench {
            name,
            params,
            emit,
            no_oracle,
            json: as_json,
            list,
        } => {
            if list {
                let mut out = String::new();
                for b in bench::BENCHMARKS {
                    let ps: Vec<String> = b.defaults.iter().map(|(k, v)| format!("{k}={v}")).collect();
                    let _ = writeln!(out, "{} {} seed=1", b.name, ps.join(" "));
                }
                return ok(out);
            }
            let chosen: Vec<&bench::Benchmark> = if name == "all" {
                if !params.is_empty() || emit {
                    return Err(AppError::Usage("--param and --emit need a single benchmark name".into()));
                }
                bench::BENCHMARKS.iter().collect()
            } else {
                vec![bench::find(&name).ok_or_else(|| {
                    AppError::Usage(format!(
                        "unknown benchmark `{name}`; known: {}",
                        bench::BENCHMARKS.iter().map(|b| b.name).collect::<Vec<_>>().join(", ")
                    ))
                })?]
            };
            let mut out = String::new();
            let mut reports = Vec::new();
            let mut status = 0;
            if !as_json {
                out.push_str("# timings are informational; they are not comparable with other systems or machines\n");
            }
            for b in chosen {
                let p = b.params(&params)?;
                if emit {
                    return ok(b.instance(&p).program);
                }
                let o = bench::run(b, &p, &config, !no_oracle)?;
                let r = o.report;
                if r.oracle == "fail" {
                    status = 3;
                }
                if !as_json {
                    let ps: Vec<String> = r.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
                    let _ = writeln!(
                        out,
                        "{} [{}] answer sets: {} oracle: {} ground: {:.1} ms transform: {:.1} ms solve: {:.1} ms",
                        r.name,
                        ps.join(" "),
                        r.answer_sets,
                        r.oracle,
                        r.timings.ground_ms,
                        r.timings.transform_ms,
                        r.timings.solve_ms
                    );
                }
                reports.push(r);
            }
            if as_json {
                out = json(&reports);
            }
            Ok(Run { stdout: out, status })
        }
    }
}

/// Parses arguments and runs a subcommand, returning the process status.
/// Standard output and errors are written here.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(r) => {
            print!("{}", r.stdout);
            r.status
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Like [`run`] but captures standard output; used by tests.
pub fn run_captured<I, T>(args: I) -> Result<Run, AppError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| AppError::Usage(e.to_string()))?;
    execute(cli)
}
