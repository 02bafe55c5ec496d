mod report;

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{ArgAction, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use romdd::oracle;
use romdd::script::{self, CheckOptions, Op, Subject};
use romdd::search::{read_instance, Constraint, Csp, SolveOutcome, SolverOptions, VarOrder};
use romdd::{Mdd, MddError, PropagatorConfig, Value};

use report::{RunReport, StatsFormat};

const EXIT_UNSAT: u8 = 1;
const EXIT_ERROR: u8 = 2;
const EXIT_LIMIT: u8 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "romdd",
    version,
    about = "Decision diagram constraints: compile, solve, cross-check"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Debug, Clone, Copy)]
struct PropagatorFlags {
    /// Collapse full-domain fans into long edges during search.
    #[arg(long, default_value_t = true, action = ArgAction::Set, value_name = "BOOL")]
    full_reduce: bool,
    /// Rescan every propagator structure after each operation.
    #[arg(long)]
    validate: bool,
}

impl PropagatorFlags {
    fn config(self) -> PropagatorConfig {
        PropagatorConfig {
            full_reduce: self.full_reduce,
            validate_invariants: self.validate,
            ..PropagatorConfig::default()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Order {
    Static,
    Smallest,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compile every constraint of an instance into a diagram file.
    Compile {
        instance: PathBuf,
        /// Output file; a directory receiving c1.mdd, c2.mdd, ... when the
        /// instance has several constraints and they are not conjoined.
        out: PathBuf,
        /// Fold all constraints into one diagram over every variable.
        #[arg(long)]
        conjoin_all: bool,
        /// Give up when a conjunction grows past this many edges.
        #[arg(long, value_name = "N")]
        max_edges: Option<usize>,
    },
    /// Search for the first solution.
    Solve {
        instance: PathBuf,
        #[command(flatten)]
        flags: PropagatorFlags,
        #[arg(long, value_enum, default_value_t = Order::Static)]
        var_order: Order,
        /// Give up after this many branching phases.
        #[arg(long, value_name = "N")]
        max_phases: Option<u64>,
        #[arg(long, value_enum, default_value_t = StatsFormat::Text)]
        stats_format: StatsFormat,
    },
    /// Replay random restriction and backtrack scripts against the oracle.
    Check {
        instance: PathBuf,
        #[command(flatten)]
        flags: PropagatorFlags,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        trials: u64,
        /// Operations per generated script.
        #[arg(long, default_value_t = 30)]
        steps: usize,
        /// Print every generated script before replaying it.
        #[arg(long)]
        print_scripts: bool,
        /// Replay this script file instead of generating scripts.
        #[arg(long, value_name = "FILE")]
        replay: Option<PathBuf>,
        /// Constraint (from 1) that `--replay` runs against.
        #[arg(long, default_value_t = 1)]
        constraint: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}

fn run(command: Command) -> Result<u8> {
    match command {
        Command::Compile {
            instance,
            out,
            conjoin_all,
            max_edges,
        } => compile(&instance, &out, conjoin_all, max_edges),
        Command::Solve {
            instance,
            flags,
            var_order,
            max_phases,
            stats_format,
        } => {
            let csp = load(&instance)?;
            let options = SolverOptions {
                var_order: match var_order {
                    Order::Static => VarOrder::Static,
                    Order::Smallest => VarOrder::SmallestDomain,
                },
                propagator: flags.config(),
                max_phases,
                ..SolverOptions::default()
            };
            let start = Instant::now();
            let result = romdd::search::solve(&csp, options)?;
            let report = RunReport::new(result, start.elapsed());
            print!("{}", report.render(stats_format));
            Ok(match report.outcome {
                SolveOutcome::Solution(_) => 0,
                SolveOutcome::Unsat => EXIT_UNSAT,
                SolveOutcome::LimitReached => EXIT_LIMIT,
            })
        }
        Command::Check {
            instance,
            flags,
            seed,
            trials,
            steps,
            print_scripts,
            replay,
            constraint,
        } => {
            let csp = load(&instance)?;
            let options = CheckOptions {
                propagator: flags.config(),
                ..CheckOptions::default()
            };
            match replay {
                Some(path) => check_file(&csp, &path, constraint, options),
                None => check_random(&csp, seed, trials, steps, print_scripts, options),
            }
        }
    }
}

fn load(path: &Path) -> Result<Csp> {
    read_instance(path).with_context(|| format!("reading {}", path.display()))
}

fn compile(instance: &Path, out: &Path, conjoin_all: bool, max_edges: Option<usize>) -> Result<u8> {
    let csp = load(instance)?;
    if csp.constraints().is_empty() {
        bail!("{} has no constraints", instance.display());
    }
    let diagrams: Vec<Mdd> = if conjoin_all {
        let mut acc = Mdd::new_true(csp.domains().to_vec());
        for c in csp.constraints() {
            let lifted = lift(&csp, c)?;
            acc = match acc.conjoin_limited(&lifted, max_edges) {
                Err(MddError::EdgeLimit { limit }) => {
                    eprintln!("edge limit of {limit} reached while conjoining; no output written");
                    return Ok(EXIT_LIMIT);
                }
                other => other?,
            };
            if acc.is_failed() {
                break;
            }
        }
        vec![acc]
    } else {
        csp.constraints().iter().map(|c| c.mdd.clone()).collect()
    };
    if let Some(i) = diagrams.iter().position(Mdd::is_failed) {
        if conjoin_all {
            eprintln!("unsatisfiable: the conjunction has no solution");
        } else {
            eprintln!("unsatisfiable: constraint {} has no solution", i + 1);
        }
        return Ok(EXIT_UNSAT);
    }
    if let [single] = diagrams.as_slice() {
        write(out, &single.to_text())?;
        println!("{}: {}", out.display(), size(single));
    } else {
        std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
        for (i, d) in diagrams.iter().enumerate() {
            let path = out.join(format!("c{}.mdd", i + 1));
            write(&path, &d.to_text())?;
            println!("{}: {}", path.display(), size(d));
        }
    }
    Ok(0)
}

fn size(d: &Mdd) -> String {
    format!(
        "{} nodes, {} edges, {} arcs",
        d.node_count(),
        d.edge_count(),
        d.arc_count()
    )
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// The constraint as a diagram over every variable of the instance.
fn lift(csp: &Csp, c: &Constraint) -> Result<Mdd> {
    let domains = csp.scope_domains(&c.scope);
    let sorted = c.scope.windows(2).all(|w| w[0] < w[1]);
    if sorted && c.mdd.domains() == domains.as_slice() {
        return Ok(c.mdd.lift(csp.domains(), &c.scope)?);
    }
    let mut order: Vec<usize> = (0..c.scope.len()).collect();
    order.sort_by_key(|&i| c.scope[i]);
    let scope: Vec<usize> = order.iter().map(|&i| c.scope[i]).collect();
    let tuples: Vec<Vec<Value>> = oracle::restrict(&c.solutions().solutions, &domains)
        .into_iter()
        .map(|t| order.iter().map(|&i| t[i]).collect())
        .collect();
    let local = Mdd::from_tuples(csp.scope_domains(&scope), &tuples)?;
    Ok(local.lift(csp.domains(), &scope)?)
}

struct Target {
    mdd: Mdd,
    domains: Vec<Vec<Value>>,
    solutions: BTreeSet<Vec<Value>>,
}

impl Target {
    fn new(csp: &Csp, c: &Constraint) -> Self {
        let domains = csp.scope_domains(&c.scope);
        let solutions = oracle::restrict(&c.solutions().solutions, &domains)
            .into_iter()
            .collect();
        Target {
            mdd: c.mdd.clone(),
            domains,
            solutions,
        }
    }

    fn subject(&self) -> Subject<'_> {
        Subject {
            mdd: &self.mdd,
            solutions: &self.solutions,
            domains: &self.domains,
        }
    }
}

fn check_random(
    csp: &Csp,
    seed: u64,
    trials: u64,
    steps: usize,
    print: bool,
    options: CheckOptions,
) -> Result<u8> {
    let targets: Vec<Target> = csp
        .constraints()
        .iter()
        .map(|c| Target::new(csp, c))
        .collect();
    if targets.is_empty() && trials > 0 {
        bail!("the instance has no constraints to check");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut operations = 0;
    for trial in 0..trials {
        let c = (trial % targets.len() as u64) as usize;
        let target = &targets[c];
        let ops = script::generate(&mut rng, &target.domains, steps);
        if print {
            println!("# trial {} constraint {}", trial + 1, c + 1);
            print!("{}", script::to_text(&ops));
        }
        if let Err(failure) = script::replay(&target.subject(), &ops, options) {
            report_failure(
                trial + 1,
                c + 1,
                seed,
                &failure,
                &script::minimize(&target.subject(), &ops, options),
            );
            return Ok(EXIT_UNSAT);
        }
        operations += ops.len();
    }
    println!("ok: {trials} scripts, {operations} operations, seed {seed}");
    Ok(0)
}

fn check_file(csp: &Csp, path: &Path, constraint: usize, options: CheckOptions) -> Result<u8> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let ops: Vec<Op> = script::parse(&text).map_err(anyhow::Error::msg)?;
    let Some(c) = constraint
        .checked_sub(1)
        .and_then(|i| csp.constraints().get(i))
    else {
        bail!("constraint {constraint} does not exist");
    };
    let target = Target::new(csp, c);
    let arity = target.domains.len();
    let in_range = ops.iter().all(|op| match op {
        Op::Remove(pairs) => pairs.iter().all(|&(v, _)| v < arity),
        &Op::Assign(v, _) => v < arity,
        _ => true,
    });
    if !in_range {
        bail!("script refers to a variable beyond the constraint's arity {arity}");
    }
    match script::replay(&target.subject(), &ops, options) {
        Ok(stats) => {
            println!("ok: {} operations", stats.operations);
            Ok(0)
        }
        Err(failure) => {
            report_failure(
                1,
                constraint,
                0,
                &failure,
                &script::minimize(&target.subject(), &ops, options),
            );
            Ok(EXIT_UNSAT)
        }
    }
}

fn report_failure(
    trial: u64,
    constraint: usize,
    seed: u64,
    failure: &script::ReplayFailure,
    minimal: &[Op],
) {
    println!("FAIL trial {trial} constraint {constraint} seed {seed}: {failure}");
    println!("# minimized script");
    print!("{}", script::to_text(minimal));
}
