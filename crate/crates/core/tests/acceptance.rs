//! Acceptance suite. Prints one PASS or FAIL line per criterion and exits
//! non-zero when any criterion fails.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use romdd::families::{example, example_domains, first_is_minimum};
use romdd::gen::{random_table, TableInstance, TableShape};
use romdd::mdd::at_least_once;
use romdd::oracle::{self, DEFAULT_CAP};
use romdd::script::{self, CheckOptions, Subject};
use romdd::search::{solve, Csp, SolverOptions};
use romdd::{structural_equal, Mdd, PropagatorConfig, PropagatorState, Value};

const POOL: u64 = 200;
const STEPS: usize = 25;
const SCRIPTS_PER_INSTANCE: u64 = 100;

struct Verdict {
    id: u32,
    title: &'static str,
    pass: bool,
    detail: String,
}

fn verdict(id: u32, title: &'static str, pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        id,
        title,
        pass,
        detail: detail.into(),
    }
}

fn tuples(rows: &[[Value; 2]]) -> Vec<Vec<Value>> {
    rows.iter().map(|r| r.to_vec()).collect()
}

fn criterion_1() -> Verdict {
    let start = Instant::now();
    let rows = tuples(&[[1, 3], [2, 1], [3, 3], [4, 1], [4, 2], [4, 3]]);
    let mdd = Mdd::from_tuples(vec![vec![1, 2, 3, 4], vec![1, 2, 3]], &rows).unwrap();
    let long: Vec<_> = mdd
        .edges()
        .filter(|e| e.destination_layer - e.source_layer > 1)
        .collect();
    let skips_second = long.len() == 1
        && long[0].source_layer == 0
        && long[0].destination_layer == 2
        && long[0].value == 4;
    let sols = mdd.enumerate_solutions(None);
    let expected: BTreeSet<Vec<Value>> = rows.into_iter().collect();
    let elapsed = start.elapsed();
    let pass = mdd.node_count() == 4
        && mdd.arc_count() == 5
        && mdd.long_edge_count() == 1
        && skips_second
        && sols == expected
        && elapsed < Duration::from_secs(1);
    verdict(
        1,
        "two-variable example compiles to the expected diagram",
        pass,
        format!(
            "{} nodes, {} arcs ({} labelled edges), {} long, {} solutions, {:?}",
            mdd.node_count(),
            mdd.arc_count(),
            mdd.edge_count(),
            mdd.long_edge_count(),
            sols.len(),
            elapsed
        ),
    )
}

/// Counters gathered while driving the random pool.
#[derive(Default)]
struct PoolRecord {
    instances: usize,
    steps: usize,
    gac_mismatches: usize,
    first_gac_mismatch: Option<String>,
    edge_bound_violations: usize,
    max_removal_ratio: f64,
    redirect_checks: usize,
    redirect_violations: usize,
    max_redirects_seen: u32,
    structural_checks: usize,
    structural_mismatches: usize,
    entailment_checks: usize,
    entailment_mismatches: usize,
    entailed_seen: usize,
    solves: usize,
    solve_edge_violations: u64,
    elapsed: Duration,
}

fn pool_instance(seed: u64) -> TableInstance {
    random_table(&mut ChaCha8Rng::seed_from_u64(seed), &TableShape::default())
}

/// One random restriction step over the externally visible domains:
/// a removal of one to three values, an assignment, a new phase, or a
/// backtrack.
enum Step {
    Push,
    Pop,
    Remove(Vec<(usize, Value)>),
    Assign(usize, Value),
}

fn draw_step(rng: &mut ChaCha8Rng, external: &[Vec<Value>], depth: usize) -> Step {
    let roll = rng.gen_range(0..100);
    if roll < 15 {
        return Step::Push;
    }
    if roll < 25 && depth > 0 {
        return Step::Pop;
    }
    let open: Vec<usize> = (0..external.len())
        .filter(|&i| external[i].len() > 1)
        .collect();
    if roll < 45 && !open.is_empty() {
        let var = open[rng.gen_range(0..open.len())];
        return Step::Assign(var, external[var][rng.gen_range(0..external[var].len())]);
    }
    let mut pairs = Vec::new();
    for _ in 0..rng.gen_range(1..=3) {
        let var = rng.gen_range(0..external.len());
        if !external[var].is_empty() {
            pairs.push((var, external[var][rng.gen_range(0..external[var].len())]));
        }
    }
    Step::Remove(pairs)
}

fn drive(record: &mut PoolRecord, table: &TableInstance, full_reduce: bool, seed: u64) {
    let mdd = table.mdd();
    let sols = table.solutions();
    let config = PropagatorConfig {
        full_reduce,
        ..PropagatorConfig::default()
    };
    let mut prop = PropagatorState::new(&mdd, &table.domains, config).unwrap();
    let initial_edges = prop.initial_edge_count() as u64;
    let mut external = table.domains.clone();
    let mut saved: Vec<Vec<Vec<Value>>> = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    for step in 0..=STEPS {
        if step > 0 {
            match draw_step(&mut rng, &external, saved.len()) {
                Step::Push => {
                    prop.push_phase();
                    saved.push(external.clone());
                }
                Step::Pop => {
                    prop.backtrack().unwrap();
                    external = saved.pop().unwrap();
                }
                _ if prop.is_failed() => continue,
                Step::Remove(pairs) => {
                    for &(var, v) in &pairs {
                        external[var].retain(|&x| x != v);
                    }
                    prop.remove(&pairs).unwrap();
                }
                Step::Assign(var, v) => {
                    let others: Vec<(usize, Value)> = external[var]
                        .iter()
                        .filter(|&&x| x != v)
                        .map(|&x| (var, x))
                        .collect();
                    external[var] = vec![v];
                    if prop.current_domain(var).contains(&v) {
                        prop.assign(var, v).unwrap();
                    } else {
                        prop.remove(&others).unwrap();
                    }
                }
            }
        }
        record.steps += 1;

        let removals = prop.branch_edge_removals();
        if removals > initial_edges {
            record.edge_bound_violations += 1;
        }
        if initial_edges > 0 {
            record.max_removal_ratio = record
                .max_removal_ratio
                .max(removals as f64 / initial_edges as f64);
        }
        if full_reduce {
            record.redirect_checks += 1;
            let bound = (prop.initial_node_count().max(2) as f64).log2().ceil() as u32;
            record.max_redirects_seen = record.max_redirects_seen.max(prop.max_edge_redirects());
            if prop.max_edge_redirects() > bound {
                record.redirect_violations += 1;
            }
        }

        let expected = oracle::valid_domains(&sols, &external);
        let wiped = expected.iter().any(Vec::is_empty);
        let got = if prop.is_failed() {
            None
        } else {
            Some(prop.valid_domains().unwrap())
        };
        let agrees = match &got {
            None => wiped,
            Some(d) => !wiped && *d == expected,
        };
        if !agrees {
            record.gac_mismatches += 1;
            record.first_gac_mismatch.get_or_insert_with(|| {
                format!(
                    "instance seed {seed}, step {step}: propagator {got:?}, oracle {expected:?}"
                )
            });
        }
        if wiped || prop.is_failed() {
            continue;
        }

        record.entailment_checks += 1;
        let entailed = oracle::entailed(&sols, &expected, DEFAULT_CAP).unwrap();
        record.entailed_seen += entailed as usize;
        if prop.is_domain_entailed().unwrap() != entailed {
            record.entailment_mismatches += 1;
        }

        if full_reduce {
            record.structural_checks += 1;
            let rebuilt = Mdd::from_tuples(expected.clone(), &oracle::restrict(&sols, &expected))
                .unwrap()
                .reduce_full();
            if !structural_equal(&prop.live_mdd(), &rebuilt) {
                record.structural_mismatches += 1;
            }
        }
    }
}

fn run_pool() -> (PoolRecord, PoolRecord) {
    let mut full = PoolRecord::default();
    let mut unique = PoolRecord::default();
    for (record, full_reduce) in [(&mut full, true), (&mut unique, false)] {
        let start = Instant::now();
        for seed in 0..POOL {
            let table = pool_instance(seed);
            record.instances += 1;
            drive(record, &table, full_reduce, seed);
            let mut csp = Csp::new(table.domains.clone());
            csp.add_table((0..table.domains.len()).collect(), table.tuples.clone())
                .unwrap();
            let options = SolverOptions {
                propagator: PropagatorConfig {
                    full_reduce,
                    ..PropagatorConfig::default()
                },
                ..SolverOptions::default()
            };
            let result = solve(&csp, options).unwrap();
            record.solves += 1;
            record.solve_edge_violations += result.stats.edge_bound_violations;
        }
        record.elapsed = start.elapsed();
    }
    (full, unique)
}

fn criterion_2(full: &PoolRecord, unique: &PoolRecord) -> Verdict {
    let mismatches = full.gac_mismatches + unique.gac_mismatches;
    let elapsed = full.elapsed + unique.elapsed;
    let mut detail = format!(
        "{} instances, {} + {} checked steps, {mismatches} mismatches, {:.1?}",
        full.instances, full.steps, unique.steps, elapsed
    );
    if let Some(m) = full
        .first_gac_mismatch
        .as_ref()
        .or(unique.first_gac_mismatch.as_ref())
    {
        detail.push_str(&format!("; first: {m}"));
    }
    verdict(
        2,
        "valid domains equal the oracle after every random step",
        mismatches == 0
            && full.instances as u64 >= 200
            && STEPS >= 20
            && elapsed < Duration::from_secs(60),
        detail,
    )
}

fn criterion_3(full: &PoolRecord, unique: &PoolRecord) -> Verdict {
    let violations = full.edge_bound_violations + unique.edge_bound_violations;
    let solve_violations = full.solve_edge_violations + unique.solve_edge_violations;
    verdict(
        3,
        "edge removals per branch never exceed the initial edge count",
        violations == 0 && solve_violations == 0,
        format!(
            "{violations} violations over {} steps, {solve_violations} over {} solves, peak ratio {:.2}",
            full.steps + unique.steps,
            full.solves + unique.solves,
            full.max_removal_ratio.max(unique.max_removal_ratio)
        ),
    )
}

fn criterion_4(full: &PoolRecord) -> Verdict {
    verdict(
        4,
        "no edge is redirected more than ceil(log2 |V|) times on a branch",
        full.redirect_violations == 0,
        format!(
            "{} violations over {} checks, largest per-edge count {}",
            full.redirect_violations, full.redirect_checks, full.max_redirects_seen
        ),
    )
}

fn criterion_5(full: &PoolRecord) -> Verdict {
    verdict(
        5,
        "live diagram equals the statically rebuilt reduced diagram",
        full.structural_mismatches == 0 && full.structural_checks > 0,
        format!(
            "{} mismatches over {} comparisons",
            full.structural_mismatches, full.structural_checks
        ),
    )
}

fn criterion_6(full: &PoolRecord, unique: &PoolRecord) -> Verdict {
    let mismatches = full.entailment_mismatches + unique.entailment_mismatches;
    let mdd = example();
    let d = example_domains();
    let mut base = PropagatorState::new(&mdd, &d, PropagatorConfig::default()).unwrap();
    let at_start = base.is_domain_entailed().unwrap();
    base.assign(0, 4).unwrap();
    let after_assign = base.is_domain_entailed().unwrap();
    verdict(
        6,
        "entailment flag equals the oracle; example entailed only after x1 = 4",
        mismatches == 0 && !at_start && after_assign,
        format!(
            "{mismatches} mismatches over {} checks ({} entailed), example: {at_start} then {after_assign}",
            full.entailment_checks + unique.entailment_checks,
            full.entailed_seen + unique.entailed_seen
        ),
    )
}

fn r_squared(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if syy == 0.0 {
        return 1.0;
    }
    sxy * sxy / (sxx * syy)
}

fn criterion_7() -> Verdict {
    let sizes = |n: usize| {
        let with = at_least_once(n, &[1, 2], 1);
        let without = with.expand_long_edges();
        (with, without)
    };
    let (with3, without3) = sizes(3);
    let spot = (
        with3.node_count(),
        with3.edge_count(),
        without3.node_count(),
        without3.edge_count(),
    );
    let spot_ok = spot == (4, 5, 6, 9) && with3.count_solutions() == 7;

    let ns: Vec<usize> = (3..=20).collect();
    let xs: Vec<f64> = ns.iter().map(|&n| n as f64).collect();
    let with_counts: Vec<f64> = ns.iter().map(|&n| sizes(n).0.node_count() as f64).collect();
    let r2 = r_squared(&xs, &with_counts);
    let flat = |n: usize| sizes(n).1.node_count() as f64;
    let ratios = [flat(10) / flat(5), flat(20) / flat(10)];
    let quadratic = ratios.iter().all(|&r| r >= 3.0);
    verdict(
        7,
        "at-least-once sizes: linear with long edges, quadratic without",
        spot_ok && r2 >= 0.99 && quadratic,
        format!(
            "n=3 spot {spot:?}, linear fit R^2 {r2:.4}, long-edge-free doubling ratios {:.2} and {:.2} (need >= 3)",
            ratios[0], ratios[1]
        ),
    )
}

fn criterion_8() -> Verdict {
    let mut scripts = 0;
    let mut pops = 0;
    let mut failures = Vec::new();
    let options = CheckOptions {
        enforce_redirect_bound: false,
        enforce_work_bound: false,
        ..CheckOptions::default()
    };
    for seed in 0..POOL {
        let table = pool_instance(seed);
        let mdd = table.mdd();
        let sols = table.solutions();
        let subject = Subject {
            mdd: &mdd,
            solutions: &sols,
            domains: &table.domains,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(31) + 7);
        for _ in 0..SCRIPTS_PER_INSTANCE {
            let ops = script::generate(&mut rng, &table.domains, 20);
            scripts += 1;
            match script::replay(&subject, &ops, options) {
                Ok(stats) => pops += stats.snapshot_checks,
                Err(e) => failures.push(format!("instance {seed}: {e}")),
            }
        }
    }
    verdict(
        8,
        "backtracking restores the exact state saved at push",
        failures.is_empty(),
        match failures.first() {
            None => format!("{scripts} scripts, {pops} snapshot comparisons, all equal"),
            Some(f) => format!("{} failing scripts, first: {f}", failures.len()),
        },
    )
}

fn criterion_9() -> Verdict {
    let mdd = first_is_minimum(3, 3);
    let domains = vec![vec![1, 2, 3]; 3];
    let mut prop = PropagatorState::new(&mdd, &domains, PropagatorConfig::default()).unwrap();
    let before = prop.live_node_count();
    prop.remove(&[(1, 1), (2, 1)]).unwrap();
    let after = prop.live_node_count();
    let current = prop.valid_domains().unwrap();
    let mut sols = BTreeSet::new();
    oracle::for_each_assignment(&domains, |a| {
        if a[1..].iter().all(|&x| a[0] <= x) {
            sols.insert(a.to_vec());
        }
        true
    });
    let rebuilt = Mdd::from_tuples(current.clone(), &oracle::restrict(&sols, &current))
        .unwrap()
        .reduce_full();
    let loss = 1.0 - after as f64 / before as f64;
    verdict(
        9,
        "first-is-minimum shrinks after removing value 1 from x2 and x3",
        loss >= 0.2 && structural_equal(&prop.live_mdd(), &rebuilt),
        format!(
            "live nodes {before} -> {after} ({:.0}% fewer), domains {current:?}",
            loss * 100.0
        ),
    )
}

fn main() {
    let (full, unique) = run_pool();
    let verdicts = [
        criterion_1(),
        criterion_2(&full, &unique),
        criterion_3(&full, &unique),
        criterion_4(&full),
        criterion_5(&full),
        criterion_6(&full, &unique),
        criterion_7(),
        criterion_8(),
        criterion_9(),
    ];
    for v in &verdicts {
        println!(
            "{} criterion {}: {} ({})",
            if v.pass { "PASS" } else { "FAIL" },
            v.id,
            v.title,
            v.detail
        );
    }
    let failed = verdicts.iter().filter(|v| !v.pass).count();
    println!(
        "acceptance: {} passed, {failed} failed",
        verdicts.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
