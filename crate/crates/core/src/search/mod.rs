//! Depth-first search over several diagram constraints.
//!
//! Each search node is a phase: one variable is fixed to one value, then
//! every constraint with pending removals is run until none removes anything
//! more. Constraints shown to be entailed are left out until the search
//! backtracks above the phase that entailed them.

mod instance;

use std::collections::VecDeque;

pub use instance::{parse_instance, read_instance};

use crate::error::InstanceError;
use crate::mdd::{Mdd, Value};
use crate::oracle::TupleConstraint;
use crate::propagator::{Propagation, PropagatorConfig, PropagatorState};

/// A constraint of a [`Csp`]: a diagram over the variables in `scope`.
#[derive(Clone, Debug)]
pub struct Constraint {
    pub mdd: Mdd,
    pub scope: Vec<usize>,
    /// The table the diagram was compiled from, when there was one.
    pub tuples: Option<Vec<Vec<Value>>>,
}

impl Constraint {
    /// Solutions over the scope, from the table when known.
    pub fn solutions(&self) -> TupleConstraint {
        let solutions = match &self.tuples {
            Some(t) => t.iter().cloned().collect(),
            None => self.mdd.enumerate_solutions(None),
        };
        TupleConstraint {
            scope: self.scope.clone(),
            solutions,
        }
    }
}

/// Variables with finite domains and a list of diagram constraints.
#[derive(Clone, Debug, Default)]
pub struct Csp {
    domains: Vec<Vec<Value>>,
    constraints: Vec<Constraint>,
}

impl Csp {
    pub fn new(domains: Vec<Vec<Value>>) -> Self {
        let domains = domains
            .into_iter()
            .map(|mut d| {
                d.sort_unstable();
                d.dedup();
                d
            })
            .collect();
        Csp {
            domains,
            constraints: Vec::new(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.domains.len()
    }

    pub fn domains(&self) -> &[Vec<Value>] {
        &self.domains
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    /// Domains of the variables in `scope`, in scope order.
    pub fn scope_domains(&self, scope: &[usize]) -> Vec<Vec<Value>> {
        scope.iter().map(|&i| self.domains[i].clone()).collect()
    }

    pub fn add_constraint(&mut self, mdd: Mdd, scope: Vec<usize>) -> Result<(), InstanceError> {
        self.push_constraint(Constraint {
            mdd,
            scope,
            tuples: None,
        })
    }

    /// Compiles a table over `scope` against the current domains.
    pub fn add_table(
        &mut self,
        scope: Vec<usize>,
        tuples: Vec<Vec<Value>>,
    ) -> Result<(), InstanceError> {
        self.check_scope(&scope)?;
        let mdd = Mdd::from_tuples(self.scope_domains(&scope), &tuples)?;
        self.push_constraint(Constraint {
            mdd,
            scope,
            tuples: Some(tuples),
        })
    }

    fn check_scope(&self, scope: &[usize]) -> Result<(), InstanceError> {
        if let Some(&i) = scope.iter().find(|&&i| i >= self.num_vars()) {
            return Err(InstanceError::Invalid(format!(
                "scope variable {i} is out of range"
            )));
        }
        let mut sorted = scope.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != scope.len() {
            return Err(InstanceError::Invalid("scope repeats a variable".into()));
        }
        Ok(())
    }

    fn push_constraint(&mut self, c: Constraint) -> Result<(), InstanceError> {
        self.check_scope(&c.scope)?;
        if c.mdd.num_vars() != c.scope.len() {
            return Err(InstanceError::Invalid(format!(
                "diagram has {} variables but the scope has {}",
                c.mdd.num_vars(),
                c.scope.len()
            )));
        }
        for (local, &var) in c.scope.iter().enumerate() {
            let compiled = c.mdd.domain(local);
            if let Some(v) = self.domains[var]
                .iter()
                .find(|v| compiled.binary_search(v).is_err())
            {
                return Err(InstanceError::Invalid(format!(
                    "value {v} of variable {var} is missing from the constraint's compiled domain"
                )));
            }
        }
        self.constraints.push(c);
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum VarOrder {
    /// Lowest index first.
    #[default]
    Static,
    /// Fewest remaining values first, lowest index on ties.
    SmallestDomain,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SolverOptions {
    pub var_order: VarOrder,
    pub propagator: PropagatorConfig,
    /// Stop delivering removals to constraints known to be entailed.
    pub skip_entailed: bool,
    /// Give up after this many phases.
    pub max_phases: Option<u64>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            var_order: VarOrder::Static,
            propagator: PropagatorConfig::default(),
            skip_entailed: true,
            max_phases: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SolveOutcome {
    Solution(Vec<Value>),
    Unsat,
    LimitReached,
}

/// Counters of one solve.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub phases: u64,
    pub steps: u64,
    pub remove_edge_calls: u64,
    pub merges: u64,
    pub redirects: u64,
    pub collapses: u64,
    pub entailment_events: u64,
    pub fails: u64,
    pub peak_live_nodes: u64,
    pub peak_live_edges: u64,
    /// Steps after which some constraint had removed more edges on the
    /// current branch than it started with.
    pub edge_bound_violations: u64,
    /// Redirects beyond the per-edge bound, over all constraints.
    pub redirect_violations: u64,
    /// Steps after which some constraint's reduction work on the current
    /// branch exceeded its budget.
    pub reduce_work_violations: u64,
}

impl SearchStats {
    /// Every counter with its name, in a fixed order.
    pub fn fields(&self) -> [(&'static str, u64); 13] {
        [
            ("phases", self.phases),
            ("steps", self.steps),
            ("remove_edge_calls", self.remove_edge_calls),
            ("merges", self.merges),
            ("redirects", self.redirects),
            ("collapses", self.collapses),
            ("entailment_events", self.entailment_events),
            ("fails", self.fails),
            ("peak_live_nodes", self.peak_live_nodes),
            ("peak_live_edges", self.peak_live_edges),
            ("edge_bound_violations", self.edge_bound_violations),
            ("redirect_violations", self.redirect_violations),
            ("reduce_work_violations", self.reduce_work_violations),
        ]
    }
}

#[derive(Clone, Debug)]
pub struct SolveResult {
    pub outcome: SolveOutcome,
    pub stats: SearchStats,
    /// Initial node and edge count of every constraint.
    pub constraint_sizes: Vec<(usize, usize)>,
}

#[derive(Clone, Copy, Debug)]
enum GlobalUndo {
    Value { var: usize, index: usize },
    Entailed(usize),
}

/// Search state over a [`Csp`].
pub struct Solver<'a> {
    csp: &'a Csp,
    options: SolverOptions,
    props: Vec<PropagatorState>,
    present: Vec<Vec<bool>>,
    sizes: Vec<usize>,
    occurrences: Vec<Vec<(usize, usize)>>,
    entailed: Vec<bool>,
    trail: Vec<GlobalUndo>,
    marks: Vec<usize>,
    pending: Vec<Vec<(usize, Value)>>,
    queued: Vec<bool>,
    queue: VecDeque<usize>,
    stats: SearchStats,
}

impl<'a> Solver<'a> {
    pub fn new(csp: &'a Csp, options: SolverOptions) -> Result<Self, InstanceError> {
        let mut props = Vec::with_capacity(csp.constraints.len());
        let mut occurrences = vec![Vec::new(); csp.num_vars()];
        for (c, constraint) in csp.constraints.iter().enumerate() {
            props.push(PropagatorState::new(
                &constraint.mdd,
                &csp.scope_domains(&constraint.scope),
                options.propagator,
            )?);
            for (local, &var) in constraint.scope.iter().enumerate() {
                occurrences[var].push((c, local));
            }
        }
        let k = props.len();
        Ok(Solver {
            csp,
            options,
            props,
            present: csp.domains.iter().map(|d| vec![true; d.len()]).collect(),
            sizes: csp.domains.iter().map(Vec::len).collect(),
            occurrences,
            entailed: vec![false; k],
            trail: Vec::new(),
            marks: Vec::new(),
            pending: vec![Vec::new(); k],
            queued: vec![false; k],
            queue: VecDeque::new(),
            stats: SearchStats::default(),
        })
    }

    /// Current domain of global variable `var`.
    pub fn domain(&self, var: usize) -> Vec<Value> {
        self.csp.domains[var]
            .iter()
            .zip(&self.present[var])
            .filter(|(_, &p)| p)
            .map(|(&v, _)| v)
            .collect()
    }

    pub fn domains(&self) -> Vec<Vec<Value>> {
        (0..self.csp.num_vars()).map(|i| self.domain(i)).collect()
    }

    pub fn propagators(&self) -> &[PropagatorState] {
        &self.props
    }

    pub fn is_entailed(&self, c: usize) -> bool {
        self.entailed[c]
    }

    pub fn stats(&self) -> &SearchStats {
        &self.stats
    }

    /// Brings every constraint in line with its initial valid domains and
    /// runs the first fixpoint. False when this already fails.
    pub fn initialize(&mut self) -> bool {
        let mut removals = Vec::new();
        for (c, p) in self.props.iter().enumerate() {
            if p.is_failed() {
                self.stats.fails += 1;
                return false;
            }
            for (local, &var) in self.csp.constraints[c].scope.iter().enumerate() {
                let valid = p.current_domain(local);
                for v in self.domain(var) {
                    if valid.binary_search(&v).is_err() {
                        removals.push((var, v));
                    }
                }
            }
        }
        for (var, v) in removals {
            self.remove_global(var, v, None);
        }
        for c in 0..self.props.len() {
            self.enqueue(c);
        }
        self.propagate_fixpoint()
    }

    fn enqueue(&mut self, c: usize) {
        if !self.queued[c] {
            self.queued[c] = true;
            self.queue.push_back(c);
        }
    }

    /// Removes a value from the global store and hands it to every other
    /// constraint on the variable.
    fn remove_global(&mut self, var: usize, value: Value, from: Option<usize>) {
        let Ok(index) = self.csp.domains[var].binary_search(&value) else {
            return;
        };
        if !self.present[var][index] {
            return;
        }
        self.present[var][index] = false;
        self.sizes[var] -= 1;
        self.trail.push(GlobalUndo::Value { var, index });
        for k in 0..self.occurrences[var].len() {
            let (c, local) = self.occurrences[var][k];
            if Some(c) != from && !self.entailed[c] {
                self.pending[c].push((local, value));
                self.enqueue(c);
            }
        }
    }

    /// Runs queued constraints until none has pending removals. False on a
    /// wipe-out.
    pub fn propagate_fixpoint(&mut self) -> bool {
        while let Some(c) = self.queue.pop_front() {
            self.queued[c] = false;
            let delta = std::mem::take(&mut self.pending[c]);
            if self.entailed[c] {
                continue;
            }
            self.stats.steps += 1;
            let out = self.props[c]
                .remove(&delta)
                .expect("constraint is live during propagation");
            self.observe(c);
            let newly = match out {
                Propagation::Failed => {
                    self.stats.fails += 1;
                    self.clear_queue();
                    return false;
                }
                Propagation::Consistent(newly) => newly,
            };
            let scope = &self.csp.constraints[c].scope;
            let globals: Vec<(usize, Value)> =
                newly.iter().map(|&(local, v)| (scope[local], v)).collect();
            for (var, v) in globals {
                self.remove_global(var, v, Some(c));
                if self.sizes[var] == 0 {
                    self.stats.fails += 1;
                    self.clear_queue();
                    return false;
                }
            }
            if self.options.skip_entailed && self.props[c].is_domain_entailed().unwrap_or(false) {
                self.entailed[c] = true;
                self.trail.push(GlobalUndo::Entailed(c));
                self.stats.entailment_events += 1;
            }
        }
        true
    }

    fn observe(&mut self, c: usize) {
        let p = &self.props[c];
        if p.branch_edge_removals() > p.initial_edge_count() as u64 {
            self.stats.edge_bound_violations += 1;
        }
        if p.branch_reduce_work() > p.reduce_work_bound() {
            self.stats.reduce_work_violations += 1;
        }
        let nodes: usize = self
            .props
            .iter()
            .map(PropagatorState::live_node_count)
            .sum();
        let edges: usize = self
            .props
            .iter()
            .map(PropagatorState::live_edge_count)
            .sum();
        self.stats.peak_live_nodes = self.stats.peak_live_nodes.max(nodes as u64);
        self.stats.peak_live_edges = self.stats.peak_live_edges.max(edges as u64);
    }

    fn clear_queue(&mut self) {
        for c in self.queue.drain(..) {
            self.queued[c] = false;
            self.pending[c].clear();
        }
    }

    pub fn push_phase(&mut self) {
        self.marks.push(self.trail.len());
        for p in &mut self.props {
            p.push_phase();
        }
    }

    pub fn pop_phase(&mut self) -> Result<(), InstanceError> {
        let mark = self
            .marks
            .pop()
            .ok_or(crate::error::PropagatorError::NoOpenPhase)?;
        while self.trail.len() > mark {
            match self.trail.pop().expect("above mark") {
                GlobalUndo::Value { var, index } => {
                    self.present[var][index] = true;
                    self.sizes[var] += 1;
                }
                GlobalUndo::Entailed(c) => self.entailed[c] = false,
            }
        }
        for p in &mut self.props {
            p.backtrack()?;
        }
        Ok(())
    }

    /// Removes values from the global domains and propagates. False on a
    /// wipe-out.
    pub fn restrict(&mut self, removals: &[(usize, Value)]) -> bool {
        for &(var, v) in removals {
            self.remove_global(var, v, None);
            if self.sizes[var] == 0 {
                self.stats.fails += 1;
                self.clear_queue();
                return false;
            }
        }
        self.propagate_fixpoint()
    }

    /// Restricts `var` to `value` and propagates. False on a wipe-out.
    pub fn assign(&mut self, var: usize, value: Value) -> bool {
        for v in self.domain(var) {
            if v != value {
                self.remove_global(var, v, None);
            }
        }
        self.propagate_fixpoint()
    }

    fn choose(&self) -> Option<usize> {
        let open = (0..self.csp.num_vars()).filter(|&i| self.sizes[i] > 1);
        match self.options.var_order {
            VarOrder::Static => open.min(),
            VarOrder::SmallestDomain => open.min_by_key(|&i| (self.sizes[i], i)),
        }
    }

    fn dfs(&mut self) -> Result<SolveOutcome, InstanceError> {
        let Some(var) = self.choose() else {
            let solution: Vec<Value> = (0..self.csp.num_vars())
                .map(|i| self.domain(i)[0])
                .collect();
            for c in &self.csp.constraints {
                let proj: Vec<Value> = c.scope.iter().map(|&i| solution[i]).collect();
                if !c.mdd.contains(&proj) {
                    return Err(InstanceError::Invalid(format!(
                        "search produced {solution:?}, which a constraint rejects"
                    )));
                }
            }
            return Ok(SolveOutcome::Solution(solution));
        };
        for value in self.domain(var) {
            if self
                .options
                .max_phases
                .is_some_and(|m| self.stats.phases >= m)
            {
                return Ok(SolveOutcome::LimitReached);
            }
            self.stats.phases += 1;
            self.push_phase();
            let outcome = if self.assign(var, value) {
                self.dfs()?
            } else {
                SolveOutcome::Unsat
            };
            if outcome != SolveOutcome::Unsat {
                return Ok(outcome);
            }
            self.pop_phase()?;
        }
        Ok(SolveOutcome::Unsat)
    }

    /// Runs the search to the first solution.
    pub fn run(&mut self) -> Result<SolveOutcome, InstanceError> {
        if self.csp.domains.iter().any(Vec::is_empty) || !self.initialize() {
            return Ok(SolveOutcome::Unsat);
        }
        self.dfs()
    }

    fn finish_stats(&mut self) {
        let s = &mut self.stats;
        s.remove_edge_calls = 0;
        s.merges = 0;
        s.redirects = 0;
        s.collapses = 0;
        s.redirect_violations = 0;
        for p in &self.props {
            let ps = p.stats();
            s.remove_edge_calls += ps.remove_edge_calls;
            s.merges += ps.merges;
            s.redirects += ps.redirects;
            s.collapses += ps.collapses;
            s.redirect_violations += ps.redirect_violations;
        }
    }
}

/// Searches `csp` for its first solution under `options`.
pub fn solve(csp: &Csp, options: SolverOptions) -> Result<SolveResult, InstanceError> {
    let mut solver = Solver::new(csp, options)?;
    let outcome = solver.run()?;
    solver.finish_stats();
    Ok(SolveResult {
        outcome,
        constraint_sizes: solver
            .props
            .iter()
            .map(|p| (p.initial_node_count(), p.initial_edge_count()))
            .collect(),
        stats: solver.stats,
    })
}
