//! LP-based branch-and-bound.
//!
//! Nodes are described by the chain of bound changes leading to them from
//! the root; a single [`DualSimplex`] is reused for all nodes, only the
//! bounds of integer columns are swapped before each re-solve. The dual
//! simplex keeps dual feasibility across bound changes, so the previous
//! node's basis is always a valid warm start, including when best-bound
//! selection jumps across the tree.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::rc::Rc;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::{MilpError, Result};
use crate::model::Model;
use crate::simplex::{DualSimplex, LpOptions, LpStatus};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BranchingRule {
    /// Fractional part closest to 0.5; ties go to the lowest column index.
    MostFractional,
    /// Lowest-index fractional column.
    FirstFractional,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NodeSelection {
    /// Smallest parent bound first; ties prefer deeper, then older nodes.
    BestBound,
    DepthFirst,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub integrality_tol: f64,
    pub relative_gap: f64,
    pub absolute_gap: f64,
    pub node_limit: Option<u64>,
    pub time_limit: Option<Duration>,
    pub branching: BranchingRule,
    pub node_selection: NodeSelection,
    /// Record `(global bound, incumbent)` after every processed node.
    pub record_trace: bool,
    #[serde(skip)]
    pub lp: LpOptions,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            integrality_tol: 1e-6,
            relative_gap: 1e-6,
            absolute_gap: 1e-9,
            node_limit: None,
            time_limit: None,
            branching: BranchingRule::MostFractional,
            node_selection: NodeSelection::BestBound,
            record_trace: false,
            lp: LpOptions::default(),
        }
    }
}

impl SolveOptions {
    /// Options that only stop once the tree is closed up to round-off.
    pub fn exact() -> Self {
        SolveOptions {
            relative_gap: 1e-12,
            absolute_gap: 1e-10,
            ..Default::default()
        }
    }

    pub fn with_relative_gap(mut self, gap: f64) -> Self {
        self.relative_gap = gap;
        self
    }

    pub fn with_node_limit(mut self, limit: u64) -> Self {
        self.node_limit = Some(limit);
        self
    }

    pub fn with_time_limit(mut self, limit: Duration) -> Self {
        self.time_limit = Some(limit);
        self
    }

    fn prune_tolerance(&self, incumbent: f64) -> f64 {
        self.absolute_gap
            .max(self.relative_gap * incumbent.abs().max(1.0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MilpStatus {
    /// Tree closed; the incumbent is optimal up to round-off.
    Optimal,
    /// Stopped with the gap inside the requested tolerance but not closed.
    GapLimit,
    NodeLimit,
    TimeLimit,
}

impl MilpStatus {
    pub fn is_resource_limit(self) -> bool {
        matches!(self, MilpStatus::NodeLimit | MilpStatus::TimeLimit)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NodeTrace {
    pub node: u64,
    pub global_bound: f64,
    pub incumbent: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MilpSolution {
    pub status: MilpStatus,
    pub x: Vec<f64>,
    pub objective: f64,
    pub bound: f64,
    pub nodes: u64,
    pub lp_iterations: u64,
    pub elapsed: Duration,
    pub trace: Vec<NodeTrace>,
}

impl MilpSolution {
    /// `(objective - bound) / max(1, |objective|)`.
    pub fn gap(&self) -> f64 {
        ((self.objective - self.bound) / self.objective.abs().max(1.0)).max(0.0)
    }
}

/// Problem-specific source of integer-feasible points.
pub trait IncumbentHeuristic {
    /// Proposes a full variable vector given the node's LP solution and the
    /// current incumbent, or `None`.
    fn propose(&self, lp_values: &[f64], incumbent: Option<&[f64]>) -> Option<Vec<f64>>;
}

struct BoundChange {
    var: usize,
    lower: f64,
    upper: f64,
    parent: Option<Rc<BoundChange>>,
}

struct Node {
    id: u64,
    depth: u32,
    bound: f64,
    changes: Option<Rc<BoundChange>>,
    selection: NodeSelection,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Node {
    // BinaryHeap pops the greatest element.
    fn cmp(&self, other: &Self) -> Ordering {
        match self.selection {
            NodeSelection::BestBound => other
                .bound
                .total_cmp(&self.bound)
                .then(self.depth.cmp(&other.depth))
                .then(other.id.cmp(&self.id)),
            NodeSelection::DepthFirst => self.depth.cmp(&other.depth).then(self.id.cmp(&other.id)),
        }
    }
}

struct Incumbent {
    x: Vec<f64>,
    objective: f64,
}

pub fn solve_milp(model: &Model, opts: &SolveOptions) -> Result<MilpSolution> {
    solve_milp_with(model, opts, None, None)
}

/// Branch-and-bound with an optional heuristic and starting point.
pub fn solve_milp_with(
    model: &Model,
    opts: &SolveOptions,
    heuristic: Option<&dyn IncumbentHeuristic>,
    start: Option<&[f64]>,
) -> Result<MilpSolution> {
    let started = Instant::now();
    let mut lp = DualSimplex::new(model, opts.lp.clone())?;
    let int_vars: Vec<usize> = (0..model.num_vars())
        .filter(|&j| model.variables[j].kind.is_integral())
        .collect();
    let root_bounds: Vec<(f64, f64)> = model
        .variables
        .iter()
        .map(|v| {
            if v.kind.is_integral() {
                (v.lower.ceil(), v.upper.floor())
            } else {
                (v.lower, v.upper)
            }
        })
        .collect();
    for &j in &int_vars {
        let (l, u) = root_bounds[j];
        if l > u {
            return Err(MilpError::Infeasible);
        }
        lp.set_bounds(j, l, u);
    }

    let mut incumbent: Option<Incumbent> = None;
    let consider = |x: Vec<f64>, incumbent: &mut Option<Incumbent>| -> bool {
        if x.len() != model.num_vars()
            || model.max_relative_violation(&x) > 1e-7
            || !model.is_integral(&x, opts.integrality_tol)
        {
            return false;
        }
        let mut x = x;
        for &j in &int_vars {
            x[j] = x[j].round();
        }
        let obj = model.objective_value(&x);
        let better = match incumbent {
            None => true,
            Some(inc) => obj < inc.objective - 1e-12 * inc.objective.abs().max(1.0),
        };
        if better {
            *incumbent = Some(Incumbent { x, objective: obj });
        }
        better
    };
    if let Some(x0) = start {
        consider(x0.to_vec(), &mut incumbent);
    }

    let mut heap = BinaryHeap::new();
    let mut next_id = 0u64;
    heap.push(Node {
        id: next_id,
        depth: 0,
        bound: f64::NEG_INFINITY,
        changes: None,
        selection: opts.node_selection,
    });
    next_id += 1;

    let mut nodes = 0u64;
    let mut lp_iterations = 0u64;
    let mut closed_bound = f64::INFINITY;
    let mut touched: Vec<usize> = Vec::new();
    let mut trace = Vec::new();
    let mut stop: Option<MilpStatus> = None;
    let mut incomplete = false;

    while let Some(node) = heap.pop() {
        if let Some(inc) = &incumbent {
            let cutoff = inc.objective - opts.prune_tolerance(inc.objective);
            if node.bound >= cutoff {
                closed_bound = closed_bound.min(node.bound);
                if opts.node_selection == NodeSelection::BestBound {
                    // every remaining node is at least as bad
                    for rest in heap.drain() {
                        closed_bound = closed_bound.min(rest.bound);
                    }
                    break;
                }
                continue;
            }
        }
        if opts.node_limit.is_some_and(|lim| nodes >= lim) {
            stop = Some(MilpStatus::NodeLimit);
            heap.push(node);
            break;
        }
        if opts.time_limit.is_some_and(|lim| started.elapsed() >= lim) {
            stop = Some(MilpStatus::TimeLimit);
            heap.push(node);
            break;
        }
        nodes += 1;

        for &j in &touched {
            lp.set_bounds(j, root_bounds[j].0, root_bounds[j].1);
        }
        touched.clear();
        let mut chain = Vec::new();
        let mut link = node.changes.as_ref();
        while let Some(c) = link {
            chain.push(c);
            link = c.parent.as_ref();
        }
        for c in chain.iter().rev() {
            lp.set_bounds(c.var, c.lower, c.upper);
            touched.push(c.var);
        }

        let cutoff = incumbent
            .as_ref()
            .map(|inc| inc.objective - opts.prune_tolerance(inc.objective));
        let sol = lp.solve(cutoff)?;
        lp_iterations += sol.iterations as u64;
        match sol.status {
            LpStatus::Infeasible => {}
            LpStatus::Cutoff => {
                closed_bound = closed_bound.min(cutoff.unwrap_or(f64::INFINITY).max(node.bound));
            }
            LpStatus::Unbounded => {
                if node.depth == 0 {
                    return Err(MilpError::Unbounded);
                }
                incomplete = true;
            }
            LpStatus::IterationLimit => {
                log::warn!("node {} hit the simplex iteration limit", node.id);
                incomplete = true;
                closed_bound = closed_bound.min(node.bound);
            }
            LpStatus::Optimal => {
                let bound = sol.objective.max(node.bound);
                let cut = cutoff.unwrap_or(f64::INFINITY);
                if bound >= cut {
                    closed_bound = closed_bound.min(bound);
                } else {
                    if let Some(h) = heuristic {
                        if let Some(cand) = h.propose(&sol.x, incumbent.as_ref().map(|i| &i.x[..]))
                        {
                            consider(cand, &mut incumbent);
                        }
                    }
                    match select_branch(&sol.x, &int_vars, opts) {
                        None => {
                            consider(sol.x.clone(), &mut incumbent);
                            closed_bound = closed_bound.min(bound);
                        }
                        Some(j) => {
                            let v = sol.x[j];
                            let (lo, hi) = lp.bounds(j);
                            let down = Rc::new(BoundChange {
                                var: j,
                                lower: lo,
                                upper: v.floor(),
                                parent: node.changes.clone(),
                            });
                            let up = Rc::new(BoundChange {
                                var: j,
                                lower: v.ceil(),
                                upper: hi,
                                parent: node.changes.clone(),
                            });
                            // the rounding direction is explored first on ties
                            let children = if v - v.floor() >= 0.5 {
                                [down, up]
                            } else {
                                [up, down]
                            };
                            for c in children {
                                heap.push(Node {
                                    id: next_id,
                                    depth: node.depth + 1,
                                    bound,
                                    changes: Some(c),
                                    selection: opts.node_selection,
                                });
                                next_id += 1;
                            }
                        }
                    }
                }
            }
        }
        if opts.record_trace {
            let open = heap.iter().map(|n| n.bound).fold(f64::INFINITY, f64::min);
            let inc = incumbent.as_ref().map_or(f64::INFINITY, |i| i.objective);
            trace.push(NodeTrace {
                node: nodes,
                global_bound: open.min(inc),
                incumbent: inc,
            });
        }
    }

    let Some(inc) = incumbent else {
        return if stop.is_some() {
            Err(MilpError::ResourceLimit)
        } else {
            Err(MilpError::Infeasible)
        };
    };
    let open = heap.iter().map(|n| n.bound).fold(f64::INFINITY, f64::min);
    let bound = open.min(closed_bound).min(inc.objective);
    let gap = inc.objective - bound;
    let scale = inc.objective.abs().max(1.0);
    let status = match stop {
        Some(s) => s,
        None if incomplete => MilpStatus::GapLimit,
        None if gap <= 1e-9 * scale => MilpStatus::Optimal,
        None => MilpStatus::GapLimit,
    };
    Ok(MilpSolution {
        status,
        objective: inc.objective,
        x: inc.x,
        bound,
        nodes,
        lp_iterations,
        elapsed: started.elapsed(),
        trace,
    })
}

fn select_branch(x: &[f64], int_vars: &[usize], opts: &SolveOptions) -> Option<usize> {
    let mut best = None;
    let mut best_score = f64::INFINITY;
    for &j in int_vars {
        let f = x[j] - x[j].floor();
        if f <= opts.integrality_tol || f >= 1.0 - opts.integrality_tol {
            continue;
        }
        match opts.branching {
            BranchingRule::FirstFractional => return Some(j),
            BranchingRule::MostFractional => {
                let score = (f - 0.5).abs();
                if score < best_score {
                    best_score = score;
                    best = Some(j);
                }
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Sense, VarKind};

    fn knapsack() -> Model {
        // max 5a + 4b + 3c st 2a + 3b + c <= 5, 4a + b + 2c <= 11, 3a + 4b + 2c <= 8
        // optimum {a, b} = 9
        let mut m = Model::new("knap");
        let a = m.add_binary("a", -5.0);
        let b = m.add_binary("b", -4.0);
        let c = m.add_binary("c", -3.0);
        m.add_constraint("r1", vec![(a, 2.0), (b, 3.0), (c, 1.0)], Sense::Le, 5.0);
        m.add_constraint("r2", vec![(a, 4.0), (b, 1.0), (c, 2.0)], Sense::Le, 11.0);
        m.add_constraint("r3", vec![(a, 3.0), (b, 4.0), (c, 2.0)], Sense::Le, 8.0);
        m
    }

    #[test]
    fn solves_small_knapsack() {
        let sol = solve_milp(&knapsack(), &SolveOptions::default()).unwrap();
        assert_eq!(sol.status, MilpStatus::Optimal);
        assert!((sol.objective + 9.0).abs() < 1e-9, "{}", sol.objective);
    }

    #[test]
    fn general_integer_variable() {
        // min -x st 2x <= 7, x integer in [0, 10] -> x = 3
        let mut m = Model::new("int");
        let x = m.add_var("x", VarKind::Integer, 0.0, 10.0, -1.0);
        m.add_constraint("r", vec![(x, 2.0)], Sense::Le, 7.0);
        let sol = solve_milp(&m, &SolveOptions::default()).unwrap();
        assert_eq!(sol.x[x], 3.0);
    }

    #[test]
    fn infeasible_integer_program() {
        let mut m = Model::new("inf");
        let x = m.add_binary("x", 1.0);
        let y = m.add_binary("y", 1.0);
        m.add_constraint("r", vec![(x, 2.0), (y, 2.0)], Sense::Eq, 1.0);
        assert_eq!(
            solve_milp(&m, &SolveOptions::default()).unwrap_err(),
            MilpError::Infeasible
        );
    }

    #[test]
    fn node_limit_keeps_start_point() {
        let m = knapsack();
        let opts = SolveOptions::default().with_node_limit(0);
        let sol = solve_milp_with(&m, &opts, None, Some(&[0.0, 0.0, 0.0])).unwrap();
        assert_eq!(sol.status, MilpStatus::NodeLimit);
        assert_eq!(sol.objective, 0.0);
        assert!(solve_milp(&m, &opts).unwrap_err() == MilpError::ResourceLimit);
    }

    #[test]
    fn depth_first_agrees_with_best_bound() {
        let m = knapsack();
        let opts = SolveOptions {
            node_selection: NodeSelection::DepthFirst,
            branching: BranchingRule::FirstFractional,
            ..Default::default()
        };
        let sol = solve_milp(&m, &opts).unwrap();
        assert!((sol.objective + 9.0).abs() < 1e-9);
    }
}
