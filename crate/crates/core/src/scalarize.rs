//! The scalarized harvest-scheduling MILP and its solution.
//!
//! Column order: `x_jt` stand-major (`j·n_T + t`), then one `phi` per
//! meta-objective in canonical order, then `varphi`. Row order: the `k`
//! rows linking `varphi` to every weighted deviation, the `2k` rows bounding
//! each deviation from both sides, then one assignment row per stand.

use std::cell::Cell;
use std::time::Instant;

use harvest_milp::{
    IncumbentHeuristic, MilpBackend, MilpSolution, MilpStatus, Model, Sense, SolveOptions, VarKind,
};
use serde::{Deserialize, Serialize};

use crate::domain::{HarvestSchedule, MetaObjectiveKey, ProblemInstance};
use crate::error::{CoreError, Result};
use crate::scenario::Scenario;

pub const DEFAULT_EPSILON: f64 = 1e-4;

/// Largest number of schedules [`brute_force_solve`] will enumerate.
pub const ENUMERATION_LIMIT: f64 = 1e7;

/// Aspiration levels, weights and augmentation coefficient, one entry per
/// meta-objective in canonical order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceConfig {
    pub aspiration: Vec<f64>,
    pub weights: Vec<f64>,
    pub epsilon: f64,
}

impl ReferenceConfig {
    /// Zero aspirations and unit weights for `k` meta-objectives.
    pub fn neutral(k: usize) -> Self {
        ReferenceConfig {
            aspiration: vec![0.0; k],
            weights: vec![1.0; k],
            epsilon: DEFAULT_EPSILON,
        }
    }

    pub fn with_weights(mut self, weights: Vec<f64>) -> Self {
        self.weights = weights;
        self
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn check(&self, k: usize) -> Result<()> {
        if self.weights.len() != k || self.aspiration.len() != k {
            return Err(CoreError::DimensionMismatch(format!(
                "reference config has {} weights and {} aspirations, expected {k}",
                self.weights.len(),
                self.aspiration.len()
            )));
        }
        if let Some(w) = self.weights.iter().find(|w| !(**w > 0.0) || !w.is_finite()) {
            return Err(CoreError::InvalidParameter(format!(
                "weight {w} must be positive"
            )));
        }
        if self.aspiration.iter().any(|z| !z.is_finite()) {
            return Err(CoreError::InvalidParameter(
                "non-finite aspiration level".into(),
            ));
        }
        if !(self.epsilon > 0.0) || !self.epsilon.is_finite() {
            return Err(CoreError::InvalidParameter(format!(
                "epsilon {} must be positive",
                self.epsilon
            )));
        }
        Ok(())
    }

    /// `max(0, max_i w_i(f_i − z_i)) + ε Σ_i w_i(f_i − z_i)`.
    pub fn scalarize(&self, f: &[f64]) -> f64 {
        let mut worst = 0.0f64;
        let mut sum = 0.0;
        for ((&v, &w), &z) in f.iter().zip(&self.weights).zip(&self.aspiration) {
            let d = w * (v - z);
            worst = worst.max(d);
            sum += d;
        }
        worst + self.epsilon * sum
    }
}

/// Column positions inside a scalarized model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelLayout {
    pub stands: usize,
    pub periods: usize,
    pub assortments: usize,
    pub scenarios: usize,
}

impl ModelLayout {
    pub fn new(inst: &ProblemInstance, scenarios: usize) -> Self {
        ModelLayout {
            stands: inst.num_stands(),
            periods: inst.periods,
            assortments: inst.num_assortments(),
            scenarios,
        }
    }

    pub fn meta_objectives(&self) -> usize {
        self.assortments * self.periods * self.scenarios
    }

    pub fn x(&self, j: usize, t: usize) -> usize {
        j * self.periods + t
    }

    pub fn phi(&self, i: usize) -> usize {
        self.stands * self.periods + i
    }

    pub fn varphi(&self) -> usize {
        self.stands * self.periods + self.meta_objectives()
    }

    pub fn num_columns(&self) -> usize {
        self.varphi() + 1
    }

    /// Reads the schedule off a column vector (`x_jt > 0.5`).
    pub fn schedule(&self, x: &[f64]) -> HarvestSchedule {
        let mut s = HarvestSchedule::unharvested(self.stands);
        for j in 0..self.stands {
            let t = (0..self.periods).find(|&t| x[self.x(j, t)] > 0.5);
            s.assign(j, t);
        }
        s
    }
}

fn check_scenarios(inst: &ProblemInstance, scenarios: &[Scenario]) -> Result<()> {
    if scenarios.is_empty() {
        return Err(CoreError::DimensionMismatch(
            "at least one scenario is required".into(),
        ));
    }
    for sc in scenarios {
        if sc.volumes.len() != inst.num_assortments()
            || sc.volumes.iter().any(|r| r.len() != inst.num_stands())
        {
            return Err(CoreError::DimensionMismatch(format!(
                "scenario {} volumes must be {} x {}",
                sc.id,
                inst.num_assortments(),
                inst.num_stands()
            )));
        }
    }
    Ok(())
}

pub fn build_scalarized_milp(
    inst: &ProblemInstance,
    scenarios: &[Scenario],
    reference: &ReferenceConfig,
) -> Result<Model> {
    check_scenarios(inst, scenarios)?;
    let lay = ModelLayout::new(inst, scenarios.len());
    let k = lay.meta_objectives();
    reference.check(k)?;
    let eps = reference.epsilon;
    let mut m = Model::new(format!("{}-scalarized", inst.name));
    for j in 0..lay.stands {
        for t in 0..lay.periods {
            m.add_binary(format!("x_{}_{}", j + 1, t + 1), 0.0);
        }
    }
    for i in 0..k {
        let key = MetaObjectiveKey::from_index(i, lay.periods, lay.scenarios);
        m.add_var(
            format!(
                "phi_{}_{}_{}",
                key.assortment + 1,
                key.period + 1,
                key.scenario + 1
            ),
            VarKind::Continuous,
            0.0,
            f64::INFINITY,
            eps * reference.weights[i],
        );
    }
    m.add_var("varphi", VarKind::Continuous, 0.0, f64::INFINITY, 1.0);
    m.objective_offset = -eps
        * reference
            .weights
            .iter()
            .zip(&reference.aspiration)
            .map(|(w, z)| w * z)
            .sum::<f64>();

    for i in 0..k {
        let (w, z) = (reference.weights[i], reference.aspiration[i]);
        m.add_constraint(
            format!("link_{}", i + 1),
            vec![(lay.varphi(), 1.0), (lay.phi(i), -w)],
            Sense::Ge,
            -w * z,
        );
    }
    for i in 0..k {
        let key = MetaObjectiveKey::from_index(i, lay.periods, lay.scenarios);
        let vols = &scenarios[key.scenario].volumes[key.assortment];
        let d = inst.demand.get(key.assortment, key.period);
        let harvest: Vec<(usize, f64)> = vols
            .iter()
            .enumerate()
            .filter(|(_, &v)| v != 0.0)
            .map(|(j, &v)| (lay.x(j, key.period), v))
            .collect();
        let mut over = vec![(lay.phi(i), 1.0)];
        over.extend(harvest.iter().map(|&(c, v)| (c, -v)));
        m.add_constraint(format!("over_{}", i + 1), over, Sense::Ge, -d);
        let mut under = vec![(lay.phi(i), 1.0)];
        under.extend(harvest.iter().copied());
        m.add_constraint(format!("under_{}", i + 1), under, Sense::Ge, d);
    }
    for j in 0..lay.stands {
        m.add_constraint(
            format!("assign_{}", j + 1),
            (0..lay.periods).map(|t| (lay.x(j, t), 1.0)).collect(),
            Sense::Le,
            1.0,
        );
    }
    Ok(m)
}

/// Minimizes the deviation of assortment `a` in period `t` (0-based) under
/// one scenario. Columns: one binary per stand (harvest in `t`), then `phi`.
/// Only period `t` enters the objective, so the other periods' columns and
/// the assignment rows (which reduce to `x_jt ≤ 1`) are left out.
pub fn build_single_objective_milp(
    inst: &ProblemInstance,
    scenario: &Scenario,
    a: usize,
    t: usize,
) -> Result<Model> {
    check_scenarios(inst, std::slice::from_ref(scenario))?;
    if a >= inst.num_assortments() || t >= inst.periods {
        return Err(CoreError::DimensionMismatch(format!(
            "objective ({}, {}) outside {} assortments x {} periods",
            a + 1,
            t + 1,
            inst.num_assortments(),
            inst.periods
        )));
    }
    let n = inst.num_stands();
    let vols = &scenario.volumes[a];
    let d = inst.demand.get(a, t);
    let mut m = Model::new(format!(
        "{}-ideal-{}-{}-{}",
        inst.name,
        a + 1,
        t + 1,
        scenario.id
    ));
    for j in 0..n {
        m.add_binary(format!("x_{}_{}", j + 1, t + 1), 0.0);
    }
    let phi = m.add_var(
        format!("phi_{}_{}", a + 1, t + 1),
        VarKind::Continuous,
        0.0,
        f64::INFINITY,
        1.0,
    );
    let harvest: Vec<(usize, f64)> = vols
        .iter()
        .enumerate()
        .filter(|(_, &v)| v != 0.0)
        .map(|(j, &v)| (j, v))
        .collect();
    let mut over = vec![(phi, 1.0)];
    over.extend(harvest.iter().map(|&(c, v)| (c, -v)));
    m.add_constraint("over", over, Sense::Ge, -d);
    let mut under = vec![(phi, 1.0)];
    under.extend(harvest.iter().copied());
    m.add_constraint("under", under, Sense::Ge, d);
    Ok(m)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveStatus {
    Optimal,
    GapLimit,
    NodeLimit,
    TimeLimit,
    Infeasible,
}

impl From<MilpStatus> for SolveStatus {
    fn from(s: MilpStatus) -> Self {
        match s {
            MilpStatus::Optimal => SolveStatus::Optimal,
            MilpStatus::GapLimit => SolveStatus::GapLimit,
            MilpStatus::NodeLimit => SolveStatus::NodeLimit,
            MilpStatus::TimeLimit => SolveStatus::TimeLimit,
        }
    }
}

impl SolveStatus {
    pub fn is_resource_limit(self) -> bool {
        matches!(self, SolveStatus::NodeLimit | SolveStatus::TimeLimit)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveOutcome {
    pub status: SolveStatus,
    pub schedule: HarvestSchedule,
    /// Deviations at `schedule`, canonical order.
    pub phi: Vec<f64>,
    pub varphi: f64,
    pub objective: f64,
    pub bound: f64,
    pub nodes: u64,
    pub seconds: f64,
}

impl SolveOutcome {
    /// `(objective − bound) / max(1, |objective|)`.
    pub fn gap(&self) -> f64 {
        ((self.objective - self.bound) / self.objective.abs().max(1.0)).max(0.0)
    }
}

/// Incremental evaluation of the scalarized objective. Harvest sums are
/// kept per meta-objective in canonical order.
pub(crate) struct Evaluator<'a> {
    lay: ModelLayout,
    /// `[(p·n_A + a)·n_S + j]`
    vols: Vec<f64>,
    demand: Vec<f64>,
    reference: &'a ReferenceConfig,
}

impl<'a> Evaluator<'a> {
    pub(crate) fn new(
        inst: &ProblemInstance,
        scenarios: &[Scenario],
        reference: &'a ReferenceConfig,
    ) -> Self {
        let lay = ModelLayout::new(inst, scenarios.len());
        let vols = scenarios
            .iter()
            .flat_map(|sc| sc.volumes.iter().flatten().copied())
            .collect();
        let demand = inst.demand.rows().iter().flatten().copied().collect();
        Evaluator {
            lay,
            vols,
            demand,
            reference,
        }
    }

    fn vol(&self, p: usize, a: usize, j: usize) -> f64 {
        self.vols[(p * self.lay.assortments + a) * self.lay.stands + j]
    }

    fn idx(&self, a: usize, t: usize, p: usize) -> usize {
        (a * self.lay.periods + t) * self.lay.scenarios + p
    }

    pub(crate) fn harvest(&self, schedule: &HarvestSchedule) -> Vec<f64> {
        let mut h = vec![0.0; self.lay.meta_objectives()];
        for j in 0..self.lay.stands {
            if let Some(t) = schedule.period_of(j) {
                self.shift(&mut h, j, t, 1.0);
            }
        }
        h
    }

    fn shift(&self, h: &mut [f64], j: usize, t: usize, sign: f64) {
        for a in 0..self.lay.assortments {
            for p in 0..self.lay.scenarios {
                h[self.idx(a, t, p)] += sign * self.vol(p, a, j);
            }
        }
    }

    pub(crate) fn deviations(&self, h: &[f64]) -> Vec<f64> {
        h.iter()
            .enumerate()
            .map(|(i, &v)| {
                let key = MetaObjectiveKey::from_index(i, self.lay.periods, self.lay.scenarios);
                (v - self.demand[key.assortment * self.lay.periods + key.period]).abs()
            })
            .collect()
    }

    fn value(&self, h: &[f64]) -> f64 {
        let r = self.reference;
        let mut worst = 0.0f64;
        let mut sum = 0.0;
        for (i, &v) in h.iter().enumerate() {
            let a = i / (self.lay.periods * self.lay.scenarios);
            let t = (i / self.lay.scenarios) % self.lay.periods;
            let f = (v - self.demand[a * self.lay.periods + t]).abs();
            let d = r.weights[i] * (f - r.aspiration[i]);
            worst = worst.max(d);
            sum += d;
        }
        worst + r.epsilon * sum
    }

    /// First-improvement search over single-stand moves.
    pub(crate) fn improve(&self, schedule: &mut HarvestSchedule, max_passes: usize) {
        let mut h = self.harvest(schedule);
        let mut best = self.value(&h);
        for _ in 0..max_passes {
            let mut improved = false;
            for j in 0..self.lay.stands {
                let cur = schedule.period_of(j);
                for cand in std::iter::once(None).chain((0..self.lay.periods).map(Some)) {
                    if cand == cur {
                        continue;
                    }
                    if let Some(t) = cur {
                        self.shift(&mut h, j, t, -1.0);
                    }
                    if let Some(t) = cand {
                        self.shift(&mut h, j, t, 1.0);
                    }
                    let v = self.value(&h);
                    if v < best - 1e-12 * best.abs().max(1.0) {
                        best = v;
                        schedule.assign(j, cand);
                        improved = true;
                        break;
                    }
                    if let Some(t) = cand {
                        self.shift(&mut h, j, t, -1.0);
                    }
                    if let Some(t) = cur {
                        self.shift(&mut h, j, t, 1.0);
                    }
                }
            }
            if !improved {
                break;
            }
            // drop accumulated round-off
            h = self.harvest(schedule);
            best = self.value(&h);
        }
    }

    /// Full column vector for `schedule` with tight `phi` and `varphi`.
    pub(crate) fn columns(&self, schedule: &HarvestSchedule) -> Vec<f64> {
        let lay = self.lay;
        let mut x = vec![0.0; lay.num_columns()];
        for j in 0..lay.stands {
            if let Some(t) = schedule.period_of(j) {
                x[lay.x(j, t)] = 1.0;
            }
        }
        let f = self.deviations(&self.harvest(schedule));
        let mut varphi = 0.0f64;
        for (i, &v) in f.iter().enumerate() {
            x[lay.phi(i)] = v;
            varphi = varphi.max(self.reference.weights[i] * (v - self.reference.aspiration[i]));
        }
        x[lay.varphi()] = varphi;
        x
    }
}

/// Rounds each stand to its largest LP period (when at least one half),
/// then improves the result by single-stand moves.
struct RoundAndImprove<'e, 'r> {
    eval: &'e Evaluator<'r>,
    calls: Cell<u64>,
}

impl IncumbentHeuristic for RoundAndImprove<'_, '_> {
    fn propose(&self, lp: &[f64], _incumbent: Option<&[f64]>) -> Option<Vec<f64>> {
        let n = self.calls.get();
        self.calls.set(n + 1);
        // full search at the root, then on a thinning schedule
        if n > 16 && n % 16 != 0 {
            return None;
        }
        let lay = self.eval.lay;
        let mut s = HarvestSchedule::unharvested(lay.stands);
        for j in 0..lay.stands {
            let (t, v) = (0..lay.periods)
                .map(|t| (t, lp[lay.x(j, t)]))
                .fold((0, f64::NEG_INFINITY), |b, c| if c.1 > b.1 { c } else { b });
            if v >= 0.5 {
                s.assign(j, Some(t));
            }
        }
        self.eval.improve(&mut s, 4);
        Some(self.eval.columns(&s))
    }
}

/// Solves the scalarized problem. The search starts from the improved
/// all-unharvested schedule and uses a rounding heuristic; the returned
/// deviations and objective are recomputed from the schedule.
pub fn solve_scalarized(
    inst: &ProblemInstance,
    scenarios: &[Scenario],
    reference: &ReferenceConfig,
    opts: &SolveOptions,
    backend: &dyn MilpBackend,
) -> Result<SolveOutcome> {
    let model = build_scalarized_milp(inst, scenarios, reference)?;
    let eval = Evaluator::new(inst, scenarios, reference);
    let mut start = HarvestSchedule::unharvested(inst.num_stands());
    eval.improve(&mut start, 50);
    let start_cols = eval.columns(&start);
    let heuristic = RoundAndImprove {
        eval: &eval,
        calls: Cell::new(0),
    };
    let sol = match backend.solve(&model, opts, Some(&heuristic), Some(&start_cols)) {
        Ok(sol) => sol,
        Err(harvest_milp::MilpError::Infeasible) => {
            return Ok(SolveOutcome {
                status: SolveStatus::Infeasible,
                schedule: HarvestSchedule::unharvested(inst.num_stands()),
                phi: Vec::new(),
                varphi: 0.0,
                objective: f64::INFINITY,
                bound: f64::INFINITY,
                nodes: 0,
                seconds: 0.0,
            })
        }
        Err(e) => return Err(e.into()),
    };
    Ok(outcome(&eval, &sol))
}

fn outcome(eval: &Evaluator<'_>, sol: &MilpSolution) -> SolveOutcome {
    let schedule = eval.lay.schedule(&sol.x);
    let h = eval.harvest(&schedule);
    let phi = eval.deviations(&h);
    let r = eval.reference;
    let varphi = phi
        .iter()
        .enumerate()
        .map(|(i, &f)| r.weights[i] * (f - r.aspiration[i]))
        .fold(0.0, f64::max);
    let objective = eval.value(&h);
    // deviations are non-negative and the scalarization is monotone, so
    // its value at f = 0 bounds every schedule even when no node was solved
    let floor = r.scalarize(&vec![0.0; phi.len()]);
    SolveOutcome {
        status: sol.status.into(),
        schedule,
        phi,
        varphi,
        objective,
        bound: sol.bound.max(floor).min(objective),
        nodes: sol.nodes,
        seconds: sol.elapsed.as_secs_f64(),
    }
}

/// Meta-objective values of `schedule` over `scenarios`, canonical order.
pub fn meta_objectives(
    schedule: &HarvestSchedule,
    inst: &ProblemInstance,
    scenarios: &[Scenario],
) -> Result<Vec<f64>> {
    schedule.check_dimensions(inst)?;
    check_scenarios(inst, scenarios)?;
    let r = ReferenceConfig::neutral(0);
    let eval = Evaluator::new(inst, scenarios, &r);
    Ok(eval.deviations(&eval.harvest(schedule)))
}

/// Number of schedules an exhaustive search visits, `(n_T+1)^n_S`.
pub fn schedule_count(inst: &ProblemInstance) -> f64 {
    (inst.periods as f64 + 1.0).powi(inst.num_stands() as i32)
}

/// Calls `visit` with every schedule and its meta-objective vector, in
/// lexicographic order of the assignment vector.
pub fn for_each_schedule(
    inst: &ProblemInstance,
    scenarios: &[Scenario],
    mut visit: impl FnMut(&HarvestSchedule, &[f64]),
) -> Result<()> {
    check_scenarios(inst, scenarios)?;
    let total = schedule_count(inst);
    if total > ENUMERATION_LIMIT {
        return Err(CoreError::InstanceTooLarge(total));
    }
    let r = ReferenceConfig::neutral(0);
    let eval = Evaluator::new(inst, scenarios, &r);
    let n = inst.num_stands();
    let n_t = inst.periods as u32;
    let mut digits = vec![0u32; n];
    let mut h = vec![0.0; eval.lay.meta_objectives()];
    let mut steps = 0u64;
    loop {
        let s = HarvestSchedule::from_periods(digits.clone());
        visit(&s, &eval.deviations(&h));
        // odometer, last stand fastest
        let mut pos = n;
        loop {
            if pos == 0 {
                return Ok(());
            }
            pos -= 1;
            if digits[pos] > 0 {
                eval.shift(&mut h, pos, digits[pos] as usize - 1, -1.0);
            }
            if digits[pos] < n_t {
                digits[pos] += 1;
                eval.shift(&mut h, pos, digits[pos] as usize - 1, 1.0);
                break;
            }
            digits[pos] = 0;
        }
        steps += 1;
        if steps % 4096 == 0 {
            h = eval.harvest(&HarvestSchedule::from_periods(digits.clone()));
        }
    }
}

/// Exhaustive minimization of the scalarized objective. Among equal values
/// the lexicographically smallest schedule wins.
pub fn brute_force_solve(
    inst: &ProblemInstance,
    scenarios: &[Scenario],
    reference: &ReferenceConfig,
) -> Result<SolveOutcome> {
    let started = Instant::now();
    let k = inst.num_meta_objectives(scenarios.len());
    reference.check(k)?;
    let mut best: Option<(f64, HarvestSchedule, Vec<f64>)> = None;
    let mut visited = 0u64;
    for_each_schedule(inst, scenarios, |s, f| {
        visited += 1;
        let v = reference.scalarize(f);
        if best.as_ref().map_or(true, |b| v < b.0) {
            best = Some((v, s.clone(), f.to_vec()));
        }
    })?;
    let (objective, schedule, phi) = best.expect("at least one schedule");
    let varphi = phi
        .iter()
        .enumerate()
        .map(|(i, &f)| reference.weights[i] * (f - reference.aspiration[i]))
        .fold(0.0, f64::max);
    Ok(SolveOutcome {
        status: SolveStatus::Optimal,
        schedule,
        phi,
        varphi,
        objective,
        bound: objective,
        nodes: visited,
        seconds: started.elapsed().as_secs_f64(),
    })
}

/// Result of one single-objective solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingleOutcome {
    pub status: SolveStatus,
    pub value: f64,
    pub bound: f64,
    /// Stands harvested in the objective's period.
    pub harvested: Vec<bool>,
    pub nodes: u64,
}

/// Greedy fill followed by add/drop/swap moves on `|Σ v_j y_j − d|`.
fn subset_sum_start(vols: &[f64], d: f64) -> Vec<bool> {
    let mut order: Vec<usize> = (0..vols.len()).collect();
    order.sort_by(|&a, &b| vols[b].total_cmp(&vols[a]).then(a.cmp(&b)));
    let mut y = vec![false; vols.len()];
    let mut sum = 0.0;
    for &j in &order {
        if sum + vols[j] <= d {
            y[j] = true;
            sum += vols[j];
        }
    }
    for _ in 0..20 {
        let dev = (sum - d).abs();
        let mut best = (dev, None::<(usize, Option<usize>)>);
        for j in 0..vols.len() {
            let flip = if y[j] { sum - vols[j] } else { sum + vols[j] };
            if (flip - d).abs() < best.0 {
                best = ((flip - d).abs(), Some((j, None)));
            }
        }
        for i in (0..vols.len()).filter(|&i| y[i]) {
            for j in (0..vols.len()).filter(|&j| !y[j]) {
                let s = sum - vols[i] + vols[j];
                if (s - d).abs() < best.0 {
                    best = ((s - d).abs(), Some((i, Some(j))));
                }
            }
        }
        match best.1 {
            None => break,
            Some((j, None)) => {
                sum += if y[j] { -vols[j] } else { vols[j] };
                y[j] = !y[j];
            }
            Some((i, Some(j))) => {
                y[i] = false;
                y[j] = true;
                sum += vols[j] - vols[i];
            }
        }
    }
    y
}

pub fn solve_single_objective(
    inst: &ProblemInstance,
    scenario: &Scenario,
    a: usize,
    t: usize,
    opts: &SolveOptions,
    backend: &dyn MilpBackend,
) -> Result<SingleOutcome> {
    let model = build_single_objective_milp(inst, scenario, a, t)?;
    let vols = &scenario.volumes[a];
    let d = inst.demand.get(a, t);
    let y0 = subset_sum_start(vols, d);
    let value_of = |y: &[bool]| {
        let s: f64 = vols.iter().zip(y).filter(|(_, &b)| b).map(|(v, _)| v).sum();
        (s - d).abs()
    };
    let mut start: Vec<f64> = y0.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
    start.push(value_of(&y0));
    let sol = backend.solve(&model, opts, None, Some(&start))?;
    let harvested: Vec<bool> = sol.x[..vols.len()].iter().map(|&v| v > 0.5).collect();
    let value = value_of(&harvested);
    Ok(SingleOutcome {
        status: sol.status.into(),
        value,
        bound: sol.bound.min(value).max(0.0),
        harvested,
        nodes: sol.nodes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::fixtures::single_assortment;
    use crate::scenario::named_scenarios;
    use harvest_milp::{solve_lp, BuiltinBackend, LpOptions};

    fn nominal(inst: &ProblemInstance) -> Vec<Scenario> {
        vec![named_scenarios(inst)[1].clone()]
    }

    #[test]
    fn tiny_model_counts() {
        let inst = single_assortment(&[10.0], 1, 5.0);
        let m =
            build_scalarized_milp(&inst, &nominal(&inst), &ReferenceConfig::neutral(1)).unwrap();
        assert_eq!(m.num_binaries(), 1);
        assert_eq!(m.num_continuous(), 2);
        assert_eq!(m.num_constraints(), 4);
    }

    #[test]
    fn single_objective_subset() {
        let inst = single_assortment(&[10.0, 20.0], 1, 25.0);
        let sc = &nominal(&inst)[0];
        let out = solve_single_objective(&inst, sc, 0, 0, &SolveOptions::exact(), &BuiltinBackend)
            .unwrap();
        assert_eq!(out.status, SolveStatus::Optimal);
        assert!((out.value - 5.0).abs() < 1e-9);

        let inst = single_assortment(&[10.0, 20.0], 1, 0.0);
        let sc = &nominal(&inst)[0];
        let out = solve_single_objective(&inst, sc, 0, 0, &SolveOptions::exact(), &BuiltinBackend)
            .unwrap();
        assert_eq!(out.value, 0.0);
        assert_eq!(out.harvested, vec![false, false]);

        let inst = single_assortment(&[17.5], 1, 17.5);
        let sc = &nominal(&inst)[0];
        let out = solve_single_objective(&inst, sc, 0, 0, &SolveOptions::exact(), &BuiltinBackend)
            .unwrap();
        assert_eq!(out.value, 0.0);
    }

    #[test]
    fn zero_volume_relaxation() {
        // x is irrelevant, so phi = D and varphi = max w·D
        let inst = single_assortment(&[0.0], 2, 7.0);
        let r = ReferenceConfig::neutral(2).with_weights(vec![3.0, 1.0]);
        let m = build_scalarized_milp(&inst, &nominal(&inst), &r).unwrap();
        let lp = solve_lp(&m.relaxed(), &LpOptions::default()).unwrap();
        let lay = ModelLayout::new(&inst, 1);
        assert!((lp.x[lay.phi(0)] - 7.0).abs() < 1e-9);
        assert!((lp.x[lay.phi(1)] - 7.0).abs() < 1e-9);
        assert!((lp.x[lay.varphi()] - 21.0).abs() < 1e-9);
        assert!((lp.objective - (21.0 + 1e-4 * 28.0)).abs() < 1e-9);

        let out = solve_scalarized(
            &inst,
            &nominal(&inst),
            &r,
            &SolveOptions::default(),
            &BuiltinBackend,
        )
        .unwrap();
        assert_eq!(out.schedule, HarvestSchedule::unharvested(1));
    }

    #[test]
    fn empty_instance_relaxation() {
        let mut inst = single_assortment(&[], 2, 4.0);
        inst.demand = crate::domain::DemandTable::new(vec![vec![4.0, 6.0]]);
        let sc = Scenario {
            id: crate::scenario::ScenarioId::Nominal,
            volumes: vec![vec![]],
        };
        let m = build_scalarized_milp(&inst, &[sc], &ReferenceConfig::neutral(2)).unwrap();
        assert_eq!(m.num_binaries(), 0);
        let lp = solve_lp(&m, &LpOptions::default()).unwrap();
        assert!((lp.x[0] - 4.0).abs() < 1e-12 && (lp.x[1] - 6.0).abs() < 1e-12);
    }

    #[test]
    fn brute_force_counts() {
        let inst = single_assortment(&[1.0], 1, 1.0);
        let out = brute_force_solve(&inst, &nominal(&inst), &ReferenceConfig::neutral(1)).unwrap();
        assert_eq!(out.nodes, 2);
        assert_eq!(out.schedule.as_slice(), &[1]);

        let inst = single_assortment(&[1.0, 2.0, 3.0], 2, 3.0);
        let out = brute_force_solve(&inst, &nominal(&inst), &ReferenceConfig::neutral(2)).unwrap();
        assert_eq!(out.nodes, 27);
        // {3} and {1,2} cover both periods exactly; [1,1,2] is the smallest
        assert_eq!(out.schedule.as_slice(), &[1, 1, 2]);
        assert!(out.objective.abs() < 1e-12);
    }

    #[test]
    fn brute_force_guard() {
        let inst = single_assortment(&[1.0; 15], 2, 3.0);
        let err =
            brute_force_solve(&inst, &nominal(&inst), &ReferenceConfig::neutral(2)).unwrap_err();
        assert!(matches!(err, CoreError::InstanceTooLarge(_)));
    }

    #[test]
    fn improve_reaches_exact_partition() {
        let inst = single_assortment(&[10.0, 20.0, 30.0], 2, 30.0);
        let r = ReferenceConfig::neutral(2);
        let scen = nominal(&inst);
        let eval = Evaluator::new(&inst, &scen, &r);
        let mut s = HarvestSchedule::unharvested(3);
        eval.improve(&mut s, 10);
        let f = eval.deviations(&eval.harvest(&s));
        assert!(r.scalarize(&f) <= 10.0 + 1e-9);
    }

    #[test]
    fn screening_bound_is_finite() {
        let inst = single_assortment(&[10.0, 20.0, 30.0], 2, 25.0);
        let mut r = ReferenceConfig::neutral(2);
        r.aspiration = vec![3.0, 4.0];
        let opts = SolveOptions::default().with_node_limit(0);
        let out = solve_scalarized(&inst, &nominal(&inst), &r, &opts, &BuiltinBackend).unwrap();
        assert_eq!(out.status, SolveStatus::NodeLimit);
        assert_eq!(out.bound, r.scalarize(&[0.0, 0.0]));
        assert!(out.bound <= out.objective);
    }
}
