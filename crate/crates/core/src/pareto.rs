//! Ideal and nadir estimates, the emphasis weight schedule, archive
//! generation and dominance audits.

use std::fmt;
use std::str::FromStr;

use harvest_milp::{MilpBackend, SolveOptions};
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::domain::{HarvestSchedule, MetaObjectiveKey, ProblemInstance, VOLUME_TOL};
use crate::error::{CoreError, Result};
use crate::fingerprint::{instance_fingerprint, json_fingerprint};
use crate::scalarize::{
    for_each_schedule, meta_objectives, solve_scalarized, solve_single_objective, ReferenceConfig,
    SingleOutcome, SolveStatus,
};
use crate::scenario::{Scenario, ScenarioId};

/// Per meta-objective minima over single-objective problems, canonical order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdealTensor {
    pub assortments: usize,
    pub periods: usize,
    pub scenarios: Vec<ScenarioId>,
    /// Best deviation found.
    pub values: Vec<f64>,
    /// Proven lower bound; equals `values` wherever the solve finished.
    pub bounds: Vec<f64>,
}

impl IdealTensor {
    pub fn index(&self, a: usize, t: usize, p: usize) -> usize {
        MetaObjectiveKey::new(a, t, p).index(self.periods, self.scenarios.len())
    }

    pub fn get(&self, a: usize, t: usize, p: usize) -> f64 {
        self.values[self.index(a, t, p)]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Entries whose value is not proven minimal. Solves close the tree up
    /// to the solver's own tolerance, so a relative slack of 1e-6 is allowed.
    pub fn unproven(&self) -> usize {
        self.values
            .iter()
            .zip(&self.bounds)
            .filter(|(v, b)| *v - *b > 1e-6 * v.abs().max(1.0))
            .count()
    }
}

#[derive(Debug, Clone)]
pub struct IdealRun {
    pub tensor: IdealTensor,
    /// Whether the one-period shortcut was applied.
    pub shortcut: bool,
    pub solves: usize,
    pub warnings: Vec<String>,
}

/// Solves every single-objective problem over `scenarios`. With
/// `use_period_shortcut` and period-uniform demand only the first period is
/// solved per (assortment, scenario) and copied to the others, since those
/// problems are identical.
pub fn compute_ideals(
    inst: &ProblemInstance,
    scenarios: &[Scenario],
    use_period_shortcut: bool,
    opts: &SolveOptions,
    backend: &dyn MilpBackend,
) -> Result<IdealRun> {
    let mut warnings = Vec::new();
    let shortcut = use_period_shortcut && inst.demand.is_period_uniform();
    if use_period_shortcut && !shortcut {
        let msg = "demand differs between periods; period shortcut ignored".to_string();
        log::warn!("{msg}");
        warnings.push(msg);
    }
    let (n_a, n_t, s) = (inst.num_assortments(), inst.periods, scenarios.len());
    let solved_periods = if shortcut { 1.min(n_t) } else { n_t };
    let jobs: Vec<(usize, usize, usize)> = (0..n_a)
        .flat_map(|a| (0..solved_periods).flat_map(move |t| (0..s).map(move |p| (a, t, p))))
        .collect();
    let results: Vec<SingleOutcome> = jobs
        .par_iter()
        .map(|&(a, t, p)| solve_single_objective(inst, &scenarios[p], a, t, opts, backend))
        .collect::<Result<_>>()?;

    let k = n_a * n_t * s;
    let mut values = vec![0.0; k];
    let mut bounds = vec![0.0; k];
    for (&(a, t, p), r) in jobs.iter().zip(&results) {
        let targets: Vec<usize> = if shortcut {
            (0..n_t).collect()
        } else {
            vec![t]
        };
        for tt in targets {
            let i = MetaObjectiveKey::new(a, tt, p).index(n_t, s);
            values[i] = r.value;
            bounds[i] = r.bound;
        }
    }
    let tensor = IdealTensor {
        assortments: n_a,
        periods: n_t,
        scenarios: scenarios.iter().map(|s| s.id).collect(),
        values,
        bounds,
    };
    let unproven = tensor.unproven();
    if unproven > 0 {
        let msg = format!("{unproven} of {k} ideal values are not proven optimal");
        log::warn!("{msg}");
        warnings.push(msg);
    }
    Ok(IdealRun {
        tensor,
        shortcut,
        solves: jobs.len(),
        warnings,
    })
}

/// Per-assortment minimum and maximum over periods and scenarios.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdealSummary {
    pub assortment: usize,
    pub min: f64,
    pub max: f64,
}

pub fn summarize_ideals(ideals: &IdealTensor) -> Result<Vec<IdealSummary>> {
    if ideals.is_empty() {
        return Err(CoreError::InvalidParameter("empty ideal tensor".into()));
    }
    let block = ideals.periods * ideals.scenarios.len();
    Ok(ideals
        .values
        .chunks(block)
        .enumerate()
        .map(|(a, vals)| IdealSummary {
            assortment: a,
            min: vals.iter().cloned().fold(f64::INFINITY, f64::min),
            max: vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        })
        .collect())
}

/// Payoff-table estimate of the nadir point; always approximate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NadirEstimate {
    pub values: Vec<f64>,
    pub approximate: bool,
}

/// Evaluates each single-objective optimizer (its stands harvested in its
/// own period, nothing else) on every meta-objective and takes column maxima.
pub fn estimate_nadir(
    inst: &ProblemInstance,
    scenarios: &[Scenario],
    ideals: &IdealTensor,
    opts: &SolveOptions,
    backend: &dyn MilpBackend,
) -> Result<NadirEstimate> {
    let (n_t, s) = (inst.periods, scenarios.len());
    let k = inst.num_meta_objectives(s);
    if ideals.len() != k || ideals.scenarios.len() != s {
        return Err(CoreError::DimensionMismatch(format!(
            "ideal tensor has {} entries, expected {k}",
            ideals.len()
        )));
    }
    let rows: Vec<Vec<f64>> = (0..k)
        .into_par_iter()
        .map(|i| {
            let key = MetaObjectiveKey::from_index(i, n_t, s);
            let r = solve_single_objective(
                inst,
                &scenarios[key.scenario],
                key.assortment,
                key.period,
                opts,
                backend,
            )?;
            let mut sched = HarvestSchedule::unharvested(inst.num_stands());
            for (j, &h) in r.harvested.iter().enumerate() {
                if h {
                    sched.assign(j, Some(key.period));
                }
            }
            meta_objectives(&sched, inst, scenarios)
        })
        .collect::<Result<_>>()?;
    let values = (0..k)
        .map(|i| rows.iter().map(|r| r[i]).fold(ideals.values[i], f64::max))
        .collect();
    Ok(NadirEstimate {
        values,
        approximate: true,
    })
}

/// Which meta-objective a weight vector emphasizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WeightLabel {
    /// 0-based canonical meta-objective index.
    Emphasis(usize),
    Neutral,
}

impl fmt::Display for WeightLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightLabel::Emphasis(i) => write!(f, "emphasis-{}", i + 1),
            WeightLabel::Neutral => f.write_str("neutral"),
        }
    }
}

impl FromStr for WeightLabel {
    type Err = CoreError;

    fn from_str(s: &str) -> Result<Self> {
        if s == "neutral" {
            return Ok(WeightLabel::Neutral);
        }
        s.strip_prefix("emphasis-")
            .and_then(|i| i.parse::<usize>().ok())
            .filter(|&i| i >= 1)
            .map(|i| WeightLabel::Emphasis(i - 1))
            .ok_or_else(|| CoreError::format("weight label", format!("unknown label {s:?}")))
    }
}

impl Serialize for WeightLabel {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for WeightLabel {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?
            .parse()
            .map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightSchedule {
    pub weights: Vec<Vec<f64>>,
    pub labels: Vec<WeightLabel>,
}

impl WeightSchedule {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Divides every weight by the objective's `nadir − ideal` range.
    /// Objectives with a range below the volume tolerance keep their weight.
    pub fn normalize_by_range(&mut self, ideal: &[f64], nadir: &[f64]) -> Result<()> {
        let k = self.weights.first().map_or(0, Vec::len);
        if ideal.len() != k || nadir.len() != k {
            return Err(CoreError::DimensionMismatch(format!(
                "range vectors must have {k} entries"
            )));
        }
        for w in &mut self.weights {
            for i in 0..k {
                let range = nadir[i] - ideal[i];
                if range > VOLUME_TOL {
                    w[i] /= range;
                }
            }
        }
        Ok(())
    }
}

/// One vector per meta-objective with `emphasis` at that position and `base`
/// elsewhere, followed by the all-`base` neutral vector.
pub fn generate_weight_schedule(k: usize, emphasis: f64, base: f64) -> Result<WeightSchedule> {
    if k == 0 {
        return Err(CoreError::InvalidParameter(
            "weight schedule needs k >= 1".into(),
        ));
    }
    if !(emphasis > 0.0 && base > 0.0 && emphasis.is_finite() && base.is_finite()) {
        return Err(CoreError::InvalidParameter(format!(
            "weights must be positive, got emphasis {emphasis} and base {base}"
        )));
    }
    if emphasis == base {
        log::warn!(
            "emphasis equals base weight; all {} weight vectors coincide",
            k + 1
        );
    }
    let mut weights = Vec::with_capacity(k + 1);
    let mut labels = Vec::with_capacity(k + 1);
    for i in 0..k {
        let mut w = vec![base; k];
        w[i] = emphasis;
        weights.push(w);
        labels.push(WeightLabel::Emphasis(i));
    }
    weights.push(vec![base; k]);
    labels.push(WeightLabel::Neutral);
    Ok(WeightSchedule { weights, labels })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArchiveEntry {
    /// 1-based, position in the weight schedule.
    pub id: u32,
    pub label: WeightLabel,
    pub weights: Vec<f64>,
    pub schedule: HarvestSchedule,
    /// Meta-objective values over the optimization scenarios.
    pub objectives: Vec<f64>,
    pub scalarized: f64,
    pub bound: f64,
    pub status: SolveStatus,
    pub nodes: u64,
    pub seconds: f64,
    /// Earlier entry with the same schedule.
    pub duplicate_of: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionArchive {
    pub instance_fingerprint: String,
    pub config_fingerprint: String,
    pub scenarios: Vec<ScenarioId>,
    pub assortments: usize,
    pub periods: usize,
    pub epsilon: f64,
    pub aspiration: Vec<f64>,
    pub entries: Vec<ArchiveEntry>,
}

impl SolutionArchive {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entry(&self, id: u32) -> Option<&ArchiveEntry> {
        self.entries.iter().find(|e| e.id == id)
    }

    pub fn ids(&self) -> Vec<u32> {
        self.entries.iter().map(|e| e.id).collect()
    }

    /// Fingerprint over the identity of the archive: its inputs and the
    /// schedules, not timings.
    pub fn fingerprint(&self) -> String {
        let schedules: Vec<(u32, &HarvestSchedule)> =
            self.entries.iter().map(|e| (e.id, &e.schedule)).collect();
        json_fingerprint(&(
            &self.instance_fingerprint,
            &self.config_fingerprint,
            &self.scenarios,
            schedules,
        ))
    }

    /// Checks that every stored objective vector reproduces from its schedule.
    pub fn verify(&self, inst: &ProblemInstance, scenarios: &[Scenario]) -> Result<()> {
        if instance_fingerprint(inst) != self.instance_fingerprint {
            return Err(CoreError::FingerprintMismatch(
                "archive was built for a different instance".into(),
            ));
        }
        let ids: Vec<ScenarioId> = scenarios.iter().map(|s| s.id).collect();
        if ids != self.scenarios {
            return Err(CoreError::FingerprintMismatch(
                "archive was built for different scenarios".into(),
            ));
        }
        for e in &self.entries {
            let f = meta_objectives(&e.schedule, inst, scenarios)?;
            let worst = f
                .iter()
                .zip(&e.objectives)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            if f.len() != e.objectives.len() || worst > VOLUME_TOL {
                return Err(CoreError::format(
                    "archive",
                    format!("entry {} does not reproduce (off by {worst})", e.id),
                ));
            }
        }
        Ok(())
    }
}

/// Fingerprint of everything that determines an archive besides the instance.
pub fn archive_config_fingerprint(
    scenarios: &[Scenario],
    schedule: &WeightSchedule,
    base: &ReferenceConfig,
    opts: &SolveOptions,
) -> String {
    let ids: Vec<String> = scenarios.iter().map(|s| s.id.to_string()).collect();
    let volumes: Vec<&Vec<Vec<f64>>> = scenarios.iter().map(|s| &s.volumes).collect();
    json_fingerprint(&(ids, volumes, schedule, &base.aspiration, base.epsilon, opts))
}

/// One scalarized solve per weight vector, all sharing the aspiration levels
/// and ε of `base`. Solves that stop on a limit keep their incumbent and
/// status; the batch continues.
pub fn generate_archive(
    inst: &ProblemInstance,
    scenarios: &[Scenario],
    schedule: &WeightSchedule,
    base: &ReferenceConfig,
    opts: &SolveOptions,
    backend: &dyn MilpBackend,
) -> Result<SolutionArchive> {
    let k = inst.num_meta_objectives(scenarios.len());
    base.check(k)?;
    if schedule.weights.iter().any(|w| w.len() != k) {
        return Err(CoreError::DimensionMismatch(format!(
            "weight vectors must have {k} entries"
        )));
    }
    let outcomes: Vec<_> = schedule
        .weights
        .par_iter()
        .map(|w| {
            let r = base.clone().with_weights(w.clone());
            solve_scalarized(inst, scenarios, &r, opts, backend)
        })
        .collect::<Result<_>>()?;

    let mut entries: Vec<ArchiveEntry> = Vec::with_capacity(outcomes.len());
    for (n, (out, (w, label))) in outcomes
        .into_iter()
        .zip(schedule.weights.iter().zip(&schedule.labels))
        .enumerate()
    {
        if out.status.is_resource_limit() {
            log::warn!(
                "weight vector {label} stopped on {:?} at gap {:.3e}",
                out.status,
                out.gap()
            );
        }
        let duplicate_of = entries
            .iter()
            .find(|e| e.schedule == out.schedule)
            .map(|e| e.duplicate_of.unwrap_or(e.id));
        entries.push(ArchiveEntry {
            id: n as u32 + 1,
            label: *label,
            weights: w.clone(),
            schedule: out.schedule,
            objectives: out.phi,
            scalarized: out.objective,
            bound: out.bound,
            status: out.status,
            nodes: out.nodes,
            seconds: out.seconds,
            duplicate_of,
        });
    }
    Ok(SolutionArchive {
        instance_fingerprint: instance_fingerprint(inst),
        config_fingerprint: archive_config_fingerprint(scenarios, schedule, base, opts),
        scenarios: scenarios.iter().map(|s| s.id).collect(),
        assortments: inst.num_assortments(),
        periods: inst.periods,
        epsilon: base.epsilon,
        aspiration: base.aspiration.clone(),
        entries,
    })
}

/// `a` dominates `b`: no worse anywhere and better somewhere, beyond `tol`.
pub fn dominates(a: &[f64], b: &[f64], tol: f64) -> bool {
    let mut better = false;
    for (x, y) in a.iter().zip(b) {
        if *x > y + tol {
            return false;
        }
        if *x < y - tol {
            better = true;
        }
    }
    better
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DominanceReport {
    /// `(dominated entry, dominating entry)` pairs.
    pub dominated: Vec<(u32, u32)>,
}

impl DominanceReport {
    pub fn is_clean(&self) -> bool {
        self.dominated.is_empty()
    }
}

/// Pairwise dominance among archive entries.
pub fn audit_pareto(archive: &SolutionArchive) -> DominanceReport {
    let mut dominated = Vec::new();
    for b in &archive.entries {
        for a in &archive.entries {
            if a.id != b.id && dominates(&a.objectives, &b.objectives, VOLUME_TOL) {
                dominated.push((b.id, a.id));
            }
        }
    }
    DominanceReport { dominated }
}

/// Checks every archive entry against every feasible schedule; the
/// dominating side of each pair is reported as id 0. Only usable where
/// exhaustive enumeration is.
pub fn audit_against_enumeration(
    archive: &SolutionArchive,
    inst: &ProblemInstance,
    scenarios: &[Scenario],
) -> Result<DominanceReport> {
    let mut flagged = vec![false; archive.len()];
    for_each_schedule(inst, scenarios, |_, f| {
        for (n, e) in archive.entries.iter().enumerate() {
            if !flagged[n] && dominates(f, &e.objectives, VOLUME_TOL) {
                flagged[n] = true;
            }
        }
    })?;
    Ok(DominanceReport {
        dominated: archive
            .entries
            .iter()
            .zip(flagged)
            .filter(|(_, f)| *f)
            .map(|(e, _)| (e.id, 0))
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::fixtures::single_assortment;
    use crate::scenario::named_scenarios;
    use harvest_milp::BuiltinBackend;

    #[test]
    fn weight_schedule_shapes() {
        let ws = generate_weight_schedule(108, 100.0, 1.0).unwrap();
        assert_eq!(ws.len(), 109);
        assert_eq!(ws.labels[108], WeightLabel::Neutral);
        assert!(ws.weights.iter().flatten().all(|&w| w > 0.0));
        let ws = generate_weight_schedule(1, 100.0, 1.0).unwrap();
        assert_eq!(ws.weights, vec![vec![100.0], vec![1.0]]);
        let ws = generate_weight_schedule(3, 2.0, 2.0).unwrap();
        assert!(ws.weights.iter().all(|w| w == &ws.weights[0]));
        assert!(generate_weight_schedule(0, 100.0, 1.0).is_err());
    }

    #[test]
    fn labels_round_trip() {
        for l in [
            WeightLabel::Neutral,
            WeightLabel::Emphasis(0),
            WeightLabel::Emphasis(107),
        ] {
            assert_eq!(l.to_string().parse::<WeightLabel>().unwrap(), l);
        }
        assert_eq!(WeightLabel::Emphasis(0).to_string(), "emphasis-1");
        assert!("emphasis-0".parse::<WeightLabel>().is_err());
    }

    #[test]
    fn ideal_of_subset_problem() {
        let inst = single_assortment(&[10.0, 20.0], 3, 25.0);
        let sc = vec![named_scenarios(&inst)[1].clone()];
        let opts = SolveOptions::exact();
        let run = compute_ideals(&inst, &sc, true, &opts, &BuiltinBackend).unwrap();
        assert!(run.shortcut);
        assert_eq!(run.solves, 1);
        assert!(run.tensor.values.iter().all(|&v| (v - 5.0).abs() < 1e-9));
        let full = compute_ideals(&inst, &sc, false, &opts, &BuiltinBackend).unwrap();
        assert_eq!(full.solves, 3);
        assert_eq!(full.tensor, run.tensor);

        let zero = single_assortment(&[10.0, 20.0], 2, 0.0);
        let sc = vec![named_scenarios(&zero)[1].clone()];
        let run = compute_ideals(&zero, &sc, true, &opts, &BuiltinBackend).unwrap();
        assert!(run.tensor.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn shortcut_ignored_for_varying_demand() {
        let mut inst = single_assortment(&[10.0, 20.0], 2, 25.0);
        inst.demand = crate::domain::DemandTable::new(vec![vec![25.0, 30.0]]);
        let sc = vec![named_scenarios(&inst)[1].clone()];
        let run =
            compute_ideals(&inst, &sc, true, &SolveOptions::exact(), &BuiltinBackend).unwrap();
        assert!(!run.shortcut);
        assert_eq!(run.warnings.len(), 1);
        assert!((run.tensor.values[1]).abs() < 1e-9);
    }

    #[test]
    fn summary_of_constant_tensor() {
        let t = IdealTensor {
            assortments: 2,
            periods: 2,
            scenarios: vec![ScenarioId::Nominal],
            values: vec![1.0, 1.0, 3.0, 4.0],
            bounds: vec![0.0; 4],
        };
        let s = summarize_ideals(&t).unwrap();
        assert_eq!((s[0].min, s[0].max), (1.0, 1.0));
        assert_eq!((s[1].min, s[1].max), (3.0, 4.0));
        assert_eq!(t.unproven(), 4);
        let closed = IdealTensor {
            bounds: vec![1.0 - 1e-9, 1.0, 3.0 - 1e-8, 3.9],
            ..t
        };
        assert_eq!(closed.unproven(), 1);
    }

    #[test]
    fn single_objective_nadir_equals_ideal() {
        let inst = single_assortment(&[10.0, 20.0], 1, 25.0);
        let sc = vec![named_scenarios(&inst)[1].clone()];
        let opts = SolveOptions::exact();
        let ideals = compute_ideals(&inst, &sc, false, &opts, &BuiltinBackend)
            .unwrap()
            .tensor;
        let nadir = estimate_nadir(&inst, &sc, &ideals, &opts, &BuiltinBackend).unwrap();
        assert_eq!(nadir.values, ideals.values);
        assert!(nadir.approximate);
    }

    #[test]
    fn duplicates_are_flagged() {
        let inst = single_assortment(&[7.0], 1, 7.0);
        let sc = vec![named_scenarios(&inst)[1].clone()];
        let ws = generate_weight_schedule(1, 100.0, 1.0).unwrap();
        let archive = generate_archive(
            &inst,
            &sc,
            &ws,
            &ReferenceConfig::neutral(1),
            &SolveOptions::exact(),
            &BuiltinBackend,
        )
        .unwrap();
        assert_eq!(archive.len(), 2);
        assert_eq!(archive.entries[0].duplicate_of, None);
        assert_eq!(archive.entries[1].duplicate_of, Some(1));
        archive.verify(&inst, &sc).unwrap();
        assert!(audit_pareto(&archive).is_clean());
    }

    #[test]
    fn injected_dominated_entry_is_reported() {
        let inst = single_assortment(&[10.0, 20.0, 30.0], 2, 30.0);
        let sc = vec![named_scenarios(&inst)[1].clone()];
        let ws = generate_weight_schedule(2, 100.0, 1.0).unwrap();
        let mut archive = generate_archive(
            &inst,
            &sc,
            &ws,
            &ReferenceConfig::neutral(2),
            &SolveOptions::exact(),
            &BuiltinBackend,
        )
        .unwrap();
        assert!(audit_pareto(&archive).is_clean());
        assert!(audit_against_enumeration(&archive, &inst, &sc)
            .unwrap()
            .is_clean());
        let mut worse = archive.entries[0].clone();
        worse.id = 99;
        worse.objectives[1] += 1.0;
        archive.entries.push(worse);
        let report = audit_pareto(&archive);
        assert!(report.dominated.iter().any(|&(d, _)| d == 99));
    }

    #[test]
    fn dominance_relation() {
        assert!(dominates(&[1.0, 2.0], &[1.0, 3.0], 0.0));
        assert!(!dominates(&[1.0, 2.0], &[1.0, 2.0], 0.0));
        assert!(!dominates(&[0.0, 4.0], &[1.0, 3.0], 0.0));
    }
}
