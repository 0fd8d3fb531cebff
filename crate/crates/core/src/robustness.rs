//! Stress testing over a scenario cohort and domain-criterion robustness.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::domain::{deviations_into, DemandTable, ProblemInstance};
use crate::error::{CoreError, Result};
use crate::fingerprint::instance_fingerprint;
use crate::pareto::SolutionArchive;
use crate::scenario::{ScenarioCohort, ScenarioId};

/// Deviations of every archive solution under every cohort scenario,
/// stored flat as `[((solution·N + scenario)·n_A + a)·n_T + t]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationMatrix {
    pub solutions: Vec<u32>,
    pub scenarios: Vec<ScenarioId>,
    pub assortments: usize,
    pub periods: usize,
    pub archive_fingerprint: String,
    pub cohort_fingerprint: String,
    pub values: Vec<f64>,
}

impl EvaluationMatrix {
    pub fn objectives(&self) -> usize {
        self.assortments * self.periods
    }

    /// `(solutions, scenarios, objectives)`.
    pub fn shape(&self) -> (usize, usize, usize) {
        (
            self.solutions.len(),
            self.scenarios.len(),
            self.objectives(),
        )
    }

    pub fn get(&self, sol: usize, scenario: usize, a: usize, t: usize) -> f64 {
        self.values[self.offset(sol, scenario) + a * self.periods + t]
    }

    /// All `n_A·n_T` deviations of one (solution, scenario) pair.
    pub fn slice(&self, sol: usize, scenario: usize) -> &[f64] {
        let o = self.offset(sol, scenario);
        &self.values[o..o + self.objectives()]
    }

    fn offset(&self, sol: usize, scenario: usize) -> usize {
        (sol * self.scenarios.len() + scenario) * self.objectives()
    }

    pub fn position(&self, id: u32) -> Option<usize> {
        self.solutions.iter().position(|&s| s == id)
    }

    pub fn check(&self) -> Result<()> {
        let (n, s, k) = self.shape();
        if self.values.len() != n * s * k {
            return Err(CoreError::DimensionMismatch(format!(
                "matrix holds {} values, shape {n}x{s}x{k} needs {}",
                self.values.len(),
                n * s * k
            )));
        }
        Ok(())
    }
}

/// Re-evaluates every archive schedule in every cohort scenario.
pub fn stress_test(
    archive: &SolutionArchive,
    cohort: &ScenarioCohort,
    inst: &ProblemInstance,
) -> Result<EvaluationMatrix> {
    let fp = instance_fingerprint(inst);
    if archive.instance_fingerprint != fp {
        return Err(CoreError::FingerprintMismatch(
            "archive was built for a different instance".into(),
        ));
    }
    if cohort.instance_fingerprint != fp {
        return Err(CoreError::FingerprintMismatch(
            "cohort was drawn for a different instance".into(),
        ));
    }
    let (n_a, n_t) = (inst.num_assortments(), inst.periods);
    let k = n_a * n_t;
    for e in &archive.entries {
        e.schedule.check_dimensions(inst)?;
    }
    for s in &cohort.scenarios {
        if s.volumes.len() != n_a || s.volumes.iter().any(|r| r.len() != inst.num_stands()) {
            return Err(CoreError::DimensionMismatch(format!(
                "scenario {} does not match the instance",
                s.id
            )));
        }
    }
    let per_solution = cohort.len() * k;
    let mut values = vec![0.0; archive.len() * per_solution];
    if per_solution > 0 {
        use rayon::prelude::*;
        values
            .par_chunks_mut(per_solution)
            .zip(&archive.entries)
            .for_each(|(block, e)| {
                for (s, out) in cohort.scenarios.iter().zip(block.chunks_mut(k)) {
                    deviations_into(&e.schedule, &s.volumes, &inst.demand, n_t, out);
                }
            });
    }
    Ok(EvaluationMatrix {
        solutions: archive.ids(),
        scenarios: cohort.scenarios.iter().map(|s| s.id).collect(),
        assortments: n_a,
        periods: n_t,
        archive_fingerprint: archive.fingerprint(),
        cohort_fingerprint: cohort.fingerprint(),
        values,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThresholdMode {
    /// Thresholds are fractions of the period's demand.
    #[default]
    FractionOfDemand,
    /// Thresholds are in m³.
    Absolute,
}

impl fmt::Display for ThresholdMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ThresholdMode::FractionOfDemand => "fraction-of-demand",
            ThresholdMode::Absolute => "absolute",
        })
    }
}

impl FromStr for ThresholdMode {
    type Err = CoreError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fraction-of-demand" | "fraction" => Ok(ThresholdMode::FractionOfDemand),
            "absolute" => Ok(ThresholdMode::Absolute),
            _ => Err(CoreError::InvalidParameter(format!("threshold mode {s:?}"))),
        }
    }
}

/// Maximum acceptable deviation per `[a][t]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainCriteria {
    pub thresholds: Vec<Vec<f64>>,
    #[serde(default)]
    pub mode: ThresholdMode,
    /// Accept deviations equal to the threshold (`<=` instead of `<`).
    #[serde(default)]
    pub inclusive: bool,
}

impl DomainCriteria {
    /// The same fraction of demand in every period of an assortment.
    pub fn per_assortment(fractions: &[f64], periods: usize) -> Self {
        DomainCriteria {
            thresholds: fractions.iter().map(|&f| vec![f; periods]).collect(),
            mode: ThresholdMode::FractionOfDemand,
            inclusive: false,
        }
    }

    pub fn check(&self, assortments: usize, periods: usize) -> Result<()> {
        if self.thresholds.len() != assortments
            || self.thresholds.iter().any(|r| r.len() != periods)
        {
            return Err(CoreError::DimensionMismatch(format!(
                "criteria must be {assortments} x {periods}"
            )));
        }
        if let Some(v) = self
            .thresholds
            .iter()
            .flatten()
            .find(|v| !(**v >= 0.0) || !v.is_finite())
        {
            return Err(CoreError::InvalidParameter(format!(
                "threshold {v} must be finite and >= 0"
            )));
        }
        Ok(())
    }

    /// Threshold in m³ for `(a, t)`.
    pub fn limit(&self, a: usize, t: usize, demand: &DemandTable) -> f64 {
        match self.mode {
            ThresholdMode::FractionOfDemand => self.thresholds[a][t] * demand.get(a, t),
            ThresholdMode::Absolute => self.thresholds[a][t],
        }
    }
}

/// Number of cohort scenarios meeting the criterion, per solution and
/// objective, as `[(solution·n_A + a)·n_T + t]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustnessScore {
    pub solutions: Vec<u32>,
    pub assortments: usize,
    pub periods: usize,
    pub cohort_size: usize,
    pub counts: Vec<u32>,
}

impl RobustnessScore {
    pub fn count(&self, sol: usize, a: usize, t: usize) -> u32 {
        self.counts[(sol * self.assortments + a) * self.periods + t]
    }

    /// Fraction of scenarios meeting the criterion.
    pub fn score(&self, sol: usize, a: usize, t: usize) -> f64 {
        self.count(sol, a, t) as f64 / self.cohort_size as f64
    }

    pub fn position(&self, id: u32) -> Option<usize> {
        self.solutions.iter().position(|&s| s == id)
    }

    /// Every `(a, t)` pair in the first `periods` periods.
    pub fn focus(&self, periods: usize) -> Vec<(usize, usize)> {
        (0..self.assortments)
            .flat_map(|a| (0..periods.min(self.periods)).map(move |t| (a, t)))
            .collect()
    }

    fn meets_floor(&self, sol: usize, a: usize, t: usize, floor: f64) -> bool {
        // compare counts, so a floor of 0.95 over 1000 scenarios means 950
        self.count(sol, a, t) as f64 >= floor * self.cohort_size as f64 - 1e-9
    }
}

pub fn domain_criterion(
    evals: &EvaluationMatrix,
    criteria: &DomainCriteria,
    demand: &DemandTable,
) -> Result<RobustnessScore> {
    evals.check()?;
    criteria.check(evals.assortments, evals.periods)?;
    if demand.num_assortments() != evals.assortments
        || demand.rows().iter().any(|r| r.len() != evals.periods)
    {
        return Err(CoreError::DimensionMismatch(
            "demand table does not match the matrix".into(),
        ));
    }
    let (n, s, k) = evals.shape();
    if s == 0 {
        return Err(CoreError::EmptyCohort);
    }
    let limits: Vec<f64> = (0..evals.assortments)
        .flat_map(|a| (0..evals.periods).map(move |t| (a, t)))
        .map(|(a, t)| criteria.limit(a, t, demand))
        .collect();
    let mut counts = vec![0u32; n * k];
    for sol in 0..n {
        let out = &mut counts[sol * k..(sol + 1) * k];
        for p in 0..s {
            for (i, &v) in evals.slice(sol, p).iter().enumerate() {
                let ok = if criteria.inclusive {
                    v <= limits[i]
                } else {
                    v < limits[i]
                };
                out[i] += ok as u32;
            }
        }
    }
    Ok(RobustnessScore {
        solutions: evals.solutions.clone(),
        assortments: evals.assortments,
        periods: evals.periods,
        cohort_size: s,
        counts,
    })
}

fn check_subset(scores: &RobustnessScore, subset: &[(usize, usize)]) -> Result<()> {
    if subset.is_empty() {
        return Err(CoreError::InvalidParameter(
            "objective subset is empty".into(),
        ));
    }
    if let Some(&(a, t)) = subset
        .iter()
        .find(|&&(a, t)| a >= scores.assortments || t >= scores.periods)
    {
        return Err(CoreError::InvalidParameter(format!(
            "objective ({}, {}) is outside the instance",
            a + 1,
            t + 1
        )));
    }
    Ok(())
}

/// Ids whose score reaches `floor` on every objective in `subset`, in
/// archive order.
pub fn filter_solutions(
    scores: &RobustnessScore,
    floor: f64,
    subset: &[(usize, usize)],
) -> Result<Vec<u32>> {
    check_subset(scores, subset)?;
    Ok(scores
        .solutions
        .iter()
        .enumerate()
        .filter(|&(n, _)| {
            subset
                .iter()
                .all(|&(a, t)| scores.meets_floor(n, a, t, floor))
        })
        .map(|(_, &id)| id)
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Aggregation {
    #[default]
    Min,
    Mean,
}

impl FromStr for Aggregation {
    type Err = CoreError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "min" => Ok(Aggregation::Min),
            "mean" => Ok(Aggregation::Mean),
            _ => Err(CoreError::InvalidParameter(format!("aggregation {s:?}"))),
        }
    }
}

/// Ids ordered by descending aggregate score over `subset`; ties by id.
pub fn rank_solutions(
    scores: &RobustnessScore,
    subset: &[(usize, usize)],
    aggregation: Aggregation,
) -> Result<Vec<(u32, f64)>> {
    check_subset(scores, subset)?;
    let mut ranked: Vec<(u32, f64)> = scores
        .solutions
        .iter()
        .enumerate()
        .map(|(n, &id)| {
            let vals = subset.iter().map(|&(a, t)| scores.score(n, a, t));
            let agg = match aggregation {
                Aggregation::Min => vals.fold(f64::INFINITY, f64::min),
                Aggregation::Mean => vals.sum::<f64>() / subset.len() as f64,
            };
            (id, agg)
        })
        .collect();
    ranked.sort_by(|x, y| y.1.total_cmp(&x.1).then(x.0.cmp(&y.0)));
    Ok(ranked)
}

/// Spread of one objective across all solutions and scenarios.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveRange {
    pub assortment: usize,
    pub period: usize,
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    pub p05: f64,
    pub p25: f64,
    pub median: f64,
    pub p75: f64,
    pub p95: f64,
}

/// Linear interpolation between closest ranks of sorted data.
pub fn percentile(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn objective_ranges(
    evals: &EvaluationMatrix,
    subset: &[(usize, usize)],
) -> Result<Vec<ObjectiveRange>> {
    evals.check()?;
    let (n, s, _) = evals.shape();
    if n * s == 0 {
        return Err(CoreError::InvalidParameter(
            "evaluation matrix is empty".into(),
        ));
    }
    subset
        .iter()
        .map(|&(a, t)| {
            if a >= evals.assortments || t >= evals.periods {
                return Err(CoreError::InvalidParameter(format!(
                    "objective ({}, {}) is outside the matrix",
                    a + 1,
                    t + 1
                )));
            }
            let mut v: Vec<f64> = (0..n)
                .flat_map(|sol| (0..s).map(move |p| (sol, p)))
                .map(|(sol, p)| evals.get(sol, p, a, t))
                .collect();
            v.sort_by(f64::total_cmp);
            Ok(ObjectiveRange {
                assortment: a,
                period: t,
                min: v[0],
                max: v[v.len() - 1],
                mean: v.iter().sum::<f64>() / v.len() as f64,
                p05: percentile(&v, 0.05),
                p25: percentile(&v, 0.25),
                median: percentile(&v, 0.5),
                p75: percentile(&v, 0.75),
                p95: percentile(&v, 0.95),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy(devs: &[f64]) -> EvaluationMatrix {
        EvaluationMatrix {
            solutions: vec![1],
            scenarios: (1..=devs.len() as u64).map(ScenarioId::Sample).collect(),
            assortments: 1,
            periods: 1,
            archive_fingerprint: String::new(),
            cohort_fingerprint: String::new(),
            values: devs.to_vec(),
        }
    }

    #[test]
    fn toy_score_is_half() {
        let m = toy(&[1.0, 2.0, 3.0, 4.0]);
        let d = DemandTable::new(vec![vec![10.0]]);
        let s = domain_criterion(&m, &DomainCriteria::per_assortment(&[0.25], 1), &d).unwrap();
        assert_eq!(s.score(0, 0, 0), 0.5);
        let s = domain_criterion(&m, &DomainCriteria::per_assortment(&[1.0], 1), &d).unwrap();
        assert_eq!(s.score(0, 0, 0), 1.0);
    }

    #[test]
    fn strict_threshold_at_zero() {
        let m = toy(&[0.0, 0.0]);
        let d = DemandTable::new(vec![vec![10.0]]);
        let mut c = DomainCriteria::per_assortment(&[0.0], 1);
        assert_eq!(domain_criterion(&m, &c, &d).unwrap().score(0, 0, 0), 0.0);
        c.inclusive = true;
        assert_eq!(domain_criterion(&m, &c, &d).unwrap().score(0, 0, 0), 1.0);
        c.mode = ThresholdMode::Absolute;
        c.inclusive = false;
        c.thresholds[0][0] = 0.5;
        assert_eq!(domain_criterion(&m, &c, &d).unwrap().score(0, 0, 0), 1.0);
    }

    #[test]
    fn empty_cohort_is_an_error() {
        let m = toy(&[]);
        let d = DemandTable::new(vec![vec![10.0]]);
        let err = domain_criterion(&m, &DomainCriteria::per_assortment(&[0.3], 1), &d).unwrap_err();
        assert!(matches!(err, CoreError::EmptyCohort));
    }

    fn two_solutions() -> RobustnessScore {
        RobustnessScore {
            solutions: vec![7, 3],
            assortments: 1,
            periods: 2,
            cohort_size: 100,
            counts: vec![93, 100, 95, 96],
        }
    }

    #[test]
    fn ranking_and_filtering() {
        let s = two_solutions();
        let all = s.focus(2);
        let ranked = rank_solutions(&s, &all, Aggregation::Min).unwrap();
        assert_eq!(ranked, vec![(3, 0.95), (7, 0.93)]);
        let ranked = rank_solutions(&s, &all, Aggregation::Mean).unwrap();
        assert_eq!(ranked[0].0, 7);
        assert_eq!(filter_solutions(&s, 0.0, &all).unwrap(), vec![7, 3]);
        assert_eq!(filter_solutions(&s, 0.95, &all).unwrap(), vec![3]);
        assert_eq!(filter_solutions(&s, 1.0, &[(0, 1)]).unwrap(), vec![7]);
        assert!(filter_solutions(&s, 0.5, &[]).is_err());
    }

    #[test]
    fn ranges_of_constant_matrix() {
        let m = toy(&[2.0, 2.0, 2.0]);
        let r = &objective_ranges(&m, &[(0, 0)]).unwrap()[0];
        assert_eq!((r.min, r.max, r.median), (2.0, 2.0, 2.0));
        assert_eq!(percentile(&[0.0, 10.0], 0.25), 2.5);
    }
}
