//! Problem data and the deterministic evaluation of a schedule.
//!
//! All indices inside the crate are 0-based (`a`, `j`, `t`, `p`); ids shown
//! to people and written to files are 1-based.

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result, ValidationIssue, ValidationReport};

/// Absolute tolerance for volume comparisons, in m³.
pub const VOLUME_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assortment {
    pub id: usize,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StandRecord {
    pub id: usize,
    pub area_ha: f64,
    /// Mean volume per assortment (m³).
    pub volume_mean: Vec<f64>,
    /// Standard deviation per assortment (m³).
    pub volume_sd: Vec<f64>,
}

/// Demand `D[a][t]` in m³.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemandTable {
    rows: Vec<Vec<f64>>,
}

impl DemandTable {
    pub fn new(rows: Vec<Vec<f64>>) -> Self {
        DemandTable { rows }
    }

    pub fn uniform(per_assortment: &[f64], periods: usize) -> Self {
        DemandTable {
            rows: per_assortment.iter().map(|&d| vec![d; periods]).collect(),
        }
    }

    pub fn get(&self, a: usize, t: usize) -> f64 {
        self.rows[a][t]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn num_assortments(&self) -> usize {
        self.rows.len()
    }

    /// True when every assortment asks for the same volume in every period.
    pub fn is_period_uniform(&self) -> bool {
        self.rows
            .iter()
            .all(|r| r.iter().all(|&d| (d - r[0]).abs() <= VOLUME_TOL))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemInstance {
    pub name: String,
    pub assortments: Vec<Assortment>,
    pub stands: Vec<StandRecord>,
    pub periods: usize,
    pub demand: DemandTable,
}

impl ProblemInstance {
    pub fn num_stands(&self) -> usize {
        self.stands.len()
    }

    pub fn num_assortments(&self) -> usize {
        self.assortments.len()
    }

    pub fn num_periods(&self) -> usize {
        self.periods
    }

    /// `k = n_A · n_T · s` for `s` scenarios.
    pub fn num_meta_objectives(&self, scenarios: usize) -> usize {
        self.num_assortments() * self.periods * scenarios
    }

    pub fn validate(self) -> Result<Self> {
        validate_instance(self)
    }
}

/// Returns the instance iff every invariant holds, otherwise a report listing
/// each violation.
pub fn validate_instance(raw: ProblemInstance) -> Result<ProblemInstance> {
    let mut report = ValidationReport::default();
    let issues = &mut report.issues;
    let n_a = raw.assortments.len();
    if raw.stands.is_empty() {
        issues.push(ValidationIssue::EmptyInstance("stands"));
    }
    if n_a == 0 {
        issues.push(ValidationIssue::EmptyInstance("assortments"));
    }
    if raw.periods == 0 {
        issues.push(ValidationIssue::EmptyInstance("periods"));
    }
    for (k, a) in raw.assortments.iter().enumerate() {
        if a.id != k + 1 {
            issues.push(ValidationIssue::BadIdentifier(format!(
                "assortment at position {} has id {}",
                k + 1,
                a.id
            )));
        }
        if raw.assortments[..k].iter().any(|b| b.name == a.name) {
            issues.push(ValidationIssue::BadIdentifier(format!(
                "duplicate assortment name {:?}",
                a.name
            )));
        }
    }
    for (k, s) in raw.stands.iter().enumerate() {
        if s.id != k + 1 {
            issues.push(ValidationIssue::BadIdentifier(format!(
                "stand at position {} has id {}",
                k + 1,
                s.id
            )));
        }
        if !(s.area_ha > 0.0) || !s.area_ha.is_finite() {
            issues.push(ValidationIssue::NonPositiveArea {
                stand: s.id,
                area: s.area_ha,
            });
        }
        for (what, stats) in [("volume_mean", &s.volume_mean), ("volume_sd", &s.volume_sd)] {
            if stats.len() != n_a {
                issues.push(ValidationIssue::DimensionMismatch {
                    what: format!("stand {} {what}", s.id),
                    expected: n_a,
                    found: stats.len(),
                });
            }
            for (a, &v) in stats.iter().enumerate() {
                if !(v >= 0.0) || !v.is_finite() {
                    issues.push(ValidationIssue::NegativeVolumeStat {
                        stand: s.id,
                        assortment: a + 1,
                        statistic: if what == "volume_mean" { "mean" } else { "sd" },
                        value: v,
                    });
                }
            }
        }
    }
    let rows = raw.demand.rows();
    if rows.len() != n_a {
        issues.push(ValidationIssue::DimensionMismatch {
            what: "demand table assortments".into(),
            expected: n_a,
            found: rows.len(),
        });
    }
    for (a, row) in rows.iter().enumerate() {
        if row.len() != raw.periods {
            issues.push(ValidationIssue::DimensionMismatch {
                what: format!("demand table periods for assortment {}", a + 1),
                expected: raw.periods,
                found: row.len(),
            });
        }
        for (t, &d) in row.iter().enumerate() {
            if !(d >= 0.0) || !d.is_finite() {
                issues.push(ValidationIssue::NegativeDemand {
                    assortment: a + 1,
                    period: t + 1,
                    value: d,
                });
            }
        }
    }
    if report.is_empty() {
        Ok(raw)
    } else {
        Err(CoreError::Validation(report))
    }
}

/// Dense encoding of `x_jt`: entry `j` is 0 when stand `j` is not harvested,
/// otherwise the 1-based period.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct HarvestSchedule {
    assignment: Vec<u32>,
}

impl HarvestSchedule {
    pub fn unharvested(stands: usize) -> Self {
        HarvestSchedule {
            assignment: vec![0; stands],
        }
    }

    /// Builds a schedule from 1-based periods (0 = unharvested).
    pub fn from_periods(assignment: Vec<u32>) -> Self {
        HarvestSchedule { assignment }
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    /// 0-based period of stand `j`, if harvested.
    pub fn period_of(&self, j: usize) -> Option<usize> {
        match self.assignment[j] {
            0 => None,
            t => Some(t as usize - 1),
        }
    }

    /// Assigns stand `j` to the 0-based period `t`, or unharvests it.
    pub fn assign(&mut self, j: usize, t: Option<usize>) {
        self.assignment[j] = t.map_or(0, |t| t as u32 + 1);
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.assignment
    }

    pub fn check_dimensions(&self, inst: &ProblemInstance) -> Result<()> {
        if self.len() != inst.num_stands() {
            return Err(CoreError::DimensionMismatch(format!(
                "schedule covers {} stands, instance has {}",
                self.len(),
                inst.num_stands()
            )));
        }
        if let Some(&t) = self.assignment.iter().find(|&&t| t as usize > inst.periods) {
            return Err(CoreError::DimensionMismatch(format!(
                "schedule uses period {t} of {}",
                inst.periods
            )));
        }
        Ok(())
    }
}

/// One meta-objective: assortment, period and scenario (all 0-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MetaObjectiveKey {
    pub assortment: usize,
    pub period: usize,
    pub scenario: usize,
}

impl MetaObjectiveKey {
    pub fn new(assortment: usize, period: usize, scenario: usize) -> Self {
        MetaObjectiveKey {
            assortment,
            period,
            scenario,
        }
    }

    /// Canonical 0-based position: assortment-major, then period, then scenario.
    pub fn index(&self, periods: usize, scenarios: usize) -> usize {
        (self.assortment * periods + self.period) * scenarios + self.scenario
    }

    /// 1-based ordinal `((a−1)·n_T + (t−1))·s + p` with 1-based `a, t, p`.
    pub fn ordinal(&self, periods: usize, scenarios: usize) -> usize {
        self.index(periods, scenarios) + 1
    }

    pub fn from_index(i: usize, periods: usize, scenarios: usize) -> Self {
        MetaObjectiveKey {
            assortment: i / (periods * scenarios),
            period: (i / scenarios) % periods,
            scenario: i % scenarios,
        }
    }
}

/// Deviations `|Σ_j V[a][j]·x_jt − D[a][t]|` for one scenario, `[a][t]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveVector {
    pub values: Vec<Vec<f64>>,
}

impl ObjectiveVector {
    pub fn get(&self, a: usize, t: usize) -> f64 {
        self.values[a][t]
    }
}

fn check_volumes(volumes: &[Vec<f64>], inst: &ProblemInstance) -> Result<()> {
    if volumes.len() != inst.num_assortments()
        || volumes.iter().any(|row| row.len() != inst.num_stands())
    {
        return Err(CoreError::DimensionMismatch(format!(
            "volume table must be {} x {}",
            inst.num_assortments(),
            inst.num_stands()
        )));
    }
    Ok(())
}

/// Harvested volume per `[a][t]`, written row-major into `out` (`n_A·n_T`).
/// Stands are accumulated in index order.
pub(crate) fn harvested_into(
    schedule: &HarvestSchedule,
    volumes: &[Vec<f64>],
    periods: usize,
    out: &mut [f64],
) {
    out.iter_mut().for_each(|v| *v = 0.0);
    for (a, row) in volumes.iter().enumerate() {
        let base = a * periods;
        for (j, &t) in schedule.as_slice().iter().enumerate() {
            if t != 0 {
                out[base + t as usize - 1] += row[j];
            }
        }
    }
}

/// Deviation per `[a][t]` written row-major into `out`.
pub(crate) fn deviations_into(
    schedule: &HarvestSchedule,
    volumes: &[Vec<f64>],
    demand: &DemandTable,
    periods: usize,
    out: &mut [f64],
) {
    harvested_into(schedule, volumes, periods, out);
    for (a, row) in demand.rows().iter().enumerate() {
        for (t, &d) in row.iter().enumerate() {
            let v = &mut out[a * periods + t];
            *v = (*v - d).abs();
        }
    }
}

pub fn evaluate_schedule(
    schedule: &HarvestSchedule,
    volumes: &[Vec<f64>],
    inst: &ProblemInstance,
) -> Result<ObjectiveVector> {
    schedule.check_dimensions(inst)?;
    check_volumes(volumes, inst)?;
    let n_t = inst.periods;
    let mut flat = vec![0.0; inst.num_assortments() * n_t];
    deviations_into(schedule, volumes, &inst.demand, n_t, &mut flat);
    Ok(ObjectiveVector {
        values: flat.chunks(n_t).map(<[f64]>::to_vec).collect(),
    })
}

/// Stands harvested in each period.
pub fn stand_count_summary(schedule: &HarvestSchedule, inst: &ProblemInstance) -> Vec<usize> {
    let mut counts = vec![0usize; inst.periods];
    for j in 0..schedule.len() {
        if let Some(t) = schedule.period_of(j) {
            if t < counts.len() {
                counts[t] += 1;
            }
        }
    }
    counts
}


#[cfg(test)]
mod tests {
    use super::fixtures::single_assortment;
    use super::*;

    fn nominal(inst: &ProblemInstance) -> Vec<Vec<f64>> {
        (0..inst.num_assortments())
            .map(|a| inst.stands.iter().map(|s| s.volume_mean[a]).collect())
            .collect()
    }

    #[test]
    fn negative_sd_is_reported_with_coordinates() {
        let mut inst = single_assortment(&[10.0, 20.0], 2, 5.0);
        inst.stands[1].volume_sd[0] = -1.0;
        let Err(CoreError::Validation(report)) = validate_instance(inst) else {
            panic!("expected a validation report");
        };
        assert_eq!(
            report.issues,
            vec![ValidationIssue::NegativeVolumeStat {
                stand: 2,
                assortment: 1,
                statistic: "sd",
                value: -1.0
            }]
        );
    }

    #[test]
    fn demand_shape_mismatch() {
        let mut inst = single_assortment(&[10.0], 12, 5.0);
        inst.demand = DemandTable::new(vec![vec![1.0; 11]]);
        let Err(CoreError::Validation(report)) = validate_instance(inst) else {
            panic!("expected a validation report");
        };
        assert!(report.has_dimension_mismatch());
    }

    #[test]
    fn empty_instance_rejected() {
        let inst = single_assortment(&[], 1, 5.0);
        assert!(matches!(
            validate_instance(inst),
            Err(CoreError::Validation(r)) if r.issues.contains(&ValidationIssue::EmptyInstance("stands"))
        ));
    }

    #[test]
    fn unharvested_gives_demand() {
        let inst = single_assortment(&[10.0, 20.0], 3, 583.0);
        let sched = HarvestSchedule::unharvested(2);
        let f = evaluate_schedule(&sched, &nominal(&inst), &inst).unwrap();
        assert_eq!(f.values, vec![vec![583.0; 3]]);
    }

    #[test]
    fn exact_partition() {
        let inst = single_assortment(&[10.0, 20.0, 30.0], 2, 30.0);
        let sched = HarvestSchedule::from_periods(vec![2, 2, 1]);
        let f = evaluate_schedule(&sched, &nominal(&inst), &inst).unwrap();
        assert_eq!(f.values, vec![vec![0.0, 0.0]]);
    }

    #[test]
    fn overshoot() {
        let inst = single_assortment(&[10.0, 20.0], 1, 25.0);
        let sched = HarvestSchedule::from_periods(vec![1, 1]);
        let f = evaluate_schedule(&sched, &nominal(&inst), &inst).unwrap();
        assert_eq!(f.get(0, 0), 5.0);
    }

    #[test]
    fn dimension_errors() {
        let inst = single_assortment(&[10.0, 20.0], 1, 25.0);
        let sched = HarvestSchedule::from_periods(vec![1]);
        assert!(evaluate_schedule(&sched, &nominal(&inst), &inst).is_err());
        let sched = HarvestSchedule::from_periods(vec![1, 2]);
        assert!(evaluate_schedule(&sched, &nominal(&inst), &inst).is_err());
        let sched = HarvestSchedule::from_periods(vec![1, 1]);
        assert!(evaluate_schedule(&sched, &[vec![1.0]], &inst).is_err());
    }

    #[test]
    fn stand_counts() {
        let inst = single_assortment(&[1.0, 1.0, 1.0], 3, 0.0);
        assert_eq!(
            stand_count_summary(&HarvestSchedule::unharvested(3), &inst),
            vec![0, 0, 0]
        );
        assert_eq!(
            stand_count_summary(&HarvestSchedule::from_periods(vec![2, 2, 2]), &inst),
            vec![0, 3, 0]
        );
    }

    #[test]
    fn meta_objective_bijection() {
        let (n_a, n_t, s) = (3, 12, 3);
        let mut seen = vec![false; n_a * n_t * s];
        for a in 0..n_a {
            for t in 0..n_t {
                for p in 0..s {
                    let key = MetaObjectiveKey::new(a, t, p);
                    let i = key.index(n_t, s);
                    assert!(!seen[i]);
                    seen[i] = true;
                    assert_eq!(MetaObjectiveKey::from_index(i, n_t, s), key);
                    assert_eq!(key.ordinal(n_t, s), (a * n_t + t) * s + p + 1);
                }
            }
        }
        assert!(seen.into_iter().all(|b| b));
        assert_eq!(n_a * n_t * s, 108);
    }
}
