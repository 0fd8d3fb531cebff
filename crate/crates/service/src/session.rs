//! Planner sessions over a bundle: criteria, filtering, shortlist and the
//! final choice, each recorded in an append-only journal.

use std::collections::{BTreeMap, HashMap};
use std::fs::OpenOptions;
use std::io::Write;
use std::path::PathBuf;
use std::sync::{Arc, Mutex, RwLock};
use std::time::{SystemTime, UNIX_EPOCH};

use harvest_core::fingerprint::json_fingerprint;
use harvest_core::{
    domain_criterion, filter_solutions, objective_ranges, rank_solutions, stand_count_summary,
    summarize_ideals, Aggregation, DomainCriteria, IdealSummary, RobustnessScore, SolveStatus,
    ThresholdMode, WeightLabel,
};
use serde::{Deserialize, Serialize};

use crate::bundle::Bundle;
use crate::error::{Result, ServiceError};

/// Periods shown by default: the first three.
pub const DEFAULT_FOCUS: usize = 3;

/// Scores must reach `floor` on every listed objective.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterRule {
    pub floor: f64,
    /// 1-based periods.
    pub periods: Vec<usize>,
    /// 1-based assortments; all when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub assortments: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "action", rename_all = "kebab-case")]
pub enum Action {
    SetCriteria { criteria: DomainCriteria },
    Filter { rules: Vec<FilterRule> },
    Shortlist { ids: Vec<u32> },
    InspectDecisions { solution: u32 },
    Finalize { solution: u32 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub seq: u64,
    pub timestamp_ms: u64,
    #[serde(flatten)]
    pub action: Action,
    /// Solution ids produced by the action.
    pub result: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionState {
    pub id: String,
    pub bundle: String,
    pub instance_fingerprint: String,
    pub archive_fingerprint: String,
    pub cohort_fingerprint: String,
    pub criteria: Option<DomainCriteria>,
    pub filter: Vec<FilterRule>,
    /// Survivors of the last filter.
    pub candidates: Vec<u32>,
    pub shortlist: Vec<u32>,
    pub final_choice: Option<u32>,
    pub journal: Vec<IterationRecord>,
}

/// Parses a journal written as one JSON record per line.
pub fn parse_journal(text: &str) -> Result<Vec<IterationRecord>> {
    let mut out: Vec<IterationRecord> = Vec::new();
    for (n, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let rec: IterationRecord = serde_json::from_str(line)
            .map_err(|e| ServiceError::InvalidRequest(format!("journal line {}: {e}", n + 1)))?;
        if rec.seq != out.len() as u64 + 1 {
            return Err(ServiceError::InvalidRequest(format!(
                "journal line {} has sequence number {}",
                n + 1,
                rec.seq
            )));
        }
        out.push(rec);
    }
    Ok(out)
}

/// Scores shared between sessions, keyed by matrix and criteria.
#[derive(Default)]
pub struct ScoreCache {
    map: RwLock<HashMap<String, Arc<RobustnessScore>>>,
}

impl ScoreCache {
    /// Returns the scores and whether they came from the cache.
    pub fn get_or_compute(
        &self,
        bundle: &Bundle,
        criteria: &DomainCriteria,
    ) -> Result<(Arc<RobustnessScore>, bool)> {
        let key = json_fingerprint(&(
            &bundle.matrix.archive_fingerprint,
            &bundle.matrix.cohort_fingerprint,
            criteria,
        ));
        if let Some(s) = self.map.read().expect("cache lock").get(&key) {
            return Ok((s.clone(), true));
        }
        let scores = Arc::new(domain_criterion(
            &bundle.matrix,
            criteria,
            &bundle.instance.demand,
        )?);
        let mut map = self.map.write().expect("cache lock");
        let entry = map.entry(key).or_insert(scores);
        Ok((entry.clone(), false))
    }

    pub fn len(&self) -> usize {
        self.map.read().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Session logic without persistence; also used for replay.
pub struct Session {
    pub state: SessionState,
    bundle: Arc<Bundle>,
    scores: Option<Arc<RobustnessScore>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ranked {
    pub id: u32,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionScores {
    pub id: u32,
    /// `[a][t]` fractions.
    pub scores: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriteriaResponse {
    pub cache_hit: bool,
    pub cohort_size: usize,
    /// Minimum over the first three periods, best first.
    pub ranking: Vec<Ranked>,
    pub scores: Vec<SolutionScores>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterResponse {
    pub survivors: Vec<u32>,
    pub scores: Vec<SolutionScores>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RangeView {
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

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Overview {
    pub archive_size: usize,
    pub cohort_size: usize,
    pub assortments: Vec<String>,
    pub periods: usize,
    pub focus_periods: usize,
    pub demand: Vec<Vec<f64>>,
    pub ranges: Vec<RangeView>,
    pub ideals: Option<Vec<IdealSummary>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionDetail {
    pub id: u32,
    pub label: WeightLabel,
    pub status: SolveStatus,
    pub duplicate_of: Option<u32>,
    /// `[a][t]` robustness, present once criteria are set.
    pub robustness: Option<Vec<Vec<f64>>>,
    /// Period per stand, 0 for unharvested.
    pub schedule: Vec<u32>,
    pub stand_counts: Vec<usize>,
    /// Meta-objective values over the optimization scenarios.
    pub objectives: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionReport {
    pub session: String,
    pub bundle: String,
    pub instance_fingerprint: String,
    pub archive_fingerprint: String,
    pub cohort_fingerprint: String,
    pub criteria_history: Vec<DomainCriteria>,
    pub iterations: Vec<IterationRecord>,
    pub final_choice: Option<u32>,
    pub final_schedule: Option<Vec<u32>>,
    pub stand_counts: Option<Vec<usize>>,
}

fn now_ms() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_millis() as u64)
}

impl Session {
    pub fn new(id: String, bundle: Arc<Bundle>) -> Self {
        Session {
            state: SessionState {
                id,
                bundle: bundle.name.clone(),
                instance_fingerprint: bundle.instance_fingerprint.clone(),
                archive_fingerprint: bundle.archive_fingerprint.clone(),
                cohort_fingerprint: bundle.cohort.fingerprint.clone(),
                criteria: None,
                filter: Vec::new(),
                candidates: Vec::new(),
                shortlist: Vec::new(),
                final_choice: None,
                journal: Vec::new(),
            },
            bundle,
            scores: None,
        }
    }

    pub fn bundle(&self) -> &Bundle {
        &self.bundle
    }

    fn scores(&self) -> Result<&RobustnessScore> {
        self.scores.as_deref().ok_or(ServiceError::CriteriaNotSet)
    }

    fn solution_scores(&self, scores: &RobustnessScore, ids: &[u32]) -> Vec<SolutionScores> {
        ids.iter()
            .filter_map(|&id| {
                let n = scores.position(id)?;
                Some(SolutionScores {
                    id,
                    scores: (0..scores.assortments)
                        .map(|a| (0..scores.periods).map(|t| scores.score(n, a, t)).collect())
                        .collect(),
                })
            })
            .collect()
    }

    fn check_solution(&self, id: u32) -> Result<()> {
        match self.bundle.archive.entry(id) {
            Some(_) => Ok(()),
            None => Err(ServiceError::UnknownSolution(id)),
        }
    }

    fn check_open(&self) -> Result<()> {
        match self.state.final_choice {
            Some(_) => Err(ServiceError::Finalized),
            None => Ok(()),
        }
    }

    fn subset(&self, rule: &FilterRule) -> Result<Vec<(usize, usize)>> {
        let (n_a, n_t) = (
            self.bundle.instance.num_assortments(),
            self.bundle.instance.periods,
        );
        if !(0.0..=1.0).contains(&rule.floor) {
            return Err(ServiceError::InvalidRequest(format!(
                "floor {} outside [0, 1]",
                rule.floor
            )));
        }
        if rule.periods.is_empty() {
            return Err(ServiceError::InvalidRequest(
                "a filter rule needs periods".into(),
            ));
        }
        let all: Vec<usize> = (1..=n_a).collect();
        let assortments = rule.assortments.as_ref().unwrap_or(&all);
        if assortments.is_empty() {
            return Err(ServiceError::InvalidRequest(
                "a filter rule needs assortments".into(),
            ));
        }
        let mut out = Vec::new();
        for &a in assortments {
            for &t in &rule.periods {
                if a == 0 || a > n_a || t == 0 || t > n_t {
                    return Err(ServiceError::InvalidRequest(format!(
                        "objective (assortment {a}, period {t}) is outside the instance"
                    )));
                }
                out.push((a - 1, t - 1));
            }
        }
        Ok(out)
    }

    /// Runs `action` and returns its result ids plus the response payload.
    /// Nothing is journaled here.
    pub fn execute(
        &mut self,
        action: &Action,
        cache: &ScoreCache,
    ) -> Result<(Vec<u32>, ActionOutput)> {
        self.check_open()?;
        match action {
            Action::SetCriteria { criteria } => {
                let b = &self.bundle;
                criteria
                    .check(b.instance.num_assortments(), b.instance.periods)
                    .map_err(|e| ServiceError::InvalidThreshold(e.to_string()))?;
                let (scores, cache_hit) = cache.get_or_compute(b, criteria)?;
                let focus = scores.focus(DEFAULT_FOCUS);
                let ranking: Vec<Ranked> = rank_solutions(&scores, &focus, Aggregation::Min)?
                    .into_iter()
                    .map(|(id, score)| Ranked { id, score })
                    .collect();
                let ids: Vec<u32> = ranking.iter().map(|r| r.id).collect();
                let response = CriteriaResponse {
                    cache_hit,
                    cohort_size: scores.cohort_size,
                    ranking,
                    scores: self.solution_scores(&scores, &scores.solutions),
                };
                self.state.criteria = Some(criteria.clone());
                self.state.filter.clear();
                self.state.candidates.clear();
                self.scores = Some(scores);
                Ok((ids, ActionOutput::Criteria(response)))
            }
            Action::Filter { rules } => {
                let scores = self.scores()?;
                if rules.is_empty() {
                    return Err(ServiceError::InvalidRequest(
                        "filter needs at least one rule".into(),
                    ));
                }
                let mut survivors = scores.solutions.clone();
                for rule in rules {
                    let keep = filter_solutions(scores, rule.floor, &self.subset(rule)?)?;
                    survivors.retain(|id| keep.contains(id));
                }
                let response = FilterResponse {
                    scores: self.solution_scores(scores, &survivors),
                    survivors: survivors.clone(),
                };
                self.state.filter = rules.clone();
                self.state.candidates = survivors.clone();
                Ok((survivors, ActionOutput::Filter(response)))
            }
            Action::Shortlist { ids } => {
                for &id in ids {
                    self.check_solution(id)?;
                }
                let mut list = Vec::new();
                for &id in ids {
                    if !list.contains(&id) {
                        list.push(id);
                    }
                }
                self.state.shortlist = list.clone();
                Ok((list.clone(), ActionOutput::Shortlist(list)))
            }
            Action::InspectDecisions { solution } => {
                let detail = self.detail(*solution)?;
                Ok((vec![*solution], ActionOutput::Detail(Box::new(detail))))
            }
            Action::Finalize { solution } => {
                if !self.state.shortlist.contains(solution) {
                    return Err(ServiceError::NotShortlisted(*solution));
                }
                self.state.final_choice = Some(*solution);
                Ok((vec![*solution], ActionOutput::Finalized(*solution)))
            }
        }
    }

    /// Appends `action` with its result to the in-memory journal.
    pub fn record(&mut self, action: Action, result: Vec<u32>) -> IterationRecord {
        let rec = IterationRecord {
            seq: self.state.journal.len() as u64 + 1,
            timestamp_ms: now_ms(),
            action,
            result,
        };
        self.state.journal.push(rec.clone());
        rec
    }

    pub fn overview(&self, focus: Option<usize>) -> Result<Overview> {
        let b = &self.bundle;
        let n_t = b.instance.periods;
        let focus = focus.unwrap_or(DEFAULT_FOCUS).clamp(1, n_t);
        let subset: Vec<(usize, usize)> = (0..b.instance.num_assortments())
            .flat_map(|a| (0..focus).map(move |t| (a, t)))
            .collect();
        let ranges = objective_ranges(&b.matrix, &subset)?
            .into_iter()
            .map(|r| RangeView {
                assortment: r.assortment + 1,
                period: r.period + 1,
                min: r.min,
                max: r.max,
                mean: r.mean,
                p05: r.p05,
                p25: r.p25,
                median: r.median,
                p75: r.p75,
                p95: r.p95,
            })
            .collect();
        Ok(Overview {
            archive_size: b.archive.len(),
            cohort_size: b.matrix.scenarios.len(),
            assortments: b
                .instance
                .assortments
                .iter()
                .map(|a| a.name.clone())
                .collect(),
            periods: n_t,
            focus_periods: focus,
            demand: b.instance.demand.rows().to_vec(),
            ranges,
            ideals: b.ideals.as_ref().map(summarize_ideals).transpose()?,
        })
    }

    pub fn detail(&self, id: u32) -> Result<SolutionDetail> {
        let e = self
            .bundle
            .archive
            .entry(id)
            .ok_or(ServiceError::UnknownSolution(id))?;
        let robustness = self
            .scores
            .as_deref()
            .map(|s| self.solution_scores(s, &[id]).remove(0).scores);
        Ok(SolutionDetail {
            id,
            label: e.label,
            status: e.status,
            duplicate_of: e.duplicate_of,
            robustness,
            schedule: e.schedule.as_slice().to_vec(),
            stand_counts: stand_count_summary(&e.schedule, &self.bundle.instance),
            objectives: e.objectives.clone(),
        })
    }

    pub fn all_scores(&self) -> Result<Vec<SolutionScores>> {
        let s = self.scores()?;
        Ok(self.solution_scores(s, &s.solutions))
    }

    pub fn report(&self) -> DecisionReport {
        let st = &self.state;
        let chosen = st.final_choice.and_then(|id| self.bundle.archive.entry(id));
        DecisionReport {
            session: st.id.clone(),
            bundle: st.bundle.clone(),
            instance_fingerprint: st.instance_fingerprint.clone(),
            archive_fingerprint: st.archive_fingerprint.clone(),
            cohort_fingerprint: st.cohort_fingerprint.clone(),
            criteria_history: st
                .journal
                .iter()
                .filter_map(|r| match &r.action {
                    Action::SetCriteria { criteria } => Some(criteria.clone()),
                    _ => None,
                })
                .collect(),
            iterations: st.journal.clone(),
            final_choice: st.final_choice,
            final_schedule: chosen.map(|e| e.schedule.as_slice().to_vec()),
            stand_counts: chosen.map(|e| stand_count_summary(&e.schedule, &self.bundle.instance)),
        }
    }
}

/// Response payload of one action.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ActionOutput {
    Criteria(CriteriaResponse),
    Filter(FilterResponse),
    Shortlist(Vec<u32>),
    Detail(Box<SolutionDetail>),
    Finalized(u32),
}

/// Re-executes `records` on a fresh session and checks every result.
/// Returns the reproduced results in order.
pub fn replay_journal(
    bundle: Arc<Bundle>,
    records: &[IterationRecord],
    cache: &ScoreCache,
) -> Result<Vec<Vec<u32>>> {
    let mut s = Session::new("replay".into(), bundle);
    let mut out = Vec::with_capacity(records.len());
    for rec in records {
        let (ids, _) = s.execute(&rec.action, cache)?;
        if ids != rec.result {
            return Err(ServiceError::ReplayDiverged {
                seq: rec.seq,
                expected: rec.result.clone(),
                actual: ids,
            });
        }
        s.record(rec.action.clone(), ids.clone());
        out.push(ids);
    }
    Ok(out)
}

/// Criteria as accepted over the API: either a full `[a][t]` table or one
/// value per assortment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriteriaRequest {
    #[serde(default)]
    pub thresholds: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub per_assortment: Option<Vec<f64>>,
    #[serde(default)]
    pub mode: ThresholdMode,
    #[serde(default)]
    pub inclusive: bool,
}

impl CriteriaRequest {
    pub fn resolve(self, periods: usize) -> Result<DomainCriteria> {
        let thresholds = match (self.thresholds, self.per_assortment) {
            (Some(t), None) => t,
            (None, Some(p)) => p.iter().map(|&f| vec![f; periods]).collect(),
            _ => {
                return Err(ServiceError::InvalidThreshold(
                    "give exactly one of thresholds and per_assortment".into(),
                ))
            }
        };
        Ok(DomainCriteria {
            thresholds,
            mode: self.mode,
            inclusive: self.inclusive,
        })
    }
}

/// All sessions of a server process.
pub struct SessionManager {
    bundles: BTreeMap<String, Arc<Bundle>>,
    sessions: RwLock<HashMap<String, Arc<Mutex<Session>>>>,
    cache: ScoreCache,
    journal_dir: Option<PathBuf>,
}

impl SessionManager {
    pub fn new(bundles: Vec<Bundle>, journal_dir: Option<PathBuf>) -> Result<Self> {
        if let Some(d) = &journal_dir {
            std::fs::create_dir_all(d)?;
        }
        let mut map = BTreeMap::new();
        for b in bundles {
            let name = b.name.clone();
            if map.insert(name.clone(), Arc::new(b)).is_some() {
                return Err(ServiceError::InvalidRequest(format!(
                    "bundle name {name} used twice"
                )));
            }
        }
        Ok(SessionManager {
            bundles: map,
            sessions: RwLock::new(HashMap::new()),
            cache: ScoreCache::default(),
            journal_dir,
        })
    }

    pub fn bundle_names(&self) -> Vec<String> {
        self.bundles.keys().cloned().collect()
    }

    pub fn bundle(&self, name: &str) -> Result<Arc<Bundle>> {
        self.bundles
            .get(name)
            .cloned()
            .ok_or_else(|| ServiceError::UnknownBundle(name.into()))
    }

    pub fn cache(&self) -> &ScoreCache {
        &self.cache
    }

    /// Opens a session on `bundle`, or on the only bundle when `None`.
    pub fn create_session(&self, bundle: Option<&str>) -> Result<SessionState> {
        let b = match bundle {
            Some(name) => self.bundle(name)?,
            None if self.bundles.len() == 1 => {
                self.bundles.values().next().cloned().expect("one bundle")
            }
            None => {
                return Err(ServiceError::InvalidRequest(
                    "several bundles are loaded; name one".into(),
                ))
            }
        };
        let id = uuid::Uuid::new_v4().to_string();
        let s = Session::new(id.clone(), b);
        let state = s.state.clone();
        self.sessions
            .write()
            .expect("session lock")
            .insert(id, Arc::new(Mutex::new(s)));
        Ok(state)
    }

    pub fn list(&self) -> Vec<SessionState> {
        let sessions = self.sessions.read().expect("session lock");
        let mut out: Vec<SessionState> = sessions
            .values()
            .map(|s| s.lock().expect("session lock").state.clone())
            .collect();
        out.sort_by(|a, b| a.id.cmp(&b.id));
        out
    }

    fn session(&self, id: &str) -> Result<Arc<Mutex<Session>>> {
        self.sessions
            .read()
            .expect("session lock")
            .get(id)
            .cloned()
            .ok_or_else(|| ServiceError::UnknownSession(id.into()))
    }

    /// Runs a read-only closure on the session.
    pub fn read<T>(&self, id: &str, f: impl FnOnce(&Session) -> Result<T>) -> Result<T> {
        let s = self.session(id)?;
        let guard = s.lock().expect("session lock");
        f(&guard)
    }

    /// Executes and journals `action`.
    pub fn act(&self, id: &str, action: Action) -> Result<ActionOutput> {
        let s = self.session(id)?;
        let mut guard = s.lock().expect("session lock");
        let (ids, output) = guard.execute(&action, &self.cache)?;
        let rec = guard.record(action, ids);
        if let Some(dir) = &self.journal_dir {
            let mut f = OpenOptions::new()
                .create(true)
                .append(true)
                .open(dir.join(format!("{id}.jsonl")))?;
            let line = serde_json::to_string(&rec).expect("serializable record");
            writeln!(f, "{line}")?;
            if matches!(rec.action, Action::Finalize { .. }) {
                let report =
                    serde_json::to_string_pretty(&guard.report()).expect("serializable report");
                std::fs::write(dir.join(format!("{id}.report.json")), report)?;
            }
        }
        Ok(output)
    }

    pub fn set_criteria(&self, id: &str, req: CriteriaRequest) -> Result<ActionOutput> {
        let periods = self.read(id, |s| Ok(s.bundle().instance.periods))?;
        let criteria = req.resolve(periods)?;
        self.act(id, Action::SetCriteria { criteria })
    }

    /// Replays the session's own journal on a fresh session.
    pub fn replay(&self, id: &str) -> Result<Vec<Vec<u32>>> {
        let (bundle, journal) =
            self.read(id, |s| Ok((s.bundle.clone(), s.state.journal.clone())))?;
        replay_journal(bundle, &journal, &self.cache)
    }
}
