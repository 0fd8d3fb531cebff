//! File formats.
//!
//! * Instance: a TOML header plus a stand table in CSV.
//!
//!   ```toml
//!   name = "forest"
//!   periods = 12
//!   stands = "stands.csv"            # relative to the header
//!   assortments = ["pine", "spruce", "deciduous"]
//!
//!   [demand]                         # one list of n_T values per assortment
//!   pine = [1694.0, ...]
//!   ```
//!
//!   The stand table has the columns `id,area_ha` followed by
//!   `<name>_mean,<name>_sd` for every assortment in header order.
//! * Cohort: CSV `scenario,assortment,stand,volume` (1-based assortment and
//!   stand ids, scenario-major, then assortment, then stand) plus a JSON
//!   manifest ([`CohortManifest`]).
//! * Ideals: CSV `assortment,period,scenario,ideal,bound` with an optional
//!   `nadir_approx` column, rows in canonical meta-objective order.
//! * Archive: JSON serialization of [`SolutionArchive`].
//! * Evaluation matrix: the binary layout of [`encode_matrix`] plus a JSON
//!   manifest ([`MatrixManifest`]).
//! * Scores: CSV `solution,assortment,period,count,cohort,score`.
//!
//! Floats are written in Rust's shortest round-trip form, so every format
//! reads back bit-identical values.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::domain::{validate_instance, Assortment, DemandTable, ProblemInstance, StandRecord};
use crate::error::{CoreError, Result};
use crate::pareto::{IdealTensor, SolutionArchive};
use crate::robustness::{EvaluationMatrix, RobustnessScore};
use crate::scenario::{SamplingMode, Scenario, ScenarioCohort, ScenarioId};

fn fmt_err(context: &str) -> impl Fn(String) -> CoreError + '_ {
    move |m| CoreError::format(context, m)
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| CoreError::format(path.display().to_string(), e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, text)?;
    Ok(())
}

fn parse_f64(field: &str, context: &str) -> Result<f64> {
    field
        .trim()
        .parse::<f64>()
        .map_err(|e| CoreError::format(context, format!("{field:?}: {e}")))
}

fn parse_usize(field: &str, context: &str) -> Result<usize> {
    field
        .trim()
        .parse::<usize>()
        .map_err(|e| CoreError::format(context, format!("{field:?}: {e}")))
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceHeader {
    name: String,
    periods: usize,
    stands: String,
    assortments: Vec<String>,
    demand: BTreeMap<String, Vec<f64>>,
}

/// Parses and validates an instance from its header and stand table.
pub fn parse_instance(header: &str, stands_csv: &str) -> Result<ProblemInstance> {
    let h: InstanceHeader =
        toml::from_str(header).map_err(|e| CoreError::format("instance header", e))?;
    let mut demand = Vec::with_capacity(h.assortments.len());
    for name in &h.assortments {
        let row = h.demand.get(name).ok_or_else(|| {
            CoreError::format("instance header", format!("no demand for {name:?}"))
        })?;
        demand.push(row.clone());
    }
    if let Some(extra) = h.demand.keys().find(|k| !h.assortments.contains(k)) {
        return Err(CoreError::format(
            "instance header",
            format!("demand for unknown assortment {extra:?}"),
        ));
    }

    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(stands_csv.as_bytes());
    let cols: Vec<String> = rdr
        .headers()
        .map_err(|e| CoreError::format("stand table", e))?
        .iter()
        .map(str::to_string)
        .collect();
    let mut expected = vec!["id".to_string(), "area_ha".to_string()];
    for name in &h.assortments {
        expected.push(format!("{name}_mean"));
        expected.push(format!("{name}_sd"));
    }
    if cols != expected {
        return Err(CoreError::format(
            "stand table",
            format!("columns {cols:?}, expected {expected:?}"),
        ));
    }
    let n_a = h.assortments.len();
    let mut stands = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| CoreError::format("stand table", e))?;
        let ctx = format!("stand table row {}", line + 1);
        if rec.len() != expected.len() {
            return Err(CoreError::format(&ctx, "wrong number of fields"));
        }
        let mut mean = Vec::with_capacity(n_a);
        let mut sd = Vec::with_capacity(n_a);
        for a in 0..n_a {
            mean.push(parse_f64(&rec[2 + 2 * a], &ctx)?);
            sd.push(parse_f64(&rec[3 + 2 * a], &ctx)?);
        }
        stands.push(StandRecord {
            id: parse_usize(&rec[0], &ctx)?,
            area_ha: parse_f64(&rec[1], &ctx)?,
            volume_mean: mean,
            volume_sd: sd,
        });
    }
    validate_instance(ProblemInstance {
        name: h.name,
        assortments: h
            .assortments
            .into_iter()
            .enumerate()
            .map(|(k, name)| Assortment { id: k + 1, name })
            .collect(),
        stands,
        periods: h.periods,
        demand: DemandTable::new(demand),
    })
}

/// Reads an instance header and the stand table it points to.
pub fn read_instance(header_path: &Path) -> Result<ProblemInstance> {
    let header = read_text(header_path)?;
    let h: InstanceHeader =
        toml::from_str(&header).map_err(|e| CoreError::format("instance header", e))?;
    let dir = header_path.parent().unwrap_or(Path::new("."));
    let stands = read_text(&dir.join(&h.stands))?;
    parse_instance(&header, &stands)
}

/// Header text and stand table for `inst`, the header pointing at
/// `stands_file`.
pub fn format_instance(inst: &ProblemInstance, stands_file: &str) -> Result<(String, String)> {
    let header = InstanceHeader {
        name: inst.name.clone(),
        periods: inst.periods,
        stands: stands_file.into(),
        assortments: inst.assortments.iter().map(|a| a.name.clone()).collect(),
        demand: inst
            .assortments
            .iter()
            .zip(inst.demand.rows())
            .map(|(a, row)| (a.name.clone(), row.clone()))
            .collect(),
    };
    let header = toml::to_string(&header).map_err(|e| CoreError::format("instance header", e))?;
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut cols = vec!["id".to_string(), "area_ha".to_string()];
    for a in &inst.assortments {
        cols.push(format!("{}_mean", a.name));
        cols.push(format!("{}_sd", a.name));
    }
    w.write_record(&cols)
        .map_err(|e| CoreError::format("stand table", e))?;
    for s in &inst.stands {
        let mut rec = vec![s.id.to_string(), s.area_ha.to_string()];
        for a in 0..inst.num_assortments() {
            rec.push(s.volume_mean[a].to_string());
            rec.push(s.volume_sd[a].to_string());
        }
        w.write_record(&rec)
            .map_err(|e| CoreError::format("stand table", e))?;
    }
    let table = String::from_utf8(
        w.into_inner()
            .map_err(|e| CoreError::format("stand table", e))?,
    )
    .expect("csv output is utf-8");
    Ok((header, table))
}

/// Writes `instance.toml` and `stands.csv` into `dir`; returns the header path.
pub fn write_instance(inst: &ProblemInstance, dir: &Path) -> Result<PathBuf> {
    let (header, table) = format_instance(inst, "stands.csv")?;
    let path = dir.join("instance.toml");
    write_text(&path, &header)?;
    write_text(&dir.join("stands.csv"), &table)?;
    Ok(path)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CohortManifest {
    pub seed: u64,
    pub count: usize,
    pub generator_version: String,
    pub mode: SamplingMode,
    pub assortments: usize,
    pub stands: usize,
    pub instance_fingerprint: String,
    pub fingerprint: String,
}

pub fn cohort_manifest(cohort: &ScenarioCohort) -> CohortManifest {
    let first = cohort.scenarios.first();
    CohortManifest {
        seed: cohort.seed,
        count: cohort.len(),
        generator_version: cohort.generator_version.clone(),
        mode: cohort.mode,
        assortments: first.map_or(0, |s| s.volumes.len()),
        stands: first.and_then(|s| s.volumes.first()).map_or(0, Vec::len),
        instance_fingerprint: cohort.instance_fingerprint.clone(),
        fingerprint: cohort.fingerprint(),
    }
}

pub fn format_cohort_csv(cohort: &ScenarioCohort) -> String {
    use std::fmt::Write;
    let mut out = String::from("scenario,assortment,stand,volume\n");
    for s in &cohort.scenarios {
        for (a, row) in s.volumes.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                writeln!(out, "{},{},{},{}", s.id, a + 1, j + 1, v).expect("string write");
            }
        }
    }
    out
}

/// Parses a cohort table against its manifest. The table must list every
/// `(assortment, stand)` of every scenario in canonical order.
pub fn parse_cohort(csv_text: &str, manifest: &CohortManifest) -> Result<ScenarioCohort> {
    let err = fmt_err("cohort table");
    let (n_a, n_s) = (manifest.assortments, manifest.stands);
    let per = n_a
        .checked_mul(n_s)
        .ok_or_else(|| err("dimensions overflow".into()))?;
    if per == 0 && manifest.count > 0 {
        return Err(err("scenarios without volumes cannot be stored".into()));
    }
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(csv_text.as_bytes());
    let cols: Vec<String> = rdr
        .headers()
        .map_err(|e| err(e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    if cols != ["scenario", "assortment", "stand", "volume"] {
        return Err(err(format!("unexpected columns {cols:?}")));
    }
    let mut scenarios: Vec<Scenario> = Vec::new();
    let mut filled = 0usize;
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| err(e.to_string()))?;
        let ctx = format!("cohort table row {}", line + 1);
        if rec.len() != 4 {
            return Err(CoreError::format(&ctx, "wrong number of fields"));
        }
        let id: ScenarioId = rec[0].parse()?;
        let a = parse_usize(&rec[1], &ctx)?;
        let j = parse_usize(&rec[2], &ctx)?;
        let v = parse_f64(&rec[3], &ctx)?;
        if filled == 0 {
            if scenarios.len() >= manifest.count {
                return Err(CoreError::format(
                    &ctx,
                    "more scenarios than the manifest lists",
                ));
            }
            if scenarios.iter().any(|s| s.id == id) {
                return Err(CoreError::format(&ctx, format!("duplicate scenario {id}")));
            }
            scenarios.push(Scenario {
                id,
                volumes: vec![Vec::with_capacity(n_s); n_a],
            });
        }
        let expect = (filled / n_s.max(1) + 1, filled % n_s.max(1) + 1);
        let cur = scenarios.last_mut().expect("pushed above");
        if cur.id != id || (a, j) != expect {
            return Err(CoreError::format(
                &ctx,
                format!(
                    "expected scenario {} assortment {} stand {}",
                    cur.id, expect.0, expect.1
                ),
            ));
        }
        if !v.is_finite() || v < 0.0 {
            return Err(CoreError::format(
                &ctx,
                format!("volume {v} must be finite and >= 0"),
            ));
        }
        cur.volumes[a - 1].push(v);
        filled = (filled + 1) % per.max(1);
    }
    if filled != 0 || scenarios.len() != manifest.count {
        return Err(err(format!(
            "table holds {} complete scenarios, manifest lists {}",
            scenarios.len() - (filled != 0) as usize,
            manifest.count
        )));
    }
    let cohort = ScenarioCohort {
        scenarios,
        instance_fingerprint: manifest.instance_fingerprint.clone(),
        seed: manifest.seed,
        generator_version: manifest.generator_version.clone(),
        mode: manifest.mode,
    };
    if cohort.fingerprint() != manifest.fingerprint {
        return Err(CoreError::FingerprintMismatch(
            "cohort table does not match its manifest".into(),
        ));
    }
    Ok(cohort)
}

pub fn write_cohort(cohort: &ScenarioCohort, csv_path: &Path, manifest_path: &Path) -> Result<()> {
    write_text(csv_path, &format_cohort_csv(cohort))?;
    write_json(manifest_path, &cohort_manifest(cohort))
}

pub fn read_cohort(csv_path: &Path, manifest_path: &Path) -> Result<ScenarioCohort> {
    let manifest: CohortManifest = read_json(manifest_path)?;
    parse_cohort(&read_text(csv_path)?, &manifest)
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CoreError::format("json", e))?;
    write_text(path, &(text + "\n"))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    serde_json::from_str(&read_text(path)?)
        .map_err(|e| CoreError::format(path.display().to_string(), e))
}

pub fn format_ideals_csv(ideals: &IdealTensor, nadir: Option<&[f64]>) -> String {
    use std::fmt::Write;
    let mut out = String::from("assortment,period,scenario,ideal,bound");
    out.push_str(if nadir.is_some() {
        ",nadir_approx\n"
    } else {
        "\n"
    });
    let s = ideals.scenarios.len();
    for i in 0..ideals.len() {
        let key = crate::domain::MetaObjectiveKey::from_index(i, ideals.periods, s);
        write!(
            out,
            "{},{},{},{},{}",
            key.assortment + 1,
            key.period + 1,
            ideals.scenarios[key.scenario],
            ideals.values[i],
            ideals.bounds[i]
        )
        .expect("string write");
        if let Some(n) = nadir {
            write!(out, ",{}", n[i]).expect("string write");
        }
        out.push('\n');
    }
    out
}

/// Parses an ideals table; returns the tensor and the nadir column if present.
pub fn parse_ideals(text: &str) -> Result<(IdealTensor, Option<Vec<f64>>)> {
    let err = fmt_err("ideals table");
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let cols: Vec<String> = rdr
        .headers()
        .map_err(|e| err(e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    let with_nadir = match cols.iter().map(String::as_str).collect::<Vec<_>>()[..] {
        ["assortment", "period", "scenario", "ideal", "bound"] => false,
        ["assortment", "period", "scenario", "ideal", "bound", "nadir_approx"] => true,
        _ => return Err(err(format!("unexpected columns {cols:?}"))),
    };
    let mut rows = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| err(e.to_string()))?;
        let ctx = format!("ideals table row {}", line + 1);
        if rec.len() != cols.len() {
            return Err(CoreError::format(&ctx, "wrong number of fields"));
        }
        let a = parse_usize(&rec[0], &ctx)?;
        let t = parse_usize(&rec[1], &ctx)?;
        let id: ScenarioId = rec[2].parse()?;
        let vals = (3..rec.len())
            .map(|c| parse_f64(&rec[c], &ctx))
            .collect::<Result<Vec<f64>>>()?;
        if a == 0 || t == 0 {
            return Err(CoreError::format(&ctx, "ids are 1-based"));
        }
        rows.push((a - 1, t - 1, id, vals));
    }
    if rows.is_empty() {
        return Err(err("no rows".into()));
    }
    let scenarios: Vec<ScenarioId> = rows
        .iter()
        .take_while(|r| r.0 == 0 && r.1 == 0)
        .map(|r| r.2)
        .collect();
    let s = scenarios.len();
    let n_a = rows.last().map_or(0, |r| r.0 + 1);
    let n_t = rows.iter().map(|r| r.1 + 1).max().unwrap_or(0);
    if rows.len() != n_a * n_t * s {
        return Err(err(format!(
            "{} rows do not form a {n_a}x{n_t}x{s} tensor",
            rows.len()
        )));
    }
    let mut values = Vec::with_capacity(rows.len());
    let mut bounds = Vec::with_capacity(rows.len());
    let mut nadir = Vec::new();
    for (i, (a, t, id, vals)) in rows.into_iter().enumerate() {
        let key = crate::domain::MetaObjectiveKey::from_index(i, n_t, s);
        if (a, t, id) != (key.assortment, key.period, scenarios[key.scenario]) {
            return Err(err(format!("row {} is out of canonical order", i + 1)));
        }
        values.push(vals[0]);
        bounds.push(vals[1]);
        if with_nadir {
            nadir.push(vals[2]);
        }
    }
    Ok((
        IdealTensor {
            assortments: n_a,
            periods: n_t,
            scenarios,
            values,
            bounds,
        },
        with_nadir.then_some(nadir),
    ))
}

pub fn parse_archive(text: &str) -> Result<SolutionArchive> {
    let archive: SolutionArchive =
        serde_json::from_str(text).map_err(|e| CoreError::format("archive", e))?;
    let k = archive.assortments * archive.periods * archive.scenarios.len();
    let mut seen = std::collections::HashSet::new();
    for e in &archive.entries {
        if !seen.insert(e.id) {
            return Err(CoreError::format(
                "archive",
                format!("duplicate id {}", e.id),
            ));
        }
        if e.objectives.len() != k || e.weights.len() != k {
            return Err(CoreError::format(
                "archive",
                format!("entry {} has the wrong number of objectives", e.id),
            ));
        }
        if e.schedule
            .as_slice()
            .iter()
            .any(|&t| t as usize > archive.periods)
        {
            return Err(CoreError::format(
                "archive",
                format!("entry {} uses an unknown period", e.id),
            ));
        }
    }
    Ok(archive)
}

pub fn read_archive(path: &Path) -> Result<SolutionArchive> {
    parse_archive(&read_text(path)?)
}

const MATRIX_MAGIC: &[u8; 8] = b"HVSTMTX1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixManifest {
    pub solutions: usize,
    pub scenarios: usize,
    pub objectives: usize,
    pub archive_fingerprint: String,
    pub cohort_fingerprint: String,
    pub cohort_seed: u64,
    /// SHA-256 of the binary file.
    pub sha256: String,
}

fn scenario_code(id: ScenarioId) -> (u8, u64) {
    match id {
        ScenarioId::Worst => (1, 0),
        ScenarioId::Nominal => (2, 0),
        ScenarioId::Best => (3, 0),
        ScenarioId::Sample(k) => (4, k),
    }
}

/// Little-endian layout: magic `HVSTMTX1`; `u32` solution, scenario,
/// assortment and period counts; one `u32` id per solution; one
/// `(u8 tag, u64 sample)` pair per scenario (tags 1 worst, 2 nominal,
/// 3 best, 4 sample); then every value as `f64` in matrix order.
pub fn encode_matrix(m: &EvaluationMatrix) -> Vec<u8> {
    let mut out = Vec::with_capacity(32 + m.values.len() * 8);
    out.extend_from_slice(MATRIX_MAGIC);
    for n in [
        m.solutions.len(),
        m.scenarios.len(),
        m.assortments,
        m.periods,
    ] {
        out.extend_from_slice(&(n as u32).to_le_bytes());
    }
    for id in &m.solutions {
        out.extend_from_slice(&id.to_le_bytes());
    }
    for &id in &m.scenarios {
        let (tag, k) = scenario_code(id);
        out.push(tag);
        out.extend_from_slice(&k.to_le_bytes());
    }
    for v in &m.values {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or_else(|| CoreError::format("matrix", "truncated file"))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(
            self.take(4)?.try_into().expect("4 bytes"),
        ))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(
            self.take(8)?.try_into().expect("8 bytes"),
        ))
    }
}

/// Decodes [`encode_matrix`] output; fingerprints are left empty.
pub fn decode_matrix(bytes: &[u8]) -> Result<EvaluationMatrix> {
    let mut c = Cursor { bytes, pos: 0 };
    if c.take(8)? != MATRIX_MAGIC {
        return Err(CoreError::format("matrix", "bad magic"));
    }
    let n = c.u32()? as usize;
    let s = c.u32()? as usize;
    let n_a = c.u32()? as usize;
    let n_t = c.u32()? as usize;
    let count = [n, s, n_a, n_t]
        .iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .ok_or_else(|| CoreError::format("matrix", "dimensions overflow"))?;
    let expected = count
        .checked_mul(8)
        .and_then(|v| v.checked_add(n.checked_mul(4)?))
        .and_then(|v| v.checked_add(s.checked_mul(9)?))
        .and_then(|v| v.checked_add(24));
    if expected != Some(bytes.len()) {
        return Err(CoreError::format(
            "matrix",
            "file size does not match its dimensions",
        ));
    }
    let solutions = (0..n).map(|_| c.u32()).collect::<Result<Vec<_>>>()?;
    let mut scenarios = Vec::with_capacity(s);
    for _ in 0..s {
        let tag = c.take(1)?[0];
        let k = c.u64()?;
        scenarios.push(match (tag, k) {
            (1, 0) => ScenarioId::Worst,
            (2, 0) => ScenarioId::Nominal,
            (3, 0) => ScenarioId::Best,
            (4, k) if k >= 1 => ScenarioId::Sample(k),
            _ => {
                return Err(CoreError::format(
                    "matrix",
                    format!("bad scenario code {tag}/{k}"),
                ))
            }
        });
    }
    let mut values = Vec::with_capacity(count);
    for _ in 0..count {
        values.push(f64::from_bits(c.u64()?));
    }
    Ok(EvaluationMatrix {
        solutions,
        scenarios,
        assortments: n_a,
        periods: n_t,
        archive_fingerprint: String::new(),
        cohort_fingerprint: String::new(),
        values,
    })
}

pub fn write_matrix(
    m: &EvaluationMatrix,
    cohort_seed: u64,
    bin_path: &Path,
    manifest_path: &Path,
) -> Result<MatrixManifest> {
    let bytes = encode_matrix(m);
    if let Some(dir) = bin_path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(bin_path, &bytes)?;
    let (n, s, k) = m.shape();
    let manifest = MatrixManifest {
        solutions: n,
        scenarios: s,
        objectives: k,
        archive_fingerprint: m.archive_fingerprint.clone(),
        cohort_fingerprint: m.cohort_fingerprint.clone(),
        cohort_seed,
        sha256: hex::encode(Sha256::digest(&bytes)),
    };
    write_json(manifest_path, &manifest)?;
    Ok(manifest)
}

pub fn read_matrix(bin_path: &Path, manifest_path: &Path) -> Result<EvaluationMatrix> {
    let manifest: MatrixManifest = read_json(manifest_path)?;
    let bytes = std::fs::read(bin_path)?;
    if hex::encode(Sha256::digest(&bytes)) != manifest.sha256 {
        return Err(CoreError::FingerprintMismatch(
            "matrix file does not match its manifest".into(),
        ));
    }
    let mut m = decode_matrix(&bytes)?;
    if m.shape() != (manifest.solutions, manifest.scenarios, manifest.objectives) {
        return Err(CoreError::FingerprintMismatch(
            "matrix shape differs from its manifest".into(),
        ));
    }
    m.archive_fingerprint = manifest.archive_fingerprint;
    m.cohort_fingerprint = manifest.cohort_fingerprint;
    Ok(m)
}

pub fn format_scores_csv(scores: &RobustnessScore) -> String {
    use std::fmt::Write;
    let mut out = String::from("solution,assortment,period,count,cohort,score\n");
    for (n, id) in scores.solutions.iter().enumerate() {
        for a in 0..scores.assortments {
            for t in 0..scores.periods {
                writeln!(
                    out,
                    "{id},{},{},{},{},{}",
                    a + 1,
                    t + 1,
                    scores.count(n, a, t),
                    scores.cohort_size,
                    scores.score(n, a, t)
                )
                .expect("string write");
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{stress_cohort, SamplingMode};
    use crate::synth::{synthesize, SynthConfig};

    #[test]
    fn instance_round_trip() {
        let inst = synthesize(&SynthConfig::micro(3, 6, 4));
        let dir = tempfile::tempdir().unwrap();
        let path = write_instance(&inst, dir.path()).unwrap();
        assert_eq!(read_instance(&path).unwrap(), inst);
    }

    #[test]
    fn instance_errors_are_reported() {
        let header = "name = \"x\"\nperiods = 2\nstands = \"s.csv\"\nassortments = [\"pine\"]\n[demand]\npine = [1.0]\n";
        let table = "id,area_ha,pine_mean,pine_sd\n1,1.0,5.0,-1.0\n";
        let err = parse_instance(header, table).unwrap_err();
        assert!(matches!(err, CoreError::Validation(_)), "{err}");
        let table = "id,area,pine_mean,pine_sd\n1,1.0,5.0,1.0\n";
        assert!(matches!(
            parse_instance(header, table),
            Err(CoreError::Format { .. })
        ));
    }

    #[test]
    fn cohort_round_trip_is_lossless() {
        let inst = synthesize(&SynthConfig::micro(3, 5, 2));
        let c = stress_cohort(&inst, 7, 11, SamplingMode::Clamp);
        let dir = tempfile::tempdir().unwrap();
        let (csv_path, man) = (dir.path().join("c.csv"), dir.path().join("c.json"));
        write_cohort(&c, &csv_path, &man).unwrap();
        assert_eq!(read_cohort(&csv_path, &man).unwrap(), c);

        let mut manifest = cohort_manifest(&c);
        manifest.count = 9;
        assert!(parse_cohort(&format_cohort_csv(&c), &manifest).is_err());
    }

    #[test]
    fn ideals_round_trip() {
        let t = IdealTensor {
            assortments: 2,
            periods: 2,
            scenarios: vec![ScenarioId::Worst, ScenarioId::Sample(4)],
            values: (0..8).map(|i| i as f64 / 3.0).collect(),
            bounds: vec![0.0; 8],
        };
        let nadir: Vec<f64> = (0..8).map(|i| 10.0 + i as f64).collect();
        let (back, n) = parse_ideals(&format_ideals_csv(&t, Some(&nadir))).unwrap();
        assert_eq!(back, t);
        assert_eq!(n.unwrap(), nadir);
        let (back, n) = parse_ideals(&format_ideals_csv(&t, None)).unwrap();
        assert_eq!(back, t);
        assert!(n.is_none());
    }

    #[test]
    fn matrix_round_trip() {
        let m = EvaluationMatrix {
            solutions: vec![1, 2],
            scenarios: vec![ScenarioId::Nominal, ScenarioId::Sample(3)],
            assortments: 1,
            periods: 2,
            archive_fingerprint: "a".into(),
            cohort_fingerprint: "c".into(),
            values: vec![0.1, 0.2, 0.3, 1e-300, 5.0, 6.0, 7.0, 8.0],
        };
        let dir = tempfile::tempdir().unwrap();
        let (b, j) = (dir.path().join("m.bin"), dir.path().join("m.json"));
        write_matrix(&m, 42, &b, &j).unwrap();
        assert_eq!(read_matrix(&b, &j).unwrap(), m);
        let bytes = encode_matrix(&m);
        assert!(decode_matrix(&bytes[..bytes.len() - 1]).is_err());
        assert!(decode_matrix(b"HVSTMTX1").is_err());
    }
}
