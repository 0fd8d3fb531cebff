//! Plain-text reports over a finished bundle.

use std::fmt::Write;

use harvest_core::{
    rank_solutions, summarize_ideals, Aggregation, IdealTensor, RobustnessScore, SolutionArchive,
    SolveStatus,
};
use harvest_service::bundle::BundleManifest;

use crate::error::Result;
use crate::pipeline::{STAGES, STAGE_ARCHIVE, STAGE_IDEALS, STAGE_STRESS};

/// Stage timings, with the three main cost sources called out.
pub fn timing_table(manifest: &BundleManifest) -> String {
    let mut out = String::from("stage       seconds  complete\n");
    for stage in STAGES {
        if let Some(r) = manifest.stages.get(stage) {
            let _ = writeln!(out, "{stage:<10} {:>8.2}  {}", r.seconds, r.complete);
        }
    }
    let secs = |s: &str| manifest.stages.get(s).map_or(0.0, |r| r.seconds);
    let _ = writeln!(
        out,
        "cost: generation {:.2} s, ideals {:.2} s, stress testing {:.2} s",
        secs(STAGE_ARCHIVE),
        secs(STAGE_IDEALS),
        secs(STAGE_STRESS)
    );
    out
}

pub fn archive_summary(archive: &SolutionArchive) -> String {
    let mut out = String::new();
    let count = |s: SolveStatus| archive.entries.iter().filter(|e| e.status == s).count();
    let dups = archive
        .entries
        .iter()
        .filter(|e| e.duplicate_of.is_some())
        .count();
    let worst_gap = archive
        .entries
        .iter()
        .map(|e| ((e.scalarized - e.bound) / e.scalarized.abs().max(1.0)).max(0.0))
        .fold(0.0, f64::max);
    let _ = writeln!(
        out,
        "archive: {} entries ({} distinct), {} optimal, {} at gap limit, {} at node limit, {} at time limit",
        archive.len(),
        archive.len() - dups,
        count(SolveStatus::Optimal),
        count(SolveStatus::GapLimit),
        count(SolveStatus::NodeLimit),
        count(SolveStatus::TimeLimit),
    );
    let _ = writeln!(out, "largest relative gap: {worst_gap:.3e}");
    out
}

pub fn ideal_summary(ideals: &IdealTensor, names: &[String]) -> Result<String> {
    let mut out = String::from("assortment        min ideal    max ideal\n");
    for s in summarize_ideals(ideals)? {
        let name = names.get(s.assortment).map_or("?", String::as_str);
        let _ = writeln!(out, "{name:<14} {:>12.3} {:>12.3}", s.min, s.max);
    }
    let unproven = ideals.unproven();
    if unproven > 0 {
        let _ = writeln!(out, "{unproven} values are incumbents, not proven minima");
    }
    Ok(out)
}

/// The `top` best solutions by minimum score over the first `focus` periods.
pub fn ranking(scores: &RobustnessScore, focus: usize, top: usize) -> Result<String> {
    let subset = scores.focus(focus);
    let ranked = rank_solutions(scores, &subset, Aggregation::Min)?;
    let mut out = format!("solution  min score over first {focus} periods\n");
    for (id, s) in ranked.iter().take(top) {
        let _ = writeln!(out, "{id:>8}  {:.1}%", s * 100.0);
    }
    Ok(out)
}
