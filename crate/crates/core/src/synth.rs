//! Seeded synthetic instances shaped like a small southern-Swedish forest
//! holding: stands dominated by spruce, pine or deciduous trees, skewed stand
//! areas with fixed extremes and mean, and period-uniform demand set to a
//! fraction of the expected annual removal.

use serde::{Deserialize, Serialize};

use crate::domain::{Assortment, DemandTable, ProblemInstance, StandRecord};
use crate::rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub seed: u64,
    pub stands: usize,
    pub periods: usize,
    /// Assortment names with the share of stands each one dominates.
    pub dominance: Vec<(String, f64)>,
    pub min_area_ha: f64,
    pub max_area_ha: f64,
    pub mean_area_ha: f64,
    /// Range of total standing volume per hectare (m³/ha).
    pub volume_per_ha: (f64, f64),
    /// Fraction of the nominal total volume demanded over the horizon.
    pub demand_fraction: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            seed: 2024,
            stands: 250,
            periods: 12,
            dominance: vec![
                ("pine".into(), 0.15),
                ("spruce".into(), 0.80),
                ("deciduous".into(), 0.05),
            ],
            min_area_ha: 0.47,
            max_area_ha: 7.66,
            mean_area_ha: 1.73,
            volume_per_ha: (250.0, 400.0),
            demand_fraction: 0.9,
        }
    }
}

impl SynthConfig {
    pub fn micro(seed: u64, stands: usize, periods: usize) -> Self {
        SynthConfig {
            seed,
            stands,
            periods,
            ..Default::default()
        }
    }
}

/// Stand counts per dominance class by largest remainder.
fn dominance_counts(shares: &[f64], n: usize) -> Vec<usize> {
    let total: f64 = shares.iter().sum();
    let exact: Vec<f64> = shares.iter().map(|s| s / total * n as f64).collect();
    let mut counts: Vec<usize> = exact.iter().map(|e| e.floor() as usize).collect();
    let mut left = n - counts.iter().sum::<usize>();
    let mut order: Vec<usize> = (0..shares.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = exact[a] - exact[a].floor();
        let rb = exact[b] - exact[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for &k in order.iter().cycle() {
        if left == 0 {
            break;
        }
        counts[k] += 1;
        left -= 1;
    }
    counts
}

fn areas(cfg: &SynthConfig, rng: &mut rand_chacha::ChaCha8Rng) -> Vec<f64> {
    let n = cfg.stands;
    let (lo, hi, mean) = (cfg.min_area_ha, cfg.max_area_ha, cfg.mean_area_ha);
    let sigma: f64 = 0.55;
    let mu = mean.ln() - sigma * sigma / 2.0;
    let mut a: Vec<f64> = (0..n)
        .map(|_| (mu + sigma * rng::normal(rng)).exp().clamp(lo, hi))
        .collect();
    if n >= 2 {
        a[0] = lo;
        a[1] = hi;
        // pull the free stands towards the target mean without leaving [lo, hi]
        for _ in 0..50 {
            let fixed = lo + hi;
            let free: f64 = a[2..].iter().sum();
            if free <= 0.0 {
                break;
            }
            let scale = (mean * n as f64 - fixed) / free;
            if (scale - 1.0).abs() < 1e-12 {
                break;
            }
            for v in &mut a[2..] {
                *v = (*v * scale).clamp(lo, hi);
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    shuffle(&mut order, rng);
    let mut out = vec![0.0; n];
    for (k, &j) in order.iter().enumerate() {
        out[j] = round_to(a[k], 2);
    }
    out
}

fn shuffle<T>(items: &mut [T], rng: &mut rand_chacha::ChaCha8Rng) {
    for i in (1..items.len()).rev() {
        let k = rng::below(rng, i + 1);
        items.swap(i, k);
    }
}

fn round_to(v: f64, digits: i32) -> f64 {
    let f = 10f64.powi(digits);
    (v * f).round() / f
}

pub fn synthesize(cfg: &SynthConfig) -> ProblemInstance {
    let mut rng = rng::stream(cfg.seed, 0);
    let n_a = cfg.dominance.len();
    let shares: Vec<f64> = cfg.dominance.iter().map(|d| d.1).collect();
    let counts = dominance_counts(&shares, cfg.stands);
    let mut dominant: Vec<usize> = counts
        .iter()
        .enumerate()
        .flat_map(|(a, &c)| std::iter::repeat(a).take(c))
        .collect();
    shuffle(&mut dominant, &mut rng);
    let area = areas(cfg, &mut rng);

    let mut stands = Vec::with_capacity(cfg.stands);
    for j in 0..cfg.stands {
        let per_ha = rng::uniform(&mut rng, cfg.volume_per_ha.0, cfg.volume_per_ha.1);
        let total = per_ha * area[j];
        let dom = dominant[j];
        let dom_share = rng::uniform(&mut rng, 0.6, 0.85);
        let mut share = vec![0.0; n_a];
        share[dom] = if n_a == 1 { 1.0 } else { dom_share };
        let others: Vec<usize> = (0..n_a).filter(|&a| a != dom).collect();
        let weights: Vec<f64> = others
            .iter()
            .map(|_| rng::uniform(&mut rng, 0.05, 1.0))
            .collect();
        let wsum: f64 = weights.iter().sum();
        for (&a, w) in others.iter().zip(&weights) {
            share[a] = (1.0 - dom_share) * w / wsum;
        }
        let mut mean = vec![0.0; n_a];
        let mut sd = vec![0.0; n_a];
        for a in 0..n_a {
            let cv = if a == dom {
                rng::uniform(&mut rng, 0.1, 0.3)
            } else {
                rng::uniform(&mut rng, 0.3, 1.2)
            };
            mean[a] = round_to(share[a] * total, 2);
            sd[a] = round_to(cv * mean[a], 2);
        }
        stands.push(StandRecord {
            id: j + 1,
            area_ha: area[j],
            volume_mean: mean,
            volume_sd: sd,
        });
    }
    let per_period: Vec<f64> = (0..n_a)
        .map(|a| {
            let total: f64 = stands.iter().map(|s| s.volume_mean[a]).sum();
            (cfg.demand_fraction * total / cfg.periods as f64).round()
        })
        .collect();
    ProblemInstance {
        name: format!("synthetic-{}-{}x{}", cfg.seed, cfg.stands, cfg.periods),
        assortments: cfg
            .dominance
            .iter()
            .enumerate()
            .map(|(k, (name, _))| Assortment {
                id: k + 1,
                name: name.clone(),
            })
            .collect(),
        stands,
        periods: cfg.periods,
        demand: DemandTable::uniform(&per_period, cfg.periods),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::validate_instance;

    #[test]
    fn case_study_shape() {
        let inst = validate_instance(synthesize(&SynthConfig::default())).unwrap();
        assert_eq!(inst.num_stands(), 250);
        assert_eq!(inst.num_assortments(), 3);
        assert_eq!(inst.periods, 12);
        let areas: Vec<f64> = inst.stands.iter().map(|s| s.area_ha).collect();
        let min = areas.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = areas.iter().cloned().fold(0.0, f64::max);
        let mean = areas.iter().sum::<f64>() / areas.len() as f64;
        assert_eq!(min, 0.47);
        assert_eq!(max, 7.66);
        assert!((mean - 1.73).abs() < 0.01, "mean area {mean}");
        assert!(inst.demand.is_period_uniform());

        let dominant: Vec<usize> = inst
            .stands
            .iter()
            .map(|s| {
                (0..3)
                    .max_by(|&a, &b| s.volume_mean[a].total_cmp(&s.volume_mean[b]))
                    .unwrap()
            })
            .collect();
        let count = |a| dominant.iter().filter(|&&d| d == a).count();
        assert_eq!((count(0), count(1), count(2)), (38, 200, 12));
    }

    #[test]
    fn deterministic_per_seed() {
        let a = synthesize(&SynthConfig::micro(5, 10, 2));
        let b = synthesize(&SynthConfig::micro(5, 10, 2));
        let c = synthesize(&SynthConfig::micro(6, 10, 2));
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn largest_remainder() {
        assert_eq!(dominance_counts(&[0.15, 0.8, 0.05], 250), vec![38, 200, 12]);
        assert_eq!(dominance_counts(&[1.0], 7), vec![7]);
        assert_eq!(dominance_counts(&[0.5, 0.5], 3).iter().sum::<usize>(), 3);
    }
}
