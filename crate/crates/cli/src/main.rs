use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use harvest_cli::config::{
    ArchiveConfig, BackendKind, CohortConfig, IdealScenarios, IdealsConfig, InstanceConfig,
    SolverConfig,
};
use harvest_cli::error::{CliError, Result, StageExt};
use harvest_cli::pipeline::{Workspace, STAGE_ARCHIVE};
use harvest_cli::{report, run_pipeline, PipelineConfig, StageRun};
use harvest_core::io;
use harvest_core::{
    build_scalarized_milp, domain_criterion, generate_weight_schedule, named_scenarios,
    DomainCriteria, ReferenceConfig, SamplingMode, SynthConfig, ThresholdMode,
};
use harvest_milp::write_lp;
use harvest_service::{Bundle, SessionManager};

/// Multi-scenario harvest scheduling: build a bundle of Pareto-optimal
/// schedules stress-tested over a scenario cohort, then explore it.
#[derive(Parser)]
#[command(name = "harvest", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every stage from a TOML config, skipping stages that are up to date.
    Pipeline {
        config: PathBuf,
        /// Override the config's output directory.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Rerun every stage.
        #[arg(long)]
        force: bool,
    },
    /// Write a synthetic instance into a bundle directory.
    Synth {
        bundle: PathBuf,
        #[arg(long, default_value_t = 2024)]
        seed: u64,
        #[arg(long, default_value_t = 250)]
        stands: usize,
        #[arg(long, default_value_t = 12)]
        periods: usize,
        /// Import this instance file instead of synthesizing.
        #[arg(long, conflicts_with_all = ["seed", "stands", "periods"])]
        from: Option<PathBuf>,
    },
    /// Draw the stress-test cohort.
    Scenarios {
        bundle: PathBuf,
        #[arg(long, default_value_t = 1000)]
        size: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value = "clamp")]
        mode: SamplingMode,
        /// Leave out the worst, nominal and best scenarios.
        #[arg(long)]
        no_named: bool,
    },
    /// Compute ideal values per meta-objective.
    Ideals {
        bundle: PathBuf,
        /// Solve over the three optimization scenarios instead of the cohort;
        /// also writes a nadir estimate.
        #[arg(long)]
        optimization: bool,
        #[arg(long)]
        no_shortcut: bool,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Solve the scalarized problem for every weight vector.
    Generate {
        bundle: PathBuf,
        #[arg(long, default_value_t = 100.0)]
        emphasis: f64,
        #[arg(long, default_value_t = 1.0)]
        base: f64,
        #[arg(long, default_value_t = harvest_core::DEFAULT_EPSILON)]
        epsilon: f64,
        /// Divide weights by estimated objective ranges.
        #[arg(long)]
        normalize: bool,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Evaluate every archive schedule over the cohort.
    Stress { bundle: PathBuf },
    /// Summarize a bundle; with --criteria also score and rank it.
    Report {
        bundle: PathBuf,
        /// Maximum deviation per assortment as a fraction of demand, e.g. 0.3,0.2,0.3.
        #[arg(long, value_delimiter = ',')]
        criteria: Option<Vec<f64>>,
        #[arg(long, default_value = "fraction-of-demand")]
        mode: ThresholdMode,
        /// Periods shown in the ranking.
        #[arg(long, default_value_t = 3)]
        focus: usize,
        #[arg(long, default_value_t = 10)]
        top: usize,
        /// Write all scores as CSV.
        #[arg(long)]
        scores_csv: Option<PathBuf>,
    },
    /// Write one scalarized model in LP format.
    ExportLp {
        bundle: PathBuf,
        /// "neutral" or "emphasis-N" (1-based meta-objective).
        #[arg(long, default_value = "neutral")]
        weights: String,
        #[arg(long, default_value_t = 100.0)]
        emphasis: f64,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Serve bundles to the planner UI.
    Serve {
        #[arg(required = true)]
        bundles: Vec<PathBuf>,
        #[arg(long, default_value = "127.0.0.1:8080")]
        addr: SocketAddr,
        /// Where session journals are appended.
        #[arg(long)]
        journal_dir: Option<PathBuf>,
    },
}

#[derive(Args)]
struct SolverArgs {
    #[arg(long, default_value = "builtin")]
    backend: String,
    /// External command template with {lp} and {sol} placeholders.
    #[arg(long)]
    solver_command: Option<String>,
    #[arg(long, default_value_t = 1e-4)]
    gap: f64,
    /// Branch-and-bound nodes per solve.
    #[arg(long, default_value_t = 1000)]
    node_limit: u64,
    /// Seconds per solve. Results then depend on machine speed.
    #[arg(long)]
    time_limit: Option<f64>,
}

impl SolverArgs {
    fn config(&self) -> Result<SolverConfig> {
        let backend = match self.backend.as_str() {
            "builtin" => BackendKind::Builtin,
            "external" => BackendKind::External,
            other => return Err(CliError::Config(format!("unknown backend {other:?}"))),
        };
        Ok(SolverConfig {
            backend,
            command: self.solver_command.clone(),
            relative_gap: self.gap,
            node_limit: Some(self.node_limit),
            time_limit_secs: self.time_limit,
        })
    }
}

fn runs_line(runs: &[(&str, StageRun)]) -> String {
    runs.iter()
        .map(|(s, r)| {
            format!(
                "{s}={}",
                if *r == StageRun::Skipped {
                    "skipped"
                } else {
                    "computed"
                }
            )
        })
        .collect::<Vec<_>>()
        .join(" ")
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Pipeline { config, out, force } => {
            let mut cfg = PipelineConfig::load(&config)?;
            if let Some(o) = out {
                cfg.output = o;
            }
            let res = run_pipeline(&cfg, force)?;
            let ws = Workspace::open(&res.dir)?;
            println!("bundle {}", res.dir.display());
            println!("{}", runs_line(&res.runs));
            print!("{}", report::archive_summary(&res.archive));
            print!("{}", report::timing_table(&ws.manifest));
        }
        Command::Synth {
            bundle,
            seed,
            stands,
            periods,
            from,
        } => {
            let cfg = match from {
                Some(p) => InstanceConfig {
                    path: Some(p),
                    synth: None,
                },
                None => InstanceConfig {
                    path: None,
                    synth: Some(SynthConfig {
                        seed,
                        stands,
                        periods,
                        ..Default::default()
                    }),
                },
            };
            let mut ws = Workspace::open(&bundle)?;
            let (inst, _) = ws.instance(&cfg)?;
            println!(
                "{}: {} stands, {} periods, {} assortments",
                inst.name,
                inst.num_stands(),
                inst.periods,
                inst.num_assortments()
            );
        }
        Command::Scenarios {
            bundle,
            size,
            seed,
            mode,
            no_named,
        } => {
            let mut ws = Workspace::open(&bundle)?;
            let inst = ws.load_instance()?;
            let cfg = CohortConfig {
                size,
                seed,
                mode,
                named: !no_named,
            };
            let (c, _) = ws.cohort(&inst, &cfg)?;
            println!(
                "cohort of {} scenarios, fingerprint {}",
                c.len(),
                c.fingerprint()
            );
        }
        Command::Ideals {
            bundle,
            optimization,
            no_shortcut,
            solver,
        } => {
            let mut ws = Workspace::open(&bundle)?;
            let inst = ws.load_instance()?;
            let cfg = IdealsConfig {
                enabled: true,
                scenarios: if optimization {
                    IdealScenarios::Optimization
                } else {
                    IdealScenarios::Cohort
                },
                period_shortcut: !no_shortcut,
                node_limit: Some(solver.node_limit),
            };
            let cohort = if optimization {
                // only the fingerprint of an absent cohort is never used
                harvest_core::sample_cohort(&inst, 0, 0, SamplingMode::Clamp)
            } else {
                ws.load_cohort()?
            };
            let backend = solver.config()?.backend(&bundle.join("solver"))?;
            let (t, _) = ws.ideals(&inst, &cohort, &cfg, backend.as_ref())?;
            let names: Vec<String> = inst.assortments.iter().map(|a| a.name.clone()).collect();
            print!("{}", report::ideal_summary(&t, &names)?);
        }
        Command::Generate {
            bundle,
            emphasis,
            base,
            epsilon,
            normalize,
            solver,
        } => {
            let mut ws = Workspace::open(&bundle)?;
            let inst = ws.load_instance()?;
            let sc = solver.config()?;
            let cfg = ArchiveConfig {
                emphasis,
                base,
                epsilon,
                normalize,
            };
            let backend = sc.backend(&bundle.join("solver"))?;
            let (a, _) = ws.archive(
                &inst,
                &cfg,
                &sc.solve_options()?,
                &IdealsConfig::default().solve_options(),
                backend.as_ref(),
            )?;
            print!("{}", report::archive_summary(&a));
        }
        Command::Stress { bundle } => {
            let mut ws = Workspace::open(&bundle)?;
            let inst = ws.load_instance()?;
            let archive = ws.load_archive()?;
            let cohort = ws.load_cohort()?;
            let (m, _) = ws.stress(&inst, &archive, &cohort)?;
            let (n, s, k) = m.shape();
            println!("evaluation matrix {n} x {s} x {k}");
        }
        Command::Report {
            bundle,
            criteria,
            mode,
            focus,
            top,
            scores_csv,
        } => {
            let ws = Workspace::open(&bundle)?;
            let b = Bundle::load(&bundle)?;
            print!("{}", report::archive_summary(&b.archive));
            if let Some(t) = &b.ideals {
                let names: Vec<String> = b
                    .instance
                    .assortments
                    .iter()
                    .map(|a| a.name.clone())
                    .collect();
                print!("{}", report::ideal_summary(t, &names)?);
            }
            print!("{}", report::timing_table(&ws.manifest));
            if let Some(c) = criteria {
                let mut dc = DomainCriteria::per_assortment(&c, b.instance.periods);
                dc.mode = mode;
                let scores = domain_criterion(&b.matrix, &dc, &b.instance.demand)?;
                print!("{}", report::ranking(&scores, focus, top)?);
                if let Some(p) = scores_csv {
                    std::fs::write(&p, io::format_scores_csv(&scores))
                        .map_err(|e| CliError::io(&p, e))?;
                }
            }
        }
        Command::ExportLp {
            bundle,
            weights,
            emphasis,
            out,
        } => {
            let ws = Workspace::open(&bundle)?;
            let inst = ws.load_instance()?;
            let scenarios = named_scenarios(&inst);
            let k = inst.num_meta_objectives(scenarios.len());
            let w = if weights == "neutral" {
                vec![1.0; k]
            } else {
                let n: usize = weights
                    .strip_prefix("emphasis-")
                    .and_then(|n| n.parse().ok())
                    .filter(|&n| (1..=k).contains(&n))
                    .ok_or_else(|| {
                        CliError::Config(format!(
                            "weights must be neutral or emphasis-1..{k}, got {weights:?}"
                        ))
                    })?;
                generate_weight_schedule(k, emphasis, 1.0)?.weights[n - 1].clone()
            };
            let model = build_scalarized_milp(
                &inst,
                &scenarios,
                &ReferenceConfig::neutral(k).with_weights(w),
            )
            .stage(STAGE_ARCHIVE)?;
            std::fs::write(&out, write_lp(&model)).map_err(|e| CliError::io(&out, e))?;
            println!(
                "{}: {} binaries, {} continuous, {} rows",
                out.display(),
                model.num_binaries(),
                model.num_continuous(),
                model.num_constraints()
            );
        }
        Command::Serve {
            bundles,
            addr,
            journal_dir,
        } => {
            let loaded = bundles
                .iter()
                .map(|p| Bundle::load(p))
                .collect::<std::result::Result<Vec<_>, _>>()?;
            let manager = SessionManager::new(loaded, journal_dir)?;
            let rt =
                tokio::runtime::Runtime::new().map_err(|e| CliError::io("tokio runtime", e))?;
            rt.block_on(harvest_service::serve(manager, addr))
                .map_err(|e| CliError::io(addr.to_string(), e))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
