mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hutchinson_core::hutchinson::HutchinsonOperator;
use hutchinson_core::hyperspace::{hausdorff, prune, read_cloud, write_cloud_file, FiniteCompact};
use hutchinson_core::io::write_atomic;
use hutchinson_core::multifunction::{
    classify, usc_probe, ClassifyOptions, Multifunction, RegularityClass, Sampling,
};
use hutchinson_core::probes::{
    eta_bound_check, family_union_harness, hutchinson_modulus, preservation_crosscheck,
    singleton_identity_check, ContinuityVerdict, POINT_CAP,
};
use hutchinson_core::raster::{render, Bounds};
use hutchinson_core::systems::{build, SystemKind};
use hutchinson_core::{Error, Point, Space};
use serde::Serialize;

use config::{CenterSpec, Overrides, RunConfig};

#[derive(Parser)]
#[command(name = "hutchinson", version, about = "Hutchinson operators, attractors and continuity probes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Run configuration (JSON).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Preset name or system file; overrides the config's system.
    #[arg(long)]
    system: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    prune_eps: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve for the attractor and write the cloud, report and render.
    Attractor(Common),
    /// Print the Hausdorff distance between two point clouds.
    Hausdorff { a: PathBuf, b: PathBuf },
    /// Run a continuity probe.
    Probe {
        #[arg(value_enum)]
        kind: ProbeKind,
        #[command(flatten)]
        common: Common,
    },
    /// Classify the system's multifunction in the regularity hierarchy.
    Classify(Common),
    /// Render a planar point cloud as a binary PPM.
    Render {
        cloud: PathBuf,
        #[arg(long, default_value = "render.ppm")]
        out: PathBuf,
        #[arg(long, default_value_t = 512)]
        width: usize,
        #[arg(long, default_value_t = 512)]
        height: usize,
        /// Explicit bounds `x0,y0,x1,y1`.
        #[arg(long, value_delimiter = ',', num_args = 4)]
        bounds: Option<Vec<f64>>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ProbeKind {
    Modulus,
    SingletonIdentity,
    Usc,
    FamilyUnion,
    Crosscheck,
}

impl ProbeKind {
    fn name(self) -> &'static str {
        match self {
            ProbeKind::Modulus => "modulus",
            ProbeKind::SingletonIdentity => "singleton_identity",
            ProbeKind::Usc => "usc",
            ProbeKind::FamilyUnion => "family_union",
            ProbeKind::Crosscheck => "crosscheck",
        }
    }
}

enum Failure {
    Config(Error),
    NotConverged,
    Verdict(String),
    Other(Error),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Other(_) => 1,
            Failure::Config(_) => 2,
            Failure::NotConverged => 3,
            Failure::Verdict(_) => 4,
        }
    }
}

/// Input problems are configuration errors; anything else is a runtime one.
fn run_err(e: Error) -> Failure {
    match e {
        Error::Parse(_) | Error::InvalidInput(_) | Error::SpaceMismatch { .. } | Error::Empty => {
            Failure::Config(e)
        }
        e => Failure::Other(e),
    }
}

type Outcome = Result<(), Failure>;

#[derive(Serialize)]
struct Report<'a, T: Serialize> {
    command: &'a str,
    config: &'a RunConfig,
    passed: bool,
    notes: Vec<String>,
    result: T,
}

fn write_report<T: Serialize>(
    cfg: &RunConfig,
    command: &str,
    file: &str,
    passed: bool,
    notes: Vec<String>,
    result: T,
) -> Result<PathBuf, Failure> {
    let report = Report {
        command,
        config: cfg,
        passed,
        notes,
        result,
    };
    let mut text = serde_json::to_string_pretty(&report).expect("report serializes");
    text.push('\n');
    let path = cfg.params.out.join(file);
    write_atomic(&path, text.as_bytes()).map_err(Failure::Other)?;
    Ok(path)
}

fn load(c: &Common) -> Result<RunConfig, Failure> {
    let o = Overrides {
        system: c.system.clone(),
        seed: c.seed,
        tol: c.tol,
        prune_eps: c.prune_eps,
        out: c.out.clone(),
        max_iter: c.max_iter,
    };
    RunConfig::load(c.config.as_deref(), &o).map_err(Failure::Config)
}

fn system(cfg: &RunConfig) -> Result<Multifunction, Failure> {
    build(&cfg.system).map_err(Failure::Config)
}

fn initial_set(cfg: &RunConfig) -> Result<FiniteCompact, Failure> {
    match &cfg.params.initial {
        Some(rows) => FiniteCompact::from_rows(cfg.system.space, rows).map_err(Failure::Config),
        None => Ok(cfg.system.default_seed()),
    }
}

fn solver(cfg: &RunConfig, phi: &Multifunction) -> Result<HutchinsonOperator, Failure> {
    HutchinsonOperator::with_pruning(phi.clone(), cfg.solver_prune_eps(), cfg.params.prune_mode)
        .map_err(Failure::Config)
}

fn system_notes(cfg: &RunConfig) -> Vec<String> {
    let mut notes = Vec::new();
    if cfg.system.kind == SystemKind::Projective {
        notes.push("empirical convergence only: the projective system is not certified contractive".into());
    }
    notes
}

fn planar(space: Space) -> bool {
    matches!(space, Space::Euclidean(2) | Space::ProjectivePlane)
}

fn cmd_attractor(c: &Common) -> Outcome {
    let cfg = load(c)?;
    let phi = system(&cfg)?;
    let f = solver(&cfg, &phi)?;
    let b0 = initial_set(&cfg)?;
    let hint = cfg.system.lipschitz_bound().filter(|l| *l < 1.0);
    let report = f
        .solve_attractor(&b0, cfg.params.tol, cfg.params.max_iter, hint)
        .map_err(run_err)?;
    let out = &cfg.params.out;
    write_cloud_file(&out.join("attractor.csv"), &report.attractor).map_err(Failure::Other)?;
    let mut notes = system_notes(&cfg);
    if cfg.params.render && planar(cfg.system.space) {
        let img = render(&report.attractor, cfg.params.width, cfg.params.height, None)
            .map_err(run_err)?;
        if img.dropped > 0 {
            notes.push(format!("{} points outside the positive chart were not drawn", img.dropped));
        }
        write_atomic(&out.join("attractor.ppm"), &img.to_ppm()).map_err(Failure::Other)?;
    }
    let path = write_report(&cfg, "attractor", "attractor.json", report.converged, notes, &report)?;
    println!(
        "{} after {} iterations, {} points, invariance residual {}; report {}",
        if report.converged { "converged" } else { "not converged" },
        report.iterations,
        report.point_count,
        report.invariance_residual,
        path.display()
    );
    if report.converged {
        Ok(())
    } else {
        Err(Failure::NotConverged)
    }
}

fn read_input_cloud(path: &Path) -> Result<FiniteCompact, Failure> {
    read_cloud(path).map_err(|e| match e {
        Error::Io(io) => Failure::Config(Error::invalid(format!("{}: {io}", path.display()))),
        Error::Parse(p) => Failure::Config(Error::invalid(format!("{}: {p}", path.display()))),
        e => run_err(e),
    })
}

fn cmd_hausdorff(a: &Path, b: &Path) -> Outcome {
    let a = read_input_cloud(a)?;
    let b = read_input_cloud(b)?;
    let d = hausdorff(&a, &b).map_err(run_err)?;
    println!("{d}");
    Ok(())
}

fn cmd_render(cloud: &Path, out: &Path, width: usize, height: usize, bounds: Option<&[f64]>) -> Outcome {
    let set = read_input_cloud(cloud)?;
    let bounds = bounds.map(|b| Bounds {
        x0: b[0],
        y0: b[1],
        x1: b[2],
        y1: b[3],
    });
    let img = render(&set, width, height, bounds).map_err(run_err)?;
    if img.dropped > 0 {
        eprintln!("warning: {} points fell outside the image or chart", img.dropped);
    }
    write_atomic(out, &img.to_ppm()).map_err(Failure::Other)?;
    println!("{} pixels lit; wrote {}", img.lit, out.display());
    Ok(())
}

fn probe_center(
    cfg: &RunConfig,
    phi: &Multifunction,
    notes: &mut Vec<String>,
) -> Result<FiniteCompact, Failure> {
    match &cfg.params.center {
        CenterSpec::Points(rows) => {
            FiniteCompact::from_rows(cfg.system.space, rows).map_err(Failure::Config)
        }
        CenterSpec::Named(n) if n == "seed" => initial_set(cfg),
        CenterSpec::Named(_) => {
            let f = solver(cfg, phi)?;
            let hint = cfg.system.lipschitz_bound().filter(|l| *l < 1.0);
            let r = f
                .solve_attractor(&initial_set(cfg)?, cfg.params.tol, cfg.params.max_iter, hint)
                .map_err(run_err)?;
            let mut center = r.attractor;
            let cap = cfg.params.center_max_points;
            if center.len() > cap {
                let full = center.len();
                let mut eps = cfg.solver_prune_eps().max(1e-9);
                while center.len() > cap {
                    eps *= 2.0;
                    center = prune(&center, eps, cfg.params.prune_mode).map_err(run_err)?;
                }
                notes.push(format!(
                    "center: solved attractor ({full} points) thinned to a {eps}-net of {} points",
                    center.len()
                ));
            }
            Ok(center)
        }
    }
}

fn verdict(passed: bool, what: &str) -> Outcome {
    if passed {
        Ok(())
    } else {
        Err(Failure::Verdict(what.to_string()))
    }
}

#[derive(Serialize)]
struct ModulusResult {
    report: hutchinson_core::probes::ContinuityReport,
    eta_bound: Option<hutchinson_core::probes::EtaBoundCheck>,
}

fn cmd_probe(kind: ProbeKind, c: &Common) -> Outcome {
    let cfg = load(c)?;
    let phi = system(&cfg)?;
    let p = &cfg.params;
    let declared = cfg.system.declared_class;
    let sampling = Sampling::new(p.seed).with_samples(p.samples_per_delta);
    let file = format!("probe_{}.json", kind.name());
    let mut notes = system_notes(&cfg);
    match kind {
        ProbeKind::Modulus => {
            let center = probe_center(&cfg, &phi, &mut notes)?;
            let image_size = phi.image(&center).map_err(run_err)?.len();
            let f = if image_size > POINT_CAP {
                notes.push(format!(
                    "image of the center has {image_size} points; probing with prune_eps = {}",
                    cfg.solver_prune_eps()
                ));
                solver(&cfg, &phi)?
            } else {
                HutchinsonOperator::new(phi.clone())
            };
            let report = hutchinson_modulus(&f, &center, &p.delta_grid, p.samples_per_delta, p.seed)
                .map_err(run_err)?;
            let eta_bound = match (&cfg.system.comparison, declared) {
                (Some(eta), RegularityClass::WeakContraction | RegularityClass::Contraction) => Some(
                    eta_bound_check(&f, &center, &p.delta_grid, p.samples_per_delta, p.seed, eta)
                        .map_err(run_err)?,
                ),
                _ => None,
            };
            let decaying = report.verdict == ContinuityVerdict::Decaying;
            let eta_ok = eta_bound.as_ref().map_or(true, |e| e.grid_ok && e.pair_violations == 0);
            let passed = (!declared.is_continuous() || decaying) && eta_ok;
            if declared.is_continuous() && !decaying {
                notes.push(format!(
                    "declared {declared:?} but the Hutchinson modulus is {:?}",
                    report.verdict
                ));
            }
            write_atomic(&p.out.join("modulus.csv"), report.to_csv().as_bytes())
                .map_err(Failure::Other)?;
            println!("modulus verdict {:?}, omega {:?}", report.verdict, report.moduli);
            write_report(&cfg, "probe modulus", &file, passed, notes, ModulusResult { report, eta_bound })?;
            verdict(passed, "modulus")
        }
        ProbeKind::SingletonIdentity => {
            let points = phi.sample_points(p.points, p.seed);
            let f = HutchinsonOperator::new(phi.clone());
            let r = singleton_identity_check(&phi, &f, &points).map_err(run_err)?;
            println!("singleton identity: {} pairs, passed {}", r.pairs_checked, r.passed);
            write_report(&cfg, "probe singleton-identity", &file, r.passed, notes, &r)?;
            verdict(r.passed, "singleton identity")
        }
        ProbeKind::Usc => {
            let centers = phi.sample_points(16, p.seed);
            let probes = centers
                .iter()
                .map(|x| usc_probe(&phi, x, p.usc_eps, &p.delta_grid, sampling))
                .collect::<Result<Vec<_>, _>>()
                .map_err(run_err)?;
            let passed = probes.iter().all(|r| r.delta.is_some());
            println!("usc probe at {} centers, passed {passed}", probes.len());
            write_report(&cfg, "probe usc", &file, passed, notes, &probes)?;
            verdict(passed, "usc")
        }
        ProbeKind::FamilyUnion => {
            let family = phi.members();
            let x0 = match &p.x0 {
                Some(c) => Point::new(cfg.system.space, c).map_err(Failure::Config)?,
                None => cfg.system.space.base_point(),
            };
            let r = family_union_harness(
                &family,
                p.net_radius.unwrap_or(0.0),
                &x0,
                &p.delta_grid,
                sampling,
                p.pairs,
            )
            .map_err(run_err)?;
            if p.net_radius.is_none() {
                notes.push("no net radius declared; net bookkeeping not checked".into());
            }
            if !r.hypothesis_met {
                notes.push("hypothesis unmet: some member is not continuous at x0".into());
            }
            let passed = r.dominated
                && (!r.hypothesis_met || r.union_verdict == ContinuityVerdict::Decaying)
                && (p.net_radius.is_none() || r.net_radius_ok);
            println!(
                "family of {}: union Lipschitz {}, dominated {}, union verdict {:?}",
                r.members, r.union_lipschitz, r.dominated, r.union_verdict
            );
            write_report(&cfg, "probe family-union", &file, passed, notes, &r)?;
            verdict(passed, "family union")
        }
        ProbeKind::Crosscheck => {
            let f = HutchinsonOperator::new(phi.clone());
            let eta = cfg.system.comparison.as_ref();
            let t = preservation_crosscheck(&phi, &f, p.pairs, p.seed, eta).map_err(run_err)?;
            for row in &t.rows {
                println!("{:<18} {:<28} {:<28} agree {}", row.property, row.pointwise, row.hutchinson, row.agree);
            }
            write_report(&cfg, "probe crosscheck", &file, t.passed, notes, &t)?;
            verdict(t.passed, "crosscheck")
        }
    }
}

fn cmd_classify(c: &Common) -> Outcome {
    let cfg = load(c)?;
    let phi = system(&cfg)?;
    let p = &cfg.params;
    let opts = ClassifyOptions {
        seed: p.seed,
        pairs: p.pairs,
        eta: cfg.system.comparison.clone(),
        deltas: p.delta_grid.clone(),
        samples_per_delta: p.samples_per_delta,
        usc_eps: p.usc_eps,
        ..ClassifyOptions::default()
    };
    let v = classify(&phi, &opts).map_err(run_err)?;
    let declared = cfg.system.declared_class;
    let passed = v.class == declared || v.class.implies(declared);
    let mut notes = system_notes(&cfg);
    if !passed {
        notes.push(format!("declared {declared:?}, observed {:?}", v.class));
    }
    println!("class {:?} (declared {declared:?})", v.class);
    write_report(&cfg, "classify", "classify.json", passed, notes, &v)?;
    verdict(passed, "classification")
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(v) = std::env::var("HUTCHINSON_THREADS") else {
        return Ok(());
    };
    let n: usize = v.trim().parse().map_err(|_| {
        Failure::Config(Error::invalid(format!("HUTCHINSON_THREADS must be a count, got {v:?}")))
    })?;
    if n > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Other(Error::invalid(e.to_string())))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|_| match &cli.command {
        Command::Attractor(c) => cmd_attractor(c),
        Command::Hausdorff { a, b } => cmd_hausdorff(a, b),
        Command::Probe { kind, common } => cmd_probe(*kind, common),
        Command::Classify(c) => cmd_classify(c),
        Command::Render {
            cloud,
            out,
            width,
            height,
            bounds,
        } => cmd_render(cloud, out, *width, *height, bounds.as_deref()),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Config(e) => eprintln!("config error: {e}"),
                Failure::Other(e) => eprintln!("error: {e}"),
                Failure::NotConverged => eprintln!("solver did not converge"),
                Failure::Verdict(what) => eprintln!("{what} check failed"),
            }
            ExitCode::from(f.code())
        }
    }
}
