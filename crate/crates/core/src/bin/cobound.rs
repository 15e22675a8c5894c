use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use cobound::characteristics::Region;
use cobound::config::{default_rule, Pipeline, QuadratureSpec, RunConfig};
use cobound::convergence::{fd_ladder, integral_ladder, table_ladder};
use cobound::output::{self, num};
use cobound::verify::{frozen_model, Verifier, CHECK_IDS};
use cobound::zoo::CocycleSpec;
use cobound::Error;

#[derive(Parser)]
#[command(name = "cobound", version, about = "Bounded primitives for boundary 4-cocycles")]
struct Cli {
    #[command(flatten)]
    overrides: Overrides,
    #[command(subcommand)]
    command: Command,
}

/// Flags mirror the config file fields and take precedence over it.
#[derive(Args)]
struct Overrides {
    /// JSON config file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Cocycle name (`zero`, `cup_orientation`, `coboundary_crossratio`) or a JSON spec.
    #[arg(long, global = true)]
    cocycle: Option<String>,
    /// Use the uniform midpoint rule with this many nodes.
    #[arg(long, global = true)]
    quadrature_nodes: Option<usize>,
    #[arg(long, global = true)]
    check_grid: Option<usize>,
    #[arg(long, global = true)]
    fd_step: Option<f64>,
    #[arg(long, global = true)]
    guard: Option<f64>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    samples: Option<usize>,
    /// `f0(omega_+),f0(omega_-)`.
    #[arg(long, global = true, value_parser = parse_pair, allow_hyphen_values = true)]
    init: Option<(f64, f64)>,
    #[arg(long, global = true)]
    general_init: bool,
    /// `check_id=tolerance`, repeatable.
    #[arg(long = "tolerance", global = true, value_parser = parse_override)]
    tolerances: Vec<(String, f64)>,
    /// Defaults to $COBOUND_OUTPUT_DIR, then `out`.
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Replace every object under test by a planted violation.
    #[arg(long, global = true)]
    negative_control: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run the verification checks and write one JSON report per check.
    Verify {
        /// Run only these checks.
        #[arg(long = "check")]
        checks: Vec<String>,
    },
    /// Evaluate f0 on Ω-points and P on 4-tuples, or dump f0 on a grid.
    Solve {
        /// Points file: `p1,p2` or `t0,t1,t2,t3` per line.
        #[arg(long)]
        points: Option<PathBuf>,
        /// Grid size for an f0 dump.
        #[arg(long)]
        grid: Option<usize>,
        /// `plus`, `minus` or `all`.
        #[arg(long, default_value = "all")]
        region: String,
    },
    /// Orbit curves, a characteristic path and the fundamental domain.
    Figures {
        #[arg(long, default_value_t = 12)]
        orbits: usize,
        #[arg(long, value_parser = parse_pair, default_value = "1.0,4.5")]
        target: (f64, f64),
    },
    /// Tabulate c_check and r.
    Kernels,
    /// Convergence ladders in N, h and M.
    Convergence {
        #[arg(long, value_delimiter = ',', default_value = "128,256,512")]
        nodes: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "1e-2,5e-3,2.5e-3")]
        steps: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "129,257,513,1025")]
        sizes: Vec<usize>,
    },
}

fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or("expected `a,b`")?;
    Ok((
        a.trim().parse().map_err(|e| format!("{e}"))?,
        b.trim().parse().map_err(|e| format!("{e}"))?,
    ))
}

fn parse_override(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or("expected `check_id=value`")?;
    Ok((k.to_string(), v.parse().map_err(|e| format!("{e}"))?))
}

fn parse_cocycle(s: &str) -> Result<CocycleSpec, Error> {
    let json = if s.trim_start().starts_with('{') {
        s.to_string()
    } else {
        format!("{{\"kind\":\"{s}\"}}")
    };
    serde_json::from_str(&json).map_err(|e| Error::Config(format!("cocycle `{s}`: {e}")))
}

fn build_config(o: &Overrides) -> Result<RunConfig, Error> {
    let mut cfg = match &o.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(c) = &o.cocycle {
        cfg.cocycle = parse_cocycle(c)?;
    }
    if let Some(n) = o.quadrature_nodes {
        cfg.quadrature_nodes = n;
        cfg.quadrature = QuadratureSpec::Midpoint;
    }
    if let Some(m) = o.check_grid {
        cfg.check_grid = m;
    }
    if let Some(h) = o.fd_step {
        cfg.fd_step = h;
    }
    if let Some(g) = o.guard {
        cfg.guard = g;
    }
    if let Some(s) = o.seed {
        cfg.seed = s;
    }
    if let Some(n) = o.samples {
        cfg.samples = n;
    }
    if let Some(i) = o.init {
        cfg.init_values = i;
    }
    cfg.general_init |= o.general_init;
    cfg.negative_control |= o.negative_control;
    for (k, v) in &o.tolerances {
        cfg.tolerance_overrides.insert(k.clone(), *v);
    }
    if o.output_dir.is_some() {
        cfg.output_dir = o.output_dir.clone();
    }
    if o.threads.is_some() {
        cfg.threads = o.threads;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn meta(p: &Pipeline) -> Vec<(&'static str, String)> {
    vec![
        ("config_hash", p.config.hash()),
        ("cocycle", p.cocycle.name().to_string()),
        ("quadrature", p.rule.describe()),
        ("check_grid", p.config.check_grid.to_string()),
        ("guard", num(p.config.guard)),
        ("seed", p.config.seed.to_string()),
    ]
}

/// `Ok(true)` when everything passed.
fn run(cli: Cli) -> Result<bool, Error> {
    let cfg = build_config(&cli.overrides)?;
    if let Some(n) = cfg.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(e.to_string()))?;
    }
    let out = cfg.resolved_output_dir();
    let pipeline = Pipeline::new(cfg)?;
    let started = Instant::now();
    match cli.command {
        Command::Verify { checks } => {
            let ids: Vec<String> = if checks.is_empty() {
                CHECK_IDS.iter().map(|s| s.to_string()).collect()
            } else {
                checks
            };
            let v = Verifier::new(&pipeline);
            let mut reports = Vec::new();
            for id in &ids {
                let r = v.run(id)?;
                println!("{}", r.line());
                reports.push(r);
            }
            let dir = out.join("verify");
            output::write_reports(&dir, &reports)?;
            let passed = reports.iter().all(|r| r.passed);
            println!(
                "{} of {} checks passed; reports in {}",
                reports.iter().filter(|r| r.passed).count(),
                reports.len(),
                dir.display()
            );
            return Ok(passed);
        }
        Command::Solve { points, grid, region } => {
            let solver = pipeline.solver()?;
            let guard = pipeline.config.guard;
            let mut m = meta(&pipeline);
            let init = pipeline.config.effective_init();
            m.push(("init", format!("{},{}", num(init.0), num(init.1))));
            if let Some(path) = points {
                let text = std::fs::read_to_string(&path)?;
                let (pairs, tuples) = output::read_points(&text)?;
                let mut rows = output::solve_f0(&solver, &pairs, guard);
                rows.extend(output::solve_primitive(&pipeline.primitive()?, &tuples, guard));
                let (path, mut w) = output::create(&out, "solve.csv")?;
                output::write_solve_rows(&mut w, &rows, &m)?;
                println!("{} rows -> {}", rows.len(), path.display());
            }
            if let Some(n) = grid {
                let region = match region.as_str() {
                    "plus" => Some(Region::Plus),
                    "minus" => Some(Region::Minus),
                    "all" => None,
                    other => return Err(Error::Config(format!("unknown region `{other}`"))),
                };
                let rows = output::solve_f0(&solver, &output::grid_points(n, region), guard);
                m.push(("grid", n.to_string()));
                let (path, mut w) = output::create(&out, "f0_grid.csv")?;
                output::write_f0_grid(&mut w, &rows, &m)?;
                println!("{} grid points -> {}", rows.len(), path.display());
                if region.is_none() {
                    println!(
                        "antidiagonal antisymmetry (relative) {:.3e}",
                        output::antidiagonal_antisymmetry(&rows, n)
                    );
                }
            }
        }
        Command::Figures { orbits, target } => {
            let m = vec![("config_hash", pipeline.config.hash())];
            let (a, n) = output::orbit_curves(orbits, 400);
            let (p, mut w) = output::create(&out, "orbits_a.csv")?;
            output::write_curves(&mut w, &a, &m)?;
            println!(
                "A-orbits -> {} (invariant defect {:.2e})",
                p.display(),
                output::invariant_defect(&a, output::a_invariant)
            );
            let (p, mut w) = output::create(&out, "orbits_n.csv")?;
            output::write_curves(&mut w, &n, &m)?;
            println!(
                "N-orbits -> {} (invariant defect {:.2e})",
                p.display(),
                output::invariant_defect(&n, output::n_invariant)
            );
            let path = output::characteristic_path(target.0, target.1, 200)?;
            let (p, mut w) = output::create(&out, "path.csv")?;
            output::write_curves(&mut w, &[path], &m)?;
            println!("characteristic path -> {}", p.display());
            let mut curves = vec![output::fundamental_domain_boundary()];
            curves.extend(output::segment_images(400));
            let (p, mut w) = output::create(&out, "domain.csv")?;
            output::write_curves(&mut w, &curves, &m)?;
            println!("fundamental domain -> {}", p.display());
        }
        Command::Kernels => {
            let inh = pipeline.inhomogeneities()?;
            let (p, mut w) = output::create(&out, "kernel_table.csv")?;
            inh.table().write_csv(&mut w, &pipeline.rule.describe(), &pipeline.cocycle.name())?;
            println!("kernel table -> {} (sup |r| = {:.6e})", p.display(), inh.table().sup_r());
        }
        Command::Convergence { nodes, steps, sizes } => {
            let cfg = &pipeline.config;
            let reference = default_rule(&pipeline.cocycle);
            let ladders = vec![
                integral_ladder(&pipeline.cocycle, &reference, &nodes, cfg.samples.max(50), cfg.seed)?,
                fd_ladder(&pipeline, &steps),
                table_ladder(&pipeline.cocycle, &pipeline.rule, &sizes, cfg.guard)?,
            ];
            for l in &ladders {
                println!("{} ({}): errors {:?} orders {:?}", l.name, l.parameter_name, l.errors, l.orders);
            }
            let pc = pipeline.cocycle.claims.piecewise_constant;
            let models: serde_json::Map<String, serde_json::Value> = ["kernel_rotation", "i_flow", "dcheck_identity", "frobenius"]
                .iter()
                .map(|id| (id.to_string(), serde_json::to_value(frozen_model(id, pc)).expect("serialises")))
                .collect();
            let report = serde_json::json!({
                "config_hash": cfg.hash(),
                "cocycle": pipeline.cocycle.name(),
                "ladders": ladders,
                "frozen_models": models,
            });
            std::fs::create_dir_all(&out)?;
            let path = out.join("convergence.json");
            std::fs::write(&path, serde_json::to_string_pretty(&report)? + "\n")?;
            println!("-> {}", path.display());
        }
    }
    log::info!("finished in {:?}", started.elapsed());
    Ok(true)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
