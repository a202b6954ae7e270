use std::fmt;
use std::fs;
use std::path::Path;

use infoplan::config::{RunArtifact, RunConfig};
use infoplan::planners::{extract_local_grid, DEFAULT_LOCAL_GRID_SIZE};
use infoplan::render::{probability_pgm, render_frame_svg, FrameView};
use infoplan::sim::{make_environment, run_benchmark, run_configured_episode, Frame};
use infoplan::world::MapFile;
use infoplan::{derive_seed, PlannerKind};

use crate::{BenchmarkArgs, Cli, Command, GenerateArgs, RenderArgs, RunArgs};

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration: {m}"),
            CliError::Io(m) => write!(f, "i/o: {m}"),
        }
    }
}

fn config_err(e: impl fmt::Display) -> CliError {
    CliError::Config(e.to_string())
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn write(path: &Path, bytes: impl AsRef<[u8]>) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    }
    fs::write(path, bytes).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn load_config(cli: &Cli) -> Result<RunConfig, CliError> {
    match &cli.config {
        Some(path) => RunConfig::from_json(&read(path)?).map_err(config_err),
        None => Ok(RunConfig::default()),
    }
}

pub fn dispatch(cli: &Cli) -> Result<(), CliError> {
    let config = load_config(cli)?;
    match &cli.command {
        Command::GenerateEnv(args) => generate_env(config, args),
        Command::Run(args) => run(config, args),
        Command::Benchmark(args) => benchmark(config, args),
        Command::Render(args) => render(args),
    }
}

fn generate_env(mut config: RunConfig, args: &GenerateArgs) -> Result<(), CliError> {
    if let Some(seed) = args.seed {
        config.world.seed = seed;
    }
    if let Some(n) = args.obstacles {
        config.world.n_obstacles = n;
    }
    if let Some(d) = args.density {
        config.world.target_density = d;
    }
    config.validate().map_err(config_err)?;
    let w = &config.world;
    let (world, targets) = make_environment(&w.generator, w.target_density, w.n_obstacles, w.seed).map_err(config_err)?;
    let mut file = MapFile::new(world, &targets);
    file.target_seed = Some(derive_seed(w.seed, &format!("targets/{}", w.n_obstacles)));
    file.target_density = Some(w.target_density);
    write(&args.out, file.to_json())?;
    if let Some(svg) = &args.svg {
        write(svg, render_frame_svg(&FrameView::map_only(&file.world)))?;
    }
    println!("seed {} obstacles {} -> {}", w.seed, w.n_obstacles, args.out.display());
    Ok(())
}

fn run(mut config: RunConfig, args: &RunArgs) -> Result<(), CliError> {
    if let Some(seed) = args.seed {
        config.world.seed = seed;
    }
    if let Some(n) = args.obstacles {
        config.world.n_obstacles = n;
    }
    if let Some(p) = &args.planner {
        config.episode.planner = p.parse::<PlannerKind>().map_err(CliError::Config)?;
    }
    if let Some(b) = args.beta {
        config.episode.beta = b;
    }
    if let Some(t) = args.t_max {
        config.episode.t_max = t;
    }
    if let Some(s) = args.episode_seed {
        config.episode.seed = s;
    }
    if args.mpc_trace.is_some() {
        config.episode.mpc.solver.trace = true;
    }
    if args.render_every == Some(0) {
        return Err(CliError::Config("--render-every must be at least 1".into()));
    }
    config.validate().map_err(config_err)?;

    let map = match &args.map {
        Some(path) => MapFile::from_json(&read(path)?).map_err(config_err)?,
        None => {
            let w = &config.world;
            let (world, targets) = make_environment(&w.generator, w.target_density, w.n_obstacles, w.seed).map_err(config_err)?;
            let mut file = MapFile::new(world, &targets);
            file.target_seed = Some(derive_seed(w.seed, &format!("targets/{}", w.n_obstacles)));
            file.target_density = Some(w.target_density);
            file
        }
    };
    let targets = map.targets().map_err(config_err)?;

    let mut frame_error: Option<CliError> = None;
    let mut frames = 0usize;
    let result = {
        let mut observer = |f: &Frame| {
            let Some(k) = args.render_every else { return };
            if !f.t.is_multiple_of(k) || frame_error.is_some() {
                return;
            }
            let local = extract_local_grid(f.world, f.state, DEFAULT_LOCAL_GRID_SIZE, f.world.resolution_m());
            let probabilities = f.belief.probability_grid();
            let view = FrameView {
                world: f.world,
                trajectory: f.trajectory,
                state: Some(f.state),
                p_ref: f.p_ref,
                robot_radius: config.episode.mpc.robot_radius,
                local_grid: Some(&local),
                probabilities: Some(&probabilities),
                title: Some(format!("t = {}", f.t)),
            };
            let path = args.frames_dir.join(format!("frame_{:05}.svg", f.t));
            match write(&path, render_frame_svg(&view)) {
                Ok(()) => frames += 1,
                Err(e) => frame_error = Some(e),
            }
        };
        run_configured_episode(&map.world, &targets, &config.episode, Some(&mut observer)).map_err(config_err)?
    };
    if let Some(e) = frame_error {
        return Err(e);
    }

    let mut result = result;
    if let Some(path) = &args.mpc_trace {
        let mut lines = String::new();
        for solve in result.mpc_trace.take().unwrap_or_default() {
            for rec in solve.records {
                let mut v = serde_json::to_value(&rec).map_err(|e| CliError::Io(e.to_string()))?;
                v["t"] = serde_json::json!(solve.t);
                lines.push_str(&v.to_string());
                lines.push('\n');
            }
        }
        write(path, lines)?;
    }
    config.episode.mpc.solver.trace = false;

    println!(
        "{} planner={} reward={:.3} steps={} time={:.1}s",
        if result.completed { "completed" } else { "failure" },
        result.planner,
        result.cumulative_reward,
        result.n_steps,
        result.completion_time_s
    );
    if frames > 0 {
        println!("{frames} frames in {}", args.frames_dir.display());
    }
    let artifact = RunArtifact { config, map, result };
    write(&args.out, serde_json::to_string_pretty(&artifact).map_err(|e| CliError::Io(e.to_string()))?)
}

fn benchmark(mut config: RunConfig, args: &BenchmarkArgs) -> Result<(), CliError> {
    if let Some(names) = &args.planners {
        config.benchmark.planners = names
            .iter()
            .map(|n| n.parse::<PlannerKind>())
            .collect::<Result<_, _>>()
            .map_err(CliError::Config)?;
    }
    if let Some(counts) = &args.obstacles {
        config.benchmark.obstacle_counts = counts.clone();
    }
    if let Some(m) = args.maps {
        config.benchmark.n_maps = m;
    }
    if let Some(s) = args.base_seed {
        config.benchmark.base_seed = s;
    }
    if let Some(w) = args.workers {
        config.benchmark.workers = w;
    }
    if let Some(b) = args.beta {
        config.episode.beta = b;
    }
    if let Some(t) = args.t_max {
        config.episode.t_max = t;
    }
    config.validate().map_err(config_err)?;
    let report = run_benchmark(&config.benchmark_config()).map_err(config_err)?;
    write(&args.out, report.to_json())?;
    let mut csv = Vec::new();
    report.write_csv(&mut csv).map_err(|e| CliError::Io(e.to_string()))?;
    write(&args.csv, csv)?;
    print!("{}", report.summary_table());
    let failed = report.episodes.iter().filter(|e| e.error.is_some()).count();
    if failed > 0 {
        eprintln!("{failed} episodes could not run; see the error field in {}", args.out.display());
    }
    Ok(())
}

fn render(args: &RenderArgs) -> Result<(), CliError> {
    let text = read(&args.input)?;
    if let Ok(artifact) = serde_json::from_str::<RunArtifact>(&text) {
        let world = &artifact.map.world;
        let result = &artifact.result;
        let trajectory = result.trajectory();
        let local = extract_local_grid(world, &result.final_state, DEFAULT_LOCAL_GRID_SIZE, world.resolution_m());
        let view = FrameView {
            world,
            trajectory: &trajectory,
            state: Some(&result.final_state),
            p_ref: result.step_log.last().map(|r| r.p_ref),
            robot_radius: artifact.config.episode.mpc.robot_radius,
            local_grid: Some(&local),
            probabilities: Some(&result.final_belief),
            title: Some(format!("{} t = {}", result.planner, result.n_steps)),
        };
        write(&args.out, render_frame_svg(&view))?;
        if let Some(pgm) = &args.pgm {
            write(pgm, probability_pgm(&result.final_belief))?;
        }
        if let Some(path) = &args.belief_json {
            write(path, serde_json::to_string(&result.final_belief).map_err(|e| CliError::Io(e.to_string()))?)?;
        }
        return Ok(());
    }
    let map = MapFile::from_json(&text).map_err(|e| CliError::Config(format!("{} is neither a result nor a map file: {e}", args.input.display())))?;
    if args.pgm.is_some() || args.belief_json.is_some() {
        return Err(CliError::Config("belief outputs need a result file from `run`".into()));
    }
    write(&args.out, render_frame_svg(&FrameView::map_only(&map.world)))
}
