use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use egonet::egoview::ViewCondition;
use egonet::graph::{generate_ba, GeneratorParams, Graph, GraphFile};
use egonet::layout::LayoutParams;
use egonet::scene::{read_json, write_json, Scene};
use egonet::study::agent::{Locomotion, ScriptedAgent};
use egonet::study::analysis::{analyze_dir, log_files, questionnaire_rows, write_questionnaire_csv};
use egonet::study::log::{EventLog, WallClock};
use egonet::study::plan::build_plan;
use egonet::study::run::{logged_results, simulate_log};
use egonet::tasks::{generate_tasks, generate_tasks_with, TaskConstraints, TaskSet};

mod serve;

#[derive(Parser)]
#[command(name = "egonet", version, about = "Egocentric network exploration engine")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a preferential-attachment graph.
    Generate {
        #[arg(long)]
        nodes: usize,
        #[arg(long)]
        edges_per_node: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Lay out a graph and calibrate navigation, producing a scene.
    Layout {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate the task set for a scene.
    Tasks {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Scale the hub-degree bounds to the graph, for small training graphs.
        #[arg(long)]
        relaxed: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build a Graeco-Latin study plan.
    Plan {
        #[arg(long)]
        participants: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a scripted agent through the task set and write its log.
    Simulate {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long)]
        tasks: PathBuf,
        /// baseline, highlight or bubble
        #[arg(long)]
        condition: ViewCondition,
        /// jumper or flyer
        #[arg(long)]
        agent: Locomotion,
        #[arg(long)]
        out: PathBuf,
    },
    /// Serve sessions over websocket, one per connection.
    Serve {
        #[arg(long)]
        scene: PathBuf,
        /// Without tasks, sessions run in free exploration mode.
        #[arg(long)]
        tasks: Option<PathBuf>,
        /// baseline, highlight or bubble
        #[arg(long, default_value = "bubble")]
        condition: ViewCondition,
        #[arg(long, env = "EGONET_PORT", default_value_t = 8765)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        #[arg(long)]
        log: PathBuf,
    },
    /// Aggregate study logs into a CSV report.
    Analyze {
        #[arg(long)]
        logs: PathBuf,
        #[arg(long)]
        out_csv: PathBuf,
        #[arg(long)]
        out_json: Option<PathBuf>,
        /// Raw questionnaire responses, one row per submission.
        #[arg(long)]
        questionnaires_csv: Option<PathBuf>,
    },
}

fn load_graph(path: &Path) -> Result<Graph> {
    let file: GraphFile = read_json(path)?;
    Ok(Graph::from_file(&file)?)
}

fn load_scene(path: &Path) -> Result<Scene> {
    Scene::load(path).with_context(|| format!("loading scene {}", path.display()))
}

fn load_tasks(path: &Path, scene: &Scene) -> Result<TaskSet> {
    let tasks: TaskSet = read_json(path)?;
    tasks
        .validate(&scene.graph, &TaskConstraints::relaxed_for(&scene.graph))
        .with_context(|| format!("{} does not fit the scene", path.display()))?;
    Ok(tasks)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate { nodes, edges_per_node, seed, out } => {
            let g = generate_ba(GeneratorParams::new(nodes, edges_per_node, seed))?;
            write_json(&out, &g.to_file())?;
            println!("{} nodes, {} edges -> {}", g.node_count(), g.edge_count(), out.display());
        }
        Command::Layout { input, seed, out } => {
            let g = load_graph(&input)?;
            let scene = Scene::build(g, LayoutParams::with_seed(seed))?;
            scene.save(&out)?;
            let c = &scene.calibration;
            println!(
                "laid out {} nodes, fly speed {:.3} units/s -> {}",
                scene.graph.node_count(),
                c.max_fly_speed,
                out.display()
            );
        }
        Command::Tasks { scene, seed, relaxed, out } => {
            let scene = load_scene(&scene)?;
            let tasks = if relaxed {
                generate_tasks_with(&scene.graph, seed, &TaskConstraints::relaxed_for(&scene.graph))?
            } else {
                generate_tasks(&scene.graph, seed).context("try --relaxed for small graphs")?
            };
            write_json(&out, &tasks)?;
            println!("{} tasks -> {}", tasks.tasks.len(), out.display());
        }
        Command::Plan { participants, seed, out } => {
            let plan = build_plan(participants, seed)?;
            write_json(&out, &plan)?;
            for row in &plan.square {
                let cells: Vec<String> = row.iter().map(|c| format!("{}/g{}", c.condition, c.graph)).collect();
                println!("{}", cells.join("  "));
            }
        }
        Command::Simulate { scene, tasks, condition, agent, out } => {
            let scene = load_scene(&scene)?;
            let tasks = load_tasks(&tasks, &scene)?;
            if agent == Locomotion::Jump && !condition.is_egocentric() {
                bail!("the jumper needs an egocentric condition; baseline only allows flying");
            }
            let mut a = ScriptedAgent::new(agent);
            let log = simulate_log(Arc::new(scene), &tasks, condition, &mut a, WallClock::simulated())?;
            log.write_jsonl(&out)?;
            let (_, records) = &log.passes()?[0];
            for r in logged_results(records) {
                let kind = r.kind.map_or("-", |k| k.code());
                println!("{kind:>6} {:8.3} s", r.completion_time);
            }
        }
        Command::Serve { scene, tasks, condition, port, host, log } => {
            let scene = load_scene(&scene)?;
            let tasks = tasks.map(|t| load_tasks(&t, &scene)).transpose()?;
            std::fs::create_dir_all(&log).with_context(|| format!("creating {}", log.display()))?;
            let runtime = tokio::runtime::Runtime::new()?;
            runtime.block_on(serve::serve(serve::ServeConfig {
                scene: Arc::new(scene),
                tasks,
                condition,
                addr: format!("{host}:{port}"),
                log_dir: log,
            }))?;
        }
        Command::Analyze { logs, out_csv, out_json, questionnaires_csv } => {
            let report = analyze_dir(&logs)?;
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            report.write_csv(create(&out_csv)?)?;
            if let Some(path) = out_json {
                write_json(&path, &report)?;
            }
            if let Some(path) = questionnaires_csv {
                let mut all = Vec::new();
                for f in log_files(&logs)? {
                    if let Ok(log) = EventLog::read_jsonl(&f) {
                        all.push((f.display().to_string(), log));
                    }
                }
                write_questionnaire_csv(&questionnaire_rows(&all)?, create(&path)?)?;
            }
            println!("{} logs, {} rows -> {}", report.logs_used, report.rows.len(), out_csv.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    tracing_subscriber::fmt().with_writer(std::io::stderr).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
