use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use rcic::bench::{self, check_fractions, generate_rumor_set, ConfigLayer, ExperimentConfig, OutputFormat, ReportRow};
use rcic::graph::load_edge_list_file;
use rcic::{oracle, Error, LogisticParams, NodeId, Result, SampleConfig};

#[derive(Parser)]
#[command(
    name = "rcic",
    version,
    about = "Protector selection against rumors under impression-counted blocking"
)]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run solvers over a parameter sweep and write a report.
    Run(RunArgs),
    /// Run solvers on nested breadth-first slices of the graph.
    Scalability {
        #[command(flatten)]
        run: RunArgs,
        /// Ascending node fractions in (0, 1].
        #[arg(long, value_delimiter = ',', default_value = "0.2,0.4,0.6,0.8,1.0")]
        fractions: Vec<f64>,
    },
    /// Sample walks and dump the store as JSON.
    Sample {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long, default_value_t = 150)]
        rumor_size: usize,
        #[arg(long, default_value_t = 0)]
        rumor_seed: u64,
        #[arg(short = 'T', default_value_t = 9)]
        walk_length: usize,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a seeded power-law (Chung-Lu) edge list.
    Generate {
        #[arg(long, default_value_t = 8846)]
        nodes: usize,
        #[arg(long, default_value_t = 7.2)]
        avg_degree: f64,
        #[arg(long, default_value_t = 88.0)]
        max_degree: f64,
        #[arg(long, default_value_t = 2.5)]
        exponent: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Brute-force checks on small random instances.
    #[command(subcommand)]
    Oracle(OracleCommand),
}

#[derive(Args)]
struct GraphArgs {
    /// Whitespace-separated edge list, one `u v` pair per line.
    #[arg(long)]
    graph: PathBuf,
    #[arg(long, conflicts_with = "undirected")]
    directed: bool,
    /// Treat edges as undirected (the default).
    #[arg(long)]
    undirected: bool,
}

#[derive(Args)]
struct RunArgs {
    /// `key = value` file with any of the settings below; flags win.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    graph: Option<PathBuf>,
    #[arg(long, conflicts_with = "undirected")]
    directed: bool,
    #[arg(long)]
    undirected: bool,
    /// Comma-separated subset of topk, greedy, bab, probab.
    #[arg(long = "algo")]
    algorithms: Option<String>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    rumor_size: Option<usize>,
    #[arg(long)]
    rumor_seed: Option<u64>,
    /// Walk length threshold.
    #[arg(short = 'T')]
    walk_length: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    /// Walks per node.
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    rho: Option<f64>,
    /// With --delta, derive the walks per node from the Hoeffding bound.
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    /// Sampling seed; repeat i uses seed + i.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    repeats: Option<usize>,
    /// `AXIS=v1,v2,...` with AXIS one of k, rumor_size, T, alpha, beta, samples, rho.
    #[arg(long)]
    sweep: Option<String>,
    /// Scale branch-and-bound bounds by the worst-case factor.
    #[arg(long)]
    certified_bounds: bool,
    /// Branch-and-bound expansion cap; 0 for none.
    #[arg(long)]
    node_cap: Option<usize>,
    /// Branch-and-bound wall-time cap in seconds.
    #[arg(long)]
    time_cap: Option<f64>,
    /// Report path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// csv or json.
    #[arg(long)]
    format: Option<String>,
}

impl RunArgs {
    fn config(self) -> Result<ExperimentConfig> {
        let file = match &self.config {
            Some(path) => ConfigLayer::from_file(path)?,
            None => ConfigLayer::default(),
        };
        let flags = ConfigLayer {
            graph: self.graph,
            directed: if self.directed {
                Some(true)
            } else if self.undirected {
                Some(false)
            } else {
                None
            },
            algorithms: self.algorithms.map(|a| vec![a]),
            k: self.k,
            rumor_size: self.rumor_size,
            rumor_seed: self.rumor_seed,
            walk_length: self.walk_length,
            alpha: self.alpha,
            beta: self.beta,
            samples: self.samples,
            rho: self.rho,
            epsilon: self.epsilon,
            delta: self.delta,
            seed: self.seed,
            repeats: self.repeats,
            certified_bounds: self.certified_bounds.then_some(true),
            node_cap: self.node_cap,
            time_cap: self.time_cap,
            sweep: self.sweep,
            out: self.out,
            format: self.format,
        };
        ExperimentConfig::from_layer(file.merge(flags))
    }
}

#[derive(Subcommand)]
enum OracleCommand {
    /// Check that the envelope objective dominates the objective.
    Dominance(OracleArgs),
    /// Search for a diminishing-returns violation of the objective.
    Submodularity(OracleArgs),
    /// Search for a diminishing-returns violation of the envelope (a bug if found).
    EnvelopeSubmodularity(OracleArgs),
    /// Exhaustive optimum on a small graph.
    Optimum {
        #[command(flatten)]
        graph: GraphArgs,
        /// Comma-separated rumor node ids (as in the file).
        #[arg(long, value_delimiter = ',', required = true)]
        rumor: Vec<u64>,
        #[arg(long)]
        k: usize,
        #[arg(short = 'T')]
        walk_length: usize,
        #[arg(long, default_value_t = 7.0)]
        alpha: f64,
        #[arg(long, default_value_t = 3.0)]
        beta: f64,
    },
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long, default_value_t = 3.0)]
    alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    #[arg(long, default_value_t = 10_000)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn output(path: Option<&PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn emit(rows: &[ReportRow], config: &ExperimentConfig) -> Result<bool> {
    let mut out = output(config.out.as_ref())?;
    match config.format {
        OutputFormat::Csv => bench::write_csv(&mut out, rows)?,
        OutputFormat::Json => {
            bench::write_json(&mut out, rows)?;
            writeln!(out)?;
        }
    }
    out.flush()?;
    match rows.iter().find(|r| !r.is_ok()) {
        Some(r) => {
            eprintln!("rcic: {}", r.status);
            Ok(false)
        }
        None => Ok(true),
    }
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn graph_directed(args: &GraphArgs) -> bool {
    args.directed && !args.undirected
}

fn run_oracle(command: OracleCommand) -> Result<bool> {
    match command {
        OracleCommand::Dominance(a) => {
            let params = LogisticParams::new(a.alpha, a.beta)?;
            let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
            match oracle::check_envelope_dominance(&params, a.trials, &mut rng)? {
                Ok(summary) => print_json(&summary).map(|_| true),
                Err(counterexample) => {
                    print_json(&counterexample)?;
                    eprintln!("rcic: envelope below the objective");
                    Ok(false)
                }
            }
        }
        OracleCommand::Submodularity(a) => {
            let params = LogisticParams::new(a.alpha, a.beta)?;
            let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
            match oracle::find_submodularity_violation(&params, a.trials, &mut rng) {
                Some(w) => print_json(&w)?,
                None => println!("no violation in {} trials", a.trials),
            }
            Ok(true)
        }
        OracleCommand::EnvelopeSubmodularity(a) => {
            let params = LogisticParams::new(a.alpha, a.beta)?;
            let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
            match oracle::find_envelope_submodularity_violation(&params, a.trials, &mut rng)? {
                Some(w) => {
                    print_json(&w)?;
                    eprintln!("rcic: envelope gains increased");
                    Ok(false)
                }
                None => {
                    println!("no violation in {} trials", a.trials);
                    Ok(true)
                }
            }
        }
        OracleCommand::Optimum {
            graph,
            rumor,
            k,
            walk_length,
            alpha,
            beta,
        } => {
            let g = load_edge_list_file(&graph.graph, graph_directed(&graph))?;
            let rumor = rumor
                .iter()
                .map(|&id| {
                    g.original_ids()
                        .binary_search(&id)
                        .map(|i| i as NodeId)
                        .map_err(|_| Error::InvalidRumorSet(format!("node {id} is not in the graph")))
                })
                .collect::<Result<Vec<_>>>()?;
            let params = LogisticParams::new(alpha, beta)?;
            let (set, value) = oracle::exhaustive_optimum(&g, &params, &rumor, k, walk_length)?;
            let ids: Vec<u64> = set.iter().map(|&v| g.original_id(v)).collect();
            print_json(&serde_json::json!({ "protectors": ids, "objective": value }))?;
            Ok(true)
        }
    }
}

fn run(cli: Cli) -> Result<bool> {
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Error::InvalidParameter(e.to_string()))?;
    }
    match cli.command {
        Command::Run(args) => {
            let config = args.config()?;
            let rows = bench::run_experiment(&config)?;
            emit(&rows, &config)
        }
        Command::Scalability { run, fractions } => {
            let config = run.config()?;
            check_fractions(&fractions)?;
            let rows = bench::run_scalability(&config, &fractions)?;
            emit(&rows, &config)
        }
        Command::Sample {
            graph,
            rumor_size,
            rumor_seed,
            walk_length,
            samples,
            seed,
            out,
        } => {
            let g = load_edge_list_file(&graph.graph, graph_directed(&graph))?;
            let rumor = generate_rumor_set(&g, rumor_size, rumor_seed)?;
            let store = rcic::build_sample_store(&g, &rumor, SampleConfig::new(walk_length, samples, seed)?)?;
            let mut w = output(out.as_ref())?;
            store.write_json(&mut w)?;
            w.flush()?;
            Ok(true)
        }
        Command::Generate {
            nodes,
            avg_degree,
            max_degree,
            exponent,
            seed,
            out,
        } => {
            let spec = bench::synthetic::SyntheticSpec {
                nodes,
                avg_degree,
                max_degree,
                exponent,
                seed,
            };
            let g = bench::synthetic::generate(&spec)?;
            let mut w = output(out.as_ref())?;
            g.write_edge_list(&mut w)?;
            w.flush()?;
            Ok(true)
        }
        Command::Oracle(command) => run_oracle(command),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("rcic: {e}");
            ExitCode::FAILURE
        }
    }
}
