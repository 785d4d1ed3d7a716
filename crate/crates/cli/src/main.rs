use std::fs::{self, File};
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use mlcd::decomposition::write_plot_csv;
use mlcd::dynamics::{
    iterate_time1, latin_hypercube, read_ensemble_csv, stabilization_index, write_ensemble_csv,
};
use mlcd::harness::{
    decompose, prepare_dataset, run_benchmark, run_experiment, write_experiment_outputs,
    ExperimentConfig,
};
use mlcd::homology::{conley_check, morse_report};
use mlcd::labeling::{
    balance, label_terminal_points, write_diagram_csv, LabeledDataset,
};
use mlcd::network::{init_constrained, train, write_curves_csv, ConstrainedNet, TrainConfig};
use mlcd::decomposition::RegionAssignment;
use mlcd::rng::derive_seed;

#[derive(Parser)]
#[command(name = "mlcd", version, about = "Machine-learned cubical decompositions of multistable ODEs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the seed used by the subcommand.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct WithInput {
    #[command(flatten)]
    common: Common,
    /// Input file produced by an earlier stage.
    #[arg(long)]
    input: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Sample initial conditions and iterate the time-1 map.
    Sample(Common),
    /// Cluster terminal points and write the labeled dataset.
    Cluster(WithInput),
    /// Train one network realization.
    Train(WithInput),
    /// Build and classify the cell decomposition of a trained network.
    Decompose(WithInput),
    /// Compute region homology and compare with the expected table.
    Homology(WithInput),
    /// Run all realizations of an experiment.
    Experiment(Common),
    /// Find the smallest regular grid with the expected homology.
    Benchmark(Common),
}

fn load(common: &Common) -> Result<ExperimentConfig> {
    ExperimentConfig::from_file(&common.config)
        .with_context(|| format!("reading config {}", common.config.display()))
}

fn out_file(common: &Common, name: &str) -> Result<PathBuf> {
    fs::create_dir_all(&common.out)?;
    Ok(common.out.join(name))
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    serde_json::to_writer_pretty(BufWriter::new(File::create(path)?), value)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn require_input(input: &Option<PathBuf>, what: &str) -> Result<PathBuf> {
    match input {
        Some(p) => Ok(p.clone()),
        None => bail!("--input <{what}> is required"),
    }
}

fn sample(c: &Common) -> Result<()> {
    let mut cfg = load(c)?;
    if let Some(s) = c.seed {
        cfg.sampling.seed = s;
    }
    let sys = cfg.system_spec()?;
    let points = latin_hypercube(&sys.domain, cfg.sampling.num_points, cfg.sampling.seed)?;
    let ens = iterate_time1(&sys, &points, cfg.sampling.horizon)?;
    let path = out_file(c, "ensemble.csv")?;
    write_ensemble_csv(&ens, BufWriter::new(File::create(&path)?))?;
    println!("wrote {}", path.display());
    let tol = cfg.sampling.stabilization_tol(&sys);
    match stabilization_index(&ens, tol)? {
        Some(i) => println!("stabilized at iterate {i} (tolerance {tol})"),
        None => println!("not stabilized within {} iterates (tolerance {tol})", ens.horizon()),
    }
    println!("escaped orbits: {}", ens.escaped.iter().filter(|e| **e).count());
    Ok(())
}

fn cluster(a: &WithInput) -> Result<()> {
    let c = &a.common;
    let mut cfg = load(c)?;
    if let Some(s) = c.seed {
        cfg.sampling.seed = s;
    }
    let sys = cfg.system_spec()?;
    let dataset = match &a.input {
        Some(path) => {
            let ens = read_ensemble_csv(BufReader::new(File::open(path)?))?;
            let escaped = vec![false; ens.len()];
            let tl = label_terminal_points(
                ens.terminal(),
                &escaped,
                &cfg.clustering.options(&sys),
                derive_seed(cfg.sampling.seed, 1),
            )?;
            let diag_path = out_file(c, "diagram.csv")?;
            write_diagram_csv(&tl.diagram, BufWriter::new(File::create(&diag_path)?))?;
            println!("wrote {}", diag_path.display());
            let labels = tl.labels.iter().map(|l| l.expect("no escapes")).collect();
            let raw = LabeledDataset::new(ens.initial().to_vec(), labels, tl.num_labels)?;
            balance(&raw, &cfg.sampling.balance.strategy(), derive_seed(cfg.sampling.seed, 2))?
        }
        None => {
            let data = prepare_dataset(&cfg, &sys)?;
            let diag_path = out_file(c, "diagram.csv")?;
            write_diagram_csv(&data.diagram, BufWriter::new(File::create(&diag_path)?))?;
            println!("wrote {}", diag_path.display());
            println!("class counts before balancing: {:?}", data.raw_counts);
            data.dataset
        }
    };
    println!("labels: {}, class counts: {:?}", dataset.num_labels, dataset.class_counts());
    let path = out_file(c, "dataset.csv")?;
    dataset.write_csv(BufWriter::new(File::create(&path)?))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn train_cmd(a: &WithInput) -> Result<()> {
    let c = &a.common;
    let cfg = load(c)?;
    let sys = cfg.system_spec()?;
    let dataset = match &a.input {
        Some(path) => LabeledDataset::read_csv(BufReader::new(File::open(path)?))?,
        None => prepare_dataset(&cfg, &sys)?.dataset,
    };
    let seed = c.seed.unwrap_or(cfg.master_seed);
    let net = init_constrained(&sys.domain, cfg.network.q, dataset.num_labels, derive_seed(seed, 0))?;
    let tc = TrainConfig {
        seed: derive_seed(seed, 1),
        ..cfg.training.clone()
    };
    let res = train(net, &dataset, &tc)?;
    println!(
        "epochs {}, final test loss {:.6}, converged {}, spans {}",
        res.epochs(),
        res.final_test_loss(),
        res.converged,
        res.spans
    );
    let path = out_file(c, "net.json")?;
    fs::write(&path, res.net.to_json()?)?;
    println!("wrote {}", path.display());
    let path = out_file(c, "curves.csv")?;
    write_curves_csv(&res, BufWriter::new(File::create(&path)?))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn decompose_cmd(a: &WithInput) -> Result<()> {
    let c = &a.common;
    let cfg = load(c)?;
    let sys = cfg.system_spec()?;
    let net = ConstrainedNet::from_json(&fs::read_to_string(require_input(&a.input, "net.json")?)?)?;
    let dec = decompose(&net, &sys, &cfg.epsilons)?;
    println!("cells: {}", dec.grid.len());
    for r in &dec.regions {
        let path = out_file(c, &format!("regions_eps_{}.json", r.epsilon))?;
        fs::write(&path, r.to_json()?)?;
        println!("wrote {}", path.display());
        if sys.dim == 2 {
            let path = out_file(c, &format!("cells_eps_{}.csv", r.epsilon))?;
            write_plot_csv(&dec.grid, r, BufWriter::new(File::create(&path)?))?;
            println!("wrote {}", path.display());
        }
    }
    Ok(())
}

fn homology_cmd(a: &WithInput) -> Result<()> {
    let c = &a.common;
    let cfg = load(c)?;
    let regions =
        RegionAssignment::from_json(&fs::read_to_string(require_input(&a.input, "regions.json")?)?)?;
    let check = conley_check(&regions, &cfg.expected()?)?;
    let morse = morse_report(&check);
    let per_tag_betti: serde_json::Map<String, serde_json::Value> = check
        .per_tag
        .iter()
        .map(|t| (t.tag.to_string(), serde_json::to_value(&t.betti).expect("serializable")))
        .collect();
    let result = serde_json::json!({
        "per_tag_betti": per_tag_betti,
        "success": check.success,
        "failure": check.failure,
        "morse_poset": morse,
    });
    println!("success: {}", check.success);
    if let Some(f) = &check.failure {
        println!("{f}");
    }
    write_json(&out_file(c, "homology.json")?, &result)
}

fn experiment(c: &Common) -> Result<()> {
    let mut cfg = load(c)?;
    if let Some(s) = c.seed {
        cfg.master_seed = s;
    }
    let out = run_experiment(&cfg)?;
    write_experiment_outputs(&out, &c.out)?;
    let r = &out.report;
    println!(
        "{}: {} of {} realizations included",
        r.system, r.included, r.realizations
    );
    for e in &r.success_rates {
        println!("  eps {:<5} success {:>3} ({:.0}%)", e.epsilon, e.successes, 100.0 * e.rate);
    }
    if let Some(s) = &r.cell_stats {
        println!("  cells over successes: mean {:.1}, sdev {:.1}", s.mean, s.sdev);
    }
    if let Some(v) = r.expressiveness {
        println!("  expressiveness: {v:?}");
    }
    if let Some(b) = &r.benchmark {
        println!("  regular grid minimum: {:?} cubes", b.min_cubes);
    }
    println!("wrote outputs to {}", c.out.display());
    Ok(())
}

fn benchmark(c: &Common) -> Result<()> {
    let mut cfg = load(c)?;
    if let Some(s) = c.seed {
        cfg.sampling.seed = s;
    }
    let sys = cfg.system_spec()?;
    let search = run_benchmark(&cfg, &sys, None)?;
    for p in &search.per_n {
        println!("  n {:>3}: {:>8} cubes, success {}", p.n, p.cubes, p.success);
    }
    write_json(&out_file(c, "benchmark.json")?, &serde_json::to_value(&search)?)
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Sample(c) => sample(&c),
        Command::Cluster(a) => cluster(&a),
        Command::Train(a) => train_cmd(&a),
        Command::Decompose(a) => decompose_cmd(&a),
        Command::Homology(a) => homology_cmd(&a),
        Command::Experiment(c) => experiment(&c),
        Command::Benchmark(c) => benchmark(&c),
    }
}
