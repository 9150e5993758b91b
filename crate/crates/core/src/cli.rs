//! `molbo` command line.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use log::info;

use crate::bo::{bo_run, BoOutcome};
use crate::chem::{morgan_fingerprint, parse_smiles, tanimoto, FingerprintMode, Molecule};
use crate::config::{resolve_output, RunConfigFile};
use crate::error::{Error, Result};
use crate::objectives::{auc_topk, summarize_runs, ObjectiveConfig, RunHistory, SummaryTable};
use crate::pitfalls::{assert_pitfalls, sweep, write_sweeps, Demo1DProblem, SWEEP_LENGTHSCALES, SWEEP_SIGMAS};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_ASSERTION: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "molbo", version, about = "Bayesian optimization over molecules")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// 1-D pitfall sweeps (CSV) and ordering checks.
    Demo1d {
        #[arg(long, default_value = "demo1d")]
        out: PathBuf,
    },
    /// Print the fingerprint of one molecule.
    Fp {
        smiles: String,
        #[arg(long, default_value_t = 2)]
        radius: u32,
        #[arg(long, default_value = "count")]
        mode: FingerprintMode,
    },
    /// Binary and count Tanimoto similarity of two molecules.
    FpCompare {
        a: String,
        b: String,
        #[arg(long, default_value_t = 2)]
        radius: u32,
    },
    /// Single optimization run.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Every objective for every seed in `a..b` (end exclusive).
    Bench {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "0..5")]
        seeds: String,
    },
    /// AUC top-10 table for every run below a directory.
    Report { dir: PathBuf },
}

fn parse_seed_range(s: &str) -> Result<std::ops::Range<u64>> {
    let (a, b) = s
        .split_once("..")
        .ok_or_else(|| Error::input(format!("seed range {s:?} is not of the form a..b")))?;
    let parse = |t: &str| {
        t.trim()
            .parse::<u64>()
            .map_err(|e| Error::input(format!("seed range {s:?}: {e}")))
    };
    let (a, b) = (parse(a)?, parse(b)?);
    if a >= b {
        return Err(Error::input(format!("seed range {s:?} is empty")));
    }
    Ok(a..b)
}

fn molecule(smiles: &str) -> Result<Molecule> {
    parse_smiles(smiles).map_err(|e| Error::input(format!("{smiles:?}: {e}")))
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn demo1d(out: &Path) -> Result<bool> {
    let problem = Demo1DProblem::default();
    let tables = sweep(&problem, &SWEEP_SIGMAS, &SWEEP_LENGTHSCALES)?;
    let dir = resolve_output(out);
    for p in write_sweeps(&tables, &dir)? {
        println!("wrote {}", p.display());
    }
    let checks = assert_pitfalls(&problem)?;
    for c in &checks {
        println!("{c}");
    }
    Ok(checks.iter().all(|c| c.passed))
}

fn fp(smiles: &str, radius: u32, mode: FingerprintMode) -> Result<()> {
    if radius > 8 {
        return Err(Error::input(format!("radius {radius} exceeds 8")));
    }
    let m = molecule(smiles)?;
    let f = morgan_fingerprint(&m, radius, mode);
    println!("# smiles\t{}", m.to_smiles());
    println!("# formula\t{}", m.formula_string());
    println!("# radius\t{radius}");
    println!("# entries\t{}\ttotal\t{}", f.entries().len(), f.total());
    println!("id\tcount");
    for &(id, c) in f.entries() {
        println!("{id:016x}\t{c}");
    }
    Ok(())
}

fn fp_compare(a: &str, b: &str, radius: u32) -> Result<()> {
    if radius > 8 {
        return Err(Error::input(format!("radius {radius} exceeds 8")));
    }
    let (ma, mb) = (molecule(a)?, molecule(b)?);
    let (ca, cb) = (
        morgan_fingerprint(&ma, radius, FingerprintMode::Count),
        morgan_fingerprint(&mb, radius, FingerprintMode::Count),
    );
    let (ba, bb) = (ca.to_binary(), cb.to_binary());
    println!("binary_tanimoto\t{}", tanimoto(&ba, &bb)?);
    println!("count_tanimoto\t{}", tanimoto(&ca, &cb)?);
    println!("binary_identical\t{}", ba == bb);
    println!("count_identical\t{}", ca == cb);
    println!("same_molecule\t{}", ma.canonical_key() == mb.canonical_key());
    Ok(())
}

fn persist(dir: &Path, resolved: &str, outcome: &BoOutcome, auc: f64, objective: &str) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write(&dir.join("config.resolved"), resolved)?;
    outcome.history.write_jsonl(&dir.join("history.jsonl"))?;
    write(&dir.join("rounds.jsonl"), &outcome.rounds_jsonl())?;
    let mut per = BTreeMap::new();
    per.insert(objective.to_string(), vec![auc]);
    write(&dir.join("summary.tsv"), &summarize_runs(&per)?.to_tsv())
}

fn single_run(cfg: &RunConfigFile, objective: &ObjectiveConfig, dir: &Path) -> Result<f64> {
    let spec = objective.build()?;
    let bo = cfg.bo_config()?;
    let seeds = cfg.seed_molecules()?;
    let mut resolved = cfg.clone();
    resolved.objective = Some(objective.clone());
    resolved.objectives.clear();
    resolved.run.output_dir = dir.display().to_string();
    let outcome = bo_run(&bo, &spec, &seeds)?;
    let auc = auc_topk(&outcome.history, 10, bo.total_budget)?;
    persist(dir, &resolved.resolved(), &outcome, auc, objective.name.as_str())?;
    Ok(auc)
}

fn run(config: &Path) -> Result<()> {
    let cfg = RunConfigFile::load(config)?;
    let dir = cfg.output_dir();
    let objective = cfg.run_objective();
    let auc = single_run(&cfg, &objective, &dir)?;
    println!("{}\tauc_top10\t{auc:.6}\t{}", objective.name, dir.display());
    Ok(())
}

fn bench(config: &Path, seeds: &str) -> Result<()> {
    let range = parse_seed_range(seeds)?;
    let cfg = RunConfigFile::load(config)?;
    let root = cfg.output_dir();
    let mut per: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for objective in cfg.bench_objectives() {
        for seed in range.clone() {
            let mut cell = cfg.clone();
            cell.run.rng_seed = seed;
            let dir = root.join(&objective.name).join(format!("seed{seed}"));
            let auc = single_run(&cell, &objective, &dir)?;
            info!("{} seed {seed}: AUC {auc:.4}", objective.name);
            per.entry(objective.name.clone()).or_default().push(auc);
        }
    }
    let table = summarize_runs(&per)?;
    std::fs::create_dir_all(&root).map_err(|e| Error::io(&root, e))?;
    write(&root.join("summary.tsv"), &table.to_tsv())?;
    print!("{}", table.to_text());
    Ok(())
}

fn find_histories(dir: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
    let mut entries: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .map(|e| e.map(|e| e.path()).map_err(|err| Error::io(dir, err)))
        .collect::<Result<_>>()?;
    entries.sort();
    for p in entries {
        if p.is_dir() {
            find_histories(&p, out)?;
        } else if p.file_name().is_some_and(|n| n == "history.jsonl") {
            out.push(p);
        }
    }
    Ok(())
}

/// AUC table over every `history.jsonl` below `dir`, using the objective
/// name and budget from the neighbouring `config.resolved`.
pub fn report_table(dir: &Path) -> Result<SummaryTable> {
    let mut histories = Vec::new();
    find_histories(dir, &mut histories)?;
    if histories.is_empty() {
        return Err(Error::input(format!("no history.jsonl under {}", dir.display())));
    }
    let mut per: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for h in histories {
        let run_dir = h.parent().unwrap();
        let cfg = RunConfigFile::load(&run_dir.join("config.resolved"))?;
        let history = RunHistory::read_jsonl(&h)?;
        let auc = auc_topk(&history, 10, cfg.run.total_budget)?;
        per.entry(cfg.run_objective().name).or_default().push(auc);
    }
    summarize_runs(&per)
}

fn report(dir: &Path) -> Result<()> {
    let table = report_table(dir)?;
    write(&dir.join("summary.tsv"), &table.to_tsv())?;
    print!("{}", table.to_text());
    Ok(())
}

/// Run the CLI on `args` (program name first) and return the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    let result = match cli.command {
        Command::Demo1d { out } => demo1d(&out).map(|ok| if ok { EXIT_OK } else { EXIT_ASSERTION }),
        Command::Fp { smiles, radius, mode } => fp(&smiles, radius, mode).map(|_| EXIT_OK),
        Command::FpCompare { a, b, radius } => fp_compare(&a, &b, radius).map(|_| EXIT_OK),
        Command::Run { config } => run(&config).map(|_| EXIT_OK),
        Command::Bench { config, seeds } => bench(&config, &seeds).map(|_| EXIT_OK),
        Command::Report { dir } => report(&dir).map(|_| EXIT_OK),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_INPUT
        }
    }
}
