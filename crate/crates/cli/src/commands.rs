//! Subcommands of the `margin` binary.
//!
//! Exit status: 0 when every verdict passes, 1 when an experiment verdict
//! fails, 2 for usage and input errors.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use margin_core::classify::{self, TrainConfig, DEFAULT_SUPPORT_THRESHOLD};
use margin_core::kernels::{Kernel, Point};
use margin_core::kmethods::{self, KdrSettings, SdrConfig};
use margin_core::losses::Loss;
use margin_core::optim::Backend;

use crate::experiments::{self, Experiment, ExperimentConfig};
use crate::formats::{self, real};
use crate::ingest::{self, Format};

#[derive(Debug, Parser)]
#[command(
    name = "margin",
    version,
    about = "Large-margin kernel classifiers and kernel methods"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train a classifier and save the model file.
    Train(TrainArgs),
    /// Print a decision value and label for every input row.
    Predict(PredictArgs),
    /// Bayes risk, optimal φ-risks and ψ-transform table of a discrete joint.
    Probe(ProbeArgs),
    /// Kernel canonical correlation and permutation independence test.
    Cca(CcaArgs),
    /// Kernel sufficient dimension reduction.
    Sdr(SdrArgs),
    /// Run one experiment of the battery and report verdicts.
    Experiment(ExperimentArgs),
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// Labelled data (csv with a trailing `label` column, or svmlight).
    #[arg(long)]
    pub data: PathBuf,
    /// Input format; inferred from the extension when omitted.
    #[arg(long)]
    pub format: Option<Format>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub input: DataArgs,
    /// linear | poly:<degree>:<offset> | gauss:<sigma> | spectrum:<p>
    #[arg(long, default_value = "gauss:1")]
    pub kernel: Kernel,
    /// hinge | logistic | exp | quad
    #[arg(long, default_value = "hinge")]
    pub loss: Loss,
    #[arg(long)]
    pub lambda: f64,
    /// subgrad | bundle
    #[arg(long, default_value = "subgrad")]
    pub backend: Backend,
    #[arg(long, default_value_t = 2000)]
    pub iterations: usize,
    /// Model file to write.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[command(flatten)]
    pub input: DataArgs,
    /// CSV of `decision,label`; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ProbeArgs {
    /// Discrete joint file.
    #[arg(long)]
    pub joint: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CcaArgs {
    /// Numeric CSV with a header; the first `--split` columns are X₁, the rest X₂.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub split: usize,
    #[arg(long, default_value = "gauss:1")]
    pub kernel: Kernel,
    /// Kernel for X₂; defaults to `--kernel`.
    #[arg(long)]
    pub kernel2: Option<Kernel>,
    #[arg(long, default_value_t = kmethods::DEFAULT_KAPPA)]
    pub kappa: f64,
    #[arg(long, default_value_t = 99)]
    pub permutations: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// CSV of the permutation-null samples.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SdrArgs {
    /// Numeric CSV with a header; the last column is the response.
    #[arg(long)]
    pub data: PathBuf,
    /// Target dimension m.
    #[arg(long)]
    pub dim: usize,
    #[arg(long, default_value = "gauss:1")]
    pub kernel: Kernel,
    /// Response kernel; defaults to `--kernel`.
    #[arg(long)]
    pub kernel_y: Option<Kernel>,
    #[arg(long, default_value_t = 1e-3)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 5)]
    pub restarts: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// sv_fraction | psi_bound | sieve_bound | calibration | consistency |
    /// cca_power | sdr_recovery
    pub name: Experiment,
    #[arg(long)]
    pub seed: u64,
    /// Comma-separated sample sizes.
    #[arg(long, value_delimiter = ',')]
    pub sizes: Option<Vec<usize>>,
    #[arg(long)]
    pub replicates: Option<usize>,
    /// c in λ_n = c·n^(-exponent).
    #[arg(long)]
    pub lambda_c: Option<f64>,
    #[arg(long)]
    pub lambda_exponent: Option<f64>,
    #[arg(long)]
    pub kernel: Option<Kernel>,
    #[arg(long)]
    pub loss: Option<Loss>,
    #[arg(long)]
    pub backend: Option<Backend>,
    #[arg(long)]
    pub iterations: Option<usize>,
    /// Add a wall-clock column (makes the report non-reproducible).
    #[arg(long)]
    pub timings: bool,
    /// Report CSV.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl ExperimentArgs {
    pub fn config(&self) -> ExperimentConfig {
        let mut c = ExperimentConfig::defaults(self.name, self.seed);
        if let Some(s) = &self.sizes {
            c.sizes = s.clone();
        }
        if let Some(r) = self.replicates {
            c.replicates = r;
        }
        if let Some(v) = self.lambda_c {
            c.schedule.c = v;
        }
        if let Some(v) = self.lambda_exponent {
            c.schedule.exponent = v;
        }
        if let Some(k) = self.kernel {
            c.kernel = k;
        }
        if let Some(l) = self.loss {
            c.loss = l;
        }
        if let Some(b) = self.backend {
            c.backend = b;
        }
        if let Some(i) = self.iterations {
            c.iterations = i;
        }
        c.timings = self.timings;
        c
    }
}

/// Parses arguments, runs the command and maps the outcome to an exit code.
pub fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

/// Runs a parsed command; `Ok(false)` means a verdict failed.
pub fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Train(a) => train(a),
        Command::Predict(a) => predict(a),
        Command::Probe(a) => probe(a),
        Command::Cca(a) => cca(a),
        Command::Sdr(a) => sdr(a),
        Command::Experiment(a) => experiment(a),
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load(input: &DataArgs) -> Result<classify::LabeledDataset> {
    ingest::ingest(&input.data, input.format).with_context(|| format!("reading {}", input.data.display()))
}

fn train(a: TrainArgs) -> Result<bool> {
    let data = load(&a.input)?;
    let mut config = TrainConfig::new(a.kernel, a.loss, a.lambda);
    config.backend = a.backend;
    config.max_iter = a.iterations;
    let fit = classify::fit(&data, &config)?;
    emit(Some(&a.out), &formats::write_model(&fit.model))?;
    println!("n {}", data.len());
    println!("objective {}", real(fit.optimization.objective));
    println!("iterations {}", fit.optimization.iterations);
    println!("norm_sq {}", real(fit.model.rkhs_norm_sq()?));
    println!(
        "support_fraction {}",
        real(fit.model.support_fraction(DEFAULT_SUPPORT_THRESHOLD))
    );
    Ok(true)
}

fn predict(a: PredictArgs) -> Result<bool> {
    let text = ingest::read_text(&a.model)?;
    let model = formats::read_model(&text).with_context(|| format!("reading {}", a.model.display()))?;
    let data = load(&a.input)?;
    let mut out = String::from("decision,label\n");
    for x in data.points() {
        let f = model.decision(x)?;
        let _ = writeln!(out, "{},{}", real(f), classify::sign(f) as i32);
    }
    emit(a.out.as_deref(), &out)?;
    Ok(true)
}

fn probe(a: ProbeArgs) -> Result<bool> {
    let text = ingest::read_text(&a.joint)?;
    let joint = formats::read_joint(&text).with_context(|| format!("reading {}", a.joint.display()))?;
    let mut out = format!("bayes_risk {}\n", real(joint.bayes_risk()));
    for loss in Loss::ALL {
        let _ = writeln!(
            out,
            "optimal_phi_risk.{} {}",
            loss.name(),
            real(joint.optimal_phi_risk(loss))
        );
    }
    out.push_str("theta");
    for loss in Loss::ALL {
        let _ = write!(out, ",psi.{}", loss.name());
    }
    out.push('\n');
    for i in 0..=10 {
        let theta = i as f64 / 10.0;
        out.push_str(&real(theta));
        for loss in Loss::ALL {
            let _ = write!(out, ",{}", real(loss.psi_transform(theta)?));
        }
        out.push('\n');
    }
    emit(a.out.as_deref(), &out)?;
    Ok(true)
}

fn table(path: &Path) -> Result<ingest::Table> {
    let text = ingest::read_text(path)?;
    ingest::parse_table(&text).with_context(|| format!("reading {}", path.display()))
}

fn cca(a: CcaArgs) -> Result<bool> {
    let t = table(&a.data)?;
    let width = t.header.len();
    if a.split == 0 || a.split >= width {
        bail!(
            "--split must leave at least one column on each side (got {} of {width})",
            a.split
        );
    }
    let mut x1 = Vec::new();
    let mut x2 = Vec::new();
    for (line, row) in &t.rows {
        if row.len() != width {
            bail!("line {line}: expected {width} columns");
        }
        x1.push(Point::Real(row[..a.split].to_vec()));
        x2.push(Point::Real(row[a.split..].to_vec()));
    }
    let k2 = a.kernel2.unwrap_or(a.kernel);
    let fit = kmethods::kernel_cca(&x1, &x2, &a.kernel, &k2, a.kappa)?;
    let test = kmethods::independence_test(&x1, &x2, &a.kernel, &k2, a.kappa, a.permutations, a.seed)?;
    println!("n {}", x1.len());
    println!("kappa {}", real(fit.kappa));
    println!("rho {}", real(fit.rho));
    println!("rho_unclipped {}", real(fit.rho_unclipped));
    println!("permutations {}", a.permutations);
    println!("p_value {}", real(test.p_value));
    if let Some(out) = &a.out {
        let mut csv = String::from("permutation,rho\n");
        for (b, rho) in test.null_samples.iter().enumerate() {
            let _ = writeln!(csv, "{b},{}", real(*rho));
        }
        emit(Some(out), &csv)?;
    }
    Ok(true)
}

fn sdr(a: SdrArgs) -> Result<bool> {
    let t = table(&a.data)?;
    let width = t.header.len();
    if width < 2 {
        bail!("need at least one input column and a response column");
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (line, row) in &t.rows {
        if row.len() != width {
            bail!("line {line}: expected {width} columns");
        }
        xs.push(row[..width - 1].to_vec());
        ys.push(Point::Real(vec![row[width - 1]]));
    }
    let config = SdrConfig {
        settings: KdrSettings {
            epsilon: a.epsilon,
            ..KdrSettings::default()
        },
        restarts: a.restarts,
        seed: a.seed,
        ..SdrConfig::default()
    };
    let ky = a.kernel_y.unwrap_or(a.kernel);
    let fit = kmethods::estimate_sdr(&xs, &ys, a.dim, &a.kernel, &ky, &config)?;
    let mut out = format!(
        "objective {}\nrestarts_used {}\nrows {}\ncols {}\n",
        real(fit.objective),
        fit.restarts_used,
        fit.basis.rows(),
        fit.basis.cols()
    );
    for i in 0..fit.basis.rows() {
        let row: Vec<String> = fit.basis.row(i).iter().map(|v| real(*v)).collect();
        let _ = writeln!(out, "b {}", row.join(" "));
    }
    emit(a.out.as_deref(), &out)?;
    Ok(true)
}

fn experiment(a: ExperimentArgs) -> Result<bool> {
    let config = a.config();
    let report = experiments::run_experiment(&config)?;
    if let Some(out) = &a.out {
        report
            .write(out)
            .with_context(|| format!("cannot write {}", out.display()))?;
    }
    for v in &report.verdicts {
        println!("{v}");
    }
    Ok(report.passed())
}
