// SPDX-License-Identifier: Apache-2.0

//! The `qpq` command line.
//!
//! Every subcommand writes its result to `<out>/<command>-<hash>.<ext>`,
//! where the hash covers the parsed arguments, and prints it to stdout.
//! Exit codes: 0 success, 1 usage or domain error, 2 infeasible target,
//! 3 protocol abort, 4 table check failure.

use std::ffi::OsString;
use std::fs;
use std::net::{TcpListener, TcpStream};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::attacks::{self, AttackFigure, AttackReport};
use crate::error::Error;
use crate::linalg::Theta;
use crate::par::Parallelism;
use crate::planner::{self, PlanFigure, PlanResult, TableId};
use crate::protocol::{run_session, Database, SessionConfig, SessionReport};
use crate::rng::SeedTriple;
use crate::series::FigureData;
use crate::wire::{run_alice_endpoint, run_bob_endpoint, AliceConfig};

pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;
pub const EXIT_ABORT: i32 = 3;
pub const EXIT_CHECK: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "qpq", version, about = "Quantum private query simulator and planner")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Output directory.
    #[arg(long, global = true, default_value = "./out")]
    pub out: PathBuf,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

impl Format {
    fn ext(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve for theta (with --k) or the smallest k (without).
    Plan(PlanArgs),
    /// Run one in-process session.
    Run(RunArgs),
    /// Serve sessions as Bob over TCP.
    Serve(ServeArgs),
    /// Query a serving Bob as Alice.
    Query(QueryArgs),
    /// Evaluate an attack model.
    Attack(AttackArgs),
    /// Regenerate the parameter tables.
    Tables(TablesArgs),
    /// Emit figure series.
    Figures(FiguresArgs),
}

#[derive(Debug, Args)]
pub struct PlanArgs {
    #[arg(long = "N")]
    pub n: usize,
    #[arg(long)]
    pub nbar: f64,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long = "theta-min", default_value_t = 0.0)]
    pub theta_min: f64,
}

#[derive(Debug, Args)]
pub struct SessionArgs {
    #[arg(long = "N")]
    pub n: usize,
    #[arg(long)]
    pub k: usize,
    #[arg(long)]
    pub theta: f64,
    #[arg(long, default_value_t = 0.0)]
    pub loss: f64,
    /// Probability that Alice's detector flips an outcome.
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long = "max-restarts", default_value_t = 20)]
    pub max_restarts: u32,
    /// Database file (0/1 text, hex, or raw bytes); random from the seed if absent.
    #[arg(long)]
    pub db: Option<PathBuf>,
}

impl SessionArgs {
    fn config(&self) -> Result<SessionConfig, Error> {
        let cfg = SessionConfig::new(self.n, self.k, Theta::new(self.theta)?, self.seed)
            .with_loss(self.loss)
            .with_noise(self.noise)
            .with_max_restarts(self.max_restarts);
        cfg.validate()?;
        Ok(cfg)
    }

    fn database(&self) -> Result<Database, Error> {
        match &self.db {
            Some(p) => Database::load(p, self.n),
            None => Ok(Database::random(self.n, self.seed)),
        }
    }
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub session: SessionArgs,
    #[arg(long)]
    pub item: usize,
    /// Fraction of Alice's known bits revealed to estimate the error rate.
    #[arg(long = "error-sample")]
    pub error_sample: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[command(flatten)]
    pub session: SessionArgs,
    #[arg(long, default_value = "127.0.0.1:7878")]
    pub address: String,
    /// Connections to serve before exiting; 0 serves forever.
    #[arg(long, default_value_t = 1)]
    pub sessions: usize,
}

#[derive(Debug, Args)]
pub struct QueryArgs {
    #[arg(long, default_value = "127.0.0.1:7878")]
    pub address: String,
    #[arg(long)]
    pub item: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long = "max-restarts", default_value_t = 20)]
    pub max_restarts: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AttackChoice {
    IndividualUsd,
    Honest,
    Helstrom,
    JointUsd,
    BobConclusive,
    BobInconclusive,
}

#[derive(Debug, Args)]
pub struct AttackArgs {
    #[arg(long, value_enum)]
    pub kind: AttackChoice,
    #[arg(long)]
    pub theta: f64,
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    #[arg(long = "N", default_value_t = 50_000)]
    pub n: usize,
    /// Monte Carlo trials (raw bits for Alice's individual attacks); 0 skips.
    #[arg(long, default_value_t = 1_000_000)]
    pub trials: u64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Run trials on one thread.
    #[arg(long)]
    pub sequential: bool,
}

#[derive(Debug, Args)]
pub struct TablesArgs {
    /// Comma-separated subset of T1,T2,T3,T4.
    #[arg(long, value_delimiter = ',')]
    pub which: Vec<String>,
    /// Compare against the published values; exit 4 on any mismatch.
    #[arg(long)]
    pub check: bool,
}

#[derive(Debug, Args)]
pub struct FiguresArgs {
    /// F1 to F5.
    #[arg(long)]
    pub which: String,
    /// Grid density: points per decade for F1, angle points for F3 and F5.
    #[arg(long, default_value_t = 50)]
    pub points: usize,
}

/// Failure carrying the exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Infeasible(_) => EXIT_INFEASIBLE,
            Error::RestartRequired
            | Error::ErrorRateTooHigh { .. }
            | Error::PhotonBudget(_)
            | Error::InsufficientKey { .. }
            | Error::Wire(_) => EXIT_ABORT,
            _ => EXIT_USAGE,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Error::from(e).into()
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: message.into(),
    }
}

/// Parses `args` (including the program name), runs, and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { 0 };
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

/// Hex prefix of the SHA-256 of the parsed subcommand and format.
fn params_hash(cli: &Cli) -> String {
    let digest = Sha256::digest(format!("{:?}|{:?}", cli.command, cli.format));
    hex::encode(&digest[..6])
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Plan(_) => "plan",
        Command::Run(_) => "run",
        Command::Serve(_) => "serve",
        Command::Query(_) => "query",
        Command::Attack(_) => "attack",
        Command::Tables(_) => "tables",
        Command::Figures(_) => "figures",
    }
}

/// Output path for this invocation, with an optional suffix before the extension.
pub fn output_path(cli: &Cli, suffix: &str) -> PathBuf {
    cli.out.join(format!(
        "{}-{}{}.{}",
        command_name(&cli.command),
        params_hash(cli),
        suffix,
        cli.format.ext()
    ))
}

fn emit(cli: &Cli, suffix: &str, body: &str) -> Result<(), Failure> {
    let path = output_path(cli, suffix);
    write_file(&path, body)?;
    print!("{body}");
    if !body.ends_with('\n') {
        println!();
    }
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn write_file(path: &Path, body: &str) -> std::io::Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, body)
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("value serializes");
    s.push('\n');
    s
}

/// Two-column `field,value` CSV of a JSON object, nested keys joined by dots.
fn json_fields_csv(v: &serde_json::Value) -> String {
    fn walk(prefix: &str, v: &serde_json::Value, out: &mut Vec<(String, String)>) {
        let key = |k: &str| if prefix.is_empty() { k.to_owned() } else { format!("{prefix}.{k}") };
        match v {
            serde_json::Value::Object(m) => m.iter().for_each(|(k, v)| walk(&key(k), v, out)),
            serde_json::Value::Array(a) => a.iter().enumerate().for_each(|(i, v)| walk(&key(&i.to_string()), v, out)),
            serde_json::Value::Null => out.push((prefix.to_owned(), String::new())),
            serde_json::Value::String(s) => out.push((prefix.to_owned(), s.clone())),
            other => out.push((prefix.to_owned(), other.to_string())),
        }
    }
    let mut rows = Vec::new();
    walk("", v, &mut rows);
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["field", "value"]).unwrap();
    for (k, v) in rows {
        w.write_record([k, v]).unwrap();
    }
    String::from_utf8(w.into_inner().unwrap()).unwrap()
}

fn render<T: Serialize>(cli: &Cli, v: &T) -> String {
    match cli.format {
        Format::Json => to_json(v),
        Format::Csv => json_fields_csv(&serde_json::to_value(v).expect("value serializes")),
    }
}

fn report_exit(report: &SessionReport) -> Result<(), Failure> {
    if report.success {
        Ok(())
    } else {
        Err(Failure {
            code: EXIT_ABORT,
            message: report.failure.clone().unwrap_or_else(|| "session failed".into()),
        })
    }
}

pub fn run(cli: &Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::Plan(a) => cmd_plan(cli, a),
        Command::Run(a) => cmd_run(cli, a),
        Command::Serve(a) => cmd_serve(cli, a),
        Command::Query(a) => cmd_query(cli, a),
        Command::Attack(a) => cmd_attack(cli, a),
        Command::Tables(a) => cmd_tables(cli, a),
        Command::Figures(a) => cmd_figures(cli, a),
    }
}

fn cmd_plan(cli: &Cli, a: &PlanArgs) -> Result<(), Failure> {
    let plan: PlanResult = match a.k {
        Some(k) => PlanResult::new(a.n, k, planner::solve_theta(a.n, k, a.nbar)?),
        None => planner::plan_min_k(a.n, a.nbar, a.theta_min)?,
    };
    emit(cli, "", &render(cli, &plan))
}

fn cmd_run(cli: &Cli, a: &RunArgs) -> Result<(), Failure> {
    let mut cfg = a.session.config()?;
    cfg.error_sample = a.error_sample;
    let db = a.session.database()?;
    let out = run_session(&cfg, &db, a.item)?;
    emit(cli, "", &render(cli, &out.report))?;
    report_exit(&out.report)
}

fn cmd_serve(cli: &Cli, a: &ServeArgs) -> Result<(), Failure> {
    let cfg = a.session.config()?;
    let db = a.session.database()?;
    let listener = TcpListener::bind(&a.address)?;
    eprintln!("listening on {}", listener.local_addr()?);
    let mut handles = Vec::new();
    for (idx, conn) in listener.incoming().enumerate() {
        let mut conn = conn?;
        let (cfg, db) = (cfg.clone(), db.clone());
        handles.push(std::thread::spawn(move || run_bob_endpoint(&cfg, &db, &mut conn).map(|s| (idx, s))));
        if a.sessions != 0 && handles.len() >= a.sessions {
            break;
        }
    }
    let mut failure = None;
    for h in handles {
        match h.join().map_err(|_| usage("session thread panicked"))? {
            Ok((idx, session)) => {
                let suffix = if a.sessions == 1 { String::new() } else { format!("-{idx}") };
                emit(cli, &suffix, &render(cli, &session.report))?;
                if let Err(f) = report_exit(&session.report) {
                    failure = Some(f);
                }
            }
            Err(e) => failure = Some(Failure::from(e)),
        }
    }
    failure.map_or(Ok(()), Err)
}

fn cmd_query(cli: &Cli, a: &QueryArgs) -> Result<(), Failure> {
    let mut conn = TcpStream::connect(&a.address)?;
    let mut cfg = AliceConfig::new(SeedTriple::from_master(a.seed).measurement);
    cfg.max_restarts = a.max_restarts;
    let session = run_alice_endpoint(&cfg, a.item, &mut conn)?;
    emit(cli, "", &render(cli, &session.report))?;
    report_exit(&session.report)
}

fn cmd_attack(cli: &Cli, a: &AttackArgs) -> Result<(), Failure> {
    let theta = Theta::new(a.theta)?;
    let mode = if a.sequential { Parallelism::Sequential } else { Parallelism::Auto };
    let report: AttackReport = match a.kind {
        AttackChoice::IndividualUsd => attacks::alice_individual_usd(a.n, theta, a.k, a.trials, a.seed, mode)?,
        AttackChoice::Honest => attacks::alice_honest(a.n, theta, a.k, a.trials, a.seed, mode)?,
        AttackChoice::Helstrom => attacks::alice_joint_helstrom(theta, a.k, a.trials, a.seed, mode)?,
        AttackChoice::JointUsd => attacks::joint_usd_report(theta, a.k, Some(a.n))?,
        AttackChoice::BobConclusive => attacks::bob_conclusiveness_attack(theta, true, a.trials, a.seed, mode),
        AttackChoice::BobInconclusive => attacks::bob_conclusiveness_attack(theta, false, a.trials, a.seed, mode),
    };
    let body = match cli.format {
        Format::Json => {
            let mut s = report.to_json();
            s.push('\n');
            s
        }
        Format::Csv => report.to_csv(),
    };
    emit(cli, "", &body)
}

fn cmd_tables(cli: &Cli, a: &TablesArgs) -> Result<(), Failure> {
    let ids: Vec<TableId> = if a.which.is_empty() {
        TableId::ALL.to_vec()
    } else {
        a.which
            .iter()
            .map(|w| TableId::parse(w.trim()).ok_or_else(|| usage(format!("unknown table {w:?}"))))
            .collect::<Result<_, _>>()?
    };
    if a.check {
        let checks = planner::check_tables(&ids);
        let bad: Vec<_> = checks.iter().filter(|c| !c.ok).collect();
        let body = match cli.format {
            Format::Json => to_json(&checks),
            Format::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                for c in &checks {
                    w.serialize(c).map_err(|e| usage(e.to_string()))?;
                }
                String::from_utf8(w.into_inner().map_err(|e| usage(e.to_string()))?).unwrap()
            }
        };
        emit(cli, "-check", &body)?;
        eprintln!("{} of {} cells match", checks.len() - bad.len(), checks.len());
        return if bad.is_empty() {
            Ok(())
        } else {
            Err(Failure {
                code: EXIT_CHECK,
                message: format!("{} table cell(s) differ from the published values", bad.len()),
            })
        };
    }
    match cli.format {
        Format::Json => {
            let tables: Vec<_> = ids.iter().map(|&id| planner::table_generator(id)).collect();
            emit(cli, "", &to_json(&tables))
        }
        Format::Csv => {
            for id in ids {
                emit(cli, &format!("-{}", id.name()), &planner::table_generator(id).to_csv())?;
            }
            Ok(())
        }
    }
}

/// Series for one of F1 to F5.
pub fn figure(which: &str, points: usize) -> Option<FigureData> {
    Some(match which.to_ascii_uppercase().as_str() {
        "F1" => planner::fig_data(PlanFigure::F1, points),
        "F2" => planner::fig_data(PlanFigure::F2, points),
        "F3" => attacks::fig_data(AttackFigure::F3, points),
        "F4" => attacks::fig_data(AttackFigure::F4, points),
        "F5" => attacks::fig_data(AttackFigure::F5, points),
        _ => return None,
    })
}

fn cmd_figures(cli: &Cli, a: &FiguresArgs) -> Result<(), Failure> {
    let fig = figure(&a.which, a.points).ok_or_else(|| usage(format!("unknown figure {:?}", a.which)))?;
    let body = match cli.format {
        Format::Json => {
            let mut s = fig.to_json();
            s.push('\n');
            s
        }
        Format::Csv => fig.to_csv(),
    };
    emit(cli, "", &body)
}
