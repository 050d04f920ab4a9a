use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qkd::experiment::{
    cmd_alice, cmd_bob, cmd_report, cmd_simulate, cmd_sweep, Endpoint, ExperimentConfig, ExperimentError, CURVE_FILE,
};
use qkd::security::loss_range;
use qkd::session::SessionReport;

#[derive(Parser)]
#[command(name = "qkd", version, about = "BB84 link simulation and key distillation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Experiment config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the link seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct Peer {
    #[command(flatten)]
    common: Common,
    /// Wait for the peer on HOST:PORT.
    #[arg(long, conflicts_with = "connect")]
    listen: Option<String>,
    /// Connect to the peer at HOST:PORT.
    #[arg(long)]
    connect: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate the link and write click and pulse records.
    Simulate(Common),
    /// Run Alice's station against a peer.
    Alice(Peer),
    /// Run Bob's station against a peer.
    Bob(Peer),
    /// Secret key rate against channel loss as CSV.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Loss range START:STOP:STEP in dB, inclusive.
        #[arg(long = "loss-db", default_value = "0:30:2")]
        loss_db: String,
    },
    /// Leakage breakdown of a session frame log.
    Report {
        /// Frame log written by `alice` or `bob`.
        log: PathBuf,
        /// Also write the report to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load(c: &Common) -> Result<ExperimentConfig, ExperimentError> {
    let mut cfg = match &c.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = c.seed {
        cfg.seed = s;
    }
    if let Some(o) = &c.out {
        cfg.out_dir = o.clone();
    }
    Ok(cfg)
}

fn endpoint(p: &Peer, cfg: &ExperimentConfig, listen_by_default: bool) -> Result<Endpoint, ExperimentError> {
    match (&p.listen, &p.connect, &cfg.endpoint) {
        (Some(a), _, _) => Ok(Endpoint::Listen(a.clone())),
        (_, Some(a), _) => Ok(Endpoint::Connect(a.clone())),
        (_, _, Some(a)) if listen_by_default => Ok(Endpoint::Listen(a.clone())),
        (_, _, Some(a)) => Ok(Endpoint::Connect(a.clone())),
        _ => Err(ExperimentError::Config {
            line: 0,
            msg: "no endpoint: pass --listen or --connect".into(),
        }),
    }
}

fn parse_range(s: &str) -> Result<Vec<f64>, ExperimentError> {
    let bad = || ExperimentError::Config {
        line: 0,
        msg: format!("--loss-db {s:?}: expected START:STOP:STEP"),
    };
    let parts: Vec<f64> = s
        .split(':')
        .map(|x| x.trim().parse().map_err(|_| bad()))
        .collect::<Result<_, _>>()?;
    let [a, b, step] = parts[..] else { return Err(bad()) };
    Ok(loss_range(a, b, step)?)
}

fn session_exit(report: &SessionReport) -> ExitCode {
    println!("{}", report.summary());
    if report.succeeded() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    }
}

fn run(cli: Cli) -> Result<ExitCode, ExperimentError> {
    match cli.command {
        Command::Simulate(c) => {
            let cfg = load(&c)?;
            let s = cmd_simulate(&cfg)?;
            print!("{}", s.to_text());
            println!("records written to {}", cfg.out_dir.display());
        }
        Command::Alice(p) => {
            let cfg = load(&p.common)?;
            let ep = endpoint(&p, &cfg, true)?;
            return Ok(session_exit(&cmd_alice(&cfg, &ep)?));
        }
        Command::Bob(p) => {
            let cfg = load(&p.common)?;
            let ep = endpoint(&p, &cfg, false)?;
            return Ok(session_exit(&cmd_bob(&cfg, &ep)?));
        }
        Command::Sweep { common, loss_db } => {
            let cfg = load(&common)?;
            let points = cmd_sweep(&cfg, &parse_range(&loss_db)?)?;
            println!("loss_db  click_rate_hz  qber     finite_bps  asymptotic_bps");
            for p in &points {
                println!(
                    "{:>7.2}  {:>13.1}  {:.5}  {:>10.1}  {:>14.1}",
                    p.loss_db, p.click_rate_hz, p.qber, p.skr_finite_bps, p.skr_asymptotic_bps
                );
            }
            println!("curve written to {}", cfg.out_dir.join(CURVE_FILE).display());
        }
        Command::Report { log, out } => {
            let text = cmd_report(&log)?.to_text();
            print!("{text}");
            if let Some(o) = out {
                std::fs::write(o, &text)?;
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("QKD_LOG_LEVEL", "info")).init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
