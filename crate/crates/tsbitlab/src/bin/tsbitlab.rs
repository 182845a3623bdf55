//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 when a verification subcommand finds a
//! counterexample (which is printed), 2 on argument or domain errors.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use tsbitlab::beta_math::{tail_sum, TailSumQuery};
use tsbitlab::experiments::{k_grid, scan_best, scan_worst, write_csv, ScalingRow};
use tsbitlab::mc::monte_carlo;
use tsbitlab::oracle::{enumerate_extremal, verify_swap_lemma, Verification};
use tsbitlab::prediction::{regret, regret_exact, Mode, RegretResult};
use tsbitlab::sequences::{gen_best, gen_worst};
use tsbitlab::{BitSequence, Error, TradeoffParameter};

#[derive(Parser)]
#[command(name = "tsbitlab", version, about = "Thompson-sampling regret lab for adversarial bit sequences")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Float,
    Rational,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Float => Mode::Float,
            ModeArg::Rational => Mode::Rational,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Expected regret of a bit sequence.
    Regret {
        #[arg(long)]
        seq: String,
        /// Trade-off parameter, as "num/den" or a decimal.
        #[arg(long)]
        q: String,
        #[arg(long, value_enum, default_value = "float")]
        mode: ModeArg,
    },
    /// Canonical worst-case sequence of length T with k zeros.
    Worst {
        #[arg(long)]
        t: u64,
        #[arg(long)]
        k: u64,
        #[arg(long)]
        q: String,
        /// Bit chosen when the posterior sits exactly on the threshold.
        #[arg(long, default_value_t = 0)]
        tie: u8,
    },
    /// Best-case sequence of length T with k zeros.
    Best {
        #[arg(long)]
        t: u64,
        #[arg(long)]
        k: u64,
        #[arg(long)]
        q: String,
    },
    /// Brute-force extremal sets by exact-rational enumeration.
    Brute {
        #[arg(long)]
        t: u64,
        #[arg(long)]
        k: u64,
        #[arg(long)]
        q: String,
    },
    /// Exhaustively verify the adjacent-swap rule at length T.
    CheckSwap {
        #[arg(long)]
        t: u64,
        #[arg(long)]
        q: String,
    },
    /// Monte-Carlo estimate of the expected loss.
    Simulate {
        #[arg(long)]
        seq: String,
        #[arg(long)]
        q: String,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        /// Defaults to $TSBITLAB_SEED if set, else 0.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Worst-case scaling sweep over a geometric k grid; writes CSV.
    Scan {
        #[arg(long)]
        q: String,
        #[arg(long)]
        kmin: u64,
        #[arg(long)]
        kmax: u64,
        #[arg(long, default_value_t = 9)]
        steps: u64,
        #[arg(long)]
        out: Option<String>,
    },
    /// Best-case sweep at fixed length; fails if any regret exceeds 1.
    ScanBest {
        #[arg(long)]
        q: String,
        #[arg(long)]
        t: u64,
        /// Comma-separated zero counts.
        #[arg(long, value_delimiter = ',')]
        ks: Vec<u64>,
        #[arg(long)]
        out: Option<String>,
    },
    /// Truncated Beta-CDF tail sum at the scaled-binomial evaluation point.
    Tailsum {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 200_000)]
        terms: u64,
    },
}

fn parse_q(s: &str) -> Result<TradeoffParameter, Error> {
    s.parse()
}

fn parse_seq(s: &str) -> Result<BitSequence, Error> {
    s.parse()
}

fn env_seed() -> u64 {
    std::env::var("TSBITLAB_SEED")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(0)
}

fn write_rows(rows: &[ScalingRow], out: Option<&str>) -> Result<(), Error> {
    let io_err = |e: std::io::Error| Error::Domain(format!("cannot write CSV: {e}"));
    match out {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path).map_err(io_err)?);
            write_csv(&mut w, rows).map_err(io_err)?;
            w.flush().map_err(io_err)?;
        }
        None => {
            let stdout = std::io::stdout();
            write_csv(&mut stdout.lock(), rows).map_err(io_err)?;
        }
    }
    Ok(())
}

/// Ok(true) = success, Ok(false) = verification failure (exit 1).
fn run(cli: Cli) -> Result<bool, Error> {
    match cli.command {
        Command::Regret { seq, q, mode } => {
            let seq = parse_seq(&seq)?;
            let q = parse_q(&q)?;
            match regret(&seq, q, Mode::from(mode))? {
                RegretResult::Float(r) => {
                    println!("expected loss = {:.17}", r.expected_loss);
                    println!("benchmark     = {:.17}", r.static_benchmark);
                    println!("regret        = {:.17}", r.regret);
                }
                RegretResult::Exact(r) => {
                    println!("expected loss = {}", r.expected_loss);
                    println!("benchmark     = {}", r.static_benchmark);
                    println!("regret        = {}", r.regret);
                }
            }
            Ok(true)
        }
        Command::Worst { t, k, q, tie } => {
            let w = gen_worst(t, k, parse_q(&q)?, tie)?;
            println!("{w}");
            Ok(true)
        }
        Command::Best { t, k, q } => {
            let b = gen_best(t, k, parse_q(&q)?)?;
            println!("{b}");
            Ok(true)
        }
        Command::Brute { t, k, q } => {
            let r = enumerate_extremal(t, k, parse_q(&q)?)?;
            println!("scanned {} sequences of length {} with {} zeros", r.sequences_scanned, t, k);
            println!("max regret = {}", r.max_regret);
            for s in &r.argmax_set {
                println!("  argmax: {s}");
            }
            println!("min regret = {}", r.min_regret);
            for s in &r.argmin_set {
                println!("  argmin: {s}");
            }
            Ok(true)
        }
        Command::CheckSwap { t, q } => {
            let q = parse_q(&q)?;
            let v = verify_swap_lemma(t, q)?;
            report_verification(&v, q);
            Ok(v.ok)
        }
        Command::Simulate { seq, q, trials, seed } => {
            let seq = parse_seq(&seq)?;
            let q = parse_q(&q)?;
            let seed = seed.unwrap_or_else(env_seed);
            let est = monte_carlo(&seq, q, trials, seed)?;
            println!(
                "mean loss = {:.17} (stderr {:.3e}, {} trials, seed {seed})",
                est.mean, est.stderr, est.trials
            );
            Ok(true)
        }
        Command::Scan { q, kmin, kmax, steps, out } => {
            let rows = scan_worst(parse_q(&q)?, &k_grid(kmin, kmax, steps)?, None)?;
            write_rows(&rows, out.as_deref())?;
            if let Some(path) = &out {
                println!("wrote {} rows to {path}", rows.len());
            }
            Ok(true)
        }
        Command::ScanBest { q, t, ks, out } => {
            let (rows, violation) = scan_best(parse_q(&q)?, t, &ks)?;
            write_rows(&rows, out.as_deref())?;
            match violation {
                Some(k) => {
                    eprintln!("FAIL: best-case regret exceeds 1 at T={t}, k={k}");
                    Ok(false)
                }
                None => Ok(true),
            }
        }
        Command::Tailsum { n, p, terms } => {
            let r = tail_sum(TailSumQuery { n, p, terms })?;
            println!("tail sum         = {:.17}", r.value);
            println!("terms used       = {}", r.terms_used);
            println!("truncation bound = {:.3e}", r.truncation_bound);
            Ok(true)
        }
    }
}

fn report_verification(v: &Verification, q: TradeoffParameter) {
    if v.ok {
        println!("OK: {}", v.detail);
    } else {
        eprintln!("FAIL: {}", v.detail);
        if let Some(seq) = &v.counterexample {
            eprintln!("counterexample: {seq}");
            if let (Ok(base), Ok(swapped)) = (
                regret_exact(seq, q),
                seq.swap(1).and_then(|s| regret_exact(&s, q)),
            ) {
                eprintln!("regret = {}, after first swap = {}", base.regret, swapped.regret);
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
