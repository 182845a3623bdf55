//! Scaling sweeps over the extremal sequences, with CSV output.
//!
//! `scan_worst` builds the canonical worst-case sequence for each zero count
//! and reports its regret normalized by the theoretical scale term
//! (`sqrt(q k)` when the tail is ones, `sqrt((1-q)(T-k))` otherwise).
//! `scan_best` sweeps the block sequences and flags any regret above 1.
//!
//! CSV files are deterministic for a given configuration: fixed header, LF
//! line endings, floats at 17 significant digits. Wall times are reported in
//! the human-readable output only, so reruns produce byte-identical files.

use std::io::Write;
use std::time::Instant;

use crate::error::Error;
use crate::prediction::{regret_float, TradeoffParameter};
use crate::sequences::{gen_best, gen_worst, tail_fill_bit};

/// One point of a scaling sweep.
#[derive(Debug, Clone)]
pub struct ScalingRow {
    pub k: u64,
    pub t_len: u64,
    pub q: TradeoffParameter,
    pub regret: f64,
    /// regret / sqrt(scale term); the scale term follows the tail bit.
    pub regret_over_sqrt: f64,
    pub engine_mode: &'static str,
    pub wall_time_ms: f64,
}

fn scale_term(t_len: u64, k: u64, q: TradeoffParameter) -> f64 {
    let qf = q.as_f64();
    if tail_fill_bit(t_len, k, q) == 1 {
        qf * k as f64
    } else {
        (1.0 - qf) * (t_len - k) as f64
    }
}

/// Worst-case scaling sweep. Each `k` uses `T = 2k` unless `t_len` pins the
/// length explicitly.
pub fn scan_worst(
    q: TradeoffParameter,
    ks: &[u64],
    t_len: Option<u64>,
) -> Result<Vec<ScalingRow>, Error> {
    let mut rows = Vec::with_capacity(ks.len());
    for &k in ks {
        let t = t_len.unwrap_or(2 * k);
        let start = Instant::now();
        let w = gen_worst(t, k, q, 0)?;
        let regret = regret_float(&w, q)?.regret;
        let wall = start.elapsed().as_secs_f64() * 1e3;
        let scale = scale_term(t, k, q);
        rows.push(ScalingRow {
            k,
            t_len: t,
            q,
            regret,
            regret_over_sqrt: if scale > 0.0 { regret / scale.sqrt() } else { f64::NAN },
            engine_mode: "float",
            wall_time_ms: wall,
        });
    }
    rows.sort_by_key(|r| (r.k, r.t_len));
    Ok(rows)
}

/// Best-case sweep at fixed length; returns the rows and the first row whose
/// regret exceeds 1, if any.
pub fn scan_best(
    q: TradeoffParameter,
    t_len: u64,
    ks: &[u64],
) -> Result<(Vec<ScalingRow>, Option<u64>), Error> {
    let mut rows = Vec::with_capacity(ks.len());
    let mut violation = None;
    for &k in ks {
        let start = Instant::now();
        let b = gen_best(t_len, k, q)?;
        let regret = regret_float(&b, q)?.regret;
        let wall = start.elapsed().as_secs_f64() * 1e3;
        if regret > 1.0 && violation.is_none() {
            violation = Some(k);
        }
        let scale = scale_term(t_len, k, q);
        rows.push(ScalingRow {
            k,
            t_len,
            q,
            regret,
            regret_over_sqrt: if scale > 0.0 { regret / scale.sqrt() } else { f64::NAN },
            engine_mode: "float",
            wall_time_ms: wall,
        });
    }
    rows.sort_by_key(|r| (r.k, r.t_len));
    Ok((rows, violation))
}

/// Geometric grid of `steps` zero counts between `kmin` and `kmax` inclusive,
/// deduplicated after rounding.
pub fn k_grid(kmin: u64, kmax: u64, steps: u64) -> Result<Vec<u64>, Error> {
    if kmin < 1 || kmax < kmin || steps < 1 {
        return Err(Error::Domain(format!(
            "need 1 <= kmin <= kmax and steps >= 1, got kmin={kmin}, kmax={kmax}, steps={steps}"
        )));
    }
    if steps == 1 || kmin == kmax {
        return Ok(vec![kmin]);
    }
    let (lo, hi) = ((kmin as f64).ln(), (kmax as f64).ln());
    let mut ks: Vec<u64> = (0..steps)
        .map(|i| (lo + (hi - lo) * i as f64 / (steps - 1) as f64).exp().round() as u64)
        .collect();
    ks.dedup();
    Ok(ks)
}

/// 17 significant digits; enough to round-trip any f64 exactly.
fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub const CSV_HEADER: &str = "k,T,q,regret,regret_over_sqrt,engine_mode";

/// Write rows as CSV (UTF-8, LF, header mandatory).
pub fn write_csv<W: Write>(out: &mut W, rows: &[ScalingRow]) -> std::io::Result<()> {
    out.write_all(CSV_HEADER.as_bytes())?;
    out.write_all(b"\n")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            r.k,
            r.t_len,
            r.q,
            fmt_f64(r.regret),
            fmt_f64(r.regret_over_sqrt),
            r.engine_mode
        )?;
    }
    Ok(())
}
