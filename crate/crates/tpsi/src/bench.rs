//! Parameter sweeps with per-phase timings, written as CSV.

use std::io::Write;

use rand_chacha::rand_core::SeedableRng;
use serde::Serialize;
use tpsi_core::field::Fp;
use tpsi_core::oracle::{gen_instance, OverlapPlan};

use crate::config::{BackendChoice, ModeChoice, ProtocolChoice, RunConfig};
use crate::runner::{simulate, RunError};

#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub protocols: Vec<ProtocolChoice>,
    pub ns: Vec<usize>,
    /// Thresholds to pair with every `n`; `None` means `max(2, n / 2)`.
    pub ts: Option<Vec<usize>>,
    pub ms: Vec<usize>,
    pub mode: ModeChoice,
    pub opprf: BackendChoice,
    pub ole: BackendChoice,
    pub paillier_bits: u64,
    pub reps: usize,
    pub seed: u64,
    pub timeout_secs: u64,
}

impl Default for SweepSpec {
    fn default() -> Self {
        SweepSpec {
            protocols: vec![ProtocolChoice::Et],
            ns: vec![5],
            ts: Some(vec![3]),
            ms: vec![1 << 10],
            mode: ModeChoice::SingleModulus,
            opprf: BackendChoice::Ideal,
            ole: BackendChoice::Ideal,
            paillier_bits: 2048,
            reps: 1,
            seed: 1,
            timeout_secs: 600,
        }
    }
}

/// One session. Wall times are the leader's view of the phase barriers;
/// `share` covers distribution and refresh, `reconstruct` the collection and
/// tracing. CPU times count the leader thread only.
#[derive(Debug, Clone, Serialize)]
pub struct BenchRow {
    pub protocol: &'static str,
    pub mode: &'static str,
    pub n: usize,
    pub t: usize,
    pub m: usize,
    pub opprf: &'static str,
    pub ole: &'static str,
    pub rep: usize,
    pub share_ms: f64,
    pub reconstruct_ms: f64,
    pub total_ms: f64,
    pub leader_share_cpu_ms: f64,
    pub leader_reconstruct_cpu_ms: f64,
    pub leader_total_cpu_ms: f64,
    pub reported: usize,
}

fn backend_name(b: BackendChoice) -> &'static str {
    match b {
        BackendChoice::Ideal => "ideal",
        BackendChoice::Real => "real",
    }
}

/// Random sets of exactly `m` elements with some planted overlap around
/// the threshold.
pub fn bench_sets(n: usize, t: usize, m: usize, seed: u64) -> Result<Vec<Vec<u128>>, RunError> {
    let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(seed);
    let plan = OverlapPlan::straddling(n, t, m, (m / 16).max(1), &mut rng);
    let inst = gen_instance::<Fp>(n, t, m, &plan, seed)?;
    Ok(inst
        .sets
        .iter()
        .map(|s| s.iter().map(Fp::value).collect())
        .collect())
}

pub fn run_sweep(
    spec: &SweepSpec,
    mut on_row: impl FnMut(&BenchRow),
) -> Result<Vec<BenchRow>, RunError> {
    let mut rows = Vec::new();
    for &protocol in &spec.protocols {
        for &n in &spec.ns {
            let ts = spec.ts.clone().unwrap_or_else(|| vec![(n / 2).max(2)]);
            for &t in &ts {
                for &m in &spec.ms {
                    for rep in 0..spec.reps {
                        let seed = spec.seed.wrapping_add(rep as u64);
                        let cfg = RunConfig {
                            mode: spec.mode,
                            seed: Some(seed),
                            opprf: spec.opprf,
                            ole: spec.ole,
                            paillier_bits: spec.paillier_bits,
                            timeout_secs: spec.timeout_secs,
                            ..RunConfig::new(protocol, n, t, m)
                        };
                        let sets = bench_sets(n, t, m, seed)?;
                        let run = simulate(&cfg, &sets, false)?;
                        let times = run.leader_times.unwrap_or_default();
                        let ms = |d: std::time::Duration| d.as_secs_f64() * 1e3;
                        let row = BenchRow {
                            protocol: cfg.protocol().name(),
                            mode: match spec.mode {
                                ModeChoice::SingleModulus => "single-modulus",
                                ModeChoice::Crt => "crt",
                            },
                            n,
                            t,
                            m,
                            opprf: backend_name(spec.opprf),
                            ole: backend_name(spec.ole),
                            rep,
                            share_ms: ms(times.share_wall),
                            reconstruct_ms: ms(times.reconstruct_wall),
                            total_ms: ms(times.total_wall),
                            leader_share_cpu_ms: ms(times.share_cpu),
                            leader_reconstruct_cpu_ms: ms(times.reconstruct_cpu),
                            leader_total_cpu_ms: ms(times.total_cpu),
                            reported: run.entries.len(),
                        };
                        log::info!(
                            "{protocol:?} n={n} t={t} m={m} rep={rep}: total {:.1} ms",
                            row.total_ms
                        );
                        on_row(&row);
                        rows.push(row);
                    }
                }
            }
        }
    }
    Ok(rows)
}

pub fn write_csv(rows: &[BenchRow], out: impl Write) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Least-squares slope of `log y` against `log x`.
pub fn log_log_slope(points: &[(f64, f64)]) -> f64 {
    let pts: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_power_laws() {
        let quad: Vec<_> = (1..6)
            .map(|x| (x as f64, 3.0 * (x as f64).powi(2)))
            .collect();
        assert!((log_log_slope(&quad) - 2.0).abs() < 1e-9);
        let lin: Vec<_> = (1..6).map(|x| (x as f64, 0.5 * x as f64)).collect();
        assert!((log_log_slope(&lin) - 1.0).abs() < 1e-9);
    }
}
