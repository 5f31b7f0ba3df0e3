//! Protocol-stage commands: the orchestration behind the CLI subcommands,
//! usable directly as library calls (the acceptance and integration tests
//! drive them in-process).

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bits::BitBuffer;
use crate::config::RunConfig;
use crate::entropy::{c_bound_practical, final_length, EntropyReport, SecurityBudget};
use crate::error::{AbortReason, Error, Result};
use crate::oracle::soundness_sweep;
use crate::randtests::{default_block_len, run_all, TestReport};
use crate::reference::{experiment_table, ReferenceCell};
use crate::sim::{analytic_g, lab_state, mix_seed, run_protocol, ExpectationStats, SourceModel};
use crate::toeplitz::{extract, ledger, required_seed_length, SeedLedger, ToeplitzSpec};

/// Contents of stats.json: tallies plus a full echo of how they were made.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsDocument {
    pub config_hash: String,
    pub config: RunConfig,
    pub stats: ExpectationStats,
    pub ge: [Option<f64>; 3],
    pub n_raw_bits: u64,
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    serde_json::to_writer_pretty(&mut f, value)?;
    f.write_all(b"\n")?;
    Ok(())
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

/// Run the simulated protocol and write stats.json + raw.bits.
pub fn cmd_simulate(cfg: &RunConfig, stats_path: &Path, raw_path: &Path) -> Result<StatsDocument> {
    cfg.validate()?;
    let (raw, stats) = run_protocol(
        &cfg.source_model(),
        &cfg.detector_model(),
        cfg.n_rounds,
        cfg.master_seed,
        &cfg.sim_options(),
    )?;
    let doc = StatsDocument {
        config_hash: cfg.config_hash(),
        config: cfg.clone(),
        ge: [stats.ge(0), stats.ge(1), stats.ge(2)],
        stats,
        n_raw_bits: raw.len() as u64,
    };
    raw.write_file(raw_path)?;
    write_json(stats_path, &doc)?;
    Ok(doc)
}

/// Bound C and the extractable length from observed stats; the report is
/// written even when the run aborts (the abort is encoded inside it).
pub fn cmd_bound(cfg: &RunConfig, stats_path: &Path, report_path: &Path) -> Result<EntropyReport> {
    let doc: StatsDocument = read_json(stats_path)?;
    let budget = cfg.budget()?;
    let report = bound_from_ge(&doc.ge, &budget, cfg)?;
    write_json(report_path, &report)?;
    Ok(report)
}

fn bound_from_ge(
    ge: &[Option<f64>; 3],
    budget: &SecurityBudget,
    cfg: &RunConfig,
) -> Result<EntropyReport> {
    let (Some(ge0), Some(ge1), Some(ge2)) = (ge[0], ge[1], ge[2]) else {
        // no test tallies for some setting: parameter estimation impossible
        return Ok(aborted_report(AbortReason::NonPositiveWitness));
    };
    match c_bound_practical(ge0, ge1, ge2, budget, cfg.prefactor_variant) {
        Ok(c) => final_length(c, budget, cfg.conservative_eta),
        Err(Error::Abort(reason)) => Ok(aborted_report(reason)),
        Err(e) => Err(e),
    }
}

fn aborted_report(reason: AbortReason) -> EntropyReport {
    EntropyReport {
        c_bound: 0.0,
        p_guess: 1.0,
        min_entropy_bits: 0.0,
        length_bits: 0,
        rate_bps: 0.0,
        aborted: Some(reason),
    }
}

/// Block-wise Toeplitz extraction of the raw bits at the certified rate.
///
/// The certified length l applies to the full generation budget N_g; a
/// desk-scale raw file holds fewer than N_g bits, so each input block of
/// `block_bits` contributes floor(block * l / N_g) output bits, capped at l
/// overall. One seed (and thus one matrix) is reused across blocks, which is
/// standard for two-universal hashing.
pub fn cmd_extract(
    cfg: &RunConfig,
    raw_path: &Path,
    report_path: &Path,
    seed_path: &Path,
    final_path: &Path,
    ledger_path: &Path,
    block_bits: usize,
) -> Result<SeedLedger> {
    let report: EntropyReport = read_json(report_path)?;
    if let Some(reason) = report.aborted {
        return Err(Error::AbortedRun(format!(
            "report carries no extractable randomness ({reason})"
        )));
    }
    if report.length_bits == 0 {
        return Err(Error::AbortedRun("certified length is zero".into()));
    }
    let raw = BitBuffer::read_file(raw_path)?;
    let budget = cfg.budget()?;
    let ratio = report.length_bits as f64 / budget.n_gen as f64;
    let block = block_bits.min(raw.len());
    if block == 0 {
        return Err(Error::InsufficientData("raw file is empty".into()));
    }
    let m = ((block as f64) * ratio).floor() as usize;
    if m == 0 {
        return Err(Error::InsufficientData(
            "block too small for the certified rate".into(),
        ));
    }
    let seed = BitBuffer::read_file(seed_path)?;
    let need = required_seed_length(block, m)?;
    if seed.len() != need {
        return Err(Error::InvalidLength(format!(
            "seed file has {} bits, block plan needs {need}",
            seed.len()
        )));
    }
    let spec = ToeplitzSpec::new(block, m, seed)?;
    let target = (report.length_bits).min((raw.len() as f64 * ratio).floor() as u64);
    let mut out = BitBuffer::with_capacity(target as usize);
    let mut consumed = 0usize;
    while consumed + block <= raw.len() && (out.len() as u64) < target {
        let chunk = raw.slice(consumed, block)?;
        let hashed = extract(&chunk, &spec)?;
        for i in 0..hashed.len() {
            if out.len() as u64 >= target {
                break;
            }
            out.push(hashed.get(i));
        }
        consumed += block;
    }
    out.write_file(final_path)?;
    let led = ledger(
        3 * cfg.n_test_per_state,
        out.len() as u64,
        need as u64,
    );
    write_json(ledger_path, &led)?;
    Ok(led)
}

/// Run the four statistical tests on a bit file and write a JSON report.
pub fn cmd_randtest(
    bits_path: &Path,
    out_path: &Path,
    block_len: Option<usize>,
) -> Result<Vec<TestReport>> {
    let bits = BitBuffer::read_file(bits_path)?;
    let block = block_len.unwrap_or_else(|| default_block_len(bits.len()));
    let reports = run_all(&bits, block)?;
    write_json(out_path, &reports)?;
    Ok(reports)
}

/// Soundness sweep of the bound chain; returns the number of violations.
pub fn cmd_verify(
    n_samples: u64,
    seed: u64,
    tolerance: f64,
    grid_n: usize,
    out_csv: &Path,
) -> Result<u64> {
    let verdicts = soundness_sweep(n_samples, seed, tolerance, grid_n)?;
    let mut f = std::io::BufWriter::new(std::fs::File::create(out_csv)?);
    writeln!(
        f,
        "index,c_exact,c_lower,margin_c,analytic_bound,numeric_pguess,margin,violated"
    )?;
    let mut violations = 0u64;
    for v in &verdicts {
        let fmt_opt = |o: Option<f64>| o.map(|x| format!("{x:.12e}")).unwrap_or_default();
        writeln!(
            f,
            "{},{:.12e},{},{},{:.12e},{:.12e},{:.12e},{}",
            v.index,
            v.c_exact,
            fmt_opt(v.c_lower),
            fmt_opt(v.margin_c),
            v.analytic_bound,
            v.numeric_pguess,
            v.margin,
            v.violated
        )?;
        violations += v.violated as u64;
    }
    Ok(violations)
}

/// One row of table.csv: simulated and analytic results next to the
/// published cell.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TableRow {
    pub mu: f64,
    pub misalignment: f64,
    pub c_sim: f64,
    pub rate_sim_bps: f64,
    pub c_analytic: f64,
    pub rate_analytic_bps: f64,
    pub c_ref: f64,
    pub rate_ref_bps: f64,
    /// The analytic length chain applied to the published C.
    pub rate_from_c_ref_bps: f64,
}

/// Sweep the published (intensity, misalignment) grid: simulate each cell at
/// desk scale, bound with the full analytic budget, and tabulate against the
/// published values.
pub fn cmd_table(cfg: &RunConfig, out_csv: &Path) -> Result<Vec<TableRow>> {
    let mut rows = Vec::with_capacity(18);
    for (index, cell) in experiment_table().into_iter().enumerate() {
        rows.push(table_cell(cfg, index as u64, &cell)?);
    }
    let mut f = std::io::BufWriter::new(std::fs::File::create(out_csv)?);
    writeln!(
        f,
        "mu,misalignment,c_sim,rate_sim_bps,c_analytic,rate_analytic_bps,c_ref,rate_ref_bps,rate_from_c_ref_bps"
    )?;
    for r in &rows {
        writeln!(
            f,
            "{},{:.6},{:.6},{:.1},{:.6},{:.1},{:.6},{:.1},{:.1}",
            r.mu,
            r.misalignment,
            r.c_sim,
            r.rate_sim_bps,
            r.c_analytic,
            r.rate_analytic_bps,
            r.c_ref,
            r.rate_ref_bps,
            r.rate_from_c_ref_bps
        )?;
    }
    Ok(rows)
}

fn table_cell(cfg: &RunConfig, index: u64, cell: &ReferenceCell) -> Result<TableRow> {
    let source = SourceModel::experiment(cell.mu, cell.misalignment, cfg.p_test);
    let det = cfg.detector_model();
    let n_gen = cfg.n_total - 3 * cfg.n_test_per_state;
    let budget = SecurityBudget::new(
        cfg.epsilon,
        cfg.n_total,
        n_gen,
        cfg.n_test_per_state,
        cell.mu,
        cfg.sys_freq_hz,
    )?;

    let seed = mix_seed(cfg.master_seed, index);
    let (_, stats) = run_protocol(&source, &det, cfg.n_rounds, seed, &cfg.sim_options())?;
    let ge = [stats.ge(0), stats.ge(1), stats.ge(2)];
    let sim_report = bound_from_ge(&ge, &budget, cfg)?;

    // analytic variant: expectations straight from the click model
    let ge_a: [Option<f64>; 3] = {
        let mut out = [None; 3];
        for s in 0..3u8 {
            let state = lab_state(s, &source)?;
            out[s as usize] = Some(analytic_g(&state, cell.mu, &det));
        }
        out
    };
    let analytic_report = bound_from_ge(&ge_a, &budget, cfg)?;
    let ref_report = final_length(cell.c, &budget, cfg.conservative_eta)?;

    Ok(TableRow {
        mu: cell.mu,
        misalignment: cell.misalignment,
        c_sim: sim_report.c_bound,
        rate_sim_bps: sim_report.rate_bps,
        c_analytic: analytic_report.c_bound,
        rate_analytic_bps: analytic_report.rate_bps,
        c_ref: cell.c,
        rate_ref_bps: cell.rate_bps,
        rate_from_c_ref_bps: ref_report.rate_bps,
    })
}
