//! Coupling sweeps along continuation chains.

use std::io::Write;

use glvortex::asymptotics::{leading_coeffs, tail_fit};
use glvortex::diagnostics::{
    fit_window, monotonicity_classify, quantization_check, second_variation_min_eig,
    MonotonicityClass, Witness, DEFAULT_SLOPE_TOL,
};
use glvortex::solver::{continuation_solve, newton_solve};
use glvortex::{batch, CouplingParams, DegreePair, GridSpec, Profile};
use serde::Serialize;

use crate::config::Run;
use crate::failure::Failure;

#[derive(Debug, Clone, Serialize)]
pub struct SweepRecord {
    #[serde(rename = "B")]
    pub b: f64,
    pub converged: bool,
    pub class: Option<&'static str>,
    pub witness: Option<Witness>,
    /// Fitted tail coefficients.
    pub a_plus: Option<f64>,
    pub a_minus: Option<f64>,
    /// Closed-form tail coefficients.
    pub a_plus_closed: f64,
    pub a_minus_closed: f64,
    pub quantization_gap: Option<f64>,
    pub hessian_min_eig: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepResult {
    pub params: CouplingParams,
    pub degrees: DegreePair,
    pub grid: GridSpec,
    pub records: Vec<SweepRecord>,
    /// Largest swept `B > 0` such that every swept point in `[0, B]`
    /// classifies as both nondecreasing.
    #[serde(rename = "B0_lower_bound")]
    pub b0_lower_bound: Option<f64>,
}

fn record(run: &Run, b: f64, solved: &Result<Profile, glvortex::Error>) -> SweepRecord {
    let tail = leading_coeffs(&run.params.with_coupling(b), run.degrees);
    let mut rec = SweepRecord {
        b,
        converged: false,
        class: None,
        witness: None,
        a_plus: None,
        a_minus: None,
        a_plus_closed: tail.a_plus,
        a_minus_closed: tail.a_minus,
        quantization_gap: None,
        hessian_min_eig: None,
        error: None,
    };
    match solved {
        Ok(p) => {
            rec.converged = p.report.converged;
            let class = monotonicity_classify(p, DEFAULT_SLOPE_TOL);
            rec.class = Some(class.name());
            rec.witness = class.witness();
            let window = run.fit_window.unwrap_or_else(|| fit_window(p));
            match tail_fit(p, window) {
                Ok(fit) => {
                    rec.a_plus = Some(fit.a_plus);
                    rec.a_minus = Some(fit.a_minus);
                }
                Err(e) => rec.error = Some(e.to_string()),
            }
            rec.quantization_gap = quantization_check(p).ok().map(|q| q.gap);
            rec.hessian_min_eig = second_variation_min_eig(p).ok();
        }
        Err(e) => rec.error = Some(e.to_string()),
    }
    rec
}

/// Solves the chain in order, warm-starting each point from its predecessor
/// and falling back to continuation from `B = 0` when that fails.
fn run_chain(run: &Run, chain: &[f64]) -> Vec<SweepRecord> {
    let mut prev: Option<Profile> = None;
    let mut out = Vec::with_capacity(chain.len());
    for &b in chain {
        let params = run.params.with_coupling(b);
        let warm = prev.as_ref().map(|p| {
            newton_solve(
                (&p.f_plus, &p.f_minus),
                &run.grid,
                params,
                run.degrees,
                &run.options,
            )
        });
        let solved = match warm {
            Some(Ok(p)) => Ok(p),
            _ => continuation_solve(params, run.degrees, &run.grid, &run.options),
        };
        out.push(record(run, b, &solved));
        if let Ok(p) = solved {
            prev = Some(p);
        }
    }
    out
}

pub fn sweep(run: &Run, points: &[f64]) -> SweepResult {
    // Two chains leave B = 0 in opposite directions; they are independent.
    let mut up: Vec<f64> = points.iter().copied().filter(|&b| b >= 0.0).collect();
    let mut down: Vec<f64> = points.iter().copied().filter(|&b| b < 0.0).collect();
    up.sort_by(f64::total_cmp);
    down.sort_by(|a, b| b.total_cmp(a));
    let chains = batch::map(&[down, up], |chain| run_chain(run, chain));
    let mut records: Vec<SweepRecord> = chains.into_iter().flatten().collect();
    records.sort_by(|a, b| a.b.total_cmp(&b.b));
    if points.first() > points.last() {
        records.reverse();
    }

    let mut ascending: Vec<&SweepRecord> = records.iter().filter(|r| r.b >= 0.0).collect();
    ascending.sort_by(|a, b| a.b.total_cmp(&b.b));
    let both_up = MonotonicityClass::BothNondecreasing.name();
    let b0_lower_bound = ascending
        .iter()
        .take_while(|r| r.converged && r.class == Some(both_up))
        .filter(|r| r.b > 0.0)
        .last()
        .map(|r| r.b);

    SweepResult {
        params: run.params,
        degrees: run.degrees,
        grid: run.grid.spec(),
        records,
        b0_lower_bound,
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_csv<W: Write>(result: &SweepResult, out: W) -> Result<(), Failure> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "B",
        "converged",
        "class",
        "a_plus",
        "a_minus",
        "a_plus_closed",
        "a_minus_closed",
        "quantization_gap",
        "hessian_min_eig",
    ])?;
    for r in &result.records {
        w.write_record([
            r.b.to_string(),
            r.converged.to_string(),
            r.class.unwrap_or("").to_string(),
            opt(r.a_plus),
            opt(r.a_minus),
            r.a_plus_closed.to_string(),
            r.a_minus_closed.to_string(),
            opt(r.quantization_gap),
            opt(r.hessian_min_eig),
        ])?;
    }
    w.flush()?;
    Ok(())
}
