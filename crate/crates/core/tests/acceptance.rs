//! Acceptance suite. Runs as a plain binary so every criterion prints one
//! line; exits non-zero if any criterion fails.

mod common;

use std::process::ExitCode;
use std::time::Instant;

use glvortex::asymptotics::{
    envelope_check, expand_defect_series, leading_coeff, leading_coeffs, second_coeff,
    second_coeffs, select_envelope, select_uniform, tail_fit, Branch, EnvelopeCoeffs,
    DEFAULT_FIT_WINDOW,
};
use glvortex::diagnostics::{
    amplitude_bound_check, monotonicity_classify, pohozaev_residual, quantization_check,
    second_variation_min_eig, MonotonicityClass, DEFAULT_SLOPE_TOL,
};
use glvortex::model::Component;
use glvortex::solver::{continuation_solve, uniqueness_probe};
use glvortex::{batch, build_grid, CouplingParams, DegreePair, GridSpec, Profile, SolveOptions};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::ScalarOracle;

const R_MAX: f64 = 80.0;
const N: usize = 4000;

#[derive(Clone, Copy)]
struct Case {
    params: CouplingParams,
    degrees: DegreePair,
}

impl Case {
    const fn new(p: [f64; 5], n: [u32; 2]) -> Self {
        Self {
            params: CouplingParams {
                a_plus: p[0],
                a_minus: p[1],
                b: p[2],
                t_plus: p[3],
                t_minus: p[4],
            },
            degrees: DegreePair {
                n_plus: n[0],
                n_minus: n[1],
            },
        }
    }

    fn label(&self) -> String {
        let p = &self.params;
        format!(
            "({},{},{},{},{})/({},{})",
            p.a_plus,
            p.a_minus,
            p.b,
            p.t_plus,
            p.t_minus,
            self.degrees.n_plus,
            self.degrees.n_minus
        )
    }
}

const CLASSICAL: Case = Case::new([1.0, 1.0, 0.0, 1.0, 1.0], [1, 0]);
const REPULSIVE: Case = Case::new([1.0, 1.0, 0.5, 1.0, 1.0], [1, 1]);
const ATTRACTIVE: Case = Case::new([1.0, 1.0, -0.5, 1.0, 1.0], [1, 1]);
const ASYMMETRIC: Case = Case::new([2.0, 1.0, 0.8, 1.0, 0.7], [1, 1]);
const OVERSHOOT: Case = Case::new([1.0, 4.0, 1.5, 1.0, 1.0], [1, 1]);
const CASES: [Case; 5] = [CLASSICAL, REPULSIVE, ATTRACTIVE, ASYMMETRIC, OVERSHOOT];

struct Outcome {
    pass: bool,
    detail: String,
}

fn solve_on(case: Case, n: usize) -> Profile {
    let grid = build_grid(GridSpec::uniform(R_MAX, n)).unwrap();
    continuation_solve(case.params, case.degrees, &grid, &SolveOptions::default())
        .unwrap_or_else(|e| panic!("{} failed to solve: {e}", case.label()))
}

fn solve(case: Case) -> Profile {
    solve_on(case, N)
}

fn quantization(solved: &[Profile]) -> Outcome {
    let targets = [(0, 5e-3), (1, 1e-2), (2, 1e-2)];
    let mut pass = true;
    let mut detail = Vec::new();
    for (i, tol) in targets {
        let p = &solved[i];
        let q = quantization_check(p).unwrap();
        let ok = q.gap.abs() <= tol && p.report.wall_time_s <= 10.0;
        pass &= ok;
        detail.push(format!(
            "{} lhs={:.6} rhs={} gap={:.2e} time={:.2}s",
            CASES[i].label(),
            q.lhs,
            q.rhs,
            q.gap,
            p.report.wall_time_s
        ));
    }
    Outcome {
        pass,
        detail: detail.join("; "),
    }
}

fn pohozaev(solved: &[Profile]) -> Outcome {
    let mut pass = true;
    let mut detail = Vec::new();
    for (case, p) in CASES.iter().zip(solved) {
        let scale = quantization_check(p).unwrap().rhs;
        let rel: Vec<f64> = [20.0, 40.0, 80.0]
            .iter()
            .map(|&r| pohozaev_residual(p, r).unwrap().abs() / scale)
            .collect();
        let ok = rel[2] <= 1e-2 && rel[0] > rel[1] && rel[1] > rel[2];
        pass &= ok;
        detail.push(format!(
            "{} |P|/Σ at 20,40,80 = {:.2e},{:.2e},{:.2e}",
            case.label(),
            rel[0],
            rel[1],
            rel[2]
        ));
    }
    Outcome {
        pass,
        detail: detail.join("; "),
    }
}

fn rel_err(got: f64, want: f64) -> f64 {
    if want == 0.0 {
        got.abs()
    } else {
        ((got - want) / want).abs()
    }
}

fn tail_coefficients(solved: &[Profile]) -> Outcome {
    let mut pass = true;
    let mut detail = Vec::new();
    for (case, p) in CASES.iter().zip(solved) {
        let fit = tail_fit(p, DEFAULT_FIT_WINDOW).unwrap();
        let closed = second_coeffs(&case.params, case.degrees);
        let mut worst_a: f64 = 0.0;
        let mut worst_b: f64 = 0.0;
        for c in Component::BOTH {
            // A component with a vanishing closed form is compared absolutely.
            worst_a = worst_a.max(rel_err(fit.a(c), closed.a(c)));
            worst_b = worst_b.max(rel_err(fit.b(c), closed.b(c)));
        }
        pass &= worst_a <= 1e-2 && worst_b <= 5e-2;
        detail.push(format!(
            "{} a err {:.1e}, b err {:.1e}",
            case.label(),
            worst_a,
            worst_b
        ));
    }
    Outcome {
        pass,
        detail: detail.join("; "),
    }
}

fn rational(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Defect of `w = Σ w_k s^k` (`s = 1/r²`) in the equation of one component,
/// expanded independently of the library. Returns coefficients of `s^k`.
fn direct_defect(
    p: &[BigRational; 5],
    degrees: DegreePair,
    w: [&[BigRational]; 2],
    comp: usize,
) -> Vec<BigRational> {
    let [ap, am, b, tp, tm] = p.clone();
    let (a_self, t_self, t_other) = if comp == 0 {
        (ap, tp, tm)
    } else {
        (am, tm, tp)
    };
    let n = if comp == 0 {
        degrees.n_plus
    } else {
        degrees.n_minus
    };
    let n2 = BigRational::from_integer(BigInt::from(n * n));
    let mul = |x: &[BigRational], y: &[BigRational]| {
        let mut out = vec![BigRational::zero(); x.len() + y.len() - 1];
        for (i, xi) in x.iter().enumerate() {
            for (j, yj) in y.iter().enumerate() {
                out[i + j] += xi * yj;
            }
        }
        out
    };
    let ws = w[comp];
    let wo = w[1 - comp];
    let mut self_sq = mul(ws, ws);
    self_sq[0] -= &t_self * &t_self;
    let mut other_sq = mul(wo, wo);
    other_sq[0] -= &t_other * &t_other;
    let len = self_sq.len().max(other_sq.len());
    let mut bracket = vec![BigRational::zero(); len];
    for (k, v) in self_sq.iter().enumerate() {
        bracket[k] += &a_self * v;
    }
    for (k, v) in other_sq.iter().enumerate() {
        bracket[k] += &b * v;
    }
    let mut out = mul(&bracket, ws);
    out.resize(out.len().max(ws.len() + 1), BigRational::zero());
    for (k, wk) in ws.iter().enumerate() {
        let kk = BigRational::from_integer(BigInt::from(4 * k * k));
        out[k + 1] += &n2 * wk - kk * wk;
    }
    out
}

fn random_rational(rng: &mut ChaCha8Rng, lo: i64, hi: i64, den: i64) -> BigRational {
    rational(rng.random_range(lo..=hi), den)
}

fn symbolic_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut checked = 0;
    let mut failures = 0;
    while checked < 100 {
        let ap = random_rational(&mut rng, 1, 40, 10);
        let am = random_rational(&mut rng, 1, 40, 10);
        let b = random_rational(&mut rng, -40, 40, 10);
        if &b * &b >= &ap * &am {
            continue;
        }
        let tp = random_rational(&mut rng, 1, 30, 10);
        let tm = random_rational(&mut rng, 1, 30, 10);
        let degrees = DegreePair::new(rng.random_range(0..=3), rng.random_range(0..=3));
        let p = [ap, am, b, tp.clone(), tm.clone()];
        let r = random_rational(&mut rng, 2, 64, 1);
        let c = [
            random_rational(&mut rng, -9, 9, 7),
            random_rational(&mut rng, -9, 9, 7),
        ];
        let a = Component::BOTH.map(|k| leading_coeff(&p, degrees, k));
        let bb = Component::BOTH.map(|k| second_coeff(&p, degrees, k));
        let coeffs = EnvelopeCoeffs {
            a: a.clone(),
            b: bb.clone(),
            c: c.clone(),
        };
        let lib = expand_defect_series(&p, degrees, &r, &coeffs);
        let r6 = r.pow(6);
        let w: [Vec<BigRational>; 2] = [0, 1].map(|i| {
            let t = if i == 0 { tp.clone() } else { tm.clone() };
            vec![t, a[i].clone(), bb[i].clone(), &c[i] * &r6]
        });
        for (i, comp) in Component::BOTH.iter().enumerate() {
            let direct = direct_defect(&p, degrees, [&w[0], &w[1]], i);
            let zero_low = direct[0].is_zero() && direct[1].is_zero() && direct[2].is_zero();
            let lib_low = lib.m(*comp, 2).is_zero() && lib.m(*comp, 4).is_zero();
            // The library series is in (R/r)², so M_{2k} = [s^k] / R^{2k}.
            let agree = (1..=9).all(|k| {
                let want =
                    direct.get(k).cloned().unwrap_or_else(BigRational::zero) / r.pow(2 * k as i32);
                *lib.m(*comp, 2 * k) == want
            });
            if !(zero_low && lib_low && agree) {
                failures += 1;
            }
        }
        checked += 1;
    }
    Outcome {
        pass: failures == 0,
        detail: format!("{checked} random rational sets, {failures} component failures"),
    }
}

fn envelopes(solved: &[Profile]) -> Outcome {
    let mut pass = true;
    let mut detail = Vec::new();
    for i in [1, 2] {
        let case = CASES[i];
        let branch = Branch::default_for(case.params.b);
        match select_envelope(&case.params, case.degrees, branch)
            .and_then(|spec| envelope_check(&solved[i], &spec).map(|e| (spec, e)))
        {
            Ok((spec, e)) => {
                pass &= e.pass;
                detail.push(format!(
                    "{} {} delta={} R={} margin={:.2e}",
                    case.label(),
                    branch.name(),
                    spec.delta,
                    spec.r,
                    e.worst_margin
                ));
            }
            Err(e) => {
                pass = false;
                detail.push(format!("{} {e}", case.label()));
            }
        }
    }
    let couplings = [-0.4, -0.2, 0.2, 0.4];
    let sets: Vec<CouplingParams> = couplings
        .iter()
        .map(|&b| CouplingParams::new(1.0, 1.0, b, 1.0, 1.0))
        .collect();
    let degrees = DegreePair::new(1, 1);
    match select_uniform(&sets, degrees) {
        Ok(specs) => {
            let profiles = batch::map(&sets, |&params| solve(Case { params, degrees }));
            let mut worst = f64::INFINITY;
            for (p, spec) in profiles.iter().zip(&specs) {
                let e = envelope_check(p, spec).unwrap();
                pass &= e.pass;
                worst = worst.min(e.worst_margin);
            }
            detail.push(format!(
                "uniform over B={couplings:?}: delta={} R={} margin={:.2e}",
                specs[0].delta, specs[0].r, worst
            ));
        }
        Err(e) => {
            pass = false;
            detail.push(format!("uniform: {e}"));
        }
    }
    Outcome {
        pass,
        detail: detail.join("; "),
    }
}

fn amplitude_bound(solved: &[Profile]) -> Outcome {
    let margins: Vec<f64> = solved.iter().map(amplitude_bound_check).collect();
    let worst = margins.iter().cloned().fold(f64::INFINITY, f64::min);
    Outcome {
        pass: worst >= -1e-8,
        detail: format!(
            "smallest margin Λ² - max(f₊²+f₋²) = {worst:.4e} (overshoot case {:.4e})",
            margins[4]
        ),
    }
}

fn classify_stably(p: &Profile) -> (MonotonicityClass, bool) {
    let class = monotonicity_classify(p, DEFAULT_SLOPE_TOL);
    let halved = monotonicity_classify(p, DEFAULT_SLOPE_TOL / 2.0);
    (class, class.name() == halved.name())
}

fn monotonicity(solved: &[Profile]) -> Outcome {
    let mut pass = true;
    let mut detail = Vec::new();
    let degrees = DegreePair::new(1, 1);

    let attractive: Vec<f64> = (1..=9).map(|k| -0.1 * f64::from(k)).collect();
    let small: Vec<f64> = vec![0.05, 0.1, 0.15, 0.2];
    for (label, couplings) in [("B in [-0.9,-0.1]", &attractive), ("B in (0,0.2]", &small)] {
        let classes = batch::map(couplings, |&b| {
            classify_stably(&solve(Case {
                params: CouplingParams::new(1.0, 1.0, b, 1.0, 1.0),
                degrees,
            }))
        });
        let ok = classes
            .iter()
            .all(|(c, stable)| *stable && matches!(c, MonotonicityClass::BothNondecreasing));
        pass &= ok;
        let names: Vec<&str> = classes.iter().map(|(c, _)| c.name()).collect();
        detail.push(format!(
            "{label}: {}",
            if ok {
                "all BothNondecreasing".to_string()
            } else {
                format!("{names:?}")
            }
        ));
    }

    let mixed = solve(Case::new([1.0, 1.0, 0.5, 1.0, 1.0], [1, 0]));
    let (class, stable) = classify_stably(&mixed);
    pass &= stable && matches!(class, MonotonicityClass::PlusUpMinusDown);
    detail.push(format!("(1,1,0.5,1,1)/(1,0): {}", class.name()));

    let over = &solved[4];
    let a = leading_coeffs(&OVERSHOOT.params, OVERSHOOT.degrees);
    let expected = if a.a_plus > 0.0 {
        "NonMonotonePlus"
    } else {
        "NonMonotoneMinus"
    };
    let (class, stable) = classify_stably(over);
    pass &= stable && class.name() == expected;
    detail.push(format!(
        "overshoot a=({:.4},{:.4}): {} (expected {expected})",
        a.a_plus,
        a.a_minus,
        class.name()
    ));
    Outcome {
        pass,
        detail: detail.join("; "),
    }
}

fn uniqueness() -> Outcome {
    let grid = build_grid(GridSpec::uniform(R_MAX, N)).unwrap();
    let opts = SolveOptions::default();
    let mut worst: f64 = 0.0;
    let mut pass = true;
    let mut detail = Vec::new();
    for case in CASES {
        match uniqueness_probe(case.params, case.degrees, &grid, &opts, 3) {
            Ok(d) => {
                worst = worst.max(d);
                pass &= d <= 1e-8;
            }
            Err(e) => {
                pass = false;
                detail.push(format!("{} {e}", case.label()));
            }
        }
    }
    detail.insert(0, format!("largest seed spread {worst:.2e}"));
    Outcome {
        pass,
        detail: detail.join("; "),
    }
}

fn second_variation(solved: &[Profile]) -> Outcome {
    let eigs: Vec<f64> = solved
        .iter()
        .map(|p| second_variation_min_eig(p).unwrap())
        .collect();
    let worst = eigs.iter().cloned().fold(f64::INFINITY, f64::min);
    Outcome {
        pass: worst >= -1e-8 && eigs[1] > 1e-4,
        detail: format!(
            "min eigenvalues {}",
            eigs.iter()
                .map(|e| format!("{e:.3e}"))
                .collect::<Vec<_>>()
                .join(", ")
        ),
    }
}

/// Grid resolution of the oracle comparison; the default grid's truncation
/// error alone is near the tolerance.
const ORACLE_N: usize = 16000;

fn scalar_oracle() -> Outcome {
    let mut pass = true;
    let mut detail = Vec::new();
    for n in [1, 2] {
        let case = Case::new([1.0, 1.0, 0.0, 1.0, 1.0], [n, 0]);
        let p = solve_on(case, ORACLE_N);
        let h = R_MAX / ORACLE_N as f64;
        let oracle = ScalarOracle::solve(n, h / 8.0, 14.0, R_MAX);
        let nodes = p.grid.nodes();
        let dist = nodes
            .iter()
            .enumerate()
            .map(|(i, &r)| {
                (p.f_plus[i] - oracle.at(r))
                    .abs()
                    .max((p.f_minus[i] - 1.0).abs())
            })
            .fold(0.0, f64::max);
        pass &= dist <= 1e-6;
        detail.push(format!("degree {n}: sup distance {dist:.2e}"));
    }
    Outcome {
        pass,
        detail: format!("{} (N={ORACLE_N})", detail.join("; ")),
    }
}

/// Largest difference at the nodes of the coarser grid, each grid doubling
/// the previous one.
fn coarse_distance(coarse: &Profile, fine: &Profile) -> f64 {
    let mut d: f64 = 0.0;
    for i in 0..coarse.grid.len() {
        d = d
            .max((coarse.f_plus[i] - fine.f_plus[2 * i]).abs())
            .max((coarse.f_minus[i] - fine.f_minus[2 * i]).abs());
    }
    d
}

fn convergence_order() -> Outcome {
    let mut pass = true;
    let mut detail = Vec::new();
    for case in CASES {
        let [p1, p2, p3] = [2000, 4000, 8000].map(|n| solve_on(case, n));
        let d12 = coarse_distance(&p1, &p2);
        let d23 = coarse_distance(&p2, &p3);
        pass &= d12 <= 4.5 * d23;
        detail.push(format!("{} ratio {:.3}", case.label(), d12 / d23));
    }
    Outcome {
        pass,
        detail: detail.join("; "),
    }
}

type Criterion<'a> = Box<dyn Fn() -> Outcome + 'a>;

fn main() -> ExitCode {
    let started = Instant::now();
    let solved: Vec<Profile> = batch::map(&CASES, |&c| solve(c));
    for (case, p) in CASES.iter().zip(&solved) {
        assert!(p.report.converged, "{} did not converge", case.label());
    }

    let criteria: Vec<(&str, Criterion)> = vec![
        ("quantization", Box::new(|| quantization(&solved))),
        ("pohozaev", Box::new(|| pohozaev(&solved))),
        ("tail coefficients", Box::new(|| tail_coefficients(&solved))),
        ("symbolic identity", Box::new(symbolic_identity)),
        ("envelope", Box::new(|| envelopes(&solved))),
        ("a priori bound", Box::new(|| amplitude_bound(&solved))),
        ("monotonicity", Box::new(|| monotonicity(&solved))),
        ("uniqueness probe", Box::new(uniqueness)),
        ("second variation", Box::new(|| second_variation(&solved))),
        ("scalar oracle", Box::new(scalar_oracle)),
        ("convergence order", Box::new(convergence_order)),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let out = run();
        if !out.pass {
            failed += 1;
        }
        println!(
            "[{}] {:>2} {name} ({:.1}s): {}",
            if out.pass { "PASS" } else { "FAIL" },
            i + 1,
            t.elapsed().as_secs_f64(),
            out.detail
        );
    }
    println!(
        "acceptance: {} of {} criteria passed in {:.1}s",
        criteria.len() - failed,
        criteria.len(),
        started.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
