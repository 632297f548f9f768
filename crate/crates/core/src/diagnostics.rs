//! Identities and inequalities satisfied by a solved profile: energy,
//! quantization and Pohozaev identities, the amplitude bound, the second
//! variation, monotonicity and the named verification suite built on them.

use serde::{Deserialize, Serialize};

use crate::asymptotics::{
    derivative_tail_check, envelope_check, leading_coeffs, second_coeffs, select_envelope,
    tail_fit, Branch, DEFAULT_FIT_WINDOW,
};
use crate::banded::BandMatrix;
use crate::error::{Error, Result};
use crate::grid::quadrature_to;
use crate::model::{derived_bounds, Component};
use crate::solver::{self, Profile, System};

pub const DEFAULT_SLOPE_TOL: f64 = 1e-6;

fn node_index(profile: &Profile, r: f64) -> Result<usize> {
    let g = &profile.grid;
    if !(r > 0.0 && r <= g.r_max() * (1.0 + 1e-12)) {
        return Err(Error::BadGridSpec(format!(
            "R = {r} outside (0, {}]",
            g.r_max()
        )));
    }
    let k = g.nearest_node(r);
    if (g.nodes()[k] - r).abs() > 1e-9 * g.r_max() {
        return Err(Error::BadGridSpec(format!("R = {r} is not a grid node")));
    }
    Ok(k)
}

/// `A₊(f₊²-t₊²)² + A₋(f₋²-t₋²)² + 2B(f₊²-t₊²)(f₋²-t₋²)` at every node.
fn potential_samples(profile: &Profile) -> Vec<f64> {
    let p = &profile.params;
    profile
        .f_plus
        .iter()
        .zip(&profile.f_minus)
        .map(|(&u, &v)| {
            let dp = u * u - p.t_plus * p.t_plus;
            let dm = v * v - p.t_minus * p.t_minus;
            p.a_plus * dp * dp + p.a_minus * dm * dm + 2.0 * p.b * dp * dm
        })
        .collect()
}

fn degree_sum(profile: &Profile) -> f64 {
    let (np, nm) = (
        f64::from(profile.degrees.n_plus),
        f64::from(profile.degrees.n_minus),
    );
    let p = &profile.params;
    np * np * p.t_plus * p.t_plus + nm * nm * p.t_minus * p.t_minus
}

/// `½∫₀^R {Σ±[(f±')² + (n±²/r²)f±²] + ½[potential]} r dr`; `R` must be a node.
pub fn radial_energy(profile: &Profile, r: f64) -> Result<f64> {
    profile.check_lengths()?;
    let k = node_index(profile, r)?;
    let g = &profile.grid;
    let nodes = g.nodes();
    let pot = potential_samples(profile);
    let mut density: Vec<f64> = pot.iter().map(|v| 0.5 * v).collect();
    for c in Component::BOTH {
        let f = profile.component(c);
        let n = profile.degrees.get(c);
        let n2 = f64::from(n * n);
        for (i, d) in density.iter_mut().enumerate() {
            let slope = g.derivative(f, i);
            // f ~ r^n at the origin, so f²/r² → f'(0)² for n = 1 and 0 otherwise.
            let centrifugal = if i > 0 {
                n2 * f[i] * f[i] / (nodes[i] * nodes[i])
            } else if n == 1 {
                slope * slope
            } else {
                0.0
            };
            *d += slope * slope + centrifugal;
        }
    }
    Ok(0.5 * quadrature_to(g, &density, k)?)
}

/// `[Rf₊'(R)]² + [Rf₋'(R)]² + ∫₀^R potential r dr - (n₊²t₊² + n₋²t₋²)`.
/// The derivative is central at interior nodes and one-sided at `R_max`.
pub fn pohozaev_residual(profile: &Profile, r: f64) -> Result<f64> {
    profile.check_lengths()?;
    let k = node_index(profile, r)?;
    let g = &profile.grid;
    let rk = g.nodes()[k];
    let boundary: f64 = Component::BOTH
        .iter()
        .map(|&c| {
            let d = rk * g.derivative(profile.component(c), k);
            d * d
        })
        .sum();
    let integral = quadrature_to(g, &potential_samples(profile), k)?;
    Ok(boundary + integral - degree_sum(profile))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quantization {
    /// `∫₀^{R_max} potential r dr`.
    pub lhs: f64,
    /// `n₊²t₊² + n₋²t₋²`.
    pub rhs: f64,
    /// `(lhs - rhs)/rhs`, or `lhs - rhs` when `rhs = 0`.
    pub gap: f64,
}

pub fn quantization_check(profile: &Profile) -> Result<Quantization> {
    profile.check_lengths()?;
    let g = &profile.grid;
    let lhs = quadrature_to(g, &potential_samples(profile), g.n())?;
    let rhs = degree_sum(profile);
    let gap = if rhs > 0.0 {
        (lhs - rhs) / rhs
    } else {
        lhs - rhs
    };
    Ok(Quantization { lhs, rhs, gap })
}

/// `Λ² - max(f₊² + f₋²)`.
pub fn amplitude_bound_check(profile: &Profile) -> f64 {
    let bound = derived_bounds(&profile.params).lambda_sq;
    let peak = profile
        .f_plus
        .iter()
        .zip(&profile.f_minus)
        .map(|(u, v)| u * u + v * v)
        .fold(f64::NEG_INFINITY, f64::max);
    bound - peak
}

/// The second variation as a symmetric band matrix in the `r`-weighted
/// geometry, on the unknowns that are not fixed by Dirichlet rows.
pub fn second_variation_matrix(profile: &Profile) -> Result<BandMatrix> {
    profile.check_lengths()?;
    let sys = System::new(
        &profile.grid,
        profile.params,
        profile.degrees,
        profile.report.far_field,
    )?;
    let x: Vec<f64> = profile
        .f_plus
        .iter()
        .zip(&profile.f_minus)
        .flat_map(|(a, b)| [*a, *b])
        .collect();
    let jac = sys.jacobian(&x);
    let w = profile.grid.weights();
    let last = profile.grid.n();
    let dirichlet = |row: usize| {
        let (i, c) = (
            row / 2,
            if row.is_multiple_of(2) {
                Component::Plus
            } else {
                Component::Minus
            },
        );
        (i == 0 && profile.degrees.get(c) != 0)
            || (i == last && profile.report.far_field == solver::FarField::Dirichlet)
    };
    let free: Vec<usize> = (0..x.len()).filter(|&r| !dirichlet(r)).collect();
    let mut s = BandMatrix::zeros(free.len(), 3, 3);
    let sw: Vec<f64> = w.iter().map(|v| v.sqrt()).collect();
    for (a, &ra) in free.iter().enumerate() {
        for (b, &rb) in free.iter().enumerate().skip(a).take(4) {
            if rb > ra + 2 {
                break;
            }
            // W·J is symmetric; build the upper triangle and mirror it.
            let h = w[ra / 2] * jac.get(ra, rb);
            let v = h / (sw[ra / 2] * sw[rb / 2]);
            if v != 0.0 || a == b {
                s.set(a, b, v);
                if a != b {
                    s.set(b, a, v);
                }
            }
        }
    }
    Ok(s)
}

/// Smallest eigenvalue of [`second_variation_matrix`]: bisection with a
/// Cholesky positivity test, refined by shifted inverse iteration.
pub fn second_variation_min_eig(profile: &Profile) -> Result<f64> {
    let s = second_variation_matrix(profile)?;
    min_eigenvalue(&s)
}

fn min_eigenvalue(s: &BandMatrix) -> Result<f64> {
    let n = s.n();
    let (kl, _) = s.bandwidths();
    let mut lo = f64::INFINITY;
    let mut hi = f64::INFINITY;
    for i in 0..n {
        let d = s.get(i, i);
        let off: f64 = (i.saturating_sub(kl)..(i + kl + 1).min(n))
            .filter(|&j| j != i)
            .map(|j| s.get(i, j).abs())
            .sum();
        lo = lo.min(d - off);
        hi = hi.min(d);
    }
    let scale = lo.abs().max(hi.abs()).max(1.0);
    lo -= 1e-12 * scale;
    hi += 1e-12 * scale;
    if !s.cholesky_succeeds(lo) || s.cholesky_succeeds(hi) {
        return Err(Error::EigenFailure("bisection bracket is invalid".into()));
    }
    for _ in 0..200 {
        if hi - lo <= 1e-14 * scale {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if s.cholesky_succeeds(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // Shift just below the eigenvalue so the shifted matrix is definite.
    let shift = lo - 1e-10 * scale;
    let mut shifted = s.clone();
    for i in 0..n {
        shifted.add(i, i, -shift);
    }
    let lu = shifted
        .lu()
        .map_err(|e| Error::EigenFailure(e.to_string()))?;
    let mut v = vec![1.0 / (n as f64).sqrt(); n];
    let mut lambda = lo;
    for _ in 0..50 {
        lu.solve_in_place(&mut v);
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::EigenFailure("inverse iteration diverged".into()));
        }
        v.iter_mut().for_each(|x| *x /= norm);
        let sv = s.mul_vec(&v);
        let rq: f64 = v.iter().zip(&sv).map(|(a, b)| a * b).sum();
        let converged = (rq - lambda).abs() <= 1e-15 * scale;
        lambda = rq;
        if converged {
            break;
        }
    }
    if (lambda - lo).abs() > 1e-6 * scale {
        return Err(Error::EigenFailure(format!(
            "inverse iteration ({lambda}) disagrees with bisection ({lo})"
        )));
    }
    Ok(lambda)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub node: usize,
    /// Slope extremum against the overall trend of the component.
    pub slope: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum MonotonicityClass {
    BothNondecreasing,
    PlusUpMinusDown,
    NonMonotonePlus { witness: Witness },
    NonMonotoneMinus { witness: Witness },
    Other,
}

impl MonotonicityClass {
    pub fn name(&self) -> &'static str {
        match self {
            MonotonicityClass::BothNondecreasing => "BothNondecreasing",
            MonotonicityClass::PlusUpMinusDown => "PlusUpMinusDown",
            MonotonicityClass::NonMonotonePlus { .. } => "NonMonotonePlus",
            MonotonicityClass::NonMonotoneMinus { .. } => "NonMonotoneMinus",
            MonotonicityClass::Other => "Other",
        }
    }

    pub fn witness(&self) -> Option<Witness> {
        match self {
            MonotonicityClass::NonMonotonePlus { witness }
            | MonotonicityClass::NonMonotoneMinus { witness } => Some(*witness),
            _ => None,
        }
    }
}

enum Trend {
    Up,
    Down,
    Neither(Witness),
}

fn trend(profile: &Profile, c: Component, slope_tol: f64) -> Trend {
    let g = &profile.grid;
    let f = profile.component(c);
    let (_, t, _) = profile.params.component(c);
    let tol = slope_tol * t / g.r_max();
    let mut min = (0, f64::INFINITY);
    let mut max = (0, f64::NEG_INFINITY);
    for i in 1..g.n() {
        let d = g.derivative(f, i);
        if d < min.1 {
            min = (i, d);
        }
        if d > max.1 {
            max = (i, d);
        }
    }
    if min.1 >= -tol {
        Trend::Up
    } else if max.1 <= tol {
        Trend::Down
    } else {
        let rising = f[g.n()] >= f[0];
        let (node, slope) = if rising { min } else { max };
        Trend::Neither(Witness { node, slope })
    }
}

/// Classifies the slopes of both components up to `slope_tol·t±/R_max`.
pub fn monotonicity_classify(profile: &Profile, slope_tol: f64) -> MonotonicityClass {
    match (
        trend(profile, Component::Plus, slope_tol),
        trend(profile, Component::Minus, slope_tol),
    ) {
        (Trend::Up, Trend::Up) => MonotonicityClass::BothNondecreasing,
        (Trend::Up, Trend::Down) => MonotonicityClass::PlusUpMinusDown,
        (Trend::Neither(witness), _) => MonotonicityClass::NonMonotonePlus { witness },
        (_, Trend::Neither(witness)) => MonotonicityClass::NonMonotoneMinus { witness },
        _ => MonotonicityClass::Other,
    }
}

/// Least-squares slope of `log f` against `log r` over nodes `1..=10`.
pub fn near_origin_order(profile: &Profile, c: Component) -> f64 {
    let r = profile.grid.nodes();
    let f = profile.component(c);
    let pts: Vec<(f64, f64)> = (1..=10).map(|i| (r[i].ln(), f[i].abs().ln())).collect();
    let n = pts.len() as f64;
    let xm = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let ym = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - xm) * (p.1 - ym)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - xm) * (p.0 - xm)).sum();
    sxy / sxx
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PohozaevSample {
    #[serde(rename = "R")]
    pub r: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub quantization_lhs: f64,
    pub quantization_rhs: f64,
    pub pohozaev_residual: Vec<PohozaevSample>,
    pub energy_value: f64,
    pub bound_margin: f64,
    pub hessian_min_eig: f64,
}

/// Pohozaev residual at `R_max/4, R_max/2, R_max` (nearest nodes) and the
/// remaining identity data.
pub fn identity_report(profile: &Profile) -> Result<IdentityReport> {
    let q = quantization_check(profile)?;
    let g = &profile.grid;
    let mut samples = Vec::new();
    for frac in [0.25, 0.5, 1.0] {
        let r = g.nodes()[g.nearest_node(frac * g.r_max())];
        samples.push(PohozaevSample {
            r,
            residual: pohozaev_residual(profile, r)?,
        });
    }
    Ok(IdentityReport {
        quantization_lhs: q.lhs,
        quantization_rhs: q.rhs,
        pohozaev_residual: samples,
        energy_value: radial_energy(profile, g.r_max())?,
        bound_margin: amplitude_bound_check(profile),
        hessian_min_eig: second_variation_min_eig(profile)?,
    })
}

/// Tolerances of the named verification suite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyTolerances {
    /// Multiple of the recorded solver tolerance allowed for the residual.
    pub residual_factor: f64,
    pub positivity: f64,
    pub bound: f64,
    /// Relative quantization gap.
    pub quantization: f64,
    /// Pohozaev residual at `R_max`, relative to `n₊²t₊² + n₋²t₋²`.
    pub pohozaev: f64,
    pub hessian: f64,
    pub near_origin_order: f64,
    /// Relative error of the fitted `a±`.
    pub tail_a: f64,
    pub slope_tol: f64,
}

impl Default for VerifyTolerances {
    fn default() -> Self {
        Self {
            residual_factor: 1.0,
            positivity: 1e-12,
            bound: 1e-8,
            quantization: 5e-3,
            pohozaev: 1e-2,
            hessian: 1e-8,
            near_origin_order: 0.05,
            tail_a: 1e-2,
            slope_tol: DEFAULT_SLOPE_TOL,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub check: String,
    #[serde(with = "nullable")]
    pub value: f64,
    #[serde(with = "nullable")]
    pub target: f64,
    /// Infinite for informational checks; written as `null`.
    #[serde(with = "nullable")]
    pub tolerance: f64,
    pub pass: bool,
}

/// JSON has no infinities or NaN: non-finite values are written as `null`
/// and `null` reads back as NaN.
mod nullable {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
    }
}

impl Check {
    fn within(name: &str, value: f64, target: f64, tolerance: f64) -> Self {
        Self {
            check: name.to_string(),
            value,
            target,
            tolerance,
            pass: (value - target).abs() <= tolerance,
        }
    }

    fn at_least(name: &str, value: f64, target: f64, tolerance: f64) -> Self {
        Self {
            check: name.to_string(),
            value,
            target,
            tolerance,
            pass: value >= target - tolerance,
        }
    }

    fn failed(name: &str, target: f64, tolerance: f64) -> Self {
        Self {
            check: name.to_string(),
            value: f64::NAN,
            target,
            tolerance,
            pass: false,
        }
    }
}

/// Fit window for tail checks: the default one when it fits in the grid,
/// otherwise the middle half of the domain.
pub fn fit_window(profile: &Profile) -> (f64, f64) {
    let r_max = profile.grid.r_max();
    if r_max >= DEFAULT_FIT_WINDOW.1 {
        DEFAULT_FIT_WINDOW
    } else {
        (0.25 * r_max, 0.75 * r_max)
    }
}

/// Runs every named check in a fixed order. No check re-solves the profile.
pub fn verify_suite(profile: &Profile, tol: &VerifyTolerances) -> Result<Vec<Check>> {
    profile.check_lengths()?;
    let mut out = Vec::new();

    let (rp, rm) = solver::residual(profile)?;
    let res = rp.iter().chain(&rm).fold(0.0, |m: f64, v| m.max(v.abs()));
    let budget = tol.residual_factor * profile.report.tolerance;
    out.push(Check::within("residual", res, 0.0, budget));

    let min_f = profile
        .f_plus
        .iter()
        .chain(&profile.f_minus)
        .fold(f64::INFINITY, |m, &v| m.min(v));
    out.push(Check::at_least("positivity", min_f, 0.0, tol.positivity));
    out.push(Check::at_least(
        "amplitude_bound",
        amplitude_bound_check(profile),
        0.0,
        tol.bound,
    ));

    let q = quantization_check(profile)?;
    out.push(Check::within("quantization", q.gap, 0.0, tol.quantization));
    let poh = pohozaev_residual(profile, profile.grid.r_max())?;
    let scale = if q.rhs > 0.0 { q.rhs } else { 1.0 };
    out.push(Check::within("pohozaev", poh / scale, 0.0, tol.pohozaev));

    out.push(match second_variation_min_eig(profile) {
        Ok(v) => Check::at_least("hessian_min_eig", v, 0.0, tol.hessian),
        Err(_) => Check::failed("hessian_min_eig", 0.0, tol.hessian),
    });

    for c in Component::BOTH {
        let n = f64::from(profile.degrees.get(c));
        let name = format!("near_origin_order_{}", component_name(c));
        out.push(Check::within(
            &name,
            near_origin_order(profile, c),
            n,
            tol.near_origin_order,
        ));
    }

    let closed = second_coeffs(&profile.params, profile.degrees);
    let window = fit_window(profile);
    let fit = tail_fit(profile, window);
    for c in Component::BOTH {
        let name = format!("tail_a_{}", component_name(c));
        let a = closed.a(c);
        let allowed = tol.tail_a * a.abs().max(1e-3);
        out.push(match &fit {
            Ok(f) => Check::within(&name, f.a(c), a, allowed),
            Err(_) => Check::failed(&name, a, allowed),
        });
    }
    let c2 = derivative_tail_check(
        profile,
        &leading_coeffs(&profile.params, profile.degrees),
        window,
    );
    out.push(match c2 {
        Ok(v) => {
            let worst = v[0].max(v[1]);
            Check {
                check: "derivative_tail_c2".into(),
                value: worst,
                target: 0.0,
                tolerance: f64::INFINITY,
                pass: worst.is_finite(),
            }
        }
        Err(_) => Check::failed("derivative_tail_c2", 0.0, f64::INFINITY),
    });

    let env = select_envelope(
        &profile.params,
        profile.degrees,
        Branch::default_for(profile.params.b),
    )
    .and_then(|spec| envelope_check(profile, &spec));
    out.push(match env {
        Ok(e) => Check::at_least("envelope", e.worst_margin, 0.0, 0.0),
        Err(_) => Check::failed("envelope", 0.0, 0.0),
    });

    // A component with a > 0 approaches its limit from above, and from below
    // when a < 0; compare with the discrete trend over the last tenth.
    let g = &profile.grid;
    let tail_start = g.nearest_node(0.9 * g.r_max());
    let mut agree = 1.0;
    for c in Component::BOTH {
        let a = closed.a(c);
        let f = profile.component(c);
        let rise = f[g.n()] - f[tail_start];
        if a != 0.0 && (rise > 0.0) != (a < 0.0) {
            agree = 0.0;
        }
    }
    out.push(Check::within("overshoot_sign_rule", agree, 1.0, 0.0));
    Ok(out)
}

pub fn component_name(c: Component) -> &'static str {
    match c {
        Component::Plus => "plus",
        Component::Minus => "minus",
    }
}
