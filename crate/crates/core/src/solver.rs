//! Damped Newton iteration on the discretized coupled system, with
//! continuation in the coupling `B` and a multi-start uniqueness probe.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::asymptotics::leading_coeffs;
use crate::banded::BandMatrix;
use crate::batch;
use crate::error::{Error, Result};
use crate::grid::{radial_operator, BcFar, BcZero, RadialGrid, RadialOperator};
use crate::model::{validate, Component, CouplingParams, DegreePair};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FarField {
    /// `f±(R_max) = t±`.
    Dirichlet,
    /// `f±'(R_max) = -2a±/R_max³` with the closed-form `a±`.
    #[default]
    Robin,
}

impl std::str::FromStr for FarField {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "dirichlet" => Ok(FarField::Dirichlet),
            "robin" => Ok(FarField::Robin),
            other => Err(format!("unknown far-field condition {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveOptions {
    /// Sup-norm of the residual at which Newton stops.
    pub tolerance: f64,
    pub max_newton_iters: usize,
    /// Backtracking factor of the line search.
    pub damping: f64,
    pub continuation_steps: usize,
    pub far_field: FarField,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            max_newton_iters: 50,
            damping: 0.5,
            continuation_steps: 8,
            far_field: FarField::Robin,
        }
    }
}

impl SolveOptions {
    fn check(&self) -> Result<()> {
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidOptions(format!(
                "tolerance must be positive, got {}",
                self.tolerance
            )));
        }
        if !(self.damping > 0.0 && self.damping < 1.0) {
            return Err(Error::InvalidOptions(format!(
                "damping must lie in (0, 1), got {}",
                self.damping
            )));
        }
        if self.continuation_steps == 0 {
            return Err(Error::InvalidOptions(
                "continuation_steps must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveReport {
    /// Newton iterations taken at each continuation step.
    pub iterations: Vec<usize>,
    /// Final sup-norm residual.
    pub residual: f64,
    pub tolerance: f64,
    pub converged: bool,
    pub wall_time_s: f64,
    pub far_field: FarField,
}

/// Sampled solution pair with the data needed to rebuild its residual.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Profile {
    pub params: CouplingParams,
    pub degrees: DegreePair,
    pub grid: RadialGrid,
    pub f_plus: Vec<f64>,
    pub f_minus: Vec<f64>,
    pub report: SolveReport,
}

impl Profile {
    pub fn component(&self, c: Component) -> &[f64] {
        match c {
            Component::Plus => &self.f_plus,
            Component::Minus => &self.f_minus,
        }
    }

    pub fn check_lengths(&self) -> Result<()> {
        for f in [&self.f_plus, &self.f_minus] {
            if f.len() != self.grid.len() {
                return Err(Error::LengthMismatch {
                    expected: self.grid.len(),
                    got: f.len(),
                });
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let p: Profile = serde_json::from_str(text)?;
        validate(p.params)?;
        p.check_lengths()?;
        Ok(p)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    fn interleaved(&self) -> Vec<f64> {
        interleave(&self.f_plus, &self.f_minus)
    }
}

fn interleave(p: &[f64], m: &[f64]) -> Vec<f64> {
    p.iter().zip(m).flat_map(|(a, b)| [*a, *b]).collect()
}

fn split(x: &[f64]) -> (Vec<f64>, Vec<f64>) {
    (
        x.iter().step_by(2).copied().collect(),
        x.iter().skip(1).step_by(2).copied().collect(),
    )
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn l2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// The discrete nonlinear system for fixed coefficients and boundary data.
#[derive(Debug, Clone)]
pub struct System {
    params: CouplingParams,
    ops: [RadialOperator; 2],
}

impl System {
    pub fn new(
        grid: &RadialGrid,
        params: CouplingParams,
        degrees: DegreePair,
        far_field: FarField,
    ) -> Result<Self> {
        let tail = leading_coeffs(&params, degrees);
        let op = |c: Component| {
            let n = degrees.get(c);
            let (_, t, _) = params.component(c);
            let far = match far_field {
                FarField::Dirichlet => BcFar::Dirichlet(t),
                FarField::Robin => BcFar::Robin(tail.a(c)),
            };
            radial_operator(grid, n, BcZero::for_degree(n), far)
        };
        Ok(Self {
            params,
            ops: [op(Component::Plus)?, op(Component::Minus)?],
        })
    }

    pub fn len(&self) -> usize {
        2 * self.ops[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Interleaved residual `(G₊₀, G₋₀, G₊₁, …)`.
    pub fn residual(&self, x: &[f64]) -> Vec<f64> {
        let (fp, fm) = split(x);
        let mut out = vec![0.0; x.len()];
        for c in Component::BOTH {
            let op = &self.ops[c.index()];
            let (u, v) = match c {
                Component::Plus => (&fp, &fm),
                Component::Minus => (&fm, &fp),
            };
            let (a, t, t_o) = self.params.component(c);
            let b = self.params.b;
            for i in 0..u.len() {
                let mut g = op.apply_row(u, i) - op.rhs[i];
                if !op.is_dirichlet_row(i) {
                    g += (a * (u[i] * u[i] - t * t) + b * (v[i] * v[i] - t_o * t_o)) * u[i];
                }
                out[2 * i + c.index()] = g;
            }
        }
        out
    }

    /// Exact Jacobian of [`System::residual`], banded with two sub- and
    /// super-diagonals.
    pub fn jacobian(&self, x: &[f64]) -> BandMatrix {
        let len = x.len();
        let nodes = len / 2;
        let mut jac = BandMatrix::zeros(len, 2, 2);
        for c in Component::BOTH {
            let op = &self.ops[c.index()];
            let (a, t, t_o) = self.params.component(c);
            let b = self.params.b;
            let (s, o) = (c.index(), c.partner().index());
            for i in 0..nodes {
                let row = 2 * i + s;
                if i > 0 && op.lower[i] != 0.0 {
                    jac.set(row, row - 2, op.lower[i]);
                }
                if i + 1 < nodes && op.upper[i] != 0.0 {
                    jac.set(row, row + 2, op.upper[i]);
                }
                let mut d = op.diag[i];
                if !op.is_dirichlet_row(i) {
                    let (u, v) = (x[row], x[2 * i + o]);
                    d += a * (3.0 * u * u - t * t) + b * (v * v - t_o * t_o);
                    jac.set(row, 2 * i + o, 2.0 * b * u * v);
                }
                jac.set(row, row, d);
            }
        }
        jac
    }
}

/// `t·r^n / (r² + n²/(A t²))^{n/2}`, or the constant `t` when `n = 0`.
pub fn initial_guess(
    grid: &RadialGrid,
    params: &CouplingParams,
    degrees: DegreePair,
) -> (Vec<f64>, Vec<f64>) {
    let one = |c: Component| {
        let n = degrees.get(c);
        let (a, t, _) = params.component(c);
        let core = f64::from(n * n) / (a * t * t);
        grid.nodes()
            .iter()
            .map(|&r| {
                if n == 0 {
                    t
                } else {
                    t * r.powi(n as i32) / (r * r + core).powf(0.5 * f64::from(n))
                }
            })
            .collect::<Vec<f64>>()
    };
    (one(Component::Plus), one(Component::Minus))
}

/// Piecewise-linear ramp reaching `t` at the core radius.
fn ramp_guess(
    grid: &RadialGrid,
    params: &CouplingParams,
    degrees: DegreePair,
) -> (Vec<f64>, Vec<f64>) {
    let one = |c: Component| {
        let n = degrees.get(c);
        let (a, t, _) = params.component(c);
        let core = 2.0 * f64::from(n.max(1)) / (a * t * t).sqrt();
        let floor = if n == 0 { 0.5 } else { 0.0 };
        grid.nodes()
            .iter()
            .map(|&r| t * (floor + (1.0 - floor) * (r / core).min(1.0)))
            .collect::<Vec<f64>>()
    };
    (one(Component::Plus), one(Component::Minus))
}

/// Ansatz times `1 + 0.3·U(-1/2, 1/2)` node by node, zero where required.
fn perturbed_guess(
    grid: &RadialGrid,
    params: &CouplingParams,
    degrees: DegreePair,
    seed: u64,
) -> (Vec<f64>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut p, mut m) = initial_guess(grid, params, degrees);
    for f in [&mut p, &mut m] {
        for v in f.iter_mut() {
            *v *= 1.0 + 0.3 * (rng.random::<f64>() - 0.5);
        }
    }
    (p, m)
}

/// Residual of a profile under its recorded far-field condition.
pub fn residual(profile: &Profile) -> Result<(Vec<f64>, Vec<f64>)> {
    profile.check_lengths()?;
    let sys = System::new(
        &profile.grid,
        profile.params,
        profile.degrees,
        profile.report.far_field,
    )?;
    Ok(split(&sys.residual(&profile.interleaved())))
}

pub fn jacobian(profile: &Profile) -> Result<BandMatrix> {
    profile.check_lengths()?;
    let sys = System::new(
        &profile.grid,
        profile.params,
        profile.degrees,
        profile.report.far_field,
    )?;
    Ok(sys.jacobian(&profile.interleaved()))
}

struct NewtonOutcome {
    x: Vec<f64>,
    iterations: usize,
    residual: f64,
}

fn newton(
    sys: &System,
    mut x: Vec<f64>,
    opts: &SolveOptions,
    coupling: f64,
) -> Result<NewtonOutcome> {
    let mut f = sys.residual(&x);
    let mut res = sup(&f);
    let mut history = vec![res];
    let mut best = (res, x.clone());
    let fail =
        |res: f64, iterations: usize, history: Vec<f64>, best: Vec<f64>| Error::NoConvergence {
            coupling,
            residual: res,
            iterations,
            history,
            best,
        };
    for it in 0..=opts.max_newton_iters {
        if res <= opts.tolerance {
            return Ok(NewtonOutcome {
                x,
                iterations: it,
                residual: res,
            });
        }
        if it == opts.max_newton_iters || !res.is_finite() {
            break;
        }
        let mut step: Vec<f64> = f.iter().map(|v| -v).collect();
        sys.jacobian(&x).lu()?.solve_in_place(&mut step);
        let norm0 = l2(&f);
        let mut lambda = 1.0;
        loop {
            let trial: Vec<f64> = x.iter().zip(&step).map(|(a, d)| a + lambda * d).collect();
            let ft = sys.residual(&trial);
            let norm = l2(&ft);
            if norm.is_finite() && norm <= (1.0 - 1e-4 * lambda) * norm0 {
                x = trial;
                f = ft;
                break;
            }
            lambda *= opts.damping;
            if lambda < 1e-8 {
                return Err(fail(res, it + 1, history, best.1));
            }
        }
        res = sup(&f);
        history.push(res);
        if res < best.0 {
            best = (res, x.clone());
        }
    }
    Err(fail(res, opts.max_newton_iters, history, best.1))
}

fn finish(
    grid: &RadialGrid,
    params: CouplingParams,
    degrees: DegreePair,
    x: &[f64],
    iterations: Vec<usize>,
    residual: f64,
    opts: &SolveOptions,
    started: Instant,
) -> Profile {
    let (f_plus, f_minus) = split(x);
    Profile {
        params,
        degrees,
        grid: grid.clone(),
        f_plus,
        f_minus,
        report: SolveReport {
            iterations,
            residual,
            tolerance: opts.tolerance,
            converged: residual <= opts.tolerance,
            wall_time_s: started.elapsed().as_secs_f64(),
            far_field: opts.far_field,
        },
    }
}

/// Newton from the given starting arrays at the target coefficients.
pub fn newton_solve(
    initial: (&[f64], &[f64]),
    grid: &RadialGrid,
    params: CouplingParams,
    degrees: DegreePair,
    options: &SolveOptions,
) -> Result<Profile> {
    let started = Instant::now();
    validate(params)?;
    options.check()?;
    for f in [initial.0, initial.1] {
        if f.len() != grid.len() {
            return Err(Error::LengthMismatch {
                expected: grid.len(),
                got: f.len(),
            });
        }
    }
    let sys = System::new(grid, params, degrees, options.far_field)?;
    let out = newton(&sys, interleave(initial.0, initial.1), options, params.b)?;
    Ok(finish(
        grid,
        params,
        degrees,
        &out.x,
        vec![out.iterations],
        out.residual,
        options,
        started,
    ))
}

/// Solves the decoupled problem and then walks `B` to its target, halving the
/// step when a Newton solve fails.
pub fn continuation_solve(
    params: CouplingParams,
    degrees: DegreePair,
    grid: &RadialGrid,
    options: &SolveOptions,
) -> Result<Profile> {
    let (p0, m0) = initial_guess(grid, &params, degrees);
    continuation_from(params, degrees, grid, options, interleave(&p0, &m0))
}

fn continuation_from(
    params: CouplingParams,
    degrees: DegreePair,
    grid: &RadialGrid,
    options: &SolveOptions,
    start: Vec<f64>,
) -> Result<Profile> {
    const MAX_HALVINGS: u32 = 8;
    let started = Instant::now();
    validate(params)?;
    options.check()?;
    let target = params.b;
    let solve_at = |b: f64, x: Vec<f64>| {
        let sys = System::new(grid, params.with_coupling(b), degrees, options.far_field)?;
        newton(&sys, x, options, b)
    };

    let first = solve_at(0.0, start)?;
    let mut iterations = vec![first.iterations];
    let (mut x, mut res) = (first.x, first.residual);
    let mut b = 0.0;
    let mut step = target / options.continuation_steps as f64;
    let mut halvings = 0;
    while b != target {
        let next = if (target - b).abs() <= step.abs() * (1.0 + 1e-12) {
            target
        } else {
            b + step
        };
        match solve_at(next, x.clone()) {
            Ok(out) => {
                iterations.push(out.iterations);
                x = out.x;
                res = out.residual;
                b = next;
            }
            Err(Error::NoConvergence { .. } | Error::SingularJacobian(_))
                if halvings < MAX_HALVINGS =>
            {
                step *= 0.5;
                halvings += 1;
            }
            Err(e) => return Err(e),
        }
    }
    Ok(finish(
        grid, params, degrees, &x, iterations, res, options, started,
    ))
}

fn seed_guess(
    k: usize,
    grid: &RadialGrid,
    params: &CouplingParams,
    degrees: DegreePair,
) -> (Vec<f64>, Vec<f64>) {
    match k {
        0 => initial_guess(grid, params, degrees),
        1 => ramp_guess(grid, params, degrees),
        _ => perturbed_guess(grid, params, degrees, k as u64),
    }
}

/// Solves from `seed_count` distinct starting points (ansatz, ramp, random
/// perturbations of the ansatz) and returns the largest pairwise sup-distance
/// between the converged profiles. A seed that fails by direct Newton is
/// retried by continuation in `B` from the same start.
pub fn uniqueness_probe(
    params: CouplingParams,
    degrees: DegreePair,
    grid: &RadialGrid,
    options: &SolveOptions,
    seed_count: usize,
) -> Result<f64> {
    validate(params)?;
    if seed_count < 2 {
        return Err(Error::TooFewSeeds(seed_count));
    }
    let seeds: Vec<usize> = (0..seed_count).collect();
    let solved = batch::map(&seeds, |&k| {
        let (p, m) = seed_guess(k, grid, &params, degrees);
        newton_solve((&p, &m), grid, params, degrees, options)
            .or_else(|_| continuation_from(params, degrees, grid, options, interleave(&p, &m)))
    });
    let mut profiles = Vec::new();
    let mut first_err = None;
    for s in solved {
        match s {
            Ok(p) => profiles.push(p),
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    if profiles.len() < 2 {
        return Err(first_err.unwrap_or(Error::TooFewSeeds(profiles.len())));
    }
    let mut worst: f64 = 0.0;
    for i in 0..profiles.len() {
        for j in i + 1..profiles.len() {
            worst = worst.max(sup_distance(&profiles[i], &profiles[j]));
        }
    }
    Ok(worst)
}

/// Largest nodewise difference over both components (same grid assumed).
pub fn sup_distance(a: &Profile, b: &Profile) -> f64 {
    a.f_plus
        .iter()
        .zip(&b.f_plus)
        .chain(a.f_minus.iter().zip(&b.f_minus))
        .fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}
