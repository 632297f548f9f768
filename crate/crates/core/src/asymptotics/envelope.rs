//! Sub/supersolution envelopes `t + a/r² + b/r⁴ + c(R/r)⁶` for `r ≥ R`:
//! selection of `(δ, R)` by exact certification of the defect series, and
//! checks of solved profiles against the resulting sandwich.

use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use super::poly::sturm_roots_in;
use super::scalar::{exact, Scalar};
use super::series::{expand_defect_series, DefectSeries, EnvelopeCoeffs};
use super::{c_hat, c_tilde, leading_coeff, second_coeff, second_coeffs};
use crate::batch;
use crate::error::{Error, Result};
use crate::model::{validate, Component, CouplingParams, DegreePair};
use crate::solver::Profile;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Upper,
    Lower,
}

/// One envelope pair: which side each component's envelope lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// `w̄₊, w̲₋` with `c = δc̃`, used when `B > 0`.
    UpperPlusLowerMinus,
    /// `w̲₊, w̄₋` with `c = -δc̃`, used when `B > 0`.
    LowerPlusUpperMinus,
    /// `w̄±` with `c = δĉ`, used when `B < 0`.
    UpperBoth,
    /// `w̲±` with `c = -δĉ`, used when `B < 0`.
    LowerBoth,
}

impl Branch {
    pub fn sides(self) -> [Side; 2] {
        match self {
            Branch::UpperPlusLowerMinus => [Side::Upper, Side::Lower],
            Branch::LowerPlusUpperMinus => [Side::Lower, Side::Upper],
            Branch::UpperBoth => [Side::Upper, Side::Upper],
            Branch::LowerBoth => [Side::Lower, Side::Lower],
        }
    }

    fn mixed(self) -> bool {
        matches!(
            self,
            Branch::UpperPlusLowerMinus | Branch::LowerPlusUpperMinus
        )
    }

    fn sign(self) -> i64 {
        match self {
            Branch::UpperPlusLowerMinus | Branch::UpperBoth => 1,
            Branch::LowerPlusUpperMinus | Branch::LowerBoth => -1,
        }
    }

    /// The other pair of the same family; together they bound both sides.
    pub fn companion(self) -> Self {
        match self {
            Branch::UpperPlusLowerMinus => Branch::LowerPlusUpperMinus,
            Branch::LowerPlusUpperMinus => Branch::UpperPlusLowerMinus,
            Branch::UpperBoth => Branch::LowerBoth,
            Branch::LowerBoth => Branch::UpperBoth,
        }
    }

    /// Mixed pairs for `B ≥ 0`, aligned pairs for `B < 0`.
    pub fn default_for(coupling: f64) -> Self {
        if coupling < 0.0 {
            Branch::UpperBoth
        } else {
            Branch::UpperPlusLowerMinus
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Branch::UpperPlusLowerMinus => "upper_plus_lower_minus",
            Branch::LowerPlusUpperMinus => "lower_plus_upper_minus",
            Branch::UpperBoth => "upper_both",
            Branch::LowerBoth => "lower_both",
        }
    }

    fn check(self, coupling: f64) -> Result<()> {
        let ok = coupling == 0.0 || (coupling > 0.0) == self.mixed();
        if ok {
            Ok(())
        } else {
            Err(Error::BranchMismatch {
                branch: self.name(),
                coupling,
            })
        }
    }
}

/// A selected `(δ, R)` together with the constants of both branch families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeSpec {
    pub c_tilde_plus: f64,
    pub c_tilde_minus: f64,
    pub c_hat_plus: f64,
    pub c_hat_minus: f64,
    pub delta: f64,
    #[serde(rename = "R")]
    pub r: f64,
    /// The certified pair; its companion is certified alongside it.
    pub branch: Branch,
}

impl EnvelopeSpec {
    pub fn new(params: &CouplingParams, delta: f64, r: f64, branch: Branch) -> Self {
        let (c_tilde_plus, c_tilde_minus) = c_tilde(params);
        let (c_hat_plus, c_hat_minus) = c_hat(params);
        Self {
            c_tilde_plus,
            c_tilde_minus,
            c_hat_plus,
            c_hat_minus,
            delta,
            r,
            branch,
        }
    }

    /// `c±` of an envelope pair of this spec's family.
    pub fn c(&self, branch: Branch) -> [f64; 2] {
        let s = branch.sign() as f64 * self.delta;
        if branch.mixed() {
            [s * self.c_tilde_plus, s * self.c_tilde_minus]
        } else {
            [s * self.c_hat_plus, s * self.c_hat_minus]
        }
    }

    /// Side of each component under the given pair.
    pub fn side(&self, branch: Branch, c: Component) -> Side {
        branch.sides()[c.index()]
    }
}

#[derive(Debug, Clone)]
pub struct SearchBudget {
    /// Cutoff radii tried, outer loop.
    pub radii: Vec<u32>,
    /// `δ = 2^{-k}` for these `k`, inner loop.
    pub delta_exponents: Vec<u32>,
}

impl Default for SearchBudget {
    fn default() -> Self {
        Self {
            radii: vec![2, 4, 8, 16, 32, 64],
            delta_exponents: (1..=10).collect(),
        }
    }
}

fn exact_params(params: &CouplingParams) -> Result<[BigRational; 5]> {
    let conv = |v: f64| {
        exact(v).ok_or_else(|| Error::SelectionFailed(format!("coefficient {v} is not finite")))
    };
    Ok([
        conv(params.a_plus)?,
        conv(params.a_minus)?,
        conv(params.b)?,
        conv(params.t_plus)?,
        conv(params.t_minus)?,
    ])
}

fn exact_c(p: &[BigRational; 5], branch: Branch, delta: &BigRational) -> [BigRational; 2] {
    let [ap, am, b, tp, tm] = p.clone();
    let d = ap.clone() * am.clone() - b.clone() * b.clone();
    let (cp, cm) = if branch.mixed() {
        ((am + b.clone()) / (d.clone() * tp), -(ap + b) / (d * tm))
    } else {
        ((am - b.clone()) / (d.clone() * tp), (ap - b) / (d * tm))
    };
    let s = BigRational::from_i64(branch.sign()) * delta.clone();
    [s.clone() * cp, s * cm]
}

/// Exact defect series of one envelope pair at `(δ, R)`.
pub fn defect_for(
    params: &CouplingParams,
    degrees: DegreePair,
    branch: Branch,
    delta: f64,
    r: f64,
) -> Result<DefectSeries<BigRational>> {
    let p = exact_params(params)?;
    let conv =
        |v: f64| exact(v).ok_or_else(|| Error::SelectionFailed(format!("{v} is not finite")));
    Ok(defect_exact(&p, degrees, branch, &conv(delta)?, &conv(r)?))
}

fn defect_exact(
    p: &[BigRational; 5],
    degrees: DegreePair,
    branch: Branch,
    delta: &BigRational,
    r: &BigRational,
) -> DefectSeries<BigRational> {
    let coeffs = EnvelopeCoeffs {
        a: Component::BOTH.map(|c| leading_coeff(p, degrees, c)),
        b: Component::BOTH.map(|c| second_coeff(p, degrees, c)),
        c: exact_c(p, branch, delta),
    };
    expand_defect_series(p, degrees, r, &coeffs)
}

/// Dominance of `M₆` over the higher coefficients plus the exact sign check of
/// the whole series on `s ∈ (0, 1]`.
fn certifies(m: &DefectSeries<BigRational>, branch: Branch) -> bool {
    let zero = BigRational::from_i64(0);
    let one = BigRational::from_i64(1);
    Component::BOTH.iter().all(|&c| {
        let m6 = m.m(c, 6).clone();
        let want_positive = branch.sides()[c.index()] == Side::Upper;
        if m6.is_zero() || m6.is_positive() != want_positive {
            return false;
        }
        let cap = |k: usize, div: i64| m.m(c, k).abs() * BigRational::from_i64(div) <= m6.abs();
        let dominated = [8, 10, 14, 16].iter().all(|&k| cap(k, 20)) && cap(12, 5) && cap(18, 5);
        dominated && sturm_roots_in(&m.reduced(c), &zero, &one) == 0
    })
}

fn candidates(budget: &SearchBudget) -> Vec<(u32, u32)> {
    budget
        .radii
        .iter()
        .flat_map(|&r| budget.delta_exponents.iter().map(move |&k| (r, k)))
        .collect()
}

fn dyadic(k: u32) -> (f64, BigRational) {
    let delta = BigRational::new(1.into(), num_bigint::BigInt::from(2).pow(k));
    (0.5f64.powi(k as i32), delta)
}

fn family_certifies(
    p: &[BigRational; 5],
    degrees: DegreePair,
    branch: Branch,
    k: u32,
    r: u32,
) -> bool {
    let (_, delta) = dyadic(k);
    let r = BigRational::from_i64(i64::from(r));
    [branch, branch.companion()]
        .iter()
        .all(|&b| certifies(&defect_exact(p, degrees, b, &delta, &r), b))
}

/// Searches `R` (outer) and dyadic `δ` (inner) for the first pair at which the
/// given branch and its companion are both certified.
pub fn select_envelope(
    params: &CouplingParams,
    degrees: DegreePair,
    branch: Branch,
) -> Result<EnvelopeSpec> {
    select_with_budget(params, degrees, branch, &SearchBudget::default())
}

pub fn select_with_budget(
    params: &CouplingParams,
    degrees: DegreePair,
    branch: Branch,
    budget: &SearchBudget,
) -> Result<EnvelopeSpec> {
    validate(*params)?;
    branch.check(params.b)?;
    let p = exact_params(params)?;
    for (r, k) in candidates(budget) {
        if family_certifies(&p, degrees, branch, k, r) {
            return Ok(EnvelopeSpec::new(params, dyadic(k).0, f64::from(r), branch));
        }
    }
    Err(Error::SelectionFailed(format!(
        "no (delta, R) among {} candidates certifies {}",
        budget.radii.len() * budget.delta_exponents.len(),
        branch.name()
    )))
}

/// One `(δ, R)` certified for every parameter set, each using the branch
/// family matching the sign of its `B`. Returns one spec per parameter set.
pub fn select_uniform(
    param_sets: &[CouplingParams],
    degrees: DegreePair,
) -> Result<Vec<EnvelopeSpec>> {
    let mut exact_sets = Vec::with_capacity(param_sets.len());
    for params in param_sets {
        validate(*params)?;
        exact_sets.push((exact_params(params)?, Branch::default_for(params.b)));
    }
    for (r, k) in candidates(&SearchBudget::default()) {
        let ok = batch::map(&exact_sets, |(p, branch)| {
            family_certifies(p, degrees, *branch, k, r)
        });
        if ok.iter().all(|&v| v) {
            return Ok(param_sets
                .iter()
                .map(|p| EnvelopeSpec::new(p, dyadic(k).0, f64::from(r), Branch::default_for(p.b)))
                .collect());
        }
    }
    Err(Error::SelectionFailed(format!(
        "no common (delta, R) for {} parameter sets",
        param_sets.len()
    )))
}

/// Envelope value `t + a/r² + b/r⁴ + c(R/r)⁶` of one component.
fn envelope_at(t: f64, a: f64, b: f64, c: f64, r_cut: f64, r: f64) -> f64 {
    let s = (r_cut / r) * (r_cut / r);
    t + a / (r * r) + b / r.powi(4) + c * s * s * s
}

/// `(lower, upper)` envelope values of a component at radius `r ≥ R`.
pub fn envelope_values(
    params: &CouplingParams,
    degrees: DegreePair,
    spec: &EnvelopeSpec,
    comp: Component,
    r: f64,
) -> (f64, f64) {
    let tail = second_coeffs(params, degrees);
    let (_, t, _) = params.component(comp);
    let mut lower = f64::NAN;
    let mut upper = f64::NAN;
    for branch in [spec.branch, spec.branch.companion()] {
        let c = spec.c(branch)[comp.index()];
        let w = envelope_at(t, tail.a(comp), tail.b(comp), c, spec.r, r);
        match spec.side(branch, comp) {
            Side::Upper => upper = w,
            Side::Lower => lower = w,
        }
    }
    (lower, upper)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeCheck {
    pub pass: bool,
    /// Smallest of `w̄ - f` and `f - w̲` over all nodes `r ≥ R`.
    pub worst_margin: f64,
    pub worst_node: usize,
    pub worst_component: Component,
    pub worst_side: Side,
}

/// Checks `w̲± ≤ f± ≤ w̄±` at every node `r ≥ spec.R`.
pub fn envelope_check(profile: &Profile, spec: &EnvelopeSpec) -> Result<EnvelopeCheck> {
    profile.check_lengths()?;
    if spec.r > profile.grid.r_max() {
        return Err(Error::SelectionFailed(format!(
            "envelope radius {} exceeds R_max = {}",
            spec.r,
            profile.grid.r_max()
        )));
    }
    let r = profile.grid.nodes();
    let start = r.partition_point(|&x| x < spec.r);
    let mut worst = EnvelopeCheck {
        pass: true,
        worst_margin: f64::INFINITY,
        worst_node: start,
        worst_component: Component::Plus,
        worst_side: Side::Upper,
    };
    for comp in Component::BOTH {
        let f = profile.component(comp);
        for i in start..r.len() {
            let (lo, hi) = envelope_values(&profile.params, profile.degrees, spec, comp, r[i]);
            for (side, margin) in [(Side::Upper, hi - f[i]), (Side::Lower, f[i] - lo)] {
                if margin < worst.worst_margin {
                    worst = EnvelopeCheck {
                        pass: true,
                        worst_margin: margin,
                        worst_node: i,
                        worst_component: comp,
                        worst_side: side,
                    };
                }
            }
        }
    }
    worst.pass = worst.worst_margin >= 0.0;
    Ok(worst)
}
