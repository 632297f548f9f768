//! Far-field behaviour: closed-form tail coefficients, the exact defect series
//! of envelope candidates, envelope selection and checks of solved profiles
//! against all of these.

mod envelope;
mod fit;
mod poly;
mod scalar;
mod series;

pub use envelope::{
    defect_for, envelope_check, envelope_values, select_envelope, select_uniform,
    select_with_budget, Branch, EnvelopeCheck, EnvelopeSpec, SearchBudget, Side,
};
pub use fit::{derivative_tail_check, tail_fit, TailFit, DEFAULT_FIT_WINDOW};
pub use poly::{sturm_roots_in, Poly};
pub use scalar::{exact, Scalar};
pub use series::{expand_defect_series, DefectSeries, EnvelopeCoeffs};

use serde::{Deserialize, Serialize};

use crate::model::{Component, CouplingParams, DegreePair};

/// Coefficients of `f± = t± + a±/r² + b±/r⁴ + O(r⁻⁶)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailExpansion {
    pub a_plus: f64,
    pub a_minus: f64,
    pub b_plus: f64,
    pub b_minus: f64,
}

impl TailExpansion {
    pub fn a(&self, c: Component) -> f64 {
        match c {
            Component::Plus => self.a_plus,
            Component::Minus => self.a_minus,
        }
    }

    pub fn b(&self, c: Component) -> f64 {
        match c {
            Component::Plus => self.b_plus,
            Component::Minus => self.b_minus,
        }
    }
}

/// Coefficient inputs in a generic field: `(A_self, A_other, B, t_self, t_other, n_self, n_other)`.
pub(crate) struct Sides<T> {
    pub a_s: T,
    pub a_o: T,
    pub b: T,
    pub t_s: T,
    pub t_o: T,
    pub n_s: T,
    pub n_o: T,
}

pub(crate) fn sides<T: Scalar>(p: &[T; 5], degrees: DegreePair, c: Component) -> Sides<T> {
    let [ap, am, b, tp, tm] = p.clone();
    let (np, nm) = (
        T::from_i64(degrees.n_plus as i64),
        T::from_i64(degrees.n_minus as i64),
    );
    match c {
        Component::Plus => Sides {
            a_s: ap,
            a_o: am,
            b,
            t_s: tp,
            t_o: tm,
            n_s: np,
            n_o: nm,
        },
        Component::Minus => Sides {
            a_s: am,
            a_o: ap,
            b,
            t_s: tm,
            t_o: tp,
            n_s: nm,
            n_o: np,
        },
    }
}

/// `a± = ½(Bn∓² − A∓n±²) / ((A₊A₋ − B²) t±)`.
pub fn leading_coeff<T: Scalar>(p: &[T; 5], degrees: DegreePair, c: Component) -> T {
    let s = sides(p, degrees, c);
    let d = s.a_s.clone() * s.a_o.clone() - s.b.clone() * s.b.clone();
    let num = s.b * s.n_o.clone() * s.n_o - s.a_o * s.n_s.clone() * s.n_s;
    num / (T::from_i64(2) * d * s.t_s)
}

/// Fourth-order tail coefficient, the value that cancels the `r⁻⁴` defect.
pub fn second_coeff<T: Scalar>(p: &[T; 5], degrees: DegreePair, c: Component) -> T {
    let s = sides(p, degrees, c);
    let k = |v: i64| T::from_i64(v);
    let sq = |x: &T| x.clone() * x.clone();
    let d = s.a_s.clone() * s.a_o.clone() - sq(&s.b);
    let (ns2, no2) = (sq(&s.n_s), sq(&s.n_o));
    let (ts2, to2) = (sq(&s.t_s), sq(&s.t_o));
    let num = sq(&s.a_o) * (k(8) * ns2.clone() + sq(&ns2)) * to2.clone()
        - s.b.clone() * s.a_o.clone() * (k(2) * ns2.clone() + k(8)) * no2.clone() * to2.clone()
        - k(8) * s.b.clone() * s.a_s.clone() * no2.clone() * ts2.clone()
        + sq(&s.b) * (k(8) * ns2 * ts2.clone() + sq(&no2) * to2.clone());
    -num / (k(8) * sq(&d) * ts2 * s.t_s * to2)
}

fn as_array(p: &CouplingParams) -> [f64; 5] {
    [p.a_plus, p.a_minus, p.b, p.t_plus, p.t_minus]
}

/// `a±` only; `b±` are left at zero.
pub fn leading_coeffs(params: &CouplingParams, degrees: DegreePair) -> TailExpansion {
    let p = as_array(params);
    TailExpansion {
        a_plus: leading_coeff(&p, degrees, Component::Plus),
        a_minus: leading_coeff(&p, degrees, Component::Minus),
        b_plus: 0.0,
        b_minus: 0.0,
    }
}

pub fn second_coeffs(params: &CouplingParams, degrees: DegreePair) -> TailExpansion {
    let p = as_array(params);
    TailExpansion {
        b_plus: second_coeff(&p, degrees, Component::Plus),
        b_minus: second_coeff(&p, degrees, Component::Minus),
        ..leading_coeffs(params, degrees)
    }
}

/// Solution of `A₊t₊c₊ + Bt₋c₋ = 1`, `Bt₊c₊ + A₋t₋c₋ = -1`.
pub fn c_tilde(params: &CouplingParams) -> (f64, f64) {
    let d = params.discriminant();
    (
        (params.a_minus + params.b) / (d * params.t_plus),
        -(params.a_plus + params.b) / (d * params.t_minus),
    )
}

/// Solution of `A₊t₊c₊ + Bt₋c₋ = 1`, `Bt₊c₊ + A₋t₋c₋ = 1`.
pub fn c_hat(params: &CouplingParams) -> (f64, f64) {
    let d = params.discriminant();
    (
        (params.a_minus - params.b) / (d * params.t_plus),
        (params.a_plus - params.b) / (d * params.t_minus),
    )
}
