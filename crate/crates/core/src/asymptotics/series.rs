//! Exact expansion of the equation's left-hand side applied to an envelope
//! candidate `w = t + a/r² + b/r⁴ + c(R/r)⁶`, in the variable `s = (R/r)²`.

use num_rational::BigRational;

use super::poly::Poly;
use super::scalar::{fraction_string, Scalar};
use super::sides;
use crate::model::{Component, DegreePair};

/// Per-component tail data of an envelope pair, indexed by `Component::index`.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeCoeffs<T> {
    pub a: [T; 2],
    pub b: [T; 2],
    pub c: [T; 2],
}

/// `M_{2k}` for `k = 1..=9`, stored at index `k - 1`, per component.
#[derive(Debug, Clone, PartialEq)]
pub struct DefectSeries<T> {
    pub plus: [T; 9],
    pub minus: [T; 9],
}

impl<T: Scalar> DefectSeries<T> {
    pub fn get(&self, c: Component) -> &[T; 9] {
        match c {
            Component::Plus => &self.plus,
            Component::Minus => &self.minus,
        }
    }

    /// `M_{2k}` of one component.
    pub fn m(&self, c: Component, two_k: usize) -> &T {
        assert!(two_k.is_multiple_of(2) && (2..=18).contains(&two_k));
        &self.get(c)[two_k / 2 - 1]
    }

    /// The defect divided by `s³`, whose sign on `(0, 1]` decides the envelope.
    pub fn reduced(&self, c: Component) -> Poly<T> {
        Poly::new(self.get(c)[2..].to_vec())
    }
}

impl DefectSeries<BigRational> {
    pub fn to_f64(&self) -> DefectSeries<f64> {
        DefectSeries {
            plus: self.plus.clone().map(|v| v.to_f64()),
            minus: self.minus.clone().map(|v| v.to_f64()),
        }
    }

    /// Coefficients as `"p/q"` strings keyed `M2`..`M18`.
    pub fn fraction_strings(&self, c: Component) -> Vec<(String, String)> {
        self.get(c)
            .iter()
            .enumerate()
            .map(|(i, v)| (format!("M{}", 2 * (i + 1)), fraction_string(v)))
            .collect()
    }
}

fn envelope_poly<T: Scalar>(t: &T, a: &T, b: &T, c: &T, r: &T) -> Poly<T> {
    let r2 = r.clone() * r.clone();
    Poly::new(vec![
        t.clone(),
        a.clone() / r2.clone(),
        b.clone() / (r2.clone() * r2),
        c.clone(),
    ])
}

fn component_defect<T: Scalar>(
    params: &[T; 5],
    degrees: DegreePair,
    r: &T,
    coeffs: &EnvelopeCoeffs<T>,
    comp: Component,
) -> Poly<T> {
    let s = sides(params, degrees, comp);
    let (i, o) = (comp.index(), comp.partner().index());
    let w = envelope_poly(&s.t_s, &coeffs.a[i], &coeffs.b[i], &coeffs.c[i], r);
    let wo = envelope_poly(&s.t_o, &coeffs.a[o], &coeffs.b[o], &coeffs.c[o], r);
    let r2 = r.clone() * r.clone();

    // -w'' - w'/r maps the s^k term (∝ r^{-2k}) to -4k² s^{k+1} / R².
    let lap = Poly::new(
        (0..w.0.len())
            .map(|k| w.coeff(k) * T::from_i64(-4 * (k * k) as i64) / r2.clone())
            .collect(),
    )
    .shift(1);
    let centrifugal = w.shift(1).scale(&(s.n_s.clone() * s.n_s.clone() / r2));
    let sq = |p: &Poly<T>, t: &T| p.mul(p).add(&Poly::new(vec![-(t.clone() * t.clone())]));
    let potential = sq(&w, &s.t_s)
        .scale(&s.a_s)
        .add(&sq(&wo, &s.t_o).scale(&s.b));
    lap.add(&centrifugal).add(&potential.mul(&w))
}

/// Expands the defect of the envelope pair `(w₊, w₋)` with cutoff radius `r`.
pub fn expand_defect_series<T: Scalar>(
    params: &[T; 5],
    degrees: DegreePair,
    r: &T,
    coeffs: &EnvelopeCoeffs<T>,
) -> DefectSeries<T> {
    let pick = |comp| {
        let p = component_defect(params, degrees, r, coeffs, comp);
        debug_assert!(p.coeff(0).is_zero());
        debug_assert!(p.degree().is_none_or(|d| d <= 9));
        std::array::from_fn(|k| p.coeff(k + 1))
    };
    DefectSeries {
        plus: pick(Component::Plus),
        minus: pick(Component::Minus),
    }
}
