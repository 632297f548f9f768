//! Coefficients of the coupled system, degree pairs, the a priori amplitude
//! bound and the mapping from two-species condensate parameters.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The five coefficients `(A₊, A₋, B, t₊, t₋)` of the coupled system
///
/// ```text
/// -Δψ± + [A±(|ψ±|² - t±²) + B(|ψ∓|² - t∓²)] ψ± = 0.
/// ```
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingParams {
    #[serde(rename = "A_plus")]
    pub a_plus: f64,
    #[serde(rename = "A_minus")]
    pub a_minus: f64,
    #[serde(rename = "B")]
    pub b: f64,
    pub t_plus: f64,
    pub t_minus: f64,
}

impl CouplingParams {
    pub fn new(a_plus: f64, a_minus: f64, b: f64, t_plus: f64, t_minus: f64) -> Self {
        Self {
            a_plus,
            a_minus,
            b,
            t_plus,
            t_minus,
        }
    }

    /// Same coefficients with a different interaction `B`.
    pub fn with_coupling(self, b: f64) -> Self {
        Self { b, ..self }
    }

    /// `A₊A₋ - B²`, positive under the standing hypothesis.
    pub fn discriminant(&self) -> f64 {
        self.a_plus * self.a_minus - self.b * self.b
    }

    /// Self coefficient, limit value, partner limit value for one component.
    pub fn component(&self, c: Component) -> (f64, f64, f64) {
        match c {
            Component::Plus => (self.a_plus, self.t_plus, self.t_minus),
            Component::Minus => (self.a_minus, self.t_minus, self.t_plus),
        }
    }
}

/// Which of the two order-parameter components.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Component {
    Plus,
    Minus,
}

impl Component {
    pub const BOTH: [Component; 2] = [Component::Plus, Component::Minus];

    pub fn partner(self) -> Self {
        match self {
            Component::Plus => Component::Minus,
            Component::Minus => Component::Plus,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Component::Plus => 0,
            Component::Minus => 1,
        }
    }
}

/// Checks `A± > 0`, `t± > 0` and the strict inequality `B² < A₊A₋`.
pub fn validate(params: CouplingParams) -> Result<CouplingParams> {
    let CouplingParams {
        a_plus,
        a_minus,
        b,
        t_plus,
        t_minus,
    } = params;
    let fields = [a_plus, a_minus, b, t_plus, t_minus];
    if fields.iter().any(|v| !v.is_finite()) {
        return Err(Error::HypothesisViolation(
            "all coefficients must be finite".into(),
        ));
    }
    let positive = [
        ("A_plus > 0", a_plus),
        ("A_minus > 0", a_minus),
        ("t_plus > 0", t_plus),
        ("t_minus > 0", t_minus),
    ];
    for (name, v) in positive {
        if v <= 0.0 {
            return Err(Error::HypothesisViolation(format!("{name} fails ({v})")));
        }
    }
    if b * b >= a_plus * a_minus {
        return Err(Error::HypothesisViolation(format!(
            "B^2 < A_plus*A_minus fails ({} >= {})",
            b * b,
            a_plus * a_minus
        )));
    }
    Ok(params)
}

/// Winding numbers of the two components, normalized to be nonnegative.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DegreePair {
    pub n_plus: u32,
    pub n_minus: u32,
}

impl DegreePair {
    pub fn new(n_plus: u32, n_minus: u32) -> Self {
        Self { n_plus, n_minus }
    }

    pub fn get(&self, c: Component) -> u32 {
        match c {
            Component::Plus => self.n_plus,
            Component::Minus => self.n_minus,
        }
    }
}

// Degrees travel as a two-element array `[n_plus, n_minus]` in JSON.
impl Serialize for DegreePair {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        [self.n_plus, self.n_minus].serialize(s)
    }
}

impl<'de> Deserialize<'de> for DegreePair {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let [p, m] = <[u32; 2]>::deserialize(d)?;
        Ok(DegreePair::new(p, m))
    }
}

/// Which components were complex-conjugated to make the degrees nonnegative.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConjugationFlags {
    pub plus: bool,
    pub minus: bool,
}

/// Takes absolute values of the degrees; conjugating a component flips the
/// sign of its winding number without changing the radial profile.
pub fn normalize_degrees(n_plus: i64, n_minus: i64) -> (DegreePair, ConjugationFlags) {
    let flags = ConjugationFlags {
        plus: n_plus < 0,
        minus: n_minus < 0,
    };
    (
        DegreePair::new(n_plus.unsigned_abs() as u32, n_minus.unsigned_abs() as u32),
        flags,
    )
}

/// Quantities entering the a priori amplitude bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedBounds {
    /// Smallest eigenvalue of `[[A₊, B], [B, A₋]]`.
    pub lambda_s: f64,
    /// `max{A₊t₊² + Bt₋², A₋t₋² + Bt₊²}`.
    pub m: f64,
    /// `min{2M/λ_s, t₊² + t₋²}`, the bound on `f₊² + f₋²`.
    pub lambda_sq: f64,
}

pub fn smallest_coupling_eigenvalue(params: &CouplingParams) -> f64 {
    let CouplingParams {
        a_plus, a_minus, b, ..
    } = *params;
    let diff = a_plus - a_minus;
    0.5 * (a_plus + a_minus - (diff * diff + 4.0 * b * b).sqrt())
}

pub fn derived_bounds(params: &CouplingParams) -> DerivedBounds {
    let CouplingParams {
        a_plus,
        a_minus,
        b,
        t_plus,
        t_minus,
    } = *params;
    let lambda_s = smallest_coupling_eigenvalue(params);
    let (tp2, tm2) = (t_plus * t_plus, t_minus * t_minus);
    let m = (a_plus * tp2 + b * tm2).max(a_minus * tm2 + b * tp2);
    let lambda_sq = (2.0 * m / lambda_s).min(tp2 + tm2);
    DerivedBounds {
        lambda_s,
        m,
        lambda_sq,
    }
}

/// Two-species condensate parameters: masses, intra/inter-species couplings,
/// chemical potentials and the action scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BecParams {
    pub m1: f64,
    pub m2: f64,
    pub g1: f64,
    pub g2: f64,
    pub g12: f64,
    pub mu1: f64,
    pub mu2: f64,
    pub hbar: f64,
}

/// Rescales `ψ₊ = (m₂/m₁)^{1/4} u₁`, `ψ₋ = (m₁/m₂)^{1/4} u₂` and returns the
/// coupled-system coefficients together with the length scale `ε`, where
/// `ε² = ħ²/√(m₁m₂)`.
pub fn bec_to_gl(bec: &BecParams) -> Result<(CouplingParams, f64)> {
    let BecParams {
        m1,
        m2,
        g1,
        g2,
        g12,
        mu1,
        mu2,
        hbar,
    } = *bec;
    if !(m1 > 0.0 && m2 > 0.0) {
        return Err(Error::HypothesisViolation("masses must be positive".into()));
    }
    let det = g1 * g2 - g12 * g12;
    if !(det > 0.0) {
        return Err(Error::HypothesisViolation(format!(
            "g1*g2 - g12^2 > 0 fails ({det})"
        )));
    }
    let ratio = (m2 / m1).sqrt();
    let tp2 = (mu1 * g2 - mu2 * g12) / det * ratio;
    let tm2 = (mu2 * g1 - mu1 * g12) / det / ratio;
    if !(tp2 > 0.0) {
        return Err(Error::NonPositiveDensity(format!("t_plus^2 = {tp2}")));
    }
    if !(tm2 > 0.0) {
        return Err(Error::NonPositiveDensity(format!("t_minus^2 = {tm2}")));
    }
    let params = CouplingParams {
        a_plus: m1 / m2 * g1,
        a_minus: m2 / m1 * g2,
        b: g12,
        t_plus: tp2.sqrt(),
        t_minus: tm2.sqrt(),
    };
    let eps = hbar / (m1 * m2).sqrt().sqrt();
    Ok((validate(params)?, eps))
}
