//! Dense univariate polynomials with a Sturm root count.

use super::scalar::Scalar;

/// Coefficients in increasing degree; trailing zeros are trimmed.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly<T>(pub Vec<T>);

impl<T: Scalar> Poly<T> {
    pub fn new(mut coeffs: Vec<T>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Poly(coeffs)
    }

    pub fn zero() -> Self {
        Poly(Vec::new())
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// Degree, with the zero polynomial reported as `None`.
    pub fn degree(&self) -> Option<usize> {
        self.0.len().checked_sub(1)
    }

    pub fn coeff(&self, k: usize) -> T {
        self.0.get(k).cloned().unwrap_or_else(T::zero)
    }

    pub fn eval(&self, x: &T) -> T {
        self.0
            .iter()
            .rev()
            .fold(T::zero(), |acc, c| acc * x.clone() + c.clone())
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.0.len().max(other.0.len());
        Poly::new((0..n).map(|k| self.coeff(k) + other.coeff(k)).collect())
    }

    pub fn scale(&self, s: &T) -> Self {
        Poly::new(self.0.iter().map(|c| c.clone() * s.clone()).collect())
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![T::zero(); self.0.len() + other.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in other.0.iter().enumerate() {
                out[i + j] = out[i + j].clone() + a.clone() * b.clone();
            }
        }
        Poly::new(out)
    }

    /// Multiplication by `x^k`.
    pub fn shift(&self, k: usize) -> Self {
        if self.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![T::zero(); k];
        out.extend(self.0.iter().cloned());
        Poly(out)
    }

    pub fn derivative(&self) -> Self {
        Poly::new(
            self.0
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c.clone() * T::from_i64(k as i64))
                .collect(),
        )
    }

    /// Remainder of division by a nonzero `d`.
    pub fn rem(&self, d: &Self) -> Self {
        let dd = d.degree().expect("division by the zero polynomial");
        let lead = d.0[dd].clone();
        let mut r = self.0.clone();
        while r.len() > dd {
            let top = r.len() - 1;
            let q = r[top].clone() / lead.clone();
            for (j, c) in d.0.iter().enumerate() {
                let idx = top - dd + j;
                r[idx] = r[idx].clone() - q.clone() * c.clone();
            }
            r.pop();
            while r.last().is_some_and(|c| c.is_zero()) {
                r.pop();
            }
        }
        Poly::new(r)
    }

    pub fn sturm_sequence(&self) -> Vec<Self> {
        let mut seq = vec![self.clone(), self.derivative()];
        while let Some(last) = seq.last() {
            if last.degree().is_none_or(|d| d == 0) {
                break;
            }
            let prev = &seq[seq.len() - 2];
            let r = prev.rem(last).scale(&(-T::one()));
            if r.is_zero() {
                break;
            }
            seq.push(r);
        }
        seq
    }
}

fn sign_changes<T: Scalar>(seq: &[Poly<T>], x: &T) -> usize {
    let signs: Vec<bool> = seq
        .iter()
        .map(|p| p.eval(x))
        .filter(|v| !v.is_zero())
        .map(|v| v.is_positive())
        .collect();
    signs.windows(2).filter(|w| w[0] != w[1]).count()
}

/// Number of distinct real roots in `(lo, hi]`; requires `p(lo) ≠ 0`.
pub fn sturm_roots_in<T: Scalar>(p: &Poly<T>, lo: &T, hi: &T) -> usize {
    assert!(!p.eval(lo).is_zero(), "Sturm count needs p(lo) != 0");
    let seq = p.sturm_sequence();
    sign_changes(&seq, lo) - sign_changes(&seq, hi)
}
