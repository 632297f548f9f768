//! Least-squares recovery of tail coefficients from a solved profile.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::TailExpansion;
use crate::error::{Error, Result};
use crate::model::Component;
use crate::solver::Profile;

pub const DEFAULT_FIT_WINDOW: (f64, f64) = (20.0, 60.0);
const MIN_WINDOW_NODES: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailFit {
    pub a_plus: f64,
    pub a_minus: f64,
    pub b_plus: f64,
    pub b_minus: f64,
    /// Largest fit residual times `r⁶`, per component.
    pub c1_plus: f64,
    pub c1_minus: f64,
    pub nodes: usize,
}

impl TailFit {
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

fn window_nodes(profile: &Profile, window: (f64, f64)) -> Result<Vec<usize>> {
    let (lo, hi) = window;
    let r = profile.grid.nodes();
    if !(lo > 0.0 && hi > lo && hi <= profile.grid.r_max()) {
        return Err(Error::IllConditionedFit(format!(
            "window [{lo}, {hi}] must satisfy 0 < r_lo < r_hi <= R_max = {}",
            profile.grid.r_max()
        )));
    }
    let idx: Vec<usize> = (0..r.len()).filter(|&i| r[i] >= lo && r[i] <= hi).collect();
    if idx.len() < MIN_WINDOW_NODES {
        return Err(Error::IllConditionedFit(format!(
            "window holds {} nodes, need at least {MIN_WINDOW_NODES}",
            idx.len()
        )));
    }
    Ok(idx)
}

/// Fits `(f - t)·r² = a + b·r⁻² + e·r⁻⁴` over the window by least squares.
/// The nuisance term `e` absorbs the `r⁻⁶` part of the tail, which otherwise
/// biases `b` by several percent on windows starting near `r = 20`. The `C₁`
/// estimate is measured against the two-term model `t + a/r² + b/r⁴`.
pub fn tail_fit(profile: &Profile, window: (f64, f64)) -> Result<TailFit> {
    profile.check_lengths()?;
    let idx = window_nodes(profile, window)?;
    let r = profile.grid.nodes();
    // Columns scaled by the largest s = r⁻² so they are of unit size.
    let s_max = r[idx[0]].powi(-2);
    let basis = DMatrix::from_fn(idx.len(), 3, |row, col| {
        (r[idx[row]].powi(-2) / s_max).powi(col as i32)
    });
    let svd = basis.svd(true, true);
    let (lo, hi) = svd
        .singular_values
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    if !(lo > 1e-10 * hi) {
        return Err(Error::IllConditionedFit(
            "basis functions are collinear on the window".into(),
        ));
    }
    let mut out = [(0.0, 0.0, 0.0); 2];
    for c in Component::BOTH {
        let f = profile.component(c);
        let (_, t, _) = profile.params.component(c);
        let first = idx[0];
        if (f[first] - t).abs() >= 0.1 * t {
            return Err(Error::IllConditionedFit(format!(
                "profile at r = {} is still {:.3} away from its limit",
                r[first],
                (f[first] - t).abs()
            )));
        }
        let ys = DVector::from_fn(idx.len(), |row, _| {
            let i = idx[row];
            (f[i] - t) * r[i] * r[i]
        });
        let coef = svd
            .solve(&ys, 0.0)
            .map_err(|e| Error::IllConditionedFit(e.to_string()))?;
        let a = coef[0];
        let b = coef[1] / s_max;
        let c1 = idx
            .iter()
            .map(|&i| {
                let ri = r[i];
                let model = t + a / (ri * ri) + b / ri.powi(4);
                (f[i] - model).abs() * ri.powi(6)
            })
            .fold(0.0, f64::max);
        out[c.index()] = (a, b, c1);
    }
    Ok(TailFit {
        a_plus: out[0].0,
        b_plus: out[0].1,
        c1_plus: out[0].2,
        a_minus: out[1].0,
        b_minus: out[1].1,
        c1_minus: out[1].2,
        nodes: idx.len(),
    })
}

/// Largest `|f±' + 2a±/r³|·r⁵` over the window, per component.
pub fn derivative_tail_check(
    profile: &Profile,
    tail: &TailExpansion,
    window: (f64, f64),
) -> Result<[f64; 2]> {
    profile.check_lengths()?;
    let idx = window_nodes(profile, window)?;
    let r = profile.grid.nodes();
    let mut out = [0.0; 2];
    for c in Component::BOTH {
        let f = profile.component(c);
        let a = tail.a(c);
        out[c.index()] = idx
            .iter()
            .map(|&i| {
                let d = profile.grid.derivative(f, i);
                (d + 2.0 * a / r[i].powi(3)).abs() * r[i].powi(5)
            })
            .fold(0.0, f64::max);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_grid, GridSpec};
    use crate::model::{CouplingParams, DegreePair};
    use crate::solver::{FarField, SolveReport};

    fn synthetic(a: [f64; 2], b: [f64; 2], t: [f64; 2]) -> Profile {
        synthetic_with(a, b, [0.0; 2], t)
    }

    fn synthetic_with(a: [f64; 2], b: [f64; 2], e: [f64; 2], t: [f64; 2]) -> Profile {
        let grid = build_grid(GridSpec::uniform(80.0, 4000)).unwrap();
        let sample = |k: usize| {
            grid.nodes()
                .iter()
                .map(|&r| {
                    if r == 0.0 {
                        0.0
                    } else {
                        t[k] + a[k] / (r * r) + b[k] / r.powi(4) + e[k] / r.powi(6)
                    }
                })
                .collect::<Vec<f64>>()
        };
        Profile {
            params: CouplingParams::new(1.0, 1.0, 0.0, t[0], t[1]),
            degrees: DegreePair::new(1, 1),
            f_plus: sample(0),
            f_minus: sample(1),
            grid,
            report: SolveReport {
                iterations: vec![],
                residual: 0.0,
                tolerance: 1e-10,
                converged: true,
                wall_time_s: 0.0,
                far_field: FarField::Robin,
            },
        }
    }

    #[test]
    fn recovers_exact_tail() {
        let p = synthetic([-0.5, 0.3], [-1.125, 2.0], [1.0, 0.7]);
        let fit = tail_fit(&p, DEFAULT_FIT_WINDOW).unwrap();
        assert!((fit.a_plus + 0.5).abs() < 1e-10);
        assert!((fit.b_plus + 1.125).abs() < 1e-10);
        assert!((fit.a_minus - 0.3).abs() < 1e-10);
        assert!((fit.b_minus - 2.0).abs() < 1e-10);
        assert!(fit.c1_plus < 1e-4);
        assert_eq!(fit.nodes, 2001);
    }

    #[test]
    fn sixth_order_term_does_not_leak_into_b() {
        let p = synthetic_with([-0.5, 0.3], [-1.125, 2.0], [-10.0, 40.0], [1.0, 0.7]);
        let fit = tail_fit(&p, DEFAULT_FIT_WINDOW).unwrap();
        assert!((fit.b_plus + 1.125).abs() < 1e-8, "{}", fit.b_plus);
        assert!((fit.b_minus - 2.0).abs() < 1e-8, "{}", fit.b_minus);
        // C₁ sees the r⁻⁶ term the two-term model leaves out.
        assert!((fit.c1_minus - 40.0).abs() < 1e-4, "{}", fit.c1_minus);
    }

    #[test]
    fn rejects_bad_windows() {
        let p = synthetic([-0.5, 0.3], [-1.125, 2.0], [1.0, 0.7]);
        for w in [(20.0, 20.1), (0.0, 60.0), (20.0, 90.0), (0.4, 60.0)] {
            assert!(
                matches!(tail_fit(&p, w), Err(Error::IllConditionedFit(_))),
                "{w:?}"
            );
        }
    }

    #[test]
    fn derivative_constant_of_exact_tail() {
        let p = synthetic([-0.5, 0.3], [-1.125, 2.0], [1.0, 0.7]);
        let tail = TailExpansion {
            a_plus: -0.5,
            a_minus: 0.3,
            b_plus: 0.0,
            b_minus: 0.0,
        };
        let c2 = derivative_tail_check(&p, &tail, DEFAULT_FIT_WINDOW).unwrap();
        assert!((c2[0] - 4.5).abs() < 1e-3, "{}", c2[0]);
        assert!((c2[1] - 8.0).abs() < 1e-3, "{}", c2[1]);
    }

    #[test]
    fn flat_profile_has_zero_derivative_constant() {
        let p = synthetic([0.0; 2], [0.0; 2], [1.0, 1.0]);
        let tail = TailExpansion {
            a_plus: 0.0,
            a_minus: 0.0,
            b_plus: 0.0,
            b_minus: 0.0,
        };
        assert_eq!(
            derivative_tail_check(&p, &tail, DEFAULT_FIT_WINDOW).unwrap(),
            [0.0, 0.0]
        );
    }
}
