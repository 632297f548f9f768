//! Radial meshes on `[0, R_max]`, quadrature for `∫ g(r) r dr`, and the
//! discrete operator `-(1/r)(r u')' + (n²/r²) u`.
//!
//! Everything is built on dual cells: node `i` owns `[m_{i-1/2}, m_{i+1/2}]`
//! where `m` are the midpoints between nodes (with `m_{-1/2} = 0` and
//! `m_{N+1/2} = R_max`). Quadrature weights are the exact `∫ r dr` over the
//! dual cell and the operator is the flux balance over it, so `W·L` is
//! symmetric when `W = diag(weights)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_R_MAX: f64 = 80.0;
pub const DEFAULT_N: usize = 4000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridKind {
    Uniform,
    Geometric,
}

/// Serialized form of a grid; nodes regenerate deterministically from it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(rename = "R_max")]
    pub r_max: f64,
    #[serde(rename = "N")]
    pub n: usize,
    pub kind: GridKind,
    /// Ratio of consecutive cell widths, geometric grids only.
    #[serde(default)]
    pub stretch: Option<f64>,
}

impl GridSpec {
    pub fn uniform(r_max: f64, n: usize) -> Self {
        Self {
            r_max,
            n,
            kind: GridKind::Uniform,
            stretch: None,
        }
    }

    pub fn geometric(r_max: f64, n: usize, stretch: f64) -> Self {
        Self {
            r_max,
            n,
            kind: GridKind::Geometric,
            stretch: Some(stretch),
        }
    }
}

impl Default for GridSpec {
    fn default() -> Self {
        Self::uniform(DEFAULT_R_MAX, DEFAULT_N)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridSpec", into = "GridSpec")]
pub struct RadialGrid {
    spec: GridSpec,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl TryFrom<GridSpec> for RadialGrid {
    type Error = Error;

    fn try_from(spec: GridSpec) -> Result<Self> {
        build_grid(spec)
    }
}

impl From<RadialGrid> for GridSpec {
    fn from(g: RadialGrid) -> Self {
        g.spec
    }
}

pub fn build_grid(spec: GridSpec) -> Result<RadialGrid> {
    let GridSpec { r_max, n, kind, .. } = spec;
    if !(r_max.is_finite() && r_max > 0.0) {
        return Err(Error::BadGridSpec(format!(
            "R_max must be positive, got {r_max}"
        )));
    }
    if n < 16 {
        return Err(Error::BadGridSpec(format!(
            "N must be at least 16, got {n}"
        )));
    }
    let nodes: Vec<f64> = match kind {
        GridKind::Uniform => {
            if spec.stretch.is_some() {
                return Err(Error::BadGridSpec("uniform grids take no stretch".into()));
            }
            let h = r_max / n as f64;
            (0..=n)
                .map(|i| if i == n { r_max } else { i as f64 * h })
                .collect()
        }
        GridKind::Geometric => {
            let q = spec
                .stretch
                .ok_or_else(|| Error::BadGridSpec("geometric grid needs a stretch".into()))?;
            if !(q > 1.0 && q <= 1.1) {
                return Err(Error::BadGridSpec(format!(
                    "stretch must lie in (1, 1.1], got {q}"
                )));
            }
            let first = r_max * (q - 1.0) / (q.powi(n as i32) - 1.0);
            if !(first > 0.0) {
                return Err(Error::BadGridSpec("first cell width underflows".into()));
            }
            let mut nodes = Vec::with_capacity(n + 1);
            let (mut r, mut h) = (0.0, first);
            nodes.push(0.0);
            for _ in 1..n {
                r += h;
                h *= q;
                nodes.push(r);
            }
            nodes.push(r_max);
            nodes
        }
    };
    if nodes.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::BadGridSpec(
            "nodes are not strictly increasing".into(),
        ));
    }
    let weights = dual_weights(&nodes);
    Ok(RadialGrid {
        spec,
        nodes,
        weights,
    })
}

fn dual_weights(nodes: &[f64]) -> Vec<f64> {
    let n = nodes.len() - 1;
    let mid = |i: usize| 0.5 * (nodes[i] + nodes[i + 1]);
    (0..=n)
        .map(|i| {
            let lo = if i == 0 { 0.0 } else { mid(i - 1) };
            let hi = if i == n { nodes[n] } else { mid(i) };
            0.5 * (hi - lo) * (hi + lo)
        })
        .collect()
}

impl RadialGrid {
    pub fn spec(&self) -> GridSpec {
        self.spec
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Number of cells; there are `n() + 1` nodes.
    pub fn n(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn r_max(&self) -> f64 {
        self.nodes[self.n()]
    }

    /// Midpoint between nodes `i` and `i + 1`.
    pub fn midpoint(&self, i: usize) -> f64 {
        0.5 * (self.nodes[i] + self.nodes[i + 1])
    }

    pub fn cell_width(&self, i: usize) -> f64 {
        self.nodes[i + 1] - self.nodes[i]
    }

    /// Index of the node closest to `r`.
    pub fn nearest_node(&self, r: f64) -> usize {
        match self
            .nodes
            .binary_search_by(|x| x.partial_cmp(&r).expect("grid nodes are finite"))
        {
            Ok(i) => i,
            Err(0) => 0,
            Err(i) if i > self.n() => self.n(),
            Err(i) => {
                if r - self.nodes[i - 1] <= self.nodes[i] - r {
                    i - 1
                } else {
                    i
                }
            }
        }
    }

    /// Quadrature weights for `∫₀^{r_k} g r dr`: the full weights below `k`
    /// and the half dual cell at `k`.
    pub fn partial_weights(&self, k: usize) -> impl Iterator<Item = f64> + '_ {
        (0..=k).map(move |i| {
            if i < k {
                self.weights[i]
            } else if k == 0 {
                0.0
            } else {
                let lo = self.midpoint(k - 1);
                let hi = self.nodes[k];
                0.5 * (hi - lo) * (hi + lo)
            }
        })
    }

    /// Central (interior) or one-sided second-order (end) derivative at node `i`.
    pub fn derivative(&self, u: &[f64], i: usize) -> f64 {
        let r = &self.nodes;
        let n = self.n();
        let (a, b, c) = if i == 0 {
            (0, 1, 2)
        } else if i == n {
            (n - 2, n - 1, n)
        } else {
            (i - 1, i, i + 1)
        };
        // Derivative of the quadratic interpolant in divided-difference form,
        // exact zero on constants.
        let x = r[i];
        let (xa, xb, xc) = (r[a], r[b], r[c]);
        let dab = (u[b] - u[a]) / (xb - xa);
        let dbc = (u[c] - u[b]) / (xc - xb);
        let dabc = (dbc - dab) / (xc - xa);
        dab + dabc * ((x - xa) + (x - xb))
    }
}

/// Approximates `∫₀^{R_max} g(r) r dr` from samples at the nodes.
pub fn quadrature(grid: &RadialGrid, samples: &[f64]) -> Result<f64> {
    if samples.len() != grid.len() {
        return Err(Error::LengthMismatch {
            expected: grid.len(),
            got: samples.len(),
        });
    }
    Ok(grid.weights.iter().zip(samples).map(|(w, g)| w * g).sum())
}

/// `∫₀^{r_k} g(r) r dr`.
pub fn quadrature_to(grid: &RadialGrid, samples: &[f64], k: usize) -> Result<f64> {
    if samples.len() != grid.len() {
        return Err(Error::LengthMismatch {
            expected: grid.len(),
            got: samples.len(),
        });
    }
    Ok(grid
        .partial_weights(k)
        .zip(samples)
        .map(|(w, g)| w * g)
        .sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BcZero {
    /// `u(0) = 0`, required when `n ≠ 0`.
    Dirichlet,
    /// `u'(0) = 0`, required when `n = 0`.
    Neumann,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BcFar {
    /// `u(R_max) = value`.
    Dirichlet(f64),
    /// `u'(R_max) = -2a/R_max³`, the slope of `t + a/r²`.
    Robin(f64),
}

impl BcZero {
    pub fn for_degree(n: u32) -> Self {
        if n == 0 {
            BcZero::Neumann
        } else {
            BcZero::Dirichlet
        }
    }
}

/// Tridiagonal strong-form rows of `-(1/r)(r u')' + (n²/r²) u` with boundary
/// rows folded in. Row `i` reads
/// `lower[i] u[i-1] + diag[i] u[i] + upper[i] u[i+1] - rhs[i]`, where
/// `diag = reaction - lower - upper`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialOperator {
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    pub upper: Vec<f64>,
    /// Zeroth-order part of each row: `n²/r²`, or 1 on value rows.
    pub reaction: Vec<f64>,
    pub rhs: Vec<f64>,
    pub degree: u32,
    pub bc_zero: BcZero,
    pub bc_far: BcFar,
}

pub fn radial_operator(
    grid: &RadialGrid,
    n: u32,
    bc_zero: BcZero,
    bc_far: BcFar,
) -> Result<RadialOperator> {
    match (n, bc_zero) {
        (0, BcZero::Dirichlet) => {
            return Err(Error::BadBoundarySpec(
                "degree 0 takes a Neumann condition at r = 0".into(),
            ))
        }
        (k, BcZero::Neumann) if k != 0 => {
            return Err(Error::BadBoundarySpec(format!(
                "degree {k} takes a Dirichlet condition at r = 0"
            )))
        }
        _ => {}
    }
    let len = grid.len();
    let last = grid.n();
    let r = grid.nodes();
    let w = grid.weights();
    let n2 = f64::from(n * n);
    let mut lower = vec![0.0; len];
    let mut diag = vec![0.0; len];
    let mut upper = vec![0.0; len];
    let mut reaction = vec![0.0; len];
    let mut rhs = vec![0.0; len];

    // Flux conductance across the face between nodes i and i+1.
    let face = |i: usize| grid.midpoint(i) / grid.cell_width(i);

    match bc_zero {
        BcZero::Dirichlet => {
            diag[0] = 1.0;
            reaction[0] = 1.0;
        }
        BcZero::Neumann => {
            let k = face(0) / w[0];
            diag[0] = k;
            upper[0] = -k;
        }
    }
    for i in 1..last {
        let (kl, kr) = (face(i - 1) / w[i], face(i) / w[i]);
        lower[i] = -kl;
        reaction[i] = n2 / (r[i] * r[i]);
        diag[i] = kl + kr + reaction[i];
        upper[i] = -kr;
    }
    match bc_far {
        BcFar::Dirichlet(value) => {
            diag[last] = 1.0;
            reaction[last] = 1.0;
            rhs[last] = value;
        }
        BcFar::Robin(a) => {
            let rm = r[last];
            let k = face(last - 1) / w[last];
            lower[last] = -k;
            reaction[last] = n2 / (rm * rm);
            diag[last] = k + reaction[last];
            // Prescribed outward flux R·u'(R) enters as data.
            let slope = -2.0 * a / (rm * rm * rm);
            rhs[last] = rm * slope / w[last];
        }
    }
    Ok(RadialOperator {
        lower,
        diag,
        upper,
        reaction,
        rhs,
        degree: n,
        bc_zero,
        bc_far,
    })
}

impl RadialOperator {
    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Row `i` applied to `u`, without the boundary data. Evaluated in flux
    /// form so constants give exactly zero where the reaction term vanishes.
    pub fn apply_row(&self, u: &[f64], i: usize) -> f64 {
        let mut acc = self.reaction[i] * u[i];
        if i > 0 {
            acc += self.lower[i] * (u[i - 1] - u[i]);
        }
        if i + 1 < u.len() {
            acc += self.upper[i] * (u[i + 1] - u[i]);
        }
        acc
    }

    /// `L u - rhs`.
    pub fn apply(&self, u: &[f64]) -> Result<Vec<f64>> {
        if u.len() != self.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                got: u.len(),
            });
        }
        Ok((0..u.len())
            .map(|i| self.apply_row(u, i) - self.rhs[i])
            .collect())
    }

    /// Whether row `i` is a Dirichlet (value) row.
    pub fn is_dirichlet_row(&self, i: usize) -> bool {
        (i == 0 && self.bc_zero == BcZero::Dirichlet)
            || (i + 1 == self.len() && matches!(self.bc_far, BcFar::Dirichlet(_)))
    }
}
