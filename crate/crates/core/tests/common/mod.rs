//! Independent scalar oracle for `-f'' - f'/r + n²f/r² + (f² - 1)f = 0`,
//! `f(0) = 0`, `f → 1`: shooting from a power series at the origin, matched to
//! the large-`r` inverse-power series.

#![allow(dead_code)]

/// Coefficients `c_m` of `f = 1 + Σ_{m≥1} c_m r^{-2m}`, found by equating
/// powers of `r^{-2}`.
pub fn far_series(n: u32, terms: usize) -> Vec<f64> {
    let n2 = f64::from(n * n);
    // c[0] stands for the constant 1 in front of the series.
    let mut c = vec![1.0];
    for m in 1..=terms {
        let k = (m - 1) as f64;
        let g = |j: usize| if j == 0 { 0.0 } else { c[j] };
        // Coefficient of s^m in 3g² + g³, g = Σ_{j≥1} c_j s^j.
        let mut quad = 0.0;
        for i in 1..m {
            quad += g(i) * g(m - i);
        }
        let mut cube = 0.0;
        for i in 1..m {
            for j in 1..m - i {
                cube += g(i) * g(j) * g(m - i - j);
            }
        }
        let lap = if m == 1 {
            n2
        } else {
            (n2 - 4.0 * k * k) * c[m - 1]
        };
        c.push(-(lap + 3.0 * quad + cube) / 2.0);
    }
    c
}

/// Optimally truncated far series and its `r`-derivative.
pub fn far_value(n: u32, r: f64) -> (f64, f64) {
    let c = far_series(n, 30);
    let s = 1.0 / (r * r);
    let (mut f, mut df) = (1.0, 0.0);
    let mut last = f64::INFINITY;
    for (m, cm) in c.iter().enumerate().skip(1) {
        let term = cm * s.powi(m as i32);
        if term.abs() >= last {
            break;
        }
        last = term.abs();
        f += term;
        df += -2.0 * m as f64 * term / r;
    }
    (f, df)
}

fn rhs(n2: f64, r: f64, y: [f64; 2]) -> [f64; 2] {
    let [f, p] = y;
    [p, -p / r + n2 * f / (r * r) + (f * f - 1.0) * f]
}

fn rk4(n2: f64, r: f64, h: f64, y: [f64; 2]) -> [f64; 2] {
    let add = |y: [f64; 2], k: [f64; 2], s: f64| [y[0] + s * k[0], y[1] + s * k[1]];
    let k1 = rhs(n2, r, y);
    let k2 = rhs(n2, r + h / 2.0, add(y, k1, h / 2.0));
    let k3 = rhs(n2, r + h / 2.0, add(y, k2, h / 2.0));
    let k4 = rhs(n2, r + h, add(y, k3, h));
    [
        y[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        y[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
    ]
}

enum Shot {
    TooBig,
    TooSmall,
    Reached(Vec<f64>),
}

/// Integrates from `r = h` with `f ≈ c rⁿ(1 - r²/(4(n+1)))` up to `r_m`.
fn shoot(n: u32, c: f64, h: f64, steps: usize) -> Shot {
    let nf = f64::from(n);
    let n2 = nf * nf;
    let alpha = -1.0 / (4.0 * (nf + 1.0));
    let mut y = [
        c * h.powi(n as i32) * (1.0 + alpha * h * h),
        c * (nf * h.powi(n as i32 - 1) + (nf + 2.0) * alpha * h.powi(n as i32 + 1)),
    ];
    let mut out = Vec::with_capacity(steps + 1);
    out.push(0.0);
    out.push(y[0]);
    for i in 1..steps {
        y = rk4(n2, i as f64 * h, h, y);
        if y[0] > 1.0 + 1e-3 {
            return Shot::TooBig;
        }
        if y[1] < 0.0 || y[0] < 0.0 {
            return Shot::TooSmall;
        }
        out.push(y[0]);
    }
    Shot::Reached(out)
}

/// Oracle profile sampled at `r = i h`, `i = 0..=r_max/h`. The shot is
/// bisected on `c` until `f(r_m)` meets the far series, which takes over
/// beyond `r_m`.
pub struct ScalarOracle {
    pub h: f64,
    /// Shooting coefficient `c` in `f ≈ c rⁿ` at the origin.
    pub core: f64,
    pub values: Vec<f64>,
}

impl ScalarOracle {
    pub fn solve(n: u32, h: f64, r_match: f64, r_max: f64) -> Self {
        let steps = (r_match / h).round() as usize;
        let target = far_value(n, steps as f64 * h).0;
        let (mut lo, mut hi) = (0.0, 10.0);
        let mut best = None;
        let mut core = f64::NAN;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid == lo || mid == hi {
                break;
            }
            match shoot(n, mid, h, steps) {
                Shot::TooBig => hi = mid,
                Shot::TooSmall => lo = mid,
                Shot::Reached(v) => {
                    if v[steps] > target {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                    best = Some(v);
                    core = mid;
                }
            }
        }
        let mut values = best.expect("no shot reached the matching radius");
        let total = (r_max / h).round() as usize;
        for i in steps + 1..=total {
            values.push(far_value(n, i as f64 * h).0);
        }
        Self { h, core, values }
    }

    /// Value at a multiple of `h`.
    pub fn at(&self, r: f64) -> f64 {
        let i = (r / self.h).round() as usize;
        assert!((i as f64 * self.h - r).abs() < 1e-9, "{r} is not a sample");
        self.values[i]
    }
}
