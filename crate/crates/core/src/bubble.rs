//! The bubble family `W_{x̂,λ}` with `x̂ = (0, ẑ)`, its parameter derivatives
//! and the analytic Laplacian.
//!
//! Everything is evaluated through the cylindrical variables `r = |y|`,
//! `s = |z - ẑ|`, with `W = C λ^a Q^{-a}`, `Q = (1+λr)² + λ²s²`, `a = (N-2)/2`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{norm, Geometry, Point};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BubbleParams {
    pub zhat: Vec<f64>,
    pub lambda: f64,
}

impl BubbleParams {
    pub fn new(zhat: Vec<f64>, lambda: f64) -> Self {
        BubbleParams { zhat, lambda }
    }

    /// Centered at the origin.
    pub fn centered(h: usize, lambda: f64) -> Self {
        BubbleParams {
            zhat: vec![0.0; h],
            lambda,
        }
    }

    /// The concentration point `x̂ = (0, ẑ)`.
    pub fn center(&self, g: &Geometry) -> Point {
        Point::new(vec![0.0; g.k], self.zhat.clone())
    }

    pub fn validate(&self, g: &Geometry) -> Result<()> {
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(Error::Domain(format!("lambda must be positive, got {}", self.lambda)));
        }
        if self.zhat.len() != g.h {
            return Err(Error::Domain(format!(
                "zhat has length {}, expected h = {}",
                self.zhat.len(),
                g.h
            )));
        }
        if self.zhat.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("zhat must be finite".into()));
        }
        Ok(())
    }
}

/// `α(i)`: `+1` for the translation parameters `1..=h`, `-1` for `λ` (index `h+1`).
pub fn alpha(i: usize, g: &Geometry) -> Result<i32> {
    check_index(i, g)?;
    Ok(if i <= g.h { 1 } else { -1 })
}

fn check_index(i: usize, g: &Geometry) -> Result<()> {
    if i == 0 || i > g.h + 1 {
        return Err(Error::Domain(format!(
            "derivative index {i} outside 1..={}",
            g.h + 1
        )));
    }
    Ok(())
}

/// Cylindrical coordinates `(r, s)` of `x` relative to `x̂`.
pub fn cyl(x: &Point, p: &BubbleParams) -> (f64, f64) {
    let s = x
        .z
        .iter()
        .zip(&p.zhat)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    (norm(&x.y), s)
}

/// `W` as a function of `(r, s)`.
pub fn w_rs(r: f64, s: f64, lambda: f64, g: &Geometry) -> f64 {
    let a = g.half_exp();
    let q = (1.0 + lambda * r).powi(2) + (lambda * s).powi(2);
    g.c_nk() * lambda.powf(a) * q.powf(-a)
}

/// `∂W/∂r`.
pub fn w_r(r: f64, s: f64, lambda: f64, g: &Geometry) -> f64 {
    let a = g.half_exp();
    let q = (1.0 + lambda * r).powi(2) + (lambda * s).powi(2);
    -a * g.c_nk() * lambda.powf(a) * q.powf(-a - 1.0) * 2.0 * lambda * (1.0 + lambda * r)
}

/// `∂W/∂s`.
pub fn w_s(r: f64, s: f64, lambda: f64, g: &Geometry) -> f64 {
    s * w_s_over_s(r, s, lambda, g)
}

/// `(∂W/∂s)/s`, regular on the axis `s = 0`.
pub fn w_s_over_s(r: f64, s: f64, lambda: f64, g: &Geometry) -> f64 {
    let a = g.half_exp();
    let q = (1.0 + lambda * r).powi(2) + (lambda * s).powi(2);
    -a * g.c_nk() * lambda.powf(a + 2.0) * 2.0 * q.powf(-a - 1.0)
}

/// `∂W/∂λ`.
pub fn w_lambda(r: f64, s: f64, lambda: f64, g: &Geometry) -> f64 {
    let a = g.half_exp();
    let q = (1.0 + lambda * r).powi(2) + (lambda * s).powi(2);
    let dq = 2.0 * (1.0 + lambda * r) * r + 2.0 * lambda * s * s;
    g.c_nk() * lambda.powf(a) * q.powf(-a) * (a / lambda - a * dq / q)
}

/// `ψ₀ = ∂_λ W_{0,λ}|_{λ=1}` in cylindrical form.
pub fn psi0_rs(r: f64, s: f64, g: &Geometry) -> f64 {
    let a = g.half_exp();
    let q = (1.0 + r).powi(2) + s * s;
    g.c_nk() * a * q.powf(-a - 1.0) * (1.0 - r * r - s * s)
}

pub fn w_eval(x: &Point, p: &BubbleParams, g: &Geometry) -> f64 {
    let (r, s) = cyl(x, p);
    w_rs(r, s, p.lambda, g)
}

/// `Z_i = ∂W/∂ẑ_i` for `i <= h`, `∂W/∂λ` for `i = h+1`.
pub fn w_derivative(x: &Point, p: &BubbleParams, g: &Geometry, i: usize) -> Result<f64> {
    check_index(i, g)?;
    let (r, s) = cyl(x, p);
    if i <= g.h {
        // ∂/∂ẑ_i = -(z_i - ẑ_i)/s · ∂/∂s
        Ok(-(x.z[i - 1] - p.zhat[i - 1]) * w_s_over_s(r, s, p.lambda, g))
    } else {
        Ok(w_lambda(r, s, p.lambda, g))
    }
}

/// `ψ₀` for `which = 0`, `ψ_i = ∂W_{0,1}/∂ẑ_i` for `which = i ∈ 1..=h`.
pub fn psi_eval(x: &Point, g: &Geometry, which: usize) -> Result<f64> {
    if which > g.h {
        return Err(Error::Domain(format!("psi index {which} outside 0..={}", g.h)));
    }
    let p = BubbleParams::centered(g.h, 1.0);
    if which == 0 {
        w_derivative(x, &p, g, g.h + 1)
    } else {
        w_derivative(x, &p, g, which)
    }
}

/// Analytic `ΔW` in cylindrical variables (requires `r > 0`).
pub fn laplacian_rs(r: f64, s: f64, lambda: f64, g: &Geometry) -> f64 {
    let a = g.half_exp();
    let c = g.c_nk() * lambda.powf(a);
    let q = (1.0 + lambda * r).powi(2) + (lambda * s).powi(2);
    let qr = 2.0 * lambda * (1.0 + lambda * r);
    let qs = 2.0 * lambda * lambda * s;
    let q1 = q.powf(-a - 1.0);
    let q2 = q1 / q;
    let l2 = 2.0 * lambda * lambda;
    let wrr = c * (a * (a + 1.0) * q2 * qr * qr - a * q1 * l2);
    let wr = -a * c * q1 * qr;
    let wss = c * (a * (a + 1.0) * q2 * qs * qs - a * q1 * l2);
    let ws_over_s = -a * c * q1 * l2;
    let k = g.k as f64;
    let h = g.h as f64;
    wrr + (k - 1.0) / r * wr + wss + (h - 1.0) * ws_over_s
}

pub fn laplacian(x: &Point, p: &BubbleParams, g: &Geometry) -> Result<f64> {
    let (r, s) = cyl(x, p);
    if r == 0.0 {
        return Err(Error::Singular("Laplacian of W on the axis |y| = 0".into()));
    }
    Ok(laplacian_rs(r, s, p.lambda, g))
}

/// `-ΔW - W^{N/(N-2)}/|y|` with the analytic Laplacian.
pub fn pde_residual(x: &Point, p: &BubbleParams, g: &Geometry) -> Result<f64> {
    pde_residual_scaled(x, p, g, 1.0)
}

/// Residual of `u = c·W`: `-Δu - u^{N/(N-2)}/|y|`.
pub fn pde_residual_scaled(x: &Point, p: &BubbleParams, g: &Geometry, c: f64) -> Result<f64> {
    let r = x.y_norm();
    if r == 0.0 {
        return Err(Error::Singular("Hardy weight 1/|y| at |y| = 0".into()));
    }
    let lap = laplacian(x, p, g)?;
    let w = w_eval(x, p, g);
    Ok(-c * lap - (c * w).powf(g.power()) / r)
}

/// Natural length scale at `x` for difference quotients: the smaller of the
/// distance to the axis `y = 0` (where `W` has a kink) and the local bubble
/// scale `(1 + λ|x - x̂|)/λ`.
pub fn fd_scale(x: &Point, p: &BubbleParams, g: &Geometry) -> f64 {
    let d = x.dist(&p.center(g));
    let local = (1.0 + p.lambda * d) / p.lambda;
    let r = x.y_norm();
    if r > 0.0 {
        local.min(r)
    } else {
        local
    }
}

/// Step for [`fd_laplacian`] relative to [`fd_scale`]; near `ε^{1/6}`, which
/// balances fourth-order truncation against rounding.
pub const FD_REL_STEP: f64 = 2e-3;

/// Fourth-order central-difference Laplacian in all `N` Cartesian directions.
///
/// Far from the core `W` is nearly harmonic, so the Laplacian is a small
/// remainder of the second differences; a second-order stencil loses about
/// `λ|x - x̂|` in relative accuracy there.
pub fn fd_laplacian(x: &Point, p: &BubbleParams, g: &Geometry, step: f64) -> f64 {
    let w0 = w_eval(x, p, g);
    let at = |i: usize, k: f64| {
        let mut xs = x.clone();
        *xs.coord_mut(i) += k * step;
        w_eval(&xs, p, g)
    };
    let mut acc = 0.0;
    for i in 0..g.n {
        acc += -at(i, 2.0) + 16.0 * at(i, 1.0) - 30.0 * w0 + 16.0 * at(i, -1.0) - at(i, -2.0);
    }
    acc / (12.0 * step * step)
}

/// Central difference of `W` in the parameter `i` (`ẑ_i` or `λ`).
pub fn fd_derivative(x: &Point, p: &BubbleParams, g: &Geometry, i: usize, step: f64) -> Result<f64> {
    check_index(i, g)?;
    let mut pp = p.clone();
    let mut pm = p.clone();
    if i <= g.h {
        pp.zhat[i - 1] += step;
        pm.zhat[i - 1] -= step;
    } else {
        pp.lambda += step;
        pm.lambda -= step;
    }
    Ok((w_eval(x, &pp, g) - w_eval(x, &pm, g)) / (2.0 * step))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn g() -> Geometry {
        Geometry::new(6, 4, 2, 1, 10.0)
    }

    #[test]
    fn point_values() {
        let g = g();
        let o = g.origin();
        assert_relative_eq!(w_eval(&o, &BubbleParams::centered(2, 1.0), &g), 144.0);
        let x = Point::new(vec![1.0, 0.0, 0.0, 0.0], vec![0.0, 0.0]);
        assert_relative_eq!(w_eval(&x, &BubbleParams::centered(2, 1.0), &g), 9.0);
        assert_relative_eq!(
            w_eval(&o, &BubbleParams::centered(2, 10.0), &g),
            14400.0,
            max_relative = 1e-14
        );
    }

    #[test]
    fn derivative_values() {
        let g = g();
        let p = BubbleParams::new(vec![0.3, -0.2], 3.0);
        let x = Point::new(vec![0.1, 0.2, 0.0, 0.0], vec![0.3, -0.2]);
        assert_eq!(w_derivative(&x, &p, &g, 1).unwrap(), 0.0);
        assert_eq!(w_derivative(&x, &p, &g, 2).unwrap(), 0.0);
        let o = g.origin();
        for &lam in &[1.0, 2.5, 7.0] {
            let v = w_derivative(&o, &BubbleParams::centered(2, lam), &g, 3).unwrap();
            assert_relative_eq!(v, 288.0 * lam, max_relative = 1e-13);
        }
        assert!(w_derivative(&o, &p, &g, 0).is_err());
        assert!(w_derivative(&o, &p, &g, 4).is_err());
    }

    #[test]
    fn psi_values() {
        let g = g();
        let o = g.origin();
        assert_relative_eq!(psi_eval(&o, &g, 0).unwrap(), 288.0, max_relative = 1e-14);
        let x = Point::new(vec![0.4, 0.0, 0.1, 0.0], vec![0.0, 0.0]);
        assert_eq!(psi_eval(&x, &g, 1).unwrap(), 0.0);
        let x = Point::new(vec![0.4, 0.0, 0.1, 0.0], vec![0.7, 0.2]);
        let want = w_derivative(&x, &BubbleParams::centered(2, 1.0), &g, 3).unwrap();
        assert_eq!(psi_eval(&x, &g, 0).unwrap(), want);
        let (r, s) = cyl(&x, &BubbleParams::centered(2, 1.0));
        assert_relative_eq!(psi0_rs(r, s, &g), want, max_relative = 1e-12);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let g = g();
        let p = BubbleParams::new(vec![0.1, -0.05], 4.0);
        let x = Point::new(vec![0.2, -0.1, 0.05, 0.3], vec![0.4, 0.1]);
        let scale = fd_scale(&x, &p, &g);
        for i in 1..=3 {
            let step = if i <= 2 { 1e-5 * scale } else { 1e-5 * p.lambda };
            let an = w_derivative(&x, &p, &g, i).unwrap();
            let fd = fd_derivative(&x, &p, &g, i, step).unwrap();
            let mag = w_eval(&x, &p, &g) / scale;
            assert!((an - fd).abs() <= 1e-6 * mag.max(an.abs()), "i={i}: {an} vs {fd}");
        }
    }

    #[test]
    fn residual_of_exact_and_scaled_bubble() {
        let g = g();
        let p = BubbleParams::new(vec![0.2, 0.0], 5.0);
        let x = Point::new(vec![0.1, 0.05, -0.02, 0.0], vec![0.3, -0.1]);
        let w = w_eval(&x, &p, &g);
        let rhs = w.powf(1.5) / x.y_norm();
        assert!(pde_residual(&x, &p, &g).unwrap().abs() <= 1e-10 * rhs);
        let res = pde_residual_scaled(&x, &p, &g, 1.1).unwrap();
        assert_relative_eq!(res, (1.1 - 1.1f64.powf(1.5)) * rhs, max_relative = 1e-9);
        assert!(res < 0.0);
        let on_axis = Point::new(vec![0.0; 4], vec![0.3, -0.1]);
        assert!(pde_residual(&on_axis, &p, &g).is_err());
    }

    #[test]
    fn fd_laplacian_agrees() {
        let g = g();
        let p = BubbleParams::centered(2, 2.0);
        let x = Point::new(vec![0.3, 0.1, -0.2, 0.05], vec![0.1, 0.2]);
        let an = laplacian(&x, &p, &g).unwrap();
        let fd = fd_laplacian(&x, &p, &g, FD_REL_STEP * fd_scale(&x, &p, &g));
        assert_relative_eq!(an, fd, max_relative = 1e-8);
    }

    #[test]
    fn alpha_signs() {
        let g = g();
        assert_eq!(alpha(1, &g).unwrap(), 1);
        assert_eq!(alpha(2, &g).unwrap(), 1);
        assert_eq!(alpha(3, &g).unwrap(), -1);
        assert!(alpha(4, &g).is_err());
    }

    fn coords() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
        (
            proptest::collection::vec(-3.0..3.0f64, 4),
            proptest::collection::vec(-3.0..3.0f64, 2),
        )
    }

    proptest! {
        #[test]
        fn lambda_scaling((y, z) in coords(), lam in 0.05..50.0f64) {
            let g = g();
            let x = Point::new(y.clone(), z.clone());
            let lhs = w_eval(&x, &BubbleParams::centered(2, lam), &g);
            let xs = Point::new(y.iter().map(|v| v * lam).collect(), z.iter().map(|v| v * lam).collect());
            let rhs = lam.powi(2) * w_eval(&xs, &BubbleParams::centered(2, 1.0), &g);
            prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs);
        }

        #[test]
        fn translation_covariance((y, z) in coords(), sh in proptest::collection::vec(-2.0..2.0f64, 2)) {
            let g = g();
            let x = Point::new(y.clone(), z.clone());
            let a = w_eval(&x, &BubbleParams::new(sh.clone(), 1.7), &g);
            let xs = Point::new(y, z.iter().zip(&sh).map(|(a, b)| a - b).collect());
            let b = w_eval(&xs, &BubbleParams::centered(2, 1.7), &g);
            prop_assert!((a - b).abs() <= 1e-13 * b);
        }

        #[test]
        fn parity_of_derivatives((y, z) in coords(), i in 1usize..=2) {
            let g = g();
            let p = BubbleParams::new(vec![0.2, -0.3], 2.0);
            let x = Point::new(y, z);
            let mut m = x.clone();
            m.z[i - 1] = 2.0 * p.zhat[i - 1] - x.z[i - 1];
            let zi = w_derivative(&x, &p, &g, i).unwrap();
            let zim = w_derivative(&m, &p, &g, i).unwrap();
            prop_assert!((zi + zim).abs() <= 1e-12 * zi.abs().max(1e-300));
            let zl = w_derivative(&x, &p, &g, 3).unwrap();
            let zlm = w_derivative(&m, &p, &g, 3).unwrap();
            prop_assert!((zl - zlm).abs() <= 1e-12 * zl.abs().max(1e-300));
        }
    }
}
