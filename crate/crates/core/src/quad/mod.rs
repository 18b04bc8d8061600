//! Weighted integrals over `ℝ^N` for integrands that depend only on
//! `r = |y|` and `s = |z - ẑ|`.
//!
//! The quarter plane `(r, s)` is covered in polar form `r = R cos φ`,
//! `s = R sin φ` with a logarithmic radius `R = scale·e^u`. Both directions use
//! composite 16-point Gauss-Legendre panels, doubled until two successive
//! refinements agree. Algebraic decay at infinity becomes exponential decay
//! in `u`, and the remaining tail beyond the last panel is extrapolated from
//! the measured decay rate.

pub mod constants;
pub mod gram;
pub mod mc;

use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::OnceLock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::{gamma, ln_gamma};

use crate::error::{Error, Result};
use crate::geometry::{surface_area_unchecked, Geometry};

pub use constants::{compute_b, compute_bi, compute_bi_by_parts, compute_d, compute_f, compute_f_at, compute_f_two_route, FRoute};
pub use gram::{gram_matrix, GramMatrix};
pub use mc::{mc_oracle, McEstimate, Proposal};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub max_panel_doublings: usize,
    pub mc_samples: usize,
    pub mc_seed: u64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            rel_tol: 1e-8,
            max_panel_doublings: 10,
            mc_samples: 1_000_000,
            mc_seed: 20240601,
        }
    }
}

impl QuadratureSpec {
    pub fn with_rel_tol(&self, rel_tol: f64) -> Self {
        QuadratureSpec {
            rel_tol,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.rel_tol < 1.0) {
            return Err(Error::Config(format!("rel_tol must be in (0,1), got {}", self.rel_tol)));
        }
        if self.max_panel_doublings == 0 {
            return Err(Error::Config("max_panel_doublings must be >= 1".into()));
        }
        Ok(())
    }
}

/// Reduced measure used by [`integrate_cylindrical`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Weight {
    /// `dξ/|y|`, i.e. `ω_{k-1}ω_{h-1} r^{k-2} s^{h-1} dr ds`.
    Hardy,
    /// `dξ`, i.e. `ω_{k-1}ω_{h-1} r^{k-1} s^{h-1} dr ds`.
    Plain,
}

/// Radial window and length scale for [`integrate_cylindrical_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CylOptions {
    /// Characteristic length of the integrand (`1/λ` for a bubble at `λ`).
    pub scale: f64,
    /// Restrict to `R >= r_min`.
    pub r_min: Option<f64>,
    /// Restrict to `R < r_max`.
    pub r_max: Option<f64>,
}

impl Default for CylOptions {
    fn default() -> Self {
        CylOptions {
            scale: 1.0,
            r_min: None,
            r_max: None,
        }
    }
}

impl CylOptions {
    pub fn scaled(scale: f64) -> Self {
        CylOptions {
            scale,
            ..Default::default()
        }
    }

    pub fn ball(scale: f64, radius: f64) -> Self {
        CylOptions {
            scale,
            r_min: None,
            r_max: Some(radius),
        }
    }
}

const GL_ORDER: usize = 16;
const LOG_SPAN: f64 = 30.0;

/// Gauss-Legendre nodes and weights on `[-1, 1]`, by Newton iteration on `P_n`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for j in 2..=n {
                let jf = j as f64;
                let p2 = ((2.0 * jf - 1.0) * z * p1 - (jf - 1.0) * p0) / jf;
                p0 = p1;
                p1 = p2;
            }
            dp = nf * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

fn gl16() -> &'static (Vec<f64>, Vec<f64>) {
    static NODES: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    NODES.get_or_init(|| gauss_legendre(GL_ORDER))
}

/// Composite rule with `panels` equal panels: nodes and weights on `[a, b]`.
fn composite_nodes(a: f64, b: f64, panels: usize) -> Vec<(f64, f64)> {
    let (x, w) = gl16();
    let hw = (b - a) / panels as f64 / 2.0;
    let mut out = Vec::with_capacity(panels * GL_ORDER);
    for p in 0..panels {
        let mid = a + (2 * p + 1) as f64 * hw;
        for (xi, wi) in x.iter().zip(w) {
            out.push((mid + hw * xi, hw * wi));
        }
    }
    out
}

/// Integral of `f` and of `|f|` on `[a, b]` by composite Gauss-Legendre.
fn composite(f: &dyn Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> (f64, f64) {
    let mut s = 0.0;
    let mut sa = 0.0;
    for (x, w) in composite_nodes(a, b, panels) {
        let v = w * f(x);
        s += v;
        sa += v.abs();
    }
    (s, sa)
}

/// Panel-doubling Gauss-Legendre on a finite interval.
///
/// Converged when successive estimates differ by at most `rel_tol` times the
/// integral of `|f|`, so sign-changing integrands are handled.
pub fn adaptive_1d(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    rel_tol: f64,
    max_doublings: usize,
) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let mut panels = 1;
    let (mut prev, _) = composite(f, a, b, panels);
    for _ in 0..max_doublings {
        panels *= 2;
        let (cur, abs) = composite(f, a, b, panels);
        if !cur.is_finite() {
            return Err(Error::Domain("non-finite integrand value".into()));
        }
        if (cur - prev).abs() <= rel_tol * abs || abs == 0.0 {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(Error::Tolerance {
        estimate: prev,
        rel_tol,
        doublings: max_doublings,
    })
}

/// Integrates a cylindrical function over `ℝ^N` with unit length scale.
pub fn integrate_cylindrical<F>(f: F, g: &Geometry, weight: Weight, spec: &QuadratureSpec) -> Result<f64>
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    integrate_cylindrical_with(f, g, weight, spec, &CylOptions::default())
}

/// Integrates a cylindrical function with an explicit length scale and radial window.
pub fn integrate_cylindrical_with<F>(
    f: F,
    g: &Geometry,
    weight: Weight,
    spec: &QuadratureSpec,
    opts: &CylOptions,
) -> Result<f64>
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    let ln_s = opts.scale.ln();
    let u_lo = match opts.r_min {
        Some(r) if r > 0.0 => r.ln(),
        _ => ln_s - LOG_SPAN,
    };
    let (u_hi, open_end) = match opts.r_max {
        Some(r) => (r.ln(), false),
        None => (ln_s + LOG_SPAN, true),
    };
    if u_hi <= u_lo {
        return Ok(0.0);
    }
    let pk = match weight {
        Weight::Hardy => g.k as i32 - 2,
        Weight::Plain => g.k as i32 - 1,
    };
    let ph = g.h as i32 - 1;
    let pref = surface_area_unchecked(g.k) * surface_area_unchecked(g.h);
    let inner_tol = (spec.rel_tol * 0.05).max(1e-15);
    let inner_doublings = spec.max_panel_doublings;

    // Integrand in u after the angular integral: R² ∫ f r^pk s^ph dφ.
    let radial = |u: f64| -> Result<f64> {
        let big_r = u.exp();
        let ang = |phi: f64| {
            let (sn, cs) = phi.sin_cos();
            let (r, s) = (big_r * cs, big_r * sn);
            f(r, s) * r.powi(pk) * s.powi(ph)
        };
        let v = adaptive_1d(&ang, 0.0, FRAC_PI_2, inner_tol, inner_doublings)?;
        Ok(big_r * big_r * v)
    };

    let eval_level = |panels: usize| -> Result<(f64, f64)> {
        let nodes = composite_nodes(u_lo, u_hi, panels);
        let vals: Vec<Result<f64>> = nodes.par_iter().map(|(u, _)| radial(*u)).collect();
        let mut s = 0.0;
        let mut sa = 0.0;
        for ((_, w), v) in nodes.iter().zip(vals) {
            let v = w * v?;
            s += v;
            sa += v.abs();
        }
        Ok((s, sa))
    };

    let tail = if open_end {
        let g1 = radial(u_hi)?;
        let g0 = radial(u_hi - 1.0)?;
        if g1 == 0.0 {
            0.0
        } else {
            let rate = (g0 / g1).ln();
            if !(rate > 0.05) || g0.signum() != g1.signum() {
                return Err(Error::Domain(format!(
                    "integrand does not decay fast enough at infinity (log-rate {rate:.3})"
                )));
            }
            g1 / rate
        }
    } else {
        0.0
    };

    let mut panels = 4;
    let (mut prev, _) = eval_level(panels)?;
    for _ in 0..spec.max_panel_doublings {
        panels *= 2;
        let (cur, abs) = eval_level(panels)?;
        if !cur.is_finite() {
            return Err(Error::Domain("non-finite integrand value".into()));
        }
        if (cur - prev).abs() <= spec.rel_tol * 0.1 * (abs + tail.abs()) || abs == 0.0 {
            return Ok(pref * (cur + tail));
        }
        prev = cur;
    }
    Err(Error::Tolerance {
        estimate: pref * (prev + tail),
        rel_tol: spec.rel_tol,
        doublings: spec.max_panel_doublings,
    })
}

/// Average of `|θ_1|^β` over the unit sphere `S^{d-1}`.
pub fn sphere_moment(beta: f64, d: usize) -> Result<f64> {
    if d < 1 {
        return Err(Error::Domain("sphere_moment needs d >= 1".into()));
    }
    if beta <= -1.0 {
        return Err(Error::Divergent {
            exponent: beta,
            dim: d,
        });
    }
    if d == 1 {
        return Ok(1.0);
    }
    let df = d as f64;
    let ln = ln_gamma(df / 2.0) + ln_gamma((beta + 1.0) / 2.0)
        - 0.5 * PI.ln()
        - ln_gamma((df + beta) / 2.0);
    Ok(ln.exp())
}

/// Average of `|θ_j|^β` over `S^{d-1}` (`j` 1-based), computed numerically in
/// hyperspherical angles where `θ_j = sin φ_1 ⋯ sin φ_{j-1} cos φ_j`.
///
/// Independent of [`sphere_moment`]; different `j` give different 1D integrals.
pub fn coordinate_moment(beta: f64, d: usize, j: usize, rel_tol: f64) -> Result<f64> {
    if j == 0 || j > d {
        return Err(Error::Domain(format!("coordinate index {j} outside 1..={d}")));
    }
    if d == 1 {
        return Ok(1.0);
    }
    let tol = rel_tol.max(1e-14);
    // ∫_0^π |sin φ|^p |cos φ|^q dφ, split at π/2 where |cos| has a kink.
    let sc = |p: f64, q: f64| -> Result<f64> {
        let f = |phi: f64| {
            let (s, c) = phi.sin_cos();
            s.abs().powf(p) * c.abs().powf(q)
        };
        Ok(adaptive_1d(&f, 0.0, FRAC_PI_2, tol, 14)? + adaptive_1d(&f, FRAC_PI_2, PI, tol, 14)?)
    };
    let mut ratio = 1.0;
    // Angles φ_1..φ_{d-2} live on [0, π] with measure sin^{d-1-m} φ_m.
    for m in 1..=(d - 2).min(j) {
        let pw = (d - 1 - m) as f64;
        let num = if m < j {
            sc(pw + beta, 0.0)?
        } else {
            sc(pw, beta)?
        };
        ratio *= num / sc(pw, 0.0)?;
    }
    if j >= d - 1 {
        // Last angle φ_{d-1} ∈ [0, 2π): θ_{d-1} uses cos, θ_d uses sin.
        let (p, q) = if j == d - 1 { (0.0, beta) } else { (beta, 0.0) };
        ratio *= 2.0 * sc(p, q)? / (2.0 * PI);
    }
    Ok(ratio)
}

/// `Γ(x)` re-exported for callers that need it next to the moments.
pub fn gamma_fn(x: f64) -> f64 {
    gamma(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn g() -> Geometry {
        Geometry::new(6, 4, 2, 1, 10.0)
    }

    #[test]
    fn gl_nodes_integrate_polynomials() {
        let (x, w) = gauss_legendre(16);
        assert_relative_eq!(w.iter().sum::<f64>(), 2.0, max_relative = 1e-14);
        let i30: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(30)).sum();
        assert_relative_eq!(i30, 2.0 / 31.0, max_relative = 1e-13);
    }

    #[test]
    fn gaussian_closed_form() {
        let spec = QuadratureSpec::default();
        let v = integrate_cylindrical(|r, s| (-r * r - s * s).exp(), &g(), Weight::Hardy, &spec).unwrap();
        assert_relative_eq!(v, PI.powf(3.5) / 2.0, max_relative = 1e-8);
        let v = integrate_cylindrical(|r, s| (-r * r - s * s).exp(), &g(), Weight::Plain, &spec).unwrap();
        assert_relative_eq!(v, PI.powi(3), max_relative = 1e-8);
        let z = integrate_cylindrical(|_, _| 0.0, &g(), Weight::Hardy, &spec).unwrap();
        assert_eq!(z, 0.0);
    }

    #[test]
    fn algebraic_tail_is_extrapolated() {
        // ∫ (1+R²)^{-3.25} dξ over ℝ^6 decays like R^{-1.5} in the log variable.
        let spec = QuadratureSpec::default();
        let g = g();
        let v = integrate_cylindrical(|r, s| (1.0 + r * r + s * s).powf(-3.25), &g, Weight::Plain, &spec).unwrap();
        let want = PI.powi(3) / 2.0 * gamma(3.0) * gamma(0.25) / gamma(3.25);
        assert_relative_eq!(v, want, max_relative = 1e-8);
    }

    #[test]
    fn ball_window() {
        let spec = QuadratureSpec::default();
        let g = g();
        // Volume of the unit ball in ℝ^6 is π³/6.
        let v = integrate_cylindrical_with(|_, _| 1.0, &g, Weight::Plain, &spec, &CylOptions::ball(1.0, 1.0)).unwrap();
        assert_relative_eq!(v, PI.powi(3) / 6.0, max_relative = 1e-9);
        let opts = CylOptions {
            scale: 1.0,
            r_min: Some(0.5),
            r_max: Some(1.0),
        };
        let v = integrate_cylindrical_with(|_, _| 1.0, &g, Weight::Plain, &spec, &opts).unwrap();
        assert_relative_eq!(v, PI.powi(3) / 6.0 * (1.0 - 0.5f64.powi(6)), max_relative = 1e-9);
    }

    #[test]
    fn non_convergence_reports_estimate() {
        let spec = QuadratureSpec {
            rel_tol: 1e-14,
            max_panel_doublings: 1,
            ..Default::default()
        };
        let r = integrate_cylindrical(|r, s| (-(r - 3.0).powi(2) * 50.0 - s * s).exp(), &g(), Weight::Hardy, &spec);
        assert!(matches!(r, Err(Error::Tolerance { .. })), "{r:?}");
    }

    #[test]
    fn slow_decay_is_rejected() {
        let spec = QuadratureSpec::default();
        let r = integrate_cylindrical(|r, s| (1.0 + r * r + s * s).powf(-2.51), &g(), Weight::Plain, &spec);
        assert!(r.is_err());
    }

    #[test]
    fn sphere_moment_values() {
        assert_relative_eq!(sphere_moment(2.0, 4).unwrap(), 0.25, max_relative = 1e-14);
        for d in 1..8 {
            assert_relative_eq!(sphere_moment(0.0, d).unwrap(), 1.0, max_relative = 1e-14);
        }
        let want = gamma(2.0) * gamma(2.75) / (PI.sqrt() * gamma(4.25));
        assert_relative_eq!(sphere_moment(4.5, 4).unwrap(), want, max_relative = 1e-13);
        assert!(sphere_moment(-1.0, 3).is_err());
    }

    #[test]
    fn coordinate_moment_matches_closed_form() {
        for &(b, d) in &[(4.5, 2usize), (4.6, 4), (2.0, 3), (2.5, 2), (3.7, 5)] {
            let want = sphere_moment(b, d).unwrap();
            for j in 1..=d {
                let got = coordinate_moment(b, d, j, 1e-12).unwrap();
                assert_relative_eq!(got, want, max_relative = 1e-10);
            }
        }
    }
}
