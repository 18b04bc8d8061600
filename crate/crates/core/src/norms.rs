//! Weighted sup norms over sample grids, the error term `l`, the nonlinear
//! remainder `N(ω)` and log-log slope fits.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::bubble::{w_eval, BubbleParams};
use crate::error::{Error, Result};
use crate::geometry::{lattice_points, Geometry, Point};
use crate::model::{m_eval, m_minus_one, CurvatureModel};
use crate::projection::{phi_eval, ProjectionConfig};

/// Default `θ` in `τ = (N-2)/2 - θ`.
pub const DEFAULT_THETA: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormWeights {
    pub theta: f64,
    pub tau: f64,
    pub lambda: f64,
    pub zhat: Vec<f64>,
    pub lattice_radius: usize,
    /// Lattice translates `P_L` used for `ẑ_L^j = ẑ + P_L^j`, as `z`-offsets.
    offsets: Vec<Vec<f64>>,
    n: usize,
}

impl NormWeights {
    pub fn new(theta: f64, p: &BubbleParams, g: &Geometry, lattice_radius: usize) -> Result<Self> {
        let tau = g.half_exp() - theta;
        if !(theta > 0.0 && theta < 0.1) {
            return Err(Error::Domain(format!("θ must lie in (0, 1/10), got {theta}")));
        }
        if tau <= g.kbar as f64 {
            return Err(Error::Domain(format!("τ = {tau} must exceed kbar = {}", g.kbar)));
        }
        let mut offsets = vec![vec![0.0; g.h]];
        for q in lattice_points(g.kbar, lattice_radius as f64) {
            offsets.push(g.translate(&q).z);
        }
        Ok(NormWeights {
            theta,
            tau,
            lambda: p.lambda,
            zhat: p.zhat.clone(),
            lattice_radius,
            offsets,
            n: g.n,
        })
    }

    /// `1 + λ|y| + λ|z - ẑ - P|` for each translate.
    fn bracket(&self, x: &Point, off: &[f64]) -> f64 {
        let dz = x
            .z
            .iter()
            .zip(&self.zhat)
            .zip(off)
            .map(|((z, zh), o)| (z - zh - o).powi(2))
            .sum::<f64>()
            .sqrt();
        1.0 + self.lambda * x.y_norm() + self.lambda * dz
    }
}

/// `σ(x) = min{1, ((1 + λ|y| + λ|z - ẑ|)/λ)^τ}`.
pub fn sigma_eval(x: &Point, w: &NormWeights) -> f64 {
    let b = w.bracket(x, &w.offsets[0]);
    (b / w.lambda).powf(w.tau).min(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormMode {
    Star,
    StarStar,
}

/// The weight that `|u|` is divided by; `None` on `|y| = 0` in `StarStar` mode.
pub fn norm_weight(x: &Point, w: &NormWeights, mode: NormMode) -> Option<f64> {
    let nf = w.n as f64;
    let sig = sigma_eval(x, w);
    match mode {
        NormMode::Star => {
            let a = (nf - 2.0) / 2.0;
            let s: f64 = w
                .offsets
                .iter()
                .rev()
                .map(|o| w.lambda.powf(a) * w.bracket(x, o).powf(-(a + w.tau)))
                .sum();
            Some(sig * s)
        }
        NormMode::StarStar => {
            let r = x.y_norm();
            if r == 0.0 {
                return None;
            }
            let a = nf / 2.0;
            let s: f64 = w
                .offsets
                .iter()
                .rev()
                .map(|o| w.lambda.powf(a) * w.bracket(x, o).powf(-(a + w.tau)))
                .sum();
            Some(sig * s / r)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleGrid {
    pub points: Vec<Point>,
    pub description: String,
}

/// Layout of a [`SampleGrid`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridOptions {
    /// Log-spaced shells in `λ·|x - x̂|` over `[1e-2, 1e2]`.
    pub scaled_shells: usize,
    /// Log-spaced shells in `|x - x̂|` over `[1e-2, 1]`.
    pub absolute_shells: usize,
    pub directions: usize,
    pub slab_points: usize,
    pub far_points: usize,
    pub seed: u64,
}

impl Default for GridOptions {
    fn default() -> Self {
        GridOptions {
            scaled_shells: 25,
            absolute_shells: 25,
            directions: 8,
            slab_points: 6,
            far_points: 6,
            seed: 5,
        }
    }
}

impl GridOptions {
    /// Same layout with every count multiplied by `f`.
    pub fn refined(&self, f: usize) -> Self {
        GridOptions {
            scaled_shells: self.scaled_shells * f,
            absolute_shells: self.absolute_shells * f,
            directions: self.directions * f,
            slab_points: self.slab_points * f,
            far_points: self.far_points * f,
            seed: self.seed,
        }
    }
}

fn logspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n)
        .map(|i| (lo.ln() + (hi.ln() - lo.ln()) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

fn unit_vector(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
        let s = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if s > 1e-8 {
            return v.into_iter().map(|a| a / s).collect();
        }
    }
}

/// Near-bubble shells, absolute shells, slab-face points and far-field points,
/// all inside the strip and off the axis `y = 0`.
pub fn build_grid(g: &Geometry, p: &BubbleParams, opts: &GridOptions) -> SampleGrid {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let c = p.center(g).to_flat();
    let mut pts = Vec::new();
    let push = |v: Vec<f64>, pts: &mut Vec<Point>| {
        let x = Point::from_flat(&v, g.k);
        if g.in_strip(&x) && x.y_norm() > 0.0 {
            pts.push(x);
        }
    };
    let dirs: Vec<Vec<f64>> = (0..opts.directions).map(|_| unit_vector(&mut rng, g.n)).collect();
    for d in logspace(1e-2, 1e2, opts.scaled_shells) {
        for u in &dirs {
            push(c.iter().zip(u).map(|(a, b)| a + b * d / p.lambda).collect(), &mut pts);
        }
    }
    for d in logspace(1e-2, 1.0, opts.absolute_shells) {
        for u in &dirs {
            push(c.iter().zip(u).map(|(a, b)| a + b * d).collect(), &mut pts);
        }
    }
    for i in 0..opts.slab_points {
        let mut v: Vec<f64> = unit_vector(&mut rng, g.n).iter().map(|a| a * 0.5).collect();
        let axis = g.k + i % g.kbar;
        v[axis] = if i % 2 == 0 { g.l / 2.0 } else { -g.l / 2.0 };
        push(v, &mut pts);
    }
    for _ in 0..opts.far_points {
        let u = unit_vector(&mut rng, g.n);
        let mut v: Vec<f64> = u.iter().map(|a| a * g.l * 2.0).collect();
        for i in 0..g.kbar {
            v[g.k + i] = u[g.k + i] * g.l / 2.0;
        }
        push(v, &mut pts);
    }
    SampleGrid {
        description: format!(
            "{} λ-shells in [1e-2,1e2], {} absolute shells in [1e-2,1], {} directions, {} slab-face and {} far-field points, seed {}",
            opts.scaled_shells, opts.absolute_shells, opts.directions, opts.slab_points, opts.far_points, opts.seed
        ),
        points: pts,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormResult {
    pub value: f64,
    pub argmax: Option<usize>,
    /// Points skipped because the weight is singular there.
    pub excluded: usize,
}

/// Max over the grid of `|u(x)|` divided by the chosen weight.
///
/// This is a lower bound for the true sup over the strip.
pub fn weighted_norm(values: &[f64], grid: &SampleGrid, w: &NormWeights, mode: NormMode) -> Result<NormResult> {
    if values.len() != grid.points.len() {
        return Err(Error::Domain(format!(
            "{} values for {} grid points",
            values.len(),
            grid.points.len()
        )));
    }
    if grid.points.is_empty() {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    let mut best = 0.0;
    let mut arg = None;
    let mut excluded = 0;
    for (i, (x, u)) in grid.points.iter().zip(values).enumerate() {
        match norm_weight(x, w, mode) {
            Some(wt) => {
                let v = u.abs() / wt;
                if arg.is_none() || v > best {
                    best = v;
                    arg = Some(i);
                }
            }
            None => excluded += 1,
        }
    }
    Ok(NormResult {
        value: best,
        argmax: arg,
        excluded,
    })
}

/// Pointwise value with its Monte Carlo error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointValue {
    pub value: f64,
    pub stat_error: f64,
}

/// `l = (M·PW^{2♯-1} - W^{2♯-1})/|y|`, split as
/// `[(M-1)·PW^{2♯-1} + (PW^{2♯-1} - W^{2♯-1})]/|y|` with `PW = W - φ` so neither
/// part suffers cancellation.
pub fn l_term_eval(
    x: &Point,
    p: &BubbleParams,
    g: &Geometry,
    m: &CurvatureModel,
    cfg: &ProjectionConfig,
) -> Result<PointValue> {
    let r = x.y_norm();
    if r == 0.0 {
        return Err(Error::Singular("l at |y| = 0".into()));
    }
    let phi = phi_eval(x, p, g, cfg)?;
    Ok(l_from_phi(x, p, g, m, phi.value, phi.stat_error))
}

/// `l` given `φ(x)` and its error.
pub fn l_from_phi(x: &Point, p: &BubbleParams, g: &Geometry, m: &CurvatureModel, phi: f64, phi_err: f64) -> PointValue {
    let r = x.y_norm();
    let pw_exp = g.power();
    let w = w_eval(x, p, g);
    let ratio = (-phi / w).max(-1.0);
    let pw = w * (1.0 + ratio);
    let wp = w.powf(pw_exp);
    let diff = wp * (pw_exp * ratio.ln_1p()).exp_m1();
    let pwp = wp + diff;
    let value = (m_minus_one(x, m, g) * pwp + diff) / r;
    let dpw = m_eval(x, m, g) * pw_exp * pw.max(0.0).powf(pw_exp - 1.0) / r;
    PointValue {
        value,
        stat_error: dpw * phi_err,
    }
}

/// `(1+u)^p - 1 - p·u` without cancellation for small `u`.
fn taylor_tail(p: f64, u: f64) -> f64 {
    if u.abs() < 1e-3 {
        let mut c = p * (p - 1.0) / 2.0;
        let mut un = u * u;
        let mut acc = 0.0;
        for n in 2..14 {
            acc += c * un;
            c *= (p - n as f64) / (n as f64 + 1.0);
            un *= u;
        }
        acc
    } else {
        (1.0 + u).max(0.0).powf(p) - 1.0 - p * u
    }
}

/// `N(ω) = M[(PW + ω)_+^{2♯-1} - PW^{2♯-1} - (2♯-1) PW^{2♯-2} ω]/|y|`.
pub fn nonlinear_remainder(x: &Point, pw_value: f64, omega_value: f64, m: &CurvatureModel, g: &Geometry) -> Result<f64> {
    let r = x.y_norm();
    if r == 0.0 {
        return Err(Error::Singular("N(ω) at |y| = 0".into()));
    }
    if pw_value < 0.0 {
        return Err(Error::Domain(format!("PW must be nonnegative, got {pw_value}")));
    }
    let p = g.power();
    let mm = m_eval(x, m, g);
    let bracket = if pw_value == 0.0 {
        omega_value.max(0.0).powf(p)
    } else {
        pw_value.powf(p) * taylor_tail(p, omega_value / pw_value)
    };
    Ok(mm * bracket / r)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub exponent: f64,
    /// 95% half-width from the residuals.
    pub half_width: f64,
    pub intercept: f64,
    pub points: usize,
}

/// Least-squares slope of `ln value` against `ln scale`.
pub fn scaling_exponent_fit(pairs: &[(f64, f64)]) -> Result<ExponentFit> {
    if pairs.len() < 3 {
        return Err(Error::InsufficientData {
            needed: 3,
            got: pairs.len(),
        });
    }
    if let Some(&(s, v)) = pairs.iter().find(|(s, v)| !(*s > 0.0 && *v > 0.0)) {
        return Err(Error::Domain(format!("log-log fit needs positive data, got ({s}, {v})")));
    }
    let n = pairs.len() as f64;
    let xs: Vec<f64> = pairs.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = pairs.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Domain("all scales are equal".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let dof = n - 2.0;
    let se = (ssr / dof / sxx).sqrt();
    let t = StudentsT::new(0.0, 1.0, dof)
        .map_err(|e| Error::Domain(e.to_string()))?
        .inverse_cdf(0.975);
    Ok(ExponentFit {
        exponent: slope,
        half_width: t * se,
        intercept,
        points: pairs.len(),
    })
}

/// One `(λ, L)` point of the `‖l‖_**` scaling study.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LNormRow {
    pub lambda: f64,
    #[serde(rename = "L")]
    pub l: f64,
    pub norm: f64,
    pub argmax: Point,
    /// Largest relative Monte Carlo error of `l` on the grid.
    pub max_rel_error: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LNormReport {
    pub rows: Vec<LNormRow>,
    pub fit: ExponentFit,
    pub grid: String,
}

/// Grid `‖l‖_**` along coupled `(λ, L)` pairs and its fitted `λ`-exponent.
pub fn l_norm_scaling(
    pairs: &[(f64, f64)],
    g: &Geometry,
    m: &CurvatureModel,
    theta: f64,
    cfg: &ProjectionConfig,
    grid_opts: &GridOptions,
) -> Result<LNormReport> {
    let mut rows = Vec::new();
    let mut desc = String::new();
    for &(lambda, l) in pairs {
        let gl = g.with_period(l);
        let p = BubbleParams::centered(g.h, lambda);
        let grid = build_grid(&gl, &p, grid_opts);
        desc = grid.description.clone();
        let w = NormWeights::new(theta, &p, &gl, cfg.lattice_radius)?;
        let mut vals = Vec::with_capacity(grid.points.len());
        let mut rel = 0.0f64;
        for x in &grid.points {
            let v = l_term_eval(x, &p, &gl, m, cfg)?;
            if v.value != 0.0 {
                rel = rel.max(v.stat_error / v.value.abs());
            }
            vals.push(v.value);
        }
        let nr = weighted_norm(&vals, &grid, &w, NormMode::StarStar)?;
        let arg = nr.argmax.ok_or(Error::InsufficientData { needed: 1, got: 0 })?;
        rows.push(LNormRow {
            lambda,
            l,
            norm: nr.value,
            argmax: grid.points[arg].clone(),
            max_rel_error: rel,
        });
    }
    let fit = scaling_exponent_fit(&rows.iter().map(|r| (r.lambda, r.norm)).collect::<Vec<_>>())?;
    Ok(LNormReport { rows, fit, grid: desc })
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
    fn sigma_values() {
        let g = g();
        let p = BubbleParams::centered(2, 100.0);
        let w = NormWeights::new(0.05, &p, &g, 5).unwrap();
        assert_relative_eq!(w.tau, 1.95);
        assert_relative_eq!(sigma_eval(&g.origin(), &w), 10f64.powf(-3.9), max_relative = 1e-13);
        let x = Point::new(vec![0.09, 0.0, 0.0, 0.0], vec![0.0, 0.0]);
        assert_relative_eq!(sigma_eval(&x, &w), 10f64.powf(-1.95), max_relative = 1e-12);
        let x = Point::new(vec![0.99, 0.0, 0.0, 0.0], vec![0.0, 0.0]);
        assert_eq!(sigma_eval(&x, &w), 1.0);
        assert!(NormWeights::new(0.2, &p, &g, 5).is_err());
    }

    #[test]
    fn norm_of_weight_is_one() {
        let g = g();
        let p = BubbleParams::centered(2, 20.0);
        let w = NormWeights::new(0.05, &p, &g, 5).unwrap();
        let grid = build_grid(&g, &p, &GridOptions::default());
        for mode in [NormMode::Star, NormMode::StarStar] {
            let vals: Vec<f64> = grid.points.iter().map(|x| norm_weight(x, &w, mode).unwrap()).collect();
            let n = weighted_norm(&vals, &grid, &w, mode).unwrap();
            assert_relative_eq!(n.value, 1.0, max_relative = 1e-14);
            let twice: Vec<f64> = vals.iter().map(|v| 2.0 * v).collect();
            assert_relative_eq!(weighted_norm(&twice, &grid, &w, mode).unwrap().value, 2.0, max_relative = 1e-14);
        }
    }

    #[test]
    fn starstar_excludes_axis() {
        let g = g();
        let p = BubbleParams::centered(2, 20.0);
        let w = NormWeights::new(0.05, &p, &g, 5).unwrap();
        let grid = SampleGrid {
            points: vec![g.origin(), Point::new(vec![0.1, 0.0, 0.0, 0.0], vec![0.0, 0.0])],
            description: "test".into(),
        };
        let n = weighted_norm(&[1.0, 1.0], &grid, &w, NormMode::StarStar).unwrap();
        assert_eq!(n.excluded, 1);
        assert_eq!(n.argmax, Some(1));
    }

    #[test]
    fn compact_support_grid_stability() {
        let g = g();
        let p = BubbleParams::centered(2, 20.0);
        let w = NormWeights::new(0.05, &p, &g, 5).unwrap();
        let bump = |x: &Point| {
            let d = x.norm();
            if d < 0.5 {
                (1.0 - (d / 0.5).powi(2)).powi(2)
            } else {
                0.0
            }
        };
        let coarse = build_grid(&g, &p, &GridOptions::default());
        let fine = build_grid(&g, &p, &GridOptions::default().refined(10));
        let nc = weighted_norm(&coarse.points.iter().map(bump).collect::<Vec<_>>(), &coarse, &w, NormMode::Star).unwrap();
        let nf = weighted_norm(&fine.points.iter().map(bump).collect::<Vec<_>>(), &fine, &w, NormMode::Star).unwrap();
        assert!((nc.value - nf.value).abs() < 0.05 * nf.value, "{} vs {}", nc.value, nf.value);
    }

    #[test]
    fn bubble_star_norm_peaks_near_core() {
        let g = g();
        let p = BubbleParams::centered(2, 50.0);
        let w = NormWeights::new(0.05, &p, &g, 5).unwrap();
        let grid = build_grid(&g, &p, &GridOptions::default());
        let vals: Vec<f64> = grid.points.iter().map(|x| w_eval(x, &p, &g)).collect();
        let n = weighted_norm(&vals, &grid, &w, NormMode::Star).unwrap();
        assert!(n.value.is_finite());
        let x = &grid.points[n.argmax.unwrap()];
        assert!(x.dist(&p.center(&g)) <= 2.0 / p.lambda);
    }

    #[test]
    fn l_vanishes_without_perturbation() {
        let g = g();
        let p = BubbleParams::centered(2, 5.0);
        let mut m = CurvatureModel::default_n6();
        m.a = vec![0.0; 6];
        let x = Point::new(vec![0.1, 0.0, 0.0, 0.0], vec![0.05, 0.0]);
        assert_eq!(l_from_phi(&x, &p, &g, &m, 0.0, 0.0).value, 0.0);
    }

    #[test]
    fn l_negative_where_m_dips() {
        let g = g();
        let p = BubbleParams::centered(2, 5.0);
        let m = CurvatureModel::default_n6();
        let x = Point::new(vec![0.01, 0.0, 0.0, 0.0], vec![0.3, 0.0]);
        let v = l_from_phi(&x, &p, &g, &m, 0.0, 0.0).value;
        assert!(v < 0.0);
    }

    #[test]
    fn remainder_cases() {
        let g = g();
        let m = CurvatureModel::default_n6();
        let x = Point::new(vec![0.2, 0.0, 0.0, 0.0], vec![0.0, 0.0]);
        assert_eq!(nonlinear_remainder(&x, 3.0, 0.0, &m, &g).unwrap(), 0.0);
        let (pw, om) = (2.0f64, -5.0);
        let want = m_eval(&x, &m, &g) * (-pw.powf(1.5) - 1.5 * pw.sqrt() * om) / 0.2;
        assert_relative_eq!(nonlinear_remainder(&x, pw, om, &m, &g).unwrap(), want, max_relative = 1e-14);
        assert!(nonlinear_remainder(&g.origin(), 1.0, 1.0, &m, &g).is_err());
    }

    #[test]
    fn remainder_small_t_is_quadratic() {
        let g = g();
        let m = CurvatureModel::default_n6();
        let x = Point::new(vec![0.2, 0.0, 0.0, 0.0], vec![0.0, 0.0]);
        let pairs: Vec<(f64, f64)> = (0..8)
            .map(|i| {
                let t = 1e-6 * 2f64.powi(i);
                (t, nonlinear_remainder(&x, 1.0, t, &m, &g).unwrap().abs())
            })
            .collect();
        let f = scaling_exponent_fit(&pairs).unwrap();
        assert!((f.exponent - 2.0).abs() < 1e-3);
    }

    #[test]
    fn fit_examples() {
        let exact: Vec<(f64, f64)> = (1..6).map(|i| (i as f64, (i as f64).powi(-4))).collect();
        let f = scaling_exponent_fit(&exact).unwrap();
        assert_relative_eq!(f.exponent, -4.0, max_relative = 1e-12);
        assert!(f.half_width < 1e-10);
        assert!(matches!(
            scaling_exponent_fit(&exact[..2]),
            Err(Error::InsufficientData { needed: 3, got: 2 })
        ));
        assert!(scaling_exponent_fit(&[(1.0, 1.0), (2.0, -1.0), (3.0, 1.0)]).is_err());
    }

    #[test]
    fn fit_with_noise() {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let pairs: Vec<(f64, f64)> = logspace(1.0, 10.0, 12)
            .into_iter()
            .map(|s| (s, s.powi(-2) * (1.0 + 0.05 * (2.0 * rng.random::<f64>() - 1.0))))
            .collect();
        let f = scaling_exponent_fit(&pairs).unwrap();
        assert!(f.exponent > -2.3 && f.exponent < -1.7);
    }

    proptest! {
        #[test]
        fn norm_homogeneous_and_subadditive(
            u in proptest::collection::vec(-5.0..5.0f64, 30),
            v in proptest::collection::vec(-5.0..5.0f64, 30),
            c in -10.0..10.0f64,
        ) {
            let g = g();
            let p = BubbleParams::centered(2, 10.0);
            let w = NormWeights::new(0.05, &p, &g, 3).unwrap();
            let opts = GridOptions { scaled_shells: 5, absolute_shells: 0, directions: 6, slab_points: 0, far_points: 0, seed: 1 };
            let grid = build_grid(&g, &p, &opts);
            let n = grid.points.len().min(30);
            let grid = SampleGrid { points: grid.points[..n].to_vec(), description: String::new() };
            let (u, v) = (&u[..n], &v[..n]);
            let nu = weighted_norm(u, &grid, &w, NormMode::Star).unwrap().value;
            let nv = weighted_norm(v, &grid, &w, NormMode::Star).unwrap().value;
            let cu: Vec<f64> = u.iter().map(|a| c * a).collect();
            let ncu = weighted_norm(&cu, &grid, &w, NormMode::Star).unwrap().value;
            prop_assert!((ncu - c.abs() * nu).abs() <= 1e-12 * ncu.max(1.0));
            let s: Vec<f64> = u.iter().zip(v).map(|(a, b)| a + b).collect();
            let ns = weighted_norm(&s, &grid, &w, NormMode::Star).unwrap().value;
            prop_assert!(ns <= nu + nv + 1e-12 * (nu + nv));
        }

        #[test]
        fn remainder_continuous_across_kink(pw in 0.1..10.0f64, eps in 1e-9..1e-6f64) {
            let g = g();
            let m = CurvatureModel::default_n6();
            let x = Point::new(vec![0.3, 0.0, 0.0, 0.0], vec![0.0, 0.0]);
            let a = nonlinear_remainder(&x, pw, -pw - eps, &m, &g).unwrap();
            let b = nonlinear_remainder(&x, pw, -pw + eps, &m, &g).unwrap();
            prop_assert!((a - b).abs() <= 1e-4 * a.abs().max(1.0));
        }
    }
}
