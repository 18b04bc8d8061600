//! The projected bubble `PW` on the strip and the discrepancy `φ = W - PW`.
//!
//! `PW` is assembled from the bubble-sum identity
//! `PW(x) = Σ_p [W(x - P_p) - R_p(x)]`, where
//! `R_p(x) = ∫_{ℝ^N∖Ω} Γ(x - P_p, ξ) W^{2♯-1}(ξ)/|ξ¹| dξ` is the part of the
//! Newtonian potential of the translate that lies outside the strip. Only the
//! `R_p` need Monte Carlo; the bubble sum is exact.
//!
//! The complement integrals use a mixture proposal: one heavy-tailed component
//! per slab face (Lomax in the normal direction, Cauchy across it) plus one
//! `|ξ - s|^{2-N}` ball component around each kernel singularity `s = x - P_p`
//! that reaches the complement.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::bubble::{w_derivative, w_eval, BubbleParams};
use crate::error::{Error, Result};
use crate::geometry::{
    gamma_kernel, green_eval, lattice_points, omitted_translates_bound, surface_area_unchecked, Geometry, Point,
};
use crate::norms::scaling_exponent_fit;
use crate::quad::mc::{cauchy_log_density, cauchy_sample, run_chunks};
use crate::quad::{compute_b, McEstimate, QuadratureSpec};

/// Smallest complement sample count accepted by [`ProjectionConfig::validate`].
pub const MIN_COMPLEMENT_SAMPLES: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProjectionConfig {
    pub lattice_radius: usize,
    pub complement_samples: usize,
    pub seed: u64,
}

impl Default for ProjectionConfig {
    fn default() -> Self {
        ProjectionConfig {
            lattice_radius: 20,
            complement_samples: 100_000,
            seed: 11,
        }
    }
}

impl ProjectionConfig {
    pub fn validate(&self) -> Result<()> {
        if self.lattice_radius < 1 {
            return Err(Error::Config("lattice_radius must be >= 1".into()));
        }
        if self.complement_samples < MIN_COMPLEMENT_SAMPLES {
            return Err(Error::Config(format!(
                "complement_samples must be >= {MIN_COMPLEMENT_SAMPLES}, got {}",
                self.complement_samples
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProjectionValue {
    pub value: f64,
    pub stat_error: f64,
    pub tail_bound: f64,
}

#[derive(Debug, Clone)]
enum Component {
    Tail { axis: usize, sign: f64 },
    Ball { center: Vec<f64> },
}

/// Mixture proposal over `ℝ^N` concentrated on the strip complement.
#[derive(Debug, Clone)]
struct Mixture {
    comps: Vec<Component>,
    cum: Vec<f64>,
    weights: Vec<f64>,
    n: usize,
    k: usize,
    half: f64,
    lomax: f64,
    zeta: f64,
    rho: f64,
    ball_norm: f64,
}

impl Mixture {
    /// `balls` are `(center, relative weight)`.
    fn new(g: &Geometry, balls: Vec<(Point, f64)>) -> Self {
        let half = g.l / 2.0;
        let rho = g.l / 4.0;
        let mut comps = Vec::new();
        let mut weights = Vec::new();
        let balls: Vec<(Point, f64)> = balls
            .into_iter()
            .filter(|(c, _)| g.depth_in_strip(c) < rho)
            .collect();
        let ball_total: f64 = balls.iter().map(|b| b.1).sum();
        let tail_share = if balls.is_empty() { 1.0 } else { 0.5 };
        for axis in 0..g.kbar {
            for sign in [1.0, -1.0] {
                comps.push(Component::Tail { axis, sign });
                weights.push(tail_share / (2 * g.kbar) as f64);
            }
        }
        for (c, w) in balls {
            comps.push(Component::Ball { center: c.to_flat() });
            weights.push(0.5 * w / ball_total);
        }
        let mut cum = Vec::with_capacity(weights.len());
        let mut acc = 0.0;
        for w in &weights {
            acc += w;
            cum.push(acc);
        }
        Mixture {
            comps,
            cum,
            weights,
            n: g.n,
            k: g.k,
            half,
            lomax: half,
            zeta: half,
            rho,
            ball_norm: surface_area_unchecked(g.n) * rho * rho / 2.0,
        }
    }

    fn sample(&self, rng: &mut ChaCha8Rng, out: &mut [f64]) {
        let u: f64 = rng.random::<f64>() * self.cum[self.cum.len() - 1];
        let idx = self.cum.partition_point(|&c| c <= u).min(self.comps.len() - 1);
        match &self.comps[idx] {
            Component::Tail { axis, sign } => {
                let v: f64 = rng.random();
                let t = self.lomax * (1.0 / (1.0 - v) - 1.0);
                let mut rest = vec![0.0; self.n - 1];
                cauchy_sample(rng, self.n - 1, self.zeta, &mut rest);
                let a = self.k + axis;
                let mut it = rest.into_iter();
                for (i, o) in out.iter_mut().enumerate() {
                    *o = if i == a { sign * (self.half + t) } else { it.next().unwrap() };
                }
            }
            Component::Ball { center } => {
                let mut d2 = 0.0;
                for o in out.iter_mut() {
                    let z: f64 = rng.sample(StandardNormal);
                    *o = z;
                    d2 += z * z;
                }
                let v: f64 = rng.random();
                let t = self.rho * v.sqrt() / d2.sqrt();
                for (o, c) in out.iter_mut().zip(center) {
                    *o = c + t * *o;
                }
            }
        }
    }

    fn density(&self, xi: &[f64]) -> f64 {
        let nf = self.n as f64;
        let mut q = 0.0;
        for (c, w) in self.comps.iter().zip(&self.weights) {
            match c {
                Component::Tail { axis, sign } => {
                    let a = self.k + axis;
                    let v = sign * xi[a] - self.half;
                    if v < 0.0 {
                        continue;
                    }
                    let d2: f64 = xi
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| *i != a)
                        .map(|(_, x)| x * x)
                        .sum();
                    let lom = self.lomax / (v + self.lomax).powi(2);
                    q += w * lom * cauchy_log_density(d2, self.n - 1, self.zeta).exp();
                }
                Component::Ball { center } => {
                    let d2: f64 = xi.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum();
                    let t = d2.sqrt();
                    if t < self.rho && t > 0.0 {
                        q += w * t.powf(2.0 - nf) / self.ball_norm;
                    }
                }
            }
        }
        q
    }
}

/// Lattice vectors `p` with `|p| <= radius`, including `p = 0` first.
fn translates(g: &Geometry, radius: usize) -> Vec<Vec<i64>> {
    let mut v = vec![vec![0i64; g.kbar]];
    v.extend(lattice_points(g.kbar, radius as f64));
    v
}

fn pnorm(p: &[i64]) -> f64 {
    (p.iter().map(|v| v * v).sum::<i64>() as f64).sqrt()
}

/// `x - P_p`.
fn shifted(x: &Point, g: &Geometry, p: &[i64]) -> Point {
    x.sub(&g.translate(p))
}

/// Which source term of the complement integral to use.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Source {
    /// `W^{2♯-1}/|ξ¹|`.
    Value,
    /// `∂_i (W^{2♯-1})/|ξ¹|` for derivative index `i`.
    Derivative(usize),
}

fn source(xi: &Point, p: &BubbleParams, g: &Geometry, src: Source) -> f64 {
    let r = xi.y_norm();
    if r == 0.0 {
        return 0.0;
    }
    let w = w_eval(xi, p, g);
    match src {
        Source::Value => w.powf(g.power()) / r,
        Source::Derivative(i) => {
            g.power() * w.powf(g.power() - 1.0) * w_derivative(xi, p, g, i).unwrap_or(0.0) / r
        }
    }
}

/// MC estimate of `∫_{ℝ^N∖Ω} Σ_{p∈set} Γ(x - P_p, ξ) S(ξ) dξ`.
fn complement_integral(
    x: &Point,
    bp: &BubbleParams,
    g: &Geometry,
    set: &[Vec<i64>],
    cfg: &ProjectionConfig,
    src: Source,
) -> Result<McEstimate> {
    let centers: Vec<Point> = set.iter().map(|p| shifted(x, g, p)).collect();
    let balls: Vec<(Point, f64)> = set
        .iter()
        .zip(&centers)
        .map(|(p, c)| (c.clone(), (1.0 + pnorm(p)).powf(-(g.nf() + 1.0))))
        .collect();
    let mix = Mixture::new(g, balls);
    let flat: Vec<Vec<f64>> = centers.iter().map(|c| c.to_flat()).collect();
    let pref = g.kernel_prefactor();
    let e = -(g.nf() - 2.0) / 2.0;
    run_chunks(cfg.complement_samples, cfg.seed, |rng| {
        let mut v = vec![0.0; g.n];
        mix.sample(rng, &mut v);
        let xi = Point::from_flat(&v, g.k);
        if g.in_strip(&xi) {
            return 0.0;
        }
        let s = source(&xi, bp, g, src);
        if s == 0.0 {
            return 0.0;
        }
        let mut kern = 0.0;
        for c in &flat {
            let d2: f64 = c.iter().zip(&v).map(|(a, b)| (a - b) * (a - b)).sum();
            kern += d2.powf(e);
        }
        let q = mix.density(&v);
        if q <= 0.0 {
            return 0.0;
        }
        pref * kern * s / q
    })
}

/// `R_p(x)` for a single lattice vector `p`.
pub fn complement_correction(
    x: &Point,
    p: &BubbleParams,
    g: &Geometry,
    j: &[i64],
    cfg: &ProjectionConfig,
) -> Result<McEstimate> {
    p.validate(g)?;
    if j.len() != g.kbar {
        return Err(Error::Domain(format!("lattice index must have {} entries", g.kbar)));
    }
    complement_integral(x, p, g, &[j.to_vec()], cfg, Source::Value)
}

/// Bound on `Σ_{|p| > R} W(x - P_p)`, which dominates the omitted terms of the sum.
fn bubble_tail_bound(x: &Point, p: &BubbleParams, g: &Geometry, radius: usize) -> Result<f64> {
    let a = g.half_exp();
    let d = x.dist(&p.center(g));
    Ok(g.c_nk() * p.lambda.powf(-a) * omitted_translates_bound(g.nf() - 2.0, g.kbar, g.l, d, radius as f64)?)
}

fn bubble_sum(x: &Point, p: &BubbleParams, g: &Geometry, set: &[Vec<i64>], skip_origin: bool, src: Source) -> Result<f64> {
    let mut acc = 0.0;
    for q in set.iter().rev() {
        if skip_origin && q.iter().all(|v| *v == 0) {
            continue;
        }
        let xs = shifted(x, g, q);
        acc += match src {
            Source::Value => w_eval(&xs, p, g),
            Source::Derivative(i) => w_derivative(&xs, p, g, i)?,
        };
    }
    Ok(acc)
}

/// `Σ_{|p| <= radius} W(x - P_p)`, the upper side of the sandwich bound.
pub fn translate_sum(x: &Point, p: &BubbleParams, g: &Geometry, radius: usize) -> Result<f64> {
    bubble_sum(x, p, g, &translates(g, radius), false, Source::Value)
}

/// `0 <= PW <= ΣW` at one point, with slack from the reported errors.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SandwichRow {
    pub point: Point,
    pub pw: ProjectionValue,
    pub upper: f64,
    pub ok: bool,
}

pub fn sandwich_check(points: &[Point], p: &BubbleParams, g: &Geometry, cfg: &ProjectionConfig) -> Result<Vec<SandwichRow>> {
    points
        .iter()
        .map(|x| {
            let pw = pw_eval(x, p, g, cfg)?;
            let upper = translate_sum(x, p, g, cfg.lattice_radius)? + pw.tail_bound;
            let slack = 3.0 * pw.stat_error;
            Ok(SandwichRow {
                point: x.clone(),
                ok: pw.value >= -slack && pw.value <= upper + slack,
                pw,
                upper,
            })
        })
        .collect()
}

/// `|PW(x + L e_j) - PW(x)|` against `2(tail_bound + 3σ)` plus the rounding
/// caused by the shift itself.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PeriodicityRow {
    pub point: Point,
    /// Periodic direction, 1-based.
    pub direction: usize,
    pub residual: f64,
    pub tolerance: f64,
    pub ok: bool,
}

pub fn periodicity_check(x: &Point, p: &BubbleParams, g: &Geometry, cfg: &ProjectionConfig, direction: usize) -> Result<PeriodicityRow> {
    if direction == 0 || direction > g.kbar {
        return Err(Error::Domain(format!("periodic direction {direction} outside 1..={}", g.kbar)));
    }
    let a = pw_eval(x, p, g, cfg)?;
    let mut xs = x.clone();
    xs.z[direction - 1] += g.l;
    let b = pw_eval(&xs, p, g, cfg)?;
    // Shifting z by L perturbs it by about ε(|z| + L) in floating point.
    let eps = f64::EPSILON;
    let grad: f64 = (1..=g.h)
        .map(|i| w_derivative(x, p, g, i).map(f64::abs))
        .sum::<Result<f64>>()?;
    let rounding = 4.0 * eps * ((x.z[direction - 1].abs() + g.l) * grad + a.value.abs());
    let tolerance = 2.0 * (a.tail_bound.max(b.tail_bound) + 3.0 * a.stat_error.max(b.stat_error)) + rounding;
    let residual = (a.value - b.value).abs();
    Ok(PeriodicityRow {
        point: x.clone(),
        direction,
        residual,
        tolerance,
        ok: residual <= tolerance,
    })
}

/// `PW(x)` with statistical error of the complement part and a bound on the
/// omitted translates.
pub fn pw_eval(x: &Point, p: &BubbleParams, g: &Geometry, cfg: &ProjectionConfig) -> Result<ProjectionValue> {
    p.validate(g)?;
    let set = translates(g, cfg.lattice_radius);
    let w = bubble_sum(x, p, g, &set, false, Source::Value)?;
    let r = complement_integral(x, p, g, &set, cfg, Source::Value)?;
    Ok(ProjectionValue {
        value: w - r.estimate,
        stat_error: r.std_error,
        tail_bound: bubble_tail_bound(x, p, g, cfg.lattice_radius)?,
    })
}

/// `φ(x) = W(x) - PW(x)`, formed without cancelling the two bubble terms.
pub fn phi_eval(x: &Point, p: &BubbleParams, g: &Geometry, cfg: &ProjectionConfig) -> Result<ProjectionValue> {
    p.validate(g)?;
    let set = translates(g, cfg.lattice_radius);
    let w = bubble_sum(x, p, g, &set, true, Source::Value)?;
    let r = complement_integral(x, p, g, &set, cfg, Source::Value)?;
    Ok(ProjectionValue {
        value: r.estimate - w,
        stat_error: r.std_error,
        tail_bound: bubble_tail_bound(x, p, g, cfg.lattice_radius)?,
    })
}

fn derivative_tail(x: &Point, p: &BubbleParams, g: &Geometry, idx: usize, radius: usize) -> Result<f64> {
    let base = bubble_tail_bound(x, p, g, radius)?;
    let d = x.dist(&p.center(g));
    let sep = g.l * radius as f64 - d;
    // |Z_i| <= (N-2) W/|x - x̂| and |∂_λ W| <= (N-2)W/(2λ); doubled to cover the complement part.
    let f = if idx <= g.h {
        (g.nf() - 2.0) / sep
    } else {
        g.half_exp() / p.lambda
    };
    Ok(2.0 * f * base)
}

/// `∂_i PW(x)` for `i ∈ 1..=h` (`ẑ_i`) or `i = h+1` (`λ`).
pub fn pw_derivative(
    x: &Point,
    p: &BubbleParams,
    g: &Geometry,
    idx: usize,
    cfg: &ProjectionConfig,
) -> Result<ProjectionValue> {
    p.validate(g)?;
    crate::bubble::alpha(idx, g)?;
    let set = translates(g, cfg.lattice_radius);
    let w = bubble_sum(x, p, g, &set, false, Source::Derivative(idx))?;
    let r = complement_integral(x, p, g, &set, cfg, Source::Derivative(idx))?;
    Ok(ProjectionValue {
        value: w - r.estimate,
        stat_error: r.std_error,
        tail_bound: derivative_tail(x, p, g, idx, cfg.lattice_radius)?,
    })
}

/// `∂_i φ(x)`.
pub fn phi_derivative(
    x: &Point,
    p: &BubbleParams,
    g: &Geometry,
    idx: usize,
    cfg: &ProjectionConfig,
) -> Result<ProjectionValue> {
    p.validate(g)?;
    crate::bubble::alpha(idx, g)?;
    let set = translates(g, cfg.lattice_radius);
    let w = bubble_sum(x, p, g, &set, true, Source::Derivative(idx))?;
    let r = complement_integral(x, p, g, &set, cfg, Source::Derivative(idx))?;
    Ok(ProjectionValue {
        value: r.estimate - w,
        stat_error: r.std_error,
        tail_bound: derivative_tail(x, p, g, idx, cfg.lattice_radius)?,
    })
}

/// `Σ_{p≠0} Γ(x, x̂ + P_p)` over the full lattice, with its truncation bound.
pub fn lattice_kernel_sum(x: &Point, p: &BubbleParams, g: &Geometry, radius: f64) -> Result<(f64, f64)> {
    let c = p.center(g);
    let (v, t) = green_eval(x, &c, g, radius)?;
    Ok((v - gamma_kernel(x, &c, g)?, t))
}

/// The leading form of `φ`: `-(B/λ^{(N-2)/2}) Σ_{p≠0} Γ(x, x̂ + P_p)`.
pub fn phi_leading(x: &Point, p: &BubbleParams, g: &Geometry, b: f64) -> Result<f64> {
    let (s, _) = lattice_kernel_sum(x, p, g, 400.0)?;
    Ok(-b * p.lambda.powf(-g.half_exp()) * s)
}

/// One row of the expansion-residual table.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExpansionRow {
    #[serde(rename = "L")]
    pub l: f64,
    pub max_abs_e: f64,
    /// Statistical error of `E` at the maximizing sample.
    pub stat_error: f64,
    pub max_abs_phi: f64,
    pub argmax: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExpansionReport {
    pub lambda: f64,
    pub rows: Vec<ExpansionRow>,
    pub slope: f64,
    pub half_width: f64,
    /// Set when some row's residual is not 3σ above the Monte Carlo noise.
    pub inconclusive: bool,
}

/// Residual `E(x) = φ(x) + (B/λ^{(N-2)/2}) Σ_{p≠0} Γ(x, x̂ + P_p)` of the
/// leading-order expansion of `φ`, maximized over `x_samples` for each period.
pub fn phi_expansion_residual(
    p: &BubbleParams,
    g: &Geometry,
    cfg: &ProjectionConfig,
    x_samples: &[Point],
    l_grid: &[f64],
) -> Result<ExpansionReport> {
    if x_samples.is_empty() {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    let b = compute_b(g, &QuadratureSpec::default())?;
    let mut rows = Vec::new();
    let mut inconclusive = false;
    for &l in l_grid {
        let gl = g.with_period(l);
        let mut best = (0.0f64, 0.0f64, 0usize);
        let mut max_phi = 0.0f64;
        for (i, x) in x_samples.iter().enumerate() {
            let phi = phi_eval(x, p, &gl, cfg)?;
            let e = phi.value - phi_leading(x, p, &gl, b)?;
            if e.abs() > best.0 {
                best = (e.abs(), phi.stat_error, i);
            }
            max_phi = max_phi.max(phi.value.abs());
        }
        if best.0 < 3.0 * best.1 {
            inconclusive = true;
        }
        rows.push(ExpansionRow {
            l,
            max_abs_e: best.0,
            stat_error: best.1,
            max_abs_phi: max_phi,
            argmax: best.2,
        });
    }
    let fit = scaling_exponent_fit(&rows.iter().map(|r| (r.l, r.max_abs_e)).collect::<Vec<_>>())?;
    Ok(ExpansionReport {
        lambda: p.lambda,
        rows,
        slope: fit.exponent,
        half_width: fit.half_width,
        inconclusive,
    })
}

/// `n` seeded uniform points of the ball `|x - center| < radius` inside the strip.
pub fn ball_samples(g: &Geometry, center: &Point, radius: f64, n: usize, seed: u64) -> Vec<Point> {
    use rand::SeedableRng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c = center.to_flat();
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let v: Vec<f64> = (0..g.n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        let rad = radius * rng.random::<f64>().powf(1.0 / g.nf());
        let flat: Vec<f64> = v.iter().zip(&c).map(|(a, ci)| ci + a / norm * rad).collect();
        let x = Point::from_flat(&flat, g.k);
        if x.y_norm() > 0.0 && g.in_strip(&x) {
            out.push(x);
        }
    }
    out
}
