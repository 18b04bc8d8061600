//! Seeded importance-sampling Monte Carlo.
//!
//! Samples are drawn in fixed-size chunks, each with its own ChaCha stream
//! derived from `(seed, chunk)`, and chunk statistics are merged in chunk
//! order. Results are therefore identical for any rayon thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use super::QuadratureSpec;
use crate::error::{Error, Result};
use crate::geometry::{Geometry, Point};

pub const CHUNK: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub samples: usize,
}

/// Running mean and second central moment.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Moments {
    n: f64,
    mean: f64,
    m2: f64,
}

impl Moments {
    pub(crate) fn push(&mut self, x: f64) {
        self.n += 1.0;
        let d = x - self.mean;
        self.mean += d / self.n;
        self.m2 += d * (x - self.mean);
    }

    pub(crate) fn merge(self, o: Moments) -> Moments {
        if o.n == 0.0 {
            return self;
        }
        if self.n == 0.0 {
            return o;
        }
        let n = self.n + o.n;
        let d = o.mean - self.mean;
        Moments {
            n,
            mean: self.mean + d * o.n / n,
            m2: self.m2 + o.m2 + d * d * self.n * o.n / n,
        }
    }

    pub(crate) fn estimate(&self) -> McEstimate {
        let var = if self.n > 1.0 { self.m2 / (self.n - 1.0) } else { 0.0 };
        McEstimate {
            estimate: self.mean,
            std_error: (var / self.n).sqrt(),
            samples: self.n as usize,
        }
    }
}

/// Runs `n` draws of `sample` over deterministic chunked streams.
pub(crate) fn run_chunks<S>(n: usize, seed: u64, sample: S) -> Result<McEstimate>
where
    S: Fn(&mut ChaCha8Rng) -> f64 + Sync,
{
    if n == 0 {
        return Err(Error::DegenerateSampling("zero samples requested".into()));
    }
    let chunks = n.div_ceil(CHUNK);
    let parts: Vec<Moments> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let count = CHUNK.min(n - c * CHUNK);
            let mut m = Moments::default();
            for _ in 0..count {
                m.push(sample(&mut rng));
            }
            m
        })
        .collect();
    let total = parts.into_iter().fold(Moments::default(), Moments::merge);
    let est = total.estimate();
    if !est.estimate.is_finite() || !est.std_error.is_finite() {
        return Err(Error::DegenerateSampling("non-finite sample weights".into()));
    }
    Ok(est)
}

/// Isotropic multivariate Student-t proposal with one degree of freedom.
#[derive(Debug, Clone, PartialEq)]
pub struct Proposal {
    pub center: Point,
    pub scale: f64,
}

impl Proposal {
    /// Centered at the bubble's concentration point with width `1/λ`.
    pub fn for_bubble(center: Point, lambda: f64) -> Self {
        Proposal {
            center,
            scale: 1.0 / lambda,
        }
    }
}

/// Draws `c + scale·t_1` in `dim` dimensions.
pub(crate) fn cauchy_sample(rng: &mut ChaCha8Rng, dim: usize, scale: f64, out: &mut [f64]) {
    let chi: f64 = rng.sample::<f64, _>(StandardNormal);
    let inv = scale / chi.abs();
    for o in out.iter_mut().take(dim) {
        let z: f64 = rng.sample(StandardNormal);
        *o = z * inv;
    }
}

/// Log density of the isotropic `t_1` in `dim` dimensions at squared distance `d2`.
pub(crate) fn cauchy_log_density(d2: f64, dim: usize, scale: f64) -> f64 {
    let df = dim as f64;
    ln_gamma((df + 1.0) / 2.0)
        - (df + 1.0) / 2.0 * std::f64::consts::PI.ln()
        - df * scale.ln()
        - (df + 1.0) / 2.0 * (1.0 + d2 / (scale * scale)).ln()
}

/// Importance-sampled `∫_{ℝ^N} f(ξ)/|ξ¹| dξ`.
pub fn mc_oracle<F>(f: F, g: &Geometry, proposal: &Proposal, spec: &QuadratureSpec) -> Result<McEstimate>
where
    F: Fn(&Point) -> f64 + Sync,
{
    let n = g.n;
    let c = proposal.center.to_flat();
    run_chunks(spec.mc_samples, spec.mc_seed, |rng| {
        let mut v = vec![0.0; n];
        cauchy_sample(rng, n, proposal.scale, &mut v);
        let d2: f64 = v.iter().map(|a| a * a).sum();
        for (vi, ci) in v.iter_mut().zip(&c) {
            *vi += ci;
        }
        let x = Point::from_flat(&v, g.k);
        let r = x.y_norm();
        if r == 0.0 {
            return 0.0;
        }
        let val = f(&x);
        if val == 0.0 {
            return 0.0;
        }
        val / r * (-cauchy_log_density(d2, n, proposal.scale)).exp()
    })
}

/// Like [`mc_oracle`] with antithetic pairs mirrored in coordinate `axis`
/// (flat 0-based) about the proposal center.
///
/// For integrands odd under that mirror the estimate is exactly zero.
pub fn mc_oracle_mirrored<F>(
    f: F,
    g: &Geometry,
    proposal: &Proposal,
    spec: &QuadratureSpec,
    axis: usize,
) -> Result<McEstimate>
where
    F: Fn(&Point) -> f64 + Sync,
{
    let n = g.n;
    let c = proposal.center.to_flat();
    run_chunks(spec.mc_samples.div_ceil(2), spec.mc_seed, |rng| {
        let mut v = vec![0.0; n];
        cauchy_sample(rng, n, proposal.scale, &mut v);
        let d2: f64 = v.iter().map(|a| a * a).sum();
        let w = (-cauchy_log_density(d2, n, proposal.scale)).exp();
        let mut m = v.clone();
        m[axis] = -m[axis];
        let mut acc = 0.0;
        for u in [&mut v, &mut m] {
            for (ui, ci) in u.iter_mut().zip(&c) {
                *ui += ci;
            }
            let x = Point::from_flat(u, g.k);
            let r = x.y_norm();
            if r > 0.0 {
                acc += f(&x) / r;
            }
        }
        0.5 * acc * w
    })
}

/// Monte Carlo average of `|θ_1|^β` over uniform points of `S^{d-1}`.
pub fn sphere_moment_mc(beta: f64, d: usize, samples: usize, seed: u64) -> Result<McEstimate> {
    run_chunks(samples, seed, |rng| {
        let mut acc = 0.0;
        let mut first = 0.0;
        for i in 0..d {
            let z: f64 = rng.sample(StandardNormal);
            if i == 0 {
                first = z;
            }
            acc += z * z;
        }
        (first * first / acc).powf(beta / 2.0)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bubble::{w_eval, BubbleParams};
    use crate::quad::{compute_b, sphere_moment};

    fn g() -> Geometry {
        Geometry::new(6, 4, 2, 1, 10.0)
    }

    fn spec(n: usize) -> QuadratureSpec {
        QuadratureSpec {
            mc_samples: n,
            ..Default::default()
        }
    }

    #[test]
    fn zero_integrand() {
        let g = g();
        let p = Proposal::for_bubble(g.origin(), 1.0);
        let e = mc_oracle(|_| 0.0, &g, &p, &spec(10_000)).unwrap();
        assert_eq!((e.estimate, e.std_error), (0.0, 0.0));
        assert!(mc_oracle(|_| 1.0, &g, &p, &spec(0)).is_err());
    }

    #[test]
    fn deterministic_under_seed() {
        let g = g();
        let b = BubbleParams::centered(2, 1.0);
        let p = Proposal::for_bubble(g.origin(), 1.0);
        let f = |x: &Point| w_eval(x, &b, &g).powf(1.5);
        let a = mc_oracle(f, &g, &p, &spec(20_000)).unwrap();
        let c = mc_oracle(f, &g, &p, &spec(20_000)).unwrap();
        assert_eq!(a.estimate.to_bits(), c.estimate.to_bits());
        assert_eq!(a.std_error.to_bits(), c.std_error.to_bits());
    }

    #[test]
    fn b_within_three_sigma() {
        let g = g();
        let b = BubbleParams::centered(2, 1.0);
        let p = Proposal::for_bubble(g.origin(), 1.0);
        let e = mc_oracle(|x| w_eval(x, &b, &g).powf(1.5), &g, &p, &spec(200_000)).unwrap();
        let q = compute_b(&g, &QuadratureSpec::default()).unwrap();
        assert!((e.estimate - q).abs() <= 3.0 * e.std_error, "{e:?} vs {q}");
        assert!(e.std_error < 0.02 * q);
    }

    #[test]
    fn odd_integrand_vanishes_with_mirroring() {
        let g = g();
        let b = BubbleParams::centered(2, 1.0);
        let p = Proposal::for_bubble(g.origin(), 1.0);
        let e = mc_oracle_mirrored(|x| x.z[0] * w_eval(x, &b, &g), &g, &p, &spec(10_000), 4).unwrap();
        assert_eq!(e.estimate, 0.0);
    }

    #[test]
    fn sphere_moment_oracle() {
        let e = sphere_moment_mc(4.5, 4, 200_000, 7).unwrap();
        let want = sphere_moment(4.5, 4).unwrap();
        assert!((e.estimate - want).abs() <= 3.0 * e.std_error, "{e:?} vs {want}");
    }

    #[test]
    fn moments_merge_matches_single_pass() {
        let xs: Vec<f64> = (0..100).map(|i| (i as f64 * 0.37).sin()).collect();
        let mut all = Moments::default();
        xs.iter().for_each(|&x| all.push(x));
        let mut a = Moments::default();
        let mut b = Moments::default();
        xs[..37].iter().for_each(|&x| a.push(x));
        xs[37..].iter().for_each(|&x| b.push(x));
        let m = a.merge(b);
        assert!((m.mean - all.mean).abs() < 1e-15);
        assert!((m.m2 - all.m2).abs() < 1e-12);
    }
}
