//! Dimensions, the Newtonian kernel and the periodic lattice.
//!
//! Coordinates are split as `x = (y, z)` with `y ∈ ℝ^k`, `z ∈ ℝ^h`. The first
//! `kbar` entries of `z` are periodic with period `L`; lattice translates are
//! `P_L = L·(p, 0)` for integer vectors `p ∈ ℤ^kbar`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};

/// Dimensional data of the strip problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Geometry {
    #[serde(rename = "N")]
    pub n: usize,
    pub k: usize,
    pub h: usize,
    pub kbar: usize,
    #[serde(rename = "L")]
    pub l: f64,
}

impl Geometry {
    pub fn new(n: usize, k: usize, h: usize, kbar: usize, l: f64) -> Self {
        Geometry { n, k, h, kbar, l }
    }

    /// Same dimensions, different period.
    pub fn with_period(&self, l: f64) -> Self {
        Geometry { l, ..self.clone() }
    }

    pub fn nf(&self) -> f64 {
        self.n as f64
    }

    /// `(N-2)/2`, the decay half-exponent of the bubble.
    pub fn half_exp(&self) -> f64 {
        (self.nf() - 2.0) / 2.0
    }

    /// `2♯ = 2(N-1)/(N-2)`.
    pub fn two_sharp(&self) -> f64 {
        2.0 * (self.nf() - 1.0) / (self.nf() - 2.0)
    }

    /// `2♯ - 1 = N/(N-2)`, the power of the nonlinearity.
    pub fn power(&self) -> f64 {
        self.nf() / (self.nf() - 2.0)
    }

    /// `C_{N,k} = [(N-2)(k-1)]^{(N-2)/2}`.
    pub fn c_nk(&self) -> f64 {
        ((self.nf() - 2.0) * (self.k as f64 - 1.0)).powf(self.half_exp())
    }

    /// `1/((N-2) ω_{N-1})`, the prefactor of `Γ`.
    pub fn kernel_prefactor(&self) -> f64 {
        1.0 / ((self.nf() - 2.0) * surface_area_unchecked(self.n))
    }

    pub fn origin(&self) -> Point {
        Point::zeros(self.k, self.h)
    }

    /// Embeds an integer lattice vector as the translate `P_L`.
    pub fn translate(&self, p: &[i64]) -> Point {
        let mut t = self.origin();
        for (i, &pi) in p.iter().enumerate() {
            t.z[i] = self.l * pi as f64;
        }
        t
    }

    /// Whether `x` lies in the closed strip `|z¹_i| ≤ L/2`.
    pub fn in_strip(&self, x: &Point) -> bool {
        x.z[..self.kbar].iter().all(|z| z.abs() <= self.l / 2.0)
    }

    /// Distance from `x` to the complement of the strip (0 outside).
    pub fn depth_in_strip(&self, x: &Point) -> f64 {
        x.z[..self.kbar]
            .iter()
            .map(|z| (self.l / 2.0 - z.abs()).max(0.0))
            .fold(f64::INFINITY, f64::min)
    }
}

/// A point `x = (y, z)` of `ℝ^N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub y: Vec<f64>,
    pub z: Vec<f64>,
}

impl Point {
    pub fn new(y: Vec<f64>, z: Vec<f64>) -> Self {
        Point { y, z }
    }

    pub fn zeros(k: usize, h: usize) -> Self {
        Point {
            y: vec![0.0; k],
            z: vec![0.0; h],
        }
    }

    /// Splits a flat `N`-vector into `(y, z)`.
    pub fn from_flat(v: &[f64], k: usize) -> Self {
        Point {
            y: v[..k].to_vec(),
            z: v[k..].to_vec(),
        }
    }

    pub fn to_flat(&self) -> Vec<f64> {
        self.y.iter().chain(self.z.iter()).copied().collect()
    }

    pub fn dim(&self) -> usize {
        self.y.len() + self.z.len()
    }

    /// Coordinate `i` in the flat 0-based indexing `(y_1..y_k, z_1..z_h)`.
    pub fn coord(&self, i: usize) -> f64 {
        if i < self.y.len() {
            self.y[i]
        } else {
            self.z[i - self.y.len()]
        }
    }

    pub fn coord_mut(&mut self, i: usize) -> &mut f64 {
        let k = self.y.len();
        if i < k {
            &mut self.y[i]
        } else {
            &mut self.z[i - k]
        }
    }

    pub fn y_norm(&self) -> f64 {
        norm(&self.y)
    }

    pub fn norm(&self) -> f64 {
        self.y
            .iter()
            .chain(self.z.iter())
            .map(|v| v * v)
            .sum::<f64>()
            .sqrt()
    }

    pub fn sub(&self, o: &Point) -> Point {
        Point {
            y: self.y.iter().zip(&o.y).map(|(a, b)| a - b).collect(),
            z: self.z.iter().zip(&o.z).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn add(&self, o: &Point) -> Point {
        Point {
            y: self.y.iter().zip(&o.y).map(|(a, b)| a + b).collect(),
            z: self.z.iter().zip(&o.z).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn dist(&self, o: &Point) -> f64 {
        self.sub(o).norm()
    }
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

/// Full list of violated hypotheses; empty means valid.
pub fn validate_geometry(g: &Geometry) -> Vec<String> {
    let mut v = Vec::new();
    if g.n != g.k + g.h {
        v.push(format!("N = k + h fails: {} != {} + {}", g.n, g.k, g.h));
    }
    if g.n < 5 {
        v.push(format!("N >= 5 fails: N = {}", g.n));
    }
    if g.h < 1 || g.h + 1 > g.k {
        v.push(format!("1 <= h <= k-1 fails: h = {}, k = {}", g.h, g.k));
    }
    if g.kbar < 1 || g.kbar > g.h {
        v.push(format!("1 <= kbar <= h fails: kbar = {}, h = {}", g.kbar, g.h));
    }
    if 2 * g.kbar + 2 >= g.n {
        v.push(format!(
            "kbar < (N-2)/2 fails: {} ≮ {}",
            g.kbar,
            fmt_num((g.nf() - 2.0) / 2.0)
        ));
    }
    if !(g.l > 0.0 && g.l.is_finite()) {
        v.push(format!("L > 0 fails: L = {}", g.l));
    }
    v
}

fn fmt_num(x: f64) -> String {
    if x.fract() == 0.0 {
        format!("{}", x as i64)
    } else {
        format!("{x}")
    }
}

/// Area of the unit sphere `S^{d-1} ⊂ ℝ^d`.
pub fn surface_area(d: usize) -> Result<f64> {
    if d < 1 {
        return Err(Error::Domain("surface_area needs d >= 1".into()));
    }
    Ok(surface_area_unchecked(d))
}

pub(crate) fn surface_area_unchecked(d: usize) -> f64 {
    let h = d as f64 / 2.0;
    2.0 * PI.powf(h) / gamma(h)
}

/// Newtonian kernel `1/((N-2) ω_{N-1} |x-ξ|^{N-2})`.
pub fn gamma_kernel(x: &Point, xi: &Point, g: &Geometry) -> Result<f64> {
    let d = x.dist(xi);
    if d == 0.0 {
        return Err(Error::Singular("Γ(x, ξ) at x = ξ".into()));
    }
    Ok(g.kernel_prefactor() * d.powf(-(g.nf() - 2.0)))
}

/// Result of a lattice sum `Σ_{p ≠ 0} |p|^{-s}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticeSumResult {
    /// Partial sum plus the midpoint of the certified tail interval.
    pub value: f64,
    /// Half-width of the certified tail interval; `|value - exact| <= tail_bound`.
    pub tail_bound: f64,
    /// Number of lattice points summed.
    pub terms_used: usize,
    /// The bare partial sum over `0 < |p| <= radius`.
    pub partial_sum: f64,
    pub radius: f64,
}

/// Integer points of `ℤ^dim` with `0 < |p| <= radius`, ordered by norm and then
/// lexicographically.
pub fn lattice_points(dim: usize, radius: f64) -> Vec<Vec<i64>> {
    let mut pts = Vec::new();
    let m = radius.floor() as i64;
    let mut cur = vec![0i64; dim];
    collect_points(dim, 0, m, radius * radius, 0, &mut cur, &mut pts);
    pts.sort_by(|a, b| {
        let na: i64 = a.iter().map(|v| v * v).sum();
        let nb: i64 = b.iter().map(|v| v * v).sum();
        na.cmp(&nb).then_with(|| a.cmp(b))
    });
    pts
}

fn collect_points(
    dim: usize,
    depth: usize,
    m: i64,
    r2: f64,
    acc: i64,
    cur: &mut Vec<i64>,
    out: &mut Vec<Vec<i64>>,
) {
    if depth == dim {
        if acc > 0 {
            out.push(cur.clone());
        }
        return;
    }
    for v in -m..=m {
        let a = acc + v * v;
        if a as f64 > r2 {
            continue;
        }
        cur[depth] = v;
        collect_points(dim, depth + 1, m, r2, a, cur, out);
    }
    cur[depth] = 0;
}

fn binom(n: usize, m: usize) -> f64 {
    (0..m).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `ω ∫_{u0}^∞ (u + shift)^{d-1} u^{-s} du` in closed form.
fn radial_tail(s: f64, d: usize, u0: f64, shift: f64) -> f64 {
    let w = surface_area_unchecked(d);
    let mut acc = 0.0;
    for m in 0..d {
        let e = m as f64 - s + 1.0;
        acc += binom(d - 1, m) * shift.powi((d - 1 - m) as i32) * u0.powf(e) / (-e);
    }
    w * acc
}

/// Certified enclosure `[lo, hi]` of `Σ_{|p| > radius} |p|^{-s}` over `ℤ^dim`.
///
/// Each lattice point owns the unit cube around it; with `c = √dim/2` the cube
/// integrals of `(|x| ∓ c)^{-s}` bracket the point values.
pub fn lattice_tail_bounds(s: f64, dim: usize, radius: f64) -> Result<(f64, f64)> {
    if s <= dim as f64 {
        return Err(Error::Divergent { exponent: s, dim });
    }
    let c = (dim as f64).sqrt() / 2.0;
    if radius <= 2.0 * c {
        return Err(Error::Domain(format!(
            "lattice tail needs radius > {}, got {radius}",
            2.0 * c
        )));
    }
    let hi = radial_tail(s, dim, radius - 2.0 * c, c);
    let lo = radial_tail(s, dim, radius + 2.0 * c, -c);
    Ok((lo.max(0.0), hi))
}

/// Lattice sum truncated at a fixed radius with certified tail correction.
pub fn lattice_sum_to_radius(s: f64, kbar: usize, radius: f64) -> Result<LatticeSumResult> {
    if kbar == 0 {
        return Err(Error::Domain("lattice dimension must be >= 1".into()));
    }
    if s <= kbar as f64 {
        return Err(Error::Divergent {
            exponent: s,
            dim: kbar,
        });
    }
    let (lo, hi) = lattice_tail_bounds(s, kbar, radius)?;
    let (partial, terms) = if kbar == 1 {
        // Summed from the far end so the small terms accumulate first.
        let m = radius.floor() as i64;
        let mut acc = 0.0;
        for n in (1..=m).rev() {
            acc += 2.0 * (n as f64).powf(-s);
        }
        (acc, 2 * m as usize)
    } else {
        let pts = lattice_points(kbar, radius);
        let acc: f64 = pts
            .iter()
            .rev()
            .map(|p| {
                let r2: i64 = p.iter().map(|v| v * v).sum();
                (r2 as f64).powf(-s / 2.0)
            })
            .sum();
        (acc, pts.len())
    };
    Ok(LatticeSumResult {
        value: partial + 0.5 * (lo + hi),
        tail_bound: 0.5 * (hi - lo),
        terms_used: terms,
        partial_sum: partial,
        radius,
    })
}

/// Lattice sum over all nonzero points of `ℤ^kbar` (both members of each
/// `±p` pair), so `kbar = 1` gives `2ζ(s)`.
///
/// The radius is doubled until the certified half-width falls below
/// `1e-13·value` or about four million points have been summed.
pub fn lattice_sum(s: f64, kbar: usize) -> Result<LatticeSumResult> {
    if kbar == 0 {
        return Err(Error::Domain("lattice dimension must be >= 1".into()));
    }
    if s <= kbar as f64 {
        return Err(Error::Divergent {
            exponent: s,
            dim: kbar,
        });
    }
    let budget = 4.0e6_f64;
    let mut radius = 16.0;
    loop {
        let res = lattice_sum_to_radius(s, kbar, radius)?;
        let next_cost = (4.0 * radius + 1.0).powi(kbar as i32);
        if res.tail_bound <= 1e-13 * res.value || next_cost > budget {
            return Ok(res);
        }
        radius *= 2.0;
    }
}

/// Periodic Green's function truncated to lattice points `|p| <= radius`.
///
/// Returns `(value, tail_bound)` where `tail_bound` bounds the omitted translates.
pub fn green_eval(x: &Point, xi: &Point, g: &Geometry, radius: f64) -> Result<(f64, f64)> {
    let d = x.sub(xi);
    let mut acc = gamma_kernel(x, xi, g)?;
    let pref = g.kernel_prefactor();
    let e = g.nf() - 2.0;
    for p in lattice_points(g.kbar, radius) {
        let mut v = d.clone();
        for (i, &pi) in p.iter().enumerate() {
            v.z[i] -= g.l * pi as f64;
        }
        let r = v.norm();
        if r == 0.0 {
            return Err(Error::Singular(format!(
                "x coincides with translate {p:?} of ξ"
            )));
        }
        acc += pref * r.powf(-e);
    }
    let tail = pref * omitted_translates_bound(e, g.kbar, g.l, d.norm(), radius)?;
    Ok((acc, tail))
}

/// Bound on `Σ_{|p| > radius} |v - L p|^{-e}` given `|v| = dist`.
///
/// Uses `|v - L p| >= L|p|(1 - dist/(L·radius))`.
pub fn omitted_translates_bound(e: f64, kbar: usize, l: f64, dist: f64, radius: f64) -> Result<f64> {
    let shrink = 1.0 - dist / (l * radius);
    if shrink <= 0.0 {
        return Err(Error::Domain(format!(
            "truncation radius {radius} too small for separation {dist} at period {l}"
        )));
    }
    let (_, hi) = lattice_tail_bounds(e, kbar, radius)?;
    Ok((l * shrink).powf(-e) * hi)
}
