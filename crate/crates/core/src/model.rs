//! A concrete curvature function `M`.
//!
//! `M(x) = 1 + χ(|x_per|/δ) Σ_i a_i |x_per,i|^{β_i}` where `x_per` wraps the
//! periodic coordinates to the nearest integer image, so `M` is 1-periodic in
//! them and has the prescribed expansion with zero remainder on `B_{δ/2}`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Geometry, Point};

/// Lower clamp for `M`. Never active for a model that passes validation.
pub const M_FLOOR: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvatureModel {
    pub a: Vec<f64>,
    pub beta: Vec<f64>,
    pub delta: f64,
    pub kappa: f64,
}

/// Which coordinate block the minimal exponents live in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Block {
    Y,
    Z,
}

impl CurvatureModel {
    pub fn new(a: Vec<f64>, beta: Vec<f64>, delta: f64, kappa: f64) -> Self {
        CurvatureModel {
            a,
            beta,
            delta,
            kappa,
        }
    }

    /// The reference model for `N = 6, k = 4`.
    pub fn default_n6() -> Self {
        CurvatureModel {
            a: vec![1.0, 1.0, 1.0, 1.0, -1.0, 1.0],
            beta: vec![4.6, 4.6, 4.6, 4.6, 4.5, 4.6],
            delta: 0.5,
            kappa: 0.1,
        }
    }

    /// `β = min β_i`.
    pub fn beta_min(&self) -> f64 {
        self.beta.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `β_M = max β_i`.
    pub fn beta_max(&self) -> f64 {
        self.beta.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// `J = {j : β_j = β}` as 0-based flat indices.
    pub fn j_set(&self) -> Vec<usize> {
        let b = self.beta_min();
        (0..self.beta.len()).filter(|&j| self.beta[j] == b).collect()
    }

    pub fn sum_j_a(&self) -> f64 {
        self.j_set().iter().map(|&j| self.a[j]).sum()
    }

    /// Block containing `J`, or `None` if it straddles both.
    pub fn j_block(&self, g: &Geometry) -> Option<Block> {
        let j = self.j_set();
        if j.iter().all(|&i| i < g.k) {
            Some(Block::Y)
        } else if j.iter().all(|&i| i >= g.k) {
            Some(Block::Z)
        } else {
            None
        }
    }

    /// Returns a copy with every `a_i` multiplied by `t`.
    pub fn scaled(&self, t: f64) -> Self {
        CurvatureModel {
            a: self.a.iter().map(|v| v * t).collect(),
            ..self.clone()
        }
    }
}

/// Checks every hypothesis on `M`; violations are returned as data.
///
/// Errors only when the vector lengths do not match `N`.
pub fn validate_model(m: &CurvatureModel, g: &Geometry) -> Result<Vec<String>> {
    if m.a.len() != g.n || m.beta.len() != g.n {
        return Err(Error::Domain(format!(
            "model vectors must have length N = {}, got a: {}, beta: {}",
            g.n,
            m.a.len(),
            m.beta.len()
        )));
    }
    let mut v = Vec::new();
    let nf = g.nf();
    for (i, &a) in m.a.iter().enumerate() {
        if a == 0.0 || !a.is_finite() {
            v.push(format!("a_i != 0 fails at i = {}", i + 1));
        }
    }
    for (i, &b) in m.beta.iter().enumerate() {
        if !(b > nf - 2.0 && b < nf - 1.0) {
            v.push(format!(
                "β_i ∈ (N−2,N−1) fails at i = {}: {} ∉ ({}, {})",
                i + 1,
                b,
                nf - 2.0,
                nf - 1.0
            ));
        }
    }
    let (b, bm) = (m.beta_min(), m.beta_max());
    if bm > b * (1.0 + 1.0 / (nf - 2.0)) {
        v.push(format!("β_M <= β(1 + 1/(N-2)) fails: {bm} > {}", b * (1.0 + 1.0 / (nf - 2.0))));
    }
    if m.j_block(g).is_none() {
        v.push("J spans both blocks".to_string());
    }
    let sj = m.sum_j_a();
    if sj >= 0.0 {
        v.push(format!("Σ_J a_j < 0 fails: {sj}"));
    }
    if !(m.delta > 0.0 && m.delta <= 0.5) {
        v.push(format!("0 < δ <= 1/2 fails: δ = {}", m.delta));
    }
    if !(m.kappa > 0.0) {
        v.push(format!("κ > 0 fails: κ = {}", m.kappa));
    }
    let dip: f64 = m
        .a
        .iter()
        .zip(&m.beta)
        .filter(|(a, _)| **a < 0.0)
        .map(|(a, b)| a.abs() * m.delta.powf(*b))
        .sum();
    if 1.0 - dip <= M_FLOOR {
        v.push(format!("inf M > 0 fails: 1 - Σ_(a_i<0) |a_i| δ^β_i = {}", 1.0 - dip));
    }
    Ok(v)
}

/// Smooth cutoff: 1 on `[0, 1/2]`, 0 on `[1, ∞)`.
pub fn cutoff(t: f64) -> f64 {
    if t <= 0.5 {
        return 1.0;
    }
    if t >= 1.0 {
        return 0.0;
    }
    let u = 2.0 * (t - 0.5);
    let f = |x: f64| if x > 0.0 { (-1.0 / x).exp() } else { 0.0 };
    let a = f(1.0 - u);
    a / (a + f(u))
}

/// `x` with the periodic coordinates wrapped to `[-1/2, 1/2]`.
pub fn wrap_periodic(x: &Point, g: &Geometry) -> Point {
    let mut w = x.clone();
    for z in w.z.iter_mut().take(g.kbar) {
        *z -= z.round();
    }
    w
}

/// `M(x) - 1`, evaluated without forming `M` so tiny perturbations survive.
pub fn m_minus_one(x: &Point, m: &CurvatureModel, g: &Geometry) -> f64 {
    let w = wrap_periodic(x, g);
    let chi = cutoff(w.norm() / m.delta);
    if chi == 0.0 {
        return 0.0;
    }
    let mut acc = 0.0;
    for i in 0..g.n {
        acc += m.a[i] * w.coord(i).abs().powf(m.beta[i]);
    }
    chi * acc
}

pub fn m_eval(x: &Point, m: &CurvatureModel, g: &Geometry) -> f64 {
    (1.0 + m_minus_one(x, m, g)).max(M_FLOOR)
}

/// `(inf M, sup M)` bounds from `|a|` and `δ`.
pub fn m_bounds(m: &CurvatureModel) -> (f64, f64) {
    let (mut lo, mut hi) = (0.0, 0.0);
    for (a, b) in m.a.iter().zip(&m.beta) {
        let v = a.abs() * m.delta.powf(*b);
        if *a < 0.0 {
            lo += v;
        } else {
            hi += v;
        }
    }
    ((1.0 - lo).max(M_FLOOR), 1.0 + hi)
}
