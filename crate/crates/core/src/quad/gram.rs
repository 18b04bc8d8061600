//! Gram matrix `∫ W^{2♯-2} Z_i Z_j/|ξ¹|` of the parameter derivatives.

use serde::{Deserialize, Serialize};

use super::{integrate_cylindrical_with, CylOptions, QuadratureSpec, Weight};
use crate::bubble::{w_derivative, w_eval, w_lambda, w_rs, w_s, BubbleParams};
use crate::error::{Error, Result};
use crate::geometry::{Geometry, Point};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GramMatrix {
    pub entries: Vec<Vec<f64>>,
    pub lambda: f64,
}

impl GramMatrix {
    pub fn diag(&self, i: usize) -> f64 {
        self.entries[i - 1][i - 1]
    }
}

fn gram_integrand(x: &Point, p: &BubbleParams, g: &Geometry, i: usize, j: usize) -> Result<f64> {
    let w = w_eval(x, p, g);
    Ok(w.powf(g.power() - 1.0) * w_derivative(x, p, g, i)? * w_derivative(x, p, g, j)? / x.y_norm())
}

/// Mirror of `x` that flips `Z_m` for the translation index `m` and fixes the rest.
fn mirror(x: &Point, p: &BubbleParams, m: usize) -> Point {
    let mut y = x.clone();
    y.z[m - 1] = 2.0 * p.zhat[m - 1] - x.z[m - 1];
    y
}

/// Checks at a few fixed points that the `(i, j)` integrand is odd under a
/// reflection, which forces the entry to vanish.
fn assert_parity(p: &BubbleParams, g: &Geometry, i: usize, j: usize) -> Result<()> {
    let m = if i <= g.h { i } else { j };
    let probes = [
        [0.3, -0.2, 0.1, 0.7, 0.4, -0.9],
        [1.1, 0.05, -0.4, 0.2, -0.3, 0.6],
        [0.02, 0.3, 0.5, -0.1, 2.0, 0.25],
    ];
    for pr in &probes {
        let mut x = g.origin();
        for d in 0..g.n {
            *x.coord_mut(d) = pr[d % pr.len()] / p.lambda;
        }
        for (zi, zh) in x.z.iter_mut().zip(&p.zhat) {
            *zi += zh;
        }
        let a = gram_integrand(&x, p, g, i, j)?;
        let b = gram_integrand(&mirror(&x, p, m), p, g, i, j)?;
        if (a + b).abs() > 1e-12 * a.abs().max(b.abs()) {
            return Err(Error::Domain(format!(
                "Gram entry ({i},{j}) integrand is not odd under reflection: {a} vs {b}"
            )));
        }
    }
    Ok(())
}

/// All `(h+1)²` entries. Off-diagonal entries are exact zeros after a parity
/// check; diagonal entries are reduced 2D integrals at length scale `1/λ`.
pub fn gram_matrix(p: &BubbleParams, g: &Geometry, spec: &QuadratureSpec) -> Result<GramMatrix> {
    p.validate(g)?;
    let n = g.h + 1;
    let lam = p.lambda;
    let opts = CylOptions::scaled(1.0 / lam);
    let q = g.power() - 1.0;
    let mut e = vec![vec![0.0; n]; n];
    let translation = integrate_cylindrical_with(
        |r, s| {
            let ws = w_s(r, s, lam, g);
            w_rs(r, s, lam, g).powf(q) * ws * ws
        },
        g,
        Weight::Hardy,
        spec,
        &opts,
    )? / g.h as f64;
    let dilation = integrate_cylindrical_with(
        |r, s| {
            let wl = w_lambda(r, s, lam, g);
            w_rs(r, s, lam, g).powf(q) * wl * wl
        },
        g,
        Weight::Hardy,
        spec,
        &opts,
    )?;
    for i in 1..=n {
        for j in 1..=n {
            if i == j {
                e[i - 1][j - 1] = if i <= g.h { translation } else { dilation };
            } else if i < j {
                assert_parity(p, g, i, j)?;
            }
        }
    }
    Ok(GramMatrix {
        entries: e,
        lambda: lam,
    })
}
