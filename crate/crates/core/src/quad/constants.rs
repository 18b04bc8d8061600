//! The constants `B`, `D`, `F`, `B_i` as reduced 2D integrals.

use serde::{Deserialize, Serialize};

use super::{coordinate_moment, integrate_cylindrical, sphere_moment, QuadratureSpec, Weight};
use crate::bubble::{psi0_rs, w_rs, w_s};
use crate::error::{Error, Result};
use crate::geometry::Geometry;
use crate::model::{Block, CurvatureModel};

/// `B = ∫ W_{0,1}^{2♯-1}/|ξ¹|`.
pub fn compute_b(g: &Geometry, spec: &QuadratureSpec) -> Result<f64> {
    let p = g.power();
    integrate_cylindrical(|r, s| w_rs(r, s, 1.0, g).powf(p), g, Weight::Hardy, spec)
}

/// `D = -∫ W_{0,1}^{2♯-2} ψ₀/|ξ¹|`.
pub fn compute_d(g: &Geometry, spec: &QuadratureSpec) -> Result<f64> {
    let p = g.power() - 1.0;
    let v = integrate_cylindrical(
        |r, s| w_rs(r, s, 1.0, g).powf(p) * psi0_rs(r, s, g),
        g,
        Weight::Hardy,
        spec,
    )?;
    Ok(-v)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FRoute {
    /// `-∫ |ξ_i|^β W^{2♯-1} ψ₀/|ξ¹|`.
    Defining,
    /// `(β/2♯) ∫ |ξ_i|^β W^{2♯}/|ξ¹|`.
    ByParts,
}

fn block_of(i: usize, g: &Geometry) -> Result<(Block, usize)> {
    if i == 0 || i > g.n {
        return Err(Error::Domain(format!("coordinate index {i} outside 1..={}", g.n)));
    }
    Ok(if i <= g.k {
        (Block::Y, i)
    } else {
        (Block::Z, i - g.k)
    })
}

/// `F` for the coordinate `ξ_i` (1-based flat index) and exponent `beta`.
///
/// The angular factor comes from [`coordinate_moment`] for the in-block
/// position of `i`, so different indices of one block go through different
/// angular integrals.
pub fn compute_f_at(g: &Geometry, beta: f64, i: usize, spec: &QuadratureSpec, route: FRoute) -> Result<f64> {
    let (block, j) = block_of(i, g)?;
    let d = match block {
        Block::Y => g.k,
        Block::Z => g.h,
    };
    let moment = coordinate_moment(beta, d, j, spec.rel_tol * 1e-3)?;
    let pick = move |r: f64, s: f64| match block {
        Block::Y => r,
        Block::Z => s,
    };
    let p = g.power();
    let radial = match route {
        FRoute::Defining => -integrate_cylindrical(
            |r, s| pick(r, s).powf(beta) * w_rs(r, s, 1.0, g).powf(p) * psi0_rs(r, s, g),
            g,
            Weight::Hardy,
            spec,
        )?,
        FRoute::ByParts => {
            beta / g.two_sharp()
                * integrate_cylindrical(
                    |r, s| pick(r, s).powf(beta) * w_rs(r, s, 1.0, g).powf(p + 1.0),
                    g,
                    Weight::Hardy,
                    spec,
                )?
        }
    };
    Ok(moment * radial)
}

/// Index used for `F`: the first coordinate of the block holding `J`.
pub fn f_index(g: &Geometry, m: &CurvatureModel) -> Result<usize> {
    match m.j_block(g) {
        Some(Block::Y) => Ok(1),
        Some(Block::Z) => Ok(g.k + 1),
        None => Err(Error::Domain("J spans both blocks; F is undefined".into())),
    }
}

/// `F` at the model's minimal exponent `β`.
pub fn compute_f(g: &Geometry, m: &CurvatureModel, spec: &QuadratureSpec) -> Result<f64> {
    compute_f_at(g, m.beta_min(), f_index(g, m)?, spec, FRoute::Defining)
}

/// `(defining route, by-parts route)` for the model's `F`.
pub fn compute_f_two_route(g: &Geometry, m: &CurvatureModel, spec: &QuadratureSpec) -> Result<(f64, f64)> {
    let i = f_index(g, m)?;
    let b = m.beta_min();
    Ok((
        compute_f_at(g, b, i, spec, FRoute::Defining)?,
        compute_f_at(g, b, i, spec, FRoute::ByParts)?,
    ))
}

fn bi_params(g: &Geometry, m: &CurvatureModel, i: usize) -> Result<(f64, f64)> {
    if i == 0 || i > g.h {
        return Err(Error::Domain(format!("B_i index {i} outside 1..={}", g.h)));
    }
    let (a, b) = (m.a[g.k + i - 1], m.beta[g.k + i - 1]);
    if b <= 2.0 {
        return Err(Error::Domain(format!("B_i needs β_(k+i) > 2, got {b}")));
    }
    Ok((a, b))
}

/// `B_i = a_{k+i} β_{k+i} ∫ |ξ_{k+i}|^{β-2} ξ_{k+i} W^{2♯-1} ∂_{k+i}W/|ξ¹|`.
pub fn compute_bi(g: &Geometry, m: &CurvatureModel, i: usize, spec: &QuadratureSpec) -> Result<f64> {
    let (a, b) = bi_params(g, m, i)?;
    let p = g.power();
    // |t|^β ∂_t W / t·t… reduces to M(β,h) s^{β-1} W^{2♯-1} ∂_s W.
    let v = integrate_cylindrical(
        |r, s| s.powf(b - 1.0) * w_rs(r, s, 1.0, g).powf(p) * w_s(r, s, 1.0, g),
        g,
        Weight::Hardy,
        spec,
    )?;
    Ok(a * b * sphere_moment(b, g.h)? * v)
}

/// `B_i` after integrating by parts in `ξ_{k+i}`:
/// `-a β(β-1)/2♯ ∫ |ξ_{k+i}|^{β-2} W^{2♯}/|ξ¹|`.
pub fn compute_bi_by_parts(g: &Geometry, m: &CurvatureModel, i: usize, spec: &QuadratureSpec) -> Result<f64> {
    let (a, b) = bi_params(g, m, i)?;
    let p = g.power() + 1.0;
    let v = integrate_cylindrical(
        |r, s| s.powf(b - 2.0) * w_rs(r, s, 1.0, g).powf(p),
        g,
        Weight::Hardy,
        spec,
    )?;
    Ok(-a * b * (b - 1.0) / g.two_sharp() * sphere_moment(b - 2.0, g.h)? * v)
}
