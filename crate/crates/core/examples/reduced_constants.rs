//! The constants of the reduced system by deterministic quadrature.
use std::f64::consts::PI;

use bubblestrip::geometry::Geometry;
use bubblestrip::model::CurvatureModel;
use bubblestrip::quad::{compute_b, compute_bi, compute_bi_by_parts, compute_d, compute_f_two_route, QuadratureSpec};

fn main() -> bubblestrip::Result<()> {
    let g = Geometry::new(6, 4, 2, 1, 32.0);
    let m = CurvatureModel::default_n6();
    let spec = QuadratureSpec::default();

    let b = compute_b(&g, &spec)?;
    println!("B   = {b:.10}  (576π³ = {:.10})", 576.0 * PI.powi(3));
    let d = compute_d(&g, &spec)?;
    println!("D   = {d:.10}  (4B/3 = {:.10})", 4.0 * b / 3.0);
    let (f1, f2) = compute_f_two_route(&g, &m, &spec)?;
    println!("F   = {f1:.6} (sphere moments) / {f2:.6} (direct)");
    for i in 1..=g.h {
        let bi = compute_bi(&g, &m, i, &spec)?;
        let parts = compute_bi_by_parts(&g, &m, i, &spec)?;
        println!("B_{i} = {bi:.6} / {parts:.6} (by parts)");
    }
    Ok(())
}
