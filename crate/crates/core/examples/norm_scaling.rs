//! Weighted sup-norm of the error term along λ = C₀ L⁸.
use bubblestrip::geometry::Geometry;
use bubblestrip::model::CurvatureModel;
use bubblestrip::norms::{l_norm_scaling, GridOptions, DEFAULT_THETA};
use bubblestrip::projection::ProjectionConfig;

fn main() -> bubblestrip::Result<()> {
    let g = Geometry::new(6, 4, 2, 1, 32.0);
    let m = CurvatureModel::default_n6();
    let cfg = ProjectionConfig::default();
    let c0 = 0.0085497809812017;
    let pairs: Vec<(f64, f64)> = [1e3, 1e4, 1e5].iter().map(|&l: &f64| (l, (l / c0).powf(0.125))).collect();
    let rep = l_norm_scaling(&pairs, &g, &m, DEFAULT_THETA, &cfg, &GridOptions::default())?;
    for r in &rep.rows {
        println!("λ = {:>8.0e}  L = {:>6.3}  ‖l‖ = {:.4e}", r.lambda, r.l, r.norm);
    }
    println!("fitted exponent {:.3} ± {:.3}", rep.fit.exponent, rep.fit.half_width);
    Ok(())
}
