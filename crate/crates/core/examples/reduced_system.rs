//! Solving the reduced equations for the concentration rate λ_L.
use bubblestrip::geometry::Geometry;
use bubblestrip::model::CurvatureModel;
use bubblestrip::quad::QuadratureSpec;
use bubblestrip::reduction::{reduced_coefficients, solve_reduced};

fn main() -> bubblestrip::Result<()> {
    let g = Geometry::new(6, 4, 2, 1, 32.0);
    let m = CurvatureModel::default_n6();
    let rc = reduced_coefficients(&g, &m, &QuadratureSpec::default())?;
    println!("{}", serde_json::to_string_pretty(&rc).expect("serializes"));
    for l in [16.0, 32.0, 64.0, 128.0] {
        let s = solve_reduced(&rc, &m, &g.with_period(l), l)?;
        println!(
            "L = {l:>5}: λ_L = {:.6e}, ẑ = {:?}, window ok: {}",
            s.lambda_l, s.zhat0, s.window_ok
        );
    }
    Ok(())
}
