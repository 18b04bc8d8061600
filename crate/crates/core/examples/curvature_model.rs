//! The periodic curvature model M: validation, values and scaling.
use bubblestrip::geometry::{Geometry, Point};
use bubblestrip::model::{m_bounds, m_eval, validate_model, CurvatureModel};

fn main() -> bubblestrip::Result<()> {
    let g = Geometry::new(6, 4, 2, 1, 16.0);
    let m = CurvatureModel::default_n6();
    let problems = validate_model(&m, &g)?;
    println!("violations: {problems:?}");
    println!("J = {:?}, Σ_J a = {}", m.j_set(), m.sum_j_a());
    println!("bounds on M: {:?}", m_bounds(&m));

    for (y, z) in [(0.0, 0.0), (0.05, 0.0), (0.0, 0.05), (0.2, 0.2), (16.05, 0.0)] {
        let x = Point::new(vec![y, 0.0, 0.0, 0.0], vec![z, 0.0]);
        println!("M(y={y}, z={z}) = {:.12}", m_eval(&x, &m, &g));
    }

    // Shrinking the coefficients keeps M close to 1.
    let small = m.scaled(0.1);
    let x = Point::new(vec![0.1, 0.0, 0.0, 0.0], vec![0.0, 0.1]);
    println!("M at t = 0.1: {:.12}", m_eval(&x, &small, &g));
    Ok(())
}
