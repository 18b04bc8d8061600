//! Comparing the projected equations with their reduced closed forms.
use bubblestrip::geometry::Geometry;
use bubblestrip::model::CurvatureModel;
use bubblestrip::projection::ProjectionConfig;
use bubblestrip::quad::QuadratureSpec;
use bubblestrip::reduction::{consistency_check, reduced_coefficients, solve_reduced, ConsistencyOptions, Which};

fn main() -> bubblestrip::Result<()> {
    let m = CurvatureModel::default_n6();
    let spec = QuadratureSpec::default();
    let cfg = ProjectionConfig::default();
    let g = Geometry::new(6, 4, 2, 1, 32.0);
    let rc = reduced_coefficients(&g, &m, &spec)?;
    let sol = solve_reduced(&rc, &m, &g, g.l)?;
    // For a translation the φ reference is the allowed error size, so a ratio
    // near zero is the expected outcome.
    for which in [Which::Lambda, Which::Z(1)] {
        let r = consistency_check(sol.lambda_l, &g, &m, &rc, &cfg, &spec, which, &ConsistencyOptions::default())?;
        println!("{which:?}");
        println!("  φ-term   {:.6e}  reference {:.6e}  ratio {:?}", r.phi_term.numeric, r.phi_term.closed_form, r.phi_term.ratio);
        println!("  (M-1)    {:.6e}  reference {:.6e}  ratio {:?}", r.m_term.numeric, r.m_term.closed_form, r.m_term.ratio);
        println!("  all exponents: ratio {:?}", r.m_term_all_exponents.as_ref().and_then(|t| t.ratio));
        println!("  lens bound {:.2e}", r.lens_bound);
    }
    Ok(())
}
