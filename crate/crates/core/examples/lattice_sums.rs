//! Epstein-type lattice sums with certified tails, and the periodic kernel.
use bubblestrip::geometry::{green_eval, lattice_sum, lattice_sum_to_radius, Geometry, Point};

fn main() -> bubblestrip::Result<()> {
    // The y-lattice sum that enters the reduced λ-equation.
    let s = lattice_sum(6.0, 1)?;
    println!("Σ|p|^-6 over Z\\{{0}} = {:.15} ± {:.1e} ({} terms)", s.value, s.tail_bound, s.terms_used);
    println!("compare 2ζ(6) = {:.15}", std::f64::consts::PI.powi(6) / 945.0 * 2.0);

    for r in [10.0, 100.0, 1000.0] {
        let t = lattice_sum_to_radius(6.0, 1, r)?;
        println!("radius {r:>6}: partial {:.15}, tail ± {:.1e}", t.partial_sum, t.tail_bound);
    }

    let g = Geometry::new(6, 4, 2, 1, 10.0);
    let x = Point::new(vec![0.3, 0.0, 0.0, 0.0], vec![0.1, 0.0]);
    let xi = Point::new(vec![0.0, 0.2, 0.0, 0.0], vec![4.0, 0.0]);
    let (gv, tail) = green_eval(&x, &xi, &g, 50.0)?;
    println!("periodic kernel G(x, ξ) = {gv:.6e} ± {tail:.1e}");
    Ok(())
}
