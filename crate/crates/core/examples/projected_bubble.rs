//! The projected bubble PW: value, sandwich bounds and periodicity.
use bubblestrip::bubble::{w_eval, BubbleParams};
use bubblestrip::geometry::{Geometry, Point};
use bubblestrip::projection::{ball_samples, periodicity_check, phi_eval, pw_eval, sandwich_check, ProjectionConfig};

fn main() -> bubblestrip::Result<()> {
    let g = Geometry::new(6, 4, 2, 1, 8.0);
    let p = BubbleParams::centered(2, 5.0);
    let cfg = ProjectionConfig::default();

    for y in [0.05, 0.5, 2.0] {
        let x = Point::new(vec![y, 0.0, 0.0, 0.0], vec![0.1, 0.0]);
        let pw = pw_eval(&x, &p, &g, &cfg)?;
        let phi = phi_eval(&x, &p, &g, &cfg)?;
        println!(
            "|y| = {y}: W = {:.5e}, PW = {:.5e} ± {:.1e}, φ = {:.5e}",
            w_eval(&x, &p, &g),
            pw.value,
            pw.stat_error,
            phi.value
        );
    }

    let pts = ball_samples(&g, &p.center(&g), 3.0, 20, 7);
    let rows = sandwich_check(&pts, &p, &g, &cfg)?;
    println!("0 <= PW <= W at {}/{} points", rows.iter().filter(|r| r.ok).count(), rows.len());

    let x = Point::new(vec![0.4, 0.1, 0.0, 0.0], vec![0.3, -0.2]);
    for dir in 1..=g.kbar {
        let r = periodicity_check(&x, &p, &g, &cfg, dir)?;
        println!("shift by L e_{dir}: residual {:.2e} (tolerance {:.2e})", r.residual, r.tolerance);
    }
    Ok(())
}
