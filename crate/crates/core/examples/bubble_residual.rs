//! The standard bubble solves its equation: analytic and finite-difference Laplacians.
use bubblestrip::bubble::{fd_laplacian, fd_scale, laplacian, pde_residual, w_eval, BubbleParams, FD_REL_STEP};
use bubblestrip::geometry::{Geometry, Point};

fn main() -> bubblestrip::Result<()> {
    let g = Geometry::new(6, 4, 2, 1, 32.0);
    let p = BubbleParams::new(vec![0.1, -0.05], 3.0);
    let points = [
        Point::new(vec![0.2, 0.0, 0.1, 0.0], vec![0.1, -0.05]),
        Point::new(vec![1.0, 0.5, 0.0, 0.3], vec![0.4, 0.2]),
        Point::new(vec![0.01, 0.0, 0.0, 0.0], vec![2.0, 1.0]),
    ];
    println!("{:>12} {:>12} {:>12} {:>12}", "W", "ΔW", "ΔW (fd)", "residual");
    for x in &points {
        let lap = laplacian(x, &p, &g)?;
        let fd = fd_laplacian(x, &p, &g, FD_REL_STEP * fd_scale(x, &p, &g));
        println!(
            "{:>12.4e} {:>12.4e} {:>12.4e} {:>12.2e}",
            w_eval(x, &p, &g),
            lap,
            fd,
            pde_residual(x, &p, &g)?
        );
    }
    Ok(())
}
