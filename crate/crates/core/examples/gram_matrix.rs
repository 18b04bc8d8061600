//! Gram matrix of the kernel directions, diagonal at leading order.
use bubblestrip::bubble::BubbleParams;
use bubblestrip::geometry::Geometry;
use bubblestrip::quad::{gram_matrix, QuadratureSpec};

fn main() -> bubblestrip::Result<()> {
    let g = Geometry::new(6, 4, 2, 1, 32.0);
    for lambda in [1.0, 10.0, 100.0] {
        let gm = gram_matrix(&BubbleParams::centered(2, lambda), &g, &QuadratureSpec::default())?;
        println!("λ = {lambda}");
        for row in &gm.entries {
            println!("  {}", row.iter().map(|v| format!("{v:>13.5e}")).collect::<String>());
        }
    }
    Ok(())
}
