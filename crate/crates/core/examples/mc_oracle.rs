//! Importance-sampled Monte Carlo as an independent check on the quadrature.
use bubblestrip::bubble::{w_eval, BubbleParams};
use bubblestrip::geometry::Geometry;
use bubblestrip::quad::{compute_b, mc_oracle, Proposal, QuadratureSpec};

fn main() -> bubblestrip::Result<()> {
    let g = Geometry::new(6, 4, 2, 1, 32.0);
    let p = BubbleParams::centered(2, 1.0);
    let quad = compute_b(&g, &QuadratureSpec::default())?;
    for samples in [10_000, 100_000, 1_000_000] {
        let spec = QuadratureSpec {
            mc_samples: samples,
            ..QuadratureSpec::default()
        };
        let est = mc_oracle(|x| w_eval(x, &p, &g).powf(g.power()), &g, &Proposal::for_bubble(g.origin(), 1.0), &spec)?;
        println!(
            "{samples:>8} samples: {:.3} ± {:.3}  ({:+.2}σ from quadrature)",
            est.estimate,
            est.std_error,
            (est.estimate - quad) / est.std_error
        );
    }
    Ok(())
}
