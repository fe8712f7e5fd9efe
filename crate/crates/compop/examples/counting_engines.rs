//! Count preimages of a target two independent ways and compare: the
//! rational engine factors `φ(z) − w` and solves for roots; the argument
//! principle integrates `φ'/(φ − w)` around adaptively subdivided boxes.
//! Both produce the Nevanlinna counting value `N_φ(w) = Σ −log|z|` over the
//! fiber, and Littlewood's subordination bound `N_φ(w) ≤ log |(1 − φ(0)̄w)/(w − φ(0))|`
//! caps it from above whenever `φ` is analytic.

use compop::counting::{nevanlinna, preimages_argument_principle, preimages_rational};
use compop::maps::MapExpr;
use num_complex::Complex64;

fn main() -> compop::Result<()> {
    let cx = Complex64::new;
    let squared = MapExpr::polynomial(vec![cx(0.0, 0.0), cx(0.0, 0.0), cx(1.0, 0.0)])?;
    let tangent = MapExpr::moebius(cx(2.0, 0.0), cx(0.0, 0.0), cx(-1.0, 0.0), cx(3.0, 0.0))?;

    println!("closed-form anchors");
    for (name, phi, w, exact) in [
        ("identity  N(1/2)", MapExpr::identity(), cx(0.5, 0.0), 2f64.ln()),
        ("z^2       N(1/4)", squared.clone(), cx(0.25, 0.0), 2.0 * 2f64.ln()),
        ("2z/(3-z)  N(1/2)", tangent.clone(), cx(0.5, 0.0), -(0.6f64.ln())),
    ] {
        let sample = nevanlinna(&phi, w)?;
        println!(
            "  {name} = {:+.15}   (exact {:+.15}, littlewood slack {:+.3e})",
            sample.value, exact, sample.littlewood_slack
        );
        assert!((sample.value - exact).abs() < 1e-10);
        assert!(sample.littlewood_slack >= -1e-9);
    }

    println!("\nengine agreement on a ring of targets (z^2)");
    for k in 0..6 {
        let w = Complex64::from_polar(0.4 + 0.1 * k as f64, 1.1 * k as f64);
        let fast = preimages_rational(&squared, w, 1e-10)?;
        let slow = preimages_argument_principle(&squared, w, 1e-10)?;
        let (a, b) = (fast.counting_value(), slow.counting_value());
        println!(
            "  |w| = {:.1}: rational {:.12}  argument-principle {:.12}  (Δ {:.2e})",
            w.norm(),
            a,
            b,
            (a - b).abs()
        );
        assert_eq!(fast.total_multiplicity(), slow.total_multiplicity());
        assert!((a - b).abs() <= 1e-6 * a.max(1.0));
    }

    println!("\nempty fibers stay empty: scale-1/2 at |w| = 0.75");
    let scale = MapExpr::scale(cx(0.5, 0.0))?;
    let fiber = preimages_rational(&scale, cx(0.75, 0.0), 1e-10)?;
    println!(
        "  multiplicity {} counting value {}",
        fiber.total_multiplicity(),
        fiber.counting_value()
    );
    assert_eq!(fiber.total_multiplicity(), 0);
    Ok(())
}
