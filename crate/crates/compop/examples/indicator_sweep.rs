//! The compactness indicator Q(w) = N_φ(w)(1 − |θ(w)|²)/(1 − |w|²) swept
//! over dyadic annuli for three symbols against the atomic inner function:
//! an interior map (suprema identically zero), the tangent map (plateau at
//! 1/3), and the identity (plateau at 1/2).  Ends with essential-norm
//! estimates read off the deep annuli.

use compop::analyzer::{essential_norm, indicator, pw_ratio, sweep, SweepConfig};
use compop::inner::InnerFunction;
use compop::maps::MapExpr;
use num_complex::Complex64;

fn main() -> compop::Result<()> {
    let cx = Complex64::new;
    let theta = InnerFunction::atom(cx(1.0, 0.0), 1.0)?;
    let scale = MapExpr::scale(cx(0.5, 0.0))?;
    let tangent = MapExpr::moebius(cx(2.0, 0.0), cx(0.0, 0.0), cx(-1.0, 0.0), cx(3.0, 0.0))?;
    let config = SweepConfig { angles: 128, depth: 14 };

    println!("single indicator samples on the real axis (tangent symbol)");
    for k in [4, 8, 12] {
        let w = cx(1.0 - 2f64.powi(-k), 0.0);
        let s = indicator(&tangent, &theta, w)?;
        println!(
            "  k = {k:2}: N = {:.6e}  |θ(w)| = {:.3e}  Q = {:.9}",
            s.counting_value, s.theta_modulus, s.q
        );
    }

    println!("\nannulus suprema of Q");
    println!("  k   scale-1/2     2z/(3-z)      identity");
    let sweeps: Vec<_> = [&scale, &tangent, &MapExpr::identity()]
        .iter()
        .map(|phi| sweep(phi, &theta, &config))
        .collect::<compop::Result<_>>()?;
    for i in 0..sweeps[0].annulus_suprema.len() {
        let (k, a) = sweeps[0].annulus_suprema[i];
        let b = sweeps[1].annulus_suprema[i].1;
        let c = sweeps[2].annulus_suprema[i].1;
        println!("  {k:2}  {a:<12.6}  {b:<12.8}  {c:<12.8}");
    }
    let deep_tangent = sweeps[1].annulus_suprema.last().unwrap().1;
    let deep_identity = sweeps[2].annulus_suprema.last().unwrap().1;
    assert!(sweeps[0].annulus_suprema.iter().all(|&(_, q)| q == 0.0));
    assert!((deep_tangent - 1.0 / 3.0).abs() < 0.01);
    assert!((deep_identity - 0.5).abs() < 0.01);

    println!("\nthe specialized ratio N(w)/max(1-|w|², |1-w|²) along the tangency approach");
    for k in [8, 12, 16] {
        let w = tangent.eval(cx(1.0 - 2f64.powi(-k), 0.0))?.value;
        println!("  k = {k:2}: {:.9}", pw_ratio(&tangent, w)?);
    }

    println!("\nessential-norm estimates (no inner function: N(w)/log(1/|w|))");
    let squared = MapExpr::polynomial(vec![cx(0.0, 0.0), cx(0.0, 0.0), cx(1.0, 0.0)])?;
    for (name, phi) in [("z^2", &squared), ("scale 1/2", &scale), ("identity", &MapExpr::identity())] {
        let e = essential_norm(phi, None, &config)?;
        println!("  {name:<9} → {:.9}", e.estimate);
    }
    Ok(())
}
