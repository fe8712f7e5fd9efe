//! Inner functions and their boundary spectra: evaluate an atomic factor,
//! a Blaschke product, and the sparse tangential family; estimate where the
//! spectrum sits; probe whether a sublevel set is connected (the
//! one-component geometry); and measure Carleson separation of zero sets.

use compop::inner::{carleson_separation, InnerFunction};
use num_complex::Complex64;

fn main() -> compop::Result<()> {
    let cx = Complex64::new;

    // θ₁ = exp((z+1)/(z-1)): one boundary atom at 1, modulus e^{-(1+r)/(1-r)} on [0,1).
    let theta1 = InnerFunction::atom(cx(1.0, 0.0), 1.0)?;
    println!("atomic factor along the radius toward its atom");
    for r in [0.0, 0.5, 0.9, 0.99] {
        let v = theta1.eval(cx(r, 0.0))?.value;
        let predicted = (-(1.0 + r) / (1.0 - r)).exp();
        println!("  |θ₁({r:.2})| = {:.6e}  (closed form {:.6e})", v.norm(), predicted);
        assert!((v.norm() - predicted).abs() < 1e-12);
    }

    let blaschke = InnerFunction::from_zeros(vec![cx(0.5, 0.0), cx(0.0, 0.7), cx(-0.3, -0.3)])?;
    println!("\nfinite Blaschke product: |B| = 1 on the circle, |B(0)| = Π|λ|");
    let boundary = blaschke.eval(Complex64::from_polar(1.0, 2.1))?.value;
    let origin = blaschke.eval(cx(0.0, 0.0))?.value;
    println!("  |B(e^{{2.1i}})| = {:.15}", boundary.norm());
    println!("  |B(0)| = {:.15}", origin.norm());
    assert!((boundary.norm() - 1.0).abs() < 1e-12);

    let radial: Vec<f64> = (1..=12).map(|k| 1.0 - 2f64.powi(-k)).collect();

    let sparse = InnerFunction::sparse_tangential(20)?;
    println!("\nsparse tangential family: zeros spiral into 1 along t_m = 2^-m");
    let spectrum = sparse.spectrum_estimate(64, &radial);
    for arc in &spectrum.arcs {
        println!(
            "  spectrum arc: center angle {:.6}, half width {:.6}",
            arc.center_angle, arc.half_width
        );
    }
    for probe in &spectrum.probes {
        println!(
            "  probe at angle {:+.6}: liminf |θ| = {:.4}  flagged {}",
            probe.angle, probe.liminf, probe.flagged
        );
    }
    assert!(spectrum.probes.iter().any(|p| p.flagged));

    println!("\none-component probes of the sublevel set {{|θ| < 0.9}}");
    for (name, theta) in [("θ₁", &theta1), ("sparse", &sparse)] {
        let report = theta.one_component_probe(0.9, 256)?;
        println!(
            "  {name}: {} component(s) on a {}² grid → connected: {}",
            report.component_count, report.grid_size, report.connected
        );
    }

    println!("\nCarleson separation (inf over m of Π_k≠m |b_λk(λ_m)|)");
    let sep_sparse = carleson_separation(sparse.zeros());
    let sep_close = carleson_separation(&[cx(0.5, 0.0), cx(0.5001, 0.0)]);
    println!("  sparse family: {sep_sparse:.6}");
    println!("  nearly-coincident pair: {sep_close:.6}");
    assert!(sep_sparse > 0.5);
    assert!(sep_close < 0.01);
    Ok(())
}
