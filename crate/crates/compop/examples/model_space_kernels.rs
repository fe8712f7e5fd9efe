//! Reproducing kernels of a model space K_θ = H² ⊖ θH²: the norm identity
//! ‖κ_w‖² = (1 − |θ(w)|²)/(1 − |w|²), the reproducing property under the
//! boundary pairing, the weighted Cohn energy, and the weak-null /
//! derivative probes along a sequence climbing toward the spectrum.

use compop::inner::InnerFunction;
use compop::kernels::{boundary_pairing, cohn_energy, kernel_probes, KernelSpec, TestFunction};
use compop::quad::DiskGrid;
use num_complex::Complex64;

fn main() -> compop::Result<()> {
    let cx = Complex64::new;
    let theta = InnerFunction::from_zeros(vec![cx(0.0, 0.0), cx(0.0, 0.0)])?; // θ = z²

    println!("norm identity for κ_w in K_z²");
    for w in [cx(0.3, 0.0), cx(0.0, 0.5), cx(-0.4, 0.4)] {
        let spec = KernelSpec::model(theta.clone(), w)?;
        let tm = theta.eval(w)?.value.norm();
        let predicted = (1.0 - tm * tm) / (1.0 - w.norm_sqr());
        println!(
            "  w = {:+.2}{:+.2}i: ‖κ_w‖² = {:.12} (identity gives {:.12})",
            w.re,
            w.im,
            spec.raw_norm_sq()?,
            predicted
        );
        assert!((spec.raw_norm_sq()? - predicted).abs() < 1e-12);
    }

    // The pairing against the kernel reproduces point values of anything
    // in the space; f = κ_a is itself in K_θ.
    println!("\nreproducing property via the boundary pairing");
    let f = TestFunction::model(theta.clone(), vec![cx(0.2, 0.1)], vec![cx(1.0, 0.0)])?;
    for w in [cx(0.5, 0.0), cx(0.0, -0.6)] {
        let spec = KernelSpec::model(theta.clone(), w)?;
        let paired = boundary_pairing(&f, &spec, 1 << 12)?;
        let direct = f.eval(w)?;
        println!(
            "  ⟨f, κ_w⟩ = {:+.10}{:+.10}i   f(w) = {:+.10}{:+.10}i",
            paired.re, paired.im, direct.re, direct.im
        );
        assert!((paired - direct).norm() < 1e-9);
    }

    println!("\nweighted energy E_p(f) with weight (1-|z|)/(1-|θ(z)|)^p");
    let grid = DiskGrid::default_grid();
    for p in [0.5, 1.0] {
        let e = cohn_energy(&f, p, &grid)?;
        println!(
            "  p = {p}: value {:.9}  ratio to ‖f‖² {:.6}  ({} uncertified nodes)",
            e.value, e.ratio, e.flagged_nodes
        );
    }

    // Kernels climbing toward the spectrum of a one-atom inner function:
    // pairings against a fixed family die off while the scaled derivative
    // stays bounded below — the two finite probes behind the lemma that
    // normalized kernels converge weakly to zero.
    println!("\nkernel probes along w_n → 1 against θ₁");
    let theta1 = InnerFunction::atom(cx(1.0, 0.0), 1.0)?;
    let sequence: Vec<Complex64> = (2..7).map(|k| cx(1.0 - 2f64.powi(-k), 0.0)).collect();
    let family = vec![
        TestFunction::model(theta1.clone(), vec![cx(0.0, 0.0)], vec![cx(1.0, 0.0)])?,
        TestFunction::model(theta1.clone(), vec![cx(0.3, 0.2)], vec![cx(1.0, 0.0)])?,
    ];
    let probes = kernel_probes(&theta1, &sequence, 0.9, 0.3, &family)?;
    for row in &probes.rows {
        println!(
            "  w = {:.5}: |θ(w)| = {:.2e}  max pairing {:.4e}  min scaled derivative {:.4}",
            row.w.re, row.theta_modulus, row.max_pairing, row.min_scaled_derivative
        );
    }
    let pairings: Vec<f64> = probes.rows.iter().map(|r| r.max_pairing).collect();
    assert!(pairings.last().unwrap() < pairings.first().unwrap());
    Ok(())
}
