//! The H² norm computed three ways — Taylor coefficients, boundary means,
//! and the Littlewood–Paley area integral — followed by the central
//! cross-oracle of the whole crate: `‖f ∘ φ‖²` evaluated on the boundary
//! against the change-of-variables route through the counting function.

use compop::kernels::{
    composition_norm_sq, h2_norm_sq, CompositionMethod, H2Function, NormMethod, TestFunction,
};
use compop::maps::MapExpr;
use compop::quad::DiskGrid;
use num_complex::Complex64;

fn main() -> compop::Result<()> {
    let cx = Complex64::new;
    let grid = DiskGrid::default_grid();

    let z = H2Function::polynomial(vec![cx(0.0, 0.0), cx(1.0, 0.0)]);
    let poly = H2Function::polynomial(vec![cx(1.0, 0.0), cx(0.0, 0.0), cx(-2.0, 0.0)]);
    let kernel: H2Function =
        TestFunction::hardy(vec![cx(0.3, 0.0)], vec![cx(1.0, 0.0)])?.into();

    println!("h2 norms, three routes (coefficients are exact)");
    for (name, f) in [("z", &z), ("1 - 2z^2", &poly), ("k_0.3", &kernel)] {
        let exact = h2_norm_sq(f, NormMethod::Coefficients, &grid)?;
        let boundary = h2_norm_sq(f, NormMethod::Boundary, &grid)?;
        let area = h2_norm_sq(f, NormMethod::LittlewoodPaley, &grid)?;
        println!(
            "  ‖{name}‖² = {exact:.12}   boundary Δ {:+.2e}   littlewood-paley Δ {:+.2e}",
            boundary - exact,
            area - exact
        );
        assert!((boundary - exact).abs() < 1e-6 * exact.max(1.0));
        assert!((area - exact).abs() < 1e-4 * exact.max(1.0));
    }

    let tangent = MapExpr::moebius(cx(2.0, 0.0), cx(0.0, 0.0), cx(-1.0, 0.0), cx(3.0, 0.0))?;
    let squared = MapExpr::polynomial(vec![cx(0.0, 0.0), cx(0.0, 0.0), cx(1.0, 0.0)])?;

    println!("\ncomposition norms: boundary route vs counting route");
    for (mname, phi) in [("2z/(3-z)", &tangent), ("z^2", &squared)] {
        for (fname, f) in [("z", &z), ("1 - 2z^2", &poly), ("k_0.3", &kernel)] {
            let b = composition_norm_sq(f, phi, CompositionMethod::Boundary, &grid)?;
            let c = composition_norm_sq(f, phi, CompositionMethod::Counting, &grid)?;
            println!("  ‖{fname} ∘ {mname}‖² = {b:.10}   counting Δ {:+.2e}", c - b);
            assert!((b - c).abs() < 1e-3 * b.max(1e-6));
        }
    }

    // For the tangent symbol the first coefficient route is fully explicit:
    // 2z/(3 - z) = Σ 2 · 3^{-(n+1)} z^n over n ≥ 1, so ‖C_φ z‖² = 4/9 · 1/(1 - 1/9).
    let exact = 0.5;
    let measured = composition_norm_sq(&z, &tangent, CompositionMethod::Boundary, &grid)?;
    println!("\n‖C_φ z‖² for the tangent symbol = {measured:.12} (exact {exact})");
    assert!((measured - exact).abs() < 1e-4);
    Ok(())
}
