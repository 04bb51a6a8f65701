//! Kernel inertia of an even function that is positive on the imaginary axis
//! but not positive real: the Caratheodory kernel has one negative square.

use gpe_core::analysis::{boundary_positivity, default_grid, grid_avoiding, negative_squares, Evaluable, KernelKind};
use gpe_core::linalg::{c64, CMatrix};
use gpe_core::quat::Quaternion;
use gpe_core::realization::Realization;

fn main() -> gpe_core::Result<()> {
    // Phi(z) = 1 - z^2
    let phi = Realization::polynomial(&[
        CMatrix::from_element(1, 1, c64(1.0, 0.0)),
        CMatrix::from_element(1, 1, c64(0.0, 0.0)),
        CMatrix::from_element(1, 1, c64(-1.0, 0.0)),
    ])?;
    println!("boundary min eig {:.3}", boundary_positivity(&phi, 201)?.min_eig);
    let f = |z| phi.evaluate(z);
    for n in [30, 60] {
        let grid: Vec<Quaternion> = grid_avoiding(&default_grid(n), phi.poles(), 1e-3).into_iter().map(Quaternion::from_complex).collect();
        let rep = negative_squares(KernelKind::Carat, Evaluable::Complex(&f), &grid)?;
        println!("grid {n}: kappa {} (stabilized {}), inertia {:?}", rep.kappa_estimate, rep.stabilized, rep.gram_inertia);
    }
    Ok(())
}
