//! Scalar even polynomial through Phi(1) = 1, Phi(1 +- i) = 2 +- 8i, lifted
//! into the positive cone and factored.

use gpe_core::factorization::Side;
use gpe_core::interp::even_polynomial_interpolate;
use gpe_core::linalg::c64;

fn main() -> gpe_core::Result<()> {
    let nodes = [c64(1.0, 0.0), c64(1.0, 1.0), c64(1.0, -1.0)];
    let values = [c64(1.0, 0.0), c64(2.0, 8.0), c64(2.0, -8.0)];
    let r = even_polynomial_interpolate(&nodes, &values, Side::Left)?;
    println!("interpolant coefficients {:?}", r.coeffs);
    println!("beta {}, boundary min {:.3e}, residual {:.1e}", r.beta, r.boundary_min, r.residual);
    println!("factor roots {:?}", r.factor_roots);
    Ok(())
}
