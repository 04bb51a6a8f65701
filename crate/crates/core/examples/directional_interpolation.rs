//! Phi(w) xi = eta at two nodes, one of them on the imaginary axis.

use gpe_core::factorization::Side;
use gpe_core::interp::gpe_interpolate;
use gpe_core::linalg::{c64, from_real};

fn main() -> gpe_core::Result<()> {
    let nodes = [c64(1.0, 0.5), c64(0.0, 2.0)];
    let xi = [from_real(2, 1, &[1.0, 0.0]), from_real(2, 1, &[1.0, 1.0])];
    // xi* eta > 0 at the axis node
    let eta = [from_real(2, 1, &[0.3, -2.0]), from_real(2, 1, &[2.0, 0.5])];
    let r = gpe_interpolate(&nodes, &xi, &eta, Side::Right)?;
    println!("degree {}, padded {}, node residual {:.1e}", r.phi_coeffs.len() - 1, r.padded, r.node_residual);
    let l = &r.factor.factor;
    println!("factor: polynomial degree {}, state dimension {}, residual {:.1e}", l.poly().len(), l.state_dim(), r.factor.residual);
    for (w, x) in nodes.iter().zip(&xi) {
        println!("Phi({w}) xi = {:?}", (r.phi.evaluate(*w)? * x).as_slice());
    }
    Ok(())
}
