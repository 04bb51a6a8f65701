//! Phi = -1/z^2 has D = 0; the eps-limit gives L = 1/z.

use gpe_core::factorization::{factor_regularized, pseudo_spectral_factor, Side};
use gpe_core::linalg::{c64, from_real};
use gpe_core::realization::Realization;

fn main() -> gpe_core::Result<()> {
    let phi = Realization::new(
        from_real(2, 2, &[0.0, 1.0, 0.0, 0.0]),
        from_real(2, 1, &[0.0, -1.0]),
        from_real(1, 2, &[1.0, 0.0]),
        from_real(1, 1, &[0.0]),
    )?;
    if let Err(e) = pseudo_spectral_factor(&phi, Side::Right) {
        println!("direct: {e}");
    }
    let f = factor_regularized(&phi, Side::Right)?;
    println!("epsilon path {:?}", f.epsilon_path.unwrap_or_default());
    for z in [c64(1.0, 0.0), c64(0.0, 2.0), c64(-0.5, 0.5)] {
        println!("L({z}) = {}, 1/z = {}", f.factor.evaluate(z)?[(0, 0)], 1.0 / z);
    }
    Ok(())
}
