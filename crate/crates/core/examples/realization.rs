//! Build Phi = L^# L from a first-order factor and evaluate it.

use gpe_core::analysis::is_even;
use gpe_core::linalg::{c64, from_real};
use gpe_core::realization::{gpe_from_factor, minimality_report, minimize, Realization};

fn main() -> gpe_core::Result<()> {
    // L(z) = 1 + 2 / (z + 1)
    let l = Realization::new(from_real(1, 1, &[-1.0]), from_real(1, 1, &[1.0]), from_real(1, 1, &[2.0]), from_real(1, 1, &[1.0]))?;
    let phi = minimize(&gpe_from_factor(&l.sharp())?)?;
    println!("state dimension {}, poles {:?}", phi.state_dim(), phi.poles());
    println!("even: {}, minimal: {}", is_even(&phi), minimality_report(&phi)?.is_minimal());
    for z in [c64(0.0, 1.0), c64(2.0, 0.0), c64(0.5, -3.0)] {
        println!("Phi({z}) = {}", phi.evaluate(z)?[(0, 0)]);
    }
    Ok(())
}
