//! Right and left pseudo-spectral factors of a 2x2 function with poles on
//! both sides of the imaginary axis.

use gpe_core::factorization::{pseudo_spectral_factor, verify_factorization, Side};
use gpe_core::linalg::{from_real, CMatrix};
use gpe_core::realization::{gpe_from_factor, minimize, Realization};

fn main() -> gpe_core::Result<()> {
    let a = from_real(2, 2, &[-1.0, 0.5, 0.0, 2.0]);
    let b = from_real(2, 2, &[1.0, 0.0, 0.3, 1.0]);
    let c = from_real(2, 2, &[0.5, -0.2, 0.1, 0.7]);
    let l = Realization::new(a, b, c, CMatrix::identity(2, 2))?;
    let phi = minimize(&gpe_from_factor(&l.sharp())?)?;
    for side in [Side::Right, Side::Left] {
        let f = pseudo_spectral_factor(&phi, side)?;
        let (residual, report) = verify_factorization(&phi, &f.factor, &phi.sample_points(50))?;
        println!(
            "{side:?}: factor order {}, residual {residual:.1e}, poles {:?}, zeros {:?}",
            f.factor.state_dim(),
            report.poles,
            report.zeros
        );
    }
    Ok(())
}
