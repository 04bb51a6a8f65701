//! Quaternionic factorization through the complex adjoint lift.

use gpe_core::factorization::Side;
use gpe_core::quat::{QuatMatrix, Quaternion};
use gpe_core::realization::{quat_gpe_from_factor, QuatRealization};
use gpe_core::slicefun::{quat_gpe_factor, quat_max_difference, quat_samples};

fn main() -> gpe_core::Result<()> {
    let q = |w, x, y, z| Quaternion::new(w, x, y, z);
    let a = QuatMatrix::from_row_major(2, 2, vec![q(-1.0, 0.5, 0.0, 0.0), q(0.0, 0.0, 0.3, 0.1), Quaternion::ZERO, q(1.5, 0.0, 0.0, -0.4)])?;
    let b = QuatMatrix::from_row_major(2, 1, vec![q(1.0, 0.0, 0.2, 0.0), q(0.0, 1.0, 0.0, 0.5)])?;
    let c = QuatMatrix::from_row_major(1, 2, vec![q(0.3, 0.0, 0.0, 1.0), q(0.5, -0.2, 0.0, 0.0)])?;
    let l = QuatRealization::new(a, b, c, QuatMatrix::identity(1))?;
    let phi = quat_gpe_from_factor(&l.sharp())?;
    let f = quat_gpe_factor(&phi, Side::Right, false)?;
    println!("residual {:.1e}, E-symmetry defect {:.1e}, factor order {}", f.residual, f.e_symmetry_defect, f.factor.state_dim());
    let back = quat_gpe_from_factor(&f.factor.sharp())?;
    println!("max |L^# * L - Phi| on samples {:.1e}", quat_max_difference(&back, &phi, &quat_samples(&phi))?);
    println!("lifted factor poles {:?}", f.factor.lift().poles());
    Ok(())
}
