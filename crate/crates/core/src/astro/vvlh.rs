use nalgebra::Matrix3;

use super::{CartesianState, Vec3};
use crate::{Error, Result};

/// Rotation taking inertial vectors into the VVLH frame of `reference`.
///
/// Rows are the VVLH axes expressed in inertial coordinates:
/// z toward the central body (-r̂), y against the orbit normal (-ĥ),
/// x = y × z (along-track, close to the velocity direction).
pub fn vvlh_rotation(reference: &CartesianState) -> Result<Matrix3<f64>> {
    let rn = reference.r.norm();
    let h = reference.r.cross(&reference.v);
    let hn = h.norm();
    if !(rn > 0.0) || !(hn > 1e-12 * rn * reference.v.norm()) {
        return Err(Error::DegenerateGeometry(
            "VVLH frame undefined: zero radius or r ∥ v".into(),
        ));
    }
    let z = -reference.r / rn;
    let y = -h / hn;
    let x = y.cross(&z);
    Ok(Matrix3::from_rows(&[
        x.transpose(),
        y.transpose(),
        z.transpose(),
    ]))
}

/// Relative position and velocity of `target` w.r.t. `reference`, in the
/// reference's VVLH axes (pure rotation of the inertial differences).
pub fn vvlh_relative(reference: &CartesianState, target: &CartesianState) -> Result<(Vec3, Vec3)> {
    let c = vvlh_rotation(reference)?;
    Ok((c * (target.r - reference.r), c * (target.v - reference.v)))
}

/// Inverse of [`vvlh_relative`].
pub fn vvlh_to_inertial(
    reference: &CartesianState,
    dr: &Vec3,
    dv: &Vec3,
) -> Result<CartesianState> {
    let ct = vvlh_rotation(reference)?.transpose();
    Ok(CartesianState::new(
        reference.r + ct * dr,
        reference.v + ct * dv,
    ))
}

/// Angle between two position vectors, in `[0, π]`.
pub fn angle_between_positions(r1: &Vec3, r2: &Vec3) -> Result<f64> {
    if r1.norm() == 0.0 || r2.norm() == 0.0 {
        return Err(Error::invalid("angle_between_positions: zero vector"));
    }
    Ok(r1.cross(r2).norm().atan2(r1.dot(r2)))
}
