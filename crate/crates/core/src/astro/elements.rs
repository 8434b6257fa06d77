use nalgebra::Matrix3;

use super::{kepler, wrap_two_pi, CartesianState, OrbitElements, Vec3, MU_SUN};
use crate::{Error, Result};

/// Eccentricity below which the orbit is treated as circular.
const E_DEGENERATE: f64 = 1e-8;
/// Inclination below which the orbit is treated as equatorial.
const I_DEGENERATE: f64 = 1e-8;

/// Rotation from the perifocal frame to the inertial frame.
fn perifocal_to_inertial(raan: f64, i: f64, argp: f64) -> Matrix3<f64> {
    let (so, co) = raan.sin_cos();
    let (si, ci) = i.sin_cos();
    let (sw, cw) = argp.sin_cos();
    Matrix3::new(
        co * cw - so * sw * ci,
        -co * sw - so * cw * ci,
        so * si,
        so * cw + co * sw * ci,
        -so * sw + co * cw * ci,
        -co * si,
        sw * si,
        cw * si,
        ci,
    )
}

pub fn elements_to_cartesian(ele: &OrbitElements) -> CartesianState {
    let p = ele.a * (1.0 - ele.e * ele.e);
    let (sf, cf) = ele.ta.sin_cos();
    let r = p / (1.0 + ele.e * cf);
    let vs = (MU_SUN / p).sqrt();
    let rot = perifocal_to_inertial(ele.raan, ele.i, ele.argp);
    let r_pf = Vec3::new(r * cf, r * sf, 0.0);
    let v_pf = Vec3::new(-vs * sf, vs * (ele.e + cf), 0.0);
    CartesianState::new(rot * r_pf, rot * v_pf)
}

/// Inverse of [`elements_to_cartesian`] for elliptic states.
///
/// Degenerate angles: below `e = 1e-8` the argument of perihelion is zero
/// and `f` is measured from the node; below `i = 1e-8` the node is zero and
/// `ω` is measured from the inertial x-axis.
pub fn cartesian_to_elements(state: &CartesianState) -> Result<OrbitElements> {
    let r = state.r;
    let v = state.v;
    let rn = r.norm();
    if !(rn > 0.0) || !v.iter().all(|x| x.is_finite()) {
        return Err(Error::invalid(
            "cartesian_to_elements: zero or non-finite state",
        ));
    }
    let energy = 0.5 * v.norm_squared() - MU_SUN / rn;
    if !(energy < 0.0) {
        return Err(Error::NotElliptic { energy });
    }
    let h = r.cross(&v);
    let hn = h.norm();
    if hn == 0.0 {
        return Err(Error::DegenerateGeometry(
            "rectilinear orbit (r ∥ v)".into(),
        ));
    }
    let a = -MU_SUN / (2.0 * energy);
    let e_vec = ((v.norm_squared() - MU_SUN / rn) * r - r.dot(&v) * v) / MU_SUN;
    let e = e_vec.norm();
    if e >= 1.0 {
        return Err(Error::NotElliptic { energy });
    }
    let h_hat = h / hn;
    // atan2 keeps full precision near i = 0 and i = π, where acos does not
    let i = h.x.hypot(h.y).atan2(h.z);

    // In-plane reference direction: ascending node, or inertial x for
    // equatorial orbits (projected into the orbit plane).
    let (raan, n_hat) = if i < I_DEGENERATE || (std::f64::consts::PI - i) < I_DEGENERATE {
        let x = Vec3::x();
        let n = (x - h_hat * h_hat.dot(&x)).normalize();
        (0.0, n)
    } else {
        let raan = wrap_two_pi(h_hat.x.atan2(-h_hat.y));
        let (s, c) = raan.sin_cos();
        (raan, Vec3::new(c, s, 0.0))
    };
    let m_hat = h_hat.cross(&n_hat);

    let arg_lat = r.dot(&m_hat).atan2(r.dot(&n_hat));
    let (argp, ta) = if e < E_DEGENERATE {
        (0.0, wrap_two_pi(arg_lat))
    } else {
        let argp = e_vec.dot(&m_hat).atan2(e_vec.dot(&n_hat));
        (wrap_two_pi(argp), wrap_two_pi(arg_lat - argp))
    };

    Ok(OrbitElements {
        a,
        e,
        i,
        raan,
        argp,
        ta,
    })
}

/// Coasts the elements by `dt` seconds. Only the true anomaly changes.
pub fn propagate_kepler(ele: &OrbitElements, dt: f64) -> Result<OrbitElements> {
    if !dt.is_finite() {
        return Err(Error::invalid("propagate_kepler: non-finite dt"));
    }
    if dt == 0.0 {
        return Ok(*ele);
    }
    let m0 = kepler::true_to_mean(ele.ta, ele.e);
    let m = m0 + ele.mean_motion() * dt;
    let ta = kepler::mean_to_true(m, ele.e)?;
    Ok(OrbitElements { ta, ..*ele })
}

/// Two-body propagation of a Cartesian state (elliptic only).
pub fn propagate_state(state: &CartesianState, dt: f64) -> Result<CartesianState> {
    let ele = cartesian_to_elements(state)?;
    Ok(elements_to_cartesian(&propagate_kepler(&ele, dt)?))
}
