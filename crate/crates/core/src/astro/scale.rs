use super::{AU, MU_SUN};

/// Canonical units: length 1 AU, time chosen so that μ = 1, mass given.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaleSet {
    pub length: f64,
    pub time: f64,
    pub mass: f64,
}

impl ScaleSet {
    pub fn heliocentric(mass: f64) -> Self {
        Self {
            length: AU,
            time: (AU.powi(3) / MU_SUN).sqrt(),
            mass,
        }
    }

    pub fn velocity(&self) -> f64 {
        self.length / self.time
    }

    pub fn acceleration(&self) -> f64 {
        self.length / (self.time * self.time)
    }

    pub fn force(&self) -> f64 {
        self.mass * self.acceleration()
    }

    /// Gravitational parameter in these units (1 for [`ScaleSet::heliocentric`]).
    pub fn mu(&self) -> f64 {
        MU_SUN * self.time * self.time / self.length.powi(3)
    }
}
