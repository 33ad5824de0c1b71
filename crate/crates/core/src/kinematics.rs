//! Motion profile of the vehicle: trapezoidal speed, travel time and load-dependent energy per arc.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KinematicsError {
    #[error("negative distance {0}")]
    NegativeDistance(f64),
    #[error("negative load {0}")]
    NegativeLoad(f64),
    #[error("parameter {0} must be strictly positive and finite")]
    BadParameter(&'static str),
}

/// Physical parameters of the vehicle. Weight is measured in load units.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RgvParams {
    pub w_rgv: f64,
    pub accel: f64,
    pub cruise_speed: f64,
    pub mu: f64,
    pub g: f64,
}

impl Default for RgvParams {
    fn default() -> Self {
        RgvParams {
            w_rgv: 2.0,
            accel: 1.0,
            cruise_speed: 1.0,
            mu: 0.05,
            g: 9.8,
        }
    }
}

impl RgvParams {
    pub fn validate(&self) -> Result<(), KinematicsError> {
        let checks = [
            ("w_rgv", self.w_rgv),
            ("accel", self.accel),
            ("cruise_speed", self.cruise_speed),
            ("mu", self.mu),
            ("g", self.g),
        ];
        for (name, v) in checks {
            if !(v.is_finite() && v > 0.0) {
                return Err(KinematicsError::BadParameter(name));
            }
        }
        Ok(())
    }

    /// Distance covered while accelerating to cruise speed.
    pub fn r1(&self) -> f64 {
        self.cruise_speed * self.cruise_speed / (2.0 * self.accel)
    }

    /// Time spent accelerating to cruise speed.
    pub fn t1(&self) -> f64 {
        self.cruise_speed / self.accel
    }

    /// Friction deceleration μg.
    pub fn friction(&self) -> f64 {
        self.mu * self.g
    }

    pub fn travel_time(&self, r: f64) -> Result<f64, KinematicsError> {
        if r < 0.0 {
            return Err(KinematicsError::NegativeDistance(r));
        }
        Ok(self.travel_time_unchecked(r))
    }

    pub(crate) fn travel_time_unchecked(&self, r: f64) -> f64 {
        let r1 = self.r1();
        if r <= 2.0 * r1 {
            2.0 * (r / self.accel).sqrt()
        } else {
            2.0 * self.t1() + (r - 2.0 * r1) / self.cruise_speed
        }
    }

    /// Energy per unit of total moved weight for an arc of length `r`.
    /// This is the coefficient that multiplies `w_rgv + w_load`.
    pub fn energy_coefficient(&self, r: f64) -> Result<f64, KinematicsError> {
        if r < 0.0 {
            return Err(KinematicsError::NegativeDistance(r));
        }
        Ok(self.energy_coefficient_unchecked(r))
    }

    pub(crate) fn energy_coefficient_unchecked(&self, r: f64) -> f64 {
        let mg = self.friction();
        if self.accel <= mg {
            mg * r
        } else if r <= 2.0 * self.r1() {
            self.accel * r
        } else {
            2.0 * (self.accel - mg) * self.r1() + mg * r
        }
    }

    pub fn arc_energy(&self, r: f64, w_load: f64) -> Result<f64, KinematicsError> {
        if w_load < 0.0 {
            return Err(KinematicsError::NegativeLoad(w_load));
        }
        Ok(self.energy_coefficient(r)? * (self.w_rgv + w_load))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(a: f64, v: f64) -> RgvParams {
        RgvParams {
            accel: a,
            cruise_speed: v,
            ..RgvParams::default()
        }
    }

    #[test]
    fn zero_distance_is_free() {
        let d = RgvParams::default();
        assert_eq!(d.travel_time(0.0).unwrap(), 0.0);
        assert_eq!(d.arc_energy(0.0, 3.0).unwrap(), 0.0);
    }

    #[test]
    fn rejects_negative_inputs() {
        let d = RgvParams::default();
        assert!(d.travel_time(-1.0).is_err());
        assert!(d.arc_energy(-1.0, 0.0).is_err());
        assert!(d.arc_energy(1.0, -0.5).is_err());
    }

    #[test]
    fn branches_meet_at_2r1() {
        let d = p(1.7, 2.3);
        let edge = 2.0 * d.r1();
        let below = d.energy_coefficient(edge).unwrap();
        let long = 2.0 * (d.accel - d.friction()) * d.r1() + d.friction() * edge;
        assert!((below - long).abs() < 1e-12);
        let t_short = 2.0 * (edge / d.accel).sqrt();
        let t_long = 2.0 * d.t1();
        assert!((t_short - t_long).abs() < 1e-12);
    }

    #[test]
    fn validate_flags_nonpositive() {
        let mut d = RgvParams::default();
        d.mu = 0.0;
        assert_eq!(d.validate(), Err(KinematicsError::BadParameter("mu")));
    }
}
