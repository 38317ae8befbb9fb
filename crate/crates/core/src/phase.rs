use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// A fourth root of unity `i^n`, stored exactly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Phase4(u8);

impl Phase4 {
    pub const ONE: Phase4 = Phase4(0);
    pub const I: Phase4 = Phase4(1);
    pub const MINUS_ONE: Phase4 = Phase4(2);
    pub const MINUS_I: Phase4 = Phase4(3);

    pub fn new(exponent: i64) -> Self {
        Phase4(exponent.rem_euclid(4) as u8)
    }

    /// The exponent `n` in `0..4`.
    pub fn exponent(self) -> u8 {
        self.0
    }

    pub fn mul(self, other: Phase4) -> Phase4 {
        Phase4::new(self.0 as i64 + other.0 as i64)
    }

    pub fn inv(self) -> Phase4 {
        Phase4::new(-(self.0 as i64))
    }

    pub fn to_complex(self) -> Complex64 {
        match self.0 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        }
    }

    /// Recognizes a complex number within `tol` of a fourth root of unity.
    pub fn from_complex(z: Complex64, tol: f64) -> Option<Phase4> {
        (0..4).map(Phase4::new).find(|p| (p.to_complex() - z).norm() <= tol)
    }
}
