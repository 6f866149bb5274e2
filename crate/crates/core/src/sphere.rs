//! Points of the Riemann sphere and the chordal metric.

use std::fmt;

pub use num_complex::Complex64;

/// A point of the extended complex plane.
///
/// Finite points always carry finite, non-NaN coordinates; anything that
/// overflows or becomes NaN is folded into [`SpherePoint::Infinity`] by
/// [`SpherePoint::from_complex`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SpherePoint {
    Finite(Complex64),
    Infinity,
}

impl SpherePoint {
    pub const ZERO: SpherePoint = SpherePoint::Finite(Complex64 { re: 0.0, im: 0.0 });

    pub fn new(re: f64, im: f64) -> Self {
        Self::from_complex(Complex64::new(re, im))
    }

    pub fn real(re: f64) -> Self {
        Self::new(re, 0.0)
    }

    /// Wraps a complex number, mapping non-finite values to infinity and
    /// normalizing signed zeros.
    pub fn from_complex(z: Complex64) -> Self {
        if z.re.is_finite() && z.im.is_finite() {
            SpherePoint::Finite(Complex64::new(z.re + 0.0, z.im + 0.0))
        } else {
            SpherePoint::Infinity
        }
    }

    pub fn is_infinity(&self) -> bool {
        matches!(self, SpherePoint::Infinity)
    }

    pub fn as_finite(&self) -> Option<Complex64> {
        match *self {
            SpherePoint::Finite(z) => Some(z),
            SpherePoint::Infinity => None,
        }
    }

    /// Modulus, `+inf` at infinity.
    pub fn modulus(&self) -> f64 {
        match self {
            SpherePoint::Finite(z) => z.norm(),
            SpherePoint::Infinity => f64::INFINITY,
        }
    }

    /// `1/z` on the sphere (`1/0 = ∞`, `1/∞ = 0`).
    pub fn recip(&self) -> Self {
        match *self {
            SpherePoint::Infinity => SpherePoint::ZERO,
            SpherePoint::Finite(z) if z.re == 0.0 && z.im == 0.0 => SpherePoint::Infinity,
            SpherePoint::Finite(z) => SpherePoint::from_complex(z.inv()),
        }
    }
}

impl From<Complex64> for SpherePoint {
    fn from(z: Complex64) -> Self {
        SpherePoint::from_complex(z)
    }
}

impl fmt::Display for SpherePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpherePoint::Finite(z) => write!(f, "{}{:+}i", z.re, z.im),
            SpherePoint::Infinity => write!(f, "∞"),
        }
    }
}

/// Chordal distance `2|p-q| / (sqrt(1+|p|²) sqrt(1+|q|²))`, with the usual
/// limit `2 / sqrt(1+|p|²)` against infinity. Bounded by 2.
pub fn chordal_distance(p: SpherePoint, q: SpherePoint) -> f64 {
    match (p, q) {
        (SpherePoint::Infinity, SpherePoint::Infinity) => 0.0,
        (SpherePoint::Finite(z), SpherePoint::Infinity)
        | (SpherePoint::Infinity, SpherePoint::Finite(z)) => 2.0 / 1f64.hypot(z.norm()),
        (SpherePoint::Finite(z), SpherePoint::Finite(w)) => {
            let d = 2.0 * (z - w).norm() / (1f64.hypot(z.norm()) * 1f64.hypot(w.norm()));
            d.min(2.0)
        }
    }
}
