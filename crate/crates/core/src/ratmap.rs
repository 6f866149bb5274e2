//! Rational maps of the sphere: evaluation and preimages with multiplicity.

use std::cmp::Ordering;
use std::fmt;

use num_complex::Complex64;
use thiserror::Error;

use crate::roots::{polynomial_roots, SolverDivergence};
use crate::sphere::{chordal_distance, SpherePoint};

/// Leading coefficients of `N - zD` smaller than this multiple of the largest
/// coefficient are treated as cancelled; the lost roots sit at infinity.
const CANCELLATION: f64 = 64.0 * f64::EPSILON;

/// Numerator and denominator roots closer than this (chordally) are
/// considered a common factor.
const COMMON_ROOT_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum MapError {
    #[error("polynomial has no nonzero coefficient")]
    ZeroPolynomial,
    #[error("polynomial coefficient {index} is not finite")]
    NonFiniteCoefficient { index: usize },
    #[error("rational map is constant (numerator and denominator both of degree 0)")]
    Constant,
    #[error("numerator root {numerator_root} and denominator root {denominator_root} coincide; cancel the common factor")]
    CommonFactor {
        numerator_root: SpherePoint,
        denominator_root: SpherePoint,
    },
    #[error(transparent)]
    Solver(#[from] SolverDivergence),
}

/// A polynomial with complex coefficients in ascending order and a nonzero
/// leading coefficient.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<Complex64>,
}

impl Polynomial {
    /// Builds a polynomial from ascending coefficients, dropping exact zero
    /// leading terms.
    pub fn new(mut coeffs: Vec<Complex64>) -> Result<Self, MapError> {
        if let Some(index) = coeffs
            .iter()
            .position(|c| !(c.re.is_finite() && c.im.is_finite()))
        {
            return Err(MapError::NonFiniteCoefficient { index });
        }
        while coeffs.last().is_some_and(|c| c.norm() == 0.0) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            return Err(MapError::ZeroPolynomial);
        }
        Ok(Self { coeffs })
    }

    pub fn constant(c: Complex64) -> Result<Self, MapError> {
        Self::new(vec![c])
    }

    /// `z^n`.
    pub fn monomial(n: usize) -> Self {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); n + 1];
        coeffs[n] = Complex64::new(1.0, 0.0);
        Self { coeffs }
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn leading(&self) -> Complex64 {
        self.coeffs[self.coeffs.len() - 1]
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c)
    }

    /// Evaluates the reversed polynomial `w^deg p(1/w)`.
    fn eval_reversed(&self, w: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .fold(Complex64::new(0.0, 0.0), |acc, c| acc * w + c)
    }

    pub fn roots(&self) -> Result<Vec<Complex64>, SolverDivergence> {
        polynomial_roots(&self.coeffs)
    }
}

/// A non-constant rational map `N/D` of the sphere with `N`, `D` coprime.
#[derive(Clone, Debug, PartialEq)]
pub struct RationalMap {
    numerator: Polynomial,
    denominator: Polynomial,
    degree: usize,
}

impl RationalMap {
    pub fn new(numerator: Polynomial, denominator: Polynomial) -> Result<Self, MapError> {
        let degree = numerator.degree().max(denominator.degree());
        if degree == 0 {
            return Err(MapError::Constant);
        }
        if numerator.degree() > 0 && denominator.degree() > 0 {
            let num_roots = numerator.roots()?;
            let den_roots = denominator.roots()?;
            for &p in &num_roots {
                for &q in &den_roots {
                    let (p, q) = (SpherePoint::from_complex(p), SpherePoint::from_complex(q));
                    if chordal_distance(p, q) <= COMMON_ROOT_TOLERANCE {
                        return Err(MapError::CommonFactor {
                            numerator_root: p,
                            denominator_root: q,
                        });
                    }
                }
            }
        }
        Ok(Self {
            numerator,
            denominator,
            degree,
        })
    }

    /// The polynomial map with the given ascending coefficients.
    pub fn polynomial(coeffs: Vec<Complex64>) -> Result<Self, MapError> {
        Self::new(
            Polynomial::new(coeffs)?,
            Polynomial::constant(Complex64::new(1.0, 0.0))?,
        )
    }

    /// Convenience constructor from real ascending coefficients of a
    /// polynomial map.
    pub fn real_polynomial(coeffs: &[f64]) -> Result<Self, MapError> {
        Self::polynomial(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    pub fn numerator(&self) -> &Polynomial {
        &self.numerator
    }

    pub fn denominator(&self) -> &Polynomial {
        &self.denominator
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// `f(z)` on the sphere.
    pub fn evaluate(&self, z: SpherePoint) -> SpherePoint {
        let (dn, dd) = (self.numerator.degree(), self.denominator.degree());
        let Some(z) = z.as_finite() else {
            return match dn.cmp(&dd) {
                Ordering::Greater => SpherePoint::Infinity,
                Ordering::Less => SpherePoint::ZERO,
                Ordering::Equal => {
                    SpherePoint::from_complex(self.numerator.leading() / self.denominator.leading())
                }
            };
        };

        if z.norm() <= 1.0 {
            let den = self.denominator.eval(z);
            if den.norm() == 0.0 {
                return SpherePoint::Infinity;
            }
            SpherePoint::from_complex(self.numerator.eval(z) / den)
        } else {
            // Work in w = 1/z so large |z| does not overflow the powers.
            let w = z.inv();
            let den = self.denominator.eval_reversed(w);
            if den.norm() == 0.0 {
                return SpherePoint::Infinity;
            }
            let ratio = self.numerator.eval_reversed(w) / den;
            let value = match dn.cmp(&dd) {
                Ordering::Greater => ratio * z.powi((dn - dd) as i32),
                Ordering::Less => ratio * w.powi((dd - dn) as i32),
                Ordering::Equal => ratio,
            };
            SpherePoint::from_complex(value)
        }
    }

    /// All `degree()` solutions `w` of `f(w) = z`, with multiplicity.
    ///
    /// The order is the fixed branch labeling used throughout the crate:
    /// finite roots sorted by real part then imaginary part, infinity last.
    pub fn preimages(&self, z: SpherePoint) -> Result<Vec<SpherePoint>, SolverDivergence> {
        let mut coeffs: Vec<Complex64> = match z {
            SpherePoint::Infinity => self.denominator.coefficients().to_vec(),
            SpherePoint::Finite(z) => {
                let num = self.numerator.coefficients();
                let den = self.denominator.coefficients();
                (0..=self.degree)
                    .map(|k| {
                        let n = num.get(k).copied().unwrap_or_default();
                        let d = den.get(k).copied().unwrap_or_default();
                        n - z * d
                    })
                    .collect()
            }
        };
        let largest = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
        while coeffs
            .last()
            .is_some_and(|c| c.norm() <= CANCELLATION * largest)
        {
            coeffs.pop();
        }

        let mut finite = if coeffs.len() > 1 {
            polynomial_roots(&coeffs)?
        } else {
            Vec::new()
        };
        finite.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));

        let mut out: Vec<SpherePoint> = finite.into_iter().map(SpherePoint::from_complex).collect();
        out.resize(self.degree, SpherePoint::Infinity);
        Ok(out)
    }

    /// Fixed points on the sphere (finite solutions of `N(w) = w D(w)`, plus
    /// infinity when `f(∞) = ∞`).
    pub fn fixed_points(&self) -> Result<Vec<SpherePoint>, SolverDivergence> {
        let num = self.numerator.coefficients();
        let den = self.denominator.coefficients();
        let mut coeffs: Vec<Complex64> = (0..=self.degree + 1)
            .map(|k| {
                let n = num.get(k).copied().unwrap_or_default();
                let shifted = if k == 0 {
                    Complex64::default()
                } else {
                    den.get(k - 1).copied().unwrap_or_default()
                };
                n - shifted
            })
            .collect();
        let largest = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
        while coeffs
            .last()
            .is_some_and(|c| c.norm() <= CANCELLATION * largest)
        {
            coeffs.pop();
        }
        let mut out: Vec<SpherePoint> = if coeffs.len() > 1 {
            polynomial_roots(&coeffs)?
                .into_iter()
                .map(SpherePoint::from_complex)
                .collect()
        } else {
            Vec::new()
        };
        if self.evaluate(SpherePoint::Infinity).is_infinity() {
            out.push(SpherePoint::Infinity);
        }
        Ok(out)
    }
}

impl fmt::Display for RationalMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn poly(p: &Polynomial, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            let mut first = true;
            for (k, c) in p.coefficients().iter().enumerate() {
                if c.norm() == 0.0 {
                    continue;
                }
                if !first {
                    write!(f, " + ")?;
                }
                first = false;
                if c.im == 0.0 {
                    write!(f, "{}", c.re)?;
                } else {
                    write!(f, "({}{:+}i)", c.re, c.im)?;
                }
                match k {
                    0 => {}
                    1 => write!(f, "z")?,
                    _ => write!(f, "z^{k}")?,
                }
            }
            Ok(())
        }
        write!(f, "[")?;
        poly(&self.numerator, f)?;
        write!(f, "] / [")?;
        poly(&self.denominator, f)?;
        write!(f, "]")
    }
}
