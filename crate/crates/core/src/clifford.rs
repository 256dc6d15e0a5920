//! Real Clifford algebra `Cl_m` with negative-definite signature (`e_i^2 = -1`),
//! stored densely as `2^m` blade coefficients indexed by bitmask: bit `i` of the
//! mask set means `e_{i+1}` is a factor of the blade.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub const MAX_DIM: usize = 10;

/// Sign convention for the Clifford inverse of a vector.
///
/// With `x^2 = -||x||^2` the algebraic inverse satisfying `x x^{-1} = 1` is
/// `-x/||x||^2`; the Kelvin map `x/||x||^2` differs by sign and is the form
/// that makes the two-point inversion identities sign-free.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InversionConvention {
    #[default]
    Algebraic,
    Kelvin,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Multivector {
    dim: usize,
    coeffs: Vec<f64>,
}

/// Reordering + metric sign for the product of basis blades `a` and `b`.
fn blade_sign(a: usize, b: usize) -> f64 {
    let mut swaps = 0u32;
    let mut aa = a >> 1;
    while aa != 0 {
        swaps += (aa & b).count_ones();
        aa >>= 1;
    }
    // common factors contract with e_i^2 = -1
    swaps += (a & b).count_ones();
    if swaps & 1 == 0 {
        1.0
    } else {
        -1.0
    }
}

impl Multivector {
    pub fn zero(dim: usize) -> Self {
        assert!((2..=MAX_DIM).contains(&dim), "dimension out of range");
        Multivector {
            dim,
            coeffs: vec![0.0; 1 << dim],
        }
    }

    pub fn scalar(dim: usize, s: f64) -> Self {
        let mut mv = Self::zero(dim);
        mv.coeffs[0] = s;
        mv
    }

    pub fn basis_vector(dim: usize, i: usize) -> Self {
        assert!(i < dim);
        let mut mv = Self::zero(dim);
        mv.coeffs[1 << i] = 1.0;
        mv
    }

    pub fn basis_blade(dim: usize, mask: usize) -> Self {
        assert!(mask < (1 << dim));
        let mut mv = Self::zero(dim);
        mv.coeffs[mask] = 1.0;
        mv
    }

    pub fn from_vector(x: &[f64]) -> Self {
        let mut mv = Self::zero(x.len());
        for (i, &xi) in x.iter().enumerate() {
            mv.coeffs[1 << i] = xi;
        }
        mv
    }

    pub fn from_coeffs(dim: usize, coeffs: Vec<f64>) -> Result<Self> {
        if !(2..=MAX_DIM).contains(&dim) {
            return Err(Error::UnsupportedDimension(dim));
        }
        if coeffs.len() != 1 << dim {
            return Err(Error::DimensionMismatch {
                expected: 1 << dim,
                got: coeffs.len(),
            });
        }
        Ok(Multivector { dim, coeffs })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeff(&self, mask: usize) -> f64 {
        self.coeffs[mask]
    }

    pub fn set_coeff(&mut self, mask: usize, value: f64) {
        self.coeffs[mask] = value;
    }

    pub fn scalar_part(&self) -> f64 {
        self.coeffs[0]
    }

    /// Grade-1 coefficients as a coordinate vector.
    pub fn vector_part(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.coeffs[1 << i]).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    /// True when every nonzero coefficient sits on a grade-1 blade.
    pub fn is_grade1(&self) -> bool {
        self.coeffs
            .iter()
            .enumerate()
            .all(|(mask, &c)| c == 0.0 || mask.count_ones() == 1)
    }

    pub fn grade_projection(&self, grade: u32) -> Multivector {
        let mut out = Multivector::zero(self.dim);
        for (mask, &c) in self.coeffs.iter().enumerate() {
            if mask.count_ones() == grade {
                out.coeffs[mask] = c;
            }
        }
        out
    }

    /// Euclidean norm of the coefficient vector; agrees with `||x||` on vectors.
    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    /// Clifford conjugation: sign `(-1)^{r(r+1)/2}` on grade `r`.
    pub fn conjugate(&self) -> Multivector {
        let mut out = self.clone();
        for (mask, c) in out.coeffs.iter_mut().enumerate() {
            let r = mask.count_ones() as usize;
            if (r * (r + 1) / 2) & 1 == 1 {
                *c = -*c;
            }
        }
        out
    }

    pub fn scale(&self, s: f64) -> Multivector {
        let mut out = self.clone();
        for c in out.coeffs.iter_mut() {
            *c *= s;
        }
        out
    }

    pub fn geometric_product(&self, rhs: &Multivector) -> Result<Multivector> {
        if self.dim != rhs.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: rhs.dim,
            });
        }
        Ok(self.gp(rhs))
    }

    /// Internal product; dimensions must already agree.
    pub(crate) fn gp(&self, rhs: &Multivector) -> Multivector {
        debug_assert_eq!(self.dim, rhs.dim);
        let mut out = Multivector::zero(self.dim);
        for (a, &ca) in self.coeffs.iter().enumerate() {
            if ca == 0.0 {
                continue;
            }
            for (b, &cb) in rhs.coeffs.iter().enumerate() {
                if cb == 0.0 {
                    continue;
                }
                out.coeffs[a ^ b] += ca * cb * blade_sign(a, b);
            }
        }
        out
    }

    pub fn max_abs_diff(&self, rhs: &Multivector) -> f64 {
        self.coeffs
            .iter()
            .zip(&rhs.coeffs)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// `x^{-1}` for a nonzero grade-1 element, under the given sign convention.
pub fn vector_inverse_with(x: &Multivector, convention: InversionConvention) -> Result<Multivector> {
    if !x.is_grade1() {
        return Err(Error::NotGrade1);
    }
    let n2: f64 = x.coeffs.iter().map(|c| c * c).sum();
    if n2 == 0.0 {
        return Err(Error::singular("vector inverse of zero"));
    }
    let s = match convention {
        InversionConvention::Algebraic => -1.0 / n2,
        InversionConvention::Kelvin => 1.0 / n2,
    };
    Ok(x.scale(s))
}

/// Algebraic inverse `-x/||x||^2`, so that `x x^{-1} = 1`.
pub fn vector_inverse(x: &Multivector) -> Result<Multivector> {
    vector_inverse_with(x, InversionConvention::Algebraic)
}

/// The sandwich `x u x / ||x||^2`; an isometry and involution on grade-1
/// elements, invariant under rescaling of `x`.
pub fn reflect(x: &Multivector, u: &Multivector) -> Result<Multivector> {
    if x.dim != u.dim {
        return Err(Error::DimensionMismatch {
            expected: x.dim,
            got: u.dim,
        });
    }
    if !x.is_grade1() || !u.is_grade1() {
        return Err(Error::NotGrade1);
    }
    let n2: f64 = x.coeffs.iter().map(|c| c * c).sum();
    if n2 == 0.0 {
        return Err(Error::singular("reflection along the zero vector"));
    }
    // the sandwich is grade-1 by the algebra; projection drops rounding dust
    Ok(x.gp(u).gp(x).scale(1.0 / n2).grade_projection(1))
}

/// Coordinate form of [`reflect`] for plain vectors:
/// `x u x/||x||^2 = u - 2<u,x> x/||x||^2`.
pub fn reflect_coords(x: &[f64], u: &[f64]) -> Result<Vec<f64>> {
    if x.len() != u.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: u.len(),
        });
    }
    let n2: f64 = x.iter().map(|c| c * c).sum();
    if n2 == 0.0 {
        return Err(Error::singular("reflection along the zero vector"));
    }
    let ux: f64 = u.iter().zip(x).map(|(a, b)| a * b).sum();
    let f = 2.0 * ux / n2;
    Ok(u.iter().zip(x).map(|(ui, xi)| ui - f * xi).collect())
}

impl Add for &Multivector {
    type Output = Multivector;
    fn add(self, rhs: &Multivector) -> Multivector {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        let mut out = self.clone();
        for (c, r) in out.coeffs.iter_mut().zip(&rhs.coeffs) {
            *c += r;
        }
        out
    }
}

impl Sub for &Multivector {
    type Output = Multivector;
    fn sub(self, rhs: &Multivector) -> Multivector {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        let mut out = self.clone();
        for (c, r) in out.coeffs.iter_mut().zip(&rhs.coeffs) {
            *c -= r;
        }
        out
    }
}

impl AddAssign<&Multivector> for Multivector {
    fn add_assign(&mut self, rhs: &Multivector) {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        for (c, r) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
            *c += r;
        }
    }
}

impl SubAssign<&Multivector> for Multivector {
    fn sub_assign(&mut self, rhs: &Multivector) {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        for (c, r) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
            *c -= r;
        }
    }
}

impl Neg for &Multivector {
    type Output = Multivector;
    fn neg(self) -> Multivector {
        self.scale(-1.0)
    }
}

impl Mul<f64> for &Multivector {
    type Output = Multivector;
    fn mul(self, s: f64) -> Multivector {
        self.scale(s)
    }
}

impl fmt::Display for Multivector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (mask, &c) in self.coeffs.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if mask == 0 {
                write!(f, "{c}")?;
            } else {
                write!(f, "{c}*e")?;
                for i in 0..self.dim {
                    if mask & (1 << i) != 0 {
                        write!(f, "{}", i + 1)?;
                    }
                }
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

// JSON form: {"dim": m, "coeffs": {"<blade bitmask>": value, ...}}, zeros omitted.
impl Serialize for Multivector {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr<'a> {
            dim: usize,
            coeffs: &'a BTreeMap<String, f64>,
        }
        let map: BTreeMap<String, f64> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0.0)
            .map(|(mask, &c)| (mask.to_string(), c))
            .collect();
        Repr {
            dim: self.dim,
            coeffs: &map,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Multivector {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            dim: usize,
            coeffs: BTreeMap<String, f64>,
        }
        let repr = Repr::deserialize(deserializer)?;
        if !(2..=MAX_DIM).contains(&repr.dim) {
            return Err(D::Error::custom(format!(
                "dimension {} out of range 2..=10",
                repr.dim
            )));
        }
        let mut mv = Multivector::zero(repr.dim);
        for (key, value) in repr.coeffs {
            let mask: usize = key
                .parse()
                .map_err(|_| D::Error::custom(format!("bad blade bitmask {key:?}")))?;
            if mask >= (1 << repr.dim) {
                return Err(D::Error::custom(format!(
                    "blade bitmask {mask} out of range for dim {}",
                    repr.dim
                )));
            }
            mv.coeffs[mask] = value;
        }
        Ok(mv)
    }
}
