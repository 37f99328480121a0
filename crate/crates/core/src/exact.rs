//! Exact Gaussian-rational arithmetic and planar similitudes.
//!
//! Every map is kept in complex form `z ↦ u·z + t` or `z ↦ u·z̄ + t`, with
//! `u` and `t` Gaussian rationals. Equality of maps is exact record equality,
//! which is what the neighbor-graph construction keys on.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Arbitrary-precision rational, always in lowest terms with positive denominator.
pub type Scalar = BigRational;

pub fn scalar(num: i64, den: i64) -> Scalar {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn scalar_int(n: i64) -> Scalar {
    BigRational::from_integer(BigInt::from(n))
}

/// Complex number with exact rational real and imaginary parts.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Gauss {
    pub re: Scalar,
    pub im: Scalar,
}

impl Gauss {
    pub fn new(re: Scalar, im: Scalar) -> Self {
        Gauss { re, im }
    }

    /// Shorthand for `a/b + (c/d)i` with machine integers.
    pub fn ratio(re: (i64, i64), im: (i64, i64)) -> Self {
        Gauss::new(scalar(re.0, re.1), scalar(im.0, im.1))
    }

    pub fn int(re: i64, im: i64) -> Self {
        Gauss::new(scalar_int(re), scalar_int(im))
    }

    pub fn zero() -> Self {
        Gauss::int(0, 0)
    }

    pub fn one() -> Self {
        Gauss::int(1, 0)
    }

    pub fn i() -> Self {
        Gauss::int(0, 1)
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        Gauss::new(self.re.clone(), -self.im.clone())
    }

    pub fn norm_sq(&self) -> Scalar {
        &self.re * &self.re + &self.im * &self.im
    }

    /// `|re| + |im|`, a rational upper bound for the modulus.
    pub fn l1_norm(&self) -> Scalar {
        self.re.abs() + self.im.abs()
    }

    /// Multiplicative inverse. Panics on zero.
    pub fn recip(&self) -> Self {
        let n = self.norm_sq();
        assert!(!n.is_zero(), "reciprocal of zero");
        Gauss::new(&self.re / &n, -&self.im / &n)
    }

    pub fn scale(&self, s: &Scalar) -> Self {
        Gauss::new(&self.re * s, &self.im * s)
    }

    pub fn to_f64(&self) -> (f64, f64) {
        (
            self.re.to_f64().unwrap_or(f64::NAN),
            self.im.to_f64().unwrap_or(f64::NAN),
        )
    }
}

impl Add for &Gauss {
    type Output = Gauss;
    fn add(self, o: &Gauss) -> Gauss {
        Gauss::new(&self.re + &o.re, &self.im + &o.im)
    }
}

impl Sub for &Gauss {
    type Output = Gauss;
    fn sub(self, o: &Gauss) -> Gauss {
        Gauss::new(&self.re - &o.re, &self.im - &o.im)
    }
}

impl Mul for &Gauss {
    type Output = Gauss;
    fn mul(self, o: &Gauss) -> Gauss {
        Gauss::new(
            &self.re * &o.re - &self.im * &o.im,
            &self.re * &o.im + &self.im * &o.re,
        )
    }
}

impl Neg for &Gauss {
    type Output = Gauss;
    fn neg(self) -> Gauss {
        Gauss::new(-self.re.clone(), -self.im.clone())
    }
}

fn fmt_scalar(f: &mut fmt::Formatter<'_>, s: &Scalar) -> fmt::Result {
    if s.denom().is_one() {
        write!(f, "{}", s.numer())
    } else {
        write!(f, "{}/{}", s.numer(), s.denom())
    }
}

impl fmt::Display for Gauss {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.re.is_zero(), self.im.is_zero()) {
            (true, true) => write!(f, "0"),
            (false, true) => fmt_scalar(f, &self.re),
            (true, false) => {
                if self.im.is_one() {
                } else if (-self.im.clone()).is_one() {
                    write!(f, "-")?;
                } else {
                    fmt_scalar(f, &self.im)?;
                }
                write!(f, "i")
            }
            (false, false) => {
                write!(f, "(")?;
                fmt_scalar(f, &self.re)?;
                if self.im.is_negative() {
                    write!(f, "-")?;
                    fmt_scalar(f, &-self.im.clone())?;
                } else {
                    write!(f, "+")?;
                    fmt_scalar(f, &self.im)?;
                }
                write!(f, "i)")
            }
        }
    }
}

impl fmt::Debug for Gauss {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// A similitude of the plane: `z ↦ u·z + t`, or `z ↦ u·z̄ + t` when `conj` is set.
///
/// The derived ordering is lexicographic on `(conj, u.re, u.im, t.re, t.im)`,
/// which is the canonical order used when serializing vertex sets.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PlanarMap {
    pub conj: bool,
    pub u: Gauss,
    pub t: Gauss,
}

impl PlanarMap {
    pub fn new(u: Gauss, conj: bool, t: Gauss) -> Self {
        assert!(!u.is_zero(), "planar map with zero linear part");
        PlanarMap { conj, u, t }
    }

    pub fn identity() -> Self {
        PlanarMap::new(Gauss::one(), false, Gauss::zero())
    }

    pub fn is_identity(&self) -> bool {
        !self.conj && self.u == Gauss::one() && self.t.is_zero()
    }

    pub fn apply(&self, z: &Gauss) -> Gauss {
        let arg = if self.conj { z.conj() } else { z.clone() };
        &(&self.u * &arg) + &self.t
    }

    /// `self ∘ g`: applies `g` first, then `self`.
    pub fn compose(&self, g: &PlanarMap) -> PlanarMap {
        // f(g(z)) = u_f·c_f(u_g·c_g(z) + t_g) + t_f, where c_x conjugates iff x.conj
        let (ug, tg) = if self.conj {
            (g.u.conj(), g.t.conj())
        } else {
            (g.u.clone(), g.t.clone())
        };
        PlanarMap {
            conj: self.conj ^ g.conj,
            u: &self.u * &ug,
            t: &(&self.u * &tg) + &self.t,
        }
    }

    pub fn invert(&self) -> PlanarMap {
        // z = u·c(w) + t  ⇒  c(w) = (z - t)/u  ⇒  w = c((z - t)/u)
        let inv = self.u.recip();
        let (u, t) = if self.conj {
            (inv.conj(), (&-&self.t * &inv).conj())
        } else {
            (inv.clone(), &-&self.t * &inv)
        };
        PlanarMap {
            conj: self.conj,
            u,
            t,
        }
    }

    /// Squared similarity ratio `|u|²`.
    pub fn ratio_sq(&self) -> Scalar {
        self.u.norm_sq()
    }

    pub fn to_float(&self) -> FloatMap {
        let (ur, ui) = self.u.to_f64();
        let (tr, ti) = self.t.to_f64();
        FloatMap {
            u: num_complex::Complex64::new(ur, ui),
            conj: self.conj,
            t: num_complex::Complex64::new(tr, ti),
        }
    }
}

impl fmt::Display for PlanarMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let z = if self.conj { "z̄" } else { "z" };
        if self.u == Gauss::one() {
            write!(f, "{z}")?;
        } else if self.u == -&Gauss::one() {
            write!(f, "-{z}")?;
        } else {
            write!(f, "{}{z}", self.u)?;
        }
        // A lone negative real or imaginary part reads better as subtraction.
        let lone_negative = (self.t.im.is_zero() && self.t.re.is_negative())
            || (self.t.re.is_zero() && self.t.im.is_negative());
        if lone_negative {
            write!(f, " - {}", -&self.t)?;
        } else if !self.t.is_zero() {
            write!(f, " + {}", self.t)?;
        }
        Ok(())
    }
}

impl fmt::Debug for PlanarMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Floating-point image of a [`PlanarMap`], used only by the renderer.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FloatMap {
    pub u: num_complex::Complex64,
    pub conj: bool,
    pub t: num_complex::Complex64,
}

impl FloatMap {
    pub fn identity() -> Self {
        FloatMap {
            u: num_complex::Complex64::new(1.0, 0.0),
            conj: false,
            t: num_complex::Complex64::new(0.0, 0.0),
        }
    }

    pub fn apply(&self, z: num_complex::Complex64) -> num_complex::Complex64 {
        let arg = if self.conj { z.conj() } else { z };
        self.u * arg + self.t
    }

    pub fn compose(&self, g: &FloatMap) -> FloatMap {
        let (ug, tg) = if self.conj {
            (g.u.conj(), g.t.conj())
        } else {
            (g.u, g.t)
        };
        FloatMap {
            u: self.u * ug,
            conj: self.conj ^ g.conj,
            t: self.u * tg + self.t,
        }
    }

    pub fn ratio(&self) -> f64 {
        self.u.norm()
    }
}
