//! Univariate polynomials with exact rational coefficients.
//!
//! Coefficients are stored in ascending degree. A cached `f64` copy of the
//! coefficients backs the fast evaluation path used by the integrator; every
//! structural question (roots, multiplicities, signs at dyadic points) goes
//! through the exact path instead.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

#[derive(Clone, Debug)]
pub struct Polynomial {
    coeffs: Vec<BigRational>,
    approx: Vec<f64>,
}

impl PartialEq for Polynomial {
    fn eq(&self, other: &Self) -> bool {
        self.coeffs == other.coeffs
    }
}

impl Eq for Polynomial {}

pub fn rational(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Exact rational value of a finite float.
pub fn rational_from_f64(x: f64) -> Option<BigRational> {
    BigRational::from_float(x)
}

impl Polynomial {
    pub fn new(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.len() > 1 && coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(BigRational::zero());
        }
        let approx = coeffs.iter().map(|c| c.to_f64().unwrap_or(f64::NAN)).collect();
        Polynomial { coeffs, approx }
    }

    pub fn from_ratios(coeffs: &[(i64, i64)]) -> Self {
        Self::new(coeffs.iter().map(|&(n, d)| rational(n, d)).collect())
    }

    pub fn from_integers(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| rational(c, 1)).collect())
    }

    pub fn zero() -> Self {
        Self::new(Vec::new())
    }

    pub fn constant(c: BigRational) -> Self {
        Self::new(vec![c])
    }

    /// The monomial `x`.
    pub fn x() -> Self {
        Self::new(vec![BigRational::zero(), BigRational::one()])
    }

    /// `x - root`.
    pub fn linear_factor(root: BigRational) -> Self {
        Self::new(vec![-root, BigRational::one()])
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0].is_zero()
    }

    /// Degree, with the zero polynomial reported as degree 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coefficients(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn coefficients_f64(&self) -> &[f64] {
        &self.approx
    }

    pub fn leading(&self) -> &BigRational {
        &self.coeffs[self.coeffs.len() - 1]
    }

    /// Horner evaluation on the cached float coefficients.
    pub fn eval(&self, x: f64) -> f64 {
        self.approx.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    /// Term-by-term summation, kept as an independent check on [`Self::eval`].
    pub fn eval_naive(&self, x: f64) -> f64 {
        let mut power = 1.0;
        let mut sum = 0.0;
        for &c in &self.approx {
            sum += c * power;
            power *= x;
        }
        sum
    }

    pub fn eval_exact(&self, x: &BigRational) -> BigRational {
        self.coeffs
            .iter()
            .rev()
            .fold(BigRational::zero(), |acc, c| acc * x + c)
    }

    /// Sign of the exact value at a float abscissa (every finite float is a dyadic rational).
    pub fn sign_at(&self, x: f64) -> i8 {
        match rational_from_f64(x) {
            Some(r) => {
                let v = self.eval_exact(&r);
                if v.is_zero() {
                    0
                } else if v.is_positive() {
                    1
                } else {
                    -1
                }
            }
            None => 0,
        }
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() == 1 {
            return Self::zero();
        }
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * BigRational::from_integer(BigInt::from(i)))
                .collect(),
        )
    }

    pub fn scale(&self, factor: &BigRational) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * factor).collect())
    }

    pub fn pow(&self, exponent: u32) -> Self {
        let mut out = Self::constant(BigRational::one());
        for _ in 0..exponent {
            out = &out * self;
        }
        out
    }

    /// Multiplicity of `root` as a zero, using exact evaluation of successive derivatives.
    pub fn multiplicity(&self, root: &BigRational) -> usize {
        if self.is_zero() {
            return usize::MAX;
        }
        let mut p = self.clone();
        let mut m = 0;
        while !p.is_zero() && p.eval_exact(root).is_zero() {
            m += 1;
            p = p.derivative();
        }
        m
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;

    fn add(self, rhs: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let coeffs = (0..n)
            .map(|i| {
                let a = self.coeffs.get(i).cloned().unwrap_or_else(BigRational::zero);
                let b = rhs.coeffs.get(i).cloned().unwrap_or_else(BigRational::zero);
                a + b
            })
            .collect();
        Polynomial::new(coeffs)
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;

    fn neg(self) -> Polynomial {
        Polynomial::new(self.coeffs.iter().map(|c| -c).collect())
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;

    fn sub(self, rhs: &Polynomial) -> Polynomial {
        self + &(-rhs)
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;

    fn mul(self, rhs: &Polynomial) -> Polynomial {
        let mut coeffs = vec![BigRational::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        Polynomial::new(coeffs)
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let negative = c.is_negative();
            let mag = c.abs();
            if first {
                if negative {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if negative { " - " } else { " + " })?;
            }
            first = false;
            let unit = mag.is_one();
            if !unit || i == 0 {
                write!(f, "{}", mag)?;
            }
            let var = match i {
                0 => String::new(),
                1 => String::from("x"),
                _ => alloc::format!("x^{}", i),
            };
            if !var.is_empty() && !unit {
                f.write_str(" ")?;
            }
            f.write_str(&var)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    extern crate std;

    use super::*;
    use alloc::string::ToString;
    use proptest::prelude::*;

    #[test]
    fn trailing_zeros_are_trimmed() {
        let p = Polynomial::from_integers(&[1, 2, 0, 0]);
        assert_eq!(p.degree(), 1);
        assert!(Polynomial::from_integers(&[0, 0]).is_zero());
    }

    #[test]
    fn product_and_derivative() {
        // (x - 1)(x + 1) = x^2 - 1
        let p = &Polynomial::linear_factor(rational(1, 1)) * &Polynomial::linear_factor(rational(-1, 1));
        assert_eq!(p, Polynomial::from_integers(&[-1, 0, 1]));
        assert_eq!(p.derivative(), Polynomial::from_integers(&[0, 2]));
    }

    #[test]
    fn multiplicity_counts_repeated_roots() {
        let double = Polynomial::linear_factor(rational(1, 2)).pow(2);
        let p = &double * &Polynomial::linear_factor(rational(3, 1));
        assert_eq!(p.multiplicity(&rational(1, 2)), 2);
        assert_eq!(p.multiplicity(&rational(3, 1)), 1);
        assert_eq!(p.multiplicity(&rational(0, 1)), 0);
    }

    #[test]
    fn display_is_readable() {
        let p = Polynomial::from_ratios(&[(1, 16), (0, 1), (-9, 16), (0, 1), (3, 2), (0, 1), (-1, 1)]);
        assert_eq!(p.to_string(), "-x^6 + 3/2 x^4 - 9/16 x^2 + 1/16");
    }

    #[test]
    fn sign_at_is_exact_on_dyadics() {
        let p = Polynomial::linear_factor(rational(1, 2)).pow(2);
        assert_eq!(p.sign_at(0.5), 0);
        assert_eq!(p.sign_at(0.25), 1);
    }

    proptest! {
        #[test]
        fn horner_matches_naive_summation(
            coeffs in proptest::collection::vec((-20i64..20, 1i64..9), 1..9),
            num in -40i64..40,
            den in 1i64..16,
        ) {
            let p = Polynomial::from_ratios(&coeffs);
            let x = num as f64 / den as f64;
            let exact = p.eval_exact(&rational(num, den)).to_f64().unwrap();
            // Rounding in either summation order is bounded relative to sum |c_i| |x|^i.
            let scale: f64 = p
                .coefficients_f64()
                .iter()
                .enumerate()
                .map(|(i, c)| c.abs() * x.abs().powi(i as i32))
                .sum::<f64>()
                .max(f64::MIN_POSITIVE);
            prop_assert!((p.eval(x) - exact).abs() <= 1e-12 * scale);
            prop_assert!((p.eval_naive(x) - exact).abs() <= 1e-12 * scale);
        }
    }
}
