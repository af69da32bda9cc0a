//! Dense univariate polynomials in the monomial basis.
//!
//! Every integrand that shows up in the element-level least-squares problem is
//! a polynomial, so integrals are taken exactly from antiderivatives.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Mul, Neg, Sub};

/// `c_0 + c_1 x + c_2 x^2 + ...` on the local element coordinate.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn new(coeffs: Vec<f64>) -> Self {
        let mut p = Polynomial { coeffs };
        p.trim();
        p
    }

    pub fn zero() -> Self {
        Polynomial { coeffs: Vec::new() }
    }

    pub fn constant(c: f64) -> Self {
        Polynomial::new(vec![c])
    }

    /// `x^k`
    pub fn monomial(k: usize) -> Self {
        let mut coeffs = vec![0.0; k + 1];
        coeffs[k] = 1.0;
        Polynomial { coeffs }
    }

    /// The bubble `x^k (l - x)`, which vanishes at both ends of `[0, l]`.
    pub fn bubble(k: usize, l: f64) -> Self {
        let mut coeffs = vec![0.0; k + 2];
        coeffs[k] = l;
        coeffs[k + 1] = -1.0;
        Polynomial::new(coeffs)
    }

    /// Left hat `(l - x) / l`.
    pub fn hat_left(l: f64) -> Self {
        Polynomial::new(vec![1.0, -1.0 / l])
    }

    /// Right hat `x / l`.
    pub fn hat_right(l: f64) -> Self {
        Polynomial::new(vec![0.0, 1.0 / l])
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Degree, with the zero polynomial reported as degree 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn derivative(&self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, &c)| k as f64 * c)
            .collect();
        Polynomial::new(coeffs)
    }

    pub fn scale(&self, s: f64) -> Self {
        Polynomial::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    /// Exact integral over `[a, b]`.
    pub fn integrate(&self, a: f64, b: f64) -> f64 {
        let mut pa = a;
        let mut pb = b;
        let mut sum = 0.0;
        for (k, &c) in self.coeffs.iter().enumerate() {
            sum += c * (pb - pa) / (k + 1) as f64;
            pa *= a;
            pb *= b;
        }
        sum
    }

    fn trim(&mut self) {
        while matches!(self.coeffs.last(), Some(&c) if c == 0.0) {
            self.coeffs.pop();
        }
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;

    fn add(self, rhs: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let coeffs = (0..n)
            .map(|k| {
                self.coeffs.get(k).copied().unwrap_or(0.0) + rhs.coeffs.get(k).copied().unwrap_or(0.0)
            })
            .collect();
        Polynomial::new(coeffs)
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;

    fn sub(self, rhs: &Polynomial) -> Polynomial {
        self + &(-rhs)
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;

    fn neg(self) -> Polynomial {
        self.scale(-1.0)
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;

    fn mul(self, rhs: &Polynomial) -> Polynomial {
        if self.is_zero() || rhs.is_zero() {
            return Polynomial::zero();
        }
        let mut coeffs = vec![0.0; self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in rhs.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        Polynomial::new(coeffs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bubble_vanishes_at_ends() {
        let l = 0.37;
        for k in 1..6 {
            let b = Polynomial::bubble(k, l);
            assert_eq!(b.eval(0.0), 0.0);
            assert!(b.eval(l).abs() < 1e-15);
        }
    }

    #[test]
    fn exact_integrals() {
        let l: f64 = 1.7;
        let b = Polynomial::bubble(1, l);
        let rel = |a: f64, b: f64| ((a - b) / b).abs();
        assert!(rel(b.integrate(0.0, l), l.powi(3) / 6.0) < 1e-14);
        assert!(rel((&b * &b).integrate(0.0, l), l.powi(5) / 30.0) < 1e-14);
    }

    #[test]
    fn derivative_and_arithmetic() {
        let p = Polynomial::new(vec![1.0, 2.0, 3.0]);
        assert_eq!(p.derivative(), Polynomial::new(vec![2.0, 6.0]));
        assert_eq!(p.derivative().derivative(), Polynomial::constant(6.0));
        assert!((&p - &p).is_zero());
        let q = &p * &Polynomial::monomial(1);
        assert_eq!(q.coeffs(), &[0.0, 1.0, 2.0, 3.0]);
        assert_eq!(q.eval(2.0), 2.0 + 8.0 + 24.0);
    }
}
