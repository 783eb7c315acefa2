//! Second-order forward jets over four coordinates.
//!
//! A [`Jet2`] carries a value together with its gradient and its Hessian,
//! the latter stored upper-triangular (10 entries). Arithmetic follows the
//! truncated Taylor rules, so composing jets yields exact first and second
//! partial derivatives up to rounding.

use std::ops::{Add, Div, Mul, Neg, Sub};

use num_complex::Complex64;

pub type C = Complex64;

pub const DIM: usize = 4;
pub const HESS_LEN: usize = 10;

const ZERO: C = C::new(0.0, 0.0);
const ONE: C = C::new(1.0, 0.0);

/// Position of `(i, j)` in the packed upper-triangular Hessian.
#[inline]
pub const fn hidx(i: usize, j: usize) -> usize {
    let (a, b) = if i <= j { (i, j) } else { (j, i) };
    // rows: 0 -> 0..4, 1 -> 4..7, 2 -> 7..9, 3 -> 9
    match a {
        0 => b,
        1 => 3 + b,
        2 => 5 + b,
        _ => 9,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet2 {
    pub value: C,
    pub grad: [C; DIM],
    pub hess: [C; HESS_LEN],
}

impl Jet2 {
    pub fn constant(value: C) -> Self {
        Self { value, grad: [ZERO; DIM], hess: [ZERO; HESS_LEN] }
    }

    /// The coordinate function `x_k` evaluated at `value`.
    pub fn variable(k: usize, value: C) -> Self {
        let mut grad = [ZERO; DIM];
        grad[k] = ONE;
        Self { value, grad, hess: [ZERO; HESS_LEN] }
    }

    #[inline]
    pub fn d(&self, i: usize) -> C {
        self.grad[i]
    }

    #[inline]
    pub fn dd(&self, i: usize, j: usize) -> C {
        self.hess[hidx(i, j)]
    }

    /// Full symmetric Hessian.
    pub fn hessian(&self) -> [[C; DIM]; DIM] {
        let mut h = [[ZERO; DIM]; DIM];
        for (i, row) in h.iter_mut().enumerate() {
            for (j, slot) in row.iter_mut().enumerate() {
                *slot = self.dd(i, j);
            }
        }
        h
    }

    /// Applies a univariate function given its value and first two derivatives
    /// at `self.value`.
    pub fn chain(&self, f: C, df: C, ddf: C) -> Self {
        let mut out = Self::constant(f);
        for i in 0..DIM {
            out.grad[i] = df * self.grad[i];
        }
        for i in 0..DIM {
            for j in i..DIM {
                out.hess[hidx(i, j)] =
                    ddf * self.grad[i] * self.grad[j] + df * self.hess[hidx(i, j)];
            }
        }
        out
    }

    pub fn scale(&self, s: C) -> Self {
        let mut out = *self;
        out.value *= s;
        out.grad.iter_mut().for_each(|g| *g *= s);
        out.hess.iter_mut().for_each(|h| *h *= s);
        out
    }

    pub fn recip(&self) -> Self {
        let u = self.value;
        let inv = ONE / u;
        self.chain(inv, -inv * inv, 2.0 * inv * inv * inv)
    }

    pub fn exp(&self) -> Self {
        let e = self.value.exp();
        self.chain(e, e, e)
    }

    pub fn ln(&self) -> Self {
        let u = self.value;
        let inv = ONE / u;
        self.chain(u.ln(), inv, -inv * inv)
    }

    pub fn sqrt(&self) -> Self {
        let u = self.value;
        let s = u.sqrt();
        let ds = 0.5 / s;
        self.chain(s, ds, -0.25 / (u * s))
    }

    pub fn powi(&self, n: i32) -> Self {
        let u = self.value;
        let nf = n as f64;
        let f = u.powi(n);
        let df = if n == 0 { ZERO } else { nf * u.powi(n - 1) };
        let ddf = if n == 0 || n == 1 { ZERO } else { nf * (nf - 1.0) * u.powi(n - 2) };
        self.chain(f, df, ddf)
    }

    /// `self ^ other` for a non-integer or non-constant exponent.
    pub fn powj(&self, other: &Jet2) -> Self {
        (other * &self.ln()).exp()
    }
}

impl Add for &Jet2 {
    type Output = Jet2;
    fn add(self, o: &Jet2) -> Jet2 {
        let mut out = *self;
        out.value += o.value;
        for i in 0..DIM {
            out.grad[i] += o.grad[i];
        }
        for i in 0..HESS_LEN {
            out.hess[i] += o.hess[i];
        }
        out
    }
}

impl Sub for &Jet2 {
    type Output = Jet2;
    fn sub(self, o: &Jet2) -> Jet2 {
        let mut out = *self;
        out.value -= o.value;
        for i in 0..DIM {
            out.grad[i] -= o.grad[i];
        }
        for i in 0..HESS_LEN {
            out.hess[i] -= o.hess[i];
        }
        out
    }
}

impl Mul for &Jet2 {
    type Output = Jet2;
    fn mul(self, o: &Jet2) -> Jet2 {
        let (a, b) = (self, o);
        let mut out = Jet2::constant(a.value * b.value);
        for i in 0..DIM {
            out.grad[i] = a.value * b.grad[i] + b.value * a.grad[i];
        }
        for i in 0..DIM {
            for j in i..DIM {
                let k = hidx(i, j);
                out.hess[k] = a.value * b.hess[k]
                    + b.value * a.hess[k]
                    + a.grad[i] * b.grad[j]
                    + a.grad[j] * b.grad[i];
            }
        }
        out
    }
}

impl Div for &Jet2 {
    type Output = Jet2;
    fn div(self, o: &Jet2) -> Jet2 {
        self * &o.recip()
    }
}

impl Neg for &Jet2 {
    type Output = Jet2;
    fn neg(self) -> Jet2 {
        self.scale(-ONE)
    }
}

macro_rules! by_value {
    ($tr:ident, $m:ident) => {
        impl $tr for Jet2 {
            type Output = Jet2;
            fn $m(self, o: Jet2) -> Jet2 {
                (&self).$m(&o)
            }
        }
    };
}
by_value!(Add, add);
by_value!(Sub, sub);
by_value!(Mul, mul);
by_value!(Div, div);

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> C {
        C::new(x, 0.0)
    }

    #[test]
    fn packed_index_is_a_bijection() {
        let mut seen = [false; HESS_LEN];
        for i in 0..DIM {
            for j in i..DIM {
                let k = hidx(i, j);
                assert!(!seen[k]);
                seen[k] = true;
                assert_eq!(k, hidx(j, i));
            }
        }
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn product_rule() {
        let x = Jet2::variable(0, c(3.0));
        let y = Jet2::variable(1, c(2.0));
        let p = &(&x * &x) * &y; // x^2 y
        assert_eq!(p.value, c(18.0));
        assert_eq!(p.d(0), c(12.0));
        assert_eq!(p.d(1), c(9.0));
        assert_eq!(p.dd(0, 0), c(4.0));
        assert_eq!(p.dd(0, 1), c(6.0));
        assert_eq!(p.dd(1, 1), c(0.0));
    }

    #[test]
    fn quotient_and_log() {
        let x = Jet2::variable(0, c(2.0));
        let q = Jet2::constant(c(1.0)) / x;
        assert!((q.dd(0, 0) - c(0.25)).norm() < 1e-15);
        let l = Jet2::variable(2, c(4.0)).ln();
        assert!((l.d(2) - c(0.25)).norm() < 1e-15);
        assert!((l.dd(2, 2) + c(1.0 / 16.0)).norm() < 1e-15);
    }

    #[test]
    fn sqrt_and_pow_agree() {
        let x = Jet2::variable(3, c(2.5));
        let s = x.sqrt();
        let p = x.powj(&Jet2::constant(c(0.5)));
        for k in 0..HESS_LEN {
            assert!((s.hess[k] - p.hess[k]).norm() < 1e-14);
        }
        let sq = &s * &s;
        assert!((sq.d(3) - c(1.0)).norm() < 1e-14);
        assert!(sq.dd(3, 3).norm() < 1e-14);
    }
}
