//! Second-order jets: value, gradient and Hessian of a scalar field in
//! d real variables, propagated exactly through arithmetic.

use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Debug, Clone, PartialEq)]
pub struct Jet2 {
    pub value: f64,
    pub grad: Vec<f64>,
    /// Row-major d x d.
    pub hess: Vec<f64>,
}

impl Jet2 {
    pub fn constant(value: f64, dim: usize) -> Self {
        Self { value, grad: vec![0.0; dim], hess: vec![0.0; dim * dim] }
    }

    /// The coordinate function x_k evaluated at `value`.
    pub fn variable(value: f64, k: usize, dim: usize) -> Self {
        let mut j = Self::constant(value, dim);
        j.grad[k] = 1.0;
        j
    }

    pub fn dim(&self) -> usize {
        self.grad.len()
    }

    #[inline]
    pub fn h(&self, i: usize, k: usize) -> f64 {
        self.hess[i * self.dim() + k]
    }

    /// Chain rule for g(self) given g, g', g'' at self.value.
    pub fn chain(&self, g0: f64, g1: f64, g2: f64) -> Self {
        let d = self.dim();
        let grad: Vec<f64> = self.grad.iter().map(|v| g1 * v).collect();
        let mut hess = vec![0.0; d * d];
        for i in 0..d {
            for k in 0..d {
                hess[i * d + k] = g1 * self.hess[i * d + k] + g2 * self.grad[i] * self.grad[k];
            }
        }
        Self { value: g0, grad, hess }
    }

    pub fn scale(&self, c: f64) -> Self {
        Self {
            value: c * self.value,
            grad: self.grad.iter().map(|v| c * v).collect(),
            hess: self.hess.iter().map(|v| c * v).collect(),
        }
    }

    pub fn add_const(&self, c: f64) -> Self {
        let mut j = self.clone();
        j.value += c;
        j
    }

    pub fn powf(&self, p: f64) -> Self {
        let v = self.value;
        self.chain(v.powf(p), p * v.powf(p - 1.0), p * (p - 1.0) * v.powf(p - 2.0))
    }

    pub fn powi(&self, k: i32) -> Self {
        let v = self.value;
        let kf = k as f64;
        let d1 = if k == 0 { 0.0 } else { kf * v.powi(k - 1) };
        let d2 = if k < 2 && k >= 0 { 0.0 } else { kf * (kf - 1.0) * v.powi(k - 2) };
        self.chain(v.powi(k), d1, d2)
    }

    pub fn sqrt(&self) -> Self {
        let s = self.value.sqrt();
        self.chain(s, 0.5 / s, -0.25 / (s * self.value))
    }

    pub fn exp(&self) -> Self {
        let e = self.value.exp();
        self.chain(e, e, e)
    }

    pub fn ln(&self) -> Self {
        let v = self.value;
        self.chain(v.ln(), 1.0 / v, -1.0 / (v * v))
    }

    pub fn recip(&self) -> Self {
        let v = self.value;
        self.chain(1.0 / v, -1.0 / (v * v), 2.0 / (v * v * v))
    }

    /// Largest |H_ik - H_ki| relative to the largest |H|.
    pub fn asymmetry(&self) -> f64 {
        let d = self.dim();
        let scale = self.hess.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
        let mut worst = 0.0f64;
        for i in 0..d {
            for k in 0..i {
                worst = worst.max((self.h(i, k) - self.h(k, i)).abs());
            }
        }
        worst / scale
    }
}

impl Add for &Jet2 {
    type Output = Jet2;
    fn add(self, o: &Jet2) -> Jet2 {
        Jet2 {
            value: self.value + o.value,
            grad: self.grad.iter().zip(&o.grad).map(|(a, b)| a + b).collect(),
            hess: self.hess.iter().zip(&o.hess).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &Jet2 {
    type Output = Jet2;
    fn sub(self, o: &Jet2) -> Jet2 {
        Jet2 {
            value: self.value - o.value,
            grad: self.grad.iter().zip(&o.grad).map(|(a, b)| a - b).collect(),
            hess: self.hess.iter().zip(&o.hess).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &Jet2 {
    type Output = Jet2;
    fn mul(self, o: &Jet2) -> Jet2 {
        let d = self.dim();
        let (a, b) = (self.value, o.value);
        let grad = (0..d).map(|i| a * o.grad[i] + b * self.grad[i]).collect();
        let mut hess = vec![0.0; d * d];
        for i in 0..d {
            for k in 0..d {
                hess[i * d + k] = a * o.hess[i * d + k]
                    + b * self.hess[i * d + k]
                    + self.grad[i] * o.grad[k]
                    + self.grad[k] * o.grad[i];
            }
        }
        Jet2 { value: a * b, grad, hess }
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
        self.scale(-1.0)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for Jet2 {
            type Output = Jet2;
            fn $m(self, o: Jet2) -> Jet2 {
                (&self).$m(&o)
            }
        }
        impl $tr<&Jet2> for Jet2 {
            type Output = Jet2;
            fn $m(self, o: &Jet2) -> Jet2 {
                (&self).$m(o)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);

impl Neg for Jet2 {
    type Output = Jet2;
    fn neg(self) -> Jet2 {
        self.scale(-1.0)
    }
}
