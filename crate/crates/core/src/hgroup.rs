//! The Heisenberg group H^n = C^n x R, its gauge, and horizontal calculus
//! on fields that supply exact second-order jets.
//!
//! Coordinates are always ordered (x_1..x_n, y_1..y_n, t).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, HnError, Result};
use crate::jet::Jet2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupElement {
    pub z: Vec<Complex64>,
    pub t: f64,
}

impl GroupElement {
    pub fn new(z: Vec<Complex64>, t: f64) -> Self {
        Self { z, t }
    }

    pub fn identity(n: usize) -> Self {
        Self { z: vec![Complex64::new(0.0, 0.0); n], t: 0.0 }
    }

    /// Build from real coordinates (x_1..x_n, y_1..y_n, t).
    pub fn from_coords(c: &[f64]) -> Self {
        let n = (c.len() - 1) / 2;
        let z = (0..n).map(|i| Complex64::new(c[i], c[n + i])).collect();
        Self { z, t: c[2 * n] }
    }

    pub fn coords(&self) -> Vec<f64> {
        let n = self.n();
        let mut c = vec![0.0; 2 * n + 1];
        for (i, zi) in self.z.iter().enumerate() {
            c[i] = zi.re;
            c[n + i] = zi.im;
        }
        c[2 * n] = self.t;
        c
    }

    pub fn n(&self) -> usize {
        self.z.len()
    }

    pub fn z_norm_sqr(&self) -> f64 {
        self.z.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn inv(&self) -> Self {
        Self { z: self.z.iter().map(|c| -c).collect(), t: -self.t }
    }

    /// Group law without the dimension check; callers guarantee equal n.
    pub fn mul(&self, o: &Self) -> Self {
        let z = self.z.iter().zip(&o.z).map(|(a, b)| a + b).collect();
        Self { z, t: self.t + o.t + 2.0 * twist(&self.z, &o.z) }
    }

    pub fn dilate(&self, lambda: f64) -> Self {
        Self { z: self.z.iter().map(|c| c * lambda).collect(), t: lambda * lambda * self.t }
    }
}

/// Im sum_i a_i conj(b_i).
#[inline]
pub fn twist(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| p.im * q.re - p.re * q.im).sum()
}

pub fn group_mul(a: &GroupElement, b: &GroupElement) -> Result<GroupElement> {
    if a.n() != b.n() {
        return Err(HnError::DimensionMismatch(a.n(), b.n()));
    }
    Ok(a.mul(b))
}

pub fn dilate(lambda: f64, xi: &GroupElement) -> Result<GroupElement> {
    if !(lambda > 0.0) {
        return invalid(format!("dilation factor must be positive, got {lambda}"));
    }
    Ok(xi.dilate(lambda))
}

pub fn koranyi_norm(xi: &GroupElement) -> f64 {
    let s = xi.z_norm_sqr();
    (s * s + xi.t * xi.t).sqrt().sqrt()
}

/// d(a, b) = rho(a^{-1} b).
pub fn distance(a: &GroupElement, b: &GroupElement) -> f64 {
    koranyi_norm(&a.inv().mul(b))
}

pub fn gauge_bracket(xi: &GroupElement) -> f64 {
    let s = 1.0 + xi.z_norm_sqr();
    (s * s + xi.t * xi.t).sqrt()
}

/// A field evaluated through its exact 2-jet in Euclidean coordinates.
pub trait ScalarField: Sync {
    fn n(&self) -> usize;
    fn jet(&self, xi: &GroupElement) -> Jet2;
    fn value(&self, xi: &GroupElement) -> f64 {
        self.jet(xi).value
    }
}

/// Seed jets for the coordinate functions at xi.
pub fn coordinate_jets(xi: &GroupElement) -> Vec<Jet2> {
    let c = xi.coords();
    let d = c.len();
    c.iter().enumerate().map(|(k, &v)| Jet2::variable(v, k, d)).collect()
}

/// A field given as a jet expression in the coordinates.
pub struct JetField<F> {
    n: usize,
    f: F,
}

impl<F: Fn(&[Jet2]) -> Jet2 + Sync> JetField<F> {
    pub fn new(n: usize, f: F) -> Self {
        Self { n, f }
    }
}

impl<F: Fn(&[Jet2]) -> Jet2 + Sync> ScalarField for JetField<F> {
    fn n(&self) -> usize {
        self.n
    }
    fn jet(&self, xi: &GroupElement) -> Jet2 {
        (self.f)(&coordinate_jets(xi))
    }
}

/// (X_1 f, .., X_n f, X_{n+1} f, .., X_{2n} f) from a jet at xi.
pub fn horizontal_gradient_jet(j: &Jet2, xi: &GroupElement) -> Vec<f64> {
    let n = xi.n();
    let ft = j.grad[2 * n];
    let mut g = vec![0.0; 2 * n];
    for (i, zi) in xi.z.iter().enumerate() {
        g[i] = j.grad[i] + 2.0 * zi.im * ft;
        g[n + i] = j.grad[n + i] - 2.0 * zi.re * ft;
    }
    g
}

pub fn horizontal_gradient<F: ScalarField + ?Sized>(f: &F, xi: &GroupElement) -> Vec<f64> {
    horizontal_gradient_jet(&f.jet(xi), xi)
}

/// sum_i X_i^2 + X_{n+i}^2 expanded in Euclidean derivatives.
pub fn kohn_laplacian_jet(j: &Jet2, xi: &GroupElement) -> f64 {
    let n = xi.n();
    let tt = 2 * n;
    let mut s = 0.0;
    for (i, zi) in xi.z.iter().enumerate() {
        let (x, y) = (zi.re, zi.im);
        s += j.h(i, i) + j.h(n + i, n + i) + 4.0 * y * j.h(i, tt) - 4.0 * x * j.h(n + i, tt)
            + 4.0 * (x * x + y * y) * j.h(tt, tt);
    }
    s
}

pub fn kohn_laplacian<F: ScalarField + ?Sized>(f: &F, xi: &GroupElement) -> f64 {
    kohn_laplacian_jet(&f.jet(xi), xi)
}

/// Right-invariant fields R_i = d_{x_i} - 2 y_i d_t, R_{n+i} = d_{y_i} + 2 x_i d_t.
/// These generate left translations and commute with every X_j.
pub fn right_gradient_jet(j: &Jet2, xi: &GroupElement) -> Vec<f64> {
    let n = xi.n();
    let ft = j.grad[2 * n];
    let mut g = vec![0.0; 2 * n];
    for (i, zi) in xi.z.iter().enumerate() {
        g[i] = j.grad[i] - 2.0 * zi.im * ft;
        g[n + i] = j.grad[n + i] + 2.0 * zi.re * ft;
    }
    g
}

/// Euclidean components of the horizontal field sum_j c_j X_j at xi.
pub fn horizontal_to_euclidean(c: &[f64], xi: &GroupElement) -> Vec<f64> {
    let n = xi.n();
    let mut v = vec![0.0; 2 * n + 1];
    let mut vt = 0.0;
    for (i, zi) in xi.z.iter().enumerate() {
        v[i] = c[i];
        v[n + i] = c[n + i];
        vt += 2.0 * zi.im * c[i] - 2.0 * zi.re * c[n + i];
    }
    v[2 * n] = vt;
    v
}

/// Finite-difference oracle (4th order central) for the horizontal
/// gradient and the Kohn Laplacian of a plain function of the coordinates.
pub fn fd_horizontal<G: Fn(&[f64]) -> f64>(g: &G, xi: &GroupElement, h: f64) -> (Vec<f64>, f64) {
    let c = xi.coords();
    let d = c.len();
    let n = xi.n();
    let at = |shift: &[(usize, f64)]| {
        let mut p = c.clone();
        for &(k, s) in shift {
            p[k] += s;
        }
        g(&p)
    };
    let d1 = |k: usize| {
        (-at(&[(k, 2.0 * h)]) + 8.0 * at(&[(k, h)]) - 8.0 * at(&[(k, -h)]) + at(&[(k, -2.0 * h)]))
            / (12.0 * h)
    };
    let d2 = |k: usize| {
        (-at(&[(k, 2.0 * h)]) + 16.0 * at(&[(k, h)]) - 30.0 * g(&c) + 16.0 * at(&[(k, -h)])
            - at(&[(k, -2.0 * h)]))
            / (12.0 * h * h)
    };
    // mixed partial from 4th-order first differences in each direction
    let dm = |a: usize, b: usize| {
        let w = [(-2.0, 1.0), (-1.0, -8.0), (1.0, 8.0), (2.0, -1.0)];
        let mut s = 0.0;
        for &(i, wi) in &w {
            for &(k, wk) in &w {
                s += wi * wk * at(&[(a, i * h), (b, k * h)]);
            }
        }
        s / (144.0 * h * h)
    };
    let grad: Vec<f64> = (0..d).map(d1).collect();
    let tt = 2 * n;
    let mut hg = vec![0.0; 2 * n];
    let mut lap = 0.0;
    for i in 0..n {
        let (x, y) = (c[i], c[n + i]);
        hg[i] = grad[i] + 2.0 * y * grad[tt];
        hg[n + i] = grad[n + i] - 2.0 * x * grad[tt];
        lap += d2(i) + d2(n + i) + 4.0 * y * dm(i, tt) - 4.0 * x * dm(n + i, tt)
            + 4.0 * (x * x + y * y) * d2(tt);
    }
    (hg, lap)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn group_law_example() {
        let a = GroupElement::new(vec![c(1.0, 0.0)], 0.0);
        let b = GroupElement::new(vec![c(0.0, 1.0)], 0.0);
        let p = group_mul(&a, &b).unwrap();
        assert_eq!(p.z[0], c(1.0, 1.0));
        assert_eq!(p.t, -2.0);
    }

    #[test]
    fn identity_and_inverse() {
        let xi = GroupElement::new(vec![c(0.3, -1.2), c(2.0, 0.5)], 0.7);
        let e = GroupElement::identity(2);
        assert_eq!(group_mul(&e, &xi).unwrap(), xi);
        assert_eq!(group_mul(&xi, &e).unwrap(), xi);
        let r = group_mul(&xi, &xi.inv()).unwrap();
        assert!(koranyi_norm(&r) < 1e-15);
    }

    #[test]
    fn mismatch_is_an_error() {
        let a = GroupElement::identity(1);
        let b = GroupElement::identity(2);
        assert_eq!(group_mul(&a, &b), Err(HnError::DimensionMismatch(1, 2)));
    }

    #[test]
    fn dilations() {
        let xi = GroupElement::new(vec![c(0.0, 0.0)], 1.0);
        assert_eq!(dilate(2.0, &xi).unwrap().t, 4.0);
        assert_eq!(dilate(1.0, &xi).unwrap(), xi);
        assert!(dilate(0.0, &xi).is_err());
        assert!(dilate(-1.0, &xi).is_err());
    }

    #[test]
    fn gauge_values() {
        assert_eq!(koranyi_norm(&GroupElement::identity(3)), 0.0);
        let unit = GroupElement::new(vec![c(0.6, 0.8)], 0.0);
        assert!((koranyi_norm(&unit) - 1.0).abs() < 1e-15);
        let t4 = GroupElement::new(vec![c(0.0, 0.0)], 4.0);
        assert!((koranyi_norm(&t4) - 2.0).abs() < 1e-15);
        assert_eq!(gauge_bracket(&GroupElement::identity(2)), 1.0);
        let t = GroupElement::new(vec![c(0.0, 0.0)], 3.0);
        assert!((gauge_bracket(&t) - 10f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn bracket_over_gauge_squared() {
        // rho = 1000 along a mixed direction
        let s: f64 = 0.6;
        let r: f64 = 1e3;
        let xi = GroupElement::new(vec![c(r * s.sqrt(), 0.0)], r * r * (1.0 - s * s).sqrt());
        assert!((koranyi_norm(&xi) - r).abs() < 1e-9 * r);
        let ratio = gauge_bracket(&xi) / (r * r);
        assert!((ratio - 1.0).abs() < 1e-4);
    }

    #[test]
    fn horizontal_gradient_of_t() {
        let f = JetField::new(1, |v: &[Jet2]| v[2].clone());
        let xi = GroupElement::new(vec![c(1.0, 1.0)], 0.0);
        assert_eq!(horizontal_gradient(&f, &xi), vec![2.0, -2.0]);
        let k = JetField::new(1, |v: &[Jet2]| Jet2::constant(5.0, v.len()));
        assert_eq!(horizontal_gradient(&k, &xi), vec![0.0, 0.0]);
        assert_eq!(kohn_laplacian(&k, &xi), 0.0);
    }

    #[test]
    fn linear_fields_are_harmonic() {
        let f = JetField::new(2, |v: &[Jet2]| {
            &(&v[0].scale(2.0) - &v[3].scale(0.5)) + &v[4].scale(7.0)
        });
        let xi = GroupElement::new(vec![c(0.4, -2.0), c(1.1, 0.3)], -0.8);
        assert!(kohn_laplacian(&f, &xi).abs() < 1e-14);
    }
}
