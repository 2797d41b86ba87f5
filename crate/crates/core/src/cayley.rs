//! The Cayley transform H^n -> S^{2n+1}, its inverse and Jacobian, and the
//! conformal pushforward of functions.
//!
//! The map is taken as C(z, t) = (2z / (1+|z|^2-it), (1-|z|^2+it)/(1+|z|^2-it)).
//! With this orientation of t the chordal distance of two images factors
//! through the left-invariant distance d(xi, eta) = rho(xi^{-1} eta).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{HnError, Result};
use crate::hgroup::{distance, gauge_bracket, GroupElement};
use crate::sphere::SpherePoint;

/// Points with |1 + zeta_{n+1}| below this are treated as the pole.
pub const POLE_RADIUS: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CayleyImage {
    pub point: SpherePoint,
    pub jacobian: f64,
}

pub fn jacobian(xi: &GroupElement) -> f64 {
    let n = xi.n() as i32;
    2f64.powi(2 * n + 1) * gauge_bracket(xi).powi(-2 * (n + 1))
}

pub fn cayley(xi: &GroupElement) -> CayleyImage {
    let s = xi.z_norm_sqr();
    let den = Complex64::new(1.0 + s, -xi.t);
    let mut zeta: Vec<Complex64> = xi.z.iter().map(|z| 2.0 * z / den).collect();
    zeta.push(Complex64::new(1.0 - s, xi.t) / den);
    CayleyImage { point: SpherePoint::from_unit(zeta), jacobian: jacobian(xi) }
}

pub fn cayley_inv(zeta: &SpherePoint) -> Result<GroupElement> {
    let n = zeta.n();
    let last = zeta.zeta[n];
    let one_plus = Complex64::new(1.0, 0.0) + last;
    if one_plus.norm() < POLE_RADIUS {
        return Err(HnError::Pole);
    }
    let z = zeta.zeta[..n].iter().map(|c| c / one_plus).collect();
    let t = -((Complex64::new(1.0, 0.0) - last) / one_plus).im;
    Ok(GroupElement::new(z, t))
}

/// (|1 - C(xi).conj C(eta)|, 2 d(xi,eta)^2 / (<xi><eta>)).
pub fn distance_identity_check(xi: &GroupElement, eta: &GroupElement) -> (f64, f64) {
    let a = cayley(xi).point;
    let b = cayley(eta).point;
    let lhs = (Complex64::new(1.0, 0.0) - a.dot_conj(&b)).norm();
    let rhs = 2.0 * distance(xi, eta).powi(2) / (gauge_bracket(xi) * gauge_bracket(eta));
    (lhs, rhs)
}

fn weight_exponent(n: usize) -> f64 {
    let q = 2.0 * n as f64 + 2.0;
    (q - 2.0) / (2.0 * q)
}

/// C_* f (zeta) = J(C^{-1} zeta)^{-(Q-2)/(2Q)} f(C^{-1} zeta).
pub fn pushforward<F: Fn(&GroupElement) -> f64>(f: F, zeta: &SpherePoint) -> Result<f64> {
    let xi = cayley_inv(zeta)?;
    Ok(jacobian(&xi).powf(-weight_exponent(xi.n())) * f(&xi))
}

/// C^* F (xi) = J(xi)^{(Q-2)/(2Q)} F(C xi), the inverse of `pushforward`.
pub fn pullback<F: Fn(&SpherePoint) -> f64>(big_f: F, xi: &GroupElement) -> f64 {
    jacobian(xi).powf(weight_exponent(xi.n())) * big_f(&cayley(xi).point)
}

/// The constant value of C_* U for the unit bubble: 2^{-(Q-1)(Q-2)/(2Q)}.
pub fn bubble_pushforward_constant(n: usize) -> f64 {
    let q = 2.0 * n as f64 + 2.0;
    2f64.powf(-(q - 1.0) * (q - 2.0) / (2.0 * q))
}

/// Gram determinant sqrt(det(D^T D)) of the chart map by central
/// differences; the oracle for `jacobian`.
pub fn jacobian_numeric(xi: &GroupElement, h: f64) -> f64 {
    let c = xi.coords();
    let d = c.len();
    let m = 2 * (xi.n() + 1);
    let embed = |p: &[f64]| cayley(&GroupElement::from_coords(p)).point.real_coords();
    let mut cols = nalgebra::DMatrix::<f64>::zeros(m, d);
    for k in 0..d {
        let mut p = c.clone();
        let mut q = c.clone();
        p[k] += h;
        q[k] -= h;
        let (a, b) = (embed(&p), embed(&q));
        let mut p2 = c.clone();
        let mut q2 = c.clone();
        p2[k] += 2.0 * h;
        q2[k] -= 2.0 * h;
        let (a2, b2) = (embed(&p2), embed(&q2));
        for r in 0..m {
            cols[(r, k)] = (8.0 * (a[r] - b[r]) - (a2[r] - b2[r])) / (12.0 * h);
        }
    }
    (cols.transpose() * cols).determinant().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hgroup::koranyi_norm;
    use crate::quadrature::{integrate_hn, QuadratureSpec};
    use crate::sphere::{sphere_integrate, SphereSampler};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_point(n: usize, rng: &mut ChaCha8Rng, scale: f64) -> GroupElement {
        let c: Vec<f64> = (0..2 * n + 1).map(|_| scale * (2.0 * rng.random::<f64>() - 1.0)).collect();
        GroupElement::from_coords(&c)
    }

    #[test]
    fn origin_maps_to_north_pole() {
        for n in 1..4 {
            let im = cayley(&GroupElement::identity(n));
            assert_eq!(im.point.zeta[n], Complex64::new(1.0, 0.0));
            assert_eq!(im.jacobian, 2f64.powi(2 * n as i32 + 1));
            assert_eq!(cayley_inv(&im.point).unwrap(), GroupElement::identity(n));
        }
    }

    #[test]
    fn round_trips() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in 1..3 {
            for _ in 0..1000 {
                let xi = random_point(n, &mut rng, 5.0);
                let im = cayley(&xi);
                assert!((im.point.norm_sqr() - 1.0).abs() < 1e-12);
                let back = cayley_inv(&im.point).unwrap();
                assert!(koranyi_norm(&back.inv().mul(&xi)) < 1e-6);
                for (a, b) in back.coords().iter().zip(xi.coords()) {
                    assert!((a - b).abs() < 1e-10 * (1.0 + b.abs()));
                }
                let zeta = SpherePoint::sample(n, &mut rng);
                if (Complex64::new(1.0, 0.0) + zeta.zeta[n]).norm() > 1e-3 {
                    let again = cayley(&cayley_inv(&zeta).unwrap()).point;
                    for (a, b) in again.zeta.iter().zip(&zeta.zeta) {
                        assert!((a - b).norm() < 1e-10);
                    }
                }
            }
        }
    }

    #[test]
    fn pole_is_rejected() {
        let mut z = vec![Complex64::new(0.0, 0.0); 2];
        z[1] = Complex64::new(-1.0, 0.0);
        assert_eq!(cayley_inv(&SpherePoint::from_unit(z.clone())), Err(HnError::Pole));
        z[0] = Complex64::new(1e-9, 0.0);
        z[1] = Complex64::new(-(1.0f64 - 1e-18).sqrt(), 0.0);
        assert_eq!(cayley_inv(&SpherePoint::from_unit(z)), Err(HnError::Pole));
    }

    #[test]
    fn distance_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for n in 1..3 {
            for _ in 0..1000 {
                let xi = random_point(n, &mut rng, 3.0);
                let eta = random_point(n, &mut rng, 3.0);
                let (l, r) = distance_identity_check(&xi, &eta);
                assert!((l - r).abs() <= 1e-10 * l, "{l} {r}");
            }
            let xi = random_point(n, &mut rng, 2.0);
            let (l, r) = distance_identity_check(&xi, &GroupElement::identity(n));
            let want = 2.0 * koranyi_norm(&xi).powi(2) / gauge_bracket(&xi);
            assert!((l - want).abs() < 1e-12 && (r - want).abs() < 1e-12);
            let (l, r) = distance_identity_check(&xi, &xi);
            assert!(l < 1e-15 && r == 0.0);
        }
    }

    #[test]
    fn jacobian_matches_differential() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 1..3 {
            for _ in 0..50 {
                let mut xi = random_point(n, &mut rng, 2.0);
                while koranyi_norm(&xi) > 3.0 {
                    xi = random_point(n, &mut rng, 2.0);
                }
                let a = jacobian(&xi);
                let b = jacobian_numeric(&xi, 1e-3);
                assert!((a - b).abs() < 1e-6 * a.max(1.0), "{a} {b}");
            }
        }
    }

    #[test]
    fn bubble_pushes_to_a_constant() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for n in 1..4 {
            let q = 2.0 * n as f64 + 2.0;
            let u = |xi: &GroupElement| gauge_bracket(xi).powf(-(q - 2.0) / 2.0);
            let c = bubble_pushforward_constant(n);
            for _ in 0..100 {
                let zeta = SpherePoint::sample(n, &mut rng);
                let v = pushforward(u, &zeta).unwrap();
                assert!((v - c).abs() < 1e-12, "{v} vs {c}");
            }
        }
        assert!((bubble_pushforward_constant(1) - 2f64.powf(-0.75)).abs() < 1e-15);
    }

    #[test]
    fn push_and_pull_are_inverse() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let big_f = |z: &SpherePoint| z.zeta[0].re - 0.3 * z.zeta[1].im + z.zeta[1].re.powi(2);
        for _ in 0..200 {
            let zeta = SpherePoint::sample(1, &mut rng);
            let v = pushforward(|xi| pullback(big_f, xi), &zeta).unwrap();
            assert!((v - big_f(&zeta)).abs() < 1e-10);
        }
    }

    #[test]
    fn integral_transport() {
        // F concentrated near the north pole
        let big_f = |z: &SpherePoint| (4.0 * (z.zeta[1].re - 1.0)).exp() * (1.0 + z.zeta[0].re.powi(2));
        let sphere = sphere_integrate(1, big_f, &SphereSampler::new(9, 400_000)).unwrap();
        let flat = integrate_hn(
            1,
            |xi| {
                let im = cayley(xi);
                big_f(&im.point) * im.jacobian
            },
            8.0,
            &QuadratureSpec::tensor(32, 32),
        )
        .unwrap();
        assert!((sphere.estimate / flat.value - 1.0).abs() < 0.01, "{sphere:?} {flat:?}");
        assert!((sphere.estimate - flat.value).abs() < 4.0 * sphere.std_error);
    }
}
