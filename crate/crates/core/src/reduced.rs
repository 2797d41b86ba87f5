//! The reduced energy of a single concentrating bubble,
//!     F(lambda, xi) = a R(xi) lambda^{2-Q} - eps |U|_2^2 lambda^{-2},
//!     a = Q (Q-2)^2 omega_Q B_Q / (2 alpha),
//! its critical scale, the boundary-exclusion margin, and a Newton solver
//! for the stationary system in (t, xi) with lambda = t eps^{-1/(Q-4)}.
//!
//! The Robin function is injected: closed-form models or a tabulated grid
//! read from CSV.

use std::io::Read;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::constants::{alpha_with_b, constants_table};
use crate::error::{invalid, HnError, Result};
use crate::hgroup::GroupElement;
use crate::params::Params;
use crate::parallel::map_indexed;
use crate::pohozaev::robin_asymptotic;
use crate::quadrature::rules::{gauss_legendre, RadialRule};
use crate::quadrature::{integrate_zonal, QuadratureSpec};
use crate::special::sphere_area;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReducedCoeffs {
    /// int U^{Q*}
    pub a_q: f64,
    /// int U^{Q*-1}
    pub b_q: f64,
    pub alpha: f64,
    pub omega_q: f64,
    /// int U^2
    pub u_l2: f64,
    /// Tail bounds beyond the truncation radius for a_q, b_q, u_l2.
    pub tails: [f64; 3],
}

impl ReducedCoeffs {
    /// a = Q (Q-2)^2 omega_Q B_Q / (2 alpha), the coefficient of R lambda^{2-Q}.
    pub fn robin_coefficient(&self, params: &Params) -> f64 {
        let q = params.qf();
        q * (q - 2.0).powi(2) * self.omega_q * self.b_q / (2.0 * self.alpha)
    }

    pub fn with_omega_q(mut self, omega_q: f64) -> Self {
        self.omega_q = omega_q;
        self
    }
}

fn bubble_power(n: usize, e: f64) -> impl Fn(f64, f64) -> f64 {
    let q = 2.0 * n as f64 + 2.0;
    move |s, t| ((1.0 + s).powi(2) + t * t).powf(-(q - 2.0) / 4.0 * e)
}

/// Coefficients by zonal quadrature; int U^2 needs 2(Q-2) > Q, so Q = 4 is
/// reported as divergent rather than truncated.
pub fn reduced_coeffs(params: &Params, spec: &QuadratureSpec) -> Result<ReducedCoeffs> {
    let n = params.n;
    let q = params.qf();
    if q < 5.0 {
        return Err(HnError::Divergent(format!(
            "int U^2 diverges logarithmically at Q = {q}; the reduced energy needs Q >= 5"
        )));
    }
    let qs = params.q_star;
    let integrate = |e: f64| integrate_zonal(n, bubble_power(n, e), (q - 2.0) * e, spec);
    let a = integrate(qs)?;
    let b = integrate(qs - 1.0)?;
    let l2 = integrate(2.0)?;
    let table = constants_table(params);
    Ok(ReducedCoeffs {
        a_q: a.value,
        b_q: b.value,
        alpha: alpha_with_b(n, params.mu, (n * n) as f64),
        omega_q: table.omega_q,
        u_l2: l2.value,
        tails: [a.tail_bound, b.tail_bound, l2.tail_bound],
    })
}

/// int_{rho < R} U^2 for a ladder of radii: increments between successive
/// radii stay constant when the integral diverges logarithmically and
/// shrink geometrically when it converges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct L2Growth {
    pub n: usize,
    pub radii: Vec<f64>,
    pub masses: Vec<f64>,
    pub increments: Vec<f64>,
    pub converges: bool,
}

pub fn l2_growth(n: usize, radii: &[f64], nodes: usize) -> Result<L2Growth> {
    if radii.len() < 3 || radii.windows(2).any(|w| w[1] <= w[0]) || radii[0] <= 0.0 {
        return invalid("need at least three increasing positive radii");
    }
    let q = 2.0 * n as f64 + 2.0;
    let f = bubble_power(n, 2.0);
    let (xb, wb) = gauss_legendre(nodes);
    let angles: Vec<(f64, f64, f64)> = xb
        .iter()
        .zip(&wb)
        .map(|(x, w)| {
            let b = (x + 1.0) * std::f64::consts::PI / 4.0;
            let a = std::f64::consts::PI * b.sin().powi(2);
            let wa = w * std::f64::consts::PI.powi(2) / 2.0 * b.sin() * b.cos() * a.sin().powi(n as i32 - 1);
            (a.sin(), a.cos(), wa)
        })
        .collect();
    let shell = |lo: f64, hi: f64| {
        let rad = if lo == 0.0 { RadialRule::origin(nodes, q - 1.0, hi) } else { RadialRule::chain(nodes, q - 1.0, lo, hi) };
        let parts = map_indexed(rad.r.len(), |k| {
            let r = rad.r[k];
            rad.w[k] * angles.iter().map(|&(sa, ca, wa)| wa * f(r * r * sa, r * r * ca)).sum::<f64>()
        });
        sphere_area(2 * n) * parts.iter().sum::<f64>()
    };
    let mut masses = Vec::with_capacity(radii.len());
    let mut acc = shell(0.0, radii[0]);
    masses.push(acc);
    for w in radii.windows(2) {
        acc += shell(w[0], w[1]);
        masses.push(acc);
    }
    let increments: Vec<f64> = masses.windows(2).map(|w| w[1] - w[0]).collect();
    let converges = increments.last().unwrap() < &(0.1 * increments[0]);
    Ok(L2Growth { n, radii: radii.to_vec(), masses, increments, converges })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReducedState {
    pub epsilon: f64,
    pub lambda: f64,
    pub robin_value: f64,
    pub robin_gradient: Vec<f64>,
}

impl ReducedState {
    pub fn new(epsilon: f64, lambda: f64, robin_value: f64, robin_gradient: Vec<f64>) -> Result<Self> {
        if !(epsilon > 0.0 && lambda > 0.0) {
            return invalid(format!("need eps > 0 and lambda > 0, got {epsilon}, {lambda}"));
        }
        Ok(Self { epsilon, lambda, robin_value, robin_gradient })
    }
}

/// F(lambda, xi) as displayed.
pub fn reduced_energy(state: &ReducedState, coeffs: &ReducedCoeffs, params: &Params) -> f64 {
    let q = params.qf();
    let l = state.lambda;
    coeffs.robin_coefficient(params) * state.robin_value * l.powf(2.0 - q) - state.epsilon * coeffs.u_l2 / (l * l)
}

/// The scale where F changes sign: lambda^{Q-4} = a R / (eps |U|_2^2).
pub fn sign_change_scale(robin_value: f64, epsilon: f64, coeffs: &ReducedCoeffs, params: &Params) -> Result<f64> {
    check_scale_args(robin_value, epsilon, params)?;
    let q = params.qf();
    Ok((coeffs.robin_coefficient(params) * robin_value / (epsilon * coeffs.u_l2)).powf(1.0 / (q - 4.0)))
}

fn check_scale_args(robin_value: f64, epsilon: f64, params: &Params) -> Result<()> {
    if params.q < 5 {
        return invalid(format!("critical scale needs Q >= 5 (exponent 1/(Q-4)), got Q = {}", params.q));
    }
    if !(robin_value > 0.0) {
        return invalid(format!("Robin value must be positive, got {robin_value}"));
    }
    if !(epsilon > 0.0) {
        return invalid(format!("epsilon must be positive, got {epsilon}"));
    }
    Ok(())
}

/// C~_1 = (Q (Q-2)^3 omega_Q R B_Q / (4 alpha |U|_2^2))^{1/(Q-4)}.
pub fn c_tilde_1(robin_value: f64, coeffs: &ReducedCoeffs, params: &Params) -> Result<f64> {
    check_scale_args(robin_value, 1.0, params)?;
    let q = params.qf();
    let inner = q * (q - 2.0).powi(3) * coeffs.omega_q * robin_value * coeffs.b_q / (4.0 * coeffs.alpha * coeffs.u_l2);
    Ok(inner.powf(1.0 / (q - 4.0)))
}

/// lambda(xi) = C~_1 eps^{-1/(Q-4)}.
pub fn critical_scale(robin_value: f64, epsilon: f64, coeffs: &ReducedCoeffs, params: &Params) -> Result<f64> {
    check_scale_args(robin_value, epsilon, params)?;
    Ok(c_tilde_1(robin_value, coeffs, params)? * epsilon.powf(-1.0 / (params.qf() - 4.0)))
}

/// d^2F/dlambda^2 at the critical scale, in closed form:
/// (Q-2)(Q-4) a R lambda^{-Q}.
pub fn second_derivative_at_critical(robin_value: f64, epsilon: f64, coeffs: &ReducedCoeffs, params: &Params) -> Result<f64> {
    let l = critical_scale(robin_value, epsilon, coeffs, params)?;
    let q = params.qf();
    Ok((q - 2.0) * (q - 4.0) * coeffs.robin_coefficient(params) * robin_value * l.powf(-q))
}

/// The margin by which the edges t = C~_1/2 and t = 2 C~_1 of the scale
/// window exceed the minimum, in units of (t - C~_1)^2 eps^{(Q-2)/(Q-4)}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryExclusion {
    pub t_star: f64,
    /// F at the minimum divided by eps^{(Q-2)/(Q-4)}.
    pub f_star: f64,
    pub c0_low: f64,
    pub c0_high: f64,
    /// -F_min R^{2/(Q-4)} / eps^{(Q-2)/(Q-4)} measured.
    pub b_tilde_measured: f64,
    /// (1 - 2/(Q-2)) (4 alpha / (Q (Q-2)^3 omega_Q B_Q))^{2/(Q-4)} |U|_2^{2(Q-2)/(Q-4)}
    pub b_tilde_closed: f64,
}

impl BoundaryExclusion {
    pub fn c0(&self) -> f64 {
        self.c0_low.min(self.c0_high)
    }
}

pub fn boundary_exclusion(robin_value: f64, epsilon: f64, coeffs: &ReducedCoeffs, params: &Params) -> Result<BoundaryExclusion> {
    check_scale_args(robin_value, epsilon, params)?;
    let q = params.qf();
    let t_star = c_tilde_1(robin_value, coeffs, params)?;
    let e_scale = epsilon.powf((q - 2.0) / (q - 4.0));
    let f_at = |t: f64| {
        let state = ReducedState {
            epsilon,
            lambda: t * epsilon.powf(-1.0 / (q - 4.0)),
            robin_value,
            robin_gradient: vec![],
        };
        reduced_energy(&state, coeffs, params) / e_scale
    };
    let f_star = f_at(t_star);
    let c0 = |t: f64| (f_at(t) - f_star) / (t - t_star).powi(2);
    let b_closed = (1.0 - 2.0 / (q - 2.0))
        * (4.0 * coeffs.alpha / (q * (q - 2.0).powi(3) * coeffs.omega_q * coeffs.b_q)).powf(2.0 / (q - 4.0))
        * coeffs.u_l2.powf((q - 2.0) / (q - 4.0));
    Ok(BoundaryExclusion {
        t_star,
        f_star,
        c0_low: c0(t_star / 2.0),
        c0_high: c0(2.0 * t_star),
        b_tilde_measured: -f_star * robin_value.powf(2.0 / (q - 4.0)),
        b_tilde_closed: b_closed,
    })
}

/// A Robin function R(xi) with its Euclidean gradient in (x, y, t).
pub trait RobinField: Sync {
    fn n(&self) -> usize;
    fn eval(&self, xi: &GroupElement) -> (f64, Vec<f64>);
}

/// R = base + curvature |xi|^2 in Euclidean coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticRobin {
    pub n: usize,
    pub base: f64,
    pub curvature: f64,
}

impl RobinField for QuadraticRobin {
    fn n(&self) -> usize {
        self.n
    }
    fn eval(&self, xi: &GroupElement) -> (f64, Vec<f64>) {
        let c = xi.coords();
        let r2: f64 = c.iter().map(|v| v * v).sum();
        (self.base + self.curvature * r2, c.iter().map(|v| 2.0 * self.curvature * v).collect())
    }
}

/// Near-boundary model on the half-space {x_1 > 0}: R(xi) is the leading
/// Robin asymptotic at distance x_1. Its gradient never vanishes.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfSpaceRobin {
    pub params: Params,
}

impl RobinField for HalfSpaceRobin {
    fn n(&self) -> usize {
        self.params.n
    }
    fn eval(&self, xi: &GroupElement) -> (f64, Vec<f64>) {
        let d = xi.z[0].re;
        let mut g = vec![0.0; 2 * self.params.n + 1];
        match robin_asymptotic(d, &self.params) {
            Ok(r) => {
                g[0] = -r.gradient_magnitude;
                (r.value, g)
            }
            Err(_) => (f64::NAN, g.iter().map(|_| f64::NAN).collect()),
        }
    }
}

/// Tabulated R and gradient on a rectilinear grid, multilinear in between.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedRobin {
    n: usize,
    axes: Vec<Vec<f64>>,
    /// Row-major over the axes, last axis fastest; each entry is
    /// (R, gradient components).
    values: Vec<Vec<f64>>,
}

impl TabulatedRobin {
    /// CSV with a header. Columns: x_1..x_n, y_1..y_n, t, R, then 2n+1
    /// gradient components. Rows may come in any order but must fill the
    /// grid spanned by the distinct coordinate values.
    pub fn from_csv<R: Read>(n: usize, reader: R) -> Result<Self> {
        let dim = 2 * n + 1;
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| HnError::InvalidArgument(format!("csv row {}: {e}", line + 2)))?;
            if rec.len() != 2 * dim + 1 {
                return invalid(format!("csv row {}: expected {} columns, found {}", line + 2, 2 * dim + 1, rec.len()));
            }
            let vals = rec
                .iter()
                .map(|s| s.parse::<f64>())
                .collect::<std::result::Result<Vec<f64>, _>>()
                .map_err(|e| HnError::InvalidArgument(format!("csv row {}: {e}", line + 2)))?;
            rows.push(vals);
        }
        let mut axes: Vec<Vec<f64>> = (0..dim)
            .map(|k| {
                let mut a: Vec<f64> = rows.iter().map(|r| r[k]).collect();
                a.sort_by(|x, y| x.partial_cmp(y).unwrap());
                a.dedup();
                a
            })
            .collect();
        for a in &mut axes {
            if a.len() < 2 {
                return invalid("every grid axis needs at least two distinct values");
            }
        }
        let total: usize = axes.iter().map(|a| a.len()).product();
        if rows.len() != total {
            return invalid(format!("grid has {total} nodes but the csv has {} rows", rows.len()));
        }
        let mut values = vec![Vec::new(); total];
        for r in rows {
            let mut idx = 0;
            for (k, a) in axes.iter().enumerate() {
                let pos = a.iter().position(|v| *v == r[k]).unwrap();
                idx = idx * a.len() + pos;
            }
            if !values[idx].is_empty() {
                return invalid("duplicate grid node in csv");
            }
            values[idx] = r[dim..].to_vec();
        }
        Ok(Self { n, axes, values })
    }

    pub fn bounds(&self) -> (Vec<f64>, Vec<f64>) {
        (self.axes.iter().map(|a| a[0]).collect(), self.axes.iter().map(|a| *a.last().unwrap()).collect())
    }
}

impl RobinField for TabulatedRobin {
    fn n(&self) -> usize {
        self.n
    }
    fn eval(&self, xi: &GroupElement) -> (f64, Vec<f64>) {
        let c = xi.coords();
        let dim = c.len();
        // cell index and local coordinate per axis, clamped to the grid
        let cell: Vec<(usize, f64)> = self
            .axes
            .iter()
            .zip(&c)
            .map(|(a, &x)| {
                let i = a.partition_point(|v| *v <= x).clamp(1, a.len() - 1) - 1;
                let s = ((x - a[i]) / (a[i + 1] - a[i])).clamp(0.0, 1.0);
                (i, s)
            })
            .collect();
        let mut out = vec![0.0; dim + 1];
        for corner in 0..(1usize << dim) {
            let mut idx = 0;
            let mut w = 1.0;
            for (k, &(i, s)) in cell.iter().enumerate() {
                let bit = (corner >> (dim - 1 - k)) & 1;
                idx = idx * self.axes[k].len() + i + bit;
                w *= if bit == 1 { s } else { 1.0 - s };
            }
            if w != 0.0 {
                for (o, v) in out.iter_mut().zip(&self.values[idx]) {
                    *o += w * v;
                }
            }
        }
        (out[0], out[1..].to_vec())
    }
}

/// Axis-aligned box in the Euclidean coordinates (x, y, t).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl SearchBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() || lo.iter().zip(&hi).any(|(a, b)| !(a < b)) {
            return invalid("search box needs lo < hi componentwise");
        }
        Ok(Self { lo, hi })
    }

    pub fn centered(center: &[f64], half_width: f64) -> Self {
        Self {
            lo: center.iter().map(|c| c - half_width).collect(),
            hi: center.iter().map(|c| c + half_width).collect(),
        }
    }

    fn contains(&self, x: &[f64]) -> bool {
        x.iter().zip(self.lo.iter().zip(&self.hi)).all(|(v, (a, b))| *v >= *a && *v <= *b)
    }

    fn clamp(&self, x: &mut [f64]) {
        for (v, (a, b)) in x.iter_mut().zip(self.lo.iter().zip(&self.hi)) {
            *v = v.clamp(*a, *b);
        }
    }

    fn center(&self) -> Vec<f64> {
        self.lo.iter().zip(&self.hi).map(|(a, b)| (a + b) / 2.0).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReducedSolution {
    pub lambda: f64,
    pub t: f64,
    pub xi: GroupElement,
    pub converged: bool,
    pub residual: f64,
    pub iterations: usize,
}

const MAX_ITER: usize = 100;
const TOL: f64 = 1e-12;

/// Residual of the stationary system: grad R(xi) and
/// G(t, xi) = 1 - (C~_1(xi)/t)^{Q-4}, which vanishes exactly where dF/dt = 0.
fn system<R: RobinField + ?Sized>(
    field: &R,
    x: &[f64],
    coeffs: &ReducedCoeffs,
    params: &Params,
) -> Option<Vec<f64>> {
    let dim = x.len() - 1;
    let xi = GroupElement::from_coords(&x[..dim]);
    let (r, g) = field.eval(&xi);
    if !(r > 0.0) || g.iter().any(|v| !v.is_finite()) {
        return None;
    }
    let c1 = c_tilde_1(r, coeffs, params).ok()?;
    let mut out = g;
    out.push(1.0 - (c1 / x[dim]).powf(params.qf() - 4.0));
    Some(out)
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

fn newton<R: RobinField + ?Sized>(
    field: &R,
    start: Vec<f64>,
    search: &SearchBox,
    coeffs: &ReducedCoeffs,
    params: &Params,
) -> (Vec<f64>, f64, usize) {
    let m = start.len();
    let mut x = start;
    let mut res = match system(field, &x, coeffs, params) {
        Some(r) => r,
        None => return (x, f64::INFINITY, 0),
    };
    let mut it = 0;
    while it < MAX_ITER && norm(&res) > TOL {
        it += 1;
        let mut jac = DMatrix::<f64>::zeros(m, m);
        for k in 0..m {
            let h = 1e-6 * x[k].abs().max(1.0);
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[k] += h;
            xm[k] -= h;
            let (Some(rp), Some(rm)) = (system(field, &xp, coeffs, params), system(field, &xm, coeffs, params)) else {
                return (x, norm(&res), it);
            };
            for i in 0..m {
                jac[(i, k)] = (rp[i] - rm[i]) / (2.0 * h);
            }
        }
        let Some(step) = jac.lu().solve(&-DVector::from_vec(res.clone())) else {
            return (x, norm(&res), it);
        };
        // backtracking on the residual norm; the xi part stays in the box
        let base = norm(&res);
        let mut damp = 1.0;
        let mut accepted = false;
        while damp > 1e-6 {
            let mut xn: Vec<f64> = x.iter().zip(step.iter()).map(|(a, s)| a + damp * s).collect();
            search.clamp(&mut xn[..m - 1]);
            xn[m - 1] = xn[m - 1].max(1e-300);
            if let Some(rn) = system(field, &xn, coeffs, params) {
                if norm(&rn) < base {
                    x = xn;
                    res = rn;
                    accepted = true;
                    break;
                }
            }
            damp /= 2.0;
        }
        if !accepted {
            break;
        }
    }
    let r = norm(&res);
    (x, r, it)
}

/// Damped Newton from the box centre and its corners (run concurrently);
/// a root counts only if its residual is below 1e-10, xi lies in the box
/// and t lies in [C~_1(xi)/2, 2 C~_1(xi)].
pub fn solve_reduced_system<R: RobinField + ?Sized>(
    field: &R,
    epsilon: f64,
    search: &SearchBox,
    coeffs: &ReducedCoeffs,
    params: &Params,
) -> Result<ReducedSolution> {
    let dim = 2 * params.n + 1;
    if field.n() != params.n || search.lo.len() != dim {
        return Err(HnError::DimensionMismatch(dim, search.lo.len()));
    }
    check_scale_args(1.0, epsilon, params)?;
    let center = search.center();
    let mut starts = vec![center.clone()];
    for corner in 0..(1usize << dim).min(64) {
        starts.push(
            (0..dim)
                .map(|k| {
                    let (a, b) = (search.lo[k], search.hi[k]);
                    let far = if (corner >> k) & 1 == 1 { b } else { a };
                    center[k] + 0.5 * (far - center[k])
                })
                .collect(),
        );
    }
    let runs = map_indexed(starts.len(), |i| {
        let xi0 = GroupElement::from_coords(&starts[i]);
        let r0 = field.eval(&xi0).0;
        let t0 = c_tilde_1(r0, coeffs, params).unwrap_or(1.0);
        let mut x = starts[i].clone();
        x.push(t0);
        newton(field, x, search, coeffs, params)
    });
    let valid = |x: &[f64], r: f64| -> bool {
        if !(r < 1e-10) || !search.contains(&x[..dim]) {
            return false;
        }
        let xi = GroupElement::from_coords(&x[..dim]);
        match c_tilde_1(field.eval(&xi).0, coeffs, params) {
            Ok(c1) => x[dim] >= c1 / 2.0 && x[dim] <= 2.0 * c1,
            Err(_) => false,
        }
    };
    let best = runs
        .iter()
        .enumerate()
        .filter(|(_, (x, r, _))| valid(x, *r))
        .min_by(|a, b| a.1 .1.partial_cmp(&b.1 .1).unwrap())
        .or_else(|| runs.iter().enumerate().min_by(|a, b| a.1 .1.partial_cmp(&b.1 .1).unwrap()))
        .map(|(i, _)| i)
        .unwrap();
    let (x, r, it) = &runs[best];
    let converged = valid(x, *r);
    let t = x[dim];
    Ok(ReducedSolution {
        lambda: t * epsilon.powf(-1.0 / (params.qf() - 4.0)),
        t,
        xi: GroupElement::from_coords(&x[..dim]),
        converged,
        residual: *r,
        iterations: *it,
    })
}
