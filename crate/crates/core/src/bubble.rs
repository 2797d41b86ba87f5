//! The bubble family U_{lambda, eta0}, its kernel elements, closed-form Riesz
//! potentials, the Euler-Lagrange residual and the linearized operator.
//!
//! Everything is computed on exact 2-jets. A bubble with parameters
//! (lambda, center, amplitude) is amplitude * lambda^{-(Q-2)/2} U(w) with
//! w = delta_{1/lambda}(center^{-1} xi), and U = f^{-(Q-2)/4},
//! f = (1+|z|^2)^2 + t^2.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::cayley::{bubble_pushforward_constant, pushforward};
use crate::constants::{c_hl_display, ln_funk};
use crate::error::{invalid, HnError, Result};
use crate::hgroup::{
    coordinate_jets, gauge_bracket, horizontal_gradient_jet, kohn_laplacian_jet, koranyi_norm, GroupElement,
    ScalarField,
};
use crate::jet::Jet2;
use crate::params::Params;
use crate::quadrature::polar::angular_rule;
use crate::quadrature::{hartree_energy, integrate_hn, riesz_potential, QuadratureSpec};
use crate::sphere::SpherePoint;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BubbleParams {
    pub lambda: f64,
    pub center: GroupElement,
    pub amplitude: f64,
}

impl BubbleParams {
    pub fn new(lambda: f64, center: GroupElement, amplitude: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return invalid(format!("bubble scale must be positive, got {lambda}"));
        }
        Ok(Self { lambda, center, amplitude })
    }

    pub fn unit(n: usize) -> Self {
        Self { lambda: 1.0, center: GroupElement::identity(n), amplitude: 1.0 }
    }

    pub fn n(&self) -> usize {
        self.center.n()
    }

    fn qf(&self) -> f64 {
        2.0 * self.n() as f64 + 2.0
    }

    /// amplitude * lambda^{-(Q-2)/2}
    pub fn prefactor(&self) -> f64 {
        self.amplitude * self.lambda.powf(-(self.qf() - 2.0) / 2.0)
    }

    /// delta_{1/lambda}(center^{-1} xi)
    pub fn local_point(&self, xi: &GroupElement) -> GroupElement {
        self.center.inv().mul(xi).dilate(1.0 / self.lambda)
    }

    /// Jets of the coordinates of `local_point` with respect to xi. The map
    /// is affine in the coordinates, so the Hessians vanish.
    pub(crate) fn local_jets(&self, xi: &GroupElement) -> Vec<Jet2> {
        let n = self.n();
        let c = coordinate_jets(xi);
        let l = self.lambda;
        let mut w = Vec::with_capacity(2 * n + 1);
        for (i, z0) in self.center.z.iter().enumerate() {
            w.push(c[i].add_const(-z0.re).scale(1.0 / l));
        }
        for (i, z0) in self.center.z.iter().enumerate() {
            w.push(c[n + i].add_const(-z0.im).scale(1.0 / l));
        }
        // t - t0 + 2 sum (a y - b x) for center z0 = a + ib
        let mut t = c[2 * n].add_const(-self.center.t);
        for (i, z0) in self.center.z.iter().enumerate() {
            t = &t + &(&c[n + i].scale(2.0 * z0.re) - &c[i].scale(2.0 * z0.im));
        }
        w.push(t.scale(1.0 / (l * l)));
        w
    }
}

/// |z|^2 and f = (1+|z|^2)^2 + t^2 on coordinate jets.
fn profile(w: &[Jet2]) -> (Jet2, Jet2) {
    let n = (w.len() - 1) / 2;
    let d = w[0].dim();
    let mut s = Jet2::constant(0.0, d);
    for v in &w[..2 * n] {
        s = &s + &(v * v);
    }
    let one_s = s.add_const(1.0);
    let t = &w[2 * n];
    let f = &(&one_s * &one_s) + &(t * t);
    (s, f)
}

/// U = f^{-(Q-2)/4} on coordinate jets.
pub fn unit_bubble_jet(w: &[Jet2]) -> Jet2 {
    let n = (w.len() - 1) / 2;
    let (_, f) = profile(w);
    f.powf(-(n as f64) / 2.0)
}

pub fn bubble_eval(p: &BubbleParams, xi: &GroupElement) -> Jet2 {
    unit_bubble_jet(&p.local_jets(xi)).scale(p.prefactor())
}

pub fn bubble_value(p: &BubbleParams, xi: &GroupElement) -> f64 {
    let q = p.qf();
    p.prefactor() * gauge_bracket(&p.local_point(xi)).powf(-(q - 2.0) / 2.0)
}

/// A bubble as a field.
#[derive(Debug, Clone, PartialEq)]
pub struct Bubble(pub BubbleParams);

impl ScalarField for Bubble {
    fn n(&self) -> usize {
        self.0.n()
    }
    fn jet(&self, xi: &GroupElement) -> Jet2 {
        bubble_eval(&self.0, xi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KernelVariant {
    /// R_i U, d_t U and the full dilation derivative.
    Generator,
    /// Euclidean d_{x_i} U, d_{y_i} U, d_t U and (Q-2)/2 U + xi . grad_H U.
    Literal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelElement {
    pub k: usize,
    pub variant: KernelVariant,
    pub bubble: BubbleParams,
}

/// phi_k of the unit bubble, 1 <= k <= 2n+2.
pub fn kernel_element(k: usize, params: &Params) -> Result<KernelElement> {
    KernelElement::new(k, KernelVariant::Generator, BubbleParams::unit(params.n))
}

impl KernelElement {
    pub fn new(k: usize, variant: KernelVariant, bubble: BubbleParams) -> Result<Self> {
        let top = 2 * bubble.n() + 2;
        if k == 0 || k > top {
            return invalid(format!("kernel index k = {k} outside 1..={top}"));
        }
        Ok(Self { k, variant, bubble })
    }

    /// Gauge decay exponent: |phi| = O(rho^{-decay}).
    pub fn decay(&self) -> f64 {
        let q = self.bubble.qf();
        let n = self.bubble.n();
        match self.k {
            k if k <= 2 * n => q - 1.0,
            k if k == 2 * n + 1 => q,
            _ => q - 2.0,
        }
    }

    /// The element on jets of the local coordinates w.
    pub fn unit_jet(&self, w: &[Jet2]) -> Jet2 {
        let n = (w.len() - 1) / 2;
        let a = n as f64 / 2.0;
        let (s, f) = profile(w);
        let one_s = s.add_const(1.0);
        let g = f.powf(-a - 1.0).scale(-a);
        let t = &w[2 * n];
        let literal = self.variant == KernelVariant::Literal;
        match self.k {
            k if k <= n => {
                let (x, y) = (&w[k - 1], &w[n + k - 1]);
                let num = if literal { &one_s * x } else { &(&one_s * x) - &(y * t) };
                &g * &num.scale(4.0)
            }
            k if k <= 2 * n => {
                let (x, y) = (&w[k - n - 1], &w[k - 1]);
                let num = if literal { &one_s * y } else { &(&one_s * y) + &(x * t) };
                &g * &num.scale(4.0)
            }
            k if k == 2 * n + 1 => &g * &t.scale(2.0),
            _ => {
                let u = f.powf(-a);
                let mut e = (&one_s * &s).scale(4.0);
                if !literal {
                    e = &e + &(t * t).scale(4.0);
                }
                &u.scale(2.0 * a) + &(&g * &e)
            }
        }
    }
}

impl ScalarField for KernelElement {
    fn n(&self) -> usize {
        self.bubble.n()
    }
    fn jet(&self, xi: &GroupElement) -> Jet2 {
        self.unit_jet(&self.bubble.local_jets(xi)).scale(self.bubble.prefactor())
    }
}

/// 2^{1-Q+mu/2} E_{0,0}(mu): the Riesz potential of U^{Q*_mu} is this
/// constant times <xi>^{-mu/2}.
pub fn riesz_constant(n: usize, mu: f64) -> f64 {
    let q = 2.0 * n as f64 + 2.0;
    ((1.0 - q + mu / 2.0) * 2f64.ln() + ln_funk(0, 0, mu, n)).exp()
}

/// int U^{power}(eta) d(xi, eta)^{-mu} d eta for the unit bubble, obtained by
/// transport to the sphere where U^{Q*_mu} becomes a constant mode.
pub fn riesz_closed_form(power: f64, mu: f64, xi: &GroupElement, params: &Params) -> Result<f64> {
    if params.n != xi.n() {
        return Err(HnError::DimensionMismatch(params.n, xi.n()));
    }
    let p = params.with_mu(mu)?.q_star_mu;
    if (power - p).abs() > 1e-12 * p {
        return invalid(format!("closed form only for power Q*_mu = {p}, got {power}"));
    }
    Ok(riesz_constant(params.n, mu) * gauge_bracket(xi).powf(-mu / 2.0))
}

/// The same potential for any bubble: amplitude^p lambda^{-mu/2} R(w).
pub fn riesz_of_bubble(b: &BubbleParams, mu: f64, xi: &GroupElement) -> f64 {
    let q = b.qf();
    let p = (2.0 * q - mu) / (q - 2.0);
    b.amplitude.powf(p) * b.lambda.powf(-mu / 2.0) * riesz_constant(b.n(), mu) * gauge_bracket(&b.local_point(xi)).powf(-mu / 2.0)
}

/// Jet of `riesz_of_bubble` in xi: a constant times f(w)^{-mu/4}.
pub(crate) fn riesz_of_bubble_jet(b: &BubbleParams, mu: f64, xi: &GroupElement) -> Jet2 {
    let q = b.qf();
    let p = (2.0 * q - mu) / (q - 2.0);
    let c = b.amplitude.powf(p) * b.lambda.powf(-mu / 2.0) * riesz_constant(b.n(), mu);
    let (_, f) = profile(&b.local_jets(xi));
    f.powf(-mu / 4.0).scale(c)
}

fn q_star_mu(n: usize, mu: f64) -> f64 {
    let q = 2.0 * n as f64 + 2.0;
    (2.0 * q - mu) / (q - 2.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElResidual {
    /// -Delta_H U(xi)
    pub lhs: f64,
    /// (I_mu * U^p)(xi) U^{p-1}(xi)
    pub rhs_shape: f64,
    pub ratio: f64,
}

fn el_from(b: &BubbleParams, mu: f64, xi: &GroupElement, riesz: f64) -> ElResidual {
    let j = bubble_eval(b, xi);
    let lhs = -kohn_laplacian_jet(&j, xi);
    let rhs_shape = riesz * j.value.powf(q_star_mu(b.n(), mu) - 1.0);
    ElResidual { lhs, rhs_shape, ratio: lhs / rhs_shape }
}

/// Euler-Lagrange ratio with the closed-form potential; the ratio is the
/// Lagrange multiplier and must not depend on xi.
pub fn el_residual(b: &BubbleParams, mu: f64, xi: &GroupElement) -> ElResidual {
    el_from(b, mu, xi, riesz_of_bubble(b, mu, xi))
}

/// As `el_residual` with the potential computed by quadrature.
pub fn el_residual_quadrature(b: &BubbleParams, mu: f64, xi: &GroupElement, spec: &QuadratureSpec) -> Result<ElResidual> {
    let p = q_star_mu(b.n(), mu);
    let decay = (b.qf() - 2.0) * p;
    let r = riesz_potential(|eta| bubble_value(b, eta).powf(p), mu, xi, decay, spec)?;
    Ok(el_from(b, mu, xi, r.value))
}

/// -Delta_H U / U^{(Q+2)/(Q-2)}.
pub fn yamabe_ratio(b: &BubbleParams, xi: &GroupElement) -> f64 {
    let q = b.qf();
    let j = bubble_eval(b, xi);
    -kohn_laplacian_jet(&j, xi) / j.value.powf((q + 2.0) / (q - 2.0))
}

/// The multiplier measured at the bubble centre.
pub fn lagrange_multiplier(b: &BubbleParams, mu: f64) -> f64 {
    el_residual(b, mu, &b.center).ratio
}

/// Closed form of the measured multiplier for a unit-amplitude bubble:
/// 4n^2 / (2^{1-Q+mu/2} E_{0,0}(mu)).
pub fn lagrange_multiplier_closed(n: usize, mu: f64) -> f64 {
    4.0 * (n * n) as f64 / riesz_constant(n, mu)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearizedTerms {
    /// -Delta_H phi
    pub laplacian: f64,
    /// p (I_mu * (U^{p-1} phi)) U^{p-1}
    pub nonlocal: f64,
    /// (p-1) (I_mu * U^p) U^{p-2} phi
    pub local: f64,
    pub alpha: f64,
    pub value: f64,
}

impl LinearizedTerms {
    fn assemble(laplacian: f64, nonlocal: f64, local: f64, alpha: f64) -> Self {
        Self { laplacian, nonlocal, local, alpha, value: laplacian - alpha * (nonlocal + local) }
    }

    /// Largest constituent term, the natural scale for |value|.
    pub fn scale(&self) -> f64 {
        self.laplacian.abs().max((self.alpha * self.nonlocal).abs()).max((self.alpha * self.local).abs())
    }

    pub fn relative(&self) -> f64 {
        self.value.abs() / self.scale().max(f64::MIN_POSITIVE)
    }
}

/// L(phi)(xi) with the nonlocal convolution done by quadrature. `decay` is
/// the gauge decay exponent of phi; the multiplier is self-calibrated from
/// the Euler-Lagrange ratio.
pub fn linearized_apply<F: ScalarField + ?Sized>(
    phi: &F,
    decay: f64,
    b: &BubbleParams,
    mu: f64,
    xi: &GroupElement,
    spec: &QuadratureSpec,
) -> Result<LinearizedTerms> {
    let n = b.n();
    let q = b.qf();
    let p = q_star_mu(n, mu);
    let alpha = lagrange_multiplier(b, mu);
    let j = phi.jet(xi);
    let u = bubble_value(b, xi);
    let g = |eta: &GroupElement| bubble_value(b, eta).powf(p - 1.0) * phi.value(eta);
    let conv = riesz_potential(g, mu, xi, (q - 2.0) * (p - 1.0) + decay, spec)?;
    let nonlocal = p * conv.value * u.powf(p - 1.0);
    let local = (p - 1.0) * riesz_of_bubble(b, mu, xi) * u.powf(p - 2.0) * j.value;
    Ok(LinearizedTerms::assemble(-kohn_laplacian_jet(&j, xi), nonlocal, local, alpha))
}

/// L(phi_k)(xi) for a generator kernel element without quadrature: the
/// convolution I_mu * (U^{p-1} phi_k) is (1/p) V_k applied to I_mu * U^p,
/// where V_k is the symmetry generator that produced phi_k from U.
pub fn linearized_apply_exact(el: &KernelElement, mu: f64, xi: &GroupElement) -> Result<LinearizedTerms> {
    if el.variant != KernelVariant::Generator {
        return invalid("the exact route needs a symmetry generator");
    }
    let b = &el.bubble;
    let n = b.n();
    let q = b.qf();
    let p = q_star_mu(n, mu);
    let alpha = lagrange_multiplier(b, mu);
    // V_k R on the unit bubble, at w, with R = K f^{-mu/4}
    let w = b.local_point(xi);
    let wj = coordinate_jets(&w);
    let (_, f) = profile(&wj);
    let r = f.powf(-mu / 4.0).scale(riesz_constant(n, mu));
    let gr = &r.grad;
    let c = w.coords();
    let vr = match el.k {
        k if k <= n => gr[k - 1] - 2.0 * c[n + k - 1] * gr[2 * n],
        k if k <= 2 * n => gr[k - 1] + 2.0 * c[k - n - 1] * gr[2 * n],
        k if k == 2 * n + 1 => gr[2 * n],
        _ => {
            let e: f64 = (0..2 * n).map(|i| c[i] * gr[i]).sum::<f64>() + 2.0 * c[2 * n] * gr[2 * n];
            mu / 2.0 * r.value + e
        }
    };
    let c_p = b.prefactor().powf(p) * b.lambda.powf(q - mu);
    let conv = c_p * vr / p;
    let j = el.jet(xi);
    let u = bubble_value(b, xi);
    let nonlocal = p * conv * u.powf(p - 1.0);
    let local = (p - 1.0) * riesz_of_bubble(b, mu, xi) * u.powf(p - 2.0) * j.value;
    Ok(LinearizedTerms::assemble(-kohn_laplacian_jet(&j, xi), nonlocal, local, alpha))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GramReport {
    pub matrix: Vec<Vec<f64>>,
    pub singular_values: Vec<f64>,
    pub rank: usize,
}

/// Gram matrix of the kernel elements under int <grad_H phi_k, grad_H phi_l>.
pub fn kernel_gram(params: &Params, variant: KernelVariant, spec: &QuadratureSpec) -> Result<GramReport> {
    let n = params.n;
    let m = 2 * n + 2;
    let els: Vec<KernelElement> =
        (1..=m).map(|k| KernelElement::new(k, variant, BubbleParams::unit(n))).collect::<Result<_>>()?;
    let mut g = DMatrix::<f64>::zeros(m, m);
    for a in 0..m {
        for b in a..m {
            let (ea, eb) = (&els[a], &els[b]);
            let f = |xi: &GroupElement| {
                let ga = horizontal_gradient_jet(&ea.jet(xi), xi);
                let gb = horizontal_gradient_jet(&eb.jet(xi), xi);
                ga.iter().zip(&gb).map(|(x, y)| x * y).sum::<f64>()
            };
            let v = integrate_hn(n, f, ea.decay() + eb.decay() + 2.0, spec)?.value;
            g[(a, b)] = v;
            g[(b, a)] = v;
        }
    }
    let sv = g.clone().svd(false, false).singular_values;
    let mut singular_values: Vec<f64> = sv.iter().copied().collect();
    singular_values.sort_by(|x, y| y.partial_cmp(x).unwrap());
    let top = singular_values[0];
    let rank = singular_values.iter().filter(|s| **s > 1e-8 * top).count();
    let matrix = (0..m).map(|a| (0..m).map(|b| g[(a, b)]).collect()).collect();
    Ok(GramReport { matrix, singular_values, rank })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SharpConstant {
    pub gradient_norm: f64,
    pub hartree: f64,
    pub measured: f64,
    pub closed_form: f64,
    pub ratio: f64,
}

/// ||grad_H U||^2 / I(U^p, U^p)^{1/p} by quadrature, against C_{H,L}(Q, mu).
pub fn sharp_constant_check(b: &BubbleParams, mu: f64, spec: &QuadratureSpec) -> Result<SharpConstant> {
    let n = b.n();
    let q = b.qf();
    let p = q_star_mu(n, mu);
    let grad = |xi: &GroupElement| {
        let g = horizontal_gradient_jet(&bubble_eval(b, xi), xi);
        g.iter().map(|v| v * v).sum::<f64>()
    };
    let gradient_norm = integrate_hn(n, grad, 2.0 * (q - 1.0), spec)?.value;
    let up = |xi: &GroupElement| bubble_value(b, xi).powf(p);
    let decay = (q - 2.0) * p;
    let hartree = hartree_energy(n, up, up, mu, decay, decay, spec)?.value;
    let measured = gradient_norm / hartree.powf(1.0 / p);
    let closed_form = c_hl_display(n, mu);
    Ok(SharpConstant { gradient_norm, hartree, measured, closed_form, ratio: measured / closed_form })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelDecay {
    pub k: usize,
    /// sup |phi| <xi>^{(Q-2)/2} over rho <= radius
    pub sup_inner: f64,
    /// the same over rho <= 2 radius
    pub sup_outer: f64,
    /// slope of log sup_{rho = r} |phi| against log r between radius and 2 radius
    pub rho_exponent: f64,
}

pub fn kernel_decay(el: &KernelElement, radius: f64) -> KernelDecay {
    let n = el.bubble.n();
    let q = el.bubble.qf();
    let rule = angular_rule(n, if n == 1 { 8 } else { 4 });
    let shell = |r: f64| {
        rule.dirs.iter().map(|d| el.value(&d.at(r)).abs()).fold(0.0f64, f64::max)
    };
    let weighted_sup = |hi: f64| {
        // fine fixed steps near the origin, then geometric; the grid for
        // radius is a prefix of the grid for 2 radius
        let radii = (0..50).map(|i| 0.1 * i as f64).chain((0..).map(|i| 5.0 * 1.1f64.powi(i)).take_while(|r| *r <= hi));
        let mut best = 0.0f64;
        for r in radii.filter(|r| *r <= hi) {
            for d in &rule.dirs {
                let xi = d.at(r);
                best = best.max(el.value(&xi).abs() * gauge_bracket(&xi).powf((q - 2.0) / 2.0));
            }
        }
        best
    };
    let rho_exponent = (shell(2.0 * radius) / shell(radius)).ln() / 2f64.ln();
    KernelDecay { k: el.k, sup_inner: weighted_sup(radius), sup_outer: weighted_sup(2.0 * radius), rho_exponent }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PushforwardRatio {
    pub k: usize,
    /// Which sphere coordinate C_* phi_k is compared with.
    pub target: String,
    pub ratio: f64,
    /// Largest relative deviation of the pointwise ratio from its mean.
    pub spread: f64,
    /// The constant implied by the bubble's pushforward value.
    pub derived: f64,
    /// +-((Q-2)/2) 2^{(2-Q)/2} as printed.
    pub stated: f64,
}

/// C_* phi_k against Re zeta_d, Im zeta_d, Im zeta_{n+1}, Re zeta_{n+1}.
pub fn kernel_pushforward_ratios(n: usize, points: &[SpherePoint]) -> Result<Vec<PushforwardRatio>> {
    let q = 2.0 * n as f64 + 2.0;
    let cu = bubble_pushforward_constant(n);
    let stated = (q - 2.0) / 2.0 * 2f64.powf((2.0 - q) / 2.0);
    let mut out = Vec::new();
    for k in 1..=2 * n + 2 {
        let el = KernelElement::new(k, KernelVariant::Generator, BubbleParams::unit(n))?;
        let (target, coord, derived): (String, Box<dyn Fn(&SpherePoint) -> f64>, f64) = match k {
            k if k <= n => (format!("Re zeta_{k}"), Box::new(move |z| z.zeta[k - 1].re), -(q - 2.0) / 2.0 * cu),
            k if k <= 2 * n => {
                let d = k - n;
                (format!("Im zeta_{d}"), Box::new(move |z| z.zeta[d - 1].im), -(q - 2.0) / 2.0 * cu)
            }
            k if k == 2 * n + 1 => (format!("Im zeta_{}", n + 1), Box::new(move |z| z.zeta[n].im), -(q - 2.0) / 4.0 * cu),
            _ => (format!("Re zeta_{}", n + 1), Box::new(move |z| z.zeta[n].re), (q - 2.0) / 2.0 * cu),
        };
        let mut ratios = Vec::new();
        for z in points {
            let c = coord(z);
            if c.abs() < 1e-3 {
                continue;
            }
            ratios.push(pushforward(|xi| el.value(xi), z)? / c);
        }
        if ratios.is_empty() {
            return invalid("no test point has a usable coordinate value");
        }
        let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
        let spread = ratios.iter().map(|r| ((r - mean) / mean).abs()).fold(0.0, f64::max);
        out.push(PushforwardRatio { k, target, ratio: mean, spread, derived, stated });
    }
    Ok(out)
}

/// U(xi) rho(xi)^{Q-2}, which tends to 1.
pub fn far_field_ratio(n: usize, xi: &GroupElement) -> f64 {
    let q = 2.0 * n as f64 + 2.0;
    bubble_value(&BubbleParams::unit(n), xi) * koranyi_norm(xi).powf(q - 2.0)
}
