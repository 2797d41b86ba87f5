//! Local Pohozaev balances for an exact bubble on a Koranyi ball, the
//! fundamental solution of the sub-Laplacian and the near-boundary Robin
//! asymptotics.
//!
//! The bubble u solves -Delta_H u = (I_mu * u^p) u^{p-1} on all of H^n once
//! its amplitude is calibrated, so both identities can be checked term by
//! term with the ball B = B_delta(xi_0) as Omega'.
//!
//! Boundary integrals. For a field Y and the Euclidean unit normal nu, the
//! coarea formula for the gauge rho_0 = rho(xi_0^{-1} .) gives
//!     int_{dB} g <Y, nu> dS = delta^{Q-1} int_Sigma g (Y rho_0)(xi_0 . delta w) dsigma(w),
//! where dsigma is the gauge-polar angular measure. With Y = sum_j (X_j u) X_j
//! this is the horizontal flux, and for the dilation field Z about xi_0 the
//! factor Z rho_0 is rho_0 itself.
//!
//! Interior pairs. Splitting I_mu * u^p into the parts from B and from its
//! complement, the B x B contribution K cancels between the two interaction
//! terms of the scale identity, and vanishes outright for the translation
//! fields (they preserve d). The cross terms are therefore computed as
//! int_B u^p V - K and int_B u^p Z V + (mu/2) K with the closed-form
//! potential V, which keeps every integrand bounded.

use serde::{Deserialize, Serialize};

use crate::bubble::{el_residual, riesz_of_bubble_jet, bubble_eval, bubble_value, BubbleParams};
use crate::constants::{g_green, koranyi_sphere_mass_closed};
use crate::error::{invalid, HnError, Result};
use crate::hgroup::{
    horizontal_gradient_jet, koranyi_norm, right_gradient_jet, GroupElement, ScalarField,
};
use crate::jet::Jet2;
use crate::params::Params;
use crate::parallel::map_indexed;
use crate::quadrature::mc::monte_carlo;
use crate::quadrature::polar::{angular_rule, sample_direction};
use crate::quadrature::rules::RadialRule;
use crate::quadrature::{sample_ball, KernelSampler, Method, QuadratureSpec};
use crate::special::{ln_gamma, sphere_area};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PohozaevConfig {
    pub u: BubbleParams,
    pub mu: f64,
    /// Radius delta of the Koranyi ball B_delta(center).
    pub inner_radius: f64,
    /// Centre of the ball and base point of the multiplier.
    pub center: GroupElement,
    pub epsilon: f64,
    pub spec: QuadratureSpec,
}

/// Amplitude that makes the EL multiplier of a bubble equal to one. The
/// multiplier scales like amplitude^{2-2p}.
pub fn calibrated_amplitude(n: usize, mu: f64, lambda: f64) -> Result<f64> {
    let params = Params::new(n, mu)?;
    let b = BubbleParams::new(lambda, GroupElement::identity(n), 1.0)?;
    let ratio = el_residual(&b, mu, &b.center).ratio;
    Ok(ratio.powf(1.0 / (2.0 * params.q_star_mu - 2.0)))
}

impl PohozaevConfig {
    /// Bubble of scale `lambda` at `bubble_center` with calibrated amplitude.
    pub fn calibrated(
        lambda: f64,
        bubble_center: GroupElement,
        mu: f64,
        inner_radius: f64,
        center: GroupElement,
        epsilon: f64,
        spec: QuadratureSpec,
    ) -> Result<Self> {
        let n = bubble_center.n();
        let amp = calibrated_amplitude(n, mu, lambda)?;
        let cfg = Self { u: BubbleParams::new(lambda, bubble_center, amp)?, mu, inner_radius, center, epsilon, spec };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.spec.validate()?;
        let n = self.u.n();
        if self.center.n() != n {
            return Err(HnError::DimensionMismatch(n, self.center.n()));
        }
        Params::new(n, self.mu)?;
        if !(self.inner_radius > 0.0 && self.inner_radius < self.spec.truncation_radius / 4.0) {
            return invalid(format!(
                "inner radius {} must lie in (0, truncation_radius/4 = {})",
                self.inner_radius,
                self.spec.truncation_radius / 4.0
            ));
        }
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return invalid(format!("epsilon must be nonnegative, got {}", self.epsilon));
        }
        Ok(())
    }

    fn ball_jets(&self, xi: &GroupElement) -> Vec<Jet2> {
        BubbleParams { lambda: 1.0, center: self.center.clone(), amplitude: 1.0 }.local_jets(xi)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub name: String,
    pub value: f64,
    pub std_error: f64,
}

impl Term {
    fn new(name: &str, value: f64, std_error: f64) -> Self {
        Self { name: name.to_string(), value, std_error }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PohozaevReport {
    pub identity: String,
    /// Flux terms on the left-hand side.
    pub boundary_terms: Vec<Term>,
    /// Right-hand side terms carried by the sphere.
    pub rhs_boundary_terms: Vec<Term>,
    /// Interaction and epsilon terms over B and B x (H^n \ B).
    pub volume_terms: Vec<Term>,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    pub residual_std_error: f64,
    /// max |term|
    pub dominant: f64,
    /// The same balance with the literal multiplier (no 2 t d_t part for
    /// the scale identity, X_i in place of R_i for translations).
    pub literal_residual: f64,
    pub literal_dominant: f64,
    /// B x B interaction, cancelled in the balance but reported.
    pub core_interaction: Term,
    /// delta^{Q-1} omega_{Q-1}: total mass of the perimeter measure used.
    pub surface_mass: f64,
}

impl PohozaevReport {
    pub fn relative_residual(&self) -> f64 {
        self.residual.abs() / self.dominant
    }

    pub fn literal_relative_residual(&self) -> f64 {
        self.literal_residual.abs() / self.literal_dominant
    }

    pub fn terms(&self) -> impl Iterator<Item = &Term> {
        self.boundary_terms.iter().chain(&self.rhs_boundary_terms).chain(&self.volume_terms)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Multiplier {
    /// sum w_j X_j (+ 2 w_t d_t unless literal), w = xi_0^{-1} xi.
    Dilation { literal: bool },
    /// R_k, or X_k when literal.
    Translation { k: usize, literal: bool },
}

impl Multiplier {
    fn apply(&self, j: &Jet2, xi: &GroupElement, w: &[Jet2]) -> f64 {
        match *self {
            Multiplier::Dilation { literal } => {
                let n = xi.n();
                let g = horizontal_gradient_jet(j, xi);
                let mut s: f64 = (0..2 * n).map(|k| w[k].value * g[k]).sum();
                if !literal {
                    s += 2.0 * w[2 * n].value * j.grad[2 * n];
                }
                s
            }
            Multiplier::Translation { k, literal } => {
                if literal {
                    horizontal_gradient_jet(j, xi)[k]
                } else {
                    right_gradient_jet(j, xi)[k]
                }
            }
        }
    }

    fn is_scale(&self) -> bool {
        matches!(self, Multiplier::Dilation { .. })
    }
}

fn gauge_jet(w: &[Jet2]) -> Jet2 {
    let n = (w.len() - 1) / 2;
    let d = w[0].dim();
    let mut s = Jet2::constant(0.0, d);
    for v in &w[..2 * n] {
        s = &s + &(v * v);
    }
    let t = &w[2 * n];
    (&(&s * &s) + &(t * t)).powf(0.25)
}

struct Setup<'a> {
    cfg: &'a PohozaevConfig,
    n: usize,
    q: f64,
    p: f64,
}

impl<'a> Setup<'a> {
    fn new(cfg: &'a PohozaevConfig) -> Result<Self> {
        cfg.validate()?;
        let params = Params::new(cfg.u.n(), cfg.mu)?;
        Ok(Self { cfg, n: params.n, q: params.qf(), p: params.q_star_mu })
    }

    /// Integrands on the sphere, for the given multiplier:
    /// [-(M u) F, |grad u|^2 (M rho)/2, -(Q-2)/2 u F, V u^p (M rho)/p, eps u^2 (M rho)/2]
    /// with F = <grad_H u, grad_H rho>.
    fn surface_point(&self, xi: &GroupElement, m: Multiplier) -> [f64; 5] {
        let cfg = self.cfg;
        let w = cfg.ball_jets(xi);
        let rho = gauge_jet(&w);
        let u = bubble_eval(&cfg.u, xi);
        let gu = horizontal_gradient_jet(&u, xi);
        let gr = horizontal_gradient_jet(&rho, xi);
        let flux: f64 = gu.iter().zip(&gr).map(|(a, b)| a * b).sum();
        let grad_sq: f64 = gu.iter().map(|a| a * a).sum();
        let m_rho = m.apply(&rho, xi, &w);
        let m_u = m.apply(&u, xi, &w);
        let v = riesz_of_bubble_jet(&cfg.u, cfg.mu, xi).value;
        let uv = u.value;
        [
            -m_u * flux,
            0.5 * grad_sq * m_rho,
            if m.is_scale() { -(self.q - 2.0) / 2.0 * uv * flux } else { 0.0 },
            v * uv.powf(self.p) * m_rho / self.p,
            0.5 * cfg.epsilon * uv * uv * m_rho,
        ]
    }

    /// Integrands over the ball: [u^p V, u^p (M V), u^2, u (M u + c u)],
    /// c = (Q-2)/2 for the scale identity and 0 otherwise.
    fn volume_point(&self, xi: &GroupElement, m: Multiplier) -> [f64; 4] {
        let cfg = self.cfg;
        let w = cfg.ball_jets(xi);
        let u = bubble_eval(&cfg.u, xi);
        let v = riesz_of_bubble_jet(&cfg.u, cfg.mu, xi);
        let up = u.value.powf(self.p);
        let c = if m.is_scale() { (self.q - 2.0) / 2.0 } else { 0.0 };
        [
            up * v.value,
            up * m.apply(&v, xi, &w),
            u.value * u.value,
            u.value * (m.apply(&u, xi, &w) + c * u.value),
        ]
    }

    fn surface<const K: usize>(&self, f: impl Fn(&GroupElement) -> [f64; K] + Sync) -> Vec<(f64, f64)> {
        let spec = &self.cfg.spec;
        let delta = self.cfg.inner_radius;
        let scale = delta.powf(self.q - 1.0);
        let center = &self.cfg.center;
        match spec.method {
            Method::Tensor => {
                let ang = angular_rule(self.n, spec.angular_nodes);
                let vals = map_indexed(ang.len(), |k| f(&center.mul(&ang.dirs[k].at(delta))));
                let mut out = [0.0; K];
                for (v, w) in vals.iter().zip(&ang.weights) {
                    for i in 0..K {
                        out[i] += w * v[i];
                    }
                }
                out.iter().map(|s| (scale * s, 0.0)).collect()
            }
            Method::MonteCarlo => {
                let mass = koranyi_sphere_mass_closed(self.n);
                let st = monte_carlo(spec.seed, spec.samples, K, |rng| {
                    let xi = center.mul(&sample_direction(self.n, rng).at(delta));
                    Some(f(&xi).iter().map(|v| v * mass * scale).collect())
                });
                (0..K).map(|i| (st.mean[i], st.std_error(i))).collect()
            }
        }
    }

    fn volume<const K: usize>(&self, f: impl Fn(&GroupElement) -> [f64; K] + Sync) -> Vec<(f64, f64)> {
        let spec = &self.cfg.spec;
        let delta = self.cfg.inner_radius;
        let center = &self.cfg.center;
        match spec.method {
            Method::Tensor => {
                let ang = angular_rule(self.n, spec.angular_nodes);
                let rad = RadialRule::origin(spec.radial_nodes, self.q - 1.0, delta);
                let parts = map_indexed(rad.r.len(), |k| {
                    let mut s = [0.0; K];
                    for (d, w) in ang.dirs.iter().zip(&ang.weights) {
                        let v = f(&center.mul(&d.at(rad.r[k])));
                        for i in 0..K {
                            s[i] += w * v[i];
                        }
                    }
                    s.map(|x| x * rad.w[k])
                });
                (0..K).map(|i| (parts.iter().map(|s| s[i]).sum(), 0.0)).collect()
            }
            Method::MonteCarlo => {
                let vol = koranyi_sphere_mass_closed(self.n) * delta.powf(self.q) / self.q;
                let st = monte_carlo(spec.seed ^ 0x5bd1_e995, spec.samples, K, |rng| {
                    let xi = center.mul(&sample_ball(self.n, delta, rng));
                    Some(f(&xi).iter().map(|v| v * vol).collect())
                });
                (0..K).map(|i| (st.mean[i], st.std_error(i))).collect()
            }
        }
    }

    /// K = int_B int_B u^p(xi) u^p(eta) d(xi, eta)^{-mu}, by Monte Carlo with a
    /// kernel-weighted inner draw.
    fn core_interaction(&self) -> Term {
        let cfg = self.cfg;
        let (n, q, p, delta) = (self.n, self.q, self.p, cfg.inner_radius);
        if cfg.u.amplitude == 0.0 {
            return Term::new("core_interaction", 0.0, 0.0);
        }
        let vol = koranyi_sphere_mass_closed(n) * delta.powf(q) / q;
        let sampler = KernelSampler::new(n, cfg.mu, (q - 2.0) * p);
        let inside = |eta: &GroupElement| {
            if koranyi_norm(&cfg.center.inv().mul(eta)) < delta {
                bubble_value(&cfg.u, eta).powf(p)
            } else {
                0.0
            }
        };
        let st = monte_carlo(cfg.spec.seed ^ 0x2545_f491, cfg.spec.samples, 1, |rng| {
            let xi = cfg.center.mul(&sample_ball(n, delta, rng));
            let fx = bubble_value(&cfg.u, &xi).powf(p) * vol;
            Some(vec![fx * sampler.draw(&inside, &xi, rng)])
        });
        Term::new("core_interaction", st.mean[0], st.std_error(0))
    }
}

fn quad_sum(terms: &[&Term]) -> f64 {
    terms.iter().map(|t| t.std_error * t.std_error).sum::<f64>().sqrt()
}

struct Balance {
    boundary: Vec<Term>,
    rhs_boundary: Vec<Term>,
    volume: Vec<Term>,
    lhs: f64,
    rhs: f64,
    err: f64,
    dominant: f64,
}

fn balance(setup: &Setup, m: Multiplier, core: &Term) -> Balance {
    let cfg = setup.cfg;
    let (p, q, mu, eps) = (setup.p, setup.q, cfg.mu, cfg.epsilon);
    let s = setup.surface(|xi| setup.surface_point(xi, m));
    let v = setup.volume(|xi| setup.volume_point(xi, m));
    let t = |name: &str, (val, se): (f64, f64)| Term::new(name, val, se);
    let mut boundary = vec![t("flux_multiplier", s[0]), t("flux_gradient_energy", s[1])];
    if m.is_scale() {
        boundary.push(t("flux_mass", s[2]));
    }
    let rhs_boundary = vec![t("boundary_hartree", s[3]), t("boundary_epsilon", s[4])];
    let (k, kse) = (core.value, core.std_error);
    let mut volume = Vec::new();
    if m.is_scale() {
        let c1 = (q - 2.0) / 2.0 - q / p;
        volume.push(Term::new("interaction", c1 * (v[0].0 - k), c1.abs() * kse));
        volume.push(Term::new(
            "interaction_gradient",
            -(v[1].0 + mu / 2.0 * k) / p,
            (v[1].1.powi(2) + (mu / 2.0 * kse).powi(2)).sqrt() / p,
        ));
        volume.push(Term::new("epsilon_mass", -eps * v[2].0, eps * v[2].1));
    } else {
        volume.push(Term::new("interaction_gradient", -v[1].0 / p, v[1].1 / p));
    }
    // u solves the eps = 0 equation, so -eps u enters as a source defect
    volume.push(Term::new("epsilon_defect", -eps * v[3].0, eps * v[3].1));
    let lhs: f64 = boundary.iter().map(|t| t.value).sum();
    let rhs: f64 = rhs_boundary.iter().chain(&volume).map(|t| t.value).sum();
    let all: Vec<&Term> = boundary.iter().chain(&rhs_boundary).chain(&volume).collect();
    let err = quad_sum(&all);
    let dominant = all.iter().map(|t| t.value.abs()).fold(0.0, f64::max);
    Balance { boundary, rhs_boundary, volume, lhs, rhs, err, dominant }
}

fn run(cfg: &PohozaevConfig, identity: String, full: Multiplier, literal: Multiplier) -> Result<PohozaevReport> {
    let setup = Setup::new(cfg)?;
    let core = setup.core_interaction();
    let b = balance(&setup, full, &core);
    let lit = balance(&setup, literal, &core);
    for t in b.boundary.iter().chain(&b.rhs_boundary).chain(&b.volume) {
        if !t.value.is_finite() {
            return Err(HnError::Divergent(format!("{identity}: term {} is not finite", t.name)));
        }
    }
    Ok(PohozaevReport {
        identity,
        residual: b.lhs - b.rhs,
        residual_std_error: b.err,
        dominant: b.dominant,
        lhs: b.lhs,
        rhs: b.rhs,
        boundary_terms: b.boundary,
        rhs_boundary_terms: b.rhs_boundary,
        volume_terms: b.volume,
        literal_residual: lit.lhs - lit.rhs,
        literal_dominant: lit.dominant,
        core_interaction: core,
        surface_mass: cfg.inner_radius.powf(setup.q - 1.0) * koranyi_sphere_mass_closed(setup.n),
    })
}

/// The scale balance, multiplier Z u + (Q-2)/2 u with Z the dilation field
/// about the ball centre.
pub fn pohozaev_scale(cfg: &PohozaevConfig) -> Result<PohozaevReport> {
    run(
        cfg,
        "scale".into(),
        Multiplier::Dilation { literal: false },
        Multiplier::Dilation { literal: true },
    )
}

/// The translation balance for direction k in 0..2n (x_1..x_n, y_1..y_n).
pub fn pohozaev_translation(cfg: &PohozaevConfig, k: usize) -> Result<PohozaevReport> {
    let n = cfg.u.n();
    if k >= 2 * n {
        return invalid(format!("translation direction {k} outside 0..{}", 2 * n));
    }
    run(
        cfg,
        format!("translation_{k}"),
        Multiplier::Translation { k, literal: false },
        Multiplier::Translation { k, literal: true },
    )
}

/// G(Q) / d(xi, eta)^{Q-2}.
pub fn fundamental_solution(xi: &GroupElement, eta: &GroupElement) -> Result<f64> {
    if xi.n() != eta.n() {
        return Err(HnError::DimensionMismatch(xi.n(), eta.n()));
    }
    let d = koranyi_norm(&xi.inv().mul(eta));
    if d == 0.0 {
        return Err(HnError::Singular);
    }
    let q = 2.0 * xi.n() as f64 + 2.0;
    Ok(g_green(xi.n()) * d.powf(2.0 - q))
}

/// c rho(eta^{-1} xi)^{2-Q} as a field in xi.
#[derive(Debug, Clone, PartialEq)]
pub struct GaugePower {
    pub pole: GroupElement,
    pub coefficient: f64,
}

impl ScalarField for GaugePower {
    fn n(&self) -> usize {
        self.pole.n()
    }
    fn jet(&self, xi: &GroupElement) -> Jet2 {
        let w = BubbleParams { lambda: 1.0, center: self.pole.clone(), amplitude: 1.0 }.local_jets(xi);
        let q = 2.0 * self.pole.n() as f64 + 2.0;
        gauge_jet(&w).powf(2.0 - q).scale(self.coefficient)
    }
}

/// Outward horizontal flux int_{dB_r(c)} <grad_H f, nu> dS through a Koranyi
/// sphere, on the angular tensor rule.
pub fn sphere_flux<F: ScalarField + ?Sized>(f: &F, center: &GroupElement, radius: f64, nodes: usize) -> f64 {
    let n = f.n();
    let q = 2.0 * n as f64 + 2.0;
    let ang = angular_rule(n, nodes);
    let ball = BubbleParams { lambda: 1.0, center: center.clone(), amplitude: 1.0 };
    let vals = map_indexed(ang.len(), |k| {
        let xi = center.mul(&ang.dirs[k].at(radius));
        let rho = gauge_jet(&ball.local_jets(&xi));
        let gf = horizontal_gradient_jet(&f.jet(&xi), &xi);
        let gr = horizontal_gradient_jet(&rho, &xi);
        gf.iter().zip(&gr).map(|(a, b)| a * b).sum::<f64>()
    });
    radius.powf(q - 1.0) * vals.iter().zip(&ang.weights).map(|(v, w)| v * w).sum::<f64>()
}

/// The coefficient c making c rho^{2-Q} a fundamental solution of
/// -Delta_H = -sum X_j^2: unit flux requires c (Q-2) int_Sigma |grad_H rho|^2 = 1,
/// and |grad_H rho|^2 = |z|^2 on the unit gauge sphere.
pub fn fundamental_constant_flux(n: usize) -> f64 {
    let nf = n as f64;
    let q = 2.0 * nf + 2.0;
    let moment = sphere_area(2 * n)
        * std::f64::consts::PI.sqrt()
        * (ln_gamma((nf + 1.0) / 2.0) - ln_gamma(nf / 2.0 + 1.0)).exp();
    1.0 / ((q - 2.0) * moment)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RobinAsymptotic {
    pub value: f64,
    pub gradient_magnitude: f64,
}

/// Leading behaviour of the Robin function at distance d from a flat
/// boundary: 1/((Q-2) omega (2d)^{Q-2}) and 2/(omega (2d)^{Q-1}).
pub fn robin_asymptotic(d_boundary: f64, params: &Params) -> Result<RobinAsymptotic> {
    if !(d_boundary > 0.0 && d_boundary.is_finite()) {
        return invalid(format!("boundary distance must be positive, got {d_boundary}"));
    }
    let q = params.qf();
    let omega = crate::constants::koranyi_sphere_mass(params.n);
    let two_d = 2.0 * d_boundary;
    Ok(RobinAsymptotic {
        value: 1.0 / ((q - 2.0) * omega * two_d.powf(q - 2.0)),
        gradient_magnitude: 2.0 / (omega * two_d.powf(q - 1.0)),
    })
}
