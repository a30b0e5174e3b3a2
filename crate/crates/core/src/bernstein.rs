//! Laplace exponents φ of driftless subordinators and the scalar functions
//! derived from them: Lévy density ν, tail w, φ', generalized inverses and
//! the conjugate exponent λ/φ(λ).

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::gamma;

/// Relative tolerance of the bisection inverses.
pub const INVERSE_REL_TOL: f64 = 1e-12;
/// Maximum number of bracket doublings (and bisection steps).
pub const MAX_DOUBLINGS: usize = 200;

/// Monotone cubic (Fritsch–Carlson) interpolant of `ln φ` against `ln λ`,
/// extended linearly (a power law) beyond the end nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct Tabulated {
    ln_lambda: Vec<f64>,
    ln_phi: Vec<f64>,
    slope: Vec<f64>,
}

impl Tabulated {
    /// Build from samples `(λ_i, φ(λ_i))` with λ strictly increasing.
    /// φ must be positive, strictly increasing and concave at the nodes.
    pub fn new(lambda: &[f64], phi: &[f64]) -> Result<Self> {
        let op = "tabulated";
        if lambda.len() != phi.len() || lambda.len() < 3 {
            return Err(Error::Config(format!(
                "tabulated exponent needs at least 3 matching samples, got {} and {}",
                lambda.len(),
                phi.len()
            )));
        }
        if lambda.iter().chain(phi).any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::domain(op, "samples must be positive and finite"));
        }
        if lambda.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::domain(op, "lambda must be strictly increasing"));
        }
        if phi.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::domain(op, "phi must be strictly increasing"));
        }
        if let Some(i) = concavity_violation(lambda, phi) {
            return Err(Error::domain(
                op,
                format!("phi is not concave near lambda = {:.6e}", lambda[i]),
            ));
        }
        let x: Vec<f64> = lambda.iter().map(|v| v.ln()).collect();
        let y: Vec<f64> = phi.iter().map(|v| v.ln()).collect();
        let slope = pchip_slopes(&x, &y);
        Ok(Tabulated {
            ln_lambda: x,
            ln_phi: y,
            slope,
        })
    }

    pub fn lambda(&self) -> Vec<f64> {
        self.ln_lambda.iter().map(|v| v.exp()).collect()
    }

    pub fn phi_samples(&self) -> Vec<f64> {
        self.ln_phi.iter().map(|v| v.exp()).collect()
    }

    fn ln_eval(&self, s: f64) -> f64 {
        let (x, y, d) = (&self.ln_lambda, &self.ln_phi, &self.slope);
        let n = x.len();
        if s <= x[0] {
            return y[0] + d[0] * (s - x[0]);
        }
        if s >= x[n - 1] {
            return y[n - 1] + d[n - 1] * (s - x[n - 1]);
        }
        let i = x.partition_point(|v| *v <= s) - 1;
        let h = x[i + 1] - x[i];
        let u = (s - x[i]) / h;
        let (h00, h10, h01, h11) = (
            (1.0 + 2.0 * u) * (1.0 - u) * (1.0 - u),
            u * (1.0 - u) * (1.0 - u),
            u * u * (3.0 - 2.0 * u),
            u * u * (u - 1.0),
        );
        h00 * y[i] + h10 * h * d[i] + h01 * y[i + 1] + h11 * h * d[i + 1]
    }

    fn eval(&self, lambda: f64) -> f64 {
        self.ln_eval(lambda.ln()).exp()
    }
}

fn pchip_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let delta: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
    let mut d = vec![0.0; n];
    for i in 1..n - 1 {
        if delta[i - 1] * delta[i] > 0.0 {
            let w1 = 2.0 * h[i] + h[i - 1];
            let w2 = h[i] + 2.0 * h[i - 1];
            d[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
        }
    }
    d[0] = pchip_end(h[0], h[1], delta[0], delta[1]);
    d[n - 1] = pchip_end(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    d
}

// One-sided three-point end slope, limited to preserve monotonicity.
fn pchip_end(h0: f64, h1: f64, del0: f64, del1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * del0 - h0 * del1) / (h0 + h1);
    if d.signum() != del0.signum() {
        0.0
    } else if del0.signum() != del1.signum() && d.abs() > 3.0 * del0.abs() {
        3.0 * del0
    } else {
        d
    }
}

// Index of the first sample where the secant slopes increase beyond rounding.
fn concavity_violation(lambda: &[f64], phi: &[f64]) -> Option<usize> {
    let secant: Vec<f64> = lambda
        .windows(2)
        .zip(phi.windows(2))
        .map(|(l, p)| (p[1] - p[0]) / (l[1] - l[0]))
        .collect();
    secant
        .windows(2)
        .position(|s| s[1] > s[0] * (1.0 + 1e-9) + 1e-300)
        .map(|i| i + 1)
}

#[derive(Debug, Clone, PartialEq)]
pub enum BernsteinKind {
    /// φ(λ) = λ^β.
    Stable(f64),
    /// φ(λ) = Σ w_i λ^{β_i}, as `(w_i, β_i)` pairs.
    StableMixture(Vec<(f64, f64)>),
    Tabulated(Tabulated),
}

/// A Bernstein function `scale · φ_kind(λ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpecJson", into = "SpecJson")]
pub struct BernsteinSpec {
    pub kind: BernsteinKind,
    /// Multiplicative factor applied to the raw exponent.
    pub scale: f64,
    pub normalized: bool,
}

fn check_unit(what: &str, beta: f64) -> Result<()> {
    if beta > 0.0 && beta < 1.0 {
        Ok(())
    } else {
        Err(Error::Config(format!("{what} = {beta} must lie in (0, 1)")))
    }
}

impl BernsteinSpec {
    pub fn stable(beta: f64) -> Result<Self> {
        Self::from_kind(BernsteinKind::Stable(beta), false)
    }

    pub fn mixture(components: Vec<(f64, f64)>) -> Result<Self> {
        Self::from_kind(BernsteinKind::StableMixture(components), false)
    }

    pub fn tabulated(lambda: &[f64], phi: &[f64]) -> Result<Self> {
        Self::from_kind(BernsteinKind::Tabulated(Tabulated::new(lambda, phi)?), false)
    }

    /// Validate `kind`; with `normalize`, rescale so that φ(1) = 1.
    pub fn from_kind(kind: BernsteinKind, normalize: bool) -> Result<Self> {
        match &kind {
            BernsteinKind::Stable(b) => check_unit("beta", *b)?,
            BernsteinKind::StableMixture(c) => {
                if c.is_empty() {
                    return Err(Error::Config("mixture needs at least one component".into()));
                }
                for &(w, b) in c {
                    if !(w > 0.0 && w.is_finite()) {
                        return Err(Error::Config(format!("mixture weight {w} must be positive")));
                    }
                    check_unit("mixture beta", b)?;
                }
            }
            BernsteinKind::Tabulated(_) => {}
        }
        let mut spec = BernsteinSpec {
            kind,
            scale: 1.0,
            normalized: normalize,
        };
        if normalize {
            spec.scale = 1.0 / spec.raw_phi(1.0);
        }
        Ok(spec)
    }

    /// Same exponent multiplied by `factor`.
    pub fn scaled(mut self, factor: f64) -> Self {
        self.scale *= factor;
        self.normalized = false;
        self
    }

    /// Exponent of the stable law if this spec is a (scaled) stable one.
    pub fn stable_beta(&self) -> Option<f64> {
        match self.kind {
            BernsteinKind::Stable(b) => Some(b),
            _ => None,
        }
    }

    pub fn label(&self) -> String {
        self.to_string()
    }

    fn raw_phi(&self, lambda: f64) -> f64 {
        match &self.kind {
            BernsteinKind::Stable(b) => lambda.powf(*b),
            BernsteinKind::StableMixture(c) => c.iter().map(|&(w, b)| w * lambda.powf(b)).sum(),
            BernsteinKind::Tabulated(t) => t.eval(lambda),
        }
    }

    fn check_arg(op: &'static str, name: &str, v: f64) -> Result<()> {
        if v > 0.0 && v.is_finite() {
            Ok(())
        } else {
            Err(Error::domain(op, format!("{name} = {v} must be positive and finite")))
        }
    }

    pub fn phi(&self, lambda: f64) -> Result<f64> {
        Self::check_arg("phi", "lambda", lambda)?;
        Ok(self.scale * self.raw_phi(lambda))
    }

    pub fn phi_prime(&self, lambda: f64) -> Result<f64> {
        Self::check_arg("phi_prime", "lambda", lambda)?;
        Ok(self.phi_prime_unchecked(lambda))
    }

    fn phi_prime_unchecked(&self, lambda: f64) -> f64 {
        let raw = match &self.kind {
            BernsteinKind::Stable(b) => b * lambda.powf(b - 1.0),
            BernsteinKind::StableMixture(c) => c.iter().map(|&(w, b)| w * b * lambda.powf(b - 1.0)).sum(),
            BernsteinKind::Tabulated(t) => {
                // central difference in ln λ
                let h = 1e-5;
                let s = lambda.ln();
                let up = t.ln_eval(s + h).exp();
                let down = t.ln_eval(s - h).exp();
                (up - down) / (2.0 * h * lambda)
            }
        };
        self.scale * raw
    }

    /// Principal-branch φ(z) for complex z off the negative real axis.
    pub fn phi_complex(&self, z: Complex64) -> Result<Complex64> {
        let raw = match &self.kind {
            BernsteinKind::Stable(b) => z.powf(*b),
            BernsteinKind::StableMixture(c) => c.iter().map(|&(w, b)| w * z.powf(b)).sum(),
            BernsteinKind::Tabulated(_) => {
                return Err(Error::unsupported("phi_complex", "tabulated exponents"));
            }
        };
        Ok(self.scale * raw)
    }

    /// Generalized inverse `inf{s > 0 : φ'(s) ≤ y}`.
    pub fn phi_prime_inverse(&self, y: f64) -> Result<f64> {
        Self::check_arg("phi_prime_inverse", "y", y)?;
        // φ' is non-increasing: find s with φ'(s) ≤ y, i.e. g(s) = y - φ'(s) ≥ 0
        monotone_root("phi_prime_inverse", |s| y - self.phi_prime_unchecked(s))
    }

    pub fn phi_inverse(&self, y: f64) -> Result<f64> {
        Self::check_arg("phi_inverse", "y", y)?;
        monotone_root("phi_inverse", |s| self.scale * self.raw_phi(s) - y)
    }

    /// ν(t); closed form for stable kinds, `β/Γ(1-β) t^{-1-β}` per component.
    pub fn levy_density(&self, t: f64) -> Result<f64> {
        Self::check_arg("levy_density", "t", t)?;
        let one = |b: f64| b / gamma(1.0 - b) * t.powf(-1.0 - b);
        let raw = match &self.kind {
            BernsteinKind::Stable(b) => one(*b),
            BernsteinKind::StableMixture(c) => c.iter().map(|&(w, b)| w * one(b)).sum(),
            BernsteinKind::Tabulated(_) => {
                return Err(Error::unsupported("levy_density", "tabulated exponents"));
            }
        };
        Ok(self.scale * raw)
    }

    /// Tail `w(x) = ν(x, ∞)`.
    pub fn levy_tail_w(&self, x: f64) -> Result<f64> {
        Self::check_arg("levy_tail_w", "x", x)?;
        let one = |b: f64| x.powf(-b) / gamma(1.0 - b);
        let raw = match &self.kind {
            BernsteinKind::Stable(b) => one(*b),
            BernsteinKind::StableMixture(c) => c.iter().map(|&(w, b)| w * one(b)).sum(),
            BernsteinKind::Tabulated(_) => {
                return Err(Error::unsupported("levy_tail_w", "tabulated exponents"));
            }
        };
        Ok(self.scale * raw)
    }

    /// The conjugate exponent `φ*(λ) = λ/φ(λ)`.
    ///
    /// Stable(β) maps to Stable(1-β) with reciprocal scale. Other kinds are
    /// tabulated on `10^{-12}..10^{12}` and must pass the concavity check.
    pub fn conjugate(&self) -> Result<BernsteinSpec> {
        if let BernsteinKind::Stable(b) = self.kind {
            return Ok(BernsteinSpec {
                kind: BernsteinKind::Stable(1.0 - b),
                scale: 1.0 / self.scale,
                normalized: self.normalized,
            });
        }
        let lambda: Vec<f64> = (0..=24 * 40).map(|i| 10f64.powf(-12.0 + i as f64 / 40.0)).collect();
        let star: Vec<f64> = lambda.iter().map(|&l| l / (self.scale * self.raw_phi(l))).collect();
        if let Some(i) = concavity_violation(&lambda, &star) {
            return Err(Error::NotSpecial {
                detail: format!("lambda/phi(lambda) is not concave near lambda = {:.6e}", lambda[i]),
            });
        }
        if star.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::NotSpecial {
                detail: "lambda/phi(lambda) is not increasing".into(),
            });
        }
        BernsteinSpec::tabulated(&lambda, &star).map_err(|e| Error::NotSpecial { detail: e.to_string() })
    }

    /// Empirical weak-scaling witness over probe points `(λ, κ)`, κ ≥ 1.
    pub fn verify_weak_scaling(&self, lambda_grid: &[f64], kappa_grid: &[f64]) -> ScalingWitness {
        let probes: Vec<(f64, f64)> = lambda_grid
            .iter()
            .flat_map(|&l| kappa_grid.iter().map(move |&k| (l, k)))
            .filter(|&(l, k)| l > 0.0 && k >= 1.0 && (l * k).is_finite())
            .collect();
        let lo = probes.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
        let hi = probes.iter().map(|p| p.0 * p.1).fold(0.0, f64::max);
        // local exponent λφ'(λ)/φ(λ) on a fine log grid spanning all probes
        let mut akm_min = f64::INFINITY;
        let mut akm_max: f64 = 0.0;
        let (mut beta1, mut beta2) = (f64::INFINITY, f64::NEG_INFINITY);
        if lo.is_finite() && hi > 0.0 {
            let n = (((hi / lo).log10() * 16.0).ceil() as usize).max(1);
            for i in 0..=n {
                let l = lo * (hi / lo).powf(i as f64 / n as f64);
                let slope = l * self.phi_prime_unchecked(l) / (self.scale * self.raw_phi(l));
                beta1 = beta1.min(slope);
                beta2 = beta2.max(slope);
                akm_min = akm_min.min(1.0 / slope);
                akm_max = akm_max.max(1.0 / slope);
            }
        }
        let (mut c1, mut c2) = (f64::INFINITY, 0.0f64);
        for &(l, k) in &probes {
            let ratio = self.raw_phi(k * l) / self.raw_phi(l);
            c1 = c1.min(ratio / k.powf(beta1));
            c2 = c2.max(ratio / k.powf(beta2));
        }
        let degenerate = probes.is_empty()
            || !(beta1 > 0.0 && beta2 < 1.0 && beta1 <= beta2)
            || !(c1 > 0.0 && c2.is_finite())
            || akm_min < 1.0 - 1e-9;
        ScalingWitness {
            beta1,
            beta2,
            c1,
            c2,
            akm_min,
            akm_max,
            degenerate,
            grid: probes,
        }
    }
}

// Root of an increasing function g on (0, ∞): geometric bracket from s = 1,
// then bisection in ln s.
pub(crate) fn monotone_root(op: &'static str, g: impl Fn(f64) -> f64) -> Result<f64> {
    let (mut lo, mut hi) = (1.0f64, 1.0f64);
    let g1 = g(1.0);
    if g1 == 0.0 {
        return Ok(1.0);
    }
    let mut found = false;
    for _ in 0..MAX_DOUBLINGS {
        if g1 < 0.0 {
            hi *= 2.0;
            if g(hi) >= 0.0 {
                found = true;
                break;
            }
            lo = hi;
        } else {
            lo *= 0.5;
            if g(lo) < 0.0 {
                found = true;
                break;
            }
            hi = lo;
        }
    }
    if !found {
        return Err(Error::range(
            op,
            format!("no sign change after {MAX_DOUBLINGS} doublings"),
        ));
    }
    for _ in 0..MAX_DOUBLINGS {
        if hi - lo <= INVERSE_REL_TOL * 0.25 * hi {
            break;
        }
        let mid = (lo * hi).sqrt();
        if g(mid) >= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Empirical constants in `c1 κ^{β1} ≤ φ(κλ)/φ(λ) ≤ c2 κ^{β2}` together with
/// the range of `φ(λ)/(λφ'(λ))` on the probed interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingWitness {
    pub beta1: f64,
    pub beta2: f64,
    pub c1: f64,
    pub c2: f64,
    pub akm_min: f64,
    /// Empirical C* of the sandwich λφ' ≤ φ ≤ C* λφ'.
    pub akm_max: f64,
    /// Set when the grid is empty or the fitted constants are not admissible.
    pub degenerate: bool,
    pub grid: Vec<(f64, f64)>,
}

impl ScalingWitness {
    /// Check the sandwich at every probe point, allowing relative slack `tol`.
    pub fn holds(&self, spec: &BernsteinSpec, tol: f64) -> bool {
        self.grid.iter().all(|&(l, k)| {
            let r = spec.raw_phi(k * l) / spec.raw_phi(l);
            r >= self.c1 * k.powf(self.beta1) * (1.0 - tol) && r <= self.c2 * k.powf(self.beta2) * (1.0 + tol)
        })
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpecJson {
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    components: Option<Vec<Component>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lambda: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    phi: Option<Vec<f64>>,
    #[serde(default)]
    normalize: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    scale: Option<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum Component {
    Pair(f64, f64),
    Named { weight: f64, beta: f64 },
}

impl TryFrom<SpecJson> for BernsteinSpec {
    type Error = Error;

    fn try_from(j: SpecJson) -> Result<Self> {
        let missing = |f: &str| Error::Config(format!("{} spec requires \"{f}\"", j.kind));
        let kind = match j.kind.as_str() {
            "stable" => BernsteinKind::Stable(j.beta.ok_or_else(|| missing("beta"))?),
            "mixture" => BernsteinKind::StableMixture(
                j.components
                    .as_ref()
                    .ok_or_else(|| missing("components"))?
                    .iter()
                    .map(|c| match *c {
                        Component::Pair(w, b) | Component::Named { weight: w, beta: b } => (w, b),
                    })
                    .collect(),
            ),
            "tabulated" => BernsteinKind::Tabulated(Tabulated::new(
                j.lambda.as_deref().ok_or_else(|| missing("lambda"))?,
                j.phi.as_deref().ok_or_else(|| missing("phi"))?,
            )?),
            other => return Err(Error::Config(format!("unknown exponent kind \"{other}\""))),
        };
        let spec = BernsteinSpec::from_kind(kind, j.normalize)?;
        Ok(match j.scale {
            Some(s) if !j.normalize => {
                if !(s > 0.0 && s.is_finite()) {
                    return Err(Error::Config(format!("scale {s} must be positive")));
                }
                spec.scaled(s)
            }
            _ => spec,
        })
    }
}

impl From<BernsteinSpec> for SpecJson {
    fn from(s: BernsteinSpec) -> Self {
        let mut j = SpecJson {
            kind: String::new(),
            beta: None,
            components: None,
            lambda: None,
            phi: None,
            normalize: s.normalized,
            scale: (!s.normalized && s.scale != 1.0).then_some(s.scale),
        };
        match s.kind {
            BernsteinKind::Stable(b) => {
                j.kind = "stable".into();
                j.beta = Some(b);
            }
            BernsteinKind::StableMixture(c) => {
                j.kind = "mixture".into();
                j.components = Some(c.into_iter().map(|(w, b)| Component::Pair(w, b)).collect());
            }
            BernsteinKind::Tabulated(t) => {
                j.kind = "tabulated".into();
                j.lambda = Some(t.lambda());
                j.phi = Some(t.phi_samples());
            }
        }
        j
    }
}

impl fmt::Display for BernsteinSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            BernsteinKind::Stable(b) => write!(f, "stable:{b}")?,
            BernsteinKind::StableMixture(c) => {
                write!(f, "mixture:")?;
                for (i, (w, b)) in c.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{w}@{b}")?;
                }
            }
            BernsteinKind::Tabulated(t) => write!(f, "tabulated[{}]", t.ln_lambda.len())?,
        }
        if self.scale != 1.0 {
            write!(f, "*{}", self.scale)?;
        }
        Ok(())
    }
}

/// Shorthand `stable:β` or `mixture:w1@β1,w2@β2,…`.
impl FromStr for BernsteinSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("cannot parse exponent shorthand \"{s}\""));
        let (kind, rest) = s.split_once(':').ok_or_else(bad)?;
        let num = |v: &str| v.trim().parse::<f64>().map_err(|_| bad());
        match kind.trim() {
            "stable" => BernsteinSpec::stable(num(rest)?),
            "mixture" => {
                let comps = rest
                    .split(',')
                    .map(|c| {
                        let (w, b) = c.split_once('@').ok_or_else(bad)?;
                        Ok((num(w)?, num(b)?))
                    })
                    .collect::<Result<Vec<_>>>()?;
                BernsteinSpec::mixture(comps)
            }
            _ => Err(bad()),
        }
    }
}
