//! Base heat kernels p⁰ on ℝ and the abstract jump and diffusion envelopes.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::bernstein::monotone_root;
use crate::error::{Error, Result};
use crate::quad::{fourier_cosine, Estimate, Tolerance};
use crate::special::ln_gamma;

/// Scale function Φ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScaleFunction {
    Power(f64),
}

impl ScaleFunction {
    pub fn eval(&self, r: f64) -> f64 {
        match *self {
            ScaleFunction::Power(a) => r.powf(a),
        }
    }

    pub fn inverse(&self, t: f64) -> f64 {
        match *self {
            ScaleFunction::Power(a) => t.powf(1.0 / a),
        }
    }

    /// Lower and upper scaling exponents `(α₁, α₂)`.
    pub fn exponents(&self) -> (f64, f64) {
        match *self {
            ScaleFunction::Power(a) => (a, a),
        }
    }
}

/// Volume function `V(x, r)`, independent of x for the instances shipped here.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VolumeFunction {
    Power(f64),
}

impl VolumeFunction {
    pub fn eval(&self, r: f64) -> f64 {
        match *self {
            VolumeFunction::Power(d) => r.powf(d),
        }
    }

    /// Lower and upper scaling exponents `(d₁, d₂)`.
    pub fn exponents(&self) -> (f64, f64) {
        match *self {
            VolumeFunction::Power(d) => (d, d),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelKind {
    GaussianR1,
    CauchyR1,
    StableR1(f64),
    JumpEnvelope,
    DiffusionEnvelope,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
struct KernelJson {
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    d: Option<f64>,
}

/// A base heat kernel, given as a function of `t` and the distance `z`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "KernelJson", into = "KernelJson")]
pub struct HeatKernelSpec {
    pub kind: KernelKind,
    pub scale: ScaleFunction,
    pub volume: VolumeFunction,
}

impl TryFrom<KernelJson> for HeatKernelSpec {
    type Error = Error;

    fn try_from(j: KernelJson) -> Result<Self> {
        let d = j.d.unwrap_or(1.0);
        let concrete = |spec: HeatKernelSpec| {
            if d != 1.0 {
                Err(Error::Config(format!(
                    "{} kernels live on the line, got d = {d}",
                    j.kind
                )))
            } else {
                Ok(spec)
            }
        };
        match j.kind.as_str() {
            "gaussian" | "gaussian_r1" => concrete(HeatKernelSpec::gaussian()),
            "cauchy" | "cauchy_r1" => concrete(HeatKernelSpec::cauchy()),
            "stable" | "stable_r1" => {
                let a = j
                    .alpha
                    .ok_or_else(|| Error::Config("stable kernel needs alpha".into()))?;
                concrete(HeatKernelSpec::stable(a)?)
            }
            "jump" | "jump_envelope" => {
                let a = j
                    .alpha
                    .ok_or_else(|| Error::Config("jump envelope needs alpha".into()))?;
                HeatKernelSpec::jump_envelope(a, d)
            }
            "diffusion" | "diffusion_envelope" => {
                let a = j
                    .alpha
                    .ok_or_else(|| Error::Config("diffusion envelope needs alpha".into()))?;
                HeatKernelSpec::diffusion_envelope(a, d)
            }
            other => Err(Error::Config(format!("unknown kernel kind `{other}`"))),
        }
    }
}

impl From<HeatKernelSpec> for KernelJson {
    fn from(s: HeatKernelSpec) -> Self {
        let (kind, alpha) = match s.kind {
            KernelKind::GaussianR1 => ("gaussian", None),
            KernelKind::CauchyR1 => ("cauchy", None),
            KernelKind::StableR1(a) => ("stable", Some(a)),
            KernelKind::JumpEnvelope => ("jump", Some(s.alpha())),
            KernelKind::DiffusionEnvelope => ("diffusion", Some(s.alpha())),
        };
        KernelJson {
            kind: kind.into(),
            alpha,
            d: Some(s.dimension()),
        }
    }
}

fn check_index(name: &str, v: f64, lo: f64, hi: f64) -> Result<()> {
    if v > lo && v <= hi && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!("{name} = {v} must lie in ({lo}, {hi}]")))
    }
}

impl HeatKernelSpec {
    pub fn gaussian() -> Self {
        HeatKernelSpec {
            kind: KernelKind::GaussianR1,
            scale: ScaleFunction::Power(2.0),
            volume: VolumeFunction::Power(1.0),
        }
    }

    pub fn cauchy() -> Self {
        HeatKernelSpec {
            kind: KernelKind::CauchyR1,
            scale: ScaleFunction::Power(1.0),
            volume: VolumeFunction::Power(1.0),
        }
    }

    /// Symmetric α-stable kernel with `∫ p⁰(t,z) e^{iξz} dz = e^{−t|ξ|^α}`.
    pub fn stable(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 2.0) {
            return Err(Error::Config(format!(
                "stable index alpha = {alpha} must lie in (0, 2)"
            )));
        }
        Ok(HeatKernelSpec {
            kind: KernelKind::StableR1(alpha),
            scale: ScaleFunction::Power(alpha),
            volume: VolumeFunction::Power(1.0),
        })
    }

    /// `1/V(Φ^{-1}(t)) ∧ t/(V(z)Φ(z))` with `Φ(r) = r^α`, `V(r) = r^d`.
    pub fn jump_envelope(alpha: f64, d: f64) -> Result<Self> {
        check_index("alpha", alpha, 0.0, f64::INFINITY)?;
        check_index("d", d, 0.0, f64::INFINITY)?;
        Ok(HeatKernelSpec {
            kind: KernelKind::JumpEnvelope,
            scale: ScaleFunction::Power(alpha),
            volume: VolumeFunction::Power(d),
        })
    }

    /// `e^{−m(t,z)}/V(Φ^{-1}(t))`; needs `α > 1`.
    pub fn diffusion_envelope(alpha: f64, d: f64) -> Result<Self> {
        check_index("alpha", alpha, 1.0, f64::INFINITY)?;
        check_index("d", d, 0.0, f64::INFINITY)?;
        Ok(HeatKernelSpec {
            kind: KernelKind::DiffusionEnvelope,
            scale: ScaleFunction::Power(alpha),
            volume: VolumeFunction::Power(d),
        })
    }

    pub fn alpha(&self) -> f64 {
        self.scale.exponents().0
    }

    pub fn dimension(&self) -> f64 {
        self.volume.exponents().0
    }

    pub fn is_concrete(&self) -> bool {
        !matches!(self.kind, KernelKind::JumpEnvelope | KernelKind::DiffusionEnvelope)
    }

    /// p⁰ at time `t` and distance `z`; envelope kinds return the envelope.
    pub fn p0_radial(&self, t: f64, z: f64) -> Result<f64> {
        self.p0_estimate(t, z).map(|e| e.value)
    }

    pub fn p0_estimate(&self, t: f64, z: f64) -> Result<Estimate> {
        let op = "p0_radial";
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::domain(op, format!("t = {t} must be positive")));
        }
        if !(z >= 0.0) {
            return Err(Error::domain(op, format!("z = {z} must be nonnegative")));
        }
        let exact = |v: f64| Ok(Estimate::new(v, 0.0));
        match self.kind {
            KernelKind::GaussianR1 => exact((-z * z / (4.0 * t)).exp() / (4.0 * PI * t).sqrt()),
            KernelKind::CauchyR1 => exact(t / (PI * (t * t + z * z))),
            KernelKind::StableR1(a) => {
                let s = t.powf(-1.0 / a);
                Ok(stable_line_density(a, z * s)?.scale(s))
            }
            KernelKind::JumpEnvelope => {
                let near = 1.0 / self.volume.eval(self.scale.inverse(t));
                let far = t / (self.volume.eval(z) * self.scale.eval(z));
                exact(near.min(far))
            }
            KernelKind::DiffusionEnvelope => {
                let m = m_solver(&self.scale, t, z.max(f64::MIN_POSITIVE))?;
                exact((-m).exp() / self.volume.eval(self.scale.inverse(t)))
            }
        }
    }
}

const STABLE_TOL: Tolerance = Tolerance {
    abs: 1e-300,
    rel: 1e-11,
};

/// Density at `x ≥ 0` of the symmetric α-stable law with characteristic
/// function `e^{−|ξ|^α}`, `(1/π)∫₀^∞ cos(ξx) e^{−ξ^α} dξ`.
///
/// Far out the asymptotic series
/// `(1/π) Σ (−1)^{k+1} Γ(αk+1)/k! sin(kπα/2) x^{−αk−1}` is used once its
/// smallest term is negligible.
pub fn stable_line_density(alpha: f64, x: f64) -> Result<Estimate> {
    if !(alpha > 0.0 && alpha <= 2.0) {
        return Err(Error::domain(
            "stable_line_density",
            format!("alpha = {alpha} must lie in (0, 2]"),
        ));
    }
    let x = x.abs();
    if x >= 2.0 {
        if let Some(v) = stable_line_series(alpha, x) {
            return Ok(v);
        }
    }
    fourier_cosine(|xi| (-xi.powf(alpha)).exp(), x, STABLE_TOL)
        .map(|e| e.scale(1.0 / PI))
        .map_err(|e| e.within("stable_line_density"))
}

fn stable_line_series(alpha: f64, x: f64) -> Option<Estimate> {
    let lx = x.ln();
    let mut sum = 0.0;
    let mut prev = f64::INFINITY;
    for k in 1..200 {
        let kf = k as f64;
        let mag = (ln_gamma(alpha * kf + 1.0) - ln_gamma(kf + 1.0) - (alpha * kf + 1.0) * lx).exp();
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        let term = sign * mag * (kf * PI * alpha / 2.0).sin();
        if mag > prev && alpha > 1.0 {
            return None;
        }
        sum += term;
        if mag <= 1e-13 * sum.abs() {
            return Some(Estimate::new(sum / PI, mag / PI));
        }
        prev = mag;
    }
    None
}

/// Solves `t/m = Φ(r/m)` for m.
///
/// Power scale functions use `m = (r^α/t)^{1/(α−1)}`; [`m_solver_bisect`]
/// handles a general Φ.
pub fn m_solver(scale: &ScaleFunction, t: f64, r: f64) -> Result<f64> {
    check_m_args(scale.exponents().0, t, r)?;
    match *scale {
        ScaleFunction::Power(a) => Ok((r.powf(a) / t).powf(1.0 / (a - 1.0))),
    }
}

/// Solves `t = mΦ(r/m)` by bisection in ln m; the right side decreases in m
/// when Φ grows faster than linearly.
pub fn m_solver_bisect(phi: impl Fn(f64) -> f64, alpha1: f64, t: f64, r: f64) -> Result<f64> {
    check_m_args(alpha1, t, r)?;
    monotone_root("m_solver", |m| t - m * phi(r / m))
}

fn check_m_args(alpha1: f64, t: f64, r: f64) -> Result<()> {
    let op = "m_solver";
    if !(alpha1 > 1.0) {
        return Err(Error::domain(
            op,
            format!("lower scaling exponent {alpha1} must exceed 1"),
        ));
    }
    if !(t > 0.0 && t.is_finite() && r > 0.0 && r.is_finite()) {
        return Err(Error::domain(op, format!("t = {t} and r = {r} must be positive")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::{gauss_kronrod, half_line};
    use proptest::prelude::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    fn line_integral(f: impl Fn(f64) -> f64, breaks: &[f64]) -> f64 {
        let tol = Tolerance::new(1e-14, 1e-11);
        let pos = half_line(&f, breaks, tol).unwrap().value;
        let neg = half_line(|z| f(-z), breaks, tol).unwrap().value;
        pos + neg
    }

    #[test]
    fn closed_form_examples() {
        let g = HeatKernelSpec::gaussian();
        assert!((g.p0_radial(1.0, 0.0).unwrap() - 0.28209479177387814).abs() < 1e-15);
        let c = HeatKernelSpec::cauchy();
        assert!((c.p0_radial(1.0, 1.0).unwrap() - 0.5 / PI).abs() < 1e-15);
        assert!(g.p0_radial(1.0, -1.0).is_err());
        assert!(g.p0_radial(0.0, 1.0).is_err());
    }

    #[test]
    fn stable_kernel_matches_fourier_quadrature() {
        let s = HeatKernelSpec::stable(1.5).unwrap();
        for &z in &[0.0, 0.3, 1.0, 2.5, 6.0, 20.0] {
            let oracle = gauss_kronrod(
                |xi| (xi * z).cos() * (-xi.powf(1.5)).exp(),
                0.0,
                60.0,
                Tolerance::new(1e-12, 1e-10),
            )
            .unwrap()
            .value
                / PI;
            let v = s.p0_radial(1.0, z).unwrap();
            assert!((v - oracle).abs() < 1e-6, "z {z}: {v} vs {oracle}");
        }
    }

    #[test]
    fn stable_kernel_reduces_to_cauchy_and_gaussian() {
        for &z in &[0.0, 0.5, 3.0, 40.0] {
            let one = stable_line_density(1.0, z).unwrap().value;
            assert!(rel(one, 1.0 / (PI * (1.0 + z * z))) < 1e-9, "z {z}");
        }
        for &z in &[0.0, 0.5, 3.0] {
            let two = stable_line_density(2.0, z).unwrap().value;
            let exact = (-z * z / 4.0).exp() / (4.0 * PI).sqrt();
            assert!(rel(two, exact) < 1e-9, "z {z}");
        }
    }

    #[test]
    fn series_and_fourier_agree_where_both_apply() {
        for &a in &[0.5, 0.8, 1.3, 1.7] {
            for &x in &[3.0, 8.0, 30.0] {
                let Some(series) = stable_line_series(a, x) else {
                    continue;
                };
                let direct = fourier_cosine(|xi| (-xi.powf(a)).exp(), x, STABLE_TOL).unwrap().value / PI;
                assert!(
                    rel(series.value, direct) < 1e-7,
                    "alpha {a} x {x}: {} vs {direct}",
                    series.value
                );
            }
        }
    }

    #[test]
    fn concrete_kernels_are_conservative() {
        for spec in [
            HeatKernelSpec::gaussian(),
            HeatKernelSpec::cauchy(),
            HeatKernelSpec::stable(1.5).unwrap(),
        ] {
            for &t in &[0.1, 1.0, 5.0] {
                let mass = line_integral(|z| spec.p0_radial(t, z.abs()).unwrap(), &[t, 10.0 * t, 100.0 * t]);
                assert!((mass - 1.0).abs() < 1e-8, "{:?} t {t}: {mass}", spec.kind);
            }
        }
    }

    #[test]
    fn chapman_kolmogorov() {
        for spec in [
            HeatKernelSpec::gaussian(),
            HeatKernelSpec::cauchy(),
            HeatKernelSpec::stable(1.5).unwrap(),
        ] {
            for &(s, t, x) in &[(0.5, 1.0, 0.0), (1.0, 2.0, 1.5), (0.3, 0.7, 4.0)] {
                let f = |z: f64| spec.p0_radial(s, z.abs()).unwrap() * spec.p0_radial(t, (x - z).abs()).unwrap();
                let lhs = line_integral(f, &[1.0, x.abs() + 1.0, 20.0]);
                let rhs = spec.p0_radial(s + t, x).unwrap();
                assert!(rel(lhs, rhs) < 1e-5, "{:?} ({s},{t},{x}): {lhs} vs {rhs}", spec.kind);
            }
        }
    }

    #[test]
    fn m_solver_examples() {
        let sq = ScaleFunction::Power(2.0);
        assert!(rel(m_solver(&sq, 1.0, 2.0).unwrap(), 4.0) < 1e-15);
        for &r in &[0.1, 1.0, 7.0] {
            assert!(rel(m_solver(&sq, sq.eval(r), r).unwrap(), 1.0) < 1e-14);
        }
        let cube = ScaleFunction::Power(3.0);
        assert!(rel(m_solver(&cube, 1.0, 2.0).unwrap(), 8f64.sqrt()) < 1e-15);
        assert!(m_solver(&ScaleFunction::Power(1.0), 1.0, 1.0).is_err());
        assert!(m_solver(&sq, 1.0, 0.0).is_err());
    }

    #[test]
    fn m_solver_bisection_matches_closed_form() {
        for &a in &[1.5, 2.0, 3.0] {
            let phi = ScaleFunction::Power(a);
            for &(t, r) in &[(1.0, 2.0), (0.01, 0.5), (100.0, 3.0)] {
                let b = m_solver_bisect(|x| phi.eval(x), a, t, r).unwrap();
                assert!(rel(b, m_solver(&phi, t, r).unwrap()) < 1e-11);
            }
        }
    }

    #[test]
    fn gaussian_sits_in_diffusion_band() {
        let g = HeatKernelSpec::gaussian();
        let env = HeatKernelSpec::diffusion_envelope(2.0, 1.0).unwrap();
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for &t in &[0.01f64, 0.1, 1.0, 10.0] {
            for k in 0..10 {
                // dilated arguments absorb the constant in the exponent
                let z = 0.4 * k as f64 * t.sqrt();
                let upper = g.p0_radial(t, z).unwrap() / env.p0_radial(4.0 * t, z).unwrap();
                let lower = g.p0_radial(t, z).unwrap() / env.p0_radial(t / 2.0, z).unwrap();
                lo = lo.min(lower);
                hi = hi.max(upper);
            }
        }
        assert!(lo > 0.1 && hi < 10.0, "band [{lo}, {hi}]");
    }

    #[test]
    fn cauchy_sits_in_jump_band() {
        let c = HeatKernelSpec::cauchy();
        let env = HeatKernelSpec::jump_envelope(1.0, 1.0).unwrap();
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for &t in &[1e-3, 0.1, 1.0, 100.0] {
            for &z in &[0.0, 1e-3, 0.1, 1.0, 10.0, 1e3] {
                let q = c.p0_radial(t, z).unwrap() / env.p0_radial(t, z).unwrap();
                lo = lo.min(q);
                hi = hi.max(q);
            }
        }
        assert!(lo >= 0.5 / PI && hi <= 1.0 / PI + 1e-15, "band [{lo}, {hi}]");
    }

    #[test]
    fn kernel_json_round_trip() {
        let s: HeatKernelSpec = serde_json::from_str(r#"{"kind":"stable","alpha":1.5}"#).unwrap();
        assert_eq!(s.kind, KernelKind::StableR1(1.5));
        let j: HeatKernelSpec = serde_json::from_str(r#"{"kind":"jump","alpha":1.0,"d":3}"#).unwrap();
        assert_eq!(j.dimension(), 3.0);
        let back: HeatKernelSpec = serde_json::from_str(&serde_json::to_string(&j).unwrap()).unwrap();
        assert_eq!(back, j);
        assert!(serde_json::from_str::<HeatKernelSpec>(r#"{"kind":"gaussian","d":2}"#).is_err());
        assert!(serde_json::from_str::<HeatKernelSpec>(r#"{"kind":"diffusion","alpha":0.8}"#).is_err());
        assert!(serde_json::from_str::<HeatKernelSpec>(r#"{"kind":"stable","alpha":2.5}"#).is_err());
    }

    proptest! {
        #[test]
        fn m_is_monotone(a in 1.2f64..4.0, t in 0.01f64..100.0, r in 0.01f64..100.0, k in 1.01f64..10.0) {
            let phi = ScaleFunction::Power(a);
            prop_assert!(m_solver(&phi, t * k, r).unwrap() <= m_solver(&phi, t, r).unwrap());
            prop_assert!(m_solver(&phi, t, r * k).unwrap() >= m_solver(&phi, t, r).unwrap());
        }
    }
}
