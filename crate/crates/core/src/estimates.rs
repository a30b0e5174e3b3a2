//! Two-sided envelopes for q and the ratio sweeps that check them.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bernstein::{monotone_root, BernsteinKind, BernsteinSpec};
use crate::error::{Error, Result};
use crate::kernels::{HeatKernelSpec, ScaleFunction, VolumeFunction};
use crate::quad::{gauss_kronrod_panels, Tolerance};
use crate::subordinator::{DensityEval, EnvelopeRegimeL};

const ENVELOPE_TOL: Tolerance = Tolerance {
    abs: 1e-300,
    rel: 1e-10,
};

fn check_stable_params(op: &'static str, d: f64, alpha: f64, beta: f64, t: f64, r: f64) -> Result<()> {
    if !(d > 0.0 && alpha > 0.0 && beta > 0.0 && beta < 1.0) {
        return Err(Error::domain(op, format!("d = {d}, alpha = {alpha}, beta = {beta}")));
    }
    if !(t > 0.0 && t.is_finite() && r >= 0.0 && r.is_finite()) {
        return Err(Error::domain(op, format!("t = {t}, r = {r}")));
    }
    Ok(())
}

fn diagonal_radius(alpha: f64, beta: f64, t: f64) -> f64 {
    t.powf(beta / alpha)
}

/// Near-diagonal form, valid for `r ≤ t^{β/α}`.
#[allow(non_snake_case)]
pub fn H_le1(d: f64, alpha: f64, beta: f64, t: f64, r: f64) -> Result<f64> {
    let op = "H_le1";
    check_stable_params(op, d, alpha, beta, t, r)?;
    if r > diagonal_radius(alpha, beta, t) * (1.0 + 1e-12) {
        return Err(Error::domain(op, format!("r = {r} lies beyond t^(β/α)")));
    }
    let crit = 2.0 * alpha;
    if (d - crit).abs() <= 1e-12 * crit {
        if r == 0.0 {
            return Err(Error::domain(op, "r = 0 is singular when d = 2α"));
        }
        Ok(t.powf(-1.0 - beta) * (2.0 * t.powf(beta) / r.powf(alpha)).ln())
    } else if d < crit {
        Ok(t.powf(beta - 1.0 - beta * d / alpha))
    } else {
        if r == 0.0 {
            return Err(Error::domain(op, "r = 0 is singular when d > 2α"));
        }
        Ok(t.powf(-1.0 - beta) / r.powf(d - crit))
    }
}

/// Jump-type far form `t^{2β−1}/r^{d+α}`, valid for `r ≥ t^{β/α}`.
#[allow(non_snake_case)]
pub fn H_ge1_jump(d: f64, alpha: f64, beta: f64, t: f64, r: f64) -> Result<f64> {
    let op = "H_ge1_jump";
    check_stable_params(op, d, alpha, beta, t, r)?;
    if r < diagonal_radius(alpha, beta, t) * (1.0 - 1e-12) {
        return Err(Error::domain(op, format!("r = {r} lies inside t^(β/α)")));
    }
    Ok(t.powf(2.0 * beta - 1.0) / r.powf(d + alpha))
}

/// Diffusion-type far form `t^{β−1−βd/α} exp(−(r^α/t^β)^{1/(α−β)})`, valid
/// for `r ≥ t^{β/α}` and `α ≥ 2`.
#[allow(non_snake_case)]
pub fn H_ge1_diff(d: f64, alpha: f64, beta: f64, t: f64, r: f64) -> Result<f64> {
    let op = "H_ge1_diff";
    check_stable_params(op, d, alpha, beta, t, r)?;
    if alpha < 2.0 {
        return Err(Error::domain(op, format!("alpha = {alpha} must be at least 2")));
    }
    if r < diagonal_radius(alpha, beta, t) * (1.0 - 1e-12) {
        return Err(Error::domain(op, format!("r = {r} lies inside t^(β/α)")));
    }
    Ok(t.powf(beta - 1.0 - beta * d / alpha) * (-stable_n(alpha, beta, 1.0, t, r)).exp())
}

fn stable_n(alpha: f64, beta: f64, scale: f64, t: f64, r: f64) -> f64 {
    (scale * r.powf(alpha) / t.powf(beta)).powf(1.0 / (alpha - beta))
}

/// Solves `1/φ(n/t) = Φ(r/n)` for n. Stable φ with power Φ uses
/// `n = (c r^α/t^β)^{1/(α−β)}`; otherwise bisection in ln n.
pub fn n_solver(phi: &BernsteinSpec, scale: &ScaleFunction, t: f64, r: f64) -> Result<f64> {
    let op = "n_solver";
    if !(t > 0.0 && t.is_finite() && r > 0.0 && r.is_finite()) {
        return Err(Error::domain(op, format!("t = {t} and r = {r} must be positive")));
    }
    let ScaleFunction::Power(alpha) = *scale;
    if let BernsteinKind::Stable(beta) = phi.kind {
        if alpha > beta {
            return Ok(stable_n(alpha, beta, phi.scale, t, r));
        }
    }
    n_solver_bisect(phi, scale, t, r)
}

/// [`n_solver`] without the closed form.
pub fn n_solver_bisect(phi: &BernsteinSpec, scale: &ScaleFunction, t: f64, r: f64) -> Result<f64> {
    let op = "n_solver";
    let failure = std::cell::RefCell::new(None);
    let n = monotone_root(op, |n| match phi.phi(n / t) {
        Ok(v) => -(scale.eval(r / n).ln() + v.ln()),
        Err(e) => {
            failure.borrow_mut().get_or_insert(e);
            0.0
        }
    })?;
    match failure.into_inner() {
        Some(e) => Err(e),
        None => Ok(n),
    }
}

/// Which side of `Φ(z)φ(1/t) = 1` a point lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Near,
    Far,
}

pub fn regime(phi: &BernsteinSpec, scale: &ScaleFunction, t: f64, z: f64) -> Result<Regime> {
    Ok(if scale.eval(z) * phi.phi(1.0 / t)? <= 1.0 {
        Regime::Near
    } else {
        Regime::Far
    })
}

// (φ(1/t)/t) ∫_{Φ(z)}^{2/φ(1/t)} r / V(Φ^{-1}(r)) dr in ln r
fn near_envelope(phi: &BernsteinSpec, scale: &ScaleFunction, volume: &VolumeFunction, t: f64, z: f64) -> Result<f64> {
    let op = "envelope_jump";
    let ft = phi.phi(1.0 / t)?;
    let hi = (2.0 / ft).ln();
    let lo = if z > 0.0 {
        scale.eval(z).ln()
    } else {
        // the integrand behaves like r^{2−d₂/α₁} at 0
        let decay = 2.0 - volume.exponents().1 / scale.exponents().0;
        if decay <= 0.0 {
            return Err(Error::range(op, "near-diagonal integral diverges at z = 0"));
        }
        hi - 40.0 / decay
    };
    let est = gauss_kronrod_panels(
        |u| {
            let r = u.exp();
            r * r / volume.eval(scale.inverse(r))
        },
        &[lo, hi],
        ENVELOPE_TOL,
    )
    .map_err(|e| e.within(op))?;
    Ok(ft / t * est.value)
}

/// Jump-type envelope: the near-diagonal integral form when
/// `Φ(z)φ(1/t) ≤ 1`, otherwise `1/(t φ(1/t)² V(z) Φ(z))`.
pub fn envelope_jump(
    phi: &BernsteinSpec,
    scale: &ScaleFunction,
    volume: &VolumeFunction,
    t: f64,
    z: f64,
) -> Result<f64> {
    let op = "envelope_jump";
    if !(t > 0.0 && t.is_finite() && z >= 0.0 && z.is_finite()) {
        return Err(Error::domain(op, format!("t = {t}, z = {z}")));
    }
    match regime(phi, scale, t, z)? {
        Regime::Near => near_envelope(phi, scale, volume, t, z),
        Regime::Far => {
            let ft = phi.phi(1.0 / t)?;
            Ok(1.0 / (t * ft * ft * volume.eval(z) * scale.eval(z)))
        }
    }
}

/// Diffusion-type envelope band. Near the diagonal both ends equal the jump
/// form; otherwise `A e^{−c n}` for the two exponential constants, with
/// `A = n/(t φ(n/t) V(Φ^{-1}(1/φ(1/t))))`.
pub fn envelope_diff(
    phi: &BernsteinSpec,
    scale: &ScaleFunction,
    volume: &VolumeFunction,
    t: f64,
    z: f64,
    c_exp: (f64, f64),
) -> Result<(f64, f64)> {
    let op = "envelope_diff";
    if !(t > 0.0 && t.is_finite() && z >= 0.0 && z.is_finite()) {
        return Err(Error::domain(op, format!("t = {t}, z = {z}")));
    }
    if !(c_exp.0 > 0.0 && c_exp.1 > 0.0) {
        return Err(Error::Config(format!(
            "exponential constants {c_exp:?} must be positive"
        )));
    }
    match regime(phi, scale, t, z)? {
        Regime::Near => {
            let v = near_envelope(phi, scale, volume, t, z)?;
            Ok((v, v))
        }
        Regime::Far => {
            let n = n_solver(phi, scale, t, z)?;
            let a = n / (t * phi.phi(n / t)? * volume.eval(scale.inverse(1.0 / phi.phi(1.0 / t)?)));
            let (c_big, c_small) = (c_exp.0.max(c_exp.1), c_exp.0.min(c_exp.1));
            Ok((a * (-c_big * n).exp(), a * (-c_small * n).exp()))
        }
    }
}

/// Envelope family with the exponential constants `(lower, upper)` used by
/// diffusion bands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnvelopeFamily {
    StableJump {
        d: f64,
        alpha: f64,
        beta: f64,
    },
    StableDiffusion {
        d: f64,
        alpha: f64,
        beta: f64,
    },
    GeneralJump {
        scale: ScaleFunction,
        volume: VolumeFunction,
        phi: BernsteinSpec,
    },
    GeneralDiffusion {
        scale: ScaleFunction,
        volume: VolumeFunction,
        phi: BernsteinSpec,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeSpec {
    pub family: EnvelopeFamily,
    pub c_exp: (f64, f64),
}

impl EnvelopeSpec {
    pub fn new(family: EnvelopeFamily) -> Result<Self> {
        let bad = |m: String| Err(Error::Config(m));
        match &family {
            EnvelopeFamily::StableJump { d, alpha, beta } => {
                if !(*d > 0.0 && *alpha > 0.0 && *beta > 0.0 && *beta < 1.0) {
                    return bad(format!(
                        "stable jump envelope needs d, α > 0 and 0 < β < 1, got {d}, {alpha}, {beta}"
                    ));
                }
            }
            EnvelopeFamily::StableDiffusion { d, alpha, beta } => {
                if !(*d > 0.0 && *alpha >= 2.0 && *beta > 0.0 && *beta < 1.0) {
                    return bad(format!(
                        "stable diffusion envelope needs d > 0, α ≥ 2 and 0 < β < 1, got {d}, {alpha}, {beta}"
                    ));
                }
            }
            EnvelopeFamily::GeneralJump { .. } => {}
            EnvelopeFamily::GeneralDiffusion { scale, .. } => {
                if scale.exponents().0 <= 1.0 {
                    return bad("diffusion envelopes need α₁ > 1".into());
                }
            }
        }
        Ok(EnvelopeSpec {
            family,
            c_exp: (1.0, 1.0),
        })
    }

    pub fn with_constants(mut self, lower: f64, upper: f64) -> Self {
        self.c_exp = (lower, upper);
        self
    }

    /// The H-forms of the stable theorem for a concrete kernel on the line.
    pub fn for_kernel(kspec: &HeatKernelSpec, beta: f64) -> Result<Self> {
        let (d, alpha) = (kspec.dimension(), kspec.alpha());
        match kspec.kind {
            crate::kernels::KernelKind::GaussianR1 | crate::kernels::KernelKind::DiffusionEnvelope => {
                Self::new(EnvelopeFamily::StableDiffusion { d, alpha, beta })
            }
            _ => Self::new(EnvelopeFamily::StableJump { d, alpha, beta }),
        }
    }

    pub fn regime(&self, t: f64, z: f64) -> Result<Regime> {
        match &self.family {
            EnvelopeFamily::StableJump { alpha, beta, .. } | EnvelopeFamily::StableDiffusion { alpha, beta, .. } => {
                Ok(if z <= diagonal_radius(*alpha, *beta, t) {
                    Regime::Near
                } else {
                    Regime::Far
                })
            }
            EnvelopeFamily::GeneralJump { scale, phi, .. } | EnvelopeFamily::GeneralDiffusion { scale, phi, .. } => {
                regime(phi, scale, t, z)
            }
        }
    }

    /// `(lower, upper)`; the two agree except on diffusion far bands.
    pub fn eval(&self, t: f64, z: f64) -> Result<(f64, f64)> {
        let same = |v: f64| Ok((v, v));
        let (lo, hi) = (self.c_exp.0.max(self.c_exp.1), self.c_exp.0.min(self.c_exp.1));
        match (&self.family, self.regime(t, z)?) {
            (EnvelopeFamily::StableJump { d, alpha, beta }, Regime::Near)
            | (EnvelopeFamily::StableDiffusion { d, alpha, beta }, Regime::Near) => {
                same(H_le1(*d, *alpha, *beta, t, z)?)
            }
            (EnvelopeFamily::StableJump { d, alpha, beta }, Regime::Far) => same(H_ge1_jump(*d, *alpha, *beta, t, z)?),
            (EnvelopeFamily::StableDiffusion { d, alpha, beta }, Regime::Far) => {
                let pre = t.powf(beta - 1.0 - beta * d / alpha);
                let n = stable_n(*alpha, *beta, 1.0, t, z);
                Ok((pre * (-lo * n).exp(), pre * (-hi * n).exp()))
            }
            (EnvelopeFamily::GeneralJump { scale, volume, phi }, _) => same(envelope_jump(phi, scale, volume, t, z)?),
            (EnvelopeFamily::GeneralDiffusion { scale, volume, phi }, _) => {
                envelope_diff(phi, scale, volume, t, z, self.c_exp)
            }
        }
    }

    fn stable_params(&self) -> Option<(f64, f64, f64)> {
        match self.family {
            EnvelopeFamily::StableJump { d, alpha, beta } | EnvelopeFamily::StableDiffusion { d, alpha, beta } => {
                Some((d, alpha, beta))
            }
            _ => None,
        }
    }
}

/// `q = I₁ + I₂`, split at `r₀ = 2/φ(1/t)`, with `p̄` replaced by its
/// two-regime envelope (`L = 1`).
pub fn q_split_i1_i2(kspec: &HeatKernelSpec, eval: &DensityEval, t: f64, z: f64) -> Result<(f64, f64)> {
    let op = "q_split_I1_I2";
    if !(t > 0.0 && t.is_finite() && z > 0.0 && z.is_finite()) {
        return Err(Error::domain(op, format!("t = {t} and z = {z} must be positive")));
    }
    let regime_l = EnvelopeRegimeL::default();
    let r0 = 2.0 / eval.spec.phi(1.0 / t)?;
    let mut failure = None;
    let mut f = |u: f64| {
        let r = u.exp();
        match kspec.p0_radial(r, z).and_then(|k| {
            if k == 0.0 {
                Ok(0.0)
            } else {
                Ok(r * k * eval.envelope_density(&regime_l, r, t)?)
            }
        }) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        }
    };
    let peak = kspec.scale.eval(z).min(r0);
    let decades =
        |a: f64, b: f64, n: usize| -> Vec<f64> { (0..=n).map(|k| a + (b - a) * k as f64 / n as f64).collect() };
    let lo = peak.ln() - 60.0;
    let i1 = gauss_kronrod_panels(&mut f, &decades(lo, r0.ln(), 20), ENVELOPE_TOL).map_err(|e| e.within(op))?;
    let i2 =
        gauss_kronrod_panels(&mut f, &decades(r0.ln(), r0.ln() + 20.0, 20), ENVELOPE_TOL).map_err(|e| e.within(op))?;
    match failure {
        Some(e) => Err(e),
        None => Ok((i1.value, i2.value)),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioPoint {
    pub t: f64,
    pub z: f64,
    pub regime: Regime,
    pub q: f64,
    pub lower: f64,
    pub upper: f64,
    /// `q/√(lower·upper)`.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeSummary {
    pub regime: Regime,
    pub count: usize,
    pub min: f64,
    pub max: f64,
    pub geo_mean: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

/// Least-squares line through `(x, y)`.
pub fn fit_line(x: &[f64], y: &[f64]) -> Result<LineFit> {
    let n = x.len();
    if n < 2 || n != y.len() {
        return Err(Error::domain("fit_line", format!("need at least two points, got {n}")));
    }
    let nf = n as f64;
    let (mx, my) = (x.iter().sum::<f64>() / nf, y.iter().sum::<f64>() / nf);
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::domain("fit_line", "x values coincide"));
    }
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(LineFit {
        slope,
        intercept: my - slope * mx,
        r2,
    })
}

/// A fitted exponent and, when the envelope predicts one, its value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub label: String,
    pub fit: LineFit,
    pub predicted: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioReport {
    pub envelope: EnvelopeSpec,
    pub points: Vec<RatioPoint>,
    pub regimes: Vec<RegimeSummary>,
    pub fits: Vec<SlopeFit>,
}

impl RatioReport {
    pub fn summary(&self, regime: Regime) -> Option<&RegimeSummary> {
        self.regimes.iter().find(|s| s.regime == regime)
    }

    /// `max/min` of the ratio over all points.
    pub fn band_width(&self) -> f64 {
        let (lo, hi) = self.points.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), p| {
            (lo.min(p.ratio), hi.max(p.ratio))
        });
        hi / lo
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let io = |e: std::io::Error| Error::Config(e.to_string());
        writeln!(out, "t,z,regime,q,lower,upper,ratio").map_err(io)?;
        for p in &self.points {
            let regime = match p.regime {
                Regime::Near => "near",
                Regime::Far => "far",
            };
            writeln!(
                out,
                "{:.16e},{:.16e},{regime},{:.16e},{:.16e},{:.16e},{:.16e}",
                p.t, p.z, p.q, p.lower, p.upper, p.ratio
            )
            .map_err(io)?;
        }
        Ok(())
    }

    /// Plain-text table of the regime summaries and fits.
    pub fn render(&self) -> String {
        let mut s = format!(
            "{:<8}{:>8}{:>14}{:>14}{:>14}\n",
            "regime", "points", "min", "max", "geo-mean"
        );
        for r in &self.regimes {
            s += &format!(
                "{:<8}{:>8}{:>14.6e}{:>14.6e}{:>14.6e}\n",
                format!("{:?}", r.regime).to_lowercase(),
                r.count,
                r.min,
                r.max,
                r.geo_mean
            );
        }
        for f in &self.fits {
            let pred = f.predicted.map_or("-".to_string(), |p| format!("{p:.4}"));
            s += &format!(
                "{}: slope {:.4} (predicted {pred}), R² {:.5}\n",
                f.label, f.fit.slope, f.fit.r2
            );
        }
        s
    }
}

/// Ratios of `compute(t, z)` to the envelope over the grid, summarized per
/// regime. For stable families the report also fits the near-diagonal
/// t-exponent of `q(t,0)` (when `z = 0` is on the grid) and, per t, the far
/// z-exponent (jump) or the slope of `−ln q` against `(z^α/t^β)^{1/(α−β)}` on
/// `[2, 8] t^{β/α}` (diffusion).
pub fn ratio_sweep(
    compute: impl Fn(f64, f64) -> Result<f64> + Sync,
    envelope: &EnvelopeSpec,
    times: &[f64],
    points: &[f64],
) -> Result<RatioReport> {
    let op = "ratio_sweep";
    if times.is_empty() || points.is_empty() {
        return Err(Error::domain(op, "grids must be nonempty"));
    }
    let cells: Vec<(f64, f64)> = times
        .iter()
        .flat_map(|&t| points.iter().map(move |&z| (t, z)))
        .collect();
    let rows = cells
        .par_iter()
        .map(|&(t, z)| {
            let q = compute(t, z)?;
            let (lower, upper) = envelope.eval(t, z)?;
            Ok(RatioPoint {
                t,
                z,
                regime: envelope.regime(t, z)?,
                q,
                lower,
                upper,
                ratio: q / (lower * upper).sqrt(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut regimes = vec![];
    for regime in [Regime::Near, Regime::Far] {
        let r: Vec<f64> = rows.iter().filter(|p| p.regime == regime).map(|p| p.ratio).collect();
        if r.is_empty() {
            continue;
        }
        regimes.push(RegimeSummary {
            regime,
            count: r.len(),
            min: r.iter().copied().fold(f64::INFINITY, f64::min),
            max: r.iter().copied().fold(0.0, f64::max),
            geo_mean: (r.iter().map(|v| v.ln()).sum::<f64>() / r.len() as f64).exp(),
        });
    }
    let mut fits = vec![];
    if let Some((d, alpha, beta)) = envelope.stable_params() {
        let diag: Vec<&RatioPoint> = rows.iter().filter(|p| p.z == 0.0 && p.q > 0.0).collect();
        if diag.len() >= 2 {
            let x: Vec<f64> = diag.iter().map(|p| p.t.ln()).collect();
            let y: Vec<f64> = diag.iter().map(|p| p.q.ln()).collect();
            fits.push(SlopeFit {
                label: "near-diagonal t-exponent".into(),
                fit: fit_line(&x, &y)?,
                predicted: (d < 2.0 * alpha).then(|| beta - 1.0 - beta * d / alpha),
            });
        }
        for &t in times {
            let rho = diagonal_radius(alpha, beta, t);
            let jump = matches!(envelope.family, EnvelopeFamily::StableJump { .. });
            let far: Vec<&RatioPoint> = rows
                .iter()
                .filter(|p| p.t == t && p.q > 0.0)
                .filter(|p| {
                    if jump {
                        p.z >= 10.0 * rho
                    } else {
                        p.z >= 2.0 * rho && p.z <= 8.0 * rho
                    }
                })
                .collect();
            if far.len() < 3 {
                continue;
            }
            let fit = if jump {
                let x: Vec<f64> = far.iter().map(|p| p.z.ln()).collect();
                let y: Vec<f64> = far.iter().map(|p| p.q.ln()).collect();
                SlopeFit {
                    label: format!("far z-exponent at t = {t}"),
                    fit: fit_line(&x, &y)?,
                    predicted: Some(-(d + alpha)),
                }
            } else {
                let x: Vec<f64> = far.iter().map(|p| stable_n(alpha, beta, 1.0, t, p.z)).collect();
                let y: Vec<f64> = far.iter().map(|p| -p.q.ln()).collect();
                SlopeFit {
                    label: format!("far -ln q vs n at t = {t}"),
                    fit: fit_line(&x, &y)?,
                    predicted: None,
                }
            };
            fits.push(fit);
        }
    }
    Ok(RatioReport {
        envelope: envelope.clone(),
        points: rows,
        regimes,
        fits,
    })
}
