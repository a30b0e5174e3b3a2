//! Transition density p̄(r,t) of a driftless subordinator, its potential
//! density G, the inverse-subordinator density and survival probabilities.

use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bernstein::BernsteinSpec;
use crate::error::{Error, Result};
use crate::quad::{gauss_kronrod_panels, tanh_sinh_ends, Estimate, Tolerance};
use crate::special::{gamma, stable_cdf, stable_xg};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DensityMethod {
    /// `p̄(r,t) = (cr)^{-1/β} g_β(t (cr)^{-1/β})` for `φ = c λ^β`.
    StableScaling,
    /// Numerical inversion of `λ ↦ e^{-rφ(λ)}` on a parabolic contour.
    ContourInversion,
}

/// Parabolic contour `z(θ) = σ(1 − 0.9122θ² + 1.9099iθ)/t` with
/// `σ = max(scale·0.1309·N, crossing)` and the midpoint rule in θ ∈ (−π, π).
/// The node count starts at `nodes` and is doubled until two successive
/// results agree.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContourParams {
    pub nodes: usize,
    pub max_nodes: usize,
    pub scale: f64,
}

impl Default for ContourParams {
    fn default() -> Self {
        ContourParams {
            nodes: 32,
            max_nodes: 512,
            scale: 1.0,
        }
    }
}

/// Inverse Laplace transform at `t > 0` of `F = exp(ln_f)`. `ln_f` must be
/// analytic off the negative real axis with `ln_f(z̄) = conj ln_f(z)`.
///
/// `crossing` is a lower bound for the point `σ/t` where the contour meets
/// the real axis; placing it at the saddle of `e^{zt}F(z)` keeps relative
/// accuracy for values deep in a tail.
pub fn contour_inversion<F>(ln_f: F, t: f64, crossing: f64, params: ContourParams, tol: Tolerance) -> Result<Estimate>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    let op = "contour_inversion";
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::domain(op, format!("t = {t} must be positive")));
    }
    if params.nodes < 16 {
        return Err(Error::Config(format!(
            "contour needs at least 16 nodes, got {}",
            params.nodes
        )));
    }
    let once = |n: usize| -> Result<(f64, f64)> {
        let nf = n as f64;
        let h = 2.0 * std::f64::consts::PI / nf;
        let sigma = (params.scale * 0.1309 * nf).max(crossing * t);
        let (a, b) = (0.1194 / 0.1309, 0.25 / 0.1309);
        let mut sum = 0.0;
        let mut mag = 0.0;
        for k in 0..n / 2 {
            let theta = (k as f64 + 0.5) * h;
            let z = sigma * Complex64::new(1.0 - a * theta * theta, b * theta);
            let dz = sigma * Complex64::new(-2.0 * a * theta, b);
            let term = (z + ln_f(z / t)?).exp() * dz;
            if !term.im.is_finite() {
                return Err(Error::Accuracy {
                    op,
                    achieved: f64::INFINITY,
                    target: tol.rel,
                });
            }
            sum += term.im;
            mag += term.norm();
        }
        let norm = 1.0 / (std::f64::consts::PI * t) * h;
        Ok((sum * norm, mag * norm * 64.0 * f64::EPSILON))
    };
    let mut n = params.nodes;
    let (mut prev, _) = once(n)?;
    loop {
        n *= 2;
        let (cur, roundoff) = once(n)?;
        let diff = (cur - prev).abs();
        if diff <= tol.target(cur) || diff <= roundoff {
            return Ok(Estimate::new(cur, diff.max(roundoff)));
        }
        if n >= params.max_nodes {
            return Err(Error::Accuracy {
                op,
                achieved: diff,
                target: tol.target(cur),
            });
        }
        prev = cur;
    }
}

// 1 − e^{−w} without cancellation for small |w|.
fn one_minus_exp_neg(w: Complex64) -> Complex64 {
    if w.norm() < 1e-2 {
        let mut term = w;
        let mut sum = w;
        for k in 2..12 {
            term *= -w / k as f64;
            sum += term;
        }
        sum
    } else {
        Complex64::new(1.0, 0.0) - (-w).exp()
    }
}

/// Evaluator for the transition density of the subordinator with exponent `spec`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityEval {
    pub spec: BernsteinSpec,
    pub method: DensityMethod,
    pub contour: ContourParams,
    /// Relative tolerance for quadratures and inversions.
    pub tol: f64,
}

impl DensityEval {
    pub fn new(spec: BernsteinSpec, method: DensityMethod) -> Result<Self> {
        if method == DensityMethod::StableScaling && spec.stable_beta().is_none() {
            return Err(Error::unsupported(
                "density",
                format!("stable scaling with exponent {spec}"),
            ));
        }
        Ok(DensityEval {
            spec,
            method,
            contour: ContourParams::default(),
            tol: 1e-10,
        })
    }

    /// Stable scaling when available, otherwise contour inversion.
    pub fn auto(spec: BernsteinSpec) -> Self {
        let method = if spec.stable_beta().is_some() {
            DensityMethod::StableScaling
        } else {
            DensityMethod::ContourInversion
        };
        DensityEval {
            spec,
            method,
            contour: ContourParams::default(),
            tol: 1e-10,
        }
    }

    pub fn with_contour(mut self, contour: ContourParams) -> Result<Self> {
        if contour.nodes < 16 {
            return Err(Error::Config(format!(
                "contour needs at least 16 nodes, got {}",
                contour.nodes
            )));
        }
        self.contour = contour;
        Ok(self)
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    // Real saddle point of λ ↦ λt − rφ(λ). `None` when it lies beyond the
    // bracket range and the Chernoff bound e^{λt − rφ(λ)} at the bracket edge
    // already underflows.
    fn saddle(&self, r: f64, t: f64) -> Result<Option<f64>> {
        match self.spec.phi_prime_inverse(t / r) {
            Ok(s) => Ok(Some(s)),
            Err(_) if t >= r => Ok(Some(0.0)),
            Err(e) => {
                // extend the bracket in ln λ past the doubling limit
                let y = t / r;
                let mut lo = crate::bernstein::MAX_DOUBLINGS as f64 * std::f64::consts::LN_2;
                let mut hi: f64 = 700.0;
                if self.spec.phi_prime(hi.exp())? > y {
                    let edge = hi.exp();
                    return if edge * t - r * self.spec.phi(edge)? < -745.0 {
                        Ok(None)
                    } else {
                        Err(e)
                    };
                }
                if self.spec.phi_prime(lo.exp())? <= y {
                    return Err(e);
                }
                while hi - lo > 1e-13 * hi {
                    let mid = 0.5 * (lo + hi);
                    if self.spec.phi_prime(mid.exp())? > y {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                Ok(Some((0.5 * (lo + hi)).exp()))
            }
        }
    }

    // Absolute accuracy floor for p̄(r,·), whose maximum is of order φ^{-1}(1/r).
    fn density_tol(&self, r: f64) -> Tolerance {
        Tolerance::new(1e-14 * self.spec.phi_inverse(1.0 / r).unwrap_or(0.0), self.tol)
    }

    /// `(β, c)` for `φ = cλ^β` when the scaling method is active.
    pub fn stable_params(&self) -> Option<(f64, f64)> {
        match self.method {
            DensityMethod::StableScaling => self.spec.stable_beta().map(|b| (b, self.spec.scale)),
            DensityMethod::ContourInversion => None,
        }
    }

    fn positive(op: &'static str, name: &str, v: f64) -> Result<()> {
        if v > 0.0 && v.is_finite() {
            Ok(())
        } else {
            Err(Error::domain(op, format!("{name} = {v} must be positive")))
        }
    }

    /// p̄(r,t), the density of `S_r` at `t`.
    pub fn density(&self, r: f64, t: f64) -> Result<f64> {
        self.density_estimate(r, t).map(|e| e.value)
    }

    pub fn density_estimate(&self, r: f64, t: f64) -> Result<Estimate> {
        Self::positive("density", "r", r)?;
        Self::positive("density", "t", t)?;
        if let Some((beta, c)) = self.stable_params() {
            let lx = t.ln() - (c * r).ln() / beta;
            let v = stable_xg(beta, lx)? / t;
            return Ok(Estimate::new(v, 1e-12 * v));
        }
        let Some(saddle) = self.saddle(r, t)? else {
            return Ok(Estimate::new(0.0, 0.0));
        };
        let est = contour_inversion(
            |z| Ok(-r * self.spec.phi_complex(z)?),
            t,
            saddle,
            self.contour,
            self.density_tol(r),
        )
        .map_err(|e| e.within("density"))?;
        clamp("density", est)
    }

    /// Potential density `G(t) = ∫₀^∞ p̄(r,t) dr`.
    pub fn potential_density(&self, t: f64) -> Result<f64> {
        Self::positive("potential_density", "t", t)?;
        if let Some(beta) = self.spec.stable_beta() {
            return Ok(t.powf(beta - 1.0) / (gamma(beta) * self.spec.scale));
        }
        let tol = Tolerance::new(1e-14 / (t * self.spec.phi(1.0 / t)?), self.tol);
        let est = contour_inversion(|z| Ok(-self.spec.phi_complex(z)?.ln()), t, 0.0, self.contour, tol)
            .map_err(|e| e.within("potential_density"))?;
        clamp("potential_density", est).map(|e| e.value)
    }

    /// `∫₀^t w(s) G(t−s) ds`, identically 1.
    pub fn w_conv_g(&self, t: f64) -> Result<f64> {
        Self::positive("w_conv_G", "t", t)?;
        let mut failure = None;
        let est = tanh_sinh_ends(
            |_, s, rest| {
                let v = self
                    .spec
                    .levy_tail_w(s)
                    .and_then(|w| Ok(w * self.potential_density(rest)?));
                match v {
                    Ok(v) => v,
                    Err(e) => {
                        failure.get_or_insert(e);
                        0.0
                    }
                }
            },
            0.0,
            t,
            Tolerance::new(1e-300, 1e-9),
        )
        .map_err(|e| e.within("w_conv_G"))?;
        match failure {
            Some(e) => Err(e),
            None => Ok(est.value),
        }
    }

    /// Density of the inverse subordinator `E_t` at `r`, `∫₀^t w(t−s) p̄(r,s) ds`.
    ///
    /// On `s ≤ t/2` the integral runs in `ln s`; on `s ≥ t/2` the substitution
    /// `t − s = (t/2) u^{1/(1−b)}` removes the singularity of w (b the largest
    /// stable index of the exponent).
    pub fn inverse_density(&self, t: f64, r: f64) -> Result<f64> {
        Self::positive("inverse_density", "t", t)?;
        Self::positive("inverse_density", "r", r)?;
        let b = self.max_index()?;
        let q = 1.0 / (1.0 - b);
        let half = 0.5 * t;
        // p̄(r,·) has its bulk near 1/φ^{-1}(1/r)
        let bulk = self.spec.phi_inverse(1.0 / r).map(|v| 1.0 / v).unwrap_or(f64::INFINITY);
        let rel: f64 = if self.stable_params().is_some() { 1e-10 } else { 1e-7 };
        // h_t(0+) = w(t) sets the absolute scale
        let tol = Tolerance::new(1e-2 * rel * self.spec.levy_tail_w(t)?, rel.max(self.tol));
        let mut failure = None;
        let mut record = |v: Result<f64>| match v {
            Ok(x) => x,
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        };

        let mut total = 0.0;
        let y_hi = half.ln();
        let y_lo = (bulk * 1e-10).ln().max(y_hi - 700.0);
        if y_lo < y_hi {
            let mut breaks = vec![y_lo, y_hi];
            for m in [1e-3, 0.1, 1.0, 10.0, 1e3] {
                let y = (bulk * m).ln();
                if y > y_lo && y < y_hi {
                    breaks.push(y);
                }
            }
            breaks.sort_by(f64::total_cmp);
            let est = gauss_kronrod_panels(
                |y| {
                    let s = y.exp();
                    record(
                        self.spec
                            .levy_tail_w(t - s)
                            .and_then(|w| Ok(w * s * self.density(r, s)?)),
                    )
                },
                &breaks,
                tol,
            )
            .map_err(|e| e.within("inverse_density"))?;
            total += est.value;
        }

        let mut breaks = vec![0.0, 1.0];
        for m in [0.1, 0.3, 1.0, 3.0, 10.0] {
            let s = bulk * m;
            if s > half && s < t {
                breaks.push(((t - s) / half).powf(1.0 - b));
            }
        }
        breaks.sort_by(f64::total_cmp);
        let est = gauss_kronrod_panels(
            |u| {
                if u <= 0.0 {
                    return 0.0;
                }
                let v = half * u.powf(q);
                let jac = half * q * u.powf(q - 1.0);
                record(
                    self.spec
                        .levy_tail_w(v)
                        .and_then(|w| Ok(w * jac * self.density(r, t - v)?)),
                )
            },
            &breaks,
            tol,
        )
        .map_err(|e| e.within("inverse_density"))?;
        total += est.value;
        match failure {
            Some(e) => Err(e),
            None => Ok(total),
        }
    }

    fn max_index(&self) -> Result<f64> {
        use crate::bernstein::BernsteinKind;
        match &self.spec.kind {
            BernsteinKind::Stable(b) => Ok(*b),
            BernsteinKind::StableMixture(c) => Ok(c.iter().map(|p| p.1).fold(0.0, f64::max)),
            BernsteinKind::Tabulated(_) => Err(Error::unsupported("inverse_density", "tabulated exponents")),
        }
    }

    /// `(P(S_r ≤ t), P(S_r > t))`, each computed directly so neither tail
    /// loses relative accuracy.
    pub fn cdf_pair(&self, r: f64, t: f64) -> Result<(f64, f64)> {
        Self::positive("survival", "r", r)?;
        Self::positive("survival", "t", t)?;
        if let Some((beta, c)) = self.stable_params() {
            return stable_cdf(beta, t * (c * r).powf(-1.0 / beta)).map_err(|e| e.within("survival"));
        }
        let tol = Tolerance::new(1e-14, self.tol);
        if r * self.spec.phi(1.0 / t)? > 1.0 {
            // left tail: the distribution function is the small side
            let Some(saddle) = self.saddle(r, t)? else {
                return Ok((0.0, 1.0));
            };
            let cdf = contour_inversion(
                |z| Ok(-r * self.spec.phi_complex(z)? - z.ln()),
                t,
                saddle,
                self.contour,
                tol,
            )
            .map_err(|e| e.within("survival"))?;
            let cdf = clamp("survival", cdf)?.value.min(1.0);
            Ok((cdf, 1.0 - cdf))
        } else {
            let sf = contour_inversion(
                |z| Ok((one_minus_exp_neg(r * self.spec.phi_complex(z)?) / z).ln()),
                t,
                0.0,
                self.contour,
                tol,
            )
            .map_err(|e| e.within("survival"))?;
            let sf = clamp("survival", sf)?.value.min(1.0);
            Ok((1.0 - sf, sf))
        }
    }

    /// `P(S_r ≥ t)`.
    pub fn survival(&self, r: f64, t: f64) -> Result<f64> {
        self.cdf_pair(r, t).map(|p| p.1)
    }

    /// Comparison envelope: `rφ(1/t)/t` when `rφ(1/t) ≤ L`, otherwise
    /// `e^{−c t (φ')^{-1}(t/r)}/t`.
    pub fn envelope_density(&self, regime: &EnvelopeRegimeL, r: f64, t: f64) -> Result<f64> {
        Self::positive("envelope_density", "r", r)?;
        Self::positive("envelope_density", "t", t)?;
        let rho = r * self.spec.phi(1.0 / t)?;
        if rho <= regime.l {
            Ok(rho / t)
        } else {
            let s = self.spec.phi_prime_inverse(t / r)?;
            Ok((-regime.c * t * s).exp() / t)
        }
    }

    /// Mode `a_r` of `t ↦ p̄(r,t)`: golden-section search in ln t over
    /// `[10^{-3}, 10^3]/φ^{-1}(1/r)`, then bisection on the sign of a central
    /// difference to resolve the flat top.
    pub fn mode_estimate(&self, r: f64) -> Result<f64> {
        Self::positive("mode_estimate", "r", r)?;
        let centre = 1.0 / self.spec.phi_inverse(1.0 / r)?;
        let f = |lt: f64| self.density(r, lt.exp());
        let (mut a, mut b) = ((1e-3 * centre).ln(), (1e3 * centre).ln());
        let g = 0.5 * (5f64.sqrt() - 1.0);
        let mut x1 = b - g * (b - a);
        let mut x2 = a + g * (b - a);
        let (mut f1, mut f2) = (f(x1)?, f(x2)?);
        while b - a > 1e-4 {
            if f1 < f2 {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + g * (b - a);
                f2 = f(x2)?;
            } else {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - g * (b - a);
                f1 = f(x1)?;
            }
        }
        if a <= (1e-3 * centre).ln() + 1e-3 || b >= (1e3 * centre).ln() - 1e-3 {
            return Err(Error::range(
                "mode_estimate",
                format!("maximum at the bracket edge for r = {r}"),
            ));
        }
        // d/d(ln t) of p̄ changes sign from + to − across the mode
        let slope = |lt: f64| -> Result<f64> {
            let h = 1e-4;
            Ok(f(lt + h)? - f(lt - h)?)
        };
        let (mut lo, mut hi) = (a - 1e-4, b + 1e-4);
        if slope(lo)? <= 0.0 || slope(hi)? >= 0.0 {
            return Ok((0.5 * (a + b)).exp());
        }
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if slope(mid)? > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok((0.5 * (lo + hi)).exp())
    }

    /// Rows `r,t,density,envelope,ratio` over the grid, in grid order.
    pub fn envelope_sweep(&self, regime: &EnvelopeRegimeL, rs: &[f64], ts: &[f64]) -> Result<Vec<SweepRow>> {
        let points: Vec<(f64, f64)> = rs.iter().flat_map(|&r| ts.iter().map(move |&t| (r, t))).collect();
        points
            .par_iter()
            .map(|&(r, t)| {
                let density = self.density(r, t)?;
                let envelope = self.envelope_density(regime, r, t)?;
                Ok(SweepRow {
                    r,
                    t,
                    density,
                    envelope,
                    ratio: density / envelope,
                })
            })
            .collect()
    }
}

fn clamp(op: &'static str, est: Estimate) -> Result<Estimate> {
    if est.value >= 0.0 {
        Ok(est)
    } else if -est.value <= est.error {
        Ok(Estimate::new(0.0, est.error))
    } else {
        Err(Error::InversionFailure {
            op,
            value: est.value,
            estimate: est.error,
        })
    }
}

/// Regime threshold `L` on `rφ(1/t)` and the exponential constant used in
/// the large-`rφ(1/t)` envelope.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeRegimeL {
    pub l: f64,
    pub c: f64,
}

impl Default for EnvelopeRegimeL {
    fn default() -> Self {
        EnvelopeRegimeL { l: 1.0, c: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub r: f64,
    pub t: f64,
    pub density: f64,
    pub envelope: f64,
    pub ratio: f64,
}

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], out: W) -> std::result::Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["r", "t", "density", "envelope", "ratio"])?;
    for row in rows {
        w.write_record([row.r, row.t, row.density, row.envelope, row.ratio].map(|v| format!("{v:.16e}")))?;
    }
    w.flush()?;
    Ok(())
}

/// Empirical constants of the tail bounds
/// `P(S_r ≥ t(1+e·rφ(1/t))) ≤ c1·rφ(1/t)`,
/// `P(S_r ≥ t) ≥ 1 − e^{−c2·rφ(1/t)}` and
/// `P(S_r ≤ t) ≤ exp(−c3·rφ((φ')^{-1}(t/r)))` over a grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurvivalBounds {
    /// Smallest admissible c1 (the maximum observed ratio).
    pub c1: f64,
    /// Largest admissible c2 (the minimum observed ratio).
    pub c2: f64,
    /// Largest admissible c3.
    pub c3: f64,
}

impl SurvivalBounds {
    pub fn holds(&self) -> bool {
        self.c1.is_finite() && self.c2 > 0.0 && self.c3 > 0.0
    }
}

pub fn survival_bounds(eval: &DensityEval, rs: &[f64], ts: &[f64]) -> Result<SurvivalBounds> {
    let e = std::f64::consts::E;
    let mut b = SurvivalBounds {
        c1: 0.0,
        c2: f64::INFINITY,
        c3: f64::INFINITY,
    };
    for &r in rs {
        for &t in ts {
            let rho = r * eval.spec.phi(1.0 / t)?;
            let far = eval.survival(r, t * (1.0 + e * rho))?;
            b.c1 = b.c1.max(far / rho);
            let (cdf, _) = eval.cdf_pair(r, t)?;
            if cdf > 0.0 {
                b.c2 = b.c2.min(-cdf.ln() / rho);
                let m = r * eval.spec.phi(eval.spec.phi_prime_inverse(t / r)?)?;
                b.c3 = b.c3.min(-cdf.ln() / m);
            }
        }
    }
    Ok(b)
}
