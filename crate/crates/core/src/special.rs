//! Closed forms and series used as independent oracles: one-sided stable
//! densities, inverse-stable densities and Mittag-Leffler functions.
//!
//! The standard one-sided β-stable law here is the one with Laplace
//! transform `E[e^{-λX}] = e^{-λ^β}`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{gauss_kronrod_panels, half_line, Tolerance};

/// Γ(x).
pub fn gamma(x: f64) -> f64 {
    libm::tgamma(x)
}

pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// 1/Γ(x), zero at the poles x = 0, -1, -2, …
pub fn recip_gamma(x: f64) -> f64 {
    if x <= 0.0 && x == x.round() {
        0.0
    } else {
        1.0 / gamma(x)
    }
}

pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}

/// Evaluation route for the one-sided stable density.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StableMethod {
    /// Convergent series in `x^{-β}`; used for `x ≥ 2`.
    SeriesLargeArg,
    /// Zolotarev/Kanter integral over `θ ∈ (0, π)`.
    ZolotarevIntegral,
    /// Lévy closed form, only for β = 1/2.
    ClosedFormHalf,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StableDensityParams {
    pub beta: f64,
    pub method: StableMethod,
}

impl StableDensityParams {
    pub fn new(beta: f64, method: StableMethod) -> Result<Self> {
        check_beta("stable_density_g", beta)?;
        if method == StableMethod::ClosedFormHalf && beta != 0.5 {
            return Err(Error::domain(
                "stable_density_g",
                format!("closed form requires beta = 1/2, got {beta}"),
            ));
        }
        Ok(StableDensityParams { beta, method })
    }

    pub fn density(&self, x: f64) -> Result<f64> {
        if !(x > 0.0) {
            return Err(Error::domain("stable_density_g", format!("x = {x} must be positive")));
        }
        match self.method {
            StableMethod::SeriesLargeArg => stable_density_series(self.beta, x),
            StableMethod::ZolotarevIntegral => stable_density_zolotarev(self.beta, x),
            StableMethod::ClosedFormHalf => Ok(levy_half_density(x)),
        }
    }
}

/// Argument threshold above which the series replaces the integral.
pub const SERIES_THRESHOLD: f64 = 2.0;

const STABLE_TOL: Tolerance = Tolerance::new(0.0, 1e-13);

fn check_beta(op: &'static str, beta: f64) -> Result<()> {
    if beta > 0.0 && beta < 1.0 {
        Ok(())
    } else {
        Err(Error::domain(op, format!("beta = {beta} must lie in (0, 1)")))
    }
}

/// Density of the standard one-sided β-stable law at `x > 0`.
pub fn stable_density_g(beta: f64, x: f64) -> Result<f64> {
    check_beta("stable_density_g", beta)?;
    if !(x > 0.0) {
        return Err(Error::domain("stable_density_g", format!("x = {x} must be positive")));
    }
    Ok(stable_xg(beta, x.ln())? / x)
}

/// `x·g_β(x)` as a function of `ln x`, finite for arguments beyond the f64
/// range (as arise for the inverse density near r = 0).
pub fn stable_xg(beta: f64, lx: f64) -> Result<f64> {
    check_beta("stable_density_g", beta)?;
    if lx >= SERIES_THRESHOLD.ln() {
        stable_xg_series(beta, lx)
    } else {
        stable_xg_zolotarev(beta, lx)
    }
}

/// `x^{-3/2} e^{-1/(4x)} / (2√π)`.
pub fn levy_half_density(x: f64) -> f64 {
    x.powf(-1.5) * (-0.25 / x).exp() / (2.0 * PI.sqrt())
}

/// ln of Kanter's function
/// `A(θ) = (sin βθ / sin θ)^{1/(1-β)} · sin((1-β)θ) / sin βθ`,
/// increasing from `(1-β) β^{β/(1-β)}` at 0 to ∞ at π.
pub fn ln_kanter(beta: f64, theta: f64) -> f64 {
    if theta < 1e-8 {
        return (beta.ln() * beta / (1.0 - beta)) + (1.0 - beta).ln();
    }
    let sb = (beta * theta).sin();
    // sin θ evaluated from the nearer endpoint
    let s = if theta > 0.5 * PI {
        (PI - theta).sin()
    } else {
        theta.sin()
    };
    let s1 = ((1.0 - beta) * theta).sin();
    (sb.ln() - s.ln()) / (1.0 - beta) + s1.ln() - sb.ln()
}

// θ in (0, π) where ln A(θ) = level, by bisection (A is increasing).
fn kanter_level(beta: f64, level: f64) -> f64 {
    let (mut lo, mut hi) = (0.0, PI);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if ln_kanter(beta, mid) < level {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

// Breakpoints in θ at which u = A(θ)·x^{-a} crosses levels around the peak
// of u e^{-u}, so the adaptive rule never misses a narrow bump.
fn zolotarev_breaks(beta: f64, ln_scale: f64) -> Vec<f64> {
    let u0 = (ln_kanter(beta, 0.0) + ln_scale).exp();
    let mut levels: Vec<f64> = vec![1e-6, 1e-3, 1e-1, 1.0, 4.0, 16.0, 64.0];
    for d in [0.25, 1.0, 4.0, 16.0, 64.0] {
        levels.push(u0 + d);
    }
    let mut pts: Vec<f64> = levels
        .into_iter()
        .filter(|l| *l > u0)
        .map(|l| kanter_level(beta, l.ln() - ln_scale))
        .filter(|t| *t > 0.0 && *t < PI)
        .collect();
    pts.push(0.0);
    pts.push(PI);
    pts.sort_by(f64::total_cmp);
    pts.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
    pts
}

/// Zolotarev/Kanter representation
/// `g(x) = a/(π x) ∫₀^π u e^{-u} dθ`, `u = A(θ) x^{-a}`, `a = β/(1-β)`,
/// integrated with the factor `e^{-u(0)}` pulled out so deep left-tail
/// values keep full relative precision.
pub fn stable_density_zolotarev(beta: f64, x: f64) -> Result<f64> {
    check_beta("stable_density_g", beta)?;
    Ok(stable_xg_zolotarev(beta, x.ln())? / x)
}

fn stable_xg_zolotarev(beta: f64, lx: f64) -> Result<f64> {
    let a = beta / (1.0 - beta);
    let ln_scale = -a * lx;
    let u0 = (ln_kanter(beta, 0.0) + ln_scale).exp();
    if u0 > 800.0 {
        return Ok(0.0);
    }
    let breaks = zolotarev_breaks(beta, ln_scale);
    let integrand = |theta: f64| {
        let u = (ln_kanter(beta, theta) + ln_scale).exp();
        let d = u - u0;
        if d > 745.0 {
            0.0
        } else {
            u * (-d).exp()
        }
    };
    let est = gauss_kronrod_panels(integrand, &breaks, STABLE_TOL).map_err(|e| e.within("stable_density_g"))?;
    if est.error > 1e-10 * est.value.abs() {
        return Err(Error::Accuracy {
            op: "stable_density_g",
            achieved: est.error,
            target: 1e-10 * est.value.abs(),
        });
    }
    Ok(a / PI * (-u0).exp() * est.value)
}

/// `g(x) = (1/π) Σ_{k≥1} (-1)^{k+1} Γ(βk+1)/k! · sin(πβk) · x^{-βk-1}`.
pub fn stable_density_series(beta: f64, x: f64) -> Result<f64> {
    check_beta("stable_density_g", beta)?;
    Ok(stable_xg_series(beta, x.ln())? / x)
}

// Γ(p)/Γ(q) · e^{-c}, directly where that is representable.
fn gamma_ratio_exp(p: f64, q: f64, c: f64) -> f64 {
    if p < 170.0 && q < 170.0 && c.abs() < 700.0 {
        gamma(p) / gamma(q) * (-c).exp()
    } else {
        (ln_gamma(p) - ln_gamma(q) - c).exp()
    }
}

fn stable_xg_series(beta: f64, lx: f64) -> Result<f64> {
    let mut sum = 0.0;
    let mut max_term: f64 = 0.0;
    for k in 1..10_000u32 {
        let kf = k as f64;
        let mag = gamma_ratio_exp(beta * kf + 1.0, kf + 1.0, beta * kf * lx);
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        sum += sign * mag * (PI * beta * kf).sin();
        max_term = max_term.max(mag);
        if mag == 0.0 || (mag < 1e-17 * sum.abs() && k > 3) {
            let loss = 4.0 * max_term * f64::EPSILON;
            if loss > 1e-12 * sum.abs() {
                return Err(Error::Accuracy {
                    op: "stable_density_g",
                    achieved: loss,
                    target: 1e-12 * sum.abs(),
                });
            }
            return Ok(sum / PI);
        }
    }
    Err(Error::Accuracy {
        op: "stable_density_g",
        achieved: max_term,
        target: 1e-17 * sum.abs(),
    })
}

/// CDF and survival function of the standard one-sided β-stable law,
/// `P(X ≤ x) = (1/π) ∫₀^π e^{-u} dθ`, `P(X > x) = (1/π) ∫₀^π (1 - e^{-u}) dθ`.
/// Both are integrated directly so neither tail suffers cancellation.
pub fn stable_cdf(beta: f64, x: f64) -> Result<(f64, f64)> {
    check_beta("stable_cdf", beta)?;
    if !(x > 0.0) {
        return Ok((0.0, 1.0));
    }
    let a = beta / (1.0 - beta);
    let ln_scale = -a * x.ln();
    let breaks = zolotarev_breaks(beta, ln_scale);
    let tol = Tolerance::new(1e-300, 1e-13);
    // e^{-u(0)} pulled out so the far left tail keeps relative precision
    let u0 = (ln_kanter(beta, 0.0) + ln_scale).exp();
    let cdf = if u0 > 800.0 {
        0.0
    } else {
        let body = gauss_kronrod_panels(
            |t| (-((ln_kanter(beta, t) + ln_scale).exp() - u0).min(800.0)).exp(),
            &breaks,
            tol,
        )
        .map_err(|e| e.within("stable_cdf"))?
        .value;
        (-u0).exp() * body
    };
    let sf = gauss_kronrod_panels(|t| -(-(ln_kanter(beta, t) + ln_scale).exp()).exp_m1(), &breaks, tol)
        .map_err(|e| e.within("stable_cdf"))?
        .value;
    Ok((cdf / PI, sf / PI))
}

/// Density at `r` of the inverse β-stable subordinator `E_t`:
/// `h_t(r) = (t/β) r^{-1-1/β} g_β(t r^{-1/β})`.
pub fn inverse_stable_density(beta: f64, t: f64, r: f64) -> Result<f64> {
    check_beta("inverse_stable_density", beta)?;
    if !(t > 0.0 && r > 0.0) {
        return Err(Error::domain(
            "inverse_stable_density",
            format!("t = {t}, r = {r} must be positive"),
        ));
    }
    let lx = t.ln() - r.ln() / beta;
    Ok(stable_xg(beta, lx)? / (beta * r))
}

/// Argument bound for the Taylor series on the negative axis.
pub const ML_SERIES_RADIUS: f64 = 5.0;
const ML_MAX_TERMS: usize = 10_000;

/// Two-parameter Mittag-Leffler function `E_{β,γ}(z) = Σ z^k / Γ(βk+γ)` for
/// real `z`, `β ∈ (0, 1]`, `γ > 0`.
///
/// Taylor series for `|z| ≤ 5` (and all `z > 0`); on the negative axis beyond
/// that, or whenever the alternating series would lose more than ~2 digits to
/// cancellation, the Laplace-type integral representation
/// `E_{β,γ}(-x) = τ^{-γ} ∫₀^∞ e^{-s} K(s/τ) ds`, `τ = x^{1/β}`, with
/// `K(r) = r^{β-γ}(r^β sin πγ + sin π(γ-β)) / (π (r^{2β} + 2 r^β cos πβ + 1))`.
pub fn mittag_leffler(beta: f64, gamma_: f64, z: f64) -> Result<f64> {
    if !(beta > 0.0 && beta <= 1.0) || !(gamma_ > 0.0) {
        return Err(Error::domain(
            "mittag_leffler",
            format!("beta = {beta} must lie in (0, 1], gamma = {gamma_} must be positive"),
        ));
    }
    if beta == 1.0 && gamma_ == 1.0 {
        return Ok(z.exp());
    }
    if z == 0.0 {
        return Ok(recip_gamma(gamma_));
    }
    if z > 0.0 {
        return ml_series(beta, gamma_, z).map(|(v, _)| v);
    }
    if -z <= ML_SERIES_RADIUS {
        let (v, max_term) = ml_series(beta, gamma_, z)?;
        if max_term * f64::EPSILON <= 1e-14 * v.abs() || beta == 1.0 {
            return Ok(v);
        }
    }
    if beta == 1.0 {
        // E_{1,γ} on the far negative axis via the incomplete-gamma recurrence
        // is not needed by this crate; the series is exact in exact arithmetic.
        let (v, max_term) = ml_series(beta, gamma_, z)?;
        if max_term * f64::EPSILON > 1e-8 * v.abs() {
            return Err(Error::Accuracy {
                op: "mittag_leffler",
                achieved: max_term * f64::EPSILON,
                target: 1e-8 * v.abs(),
            });
        }
        return Ok(v);
    }
    ml_negative_integral(beta, gamma_, -z)
}

// Returns (sum, largest term magnitude).
fn ml_series(beta: f64, gamma_: f64, z: f64) -> Result<(f64, f64)> {
    let lz = z.abs().ln();
    let neg = z < 0.0;
    let mut sum = 0.0;
    let mut max_term: f64 = 0.0;
    let mut past_peak = false;
    let mut prev_mag = f64::INFINITY;
    for k in 0..ML_MAX_TERMS {
        let kf = k as f64;
        let arg = beta * kf + gamma_;
        let pow = z.abs().powi(k as i32);
        let mag = if arg < 170.0 && pow.is_finite() && pow > 0.0 {
            pow / gamma(arg)
        } else {
            (kf * lz - ln_gamma(arg)).exp()
        };
        let term = if neg && k % 2 == 1 { -mag } else { mag };
        sum += term;
        max_term = max_term.max(mag);
        if mag < prev_mag && k > 2 {
            past_peak = true;
        }
        prev_mag = mag;
        if past_peak && mag <= 1e-17 * sum.abs().max(f64::MIN_POSITIVE) {
            return Ok((sum, max_term));
        }
    }
    Err(Error::Accuracy {
        op: "mittag_leffler",
        achieved: prev_mag,
        target: 1e-17 * sum.abs(),
    })
}

fn ml_negative_integral(beta: f64, gamma_: f64, x: f64) -> Result<f64> {
    if gamma_ >= 1.0 + beta {
        // E_{β,γ}(z) = (E_{β,γ-β}(z) - 1/Γ(γ-β)) / z lowers γ into range.
        let lower = ml_negative_integral(beta, gamma_ - beta, x)?;
        return Ok((lower - recip_gamma(gamma_ - beta)) / (-x));
    }
    let tau = x.powf(1.0 / beta);
    let (sg, sgb, cb) = ((PI * gamma_).sin(), (PI * (gamma_ - beta)).sin(), (PI * beta).cos());
    let kernel = |r: f64| {
        let rb = r.powf(beta);
        r.powf(beta - gamma_) * (rb * sg + sgb) / (PI * (rb * rb + 2.0 * rb * cb + 1.0))
    };
    let integrand = |s: f64| (-s).exp() * kernel(s / tau);
    let mut breaks = vec![tau.min(1.0), 1.0, tau, 4.0 * tau, 40.0];
    breaks.retain(|b| *b > 0.0 && *b < 700.0);
    let est = half_line(integrand, &breaks, Tolerance::new(1e-300, 1e-12)).map_err(|e| e.within("mittag_leffler"))?;
    Ok(tau.powf(-gamma_) * est.value)
}
