//! Fundamental solutions q and p by subordination, their Fourier oracles,
//! the generalized Caputo derivative and the Duhamel solution u.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bernstein::{BernsteinKind, BernsteinSpec};
use crate::error::{Error, Result};
use crate::kernels::{HeatKernelSpec, KernelKind};
use crate::quad::{
    fourier_cosine, gauss_hermite, gauss_kronrod_panels, gauss_legendre, tanh_sinh_ends, Estimate, Tolerance,
};
use crate::special::{inverse_stable_density, mittag_leffler, recip_gamma, stable_xg};
use crate::subordinator::DensityEval;

const KERNEL_TOL: Tolerance = Tolerance { abs: 1e-300, rel: 1e-9 };

fn check_time_space(op: &'static str, t: f64, z: f64) -> Result<()> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::domain(op, format!("t = {t} must be positive")));
    }
    if !(z >= 0.0 && z.is_finite()) {
        return Err(Error::domain(op, format!("z = {z} must be nonnegative")));
    }
    Ok(())
}

fn check_concrete(op: &'static str, kspec: &HeatKernelSpec) -> Result<()> {
    if kspec.is_concrete() {
        Ok(())
    } else {
        Err(Error::unsupported(op, "envelope kernels have no exact values"))
    }
}

// ∫₀^∞ p⁰(r,z) m(r) dr in ln r, with panels around the bulk of m and the
// peak of p⁰(·,z) near Φ(z).
fn subordinate(
    op: &'static str,
    kspec: &HeatKernelSpec,
    z: f64,
    bulk: f64,
    extra: &[f64],
    weight: impl Fn(f64) -> Result<f64>,
) -> Result<Estimate> {
    let mut failure = None;
    let mut f = |y: f64| {
        let r = y.exp();
        match kspec
            .p0_radial(r, z)
            .and_then(|k| if k == 0.0 { Ok(0.0) } else { Ok(k * weight(r)? * r) })
        {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        }
    };
    let mut anchors = vec![bulk];
    let peak = kspec.scale.eval(z);
    if peak >= 1e-30 * bulk && peak.is_finite() {
        anchors.push(peak);
    }
    let hi = (1e3 * bulk).ln();
    let lo = anchors.iter().copied().fold(f64::INFINITY, f64::min).ln() - 60.0;
    let mut breaks = vec![lo, hi];
    for a in &anchors {
        for k in -3..=2 {
            let y = a.ln() + k as f64 * std::f64::consts::LN_10;
            if y > lo && y < hi {
                breaks.push(y);
            }
        }
    }
    breaks.extend(extra.iter().map(|r| r.ln()).filter(|y| *y > lo && *y < hi));
    breaks.sort_by(f64::total_cmp);
    let est = gauss_kronrod_panels(&mut f, &breaks, KERNEL_TOL).map_err(|e| e.within(op))?;
    let edge = f(lo);
    if let Some(e) = failure {
        return Err(e);
    }
    if edge.abs() > 1e-8 * est.value.abs() {
        return Err(Error::range(op, format!("integral diverges as r → 0 at z = {z}")));
    }
    Ok(est)
}

/// `q(t,z) = ∫₀^∞ p⁰(r,z) p̄(r,t) dr`.
pub fn q_kernel(kspec: &HeatKernelSpec, eval: &DensityEval, t: f64, z: f64) -> Result<Estimate> {
    let op = "q_kernel";
    check_time_space(op, t, z)?;
    check_concrete(op, kspec)?;
    let bulk = 1.0 / eval.spec.phi(1.0 / t)?;
    subordinate(op, kspec, z, bulk, &[], |r| eval.density(r, t))
}

/// Density `h_t(r)` of `E_t`; closed form for stable exponents.
pub fn inverse_density(eval: &DensityEval, t: f64, r: f64) -> Result<f64> {
    match eval.spec.stable_beta() {
        Some(b) => {
            let c = eval.spec.scale;
            Ok(c * inverse_stable_density(b, t, c * r)?)
        }
        None => eval.inverse_density(t, r),
    }
}

/// `p(t,z) = E[p⁰(E_t, z)] = ∫₀^∞ p⁰(r,z) h_t(r) dr`.
pub fn p_kernel(kspec: &HeatKernelSpec, eval: &DensityEval, t: f64, z: f64) -> Result<Estimate> {
    let op = "p_kernel";
    check_time_space(op, t, z)?;
    check_concrete(op, kspec)?;
    let bulk = 1.0 / eval.spec.phi(1.0 / t)?;
    subordinate(op, kspec, z, bulk, &[], |r| inverse_density(eval, t, r))
}

/// Which fundamental solution an oracle or field refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    Q,
    P,
    U,
}

/// Fourier–Mittag-Leffler oracle for q or p with `φ = cλ^β` and a kernel of
/// symbol `e^{−r|ξ|^α}`:
/// `q̂ = t^{β−1}E_{β,β}(−|ξ|^α t^β/c)/c`, `p̂ = E_β(−|ξ|^α t^β/c)`, and the
/// value is `(1/π)∫₀^∞ cos(ξz) q̂(ξ) dξ`.
///
/// At `z = 0` the integral is cut where the Mittag-Leffler argument reaches 50
/// and the rest is summed from the asymptotic expansion.
pub fn fourier_oracle(quantity: Quantity, alpha: f64, beta: f64, scale: f64, t: f64, z: f64) -> Result<Estimate> {
    let op = "fourier_oracle";
    check_time_space(op, t, z)?;
    if !(alpha > 0.0 && alpha <= 2.0 && beta > 0.0 && beta < 1.0 && scale > 0.0) {
        return Err(Error::domain(
            op,
            format!("alpha = {alpha}, beta = {beta}, scale = {scale}"),
        ));
    }
    let (gam, pre) = match quantity {
        Quantity::Q => (beta, t.powf(beta - 1.0) / scale),
        Quantity::P => (1.0, 1.0),
        Quantity::U => return Err(Error::unsupported(op, "no oracle for u")),
    };
    let kappa = t.powf(beta) / scale;
    let mut failure = None;
    let mut amp = |xi: f64| match mittag_leffler(beta, gam, -kappa * xi.powf(alpha)) {
        Ok(v) => pre * v,
        Err(e) => {
            failure.get_or_insert(e);
            0.0
        }
    };
    let tol = Tolerance::new(1e-300, 1e-10);
    let est = if z > 0.0 {
        fourier_cosine(&mut amp, z, tol)?
    } else {
        let cut = (50.0 / kappa).powf(1.0 / alpha);
        let mut breaks = vec![0.0];
        let mut b = cut * 1e-4;
        while b < cut {
            breaks.push(b);
            b *= 4.0;
        }
        breaks.push(cut);
        let head = gauss_kronrod_panels(&mut amp, &breaks, tol)?;
        let mut tail = 0.0;
        for k in 1..=12 {
            let kf = k as f64;
            let c = recip_gamma(gam - beta * kf);
            if c == 0.0 {
                continue;
            }
            if alpha * kf <= 1.0 {
                return Err(Error::range(op, "oracle integral diverges at z = 0"));
            }
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            tail += sign * c * kappa.powi(-k) * cut.powf(1.0 - alpha * kf) / (alpha * kf - 1.0);
        }
        Estimate::new(head.value + pre * tail, head.error)
    };
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(est.scale(1.0 / std::f64::consts::PI))
}

/// Weight `w(x) = Σ cᵢ x^{−βᵢ}/Γ(1−βᵢ)`, the Lévy tail of a stable mixture.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightFunction {
    pub terms: Vec<(f64, f64)>,
}

impl WeightFunction {
    /// Classical Caputo weight `x^{−β}/Γ(1−β)`.
    pub fn caputo(beta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta < 1.0) {
            return Err(Error::domain("caputo", format!("beta = {beta} must lie in (0, 1)")));
        }
        Ok(WeightFunction {
            terms: vec![(1.0, beta)],
        })
    }

    /// The tail `w` of the Lévy measure of `spec`.
    pub fn from_spec(spec: &BernsteinSpec) -> Result<Self> {
        let terms = match &spec.kind {
            BernsteinKind::Stable(b) => vec![(spec.scale, *b)],
            BernsteinKind::StableMixture(c) => c.iter().map(|&(w, b)| (spec.scale * w, b)).collect(),
            BernsteinKind::Tabulated(_) => {
                return Err(Error::unsupported("weight_function", "tabulated exponents"));
            }
        };
        Ok(WeightFunction { terms })
    }

    /// The tail `w*` of the conjugate exponent.
    pub fn conjugate_of(spec: &BernsteinSpec) -> Result<Self> {
        match spec.kind {
            BernsteinKind::Stable(_) => Self::from_spec(&spec.conjugate()?),
            _ => Err(Error::NotSpecial {
                detail: "the conjugate tail is only available in closed form for stable exponents".into(),
            }),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.terms
            .iter()
            .map(|&(c, b)| c * x.powf(-b) * recip_gamma(1.0 - b))
            .sum()
    }

    // ∫₀^x w and ∫₀^x ∫₀^u w
    fn w1(&self, x: f64) -> f64 {
        self.terms
            .iter()
            .map(|&(c, b)| c * x.powf(1.0 - b) * recip_gamma(2.0 - b))
            .sum()
    }

    fn w2(&self, x: f64) -> f64 {
        self.terms
            .iter()
            .map(|&(c, b)| c * x.powf(2.0 - b) * recip_gamma(3.0 - b))
            .sum()
    }

    /// `∫₀^T w(T−s)(f(s)−f(0)) ds` for the piecewise-linear interpolant of
    /// `(grid, values)`, integrated exactly.
    pub fn memory_integral(&self, grid: &[f64], values: &[f64], t: f64) -> f64 {
        let f0 = values[0];
        let mut total = 0.0;
        for i in 0..grid.len() - 1 {
            let (a, b0) = (grid[i], grid[i + 1]);
            if a >= t {
                break;
            }
            let slope = (values[i + 1] - values[i]) / (b0 - a);
            let b = b0.min(t);
            let ga = values[i] - f0;
            let gb = values[i] + slope * (b - a) - f0;
            total += self.w1(t - a) * ga - self.w1(t - b) * gb + slope * (self.w2(t - a) - self.w2(t - b));
        }
        total
    }
}

/// `s_j = T (j/n)^γ`, `j = 0..=n`.
pub fn graded_grid(t_end: f64, n: usize, grading: f64) -> Vec<f64> {
    (0..=n).map(|j| t_end * (j as f64 / n as f64).powf(grading)).collect()
}

/// Generalized Caputo derivative `d/dT ∫₀^T w(T−s)(f(s)−f(0)) ds` from
/// samples of f. The memory integral is exact for the piecewise-linear
/// interpolant; the T-derivative is a central difference with `h = T/64`,
/// Richardson-extrapolated once. The grid must start at 0 and reach `T + h`.
pub fn caputo_w_derivative(w: &WeightFunction, grid: &[f64], values: &[f64], t: f64) -> Result<f64> {
    let op = "caputo_w_derivative";
    if grid.len() < 8 || grid.len() != values.len() {
        return Err(Error::domain(
            op,
            format!("need at least 8 samples, got {}", grid.len()),
        ));
    }
    if grid[0] != 0.0 || grid.windows(2).any(|p| p[1] <= p[0]) {
        return Err(Error::domain(op, "grid must start at 0 and increase"));
    }
    let h = t / 64.0;
    if !(t > 0.0) || t + h > grid[grid.len() - 1] * (1.0 + 1e-12) {
        return Err(Error::domain(op, format!("T = {t} needs samples up to {}", t + h)));
    }
    let big = |s: f64| w.memory_integral(grid, values, s);
    let d = |h: f64| (big(t + h) - big(t - h)) / (2.0 * h);
    Ok((4.0 * d(0.5 * h) - d(h)) / 3.0)
}

fn time_integral(op: &'static str, t: f64, f: impl Fn(f64, f64) -> Result<f64>) -> Result<f64> {
    let mut failure = None;
    let est = tanh_sinh_ends(
        |_, s, rest| match f(s, rest) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        },
        0.0,
        t,
        Tolerance::new(1e-300, 1e-7),
    )
    .map_err(|e| e.within(op))?;
    match failure {
        Some(e) => Err(e),
        None => Ok(est.value),
    }
}

/// `∫₀^t q(s,z) ds`.
pub fn cumulative_q(kspec: &HeatKernelSpec, eval: &DensityEval, t: f64, z: f64) -> Result<f64> {
    time_integral("cumulative_q", t, |s, _| Ok(q_kernel(kspec, eval, s, z)?.value))
}

/// Relative gap between `∫₀^t q(s,z) ds` and `∫₀^t G(t−s) p(s,z) ds`.
pub fn cumulative_identity_residual(kspec: &HeatKernelSpec, eval: &DensityEval, t: f64, z: f64) -> Result<f64> {
    let op = "cumulative_identity_residual";
    check_time_space(op, t, z)?;
    if z == 0.0 {
        return Err(Error::domain(op, "z must be positive"));
    }
    let lhs = cumulative_q(kspec, eval, t, z)?;
    let rhs = time_integral(op, t, |s, rest| {
        Ok(eval.potential_density(rest)? * p_kernel(kspec, eval, s, z)?.value)
    })?;
    Ok((lhs - rhs).abs() / lhs.abs())
}

/// Relative gap between `∫₀^t w*(t−s) p(s,z) ds` and `∫₀^t q(s,z) ds`.
pub fn conjugate_integrated_residual(kspec: &HeatKernelSpec, eval: &DensityEval, t: f64, z: f64) -> Result<f64> {
    let op = "conjugate_integrated_residual";
    check_time_space(op, t, z)?;
    if z == 0.0 {
        return Err(Error::domain(op, "z must be positive"));
    }
    let wstar = WeightFunction::conjugate_of(&eval.spec)?;
    let lhs = time_integral(op, t, |s, rest| {
        Ok(wstar.eval(rest) * p_kernel(kspec, eval, s, z)?.value)
    })?;
    let rhs = cumulative_q(kspec, eval, t, z)?;
    Ok((lhs - rhs).abs() / rhs.abs())
}

/// Number of intervals in the graded grid used for `∂^{w*}_t p`.
pub const CONJUGATE_GRID: usize = 160;

/// Relative gap between `q(t,z)` and `∂^{w*}_t p(·,z)(t)`, with p sampled on a
/// graded grid over `[0, t(1 + 1/32)]`.
pub fn conjugate_identity_residual(kspec: &HeatKernelSpec, eval: &DensityEval, t: f64, z: f64) -> Result<f64> {
    let op = "conjugate_identity_residual";
    check_time_space(op, t, z)?;
    if z == 0.0 {
        return Err(Error::domain(op, "z must be positive"));
    }
    let wstar = WeightFunction::conjugate_of(&eval.spec)?;
    let grid = graded_grid(t * (1.0 + 1.0 / 32.0), CONJUGATE_GRID, 2.0);
    let values = grid
        .par_iter()
        .map(|&s| {
            if s == 0.0 {
                Ok(0.0)
            } else {
                p_kernel(kspec, eval, s, z).map(|e| e.value)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let lhs = caputo_w_derivative(&wstar, &grid, &values, t)?;
    let q = q_kernel(kspec, eval, t, z)?.value;
    Ok((lhs - q).abs() / q.abs())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Subordination,
    FourierOracle,
    Duhamel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldMeta {
    pub subordinator: BernsteinSpec,
    pub kernel: HeatKernelSpec,
    /// SHA-256 of the JSON form of `subordinator`.
    pub subordinator_hash: String,
    /// SHA-256 of the JSON form of `kernel`.
    pub kernel_hash: String,
    pub tolerance: f64,
}

impl FieldMeta {
    pub fn new(subordinator: &BernsteinSpec, kernel: &HeatKernelSpec, tolerance: f64) -> Result<Self> {
        Ok(FieldMeta {
            subordinator: subordinator.clone(),
            kernel: *kernel,
            subordinator_hash: json_hash(subordinator)?,
            kernel_hash: json_hash(kernel)?,
            tolerance,
        })
    }
}

fn json_hash<T: Serialize>(v: &T) -> Result<String> {
    let json = serde_json::to_string(v).map_err(|e| Error::Config(e.to_string()))?;
    Ok(Sha256::digest(json.as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect())
}

/// Values of q, p or u on a tensor grid; `values[i * points.len() + j]`
/// belongs to `(times[i], points[j])`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionField {
    pub quantity: Quantity,
    pub provenance: Provenance,
    /// `"z"` for distances, `"x"` for positions.
    pub axis: String,
    pub times: Vec<f64>,
    pub points: Vec<f64>,
    pub values: Vec<f64>,
    pub errors: Vec<f64>,
    pub meta: FieldMeta,
}

impl SolutionField {
    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.points.len() + j]
    }

    pub fn error(&self, i: usize, j: usize) -> f64 {
        self.errors[i * self.points.len() + j]
    }

    /// Rows `t,<axis>,value,error` with 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let io = |e: std::io::Error| Error::Config(e.to_string());
        writeln!(out, "t,{},value,error", self.axis).map_err(io)?;
        for (i, t) in self.times.iter().enumerate() {
            for (j, x) in self.points.iter().enumerate() {
                writeln!(
                    out,
                    "{t:.16e},{x:.16e},{:.16e},{:.16e}",
                    self.value(i, j),
                    self.error(i, j)
                )
                .map_err(io)?;
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Config(e.to_string()))
    }
}

/// q or p by subordination on a `(t, z)` grid.
pub fn kernel_field(
    quantity: Quantity,
    kspec: &HeatKernelSpec,
    eval: &DensityEval,
    times: &[f64],
    points: &[f64],
) -> Result<SolutionField> {
    let cells: Vec<(f64, f64)> = times
        .iter()
        .flat_map(|&t| points.iter().map(move |&z| (t, z)))
        .collect();
    let est = cells
        .par_iter()
        .map(|&(t, z)| match quantity {
            Quantity::Q => q_kernel(kspec, eval, t, z),
            Quantity::P => p_kernel(kspec, eval, t, z),
            Quantity::U => Err(Error::unsupported("kernel_field", "u needs duhamel_solve")),
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SolutionField {
        quantity,
        provenance: Provenance::Subordination,
        axis: "z".into(),
        times: times.to_vec(),
        points: points.to_vec(),
        values: est.iter().map(|e| e.value).collect(),
        errors: est.iter().map(|e| e.error).collect(),
        meta: FieldMeta::new(&eval.spec, kspec, KERNEL_TOL.rel)?,
    })
}

/// Initial datum `g(x)`.
pub type InitialData<'a> = &'a (dyn Fn(f64) -> f64 + Sync);
/// Source `f(t, x)`, taken as 0 for `t ≤ 0`.
pub type Source<'a> = &'a (dyn Fn(f64, f64) -> f64 + Sync);

/// Nodes of the time-change measures at one time t: `h_t(r) dr` and
/// `p̄(r,τ) dr dτ` on `τ ∈ [0,t]`, the latter as `(t − τ, r, weight)`, once at
/// full and once at half order in τ.
struct TimeChangeRule {
    homogeneous: Vec<(f64, f64)>,
    forced: Vec<(f64, f64, f64)>,
    forced_coarse: Vec<(f64, f64, f64)>,
}

const TAU_NODES: usize = 24;
const HERMITE_NODES: usize = 32;
const PANEL_NODES: usize = 5;

fn unit_rule(n: usize) -> Vec<(f64, f64)> {
    let (x, w) = gauss_legendre(n);
    x.iter().zip(&w).map(|(x, w)| (0.5 * (x + 1.0), 0.5 * w)).collect()
}

// Nodes for the laws of the positive stable variable S (`g(x) dx`) and of
// `g(x) x^{−β} dx`, in ln x with unit panels; the mass beyond the last panel
// is lumped onto its right end.
struct StableNodes {
    x: Vec<f64>,
    law: Vec<f64>,
    tilted: Vec<f64>,
}

impl StableNodes {
    fn new(beta: f64) -> Result<Self> {
        let mut lo = 0.0;
        while stable_xg(beta, lo)? > 1e-18 {
            lo -= 1.0;
        }
        let hi = (14.0 / beta).min(700.0).ceil();
        let gl = unit_rule(PANEL_NODES);
        let (mut x, mut law, mut tilted) = (vec![], vec![], vec![]);
        let mut y0 = lo;
        while y0 < hi {
            for &(u, w) in &gl {
                let y = y0 + u;
                let xg = stable_xg(beta, y)?;
                x.push(y.exp());
                law.push(w * xg);
                tilted.push(w * xg * (-beta * y).exp());
            }
            y0 += 1.0;
        }
        x.push(hi.exp());
        law.push((1.0 - law.iter().sum::<f64>()).max(0.0));
        tilted.push((recip_gamma(1.0 + beta) - tilted.iter().sum::<f64>()).max(0.0));
        Ok(StableNodes { x, law, tilted })
    }

    fn rule(&self, beta: f64, c: f64, t: f64) -> TimeChangeRule {
        let homogeneous = self
            .x
            .iter()
            .zip(&self.law)
            .map(|(x, m)| ((t / x).powf(beta) / c, *m))
            .collect();
        let tb = t.powf(beta) / c;
        let forced = |n: usize| {
            let mut out = vec![];
            for (v, wv) in unit_rule(n) {
                let s = t - t * v.powf(1.0 / beta);
                for (x, m) in self.x.iter().zip(&self.tilted) {
                    out.push((s, tb * v * x.powf(-beta), tb * wv * m));
                }
            }
            out
        };
        TimeChangeRule {
            homogeneous,
            forced: forced(TAU_NODES),
            forced_coarse: forced(TAU_NODES / 2),
        }
    }
}

// ln r panels of unit width over `[ln bulk − 40, ln bulk + ln 10³]`.
fn log_panels(bulk: f64, mut weight: impl FnMut(f64) -> Result<f64>) -> Result<Vec<(f64, f64)>> {
    let gl = unit_rule(PANEL_NODES);
    let (lo, hi) = (bulk.ln() - 40.0, bulk.ln() + 7.0);
    let mut out = vec![];
    let mut y0 = lo;
    while y0 < hi {
        for &(u, w) in &gl {
            let r = (y0 + u).exp();
            out.push((r, w * r * weight(r)?));
        }
        y0 += 1.0;
    }
    Ok(out)
}

fn general_rule(eval: &DensityEval, t: f64, need_g: bool, need_f: bool) -> Result<TimeChangeRule> {
    let homogeneous = if need_g {
        log_panels(1.0 / eval.spec.phi(1.0 / t)?, |r| eval.inverse_density(t, r))?
    } else {
        vec![]
    };
    let b = match &eval.spec.kind {
        BernsteinKind::Stable(b) => *b,
        BernsteinKind::StableMixture(c) => c.iter().map(|p| p.1).fold(0.0, f64::max),
        BernsteinKind::Tabulated(_) => return Err(Error::unsupported("duhamel_solve", "tabulated exponents")),
    };
    let forced = |n: usize| -> Result<Vec<(f64, f64, f64)>> {
        let mut out = vec![];
        if !need_f {
            return Ok(out);
        }
        for (v, wv) in unit_rule(n) {
            let tau = t * v.powf(1.0 / b);
            let jac = t / b * v.powf(1.0 / b - 1.0) * wv;
            for (r, w) in log_panels(1.0 / eval.spec.phi(1.0 / tau)?, |r| eval.density(r, tau))? {
                out.push((t - tau, r, jac * w));
            }
        }
        Ok(out)
    };
    Ok(TimeChangeRule {
        homogeneous,
        forced: forced(TAU_NODES)?,
        forced_coarse: forced(TAU_NODES / 2)?,
    })
}

// E φ(x + √(2r) N) by Gauss–Hermite.
fn heat_mean(nodes: &[(f64, f64)], x: f64, r: f64, phi: impl Fn(f64) -> f64) -> f64 {
    let spread = 2.0 * r.sqrt();
    if spread < 1e-12 {
        return phi(x);
    }
    nodes.iter().map(|&(xi, w)| w * phi(x + spread * xi)).sum()
}

/// Solution of `∂^w_t u = u'' + f`, `u(0) = g`, for the Gaussian kernel:
/// `u(t,x) = E[g(x + B(E_t))] + ∫₀^t ∫ q(t−s, x−y) f(s,y) dy ds`, evaluated
/// through the laws of the time change and Gauss–Hermite in space.
///
/// The error column is the change of the forcing term when the τ-rule is
/// halved.
pub fn duhamel_solve(
    kspec: &HeatKernelSpec,
    eval: &DensityEval,
    g: Option<InitialData<'_>>,
    f: Option<Source<'_>>,
    times: &[f64],
    points: &[f64],
) -> Result<SolutionField> {
    let op = "duhamel_solve";
    if kspec.kind != KernelKind::GaussianR1 {
        return Err(Error::unsupported(
            op,
            "only the Gaussian kernel has an explicit semigroup here",
        ));
    }
    if times.iter().any(|t| !(*t >= 0.0 && t.is_finite())) || points.iter().any(|x| !x.is_finite()) {
        return Err(Error::domain(op, "times must be nonnegative and points finite"));
    }
    let (xs, ws) = gauss_hermite(HERMITE_NODES);
    let hermite: Vec<(f64, f64)> = xs
        .iter()
        .zip(&ws)
        .map(|(x, w)| (*x, w / std::f64::consts::PI.sqrt()))
        .collect();
    let stable_nodes = match eval.stable_params() {
        Some((b, _)) => Some(StableNodes::new(b)?),
        None => None,
    };
    let rules = times
        .par_iter()
        .map(|&t| {
            if t == 0.0 {
                return Ok(None);
            }
            match (&stable_nodes, eval.stable_params()) {
                (Some(n), Some((b, c))) => Ok(Some(n.rule(b, c, t))),
                _ => general_rule(eval, t, g.is_some(), f.is_some()).map(Some),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let cells: Vec<(usize, f64)> = (0..times.len())
        .flat_map(|i| points.iter().map(move |&x| (i, x)))
        .collect();
    let out: Vec<(f64, f64)> = cells
        .par_iter()
        .map(|&(i, x)| {
            let Some(rule) = &rules[i] else {
                return (g.map_or(0.0, |g| g(x)), 0.0);
            };
            let mut u = 0.0;
            if let Some(g) = g {
                u += rule
                    .homogeneous
                    .iter()
                    .map(|&(r, w)| w * heat_mean(&hermite, x, r, g))
                    .sum::<f64>();
            }
            let mut err = 0.0;
            if let Some(f) = f {
                let forced = |nodes: &[(f64, f64, f64)]| {
                    nodes
                        .iter()
                        .map(|&(s, r, w)| w * heat_mean(&hermite, x, r, |y| f(s, y)))
                        .sum::<f64>()
                };
                let fine = forced(&rule.forced);
                err = (fine - forced(&rule.forced_coarse)).abs();
                u += fine;
            }
            (u, err)
        })
        .collect();
    Ok(SolutionField {
        quantity: Quantity::U,
        provenance: Provenance::Duhamel,
        axis: "x".into(),
        times: times.to_vec(),
        points: points.to_vec(),
        values: out.iter().map(|p| p.0).collect(),
        errors: out.iter().map(|p| p.1).collect(),
        meta: FieldMeta::new(&eval.spec, kspec, 0.0)?,
    })
}

/// Time nodes skipped at the start when checking the equation; the
/// piecewise-linear interpolant cannot follow `u − g ∝ t^β` on the first
/// intervals.
pub const RESIDUAL_SKIP: usize = 2;

/// `max |∂^w_t u − u'' − f| / (1 + |f|)` over interior grid points, with u''
/// from central second differences on a uniform x grid.
pub fn pde_residual(u: &SolutionField, f: Option<Source<'_>>, w: &WeightFunction) -> Result<f64> {
    let op = "pde_residual";
    let (nt, nx) = (u.times.len(), u.points.len());
    if nt < 8 || nx < 3 {
        return Err(Error::domain(op, format!("grid {nt}×{nx} is too coarse")));
    }
    let dx = u.points[1] - u.points[0];
    if u.points
        .windows(2)
        .any(|p| ((p[1] - p[0]) - dx).abs() > 1e-9 * dx.abs())
    {
        return Err(Error::domain(op, "x grid must be uniform"));
    }
    let cols: Vec<Vec<f64>> = (0..nx).map(|j| (0..nt).map(|i| u.value(i, j)).collect()).collect();
    let rows: Vec<usize> = (1 + RESIDUAL_SKIP..nt - 1).collect();
    let worst = rows
        .par_iter()
        .map(|&i| {
            let t = u.times[i];
            let mut worst = 0.0f64;
            #[allow(clippy::needless_range_loop)]
            for j in 1..nx - 1 {
                let dt = caputo_w_derivative(w, &u.times, &cols[j], t)?;
                let lap = (u.value(i, j + 1) - 2.0 * u.value(i, j) + u.value(i, j - 1)) / (dx * dx);
                let fv = f.map_or(0.0, |f| f(t, u.points[j]));
                worst = worst.max((dt - lap - fv).abs() / (1.0 + fv.abs()));
            }
            Ok(worst)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(worst.into_iter().fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::{half_line, tanh_sinh};
    use crate::special::gamma;
    use crate::subordinator::DensityMethod;
    use std::f64::consts::PI;

    fn stable(beta: f64) -> DensityEval {
        DensityEval::auto(BernsteinSpec::stable(beta).unwrap())
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    fn line_mass(f: impl Fn(f64) -> f64) -> f64 {
        2.0 * half_line(f, &[0.5, 2.0, 8.0], Tolerance::new(1e-13, 1e-10))
            .unwrap()
            .value
    }

    #[test]
    fn gaussian_kernels_match_fourier_oracle() {
        let k = HeatKernelSpec::gaussian();
        let e = stable(0.5);
        for &(t, z) in &[(1.0, 1.0), (1.0, 0.0), (0.25, 2.0), (4.0, 0.5)] {
            let q = q_kernel(&k, &e, t, z).unwrap().value;
            let p = p_kernel(&k, &e, t, z).unwrap().value;
            let oq = fourier_oracle(Quantity::Q, 2.0, 0.5, 1.0, t, z).unwrap().value;
            let op = fourier_oracle(Quantity::P, 2.0, 0.5, 1.0, t, z).unwrap().value;
            assert!(rel(q, oq) < 1e-8, "q({t},{z}) {q} vs {oq}");
            assert!(rel(p, op) < 1e-8, "p({t},{z}) {p} vs {op}");
        }
    }

    #[test]
    fn cauchy_and_scaled_kernels_match_fourier_oracle() {
        let k = HeatKernelSpec::cauchy();
        let e = DensityEval::auto(BernsteinSpec::stable(0.3).unwrap().scaled(2.0));
        for &(t, z) in &[(1.0, 0.5), (3.0, 2.0)] {
            let q = q_kernel(&k, &e, t, z).unwrap().value;
            let oq = fourier_oracle(Quantity::Q, 1.0, 0.3, 2.0, t, z).unwrap().value;
            assert!(rel(q, oq) < 1e-7, "q({t},{z}) {q} vs {oq}");
            let p = p_kernel(&k, &e, t, z).unwrap().value;
            let op = fourier_oracle(Quantity::P, 1.0, 0.3, 2.0, t, z).unwrap().value;
            assert!(rel(p, op) < 1e-7, "p({t},{z}) {p} vs {op}");
        }
    }

    #[test]
    fn divergent_and_envelope_cases_are_rejected() {
        let e = stable(0.5);
        assert!(matches!(
            p_kernel(&HeatKernelSpec::cauchy(), &e, 1.0, 0.0),
            Err(Error::Range { .. })
        ));
        let env = HeatKernelSpec::jump_envelope(1.0, 1.0).unwrap();
        assert!(matches!(q_kernel(&env, &e, 1.0, 1.0), Err(Error::Unsupported { .. })));
        assert!(q_kernel(&HeatKernelSpec::gaussian(), &e, 1.0, -1.0).is_err());
        assert!(fourier_oracle(Quantity::P, 1.0, 0.5, 1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn masses_of_q_and_p() {
        let k = HeatKernelSpec::gaussian();
        for e in [
            stable(0.5),
            DensityEval::auto(BernsteinSpec::mixture(vec![(0.5, 0.3), (0.5, 0.7)]).unwrap()),
        ] {
            for &t in &[0.5, 2.0] {
                let mq = line_mass(|z| q_kernel(&k, &e, t, z).unwrap().value);
                let g = e.potential_density(t).unwrap();
                assert!(rel(mq, g) < 1e-4, "{:?} t {t}: {mq} vs {g}", e.spec.kind);
            }
        }
        let e = stable(0.3);
        for &t in &[0.5, 2.0] {
            let mp = line_mass(|z| p_kernel(&k, &e, t, z).unwrap().value);
            assert!((mp - 1.0).abs() < 1e-4, "t {t}: {mp}");
        }
    }

    #[test]
    fn kernels_decay_in_z() {
        let k = HeatKernelSpec::gaussian();
        let e = stable(0.5);
        let mut prev = (f64::INFINITY, f64::INFINITY);
        for i in 0..12 {
            let z = 0.5 * i as f64;
            let cur = (
                q_kernel(&k, &e, 1.0, z).unwrap().value,
                p_kernel(&k, &e, 1.0, z).unwrap().value,
            );
            assert!(cur.0 < prev.0 && cur.1 < prev.1 && cur.0 > 0.0 && cur.1 > 0.0);
            prev = cur;
        }
    }

    #[test]
    fn point_mass_time_change_returns_base_kernel() {
        // a narrow law around r = t stands in for E_t = t
        let k = HeatKernelSpec::gaussian();
        for &(t, z) in &[(1.0, 0.0), (0.5, 1.0), (2.0, 3.0)] {
            let width = 1e-4 * t;
            let law = |r: f64| (-0.5 * ((r - t) / width).powi(2)).exp() / (width * (2.0 * PI).sqrt());
            let edges = [t - 12.0 * width, t + 12.0 * width];
            let v = subordinate("shim", &k, z, t, &edges, |r| Ok(law(r))).unwrap().value;
            let exact = k.p0_radial(t, z).unwrap();
            assert!(rel(v, exact) < 1e-6, "({t},{z}) {v} vs {exact}");
        }
    }

    #[test]
    fn caputo_of_monomials() {
        let w = WeightFunction::caputo(0.5).unwrap();
        let grid = graded_grid(1.1, 200, 2.0);
        let lin: Vec<f64> = grid.clone();
        let d1 = caputo_w_derivative(&w, &grid, &lin, 1.0).unwrap();
        assert!((d1 - 1.0 / gamma(1.5)).abs() < 1e-8, "{d1}");
        assert!((d1 - 2.0 / PI.sqrt()).abs() < 1e-5);
        let sq: Vec<f64> = grid.iter().map(|s| s * s).collect();
        let d2 = caputo_w_derivative(&w, &grid, &sq, 1.0).unwrap();
        assert!((d2 - 2.0 / gamma(2.5)).abs() < 1e-3, "{d2}");
        let c = vec![3.0; grid.len()];
        assert_eq!(caputo_w_derivative(&w, &grid, &c, 1.0).unwrap(), 0.0);
        let short = graded_grid(1.1, 6, 2.0);
        assert!(caputo_w_derivative(&w, &short, &short, 1.0).is_err());
        assert!(caputo_w_derivative(&w, &grid, &lin, 1.09).is_err());
    }

    #[test]
    fn memory_integral_is_exact_for_mixture_weights() {
        let spec = BernsteinSpec::mixture(vec![(0.5, 0.3), (0.5, 0.7)]).unwrap();
        let w = WeightFunction::from_spec(&spec).unwrap();
        for x in [0.1, 1.0, 5.0] {
            assert!(rel(w.eval(x), spec.levy_tail_w(x).unwrap()) < 1e-14);
        }
        let grid = graded_grid(2.0, 40, 1.5);
        let f = |s: f64| (1.0 + s).ln();
        let vals: Vec<f64> = grid.iter().map(|&s| f(s)).collect();
        let t = 1.3;
        // quadrature of w against the same piecewise-linear interpolant
        let interp = |s: f64| {
            let i = grid.partition_point(|g| *g <= s).clamp(1, grid.len() - 1);
            let (a, b) = (grid[i - 1], grid[i]);
            vals[i - 1] + (vals[i] - vals[i - 1]) * (s - a) / (b - a)
        };
        let mut breaks: Vec<f64> = grid.iter().copied().filter(|g| *g < t).collect();
        breaks.push(t);
        let mut direct = 0.0;
        for p in breaks.windows(2) {
            let gap = t - p[1];
            direct += tanh_sinh_ends(
                |s, _, rest| w.eval(gap + rest) * (interp(s) - vals[0]),
                p[0],
                p[1],
                Tolerance::new(1e-15, 1e-12),
            )
            .unwrap()
            .value;
        }
        assert!(rel(w.memory_integral(&grid, &vals, t), direct) < 1e-9);
        let lin: Vec<f64> = graded_grid(2.0, 40, 1.5);
        let d = caputo_w_derivative(&w, &lin, &lin, 1.0).unwrap();
        let exact: f64 = [0.3, 0.7].iter().map(|b| 0.5 / gamma(2.0 - b)).sum();
        assert!(rel(d, exact) < 1e-8);
    }

    #[test]
    fn conjugate_weight_needs_a_stable_exponent() {
        let w = WeightFunction::conjugate_of(&BernsteinSpec::stable(0.3).unwrap()).unwrap();
        assert!(rel(w.eval(2.0), 2f64.powf(-0.7) / gamma(0.3)) < 1e-14);
        let mix = BernsteinSpec::mixture(vec![(0.5, 0.3), (0.5, 0.7)]).unwrap();
        assert!(matches!(
            WeightFunction::conjugate_of(&mix),
            Err(Error::NotSpecial { .. })
        ));
    }

    #[test]
    fn identities_at_one_point() {
        let k = HeatKernelSpec::gaussian();
        let e = stable(0.5);
        assert!(cumulative_identity_residual(&k, &e, 1.0, 1.0).unwrap() < 1e-3);
        assert!(conjugate_integrated_residual(&k, &e, 1.0, 1.0).unwrap() < 1e-3);
        assert!(conjugate_identity_residual(&k, &stable(0.3), 1.0, 1.0).unwrap() < 1e-2);
        let vals: Vec<f64> = [1.0, 1e-2, 1e-4]
            .iter()
            .map(|&t| cumulative_q(&k, &e, t, 1.0).unwrap())
            .collect();
        assert!(
            vals[2] > 0.0 && vals[2] < vals[1] && vals[1] < vals[0] && vals[2] < 1e-5 * vals[0],
            "{vals:?}"
        );
    }

    fn xs(n: usize, half: f64) -> Vec<f64> {
        (0..n).map(|j| -half + 2.0 * half * j as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn duhamel_constant_source_gives_cumulative_potential() {
        let k = HeatKernelSpec::gaussian();
        let one = |_: f64, _: f64| 1.0;
        for beta in [0.3, 0.5] {
            let u = duhamel_solve(&k, &stable(beta), None, Some(&one), &[0.0, 0.5, 2.0], &[-1.0, 0.0, 2.0]).unwrap();
            for (i, t) in u.times.iter().enumerate() {
                for j in 0..3 {
                    let exact = t.powf(beta) / gamma(1.0 + beta);
                    assert!(
                        (u.value(i, j) - exact).abs() < 1e-8 * (1.0 + exact),
                        "beta {beta} t {t}"
                    );
                }
            }
        }
    }

    #[test]
    fn duhamel_single_mode_matches_oracle() {
        let k = HeatKernelSpec::gaussian();
        let f = |_: f64, y: f64| y.cos();
        let u = duhamel_solve(&k, &stable(0.5), None, Some(&f), &[0.5, 1.0], &[0.0, 1.0]).unwrap();
        for (i, &t) in u.times.iter().enumerate() {
            let m = tanh_sinh(
                |s| s.powf(-0.5) * mittag_leffler(0.5, 0.5, -s.sqrt()).unwrap(),
                0.0,
                t,
                Tolerance::new(1e-14, 1e-12),
            )
            .unwrap()
            .value;
            for (j, x) in u.points.iter().enumerate() {
                assert!((u.value(i, j) - x.cos() * m).abs() < 1e-3 * m, "t {t} x {x}");
            }
        }
    }

    #[test]
    fn duhamel_conserves_mass_of_initial_bump() {
        let k = HeatKernelSpec::gaussian();
        let g = |x: f64| (-x * x).exp();
        let x = xs(401, 40.0);
        let u = duhamel_solve(&k, &stable(0.5), Some(&g), None, &[0.0, 1.0, 3.0], &x).unwrap();
        let dx = x[1] - x[0];
        for i in 0..3 {
            let mass: f64 = (0..x.len()).map(|j| u.value(i, j)).sum::<f64>() * dx;
            assert!((mass - PI.sqrt()).abs() < 1e-4, "row {i}: {mass}");
        }
    }

    #[test]
    fn duhamel_general_rule_agrees_with_stable_nodes() {
        let k = HeatKernelSpec::gaussian();
        let spec = BernsteinSpec::stable(0.5).unwrap();
        let fast = DensityEval::auto(spec.clone());
        let slow = DensityEval::new(spec, DensityMethod::ContourInversion).unwrap();
        let g = |x: f64| 1.0 / (1.0 + x * x);
        let f = |s: f64, y: f64| (-s).exp() * y.sin();
        let a = duhamel_solve(&k, &fast, Some(&g), Some(&f), &[0.7], &[0.3, 1.5]).unwrap();
        let b = duhamel_solve(&k, &slow, Some(&g), Some(&f), &[0.7], &[0.3, 1.5]).unwrap();
        for (u, v) in a.values.iter().zip(&b.values) {
            assert!((u - v).abs() < 1e-6, "{u} vs {v}");
        }
    }

    #[test]
    fn duhamel_mixture_constant_source() {
        let k = HeatKernelSpec::gaussian();
        let e = DensityEval::auto(BernsteinSpec::mixture(vec![(0.5, 0.3), (0.5, 0.7)]).unwrap());
        let one = |_: f64, _: f64| 1.0;
        let u = duhamel_solve(&k, &e, None, Some(&one), &[1.0], &[0.0]).unwrap();
        let exact = tanh_sinh(
            |s| e.potential_density(s).unwrap(),
            0.0,
            1.0,
            Tolerance::new(1e-12, 1e-9),
        )
        .unwrap()
        .value;
        assert!(rel(u.values[0], exact) < 1e-4, "{} vs {exact}", u.values[0]);
    }

    #[test]
    fn equation_residuals() {
        let k = HeatKernelSpec::gaussian();
        let w = WeightFunction::caputo(0.5).unwrap();
        let x = xs(64, PI);
        let t = graded_grid(1.0, 63, 1.0);
        let g = |x: f64| (-x * x).exp();
        let u = duhamel_solve(&k, &stable(0.5), Some(&g), None, &t, &x).unwrap();
        let r = pde_residual(&u, None, &w).unwrap();
        assert!(r < 5e-2, "{r}");
        let zero = duhamel_solve(&k, &stable(0.5), None, None, &t, &x).unwrap();
        assert_eq!(pde_residual(&zero, None, &w).unwrap(), 0.0);
        let coarse = duhamel_solve(&k, &stable(0.5), None, None, &t[..5], &x).unwrap();
        assert!(pde_residual(&coarse, None, &w).is_err());
    }

    #[test]
    fn fields_serialize() {
        let k = HeatKernelSpec::gaussian();
        let e = stable(0.5);
        let f = kernel_field(Quantity::Q, &k, &e, &[0.5, 1.0], &[0.0, 1.0]).unwrap();
        assert_eq!(f.meta.subordinator_hash.len(), 64);
        assert_eq!(
            f.meta.subordinator_hash,
            FieldMeta::new(&e.spec, &k, 0.0).unwrap().subordinator_hash
        );
        assert_ne!(
            f.meta.subordinator_hash,
            FieldMeta::new(&BernsteinSpec::stable(0.3).unwrap(), &k, 0.0)
                .unwrap()
                .subordinator_hash
        );
        let mut csv = vec![];
        f.write_csv(&mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert_eq!(text.lines().next(), Some("t,z,value,error"));
        assert_eq!(text.lines().count(), 5);
        let back: SolutionField = serde_json::from_str(&f.to_json().unwrap()).unwrap();
        assert_eq!(back, f);
        assert!(f.values.iter().zip(&f.errors).all(|(v, e)| *v >= -e));
    }
}
