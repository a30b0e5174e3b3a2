//! Monte Carlo samplers for stable subordinators and their inverses.
//!
//! Every draw is a pure function of `(seed, index)`: draw `i` reads from
//! ChaCha8 stream `i` of the seeded generator, so batches can be split across
//! workers in any way without changing the output.

use std::f64::consts::PI;
use std::io::Write;

use rand::distr::{Distribution, Open01};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::ln_kanter;
use crate::subordinator::DensityEval;

/// Steps allowed per first-passage path before giving up.
pub const MAX_PASSAGE_STEPS: usize = 50_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub beta: f64,
    /// `c` in `φ(λ) = cλ^β`.
    #[serde(default = "one")]
    pub scale: f64,
    pub n_samples: usize,
    pub seed: u64,
    /// First-passage step; `None` uses `t·10⁻³`.
    #[serde(default)]
    pub step: Option<f64>,
}

fn one() -> f64 {
    1.0
}

impl SamplerConfig {
    pub fn new(beta: f64, n_samples: usize, seed: u64) -> Result<Self> {
        let c = SamplerConfig {
            beta,
            scale: 1.0,
            n_samples,
            seed,
            step: None,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn with_scale(mut self, scale: f64) -> Self {
        self.scale = scale;
        self
    }

    pub fn with_step(mut self, step: f64) -> Self {
        self.step = Some(step);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return Err(Error::Config(format!("beta = {} must lie in (0, 1)", self.beta)));
        }
        if !(self.scale > 0.0 && self.scale.is_finite()) {
            return Err(Error::Config(format!("scale = {} must be positive", self.scale)));
        }
        if self.n_samples == 0 {
            return Err(Error::Config("n_samples must be positive".into()));
        }
        if let Some(h) = self.step {
            if !(h > 0.0 && h.is_finite()) {
                return Err(Error::Config(format!("step = {h} must be positive")));
            }
        }
        Ok(())
    }

    /// Generator for draw `index`.
    pub fn rng(&self, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index);
        rng
    }
}

/// One draw with Laplace transform `e^{−scale·λ^β}` (Kanter's method:
/// `(A(θ)/E)^{(1−β)/β}` with θ uniform on (0, π) and E standard exponential).
pub fn sample_stable_increment<R: Rng + ?Sized>(beta: f64, scale: f64, rng: &mut R) -> f64 {
    let u: f64 = Open01.sample(rng);
    let v: f64 = Open01.sample(rng);
    let ln_e = (-v.ln()).ln();
    let a = (1.0 - beta) / beta;
    (a * (ln_kanter(beta, PI * u) - ln_e) + scale.ln() / beta).exp()
}

/// `n_samples` draws of `S_r`.
pub fn sample_subordinator(config: &SamplerConfig, r: f64) -> Result<Vec<f64>> {
    config.validate()?;
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::domain(
            "sample_subordinator",
            format!("r = {r} must be positive"),
        ));
    }
    let scale = config.scale * r;
    Ok((0..config.n_samples as u64)
        .into_par_iter()
        .map(|i| sample_stable_increment(config.beta, scale, &mut config.rng(i)))
        .collect())
}

/// Largest gap between the empirical CDF of `samples` and `cdf`, checked on
/// both sides of each jump.
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> Result<f64> + Sync) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::domain("ks_statistic", "no samples"));
    }
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    let gaps = s
        .par_iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x)?;
            Ok((f - i as f64 / n).max((i + 1) as f64 / n - f))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(gaps.into_iter().fold(0.0, f64::max))
}

/// Largest gap between the empirical CDF of `samples` and `cdf` over `grid`.
pub fn ks_on_grid(samples: &[f64], grid: &[f64], cdf: impl Fn(f64) -> Result<f64> + Sync) -> Result<f64> {
    if samples.is_empty() || grid.is_empty() {
        return Err(Error::domain("ks_on_grid", "samples and grid must be nonempty"));
    }
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    let gaps = grid
        .par_iter()
        .map(|&t| {
            let below = s.partition_point(|&x| x <= t) as f64 / n;
            Ok((below - cdf(t)?).abs())
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(gaps.into_iter().fold(0.0, f64::max))
}

/// KS distance on `t_grid` between `n_samples` draws of `S_r` and
/// `∫₀^t p̄(r,s) ds` from `eval`.
pub fn empirical_cdf_distance(config: &SamplerConfig, eval: &DensityEval, r: f64, t_grid: &[f64]) -> Result<f64> {
    let samples = sample_subordinator(config, r)?;
    ks_on_grid(&samples, t_grid, |t| Ok(eval.cdf_pair(r, t)?.0))
}

/// First passages of one path above each level in `ts` (ascending), driven by
/// stream `index`. Each step draws the two halves of the increment separately;
/// the passage time is interpolated linearly inside the crossing half.
pub fn sample_inverse_path(config: &SamplerConfig, ts: &[f64], index: u64) -> Result<Vec<f64>> {
    let op = "sample_inverse";
    if ts.is_empty() || !ts.iter().all(|t| *t > 0.0 && t.is_finite()) || ts.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::domain(op, "levels must be positive and ascending"));
    }
    let h = config.step.unwrap_or(ts[0] * 1e-3);
    let half = 0.5 * h;
    let mut rng = config.rng(index);
    let mut out = Vec::with_capacity(ts.len());
    let (mut s, mut level) = (0.0f64, 0.0f64);
    let mut steps = 0usize;
    while out.len() < ts.len() {
        if steps >= MAX_PASSAGE_STEPS {
            return Err(Error::range(
                op,
                format!("no passage above {} within {steps} steps", ts[out.len()]),
            ));
        }
        steps += 1;
        for _ in 0..2 {
            let x = sample_stable_increment(config.beta, config.scale * half, &mut rng);
            while out.len() < ts.len() && level + x > ts[out.len()] {
                out.push(s + half * (ts[out.len()] - level) / x);
            }
            level += x;
            s += half;
        }
    }
    Ok(out)
}

/// `n_samples` draws of the first passage `E_t = inf{s : S_s > t}`.
pub fn sample_inverse(config: &SamplerConfig, t: f64) -> Result<Vec<f64>> {
    config.validate()?;
    (0..config.n_samples as u64)
        .into_par_iter()
        .map(|i| sample_inverse_path(config, &[t], i).map(|v| v[0]))
        .collect()
}

/// `E[E_t] = t^β/(cΓ(1+β))`.
pub fn inverse_mean(beta: f64, scale: f64, t: f64) -> f64 {
    t.powf(beta) / (scale * crate::special::gamma(1.0 + beta))
}

/// Mean and its standard error.
pub fn mean_and_stderr(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    (mean, (var / n).sqrt())
}

/// Counts per bin; `edges` ascending, values outside are dropped.
pub fn histogram(samples: &[f64], edges: &[f64]) -> Vec<usize> {
    let mut counts = vec![0; edges.len().saturating_sub(1)];
    for &x in samples {
        let k = edges.partition_point(|&e| e <= x);
        if k >= 1 && k < edges.len() {
            counts[k - 1] += 1;
        }
    }
    counts
}

/// `index,value` rows.
pub fn write_samples_csv<W: Write>(samples: &[f64], out: W) -> std::result::Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["index", "value"])?;
    for (i, x) in samples.iter().enumerate() {
        w.write_record([i.to_string(), format!("{x:.16e}")])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloReport {
    pub config: SamplerConfig,
    pub ks_subordinator: Vec<(f64, f64)>,
    pub inverse_mean: Option<InverseMeanCheck>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InverseMeanCheck {
    pub t: f64,
    pub mean: f64,
    pub stderr: f64,
    pub expected: f64,
}

impl InverseMeanCheck {
    pub fn run(config: &SamplerConfig, t: f64) -> Result<Self> {
        let samples = sample_inverse(config, t)?;
        let (mean, stderr) = mean_and_stderr(&samples);
        Ok(InverseMeanCheck {
            t,
            mean,
            stderr,
            expected: inverse_mean(config.beta, config.scale, t),
        })
    }

    /// `|mean − expected|` in standard errors.
    pub fn z_score(&self) -> f64 {
        (self.mean - self.expected).abs() / self.stderr
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bernstein::BernsteinSpec;
    use crate::special::{erfc, stable_cdf};

    #[test]
    fn laplace_transform_matches() {
        for &(beta, scale) in &[(0.5, 1.0), (0.3, 2.0), (0.8, 0.5)] {
            let c = SamplerConfig::new(beta, 100_000, 11).unwrap().with_scale(scale);
            let x = sample_subordinator(&c, 1.0).unwrap();
            let e: Vec<f64> = x.iter().map(|v| (-v).exp()).collect();
            let (m, se) = mean_and_stderr(&e);
            assert!((m - (-scale).exp()).abs() < 3.0 * se, "β {beta}: {m} ± {se}");
        }
    }

    #[test]
    fn half_stable_matches_levy_cdf() {
        let c = SamplerConfig::new(0.5, 20_000, 3).unwrap();
        let x = sample_subordinator(&c, 1.0).unwrap();
        let ks = ks_statistic(&x, |v| Ok(erfc(0.5 / v.sqrt()))).unwrap();
        assert!(ks < 0.02, "{ks}");
    }

    #[test]
    fn draws_depend_only_on_seed_and_index() {
        let c = SamplerConfig::new(0.4, 200, 99).unwrap();
        let a = sample_subordinator(&c, 1.0).unwrap();
        assert_eq!(a, sample_subordinator(&c, 1.0).unwrap());
        let b = sample_subordinator(&SamplerConfig { n_samples: 50, ..c }, 1.0).unwrap();
        assert_eq!(&a[..50], &b[..]);
        let d = sample_subordinator(&SamplerConfig { seed: 100, ..c }, 1.0).unwrap();
        assert_ne!(a, d);
        let e = sample_inverse_path(&c, &[1.0], 7).unwrap();
        assert_eq!(e, sample_inverse_path(&c, &[1.0], 7).unwrap());
    }

    #[test]
    fn subordinator_ks_against_analytic_cdf() {
        for &beta in &[0.3, 0.5] {
            let c = SamplerConfig::new(beta, 1000, 5).unwrap();
            let eval = DensityEval::auto(BernsteinSpec::stable(beta).unwrap());
            let grid: Vec<f64> = (0..40).map(|k| 10f64.powf(-2.0 + 0.15 * k as f64)).collect();
            let ks = empirical_cdf_distance(&c, &eval, 1.0, &grid).unwrap();
            assert!(ks < 0.05, "β {beta}: {ks}");
        }
    }

    #[test]
    fn inverse_mean_and_distribution() {
        let c = SamplerConfig::new(0.5, 4000, 21).unwrap().with_step(1e-2);
        let m = InverseMeanCheck::run(&c, 1.0).unwrap();
        assert!(m.z_score() < 3.0, "{m:?}");
        let x = sample_inverse(&c, 1.0).unwrap();
        // P(E_t ≤ r) = P(S_r ≥ t)
        let ks = ks_statistic(&x, |r| Ok(stable_cdf(0.5, 1.0 / (r * r))?.1)).unwrap();
        assert!(ks < 0.04, "{ks}");
    }

    #[test]
    fn inverse_paths_are_monotone_in_level() {
        let c = SamplerConfig::new(0.6, 10, 4).unwrap().with_step(1e-3);
        let ts = [0.1, 0.5, 0.5, 1.0, 3.0];
        for i in 0..10 {
            let e = sample_inverse_path(&c, &ts, i).unwrap();
            assert!(e.iter().all(|v| *v >= 0.0));
            assert!(e.windows(2).all(|w| w[0] <= w[1]), "{e:?}");
        }
        assert!(sample_inverse_path(&c, &[1.0, 0.5], 0).is_err());
    }

    #[test]
    fn small_r_histogram_mass_is_linear() {
        // P(S_r ∈ [0.1, 1]) ≈ r · ν([0.1, 1]) for small r
        let edges = [0.1, 1.0];
        let mut mass = vec![];
        for r in [1e-2, 2e-2] {
            let c = SamplerConfig::new(0.5, 200_000, 8).unwrap();
            let x = sample_subordinator(&c, r).unwrap();
            mass.push(histogram(&x, &edges)[0] as f64);
        }
        let ratio = mass[1] / mass[0];
        assert!((ratio - 2.0).abs() < 0.15, "{ratio}");
    }

    #[test]
    fn config_validation_and_csv() {
        assert!(SamplerConfig::new(1.0, 10, 0).is_err());
        assert!(SamplerConfig::new(0.5, 0, 0).is_err());
        assert!(SamplerConfig::new(0.5, 10, 0)
            .unwrap()
            .with_step(-1.0)
            .validate()
            .is_err());
        let mut buf = vec![];
        write_samples_csv(&[1.0, 2.5], &mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(s.starts_with("index,value\n0,1.0000000000000000e0\n1,2.5"));
        assert_eq!(histogram(&[0.5, 1.0, 1.5, 3.0], &[1.0, 2.0, 3.0]), vec![2, 0]);
    }
}
