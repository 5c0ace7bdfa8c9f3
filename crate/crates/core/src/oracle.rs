//! Monte Carlo cross-check of the exact moment engine.
//!
//! Each shot draws every primitive's `X` and `Y` quadrature from an
//! independent Gaussian with that primitive's mean and variance, evaluates the
//! output forms numerically, and accumulates sample moments. For linear
//! networks the first and second moments of these classical samples coincide
//! with the quantum ones, squeezed primitives included.
//!
//! Shot `k` draws from a ChaCha8 stream `k` keyed by the seed, and shots are
//! grouped into a fixed number of batches that are merged in index order, so
//! results do not depend on thread count or scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::analysis::gaussian_fidelity;
use crate::error::{Error, Result};
use crate::protocol::{Protocol, Role};
use crate::quad::{Axis, LinearForm, Network};
use crate::scalar::Scalar;

/// Number of batches used for the batch-means standard error.
pub const BATCHES: u64 = 100;

/// Below this many shots the estimate is flagged as low confidence.
pub const MIN_CONFIDENT_SHOTS: u64 = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct McConfig {
    pub shots: u64,
    pub seed: u64,
}

impl McConfig {
    pub fn new(shots: u64, seed: u64) -> Result<Self> {
        if shots == 0 {
            return Err(Error::InvalidParameter("shots must be at least 1".into()));
        }
        Ok(McConfig { shots, seed })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Serial,
    Parallel,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate<T> {
    pub mean_x: T,
    pub mean_y: T,
    pub var_x: T,
    pub var_y: T,
    pub fidelity: T,
    /// Batch-means standard error; infinite when fewer than two batches exist.
    pub stderr_fidelity: T,
    pub shots: u64,
    pub low_confidence: bool,
}

impl<T: Scalar> McEstimate<T> {
    /// `(fidelity − exact) / stderr`, or NaN without a usable standard error.
    pub fn z_score(&self, exact: T) -> T {
        if self.stderr_fidelity.is_finite() && self.stderr_fidelity > T::zero() {
            (self.fidelity - exact) / self.stderr_fidelity
        } else {
            T::nan()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McOutput<T> {
    pub role: Role,
    pub index: usize,
    pub target: (T, T),
    pub exact_fidelity: T,
    pub estimate: McEstimate<T>,
}

/// Sample mean and variance of one linear form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FormMoments<T> {
    pub mean: T,
    pub variance: T,
    pub shots: u64,
}

#[derive(Debug, Clone, Copy)]
struct Welford<T> {
    count: u64,
    mean: T,
    m2: T,
}

impl<T: Scalar> Welford<T> {
    fn new() -> Self {
        Welford { count: 0, mean: T::zero(), m2: T::zero() }
    }

    fn push(&mut self, v: T) {
        self.count += 1;
        let delta = v - self.mean;
        self.mean = self.mean + delta / T::from_u64(self.count).unwrap();
        self.m2 = self.m2 + delta * (v - self.mean);
    }

    fn merge(&mut self, other: &Self) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let (na, nb) = (T::from_u64(self.count).unwrap(), T::from_u64(other.count).unwrap());
        let n = na + nb;
        let delta = other.mean - self.mean;
        self.mean = self.mean + delta * nb / n;
        self.m2 = self.m2 + other.m2 + delta * delta * na * nb / n;
        self.count += other.count;
    }

    /// Unbiased sample variance; zero for a single sample.
    fn variance(&self) -> T {
        if self.count > 1 {
            self.m2 / T::from_u64(self.count - 1).unwrap()
        } else {
            T::zero()
        }
    }
}

struct Sampler<T> {
    /// Per primitive: `(mean_x, sd_x, mean_y, sd_y)`.
    sources: Vec<(T, T, T, T)>,
    /// Per form: constant plus `(slot, coeff)` with slot `2·id + axis`.
    forms: Vec<(T, Vec<(usize, T)>)>,
    base: ChaCha8Rng,
}

impl<T: Scalar> Sampler<T> {
    fn new(net: &Network<T>, forms: &[&LinearForm<T>], seed: u64) -> Result<Self> {
        let sources = net
            .primitives()
            .iter()
            .map(|p| (p.mean_x, p.var_x.sqrt(), p.mean_y, p.var_y.sqrt()))
            .collect();
        let mut compiled = Vec::with_capacity(forms.len());
        for f in forms {
            let mut terms = Vec::with_capacity(f.len());
            for (p, axis, c) in f.terms() {
                net.primitive(p)?;
                let slot = 2 * p.0 + if axis == Axis::X { 0 } else { 1 };
                terms.push((slot, c));
            }
            compiled.push((f.constant(), terms));
        }
        Ok(Sampler { sources, forms: compiled, base: ChaCha8Rng::seed_from_u64(seed) })
    }

    fn run_batch(&self, shots: std::ops::Range<u64>) -> Vec<Welford<T>> {
        let mut acc = vec![Welford::new(); self.forms.len()];
        let mut values = vec![T::zero(); 2 * self.sources.len()];
        for k in shots {
            let mut rng = self.base.clone();
            rng.set_stream(k);
            for (i, &(mx, sx, my, sy)) in self.sources.iter().enumerate() {
                values[2 * i] = mx + sx * T::standard_normal(&mut rng);
                values[2 * i + 1] = my + sy * T::standard_normal(&mut rng);
            }
            for (a, (c0, terms)) in acc.iter_mut().zip(&self.forms) {
                let v = terms.iter().fold(*c0, |s, &(slot, c)| s + c * values[slot]);
                a.push(v);
            }
        }
        acc
    }

    fn run(&self, cfg: McConfig, exec: Execution) -> Vec<Vec<Welford<T>>> {
        let batches = cfg.shots.min(BATCHES);
        let bounds = |b: u64| (b * cfg.shots / batches)..((b + 1) * cfg.shots / batches);
        match exec {
            Execution::Serial => (0..batches).map(|b| self.run_batch(bounds(b))).collect(),
            Execution::Parallel => (0..batches).into_par_iter().map(|b| self.run_batch(bounds(b))).collect(),
        }
    }
}

fn merged<T: Scalar>(batches: &[Vec<Welford<T>>], width: usize) -> Vec<Welford<T>> {
    let mut total = vec![Welford::new(); width];
    for batch in batches {
        for (t, b) in total.iter_mut().zip(batch) {
            t.merge(b);
        }
    }
    total
}

/// Sample moments of arbitrary linear forms over `net`'s primitives.
pub fn sample_forms<T: Scalar>(
    net: &Network<T>,
    forms: &[&LinearForm<T>],
    cfg: McConfig,
    exec: Execution,
) -> Result<Vec<FormMoments<T>>> {
    McConfig::new(cfg.shots, cfg.seed)?;
    let sampler = Sampler::new(net, forms, cfg.seed)?;
    let batches = sampler.run(cfg, exec);
    Ok(merged(&batches, forms.len())
        .iter()
        .map(|w| FormMoments { mean: w.mean, variance: w.variance(), shots: w.count })
        .collect())
}

fn fidelity_of<T: Scalar>(x: &Welford<T>, y: &Welford<T>, target: (T, T)) -> T {
    gaussian_fidelity(x.variance(), y.variance(), x.mean - target.0, y.mean - target.1)
}

/// Runs `protocol` exactly, then estimates every output statistically.
pub fn mc_run<T: Scalar>(protocol: &Protocol<T>, mean_x: T, mean_y: T, cfg: McConfig) -> Result<Vec<McOutput<T>>> {
    mc_run_with(protocol, mean_x, mean_y, cfg, Execution::Parallel)
}

pub fn mc_run_with<T: Scalar>(
    protocol: &Protocol<T>,
    mean_x: T,
    mean_y: T,
    cfg: McConfig,
    exec: Execution,
) -> Result<Vec<McOutput<T>>> {
    McConfig::new(cfg.shots, cfg.seed)?;
    let result = protocol.run(mean_x, mean_y)?;
    let outputs: Vec<_> = result.outputs().collect();
    let forms: Vec<&LinearForm<T>> = outputs.iter().flat_map(|(_, _, m)| [&m.x, &m.y]).collect();
    let sampler = Sampler::new(&result.network, &forms, cfg.seed)?;
    let batches = sampler.run(cfg, exec);
    let total = merged(&batches, forms.len());

    let mut out = Vec::with_capacity(outputs.len());
    for (slot, &(role, index, _)) in outputs.iter().enumerate() {
        let target = result.target(role);
        let (wx, wy) = (&total[2 * slot], &total[2 * slot + 1]);
        let fidelity = fidelity_of(wx, wy, target);
        let per_batch: Vec<T> = batches
            .iter()
            .map(|b| fidelity_of(&b[2 * slot], &b[2 * slot + 1], target))
            .collect();
        let stderr_fidelity = batch_stderr(&per_batch);
        let exact_fidelity = match role {
            Role::Clone => result.clone_reports[index].value,
            Role::Anticlone => result.anticlone_reports[index].value,
        };
        out.push(McOutput {
            role,
            index,
            target,
            exact_fidelity,
            estimate: McEstimate {
                mean_x: wx.mean,
                mean_y: wy.mean,
                var_x: wx.variance(),
                var_y: wy.variance(),
                fidelity,
                stderr_fidelity,
                shots: wx.count,
                low_confidence: cfg.shots < MIN_CONFIDENT_SHOTS,
            },
        });
    }
    Ok(out)
}

fn batch_stderr<T: Scalar>(values: &[T]) -> T {
    if values.len() < 2 {
        return T::infinity();
    }
    let n = T::from_usize(values.len()).unwrap();
    let mean = values.iter().copied().sum::<T>() / n;
    let ss = values.iter().map(|&v| (v - mean) * (v - mean)).sum::<T>();
    (ss / (n - T::one())).sqrt() / n.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::Network;

    #[test]
    fn zero_shots_rejected() {
        assert!(McConfig::new(0, 1).is_err());
        let p = Protocol::Symmetric { n: 1, m: 2, r: 1.0f64 };
        assert!(matches!(
            mc_run(&p, 0.0, 0.0, McConfig { shots: 0, seed: 1 }),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn single_shot_is_degenerate_but_defined() {
        let p = Protocol::Symmetric { n: 1, m: 2, r: 1.0f64 };
        let out = mc_run(&p, 0.5, 0.5, McConfig::new(1, 3).unwrap()).unwrap();
        assert_eq!(out.len(), 3);
        for o in &out {
            assert_eq!(o.estimate.var_x, 0.0);
            assert_eq!(o.estimate.var_y, 0.0);
            assert!(o.estimate.fidelity.is_finite());
            assert!(o.estimate.low_confidence);
            assert!(o.estimate.z_score(o.exact_fidelity).is_nan());
        }
    }

    #[test]
    fn deterministic_and_partition_independent() {
        let p = Protocol::Asymmetric { r: 0.6f64, r_b: 0.2 };
        let cfg = McConfig::new(20_011, 42).unwrap();
        let a = mc_run_with(&p, 1.0, -1.0, cfg, Execution::Parallel).unwrap();
        let b = mc_run_with(&p, 1.0, -1.0, cfg, Execution::Parallel).unwrap();
        let c = mc_run_with(&p, 1.0, -1.0, cfg, Execution::Serial).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, c);
        let d = mc_run_with(&p, 1.0, -1.0, McConfig::new(20_011, 43).unwrap(), Execution::Serial).unwrap();
        assert_ne!(a, d);
    }

    #[test]
    fn welford_merge_matches_direct() {
        let data: Vec<f64> = (0..57).map(|i| ((i * 37) % 11) as f64 * 0.3 - 1.0).collect();
        let mut whole = Welford::new();
        data.iter().for_each(|&v| whole.push(v));
        let mut a = Welford::new();
        let mut b = Welford::new();
        data[..20].iter().for_each(|&v| a.push(v));
        data[20..].iter().for_each(|&v| b.push(v));
        a.merge(&b);
        assert!((a.mean - whole.mean).abs() < 1e-13);
        assert!((a.variance() - whole.variance()).abs() < 1e-12);
    }

    #[test]
    fn sampled_squeezed_variance() {
        let mut net = Network::<f64>::new();
        let (a, b) = net.new_epr_pair(0.5).unwrap();
        let diff = &a.x - &b.x;
        let m = sample_forms(&net, &[&diff], McConfig::new(200_000, 5).unwrap(), Execution::Parallel).unwrap();
        let exact = net.variance(&diff).unwrap();
        assert!((m[0].variance - exact).abs() / exact < 0.02);
        assert!(m[0].mean.abs() < 0.01);
    }
}
