//! Class posteriors under one structural pattern and the posterior gap
//! between two patterns that observe the same aggregated feature.
//!
//! With pattern `(p, q)` the class means are
//! `m₁ = (pμ₁ + qμ₂)/(p+q)` and `m₂ = (qμ₁ + pμ₂)/(p+q)`, and with equal
//! priors `P(c₁ | f) = 1 / (1 + exp((‖f−m₁‖² − ‖f−m₂‖²)/σ²))`.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{l2_dist, sq_dist};
use crate::rng::substream;

fn pattern_means(p: f64, q: f64, mu1: &[f64], mu2: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let s = p + q;
    if !(s > 0.0) {
        return Err(Error::invalid("pattern needs p + q > 0"));
    }
    let m1 = mu1.iter().zip(mu2).map(|(a, b)| (p * a + q * b) / s).collect();
    let m2 = mu1.iter().zip(mu2).map(|(a, b)| (q * a + p * b) / s).collect();
    Ok((m1, m2))
}

/// `(P(c₁ | f), P(c₂ | f))`. The smaller one is evaluated directly and the
/// larger as its complement, so the pair sums to exactly 1.
pub fn posterior_pair(pattern: (f64, f64), mu1: &[f64], mu2: &[f64], sigma: f64, f: &[f64]) -> Result<(f64, f64)> {
    if !(sigma > 0.0) {
        return Err(Error::invalid(format!("sigma must be positive, got {sigma}")));
    }
    if mu1.len() != mu2.len() || f.len() != mu1.len() {
        return Err(Error::invalid("posterior inputs have mismatched dimensions"));
    }
    let (m1, m2) = pattern_means(pattern.0, pattern.1, mu1, mu2)?;
    let s2 = sigma * sigma;
    let d = (sq_dist(f, &m1) - sq_dist(f, &m2)) / s2;
    let small = 1.0 / (1.0 + d.abs().exp());
    Ok(if d > 0.0 { (small, 1.0 - small) } else { (1.0 - small, small) })
}

pub fn posterior(pattern: (f64, f64), mu1: &[f64], mu2: &[f64], sigma: f64, f: &[f64]) -> Result<f64> {
    posterior_pair(pattern, mu1, mu2, sigma, f).map(|p| p.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternPair {
    pub first: (f64, f64),
    pub second: (f64, f64),
    pub mu1: Vec<f64>,
    pub mu2: Vec<f64>,
    pub sigma: f64,
}

impl PatternPair {
    pub fn validate(&self) -> Result<()> {
        for (p, q) in [self.first, self.second] {
            if !(0.0..=1.0).contains(&p) || !(0.0..=1.0).contains(&q) {
                return Err(Error::invalid("pattern rates must lie in [0,1]"));
            }
        }
        if ((self.first.0 + self.first.1) - (self.second.0 + self.second.1)).abs() > 1e-12 {
            return Err(Error::invalid("patterns violate the equal-degree constraint"));
        }
        if !(self.sigma > 0.0) {
            return Err(Error::invalid("sigma must be positive"));
        }
        Ok(())
    }

    pub fn rho(&self) -> f64 {
        l2_dist(&self.mu1, &self.mu2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lemma1Check {
    pub lhs: f64,
    pub rhs: f64,
    pub epsilon: f64,
    pub holds: bool,
}

/// `|P₁(c₁ | f_u) − P₂(c₁ | f_v)|` against
/// `ρ/(√(2π)σ) · (ε + |h_u − h_v| ρ)` with `ε = ‖f_u − f_v‖`.
pub fn lemma1_check(pair: &PatternPair, f_u: &[f64], f_v: &[f64]) -> Result<Lemma1Check> {
    pair.validate()?;
    let pu = posterior(pair.first, &pair.mu1, &pair.mu2, pair.sigma, f_u)?;
    let pv = posterior(pair.second, &pair.mu1, &pair.mu2, pair.sigma, f_v)?;
    let lhs = (pu - pv).abs();
    let epsilon = l2_dist(f_u, f_v);
    let h = |(p, q): (f64, f64)| p / (p + q);
    let rho = pair.rho();
    let rhs = rho / ((2.0 * PI).sqrt() * pair.sigma) * (epsilon + (h(pair.first) - h(pair.second)).abs() * rho);
    Ok(Lemma1Check {
        lhs,
        rhs,
        epsilon,
        holds: lhs <= rhs,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepStats {
    pub trials: usize,
    pub violations: usize,
    pub violation_rate: f64,
    /// Largest observed `lhs / rhs` over trials with `rhs > 0`.
    pub max_ratio: f64,
    pub mean_lhs: f64,
    pub mean_rhs: f64,
}

/// Random pattern pairs, means and feature pairs. Degrees `p + q` are drawn
/// in (0, 1], homophily ratios uniformly, `σ` in [0.5, 2], coordinates of
/// means and `f_u` from N(0, 1) and `f_v = f_u + N(0, 0.1²)` noise.
pub fn lemma1_sweep(trials: usize, dim: usize, seed: u64) -> Result<SweepStats> {
    if dim == 0 {
        return Err(Error::invalid("dimension must be positive"));
    }
    let mut rng = substream(seed, "lemma1-sweep");
    let normal = |rng: &mut rand_chacha::ChaCha8Rng, scale: f64| -> Vec<f64> {
        (0..dim).map(|_| scale * rng.sample::<f64, _>(StandardNormal)).collect()
    };
    let (mut violations, mut max_ratio, mut sum_l, mut sum_r) = (0usize, 0.0f64, 0.0, 0.0);
    for _ in 0..trials {
        let s: f64 = 1.0 - rng.random::<f64>();
        let (h1, h2): (f64, f64) = (rng.random(), rng.random());
        let sigma = 0.5 + 1.5 * rng.random::<f64>();
        let mu1 = normal(&mut rng, 1.0);
        let mu2 = normal(&mut rng, 1.0);
        let f_u = normal(&mut rng, 1.0);
        let f_v: Vec<f64> = f_u.iter().zip(normal(&mut rng, 0.1)).map(|(a, b)| a + b).collect();
        let pair = PatternPair {
            first: (h1 * s, s - h1 * s),
            second: (h2 * s, s - h2 * s),
            mu1,
            mu2,
            sigma,
        };
        let c = lemma1_check(&pair, &f_u, &f_v)?;
        violations += usize::from(!c.holds);
        if c.rhs > 0.0 {
            max_ratio = max_ratio.max(c.lhs / c.rhs);
        }
        sum_l += c.lhs;
        sum_r += c.rhs;
    }
    let t = trials.max(1) as f64;
    Ok(SweepStats {
        trials,
        violations,
        violation_rate: violations as f64 / t,
        max_ratio,
        mean_lhs: sum_l / t,
        mean_rhs: sum_r / t,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn midpoint_gives_half() {
        let (mu1, mu2) = (vec![1.0, 2.0], vec![-1.0, 0.5]);
        let (m1, m2) = pattern_means(0.7, 0.2, &mu1, &mu2).unwrap();
        let mid: Vec<f64> = m1.iter().zip(&m2).map(|(a, b)| (a + b) / 2.0).collect();
        let p = posterior((0.7, 0.2), &mu1, &mu2, 1.3, &mid).unwrap();
        assert!((p - 0.5).abs() < 1e-15);
    }

    #[test]
    fn far_means_saturate() {
        let (mu1, mu2) = (vec![50.0], vec![-50.0]);
        let (m1, _) = pattern_means(0.9, 0.1, &mu1, &mu2).unwrap();
        let p = posterior((0.9, 0.1), &mu1, &mu2, 1.0, &m1).unwrap();
        assert!((1.0 - p) < 1e-6);
        assert!(posterior((0.9, 0.1), &mu1, &mu2, 0.0, &m1).is_err());
    }

    #[test]
    fn identical_patterns_have_zero_gap() {
        let pair = PatternPair {
            first: (0.6, 0.4),
            second: (0.6, 0.4),
            mu1: vec![1.0, 0.0],
            mu2: vec![0.0, 1.0],
            sigma: 0.8,
        };
        let c = lemma1_check(&pair, &[0.3, 0.1], &[0.3, 0.1]).unwrap();
        assert_eq!(c.lhs, 0.0);
        assert_eq!(c.rhs, 0.0);
        assert!(c.holds);
    }

    #[test]
    fn unequal_degree_rejected() {
        let pair = PatternPair {
            first: (0.6, 0.4),
            second: (0.6, 0.3),
            mu1: vec![1.0],
            mu2: vec![0.0],
            sigma: 1.0,
        };
        assert!(lemma1_check(&pair, &[0.0], &[0.0]).is_err());
    }

    #[test]
    fn sweep_is_deterministic() {
        let a = lemma1_sweep(200, 3, 9).unwrap();
        assert_eq!(a, lemma1_sweep(200, 3, 9).unwrap());
        assert_eq!(a.trials, 200);
    }
}
