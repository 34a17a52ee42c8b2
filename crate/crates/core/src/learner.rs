//! Two-step center learner: net screening with local tests (Step I), then
//! decode-cluster-average with a decoder built from the screened list
//! (Step II). Also the evaluation losses and the label-aware baseline.
//!
//! The inference path ([`learn_from`]) only receives [`Observations`], which
//! expose no labels.

use pathfinding::prelude::{kuhn_munkres_min, Matrix};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{sample_gmm, Observations, Privileged};
use crate::codebook::{rate, Codebook};
use crate::decoders::{DecodeOutcome, Decoder, DecoderSpec};
use crate::error::{Error, Result};
use crate::rng::SimRng;
use crate::sphere::{build_net, project_ball_in_place, verify_covering, Net, NetConfig};
use crate::vecops::{dot, sq_dist};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestKind {
    ZeroRate,
    PositiveRate,
}

fn default_phi() -> f64 {
    0.1
}

fn default_threshold_const() -> f64 {
    0.25
}

fn default_r_switch() -> f64 {
    0.2
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LearnerConfig {
    pub eps_i: f64,
    /// Target precision; only used to size budgets left unspecified.
    pub eps: f64,
    /// Step-I sample budget. `None` selects the budget-shape formula with
    /// constants `c1`, `c2`.
    #[serde(default)]
    pub n: Option<usize>,
    /// Step-II sample budget. `None` as for `n`.
    #[serde(default)]
    pub n_bar: Option<usize>,
    #[serde(default = "default_phi")]
    pub phi: f64,
    #[serde(default = "one")]
    pub c1: f64,
    #[serde(default = "one")]
    pub c2: f64,
    /// `None` picks the test from the rate regime.
    #[serde(default)]
    pub test_kind: Option<TestKind>,
    /// Step-II decoder. `None` picks the mismatched decoder of the regime
    /// with the default thresholds.
    #[serde(default)]
    pub step2_decoder: Option<DecoderSpec>,
    /// Factor c in the Step-I retention rule count ≥ c·N/k.
    #[serde(default = "default_threshold_const")]
    pub threshold_const: f64,
    /// Rates at or above this value (nats/dim) use the positive-rate tools.
    #[serde(default = "default_r_switch")]
    pub r_switch: f64,
    #[serde(default)]
    pub net: NetConfig,
    /// Probes for a post-hoc covering check of the net; 0 skips it.
    #[serde(default)]
    pub covering_probes: usize,
    /// Feed the Step-I samples to Step II instead of fresh ones. Experimental.
    #[serde(default)]
    pub reuse_samples: bool,
}

impl LearnerConfig {
    pub fn new(eps_i: f64, eps: f64) -> Self {
        LearnerConfig {
            eps_i,
            eps,
            n: None,
            n_bar: None,
            phi: default_phi(),
            c1: 1.0,
            c2: 1.0,
            test_kind: None,
            step2_decoder: None,
            threshold_const: default_threshold_const(),
            r_switch: default_r_switch(),
            net: NetConfig::default(),
            covering_probes: 0,
            reuse_samples: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps_i > 0.0 && self.eps_i < 0.5) {
            return Err(Error::config("eps_i", format!("must lie in (0, 1/2), got {}", self.eps_i)));
        }
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return Err(Error::config("eps", format!("must lie in (0, 1), got {}", self.eps)));
        }
        if !(self.phi > 0.0 && self.phi < 1.0) {
            return Err(Error::config("phi", format!("must lie in (0, 1), got {}", self.phi)));
        }
        if self.n == Some(0) {
            return Err(Error::config("n", "must be at least 1"));
        }
        if self.n_bar == Some(0) {
            return Err(Error::config("n_bar", "must be at least 1"));
        }
        if !(self.threshold_const > 0.0) {
            return Err(Error::config("threshold_const", "must be positive"));
        }
        if !(self.c1 >= 0.0 && self.c2 >= 0.0) {
            return Err(Error::config("c1", "budget constants must be non-negative"));
        }
        Ok(())
    }

    pub fn regime_test(&self, rate: f64) -> TestKind {
        self.test_kind.unwrap_or(if rate >= self.r_switch {
            TestKind::PositiveRate
        } else {
            TestKind::ZeroRate
        })
    }

    pub fn regime_decoder(&self, rate: f64) -> DecoderSpec {
        self.step2_decoder.clone().unwrap_or(if rate >= self.r_switch {
            DecoderSpec::MismatchedMmse {
                tau1_factor: DEFAULT_STEP2_TAU1,
                tau2_factor: Some(DEFAULT_STEP2_TAU2),
                eps0: DEFAULT_EPS0,
            }
        } else {
            DecoderSpec::MismatchedCorr {
                eta1: DEFAULT_ETA_TILDE,
                eta2: DEFAULT_ETA_TILDE,
            }
        })
    }

    /// (N, N̄) after filling unspecified budgets from the budget shapes
    /// N = C₁σ²k·ln(1/ε_I)/ε_I² + C₂k·ln(1/φ) and
    /// N̄ = kσ²/ε + C₂k·ε^{−1/2}·ln(1/φ).
    pub fn budgets(&self, k: usize, sigma2: f64) -> (usize, usize) {
        let (kf, lphi) = (k as f64, (1.0 / self.phi).ln());
        let n = self.n.unwrap_or_else(|| {
            let v = self.c1 * sigma2 * kf * (1.0 / self.eps_i).ln() / (self.eps_i * self.eps_i) + self.c2 * kf * lphi;
            (v.ceil() as usize).max(1)
        });
        let n_bar = self.n_bar.unwrap_or_else(|| {
            let v = kf * sigma2 / self.eps + self.c2 * kf * lphi / self.eps.sqrt();
            (v.ceil() as usize).max(1)
        });
        (n, n_bar)
    }
}

/// Default widened correlation thresholds: η₁=0.1, η₂=0.3 shifted by
/// (1+C)√ε₀ with C=1, ε₀=0.0025.
pub const DEFAULT_ETA_TILDE: f64 = 0.2;
pub const DEFAULT_STEP2_TAU1: f64 = 1.2;
pub const DEFAULT_STEP2_TAU2: f64 = 2.0;
pub const DEFAULT_EPS0: f64 = 0.0025;

/// Zero-rate local test 1{d⁻¹⟨Y,X̂⟩ ≥ 1 − ε_I/4}.
pub fn local_test_zero_rate(x_hat: &[f64], y: &[f64], eps_i: f64) -> bool {
    dot(y, x_hat) / x_hat.len() as f64 >= 1.0 - 0.25 * eps_i
}

/// Positive-rate local test 1{d^{−1/2}‖αY − X̂‖ ≤ √(τ + αε_I/2) + η} with
/// η = √(2α²σ²·ln2/d).
pub fn local_test_positive_rate(x_hat: &[f64], y: &[f64], eps_i: f64, sigma2: f64) -> bool {
    let t = LocalTest::new(TestKind::PositiveRate, x_hat.len(), eps_i, sigma2);
    let ay: Vec<f64> = y.iter().map(|v| t.alpha * v).collect();
    t.passes(x_hat, &ay)
}

/// A local test with its thresholds resolved. Positive-rate tests expect the
/// sample already multiplied by α (see [`LocalTest::prepare`]).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LocalTest {
    kind: TestKind,
    alpha: f64,
    // dot ≥ bound for zero rate, sq_dist ≤ bound for positive rate.
    bound: f64,
}

impl LocalTest {
    pub fn new(kind: TestKind, d: usize, eps_i: f64, sigma2: f64) -> Self {
        let df = d as f64;
        match kind {
            TestKind::ZeroRate => LocalTest {
                kind,
                alpha: 1.0,
                bound: 1.0 - 0.25 * eps_i,
            },
            TestKind::PositiveRate => {
                let alpha = 1.0 / (1.0 + sigma2);
                let tau = sigma2 * alpha;
                let eta = (2.0 * alpha * alpha * sigma2 * std::f64::consts::LN_2 / df).sqrt();
                let r = (tau + 0.5 * alpha * eps_i).sqrt() + eta;
                LocalTest {
                    kind,
                    alpha,
                    bound: r * r,
                }
            }
        }
    }

    pub fn kind(&self) -> TestKind {
        self.kind
    }

    /// Scale raw samples as the test expects.
    pub fn prepare(&self, samples: &[f64]) -> Vec<f64> {
        match self.kind {
            TestKind::ZeroRate => samples.to_vec(),
            TestKind::PositiveRate => samples.iter().map(|v| self.alpha * v).collect(),
        }
    }

    #[inline]
    pub fn passes(&self, x_hat: &[f64], prepared_y: &[f64]) -> bool {
        let d = x_hat.len() as f64;
        match self.kind {
            TestKind::ZeroRate => dot(prepared_y, x_hat) / d >= self.bound,
            TestKind::PositiveRate => sq_dist(prepared_y, x_hat) / d <= self.bound,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScreenResult {
    /// Pass count of every net point.
    pub counts: Vec<u32>,
    /// Net indices with count ≥ c·N/k, in net order.
    pub close: Vec<usize>,
}

/// Step I: run the local test of every net point against every sample and
/// keep the points passing at least `threshold_const·N/k` times.
pub fn step1_screen(net: &Net, obs: Observations<'_>, test: &LocalTest, k: usize, threshold_const: f64) -> Result<ScreenResult> {
    if net.is_empty() {
        return Err(Error::param("net", "empty net"));
    }
    if obs.d() != net.d() {
        return Err(Error::param("batch", "sample dimension differs from the net"));
    }
    let prepared = test.prepare(obs.as_flat());
    let d = net.d();
    let counts: Vec<u32> = (0..net.len())
        .into_par_iter()
        .map(|c| {
            let x = net.point(c);
            prepared.chunks_exact(d).filter(|y| test.passes(x, y)).count() as u32
        })
        .collect();
    let cut = threshold_const * obs.len() as f64 / k as f64;
    let close = (0..net.len()).filter(|&c| counts[c] as f64 >= cut).collect();
    Ok(ScreenResult { counts, close })
}

/// Greedy pass in input order: keep a point iff its distance to every
/// already kept point is ≥ `min_dist`. Returns positions into `candidates`.
pub fn separated_subset<P: AsRef<[f64]>>(candidates: &[P], min_dist: f64) -> Result<Vec<usize>> {
    if !(min_dist > 0.0) {
        return Err(Error::param("min_dist", format!("must be positive, got {min_dist}")));
    }
    let mut kept: Vec<usize> = Vec::new();
    for (i, c) in candidates.iter().enumerate() {
        let c = c.as_ref();
        if kept.iter().all(|&j| sq_dist(c, candidates[j].as_ref()).sqrt() >= min_dist) {
            kept.push(i);
        }
    }
    Ok(kept)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Step2Result {
    /// k estimates; entries past the partial codebook size are zero.
    pub estimates: Vec<Vec<f64>>,
    pub cluster_sizes: Vec<usize>,
    pub erasures: usize,
}

/// Step II: decode every sample against `partial`, drop erasures, average
/// each cluster and project onto the ball. Empty clusters and labels beyond
/// the partial codebook give the zero vector.
pub fn step2_cluster_average(partial: &Codebook, obs: Observations<'_>, decoder: &Decoder, k: usize) -> Result<Step2Result> {
    let m = partial.k();
    if m > k {
        return Err(Error::param("partial", format!("partial codebook has {m} > k={k} entries")));
    }
    if partial.d() != obs.d() {
        return Err(Error::param("batch", "sample dimension differs from the partial codebook"));
    }
    let d = obs.d();
    let labels: Vec<DecodeOutcome> = obs
        .as_flat()
        .par_chunks_exact(d)
        .map_init(Vec::new, |buf, y| decoder.decode_with(partial, y, buf))
        .collect();
    let mut sums = vec![vec![0.0; d]; k];
    let mut sizes = vec![0usize; k];
    let mut erasures = 0;
    for (y, out) in obs.iter().zip(&labels) {
        match out {
            DecodeOutcome::Message(l) => {
                sizes[*l] += 1;
                for (s, v) in sums[*l].iter_mut().zip(y) {
                    *s += v;
                }
            }
            DecodeOutcome::Erasure => erasures += 1,
        }
    }
    for (s, &n) in sums.iter_mut().zip(&sizes) {
        if n > 0 {
            let inv = 1.0 / n as f64;
            s.iter_mut().for_each(|v| *v *= inv);
            project_ball_in_place(s);
        }
    }
    Ok(Step2Result {
        estimates: sums,
        cluster_sizes: sizes,
        erasures,
    })
}

fn nearest_sq(x: &[f64], estimates: &[Vec<f64>]) -> f64 {
    if estimates.is_empty() {
        return dot(x, x);
    }
    estimates.iter().map(|e| sq_dist(x, e)).fold(f64::INFINITY, f64::min)
}

fn per_center_losses(cb: &Codebook, estimates: &[Vec<f64>]) -> Vec<f64> {
    let d = cb.d() as f64;
    cb.centers().map(|x| nearest_sq(x, estimates) / d).collect()
}

/// (1/k)·Σ_i min_j d⁻¹‖X_i − X̂_j‖². An empty list counts as the single
/// estimate 0.
pub fn loss_avg(cb: &Codebook, estimates: &[Vec<f64>]) -> f64 {
    let l = per_center_losses(cb, estimates);
    let max = l.iter().copied().fold(0.0, f64::max);
    (l.iter().sum::<f64>() / l.len() as f64).min(max)
}

/// max_i min_j d⁻¹‖X_i − X̂_j‖².
pub fn loss_max(cb: &Codebook, estimates: &[Vec<f64>]) -> f64 {
    per_center_losses(cb, estimates).into_iter().fold(0.0, f64::max)
}

/// Label-aware baseline: per-label sample means projected onto the ball;
/// labels without samples give 0.
pub fn genie_estimator(batch: Privileged<'_>) -> Vec<Vec<f64>> {
    let (d, k) = (batch.d(), batch.k());
    let mut sums = vec![vec![0.0; d]; k];
    let mut sizes = vec![0usize; k];
    for (y, l) in batch.iter() {
        sizes[l] += 1;
        for (s, v) in sums[l].iter_mut().zip(y) {
            *s += v;
        }
    }
    for (s, &n) in sums.iter_mut().zip(&sizes) {
        if n > 0 {
            let inv = 1.0 / n as f64;
            s.iter_mut().for_each(|v| *v *= inv);
            project_ball_in_place(s);
        }
    }
    sums
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatchResult {
    /// `matching[l]` is the true index assigned to candidate l.
    pub matching: Vec<usize>,
    /// d⁻¹‖candidate_l − X_matching[l]‖².
    pub matched_sq_dists: Vec<f64>,
    /// Whether pair l is within the radius.
    pub certified: Vec<bool>,
    /// Sorted true indices of the certified pairs.
    pub index_set: Vec<usize>,
}

impl MatchResult {
    pub fn fully_certified(&self) -> bool {
        self.certified.iter().all(|&c| c)
    }
}

// Fixed-point scale of normalized squared distances (≤ 4) for the integer
// assignment solver, and the surcharge on pairs beyond the radius. The
// surcharge exceeds any sum of in-radius costs, so the solver first
// maximizes the number of certified pairs.
const COST_SCALE: f64 = (1u64 << 32) as f64;
const OUT_OF_RADIUS: i64 = 1 << 50;

/// Minimum-cost injection of the candidates into the true centers, giving
/// priority to pairs with squared distance ≤ `radius_sq` (absolute units).
pub fn match_centers(cb: &Codebook, candidates: &Codebook, radius_sq: f64) -> Result<MatchResult> {
    let (m, k) = (candidates.k(), cb.k());
    if m > k {
        return Err(Error::InvalidMatching(format!("{m} candidates cannot be injected into {k} centers")));
    }
    if candidates.d() != cb.d() {
        return Err(Error::InvalidMatching("candidate dimension differs".into()));
    }
    if m == 0 {
        return Ok(MatchResult {
            matching: vec![],
            matched_sq_dists: vec![],
            certified: vec![],
            index_set: vec![],
        });
    }
    let d = cb.d() as f64;
    let sq: Vec<f64> = (0..m)
        .into_par_iter()
        .flat_map_iter(|l| {
            let c = candidates.center(l);
            cb.centers().map(move |x| sq_dist(c, x)).collect::<Vec<_>>()
        })
        .collect();
    let weights: Vec<i64> = sq
        .iter()
        .map(|&s| {
            let base = (s / d * COST_SCALE).round() as i64;
            if s <= radius_sq {
                base
            } else {
                base + OUT_OF_RADIUS
            }
        })
        .collect();
    let matrix = Matrix::from_vec(m, k, weights).map_err(|e| Error::InvalidMatching(e.to_string()))?;
    let (_, matching) = kuhn_munkres_min(&matrix);
    let matched_sq_dists: Vec<f64> = matching.iter().enumerate().map(|(l, &i)| sq[l * k + i] / d).collect();
    let certified: Vec<bool> = matching.iter().enumerate().map(|(l, &i)| sq[l * k + i] <= radius_sq).collect();
    let mut index_set: Vec<usize> = matching.iter().zip(&certified).filter(|(_, &c)| c).map(|(&i, _)| i).collect();
    index_set.sort_unstable();
    Ok(MatchResult {
        matching,
        matched_sq_dists,
        certified,
        index_set,
    })
}

/// Output of the label-free part of the learner.
#[derive(Clone, Debug, PartialEq)]
pub struct Learned {
    pub estimates: Vec<Vec<f64>>,
    /// Step-I list X̃ (at most k entries).
    pub partial: Codebook,
    pub net_size: usize,
    pub t_close: usize,
    /// Size of the separated subset before truncation to k.
    pub separated: usize,
    pub step2_erasures: usize,
    pub step2_samples: usize,
    /// Net indices of T_Close, for diagnostics.
    pub close_indices: Vec<usize>,
}

/// Steps I and II on given observation batches.
pub fn learn_from(
    net: &Net,
    k: usize,
    sigma2: f64,
    cfg: &LearnerConfig,
    step1: Observations<'_>,
    step2: Observations<'_>,
) -> Result<Learned> {
    cfg.validate()?;
    let d = net.d();
    let r = rate(d, k);
    let test = LocalTest::new(cfg.regime_test(r), d, cfg.eps_i, sigma2);
    let screen = step1_screen(net, step1, &test, k, cfg.threshold_const)?;

    // Most confident candidates first; ties keep net order.
    let mut order = screen.close.clone();
    order.sort_by(|&a, &b| screen.counts[b].cmp(&screen.counts[a]).then(a.cmp(&b)));
    let points: Vec<&[f64]> = order.iter().map(|&c| net.point(c)).collect();
    let kept = separated_subset(&points, 2.0 * (cfg.eps_i * d as f64).sqrt())?;
    let separated = kept.len();
    let partial = Codebook::from_centers(d, kept.iter().take(k).map(|&i| points[i].to_vec()).collect())?;

    let decoder = cfg.regime_decoder(r).build(sigma2)?;
    let s2 = step2_cluster_average(&partial, step2, &decoder, k)?;
    Ok(Learned {
        estimates: s2.estimates,
        partial,
        net_size: net.len(),
        t_close: screen.close.len(),
        separated,
        step2_erasures: s2.erasures,
        step2_samples: step2.len(),
        close_indices: screen.close,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScreeningStats {
    pub net_size: usize,
    pub t_close: usize,
    pub separated: usize,
    pub step2_erasure_rate: f64,
    /// T_Close points with squared distance > ε_I·d to every center.
    pub far_candidates: usize,
    /// Centers within squared distance ε_I·d of some T_Close point.
    pub covered_centers: usize,
    /// Step-I list entries certified within squared distance ε_I·d.
    pub certified: usize,
    pub net_coverage: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LearnerResult {
    pub estimates: Vec<Vec<f64>>,
    pub partial: Codebook,
    pub m: usize,
    pub loss_avg: f64,
    pub loss_max: f64,
    pub genie_loss: f64,
    pub n: usize,
    pub n_bar: usize,
    pub stats: ScreeningStats,
}

/// Full pipeline: net, Step-I batch, screening, Step-II batch, clustering,
/// then evaluation against the true codebook and the genie on all samples.
pub fn run_learner(cb: &Codebook, sigma2: f64, cfg: &LearnerConfig, rng: &mut SimRng) -> Result<LearnerResult> {
    cfg.validate()?;
    let (d, k) = (cb.d(), cb.k());
    let (n, n_bar) = cfg.budgets(k, sigma2);
    let net = build_net(d, cfg.eps_i, &cfg.net, rng)?;
    let net_coverage = if cfg.covering_probes > 0 {
        Some(verify_covering(&net, cfg.covering_probes, rng)?)
    } else {
        None
    };
    let b1 = sample_gmm(cb, sigma2, n, rng)?;
    let b2 = if cfg.reuse_samples {
        b1.clone()
    } else {
        sample_gmm(cb, sigma2, n_bar, rng)?
    };
    let learned = learn_from(&net, k, sigma2, cfg, b1.observations(), b2.observations())?;

    let all = if cfg.reuse_samples { b1 } else { b1.concat(&b2)? };
    let genie = genie_estimator(all.privileged());

    let radius_sq = cfg.eps_i * d as f64;
    let close: Vec<&[f64]> = learned.close_indices.iter().map(|&c| net.point(c)).collect();
    let far_candidates = close
        .iter()
        .filter(|c| cb.centers().all(|x| sq_dist(c, x) > radius_sq))
        .count();
    let covered_centers = cb
        .centers()
        .filter(|x| close.iter().any(|c| sq_dist(c, x) <= radius_sq))
        .count();
    let certified = match_centers(cb, &learned.partial, radius_sq)?.index_set.len();

    Ok(LearnerResult {
        loss_avg: loss_avg(cb, &learned.estimates),
        loss_max: loss_max(cb, &learned.estimates),
        genie_loss: loss_avg(cb, &genie),
        m: learned.partial.k(),
        n,
        n_bar,
        stats: ScreeningStats {
            net_size: learned.net_size,
            t_close: learned.t_close,
            separated: learned.separated,
            step2_erasure_rate: learned.step2_erasures as f64 / learned.step2_samples.max(1) as f64,
            far_candidates,
            covered_centers,
            certified,
            net_coverage,
        },
        estimates: learned.estimates,
        partial: learned.partial,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{sample_noiseless, LabelMode};
    use crate::codebook::sample_codebook;
    use crate::rng::rng_from_seed;

    fn orthogonal(d: usize, k: usize) -> Codebook {
        let s = (d as f64).sqrt();
        Codebook::from_centers(
            d,
            (0..k)
                .map(|i| {
                    let mut v = vec![0.0; d];
                    v[i] = s;
                    v
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn zero_rate_test_examples() {
        let x = vec![1.0, -1.0, 1.0, 1.0];
        assert!(local_test_zero_rate(&x, &x, 0.3));
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        assert!(!local_test_zero_rate(&x, &neg, 0.49));
    }

    #[test]
    fn positive_rate_test_examples() {
        let x = vec![1.0, -1.0, 1.0, 1.0];
        let sigma2 = 0.7;
        let alpha = 1.0 / (1.0 + sigma2);
        let y: Vec<f64> = x.iter().map(|v| v / alpha).collect();
        assert!(local_test_positive_rate(&x, &y, 0.2, sigma2));
        let far: Vec<f64> = x.iter().map(|v| -10.0 * v / alpha).collect();
        assert!(!local_test_positive_rate(&x, &far, 0.2, sigma2));
    }

    #[test]
    fn separated_subset_examples() {
        let same = vec![vec![1.0, 0.0]; 5];
        assert_eq!(separated_subset(&same, 0.1).unwrap(), vec![0]);
        let s = 2f64.sqrt();
        let pair = vec![vec![s, 0.0], vec![0.0, s]];
        assert_eq!(separated_subset(&pair, 2.0).unwrap(), vec![0, 1]);
        let cb = orthogonal(4, 4);
        let pts: Vec<&[f64]> = cb.centers().collect();
        assert_eq!(separated_subset(&pts, 2.0).unwrap().len(), 4);
        assert!(separated_subset(&pts, 0.0).is_err());
    }

    #[test]
    fn loss_examples() {
        let mut rng = rng_from_seed(3);
        let cb = sample_codebook(10, 6, &mut rng).unwrap();
        let est: Vec<Vec<f64>> = cb.centers().map(|c| c.to_vec()).collect();
        assert_eq!(loss_avg(&cb, &est), 0.0);
        assert_eq!(loss_max(&cb, &est), 0.0);
        let zeros = vec![vec![0.0; 10]; 6];
        assert!((loss_avg(&cb, &zeros) - 1.0).abs() < 1e-12);
        let mut rev = est.clone();
        rev.reverse();
        assert_eq!(loss_avg(&cb, &rev), 0.0);
        let mut missing = est.clone();
        missing[2] = vec![0.0; 10];
        assert!(loss_max(&cb, &missing) >= 1.0 - 1e-12);
    }

    #[test]
    fn genie_recovers_noiseless_centers() {
        let mut rng = rng_from_seed(5);
        let cb = sample_codebook(8, 4, &mut rng).unwrap();
        let batch = sample_noiseless(&cb, 40, LabelMode::Stratified, &mut rng).unwrap();
        let est = genie_estimator(batch.privileged());
        assert!(loss_avg(&cb, &est) < 1e-24);
    }

    #[test]
    fn matching_examples() {
        let mut rng = rng_from_seed(9);
        let cb = sample_codebook(8, 5, &mut rng).unwrap();
        let m = match_centers(&cb, &cb, 0.01 * 8.0).unwrap();
        assert_eq!(m.matching, vec![0, 1, 2, 3, 4]);
        assert!(m.fully_certified());

        let antipode: Vec<f64> = cb.center(0).iter().map(|v| -v).collect();
        let far = Codebook::from_centers(8, vec![antipode, cb.center(1).to_vec()]).unwrap();
        let m = match_centers(&cb, &far, 0.5).unwrap();
        assert_eq!(m.certified, vec![false, true]);
        assert_eq!(m.index_set, vec![1]);

        // Boundary: exactly on the radius counts.
        let s = 2f64.sqrt();
        let two = Codebook::from_centers(2, vec![vec![s, 0.0], vec![0.0, s]]).unwrap();
        let rot = Codebook::from_centers(2, vec![vec![0.0, -s]]).unwrap();
        let r = sq_dist(two.center(0), rot.center(0));
        assert!(match_centers(&two, &rot, r).unwrap().fully_certified());
        assert!(match_centers(&rot, &two, 1.0).is_err());
    }

    #[test]
    fn matching_prefers_certificates_over_cost() {
        // Pure minimum cost would pair (0→B, 1→A) with nothing certified.
        let r = 2f64.sqrt();
        let at = |deg: f64| vec![r * deg.to_radians().cos(), r * deg.to_radians().sin()];
        let cb = Codebook::from_centers(2, vec![at(0.0), at(90.0)]).unwrap();
        let cands = Codebook::from_centers(2, vec![at(30.0), at(-60.0)]).unwrap();
        let m = match_centers(&cb, &cands, 1.0).unwrap();
        assert_eq!(m.matching, vec![0, 1]);
        assert_eq!(m.certified, vec![true, false]);
    }

    #[test]
    fn step2_noiseless_with_true_codebook() {
        let mut rng = rng_from_seed(1);
        let cb = sample_codebook(16, 4, &mut rng).unwrap();
        let batch = sample_noiseless(&cb, 40, LabelMode::Stratified, &mut rng).unwrap();
        let s = step2_cluster_average(&cb, batch.observations(), &Decoder::Nn, 4).unwrap();
        for (e, c) in s.estimates.iter().zip(cb.centers()) {
            assert!(sq_dist(e, c) < 1e-20);
        }
        assert_eq!(s.erasures, 0);
    }

    #[test]
    fn step2_all_erasures_gives_unit_loss() {
        let mut rng = rng_from_seed(2);
        let cb = sample_codebook(16, 4, &mut rng).unwrap();
        let batch = crate::channel::sample_gmm(&cb, 1.0, 200, &mut rng).unwrap();
        let s = step2_cluster_average(&Codebook::empty(16), batch.observations(), &Decoder::Nn, 4).unwrap();
        assert_eq!(s.erasures, 200);
        assert!((loss_avg(&cb, &s.estimates) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn budgets_follow_shapes() {
        let mut cfg = LearnerConfig::new(0.25, 0.05);
        cfg.phi = 0.1;
        let (n, nb) = cfg.budgets(4, 1.0);
        let n_exp = (4.0 * 4f64.ln() / 0.0625 + 4.0 * 10f64.ln()).ceil() as usize;
        let nb_exp = (4.0 / 0.05 + 4.0 * 10f64.ln() / 0.05f64.sqrt()).ceil() as usize;
        assert_eq!((n, nb), (n_exp, nb_exp));
        cfg.n = Some(7);
        cfg.n_bar = Some(9);
        assert_eq!(cfg.budgets(4, 1.0), (7, 9));
    }

    #[test]
    fn config_rejects_bad_values() {
        assert!(LearnerConfig::new(0.5, 0.1).validate().is_err());
        assert!(LearnerConfig::new(0.2, 0.0).validate().is_err());
        let mut c = LearnerConfig::new(0.2, 0.1);
        c.phi = 1.0;
        assert!(c.validate().is_err());
        assert!(serde_json::from_str::<LearnerConfig>(r#"{"eps_i":0.2,"eps":0.1,"nbar":3}"#).is_err());
    }
}
