//! Channel decoders and Monte Carlo error estimation.
//!
//! Conventions shared by every decoder here:
//! - indices are 0-based positions in the codebook handed to the decoder;
//! - ties in arg-min / arg-max resolve to the lowest index;
//! - threshold decoders accept index i only if i passes the acceptance test
//!   and every other index fails the rejection test, so at most one index can
//!   be accepted; otherwise they return [`DecodeOutcome::Erasure`].

use std::fmt;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::codebook::Codebook;
use crate::error::{Error, Result};
use crate::rng::{derived_rng, standard_normal};
use crate::vecops::{dot, sq_dist};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DecodeOutcome {
    Message(usize),
    Erasure,
}

impl DecodeOutcome {
    pub fn message(self) -> Option<usize> {
        match self {
            DecodeOutcome::Message(i) => Some(i),
            DecodeOutcome::Erasure => None,
        }
    }

    pub fn is_erasure(self) -> bool {
        self == DecodeOutcome::Erasure
    }
}

/// Thresholds of the correlation decoder: accept i iff
/// d⁻¹⟨Y,X_i⟩ ≥ 1−η₁ and d⁻¹⟨Y,X_j⟩ < 1−η₂ for every j ≠ i.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrParams {
    eta1: f64,
    eta2: f64,
}

impl CorrParams {
    pub fn new(eta1: f64, eta2: f64) -> Result<Self> {
        if !(eta1 > 0.0 && eta1 <= eta2 && eta2 < 1.0) {
            return Err(Error::param(
                "eta",
                format!("need 0 < eta1 <= eta2 < 1, got eta1={eta1}, eta2={eta2}"),
            ));
        }
        Ok(CorrParams { eta1, eta2 })
    }

    pub fn eta1(&self) -> f64 {
        self.eta1
    }

    pub fn eta2(&self) -> f64 {
        self.eta2
    }

    /// Thresholds for a codebook whose entries are within squared distance
    /// ε·d of the true centers: η̃₁ = η₁ + (1+C)√ε, η̃₂ = η₂ − (1+C)√ε, where
    /// C·√ε bounds the projected noise on the corruption directions.
    pub fn widened(&self, eps: f64, noise_const: f64) -> Result<Self> {
        if !(eps >= 0.0) || !(noise_const >= 0.0) {
            return Err(Error::param("eps0", "corruption level and noise constant must be non-negative"));
        }
        let shift = (1.0 + noise_const) * eps.sqrt();
        let (t1, t2) = (self.eta1 + shift, self.eta2 - shift);
        if t1 > t2 {
            return Err(Error::param(
                "eps0",
                format!(
                    "corruption consumes the threshold gap: eta1~={t1:.6} > eta2~={t2:.6} (eta1={}, eta2={}, shift={shift:.6})",
                    self.eta1, self.eta2
                ),
            ));
        }
        CorrParams::new(t1, t2)
    }

    /// Upper limit on η₂ for which the zero-rate error analysis applies:
    /// 1 − √(2·ln(k−1)/d + η₁²/σ²) − √(2σ²·ln(k−1)/d).
    pub fn zero_rate_eta2_limit(&self, d: usize, k: usize, sigma2: f64) -> f64 {
        let lk = ((k.max(2) - 1) as f64).ln();
        let df = d as f64;
        1.0 - (2.0 * lk / df + self.eta1 * self.eta1 / sigma2).sqrt() - (2.0 * sigma2 * lk / df).sqrt()
    }

    /// Check the zero-rate feasibility chain 0 < η₁ ≤ η₂ < limit, reporting
    /// the violated bound.
    pub fn check_zero_rate_feasibility(&self, d: usize, k: usize, sigma2: f64) -> Result<()> {
        let limit = self.zero_rate_eta2_limit(d, k, sigma2);
        if self.eta2 < limit {
            Ok(())
        } else {
            Err(Error::param(
                "eta2",
                format!(
                    "eta2={} violates eta2 < 1 - sqrt(2 ln(k-1)/d + eta1^2/sigma2) - sqrt(2 sigma2 ln(k-1)/d) = {limit:.6} (d={d}, k={k}, sigma2={sigma2})",
                    self.eta2
                ),
            ))
        }
    }
}

/// Thresholds of the MMSE decoder: α = 1/(1+σ²), τ = σ²α, τ ≤ τ₁ ≤ τ₂.
/// Accept i iff d⁻¹‖αY−X_i‖² ≤ τ₁ and d⁻¹‖αY−X_j‖² > τ₂ for every j ≠ i.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MmseParams {
    alpha: f64,
    tau: f64,
    tau1: f64,
    tau2: f64,
}

impl MmseParams {
    pub fn new(sigma2: f64, tau1: f64, tau2: f64) -> Result<Self> {
        if !(sigma2 > 0.0) {
            return Err(Error::param("sigma2", format!("must be positive, got {sigma2}")));
        }
        let alpha = 1.0 / (1.0 + sigma2);
        let tau = sigma2 * alpha;
        if !(tau2 >= tau1) {
            return Err(Error::param("tau2", format!("need tau2 >= tau1, got tau1={tau1}, tau2={tau2}")));
        }
        if !(tau1 >= tau) {
            return Err(Error::param("tau1", format!("need tau1 >= tau = {tau}, got {tau1}")));
        }
        Ok(MmseParams { alpha, tau, tau1, tau2 })
    }

    /// τ₁ = f₁·τ, τ₂ = f₂·τ.
    pub fn scaled(sigma2: f64, tau1_factor: f64, tau2_factor: f64) -> Result<Self> {
        let tau = sigma2 / (1.0 + sigma2);
        Self::new(sigma2, tau1_factor * tau, tau2_factor * tau)
    }

    /// τ₁ = c·τ, τ₂ = c²·τ.
    pub fn with_factor(sigma2: f64, c: f64) -> Result<Self> {
        Self::scaled(sigma2, c, c * c)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn tau1(&self) -> f64 {
        self.tau1
    }

    pub fn tau2(&self) -> f64 {
        self.tau2
    }
}

/// MMSE thresholds adapted to a codebook corrupted by at most ε₀·d in squared
/// distance: √τ̃₁ = √τ₁ + √ε₀ and √τ̃₂ = √τ₂ − √ε₀. Requires
/// 2√ε₀ < √τ₂ − √τ₁.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MismatchedMmseParams {
    base: MmseParams,
    eps0: f64,
    tau1_tilde: f64,
    tau2_tilde: f64,
}

impl MismatchedMmseParams {
    pub fn new(base: MmseParams, eps0: f64) -> Result<Self> {
        if !(eps0 >= 0.0) {
            return Err(Error::param("eps0", format!("must be non-negative, got {eps0}")));
        }
        if eps0 == 0.0 {
            return Ok(MismatchedMmseParams {
                base,
                eps0,
                tau1_tilde: base.tau1,
                tau2_tilde: base.tau2,
            });
        }
        let (r1, r2, re) = (base.tau1.sqrt(), base.tau2.sqrt(), eps0.sqrt());
        if !(2.0 * re < r2 - r1) {
            return Err(Error::param(
                "eps0",
                format!(
                    "gap consumed: 2*sqrt(eps0)={:.6} >= sqrt(tau2)-sqrt(tau1)={:.6}",
                    2.0 * re,
                    r2 - r1
                ),
            ));
        }
        let t1 = (r1 + re) * (r1 + re);
        let t2 = (r2 - re) * (r2 - re);
        Ok(MismatchedMmseParams {
            base,
            eps0,
            tau1_tilde: t1,
            tau2_tilde: t2,
        })
    }

    pub fn base(&self) -> &MmseParams {
        &self.base
    }

    pub fn eps0(&self) -> f64 {
        self.eps0
    }

    pub fn tau1_tilde(&self) -> f64 {
        self.tau1_tilde
    }

    pub fn tau2_tilde(&self) -> f64 {
        self.tau2_tilde
    }
}

/// Nearest-neighbour (maximum likelihood) decoding; `None` only for an empty
/// codebook.
pub fn decode_nn(cb: &Codebook, y: &[f64]) -> Option<usize> {
    debug_assert_eq!(y.len(), cb.d());
    let mut best = f64::INFINITY;
    let mut arg = None;
    for (i, x) in cb.centers().enumerate() {
        let s = sq_dist(y, x);
        if s < best {
            best = s;
            arg = Some(i);
        }
    }
    arg
}

// Accept the unique index with score ≥ accept_at when no other index reaches
// reject_at (accept_at ≥ reject_at). Scores are computed lazily so the scan
// stops at the second contender.
#[inline]
fn unique_high_score(k: usize, accept_at: f64, reject_at: f64, score: impl Fn(usize) -> f64) -> DecodeOutcome {
    let mut contender = None;
    let mut contender_score = f64::NEG_INFINITY;
    for i in 0..k {
        let s = score(i);
        if s >= reject_at {
            if contender.is_some() {
                return DecodeOutcome::Erasure;
            }
            contender = Some(i);
            contender_score = s;
        }
    }
    match contender {
        Some(i) if contender_score >= accept_at => DecodeOutcome::Message(i),
        _ => DecodeOutcome::Erasure,
    }
}

// Mirror image for distances: accept the unique index with dist ≤ accept_at
// when every other index has dist > reject_at (accept_at ≤ reject_at).
#[inline]
fn unique_low_score(k: usize, accept_at: f64, reject_at: f64, score: impl Fn(usize) -> f64) -> DecodeOutcome {
    let mut contender = None;
    let mut contender_score = f64::INFINITY;
    for i in 0..k {
        let s = score(i);
        if s <= reject_at {
            if contender.is_some() {
                return DecodeOutcome::Erasure;
            }
            contender = Some(i);
            contender_score = s;
        }
    }
    match contender {
        Some(i) if contender_score <= accept_at => DecodeOutcome::Message(i),
        _ => DecodeOutcome::Erasure,
    }
}

fn corr_rule(cb: &Codebook, y: &[f64], eta1: f64, eta2: f64) -> DecodeOutcome {
    let d = cb.d() as f64;
    unique_high_score(cb.k(), 1.0 - eta1, 1.0 - eta2, |i| dot(y, cb.center(i)) / d)
}

fn mmse_rule(cb: &Codebook, scaled_y: &[f64], tau1: f64, tau2: f64) -> DecodeOutcome {
    let d = cb.d() as f64;
    unique_low_score(cb.k(), tau1, tau2, |i| sq_dist(scaled_y, cb.center(i)) / d)
}

fn scale_into(y: &[f64], alpha: f64, out: &mut Vec<f64>) {
    out.clear();
    out.extend(y.iter().map(|v| alpha * v));
}

pub fn decode_corr(cb: &Codebook, y: &[f64], p: &CorrParams) -> DecodeOutcome {
    corr_rule(cb, y, p.eta1, p.eta2)
}

pub fn decode_mmse(cb: &Codebook, y: &[f64], p: &MmseParams) -> DecodeOutcome {
    let mut buf = Vec::with_capacity(y.len());
    decode_mmse_with(cb, y, p, &mut buf)
}

fn decode_mmse_with(cb: &Codebook, y: &[f64], p: &MmseParams, buf: &mut Vec<f64>) -> DecodeOutcome {
    scale_into(y, p.alpha, buf);
    mmse_rule(cb, buf, p.tau1, p.tau2)
}

/// Correlation rule over a partial / corrupted codebook. `p` holds the
/// already-widened thresholds η̃ (see [`CorrParams::widened`]).
pub fn decode_mismatched_corr(partial: &Codebook, y: &[f64], p: &CorrParams) -> DecodeOutcome {
    corr_rule(partial, y, p.eta1, p.eta2)
}

pub fn decode_mismatched_mmse(partial: &Codebook, y: &[f64], p: &MismatchedMmseParams) -> DecodeOutcome {
    let mut buf = Vec::with_capacity(y.len());
    decode_mismatched_mmse_with(partial, y, p, &mut buf)
}

fn decode_mismatched_mmse_with(
    partial: &Codebook,
    y: &[f64],
    p: &MismatchedMmseParams,
    buf: &mut Vec<f64>,
) -> DecodeOutcome {
    scale_into(y, p.base.alpha, buf);
    mmse_rule(partial, buf, p.tau1_tilde, p.tau2_tilde)
}

/// Every index satisfying the correlation decoder's two conditions, checked
/// literally. Used to audit uniqueness.
pub fn corr_accepting(cb: &Codebook, y: &[f64], p: &CorrParams) -> Vec<usize> {
    let d = cb.d() as f64;
    let scores: Vec<f64> = cb.centers().map(|x| dot(y, x) / d).collect();
    (0..cb.k())
        .filter(|&i| {
            scores[i] >= 1.0 - p.eta1 && scores.iter().enumerate().all(|(j, &s)| j == i || s < 1.0 - p.eta2)
        })
        .collect()
}

/// MMSE counterpart of [`corr_accepting`].
pub fn mmse_accepting(cb: &Codebook, y: &[f64], p: &MmseParams) -> Vec<usize> {
    let d = cb.d() as f64;
    let ay: Vec<f64> = y.iter().map(|v| p.alpha * v).collect();
    let dists: Vec<f64> = cb.centers().map(|x| sq_dist(&ay, x) / d).collect();
    (0..cb.k())
        .filter(|&i| dists[i] <= p.tau1 && dists.iter().enumerate().all(|(j, &s)| j == i || s > p.tau2))
        .collect()
}

/// Serializable decoder description, as found in experiment configs.
///
/// MMSE thresholds are given relative to τ because τ depends on the noise
/// level of each grid point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DecoderSpec {
    Nn,
    Corr {
        eta1: f64,
        eta2: f64,
    },
    Mmse {
        #[serde(default = "default_mmse_c")]
        tau1_factor: f64,
        /// Defaults to tau1_factor².
        #[serde(default)]
        tau2_factor: Option<f64>,
    },
    /// Thresholds are the widened η̃₁, η̃₂.
    MismatchedCorr {
        eta1: f64,
        eta2: f64,
    },
    MismatchedMmse {
        #[serde(default = "default_mmse_c")]
        tau1_factor: f64,
        #[serde(default)]
        tau2_factor: Option<f64>,
        #[serde(default)]
        eps0: f64,
    },
}

pub const DEFAULT_MMSE_C: f64 = 1.2;

fn default_mmse_c() -> f64 {
    DEFAULT_MMSE_C
}

impl DecoderSpec {
    pub fn mmse(c: f64) -> Self {
        DecoderSpec::Mmse {
            tau1_factor: c,
            tau2_factor: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Resolve noise-dependent thresholds.
    pub fn build(&self, sigma2: f64) -> Result<Decoder> {
        Ok(match *self {
            DecoderSpec::Nn => Decoder::Nn,
            DecoderSpec::Corr { eta1, eta2 } => Decoder::Corr(CorrParams::new(eta1, eta2)?),
            DecoderSpec::MismatchedCorr { eta1, eta2 } => Decoder::MismatchedCorr(CorrParams::new(eta1, eta2)?),
            DecoderSpec::Mmse {
                tau1_factor,
                tau2_factor,
            } => Decoder::Mmse(MmseParams::scaled(
                sigma2,
                tau1_factor,
                tau2_factor.unwrap_or(tau1_factor * tau1_factor),
            )?),
            DecoderSpec::MismatchedMmse {
                tau1_factor,
                tau2_factor,
                eps0,
            } => {
                let base = MmseParams::scaled(sigma2, tau1_factor, tau2_factor.unwrap_or(tau1_factor * tau1_factor))?;
                Decoder::MismatchedMmse(MismatchedMmseParams::new(base, eps0)?)
            }
        })
    }

    pub fn kind(&self) -> &'static str {
        match self {
            DecoderSpec::Nn => "nn",
            DecoderSpec::Corr { .. } => "corr",
            DecoderSpec::Mmse { .. } => "mmse",
            DecoderSpec::MismatchedCorr { .. } => "mismatched_corr",
            DecoderSpec::MismatchedMmse { .. } => "mismatched_mmse",
        }
    }
}

impl fmt::Display for DecoderSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DecoderSpec::Nn => write!(f, "nn"),
            DecoderSpec::Corr { eta1, eta2 } | DecoderSpec::MismatchedCorr { eta1, eta2 } => {
                write!(f, "{}(eta1={eta1};eta2={eta2})", self.kind())
            }
            DecoderSpec::Mmse {
                tau1_factor,
                tau2_factor,
            } => write!(
                f,
                "mmse(t1={tau1_factor};t2={})",
                tau2_factor.unwrap_or(tau1_factor * tau1_factor)
            ),
            DecoderSpec::MismatchedMmse {
                tau1_factor,
                tau2_factor,
                eps0,
            } => write!(
                f,
                "mismatched_mmse(t1={tau1_factor};t2={};eps0={eps0})",
                tau2_factor.unwrap_or(tau1_factor * tau1_factor)
            ),
        }
    }
}

/// A decoder with all thresholds resolved.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Decoder {
    Nn,
    Corr(CorrParams),
    Mmse(MmseParams),
    MismatchedCorr(CorrParams),
    MismatchedMmse(MismatchedMmseParams),
}

impl Decoder {
    pub fn decode(&self, cb: &Codebook, y: &[f64]) -> DecodeOutcome {
        let mut buf = Vec::new();
        self.decode_with(cb, y, &mut buf)
    }

    /// Same as [`Decoder::decode`] with a caller-owned scratch buffer.
    pub fn decode_with(&self, cb: &Codebook, y: &[f64], buf: &mut Vec<f64>) -> DecodeOutcome {
        match self {
            Decoder::Nn => decode_nn(cb, y).map_or(DecodeOutcome::Erasure, DecodeOutcome::Message),
            Decoder::Corr(p) => decode_corr(cb, y, p),
            Decoder::MismatchedCorr(p) => decode_mismatched_corr(cb, y, p),
            Decoder::Mmse(p) => decode_mmse_with(cb, y, p, buf),
            Decoder::MismatchedMmse(p) => decode_mismatched_mmse_with(cb, y, p, buf),
        }
    }
}

/// 95% two-sided normal quantile.
const Z95: f64 = 1.959_963_984_540_054;

/// Wilson score interval for `successes` out of `trials` at 95%.
pub fn wilson_interval(successes: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).clamp(0.0, p), (center + half).clamp(p, 1.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorEstimate {
    pub trials: u64,
    /// Decodes that did not return the transmitted index, erasures included.
    pub errors: u64,
    pub erasures: u64,
    pub rho_hat: f64,
    pub erasure_rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl ErrorEstimate {
    pub fn from_counts(trials: u64, errors: u64, erasures: u64) -> Self {
        let (ci_low, ci_high) = wilson_interval(errors, trials);
        ErrorEstimate {
            trials,
            errors,
            erasures,
            rho_hat: errors as f64 / trials as f64,
            erasure_rate: erasures as f64 / trials as f64,
            ci_low,
            ci_high,
        }
    }

    pub fn merge(&self, other: &ErrorEstimate) -> Self {
        Self::from_counts(
            self.trials + other.trials,
            self.errors + other.errors,
            self.erasures + other.erasures,
        )
    }
}

const TRIAL_BLOCK: usize = 256;

/// Minimum number of trials accepted by [`estimate_error_prob`].
pub const MIN_TRIALS: usize = 100;

/// Monte Carlo estimate of the average decoding error ρ_avg(σ²|codebook).
///
/// Trial t draws its label and noise from a stream derived from `(seed, t)`,
/// and counts are reduced as integers, so the result does not depend on the
/// number of worker threads. Erasures count as errors.
pub fn estimate_error_prob(
    cb: &Codebook,
    sigma2: f64,
    decoder: &Decoder,
    trials: usize,
    seed: u64,
) -> Result<ErrorEstimate> {
    if trials < MIN_TRIALS {
        return Err(Error::param("trials", format!("need at least {MIN_TRIALS}, got {trials}")));
    }
    if !(sigma2 >= 0.0) || !sigma2.is_finite() {
        return Err(Error::param("sigma2", format!("must be non-negative, got {sigma2}")));
    }
    if cb.k() < 1 {
        return Err(Error::InvalidCodebook("cannot transmit over an empty codebook".into()));
    }
    let (d, k) = (cb.d(), cb.k());
    let sigma = sigma2.sqrt();
    let blocks = trials.div_ceil(TRIAL_BLOCK);
    let (errors, erasures) = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut y = vec![0.0; d];
            let mut buf = Vec::with_capacity(d);
            let (mut errs, mut eras) = (0u64, 0u64);
            for t in b * TRIAL_BLOCK..((b + 1) * TRIAL_BLOCK).min(trials) {
                let mut rng = derived_rng(seed, &[t as u64]);
                let label = rng.random_range(0..k);
                for (yi, xi) in y.iter_mut().zip(cb.center(label)) {
                    *yi = xi + sigma * standard_normal(&mut rng);
                }
                match decoder.decode_with(cb, &y, &mut buf) {
                    DecodeOutcome::Message(i) if i == label => {}
                    DecodeOutcome::Message(_) => errs += 1,
                    DecodeOutcome::Erasure => {
                        errs += 1;
                        eras += 1;
                    }
                }
            }
            (errs, eras)
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    Ok(ErrorEstimate::from_counts(trials as u64, errors, erasures))
}

/// Per-message success rates of a decoder built on a partial codebook.
///
/// `matching[l]` is the true index approximated by `partial` entry l. A
/// transmission of message i succeeds when the decoder returns l with
/// `matching[l] == i`, or, if i has no approximation, when it erases.
#[derive(Clone, Debug, PartialEq)]
pub struct PApproxProfile {
    pub success: Vec<f64>,
    pub erasure: Vec<f64>,
    pub trials_per_message: usize,
}

impl PApproxProfile {
    pub fn mean_success(&self) -> f64 {
        self.success.iter().sum::<f64>() / self.success.len() as f64
    }

    /// Average of the per-message error probabilities.
    pub fn mean_error(&self) -> f64 {
        1.0 - self.mean_success()
    }
}

pub fn validate_matching(matching: &[usize], m: usize, k: usize) -> Result<()> {
    if matching.len() != m {
        return Err(Error::InvalidMatching(format!(
            "matching has {} entries for a partial codebook of size {m}",
            matching.len()
        )));
    }
    let mut used = vec![false; k];
    for (l, &i) in matching.iter().enumerate() {
        if i >= k {
            return Err(Error::InvalidMatching(format!("entry {l} maps to {i}, out of range for k={k}")));
        }
        if std::mem::replace(&mut used[i], true) {
            return Err(Error::InvalidMatching(format!("index {i} is matched twice")));
        }
    }
    Ok(())
}

pub fn p_approx_profile(
    cb: &Codebook,
    partial: &Codebook,
    matching: &[usize],
    sigma2: f64,
    decoder: &Decoder,
    trials_per_message: usize,
    seed: u64,
) -> Result<PApproxProfile> {
    let k = cb.k();
    validate_matching(matching, partial.k(), k)?;
    if partial.d() != cb.d() {
        return Err(Error::InvalidCodebook("partial codebook dimension differs".into()));
    }
    if trials_per_message == 0 {
        return Err(Error::param("trials_per_message", "must be positive"));
    }
    if !(sigma2 >= 0.0) {
        return Err(Error::param("sigma2", format!("must be non-negative, got {sigma2}")));
    }
    let mut inverse = vec![None; k];
    for (l, &i) in matching.iter().enumerate() {
        inverse[i] = Some(l);
    }
    let sigma = sigma2.sqrt();
    let d = cb.d();
    let rows: Vec<(u64, u64)> = (0..k)
        .into_par_iter()
        .map(|i| {
            let mut y = vec![0.0; d];
            let mut buf = Vec::with_capacity(d);
            let (mut ok, mut erased) = (0u64, 0u64);
            for t in 0..trials_per_message {
                let mut rng = derived_rng(seed, &[i as u64, t as u64]);
                for (yi, xi) in y.iter_mut().zip(cb.center(i)) {
                    *yi = xi + sigma * standard_normal(&mut rng);
                }
                let out = decoder.decode_with(partial, &y, &mut buf);
                if out.is_erasure() {
                    erased += 1;
                }
                let hit = match (inverse[i], out) {
                    (Some(l), DecodeOutcome::Message(got)) => l == got,
                    (None, DecodeOutcome::Erasure) => true,
                    _ => false,
                };
                if hit {
                    ok += 1;
                }
            }
            (ok, erased)
        })
        .collect();
    let n = trials_per_message as f64;
    Ok(PApproxProfile {
        success: rows.iter().map(|r| r.0 as f64 / n).collect(),
        erasure: rows.iter().map(|r| r.1 as f64 / n).collect(),
        trials_per_message,
    })
}
