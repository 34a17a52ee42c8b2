//! Experiment orchestration: JSON sweep specs, deterministic parallel runs
//! and versioned CSV output.
//!
//! Every row is produced from a seed derived from `(master_seed, grid index,
//! replicate)` and carries that seed, so any row can be recomputed alone
//! (see [`replay`]). Counts are aggregated as integers, which makes results
//! independent of the worker count.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bounds::{
    capacity, delta_noise_level, labeled_mi_upper, quantitative_lower_curve, rdf_lower_bound, sc_lower_trivial,
    single_sample_mi_upper, RateRegime,
};
use crate::codebook::{beta_for_noise, noise_for_beta, rate, sample_codebook, ChannelParams};
use crate::decoders::{estimate_error_prob, Decoder, DecoderSpec, ErrorEstimate};
use crate::error::{Error, Result};
use crate::learner::{run_learner, LearnerConfig};
use crate::rng::{derive_seed, derived_rng};
use crate::sphere::{build_net, verify_covering, NetConfig};

/// Version of the CSV layouts written by this module.
pub const CSV_SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    DecodeSweep,
    Learn,
    Bounds,
    NetStats,
    PhaseTransition,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::DecodeSweep => "decode_sweep",
            ExperimentKind::Learn => "learn",
            ExperimentKind::Bounds => "bounds",
            ExperimentKind::NetStats => "net_stats",
            ExperimentKind::PhaseTransition => "phase_transition",
        }
    }
}

fn default_trials() -> usize {
    1000
}

fn default_one() -> usize {
    1
}

fn default_true() -> bool {
    true
}

fn default_decoders() -> Vec<DecoderSpec> {
    vec![DecoderSpec::Nn]
}

/// Inputs of the bounds report. Every list is crossed with the `d` and `k`
/// grids of the enclosing spec.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsSpec {
    pub sigma2: Vec<f64>,
    #[serde(default)]
    pub n: Vec<f64>,
    #[serde(default)]
    pub eps: Vec<f64>,
    #[serde(default)]
    pub delta: Vec<f64>,
    /// Decoding error e(δ). When absent it is estimated with the NN decoder
    /// at σ₀² = C⁻¹((1+δ)·R) using `trials` trials of the enclosing spec.
    #[serde(default)]
    pub e_delta: Option<f64>,
    #[serde(default = "default_c")]
    pub c0: f64,
    /// Prefactor of the quantitative curves.
    #[serde(default = "default_c")]
    pub curve_const: f64,
}

fn default_c() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetStatsSpec {
    pub eps_i: Vec<f64>,
    #[serde(default = "default_probes")]
    pub probes: usize,
    #[serde(default)]
    pub net: NetConfig,
}

fn default_probes() -> usize {
    10_000
}

/// A whole experiment as read from a JSON config.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub experiment: ExperimentKind,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub d: Vec<usize>,
    #[serde(default)]
    pub k: Vec<usize>,
    /// Noise grid given through β; exclusive with `sigma2`.
    #[serde(default)]
    pub beta: Vec<f64>,
    #[serde(default)]
    pub sigma2: Vec<f64>,
    #[serde(default = "default_decoders")]
    pub decoders: Vec<DecoderSpec>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    /// Codebook replicates per grid point (seeds per point for `learn`).
    #[serde(default = "default_one")]
    pub replicates: usize,
    /// Mark matched correlation decoders violating the zero-rate feasibility
    /// chain as infeasible instead of running them.
    #[serde(default = "default_true")]
    pub enforce_feasibility: bool,
    #[serde(default)]
    pub learner: Option<LearnerConfig>,
    /// Optional Step-II budget grid for `learn`, overriding `learner.n_bar`.
    #[serde(default)]
    pub n_bar: Vec<usize>,
    #[serde(default)]
    pub bounds: Option<BoundsSpec>,
    #[serde(default)]
    pub net_stats: Option<NetStatsSpec>,
}

impl SweepSpec {
    pub fn new(experiment: ExperimentKind) -> Self {
        SweepSpec {
            experiment,
            master_seed: 0,
            output: None,
            d: vec![],
            k: vec![],
            beta: vec![],
            sigma2: vec![],
            decoders: default_decoders(),
            trials: default_trials(),
            replicates: 1,
            enforce_feasibility: true,
            learner: None,
            n_bar: vec![],
            bounds: None,
            net_stats: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: SweepSpec = serde_json::from_str(text)?;
        Ok(spec)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    /// SHA-256 of the canonical JSON form, hex encoded.
    pub fn config_hash(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("spec serializes");
        hex::encode(Sha256::digest(&canonical))
    }

    pub fn experiment_id(&self) -> String {
        format!("{}-{}", self.experiment.name(), &self.config_hash()[..12])
    }

    pub fn validate(&self) -> Result<()> {
        let needs_grid = !matches!(self.experiment, ExperimentKind::NetStats);
        if self.d.is_empty() {
            return Err(Error::config("d", "grid must be nonempty"));
        }
        if let Some(&bad) = self.d.iter().find(|&&d| d == 0) {
            return Err(Error::config("d", format!("dimensions must be positive, got {bad}")));
        }
        if needs_grid {
            if self.k.is_empty() {
                return Err(Error::config("k", "grid must be nonempty"));
            }
            if let Some(&bad) = self.k.iter().find(|&&k| k < 2) {
                return Err(Error::config("k", format!("need k >= 2, got {bad}")));
            }
        }
        if self.trials == 0 {
            return Err(Error::config("trials", "must be at least 1"));
        }
        if self.replicates == 0 {
            return Err(Error::config("replicates", "must be at least 1"));
        }
        if let Some(&bad) = self.beta.iter().find(|&&b| !(b > 0.0 && b.is_finite())) {
            return Err(Error::config("beta", format!("must be positive, got {bad}")));
        }
        if let Some(&bad) = self.sigma2.iter().find(|&&s| !(s > 0.0 && s.is_finite())) {
            return Err(Error::config("sigma2", format!("must be positive, got {bad}")));
        }
        match self.experiment {
            ExperimentKind::DecodeSweep | ExperimentKind::PhaseTransition | ExperimentKind::Learn => {
                if self.beta.is_empty() == self.sigma2.is_empty() {
                    return Err(Error::config("beta", "give exactly one of the `beta` and `sigma2` grids"));
                }
                if self.decoders.is_empty() && self.experiment != ExperimentKind::Learn {
                    return Err(Error::config("decoders", "list must be nonempty"));
                }
                if self.experiment != ExperimentKind::Learn && self.trials < crate::decoders::MIN_TRIALS {
                    return Err(Error::config(
                        "trials",
                        format!("Monte Carlo estimates need at least {} trials", crate::decoders::MIN_TRIALS),
                    ));
                }
            }
            _ => {}
        }
        match self.experiment {
            ExperimentKind::Learn => {
                let l = self.learner.as_ref().ok_or_else(|| Error::config("learner", "missing"))?;
                l.validate()?;
                if self.n_bar.contains(&0) {
                    return Err(Error::config("n_bar", "budgets must be at least 1"));
                }
            }
            ExperimentKind::Bounds => {
                let b = self.bounds.as_ref().ok_or_else(|| Error::config("bounds", "missing"))?;
                if b.sigma2.is_empty() {
                    return Err(Error::config("bounds.sigma2", "grid must be nonempty"));
                }
                if let Some(&bad) = b.sigma2.iter().find(|&&s| !(s > 0.0)) {
                    return Err(Error::config("bounds.sigma2", format!("must be positive, got {bad}")));
                }
                if let Some(&bad) = b.n.iter().find(|&&n| !(n >= 0.0)) {
                    return Err(Error::config("bounds.n", format!("must be non-negative, got {bad}")));
                }
                if let Some(e) = b.e_delta {
                    if !(0.0..=1.0).contains(&e) {
                        return Err(Error::config("bounds.e_delta", format!("must lie in [0, 1], got {e}")));
                    }
                }
            }
            ExperimentKind::NetStats => {
                let n = self.net_stats.as_ref().ok_or_else(|| Error::config("net_stats", "missing"))?;
                if n.eps_i.is_empty() {
                    return Err(Error::config("net_stats.eps_i", "grid must be nonempty"));
                }
                if let Some(&bad) = n.eps_i.iter().find(|&&e| !(e > 0.0 && e < 0.5)) {
                    return Err(Error::config("net_stats.eps_i", format!("must lie in (0, 1/2), got {bad}")));
                }
                if n.probes == 0 {
                    return Err(Error::config("net_stats.probes", "must be at least 1"));
                }
            }
            _ => {}
        }
        Ok(())
    }

    /// (β, σ²) pairs of the noise grid for one (d, k).
    fn noise_grid(&self, d: usize, k: usize) -> Result<Vec<ChannelParams>> {
        if !self.beta.is_empty() {
            self.beta.iter().map(|&b| noise_for_beta(d, k, b)).collect()
        } else {
            self.sigma2.iter().map(|&s| beta_for_noise(d, k, s)).collect()
        }
    }
}

/// Unit of work: one grid point (and replicate, where rows are per replicate).
#[derive(Clone, Debug, PartialEq)]
struct Unit {
    grid_index: usize,
    // Seed path index. Shared by the N̄ budgets of one learn point, so a
    // budget grid reuses codebooks and Step-I data.
    seed_index: usize,
    replicate: usize,
    d: usize,
    k: usize,
    channel: ChannelParams,
    decoder: Option<DecoderSpec>,
    n_bar: Option<usize>,
}

fn units(spec: &SweepSpec, per_replicate: bool) -> Result<Vec<Unit>> {
    let mut out = Vec::new();
    let mut grid_index = 0;
    for &d in &spec.d {
        for &k in &spec.k {
            for channel in spec.noise_grid(d, k)? {
                let decoders: Vec<Option<DecoderSpec>> = if spec.experiment == ExperimentKind::Learn {
                    vec![None]
                } else {
                    spec.decoders.iter().cloned().map(Some).collect()
                };
                let budgets: Vec<Option<usize>> = if spec.experiment == ExperimentKind::Learn && !spec.n_bar.is_empty() {
                    spec.n_bar.iter().copied().map(Some).collect()
                } else {
                    vec![None]
                };
                for decoder in &decoders {
                    let seed_index = grid_index;
                    for &n_bar in &budgets {
                        let reps = if per_replicate { spec.replicates } else { 1 };
                        for replicate in 0..reps {
                            out.push(Unit {
                                grid_index,
                                seed_index,
                                replicate,
                                d,
                                k,
                                channel,
                                decoder: decoder.clone(),
                                n_bar,
                            });
                        }
                        grid_index += 1;
                    }
                }
            }
        }
    }
    Ok(out)
}

/// One Monte Carlo measurement.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub experiment_id: String,
    pub d: usize,
    pub k: usize,
    pub beta: f64,
    pub sigma2: f64,
    pub rate: f64,
    pub decoder: String,
    pub trials: u64,
    pub error_count: u64,
    pub erasure_count: u64,
    pub rho_hat: Option<f64>,
    pub ci_low: Option<f64>,
    pub ci_high: Option<f64>,
    pub seed: u64,
    pub wall_ms: u64,
    pub row_id: usize,
    pub grid_index: usize,
    pub replicate: usize,
    pub status: String,
    pub note: String,
}

/// Resolve a decoder for one grid point, or the reason it cannot run.
fn resolve_decoder(spec: &SweepSpec, dspec: &DecoderSpec, d: usize, k: usize, sigma2: f64) -> std::result::Result<Decoder, String> {
    let dec = dspec.build(sigma2).map_err(|e| e.to_string())?;
    if spec.enforce_feasibility {
        if let Decoder::Corr(p) = &dec {
            p.check_zero_rate_feasibility(d, k, sigma2).map_err(|e| e.to_string())?;
        }
    }
    Ok(dec)
}

fn unit_seed(spec: &SweepSpec, u: &Unit) -> u64 {
    derive_seed(spec.master_seed, &[u.seed_index as u64, u.replicate as u64])
}

// Codebook stream and trial stream of a row seed.
const CODEBOOK_STREAM: u64 = 0;
const TRIAL_STREAM: u64 = 1;

fn measure(spec: &SweepSpec, u: &Unit, seed: u64, decoder: &Decoder) -> Result<ErrorEstimate> {
    let cb = sample_codebook(u.d, u.k, &mut derived_rng(seed, &[CODEBOOK_STREAM]))?;
    estimate_error_prob(
        &cb,
        u.channel.sigma2,
        decoder,
        spec.trials,
        derive_seed(seed, &[TRIAL_STREAM]),
    )
}

fn decode_row(spec: &SweepSpec, id: &str, row_id: usize, u: &Unit) -> Result<TrialRecord> {
    let start = Instant::now();
    let seed = unit_seed(spec, u);
    let dspec = u.decoder.as_ref().expect("decode units carry a decoder");
    let mut rec = TrialRecord {
        experiment_id: id.to_string(),
        d: u.d,
        k: u.k,
        beta: u.channel.beta,
        sigma2: u.channel.sigma2,
        rate: u.channel.rate,
        decoder: dspec.to_string(),
        trials: 0,
        error_count: 0,
        erasure_count: 0,
        rho_hat: None,
        ci_low: None,
        ci_high: None,
        seed,
        wall_ms: 0,
        row_id,
        grid_index: u.grid_index,
        replicate: u.replicate,
        status: "ok".into(),
        note: String::new(),
    };
    match resolve_decoder(spec, dspec, u.d, u.k, u.channel.sigma2) {
        Err(reason) => {
            rec.status = "infeasible".into();
            rec.note = reason;
        }
        Ok(decoder) => {
            let est = measure(spec, u, seed, &decoder)?;
            rec.trials = est.trials;
            rec.error_count = est.errors;
            rec.erasure_count = est.erasures;
            rec.rho_hat = Some(est.rho_hat);
            rec.ci_low = Some(est.ci_low);
            rec.ci_high = Some(est.ci_high);
        }
    }
    rec.wall_ms = start.elapsed().as_millis() as u64;
    Ok(rec)
}

/// One row per (grid point, codebook replicate); each replicate draws a
/// fresh codebook so the rows average to the ensemble error.
pub fn run_decode_sweep(spec: &SweepSpec) -> Result<Vec<TrialRecord>> {
    expect_kind(spec, ExperimentKind::DecodeSweep)?;
    spec.validate()?;
    let id = spec.experiment_id();
    let units = units(spec, true)?;
    units
        .par_iter()
        .enumerate()
        .map(|(row, u)| decode_row(spec, &id, row, u))
        .collect()
}

/// Ensemble error per grid point, pooled over `replicates` codebooks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseRecord {
    pub experiment_id: String,
    pub d: usize,
    pub k: usize,
    pub beta: f64,
    pub sigma2: f64,
    pub rate: f64,
    pub capacity: f64,
    pub regime: String,
    pub decoder: String,
    pub replicates: usize,
    pub trials: u64,
    pub error_count: u64,
    pub erasure_count: u64,
    pub rho_hat: Option<f64>,
    pub ci_low: Option<f64>,
    pub ci_high: Option<f64>,
    pub seed: u64,
    pub wall_ms: u64,
    pub row_id: usize,
    pub status: String,
    pub note: String,
}

fn phase_row(spec: &SweepSpec, id: &str, row_id: usize, u: &Unit) -> Result<PhaseRecord> {
    let start = Instant::now();
    let dspec = u.decoder.as_ref().expect("phase units carry a decoder");
    // Replicate r of this row uses derive(seed, [r]).
    let seed = derive_seed(spec.master_seed, &[u.seed_index as u64]);
    let regime = if u.channel.beta > 1.0 {
        "below_capacity"
    } else if u.channel.beta < 1.0 {
        "above_capacity"
    } else {
        "at_capacity"
    };
    let mut rec = PhaseRecord {
        experiment_id: id.to_string(),
        d: u.d,
        k: u.k,
        beta: u.channel.beta,
        sigma2: u.channel.sigma2,
        rate: u.channel.rate,
        capacity: capacity(u.channel.sigma2)?,
        regime: regime.into(),
        decoder: dspec.to_string(),
        replicates: spec.replicates,
        trials: 0,
        error_count: 0,
        erasure_count: 0,
        rho_hat: None,
        ci_low: None,
        ci_high: None,
        seed,
        wall_ms: 0,
        row_id,
        status: "ok".into(),
        note: String::new(),
    };
    match resolve_decoder(spec, dspec, u.d, u.k, u.channel.sigma2) {
        Err(reason) => {
            rec.status = "infeasible".into();
            rec.note = reason;
        }
        Ok(decoder) => {
            let parts: Vec<ErrorEstimate> = (0..spec.replicates)
                .into_par_iter()
                .map(|r| measure(spec, u, derive_seed(seed, &[r as u64]), &decoder))
                .collect::<Result<_>>()?;
            let total = parts.iter().skip(1).fold(parts[0], |acc, p| acc.merge(p));
            rec.trials = total.trials;
            rec.error_count = total.errors;
            rec.erasure_count = total.erasures;
            rec.rho_hat = Some(total.rho_hat);
            rec.ci_low = Some(total.ci_low);
            rec.ci_high = Some(total.ci_high);
        }
    }
    rec.wall_ms = start.elapsed().as_millis() as u64;
    Ok(rec)
}

pub fn run_phase_transition(spec: &SweepSpec) -> Result<Vec<PhaseRecord>> {
    expect_kind(spec, ExperimentKind::PhaseTransition)?;
    spec.validate()?;
    let id = spec.experiment_id();
    let units = units(spec, false)?;
    units
        .par_iter()
        .enumerate()
        .map(|(row, u)| phase_row(spec, &id, row, u))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LearnRecord {
    pub experiment_id: String,
    pub d: usize,
    pub k: usize,
    pub beta: f64,
    pub sigma2: f64,
    pub rate: f64,
    pub eps_i: f64,
    pub eps: f64,
    pub n: usize,
    pub n_bar: usize,
    pub test_kind: String,
    pub decoder: String,
    pub m: usize,
    pub loss_avg: f64,
    pub loss_max: f64,
    pub genie_loss: f64,
    pub net_size: usize,
    pub t_close: usize,
    pub separated: usize,
    pub step2_erasure_rate: f64,
    pub far_candidates: usize,
    pub covered_centers: usize,
    pub certified: usize,
    pub net_coverage: Option<f64>,
    pub seed: u64,
    pub wall_ms: u64,
    pub row_id: usize,
    pub grid_index: usize,
    pub replicate: usize,
}

fn learn_row(spec: &SweepSpec, id: &str, row_id: usize, u: &Unit) -> Result<LearnRecord> {
    let start = Instant::now();
    let seed = unit_seed(spec, u);
    let mut cfg = spec.learner.clone().expect("validated");
    if u.n_bar.is_some() {
        cfg.n_bar = u.n_bar;
    }
    let cb = sample_codebook(u.d, u.k, &mut derived_rng(seed, &[CODEBOOK_STREAM]))?;
    let res = run_learner(&cb, u.channel.sigma2, &cfg, &mut derived_rng(seed, &[TRIAL_STREAM]))?;
    let test_kind = match cfg.regime_test(u.channel.rate) {
        crate::learner::TestKind::ZeroRate => "zero_rate",
        crate::learner::TestKind::PositiveRate => "positive_rate",
    };
    Ok(LearnRecord {
        experiment_id: id.to_string(),
        d: u.d,
        k: u.k,
        beta: u.channel.beta,
        sigma2: u.channel.sigma2,
        rate: u.channel.rate,
        eps_i: cfg.eps_i,
        eps: cfg.eps,
        n: res.n,
        n_bar: res.n_bar,
        test_kind: test_kind.into(),
        decoder: cfg.regime_decoder(u.channel.rate).to_string(),
        m: res.m,
        loss_avg: res.loss_avg,
        loss_max: res.loss_max,
        genie_loss: res.genie_loss,
        net_size: res.stats.net_size,
        t_close: res.stats.t_close,
        separated: res.stats.separated,
        step2_erasure_rate: res.stats.step2_erasure_rate,
        far_candidates: res.stats.far_candidates,
        covered_centers: res.stats.covered_centers,
        certified: res.stats.certified,
        net_coverage: res.stats.net_coverage,
        seed,
        wall_ms: start.elapsed().as_millis() as u64,
        row_id,
        grid_index: u.grid_index,
        replicate: u.replicate,
    })
}

/// One row per (grid point, N̄ budget, seed replicate).
pub fn run_learn_experiment(spec: &SweepSpec) -> Result<Vec<LearnRecord>> {
    expect_kind(spec, ExperimentKind::Learn)?;
    spec.validate()?;
    let id = spec.experiment_id();
    let units = units(spec, true)?;
    units
        .par_iter()
        .enumerate()
        .map(|(row, u)| learn_row(spec, &id, row, u))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundRecord {
    pub experiment_id: String,
    pub quantity: String,
    pub d: usize,
    pub k: usize,
    pub sigma2: Option<f64>,
    pub n: Option<f64>,
    pub eps: Option<f64>,
    pub delta: Option<f64>,
    pub e_delta: Option<f64>,
    pub value: Option<f64>,
    pub c0: f64,
    pub curve_const: f64,
    pub status: String,
}

/// Closed-form bound table. Cells outside a formula's domain are reported
/// with `status` naming the offending parameter rather than aborting.
pub fn run_bounds_report(spec: &SweepSpec) -> Result<Vec<BoundRecord>> {
    expect_kind(spec, ExperimentKind::Bounds)?;
    spec.validate()?;
    let b = spec.bounds.as_ref().expect("validated");
    let id = spec.experiment_id();
    let mut rows = Vec::new();
    let mut push = |quantity: &str,
                    d: usize,
                    k: usize,
                    sigma2: Option<f64>,
                    n: Option<f64>,
                    eps: Option<f64>,
                    delta: Option<f64>,
                    e_delta: Option<f64>,
                    value: Result<f64>| {
        let (value, status) = match value {
            Ok(v) => (Some(v), "ok".to_string()),
            Err(e) => (None, e.to_string()),
        };
        rows.push(BoundRecord {
            experiment_id: id.clone(),
            quantity: quantity.into(),
            d,
            k,
            sigma2,
            n,
            eps,
            delta,
            e_delta,
            value,
            c0: b.c0,
            curve_const: b.curve_const,
            status,
        });
    };
    for (gi, &d) in spec.d.iter().enumerate() {
        for (gj, &k) in spec.k.iter().enumerate() {
            let r = rate(d, k);
            let kf = k as f64;
            push("rate", d, k, None, None, None, None, None, Ok(r));
            for &eps in &b.eps {
                push("rdf_lower_bound", d, k, None, None, Some(eps), None, None, rdf_lower_bound(d, k, eps, b.c0));
                push("sc_lower_trivial", d, k, None, None, Some(eps), None, None, sc_lower_trivial(eps, r));
                // R -> 0 limit of the same bound, e.g. 99 at eps = 0.01.
                push("sc_lower_trivial_zero_rate", d, k, None, None, Some(eps), None, None, sc_lower_trivial(eps, 0.0));
            }
            for &sigma2 in &b.sigma2 {
                push("capacity", d, k, Some(sigma2), None, None, None, None, capacity(sigma2));
                push(
                    "beta",
                    d,
                    k,
                    Some(sigma2),
                    None,
                    None,
                    None,
                    None,
                    beta_for_noise(d, k, sigma2).map(|c| c.beta),
                );
                for &n in &b.n {
                    push("labeled_mi_upper", d, k, Some(sigma2), Some(n), None, None, None, labeled_mi_upper(d, k, sigma2, n));
                }
            }
            for (gl, &delta) in b.delta.iter().enumerate() {
                let e = match b.e_delta {
                    Some(e) => Ok(e),
                    None => delta_noise_level(delta, r).and_then(|s0| {
                        let cb = sample_codebook(d, k, &mut derived_rng(spec.master_seed, &[gi as u64, gj as u64, gl as u64, 0]))?;
                        let seed = derive_seed(spec.master_seed, &[gi as u64, gj as u64, gl as u64, 1]);
                        Ok(estimate_error_prob(&cb, s0, &Decoder::Nn, spec.trials.max(crate::decoders::MIN_TRIALS), seed)?.rho_hat)
                    }),
                };
                push("delta_noise_level", d, k, None, None, None, Some(delta), None, delta_noise_level(delta, r));
                match e {
                    Ok(e) => push(
                        "single_sample_mi_upper",
                        d,
                        k,
                        None,
                        None,
                        None,
                        Some(delta),
                        Some(e),
                        single_sample_mi_upper(delta, e, kf),
                    ),
                    Err(err) => push("single_sample_mi_upper", d, k, None, None, None, Some(delta), None, Err(err)),
                }
            }
            for (name, regime) in [
                ("quantitative_positive_rate", RateRegime::Positive),
                ("quantitative_zero_rate", RateRegime::Zero),
            ] {
                push(name, d, k, None, None, None, None, None, quantitative_lower_curve(regime, d as f64, kf, b.curve_const));
            }
        }
    }
    Ok(rows)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetStatsRecord {
    pub experiment_id: String,
    pub d: usize,
    pub eps_i: f64,
    pub strategy: String,
    pub size: Option<usize>,
    pub randomized_size: f64,
    pub probes: usize,
    pub coverage: Option<f64>,
    pub seed: u64,
    pub wall_ms: u64,
    pub row_id: usize,
    pub status: String,
}

/// Net size and Monte Carlo covering fraction per (d, ε_I).
pub fn run_net_stats(spec: &SweepSpec) -> Result<Vec<NetStatsRecord>> {
    expect_kind(spec, ExperimentKind::NetStats)?;
    spec.validate()?;
    let ns = spec.net_stats.as_ref().expect("validated");
    let id = spec.experiment_id();
    let grid: Vec<(usize, f64)> = spec.d.iter().flat_map(|&d| ns.eps_i.iter().map(move |&e| (d, e))).collect();
    grid.par_iter()
        .enumerate()
        .map(|(row, &(d, eps_i))| {
            let start = Instant::now();
            let seed = derive_seed(spec.master_seed, &[row as u64]);
            let strategy = match ns.net.strategy {
                crate::sphere::NetStrategy::Randomized => "randomized",
                crate::sphere::NetStrategy::Grid => "grid",
            };
            let mut rec = NetStatsRecord {
                experiment_id: id.clone(),
                d,
                eps_i,
                strategy: strategy.into(),
                size: None,
                randomized_size: ns.net.randomized_size(d, eps_i),
                probes: ns.probes,
                coverage: None,
                seed,
                wall_ms: 0,
                row_id: row,
                status: "ok".into(),
            };
            match build_net(d, eps_i, &ns.net, &mut derived_rng(seed, &[0])) {
                Ok(net) => {
                    rec.size = Some(net.len());
                    rec.coverage = Some(verify_covering(&net, ns.probes, &mut derived_rng(seed, &[1]))?);
                }
                Err(e @ Error::NetInfeasible { .. }) => rec.status = e.to_string(),
                Err(e) => return Err(e),
            }
            rec.wall_ms = start.elapsed().as_millis() as u64;
            Ok(rec)
        })
        .collect()
}

fn expect_kind(spec: &SweepSpec, kind: ExperimentKind) -> Result<()> {
    if spec.experiment != kind {
        return Err(Error::config(
            "experiment",
            format!("expected `{}`, got `{}`", kind.name(), spec.experiment.name()),
        ));
    }
    Ok(())
}

/// Rows of any experiment kind.
#[derive(Clone, Debug, PartialEq)]
pub enum Report {
    Decode(Vec<TrialRecord>),
    Phase(Vec<PhaseRecord>),
    Learn(Vec<LearnRecord>),
    Bounds(Vec<BoundRecord>),
    NetStats(Vec<NetStatsRecord>),
}

impl Report {
    pub fn len(&self) -> usize {
        match self {
            Report::Decode(r) => r.len(),
            Report::Phase(r) => r.len(),
            Report::Learn(r) => r.len(),
            Report::Bounds(r) => r.len(),
            Report::NetStats(r) => r.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// CSV text: one `#` metadata line, then the header and rows.
    pub fn to_csv(&self, spec: &SweepSpec) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        match self {
            Report::Decode(r) => r.iter().try_for_each(|x| w.serialize(x))?,
            Report::Phase(r) => r.iter().try_for_each(|x| w.serialize(x))?,
            Report::Learn(r) => r.iter().try_for_each(|x| w.serialize(x))?,
            Report::Bounds(r) => r.iter().try_for_each(|x| w.serialize(x))?,
            Report::NetStats(r) => r.iter().try_for_each(|x| w.serialize(x))?,
        }
        let body = w.into_inner().map_err(|e| Error::param("csv", e.to_string()))?;
        let mut out = header_comment(spec);
        out.push('\n');
        out.push_str(&String::from_utf8(body).expect("csv output is utf-8"));
        Ok(out)
    }

    pub fn write_csv(&self, spec: &SweepSpec, path: &Path) -> Result<()> {
        let text = self.to_csv(spec)?;
        let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        f.write_all(text.as_bytes()).map_err(|e| Error::io(path, e))
    }
}

/// Metadata line written above the CSV header.
pub fn header_comment(spec: &SweepSpec) -> String {
    let mut consts = Vec::new();
    if let Some(l) = &spec.learner {
        consts.push(format!(
            "c1={};c2={};threshold_const={};r_switch={};c_net={};c_exp={}",
            l.c1, l.c2, l.threshold_const, l.r_switch, l.net.c_net, l.net.c_exp
        ));
    }
    if let Some(b) = &spec.bounds {
        // Loss targets are user-chosen: the threshold below which the curves
        // are meaningful is not quantified.
        consts.push(format!("c0={};curve_const={};eps_threshold=unquantified", b.c0, b.curve_const));
    }
    if let Some(n) = &spec.net_stats {
        consts.push(format!("c_net={};c_exp={}", n.net.c_net, n.net.c_exp));
    }
    format!(
        "# spherecode v{} schema={} experiment={} config_sha256={} master_seed={} constants=[{}]",
        env!("CARGO_PKG_VERSION"),
        CSV_SCHEMA_VERSION,
        spec.experiment.name(),
        spec.config_hash(),
        spec.master_seed,
        consts.join(";")
    )
}

/// Run the experiment named by the spec.
pub fn run(spec: &SweepSpec) -> Result<Report> {
    Ok(match spec.experiment {
        ExperimentKind::DecodeSweep => Report::Decode(run_decode_sweep(spec)?),
        ExperimentKind::PhaseTransition => Report::Phase(run_phase_transition(spec)?),
        ExperimentKind::Learn => Report::Learn(run_learn_experiment(spec)?),
        ExperimentKind::Bounds => Report::Bounds(run_bounds_report(spec)?),
        ExperimentKind::NetStats => Report::NetStats(run_net_stats(spec)?),
    })
}

/// Recompute a single row by its `row_id`.
pub fn replay(spec: &SweepSpec, row_id: usize) -> Result<Report> {
    spec.validate()?;
    let id = spec.experiment_id();
    let pick = |us: Vec<Unit>| -> Result<Unit> {
        let n = us.len();
        us.into_iter()
            .nth(row_id)
            .ok_or_else(|| Error::param("replay", format!("row {row_id} out of range (experiment has {n} rows)")))
    };
    Ok(match spec.experiment {
        ExperimentKind::DecodeSweep => Report::Decode(vec![decode_row(spec, &id, row_id, &pick(units(spec, true)?)?)?]),
        ExperimentKind::PhaseTransition => Report::Phase(vec![phase_row(spec, &id, row_id, &pick(units(spec, false)?)?)?]),
        ExperimentKind::Learn => Report::Learn(vec![learn_row(spec, &id, row_id, &pick(units(spec, true)?)?)?]),
        ExperimentKind::Bounds | ExperimentKind::NetStats => {
            let all = run(spec)?;
            let n = all.len();
            match all {
                Report::Bounds(r) => Report::Bounds(vec![r
                    .into_iter()
                    .nth(row_id)
                    .ok_or_else(|| Error::param("replay", format!("row {row_id} out of range (experiment has {n} rows)")))?]),
                Report::NetStats(r) => Report::NetStats(vec![r
                    .into_iter()
                    .nth(row_id)
                    .ok_or_else(|| Error::param("replay", format!("row {row_id} out of range (experiment has {n} rows)")))?]),
                _ => unreachable!(),
            }
        }
    })
}

/// Run `f` on a dedicated pool of `workers` threads (`None` = all cores).
pub fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(w) = workers {
        if w == 0 {
            return Err(Error::config("workers", "must be at least 1"));
        }
        b = b.num_threads(w);
    }
    let pool = b.build().map_err(|e| Error::param("workers", e.to_string()))?;
    Ok(pool.install(f))
}
