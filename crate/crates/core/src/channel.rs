//! The AWGN channel / GMM sampler.
//!
//! A [`GmmBatch`] always carries the hidden labels, but hands them out only
//! through [`GmmBatch::privileged`]. Learning code takes [`Observations`],
//! which has no path to the labels.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::codebook::{read_matrix, write_matrix, Codebook};
use crate::error::{Error, Result};
use crate::rng::standard_normal;

const LABEL_MAGIC: u64 = u64::from_le_bytes(*b"SPHLABL\0");

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelMode {
    /// Labels i.i.d. uniform on the k centers.
    #[default]
    Uniform,
    /// Exactly n/k samples per label, in shuffled order. Requires k | n.
    Stratified,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GmmBatch {
    d: usize,
    k: usize,
    samples: Vec<f64>,
    labels: Vec<usize>,
    sigma2: f64,
    codebook_id: u64,
}

/// Label-free view of a batch.
#[derive(Clone, Copy, Debug)]
pub struct Observations<'a> {
    d: usize,
    samples: &'a [f64],
}

/// Labeled view of a batch, for evaluation and the genie baseline only.
#[derive(Clone, Copy, Debug)]
pub struct Privileged<'a> {
    d: usize,
    k: usize,
    samples: &'a [f64],
    labels: &'a [usize],
}

impl<'a> Observations<'a> {
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.samples.len() / self.d
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn sample(&self, j: usize) -> &'a [f64] {
        &self.samples[j * self.d..(j + 1) * self.d]
    }

    pub fn iter(&self) -> std::slice::ChunksExact<'a, f64> {
        self.samples.chunks_exact(self.d)
    }

    pub fn as_flat(&self) -> &'a [f64] {
        self.samples
    }
}

impl<'a> Privileged<'a> {
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &'a [usize] {
        self.labels
    }

    pub fn iter(&self) -> impl Iterator<Item = (&'a [f64], usize)> + 'a {
        self.samples.chunks_exact(self.d).zip(self.labels.iter().copied())
    }
}

impl GmmBatch {
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub fn codebook_id(&self) -> u64 {
        self.codebook_id
    }

    pub fn observations(&self) -> Observations<'_> {
        Observations {
            d: self.d,
            samples: &self.samples,
        }
    }

    pub fn privileged(&self) -> Privileged<'_> {
        Privileged {
            d: self.d,
            k: self.k,
            samples: &self.samples,
            labels: &self.labels,
        }
    }

    /// Concatenate two batches drawn from the same codebook.
    pub fn concat(&self, other: &GmmBatch) -> Result<GmmBatch> {
        if self.d != other.d || self.k != other.k || self.codebook_id != other.codebook_id {
            return Err(Error::param("other", "batches come from different codebooks"));
        }
        let mut samples = self.samples.clone();
        samples.extend_from_slice(&other.samples);
        let mut labels = self.labels.clone();
        labels.extend_from_slice(&other.labels);
        Ok(GmmBatch {
            samples,
            labels,
            ..self.clone()
        })
    }

    /// Replace the hidden labels by a random permutation of themselves.
    ///
    /// Only useful for audits showing that a procedure does not depend on
    /// the hidden labels: its output must not change.
    pub fn scramble_labels<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        self.labels.shuffle(rng);
    }

    /// Dump samples to the codebook container format (rows = n) and the
    /// labels to a side file: magic, version, n, k, then n little-endian u64
    /// (0-based).
    pub fn write_to(&self, samples_path: &Path, labels_path: &Path) -> Result<()> {
        write_matrix(samples_path, self.d, self.len(), &self.samples)?;
        let file = File::create(labels_path).map_err(|e| Error::io(labels_path, e))?;
        let mut w = BufWriter::new(file);
        let mut put = |v: u64| w.write_all(&v.to_le_bytes()).map_err(|e| Error::io(labels_path, e));
        put(LABEL_MAGIC)?;
        put(crate::codebook::FORMAT_VERSION)?;
        put(self.len() as u64)?;
        put(self.k as u64)?;
        for &l in &self.labels {
            put(l as u64)?;
        }
        w.flush().map_err(|e| Error::io(labels_path, e))
    }

    /// Load a dump written by [`GmmBatch::write_to`]. The noise level and
    /// codebook id are not part of the files and are supplied by the caller.
    pub fn read_from(samples_path: &Path, labels_path: &Path, sigma2: f64, codebook_id: u64) -> Result<Self> {
        let (d, n, samples) = read_matrix(samples_path)?;
        let mut bytes = Vec::new();
        File::open(labels_path)
            .and_then(|mut f| f.read_to_end(&mut bytes))
            .map_err(|e| Error::io(labels_path, e))?;
        let bad = |reason: &str| Error::Format {
            path: labels_path.to_path_buf(),
            reason: reason.to_string(),
        };
        if bytes.len() % 8 != 0 || bytes.len() < 32 {
            return Err(bad("truncated label file"));
        }
        let words: Vec<u64> = bytes
            .chunks_exact(8)
            .map(|c| u64::from_le_bytes(c.try_into().expect("chunk of 8")))
            .collect();
        if words[0] != LABEL_MAGIC {
            return Err(bad("bad magic"));
        }
        if words[2] as usize != n || words.len() != 4 + n {
            return Err(bad("label count does not match sample count"));
        }
        let k = words[3] as usize;
        let labels: Vec<usize> = words[4..].iter().map(|&w| w as usize).collect();
        if labels.iter().any(|&l| l >= k) {
            return Err(bad("label out of range"));
        }
        Ok(GmmBatch {
            d,
            k,
            samples,
            labels,
            sigma2,
            codebook_id,
        })
    }
}

fn draw_labels<R: Rng + ?Sized>(k: usize, n: usize, mode: LabelMode, rng: &mut R) -> Result<Vec<usize>> {
    match mode {
        LabelMode::Uniform => Ok((0..n).map(|_| rng.random_range(0..k)).collect()),
        LabelMode::Stratified => {
            if !n.is_multiple_of(k) {
                return Err(Error::param("n", format!("stratified sampling needs k | n (n={n}, k={k})")));
            }
            let mut labels: Vec<usize> = (0..n).map(|j| j % k).collect();
            labels.shuffle(rng);
            Ok(labels)
        }
    }
}

/// n samples Y_j = X_{ℓ_j} + σ·Z_j with uniform labels.
pub fn sample_gmm<R: Rng + ?Sized>(cb: &Codebook, sigma2: f64, n: usize, rng: &mut R) -> Result<GmmBatch> {
    sample_gmm_with(cb, sigma2, n, LabelMode::Uniform, rng)
}

pub fn sample_gmm_with<R: Rng + ?Sized>(
    cb: &Codebook,
    sigma2: f64,
    n: usize,
    mode: LabelMode,
    rng: &mut R,
) -> Result<GmmBatch> {
    if !(sigma2 > 0.0) || !sigma2.is_finite() {
        return Err(Error::param("sigma2", format!("must be positive, got {sigma2}")));
    }
    sample_inner(cb, sigma2, n, mode, rng)
}

/// Noise-free batch: every sample is exactly a center; σ² is recorded as 0.
pub fn sample_noiseless<R: Rng + ?Sized>(cb: &Codebook, n: usize, mode: LabelMode, rng: &mut R) -> Result<GmmBatch> {
    sample_inner(cb, 0.0, n, mode, rng)
}

fn sample_inner<R: Rng + ?Sized>(
    cb: &Codebook,
    sigma2: f64,
    n: usize,
    mode: LabelMode,
    rng: &mut R,
) -> Result<GmmBatch> {
    if n == 0 {
        return Err(Error::param("n", "need at least one sample"));
    }
    if cb.is_empty() {
        return Err(Error::InvalidCodebook("cannot sample from an empty codebook".into()));
    }
    let d = cb.d();
    let labels = draw_labels(cb.k(), n, mode, rng)?;
    let sigma = sigma2.sqrt();
    let mut samples = Vec::with_capacity(n * d);
    for &l in &labels {
        let x = cb.center(l);
        if sigma2 > 0.0 {
            samples.extend(x.iter().map(|&c| c + sigma * standard_normal(rng)));
        } else {
            samples.extend_from_slice(x);
        }
    }
    Ok(GmmBatch {
        d,
        k: cb.k(),
        samples,
        labels,
        sigma2,
        codebook_id: cb.fingerprint(),
    })
}
