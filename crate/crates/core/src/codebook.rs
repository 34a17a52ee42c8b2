//! Spherical codebooks and the rate / noise / β parametrization.
//!
//! Rates are in nats per dimension throughout: R = ln(k)/d.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bounds::capacity;
use crate::error::{Error, Result};
use crate::sphere::{is_on_sphere, sample_sphere_into};
use crate::vecops::sq_dist;

/// Largest codebook the samplers will allocate.
pub const MAX_K: usize = 1 << 24;

pub(crate) const CODEBOOK_MAGIC: u64 = u64::from_le_bytes(*b"SPHCODE\0");
pub(crate) const FORMAT_VERSION: u64 = 1;

/// A list of centers on √d·S^{d−1}, stored row-major.
///
/// Sampled codebooks have k ≥ 2. Partial codebooks built from an estimate
/// (the input of a mismatched decoder) may have any size, including zero.
#[derive(Clone, Debug, PartialEq)]
pub struct Codebook {
    d: usize,
    k: usize,
    data: Vec<f64>,
}

impl Codebook {
    /// Validate and wrap a list of centers: all of dimension `d`, on the
    /// sphere, pairwise distinct.
    pub fn from_centers(d: usize, centers: Vec<Vec<f64>>) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidDimension(0));
        }
        let k = centers.len();
        let mut data = Vec::with_capacity(k * d);
        for (i, c) in centers.into_iter().enumerate() {
            if c.len() != d {
                return Err(Error::InvalidCodebook(format!(
                    "center {i} has dimension {}, expected {d}",
                    c.len()
                )));
            }
            data.extend(c);
        }
        Self::from_flat(d, data)
    }

    pub fn from_flat(d: usize, data: Vec<f64>) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidDimension(0));
        }
        if !data.len().is_multiple_of(d) {
            return Err(Error::InvalidCodebook("buffer length is not a multiple of d".into()));
        }
        let k = data.len() / d;
        let mut seen = HashSet::with_capacity(k);
        for (i, c) in data.chunks_exact(d).enumerate() {
            if !is_on_sphere(c) {
                return Err(Error::InvalidCodebook(format!("center {i} is not on the radius-√d sphere")));
            }
            let key: Vec<u64> = c.iter().map(|v| v.to_bits()).collect();
            if !seen.insert(key) {
                return Err(Error::InvalidCodebook(format!("center {i} duplicates an earlier center")));
            }
        }
        Ok(Codebook { d, k, data })
    }

    /// Empty codebook of dimension `d`.
    pub fn empty(d: usize) -> Self {
        Codebook { d, k: 0, data: Vec::new() }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn is_empty(&self) -> bool {
        self.k == 0
    }

    #[inline]
    pub fn center(&self, i: usize) -> &[f64] {
        &self.data[i * self.d..(i + 1) * self.d]
    }

    pub fn centers(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.d.max(1)).take(self.k)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.data
    }

    /// Codebook restricted to (and reordered by) `indices`.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        let mut data = Vec::with_capacity(indices.len() * self.d);
        for &i in indices {
            if i >= self.k {
                return Err(Error::InvalidCodebook(format!("index {i} out of range for k={}", self.k)));
            }
            data.extend_from_slice(self.center(i));
        }
        Self::from_flat(self.d, data)
    }

    /// Content fingerprint, used to tie batches back to their codebook.
    pub fn fingerprint(&self) -> u64 {
        let mut h = Sha256::new();
        h.update((self.d as u64).to_le_bytes());
        h.update((self.k as u64).to_le_bytes());
        for v in &self.data {
            h.update(v.to_le_bytes());
        }
        let out = h.finalize();
        u64::from_le_bytes(out[..8].try_into().expect("digest has at least 8 bytes"))
    }

    /// Write the binary container: magic, version, d, k (little-endian u64)
    /// followed by k·d little-endian f64.
    pub fn write_to(&self, path: &Path) -> Result<()> {
        write_matrix(path, self.d, self.k, &self.data)
    }

    pub fn read_from(path: &Path) -> Result<Self> {
        let (d, _k, data) = read_matrix(path)?;
        Self::from_flat(d, data)
    }
}

pub(crate) fn write_matrix(path: &Path, d: usize, rows: usize, data: &[f64]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let mut put = |bytes: &[u8]| w.write_all(bytes).map_err(|e| Error::io(path, e));
    put(&CODEBOOK_MAGIC.to_le_bytes())?;
    put(&FORMAT_VERSION.to_le_bytes())?;
    put(&(d as u64).to_le_bytes())?;
    put(&(rows as u64).to_le_bytes())?;
    for v in data {
        put(&v.to_le_bytes())?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub(crate) fn read_matrix(path: &Path) -> Result<(usize, usize, Vec<f64>)> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = BufReader::new(file);
    let mut word = [0u8; 8];
    let mut next = |r: &mut BufReader<File>| -> Result<[u8; 8]> {
        r.read_exact(&mut word).map_err(|e| Error::io(path, e))?;
        Ok(word)
    };
    let bad = |reason: &str| Error::Format {
        path: path.to_path_buf(),
        reason: reason.to_string(),
    };
    if u64::from_le_bytes(next(&mut r)?) != CODEBOOK_MAGIC {
        return Err(bad("bad magic"));
    }
    let version = u64::from_le_bytes(next(&mut r)?);
    if version != FORMAT_VERSION {
        return Err(bad(&format!("unsupported version {version}")));
    }
    let d = u64::from_le_bytes(next(&mut r)?) as usize;
    let rows = u64::from_le_bytes(next(&mut r)?) as usize;
    let len = d.checked_mul(rows).ok_or_else(|| bad("header overflows"))?;
    let mut data = Vec::with_capacity(len);
    for _ in 0..len {
        data.push(f64::from_le_bytes(next(&mut r)?));
    }
    let mut probe = [0u8; 1];
    match r.read(&mut probe) {
        Ok(0) => Ok((d, rows, data)),
        Ok(_) => Err(bad("trailing bytes after body")),
        Err(e) => Err(Error::io(path, e)),
    }
}

/// k independent uniform points on √d·S^{d−1}.
pub fn sample_codebook<R: Rng + ?Sized>(d: usize, k: usize, rng: &mut R) -> Result<Codebook> {
    if d == 0 {
        return Err(Error::InvalidDimension(0));
    }
    if k < 2 {
        return Err(Error::InvalidCodebook(format!("need k >= 2, got {k}")));
    }
    if k > MAX_K {
        return Err(Error::InvalidCodebook(format!("k={k} exceeds the cap {MAX_K}")));
    }
    let mut data = vec![0.0; k * d];
    for row in data.chunks_exact_mut(d) {
        sample_sphere_into(rng, row);
    }
    Ok(Codebook { d, k, data })
}

/// R_{d,k} = ln(k)/d in nats per dimension.
pub fn rate(d: usize, k: usize) -> f64 {
    (k as f64).ln() / d as f64
}

/// Noise level σ², coupling parameter β and rate of one channel configuration.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    pub sigma2: f64,
    pub beta: f64,
    pub rate: f64,
}

/// Solve R_{d,k} = C(β·σ²) for σ²: σ² = 1/(β·(k^{2/d} − 1)).
pub fn noise_for_beta(d: usize, k: usize, beta: f64) -> Result<ChannelParams> {
    if d == 0 {
        return Err(Error::InvalidDimension(0));
    }
    if k < 2 {
        return Err(Error::InvalidCodebook(format!("need k >= 2, got {k}")));
    }
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::param("beta", format!("must be positive, got {beta}")));
    }
    let r = rate(d, k);
    let sigma2 = 1.0 / (beta * (2.0 * r).exp_m1());
    Ok(ChannelParams { sigma2, beta, rate: r })
}

/// Inverse view: β such that R_{d,k} = C(β·σ²).
pub fn beta_for_noise(d: usize, k: usize, sigma2: f64) -> Result<ChannelParams> {
    if !(sigma2 > 0.0) {
        return Err(Error::param("sigma2", format!("must be positive, got {sigma2}")));
    }
    let r = rate(d, k);
    let beta = 1.0 / (sigma2 * (2.0 * r).exp_m1());
    Ok(ChannelParams { sigma2, beta, rate: r })
}

impl ChannelParams {
    /// C(β·σ²) − R; zero up to rounding for parameters built here.
    pub fn coupling_residual(&self) -> f64 {
        capacity(self.beta * self.sigma2).unwrap_or(f64::NAN) - self.rate
    }
}

/// Minimum pairwise distance Δ = min_{i<j} ‖X_i − X_j‖ by exhaustive scan.
pub fn min_distance_reference(cb: &Codebook) -> f64 {
    min_distance_sq_reference(cb).sqrt()
}

pub fn min_distance_sq_reference(cb: &Codebook) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..cb.k() {
        let xi = cb.center(i);
        for j in (i + 1)..cb.k() {
            let s = sq_dist(xi, cb.center(j));
            if s < best {
                best = s;
            }
        }
    }
    best
}

/// Minimum pairwise distance with a sorted-projection prefilter.
///
/// Centers are sorted by their projection p on the all-ones direction; since
/// |p_i − p_j| ≤ ‖X_i − X_j‖, the inner scan stops once (p_j − p_i)² exceeds
/// the best squared distance found so far. Every distance that is evaluated
/// uses the same kernel as [`min_distance_reference`], so the two agree
/// exactly.
pub fn min_distance(cb: &Codebook) -> f64 {
    min_distance_sq(cb).sqrt()
}

pub fn min_distance_sq(cb: &Codebook) -> f64 {
    let k = cb.k();
    if k < 2 {
        return f64::INFINITY;
    }
    let inv = 1.0 / (cb.d() as f64).sqrt();
    let mut order: Vec<(f64, usize)> = cb
        .centers()
        .enumerate()
        .map(|(i, c)| (c.iter().sum::<f64>() * inv, i))
        .collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut best = f64::INFINITY;
    for a in 0..k {
        let (pa, ia) = order[a];
        for &(pb, ib) in &order[a + 1..] {
            let gap = pb - pa;
            // Slack absorbs rounding in the projections.
            if gap * gap > best * (1.0 + 1e-9) {
                break;
            }
            let s = sq_dist(cb.center(ia), cb.center(ib));
            if s < best {
                best = s;
            }
        }
    }
    best
}
