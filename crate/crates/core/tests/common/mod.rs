#![allow(dead_code)]

use spherecode_core::rng::{fill_standard_normal, SimRng};
use spherecode_core::vecops::{dot, norm_sq};
use spherecode_core::Codebook;

pub fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(|a, b| a.total_cmp(b));
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    }
}

/// Haar-ish random orthogonal matrix (rows) by Gram-Schmidt on a Gaussian matrix.
pub fn random_rotation(d: usize, rng: &mut SimRng) -> Vec<Vec<f64>> {
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(d);
    while rows.len() < d {
        let mut v = vec![0.0; d];
        fill_standard_normal(rng, &mut v);
        for r in &rows {
            let p = dot(&v, r);
            v.iter_mut().zip(r).for_each(|(a, b)| *a -= p * b);
        }
        let n = norm_sq(&v).sqrt();
        if n > 1e-6 {
            v.iter_mut().for_each(|a| *a /= n);
            rows.push(v);
        }
    }
    rows
}

pub fn rotate(q: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    q.iter().map(|r| dot(r, x)).collect()
}

pub fn rotate_codebook(q: &[Vec<f64>], cb: &Codebook) -> Codebook {
    Codebook::from_centers(cb.d(), cb.centers().map(|x| rotate(q, x)).collect()).unwrap()
}

/// k orthogonal codewords √d·e_i.
pub fn orthogonal(d: usize, k: usize) -> Codebook {
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

/// Move every codeword by a tangential step of squared norm `eps·d` and
/// renormalize onto the sphere.
pub fn perturb_tangential(cb: &Codebook, eps: f64, rng: &mut SimRng) -> Codebook {
    let d = cb.d();
    let df = d as f64;
    let centers = cb
        .centers()
        .map(|x| {
            let mut z = vec![0.0; d];
            fill_standard_normal(rng, &mut z);
            let p = dot(&z, x) / df;
            z.iter_mut().zip(x).for_each(|(a, b)| *a -= p * b);
            let s = (eps * df / norm_sq(&z)).sqrt();
            let mut y: Vec<f64> = x.iter().zip(&z).map(|(a, b)| a + s * b).collect();
            let r = (df / norm_sq(&y)).sqrt();
            y.iter_mut().for_each(|a| *a *= r);
            y
        })
        .collect();
    Codebook::from_centers(d, centers).unwrap()
}
