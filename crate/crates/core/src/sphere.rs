//! Geometry on the radius-√d sphere: uniform sampling, ball projection and
//! covering nets.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{fill_standard_normal, SimRng};
use crate::vecops::{norm_sq, scale_in_place, sq_dist};

/// Relative slack on ‖x‖² ≤ d under which a vector counts as inside the ball.
/// Keeps [`project_ball`] idempotent at f64 precision.
const BALL_SLACK: f64 = 1e-12;

/// Tolerance on |‖x‖² − d| / d for a point to count as on the sphere.
pub const SPHERE_TOL: f64 = 1e-9;

/// A vector in R^d. Points produced by the samplers in this module lie on
/// √d·S^{d−1}.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Self {
        Point(coords)
    }

    /// Rescale `coords` onto the radius-√d sphere.
    pub fn onto_sphere(mut coords: Vec<f64>) -> Result<Self> {
        let d = coords.len();
        if d == 0 {
            return Err(Error::InvalidDimension(0));
        }
        let n2 = norm_sq(&coords);
        if !(n2 > 0.0) || !n2.is_finite() {
            return Err(Error::param("coords", "cannot normalize a zero or non-finite vector"));
        }
        scale_in_place(&mut coords, (d as f64 / n2).sqrt());
        Ok(Point(coords))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn is_on_sphere(&self) -> bool {
        is_on_sphere(&self.0)
    }
}

impl std::ops::Deref for Point {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

pub fn is_on_sphere(x: &[f64]) -> bool {
    let d = x.len() as f64;
    !x.is_empty() && (norm_sq(x) - d).abs() <= SPHERE_TOL * d
}

/// Write a uniform point of √d·S^{d−1} into `out` (d = `out.len()`).
pub(crate) fn sample_sphere_into<R: Rng + ?Sized>(rng: &mut R, out: &mut [f64]) {
    let d = out.len() as f64;
    if out.len() == 1 {
        // Rescaling is inexact; in one dimension the sphere is {−1, +1}.
        out[0] = if rng.random::<bool>() { 1.0 } else { -1.0 };
        return;
    }
    loop {
        fill_standard_normal(rng, out);
        let n2 = norm_sq(out);
        if n2 > 0.0 {
            scale_in_place(out, (d / n2).sqrt());
            return;
        }
    }
}

/// Uniform sample from √d·S^{d−1}: a standard Gaussian vector rescaled to norm √d.
pub fn sample_uniform_sphere<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Result<Point> {
    if d == 0 {
        return Err(Error::InvalidDimension(0));
    }
    let mut v = vec![0.0; d];
    sample_sphere_into(rng, &mut v);
    Ok(Point(v))
}

/// Euclidean projection onto the closed ball of radius √d, d = `x.len()`.
pub fn project_ball(x: &[f64]) -> Vec<f64> {
    let mut out = x.to_vec();
    project_ball_in_place(&mut out);
    out
}

pub fn project_ball_in_place(x: &mut [f64]) {
    let d = x.len() as f64;
    let n2 = norm_sq(x);
    if n2 <= d * (1.0 + BALL_SLACK) {
        return;
    }
    scale_in_place(x, (d / n2).sqrt());
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NetStrategy {
    /// i.i.d. uniform points, certified after the fact by [`verify_covering`].
    Randomized,
    /// Cube-surface lattice pushed radially onto the sphere. Covers by
    /// construction but grows quickly with d.
    Grid,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NetConfig {
    pub strategy: NetStrategy,
    /// Prefactor of the randomized net size.
    pub c_net: f64,
    /// Exponent constant: size = ceil(c_net · exp(c_exp · d · ln(1/ε_I))).
    pub c_exp: f64,
    pub d_max: usize,
    /// Hard cap on the number of stored points.
    pub max_points: usize,
}

impl Default for NetConfig {
    fn default() -> Self {
        NetConfig {
            strategy: NetStrategy::Randomized,
            c_net: 4.0,
            c_exp: 1.0,
            d_max: 12,
            max_points: 1 << 24,
        }
    }
}

impl NetConfig {
    /// Number of points the randomized strategy draws.
    pub fn randomized_size(&self, d: usize, eps_i: f64) -> f64 {
        (self.c_net * (self.c_exp * d as f64 * (1.0 / eps_i).ln()).exp()).ceil()
    }
}

/// A finite point set meant to cover the sphere at squared radius ε_I·d/2.
#[derive(Clone, Debug)]
pub struct Net {
    d: usize,
    eps_i: f64,
    data: Vec<f64>,
}

impl Net {
    pub fn from_points(d: usize, eps_i: f64, points: Vec<Point>) -> Result<Self> {
        check_eps_i(eps_i)?;
        let mut data = Vec::with_capacity(points.len() * d);
        for p in points {
            if p.dim() != d || !p.is_on_sphere() {
                return Err(Error::param("points", "net points must lie on the radius-√d sphere"));
            }
            data.extend_from_slice(&p);
        }
        Ok(Net { d, eps_i, data })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn eps_i(&self) -> f64 {
        self.eps_i
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.d
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn covering_radius_sq_target(&self) -> f64 {
        self.eps_i * self.d as f64 / 2.0
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.data[i * self.d..(i + 1) * self.d]
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.d)
    }
}

fn check_eps_i(eps_i: f64) -> Result<()> {
    if !(eps_i > 0.0 && eps_i < 0.5) {
        return Err(Error::param("eps_i", format!("must lie in (0, 1/2), got {eps_i}")));
    }
    Ok(())
}

/// Build a covering net of √d·S^{d−1} at precision `eps_i`.
pub fn build_net(d: usize, eps_i: f64, cfg: &NetConfig, rng: &mut SimRng) -> Result<Net> {
    if d == 0 {
        return Err(Error::InvalidDimension(0));
    }
    check_eps_i(eps_i)?;
    if d > cfg.d_max {
        return Err(Error::NetInfeasible {
            d,
            reason: format!("d exceeds d_max_net = {}", cfg.d_max),
        });
    }
    if d == 1 {
        return Ok(Net {
            d,
            eps_i,
            data: vec![1.0, -1.0],
        });
    }
    match cfg.strategy {
        NetStrategy::Randomized => {
            let m = cfg.randomized_size(d, eps_i);
            if !(m <= cfg.max_points as f64) {
                return Err(Error::NetInfeasible {
                    d,
                    reason: format!("randomized net needs {m} points, cap is {}", cfg.max_points),
                });
            }
            let m = m as usize;
            let mut data = vec![0.0; m * d];
            for row in data.chunks_exact_mut(d) {
                sample_sphere_into(rng, row);
            }
            Ok(Net { d, eps_i, data })
        }
        NetStrategy::Grid => grid_net(d, eps_i, cfg.max_points),
    }
}

/// Lattice on the faces of [−1, 1]^d, normalized onto the sphere.
///
/// A face point is within (h/2)·√(d−1) of the lattice (spacing h); radial
/// normalization from outside the unit ball is 1-Lipschitz, so spacing
/// h ≤ √(2·ε_I/(d−1)) guarantees squared covering radius ε_I·d/2 after scaling
/// by √d.
fn grid_net(d: usize, eps_i: f64, max_points: usize) -> Result<Net> {
    let h_max = (2.0 * eps_i / (d - 1) as f64).sqrt();
    let per_axis = (2.0 / h_max).ceil() as usize + 1;
    let face = (per_axis as f64).powi(d as i32 - 1);
    let total = 2.0 * d as f64 * face;
    if total > max_points as f64 {
        return Err(Error::NetInfeasible {
            d,
            reason: format!("grid net needs {total} points, cap is {max_points}"),
        });
    }
    let step = 2.0 / (per_axis - 1) as f64;
    let face = face as usize;
    let mut data = Vec::with_capacity(total as usize * d);
    let mut coords = vec![0.0; d];
    for axis in 0..d {
        for sign in [1.0, -1.0] {
            for idx in 0..face {
                let mut rem = idx;
                for (j, c) in coords.iter_mut().enumerate() {
                    if j == axis {
                        *c = sign;
                    } else {
                        *c = -1.0 + step * (rem % per_axis) as f64;
                        rem /= per_axis;
                    }
                }
                // Points shared by two faces are emitted twice; harmless for covering.
                let n2 = norm_sq(&coords);
                let s = (d as f64 / n2).sqrt();
                data.extend(coords.iter().map(|c| c * s));
            }
        }
    }
    Ok(Net { d, eps_i, data })
}

/// Fraction of `probes` uniform sphere points whose squared distance to the
/// nearest net point is at most ε_I·d/2.
pub fn verify_covering(net: &Net, probes: usize, rng: &mut SimRng) -> Result<f64> {
    if net.is_empty() {
        return Err(Error::param("net", "cannot verify an empty net"));
    }
    if probes == 0 {
        return Err(Error::param("probes", "need at least one probe"));
    }
    let d = net.d();
    let mut probe_data = vec![0.0; probes * d];
    for row in probe_data.chunks_exact_mut(d) {
        sample_sphere_into(rng, row);
    }
    let target = net.covering_radius_sq_target();
    let covered = probe_data
        .par_chunks_exact(d)
        .filter(|probe| net.points().any(|p| sq_dist(p, probe) <= target))
        .count();
    Ok(covered as f64 / probes as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;

    #[test]
    fn zero_dimension_rejected() {
        let mut rng = rng_from_seed(1);
        assert!(matches!(sample_uniform_sphere(0, &mut rng), Err(Error::InvalidDimension(0))));
    }

    #[test]
    fn one_dimensional_samples_are_signs() {
        let mut rng = rng_from_seed(2);
        let mut plus = 0;
        let n = 10_000;
        for _ in 0..n {
            let p = sample_uniform_sphere(1, &mut rng).unwrap();
            assert!(p[0] == 1.0 || p[0] == -1.0);
            if p[0] > 0.0 {
                plus += 1;
            }
        }
        // 3-sigma binomial band around n/2.
        let half = n as f64 / 2.0;
        assert!((plus as f64 - half).abs() < 3.0 * (n as f64 * 0.25).sqrt());
    }

    #[test]
    fn samples_are_on_sphere() {
        let mut rng = rng_from_seed(3);
        for d in [1, 2, 3, 17, 256, 20_001] {
            let p = sample_uniform_sphere(d, &mut rng).unwrap();
            assert!((norm_sq(&p) - d as f64).abs() <= 1e-9 * d as f64, "d={d}");
        }
    }

    #[test]
    fn coordinate_means_vanish_in_high_dimension() {
        let d = 1000;
        let n = 100_000;
        let mut rng = rng_from_seed(4);
        let mut mean = vec![0.0; d];
        let mut buf = vec![0.0; d];
        for _ in 0..n {
            sample_sphere_into(&mut rng, &mut buf);
            for (m, x) in mean.iter_mut().zip(&buf) {
                *m += x;
            }
        }
        let tol = 3.0 * (1.0 / n as f64).sqrt() * (d as f64).sqrt();
        // Each coordinate has unit variance, so the bound is a (generous) CLT band.
        for m in &mean {
            assert!((m / n as f64).abs() < tol);
        }
    }

    #[test]
    fn projection_examples() {
        let zero = vec![0.0; 5];
        assert_eq!(project_ball(&zero), zero);

        let d = 9.0f64;
        let x: Vec<f64> = vec![2.0 * d.sqrt(), 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0];
        let p = project_ball(&x);
        assert!((norm_sq(&p) - d).abs() < 1e-12);
        assert!(p[1..].iter().all(|&v| v == 0.0) && p[0] > 0.0);

        let mut rng = rng_from_seed(5);
        let s = sample_uniform_sphere(9, &mut rng).unwrap();
        assert_eq!(project_ball(&s), s.coords());
    }

    #[test]
    fn trivial_net_in_one_dimension() {
        let mut rng = rng_from_seed(6);
        for strategy in [NetStrategy::Randomized, NetStrategy::Grid] {
            let cfg = NetConfig {
                strategy,
                ..NetConfig::default()
            };
            for eps in [0.01, 0.2, 0.49] {
                let net = build_net(1, eps, &cfg, &mut rng).unwrap();
                assert_eq!(net.len(), 2);
                assert_eq!(net.point(0), &[1.0]);
                assert_eq!(net.point(1), &[-1.0]);
                assert_eq!(verify_covering(&net, 1000, &mut rng).unwrap(), 1.0);
            }
        }
    }

    #[test]
    fn net_guards() {
        let mut rng = rng_from_seed(7);
        let cfg = NetConfig::default();
        assert!(matches!(
            build_net(13, 0.3, &cfg, &mut rng),
            Err(Error::NetInfeasible { d: 13, .. })
        ));
        assert!(build_net(4, 0.5, &cfg, &mut rng).is_err());
        assert!(build_net(4, 0.0, &cfg, &mut rng).is_err());
    }

    #[test]
    fn randomized_net_size_and_points() {
        let mut rng = rng_from_seed(8);
        let cfg = NetConfig::default();
        let net = build_net(3, 0.4, &cfg, &mut rng).unwrap();
        let expected = (4.0 * (3.0 * (1.0f64 / 0.4).ln()).exp()).ceil() as usize;
        assert_eq!(net.len(), expected);
        assert!(net.points().all(is_on_sphere));
    }

    #[test]
    fn self_covering_when_probes_are_net_prefix() {
        let cfg = NetConfig::default();
        let net = build_net(4, 0.4, &cfg, &mut rng_from_seed(9)).unwrap();
        let probes = net.len().min(200);
        let frac = verify_covering(&net, probes, &mut rng_from_seed(9)).unwrap();
        assert_eq!(frac, 1.0);
    }

    #[test]
    fn grid_net_covers() {
        let cfg = NetConfig {
            strategy: NetStrategy::Grid,
            ..NetConfig::default()
        };
        let mut rng = rng_from_seed(10);
        let net = build_net(3, 0.3, &cfg, &mut rng).unwrap();
        assert!(net.points().all(is_on_sphere));
        assert_eq!(verify_covering(&net, 20_000, &mut rng).unwrap(), 1.0);
    }
}
