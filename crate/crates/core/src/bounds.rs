//! Closed-form capacity, entropy and sample-complexity bound expressions.
//!
//! All logarithms are natural. Constants the theory leaves unspecified (`c0`,
//! the prefactor of the quantitative curves) are explicit arguments; callers
//! should report them next to every value they print.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// AWGN capacity C(σ²) = ½·ln(1 + 1/σ²), nats per dimension.
pub fn capacity(sigma2: f64) -> Result<f64> {
    if !(sigma2 > 0.0) {
        return Err(Error::Domain {
            name: "sigma2",
            value: sigma2,
            expected: "sigma2 > 0",
        });
    }
    Ok(0.5 * (1.0 / sigma2).ln_1p())
}

/// C⁻¹(y) = 1/(e^{2y} − 1).
pub fn capacity_inv(y: f64) -> Result<f64> {
    if !(y > 0.0) {
        return Err(Error::Domain {
            name: "y",
            value: y,
            expected: "y > 0",
        });
    }
    Ok(1.0 / (2.0 * y).exp_m1())
}

/// h_b(p) in nats, with h_b(0) = h_b(1) = 0.
pub fn binary_entropy(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain {
            name: "p",
            value: p,
            expected: "0 <= p <= 1",
        });
    }
    let term = |x: f64| if x > 0.0 { -x * x.ln() } else { 0.0 };
    Ok(term(p) + term(1.0 - p))
}

/// Lower bound on I(X;X̂) for any estimator with average loss ≤ ε:
/// (dk/2)·ln(1/ε) − dk·ln(1 + c0·(εd)^{−1/2}) − k·ln k.
///
/// Returned as-is even when negative.
pub fn rdf_lower_bound(d: usize, k: usize, eps: f64, c0: f64) -> Result<f64> {
    check_eps(eps)?;
    let dk = (d * k) as f64;
    let kf = k as f64;
    Ok(0.5 * dk * (1.0 / eps).ln() - dk * (c0 / (eps * d as f64).sqrt()).ln_1p() - kf * kf.ln())
}

/// Labeled-sample upper bound on I(X; Y_1..Y_n): (dk/2)·ln(1 + n/(kσ²)).
pub fn labeled_mi_upper(d: usize, k: usize, sigma2: f64, n: f64) -> Result<f64> {
    if !(n >= 0.0) {
        return Err(Error::Domain {
            name: "n",
            value: n,
            expected: "n >= 0",
        });
    }
    if !(sigma2 > 0.0) {
        return Err(Error::Domain {
            name: "sigma2",
            value: sigma2,
            expected: "sigma2 > 0",
        });
    }
    Ok(0.5 * (d * k) as f64 * (n / (k as f64 * sigma2)).ln_1p())
}

/// Lower bound on n*/(kσ²) implied by the labeled bound: e^{−2R}/ε − 1.
pub fn sc_lower_trivial(eps: f64, rate: f64) -> Result<f64> {
    check_eps(eps)?;
    if !(rate >= 0.0) {
        return Err(Error::Domain {
            name: "rate",
            value: rate,
            expected: "rate >= 0",
        });
    }
    Ok((-2.0 * rate).exp() / eps - 1.0)
}

/// Single-sample bound h_b(e(δ)) + (δ + e(δ))·ln k, where e(δ) is the
/// ensemble decoding error at noise level C⁻¹((1+δ)·R).
pub fn single_sample_mi_upper(delta: f64, e_delta: f64, k: f64) -> Result<f64> {
    if !(delta > 0.0) {
        return Err(Error::Domain {
            name: "delta",
            value: delta,
            expected: "delta > 0",
        });
    }
    if !(k >= 1.0) {
        return Err(Error::Domain {
            name: "k",
            value: k,
            expected: "k >= 1",
        });
    }
    Ok(binary_entropy(e_delta)? + (delta + e_delta) * k.ln())
}

/// Noise level at which e(δ) is measured: σ₀² = C⁻¹((1+δ)·R).
pub fn delta_noise_level(delta: f64, rate: f64) -> Result<f64> {
    capacity_inv((1.0 + delta) * rate)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateRegime {
    Positive,
    Zero,
}

/// Shape of the above-capacity sample-complexity lower bound on n*/(σ²k):
/// positive rate `c·√(ln k / ln ln k)`, zero rate
/// `c·min{√(ln k / ln ln k), √(d / ln k)}`.
pub fn quantitative_lower_curve(regime: RateRegime, d: f64, k: f64, c: f64) -> Result<f64> {
    if !(k >= 3.0) {
        return Err(Error::Domain {
            name: "k",
            value: k,
            expected: "k >= 3",
        });
    }
    let lk = k.ln();
    let first = (lk / lk.ln()).sqrt();
    Ok(match regime {
        RateRegime::Positive => c * first,
        RateRegime::Zero => c * first.min((d / lk).sqrt()),
    })
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Domain {
            name: "eps",
            value: eps,
            expected: "0 < eps < 1",
        });
    }
    Ok(())
}
