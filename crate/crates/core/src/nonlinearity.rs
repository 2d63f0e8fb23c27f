//! The extended-infomax nonlinearity `φ(s) = s + k·tanh(s)` and the rules that
//! pick the sign `k` for each component.

use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{IcaError, Result};

/// Below this many samples the stability criterion picks the sign; at or above
/// it, the sign of the sample excess kurtosis does.
pub const DEFAULT_SIGN_CUTOFF: usize = 1000;

/// Per-component nonlinearity sign `k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "i8", try_from = "i8")]
pub enum Sign {
    /// `k = +1`, super-Gaussian.
    Super,
    /// `k = -1`, sub-Gaussian.
    Sub,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Super => 1.0,
            Sign::Sub => -1.0,
        }
    }

    /// Sign of a criterion value; exact zero maps to `Super`.
    pub fn from_criterion(value: f64) -> Sign {
        if value >= 0.0 {
            Sign::Super
        } else {
            Sign::Sub
        }
    }
}

impl From<Sign> for i8 {
    fn from(s: Sign) -> i8 {
        match s {
            Sign::Super => 1,
            Sign::Sub => -1,
        }
    }
}

impl TryFrom<i8> for Sign {
    type Error = String;

    fn try_from(v: i8) -> std::result::Result<Self, String> {
        match v {
            1 => Ok(Sign::Super),
            -1 => Ok(Sign::Sub),
            _ => Err(format!("sign must be +1 or -1, got {v}")),
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Super => "+1",
            Sign::Sub => "-1",
        })
    }
}

/// `tanh` via a single `exp` of `−2|x|`; within a few ulps of `f64::tanh`
/// in absolute terms and exactly odd.
#[inline]
pub fn tanh(x: f64) -> f64 {
    let e = (-2.0 * x.abs()).exp();
    ((1.0 - e) / (1.0 + e)).copysign(x)
}

#[inline]
pub fn phi_scalar(s: f64, k: Sign) -> f64 {
    s + k.value() * tanh(s)
}

/// Elementwise `s + k·tanh(s)`.
pub fn phi(values: &[f64], k: Sign) -> Vec<f64> {
    values.iter().map(|&s| phi_scalar(s, k)).collect()
}

/// `E{sech²(s)}·E{s²} − E{tanh(s)·s}` with sample means.
pub fn stability_criterion<I>(component: I) -> f64
where
    I: IntoIterator<Item = f64>,
{
    let (mut sech2, mut sq, mut ts, mut count) = (0.0, 0.0, 0.0, 0usize);
    for s in component {
        let th = tanh(s);
        sech2 += 1.0 - th * th;
        sq += s * s;
        ts += th * s;
        count += 1;
    }
    let t = count as f64;
    (sech2 / t) * (sq / t) - ts / t
}

pub fn select_sign_stability<I>(component: I) -> Sign
where
    I: IntoIterator<Item = f64>,
{
    Sign::from_criterion(stability_criterion(component))
}

/// Sample excess kurtosis `m₄ / m₂² − 3` from central moments, or `None` when
/// the component has zero variance.
pub fn excess_kurtosis(component: &[f64]) -> Option<f64> {
    let t = component.len() as f64;
    let mean = component.iter().sum::<f64>() / t;
    let (mut m2, mut m4) = (0.0, 0.0);
    for &x in component {
        let d2 = (x - mean) * (x - mean);
        m2 += d2;
        m4 += d2 * d2;
    }
    m2 /= t;
    m4 /= t;
    if m2 <= 0.0 {
        return None;
    }
    Some(m4 / (m2 * m2) - 3.0)
}

pub fn select_sign_kurtosis(component: &[f64]) -> Result<Sign> {
    excess_kurtosis(component)
        .map(Sign::from_criterion)
        .ok_or(IcaError::DegenerateComponent { component: 0 })
}

/// Pick a sign for every row of an `m × t` source matrix.
///
/// Rows with fewer than `cutoff` samples use the stability criterion,
/// otherwise the excess-kurtosis sign.
pub fn select_signs(sources: &DMatrix<f64>, cutoff: usize) -> Result<Vec<Sign>> {
    let use_stability = sources.ncols() < cutoff;
    let mut row_buf = Vec::with_capacity(sources.ncols());
    sources
        .row_iter()
        .enumerate()
        .map(|(i, row)| {
            if use_stability {
                Ok(select_sign_stability(row.iter().copied()))
            } else {
                row_buf.clear();
                row_buf.extend(row.iter().copied());
                select_sign_kurtosis(&row_buf)
                    .map_err(|_| IcaError::DegenerateComponent { component: i })
            }
        })
        .collect()
}

/// Apply `φ` row-wise with each row's sign.
pub fn phi_rows(sources: &DMatrix<f64>, signs: &[Sign]) -> DMatrix<f64> {
    assert_eq!(sources.nrows(), signs.len(), "one sign per row");
    let mut out = sources.clone();
    for mut column in out.column_iter_mut() {
        for (v, &k) in column.iter_mut().zip(signs) {
            *v = phi_scalar(*v, k);
        }
    }
    out
}

/// Signs and higher-order covariance from sources stored sample-major
/// (`t × m`, one contiguous column per component). `phi` is scratch space of
/// the same shape. This is the layout the iteration loops use.
pub(crate) fn signs_and_cov_sample_major(
    sources_t: &DMatrix<f64>,
    cutoff: usize,
    phi: &mut DMatrix<f64>,
) -> Result<(Vec<Sign>, DMatrix<f64>)> {
    let (t, m) = sources_t.shape();
    let data = sources_t.as_slice();
    let signs = (0..m)
        .map(|i| {
            let component = &data[i * t..(i + 1) * t];
            if t < cutoff {
                Ok(select_sign_stability(component.iter().copied()))
            } else {
                select_sign_kurtosis(component).map_err(|_| IcaError::DegenerateComponent { component: i })
            }
        })
        .collect::<Result<Vec<_>>>()?;
    for ((out, src), chunk_sign) in phi
        .as_mut_slice()
        .chunks_exact_mut(t)
        .zip(data.chunks_exact(t))
        .zip(&signs)
    {
        for (o, &v) in out.iter_mut().zip(src) {
            *o = phi_scalar(v, *chunk_sign);
        }
    }
    let mut r = phi.tr_mul(sources_t);
    r /= t as f64;
    Ok((signs, r))
}

/// Higher-order covariance `(1/t)·Φ(S)·Sᵀ`.
pub fn higher_order_cov(sources: &DMatrix<f64>, signs: &[Sign]) -> DMatrix<f64> {
    let t = sources.ncols() as f64;
    let mut r = phi_rows(sources, signs) * sources.transpose();
    r /= t;
    r
}
