//! Bessel functions of integer order.
//!
//! `J_n` uses the power series for small arguments and Miller's backward
//! recurrence normalised by `J_0 + 2 Σ J_2k = 1` otherwise. `I_n` uses the
//! power series, whose terms are all positive for real `x ≥ 0`.

use crate::error::{Error, Result};

/// Largest order accepted by the public entry points.
pub const MAX_ORDER: u32 = 10;
/// Largest |x| accepted by the public entry points.
pub const MAX_ARGUMENT: f64 = 50.0;

const SERIES_LIMIT: f64 = 1.0;
const RESCALE: f64 = 1e250;

/// Bessel function of the first kind `J_n(x)` for `0 ≤ n ≤ 10`, `|x| ≤ 50`.
pub fn bessel_j(order: u32, x: f64) -> Result<f64> {
    if order > MAX_ORDER {
        return Err(Error::domain(format!("Bessel order {order} exceeds {MAX_ORDER}")));
    }
    if !(x.abs() <= MAX_ARGUMENT) {
        return Err(Error::domain(format!("Bessel argument {x} outside [-50, 50]")));
    }
    Ok(jn(order as usize, x))
}

/// Modified Bessel function `I_n(x)` for `0 ≤ n ≤ 10`, `0 ≤ x ≤ 50`.
pub fn modified_bessel_i(order: u32, x: f64) -> Result<f64> {
    if order > MAX_ORDER {
        return Err(Error::domain(format!("Bessel order {order} exceeds {MAX_ORDER}")));
    }
    if !(0.0..=MAX_ARGUMENT).contains(&x) {
        return Err(Error::domain(format!("modified Bessel argument {x} outside [0, 50]")));
    }
    Ok(in_series(order as usize, x))
}

/// `J_n(x)` without range checks. Any order, any finite argument.
pub(crate) fn jn(order: usize, x: f64) -> f64 {
    if x == 0.0 {
        return if order == 0 { 1.0 } else { 0.0 };
    }
    let value = if x.abs() < SERIES_LIMIT {
        jn_series(order, x.abs())
    } else {
        jn_sequence(order, x.abs())[order]
    };
    if x < 0.0 && order % 2 == 1 {
        -value
    } else {
        value
    }
}

/// `[J_0(x), J_1(x), …, J_max_order(x)]` from a single backward sweep.
pub(crate) fn jn_sequence(max_order: usize, x: f64) -> Vec<f64> {
    if x == 0.0 {
        let mut out = vec![0.0; max_order + 1];
        out[0] = 1.0;
        return out;
    }
    let ax = x.abs();
    if ax < SERIES_LIMIT {
        return (0..=max_order).map(|n| jn(n, x)).collect();
    }

    // Start far enough above both the order and the argument that J_start is
    // negligible relative to every requested value.
    let top = (max_order as f64).max(ax);
    let mut start = (top + ax + 30.0 + 4.0 * top.sqrt()).ceil() as usize;
    if start % 2 == 1 {
        start += 1;
    }

    let mut out = vec![0.0; max_order + 1];
    let mut next = 0.0; // J_{k+1}
    let mut current = 1e-300; // J_k
    let mut norm = 0.0;
    for k in (1..=start).rev() {
        let prev = 2.0 * k as f64 / ax * current - next; // J_{k-1}
        next = current;
        current = prev;
        if current.abs() > RESCALE {
            current /= RESCALE;
            next /= RESCALE;
            norm /= RESCALE;
            for v in out.iter_mut() {
                *v /= RESCALE;
            }
        }
        let order = k - 1;
        if order <= max_order {
            out[order] = current;
        }
        if order > 0 && order % 2 == 0 {
            norm += 2.0 * current;
        }
    }
    norm += current;
    for (n, v) in out.iter_mut().enumerate() {
        *v /= norm;
        if x < 0.0 && n % 2 == 1 {
            *v = -*v;
        }
    }
    out
}

fn jn_series(order: usize, x: f64) -> f64 {
    let half = 0.5 * x;
    let mut term = 1.0;
    for k in 1..=order {
        term *= half / k as f64;
    }
    let q = -half * half;
    let mut sum = term;
    for k in 1..200 {
        term *= q / (k as f64 * (k + order) as f64);
        sum += term;
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    sum
}

/// `I_n(x)` for `x ≥ 0` by the power series.
pub(crate) fn in_series(order: usize, x: f64) -> f64 {
    if x == 0.0 {
        return if order == 0 { 1.0 } else { 0.0 };
    }
    let half = 0.5 * x;
    let mut term = 1.0;
    for k in 1..=order {
        term *= half / k as f64;
    }
    let q = half * half;
    let mut sum = term;
    for k in 1..1000 {
        term *= q / (k as f64 * (k + order) as f64);
        sum += term;
        if term < 1e-17 * sum {
            break;
        }
    }
    sum
}
