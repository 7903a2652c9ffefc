//! Synthetic fringe scans and their sinusoidal least-squares fit.
//!
//! Positions are lateral shifts of the third grating in nanometres, so that
//! records survive a round trip through their CSV form bit for bit.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{Matrix3, Vector3};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Poisson};

use crate::engine::FringeHarmonics;
use crate::error::{Error, Result};

/// A fringe scan: counts per position, each collected over `dwell_time`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanRecord {
    pub positions_nm: Vec<f64>,
    /// Seconds per point.
    pub dwell_time: f64,
    pub counts: Vec<u64>,
    /// Counts per second.
    pub dark_rate: f64,
    /// Seed of the generator that produced the record; `None` for measured data.
    pub rng_seed: Option<u64>,
}

impl ScanRecord {
    pub fn new(
        positions_nm: Vec<f64>,
        dwell_time: f64,
        counts: Vec<u64>,
        dark_rate: f64,
        rng_seed: Option<u64>,
    ) -> Result<Self> {
        let r = ScanRecord {
            positions_nm,
            dwell_time,
            counts,
            dark_rate,
            rng_seed,
        };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        if self.positions_nm.len() != self.counts.len() {
            return Err(Error::domain(format!(
                "{} positions but {} counts",
                self.positions_nm.len(),
                self.counts.len()
            )));
        }
        if self.positions_nm.iter().any(|p| !p.is_finite()) {
            return Err(Error::domain("positions must be finite"));
        }
        if self.positions_nm.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::domain("positions must be strictly increasing"));
        }
        if !(self.dwell_time >= 0.0 && self.dwell_time.is_finite()) {
            return Err(Error::domain(format!("dwell time {} must be non-negative", self.dwell_time)));
        }
        if !(self.dark_rate >= 0.0 && self.dark_rate.is_finite()) {
            return Err(Error::domain(format!("dark rate {} must be non-negative", self.dark_rate)));
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# dwell_s = {}", self.dwell_time);
        let _ = writeln!(out, "# dark_rate_cps = {}", self.dark_rate);
        if let Some(seed) = self.rng_seed {
            let _ = writeln!(out, "# seed = {seed}");
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["position_nm", "counts"]).expect("in-memory write");
        for (p, c) in self.positions_nm.iter().zip(&self.counts) {
            w.write_record([p.to_string(), c.to_string()]).expect("in-memory write");
        }
        let body = w.into_inner().expect("in-memory flush");
        out.push_str(std::str::from_utf8(&body).expect("ASCII output"));
        out
    }

    pub fn from_csv_str(text: &str) -> Result<Self> {
        let fail = |line: usize, message: String| Error::Syntax { line, message };
        let mut dwell = None;
        let mut dark = None;
        let mut seed = None;
        let mut body_start = text.len();
        let mut offset = 0;
        let mut header_line = 1;
        for (i, line) in text.split_inclusive('\n').enumerate() {
            let trimmed = line.trim();
            if let Some(meta) = trimmed.strip_prefix('#') {
                let (key, value) = meta
                    .split_once('=')
                    .ok_or_else(|| fail(i + 1, format!("expected `# key = value`, found `{trimmed}`")))?;
                let (key, value) = (key.trim(), value.trim());
                let num = |v: &str| v.parse::<f64>().map_err(|_| fail(i + 1, format!("`{key}` is not a number")));
                match key {
                    "dwell_s" => dwell = Some(num(value)?),
                    "dark_rate_cps" => dark = Some(num(value)?),
                    "seed" => {
                        seed = Some(
                            value
                                .parse::<u64>()
                                .map_err(|_| fail(i + 1, "`seed` is not an unsigned integer".into()))?,
                        )
                    }
                    // provenance lines written by the tool
                    _ => {}
                }
            } else if !trimmed.is_empty() {
                body_start = offset;
                header_line = i + 1;
                break;
            }
            offset += line.len();
        }

        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(&text.as_bytes()[body_start..]);
        let headers = reader
            .headers()
            .map_err(|e| fail(header_line, e.to_string()))?
            .clone();
        if headers.iter().collect::<Vec<_>>() != ["position_nm", "counts"] {
            return Err(fail(header_line, "expected header `position_nm,counts`".into()));
        }
        let mut positions = Vec::new();
        let mut counts = Vec::new();
        for (i, row) in reader.records().enumerate() {
            let line = header_line + 1 + i;
            let row = row.map_err(|e| fail(line, e.to_string()))?;
            if row.len() != 2 {
                return Err(fail(line, format!("expected 2 fields, found {}", row.len())));
            }
            positions.push(
                row[0]
                    .parse::<f64>()
                    .map_err(|_| fail(line, format!("bad position `{}`", &row[0])))?,
            );
            counts.push(
                row[1]
                    .parse::<u64>()
                    .map_err(|_| fail(line, format!("bad count `{}`", &row[1])))?,
            );
        }
        let dwell = dwell.ok_or_else(|| fail(1, "missing `# dwell_s = …`".into()))?;
        let dark = dark.unwrap_or(0.0);
        ScanRecord::new(positions, dwell, counts, dark, seed)
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_csv_string()).map_err(|e| Error::io(path, e))
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        ScanRecord::from_csv_str(&text).map_err(|e| match e {
            Error::Syntax { line, message } => Error::Format {
                path: path.to_path_buf(),
                message: format!("line {line}: {message}"),
            },
            other => Error::Format {
                path: path.to_path_buf(),
                message: other.to_string(),
            },
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitResult {
    /// Fitted mean counts per point, dark counts included.
    pub offset: f64,
    pub amplitude: f64,
    /// Fringe phase: the model is `offset + amplitude·cos(2πx/d − phase)`.
    pub phase: f64,
    pub visibility: f64,
    pub sigma_visibility: f64,
    pub reduced_chi_square: f64,
}

/// Expected count rates `flux_scale·S(x)/S_0` at the given positions.
pub fn render_expected_rates(h: &FringeHarmonics, positions_nm: &[f64], flux_scale: f64) -> Result<Vec<f64>> {
    if !(flux_scale > 0.0 && flux_scale.is_finite()) {
        return Err(Error::domain(format!("flux scale {flux_scale} must be positive")));
    }
    let s0 = h.s0();
    if !(s0 > 0.0) {
        return Err(Error::domain(format!("total flux S_0 = {s0} must be positive")));
    }
    Ok(positions_nm
        .iter()
        .map(|p| flux_scale * h.signal(p * 1e-9) / s0)
        .collect())
}

/// Poisson counts with mean `(rate + dark_rate)·dwell_time` per point.
pub fn synthesize_scan(
    positions_nm: &[f64],
    rates: &[f64],
    dwell_time: f64,
    dark_rate: f64,
    seed: u64,
) -> Result<ScanRecord> {
    if rates.len() != positions_nm.len() {
        return Err(Error::domain(format!(
            "{} rates for {} positions",
            rates.len(),
            positions_nm.len()
        )));
    }
    if let Some(r) = rates.iter().find(|r| !(**r >= 0.0 && r.is_finite())) {
        return Err(Error::domain(format!("rate {r} must be non-negative")));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut counts = Vec::with_capacity(rates.len());
    for &rate in rates {
        let mean = (rate + dark_rate) * dwell_time;
        let k = if mean > 0.0 {
            let p = Poisson::new(mean).map_err(|e| Error::domain(format!("Poisson mean {mean}: {e}")))?;
            p.sample(&mut rng) as u64
        } else {
            0
        };
        counts.push(k);
    }
    ScanRecord::new(positions_nm.to_vec(), dwell_time, counts, dark_rate, Some(seed))
}

pub fn fit_scan(record: &ScanRecord, period: f64) -> Result<FitResult> {
    record.validate()?;
    let counts: Vec<f64> = record.counts.iter().map(|&c| c as f64).collect();
    fit_counts(
        &record.positions_nm,
        &counts,
        record.dwell_time,
        record.dark_rate,
        period * 1e9,
    )
}

/// Weighted fit of `a₀ + a_c·cos(2πx/d) + a_s·sin(2πx/d)` to real-valued
/// counts, with variance `max(count, 1)` per point. The dark level
/// `dark_rate·dwell_time` is subtracted from `a₀` before forming the
/// visibility.
pub fn fit_counts(
    positions_nm: &[f64],
    counts: &[f64],
    dwell_time: f64,
    dark_rate: f64,
    period_nm: f64,
) -> Result<FitResult> {
    let n = positions_nm.len();
    if counts.len() != n {
        return Err(Error::domain(format!("{} counts for {n} positions", counts.len())));
    }
    if n < 5 {
        return Err(Error::domain(format!("a fit needs at least 5 points, found {n}")));
    }
    if !(period_nm > 0.0 && period_nm.is_finite()) {
        return Err(Error::domain(format!("period {period_nm} nm must be positive")));
    }
    // N points spaced evenly over one period span (N−1)/N of it
    let span = positions_nm[n - 1] - positions_nm[0];
    if span * (n as f64) / ((n - 1) as f64) < period_nm * (1.0 - 1e-9) {
        return Err(Error::domain(format!(
            "positions span {span} nm, less than one period of {period_nm} nm"
        )));
    }

    let k = 2.0 * std::f64::consts::PI / period_nm;
    let basis = |x: f64| Vector3::new(1.0, (k * x).cos(), (k * x).sin());
    let mut normal = Matrix3::zeros();
    let mut rhs = Vector3::zeros();
    for (&x, &c) in positions_nm.iter().zip(counts) {
        let w = 1.0 / c.max(1.0);
        let b = basis(x);
        normal += w * b * b.transpose();
        rhs += w * c * b;
    }
    let svd = normal.svd(false, false);
    let (smax, smin) = (svd.singular_values.max(), svd.singular_values.min());
    if !(smin > 1e-10 * smax) {
        return Err(Error::Fit("design matrix is rank deficient (aliased positions)".into()));
    }
    let cov = normal
        .try_inverse()
        .ok_or_else(|| Error::Fit("normal matrix is singular".into()))?;
    let a = cov * rhs;

    let dark = dark_rate * dwell_time;
    let denom = a[0] - dark;
    if !(denom > 0.0) {
        return Err(Error::Fit(format!(
            "fitted offset {} does not exceed the dark level {dark}",
            a[0]
        )));
    }
    let amplitude = a[1].hypot(a[2]);
    let visibility = amplitude / denom;
    let sigma_visibility = if amplitude > 0.0 {
        let grad = Vector3::new(
            -amplitude / (denom * denom),
            a[1] / (amplitude * denom),
            a[2] / (amplitude * denom),
        );
        (grad.transpose() * cov * grad)[(0, 0)].max(0.0).sqrt()
    } else {
        // at zero amplitude the gradient has no direction; use the mean
        // variance of the two quadratures
        (0.5 * (cov[(1, 1)] + cov[(2, 2)])).sqrt() / denom
    };
    Ok(FitResult {
        offset: a[0],
        amplitude,
        phase: a[2].atan2(a[1]),
        visibility,
        sigma_visibility,
        reduced_chi_square: chi_square(positions_nm, counts, &a, &basis) / (n - 3) as f64,
    })
}

fn chi_square<B: Fn(f64) -> Vector3<f64>>(positions: &[f64], counts: &[f64], a: &Vector3<f64>, basis: &B) -> f64 {
    positions
        .iter()
        .zip(counts)
        .map(|(&x, &c)| {
            let r = c - a.dot(&basis(x));
            r * r / c.max(1.0)
        })
        .sum()
}

#[cfg(test)]
mod tests;
