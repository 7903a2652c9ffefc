//! Longitudinal velocity distributions and their quadrature nodes.

use crate::error::{Error, Result};

/// Half-width of the truncated Gaussian in standard deviations.
pub const TRUNCATION_SIGMAS: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VelocityShape {
    Delta,
    GaussianTruncated,
}

impl std::str::FromStr for VelocityShape {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "delta" => Ok(VelocityShape::Delta),
            "gaussian" | "gaussian-truncated" => Ok(VelocityShape::GaussianTruncated),
            _ => Err(format!("expected `delta` or `gaussian`, found `{s}`")),
        }
    }
}

impl std::fmt::Display for VelocityShape {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            VelocityShape::Delta => "delta",
            VelocityShape::GaussianTruncated => "gaussian",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VelocityDistribution {
    pub mean: f64,
    pub relative_sigma: f64,
    pub shape: VelocityShape,
    pub node_count: usize,
}

impl VelocityDistribution {
    pub fn delta(mean: f64) -> Result<Self> {
        let d = VelocityDistribution {
            mean,
            relative_sigma: 0.0,
            shape: VelocityShape::Delta,
            node_count: 1,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn gaussian(mean: f64, relative_sigma: f64, node_count: usize) -> Result<Self> {
        let d = VelocityDistribution {
            mean,
            relative_sigma,
            shape: VelocityShape::GaussianTruncated,
            node_count,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mean > 0.0 && self.mean.is_finite()) {
            return Err(Error::domain(format!("mean velocity {} must be positive", self.mean)));
        }
        if self.shape == VelocityShape::GaussianTruncated {
            if !(0.0..1.0).contains(&self.relative_sigma) {
                return Err(Error::domain(format!(
                    "relative sigma {} must lie in [0, 1)",
                    self.relative_sigma
                )));
            }
            if self.node_count < 3 || self.node_count.is_multiple_of(2) {
                return Err(Error::domain(format!(
                    "node count {} must be odd and at least 3",
                    self.node_count
                )));
            }
        }
        Ok(())
    }

    /// True when the distribution collapses onto its mean.
    pub fn is_sharp(&self) -> bool {
        self.shape == VelocityShape::Delta || self.relative_sigma == 0.0
    }

    /// Reduced coordinate `t = (v/v̄ − 1)/σ` of a speed.
    pub(crate) fn reduced(&self, speed: f64) -> f64 {
        (speed / self.mean - 1.0) / self.relative_sigma
    }

    pub(crate) fn speed_at(&self, t: f64) -> f64 {
        self.mean * (1.0 + self.relative_sigma * t)
    }

    /// Normalized `(speed, weight)` pairs of the plain trapezoid grid with
    /// `node_count` nodes. Nodes at non-positive speed are dropped before
    /// normalization.
    pub fn nodes(&self) -> Vec<(f64, f64)> {
        if self.is_sharp() {
            return vec![(self.mean, 1.0)];
        }
        let grid = VelocityGrid::new(self, &[]);
        let raw: Vec<(f64, f64)> = grid.level(0).into_iter().map(|n| (n.speed, n.weight)).collect();
        let total: f64 = raw.iter().map(|(_, w)| w).sum();
        raw.into_iter().map(|(v, w)| (v, w / total)).collect()
    }
}

/// Order of the endpoint map at a breakpoint: a feature behaving as
/// `|t − t_c|^{1/p}` becomes smooth in the mapped variable.
const CUSP_MAP_ORDER: i32 = 5;

/// Breakpoints farther out than this (in σ) are ignored; their Gaussian
/// weight is below the averaging tolerance.
const BREAKPOINT_SIGMAS: f64 = 4.0;
const MAX_BREAKPOINTS: usize = 64;

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    cusp_left: bool,
    cusp_right: bool,
    intervals: usize,
}

/// A node of the velocity grid. `key` identifies it across refinement
/// levels, so values computed on a coarse level are reused.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct VelocityNode {
    pub key: (usize, u64),
    pub speed: f64,
    /// Unnormalized weight, trapezoid times Gaussian.
    pub weight: f64,
}

/// Trapezoid quadrature over the truncated Gaussian in `t`, split at
/// breakpoints where the integrand is not smooth. Each level doubles the
/// intervals of every segment and contains all nodes of the previous one.
#[derive(Debug, Clone)]
pub(crate) struct VelocityGrid {
    dist: VelocityDistribution,
    segments: Vec<Segment>,
}

fn sigmoid(tau: f64) -> (f64, f64) {
    let p = CUSP_MAP_ORDER;
    let (x, y) = (tau.powi(p), (1.0 - tau).powi(p));
    let den = x + y;
    let dg = p as f64 * tau.powi(p - 1) * (1.0 - tau).powi(p - 1) / (den * den);
    (x / den, dg)
}

impl Segment {
    /// Map `τ ∈ [0, 1] ↦ t` and its derivative.
    fn map(&self, tau: f64) -> (f64, f64) {
        let (g, dg) = match (self.cusp_left, self.cusp_right) {
            (false, false) => (tau, 1.0),
            (true, true) => sigmoid(tau),
            (true, false) => {
                let (g, dg) = sigmoid(0.5 * tau);
                (2.0 * g, dg)
            }
            (false, true) => {
                let (g, dg) = sigmoid(0.5 * (1.0 + tau));
                (2.0 * g - 1.0, dg)
            }
        };
        let len = self.b - self.a;
        (self.a + len * g, len * dg)
    }
}

impl VelocityGrid {
    /// `breakpoints` are speeds; those outside the useful range are dropped.
    pub fn new(dist: &VelocityDistribution, breakpoints: &[f64]) -> Self {
        let lo = (-TRUNCATION_SIGMAS).max(-1.0 / dist.relative_sigma);
        let hi = TRUNCATION_SIGMAS;
        let mut cuts: Vec<f64> = breakpoints
            .iter()
            .filter(|v| **v > 0.0)
            .map(|&v| dist.reduced(v))
            .filter(|t| t.abs() < BREAKPOINT_SIGMAS && *t > lo && *t < hi)
            .collect();
        cuts.sort_by(|a, b| a.abs().total_cmp(&b.abs()));
        cuts.truncate(MAX_BREAKPOINTS);
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();

        let mut ends = vec![(lo, false)];
        ends.extend(cuts.iter().map(|&t| (t, true)));
        ends.push((hi, false));
        let span = 2.0 * TRUNCATION_SIGMAS;
        let total = (dist.node_count - 1) as f64;
        let segments = ends
            .windows(2)
            .map(|w| {
                let (a, cusp_left) = w[0];
                let (b, cusp_right) = w[1];
                let share = (total * (b - a) / span).round() as usize;
                let floor = if cusp_left || cusp_right { 4 } else { 1 };
                Segment {
                    a,
                    b,
                    cusp_left,
                    cusp_right,
                    intervals: share.max(floor),
                }
            })
            .collect();
        VelocityGrid {
            dist: *dist,
            segments,
        }
    }

    /// Nodes of refinement `level` with positive weight and speed.
    pub fn level(&self, level: u32) -> Vec<VelocityNode> {
        let mut out = Vec::new();
        for (k, seg) in self.segments.iter().enumerate() {
            let n = seg.intervals << level;
            // interior segment ends are breakpoints, where the map has zero
            // slope, so every node belongs to exactly one segment
            for j in 0..=n {
                let tau = j as f64 / n as f64;
                let (t, dt) = seg.map(tau);
                let trap = if j == 0 || j == n { 0.5 } else { 1.0 };
                let weight = trap * dt / n as f64 * (-0.5 * t * t).exp();
                let speed = self.dist.speed_at(t);
                if weight > 0.0 && speed > 0.0 {
                    out.push(VelocityNode {
                        key: (k, tau.to_bits()),
                        speed,
                        weight,
                    });
                }
            }
        }
        out
    }
}
