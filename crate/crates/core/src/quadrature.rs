//! Quadrature rules for complex-valued integrands.

use num_complex::Complex64;
use std::collections::BinaryHeap;
use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Gauss-Legendre nodes and weights on [-1, 1], computed by Newton iteration
/// on the Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, 0.0);
            for j in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * j + 1) as f64 * z * p1 - j as f64 * p2) / (j + 1) as f64;
            }
            dp = n as f64 * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Cached 16-point rule.
pub(crate) fn gl16() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(16))
}

/// Cached 32-point rule.
pub(crate) fn gl32() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(32))
}

// Kronrod 15-point abscissae and weights, Gauss 7-point weights (QUADPACK).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

fn gk15<F>(f: &F, a: f64, b: f64) -> (Complex64, f64)
where
    F: Fn(f64) -> Complex64,
{
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        kronrod += s * WGK[j];
        if j % 2 == 1 {
            gauss += s * WG[j / 2];
        }
    }
    let kronrod = kronrod * h;
    let gauss = gauss * h;
    (kronrod, (kronrod - gauss).norm())
}

/// Adaptive Gauss-Kronrod (7/15) integration with a global error budget.
pub fn adaptive_gk<F>(f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Result<Complex64>
where
    F: Fn(f64) -> Complex64,
{
    const MAX_INTERVALS: usize = 20_000;
    if a == b {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let (r0, e0) = gk15(&f, a, b);
    let mut panels: BinaryHeap<Panel> = BinaryHeap::new();
    panels.push(Panel { a, b, value: r0, error: e0 });
    let mut total = r0;
    let mut err = e0;
    let mut steps = 0usize;
    loop {
        if err <= abs_tol.max(rel_tol * total.norm()) {
            return Ok(total);
        }
        if panels.len() >= MAX_INTERVALS {
            return Err(Error::Convergence(format!(
                "adaptive quadrature on [{a:e}, {b:e}] stalled at error {err:e}"
            )));
        }
        let worst = panels.pop().expect("non-empty");
        let m = 0.5 * (worst.a + worst.b);
        if !(m > worst.a && m < worst.b) {
            return Err(Error::Convergence(format!(
                "adaptive quadrature cannot split [{:e}, {:e}] further",
                worst.a, worst.b
            )));
        }
        let (rl, el) = gk15(&f, worst.a, m);
        let (rr, er) = gk15(&f, m, worst.b);
        total += rl + rr - worst.value;
        err += el + er - worst.error;
        panels.push(Panel { a: worst.a, b: m, value: rl, error: el });
        panels.push(Panel { a: m, b: worst.b, value: rr, error: er });
        steps += 1;
        if steps.is_multiple_of(256) {
            // resum to shed accumulated rounding in the running totals
            total = panels.iter().map(|p| p.value).sum();
            err = panels.iter().map(|p| p.error).sum();
        }
    }
}

struct Panel {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error).is_eq()
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Mean of a 2π-periodic function over one period by the trapezoid rule,
/// doubling the node count until successive estimates agree to `abs_tol`.
pub fn periodic_mean<F>(f: F, abs_tol: f64) -> Result<Complex64>
where
    F: Fn(f64) -> Complex64,
{
    let mut n = 32usize;
    let mut sum: Complex64 = (0..n).map(|i| f(2.0 * PI * i as f64 / n as f64)).sum();
    let mut estimate = sum / n as f64;
    while n < (1 << 22) {
        // the new nodes sit at the midpoints of the old ones
        let mid: Complex64 = (0..n)
            .map(|i| f(2.0 * PI * (i as f64 + 0.5) / n as f64))
            .sum();
        sum += mid;
        n *= 2;
        let next = sum / n as f64;
        if (next - estimate).norm() <= abs_tol {
            return Ok(next);
        }
        estimate = next;
    }
    Err(Error::Convergence(
        "periodic trapezoid rule did not converge".into(),
    ))
}
