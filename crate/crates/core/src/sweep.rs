//! Parameter sweeps over a run configuration and their CSV form.

use std::path::Path;

use rayon::prelude::*;

use crate::config::{RunConfig, SweepKind, SweepSpec};
use crate::engine::{
    self, Arrangement, FringeHarmonics, InterferometerGeometry, KdtliParameters, VelocityDistribution, VelocityShape,
};
use crate::error::{Error, Result};
use crate::physics::{de_broglie_wavelength, talbot_length};
use crate::scan::{self, ScanRecord};

/// Column-major result of a sweep with optional footer annotations.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub footer: Vec<(String, String)>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            ..Table::default()
        }
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }
}

/// Same distribution shape and relative width, centred on `mean`.
fn recentred(dist: &VelocityDistribution, mean: f64) -> Result<VelocityDistribution> {
    match dist.shape {
        VelocityShape::Delta => VelocityDistribution::delta(mean),
        VelocityShape::GaussianTruncated => VelocityDistribution::gaussian(mean, dist.relative_sigma, dist.node_count),
    }
}

/// Applies the configured period mismatch to each harmonic. The `s`-th
/// harmonic accumulates `s` times the phase error of the first.
pub fn apply_mismatch(cfg: &RunConfig, h: &FringeHarmonics) -> Result<FringeHarmonics> {
    let Some(m) = cfg.mismatch else {
        return Ok(h.clone());
    };
    let mut c = h.components().to_vec();
    for (s, v) in c.iter_mut().enumerate().skip(1) {
        *v *= engine::period_mismatch_factor(s as f64 * m.delta_period, m.illuminated_width, h.period)?;
    }
    FringeHarmonics::new(h.period, c)
}

/// Velocity-averaged harmonics of `geometry` under the configured options.
pub fn averaged_harmonics(
    cfg: &RunConfig,
    geometry: &InterferometerGeometry,
    dist: &VelocityDistribution,
) -> Result<FringeHarmonics> {
    let h = engine::velocity_averaged_harmonics_with(geometry, &cfg.molecule, dist, cfg.s_max, &cfg.options)?;
    apply_mismatch(cfg, &h)
}

pub fn averaged_visibility(
    cfg: &RunConfig,
    geometry: &InterferometerGeometry,
    dist: &VelocityDistribution,
) -> Result<f64> {
    averaged_harmonics(cfg, geometry, dist)?.visibility(cfg.visibility_mode)
}

fn require_sweep(cfg: &RunConfig, kind: SweepKind) -> Result<SweepSpec> {
    match cfg.sweep {
        Some(s) if s.kind == kind => Ok(s),
        Some(s) => Err(Error::config(
            "sweep.kind",
            format!("configured sweep is `{}`, this command needs `{kind}`", s.kind),
        )),
        None => Err(Error::config("sweep", format!("a [sweep] section with kind = {kind} is required"))),
    }
}

/// Velocity-averaged visibility of the configured arrangement at a single
/// working point, with the standing-wave parameters at the mean speed.
pub fn visibility_point(cfg: &RunConfig) -> Result<Table> {
    let geometry = cfg.geometry(cfg.arrangement)?;
    let v = cfg.velocity.mean;
    let lambda = de_broglie_wavelength(cfg.molecule.mass_amu, v)?;
    let zeta = cfg.separation / talbot_length(geometry.period(), lambda)?;
    let (phi, n0, closed) = match geometry.laser() {
        Some(laser) => {
            let phi = engine::phi_max_with(&cfg.molecule, laser, v, cfg.options.prefactors)?;
            let n0 = engine::mean_absorbed_photons_with(&cfg.molecule, laser, v, cfg.options.prefactors)?;
            let p = KdtliParameters::at_ratio(phi, n0, zeta, cfg.open_fraction)?;
            let closed = engine::visibility_closed_form(&p)? * cfg.mismatch_factor(cfg.arrangement)?;
            (phi, n0, closed)
        }
        None => (f64::NAN, f64::NAN, f64::NAN),
    };
    let visibility = averaged_visibility(cfg, &geometry, &cfg.velocity)?;
    let mut t = Table::new(&[
        "mean_velocity_mps",
        "lambda_dB_m",
        "talbot_ratio",
        "phi_max_rad",
        "n0",
        "visibility_closed_form",
        "visibility",
    ]);
    t.rows.push(vec![v, lambda.meters(), zeta, phi, n0, closed, visibility]);
    Ok(t)
}

/// Visibility against laser power for the standing-wave arrangement.
pub fn sweep_power(cfg: &RunConfig) -> Result<Table> {
    if cfg.arrangement != Arrangement::Kdtli {
        return Err(Error::config("run.arrangement", "a power sweep needs arrangement = kdtli"));
    }
    let spec = require_sweep(cfg, SweepKind::Power)?;
    let base = cfg.geometry(Arrangement::Kdtli)?;
    let values: Vec<f64> = spec
        .grid()
        .par_iter()
        .map(|&p| averaged_visibility(cfg, &base.with_laser_power(p), &cfg.velocity))
        .collect::<Result<_>>()?;
    let mut t = Table::new(&["power_W", "visibility"]);
    t.rows = spec.grid().into_iter().zip(values).map(|(p, v)| vec![p, v]).collect();
    Ok(t)
}

/// Visibility against mean velocity for the configured arrangement.
pub fn sweep_velocity(cfg: &RunConfig) -> Result<Table> {
    let spec = require_sweep(cfg, SweepKind::Velocity)?;
    let geometry = cfg.geometry(cfg.arrangement)?;
    let values: Vec<f64> = spec
        .grid()
        .par_iter()
        .map(|&v| averaged_visibility(cfg, &geometry, &recentred(&cfg.velocity, v)?))
        .collect::<Result<_>>()?;
    let mut t = Table::new(&["mean_velocity_mps", "visibility"]);
    t.rows = spec.grid().into_iter().zip(values).map(|(v, x)| vec![v, x]).collect();
    Ok(t)
}

/// Both arrangements against de Broglie wavelength. The footer carries the
/// relative width of the tallest material-grating peak and of the
/// standing-wave peak closest to it.
pub fn sweep_wavelength(cfg: &RunConfig) -> Result<Table> {
    let spec = require_sweep(cfg, SweepKind::Wavelength)?;
    let tli = cfg.geometry(Arrangement::Tli)?;
    let kdtli = cfg.geometry(Arrangement::Kdtli)?;
    let grid = spec.grid();
    let rows: Vec<Vec<f64>> = grid
        .par_iter()
        .map(|&lambda| {
            let v = crate::physics::kinematics::speed_for_wavelength(
                cfg.molecule.mass_amu,
                crate::physics::Wavelength::new(lambda)?,
            )?;
            let dist = recentred(&cfg.velocity, v)?;
            Ok(vec![
                lambda,
                v,
                averaged_visibility(cfg, &tli, &dist)?,
                averaged_visibility(cfg, &kdtli, &dist)?,
            ])
        })
        .collect::<Result<_>>()?;
    let mut t = Table::new(&["lambda_dB_m", "speed_mps", "visibility_tli", "visibility_kdtli"]);
    t.rows = rows;

    let tli_v = t.column("visibility_tli").unwrap_or_default();
    let kd_v = t.column("visibility_kdtli").unwrap_or_default();
    let peak = argmax(&tli_v);
    let fmt = |w: Option<(f64, f64)>, at: usize| match w {
        Some((lo, hi)) => format!("{:.10e}", (hi - lo) / grid[at]),
        None => "unresolved".into(),
    };
    if let Some(i) = peak {
        t.footer.push(("tli_peak_lambda_m".into(), format!("{:.10e}", grid[i])));
        t.footer.push(("tli_peak_visibility".into(), format!("{:.10e}", tli_v[i])));
        t.footer.push(("tli_fwhm_rel".into(), fmt(peak_fwhm(&grid, &tli_v, i), i)));
        if let Some(j) = nearest_local_max(&kd_v, i) {
            t.footer.push(("kdtli_peak_lambda_m".into(), format!("{:.10e}", grid[j])));
            t.footer.push(("kdtli_fwhm_rel".into(), fmt(peak_fwhm(&grid, &kd_v, j), j)));
        }
    }
    Ok(t)
}

/// Runs the sweep named in the configuration.
pub fn run_sweep(cfg: &RunConfig) -> Result<Table> {
    match cfg.sweep.map(|s| s.kind) {
        Some(SweepKind::Power) => sweep_power(cfg),
        Some(SweepKind::Wavelength) => sweep_wavelength(cfg),
        Some(SweepKind::Velocity) => sweep_velocity(cfg),
        None => Err(Error::config("sweep", "no [sweep] section configured")),
    }
}

/// Synthetic Poisson scan of the configured arrangement.
pub fn simulate_scan(cfg: &RunConfig, seed: u64) -> Result<ScanRecord> {
    let geometry = cfg.geometry(cfg.arrangement)?;
    let h = averaged_harmonics(cfg, &geometry, &cfg.velocity)?;
    let positions = cfg.scan.positions_nm(geometry.period());
    let rates = scan::render_expected_rates(&h, &positions, cfg.scan.flux)?;
    scan::synthesize_scan(&positions, &rates, cfg.scan.dwell_time, cfg.scan.dark_rate, seed)
}

pub fn argmax(values: &[f64]) -> Option<usize> {
    values
        .iter()
        .enumerate()
        .filter(|(_, v)| v.is_finite())
        .fold(None, |best: Option<(usize, f64)>, (i, &v)| match best {
            Some((_, b)) if b >= v => best,
            _ => Some((i, v)),
        })
        .map(|(i, _)| i)
}

/// Index of the local maximum reached by climbing from `start`.
fn nearest_local_max(values: &[f64], start: usize) -> Option<usize> {
    if start >= values.len() {
        return None;
    }
    let mut i = start;
    loop {
        let left = i.checked_sub(1).map(|j| values[j]).unwrap_or(f64::NEG_INFINITY);
        let right = values.get(i + 1).copied().unwrap_or(f64::NEG_INFINITY);
        if left > values[i] && left >= right {
            i -= 1;
        } else if right > values[i] {
            i += 1;
        } else {
            return Some(i);
        }
    }
}

/// Half-maximum crossings `(x_left, x_right)` around the peak at `peak`,
/// linearly interpolated. `None` if either side stays above half maximum
/// within the grid.
pub fn peak_fwhm(x: &[f64], y: &[f64], peak: usize) -> Option<(f64, f64)> {
    let half = 0.5 * y[peak];
    let cross = |i: usize, j: usize| x[i] + (half - y[i]) * (x[j] - x[i]) / (y[j] - y[i]);
    let left = (0..peak).rev().find(|&i| y[i] < half).map(|i| cross(i, i + 1))?;
    let right = (peak + 1..y.len()).find(|&i| y[i] < half).map(|i| cross(i - 1, i))?;
    Some((left, right))
}

fn format_value(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else {
        format!("{v:.16e}")
    }
}

/// `# key = value` provenance lines: tool version, prefactor choice, seed
/// and the fully resolved configuration.
pub fn metadata(cfg: &RunConfig, seed: Option<u64>) -> String {
    let mut out = String::new();
    out.push_str(&format!("# tool = talbot {}\n", env!("CARGO_PKG_VERSION")));
    out.push_str(&format!("# eq_prefactors = {}\n", cfg.options.prefactors));
    if cfg.options.prefactors == engine::EqPrefactors::Printed {
        out.push_str("# warning = literal printed prefactors in use; phase and photon number differ from the fluence derivation\n");
    }
    let builtin_alpha = crate::molecule::builtin_molecule(&cfg.molecule.name)
        .map(|m| m.polarizability_a3.is_some())
        .unwrap_or(true);
    if !builtin_alpha {
        out.push_str(&format!(
            "# warning = polarizability of {} is user-assumed; no reference value exists\n",
            cfg.molecule.name
        ));
    }
    if let Some(s) = seed {
        out.push_str(&format!("# seed = {s}\n"));
    }
    for (k, v) in cfg.to_document().flatten() {
        out.push_str(&format!("# config.{k} = {v}\n"));
    }
    out
}

/// CSV text: `# key = value` metadata, the header, data rows and footer
/// annotations. Values carry 17 significant digits and round-trip exactly.
pub fn emit_csv(table: &Table, cfg: &RunConfig, seed: Option<u64>) -> String {
    let mut out = metadata(cfg, seed.or(cfg.seed));
    let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
    // writing into a Vec cannot fail
    w.write_record(&table.columns).expect("in-memory write");
    for row in &table.rows {
        w.write_record(row.iter().map(|v| format_value(*v))).expect("in-memory write");
    }
    out.push_str(&String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii output"));
    for (k, v) in &table.footer {
        out.push_str(&format!("# {k} = {v}\n"));
    }
    out
}

pub fn write_table(table: &Table, cfg: &RunConfig, seed: Option<u64>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, emit_csv(table, cfg, seed)).map_err(|e| Error::io(path, e))
}

/// A table read back from CSV with its leading metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedTable {
    pub metadata: Vec<(String, String)>,
    pub table: Table,
}

/// Parses text produced by [`emit_csv`]. Comment lines before the header
/// are metadata; those after it are footer annotations.
pub fn parse_table(text: &str) -> Result<ParsedTable> {
    let syntax = |line: usize, message: String| Error::Syntax { line, message };
    let mut metadata = Vec::new();
    let mut footer = Vec::new();
    let mut body = String::new();
    let mut header_line = 0;
    let mut seen_header = false;
    for (i, line) in text.lines().enumerate() {
        if let Some(rest) = line.strip_prefix('#') {
            let (k, v) = rest
                .split_once('=')
                .ok_or_else(|| syntax(i + 1, "comment lines must be `# key = value`".into()))?;
            let kv = (k.trim().to_string(), v.trim().to_string());
            if seen_header { footer.push(kv) } else { metadata.push(kv) }
        } else if !line.trim().is_empty() {
            if !seen_header {
                header_line = i + 1;
            }
            seen_header = true;
            body.push_str(line);
            body.push('\n');
        }
    }
    if !seen_header {
        return Err(syntax(text.lines().count().max(1), "missing header row".into()));
    }
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(body.as_bytes());
    let columns: Vec<String> = r
        .headers()
        .map_err(|e| syntax(header_line, e.to_string()))?
        .iter()
        .map(String::from)
        .collect();
    let mut rows = Vec::new();
    for (n, rec) in r.records().enumerate() {
        let line = header_line + n + 1;
        let rec = rec.map_err(|e| syntax(line, e.to_string()))?;
        let row = rec
            .iter()
            .map(|f| f.trim().parse::<f64>().map_err(|_| syntax(line, format!("`{f}` is not a number"))))
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok(ParsedTable {
        metadata,
        table: Table { columns, rows, footer },
    })
}
