//! Run configuration: the line-oriented file grammar, `--set` overrides and
//! validation into typed settings.
//!
//! Every key has a default, so an empty file is a complete configuration
//! (C70 in the standing-wave arrangement at 146 m/s). The resolved
//! configuration renders back to the same grammar for output metadata.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::engine::{
    Arrangement, CentralGrating, EngineOptions, EqPrefactors, InterferometerGeometry, VelocityDistribution,
    VelocityShape, VisibilityMode,
};
use crate::error::{Error, Result};
use crate::grating::{LaserGrating, MaterialGrating, WallModel};
use crate::keyvalue::{self, Document, Section};
use crate::molecule::{molecule_from_section, Molecule, MoleculeCatalog};

/// Allowed keys per section.
const SCHEMA: &[(&str, &[&str])] = &[
    ("run", &["arrangement", "eq_prefactors", "s_max", "visibility", "seed"]),
    ("molecule", &["name", "catalog", "mass_amu", "alpha_A3", "sigma_abs_m2", "note"]),
    (
        "geometry",
        &["separation_m", "period_m", "open_fraction", "thickness_m", "wall_model"],
    ),
    ("laser", &["wavelength_m", "power_W", "waist_y_m", "waist_z_m"]),
    ("velocity", &["shape", "mean_mps", "relative_sigma", "nodes"]),
    ("sweep", &["kind", "start", "stop", "steps"]),
    ("numerics", &["velocity_tolerance", "max_velocity_nodes"]),
    ("scan", &["points", "periods", "dwell_s", "dark_rate_cps", "flux_cps", "input"]),
    ("mismatch", &["delta_period_m", "illuminated_width_m"]),
    ("output", &["path"]),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepKind {
    /// de Broglie wavelength in metres.
    Wavelength,
    /// Laser power in watts.
    Power,
    /// Mean velocity in m/s.
    Velocity,
}

impl FromStr for SweepKind {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "wavelength" => Ok(SweepKind::Wavelength),
            "power" => Ok(SweepKind::Power),
            "velocity" | "mean-velocity" => Ok(SweepKind::Velocity),
            _ => Err(format!("expected `wavelength`, `power` or `velocity`, found `{s}`")),
        }
    }
}

impl std::fmt::Display for SweepKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SweepKind::Wavelength => "wavelength",
            SweepKind::Power => "power",
            SweepKind::Velocity => "velocity",
        })
    }
}

/// An evenly spaced grid `start..=stop` with `steps` nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSpec {
    pub kind: SweepKind,
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        let lowest_ok = match self.kind {
            SweepKind::Power => self.start >= 0.0,
            _ => self.start > 0.0,
        };
        if !(lowest_ok && self.start.is_finite()) {
            return Err(Error::config("sweep.start", format!("{} is out of range", self.start)));
        }
        if !(self.stop > self.start && self.stop.is_finite()) {
            return Err(Error::config("sweep.stop", "must be finite and greater than sweep.start"));
        }
        if self.steps < 2 {
            return Err(Error::config("sweep.steps", "need at least 2 grid nodes"));
        }
        Ok(())
    }

    pub fn grid(&self) -> Vec<f64> {
        let n = self.steps - 1;
        (0..=n)
            .map(|i| {
                if i == n {
                    self.stop
                } else {
                    self.start + (self.stop - self.start) * i as f64 / n as f64
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanSettings {
    pub points: usize,
    pub periods: f64,
    pub dwell_time: f64,
    pub dark_rate: f64,
    /// Mean signal rate in counts/s, excluding dark counts.
    pub flux: f64,
}

impl ScanSettings {
    /// Evenly spaced positions in nm, `points` per `periods` periods.
    pub fn positions_nm(&self, period: f64) -> Vec<f64> {
        let d = period * 1e9;
        (0..self.points)
            .map(|i| i as f64 * self.periods * d / self.points as f64)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mismatch {
    pub delta_period: f64,
    pub illuminated_width: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub arrangement: Arrangement,
    pub molecule: Molecule,
    pub catalog: MoleculeCatalog,
    pub separation: f64,
    /// Period of the material gratings in the all-material arrangement.
    pub period: f64,
    pub open_fraction: f64,
    pub thickness: f64,
    pub wall_model: WallModel,
    pub laser: LaserGrating,
    pub velocity: VelocityDistribution,
    pub options: EngineOptions,
    pub s_max: usize,
    pub visibility_mode: VisibilityMode,
    pub seed: Option<u64>,
    pub sweep: Option<SweepSpec>,
    pub scan: ScanSettings,
    pub scan_input: Option<PathBuf>,
    pub mismatch: Option<Mismatch>,
    pub output: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        parse_config("").expect("defaults are valid")
    }
}

/// Parses configuration text.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    parse_config_with(text, &[], None)
}

/// Parses configuration text, then applies `section.key=value` overrides.
/// Relative paths inside the file resolve against `base_dir`.
pub fn parse_config_with(text: &str, overrides: &[String], base_dir: Option<&Path>) -> Result<RunConfig> {
    let mut doc = keyvalue::parse(text)?;
    for o in overrides {
        let (path, value) = o
            .split_once('=')
            .ok_or_else(|| Error::config(o.clone(), "override must look like `section.key=value`"))?;
        let (section, key) = path
            .trim()
            .split_once('.')
            .ok_or_else(|| Error::config(path.trim(), "override key must be `section.key`"))?;
        let value = value.trim();
        if value.is_empty() {
            return Err(Error::config(path.trim(), "override value is empty"));
        }
        doc.set(section.trim(), key.trim(), value);
    }
    from_document(&doc, base_dir)
}

pub fn load_config(path: impl AsRef<Path>, overrides: &[String]) -> Result<RunConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config_with(&text, overrides, path.parent())
}

fn check_schema(doc: &Document) -> Result<()> {
    for s in &doc.sections {
        if s.name.is_empty() {
            match s.entries.first() {
                Some(e) => {
                    return Err(Error::config(
                        e.key.clone(),
                        format!("line {}: keys must follow a [section] header", e.line),
                    ))
                }
                None => continue,
            }
        }
        let allowed = SCHEMA
            .iter()
            .find(|(name, _)| *name == s.name)
            .map(|(_, keys)| *keys)
            .ok_or_else(|| {
                let names: Vec<&str> = SCHEMA.iter().map(|(n, _)| *n).collect();
                Error::config(
                    s.name.clone(),
                    format!("unknown section (line {}); expected one of {}", s.line, names.join(", ")),
                )
            })?;
        for e in &s.entries {
            if !allowed.contains(&e.key.as_str()) {
                let at = if e.line > 0 { format!("line {}", e.line) } else { "override".into() };
                return Err(Error::config(
                    format!("{}.{}", s.name, e.key),
                    format!("unknown key ({at}); expected one of {}", allowed.join(", ")),
                ));
            }
        }
    }
    Ok(())
}

struct Reader<'a> {
    doc: &'a Document,
}

impl Reader<'_> {
    fn raw(&self, section: &str, key: &str) -> Option<&str> {
        self.doc
            .section(section)
            .and_then(|s| s.get(key))
            .map(|e| e.value.as_str())
    }

    fn f64(&self, section: &str, key: &str, default: f64) -> Result<f64> {
        match self.raw(section, key) {
            Some(v) => keyvalue::parse_f64(&format!("{section}.{key}"), v),
            None => Ok(default),
        }
    }

    fn usize(&self, section: &str, key: &str, default: usize) -> Result<usize> {
        match self.raw(section, key) {
            Some(v) => keyvalue::parse_usize(&format!("{section}.{key}"), v),
            None => Ok(default),
        }
    }

    fn parsed<T: FromStr<Err = String>>(&self, section: &str, key: &str, default: T) -> Result<T> {
        match self.raw(section, key) {
            Some(v) => v.parse().map_err(|m| Error::config(format!("{section}.{key}"), m)),
            None => Ok(default),
        }
    }
}

fn resolve_path(value: &str, base_dir: Option<&Path>) -> PathBuf {
    let p = PathBuf::from(value);
    match base_dir {
        Some(dir) if p.is_relative() => dir.join(p),
        _ => p,
    }
}

fn from_document(doc: &Document, base_dir: Option<&Path>) -> Result<RunConfig> {
    check_schema(doc)?;
    let r = Reader { doc };
    let in_range = |path: &str, ok: bool, msg: &str| if ok { Ok(()) } else { Err(Error::config(path, msg)) };

    let arrangement = r.parsed("run", "arrangement", Arrangement::Kdtli)?;
    let prefactors = r.parsed("run", "eq_prefactors", EqPrefactors::Derived)?;
    let s_max = r.usize("run", "s_max", 5)?;
    in_range("run.s_max", s_max >= 1, "must be at least 1")?;
    let visibility_mode = r.parsed("run", "visibility", VisibilityMode::Sinusoidal)?;
    let seed = match r.raw("run", "seed") {
        Some(v) => Some(
            v.parse::<u64>()
                .map_err(|_| Error::config("run.seed", format!("expected an unsigned integer, found `{v}`")))?,
        ),
        None => None,
    };

    // molecule: a catalog entry, optionally with fields overridden, or a new
    // species defined inline
    let mut catalog = MoleculeCatalog::builtin();
    if let Some(file) = r.raw("molecule", "catalog") {
        let path = resolve_path(file, base_dir);
        let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        catalog.merge_document(&keyvalue::parse(&text)?)?;
    }
    let name = r.raw("molecule", "name").unwrap_or("C70").to_string();
    let fields: Vec<_> = doc
        .section("molecule")
        .map(|s| {
            s.entries
                .iter()
                .filter(|e| !matches!(e.key.as_str(), "name" | "catalog"))
                .cloned()
                .collect()
        })
        .unwrap_or_default();
    let base = catalog.get(&name).ok().cloned();
    if base.is_none() && !fields.iter().any(|e| e.key == "mass_amu") {
        // surfaces the catalog's list of known names
        catalog.get(&name)?;
    }
    let section = Section {
        name: "molecule".into(),
        line: 0,
        entries: fields,
    };
    // field errors name the config section rather than the species
    let mut molecule = molecule_from_section(&section, base).map_err(|e| match e {
        Error::Config { key, message } => {
            let field = key.rsplit('.').next().unwrap_or(&key).to_string();
            Error::config(format!("molecule.{field}"), message)
        }
        other => other,
    })?;
    molecule.name = name;
    molecule.polarizability_volume()?;

    let separation = r.f64("geometry", "separation_m", 0.105)?;
    let period = r.f64("geometry", "period_m", 266.38e-9)?;
    let open_fraction = r.f64("geometry", "open_fraction", 0.42)?;
    let thickness = r.f64("geometry", "thickness_m", 190e-9)?;
    let wall_model = r.parsed("geometry", "wall_model", WallModel::RetardedCp)?;
    in_range("geometry.separation_m", separation > 0.0, "must be positive")?;

    let laser = LaserGrating::new(
        r.f64("laser", "wavelength_m", 532.28e-9)?,
        r.f64("laser", "power_W", 5.0)?,
        r.f64("laser", "waist_y_m", 900e-6)?,
        r.f64("laser", "waist_z_m", 20e-6)?,
    )
    .map_err(|e| Error::config("laser", e.to_string()))?;

    let shape = r.parsed("velocity", "shape", VelocityShape::GaussianTruncated)?;
    let mean = r.f64("velocity", "mean_mps", 146.0)?;
    let velocity = match shape {
        VelocityShape::Delta => VelocityDistribution::delta(mean),
        VelocityShape::GaussianTruncated => VelocityDistribution::gaussian(
            mean,
            r.f64("velocity", "relative_sigma", 0.16)?,
            r.usize("velocity", "nodes", 201)?,
        ),
    }
    .map_err(|e| Error::config("velocity", e.to_string()))?;

    let options = EngineOptions {
        prefactors,
        velocity_tolerance: r.f64("numerics", "velocity_tolerance", 1e-4)?,
        max_velocity_nodes: r.usize("numerics", "max_velocity_nodes", 3201)?,
    };
    in_range(
        "numerics.velocity_tolerance",
        options.velocity_tolerance > 0.0,
        "must be positive",
    )?;

    let sweep = match doc.section("sweep") {
        None => None,
        Some(_) => {
            let kind: SweepKind = r
                .raw("sweep", "kind")
                .ok_or_else(|| Error::config("sweep.kind", "required when a [sweep] section is present"))?
                .parse()
                .map_err(|m| Error::config("sweep.kind", m))?;
            let need = |k: &str| {
                r.raw("sweep", k)
                    .ok_or_else(|| Error::config(format!("sweep.{k}"), "required"))
                    .and_then(|v| keyvalue::parse_f64(&format!("sweep.{k}"), v))
            };
            let spec = SweepSpec {
                kind,
                start: need("start")?,
                stop: need("stop")?,
                steps: r.usize("sweep", "steps", 101)?,
            };
            spec.validate()?;
            Some(spec)
        }
    };

    let scan = ScanSettings {
        points: r.usize("scan", "points", 40)?,
        periods: r.f64("scan", "periods", 2.0)?,
        dwell_time: r.f64("scan", "dwell_s", 1.0)?,
        dark_rate: r.f64("scan", "dark_rate_cps", 0.0)?,
        flux: r.f64("scan", "flux_cps", 100.0)?,
    };
    in_range("scan.points", scan.points >= 5, "a fit needs at least 5 points")?;
    in_range("scan.periods", scan.periods >= 1.0, "scans must cover at least one period")?;
    in_range("scan.dwell_s", scan.dwell_time >= 0.0, "must be non-negative")?;
    in_range("scan.dark_rate_cps", scan.dark_rate >= 0.0, "must be non-negative")?;
    in_range("scan.flux_cps", scan.flux > 0.0, "must be positive")?;
    let scan_input = r.raw("scan", "input").map(|v| resolve_path(v, base_dir));

    let mismatch = match doc.section("mismatch") {
        None => None,
        Some(_) => {
            let m = Mismatch {
                delta_period: r.f64("mismatch", "delta_period_m", 0.0)?,
                illuminated_width: r.f64("mismatch", "illuminated_width_m", 0.68e-3)?,
            };
            in_range(
                "mismatch.illuminated_width_m",
                m.illuminated_width > 0.0,
                "must be positive",
            )?;
            Some(m)
        }
    };
    let output = r.raw("output", "path").map(PathBuf::from);

    let cfg = RunConfig {
        arrangement,
        molecule,
        catalog,
        separation,
        period,
        open_fraction,
        thickness,
        wall_model,
        laser,
        velocity,
        options,
        s_max,
        visibility_mode,
        seed,
        sweep,
        scan,
        scan_input,
        mismatch,
        output,
    };
    cfg.geometry(cfg.arrangement)
        .map_err(|e| Error::config("geometry", e.to_string()))?;
    Ok(cfg)
}

impl RunConfig {
    /// The interferometer for `arrangement`. The standing-wave arrangement
    /// uses masks of period `λ_L/2`; the material one uses `period`.
    pub fn geometry(&self, arrangement: Arrangement) -> Result<InterferometerGeometry> {
        match arrangement {
            Arrangement::Kdtli => {
                InterferometerGeometry::kdtli(self.laser, self.open_fraction, self.thickness, self.separation)
            }
            Arrangement::Tli => {
                let g = MaterialGrating::new(self.period, self.open_fraction, self.thickness, self.wall_model)?;
                InterferometerGeometry::tli(g, self.separation)
            }
        }
    }

    /// Visibility reduction from the configured period mismatch, 1 if none.
    pub fn mismatch_factor(&self, arrangement: Arrangement) -> Result<f64> {
        match self.mismatch {
            None => Ok(1.0),
            Some(m) => {
                let d = self.geometry(arrangement)?.period();
                crate::engine::period_mismatch_factor(m.delta_period, m.illuminated_width, d)
            }
        }
    }

    /// Fully resolved configuration in file form, defaults included.
    pub fn to_document(&self) -> Document {
        let mut d = Document::default();
        let mut set = |s: &str, k: &str, v: String| d.set(s, k, &v);
        set("run", "arrangement", self.arrangement.to_string());
        set("run", "eq_prefactors", self.options.prefactors.to_string());
        set("run", "s_max", self.s_max.to_string());
        set("run", "visibility", self.visibility_mode.to_string());
        if let Some(seed) = self.seed {
            set("run", "seed", seed.to_string());
        }
        let m = &self.molecule;
        set("molecule", "name", m.name.clone());
        set("molecule", "mass_amu", keyvalue::format_number(m.mass_amu));
        if let Some(a) = m.polarizability_a3 {
            set("molecule", "alpha_A3", keyvalue::format_number(a));
        }
        set("molecule", "sigma_abs_m2", keyvalue::format_number(m.absorption_cross_section));
        set("geometry", "separation_m", keyvalue::format_number(self.separation));
        set("geometry", "period_m", keyvalue::format_number(self.period));
        set("geometry", "open_fraction", keyvalue::format_number(self.open_fraction));
        set("geometry", "thickness_m", keyvalue::format_number(self.thickness));
        set("geometry", "wall_model", self.wall_model.to_string());
        set("laser", "wavelength_m", keyvalue::format_number(self.laser.wavelength));
        set("laser", "power_W", keyvalue::format_number(self.laser.power));
        set("laser", "waist_y_m", keyvalue::format_number(self.laser.waist_y));
        set("laser", "waist_z_m", keyvalue::format_number(self.laser.waist_z));
        set("velocity", "shape", self.velocity.shape.to_string());
        set("velocity", "mean_mps", keyvalue::format_number(self.velocity.mean));
        if self.velocity.shape == VelocityShape::GaussianTruncated {
            set("velocity", "relative_sigma", keyvalue::format_number(self.velocity.relative_sigma));
            set("velocity", "nodes", self.velocity.node_count.to_string());
        }
        if let Some(s) = &self.sweep {
            set("sweep", "kind", s.kind.to_string());
            set("sweep", "start", keyvalue::format_number(s.start));
            set("sweep", "stop", keyvalue::format_number(s.stop));
            set("sweep", "steps", s.steps.to_string());
        }
        set("numerics", "velocity_tolerance", keyvalue::format_number(self.options.velocity_tolerance));
        set("numerics", "max_velocity_nodes", self.options.max_velocity_nodes.to_string());
        set("scan", "points", self.scan.points.to_string());
        set("scan", "periods", keyvalue::format_number(self.scan.periods));
        set("scan", "dwell_s", keyvalue::format_number(self.scan.dwell_time));
        set("scan", "dark_rate_cps", keyvalue::format_number(self.scan.dark_rate));
        set("scan", "flux_cps", keyvalue::format_number(self.scan.flux));
        if let Some(p) = &self.scan_input {
            set("scan", "input", p.display().to_string());
        }
        if let Some(mm) = &self.mismatch {
            set("mismatch", "delta_period_m", keyvalue::format_number(mm.delta_period));
            set("mismatch", "illuminated_width_m", keyvalue::format_number(mm.illuminated_width));
        }
        if let Some(p) = &self.output {
            set("output", "path", p.display().to_string());
        }
        d
    }

    pub fn central_grating(&self, arrangement: Arrangement) -> Result<CentralGrating> {
        Ok(self.geometry(arrangement)?.grating2)
    }
}
