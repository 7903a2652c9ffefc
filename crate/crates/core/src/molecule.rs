//! Molecular species and the built-in catalog.
//!
//! Polarizabilities are stored as polarizability volumes in Å³; conversion to
//! SI happens inside the formulas that consume them.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};
use crate::keyvalue::{self, Document, Section};
use crate::physics::constants::ANGSTROM3;

#[derive(Debug, Clone, PartialEq)]
pub struct Molecule {
    pub name: String,
    pub mass_amu: f64,
    /// Optical polarizability volume at 532 nm, Å³. `None` when unknown.
    pub polarizability_a3: Option<f64>,
    /// Absorption cross section at 532 nm, m².
    pub absorption_cross_section: f64,
    pub note: String,
}

impl Molecule {
    pub fn new(
        name: impl Into<String>,
        mass_amu: f64,
        polarizability_a3: Option<f64>,
        absorption_cross_section: f64,
    ) -> Result<Self> {
        let m = Molecule {
            name: name.into(),
            mass_amu,
            polarizability_a3,
            absorption_cross_section,
            note: String::new(),
        };
        m.validate()?;
        Ok(m)
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }

    pub fn validate(&self) -> Result<()> {
        let field = |f: &str| format!("{}.{}", self.name, f);
        if !(self.mass_amu > 0.0 && self.mass_amu.is_finite()) {
            return Err(Error::config(field("mass_amu"), "mass must be positive"));
        }
        if let Some(a) = self.polarizability_a3 {
            if !(a >= 0.0 && a.is_finite()) {
                return Err(Error::config(field("alpha_A3"), "polarizability must be non-negative"));
            }
        }
        if !(self.absorption_cross_section >= 0.0 && self.absorption_cross_section.is_finite()) {
            return Err(Error::config(
                field("sigma_abs_m2"),
                "absorption cross section must be non-negative",
            ));
        }
        Ok(())
    }

    /// Polarizability volume in m³, or an error if the species has none.
    pub fn polarizability_volume(&self) -> Result<f64> {
        self.polarizability_a3
            .map(|a| a * ANGSTROM3)
            .ok_or_else(|| Error::MissingPolarizability {
                name: self.name.clone(),
            })
    }
}

fn builtin_entries() -> Vec<Molecule> {
    vec![
        Molecule {
            name: "C70".into(),
            mass_amu: 840.0,
            polarizability_a3: Some(118.0),
            absorption_cross_section: 2.1e-21,
            note: "fullerene; the 532 nm polarizability also sets the wall potential".into(),
        },
        Molecule {
            name: "azobenzene-F".into(),
            mass_amu: 1034.0,
            polarizability_a3: Some(49.0),
            absorption_cross_section: 0.0,
            note: "perfluoroalkyl-functionalised azobenzene; absorption neglected by default".into(),
        },
        Molecule {
            name: "perfluoro-7k".into(),
            mass_amu: 7000.0,
            polarizability_a3: None,
            absorption_cross_section: 1.34e-21,
            note: "perfluorinated macromolecule; polarizability must be user-assumed".into(),
        },
        Molecule {
            name: "Au5000".into(),
            mass_amu: 1.0e6,
            polarizability_a3: Some(25_000.0),
            absorption_cross_section: 0.0,
            note: "gold cluster extrapolation; absorption neglected by default".into(),
        },
    ]
}

/// A name-indexed, immutable set of molecules.
#[derive(Debug, Clone, PartialEq)]
pub struct MoleculeCatalog {
    entries: BTreeMap<String, Molecule>,
}

impl Default for MoleculeCatalog {
    fn default() -> Self {
        Self::builtin()
    }
}

impl MoleculeCatalog {
    pub fn builtin() -> Self {
        MoleculeCatalog {
            entries: builtin_entries()
                .into_iter()
                .map(|m| (m.name.clone(), m))
                .collect(),
        }
    }

    pub fn names(&self) -> Vec<String> {
        self.entries.keys().cloned().collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Molecule> {
        self.entries.values()
    }

    pub fn get(&self, name: &str) -> Result<&Molecule> {
        self.entries.get(name).ok_or_else(|| Error::UnknownMolecule {
            name: name.to_string(),
            available: self.names(),
        })
    }

    /// Merges definition-file sections over this catalog. Fields present in
    /// a section override an existing entry; new entries need `mass_amu`.
    pub fn merge_document(&mut self, doc: &Document) -> Result<()> {
        for section in &doc.sections {
            if section.name.is_empty() {
                let key = section.entries.first().map(|e| e.key.clone()).unwrap_or_default();
                return Err(Error::config(key, "molecule keys must appear inside a [name] section"));
            }
            let base = self.entries.get(&section.name).cloned();
            let molecule = molecule_from_section(section, base)?;
            self.entries.insert(molecule.name.clone(), molecule);
        }
        Ok(())
    }

    pub fn to_document(&self) -> Document {
        let mut doc = Document::default();
        for m in self.entries.values() {
            doc.set(&m.name, "mass_amu", &keyvalue::format_number(m.mass_amu));
            if let Some(a) = m.polarizability_a3 {
                doc.set(&m.name, "alpha_A3", &keyvalue::format_number(a));
            }
            doc.set(&m.name, "sigma_abs_m2", &keyvalue::format_number(m.absorption_cross_section));
        }
        doc
    }

    pub fn to_config_string(&self) -> String {
        self.to_document().render()
    }
}

pub(crate) fn molecule_from_section(section: &Section, base: Option<Molecule>) -> Result<Molecule> {
    let path = |k: &str| format!("{}.{}", section.name, k);
    let mut m = base.unwrap_or(Molecule {
        name: section.name.clone(),
        mass_amu: f64::NAN,
        polarizability_a3: None,
        absorption_cross_section: 0.0,
        note: String::new(),
    });
    for e in &section.entries {
        match e.key.as_str() {
            "mass_amu" => m.mass_amu = keyvalue::parse_f64(&path("mass_amu"), &e.value)?,
            "alpha_A3" => m.polarizability_a3 = Some(keyvalue::parse_f64(&path("alpha_A3"), &e.value)?),
            "sigma_abs_m2" => {
                m.absorption_cross_section = keyvalue::parse_f64(&path("sigma_abs_m2"), &e.value)?
            }
            "note" => m.note = e.value.clone(),
            other => {
                return Err(Error::config(
                    path(other),
                    format!("unknown key (line {}); expected mass_amu, alpha_A3, sigma_abs_m2, note", e.line),
                ))
            }
        }
    }
    if m.mass_amu.is_nan() {
        return Err(Error::config(path("mass_amu"), "required for a new molecule"));
    }
    m.validate()?;
    Ok(m)
}

/// Looks up a built-in species by catalog key.
pub fn builtin_molecule(name: &str) -> Result<Molecule> {
    MoleculeCatalog::builtin().get(name).cloned()
}

/// Built-ins merged with the definitions in `path`.
pub fn load_molecules(path: impl AsRef<Path>) -> Result<MoleculeCatalog> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_molecules(&text)
}

pub fn parse_molecules(text: &str) -> Result<MoleculeCatalog> {
    let doc = keyvalue::parse(text)?;
    let mut catalog = MoleculeCatalog::builtin();
    catalog.merge_document(&doc)?;
    Ok(catalog)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_values() {
        let c70 = builtin_molecule("C70").unwrap();
        assert_eq!(c70.mass_amu, 840.0);
        assert_eq!(c70.polarizability_a3, Some(118.0));
        assert_eq!(c70.absorption_cross_section, 2.1e-21);

        let azo = builtin_molecule("azobenzene-F").unwrap();
        assert_eq!((azo.mass_amu, azo.polarizability_a3), (1034.0, Some(49.0)));
        assert_eq!(azo.absorption_cross_section, 0.0);

        let au = builtin_molecule("Au5000").unwrap();
        assert_eq!((au.mass_amu, au.polarizability_a3), (1.0e6, Some(25_000.0)));

        let pf = builtin_molecule("perfluoro-7k").unwrap();
        assert_eq!(pf.mass_amu, 7000.0);
        assert_eq!(pf.absorption_cross_section, 1.34e-21);
        assert!(matches!(
            pf.polarizability_volume(),
            Err(Error::MissingPolarizability { .. })
        ));
    }

    #[test]
    fn every_builtin_is_valid() {
        for m in MoleculeCatalog::builtin().iter() {
            m.validate().unwrap();
        }
    }

    #[test]
    fn unknown_name_lists_keys() {
        let err = builtin_molecule("C60").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("C70") && msg.contains("Au5000"), "{msg}");
    }

    #[test]
    fn empty_file_gives_builtins() {
        assert_eq!(parse_molecules("").unwrap(), MoleculeCatalog::builtin());
    }

    #[test]
    fn override_merges_over_builtin() {
        let cat = parse_molecules("[C70]\nmass_amu = 841.5\n").unwrap();
        let c70 = cat.get("C70").unwrap();
        assert_eq!(c70.mass_amu, 841.5);
        assert_eq!(c70.polarizability_a3, Some(118.0));
    }

    #[test]
    fn new_entry_and_perfluoro_alpha() {
        let cat = parse_molecules(
            "[perfluoro-7k]\nalpha_A3 = 500\n\n[insulin]\nmass_amu = 5808\nalpha_A3 = 600\n",
        )
        .unwrap();
        assert_eq!(cat.get("perfluoro-7k").unwrap().polarizability_a3, Some(500.0));
        assert_eq!(cat.get("insulin").unwrap().absorption_cross_section, 0.0);
    }

    #[test]
    fn invalid_entries_are_rejected() {
        match parse_molecules("[bad]\nmass_amu = -3\n") {
            Err(Error::Config { key, .. }) => assert_eq!(key, "bad.mass_amu"),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            parse_molecules("[x]\nalpha_A3 = 3\n"),
            Err(Error::Config { .. })
        ));
        assert!(matches!(
            parse_molecules("[x]\nmass_amu = 3\nmass = 4\n"),
            Err(Error::Config { .. })
        ));
        assert!(matches!(
            parse_molecules("[x]\nmass_amu = 3\n[x]\nmass_amu = 4\n"),
            Err(Error::Syntax { line: 3, .. })
        ));
    }

    #[test]
    fn load_reports_path() {
        let err = load_molecules("/nonexistent/molecules.conf").unwrap_err();
        assert!(err.to_string().contains("/nonexistent/molecules.conf"));
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn serialization_round_trip_is_exact(
                mass in 1e-3f64..1e8,
                alpha in proptest::option::of(0.0f64..1e6),
                sigma in 0.0f64..1e-18,
            ) {
                let mut cat = MoleculeCatalog::builtin();
                let doc = keyvalue::parse(&format!(
                    "[custom]\nmass_amu = {mass:e}\nsigma_abs_m2 = {sigma:e}\n{}",
                    alpha.map(|a| format!("alpha_A3 = {a:e}\n")).unwrap_or_default()
                )).unwrap();
                cat.merge_document(&doc).unwrap();
                let again = parse_molecules(&cat.to_config_string()).unwrap();
                for m in cat.iter() {
                    let n = again.get(&m.name).unwrap();
                    prop_assert_eq!(m.mass_amu.to_bits(), n.mass_amu.to_bits());
                    prop_assert_eq!(m.polarizability_a3.map(f64::to_bits), n.polarizability_a3.map(f64::to_bits));
                    prop_assert_eq!(m.absorption_cross_section.to_bits(), n.absorption_cross_section.to_bits());
                }
            }
        }
    }
}
