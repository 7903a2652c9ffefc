//! The line-oriented configuration grammar shared by run configurations and
//! molecule definition files:
//!
//! ```text
//! # comment
//! [section]
//! key = value   # trailing comment
//! ```
//!
//! Keys before the first header belong to the unnamed root section.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub key: String,
    pub value: String,
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Section {
    pub name: String,
    pub line: usize,
    pub entries: Vec<Entry>,
}

impl Section {
    pub fn get(&self, key: &str) -> Option<&Entry> {
        self.entries.iter().find(|e| e.key == key)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Document {
    pub sections: Vec<Section>,
}

impl Document {
    pub fn section(&self, name: &str) -> Option<&Section> {
        self.sections.iter().find(|s| s.name == name)
    }

    /// Sets `section.key = value`, creating the section if needed.
    pub fn set(&mut self, section: &str, key: &str, value: &str) {
        let idx = match self.sections.iter().position(|s| s.name == section) {
            Some(i) => i,
            None => {
                self.sections.push(Section {
                    name: section.to_string(),
                    line: 0,
                    entries: Vec::new(),
                });
                self.sections.len() - 1
            }
        };
        let sec = &mut self.sections[idx];
        match sec.entries.iter_mut().find(|e| e.key == key) {
            Some(e) => {
                e.value = value.to_string();
                e.line = 0;
            }
            None => sec.entries.push(Entry {
                key: key.to_string(),
                value: value.to_string(),
                line: 0,
            }),
        }
    }

    /// Flattened `section.key → value` view.
    pub fn flatten(&self) -> BTreeMap<String, String> {
        let mut out = BTreeMap::new();
        for s in &self.sections {
            for e in &s.entries {
                let path = if s.name.is_empty() {
                    e.key.clone()
                } else {
                    format!("{}.{}", s.name, e.key)
                };
                out.insert(path, e.value.clone());
            }
        }
        out
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for s in &self.sections {
            if !s.name.is_empty() {
                if !out.is_empty() {
                    out.push('\n');
                }
                out.push_str(&format!("[{}]\n", s.name));
            }
            for e in &s.entries {
                out.push_str(&format!("{} = {}\n", e.key, e.value));
            }
        }
        out
    }
}

fn valid_name(s: &str) -> bool {
    !s.is_empty()
        && s
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'))
}

pub fn parse(text: &str) -> Result<Document> {
    let mut doc = Document::default();
    let mut current = Section {
        name: String::new(),
        line: 0,
        entries: Vec::new(),
    };
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = match raw.find('#') {
            Some(p) => &raw[..p],
            None => raw,
        }
        .trim();
        if content.is_empty() {
            continue;
        }
        if let Some(rest) = content.strip_prefix('[') {
            let name = rest.strip_suffix(']').ok_or_else(|| Error::Syntax {
                line,
                message: "unterminated section header".into(),
            })?;
            let name = name.trim();
            if !valid_name(name) {
                return Err(Error::Syntax {
                    line,
                    message: format!("invalid section name `{name}`"),
                });
            }
            if doc.sections.iter().any(|s| s.name == name) || current.name == name {
                return Err(Error::Syntax {
                    line,
                    message: format!("duplicate section `[{name}]`"),
                });
            }
            let finished = std::mem::replace(
                &mut current,
                Section {
                    name: name.to_string(),
                    line,
                    entries: Vec::new(),
                },
            );
            if !finished.name.is_empty() || !finished.entries.is_empty() {
                doc.sections.push(finished);
            }
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| Error::Syntax {
            line,
            message: format!("expected `key = value`, found `{content}`"),
        })?;
        let key = key.trim();
        let value = value.trim();
        if !valid_name(key) {
            return Err(Error::Syntax {
                line,
                message: format!("invalid key `{key}`"),
            });
        }
        if value.is_empty() {
            return Err(Error::Syntax {
                line,
                message: format!("missing value for `{key}`"),
            });
        }
        if current.get(key).is_some() {
            return Err(Error::Syntax {
                line,
                message: format!("duplicate key `{key}`"),
            });
        }
        current.entries.push(Entry {
            key: key.to_string(),
            value: value.to_string(),
            line,
        });
    }
    if !current.name.is_empty() || !current.entries.is_empty() {
        doc.sections.push(current);
    }
    Ok(doc)
}

pub(crate) fn parse_f64(path: &str, value: &str) -> Result<f64> {
    let v: f64 = value
        .parse()
        .map_err(|_| Error::config(path, format!("expected a number, found `{value}`")))?;
    if !v.is_finite() {
        return Err(Error::config(path, "value must be finite"));
    }
    Ok(v)
}

/// Shortest round-trip text for `v`, in exponent form outside `[1e-4, 1e6)`.
pub fn format_number(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && !(1e-4..1e6).contains(&a) {
        format!("{v:e}")
    } else {
        v.to_string()
    }
}

pub(crate) fn parse_usize(path: &str, value: &str) -> Result<usize> {
    value
        .parse()
        .map_err(|_| Error::config(path, format!("expected a non-negative integer, found `{value}`")))
}
