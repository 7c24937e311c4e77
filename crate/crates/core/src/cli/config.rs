//! Flat key-value configuration files.
//!
//! ```text
//! # comment
//! [global]
//! out = results
//!
//! [portrait]
//! map = qr
//! d = -1
//! m1 = -0.364
//! ```
//!
//! Keys are the long CLI flags without the leading dashes. Sections named
//! `continue.NAME` or `curve.NAME` are extra jobs for `diagram`.

use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Section {
    pub name: String,
    pub entries: Vec<(String, String)>,
}

impl Section {
    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().rev().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ConfigFile {
    pub sections: Vec<Section>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<ConfigFile> {
        let mut sections: Vec<Section> = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .ok_or_else(|| Error::Invalid(format!("config line {}: malformed section header", n + 1)))?;
                sections.push(Section { name: name.to_string(), entries: Vec::new() });
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Invalid(format!("config line {}: expected `key = value`", n + 1)))?;
            let (k, v) = (k.trim(), v.trim());
            if k.is_empty() || k.starts_with('-') {
                return Err(Error::Invalid(format!("config line {}: bad key `{k}`", n + 1)));
            }
            let section = sections
                .last_mut()
                .ok_or_else(|| Error::Invalid(format!("config line {}: entry outside any section", n + 1)))?;
            section.entries.push((k.to_string(), v.to_string()));
        }
        Ok(ConfigFile { sections })
    }

    pub fn load(path: &Path) -> Result<ConfigFile> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Invalid(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn section(&self, name: &str) -> Option<&Section> {
        self.sections.iter().find(|s| s.name == name)
    }

    /// Sections named `prefix` or `prefix.*`, in file order.
    pub fn jobs<'a>(&'a self, prefix: &'a str) -> impl Iterator<Item = &'a Section> + 'a {
        self.sections.iter().filter(move |s| {
            s.name == prefix || s.name.strip_prefix(prefix).is_some_and(|r| r.starts_with('.'))
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sections_and_comments() {
        let c = ConfigFile::parse("# top\n[global]\nout = r # trailing\n\n[continue.pf3]\nq=3\nq = 4\n").unwrap();
        assert_eq!(c.sections.len(), 2);
        assert_eq!(c.section("global").unwrap().get("out"), Some("r"));
        assert_eq!(c.section("continue.pf3").unwrap().get("q"), Some("4"));
        assert_eq!(c.jobs("continue").count(), 1);
        assert_eq!(c.jobs("cont").count(), 0);
    }

    #[test]
    fn rejects_malformed_lines() {
        assert!(ConfigFile::parse("q = 3\n").is_err());
        assert!(ConfigFile::parse("[a]\nnonsense\n").is_err());
        assert!(ConfigFile::parse("[a\n").is_err());
    }
}
