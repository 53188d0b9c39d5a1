use std::collections::BTreeMap;
use std::path::PathBuf;

use sha2::{Digest, Sha256};

use crate::{Error, Result};

/// Parsed sectioned `key = value` text. Section and key order are not significant.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ConfigText {
    pub sections: BTreeMap<String, BTreeMap<String, String>>,
}

impl ConfigText {
    pub fn parse(text: &str) -> Result<Self> {
        let mut out = ConfigText::default();
        let mut current: Option<String> = None;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or_else(|| Error::parse(i + 1, "unterminated section header"))?
                    .trim();
                if name.is_empty() {
                    return Err(Error::parse(i + 1, "empty section name"));
                }
                if out.sections.contains_key(name) {
                    return Err(Error::parse(i + 1, format!("section [{name}] repeated")));
                }
                out.sections.insert(name.to_string(), BTreeMap::new());
                current = Some(name.to_string());
                continue;
            }
            let section = current.as_ref().ok_or_else(|| Error::parse(i + 1, "key outside any section"))?;
            let (k, v) = line.split_once('=').ok_or_else(|| Error::parse(i + 1, "expected key = value"))?;
            let (k, v) = (k.trim(), v.trim());
            if k.is_empty() {
                return Err(Error::parse(i + 1, "empty key"));
            }
            let keys = out.sections.get_mut(section).expect("section inserted above");
            if keys.insert(k.to_string(), v.to_string()).is_some() {
                return Err(Error::parse(i + 1, format!("key {k} repeated in [{section}]")));
            }
        }
        Ok(out)
    }

    pub fn get(&self, section: &str, key: &str) -> Option<&str> {
        self.sections.get(section).and_then(|s| s.get(key)).map(String::as_str)
    }
}

/// Integers print without a fractional part; other numbers print in
/// shortest round-trip exponent form; anything else is kept verbatim.
pub fn normalize_value(v: &str) -> String {
    if let Ok(i) = v.parse::<i128>() {
        return i.to_string();
    }
    match v.parse::<f64>() {
        Ok(x) if x.is_finite() => {
            if x.fract() == 0.0 && x.abs() < 9.007_199_254_740_992e15 {
                format!("{}", x as i64)
            } else {
                format!("{x:e}")
            }
        }
        _ => v.to_string(),
    }
}

/// A fully resolved scenario configuration: every parameter is present,
/// either from the file or from the scenario defaults.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScenarioConfig {
    pub name: String,
    pub seed: u64,
    pub threads: usize,
    pub params: BTreeMap<String, String>,
    /// Not part of the content key.
    pub out: Option<PathBuf>,
}

impl ScenarioConfig {
    /// Canonical text: fixed section order, sorted keys, normalized numbers.
    pub fn canonical(&self) -> String {
        let mut s = format!("[scenario]\nname={}\nseed={}\nthreads={}\n[{}]\n", self.name, self.seed, self.threads, self.name);
        for (k, v) in &self.params {
            s.push_str(&format!("{k}={}\n", normalize_value(v)));
        }
        s
    }

    /// Hex sha256 of the canonical text.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical().as_bytes()))
    }

    /// Short form of the hash used in file headers.
    pub fn short_hash(&self) -> String {
        self.hash()[..16].to_string()
    }

    pub fn f64(&self, key: &str) -> Result<f64> {
        let v = self.raw(key)?;
        v.parse().map_err(|_| Error::Config(format!("{}.{key} = {v:?} is not a number", self.name)))
    }

    pub fn usize(&self, key: &str) -> Result<usize> {
        let v = self.raw(key)?;
        normalize_value(v).parse().map_err(|_| Error::Config(format!("{}.{key} = {v:?} is not a nonnegative integer", self.name)))
    }

    pub fn u64(&self, key: &str) -> Result<u64> {
        let v = self.raw(key)?;
        normalize_value(v).parse().map_err(|_| Error::Config(format!("{}.{key} = {v:?} is not a nonnegative integer", self.name)))
    }

    pub fn bool(&self, key: &str) -> Result<bool> {
        match self.raw(key)? {
            "true" | "yes" | "1" => Ok(true),
            "false" | "no" | "0" => Ok(false),
            v => Err(Error::Config(format!("{}.{key} = {v:?} is not a boolean", self.name))),
        }
    }

    pub fn str(&self, key: &str) -> Result<&str> {
        self.raw(key)
    }

    fn raw(&self, key: &str) -> Result<&str> {
        self.params
            .get(key)
            .map(String::as_str)
            .ok_or_else(|| Error::Config(format!("{} has no parameter {key}", self.name)))
    }
}
