use anyhow::{anyhow, bail, Context, Result};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};
use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

/// Settings from an optional TOML file, overridden by command-line flags.
/// Every value read is recorded so reports can embed the resolved config.
pub struct Resolver {
    file: toml::Table,
    used: BTreeSet<String>,
    pub resolved: Map<String, Value>,
}

impl Resolver {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let file = match path {
            Some(p) => {
                let src = std::fs::read_to_string(p).with_context(|| format!("reading config {}", p.display()))?;
                src.parse::<toml::Table>().with_context(|| format!("parsing config {}", p.display()))?
            }
            None => toml::Table::new(),
        };
        Ok(Resolver { file, used: BTreeSet::new(), resolved: Map::new() })
    }

    fn file_value<T: DeserializeOwned>(&mut self, key: &str) -> Result<Option<T>> {
        self.used.insert(key.to_string());
        match self.file.get(key) {
            None => Ok(None),
            Some(v) => v.clone().try_into().map(Some).map_err(|e| anyhow!("config field `{key}`: {e}")),
        }
    }

    fn record<T: Serialize>(&mut self, key: &str, v: &T) {
        self.resolved.insert(key.to_string(), serde_json::to_value(v).unwrap_or(Value::Null));
    }

    pub fn get<T: Serialize + DeserializeOwned>(&mut self, key: &str, flag: Option<T>, default: T) -> Result<T> {
        let v = match flag {
            Some(v) => v,
            None => self.file_value(key)?.unwrap_or(default),
        };
        self.used.insert(key.to_string());
        self.record(key, &v);
        Ok(v)
    }

    pub fn opt<T: Serialize + DeserializeOwned>(&mut self, key: &str, flag: Option<T>) -> Result<Option<T>> {
        let v = match flag {
            Some(v) => Some(v),
            None => self.file_value(key)?,
        };
        self.used.insert(key.to_string());
        self.record(key, &v);
        Ok(v)
    }

    /// A comma list or `a:b:step` range.
    pub fn grid(&mut self, key: &str, flag: Option<String>, default: &str) -> Result<Vec<f64>> {
        let src = self.get(key, flag, default.to_string())?;
        parse_grid(&src).with_context(|| format!("field `{key}`"))
    }

    /// `[params]` table of the file merged with `name=value` flags.
    pub fn params(&mut self, flags: &[String]) -> Result<BTreeMap<String, f64>> {
        let mut out: BTreeMap<String, f64> = self.file_value("params")?.unwrap_or_default();
        for f in flags {
            let (k, v) = f.split_once('=').ok_or_else(|| anyhow!("field `param`: expected name=value, got `{f}`"))?;
            let v: f64 = v.trim().parse().map_err(|_| anyhow!("field `param`: `{v}` is not a number"))?;
            out.insert(k.trim().to_string(), v);
        }
        self.record("params", &out);
        Ok(out)
    }

    /// Fails on file keys that no setting of the command read.
    pub fn finish(&self) -> Result<()> {
        if let Some(k) = self.file.keys().find(|k| !self.used.contains(*k)) {
            bail!("unknown config field `{k}` for this command");
        }
        Ok(())
    }
}

pub fn parse_list(src: &str) -> Result<Vec<f64>> {
    src.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.trim().parse::<f64>().map_err(|_| anyhow!("`{s}` is not a number")))
        .collect()
}

/// `a:b:step` (inclusive of b up to rounding) or a comma list.
pub fn parse_grid(src: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = src.split(':').collect();
    match parts.len() {
        1 => {
            let v = parse_list(src)?;
            if v.is_empty() {
                bail!("empty grid");
            }
            Ok(v)
        }
        3 => {
            let p = parse_list(&parts.join(","))?;
            let (a, b, h) = (p[0], p[1], p[2]);
            if !(h > 0.0) || b < a {
                bail!("range `{src}` needs a <= b and step > 0");
            }
            let n = ((b - a) / h + 1e-9).floor() as usize;
            Ok((0..=n).map(|i| a + h * i as f64).collect())
        }
        _ => bail!("grid `{src}` is neither a list nor a:b:step"),
    }
}
