//! Run configuration: built-in defaults, then a config file, then flags.

use std::collections::BTreeMap;
use std::path::Path;

use renner_core::fd::Stencil;

use crate::error::CliError;
use crate::Command;

/// Keys that select the b̃ values; a layer setting either replaces both.
const BTILDE_KEYS: [&str; 2] = ["btilde", "btilde-grid"];

/// Most b̃ points a grid may expand to.
const MAX_GRID_POINTS: usize = 100_000;

fn is_key(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '.')
}

/// Keys that are written as metadata and ignored on input.
fn is_metadata(key: &str) -> bool {
    key == "version" || key.starts_with("solver.")
}

/// Accepted keys of a command with their defaults, in output order.
fn schema(cmd: Command) -> &'static [(&'static str, Option<&'static str>)] {
    match cmd {
        Command::ExactL0 => {
            &[("btilde", None), ("btilde-grid", Some("0:0.98:0.01")), ("n-max", Some("4")), ("format", Some("csv"))]
        }
        Command::Series => &[
            ("abs-l", Some("1-8")),
            ("n", Some("1-4")),
            ("order", Some("28")),
            ("degenerate", Some("false")),
            ("btilde", None),
            ("btilde-grid", Some("0:0.98:0.01")),
            ("format", Some("csv")),
        ],
        Command::Sweep => &[
            ("btilde", None),
            ("btilde-grid", Some("0:0.98:0.01")),
            ("levels", Some("17")),
            ("grid-n", Some("191")),
            ("box-L", Some("8")),
            ("stencil", Some("fourth-order")),
            ("tol", Some("1e-9")),
            ("format", Some("csv")),
        ],
        Command::Crossing => &[("bracket", Some("0.85:0.99")), ("tol", Some("1e-6")), ("format", Some("csv"))],
        Command::Classify => {
            &[("btilde", None), ("btilde-grid", Some("0.05:0.95:0.05")), ("tol", Some("1e-9")), ("format", Some("csv"))]
        }
        Command::Bounds => &[
            ("btilde", Some("0.5")),
            ("btilde-grid", None),
            ("n-max", Some("4")),
            ("source", Some("sector")),
            ("grid-n", Some("191")),
            ("box-L", Some("8")),
            ("stencil", Some("fourth-order")),
            ("tol", Some("1e-8")),
            ("format", Some("csv")),
        ],
        Command::Matrixform => &[("format", Some("csv"))],
    }
}

/// One layer of `key = value` settings.
pub type Layer = BTreeMap<String, String>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

/// Fully resolved settings of one run, echoed into its output.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: Command,
    entries: Vec<(String, String)>,
}

impl RunConfig {
    pub fn resolve(command: Command, file: Option<Layer>, flags: Layer) -> Result<Self, CliError> {
        let keys = schema(command);
        let mut map: Layer = keys.iter().filter_map(|(k, d)| d.map(|d| (k.to_string(), d.to_string()))).collect();
        if let Some(file) = file {
            apply(command, &mut map, file, "config file")?;
        }
        apply(command, &mut map, flags, "command line")?;
        let entries = keys.iter().filter_map(|(k, _)| map.get(*k).map(|v| (k.to_string(), v.clone()))).collect();
        let cfg = RunConfig { command, entries };
        cfg.format()?;
        Ok(cfg)
    }

    /// Resolved keys in schema order.
    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    fn raw(&self, key: &str) -> Result<&str, CliError> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
            .ok_or_else(|| CliError::Validation(format!("missing setting `{key}`")))
    }

    pub fn get<T: std::str::FromStr>(&self, key: &str) -> Result<T, CliError> {
        let raw = self.raw(key)?;
        raw.trim().parse().map_err(|_| CliError::Validation(format!("cannot parse {key}={raw}")))
    }

    pub fn format(&self) -> Result<Format, CliError> {
        match self.raw("format")? {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(CliError::Validation(format!("unknown format {other:?}, expected csv or json"))),
        }
    }

    pub fn stencil(&self) -> Result<Stencil, CliError> {
        Ok(self.raw("stencil")?.parse::<Stencil>()?)
    }

    /// `lo:hi` pair.
    pub fn pair(&self, key: &str) -> Result<(f64, f64), CliError> {
        let raw = self.raw(key)?;
        let bad = || CliError::Validation(format!("{key} must be lo:hi, got {raw:?}"));
        let (lo, hi) = raw.split_once(':').ok_or_else(bad)?;
        let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
        let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
        if !(lo < hi) {
            return Err(bad());
        }
        Ok((lo, hi))
    }

    /// b̃ values from either an explicit comma list or a `lo:hi:step` grid.
    pub fn btilde_values(&self) -> Result<Vec<f64>, CliError> {
        if let Ok(raw) = self.raw("btilde") {
            return raw
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse::<f64>()
                        .map_err(|_| CliError::Validation(format!("cannot parse btilde value {s:?}")))
                })
                .collect();
        }
        parse_grid(self.raw("btilde-grid")?)
    }

    /// Comma list of non-negative integers and inclusive `a-b` ranges.
    pub fn int_list(&self, key: &str) -> Result<Vec<u32>, CliError> {
        let raw = self.raw(key)?;
        let bad = || CliError::Validation(format!("{key} must be a list like 1,3,5-8, got {raw:?}"));
        let mut out = Vec::new();
        for item in raw.split(',') {
            let item = item.trim();
            match item.split_once('-') {
                Some((a, b)) => {
                    let a: u32 = a.trim().parse().map_err(|_| bad())?;
                    let b: u32 = b.trim().parse().map_err(|_| bad())?;
                    if a > b {
                        return Err(bad());
                    }
                    out.extend(a..=b);
                }
                None => out.push(item.parse().map_err(|_| bad())?),
            }
        }
        Ok(out)
    }
}

fn apply(command: Command, map: &mut Layer, layer: Layer, source: &str) -> Result<(), CliError> {
    let keys = schema(command);
    for k in layer.keys() {
        if !keys.iter().any(|(s, _)| s == k) {
            return Err(CliError::Validation(format!(
                "setting `{k}` from the {source} is not used by `{}`",
                command.name()
            )));
        }
    }
    let given: Vec<_> = BTILDE_KEYS.iter().filter(|k| layer.contains_key(**k)).collect();
    if given.len() > 1 {
        return Err(CliError::Validation(format!("the {source} sets both btilde and btilde-grid")));
    }
    if !given.is_empty() {
        for k in BTILDE_KEYS {
            map.remove(k);
        }
    }
    map.extend(layer);
    Ok(())
}

/// Expands `lo:hi:step` to `lo + i·step` for every `i` with the point at
/// most `hi` (up to rounding).
pub fn parse_grid(raw: &str) -> Result<Vec<f64>, CliError> {
    let bad = |why: &str| CliError::Validation(format!("btilde-grid {raw:?}: {why}"));
    let parts: Vec<f64> = raw
        .split(':')
        .map(|s| s.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| bad("expected lo:hi:step"))?;
    let [lo, hi, step] = parts[..] else {
        return Err(bad("expected lo:hi:step"));
    };
    if !(step > 0.0) || !(hi >= lo) || !lo.is_finite() || !hi.is_finite() {
        return Err(bad("need finite lo <= hi and step > 0"));
    }
    let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    if count > MAX_GRID_POINTS {
        return Err(bad("too many points"));
    }
    Ok((0..count).map(|i| lo + i as f64 * step).collect())
}

/// Reads a config file: flat `key=value` lines (a leading `#` is allowed,
/// other lines are skipped) or a JSON output file with a `config` object.
pub fn read_file(path: &Path, command: Command) -> Result<Layer, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("cannot read config {}: {e}", path.display())))?;
    let pairs: Vec<(String, String)> = if text.trim_start().starts_with('{') {
        json_pairs(&text)?
    } else {
        text.lines()
            .filter_map(|line| {
                let line = line.trim_start_matches('#').trim();
                let (k, v) = line.split_once('=')?;
                let k = k.trim();
                is_key(k).then(|| (k.to_string(), v.trim().to_string()))
            })
            .collect()
    };
    let mut layer = Layer::new();
    for (k, v) in pairs {
        if k == "command" {
            if v != command.name() {
                return Err(CliError::Validation(format!("config was written by `{v}`, not `{}`", command.name())));
            }
        } else if !is_metadata(&k) {
            layer.insert(k, v);
        }
    }
    Ok(layer)
}

fn json_pairs(text: &str) -> Result<Vec<(String, String)>, CliError> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| CliError::Validation(format!("config JSON: {e}")))?;
    let obj = value.get("config").unwrap_or(&value);
    let obj = obj.as_object().ok_or_else(|| CliError::Validation("config JSON must be an object".into()))?;
    obj.iter()
        .map(|(k, v)| match v {
            serde_json::Value::String(s) => Ok((k.clone(), s.clone())),
            serde_json::Value::Number(_) | serde_json::Value::Bool(_) => Ok((k.clone(), v.to_string())),
            _ => Err(CliError::Validation(format!("config value of `{k}` must be a scalar"))),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn layer(pairs: &[(&str, &str)]) -> Layer {
        pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
    }

    #[test]
    fn default_grid_has_99_points() {
        let g = parse_grid("0:0.98:0.01").unwrap();
        assert_eq!(g.len(), 99);
        assert_eq!(g[0], 0.0);
        assert!((g[98] - 0.98).abs() < 1e-12);
    }

    #[test]
    fn grid_rejects_bad_input() {
        for raw in ["0:1", "1:0:0.1", "0:1:0", "0:1:-1", "a:b:c", "0:1e9:1e-9"] {
            assert!(parse_grid(raw).is_err(), "{raw}");
        }
    }

    #[test]
    fn flags_override_file_and_defaults() {
        let file = layer(&[("tol", "1e-7"), ("levels", "5")]);
        let flags = layer(&[("levels", "3")]);
        let cfg = RunConfig::resolve(Command::Sweep, Some(file), flags).unwrap();
        assert_eq!(cfg.get::<f64>("tol").unwrap(), 1e-7);
        assert_eq!(cfg.get::<usize>("levels").unwrap(), 3);
        assert_eq!(cfg.get::<usize>("grid-n").unwrap(), 191);
    }

    #[test]
    fn btilde_replaces_grid_from_lower_layer() {
        let cfg = RunConfig::resolve(Command::Sweep, None, layer(&[("btilde", "0.1,0.5")])).unwrap();
        assert_eq!(cfg.btilde_values().unwrap(), vec![0.1, 0.5]);
        assert!(cfg.entries().iter().all(|(k, _)| k != "btilde-grid"));
        let both = layer(&[("btilde", "0.1"), ("btilde-grid", "0:1:0.5")]);
        assert!(RunConfig::resolve(Command::Sweep, None, both).is_err());
    }

    #[test]
    fn unknown_key_is_rejected() {
        let err = RunConfig::resolve(Command::Matrixform, None, layer(&[("tol", "1")])).unwrap_err();
        assert!(matches!(err, CliError::Validation(_)));
    }

    #[test]
    fn int_list_ranges() {
        let cfg = RunConfig::resolve(Command::Series, None, layer(&[("abs-l", "0,2-4,7")])).unwrap();
        assert_eq!(cfg.int_list("abs-l").unwrap(), vec![0, 2, 3, 4, 7]);
        let cfg = RunConfig::resolve(Command::Series, None, layer(&[("abs-l", "4-2")])).unwrap();
        assert!(cfg.int_list("abs-l").is_err());
    }
}
