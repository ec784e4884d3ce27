//! Run configuration: flags merged over an optional flat `key=value` file.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crw_qed::{DissipationRates, SystemParams};
use serde_json::{Map, Value};

use crate::error::{CliError, CliResult};
use crate::{usage, Flags, MethodName, Units};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Real,
    Count,
    Seed,
    Text,
    Switch,
    UnitSystem,
    Integrator,
}

/// Every recognised key with its value type.
const KEYS: &[(&str, Kind)] = &[
    ("output", Kind::Text),
    ("omega-c", Kind::Real),
    ("omega", Kind::Real),
    ("xi", Kind::Real),
    ("J", Kind::Real),
    ("n-sites", Kind::Count),
    ("k-points", Kind::Count),
    ("units", Kind::UnitSystem),
    ("threads", Kind::Count),
    ("seed", Kind::Seed),
    ("gamma-c", Kind::Real),
    ("gamma-a", Kind::Real),
    ("g", Kind::Real),
    ("beta", Kind::Real),
    ("bath-modes", Kind::Count),
    ("bandwidth", Kind::Real),
    ("t-max", Kind::Real),
    ("t-points", Kind::Count),
    ("method", Kind::Integrator),
    ("dt", Kind::Real),
    ("initial", Kind::Text),
    ("k0", Kind::Real),
    ("width", Kind::Real),
    ("amplitudes", Kind::Switch),
    ("adjudicate", Kind::Switch),
];

const COMMON: &[(&str, Option<&str>)] = &[("output", Some("out")), ("units", Some("xi")), ("threads", None), ("seed", Some("0"))];

/// Keys a subcommand accepts: `(key, default)`; `None` marks a key that is
/// optional without default, and keys in `required` must be present.
struct Schema {
    required: &'static [&'static str],
    optional: &'static [(&'static str, Option<&'static str>)],
}

fn schema(subcommand: &str) -> Schema {
    const PHYS: &[&str] = &["omega-c", "omega", "xi", "J"];
    match subcommand {
        "dispersion" => Schema {
            required: &["omega-c", "xi"],
            optional: &[("k-points", Some("512"))],
        },
        "scatter" => Schema {
            required: PHYS,
            optional: &[("k-points", Some("512")), ("gamma-c", None), ("gamma-a", None)],
        },
        "bound" => Schema {
            required: PHYS,
            optional: &[
                ("n-sites", Some("401")),
                ("adjudicate", Some("false")),
                ("g", Some("0.1")),
                ("beta", Some("0.4")),
                ("bath-modes", Some("800")),
                ("bandwidth", Some("8")),
            ],
        },
        "decay" => Schema {
            required: PHYS,
            optional: &[
                ("k-points", Some("512")),
                ("n-sites", Some("201")),
                ("g", Some("0.1")),
                ("beta", Some("0.4")),
            ],
        },
        "evolve" => Schema {
            required: &["omega-c", "omega", "xi", "J", "t-max"],
            optional: &[
                ("n-sites", Some("201")),
                ("t-points", Some("200")),
                ("method", Some("adaptive")),
                ("dt", Some("0.01")),
                ("initial", Some("atom")),
                ("gamma-c", None),
                ("gamma-a", None),
                ("g", Some("0.1")),
                ("beta", Some("0.4")),
                ("bath-modes", Some("0")),
                ("bandwidth", Some("8")),
                ("amplitudes", Some("false")),
            ],
        },
        "wavepacket" => Schema {
            required: &["omega-c", "omega", "xi", "J", "k0"],
            optional: &[
                ("n-sites", Some("2001")),
                ("width", Some("80")),
                ("gamma-c", None),
                ("gamma-a", None),
            ],
        },
        "reproduce-fig2" => Schema {
            required: &[],
            optional: &[("k-points", Some("512")), ("n-sites", Some("201"))],
        },
        "reproduce-fig3" => Schema {
            required: &[],
            optional: &[("k-points", Some("512"))],
        },
        other => unreachable!("unknown subcommand {other}"),
    }
}

/// Fully resolved, typed configuration of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub subcommand: String,
    values: BTreeMap<String, Value>,
}

fn kind_of(key: &str) -> Option<Kind> {
    KEYS.iter().find(|(k, _)| *k == key).map(|(_, kind)| *kind)
}

fn flag_pairs(f: &Flags) -> Vec<(&'static str, String)> {
    let mut out = Vec::new();
    let mut put = |key: &'static str, v: Option<String>| {
        if let Some(v) = v {
            out.push((key, v));
        }
    };
    put("output", f.output.as_ref().map(|p| p.display().to_string()));
    put("omega-c", f.omega_c.map(|v| v.to_string()));
    put("omega", f.omega.map(|v| v.to_string()));
    put("xi", f.xi.map(|v| v.to_string()));
    put("J", f.coupling.map(|v| v.to_string()));
    put("n-sites", f.n_sites.map(|v| v.to_string()));
    put("k-points", f.k_points.map(|v| v.to_string()));
    put("units", f.units.map(|u| <&str>::from(u).to_string()));
    put("threads", f.threads.map(|v| v.to_string()));
    put("seed", f.seed.map(|v| v.to_string()));
    put("gamma-c", f.gamma_c.map(|v| v.to_string()));
    put("gamma-a", f.gamma_a.map(|v| v.to_string()));
    put("g", f.g.map(|v| v.to_string()));
    put("beta", f.beta.map(|v| v.to_string()));
    put("bath-modes", f.bath_modes.map(|v| v.to_string()));
    put("bandwidth", f.bandwidth.map(|v| v.to_string()));
    put("t-max", f.t_max.map(|v| v.to_string()));
    put("t-points", f.t_points.map(|v| v.to_string()));
    put("method", f.method.map(|m| <&str>::from(m).to_string()));
    put("dt", f.dt.map(|v| v.to_string()));
    put("initial", f.initial.clone());
    put("k0", f.k0.map(|v| v.to_string()));
    put("width", f.width.map(|v| v.to_string()));
    put("amplitudes", f.amplitudes.then(|| "true".to_string()));
    put("adjudicate", f.adjudicate.then(|| "true".to_string()));
    out
}

/// Parse a flat `key = value` file; `#` starts a comment line. A file whose
/// first non-blank character is `{` is read as a flat JSON object instead.
pub fn parse_config_file(path: &Path, text: &str, subcommand: &str) -> CliResult<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    if text.trim_start().starts_with('{') {
        let obj: Map<String, Value> = serde_json::from_str(text)
            .map_err(|e| usage(format!("{}: not a flat JSON object: {e}", path.display())))?;
        for (key, value) in obj {
            let raw = match value {
                Value::String(s) => s,
                Value::Number(n) => n.to_string(),
                Value::Bool(b) => b.to_string(),
                other => return Err(usage(format!("{}: key `{key}` has non-scalar value {other}", path.display()))),
            };
            if key == "subcommand" {
                if raw != subcommand {
                    return Err(usage(format!(
                        "{}: configuration is for `{raw}`, not `{subcommand}`",
                        path.display()
                    )));
                }
                continue;
            }
            if kind_of(&key).is_none() {
                return Err(usage(format!("{}: unknown key `{key}`", path.display())));
            }
            out.insert(key, raw);
        }
        return Ok(out);
    }
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| usage(format!("{}:{}: expected key=value", path.display(), n + 1)))?;
        let (key, value) = (key.trim(), value.trim());
        if kind_of(key).is_none() {
            return Err(usage(format!("{}:{}: unknown key `{key}`", path.display(), n + 1)));
        }
        if out.insert(key.to_string(), value.to_string()).is_some() {
            return Err(usage(format!("{}:{}: key `{key}` given twice", path.display(), n + 1)));
        }
    }
    Ok(out)
}

fn typed(key: &str, raw: &str) -> CliResult<Value> {
    let bad = |what: &str| usage(format!("`{key}` expects {what}, got `{raw}`"));
    Ok(match kind_of(key).expect("known key") {
        Kind::Real => {
            let x: f64 = raw.parse().map_err(|_| bad("a number"))?;
            if !x.is_finite() {
                return Err(bad("a finite number"));
            }
            Value::from(x)
        }
        Kind::Count => Value::from(raw.parse::<usize>().map_err(|_| bad("a non-negative integer"))?),
        Kind::Seed => Value::from(raw.parse::<u64>().map_err(|_| bad("a non-negative integer"))?),
        Kind::Text => Value::from(raw),
        Kind::Switch => Value::from(raw.parse::<bool>().map_err(|_| bad("true or false"))?),
        Kind::UnitSystem => match raw {
            "xi" | "raw" => Value::from(raw),
            _ => return Err(bad("`xi` or `raw`")),
        },
        Kind::Integrator => match raw {
            "adaptive" | "fixed-step" | "chebyshev" => Value::from(raw),
            _ => return Err(bad("`adaptive`, `fixed-step` or `chebyshev`")),
        },
    })
}

impl RunConfig {
    /// Merge flags over the optional config file, apply defaults and check
    /// that the subcommand gets exactly the keys it uses.
    pub fn resolve(subcommand: &str, flags: &Flags) -> CliResult<Self> {
        let mut raw = match &flags.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
                parse_config_file(path, &text, subcommand)?
            }
            None => BTreeMap::new(),
        };
        for (key, value) in flag_pairs(flags) {
            if let Some(old) = raw.get(key) {
                if *old != value {
                    eprintln!("warning: --{key} {value} overrides `{key} = {old}` from the config file");
                }
            }
            raw.insert(key.to_string(), value);
        }
        Self::from_raw(subcommand, raw)
    }

    pub fn from_raw(subcommand: &str, mut raw: BTreeMap<String, String>) -> CliResult<Self> {
        let s = schema(subcommand);
        let allowed = |key: &str| {
            s.required.contains(&key)
                || s.optional.iter().any(|(k, _)| *k == key)
                || COMMON.iter().any(|(k, _)| *k == key)
        };
        if let Some(key) = raw.keys().find(|k| !allowed(k)) {
            return Err(usage(format!("`{key}` is not used by `{subcommand}`")));
        }
        for key in s.required {
            if !raw.contains_key(*key) {
                return Err(usage(format!("missing required parameter --{key} for `{subcommand}`")));
            }
        }
        for (key, default) in s.optional.iter().chain(COMMON) {
            if let Some(d) = default {
                raw.entry(key.to_string()).or_insert_with(|| d.to_string());
            }
        }
        let mut values = BTreeMap::new();
        for (key, value) in &raw {
            values.insert(key.clone(), typed(key, value)?);
        }
        let cfg = RunConfig {
            subcommand: subcommand.to_string(),
            values,
        };
        if cfg.has("gamma-c") != cfg.has("gamma-a") {
            return Err(usage("--gamma-c and --gamma-a must be given together"));
        }
        if s.required.contains(&"J") {
            cfg.system()?;
        }
        if cfg.has("gamma-c") {
            cfg.dissipation()?;
        }
        if cfg.get_usize("k-points") == Some(0) {
            return Err(usage("--k-points must be positive"));
        }
        Ok(cfg)
    }

    pub fn has(&self, key: &str) -> bool {
        self.values.contains_key(key)
    }

    pub fn f64(&self, key: &str) -> f64 {
        self.values[key].as_f64().expect("numeric key")
    }

    pub fn get_usize(&self, key: &str) -> Option<usize> {
        self.values.get(key).and_then(Value::as_u64).map(|v| v as usize)
    }

    pub fn usize(&self, key: &str) -> usize {
        self.get_usize(key).expect("integer key")
    }

    pub fn text(&self, key: &str) -> &str {
        self.values[key].as_str().expect("text key")
    }

    pub fn switch(&self, key: &str) -> bool {
        self.values.get(key).and_then(Value::as_bool).unwrap_or(false)
    }

    pub fn output(&self) -> PathBuf {
        PathBuf::from(self.text("output"))
    }

    pub fn units(&self) -> Units {
        match self.text("units") {
            "raw" => Units::Raw,
            _ => Units::Xi,
        }
    }

    pub fn method(&self) -> MethodName {
        match self.text("method") {
            "fixed-step" => MethodName::FixedStep,
            "chebyshev" => MethodName::Chebyshev,
            _ => MethodName::Adaptive,
        }
    }

    /// System parameters; invalid values are usage errors.
    pub fn system(&self) -> CliResult<SystemParams> {
        let omega_c = self.f64("omega-c");
        let omega = if self.has("omega") { self.f64("omega") } else { omega_c };
        let coupling = if self.has("J") { self.f64("J") } else { 0.0 };
        let n = self.get_usize("n-sites").unwrap_or(3);
        SystemParams::new(omega_c, self.f64("xi"), omega, coupling, n).map_err(|e| usage(e.to_string()))
    }

    pub fn dissipation(&self) -> CliResult<Option<DissipationRates>> {
        if !self.has("gamma-c") {
            return Ok(None);
        }
        DissipationRates::new(self.f64("gamma-c"), self.f64("gamma-a"))
            .map(Some)
            .map_err(|e| usage(e.to_string()))
    }

    /// The resolved configuration as a flat JSON object that `--config`
    /// accepts back.
    pub fn to_json(&self) -> String {
        let mut obj = Map::new();
        obj.insert("subcommand".into(), Value::from(self.subcommand.clone()));
        for (k, v) in &self.values {
            obj.insert(k.clone(), v.clone());
        }
        let mut s = serde_json::to_string_pretty(&Value::Object(obj)).expect("serializable");
        s.push('\n');
        s
    }
}
