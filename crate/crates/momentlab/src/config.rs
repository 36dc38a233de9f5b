//! Run configuration: a flat `key = value` file with `[section]` headers
//! and `#` comments.
//!
//! Parsing is two-phase: first the raw lines become a `(section, key) →
//! value` table with duplicate detection, then each subcommand's schema
//! consumes its keys. Anything left over is an unknown key. All validation
//! errors are collected and reported together, not just the first.

use crate::cascade::CascadeParams;
use crate::error::{Error, Result};
use crate::freq::CellVariant;
use std::collections::BTreeMap;

pub const SUBCOMMANDS: [&str; 8] = [
    "build",
    "transform",
    "decay",
    "lp",
    "knapp",
    "omega",
    "concentrate",
    "report",
];

/// Fully resolved run configuration.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub subcommand: Option<String>,
    pub cascade: CascadeParams,
    pub tol: f64,
    pub transform: TransformParams,
    pub decay: DecayParams,
    pub lp: LpParams,
    pub knapp: KnappParams,
    pub omega: OmegaParams,
    pub concentrate: ConcentrateParams,
}

#[derive(Clone, Debug)]
pub struct TransformParams {
    pub level: Option<usize>,
    pub r: f64,
    pub count: usize,
}

#[derive(Clone, Debug)]
pub struct DecayParams {
    pub level: Option<usize>,
    pub r_min: f64,
    pub r_max: f64,
    pub annuli: usize,
    pub samples: usize,
}

#[derive(Clone, Debug)]
pub struct LpParams {
    pub level: Option<usize>,
    pub p_list: Vec<f64>,
    pub r_max: f64,
    pub samples: usize,
}

#[derive(Clone, Debug)]
pub struct KnappParams {
    pub p: f64,
    pub q: f64,
    pub levels: Vec<usize>,
    pub dual_scale: f64,
    pub samples: usize,
}

#[derive(Clone, Debug)]
pub struct OmegaParams {
    pub level: Option<usize>,
    pub s1_max: u32,
    pub s2_max: u32,
    pub variant: CellVariant,
    pub samples: usize,
    pub eps: f64,
}

#[derive(Clone, Debug)]
pub struct ConcentrateParams {
    pub level: Option<usize>,
    pub xi: Vec<f64>,
    pub trials: usize,
}

/// Raw `(section, key) → value` table retaining file order for echoing.
struct RawConfig {
    entries: BTreeMap<(String, String), String>,
    errors: Vec<String>,
}

impl RawConfig {
    fn parse(text: &str) -> Self {
        let mut entries = BTreeMap::new();
        let mut errors = Vec::new();
        let mut section = String::new();
        for (lineno, raw_line) in text.lines().enumerate() {
            let line = match raw_line.find('#') {
                Some(i) => &raw_line[..i],
                None => raw_line,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                match name.strip_suffix(']') {
                    Some(n) if !n.trim().is_empty() => section = n.trim().to_string(),
                    _ => errors.push(format!("line {}: malformed section header", lineno + 1)),
                }
                continue;
            }
            match line.split_once('=') {
                Some((k, v)) => {
                    let key = k.trim().to_string();
                    let value = v.trim().to_string();
                    if key.is_empty() {
                        errors.push(format!("line {}: empty key", lineno + 1));
                        continue;
                    }
                    let qualified = display_key(&section, &key);
                    if entries.insert((section.clone(), key), value).is_some() {
                        errors.push(format!("duplicate key `{qualified}`"));
                    }
                }
                None => errors.push(format!(
                    "line {}: expected `key = value`, got `{line}`",
                    lineno + 1
                )),
            }
        }
        RawConfig { entries, errors }
    }

    fn take(&mut self, section: &str, key: &str) -> Option<String> {
        self.entries.remove(&(section.to_string(), key.to_string()))
    }
}

fn display_key(section: &str, key: &str) -> String {
    if section.is_empty() {
        key.to_string()
    } else {
        format!("{section}.{key}")
    }
}

/// Typed accessor over the raw table; records errors instead of failing.
struct Schema<'a> {
    raw: &'a mut RawConfig,
    errors: Vec<String>,
}

impl<'a> Schema<'a> {
    fn value<T, F>(&mut self, section: &str, key: &str, default: T, parse: F) -> T
    where
        F: FnOnce(&str) -> Option<T>,
    {
        match self.raw.take(section, key) {
            None => default,
            Some(v) => match parse(&v) {
                Some(t) => t,
                None => {
                    self.errors.push(format!(
                        "key `{}`: cannot parse value `{v}`",
                        display_key(section, key)
                    ));
                    default
                }
            },
        }
    }

    fn required<T, F>(&mut self, section: &str, key: &str, fallback: T, parse: F) -> T
    where
        F: FnOnce(&str) -> Option<T>,
    {
        match self.raw.take(section, key) {
            None => {
                self.errors.push(format!(
                    "missing required key `{}`",
                    display_key(section, key)
                ));
                fallback
            }
            Some(v) => match parse(&v) {
                Some(t) => t,
                None => {
                    self.errors.push(format!(
                        "key `{}`: cannot parse value `{v}`",
                        display_key(section, key)
                    ));
                    fallback
                }
            },
        }
    }
}

fn parse_list<T, F>(text: &str, item: F) -> Option<Vec<T>>
where
    F: Fn(&str) -> Option<T>,
{
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(item)
        .collect::<Option<Vec<T>>>()
        .filter(|v| !v.is_empty())
}

/// Parse and validate a config file, collecting all errors.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut raw = RawConfig::parse(text);
    let mut parse_errors = std::mem::take(&mut raw.errors);
    let mut schema = Schema {
        raw: &mut raw,
        errors: Vec::new(),
    };
    let s = &mut schema;

    let subcommand = s.value("", "subcommand", None, |v| Some(Some(v.to_string())));
    if let Some(name) = subcommand.as_deref() {
        if !SUBCOMMANDS.contains(&name) {
            s.errors.push(format!(
                "unknown subcommand `{name}`; valid subcommands: {}",
                SUBCOMMANDS.join(", ")
            ));
        }
    }

    // cascade keys may appear at top level or under [cascade]
    let cas = |s: &mut Schema| -> CascadeParams {
        let sect = if s.raw.entries.keys().any(|(sec, _)| sec == "cascade") {
            "cascade"
        } else {
            ""
        };
        CascadeParams {
            d: s.required(sect, "d", 2, |v| v.parse().ok()),
            m: s.required(sect, "m", 2, |v| v.parse().ok()),
            alpha: s.required(sect, "alpha", 0.5, |v| v.parse().ok()),
            levels: s.required(sect, "levels", 1, |v| v.parse().ok()),
            seed: s.required(sect, "seed", 0, |v| v.parse().ok()),
            digit_set: s.value(sect, "digits", None, |v| {
                parse_list(v, |x| x.parse::<u64>().ok()).map(Some)
            }),
        }
    };
    let cascade = cas(s);

    let tol = s.value("quad", "tol", 1e-8, |v| v.parse().ok());

    let transform = TransformParams {
        level: s.value("transform", "level", None, |v| v.parse().ok().map(Some)),
        r: s.value("transform", "r", 64.0, |v| v.parse().ok()),
        count: s.value("transform", "count", 32, |v| v.parse().ok()),
    };
    let decay = DecayParams {
        level: s.value("decay", "level", None, |v| v.parse().ok().map(Some)),
        r_min: s.value("decay", "r_min", 16.0, |v| v.parse().ok()),
        r_max: s.value("decay", "r_max", 16384.0, |v| v.parse().ok()),
        annuli: s.value("decay", "annuli", 11, |v| v.parse().ok()),
        samples: s.value("decay", "samples", 256, |v| v.parse().ok()),
    };
    let lp = LpParams {
        level: s.value("lp", "level", None, |v| v.parse().ok().map(Some)),
        p_list: s.value("lp", "p_list", vec![4.0, 12.0], |v| {
            parse_list(v, |x| x.parse::<f64>().ok())
        }),
        r_max: s.value("lp", "r_max", 16384.0, |v| v.parse().ok()),
        samples: s.value("lp", "samples", 128, |v| v.parse().ok()),
    };
    let knapp = KnappParams {
        p: s.value("knapp", "p", 10.0, |v| v.parse().ok()),
        q: s.value("knapp", "q", 2.0, |v| v.parse().ok()),
        levels: s.value(
            "knapp",
            "levels",
            // default: levels 3..=8 clipped to the cascade depth
            (1..=cascade.levels.min(8))
                .filter(|&k| k >= 3.min(cascade.levels))
                .collect(),
            |v| parse_list(v, |x| x.parse::<usize>().ok()),
        ),
        dual_scale: s.value("knapp", "dual_scale", 0.01, |v| v.parse().ok()),
        samples: s.value("knapp", "samples", 64, |v| v.parse().ok()),
    };
    let omega = OmegaParams {
        level: s.value("omega", "level", None, |v| v.parse().ok().map(Some)),
        s1_max: s.value("omega", "s1_max", 3, |v| v.parse().ok()),
        s2_max: s.value("omega", "s2_max", 4, |v| v.parse().ok()),
        variant: s.value("omega", "variant", CellVariant::D3, |v| match v {
            "general" => Some(CellVariant::General),
            "d3" => Some(CellVariant::D3),
            _ => None,
        }),
        samples: s.value("omega", "samples", 4000, |v| v.parse().ok()),
        eps: s.value("omega", "eps", 0.1, |v| v.parse().ok()),
    };
    let concentrate = ConcentrateParams {
        level: s.value("concentrate", "level", None, |v| v.parse().ok().map(Some)),
        xi: s.value("concentrate", "xi", vec![40.0, 170.0], |v| {
            parse_list(v, |x| x.parse::<f64>().ok())
        }),
        trials: s.value("concentrate", "trials", 400, |v| v.parse().ok()),
    };

    let mut errors = std::mem::take(&mut parse_errors);
    errors.extend(schema.errors);

    // leftover keys are unknown
    for (section, key) in raw.entries.keys() {
        errors.push(format!("unknown key `{}`", display_key(section, key)));
    }

    // semantic validation
    if let Err(e) = cascade.validate() {
        errors.push(e.to_string());
    }
    if tol <= 0.0 {
        errors.push(format!("quad.tol = {tol} must be positive"));
    }
    if !(decay.r_min >= 1.0 && decay.r_min < decay.r_max) {
        errors.push(format!(
            "decay range [{}, {}] invalid: need 1 <= r_min < r_max",
            decay.r_min, decay.r_max
        ));
    }
    if decay.annuli < 2 {
        errors.push(format!("decay.annuli = {} must be >= 2", decay.annuli));
    }
    if lp.r_max < 1.0 {
        errors.push(format!("lp.r_max = {} must be >= 1", lp.r_max));
    }
    if lp.p_list.iter().any(|&p| p < 1.0) {
        errors.push("lp.p_list entries must be >= 1".into());
    }
    if !(knapp.dual_scale > 0.0 && knapp.dual_scale <= 1.0) {
        errors.push(format!(
            "knapp.dual_scale = {} out of (0, 1]",
            knapp.dual_scale
        ));
    }
    if knapp.p < 1.0 || knapp.q < 1.0 {
        errors.push(format!(
            "knapp exponents p = {}, q = {} must be >= 1",
            knapp.p, knapp.q
        ));
    }
    if knapp.levels.iter().any(|&k| k >= cascade.levels + 1) {
        errors.push("knapp.levels entries must not exceed the cascade depth".into());
    }
    if concentrate.trials < 100 {
        errors.push(format!(
            "concentrate.trials = {} must be >= 100",
            concentrate.trials
        ));
    }
    if concentrate.xi.len() != cascade.d {
        errors.push(format!(
            "concentrate.xi has {} components, cascade dimension is {}",
            concentrate.xi.len(),
            cascade.d
        ));
    }
    for (name, level) in [
        ("transform", transform.level),
        ("decay", decay.level),
        ("lp", lp.level),
        ("omega", omega.level),
        ("concentrate", concentrate.level),
    ] {
        if let Some(j) = level {
            let max = if name == "concentrate" {
                cascade.levels.saturating_sub(1)
            } else {
                cascade.levels
            };
            if j > max {
                errors.push(format!("{name}.level = {j} exceeds the usable depth {max}"));
            }
        }
    }

    if errors.is_empty() {
        Ok(RunConfig {
            subcommand,
            cascade,
            tol,
            transform,
            decay,
            lp,
            knapp,
            omega,
            concentrate,
        })
    } else {
        Err(Error::Config(errors))
    }
}

impl RunConfig {
    /// Flat `key = value` echo of the resolved configuration, in a fixed
    /// order, for the run manifest.
    pub fn echo(&self) -> Vec<(String, String)> {
        let mut out = Vec::new();
        let mut push = |k: &str, v: String| out.push((k.to_string(), v));
        if let Some(sc) = &self.subcommand {
            push("subcommand", sc.clone());
        }
        push("d", self.cascade.d.to_string());
        push("m", self.cascade.m.to_string());
        push("alpha", format!("{:.16e}", self.cascade.alpha));
        push("levels", self.cascade.levels.to_string());
        push("seed", self.cascade.seed.to_string());
        if let Some(ds) = &self.cascade.digit_set {
            push(
                "digits",
                ds.iter()
                    .map(|d| d.to_string())
                    .collect::<Vec<_>>()
                    .join(","),
            );
        }
        push("quad.tol", format!("{:.16e}", self.tol));
        push("transform.r", format!("{:.16e}", self.transform.r));
        push("transform.count", self.transform.count.to_string());
        push("decay.r_min", format!("{:.16e}", self.decay.r_min));
        push("decay.r_max", format!("{:.16e}", self.decay.r_max));
        push("decay.annuli", self.decay.annuli.to_string());
        push("decay.samples", self.decay.samples.to_string());
        push(
            "lp.p_list",
            self.lp
                .p_list
                .iter()
                .map(|p| format!("{p}"))
                .collect::<Vec<_>>()
                .join(","),
        );
        push("lp.r_max", format!("{:.16e}", self.lp.r_max));
        push("lp.samples", self.lp.samples.to_string());
        push("knapp.p", format!("{:.16e}", self.knapp.p));
        push("knapp.q", format!("{:.16e}", self.knapp.q));
        push(
            "knapp.levels",
            self.knapp
                .levels
                .iter()
                .map(|k| k.to_string())
                .collect::<Vec<_>>()
                .join(","),
        );
        push("knapp.dual_scale", format!("{:.16e}", self.knapp.dual_scale));
        push("knapp.samples", self.knapp.samples.to_string());
        push("omega.s1_max", self.omega.s1_max.to_string());
        push("omega.s2_max", self.omega.s2_max.to_string());
        push(
            "omega.variant",
            match self.omega.variant {
                CellVariant::General => "general".to_string(),
                CellVariant::D3 => "d3".to_string(),
            },
        );
        push("omega.samples", self.omega.samples.to_string());
        push("omega.eps", format!("{:.16e}", self.omega.eps));
        push(
            "concentrate.xi",
            self.concentrate
                .xi
                .iter()
                .map(|x| format!("{x}"))
                .collect::<Vec<_>>()
                .join(","),
        );
        push("concentrate.trials", self.concentrate.trials.to_string());
        out
    }
}
