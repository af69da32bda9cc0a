//! Run configuration: built-in defaults, then a JSON config file, then
//! command-line flags, each layer overriding the previous one.

use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use bubblefem_core::{BoundaryCondition, EnrichmentKind};
use clap::{Args, ValueEnum};
use serde::Deserialize;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CommandKind {
    Steady,
    Transient,
    Coeff,
    Tables,
    Convergence,
    Selftest,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Table,
    Csv,
    Json,
}

/// Boundary condition kind as written in configs and flags.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BcKind {
    Dirichlet,
    Neumann,
}

/// Enrichment as written in configs and flags: `linear`, `quadratic`,
/// `cubic` or `p<N>` for bubbles up to order `N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnrichmentArg(pub EnrichmentKind);

impl FromStr for EnrichmentArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let kind = match s.trim().to_ascii_lowercase().as_str() {
            "linear" => EnrichmentKind::Linear,
            "quadratic" | "p2" => EnrichmentKind::QuadraticBubble,
            "cubic" | "p3" => EnrichmentKind::CubicBubble,
            other => {
                let order = other
                    .strip_prefix('p')
                    .and_then(|n| n.parse::<usize>().ok())
                    .filter(|&p| p >= 1)
                    .ok_or_else(|| {
                        format!("unknown enrichment `{s}` (linear|quadratic|cubic|p<N>)")
                    })?;
                if order == 1 {
                    EnrichmentKind::Linear
                } else {
                    EnrichmentKind::PolynomialBubble(order)
                }
            }
        };
        Ok(EnrichmentArg(kind))
    }
}

impl fmt::Display for EnrichmentArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0.order() {
            1 => f.write_str("linear"),
            2 => f.write_str("quadratic"),
            3 => f.write_str("cubic"),
            p => write!(f, "p{p}"),
        }
    }
}

impl<'de> Deserialize<'de> for EnrichmentArg {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Every tunable, optional so that file and flag layers can be merged.
/// Field names double as JSON keys and (kebab-cased) flag names.
#[derive(Debug, Clone, Default, PartialEq, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    /// Diffusion coefficient eps in eps*u'' + kappa*u' + lambda*u = 0 (signed)
    #[arg(long, allow_hyphen_values = true)]
    pub epsilon: Option<f64>,
    /// Convection coefficient kappa
    #[arg(long, allow_hyphen_values = true)]
    pub kappa: Option<f64>,
    /// Reaction coefficient lambda
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: Option<f64>,
    /// Left end of the domain
    #[arg(long, allow_hyphen_values = true)]
    pub a: Option<f64>,
    /// Right end of the domain
    #[arg(long, allow_hyphen_values = true)]
    pub b: Option<f64>,
    /// Left boundary condition kind (steady)
    #[arg(long, value_enum)]
    pub left_bc: Option<BcKind>,
    /// Left boundary value, or du/dx for neumann (steady)
    #[arg(long, allow_hyphen_values = true)]
    pub left_value: Option<f64>,
    /// Right boundary condition kind (steady)
    #[arg(long, value_enum)]
    pub right_bc: Option<BcKind>,
    /// Right boundary value, or du/dx for neumann (steady)
    #[arg(long, allow_hyphen_values = true)]
    pub right_value: Option<f64>,
    /// Number of uniform elements
    #[arg(long)]
    pub elements: Option<usize>,
    /// Enrichment: linear | quadratic | cubic | p<N>
    #[arg(long)]
    pub enrichment: Option<EnrichmentArg>,
    /// Element length (coeff)
    #[arg(long)]
    pub length: Option<f64>,
    /// Left nodal value (coeff)
    #[arg(long, allow_hyphen_values = true)]
    pub u0: Option<f64>,
    /// Right nodal value (coeff)
    #[arg(long, allow_hyphen_values = true)]
    pub ul: Option<f64>,
    /// Polynomial order of the bubble space, >= 2 (coeff)
    #[arg(long)]
    pub order: Option<usize>,
    /// Time step (transient)
    #[arg(long)]
    pub dt: Option<f64>,
    /// Final time (transient)
    #[arg(long)]
    pub t_end: Option<f64>,
    /// Emit every N-th time step (transient)
    #[arg(long)]
    pub stride: Option<usize>,
    /// Extra sample points per element between nodes (steady, transient)
    #[arg(long)]
    pub samples: Option<usize>,
    /// Element counts for the convergence study, comma separated
    #[arg(long, value_delimiter = ',')]
    pub counts: Option<Vec<usize>>,
    /// Enrichments for the convergence study, comma separated
    #[arg(long, value_delimiter = ',')]
    pub enrichments: Option<Vec<EnrichmentArg>>,
}

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Default, PartialEq, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GlobalOverrides {
    /// Output format
    #[arg(long, value_enum, global = true)]
    pub format: Option<Format>,
    /// Write output to this path instead of stdout
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Gauss points per element for assembly (1..=10)
    #[arg(long, global = true)]
    pub quad_points: Option<usize>,
    /// Flip the transient bubble sign to the positive value used by the
    /// tabulated two-element profiles
    #[arg(long, global = true)]
    pub sign_compat: Option<bool>,
}

/// Config file layout: the global keys and the per-run keys side by side.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(flatten)]
    pub global: GlobalOverrides,
    #[serde(flatten)]
    pub run: Overrides,
}

impl ConfigFile {
    pub fn parse(text: &str, origin: &str) -> Result<Self, CliError> {
        // serde(flatten) and deny_unknown_fields do not combine, so reject
        // unknown keys by hand
        const KNOWN: &[&str] = &[
            "format", "out", "quad_points", "sign_compat", "epsilon", "kappa", "lambda", "a", "b",
            "left_bc", "left_value", "right_bc", "right_value", "elements", "enrichment",
            "length", "u0", "ul", "order", "dt", "t_end", "stride", "samples", "counts",
            "enrichments",
        ];
        let value: serde_json::Value = serde_json::from_str(text)
            .map_err(|e| CliError::Validation(format!("{origin}: {e}")))?;
        let obj = value
            .as_object()
            .ok_or_else(|| CliError::Validation(format!("{origin}: top level must be an object")))?;
        if let Some(key) = obj.keys().find(|k| !KNOWN.contains(&k.as_str())) {
            return Err(CliError::Validation(format!("{origin}: unknown field `{key}`")));
        }
        let global: GlobalOverrides = field_subset(obj, &KNOWN[..4], origin)?;
        let run: Overrides = field_subset(obj, &KNOWN[4..], origin)?;
        Ok(ConfigFile { global, run })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
        ConfigFile::parse(&text, &path.display().to_string())
    }
}

fn field_subset<T: serde::de::DeserializeOwned>(
    obj: &serde_json::Map<String, serde_json::Value>,
    keys: &[&str],
    origin: &str,
) -> Result<T, CliError> {
    let sub: serde_json::Map<_, _> =
        obj.iter().filter(|(k, _)| keys.contains(&k.as_str())).map(|(k, v)| (k.clone(), v.clone())).collect();
    serde_json::from_value(serde_json::Value::Object(sub))
        .map_err(|e| CliError::Validation(format!("{origin}: {e}")))
}

macro_rules! layer {
    ($base:expr, $top:expr; $($field:ident),* $(,)?) => {
        $( if $top.$field.is_some() { $base.$field = $top.$field.clone(); } )*
    };
}

impl Overrides {
    /// Fields set in `top` replace those in `self`.
    pub fn merged(mut self, top: &Overrides) -> Overrides {
        layer!(self, top; epsilon, kappa, lambda, a, b, left_bc, left_value, right_bc, right_value,
            elements, enrichment, length, u0, ul, order, dt, t_end, stride, samples, counts, enrichments);
        self
    }
}

impl GlobalOverrides {
    pub fn merged(mut self, top: &GlobalOverrides) -> GlobalOverrides {
        layer!(self, top; format, out, quad_points, sign_compat);
        self
    }
}

/// Fully resolved settings for one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: CommandKind,
    pub epsilon: f64,
    pub kappa: f64,
    pub lambda: f64,
    pub a: f64,
    pub b: f64,
    pub bc_left: BoundaryCondition,
    pub bc_right: BoundaryCondition,
    pub elements: usize,
    pub enrichment: EnrichmentKind,
    pub length: f64,
    pub u0: f64,
    pub ul: f64,
    pub order: usize,
    pub dt: f64,
    pub t_end: f64,
    pub stride: usize,
    pub samples: usize,
    pub counts: Vec<usize>,
    pub enrichments: Vec<EnrichmentKind>,
    pub quad_points: Option<usize>,
    pub sign_compat: bool,
    pub format: Format,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    /// Built-in defaults. `steady` and `convergence` default to the
    /// reaction-diffusion boundary-layer benchmark, `transient` and `tables`
    /// to the two-element sine benchmark (with `sign_compat` on), `coeff` to
    /// `eps = -1, lambda = 1, l = pi/2`.
    pub fn defaults(command: CommandKind) -> RunConfig {
        let mut c = RunConfig {
            command,
            epsilon: -0.01,
            kappa: 0.0,
            lambda: 1.0,
            a: 0.0,
            b: 10.0,
            bc_left: BoundaryCondition::Dirichlet(1.5),
            bc_right: BoundaryCondition::NeumannFlux(0.0),
            elements: 50,
            enrichment: EnrichmentKind::QuadraticBubble,
            length: PI / 2.0,
            u0: 0.0,
            ul: 1.0,
            order: 2,
            dt: 1e-3,
            t_end: 1.0,
            stride: 100,
            samples: 4,
            counts: vec![10, 20, 30, 50, 100],
            enrichments: vec![
                EnrichmentKind::Linear,
                EnrichmentKind::QuadraticBubble,
                EnrichmentKind::CubicBubble,
            ],
            quad_points: None,
            sign_compat: false,
            format: Format::Table,
            out: None,
        };
        match command {
            CommandKind::Transient | CommandKind::Tables => {
                c.epsilon = -1.0;
                c.a = 0.0;
                c.b = PI;
                c.elements = 2;
                c.bc_left = BoundaryCondition::Dirichlet(0.0);
                c.bc_right = BoundaryCondition::Dirichlet(0.0);
                c.sign_compat = true;
            }
            CommandKind::Coeff => c.epsilon = -1.0,
            _ => {}
        }
        c
    }

    pub fn resolve(
        command: CommandKind,
        global: &GlobalOverrides,
        run: &Overrides,
    ) -> Result<RunConfig, CliError> {
        let mut c = RunConfig::defaults(command);
        macro_rules! take {
            ($($field:ident),*) => { $( if let Some(v) = run.$field { c.$field = v; } )* };
        }
        take!(epsilon, kappa, lambda, a, b, elements, length, u0, ul, order, dt, t_end, stride, samples);
        if let Some(e) = run.enrichment {
            c.enrichment = e.0;
        }
        if let Some(counts) = &run.counts {
            c.counts = counts.clone();
        }
        if let Some(list) = &run.enrichments {
            c.enrichments = list.iter().map(|e| e.0).collect();
        }
        c.bc_left = boundary(c.bc_left, run.left_bc, run.left_value);
        c.bc_right = boundary(c.bc_right, run.right_bc, run.right_value);
        if let Some(f) = global.format {
            c.format = f;
        }
        c.out = global.out.clone();
        c.quad_points = global.quad_points;
        if let Some(s) = global.sign_compat {
            c.sign_compat = s;
        }
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |field: &str, why: &str| Err(CliError::Validation(format!("{field}: {why}")));
        for (name, v) in [
            ("epsilon", self.epsilon),
            ("kappa", self.kappa),
            ("lambda", self.lambda),
            ("a", self.a),
            ("b", self.b),
            ("left_value", self.bc_left.value()),
            ("right_value", self.bc_right.value()),
            ("length", self.length),
            ("u0", self.u0),
            ("ul", self.ul),
            ("dt", self.dt),
            ("t_end", self.t_end),
        ] {
            if !v.is_finite() {
                return bad(name, "must be finite");
            }
        }
        if self.a >= self.b {
            return bad("a", "must be smaller than b");
        }
        if self.elements < 1 {
            return bad("elements", "must be at least 1");
        }
        if self.command == CommandKind::Transient {
            if !(self.dt > 0.0) {
                return bad("dt", "must be positive");
            }
            if self.t_end < 0.0 {
                return bad("t_end", "must be non-negative");
            }
        }
        if self.command == CommandKind::Coeff {
            if !(self.length > 0.0) {
                return bad("length", "must be positive");
            }
            if self.order < 2 {
                return bad("order", "must be at least 2");
            }
        }
        if self.stride < 1 {
            return bad("stride", "must be at least 1");
        }
        if self.counts.iter().any(|&n| n < 1) {
            return bad("counts", "element counts must be at least 1");
        }
        if let Some(q) = self.quad_points {
            if !(1..=bubblefem_core::quadrature::MAX_POINTS).contains(&q) {
                return bad("quad_points", "must be between 1 and 10");
            }
        }
        Ok(())
    }
}

fn boundary(current: BoundaryCondition, kind: Option<BcKind>, value: Option<f64>) -> BoundaryCondition {
    let value = value.unwrap_or(match (kind, current) {
        (Some(_), _) => 0.0,
        (None, c) => c.value(),
    });
    let dirichlet = match kind {
        Some(BcKind::Dirichlet) => true,
        Some(BcKind::Neumann) => false,
        None => current.is_dirichlet(),
    };
    if dirichlet {
        BoundaryCondition::Dirichlet(value)
    } else {
        BoundaryCondition::NeumannFlux(value)
    }
}
