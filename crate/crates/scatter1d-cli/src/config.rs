//! JSON configuration schema and conversion into solver types.
//!
//! Complex numbers are two-element arrays `[re, im]`. See the README for the
//! full schema.

use std::path::PathBuf;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use scatter1d::{Complex64, DeltaSite, Interaction, NonlinearityFn, PolyTerm, Side, SolveOptions};
use serde::{Deserialize, Serialize};

fn cx(v: [f64; 2]) -> Complex64 {
    Complex64::new(v[0], v[1])
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub interaction: InteractionSpec,
    #[serde(default = "default_side")]
    pub side: SideSpec,
    #[serde(default = "default_amp")]
    pub amp: f64,
    #[serde(default)]
    pub k_grid: KGridSpec,
    #[serde(default)]
    pub solver: SolverSpec,
    #[serde(default)]
    pub outputs: OutputSpec,
    #[serde(default)]
    pub verify: bool,
    #[serde(default)]
    pub workers: Option<usize>,
}

fn default_side() -> SideSpec {
    SideSpec::Both
}

fn default_amp() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SideSpec {
    Left,
    Right,
    Both,
}

impl SideSpec {
    pub fn sides(self) -> Vec<Side> {
        match self {
            SideSpec::Left => vec![Side::Left],
            SideSpec::Right => vec![Side::Right],
            SideSpec::Both => vec![Side::Left, Side::Right],
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        match text {
            "l" | "left" => Ok(SideSpec::Left),
            "r" | "right" => Ok(SideSpec::Right),
            "both" => Ok(SideSpec::Both),
            other => bail!("side must be l, r, or both (got {other:?})"),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KGridSpec {
    pub min: f64,
    pub max: f64,
    pub count: usize,
    #[serde(default)]
    pub spacing: Spacing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    #[default]
    Linear,
    Log,
}

impl Default for KGridSpec {
    fn default() -> Self {
        KGridSpec {
            min: 0.05,
            max: 15.0,
            count: 2000,
            spacing: Spacing::Linear,
        }
    }
}

impl KGridSpec {
    pub fn points(&self) -> Result<Vec<f64>> {
        if !(self.min > 0.0) {
            bail!("k_grid.min must be positive (got {})", self.min);
        }
        if self.max < self.min {
            bail!("k_grid.max must be at least k_grid.min");
        }
        if self.count == 0 {
            bail!("k_grid.count must be at least 1");
        }
        if self.count == 1 {
            return Ok(vec![self.min]);
        }
        let n = self.count as f64 - 1.0;
        Ok((0..self.count)
            .map(|j| match self.spacing {
                Spacing::Linear => self.min + (self.max - self.min) * j as f64 / n,
                Spacing::Log => self.min * (self.max / self.min).powf(j as f64 / n),
            })
            .collect())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSpec {
    #[serde(default)]
    pub window_max: Option<f64>,
    #[serde(default = "default_grid_n")]
    pub grid_n: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
}

fn default_grid_n() -> usize {
    2000
}

fn default_tol() -> f64 {
    1e-10
}

impl Default for SolverSpec {
    fn default() -> Self {
        SolverSpec {
            window_max: None,
            grid_n: default_grid_n(),
            tol: default_tol(),
        }
    }
}

impl SolverSpec {
    pub fn to_options(&self, negative_power: bool) -> SolveOptions {
        let mut opts = SolveOptions::default();
        opts.grid_n = self.grid_n;
        opts.tol = self.tol;
        if let Some(hi) = self.window_max {
            let lo = if negative_power { 1e-9 } else { 0.0 };
            opts.window = Some((lo, hi));
        }
        opts
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default)]
    pub csv: Option<PathBuf>,
    #[serde(default)]
    pub json: Option<PathBuf>,
    #[serde(default)]
    pub plot: Option<PathBuf>,
    #[serde(default)]
    pub script: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum InteractionSpec {
    DeltaChain {
        sites: Vec<SiteSpec>,
    },
    /// Constant complex depth plus an optional power-law modulus term on
    /// `[a, b]`; the serializable smooth profile.
    SmoothWell {
        a: f64,
        b: f64,
        v0: [f64; 2],
        #[serde(default)]
        kerr: Option<KerrSpec>,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SiteSpec {
    pub c: f64,
    pub f: NonlinearitySpec,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KerrSpec {
    pub z: [f64; 2],
    pub nu: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum NonlinearitySpec {
    Zero,
    Constant { z: [f64; 2] },
    PowerLaw { z: [f64; 2], nu: f64 },
    Polynomial { terms: Vec<TermSpec> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSpec {
    pub z: [f64; 2],
    pub p: f64,
}

impl NonlinearitySpec {
    pub fn to_core(&self) -> Result<NonlinearityFn> {
        let f = match self {
            NonlinearitySpec::Zero => NonlinearityFn::Zero,
            NonlinearitySpec::Constant { z } => NonlinearityFn::Constant(cx(*z)),
            NonlinearitySpec::PowerLaw { z, nu } => NonlinearityFn::PowerLaw { z: cx(*z), nu: *nu },
            NonlinearitySpec::Polynomial { terms } => NonlinearityFn::Polynomial {
                terms: terms
                    .iter()
                    .map(|t| PolyTerm {
                        coeff: cx(t.z),
                        power: t.p,
                    })
                    .collect(),
            },
        };
        f.validate().map_err(|e| anyhow::anyhow!("{e}"))?;
        Ok(f)
    }
}

impl InteractionSpec {
    pub fn to_core(&self) -> Result<Interaction> {
        match self {
            InteractionSpec::DeltaChain { sites } => {
                let mut out = Vec::with_capacity(sites.len());
                for (idx, s) in sites.iter().enumerate() {
                    let coupling =
                        s.f.to_core()
                            .with_context(|| format!("interaction.sites[{idx}].f"))?;
                    out.push(DeltaSite {
                        position: s.c,
                        coupling,
                    });
                }
                Interaction::DeltaChain(out)
                    .validated()
                    .map_err(|e| anyhow::anyhow!("interaction: {e}"))
            }
            InteractionSpec::SmoothWell { a, b, v0, kerr } => {
                let depth = cx(*v0);
                let kerr = kerr.clone();
                if let Some(kerr) = &kerr {
                    if kerr.nu <= -1.0 {
                        bail!("interaction.kerr.nu must exceed -1 (got {})", kerr.nu);
                    }
                }
                let potential: scatter1d::SmoothFn = match kerr {
                    None => Arc::new(move |_, _| depth),
                    Some(KerrSpec { z, nu }) => {
                        let zc = cx(z);
                        Arc::new(move |_, m: f64| depth + zc * m.powf(nu))
                    }
                };
                Interaction::SmoothModulus {
                    a: *a,
                    b: *b,
                    potential,
                }
                .validated()
                .map_err(|e| anyhow::anyhow!("interaction: {e}"))
            }
        }
    }
}

impl SweepConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: SweepConfig = serde_json::from_str(text).context("parsing configuration")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        Self::from_json(&text).with_context(|| format!("in config {}", path.display()))
    }

    pub fn validate(&self) -> Result<()> {
        self.interaction.to_core()?;
        self.k_grid.points()?;
        if !(self.amp >= 0.0 && self.amp.is_finite()) {
            bail!("amp must be finite and nonnegative (got {})", self.amp);
        }
        if !(self.solver.tol > 0.0) {
            bail!("solver.tol must be positive");
        }
        if self.solver.grid_n < 2 {
            bail!("solver.grid_n must be at least 2");
        }
        Ok(())
    }
}
