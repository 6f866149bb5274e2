//! JSON run configuration, command-line overrides, and resolution into the
//! library types.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use semijulia::backward::{DEFAULT_BURN_IN, DEFAULT_MAX_ATOMS};
use semijulia::render::{ColorMap, ImageSpec, Rgb, Scale};
use semijulia::semigroup::SemigroupError;
use semijulia::{
    Complex64, MapError, Polynomial, ProbabilityVector, RationalMap, Semigroup, SpherePoint,
    Viewport,
};

/// A configuration problem, always tied to the offending field.
#[derive(Debug)]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(field: impl Into<String>, message: impl fmt::Display) -> Self {
        Self {
            field: field.into(),
            message: message.to_string(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Random,
    Full,
    Compare,
    Verify,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSpec {
    /// Ascending coefficients as `[re, im]` pairs.
    pub numerator: Vec<[f64; 2]>,
    #[serde(default = "one")]
    pub denominator: Vec<[f64; 2]>,
}

fn one() -> Vec<[f64; 2]> {
    vec![[1.0, 0.0]]
}

impl GeneratorSpec {
    fn real(numerator: &[f64]) -> Self {
        Self {
            numerator: numerator.iter().map(|&c| [c, 0.0]).collect(),
            denominator: one(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ViewportFile {
    pub center: Option<[f64; 2]>,
    pub width: Option<f64>,
    pub height: Option<f64>,
    pub nx: Option<usize>,
    pub ny: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImageFile {
    pub color_map: Option<String>,
    pub scale: Option<String>,
    pub background: Option<Rgb>,
    pub foreground: Option<Rgb>,
}

/// The configuration file as written: everything optional.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub example: Option<String>,
    pub generators: Option<Vec<GeneratorSpec>>,
    pub b: Option<Vec<f64>>,
    pub a: Option<[f64; 2]>,
    pub method: Option<Method>,
    pub n: Option<usize>,
    pub depth: Option<usize>,
    pub burn_in: Option<usize>,
    pub chains: Option<usize>,
    pub seed: Option<u64>,
    pub seeds: Option<Vec<u64>>,
    pub viewport: Option<ViewportFile>,
    pub image: Option<ImageFile>,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
    pub max_atoms: Option<usize>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            ConfigError::new("config", format!("cannot read {}: {e}", path.display()))
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        serde_json::from_str(text).map_err(|e| {
            ConfigError::new(
                "config",
                format!("line {} column {}: {e}", e.line(), e.column()),
            )
        })
    }
}

/// A built-in semigroup with sensible defaults.
pub struct Example {
    pub name: &'static str,
    pub generators: Vec<GeneratorSpec>,
    pub a: [f64; 2],
    pub width: f64,
}

pub const EXAMPLE_NAMES: [&str; 3] = ["circle", "chebyshev", "annulus"];

pub fn example(name: &str) -> Option<Example> {
    let (generators, a, width) = match name {
        "circle" => (vec![GeneratorSpec::real(&[0.0, 0.0, 1.0])], [1.0, 0.0], 3.0),
        "chebyshev" => (
            vec![GeneratorSpec::real(&[-2.0, 0.0, 1.0])],
            [0.0, 0.0],
            4.5,
        ),
        "annulus" => (
            vec![
                GeneratorSpec::real(&[0.0, 0.0, 1.0]),
                GeneratorSpec::real(&[0.0, 0.0, 0.25]),
            ],
            [1.0, 0.0],
            9.0,
        ),
        _ => return None,
    };
    let name = EXAMPLE_NAMES.into_iter().find(|&n| n == name)?;
    Some(Example {
        name,
        generators,
        a,
        width,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ViewportConfig {
    pub center: [f64; 2],
    pub width: f64,
    pub height: f64,
    pub nx: usize,
    pub ny: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ImageConfig {
    pub color_map: String,
    pub scale: String,
    pub background: Rgb,
    pub foreground: Rgb,
}

/// Fully resolved configuration; echoed verbatim in every report.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub example: Option<String>,
    pub generators: Vec<GeneratorSpec>,
    pub b: Vec<f64>,
    pub a: [f64; 2],
    pub method: Method,
    /// Steps per chain (random, compare, verify).
    pub n: usize,
    /// Tree depth (full, compare).
    pub depth: usize,
    pub burn_in: usize,
    pub chains: usize,
    pub seeds: Vec<u64>,
    pub viewport: ViewportConfig,
    pub image: ImageConfig,
    pub out: PathBuf,
    pub threads: usize,
    pub max_atoms: usize,
}

pub const DEFAULT_N: usize = 250_000;
/// Verification needs longer chains for its statistical checks.
pub const DEFAULT_VERIFY_N: usize = 1_000_000;
pub const DEFAULT_DEPTH: usize = 12;
pub const DEFAULT_CELLS: usize = 512;

impl RunConfig {
    /// Fills in defaults. `available_threads` decides the default number of
    /// threads and chains.
    pub fn resolve(file: FileConfig, available_threads: usize) -> Result<Self, ConfigError> {
        let example = match &file.example {
            Some(name) => Some(example(name).ok_or_else(|| {
                ConfigError::new(
                    "example",
                    format!(
                        "unknown example {name:?} (expected one of {})",
                        EXAMPLE_NAMES.join(", ")
                    ),
                )
            })?),
            None => None,
        };
        let generators = match (file.generators, &example) {
            (Some(g), _) => g,
            (None, Some(ex)) => ex.generators.clone(),
            (None, None) => {
                return Err(ConfigError::new(
                    "generators",
                    "missing (give generators or an example)",
                ))
            }
        };
        if generators.is_empty() {
            return Err(ConfigError::new(
                "generators",
                "at least one generator is required",
            ));
        }
        let b = match file.b {
            Some(b) => b,
            None => vec![1.0 / generators.len() as f64; generators.len()],
        };
        let a = file
            .a
            .or(example.as_ref().map(|ex| ex.a))
            .ok_or_else(|| ConfigError::new("a", "missing start point"))?;
        let method = file.method.unwrap_or(Method::Random);

        let threads = file.threads.unwrap_or(available_threads).max(1);
        let seeds = match (file.seeds, file.seed) {
            (Some(seeds), _) => seeds,
            (None, seed) => {
                let base = seed.unwrap_or(0);
                let chains = file.chains.unwrap_or(threads);
                (0..chains as u64).map(|k| base.wrapping_add(k)).collect()
            }
        };
        let chains = file.chains.unwrap_or(seeds.len());
        if chains != seeds.len() {
            return Err(ConfigError::new(
                "seeds",
                format!("{} seeds given for {chains} chains", seeds.len()),
            ));
        }
        if chains == 0 {
            return Err(ConfigError::new("chains", "must be at least 1"));
        }

        let vp = file.viewport.unwrap_or_default();
        let default_width = example.as_ref().map_or(4.0, |ex| ex.width);
        let width = vp.width.unwrap_or(default_width);
        let nx = vp.nx.unwrap_or(DEFAULT_CELLS);
        let viewport = ViewportConfig {
            center: vp.center.unwrap_or([0.0, 0.0]),
            width,
            height: vp.height.unwrap_or(width),
            nx,
            ny: vp.ny.unwrap_or(nx),
        };
        let img = file.image.unwrap_or_default();
        let image = ImageConfig {
            color_map: img.color_map.unwrap_or_else(|| "heat".into()),
            scale: img.scale.unwrap_or_else(|| Scale::default().name().into()),
            background: img.background.unwrap_or([0, 0, 0]),
            foreground: img.foreground.unwrap_or([255, 255, 255]),
        };

        let config = RunConfig {
            example: example.map(|ex| ex.name.to_string()),
            generators,
            b,
            a,
            method,
            n: file.n.unwrap_or(if method == Method::Verify {
                DEFAULT_VERIFY_N
            } else {
                DEFAULT_N
            }),
            depth: file.depth.unwrap_or(DEFAULT_DEPTH),
            burn_in: file.burn_in.unwrap_or(DEFAULT_BURN_IN),
            chains,
            seeds,
            viewport,
            image,
            out: file.out.unwrap_or_else(|| PathBuf::from("semijulia-out")),
            threads,
            max_atoms: file.max_atoms.unwrap_or(DEFAULT_MAX_ATOMS),
        };
        // Surface every semantic problem now rather than halfway through a run.
        config.semigroup()?;
        config.start_point()?;
        config.image_spec()?;
        if config.burn_in >= config.n
            && matches!(
                config.method,
                Method::Random | Method::Compare | Method::Verify
            )
        {
            return Err(ConfigError::new(
                "burn_in",
                format!(
                    "{} leaves no samples out of n = {}",
                    config.burn_in, config.n
                ),
            ));
        }
        Ok(config)
    }

    pub fn semigroup(&self) -> Result<Semigroup, ConfigError> {
        let mut maps = Vec::with_capacity(self.generators.len());
        for (j, g) in self.generators.iter().enumerate() {
            let field = format!("generators[{j}]");
            let num = polynomial(&g.numerator)
                .map_err(|e| ConfigError::new(format!("{field}.numerator"), e))?;
            let den = polynomial(&g.denominator)
                .map_err(|e| ConfigError::new(format!("{field}.denominator"), e))?;
            maps.push(RationalMap::new(num, den).map_err(|e| ConfigError::new(field, e))?);
        }
        if self.b.len() != maps.len() {
            return Err(ConfigError::new(
                "b",
                format!("{} weights for {} generators", self.b.len(), maps.len()),
            ));
        }
        let b = ProbabilityVector::new(self.b.clone()).map_err(|e| ConfigError::new("b", e))?;
        Semigroup::new(maps, Some(b)).map_err(|e| match e {
            SemigroupError::NoExpandingGenerator => ConfigError::new("generators", e),
            other => ConfigError::new("b", other),
        })
    }

    pub fn start_point(&self) -> Result<SpherePoint, ConfigError> {
        let [re, im] = self.a;
        if !(re.is_finite() && im.is_finite()) {
            return Err(ConfigError::new("a", "start point must be finite"));
        }
        Ok(SpherePoint::new(re, im))
    }

    pub fn viewport(&self) -> Result<Viewport, ConfigError> {
        let v = &self.viewport;
        Viewport::new(
            Complex64::new(v.center[0], v.center[1]),
            v.width,
            v.height,
            v.nx,
            v.ny,
        )
        .map_err(|e| ConfigError::new("viewport", e))
    }

    pub fn image_spec(&self) -> Result<ImageSpec, ConfigError> {
        let mut spec = ImageSpec::new(self.viewport()?);
        spec.color_map = ColorMap::from_str(&self.image.color_map)
            .map_err(|e| ConfigError::new("image.color_map", e))?;
        spec.scale =
            Scale::from_str(&self.image.scale).map_err(|e| ConfigError::new("image.scale", e))?;
        spec.background = self.image.background;
        spec.foreground = self.image.foreground;
        spec.check_budget(semijulia::render::DEFAULT_PIXEL_BUDGET)
            .map_err(|e| ConfigError::new("viewport", e))?;
        Ok(spec)
    }

    /// One `key: value` line per top-level key, values as compact JSON.
    pub fn to_json_lines(&self) -> String {
        let value = serde_json::to_value(self).expect("config serializes");
        let serde_json::Value::Object(map) = value else {
            unreachable!("config serializes to an object")
        };
        map.iter().map(|(k, v)| format!("  {k}: {v}\n")).collect()
    }
}

fn polynomial(coeffs: &[[f64; 2]]) -> Result<Polynomial, MapError> {
    Polynomial::new(
        coeffs
            .iter()
            .map(|&[re, im]| Complex64::new(re, im))
            .collect(),
    )
}
