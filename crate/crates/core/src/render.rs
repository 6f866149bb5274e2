//! Density images of grid measures and a binary PPM writer.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use thiserror::Error;

use crate::backward::WeightedPointCloud;
use crate::measure::{bin, GridMeasure, Viewport};

/// Gain inside the logarithm of the log scale: `ln(1 + LOG_GAIN t) / ln(1 + LOG_GAIN)`.
pub const LOG_GAIN: f64 = 1000.0;

#[derive(Debug, Error)]
pub enum RenderError {
    #[error("image spec viewport does not match the grid measure")]
    ViewportMismatch,
    #[error("image of {width}x{height} pixels exceeds the pixel budget {budget}")]
    TooLarge {
        width: usize,
        height: usize,
        budget: usize,
    },
    #[error("unknown {kind} `{name}`")]
    UnknownName { kind: &'static str, name: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("not a binary PPM: {0}")]
    BadPpm(String),
}

pub type Rgb = [u8; 3];

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ColorMap {
    /// Straight blend from background to foreground.
    #[default]
    Blend,
    /// Black, red, yellow, white.
    Heat,
    /// Black, blue, cyan, white.
    Ice,
}

impl ColorMap {
    pub const NAMES: [&'static str; 3] = ["blend", "heat", "ice"];

    pub fn name(&self) -> &'static str {
        match self {
            ColorMap::Blend => "blend",
            ColorMap::Heat => "heat",
            ColorMap::Ice => "ice",
        }
    }

    fn color(&self, t: f64, background: Rgb, foreground: Rgb) -> Rgb {
        let t = t.clamp(0.0, 1.0);
        let lerp = |a: u8, b: u8, s: f64| (a as f64 + (b as f64 - a as f64) * s).round() as u8;
        match self {
            ColorMap::Blend => [0, 1, 2].map(|c| lerp(background[c], foreground[c], t)),
            ColorMap::Heat => {
                let ramp = |lo: f64| ((3.0 * t - lo).clamp(0.0, 1.0) * 255.0).round() as u8;
                [ramp(0.0), ramp(1.0), ramp(2.0)]
            }
            ColorMap::Ice => {
                let ramp = |lo: f64| ((3.0 * t - lo).clamp(0.0, 1.0) * 255.0).round() as u8;
                [ramp(2.0), ramp(1.0), ramp(0.0)]
            }
        }
    }
}

impl FromStr for ColorMap {
    type Err = RenderError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "blend" => Ok(ColorMap::Blend),
            "heat" => Ok(ColorMap::Heat),
            "ice" => Ok(ColorMap::Ice),
            _ => Err(RenderError::UnknownName {
                kind: "color map",
                name: s.to_string(),
            }),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Scale {
    Linear,
    #[default]
    Log,
}

impl Scale {
    pub fn name(&self) -> &'static str {
        match self {
            Scale::Linear => "linear",
            Scale::Log => "log",
        }
    }

    /// Maps `mass / max_mass ∈ [0, 1]` to an intensity in `[0, 1]`.
    pub fn intensity(&self, relative: f64) -> f64 {
        match self {
            Scale::Linear => relative,
            Scale::Log => (LOG_GAIN * relative).ln_1p() / LOG_GAIN.ln_1p(),
        }
    }
}

impl FromStr for Scale {
    type Err = RenderError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "linear" => Ok(Scale::Linear),
            "log" => Ok(Scale::Log),
            _ => Err(RenderError::UnknownName {
                kind: "scale",
                name: s.to_string(),
            }),
        }
    }
}

/// Default cap on rendered pixels.
pub const DEFAULT_PIXEL_BUDGET: usize = 1 << 26;

#[derive(Clone, Debug, PartialEq)]
pub struct ImageSpec {
    pub viewport: Viewport,
    pub color_map: ColorMap,
    pub scale: Scale,
    pub background: Rgb,
    pub foreground: Rgb,
}

impl ImageSpec {
    pub fn new(viewport: Viewport) -> Self {
        Self {
            viewport,
            color_map: ColorMap::default(),
            scale: Scale::default(),
            background: [0, 0, 0],
            foreground: [255, 255, 255],
        }
    }

    pub fn check_budget(&self, budget: usize) -> Result<(), RenderError> {
        let (width, height) = (self.viewport.nx(), self.viewport.ny());
        if width.checked_mul(height).is_none_or(|n| n > budget) {
            return Err(RenderError::TooLarge {
                width,
                height,
                budget,
            });
        }
        Ok(())
    }
}

/// An RGB image, rows top to bottom.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Image {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
}

impl Image {
    pub fn pixel(&self, x: usize, y: usize) -> Rgb {
        let i = 3 * (y * self.width + x);
        [self.pixels[i], self.pixels[i + 1], self.pixels[i + 2]]
    }

    /// Binary PPM (P6) bytes.
    pub fn to_ppm(&self) -> Vec<u8> {
        let mut out = format!("P6\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.pixels);
        out
    }
}

/// Per-cell intensity in `[0, 1]`; 0 for empty cells.
pub fn intensities(grid: &GridMeasure, scale: Scale) -> Vec<f64> {
    let max = grid.max_cell();
    grid.cells()
        .iter()
        .map(|&m| {
            if m > 0.0 && max > 0.0 {
                scale.intensity(m / max)
            } else {
                0.0
            }
        })
        .collect()
}

/// One pixel per cell. Empty cells get the background color.
pub fn render_density(grid: &GridMeasure, spec: &ImageSpec) -> Result<Image, RenderError> {
    if grid.viewport() != &spec.viewport {
        return Err(RenderError::ViewportMismatch);
    }
    let mut pixels = Vec::with_capacity(3 * grid.cells().len());
    for (&m, t) in grid.cells().iter().zip(intensities(grid, spec.scale)) {
        let rgb = if m > 0.0 {
            spec.color_map.color(t, spec.background, spec.foreground)
        } else {
            spec.background
        };
        pixels.extend_from_slice(&rgb);
    }
    Ok(Image {
        width: spec.viewport.nx(),
        height: spec.viewport.ny(),
        pixels,
    })
}

/// Bins `cloud` on the spec's viewport and renders it.
pub fn render_cloud(cloud: &WeightedPointCloud, spec: &ImageSpec) -> Result<Image, RenderError> {
    render_density(&bin(cloud, spec.viewport), spec)
}

pub fn write_image(image: &Image, path: &Path) -> Result<(), RenderError> {
    fs::write(path, image.to_ppm()).map_err(|source| RenderError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Width and height declared by a P6 header.
pub fn parse_ppm_header(bytes: &[u8]) -> Result<(usize, usize), RenderError> {
    let bad = |m: &str| RenderError::BadPpm(m.to_string());
    let mut fields = Vec::new();
    let mut pos = 0;
    while fields.len() < 4 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(bad("truncated header"));
        }
        fields.push(std::str::from_utf8(&bytes[start..pos]).map_err(|_| bad("non-ASCII header"))?);
    }
    if fields[0] != "P6" {
        return Err(bad("missing P6 magic"));
    }
    let width = fields[1].parse().map_err(|_| bad("bad width"))?;
    let height = fields[2].parse().map_err(|_| bad("bad height"))?;
    if fields[3] != "255" {
        return Err(bad("max value must be 255"));
    }
    Ok((width, height))
}
