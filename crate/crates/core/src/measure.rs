//! Grid discretizations of measures, distances between them, and the
//! diagnostics used to judge convergence of the backward iteration.

use std::fmt::Write as _;

use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::backward::{BackwardOrbit, WeightedPointCloud};
use crate::roots::SolverDivergence;
use crate::semigroup::Semigroup;
use crate::sphere::{chordal_distance, SpherePoint};

#[derive(Clone, Debug, Error, PartialEq)]
pub enum MeasureError {
    #[error("viewport needs positive width/height and at least one cell (got {width}x{height}, {nx}x{ny})")]
    InvalidViewport {
        width: f64,
        height: f64,
        nx: usize,
        ny: usize,
    },
    #[error("grid measures live on different viewports")]
    ViewportMismatch,
    #[error("point set is empty")]
    EmptySet,
    #[error("grid export line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Solver(#[from] SolverDivergence),
}

/// A rectangle of the plane split into `nx × ny` cells. Row 0 is the top.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Viewport {
    center: Complex64,
    width: f64,
    height: f64,
    nx: usize,
    ny: usize,
}

impl Viewport {
    pub fn new(
        center: Complex64,
        width: f64,
        height: f64,
        nx: usize,
        ny: usize,
    ) -> Result<Self, MeasureError> {
        let finite = center.re.is_finite()
            && center.im.is_finite()
            && width.is_finite()
            && height.is_finite();
        if !finite || width <= 0.0 || height <= 0.0 || nx == 0 || ny == 0 {
            return Err(MeasureError::InvalidViewport {
                width,
                height,
                nx,
                ny,
            });
        }
        Ok(Self {
            center,
            width,
            height,
            nx,
            ny,
        })
    }

    /// Square viewport `[c - r, c + r]²` with `n × n` cells.
    pub fn square(center: Complex64, half_width: f64, n: usize) -> Result<Self, MeasureError> {
        Self::new(center, 2.0 * half_width, 2.0 * half_width, n, n)
    }

    pub fn center(&self) -> Complex64 {
        self.center
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn height(&self) -> f64 {
        self.height
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn cell_count(&self) -> usize {
        self.nx * self.ny
    }

    pub fn cell_width(&self) -> f64 {
        self.width / self.nx as f64
    }

    pub fn cell_height(&self) -> f64 {
        self.height / self.ny as f64
    }

    fn left(&self) -> f64 {
        self.center.re - self.width / 2.0
    }

    fn top(&self) -> f64 {
        self.center.im + self.height / 2.0
    }

    /// Row-major index of the cell containing `p`. Cells include their left
    /// and top edges.
    pub fn cell_index(&self, p: SpherePoint) -> Option<usize> {
        let z = p.as_finite()?;
        let x = ((z.re - self.left()) / self.cell_width()).floor();
        let y = ((self.top() - z.im) / self.cell_height()).floor();
        if x < 0.0 || y < 0.0 || x >= self.nx as f64 || y >= self.ny as f64 {
            return None;
        }
        Some(y as usize * self.nx + x as usize)
    }

    /// Center point of cell `(column, row)`.
    pub fn cell_center(&self, column: usize, row: usize) -> Complex64 {
        Complex64::new(
            self.left() + (column as f64 + 0.5) * self.cell_width(),
            self.top() - (row as f64 + 0.5) * self.cell_height(),
        )
    }
}

/// Mass per viewport cell plus everything that fell outside (including ∞).
#[derive(Clone, Debug, PartialEq)]
pub struct GridMeasure {
    viewport: Viewport,
    cells: Vec<f64>,
    outside_mass: f64,
}

impl GridMeasure {
    pub fn empty(viewport: Viewport) -> Self {
        Self {
            viewport,
            cells: vec![0.0; viewport.cell_count()],
            outside_mass: 0.0,
        }
    }

    pub fn from_cells(
        viewport: Viewport,
        cells: Vec<f64>,
        outside_mass: f64,
    ) -> Result<Self, MeasureError> {
        if cells.len() != viewport.cell_count() {
            return Err(MeasureError::ViewportMismatch);
        }
        Ok(Self {
            viewport,
            cells,
            outside_mass,
        })
    }

    pub fn add(&mut self, p: SpherePoint, mass: f64) {
        match self.viewport.cell_index(p) {
            Some(i) => self.cells[i] += mass,
            None => self.outside_mass += mass,
        }
    }

    pub fn viewport(&self) -> &Viewport {
        &self.viewport
    }

    pub fn cells(&self) -> &[f64] {
        &self.cells
    }

    pub fn cell(&self, column: usize, row: usize) -> f64 {
        self.cells[row * self.viewport.nx + column]
    }

    pub fn outside_mass(&self) -> f64 {
        self.outside_mass
    }

    pub fn total_mass(&self) -> f64 {
        self.cells.iter().sum::<f64>() + self.outside_mass
    }

    pub fn max_cell(&self) -> f64 {
        self.cells.iter().copied().fold(0.0, f64::max)
    }

    /// Centers of the cells carrying positive mass.
    pub fn support(&self) -> Vec<SpherePoint> {
        let nx = self.viewport.nx;
        self.cells
            .iter()
            .enumerate()
            .filter(|(_, &m)| m > 0.0)
            .map(|(i, _)| SpherePoint::from_complex(self.viewport.cell_center(i % nx, i / nx)))
            .collect()
    }

    /// Plain-text export: a header describing the viewport followed by one
    /// line of cell values per row, top row first.
    pub fn to_text(&self) -> String {
        let vp = &self.viewport;
        let mut out = String::new();
        writeln!(out, "# semijulia grid measure v1").unwrap();
        writeln!(out, "center {} {}", vp.center.re, vp.center.im).unwrap();
        writeln!(out, "size {} {}", vp.width, vp.height).unwrap();
        writeln!(out, "cells {} {}", vp.nx, vp.ny).unwrap();
        writeln!(out, "outside {}", self.outside_mass).unwrap();
        for row in self.cells.chunks(vp.nx) {
            let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            writeln!(out, "{}", line.join(" ")).unwrap();
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, MeasureError> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        let err = |line: usize, message: &str| MeasureError::Parse {
            line,
            message: message.to_string(),
        };
        let mut header = |key: &str| -> Result<(usize, Vec<String>), MeasureError> {
            let (n, line) = lines
                .next()
                .ok_or_else(|| err(0, "unexpected end of input"))?;
            let mut parts = line.split_whitespace();
            if parts.next() != Some(key) {
                return Err(err(n, &format!("expected `{key}`")));
            }
            Ok((n, parts.map(str::to_string).collect()))
        };
        fn num<T: std::str::FromStr>(n: usize, s: Option<&String>) -> Result<T, MeasureError> {
            s.and_then(|s| s.parse().ok()).ok_or(MeasureError::Parse {
                line: n,
                message: "malformed number".into(),
            })
        }

        header("#")?;
        let (n, c) = header("center")?;
        let center = Complex64::new(num(n, c.first())?, num(n, c.get(1))?);
        let (n, s) = header("size")?;
        let (width, height) = (num(n, s.first())?, num(n, s.get(1))?);
        let (n, g) = header("cells")?;
        let (nx, ny) = (num(n, g.first())?, num(n, g.get(1))?);
        let (n, o) = header("outside")?;
        let outside_mass = num(n, o.first())?;
        let viewport = Viewport::new(center, width, height, nx, ny)?;

        let mut cells = Vec::with_capacity(viewport.cell_count());
        for _ in 0..ny {
            let (n, line) = lines.next().ok_or_else(|| err(0, "missing grid rows"))?;
            let row: Vec<f64> = line
                .split_whitespace()
                .map(|v| v.parse().map_err(|_| err(n, "malformed cell value")))
                .collect::<Result<_, _>>()?;
            if row.len() != nx {
                return Err(err(n, "wrong number of cells in row"));
            }
            cells.extend(row);
        }
        Ok(Self {
            viewport,
            cells,
            outside_mass,
        })
    }
}

/// Adds each atom to its cell, in atom order.
pub fn bin(cloud: &WeightedPointCloud, viewport: Viewport) -> GridMeasure {
    let mut grid = GridMeasure::empty(viewport);
    for (p, m) in cloud.iter() {
        grid.add(p, m);
    }
    grid
}

/// Half the L¹ distance between the cell vectors, counting the outside mass
/// as one more cell.
pub fn total_variation(g1: &GridMeasure, g2: &GridMeasure) -> Result<f64, MeasureError> {
    if g1.viewport != g2.viewport {
        return Err(MeasureError::ViewportMismatch);
    }
    let cells: f64 = g1
        .cells
        .iter()
        .zip(&g2.cells)
        .map(|(a, b)| (a - b).abs())
        .sum();
    Ok(0.5 * (cells + (g1.outside_mass - g2.outside_mass).abs()))
}

/// `sup_{a ∈ from} inf_{b ∈ to} d(a, b)` in the chordal metric.
pub fn directed_hausdorff(from: &[SpherePoint], to: &[SpherePoint]) -> Result<f64, MeasureError> {
    if from.is_empty() || to.is_empty() {
        return Err(MeasureError::EmptySet);
    }
    // Once a point is known to be closer than the running maximum it cannot
    // raise it, so the inner scan stops early.
    let mut worst = 0.0f64;
    for &a in from {
        let mut nearest = f64::INFINITY;
        for &b in to {
            let d = chordal_distance(a, b);
            if d < nearest {
                nearest = d;
                if nearest <= worst {
                    break;
                }
            }
        }
        worst = worst.max(nearest);
    }
    Ok(worst)
}

/// Chordal Hausdorff distance between two finite point sets.
pub fn hausdorff_distance(a: &[SpherePoint], b: &[SpherePoint]) -> Result<f64, MeasureError> {
    Ok(directed_hausdorff(a, b)?.max(directed_hausdorff(b, a)?))
}

/// Chordal Hausdorff distance between the supports of two grid measures on
/// the same viewport (centers of cells with positive mass, as in
/// [`GridMeasure::support`]). Agrees with [`hausdorff_distance`] on those
/// supports but searches outward ring by ring on the grid instead of
/// comparing all pairs.
pub fn support_hausdorff(g1: &GridMeasure, g2: &GridMeasure) -> Result<f64, MeasureError> {
    if g1.viewport != g2.viewport {
        return Err(MeasureError::ViewportMismatch);
    }
    if g1.max_cell() <= 0.0 || g2.max_cell() <= 0.0 {
        return Err(MeasureError::EmptySet);
    }
    Ok(directed_support(g1, g2).max(directed_support(g2, g1)))
}

fn directed_support(from: &GridMeasure, to: &GridMeasure) -> f64 {
    let vp = from.viewport;
    let (nx, ny) = (vp.nx as isize, vp.ny as isize);
    // Inside the viewport the chordal metric is at least 2|p - q| / (1 + R²),
    // R the largest modulus there; cells in ring r are at least r steps away.
    let r_max = [(-0.5, -0.5), (-0.5, 0.5), (0.5, -0.5), (0.5, 0.5)]
        .iter()
        .map(|&(sx, sy)| (vp.center + Complex64::new(sx * vp.width, sy * vp.height)).norm())
        .fold(0.0, f64::max);
    let ring_bound = 2.0 * vp.cell_width().min(vp.cell_height()) / (1.0 + r_max * r_max);
    let occupied: Vec<usize> = (0..from.cells.len())
        .filter(|&i| from.cells[i] > 0.0)
        .collect();

    occupied
        .par_iter()
        .map(|&i| {
            let (cx, cy) = ((i % vp.nx) as isize, (i / vp.nx) as isize);
            let p = SpherePoint::from_complex(vp.cell_center(cx as usize, cy as usize));
            let mut best = f64::INFINITY;
            for r in 0..nx.max(ny) {
                if r as f64 * ring_bound >= best {
                    break;
                }
                for y in (cy - r).max(0)..=(cy + r).min(ny - 1) {
                    let edge = y == cy - r || y == cy + r;
                    let xs: Vec<isize> = if edge {
                        ((cx - r).max(0)..=(cx + r).min(nx - 1)).collect()
                    } else {
                        [cx - r, cx + r]
                            .into_iter()
                            .filter(|&x| x >= 0 && x < nx)
                            .collect()
                    };
                    for x in xs {
                        if to.cells[(y * nx + x) as usize] > 0.0 {
                            let q =
                                SpherePoint::from_complex(vp.cell_center(x as usize, y as usize));
                            best = best.min(chordal_distance(p, q));
                        }
                    }
                }
            }
            best
        })
        .reduce(|| 0.0, f64::max)
}

/// Bounded test functions on the sphere.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TestFunction {
    /// `Re z` (0 at ∞).
    RealPart,
    /// `Im z` (0 at ∞).
    ImagPart,
    /// `|z|² / (1 + |z|²)` (1 at ∞).
    SphereHeight,
    /// `exp(-|z - center|² / (2 width²))` (0 at ∞).
    GaussianBump { center: Complex64, width: f64 },
}

impl TestFunction {
    pub fn eval(&self, p: SpherePoint) -> f64 {
        match (self, p.as_finite()) {
            (TestFunction::RealPart, Some(z)) => z.re,
            (TestFunction::ImagPart, Some(z)) => z.im,
            (TestFunction::SphereHeight, Some(z)) => {
                let r2 = z.norm_sqr();
                if r2.is_finite() {
                    r2 / (1.0 + r2)
                } else {
                    1.0
                }
            }
            (TestFunction::SphereHeight, None) => 1.0,
            (TestFunction::GaussianBump { center, width }, Some(z)) => {
                (-(z - center).norm_sqr() / (2.0 * width * width)).exp()
            }
            (_, None) => 0.0,
        }
    }

    pub fn name(&self) -> String {
        match self {
            TestFunction::RealPart => "Re z".into(),
            TestFunction::ImagPart => "Im z".into(),
            TestFunction::SphereHeight => "|z|^2/(1+|z|^2)".into(),
            TestFunction::GaussianBump { center, width } => {
                format!("bump({}{:+}i, {})", center.re, center.im, width)
            }
        }
    }

    /// `Re z`, `Im z`, `|z|²/(1+|z|²)` and Gaussian bumps of width 0.5 at the
    /// two given centers.
    pub fn default_set(bump_centers: [Complex64; 2]) -> Vec<TestFunction> {
        let mut set = vec![
            TestFunction::RealPart,
            TestFunction::ImagPart,
            TestFunction::SphereHeight,
        ];
        set.extend(
            bump_centers
                .iter()
                .map(|&center| TestFunction::GaussianBump { center, width: 0.5 }),
        );
        set
    }
}

/// Default bump centers: 1 and i.
pub const DEFAULT_BUMP_CENTERS: [Complex64; 2] = [
    Complex64 { re: 1.0, im: 0.0 },
    Complex64 { re: 0.0, im: 1.0 },
];

/// `(Tφ)(z) = Σ_i π_b(i) φ(g_i z)`.
pub fn apply_transfer_operator(
    sg: &Semigroup,
    phi: impl Fn(SpherePoint) -> f64,
    z: SpherePoint,
) -> Result<f64, SolverDivergence> {
    let pi = sg.index_distribution().probabilities();
    Ok(sg
        .all_preimages(z)?
        .into_iter()
        .zip(pi)
        .map(|(w, p)| p * phi(w))
        .sum())
}

#[derive(Clone, Debug, PartialEq)]
pub struct InvarianceRow {
    pub function: TestFunction,
    /// `⟨φ, μ̂⟩`.
    pub integral: f64,
    /// `⟨Tφ, μ̂⟩`.
    pub transferred: f64,
    /// `|⟨Tφ, μ̂⟩ - ⟨φ, μ̂⟩|`.
    pub discrepancy: f64,
}

/// How far `cloud` is from being fixed by the adjoint transfer operator,
/// measured against each test function.
pub fn check_invariance(
    sg: &Semigroup,
    cloud: &WeightedPointCloud,
    functions: &[TestFunction],
) -> Result<Vec<InvarianceRow>, SolverDivergence> {
    let pi = sg.index_distribution().probabilities();
    // Per-atom contributions are computed in parallel and summed in atom order.
    let per_atom: Vec<Vec<(f64, f64)>> = cloud
        .points()
        .par_iter()
        .zip(cloud.masses())
        .map(|(&z, &m)| {
            let pre = sg.all_preimages(z)?;
            Ok(functions
                .iter()
                .map(|phi| {
                    let t: f64 = pre.iter().zip(pi).map(|(&w, p)| p * phi.eval(w)).sum();
                    (m * phi.eval(z), m * t)
                })
                .collect())
        })
        .collect::<Result<_, SolverDivergence>>()?;

    Ok(functions
        .iter()
        .enumerate()
        .map(|(k, &function)| {
            let (mut integral, mut transferred, mut diff) = (0.0, 0.0, 0.0);
            for atom in &per_atom {
                let (phi, t) = atom[k];
                integral += phi;
                transferred += t;
                diff += t - phi;
            }
            InvarianceRow {
                function,
                integral,
                transferred,
                discrepancy: diff.abs(),
            }
        })
        .collect())
}

/// Something points can be measured against.
pub trait ReferenceSet {
    fn distance_to(&self, p: SpherePoint) -> f64;
}

impl ReferenceSet for [SpherePoint] {
    fn distance_to(&self, p: SpherePoint) -> f64 {
        self.iter()
            .map(|&q| chordal_distance(p, q))
            .fold(f64::INFINITY, f64::min)
    }
}

impl ReferenceSet for Vec<SpherePoint> {
    fn distance_to(&self, p: SpherePoint) -> f64 {
        self.as_slice().distance_to(p)
    }
}

/// The circle `|z| = radius`, measured exactly.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OriginCircle {
    pub radius: f64,
}

impl ReferenceSet for OriginCircle {
    fn distance_to(&self, p: SpherePoint) -> f64 {
        // The chordally nearest point of a circle about 0 lies on the ray
        // through p.
        let nearest = match p.as_finite() {
            Some(z) if z.norm() > 0.0 => z * (self.radius / z.norm()),
            Some(_) => Complex64::new(self.radius, 0.0),
            None => Complex64::new(self.radius, 0.0),
        };
        chordal_distance(p, SpherePoint::from_complex(nearest))
    }
}

/// `n` equally spaced points on `|z - center| = radius`, starting at angle 0.
pub fn circle_samples(center: Complex64, radius: f64, n: usize) -> Vec<SpherePoint> {
    (0..n)
        .map(|k| {
            let theta = std::f64::consts::TAU * k as f64 / n as f64;
            SpherePoint::from_complex(center + Complex64::from_polar(radius, theta))
        })
        .collect()
}

/// Largest chordal distance between consecutive samples of a closed curve.
/// For a fine sampling every point of the curve is within this of some
/// sample.
pub fn sampling_gap(samples: &[SpherePoint]) -> f64 {
    if samples.len() < 2 {
        return 0.0;
    }
    let n = samples.len();
    (0..n)
        .map(|k| chordal_distance(samples[k], samples[(k + 1) % n]))
        .fold(0.0, f64::max)
}

/// Distance of every orbit point to `reference`.
pub fn distance_decay_profile<R: ReferenceSet + ?Sized>(
    orbit: &BackwardOrbit,
    reference: &R,
) -> Vec<f64> {
    orbit
        .points
        .iter()
        .map(|&p| reference.distance_to(p))
        .collect()
}

/// [`distance_decay_profile`] against a finite point set.
pub fn distance_decay_to_points(
    orbit: &BackwardOrbit,
    reference: &[SpherePoint],
) -> Result<Vec<f64>, MeasureError> {
    if reference.is_empty() {
        return Err(MeasureError::EmptySet);
    }
    Ok(distance_decay_profile(orbit, reference))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratmap::RationalMap;
    use crate::semigroup::ProbabilityVector;
    use proptest::prelude::*;

    fn vp() -> Viewport {
        Viewport::square(Complex64::new(0.0, 0.0), 1.0, 4).unwrap()
    }

    fn circle() -> Semigroup {
        Semigroup::new(
            vec![RationalMap::real_polynomial(&[0.0, 0.0, 1.0]).unwrap()],
            None,
        )
        .unwrap()
    }

    #[test]
    fn viewport_validation() {
        assert!(Viewport::new(Complex64::default(), 0.0, 1.0, 1, 1).is_err());
        assert!(Viewport::new(Complex64::default(), 1.0, 1.0, 0, 1).is_err());
        assert!(Viewport::new(Complex64::default(), 1.0, f64::NAN, 1, 1).is_err());
    }

    #[test]
    fn support_hausdorff_matches_brute_force() {
        let v = Viewport::new(Complex64::new(0.5, -0.25), 6.0, 4.0, 24, 16).unwrap();
        let mut rng_state = 7u64;
        let mut next = || {
            rng_state = rng_state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (rng_state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..20 {
            let mut g1 = GridMeasure::empty(v);
            let mut g2 = GridMeasure::empty(v);
            for g in [&mut g1, &mut g2] {
                let count = 1 + (next() * 12.0) as usize;
                for _ in 0..count {
                    g.add(
                        SpherePoint::new(next() * 6.0 - 2.5, next() * 4.0 - 2.25),
                        1.0,
                    );
                }
            }
            let fast = support_hausdorff(&g1, &g2).unwrap();
            let slow = hausdorff_distance(&g1.support(), &g2.support()).unwrap();
            assert_eq!(fast, slow);
        }
        assert_eq!(
            support_hausdorff(&GridMeasure::empty(v), &GridMeasure::empty(v)),
            Err(MeasureError::EmptySet)
        );
    }

    #[test]
    fn half_open_cells() {
        let v = vp();
        // Cell width 0.5; x = -1 is the left edge (inside), x = 1 the right edge (outside).
        assert_eq!(v.cell_index(SpherePoint::new(-1.0, 1.0)), Some(0));
        assert_eq!(v.cell_index(SpherePoint::new(1.0, 0.0)), None);
        assert_eq!(v.cell_index(SpherePoint::new(0.0, -1.0)), None);
        assert_eq!(v.cell_index(SpherePoint::new(0.0, 0.0)), Some(2 * 4 + 2));
        assert_eq!(v.cell_index(SpherePoint::Infinity), None);
    }

    #[test]
    fn bin_examples() {
        let g = bin(
            &WeightedPointCloud::uniform(vec![SpherePoint::new(0.1, 0.1)]),
            vp(),
        );
        assert_eq!(g.cells().iter().filter(|&&m| m > 0.0).count(), 1);
        assert_eq!(g.max_cell(), 1.0);

        let g = bin(
            &WeightedPointCloud::uniform(vec![SpherePoint::Infinity]),
            vp(),
        );
        assert_eq!(g.outside_mass(), 1.0);
        assert_eq!(g.max_cell(), 0.0);

        let two = WeightedPointCloud::uniform(vec![
            SpherePoint::new(0.1, 0.1),
            SpherePoint::new(0.2, 0.3),
        ]);
        assert_eq!(bin(&two, vp()).max_cell(), 1.0);
    }

    #[test]
    fn total_variation_examples() {
        let two = Viewport::new(Complex64::default(), 2.0, 1.0, 2, 1).unwrap();
        let a = GridMeasure::from_cells(two, vec![0.6, 0.4], 0.0).unwrap();
        let b = GridMeasure::from_cells(two, vec![0.4, 0.6], 0.0).unwrap();
        assert!((total_variation(&a, &b).unwrap() - 0.2).abs() < 1e-15);
        assert_eq!(total_variation(&a, &a).unwrap(), 0.0);
        let c = GridMeasure::from_cells(two, vec![1.0, 0.0], 0.0).unwrap();
        let d = GridMeasure::from_cells(two, vec![0.0, 1.0], 0.0).unwrap();
        assert_eq!(total_variation(&c, &d).unwrap(), 1.0);
        let other = GridMeasure::empty(vp());
        assert_eq!(
            total_variation(&a, &other).unwrap_err(),
            MeasureError::ViewportMismatch
        );
    }

    #[test]
    fn hausdorff_examples() {
        let a = vec![SpherePoint::ZERO];
        let b = vec![SpherePoint::real(1.0)];
        assert_eq!(hausdorff_distance(&a, &a).unwrap(), 0.0);
        assert_eq!(
            hausdorff_distance(&a, &b).unwrap(),
            chordal_distance(SpherePoint::ZERO, SpherePoint::real(1.0))
        );
        assert_eq!(
            hausdorff_distance(&a, &[]).unwrap_err(),
            MeasureError::EmptySet
        );
    }

    #[test]
    fn hausdorff_orbit_vs_circle() {
        let orbit =
            crate::backward::random_backward_orbit(&circle(), SpherePoint::real(1.0), 1024, 4)
                .unwrap();
        let samples = circle_samples(Complex64::default(), 1.0, 1024);
        assert!(hausdorff_distance(&orbit.points, &samples).unwrap() <= 0.1);
    }

    #[test]
    fn transfer_operator_examples() {
        let sg = circle();
        let one = SpherePoint::real(1.0);
        let norm2 = |p: SpherePoint| p.as_finite().map_or(0.0, |z| z.norm_sqr());
        assert!((apply_transfer_operator(&sg, norm2, one).unwrap() - 1.0).abs() < 1e-15);
        let re = |p: SpherePoint| TestFunction::RealPart.eval(p);
        assert!(apply_transfer_operator(&sg, re, one).unwrap().abs() < 1e-15);

        let annulus = Semigroup::new(
            vec![
                RationalMap::real_polynomial(&[0.0, 0.0, 1.0]).unwrap(),
                RationalMap::real_polynomial(&[0.0, 0.0, 0.25]).unwrap(),
            ],
            Some(ProbabilityVector::uniform(2).unwrap()),
        )
        .unwrap();
        assert!(apply_transfer_operator(&annulus, re, one).unwrap().abs() < 1e-15);
    }

    #[test]
    fn invariance_examples() {
        let sg = circle();
        let cloud = WeightedPointCloud::uniform(circle_samples(Complex64::default(), 1.0, 360));
        let rows = check_invariance(&sg, &cloud, &[TestFunction::RealPart]).unwrap();
        assert!(rows[0].discrepancy <= 1e-12, "{}", rows[0].discrepancy);

        let atom = WeightedPointCloud::uniform(vec![SpherePoint::real(1.0)]);
        let rows = check_invariance(&sg, &atom, &[TestFunction::RealPart]).unwrap();
        assert!((rows[0].discrepancy - 1.0).abs() < 1e-15);
    }

    #[test]
    fn decay_profile_examples() {
        let sg = circle();
        let orbit =
            crate::backward::random_backward_orbit(&sg, SpherePoint::real(3.0), 30, 2).unwrap();
        let samples = circle_samples(Complex64::default(), 1.0, 4096);
        let gap = sampling_gap(&samples);
        let profile = distance_decay_to_points(&orbit, &samples).unwrap();
        for (m, d) in profile.iter().enumerate() {
            let modulus_gap = 3f64.powf(0.5f64.powi(m as i32 + 1)) - 1.0;
            assert!(*d <= modulus_gap + gap + 1e-12, "step {m}: {d}");
        }

        let on_circle =
            crate::backward::random_backward_orbit(&sg, SpherePoint::real(1.0), 50, 2).unwrap();
        for d in distance_decay_to_points(&on_circle, &samples).unwrap() {
            assert!(d <= gap + 1e-12);
        }
        for d in distance_decay_profile(&on_circle, &OriginCircle { radius: 1.0 }) {
            assert!(d <= 1e-9);
        }

        let misuse = distance_decay_to_points(&on_circle, &[SpherePoint::Infinity]).unwrap();
        assert!(misuse.iter().all(|&d| d > 1.0));
        assert_eq!(
            distance_decay_to_points(&on_circle, &[]).unwrap_err(),
            MeasureError::EmptySet
        );
    }

    #[test]
    fn export_round_trip() {
        let v = Viewport::new(Complex64::new(0.25, -1.0), 3.0, 2.0, 3, 2).unwrap();
        let g = GridMeasure::from_cells(v, vec![0.1, 0.2, 0.0, 1e-17, 0.3, 0.2], 0.2).unwrap();
        let text = g.to_text();
        assert!(text.starts_with("# semijulia grid measure v1\ncenter 0.25 -1\nsize 3 2\ncells 3 2\noutside 0.2\n0.1 0.2 0\n"));
        assert_eq!(GridMeasure::from_text(&text).unwrap(), g);
        let broken = text.replace("cells 3 2", "cells 3 x");
        assert!(matches!(
            GridMeasure::from_text(&broken),
            Err(MeasureError::Parse { line: 4, .. })
        ));
    }

    fn grid_measure() -> impl Strategy<Value = GridMeasure> {
        proptest::collection::vec(0.0f64..1.0, 7).prop_map(|raw| {
            let total: f64 = raw.iter().sum::<f64>().max(1e-9);
            let v = Viewport::new(Complex64::default(), 3.0, 2.0, 3, 2).unwrap();
            let cells: Vec<f64> = raw[..6].iter().map(|x| x / total).collect();
            GridMeasure::from_cells(v, cells, raw[6] / total).unwrap()
        })
    }

    proptest! {
        #[test]
        fn total_variation_is_metric(a in grid_measure(), b in grid_measure(), c in grid_measure()) {
            let ab = total_variation(&a, &b).unwrap();
            prop_assert!((ab - total_variation(&b, &a).unwrap()).abs() <= 1e-15);
            prop_assert!(total_variation(&a, &c).unwrap() <= ab + total_variation(&b, &c).unwrap() + 1e-12);
            prop_assert_eq!(total_variation(&a, &a).unwrap(), 0.0);
            prop_assert!((0.0..=1.0 + 1e-12).contains(&ab));
        }

        #[test]
        fn binning_conserves_mass(points in proptest::collection::vec((-2.0f64..2.0, -2.0f64..2.0), 1..200)) {
            let cloud = WeightedPointCloud::uniform(points.iter().map(|&(x, y)| SpherePoint::new(x, y)).collect());
            let g = bin(&cloud, vp());
            prop_assert!((g.total_mass() - cloud.total_mass()).abs() <= 1e-12);
        }
    }
}
