//! Full and random backward iteration.
//!
//! The full tree puts mass `π(i_1)···π(i_n)` on `g_{i_n} ∘ ··· ∘ g_{i_1}(a)` for
//! every word of length `n`. The random chain draws the word one symbol at a
//! time and keeps only the path it walks.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::roots::SolverDivergence;
use crate::semigroup::Semigroup;
use crate::sphere::SpherePoint;

/// Largest number of atoms `full_backward_tree` will materialize by default.
pub const DEFAULT_MAX_ATOMS: usize = 1 << 24;

/// Number of leading chain points dropped before averaging, by default.
pub const DEFAULT_BURN_IN: usize = 100;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum BackwardError {
    #[error("full tree of depth {depth} over {branches} branches has more than {cap} atoms")]
    BudgetExceeded {
        branches: usize,
        depth: usize,
        cap: usize,
    },
    #[error("burn-in {burn_in} leaves nothing of an orbit of length {len}")]
    EmptyTail { burn_in: usize, len: usize },
    #[error("orbit length must be at least 1")]
    ZeroLength,
    #[error("no seeds given")]
    NoSeeds,
    #[error("seed {0} appears more than once")]
    DuplicateSeed(u64),
    #[error("point and mass lists differ in length ({points} vs {masses})")]
    LengthMismatch { points: usize, masses: usize },
    #[error(transparent)]
    Solver(#[from] SolverDivergence),
}

/// A finite atomic measure.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct WeightedPointCloud {
    points: Vec<SpherePoint>,
    masses: Vec<f64>,
}

impl WeightedPointCloud {
    pub fn new(points: Vec<SpherePoint>, masses: Vec<f64>) -> Result<Self, BackwardError> {
        if points.len() != masses.len() {
            return Err(BackwardError::LengthMismatch {
                points: points.len(),
                masses: masses.len(),
            });
        }
        Ok(Self { points, masses })
    }

    /// Every point gets mass `1/len`.
    pub fn uniform(points: Vec<SpherePoint>) -> Self {
        let m = 1.0 / points.len() as f64;
        let masses = vec![m; points.len()];
        Self { points, masses }
    }

    pub fn points(&self) -> &[SpherePoint] {
        &self.points
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.masses.iter().sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (SpherePoint, f64)> + '_ {
        self.points.iter().copied().zip(self.masses.iter().copied())
    }

    /// `∫ φ dμ`.
    pub fn integrate(&self, phi: impl Fn(SpherePoint) -> f64) -> f64 {
        self.iter().map(|(p, m)| m * phi(p)).sum()
    }
}

fn check_budget(sg: &Semigroup, depth: usize, cap: usize) -> Result<(), BackwardError> {
    let d = sg.total_degree();
    let atoms = u32::try_from(depth).ok().and_then(|n| d.checked_pow(n));
    match atoms {
        Some(atoms) if atoms <= cap => Ok(()),
        _ => Err(BackwardError::BudgetExceeded {
            branches: d,
            depth,
            cap,
        }),
    }
}

/// The measure `μ_n^{a,b}` with the default atom cap.
pub fn full_backward_tree(
    sg: &Semigroup,
    a: SpherePoint,
    depth: usize,
) -> Result<WeightedPointCloud, BackwardError> {
    full_backward_tree_with_cap(sg, a, depth, DEFAULT_MAX_ATOMS)
}

/// Builds the depth-`depth` tree level by level: level `m + 1` lists, for each
/// level-`m` atom in order, its `d` preimages in branch-index order.
pub fn full_backward_tree_with_cap(
    sg: &Semigroup,
    a: SpherePoint,
    depth: usize,
    cap: usize,
) -> Result<WeightedPointCloud, BackwardError> {
    check_budget(sg, depth, cap)?;
    let pi = sg.index_distribution().probabilities();
    let mut level = WeightedPointCloud {
        points: vec![a],
        masses: vec![1.0],
    };
    for _ in 0..depth {
        level = tree_step(sg, pi, &level)?;
    }
    Ok(level)
}

fn tree_step(
    sg: &Semigroup,
    pi: &[f64],
    level: &WeightedPointCloud,
) -> Result<WeightedPointCloud, BackwardError> {
    let d = sg.total_degree();
    let children: Vec<Vec<SpherePoint>> = level
        .points
        .par_iter()
        .map(|&z| sg.all_preimages(z))
        .collect::<Result<_, _>>()?;
    let mut points = Vec::with_capacity(level.len() * d);
    let mut masses = Vec::with_capacity(level.len() * d);
    for (kids, &m) in children.into_iter().zip(&level.masses) {
        for (w, &p) in kids.into_iter().zip(pi) {
            points.push(w);
            masses.push(m * p);
        }
    }
    Ok(WeightedPointCloud { points, masses })
}

/// Visits every depth-`depth` atom without materializing the tree, in the
/// same order and with the same masses as [`full_backward_tree`].
pub fn for_each_tree_atom(
    sg: &Semigroup,
    a: SpherePoint,
    depth: usize,
    mut visit: impl FnMut(SpherePoint, f64),
) -> Result<(), BackwardError> {
    fn descend(
        sg: &Semigroup,
        pi: &[f64],
        z: SpherePoint,
        mass: f64,
        remaining: usize,
        visit: &mut dyn FnMut(SpherePoint, f64),
    ) -> Result<(), SolverDivergence> {
        if remaining == 0 {
            visit(z, mass);
            return Ok(());
        }
        for (w, &p) in sg.all_preimages(z)?.into_iter().zip(pi) {
            descend(sg, pi, w, mass * p, remaining - 1, visit)?;
        }
        Ok(())
    }
    let pi = sg.index_distribution().probabilities();
    descend(sg, pi, a, 1.0, depth, &mut visit)?;
    Ok(())
}

/// A realization of the random backward chain started at `start`.
#[derive(Clone, Debug, PartialEq)]
pub struct BackwardOrbit {
    pub start: SpherePoint,
    /// Branch indices `i_1, i_2, ...` (0-based).
    pub symbols: Vec<usize>,
    /// `points[m]` is the chosen preimage of `points[m - 1]` (of `start` for
    /// `m = 0`).
    pub points: Vec<SpherePoint>,
    pub seed: u64,
}

impl BackwardOrbit {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// The point the chain was at before step `m`.
    pub fn parent(&self, m: usize) -> SpherePoint {
        if m == 0 {
            self.start
        } else {
            self.points[m - 1]
        }
    }
}

/// Runs `n` steps of the random backward chain with a ChaCha8 stream seeded
/// from `seed`.
pub fn random_backward_orbit(
    sg: &Semigroup,
    a: SpherePoint,
    n: usize,
    seed: u64,
) -> Result<BackwardOrbit, BackwardError> {
    if n == 0 {
        return Err(BackwardError::ZeroLength);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dist = sg.index_distribution();
    let mut symbols = Vec::with_capacity(n);
    let mut points = Vec::with_capacity(n);
    let mut z = a;
    for _ in 0..n {
        let i = dist.sample(&mut rng);
        z = sg.branch_preimage(i, z)?;
        symbols.push(i);
        points.push(z);
    }
    Ok(BackwardOrbit {
        start: a,
        symbols,
        points,
        seed,
    })
}

/// Uniform measure on the orbit points after the first `burn_in`.
pub fn empirical_measure(
    orbit: &BackwardOrbit,
    burn_in: usize,
) -> Result<WeightedPointCloud, BackwardError> {
    if burn_in >= orbit.len() {
        return Err(BackwardError::EmptyTail {
            burn_in,
            len: orbit.len(),
        });
    }
    Ok(WeightedPointCloud::uniform(
        orbit.points[burn_in..].to_vec(),
    ))
}

/// Independent chains merged into one measure.
#[derive(Clone, Debug)]
pub struct ChainRun {
    /// One orbit per seed, in ascending seed order.
    pub orbits: Vec<BackwardOrbit>,
    pub burn_in: usize,
    pub merged: WeightedPointCloud,
}

/// Runs one chain per seed (concurrently) and averages their empirical
/// measures. Chains are merged in ascending seed order, so the result does
/// not depend on the order of `seeds`.
pub fn run_chains(
    sg: &Semigroup,
    a: SpherePoint,
    n_per_chain: usize,
    burn_in: usize,
    seeds: &[u64],
) -> Result<ChainRun, BackwardError> {
    if seeds.is_empty() {
        return Err(BackwardError::NoSeeds);
    }
    let mut sorted = seeds.to_vec();
    sorted.sort_unstable();
    if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
        return Err(BackwardError::DuplicateSeed(w[0]));
    }
    if burn_in >= n_per_chain {
        return Err(BackwardError::EmptyTail {
            burn_in,
            len: n_per_chain,
        });
    }

    let orbits: Vec<BackwardOrbit> = sorted
        .par_iter()
        .map(|&seed| random_backward_orbit(sg, a, n_per_chain, seed))
        .collect::<Result<_, _>>()?;

    let tail = n_per_chain - burn_in;
    let mass = 1.0 / (tail * orbits.len()) as f64;
    let points: Vec<SpherePoint> = orbits
        .iter()
        .flat_map(|o| o.points[burn_in..].iter().copied())
        .collect();
    let masses = vec![mass; points.len()];
    Ok(ChainRun {
        orbits,
        burn_in,
        merged: WeightedPointCloud { points, masses },
    })
}
