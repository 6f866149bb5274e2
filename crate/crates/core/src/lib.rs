//! Julia sets of finitely generated rational semigroups by backward
//! iteration.
//!
//! A semigroup `G = <f_1, ..., f_k>` with weights `b` induces a distribution
//! over the `d = deg f_1 + ... + deg f_k` preimage branches. The *full*
//! method ([`backward::full_backward_tree`]) pushes a point mass through all
//! `d^n` branch words; the *random* method ([`backward::random_backward_orbit`])
//! follows one randomly drawn word. Both approximate the same invariant
//! measure on the Julia set. [`measure`] discretizes and compares the
//! results, and [`render`] turns them into images.

pub mod backward;
pub mod measure;
pub mod ratmap;
pub mod render;
pub mod roots;
pub mod semigroup;
pub mod sphere;

pub use backward::{
    empirical_measure, for_each_tree_atom, full_backward_tree, full_backward_tree_with_cap,
    random_backward_orbit, run_chains, BackwardError, BackwardOrbit, ChainRun, WeightedPointCloud,
};
pub use measure::{
    apply_transfer_operator, bin, check_invariance, distance_decay_profile, hausdorff_distance,
    support_hausdorff, total_variation, GridMeasure, MeasureError, TestFunction, Viewport,
};
pub use ratmap::{MapError, Polynomial, RationalMap};
pub use render::{render_density, write_image, ColorMap, Image, ImageSpec, RenderError, Scale};
pub use roots::SolverDivergence;
pub use semigroup::{
    validate_assumptions, IndexDistribution, ProbabilityVector, Semigroup, SemigroupError,
    ValidationReport,
};
pub use sphere::{chordal_distance, Complex64, SpherePoint};
