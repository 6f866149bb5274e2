//! Finitely generated rational semigroups, their probability vectors and the
//! induced distribution over preimage branches.

use std::fmt;

use rand::Rng;
use thiserror::Error;

use crate::ratmap::RationalMap;
use crate::roots::SolverDivergence;
use crate::sphere::{chordal_distance, SpherePoint};

/// Tolerance on `sum b_j = 1` accepted from user input.
pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-12;

/// Chordal radius used when matching the start point against exceptional
/// candidates, and preimages against a candidate.
pub const EXCEPTIONAL_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum SemigroupError {
    #[error("semigroup needs at least one generator")]
    NoGenerators,
    #[error("probability vector is empty")]
    EmptyWeights,
    #[error("weight b[{index}] = {value} must be strictly positive and finite")]
    NonPositiveWeight { index: usize, value: f64 },
    #[error("weights sum to {sum}, expected 1 (tolerance {WEIGHT_SUM_TOLERANCE:e})")]
    WeightSum { sum: f64 },
    #[error("{weights} weights given for {generators} generators")]
    WeightCount { weights: usize, generators: usize },
    #[error("no generator has degree two or more")]
    NoExpandingGenerator,
    #[error("start point {point} is (numerically) exceptional: matches candidate {candidate}")]
    ExceptionalStartPoint {
        point: SpherePoint,
        candidate: SpherePoint,
    },
    #[error(transparent)]
    Solver(#[from] SolverDivergence),
}

/// Strictly positive weights summing to one.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbabilityVector {
    weights: Vec<f64>,
}

impl ProbabilityVector {
    pub fn new(weights: Vec<f64>) -> Result<Self, SemigroupError> {
        if weights.is_empty() {
            return Err(SemigroupError::EmptyWeights);
        }
        if let Some((index, &value)) = weights
            .iter()
            .enumerate()
            .find(|(_, w)| !(w.is_finite() && **w > 0.0))
        {
            return Err(SemigroupError::NonPositiveWeight { index, value });
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
            return Err(SemigroupError::WeightSum { sum });
        }
        let mut weights: Vec<f64> = weights.iter().map(|w| w / sum).collect();
        let last = weights.len() - 1;
        let head: f64 = weights[..last].iter().sum();
        if 1.0 - head > 0.0 {
            weights[last] = 1.0 - head;
        }
        Ok(Self { weights })
    }

    /// `b_j = 1/k`.
    pub fn uniform(k: usize) -> Result<Self, SemigroupError> {
        Self::new(vec![1.0 / k as f64; k])
    }

    /// `b_j = d_j / d`, which makes every branch equally likely.
    pub fn degree_proportional(degrees: &[usize]) -> Result<Self, SemigroupError> {
        let d: usize = degrees.iter().sum();
        Self::new(degrees.iter().map(|&dj| dj as f64 / d as f64).collect())
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// Where a flat branch index points: generator `generator`, preimage number
/// `branch` in the sorted preimage list of that generator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Branch {
    pub generator: usize,
    pub branch: usize,
}

/// Distribution over the `d = d_1 + ... + d_k` preimage branches.
///
/// Indices are 0-based and block structured: the first `d_1` indices belong
/// to generator 0, the next `d_2` to generator 1, and so on. Every branch of
/// generator `j` carries the same probability `b_j / d_j`; there is no way
/// to build one with unequal weights inside a block.
#[derive(Clone, Debug, PartialEq)]
pub struct IndexDistribution {
    probabilities: Vec<f64>,
    decode: Vec<Branch>,
    cumulative: Vec<f64>,
}

impl IndexDistribution {
    pub fn new(degrees: &[usize], b: &ProbabilityVector) -> Self {
        assert_eq!(degrees.len(), b.len(), "one weight per generator");
        let mut probabilities = Vec::new();
        let mut decode = Vec::new();
        for (generator, (&dj, &bj)) in degrees.iter().zip(b.weights()).enumerate() {
            let p = bj / dj as f64;
            for branch in 0..dj {
                probabilities.push(p);
                decode.push(Branch { generator, branch });
            }
        }
        let mut cumulative: Vec<f64> = probabilities
            .iter()
            .scan(0.0, |acc, p| {
                *acc += p;
                Some(*acc)
            })
            .collect();
        if let Some(last) = cumulative.last_mut() {
            *last = 1.0;
        }
        Self {
            probabilities,
            decode,
            cumulative,
        }
    }

    pub fn len(&self) -> usize {
        self.probabilities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probabilities.is_empty()
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn probability(&self, index: usize) -> f64 {
        self.probabilities[index]
    }

    pub fn decode(&self, index: usize) -> Branch {
        self.decode[index]
    }

    pub fn cumulative(&self) -> &[f64] {
        &self.cumulative
    }

    /// Draws a branch index with probability `π_b(i)` from one uniform
    /// variate. Equivalent to picking generator `j` with probability `b_j`
    /// and then one of its `d_j` preimages uniformly.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.gen();
        self.cumulative
            .partition_point(|&c| c <= u)
            .min(self.len() - 1)
    }
}

/// `G = <f_1, ..., f_k>` together with its probability vector.
#[derive(Clone, Debug)]
pub struct Semigroup {
    generators: Vec<RationalMap>,
    total_degree: usize,
    weights: ProbabilityVector,
    index: IndexDistribution,
}

impl Semigroup {
    /// Builds the semigroup; `weights = None` means uniform `b_j = 1/k`.
    pub fn new(
        generators: Vec<RationalMap>,
        weights: Option<ProbabilityVector>,
    ) -> Result<Self, SemigroupError> {
        if generators.is_empty() {
            return Err(SemigroupError::NoGenerators);
        }
        let weights = match weights {
            Some(b) => b,
            None => ProbabilityVector::uniform(generators.len())?,
        };
        if weights.len() != generators.len() {
            return Err(SemigroupError::WeightCount {
                weights: weights.len(),
                generators: generators.len(),
            });
        }
        if generators.iter().all(|f| f.degree() < 2) {
            return Err(SemigroupError::NoExpandingGenerator);
        }
        let degrees: Vec<usize> = generators.iter().map(RationalMap::degree).collect();
        let index = IndexDistribution::new(&degrees, &weights);
        Ok(Self {
            total_degree: degrees.iter().sum(),
            generators,
            weights,
            index,
        })
    }

    pub fn generators(&self) -> &[RationalMap] {
        &self.generators
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.generators.iter().map(RationalMap::degree).collect()
    }

    pub fn total_degree(&self) -> usize {
        self.total_degree
    }

    pub fn weights(&self) -> &ProbabilityVector {
        &self.weights
    }

    pub fn index_distribution(&self) -> &IndexDistribution {
        &self.index
    }

    /// The preimage selected by flat branch index `i`.
    pub fn branch_preimage(
        &self,
        i: usize,
        z: SpherePoint,
    ) -> Result<SpherePoint, SolverDivergence> {
        let Branch { generator, branch } = self.index.decode(i);
        Ok(self.generators[generator].preimages(z)?[branch])
    }

    /// All `d` preimages of `z`, in flat branch-index order.
    pub fn all_preimages(&self, z: SpherePoint) -> Result<Vec<SpherePoint>, SolverDivergence> {
        let mut out = Vec::with_capacity(self.total_degree);
        for f in &self.generators {
            out.extend(f.preimages(z)?);
        }
        Ok(out)
    }

    /// Points that look exceptional: fixed points `w` of some generator such
    /// that every generator has `w` as its only preimage of `w`.
    pub fn exceptional_candidates(&self) -> Result<Vec<SpherePoint>, SolverDivergence> {
        let mut candidates: Vec<SpherePoint> = Vec::new();
        for f in &self.generators {
            for w in f.fixed_points()? {
                if candidates
                    .iter()
                    .any(|&c| chordal_distance(c, w) <= EXCEPTIONAL_TOLERANCE)
                {
                    continue;
                }
                let mut totally_ramified = true;
                for g in &self.generators {
                    if g.preimages(w)?
                        .iter()
                        .any(|&p| chordal_distance(p, w) > EXCEPTIONAL_TOLERANCE)
                    {
                        totally_ramified = false;
                        break;
                    }
                }
                if totally_ramified {
                    candidates.push(w);
                }
            }
        }
        Ok(candidates)
    }
}

/// Outcome of a single check in a [`ValidationReport`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CheckStatus {
    Pass,
    Fail,
    /// Asserted by the user; not checked numerically.
    Unverified,
}

impl fmt::Display for CheckStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CheckStatus::Pass => "PASS",
            CheckStatus::Fail => "FAIL",
            CheckStatus::Unverified => "UNVERIFIED",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ValidationReport {
    /// Some generator has degree at least two.
    pub degree_condition: CheckStatus,
    /// The start point is not one of the exceptional candidates.
    pub start_point: CheckStatus,
    pub exceptional_candidates: Vec<SpherePoint>,
    /// Exceptional set inside the Fatou set.
    pub exceptional_in_fatou: CheckStatus,
    /// Möbius inverse semigroup condition.
    pub mobius_condition: CheckStatus,
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "degree >= 2 generator: {}", self.degree_condition)?;
        let list: Vec<String> = self
            .exceptional_candidates
            .iter()
            .map(|p| p.to_string())
            .collect();
        writeln!(
            f,
            "start point non-exceptional (heuristic; candidates [{}]): {}",
            list.join(", "),
            self.start_point
        )?;
        writeln!(f, "E(G) contained in F(G): {}", self.exceptional_in_fatou)?;
        write!(f, "Mobius inverse condition: {}", self.mobius_condition)
    }
}

/// Checks what can be checked about `sg` and the start point `a`.
///
/// Fails with [`SemigroupError::ExceptionalStartPoint`] when `a` is within
/// chordal distance [`EXCEPTIONAL_TOLERANCE`] of an exceptional candidate.
pub fn validate_assumptions(
    sg: &Semigroup,
    a: SpherePoint,
) -> Result<ValidationReport, SemigroupError> {
    let degree_condition = if sg.generators.iter().any(|f| f.degree() >= 2) {
        CheckStatus::Pass
    } else {
        CheckStatus::Fail
    };
    let candidates = sg.exceptional_candidates()?;
    if let Some(&candidate) = candidates
        .iter()
        .find(|&&c| chordal_distance(c, a) <= EXCEPTIONAL_TOLERANCE)
    {
        return Err(SemigroupError::ExceptionalStartPoint {
            point: a,
            candidate,
        });
    }
    Ok(ValidationReport {
        degree_condition,
        start_point: CheckStatus::Pass,
        exceptional_candidates: candidates,
        exceptional_in_fatou: CheckStatus::Unverified,
        mobius_condition: CheckStatus::Unverified,
    })
}
