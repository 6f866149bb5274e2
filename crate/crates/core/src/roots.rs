//! Simultaneous polynomial root finding (Aberth–Ehrlich).
//!
//! Returns every root of a polynomial with multiplicity. Multiple roots come
//! back as clusters which are collapsed onto their centroid whenever the
//! centroid itself meets the residual tolerance.

use num_complex::Complex64;
use thiserror::Error;

/// Relative backward-error tolerance: a root `z` is accepted once
/// `|p(z)| <= RESIDUAL_TOLERANCE * sum_k |a_k| |z|^k`.
pub const RESIDUAL_TOLERANCE: f64 = 1e-12;

/// Iteration budget for the simultaneous iteration.
pub const MAX_ITERATIONS: usize = 500;

/// Roots keep iterating until the residual is at rounding level (this
/// multiple of `EPSILON * (degree + 1)`) or the budget runs out; only then is
/// [`RESIDUAL_TOLERANCE`] enforced. Clusters tighten considerably in the
/// extra iterations.
const ROUNDING_FACTOR: f64 = 8.0;

/// Roots closer than this (relative to `max(1, |z|)`) are candidates for
/// being one multiple root.
const CLUSTER_RADIUS: f64 = 1e-4;

/// Roots of a real polynomial whose imaginary part is below this (relative)
/// are put exactly on the real axis.
const REAL_SNAP: f64 = 1e-12;

#[derive(Clone, Debug, Error, PartialEq)]
#[error("root finder did not reach residual tolerance within {iterations} iterations; coefficients (ascending) = {coefficients:?}")]
pub struct SolverDivergence {
    pub coefficients: Vec<Complex64>,
    pub iterations: usize,
}

/// All roots of `sum_k coeffs[k] w^k`, with multiplicity.
///
/// The leading coefficient must be nonzero; the result has exactly
/// `coeffs.len() - 1` entries, in no particular order.
pub fn polynomial_roots(coeffs: &[Complex64]) -> Result<Vec<Complex64>, SolverDivergence> {
    let Some(&lead) = coeffs.last() else {
        return Ok(Vec::new());
    };
    assert!(
        lead.norm() > 0.0,
        "polynomial_roots requires a nonzero leading coefficient"
    );

    // Exact zero roots come off the bottom.
    let zeros = coeffs
        .iter()
        .take_while(|c| c.re == 0.0 && c.im == 0.0)
        .count();
    let mut roots = vec![Complex64::new(0.0, 0.0); zeros];
    let monic: Vec<Complex64> = coeffs[zeros..].iter().map(|c| c / lead).collect();
    let degree = monic.len() - 1;

    match degree {
        0 => {}
        1 => roots.push(clean(-monic[0])),
        _ => {
            let found = aberth(&monic).map_err(|iterations| SolverDivergence {
                coefficients: coeffs.to_vec(),
                iterations,
            })?;
            roots.extend(found);
        }
    }
    Ok(roots)
}

/// Horner evaluation of `p`, `p'`, and the modulus bound `sum |a_k| |z|^k`.
fn evaluate(a: &[Complex64], z: Complex64) -> (Complex64, Complex64, f64) {
    let r = z.norm();
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    let mut scale = 0.0;
    for c in a.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
        scale = scale * r + c.norm();
    }
    (p, dp, scale)
}

fn residual_ok(a: &[Complex64], z: Complex64) -> bool {
    let (p, _, scale) = evaluate(a, z);
    p.norm() <= RESIDUAL_TOLERANCE * scale
}

fn clean(z: Complex64) -> Complex64 {
    Complex64::new(z.re + 0.0, z.im + 0.0)
}

fn aberth(a: &[Complex64]) -> Result<Vec<Complex64>, usize> {
    let m = a.len() - 1;
    let radius = 1.0 + a[..m].iter().map(|c| c.norm()).fold(0.0, f64::max);
    let mut z: Vec<Complex64> = (0..m)
        .map(|k| {
            let theta = std::f64::consts::TAU * k as f64 / m as f64 + 0.4;
            Complex64::from_polar(radius, theta)
        })
        .collect();
    let mut done = vec![false; m];
    let rounding = ROUNDING_FACTOR * f64::EPSILON * (m + 1) as f64;

    let mut iterations = 0;
    while iterations < MAX_ITERATIONS && done.iter().any(|d| !d) {
        iterations += 1;
        for i in 0..m {
            if done[i] {
                continue;
            }
            let (p, dp, scale) = evaluate(a, z[i]);
            if p.norm() <= rounding * scale {
                done[i] = true;
                continue;
            }
            let mut repulsion = Complex64::new(0.0, 0.0);
            for j in 0..m {
                if j != i {
                    let diff = z[i] - z[j];
                    if diff.norm() > 0.0 {
                        repulsion += diff.inv();
                    }
                }
            }
            let step = if dp.norm() > 0.0 {
                let ratio = p / dp;
                ratio / (Complex64::new(1.0, 0.0) - ratio * repulsion)
            } else if repulsion.norm() > 0.0 {
                -repulsion.inv()
            } else {
                Complex64::new(f64::NAN, 0.0)
            };
            if step.re.is_finite() && step.im.is_finite() {
                z[i] -= step;
            } else {
                // Stationary point of p; nudge off it.
                let nudge = 1e-3 * radius.max(z[i].norm());
                z[i] += Complex64::from_polar(nudge, 0.7 + i as f64);
            }
        }
    }
    for (i, zi) in z.iter().enumerate() {
        if !done[i] && !residual_ok(a, *zi) {
            return Err(iterations);
        }
    }

    let clustered = collapse_clusters(a, &mut z);
    for (zi, &in_cluster) in z.iter_mut().zip(&clustered) {
        if !in_cluster {
            *zi = newton_polish(a, *zi);
        }
    }

    if a.iter().all(|c| c.im == 0.0) {
        for zi in z.iter_mut() {
            if zi.im.abs() <= REAL_SNAP * zi.norm().max(1.0) {
                zi.im = 0.0;
            }
        }
    }
    Ok(z.into_iter().map(clean).collect())
}

/// Replaces each cluster of `k` near-equal roots by one point repeated `k`
/// times: the centroid refined by Newton's method on `p^(k-1)`, of which a
/// `k`-fold root of `p` is a simple root. The replacement only happens when
/// the refined point passes the residual test. Returns which roots were
/// collapsed.
fn collapse_clusters(a: &[Complex64], z: &mut [Complex64]) -> Vec<bool> {
    let m = z.len();
    let mut parent: Vec<usize> = (0..m).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..m {
        for j in (i + 1)..m {
            let tol = CLUSTER_RADIUS * z[i].norm().max(z[j].norm()).max(1.0);
            if (z[i] - z[j]).norm() <= tol {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[rj] = ri;
                }
            }
        }
    }

    let mut collapsed = vec![false; m];
    for root in 0..m {
        let members: Vec<usize> = (0..m).filter(|&i| find(&mut parent, i) == root).collect();
        if members.len() < 2 {
            continue;
        }
        let centroid = members.iter().map(|&i| z[i]).sum::<Complex64>() / members.len() as f64;
        let spread = members
            .iter()
            .map(|&i| (z[i] - centroid).norm())
            .fold(0.0, f64::max);
        let refined = refine_multiple_root(a, members.len(), centroid, spread);
        if residual_ok(a, refined) {
            for &i in &members {
                z[i] = refined;
                collapsed[i] = true;
            }
        }
    }
    collapsed
}

fn derivative(a: &[Complex64]) -> Vec<Complex64> {
    a.iter()
        .enumerate()
        .skip(1)
        .map(|(k, c)| c * k as f64)
        .collect()
}

fn refine_multiple_root(
    a: &[Complex64],
    multiplicity: usize,
    start: Complex64,
    spread: f64,
) -> Complex64 {
    let mut q = a.to_vec();
    for _ in 1..multiplicity {
        q = derivative(&q);
    }
    let mut z = start;
    for _ in 0..8 {
        let (p, dp, _) = evaluate(&q, z);
        if dp.norm() == 0.0 {
            break;
        }
        let next = z - p / dp;
        if !(next.re.is_finite() && next.im.is_finite()) || (next - start).norm() > 2.0 * spread {
            return start;
        }
        if next == z {
            break;
        }
        z = next;
    }
    z
}

fn newton_polish(a: &[Complex64], z: Complex64) -> Complex64 {
    let (p, dp, _) = evaluate(a, z);
    if dp.norm() == 0.0 {
        return z;
    }
    let candidate = z - p / dp;
    if !(candidate.re.is_finite() && candidate.im.is_finite()) {
        return z;
    }
    let (p_new, _, _) = evaluate(a, candidate);
    if p_new.norm() <= p.norm() {
        candidate
    } else {
        z
    }
}
