//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line per
//! criterion and exits nonzero if any failed.

use std::f64::consts::{PI, TAU};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use semijulia::measure::{circle_samples, directed_hausdorff, OriginCircle, DEFAULT_BUMP_CENTERS};
use semijulia::render::ImageSpec;
use semijulia::*;

struct Outcome {
    passed: bool,
    detail: String,
}

struct Criterion {
    id: &'static str,
    name: &'static str,
    budget: Duration,
    run: fn(&mut Shared) -> Outcome,
}

/// Chains reused by the invariance criterion.
#[derive(Default)]
struct Shared {
    circle_chain: Option<WeightedPointCloud>,
    chebyshev_chain: Option<WeightedPointCloud>,
    annulus_chain: Option<WeightedPointCloud>,
}

fn map(coeffs: &[f64]) -> RationalMap {
    RationalMap::real_polynomial(coeffs).unwrap()
}

fn circle() -> Semigroup {
    Semigroup::new(vec![map(&[0.0, 0.0, 1.0])], None).unwrap()
}

fn chebyshev() -> Semigroup {
    Semigroup::new(vec![map(&[-2.0, 0.0, 1.0])], None).unwrap()
}

fn annulus() -> Semigroup {
    Semigroup::new(vec![map(&[0.0, 0.0, 1.0]), map(&[0.0, 0.0, 0.25])], None).unwrap()
}

const BURN_IN: usize = 100;
const CHAIN_LENGTH: usize = 1_000_000;
const ANNULUS_SEEDS: [u64; 4] = [501, 502, 503, 504];

fn unit_disk(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::from_polar(rng.gen::<f64>().sqrt(), rng.gen::<f64>() * TAU)
}

fn c1_preimages(_: &mut Shared) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    let mut bad_count = 0;
    let mut pairs = 0;
    while pairs < 1000 {
        let dn = rng.gen_range(0..=6);
        let dd = rng.gen_range(0..=6);
        let num: Vec<Complex64> = (0..=dn).map(|_| unit_disk(&mut rng)).collect();
        let den: Vec<Complex64> = (0..=dd).map(|_| unit_disk(&mut rng)).collect();
        let Ok(f) = RationalMap::new(Polynomial::new(num).unwrap(), Polynomial::new(den).unwrap())
        else {
            continue;
        };
        let z = match rng.gen_range(0..20) {
            0 => SpherePoint::Infinity,
            1 => f.evaluate(SpherePoint::ZERO),
            _ => SpherePoint::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)),
        };
        pairs += 1;
        match f.preimages(z) {
            Ok(pre) => {
                if pre.len() != f.degree() {
                    bad_count += 1;
                }
                for w in pre {
                    worst = worst.max(chordal_distance(f.evaluate(w), z));
                }
            }
            Err(_) => bad_count += 1,
        }
    }
    Outcome {
        passed: worst <= 1e-9 && bad_count == 0,
        detail: format!("{pairs} pairs, worst chordal residual {worst:.2e} (<= 1e-9), {bad_count} count/solver failures"),
    }
}

fn c2_index_structure(_: &mut Shared) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst_sum = 0.0f64;
    let mut block_violations = 0;
    for _ in 0..100 {
        let k = rng.gen_range(1..=6);
        let degrees: Vec<usize> = (0..k).map(|_| rng.gen_range(1..=6)).collect();
        let raw: Vec<f64> = (0..k).map(|_| rng.gen_range(0.01..1.0)).collect();
        let total: f64 = raw.iter().sum();
        let b = ProbabilityVector::new(raw.iter().map(|w| w / total).collect()).unwrap();
        let dist = IndexDistribution::new(&degrees, &b);
        worst_sum = worst_sum.max((dist.probabilities().iter().sum::<f64>() - 1.0).abs());
        let mut start = 0;
        for (j, &dj) in degrees.iter().enumerate() {
            let expected = b.weights()[j] / dj as f64;
            for i in start..start + dj {
                if dist.probability(i) != expected
                    || dist.decode(i).generator != j
                    || dist.decode(i).branch != i - start
                {
                    block_violations += 1;
                }
            }
            start += dj;
        }
    }
    Outcome {
        passed: worst_sum <= 1e-12 && block_violations == 0,
        detail: format!("100 configurations, max |sum - 1| = {worst_sum:.1e}, {block_violations} block violations"),
    }
}

fn angular_histogram(cloud: &WeightedPointCloud, bins: usize) -> Vec<f64> {
    let mut hist = vec![0.0; bins];
    for (p, m) in cloud.iter() {
        let z = p.as_finite().expect("finite orbit point");
        let theta = z.arg().rem_euclid(TAU);
        hist[((theta / TAU * bins as f64) as usize).min(bins - 1)] += m;
    }
    hist
}

fn c3_unit_circle(shared: &mut Shared) -> Outcome {
    let sg = circle();
    let orbit = random_backward_orbit(&sg, SpherePoint::real(1.0), CHAIN_LENGTH, 3).unwrap();
    let off_circle = orbit
        .points
        .iter()
        .map(|p| (p.modulus() - 1.0).abs())
        .fold(0.0, f64::max);
    let chain = empirical_measure(&orbit, BURN_IN).unwrap();
    let dev = |h: &[f64]| h.iter().map(|x| (x - 1.0 / 36.0).abs()).fold(0.0, f64::max);
    let chain_dev = dev(&angular_histogram(&chain, 36));

    let tree = full_backward_tree(&sg, SpherePoint::real(1.0), 20).unwrap();
    let tree_dev = dev(&angular_histogram(&tree, 36));
    shared.circle_chain = Some(chain);
    Outcome {
        passed: off_circle <= 1e-9 && chain_dev <= 0.005 && tree_dev <= 0.005,
        detail: format!(
            "max ||z|-1| = {off_circle:.1e} (<= 1e-9), chain angular deviation {chain_dev:.2e} (<= 0.005), depth-20 tree deviation {tree_dev:.2e}"
        ),
    }
}

fn arcsine_cdf(x: f64) -> f64 {
    0.5 + (x / 2.0).clamp(-1.0, 1.0).asin() / PI
}

/// Kolmogorov–Smirnov distance between a weighted sample on the real line
/// and a continuous CDF.
fn ks_distance(mut atoms: Vec<(f64, f64)>, cdf: impl Fn(f64) -> f64) -> f64 {
    atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut below = 0.0;
    let mut worst = 0.0f64;
    let mut i = 0;
    while i < atoms.len() {
        let x = atoms[i].0;
        let before = below;
        while i < atoms.len() && atoms[i].0 == x {
            below += atoms[i].1;
            i += 1;
        }
        let f = cdf(x);
        worst = worst.max((f - before).abs()).max((below - f).abs());
    }
    worst
}

fn real_atoms(cloud: &WeightedPointCloud) -> Vec<(f64, f64)> {
    cloud
        .iter()
        .map(|(p, m)| (p.as_finite().unwrap().re, m))
        .collect()
}

fn c4_arcsine(shared: &mut Shared) -> Outcome {
    let sg = chebyshev();
    let orbit = random_backward_orbit(&sg, SpherePoint::ZERO, CHAIN_LENGTH, 4).unwrap();
    let mut max_im = 0.0f64;
    let mut out_of_range = 0;
    for p in &orbit.points {
        let z = p.as_finite().unwrap();
        max_im = max_im.max(z.im.abs());
        if !(-2.0 - 1e-6..=2.0 + 1e-6).contains(&z.re) {
            out_of_range += 1;
        }
    }
    let chain = empirical_measure(&orbit, BURN_IN).unwrap();
    let ks_chain = ks_distance(real_atoms(&chain), arcsine_cdf);
    let tree = full_backward_tree(&sg, SpherePoint::ZERO, 18).unwrap();
    let ks_tree = ks_distance(real_atoms(&tree), arcsine_cdf);
    shared.chebyshev_chain = Some(chain);
    Outcome {
        passed: max_im <= 1e-6 && out_of_range == 0 && ks_chain <= 0.02 && ks_tree <= 0.005,
        detail: format!(
            "max |Im z| = {max_im:.1e}, {out_of_range} points outside [-2, 2], KS chain {ks_chain:.4} (<= 0.02), KS depth-18 tree {ks_tree:.4} (<= 0.005)"
        ),
    }
}

fn annulus_viewport() -> Viewport {
    Viewport::new(Complex64::new(0.0, 0.0), 5.0, 5.0, 128, 128).unwrap()
}

/// Tree and chains of the full-vs-random comparison, binned.
fn annulus_grids() -> (GridMeasure, GridMeasure, WeightedPointCloud) {
    let sg = annulus();
    let a = SpherePoint::real(1.0);
    let tree = full_backward_tree(&sg, a, 8).unwrap();
    let chains = run_chains(&sg, a, 250_000, BURN_IN, &ANNULUS_SEEDS).unwrap();
    let vp = annulus_viewport();
    (bin(&tree, vp), bin(&chains.merged, vp), chains.merged)
}

fn c5_full_vs_random(shared: &mut Shared) -> Outcome {
    let (tree, chains, merged) = annulus_grids();
    let tv = total_variation(&tree, &chains).unwrap();
    shared.annulus_chain = Some(merged);
    Outcome {
        passed: tv <= 0.05,
        detail: format!("TV(depth-8 tree, 4x250k chains) = {tv:.4} (<= 0.05)"),
    }
}

fn c6_invariance(shared: &mut Shared) -> Outcome {
    let functions = TestFunction::default_set(DEFAULT_BUMP_CENTERS);
    let cases = [
        ("circle", circle(), shared.circle_chain.take()),
        ("chebyshev", chebyshev(), shared.chebyshev_chain.take()),
        ("annulus", annulus(), shared.annulus_chain.take()),
    ];
    let mut worst = 0.0f64;
    let mut parts = Vec::new();
    for (name, sg, chain) in cases {
        let Some(chain) = chain else {
            return Outcome {
                passed: false,
                detail: format!("{name} chain unavailable"),
            };
        };
        let rows = check_invariance(&sg, &chain, &functions).unwrap();
        let case_worst = rows.iter().map(|r| r.discrepancy).fold(0.0, f64::max);
        worst = worst.max(case_worst);
        parts.push(format!("{name} {case_worst:.1e}"));
    }
    Outcome {
        passed: worst <= 0.01,
        detail: format!(
            "max |<Tphi,mu> - <phi,mu>| over 5 test functions: {} (<= 0.01)",
            parts.join(", ")
        ),
    }
}

fn c7_distance_decay(_: &mut Shared) -> Outcome {
    let orbit = random_backward_orbit(&circle(), SpherePoint::real(3.0), 200, 7).unwrap();
    let profile = distance_decay_profile(&orbit, &OriginCircle { radius: 1.0 });
    // profile[m - 1] is the distance of z_m.
    let tail = profile[39..].iter().copied().fold(0.0, f64::max);
    let closed_form = 3f64.powf(0.5f64.powi(40)) - 1.0;
    Outcome {
        passed: tail <= 1e-6,
        detail: format!("max dist(z_m, |z|=1) for m >= 40: {tail:.1e} (<= 1e-6; |3^(2^-40) - 1| = {closed_form:.1e})"),
    }
}

fn c8_orbit_closure(_: &mut Shared) -> Outcome {
    let orbit = random_backward_orbit(&circle(), SpherePoint::real(1.0), 100_000, 8).unwrap();
    let samples = circle_samples(Complex64::new(0.0, 0.0), 1.0, 4096);
    let cover = directed_hausdorff(&samples, &orbit.points).unwrap();
    Outcome {
        passed: cover <= 0.05,
        detail: format!(
            "max over 4096 circle samples of distance to orbit = {cover:.2e} (<= 0.05)"
        ),
    }
}

fn c9_determinism(_: &mut Shared) -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let mut files = Vec::new();
    for run in 0..2 {
        let (tree, chains, _) = annulus_grids();
        let spec = ImageSpec::new(annulus_viewport());
        let grid_path = dir.path().join(format!("run{run}.grid"));
        let tree_path = dir.path().join(format!("run{run}-tree.grid"));
        let image_path = dir.path().join(format!("run{run}.ppm"));
        std::fs::write(&grid_path, chains.to_text()).unwrap();
        std::fs::write(&tree_path, tree.to_text()).unwrap();
        write_image(&render_density(&chains, &spec).unwrap(), &image_path).unwrap();
        files.push([grid_path, tree_path, image_path].map(|p| std::fs::read(p).unwrap()));
    }
    let identical = files[0] == files[1];
    Outcome {
        passed: identical,
        detail: format!(
            "grid exports and PPM byte-identical across runs: {identical} ({} + {} + {} bytes)",
            files[0][0].len(),
            files[0][1].len(),
            files[0][2].len()
        ),
    }
}

fn c10_markov(_: &mut Shared) -> Outcome {
    let sg = annulus();
    let orbit = random_backward_orbit(&sg, SpherePoint::real(1.0), 3_000_000, 10).unwrap();
    let vp = Viewport::new(Complex64::new(0.0, 0.0), 5.0, 5.0, 16, 16).unwrap();
    let target = vp.cell_index(SpherePoint::real(1.0)).unwrap();
    let mut counts = [0usize; 4];
    let mut inconsistent = 0;
    for m in BURN_IN..orbit.len() - 1 {
        let z = orbit.points[m];
        if vp.cell_index(z) != Some(target) {
            continue;
        }
        let i = orbit.symbols[m + 1];
        counts[i] += 1;
        if sg.branch_preimage(i, z).unwrap() != orbit.points[m + 1] {
            inconsistent += 1;
        }
    }
    let visits: usize = counts.iter().sum();
    let worst = counts
        .iter()
        .map(|&c| (c as f64 / visits as f64 - 0.25).abs())
        .fold(0.0, f64::max);
    Outcome {
        passed: visits >= 10_000 && worst <= 0.02 && inconsistent == 0,
        detail: format!(
            "{visits} visits (>= 10^4), branch counts {counts:?}, max |freq - 1/4| = {worst:.4} (<= 0.02), {inconsistent} next points off the preimage list"
        ),
    }
}

fn main() -> ExitCode {
    let criteria = [
        Criterion {
            id: "C1",
            name: "preimage correctness",
            budget: Duration::from_secs(5),
            run: c1_preimages,
        },
        Criterion {
            id: "C2",
            name: "branch distribution structure",
            budget: Duration::from_secs(1),
            run: c2_index_structure,
        },
        Criterion {
            id: "C3",
            name: "unit-circle oracle",
            budget: Duration::from_secs(30),
            run: c3_unit_circle,
        },
        Criterion {
            id: "C4",
            name: "arcsine oracle",
            budget: Duration::from_secs(30),
            run: c4_arcsine,
        },
        Criterion {
            id: "C5",
            name: "full vs random agreement",
            budget: Duration::from_secs(60),
            run: c5_full_vs_random,
        },
        Criterion {
            id: "C6",
            name: "adjoint invariance",
            budget: Duration::from_secs(30),
            run: c6_invariance,
        },
        Criterion {
            id: "C7",
            name: "distance decay",
            budget: Duration::from_secs(1),
            run: c7_distance_decay,
        },
        Criterion {
            id: "C8",
            name: "orbit closure covers J",
            budget: Duration::from_secs(10),
            run: c8_orbit_closure,
        },
        Criterion {
            id: "C9",
            name: "determinism",
            budget: Duration::from_secs(120),
            run: c9_determinism,
        },
        Criterion {
            id: "C10",
            name: "Markov transition check",
            budget: Duration::from_secs(60),
            run: c10_markov,
        },
    ];

    let mut shared = Shared::default();
    let mut failures = 0;
    for c in &criteria {
        let start = Instant::now();
        let outcome = (c.run)(&mut shared);
        let elapsed = start.elapsed();
        let in_time = elapsed <= c.budget;
        let passed = outcome.passed && in_time;
        if !passed {
            failures += 1;
        }
        println!(
            "[{}] {:<4} {:<30} {} | {:.2}s (budget {}s{})",
            if passed { "PASS" } else { "FAIL" },
            c.id,
            c.name,
            outcome.detail,
            elapsed.as_secs_f64(),
            c.budget.as_secs(),
            if in_time { "" } else { ", exceeded" }
        );
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failures,
        criteria.len()
    );
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
