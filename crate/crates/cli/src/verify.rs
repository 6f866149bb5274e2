//! Desk-scale verification of the configured semigroup: generic checks that
//! hold for every semigroup, plus known answers for the built-in examples.

use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use semijulia::measure::DEFAULT_BUMP_CENTERS;
use semijulia::{
    bin, check_invariance, chordal_distance, full_backward_tree, random_backward_orbit, run_chains,
    total_variation, ChainRun, Complex64, Semigroup, SpherePoint, TestFunction, Viewport,
    WeightedPointCloud,
};

use crate::config::RunConfig;
use crate::run::{backward_failure, header, runtime, write_text, TV_TOLERANCE};
use crate::Failure;

/// Largest tree built for the mass and comparison checks.
const TREE_ATOMS: usize = 1 << 16;
const RESIDUAL: f64 = 1e-9;
const INVARIANCE: f64 = 0.01;
const MIN_VISITS: usize = 10_000;

struct Check {
    name: &'static str,
    passed: bool,
    detail: String,
}

impl Check {
    fn new(name: &'static str, passed: bool, detail: String) -> Self {
        Self {
            name,
            passed,
            detail,
        }
    }
}

/// Runs every check, writes the report, and returns it together with
/// whether all checks passed.
pub fn verify(config: &RunConfig) -> Result<(String, bool), Failure> {
    let sg = config.semigroup()?;
    let a = config.start_point()?;
    let mut report = header(config, &sg, a)?;
    std::fs::create_dir_all(&config.out).map_err(runtime)?;

    let start = Instant::now();
    let chains =
        run_chains(&sg, a, config.n, config.burn_in, &config.seeds).map_err(backward_failure)?;
    let mut checks = vec![
        preimage_check(&sg, a)?,
        branch_distribution_check(&sg),
        tree_check(&sg, a)?,
        chain_consistency_check(&sg, &chains)?,
        determinism_check(&sg, a, config, &chains)?,
        invariance_check(&sg, &chains.merged)?,
        markov_check(&sg, config, &chains)?,
        comparison_check(&sg, a, config, &chains.merged)?,
    ];
    match config.example.as_deref() {
        Some("circle") => checks.extend(circle_checks(&chains)),
        Some("chebyshev") => checks.extend(chebyshev_checks(&chains)),
        Some("annulus") => checks.push(annulus_check(&chains)),
        _ => {}
    }

    writeln!(
        report,
        "verification ({} chains x {} steps, burn-in {}):",
        chains.orbits.len(),
        config.n,
        config.burn_in
    )
    .unwrap();
    let passed = checks.iter().all(|c| c.passed);
    for c in &checks {
        writeln!(
            report,
            "[{}] {}: {}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.detail
        )
        .unwrap();
    }
    writeln!(
        report,
        "{} of {} checks passed in {:.1}s",
        checks.iter().filter(|c| c.passed).count(),
        checks.len(),
        start.elapsed().as_secs_f64()
    )
    .unwrap();
    writeln!(report, "overall: {}", if passed { "PASS" } else { "FAIL" }).unwrap();
    write_text(&config.out.join("report.txt"), &report)?;
    Ok((report, passed))
}

fn preimage_check(sg: &Semigroup, a: SpherePoint) -> Result<Check, Failure> {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut targets = vec![a, SpherePoint::ZERO, SpherePoint::Infinity];
    targets.extend(
        (0..200).map(|_| SpherePoint::new(rng.gen_range(-4.0..4.0), rng.gen_range(-4.0..4.0))),
    );
    let mut worst = 0.0f64;
    let mut wrong_count = 0;
    for f in sg.generators() {
        for &z in &targets {
            let pre = f.preimages(z).map_err(runtime)?;
            if pre.len() != f.degree() {
                wrong_count += 1;
            }
            for w in pre {
                worst = worst.max(chordal_distance(f.evaluate(w), z));
            }
        }
    }
    Ok(Check::new(
        "preimages",
        worst <= RESIDUAL && wrong_count == 0,
        format!("{} targets per generator, worst chordal residual {worst:.2e} (<= {RESIDUAL:e}), {wrong_count} wrong counts", targets.len()),
    ))
}

fn branch_distribution_check(sg: &Semigroup) -> Check {
    let dist = sg.index_distribution();
    let sum: f64 = dist.probabilities().iter().sum();
    let mut block_ok = true;
    let mut index = 0;
    for (j, f) in sg.generators().iter().enumerate() {
        for branch in 0..f.degree() {
            let expected = sg.weights().weights()[j] / f.degree() as f64;
            let decoded = dist.decode(index);
            block_ok &= dist.probability(index) == expected
                && decoded.generator == j
                && decoded.branch == branch;
            index += 1;
        }
    }
    Check::new(
        "branch distribution",
        block_ok && (sum - 1.0).abs() <= 1e-12,
        format!(
            "{} branches, block structure {}, |sum - 1| = {:.1e}",
            dist.len(),
            if block_ok { "exact" } else { "violated" },
            (sum - 1.0).abs()
        ),
    )
}

fn tree_depth(sg: &Semigroup) -> usize {
    let d = sg.total_degree();
    let mut depth = 1;
    while d.pow(depth as u32 + 1) <= TREE_ATOMS {
        depth += 1;
    }
    depth
}

/// Mass conservation and forward consistency of the deepest affordable tree.
fn tree_check(sg: &Semigroup, a: SpherePoint) -> Result<Check, Failure> {
    let depth = tree_depth(sg);
    let parents = full_backward_tree(sg, a, depth - 1).map_err(backward_failure)?;
    let tree = full_backward_tree(sg, a, depth).map_err(backward_failure)?;
    let d = sg.total_degree();
    let dist = sg.index_distribution();
    let mut worst = 0.0f64;
    for (i, &w) in tree.points().iter().enumerate() {
        let f = &sg.generators()[dist.decode(i % d).generator];
        worst = worst.max(chordal_distance(f.evaluate(w), parents.points()[i / d]));
    }
    let mass_error = (tree.total_mass() - 1.0).abs();
    Ok(Check::new(
        "full tree",
        mass_error <= 1e-9 && worst <= RESIDUAL,
        format!("depth {depth}, {} atoms, |mass - 1| = {mass_error:.1e}, worst forward residual {worst:.2e}", tree.len()),
    ))
}

fn chain_consistency_check(sg: &Semigroup, chains: &ChainRun) -> Result<Check, Failure> {
    let dist = sg.index_distribution();
    let mut worst = 0.0f64;
    for orbit in &chains.orbits {
        for (m, (&z, &i)) in orbit.points.iter().zip(&orbit.symbols).enumerate() {
            let f = &sg.generators()[dist.decode(i).generator];
            worst = worst.max(chordal_distance(f.evaluate(z), orbit.parent(m)));
        }
    }
    Ok(Check::new(
        "chain forward consistency",
        worst <= RESIDUAL,
        format!("worst chordal residual {worst:.2e} (<= {RESIDUAL:e})"),
    ))
}

fn determinism_check(
    sg: &Semigroup,
    a: SpherePoint,
    config: &RunConfig,
    chains: &ChainRun,
) -> Result<Check, Failure> {
    let first = &chains.orbits[0];
    let again = random_backward_orbit(sg, a, config.n, first.seed).map_err(backward_failure)?;
    let same = &again == first;
    Ok(Check::new(
        "determinism",
        same,
        format!(
            "chain with seed {} reproduced {}",
            first.seed,
            if same {
                "bit for bit"
            } else {
                "with differences"
            }
        ),
    ))
}

fn invariance_check(sg: &Semigroup, cloud: &WeightedPointCloud) -> Result<Check, Failure> {
    let rows = check_invariance(sg, cloud, &TestFunction::default_set(DEFAULT_BUMP_CENTERS))
        .map_err(runtime)?;
    let worst = rows.iter().map(|r| r.discrepancy).fold(0.0, f64::max);
    let parts: Vec<String> = rows
        .iter()
        .map(|r| format!("{} {:.1e}", r.function.name(), r.discrepancy))
        .collect();
    Ok(Check::new(
        "adjoint invariance",
        worst <= INVARIANCE,
        format!("{} (each <= {INVARIANCE})", parts.join(", ")),
    ))
}

/// Next-branch frequencies from the most visited cell of a 16x16 grid over
/// the viewport must match the branch distribution, and each next point must
/// be the corresponding preimage of the current one.
fn markov_check(sg: &Semigroup, config: &RunConfig, chains: &ChainRun) -> Result<Check, Failure> {
    let v = &config.viewport;
    let coarse = Viewport::new(
        Complex64::new(v.center[0], v.center[1]),
        v.width,
        v.height,
        16,
        16,
    )
    .map_err(runtime)?;
    let mut visits_per_cell = vec![0usize; coarse.cell_count()];
    for orbit in &chains.orbits {
        for p in &orbit.points[chains.burn_in..orbit.len() - 1] {
            if let Some(c) = coarse.cell_index(*p) {
                visits_per_cell[c] += 1;
            }
        }
    }
    let Some(cell) =
        (0..visits_per_cell.len()).max_by_key(|&c| (visits_per_cell[c], std::cmp::Reverse(c)))
    else {
        unreachable!("grid has cells");
    };
    let pi = sg.index_distribution().probabilities();
    let mut counts = vec![0usize; pi.len()];
    let mut off_list = 0;
    for orbit in &chains.orbits {
        for m in chains.burn_in..orbit.len() - 1 {
            let z = orbit.points[m];
            if coarse.cell_index(z) != Some(cell) {
                continue;
            }
            let i = orbit.symbols[m + 1];
            counts[i] += 1;
            if sg.branch_preimage(i, z).map_err(runtime)? != orbit.points[m + 1] {
                off_list += 1;
            }
        }
    }
    let visits: usize = counts.iter().sum();
    let mut worst_ratio = 0.0f64;
    for (&c, &p) in counts.iter().zip(pi) {
        let tolerance = 5.0 * (p / visits.max(1) as f64).sqrt();
        worst_ratio = worst_ratio.max((c as f64 / visits.max(1) as f64 - p).abs() / tolerance);
    }
    let center = coarse.cell_center(cell % 16, cell / 16);
    Ok(Check::new(
        "Markov transitions",
        visits >= MIN_VISITS && worst_ratio <= 1.0 && off_list == 0,
        format!(
            "{visits} visits to the cell at {:.3}{:+.3}i (>= {MIN_VISITS}), worst |freq - pi| at {:.2} of 5 sqrt(pi/visits), {off_list} next points off the preimage list",
            center.re, center.im, worst_ratio
        ),
    ))
}

/// TV between the deepest affordable tree and the merged chains on a
/// 128x128 grid over the viewport.
fn comparison_check(
    sg: &Semigroup,
    a: SpherePoint,
    config: &RunConfig,
    merged: &WeightedPointCloud,
) -> Result<Check, Failure> {
    let v = &config.viewport;
    let grid = Viewport::new(
        Complex64::new(v.center[0], v.center[1]),
        v.width,
        v.height,
        128,
        128,
    )
    .map_err(runtime)?;
    let depth = tree_depth(sg);
    let tree = full_backward_tree(sg, a, depth).map_err(backward_failure)?;
    let tv = total_variation(&bin(&tree, grid), &bin(merged, grid)).map_err(runtime)?;
    Ok(Check::new(
        "full vs random",
        tv <= TV_TOLERANCE,
        format!("TV(depth-{depth} tree, chains) on a 128x128 grid = {tv:.4} (<= {TV_TOLERANCE})"),
    ))
}

fn tail_points(chains: &ChainRun) -> impl Iterator<Item = Complex64> + '_ {
    chains.orbits.iter().flat_map(move |o| {
        o.points[chains.burn_in..]
            .iter()
            .map(|p| p.as_finite().unwrap_or(Complex64::new(f64::INFINITY, 0.0)))
    })
}

fn circle_checks(chains: &ChainRun) -> Vec<Check> {
    let off = chains
        .orbits
        .iter()
        .flat_map(|o| o.points.iter())
        .map(|p| (p.modulus() - 1.0).abs())
        .fold(0.0, f64::max);
    let mut hist = [0.0; 36];
    for (p, m) in chains.merged.iter() {
        let theta = p.as_finite().map_or(0.0, |z| z.arg().rem_euclid(TAU));
        hist[((theta / TAU * 36.0) as usize).min(35)] += m;
    }
    let dev = hist
        .iter()
        .map(|h| (h - 1.0 / 36.0).abs())
        .fold(0.0, f64::max);
    vec![
        Check::new(
            "orbit on the unit circle",
            off <= 1e-9,
            format!("max ||z| - 1| = {off:.1e} (<= 1e-9)"),
        ),
        Check::new(
            "uniform angles",
            dev <= 0.005,
            format!("36-bin max deviation from 1/36 = {dev:.2e} (<= 0.005)"),
        ),
    ]
}

fn chebyshev_checks(chains: &ChainRun) -> Vec<Check> {
    let mut max_im = 0.0f64;
    let mut outside = 0;
    let mut xs: Vec<f64> = Vec::new();
    for z in tail_points(chains) {
        max_im = max_im.max(z.im.abs());
        if z.re.is_nan() || z.re.abs() > 2.0 + 1e-6 {
            outside += 1;
        }
        xs.push(z.re);
    }
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let cdf = |x: f64| 0.5 + (x / 2.0).clamp(-1.0, 1.0).asin() / PI;
    let ks = xs
        .iter()
        .enumerate()
        .map(|(k, &x)| {
            (cdf(x) - k as f64 / n)
                .abs()
                .max((((k + 1) as f64) / n - cdf(x)).abs())
        })
        .fold(0.0, f64::max);
    vec![
        Check::new(
            "orbit in [-2, 2]",
            max_im <= 1e-6 && outside == 0,
            format!("max |Im z| = {max_im:.1e}, {outside} points with |Re z| > 2"),
        ),
        Check::new(
            "arcsine law",
            ks <= 0.02,
            format!("Kolmogorov-Smirnov distance {ks:.4} (<= 0.02)"),
        ),
    ]
}

fn annulus_check(chains: &ChainRun) -> Check {
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for z in tail_points(chains) {
        lo = lo.min(z.norm());
        hi = hi.max(z.norm());
    }
    Check::new(
        "orbit in 1 <= |z| <= 4",
        lo >= 1.0 - 1e-9 && hi <= 4.0 + 1e-9,
        format!("moduli in [{lo:.6}, {hi:.6}]"),
    )
}
