//! The `random`, `full` and `compare` methods.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use rayon::prelude::*;

use semijulia::measure::DEFAULT_BUMP_CENTERS;
use semijulia::render::ImageSpec;
use semijulia::{
    bin, check_invariance, for_each_tree_atom, full_backward_tree, full_backward_tree_with_cap,
    render_density, run_chains, support_hausdorff, total_variation, validate_assumptions,
    write_image, BackwardError, GridMeasure, Semigroup, SpherePoint, TestFunction,
    WeightedPointCloud,
};

use crate::config::{Method, RunConfig};
use crate::Failure;

/// Trees up to `max_atoms` atoms are materialized; past that they are
/// streamed into the grid, up to this many times `max_atoms`.
pub const STREAM_FACTOR: usize = 64;

/// Number of contiguous subtrees binned independently when streaming.
/// Fixed, so the result does not depend on the thread count.
const STREAM_CHUNKS: usize = 16;

/// Reference tolerance printed next to the full-vs-random TV.
pub const TV_TOLERANCE: f64 = 0.05;

pub fn header(config: &RunConfig, sg: &Semigroup, a: SpherePoint) -> Result<String, Failure> {
    let validation = validate_assumptions(sg, a).map_err(Failure::config("a"))?;
    let mut out = String::new();
    writeln!(out, "semijulia report").unwrap();
    writeln!(out, "method: {}", method_name(config.method)).unwrap();
    write!(out, "effective config:\n{}", config.to_json_lines()).unwrap();
    writeln!(out, "generators:").unwrap();
    for (j, f) in sg.generators().iter().enumerate() {
        writeln!(
            out,
            "  f{} = {}  (degree {}, weight {})",
            j + 1,
            f,
            f.degree(),
            sg.weights().weights()[j]
        )
        .unwrap();
    }
    writeln!(out, "assumptions:").unwrap();
    for line in validation.to_string().lines() {
        writeln!(out, "  {line}").unwrap();
    }
    Ok(out)
}

fn method_name(m: Method) -> &'static str {
    match m {
        Method::Random => "random",
        Method::Full => "full",
        Method::Compare => "compare",
        Method::Verify => "verify",
    }
}

pub fn run(config: &RunConfig) -> Result<String, Failure> {
    let sg = config.semigroup()?;
    let a = config.start_point()?;
    let spec = config.image_spec()?;
    let mut report = header(config, &sg, a)?;
    fs::create_dir_all(&config.out)
        .with_context(|| format!("creating {}", config.out.display()))
        .map_err(Failure::Runtime)?;

    let random = matches!(config.method, Method::Random | Method::Compare);
    let full = matches!(config.method, Method::Full | Method::Compare);

    let random_grid = if random {
        Some(random_section(config, &sg, a, &spec, &mut report)?)
    } else {
        None
    };
    let full_grid = if full {
        Some(full_section(config, &sg, a, &spec, &mut report)?)
    } else {
        None
    };

    if let (Some(r), Some(f)) = (&random_grid, &full_grid) {
        let tv = total_variation(f, r).map_err(runtime)?;
        writeln!(report, "comparison:").unwrap();
        writeln!(
            report,
            "  total variation (full vs random): {tv:.6} (reference tolerance {TV_TOLERANCE}: {})",
            if tv <= TV_TOLERANCE {
                "within"
            } else {
                "exceeded"
            }
        )
        .unwrap();
        match support_hausdorff(f, r) {
            Ok(h) => writeln!(
                report,
                "  chordal Hausdorff distance between grid supports: {h:.6}"
            )
            .unwrap(),
            Err(e) => writeln!(
                report,
                "  chordal Hausdorff distance between grid supports: n/a ({e})"
            )
            .unwrap(),
        }
        let cell = config.viewport.width / config.viewport.nx as f64;
        writeln!(report, "  (supports are cell centers; cell width {cell})").unwrap();
    }

    write_text(&config.out.join("report.txt"), &report)?;
    Ok(report)
}

fn random_section(
    config: &RunConfig,
    sg: &Semigroup,
    a: SpherePoint,
    spec: &ImageSpec,
    report: &mut String,
) -> Result<GridMeasure, Failure> {
    let chains =
        run_chains(sg, a, config.n, config.burn_in, &config.seeds).map_err(backward_failure)?;
    let grid = bin(&chains.merged, spec.viewport);
    writeln!(report, "random backward iteration:").unwrap();
    writeln!(
        report,
        "  {} chains x {} steps, burn-in {}, seeds {:?}",
        chains.orbits.len(),
        config.n,
        chains.burn_in,
        config.seeds
    )
    .unwrap();
    writeln!(report, "  atoms after burn-in: {}", chains.merged.len()).unwrap();
    writeln!(report, "  mass outside viewport: {}", grid.outside_mass()).unwrap();
    invariance_table(sg, &chains.merged, report)?;
    write_outputs(config, "random", &grid, spec)?;
    Ok(grid)
}

fn full_section(
    config: &RunConfig,
    sg: &Semigroup,
    a: SpherePoint,
    spec: &ImageSpec,
    report: &mut String,
) -> Result<GridMeasure, Failure> {
    let d = sg.total_degree();
    writeln!(report, "full backward iteration:").unwrap();
    let grid = match full_backward_tree_with_cap(sg, a, config.depth, config.max_atoms) {
        Ok(tree) => {
            writeln!(
                report,
                "  depth {}, {} atoms (materialized)",
                config.depth,
                tree.len()
            )
            .unwrap();
            let grid = bin(&tree, spec.viewport);
            writeln!(report, "  mass outside viewport: {}", grid.outside_mass()).unwrap();
            invariance_table(sg, &tree, report)?;
            grid
        }
        Err(BackwardError::BudgetExceeded { .. }) => {
            let limit = config.max_atoms.saturating_mul(STREAM_FACTOR);
            if d.checked_pow(config.depth as u32)
                .is_none_or(|atoms| atoms > limit)
            {
                return Err(backward_failure(BackwardError::BudgetExceeded {
                    branches: d,
                    depth: config.depth,
                    cap: limit,
                }));
            }
            let grid = streamed_grid(sg, a, config.depth, spec)?;
            writeln!(
                report,
                "  depth {}, {} atoms (streamed into the grid; invariance table skipped)",
                config.depth,
                d.pow(config.depth as u32)
            )
            .unwrap();
            writeln!(report, "  mass outside viewport: {}", grid.outside_mass()).unwrap();
            grid
        }
        Err(e) => return Err(backward_failure(e)),
    };
    write_outputs(config, "full", &grid, spec)?;
    Ok(grid)
}

/// Bins a tree too large to hold in memory. The top levels are materialized
/// and split into contiguous chunks, each chunk is binned on its own, and
/// the chunk grids are added in order.
fn streamed_grid(
    sg: &Semigroup,
    a: SpherePoint,
    depth: usize,
    spec: &ImageSpec,
) -> Result<GridMeasure, Failure> {
    let d = sg.total_degree();
    let mut top_depth = 0;
    while top_depth < depth && d.pow(top_depth as u32) < STREAM_CHUNKS {
        top_depth += 1;
    }
    let top = full_backward_tree(sg, a, top_depth).map_err(backward_failure)?;
    let atoms: Vec<(SpherePoint, f64)> = top.iter().collect();
    let chunk = atoms.len().div_ceil(STREAM_CHUNKS);
    let vp = spec.viewport;
    let grids: Vec<GridMeasure> = atoms
        .par_chunks(chunk)
        .map(|part| {
            let mut grid = GridMeasure::empty(vp);
            for &(z, mass) in part {
                for_each_tree_atom(sg, z, depth - top_depth, |w, m| grid.add(w, mass * m))?;
            }
            Ok(grid)
        })
        .collect::<Result<_, BackwardError>>()
        .map_err(backward_failure)?;
    let mut cells = vec![0.0; vp.cell_count()];
    let mut outside = 0.0;
    for g in &grids {
        for (c, v) in cells.iter_mut().zip(g.cells()) {
            *c += v;
        }
        outside += g.outside_mass();
    }
    GridMeasure::from_cells(vp, cells, outside).map_err(runtime)
}

fn invariance_table(
    sg: &Semigroup,
    cloud: &WeightedPointCloud,
    report: &mut String,
) -> Result<(), Failure> {
    let functions = TestFunction::default_set(DEFAULT_BUMP_CENTERS);
    let rows = check_invariance(sg, cloud, &functions).map_err(runtime)?;
    writeln!(report, "  invariance check |<T phi, mu> - <phi, mu>|:").unwrap();
    for row in rows {
        writeln!(
            report,
            "    {:<28} <phi,mu> = {:>12.6}  <T phi,mu> = {:>12.6}  discrepancy = {:.3e}",
            row.function.name(),
            row.integral,
            row.transferred,
            row.discrepancy
        )
        .unwrap();
    }
    Ok(())
}

fn write_outputs(
    config: &RunConfig,
    stem: &str,
    grid: &GridMeasure,
    spec: &ImageSpec,
) -> Result<(), Failure> {
    write_text(&config.out.join(format!("{stem}.grid")), &grid.to_text())?;
    let image = render_density(grid, spec).map_err(runtime)?;
    write_image(&image, &config.out.join(format!("{stem}.ppm"))).map_err(runtime)
}

pub fn write_text(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text)
        .with_context(|| format!("writing {}", path.display()))
        .map_err(Failure::Runtime)
}

pub fn runtime(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Runtime(e.into())
}

pub fn backward_failure(e: BackwardError) -> Failure {
    match e {
        BackwardError::BudgetExceeded { .. } => {
            Failure::Config(crate::config::ConfigError::new("depth", e))
        }
        BackwardError::DuplicateSeed(_) => {
            Failure::Config(crate::config::ConfigError::new("seeds", e))
        }
        BackwardError::EmptyTail { .. } => {
            Failure::Config(crate::config::ConfigError::new("burn_in", e))
        }
        other => runtime(other),
    }
}
