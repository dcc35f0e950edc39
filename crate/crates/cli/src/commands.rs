use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use expfun::density_solver::{build_grid, residual, solve_with, SolverOptions, StepDensity};
use expfun::levy_model::{
    dual_sn, positive_moments, positive_moments_by_quadrature, rho_tilt, FractionalMoments,
    SubordinatorSpec,
};
use expfun::mc_oracle::{
    ks_against_density, monotone_histogram_check, simulate, Direction, SimulationOptions,
};
use expfun::reference_laws::{dual_transform, Density, ReferenceLaw, RenewalDensity};
use expfun::validation::{
    compare_to_reference, dual_large_x_check, moment_agreement, q_positive_limit_check,
    renewal_check, small_x_ratio_check, summary_table, Norm, ValidationReport,
};
use expfun::Error;

use crate::config::{Command, RunConfig};
use crate::failure::Failure;
use crate::plot::{Plot, Series};

/// Orders compared by `validate`, and the relative tolerance.
const MOMENT_ORDERS: usize = 5;
const MOMENT_TOLERANCE: f64 = 5e-3;
/// Points kept from the sample ECDF in `cdf.svg`.
const ECDF_POINTS: usize = 400;

type Outcome = Result<(), Failure>;

pub fn run(cfg: &RunConfig) -> Outcome {
    fs::create_dir_all(&cfg.out)?;
    match cfg.command {
        Command::Solve => cmd_solve(cfg),
        Command::Validate => cmd_validate(cfg),
        Command::Moments { order } => cmd_moments(cfg, order),
        Command::Transform { rho: Some(rho), .. } => cmd_tilt(cfg, rho),
        Command::Transform { .. } => cmd_dual(cfg),
        Command::Mc { increasing: false } => cmd_mc(cfg),
        Command::Mc { increasing: true } => cmd_histogram(cfg),
    }
}

fn write(dir: &Path, name: &str, contents: impl AsRef<[u8]>) -> Outcome {
    fs::write(dir.join(name), contents)?;
    Ok(())
}

fn solve_model(cfg: &RunConfig, spec: &SubordinatorSpec) -> Result<StepDensity, Failure> {
    let grid = build_grid(spec, cfg.delta, cfg.cells, cfg.xmax)?;
    let opts = SolverOptions::with_scheme(&cfg.scheme)?;
    Ok(solve_with(spec, &grid, &opts)?)
}

/// Cells that carry the solution: zeroed top cells dropped.
fn live_cells(k: &StepDensity) -> std::ops::Range<usize> {
    0..k.grid().cells() - k.zeroed_top_cells()
}

fn solver_points(k: &StepDensity) -> Vec<(f64, f64)> {
    live_cells(k)
        .map(|n| (k.grid().midpoint(n), k.heights()[n]))
        .collect()
}

fn law_points(k: &StepDensity, law: &dyn Density) -> Vec<(f64, f64)> {
    live_cells(k)
        .filter_map(|n| {
            let x = k.grid().midpoint(n);
            law.density(x).ok().map(|y| (x, y))
        })
        .collect()
}

fn solve_summary(
    spec: &SubordinatorSpec,
    k: &StepDensity,
    law: Option<&ReferenceLaw>,
) -> Result<String, Failure> {
    let res = residual(spec, k)?;
    let grid = k.grid();
    let mut s = String::new();
    let model = serde_json::to_string(&spec.to_file()).map_err(Error::from)?;
    let _ = writeln!(s, "model          {model}");
    let _ = writeln!(s, "scheme         {}", k.scheme());
    let _ = writeln!(s, "delta          {}", grid.ratio());
    let _ = writeln!(s, "cells          {}", grid.cells());
    let _ = writeln!(s, "x_max          {:.11e}", grid.x_max());
    let _ = writeln!(s, "x_min          {:.11e}", grid.node(0));
    let _ = writeln!(s, "residual_max   {:.6e}", res.max);
    let _ = writeln!(s, "residual_at    {:.6e}", res.argmax);
    let _ = writeln!(s, "covered_mass   {:.12}", k.covered_mass());
    let _ = writeln!(s, "left_gap_bound {:.6e}", k.left_gap_mass_bound());
    let _ = writeln!(s, "upper_tail     {:.6e}", k.upper_tail_bound());
    let _ = writeln!(s, "zeroed_cells   {}", k.zeroed_top_cells());
    let _ = writeln!(s, "reference_law  {}", law.map_or("none", |l| l.name()));
    Ok(s)
}

fn density_plot(title: &str, k: &StepDensity, law: Option<&ReferenceLaw>) -> Plot {
    let mut series = vec![Series::new("solver", solver_points(k))];
    if let Some(law) = law.filter(|l| l.has_density()) {
        series.push(Series::new(law.name(), law_points(k, law)));
    }
    Plot {
        title: title.into(),
        x_label: "x".into(),
        y_label: "density".into(),
        series,
        ..Plot::default()
    }
}

fn cmd_solve(cfg: &RunConfig) -> Outcome {
    let k = solve_model(cfg, &cfg.spec)?;
    let law = ReferenceLaw::matching(&cfg.spec);
    k.save_csv(cfg.out.join("density.csv"))?;
    let summary = solve_summary(&cfg.spec, &k, law.as_ref())?;
    write(&cfg.out, "summary.txt", &summary)?;
    if cfg.plot {
        write(
            &cfg.out,
            "density.svg",
            density_plot("density", &k, law.as_ref()).render(),
        )?;
    }
    print!("{summary}");
    Ok(())
}

/// Keeps a check's report, or notes why it does not apply.
fn attempt(
    name: &str,
    result: expfun::Result<ValidationReport>,
    reports: &mut Vec<ValidationReport>,
    skipped: &mut Vec<String>,
) -> Outcome {
    match result {
        Ok(r) => reports.push(r),
        Err(Error::Domain(why)) => skipped.push(format!("{name}: not applicable ({why})")),
        Err(e) => return Err(e.into()),
    }
    Ok(())
}

/// `k(x) / Π̄(log 1/x)` over cells left of 1 where the tail is positive.
fn ratio_rows(
    spec: &SubordinatorSpec,
    k: &StepDensity,
    law: Option<&ReferenceLaw>,
) -> Vec<(f64, f64, Option<f64>)> {
    live_cells(k)
        .filter_map(|n| {
            let x = k.grid().midpoint(n);
            if x >= 1.0 {
                return None;
            }
            let tail = spec
                .tail((1.0 / x).ln())
                .ok()
                .filter(|t| *t > 0.0 && t.is_finite())?;
            let exact = law
                .filter(|l| l.has_density())
                .and_then(|l| Density::density(l, x).ok())
                .map(|y| y / tail);
            Some((x, k.heights()[n] / tail, exact))
        })
        .collect()
}

fn cmd_validate(cfg: &RunConfig) -> Outcome {
    let spec = &cfg.spec;
    let k = solve_model(cfg, spec)?;
    k.save_csv(cfg.out.join("density.csv"))?;
    let law = ReferenceLaw::matching(spec);
    let seed: &dyn FractionalMoments = match &law {
        Some(l) => l,
        None => &k,
    };
    let mut reports = Vec::new();
    let mut skipped = Vec::new();

    if spec.kill() > 0.0 {
        attempt(
            "killed_limit",
            q_positive_limit_check(spec, &k),
            &mut reports,
            &mut skipped,
        )?;
    } else {
        attempt(
            "small_x_ratio",
            small_x_ratio_check(spec, &k, Some(seed)),
            &mut reports,
            &mut skipped,
        )?;
        attempt(
            "dual_large_x",
            dual_large_x_check(spec, &k, Some(seed)),
            &mut reports,
            &mut skipped,
        )?;
    }
    let oracle = positive_moments_by_quadrature(spec, MOMENT_ORDERS)?;
    attempt(
        "moment_agreement",
        moment_agreement(&k, &oracle, MOMENT_TOLERANCE),
        &mut reports,
        &mut skipped,
    )?;
    match law.as_ref().filter(|l| l.has_density()) {
        Some(l) => {
            attempt(
                "reference_sup",
                compare_to_reference(&k, l, Norm::Sup),
                &mut reports,
                &mut skipped,
            )?;
            attempt(
                "reference_l1",
                compare_to_reference(&k, l, Norm::L1),
                &mut reports,
                &mut skipped,
            )?;
        }
        None => skipped.push("reference: no closed-form density for this model".into()),
    }
    match RenewalDensity::matching(spec) {
        Some(u) => attempt(
            "renewal",
            renewal_check(&k, &u, cfg.probes),
            &mut reports,
            &mut skipped,
        )?,
        None => skipped.push("renewal: no explicit renewal density for this model".into()),
    }

    let mut csv = String::from("check,x,measured,oracle\n");
    for r in &reports {
        let mut buf = Vec::new();
        r.write_csv(&mut buf)?;
        let text = String::from_utf8(buf).expect("csv is ascii");
        csv.extend(text.lines().skip(1).flat_map(|l| [l, "\n"]));
    }
    write(&cfg.out, "validation.csv", csv)?;
    let mut text = summary_table(&reports);
    for s in &skipped {
        let _ = writeln!(text, "skipped: {s}");
    }
    write(&cfg.out, "validation.txt", &text)?;
    let json = serde_json::to_string_pretty(&reports).map_err(Error::from)?;
    write(&cfg.out, "validation.json", json + "\n")?;

    let ratios = ratio_rows(spec, &k, law.as_ref());
    if !ratios.is_empty() {
        let mut csv = String::from("x,solver,exact\n");
        for (x, r, e) in &ratios {
            let _ = writeln!(
                csv,
                "{x:.11e},{r:.11e},{}",
                e.map_or(String::new(), |v| format!("{v:.11e}"))
            );
        }
        write(&cfg.out, "ratio.csv", csv)?;
    }
    let difference: Vec<(f64, f64)> = match law.as_ref().filter(|l| l.has_density()) {
        Some(l) => {
            let mut cells = live_cells(&k);
            if l.support().1.is_finite() {
                cells.end = cells
                    .end
                    .min(k.grid().cells() - k.grid().cells().div_ceil(100));
            }
            cells
                .filter_map(|n| {
                    let x = k.grid().midpoint(n);
                    Density::density(l, x).ok().map(|y| (x, k.heights()[n] - y))
                })
                .collect()
        }
        None => Vec::new(),
    };
    if !difference.is_empty() {
        let mut csv = String::from("x,difference\n");
        for (x, d) in &difference {
            let _ = writeln!(csv, "{x:.11e},{d:.11e}");
        }
        write(&cfg.out, "difference.csv", csv)?;
    }

    if cfg.plot {
        if !ratios.is_empty() {
            let mut series = vec![Series::new(
                "solver",
                ratios.iter().map(|r| (r.0, r.1)).collect(),
            )];
            let exact: Vec<(f64, f64)> = ratios
                .iter()
                .filter_map(|r| r.2.map(|e| (r.0, e)))
                .collect();
            if !exact.is_empty() {
                series.push(Series::new("exact", exact));
            }
            if let Some(r) = reports.iter().find(|r| r.check == "small_x_ratio") {
                let (lo, hi) = (ratios[0].0, ratios[ratios.len() - 1].0);
                series.push(Series::new("limit", vec![(lo, r.oracle), (hi, r.oracle)]));
            }
            let plot = Plot {
                title: "k(x) / tail(log 1/x)".into(),
                x_label: "x".into(),
                y_label: "ratio".into(),
                log_x: true,
                series,
                ..Plot::default()
            };
            write(&cfg.out, "ratio.svg", plot.render())?;
        }
        if !difference.is_empty() {
            let plot = Plot {
                title: "solver minus exact".into(),
                x_label: "x".into(),
                y_label: "difference".into(),
                series: vec![Series::new("difference", difference)],
                ..Plot::default()
            };
            write(&cfg.out, "difference.svg", plot.render())?;
        }
        write(
            &cfg.out,
            "density.svg",
            density_plot("density", &k, law.as_ref()).render(),
        )?;
    }

    print!("{text}");
    let failed: Vec<&str> = reports
        .iter()
        .filter(|r| !r.passed)
        .map(|r| r.check.as_str())
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Validation(format!(
            "failed checks: {}",
            failed.join(", ")
        )))
    }
}

fn cmd_moments(cfg: &RunConfig, order: usize) -> Outcome {
    let k = solve_model(cfg, &cfg.spec)?;
    let exact = positive_moments(&cfg.spec, order)?.values();
    let quad = positive_moments_by_quadrature(&cfg.spec, order)?.values();
    let mut csv = String::from("n,recursion,recursion_quadrature,solver,relative_difference\n");
    let mut table = format!(
        "{:>3} {:>19} {:>19} {:>19} {:>12}\n",
        "n", "recursion", "recursion(quad)", "solver", "rel diff"
    );
    for n in 1..=order {
        let solver = k.moment_of(n as f64)?;
        let rel = solver / quad[n] - 1.0;
        let _ = writeln!(
            csv,
            "{n},{:.11e},{:.11e},{solver:.11e},{rel:.3e}",
            exact[n], quad[n]
        );
        let _ = writeln!(
            table,
            "{n:>3} {:>19.12e} {:>19.12e} {solver:>19.12e} {rel:>12.3e}",
            exact[n], quad[n]
        );
    }
    write(&cfg.out, "moments.csv", csv)?;
    print!("{table}");
    Ok(())
}

fn cmd_tilt(cfg: &RunConfig, rho: f64) -> Outcome {
    let tilted = rho_tilt(&cfg.spec, rho)?;
    tilted.save(cfg.out.join("model.json"))?;
    let k = solve_model(cfg, &tilted)?;
    let law = ReferenceLaw::matching(&tilted);
    k.save_csv(cfg.out.join("density.csv"))?;
    let summary = solve_summary(&tilted, &k, law.as_ref())?;
    write(&cfg.out, "summary.txt", &summary)?;
    if cfg.plot {
        let title = format!("tilted density, rho = {rho}");
        write(
            &cfg.out,
            "density.svg",
            density_plot(&title, &k, law.as_ref()).render(),
        )?;
    }
    print!("{summary}");
    Ok(())
}

fn cmd_dual(cfg: &RunConfig) -> Outcome {
    let q_star = dual_sn(&cfg.spec)?.q_star();
    let k = solve_model(cfg, &cfg.spec)?;
    // reflect the grid: x = 1/x̂, ascending
    let points: Vec<(f64, f64)> = live_cells(&k)
        .rev()
        .map(|n| {
            let x_hat = k.grid().midpoint(n);
            (1.0 / x_hat, q_star * x_hat * k.heights()[n])
        })
        .collect();
    let mut csv = String::from("x,k\n");
    for (x, y) in &points {
        let _ = writeln!(csv, "{x:.11e},{y:.11e}");
    }
    write(&cfg.out, "dual_density.csv", csv)?;
    let exact = match ReferenceLaw::matching(&cfg.spec) {
        Some(ReferenceLaw::Example2 { a, s, beta }) => {
            Some(ReferenceLaw::example2_dual(a, s, beta)?)
        }
        _ => None,
    };
    let summary = format!(
        "q_star         {q_star:.12e}\nreference_law  {}\n{}",
        exact.as_ref().map_or("none", |l| l.name()),
        solve_summary(&cfg.spec, &k, None)?
            .lines()
            .filter(|l| !l.starts_with("reference_law"))
            .fold(String::new(), |acc, l| acc + l + "\n")
    );
    write(&cfg.out, "summary.txt", &summary)?;
    if cfg.plot {
        let mut series = vec![Series::new("dual of solver", points.clone())];
        if let Some(law) = &exact {
            let dual = dual_transform(k.clone(), q_star)?;
            let pts = points
                .iter()
                .filter(|p| dual.density(p.0).is_ok())
                .filter_map(|p| Density::density(law, p.0).ok().map(|y| (p.0, y)))
                .collect();
            series.push(Series::new(law.name(), pts));
        }
        let plot = Plot {
            title: "dual density".into(),
            x_label: "x".into(),
            y_label: "density".into(),
            log_x: true,
            series,
            ..Plot::default()
        };
        write(&cfg.out, "dual_density.svg", plot.render())?;
    }
    print!("{summary}");
    Ok(())
}

fn simulation_options(cfg: &RunConfig) -> SimulationOptions {
    let opts = SimulationOptions::new(cfg.mc_samples, cfg.seed);
    match cfg.cutoff {
        Some(eps) => opts.cutoff(eps),
        None => opts,
    }
}

fn finish_reports(cfg: &RunConfig, reports: &[ValidationReport], extra: &str) -> Outcome {
    let mut text = summary_table(reports);
    text.push_str(extra);
    write(&cfg.out, "mc.txt", &text)?;
    let json = serde_json::to_string_pretty(reports).map_err(Error::from)?;
    write(&cfg.out, "mc.json", json + "\n")?;
    print!("{text}");
    let failed: Vec<&str> = reports
        .iter()
        .filter(|r| !r.passed)
        .map(|r| r.check.as_str())
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Validation(format!(
            "failed checks: {}",
            failed.join(", ")
        )))
    }
}

fn cmd_mc(cfg: &RunConfig) -> Outcome {
    let samples = simulate(&cfg.spec, &simulation_options(cfg))?;
    samples.save_csv(cfg.out.join("samples.csv"))?;
    let k = solve_model(cfg, &cfg.spec)?;
    let ks = ks_against_density(&samples, &k)?;
    ks.save_csv(cfg.out.join("ks.csv"))?;

    let exact = positive_moments(&cfg.spec, 2)?.values();
    let mut extra = format!(
        "samples {}  seed {}  cutoff {:e}\n",
        samples.len(),
        samples.seed,
        samples.cutoff
    );
    for n in 1..=2 {
        let (m, se) = samples.moment(n as f64);
        let _ = writeln!(
            extra,
            "E[I^{n}]  sample {m:.6e} +- {se:.2e}  recursion {:.6e}",
            exact[n]
        );
    }

    if cfg.plot {
        let sorted = samples.sorted();
        let step = (sorted.len() / ECDF_POINTS).max(1);
        let ecdf = (0..sorted.len())
            .step_by(step)
            .map(|i| (sorted[i], (i + 1) as f64 / sorted.len() as f64))
            .collect();
        let cdf = live_cells(&k)
            .filter_map(|n| {
                let x = k.grid().midpoint(n);
                k.cdf(x).ok().map(|f| (x, f))
            })
            .collect();
        let plot = Plot {
            title: "distribution function".into(),
            x_label: "x".into(),
            y_label: "P(I <= x)".into(),
            series: vec![Series::new("samples", ecdf), Series::new("solver", cdf)],
            ..Plot::default()
        };
        write(&cfg.out, "cdf.svg", plot.render())?;
    }
    finish_reports(cfg, &[ks], &extra)
}

fn cmd_histogram(cfg: &RunConfig) -> Outcome {
    let opts = simulation_options(cfg).direction(Direction::Increasing);
    let hist = monotone_histogram_check(&cfg.spec, &opts)?;
    let mut csv = String::from("x,height,std_error\n");
    for (x, h, se) in &hist.bins {
        let _ = writeln!(csv, "{x:.11e},{h:.11e},{se:.11e}");
    }
    write(&cfg.out, "histogram.csv", csv)?;
    if cfg.plot {
        let band = |sign: f64| {
            hist.bins
                .iter()
                .map(|(x, h, se)| (*x, h + sign * 3.0 * se))
                .collect()
        };
        let plot = Plot {
            title: "increasing-mode histogram".into(),
            x_label: "x".into(),
            y_label: "density".into(),
            log_x: true,
            series: vec![
                Series::new(
                    "histogram",
                    hist.bins.iter().map(|(x, h, _)| (*x, *h)).collect(),
                ),
                Series::new("+3 s.e.", band(1.0)),
                Series::new("-3 s.e.", band(-1.0)),
            ],
            ..Plot::default()
        };
        write(&cfg.out, "histogram.svg", plot.render())?;
    }
    finish_reports(cfg, &[hist.shape, hist.limit], "")
}
