//! Subcommand dispatch: builds the cascade described by the configuration,
//! runs the requested experiment, and writes its outputs plus the manifest.

use crate::cascade::{build_cascade, CantorMeasure};
use crate::config::{RunConfig, SUBCOMMANDS};
use crate::error::{Error, Result};
use crate::experiments::{
    concentration_check, decay_fit, knapp_experiment, lp_convergence_scan, omega_scan, ScanRow,
};
use crate::fourier::{annulus_point, nu_hat};
use crate::report::{format_float, scan_rows_csv, Csv, OutputSet};
use std::path::Path;
use std::time::Instant;

/// Run one subcommand, writing its outputs into `out_dir`. On any error
/// nothing is written (outputs are assembled in memory first).
pub fn run(config: &RunConfig, subcommand: &str, out_dir: &Path) -> Result<()> {
    if !SUBCOMMANDS.contains(&subcommand) {
        return Err(Error::Config(vec![format!(
            "unknown subcommand `{subcommand}`; valid subcommands: {}",
            SUBCOMMANDS.join(", ")
        )]));
    }
    let started = Instant::now();
    let mut out = OutputSet::new();
    if subcommand == "report" {
        aggregate_report(out_dir, &mut out)?;
    } else {
        let measure = build_cascade(&config.cascade)?;
        match subcommand {
            "build" => out.add("cascade.txt", measure.serialize()),
            "transform" => transform(config, &measure, &mut out)?,
            "decay" => decay(config, &measure, &mut out)?,
            "lp" => lp(config, &measure, &mut out)?,
            "knapp" => knapp(config, &measure, &mut out)?,
            "omega" => omega(config, &measure, &mut out)?,
            "concentrate" => concentrate(config, &measure, &mut out)?,
            _ => unreachable!("subcommand validated above"),
        }
    }
    out.write_all(out_dir, config, started.elapsed().as_secs_f64())
}

fn level_or_top(measure: &CantorMeasure, level: Option<usize>) -> usize {
    level.unwrap_or_else(|| measure.top_level())
}

/// Table of ν̂ values at frequencies sampled from the annulus `[r, 2r]`.
fn transform(config: &RunConfig, measure: &CantorMeasure, out: &mut OutputSet) -> Result<()> {
    let p = &config.transform;
    let j = level_or_top(measure, p.level);
    let d = measure.params.d;
    let mut header: Vec<String> = vec!["index".into()];
    header.extend((1..=d).map(|k| format!("xi_{k}")));
    header.extend(["re", "im", "err"].map(String::from));
    let mut csv = Csv::new(&header.iter().map(String::as_str).collect::<Vec<_>>());
    for i in 0..p.count {
        let xi = annulus_point(d, p.r, measure.params.seed, i as u64);
        let v = nu_hat(measure, j, &xi, config.tol)?;
        let mut cells = vec![i.to_string()];
        cells.extend(xi.iter().map(|&x| format_float(x)));
        cells.push(format_float(v.value.re));
        cells.push(format_float(v.value.im));
        cells.push(format_float(v.err));
        csv.push_raw(&cells);
    }
    out.add_csv("transform.csv", &csv);
    Ok(())
}

fn decay(config: &RunConfig, measure: &CantorMeasure, out: &mut OutputSet) -> Result<()> {
    let p = &config.decay;
    let j = level_or_top(measure, p.level);
    let seed = measure.params.seed;
    let fit = decay_fit(
        measure, j, p.r_min, p.r_max, p.annuli, p.samples, seed, config.tol,
    )?;
    let mut csv = Csv::new(&["R", "sup_abs", "samples", "seed"]);
    for &(r, sup) in &fit.annuli {
        csv.push_raw(&[
            format_float(r),
            format_float(sup),
            p.samples.to_string(),
            seed.to_string(),
        ]);
    }
    out.add_csv("decay.csv", &csv);

    let mut fit_csv = Csv::new(&["exponent", "intercept", "residual"]);
    fit_csv.push(&[fit.exponent, fit.intercept, fit.residual]);
    out.add_csv("decay_fit.csv", &fit_csv);
    Ok(())
}

fn split_fit_rows(rows: Vec<ScanRow>) -> (Vec<ScanRow>, Vec<ScanRow>) {
    rows.into_iter()
        .partition(|r| r.get("is_fit_row") != Some(1.0))
}

fn lp(config: &RunConfig, measure: &CantorMeasure, out: &mut OutputSet) -> Result<()> {
    let p = &config.lp;
    let j = level_or_top(measure, p.level);
    let rows = lp_convergence_scan(
        measure,
        j,
        &p.p_list,
        p.r_max,
        p.samples,
        measure.params.seed,
        config.tol,
    )?;
    let (data, fits) = split_fit_rows(rows);
    out.add_csv(
        "lp.csv",
        &scan_rows_csv(&data, &["p", "r_lo", "r_hi", "contribution", "std_error"]),
    );
    out.add_csv(
        "lp_fit.csv",
        &scan_rows_csv(&fits, &["p", "slope", "intercept", "residual"]),
    );
    Ok(())
}

fn knapp(config: &RunConfig, measure: &CantorMeasure, out: &mut OutputSet) -> Result<()> {
    let p = &config.knapp;
    let rows = knapp_experiment(
        measure,
        p.p,
        p.q,
        &p.levels,
        p.dual_scale,
        p.samples,
        measure.params.seed,
        config.tol,
    )?;
    let (data, fits) = split_fit_rows(rows);
    out.add_csv(
        "knapp.csv",
        &scan_rows_csv(
            &data,
            &[
                "level",
                "r_k",
                "integral",
                "std_error",
                "mass",
                "norm_q",
                "min_re_ratio",
            ],
        ),
    );
    out.add_csv(
        "knapp_fit.csv",
        &scan_rows_csv(&fits, &["slope", "intercept", "residual"]),
    );
    Ok(())
}

fn omega(config: &RunConfig, measure: &CantorMeasure, out: &mut OutputSet) -> Result<()> {
    let p = &config.omega;
    let j = level_or_top(measure, p.level);
    let rows = omega_scan(
        measure,
        j,
        p.s1_max,
        p.s2_max,
        p.variant,
        p.samples,
        p.eps,
        measure.params.seed,
        config.tol,
    )?;
    out.add_csv(
        "omega.csv",
        &scan_rows_csv(
            &rows,
            &[
                "j",
                "s1",
                "s2",
                "estimate",
                "std_error",
                "bound",
                "ratio",
                "zero_flag",
                "c_bound",
                "members_checked",
                "max_sq_over_c",
            ],
        ),
    );
    Ok(())
}

fn concentrate(config: &RunConfig, measure: &CantorMeasure, out: &mut OutputSet) -> Result<()> {
    let p = &config.concentrate;
    let j = p.level.unwrap_or_else(|| measure.top_level() - 1);
    let row = concentration_check(
        measure,
        j,
        &p.xi,
        p.trials,
        measure.params.seed,
        config.tol,
    )?;
    let columns: Vec<&str> = row.columns().iter().map(|(k, _)| k.as_str()).collect();
    out.add_csv("concentrate.csv", &scan_rows_csv(&[row.clone()], &columns));
    Ok(())
}

/// Aggregate previously written CSVs in the output directory into one
/// `report.csv` of `(file, key, value)` summary rows.
fn aggregate_report(out_dir: &Path, out: &mut OutputSet) -> Result<()> {
    let mut csv = Csv::new(&["file", "key", "value"]);
    let mut found = 0usize;
    for name in [
        "transform.csv",
        "decay.csv",
        "decay_fit.csv",
        "lp.csv",
        "lp_fit.csv",
        "knapp.csv",
        "knapp_fit.csv",
        "omega.csv",
        "concentrate.csv",
    ] {
        let path = out_dir.join(name);
        let Ok(text) = std::fs::read_to_string(&path) else {
            continue;
        };
        found += 1;
        let mut lines = text.lines();
        let header: Vec<&str> = lines.next().unwrap_or("").split(',').collect();
        let rows: Vec<&str> = lines.collect();
        csv.push_raw(&[name.to_string(), "rows".into(), rows.len().to_string()]);
        // echo single-row fit/summary files in full
        if (rows.len() == 1 && name.ends_with("_fit.csv")) || name == "concentrate.csv" {
            if let Some(first) = rows.first() {
                for (key, value) in header.iter().zip(first.split(',')) {
                    csv.push_raw(&[name.to_string(), key.to_string(), value.to_string()]);
                }
            }
        }
    }
    if found == 0 {
        return Err(Error::Config(vec![format!(
            "report: no experiment CSVs found in {}",
            out_dir.display()
        )]));
    }
    out.add_csv("report.csv", &csv);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;
    use std::fs;

    fn tmp_dir(tag: &str) -> std::path::PathBuf {
        let dir = std::env::temp_dir().join(format!("momentlab-run-{tag}-{}", std::process::id()));
        let _ = fs::remove_dir_all(&dir);
        dir
    }

    const SMALL: &str = "\
d = 2
m = 4
alpha = 0.5
levels = 4
seed = 3

[transform]
count = 4
[decay]
r_min = 4
r_max = 64
annuli = 3
samples = 8
[lp]
p_list = 4
r_max = 4
samples = 8
[knapp]
levels = 2,3
samples = 8
[concentrate]
trials = 100
";

    #[test]
    fn unknown_subcommand_rejected() {
        let cfg = parse_config(SMALL).unwrap();
        let err = run(&cfg, "frobnicate", &tmp_dir("bad")).unwrap_err();
        assert!(err.to_string().contains("valid subcommands"));
    }

    #[test]
    fn build_writes_cascade_and_manifest() {
        let dir = tmp_dir("build");
        let cfg = parse_config(SMALL).unwrap();
        run(&cfg, "build", &dir).unwrap();
        let text = fs::read_to_string(dir.join("cascade.txt")).unwrap();
        let parsed = crate::cascade::CantorMeasure::parse(&text).unwrap();
        assert_eq!(parsed.params.seed, 3);
        assert!(dir.join("manifest.json").exists());
        fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn decay_csv_schema_and_determinism() {
        let dir_a = tmp_dir("decay-a");
        let dir_b = tmp_dir("decay-b");
        let cfg = parse_config(SMALL).unwrap();
        run(&cfg, "decay", &dir_a).unwrap();
        run(&cfg, "decay", &dir_b).unwrap();
        let a = fs::read_to_string(dir_a.join("decay.csv")).unwrap();
        let b = fs::read_to_string(dir_b.join("decay.csv")).unwrap();
        assert!(a.starts_with("R,sup_abs,samples,seed\n"));
        assert_eq!(a, b);
        assert!(dir_a.join("decay_fit.csv").exists());
        fs::remove_dir_all(&dir_a).unwrap();
        fs::remove_dir_all(&dir_b).unwrap();
    }

    #[test]
    fn report_aggregates_prior_outputs() {
        let dir = tmp_dir("report");
        let cfg = parse_config(SMALL).unwrap();
        run(&cfg, "decay", &dir).unwrap();
        run(&cfg, "report", &dir).unwrap();
        let text = fs::read_to_string(dir.join("report.csv")).unwrap();
        assert!(text.contains("decay_fit.csv,exponent,"));
        fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn report_fails_on_empty_directory() {
        let dir = tmp_dir("report-empty");
        let cfg = parse_config(SMALL).unwrap();
        assert!(run(&cfg, "report", &dir).is_err());
        // no partial outputs on failure
        assert!(!dir.join("manifest.json").exists());
    }
}
