//! Pseudo-critical masses per lattice size and their continuum extrapolation.

use rayon::prelude::*;
use schwinger_core::criticality::{extrapolate_critical, CriticalContext, CriticalityError, ScanWindow};

use super::open;
use crate::config::CriticalConfig;
use crate::error::CliError;
use crate::output::num;
use crate::Common;

pub fn run(common: &Common) -> Result<(), CliError> {
    let (cfg, mut store) = open::<CriticalConfig, _>(common, "critical", CriticalConfig::validate)?;
    let es = cfg.e.validate_positive("e")?;
    let window = ScanWindow {
        lo_over_e: cfg.window.lo_over_e,
        hi_over_e: cfg.window.hi_over_e,
        points: cfg.window.points,
    };
    let contexts = cfg
        .l
        .par_iter()
        .map(|&l| CriticalContext::new(l, cfg.n_max).map_err(CliError::numerical))
        .collect::<Result<Vec<_>, _>>()?;
    let jobs: Vec<(usize, f64)> = (0..cfg.l.len()).flat_map(|i| es.iter().map(move |&e| (i, e))).collect();
    let results: Vec<_> = jobs
        .par_iter()
        .map(|&(i, e)| {
            let r = contexts[i].point(e, &window);
            match &r {
                Ok(p) => eprintln!("critical: L={} e={e} m*={:.6}", cfg.l[i], p.m_star),
                Err(err) => eprintln!("critical: L={} e={e} skipped: {err}", cfg.l[i]),
            }
            r
        })
        .collect();

    let mut point_rows = Vec::new();
    let mut by_l = vec![Vec::new(); cfg.l.len()];
    for (&(i, e), r) in jobs.iter().zip(results) {
        match r {
            Ok(p) => {
                point_rows.push(vec![
                    p.l.to_string(),
                    num(p.e),
                    num(p.m_star),
                    num(p.m_star / p.e),
                    num(p.sigma),
                ]);
                by_l[i].push(p);
            }
            Err(err @ CriticalityError::NoBracket { .. }) => {
                eprintln!("warning: L={} e={e}: {err}", cfg.l[i]);
                store.skip(format!("L={} e={e}", cfg.l[i]), err.to_string());
            }
            Err(err) => {
                store.finish("failed")?;
                return Err(CliError::numerical(format!("L={} e={e}: {err}", cfg.l[i])));
            }
        }
    }
    store.write_table("points", &["L", "e", "m_star", "m_star_over_e", "sigma"], &point_rows)?;

    let mut fit_rows = Vec::new();
    let mut failure = None;
    for (l, points) in cfg.l.iter().zip(&by_l) {
        match extrapolate_critical(points) {
            Ok(fit) => {
                println!(
                    "L={l}: m_c/e = {:.5} +- {:.5} (slope {:.5}, {} points)",
                    fit.intercept,
                    fit.intercept_stderr(),
                    fit.slope,
                    points.len()
                );
                fit_rows.push(vec![
                    l.to_string(),
                    num(fit.intercept),
                    num(fit.intercept_stderr()),
                    num(fit.slope),
                    points.len().to_string(),
                ]);
            }
            Err(err) => {
                eprintln!("warning: L={l}: extrapolation failed: {err}");
                failure.get_or_insert_with(|| CliError::numerical(format!("L={l}: {err}")));
            }
        }
    }
    store.write_table("fit", &["L", "intercept", "intercept_stderr", "slope", "n_points"], &fit_rows)?;
    match failure {
        None => {
            store.finish("complete")?;
            println!("config hash {}", store.hash());
            Ok(())
        }
        Some(e) => {
            store.finish("partial")?;
            Err(e)
        }
    }
}
