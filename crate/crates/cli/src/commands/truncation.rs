//! Gauge-cutoff convergence and fixed low-dimensional truncations.

use rayon::prelude::*;
use schwinger_core::criticality::{
    truncated_gap_curve, truncation_study, CriticalContext, ScanWindow, REFERENCE_N_MAX,
};

use super::open;
use crate::config::{ReferenceSpec, TruncationConfig};
use crate::error::CliError;
use crate::output::num;
use crate::Common;

pub fn run(common: &Common) -> Result<(), CliError> {
    let (cfg, mut store) = open::<TruncationConfig, _>(common, "truncation", TruncationConfig::validate)?;
    match study(&cfg, &mut store) {
        Ok(()) => {
            store.finish("complete")?;
            println!("config hash {}", store.hash());
            Ok(())
        }
        Err(e) => {
            store.finish("failed")?;
            Err(e)
        }
    }
}

fn study(cfg: &TruncationConfig, store: &mut crate::output::ResultStore) -> Result<(), CliError> {
    let es = cfg.e.validate_positive("e")?;
    let ms = cfg.m.validate("m")?;
    let jobs: Vec<(usize, f64, Vec<i32>)> = cfg
        .l
        .iter()
        .flat_map(|&l| {
            let mut cut = cfg.cutoffs.clone().unwrap_or_else(|| vec![2 * l as i32]);
            cut.sort_unstable();
            cut.dedup();
            es.iter().map(move |&e| (l, e, cut.clone())).collect::<Vec<_>>()
        })
        .collect();
    let studies = jobs
        .par_iter()
        .map(|(l, e, cut)| {
            let r = truncation_study(*l, *e, &ms, cut, cfg.reference_n_max).map_err(CliError::numerical)?;
            eprintln!("truncation: L={l} e={e} cutoffs {cut:?} done");
            Ok(r)
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let mut rows = Vec::new();
    let mut worst: Vec<(usize, f64, i32, f64)> = Vec::new();
    for ((l, e, cut), study) in jobs.iter().zip(&studies) {
        for (ci, &c) in cut.iter().enumerate() {
            let mut w = 0.0f64;
            for r in study {
                w = w.max(r.rel_errors[ci]);
                rows.push(vec![
                    l.to_string(),
                    num(*e),
                    num(r.m),
                    c.to_string(),
                    num(r.gaps[ci]),
                    cfg.reference_n_max.to_string(),
                    num(r.reference_gap),
                    num(r.gaps[ci] - r.reference_gap),
                    num(r.rel_errors[ci]),
                ]);
            }
            worst.push((*l, *e, c, w));
        }
    }
    store.write_table(
        "cutoff",
        &["L", "e", "m", "n_max", "gap", "reference_n_max", "reference_gap", "difference", "rel_error"],
        &rows,
    )?;
    for (l, e, c, w) in worst {
        println!("L={l} e={e} n_max={c}: max relative gap error {w:.3e}");
    }

    if cfg.truncated.is_empty() {
        return Ok(());
    }
    let e = cfg.e_truncated;
    let m_ref = match &cfg.reference {
        ReferenceSpec::Ratio(r) => r * e,
        ReferenceSpec::Named(_) => CriticalContext::new(4, REFERENCE_N_MAX)
            .and_then(|c| c.upper_point(e, &ScanWindow::default()))
            .map_err(CliError::numerical)?,
    };
    let curves = cfg
        .truncated
        .par_iter()
        .map(|t| {
            let c = truncated_gap_curve(t.l, e, &ms, t.dim, m_ref, 2 * t.l as i32).map_err(CliError::numerical)?;
            eprintln!("truncation: L={} dim={} curve done", t.l, t.dim);
            Ok(c)
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let mut rows = Vec::new();
    for (t, curve) in cfg.truncated.iter().zip(&curves) {
        for r in curve {
            rows.push(vec![
                t.l.to_string(),
                t.dim.to_string(),
                num(e),
                num(m_ref),
                num(r.m),
                num(r.full_gap),
                num(r.truncated_gap),
            ]);
        }
        let worst = curve
            .iter()
            .map(|r| (r.truncated_gap - r.full_gap).abs())
            .fold(0.0f64, f64::max);
        println!("L={} dim={} e={e} m_ref={m_ref:.5}: max |truncated - full| gap {worst:.3e}", t.l, t.dim);
    }
    store.write_table(
        "truncated",
        &["L", "dim", "e", "m_ref", "m", "full_gap", "truncated_gap"],
        &rows,
    )?;
    Ok(())
}
