//! Gap surfaces over an (e, m) grid.

use rayon::prelude::*;
use schwinger_core::criticality::theta_scan;

use super::{gap_row, open, GAP_HEADER};
use crate::config::SpectrumConfig;
use crate::error::CliError;
use crate::Common;

pub fn run(common: &Common) -> Result<(), CliError> {
    let (cfg, mut store) = open::<SpectrumConfig, _>(common, "spectrum", SpectrumConfig::validate)?;
    let es = cfg.e.validate_positive("e")?;
    let ms = cfg.m.validate("m")?;
    let mut jobs = Vec::new();
    for t in &cfg.thetas {
        let k = t.sector(cfg.l)?;
        for &e in &es {
            jobs.push((t.label(), k, e));
        }
    }
    let curves = jobs
        .par_iter()
        .map(|(label, k, e)| {
            let c = theta_scan(cfg.l, *e, *k, &ms, cfg.n_max).map_err(CliError::numerical)?;
            eprintln!("spectrum: L={} theta={label} e={e} done ({} masses)", cfg.l, ms.len());
            Ok(c)
        })
        .collect::<Result<Vec<_>, CliError>>();
    let curves = match curves {
        Ok(c) => c,
        Err(e) => {
            store.finish("failed")?;
            return Err(e);
        }
    };
    let rows: Vec<Vec<String>> = curves.iter().flatten().map(gap_row).collect();
    store.write_table("gap", &GAP_HEADER, &rows)?;
    store.finish("complete")?;
    for ((label, _, _), c) in jobs.iter().zip(&curves).filter(|((_, _, e), _)| *e == es[es.len() - 1]) {
        let first = c.first().map(|g| g.gap).unwrap_or(f64::NAN);
        let last = c.last().map(|g| g.gap).unwrap_or(f64::NAN);
        println!(
            "L={} theta={label} e={}: gap {first:.6} at m={} -> {last:.6} at m={}",
            cfg.l,
            es[es.len() - 1],
            ms[0],
            ms[ms.len() - 1]
        );
    }
    println!("{} rows, config hash {}", rows.len(), store.hash());
    Ok(())
}
