//! Gap curves in explicitly listed (L, θ) sectors.

use rayon::prelude::*;
use schwinger_core::criticality::theta_scan;

use super::{gap_row, open, GAP_HEADER};
use crate::config::ThetaConfig;
use crate::error::CliError;
use crate::Common;

pub fn run(common: &Common) -> Result<(), CliError> {
    let (cfg, mut store) = open::<ThetaConfig, _>(common, "theta", ThetaConfig::validate)?;
    let ms = cfg.m.validate("m")?;
    let sectors = cfg
        .sectors
        .iter()
        .map(|s| Ok((s.l, s.theta.label(), s.theta.sector(s.l)?)))
        .collect::<Result<Vec<_>, CliError>>()?;
    let curves = sectors
        .par_iter()
        .map(|(l, label, k)| {
            let c = theta_scan(*l, cfg.e, *k, &ms, cfg.n_max).map_err(CliError::numerical)?;
            eprintln!("theta: L={l} theta={label} (k={k}) done");
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
    for ((l, label, _), c) in sectors.iter().zip(&curves) {
        let min = c.iter().min_by(|a, b| a.gap.total_cmp(&b.gap)).expect("nonempty grid");
        println!("L={l} theta={label}: smallest gap {:.6} at m={}", min.gap, min.params.m);
    }
    println!("{} rows, config hash {}", rows.len(), store.hash());
    Ok(())
}
