//! Truncated three-qubit VQE: exact and sampled pseudo-critical sweeps, then
//! the noisy multi-run mitigation protocol at the exact pseudo-critical points.

use rayon::prelude::*;
use schwinger_core::criticality::{extrapolate_critical, PseudoCriticalPoint};
use schwinger_core::noise_mitigation::{
    multi_run_protocol, Estimator, MitigationTarget, NoiseModel, PointRuns, Protocol, REPORT_CSV_HEADER,
};
use schwinger_core::seeds::derive_seed;
use schwinger_core::vqe_engine::{
    quantum_pseudo_critical, r4_from_energies, LayoutSearch, QuantumModel, QuantumScan, QuantumSectors, Shots,
    VqeSetup,
};

use super::open;
use crate::config::VqeConfig;
use crate::error::CliError;
use crate::output::{num, ResultStore};
use crate::Common;

const TARGET_NAMES: [&str; 4] = ["L3_even", "L3_odd", "L4_even", "L4_odd"];

const ESTIMATORS: [(&str, Estimator, Estimator, bool); 6] = [
    ("raw", Estimator::Raw, Estimator::Raw, false),
    ("ro_corrected", Estimator::ReadoutCorrected, Estimator::ReadoutCorrected, false),
    ("linear", Estimator::Linear, Estimator::Linear, false),
    ("quadratic", Estimator::Quadratic, Estimator::Quadratic, false),
    ("mixed", Estimator::Linear, Estimator::Quadratic, false),
    ("mixed_best_group", Estimator::Linear, Estimator::Quadratic, true),
];

pub fn run(common: &Common) -> Result<(), CliError> {
    let (cfg, mut store) = open::<VqeConfig, _>(common, "vqe", VqeConfig::validate)?;
    match pipeline(&cfg, common.seed, &mut store) {
        Ok(()) => {
            store.finish("complete")?;
            println!("config hash {}", store.hash());
            Ok(())
        }
        Err(e) => {
            store.finish(if store.file_count() > 0 { "partial" } else { "failed" })?;
            Err(e)
        }
    }
}

/// Grid index closest to `R_4 = 1` using the exact energies.
fn exact_selection(scan: &QuantumScan) -> Result<usize, CliError> {
    scan.rows
        .iter()
        .enumerate()
        .map(|(i, r)| (i, r4_from_energies(&r.exact)))
        .filter(|(_, r)| r.is_finite())
        .min_by(|a, b| (a.1 - 1.0).abs().total_cmp(&(b.1 - 1.0).abs()))
        .map(|(i, _)| i)
        .ok_or_else(|| CliError::numerical(format!("e={}: no finite exact R_4 on the grid", scan.point.e)))
}

fn pipeline(cfg: &VqeConfig, seed: u64, store: &mut ResultStore) -> Result<(), CliError> {
    let es = cfg.e.validate_positive("e")?;
    let ms = cfg.m.validate("m")?;
    let setup = VqeSetup {
        reference: cfg.reference()?,
        n_max: cfg.n_max,
        pad_factor: cfg.pad_factor,
        layout: LayoutSearch {
            restarts: cfg.layout_restarts,
        },
        budget: cfg.budget,
        restarts: cfg.restarts,
        ..VqeSetup::default()
    };
    let shots = if cfg.shots > 0 { Shots::PerTerm(cfg.shots) } else { Shots::Exact };
    let sectors = QuantumSectors::new(cfg.n_max, setup.reference).map_err(CliError::numerical)?;

    let sweeps: Vec<(QuantumModel, QuantumScan)> = es
        .par_iter()
        .enumerate()
        .map(|(i, &e)| {
            let model = sectors
                .model(e, &setup, derive_seed(seed, &[i as u64, 0]))
                .map_err(|err| CliError::numerical(format!("e={e}: {err}")))?;
            let scan = quantum_pseudo_critical(&model, &ms, shots, &setup, derive_seed(seed, &[i as u64, 1]))
                .map_err(|err| CliError::numerical(format!("e={e}: {err}")))?;
            eprintln!("vqe: e={e} scanned {} masses (m_ref {:.5})", ms.len(), model.m_ref);
            Ok((model, scan))
        })
        .collect::<Result<_, CliError>>()?;
    let exact_sel = sweeps
        .iter()
        .map(|(_, s)| exact_selection(s))
        .collect::<Result<Vec<_>, _>>()?;

    write_scan_tables(store, &sweeps, &exact_sel, shots)?;

    let exact_points: Vec<PseudoCriticalPoint> = sweeps
        .iter()
        .zip(&exact_sel)
        .map(|((_, s), &k)| PseudoCriticalPoint {
            m_star: s.rows[k].m,
            ..s.point
        })
        .collect();
    let mut fits = vec![("exact", extrapolate_critical(&exact_points).map_err(CliError::numerical)?)];
    if shots != Shots::Exact {
        let pts: Vec<PseudoCriticalPoint> = sweeps.iter().map(|(_, s)| s.point).collect();
        fits.push(("shots", extrapolate_critical(&pts).map_err(CliError::numerical)?));
    }
    let fit_rows: Vec<Vec<String>> = fits
        .iter()
        .map(|(mode, f)| {
            println!(
                "{mode}: m_c/e = {:.5} +- {:.5} (slope {:.5}, {} points)",
                f.intercept,
                f.intercept_stderr(),
                f.slope,
                es.len()
            );
            vec![
                mode.to_string(),
                num(f.intercept),
                num(f.intercept_stderr()),
                num(f.slope),
                es.len().to_string(),
            ]
        })
        .collect();
    store.write_table("fit", &["mode", "intercept", "intercept_stderr", "slope", "n_points"], &fit_rows)?;

    if !cfg.mitigation.enabled {
        return Ok(());
    }
    let mc = &cfg.mitigation;
    let protocol = Protocol {
        n_runs: mc.n_runs,
        group_size: mc.group_size,
        shots: mc.shots,
        calibration_shots: mc.calibration_shots,
        folds: mc.folds.clone(),
    };
    let runs: Vec<PointRuns> = sweeps
        .par_iter()
        .zip(&exact_sel)
        .enumerate()
        .map(|(i, ((model, scan), &k))| {
            let row = &scan.rows[k];
            let targets = model
                .targets
                .iter()
                .enumerate()
                .map(|(t, tg)| {
                    Ok(MitigationTarget {
                        circuit: tg.circuit(),
                        angles: row.exact_angles[t].clone(),
                        decomp: tg.decomposition(row.m).map_err(CliError::numerical)?,
                    })
                })
                .collect::<Result<Vec<_>, CliError>>()?;
            let noise = NoiseModel::uniform(3, mc.p2, mc.ro_flip, derive_seed(seed, &[i as u64, 2]))
                .map_err(|err| CliError::validation(err.to_string()))?;
            let r = multi_run_protocol(&targets, &noise, &protocol)
                .map_err(|err| CliError::numerical(format!("e={}: {err}", model.e)))?;
            eprintln!("vqe: e={} mitigation done at m={}", model.e, row.m);
            Ok(r)
        })
        .collect::<Result<_, CliError>>()?;
    write_mitigation_tables(store, &sweeps, &exact_sel, &runs)
}

fn write_scan_tables(
    store: &mut ResultStore,
    sweeps: &[(QuantumModel, QuantumScan)],
    exact_sel: &[usize],
    shots: Shots,
) -> Result<(), CliError> {
    let mut energy = Vec::new();
    let mut ratio = Vec::new();
    let mut points = Vec::new();
    let mut layout = Vec::new();
    for ((model, scan), &k) in sweeps.iter().zip(exact_sel) {
        let e = num(model.e);
        for r in &scan.rows {
            for t in 0..4 {
                energy.push(vec![
                    e.clone(),
                    num(r.m),
                    TARGET_NAMES[t].to_string(),
                    num(r.exact[t]),
                    num(r.energies[t].mean),
                    num(r.energies[t].stderr),
                    num(r.truncated[t]),
                    num(r.manifold[t]),
                ]);
            }
            ratio.push(vec![
                e.clone(),
                num(r.m),
                num(r4_from_energies(&r.exact)),
                num(r.r4),
                num(r.r4_stderr),
                r.budget_exhausted.to_string(),
            ]);
        }
        let ex = &scan.rows[k];
        let sh = &scan.rows[scan.selected];
        points.push(vec![
            e.clone(),
            num(model.m_ref),
            num(ex.m),
            num(r4_from_energies(&ex.exact)),
            num(sh.m),
            num(sh.r4),
            num(sh.r4_stderr),
        ]);
        eprintln!(
            "vqe: e={} exact m*={} shot m*={} ({:?})",
            model.e, ex.m, sh.m, shots
        );
        for (t, tg) in model.targets.iter().enumerate() {
            for (i, (s, g)) in tg.layout.slots.iter().zip(&tg.layout.signs).enumerate() {
                layout.push(vec![
                    e.clone(),
                    TARGET_NAMES[t].to_string(),
                    i.to_string(),
                    format!("{s:03b}"),
                    num(*g),
                    tg.truncation.selected_states[i].to_string(),
                ]);
            }
        }
    }
    store.write_table(
        "energies",
        &["e", "m", "target", "exact", "estimate", "estimate_stderr", "truncated_ground", "manifold_min"],
        &energy,
    )?;
    store.write_table("ratio", &["e", "m", "r4_exact", "r4", "r4_stderr", "budget_exhausted"], &ratio)?;
    store.write_table(
        "points",
        &["e", "m_ref", "m_star_exact", "r4_exact", "m_star", "r4", "r4_stderr"],
        &points,
    )?;
    store.write_table("layout", &["e", "target", "state", "register", "sign", "parent_state"], &layout)?;
    Ok(())
}

fn write_mitigation_tables(
    store: &mut ResultStore,
    sweeps: &[(QuantumModel, QuantumScan)],
    exact_sel: &[usize],
    runs: &[PointRuns],
) -> Result<(), CliError> {
    let header: Vec<&str> = REPORT_CSV_HEADER.split(',').collect();
    let mut folds = Vec::new();
    let mut energies = Vec::new();
    let mut r4 = Vec::new();
    let mut within = 0;
    for (((model, scan), &k), pr) in sweeps.iter().zip(exact_sel).zip(runs) {
        let point = format!("e={}", model.e);
        for (run, reports) in pr.reports.iter().enumerate() {
            for (t, rep) in reports.iter().enumerate() {
                for line in rep.csv_rows(&point, TARGET_NAMES[t], run, run / pr.group_size) {
                    folds.push(line.split(',').map(str::to_string).collect());
                }
            }
        }
        let row = &scan.rows[k];
        for (t, name) in TARGET_NAMES.iter().enumerate() {
            let mut cols = vec![num(model.e), num(row.m), name.to_string(), num(row.exact[t])];
            for est in [Estimator::Raw, Estimator::ReadoutCorrected, Estimator::Linear, Estimator::Quadratic] {
                let s = pr.summary(t, est).map_err(CliError::numerical)?;
                cols.push(num(s.all.mean));
                cols.push(num(s.all.stderr));
            }
            energies.push(cols);
        }
        for (name, l3, l4, best) in ESTIMATORS {
            let est = pr.r4(l3, l4, best).map_err(CliError::numerical)?;
            r4.push(vec![
                num(model.e),
                num(row.m),
                name.to_string(),
                num(est.value),
                num(est.stderr),
                est.contains_one(1.0).to_string(),
                est.contains_one(2.0).to_string(),
            ]);
            if name == "mixed" {
                within += est.contains_one(1.0) as usize;
                println!("e={}: mixed R_4 = {:.4} +- {:.4}", model.e, est.value, est.stderr);
            }
        }
    }
    println!("mixed R_4 contains 1 at one sigma at {within} of {} points", runs.len());
    store.write_table("mitigation", &header, &folds)?;
    store.write_table(
        "mitigated_energies",
        &[
            "e", "m", "target", "exact", "raw", "raw_stderr", "ro_corrected", "ro_corrected_stderr", "linear",
            "linear_stderr", "quadratic", "quadratic_stderr",
        ],
        &energies,
    )?;
    store.write_table(
        "r4",
        &["e", "m", "estimator", "r4", "r4_stderr", "within_1sigma", "within_2sigma"],
        &r4,
    )?;
    Ok(())
}
