use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::config;
use crate::error::CliError;
use crate::output::{num, ResultStore};
use crate::Common;

use schwinger_core::criticality::GapResult;

pub mod critical;
pub mod spectrum;
pub mod theta;
pub mod truncation;
pub mod vqe;

/// Loads the config, validates it and opens the result store.
fn open<T, V>(common: &Common, command: &str, validate: V) -> Result<(T, ResultStore), CliError>
where
    T: DeserializeOwned + Serialize,
    V: FnOnce(&T) -> Result<(), CliError>,
{
    let cfg: T = config::load(common.config.as_deref(), "")?;
    validate(&cfg)?;
    let store = ResultStore::new(&common.out, command, &cfg, common.seed)?;
    eprintln!("{command}: config hash {}", store.hash());
    Ok((cfg, store))
}

const GAP_HEADER: [&str; 9] = ["L", "theta", "theta_k", "e", "m", "n_max", "E0", "E1", "gap"];

fn gap_row(g: &GapResult) -> Vec<String> {
    let p = &g.params;
    vec![
        p.l.to_string(),
        num(p.theta()),
        p.theta_k.to_string(),
        num(p.e),
        num(p.m),
        p.n_max.to_string(),
        num(g.e0),
        num(g.e1),
        num(g.gap),
    ]
}
