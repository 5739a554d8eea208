use serde::Serialize;

use crate::entropy::BipartiteSpectra;
use crate::model::{normal_modes, CircuitParams};
use crate::state::{subspace_validity, thermal_density, transform_density};
use crate::transform::{build_transform_with_order, TransformMethod};

use super::config::SweepConfig;
use super::CliError;

/// One (T, q) grid point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    #[serde(rename = "T")]
    pub t: f64,
    pub q: f64,
    #[serde(rename = "S_joint")]
    pub s_joint: f64,
    #[serde(rename = "S_1")]
    pub s_1: f64,
    #[serde(rename = "S_2")]
    pub s_2: f64,
    #[serde(rename = "I")]
    pub mutual_info: f64,
    pub margin: f64,
    #[serde(rename = "mu_I")]
    pub mu_i: f64,
    #[serde(rename = "mu_II")]
    pub mu_ii: f64,
    pub offdiag_sum: f64,
}

impl SweepRow {
    pub const COLUMNS: [&'static str; 10] = [
        "T",
        "q",
        "S_joint",
        "S_1",
        "S_2",
        "I",
        "margin",
        "mu_I",
        "mu_II",
        "offdiag_sum",
    ];

    pub fn values(&self) -> [f64; 10] {
        [
            self.t,
            self.q,
            self.s_joint,
            self.s_1,
            self.s_2,
            self.mutual_info,
            self.margin,
            self.mu_i,
            self.mu_ii,
            self.offdiag_sum,
        ]
    }
}

/// Rows in T-major, then q, order. Entropies come from the `d_small`
/// truncation; the purity columns from the `d_big` one, always built by
/// quadrature.
pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<SweepRow>, CliError> {
    let setup = |e| CliError::Pipeline {
        at: "setup".into(),
        source: e,
    };
    let params = CircuitParams::new(cfg.lambda, cfg.g).map_err(setup)?;
    let modes = normal_modes(&params, cfg.modes).map_err(setup)?;
    let u_small =
        build_transform_with_order(&params, &modes, cfg.d_small, cfg.method, cfg.quad_order)
            .map_err(setup)?;
    let u_big = build_transform_with_order(
        &params,
        &modes,
        cfg.d_big,
        TransformMethod::Quadrature,
        cfg.quad_order,
    )
    .map_err(setup)?;

    let mut rows = Vec::with_capacity(cfg.t_steps * cfg.q_values.len());
    for t in cfg.temperatures() {
        let at_t = |e| CliError::Pipeline {
            at: format!("T = {t}"),
            source: e,
        };
        let rho = thermal_density(&modes, t, cfg.d_small).map_err(at_t)?;
        let physical = transform_density(&rho, &u_small).map_err(at_t)?;
        let spectra = BipartiteSpectra::new(&physical).map_err(at_t)?;
        let validity = subspace_validity(&modes, &u_big, t, cfg.d_small).map_err(at_t)?;
        for &q in &cfg.q_values {
            let r = spectra.report(q).map_err(|e| CliError::Pipeline {
                at: format!("T = {t}, q = {q}"),
                source: e,
            })?;
            rows.push(SweepRow {
                t,
                q,
                s_joint: r.s_joint,
                s_1: r.s_1,
                s_2: r.s_2,
                mutual_info: r.mutual_info,
                margin: r.subadditivity_margin,
                mu_i: validity.mu_i,
                mu_ii: validity.mu_ii,
                offdiag_sum: validity.offdiag_sum,
            });
        }
    }
    Ok(rows)
}
