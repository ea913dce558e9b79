//! Kernel self-validation and the localized norm bounds of the Landau
//! projectors.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::report::{ExperimentReport, Series};
use crate::cutoff::{Cutoff, LocalizationPair, Rect};
use crate::error::{invalid, Result};
use crate::projector::{
    default_box_lengths, hs_norm_localized, projector_identities_check, trace_norm_localized, IdentityTolerances,
    ProjectorKernel,
};
use crate::row;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProjectorParams {
    pub levels: Vec<u32>,
    pub identity_fields: Vec<f64>,
    pub tolerances: IdentityTolerances,
    pub hs_fields: Vec<f64>,
    pub delta: f64,
    /// Required drop of the HS norm from the first to the last HS field.
    pub decay_factor: f64,
    pub trace_fields: Vec<f64>,
    pub trace_tolerance: f64,
    /// Quadrature spacing in magnetic lengths.
    pub spacing: f64,
}

impl Default for ProjectorParams {
    fn default() -> Self {
        Self {
            levels: vec![0, 1],
            identity_fields: vec![10.0, 40.0],
            tolerances: IdentityTolerances::default(),
            hs_fields: vec![10.0, 20.0, 40.0],
            delta: 1.0,
            decay_factor: 10.0,
            trace_fields: vec![10.0, 20.0],
            trace_tolerance: 0.05,
            spacing: 0.25,
        }
    }
}

impl ProjectorParams {
    pub fn validate(&self) -> Result<()> {
        let all = self.identity_fields.iter().chain(&self.hs_fields).chain(&self.trace_fields);
        if all.clone().any(|&b| !(b > 0.0)) {
            return Err(invalid("B", "fields must be positive"));
        }
        if self.hs_fields.len() < 2 || self.trace_fields.len() < 2 {
            return Err(invalid("hs_fields", "need at least two fields for scaling checks"));
        }
        if !(self.delta > 0.0) || !(self.spacing > 0.0) {
            return Err(invalid("delta", "delta and spacing must be positive"));
        }
        Ok(())
    }
}

pub fn projector_experiment(p: &ProjectorParams, seed: u64) -> Result<ExperimentReport> {
    p.validate()?;
    let t0 = Instant::now();
    let mut rep = ExperimentReport::new("projector", seed, p);

    let mut ids = Series::new(
        "identities",
        &["n", "B", "box_lengths", "idempotency", "eigenrelation", "diagonal", "diagonal_expected", "pass"],
    );
    let mut all = true;
    let mut worst = 0.0f64;
    for &n in &p.levels {
        for &b in &p.identity_fields {
            let k = ProjectorKernel::new(n, b)?;
            let c = projector_identities_check(&k, default_box_lengths(n), p.tolerances);
            ids.push(row![n, b, c.box_lengths, c.idempotency, c.eigenrelation, c.diagonal, c.diagonal_expected, c.pass]);
            all &= c.pass;
            worst = worst.max(c.idempotency / p.tolerances.idempotency).max(c.eigenrelation / p.tolerances.eigenrelation);
        }
    }
    rep.check(
        "projector_identities",
        all,
        worst,
        format!(
            "idempotency < {:e} and eigenrelation < {:e} (relative) for every level and field",
            p.tolerances.idempotency, p.tolerances.eigenrelation
        ),
    );

    let pair = LocalizationPair::unit_squares(p.delta);
    let mut hs = Series::new("hs_decay", &["n", "B", "delta", "value", "error", "bound_constant", "reliable"]);
    let mut values = vec![];
    let mut consts = vec![];
    for &b in &p.hs_fields {
        let k = ProjectorKernel::new(0, b)?;
        let e = hs_norm_localized(&k, &pair, p.spacing * k.magnetic_length())?;
        let c = e.value / (b * (-b * p.delta * p.delta / 8.0).exp());
        hs.push(row![0, b, p.delta, e.value, e.error, c, e.reliable]);
        values.push(e.value);
        consts.push(c);
    }
    let drop = values[0] / values[values.len() - 1];
    rep.fit("hs_drop", drop, None);
    rep.check(
        "hs_offdiagonal_decay",
        drop >= p.decay_factor,
        drop,
        format!("HS norm between unit squares at delta drops >= {}x over the field range", p.decay_factor),
    );
    rep.check(
        "hs_bound_constant",
        consts.iter().all(|&c| c <= consts[0] * (1.0 + 1e-9)),
        consts[0],
        "C fitted at the smallest field bounds all larger fields",
    );

    let sq = Cutoff::Indicator {
        rect: Rect::new([0.0, 0.0], [1.0, 1.0]),
    };
    let mut tr = Series::new("trace", &["n", "B", "value", "error", "density_area"]);
    let mut tv = vec![];
    for &b in &p.trace_fields {
        let k = ProjectorKernel::new(0, b)?;
        let e = trace_norm_localized(&k, &sq, p.spacing * k.magnetic_length())?;
        tr.push(row![0, b, e.value, e.error, b / (2.0 * std::f64::consts::PI)]);
        tv.push((b, e.value));
    }
    let scaling = tv
        .windows(2)
        .map(|w| ((w[1].1 / w[0].1) / (w[1].0 / w[0].0) - 1.0).abs())
        .fold(0.0, f64::max);
    rep.check(
        "trace_linear_in_b",
        scaling <= p.trace_tolerance,
        scaling,
        format!("trace norm scales linearly in B within {}", p.trace_tolerance),
    );
    rep.series.extend([ids, hs, tr]);
    Ok(rep.finish(t0))
}
