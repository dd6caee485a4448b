//! Continuation solve driven by a manifest.

use std::path::Path;

use schouten_core::solver::{continuation, pick_delta, ContinuationOptions, Diagnostics, EndpointChecks, PathRecord, ProblemSetup, SolveStatus};
use serde::Serialize;

use crate::error::CliError;
use crate::manifest::Manifest;
use crate::report::geometry;

#[derive(Debug, Serialize)]
pub struct FinalState {
    pub t: f64,
    pub residual_sup: f64,
    pub cone_margin_min: f64,
    pub cone_margin_node: usize,
    pub diagnostics: Diagnostics,
}

#[derive(Debug, Serialize)]
pub struct SolveOutput {
    pub status: SolveStatus,
    pub delta: f64,
    pub t0: f64,
    pub steps: usize,
    pub pinching_ok: bool,
    pub ricci_positive: bool,
    pub final_state: FinalState,
    pub endpoint: Option<EndpointChecks>,
    pub path: Vec<PathRecord>,
}

pub struct Overrides {
    pub t0: Option<f64>,
    pub steps: Option<usize>,
}

pub fn run(m: &Manifest, over: &Overrides) -> Result<SolveOutput, CliError> {
    let s = &m.solver;
    let t0 = match over.t0 {
        Some(t) => t,
        None => s.t0.value("solver.t0")?,
    };
    if !(t0 <= 2.0 / 3.0) {
        return Err(CliError::Validation(format!("`--t0` must be at most 2/3, got {t0}")));
    }
    let geo = geometry(m)?;
    let delta = match &s.delta {
        Some(d) => d.value("solver.delta")?,
        None => pick_delta(&geo, s.delta_margin.value("solver.delta_margin")?, t0, s.path_floor.value("solver.path_floor")?)?,
    };
    let setup = ProblemSetup::new(geo, delta, t0)?;
    let mut opts = ContinuationOptions::default();
    if let Some(n) = over.steps.or(s.steps) {
        if n == 0 {
            return Err(CliError::Validation("field `solver.steps`: must be positive".into()));
        }
        opts.steps = n;
    }
    if let Some(v) = s.tol_factor {
        opts.tol_factor = v;
    }
    if let Some(v) = s.max_newton {
        opts.max_newton = v;
    }
    let rep = continuation(&setup, &opts)?;
    let end = rep.endpoint.as_ref();
    let st = &rep.final_state;
    Ok(SolveOutput {
        pinching_ok: rep.pinching_ok(),
        ricci_positive: end.is_some_and(|e| e.ricci_positive),
        status: rep.status.clone(),
        delta,
        t0,
        steps: opts.steps,
        final_state: FinalState {
            t: st.t,
            residual_sup: st.residual_sup,
            cone_margin_min: st.cone_margin_min,
            cone_margin_node: st.cone_margin_node,
            diagnostics: st.diagnostics,
        },
        endpoint: rep.endpoint.clone(),
        path: rep.path.clone(),
    })
}

pub fn write_trace(path: &Path, records: &[PathRecord]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| CliError::Io(e.into()))?;
    w.write_record(["t", "residual_sup", "cone_margin_min", "sup_u", "inf_u", "sup_grad_u", "harnack_gap"])
        .map_err(|e| CliError::Io(e.into()))?;
    for r in records {
        w.write_record(
            [r.t, r.residual_sup, r.cone_margin_min, r.sup_u, r.inf_u, r.sup_grad_u, r.harnack_gap].map(|v| format!("{v:e}")),
        )
        .map_err(|e| CliError::Io(e.into()))?;
    }
    w.flush()?;
    Ok(())
}
