//! Curvature summary of the manifest metric.

use schouten_core::conformal::{conformal_geometry, pinching_margin, total_sigma2, yamabe_quotient, ConformalFactor, PinchingReport};
use schouten_core::curvature::{q_curvature, schouten_t, sigma_spectrum, Geometry};
use schouten_core::linalg::generalized_eigenvalues;
use serde::Serialize;

use crate::error::CliError;
use crate::manifest::Manifest;

#[derive(Debug, Serialize)]
pub struct SigmaSection {
    pub t: f64,
    pub sigma1_range: [f64; 2],
    pub sigma2_range: [f64; 2],
    /// Fraction of nodes where `A^t` lies in Γ₂⁺.
    pub cone_fraction: f64,
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub chart: schouten_core::ChartKind,
    pub dims: [usize; 3],
    pub nodes: usize,
    pub conformal_factor: Option<String>,
    pub scalar_range: [f64; 2],
    pub ricci_eigenvalue_range: [f64; 2],
    pub sigma: Vec<SigmaSection>,
    pub total_sigma2: f64,
    pub yamabe_quotient: f64,
    pub q_range: [f64; 2],
    pub pinching: PinchingReport,
}

fn range(values: impl IntoIterator<Item = f64>) -> [f64; 2] {
    values
        .into_iter()
        .fold([f64::INFINITY, f64::NEG_INFINITY], |[lo, hi], v| [lo.min(v), hi.max(v)])
}

/// The manifest metric with its conformal factor applied, if any.
pub fn geometry(m: &Manifest) -> Result<Geometry, CliError> {
    let base = m.background()?;
    match m.conformal_field(base.grid())? {
        None => Ok(base),
        Some(u) => {
            let cf = ConformalFactor::on(u, &base)?;
            Ok(conformal_geometry(&base, &cf)?)
        }
    }
}

pub fn run(m: &Manifest) -> Result<Report, CliError> {
    let geo = geometry(m)?;
    let g = &geo.metric;
    let grid = *geo.grid();
    let mut ric_ev = Vec::with_capacity(grid.len());
    for (i, (ric, gv)) in geo.curvature.ricci.values().iter().zip(g.values()).enumerate() {
        let ev = generalized_eigenvalues(ric, gv).ok_or(schouten_core::Error::Cholesky { node: i })?;
        ric_ev.extend(ev);
    }
    let mut sigma = Vec::new();
    for (k, t) in m.functional.t_values.iter().enumerate() {
        let t = t.value(&format!("functional.t_values[{k}]"))?;
        let spec = sigma_spectrum(&schouten_t(&geo.curvature, g, t)?, g)?;
        let inside = spec.iter().filter(|s| s.in_cone).count();
        sigma.push(SigmaSection {
            t,
            sigma1_range: range(spec.iter().map(|s| s.sigma1)),
            sigma2_range: range(spec.iter().map(|s| s.sigma2)),
            cone_fraction: inside as f64 / spec.len() as f64,
        });
    }
    let t = m.functional.t.value("functional.t")?;
    let grad_cap = m.functional.grad_cap.value("functional.grad_cap")?;
    Ok(Report {
        chart: grid.kind(),
        dims: grid.dims(),
        nodes: grid.len(),
        conformal_factor: m.conformal_factor.clone(),
        scalar_range: range(geo.curvature.scalar.values().iter().copied()),
        ricci_eigenvalue_range: range(ric_ev),
        sigma,
        total_sigma2: total_sigma2(&geo)?,
        yamabe_quotient: yamabe_quotient(&geo)?,
        q_range: range(q_curvature(&geo)?.values().iter().copied()),
        pinching: pinching_margin(&geo, t, &m.candidates(&grid)?, grad_cap)?,
    })
}
