//! Q-curvature and the Paneitz operator.

use alloc::vec::Vec;

use super::{gradient, hessian, inner, laplacian, Geometry};
use crate::error::Result;
use crate::grid::{same_grid, ScalarField};

/// `Q = −¼ ΔR − 2|Ric|² + (23/32) R²`.
pub fn q_curvature(geometry: &Geometry) -> Result<ScalarField> {
    let g = &geometry.metric;
    let b = &geometry.curvature;
    let ginv = g.inverse()?;
    let lap_r = laplacian(g, &b.gamma, b.scalar.values())?;
    let values = (0..g.grid().len())
        .map(|i| {
            let r = b.scalar.values()[i];
            -0.25 * lap_r[i] - 2.0 * b.ricci.values()[i].norm_sq_with(&ginv[i]) + 23.0 / 32.0 * r * r
        })
        .collect();
    Ok(ScalarField::from_vec_unchecked(*g.grid(), values))
}

/// `Pφ = Δ²φ + div((4 Ric − (5/4) R g)∇φ) − ½ Q φ`.
///
/// The divergence is expanded with the contracted Bianchi identity,
/// `∇_i(4 Ric − (5/4) R g)^{ij} = (3/4) ∇^j R`, so only scalar fields are
/// differenced.
pub fn paneitz_apply(geometry: &Geometry, phi: &ScalarField) -> Result<ScalarField> {
    same_grid(phi.grid(), geometry.grid())?;
    let g = &geometry.metric;
    let b = &geometry.curvature;
    let grid = *g.grid();
    let ginv = g.inverse()?;
    let q = q_curvature(geometry)?;
    let lap = laplacian(g, &b.gamma, phi.values())?;
    let bilap = laplacian(g, &b.gamma, &lap)?;
    let dphi = gradient(&grid, phi.values());
    let hess = hessian(&grid, phi.values(), &dphi, b.gamma.values());
    let dr = gradient(&grid, b.scalar.values());
    let values: Vec<f64> = (0..grid.len())
        .map(|i| {
            let m = (b.ricci.values()[i] * 4.0 - g.values()[i] * (1.25 * b.scalar.values()[i])).raise(&ginv[i]);
            bilap[i] + m.frobenius(&hess[i]) + 0.75 * inner(&ginv[i], &dr[i], &dphi[i])
                - 0.5 * q.values()[i] * phi.values()[i]
        })
        .collect();
    Ok(ScalarField::from_vec_unchecked(grid, values))
}
