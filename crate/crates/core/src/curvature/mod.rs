//! Curvature of metric fields: the finite-difference engine, an analytic
//! catalog, the σ-algebra of modified Schouten tensors, Q-curvature and the
//! Paneitz operator.

mod catalog;
mod engine;
mod fourth;
mod sigma;

pub use catalog::{catalog, CatalogSpec, Geometry};
pub use engine::{christoffel, curvature_of};
pub use fourth::{paneitz_apply, q_curvature};
pub use sigma::{
    cone_sample, l_t_coeff, l_t_operator_coeff, newton_transform, newton_transform_at, schouten_t, sigma1, sigma2,
    sigma2_via_norms, sigma_spectrum, ConeSample,
};

use alloc::vec::Vec;

use crate::error::Result;
use crate::grid::{same_grid, ChartGrid, MetricField, Parity, ScalarField, SymTensorField};
use crate::linalg::Sym3;

/// `Γ^k_ij` at one node, indexed `[k]` with the symmetric pair `(i, j)` inside.
pub type Christoffel = [Sym3; 3];

#[derive(Debug, Clone, PartialEq)]
pub struct ChristoffelField {
    grid: ChartGrid,
    values: Vec<Christoffel>,
}

impl ChristoffelField {
    pub(crate) fn new(grid: ChartGrid, values: Vec<Christoffel>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        ChristoffelField { grid, values }
    }

    pub fn grid(&self) -> &ChartGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Christoffel] {
        &self.values
    }
}

/// Christoffel symbols, Ricci tensor and scalar curvature of one metric.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureBundle {
    pub gamma: ChristoffelField,
    pub ricci: SymTensorField,
    pub scalar: ScalarField,
}

impl CurvatureBundle {
    pub fn grid(&self) -> &ChartGrid {
        self.ricci.grid()
    }

    /// Largest `|R - g^{ij} Ric_ij|` over nodes.
    pub fn trace_defect(&self, g: &MetricField) -> Result<f64> {
        same_grid(self.grid(), g.grid())?;
        let ginv = g.inverse()?;
        Ok(self
            .ricci
            .values()
            .iter()
            .zip(&ginv)
            .zip(self.scalar.values())
            .fold(0.0, |m, ((ric, gi), r)| m.max((r - ric.trace_with(gi)).abs())))
    }
}

/// Centred gradient `∂_a f` of a scalar that extends evenly across the band ends.
pub fn gradient(grid: &ChartGrid, f: &[f64]) -> Vec<[f64; 3]> {
    let mut out = alloc::vec![[0.0; 3]; f.len()];
    for a in grid.active_axes() {
        for (o, d) in out.iter_mut().zip(grid.d1(f, a, Parity::EVEN)) {
            o[a] = d;
        }
    }
    out
}

/// `∇²f = ∂_a∂_b f - Γ^k_ab ∂_k f` given the gradient from [`gradient`].
pub fn hessian(grid: &ChartGrid, f: &[f64], df: &[[f64; 3]], gamma: &[Christoffel]) -> Vec<Sym3> {
    let mut out: Vec<Sym3> = gamma
        .iter()
        .zip(df)
        .map(|(gm, d)| -(gm[0] * d[0] + gm[1] * d[1] + gm[2] * d[2]))
        .collect();
    for a in grid.active_axes() {
        for b in grid.active_axes().filter(|&b| b >= a) {
            let dab = grid.d_ab(f, a, b, Parity::EVEN);
            for (o, v) in out.iter_mut().zip(dab) {
                o.set(a, b, o.get(a, b) + v);
            }
        }
    }
    out
}

/// Laplace–Beltrami operator `g^{ab} ∇²_ab f`.
pub fn laplacian(g: &MetricField, gamma: &ChristoffelField, f: &[f64]) -> Result<Vec<f64>> {
    let grid = g.grid();
    let ginv = g.inverse()?;
    let df = gradient(grid, f);
    let hess = hessian(grid, f, &df, gamma.values());
    Ok(hess.iter().zip(&ginv).map(|(h, gi)| h.trace_with(gi)).collect())
}

/// `g^{ab} v_a w_b`.
#[inline]
pub fn inner(ginv: &Sym3, v: &[f64; 3], w: &[f64; 3]) -> f64 {
    let gv = ginv.apply(v);
    gv[0] * w[0] + gv[1] * w[1] + gv[2] * w[2]
}
