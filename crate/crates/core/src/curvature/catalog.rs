//! Metrics with closed-form curvature.

use alloc::vec::Vec;

use super::{Christoffel, ChristoffelField, CurvatureBundle};
use crate::conformal::{conformal_geometry, ConformalFactor};
use crate::error::{Error, Result};
use crate::expr::{evaluate, ExprAst};
use crate::grid::{ChartGrid, ChartKind, MetricField, ScalarField, SymTensorField};
use crate::linalg::Sym3;

/// A metric together with its curvature.
#[derive(Debug, Clone, PartialEq)]
pub struct Geometry {
    pub metric: MetricField,
    pub curvature: CurvatureBundle,
}

impl Geometry {
    /// Curvature by the finite-difference engine.
    pub fn from_metric(metric: MetricField) -> Result<Self> {
        let curvature = super::curvature_of(&metric)?;
        Ok(Geometry { metric, curvature })
    }

    pub fn grid(&self) -> &ChartGrid {
        self.metric.grid()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CatalogSpec {
    FlatTorus,
    RoundS3 { radius: f64 },
    /// Round unit sphere with the Hopf fibres scaled by `fiber_scale`.
    BergerS3 { fiber_scale: f64 },
    /// `e^{-2w}` times the round unit metric.
    ConformallyRoundS3 { w: ExprAst },
}

impl CatalogSpec {
    pub fn name(&self) -> &'static str {
        match self {
            CatalogSpec::FlatTorus => "flat_torus",
            CatalogSpec::RoundS3 { .. } => "round_s3",
            CatalogSpec::BergerS3 { .. } => "berger_s3",
            CatalogSpec::ConformallyRoundS3 { .. } => "conformally_round_s3",
        }
    }

    pub fn chart(&self) -> ChartKind {
        match self {
            CatalogSpec::FlatTorus => ChartKind::Torus3,
            _ => ChartKind::S3Band,
        }
    }
}

fn require_chart(spec: &CatalogSpec, grid: &ChartGrid) -> Result<()> {
    if grid.kind() == spec.chart() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(alloc::format!(
            "{} lives on the {:?} chart, not {:?}",
            spec.name(),
            spec.chart(),
            grid.kind()
        )))
    }
}

/// Metric and exact curvature of a catalog entry on `grid`.
///
/// `conformally_round_s3` differentiates `w` on the grid and applies the
/// conformal transformation laws to the exact round data.
pub fn catalog(spec: &CatalogSpec, grid: &ChartGrid) -> Result<Geometry> {
    require_chart(spec, grid)?;
    let grid = *grid;
    let n = grid.len();
    match spec {
        CatalogSpec::FlatTorus => Ok(Geometry {
            metric: MetricField::reference(grid),
            curvature: CurvatureBundle {
                gamma: ChristoffelField::new(grid, alloc::vec![[Sym3::ZERO; 3]; n]),
                ricci: SymTensorField::zeros(grid),
                scalar: ScalarField::constant(grid, 0.0),
            },
        }),
        &CatalogSpec::RoundS3 { radius } => {
            if !(radius > 0.0) || !radius.is_finite() {
                return Err(Error::InvalidParameter(alloc::format!("radius must be positive, got {radius}")));
            }
            let frames: Vec<_> = (0..n).map(|i| grid.reference(i)).collect();
            let rho2 = radius * radius;
            let metric = MetricField::new(SymTensorField::new(
                grid,
                frames.iter().map(|f| f.metric() * rho2).collect(),
            )?)?;
            Ok(Geometry {
                metric,
                curvature: CurvatureBundle {
                    gamma: ChristoffelField::new(grid, frames.iter().map(|f| f.gamma).collect()),
                    ricci: SymTensorField::from_vec_unchecked(grid, frames.iter().map(|f| f.ricci).collect()),
                    scalar: ScalarField::constant(grid, 6.0 / rho2),
                },
            })
        }
        &CatalogSpec::BergerS3 { fiber_scale } => berger(grid, fiber_scale),
        CatalogSpec::ConformallyRoundS3 { w } => {
            let round = catalog(&CatalogSpec::RoundS3 { radius: 1.0 }, &grid)?;
            let wf = evaluate(w, &grid)?;
            let cf = ConformalFactor::on(wf, &round)?;
            conformal_geometry(&round, &cf)
        }
    }
}

/// `g = ĝ + (ε² − 1) σ₃²` with `σ₃ = sin²r dθ + cos²r dφ` dual to the unit Hopf field.
fn berger(grid: ChartGrid, eps: f64) -> Result<Geometry> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::InvalidParameter(alloc::format!("fiber_scale must be positive, got {eps}")));
    }
    let k = eps * eps - 1.0;
    let n = grid.len();
    let mut metric = Vec::with_capacity(n);
    let mut gamma: Vec<Christoffel> = Vec::with_capacity(n);
    let mut ricci = Vec::with_capacity(n);
    for node in 0..n {
        let r = grid.coords(node)[0];
        let (s, c) = (libm::sin(r), libm::cos(r));
        let (s2, c2) = (s * s, c * c);
        let sigma = [0.0, s2, c2];
        let round = Sym3::diag(1.0, s2, c2);
        let fiber = Sym3::outer(&sigma);
        let g = round + fiber * k;
        // Only ∂_r of the metric is nonzero.
        let mut dg = Sym3::ZERO;
        dg.set(1, 1, 2.0 * s * c + 4.0 * k * s2 * s * c);
        dg.set(2, 2, -2.0 * s * c - 4.0 * k * c2 * c * s);
        dg.set(1, 2, 2.0 * k * s * c * (c2 - s2));
        let gi = g.inverse().ok_or(Error::NotPositiveDefinite { node })?;
        // Γ^k_ij = ½ g^{kl}(∂_i g_jl + ∂_j g_il − ∂_l g_ij) with ∂ = δ_{·0} ∂_r
        let mut gm = [Sym3::ZERO; 3];
        for (kk, out) in gm.iter_mut().enumerate() {
            for i in 0..3 {
                for j in i..3 {
                    let mut v = 0.0;
                    for l in 0..3 {
                        let a = if i == 0 { dg.get(j, l) } else { 0.0 };
                        let b = if j == 0 { dg.get(i, l) } else { 0.0 };
                        let d = if l == 0 { dg.get(i, j) } else { 0.0 };
                        v += gi.get(kk, l) * (a + b - d);
                    }
                    out.set(i, j, 0.5 * v);
                }
            }
        }
        let horizontal = round - fiber;
        ricci.push(horizontal * (4.0 - 2.0 * eps * eps) + fiber * (2.0 * eps * eps * eps * eps));
        gamma.push(gm);
        metric.push(g);
    }
    Ok(Geometry {
        metric: MetricField::new(SymTensorField::new(grid, metric)?)?,
        curvature: CurvatureBundle {
            gamma: ChristoffelField::new(grid, gamma),
            ricci: SymTensorField::new(grid, ricci)?,
            scalar: ScalarField::constant(grid, 8.0 - 2.0 * eps * eps),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_scaling() {
        let grid = ChartGrid::s3_band(8).unwrap();
        for rho in [0.5, 1.0, 3.0] {
            let geo = catalog(&CatalogSpec::RoundS3 { radius: rho }, &grid).unwrap();
            assert!(geo.curvature.scalar.values().iter().all(|r| (r - 6.0 / (rho * rho)).abs() < 1e-14));
            assert!(geo.curvature.trace_defect(&geo.metric).unwrap() < 1e-12);
        }
        assert!(catalog(&CatalogSpec::RoundS3 { radius: 0.0 }, &grid).is_err());
    }

    #[test]
    fn berger_trace_is_exact() {
        let grid = ChartGrid::s3_band(16).unwrap();
        for eps in [0.7, 1.0, 1.3] {
            let geo = catalog(&CatalogSpec::BergerS3 { fiber_scale: eps }, &grid).unwrap();
            assert!(geo.curvature.trace_defect(&geo.metric).unwrap() < 1e-10);
        }
    }

    #[test]
    fn berger_at_unit_scale_is_round() {
        let grid = ChartGrid::s3_band(8).unwrap();
        let b = catalog(&CatalogSpec::BergerS3 { fiber_scale: 1.0 }, &grid).unwrap();
        let r = catalog(&CatalogSpec::RoundS3 { radius: 1.0 }, &grid).unwrap();
        for (x, y) in b.curvature.gamma.values().iter().zip(r.curvature.gamma.values()) {
            for k in 0..3 {
                assert!((x[k] - y[k]).max_abs() < 1e-12);
            }
        }
    }

    #[test]
    fn wrong_chart_is_rejected() {
        let torus = ChartGrid::torus([4, 4, 4]).unwrap();
        assert!(catalog(&CatalogSpec::RoundS3 { radius: 1.0 }, &torus).is_err());
    }
}
