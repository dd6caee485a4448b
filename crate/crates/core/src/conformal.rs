//! Conformal changes `g̃ = e^{-2u} g`, their transformation laws and the
//! integral functionals built on them.

use alloc::string::String;
use alloc::vec::Vec;

use crate::curvature::{
    gradient, hessian, inner, schouten_t, sigma2, ChristoffelField, CurvatureBundle, Geometry,
};
use crate::error::{Error, Result};
use crate::grid::{dot, same_grid, MetricField, ScalarField, SymTensorField};
use crate::linalg::Sym3;

/// Largest `|u|` accepted when building a conformal metric.
pub const OVERFLOW_GUARD: f64 = 50.0;

/// A conformal factor with its derivatives against a background connection.
#[derive(Debug, Clone, PartialEq)]
pub struct ConformalFactor {
    u: ScalarField,
    du: Vec<[f64; 3]>,
    hess: Vec<Sym3>,
    lap: Vec<f64>,
    grad_sq: Vec<f64>,
}

impl ConformalFactor {
    pub fn new(u: ScalarField, g: &MetricField, gamma: &ChristoffelField) -> Result<Self> {
        same_grid(u.grid(), g.grid())?;
        same_grid(u.grid(), gamma.grid())?;
        let grid = *u.grid();
        let ginv = g.inverse()?;
        let du = gradient(&grid, u.values());
        let hess = hessian(&grid, u.values(), &du, gamma.values());
        let lap = hess.iter().zip(&ginv).map(|(h, gi)| h.trace_with(gi)).collect();
        let grad_sq = du.iter().zip(&ginv).map(|(d, gi)| inner(gi, d, d)).collect();
        Ok(ConformalFactor {
            u,
            du,
            hess,
            lap,
            grad_sq,
        })
    }

    /// Derivatives taken against the geometry's own connection.
    pub fn on(u: ScalarField, geometry: &Geometry) -> Result<Self> {
        Self::new(u, &geometry.metric, &geometry.curvature.gamma)
    }

    pub fn zero(geometry: &Geometry) -> Self {
        let grid = *geometry.metric.grid();
        let n = grid.len();
        ConformalFactor {
            u: ScalarField::constant(grid, 0.0),
            du: alloc::vec![[0.0; 3]; n],
            hess: alloc::vec![Sym3::ZERO; n],
            lap: alloc::vec![0.0; n],
            grad_sq: alloc::vec![0.0; n],
        }
    }

    pub fn u(&self) -> &ScalarField {
        &self.u
    }

    pub fn du(&self) -> &[[f64; 3]] {
        &self.du
    }

    pub fn hessian(&self) -> &[Sym3] {
        &self.hess
    }

    pub fn laplacian(&self) -> &[f64] {
        &self.lap
    }

    pub fn grad_sq(&self) -> &[f64] {
        &self.grad_sq
    }

    /// `sup |∇u|_g`.
    pub fn sup_grad(&self) -> f64 {
        self.grad_sq.iter().fold(0.0, |m, &v| m.max(libm::sqrt(v)))
    }

    fn check_overflow(&self) -> Result<()> {
        match self.u.values().iter().position(|v| v.abs() > OVERFLOW_GUARD) {
            Some(node) => Err(Error::Overflow {
                node,
                value: self.u.values()[node],
            }),
            None => Ok(()),
        }
    }
}

/// `g̃ = e^{-2u} g`.
pub fn conformal_metric(g: &MetricField, u: &ConformalFactor) -> Result<MetricField> {
    same_grid(g.grid(), u.u.grid())?;
    u.check_overflow()?;
    let values = g
        .values()
        .iter()
        .zip(u.u.values())
        .map(|(gv, &uv)| *gv * libm::exp(-2.0 * uv))
        .collect();
    MetricField::new(SymTensorField::new(*g.grid(), values)?)
}

/// The modified Schouten tensor of `e^{-2u} g` at one node:
/// `A^t + ∇²u + (1 − t) Δu g + du⊗du − ((2 − t)/2) |∇u|² g`.
#[inline]
pub fn transform_schouten_at(a_t: &Sym3, g: &Sym3, hess: &Sym3, lap: f64, du: &[f64; 3], grad_sq: f64, t: f64) -> Sym3 {
    *a_t + *hess + Sym3::outer(du) + *g * ((1.0 - t) * lap - 0.5 * (2.0 - t) * grad_sq)
}

/// Modified Schouten tensor of `g̃ = e^{-2u} g` from that of `g`.
pub fn transform_schouten_t(a_t: &SymTensorField, u: &ConformalFactor, g: &MetricField, t: f64) -> Result<SymTensorField> {
    same_grid(a_t.grid(), g.grid())?;
    same_grid(a_t.grid(), u.u.grid())?;
    let values = (0..g.grid().len())
        .map(|i| {
            transform_schouten_at(
                &a_t.values()[i],
                &g.values()[i],
                &u.hess[i],
                u.lap[i],
                &u.du[i],
                u.grad_sq[i],
                t,
            )
        })
        .collect();
    Ok(SymTensorField::from_vec_unchecked(*g.grid(), values))
}

/// `R̃ = e^{2u} (R + 4Δu − 2|∇u|²)`.
pub fn transform_scalar(r: &ScalarField, u: &ConformalFactor) -> Result<ScalarField> {
    same_grid(r.grid(), u.u.grid())?;
    let values = r
        .values()
        .iter()
        .enumerate()
        .map(|(i, rv)| libm::exp(2.0 * u.u.values()[i]) * (rv + 4.0 * u.lap[i] - 2.0 * u.grad_sq[i]))
        .collect();
    Ok(ScalarField::from_vec_unchecked(*r.grid(), values))
}

/// Full geometry of `e^{-2u} g` by the transformation laws: no derivatives of
/// the new metric are taken.
pub fn conformal_geometry(geometry: &Geometry, u: &ConformalFactor) -> Result<Geometry> {
    let g = &geometry.metric;
    let grid = *g.grid();
    let metric = conformal_metric(g, u)?;
    let ginv = g.inverse()?;
    let a1 = schouten_t(&geometry.curvature, g, 1.0)?;
    let a1_new = transform_schouten_t(&a1, u, g, 1.0)?;
    let scalar = transform_scalar(&geometry.curvature.scalar, u)?;
    let ricci = a1_new
        .values()
        .iter()
        .zip(metric.values())
        .zip(scalar.values())
        .map(|((a, gt), r)| *a + *gt * (0.25 * r))
        .collect();
    // Γ̃^k_ij = Γ^k_ij − δ^k_i u_j − δ^k_j u_i + g_ij ∇^k u
    let gamma = geometry
        .curvature
        .gamma
        .values()
        .iter()
        .enumerate()
        .map(|(node, gm)| {
            let d = &u.du[node];
            let up = ginv[node].apply(d);
            let gn = &g.values()[node];
            let mut out = *gm;
            for (k, ok) in out.iter_mut().enumerate() {
                for i in 0..3 {
                    for j in i..3 {
                        let mut v = gn.get(i, j) * up[k];
                        if k == i {
                            v -= d[j];
                        }
                        if k == j {
                            v -= d[i];
                        }
                        ok.set(i, j, ok.get(i, j) + v);
                    }
                }
            }
            out
        })
        .collect();
    Ok(Geometry {
        metric,
        curvature: CurvatureBundle {
            gamma: ChristoffelField::new(grid, gamma),
            ricci: SymTensorField::from_vec_unchecked(grid, ricci),
            scalar,
        },
    })
}

/// `σ₂(g^{-1}A¹)` at every node.
pub fn sigma2_field(geometry: &Geometry) -> Result<ScalarField> {
    let g = &geometry.metric;
    let ginv = g.inverse()?;
    let a1 = schouten_t(&geometry.curvature, g, 1.0)?;
    let values = a1.values().iter().zip(&ginv).map(|(a, gi)| sigma2(a, gi)).collect();
    Ok(ScalarField::from_vec_unchecked(*g.grid(), values))
}

/// `∫ σ₂(g^{-1}A¹) dV_g`.
pub fn total_sigma2(geometry: &Geometry) -> Result<f64> {
    let s = sigma2_field(geometry)?;
    Ok(dot(s.values(), &geometry.metric.volume_weights()))
}

/// `i(g′) = ∫ R_{g′}² e^{-φ} dV_{g′}` for `g′ = e^{-2φ} g`.
pub fn i_functional(geometry: &Geometry, phi: &ConformalFactor) -> Result<f64> {
    phi.check_overflow()?;
    let r = transform_scalar(&geometry.curvature.scalar, phi)?;
    let w = geometry.metric.volume_weights();
    // dV_{g′} = e^{-3φ} dV_g
    Ok(r.values()
        .iter()
        .zip(phi.u.values())
        .zip(&w)
        .map(|((rv, p), wv)| rv * rv * libm::exp(-4.0 * p) * wv)
        .sum())
}

/// One candidate in the sampled infimum.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ISample {
    pub label: String,
    pub sup_grad: f64,
    /// `None` when the candidate was excluded by the gradient cap.
    pub value: Option<f64>,
}

/// Sampled upper bound for the infimum of `i` over `|∇φ| ≤ grad_cap`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct IEstimate {
    pub value: f64,
    pub samples: Vec<ISample>,
    pub warnings: Vec<String>,
}

pub fn estimate_i(geometry: &Geometry, candidates: &[(String, ScalarField)], grad_cap: f64) -> Result<IEstimate> {
    let mut samples = Vec::with_capacity(candidates.len());
    let mut warnings = Vec::new();
    let mut best = f64::INFINITY;
    for (label, phi) in candidates {
        let cf = ConformalFactor::on(phi.clone(), geometry)?;
        let sup_grad = cf.sup_grad();
        if sup_grad > grad_cap {
            warnings.push(alloc::format!(
                "candidate `{label}` skipped: sup |grad phi| = {sup_grad:.6} exceeds grad_cap {grad_cap}"
            ));
            samples.push(ISample {
                label: label.clone(),
                sup_grad,
                value: None,
            });
            continue;
        }
        let v = i_functional(geometry, &cf)?;
        best = best.min(v);
        samples.push(ISample {
            label: label.clone(),
            sup_grad,
            value: Some(v),
        });
    }
    if best.is_infinite() {
        return Err(Error::EmptyAdmissibleSet);
    }
    Ok(IEstimate {
        value: best,
        samples,
        warnings,
    })
}

/// `∫ R dV / (∫ dV)^{1/3}` for this metric.
pub fn yamabe_quotient(geometry: &Geometry) -> Result<f64> {
    let w = geometry.metric.volume_weights();
    let vol: f64 = w.iter().sum();
    Ok(dot(geometry.curvature.scalar.values(), &w) / libm::cbrt(vol))
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PinchingReport {
    pub t: f64,
    pub total_sigma2: f64,
    pub i_samples: Vec<ISample>,
    /// Minimum over admissible samples: an upper bound for the true infimum.
    pub i_estimate: f64,
    pub yamabe_quotient: f64,
    /// `∫σ₂ + (1/24)(7/10 − t) · i_estimate`.
    pub mu_t: f64,
    pub hypothesis_met: bool,
    pub i_is_upper_bound: bool,
    pub warnings: Vec<String>,
}

pub fn pinching_margin(
    geometry: &Geometry,
    t: f64,
    candidates: &[(String, ScalarField)],
    grad_cap: f64,
) -> Result<PinchingReport> {
    if !(t <= 2.0 / 3.0) {
        return Err(Error::InvalidParameter(alloc::format!("pinching margin needs t <= 2/3, got {t}")));
    }
    let total = total_sigma2(geometry)?;
    let est = estimate_i(geometry, candidates, grad_cap)?;
    let mu_t = total + (0.7 - t) / 24.0 * est.value;
    Ok(PinchingReport {
        t,
        total_sigma2: total,
        i_samples: est.samples,
        i_estimate: est.value,
        yamabe_quotient: yamabe_quotient(geometry)?,
        mu_t,
        hypothesis_met: mu_t > 0.0,
        i_is_upper_bound: true,
        warnings: est.warnings,
    })
}
