//! Modified Schouten tensors and the σ₁, σ₂ cone algebra.

use alloc::vec::Vec;

use super::CurvatureBundle;
use crate::error::{Error, Result};
use crate::grid::{same_grid, MetricField, ScalarField, SymTensorField};
use crate::linalg::{cholesky, lower_inverse, sym_eigenvalues, Sym3};

/// Spectral data of `g^{-1}A` at one node.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConeSample {
    /// Ascending.
    pub eigenvalues: [f64; 3],
    pub sigma1: f64,
    pub sigma2: f64,
    /// `σ₁ > 0` and `σ₂ > 0`, both strict.
    pub in_cone: bool,
    /// `min(σ₁, σ₂)`.
    pub cone_margin: f64,
}

/// Cone data from an eigenvalue triple.
pub fn cone_sample(eigenvalues: [f64; 3]) -> ConeSample {
    let [a, b, c] = eigenvalues;
    let sigma1 = a + b + c;
    let sigma2 = a * b + a * c + b * c;
    ConeSample {
        eigenvalues,
        sigma1,
        sigma2,
        in_cone: sigma1 > 0.0 && sigma2 > 0.0,
        cone_margin: sigma1.min(sigma2),
    }
}

/// `σ₁(g^{-1}A)`.
#[inline]
pub fn sigma1(a: &Sym3, ginv: &Sym3) -> f64 {
    a.trace_with(ginv)
}

/// `σ₂(g^{-1}A) = ½(σ₁² − |A|²_g)`.
#[inline]
pub fn sigma2(a: &Sym3, ginv: &Sym3) -> f64 {
    let s1 = a.trace_with(ginv);
    0.5 * (s1 * s1 - a.norm_sq_with(ginv))
}

/// Lowered first Newton transformation `σ₁ g − A`.
#[inline]
pub fn newton_transform_at(a: &Sym3, g: &Sym3, ginv: &Sym3) -> Sym3 {
    *g * sigma1(a, ginv) - *a
}

/// Lowered `𝓛^t(A) = T₁(A) + (1 − t) σ₁(T₁(A)) g = (3 − 2t) σ₁ g − A`.
#[inline]
pub fn l_t_coeff(a: &Sym3, g: &Sym3, ginv: &Sym3, t: f64) -> Sym3 {
    let t1 = newton_transform_at(a, g, ginv);
    t1 + *g * ((1.0 - t) * sigma1(&t1, ginv))
}

/// `A^t = Ric − (t/4) R g`.
pub fn schouten_t(bundle: &CurvatureBundle, g: &MetricField, t: f64) -> Result<SymTensorField> {
    same_grid(bundle.grid(), g.grid())?;
    let values = bundle
        .ricci
        .values()
        .iter()
        .zip(bundle.scalar.values())
        .zip(g.values())
        .map(|((ric, r), gm)| *ric - *gm * (0.25 * t * r))
        .collect();
    Ok(SymTensorField::from_vec_unchecked(*g.grid(), values))
}

/// Eigenvalues of `g^{-1}A` by Cholesky congruence, with σ₁, σ₂ and cone flags.
pub fn sigma_spectrum(a: &SymTensorField, g: &MetricField) -> Result<Vec<ConeSample>> {
    same_grid(a.grid(), g.grid())?;
    a.values()
        .iter()
        .zip(g.values())
        .enumerate()
        .map(|(node, (av, gv))| {
            let l = cholesky(gv).ok_or(Error::Cholesky { node })?;
            let linv = lower_inverse(&l);
            Ok(cone_sample(sym_eigenvalues(&av.congruence(&linv))))
        })
        .collect()
}

/// `σ₂(g^{-1}A¹) = −½|Ric|² + (3/16) R²`.
pub fn sigma2_via_norms(bundle: &CurvatureBundle, g: &MetricField) -> Result<ScalarField> {
    same_grid(bundle.grid(), g.grid())?;
    let ginv = g.inverse()?;
    let values = bundle
        .ricci
        .values()
        .iter()
        .zip(bundle.scalar.values())
        .zip(&ginv)
        .map(|((ric, r), gi)| -0.5 * ric.norm_sq_with(gi) + 3.0 / 16.0 * r * r)
        .collect();
    Ok(ScalarField::from_vec_unchecked(*g.grid(), values))
}

/// `T₁(A) = σ₁(A) g − A`, lowered.
pub fn newton_transform(a: &SymTensorField, g: &MetricField) -> Result<SymTensorField> {
    same_grid(a.grid(), g.grid())?;
    let ginv = g.inverse()?;
    let values = a
        .values()
        .iter()
        .zip(g.values())
        .zip(&ginv)
        .map(|((av, gv), gi)| newton_transform_at(av, gv, gi))
        .collect();
    Ok(SymTensorField::from_vec_unchecked(*g.grid(), values))
}

/// Principal coefficient tensor `𝓛^t(A)`, lowered.
pub fn l_t_operator_coeff(a: &SymTensorField, g: &MetricField, t: f64) -> Result<SymTensorField> {
    same_grid(a.grid(), g.grid())?;
    let ginv = g.inverse()?;
    let values = a
        .values()
        .iter()
        .zip(g.values())
        .zip(&ginv)
        .map(|((av, gv), gi)| l_t_coeff(av, gv, gi, t))
        .collect();
    Ok(SymTensorField::from_vec_unchecked(*g.grid(), values))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cone_membership_is_strict() {
        let s = cone_sample([1.0, 2.0, 3.0]);
        assert_eq!((s.sigma1, s.sigma2, s.in_cone), (6.0, 11.0, true));
        let s = cone_sample([1.0, 1.0, -1.0]);
        assert_eq!((s.sigma2, s.in_cone), (-1.0, false));
        let s = cone_sample([-1.0, 2.0, 2.0]);
        assert_eq!((s.sigma2, s.in_cone), (0.0, false));
    }

    #[test]
    fn newton_and_lt_on_diagonal() {
        let a = Sym3::diag(1.0, 2.0, 3.0);
        let g = Sym3::IDENTITY;
        assert_eq!(newton_transform_at(&a, &g, &g), Sym3::diag(5.0, 4.0, 3.0));
        let l = l_t_coeff(&a, &g, &g, 2.0 / 3.0);
        for (x, y) in l.0.iter().zip(Sym3::diag(9.0, 8.0, 7.0).0) {
            assert!((x - y).abs() < 1e-14);
        }
        assert_eq!(l_t_coeff(&a, &g, &g, 1.0), newton_transform_at(&a, &g, &g));
    }

    #[test]
    fn algebraic_sigma2_matches_pairwise_products() {
        let a = Sym3([1.0, -2.0, 0.5, 0.3, -0.7, 0.2]);
        let g = Sym3([2.0, 1.0, 1.5, 0.1, 0.2, -0.3]);
        let ev = crate::linalg::generalized_eigenvalues(&a, &g).unwrap();
        let s = cone_sample(ev);
        let gi = g.inverse().unwrap();
        assert!((sigma1(&a, &gi) - s.sigma1).abs() < 1e-13);
        assert!((sigma2(&a, &gi) - s.sigma2).abs() < 1e-13);
    }
}
