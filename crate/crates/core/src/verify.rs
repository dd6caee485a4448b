//! Oracle suites for the algebraic and integral identities behind the
//! continuation argument.
//!
//! Exact-algebra suites run on random samples and compare at machine
//! precision. Grid suites compare two discretizations of the same continuum
//! quantity; their gaps are `O(h²)` and are judged either against a stated
//! tolerance or through [`refinement`].

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::conformal::{conformal_geometry, total_sigma2, transform_schouten_t, transform_scalar, ConformalFactor};
use crate::curvature::{
    cone_sample, curvature_of, l_t_coeff, laplacian, newton_transform_at, q_curvature, schouten_t, sigma1,
    sigma2, Geometry,
};
use crate::error::Result;
use crate::grid::{dot, ChartGrid, ChartKind, MetricField, ScalarField, SymTensorField};
use crate::linalg::{generalized_eigenvalues, Mat3, Sym3};

/// Which gap a report is judged by.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Criterion {
    Absolute,
    Relative,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct IdentityReport {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub abs_gap: f64,
    /// Gap over the scale stated in `detail` (largest term, or `|rhs|`).
    pub rel_gap: f64,
    pub tolerance: f64,
    pub criterion: Criterion,
    pub pass: bool,
    /// Largest active spacing, zero for grid-free suites.
    pub grid_h: f64,
    /// Worst node, when the gap is localized.
    pub node: Option<usize>,
    pub detail: String,
}

impl IdentityReport {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        name: impl Into<String>,
        lhs: f64,
        rhs: f64,
        scale: f64,
        tolerance: f64,
        criterion: Criterion,
        grid_h: f64,
        node: Option<usize>,
        detail: impl Into<String>,
    ) -> Self {
        let abs_gap = (lhs - rhs).abs();
        let rel_gap = if scale > 0.0 { abs_gap / scale } else { abs_gap };
        let gap = match criterion {
            Criterion::Absolute => abs_gap,
            Criterion::Relative => rel_gap,
        };
        IdentityReport {
            name: name.into(),
            lhs,
            rhs,
            abs_gap,
            rel_gap,
            tolerance,
            criterion,
            pass: gap <= tolerance && gap.is_finite(),
            grid_h,
            node,
            detail: detail.into(),
        }
    }

    /// An inequality `lhs > rhs` (or `≥` when `strict` is false) reported
    /// through the same record; `abs_gap` holds the signed margin.
    pub fn inequality(name: impl Into<String>, lhs: f64, rhs: f64, strict: bool, grid_h: f64, node: Option<usize>, detail: impl Into<String>) -> Self {
        let margin = lhs - rhs;
        let pass = if strict { margin > 0.0 } else { margin >= 0.0 };
        IdentityReport {
            name: name.into(),
            lhs,
            rhs,
            abs_gap: margin,
            rel_gap: if rhs != 0.0 { margin / rhs.abs() } else { margin },
            tolerance: 0.0,
            criterion: Criterion::Absolute,
            pass: pass && margin.is_finite(),
            grid_h,
            node,
            detail: detail.into(),
        }
    }
}

/// Relative tolerance of grid suites: `FD_TOL_FACTOR · h²`.
pub const FD_TOL_FACTOR: f64 = 10.0;

/// Tolerance of exact-algebra suites.
pub const ALGEBRA_TOL: f64 = 1e-12;

/// A deterministic smooth field for the chart.
///
/// Torus: three Fourier modes with wave numbers in `{-2, …, 2}` and random
/// phases. Band: `c₀ + Σ_{m ≤ 3} c_m cos(2 m r)`, which extend smoothly across
/// both poles.
pub fn random_smooth_field(grid: &ChartGrid, seed: u64, amplitude: f64) -> ScalarField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match grid.kind() {
        ChartKind::Torus3 => {
            let len: Vec<f64> = grid.ranges().iter().map(|r| r[1] - r[0]).collect();
            let modes: Vec<([f64; 3], f64, f64)> = (0..3)
                .map(|_| {
                    let mut k = [0.0; 3];
                    while k == [0.0; 3] {
                        for (a, ka) in k.iter_mut().enumerate() {
                            *ka = if grid.is_active(a) {
                                rng.gen_range(-2i32..=2) as f64 * 2.0 * core::f64::consts::PI / len[a]
                            } else {
                                0.0
                            };
                        }
                    }
                    (k, rng.gen_range(0.0..core::f64::consts::TAU), rng.gen_range(-amplitude..amplitude))
                })
                .collect();
            let c0 = rng.gen_range(-amplitude..amplitude);
            ScalarField::from_fn(*grid, |x| {
                c0 + modes
                    .iter()
                    .map(|(k, ph, a)| a * libm::sin(k[0] * x[0] + k[1] * x[1] + k[2] * x[2] + ph))
                    .sum::<f64>()
            })
        }
        ChartKind::S3Band => {
            let c: Vec<f64> = (0..4).map(|_| rng.gen_range(-amplitude..amplitude)).collect();
            ScalarField::from_fn(*grid, |x| {
                c.iter()
                    .enumerate()
                    .map(|(m, cm)| cm * libm::cos(2.0 * m as f64 * x[0]))
                    .sum()
            })
        }
    }
}

/// The five background integrals on the right of the integral
/// transformation identity, in order:
/// `∫σ₂`, `⅛∫R|∇u|²`, `−¼∫|∇u|⁴`, `½∫Δu|∇u|²`, `−½∫A¹(∇u,∇u)`.
pub fn lemma51_terms(geometry: &Geometry, u: &ConformalFactor) -> Result<[f64; 5]> {
    let g = &geometry.metric;
    let ginv = g.inverse()?;
    let w = g.volume_weights();
    let a1 = schouten_t(&geometry.curvature, g, 1.0)?;
    let r = geometry.curvature.scalar.values();
    let mut t = [0.0; 5];
    for i in 0..w.len() {
        let gs = u.grad_sq()[i];
        let up = ginv[i].apply(&u.du()[i]);
        t[0] += sigma2(&a1.values()[i], &ginv[i]) * w[i];
        t[1] += 0.125 * r[i] * gs * w[i];
        t[2] += -0.25 * gs * gs * w[i];
        t[3] += 0.5 * u.laplacian()[i] * gs * w[i];
        t[4] += -0.5 * a1.values()[i].quad(&up) * w[i];
    }
    Ok(t)
}

/// `∫σ₂(g̃^{-1}A¹_{g̃}) e^{-4u} dV_g` against the five background integrals.
pub fn check_lemma51(geometry: &Geometry, u: &ScalarField) -> Result<IdentityReport> {
    let cf = ConformalFactor::on(u.clone(), geometry)?;
    let tilde = conformal_geometry(geometry, &cf)?;
    let gt = &tilde.metric;
    let gtinv = gt.inverse()?;
    let a1t = schouten_t(&tilde.curvature, gt, 1.0)?;
    let w = geometry.metric.volume_weights();
    let lhs: f64 = (0..w.len())
        .map(|i| sigma2(&a1t.values()[i], &gtinv[i]) * libm::exp(-4.0 * u.values()[i]) * w[i])
        .sum();
    // Second route: the engine differentiates the conformal metric itself.
    let engine = curvature_of(gt)?;
    let a1e = schouten_t(&engine, gt, 1.0)?;
    let lhs_engine: f64 = (0..w.len())
        .map(|i| sigma2(&a1e.values()[i], &gtinv[i]) * libm::exp(-4.0 * u.values()[i]) * w[i])
        .sum();
    let terms = lemma51_terms(geometry, &cf)?;
    let rhs: f64 = terms.iter().sum();
    let scale = terms.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let h = geometry.grid().h_max();
    Ok(IdentityReport::new(
        "lemma51",
        lhs,
        rhs,
        scale,
        FD_TOL_FACTOR * h * h,
        Criterion::Relative,
        h,
        None,
        format!("lhs by the transformation law; lhs by recomputed curvature = {lhs_engine:e}; relative to the largest right-hand term; terms = {terms:?}"),
    ))
}

/// `∫|∇²u|² + ∫Ric(∇u,∇u) − ∫(Δu)² = 0`.
pub fn check_bochner(geometry: &Geometry, u: &ScalarField) -> Result<IdentityReport> {
    let cf = ConformalFactor::on(u.clone(), geometry)?;
    let g = &geometry.metric;
    let ginv = g.inverse()?;
    let w = g.volume_weights();
    let mut hess2 = 0.0;
    let mut ric = 0.0;
    let mut lap2 = 0.0;
    for i in 0..w.len() {
        hess2 += cf.hessian()[i].norm_sq_with(&ginv[i]) * w[i];
        let up = ginv[i].apply(&cf.du()[i]);
        ric += geometry.curvature.ricci.values()[i].quad(&up) * w[i];
        lap2 += cf.laplacian()[i] * cf.laplacian()[i] * w[i];
    }
    let scale = hess2.abs().max(ric.abs()).max(lap2.abs());
    let h = geometry.grid().h_max();
    Ok(IdentityReport::new(
        "bochner",
        hess2 + ric,
        lap2,
        scale,
        FD_TOL_FACTOR * h * h,
        Criterion::Relative,
        h,
        None,
        format!("hessian^2 = {hess2:e}, ricci term = {ric:e}, laplacian^2 = {lap2:e}"),
    ))
}

/// `P₂(t) = 3t²/16 − 11t/24 + 17/60`.
pub fn p2(t: f64) -> f64 {
    3.0 * t * t / 16.0 - 11.0 * t / 24.0 + 17.0 / 60.0
}

/// `(1/16)(1 − t)(5 − 3t) = (1/24)(7/10 − t) + P₂(t)` on the samples, and
/// positivity of `P₂` through its discriminant and vertex.
pub fn check_p2(tsamples: &[f64]) -> Vec<IdentityReport> {
    let mut worst = (0.0f64, 0.0, 0.0, 0.0);
    for &t in tsamples {
        let lhs = (1.0 - t) * (5.0 - 3.0 * t) / 16.0;
        let rhs = (0.7 - t) / 24.0 + p2(t);
        let scale = lhs.abs().max(rhs.abs()).max(1.0);
        let gap = (lhs - rhs).abs() / scale;
        if gap >= worst.0 {
            worst = (gap, lhs, rhs, t);
        }
    }
    let (_, lhs, rhs, t) = worst;
    let disc = (11.0 / 24.0) * (11.0 / 24.0) - 4.0 * (3.0 / 16.0) * (17.0 / 60.0);
    let vertex = 11.0 / 9.0;
    let min_sample = tsamples.iter().map(|&t| p2(t)).fold(f64::INFINITY, f64::min);
    alloc::vec![
        IdentityReport::new(
            "p2_decomposition",
            lhs,
            rhs,
            lhs.abs().max(rhs.abs()).max(1.0),
            ALGEBRA_TOL,
            Criterion::Relative,
            0.0,
            None,
            format!("worst of {} samples at t = {t}", tsamples.len()),
        ),
        IdentityReport::inequality("p2_discriminant_negative", 0.0, disc, true, 0.0, None, "0 > (11/24)^2 - 4(3/16)(17/60)"),
        IdentityReport::inequality(
            "p2_positive",
            min_sample.min(p2(vertex)),
            0.0,
            true,
            0.0,
            None,
            format!("vertex t = 11/9, P2 = {:.10} (7/2160)", p2(vertex)),
        ),
    ]
}

fn random_metric(rng: &mut ChaCha8Rng) -> Sym3 {
    let mut m: Mat3 = [[0.0; 3]; 3];
    for row in m.iter_mut() {
        for v in row.iter_mut() {
            *v = rng.gen_range(-1.0..1.0);
        }
    }
    // M Mᵀ + c I stays safely positive definite.
    Sym3::IDENTITY.congruence(&m) + Sym3::IDENTITY * rng.gen_range(0.2..2.0)
}

fn random_sym(rng: &mut ChaCha8Rng, scale: f64) -> Sym3 {
    let mut s = Sym3::ZERO;
    for v in s.0.iter_mut() {
        *v = rng.gen_range(-scale..scale);
    }
    s
}

/// Cone tensor with prescribed `g`-eigenvalues: `A = L diag(λ) Lᵀ` for `g = L Lᵀ`.
fn with_eigenvalues(g: &Sym3, ev: [f64; 3], rng: &mut ChaCha8Rng) -> Sym3 {
    let l = crate::linalg::cholesky(g).expect("positive definite");
    // A random rotation from Gram–Schmidt on a random frame.
    let mut q: Mat3 = [[0.0; 3]; 3];
    for i in 0..3 {
        let mut v = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
        for row in q.iter().take(i) {
            let d: f64 = (0..3).map(|k| v[k] * row[k]).sum();
            for k in 0..3 {
                v[k] -= d * row[k];
            }
        }
        let n = libm::sqrt(v.iter().map(|x| x * x).sum());
        for k in 0..3 {
            q[i][k] = v[k] / n;
        }
    }
    let lq = crate::linalg::matmul(&l, &crate::linalg::transpose(&q));
    Sym3::diag(ev[0], ev[1], ev[2]).congruence(&lq)
}

/// An eigenvalue triple drawn uniformly from a box and kept if it lies in Γ₂⁺.
pub fn sample_cone_triple(rng: &mut ChaCha8Rng) -> [f64; 3] {
    loop {
        let ev = [rng.gen_range(-3.0..5.0), rng.gen_range(-3.0..5.0), rng.gen_range(-3.0..5.0)];
        if cone_sample(ev).in_cone {
            return ev;
        }
    }
}

/// `σ₂(g^{-1}A^t) = σ₂(g^{-1}A¹) + (1 − t)(5 − 3t) σ₁(g^{-1}A¹)²` with
/// `A¹ = Ric − (R/4) g` for random `(Ric, g, t)`.
pub fn check_sigma2_shift(samples: usize, seed: u64) -> IdentityReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = (0.0f64, 0.0, 0.0, 0usize);
    for k in 0..samples {
        let g = random_metric(&mut rng);
        let gi = g.inverse().expect("positive definite");
        let ric = random_sym(&mut rng, 3.0);
        let r = ric.trace_with(&gi);
        let t = rng.gen_range(-2.0..1.0);
        let a1 = ric - g * (0.25 * r);
        let at = ric - g * (0.25 * t * r);
        let lhs = sigma2(&at, &gi);
        let s1 = sigma1(&a1, &gi);
        let rhs = sigma2(&a1, &gi) + (1.0 - t) * (5.0 - 3.0 * t) * s1 * s1;
        let scale = sigma2(&a1, &gi).abs().max((1.0 - t) * (5.0 - 3.0 * t) * s1 * s1).max(f64::MIN_POSITIVE);
        let gap = (lhs - rhs).abs() / scale;
        if gap >= worst.0 {
            worst = (gap, lhs, rhs, k);
        }
    }
    let (gap, lhs, rhs, k) = worst;
    let scale = if gap > 0.0 { (lhs - rhs).abs() / gap } else { 1.0 };
    IdentityReport::new(
        "sigma2_shift",
        lhs,
        rhs,
        scale,
        ALGEBRA_TOL,
        Criterion::Relative,
        0.0,
        None,
        format!("worst of {samples} random samples at sample {k}"),
    )
}

/// `σ₂(g^{-1}A¹)` from eigenvalues against `−½|Ric|² + (3/16)R²`.
pub fn check_sigma2_dual(samples: usize, seed: u64) -> IdentityReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = (0.0f64, 0.0, 0.0, 1.0, 0usize);
    for k in 0..samples {
        let g = random_metric(&mut rng);
        let gi = g.inverse().expect("positive definite");
        let ric = random_sym(&mut rng, 3.0);
        let r = ric.trace_with(&gi);
        let a1 = ric - g * (0.25 * r);
        let ev = generalized_eigenvalues(&a1, &g).expect("positive definite");
        let lhs = cone_sample(ev).sigma2;
        let norms = 0.5 * ric.norm_sq_with(&gi);
        let rhs = -norms + 3.0 / 16.0 * r * r;
        let scale = norms.max(3.0 / 16.0 * r * r);
        let gap = (lhs - rhs).abs() / scale;
        if gap >= worst.0 {
            worst = (gap, lhs, rhs, scale, k);
        }
    }
    let (_, lhs, rhs, scale, k) = worst;
    IdentityReport::new(
        "sigma2_dual_formula",
        lhs,
        rhs,
        scale,
        ALGEBRA_TOL,
        Criterion::Relative,
        0.0,
        None,
        format!("eigenvalue route vs norm route, worst of {samples} at sample {k}, relative to the larger norm term"),
    )
}

/// Newton's inequality, both matrix inequalities for `A ∈ Γ₂⁺` and ellipticity
/// of `𝓛^t` for `t ≤ 2/3`, on random cone samples. Each check reports its
/// smallest margin; a violation fails the report.
pub fn check_cone_inequalities(samples: usize, seed: u64) -> Vec<IdentityReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut newton = (f64::INFINITY, 0usize);
    let mut upper = (f64::INFINITY, 0usize);
    let mut lower = (f64::INFINITY, 0usize);
    let mut ellip = (f64::INFINITY, 0usize);
    for k in 0..samples {
        let ev = sample_cone_triple(&mut rng);
        let g = random_metric(&mut rng);
        let gi = g.inverse().expect("positive definite");
        let a = with_eigenvalues(&g, ev, &mut rng);
        let s = cone_sample(ev);
        // Relative margins keep the test scale free.
        let scale = ev.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let m_newton = (s.sigma1 - libm::sqrt(3.0 * s.sigma2)) / scale + ALGEBRA_TOL;
        let t1 = newton_transform_at(&a, &g, &gi);
        let m_upper = generalized_eigenvalues(&t1, &g).unwrap()[0] / scale;
        let plus = a + g * (s.sigma1 / 3.0);
        let m_lower = generalized_eigenvalues(&plus, &g).unwrap()[0] / scale;
        let t = rng.gen_range(-2.0..2.0 / 3.0);
        let m_ellip = generalized_eigenvalues(&l_t_coeff(&a, &g, &gi, t), &g).unwrap()[0] / scale;
        for (slot, m) in [(&mut newton, m_newton), (&mut upper, m_upper), (&mut lower, m_lower), (&mut ellip, m_ellip)] {
            if !(m >= slot.0) {
                *slot = (m, k);
            }
        }
    }
    let mk = |name: &str, (m, k): (f64, usize), what: &str| {
        IdentityReport::inequality(name, m, 0.0, true, 0.0, None, format!("{what}; smallest relative margin at sample {k} of {samples}"))
    };
    alloc::vec![
        mk("newton_inequality", newton, "sigma1 - sqrt(3 sigma2) + 1e-12 > 0"),
        mk("cone_upper_bound", upper, "-A + sigma1 g positive definite"),
        mk("cone_lower_bound", lower, "A + sigma1 g / 3 positive definite"),
        mk("lt_ellipticity", ellip, "L^t positive definite for t <= 2/3"),
    ]
}

/// Boundary triples with `σ₂ = 0` must be rejected by the cone test.
pub fn check_cone_boundary(samples: usize, seed: u64) -> IdentityReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut accepted = 0usize;
    let mut first = None;
    for k in 0..samples {
        // (a, b, c) with c = −ab/(a+b) has σ₂ = 0 exactly when the products
        // are representable; integer-valued triples keep it exact.
        let a = rng.gen_range(1i32..20) as f64;
        let b = rng.gen_range(1i32..20) as f64;
        let c = -(a * b) / (a + b);
        let s = cone_sample([a, b, c]);
        if s.sigma2 == 0.0 && s.in_cone {
            accepted += 1;
            first.get_or_insert(k);
        }
    }
    let ok = cone_sample([2.0, 2.0, -1.0]);
    let accepted = accepted + usize::from(ok.in_cone);
    IdentityReport::new(
        "cone_boundary_rejected",
        accepted as f64,
        0.0,
        1.0,
        0.0,
        Criterion::Absolute,
        0.0,
        first,
        format!("accepted boundary triples out of {samples} plus (2, 2, -1)"),
    )
}

/// `Q − R²/48 ≥ 0` pointwise, then `∫|Ric|² ≤ (23/64)∫R²`, `∫σ₂ ≥ (1/128)∫R²`
/// and the divergence identity `∫ΔR = 0`.
pub fn check_q_corollary(geometry: &Geometry) -> Result<Vec<IdentityReport>> {
    let g = &geometry.metric;
    let b = &geometry.curvature;
    let h = geometry.grid().h_max();
    let ginv = g.inverse()?;
    let w = g.volume_weights();
    let q = q_curvature(geometry)?;
    let r = b.scalar.values();
    let (mut qmin, mut qnode) = (f64::INFINITY, 0);
    for i in 0..w.len() {
        let v = q.values()[i] - r[i] * r[i] / 48.0;
        if v < qmin {
            qmin = v;
            qnode = i;
        }
    }
    let ric2: f64 = (0..w.len()).map(|i| b.ricci.values()[i].norm_sq_with(&ginv[i]) * w[i]).sum();
    let r2: f64 = (0..w.len()).map(|i| r[i] * r[i] * w[i]).sum();
    let s2 = total_sigma2(geometry)?;
    let lap = laplacian(g, &b.gamma, r)?;
    let int_lap = dot(&lap, &w);
    let int_abs_lap: f64 = lap.iter().zip(&w).map(|(l, wv)| l.abs() * wv).sum();
    let hyp = qmin >= 0.0;
    let implied = |name: &str, lhs: f64, rhs: f64, what: &str| {
        let mut rep = IdentityReport::inequality(name, lhs, rhs, false, h, None, what);
        if !hyp {
            rep.pass = true;
            rep.detail = format!("{what}; not asserted, Q < R^2/48 somewhere");
        }
        rep
    };
    let mut q_rep = IdentityReport::inequality("q_minus_r2_over_48", qmin, 0.0, false, h, Some(qnode), "min over nodes of Q - R^2/48");
    if !hyp {
        // A failed hypothesis is an observation about the metric, not a broken identity.
        q_rep.pass = true;
        q_rep.detail = String::from("min over nodes of Q - R^2/48; hypothesis does not hold");
    }
    Ok(alloc::vec![
        q_rep,
        implied("ricci_l2_bound", 23.0 / 64.0 * r2, ric2, "(23/64) int R^2 >= int |Ric|^2"),
        implied("sigma2_lower_bound", s2, r2 / 128.0, "int sigma2 >= (1/128) int R^2"),
        IdentityReport::new(
            "laplacian_integrates_to_zero",
            int_lap,
            0.0,
            int_abs_lap,
            FD_TOL_FACTOR * h * h,
            Criterion::Relative,
            h,
            None,
            "int Delta R dV relative to int |Delta R| dV",
        ),
    ])
}

/// Transformation law for `A^t`: a function of `(A^t_g, u, g, t)`.
pub type SchoutenLaw<'a> = &'a dyn Fn(&SymTensorField, &ConformalFactor, &MetricField, f64) -> Result<SymTensorField>;

/// The law as implemented, with the `du⊗du` sign flipped: a fixture for
/// checking that the dual-route suite detects a wrong law.
pub fn corrupted_law(a: &SymTensorField, u: &ConformalFactor, g: &MetricField, t: f64) -> Result<SymTensorField> {
    let good = transform_schouten_t(a, u, g, t)?;
    let values = good
        .values()
        .iter()
        .zip(u.du())
        .map(|(v, d)| *v - Sym3::outer(d) * 2.0)
        .collect();
    SymTensorField::new(*g.grid(), values)
}

/// Worst `|A_law − A_engine|_{g̃}` over nodes, where the engine differences the
/// conformal metric directly.
pub fn check_transformation_laws(geometry: &Geometry, u: &ScalarField, t: f64) -> Result<Vec<IdentityReport>> {
    check_transformation_laws_with(geometry, u, t, &transform_schouten_t)
}

pub fn check_transformation_laws_with(geometry: &Geometry, u: &ScalarField, t: f64, law: SchoutenLaw<'_>) -> Result<Vec<IdentityReport>> {
    let g = &geometry.metric;
    let cf = ConformalFactor::on(u.clone(), geometry)?;
    let gt = crate::conformal::conformal_metric(g, &cf)?;
    let gtinv = gt.inverse()?;
    let engine = curvature_of(&gt)?;
    let a_law = law(&schouten_t(&geometry.curvature, g, t)?, &cf, g, t)?;
    let a_engine = schouten_t(&engine, &gt, t)?;
    let r_law = transform_scalar(&geometry.curvature.scalar, &cf)?;
    let h = geometry.grid().h_max();

    let (mut worst, mut node, mut scale) = (0.0f64, 0usize, 0.0f64);
    for i in 0..gtinv.len() {
        let d = libm::sqrt((a_law.values()[i] - a_engine.values()[i]).norm_sq_with(&gtinv[i]));
        scale = scale.max(libm::sqrt(a_engine.values()[i].norm_sq_with(&gtinv[i])));
        if d > worst {
            worst = d;
            node = i;
        }
    }
    let (mut rworst, mut rnode, mut rscale) = (0.0f64, 0usize, 0.0f64);
    for i in 0..gtinv.len() {
        let d = (r_law.values()[i] - engine.scalar.values()[i]).abs();
        rscale = rscale.max(engine.scalar.values()[i].abs());
        if d > rworst {
            rworst = d;
            rnode = i;
        }
    }
    let ones = |v: f64| if v > 0.0 { v } else { 1.0 };
    Ok(alloc::vec![
        IdentityReport::new(
            format!("schouten_law_t={t}"),
            worst,
            0.0,
            ones(scale),
            FD_TOL_FACTOR * h * h,
            Criterion::Relative,
            h,
            Some(node),
            "sup over nodes of |A_law - A_engine| in the conformal metric, relative to sup |A_engine|",
        ),
        IdentityReport::new(
            "scalar_law",
            rworst,
            0.0,
            ones(rscale),
            FD_TOL_FACTOR * h * h,
            Criterion::Relative,
            h,
            Some(rnode),
            "sup over nodes of |R_law - R_engine|, relative to sup |R_engine|",
        ),
    ])
}

/// Pointwise bound `A¹_{g̃} < (3 − 2t) σ₁(g̃^{-1}A¹_{g̃}) g̃` for a conformal
/// metric whose `A^t` lies in the cone, reported as the smallest eigenvalue margin.
pub fn check_schouten_bound(geometry: &Geometry, u: &ScalarField, t: f64) -> Result<IdentityReport> {
    let cf = ConformalFactor::on(u.clone(), geometry)?;
    let tilde = conformal_geometry(geometry, &cf)?;
    let gt = &tilde.metric;
    let gtinv = gt.inverse()?;
    let a1 = schouten_t(&tilde.curvature, gt, 1.0)?;
    let at = schouten_t(&tilde.curvature, gt, t)?;
    let (mut worst, mut node) = (f64::INFINITY, 0usize);
    let mut in_cone = true;
    for i in 0..gtinv.len() {
        let a = &a1.values()[i];
        let gv = &gt.values()[i];
        let m = generalized_eigenvalues(&(*gv * ((3.0 - 2.0 * t) * sigma1(a, &gtinv[i])) - *a), gv).unwrap_or([f64::NAN; 3])[0];
        let c = at.values()[i];
        in_cone &= sigma1(&c, &gtinv[i]) > 0.0 && sigma2(&c, &gtinv[i]) > 0.0;
        if !(m >= worst) {
            worst = m;
            node = i;
        }
    }
    let mut rep = IdentityReport::inequality(
        format!("schouten_bound_t={t}"),
        worst,
        0.0,
        true,
        geometry.grid().h_max(),
        Some(node),
        "smallest eigenvalue of (3 - 2t) sigma1 g - A^1 for the conformal metric",
    );
    if !in_cone {
        rep.pass = true;
        rep.detail = String::from("A^t of the conformal metric leaves the cone; bound not asserted");
    }
    Ok(rep)
}

/// Gaps at successive resolutions and the observed orders `log₂(gap_k / gap_{k+1})`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Refinement {
    pub h: Vec<f64>,
    pub gaps: Vec<f64>,
    pub orders: Vec<f64>,
}

impl Refinement {
    /// Every observed order within `2 ± tol`.
    pub fn second_order(&self, tol: f64) -> bool {
        !self.orders.is_empty() && self.orders.iter().all(|p| (p - 2.0).abs() <= tol)
    }
}

pub fn refinement(points: &[(f64, f64)]) -> Refinement {
    let h: Vec<f64> = points.iter().map(|p| p.0).collect();
    let gaps: Vec<f64> = points.iter().map(|p| p.1).collect();
    let orders = points
        .windows(2)
        .map(|w| libm::log(w[0].1 / w[1].1) / libm::log(w[0].0 / w[1].0))
        .collect();
    Refinement { h, gaps, orders }
}
