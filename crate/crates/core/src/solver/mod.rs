//! Continuation in `t` for `σ₂(g^{-1}A^t_u) = f² e^{4u}`, where `A^t_u` is the
//! modified Schouten tensor of `e^{-2u} g`, from the trivial solution `u = 0`
//! at `t = δ` up to `t₀ ≤ 2/3`.

mod gmres;

pub use gmres::{gmres, GmresOptions, GmresOutcome};

use alloc::string::String;
use alloc::vec::Vec;

use crate::conformal::{conformal_geometry, transform_schouten_at, ConformalFactor};
use crate::curvature::{curvature_of, schouten_t, sigma1, sigma2, Geometry};
use crate::error::{Error, Result};
use crate::grid::{ChartGrid, Parity, ScalarField};
use crate::linalg::{generalized_eigenvalues, Sym3};

/// Largest admissible target parameter.
pub const T_MAX: f64 = 2.0 / 3.0;

/// Background data for the path of equations.
#[derive(Debug, Clone)]
pub struct ProblemSetup {
    geometry: Geometry,
    ginv: Vec<Sym3>,
    delta: f64,
    t0: f64,
    /// `f = σ₂^{1/2}(g^{-1}A^δ)`.
    f: ScalarField,
    f2: Vec<f64>,
}

fn require_positive_scalar(geometry: &Geometry) -> Result<()> {
    let r = &geometry.curvature.scalar;
    let node = (0..r.values().len())
        .min_by(|&a, &b| r.values()[a].total_cmp(&r.values()[b]))
        .unwrap_or(0);
    let value = r.values().get(node).copied().unwrap_or(0.0);
    if value > 0.0 {
        Ok(())
    } else {
        Err(Error::Hypothesis {
            node,
            value,
            message: "R_g > 0 required".into(),
        })
    }
}

impl ProblemSetup {
    pub fn new(geometry: Geometry, delta: f64, t0: f64) -> Result<Self> {
        if !(t0 <= T_MAX) || !t0.is_finite() {
            return Err(Error::InvalidParameter(alloc::format!("t0 must be at most 2/3, got {t0}")));
        }
        if !(delta < t0) || !delta.is_finite() {
            return Err(Error::InvalidParameter(alloc::format!(
                "delta must be below t0, got delta = {delta}, t0 = {t0}"
            )));
        }
        require_positive_scalar(&geometry)?;
        let g = &geometry.metric;
        let ginv = g.inverse()?;
        let a_delta = schouten_t(&geometry.curvature, g, delta)?;
        let mut f2 = Vec::with_capacity(ginv.len());
        for (node, (a, gv)) in a_delta.values().iter().zip(g.values()).enumerate() {
            let ev = generalized_eigenvalues(a, gv).ok_or(Error::Cholesky { node })?;
            if !(ev[0] > 0.0) {
                return Err(Error::Hypothesis {
                    node,
                    value: ev[0],
                    message: alloc::format!("A^delta must be positive definite (delta = {delta})"),
                });
            }
            f2.push(sigma2(a, &ginv[node]));
        }
        let f = ScalarField::new(*g.grid(), f2.iter().map(|v| libm::sqrt(*v)).collect())?;
        Ok(ProblemSetup {
            geometry,
            ginv,
            delta,
            t0,
            f,
            f2,
        })
    }

    /// Prescribed right-hand side `f` on any background, with no curvature
    /// hypotheses. `u = 0` no longer solves the equation at `t = δ`, so this is
    /// meant for evaluating and linearizing the operator, not for continuation.
    pub fn with_rhs(geometry: Geometry, f: ScalarField, delta: f64, t0: f64) -> Result<Self> {
        crate::grid::same_grid(f.grid(), geometry.grid())?;
        let ginv = geometry.metric.inverse()?;
        let f2 = f.values().iter().map(|v| v * v).collect();
        Ok(ProblemSetup {
            geometry,
            ginv,
            delta,
            t0,
            f,
            f2,
        })
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geometry
    }

    pub fn grid(&self) -> &ChartGrid {
        self.geometry.grid()
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn f(&self) -> &ScalarField {
        &self.f
    }

    pub fn sup_f2(&self) -> f64 {
        self.f2.iter().copied().fold(0.0, f64::max)
    }

    pub fn factor(&self, u: ScalarField) -> Result<ConformalFactor> {
        ConformalFactor::on(u, &self.geometry)
    }

    /// `A^t` of `e^{-2u} g` at every node.
    fn transformed(&self, u: &ConformalFactor, t: f64) -> Vec<Sym3> {
        let g = &self.geometry.metric;
        let b = &self.geometry.curvature;
        (0..g.grid().len())
            .map(|i| {
                let gv = &g.values()[i];
                let a_t = b.ricci.values()[i] - *gv * (0.25 * t * b.scalar.values()[i]);
                transform_schouten_at(
                    &a_t,
                    gv,
                    &u.hessian()[i],
                    u.laplacian()[i],
                    &u.du()[i],
                    u.grad_sq()[i],
                    t,
                )
            })
            .collect()
    }
}

/// `δ = min(δ* − margin, t₀ − path_floor)` with `δ* = min 4 λ_min(g^{-1}Ric) / R`.
pub fn pick_delta(geometry: &Geometry, margin: f64, t0: f64, path_floor: f64) -> Result<f64> {
    require_positive_scalar(geometry)?;
    let g = &geometry.metric;
    let b = &geometry.curvature;
    let mut star = f64::INFINITY;
    for (node, (ric, gv)) in b.ricci.values().iter().zip(g.values()).enumerate() {
        let ev = generalized_eigenvalues(ric, gv).ok_or(Error::Cholesky { node })?;
        star = star.min(4.0 * ev[0] / b.scalar.values()[node]);
    }
    let delta = (star - margin).min(t0 - path_floor);
    let a = schouten_t(b, g, delta)?;
    for (node, (av, gv)) in a.values().iter().zip(g.values()).enumerate() {
        let ev = generalized_eigenvalues(av, gv).ok_or(Error::Cholesky { node })?;
        if !(ev[0] > 0.0) {
            return Err(Error::Hypothesis {
                node,
                value: ev[0],
                message: alloc::format!("A^delta is not positive definite at delta = {delta}"),
            });
        }
    }
    Ok(delta)
}

/// `F_t(u) = σ₂(g^{-1}A^t_u) − f² e^{4u}`.
pub fn residual(setup: &ProblemSetup, u: &ConformalFactor, t: f64) -> ScalarField {
    let a = setup.transformed(u, t);
    let values = (0..a.len())
        .map(|i| sigma2(&a[i], &setup.ginv[i]) - setup.f2[i] * libm::exp(4.0 * u.u().values()[i]))
        .collect();
    ScalarField::from_vec_unchecked(*setup.grid(), values)
}

/// Per-node coefficients of the linearized operator
/// `L[v] = M^{ab} ∂_a∂_b v + b^k ∂_k v + c v`.
#[derive(Debug, Clone)]
pub struct Linearization {
    grid: ChartGrid,
    principal: Vec<Sym3>,
    drift: Vec<[f64; 3]>,
    zeroth: Vec<f64>,
}

impl Linearization {
    pub fn new(setup: &ProblemSetup, u: &ConformalFactor, t: f64) -> Self {
        let a = setup.transformed(u, t);
        let gamma = setup.geometry.curvature.gamma.values();
        let n = a.len();
        let mut principal = Vec::with_capacity(n);
        let mut drift = Vec::with_capacity(n);
        let mut zeroth = Vec::with_capacity(n);
        for i in 0..n {
            let gi = &setup.ginv[i];
            let s1 = sigma1(&a[i], gi);
            // T^{ij} = σ₁ g^{ij} − A^{ij}
            let tt = *gi * s1 - a[i].raise(gi);
            let m = tt + *gi * (2.0 * (1.0 - t) * s1);
            let du = &u.du()[i];
            let tdu = tt.apply(du);
            let gdu = gi.apply(du);
            let mut b = [0.0; 3];
            for (k, bk) in b.iter_mut().enumerate() {
                *bk = -m.frobenius(&gamma[i][k]) + 2.0 * tdu[k] - 2.0 * (2.0 - t) * s1 * gdu[k];
            }
            principal.push(m);
            drift.push(b);
            zeroth.push(-4.0 * setup.f2[i] * libm::exp(4.0 * u.u().values()[i]));
        }
        Linearization {
            grid: *setup.grid(),
            principal,
            drift,
            zeroth,
        }
    }

    /// Principal coefficient `M` (raised), positive definite inside the cone for `t ≤ 2/3`.
    pub fn principal(&self) -> &[Sym3] {
        &self.principal
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let grid = &self.grid;
        let mut out: Vec<f64> = v.iter().zip(&self.zeroth).map(|(x, c)| c * x).collect();
        for k in grid.active_axes() {
            for (o, (d, b)) in out.iter_mut().zip(grid.d1(v, k, Parity::EVEN).iter().zip(&self.drift)) {
                *o += b[k] * d;
            }
        }
        for a in grid.active_axes() {
            for b in grid.active_axes().filter(|&b| b >= a) {
                let w = if a == b { 1.0 } else { 2.0 };
                for (o, (d, m)) in out.iter_mut().zip(grid.d_ab(v, a, b, Parity::EVEN).iter().zip(&self.principal)) {
                    *o += w * m.get(a, b) * d;
                }
            }
        }
        out
    }

    pub fn diagonal(&self) -> Vec<f64> {
        let grid = &self.grid;
        (0..self.zeroth.len())
            .map(|i| {
                let mut d = self.zeroth[i];
                for a in grid.active_axes() {
                    d += self.drift[i][a] * grid.d1_self_weight(i, a, Parity::EVEN);
                    for b in grid.active_axes().filter(|&b| b >= a) {
                        let w = if a == b { 1.0 } else { 2.0 };
                        d += w * self.principal[i].get(a, b) * grid.d_ab_self_weight(i, a, b, Parity::EVEN);
                    }
                }
                d
            })
            .collect()
    }
}

/// `L[v] = ⟨T₁(g^{-1}A^t_u), B⟩ − 4 f² e^{4u} v`, the derivative of [`residual`] at `u` along `v`.
pub fn linearize(setup: &ProblemSetup, u: &ConformalFactor, t: f64, v: &ScalarField) -> ScalarField {
    let lin = Linearization::new(setup, u, t);
    ScalarField::from_vec_unchecked(*setup.grid(), lin.apply(v.values()))
}

/// Path diagnostics of one accepted state.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Diagnostics {
    pub sup_u: f64,
    pub inf_u: f64,
    pub sup_grad_u: f64,
    pub harnack_gap: f64,
}

impl Diagnostics {
    pub fn of(u: &ConformalFactor) -> Self {
        let sup_u = u.u().max();
        let inf_u = u.u().min();
        Diagnostics {
            sup_u,
            inf_u,
            sup_grad_u: u.sup_grad(),
            harnack_gap: sup_u - inf_u,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ContinuationState {
    pub t: f64,
    pub u: ConformalFactor,
    pub residual_sup: f64,
    /// Minimum over nodes of `min(σ₁, σ₂)` of `g^{-1}A^t_u`.
    pub cone_margin_min: f64,
    pub cone_margin_node: usize,
    pub newton_iters: usize,
    pub diagnostics: Diagnostics,
}

/// Serializable summary of a [`ContinuationState`].
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PathRecord {
    pub t: f64,
    pub residual_sup: f64,
    pub cone_margin_min: f64,
    pub newton_iters: usize,
    pub sup_u: f64,
    pub inf_u: f64,
    pub sup_grad_u: f64,
    pub harnack_gap: f64,
}

impl ContinuationState {
    /// Evaluates residual, cone margin and diagnostics of `u` at `t`.
    pub fn evaluate(setup: &ProblemSetup, u: ConformalFactor, t: f64, newton_iters: usize) -> Self {
        let res = residual(setup, &u, t);
        let (cone_margin_min, cone_margin_node) = cone_margin(setup, &u, t);
        let diagnostics = Diagnostics::of(&u);
        ContinuationState {
            t,
            u,
            residual_sup: res.sup_abs(),
            cone_margin_min,
            cone_margin_node,
            newton_iters,
            diagnostics,
        }
    }

    pub fn record(&self) -> PathRecord {
        PathRecord {
            t: self.t,
            residual_sup: self.residual_sup,
            cone_margin_min: self.cone_margin_min,
            newton_iters: self.newton_iters,
            sup_u: self.diagnostics.sup_u,
            inf_u: self.diagnostics.inf_u,
            sup_grad_u: self.diagnostics.sup_grad_u,
            harnack_gap: self.diagnostics.harnack_gap,
        }
    }
}

/// `(min over nodes of min(σ₁, σ₂), argmin)` for `g^{-1}A^t_u`.
pub fn cone_margin(setup: &ProblemSetup, u: &ConformalFactor, t: f64) -> (f64, usize) {
    let a = setup.transformed(u, t);
    let mut best = (f64::INFINITY, 0);
    for (i, av) in a.iter().enumerate() {
        let gi = &setup.ginv[i];
        let m = sigma1(av, gi).min(sigma2(av, gi));
        if !(m >= best.0) {
            best = (m, i);
        }
    }
    best
}

#[derive(Debug, Clone, Copy)]
pub struct NewtonOptions {
    pub min_damping: f64,
    pub gmres: GmresOptions,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions {
            min_damping: 1e-6,
            gmres: GmresOptions::default(),
        }
    }
}

/// One damped Newton step at the state's `t`.
///
/// The step solves `L[v] = −F` and is halved until the residual sup-norm
/// decreases and the state stays strictly inside the cone.
pub fn newton_step(setup: &ProblemSetup, state: &ContinuationState, opts: &NewtonOptions) -> Result<ContinuationState> {
    let t = state.t;
    if !(state.cone_margin_min > 0.0) {
        return Err(Error::OutsideCone {
            node: state.cone_margin_node,
        });
    }
    let f = residual(setup, &state.u, t);
    if f.sup_abs() == 0.0 {
        let mut next = state.clone();
        next.newton_iters += 1;
        return Ok(next);
    }
    let lin = Linearization::new(setup, &state.u, t);
    let rhs: Vec<f64> = f.values().iter().map(|v| -v).collect();
    let mut step = alloc::vec![0.0; rhs.len()];
    gmres(&|v| lin.apply(v), &lin.diagonal(), &rhs, &mut step, opts.gmres)?;

    // Residuals this small cannot be resolved by a strict decrease test.
    let floor = 64.0 * f64::EPSILON * setup.sup_f2().max(1.0);
    let base = state.u.u().values();
    let mut lambda = 1.0;
    let mut worst_node = state.cone_margin_node;
    while lambda >= opts.min_damping {
        let trial: Vec<f64> = base.iter().zip(&step).map(|(u, s)| u + lambda * s).collect();
        if trial.iter().all(|v| v.is_finite()) {
            let u = setup.factor(ScalarField::from_vec_unchecked(*setup.grid(), trial))?;
            let next = ContinuationState::evaluate(setup, u, t, state.newton_iters + 1);
            let decreased = next.residual_sup < state.residual_sup || next.residual_sup <= floor;
            if decreased && next.cone_margin_min > 0.0 {
                return Ok(next);
            }
            worst_node = if next.cone_margin_min > 0.0 {
                residual(setup, &next.u, t).argmax_abs()
            } else {
                next.cone_margin_node
            };
        }
        lambda *= 0.5;
    }
    Err(Error::NoDescent {
        damping: lambda,
        node: worst_node,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct ContinuationOptions {
    /// Uniform steps across `[δ, t₀]`.
    pub steps: usize,
    /// Smallest step is `(t₀ − δ) / min_step_divisor`.
    pub min_step_divisor: usize,
    /// Accept when `sup |F| ≤ tol_factor · sup f²`.
    pub tol_factor: f64,
    pub max_newton: usize,
    pub newton: NewtonOptions,
}

impl Default for ContinuationOptions {
    fn default() -> Self {
        ContinuationOptions {
            steps: 64,
            min_step_divisor: 4096,
            tol_factor: 1e-9,
            max_newton: 30,
            newton: NewtonOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum SolveStatus {
    Converged,
    Stalled { last_good_t: f64, reason: String },
}

/// Pointwise checks on `g̃ = e^{-2u} g` at the end of the path.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EndpointChecks {
    /// Smallest eigenvalue of `g̃^{-1}(6 Ric̃ − (3t₀ − 2) R̃ g̃)` over nodes.
    pub lower_pinching_margin: f64,
    /// Smallest eigenvalue of `g̃^{-1}(3(2 − t₀) R̃ g̃ − 6 Ric̃)` over nodes.
    pub upper_pinching_margin: f64,
    pub pinching_ok: bool,
    pub min_ricci_eigenvalue: f64,
    pub ricci_positive: bool,
    pub min_sigma2: f64,
    pub sigma2_positive: bool,
    pub min_scalar: f64,
    pub scalar_positive: bool,
    /// Cone margin of `g̃^{-1}A^{t₀}_{g̃}`.
    pub cone_margin_conformal: f64,
    /// Smallest eigenvalue of `g̃^{-1}((3 − 2t₀) σ₁(A¹_{g̃}) g̃ − A¹_{g̃})`.
    pub schouten_bound_margin: f64,
    /// Residual recomputed from finite-difference curvature of `g̃`.
    pub engine_residual_sup: f64,
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub status: SolveStatus,
    pub delta: f64,
    pub t0: f64,
    pub path: Vec<PathRecord>,
    pub final_state: ContinuationState,
    pub endpoint: Option<EndpointChecks>,
}

impl SolveReport {
    pub fn pinching_ok(&self) -> bool {
        self.endpoint.as_ref().is_some_and(|e| e.pinching_ok)
    }
}

fn newton_solve(
    setup: &ProblemSetup,
    start: &ConformalFactor,
    t: f64,
    tol: f64,
    opts: &ContinuationOptions,
) -> Result<ContinuationState> {
    let mut state = ContinuationState::evaluate(setup, start.clone(), t, 0);
    if !(state.cone_margin_min > 0.0) {
        return Err(Error::OutsideCone {
            node: state.cone_margin_node,
        });
    }
    while state.residual_sup > tol {
        if state.newton_iters >= opts.max_newton {
            return Err(Error::NoDescent {
                damping: 1.0,
                node: residual(setup, &state.u, t).argmax_abs(),
            });
        }
        state = newton_step(setup, &state, &opts.newton)?;
    }
    Ok(state)
}

/// Marches `t` from `δ` to `t₀`, halving the step on failure.
pub fn continuation(setup: &ProblemSetup, opts: &ContinuationOptions) -> Result<SolveReport> {
    let (delta, t0) = (setup.delta, setup.t0);
    let span = t0 - delta;
    let base_dt = span / opts.steps.max(1) as f64;
    let min_dt = span / opts.min_step_divisor.max(1) as f64;
    let tol = opts.tol_factor * setup.sup_f2();

    let zero = ConformalFactor::zero(&setup.geometry);
    let mut state = ContinuationState::evaluate(setup, zero, delta, 0);
    let mut path = alloc::vec![state.record()];
    let mut dt = base_dt;
    let mut status = SolveStatus::Converged;

    while state.t < t0 {
        let mut t_next = state.t + dt;
        if t_next > t0 || t0 - t_next < 1e-12 * span {
            t_next = t0;
        }
        match newton_solve(setup, &state.u, t_next, tol, opts) {
            Ok(next) => {
                state = next;
                path.push(state.record());
                dt = (2.0 * dt).min(base_dt);
            }
            Err(e) => {
                dt *= 0.5;
                if dt < min_dt * (1.0 - 1e-12) {
                    status = SolveStatus::Stalled {
                        last_good_t: state.t,
                        reason: alloc::format!("{e}"),
                    };
                    break;
                }
            }
        }
    }

    let endpoint = match status {
        SolveStatus::Converged => Some(endpoint_checks(setup, &state.u, t0)?),
        SolveStatus::Stalled { .. } => None,
    };
    Ok(SolveReport {
        status,
        delta,
        t0,
        path,
        final_state: state,
        endpoint,
    })
}

fn min_generalized_eigenvalue(a: &Sym3, g: &Sym3, node: usize) -> Result<f64> {
    Ok(generalized_eigenvalues(a, g).ok_or(Error::Cholesky { node })?[0])
}

/// Pinching, Ricci, σ₂ and scalar-curvature checks on `e^{-2u} g`.
pub fn endpoint_checks(setup: &ProblemSetup, u: &ConformalFactor, t0: f64) -> Result<EndpointChecks> {
    let tilde = conformal_geometry(&setup.geometry, u)?;
    let gt = &tilde.metric;
    let gtinv = gt.inverse()?;
    let ric = tilde.curvature.ricci.values();
    let r = tilde.curvature.scalar.values();
    let a_t0 = schouten_t(&tilde.curvature, gt, t0)?;
    let a_1 = schouten_t(&tilde.curvature, gt, 1.0)?;

    let mut out = EndpointChecks {
        lower_pinching_margin: f64::INFINITY,
        upper_pinching_margin: f64::INFINITY,
        pinching_ok: false,
        min_ricci_eigenvalue: f64::INFINITY,
        ricci_positive: false,
        min_sigma2: f64::INFINITY,
        sigma2_positive: false,
        min_scalar: f64::INFINITY,
        scalar_positive: false,
        cone_margin_conformal: f64::INFINITY,
        schouten_bound_margin: f64::INFINITY,
        engine_residual_sup: 0.0,
    };
    for i in 0..gtinv.len() {
        let g = &gt.values()[i];
        let lower = ric[i] * 6.0 - *g * ((3.0 * t0 - 2.0) * r[i]);
        let upper = *g * (3.0 * (2.0 - t0) * r[i]) - ric[i] * 6.0;
        out.lower_pinching_margin = out.lower_pinching_margin.min(min_generalized_eigenvalue(&lower, g, i)?);
        out.upper_pinching_margin = out.upper_pinching_margin.min(min_generalized_eigenvalue(&upper, g, i)?);
        out.min_ricci_eigenvalue = out.min_ricci_eigenvalue.min(min_generalized_eigenvalue(&ric[i], g, i)?);
        let s1 = sigma1(&a_t0.values()[i], &gtinv[i]);
        let s2 = sigma2(&a_t0.values()[i], &gtinv[i]);
        out.min_sigma2 = out.min_sigma2.min(s2);
        out.cone_margin_conformal = out.cone_margin_conformal.min(s1.min(s2));
        out.min_scalar = out.min_scalar.min(r[i]);
        let a1 = &a_1.values()[i];
        let bound = *g * ((3.0 - 2.0 * t0) * sigma1(a1, &gtinv[i])) - *a1;
        out.schouten_bound_margin = out.schouten_bound_margin.min(min_generalized_eigenvalue(&bound, g, i)?);
    }
    out.pinching_ok = out.lower_pinching_margin > 0.0 && out.upper_pinching_margin > 0.0;
    out.ricci_positive = out.min_ricci_eigenvalue > 0.0;
    out.sigma2_positive = out.min_sigma2 > 0.0;
    out.scalar_positive = out.min_scalar > 0.0;

    // Background-referenced residual from an independent curvature computation:
    // σ₂(g^{-1}A) = e^{-4u} σ₂(g̃^{-1}A).
    let engine = curvature_of(gt)?;
    let a_engine = schouten_t(&engine, gt, t0)?;
    for i in 0..gtinv.len() {
        let e4u = libm::exp(4.0 * u.u().values()[i]);
        let res = sigma2(&a_engine.values()[i], &gtinv[i]) / e4u - setup.f2[i] * e4u;
        out.engine_residual_sup = out.engine_residual_sup.max(res.abs());
    }
    Ok(out)
}
