//! Identity suites driven by a manifest.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use schouten_core::curvature::Geometry;
use schouten_core::grid::ScalarField;
use schouten_core::verify::{self, IdentityReport};
use serde::Serialize;

use crate::error::CliError;
use crate::manifest::Manifest;

pub const SUITES: [&str; 10] = [
    "lemma51",
    "bochner",
    "p2",
    "sigma2_shift",
    "sigma2_dual",
    "cone_inequalities",
    "cone_boundary",
    "q_corollary",
    "transformation_laws",
    "schouten_bound",
];

/// Amplitude of the seeded test factor used when the manifest names none.
pub const RANDOM_AMPLITUDE: f64 = 0.05;

#[derive(Debug, Serialize)]
pub struct VerifyOutput {
    pub seed: u64,
    pub samples: usize,
    pub factor: String,
    pub suites: Vec<String>,
    pub passed: usize,
    pub failed: usize,
    pub reports: Vec<IdentityReport>,
}

impl VerifyOutput {
    pub fn all_pass(&self) -> bool {
        self.failed == 0
    }
}

pub fn resolve_suites(m: &Manifest, cli: Option<&str>) -> Result<Vec<String>, CliError> {
    let requested: Vec<String> = match cli {
        Some(s) => vec![s.to_string()],
        None if m.suites.is_empty() => vec!["all".to_string()],
        None => m.suites.clone(),
    };
    let mut out = Vec::new();
    for name in requested {
        if name == "all" {
            out.extend(SUITES.iter().map(|s| s.to_string()));
        } else if SUITES.contains(&name.as_str()) {
            out.push(name);
        } else {
            return Err(CliError::Validation(format!(
                "unknown suite `{name}`; expected one of {} or `all`",
                SUITES.join(", ")
            )));
        }
    }
    out.dedup();
    Ok(out)
}

struct Context<'a> {
    m: &'a Manifest,
    geo: Geometry,
    u: ScalarField,
    seed: u64,
}

fn run_suite(ctx: &Context, name: &str) -> Result<Vec<IdentityReport>, CliError> {
    let (geo, u, seed, n) = (&ctx.geo, &ctx.u, ctx.seed, ctx.m.samples);
    Ok(match name {
        "lemma51" => vec![verify::check_lemma51(geo, u)?],
        "bochner" => vec![verify::check_bochner(geo, u)?],
        "p2" => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut ts: Vec<f64> = vec![0.0, 1.0, 2.0 / 3.0, 0.7, 11.0 / 9.0];
            ts.extend((0..n).map(|_| rng.gen_range(-10.0..10.0)));
            verify::check_p2(&ts)
        }
        "sigma2_shift" => vec![verify::check_sigma2_shift(n, seed)],
        "sigma2_dual" => vec![verify::check_sigma2_dual(n, seed)],
        "cone_inequalities" => verify::check_cone_inequalities(n, seed),
        "cone_boundary" => vec![verify::check_cone_boundary(n, seed)],
        "q_corollary" => verify::check_q_corollary(geo)?,
        "transformation_laws" => {
            let mut out = Vec::new();
            for (k, t) in [0.0, 2.0 / 3.0, 1.0].into_iter().enumerate() {
                let reps = if ctx.m.fault_injection {
                    verify::check_transformation_laws_with(geo, u, t, &verify::corrupted_law)?
                } else {
                    verify::check_transformation_laws(geo, u, t)?
                };
                // The scalar law does not depend on t.
                out.extend(reps.into_iter().filter(|r| k == 0 || r.name != "scalar_law"));
            }
            out
        }
        "schouten_bound" => vec![verify::check_schouten_bound(geo, u, ctx.m.solver.t0.value("solver.t0")?)?],
        _ => unreachable!("suite names are resolved before running"),
    })
}

pub fn run(m: &Manifest, suite: Option<&str>, seed: Option<u64>) -> Result<VerifyOutput, CliError> {
    let suites = resolve_suites(m, suite)?;
    let seed = seed.unwrap_or(m.seed);
    let geo = m.background()?;
    let (u, factor) = match m.conformal_field(geo.grid())? {
        Some(u) => (u, m.conformal_factor.clone().unwrap_or_default()),
        None => (
            verify::random_smooth_field(geo.grid(), seed, RANDOM_AMPLITUDE),
            format!("random smooth field (seed {seed}, amplitude {RANDOM_AMPLITUDE})"),
        ),
    };
    let ctx = Context { m, geo, u, seed };
    let results: Vec<Result<Vec<IdentityReport>, CliError>> = suites.par_iter().map(|s| run_suite(&ctx, s)).collect();
    let mut reports = Vec::new();
    for r in results {
        reports.extend(r?);
    }
    let passed = reports.iter().filter(|r| r.pass).count();
    Ok(VerifyOutput {
        seed,
        samples: m.samples,
        factor,
        suites,
        passed,
        failed: reports.len() - passed,
        reports,
    })
}
