//! JSON manifest schema and its translation into core objects.

use std::collections::BTreeMap;
use std::path::Path;

use schouten_core::curvature::{catalog, CatalogSpec, Geometry};
use schouten_core::expr::{evaluate, parse};
use schouten_core::grid::{make_grid, ChartGrid, ChartKind, MetricField, ScalarField, SymTensorField};
use schouten_core::Sym3;
use serde::Deserialize;

use crate::error::CliError;

/// A real given either as a JSON number or as a constant expression such as `"2/3"`.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum Real {
    Number(f64),
    Expr(String),
}

impl Real {
    pub fn value(&self, field: &str) -> Result<f64, CliError> {
        match self {
            Real::Number(v) => Ok(*v),
            Real::Expr(s) => parse(s)
                .and_then(|a| a.eval_constant())
                .map_err(|e| CliError::validation(field, e)),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChartSpec {
    pub kind: ChartKind,
    pub dims: [usize; 3],
    #[serde(default)]
    pub ranges: Option<[[Real; 2]; 3]>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, tag = "name", rename_all = "snake_case")]
pub enum CatalogEntry {
    FlatTorus,
    RoundS3 {
        #[serde(default = "one")]
        radius: Real,
    },
    BergerS3 {
        fiber_scale: Real,
    },
    ConformallyRoundS3 {
        w: String,
    },
}

fn one() -> Real {
    Real::Number(1.0)
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricSpec {
    #[serde(default)]
    pub catalog: Option<CatalogEntry>,
    /// `g11, g22, g33, g12, g13, g23` as expressions in the chart coordinates.
    #[serde(default)]
    pub components: Option<BTreeMap<String, String>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSpec {
    #[serde(default)]
    pub delta: Option<Real>,
    #[serde(default = "default_margin")]
    pub delta_margin: Real,
    #[serde(default = "one")]
    pub path_floor: Real,
    #[serde(default = "default_t0")]
    pub t0: Real,
    #[serde(default)]
    pub steps: Option<usize>,
    #[serde(default)]
    pub tol_factor: Option<f64>,
    #[serde(default)]
    pub max_newton: Option<usize>,
}

impl Default for SolverSpec {
    fn default() -> Self {
        SolverSpec {
            delta: None,
            delta_margin: default_margin(),
            path_floor: one(),
            t0: default_t0(),
            steps: None,
            tol_factor: None,
            max_newton: None,
        }
    }
}

fn default_margin() -> Real {
    Real::Number(0.1)
}

fn default_t0() -> Real {
    Real::Expr("2/3".into())
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionalSpec {
    #[serde(default = "default_t0")]
    pub t: Real,
    #[serde(default = "one")]
    pub grad_cap: Real,
    /// Candidate factors; the constant `0` is always added.
    #[serde(default)]
    pub candidates: Vec<String>,
    /// Values of `t` at which the report lists σ₁/σ₂ ranges.
    #[serde(default = "default_t_values")]
    pub t_values: Vec<Real>,
}

impl Default for FunctionalSpec {
    fn default() -> Self {
        FunctionalSpec {
            t: default_t0(),
            grad_cap: one(),
            candidates: Vec::new(),
            t_values: default_t_values(),
        }
    }
}

fn default_t_values() -> Vec<Real> {
    vec![Real::Number(0.0), Real::Expr("2/3".into()), Real::Number(1.0)]
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub chart: ChartSpec,
    pub metric: MetricSpec,
    #[serde(default)]
    pub conformal_factor: Option<String>,
    #[serde(default)]
    pub solver: SolverSpec,
    #[serde(default)]
    pub functional: FunctionalSpec,
    #[serde(default)]
    pub suites: Vec<String>,
    #[serde(default)]
    pub seed: u64,
    /// Random samples per exact-algebra suite.
    #[serde(default = "default_samples")]
    pub samples: usize,
    /// Replace the transformation law by a known-wrong one in the dual-route suite.
    #[serde(default)]
    pub fault_injection: bool,
}

fn default_samples() -> usize {
    10_000
}

const COMPONENTS: [&str; 6] = ["g11", "g22", "g33", "g12", "g13", "g23"];

impl Manifest {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let m: Manifest = serde_path_to_error::deserialize(de).map_err(|e| {
            let inner = e.inner();
            CliError::Validation(format!(
                "manifest field `{}` (line {}, column {}): {inner}",
                e.path(),
                inner.line(),
                inner.column()
            ))
        })?;
        m.validate()?;
        Ok(m)
    }

    fn validate(&self) -> Result<(), CliError> {
        match (&self.metric.catalog, &self.metric.components) {
            (Some(_), Some(_)) => {
                return Err(CliError::Validation(
                    "field `metric`: give either `catalog` or `components`, not both".into(),
                ))
            }
            (None, None) => return Err(CliError::Validation("field `metric`: missing `catalog` or `components`".into())),
            (None, Some(c)) => {
                for key in c.keys() {
                    if !COMPONENTS.contains(&key.as_str()) {
                        return Err(CliError::Validation(format!("field `metric.components.{key}`: unknown component")));
                    }
                }
                for (key, src) in c {
                    parse(src).map_err(|e| CliError::validation(&format!("metric.components.{key}"), e))?;
                }
            }
            _ => {}
        }
        let t0 = self.solver.t0.value("solver.t0")?;
        if !(t0 <= 2.0 / 3.0) {
            return Err(CliError::Validation(format!("field `solver.t0`: must be at most 2/3, got {t0}")));
        }
        if let Some(src) = &self.conformal_factor {
            parse(src).map_err(|e| CliError::validation("conformal_factor", e))?;
        }
        for (k, src) in self.functional.candidates.iter().enumerate() {
            parse(src).map_err(|e| CliError::validation(&format!("functional.candidates[{k}]"), e))?;
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<ChartGrid, CliError> {
        let ranges = match &self.chart.ranges {
            None => None,
            Some(r) => {
                let mut out = [[0.0; 2]; 3];
                for (a, pair) in r.iter().enumerate() {
                    for (b, v) in pair.iter().enumerate() {
                        out[a][b] = v.value(&format!("chart.ranges[{a}][{b}]"))?;
                    }
                }
                Some(out)
            }
        };
        make_grid(self.chart.kind, self.chart.dims, ranges).map_err(|e| CliError::validation("chart", e))
    }

    pub fn catalog_spec(&self) -> Result<Option<CatalogSpec>, CliError> {
        let Some(entry) = &self.metric.catalog else {
            return Ok(None);
        };
        Ok(Some(match entry {
            CatalogEntry::FlatTorus => CatalogSpec::FlatTorus,
            CatalogEntry::RoundS3 { radius } => CatalogSpec::RoundS3 {
                radius: radius.value("metric.catalog.radius")?,
            },
            CatalogEntry::BergerS3 { fiber_scale } => CatalogSpec::BergerS3 {
                fiber_scale: fiber_scale.value("metric.catalog.fiber_scale")?,
            },
            CatalogEntry::ConformallyRoundS3 { w } => CatalogSpec::ConformallyRoundS3 {
                w: parse(w).map_err(|e| CliError::validation("metric.catalog.w", e))?,
            },
        }))
    }

    /// The background metric, before any conformal factor.
    pub fn background(&self) -> Result<Geometry, CliError> {
        let grid = self.grid()?;
        if let Some(spec) = self.catalog_spec()? {
            return catalog(&spec, &grid).map_err(|e| CliError::validation("metric.catalog", e));
        }
        let comps = self.metric.components.as_ref().expect("validated");
        let mut fields = Vec::with_capacity(6);
        for key in COMPONENTS {
            let field = match comps.get(key) {
                Some(src) => {
                    let ast = parse(src).map_err(|e| CliError::validation(&format!("metric.components.{key}"), e))?;
                    evaluate(&ast, &grid).map_err(|e| CliError::validation(&format!("metric.components.{key}"), e))?
                }
                None => ScalarField::constant(grid, if key[1..2] == key[2..3] { 1.0 } else { 0.0 }),
            };
            fields.push(field);
        }
        let values = (0..grid.len())
            .map(|i| Sym3(std::array::from_fn(|k| fields[k].values()[i])))
            .collect();
        let tensor = SymTensorField::new(grid, values).map_err(|e| CliError::validation("metric.components", e))?;
        let metric = MetricField::new(tensor).map_err(|e| CliError::validation("metric.components", e))?;
        Geometry::from_metric(metric).map_err(CliError::from)
    }

    pub fn conformal_field(&self, grid: &ChartGrid) -> Result<Option<ScalarField>, CliError> {
        self.conformal_factor
            .as_ref()
            .map(|src| {
                let ast = parse(src).map_err(|e| CliError::validation("conformal_factor", e))?;
                evaluate(&ast, grid).map_err(|e| CliError::validation("conformal_factor", e))
            })
            .transpose()
    }

    pub fn candidates(&self, grid: &ChartGrid) -> Result<Vec<(String, ScalarField)>, CliError> {
        let mut out = vec![("0".to_string(), ScalarField::constant(*grid, 0.0))];
        for (k, src) in self.functional.candidates.iter().enumerate() {
            let field = format!("functional.candidates[{k}]");
            let ast = parse(src).map_err(|e| CliError::validation(&field, e))?;
            out.push((src.clone(), evaluate(&ast, grid).map_err(|e| CliError::validation(&field, e))?));
        }
        Ok(out)
    }
}
