//! Coordinate charts, node-valued fields, centered finite differences and
//! quadrature.
//!
//! Two charts are supported:
//!
//! * [`ChartKind::Torus3`]: a periodic box `[a_i, b_i)` (default `[0, 2π)^3`),
//!   node-centred at `a_i + j h_i`.
//! * [`ChartKind::S3Band`]: Hopf coordinates `(r, θ, φ)` on the 3-sphere with
//!   `r ∈ (0, π/2)` sampled at staggered nodes `r_j = (j + ½) h`. All data is a
//!   function of `r` alone, so the two angular axes carry a single node each and
//!   span the full `2π` range.
//!
//! Derivatives are second-order centred differences. Periodic axes wrap;
//! the `r` axis of the band uses reflection ghosts across `r = 0` and
//! `r = π/2` whose sign is given by a [`Parity`].

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{cholesky, condition_number, Sym3};

/// Metrics whose condition number exceeds this are rejected when inverted.
pub const MAX_CONDITION: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ChartKind {
    Torus3,
    S3Band,
}

impl ChartKind {
    /// Coordinate names usable in expressions on this chart, by axis.
    pub fn coordinate_names(self) -> [Option<&'static str>; 3] {
        match self {
            ChartKind::Torus3 => [Some("x"), Some("y"), Some("z")],
            ChartKind::S3Band => [Some("r"), None, None],
        }
    }
}

/// Reflection signs applied to ghost values at the lower (`r = 0`) and upper
/// (`r = π/2`) end of the band. Ignored on periodic axes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Parity {
    pub lower: f64,
    pub upper: f64,
}

impl Parity {
    pub const EVEN: Parity = Parity {
        lower: 1.0,
        upper: 1.0,
    };
    pub const ODD: Parity = Parity {
        lower: -1.0,
        upper: -1.0,
    };

    /// Parity of a coordinate-basis tensor component with the given number
    /// of `r` indices.
    pub fn coordinate(r_indices: usize) -> Parity {
        if r_indices.is_multiple_of(2) {
            Parity::EVEN
        } else {
            Parity::ODD
        }
    }

    /// Parity of a component in the orthonormal reference frame
    /// `(∂_r, ∂_θ / sin r, ∂_φ / cos r)`. Near `r = 0` the `r` and `θ` legs flip
    /// sign under reflection; near `r = π/2` the `r` and `φ` legs do.
    pub fn frame(indices: &[usize]) -> Parity {
        let mut lower = 1.0;
        let mut upper = 1.0;
        for &i in indices {
            match i {
                0 => {
                    lower = -lower;
                    upper = -upper;
                }
                1 => lower = -lower,
                _ => upper = -upper,
            }
        }
        Parity { lower, upper }
    }

    pub fn flip_axis(self, axis: usize) -> Parity {
        if axis == 0 {
            Parity {
                lower: -self.lower,
                upper: -self.upper,
            }
        } else {
            self
        }
    }
}

/// A coordinate chart with grid topology.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChartGrid {
    kind: ChartKind,
    dims: [usize; 3],
    ranges: [[f64; 2]; 3],
    spacing: [f64; 3],
}

impl ChartGrid {
    /// Builds a chart. `ranges` defaults to `[0, 2π)` per torus axis and is
    /// fixed to `(0, π/2) × [0, 2π) × [0, 2π)` on the band.
    pub fn new(kind: ChartKind, dims: [usize; 3], ranges: Option<[[f64; 2]; 3]>) -> Result<Self> {
        let two_pi = 2.0 * PI;
        let band = [[0.0, 0.5 * PI], [0.0, two_pi], [0.0, two_pi]];
        let ranges = match (kind, ranges) {
            (ChartKind::Torus3, Some(r)) => r,
            (ChartKind::Torus3, None) => [[0.0, two_pi]; 3],
            (ChartKind::S3Band, Some(r)) => {
                let same = r
                    .iter()
                    .zip(band.iter())
                    .all(|(a, b)| (a[0] - b[0]).abs() < 1e-12 && (a[1] - b[1]).abs() < 1e-12);
                if !same {
                    return Err(Error::InvalidGrid(
                        "S3Band ranges are fixed to r in (0, pi/2), theta and phi in [0, 2pi)".into(),
                    ));
                }
                band
            }
            (ChartKind::S3Band, None) => band,
        };
        for (axis, r) in ranges.iter().enumerate() {
            let len = r[1] - r[0];
            if !(len > 0.0) || !len.is_finite() {
                return Err(Error::InvalidGrid(alloc::format!(
                    "axis {axis}: range length must be positive, got [{}, {}]",
                    r[0],
                    r[1]
                )));
            }
        }
        for (axis, &n) in dims.iter().enumerate() {
            if n == 0 {
                return Err(Error::InvalidGrid(alloc::format!("axis {axis}: zero nodes")));
            }
            if n > 1 && n < 4 {
                return Err(Error::InvalidGrid(alloc::format!(
                    "axis {axis}: {n} nodes is too few for second-order stencils (need >= 4)"
                )));
            }
        }
        if kind == ChartKind::S3Band {
            if dims[0] < 4 {
                return Err(Error::InvalidGrid("S3Band needs at least 4 radial nodes".into()));
            }
            if dims[1] != 1 || dims[2] != 1 {
                return Err(Error::InvalidGrid(
                    "S3Band data depends on r only; angular axes must have a single node".into(),
                ));
            }
        }
        let spacing = [
            (ranges[0][1] - ranges[0][0]) / dims[0] as f64,
            (ranges[1][1] - ranges[1][0]) / dims[1] as f64,
            (ranges[2][1] - ranges[2][0]) / dims[2] as f64,
        ];
        Ok(ChartGrid {
            kind,
            dims,
            ranges,
            spacing,
        })
    }

    /// Periodic `[0, 2π)^3` box.
    pub fn torus(dims: [usize; 3]) -> Result<Self> {
        Self::new(ChartKind::Torus3, dims, None)
    }

    /// Hopf band with `n` staggered radial nodes.
    pub fn s3_band(n: usize) -> Result<Self> {
        Self::new(ChartKind::S3Band, [n, 1, 1], None)
    }

    pub fn kind(&self) -> ChartKind {
        self.kind
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn ranges(&self) -> [[f64; 2]; 3] {
        self.ranges
    }

    pub fn spacing(&self) -> [f64; 3] {
        self.spacing
    }

    /// Largest spacing over active axes.
    pub fn h_max(&self) -> f64 {
        (0..3)
            .filter(|&a| self.is_active(a))
            .map(|a| self.spacing[a])
            .fold(0.0, f64::max)
    }

    pub fn len(&self) -> usize {
        self.dims[0] * self.dims[1] * self.dims[2]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_active(&self, axis: usize) -> bool {
        self.dims[axis] > 1
    }

    pub fn active_axes(&self) -> impl Iterator<Item = usize> + '_ {
        (0..3).filter(move |&a| self.is_active(a))
    }

    #[inline]
    pub fn stride(&self, axis: usize) -> usize {
        match axis {
            0 => 1,
            1 => self.dims[0],
            _ => self.dims[0] * self.dims[1],
        }
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.dims[0] * (j + self.dims[1] * k)
    }

    #[inline]
    pub fn node(&self, idx: usize) -> [usize; 3] {
        let i = idx % self.dims[0];
        let j = (idx / self.dims[0]) % self.dims[1];
        let k = idx / (self.dims[0] * self.dims[1]);
        [i, j, k]
    }

    /// Coordinates of a node.
    pub fn coords(&self, idx: usize) -> [f64; 3] {
        let n = self.node(idx);
        let mut x = [0.0; 3];
        for a in 0..3 {
            let offset = if self.kind == ChartKind::S3Band && a == 0 {
                0.5
            } else {
                0.0
            };
            x[a] = self.ranges[a][0] + (n[a] as f64 + offset) * self.spacing[a];
        }
        x
    }

    fn is_reflecting(&self, axis: usize) -> bool {
        self.kind == ChartKind::S3Band && axis == 0
    }

    #[inline]
    fn neighbors(&self, v: &[f64], idx: usize, axis: usize, parity: Parity) -> (f64, f64) {
        let n = self.dims[axis];
        let stride = self.stride(axis);
        let j = (idx / stride) % n;
        let plus = if j + 1 < n {
            v[idx + stride]
        } else if self.is_reflecting(axis) {
            parity.upper * v[idx]
        } else {
            v[idx + stride - n * stride]
        };
        let minus = if j > 0 {
            v[idx - stride]
        } else if self.is_reflecting(axis) {
            parity.lower * v[idx]
        } else {
            v[idx + (n - 1) * stride]
        };
        (plus, minus)
    }

    /// Centred first difference along `axis`; zero on inactive axes.
    pub fn d1(&self, v: &[f64], axis: usize, parity: Parity) -> Vec<f64> {
        if !self.is_active(axis) {
            return vec![0.0; v.len()];
        }
        let inv = 0.5 / self.spacing[axis];
        (0..v.len())
            .map(|idx| {
                let (p, m) = self.neighbors(v, idx, axis, parity);
                (p - m) * inv
            })
            .collect()
    }

    /// Compact three-point second difference along `axis`.
    pub fn d2(&self, v: &[f64], axis: usize, parity: Parity) -> Vec<f64> {
        if !self.is_active(axis) {
            return vec![0.0; v.len()];
        }
        let inv = 1.0 / (self.spacing[axis] * self.spacing[axis]);
        (0..v.len())
            .map(|idx| {
                let (p, m) = self.neighbors(v, idx, axis, parity);
                (p - 2.0 * v[idx] + m) * inv
            })
            .collect()
    }

    /// Discrete `∂_a ∂_b`: the compact stencil on the diagonal, composed
    /// first differences off it.
    pub fn d_ab(&self, v: &[f64], a: usize, b: usize, parity: Parity) -> Vec<f64> {
        if a == b {
            self.d2(v, a, parity)
        } else if !self.is_active(a) || !self.is_active(b) {
            vec![0.0; v.len()]
        } else {
            let first = self.d1(v, a, parity);
            self.d1(&first, b, parity.flip_axis(a))
        }
    }

    /// Coefficient of `v[idx]` in `d1(v, axis)[idx]`.
    pub fn d1_self_weight(&self, idx: usize, axis: usize, parity: Parity) -> f64 {
        if !self.is_active(axis) || !self.is_reflecting(axis) {
            return 0.0;
        }
        let n = self.dims[axis];
        let j = (idx / self.stride(axis)) % n;
        let inv = 0.5 / self.spacing[axis];
        let mut w = 0.0;
        if j + 1 == n {
            w += parity.upper * inv;
        }
        if j == 0 {
            w -= parity.lower * inv;
        }
        w
    }

    /// Coefficient of `v[idx]` in `d2(v, axis)[idx]`.
    pub fn d2_self_weight(&self, idx: usize, axis: usize, parity: Parity) -> f64 {
        if !self.is_active(axis) {
            return 0.0;
        }
        let inv = 1.0 / (self.spacing[axis] * self.spacing[axis]);
        let mut w = -2.0 * inv;
        if self.is_reflecting(axis) {
            let n = self.dims[axis];
            let j = (idx / self.stride(axis)) % n;
            if j + 1 == n {
                w += parity.upper * inv;
            }
            if j == 0 {
                w += parity.lower * inv;
            }
        }
        w
    }

    /// Coefficient of `v[idx]` in `d_ab(v, a, b)[idx]`.
    pub fn d_ab_self_weight(&self, idx: usize, a: usize, b: usize, parity: Parity) -> f64 {
        if a == b {
            self.d2_self_weight(idx, a, parity)
        } else if !self.is_active(a) || !self.is_active(b) {
            0.0
        } else {
            // Separable stencil on distinct axes: the only self contribution
            // comes from both legs reflecting onto the node itself.
            self.d1_self_weight(idx, a, parity) * self.d1_self_weight(idx, b, parity.flip_axis(a))
        }
    }

    /// Coordinate quadrature weights `w` such that `∫ φ dV_g ≈ Σ φ √det g · w`.
    ///
    /// On the torus this is the midpoint rule. On the band the volume density
    /// vanishes linearly at both ends, so the radial weights are the Fejér
    /// weights for `∫ F(r) sin r cos r dr` on the same staggered nodes, divided
    /// back by `sin r_j cos r_j`.
    pub fn quadrature_weights(&self) -> Vec<f64> {
        match self.kind {
            ChartKind::Torus3 => {
                let cell = self.spacing[0] * self.spacing[1] * self.spacing[2];
                vec![cell; self.len()]
            }
            ChartKind::S3Band => {
                let n = self.dims[0];
                let angular = self.spacing[1] * self.spacing[2];
                let radial: Vec<f64> = (0..n)
                    .map(|j| {
                        let theta = (2 * j + 1) as f64 * PI / (2 * n) as f64;
                        let mut s = 0.0;
                        for m in 1..=(n / 2) {
                            let mf = m as f64;
                            s += libm::cos(2.0 * mf * theta) / (4.0 * mf * mf - 1.0);
                        }
                        let fejer = 2.0 / n as f64 * (1.0 - 2.0 * s);
                        fejer / (2.0 * libm::sin(theta))
                    })
                    .collect();
                (0..self.len())
                    .map(|idx| radial[self.node(idx)[0]] * angular)
                    .collect()
            }
        }
    }

    /// Reference geometry at a node: the flat metric on the torus, the round
    /// unit metric `dr² + sin²r dθ² + cos²r dφ²` on the band.
    pub fn reference(&self, idx: usize) -> ReferenceFrame {
        match self.kind {
            ChartKind::Torus3 => ReferenceFrame::FLAT,
            ChartKind::S3Band => {
                let r = self.coords(idx)[0];
                let (s, c) = (libm::sin(r), libm::cos(r));
                let mut gamma = [Sym3::ZERO; 3];
                gamma[0].set(1, 1, -s * c);
                gamma[0].set(2, 2, s * c);
                gamma[1].set(0, 1, c / s);
                gamma[2].set(0, 2, -s / c);
                let mut dscale = [[0.0; 3]; 3];
                dscale[1][0] = c;
                dscale[2][0] = -s;
                ReferenceFrame {
                    scale: [1.0, s, c],
                    dscale,
                    gamma,
                    ricci: Sym3::diag(2.0, 2.0 * s * s, 2.0 * c * c),
                }
            }
        }
    }

    /// Parity for a tensor component in the reference frame.
    pub fn frame_parity(&self, indices: &[usize]) -> Parity {
        match self.kind {
            ChartKind::Torus3 => Parity::EVEN,
            ChartKind::S3Band => Parity::frame(indices),
        }
    }
}

/// Analytic data of the chart's reference metric `ĝ = Σ s_a² (dx^a)²` at one node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceFrame {
    /// Scale factors `s_a`.
    pub scale: [f64; 3],
    /// `dscale[a][b] = ∂_b s_a`.
    pub dscale: [[f64; 3]; 3],
    /// Reference Christoffel symbols `Γ̂^k_ij`, indexed `[k]`.
    pub gamma: [Sym3; 3],
    /// Reference Ricci tensor.
    pub ricci: Sym3,
}

impl ReferenceFrame {
    pub const FLAT: ReferenceFrame = ReferenceFrame {
        scale: [1.0; 3],
        dscale: [[0.0; 3]; 3],
        gamma: [Sym3::ZERO; 3],
        ricci: Sym3::ZERO,
    };

    pub fn metric(&self) -> Sym3 {
        let s = self.scale;
        Sym3::diag(s[0] * s[0], s[1] * s[1], s[2] * s[2])
    }
}

/// One real per node.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: ChartGrid,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: ChartGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidParameter(alloc::format!(
                "scalar field has {} values for {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if let Some(node) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Domain {
                node,
                message: "non-finite field value".into(),
            });
        }
        Ok(ScalarField { grid, values })
    }

    pub fn constant(grid: ChartGrid, value: f64) -> Self {
        ScalarField {
            grid,
            values: vec![value; grid.len()],
        }
    }

    pub fn from_fn(grid: ChartGrid, f: impl Fn([f64; 3]) -> f64) -> Self {
        let values = (0..grid.len()).map(|i| f(grid.coords(i))).collect();
        ScalarField { grid, values }
    }

    pub(crate) fn from_vec_unchecked(grid: ChartGrid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        ScalarField { grid, values }
    }

    pub fn grid(&self) -> &ChartGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> ScalarField {
        ScalarField::from_vec_unchecked(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_map(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> Result<ScalarField> {
        same_grid(&self.grid, &other.grid)?;
        Ok(ScalarField::from_vec_unchecked(
            self.grid,
            self.values
                .iter()
                .zip(other.values.iter())
                .map(|(&a, &b)| f(a, b))
                .collect(),
        ))
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn sup_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Index of the entry with largest magnitude.
    pub fn argmax_abs(&self) -> usize {
        let mut best = 0;
        for (i, v) in self.values.iter().enumerate() {
            if v.abs() > self.values[best].abs() {
                best = i;
            }
        }
        best
    }
}

/// Six reals per node: a lower-index symmetric tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTensorField {
    grid: ChartGrid,
    values: Vec<Sym3>,
}

impl SymTensorField {
    pub fn new(grid: ChartGrid, values: Vec<Sym3>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidParameter(alloc::format!(
                "tensor field has {} values for {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if let Some(node) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Domain {
                node,
                message: "non-finite tensor component".into(),
            });
        }
        Ok(SymTensorField { grid, values })
    }

    pub(crate) fn from_vec_unchecked(grid: ChartGrid, values: Vec<Sym3>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        SymTensorField { grid, values }
    }

    pub fn zeros(grid: ChartGrid) -> Self {
        SymTensorField {
            grid,
            values: vec![Sym3::ZERO; grid.len()],
        }
    }

    pub fn from_fn(grid: ChartGrid, f: impl Fn(usize) -> Sym3) -> Self {
        SymTensorField {
            grid,
            values: (0..grid.len()).map(f).collect(),
        }
    }

    pub fn grid(&self) -> &ChartGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Sym3] {
        &self.values
    }

    pub fn component(&self, k: usize) -> Vec<f64> {
        self.values.iter().map(|s| s.0[k]).collect()
    }
}

/// A positive definite symmetric tensor field.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricField {
    base: SymTensorField,
}

impl MetricField {
    /// Checks positive definiteness at every node.
    pub fn new(base: SymTensorField) -> Result<Self> {
        if let Some(node) = base.values.iter().position(|g| cholesky(g).is_none()) {
            return Err(Error::NotPositiveDefinite { node });
        }
        Ok(MetricField { base })
    }

    /// The chart's reference metric (flat or round unit).
    pub fn reference(grid: ChartGrid) -> Self {
        MetricField {
            base: SymTensorField::from_fn(grid, |i| grid.reference(i).metric()),
        }
    }

    pub fn grid(&self) -> &ChartGrid {
        &self.base.grid
    }

    pub fn values(&self) -> &[Sym3] {
        &self.base.values
    }

    pub fn as_tensor(&self) -> &SymTensorField {
        &self.base
    }

    /// Pointwise inverses, guarded by [`MAX_CONDITION`].
    pub fn inverse(&self) -> Result<Vec<Sym3>> {
        self.base
            .values
            .iter()
            .enumerate()
            .map(|(node, g)| {
                let condition = condition_number(g);
                if !(condition < MAX_CONDITION) {
                    return Err(Error::IllConditioned { node, condition });
                }
                g.inverse().ok_or(Error::IllConditioned { node, condition })
            })
            .collect()
    }

    /// `√det g` at every node.
    pub fn volume_density(&self) -> Vec<f64> {
        self.base.values.iter().map(|g| libm::sqrt(g.det())).collect()
    }

    /// Volume form weights `√det g · w` for [`integrate`].
    pub fn volume_weights(&self) -> Vec<f64> {
        self.grid()
            .quadrature_weights()
            .iter()
            .zip(self.volume_density())
            .map(|(w, d)| w * d)
            .collect()
    }
}

pub(crate) fn same_grid(a: &ChartGrid, b: &ChartGrid) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::GridMismatch)
    }
}

/// `make_grid`: build a chart from its kind, node counts and ranges.
pub fn make_grid(kind: ChartKind, dims: [usize; 3], ranges: Option<[[f64; 2]; 3]>) -> Result<ChartGrid> {
    ChartGrid::new(kind, dims, ranges)
}

/// Centred difference of order 1 or 2 along `axis`, with the even reflection
/// rule on the band's radial axis.
pub fn fd_partial(field: &ScalarField, axis: usize, order: u8) -> Result<ScalarField> {
    fd_partial_with_parity(field, axis, order, Parity::EVEN)
}

/// [`fd_partial`] with an explicit reflection parity.
pub fn fd_partial_with_parity(field: &ScalarField, axis: usize, order: u8, parity: Parity) -> Result<ScalarField> {
    if axis > 2 {
        return Err(Error::InvalidParameter(alloc::format!("axis {axis} out of range")));
    }
    if !field.grid.is_active(axis) {
        return Err(Error::InvalidParameter(alloc::format!("axis {axis} is not active on this grid")));
    }
    let values = match order {
        1 => field.grid.d1(&field.values, axis, parity),
        2 => field.grid.d2(&field.values, axis, parity),
        _ => return Err(Error::InvalidParameter(alloc::format!("derivative order {order} not supported"))),
    };
    Ok(ScalarField::from_vec_unchecked(field.grid, values))
}

/// `∫_M φ dV_g`.
pub fn integrate(phi: &ScalarField, g: &MetricField) -> Result<f64> {
    same_grid(phi.grid(), g.grid())?;
    Ok(dot(phi.values(), &g.volume_weights()))
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
