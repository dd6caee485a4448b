//! Dense 3x3 helpers: symmetric storage, inverses, Cholesky and a cyclic
//! Jacobi eigensolver.
//!
//! Symmetric matrices are stored as six components in the order
//! `11, 22, 33, 12, 13, 23` (zero-based `(0,0), (1,1), (2,2), (0,1), (0,2), (1,2)`).

use core::ops::{Add, Mul, Neg, Sub};

pub type Mat3 = [[f64; 3]; 3];

/// Position of `(i, j)` in the six-component symmetric layout.
#[inline]
pub const fn sym_index(i: usize, j: usize) -> usize {
    match (i, j) {
        (0, 0) => 0,
        (1, 1) => 1,
        (2, 2) => 2,
        (0, 1) | (1, 0) => 3,
        (0, 2) | (2, 0) => 4,
        _ => 5,
    }
}

/// The `(i, j)` pair stored at slot `k` of the symmetric layout.
pub const SYM_PAIRS: [(usize, usize); 6] = [(0, 0), (1, 1), (2, 2), (0, 1), (0, 2), (1, 2)];

/// Symmetric 3x3 matrix.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Sym3(pub [f64; 6]);

impl Sym3 {
    pub const ZERO: Sym3 = Sym3([0.0; 6]);
    pub const IDENTITY: Sym3 = Sym3([1.0, 1.0, 1.0, 0.0, 0.0, 0.0]);

    pub fn diag(a: f64, b: f64, c: f64) -> Self {
        Sym3([a, b, c, 0.0, 0.0, 0.0])
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[sym_index(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.0[sym_index(i, j)] = v;
    }

    pub fn to_mat(&self) -> Mat3 {
        let s = &self.0;
        [[s[0], s[3], s[4]], [s[3], s[1], s[5]], [s[4], s[5], s[2]]]
    }

    /// Symmetric part of a full matrix.
    pub fn from_mat(m: &Mat3) -> Self {
        Sym3([
            m[0][0],
            m[1][1],
            m[2][2],
            0.5 * (m[0][1] + m[1][0]),
            0.5 * (m[0][2] + m[2][0]),
            0.5 * (m[1][2] + m[2][1]),
        ])
    }

    /// `a ⊗ b + b ⊗ a`, halved: the symmetric product of two covectors.
    pub fn sym_outer(a: &[f64; 3], b: &[f64; 3]) -> Self {
        let mut out = Sym3::ZERO;
        for (k, &(i, j)) in SYM_PAIRS.iter().enumerate() {
            out.0[k] = 0.5 * (a[i] * b[j] + a[j] * b[i]);
        }
        out
    }

    pub fn outer(a: &[f64; 3]) -> Self {
        Self::sym_outer(a, a)
    }

    pub fn trace(&self) -> f64 {
        self.0[0] + self.0[1] + self.0[2]
    }

    pub fn det(&self) -> f64 {
        let [a, d, f, b, c, e] = self.0;
        a * (d * f - e * e) - b * (b * f - e * c) + c * (b * e - d * c)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Inverse via the adjugate; `None` when the determinant vanishes.
    pub fn inverse(&self) -> Option<Sym3> {
        let [a, d, f, b, c, e] = self.0;
        let det = self.det();
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        let inv = 1.0 / det;
        Some(Sym3([
            (d * f - e * e) * inv,
            (a * f - c * c) * inv,
            (a * d - b * b) * inv,
            (c * e - b * f) * inv,
            (b * e - c * d) * inv,
            (b * c - a * e) * inv,
        ]))
    }

    /// `v^T S v`.
    pub fn quad(&self, v: &[f64; 3]) -> f64 {
        let m = self.to_mat();
        let mut s = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                s += m[i][j] * v[i] * v[j];
            }
        }
        s
    }

    /// `S v`.
    pub fn apply(&self, v: &[f64; 3]) -> [f64; 3] {
        let m = self.to_mat();
        [
            m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
            m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
            m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
        ]
    }

    /// Frobenius inner product `sum_ij A_ij B_ij`.
    pub fn frobenius(&self, other: &Sym3) -> f64 {
        let a = &self.0;
        let b = &other.0;
        a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + 2.0 * (a[3] * b[3] + a[4] * b[4] + a[5] * b[5])
    }

    /// `P S P^T` for an arbitrary matrix `P`.
    pub fn congruence(&self, p: &Mat3) -> Sym3 {
        let s = self.to_mat();
        let ps = matmul(p, &s);
        Sym3::from_mat(&matmul(&ps, &transpose(p)))
    }

    /// Raise both indices with an inverse metric: `g^{ia} A_ab g^{bj}`.
    pub fn raise(&self, ginv: &Sym3) -> Sym3 {
        self.congruence(&ginv.to_mat())
    }

    /// Trace of `g^{-1} A`.
    pub fn trace_with(&self, ginv: &Sym3) -> f64 {
        self.frobenius(ginv)
    }

    /// `|A|_g^2 = g^{ik} g^{jl} A_ij A_kl`.
    pub fn norm_sq_with(&self, ginv: &Sym3) -> f64 {
        self.raise(ginv).frobenius(self)
    }
}

impl Add for Sym3 {
    type Output = Sym3;
    fn add(mut self, rhs: Sym3) -> Sym3 {
        for k in 0..6 {
            self.0[k] += rhs.0[k];
        }
        self
    }
}

impl Sub for Sym3 {
    type Output = Sym3;
    fn sub(mut self, rhs: Sym3) -> Sym3 {
        for k in 0..6 {
            self.0[k] -= rhs.0[k];
        }
        self
    }
}

impl Neg for Sym3 {
    type Output = Sym3;
    fn neg(self) -> Sym3 {
        self * -1.0
    }
}

impl Mul<f64> for Sym3 {
    type Output = Sym3;
    fn mul(mut self, rhs: f64) -> Sym3 {
        for v in self.0.iter_mut() {
            *v *= rhs;
        }
        self
    }
}

pub fn matmul(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j] + a[i][2] * b[2][j];
        }
    }
    out
}

pub fn transpose(a: &Mat3) -> Mat3 {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = a[j][i];
        }
    }
    out
}

/// Lower Cholesky factor `L` with `S = L L^T`; `None` unless `S` is positive definite.
pub fn cholesky(s: &Sym3) -> Option<Mat3> {
    let a = s.to_mat();
    let mut l = [[0.0; 3]; 3];
    for j in 0..3 {
        let mut d = a[j][j];
        for k in 0..j {
            d -= l[j][k] * l[j][k];
        }
        if !(d > 0.0) {
            return None;
        }
        let ljj = libm::sqrt(d);
        l[j][j] = ljj;
        for i in (j + 1)..3 {
            let mut v = a[i][j];
            for k in 0..j {
                v -= l[i][k] * l[j][k];
            }
            l[i][j] = v / ljj;
        }
    }
    Some(l)
}

/// Inverse of a lower-triangular matrix with nonzero diagonal.
pub fn lower_inverse(l: &Mat3) -> Mat3 {
    let mut inv = [[0.0; 3]; 3];
    for i in 0..3 {
        inv[i][i] = 1.0 / l[i][i];
        for j in 0..i {
            let mut s = 0.0;
            for k in j..i {
                s += l[i][k] * inv[k][j];
            }
            inv[i][j] = -s / l[i][i];
        }
    }
    inv
}

/// Eigenvalues of a symmetric matrix in ascending order (cyclic Jacobi).
pub fn sym_eigenvalues(s: &Sym3) -> [f64; 3] {
    let mut a = s.to_mat();
    let scale = s.max_abs();
    if scale == 0.0 {
        return [0.0; 3];
    }
    for _sweep in 0..50 {
        let off = a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2];
        if off <= (1e-17 * scale) * (1e-17 * scale) {
            break;
        }
        for &(p, q) in &[(0usize, 1usize), (0, 2), (1, 2)] {
            let apq = a[p][q];
            if apq == 0.0 {
                continue;
            }
            let theta = (a[q][q] - a[p][p]) / (2.0 * apq);
            let t = libm::copysign(1.0, theta) / (theta.abs() + libm::sqrt(theta * theta + 1.0));
            let c = 1.0 / libm::sqrt(t * t + 1.0);
            let sn = t * c;
            for k in 0..3 {
                let akp = a[k][p];
                let akq = a[k][q];
                a[k][p] = c * akp - sn * akq;
                a[k][q] = sn * akp + c * akq;
            }
            for k in 0..3 {
                let apk = a[p][k];
                let aqk = a[q][k];
                a[p][k] = c * apk - sn * aqk;
                a[q][k] = sn * apk + c * aqk;
            }
        }
    }
    let mut ev = [a[0][0], a[1][1], a[2][2]];
    sort3(&mut ev);
    ev
}

/// Eigenvalues of `G^{-1} A` through the congruence `L^{-1} A L^{-T}` with `G = L L^T`.
/// Returns `None` when `G` is not positive definite.
pub fn generalized_eigenvalues(a: &Sym3, g: &Sym3) -> Option<[f64; 3]> {
    let l = cholesky(g)?;
    let linv = lower_inverse(&l);
    Some(sym_eigenvalues(&a.congruence(&linv)))
}

fn sort3(v: &mut [f64; 3]) {
    if v[0] > v[1] {
        v.swap(0, 1);
    }
    if v[1] > v[2] {
        v.swap(1, 2);
    }
    if v[0] > v[1] {
        v.swap(0, 1);
    }
}

/// Ratio of largest to smallest eigenvalue of a positive definite matrix.
pub fn condition_number(g: &Sym3) -> f64 {
    let ev = sym_eigenvalues(g);
    if ev[0] <= 0.0 {
        f64::INFINITY
    } else {
        ev[2] / ev[0]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_round_trip() {
        let s = Sym3([4.0, 3.0, 2.0, 0.5, -0.3, 0.2]);
        let inv = s.inverse().unwrap();
        let p = matmul(&s.to_mat(), &inv.to_mat());
        for i in 0..3 {
            for j in 0..3 {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((p[i][j] - e).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn jacobi_matches_characteristic_invariants() {
        let s = Sym3([2.0, -1.0, 0.5, 0.7, 0.1, -1.3]);
        let ev = sym_eigenvalues(&s);
        assert!((ev.iter().sum::<f64>() - s.trace()).abs() < 1e-13);
        assert!((ev[0] * ev[1] * ev[2] - s.det()).abs() < 1e-13);
        assert!(ev[0] <= ev[1] && ev[1] <= ev[2]);
    }

    #[test]
    fn generalized_spectrum_of_scaled_metric() {
        let g = Sym3([2.0, 3.0, 1.5, 0.4, 0.0, 0.2]);
        let ev = generalized_eigenvalues(&(g * 0.5), &g).unwrap();
        for e in ev {
            assert!((e - 0.5).abs() < 1e-14);
        }
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        assert!(cholesky(&Sym3::diag(1.0, -1.0, 1.0)).is_none());
        assert!(cholesky(&Sym3::diag(1.0, 0.0, 1.0)).is_none());
    }
}
