//! Finite-difference curvature.
//!
//! The connection is split as `Γ = Γ̂ + C` where `Γ̂` belongs to the chart's
//! reference metric (flat on the torus, round on the band) and is known in
//! closed form. Only the tensor `C` and the metric are differenced, and only
//! through their components in the orthonormal reference frame, which are
//! smooth up to the band's coordinate poles. On the torus `Γ̂ = 0` and the
//! scheme is the textbook one.
//!
//! ```text
//! C^k_ij  = ½ g^{kl} (∇̂_i g_jl + ∇̂_j g_il − ∇̂_l g_ij)
//! Ric_ij  = R̂ic_ij + ∇̂_k C^k_ij − ∇̂_j C^k_ik + C^k_kl C^l_ij − C^k_jl C^l_ik
//! ```

use alloc::vec;
use alloc::vec::Vec;

use super::{Christoffel, ChristoffelField, CurvatureBundle};
use crate::error::Result;
use crate::grid::{ChartGrid, MetricField, ReferenceFrame, ScalarField, SymTensorField};
use crate::linalg::{Sym3, SYM_PAIRS};

/// `s_i s_j` and its coordinate gradient.
fn scale_pair(frame: &ReferenceFrame, i: usize, j: usize) -> (f64, [f64; 3]) {
    let s = frame.scale;
    let ds = frame.dscale;
    let mut d = [0.0; 3];
    for (a, da) in d.iter_mut().enumerate() {
        *da = ds[i][a] * s[j] + s[i] * ds[j][a];
    }
    (s[i] * s[j], d)
}

/// Difference tensor `C = Γ − Γ̂` at every node.
fn connection_difference(g: &MetricField, ginv: &[Sym3], frames: &[ReferenceFrame]) -> Vec<Christoffel> {
    let grid = g.grid();
    let n = grid.len();
    let gv = g.values();

    // dg[node][a] = ∂_a g_ij
    let mut dg = vec![[Sym3::ZERO; 3]; n];
    let mut bar = vec![0.0; n];
    for (p, &(i, j)) in SYM_PAIRS.iter().enumerate() {
        for node in 0..n {
            bar[node] = gv[node].0[p] / scale_pair(&frames[node], i, j).0;
        }
        let parity = grid.frame_parity(&[i, j]);
        for a in grid.active_axes() {
            let d = grid.d1(&bar, a, parity);
            for node in 0..n {
                let (ss, dss) = scale_pair(&frames[node], i, j);
                dg[node][a].0[p] = ss * d[node] + bar[node] * dss[a];
            }
        }
    }

    (0..n)
        .map(|node| {
            let gh = &frames[node].gamma;
            let gn = &gv[node];
            // nabla[a](i, j) = ∇̂_a g_ij
            let mut nabla = dg[node];
            for (a, na) in nabla.iter_mut().enumerate() {
                for &(i, j) in SYM_PAIRS.iter() {
                    let mut corr = 0.0;
                    for m in 0..3 {
                        corr += gh[m].get(a, i) * gn.get(m, j) + gh[m].get(a, j) * gn.get(i, m);
                    }
                    na.set(i, j, na.get(i, j) - corr);
                }
            }
            let gi = &ginv[node];
            let mut c = [Sym3::ZERO; 3];
            for (k, ck) in c.iter_mut().enumerate() {
                for &(i, j) in SYM_PAIRS.iter() {
                    let mut v = 0.0;
                    for l in 0..3 {
                        v += gi.get(k, l) * (nabla[i].get(j, l) + nabla[j].get(i, l) - nabla[l].get(i, j));
                    }
                    ck.set(i, j, 0.5 * v);
                }
            }
            c
        })
        .collect()
}

fn frames_of(grid: &ChartGrid) -> Vec<ReferenceFrame> {
    (0..grid.len()).map(|i| grid.reference(i)).collect()
}

fn add_reference(c: &[Christoffel], frames: &[ReferenceFrame]) -> Vec<Christoffel> {
    c.iter()
        .zip(frames)
        .map(|(ck, f)| [ck[0] + f.gamma[0], ck[1] + f.gamma[1], ck[2] + f.gamma[2]])
        .collect()
}

/// Levi-Civita connection `Γ^k_ij` of a metric field.
pub fn christoffel(g: &MetricField) -> Result<ChristoffelField> {
    let ginv = g.inverse()?;
    let frames = frames_of(g.grid());
    let c = connection_difference(g, &ginv, &frames);
    Ok(ChristoffelField::new(*g.grid(), add_reference(&c, &frames)))
}

/// Christoffel symbols, Ricci tensor and scalar curvature by finite differences.
pub fn curvature_of(g: &MetricField) -> Result<CurvatureBundle> {
    let grid = *g.grid();
    let n = grid.len();
    let ginv = g.inverse()?;
    let frames = frames_of(&grid);
    let c = connection_difference(g, &ginv, &frames);

    // dc[node][a][k](i, j) = ∂_a C^k_ij, differenced through frame components
    // C^k_ij s_k / (s_i s_j).
    let mut dc = vec![[[Sym3::ZERO; 3]; 3]; n];
    let mut bar = vec![0.0; n];
    for k in 0..3 {
        for (p, &(i, j)) in SYM_PAIRS.iter().enumerate() {
            for node in 0..n {
                let f = &frames[node];
                bar[node] = c[node][k].0[p] * f.scale[k] / scale_pair(f, i, j).0;
            }
            let parity = grid.frame_parity(&[k, i, j]);
            for a in grid.active_axes() {
                let d = grid.d1(&bar, a, parity);
                for node in 0..n {
                    let f = &frames[node];
                    let (ss, dss) = scale_pair(f, i, j);
                    let sk = f.scale[k];
                    let factor = ss / sk;
                    let dfactor = dss[a] / sk - ss * f.dscale[k][a] / (sk * sk);
                    dc[node][a][k].0[p] = d[node] * factor + bar[node] * dfactor;
                }
            }
        }
    }

    let mut ricci = Vec::with_capacity(n);
    let mut scalar = Vec::with_capacity(n);
    for node in 0..n {
        let gh = &frames[node].gamma;
        let cn = &c[node];
        let dcn = &dc[node];
        // ∇̂_a C^k_ij
        let nabla_c = |a: usize, k: usize, i: usize, j: usize| -> f64 {
            let mut v = dcn[a][k].get(i, j);
            for m in 0..3 {
                v += gh[k].get(a, m) * cn[m].get(i, j);
                v -= gh[m].get(a, i) * cn[k].get(m, j);
                v -= gh[m].get(a, j) * cn[k].get(i, m);
            }
            v
        };
        let raw = |i: usize, j: usize| -> f64 {
            let mut v = 0.0;
            for k in 0..3 {
                v += nabla_c(k, k, i, j) - nabla_c(j, k, i, k);
                for l in 0..3 {
                    v += cn[k].get(k, l) * cn[l].get(i, j) - cn[k].get(j, l) * cn[l].get(i, k);
                }
            }
            v
        };
        let mut ric = frames[node].ricci;
        for &(i, j) in SYM_PAIRS.iter() {
            let v = if i == j { raw(i, i) } else { 0.5 * (raw(i, j) + raw(j, i)) };
            ric.set(i, j, ric.get(i, j) + v);
        }
        scalar.push(ric.trace_with(&ginv[node]));
        ricci.push(ric);
    }

    Ok(CurvatureBundle {
        gamma: ChristoffelField::new(grid, add_reference(&c, &frames)),
        ricci: SymTensorField::from_vec_unchecked(grid, ricci),
        scalar: ScalarField::from_vec_unchecked(grid, scalar),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::ChartGrid;

    #[test]
    fn flat_metric_has_no_curvature() {
        let grid = ChartGrid::torus([6, 6, 6]).unwrap();
        let g = MetricField::reference(grid);
        let b = curvature_of(&g).unwrap();
        assert!(b.gamma.values().iter().all(|c| c.iter().all(|s| s.max_abs() == 0.0)));
        assert!(b.ricci.values().iter().all(|r| r.max_abs() == 0.0));
        assert!(b.scalar.values().iter().all(|&r| r == 0.0));
    }

    #[test]
    fn round_reference_is_reproduced_exactly() {
        let grid = ChartGrid::s3_band(16).unwrap();
        let g = MetricField::reference(grid);
        let b = curvature_of(&g).unwrap();
        for (node, r) in b.scalar.values().iter().enumerate() {
            assert!((r - 6.0).abs() < 1e-12, "node {node}: {r}");
        }
    }
}
