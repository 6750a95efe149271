//! Rank-revealing helpers on top of nalgebra's SVD.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

/// Singular values of a constraint matrix (descending) with the rank decision.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub values: Vec<f64>,
    pub rank: usize,
    /// Values at or below this are treated as zero.
    pub threshold: f64,
    /// Smallest retained value over the largest discarded one. When nothing is
    /// discarded the denominator is the round-off floor `σ_max · ε · max(rows, cols)`.
    pub gap: f64,
}

impl Spectrum {
    pub fn nullity(&self) -> usize {
        self.values.len() - self.rank
    }
}

/// Numerical null space of `a`: right singular vectors whose singular value is
/// at most `tol_rank · σ_max`. Returns orthonormal vectors in the column space
/// of dimension `a.ncols()`.
pub fn null_space(a: &DMatrix<f64>, tol_rank: f64) -> (Spectrum, Vec<DVector<f64>>) {
    let (rows, cols) = a.shape();
    if cols == 0 {
        return (
            Spectrum {
                values: vec![],
                rank: 0,
                threshold: 0.0,
                gap: f64::INFINITY,
            },
            vec![],
        );
    }
    // pad so the SVD returns a full set of right singular vectors
    let padded = if rows < cols {
        let mut p = DMatrix::zeros(cols, cols);
        p.view_mut((0, 0), (rows, cols)).copy_from(a);
        p
    } else {
        a.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&x, &y| svd.singular_values[y].total_cmp(&svd.singular_values[x]));
    let values: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
    let smax = values.first().copied().unwrap_or(0.0);
    let threshold = tol_rank * smax;
    let rank = if smax == 0.0 {
        0
    } else {
        values.iter().filter(|&&s| s > threshold).count()
    };
    let floor = smax * f64::EPSILON * rows.max(cols) as f64;
    let gap = if rank == 0 {
        0.0
    } else {
        let retained = values[rank - 1];
        let discarded = values.get(rank).copied().unwrap_or(0.0).max(floor);
        retained / discarded
    };
    let kernel = order[rank..]
        .iter()
        .map(|&i| v_t.row(i).transpose().into_owned())
        .collect();
    (
        Spectrum {
            values,
            rank,
            threshold,
            gap,
        },
        kernel,
    )
}

/// Modified Gram-Schmidt (two passes) in the Euclidean inner product, keeping
/// only candidates whose residual norm exceeds `tol · ‖candidate‖`.
pub fn orthonormal_span(candidates: impl IntoIterator<Item = DVector<f64>>, tol: f64) -> Vec<DVector<f64>> {
    let mut out: Vec<DVector<f64>> = Vec::new();
    for c in candidates {
        let n0 = c.norm();
        if n0 == 0.0 {
            continue;
        }
        let mut v = c;
        for _ in 0..2 {
            for e in &out {
                let p = e.dot(&v);
                v.axpy(-p, e, 1.0);
            }
        }
        let n = v.norm();
        if n > tol * n0 {
            out.push(v / n);
        }
    }
    out
}

/// Largest principal-angle sine between two subspaces given by orthonormal
/// bases, symmetrized: the max over both directions of the norm of the
/// component of a basis vector outside the other subspace.
pub fn mutual_projection_residual(a: &[DVector<f64>], b: &[DVector<f64>]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let outside = |v: &DVector<f64>, basis: &[DVector<f64>]| {
        let mut w = v.clone();
        for e in basis {
            let p = e.dot(&w);
            w.axpy(-p, e, 1.0);
        }
        w.norm()
    };
    let ab = a.iter().map(|v| outside(v, b)).fold(0.0, f64::max);
    let ba = b.iter().map(|v| outside(v, a)).fold(0.0, f64::max);
    ab.max(ba)
}
