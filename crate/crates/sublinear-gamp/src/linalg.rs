//! Dense matrix-vector kernels over row-major matrices.
//!
//! `ndarray`'s `A.t().dot(v)` walks columns of a row-major array, which is
//! cache-hostile at our shapes; the transpose product here accumulates
//! row-axpy updates over contiguous rows instead. Both kernels use fixed
//! evaluation order, so results are bitwise reproducible.

use ndarray::{Array1, Array2};

/// Dot product with eight independent accumulators, so the reduction
/// pipelines instead of serializing on one register.
fn dot(rs: &[f64], xs: &[f64]) -> f64 {
    let mut acc = [0.0f64; 8];
    let rc = rs.chunks_exact(8);
    let xc = xs.chunks_exact(8);
    let (rrem, xrem) = (rc.remainder(), xc.remainder());
    for (r8, x8) in rc.zip(xc) {
        for l in 0..8 {
            acc[l] += r8[l] * x8[l];
        }
    }
    let mut tail = 0.0;
    for (rv, xv) in rrem.iter().zip(xrem) {
        tail += rv * xv;
    }
    ((acc[0] + acc[1]) + (acc[2] + acc[3])) + ((acc[4] + acc[5]) + (acc[6] + acc[7])) + tail
}

/// y = A·x.
pub fn mat_vec(a: &Array2<f64>, x: &Array1<f64>) -> Array1<f64> {
    let (m, _) = a.dim();
    let xs = x.as_slice().expect("contiguous");
    let mut out = Array1::zeros(m);
    let os = out.as_slice_mut().expect("contiguous");
    for (i, oi) in os.iter_mut().enumerate() {
        let row = a.row(i);
        let rs = row.to_slice().expect("row-major rows are contiguous");
        *oi = dot(rs, xs);
    }
    out
}

/// y = Aᵀ·v, accumulated row by row.
pub fn mat_t_vec(a: &Array2<f64>, v: &Array1<f64>) -> Array1<f64> {
    let (m, n) = a.dim();
    let vs = v.as_slice().expect("contiguous");
    let mut out = Array1::zeros(n);
    let os = out.as_slice_mut().expect("contiguous");
    for i in 0..m {
        let c = vs[i];
        if c == 0.0 {
            continue;
        }
        let row = a.row(i);
        let rs = row.to_slice().expect("row-major rows are contiguous");
        for (ov, rv) in os.iter_mut().zip(rs) {
            *ov += c * rv;
        }
    }
    out
}
