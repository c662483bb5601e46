//! Dense complex linear algebra helpers shared by the operator models,
//! the projection diagnostics and the spectral-subspace oracle.
//!
//! Factorizations (LU, QR, SVD, Schur) come from nalgebra; the Schur
//! reordering used to group eigenvalues into invariant subspaces is
//! implemented here with unitary adjacent swaps, since no crate exposes it.

use crate::error::{Result, SpectralCutError};
use crate::{C64, CMatrix, CVector};

/// Largest singular value by power iteration on `A*A`, converged to 1e-10
/// relative or 2000 iterations, whichever comes first.
pub fn operator_norm(a: &CMatrix) -> f64 {
    let (m, n) = a.shape();
    if m == 0 || n == 0 {
        return 0.0;
    }
    // deterministic start with a ramp so symmetric matrices don't stall
    let mut v = CVector::from_fn(n, |i, _| C64::new(1.0 + 0.1 * (i as f64), 0.05 * (i as f64)));
    let nv = v.norm();
    v /= C64::new(nv, 0.0);
    let mut sigma = 0.0f64;
    for _ in 0..2000 {
        let av = a * &v;
        let new_sigma = av.norm();
        if new_sigma == 0.0 {
            return 0.0;
        }
        let w = a.adjoint() * av;
        let nw = w.norm();
        if nw == 0.0 {
            return new_sigma;
        }
        v = w / C64::new(nw, 0.0);
        if (new_sigma - sigma).abs() <= 1e-10 * new_sigma {
            return new_sigma;
        }
        sigma = new_sigma;
    }
    sigma
}

/// Induced 1-norm (maximum column absolute sum).
pub fn one_norm(a: &CMatrix) -> f64 {
    let (m, n) = a.shape();
    let mut best = 0.0f64;
    for j in 0..n {
        let mut s = 0.0;
        for i in 0..m {
            s += a[(i, j)].norm();
        }
        best = best.max(s);
    }
    best
}

/// Error-threshold scale: `max(1, one-norm estimate)`.
pub fn scale_of(a: &CMatrix) -> f64 {
    one_norm(a).max(1.0)
}

/// Complex Schur form `A = Q T Q*` with `T` upper triangular.
pub fn schur(a: &CMatrix) -> Result<(CMatrix, CMatrix)> {
    let n = a.nrows();
    if n == 0 {
        return Ok((CMatrix::zeros(0, 0), CMatrix::zeros(0, 0)));
    }
    if let Some(s) = a.clone().try_schur(1e-14, 200_000) {
        let (q, t) = s.unpack();
        return Ok((q, t));
    }
    // rare convergence failure: nudge the diagonal by a scale-relative tiny
    // shift and retry
    let eps = 1e-13 * scale_of(a);
    let mut b = a.clone();
    for i in 0..n {
        b[(i, i)] += C64::new(eps * (1.0 + i as f64 / n as f64), eps);
    }
    if let Some(s) = b.try_schur(1e-12, 200_000) {
        let (q, t) = s.unpack();
        return Ok((q, t));
    }
    Err(SpectralCutError::EigKoFailure)
}

/// Eigenvalues with multiplicity (diagonal of the Schur factor).
pub fn eigenvalues(a: &CMatrix) -> Result<Vec<C64>> {
    let (_, t) = schur(a)?;
    Ok((0..a.nrows()).map(|i| t[(i, i)]).collect())
}

/// Swaps the diagonal entries `t[p,p]` and `t[p+1,p+1]` of an upper
/// triangular `t` by a unitary similarity, updating `q` accordingly.
///
/// The 2x2 transform has the (normalized) eigenvector of the trailing
/// eigenvalue as its first column, which retriangularizes the block with the
/// diagonal exchanged.
fn swap_adjacent(q: &mut CMatrix, t: &mut CMatrix, p: usize) {
    let n = t.nrows();
    let a = t[(p, p)];
    let b = t[(p, p + 1)];
    let d = t[(p + 1, p + 1)];
    // eigenvector of [[a, b], [0, d]] for eigenvalue d
    let v0 = b;
    let v1 = d - a;
    let nv = (v0.norm_sqr() + v1.norm_sqr()).sqrt();
    if nv == 0.0 {
        // equal eigenvalues with zero coupling: nothing to do
        return;
    }
    let g00 = v0 / nv;
    let g10 = v1 / nv;
    // second column orthogonal to the first
    let g01 = -g10.conj();
    let g11 = g00.conj();

    // T <- G* T G on rows/cols p, p+1
    for j in 0..n {
        let tp = t[(p, j)];
        let tq = t[(p + 1, j)];
        t[(p, j)] = g00.conj() * tp + g10.conj() * tq;
        t[(p + 1, j)] = g01.conj() * tp + g11.conj() * tq;
    }
    for i in 0..n {
        let tp = t[(i, p)];
        let tq = t[(i, p + 1)];
        t[(i, p)] = tp * g00 + tq * g10;
        t[(i, p + 1)] = tp * g01 + tq * g11;
    }
    t[(p + 1, p)] = C64::new(0.0, 0.0);
    for i in 0..n {
        let qp = q[(i, p)];
        let qq = q[(i, p + 1)];
        q[(i, p)] = qp * g00 + qq * g10;
        q[(i, p + 1)] = qp * g01 + qq * g11;
    }
}

/// Reorders a Schur pair so the eigenvalues selected by `select` occupy the
/// leading block; returns the number of selected eigenvalues. The first k
/// columns of the updated `q` then span the corresponding invariant
/// subspace.
pub fn reorder_schur(q: &mut CMatrix, t: &mut CMatrix, select: &[bool]) -> usize {
    let n = t.nrows();
    debug_assert_eq!(select.len(), n);
    let mut selected: Vec<bool> = select.to_vec();
    let mut k = 0usize;
    for i in 0..n {
        if !selected[i] {
            continue;
        }
        // bubble position i down to position k
        let mut p = i;
        while p > k {
            swap_adjacent(q, t, p - 1);
            selected.swap(p - 1, p);
            p -= 1;
        }
        k += 1;
    }
    k
}

/// Orthonormal basis (n×k) of the invariant subspace for the eigenvalues
/// picked by `select`, via Schur reordering.
pub fn invariant_subspace(a: &CMatrix, select: impl Fn(C64) -> bool) -> Result<CMatrix> {
    let (mut q, mut t) = schur(a)?;
    let sel: Vec<bool> = (0..a.nrows()).map(|i| select(t[(i, i)])).collect();
    let k = reorder_schur(&mut q, &mut t, &sel);
    Ok(q.columns(0, k).into_owned())
}

/// Singular values in descending order.
pub fn singular_values(a: &CMatrix) -> Vec<f64> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Vec::new();
    }
    let svd = a
        .clone()
        .try_svd(false, false, 1e-14, 200_000)
        .expect("svd convergence");
    let mut sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    sv.sort_by(|x, y| y.partial_cmp(x).unwrap());
    sv
}

/// Numerical rank with a fixed singular-value cutoff.
pub fn rank_with_cutoff(a: &CMatrix, cutoff: f64) -> usize {
    singular_values(a).into_iter().filter(|s| *s > cutoff).count()
}

/// Orthonormal basis of the column space of `a`: column-pivoted modified
/// Gram–Schmidt with full deflation and a re-orthogonalization pass,
/// keeping directions while the largest residual column norm exceeds
/// `cutoff`. (The SVD is kept for singular *values*; its singular vectors
/// lose several digits on rank-deficient matrices.)
pub fn range_basis(a: &CMatrix, cutoff: f64) -> CMatrix {
    let (n, m) = a.shape();
    if n == 0 || m == 0 {
        return CMatrix::zeros(n, 0);
    }
    let mut cols: Vec<CVector> = (0..m).map(|j| a.column(j).into_owned()).collect();
    let mut qs: Vec<CVector> = Vec::new();
    for _ in 0..n.min(m) {
        let (best, best_norm) = cols
            .iter()
            .enumerate()
            .map(|(i, c)| (i, c.norm()))
            .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
            .unwrap();
        if best_norm <= cutoff {
            break;
        }
        let mut q = cols[best].clone() / C64::new(best_norm, 0.0);
        for prev in &qs {
            let coef = prev.dotc(&q);
            q -= prev * coef;
        }
        let nq = q.norm();
        if nq <= 1e-12 {
            break;
        }
        q /= C64::new(nq, 0.0);
        for c in cols.iter_mut() {
            let coef = q.dotc(&c.clone());
            *c -= &q * coef;
        }
        qs.push(q);
    }
    let mut b = CMatrix::zeros(n, qs.len());
    for (j, q) in qs.iter().enumerate() {
        b.set_column(j, q);
    }
    b
}

/// Orthonormal basis of the kernel of a (near-)idempotent matrix: the
/// range of `I − P`.
pub fn projection_kernel_basis(p: &CMatrix, cutoff: f64) -> CMatrix {
    let n = p.nrows();
    range_basis(&(identity(n) - p), cutoff)
}

/// Orthonormal basis of the kernel of `a` (right singular vectors below
/// `cutoff`).
pub fn kernel_basis(a: &CMatrix, cutoff: f64) -> CMatrix {
    let n = a.ncols();
    if n == 0 {
        return CMatrix::zeros(0, 0);
    }
    let svd = a
        .clone()
        .try_svd(false, true, 1e-14, 200_000)
        .expect("svd convergence");
    let vt = svd.v_t.unwrap();
    let k_rows = vt.nrows();
    let mut vecs: Vec<CVector> = (0..k_rows)
        .filter(|&i| svd.singular_values[i] <= cutoff)
        .map(|i| CVector::from_fn(n, |j, _| vt[(i, j)].conj()))
        .collect();
    if k_rows < n {
        // complete with the orthogonal complement of the row space
        let mut basis: Vec<CVector> = (0..k_rows)
            .map(|i| CVector::from_fn(n, |j, _| vt[(i, j)].conj()))
            .collect();
        for j in 0..n {
            let mut e = CVector::zeros(n);
            e[j] = C64::new(1.0, 0.0);
            for b in &basis {
                let c = b.dotc(&e);
                e -= b * c;
            }
            let ne = e.norm();
            if ne > 1e-10 {
                e /= C64::new(ne, 0.0);
                basis.push(e.clone());
                vecs.push(e);
            }
        }
    }
    let mut b = CMatrix::zeros(n, vecs.len());
    for (jj, v) in vecs.iter().enumerate() {
        b.set_column(jj, v);
    }
    b
}

/// Re-orthonormalizes the columns of `b` (modified Gram–Schmidt with a
/// second pass), dropping dependent columns.
pub fn orthonormalize(b: &CMatrix) -> CMatrix {
    let (n, k) = b.shape();
    if k == 0 {
        return b.clone();
    }
    let mut cols: Vec<CVector> = Vec::with_capacity(k);
    for j in 0..k {
        let mut v = b.column(j).into_owned();
        for c in &cols {
            let coef = c.dotc(&v);
            v -= c * coef;
        }
        for c in &cols {
            let coef = c.dotc(&v);
            v -= c * coef;
        }
        let nv = v.norm();
        if nv > 1e-12 {
            v /= C64::new(nv, 0.0);
            cols.push(v);
        }
    }
    let mut q = CMatrix::zeros(n, cols.len());
    for (j, c) in cols.iter().enumerate() {
        q.set_column(j, c);
    }
    q
}

/// Sine of the largest principal angle between the column spans of `b1` and
/// `b2`, computed as `‖(I − Q₁Q₁*)Q₂‖₂` to stay accurate for small angles.
/// Returns 1.0 when the dimensions differ.
pub fn max_principal_angle_sin(b1: &CMatrix, b2: &CMatrix) -> f64 {
    let q1 = orthonormalize(b1);
    let q2 = orthonormalize(b2);
    if q1.ncols() != q2.ncols() {
        return 1.0;
    }
    if q1.ncols() == 0 {
        return 0.0;
    }
    let resid = &q2 - &q1 * (q1.adjoint() * &q2);
    operator_norm(&resid).min(1.0)
}

/// Oblique projector with range `span(b_range)` and kernel `span(b_kernel)`,
/// built from the block inverse of `[b_range | b_kernel]`.
pub fn oblique_projector(b_range: &CMatrix, b_kernel: &CMatrix) -> Result<CMatrix> {
    let n = b_range.nrows();
    let k = b_range.ncols();
    if k + b_kernel.ncols() != n {
        return Err(SpectralCutError::Other(format!(
            "range ({k}) and kernel ({}) dimensions do not span C^{n}",
            b_kernel.ncols()
        )));
    }
    let mut m = CMatrix::zeros(n, n);
    for j in 0..k {
        m.set_column(j, &b_range.column(j));
    }
    for j in 0..b_kernel.ncols() {
        m.set_column(k + j, &b_kernel.column(j));
    }
    let lu = m.clone().lu();
    let inv = lu
        .try_inverse()
        .ok_or_else(|| SpectralCutError::Other("range ⊕ kernel basis is singular".into()))?;
    let mut sel = CMatrix::zeros(n, n);
    for j in 0..k {
        sel[(j, j)] = C64::new(1.0, 0.0);
    }
    Ok(m * sel * inv)
}

/// Solves `A X = B` by LU; errors if A is numerically singular.
pub fn lu_solve_matrix(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    let lu = a.clone().lu();
    lu.solve(b)
        .ok_or_else(|| SpectralCutError::Other("LU solve failed: singular matrix".into()))
}

/// Least-squares solve `min ‖A X − B‖` through the SVD pseudo-inverse with
/// relative cutoff 1e-12.
pub fn lstsq(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let svd = a
        .clone()
        .try_svd(true, true, 1e-14, 200_000)
        .expect("svd convergence");
    let smax = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
    let u = svd.u.unwrap();
    let vt = svd.v_t.unwrap();
    let k = svd.singular_values.len();
    let mut si = CMatrix::zeros(k, k);
    for i in 0..k {
        let s = svd.singular_values[i];
        si[(i, i)] = if s > 1e-12 * smax.max(1e-300) {
            C64::new(1.0 / s, 0.0)
        } else {
            C64::new(0.0, 0.0)
        };
    }
    vt.adjoint() * si * u.adjoint() * b
}

/// Condition number estimate (ratio of extreme singular values).
pub fn cond_2(a: &CMatrix) -> f64 {
    let sv = singular_values(a);
    match (sv.first(), sv.last()) {
        (Some(&hi), Some(&lo)) if lo > 0.0 => hi / lo,
        _ => f64::INFINITY,
    }
}

/// Hausdorff distance between two finite point sets.
pub fn hausdorff(a: &[C64], b: &[C64]) -> f64 {
    let one_sided = |xs: &[C64], ys: &[C64]| -> f64 {
        xs.iter()
            .map(|x| {
                ys.iter()
                    .map(|y| (x - y).norm())
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max)
    };
    if a.is_empty() && b.is_empty() {
        return 0.0;
    }
    if a.is_empty() || b.is_empty() {
        return f64::INFINITY;
    }
    one_sided(a, b).max(one_sided(b, a))
}

/// Identity matrix shorthand.
pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}
