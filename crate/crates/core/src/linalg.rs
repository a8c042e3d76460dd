//! Dense complex matrix helpers shared by every engine.
//!
//! Multi-wire spaces are ordered with the first wire most significant, so the
//! basis state `|a, b>` on dims `(da, db)` has index `a * db + b`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Largest entrywise modulus of `a - b`; infinite when the shapes differ.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    if a.shape() != b.shape() {
        return f64::INFINITY;
    }
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn max_abs(a: &CMatrix) -> f64 {
    a.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

pub fn hermitian_deviation(m: &CMatrix) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    max_abs_diff(m, &m.adjoint())
}

/// Max deviation of `m m^dagger` from the identity.
pub fn unitarity_deviation(m: &CMatrix) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    max_abs_diff(&(m * m.adjoint()), &identity(m.nrows()))
}

/// Hermitian part of `m` shifted by a multiple of the identity at least its
/// norm, so the QR iteration never sees a zero diagonal.
fn shifted_hermitian_part(m: &CMatrix) -> (CMatrix, f64) {
    let mut h = (m + m.adjoint()) * c(0.5, 0.0);
    let shift = h.norm().max(1.0);
    for i in 0..h.nrows() {
        h[(i, i)] += c(shift, 0.0);
    }
    (h, shift)
}

/// Eigenvalues of the Hermitian part of `m`, ascending.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let (h, shift) = shifted_hermitian_part(m);
    let mut vals: Vec<f64> = h.symmetric_eigenvalues().iter().map(|v| v - shift).collect();
    vals.sort_by(|a, b| a.total_cmp(b));
    vals
}

/// Eigen-decomposition of the Hermitian part of `m`, eigenpairs sorted by
/// descending eigenvalue.
pub fn hermitian_eigen(m: &CMatrix) -> Vec<(f64, CVector)> {
    let (h, shift) = shifted_hermitian_part(m);
    let eig = SymmetricEigen::new(h);
    let mut pairs: Vec<(f64, CVector)> = eig
        .eigenvalues
        .iter()
        .enumerate()
        .map(|(i, &v)| (v - shift, eig.eigenvectors.column(i).into_owned()))
        .collect();
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
    pairs
}

pub fn trace(m: &CMatrix) -> Complex64 {
    m.diagonal().iter().sum()
}

/// `tr(a b)` without forming the product.
pub fn trace_product(a: &CMatrix, b: &CMatrix) -> Complex64 {
    let mut acc = ZERO;
    for i in 0..a.nrows() {
        for k in 0..a.ncols() {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

pub fn outer(v: &CVector) -> CMatrix {
    v * v.adjoint()
}

/// Partial trace of an operator on `dims`, keeping the wires listed in `keep`
/// (in ascending order).
pub fn partial_trace(rho: &CMatrix, dims: &[usize], keep: &[usize]) -> CMatrix {
    let total: usize = dims.iter().product();
    assert_eq!(rho.nrows(), total);
    let kept_dims: Vec<usize> = keep.iter().map(|&w| dims[w]).collect();
    let kept_total: usize = kept_dims.iter().product();
    let mut out = CMatrix::zeros(kept_total, kept_total);
    for r in 0..total {
        let ri = unflatten(r, dims);
        for col in 0..total {
            let ci = unflatten(col, dims);
            let traced_equal = (0..dims.len())
                .filter(|w| !keep.contains(w))
                .all(|w| ri[w] == ci[w]);
            if !traced_equal {
                continue;
            }
            let kr = flatten(keep.iter().map(|&w| ri[w]), &kept_dims);
            let kc = flatten(keep.iter().map(|&w| ci[w]), &kept_dims);
            out[(kr, kc)] += rho[(r, col)];
        }
    }
    out
}

/// Multi-index of a flat index, first wire most significant.
pub fn unflatten(mut index: usize, dims: &[usize]) -> Vec<usize> {
    let mut out = vec![0; dims.len()];
    for (slot, &d) in out.iter_mut().zip(dims).rev() {
        *slot = index % d;
        index /= d;
    }
    out
}

pub fn flatten(indices: impl IntoIterator<Item = usize>, dims: &[usize]) -> usize {
    indices
        .into_iter()
        .zip(dims)
        .fold(0, |acc, (i, &d)| acc * d + i)
}

/// Operator that moves wire `w` of the input to position `perm[w]` of the output.
pub fn wire_permutation(dims: &[usize], perm: &[usize]) -> CMatrix {
    let total: usize = dims.iter().product();
    let mut out_dims = vec![0; dims.len()];
    for (w, &p) in perm.iter().enumerate() {
        out_dims[p] = dims[w];
    }
    let mut m = CMatrix::zeros(total, total);
    for col in 0..total {
        let idx = unflatten(col, dims);
        let mut out_idx = vec![0; dims.len()];
        for (w, &p) in perm.iter().enumerate() {
            out_idx[p] = idx[w];
        }
        m[(flatten(out_idx, &out_dims), col)] = ONE;
    }
    m
}

pub fn basis_vector(dim: usize, i: usize) -> CVector {
    let mut v = CVector::zeros(dim);
    v[i] = ONE;
    v
}

pub fn kron_vectors(factors: &[CVector]) -> CVector {
    let mut acc = CVector::from_element(1, ONE);
    for f in factors {
        acc = acc.kronecker(f);
    }
    acc
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    c(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Haar-distributed unitary via QR of a complex Ginibre matrix.
pub fn random_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let g = CMatrix::from_fn(n, n, |_, _| gaussian(rng));
    let qr = g.qr();
    let q = qr.q();
    let r = qr.r();
    let mut u = q;
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { ONE };
        for i in 0..n {
            u[(i, j)] *= phase;
        }
    }
    u
}

pub fn random_state_vector<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CVector {
    let v = CVector::from_fn(n, |_, _| gaussian(rng));
    let norm = v.norm();
    v / c(norm, 0.0)
}

/// Full-rank density matrix `G G^dagger / tr` from a Ginibre matrix.
pub fn random_density<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let g = CMatrix::from_fn(n, n, |_, _| gaussian(rng));
    let m = &g * g.adjoint();
    let t = trace(&m);
    m / t
}

/// Direct sum of square matrices along the diagonal.
pub fn direct_sum(blocks: &[CMatrix]) -> CMatrix {
    let total: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = CMatrix::zeros(total, total);
    let mut offset = 0;
    for b in blocks {
        out.view_mut((offset, offset), (b.nrows(), b.ncols()))
            .copy_from(b);
        offset += b.nrows();
    }
    out
}
