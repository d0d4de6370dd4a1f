//! Dense complex matrix helpers shared by the algebra, norm and map modules.
//!
//! Everything here works on `nalgebra::DMatrix<Complex64>`. Hermitian
//! eigendecompositions come back sorted in ascending order.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
#[allow(unused_imports)] // inherent f64 methods shadow it when std is linked
use num_traits::Float;

pub type C64 = Complex64;
pub type Mat = DMatrix<C64>;
pub type Vector = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

#[inline]
pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Eigenvalues (ascending) and orthonormal eigenvectors of the Hermitian part of `h`.
pub fn hermitian_eigen(h: &Mat) -> (Vec<f64>, Mat) {
    let n = h.nrows();
    let sym = (h + h.adjoint()) * c(0.5);
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = Mat::from_fn(n, n, |r, k| eig.eigenvectors[(r, order[k])]);
    (values, vectors)
}

/// Thin singular value decomposition `x = U diag(s) V*` with `s` descending.
pub struct Svd {
    pub u: Mat,
    pub s: Vec<f64>,
    pub v: Mat,
}

/// nalgebra's bidiagonal SVD occasionally returns an inaccurate factorization
/// for complex input, so its output is checked and, when it fails, replaced by
/// the eigendecomposition of `[[0, X], [X*, 0]]` (eigenvalues `±σ`).
pub fn svd(x: &Mat) -> Svd {
    let (r, cols) = x.shape();
    let k = r.min(cols);
    if k == 0 {
        return Svd { u: Mat::zeros(r, 0), s: Vec::new(), v: Mat::zeros(cols, 0) };
    }
    let dec = x.clone().svd(true, true);
    if let (Some(u), Some(v_t)) = (dec.u, dec.v_t) {
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&a, &b| dec.singular_values[b].total_cmp(&dec.singular_values[a]));
        let s = order.iter().map(|&i| dec.singular_values[i]).collect();
        let u_sorted = Mat::from_fn(u.nrows(), k, |row, j| u[(row, order[j])]);
        let v_sorted = Mat::from_fn(v_t.ncols(), k, |row, j| v_t[(order[j], row)].conj());
        let out = Svd { u: u_sorted, s, v: v_sorted };
        if svd_is_accurate(x, &out) {
            return out;
        }
    }
    dilation_svd(x)
}

fn svd_is_accurate(x: &Mat, d: &Svd) -> bool {
    let k = d.s.len();
    let tol = 1e-12 * (1.0 + x.norm()) * (1 + x.nrows().max(x.ncols())) as f64;
    let sig = Mat::from_fn(k, k, |a, b| if a == b { c(d.s[a]) } else { ZERO });
    let recon = (&d.u * sig * d.v.adjoint() - x).norm();
    let iu = (d.u.adjoint() * &d.u - Mat::identity(k, k)).norm();
    let iv = (d.v.adjoint() * &d.v - Mat::identity(k, k)).norm();
    recon <= tol && iu <= 1e-12 * k as f64 && iv <= 1e-12 * k as f64
}

fn dilation_svd(x: &Mat) -> Svd {
    let (r, cols) = x.shape();
    let k = r.min(cols);
    let n = r + cols;
    let mut h = Mat::zeros(n, n);
    h.view_mut((0, r), (r, cols)).copy_from(x);
    h.view_mut((r, 0), (cols, r)).copy_from(&x.adjoint());
    let (vals, vecs) = hermitian_eigen(&h);
    let top = vals.last().copied().unwrap_or(0.0).max(0.0);
    let cut = 1e-13 * top * n as f64;
    let mut u = Mat::zeros(r, k);
    let mut v = Mat::zeros(cols, k);
    let mut s = Vec::with_capacity(k);
    for j in 0..k {
        let idx = n - 1 - j;
        let lam = vals[idx].max(0.0);
        let col = vecs.column(idx);
        let (mut uj, mut vj) = (col.rows(0, r).into_owned(), col.rows(r, cols).into_owned());
        if lam <= cut {
            // the kernel directions mix; rebuilt below
            uj.fill(ZERO);
            vj.fill(ZERO);
            s.push(0.0);
        } else {
            s.push(lam);
            uj /= c(uj.norm());
            vj /= c(vj.norm());
        }
        u.set_column(j, &uj);
        v.set_column(j, &vj);
    }
    complete_columns(&mut u, &s, cut);
    complete_columns(&mut v, &s, cut);
    Svd { u, s, v }
}

/// Replaces the columns whose singular value is below `cut` by an orthonormal
/// completion of the others.
fn complete_columns(m: &mut Mat, s: &[f64], cut: f64) {
    let (rows, k) = m.shape();
    let mut e = 0;
    for j in 0..k {
        if s[j] > cut {
            continue;
        }
        loop {
            let mut cand = Vector::zeros(rows);
            cand[e % rows] = ONE;
            e += 1;
            for i in 0..k {
                if i == j || (s[i] <= cut && i > j) {
                    continue;
                }
                let q = m.column(i).into_owned();
                let proj = q.dotc(&cand);
                cand -= q * proj;
            }
            let nrm = cand.norm();
            if nrm > 1e-6 {
                m.set_column(j, &(cand / c(nrm)));
                break;
            }
            if e > 2 * rows + k {
                break;
            }
        }
    }
}

pub fn singular_values(x: &Mat) -> Vec<f64> {
    if x.is_empty() {
        return Vec::new();
    }
    svd(x).s
}

/// Applies `f` to the eigenvalues of the Hermitian matrix `h`. Eigenvalues at or
/// below `cut` are sent to zero instead of through `f`.
pub fn hermitian_function(h: &Mat, cut: f64, f: impl Fn(f64) -> f64) -> Mat {
    let (vals, vecs) = hermitian_eigen(h);
    let n = h.nrows();
    let mut out = Mat::zeros(n, n);
    for (k, &lam) in vals.iter().enumerate() {
        if lam <= cut {
            continue;
        }
        let col = vecs.column(k);
        out += (&col * col.adjoint()) * c(f(lam));
    }
    out
}

/// `h^e` on the support of the positive semidefinite matrix `h`, with eigenvalues
/// below `rel_cut * max_eig` treated as zero. Negative exponents give pseudo-inverse powers.
pub fn psd_power(h: &Mat, e: f64, rel_cut: f64) -> Mat {
    let (vals, _) = hermitian_eigen(h);
    let top = vals.last().copied().unwrap_or(0.0).max(0.0);
    if top == 0.0 {
        return Mat::zeros(h.nrows(), h.ncols());
    }
    hermitian_function(h, rel_cut * top, |l| l.powf(e))
}

pub fn kron(a: &Mat, b: &Mat) -> Mat {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    Mat::from_fn(ar * br, ac * bc, |r, col| a[(r / br, col / bc)] * b[(r % br, col % bc)])
}

/// Largest singular value, or zero for an empty matrix.
pub fn spectral_norm(x: &Mat) -> f64 {
    singular_values(x).into_iter().fold(0.0, f64::max)
}

/// Moore–Penrose pseudo-inverse with relative cut on the singular values.
pub fn pinv(x: &Mat, rel_cut: f64) -> Mat {
    let Svd { u, s, v } = svd(x);
    let top = s.first().copied().unwrap_or(0.0);
    let mut out = Mat::zeros(x.ncols(), x.nrows());
    for (k, &sk) in s.iter().enumerate() {
        if sk <= rel_cut * top || sk == 0.0 {
            continue;
        }
        out += (v.column(k) * u.column(k).adjoint()) * c(1.0 / sk);
    }
    out
}

/// Orthonormal basis of the null space of `a`, using singular values below
/// `rel_tol * sigma_max` (or exactly zero) as the cut.
pub fn null_space(a: &Mat, rel_tol: f64) -> Vec<Vector> {
    null_space_by(a, |top| rel_tol * top)
}

/// Null space with the absolute cut `sigma <= abs_tol`, for inputs whose scale is
/// known (e.g. built from an orthonormal basis) and may be entirely noise.
pub fn null_space_absolute(a: &Mat, abs_tol: f64) -> Vec<Vector> {
    null_space_by(a, |_| abs_tol)
}

fn null_space_by(a: &Mat, cut: impl Fn(f64) -> f64) -> Vec<Vector> {
    let cols = a.ncols();
    if cols == 0 {
        return Vec::new();
    }
    // a tall matrix shares its null space with the square factor R of a = QR
    let reduced = if a.nrows() > cols { a.clone().qr().r() } else { a.clone() };
    let mut padded = Mat::zeros(cols, cols);
    padded.view_mut((0, 0), (reduced.nrows(), cols)).copy_from(&reduced);
    let Svd { s, v, .. } = svd(&padded);
    let top = s.first().copied().unwrap_or(0.0);
    let cut = cut(top);
    let mut out = Vec::new();
    for (k, &sk) in s.iter().enumerate() {
        if top == 0.0 || sk <= cut {
            out.push(v.column(k).into_owned());
        }
    }
    out
}

/// Numerical rank with a relative singular value cut.
pub fn rank(a: &Mat, rel_tol: f64) -> usize {
    let s = singular_values(a);
    let top = s.iter().copied().fold(0.0, f64::max);
    if top == 0.0 {
        return 0;
    }
    s.iter().filter(|&&x| x > rel_tol * top).count()
}

/// Incrementally built orthonormal basis of a subspace of `C^dim`.
#[derive(Debug, Clone)]
pub struct SpanBasis {
    dim: usize,
    basis: Vec<Vector>,
    tol: f64,
}

impl SpanBasis {
    pub fn new(dim: usize, tol: f64) -> Self {
        Self { dim, basis: Vec::new(), tol }
    }

    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.basis.len() >= self.dim
    }

    pub fn vectors(&self) -> &[Vector] {
        &self.basis
    }

    fn residual(&self, v: &Vector) -> Vector {
        let mut r = v.clone();
        // two passes of modified Gram-Schmidt
        for _ in 0..2 {
            for b in &self.basis {
                let coef = b.dotc(&r);
                r -= b * coef;
            }
        }
        r
    }

    /// Adds `v` if it is not already in the span (relative to its own norm).
    pub fn insert(&mut self, v: &Vector) -> bool {
        let scale = v.norm();
        if scale == 0.0 || self.is_full() {
            return false;
        }
        let r = self.residual(v);
        let rn = r.norm();
        if rn <= self.tol * scale {
            return false;
        }
        self.basis.push(r / c(rn));
        true
    }

    /// Distance of `v` from the span, relative to `|v|` (zero for `v = 0`).
    pub fn relative_distance(&self, v: &Vector) -> f64 {
        let scale = v.norm();
        if scale == 0.0 {
            return 0.0;
        }
        self.residual(v).norm() / scale
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m2(a: [[f64; 2]; 2]) -> Mat {
        Mat::from_fn(2, 2, |r, k| c(a[r][k]))
    }

    #[test]
    fn eigen_sorted_ascending() {
        let (vals, vecs) = hermitian_eigen(&m2([[3.0, 0.0], [0.0, 1.0]]));
        assert!((vals[0] - 1.0).abs() < 1e-14 && (vals[1] - 3.0).abs() < 1e-14);
        assert!((vecs[(1, 0)].norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn svd_reconstructs() {
        let x = Mat::from_fn(3, 3, |r, k| C64::new((r * 3 + k) as f64 - 2.5, (r as f64) * 0.5));
        let Svd { u, s, v } = svd(&x);
        let sig = Mat::from_fn(s.len(), s.len(), |r, k| if r == k { c(s[r]) } else { ZERO });
        assert!((u * sig * v.adjoint() - &x).norm() < 1e-12);
        assert!(s.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn svd_fallback_matches_oracle() {
        // diag(2, 1, 1, 0) conjugated by fixed unitaries, with a repeated value
        let mut r = crate::random::rng(7);
        let a = crate::random::unitary_matrix(&mut r, 4);
        let b = crate::random::unitary_matrix(&mut r, 4);
        let d = Mat::from_fn(4, 4, |i, j| if i == j { c([2.0, 1.0, 1.0, 0.0][i]) } else { ZERO });
        let x = &a * d * b.adjoint();
        for dec in [svd(&x), dilation_svd(&x)] {
            assert!(svd_is_accurate(&x, &dec));
            for (got, want) in dec.s.iter().zip([2.0, 1.0, 1.0, 0.0]) {
                assert!((got - want).abs() < 1e-12);
            }
        }
        let wide = Mat::from_fn(2, 3, |i, j| c((i + 2 * j) as f64));
        assert!(svd_is_accurate(&wide, &dilation_svd(&wide)));
    }

    #[test]
    fn null_space_of_rank_one() {
        let a = m2([[1.0, 1.0], [2.0, 2.0]]);
        let ns = null_space(&a, 1e-12);
        assert_eq!(ns.len(), 1);
        assert!((&a * &ns[0]).norm() < 1e-12);
        assert_eq!(rank(&a, 1e-12), 1);
    }

    #[test]
    fn wide_null_space() {
        let a = Mat::from_fn(1, 3, |_, k| c(k as f64 + 1.0));
        assert_eq!(null_space(&a, 1e-12).len(), 2);
    }

    #[test]
    fn pinv_inverts_on_support() {
        let a = m2([[2.0, 0.0], [0.0, 0.0]]);
        let p = pinv(&a, 1e-12);
        assert!((p[(0, 0)] - c(0.5)).norm() < 1e-14 && p[(1, 1)].norm() < 1e-14);
    }

    #[test]
    fn span_basis_rejects_dependent_vectors() {
        let mut s = SpanBasis::new(3, 1e-10);
        let v = Vector::from_vec(alloc::vec![ONE, ZERO, ONE]);
        assert!(s.insert(&v));
        assert!(!s.insert(&(v.clone() * c(2.0))));
        assert!(s.relative_distance(&v) < 1e-14);
    }

    #[test]
    fn kron_shape_and_entries() {
        let a = m2([[1.0, 2.0], [3.0, 4.0]]);
        let id = Mat::identity(2, 2);
        let k = kron(&a, &id);
        assert_eq!(k.shape(), (4, 4));
        assert_eq!(k[(2, 0)], c(3.0));
        assert_eq!(k[(2, 1)], ZERO);
    }
}
