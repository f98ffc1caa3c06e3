//! Dense complex linear algebra on bipartite spaces `X ⊗ Y`.
//!
//! Vectorization stacks the *rows* of a matrix: for an `m × n` matrix `A`,
//! entry `A[i, j]` lands at index `i·n + j`, so that `vec(x yᵀ) = x ⊗ y` and
//! `vec(A X B) = (A ⊗ Bᵀ) vec(X)`. Every identity in this crate is stated for
//! that convention.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type ComplexMatrix = DMatrix<Complex64>;
pub type ComplexVector = DVector<Complex64>;

/// Default tolerance for structural predicates.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Relative margin under which two entry magnitudes count as tied when
/// fixing a global phase.
const PHASE_TIE_MARGIN: f64 = 1e-10;

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub(crate) const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub(crate) const I: Complex64 = Complex64::new(0.0, 1.0);

/// Dimensions of `X = C^m` and `Y = C^n = X^k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Dims {
    m: usize,
    n: usize,
    k: usize,
}

impl Dims {
    pub fn new(m: usize, k: usize) -> Result<Self> {
        if m == 0 || k == 0 {
            return Err(Error::Dimension(format!(
                "m and k must be positive (got m={m}, k={k})"
            )));
        }
        Ok(Dims { m, n: m * k, k })
    }

    /// Dims for `Y ⊗ Y`, i.e. `X = Y`: the setting of the extended map.
    pub fn square(n: usize) -> Result<Self> {
        Dims::new(n, 1)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// `mn`, the dimension of `X ⊗ Y`.
    pub fn joint(&self) -> usize {
        self.m * self.n
    }

    /// `(mn)²`, the dimension of `L(X ⊗ Y)`.
    pub fn operator_space(&self) -> usize {
        self.joint() * self.joint()
    }
}

impl<'de> Deserialize<'de> for Dims {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            m: usize,
            n: usize,
            k: usize,
        }
        let raw = Raw::deserialize(deserializer)?;
        if raw.n != raw.m * raw.k {
            return Err(serde::de::Error::custom(format!(
                "dims require n = k·m (got m={}, n={}, k={})",
                raw.m, raw.n, raw.k
            )));
        }
        Dims::new(raw.m, raw.k).map_err(serde::de::Error::custom)
    }
}

/// Row-stacking vectorization.
pub fn vec(a: &ComplexMatrix) -> ComplexVector {
    let (rows, cols) = a.shape();
    ComplexVector::from_fn(rows * cols, |idx, _| a[(idx / cols, idx % cols)])
}

/// Inverse of [`vec`].
pub fn unvec(v: &ComplexVector, m: usize, n: usize) -> Result<ComplexMatrix> {
    if v.len() != m * n {
        return Err(Error::Dimension(format!(
            "cannot reshape a vector of length {} into {m}×{n}",
            v.len()
        )));
    }
    Ok(ComplexMatrix::from_fn(m, n, |i, j| v[i * n + j]))
}

pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

/// `tr_Y` on `L(X ⊗ Y)`, the unique linear map with `tr_Y(A ⊗ B) = tr(B) A`.
pub fn partial_trace_y(mat: &ComplexMatrix, m: usize, n: usize) -> Result<ComplexMatrix> {
    let d = m * n;
    if mat.shape() != (d, d) {
        return Err(Error::Dimension(format!(
            "partial trace over Y expects a {d}×{d} matrix, got {}×{}",
            mat.nrows(),
            mat.ncols()
        )));
    }
    Ok(ComplexMatrix::from_fn(m, m, |i, j| {
        (0..n).map(|a| mat[(i * n + a, j * n + a)]).sum()
    }))
}

/// `tr_X` on `L(X ⊗ Y)`.
pub fn partial_trace_x(mat: &ComplexMatrix, m: usize, n: usize) -> Result<ComplexMatrix> {
    let d = m * n;
    if mat.shape() != (d, d) {
        return Err(Error::Dimension(format!(
            "partial trace over X expects a {d}×{d} matrix, got {}×{}",
            mat.nrows(),
            mat.ncols()
        )));
    }
    Ok(ComplexMatrix::from_fn(n, n, |a, b| {
        (0..m).map(|i| mat[(i * n + a, i * n + b)]).sum()
    }))
}

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Seed for the `index`-th independent sample drawn under `seed`.
///
/// Sample streams derived this way do not depend on evaluation order.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    // splitmix64 finalizer over the pair
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A `rows × cols` matrix of i.i.d. standard complex normals.
pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re * scale, im * scale)
    })
}

/// A Haar-distributed `d × d` unitary: QR of a Ginibre matrix with the
/// phases of `diag(R)` moved into `Q`.
pub fn sample_haar_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> ComplexMatrix {
    let qr = ginibre(d, d, rng).qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..d {
        let diag = r[(j, j)];
        let norm = diag.norm();
        let phase = if norm > 0.0 { diag / norm } else { ONE };
        for i in 0..d {
            q[(i, j)] *= phase;
        }
    }
    q
}

pub fn haar_unitary(d: usize, seed: u64) -> ComplexMatrix {
    sample_haar_unitary(d, &mut seeded_rng(seed))
}

/// Random unit vector in `C^d`.
pub fn sample_unit_vector<R: Rng + ?Sized>(d: usize, rng: &mut R) -> ComplexVector {
    let g = ginibre(d, 1, rng);
    let norm = g.norm();
    ComplexVector::from_column_slice(g.as_slice()).unscale(norm)
}

/// `‖U U* − I‖_F`.
pub fn unitarity_deviation(u: &ComplexMatrix) -> f64 {
    let d = u.nrows();
    if u.ncols() != d {
        return f64::INFINITY;
    }
    (u * u.adjoint() - ComplexMatrix::identity(d, d)).norm()
}

/// Entry `(row, col)` selected by the global phase convention: the largest
/// magnitude, ties broken by lowest row-major index.
pub fn gauge_entry(a: &ComplexMatrix) -> Option<(usize, usize)> {
    let mut best: Option<((usize, usize), f64)> = None;
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            let mag = a[(i, j)].norm();
            match best {
                Some((_, top)) if mag <= top * (1.0 + PHASE_TIE_MARGIN) => {}
                _ if mag == 0.0 => {}
                _ => best = Some(((i, j), mag)),
            }
        }
    }
    best.map(|(idx, _)| idx)
}

/// Unit scalar `c` such that `c·a` satisfies the global phase convention.
pub fn phase_gauge(a: &ComplexMatrix) -> Complex64 {
    match gauge_entry(a) {
        Some(idx) => {
            let z = a[idx];
            z.conj() / z.norm()
        }
        None => ONE,
    }
}

/// Applies the global phase convention in place.
pub fn fix_phase(a: &mut ComplexMatrix) {
    let c = phase_gauge(a);
    a.iter_mut().for_each(|z| *z *= c);
}

/// `min_θ ‖a − e^{iθ} b‖_F`.
pub fn phase_aligned_distance(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    if a.shape() != b.shape() {
        return f64::INFINITY;
    }
    let overlap: Complex64 = b.iter().zip(a.iter()).map(|(x, y)| x.conj() * y).sum();
    let phase = if overlap.norm() > 0.0 {
        overlap / overlap.norm()
    } else {
        ONE
    };
    (a - b * phase).norm()
}

fn to_faer(a: &ComplexMatrix) -> faer::Mat<Complex64> {
    faer::Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)])
}

fn from_faer(a: faer::MatRef<'_, Complex64>) -> ComplexMatrix {
    ComplexMatrix::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)])
}

/// Dense product `A B` through `faer`'s blocked complex kernels, which are
/// much faster than the generic ones for large operands.
pub fn matmul(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    assert_eq!(a.ncols(), b.nrows(), "inner dimensions must agree");
    let product = to_faer(a) * to_faer(b);
    from_faer(product.as_ref())
}

/// Thin singular value decomposition `A = U diag(s) V*`, singular values
/// descending.
#[derive(Clone, Debug)]
pub struct Svd {
    pub u: ComplexMatrix,
    pub singular_values: Vec<f64>,
    pub v: ComplexMatrix,
}

/// Thin SVD of `a` (dense, divide-and-conquer via `faer`).
pub fn svd(a: &ComplexMatrix) -> Svd {
    if a.is_empty() {
        return Svd {
            u: ComplexMatrix::zeros(a.nrows(), 0),
            singular_values: Vec::new(),
            v: ComplexMatrix::zeros(a.ncols(), 0),
        };
    }
    let dec = to_faer(a)
        .thin_svd()
        .expect("SVD of a finite matrix converges");
    let singular_values = dec.S().column_vector().iter().map(|z| z.re).collect();
    Svd {
        u: from_faer(dec.U()),
        singular_values,
        v: from_faer(dec.V()),
    }
}

/// Eigen-decomposition of the Hermitian part of `a`, eigenvalues descending.
pub fn hermitian_eigen(a: &ComplexMatrix) -> (Vec<f64>, ComplexMatrix) {
    let herm = (a + a.adjoint()).scale(0.5);
    let eig = to_faer(&herm)
        .self_adjoint_eigen(faer::Side::Lower)
        .expect("Hermitian eigensolver converges on finite input");
    let raw: Vec<f64> = eig.S().column_vector().iter().map(|z| z.re).collect();
    let mut order: Vec<usize> = (0..raw.len()).collect();
    order.sort_by(|&x, &y| raw[y].total_cmp(&raw[x]));
    let values = order.iter().map(|&i| raw[i]).collect();
    let vectors = eig.U();
    let vectors = ComplexMatrix::from_fn(a.nrows(), order.len(), |r, c| vectors[(r, order[c])]);
    (values, vectors)
}

/// Singular values in descending order.
pub fn singular_values(a: &ComplexMatrix) -> Vec<f64> {
    if a.is_empty() {
        return Vec::new();
    }
    to_faer(a)
        .singular_values()
        .expect("SVD of a finite matrix converges")
}

/// Unitary polar factor `U V*` of `A = U Σ V*` (the nearest unitary to a
/// square `A`).
pub fn polar_unitary(a: &ComplexMatrix) -> ComplexMatrix {
    let dec = svd(a);
    dec.u * dec.v.adjoint()
}

/// Number of singular values above `tol·σ_max`.
pub fn numerical_rank(a: &ComplexMatrix, tol: f64) -> usize {
    let sv = singular_values(a);
    let top = sv.first().copied().unwrap_or(0.0);
    if top == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > tol * top).count()
}

/// Best rank-one PSD approximation `v v*` of a Hermitian matrix.
///
/// Returns `v` (phase-gauged, largest entry real positive) and the residual
/// `‖M − v v*‖_F`.
pub fn rank_one_factor(mat: &ComplexMatrix, tol: f64) -> Result<(ComplexVector, f64)> {
    if !mat.is_square() {
        return Err(Error::Dimension(format!(
            "rank-one factorization needs a square matrix, got {}×{}",
            mat.nrows(),
            mat.ncols()
        )));
    }
    let d = mat.nrows();
    let scale = mat.norm().max(1.0);
    let deviation = (mat - mat.adjoint()).norm();
    if deviation >= tol * scale {
        return Err(Error::NotHermitian { deviation });
    }
    let (values, vectors) = hermitian_eigen(mat);
    let top = values.first().copied().unwrap_or(0.0);
    if top <= 0.0 {
        return Ok((ComplexVector::zeros(d), mat.norm()));
    }
    let mut v = vectors.column(0).scale(top.sqrt());
    let c = phase_gauge(&ComplexMatrix::from_column_slice(d, 1, v.as_slice()));
    v.iter_mut().for_each(|z| *z *= c);
    let residual = (mat - &v * v.adjoint()).norm();
    Ok((v, residual))
}

/// Result of [`nearest_kron_factor`].
#[derive(Clone, Debug)]
pub struct KronFactors {
    pub u: ComplexMatrix,
    pub v: ComplexMatrix,
    pub residual: f64,
}

/// Rearranges an `mn × mn` matrix into the `m² × n²` matrix `R` with
/// `R[(i, j), (a, b)] = W[(i, a), (j, b)]`, so that `R(U ⊗ V) = vec(U) vec(V)ᵀ`.
pub fn kron_rearrange(w: &ComplexMatrix, m: usize, n: usize) -> Result<ComplexMatrix> {
    let d = m * n;
    if w.shape() != (d, d) {
        return Err(Error::Dimension(format!(
            "Kronecker rearrangement expects a {d}×{d} matrix, got {}×{}",
            w.nrows(),
            w.ncols()
        )));
    }
    Ok(ComplexMatrix::from_fn(m * m, n * n, |r, c| {
        let (i, j) = (r / m, r % m);
        let (a, b) = (c / n, c % n);
        w[(i * n + a, j * n + b)]
    }))
}

/// Nearest Kronecker product `U ⊗ V` to `W` in Frobenius norm.
///
/// The scale is split so that `‖U‖_F = √m` and the phase so that `U`
/// satisfies the global phase convention.
pub fn nearest_kron_factor(w: &ComplexMatrix, m: usize, n: usize) -> Result<KronFactors> {
    let rearranged = kron_rearrange(w, m, n)?;
    let dec = svd(&rearranged);
    let top = dec.singular_values[0];
    let root_m = (m as f64).sqrt();
    let mut u = unvec(&dec.u.column(0).into_owned(), m, m)?.scale(root_m);
    let c = phase_gauge(&u);
    u.iter_mut().for_each(|z| *z *= c);
    // R = Σ s_i u_i v_i*, and the row-vectorized V is the conjugated
    // right singular vector.
    let v_vec = dec.v.column(0).map(|z| z.conj()).scale(top / root_m) / c;
    let v = unvec(&v_vec, n, n)?;
    let residual = (w - kron(&u, &v)).norm();
    Ok(KronFactors { u, v, residual })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn vec_stacks_rows() {
        let a = ComplexMatrix::from_row_slice(2, 2, &[c(1., 0.), c(2., 0.), c(3., 0.), c(4., 1.)]);
        let v = vec(&a);
        assert_eq!(v.as_slice(), &[c(1., 0.), c(2., 0.), c(3., 0.), c(4., 1.)]);
        let one = ComplexMatrix::from_element(1, 1, c(0.5, -2.0));
        assert_eq!(vec(&one)[0], c(0.5, -2.0));
    }

    #[test]
    fn unvec_rejects_bad_length() {
        let v = ComplexVector::zeros(5);
        assert!(matches!(unvec(&v, 2, 2), Err(Error::Dimension(_))));
        let w = ComplexVector::from_vec(vec![c(1., 0.), c(2., 0.), c(3., 0.), c(4., 0.)]);
        let a = unvec(&w, 2, 2).unwrap();
        assert_eq!(a[(0, 1)], c(2., 0.));
        assert_eq!(a[(1, 0)], c(3., 0.));
    }

    #[test]
    fn kron_of_basis_elements() {
        let i6 = kron(&ComplexMatrix::identity(2, 2), &ComplexMatrix::identity(3, 3));
        assert_eq!(i6, ComplexMatrix::identity(6, 6));
        let mut e11 = ComplexMatrix::zeros(2, 2);
        e11[(0, 0)] = ONE;
        let mut big = ComplexMatrix::zeros(4, 4);
        big[(0, 0)] = ONE;
        assert_eq!(kron(&e11, &e11), big);
    }

    #[test]
    fn partial_trace_of_identity() {
        let t = partial_trace_y(&ComplexMatrix::identity(6, 6), 2, 3).unwrap();
        assert!((t - ComplexMatrix::identity(2, 2).scale(3.0)).norm() < 1e-15);
        assert!(partial_trace_y(&ComplexMatrix::identity(5, 5), 2, 3).is_err());
    }

    #[test]
    fn haar_scalar_has_unit_modulus() {
        let u = haar_unitary(1, 11);
        assert!((u[(0, 0)].norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn haar_is_deterministic_per_seed() {
        assert_eq!(haar_unitary(3, 5), haar_unitary(3, 5));
        assert!((haar_unitary(3, 5) - haar_unitary(3, 6)).norm() > 1e-3);
    }

    #[test]
    fn rank_one_edge_cases() {
        let (v, r) = rank_one_factor(&ComplexMatrix::identity(2, 2), 1e-9).unwrap();
        assert!((r - 1.0).abs() < 1e-12);
        assert!((v.norm() - 1.0).abs() < 1e-12);

        let (v, r) = rank_one_factor(&ComplexMatrix::zeros(3, 3), 1e-9).unwrap();
        assert_eq!(r, 0.0);
        assert_eq!(v.norm(), 0.0);

        let mut skew = ComplexMatrix::zeros(2, 2);
        skew[(0, 1)] = ONE;
        assert!(matches!(rank_one_factor(&skew, 1e-9), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn phase_convention_breaks_ties_by_first_index() {
        let a = ComplexMatrix::from_row_slice(1, 3, &[c(0., 1.), c(0., -1.), c(0.5, 0.)]);
        assert_eq!(gauge_entry(&a), Some((0, 0)));
        let mut b = a.clone();
        fix_phase(&mut b);
        assert!((b[(0, 0)] - ONE).norm() < 1e-15);
        assert!((b[(0, 1)] + ONE).norm() < 1e-15);
    }

    #[test]
    fn kron_factor_of_identity() {
        let f = nearest_kron_factor(&ComplexMatrix::identity(6, 6), 2, 3).unwrap();
        assert!(f.residual < 1e-12);
        assert!((&f.u - ComplexMatrix::identity(2, 2)).norm() < 1e-12);
        assert!((&f.v - ComplexMatrix::identity(3, 3)).norm() < 1e-12);
    }

    #[test]
    fn dims_validate() {
        assert!(Dims::new(0, 2).is_err());
        let d = Dims::new(2, 3).unwrap();
        assert_eq!((d.m(), d.n(), d.k(), d.joint()), (2, 6, 3, 12));
        let parsed: std::result::Result<Dims, _> =
            serde_json::from_str(r#"{"m": 2, "n": 5, "k": 2}"#);
        assert!(parsed.is_err());
    }
}
