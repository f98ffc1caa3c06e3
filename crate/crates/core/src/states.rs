//! Coisometries and maximally entangled states.
//!
//! A unit vector `u ∈ X ⊗ Y` is maximally entangled exactly when
//! `u = vec(A)/√m` for a coisometry `A: Y → X` (`A A* = I_m`). The map
//! `π_A = vec(A) vec(A)* / tr(A A*)` sends coisometries onto the set of
//! maximally entangled states (MES), and is constant on projective classes.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::MatrixJson;
use crate::tensor::{
    self, partial_trace_y, rank_one_factor, sample_haar_unitary, seeded_rng, unvec, ComplexMatrix,
    Dims,
};

/// An `m × n` matrix with `A A* = I_m`.
#[derive(Clone, Debug, PartialEq)]
pub struct Coisometry {
    matrix: ComplexMatrix,
    dims: Dims,
}

impl Coisometry {
    pub fn new(matrix: ComplexMatrix, tol: f64) -> Result<Self> {
        let dims = dims_of(&matrix)?;
        let deviation = coisometry_deviation(&matrix);
        if deviation >= tol {
            return Err(Error::Invalid(format!(
                "not a coisometry: ‖AA* − I‖_F = {deviation:.3e}"
            )));
        }
        Ok(Coisometry { matrix, dims })
    }

    /// Wraps a matrix already known to be a coisometry to working precision.
    pub(crate) fn from_trusted(matrix: ComplexMatrix) -> Self {
        let dims = dims_of(&matrix).expect("trusted coisometry has valid dims");
        Coisometry { matrix, dims }
    }

    /// The canonical coisometry `[0 | … | I_m | … | 0]` with the identity in
    /// block `j` (zero-based).
    pub fn canonical(dims: Dims, j: usize) -> Result<Self> {
        if j >= dims.k() {
            return Err(Error::Index(format!("block {j} out of range for k={}", dims.k())));
        }
        let m = dims.m();
        let matrix = ComplexMatrix::from_fn(m, dims.n(), |r, c| {
            if c == j * m + r {
                tensor::ONE
            } else {
                tensor::ZERO
            }
        });
        Ok(Coisometry { matrix, dims })
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn pi(&self) -> ComplexMatrix {
        pi(&self.matrix).expect("coisometries are nonzero")
    }
}

fn dims_of(matrix: &ComplexMatrix) -> Result<Dims> {
    let (m, n) = matrix.shape();
    if m == 0 || n % m != 0 {
        return Err(Error::Dimension(format!(
            "coisometry shape {m}×{n} needs n to be a positive multiple of m"
        )));
    }
    Dims::new(m, n / m)
}

impl Serialize for Coisometry {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        CoisometryJson {
            m: self.dims.m(),
            n: self.dims.n(),
            matrix: MatrixJson::from(&self.matrix),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Coisometry {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = CoisometryJson::deserialize(deserializer)?;
        let matrix = raw.matrix.into_matrix().map_err(D::Error::custom)?;
        if matrix.shape() != (raw.m, raw.n) {
            return Err(D::Error::custom("coisometry m/n disagree with matrix shape"));
        }
        Coisometry::new(matrix, tensor::DEFAULT_TOL).map_err(D::Error::custom)
    }
}

#[derive(Serialize, Deserialize)]
struct CoisometryJson {
    m: usize,
    n: usize,
    #[serde(flatten)]
    matrix: MatrixJson,
}

/// A Hermitian, unit-trace, positive semidefinite operator on `X ⊗ Y`.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityOperator {
    matrix: ComplexMatrix,
    dims: Dims,
}

impl DensityOperator {
    pub fn new(matrix: ComplexMatrix, dims: Dims, tol: f64) -> Result<Self> {
        let d = dims.joint();
        if matrix.shape() != (d, d) {
            return Err(Error::Dimension(format!(
                "density operator must be {d}×{d}, got {}×{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let deviation = (&matrix - matrix.adjoint()).norm();
        if deviation >= tol {
            return Err(Error::NotHermitian { deviation });
        }
        let trace = matrix.trace();
        if (trace - tensor::ONE).norm() >= tol {
            return Err(Error::Invalid(format!("trace {trace} is not 1")));
        }
        let (values, _) = tensor::hermitian_eigen(&matrix);
        let lowest = values.last().copied().unwrap_or(0.0);
        if lowest < -tol {
            return Err(Error::Invalid(format!("negative eigenvalue {lowest:.3e}")));
        }
        Ok(DensityOperator { matrix, dims })
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }
}

/// `π_A = vec(A) vec(A)* / tr(A A*)`.
pub fn pi(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    let weight = a.norm_squared();
    if weight == 0.0 {
        return Err(Error::ZeroOperator);
    }
    let v = tensor::vec(a);
    Ok((&v * v.adjoint()).unscale(weight))
}

/// `‖A A* − I_m‖_F`.
pub fn coisometry_deviation(a: &ComplexMatrix) -> f64 {
    let m = a.nrows();
    (a * a.adjoint() - ComplexMatrix::identity(m, m)).norm()
}

pub fn is_coisometry(a: &ComplexMatrix, tol: f64) -> bool {
    coisometry_deviation(a) < tol
}

/// Distance of `mat` from being an MES: the larger of the rank-one residual
/// and `‖tr_Y(M) − I/m‖_F`. `None` when `mat` has the wrong shape or is not
/// Hermitian within `tol`.
pub fn mes_deviation(mat: &ComplexMatrix, dims: Dims, tol: f64) -> Option<f64> {
    let (_, rank_residual) = rank_one_factor(mat, tol).ok()?;
    let reduced = partial_trace_y(mat, dims.m(), dims.n()).ok()?;
    let m = dims.m();
    let target = ComplexMatrix::identity(m, m).unscale(m as f64);
    Some(rank_residual.max((reduced - target).norm()))
}

/// MES membership: rank one and `tr_Y(M) = I_m / m`.
///
/// The partial-trace condition also forces unit trace, and together with
/// the rank-one residual forces positivity.
pub fn is_mes(mat: &ComplexMatrix, dims: Dims, tol: f64) -> bool {
    mes_deviation(mat, dims, tol).is_some_and(|dev| dev < tol)
}

/// The first `m` rows of a Haar unitary on `C^n`.
pub fn sample_coisometry<R: Rng + ?Sized>(m: usize, n: usize, rng: &mut R) -> Result<ComplexMatrix> {
    if m == 0 || m > n {
        return Err(Error::Dimension(format!(
            "a coisometry C^{n} → C^{m} needs 0 < m ≤ n"
        )));
    }
    Ok(sample_haar_unitary(n, rng).rows(0, m).into_owned())
}

pub fn random_coisometry(dims: Dims, seed: u64) -> Coisometry {
    sample_random_coisometry(dims, &mut seeded_rng(seed))
}

pub fn sample_random_coisometry<R: Rng + ?Sized>(dims: Dims, rng: &mut R) -> Coisometry {
    let matrix = sample_coisometry(dims.m(), dims.n(), rng).expect("Dims guarantees m ≤ n");
    Coisometry { matrix, dims }
}

/// Splits a unitary on `Y = X^k` into its `k` row blocks, each an `m × n`
/// coisometry; the blocks are mutually orthogonal.
pub fn family_from_unitary(u: &ComplexMatrix, dims: Dims) -> Result<Vec<Coisometry>> {
    let n = dims.n();
    if u.shape() != (n, n) {
        return Err(Error::Dimension(format!(
            "expected a {n}×{n} unitary, got {}×{}",
            u.nrows(),
            u.ncols()
        )));
    }
    let m = dims.m();
    Ok((0..dims.k())
        .map(|j| Coisometry {
            matrix: u.rows(j * m, m).into_owned(),
            dims,
        })
        .collect())
}

/// `k` mutually orthogonal coisometries: the row blocks of a Haar unitary.
pub fn orthogonal_family(dims: Dims, seed: u64) -> Vec<Coisometry> {
    sample_orthogonal_family(dims, &mut seeded_rng(seed))
}

pub fn sample_orthogonal_family<R: Rng + ?Sized>(dims: Dims, rng: &mut R) -> Vec<Coisometry> {
    let u = sample_haar_unitary(dims.n(), rng);
    family_from_unitary(&u, dims).expect("unitary has matching size")
}

/// `A B* = 0`, checked from both sides.
pub fn are_orthogonal(a: &Coisometry, b: &Coisometry, tol: f64) -> bool {
    if a.dims != b.dims {
        return false;
    }
    let forward = (a.matrix() * b.matrix().adjoint()).norm() < tol;
    let backward = (b.matrix() * a.matrix().adjoint()).norm() < tol;
    debug_assert_eq!(forward, backward);
    forward && backward
}

/// The canonical coisometry `A` with `π_A = M`.
///
/// `A = √m · unvec(v)` where `v v*` is the best rank-one approximation of
/// `M`; the result is rescaled so that the mean diagonal of `A A*` is one,
/// and phase-gauged.
pub fn representative(mat: &ComplexMatrix, dims: Dims, tol: f64) -> Result<Coisometry> {
    let deviation = mes_deviation(mat, dims, tol)
        .ok_or_else(|| Error::NotMes("operator is not Hermitian with the right shape".into()))?;
    if deviation >= tol {
        return Err(Error::NotMes(format!("MES deviation {deviation:.3e}")));
    }
    let (v, _) = rank_one_factor(mat, tol)?;
    let m = dims.m();
    let a = unvec(&v, m, dims.n())?.scale((m as f64).sqrt());
    let mean_diag = (&a * a.adjoint()).trace().re / m as f64;
    let matrix = a.unscale(mean_diag.sqrt());
    Ok(Coisometry { matrix, dims })
}

/// The five equivalent conditions for two coisometries to be orthogonal,
/// each evaluated by its own route.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct OrthogonalityCriteria {
    /// `A₁ A₂* = 0`.
    pub product: bool,
    /// `A₂ A₁* = 0`.
    pub reverse_product: bool,
    /// The stacked map `[A₁; A₂]` is a coisometry.
    pub stacked: bool,
    /// `α A₁ + β A₂` is a coisometry for every sampled unit `(α, β)`.
    pub combinations: bool,
    /// The row spaces (images of `A₁*`, `A₂*`) are orthogonal.
    pub row_spaces: bool,
}

impl OrthogonalityCriteria {
    pub fn evaluate<R: Rng + ?Sized>(
        a1: &ComplexMatrix,
        a2: &ComplexMatrix,
        num_combinations: usize,
        tol: f64,
        rng: &mut R,
    ) -> Self {
        let product = (a1 * a2.adjoint()).norm() < tol;
        let reverse_product = (a2 * a1.adjoint()).norm() < tol;

        let (m, n) = a1.shape();
        let mut stacked_matrix = ComplexMatrix::zeros(2 * m, n);
        stacked_matrix.rows_mut(0, m).copy_from(a1);
        stacked_matrix.rows_mut(m, m).copy_from(a2);
        let stacked = is_coisometry(&stacked_matrix, tol);

        let combinations = (0..num_combinations).all(|_| {
            let w = tensor::sample_unit_vector(2, rng);
            is_coisometry(&(a1 * w[0] + a2 * w[1]), tol)
        });

        let row_spaces = {
            let q1 = row_space_basis(a1, tol);
            let q2 = row_space_basis(a2, tol);
            let largest_cosine = tensor::singular_values(&(q1.adjoint() * q2))
                .first()
                .copied()
                .unwrap_or(0.0);
            largest_cosine < tol
        };

        OrthogonalityCriteria {
            product,
            reverse_product,
            stacked,
            combinations,
            row_spaces,
        }
    }

    pub fn as_array(&self) -> [bool; 5] {
        [
            self.product,
            self.reverse_product,
            self.stacked,
            self.combinations,
            self.row_spaces,
        ]
    }

    pub fn all_agree(&self) -> bool {
        let flags = self.as_array();
        flags.iter().all(|&f| f == flags[0])
    }
}

/// Orthonormal basis (as columns) of the image of `A*`.
fn row_space_basis(a: &ComplexMatrix, tol: f64) -> ComplexMatrix {
    let dec = tensor::svd(&a.adjoint());
    let u = dec.u;
    let top = dec.singular_values.first().copied().unwrap_or(0.0);
    let keep: Vec<usize> = (0..dec.singular_values.len())
        .filter(|&i| dec.singular_values[i] > tol * top.max(1.0))
        .collect();
    ComplexMatrix::from_fn(u.nrows(), keep.len(), |r, c| u[(r, keep[c])])
}
