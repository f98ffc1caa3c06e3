//! Superoperators on `L(X ⊗ Y)` and the canonical MES preservers.
//!
//! A superoperator is stored as the `(mn)² × (mn)²` matrix acting on
//! row-vectorized operators, so `Φ(M) = unvec(S · vec(M))`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{self, MatrixJson};
use crate::states::{self, is_mes, mes_deviation, DensityOperator};
use crate::tensor::{self, derive_seed, kron, unvec, ComplexMatrix, ComplexVector, Dims, I};

/// Whether a preserver acts as `X ↦ X` or `X ↦ Xᵀ` before conjugation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sigma {
    Identity,
    Transpose,
}

impl Sigma {
    /// `+1` for the identity, `-1` for the transpose.
    pub fn epsilon(self) -> i32 {
        match self {
            Sigma::Identity => 1,
            Sigma::Transpose => -1,
        }
    }

    pub fn apply(self, m: &ComplexMatrix) -> ComplexMatrix {
        match self {
            Sigma::Identity => m.clone(),
            Sigma::Transpose => m.transpose(),
        }
    }
}

impl fmt::Display for Sigma {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sigma::Identity => "identity",
            Sigma::Transpose => "transpose",
        })
    }
}

impl FromStr for Sigma {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "identity" => Ok(Sigma::Identity),
            "transpose" => Ok(Sigma::Transpose),
            other => Err(Error::Invalid(format!("unknown sigma {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Superoperator {
    dims: Dims,
    matrix: ComplexMatrix,
}

impl Superoperator {
    pub fn new(dims: Dims, matrix: ComplexMatrix) -> Result<Self> {
        let side = dims.operator_space();
        if matrix.shape() != (side, side) {
            return Err(Error::Dimension(format!(
                "superoperator on dims ({}, {}) must be {side}×{side}, got {}×{}",
                dims.m(),
                dims.n(),
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Superoperator { dims, matrix })
    }

    pub fn identity(dims: Dims) -> Self {
        let side = dims.operator_space();
        Superoperator {
            dims,
            matrix: ComplexMatrix::identity(side, side),
        }
    }

    /// The basis transpose `τ: M ↦ Mᵀ` on `L(X ⊗ Y)`.
    pub fn transpose_map(dims: Dims) -> Self {
        let d = dims.joint();
        let side = d * d;
        let mut matrix = ComplexMatrix::zeros(side, side);
        for i in 0..d {
            for j in 0..d {
                matrix[(i * d + j, j * d + i)] = tensor::ONE;
            }
        }
        Superoperator { dims, matrix }
    }

    /// Matrix of an arbitrary linear map, built column by column from its
    /// action on the matrix units.
    pub fn from_linear_map<F>(dims: Dims, f: F) -> Result<Self>
    where
        F: Fn(&ComplexMatrix) -> ComplexMatrix,
    {
        let d = dims.joint();
        let side = d * d;
        let mut matrix = ComplexMatrix::zeros(side, side);
        let mut unit = ComplexMatrix::zeros(d, d);
        for col in 0..side {
            unit[(col / d, col % d)] = tensor::ONE;
            let image = f(&unit);
            unit[(col / d, col % d)] = tensor::ZERO;
            if image.shape() != (d, d) {
                return Err(Error::Dimension("linear map changed operator shape".into()));
            }
            matrix.set_column(col, &tensor::vec(&image));
        }
        Ok(Superoperator { dims, matrix })
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn apply(&self, m: &ComplexMatrix) -> Result<ComplexMatrix> {
        let d = self.dims.joint();
        if m.shape() != (d, d) {
            return Err(Error::Dimension(format!(
                "operator must be {d}×{d}, got {}×{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let image: ComplexVector = &self.matrix * tensor::vec(m);
        unvec(&image, d, d)
    }

    /// Applies the map to every operator in `ms` with one matrix product.
    pub fn apply_many(&self, ms: &[ComplexMatrix]) -> Result<Vec<ComplexMatrix>> {
        let d = self.dims.joint();
        if let Some(bad) = ms.iter().find(|m| m.shape() != (d, d)) {
            return Err(Error::Dimension(format!(
                "operator must be {d}×{d}, got {}×{}",
                bad.nrows(),
                bad.ncols()
            )));
        }
        if ms.is_empty() {
            return Ok(Vec::new());
        }
        let columns: Vec<ComplexVector> = ms.iter().map(tensor::vec).collect();
        let images = tensor::matmul(&self.matrix, &ComplexMatrix::from_columns(&columns));
        (0..ms.len())
            .map(|i| unvec(&images.column(i).into_owned(), d, d))
            .collect()
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &Superoperator) -> Result<Superoperator> {
        if self.dims != inner.dims {
            return Err(Error::Dimension("cannot compose superoperators on different dims".into()));
        }
        Ok(Superoperator {
            dims: self.dims,
            matrix: &self.matrix * &inner.matrix,
        })
    }

    /// `self ∘ τ`, computed as a column permutation.
    pub fn then_after_transpose(&self) -> Superoperator {
        let d = self.dims.joint();
        let side = d * d;
        let matrix = ComplexMatrix::from_fn(side, side, |r, c| {
            let (i, j) = (c / d, c % d);
            self.matrix[(r, j * d + i)]
        });
        Superoperator { dims: self.dims, matrix }
    }

    pub fn distance(&self, other: &Superoperator) -> f64 {
        if self.dims != other.dims {
            return f64::INFINITY;
        }
        (&self.matrix - &other.matrix).norm()
    }
}

impl Serialize for Superoperator {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        SuperoperatorJson {
            dims: self.dims,
            matrix: MatrixJson::from(&self.matrix),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Superoperator {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = SuperoperatorJson::deserialize(deserializer)?;
        let matrix = raw.matrix.into_matrix().map_err(D::Error::custom)?;
        Superoperator::new(raw.dims, matrix).map_err(D::Error::custom)
    }
}

#[derive(Serialize, Deserialize)]
struct SuperoperatorJson {
    dims: Dims,
    matrix: MatrixJson,
}

/// `W ⊗ W̄`, the matrix of `M ↦ W M W*` under row-stacking.
pub fn conjugation_matrix(w: &ComplexMatrix) -> ComplexMatrix {
    kron(w, &w.map(|z| z.conj()))
}

fn dims_for_pair(u: &ComplexMatrix, v: &ComplexMatrix) -> Result<Dims> {
    let (m, n) = (u.nrows(), v.nrows());
    if !u.is_square() || !v.is_square() || m == 0 || n % m != 0 {
        return Err(Error::Dimension(format!(
            "need square U (m×m) and V (n×n) with m | n, got {}×{} and {}×{}",
            u.nrows(),
            u.ncols(),
            v.nrows(),
            v.ncols()
        )));
    }
    Dims::new(m, n / m)
}

fn require_unitary(u: &ComplexMatrix) -> Result<()> {
    let deviation = tensor::unitarity_deviation(u);
    if deviation >= 1e-10 {
        return Err(Error::NotUnitary { deviation });
    }
    Ok(())
}

/// `M ↦ (U ⊗ V) M^σ (U ⊗ V)*`.
pub fn make_adjoint_preserver(u: &ComplexMatrix, v: &ComplexMatrix, sigma: Sigma) -> Result<Superoperator> {
    let dims = dims_for_pair(u, v)?;
    require_unitary(u)?;
    require_unitary(v)?;
    let conj = Superoperator {
        dims,
        matrix: conjugation_matrix(&kron(u, v)),
    };
    Ok(match sigma {
        Sigma::Identity => conj,
        Sigma::Transpose => conj.then_after_transpose(),
    })
}

/// The switch operator `A ⊗ B ↦ B ⊗ A` on `L(C^n ⊗ C^n)`, i.e.
/// conjugation by the swap unitary.
pub fn switch_operator(n: usize) -> Result<Superoperator> {
    let dims = Dims::square(n)?;
    let d = n * n;
    let mut swap = ComplexMatrix::zeros(d, d);
    for a in 0..n {
        for b in 0..n {
            swap[(b * n + a, a * n + b)] = tensor::ONE;
        }
    }
    Ok(Superoperator {
        dims,
        matrix: conjugation_matrix(&swap),
    })
}

/// `ad_{U⊗V} ∘ σ ∘ S` for square `X = Y`.
pub fn make_swap_preserver(u: &ComplexMatrix, v: &ComplexMatrix, sigma: Sigma) -> Result<Superoperator> {
    if u.shape() != v.shape() {
        return Err(Error::Dimension(format!(
            "swap form needs m = n, got U {}×{} and V {}×{}",
            u.nrows(),
            u.ncols(),
            v.nrows(),
            v.ncols()
        )));
    }
    let outer = make_adjoint_preserver(u, v, sigma)?;
    outer.compose(&switch_operator(u.nrows())?)
}

/// `M ↦ tr(M) ρ` for an MES `ρ`.
pub fn make_trace_preserver(rho: &DensityOperator) -> Result<Superoperator> {
    let dims = rho.dims();
    if !is_mes(rho.matrix(), dims, tensor::DEFAULT_TOL) {
        return Err(Error::NotMes("trace-form target must be an MES".into()));
    }
    let d = dims.joint();
    let trace_row = tensor::vec(&ComplexMatrix::identity(d, d)).transpose();
    Ok(Superoperator {
        dims,
        matrix: tensor::vec(rho.matrix()) * trace_row,
    })
}

/// Seed of the fixed enumeration behind [`span_mes_basis`].
const SPAN_SEED: u64 = 0x5EED_0F_5BA4;

/// Number of consecutive batches without rank growth before the span is
/// considered exhausted.
const SPAN_STABLE_BATCHES: usize = 3;

/// A linearly independent family of MES spanning `span(MES_{X,Y})`,
/// with an orthonormal basis of the same subspace.
#[derive(Clone, Debug)]
pub struct SpanBasis {
    dims: Dims,
    elements: Vec<ComplexMatrix>,
    orthonormal: ComplexMatrix,
}

impl SpanBasis {
    pub fn dims(&self) -> Dims {
        self.dims
    }

    /// The selected MES (each an element of `MES_{X,Y}`).
    pub fn elements(&self) -> &[ComplexMatrix] {
        &self.elements
    }

    /// `(mn)² × r` matrix with orthonormal columns spanning the same space
    /// as the vectorized elements.
    pub fn orthonormal(&self) -> &ComplexMatrix {
        &self.orthonormal
    }

    pub fn dimension(&self) -> usize {
        self.elements.len()
    }

    /// `‖M − P M‖_F` where `P` projects onto the span.
    pub fn distance_from_span(&self, m: &ComplexMatrix) -> f64 {
        let v = tensor::vec(m);
        let coeffs = self.orthonormal.adjoint() * &v;
        (&v - &self.orthonormal * coeffs).norm()
    }
}

/// Candidate MES from one Haar unitary on `Y`: `π_{U_j}` for every row
/// block, and the polarization combinations `π_{(U_p + i^ℓ U_q)/√2}`.
fn span_candidates(u: &ComplexMatrix, dims: Dims) -> Vec<ComplexMatrix> {
    let family = states::family_from_unitary(u, dims).expect("unitary has size n");
    let mut out: Vec<ComplexMatrix> = family.iter().map(|a| a.pi()).collect();
    let root_half = std::f64::consts::FRAC_1_SQRT_2;
    let mut phase = tensor::ONE;
    for p in 0..family.len() {
        for q in p + 1..family.len() {
            for _ in 0..4 {
                let combo = (family[p].matrix() + family[q].matrix() * phase).scale(root_half);
                out.push(states::pi(&combo).expect("nonzero combination"));
                phase *= I;
            }
        }
    }
    out
}

/// Maximal linearly independent set of MES, extracted greedily (at relative
/// tolerance `1e-9`) from a fixed seeded enumeration that starts with the
/// canonical family. Sampling continues until the rank has not grown for
/// three consecutive batches.
pub fn span_mes_basis(dims: Dims) -> SpanBasis {
    const GS_TOL: f64 = 1e-9;
    let side = dims.operator_space();
    let per_unitary = dims.k() + 2 * dims.k() * (dims.k() - 1);
    let unitaries_per_batch = (side / 8).div_ceil(per_unitary).max(1);

    let mut elements = Vec::new();
    let mut columns: Vec<ComplexVector> = Vec::new();
    let mut stable = 0;
    let mut batch = 0u64;
    while stable < SPAN_STABLE_BATCHES && columns.len() < side {
        let before = columns.len();
        for t in 0..unitaries_per_batch {
            let u = if batch == 0 && t == 0 {
                ComplexMatrix::identity(dims.n(), dims.n())
            } else {
                let idx = batch * unitaries_per_batch as u64 + t as u64;
                tensor::haar_unitary(dims.n(), derive_seed(SPAN_SEED, idx))
            };
            for candidate in span_candidates(&u, dims) {
                let v = tensor::vec(&candidate);
                let norm = v.norm();
                let mut residual = v.clone();
                // two passes of classical Gram-Schmidt
                for _ in 0..2 {
                    for q in &columns {
                        let c = q.dotc(&residual);
                        residual -= q * c;
                    }
                }
                let rnorm = residual.norm();
                if rnorm > GS_TOL * norm {
                    columns.push(residual.unscale(rnorm));
                    elements.push(candidate);
                }
            }
        }
        stable = if columns.len() == before { stable + 1 } else { 0 };
        batch += 1;
    }
    let orthonormal = if columns.is_empty() {
        ComplexMatrix::zeros(side, 0)
    } else {
        ComplexMatrix::from_columns(&columns)
    };
    SpanBasis {
        dims,
        elements,
        orthonormal,
    }
}

/// Worst MES deviation of `Φ(π_A)` over `num_samples` random coisometries
/// (`+∞` when some image is not even Hermitian).
pub fn mes_preservation_residual(phi: &Superoperator, num_samples: usize, tol: f64, seed: u64) -> f64 {
    let dims = phi.dims();
    (0..num_samples)
        .map(|i| {
            let a = states::random_coisometry(dims, derive_seed(seed, i as u64));
            phi.apply(&a.pi())
                .ok()
                .and_then(|image| mes_deviation(&image, dims, tol))
                .unwrap_or(f64::INFINITY)
        })
        .fold(0.0, f64::max)
}

/// Probabilistic check that `Φ(MES) ⊂ MES`.
pub fn preserves_mes(phi: &Superoperator, num_samples: usize, tol: f64, seed: u64) -> bool {
    mes_preservation_residual(phi, num_samples, tol, seed) < tol
}

/// Extreme singular values `(σ_min, σ_max)` of `Φ` restricted to
/// `span(MES)`, i.e. of `Q* S Q` for an orthonormal basis `Q` of the span.
pub fn span_singular_range(phi: &Superoperator, basis: &SpanBasis) -> Result<(f64, f64)> {
    if phi.dims() != basis.dims() {
        return Err(Error::Dimension("span basis computed for other dims".into()));
    }
    let q = basis.orthonormal();
    let restricted = tensor::matmul(&q.adjoint(), &tensor::matmul(phi.matrix(), q));
    let sv = tensor::singular_values(&restricted);
    let top = sv.first().copied().unwrap_or(0.0);
    let bottom = sv.last().copied().unwrap_or(0.0);
    Ok((bottom, top))
}

/// `σ_min > tol · σ_max` for the restriction of `Φ` to `span(MES)`.
pub fn is_invertible_on_span(phi: &Superoperator, basis: &SpanBasis, tol: f64) -> Result<bool> {
    let (bottom, top) = span_singular_range(phi, basis)?;
    Ok(top > 0.0 && bottom > tol * top)
}

/// Reads a superoperator JSON file.
pub fn load(path: &std::path::Path) -> Result<Superoperator> {
    io::read_json(path)
}
