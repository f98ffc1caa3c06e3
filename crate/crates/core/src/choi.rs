//! The projective map induced by a preserver, the restricted map `G` on
//! `2 × 2` matrices, and the Choi-determinant test for `σ`.
//!
//! For orthogonal coisometries `A₁, A₂` and representatives `B̃ᵢ` of the
//! images `Φ(π_{Aᵢ})`, `G` is defined by
//! `Φ(Σ a_ij vec(A_i) vec(A_j)*) = Σ G(a)_pq vec(B̃_p) vec(B̃_q)*`.
//! Positivity forces its Choi matrix into one of two shapes, with
//! determinant `0` (σ = identity) or `-1` (σ = transpose).

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::states::{self, representative, Coisometry};
use crate::superop::{Sigma, Superoperator};
use crate::tensor::{self, ComplexMatrix, I};

/// Radius of the acceptance balls around the two admissible determinants.
pub const CHOI_BALL_RADIUS: f64 = 0.5;

/// Representative of the projective image `ζ[A]`, i.e. the coisometry `B`
/// with `π_B = Φ(π_A)`.
pub fn zeta_image(phi: &Superoperator, a: &Coisometry, tol: f64) -> Result<Coisometry> {
    check_dims(phi, a)?;
    let image = phi.apply(&a.pi())?;
    representative(&image, phi.dims(), tol)
}

fn check_dims(phi: &Superoperator, a: &Coisometry) -> Result<()> {
    if phi.dims() != a.dims() {
        return Err(Error::Dimension(format!(
            "coisometry dims ({}, {}) do not match superoperator dims ({}, {})",
            a.dims().m(),
            a.dims().n(),
            phi.dims().m(),
            phi.dims().n()
        )));
    }
    Ok(())
}

fn outer(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    tensor::vec(a) * tensor::vec(b).adjoint()
}

/// `Φ(vec(A₁) vec(A₂)*)` computed purely from values of `Φ` on MES, via
/// `A B* = ¼ Σ_ℓ i^ℓ (A + i^ℓ B)(A + i^ℓ B)*` and the fact that each
/// `(A₁ + i^ℓ A₂)/√2` is a coisometry.
pub fn phi_on_cross_term(phi: &Superoperator, a1: &Coisometry, a2: &Coisometry, tol: f64) -> Result<ComplexMatrix> {
    check_dims(phi, a1)?;
    check_dims(phi, a2)?;
    let overlap = (a1.matrix() * a2.matrix().adjoint()).norm();
    if overlap >= tol {
        return Err(Error::NotOrthogonal { overlap });
    }
    let m = phi.dims().m() as f64;
    let d = phi.dims().joint();
    let root_half = std::f64::consts::FRAC_1_SQRT_2;
    let mut total = ComplexMatrix::zeros(d, d);
    let mut phase = tensor::ONE;
    for _ in 0..4 {
        let combo = (a1.matrix() + a2.matrix() * phase).scale(root_half);
        let image = phi.apply(&states::pi(&combo)?)?;
        total += image * (phase * (2.0 * m));
        phase *= I;
    }
    Ok(total.unscale(4.0))
}

/// `Φ(vec(A_i) vec(A_j)*)`; the diagonal case is `m·Φ(π_{A_i})`.
fn block_image(phi: &Superoperator, ai: &Coisometry, aj: &Coisometry, same: bool, tol: f64) -> Result<ComplexMatrix> {
    if same {
        let m = phi.dims().m() as f64;
        Ok(phi.apply(&ai.pi())?.scale(m))
    } else {
        phi_on_cross_term(phi, ai, aj, tol)
    }
}

/// Least-squares coefficients of `target` in the (not necessarily
/// orthogonal) family `basis`, with the Frobenius residual.
fn expand(target: &ComplexMatrix, basis: &[ComplexMatrix]) -> Result<(Vec<Complex64>, f64)> {
    let r = basis.len();
    let inner = |a: &ComplexMatrix, b: &ComplexMatrix| -> Complex64 {
        a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
    };
    let gram = ComplexMatrix::from_fn(r, r, |i, j| inner(&basis[i], &basis[j]));
    let rhs = tensor::ComplexVector::from_fn(r, |i, _| inner(&basis[i], target));
    let coeffs = gram
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::SubspaceViolation { residual: f64::INFINITY })?;
    let mut fit = target.clone();
    for (c, z) in coeffs.iter().zip(basis) {
        fit -= z * *c;
    }
    Ok((coeffs.iter().copied().collect(), fit.norm()))
}

/// The restricted map `G: C^{2×2} → C^{2×2}` as a `4 × 4` matrix on
/// row-vectorized `2 × 2` matrices: column `2i + j` holds `vec(G(E_ij))`.
#[derive(Clone, Debug)]
pub struct RestrictedMapG {
    matrix: ComplexMatrix,
    basis_a: [Coisometry; 2],
    basis_b: [Coisometry; 2],
    expansion_residual: f64,
}

impl RestrictedMapG {
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn basis_a(&self) -> &[Coisometry; 2] {
        &self.basis_a
    }

    pub fn basis_b(&self) -> &[Coisometry; 2] {
        &self.basis_b
    }

    pub fn expansion_residual(&self) -> f64 {
        self.expansion_residual
    }

    /// `G(E_ij)` (zero-based `i, j`).
    pub fn image_of_unit(&self, i: usize, j: usize) -> ComplexMatrix {
        let col = self.matrix.column(2 * i + j).into_owned();
        tensor::unvec(&col, 2, 2).expect("column has length 4")
    }

    /// `G(X)` for any `2 × 2` matrix `X`.
    pub fn apply(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        if x.shape() != (2, 2) {
            return Err(Error::Dimension("G acts on 2×2 matrices".into()));
        }
        tensor::unvec(&(&self.matrix * tensor::vec(x)), 2, 2)
    }
}

/// Builds `G` for the orthogonal pair `(A₁, A₂)`.
///
/// Each `Φ(vec(A_i) vec(A_j)*)` must lie in `span{vec(B̃_p) vec(B̃_q)*}`;
/// a residual at or above `tol` means `Φ` breaks subspace preservation and
/// cannot be an MES preserver.
pub fn restricted_g(phi: &Superoperator, a1: &Coisometry, a2: &Coisometry, tol: f64) -> Result<RestrictedMapG> {
    let overlap = (a1.matrix() * a2.matrix().adjoint()).norm();
    if overlap >= tol {
        return Err(Error::NotOrthogonal { overlap });
    }
    let b1 = zeta_image(phi, a1, tol)?;
    let b2 = zeta_image(phi, a2, tol)?;
    let a = [a1, a2];
    let b = [&b1, &b2];
    let basis: Vec<ComplexMatrix> = (0..4)
        .map(|idx| outer(b[idx / 2].matrix(), b[idx % 2].matrix()))
        .collect();

    let mut matrix = ComplexMatrix::zeros(4, 4);
    let mut worst: f64 = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            let target = block_image(phi, a[i], a[j], i == j, tol)?;
            let (coeffs, residual) = expand(&target, &basis)?;
            let scale = target.norm().max(1.0);
            if residual >= tol * scale {
                return Err(Error::SubspaceViolation { residual });
            }
            worst = worst.max(residual);
            for (row, c) in coeffs.into_iter().enumerate() {
                matrix[(row, 2 * i + j)] = c;
            }
        }
    }
    Ok(RestrictedMapG {
        matrix,
        basis_a: [a1.clone(), a2.clone()],
        basis_b: [b1, b2],
        expansion_residual: worst,
    })
}

/// `J(G) = Σ E_ij ⊗ G(E_ij)`, i.e. the block matrix `[G(E_ij)]_ij`.
pub fn choi_matrix(g: &RestrictedMapG) -> ComplexMatrix {
    let mut j = ComplexMatrix::zeros(4, 4);
    for a in 0..2 {
        for b in 0..2 {
            let block = g.image_of_unit(a, b);
            j.view_mut((2 * a, 2 * b), (2, 2)).copy_from(&block);
        }
    }
    j
}

/// Classifies a Choi determinant: identity near `0`, transpose near `-1`.
pub fn sigma_from_determinant(det: Complex64) -> Result<Sigma> {
    if det.norm() < CHOI_BALL_RADIUS {
        Ok(Sigma::Identity)
    } else if (det + 1.0).norm() < CHOI_BALL_RADIUS {
        Ok(Sigma::Transpose)
    } else {
        Err(Error::InconsistentChoi { det })
    }
}

/// `det J(G)` for the first two members of a seeded orthogonal family.
pub fn choi_determinant(phi: &Superoperator, seed: u64, tol: f64) -> Result<Complex64> {
    let dims = phi.dims();
    if dims.k() < 2 {
        return Err(Error::Dimension(
            "an orthogonal pair of coisometries needs k ≥ 2".into(),
        ));
    }
    let family = states::orthogonal_family(dims, seed);
    let g = restricted_g(phi, &family[0], &family[1], tol)?;
    Ok(choi_matrix(&g).determinant())
}

/// Detects whether `Φ` involves the identity or the transpose.
pub fn detect_sigma(phi: &Superoperator, seed: u64, tol: f64) -> Result<Sigma> {
    sigma_from_determinant(choi_determinant(phi, seed, tol)?)
}

/// Worst mismatch between `Φ(vec(A_p) vec(A_q)*)` and
/// `vec(B_p) vec(B_q)*` (identity) or `vec(B_q) vec(B_p)*` (transpose).
pub fn coherence_residual(
    phi: &Superoperator,
    family: &[Coisometry],
    images: &[Coisometry],
    sigma: Sigma,
    tol: f64,
) -> Result<f64> {
    if family.len() != images.len() {
        return Err(Error::Dimension("family and images differ in length".into()));
    }
    let mut worst: f64 = 0.0;
    for p in 0..family.len() {
        for q in 0..family.len() {
            let actual = block_image(phi, &family[p], &family[q], p == q, tol)?;
            let expected = match sigma {
                Sigma::Identity => outer(images[p].matrix(), images[q].matrix()),
                Sigma::Transpose => outer(images[q].matrix(), images[p].matrix()),
            };
            worst = worst.max((actual - expected).norm());
        }
    }
    Ok(worst)
}

/// Phase-coherent representatives `B_j ∈ ζ[A_j]` for a mutually orthogonal
/// family: `B₁` is the canonical representative, and the phase of each
/// later `B_j` is read off the `(1, j)` cross term.
pub fn align_images(phi: &Superoperator, family: &[Coisometry], sigma: Sigma, tol: f64) -> Result<Vec<Coisometry>> {
    let Some(first) = family.first() else {
        return Ok(Vec::new());
    };
    let b1 = zeta_image(phi, first, tol)?;
    let mut images = vec![b1.clone()];
    for aj in &family[1..] {
        let tilde = zeta_image(phi, aj, tol)?;
        let cross = phi_on_cross_term(phi, first, aj, tol)?;
        let z = match sigma {
            Sigma::Identity => outer(b1.matrix(), tilde.matrix()),
            Sigma::Transpose => outer(tilde.matrix(), b1.matrix()),
        };
        let (coeffs, _) = expand(&cross, std::slice::from_ref(&z))?;
        let b = coeffs[0];
        if b.norm() == 0.0 {
            return Err(Error::PhaseAlignment { residual: cross.norm() });
        }
        let unit = b / b.norm();
        let phase = match sigma {
            Sigma::Identity => unit.conj(),
            Sigma::Transpose => unit,
        };
        images.push(Coisometry::from_trusted(tilde.matrix() * phase));
    }
    let residual = coherence_residual(phi, family, &images, sigma, tol)?;
    let scale = phi.dims().m() as f64;
    if residual >= tol * scale.max(1.0) {
        return Err(Error::PhaseAlignment { residual });
    }
    Ok(images)
}
