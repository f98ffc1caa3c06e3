//! Extension of a preserver on `L(X ⊗ Y)` to `L(Y ⊗ Y)` for `Y = X^k`, and
//! the block-sign and block-permutation unitaries it commutes with.
//!
//! Operators on `Y ⊗ Y` are viewed as `k × k` block matrices with blocks in
//! `L(X ⊗ Y)`, using the identification `Y ⊗ Y = (C^k ⊗ X) ⊗ Y` with index
//! order `(block, x, y)`: basis vector `(p, x, y)` sits at
//! `p·mn + x·n + y`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::MatrixJson;
use crate::states;
use crate::superop::{Sigma, Superoperator};
use crate::tensor::{self, derive_seed, kron, ComplexMatrix, Dims};

/// `Φ̃` on `L(Y ⊗ Y)` built blockwise from `Φ`.
#[derive(Clone, Debug)]
pub struct ExtendedSuperoperator {
    superop: Superoperator,
    base_dims: Dims,
    sigma: Sigma,
}

impl ExtendedSuperoperator {
    /// The extended map as a superoperator on dims `(n, n)`.
    pub fn superop(&self) -> &Superoperator {
        &self.superop
    }

    pub fn base_dims(&self) -> Dims {
        self.base_dims
    }

    pub fn sigma(&self) -> Sigma {
        self.sigma
    }

    pub fn apply(&self, m: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.superop.apply(m)
    }
}

impl Serialize for ExtendedSuperoperator {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        ExtendedJson {
            base_dims: self.base_dims,
            sigma: self.sigma,
            dims: self.superop.dims(),
            matrix: MatrixJson::from(self.superop.matrix()),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ExtendedSuperoperator {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = ExtendedJson::deserialize(deserializer)?;
        if raw.dims != Dims::square(raw.base_dims.n()).map_err(D::Error::custom)? {
            return Err(D::Error::custom("extended dims must be (n, n) for the base n"));
        }
        let matrix = raw.matrix.into_matrix().map_err(D::Error::custom)?;
        Ok(ExtendedSuperoperator {
            superop: Superoperator::new(raw.dims, matrix).map_err(D::Error::custom)?,
            base_dims: raw.base_dims,
            sigma: raw.sigma,
        })
    }
}

#[derive(Serialize, Deserialize)]
struct ExtendedJson {
    base_dims: Dims,
    sigma: Sigma,
    dims: Dims,
    matrix: MatrixJson,
}

/// Block `(p, q)` of an operator on `Y ⊗ Y`, an element of `L(X ⊗ Y)`.
pub fn block(m: &ComplexMatrix, p: usize, q: usize, dims: Dims) -> ComplexMatrix {
    let d = dims.joint();
    m.view((p * d, q * d), (d, d)).into_owned()
}

/// Reassembles `k × k` blocks (row-major) into an operator on `Y ⊗ Y`.
pub fn assemble_blocks(blocks: &[ComplexMatrix], dims: Dims) -> Result<ComplexMatrix> {
    let (k, d) = (dims.k(), dims.joint());
    if blocks.len() != k * k || blocks.iter().any(|b| b.shape() != (d, d)) {
        return Err(Error::Dimension(format!("expected {} blocks of size {d}×{d}", k * k)));
    }
    let mut out = ComplexMatrix::zeros(k * d, k * d);
    for (idx, b) in blocks.iter().enumerate() {
        out.view_mut(((idx / k) * d, (idx % k) * d), (d, d)).copy_from(b);
    }
    Ok(out)
}

/// `Φ̃(M) = [Φ(M_pq)]` for σ = identity and `[Φ(M_qp)]` for σ = transpose.
pub fn extend(phi: &Superoperator, sigma: Sigma) -> Result<ExtendedSuperoperator> {
    let base = phi.dims();
    if base.k() < 2 {
        return Err(Error::Dimension(format!(
            "extension needs k ≥ 2, got k = {}",
            base.k()
        )));
    }
    let (k, d) = (base.k(), base.joint());
    let big = k * d;
    let side = big * big;
    let s = phi.matrix();
    let mut matrix = ComplexMatrix::zeros(side, side);
    for p in 0..k {
        for q in 0..k {
            let (sp, sq) = match sigma {
                Sigma::Identity => (p, q),
                Sigma::Transpose => (q, p),
            };
            for r in 0..d {
                for c in 0..d {
                    let row = (p * d + r) * big + (q * d + c);
                    for r2 in 0..d {
                        for c2 in 0..d {
                            let col = (sp * d + r2) * big + (sq * d + c2);
                            matrix[(row, col)] = s[(r * d + c, r2 * d + c2)];
                        }
                    }
                }
            }
        }
    }
    Ok(ExtendedSuperoperator {
        superop: Superoperator::new(Dims::square(base.n())?, matrix)?,
        base_dims: base,
        sigma,
    })
}

/// `P_j = (I_k − 2E_jj) ⊗ I_m` on `Y` (zero-based `j`).
pub fn p_operator(j: usize, dims: Dims) -> Result<ComplexMatrix> {
    if j >= dims.k() {
        return Err(Error::Index(format!("j = {j} out of range for k = {}", dims.k())));
    }
    let m = dims.m();
    Ok(ComplexMatrix::from_fn(dims.n(), dims.n(), |r, c| {
        if r != c {
            tensor::ZERO
        } else if r / m == j {
            -tensor::ONE
        } else {
            tensor::ONE
        }
    }))
}

/// `P_j ⊗ I_Y` on `Y ⊗ Y`.
pub fn p_operator_on_pair(j: usize, dims: Dims) -> Result<ComplexMatrix> {
    let n = dims.n();
    Ok(kron(&p_operator(j, dims)?, &ComplexMatrix::identity(n, n)))
}

/// `Q_pq = (T_pq ⊗ I_m) ⊗ I_n` on `Y ⊗ Y`, where `T_pq` swaps coordinates
/// `p < q` of `C^k` (zero-based).
pub fn q_operator(p: usize, q: usize, dims: Dims) -> Result<ComplexMatrix> {
    let k = dims.k();
    if !(p < q && q < k) {
        return Err(Error::Index(format!("need p < q < k, got p = {p}, q = {q}, k = {k}")));
    }
    let mut t = ComplexMatrix::identity(k, k);
    t[(p, p)] = tensor::ZERO;
    t[(q, q)] = tensor::ZERO;
    t[(p, q)] = tensor::ONE;
    t[(q, p)] = tensor::ONE;
    let (m, n) = (dims.m(), dims.n());
    Ok(kron(
        &kron(&t, &ComplexMatrix::identity(m, m)),
        &ComplexMatrix::identity(n, n),
    ))
}

/// `‖Φ(W M W*) − W Φ(M) W*‖_F`.
pub fn commutation_residual(phi: &Superoperator, w: &ComplexMatrix, m: &ComplexMatrix) -> Result<f64> {
    let before = phi.apply(&(w * m * w.adjoint()))?;
    let after = w * phi.apply(m)? * w.adjoint();
    Ok((before - after).norm())
}

/// Worst commutation residual of `Φ` with `ad_W` over `num_samples` random
/// MES `π_A` (`A` a Haar unitary on `Y`).
pub fn max_commutation_residual(
    phi: &Superoperator,
    w: &ComplexMatrix,
    num_samples: usize,
    seed: u64,
) -> Result<f64> {
    let dims = phi.dims();
    if w.shape() != (dims.joint(), dims.joint()) {
        return Err(Error::Dimension("W must act on the joint space".into()));
    }
    let mut worst: f64 = 0.0;
    for i in 0..num_samples {
        let a = states::random_coisometry(dims, derive_seed(seed, i as u64));
        worst = worst.max(commutation_residual(phi, w, &a.pi())?);
    }
    Ok(worst)
}

/// `Φ ∘ ad_W = ad_W ∘ Φ` on `num_samples` random MES, within `tol`.
pub fn commutes_with_ad(
    phi: &Superoperator,
    w: &ComplexMatrix,
    num_samples: usize,
    tol: f64,
    seed: u64,
) -> Result<bool> {
    let deviation = tensor::unitarity_deviation(w);
    if deviation >= 1e-10 {
        return Err(Error::NotUnitary { deviation });
    }
    Ok(max_commutation_residual(phi, w, num_samples, seed)? < tol)
}

/// `(1/√2)[[I_m, I_m], [I_m, −I_m]] ⊕ I_{m(k−2)}` on `Y`.
pub fn hadamard_block(dims: Dims) -> Result<ComplexMatrix> {
    if dims.k() < 2 {
        return Err(Error::Dimension("the witness needs k ≥ 2".into()));
    }
    let (m, n) = (dims.m(), dims.n());
    let h = std::f64::consts::FRAC_1_SQRT_2;
    Ok(ComplexMatrix::from_fn(n, n, |r, c| {
        if r >= 2 * m || c >= 2 * m {
            return if r == c { tensor::ONE } else { tensor::ZERO };
        }
        if r % m != c % m {
            return tensor::ZERO;
        }
        let sign = if r >= m && c >= m { -h } else { h };
        tensor::ONE * sign
    }))
}

/// The MES `π_A` on `Y ⊗ Y` exhibiting that the swap form
/// `ad_{U⊗V} ∘ σ ∘ S` does not commute with `ad_{P₁ ⊗ I}`: `A` is chosen so
/// that `U Aᵀ` (σ = identity) or `U A*` (σ = transpose) equals the
/// Hadamard block of [`hadamard_block`].
pub fn switch_witness(u: &ComplexMatrix, sigma: Sigma, dims: Dims) -> Result<ComplexMatrix> {
    let h = hadamard_block(dims)?;
    if u.shape() != h.shape() {
        return Err(Error::Dimension("U must be a unitary on Y".into()));
    }
    let a = match sigma {
        // Aᵀ = U* H  ⇒  A = Hᵀ Ū
        Sigma::Identity => h.transpose() * u.map(|z| z.conj()),
        // A* = U* H  ⇒  A = H* U
        Sigma::Transpose => h.adjoint() * u,
    };
    states::pi(&a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::superop::make_adjoint_preserver;
    use crate::tensor::haar_unitary;

    fn dims(m: usize, k: usize) -> Dims {
        Dims::new(m, k).unwrap()
    }

    #[test]
    fn p_operator_formula() {
        let p = p_operator(0, dims(1, 2)).unwrap();
        assert_eq!(p[(0, 0)], -tensor::ONE);
        assert_eq!(p[(1, 1)], tensor::ONE);
        let d = dims(2, 3);
        for j in 0..3 {
            let p = p_operator(j, d).unwrap();
            assert_eq!(&p * &p, ComplexMatrix::identity(6, 6));
            assert_eq!(p.adjoint(), p);
        }
        assert!(matches!(p_operator(3, d), Err(Error::Index(_))));
    }

    #[test]
    fn q_operator_formula() {
        let q = q_operator(0, 1, dims(1, 2)).unwrap();
        let mut t = ComplexMatrix::zeros(2, 2);
        t[(0, 1)] = tensor::ONE;
        t[(1, 0)] = tensor::ONE;
        assert_eq!(q, kron(&t, &ComplexMatrix::identity(2, 2)));
        assert_eq!(&q * &q, ComplexMatrix::identity(4, 4));
        assert!(matches!(q_operator(1, 1, dims(1, 2)), Err(Error::Index(_))));
        assert!(matches!(q_operator(0, 2, dims(1, 2)), Err(Error::Index(_))));
    }

    #[test]
    fn q_conjugation_swaps_diagonal_blocks() {
        let d = dims(1, 2);
        let q = q_operator(0, 1, d).unwrap();
        let m = tensor::ginibre(4, 4, &mut tensor::seeded_rng(1));
        let conj = &q * &m * q.adjoint();
        assert_eq!(block(&conj, 0, 0, d), block(&m, 1, 1, d));
        assert_eq!(block(&conj, 1, 1, d), block(&m, 0, 0, d));
        assert_eq!(block(&conj, 0, 1, d), block(&m, 1, 0, d));
    }

    #[test]
    fn blocks_round_trip() {
        let d = dims(2, 2);
        let m = tensor::ginibre(16, 16, &mut tensor::seeded_rng(2));
        let blocks: Vec<_> = (0..4).map(|i| block(&m, i / 2, i % 2, d)).collect();
        assert_eq!(assemble_blocks(&blocks, d).unwrap(), m);
        // (block, x, y) index order
        assert_eq!(block(&m, 1, 0, d)[(3, 2)], m[(8 + 3, 2)]);
    }

    #[test]
    fn extension_of_identity_is_identity() {
        let d = dims(2, 2);
        let ext = extend(&Superoperator::identity(d), Sigma::Identity).unwrap();
        assert_eq!(ext.superop(), &Superoperator::identity(Dims::square(4).unwrap()));
        assert!(matches!(
            extend(&Superoperator::identity(dims(2, 1)), Sigma::Identity),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn extension_acts_blockwise() {
        let d = dims(1, 2);
        let phi = make_adjoint_preserver(&haar_unitary(1, 1), &haar_unitary(2, 2), Sigma::Transpose).unwrap();
        let ext = extend(&phi, Sigma::Transpose).unwrap();
        let m = tensor::ginibre(4, 4, &mut tensor::seeded_rng(3));
        let image = ext.apply(&m).unwrap();
        for p in 0..2 {
            for q in 0..2 {
                let expected = phi.apply(&block(&m, q, p, d)).unwrap();
                assert!((block(&image, p, q, d) - expected).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn hadamard_block_is_unitary() {
        for (m, k) in [(1, 2), (2, 2), (2, 3)] {
            let h = hadamard_block(dims(m, k)).unwrap();
            assert!(tensor::unitarity_deviation(&h) < 1e-14);
        }
    }

    #[test]
    fn extended_json_round_trip() {
        let ext = extend(&Superoperator::identity(dims(1, 2)), Sigma::Transpose).unwrap();
        let text = serde_json::to_string(&ext).unwrap();
        let back: ExtendedSuperoperator = serde_json::from_str(&text).unwrap();
        assert_eq!(back.sigma(), Sigma::Transpose);
        assert_eq!(back.superop(), ext.superop());
    }
}
