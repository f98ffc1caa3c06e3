//! Decomposition of an invertible MES preserver into `(σ, U, V)` with
//! `Φ(X) = (U ⊗ V) X^σ (U ⊗ V)*`.
//!
//! Pipeline: sampled MES preservation → invertibility on `span(MES)` →
//! Choi-determinant discriminant → `Φ' = Φ ∘ τ` when σ is the transpose →
//! commutant recovery of `W` from `Φ'(M) W = W M` → nearest Kronecker
//! factorization `W ≈ U ⊗ V` → verification on fresh MES.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use crate::choi;
use crate::error::{Error, Result};
use crate::states;
use crate::superop::{self, Sigma, SpanBasis, Superoperator};
use crate::tensor::{self, derive_seed, kron, ComplexMatrix, ComplexVector, Dims, DEFAULT_TOL};

/// Pipeline settings.
#[derive(Clone, Debug, PartialEq)]
pub struct Config {
    /// Relative tolerance shared by every stage.
    pub tol: f64,
    /// MES samples for commutant recovery; `None` means `2·(mn)²`.
    pub samples: Option<usize>,
    /// Fresh MES used by the preservation screen and by verification.
    pub verify_samples: usize,
    pub seed: u64,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            tol: DEFAULT_TOL,
            samples: None,
            verify_samples: 20,
            seed: 0,
        }
    }
}

impl Config {
    pub fn recovery_samples(&self, dims: Dims) -> usize {
        self.samples.unwrap_or_else(|| default_samples(dims))
    }
}

/// Default number of recovery samples for `dims`.
pub fn default_samples(dims: Dims) -> usize {
    2 * dims.joint() * dims.joint()
}

/// `Φ(X) = (U ⊗ V) X^σ (U ⊗ V)*`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    pub sigma: Sigma,
    #[serde(rename = "U", with = "crate::io::matrix")]
    pub u: ComplexMatrix,
    #[serde(rename = "V", with = "crate::io::matrix")]
    pub v: ComplexMatrix,
    pub kron_residual: f64,
    pub verification_residual: f64,
}

impl Decomposition {
    /// `U ⊗ V`.
    pub fn conjugation(&self) -> ComplexMatrix {
        kron(&self.u, &self.v)
    }

    /// `(U ⊗ V) X^σ (U ⊗ V)*`.
    pub fn reconstruct(&self, x: &ComplexMatrix) -> ComplexMatrix {
        let w = self.conjugation();
        &w * self.sigma.apply(x) * w.adjoint()
    }

    /// The reconstructed map as a superoperator.
    pub fn to_superoperator(&self, dims: Dims) -> Result<Superoperator> {
        let phi = superop::make_adjoint_preserver(&self.u, &self.v, self.sigma)?;
        if phi.dims() != dims {
            return Err(Error::Dimension("factor sizes do not match dims".into()));
        }
        Ok(phi)
    }
}

/// Singular-value profile of the commutant system, kept for diagnostics.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NullityGap {
    /// Largest singular value.
    pub first: f64,
    /// Second smallest singular value.
    pub second_last: f64,
    /// Smallest singular value.
    pub last: f64,
}

/// `sqrt(Σ_i ‖P_i W − W M_i‖²_F)`.
fn system_residual(images: &[ComplexMatrix], inputs: &[ComplexMatrix], w: &ComplexMatrix) -> f64 {
    images
        .iter()
        .zip(inputs)
        .map(|(p, m)| (p * w - w * m).norm_squared())
        .sum::<f64>()
        .sqrt()
}

/// Solves `Φ(M_i) W = W M_i` over `num_samples` random MES and returns the
/// singular-value gap of the stacked system together with its null vector
/// (unnormalized, as a `d × d` matrix).
pub fn commutant_system(phi: &Superoperator, num_samples: usize, seed: u64) -> Result<(NullityGap, ComplexMatrix)> {
    let dims = phi.dims();
    let d = dims.joint();
    if num_samples == 0 {
        return Err(Error::Invalid("commutant recovery needs at least one sample".into()));
    }
    let inputs: Vec<ComplexMatrix> = (0..num_samples)
        .map(|i| states::random_coisometry(dims, derive_seed(seed, i as u64)).pi())
        .collect();
    let images = phi.apply_many(&inputs)?;

    // Normal matrix of the rows (P ⊗ I − I ⊗ Mᵀ):
    //   Σ (P*P ⊗ I) + (I ⊗ M̄Mᵀ) − (P* ⊗ Mᵀ) − (P ⊗ M̄).
    // The cross terms are gathered with a single product and a reindexing.
    let mut left = ComplexMatrix::zeros(d, d);
    let mut right = ComplexMatrix::zeros(d, d);
    let mut xs = ComplexMatrix::zeros(d * d, 2 * num_samples);
    let mut ys = ComplexMatrix::zeros(d * d, 2 * num_samples);
    for (i, (p, m)) in images.iter().zip(&inputs).enumerate() {
        let p_adj = p.adjoint();
        let m_t = m.transpose();
        let m_bar = m.map(|z| z.conj());
        left += &p_adj * p;
        right += &m_bar * &m_t;
        xs.set_column(2 * i, &tensor::vec(&p_adj));
        ys.set_column(2 * i, &tensor::vec(&m_t));
        xs.set_column(2 * i + 1, &tensor::vec(p));
        ys.set_column(2 * i + 1, &tensor::vec(&m_bar));
    }
    let cross = tensor::matmul(&xs, &ys.transpose());
    let eye = ComplexMatrix::identity(d, d);
    let mut normal = kron(&left, &eye) + kron(&eye, &right);
    for a in 0..d {
        for b in 0..d {
            for c in 0..d {
                for e in 0..d {
                    normal[(a * d + b, c * d + e)] -= cross[(a * d + c, b * d + e)];
                }
            }
        }
    }

    let (values, vectors) = tensor::hermitian_eigen(&normal);
    let side = values.len();
    let first = values[0].max(0.0).sqrt();
    let column_matrix = |idx: usize| -> Result<ComplexMatrix> {
        let v: ComplexVector = vectors.column(idx).into_owned();
        tensor::unvec(&v, d, d)
    };
    let null = column_matrix(side - 1)?;
    // The smallest singular values are read off the residuals directly:
    // square-rooting the eigenvalues of the normal matrix would lose half of
    // the available digits.
    let last = system_residual(&images, &inputs, &null);
    let second_last = if side >= 2 {
        system_residual(&images, &inputs, &column_matrix(side - 2)?)
    } else {
        f64::INFINITY
    };
    Ok((NullityGap { first, second_last, last }, null))
}

/// The unitary `W` (up to phase) with `Φ(M) = W M W*` on MES.
///
/// Requires the numerical null space of the sampled system to be exactly
/// one-dimensional: `σ_last < tol·σ_first` and `σ_second_last >
/// 10·tol·σ_first`. The null vector is projected onto the unitaries (polar
/// factor) and phase-gauged.
pub fn recover_unitary(phi: &Superoperator, num_samples: usize, tol: f64, seed: u64) -> Result<ComplexMatrix> {
    let (gap, null) = commutant_system(phi, num_samples, seed)?;
    if gap.first == 0.0 {
        return Err(Error::AmbiguousSolution { ratio: 0.0 });
    }
    let last_ratio = gap.last / gap.first;
    if last_ratio >= tol {
        return Err(Error::NoSolution { ratio: last_ratio });
    }
    let second_ratio = gap.second_last / gap.first;
    if second_ratio <= 10.0 * tol {
        return Err(Error::AmbiguousSolution { ratio: second_ratio });
    }
    let mut w = tensor::polar_unitary(&null);
    tensor::fix_phase(&mut w);
    Ok(w)
}

/// Max over fresh random MES of `‖Φ(M) − (U⊗V) M^σ (U⊗V)*‖_F`; zero samples
/// give `0`, and mismatched sizes give `+∞`.
pub fn verify_theorem_form(phi: &Superoperator, dec: &Decomposition, num_samples: usize, seed: u64) -> f64 {
    let dims = phi.dims();
    if dec.u.shape() != (dims.m(), dims.m()) || dec.v.shape() != (dims.n(), dims.n()) {
        return f64::INFINITY;
    }
    (0..num_samples)
        .map(|i| {
            let m = states::random_coisometry(dims, derive_seed(seed, i as u64)).pi();
            match phi.apply(&m) {
                Ok(image) => (image - dec.reconstruct(&m)).norm(),
                Err(_) => f64::INFINITY,
            }
        })
        .fold(0.0, f64::max)
}

const STAGE_PRESERVE: u64 = 0;
const STAGE_SIGMA: u64 = 1;
const STAGE_RECOVER: u64 = 2;
const STAGE_VERIFY: u64 = 3;

/// Runs the pipeline with a precomputed basis of `span(MES)`.
pub fn decompose_with_basis(phi: &Superoperator, basis: &SpanBasis, config: &Config) -> Result<Decomposition> {
    let dims = phi.dims();
    if dims.k() < 2 {
        return Err(Error::Dimension(format!("decomposition needs k ≥ 2, got k = {}", dims.k())));
    }
    if !(config.tol > 0.0) {
        return Err(Error::Invalid("tol must be positive".into()));
    }
    let tol = config.tol;
    let seed = config.seed;

    let screen_samples = config.verify_samples.max(1);
    let residual = superop::mes_preservation_residual(phi, screen_samples, tol, derive_seed(seed, STAGE_PRESERVE));
    if !(residual < tol) {
        return Err(Error::NotPreserver(format!(
            "preservation stage: image of a random MES is off MES by {residual:.3e}"
        )));
    }

    let (sigma_min, sigma_max) = superop::span_singular_range(phi, basis)?;
    if !(sigma_max > 0.0 && sigma_min > tol * sigma_max) {
        return Err(Error::NotInvertible { sigma_min });
    }

    let sigma = choi::detect_sigma(phi, derive_seed(seed, STAGE_SIGMA), tol)?;
    let corrected = match sigma {
        Sigma::Identity => phi.clone(),
        Sigma::Transpose => phi.then_after_transpose(),
    };

    let samples = config.recovery_samples(dims);
    let w = recover_unitary(&corrected, samples, tol, derive_seed(seed, STAGE_RECOVER))?;

    let factors = tensor::nearest_kron_factor(&w, dims.m(), dims.n())?;
    if factors.residual >= tol * w.norm() {
        return Err(Error::NotKronecker { residual: factors.residual });
    }
    let mut v = factors.v;
    tensor::fix_phase(&mut v);
    let mut dec = Decomposition {
        sigma,
        u: factors.u,
        v,
        kron_residual: factors.residual,
        verification_residual: 0.0,
    };
    dec.verification_residual = verify_theorem_form(phi, &dec, config.verify_samples, derive_seed(seed, STAGE_VERIFY));
    if !(dec.verification_residual < tol) {
        return Err(Error::NotKronecker {
            residual: dec.verification_residual,
        });
    }
    Ok(dec)
}

/// Runs the full pipeline, computing the `span(MES)` basis on the fly.
pub fn decompose(phi: &Superoperator, config: &Config) -> Result<Decomposition> {
    let basis = superop::span_mes_basis(phi.dims());
    decompose_with_basis(phi, &basis, config)
}

/// Pipeline runner that caches the `span(MES)` basis per dimension pair.
#[derive(Debug, Default)]
pub struct Classifier {
    config: Config,
    spans: Mutex<HashMap<Dims, Arc<SpanBasis>>>,
}

impl Classifier {
    pub fn new(config: Config) -> Self {
        Classifier {
            config,
            spans: Mutex::new(HashMap::new()),
        }
    }

    pub fn config(&self) -> &Config {
        &self.config
    }

    /// Basis of `span(MES)` at `dims`, computed once.
    pub fn span_basis(&self, dims: Dims) -> Arc<SpanBasis> {
        let mut spans = self.spans.lock().unwrap_or_else(|e| e.into_inner());
        spans
            .entry(dims)
            .or_insert_with(|| Arc::new(superop::span_mes_basis(dims)))
            .clone()
    }

    pub fn decompose(&self, phi: &Superoperator) -> Result<Decomposition> {
        self.decompose_with(phi, &self.config)
    }

    /// Runs the pipeline under `config` (e.g. a different seed) while
    /// reusing the cached basis.
    pub fn decompose_with(&self, phi: &Superoperator, config: &Config) -> Result<Decomposition> {
        let basis = self.span_basis(phi.dims());
        decompose_with_basis(phi, &basis, config)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::superop::{make_adjoint_preserver, make_trace_preserver};
    use crate::tensor::{haar_unitary, phase_aligned_distance};

    fn dims(m: usize, k: usize) -> Dims {
        Dims::new(m, k).unwrap()
    }

    #[test]
    fn recovers_conjugation() {
        let (u, v) = (haar_unitary(2, 11), haar_unitary(4, 12));
        let phi = make_adjoint_preserver(&u, &v, Sigma::Identity).unwrap();
        let w = recover_unitary(&phi, 40, 1e-9, 3).unwrap();
        assert!(phase_aligned_distance(&w, &kron(&u, &v)) < 1e-8);
        assert!(tensor::unitarity_deviation(&w) < 1e-12);
    }

    #[test]
    fn identity_commutant_is_scalar() {
        let d = dims(2, 2);
        let w = recover_unitary(&Superoperator::identity(d), default_samples(d), 1e-9, 1).unwrap();
        assert!((w - ComplexMatrix::identity(8, 8)).norm() < 1e-10);
    }

    #[test]
    fn trace_preserver_has_no_clean_commutant() {
        let d = dims(2, 2);
        let rho = states::random_coisometry(d, 5).pi();
        let rho = states::DensityOperator::new(rho, d, 1e-9).unwrap();
        let phi = make_trace_preserver(&rho).unwrap();
        let err = recover_unitary(&phi, default_samples(d), 1e-9, 1).unwrap_err();
        assert!(matches!(err, Error::NoSolution { .. } | Error::AmbiguousSolution { .. }));
    }

    #[test]
    fn too_few_samples_are_ambiguous() {
        let d = dims(2, 2);
        let err = recover_unitary(&Superoperator::identity(d), 1, 1e-9, 1).unwrap_err();
        assert!(matches!(err, Error::AmbiguousSolution { .. }));
    }

    #[test]
    fn decomposes_both_sigmas() {
        let d = dims(2, 2);
        let classifier = Classifier::new(Config::default());
        for sigma in [Sigma::Identity, Sigma::Transpose] {
            let (u, v) = (haar_unitary(2, 21), haar_unitary(4, 22));
            let phi = make_adjoint_preserver(&u, &v, sigma).unwrap();
            let dec = classifier.decompose(&phi).unwrap();
            assert_eq!(dec.sigma, sigma);
            assert!(phase_aligned_distance(&dec.conjugation(), &kron(&u, &v)) < 1e-7);
            assert!(dec.verification_residual < 1e-9);
            assert!(tensor::unitarity_deviation(&dec.u) < 1e-8);
            assert!(tensor::unitarity_deviation(&dec.v) < 1e-8);
            assert_eq!(classifier.span_basis(d).dims(), d);
        }
    }

    #[test]
    fn identity_decomposes_to_identities() {
        let d = dims(2, 2);
        let dec = decompose(&Superoperator::identity(d), &Config::default()).unwrap();
        assert_eq!(dec.sigma, Sigma::Identity);
        assert!((&dec.u - ComplexMatrix::identity(2, 2)).norm() < 1e-9);
        assert!((&dec.v - ComplexMatrix::identity(4, 4)).norm() < 1e-9);
    }

    #[test]
    fn pipeline_errors_are_typed() {
        let d = dims(2, 2);
        let classifier = Classifier::new(Config::default());
        let rho = states::DensityOperator::new(states::random_coisometry(d, 7).pi(), d, 1e-9).unwrap();
        let trace = make_trace_preserver(&rho).unwrap();
        assert!(matches!(classifier.decompose(&trace), Err(Error::NotInvertible { .. })));

        let random = tensor::ginibre(64, 64, &mut tensor::seeded_rng(8));
        let random = Superoperator::new(d, random).unwrap();
        assert!(matches!(classifier.decompose(&random), Err(Error::NotPreserver(_))));

        let small = Superoperator::identity(dims(2, 1));
        assert!(matches!(decompose(&small, &Config::default()), Err(Error::Dimension(_))));
    }

    #[test]
    fn verification_conventions() {
        let d = dims(1, 2);
        let (u, v) = (haar_unitary(1, 1), haar_unitary(2, 2));
        let phi = make_adjoint_preserver(&u, &v, Sigma::Identity).unwrap();
        let dec = decompose(&phi, &Config::default()).unwrap();
        assert_eq!(verify_theorem_form(&phi, &dec, 0, 0), 0.0);
        let other = make_adjoint_preserver(&u, &haar_unitary(2, 99), Sigma::Transpose).unwrap();
        assert!(verify_theorem_form(&other, &dec, 10, 0) > 1e-2);
        assert_eq!(verify_theorem_form(&Superoperator::identity(dims(2, 2)), &dec, 1, 0), f64::INFINITY);
        assert!(dec.to_superoperator(d).unwrap().distance(&phi) < 1e-8);
    }

    #[test]
    fn decomposition_json_keys() {
        let dec = decompose(&Superoperator::identity(dims(1, 2)), &Config::default()).unwrap();
        let value: serde_json::Value = serde_json::from_str(&crate::io::to_json_string(&dec).unwrap()).unwrap();
        let mut keys: Vec<_> = value.as_object().unwrap().keys().cloned().collect();
        keys.sort();
        assert_eq!(keys, ["U", "V", "kron_residual", "sigma", "verification_residual"]);
        let back: Decomposition = serde_json::from_value(value).unwrap();
        assert_eq!(back, dec);
    }
}
