//! Acceptance suite. Runs without the libtest harness so that every
//! criterion prints exactly one PASS/FAIL line, then exits non-zero if any
//! criterion failed.

use std::time::{Duration, Instant};

use meskit::choi;
use meskit::classify::{Classifier, Config};
use meskit::extension;
use meskit::lemmas::superposition_residual;
use meskit::states::{self, DensityOperator, OrthogonalityCriteria};
use meskit::superop::{self, Sigma, Superoperator};
use meskit::tensor::{self, derive_seed, kron, seeded_rng, ComplexMatrix, Dims};
use meskit::Error;

struct Verdict {
    passed: bool,
    detail: String,
}

fn dims(m: usize, k: usize) -> Dims {
    Dims::new(m, k).unwrap()
}

fn sigma_of(i: usize) -> Sigma {
    if i % 2 == 0 {
        Sigma::Identity
    } else {
        Sigma::Transpose
    }
}

fn preserver(d: Dims, sigma: Sigma, seed: u64) -> (ComplexMatrix, ComplexMatrix, Superoperator) {
    let u = tensor::haar_unitary(d.m(), derive_seed(seed, 0));
    let v = tensor::haar_unitary(d.n(), derive_seed(seed, 1));
    let phi = superop::make_adjoint_preserver(&u, &v, sigma).unwrap();
    (u, v, phi)
}

/// det J(G) within 1e-8 of 0 / −1 and detect_sigma always right; < 1 min.
fn choi_discriminant() -> Verdict {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut wrong = 0;
    let mut total = 0;
    for (m, k) in [(2, 2), (2, 3), (3, 2)] {
        let d = dims(m, k);
        for i in 0..100 {
            let sigma = sigma_of(i);
            let seed = derive_seed(1000 + (m * 10 + k) as u64, i as u64);
            let (_, _, phi) = preserver(d, sigma, seed);
            let det = choi::choi_determinant(&phi, derive_seed(seed, 7), 1e-9).unwrap();
            let target = match sigma {
                Sigma::Identity => 0.0,
                Sigma::Transpose => -1.0,
            };
            worst = worst.max((det - target).norm());
            if choi::detect_sigma(&phi, derive_seed(seed, 7), 1e-9).ok() != Some(sigma) {
                wrong += 1;
            }
            total += 1;
        }
    }
    let elapsed = start.elapsed();
    Verdict {
        passed: worst < 1e-8 && wrong == 0 && elapsed < Duration::from_secs(60),
        detail: format!("{total} maps, max |det − target| = {worst:.2e}, {wrong} misdetections, {elapsed:.2?}"),
    }
}

/// decompose ∘ make_adjoint_preserver recovers σ and U⊗V; < 5 min.
fn round_trip() -> Verdict {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut failures = 0;
    let mut total = 0;
    for (m, k) in [(1, 2), (2, 2), (2, 3), (3, 2)] {
        let d = dims(m, k);
        let classifier = Classifier::new(Config::default());
        for sigma in [Sigma::Identity, Sigma::Transpose] {
            for s in 0..50u64 {
                let seed = derive_seed(2000 + (m * 10 + k) as u64, s * 2 + sigma_index(sigma));
                let (u, v, phi) = preserver(d, sigma, seed);
                let config = Config {
                    seed: derive_seed(seed, 9),
                    ..Config::default()
                };
                total += 1;
                match classifier.decompose_with(&phi, &config) {
                    Ok(dec) if dec.sigma == sigma => {
                        let err = tensor::phase_aligned_distance(&dec.conjugation(), &kron(&u, &v));
                        worst = worst.max(err);
                        if err >= 1e-7 {
                            failures += 1;
                        }
                    }
                    _ => failures += 1,
                }
            }
        }
    }
    let elapsed = start.elapsed();
    Verdict {
        passed: failures == 0 && worst < 1e-7 && elapsed < Duration::from_secs(300),
        detail: format!("{total} decompositions, {failures} failures, max ‖U⊗V − e^{{iθ}}U₀⊗V₀‖ = {worst:.2e}, {elapsed:.2?}"),
    }
}

fn sigma_index(sigma: Sigma) -> u64 {
    match sigma {
        Sigma::Identity => 0,
        Sigma::Transpose => 1,
    }
}

/// tr_Y(vec(A) vec(B)*) = A B* to 1e-12, 1000 pairs, m ≤ 3, n ≤ 9.
fn partial_trace_identity() -> Verdict {
    let mut rng = seeded_rng(3000);
    let shapes: Vec<(usize, usize)> = (1..=3).flat_map(|m| (m..=9).map(move |n| (m, n))).collect();
    let mut worst: f64 = 0.0;
    for i in 0..1000 {
        let (m, n) = shapes[i % shapes.len()];
        let a = tensor::ginibre(m, n, &mut rng);
        let b = tensor::ginibre(m, n, &mut rng);
        let lhs = tensor::partial_trace_y(&(tensor::vec(&a) * tensor::vec(&b).adjoint()), m, n).unwrap();
        worst = worst.max((lhs - &a * b.adjoint()).norm());
    }
    Verdict {
        passed: worst < 1e-12,
        detail: format!("1000 pairs over {} shapes, max residual {worst:.2e}", shapes.len()),
    }
}

/// Five orthogonality criteria agree with the truth on 500 + 500 pairs.
fn orthogonality_equivalence() -> Verdict {
    let mut rng = seeded_rng(4000);
    let shapes = [dims(1, 2), dims(2, 2), dims(2, 3), dims(3, 2)];
    let mut disagreements = 0;
    for i in 0..500 {
        let d = shapes[i % shapes.len()];
        let family = states::sample_orthogonal_family(d, &mut rng);
        let yes = OrthogonalityCriteria::evaluate(family[0].matrix(), family[1].matrix(), 8, 1e-9, &mut rng);
        disagreements += yes.as_array().iter().filter(|&&f| !f).count();
        let a = states::sample_random_coisometry(d, &mut rng);
        let b = states::sample_random_coisometry(d, &mut rng);
        let no = OrthogonalityCriteria::evaluate(a.matrix(), b.matrix(), 8, 1e-9, &mut rng);
        disagreements += no.as_array().iter().filter(|&&f| f).count();
    }
    Verdict {
        passed: disagreements == 0,
        detail: format!("500 orthogonal + 500 non-orthogonal pairs, {disagreements} disagreements"),
    }
}

/// Φ(vec(A₁) vec(A₂)*) from four MES evaluations, 200 cases, < 1e-10.
fn polarization() -> Verdict {
    let shapes = [dims(1, 2), dims(2, 2), dims(2, 3), dims(3, 2)];
    let mut worst: f64 = 0.0;
    for i in 0..200 {
        let d = shapes[i % shapes.len()];
        let seed = derive_seed(5000, i as u64);
        let (_, _, phi) = preserver(d, sigma_of(i / shapes.len()), seed);
        let family = states::orthogonal_family(d, derive_seed(seed, 2));
        let (a1, a2) = (&family[0], &family[1]);
        let direct = phi
            .apply(&(tensor::vec(a1.matrix()) * tensor::vec(a2.matrix()).adjoint()))
            .unwrap();
        let polarized = choi::phi_on_cross_term(&phi, a1, a2, 1e-9).unwrap();
        worst = worst.max((direct - polarized).norm());
    }
    Verdict {
        passed: worst < 1e-10,
        detail: format!("200 cases, max residual {worst:.2e}"),
    }
}

/// The extension maps MES_{Y,Y} into MES_{Y,Y} and commutes with every
/// ad_{P_j⊗I} and ad_{Q_pq}.
fn extension_properties() -> Verdict {
    let mut worst_mes: f64 = 0.0;
    let mut worst_comm: f64 = 0.0;
    let mut non_mes = 0;
    for (m, k) in [(2, 2), (2, 3)] {
        let d = dims(m, k);
        let big = Dims::square(d.n()).unwrap();
        let mut operators = Vec::new();
        for j in 0..k {
            operators.push(extension::p_operator_on_pair(j, d).unwrap());
        }
        for p in 0..k {
            for q in p + 1..k {
                operators.push(extension::q_operator(p, q, d).unwrap());
            }
        }
        for sigma in [Sigma::Identity, Sigma::Transpose] {
            let seed = derive_seed(6000 + (m * 10 + k) as u64, sigma_index(sigma));
            let (_, _, phi) = preserver(d, sigma, seed);
            let ext = extension::extend(&phi, sigma).unwrap();
            for i in 0..100u64 {
                let mes = states::random_coisometry(big, derive_seed(seed, 100 + i)).pi();
                let image = ext.apply(&mes).unwrap();
                if !states::is_mes(&image, big, 1e-8) {
                    non_mes += 1;
                }
                worst_mes = worst_mes.max(states::mes_deviation(&image, big, 1e-8).unwrap_or(f64::INFINITY));
                for w in &operators {
                    let r = extension::commutation_residual(ext.superop(), w, &mes).unwrap();
                    worst_comm = worst_comm.max(r);
                }
            }
        }
    }
    Verdict {
        passed: non_mes == 0 && worst_comm < 1e-9,
        detail: format!(
            "400 MES_{{Y,Y}} images, {non_mes} off MES (max deviation {worst_mes:.2e}), max commutation residual {worst_comm:.2e}"
        ),
    }
}

/// Trace form → NotInvertible; Haar-random superoperator → NotPreserver;
/// the swap form fails the P₁ commutation on the explicit witness.
fn negative_controls() -> Verdict {
    let d = dims(2, 2);
    let classifier = Classifier::new(Config::default());
    let side = d.operator_space();
    let (mut trace_accepts, mut random_accepts, mut swap_accepts) = (0, 0, 0);
    let mut weakest_witness = f64::INFINITY;
    let p1 = extension::p_operator_on_pair(0, d).unwrap();
    for s in 0..50u64 {
        let seed = derive_seed(7000, s);
        let rho = states::random_coisometry(d, derive_seed(seed, 0)).pi();
        let rho = DensityOperator::new(rho, d, 1e-9).unwrap();
        let trace = superop::make_trace_preserver(&rho).unwrap();
        if !matches!(classifier.decompose(&trace), Err(Error::NotInvertible { .. })) {
            trace_accepts += 1;
        }

        let haar = tensor::haar_unitary(side, derive_seed(seed, 1));
        let random = Superoperator::new(d, haar).unwrap();
        if !matches!(classifier.decompose(&random), Err(Error::NotPreserver(_))) {
            random_accepts += 1;
        }

        let n = d.n();
        let sigma = sigma_of(s as usize);
        let u = tensor::haar_unitary(n, derive_seed(seed, 2));
        let v = tensor::haar_unitary(n, derive_seed(seed, 3));
        let swap = superop::make_swap_preserver(&u, &v, sigma).unwrap();
        let witness = extension::switch_witness(&u, sigma, d).unwrap();
        let gap = extension::commutation_residual(&swap, &p1, &witness).unwrap();
        weakest_witness = weakest_witness.min(gap);
        let commutes = extension::commutes_with_ad(&swap, &p1, 20, 1e-9, derive_seed(seed, 4)).unwrap();
        if gap < 1e-6 || commutes {
            swap_accepts += 1;
        }
    }
    Verdict {
        passed: trace_accepts + random_accepts + swap_accepts == 0,
        detail: format!(
            "false accepts: trace {trace_accepts}/50, random {random_accepts}/50, swap {swap_accepts}/50 (smallest witness residual {weakest_witness:.2e})"
        ),
    }
}

/// Φ(π_{Σα_jA_j}) = π_{Σα_j^σ B_j} for 100 coefficient vectors, k = 3, m = 2.
fn coherent_superposition() -> Verdict {
    let d = dims(2, 3);
    let mut worst: f64 = 0.0;
    let mut rng = seeded_rng(8000);
    for sigma in [Sigma::Identity, Sigma::Transpose] {
        let seed = derive_seed(8000, sigma_index(sigma));
        let (_, _, phi) = preserver(d, sigma, seed);
        let family = states::orthogonal_family(d, derive_seed(seed, 2));
        let images = choi::align_images(&phi, &family, sigma, 1e-9).unwrap();
        for _ in 0..100 {
            let alpha = tensor::sample_unit_vector(3, &mut rng);
            let r = superposition_residual(&phi, &family, &images, alpha.as_slice(), sigma).unwrap();
            worst = worst.max(r);
        }
    }
    Verdict {
        passed: worst < 1e-8,
        detail: format!("2 × 100 coefficient vectors, max residual {worst:.2e}"),
    }
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 8] = [
        ("Choi discriminant", choi_discriminant),
        ("decomposition round trip", round_trip),
        ("partial trace identity", partial_trace_identity),
        ("orthogonality equivalence", orthogonality_equivalence),
        ("polarization", polarization),
        ("extension", extension_properties),
        ("negative controls", negative_controls),
        ("coherent superposition", coherent_superposition),
    ];
    let mut failed = 0;
    for (idx, (name, run)) in criteria.iter().enumerate() {
        let verdict = run();
        let tag = if verdict.passed { "PASS" } else { "FAIL" };
        println!("criterion {} [{tag}] {name}: {}", idx + 1, verdict.detail);
        if !verdict.passed {
            failed += 1;
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
