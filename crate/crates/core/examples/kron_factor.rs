// Recovering a conjugating unitary from samples of Φ on MES, then splitting
// it into Kronecker factors.

use meskit::classify;
use meskit::superop::{self, Sigma};
use meskit::tensor::{self, kron};

pub fn run_example() -> meskit::Result<()> {
    let u0 = tensor::haar_unitary(2, 41);
    let v0 = tensor::haar_unitary(4, 42);
    let phi = superop::make_adjoint_preserver(&u0, &v0, Sigma::Identity)?;

    let (gap, _) = classify::commutant_system(&phi, 40, 1)?;
    println!(
        "commutant system: σ_first {:.2}, σ_second-last {:.2e}, σ_last {:.2e}",
        gap.first, gap.second_last, gap.last
    );
    let w = classify::recover_unitary(&phi, 40, 1e-9, 1)?;
    println!("recovered W ~ U₀⊗V₀: {:.2e}", tensor::phase_aligned_distance(&w, &kron(&u0, &v0)));

    let factors = tensor::nearest_kron_factor(&w, 2, 4)?;
    println!("nearest Kronecker residual: {:.2e}", factors.residual);
    println!("U (gauged) = {:.4}", factors.u);
    Ok(())
}

fn main() -> meskit::Result<()> {
    run_example()
}
