// The full pipeline: certify a superoperator as an invertible MES preserver
// and recover Φ(X) = (U ⊗ V) X^σ (U ⊗ V)*.

use meskit::classify::{Classifier, Config};
use meskit::states::{self, DensityOperator};
use meskit::superop::{self, Sigma};
use meskit::tensor::{self, kron, Dims};

pub fn run_example() -> meskit::Result<()> {
    let dims = Dims::new(2, 3)?;
    let u = tensor::haar_unitary(2, 31);
    let v = tensor::haar_unitary(6, 32);
    let phi = superop::make_adjoint_preserver(&u, &v, Sigma::Transpose)?;

    let classifier = Classifier::new(Config::default());
    let dec = classifier.decompose(&phi)?;
    println!("σ = {}", dec.sigma);
    println!(
        "‖U⊗V − e^{{iθ}} U₀⊗V₀‖ = {:.2e}",
        tensor::phase_aligned_distance(&dec.conjugation(), &kron(&u, &v))
    );
    println!("kron residual {:.2e}, verification residual {:.2e}", dec.kron_residual, dec.verification_residual);

    let rho = DensityOperator::new(states::random_coisometry(dims, 33).pi(), dims, 1e-9)?;
    let trace = superop::make_trace_preserver(&rho)?;
    match classifier.decompose(&trace) {
        Ok(_) => println!("trace form unexpectedly decomposed"),
        Err(err) => println!("trace form rejected: {err}"),
    }
    Ok(())
}

fn main() -> meskit::Result<()> {
    run_example()
}
