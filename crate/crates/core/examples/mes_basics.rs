// Maximally entangled states from coisometries: build π_A, test MES
// membership through the partial trace, and recover A up to phase.

use meskit::states::{self, Coisometry};
use meskit::tensor::{self, Dims};

pub fn run_example() -> meskit::Result<()> {
    let dims = Dims::new(2, 2)?;
    let a = states::random_coisometry(dims, 7);
    let pi = a.pi();

    let marginal = tensor::partial_trace_y(&pi, dims.m(), dims.n())?;
    println!("tr_Y(π_A) = I/m: {:.3}", marginal);
    println!("π_A is MES: {}", states::is_mes(&pi, dims, 1e-9));

    let rep = states::representative(&pi, dims, 1e-9)?;
    let distance = tensor::phase_aligned_distance(rep.matrix(), a.matrix());
    println!("representative matches A up to phase: {distance:.2e}");

    // A random pure state on X ⊗ Y is almost never maximally entangled.
    let v = tensor::sample_unit_vector(dims.joint(), &mut tensor::seeded_rng(1));
    println!("random pure state is MES: {}", states::is_mes(&(&v * v.adjoint()), dims, 1e-9));

    // The canonical coisometries E_j pick out the j-th block of Y = X^k.
    let e1 = Coisometry::canonical(dims, 1)?;
    println!("E_1 = {:.0}", e1.matrix().map(|z| z.re));
    Ok(())
}

fn main() -> meskit::Result<()> {
    run_example()
}
