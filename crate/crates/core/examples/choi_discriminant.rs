// Detecting whether a preserver involves a transpose from the 4×4 Choi
// matrix of its restriction to an orthogonal pair of coisometries.

use meskit::choi;
use meskit::states;
use meskit::superop::{self, Sigma};
use meskit::tensor::{self, Dims};

pub fn run_example() -> meskit::Result<()> {
    let dims = Dims::new(2, 3)?;
    let u = tensor::haar_unitary(2, 11);
    let v = tensor::haar_unitary(6, 12);
    for sigma in [Sigma::Identity, Sigma::Transpose] {
        let phi = superop::make_adjoint_preserver(&u, &v, sigma)?;
        let family = states::orthogonal_family(dims, 5);
        let g = choi::restricted_g(&phi, &family[0], &family[1], 1e-9)?;
        let j = choi::choi_matrix(&g);
        let det = j.determinant();
        println!("σ = {sigma}: |J(G)| entries\n{:.3}", j.map(|z| z.norm()));
        println!("det J(G) = {det:.3e}, detected σ = {}", choi::detect_sigma(&phi, 5, 1e-9)?);
    }
    Ok(())
}

fn main() -> meskit::Result<()> {
    run_example()
}
