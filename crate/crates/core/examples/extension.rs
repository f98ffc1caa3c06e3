// Extending a preserver on L(X ⊗ Y) blockwise to L(Y ⊗ Y), and the block
// sign / block permutation symmetries the extension commutes with.

use meskit::extension;
use meskit::superop::{self, Sigma};
use meskit::tensor::{self, Dims};

pub fn run_example() -> meskit::Result<()> {
    let dims = Dims::new(2, 2)?;
    let u = tensor::haar_unitary(2, 21);
    let v = tensor::haar_unitary(4, 22);
    let phi = superop::make_adjoint_preserver(&u, &v, Sigma::Transpose)?;
    let ext = extension::extend(&phi, Sigma::Transpose)?;
    println!(
        "extension acts on dims (n, n) = ({}, {}); preserves MES: {}",
        ext.superop().dims().m(),
        ext.superop().dims().n(),
        superop::preserves_mes(ext.superop(), 20, 1e-9, 1)
    );

    for j in 0..dims.k() {
        let w = extension::p_operator_on_pair(j, dims)?;
        let r = extension::max_commutation_residual(ext.superop(), &w, 10, 2)?;
        println!("P_{}⊗I commutation residual: {r:.1e}", j + 1);
    }
    let q = extension::q_operator(0, 1, dims)?;
    println!("Q_12 commutation residual: {:.1e}", extension::max_commutation_residual(ext.superop(), &q, 10, 3)?);

    // A swap-form map on L(Y ⊗ Y) is not such an extension: the explicit
    // witness breaks the P_1 symmetry.
    let (a, b) = (tensor::haar_unitary(4, 23), tensor::haar_unitary(4, 24));
    let swap = superop::make_swap_preserver(&a, &b, Sigma::Identity)?;
    let witness = extension::switch_witness(&a, Sigma::Identity, dims)?;
    let p1 = extension::p_operator_on_pair(0, dims)?;
    println!(
        "swap form, P_1 witness residual: {:.3}",
        extension::commutation_residual(&swap, &p1, &witness)?
    );
    Ok(())
}

fn main() -> meskit::Result<()> {
    run_example()
}
