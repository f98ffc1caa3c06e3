// The three families of MES preservers: conjugation (optionally after a
// transpose), the swap form on L(C^n ⊗ C^n), and the trace form.

use meskit::states::{self, DensityOperator};
use meskit::superop::{self, Sigma};
use meskit::tensor::{self, Dims};

pub fn run_example() -> meskit::Result<()> {
    let dims = Dims::new(2, 2)?;
    let basis = superop::span_mes_basis(dims);
    println!("dim span(MES) at (m, n) = (2, 4): {}", basis.dimension());

    let u = tensor::haar_unitary(2, 1);
    let v = tensor::haar_unitary(4, 2);
    for sigma in [Sigma::Identity, Sigma::Transpose] {
        let phi = superop::make_adjoint_preserver(&u, &v, sigma)?;
        println!(
            "adjoint form, σ = {sigma}: preserves MES {}, invertible on span {}",
            superop::preserves_mes(&phi, 20, 1e-9, 3),
            superop::is_invertible_on_span(&phi, &basis, 1e-9)?
        );
    }

    let square = Dims::square(3)?;
    let swap = superop::make_swap_preserver(&tensor::haar_unitary(3, 4), &tensor::haar_unitary(3, 5), Sigma::Identity)?;
    println!("swap form on (3, 3): preserves MES {}", superop::preserves_mes(&swap, 20, 1e-9, 6));
    assert_eq!(swap.dims(), square);

    let rho = DensityOperator::new(states::random_coisometry(dims, 8).pi(), dims, 1e-9)?;
    let trace = superop::make_trace_preserver(&rho)?;
    let (sigma_min, sigma_max) = superop::span_singular_range(&trace, &basis)?;
    println!(
        "trace form: preserves MES {}, singular range on span [{sigma_min:.1e}, {sigma_max:.2}]",
        superop::preserves_mes(&trace, 20, 1e-9, 9)
    );
    Ok(())
}

fn main() -> meskit::Result<()> {
    run_example()
}
