//! Prints the Mexican-hat profile along one axis and checks that the
//! frequency-domain convolution matches the direct sum.

use scf::field::{convolve_naive, AreaParams, ConvMode, GridShape, LateralKernel, LateralOperator};

fn main() -> scf::Result<()> {
    let shape = GridShape::new(17, 17)?;
    let kernel = LateralKernel::from_params(shape, &AreaParams::default());

    println!("offset  weight");
    for d in 0..=8 {
        println!("{d:>6}  {:>8.4}", kernel.at(d, 0));
    }
    println!("kernel sum {:.4}", kernel.sum());

    // a single active neuron reproduces the kernel centred on it
    let mut activity = vec![0.0; shape.len()];
    activity[shape.index(8, 8)] = 1.0;
    activity[shape.index(2, 13)] = 0.5;
    let fast = LateralOperator::new(kernel.clone()).apply(&activity, ConvMode::Fast)?;
    let naive = convolve_naive(&kernel, &activity);
    let gap = fast.iter().zip(&naive).map(|(f, n)| (f - n).abs()).fold(0.0, f64::max);
    println!("max |fast - naive| = {gap:.2e}");
    Ok(())
}
