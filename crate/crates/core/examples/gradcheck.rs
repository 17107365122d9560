//! Compares backpropagation-through-time gradients with central finite
//! differences on the small reference problem.

use scf::trainer::gradcheck::{gradient_check, small_problem};

fn main() -> scf::Result<()> {
    let (classifier, batch) = small_problem(0)?;
    for step in [1e-3, 1e-5, 1e-7] {
        let report = gradient_check(&classifier, &batch, step, 1e-4)?;
        println!(
            "h = {step:e}: {} parameters, max relative error {:.2e}, {} failures",
            report.checked,
            report.max_relative_error(),
            report.failures.len()
        );
    }
    Ok(())
}
