// Periodic solution of a forced system x^Δ = A x + F and the resonant case.

use std::error::Error;

use num_complex::Complex64;
use shiftfloquet::floquet;
use shiftfloquet::linalg::{CMatrix, CVector};
use shiftfloquet::shifts::ShiftSystem;
use shiftfloquet::timescale::TimeScaleWindow;
use shiftfloquet::transition::{MatrixFunction, VectorFunction};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let ts = TimeScaleWindow::q_scale(2.0, 1.0, 1024.0)?;
    let sys = ShiftSystem::multiplicative(1.0, 2.0)?;
    let a = MatrixFunction::new(2, |t| Ok(CMatrix::from_diagonal_element(2, 2, Complex64::new(1.0 / t, 0.0))));
    let f = VectorFunction::new(2, |t| Ok(CVector::from_element(2, Complex64::new(1.0 / t, 0.0))));

    let x0 = floquet::nonhomogeneous_periodic_state(&a, &f, &ts, &sys, 1e-12, 1e-8)?;
    println!("x0 = [{}, {}]", x0[0], x0[1]);
    for t in [2.0, 4.0, 64.0] {
        let x = floquet::forced_solution(&a, &f, &ts, 1.0, &x0, t, 1e-12)?;
        println!("x({t}) = [{:.12}, {:.12}]", x[0].re, x[1].re);
    }

    // A = 0 has M = I, so I - M is singular.
    let zero = MatrixFunction::zero(2);
    match floquet::nonhomogeneous_periodic_state(&zero, &f, &ts, &sys, 1e-12, 1e-8) {
        Err(e) => println!("A = 0: {e}"),
        Ok(x) => println!("A = 0 unexpectedly solved: {x}"),
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
