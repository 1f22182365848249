// Transition matrices on a hybrid window, cross-checked with the Peano–Baker series.

use std::error::Error;

use num_complex::Complex64;
use shiftfloquet::linalg::{self, CMatrix, CVector};
use shiftfloquet::timescale::{TimeCell, TimeScaleWindow};
use shiftfloquet::transition::{self, MatrixFunction, Propagator, VectorFunction};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let ts = TimeScaleWindow::explicit(vec![
        TimeCell::interval(0.0, 0.5),
        TimeCell::point(1.0),
        TimeCell::interval(1.5, 2.0),
        TimeCell::point(2.5),
    ])?;
    // Damped rotation with a time-varying coupling.
    let a = MatrixFunction::new(2, |t| {
        let w = 1.0 + 0.5 * t.sin();
        Ok(CMatrix::from_row_slice(2, 2, &[-0.1, w, -w, -0.1].map(|x| Complex64::new(x, 0.0))))
    });

    let phi = transition::transition_matrix(&a, &ts, 2.0, 0.0, 1e-12)?;
    let pb = transition::peano_baker(&a, &ts, 2.0, 0.0, 14, 1e-12)?;
    println!("Phi(2, 0) =\n{phi}");
    println!("|Phi - Peano-Baker| = {:.2e}", linalg::max_abs(&(&phi - &pb)));

    let prop = Propagator::new(a.clone(), ts.clone(), 0.0, 1e-12)?;
    let back = prop.between(0.25, 2.0)?;
    println!("Phi(0.25, 2) Phi(2, 0.25) - I = {:.2e}", linalg::max_abs(&(back * prop.between(2.0, 0.25)? - linalg::identity(2))));

    let f = VectorFunction::new(2, |t| Ok(CVector::from_vec(vec![Complex64::new(t.cos(), 0.0), Complex64::new(0.0, 0.0)])));
    let x0 = CVector::from_vec(vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]);
    let x = transition::variation_of_constants(&a, &f, &ts, 2.5, 0.0, &x0, 1e-12)?;
    println!("forced solution x(2.5) = [{:.6}, {:.6}]", x[0].re, x[1].re);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
