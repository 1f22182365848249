// Floquet exponents on several branches and Bloch solutions x(δ₊^T(t)) = λ x(t).

use std::error::Error;

use num_complex::Complex64;
use shiftfloquet::floquet::FloquetDecomposition;
use shiftfloquet::linalg::CMatrix;
use shiftfloquet::shifts::ShiftSystem;
use shiftfloquet::timescale::TimeScaleWindow;
use shiftfloquet::transition::MatrixFunction;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    // ℤ with period 4 and a rotating coupling.
    let ts = TimeScaleWindow::integer(0.0, 40.0)?;
    let sys = ShiftSystem::additive(0.0, 4.0)?;
    let a = MatrixFunction::new(2, |t| {
        let k = 0.3 * (std::f64::consts::FRAC_PI_2 * t).cos();
        Ok(CMatrix::from_row_slice(2, 2, &[-0.1, k, -0.3, -0.1].map(|x| Complex64::new(x, 0.0))))
    });
    let dec = FloquetDecomposition::new(a, ts, sys, 1e-12)?;
    println!("multipliers {:?}", dec.multipliers());

    for lambda in dec.spectral().eigenvalues.clone() {
        for k in -1..=1 {
            let g = dec.exponent(lambda, k)?;
            let back = g.exp(dec.window(), dec.t1(), dec.t0(), 1e-13)?;
            println!(
                "lambda = {lambda:.6}, k = {k:+}: gamma(mu = 1) = {:.6}, in strip {}, |e_gamma(t1,t0) - lambda| = {:.1e}",
                g.value(1.0),
                g.in_strip,
                (back - lambda).norm()
            );
        }
        let u = dec.eigenvector(lambda);
        for t in [1.0, 6.0] {
            let x = dec.bloch_solution(lambda, &u, t)?;
            let xt = dec.bloch_solution(lambda, &u, t + dec.period())?;
            println!("  Bloch residual at t = {t}: {:.1e}", (xt - &x * lambda).norm());
        }
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
