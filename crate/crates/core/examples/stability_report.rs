// Stability verdicts from exponent conditions and from multiplier moduli.

use std::error::Error;

use num_complex::Complex64;
use shiftfloquet::floquet::FloquetDecomposition;
use shiftfloquet::linalg::CMatrix;
use shiftfloquet::shifts::ShiftSystem;
use shiftfloquet::stability::{self, ClassifyOptions};
use shiftfloquet::timescale::TimeScaleWindow;
use shiftfloquet::transition::MatrixFunction;

fn scaled(c: f64) -> MatrixFunction {
    MatrixFunction::new(2, move |t| Ok(CMatrix::from_diagonal_element(2, 2, Complex64::new(c / t, 0.0))))
}

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let ts = TimeScaleWindow::q_scale(2.0, 1.0, 1024.0)?;
    let sys = ShiftSystem::multiplicative(1.0, 2.0)?;
    for c in [1.0, -0.5, 0.0] {
        let dec = FloquetDecomposition::new(scaled(c), ts.clone(), sys.clone(), 1e-12)?;
        let rep = stability::classify(&dec, ClassifyOptions::new(1.0, 1024.0))?;
        println!("A = {c}/t: multipliers {:?}", dec.multipliers());
        println!("  theorem verdict {:?}, corollary verdict {:?}", rep.verdict_theorem, rep.verdict_corollary);
        if let Some(track) = rep.tracks.first() {
            println!("  inf of -Re_mu(gamma)/Lambda = {:.6}, min -Re_mu(gamma) = {:.3e}", track.inf_statistic, track.eps_statistic);
        }
        println!("  regressivity certificate theta^-1 = {}, pass = {}", rep.certificate.theta_inv, rep.certificate.pass);
        for note in &rep.notes {
            println!("  note: {note}");
        }
    }
    for t in [1.0, 8.0, 64.0] {
        println!("Lambda({t}) = {}, h_2({t}, 1) = {}", stability::lambda_ratio(&sys, &ts, t)?, stability::monomial_h(&sys, &ts, 2, t, 1.0, 1e-12)?);
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
