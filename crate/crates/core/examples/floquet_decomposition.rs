// Monodromy, R, e_R and the Lyapunov transformation L for x^Δ = x/t on ∪[3^k, 2·3^k].

use std::error::Error;

use num_complex::Complex64;
use shiftfloquet::floquet::FloquetDecomposition;
use shiftfloquet::linalg::CMatrix;
use shiftfloquet::shifts::ShiftSystem;
use shiftfloquet::timescale::TimeScaleWindow;
use shiftfloquet::transition::MatrixFunction;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let ts = TimeScaleWindow::geometric_union(3.0, 2.0, 1.0, 486.0)?;
    let sys = ShiftSystem::multiplicative(1.0, 3.0)?;
    let a = MatrixFunction::new(2, |t| Ok(CMatrix::from_diagonal_element(2, 2, Complex64::new(1.0 / t, 0.0))));
    let dec = FloquetDecomposition::new(a, ts, sys, 1e-12)?;

    println!("t0 = {}, t1 = {}, T = {}", dec.t0(), dec.t1(), dec.period());
    println!("M = Phi(3, 1) =\n{}", dec.monodromy());
    println!("multipliers {:?}", dec.multipliers());
    println!("Log M =\n{}", dec.log_monodromy());
    for t in [1.5, 2.0, 4.0, 6.0, 12.0] {
        let r = dec.r(t)?[(0, 0)].re;
        let e = dec.exponential(t)?[(0, 0)].re;
        let l = dec.lyapunov(t)?[(0, 0)].re;
        println!("t = {t:>4}: Theta = {:.4}, R = {r:.6}, e_R = {e:.6}, L = {l:.6}", dec.shifts().theta(t)?);
    }
    let samples = dec.window().sample_points(1.0, 162.0, 60);
    let res = dec.residuals(&samples)?;
    println!(
        "residuals: decomposition {:.1e}, L periodicity {:.1e}, e_R(t1) - M {:.1e}",
        res.decomposition, res.l_periodicity, res.monodromy
    );
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
