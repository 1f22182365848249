// Scalar exponentials e_p(t, s), circle algebra and Hilger real parts.

use std::error::Error;

use num_complex::Complex64;
use shiftfloquet::hilger;
use shiftfloquet::timescale::TimeScaleWindow;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let q = TimeScaleWindow::q_scale(2.0, 1.0, 1024.0)?;
    let g = TimeScaleWindow::geometric_union(3.0, 2.0, 1.0, 486.0)?;
    let r = TimeScaleWindow::real(0.0, 10.0)?;

    let inv_t = |t: f64| Ok(Complex64::new(1.0 / t, 0.0));
    println!("e_(1/t)(16, 1) on 2^Z = {}", hilger::scalar_exp(&inv_t, &q, 16.0, 1.0, 1e-12)?);
    println!("e_(1/t)(9, 1) on U[3^k,2*3^k] = {}", hilger::scalar_exp(&inv_t, &g, 9.0, 1.0, 1e-12)?);
    let one = |_t: f64| Ok(Complex64::new(1.0, 0.0));
    println!("e_1(1, 0) on R = {} (e = {})", hilger::scalar_exp(&one, &r, 1.0, 0.0, 1e-12)?, std::f64::consts::E);

    // -3/t on 2^Z crosses the branch cut: 1 + μp = -2 at every point.
    let neg = |t: f64| Ok(Complex64::new(-3.0 / t, 0.0));
    let detail = hilger::scalar_exp_detailed(&neg, &q, 8.0, 1.0, 1e-12)?;
    println!("e_(-3/t)(8, 1) = {} with cut points {:?}", detail.value, detail.cut_points);

    let (a, b, mu) = (Complex64::new(0.5, 0.2), Complex64::new(-0.3, 0.1), 2.0);
    let sum = hilger::circle_plus(a, b, mu)?;
    println!("a (+) b = {sum}, (a (+) b) (-) b = {}", hilger::circle_minus(sum, b, mu)?);
    println!("Hilger imaginary i°(pi/4) at mu = 2: {}", hilger::hilger_imaginary(std::f64::consts::FRAC_PI_4, mu)?);
    for z in [Complex64::new(-0.25, 0.0), Complex64::new(-1.5, 0.0), Complex64::new(0.1, 0.0)] {
        println!("Re_mu({z}) = {:+.4}, inside the Hilger circle: {}", hilger::re_mu(z, mu), hilger::in_hilger_circle(z, mu));
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
