// Real powers and logarithms of nonsingular matrices, including Jordan blocks.

use std::error::Error;

use num_complex::Complex64;
use shiftfloquet::linalg::{self, CMatrix};
use shiftfloquet::matpow::{self, ClusterOptions};

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

pub fn run_example() -> Result<(), Box<dyn Error>> {
    // 3×3 Jordan block for λ = 2.
    let j = CMatrix::from_row_slice(3, 3, &[2.0, 1.0, 0.0, 0.0, 2.0, 1.0, 0.0, 0.0, 2.0].map(c));
    let sd = matpow::spectral_decompose(&j)?;
    println!("eigenvalues {:?} with multiplicities {:?}", sd.eigenvalues, sd.multiplicities);
    let half = sd.power(0.5);
    println!("J^(1/2) =\n{half}");
    println!("|J^(1/2) J^(1/2) - J| = {:.2e}", linalg::max_abs(&(&half * &half - &j)));
    let log = sd.log();
    println!("Log J =\n{log}");

    // A rotation by 3π/4 has complex multipliers; M^(1/3) is a rotation by π/4.
    let th = 3.0 * std::f64::consts::FRAC_PI_4;
    let rot = CMatrix::from_row_slice(2, 2, &[th.cos(), -th.sin(), th.sin(), th.cos()].map(c));
    let cube_root = matpow::real_power(&rot, 1.0 / 3.0)?;
    println!("R(3pi/4)^(1/3) =\n{cube_root}");

    // Negative eigenvalue: the principal branch gives a complex power of a real matrix.
    let neg = CMatrix::from_row_slice(2, 2, &[-4.0, 0.0, 0.0, 9.0].map(c));
    println!("diag(-4, 9)^(1/2) =\n{}", matpow::real_power(&neg, 0.5)?);

    // Nearly repeated eigenvalues are merged unless strict clustering is requested.
    let near = CMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0 + 1e-7].map(c));
    let merged = matpow::spectral_decompose(&near)?;
    println!("near-defective: {} cluster(s), merged_ambiguous = {}", merged.eigenvalues.len(), merged.merged_ambiguous);
    let strict = matpow::spectral_decompose_with(&near, ClusterOptions { strict: true, ..ClusterOptions::default() });
    println!("strict clustering: {}", strict.err().map(|e| e.to_string()).unwrap_or_else(|| "ok".into()));
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
