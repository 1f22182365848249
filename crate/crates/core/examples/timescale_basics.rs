// Windows of builtin time scales: jump operators, Δ-derivatives and Δ-integrals.

use std::error::Error;

use shiftfloquet::timescale::{TimeCell, TimeScaleWindow};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let q = TimeScaleWindow::q_scale(2.0, 1.0, 64.0)?;
    let g = TimeScaleWindow::geometric_union(3.0, 2.0, 1.0, 486.0)?;
    let hybrid = TimeScaleWindow::explicit(vec![TimeCell::interval(0.0, 1.0), TimeCell::point(2.0), TimeCell::interval(3.0, 4.0)])?;

    for (name, ts, pts) in [("2^Z", &q, vec![1.0, 4.0, 32.0]), ("U[3^k,2*3^k]", &g, vec![1.5, 2.0, 6.0]), ("hybrid", &hybrid, vec![0.5, 1.0, 2.0])] {
        for t in pts {
            let j = ts.jump_info(t)?;
            println!("{name:>13}: t = {t:<5} sigma = {:<6} mu = {:<5} {:?}", j.sigma, j.mu, j.class);
        }
    }

    // f(t) = t² has f^Δ = t + σ(t).
    let f = |t: f64| Ok(t * t);
    for t in [4.0, 1.5] {
        let ts = if t == 4.0 { &q } else { &g };
        let d: f64 = ts.delta_derivative(&f, t, None)?;
        println!("(t^2)^Delta at {t} = {d:.10} (t + sigma(t) = {})", t + ts.sigma(t)?);
    }

    // ∫₁^{64} 1 Δt on 2^ℤ sums the graininess: 63.
    let one = |_t: f64| Ok(1.0);
    let sum: f64 = q.delta_integral(&one, 1.0, 64.0, 1e-12)?;
    println!("int_1^64 1 Delta t on 2^Z = {sum}");
    // On the union the integral of 1/t picks up ln 2 on each dense cell and 1/2 on each gap.
    let inv = |t: f64| Ok(1.0 / t);
    let v: f64 = g.delta_integral(&inv, 1.0, 9.0, 1e-12)?;
    println!("int_1^9 dt/t on U[3^k,2*3^k] = {v:.12} (2 ln 2 + 1 = {:.12})", 2.0 * 2f64.ln() + 1.0);
    println!("sample points of the hybrid window: {:?}", hybrid.sample_points(0.0, 4.0, 9));
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
