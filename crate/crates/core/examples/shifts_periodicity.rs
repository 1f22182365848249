// Shift operators, the clock Θ and periodicity checks on scales that are not additively periodic.

use std::error::Error;

use shiftfloquet::shifts::{PeriodicityMode, ShiftKind, ShiftSystem};
use shiftfloquet::timescale::TimeScaleWindow;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let sqrt = ShiftSystem::new(ShiftKind::Sqrt, 0.0, 2.0)?;
    println!("sqrt shifts: delta+(3, 4) = {}", sqrt.forward(3.0, 4.0)?);
    let sq = ShiftSystem::new(ShiftKind::SignedSquares, 0.0, 1.0)?;
    println!("signed squares: delta+(1, -4) = {}, delta-(1, 0) = {}", sq.forward(1.0, -4.0)?, sq.backward(1.0, 0.0)?);

    let g = TimeScaleWindow::geometric_union(3.0, 2.0, 1.0, 486.0)?;
    let mul = ShiftSystem::multiplicative(1.0, 3.0)?;
    for t in [1.5, 3.0, 4.0, 9.0] {
        println!("Theta({t}) = {:.6}, Theta'({t}) = {:.6}, m = {}", mul.theta(t)?, mul.theta_derivative(t)?, mul.m(t)?);
    }

    let samples = g.sample_points(g.min(), g.max(), 200);
    let scale = mul.verify_scale(&g, &samples, 1e-10);
    let axioms = mul.verify_axioms(&g, &samples, 1e-10);
    println!("scale periodic: {} ({} checks), axioms hold: {} ({} checks)", scale.pass, scale.checked, axioms.pass, axioms.checked);

    // 1/t is Δ-periodic under multiplicative shifts, t is not.
    let inv = |t: f64| Ok(1.0 / t);
    let lin = |t: f64| Ok(t);
    for (name, rep) in [
        ("1/t", mul.verify_periodicity(&g, Some(&inv), PeriodicityMode::DeltaFunction, &samples, 1e-10)),
        ("t", mul.verify_periodicity(&g, Some(&lin), PeriodicityMode::DeltaFunction, &samples, 1e-10)),
    ] {
        println!("{name:>3} Delta-periodic: {} ({} violations)", rep.pass, rep.violations.len());
    }

    // Two disjoint pieces with different gaps cannot be periodic in multiplicative shifts.
    let bad = TimeScaleWindow::explicit(vec![
        shiftfloquet::timescale::TimeCell::interval(-8.0, 0.0),
        shiftfloquet::timescale::TimeCell::interval(1.0, 8.0),
    ])?;
    let rep = ShiftSystem::multiplicative(1.0, 2.0)?.verify_scale(&bad, &bad.sample_points(-8.0, 8.0, 50), 1e-10);
    println!("[-8,0] U [1,8] periodic: {} ({} violations)", rep.pass, rep.violations.len());
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
