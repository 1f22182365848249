// Parsing and evaluating the expression language used by configuration files.

use std::collections::HashMap;
use std::error::Error;

use shiftfloquet::exprdsl;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let params = HashMap::from([("q".to_string(), 2.0)]);
    let e = exprdsl::parse("(1/t)*cos(pi*ln(t)/ln(q))")?;
    println!("parsed: {e}");
    println!("variables: {:?}", e.variables());
    for t in [1.0, 2.0, 4.0] {
        println!("  t = {t}: {:+.12}", e.eval(t, &params)?);
    }
    let shift = exprdsl::parse("sqrt(t^2 + s^2)")?;
    println!("sqrt(t^2 + s^2) at s = 3, t = 4: {}", shift.eval_st(3.0, 4.0, &params)?);
    println!("-2^2 = {}", exprdsl::parse("-2^2")?.eval(0.0, &params)?);
    for bad in ["sin(t", "k*t", "ln(-1)", "foo(t)"] {
        let result = exprdsl::parse(bad).and_then(|e| e.eval(1.0, &params));
        println!("{bad:>7}: {}", result.map(|v| v.to_string()).unwrap_or_else(|e| e.to_string()));
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
