//! A small real-valued expression language for matrix entries, forcing
//! terms and custom shift maps.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := primary ('^' unary)?
//! primary := number | ident | ident '(' expr ')' | '(' expr ')'
//! ident   := [A-Za-z_][A-Za-z0-9_]*
//! ```
//!
//! Functions: `sin cos tan exp ln sqrt abs floor`. Constants: `pi`, `e`.
//! Any other identifier is a variable resolved at evaluation time.

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Ln,
    Sqrt,
    Abs,
    Floor,
}

impl Func {
    fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "exp" => Func::Exp,
            "ln" => Func::Ln,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            "floor" => Func::Floor,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
            Func::Floor => "floor",
        }
    }

    fn apply(self, x: f64) -> Result<f64> {
        Ok(match self {
            Func::Sin => x.sin(),
            Func::Cos => x.cos(),
            Func::Tan => x.tan(),
            Func::Exp => x.exp(),
            Func::Ln => {
                if !(x > 0.0) {
                    return Err(Error::DomainError { function: "ln", arg: x });
                }
                x.ln()
            }
            Func::Sqrt => {
                if x < 0.0 || x.is_nan() {
                    return Err(Error::DomainError { function: "sqrt", arg: x });
                }
                x.sqrt()
            }
            Func::Abs => x.abs(),
            Func::Floor => x.floor(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Constant {
    Pi,
    E,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Const(Constant),
    Var(String),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

impl Expr {
    /// Evaluates with `t` bound and named parameters from `params`.
    pub fn eval(&self, t: f64, params: &HashMap<String, f64>) -> Result<f64> {
        self.eval_with(&|name| if name == "t" { Some(t) } else { params.get(name).copied() })
    }

    /// Evaluates with both `s` and `t` bound (custom shift maps).
    pub fn eval_st(&self, s: f64, t: f64, params: &HashMap<String, f64>) -> Result<f64> {
        self.eval_with(&|name| match name {
            "t" => Some(t),
            "s" => Some(s),
            _ => params.get(name).copied(),
        })
    }

    pub fn eval_with(&self, lookup: &dyn Fn(&str) -> Option<f64>) -> Result<f64> {
        match self {
            Expr::Num(x) => Ok(*x),
            Expr::Const(Constant::Pi) => Ok(std::f64::consts::PI),
            Expr::Const(Constant::E) => Ok(std::f64::consts::E),
            Expr::Var(name) => lookup(name).ok_or_else(|| Error::UnboundVariable { name: name.clone() }),
            Expr::Neg(a) => Ok(-a.eval_with(lookup)?),
            Expr::Bin(op, a, b) => {
                let (x, y) = (a.eval_with(lookup)?, b.eval_with(lookup)?);
                Ok(match op {
                    BinOp::Add => x + y,
                    BinOp::Sub => x - y,
                    BinOp::Mul => x * y,
                    BinOp::Div => x / y,
                    BinOp::Pow => x.powf(y),
                })
            }
            Expr::Call(f, a) => f.apply(a.eval_with(lookup)?),
        }
    }

    /// Names of all free variables, sorted and deduplicated.
    pub fn variables(&self) -> Vec<String> {
        fn walk(e: &Expr, out: &mut Vec<String>) {
            match e {
                Expr::Var(n) => out.push(n.clone()),
                Expr::Neg(a) | Expr::Call(_, a) => walk(a, out),
                Expr::Bin(_, a, b) => {
                    walk(a, out);
                    walk(b, out);
                }
                Expr::Num(_) | Expr::Const(_) => {}
            }
        }
        let mut out = Vec::new();
        walk(self, &mut out);
        out.sort();
        out.dedup();
        out
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(x) => write!(f, "{x:?}"),
            Expr::Const(Constant::Pi) => write!(f, "pi"),
            Expr::Const(Constant::E) => write!(f, "e"),
            Expr::Var(n) => write!(f, "{n}"),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Bin(op, a, b) => {
                let sym = match op {
                    BinOp::Add => "+",
                    BinOp::Sub => "-",
                    BinOp::Mul => "*",
                    BinOp::Div => "/",
                    BinOp::Pow => "^",
                };
                write!(f, "({a} {sym} {b})")
            }
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

impl std::str::FromStr for Expr {
    type Err = Error;
    fn from_str(s: &str) -> Result<Expr> {
        parse(s)
    }
}

pub fn parse(src: &str) -> Result<Expr> {
    let mut p = Parser { src: src.as_bytes(), pos: 0 };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.error("operator or end of input"));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn error(&self, expected: &str) -> Error {
        Error::SyntaxError { position: self.pos, expected: expected.to_string() }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        while let Some(c @ (b'+' | b'-')) = self.peek() {
            self.pos += 1;
            let rhs = self.term()?;
            let op = if c == b'+' { BinOp::Add } else { BinOp::Sub };
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        while let Some(c @ (b'*' | b'/')) = self.peek() {
            self.pos += 1;
            let rhs = self.unary()?;
            let op = if c == b'*' { BinOp::Mul } else { BinOp::Div };
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.peek() == Some(b'-') {
            self.pos += 1;
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.primary()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let exp = self.unary()?;
            return Ok(Expr::Bin(BinOp::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.error("')'"));
                }
                self.pos += 1;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                let start = self.pos;
                while self.pos < self.src.len()
                    && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or_default().to_string();
                if self.peek() == Some(b'(') {
                    let func = Func::from_name(&name).ok_or(Error::UnknownFunction { name, position: start })?;
                    self.pos += 1;
                    let arg = self.expr()?;
                    if self.peek() != Some(b')') {
                        return Err(self.error("')'"));
                    }
                    self.pos += 1;
                    return Ok(Expr::Call(func, Box::new(arg)));
                }
                Ok(match name.as_str() {
                    "pi" => Expr::Const(Constant::Pi),
                    "e" => Expr::Const(Constant::E),
                    _ => Expr::Var(name),
                })
            }
            _ => Err(self.error("number, identifier or '('")),
        }
    }

    fn number(&mut self) -> Result<Expr> {
        let start = self.pos;
        let digits = |p: &mut Self| {
            while p.pos < p.src.len() && p.src[p.pos].is_ascii_digit() {
                p.pos += 1;
            }
        };
        digits(self);
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            digits(self);
        }
        if matches!(self.src.get(self.pos), Some(b'e' | b'E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.src.get(self.pos), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            if self.src.get(self.pos).is_some_and(u8::is_ascii_digit) {
                digits(self);
            } else {
                self.pos = save;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or_default();
        text.parse::<f64>().map(Expr::Num).map_err(|_| Error::SyntaxError {
            position: start,
            expected: "number".to_string(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn no_params() -> HashMap<String, f64> {
        HashMap::new()
    }

    #[test]
    fn parses_reciprocal() {
        let e = parse("1/t").unwrap();
        assert_eq!(e, Expr::Bin(BinOp::Div, Box::new(Expr::Num(1.0)), Box::new(Expr::Var("t".into()))));
        assert_eq!(e.eval(2.0, &no_params()).unwrap(), 0.5);
    }

    #[test]
    fn parses_cosine_entry() {
        let e = parse("(1/t)*cos(pi*ln(t)/ln(q))").unwrap();
        let inner = Expr::Bin(
            BinOp::Div,
            Box::new(Expr::Bin(
                BinOp::Mul,
                Box::new(Expr::Const(Constant::Pi)),
                Box::new(Expr::Call(Func::Ln, Box::new(Expr::Var("t".into())))),
            )),
            Box::new(Expr::Call(Func::Ln, Box::new(Expr::Var("q".into())))),
        );
        let want = Expr::Bin(
            BinOp::Mul,
            Box::new(Expr::Bin(BinOp::Div, Box::new(Expr::Num(1.0)), Box::new(Expr::Var("t".into())))),
            Box::new(Expr::Call(Func::Cos, Box::new(inner))),
        );
        assert_eq!(e, want);
        let params = HashMap::from([("q".to_string(), 2.0)]);
        let c = parse("cos(pi*ln(t)/ln(q))").unwrap().eval(2.0, &params).unwrap();
        assert!((c + 1.0).abs() < 1e-15);
    }

    #[test]
    fn reports_positions() {
        assert_eq!(parse("2*").unwrap_err(), Error::SyntaxError { position: 2, expected: "number, identifier or '('".into() });
        assert!(matches!(parse("foo(1)"), Err(Error::UnknownFunction { position: 0, .. })));
        assert!(matches!(parse("(1+2"), Err(Error::SyntaxError { position: 4, .. })));
        assert!(matches!(parse("1 2"), Err(Error::SyntaxError { position: 2, .. })));
    }

    #[test]
    fn domain_and_binding_errors() {
        let e = parse("ln(t)").unwrap();
        assert!(matches!(e.eval(-1.0, &no_params()), Err(Error::DomainError { function: "ln", .. })));
        assert!(matches!(parse("sqrt(t)").unwrap().eval(-4.0, &no_params()), Err(Error::DomainError { .. })));
        assert_eq!(parse("q*t").unwrap().eval(1.0, &no_params()), Err(Error::UnboundVariable { name: "q".into() }));
    }

    #[test]
    fn precedence() {
        let p = no_params();
        let ev = |s: &str| parse(s).unwrap().eval(0.0, &p).unwrap();
        assert_eq!(ev("2^3^2"), 512.0);
        assert_eq!(ev("-2^2"), -4.0);
        assert_eq!(ev("2^-1"), 0.5);
        assert_eq!(ev("1 - 2 - 3"), -4.0);
        assert_eq!(ev("8 / 4 / 2"), 1.0);
        assert_eq!(ev("2 + 3 * 4"), 14.0);
        assert_eq!(ev("1.5e2 + .5"), 150.5);
        assert_eq!(ev("floor(2.7) + abs(-1)"), 3.0);
        assert_eq!(parse("s + t").unwrap().eval_st(2.0, 3.0, &p).unwrap(), 5.0);
    }

    fn arb_expr() -> impl Strategy<Value = Expr> {
        let leaf = prop_oneof![
            (0.0f64..1e6).prop_map(Expr::Num),
            Just(Expr::Var("t".into())),
            Just(Expr::Var("q".into())),
            Just(Expr::Const(Constant::Pi)),
            Just(Expr::Const(Constant::E)),
        ];
        leaf.prop_recursive(5, 48, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(|a| Expr::Neg(Box::new(a))),
                (
                    prop_oneof![
                        Just(BinOp::Add),
                        Just(BinOp::Sub),
                        Just(BinOp::Mul),
                        Just(BinOp::Div),
                        Just(BinOp::Pow)
                    ],
                    inner.clone(),
                    inner.clone()
                )
                    .prop_map(|(op, a, b)| Expr::Bin(op, Box::new(a), Box::new(b))),
                (
                    prop_oneof![Just(Func::Sin), Just(Func::Exp), Just(Func::Abs), Just(Func::Floor)],
                    inner
                )
                    .prop_map(|(f, a)| Expr::Call(f, Box::new(a))),
            ]
        })
    }

    proptest! {
        #[test]
        fn print_parse_round_trip(e in arb_expr()) {
            let printed = e.to_string();
            prop_assert_eq!(parse(&printed).unwrap(), e);
        }

        #[test]
        fn addition_and_unit_power(a in arb_expr(), b in arb_expr(), t in 0.1f64..10.0) {
            let params = HashMap::from([("q".to_string(), 2.0)]);
            let (x, y) = (a.eval(t, &params).unwrap(), b.eval(t, &params).unwrap());
            prop_assume!(x.is_finite() && y.is_finite());
            let sum = Expr::Bin(BinOp::Add, Box::new(a.clone()), Box::new(b));
            prop_assert_eq!(sum.eval(t, &params).unwrap(), x + y);
            let pow = Expr::Bin(BinOp::Pow, Box::new(a.clone()), Box::new(Expr::Num(1.0)));
            prop_assert_eq!(pow.eval(t, &params).unwrap(), x);
            prop_assert_eq!(a.eval(t, &params).unwrap().to_bits(), x.to_bits());
        }
    }
}
