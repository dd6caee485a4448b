//! Arithmetic expressions over chart coordinates.
//!
//! Grammar, loosest binding first:
//!
//! ```text
//! sum     := product (('+' | '-') product)*
//! product := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := atom ('^' unary)?
//! atom    := number | ident | ident '(' sum ')' | '(' sum ')'
//! ```
//!
//! `^` is right associative and binds tighter than unary minus, so `-x^2`
//! is `-(x^2)` and `2^-1` is `0.5`.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::grid::{ChartGrid, ScalarField};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
    Tanh,
    Cosh,
    Sinh,
}

impl Func {
    fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            "tanh" => Func::Tanh,
            "cosh" => Func::Cosh,
            "sinh" => Func::Sinh,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Tanh => "tanh",
            Func::Cosh => "cosh",
            Func::Sinh => "sinh",
        }
    }

    fn apply(self, x: f64) -> core::result::Result<f64, &'static str> {
        match self {
            Func::Log if x <= 0.0 => Err("log of a non-positive value"),
            Func::Sqrt if x < 0.0 => Err("sqrt of a negative value"),
            _ => Ok(match self {
                Func::Sin => libm::sin(x),
                Func::Cos => libm::cos(x),
                Func::Tan => libm::tan(x),
                Func::Exp => libm::exp(x),
                Func::Log => libm::log(x),
                Func::Sqrt => libm::sqrt(x),
                Func::Tanh => libm::tanh(x),
                Func::Cosh => libm::cosh(x),
                Func::Sinh => libm::sinh(x),
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
            BinOp::Pow => '^',
        }
    }
}

/// Parsed expression tree.
#[derive(Debug, Clone, PartialEq)]
pub enum ExprAst {
    Num(f64),
    /// Coordinate variable with its source offset.
    Var { name: String, offset: usize },
    Pi,
    E,
    Neg(Box<ExprAst>),
    Bin(BinOp, Box<ExprAst>, Box<ExprAst>),
    Call(Func, Box<ExprAst>),
}

const VARIABLES: [&str; 4] = ["x", "y", "z", "r"];

struct Parser<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.bytes.get(self.pos).copied()
    }

    fn syntax<T>(&self, offset: usize, message: impl Into<String>) -> Result<T> {
        Err(Error::Syntax {
            offset,
            message: message.into(),
        })
    }

    fn sum(&mut self) -> Result<ExprAst> {
        let mut lhs = self.product()?;
        loop {
            let op = match self.peek() {
                Some(b'+') => BinOp::Add,
                Some(b'-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.product()?;
            lhs = ExprAst::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn product(&mut self) -> Result<ExprAst> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Some(b'*') => BinOp::Mul,
                Some(b'/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = ExprAst::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<ExprAst> {
        if self.peek() == Some(b'-') {
            self.pos += 1;
            return Ok(ExprAst::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<ExprAst> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let exponent = self.unary()?;
            return Ok(ExprAst::Bin(BinOp::Pow, Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<ExprAst> {
        let start = match self.peek() {
            None => return self.syntax(self.pos, "unexpected end of input"),
            Some(_) => self.pos,
        };
        let c = self.bytes[start];
        if c.is_ascii_digit() || c == b'.' {
            return self.number(start);
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            while self.pos < self.bytes.len()
                && (self.bytes[self.pos].is_ascii_alphanumeric() || self.bytes[self.pos] == b'_')
            {
                self.pos += 1;
            }
            let name = &self.src[start..self.pos];
            if let Some(func) = Func::from_name(name) {
                if self.peek() != Some(b'(') {
                    return self.syntax(self.pos, format!("expected '(' after `{name}`"));
                }
                self.pos += 1;
                let arg = self.sum()?;
                self.expect_close()?;
                return Ok(ExprAst::Call(func, Box::new(arg)));
            }
            return match name {
                "pi" => Ok(ExprAst::Pi),
                "e" => Ok(ExprAst::E),
                _ if VARIABLES.contains(&name) => Ok(ExprAst::Var {
                    name: name.to_string(),
                    offset: start,
                }),
                _ => Err(Error::UnknownIdentifier {
                    name: name.to_string(),
                    offset: start,
                }),
            };
        }
        if c == b'(' {
            self.pos += 1;
            let inner = self.sum()?;
            self.expect_close()?;
            return Ok(inner);
        }
        self.syntax(start, format!("unexpected character '{}'", self.src[start..].chars().next().unwrap_or('?')))
    }

    fn expect_close(&mut self) -> Result<()> {
        match self.peek() {
            Some(b')') => {
                self.pos += 1;
                Ok(())
            }
            None => self.syntax(self.pos, "expected ')' before end of input"),
            Some(_) => self.syntax(self.pos, "expected ')'"),
        }
    }

    fn number(&mut self, start: usize) -> Result<ExprAst> {
        let b = self.bytes;
        while self.pos < b.len() && (b[self.pos].is_ascii_digit() || b[self.pos] == b'.') {
            self.pos += 1;
        }
        if self.pos < b.len() && (b[self.pos] == b'e' || b[self.pos] == b'E') {
            // Only an exponent if digits follow; otherwise `2e` is an error below.
            let mut p = self.pos + 1;
            if p < b.len() && (b[p] == b'+' || b[p] == b'-') {
                p += 1;
            }
            if p < b.len() && b[p].is_ascii_digit() {
                while p < b.len() && b[p].is_ascii_digit() {
                    p += 1;
                }
                self.pos = p;
            }
        }
        let text = &self.src[start..self.pos];
        match text.parse::<f64>() {
            Ok(v) => Ok(ExprAst::Num(v)),
            Err(_) => self.syntax(start, format!("malformed number `{text}`")),
        }
    }
}

/// Parses an expression.
pub fn parse(src: &str) -> Result<ExprAst> {
    let mut p = Parser {
        src,
        bytes: src.as_bytes(),
        pos: 0,
    };
    let ast = p.sum()?;
    match p.peek() {
        None => Ok(ast),
        Some(_) => p.syntax(p.pos, "unexpected trailing input"),
    }
}

impl ExprAst {
    /// Variables referenced, in first-occurrence order.
    pub fn variables(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars<'s>(&'s self, out: &mut Vec<&'s str>) {
        match self {
            ExprAst::Var { name, .. } => {
                if !out.contains(&name.as_str()) {
                    out.push(name);
                }
            }
            ExprAst::Neg(a) | ExprAst::Call(_, a) => a.collect_vars(out),
            ExprAst::Bin(_, a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            _ => {}
        }
    }

    /// Structural equality ignoring source offsets.
    pub fn same_shape(&self, other: &ExprAst) -> bool {
        match (self, other) {
            (ExprAst::Num(a), ExprAst::Num(b)) => a.to_bits() == b.to_bits(),
            (ExprAst::Var { name: a, .. }, ExprAst::Var { name: b, .. }) => a == b,
            (ExprAst::Pi, ExprAst::Pi) | (ExprAst::E, ExprAst::E) => true,
            (ExprAst::Neg(a), ExprAst::Neg(b)) => a.same_shape(b),
            (ExprAst::Call(f, a), ExprAst::Call(g, b)) => f == g && a.same_shape(b),
            (ExprAst::Bin(o, a, b), ExprAst::Bin(p, c, d)) => o == p && a.same_shape(c) && b.same_shape(d),
            _ => false,
        }
    }

    /// Evaluates with `lookup` resolving variable names.
    pub fn eval_with(&self, lookup: &dyn Fn(&str, usize) -> Result<f64>) -> core::result::Result<f64, EvalError> {
        let v = match self {
            ExprAst::Num(v) => *v,
            ExprAst::Pi => core::f64::consts::PI,
            ExprAst::E => core::f64::consts::E,
            ExprAst::Var { name, offset } => lookup(name, *offset).map_err(EvalError::Lookup)?,
            ExprAst::Neg(a) => -a.eval_with(lookup)?,
            ExprAst::Call(f, a) => f.apply(a.eval_with(lookup)?).map_err(EvalError::Domain)?,
            ExprAst::Bin(op, a, b) => {
                let x = a.eval_with(lookup)?;
                let y = b.eval_with(lookup)?;
                match op {
                    BinOp::Add => x + y,
                    BinOp::Sub => x - y,
                    BinOp::Mul => x * y,
                    BinOp::Div => {
                        if y == 0.0 {
                            return Err(EvalError::Domain("division by zero"));
                        }
                        x / y
                    }
                    BinOp::Pow => libm::pow(x, y),
                }
            }
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(EvalError::Domain("non-finite result"))
        }
    }

    /// Value of a coordinate-free expression.
    pub fn eval_constant(&self) -> Result<f64> {
        self.eval_with(&|name, offset| {
            Err(Error::UnknownIdentifier {
                name: name.to_string(),
                offset,
            })
        })
        .map_err(|e| e.at_node(0))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum EvalError {
    Lookup(Error),
    Domain(&'static str),
}

impl EvalError {
    fn at_node(self, node: usize) -> Error {
        match self {
            EvalError::Lookup(e) => e,
            EvalError::Domain(message) => Error::Domain {
                node,
                message: message.to_string(),
            },
        }
    }
}

/// Canonical printer: every binary node is parenthesized.
impl fmt::Display for ExprAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExprAst::Num(v) => {
                if *v < 0.0 {
                    write!(f, "(-{:?})", -v)
                } else {
                    write!(f, "{v:?}")
                }
            }
            ExprAst::Var { name, .. } => f.write_str(name),
            ExprAst::Pi => f.write_str("pi"),
            ExprAst::E => f.write_str("e"),
            ExprAst::Neg(a) => write!(f, "(-{a})"),
            ExprAst::Bin(op, a, b) => write!(f, "({a} {} {b})", op.symbol()),
            ExprAst::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

/// Evaluates `ast` at every node. Variables must name coordinates of the chart.
pub fn evaluate(ast: &ExprAst, grid: &ChartGrid) -> Result<ScalarField> {
    let names = grid.kind().coordinate_names();
    for var in ast.variables() {
        if !names.contains(&Some(var)) {
            let offset = first_offset(ast, var).unwrap_or(0);
            return Err(Error::UnknownIdentifier {
                name: format!("{var} (not a coordinate of this chart)"),
                offset,
            });
        }
    }
    let mut values = Vec::with_capacity(grid.len());
    for node in 0..grid.len() {
        let x = grid.coords(node);
        let lookup = |name: &str, offset: usize| -> Result<f64> {
            names
                .iter()
                .position(|n| *n == Some(name))
                .map(|axis| x[axis])
                .ok_or_else(|| Error::UnknownIdentifier {
                    name: name.to_string(),
                    offset,
                })
        };
        values.push(ast.eval_with(&lookup).map_err(|e| e.at_node(node))?);
    }
    ScalarField::new(*grid, values)
}

fn first_offset(ast: &ExprAst, var: &str) -> Option<usize> {
    match ast {
        ExprAst::Var { name, offset } if name == var => Some(*offset),
        ExprAst::Neg(a) | ExprAst::Call(_, a) => first_offset(a, var),
        ExprAst::Bin(_, a, b) => first_offset(a, var).or_else(|| first_offset(b, var)),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{integrate, ChartKind, MetricField};
    use core::f64::consts::PI;

    fn at(src: &str, x: f64) -> f64 {
        parse(src)
            .unwrap()
            .eval_with(&|_, _| Ok(x))
            .unwrap()
    }

    #[test]
    fn precedence() {
        assert_eq!(at("2*sin(x)^2 + 1", PI / 2.0), 3.0);
        assert_eq!(at("exp(0)", 0.0), 1.0);
        assert_eq!(at("-2^2", 0.0), -4.0);
        assert_eq!(at("2^3^2", 0.0), 512.0);
        assert_eq!(at("8/4/2", 0.0), 1.0);
        assert_eq!(at("1 - 2 - 3", 0.0), -4.0);
        assert_eq!(at("2^-1", 0.0), 0.5);
        assert_eq!(at("1.5e2 + 2E-1", 0.0), 150.2);
    }

    #[test]
    fn syntax_errors_carry_offsets() {
        assert_eq!(
            parse("sin("),
            Err(Error::Syntax {
                offset: 4,
                message: "unexpected end of input".into()
            })
        );
        assert!(matches!(parse("1 +* 2"), Err(Error::Syntax { offset: 3, .. })));
        assert!(matches!(parse("(1"), Err(Error::Syntax { offset: 2, .. })));
        assert!(matches!(parse("1 2"), Err(Error::Syntax { offset: 2, .. })));
        assert!(matches!(parse("sin x"), Err(Error::Syntax { .. })));
        assert!(matches!(
            parse("2 * foo"),
            Err(Error::UnknownIdentifier { offset: 4, .. })
        ));
    }

    #[test]
    fn constant_fields() {
        let g = ChartGrid::torus([4, 4, 4]).unwrap();
        let f = evaluate(&parse("pi").unwrap(), &g).unwrap();
        assert!(f.values().iter().all(|&v| v == PI));
    }

    #[test]
    fn separable_field_integrates_to_zero() {
        let g = ChartGrid::torus([16, 16, 16]).unwrap();
        let f = evaluate(&parse("sin(x)*cos(y)").unwrap(), &g).unwrap();
        let m = MetricField::reference(g);
        assert!(integrate(&f, &m).unwrap().abs() < 1e-12);
    }

    #[test]
    fn domain_errors_name_the_node() {
        let g = ChartGrid::torus([4, 4, 4]).unwrap();
        assert!(matches!(
            evaluate(&parse("log(x - 10)").unwrap(), &g),
            Err(Error::Domain { node: 0, .. })
        ));
        assert!(matches!(
            evaluate(&parse("1/x").unwrap(), &g),
            Err(Error::Domain { node: 0, .. })
        ));
    }

    #[test]
    fn chart_variables_are_enforced() {
        let band = ChartGrid::new(ChartKind::S3Band, [8, 1, 1], None).unwrap();
        assert!(evaluate(&parse("cos(2*r)").unwrap(), &band).is_ok());
        assert!(matches!(
            evaluate(&parse("r + x").unwrap(), &band),
            Err(Error::UnknownIdentifier { offset: 4, .. })
        ));
    }

    #[test]
    fn printer_round_trips() {
        for src in ["-x^2", "2*sin(x)^2 + 1", "-(-3)", "e^-x / (1 + pi)", "sqrt(cosh(y) - 1e-3)"] {
            let a = parse(src).unwrap();
            let b = parse(&a.to_string()).unwrap();
            assert!(a.same_shape(&b), "{src} -> {a}");
            assert_eq!(a.to_string(), b.to_string());
        }
    }
}
