//! Complex-valued closed-form expressions used to specify pole motions and
//! residue entries in configuration files.
//!
//! Grammar, loosest to tightest:
//!
//! ```text
//! sum     := product (('+' | '-') product)*
//! product := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := atom ('^' unary)?          right-associative
//! atom    := number | 'i' | 'pi' | ident | func '(' sum ')' | '(' sum ')'
//! func    := exp | log | sin | cos | sqrt
//! ```
//!
//! Unary minus binds looser than `^`, so `-2^2` is `-4`. There is no implicit
//! multiplication: `2x` is a syntax error.

mod eval;
mod parser;

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::numcore::Complex;

pub use parser::parse;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Function {
    Exp,
    Log,
    Sin,
    Cos,
    Sqrt,
}

impl Function {
    pub fn name(self) -> &'static str {
        match self {
            Function::Exp => "exp",
            Function::Log => "log",
            Function::Sin => "sin",
            Function::Cos => "cos",
            Function::Sqrt => "sqrt",
        }
    }

    pub(crate) fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "exp" => Function::Exp,
            "log" => Function::Log,
            "sin" => Function::Sin,
            "cos" => Function::Cos,
            "sqrt" => Function::Sqrt,
            _ => return None,
        })
    }
}

/// Expression tree.
#[derive(Clone, Debug, PartialEq)]
pub enum Expression {
    /// Nonnegative real literal.
    Number(f64),
    ImaginaryUnit,
    Pi,
    Variable(String),
    Neg(Box<Expression>),
    Binary(BinaryOp, Box<Expression>, Box<Expression>),
    Call(Function, Box<Expression>),
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("syntax error at offset {offset}: expected {}", expected.join(" or "))]
pub struct ParseError {
    /// Byte offset of the offending token (input length for end of input).
    pub offset: usize,
    pub expected: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("logarithm of zero")]
    LogOfZero,
    #[error("non-finite result")]
    NonFinite,
}

/// Variable bindings for evaluation.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct EvalContext {
    bindings: BTreeMap<String, Complex>,
}

impl EvalContext {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, name: &str, value: impl Into<Complex>) -> Self {
        self.bind(name, value);
        self
    }

    pub fn bind(&mut self, name: &str, value: impl Into<Complex>) {
        self.bindings.insert(name.to_string(), value.into());
    }

    pub fn get(&self, name: &str) -> Option<Complex> {
        self.bindings.get(name).copied()
    }
}

impl Expression {
    pub fn number(v: f64) -> Self {
        if v < 0.0 {
            Expression::Neg(Box::new(Expression::Number(-v)))
        } else {
            Expression::Number(v + 0.0)
        }
    }

    pub fn var(name: &str) -> Self {
        Expression::Variable(name.to_string())
    }

    pub fn binary(op: BinaryOp, lhs: Expression, rhs: Expression) -> Self {
        Expression::Binary(op, Box::new(lhs), Box::new(rhs))
    }

    pub fn eval(&self, ctx: &EvalContext) -> Result<Complex, EvalError> {
        eval::eval(self, ctx)
    }

    /// Names of all variables referenced, sorted and deduplicated.
    pub fn variables(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out.sort();
        out.dedup();
        out
    }

    fn collect_vars(&self, out: &mut Vec<String>) {
        match self {
            Expression::Variable(v) => out.push(v.clone()),
            Expression::Neg(e) | Expression::Call(_, e) => e.collect_vars(out),
            Expression::Binary(_, a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            _ => {}
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expression::Binary(BinaryOp::Add | BinaryOp::Sub, ..) => 1,
            Expression::Binary(BinaryOp::Mul | BinaryOp::Div, ..) => 2,
            Expression::Neg(_) => 3,
            Expression::Binary(BinaryOp::Pow, ..) => 4,
            _ => 5,
        }
    }
}

fn write_child(f: &mut fmt::Formatter<'_>, e: &Expression, parens: bool) -> fmt::Result {
    if parens {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expression::Number(v) => write!(f, "{v:?}"),
            Expression::ImaginaryUnit => write!(f, "i"),
            Expression::Pi => write!(f, "pi"),
            Expression::Variable(v) => write!(f, "{v}"),
            Expression::Neg(e) => {
                write!(f, "-")?;
                write_child(f, e, e.precedence() < 3)
            }
            Expression::Call(func, e) => write!(f, "{}({e})", func.name()),
            Expression::Binary(op, a, b) => {
                let (sym, prec) = match op {
                    BinaryOp::Add => (" + ", 1),
                    BinaryOp::Sub => (" - ", 1),
                    BinaryOp::Mul => ("*", 2),
                    BinaryOp::Div => ("/", 2),
                    BinaryOp::Pow => ("^", 4),
                };
                if *op == BinaryOp::Pow {
                    // base must be an atom; the exponent is parsed as a unary
                    write_child(f, a, a.precedence() < 5)?;
                    write!(f, "{sym}")?;
                    return write_child(f, b, b.precedence() < 3);
                }
                write_child(f, a, a.precedence() < prec)?;
                write!(f, "{sym}")?;
                // left-associative: an equal-precedence right child needs parentheses
                write_child(f, b, b.precedence() <= prec)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn arb_expr() -> impl Strategy<Value = Expression> {
        let leaf = prop_oneof![
            (0.0f64..1e6).prop_map(Expression::Number),
            Just(Expression::ImaginaryUnit),
            Just(Expression::Pi),
            prop::sample::select(vec!["x", "t", "alpha", "b_1"]).prop_map(Expression::var),
        ];
        leaf.prop_recursive(6, 48, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(|e| Expression::Neg(Box::new(e))),
                (
                    prop::sample::select(vec![
                        BinaryOp::Add,
                        BinaryOp::Sub,
                        BinaryOp::Mul,
                        BinaryOp::Div,
                        BinaryOp::Pow
                    ]),
                    inner.clone(),
                    inner.clone()
                )
                    .prop_map(|(op, a, b)| Expression::binary(op, a, b)),
                (
                    prop::sample::select(vec![
                        Function::Exp,
                        Function::Log,
                        Function::Sin,
                        Function::Cos,
                        Function::Sqrt
                    ]),
                    inner
                )
                    .prop_map(|(func, e)| Expression::Call(func, Box::new(e))),
            ]
        })
    }

    proptest! {
        #[test]
        fn print_parse_round_trip(e in arb_expr()) {
            let printed = e.to_string();
            let reparsed = parse(&printed).unwrap();
            prop_assert_eq!(&reparsed, &e, "printed as {}", printed);
        }
    }

    #[test]
    fn variables_are_collected() {
        let e = parse("x^2 + t*x - exp(s)").unwrap();
        assert_eq!(e.variables(), vec!["s", "t", "x"]);
    }

    #[test]
    fn negative_number_helper() {
        assert_eq!(Expression::number(-1.5).to_string(), "-1.5");
    }
}
