use std::f64::consts::PI;

use super::{BinaryOp, EvalContext, EvalError, Expression, Function};
use crate::numcore::Complex;

const ZERO: Complex = Complex::new(0.0, 0.0);
const ONE: Complex = Complex::new(1.0, 0.0);

/// Exponents up to this magnitude go through repeated squaring.
const MAX_INTEGER_EXPONENT: f64 = 1024.0;

fn checked(z: Complex) -> Result<Complex, EvalError> {
    if z.re.is_finite() && z.im.is_finite() {
        // -0.0 + 0.0 == +0.0, so negated reals stay on the upper side of the cut
        Ok(Complex::new(z.re + 0.0, z.im + 0.0))
    } else {
        Err(EvalError::NonFinite)
    }
}

fn powi(base: Complex, k: i64) -> Result<Complex, EvalError> {
    let mut b = if k < 0 {
        if base == ZERO {
            return Err(EvalError::DivisionByZero);
        }
        ONE / base
    } else {
        base
    };
    let mut e = k.unsigned_abs();
    let mut acc = ONE;
    while e > 0 {
        if e & 1 == 1 {
            acc *= b;
        }
        b *= b;
        e >>= 1;
    }
    Ok(acc)
}

fn pow(base: Complex, exponent: Complex) -> Result<Complex, EvalError> {
    if exponent.im == 0.0 && exponent.re.fract() == 0.0 && exponent.re.abs() <= MAX_INTEGER_EXPONENT {
        return powi(base, exponent.re as i64);
    }
    if base == ZERO {
        return if exponent.re > 0.0 { Ok(ZERO) } else { Err(EvalError::LogOfZero) };
    }
    Ok((exponent * base.ln()).exp())
}

pub(super) fn eval(e: &Expression, ctx: &EvalContext) -> Result<Complex, EvalError> {
    let v = match e {
        Expression::Number(v) => Complex::new(*v, 0.0),
        Expression::ImaginaryUnit => Complex::new(0.0, 1.0),
        Expression::Pi => Complex::new(PI, 0.0),
        Expression::Variable(name) => ctx.get(name).ok_or_else(|| EvalError::UnboundVariable(name.clone()))?,
        Expression::Neg(inner) => -eval(inner, ctx)?,
        Expression::Binary(op, a, b) => {
            let x = eval(a, ctx)?;
            let y = eval(b, ctx)?;
            match op {
                BinaryOp::Add => x + y,
                BinaryOp::Sub => x - y,
                BinaryOp::Mul => x * y,
                BinaryOp::Div => {
                    if y == ZERO {
                        return Err(EvalError::DivisionByZero);
                    }
                    x / y
                }
                BinaryOp::Pow => pow(x, y)?,
            }
        }
        Expression::Call(func, arg) => {
            let x = eval(arg, ctx)?;
            match func {
                Function::Exp => x.exp(),
                Function::Log => {
                    if x == ZERO {
                        return Err(EvalError::LogOfZero);
                    }
                    x.ln()
                }
                Function::Sin => x.sin(),
                Function::Cos => x.cos(),
                Function::Sqrt => x.sqrt(),
            }
        }
    };
    checked(v)
}
