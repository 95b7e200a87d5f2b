use super::{BinaryOp, Expression, Function, ParseError};

#[derive(Clone, Debug, PartialEq)]
enum Token {
    Number(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn tokenize(src: &'a str) -> Result<Vec<(Token, usize)>, ParseError> {
        let mut lx = Lexer { src, pos: 0 };
        let mut out = Vec::new();
        loop {
            let (tok, at) = lx.next()?;
            let done = tok == Token::End;
            out.push((tok, at));
            if done {
                return Ok(out);
            }
        }
    }

    fn peek_byte(&self) -> Option<u8> {
        self.src.as_bytes().get(self.pos).copied()
    }

    fn next(&mut self) -> Result<(Token, usize), ParseError> {
        while matches!(self.peek_byte(), Some(b) if b.is_ascii_whitespace()) {
            self.pos += 1;
        }
        let start = self.pos;
        let Some(b) = self.peek_byte() else {
            return Ok((Token::End, start));
        };
        let single = match b {
            b'+' => Some(Token::Plus),
            b'-' => Some(Token::Minus),
            b'*' => Some(Token::Star),
            b'/' => Some(Token::Slash),
            b'^' => Some(Token::Caret),
            b'(' => Some(Token::LParen),
            b')' => Some(Token::RParen),
            _ => None,
        };
        if let Some(tok) = single {
            self.pos += 1;
            return Ok((tok, start));
        }
        if b.is_ascii_digit() || b == b'.' {
            return self.number(start);
        }
        if b.is_ascii_alphabetic() || b == b'_' {
            while matches!(self.peek_byte(), Some(c) if c.is_ascii_alphanumeric() || c == b'_') {
                self.pos += 1;
            }
            return Ok((Token::Ident(self.src[start..self.pos].to_string()), start));
        }
        Err(ParseError { offset: start, expected: vec!["expression".into()] })
    }

    fn number(&mut self, start: usize) -> Result<(Token, usize), ParseError> {
        let bytes = self.src.as_bytes();
        let mut end = start;
        while end < bytes.len() && bytes[end].is_ascii_digit() {
            end += 1;
        }
        if end < bytes.len() && bytes[end] == b'.' {
            end += 1;
            while end < bytes.len() && bytes[end].is_ascii_digit() {
                end += 1;
            }
        }
        if end < bytes.len() && (bytes[end] == b'e' || bytes[end] == b'E') {
            let mut k = end + 1;
            if k < bytes.len() && (bytes[k] == b'+' || bytes[k] == b'-') {
                k += 1;
            }
            if k < bytes.len() && bytes[k].is_ascii_digit() {
                while k < bytes.len() && bytes[k].is_ascii_digit() {
                    k += 1;
                }
                end = k;
            }
        }
        let text = &self.src[start..end];
        match text.parse::<f64>() {
            Ok(v) if v.is_finite() => {
                self.pos = end;
                // a number glued to an identifier would be implicit multiplication
                if matches!(self.peek_byte(), Some(c) if c.is_ascii_alphabetic() || c == b'_') {
                    return Err(ParseError { offset: end, expected: vec!["operator".into(), "')'".into()] });
                }
                Ok((Token::Number(v), start))
            }
            _ => Err(ParseError { offset: start, expected: vec!["number".into()] }),
        }
    }
}

struct Parser {
    tokens: Vec<(Token, usize)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos].0
    }

    fn offset(&self) -> usize {
        self.tokens[self.pos].1
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].0.clone();
        if t != Token::End {
            self.pos += 1;
        }
        t
    }

    fn error(&self, expected: &[&str]) -> ParseError {
        ParseError { offset: self.offset(), expected: expected.iter().map(|s| s.to_string()).collect() }
    }

    fn sum(&mut self) -> Result<Expression, ParseError> {
        let mut lhs = self.product()?;
        loop {
            let op = match self.peek() {
                Token::Plus => BinaryOp::Add,
                Token::Minus => BinaryOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.product()?;
            lhs = Expression::binary(op, lhs, rhs);
        }
    }

    fn product(&mut self) -> Result<Expression, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Token::Star => BinaryOp::Mul,
                Token::Slash => BinaryOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = Expression::binary(op, lhs, rhs);
        }
    }

    fn unary(&mut self) -> Result<Expression, ParseError> {
        if *self.peek() == Token::Minus {
            self.bump();
            return Ok(Expression::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expression, ParseError> {
        let base = self.atom()?;
        if *self.peek() == Token::Caret {
            self.bump();
            let exponent = self.unary()?;
            return Ok(Expression::binary(BinaryOp::Pow, base, exponent));
        }
        Ok(base)
    }

    fn expect_rparen(&mut self) -> Result<(), ParseError> {
        if *self.peek() == Token::RParen {
            self.bump();
            Ok(())
        } else {
            Err(self.error(&["')'", "operator"]))
        }
    }

    fn atom(&mut self) -> Result<Expression, ParseError> {
        const ATOM: &[&str] = &["number", "identifier", "'('", "'-'"];
        match self.peek().clone() {
            Token::Number(v) => {
                self.bump();
                Ok(Expression::Number(v))
            }
            Token::LParen => {
                self.bump();
                let e = self.sum()?;
                self.expect_rparen()?;
                Ok(e)
            }
            Token::Ident(name) => {
                if let Some(func) = Function::from_name(&name) {
                    self.bump();
                    if *self.peek() != Token::LParen {
                        return Err(self.error(&["'('"]));
                    }
                    self.bump();
                    let arg = self.sum()?;
                    self.expect_rparen()?;
                    return Ok(Expression::Call(func, Box::new(arg)));
                }
                self.bump();
                Ok(match name.as_str() {
                    "i" => Expression::ImaginaryUnit,
                    "pi" => Expression::Pi,
                    _ => Expression::Variable(name),
                })
            }
            _ => Err(self.error(ATOM)),
        }
    }
}

/// Parses an expression; whitespace is insignificant.
pub fn parse(text: &str) -> Result<Expression, ParseError> {
    let tokens = Lexer::tokenize(text)?;
    let mut p = Parser { tokens, pos: 0 };
    let e = p.sum()?;
    if *p.peek() != Token::End {
        return Err(p.error(&["operator", "end of input"]));
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::EvalContext;
    use crate::numcore::Complex;
    use std::f64::consts::PI;

    fn ev(s: &str, ctx: &EvalContext) -> Complex {
        parse(s).unwrap().eval(ctx).unwrap()
    }

    #[test]
    fn tree_shape_of_polynomial() {
        let expect = Expression::binary(
            BinaryOp::Add,
            Expression::binary(BinaryOp::Pow, Expression::var("x"), Expression::Number(2.0)),
            Expression::var("t"),
        );
        assert_eq!(parse("x^2 + t").unwrap(), expect);
        assert_eq!(parse("  x ^2+t ").unwrap(), expect);
    }

    #[test]
    fn reciprocal_at_imaginary_unit() {
        let ctx = EvalContext::new().with("x", Complex::new(0.0, 1.0)).with("t", 0.0);
        assert!((ev("1/(x - t)", &ctx) - Complex::new(0.0, -1.0)).norm() < 1e-15);
    }

    #[test]
    fn constants_only() {
        let v = ev("2*pi*i", &EvalContext::new().with("x", 3.0));
        assert!((v - Complex::new(0.0, 2.0 * PI)).norm() < 1e-15);
    }

    #[test]
    fn precedence_fixtures() {
        let ctx = EvalContext::new();
        assert_eq!(ev("2+3*4^2", &ctx), Complex::new(50.0, 0.0));
        assert_eq!(ev("-2^2", &ctx), Complex::new(-4.0, 0.0));
        assert_eq!(ev("2^3^2", &ctx), Complex::new(512.0, 0.0));
        assert_eq!(ev("2^-1", &ctx), Complex::new(0.5, 0.0));
        assert_eq!(ev("8/4/2", &ctx), Complex::new(1.0, 0.0));
        assert_eq!(ev("1-2-3", &ctx), Complex::new(-4.0, 0.0));
    }

    #[test]
    fn scientific_literals() {
        assert_eq!(parse("1.5e-3").unwrap(), Expression::Number(1.5e-3));
        assert_eq!(parse(".5").unwrap(), Expression::Number(0.5));
    }

    #[test]
    fn syntax_errors_carry_offsets() {
        let e = parse("1/(x").unwrap_err();
        assert_eq!(e.offset, 4);
        assert!(e.expected.contains(&"')'".to_string()));
        assert_eq!(parse("2x").unwrap_err().offset, 1);
        assert_eq!(parse("1 + * 2").unwrap_err().offset, 4);
        assert_eq!(parse("exp 2").unwrap_err().offset, 4);
        assert_eq!(parse("(1))").unwrap_err().offset, 3);
        assert_eq!(parse("").unwrap_err().offset, 0);
        assert_eq!(parse("3 $ 4").unwrap_err().offset, 2);
    }
}
