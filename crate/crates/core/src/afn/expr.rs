//! A small expression language over the complex variable `z`.
//!
//! ```text
//! expr    := term (("+" | "-") term)*
//! term    := unary (("*" | "/") unary)*
//! unary   := ("-" | "+") unary | power
//! power   := atom ("^" exponent)?
//! exponent:= ["-" | "+"] INTEGER | "(" ["-" | "+"] INTEGER ")"
//! atom    := NUMBER | NUMBER "i" | "i" | "pi" | "z"
//!          | FUNC "(" expr ")" | "(" expr ")"
//! FUNC    := "exp" | "log" | "sin" | "cos" | "sqrt"
//! ```
//!
//! `log` and `sqrt` use the principal branch.

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Exp,
    Log,
    Sin,
    Cos,
    Sqrt,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sqrt => "sqrt",
        }
    }

    fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }

    fn apply(self, w: Complex64) -> Complex64 {
        match self {
            Func::Exp => w.exp(),
            Func::Log => w.ln(),
            Func::Sin => w.sin(),
            Func::Cos => w.cos(),
            Func::Sqrt => w.sqrt(),
        }
    }
}

/// Parse tree of an expression in `z`.
#[derive(Debug, Clone, PartialEq)]
pub enum Expression {
    Const(Complex64),
    Z,
    Add(Box<Expression>, Box<Expression>),
    Sub(Box<Expression>, Box<Expression>),
    Mul(Box<Expression>, Box<Expression>),
    Div(Box<Expression>, Box<Expression>),
    Neg(Box<Expression>),
    Pow(Box<Expression>, i32),
    Call(Func, Box<Expression>),
}

use Expression as E;

fn c(v: Complex64) -> Expression {
    E::Const(v)
}

fn real(v: f64) -> Expression {
    E::Const(Complex64::new(v, 0.0))
}

impl Expression {
    pub fn parse(text: &str) -> Result<Expression> {
        parse_expression(text)
    }

    fn as_const(&self) -> Option<Complex64> {
        match self {
            E::Const(v) => Some(*v),
            _ => None,
        }
    }

    fn is_zero(&self) -> bool {
        self.as_const().is_some_and(|v| v == Complex64::new(0.0, 0.0))
    }

    fn is_one(&self) -> bool {
        self.as_const().is_some_and(|v| v == Complex64::new(1.0, 0.0))
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        match self {
            E::Const(v) => *v,
            E::Z => z,
            E::Add(a, b) => a.eval(z) + b.eval(z),
            E::Sub(a, b) => a.eval(z) - b.eval(z),
            E::Mul(a, b) => a.eval(z) * b.eval(z),
            E::Div(a, b) => a.eval(z) / b.eval(z),
            E::Neg(a) => -a.eval(z),
            E::Pow(a, n) => a.eval(z).powi(*n),
            E::Call(f, a) => f.apply(a.eval(z)),
        }
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        match self {
            E::Const(_) | E::Z => 1,
            E::Add(a, b) | E::Sub(a, b) | E::Mul(a, b) | E::Div(a, b) => 1 + a.size() + b.size(),
            E::Neg(a) | E::Pow(a, _) | E::Call(_, a) => 1 + a.size(),
        }
    }
}

fn add(a: Expression, b: Expression) -> Expression {
    match (a.as_const(), b.as_const()) {
        (Some(x), Some(y)) => c(x + y),
        _ if a.is_zero() => b,
        _ if b.is_zero() => a,
        _ => E::Add(Box::new(a), Box::new(b)),
    }
}

fn sub(a: Expression, b: Expression) -> Expression {
    match (a.as_const(), b.as_const()) {
        (Some(x), Some(y)) => c(x - y),
        _ if b.is_zero() => a,
        _ if a.is_zero() => neg(b),
        _ => E::Sub(Box::new(a), Box::new(b)),
    }
}

fn mul(a: Expression, b: Expression) -> Expression {
    match (a.as_const(), b.as_const()) {
        (Some(x), Some(y)) => c(x * y),
        _ if a.is_zero() || b.is_zero() => real(0.0),
        _ if a.is_one() => b,
        _ if b.is_one() => a,
        _ => E::Mul(Box::new(a), Box::new(b)),
    }
}

fn div(a: Expression, b: Expression) -> Expression {
    match (a.as_const(), b.as_const()) {
        (Some(x), Some(y)) => c(x / y),
        _ if a.is_zero() => real(0.0),
        _ if b.is_one() => a,
        _ => E::Div(Box::new(a), Box::new(b)),
    }
}

fn neg(a: Expression) -> Expression {
    match a {
        E::Const(v) => c(-v),
        E::Neg(inner) => *inner,
        other => E::Neg(Box::new(other)),
    }
}

fn pow(a: Expression, n: i32) -> Expression {
    match (n, a.as_const()) {
        (0, _) => real(1.0),
        (1, _) => a,
        (_, Some(v)) => c(v.powi(n)),
        _ => E::Pow(Box::new(a), n),
    }
}

fn call(f: Func, a: Expression) -> Expression {
    E::Call(f, Box::new(a))
}

/// Exact symbolic derivative with respect to `z`.
pub fn differentiate(e: &Expression) -> Expression {
    match e {
        E::Const(_) => real(0.0),
        E::Z => real(1.0),
        E::Add(a, b) => add(differentiate(a), differentiate(b)),
        E::Sub(a, b) => sub(differentiate(a), differentiate(b)),
        E::Mul(a, b) => add(
            mul(differentiate(a), (**b).clone()),
            mul((**a).clone(), differentiate(b)),
        ),
        E::Div(a, b) => {
            // (a/b)' = a'/b - a b'/b^2
            let first = div(differentiate(a), (**b).clone());
            let second = div(mul((**a).clone(), differentiate(b)), pow((**b).clone(), 2));
            sub(first, second)
        }
        E::Neg(a) => neg(differentiate(a)),
        E::Pow(a, n) => mul(
            mul(real(*n as f64), pow((**a).clone(), n - 1)),
            differentiate(a),
        ),
        E::Call(f, a) => {
            let inner = (**a).clone();
            let outer = match f {
                Func::Exp => call(Func::Exp, inner),
                Func::Log => div(real(1.0), inner),
                Func::Sin => call(Func::Cos, inner),
                Func::Cos => neg(call(Func::Sin, inner)),
                Func::Sqrt => div(real(0.5), call(Func::Sqrt, inner)),
            };
            mul(outer, differentiate(a))
        }
    }
}

fn fmt_const(v: Complex64, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if v.im == 0.0 {
        if v.re < 0.0 {
            write!(f, "(-{})", -v.re)
        } else {
            write!(f, "{}", v.re)
        }
    } else if v.re == 0.0 {
        if v.im < 0.0 {
            write!(f, "(-{}i)", -v.im)
        } else {
            write!(f, "{}i", v.im)
        }
    } else {
        let sign = if v.im < 0.0 { '-' } else { '+' };
        let re = if v.re < 0.0 { format!("-{}", -v.re) } else { format!("{}", v.re) };
        write!(f, "({re}{sign}{}i)", v.im.abs())
    }
}

impl fmt::Display for Expression {
    /// Re-parseable, fully parenthesized rendering.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            E::Const(v) => fmt_const(*v, f),
            E::Z => write!(f, "z"),
            E::Add(a, b) => write!(f, "({a}+{b})"),
            E::Sub(a, b) => write!(f, "({a}-{b})"),
            E::Mul(a, b) => write!(f, "({a}*{b})"),
            E::Div(a, b) => write!(f, "({a}/{b})"),
            E::Neg(a) => write!(f, "(-{a})"),
            E::Pow(a, n) => write!(f, "({a}^({n}))"),
            E::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num { value: f64, integral: bool },
    Imag(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    End,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn tokens(text: &'a str) -> Result<Vec<(Tok, usize)>> {
        let mut lx = Lexer { src: text.as_bytes(), pos: 0 };
        let mut out = Vec::new();
        loop {
            let (tok, at) = lx.next()?;
            let end = tok == Tok::End;
            out.push((tok, at));
            if end {
                return Ok(out);
            }
        }
    }

    fn next(&mut self) -> Result<(Tok, usize)> {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        let start = self.pos;
        let Some(&ch) = self.src.get(self.pos) else {
            return Ok((Tok::End, start));
        };
        if ch.is_ascii_digit() || ch == b'.' {
            return self.number(start);
        }
        if ch.is_ascii_alphabetic() || ch == b'_' {
            while self.pos < self.src.len()
                && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
            {
                self.pos += 1;
            }
            let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap().to_string();
            return Ok((Tok::Ident(name), start));
        }
        self.pos += 1;
        let tok = match ch {
            b'+' | b'-' | b'*' | b'/' | b'^' => Tok::Op(ch as char),
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            _ => {
                return Err(Error::Syntax {
                    offset: start,
                    message: format!("unexpected character `{}`", ch as char),
                })
            }
        };
        Ok((tok, start))
    }

    fn number(&mut self, start: usize) -> Result<(Tok, usize)> {
        let mut integral = true;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.src.get(self.pos) == Some(&b'.') {
            integral = false;
            self.pos += 1;
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
        }
        if matches!(self.src.get(self.pos), Some(b'e') | Some(b'E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.src.get(self.pos), Some(b'+') | Some(b'-')) {
                self.pos += 1;
            }
            if self.src.get(self.pos).is_some_and(|b| b.is_ascii_digit()) {
                integral = false;
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
            } else {
                self.pos = save;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        let value: f64 = text.parse().map_err(|_| Error::Syntax {
            offset: start,
            message: format!("malformed number `{text}`"),
        })?;
        // imaginary literal: digits immediately followed by a lone `i`
        if self.src.get(self.pos) == Some(&b'i')
            && !self
                .src
                .get(self.pos + 1)
                .is_some_and(|b| b.is_ascii_alphanumeric() || *b == b'_')
        {
            self.pos += 1;
            return Ok((Tok::Imag(value), start));
        }
        Ok((Tok::Num { value, integral }, start))
    }
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn syntax<T>(&self, message: &str) -> Result<T> {
        let found = match self.peek() {
            Tok::End => "end of input".to_string(),
            t => format!("{t:?}"),
        };
        Err(Error::Syntax {
            offset: self.offset(),
            message: format!("{message}, found {found}"),
        })
    }

    fn expr(&mut self) -> Result<Expression> {
        let mut lhs = self.term()?;
        while let Tok::Op(op @ ('+' | '-')) = *self.peek() {
            self.bump();
            let rhs = self.term()?;
            lhs = if op == '+' {
                E::Add(Box::new(lhs), Box::new(rhs))
            } else {
                E::Sub(Box::new(lhs), Box::new(rhs))
            };
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expression> {
        let mut lhs = self.unary()?;
        while let Tok::Op(op @ ('*' | '/')) = *self.peek() {
            self.bump();
            let rhs = self.unary()?;
            lhs = if op == '*' {
                E::Mul(Box::new(lhs), Box::new(rhs))
            } else {
                E::Div(Box::new(lhs), Box::new(rhs))
            };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expression> {
        match *self.peek() {
            Tok::Op('-') => {
                self.bump();
                Ok(E::Neg(Box::new(self.unary()?)))
            }
            Tok::Op('+') => {
                self.bump();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expression> {
        let base = self.atom()?;
        if *self.peek() == Tok::Op('^') {
            self.bump();
            let n = self.exponent()?;
            return Ok(E::Pow(Box::new(base), n));
        }
        Ok(base)
    }

    fn exponent(&mut self) -> Result<i32> {
        let paren = *self.peek() == Tok::LParen;
        if paren {
            self.bump();
        }
        let mut sign = 1;
        match *self.peek() {
            Tok::Op('-') => {
                sign = -1;
                self.bump();
            }
            Tok::Op('+') => {
                self.bump();
            }
            _ => {}
        }
        let at = self.offset();
        let n = match self.bump().0 {
            Tok::Num { value, integral } => {
                if !integral && value.fract() != 0.0 || value.abs() > i32::MAX as f64 {
                    return Err(Error::NonIntegerExponent { offset: at });
                }
                sign * value as i32
            }
            Tok::End => {
                return Err(Error::Syntax {
                    offset: at,
                    message: "expected integer exponent, found end of input".into(),
                })
            }
            _ => return Err(Error::NonIntegerExponent { offset: at }),
        };
        if paren {
            if *self.peek() != Tok::RParen {
                return self.syntax("expected `)` after exponent");
            }
            self.bump();
        }
        Ok(n)
    }

    fn atom(&mut self) -> Result<Expression> {
        let (tok, at) = self.bump();
        match tok {
            Tok::Num { value, .. } => Ok(real(value)),
            Tok::Imag(v) => Ok(c(Complex64::new(0.0, v))),
            Tok::LParen => {
                let inner = self.expr()?;
                if *self.peek() != Tok::RParen {
                    return self.syntax("expected `)`");
                }
                self.bump();
                Ok(inner)
            }
            Tok::Ident(name) => match name.as_str() {
                "z" => Ok(E::Z),
                "i" => Ok(c(Complex64::new(0.0, 1.0))),
                "pi" => Ok(real(std::f64::consts::PI)),
                other => match Func::from_name(other) {
                    Some(func) => {
                        if *self.peek() != Tok::LParen {
                            return self.syntax(&format!("expected `(` after `{other}`"));
                        }
                        self.bump();
                        let arg = self.expr()?;
                        if *self.peek() != Tok::RParen {
                            return self.syntax("expected `)`");
                        }
                        self.bump();
                        Ok(E::Call(func, Box::new(arg)))
                    }
                    None => Err(Error::UnknownIdentifier {
                        name: other.to_string(),
                        offset: at,
                    }),
                },
            },
            Tok::End => Err(Error::Syntax {
                offset: at,
                message: "unexpected end of input".into(),
            }),
            other => Err(Error::Syntax {
                offset: at,
                message: format!("unexpected token {other:?}"),
            }),
        }
    }
}

/// Parses `text` into an expression tree.
pub fn parse_expression(text: &str) -> Result<Expression> {
    let toks = Lexer::tokens(text)?;
    let mut p = Parser { toks, pos: 0 };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return p.syntax("expected operator or end of input");
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(text: &str, z: Complex64) -> Complex64 {
        parse_expression(text).unwrap().eval(z)
    }

    fn z(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn parses_reference_coefficients() {
        assert!(parse_expression("sin(2*z)").is_ok());
        let e = parse_expression("1/(1-z)^2").unwrap();
        assert!((e.eval(z(0.5, 0.0)) - 4.0).norm() < 1e-14);
        assert!((ev("-(6+4*z^2)", z(0.5, 0.0)) + 7.0).norm() < 1e-14);
    }

    #[test]
    fn syntax_error_offsets() {
        match parse_expression("z+") {
            Err(Error::Syntax { offset, .. }) => assert_eq!(offset, 2),
            other => panic!("{other:?}"),
        }
        match parse_expression("2*(z") {
            Err(Error::Syntax { offset, .. }) => assert_eq!(offset, 4),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_expression("2z"), Err(Error::Syntax { offset: 1, .. })));
        assert!(matches!(parse_expression("z $ 1"), Err(Error::Syntax { offset: 2, .. })));
    }

    #[test]
    fn rejects_unknown_identifiers_and_fractional_powers() {
        assert!(matches!(
            parse_expression("tan(z)"),
            Err(Error::UnknownIdentifier { offset: 0, .. })
        ));
        assert!(matches!(
            parse_expression("z^0.5"),
            Err(Error::NonIntegerExponent { offset: 2 })
        ));
        assert!(matches!(
            parse_expression("z^z"),
            Err(Error::NonIntegerExponent { .. })
        ));
        assert!(parse_expression("z^2.0").is_ok());
    }

    #[test]
    fn complex_literals_and_constants() {
        assert!((ev("1+2i", z(0.0, 0.0)) - z(1.0, 2.0)).norm() < 1e-15);
        assert!((ev("i*i", z(0.0, 0.0)) + 1.0).norm() < 1e-15);
        assert!((ev("pi/4", z(0.0, 0.0)) - std::f64::consts::FRAC_PI_4).norm() < 1e-15);
        assert!((ev("1.5e-1*z", z(2.0, 0.0)) - 0.3).norm() < 1e-15);
    }

    #[test]
    fn precedence() {
        assert!((ev("-z^2", z(3.0, 0.0)) + 9.0).norm() < 1e-12);
        assert!((ev("2*3+4", z(0.0, 0.0)) - 10.0).norm() < 1e-12);
        assert!((ev("2/4*8", z(0.0, 0.0)) - 4.0).norm() < 1e-12);
        assert!((ev("(1-z)^-2", z(0.5, 0.0)) - 4.0).norm() < 1e-12);
        assert!((ev("z^(-1)", z(0.5, 0.0)) - 2.0).norm() < 1e-12);
    }

    #[test]
    fn derivative_examples() {
        let d = differentiate(&parse_expression("3+2i").unwrap());
        assert_eq!(d, real(0.0));
        let d = differentiate(&parse_expression("log(1-z)").unwrap());
        assert!((d.eval(z(0.0, 0.0)) + 1.0).norm() < 1e-15);
        let e = parse_expression("1/(1-z)").unwrap();
        let d2 = differentiate(&differentiate(&e));
        assert!((d2.eval(z(0.0, 0.0)) - 2.0).norm() < 1e-14);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        for text in [
            "sin(2*z)",
            "exp(z^2)*cos(z)",
            "sqrt(1-z)",
            "log(1-z)/(2+z)",
            "(1-z)^-3 + z^5",
        ] {
            let e = parse_expression(text).unwrap();
            let d = differentiate(&e);
            for p in [z(0.3, 0.2), z(-0.5, 0.1), z(0.1, -0.7)] {
                let fd = crate::quad::five_point(|w| e.eval(w), p, 1e-4);
                let exact = d.eval(p);
                assert!((fd - exact).norm() < 1e-8 * (1.0 + exact.norm()), "{text} at {p}");
            }
        }
    }

    #[test]
    fn display_round_trips() {
        for text in ["1/(1-z)^2", "-(6+4*z^2)", "exp(-0.5*log(1-z))", "(0.5-2i)*z"] {
            let e = parse_expression(text).unwrap();
            let again = parse_expression(&e.to_string()).unwrap();
            let p = z(0.31, -0.27);
            assert!((e.eval(p) - again.eval(p)).norm() < 1e-14, "{text} -> {e}");
        }
    }
}
