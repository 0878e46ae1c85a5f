//! Recursive-descent parser and pretty-printer for the expression grammar.
//!
//! Grammar, in decreasing binding strength: `^` (exponent an integer or a
//! parenthesized rational literal), unary `-`, `* /`, `+ -`.  Variables match
//! `[a-zA-Z][a-zA-Z0-9_]*`.  Constant quotients of literals such as `1/2` are
//! folded into rational constants, so printing and reparsing an AST is the
//! identity.

use std::fmt;

use num::{BigInt, BigRational, One, Signed, Zero};
use thiserror::Error;

use crate::poly::{PolyError, RationalFunction, VariableContext};

/// A parse failure with source position.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("syntax error at line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

/// Abstract syntax tree over the expression grammar.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Num(BigRational),
    Var(String),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, BigRational),
}

impl Expr {
    /// Binding strength used by the printer; `5` prints bare in any position.
    fn level(&self) -> u8 {
        match self {
            Expr::Num(n) => {
                if n.is_integer() && !n.is_negative() {
                    5
                } else {
                    1
                }
            }
            Expr::Var(_) => 5,
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Neg(_) => 3,
            Expr::Pow(..) => 4,
        }
    }

    fn fmt_at(&self, f: &mut fmt::Formatter<'_>, min_level: u8) -> fmt::Result {
        let needs_parens = self.level() < min_level;
        if needs_parens {
            write!(f, "(")?;
        }
        match self {
            Expr::Num(n) => write!(f, "{n}")?,
            Expr::Var(v) => write!(f, "{v}")?,
            Expr::Neg(a) => {
                write!(f, "-")?;
                a.fmt_at(f, 3)?;
            }
            Expr::Add(a, b) => {
                a.fmt_at(f, 1)?;
                write!(f, " + ")?;
                b.fmt_at(f, 2)?;
            }
            Expr::Sub(a, b) => {
                a.fmt_at(f, 1)?;
                write!(f, " - ")?;
                b.fmt_at(f, 2)?;
            }
            Expr::Mul(a, b) => {
                a.fmt_at(f, 2)?;
                write!(f, "*")?;
                b.fmt_at(f, 3)?;
            }
            Expr::Div(a, b) => {
                a.fmt_at(f, 2)?;
                write!(f, "/")?;
                b.fmt_at(f, 3)?;
            }
            Expr::Pow(base, e) => {
                base.fmt_at(f, 5)?;
                if e.is_integer() && !e.is_negative() {
                    write!(f, "^{e}")?;
                } else {
                    write!(f, "^({e})")?;
                }
            }
        }
        if needs_parens {
            write!(f, ")")?;
        }
        Ok(())
    }

    /// Evaluates the tree to a rational function over `ctx`.
    pub fn to_rational_function(
        &self,
        ctx: &VariableContext,
    ) -> Result<RationalFunction, PolyError> {
        match self {
            Expr::Num(n) => Ok(RationalFunction::constant(ctx, n.clone())),
            Expr::Var(v) => RationalFunction::variable(ctx, v),
            Expr::Neg(a) => Ok(a.to_rational_function(ctx)?.neg()),
            Expr::Add(a, b) => a
                .to_rational_function(ctx)?
                .add(&b.to_rational_function(ctx)?),
            Expr::Sub(a, b) => a
                .to_rational_function(ctx)?
                .sub(&b.to_rational_function(ctx)?),
            Expr::Mul(a, b) => a
                .to_rational_function(ctx)?
                .mul(&b.to_rational_function(ctx)?),
            Expr::Div(a, b) => a
                .to_rational_function(ctx)?
                .div(&b.to_rational_function(ctx)?),
            Expr::Pow(base, e) => {
                let base_rf = base.to_rational_function(ctx)?;
                if e.is_integer() {
                    let i: i64 =
                        e.to_integer()
                            .try_into()
                            .map_err(|_| PolyError::NonRationalRoot {
                                value: BigRational::zero(),
                                index: e.denom().clone(),
                            })?;
                    base_rf.pow_int(i)
                } else {
                    rf_rational_pow(&base_rf, e)
                }
            }
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_at(f, 0)
    }
}

/// Raises a rational function to a rational power via substitution machinery;
/// only defined for ratios of monomials.
fn rf_rational_pow(rf: &RationalFunction, e: &BigRational) -> Result<RationalFunction, PolyError> {
    use crate::poly::{rational_pow, Monomial, Polynomial};
    let describe = || PolyError::FractionalExponentOnNonMonomial {
        variable: rf.to_string(),
    };
    let (mn, cn) = rf.numerator().as_monomial().ok_or_else(describe)?;
    let (md, cd) = rf.denominator().as_monomial().ok_or_else(describe)?;
    let coeff = rational_pow(&(cn / cd), e)?;
    let m = mn.mul(&md.inv()).pow(e);
    let mut num_m = Monomial::one();
    let mut den_m = Monomial::one();
    for (v, q) in m.exponents() {
        if q.is_negative() {
            den_m = den_m.mul(&Monomial::from_exponents([(*v, -q)]));
        } else {
            num_m = num_m.mul(&Monomial::from_exponents([(*v, q.clone())]));
        }
    }
    let ctx = rf.context();
    RationalFunction::new(
        Polynomial::term(ctx, num_m, coeff),
        Polynomial::term(ctx, den_m, BigRational::one()),
    )
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(BigInt),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

#[derive(Debug, Clone)]
struct Spanned {
    token: Token,
    line: usize,
    column: usize,
}

fn lex(text: &str) -> Result<Vec<Spanned>, ParseError> {
    let mut out = Vec::new();
    let mut line = 1usize;
    let mut column = 1usize;
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        let (tline, tcol) = (line, column);
        let mut bump = |chars: &mut std::iter::Peekable<std::str::Chars>| {
            let c = chars.next().unwrap();
            if c == '\n' {
                line += 1;
                column = 1;
            } else {
                column += 1;
            }
            c
        };
        if c.is_whitespace() {
            bump(&mut chars);
            continue;
        }
        let token = match c {
            '+' => {
                bump(&mut chars);
                Token::Plus
            }
            '-' => {
                bump(&mut chars);
                Token::Minus
            }
            '*' => {
                bump(&mut chars);
                Token::Star
            }
            '/' => {
                bump(&mut chars);
                Token::Slash
            }
            '^' => {
                bump(&mut chars);
                Token::Caret
            }
            '(' => {
                bump(&mut chars);
                Token::LParen
            }
            ')' => {
                bump(&mut chars);
                Token::RParen
            }
            '0'..='9' => {
                let mut digits = String::new();
                while matches!(chars.peek(), Some(d) if d.is_ascii_digit()) {
                    digits.push(bump(&mut chars));
                }
                Token::Num(digits.parse().expect("ascii digits"))
            }
            'a'..='z' | 'A'..='Z' => {
                let mut name = String::new();
                while matches!(chars.peek(), Some(d) if d.is_ascii_alphanumeric() || *d == '_') {
                    name.push(bump(&mut chars));
                }
                Token::Ident(name)
            }
            other => {
                return Err(ParseError {
                    line: tline,
                    column: tcol,
                    message: format!("unexpected character {other:?}"),
                })
            }
        };
        out.push(Spanned {
            token,
            line: tline,
            column: tcol,
        });
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Spanned>,
    pos: usize,
    end_line: usize,
    end_column: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|s| &s.token)
    }

    fn here(&self) -> (usize, usize) {
        self.tokens
            .get(self.pos)
            .map(|s| (s.line, s.column))
            .unwrap_or((self.end_line, self.end_column))
    }

    fn error(&self, message: impl Into<String>) -> ParseError {
        let (line, column) = self.here();
        ParseError {
            line,
            column,
            message: message.into(),
        }
    }

    fn advance(&mut self) -> Option<Token> {
        let token = self.tokens.get(self.pos).map(|s| s.token.clone());
        if token.is_some() {
            self.pos += 1;
        }
        token
    }

    fn expect(&mut self, token: Token, what: &str) -> Result<(), ParseError> {
        if self.peek() == Some(&token) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(format!("expected {what}")))
        }
    }

    fn parse_expr(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.parse_term()?;
        loop {
            match self.peek() {
                Some(Token::Plus) => {
                    self.pos += 1;
                    let rhs = self.parse_term()?;
                    acc = Expr::Add(Box::new(acc), Box::new(rhs));
                }
                Some(Token::Minus) => {
                    self.pos += 1;
                    let rhs = self.parse_term()?;
                    acc = Expr::Sub(Box::new(acc), Box::new(rhs));
                }
                _ => return Ok(acc),
            }
        }
    }

    fn parse_term(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.parse_unary()?;
        loop {
            match self.peek() {
                Some(Token::Star) => {
                    self.pos += 1;
                    let rhs = self.parse_unary()?;
                    acc = Expr::Mul(Box::new(acc), Box::new(rhs));
                }
                Some(Token::Slash) => {
                    self.pos += 1;
                    let rhs = self.parse_unary()?;
                    acc = fold_div(acc, rhs);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn parse_unary(&mut self) -> Result<Expr, ParseError> {
        if self.peek() == Some(&Token::Minus) {
            self.pos += 1;
            let inner = self.parse_unary()?;
            return Ok(fold_neg(inner));
        }
        self.parse_power()
    }

    fn parse_power(&mut self) -> Result<Expr, ParseError> {
        let mut base = self.parse_atom()?;
        while self.peek() == Some(&Token::Caret) {
            self.pos += 1;
            let exponent = self.parse_exponent()?;
            base = Expr::Pow(Box::new(base), exponent);
        }
        Ok(base)
    }

    /// `^` accepts an optionally signed integer or a parenthesized rational.
    fn parse_exponent(&mut self) -> Result<BigRational, ParseError> {
        let mut sign = BigInt::one();
        if self.peek() == Some(&Token::Minus) {
            self.pos += 1;
            sign = -sign;
        }
        match self.advance() {
            Some(Token::Num(n)) => Ok(BigRational::from_integer(sign * n)),
            Some(Token::LParen) => {
                let mut inner_sign = sign;
                if self.peek() == Some(&Token::Minus) {
                    self.pos += 1;
                    inner_sign = -inner_sign;
                }
                let numer = match self.advance() {
                    Some(Token::Num(n)) => n,
                    _ => return Err(self.error("expected a rational literal exponent")),
                };
                let denom = if self.peek() == Some(&Token::Slash) {
                    self.pos += 1;
                    match self.advance() {
                        Some(Token::Num(n)) if !n.is_zero() => n,
                        Some(Token::Num(_)) => {
                            return Err(self.error("zero denominator in exponent"))
                        }
                        _ => return Err(self.error("expected denominator digits")),
                    }
                } else {
                    BigInt::one()
                };
                self.expect(Token::RParen, "`)` after exponent")?;
                Ok(BigRational::new(inner_sign * numer, denom))
            }
            _ => Err(self.error("expected an integer or parenthesized rational exponent")),
        }
    }

    fn parse_atom(&mut self) -> Result<Expr, ParseError> {
        match self.peek().cloned() {
            Some(Token::Num(n)) => {
                self.pos += 1;
                Ok(Expr::Num(BigRational::from_integer(n)))
            }
            Some(Token::Ident(name)) => {
                self.pos += 1;
                Ok(Expr::Var(name))
            }
            Some(Token::LParen) => {
                self.pos += 1;
                let inner = self.parse_expr()?;
                self.expect(Token::RParen, "`)`")?;
                Ok(inner)
            }
            _ => Err(self.error("expected a number, variable or `(`")),
        }
    }
}

fn fold_neg(e: Expr) -> Expr {
    match e {
        Expr::Num(n) => Expr::Num(-n),
        other => Expr::Neg(Box::new(other)),
    }
}

fn fold_div(a: Expr, b: Expr) -> Expr {
    if let (Expr::Num(x), Expr::Num(y)) = (&a, &b) {
        if !y.is_zero() {
            return Expr::Num(x / y);
        }
    }
    Expr::Div(Box::new(a), Box::new(b))
}

/// Parses `text` into an [`Expr`].
pub fn parse_expression(text: &str) -> Result<Expr, ParseError> {
    let tokens = lex(text)?;
    let end = (
        text.lines().count().max(1),
        text.lines().last().map(|l| l.chars().count() + 1).unwrap_or(1),
    );
    let mut parser = Parser {
        tokens,
        pos: 0,
        end_line: end.0,
        end_column: end.1,
    };
    let expr = parser.parse_expr()?;
    if parser.pos != parser.tokens.len() {
        return Err(parser.error("trailing input"));
    }
    Ok(expr)
}

/// Parses and evaluates in one step.
pub fn parse_to_rf(text: &str, ctx: &VariableContext) -> Result<RationalFunction, ExprError> {
    let expr = parse_expression(text)?;
    Ok(expr.to_rational_function(ctx)?)
}

/// A parse or evaluation failure.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExprError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Eval(#[from] PolyError),
}
