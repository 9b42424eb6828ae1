use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;

use super::{Elementary, Exponent, Expr, ExprError, FuncName, FuncSym};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(BigRational),
    Ident { name: String, primes: u32 },
    Op(char),
    LParen,
    RParen,
    End,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

fn syntax(pos: usize, message: impl Into<String>) -> ExprError {
    ExprError::Syntax { pos, message: message.into() }
}

impl<'a> Lexer<'a> {
    fn tokens(text: &'a str) -> Result<Vec<(Tok, usize)>, ExprError> {
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

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn next(&mut self) -> Result<(Tok, usize), ExprError> {
        while matches!(self.peek(), Some(c) if c.is_ascii_whitespace()) {
            self.pos += 1;
        }
        let start = self.pos;
        let Some(c) = self.peek() else {
            return Ok((Tok::End, start));
        };
        let tok = match c {
            b'0'..=b'9' | b'.' => self.number()?,
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == b'_') {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap().to_string();
                let mut primes = 0;
                while self.peek() == Some(b'\'') {
                    primes += 1;
                    self.pos += 1;
                }
                Tok::Ident { name, primes }
            }
            b'+' | b'-' | b'*' | b'/' | b'^' => {
                self.pos += 1;
                Tok::Op(c as char)
            }
            b'(' => {
                self.pos += 1;
                Tok::LParen
            }
            b')' => {
                self.pos += 1;
                Tok::RParen
            }
            other => return Err(syntax(start, format!("unexpected character `{}`", other as char))),
        };
        Ok((tok, start))
    }

    /// Decimal literal, converted exactly: `0.25` is `1/4`, `1e-3` is `1/1000`.
    fn number(&mut self) -> Result<Tok, ExprError> {
        let start = self.pos;
        let mut digits = String::new();
        let mut frac_len: i64 = 0;
        let mut seen_dot = false;
        while let Some(c) = self.peek() {
            match c {
                b'0'..=b'9' => {
                    digits.push(c as char);
                    if seen_dot {
                        frac_len += 1;
                    }
                }
                b'.' if !seen_dot => seen_dot = true,
                _ => break,
            }
            self.pos += 1;
        }
        if digits.is_empty() {
            return Err(syntax(start, "malformed number"));
        }
        let mut exp10: i64 = 0;
        if matches!(self.peek(), Some(b'e' | b'E')) {
            let save = self.pos;
            self.pos += 1;
            let mut sign = 1;
            match self.peek() {
                Some(b'+') => self.pos += 1,
                Some(b'-') => {
                    sign = -1;
                    self.pos += 1;
                }
                _ => {}
            }
            let ds = self.pos;
            while matches!(self.peek(), Some(b'0'..=b'9')) {
                self.pos += 1;
            }
            if ds == self.pos {
                // `2e` followed by an identifier character is not an exponent
                self.pos = save;
            } else {
                let text = std::str::from_utf8(&self.src[ds..self.pos]).unwrap();
                exp10 = sign * text.parse::<i64>().map_err(|_| syntax(ds, "exponent too large"))?;
            }
        }
        let mantissa: BigInt = digits.parse().map_err(|_| syntax(start, "malformed number"))?;
        let shift = exp10 - frac_len;
        let ten = BigInt::from(10);
        let scale = num_traits::pow(ten, shift.unsigned_abs() as usize);
        let value = if shift >= 0 {
            BigRational::from_integer(mantissa * scale)
        } else {
            BigRational::new(mantissa, scale)
        };
        Ok(Tok::Num(value))
    }
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> usize {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if t != Tok::End {
            self.at += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), ExprError> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            Err(syntax(self.pos(), format!("expected {what}")))
        }
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut terms = vec![self.term()?];
        loop {
            match self.peek() {
                Tok::Op('+') => {
                    self.bump();
                    terms.push(self.term()?);
                }
                Tok::Op('-') => {
                    self.bump();
                    terms.push(negate(self.term()?));
                }
                _ => break,
            }
        }
        Ok(collapse(terms, Expr::Sum))
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut factors = vec![self.unary()?];
        loop {
            match self.peek() {
                Tok::Op('*') => {
                    self.bump();
                    factors.push(self.unary()?);
                }
                Tok::Op('/') => {
                    self.bump();
                    let d = self.unary()?;
                    factors.push(Expr::Pow(Box::new(d), Exponent::integer(-1)));
                }
                _ => break,
            }
        }
        Ok(collapse(factors, Expr::Product))
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        match self.peek() {
            Tok::Op('-') => {
                self.bump();
                Ok(negate(self.unary()?))
            }
            Tok::Op('+') => {
                self.bump();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr, ExprError> {
        let base = self.atom()?;
        if *self.peek() != Tok::Op('^') {
            return Ok(base);
        }
        self.bump();
        let at = self.pos();
        // right operand binds through unary minus: 2^-1, a^b^c = a^(b^c)
        let rhs = self.unary()?;
        let exp = Exponent::from_expr(&rhs).ok_or_else(|| {
            syntax(at, "exponent must be a rational number or affine in parameters")
        })?;
        Ok(Expr::Pow(Box::new(base), exp))
    }

    fn atom(&mut self) -> Result<Expr, ExprError> {
        let at = self.pos();
        match self.bump() {
            Tok::Num(v) => Ok(Expr::Const(v)),
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::Ident { name, primes } => self.identifier(name, primes, at),
            Tok::End => Err(syntax(at, "unexpected end of input")),
            Tok::RParen => Err(syntax(at, "unexpected `)`")),
            Tok::Op(c) => Err(syntax(at, format!("unexpected operator `{c}`"))),
        }
    }

    fn identifier(&mut self, name: String, primes: u32, at: usize) -> Result<Expr, ExprError> {
        if let Some(f) = FuncName::from_name(&name) {
            if *self.peek() == Tok::LParen {
                return Err(syntax(self.pos(), format!("function symbol `{name}` takes no argument list")));
            }
            return Ok(Expr::Func(FuncSym::new(f, primes)));
        }
        if primes > 0 {
            return Err(syntax(at, format!("`{name}` is not a function symbol and cannot carry primes")));
        }
        if let Some(call) = Elementary::from_name(&name) {
            self.expect(Tok::LParen, &format!("`(` after `{name}`"))?;
            let arg = self.expr()?;
            self.expect(Tok::RParen, "`)`")?;
            return Ok(Expr::Call(call, Box::new(arg)));
        }
        if *self.peek() == Tok::LParen {
            return Err(syntax(at, format!("unknown function `{name}`")));
        }
        if name == "x" {
            return Ok(Expr::X);
        }
        Ok(Expr::Param(name))
    }
}

fn negate(e: Expr) -> Expr {
    match e {
        Expr::Const(c) => Expr::Const(-c),
        other => Expr::Product(vec![Expr::Const(-BigRational::one()), other]),
    }
}

fn collapse(mut items: Vec<Expr>, wrap: fn(Vec<Expr>) -> Expr) -> Expr {
    if items.len() == 1 {
        items.pop().unwrap()
    } else {
        wrap(items)
    }
}

/// Parses the expression grammar: decimal literals, identifiers with `'`
/// derivative suffixes, `+ - * / ^`, parentheses, `sin`/`cos`/`exp`, `pi`.
///
/// `^` is right-associative and binds tighter than unary minus, which binds
/// tighter than `*` and `/`. Identifiers that are neither `x`, a function
/// symbol, nor an elementary function name become parameters.
pub fn parse_expr(text: &str) -> Result<Expr, ExprError> {
    let toks = Lexer::tokens(text)?;
    let mut p = Parser { toks, at: 0 };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(syntax(p.pos(), "unexpected trailing input"));
    }
    Ok(e)
}
