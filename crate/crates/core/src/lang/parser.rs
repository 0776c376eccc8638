use num_bigint::BigInt;

use super::{Atom, ClassExpr, Coef, InsertionExpr, InvariantExpr, Sign, Span, Term};
use crate::error::{Error, Result};

pub(super) struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    pub(super) fn new(text: &'a str) -> Self {
        Self { src: text.as_bytes(), pos: 0 }
    }

    fn err<T>(&self, pos: usize, msg: impl Into<String>) -> Result<T> {
        Err(Error::Parse { pos, msg: msg.into() })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    /// Next non-whitespace byte, without consuming it.
    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn describe(&mut self) -> String {
        match self.peek() {
            None => "end of input".into(),
            Some(b) if b.is_ascii_graphic() => format!("'{}'", b as char),
            Some(b) => format!("byte 0x{b:02x}"),
        }
    }

    fn expect(&mut self, b: u8, what: &str) -> Result<()> {
        if self.peek() == Some(b) {
            self.pos += 1;
            Ok(())
        } else {
            let found = self.describe();
            self.err(self.pos, format!("expected {what}, found {found}"))
        }
    }

    pub(super) fn finish(&mut self) -> Result<()> {
        if self.peek().is_some() {
            let found = self.describe();
            return self.err(self.pos, format!("unexpected {found} after the end of the expression"));
        }
        Ok(())
    }

    /// Digits starting exactly at the current position.
    fn digits(&mut self, what: &str) -> Result<(usize, &'a str)> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            let found = self.describe();
            return self.err(start, format!("expected {what}, found {found}"));
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii digits");
        Ok((start, text))
    }

    fn small_int(&mut self, what: &str) -> Result<u32> {
        self.skip_ws();
        let (start, text) = self.digits(what)?;
        text.parse().or_else(|_| self.err(start, format!("{what} {text} is too large")))
    }

    fn big_int(&mut self, what: &str) -> Result<BigInt> {
        self.skip_ws();
        let (_, text) = self.digits(what)?;
        Ok(text.parse().expect("nonempty digit string"))
    }

    pub(super) fn invariant(&mut self) -> Result<InvariantExpr> {
        self.skip_ws();
        let start = self.pos;
        self.expect(b'(', "'('")?;
        let mut insertions = vec![self.insertion()?];
        while self.peek() == Some(b',') {
            self.pos += 1;
            insertions.push(self.insertion()?);
        }
        self.expect(b')', "',' or ')'")?;
        self.expect(b'@', "'@'")?;
        self.expect(b'd', "'d='")?;
        self.expect(b'=', "'='")?;
        let degree = self.small_int("degree")?;
        Ok(InvariantExpr { insertions, degree, span: Span::new(start, self.pos) })
    }

    pub(super) fn insertion(&mut self) -> Result<InsertionExpr> {
        self.skip_ws();
        let start = self.pos;
        let psi = if self.peek() == Some(b'L') {
            self.pos += 1;
            self.expect(b'^', "'^' after L")?;
            let k = self.small_int("cotangent exponent")?;
            self.expect(b'*', "'*' after the cotangent factor")?;
            Some(k)
        } else {
            None
        };
        let class = self.class()?;
        Ok(InsertionExpr { psi, class, span: Span::new(start, self.pos) })
    }

    pub(super) fn class(&mut self) -> Result<ClassExpr> {
        self.skip_ws();
        let start = self.pos;
        let mut terms = Vec::new();
        let first = if self.peek() == Some(b'-') {
            self.pos += 1;
            Sign::Minus
        } else {
            Sign::Plus
        };
        terms.push(self.term(first)?);
        loop {
            let sign = match self.peek() {
                Some(b'+') => Sign::Plus,
                Some(b'-') => Sign::Minus,
                _ => break,
            };
            self.pos += 1;
            terms.push(self.term(sign)?);
        }
        Ok(ClassExpr { terms, span: Span::new(start, self.pos) })
    }

    fn term(&mut self, sign: Sign) -> Result<Term> {
        self.skip_ws();
        let start = self.pos;
        let coef = if self.peek().is_some_and(|b| b.is_ascii_digit()) {
            let num = self.big_int("coefficient")?;
            match self.peek() {
                Some(b'/') => {
                    self.pos += 1;
                    self.skip_ws();
                    let den_pos = self.pos;
                    let den = self.big_int("denominator")?;
                    if den == BigInt::from(0) {
                        return self.err(den_pos, "zero denominator");
                    }
                    self.expect(b'*', "'*' after the coefficient")?;
                    Some(Coef { num, den: Some(den) })
                }
                Some(b'*') => {
                    self.pos += 1;
                    Some(Coef { num, den: None })
                }
                _ if num == BigInt::from(1) => {
                    let span = Span::new(start, self.pos);
                    return Ok(Term { sign, coef: None, atom: Atom::One, span, atom_span: span });
                }
                _ => {
                    let found = self.describe();
                    return self.err(self.pos, format!("expected '*' after the coefficient, found {found}"));
                }
            }
        } else {
            None
        };
        self.skip_ws();
        let atom_start = self.pos;
        let atom = self.atom()?;
        Ok(Term { sign, coef, atom, span: Span::new(start, self.pos), atom_span: Span::new(atom_start, self.pos) })
    }

    fn atom(&mut self) -> Result<Atom> {
        let at = {
            self.skip_ws();
            self.pos
        };
        match self.peek() {
            Some(b'e') => {
                self.pos += 1;
                let (start, text) = self.digits("basis index after 'e'")?;
                let a = text.parse().or_else(|_| self.err(start, format!("basis index {text} is too large")))?;
                Ok(Atom::E(a))
            }
            Some(b'H') => {
                self.pos += 1;
                if self.peek() == Some(b'^') {
                    self.pos += 1;
                    Ok(Atom::HPow(self.small_int("exponent of H")?))
                } else {
                    Ok(Atom::H)
                }
            }
            Some(b'1') => {
                self.pos += 1;
                // a longer number here would have been read as a coefficient
                Ok(Atom::One)
            }
            _ => {
                let found = self.describe();
                self.err(at, format!("expected a class (eN, H, H^k or 1), found {found}"))
            }
        }
    }
}
