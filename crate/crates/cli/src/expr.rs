//! Expression syntax for operators: integers, `p`, `t`, `D`, `+ - * / ^`,
//! parentheses and `prod(n=a..b, body)`.

use std::fmt;

use num_bigint::BigInt;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sym {
    P,
    T,
    D,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    Int(BigInt),
    Sym(Sym),
    Var(String),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Prod {
        var: String,
        lo: i64,
        hi: i64,
        body: Box<Expr>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SyntaxError {
    pub offset: usize,
    pub message: String,
}

impl fmt::Display for SyntaxError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "syntax error at byte {}: {}", self.offset, self.message)
    }
}

impl std::error::Error for SyntaxError {}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Int(BigInt),
    Ident(String),
    Op(char),
    Range,
    End,
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, SyntaxError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            out.push((Tok::Int(src[start..i].parse().unwrap()), start));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((Tok::Ident(src[start..i].to_string()), start));
        } else if src[i..].starts_with("..") {
            out.push((Tok::Range, i));
            i += 2;
        } else if "+-*/^(),=".contains(c) {
            out.push((Tok::Op(c), i));
            i += 1;
        } else {
            let ch = src[i..].chars().next().unwrap();
            return Err(SyntaxError {
                offset: i,
                message: format!("unexpected character {ch:?}"),
            });
        }
    }
    out.push((Tok::End, src.len()));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    bound: Vec<String>,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn fail<T>(&self, message: impl Into<String>) -> Result<T, SyntaxError> {
        Err(SyntaxError {
            offset: self.offset(),
            message: message.into(),
        })
    }

    fn expect(&mut self, c: char) -> Result<(), SyntaxError> {
        if *self.peek() == Tok::Op(c) {
            self.bump();
            Ok(())
        } else {
            self.fail(format!("expected '{c}'"))
        }
    }

    fn sum(&mut self) -> Result<Expr, SyntaxError> {
        let mut acc = self.neg()?;
        loop {
            match self.peek() {
                Tok::Op('+') => {
                    self.bump();
                    acc = Expr::Add(Box::new(acc), Box::new(self.neg()?));
                }
                Tok::Op('-') => {
                    self.bump();
                    acc = Expr::Sub(Box::new(acc), Box::new(self.neg()?));
                }
                _ => return Ok(acc),
            }
        }
    }

    fn neg(&mut self) -> Result<Expr, SyntaxError> {
        if *self.peek() == Tok::Op('-') {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.neg()?)));
        }
        self.product()
    }

    fn product(&mut self) -> Result<Expr, SyntaxError> {
        let mut acc = self.power()?;
        loop {
            match self.peek() {
                Tok::Op('*') => {
                    self.bump();
                    acc = Expr::Mul(Box::new(acc), Box::new(self.power()?));
                }
                Tok::Op('/') => {
                    self.bump();
                    let at = self.offset();
                    let den = self.power()?;
                    if den.mentions(Sym::D) {
                        return Err(SyntaxError {
                            offset: at,
                            message: "D cannot appear in a denominator".into(),
                        });
                    }
                    acc = Expr::Div(Box::new(acc), Box::new(den));
                }
                _ => return Ok(acc),
            }
        }
    }

    fn power(&mut self) -> Result<Expr, SyntaxError> {
        let base = self.atom()?;
        if *self.peek() != Tok::Op('^') {
            return Ok(base);
        }
        self.bump();
        let at = self.offset();
        let e = match self.bump() {
            Tok::Int(n) => Expr::Int(n),
            Tok::Ident(v) if self.bound.contains(&v) => Expr::Var(v),
            Tok::Op('(') => {
                let e = self.sum()?;
                self.expect(')')?;
                e
            }
            _ => {
                return Err(SyntaxError {
                    offset: at,
                    message: "expected an integer exponent".into(),
                })
            }
        };
        if e.mentions(Sym::P) || e.mentions(Sym::T) || e.mentions(Sym::D) || e.has_div() {
            return Err(SyntaxError {
                offset: at,
                message: "exponents must be integer expressions".into(),
            });
        }
        Ok(Expr::Pow(Box::new(base), Box::new(e)))
    }

    fn int_literal(&mut self) -> Result<i64, SyntaxError> {
        let negative = *self.peek() == Tok::Op('-');
        if negative {
            self.bump();
        }
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                let n: i64 = n.try_into().or_else(|_| self.fail("bound out of range"))?;
                Ok(if negative { -n } else { n })
            }
            _ => self.fail("expected an integer bound"),
        }
    }

    fn atom(&mut self) -> Result<Expr, SyntaxError> {
        let at = self.offset();
        match self.bump() {
            Tok::Int(n) => Ok(Expr::Int(n)),
            Tok::Op('(') => {
                let e = self.sum()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::Ident(name) => match name.as_str() {
                "p" => Ok(Expr::Sym(Sym::P)),
                "t" => Ok(Expr::Sym(Sym::T)),
                "D" => Ok(Expr::Sym(Sym::D)),
                "prod" => self.prod(),
                _ if self.bound.contains(&name) => Ok(Expr::Var(name)),
                _ => Err(SyntaxError {
                    offset: at,
                    message: format!("unknown symbol {name:?}"),
                }),
            },
            Tok::End => Err(SyntaxError {
                offset: at,
                message: "unexpected end of input".into(),
            }),
            t => Err(SyntaxError {
                offset: at,
                message: format!("unexpected {}", describe(&t)),
            }),
        }
    }

    fn prod(&mut self) -> Result<Expr, SyntaxError> {
        self.expect('(')?;
        let var = match self.peek().clone() {
            Tok::Ident(v) if !matches!(v.as_str(), "p" | "t" | "D" | "prod") => {
                self.bump();
                v
            }
            _ => return self.fail("expected an index variable"),
        };
        self.expect('=')?;
        let lo = self.int_literal()?;
        if *self.peek() != Tok::Range {
            return self.fail("expected '..'");
        }
        self.bump();
        let hi = self.int_literal()?;
        self.expect(',')?;
        self.bound.push(var.clone());
        let body = self.sum();
        self.bound.pop();
        let body = body?;
        self.expect(')')?;
        Ok(Expr::Prod {
            var,
            lo,
            hi,
            body: Box::new(body),
        })
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Int(n) => format!("number {n}"),
        Tok::Ident(s) => format!("symbol {s:?}"),
        Tok::Op(c) => format!("'{c}'"),
        Tok::Range => "'..'".into(),
        Tok::End => "end of input".into(),
    }
}

pub fn parse(src: &str) -> Result<Expr, SyntaxError> {
    let mut p = Parser {
        toks: lex(src)?,
        pos: 0,
        bound: Vec::new(),
    };
    let e = p.sum()?;
    match p.peek() {
        Tok::End => Ok(e),
        t => p.fail(format!("unexpected {}", describe(t))),
    }
}

impl Expr {
    pub fn int(n: i64) -> Expr {
        Expr::Int(n.into())
    }

    /// True when `s` occurs outside exponents.
    pub fn mentions(&self, s: Sym) -> bool {
        match self {
            Expr::Sym(x) => *x == s,
            Expr::Int(_) | Expr::Var(_) => false,
            Expr::Neg(a) => a.mentions(s),
            Expr::Pow(a, _) => a.mentions(s),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.mentions(s) || b.mentions(s)
            }
            Expr::Prod { body, .. } => body.mentions(s),
        }
    }

    fn has_div(&self) -> bool {
        match self {
            Expr::Div(..) => true,
            Expr::Int(_) | Expr::Var(_) | Expr::Sym(_) => false,
            Expr::Neg(a) => a.has_div(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Pow(a, b) => {
                a.has_div() || b.has_div()
            }
            Expr::Prod { body, .. } => body.has_div(),
        }
    }

    fn prec(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Neg(_) => 2,
            Expr::Mul(..) | Expr::Div(..) => 3,
            Expr::Pow(..) => 4,
            Expr::Int(n) if n.sign() == num_bigint::Sign::Minus => 2,
            _ => 5,
        }
    }

    fn write_at(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        if self.prec() < min {
            write!(f, "(")?;
            self.write_at(f, 0)?;
            return write!(f, ")");
        }
        match self {
            Expr::Int(n) => write!(f, "{n}"),
            Expr::Sym(Sym::P) => write!(f, "p"),
            Expr::Sym(Sym::T) => write!(f, "t"),
            Expr::Sym(Sym::D) => write!(f, "D"),
            Expr::Var(v) => write!(f, "{v}"),
            Expr::Neg(a) => {
                write!(f, "-")?;
                a.write_at(f, 2)
            }
            Expr::Add(a, b) | Expr::Sub(a, b) => {
                a.write_at(f, 1)?;
                write!(
                    f,
                    "{}",
                    if matches!(self, Expr::Add(..)) {
                        " + "
                    } else {
                        " - "
                    }
                )?;
                b.write_at(f, 2)
            }
            Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.write_at(f, 3)?;
                write!(
                    f,
                    "{}",
                    if matches!(self, Expr::Mul(..)) {
                        "*"
                    } else {
                        "/"
                    }
                )?;
                b.write_at(f, 4)
            }
            Expr::Pow(a, e) => {
                a.write_at(f, 5)?;
                write!(f, "^")?;
                match **e {
                    Expr::Int(_) | Expr::Var(_) => e.write_at(f, 5),
                    _ => {
                        write!(f, "(")?;
                        e.write_at(f, 0)?;
                        write!(f, ")")
                    }
                }
            }
            Expr::Prod { var, lo, hi, body } => {
                write!(f, "prod({var}={lo}..{hi}, ")?;
                body.write_at(f, 0)?;
                write!(f, ")")
            }
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_at(f, 0)
    }
}
