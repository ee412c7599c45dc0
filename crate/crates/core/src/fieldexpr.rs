//! Closed-form field expressions.
//!
//! Grammar, lowest precedence first:
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := primary ('^' unary)?
//! primary := number | 'pi' | 'e' | 'x0'..'x3' | func '(' expr ')' | '(' expr ')'
//! func    := sin | cos | exp | log | abs | tanh
//! ```
//!
//! `^` binds tighter than unary minus and is right-associative, so `-x0^2`
//! is `-(x0^2)` and `2^3^2` is `2^(3^2)`.

use std::f64::consts::{E, PI};
use std::fmt;

use crate::error::{KwError, Result};
use crate::grid::{GridSpec, ScalarField};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Pow => "^",
        }
    }

    fn precedence(self) -> u8 {
        match self {
            BinOp::Add | BinOp::Sub => 1,
            BinOp::Mul | BinOp::Div => 2,
            BinOp::Pow => 4,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Log,
    Abs,
    Tanh,
}

impl Func {
    pub const ALL: [Func; 6] = [
        Func::Sin,
        Func::Cos,
        Func::Exp,
        Func::Log,
        Func::Abs,
        Func::Tanh,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Abs => "abs",
            Func::Tanh => "tanh",
        }
    }

    fn from_name(name: &str) -> Option<Func> {
        Func::ALL.iter().copied().find(|f| f.name() == name)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Constant {
    Pi,
    E,
}

impl Constant {
    fn value(self) -> f64 {
        match self {
            Constant::Pi => PI,
            Constant::E => E,
        }
    }
}

/// Expression tree. `offset` fields are byte offsets into the parsed source,
/// used for error reporting only.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(f64),
    Const(Constant),
    Var {
        index: usize,
        offset: usize,
    },
    Neg(Box<Expr>),
    Binary {
        op: BinOp,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
        offset: usize,
    },
    Call {
        func: Func,
        arg: Box<Expr>,
        offset: usize,
    },
}

impl Expr {
    pub fn var(index: usize) -> Expr {
        Expr::Var { index, offset: 0 }
    }

    pub fn binary(op: BinOp, lhs: Expr, rhs: Expr) -> Expr {
        Expr::Binary {
            op,
            lhs: Box::new(lhs),
            rhs: Box::new(rhs),
            offset: 0,
        }
    }

    pub fn call(func: Func, arg: Expr) -> Expr {
        Expr::Call {
            func,
            arg: Box::new(arg),
            offset: 0,
        }
    }

    /// Largest variable index used, if any.
    pub fn max_var(&self) -> Option<(usize, usize)> {
        match self {
            Expr::Num(_) | Expr::Const(_) => None,
            Expr::Var { index, offset } => Some((*index, *offset)),
            Expr::Neg(e) | Expr::Call { arg: e, .. } => e.max_var(),
            Expr::Binary { lhs, rhs, .. } => match (lhs.max_var(), rhs.max_var()) {
                (Some(a), Some(b)) => Some(if b.0 > a.0 { b } else { a }),
                (a, b) => a.or(b),
            },
        }
    }

    /// Evaluates at one point. Errors instead of producing NaN or infinity.
    pub fn eval_at(&self, x: &[f64]) -> Result<f64> {
        let v = match self {
            Expr::Num(v) => *v,
            Expr::Const(c) => c.value(),
            Expr::Var { index, offset } => *x.get(*index).ok_or_else(|| KwError::Eval {
                offset: *offset,
                message: format!("variable x{index} exceeds grid rank {}", x.len()),
            })?,
            Expr::Neg(e) => -e.eval_at(x)?,
            Expr::Binary {
                op,
                lhs,
                rhs,
                offset,
            } => {
                let a = lhs.eval_at(x)?;
                let b = rhs.eval_at(x)?;
                let v = match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => a / b,
                    BinOp::Pow => {
                        if a < 0.0 && b.fract() != 0.0 {
                            return Err(KwError::Eval {
                                offset: *offset,
                                message: format!("negative base {a} with non-integer exponent {b}"),
                            });
                        }
                        a.powf(b)
                    }
                };
                if !v.is_finite() {
                    return Err(KwError::Eval {
                        offset: *offset,
                        message: format!("'{}' produced a non-finite value", op.symbol()),
                    });
                }
                v
            }
            Expr::Call { func, arg, offset } => {
                let a = arg.eval_at(x)?;
                let v = match func {
                    Func::Sin => a.sin(),
                    Func::Cos => a.cos(),
                    Func::Exp => a.exp(),
                    Func::Abs => a.abs(),
                    Func::Tanh => a.tanh(),
                    Func::Log => {
                        if a <= 0.0 {
                            return Err(KwError::Eval {
                                offset: *offset,
                                message: format!("log of non-positive value {a}"),
                            });
                        }
                        a.ln()
                    }
                };
                if !v.is_finite() {
                    return Err(KwError::Eval {
                        offset: *offset,
                        message: format!("{} produced a non-finite value", func.name()),
                    });
                }
                v
            }
        };
        Ok(v)
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Binary { op, .. } => op.precedence(),
            Expr::Neg(_) => 3,
            Expr::Num(v) if *v < 0.0 || (*v == 0.0 && v.is_sign_negative()) => 0,
            _ => 5,
        }
    }

    fn write_child(&self, f: &mut fmt::Formatter<'_>, min_prec: u8) -> fmt::Result {
        if self.precedence() < min_prec {
            write!(f, "({self})")
        } else {
            write!(f, "{self}")
        }
    }
}

/// Canonical printer with minimal parentheses; output re-parses to an
/// equivalent tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v}"),
            Expr::Const(Constant::Pi) => write!(f, "pi"),
            Expr::Const(Constant::E) => write!(f, "e"),
            Expr::Var { index, .. } => write!(f, "x{index}"),
            Expr::Neg(e) => {
                write!(f, "-")?;
                e.write_child(f, 3)
            }
            Expr::Binary { op, lhs, rhs, .. } => {
                let p = op.precedence();
                if *op == BinOp::Pow {
                    lhs.write_child(f, 5)?;
                    write!(f, "^")?;
                    rhs.write_child(f, 3)
                } else {
                    lhs.write_child(f, p)?;
                    write!(f, " {} ", op.symbol())?;
                    rhs.write_child(f, p + 1)
                }
            }
            Expr::Call { func, arg, .. } => write!(f, "{}({arg})", func.name()),
        }
    }
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while let Some(c) = self.src[self.pos..].chars().next() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.src[self.pos..].chars().next()
    }

    fn syntax(&self, offset: usize, message: impl Into<String>) -> KwError {
        KwError::Syntax {
            offset,
            message: message.into(),
        }
    }

    fn expect(&mut self, want: char) -> Result<()> {
        match self.peek() {
            Some(c) if c == want => {
                self.pos += 1;
                Ok(())
            }
            Some(c) => Err(self.syntax(self.pos, format!("expected '{want}', found '{c}'"))),
            None => Err(self.syntax(self.pos, format!("expected '{want}', found end of input"))),
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        while let Some(c @ ('+' | '-')) = self.peek() {
            let offset = self.pos;
            self.pos += 1;
            let rhs = self.term()?;
            let op = if c == '+' { BinOp::Add } else { BinOp::Sub };
            lhs = Expr::Binary {
                op,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
                offset,
            };
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        while let Some(c @ ('*' | '/')) = self.peek() {
            let offset = self.pos;
            self.pos += 1;
            let rhs = self.unary()?;
            let op = if c == '*' { BinOp::Mul } else { BinOp::Div };
            lhs = Expr::Binary {
                op,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
                offset,
            };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.peek() == Some('-') {
            self.pos += 1;
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.primary()?;
        if self.peek() == Some('^') {
            let offset = self.pos;
            self.pos += 1;
            let exponent = self.unary()?;
            return Ok(Expr::Binary {
                op: BinOp::Pow,
                lhs: Box::new(base),
                rhs: Box::new(exponent),
                offset,
            });
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr> {
        let start = match self.peek() {
            None => return Err(self.syntax(self.pos, "unexpected end of input")),
            Some(_) => self.pos,
        };
        let c = self.src[start..].chars().next().unwrap();
        if c == '(' {
            self.pos += 1;
            let e = self.expr()?;
            self.expect(')')?;
            return Ok(e);
        }
        if c.is_ascii_digit() || c == '.' {
            return self.number(start);
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let len = self.src[start..]
                .find(|ch: char| !(ch.is_ascii_alphanumeric() || ch == '_'))
                .unwrap_or(self.src.len() - start);
            let name = &self.src[start..start + len];
            self.pos = start + len;
            return self.identifier(name, start);
        }
        Err(self.syntax(start, format!("unexpected character '{c}'")))
    }

    fn number(&mut self, start: usize) -> Result<Expr> {
        let bytes = self.src.as_bytes();
        let mut i = start;
        while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
            i += 1;
        }
        if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
            let mut j = i + 1;
            if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                j += 1;
            }
            if j < bytes.len() && bytes[j].is_ascii_digit() {
                while j < bytes.len() && bytes[j].is_ascii_digit() {
                    j += 1;
                }
                i = j;
            }
        }
        let text = &self.src[start..i];
        let v: f64 = text
            .parse()
            .map_err(|_| self.syntax(start, format!("malformed number '{text}'")))?;
        self.pos = i;
        Ok(Expr::Num(v))
    }

    fn identifier(&mut self, name: &str, offset: usize) -> Result<Expr> {
        match name {
            "pi" => return Ok(Expr::Const(Constant::Pi)),
            "e" => return Ok(Expr::Const(Constant::E)),
            _ => {}
        }
        if let Some(digits) = name.strip_prefix('x') {
            if let Ok(index) = digits.parse::<usize>() {
                if index < crate::grid::MAX_RANK && digits.len() == 1 {
                    return Ok(Expr::Var { index, offset });
                }
            }
        }
        if let Some(func) = Func::from_name(name) {
            self.expect('(')?;
            let arg = self.expr()?;
            self.expect(')')?;
            return Ok(Expr::Call {
                func,
                arg: Box::new(arg),
                offset,
            });
        }
        Err(KwError::UnknownIdentifier {
            offset,
            name: name.to_string(),
        })
    }
}

pub fn parse(text: &str) -> Result<Expr> {
    let mut p = Parser { src: text, pos: 0 };
    let e = p.expr()?;
    if let Some(c) = p.peek() {
        return Err(p.syntax(p.pos, format!("unexpected trailing '{c}'")));
    }
    Ok(e)
}

/// Samples `expr` on every grid point.
pub fn evaluate(expr: &Expr, spec: &GridSpec) -> Result<ScalarField> {
    if let Some((index, offset)) = expr.max_var() {
        if index >= spec.rank() {
            return Err(KwError::Eval {
                offset,
                message: format!("variable x{index} exceeds grid rank {}", spec.rank()),
            });
        }
    }
    let mut values = Vec::with_capacity(spec.len());
    for i in 0..spec.len() {
        values.push(expr.eval_at(&spec.point(i))?);
    }
    ScalarField::from_values(spec, values)
}

/// Parses and evaluates in one step.
pub fn field_from_expr(text: &str, spec: &GridSpec) -> Result<ScalarField> {
    evaluate(&parse(text)?, spec)
}
