//! Parser and evaluator for real-valued coordinate expressions.
//!
//! This is how metric components are written down: plain text like
//! `4/(-L*(1-u^2-v^2)^2)` parsed once into an [`Expr`] and then evaluated
//! over [`Jet2`] arithmetic, so every evaluation yields the value together
//! with exact first and second derivatives.
//!
//! Grammar (v1), part of the public file-format contract:
//!
//! ```text
//! expr     := term (('+' | '-') term)*
//! term     := unary (('*' | '/') unary)*
//! unary    := '-' unary | power
//! power    := primary ('^' exponent)*
//! exponent := NUMBER | '-' NUMBER | '(' '-'? NUMBER ')'
//! primary  := NUMBER | IDENT | FUNC '(' expr ')' | '(' expr ')'
//! FUNC     := 'exp' | 'ln' | 'sin' | 'cos' | 'sqrt'
//! IDENT    := [a-zA-Z_][a-zA-Z0-9_]*
//! NUMBER   := digits ('.' digits)? (('e'|'E') ('+'|'-')? digits)?
//! ```
//!
//! Precedence is `^` > unary minus > `*` `/` > `+` `-`, binaries are
//! left-associative, whitespace is insignificant. `^` takes a constant
//! (possibly negated) exponent only; there is no implicit multiplication.
//! The reserved names `xp` and `xm` denote the null coordinates x+ and x-.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::error::JetError;
use crate::jets::Jet2;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Exp,
    Ln,
    Sin,
    Cos,
    Sqrt,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sqrt => "sqrt",
        }
    }

    fn from_name(s: &str) -> Option<Func> {
        match s {
            "exp" => Some(Func::Exp),
            "ln" => Some(Func::Ln),
            "sin" => Some(Func::Sin),
            "cos" => Some(Func::Cos),
            "sqrt" => Some(Func::Sqrt),
            _ => None,
        }
    }
}

#[derive(Clone, Debug)]
pub enum ExprKind {
    Num(f64),
    Var(String),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    /// Power with a constant exponent.
    Pow(Box<Expr>, f64),
    Call(Func, Box<Expr>),
}

/// Parsed abstract syntax tree of a real-valued expression. Immutable after
/// parsing; `pos` is the byte offset of the node in the source, carried for
/// error reporting.
#[derive(Clone, Debug)]
pub struct Expr {
    pub kind: ExprKind,
    pub pos: usize,
}

// Structural equality; source positions are irrelevant to identity.
impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        match (&self.kind, &other.kind) {
            (ExprKind::Num(a), ExprKind::Num(b)) => a == b,
            (ExprKind::Var(a), ExprKind::Var(b)) => a == b,
            (ExprKind::Neg(a), ExprKind::Neg(b)) => a == b,
            (ExprKind::Bin(o1, a1, b1), ExprKind::Bin(o2, a2, b2)) => {
                o1 == o2 && a1 == a2 && b1 == b2
            }
            (ExprKind::Pow(a, c), ExprKind::Pow(b, d)) => a == b && c == d,
            (ExprKind::Call(f, a), ExprKind::Call(g, b)) => f == g && a == b,
            _ => false,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
#[error("syntax error at offset {offset}: expected {expected}")]
pub struct ParseError {
    pub offset: usize,
    pub expected: String,
}

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("unbound variable '{name}' at offset {pos}")]
    Unbound { name: String, pos: usize },

    #[error("at offset {pos}: {source}")]
    Numeric {
        pos: usize,
        #[source]
        source: JetError,
    },
}

/// Ordered variable bindings plus named scalar parameters (bound as
/// constants of the same jet dimension).
pub struct Env {
    names: Vec<String>,
    values: Vec<Jet2>,
    params: Vec<(String, f64)>,
    dim: usize,
}

impl Env {
    pub fn new(names: &[String], values: Vec<Jet2>) -> Env {
        assert_eq!(names.len(), values.len());
        let dim = values.first().map_or(0, Jet2::dim);
        Env {
            names: names.to_vec(),
            values,
            params: Vec::new(),
            dim,
        }
    }

    pub fn with_params(mut self, params: &[(String, f64)]) -> Env {
        self.params = params.to_vec();
        self
    }

    fn lookup(&self, name: &str) -> Option<Jet2> {
        if let Some(i) = self.names.iter().position(|n| n == name) {
            return Some(self.values[i].clone());
        }
        self.params
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| Jet2::constant(self.dim, *v))
    }
}

impl Expr {
    pub fn num(v: f64) -> Expr {
        Expr {
            kind: ExprKind::Num(v),
            pos: 0,
        }
    }

    pub fn var(name: &str) -> Expr {
        Expr {
            kind: ExprKind::Var(name.to_string()),
            pos: 0,
        }
    }

    fn bin(op: BinOp, a: Expr, b: Expr) -> Expr {
        Expr {
            kind: ExprKind::Bin(op, Box::new(a), Box::new(b)),
            pos: 0,
        }
    }

    pub fn add(a: Expr, b: Expr) -> Expr {
        Expr::bin(BinOp::Add, a, b)
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        Expr::bin(BinOp::Sub, a, b)
    }

    pub fn mul(a: Expr, b: Expr) -> Expr {
        Expr::bin(BinOp::Mul, a, b)
    }

    pub fn div(a: Expr, b: Expr) -> Expr {
        Expr::bin(BinOp::Div, a, b)
    }

    pub fn neg(a: Expr) -> Expr {
        Expr {
            kind: ExprKind::Neg(Box::new(a)),
            pos: 0,
        }
    }

    pub fn pow(a: Expr, c: f64) -> Expr {
        Expr {
            kind: ExprKind::Pow(Box::new(a), c),
            pos: 0,
        }
    }

    pub fn call(f: Func, a: Expr) -> Expr {
        Expr {
            kind: ExprKind::Call(f, Box::new(a)),
            pos: 0,
        }
    }

    /// Literal zero (used for syntactic A ≡ 0 checks).
    pub fn is_zero(&self) -> bool {
        match &self.kind {
            ExprKind::Num(v) => *v == 0.0,
            ExprKind::Neg(a) => a.is_zero(),
            _ => false,
        }
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match &self.kind {
            ExprKind::Num(_) => {}
            ExprKind::Var(n) => {
                out.insert(n.clone());
            }
            ExprKind::Neg(a) => a.collect_vars(out),
            ExprKind::Bin(_, a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            ExprKind::Pow(a, _) => a.collect_vars(out),
            ExprKind::Call(_, a) => a.collect_vars(out),
        }
    }

    pub fn eval(&self, env: &Env) -> Result<Jet2, EvalError> {
        let num = |r: Result<Jet2, JetError>, pos| {
            r.map_err(|source| EvalError::Numeric { pos, source })
        };
        match &self.kind {
            ExprKind::Num(v) => Ok(Jet2::constant(env.dim, *v)),
            ExprKind::Var(name) => env.lookup(name).ok_or_else(|| EvalError::Unbound {
                name: name.clone(),
                pos: self.pos,
            }),
            ExprKind::Neg(a) => Ok(a.eval(env)?.neg()),
            ExprKind::Bin(op, a, b) => {
                let a = a.eval(env)?;
                let b = b.eval(env)?;
                match op {
                    BinOp::Add => Ok(&a + &b),
                    BinOp::Sub => Ok(&a - &b),
                    BinOp::Mul => Ok(&a * &b),
                    BinOp::Div => num(a.try_div(&b), self.pos),
                }
            }
            ExprKind::Pow(a, c) => num(a.eval(env)?.pow_const(*c), self.pos),
            ExprKind::Call(f, a) => {
                let a = a.eval(env)?;
                match f {
                    Func::Exp => Ok(a.exp()),
                    Func::Sin => Ok(a.sin()),
                    Func::Cos => Ok(a.cos()),
                    Func::Ln => num(a.try_ln(), self.pos),
                    Func::Sqrt => num(a.try_sqrt(), self.pos),
                }
            }
        }
    }

    /// Exact partial derivative with respect to `var`, as a new AST.
    /// Crate-internal: used where a construction needs one more derivative
    /// order than the jets carry (e.g. an H profile built from ∂A, or a flow
    /// field built from ∂φ). Constant-folded on the way out so nested
    /// derivatives stay small.
    pub(crate) fn derivative(&self, var: &str) -> Expr {
        self.derivative_raw(var).simplified()
    }

    fn derivative_raw(&self, var: &str) -> Expr {
        match &self.kind {
            ExprKind::Num(_) => Expr::num(0.0),
            ExprKind::Var(n) => Expr::num(if n == var { 1.0 } else { 0.0 }),
            ExprKind::Neg(a) => Expr::neg(a.derivative(var)),
            ExprKind::Bin(op, a, b) => {
                let da = a.derivative_raw(var);
                let db = b.derivative_raw(var);
                match op {
                    BinOp::Add => Expr::add(da, db),
                    BinOp::Sub => Expr::sub(da, db),
                    BinOp::Mul => {
                        let l = Expr::mul(da, (**b).clone());
                        let r = Expr::mul((**a).clone(), db);
                        Expr::add(l, r)
                    }
                    BinOp::Div => {
                        // (a/b)' = a'/b - a b'/b^2
                        let l = Expr::div(da, (**b).clone());
                        let r = Expr::div(
                            Expr::mul((**a).clone(), db),
                            Expr::pow((**b).clone(), 2.0),
                        );
                        Expr::sub(l, r)
                    }
                }
            }
            ExprKind::Pow(a, c) => {
                let da = a.derivative_raw(var);
                Expr::mul(
                    Expr::mul(Expr::num(*c), Expr::pow((**a).clone(), c - 1.0)),
                    da,
                )
            }
            ExprKind::Call(f, a) => {
                let da = a.derivative_raw(var);
                let outer = match f {
                    Func::Exp => Expr::call(Func::Exp, (**a).clone()),
                    Func::Sin => Expr::call(Func::Cos, (**a).clone()),
                    Func::Cos => Expr::neg(Expr::call(Func::Sin, (**a).clone())),
                    Func::Ln => Expr::div(Expr::num(1.0), (**a).clone()),
                    Func::Sqrt => Expr::div(
                        Expr::num(0.5),
                        Expr::call(Func::Sqrt, (**a).clone()),
                    ),
                };
                Expr::mul(outer, da)
            }
        }
    }

    /// Bottom-up constant folding and identity pruning (x+0, x*1, x*0,
    /// 0/x, double negation). Keeps derivative ASTs compact and makes
    /// literal-zero checks meaningful after substitution; never applied to
    /// user text behind their back (parse/print round-trips untouched).
    pub(crate) fn simplified(&self) -> Expr {
        let kind = match &self.kind {
            ExprKind::Num(v) => ExprKind::Num(*v),
            ExprKind::Var(n) => ExprKind::Var(n.clone()),
            ExprKind::Neg(a) => {
                let a = a.simplified();
                match a.kind {
                    ExprKind::Num(v) => ExprKind::Num(-v),
                    ExprKind::Neg(inner) => inner.kind,
                    _ => ExprKind::Neg(Box::new(a)),
                }
            }
            ExprKind::Bin(op, a, b) => {
                let a = a.simplified();
                let b = b.simplified();
                match (op, &a.kind, &b.kind) {
                    (op, ExprKind::Num(x), ExprKind::Num(y)) => {
                        let v = match op {
                            BinOp::Add => x + y,
                            BinOp::Sub => x - y,
                            BinOp::Mul => x * y,
                            BinOp::Div if *y != 0.0 => x / y,
                            BinOp::Div => {
                                return Expr {
                                    kind: ExprKind::Bin(*op, Box::new(a.clone()), Box::new(b)),
                                    pos: self.pos,
                                }
                            }
                        };
                        ExprKind::Num(v)
                    }
                    (BinOp::Add, ExprKind::Num(x), _) if *x == 0.0 => b.kind,
                    (BinOp::Add | BinOp::Sub, _, ExprKind::Num(y)) if *y == 0.0 => a.kind,
                    (BinOp::Mul, ExprKind::Num(x), _) if *x == 0.0 => ExprKind::Num(0.0),
                    (BinOp::Mul, _, ExprKind::Num(y)) if *y == 0.0 => ExprKind::Num(0.0),
                    (BinOp::Mul, ExprKind::Num(x), _) if *x == 1.0 => b.kind,
                    (BinOp::Mul | BinOp::Div, _, ExprKind::Num(y)) if *y == 1.0 => a.kind,
                    (BinOp::Div, ExprKind::Num(x), _) if *x == 0.0 => ExprKind::Num(0.0),
                    (op, _, _) => ExprKind::Bin(*op, Box::new(a), Box::new(b)),
                }
            }
            ExprKind::Pow(a, c) => {
                let a = a.simplified();
                match (&a.kind, c) {
                    (_, c) if *c == 0.0 => ExprKind::Num(1.0),
                    (_, c) if *c == 1.0 => a.kind,
                    (ExprKind::Num(v), c) if v.powf(*c).is_finite() => ExprKind::Num(v.powf(*c)),
                    _ => ExprKind::Pow(Box::new(a), *c),
                }
            }
            ExprKind::Call(f, a) => ExprKind::Call(*f, Box::new(a.simplified())),
        };
        Expr {
            kind,
            pos: self.pos,
        }
    }

    /// Substitute a numeric constant for a variable.
    pub(crate) fn substitute(&self, var: &str, value: f64) -> Expr {
        let kind = match &self.kind {
            ExprKind::Num(v) => ExprKind::Num(*v),
            ExprKind::Var(n) => {
                if n == var {
                    ExprKind::Num(value)
                } else {
                    ExprKind::Var(n.clone())
                }
            }
            ExprKind::Neg(a) => ExprKind::Neg(Box::new(a.substitute(var, value))),
            ExprKind::Bin(op, a, b) => ExprKind::Bin(
                *op,
                Box::new(a.substitute(var, value)),
                Box::new(b.substitute(var, value)),
            ),
            ExprKind::Pow(a, c) => ExprKind::Pow(Box::new(a.substitute(var, value)), *c),
            ExprKind::Call(f, a) => ExprKind::Call(*f, Box::new(a.substitute(var, value))),
        };
        Expr {
            kind,
            pos: self.pos,
        }
    }

    fn prec(&self) -> u8 {
        match &self.kind {
            ExprKind::Num(_) | ExprKind::Var(_) | ExprKind::Call(..) => 5,
            ExprKind::Pow(..) => 4,
            ExprKind::Neg(_) => 3,
            ExprKind::Bin(BinOp::Mul | BinOp::Div, ..) => 2,
            ExprKind::Bin(BinOp::Add | BinOp::Sub, ..) => 1,
        }
    }

    /// Canonical printer: minimal parentheses, shortest-roundtrip floats.
    /// `parse(print(e))` reproduces `e` structurally.
    pub fn print(&self) -> String {
        let mut s = String::new();
        self.print_into(&mut s);
        s
    }

    fn print_child(&self, child: &Expr, min_prec: u8, out: &mut String) {
        if child.prec() < min_prec {
            out.push('(');
            child.print_into(out);
            out.push(')');
        } else {
            child.print_into(out);
        }
    }

    fn print_into(&self, out: &mut String) {
        match &self.kind {
            ExprKind::Num(v) => {
                use fmt::Write;
                write!(out, "{v}").unwrap();
            }
            ExprKind::Var(n) => out.push_str(n),
            ExprKind::Neg(a) => {
                out.push('-');
                self.print_child(a, 3, out);
            }
            ExprKind::Bin(op, a, b) => {
                let (sym, prec) = match op {
                    BinOp::Add => ('+', 1),
                    BinOp::Sub => ('-', 1),
                    BinOp::Mul => ('*', 2),
                    BinOp::Div => ('/', 2),
                };
                self.print_child(a, prec, out);
                out.push(sym);
                // left-associative: the right child needs parens at equal
                // precedence for the non-commutative ops
                let rp = match op {
                    BinOp::Sub | BinOp::Div => prec + 1,
                    _ => prec,
                };
                self.print_child(b, rp, out);
            }
            ExprKind::Pow(a, c) => {
                self.print_child(a, 5, out);
                out.push('^');
                use fmt::Write;
                if *c < 0.0 {
                    write!(out, "({c})").unwrap();
                } else {
                    write!(out, "{c}").unwrap();
                }
            }
            ExprKind::Call(f, a) => {
                out.push_str(f.name());
                out.push('(');
                a.print_into(out);
                out.push(')');
            }
        }
    }
}

pub fn parse(source: &str) -> Result<Expr, ParseError> {
    let mut p = Parser {
        src: source.as_bytes(),
        pos: 0,
    };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.err("end of input or an operator"));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err(&self, expected: &str) -> ParseError {
        ParseError {
            offset: self.pos,
            expected: expected.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while matches!(self.src.get(self.pos), Some(b' ' | b'\t' | b'\n' | b'\r')) {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, b: u8) -> bool {
        if self.peek() == Some(b) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut node = self.term()?;
        loop {
            let pos = {
                self.skip_ws();
                self.pos
            };
            let op = match self.peek() {
                Some(b'+') => BinOp::Add,
                Some(b'-') => BinOp::Sub,
                _ => return Ok(node),
            };
            self.pos += 1;
            let rhs = self.term()?;
            node = Expr {
                kind: ExprKind::Bin(op, Box::new(node), Box::new(rhs)),
                pos,
            };
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut node = self.unary()?;
        loop {
            let pos = {
                self.skip_ws();
                self.pos
            };
            let op = match self.peek() {
                Some(b'*') => BinOp::Mul,
                Some(b'/') => BinOp::Div,
                _ => return Ok(node),
            };
            self.pos += 1;
            let rhs = self.unary()?;
            node = Expr {
                kind: ExprKind::Bin(op, Box::new(node), Box::new(rhs)),
                pos,
            };
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        self.skip_ws();
        let pos = self.pos;
        if self.eat(b'-') {
            let inner = self.unary()?;
            return Ok(Expr {
                kind: ExprKind::Neg(Box::new(inner)),
                pos,
            });
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let mut node = self.primary()?;
        loop {
            self.skip_ws();
            let pos = self.pos;
            if !self.eat(b'^') {
                return Ok(node);
            }
            let c = self.exponent()?;
            node = Expr {
                kind: ExprKind::Pow(Box::new(node), c),
                pos,
            };
        }
    }

    // `^` takes a constant exponent: a number literal, possibly negated,
    // possibly parenthesized.
    fn exponent(&mut self) -> Result<f64, ParseError> {
        self.skip_ws();
        if self.eat(b'(') {
            let neg = self.eat(b'-');
            let v = self.number()?;
            if !self.eat(b')') {
                return Err(self.err("')'"));
            }
            return Ok(if neg { -v } else { v });
        }
        let neg = self.eat(b'-');
        let v = self.number()?;
        Ok(if neg { -v } else { v })
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        self.skip_ws();
        let pos = self.pos;
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.err("')'"));
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() => {
                let v = self.number()?;
                Ok(Expr {
                    kind: ExprKind::Num(v),
                    pos,
                })
            }
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                let name = self.ident();
                self.skip_ws();
                if self.src.get(self.pos) == Some(&b'(') {
                    let func = Func::from_name(&name).ok_or_else(|| ParseError {
                        offset: pos,
                        expected: "a known function (exp, ln, sin, cos, sqrt)".to_string(),
                    })?;
                    self.pos += 1;
                    let arg = self.expr()?;
                    if !self.eat(b')') {
                        return Err(self.err("')'"));
                    }
                    Ok(Expr {
                        kind: ExprKind::Call(func, Box::new(arg)),
                        pos,
                    })
                } else {
                    Ok(Expr {
                        kind: ExprKind::Var(name),
                        pos,
                    })
                }
            }
            _ => Err(self.err("a number, variable, function call or '('")),
        }
    }

    fn ident(&mut self) -> String {
        let start = self.pos;
        while matches!(self.src.get(self.pos), Some(c) if c.is_ascii_alphanumeric() || *c == b'_')
        {
            self.pos += 1;
        }
        String::from_utf8_lossy(&self.src[start..self.pos]).into_owned()
    }

    fn number(&mut self) -> Result<f64, ParseError> {
        let start = self.pos;
        while matches!(self.src.get(self.pos), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(self.err("a number"));
        }
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            while matches!(self.src.get(self.pos), Some(c) if c.is_ascii_digit()) {
                self.pos += 1;
            }
        }
        if matches!(self.src.get(self.pos), Some(b'e' | b'E')) {
            let mark = self.pos;
            self.pos += 1;
            if matches!(self.src.get(self.pos), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            let digits = self.pos;
            while matches!(self.src.get(self.pos), Some(c) if c.is_ascii_digit()) {
                self.pos += 1;
            }
            if self.pos == digits {
                // not an exponent after all (e.g. variable `e` can't follow
                // a number anyway, so report here)
                self.pos = mark;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        text.parse::<f64>().map_err(|_| ParseError {
            offset: start,
            expected: "a number".to_string(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn jet_env(binds: &[(&str, f64, Option<usize>)]) -> Env {
        let dim = binds.iter().filter(|(_, _, a)| a.is_some()).count();
        let names: Vec<String> = binds.iter().map(|(n, _, _)| n.to_string()).collect();
        let values = binds
            .iter()
            .map(|(_, v, active)| match active {
                Some(i) => Jet2::variable(dim, *i, *v).unwrap(),
                None => Jet2::constant(dim, *v),
            })
            .collect();
        Env::new(&names, values)
    }

    #[test]
    fn grammar_shapes() {
        let e = parse("u^2+v^2").unwrap();
        let expected = Expr::add(
            Expr::pow(Expr::var("u"), 2.0),
            Expr::pow(Expr::var("v"), 2.0),
        );
        assert_eq!(e, expected);

        let e = parse("exp(u)*cos(v)").unwrap();
        let expected = Expr::mul(
            Expr::call(Func::Exp, Expr::var("u")),
            Expr::call(Func::Cos, Expr::var("v")),
        );
        assert_eq!(e, expected);
    }

    #[test]
    fn syntax_errors_carry_offsets() {
        let err = parse("1+*2").unwrap_err();
        assert_eq!(err.offset, 2);

        let err = parse("foo(1)").unwrap_err();
        assert_eq!(err.offset, 0);
        assert!(err.expected.contains("known function"));

        assert!(parse("2u").is_err(), "no implicit multiplication");
        assert!(parse("u^v").is_err(), "exponent must be constant");
    }

    #[test]
    fn polynomial_eval() {
        let env = jet_env(&[("u", 1.0, Some(0)), ("v", 2.0, Some(1))]);
        let j = parse("u^2+v^2").unwrap().eval(&env).unwrap();
        assert_eq!(j.value, 5.0);
        assert_eq!(j.grad(), &[2.0, 4.0]);
        assert_eq!(j.hess_at(0, 0), 2.0);
        assert_eq!(j.hess_at(1, 1), 2.0);
        assert_eq!(j.hess_at(0, 1), 0.0);
    }

    #[test]
    fn inactive_binding_is_constant() {
        let env = jet_env(&[("xm", 0.7, None), ("u", 1.0, Some(0))]);
        let j = parse("xm").unwrap().eval(&env).unwrap();
        assert_eq!(j.value, 0.7);
        assert!(j.grad().iter().all(|&g| g == 0.0));
    }

    #[test]
    fn unbound_variable_reported_by_name() {
        let env = jet_env(&[("u", 1.0, Some(0))]);
        match parse("u+w").unwrap().eval(&env).unwrap_err() {
            EvalError::Unbound { name, .. } => assert_eq!(name, "w"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn parameterized_expression_against_finite_differences() {
        let src = "4/(-L*(1-u^2-v^2)^2)";
        let expr = parse(src).unwrap();
        let at = [0.3, 0.1];
        let mk = |u: f64, v: f64| {
            let env = Env::new(
                &["u".to_string(), "v".to_string()],
                vec![
                    Jet2::variable(2, 0, u).unwrap(),
                    Jet2::variable(2, 1, v).unwrap(),
                ],
            )
            .with_params(&[("L".to_string(), -2.0)]);
            expr.eval(&env).unwrap()
        };
        let f = |p: &[f64]| {
            4.0 / (2.0 * (1.0 - p[0] * p[0] - p[1] * p[1]).powi(2))
        };
        let j = mk(at[0], at[1]);
        let h = 1e-4;
        assert!((j.value - f(&at)).abs() < 1e-12);
        for i in 0..2 {
            let mut xp = at;
            let mut xm = at;
            xp[i] += h;
            xm[i] -= h;
            let g = (f(&xp) - f(&xm)) / (2.0 * h);
            assert!((j.grad_at(i) - g).abs() <= 1e-6 * g.abs().max(1.0));
            let hii = (f(&xp) - 2.0 * f(&at) + f(&xm)) / (h * h);
            assert!((j.hess_at(i, i) - hii).abs() <= 1e-6 * hii.abs().max(1.0));
        }
        let (mut a, mut b, mut c, mut d) = (at, at, at, at);
        a[0] += h;
        a[1] += h;
        b[0] += h;
        b[1] -= h;
        c[0] -= h;
        c[1] += h;
        d[0] -= h;
        d[1] -= h;
        let hxy = (f(&a) - f(&b) - f(&c) + f(&d)) / (4.0 * h * h);
        assert!((j.hess_at(0, 1) - hxy).abs() <= 1e-6 * hxy.abs().max(1.0));
    }

    #[test]
    fn round_trip_stability() {
        for src in [
            "u^2+v^2",
            "exp(u)*cos(v)",
            "4/(-L*(1-u^2-v^2)^2)",
            "-u^2",
            "1-2-3",
            "1-(2-3)",
            "2/3/4",
            "2/(3/4)",
            "u^(-2)*sqrt(v)+ln(u)",
            "-(u+v)*3",
        ] {
            let e1 = parse(src).unwrap();
            let printed = e1.print();
            let e2 = parse(&printed).unwrap();
            assert_eq!(e1, e2, "round trip failed for {src} -> {printed}");
        }
    }

    #[test]
    fn ast_derivative_matches_jets() {
        let expr = parse("exp(u)*cos(v) + u^3/(1+v^2) - sqrt(1+u^2)").unwrap();
        let du = expr.derivative("u");
        let at = [(0.4, 1.1), (-0.3, 0.2), (1.2, -0.7)];
        for (u, v) in at {
            let env = Env::new(
                &["u".to_string(), "v".to_string()],
                vec![
                    Jet2::variable(2, 0, u).unwrap(),
                    Jet2::variable(2, 1, v).unwrap(),
                ],
            );
            let full = expr.eval(&env).unwrap();
            let d = du.eval(&env).unwrap();
            assert!((full.grad_at(0) - d.value).abs() < 1e-12);
            assert!((full.hess_at(0, 1) - d.grad_at(1)).abs() < 1e-12);
        }
    }

    #[test]
    fn substitute_pins_a_variable() {
        let expr = parse("xp^2*L + xp*h1 + h0").unwrap();
        let at0 = expr.substitute("xp", 0.0);
        assert_eq!(at0.free_vars().contains("xp"), false);
    }
}
