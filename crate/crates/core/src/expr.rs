//! Scalar expressions over the base coordinates `b1..bn` and the distance `d`
//! to the discriminant, with symbolic differentiation.
//!
//! Precedence, loosest first: `+ −`, `* /`, unary `−`, `^` (right
//! associative). Functions: `exp log sqrt sin cos atan2 abs flatbump`, where
//! `flatbump(u) = exp(−1/u²)` and `flatbump(0) = 0`. The constant `pi` is
//! predefined.
//!
//! Evaluation tracks "flat zeros": values that are exactly zero because they
//! come from an exponential of `−∞` or an underflowed flat factor. A flat
//! zero absorbs infinite or undefined co-factors, which gives removable
//! singularities such as `exp(−1/d²)` at `d = 0` their limit value.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Var {
    /// Zero-based base coordinate (`b1` is `B(0)`).
    B(usize),
    D,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Func {
    Exp,
    Log,
    Sqrt,
    Sin,
    Cos,
    Atan2,
    Abs,
    Flatbump,
}

impl Func {
    fn from_name(s: &str) -> Option<Func> {
        Some(match s {
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "atan2" => Func::Atan2,
            "abs" => Func::Abs,
            "flatbump" => Func::Flatbump,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Atan2 => "atan2",
            Func::Abs => "abs",
            Func::Flatbump => "flatbump",
        }
    }

    fn arity(self) -> usize {
        if self == Func::Atan2 {
            2
        } else {
            1
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Expr {
    Num(f64),
    Pi,
    Var(Var),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("parse error at position {position}: expected {}, found {found}", expected.join(" or "))]
pub struct ParseError {
    pub position: usize,
    pub expected: Vec<String>,
    pub found: String,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("expression evaluated to a non-finite value ({0})")]
    NonFinite(String),
    #[error("variable {0} is not available")]
    MissingVariable(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum EvalPolicy {
    /// Flat zeros absorb infinite co-factors.
    #[default]
    Removable,
    /// Any non-finite intermediate value is an error.
    Strict,
}

// ---------------------------------------------------------------- lexer

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(v) => format!("number {v}"),
            Tok::Ident(s) => format!("identifier '{s}'"),
            Tok::Plus => "'+'".into(),
            Tok::Minus => "'-'".into(),
            Tok::Star => "'*'".into(),
            Tok::Slash => "'/'".into(),
            Tok::Caret => "'^'".into(),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
            Tok::Comma => "','".into(),
            Tok::End => "end of input".into(),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let ch = bytes[i];
        if ch.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let tok = match ch {
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'/' => Tok::Slash,
            b'^' => Tok::Caret,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b',' => Tok::Comma,
            b'0'..=b'9' | b'.' => {
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
                let s = &text[start..i];
                let v: f64 = s.parse().map_err(|_| ParseError {
                    position: start,
                    expected: vec!["number".into()],
                    found: format!("'{s}'"),
                })?;
                out.push((Tok::Num(v), start));
                continue;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((Tok::Ident(text[start..i].to_string()), start));
                continue;
            }
            _ => {
                let c = text[start..].chars().next().unwrap_or('?');
                return Err(ParseError {
                    position: start,
                    expected: vec!["operator".into(), "operand".into()],
                    found: format!("'{c}'"),
                });
            }
        };
        out.push((tok, start));
        i += 1;
    }
    out.push((Tok::End, text.len()));
    Ok(out)
}

// ---------------------------------------------------------------- parser

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

const OPERAND: [&str; 4] = ["number", "identifier", "'('", "'-'"];

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn at(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, expected: &[&str]) -> ParseError {
        ParseError {
            position: self.at(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: self.peek().describe(),
        }
    }

    fn expect(&mut self, tok: Tok, name: &str) -> Result<(), ParseError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.error(&[name]))
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if *self.peek() == Tok::Minus {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.primary()?;
        if *self.peek() == Tok::Caret {
            self.bump();
            let exp = self.unary()?;
            return Ok(Expr::Bin(BinOp::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let start = self.at();
        match self.peek().clone() {
            Tok::Num(v) => {
                self.bump();
                Ok(Expr::Num(v))
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(e)
            }
            Tok::Ident(name) => {
                self.bump();
                if let Some(f) = Func::from_name(&name) {
                    self.expect(Tok::LParen, "'('")?;
                    let mut args = vec![self.expr()?];
                    while *self.peek() == Tok::Comma {
                        self.bump();
                        args.push(self.expr()?);
                    }
                    if args.len() != f.arity() {
                        return Err(ParseError {
                            position: self.at(),
                            expected: vec![format!("{} argument(s) to {}", f.arity(), f.name())],
                            found: format!("{} argument(s)", args.len()),
                        });
                    }
                    self.expect(Tok::RParen, "')'")?;
                    return Ok(Expr::Call(f, args));
                }
                match name.as_str() {
                    "pi" => Ok(Expr::Pi),
                    "d" => Ok(Expr::Var(Var::D)),
                    _ => match name.strip_prefix('b').and_then(|k| k.parse::<usize>().ok()) {
                        Some(k) if k >= 1 => Ok(Expr::Var(Var::B(k - 1))),
                        _ => Err(ParseError {
                            position: start,
                            expected: vec!["variable b1..bn, d, pi or a function name".into()],
                            found: format!("identifier '{name}'"),
                        }),
                    },
                }
            }
            _ => Err(self.error(&OPERAND)),
        }
    }
}

pub fn parse_expr(text: &str) -> Result<Expr, ParseError> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
    };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(p.error(&["operator", "end of input"]));
    }
    Ok(e)
}

// ---------------------------------------------------------------- printer

fn prec(e: &Expr) -> u8 {
    match e {
        Expr::Bin(BinOp::Add | BinOp::Sub, ..) => 1,
        Expr::Bin(BinOp::Mul | BinOp::Div, ..) => 2,
        Expr::Neg(_) => 3,
        Expr::Bin(BinOp::Pow, ..) => 4,
        Expr::Num(v) if v.is_sign_negative() => 3,
        _ => 5,
    }
}

fn write_at(e: &Expr, min: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if prec(e) < min {
        write!(f, "(")?;
        write_expr(e, f)?;
        write!(f, ")")
    } else {
        write_expr(e, f)
    }
}

fn write_expr(e: &Expr, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match e {
        Expr::Num(v) if v.is_sign_negative() => write!(f, "-{:?}", -v),
        Expr::Num(v) => write!(f, "{v:?}"),
        Expr::Pi => write!(f, "pi"),
        Expr::Var(Var::B(k)) => write!(f, "b{}", k + 1),
        Expr::Var(Var::D) => write!(f, "d"),
        Expr::Neg(x) => {
            write!(f, "-")?;
            write_at(x, 3, f)
        }
        Expr::Bin(op, l, r) => {
            let (sym, lmin, rmin) = match op {
                BinOp::Add => (" + ", 1, 2),
                BinOp::Sub => (" - ", 1, 2),
                BinOp::Mul => ("*", 2, 3),
                BinOp::Div => ("/", 2, 3),
                BinOp::Pow => ("^", 5, 3),
            };
            write_at(l, lmin, f)?;
            write!(f, "{sym}")?;
            write_at(r, rmin, f)
        }
        Expr::Call(func, args) => {
            write!(f, "{}(", func.name())?;
            for (k, a) in args.iter().enumerate() {
                if k > 0 {
                    write!(f, ", ")?;
                }
                write_expr(a, f)?;
            }
            write!(f, ")")
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_expr(self, f)
    }
}

// ---------------------------------------------------------------- evaluation

#[derive(Debug, Clone, Copy)]
pub struct EvalContext<'a> {
    pub b: &'a [f64],
    pub d: Option<f64>,
}

#[derive(Clone, Copy)]
struct Val {
    v: f64,
    flat: bool,
}

impl Val {
    fn plain(v: f64) -> Val {
        Val { v, flat: false }
    }
    fn flat_zero() -> Val {
        Val { v: 0.0, flat: true }
    }
    fn is_flat_zero(self) -> bool {
        self.flat && self.v == 0.0
    }
}

fn eval_val(e: &Expr, ctx: &EvalContext<'_>, policy: EvalPolicy) -> Result<Val, EvalError> {
    let removable = policy == EvalPolicy::Removable;
    let out = match e {
        Expr::Num(v) => Val::plain(*v),
        Expr::Pi => Val::plain(std::f64::consts::PI),
        Expr::Var(Var::B(k)) => Val::plain(
            *ctx.b
                .get(*k)
                .ok_or_else(|| EvalError::MissingVariable(format!("b{}", k + 1)))?,
        ),
        Expr::Var(Var::D) => Val::plain(ctx.d.ok_or_else(|| EvalError::MissingVariable("d".into()))?),
        Expr::Neg(x) => {
            let a = eval_val(x, ctx, policy)?;
            Val { v: -a.v, flat: a.flat }
        }
        Expr::Bin(op, l, r) => {
            let a = eval_val(l, ctx, policy)?;
            let b = eval_val(r, ctx, policy)?;
            match op {
                BinOp::Add => Val {
                    v: a.v + b.v,
                    flat: a.flat && b.flat,
                },
                BinOp::Sub => Val {
                    v: a.v - b.v,
                    flat: a.flat && b.flat,
                },
                BinOp::Mul => {
                    if removable && (a.is_flat_zero() || b.is_flat_zero()) {
                        Val::flat_zero()
                    } else {
                        Val::plain(a.v * b.v)
                    }
                }
                BinOp::Div => {
                    if removable && a.is_flat_zero() {
                        Val::flat_zero()
                    } else {
                        Val::plain(a.v / b.v)
                    }
                }
                BinOp::Pow => {
                    if removable && a.is_flat_zero() && b.v > 0.0 {
                        Val::flat_zero()
                    } else {
                        Val::plain(a.v.powf(b.v))
                    }
                }
            }
        }
        Expr::Call(func, args) => {
            let a = eval_val(&args[0], ctx, policy)?;
            match func {
                Func::Exp => {
                    let v = a.v.exp();
                    Val { v, flat: v == 0.0 }
                }
                Func::Flatbump => {
                    if a.v == 0.0 {
                        Val::flat_zero()
                    } else {
                        let v = (-1.0 / (a.v * a.v)).exp();
                        Val { v, flat: v == 0.0 }
                    }
                }
                Func::Log => Val::plain(a.v.ln()),
                Func::Sqrt => Val {
                    v: a.v.sqrt(),
                    flat: a.is_flat_zero(),
                },
                Func::Sin => Val {
                    v: a.v.sin(),
                    flat: a.is_flat_zero(),
                },
                Func::Cos => Val::plain(a.v.cos()),
                Func::Abs => Val {
                    v: a.v.abs(),
                    flat: a.is_flat_zero(),
                },
                Func::Atan2 => {
                    let x = eval_val(&args[1], ctx, policy)?;
                    Val::plain(a.v.atan2(x.v))
                }
            }
        }
    };
    if !removable && !out.v.is_finite() {
        return Err(EvalError::NonFinite(e.to_string()));
    }
    Ok(out)
}

impl Expr {
    pub fn eval(&self, ctx: &EvalContext<'_>, policy: EvalPolicy) -> Result<f64, EvalError> {
        let v = eval_val(self, ctx, policy)?;
        if v.v.is_finite() {
            Ok(v.v)
        } else {
            Err(EvalError::NonFinite(self.to_string()))
        }
    }

    pub fn uses_d(&self) -> bool {
        match self {
            Expr::Var(Var::D) => true,
            Expr::Num(_) | Expr::Pi | Expr::Var(_) => false,
            Expr::Neg(x) => x.uses_d(),
            Expr::Bin(_, l, r) => l.uses_d() || r.uses_d(),
            Expr::Call(_, a) => a.iter().any(|x| x.uses_d()),
        }
    }

    /// Largest zero-based `b` index referenced, if any.
    pub fn max_b_index(&self) -> Option<usize> {
        match self {
            Expr::Var(Var::B(k)) => Some(*k),
            Expr::Num(_) | Expr::Pi | Expr::Var(Var::D) => None,
            Expr::Neg(x) => x.max_b_index(),
            Expr::Bin(_, l, r) => l.max_b_index().max(r.max_b_index()),
            Expr::Call(_, a) => a.iter().filter_map(|x| x.max_b_index()).max(),
        }
    }

    /// Symbolic partial derivative, treating `d` as an independent variable.
    pub fn diff(&self, var: Var) -> Expr {
        match self {
            Expr::Num(_) | Expr::Pi => num(0.0),
            Expr::Var(v) => num(if *v == var { 1.0 } else { 0.0 }),
            Expr::Neg(x) => neg(x.diff(var)),
            Expr::Bin(op, l, r) => {
                let (dl, dr) = (l.diff(var), r.diff(var));
                let (l, r) = ((**l).clone(), (**r).clone());
                match op {
                    BinOp::Add => add(dl, dr),
                    BinOp::Sub => sub(dl, dr),
                    BinOp::Mul => add(mul(dl, r.clone()), mul(l, dr)),
                    BinOp::Div => div(
                        sub(mul(dl, r.clone()), mul(l, dr)),
                        pow(r, num(2.0)),
                    ),
                    BinOp::Pow => {
                        if let Expr::Num(c) = r {
                            mul(mul(num(c), pow(l, num(c - 1.0))), dl)
                        } else {
                            let e = pow(l.clone(), r.clone());
                            mul(
                                e,
                                add(
                                    mul(dr, call(Func::Log, vec![l.clone()])),
                                    div(mul(r, dl), l),
                                ),
                            )
                        }
                    }
                }
            }
            Expr::Call(f, args) => {
                let u = args[0].clone();
                let du = u.diff(var);
                match f {
                    Func::Exp => mul(self.clone(), du),
                    Func::Log => div(du, u),
                    Func::Sqrt => div(du, mul(num(2.0), self.clone())),
                    Func::Sin => mul(call(Func::Cos, vec![u]), du),
                    Func::Cos => neg(mul(call(Func::Sin, vec![u]), du)),
                    Func::Abs => mul(div(u.clone(), call(Func::Abs, vec![u])), du),
                    Func::Flatbump => mul(
                        mul(self.clone(), mul(num(2.0), pow(u, num(-3.0)))),
                        du,
                    ),
                    Func::Atan2 => {
                        let x = args[1].clone();
                        let dx = x.diff(var);
                        div(
                            sub(mul(x.clone(), du), mul(u.clone(), dx)),
                            add(pow(x, num(2.0)), pow(u, num(2.0))),
                        )
                    }
                }
            }
        }
    }
}

fn num(v: f64) -> Expr {
    Expr::Num(v)
}

fn is_num(e: &Expr, v: f64) -> bool {
    matches!(e, Expr::Num(x) if *x == v)
}

fn neg(a: Expr) -> Expr {
    match a {
        Expr::Num(v) => num(-v),
        Expr::Neg(x) => *x,
        other => Expr::Neg(Box::new(other)),
    }
}

fn add(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        (Expr::Num(x), Expr::Num(y)) => num(x + y),
        _ if is_num(&a, 0.0) => b,
        _ if is_num(&b, 0.0) => a,
        _ => Expr::Bin(BinOp::Add, Box::new(a), Box::new(b)),
    }
}

fn sub(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        (Expr::Num(x), Expr::Num(y)) => num(x - y),
        _ if is_num(&b, 0.0) => a,
        _ if is_num(&a, 0.0) => neg(b),
        _ => Expr::Bin(BinOp::Sub, Box::new(a), Box::new(b)),
    }
}

fn mul(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        (Expr::Num(x), Expr::Num(y)) => num(x * y),
        _ if is_num(&a, 0.0) || is_num(&b, 0.0) => num(0.0),
        _ if is_num(&a, 1.0) => b,
        _ if is_num(&b, 1.0) => a,
        _ => Expr::Bin(BinOp::Mul, Box::new(a), Box::new(b)),
    }
}

fn div(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        _ if is_num(&a, 0.0) => num(0.0),
        _ if is_num(&b, 1.0) => a,
        _ => Expr::Bin(BinOp::Div, Box::new(a), Box::new(b)),
    }
}

fn pow(a: Expr, b: Expr) -> Expr {
    if is_num(&b, 1.0) {
        a
    } else if is_num(&b, 0.0) {
        num(1.0)
    } else {
        Expr::Bin(BinOp::Pow, Box::new(a), Box::new(b))
    }
}

fn call(f: Func, args: Vec<Expr>) -> Expr {
    Expr::Call(f, args)
}

impl std::ops::Add for Expr {
    type Output = Expr;
    fn add(self, o: Expr) -> Expr {
        Expr::Bin(BinOp::Add, Box::new(self), Box::new(o))
    }
}

impl std::ops::Sub for Expr {
    type Output = Expr;
    fn sub(self, o: Expr) -> Expr {
        Expr::Bin(BinOp::Sub, Box::new(self), Box::new(o))
    }
}

impl Expr {
    /// Summands of a chain of `+`, `−` and unary minus, with a flag marking
    /// the negated ones.
    pub fn signed_terms(&self) -> Vec<(bool, Expr)> {
        let mut out = Vec::new();
        collect_terms(self, false, &mut out);
        out
    }
}

fn collect_terms(e: &Expr, neg: bool, out: &mut Vec<(bool, Expr)>) {
    match e {
        Expr::Bin(BinOp::Add, a, b) => {
            collect_terms(a, neg, out);
            collect_terms(b, neg, out);
        }
        Expr::Bin(BinOp::Sub, a, b) => {
            collect_terms(a, neg, out);
            collect_terms(b, !neg, out);
        }
        Expr::Neg(a) => collect_terms(a, !neg, out),
        Expr::Num(v) if *v == 0.0 => {}
        _ => out.push((neg, e.clone())),
    }
}

/// `a − b` with summands common to both removed, so that
/// `(a + g) − (b + g)` is structurally `a − b`. The result is oriented by
/// the printed forms, which makes `difference(b, a)` the exact negation of
/// `difference(a, b)`.
pub fn difference(a: &Expr, b: &Expr) -> Expr {
    if a.to_string() > b.to_string() {
        return match difference(b, a) {
            Expr::Num(v) if v == 0.0 => Expr::Num(0.0),
            e => Expr::Neg(Box::new(e)),
        };
    }
    let mut terms = a.signed_terms();
    for (neg, t) in b.signed_terms() {
        let flipped = !neg;
        match terms.iter().position(|(n, u)| *n == neg && *u == t) {
            Some(i) => {
                terms.remove(i);
            }
            None => terms.push((flipped, t)),
        }
    }
    let mut it = terms.into_iter();
    let Some((neg, first)) = it.next() else {
        return Expr::Num(0.0);
    };
    let mut acc = if neg { Expr::Neg(Box::new(first)) } else { first };
    for (neg, t) in it {
        acc = if neg { acc - t } else { acc + t };
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn difference_cancels_common_summands() {
        let a = parse_expr("b1 + 0.1*b2 - b3").unwrap();
        let b = parse_expr("flatbump(d) + 0.1*b2 - b3").unwrap();
        assert_eq!(difference(&a, &b).to_string(), parse_expr("b1 - flatbump(d)").unwrap().to_string());
        assert_eq!(difference(&a, &a), Expr::Num(0.0));
        let ctx = EvalContext { b: &[0.3, 0.2, 0.1], d: Some(0.4) };
        let x = difference(&a, &b).eval(&ctx, EvalPolicy::Removable).unwrap();
        let y = difference(&b, &a).eval(&ctx, EvalPolicy::Removable).unwrap();
        assert_eq!(x, -y);
    }

    fn ev(text: &str, b: &[f64], d: f64) -> Result<f64, EvalError> {
        parse_expr(text)
            .unwrap()
            .eval(&EvalContext { b, d: Some(d) }, EvalPolicy::Removable)
    }

    #[test]
    fn precedence() {
        assert_eq!(ev("2 + 3*4", &[], 0.0).unwrap(), 14.0);
        assert_eq!(ev("-2^2", &[], 0.0).unwrap(), -4.0);
        assert_eq!(ev("2^3^2", &[], 0.0).unwrap(), 512.0);
        assert_eq!(ev("8/4/2", &[], 0.0).unwrap(), 1.0);
        assert_eq!(ev("2^-1", &[], 0.0).unwrap(), 0.5);
        assert_eq!(ev("b1 - b2 - b3", &[1.0, 2.0, 3.0], 0.0).unwrap(), -4.0);
        assert_eq!(ev("1.5e-1*atan2(0, 1) + 2.5E1", &[], 0.0).unwrap(), 25.0);
    }

    #[test]
    fn trailing_operator_error() {
        let e = parse_expr("2*").unwrap_err();
        assert_eq!(e.position, 2);
        assert!(e.expected.iter().any(|s| s == "number"));
        assert!(parse_expr("foo(1)").is_err());
        assert!(parse_expr("atan2(1)").is_err());
        assert!(parse_expr("(b1").is_err());
        assert!(parse_expr("b0").is_err());
        assert_eq!(parse_expr("1 $").unwrap_err().position, 2);
    }

    #[test]
    fn removable_singularity() {
        assert_eq!(ev("exp(-1/d^2)", &[], 0.0).unwrap(), 0.0);
        assert_eq!(ev("flatbump(d)", &[], 0.0).unwrap(), 0.0);
        let strict = parse_expr("exp(-1/d^2)")
            .unwrap()
            .eval(&EvalContext { b: &[], d: Some(0.0) }, EvalPolicy::Strict);
        assert!(strict.is_err());
        let d = parse_expr("exp(-1/d^2)").unwrap().diff(Var::D);
        let v = d.eval(&EvalContext { b: &[], d: Some(0.0) }, EvalPolicy::Removable).unwrap();
        assert_eq!(v, 0.0);
        assert!(ev("1/d", &[], 0.0).is_err());
    }

    #[test]
    fn derivative_example() {
        let e = parse_expr("b1^2 + flatbump(d)").unwrap();
        let g = e.diff(Var::B(0));
        let ctx = EvalContext { b: &[0.7, 0.1], d: Some(0.5) };
        assert!((g.eval(&ctx, EvalPolicy::Removable).unwrap() - 1.4).abs() < 1e-15);
        let gd = e.diff(Var::D);
        let want = (-4.0f64).exp() * 2.0 / 0.125;
        assert!((gd.eval(&ctx, EvalPolicy::Removable).unwrap() - want).abs() < 1e-14);
    }

    #[test]
    fn printing_round_trip() {
        for t in ["-(b1 + b2)", "(-b1)^2", "b1 - (b2 - b3)", "(b1^b2)^b3", "b1^-b2", "2.0*-b1", "--b1"] {
            let e = parse_expr(t).unwrap();
            let p = e.to_string();
            assert_eq!(parse_expr(&p).unwrap(), e, "{t} -> {p}");
        }
    }
}
