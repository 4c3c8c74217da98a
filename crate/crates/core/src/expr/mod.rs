//! Closed-form scalar expressions in chart coordinates.
//!
//! This is the sole source of exact partial derivatives in the crate:
//! metric entries, warping functions and explicit connection coefficients
//! are all `ScalarExpr` values, and every symbolic derivative used by the
//! geometry modules comes from [`ScalarExpr::differentiate`].
//!
//! The grammar (also accepted verbatim in scene files) is standard infix:
//! constants, variables `x0..x(n-1)`, `+ - * /`, `^` with a constant
//! integer exponent, unary minus, and the functions `exp log sin cos sqrt`.
//! Precedence is `^` > unary `-` > `* /` > `+ -`, with parentheses.

mod parse;

pub use parse::{ParseError, ParseErrorKind};

use std::fmt;

use thiserror::Error;

use crate::scalar::Real;

/// What went wrong while evaluating an expression.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum EvalErrorKind {
    #[error("division by zero")]
    DivisionByZero,
    #[error("log of a non-positive value")]
    LogDomain,
    #[error("sqrt of a negative value")]
    SqrtDomain,
}

/// Domain error raised during evaluation, carrying the offending
/// subexpression so scene files can report *which* entry misbehaved.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{kind} in `{subexpr}`")]
pub struct EvalError {
    pub kind: EvalErrorKind,
    pub subexpr: String,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Node<T> {
    Const(T),
    Var(usize),
    Add(Box<Node<T>>, Box<Node<T>>),
    Sub(Box<Node<T>>, Box<Node<T>>),
    Mul(Box<Node<T>>, Box<Node<T>>),
    Div(Box<Node<T>>, Box<Node<T>>),
    /// Constant integer exponent only; general powers are spelled
    /// `exp(b*log(a))`, which keeps differentiation total.
    Pow(Box<Node<T>>, i32),
    Neg(Box<Node<T>>),
    Exp(Box<Node<T>>),
    Log(Box<Node<T>>),
    Sin(Box<Node<T>>),
    Cos(Box<Node<T>>),
    Sqrt(Box<Node<T>>),
}

/// A parsed, differentiable closed-form expression in `arity` coordinates.
///
/// Values are immutable after construction and evaluation is pure, so a
/// single expression can be evaluated concurrently from many workers.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarExpr<T> {
    arity: usize,
    root: Node<T>,
}

impl<T: Real> ScalarExpr<T> {
    /// Parses `text` as an expression in coordinates `x0..x(arity-1)`.
    pub fn parse(text: &str, arity: usize) -> Result<Self, ParseError> {
        parse::parse(text, arity)
    }

    /// The constant expression `value`.
    pub fn constant(arity: usize, value: T) -> Self {
        ScalarExpr {
            arity,
            root: Node::Const(value),
        }
    }

    /// The coordinate expression `x<index>`.
    pub fn var(arity: usize, index: usize) -> Self {
        assert!(index < arity, "variable index {index} out of range {arity}");
        ScalarExpr {
            arity,
            root: Node::Var(index),
        }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    /// Evaluates at `p` (must have length `arity`). Domain errors name the
    /// offending subexpression.
    pub fn evaluate(&self, p: &[T]) -> Result<T, EvalError> {
        assert_eq!(
            p.len(),
            self.arity,
            "point dimension {} does not match expression arity {}",
            p.len(),
            self.arity
        );
        eval_node(&self.root, p)
    }

    /// Exact symbolic partial derivative with respect to `x<index>`.
    ///
    /// Constant subtrees are folded (`0*t -> 0`, `t+0 -> t`, `1*t -> t`);
    /// no further simplification is attempted -- correctness downstream is
    /// by evaluation, not canonical form.
    pub fn differentiate(&self, index: usize) -> Self {
        assert!(
            index < self.arity,
            "derivative index {index} out of range {}",
            self.arity
        );
        ScalarExpr {
            arity: self.arity,
            root: diff_node(&self.root, index),
        }
    }

    /// Re-embeds the expression into a chart with `new_arity` coordinates,
    /// sending variable `i` to `map(i)`. Used for horizontal/vertical lifts.
    pub fn reindex(&self, new_arity: usize, map: &dyn Fn(usize) -> usize) -> Self {
        ScalarExpr {
            arity: new_arity,
            root: reindex_node(&self.root, new_arity, map),
        }
    }
}

fn reindex_node<T: Clone>(node: &Node<T>, new_arity: usize, map: &dyn Fn(usize) -> usize) -> Node<T> {
    let rec = |n: &Node<T>| Box::new(reindex_node(n, new_arity, map));
    match node {
        Node::Const(c) => Node::Const(c.clone()),
        Node::Var(i) => {
            let j = map(*i);
            assert!(j < new_arity, "reindex target {j} out of range {new_arity}");
            Node::Var(j)
        }
        Node::Add(a, b) => Node::Add(rec(a), rec(b)),
        Node::Sub(a, b) => Node::Sub(rec(a), rec(b)),
        Node::Mul(a, b) => Node::Mul(rec(a), rec(b)),
        Node::Div(a, b) => Node::Div(rec(a), rec(b)),
        Node::Pow(a, n) => Node::Pow(rec(a), *n),
        Node::Neg(a) => Node::Neg(rec(a)),
        Node::Exp(a) => Node::Exp(rec(a)),
        Node::Log(a) => Node::Log(rec(a)),
        Node::Sin(a) => Node::Sin(rec(a)),
        Node::Cos(a) => Node::Cos(rec(a)),
        Node::Sqrt(a) => Node::Sqrt(rec(a)),
    }
}

fn eval_node<T: Real>(node: &Node<T>, p: &[T]) -> Result<T, EvalError> {
    let domain_err = |kind| EvalError {
        kind,
        subexpr: render(node),
    };
    match node {
        Node::Const(c) => Ok(*c),
        Node::Var(i) => Ok(p[*i]),
        Node::Add(a, b) => Ok(eval_node(a, p)? + eval_node(b, p)?),
        Node::Sub(a, b) => Ok(eval_node(a, p)? - eval_node(b, p)?),
        Node::Mul(a, b) => Ok(eval_node(a, p)? * eval_node(b, p)?),
        Node::Div(a, b) => {
            let denom = eval_node(b, p)?;
            if denom == T::zero() {
                return Err(domain_err(EvalErrorKind::DivisionByZero));
            }
            Ok(eval_node(a, p)? / denom)
        }
        Node::Pow(a, n) => {
            let base = eval_node(a, p)?;
            if *n < 0 && base == T::zero() {
                return Err(domain_err(EvalErrorKind::DivisionByZero));
            }
            Ok(base.powi(*n))
        }
        Node::Neg(a) => Ok(-eval_node(a, p)?),
        Node::Exp(a) => Ok(eval_node(a, p)?.exp()),
        Node::Log(a) => {
            let v = eval_node(a, p)?;
            if v <= T::zero() {
                return Err(domain_err(EvalErrorKind::LogDomain));
            }
            Ok(v.ln())
        }
        Node::Sin(a) => Ok(eval_node(a, p)?.sin()),
        Node::Cos(a) => Ok(eval_node(a, p)?.cos()),
        Node::Sqrt(a) => {
            let v = eval_node(a, p)?;
            if v < T::zero() {
                return Err(domain_err(EvalErrorKind::SqrtDomain));
            }
            Ok(v.sqrt())
        }
    }
}

// Smart constructors: constant folding only. A fold is skipped whenever it
// would swallow a domain error (log of a negative constant stays symbolic so
// evaluation still reports it).

fn konst<T: Real>(c: T) -> Node<T> {
    Node::Const(c)
}

fn is_const<T: Real>(n: &Node<T>, c: T) -> bool {
    matches!(n, Node::Const(v) if *v == c)
}

fn add<T: Real>(a: Node<T>, b: Node<T>) -> Node<T> {
    if let (Node::Const(x), Node::Const(y)) = (&a, &b) {
        return konst(*x + *y);
    }
    if is_const(&a, T::zero()) {
        return b;
    }
    if is_const(&b, T::zero()) {
        return a;
    }
    Node::Add(Box::new(a), Box::new(b))
}

fn sub<T: Real>(a: Node<T>, b: Node<T>) -> Node<T> {
    if let (Node::Const(x), Node::Const(y)) = (&a, &b) {
        return konst(*x - *y);
    }
    if is_const(&b, T::zero()) {
        return a;
    }
    if is_const(&a, T::zero()) {
        return neg(b);
    }
    Node::Sub(Box::new(a), Box::new(b))
}

fn mul<T: Real>(a: Node<T>, b: Node<T>) -> Node<T> {
    if let (Node::Const(x), Node::Const(y)) = (&a, &b) {
        return konst(*x * *y);
    }
    if is_const(&a, T::zero()) || is_const(&b, T::zero()) {
        return konst(T::zero());
    }
    if is_const(&a, T::one()) {
        return b;
    }
    if is_const(&b, T::one()) {
        return a;
    }
    Node::Mul(Box::new(a), Box::new(b))
}

fn div<T: Real>(a: Node<T>, b: Node<T>) -> Node<T> {
    if let (Node::Const(x), Node::Const(y)) = (&a, &b) {
        if *y != T::zero() {
            return konst(*x / *y);
        }
    }
    if is_const(&b, T::one()) {
        return a;
    }
    Node::Div(Box::new(a), Box::new(b))
}

fn pow<T: Real>(a: Node<T>, n: i32) -> Node<T> {
    if n == 0 {
        return konst(T::one());
    }
    if n == 1 {
        return a;
    }
    if let Node::Const(x) = &a {
        if n > 0 || *x != T::zero() {
            return konst(x.powi(n));
        }
    }
    Node::Pow(Box::new(a), n)
}

fn neg<T: Real>(a: Node<T>) -> Node<T> {
    match a {
        Node::Const(x) => konst(-x),
        Node::Neg(inner) => *inner,
        other => Node::Neg(Box::new(other)),
    }
}

fn diff_node<T: Real>(node: &Node<T>, i: usize) -> Node<T> {
    let d = |n: &Node<T>| diff_node(n, i);
    match node {
        Node::Const(_) => konst(T::zero()),
        Node::Var(j) => konst(if *j == i { T::one() } else { T::zero() }),
        Node::Add(a, b) => add(d(a), d(b)),
        Node::Sub(a, b) => sub(d(a), d(b)),
        Node::Mul(a, b) => add(mul(d(a), (**b).clone()), mul((**a).clone(), d(b))),
        Node::Div(a, b) => div(
            sub(mul(d(a), (**b).clone()), mul((**a).clone(), d(b))),
            pow((**b).clone(), 2),
        ),
        Node::Pow(a, n) => {
            let coeff = konst(T::from_i32(*n).expect("small integer exponent"));
            mul(mul(coeff, pow((**a).clone(), n - 1)), d(a))
        }
        Node::Neg(a) => neg(d(a)),
        Node::Exp(a) => mul(Node::Exp(a.clone()), d(a)),
        Node::Log(a) => div(d(a), (**a).clone()),
        Node::Sin(a) => mul(Node::Cos(a.clone()), d(a)),
        Node::Cos(a) => neg(mul(Node::Sin(a.clone()), d(a))),
        Node::Sqrt(a) => div(d(a), mul(konst(T::from_f64(2.0).unwrap()), Node::Sqrt(a.clone()))),
    }
}

// Precedence levels for printing: + - (1), * / (2), unary - (3), ^ (4),
// atoms (5). Printing then reparsing yields an expression that evaluates
// identically; that round trip is property-tested. Right children at equal
// precedence are always parenthesized: the parser is left-associative and
// float arithmetic is not associative, so `a*(b/c)` must not come back as
// `(a*b)/c`.

fn prec<T: Real>(node: &Node<T>) -> u8 {
    match node {
        Node::Add(..) | Node::Sub(..) => 1,
        Node::Mul(..) | Node::Div(..) => 2,
        Node::Neg(..) => 3,
        Node::Const(c) if *c < T::zero() => 3,
        Node::Pow(..) => 4,
        _ => 5,
    }
}

fn fmt_node<T: Real>(node: &Node<T>, out: &mut String, parent: u8, right_of_nonassoc: bool) {
    let my = prec(node);
    let need_parens = my < parent || (my == parent && right_of_nonassoc);
    if need_parens {
        out.push('(');
    }
    match node {
        Node::Const(c) => out.push_str(&format!("{c}")),
        Node::Var(i) => out.push_str(&format!("x{i}")),
        Node::Add(a, b) => {
            fmt_node(a, out, 1, false);
            out.push_str(" + ");
            fmt_node(b, out, 1, true);
        }
        Node::Sub(a, b) => {
            fmt_node(a, out, 1, false);
            out.push_str(" - ");
            fmt_node(b, out, 1, true);
        }
        Node::Mul(a, b) => {
            fmt_node(a, out, 2, false);
            out.push('*');
            fmt_node(b, out, 2, true);
        }
        Node::Div(a, b) => {
            fmt_node(a, out, 2, false);
            out.push('/');
            fmt_node(b, out, 2, true);
        }
        Node::Neg(a) => {
            out.push('-');
            fmt_node(a, out, 3, true);
        }
        Node::Pow(a, n) => {
            fmt_node(a, out, 5, false);
            out.push('^');
            out.push_str(&format!("{n}"));
        }
        Node::Exp(a) | Node::Log(a) | Node::Sin(a) | Node::Cos(a) | Node::Sqrt(a) => {
            out.push_str(match node {
                Node::Exp(_) => "exp",
                Node::Log(_) => "log",
                Node::Sin(_) => "sin",
                Node::Cos(_) => "cos",
                _ => "sqrt",
            });
            out.push('(');
            fmt_node(a, out, 0, false);
            out.push(')');
        }
    }
    if need_parens {
        out.push(')');
    }
}

fn render<T: Real>(node: &Node<T>) -> String {
    let mut s = String::new();
    fmt_node(node, &mut s, 0, false);
    s
}

impl<T: Real> fmt::Display for ScalarExpr<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render(&self.root))
    }
}
