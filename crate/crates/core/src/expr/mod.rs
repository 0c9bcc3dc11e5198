//! Symbolic scalar expressions in named parameters.
//!
//! An [`Expr`] is an immutable tree over numeric literals, the constants
//! `pi` and `e`, parameter references, the arithmetic operators
//! `+ - * / ^`, unary negation, and the functions `sin cos tan exp log
//! sqrt`. Expressions are parsed against a fixed list of parameter names
//! and can be differentiated exactly with respect to any of them; that is
//! the primary derivative path of the whole crate — finite differences are
//! kept for test oracles only.
//!
//! Differentiation folds constant subtrees afterwards but performs no
//! further simplification: downstream code compares expressions by
//! evaluation, never by shape.

pub(crate) mod compiled;
mod parse;

pub use parse::ParseError;

use std::fmt;
use std::sync::Arc;

/// Named mathematical constants the grammar knows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NamedConst {
    Pi,
    E,
}

impl NamedConst {
    pub fn value(self) -> f64 {
        match self {
            NamedConst::Pi => std::f64::consts::PI,
            NamedConst::E => std::f64::consts::E,
        }
    }

    fn name(self) -> &'static str {
        match self {
            NamedConst::Pi => "pi",
            NamedConst::E => "e",
        }
    }
}

/// Binary operators, in source syntax `+ - * / ^`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

/// Unary functions the grammar knows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
}

impl Func {
    pub(crate) fn by_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Node {
    Num(f64),
    Const(NamedConst),
    Param(usize),
    Neg(Box<Node>),
    Bin(BinOp, Box<Node>, Box<Node>),
    Call(Func, Box<Node>),
}

/// What went wrong while evaluating an expression, and on which subtree.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{reason} in `{node}`")]
pub struct DomainError {
    pub reason: DomainErrorKind,
    /// Rendering of the offending subtree.
    pub node: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DomainErrorKind {
    DivisionByZero,
    LogNonPositive,
    SqrtNegative,
    /// Negative base raised to a non-integer exponent.
    PowNegativeBase,
    /// Zero base raised to a negative exponent.
    PowZeroNegative,
}

impl fmt::Display for DomainErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            DomainErrorKind::DivisionByZero => "division by zero",
            DomainErrorKind::LogNonPositive => "log of a non-positive value",
            DomainErrorKind::SqrtNegative => "sqrt of a negative value",
            DomainErrorKind::PowNegativeBase => {
                "negative base raised to a non-integer exponent"
            }
            DomainErrorKind::PowZeroNegative => "zero base raised to a negative exponent",
        };
        f.write_str(s)
    }
}

/// Requested derivative parameter is not declared for the expression.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown parameter `{name}` (declared: {declared:?})")]
pub struct UnknownParameter {
    pub name: String,
    pub declared: Vec<String>,
}

/// An immutable symbolic expression over a fixed parameter list.
///
/// The parameter list doubles as the binding order for [`Expr::evaluate`].
/// Expressions built from one another (via the arithmetic operators or the
/// function helpers) must share the same parameter list.
#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    pub(crate) node: Node,
    pub(crate) params: Arc<[String]>,
}

impl Expr {
    /// Parses `text` against the allowed parameter names.
    pub fn parse(text: &str, params: &[&str]) -> Result<Expr, ParseError> {
        parse::parse(text, params)
    }

    /// Declared parameter names, in binding order.
    pub fn params(&self) -> &[String] {
        &self.params
    }

    fn param_index(&self, name: &str) -> Option<usize> {
        self.params.iter().position(|p| p == name)
    }

    /// Evaluates with `values[i]` bound to `params()[i]`.
    pub fn evaluate(&self, values: &[f64]) -> Result<f64, DomainError> {
        assert_eq!(
            values.len(),
            self.params.len(),
            "evaluate: expected {} parameter values",
            self.params.len()
        );
        eval_node(&self.node, values)
    }

    /// Evaluates with named bindings; every declared parameter must appear.
    pub fn evaluate_named(&self, bindings: &[(&str, f64)]) -> Result<f64, DomainError> {
        let values: Vec<f64> = self
            .params
            .iter()
            .map(|p| {
                bindings
                    .iter()
                    .find(|(name, _)| name == p)
                    .unwrap_or_else(|| panic!("no binding for parameter `{p}`"))
                    .1
            })
            .collect();
        eval_node(&self.node, &values)
    }

    /// Exact partial derivative with respect to `param`, constant-folded.
    pub fn differentiate(&self, param: &str) -> Result<Expr, UnknownParameter> {
        let idx = self.param_index(param).ok_or_else(|| UnknownParameter {
            name: param.to_string(),
            declared: self.params.iter().cloned().collect(),
        })?;
        Ok(Expr {
            node: fold(diff(&self.node, idx)),
            params: self.params.clone(),
        })
    }

    /// Replaces each parameter reference with the corresponding expression.
    ///
    /// All replacement expressions must share one parameter list, which
    /// becomes the list of the result. This is function composition: the
    /// result evaluates to `self` applied to the replacement values.
    pub fn substitute(&self, replacements: &[Expr]) -> Expr {
        assert_eq!(
            replacements.len(),
            self.params.len(),
            "substitute: need one replacement per parameter"
        );
        let params = replacements
            .first()
            .map(|e| e.params.clone())
            .unwrap_or_else(|| self.params.clone());
        for r in replacements {
            assert_eq!(r.params, params, "substitute: mixed parameter lists");
        }
        Expr {
            node: fold(subst_node(&self.node, replacements)),
            params,
        }
    }

    /// A numeric literal over the same parameter list as `self`.
    pub fn lift(&self, value: f64) -> Expr {
        Expr {
            node: Node::Num(value),
            params: self.params.clone(),
        }
    }

    /// A reference to a declared parameter, over the same list as `self`.
    pub fn lift_param(&self, name: &str) -> Expr {
        let idx = self
            .param_index(name)
            .unwrap_or_else(|| panic!("`{name}` is not a declared parameter"));
        Expr {
            node: Node::Param(idx),
            params: self.params.clone(),
        }
    }

    fn unary(func: Func, inner: &Expr) -> Expr {
        Expr {
            node: fold(Node::Call(func, Box::new(inner.node.clone()))),
            params: inner.params.clone(),
        }
    }

    pub fn sin(&self) -> Expr {
        Expr::unary(Func::Sin, self)
    }

    pub fn cos(&self) -> Expr {
        Expr::unary(Func::Cos, self)
    }

    pub fn tan(&self) -> Expr {
        Expr::unary(Func::Tan, self)
    }

    pub fn exp(&self) -> Expr {
        Expr::unary(Func::Exp, self)
    }

    pub fn log(&self) -> Expr {
        Expr::unary(Func::Log, self)
    }

    pub fn sqrt(&self) -> Expr {
        Expr::unary(Func::Sqrt, self)
    }

    /// `self^k` for a numeric exponent.
    pub fn pow(&self, k: f64) -> Expr {
        Expr {
            node: fold(Node::Bin(
                BinOp::Pow,
                Box::new(self.node.clone()),
                Box::new(Node::Num(k)),
            )),
            params: self.params.clone(),
        }
    }

    /// True when the tree references the parameter at `idx`.
    fn uses_param(node: &Node, idx: usize) -> bool {
        match node {
            Node::Num(_) | Node::Const(_) => false,
            Node::Param(i) => *i == idx,
            Node::Neg(x) => Expr::uses_param(x, idx),
            Node::Bin(_, a, b) => Expr::uses_param(a, idx) || Expr::uses_param(b, idx),
            Node::Call(_, x) => Expr::uses_param(x, idx),
        }
    }
}

fn bin_expr(op: BinOp, a: &Expr, b: &Expr) -> Expr {
    assert_eq!(a.params, b.params, "mixed parameter lists in expression arithmetic");
    Expr {
        node: fold(Node::Bin(
            op,
            Box::new(a.node.clone()),
            Box::new(b.node.clone()),
        )),
        params: a.params.clone(),
    }
}

impl std::ops::Add for &Expr {
    type Output = Expr;
    fn add(self, rhs: &Expr) -> Expr {
        bin_expr(BinOp::Add, self, rhs)
    }
}

impl std::ops::Sub for &Expr {
    type Output = Expr;
    fn sub(self, rhs: &Expr) -> Expr {
        bin_expr(BinOp::Sub, self, rhs)
    }
}

impl std::ops::Mul for &Expr {
    type Output = Expr;
    fn mul(self, rhs: &Expr) -> Expr {
        bin_expr(BinOp::Mul, self, rhs)
    }
}

impl std::ops::Div for &Expr {
    type Output = Expr;
    fn div(self, rhs: &Expr) -> Expr {
        bin_expr(BinOp::Div, self, rhs)
    }
}

impl std::ops::Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr {
            node: fold(Node::Neg(Box::new(self.node.clone()))),
            params: self.params.clone(),
        }
    }
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

fn domain_err(reason: DomainErrorKind, node: &Node) -> DomainError {
    DomainError {
        reason,
        node: render(node, 0),
    }
}

fn apply_bin(op: BinOp, x: f64, y: f64) -> Result<f64, DomainErrorKind> {
    match op {
        BinOp::Add => Ok(x + y),
        BinOp::Sub => Ok(x - y),
        BinOp::Mul => Ok(x * y),
        BinOp::Div => {
            if y == 0.0 {
                Err(DomainErrorKind::DivisionByZero)
            } else {
                Ok(x / y)
            }
        }
        BinOp::Pow => apply_pow(x, y),
    }
}

fn apply_pow(base: f64, exp: f64) -> Result<f64, DomainErrorKind> {
    if base < 0.0 && exp.fract() != 0.0 {
        return Err(DomainErrorKind::PowNegativeBase);
    }
    if base == 0.0 && exp < 0.0 {
        return Err(DomainErrorKind::PowZeroNegative);
    }
    Ok(base.powf(exp))
}

fn apply_func(func: Func, x: f64) -> Result<f64, DomainErrorKind> {
    match func {
        Func::Sin => Ok(x.sin()),
        Func::Cos => Ok(x.cos()),
        Func::Tan => Ok(x.tan()),
        Func::Exp => Ok(x.exp()),
        Func::Log => {
            if x <= 0.0 {
                Err(DomainErrorKind::LogNonPositive)
            } else {
                Ok(x.ln())
            }
        }
        Func::Sqrt => {
            if x < 0.0 {
                Err(DomainErrorKind::SqrtNegative)
            } else {
                Ok(x.sqrt())
            }
        }
    }
}

fn eval_node(node: &Node, values: &[f64]) -> Result<f64, DomainError> {
    match node {
        Node::Num(x) => Ok(*x),
        Node::Const(c) => Ok(c.value()),
        Node::Param(i) => Ok(values[*i]),
        Node::Neg(x) => Ok(-eval_node(x, values)?),
        Node::Bin(op, a, b) => {
            let x = eval_node(a, values)?;
            let y = eval_node(b, values)?;
            apply_bin(*op, x, y).map_err(|reason| domain_err(reason, node))
        }
        Node::Call(f, a) => {
            let x = eval_node(a, values)?;
            apply_func(*f, x).map_err(|reason| domain_err(reason, node))
        }
    }
}

// ---------------------------------------------------------------------------
// Differentiation
// ---------------------------------------------------------------------------

fn n_bin(op: BinOp, a: Node, b: Node) -> Node {
    Node::Bin(op, Box::new(a), Box::new(b))
}

fn diff(node: &Node, idx: usize) -> Node {
    match node {
        Node::Num(_) | Node::Const(_) => Node::Num(0.0),
        Node::Param(i) => Node::Num(if *i == idx { 1.0 } else { 0.0 }),
        Node::Neg(x) => Node::Neg(Box::new(diff(x, idx))),
        Node::Bin(BinOp::Add, a, b) => n_bin(BinOp::Add, diff(a, idx), diff(b, idx)),
        Node::Bin(BinOp::Sub, a, b) => n_bin(BinOp::Sub, diff(a, idx), diff(b, idx)),
        Node::Bin(BinOp::Mul, a, b) => n_bin(
            BinOp::Add,
            n_bin(BinOp::Mul, diff(a, idx), (**b).clone()),
            n_bin(BinOp::Mul, (**a).clone(), diff(b, idx)),
        ),
        Node::Bin(BinOp::Div, a, b) => n_bin(
            BinOp::Div,
            n_bin(
                BinOp::Sub,
                n_bin(BinOp::Mul, diff(a, idx), (**b).clone()),
                n_bin(BinOp::Mul, (**a).clone(), diff(b, idx)),
            ),
            n_bin(BinOp::Pow, (**b).clone(), Node::Num(2.0)),
        ),
        Node::Bin(BinOp::Pow, base, exp) => diff_pow(base, exp, idx),
        Node::Call(f, a) => {
            let inner = diff(a, idx);
            let outer = match f {
                Func::Sin => Node::Call(Func::Cos, a.clone()),
                Func::Cos => Node::Neg(Box::new(Node::Call(Func::Sin, a.clone()))),
                // d tan = 1 / cos²
                Func::Tan => n_bin(
                    BinOp::Div,
                    Node::Num(1.0),
                    n_bin(BinOp::Pow, Node::Call(Func::Cos, a.clone()), Node::Num(2.0)),
                ),
                Func::Exp => Node::Call(Func::Exp, a.clone()),
                // d log = 1 / x
                Func::Log => n_bin(BinOp::Div, Node::Num(1.0), (**a).clone()),
                // d sqrt = 1 / (2 sqrt x)
                Func::Sqrt => n_bin(
                    BinOp::Div,
                    Node::Num(1.0),
                    n_bin(
                        BinOp::Mul,
                        Node::Num(2.0),
                        Node::Call(Func::Sqrt, a.clone()),
                    ),
                ),
            };
            n_bin(BinOp::Mul, outer, inner)
        }
    }
}

fn diff_pow(base: &Node, exp: &Node, idx: usize) -> Node {
    let base_uses = Expr::uses_param(base, idx);
    let exp_uses = Expr::uses_param(exp, idx);
    if !exp_uses {
        if !base_uses {
            return Node::Num(0.0);
        }
        // (f^g)' = g · f^(g−1) · f'  — valid for every point where f^g is
        // differentiable, including negative bases with integer exponents.
        return n_bin(
            BinOp::Mul,
            n_bin(
                BinOp::Mul,
                exp.clone(),
                n_bin(
                    BinOp::Pow,
                    base.clone(),
                    n_bin(BinOp::Sub, exp.clone(), Node::Num(1.0)),
                ),
            ),
            diff(base, idx),
        );
    }
    if !base_uses {
        // (a^g)' = a^g · log(a) · g'
        return n_bin(
            BinOp::Mul,
            n_bin(
                BinOp::Mul,
                n_bin(BinOp::Pow, base.clone(), exp.clone()),
                Node::Call(Func::Log, Box::new(base.clone())),
            ),
            diff(exp, idx),
        );
    }
    // General case: f^g · (g' log f + g f' / f), requires f > 0.
    n_bin(
        BinOp::Mul,
        n_bin(BinOp::Pow, base.clone(), exp.clone()),
        n_bin(
            BinOp::Add,
            n_bin(
                BinOp::Mul,
                diff(exp, idx),
                Node::Call(Func::Log, Box::new(base.clone())),
            ),
            n_bin(
                BinOp::Div,
                n_bin(BinOp::Mul, exp.clone(), diff(base, idx)),
                base.clone(),
            ),
        ),
    )
}

// ---------------------------------------------------------------------------
// Constant folding
// ---------------------------------------------------------------------------

fn is_num(node: &Node, v: f64) -> bool {
    matches!(node, Node::Num(x) if *x == v)
}

/// Bottom-up constant folding. Numeric subtrees are collapsed when the
/// operation is defined and finite; the usual 0/1 identities are applied so
/// derivative trees stay compact. No other rewriting happens here.
fn fold(node: Node) -> Node {
    match node {
        Node::Num(_) | Node::Const(_) | Node::Param(_) => node,
        Node::Neg(x) => {
            let x = fold(*x);
            match x {
                Node::Num(v) => Node::Num(-v),
                Node::Neg(inner) => *inner,
                other => Node::Neg(Box::new(other)),
            }
        }
        Node::Call(f, a) => {
            let a = fold(*a);
            if let Node::Num(v) = a {
                if let Ok(r) = apply_func(f, v) {
                    if r.is_finite() {
                        return Node::Num(r);
                    }
                }
            }
            Node::Call(f, Box::new(a))
        }
        Node::Bin(op, a, b) => {
            let a = fold(*a);
            let b = fold(*b);
            if let (Node::Num(x), Node::Num(y)) = (&a, &b) {
                if let Ok(r) = apply_bin(op, *x, *y) {
                    if r.is_finite() {
                        return Node::Num(r);
                    }
                }
            }
            match op {
                BinOp::Add if is_num(&a, 0.0) => return b,
                BinOp::Add if is_num(&b, 0.0) => return a,
                BinOp::Sub if is_num(&b, 0.0) => return a,
                BinOp::Sub if is_num(&a, 0.0) => return fold(Node::Neg(Box::new(b))),
                BinOp::Mul if is_num(&a, 0.0) || is_num(&b, 0.0) => return Node::Num(0.0),
                BinOp::Mul if is_num(&a, 1.0) => return b,
                BinOp::Mul if is_num(&b, 1.0) => return a,
                BinOp::Div if is_num(&b, 1.0) => return a,
                BinOp::Pow if is_num(&b, 1.0) => return a,
                _ => {}
            }
            Node::Bin(op, Box::new(a), Box::new(b))
        }
    }
}

// ---------------------------------------------------------------------------
// Printing
// ---------------------------------------------------------------------------

// Binding strength used when deciding parentheses; atoms are tightest.
fn precedence(node: &Node) -> u8 {
    match node {
        Node::Bin(BinOp::Add | BinOp::Sub, ..) => 1,
        Node::Bin(BinOp::Mul | BinOp::Div, ..) => 2,
        Node::Neg(_) => 3,
        Node::Bin(BinOp::Pow, ..) => 4,
        Node::Num(_) | Node::Const(_) | Node::Param(_) | Node::Call(..) => 5,
    }
}

/// Renders a node so that re-parsing reproduces the same tree shape, except
/// that a negative literal comes back as a negated positive one (identical
/// under evaluation).
fn render(node: &Node, _depth: usize) -> String {
    let mut out = String::new();
    write_node(&mut out, node, None);
    out
}

fn write_child(out: &mut String, child: &Node, min_prec: u8, params: Option<&[String]>) {
    if precedence(child) < min_prec {
        out.push('(');
        write_node(out, child, params);
        out.push(')');
    } else {
        write_node(out, child, params);
    }
}

fn write_node(out: &mut String, node: &Node, params: Option<&[String]>) {
    match node {
        Node::Num(x) => {
            // `{:?}` keeps the shortest representation that parses back to
            // the identical f64.
            out.push_str(&format!("{x:?}"));
        }
        Node::Const(c) => out.push_str(c.name()),
        Node::Param(i) => match params {
            Some(names) => out.push_str(&names[*i]),
            None => out.push_str(&format!("#{i}")),
        },
        Node::Neg(x) => {
            out.push('-');
            write_child(out, x, 3, params);
        }
        Node::Bin(op, a, b) => {
            let (sym, own, left_min, right_min) = match op {
                BinOp::Add => (" + ", 1, 1, 2),
                BinOp::Sub => (" - ", 1, 1, 2),
                BinOp::Mul => (" * ", 2, 2, 3),
                BinOp::Div => (" / ", 2, 2, 3),
                // right-associative; parenthesize a Pow on the left
                BinOp::Pow => ("^", 4, 5, 3),
            };
            let _ = own;
            write_child(out, a, left_min, params);
            out.push_str(sym);
            write_child(out, b, right_min, params);
        }
        Node::Call(f, a) => {
            out.push_str(f.name());
            out.push('(');
            write_node(out, a, params);
            out.push(')');
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        write_node(&mut out, &self.node, Some(&self.params));
        f.write_str(&out)
    }
}

// ---------------------------------------------------------------------------
// Substitution
// ---------------------------------------------------------------------------

fn subst_node(node: &Node, replacements: &[Expr]) -> Node {
    match node {
        Node::Num(_) | Node::Const(_) => node.clone(),
        Node::Param(i) => replacements[*i].node.clone(),
        Node::Neg(x) => Node::Neg(Box::new(subst_node(x, replacements))),
        Node::Bin(op, a, b) => Node::Bin(
            *op,
            Box::new(subst_node(a, replacements)),
            Box::new(subst_node(b, replacements)),
        ),
        Node::Call(f, a) => Node::Call(*f, Box::new(subst_node(a, replacements))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn eval1(text: &str, u: f64) -> f64 {
        Expr::parse(text, &["u"]).unwrap().evaluate(&[u]).unwrap()
    }

    #[test]
    fn pythagorean_identity() {
        assert!((eval1("sin(u)^2 + cos(u)^2", 0.37) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn sample_curve_coordinate() {
        // (3/5)·sin(π/2) = 0.6
        assert_eq!(eval1("(3/5)*sin(u)", FRAC_PI_2), 3.0 / 5.0 * (FRAC_PI_2).sin());
        assert!((eval1("(3/5)*sin(u)", FRAC_PI_2) - 0.6).abs() < 1e-15);
    }

    #[test]
    fn named_constants() {
        let e = Expr::parse("pi", &[]).unwrap();
        assert_eq!(e.evaluate(&[]).unwrap(), PI);
        let e = Expr::parse("pi/6", &[]).unwrap();
        assert_eq!(e.evaluate(&[]).unwrap(), PI / 6.0);
        assert_eq!(eval1("1 + cos(u)", 0.0), 2.0);
    }

    #[test]
    fn domain_errors() {
        let e = Expr::parse("sqrt(u)", &["u"]).unwrap();
        let err = e.evaluate(&[-1.0]).unwrap_err();
        assert_eq!(err.reason, DomainErrorKind::SqrtNegative);
        let e = Expr::parse("1/u", &["u"]).unwrap();
        assert_eq!(
            e.evaluate(&[0.0]).unwrap_err().reason,
            DomainErrorKind::DivisionByZero
        );
        let e = Expr::parse("log(u)", &["u"]).unwrap();
        assert_eq!(
            e.evaluate(&[0.0]).unwrap_err().reason,
            DomainErrorKind::LogNonPositive
        );
        let e = Expr::parse("u^0.5", &["u"]).unwrap();
        assert_eq!(
            e.evaluate(&[-2.0]).unwrap_err().reason,
            DomainErrorKind::PowNegativeBase
        );
        // Integer exponent on a negative base is fine.
        assert_eq!(eval1("u^3", -2.0), -8.0);
    }

    #[test]
    fn derivative_of_sine() {
        let e = Expr::parse("sin(u)", &["u"]).unwrap();
        let d = e.differentiate("u").unwrap();
        let h = 1e-6;
        let fd = (e.evaluate(&[1.0 + h]).unwrap() - e.evaluate(&[1.0 - h]).unwrap()) / (2.0 * h);
        let exact = d.evaluate(&[1.0]).unwrap();
        assert!((exact - 1.0f64.cos()).abs() < 1e-15);
        assert!(((exact - fd) / exact).abs() < 1e-8);
    }

    #[test]
    fn derivative_of_constant_is_zero() {
        let e = Expr::parse("3.25", &["u"]).unwrap();
        let d = e.differentiate("u").unwrap();
        assert_eq!(d.evaluate(&[17.0]).unwrap(), 0.0);
        assert_eq!(d.to_string(), "0.0");
    }

    #[test]
    fn derivative_of_sample_coordinate_at_zero() {
        let e = Expr::parse("(3/5)*sin(u)", &["u"]).unwrap();
        let d = e.differentiate("u").unwrap();
        assert!((d.evaluate(&[0.0]).unwrap() - 0.6).abs() < 1e-15);
    }

    #[test]
    fn unknown_parameter_rejected() {
        let e = Expr::parse("sin(u)", &["u"]).unwrap();
        let err = e.differentiate("v").unwrap_err();
        assert_eq!(err.name, "v");
    }

    #[test]
    fn unary_minus_binds_looser_than_pow() {
        // -u^2 is -(u²), not (−u)².
        assert_eq!(eval1("-u^2", 2.0), -4.0);
        assert_eq!(eval1("(-u)^2", 2.0), 4.0);
        assert_eq!(eval1("2^-u", 3.0), 0.125);
        // ^ is right-associative.
        assert_eq!(eval1("2^u^2", 1.5), 2.0f64.powf(1.5f64.powf(2.0)));
    }

    #[test]
    fn substitution_composes() {
        let e = Expr::parse("sin(u) + u^2", &["u"]).unwrap();
        let half_w = Expr::parse("2*w", &["w"]).unwrap();
        let c = e.substitute(&[half_w]);
        assert_eq!(c.params(), &["w".to_string()]);
        let w = 0.7;
        assert!((c.evaluate(&[w]).unwrap() - ((2.0 * w).sin() + (2.0 * w) * (2.0 * w))).abs() < 1e-15);
    }

    #[test]
    fn builder_arithmetic() {
        let u = Expr::parse("u", &["u"]).unwrap();
        let two = u.lift(2.0);
        let e = &(&u * &u) + &(&two * &u.sin());
        let x = 0.9;
        assert!((e.evaluate(&[x]).unwrap() - (x * x + 2.0 * x.sin())).abs() < 1e-15);
    }

    #[test]
    fn display_round_trip_shapewise() {
        let texts = [
            "u + v*2 - 3/u",
            "-u^2 + (u - v)*(u + v)",
            "sin(u)*cos(v) / (1 + u^2)",
            "2^-u^3",
            "sqrt(u^2 + 1) - exp(-u)",
        ];
        for t in texts {
            let e = Expr::parse(t, &["u", "v"]).unwrap();
            let round = Expr::parse(&e.to_string(), &["u", "v"]).unwrap();
            for &(a, b) in &[(0.3, 0.8), (1.7, -0.2), (2.0, 2.0)] {
                let x = e.evaluate(&[a, b]);
                let y = round.evaluate(&[a, b]);
                match (x, y) {
                    (Ok(x), Ok(y)) => assert_eq!(x.to_bits(), y.to_bits(), "{t}"),
                    (Err(_), Err(_)) => {}
                    other => panic!("round-trip changed error behaviour for {t}: {other:?}"),
                }
            }
        }
    }
}
