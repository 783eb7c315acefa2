//! Closed-form scalar expressions over four chart coordinates and named
//! parameters.
//!
//! Nodes are reference counted, so derivatives and substitutions share
//! structure with their sources. Evaluation is memoised per node, which keeps
//! heavily shared trees (derivatives of derivatives, pulled-back metrics)
//! linear in the number of distinct nodes.

mod parse;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::jet::{Jet2, C, DIM};

pub use parse::parse;

/// Parameter bindings.
pub type Params = BTreeMap<String, C>;

/// Magnitude below which a divisor or a ln/sqrt argument counts as zero.
pub const SINGULAR_EPS: f64 = 1e-12;

#[derive(Debug)]
pub enum Node {
    Const(C),
    Coord(usize),
    Param(String),
    Neg(Expr),
    Exp(Expr),
    Ln(Expr),
    Sqrt(Expr),
    Sin(Expr),
    Cos(Expr),
    Add(Expr, Expr),
    Sub(Expr, Expr),
    Mul(Expr, Expr),
    Div(Expr, Expr),
    Pow(Expr, Expr),
}

#[derive(Clone, Debug)]
pub struct Expr(Arc<Node>);

fn real(x: f64) -> C {
    Complex64::new(x, 0.0)
}

impl Expr {
    fn new(n: Node) -> Self {
        Expr(Arc::new(n))
    }

    pub fn node(&self) -> &Node {
        &self.0
    }

    fn key(&self) -> usize {
        Arc::as_ptr(&self.0) as usize
    }

    pub fn ptr_eq(&self, o: &Expr) -> bool {
        Arc::ptr_eq(&self.0, &o.0)
    }

    pub fn constant(c: C) -> Self {
        Self::new(Node::Const(c))
    }

    pub fn c(x: f64) -> Self {
        Self::constant(real(x))
    }

    pub fn zero() -> Self {
        Self::c(0.0)
    }

    pub fn one() -> Self {
        Self::c(1.0)
    }

    /// The imaginary unit.
    pub fn i() -> Self {
        Self::constant(Complex64::new(0.0, 1.0))
    }

    pub fn coord(k: usize) -> Self {
        assert!(k < DIM, "coordinate index {k} out of range");
        Self::new(Node::Coord(k))
    }

    pub fn param(name: &str) -> Self {
        Self::new(Node::Param(name.to_string()))
    }

    pub fn as_const(&self) -> Option<C> {
        match self.node() {
            Node::Const(c) => Some(*c),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_const().is_some_and(|c| c == real(0.0))
    }

    pub fn is_one(&self) -> bool {
        self.as_const().is_some_and(|c| c == real(1.0))
    }

    pub fn exp(&self) -> Expr {
        match self.node() {
            Node::Const(c) => Expr::constant(c.exp()),
            Node::Ln(a) => a.clone(),
            _ => Expr::new(Node::Exp(self.clone())),
        }
    }

    pub fn ln(&self) -> Expr {
        match self.node() {
            Node::Const(c) if *c == real(1.0) => Expr::zero(),
            _ => Expr::new(Node::Ln(self.clone())),
        }
    }

    pub fn sqrt(&self) -> Expr {
        match self.node() {
            Node::Const(c) if c.im == 0.0 && c.re >= 0.0 => Expr::c(c.re.sqrt()),
            _ => Expr::new(Node::Sqrt(self.clone())),
        }
    }

    pub fn sin(&self) -> Expr {
        match self.node() {
            Node::Const(c) => Expr::constant(c.sin()),
            _ => Expr::new(Node::Sin(self.clone())),
        }
    }

    pub fn cos(&self) -> Expr {
        match self.node() {
            Node::Const(c) => Expr::constant(c.cos()),
            _ => Expr::new(Node::Cos(self.clone())),
        }
    }

    pub fn pow(&self, e: &Expr) -> Expr {
        if e.is_zero() {
            return Expr::one();
        }
        if e.is_one() {
            return self.clone();
        }
        if let (Some(a), Some(b)) = (self.as_const(), e.as_const()) {
            if let Some(n) = small_int(b) {
                return Expr::constant(a.powi(n));
            }
        }
        Expr::new(Node::Pow(self.clone(), e.clone()))
    }

    pub fn powi(&self, n: i32) -> Expr {
        self.pow(&Expr::c(n as f64))
    }

    pub fn square(&self) -> Expr {
        self.powi(2)
    }

    pub fn recip(&self) -> Expr {
        Expr::one() / self.clone()
    }

    /// Partial derivative with respect to coordinate `k`.
    pub fn diff(&self, k: usize) -> Expr {
        let mut memo = HashMap::new();
        self.diff_memo(k, &mut memo)
    }

    fn diff_memo(&self, k: usize, memo: &mut HashMap<usize, Expr>) -> Expr {
        if let Some(d) = memo.get(&self.key()) {
            return d.clone();
        }
        let d = match self.node() {
            Node::Const(_) | Node::Param(_) => Expr::zero(),
            Node::Coord(j) => {
                if *j == k {
                    Expr::one()
                } else {
                    Expr::zero()
                }
            }
            Node::Neg(a) => -a.diff_memo(k, memo),
            Node::Exp(a) => self.clone() * a.diff_memo(k, memo),
            Node::Ln(a) => a.diff_memo(k, memo) / a.clone(),
            Node::Sqrt(a) => a.diff_memo(k, memo) / (Expr::c(2.0) * self.clone()),
            Node::Sin(a) => a.cos() * a.diff_memo(k, memo),
            Node::Cos(a) => -(a.sin() * a.diff_memo(k, memo)),
            Node::Add(a, b) => a.diff_memo(k, memo) + b.diff_memo(k, memo),
            Node::Sub(a, b) => a.diff_memo(k, memo) - b.diff_memo(k, memo),
            Node::Mul(a, b) => {
                a.diff_memo(k, memo) * b.clone() + a.clone() * b.diff_memo(k, memo)
            }
            Node::Div(a, b) => {
                let da = a.diff_memo(k, memo);
                let db = b.diff_memo(k, memo);
                da / b.clone() - a.clone() * db / b.square()
            }
            Node::Pow(a, b) => {
                let da = a.diff_memo(k, memo);
                if let Some(n) = b.as_const() {
                    Expr::constant(n) * a.pow(&Expr::constant(n - 1.0)) * da
                } else {
                    let db = b.diff_memo(k, memo);
                    self.clone() * (db * a.ln() + b.clone() * da / a.clone())
                }
            }
        };
        memo.insert(self.key(), d.clone());
        d
    }

    /// Replaces every coordinate `x_k` by `map[k]`.
    pub fn subst_coords(&self, map: &[Expr; DIM]) -> Expr {
        let mut memo = HashMap::new();
        self.rebuild(&mut memo, &|n| match n {
            Node::Coord(k) => Some(map[*k].clone()),
            _ => None,
        })
    }

    /// Replaces the named parameters; others are left untouched.
    pub fn subst_params(&self, map: &BTreeMap<String, Expr>) -> Expr {
        let mut memo = HashMap::new();
        self.rebuild(&mut memo, &|n| match n {
            Node::Param(p) => map.get(p).cloned(),
            _ => None,
        })
    }

    fn rebuild(
        &self,
        memo: &mut HashMap<usize, Expr>,
        leaf: &dyn Fn(&Node) -> Option<Expr>,
    ) -> Expr {
        if let Some(e) = memo.get(&self.key()) {
            return e.clone();
        }
        let out = match self.node() {
            Node::Const(_) | Node::Coord(_) | Node::Param(_) => {
                leaf(self.node()).unwrap_or_else(|| self.clone())
            }
            Node::Neg(a) => -a.rebuild(memo, leaf),
            Node::Exp(a) => a.rebuild(memo, leaf).exp(),
            Node::Ln(a) => a.rebuild(memo, leaf).ln(),
            Node::Sqrt(a) => a.rebuild(memo, leaf).sqrt(),
            Node::Sin(a) => a.rebuild(memo, leaf).sin(),
            Node::Cos(a) => a.rebuild(memo, leaf).cos(),
            Node::Add(a, b) => a.rebuild(memo, leaf) + b.rebuild(memo, leaf),
            Node::Sub(a, b) => a.rebuild(memo, leaf) - b.rebuild(memo, leaf),
            Node::Mul(a, b) => a.rebuild(memo, leaf) * b.rebuild(memo, leaf),
            Node::Div(a, b) => a.rebuild(memo, leaf) / b.rebuild(memo, leaf),
            Node::Pow(a, b) => a.rebuild(memo, leaf).pow(&b.rebuild(memo, leaf)),
        };
        memo.insert(self.key(), out.clone());
        out
    }

    fn visit(&self, seen: &mut BTreeSet<usize>, f: &mut dyn FnMut(&Node)) {
        if !seen.insert(self.key()) {
            return;
        }
        f(self.node());
        match self.node() {
            Node::Const(_) | Node::Coord(_) | Node::Param(_) => {}
            Node::Neg(a) | Node::Exp(a) | Node::Ln(a) | Node::Sqrt(a) | Node::Sin(a) | Node::Cos(a) => {
                a.visit(seen, f)
            }
            Node::Add(a, b)
            | Node::Sub(a, b)
            | Node::Mul(a, b)
            | Node::Div(a, b)
            | Node::Pow(a, b) => {
                a.visit(seen, f);
                b.visit(seen, f);
            }
        }
    }

    /// Names of all parameters referenced.
    pub fn params(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit(&mut BTreeSet::new(), &mut |n| {
            if let Node::Param(p) = n {
                out.insert(p.clone());
            }
        });
        out
    }

    pub fn depends_on(&self, k: usize) -> bool {
        let mut hit = false;
        self.visit(&mut BTreeSet::new(), &mut |n| {
            if matches!(n, Node::Coord(j) if *j == k) {
                hit = true;
            }
        });
        hit
    }

    /// Number of distinct nodes.
    pub fn size(&self) -> usize {
        let mut n = 0;
        self.visit(&mut BTreeSet::new(), &mut |_| n += 1);
        n
    }

    pub fn eval(&self, point: &[C; DIM], params: &Params) -> Result<C> {
        Evaluator::new(*point, params).value(self)
    }

    pub fn eval_jet(&self, point: &[C; DIM], params: &Params) -> Result<Jet2> {
        Evaluator::new(*point, params).jet(self)
    }

    /// Renders with the given coordinate names.
    pub fn display<'a>(&'a self, names: &'a [String; DIM]) -> Display<'a> {
        Display { expr: self, names }
    }
}

fn small_int(c: C) -> Option<i32> {
    if c.im == 0.0 && c.re.fract() == 0.0 && c.re.abs() <= 64.0 {
        Some(c.re as i32)
    } else {
        None
    }
}

fn singular(what: &str, v: C) -> Error {
    Error::SingularPoint(format!("{what} argument {v} vanishes"))
}

/// Evaluates many expressions at one point, sharing work across common
/// subtrees.
pub struct Evaluator<'a> {
    point: [C; DIM],
    params: &'a Params,
    // entries hold their node so keys stay unique while cached
    jets: HashMap<usize, (Expr, Jet2)>,
    values: HashMap<usize, (Expr, C)>,
}

impl<'a> Evaluator<'a> {
    pub fn new(point: [C; DIM], params: &'a Params) -> Self {
        Self { point, params, jets: HashMap::new(), values: HashMap::new() }
    }

    fn lookup(&self, p: &str) -> Result<C> {
        self.params.get(p).copied().ok_or_else(|| Error::UnboundParameter(p.to_string()))
    }

    pub fn value(&mut self, e: &Expr) -> Result<C> {
        if let Some((_, v)) = self.values.get(&e.key()) {
            return Ok(*v);
        }
        let v = match e.node() {
            Node::Const(c) => *c,
            Node::Coord(k) => self.point[*k],
            Node::Param(p) => self.lookup(p)?,
            Node::Neg(a) => -self.value(a)?,
            Node::Exp(a) => self.value(a)?.exp(),
            Node::Sin(a) => self.value(a)?.sin(),
            Node::Cos(a) => self.value(a)?.cos(),
            Node::Ln(a) => {
                let u = self.value(a)?;
                if u.norm() < SINGULAR_EPS {
                    return Err(singular("ln", u));
                }
                u.ln()
            }
            Node::Sqrt(a) => {
                let u = self.value(a)?;
                if u.norm() < SINGULAR_EPS {
                    return Err(singular("sqrt", u));
                }
                u.sqrt()
            }
            Node::Add(a, b) => self.value(a)? + self.value(b)?,
            Node::Sub(a, b) => self.value(a)? - self.value(b)?,
            Node::Mul(a, b) => self.value(a)? * self.value(b)?,
            Node::Div(a, b) => {
                let d = self.value(b)?;
                if d.norm() < SINGULAR_EPS {
                    return Err(singular("divisor", d));
                }
                self.value(a)? / d
            }
            Node::Pow(a, b) => {
                let u = self.value(a)?;
                let x = self.value(b)?;
                match small_int(x) {
                    Some(n) if n >= 0 => u.powi(n),
                    Some(n) => {
                        if u.norm() < SINGULAR_EPS {
                            return Err(singular("power base", u));
                        }
                        u.powi(n)
                    }
                    None => {
                        if u.norm() < SINGULAR_EPS {
                            return Err(singular("power base", u));
                        }
                        u.powc(x)
                    }
                }
            }
        };
        self.values.insert(e.key(), (e.clone(), v));
        Ok(v)
    }

    pub fn jet(&mut self, e: &Expr) -> Result<Jet2> {
        if let Some((_, j)) = self.jets.get(&e.key()) {
            return Ok(*j);
        }
        let j = match e.node() {
            Node::Const(c) => Jet2::constant(*c),
            Node::Coord(k) => Jet2::variable(*k, self.point[*k]),
            Node::Param(p) => Jet2::constant(self.lookup(p)?),
            Node::Neg(a) => -&self.jet(a)?,
            Node::Exp(a) => self.jet(a)?.exp(),
            Node::Sin(a) => {
                let u = self.jet(a)?;
                let (s, c) = (u.value.sin(), u.value.cos());
                u.chain(s, c, -s)
            }
            Node::Cos(a) => {
                let u = self.jet(a)?;
                let (s, c) = (u.value.sin(), u.value.cos());
                u.chain(c, -s, -c)
            }
            Node::Ln(a) => {
                let u = self.jet(a)?;
                if u.value.norm() < SINGULAR_EPS {
                    return Err(singular("ln", u.value));
                }
                u.ln()
            }
            Node::Sqrt(a) => {
                let u = self.jet(a)?;
                if u.value.norm() < SINGULAR_EPS {
                    return Err(singular("sqrt", u.value));
                }
                u.sqrt()
            }
            Node::Add(a, b) => &self.jet(a)? + &self.jet(b)?,
            Node::Sub(a, b) => &self.jet(a)? - &self.jet(b)?,
            Node::Mul(a, b) => &self.jet(a)? * &self.jet(b)?,
            Node::Div(a, b) => {
                let d = self.jet(b)?;
                if d.value.norm() < SINGULAR_EPS {
                    return Err(singular("divisor", d.value));
                }
                &self.jet(a)? / &d
            }
            Node::Pow(a, b) => {
                let u = self.jet(a)?;
                match b.as_const() {
                    Some(x) => match small_int(x) {
                        Some(n) if n >= 0 => u.powi(n),
                        _ => {
                            if u.value.norm() < SINGULAR_EPS {
                                return Err(singular("power base", u.value));
                            }
                            match small_int(x) {
                                Some(n) => u.powi(n),
                                None => {
                                    let v = u.value;
                                    u.chain(
                                        v.powc(x),
                                        x * v.powc(x - 1.0),
                                        x * (x - 1.0) * v.powc(x - 2.0),
                                    )
                                }
                            }
                        }
                    },
                    None => {
                        if u.value.norm() < SINGULAR_EPS {
                            return Err(singular("power base", u.value));
                        }
                        let x = self.jet(b)?;
                        u.powj(&x)
                    }
                }
            }
        };
        self.jets.insert(e.key(), (e.clone(), j));
        Ok(j)
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $f:ident) => {
        impl std::ops::$tr for Expr {
            type Output = Expr;
            fn $m(self, o: Expr) -> Expr {
                $f(self, o)
            }
        }
        impl std::ops::$tr<&Expr> for &Expr {
            type Output = Expr;
            fn $m(self, o: &Expr) -> Expr {
                $f(self.clone(), o.clone())
            }
        }
        impl std::ops::$tr<f64> for Expr {
            type Output = Expr;
            fn $m(self, o: f64) -> Expr {
                $f(self, Expr::c(o))
            }
        }
        impl std::ops::$tr<Expr> for f64 {
            type Output = Expr;
            fn $m(self, o: Expr) -> Expr {
                $f(Expr::c(self), o)
            }
        }
    };
}

fn add(a: Expr, b: Expr) -> Expr {
    match (a.as_const(), b.as_const()) {
        (Some(x), Some(y)) => Expr::constant(x + y),
        (Some(x), _) if x == real(0.0) => b,
        (_, Some(y)) if y == real(0.0) => a,
        _ => Expr::new(Node::Add(a, b)),
    }
}

fn sub(a: Expr, b: Expr) -> Expr {
    if a.ptr_eq(&b) {
        return Expr::zero();
    }
    match (a.as_const(), b.as_const()) {
        (Some(x), Some(y)) => Expr::constant(x - y),
        (Some(x), _) if x == real(0.0) => -b,
        (_, Some(y)) if y == real(0.0) => a,
        _ => Expr::new(Node::Sub(a, b)),
    }
}

fn mul(a: Expr, b: Expr) -> Expr {
    match (a.as_const(), b.as_const()) {
        (Some(x), Some(y)) => Expr::constant(x * y),
        (Some(x), _) | (_, Some(x)) if x == real(0.0) => Expr::zero(),
        (Some(x), _) if x == real(1.0) => b,
        (_, Some(y)) if y == real(1.0) => a,
        (Some(x), _) if x == real(-1.0) => -b,
        (_, Some(y)) if y == real(-1.0) => -a,
        (Some(x), _) => match b.node() {
            Node::Mul(p, q) if p.as_const().is_some() => {
                mul(Expr::constant(x * p.as_const().unwrap()), q.clone())
            }
            _ => Expr::new(Node::Mul(a, b)),
        },
        (None, Some(_)) => mul(b, a),
        _ => Expr::new(Node::Mul(a, b)),
    }
}

fn div(a: Expr, b: Expr) -> Expr {
    match (a.as_const(), b.as_const()) {
        (Some(x), Some(y)) if y != real(0.0) => Expr::constant(x / y),
        (Some(x), _) if x == real(0.0) => Expr::zero(),
        (_, Some(y)) if y == real(1.0) => a,
        (_, Some(y)) if y == real(-1.0) => -a,
        _ => Expr::new(Node::Div(a, b)),
    }
}

binop!(Add, add, add);
binop!(Sub, sub, sub);
binop!(Mul, mul, mul);
binop!(Div, div, div);

impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        match self.node() {
            Node::Const(c) => Expr::constant(-*c),
            Node::Neg(a) => a.clone(),
            _ => Expr::new(Node::Neg(self)),
        }
    }
}

impl std::ops::Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        -self.clone()
    }
}

/// Formatter produced by [`Expr::display`].
pub struct Display<'a> {
    expr: &'a Expr,
    names: &'a [String; DIM],
}

// Precedence levels: sum 1, product 2, unary minus 3, power 4, atom 5.
fn prec(e: &Expr) -> u8 {
    match e.node() {
        Node::Add(..) | Node::Sub(..) => 1,
        Node::Mul(..) | Node::Div(..) => 2,
        Node::Neg(_) => 3,
        Node::Pow(..) => 4,
        Node::Const(c) => {
            if c.im != 0.0 {
                5
            } else if c.re.is_sign_negative() {
                3
            } else {
                5
            }
        }
        _ => 5,
    }
}

fn fmt_f64(x: f64) -> String {
    let s = format!("{x:?}");
    if s.contains('e') && !s.contains('.') {
        s.replacen('e', ".0e", 1)
    } else {
        s
    }
}

impl Display<'_> {
    fn write(&self, e: &Expr, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let wrap = |f: &mut fmt::Formatter<'_>, child: &Expr, min: u8| -> fmt::Result {
            if prec(child) < min {
                write!(f, "(")?;
                self.write(child, f)?;
                write!(f, ")")
            } else {
                self.write(child, f)
            }
        };
        match e.node() {
            Node::Const(c) => {
                if c.im == 0.0 {
                    write!(f, "{}", fmt_f64(c.re))
                } else if c.re == 0.0 {
                    write!(f, "({}*I)", fmt_f64(c.im))
                } else {
                    write!(f, "({}+{}*I)", fmt_f64(c.re), fmt_f64(c.im))
                }
            }
            Node::Coord(k) => write!(f, "{}", self.names[*k]),
            Node::Param(p) => write!(f, "{p}"),
            Node::Neg(a) => {
                write!(f, "-")?;
                wrap(f, a, 3)
            }
            Node::Exp(a) | Node::Ln(a) | Node::Sqrt(a) | Node::Sin(a) | Node::Cos(a) => {
                let name = match e.node() {
                    Node::Exp(_) => "exp",
                    Node::Ln(_) => "ln",
                    Node::Sin(_) => "sin",
                    Node::Cos(_) => "cos",
                    _ => "sqrt",
                };
                write!(f, "{name}(")?;
                self.write(a, f)?;
                write!(f, ")")
            }
            Node::Add(a, b) | Node::Sub(a, b) => {
                wrap(f, a, 1)?;
                write!(f, "{}", if matches!(e.node(), Node::Add(..)) { " + " } else { " - " })?;
                wrap(f, b, 2)
            }
            Node::Mul(a, b) | Node::Div(a, b) => {
                wrap(f, a, 2)?;
                write!(f, "{}", if matches!(e.node(), Node::Mul(..)) { "*" } else { "/" })?;
                wrap(f, b, 3)
            }
            Node::Pow(a, b) => {
                wrap(f, a, 5)?;
                write!(f, "^")?;
                wrap(f, b, 3)
            }
        }
    }
}

impl fmt::Display for Display<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write(self.expr, f)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = ["x0", "x1", "x2", "x3"].map(String::from);
        write!(f, "{}", self.display(&names))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(a: [f64; 4]) -> [C; 4] {
        a.map(real)
    }

    #[test]
    fn square_jet() {
        let x = Expr::coord(0);
        let j = (x.clone() * x).eval_jet(&pt([3.0, 0.0, 0.0, 0.0]), &Params::new()).unwrap();
        assert_eq!(j.value, real(9.0));
        assert_eq!(j.d(0), real(6.0));
        assert_eq!(j.dd(0, 0), real(2.0));
        for k in 1..4 {
            assert_eq!(j.d(k), real(0.0));
        }
    }

    #[test]
    fn exp_jet() {
        let j = Expr::coord(1).exp().eval_jet(&pt([0.0, 1.0, 0.0, 0.0]), &Params::new()).unwrap();
        let e = std::f64::consts::E;
        assert!((j.value - real(e)).norm() < 1e-15);
        assert!((j.d(1) - real(e)).norm() < 1e-15);
        assert!((j.dd(1, 1) - real(e)).norm() < 1e-15);
    }

    #[test]
    fn symbolic_diff_matches_jet() {
        let x = Expr::coord(0);
        let y = Expr::coord(3);
        let e = (x.clone() * y.clone()).ln() * x.clone().sqrt() / (y.clone() + 1.0);
        let p = pt([2.0, 0.0, 0.0, 5.0]);
        let j = e.eval_jet(&p, &Params::new()).unwrap();
        for k in 0..4 {
            let d = e.diff(k).eval(&p, &Params::new()).unwrap();
            assert!((d - j.d(k)).norm() < 1e-13);
            for l in 0..4 {
                let dd = e.diff(k).diff(l).eval(&p, &Params::new()).unwrap();
                assert!((dd - j.dd(k, l)).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn unbound_and_singular() {
        let e = Expr::param("Lambda") * Expr::coord(0);
        assert_eq!(
            e.eval(&pt([1.0; 4]), &Params::new()),
            Err(Error::UnboundParameter("Lambda".into()))
        );
        let d = Expr::one() / Expr::coord(0);
        assert!(matches!(d.eval_jet(&pt([0.0; 4]), &Params::new()), Err(Error::SingularPoint(_))));
    }

    #[test]
    fn substitution() {
        let e = Expr::coord(0) * Expr::param("a");
        let map = [Expr::coord(1) + 1.0, Expr::zero(), Expr::zero(), Expr::zero()];
        let s = e.subst_coords(&map);
        let mut p = Params::new();
        p.insert("a".into(), real(2.0));
        assert_eq!(s.eval(&pt([0.0, 4.0, 0.0, 0.0]), &p).unwrap(), real(10.0));
        assert!(!s.depends_on(0));
        assert!(s.depends_on(1));
    }

    #[test]
    fn simplification() {
        let x = Expr::coord(2);
        assert!((x.clone() * 0.0).is_zero());
        assert!((x.clone() - x.clone()).is_zero());
        assert!(x.clone().ln().exp().ptr_eq(&x));
        assert_eq!((Expr::c(2.0) * (Expr::c(3.0) * x.clone())).size(), 3);
    }
}
