//! Test functions: smooth scalar fields given by a small expression language.
//!
//! Expressions are prefix JSON arrays, e.g.
//! `["*", "x", ["chi", 1.5, 2.5, "r"]]` for `x · χ_{[1.5, 2.5]}(|z|)`.
//!
//! | form | meaning |
//! |------|---------|
//! | number | constant |
//! | `"x"`, `"y"`, `"r"` (or `["r"]`) | coordinates, `r = |z|` |
//! | `["+", e, …]`, `["*", e, …]` | sum, product |
//! | `["-", e]`, `["-", a, b]` | negation, difference |
//! | `["^", e, k]` | integer power `k ≥ 0` |
//! | `["exp", e]` | exponential |
//! | `["chi", a, b, e]` | cutoff: 1 for `e ≤ a`, 0 for `e ≥ b`, C² quintic joint |
//!
//! `r` is not differentiable at the origin; use `x² + y²` for smooth radial
//! factors and `r` only inside `chi` with `a > 0`.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::numerics::{coordinates, Dual2, ScalarField};

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Const(f64),
    X,
    Y,
    R,
    Add(Vec<Expr>),
    Mul(Vec<Expr>),
    Neg(Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
    Exp(Box<Expr>),
    Chi { a: f64, b: f64, arg: Box<Expr> },
}

impl Expr {
    pub fn x() -> Expr {
        Expr::X
    }
    pub fn y() -> Expr {
        Expr::Y
    }
    pub fn r() -> Expr {
        Expr::R
    }
    pub fn c(v: f64) -> Expr {
        Expr::Const(v)
    }
    /// `χ_{[a,b]}(|z|)`.
    pub fn cutoff(a: f64, b: f64) -> Expr {
        Expr::Chi { a, b, arg: Box::new(Expr::R) }
    }
    pub fn exp(self) -> Expr {
        Expr::Exp(Box::new(self))
    }
    pub fn pow(self, k: u32) -> Expr {
        Expr::Pow(Box::new(self), k)
    }

    pub fn parse(v: &Value) -> Result<Expr> {
        let bad = |msg: String| Error::Expression(msg);
        match v {
            Value::Number(n) => n.as_f64().map(Expr::Const).ok_or_else(|| bad(format!("invalid number {n}"))),
            Value::String(s) => atom(s),
            Value::Array(items) => {
                let (head, rest) = items.split_first().ok_or_else(|| bad("empty expression".into()))?;
                let op = head.as_str().ok_or_else(|| bad(format!("operator must be a string, got {head}")))?;
                let args = || rest.iter().map(Expr::parse).collect::<Result<Vec<_>>>();
                match op {
                    "x" | "y" | "r" if rest.is_empty() => atom(op),
                    "+" | "*" => {
                        if rest.is_empty() {
                            return Err(bad(format!("'{op}' needs at least one argument")));
                        }
                        Ok(if op == "+" { Expr::Add(args()?) } else { Expr::Mul(args()?) })
                    }
                    "-" => match rest.len() {
                        1 => Ok(Expr::Neg(Box::new(Expr::parse(&rest[0])?))),
                        2 => Ok(Expr::Sub(Box::new(Expr::parse(&rest[0])?), Box::new(Expr::parse(&rest[1])?))),
                        k => Err(bad(format!("'-' takes one or two arguments, got {k}"))),
                    },
                    "^" => {
                        if rest.len() != 2 {
                            return Err(bad("'^' takes a base and an integer exponent".into()));
                        }
                        let k = rest[1]
                            .as_f64()
                            .filter(|k| *k >= 0.0 && k.fract() == 0.0 && *k <= 64.0)
                            .ok_or_else(|| bad(format!("exponent must be an integer in 0..=64, got {}", rest[1])))?;
                        Ok(Expr::Pow(Box::new(Expr::parse(&rest[0])?), k as u32))
                    }
                    "exp" => {
                        if rest.len() != 1 {
                            return Err(bad("'exp' takes one argument".into()));
                        }
                        Ok(Expr::Exp(Box::new(Expr::parse(&rest[0])?)))
                    }
                    "chi" => {
                        if rest.len() != 3 {
                            return Err(bad("'chi' takes a, b and an argument".into()));
                        }
                        let a = rest[0].as_f64().ok_or_else(|| bad("chi bound a must be a number".into()))?;
                        let b = rest[1].as_f64().ok_or_else(|| bad("chi bound b must be a number".into()))?;
                        if !(a < b) || !a.is_finite() || !b.is_finite() {
                            return Err(bad(format!("chi needs finite a < b, got a = {a}, b = {b}")));
                        }
                        Ok(Expr::Chi { a, b, arg: Box::new(Expr::parse(&rest[2])?) })
                    }
                    other => Err(bad(format!("unknown operator '{other}'"))),
                }
            }
            other => Err(bad(format!("unexpected JSON value {other}"))),
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            Expr::Const(v) => json!(v),
            Expr::X => json!("x"),
            Expr::Y => json!("y"),
            Expr::R => json!("r"),
            Expr::Add(es) => Value::Array(std::iter::once(json!("+")).chain(es.iter().map(Expr::to_json)).collect()),
            Expr::Mul(es) => Value::Array(std::iter::once(json!("*")).chain(es.iter().map(Expr::to_json)).collect()),
            Expr::Neg(e) => json!(["-", e.to_json()]),
            Expr::Sub(a, b) => json!(["-", a.to_json(), b.to_json()]),
            Expr::Pow(e, k) => json!(["^", e.to_json(), k]),
            Expr::Exp(e) => json!(["exp", e.to_json()]),
            Expr::Chi { a, b, arg } => json!(["chi", a, b, arg.to_json()]),
        }
    }

    /// Radius beyond which the expression vanishes identically (`∞` if
    /// unknown or unbounded).
    pub fn support_radius(&self) -> f64 {
        match self {
            Expr::Const(v) if *v == 0.0 => 0.0,
            Expr::Const(_) | Expr::X | Expr::Y | Expr::R | Expr::Exp(_) => f64::INFINITY,
            Expr::Add(es) => es.iter().map(Expr::support_radius).fold(0.0, f64::max),
            Expr::Mul(es) => es.iter().map(Expr::support_radius).fold(f64::INFINITY, f64::min),
            Expr::Neg(e) => e.support_radius(),
            Expr::Sub(a, b) => a.support_radius().max(b.support_radius()),
            Expr::Pow(e, k) => {
                if *k == 0 {
                    f64::INFINITY
                } else {
                    e.support_radius()
                }
            }
            Expr::Chi { b, arg, .. } => {
                if **arg == Expr::R && *b > 0.0 {
                    *b
                } else {
                    f64::INFINITY
                }
            }
        }
    }

    /// Radii where a `chi(r)` joint sits (finite smoothness there).
    pub fn breakpoints(&self, out: &mut Vec<f64>) {
        match self {
            Expr::Const(_) | Expr::X | Expr::Y | Expr::R => {}
            Expr::Add(es) | Expr::Mul(es) => es.iter().for_each(|e| e.breakpoints(out)),
            Expr::Neg(e) | Expr::Pow(e, _) | Expr::Exp(e) => e.breakpoints(out),
            Expr::Sub(a, b) => {
                a.breakpoints(out);
                b.breakpoints(out);
            }
            Expr::Chi { a, b, arg } => {
                if **arg == Expr::R {
                    out.extend([*a, *b].into_iter().filter(|t| *t > 0.0));
                }
                arg.breakpoints(out);
            }
        }
    }

    pub fn value(&self, z: Complex64) -> f64 {
        match self {
            Expr::Const(v) => *v,
            Expr::X => z.re,
            Expr::Y => z.im,
            Expr::R => z.norm(),
            Expr::Add(es) => es.iter().map(|e| e.value(z)).sum(),
            Expr::Mul(es) => {
                let mut p = 1.0;
                for e in es {
                    p *= e.value(z);
                    if p == 0.0 {
                        break;
                    }
                }
                p
            }
            Expr::Neg(e) => -e.value(z),
            Expr::Sub(a, b) => a.value(z) - b.value(z),
            Expr::Pow(e, k) => e.value(z).powi(*k as i32),
            Expr::Exp(e) => e.value(z).exp(),
            Expr::Chi { a, b, arg } => chi_value(*a, *b, arg.value(z)),
        }
    }

    pub fn jet(&self, z: Complex64) -> Dual2 {
        match self {
            Expr::Const(v) => Dual2::constant(*v),
            Expr::X => coordinates(z).0,
            Expr::Y => coordinates(z).1,
            Expr::R => radius_jet(z),
            Expr::Add(es) => es.iter().fold(Dual2::constant(0.0), |acc, e| acc + e.jet(z)),
            Expr::Mul(es) => {
                let mut acc = Dual2::constant(1.0);
                for e in es {
                    acc = acc * e.jet(z);
                    if acc == Dual2::constant(0.0) {
                        break;
                    }
                }
                acc
            }
            Expr::Neg(e) => -e.jet(z),
            Expr::Sub(a, b) => a.jet(z) - b.jet(z),
            Expr::Pow(e, k) => e.jet(z).powi(*k as i32),
            Expr::Exp(e) => e.jet(z).exp(),
            Expr::Chi { a, b, arg } => {
                // Outside the joint the cutoff is locally constant; returning
                // early also avoids differentiating r at the origin.
                let s = arg.value(z);
                if s <= *a {
                    return Dual2::constant(1.0);
                }
                if s >= *b {
                    return Dual2::constant(0.0);
                }
                let (f, df, d2f) = chi_derivs(*a, *b, s);
                arg.jet(z).chain(f, df, d2f)
            }
        }
    }
}

fn atom(s: &str) -> Result<Expr> {
    match s {
        "x" => Ok(Expr::X),
        "y" => Ok(Expr::Y),
        "r" => Ok(Expr::R),
        other => Err(Error::Expression(format!("unknown atom '{other}'"))),
    }
}

fn radius_jet(z: Complex64) -> Dual2 {
    let r = z.norm();
    let r3 = r * r * r;
    Dual2 {
        value: r,
        dx: z.re / r,
        dy: z.im / r,
        dxx: z.im * z.im / r3,
        dxy: -z.re * z.im / r3,
        dyy: z.re * z.re / r3,
    }
}

fn smoothstep(t: f64) -> (f64, f64, f64) {
    let t2 = t * t;
    let s = t2 * t * (10.0 - 15.0 * t + 6.0 * t2);
    let ds = 30.0 * t2 * (1.0 - t) * (1.0 - t);
    let d2s = 60.0 * t * (1.0 - t) * (1.0 - 2.0 * t);
    (s, ds, d2s)
}

fn chi_value(a: f64, b: f64, s: f64) -> f64 {
    if s <= a {
        1.0
    } else if s >= b {
        0.0
    } else {
        1.0 - smoothstep((s - a) / (b - a)).0
    }
}

fn chi_derivs(a: f64, b: f64, s: f64) -> (f64, f64, f64) {
    let w = b - a;
    let (v, d1, d2) = smoothstep((s - a) / w);
    (1.0 - v, -d1 / w, -d2 / (w * w))
}

impl Add for Expr {
    type Output = Expr;
    fn add(self, o: Expr) -> Expr {
        Expr::Add(vec![self, o])
    }
}

impl Sub for Expr {
    type Output = Expr;
    fn sub(self, o: Expr) -> Expr {
        Expr::Sub(Box::new(self), Box::new(o))
    }
}

impl Mul for Expr {
    type Output = Expr;
    fn mul(self, o: Expr) -> Expr {
        Expr::Mul(vec![self, o])
    }
}

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::Neg(Box::new(self))
    }
}

/// A parsed expression with its support radius and joint radii.
#[derive(Clone, Debug, PartialEq)]
pub struct TestFunction {
    expr: Expr,
    support: f64,
    breakpoints: Vec<f64>,
}

impl TestFunction {
    pub fn new(expr: Expr) -> Self {
        let support = expr.support_radius();
        let mut breakpoints = Vec::new();
        expr.breakpoints(&mut breakpoints);
        breakpoints.sort_by(|a, b| a.partial_cmp(b).unwrap());
        breakpoints.dedup();
        TestFunction { expr, support, breakpoints }
    }

    pub fn parse(s: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(s).map_err(|e| Error::Expression(e.to_string()))?;
        Self::from_json(&v)
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        Ok(Self::new(Expr::parse(v)?))
    }

    pub fn constant(c: f64) -> Self {
        Self::new(Expr::Const(c))
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    pub fn to_json(&self) -> Value {
        self.expr.to_json()
    }

    /// Canonical identifier: the compact JSON encoding.
    pub fn id(&self) -> String {
        self.to_json().to_string()
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    /// `f(z) = 0` whenever `|z| ≥ support_radius()`; infinite if unbounded.
    pub fn support_radius(&self) -> f64 {
        self.support
    }

    pub fn is_compactly_supported(&self) -> bool {
        self.support.is_finite()
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn is_zero(&self) -> bool {
        self.support == 0.0
    }

    pub fn value(&self, z: Complex64) -> f64 {
        self.expr.value(z)
    }

    /// Value, gradient and Hessian at `z`.
    pub fn dual_eval(&self, z: Complex64) -> Dual2 {
        self.expr.jet(z)
    }

    /// `max |f|` sampled on a 200 × 256 polar grid of the disk `|z| ≤ r_max`
    /// (clipped to the support).
    pub fn sup_norm(&self, r_max: f64) -> f64 {
        let r_max = r_max.min(self.support);
        if !(r_max > 0.0) {
            return self.value(Complex64::new(0.0, 0.0)).abs();
        }
        let mut m = self.value(Complex64::new(0.0, 0.0)).abs();
        for i in 1..=200 {
            let r = r_max * i as f64 / 200.0;
            for j in 0..256 {
                let t = std::f64::consts::TAU * j as f64 / 256.0;
                m = m.max(self.value(Complex64::from_polar(r, t)).abs());
            }
        }
        m
    }
}

impl ScalarField for TestFunction {
    fn jet(&self, z: Complex64) -> Dual2 {
        self.expr.jet(z)
    }
    fn value(&self, z: Complex64) -> f64 {
        self.expr.value(z)
    }
}

/// A complex field `v = a + i b` built from two real test functions.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    pub re: TestFunction,
    pub im: TestFunction,
}

impl VectorField {
    pub fn new(re: TestFunction, im: TestFunction) -> Self {
        VectorField { re, im }
    }

    pub fn zero() -> Self {
        Self::new(TestFunction::zero(), TestFunction::zero())
    }

    /// `{"re": expr, "im": expr}`.
    pub fn from_json(v: &Value) -> Result<Self> {
        let obj = v.as_object().ok_or_else(|| Error::Expression("vector field must be an object {re, im}".into()))?;
        if let Some(k) = obj.keys().find(|k| *k != "re" && *k != "im") {
            return Err(Error::Expression(format!("unknown vector-field key '{k}'")));
        }
        let get = |k: &str| obj.get(k).map(TestFunction::from_json).unwrap_or_else(|| Ok(TestFunction::zero()));
        Ok(Self::new(get("re")?, get("im")?))
    }

    pub fn to_json(&self) -> Value {
        json!({"re": self.re.to_json(), "im": self.im.to_json()})
    }

    pub fn id(&self) -> String {
        self.to_json().to_string()
    }

    pub fn value(&self, z: Complex64) -> Complex64 {
        Complex64::new(self.re.value(z), self.im.value(z))
    }

    /// `∂v` and `∂̄v`.
    pub fn wirtinger_pair(&self, z: Complex64) -> (Complex64, Complex64) {
        let a = self.re.jet(z);
        let b = self.im.jet(z);
        let i = Complex64::i();
        (a.wirtinger() + i * b.wirtinger(), a.wirtinger_bar() + i * b.wirtinger_bar())
    }

    pub fn support_radius(&self) -> f64 {
        self.re.support_radius().max(self.im.support_radius())
    }

    pub fn breakpoints(&self) -> Vec<f64> {
        let mut b: Vec<f64> = self.re.breakpoints().iter().chain(self.im.breakpoints()).cloned().collect();
        b.sort_by(|x, y| x.partial_cmp(y).unwrap());
        b.dedup();
        b
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
}
