use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

use super::equiv::{check_equiv_with, Verdict};
use super::{Calculator, Rational};
use crate::diagnostic::Code;
use crate::mathexpr::{BigOpKind, BracketStyle, Expr, LogicOp, Relator};

/// Largest exact intermediate result, in bits of numerator plus
/// denominator. Anything bigger is treated as a runaway input.
pub const MAX_EXACT_BITS: u64 = 1 << 20;

/// Relative tolerance used when comparing approximate values.
pub const APPROX_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "lowercase")]
pub enum Value {
    Exact(Rational),
    /// May be non-finite: domain errors in numeric evaluation land here.
    Approx(f64),
    Boolean(bool),
}

impl Value {
    pub fn int(n: i64) -> Value {
        Value::Exact(Rational::from(n))
    }

    pub fn is_finite(&self) -> bool {
        match self {
            Value::Approx(x) => x.is_finite(),
            _ => true,
        }
    }

    /// Numeric value as a double; `None` for booleans.
    pub fn to_f64(&self) -> Option<f64> {
        match self {
            Value::Exact(r) => Some(r.to_f64()),
            Value::Approx(x) => Some(*x),
            Value::Boolean(_) => None,
        }
    }

    /// Equality as used by comparisons and the equivalence checker:
    /// exact for rationals, relative tolerance once anything is approximate.
    pub fn agrees_with(&self, other: &Value) -> bool {
        match (self, other) {
            (Value::Exact(a), Value::Exact(b)) => a == b,
            (Value::Boolean(a), Value::Boolean(b)) => a == b,
            (Value::Boolean(_), _) | (_, Value::Boolean(_)) => false,
            _ => {
                let (a, b) = (self.to_f64().unwrap_or(f64::NAN), other.to_f64().unwrap_or(f64::NAN));
                if a == b {
                    return true;
                }
                let scale = a.abs().max(b.abs()).max(1.0);
                (a - b).abs() <= APPROX_TOLERANCE * scale
            }
        }
    }

    /// An expression tree that displays this value.
    pub fn to_expr(&self) -> Expr {
        match self {
            Value::Exact(r) => {
                let mag = |n: &BigInt| Expr::Integer {
                    value: n.magnitude().clone(),
                };
                let body = if r.is_integer() {
                    mag(r.numer())
                } else {
                    Expr::frac(mag(r.numer()), mag(r.denom()))
                };
                if r.is_negative() {
                    Expr::neg(body)
                } else {
                    body
                }
            }
            Value::Approx(x) if x.is_nan() => Expr::text("undefined"),
            Value::Approx(x) if x.is_infinite() => {
                let oo = Expr::constant("oo");
                if *x < 0.0 {
                    Expr::neg(oo)
                } else {
                    oo
                }
            }
            Value::Approx(x) => {
                let text = format_approx(x.abs());
                let body = if text.contains(['e', 'E']) {
                    Expr::text(text)
                } else {
                    Expr::decimal(&text)
                };
                if *x < 0.0 {
                    Expr::neg(body)
                } else {
                    body
                }
            }
            Value::Boolean(b) => Expr::text(if *b { "true" } else { "false" }),
        }
    }
}

/// Twelve significant digits, trailing zeros dropped.
fn format_approx(x: f64) -> String {
    let a = x.abs();
    if a != 0.0 && !(1e-6..1e15).contains(&a) {
        let s = format!("{x:.11e}");
        let (mant, exp) = s.split_once('e').unwrap_or((&s, "0"));
        let mant = mant.trim_end_matches('0').trim_end_matches('.');
        return format!("{mant}e{exp}");
    }
    let digits_before = if a < 1.0 { 1 } else { a.log10().floor() as i32 + 1 };
    let decimals = (12 - digits_before).max(0) as usize;
    let s = format!("{x:.decimals$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Exact(r) => write!(f, "{r}"),
            Value::Approx(x) if x.is_nan() => f.write_str("undefined"),
            Value::Approx(x) if x.is_infinite() => f.write_str(if *x < 0.0 { "-oo" } else { "oo" }),
            Value::Approx(x) => f.write_str(&format_approx(*x)),
            Value::Boolean(b) => write!(f, "{b}"),
        }
    }
}

/// Variable bindings, ordered by name so that printing is stable.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Env {
    bindings: BTreeMap<String, Value>,
}

impl Env {
    pub fn new() -> Env {
        Env::default()
    }

    pub fn with(mut self, name: &str, value: Value) -> Env {
        self.bind(name, value);
        self
    }

    pub fn bind(&mut self, name: &str, value: Value) {
        self.bindings.insert(name.to_string(), value);
    }

    pub fn get(&self, name: &str) -> Option<&Value> {
        self.bindings.get(name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.bindings.contains_key(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Value)> {
        self.bindings.iter().map(|(k, v)| (k.as_str(), v))
    }
}

impl fmt::Display for Env {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (k, v)) in self.bindings.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{k}={v}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("`{0}` has no value")]
    UnboundVariable(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("cannot evaluate {0}")]
    Unsupported(String),
    #[error("evaluation exceeded its step budget")]
    BudgetExceeded,
}

impl EvalError {
    pub fn code(&self) -> Code {
        match self {
            EvalError::UnboundVariable(_) => Code::UnboundVariable,
            EvalError::DivisionByZero => Code::DivisionByZero,
            EvalError::Unsupported(_) => Code::UnsupportedOperation,
            EvalError::BudgetExceeded => Code::BudgetExceeded,
        }
    }
}

fn unsupported(what: impl Into<String>) -> EvalError {
    EvalError::Unsupported(what.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Mode {
    /// Rationals stay exact; anything irrational degrades to `Approx`.
    Exact,
    /// Same arithmetic, but division by zero and oversized results give
    /// non-finite doubles instead of errors. Callers convert the result.
    Numeric,
}

pub(crate) struct Evaluator<'c> {
    calc: &'c Calculator,
    mode: Mode,
    steps: u64,
}

type Res = Result<Value, EvalError>;

impl<'c> Evaluator<'c> {
    pub(crate) fn new(calc: &'c Calculator, mode: Mode) -> Self {
        Evaluator { calc, mode, steps: 0 }
    }

    fn tick(&mut self, n: u64) -> Result<(), EvalError> {
        self.steps = self.steps.saturating_add(n);
        if self.steps > self.calc.step_budget {
            Err(EvalError::BudgetExceeded)
        } else {
            Ok(())
        }
    }

    fn exact(&mut self, r: Rational) -> Res {
        if r.bits() > MAX_EXACT_BITS {
            return self.too_big(r.to_f64());
        }
        // big operands cost more than one step
        self.tick(r.bits() / 4096)?;
        Ok(Value::Exact(r))
    }

    /// An exact result too large to keep: a runaway in exact mode, just a
    /// big (often infinite) double in numeric mode.
    fn too_big(&self, approx: f64) -> Res {
        match self.mode {
            Mode::Exact => Err(EvalError::BudgetExceeded),
            Mode::Numeric => Ok(Value::Approx(approx)),
        }
    }

    fn number(&mut self, v: Value, what: &str) -> Result<Value, EvalError> {
        match v {
            Value::Boolean(_) => Err(unsupported(format!("{what} of a truth value"))),
            v => Ok(v),
        }
    }

    fn float(&mut self, v: Value, what: &str) -> Result<f64, EvalError> {
        Ok(self.number(v, what)?.to_f64().unwrap_or(f64::NAN))
    }

    pub(crate) fn eval(&mut self, e: &Expr, env: &Env) -> Res {
        self.tick(1)?;
        match e {
            Expr::Integer { value } => self.exact(Rational::from(BigInt::from(value.clone()))),
            Expr::Decimal { text } => match text.parse::<Rational>() {
                Ok(r) => self.exact(r),
                Err(_) => Err(unsupported(format!("the number {text}"))),
            },
            Expr::Ident { name } | Expr::Greek { name } => self.variable(name, env),
            Expr::SymbolConst { name } => match name.as_str() {
                "pi" => Ok(Value::Approx(std::f64::consts::PI)),
                "e" => Ok(Value::Approx(std::f64::consts::E)),
                "oo" => Ok(Value::Approx(f64::INFINITY)),
                _ => Err(unsupported(format!("`{name}`"))),
            },
            Expr::Bracketed {
                style: BracketStyle::Paren | BracketStyle::Square | BracketStyle::Brace,
                inner,
            } if !matches!(**inner, Expr::Tuple { .. }) => self.eval(inner, env),
            Expr::Add { left, right } => {
                let (a, b) = (self.eval(left, env)?, self.eval(right, env)?);
                self.add(a, b)
            }
            Expr::Sub { left, right } => {
                let (a, b) = (self.eval(left, env)?, self.eval(right, env)?);
                let b = self.negate(b)?;
                self.add(a, b)
            }
            Expr::Neg { arg } => {
                let a = self.eval(arg, env)?;
                self.negate(a)
            }
            Expr::Times { left, right, .. } => {
                let (a, b) = (self.eval(left, env)?, self.eval(right, env)?);
                self.mul(a, b)
            }
            Expr::Frac { numerator, denominator } => {
                let (a, b) = (self.eval(numerator, env)?, self.eval(denominator, env)?);
                self.div(a, b)
            }
            Expr::Power { base, exponent } => {
                let (a, b) = (self.eval(base, env)?, self.eval(exponent, env)?);
                self.pow(a, b)
            }
            Expr::Sqrt { arg } => {
                let a = self.eval(arg, env)?;
                self.root(a, 2)
            }
            Expr::Root { index, arg } => {
                let n = self.eval(index, env)?;
                let a = self.eval(arg, env)?;
                match &n {
                    Value::Exact(r) => match r.to_i64() {
                        Some(k) if (1..=64).contains(&k) => self.root(a, k as u32),
                        _ => {
                            let n = self.float(n, "a root")?;
                            let a = self.float(a, "a root")?;
                            Ok(Value::Approx(a.powf(1.0 / n)))
                        }
                    },
                    _ => {
                        let n = self.float(n, "a root")?;
                        let a = self.float(a, "a root")?;
                        Ok(Value::Approx(a.powf(1.0 / n)))
                    }
                }
            }
            Expr::Apply { head, args } => self.apply(head, args, env),
            Expr::BigOp {
                op,
                binder,
                lower,
                upper,
                body,
            } => self.bigop(*op, binder.as_deref(), lower.as_deref(), upper.as_deref(), body, env),
            Expr::Relation { first, rest } => {
                let mut left = self.eval(first, env)?;
                let mut all = true;
                for (rel, e) in rest {
                    let right = self.eval(e, env)?;
                    all &= self.compare(*rel, &left, &right)?;
                    left = right;
                }
                Ok(Value::Boolean(all))
            }
            Expr::Logic { op, left, right } => {
                let a = self.truth(left, env)?;
                let b = self.truth(right, env)?;
                Ok(Value::Boolean(match op {
                    LogicOp::And => a && b,
                    LogicOp::Or => a || b,
                }))
            }
            Expr::Error { raw } => Err(unsupported(format!("malformed input `{raw}`"))),
            Expr::Slot { .. } => Err(unsupported("a nested placeholder")),
            Expr::Subscript { .. } => Err(unsupported("subscripted names")),
            Expr::Matrix { .. } => Err(unsupported("matrices")),
            Expr::Tuple { .. } | Expr::Bracketed { .. } => Err(unsupported("lists")),
            Expr::BlackboardSet { .. } => Err(unsupported("number sets")),
            Expr::TextFragment { text } => Err(unsupported(format!("the text \"{text}\""))),
        }
    }

    fn variable(&mut self, name: &str, env: &Env) -> Res {
        match env.get(name) {
            Some(v) => match v {
                Value::Exact(r) => self.exact(r.clone()),
                v => Ok(v.clone()),
            },
            None if crate::mathexpr::SymbolTable::builtin()
                .get(name)
                .is_some_and(|s| s.category == crate::mathexpr::Category::Func) =>
            {
                Err(unsupported(format!("`{name}` without an argument")))
            }
            None => Err(EvalError::UnboundVariable(name.to_string())),
        }
    }

    fn truth(&mut self, e: &Expr, env: &Env) -> Result<bool, EvalError> {
        match self.eval(e, env)? {
            Value::Boolean(b) => Ok(b),
            _ => Err(unsupported("`and`/`or` between numbers")),
        }
    }

    fn add(&mut self, a: Value, b: Value) -> Res {
        match (self.number(a, "a sum")?, self.number(b, "a sum")?) {
            (Value::Exact(x), Value::Exact(y)) => self.exact(&x + &y),
            (x, y) => Ok(Value::Approx(
                x.to_f64().unwrap_or(f64::NAN) + y.to_f64().unwrap_or(f64::NAN),
            )),
        }
    }

    fn negate(&mut self, a: Value) -> Res {
        match self.number(a, "a negation")? {
            Value::Exact(x) => Ok(Value::Exact(-x)),
            Value::Approx(x) => Ok(Value::Approx(-x)),
            Value::Boolean(_) => unreachable!("rejected by number()"),
        }
    }

    fn mul(&mut self, a: Value, b: Value) -> Res {
        match (self.number(a, "a product")?, self.number(b, "a product")?) {
            (Value::Exact(x), Value::Exact(y)) => {
                if x.bits() + y.bits() > MAX_EXACT_BITS + 64 {
                    return self.too_big(x.to_f64() * y.to_f64());
                }
                self.exact(&x * &y)
            }
            (x, y) => Ok(Value::Approx(
                x.to_f64().unwrap_or(f64::NAN) * y.to_f64().unwrap_or(f64::NAN),
            )),
        }
    }

    fn div(&mut self, a: Value, b: Value) -> Res {
        match (self.number(a, "a quotient")?, self.number(b, "a quotient")?) {
            (Value::Exact(x), Value::Exact(y)) => match x.checked_div(&y) {
                Some(q) => self.exact(q),
                None if self.mode == Mode::Numeric => Ok(Value::Approx(x.to_f64() / 0.0)),
                None => Err(EvalError::DivisionByZero),
            },
            (x, y) => Ok(Value::Approx(
                x.to_f64().unwrap_or(f64::NAN) / y.to_f64().unwrap_or(f64::NAN),
            )),
        }
    }

    fn pow(&mut self, a: Value, b: Value) -> Res {
        match (self.number(a, "a power")?, self.number(b, "a power")?) {
            (Value::Exact(x), Value::Exact(n)) if n.is_integer() => {
                let trivial = x.is_zero() || x.abs() == Rational::one();
                let Some(k) = n.to_i64() else {
                    if trivial && !(x.is_zero() && n.is_negative()) {
                        let even = n.numer().is_even();
                        return self.exact(if x.is_negative() && even { x.abs() } else { x });
                    }
                    return self.too_big(x.to_f64().powf(n.to_f64()));
                };
                if !trivial && x.bits().saturating_mul(k.unsigned_abs()) > MAX_EXACT_BITS {
                    return self.too_big(x.to_f64().powf(k as f64));
                }
                self.tick(64 - k.unsigned_abs().leading_zeros() as u64)?;
                match x.pow(k) {
                    Some(r) => self.exact(r),
                    None if self.mode == Mode::Numeric => Ok(Value::Approx(f64::INFINITY)),
                    None => Err(EvalError::DivisionByZero),
                }
            }
            (Value::Exact(x), Value::Exact(n)) => {
                // rational exponent p/q: exact when the q-th root is
                if let (Some(q), Some(p)) = (n.denom().to_u32(), n.numer().to_i64()) {
                    if q <= 64 {
                        if let Some(root) = x.exact_root(q) {
                            return self.pow(Value::Exact(root), Value::int(p));
                        }
                    }
                }
                Ok(Value::Approx(x.to_f64().powf(n.to_f64())))
            }
            (x, y) => {
                let (x, y) = (x.to_f64().unwrap_or(f64::NAN), y.to_f64().unwrap_or(f64::NAN));
                Ok(Value::Approx(x.powf(y)))
            }
        }
    }

    fn root(&mut self, a: Value, n: u32) -> Res {
        match self.number(a, "a root")? {
            Value::Exact(x) => match x.exact_root(n) {
                Some(r) => self.exact(r),
                None => Ok(Value::Approx(real_root(x.to_f64(), n))),
            },
            v => Ok(Value::Approx(real_root(v.to_f64().unwrap_or(f64::NAN), n))),
        }
    }

    fn compare(&mut self, rel: Relator, a: &Value, b: &Value) -> Result<bool, EvalError> {
        if let (Value::Boolean(x), Value::Boolean(y)) = (a, b) {
            return match rel {
                Relator::Eq | Relator::Iff => Ok(x == y),
                Relator::Ne => Ok(x != y),
                Relator::Implies => Ok(!x || *y),
                _ => Err(unsupported(format!("`{}` between truth values", rel.spelling()))),
            };
        }
        let a = self.number(a.clone(), "a comparison")?;
        let b = self.number(b.clone(), "a comparison")?;
        let ord = match (&a, &b) {
            (Value::Exact(x), Value::Exact(y)) => Some(x.cmp(y)),
            _ if a.agrees_with(&b) => Some(std::cmp::Ordering::Equal),
            _ => a
                .to_f64()
                .unwrap_or(f64::NAN)
                .partial_cmp(&b.to_f64().unwrap_or(f64::NAN)),
        };
        let Some(ord) = ord else {
            return Ok(rel == Relator::Ne);
        };
        use std::cmp::Ordering::*;
        Ok(match rel {
            Relator::Eq => ord == Equal,
            Relator::Ne => ord != Equal,
            Relator::Lt => ord == Less,
            Relator::Gt => ord == Greater,
            Relator::Le => ord != Greater,
            Relator::Ge => ord != Less,
            _ => return Err(unsupported(format!("`{}` between numbers", rel.spelling()))),
        })
    }

    fn apply(&mut self, head: &Expr, args: &[Expr], env: &Env) -> Res {
        let name = match head {
            Expr::Ident { name } => name.as_str(),
            _ => return Err(unsupported("this kind of function application")),
        };
        if name == "equiv" {
            return self.equiv(args, env);
        }
        let mut vals = Vec::with_capacity(args.len());
        for a in args {
            vals.push(self.eval(a, env)?);
        }
        let arity = |n: usize| -> Result<(), EvalError> {
            if vals.len() == n {
                Ok(())
            } else {
                Err(unsupported(format!("`{name}` with {} argument(s)", vals.len())))
            }
        };
        match name {
            "falling" => {
                arity(2)?;
                let n = match &vals[1] {
                    Value::Exact(n) if n.is_integer() && !n.is_negative() => {
                        n.to_i64().ok_or(EvalError::BudgetExceeded)?
                    }
                    _ => return Err(unsupported("`falling` with a non-natural count")),
                };
                let x = vals[0].clone();
                let mut acc = Value::int(1);
                for i in 0..n {
                    let factor = self.add(x.clone(), Value::int(-i))?;
                    acc = self.mul(acc, factor)?;
                }
                Ok(acc)
            }
            "abs" => {
                arity(1)?;
                match self.number(vals.remove(0), "abs")? {
                    Value::Exact(r) => Ok(Value::Exact(r.abs())),
                    v => Ok(Value::Approx(v.to_f64().unwrap_or(f64::NAN).abs())),
                }
            }
            "min" | "max" if !vals.is_empty() => {
                let mut best = self.number(vals[0].clone(), name)?;
                for v in vals.into_iter().skip(1) {
                    let v = self.number(v, name)?;
                    let better = if name == "min" {
                        self.compare(Relator::Lt, &v, &best)?
                    } else {
                        self.compare(Relator::Gt, &v, &best)?
                    };
                    if better {
                        best = v;
                    }
                }
                Ok(best)
            }
            "gcd" => {
                arity(2)?;
                match (&vals[0], &vals[1]) {
                    (Value::Exact(a), Value::Exact(b)) if a.is_integer() && b.is_integer() => {
                        self.exact(Rational::from(a.numer().gcd(b.numer())))
                    }
                    _ => Err(unsupported("`gcd` of non-integers")),
                }
            }
            "exp" => {
                arity(1)?;
                let x = self.float(vals.remove(0), name)?;
                Ok(Value::Approx(x.exp()))
            }
            "sin" | "cos" | "tan" | "sec" | "csc" | "cot" | "sinh" | "cosh" | "tanh" | "arcsin" | "arccos"
            | "arctan" | "ln" | "log" => {
                arity(1)?;
                let v = self.number(vals.remove(0), name)?;
                if let Value::Exact(r) = &v {
                    if let Some(exact) = exact_special(name, r) {
                        return self.exact(exact);
                    }
                }
                let x = v.to_f64().unwrap_or(f64::NAN);
                Ok(Value::Approx(match name {
                    "sin" => x.sin(),
                    "cos" => x.cos(),
                    "tan" => x.tan(),
                    "sec" => 1.0 / x.cos(),
                    "csc" => 1.0 / x.sin(),
                    "cot" => 1.0 / x.tan(),
                    "sinh" => x.sinh(),
                    "cosh" => x.cosh(),
                    "tanh" => x.tanh(),
                    "arcsin" => x.asin(),
                    "arccos" => x.acos(),
                    "arctan" => x.atan(),
                    "ln" => x.ln(),
                    _ => x.log10(),
                }))
            }
            _ => Err(unsupported(format!("the function `{name}`"))),
        }
    }

    fn equiv(&mut self, args: &[Expr], env: &Env) -> Res {
        let [a, b] = args else {
            return Err(unsupported("`equiv` without exactly two arguments"));
        };
        let mut vars: Vec<String> = a.free_identifiers();
        for v in b.free_identifiers() {
            if !vars.contains(&v) {
                vars.push(v);
            }
        }
        vars.retain(|v| !env.contains(v));
        self.tick(self.calc.trials as u64 * 100)?;
        match check_equiv_with(self.calc, a, b, &vars, env, self.calc.trials, self.calc.seed) {
            Verdict::EquivalentProbably => Ok(Value::Boolean(true)),
            Verdict::NotEquivalent { .. } => Ok(Value::Boolean(false)),
            Verdict::Undecided => Err(unsupported("`equiv`: too few points could be evaluated")),
        }
    }

    fn bigop(
        &mut self,
        op: BigOpKind,
        binder: Option<&Expr>,
        lower: Option<&Expr>,
        upper: Option<&Expr>,
        body: &Expr,
        env: &Env,
    ) -> Res {
        if op == BigOpKind::Int {
            return Err(unsupported("integrals"));
        }
        let (Some(Expr::Ident { name }), Some(lower), Some(upper)) = (binder, lower, upper) else {
            return Err(unsupported(format!("`{}` without `_(k=a)^b` bounds", op.name())));
        };
        let bound = |v: Value| match v {
            Value::Exact(r) if r.is_integer() => r.numer().clone().try_into().map_err(|_| EvalError::BudgetExceeded),
            _ => Err(unsupported(format!("`{}` with non-integer bounds", op.name()))),
        };
        let lo: i64 = bound(self.eval(lower, env)?)?;
        let hi: i64 = bound(self.eval(upper, env)?)?;
        let mut acc = Value::int(if op == BigOpKind::Sum { 0 } else { 1 });
        let mut inner = env.clone();
        let mut k = lo;
        while k <= hi {
            self.tick(1)?;
            inner.bind(name, Value::int(k));
            let v = self.eval(body, &inner)?;
            acc = if op == BigOpKind::Sum {
                self.add(acc, v)?
            } else {
                self.mul(acc, v)?
            };
            k += 1;
        }
        Ok(acc)
    }
}

fn real_root(x: f64, n: u32) -> f64 {
    if x < 0.0 && n % 2 == 1 {
        -(-x).powf(1.0 / f64::from(n))
    } else if n == 2 {
        x.sqrt()
    } else {
        x.powf(1.0 / f64::from(n))
    }
}

/// Values of elementary functions that are rational at rational points.
fn exact_special(name: &str, x: &Rational) -> Option<Rational> {
    let zero = x.is_zero();
    let one = *x == Rational::one();
    match name {
        "sin" | "tan" | "sinh" | "tanh" | "arcsin" | "arctan" if zero => Some(Rational::zero()),
        "cos" | "cosh" | "sec" if zero => Some(Rational::one()),
        "ln" if one => Some(Rational::zero()),
        "log" => {
            // log10 of an exact power of ten
            if !x.numer().is_positive() {
                return None;
            }
            let ten = BigInt::from(10);
            let (mut n, mut d) = (x.numer().clone(), x.denom().clone());
            let mut e: i64 = 0;
            while n > BigInt::from(1) && (&n % &ten).is_zero() {
                n /= &ten;
                e += 1;
            }
            while d > BigInt::from(1) && (&d % &ten).is_zero() {
                d /= &ten;
                e -= 1;
            }
            (n == BigInt::from(1) && d == BigInt::from(1)).then(|| Rational::from(e))
        }
        _ => None,
    }
}
