//! The built-in calculator: exact rational evaluation with a numeric
//! fallback, randomized equivalence checks and SVG plots.

mod equiv;
mod eval;
mod plot;
mod rational;

pub use equiv::{Verdict, ATTEMPTS_PER_TRIAL, SAMPLE_P, SAMPLE_Q};
pub use eval::{Env, EvalError, Value, APPROX_TOLERANCE, MAX_EXACT_BITS};
pub use plot::{sample_points, PlotConfig, PlotError};
pub use rational::{ParseRationalError, Rational};

use crate::mathexpr::Expr;
use eval::{Evaluator, Mode};

pub const DEFAULT_STEP_BUDGET: u64 = 1_000_000;
pub const DEFAULT_TRIALS: usize = 12;

/// Calculator settings. Cheap to clone and safe to share between threads.
#[derive(Debug, Clone, PartialEq)]
pub struct Calculator {
    /// Primitive operations allowed per evaluation.
    pub step_budget: u64,
    /// Seed for equivalence checks, including the `equiv` builtin.
    pub seed: u64,
    pub trials: usize,
    pub plot: PlotConfig,
}

impl Default for Calculator {
    fn default() -> Self {
        Calculator {
            step_budget: DEFAULT_STEP_BUDGET,
            seed: 0,
            trials: DEFAULT_TRIALS,
            plot: PlotConfig::default(),
        }
    }
}

impl Calculator {
    pub fn with_seed(seed: u64) -> Self {
        Calculator {
            seed,
            ..Default::default()
        }
    }

    /// Exact rational arithmetic. The result is `Approx` only where an
    /// irrational operation (a surd, `sin`, a fractional power) forced the
    /// numeric fallback.
    pub fn eval_exact(&self, expr: &Expr, env: &Env) -> Result<Value, EvalError> {
        Evaluator::new(self, Mode::Exact).eval(expr, env)
    }

    /// Double-precision evaluation. Domain errors such as `ln(-1)` or a
    /// division by zero give a non-finite value rather than an error.
    pub fn eval_numeric(&self, expr: &Expr, env: &Env) -> Result<Value, EvalError> {
        Evaluator::new(self, Mode::Numeric).eval(expr, env).map(|v| match v {
            Value::Exact(r) => Value::Approx(r.to_f64()),
            v => v,
        })
    }

    /// Compares `a` and `b` at `trials` random points, using this
    /// calculator's seed.
    pub fn check_equiv(&self, a: &Expr, b: &Expr, vars: &[String], trials: usize) -> Verdict {
        equiv::check_equiv_with(self, a, b, vars, &Env::new(), trials, self.seed)
    }

    pub fn plot_svg(&self, expr: &Expr, binder: &str, lower: &Rational, upper: &Rational) -> Result<String, PlotError> {
        let points = sample_points(self, expr, binder, lower, upper)?;
        Ok(plot::render_svg(self, &points))
    }
}

pub fn eval_exact(expr: &Expr, env: &Env) -> Result<Value, EvalError> {
    Calculator::default().eval_exact(expr, env)
}

pub fn eval_numeric(expr: &Expr, env: &Env) -> Result<Value, EvalError> {
    Calculator::default().eval_numeric(expr, env)
}

pub fn check_equiv(e1: &Expr, e2: &Expr, vars: &[String], trials: usize, seed: u64) -> Verdict {
    Calculator::with_seed(seed).check_equiv(e1, e2, vars, trials)
}

pub fn plot_svg(expr: &Expr, binder: &str, lower: &Rational, upper: &Rational) -> Result<String, PlotError> {
    Calculator::default().plot_svg(expr, binder, lower, upper)
}
