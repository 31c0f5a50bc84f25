use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::eval::{Evaluator, Mode};
use super::{Calculator, Env, Rational, Value};
use crate::mathexpr::Expr;

/// Sample coordinates are `p/q` with `|p| <= SAMPLE_P` and `1 <= q <= SAMPLE_Q`.
pub const SAMPLE_P: i64 = 40;
pub const SAMPLE_Q: i64 = 4;
/// Draws per trial before the trial is given up as invalid.
pub const ATTEMPTS_PER_TRIAL: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum Verdict {
    EquivalentProbably,
    /// `witness` is the first point at which the two sides disagreed.
    NotEquivalent {
        witness: Env,
    },
    /// Fewer than half of the trials found a point where both sides
    /// could be evaluated.
    Undecided,
}

pub(crate) fn check_equiv_with(
    calc: &Calculator,
    a: &Expr,
    b: &Expr,
    vars: &[String],
    base: &Env,
    trials: usize,
    seed: u64,
) -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut valid = 0;
    for _ in 0..trials {
        for _ in 0..ATTEMPTS_PER_TRIAL {
            let mut env = base.clone();
            for v in vars {
                let p = rng.gen_range(-SAMPLE_P..=SAMPLE_P);
                let q = rng.gen_range(1..=SAMPLE_Q);
                let r = Rational::new(p.into(), q.into()).expect("q >= 1");
                env.bind(v, Value::Exact(r));
            }
            let (Some(x), Some(y)) = (sample(calc, a, &env), sample(calc, b, &env)) else {
                continue;
            };
            if !x.agrees_with(&y) {
                return Verdict::NotEquivalent { witness: env };
            }
            valid += 1;
            break;
        }
    }
    if valid == 0 || valid * 2 < trials {
        Verdict::Undecided
    } else {
        Verdict::EquivalentProbably
    }
}

fn sample(calc: &Calculator, e: &Expr, env: &Env) -> Option<Value> {
    Evaluator::new(calc, Mode::Exact)
        .eval(e, env)
        .ok()
        .filter(Value::is_finite)
}
