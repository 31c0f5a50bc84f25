use std::fmt::Write;

use thiserror::Error;

use super::eval::{EvalError, Evaluator, Mode};
use super::{Calculator, Env, Rational, Value};
use crate::diagnostic::Code;
use crate::mathexpr::Expr;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlotConfig {
    pub samples: usize,
    pub width: f64,
    pub height: f64,
    /// Fraction of width and height left free on each side.
    pub margin: f64,
}

impl Default for PlotConfig {
    fn default() -> Self {
        PlotConfig {
            samples: 201,
            width: 480.0,
            height: 320.0,
            margin: 0.08,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlotError {
    #[error("the plot range is empty: the lower bound must be below the upper bound")]
    EmptyRange,
    #[error("no sample point has a finite value")]
    EmptyPlot,
    #[error("{0}")]
    Eval(EvalError),
}

impl PlotError {
    pub fn code(&self) -> Code {
        match self {
            PlotError::EmptyRange => Code::MalformedPlot,
            PlotError::EmptyPlot => Code::EmptyPlot,
            PlotError::Eval(e) => e.code(),
        }
    }
}

/// Evaluates `expr` at evenly spaced points of `[lower, upper]`. Points
/// where the value is undefined come back as NaN or infinity.
pub fn sample_points(
    calc: &Calculator,
    expr: &Expr,
    binder: &str,
    lower: &Rational,
    upper: &Rational,
) -> Result<Vec<(f64, f64)>, PlotError> {
    if lower >= upper {
        return Err(PlotError::EmptyRange);
    }
    let n = calc.plot.samples.max(2);
    let width = upper - lower;
    let steps = Rational::from(n as i64 - 1);
    let mut out = Vec::with_capacity(n);
    let mut first_error = None;
    for i in 0..n {
        let x = lower
            + &(&width * &Rational::from(i as i64))
                .checked_div(&steps)
                .expect("n >= 2");
        let env = Env::new().with(binder, Value::Exact(x.clone()));
        let y = match Evaluator::new(calc, Mode::Numeric).eval(expr, &env) {
            Ok(v) => v.to_f64().unwrap_or(f64::NAN),
            Err(e) => {
                first_error.get_or_insert(e);
                f64::NAN
            }
        };
        out.push((x.to_f64(), y));
    }
    if out.iter().all(|(_, y)| !y.is_finite()) {
        return Err(match first_error {
            Some(e) if out.iter().all(|(_, y)| y.is_nan()) => PlotError::Eval(e),
            _ => PlotError::EmptyPlot,
        });
    }
    Ok(out)
}

/// SVG 1.1 line plot. Undefined samples split the curve into separate
/// polylines; axes are drawn where zero lies in range.
pub fn render_svg(calc: &Calculator, points: &[(f64, f64)]) -> String {
    let cfg = calc.plot;
    let finite = points.iter().filter(|(_, y)| y.is_finite()).map(|&(_, y)| y);
    let (y_min, y_max) = finite.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), y| (lo.min(y), hi.max(y)));
    let x_min = points.first().map_or(0.0, |p| p.0);
    let x_max = points.last().map_or(1.0, |p| p.0);
    let (lo, hi) = if y_min < y_max {
        (y_min, y_max)
    } else {
        (y_min - 1.0, y_max + 1.0)
    };

    let (mx, my) = (cfg.width * cfg.margin, cfg.height * cfg.margin);
    let sx = |x: f64| mx + (x - x_min) / (x_max - x_min) * (cfg.width - 2.0 * mx);
    let sy = |y: f64| cfg.height - my - (y - lo) / (hi - lo) * (cfg.height - 2.0 * my);

    let mut svg = String::new();
    let _ = write!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" class=\"plot\" width=\"{w}\" height=\"{h}\" \
         viewBox=\"0 0 {w} {h}\" data-x-min=\"{x_min}\" data-x-max=\"{x_max}\" data-y-min=\"{y_min}\" data-y-max=\"{y_max}\">",
        w = cfg.width,
        h = cfg.height,
    );
    let axis = "stroke=\"#888888\" stroke-width=\"1\"";
    if lo <= 0.0 && 0.0 <= hi {
        let y = sy(0.0);
        let _ = write!(
            svg,
            "<line class=\"axis\" x1=\"{:.2}\" y1=\"{y:.2}\" x2=\"{:.2}\" y2=\"{y:.2}\" {axis}/>",
            mx,
            cfg.width - mx
        );
    }
    if x_min <= 0.0 && 0.0 <= x_max {
        let x = sx(0.0);
        let _ = write!(
            svg,
            "<line class=\"axis\" x1=\"{x:.2}\" y1=\"{:.2}\" x2=\"{x:.2}\" y2=\"{:.2}\" {axis}/>",
            my,
            cfg.height - my
        );
    }
    for run in points.split(|(_, y)| !y.is_finite()).filter(|r| !r.is_empty()) {
        svg.push_str("<polyline class=\"curve\" fill=\"none\" stroke=\"#1f5fbf\" stroke-width=\"2\" points=\"");
        for (i, &(x, y)) in run.iter().enumerate() {
            if i > 0 {
                svg.push(' ');
            }
            let _ = write!(svg, "{:.2},{:.2}", sx(x), sy(y));
        }
        svg.push_str("\"/>");
    }
    svg.push_str("</svg>");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mathexpr::parse_str;

    fn points(src: &str, lo: i64, hi: i64) -> Result<Vec<(f64, f64)>, PlotError> {
        sample_points(&Calculator::default(), &parse_str(src), "x", &lo.into(), &hi.into())
    }

    #[test]
    fn sample_grid() {
        let p = points("x", -1, 1).unwrap();
        assert_eq!(p.len(), 201);
        assert_eq!(p[0].0, -1.0);
        assert_eq!(p[100].0, 0.0);
        assert_eq!(p[200].0, 1.0);
    }

    #[test]
    fn reciprocal_has_a_gap_at_zero() {
        let p = points("1/x", -1, 1).unwrap();
        assert!(!p[100].1.is_finite());
        assert!(p[..100].iter().all(|(_, y)| *y < 0.0));
        assert!(p[101..].iter().all(|(_, y)| *y > 0.0));
        let svg = render_svg(&Calculator::default(), &p);
        assert_eq!(svg.matches("<polyline").count(), 2);
    }

    #[test]
    fn constant_zero_lies_on_the_axis() {
        let p = points("0", -1, 1).unwrap();
        let svg = render_svg(&Calculator::default(), &p);
        assert_eq!(svg.matches("<polyline").count(), 1);
        // x axis at mid-height, curve at the same height
        assert!(svg.contains("y1=\"160.00\""));
        assert!(svg.contains(",160.00 "));
    }

    #[test]
    fn failures() {
        assert_eq!(points("x", 1, 1), Err(PlotError::EmptyRange));
        assert_eq!(points("sqrt(-1-x^2)", -1, 1), Err(PlotError::EmptyPlot));
        assert!(matches!(
            points("y", -1, 1),
            Err(PlotError::Eval(EvalError::UnboundVariable(_)))
        ));
    }
}
