//! Serializers for [`Expr`]: canonical LaTeX, Space Math text and MathML.
//!
//! All three share one precedence table, the same one the parser uses, so
//! brackets are only emitted where the grammar needs them.

mod latex;
mod mathml;
mod spacemath;

use std::fmt;

use serde::Serialize;

use crate::mathexpr::{BracketStyle, Expr};

pub(crate) use latex::escape_text;
pub use latex::render_latex;
pub(crate) use mathml::escape_xml;
pub use mathml::render_presentation;
pub use spacemath::render_spacemath;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Target {
    Latex,
    Spacemath,
    #[default]
    MathmlHtml,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RenderOptions {
    pub target: Target,
    pub display_mode: bool,
    /// Mark implicit products and function application with the invisible
    /// operators U+2062 and U+2061.
    pub show_apply_distinction: bool,
}

impl RenderOptions {
    pub fn inline(target: Target) -> Self {
        RenderOptions {
            target,
            ..Default::default()
        }
    }

    pub fn display(target: Target) -> Self {
        RenderOptions {
            target,
            display_mode: true,
            ..Default::default()
        }
    }

    /// Renders with whichever serializer `target` names.
    pub fn render(&self, expr: &Expr) -> Rendered {
        match self.target {
            Target::Latex => render_latex(expr, self),
            Target::Spacemath => render_spacemath(expr),
            Target::MathmlHtml => Rendered {
                text: render_presentation(expr, self),
                lossy: expr.contains_error(),
            },
        }
    }
}

/// Serialized text plus whether anything could not be represented
/// faithfully (error nodes, slots, names the target cannot spell).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rendered {
    pub text: String,
    pub lossy: bool,
}

impl fmt::Display for Rendered {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

/// Binding strength, loosest first. Mirrors the parser's levels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub(crate) enum Prec {
    List,
    Logic,
    Relation,
    Additive,
    Term,
    Unary,
    Script,
    Atom,
}

/// `latex_frac`: `\frac{}{}` is a closed form, `a/b` is not.
pub(crate) fn prec(e: &Expr, latex_frac: bool) -> Prec {
    match e {
        Expr::Tuple { items } if !items.is_empty() => Prec::List,
        Expr::Logic { .. } => Prec::Logic,
        Expr::Relation { .. } => Prec::Relation,
        Expr::Add { .. } | Expr::Sub { .. } => Prec::Additive,
        Expr::Times { .. } => Prec::Term,
        Expr::Frac { .. } if !latex_frac => Prec::Term,
        Expr::Neg { .. } | Expr::BigOp { .. } => Prec::Unary,
        Expr::Power { .. } | Expr::Subscript { .. } => Prec::Script,
        _ => Prec::Atom,
    }
}

/// True when the rendering ends in a big operator whose body would swallow
/// whatever follows: `sum_i i` followed by ` x`.
pub(crate) fn open_right(e: &Expr, latex_frac: bool) -> bool {
    match e {
        Expr::BigOp { .. } => true,
        Expr::Neg { arg } => open_right(arg, latex_frac),
        Expr::Times { right, .. } | Expr::Add { right, .. } | Expr::Sub { right, .. } => open_right(right, latex_frac),
        Expr::Frac { denominator, .. } if !latex_frac => open_right(denominator, latex_frac),
        Expr::Logic { right, .. } => open_right(right, latex_frac),
        Expr::Relation { rest, .. } => rest.last().is_some_and(|(_, e)| open_right(e, latex_frac)),
        _ => false,
    }
}

/// Left operand of a product or of `/`.
pub(crate) fn fits_term_left(e: &Expr, latex_frac: bool) -> bool {
    prec(e, latex_frac) >= Prec::Term && !open_right(e, latex_frac)
}

/// Right operand of a product. Implicit products cannot start with `-`,
/// that would read as subtraction.
pub(crate) fn fits_term_right(e: &Expr, latex_frac: bool, explicit: bool) -> bool {
    match e {
        Expr::Neg { .. } => explicit,
        _ => prec(e, latex_frac) >= Prec::Unary,
    }
}

/// Base of `^` or `_`.
pub(crate) fn fits_script_base(e: &Expr, latex_frac: bool) -> bool {
    match e {
        Expr::Subscript { .. } => true,
        _ => prec(e, latex_frac) == Prec::Atom,
    }
}

pub(crate) fn contains_tall(e: &Expr) -> bool {
    let mut tall = false;
    e.walk(&mut |n| tall |= matches!(n, Expr::Frac { .. } | Expr::BigOp { .. } | Expr::Matrix { .. }));
    tall
}

pub(crate) fn bracket_pair(style: BracketStyle) -> (&'static str, &'static str) {
    match style {
        BracketStyle::Paren => ("(", ")"),
        BracketStyle::Square => ("[", "]"),
        BracketStyle::Brace => ("{", "}"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mathexpr::parse_str;

    #[test]
    fn precedence_classes() {
        assert_eq!(prec(&parse_str("a+b"), false), Prec::Additive);
        assert_eq!(prec(&parse_str("a/b"), false), Prec::Term);
        assert_eq!(prec(&parse_str("a/b"), true), Prec::Atom);
        assert!(open_right(&parse_str("-sum_i i"), false));
        assert!(!open_right(&parse_str("(sum_i i)"), false));
    }

    #[test]
    fn options_pick_the_serializer() {
        let e = parse_str("x^2");
        assert_eq!(RenderOptions::inline(Target::Latex).render(&e).text, "x^{2}");
        assert_eq!(RenderOptions::inline(Target::Spacemath).render(&e).text, "x^2");
        assert!(RenderOptions::inline(Target::MathmlHtml)
            .render(&e)
            .text
            .contains("<msup>"));
    }
}
