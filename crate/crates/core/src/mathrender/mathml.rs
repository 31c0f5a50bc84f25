use super::{fits_script_base, fits_term_left, fits_term_right, prec, Prec, RenderOptions};
use crate::mathexpr::{BigOpKind, BracketStyle, Expr, LogicOp, NumberSet};

const INVISIBLE_TIMES: &str = "&#x2062;";
const APPLY_FUNCTION: &str = "&#x2061;";

/// A `<math>` element. Output is well-formed XML for any tree.
pub fn render_presentation(expr: &Expr, opts: &RenderOptions) -> String {
    let mut w = Writer {
        out: String::new(),
        apply_marks: opts.show_apply_distinction,
    };
    w.out.push_str("<math xmlns=\"http://www.w3.org/1998/Math/MathML\"");
    if opts.display_mode {
        w.out.push_str(" display=\"block\"");
    }
    w.out.push('>');
    w.expr(expr);
    w.out.push_str("</math>");
    w.out
}

pub(crate) fn escape_xml(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&#39;"),
            // characters XML 1.0 does not allow at all
            c if (c as u32) < 0x20 && !matches!(c, '\t' | '\n' | '\r') => out.push('\u{FFFD}'),
            '\u{FFFE}' | '\u{FFFF}' => out.push('\u{FFFD}'),
            c => out.push(c),
        }
    }
    out
}

fn greek_char(name: &str) -> Option<char> {
    const LOWER: &[(&str, char)] = &[
        ("alpha", 'α'),
        ("beta", 'β'),
        ("gamma", 'γ'),
        ("delta", 'δ'),
        ("epsilon", 'ϵ'),
        ("varepsilon", 'ε'),
        ("zeta", 'ζ'),
        ("eta", 'η'),
        ("theta", 'θ'),
        ("vartheta", 'ϑ'),
        ("iota", 'ι'),
        ("kappa", 'κ'),
        ("lambda", 'λ'),
        ("mu", 'μ'),
        ("nu", 'ν'),
        ("xi", 'ξ'),
        ("pi", 'π'),
        ("rho", 'ρ'),
        ("sigma", 'σ'),
        ("tau", 'τ'),
        ("upsilon", 'υ'),
        ("phi", 'ϕ'),
        ("varphi", 'φ'),
        ("chi", 'χ'),
        ("psi", 'ψ'),
        ("omega", 'ω'),
        ("Gamma", 'Γ'),
        ("Delta", 'Δ'),
        ("Theta", 'Θ'),
        ("Lambda", 'Λ'),
        ("Xi", 'Ξ'),
        ("Pi", 'Π'),
        ("Sigma", 'Σ'),
        ("Upsilon", 'Υ'),
        ("Phi", 'Φ'),
        ("Psi", 'Ψ'),
        ("Omega", 'Ω'),
    ];
    LOWER.iter().find(|(n, _)| *n == name).map(|(_, c)| *c)
}

struct Writer {
    out: String,
    apply_marks: bool,
}

impl Writer {
    fn tag(&mut self, tag: &str, text: &str) {
        self.out.push('<');
        self.out.push_str(tag);
        self.out.push('>');
        self.out.push_str(&escape_xml(text));
        self.out.push_str("</");
        self.out.push_str(tag.split(' ').next().unwrap_or(tag));
        self.out.push('>');
    }

    fn mo(&mut self, op: &str) {
        self.tag("mo", op);
    }

    fn fence(&mut self, style: BracketStyle, open: bool) {
        let (o, c) = super::bracket_pair(style);
        self.mo(if open { o } else { c });
    }

    fn row(&mut self, f: impl FnOnce(&mut Self)) {
        self.out.push_str("<mrow>");
        f(self);
        self.out.push_str("</mrow>");
    }

    fn wrapped(&mut self, e: &Expr) {
        self.row(|w| {
            w.fence(BracketStyle::Paren, true);
            w.expr(e);
            w.fence(BracketStyle::Paren, false);
        });
    }

    fn guarded(&mut self, e: &Expr, fits: bool) {
        if fits {
            self.expr(e)
        } else {
            self.wrapped(e)
        }
    }

    fn at_least(&mut self, e: &Expr, p: Prec) {
        self.guarded(e, prec(e, true) >= p)
    }

    fn list(&mut self, items: &[Expr]) {
        for (i, item) in items.iter().enumerate() {
            if i > 0 {
                self.mo(",");
            }
            self.at_least(item, Prec::Logic);
        }
    }

    fn script_base(&mut self, e: &Expr) {
        self.guarded(e, fits_script_base(e, true))
    }

    fn expr(&mut self, e: &Expr) {
        match e {
            Expr::Integer { value } => self.tag("mn", &value.to_string()),
            Expr::Decimal { text } => self.tag("mn", text),
            Expr::Ident { name } => self.tag("mi", name),
            Expr::Greek { name } => {
                let s = greek_char(name).map_or_else(|| name.clone(), String::from);
                self.tag("mi", &s)
            }
            Expr::SymbolConst { name } => match name.as_str() {
                "pi" => self.tag("mi", "π"),
                "oo" => self.tag("mi", "∞"),
                "AA" => self.mo("∀"),
                "EE" => self.mo("∃"),
                other => self.tag("mi", other),
            },
            Expr::BlackboardSet { set } => self.tag(
                "mi",
                match set {
                    NumberSet::N => "ℕ",
                    NumberSet::Z => "ℤ",
                    NumberSet::Q => "ℚ",
                    NumberSet::R => "ℝ",
                    NumberSet::C => "ℂ",
                },
            ),
            Expr::Add { left, right } | Expr::Sub { left, right } => {
                let op = if matches!(e, Expr::Add { .. }) { "+" } else { "−" };
                self.row(|w| {
                    w.at_least(left, Prec::Additive);
                    w.mo(op);
                    w.at_least(right, Prec::Term);
                });
            }
            Expr::Neg { arg } => self.row(|w| {
                w.mo("−");
                w.at_least(arg, Prec::Unary);
            }),
            Expr::Times { left, right, explicit } => self.row(|w| {
                w.guarded(left, fits_term_left(left, true));
                if *explicit {
                    w.mo("×");
                } else if w.apply_marks {
                    w.out.push_str("<mo>");
                    w.out.push_str(INVISIBLE_TIMES);
                    w.out.push_str("</mo>");
                }
                w.guarded(right, fits_term_right(right, true, *explicit));
            }),
            Expr::Apply { head, args } => self.row(|w| {
                w.script_base(head);
                if w.apply_marks {
                    w.out.push_str("<mo>");
                    w.out.push_str(APPLY_FUNCTION);
                    w.out.push_str("</mo>");
                }
                w.row(|w| {
                    w.fence(BracketStyle::Paren, true);
                    w.list(args);
                    w.fence(BracketStyle::Paren, false);
                });
            }),
            Expr::Frac { numerator, denominator } => {
                self.out.push_str("<mfrac>");
                self.row(|w| w.expr(numerator));
                self.row(|w| w.expr(denominator));
                self.out.push_str("</mfrac>");
            }
            Expr::Power { base, exponent } => {
                if let Expr::Subscript { base: b, index } = base.as_ref() {
                    self.out.push_str("<msubsup>");
                    self.script_base(b);
                    self.row(|w| w.expr(index));
                    self.row(|w| w.expr(exponent));
                    self.out.push_str("</msubsup>");
                } else {
                    self.out.push_str("<msup>");
                    self.script_base(base);
                    self.row(|w| w.expr(exponent));
                    self.out.push_str("</msup>");
                }
            }
            Expr::Subscript { base, index } => {
                self.out.push_str("<msub>");
                self.script_base(base);
                self.row(|w| w.expr(index));
                self.out.push_str("</msub>");
            }
            Expr::Sqrt { arg } => {
                self.out.push_str("<msqrt>");
                self.expr(arg);
                self.out.push_str("</msqrt>");
            }
            Expr::Root { index, arg } => {
                self.out.push_str("<mroot>");
                self.row(|w| w.expr(arg));
                self.row(|w| w.expr(index));
                self.out.push_str("</mroot>");
            }
            Expr::BigOp {
                op,
                binder,
                lower,
                upper,
                body,
            } => self.row(|w| {
                let symbol = match op {
                    BigOpKind::Sum => "∑",
                    BigOpKind::Prod => "∏",
                    BigOpKind::Int => "∫",
                };
                // limits stack under and over sum/prod; integrals take them as scripts
                let (both, under, over) = match op {
                    BigOpKind::Int => ("msubsup", "msub", "msup"),
                    _ => ("munderover", "munder", "mover"),
                };
                let lower_part = |w: &mut Writer| {
                    w.row(|w| {
                        if let Some(b) = binder {
                            w.expr(b);
                            w.mo("=");
                        }
                        if let Some(l) = lower {
                            w.expr(l);
                        }
                    })
                };
                let has_lower = binder.is_some() || lower.is_some();
                let tag = match (has_lower, upper.is_some()) {
                    (true, true) => Some(both),
                    (true, false) => Some(under),
                    (false, true) => Some(over),
                    (false, false) => None,
                };
                if let Some(tag) = tag {
                    w.out.push('<');
                    w.out.push_str(tag);
                    w.out.push('>');
                }
                w.out.push_str("<mo largeop=\"true\">");
                w.out.push_str(symbol);
                w.out.push_str("</mo>");
                if has_lower {
                    lower_part(w);
                }
                if let Some(u) = upper {
                    w.row(|w| w.expr(u));
                }
                if let Some(tag) = tag {
                    w.out.push_str("</");
                    w.out.push_str(tag);
                    w.out.push('>');
                }
                w.at_least(body, Prec::Term);
            }),
            Expr::Matrix { style, rows } => self.row(|w| {
                w.fence(*style, true);
                w.out.push_str("<mtable>");
                for row in rows {
                    w.out.push_str("<mtr>");
                    for cell in row {
                        w.out.push_str("<mtd>");
                        w.expr(cell);
                        w.out.push_str("</mtd>");
                    }
                    w.out.push_str("</mtr>");
                }
                w.out.push_str("</mtable>");
                w.fence(*style, false);
            }),
            Expr::Relation { first, rest } => self.row(|w| {
                w.at_least(first, Prec::Additive);
                for (rel, e) in rest {
                    w.mo(rel.glyph());
                    w.at_least(e, Prec::Additive);
                }
            }),
            Expr::Logic { op, left, right } => self.row(|w| {
                w.at_least(left, Prec::Logic);
                w.tag(
                    "mtext",
                    match op {
                        LogicOp::Or => "\u{a0}or\u{a0}",
                        LogicOp::And => "\u{a0}and\u{a0}",
                    },
                );
                w.at_least(right, Prec::Relation);
            }),
            Expr::Bracketed { style, inner } => self.row(|w| {
                w.fence(*style, true);
                w.expr(inner);
                w.fence(*style, false);
            }),
            Expr::Tuple { items } => self.row(|w| w.list(items)),
            Expr::TextFragment { text } => self.tag("mtext", text),
            Expr::Error { raw } => {
                self.out.push_str("<merror>");
                self.tag("mtext", raw);
                self.out.push_str("</merror>");
            }
            Expr::Slot { .. } => self.tag("mi", "□"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mathexpr::parse_str;

    fn m(src: &str) -> String {
        render_presentation(&parse_str(src), &RenderOptions::default())
    }

    #[test]
    fn identifier_is_one_element() {
        assert_eq!(
            m("x"),
            "<math xmlns=\"http://www.w3.org/1998/Math/MathML\"><mi>x</mi></math>"
        );
    }

    #[test]
    fn sum_limits_stack() {
        let s = m("sum_(k=1)^n k");
        assert!(s.contains("<munderover><mo largeop=\"true\">∑</mo><mrow><mi>k</mi><mo>=</mo><mn>1</mn></mrow><mrow><mi>n</mi></mrow></munderover>"), "{s}");
    }

    #[test]
    fn apply_marks_are_optional() {
        let plain = m("f(x) y");
        assert!(!plain.contains("&#x2061;"));
        let opts = RenderOptions {
            show_apply_distinction: true,
            ..Default::default()
        };
        let marked = render_presentation(&parse_str("f(x) y"), &opts);
        assert!(marked.contains("&#x2061;") && marked.contains("&#x2062;"));
    }

    #[test]
    fn escapes_markup() {
        assert!(m("a<b").contains("<mo>&lt;</mo>"));
        assert!(m("\"x&y\"").contains("<mtext>x&amp;y</mtext>"));
    }
}
