use super::{Block, BlockKind, DerivRow, Document, Inline, Math, Placeholder};
use crate::calcengine::{Calculator, Env, Value};
use crate::diagnostic::{Code, Diagnostic};
use crate::mathexpr::Expr;
use crate::mathrender::{escape_xml, render_presentation, RenderOptions, Target};

const MATHML_NS: &str = "http://www.w3.org/1998/Math/MathML";

const STYLE: &str = "body{font-family:serif;line-height:1.5;max-width:48em;margin:1em auto;padding:0 1em}\
table.derivation{border-collapse:collapse;margin:0.5em 0}\
table.derivation td{padding:0.1em 0.4em;vertical-align:baseline}\
td.derivation-relator{text-align:right}\
td.derivation-why{font-style:italic;color:#555}\
div.answer{background:#fff6d5;border-left:4px solid #e0b000;padding:0.3em 0.6em;margin:0.5em 0}\
span.answer-label{font-weight:bold;margin-right:0.5em}\
span.calc-raw{font-family:monospace}\
span.badge{font-size:70%;border-radius:0.6em;padding:0 0.4em;margin-left:0.2em;font-family:sans-serif}\
span.badge-info{background:#dde7f7;color:#234}\
span.badge-warning{background:#f7dede;color:#611}";

#[derive(Debug, Clone, PartialEq)]
pub struct RenderedDocument {
    /// A complete XHTML page.
    pub html: String,
    /// The document's own diagnostics followed by those raised while
    /// evaluating placeholders, ordered by position.
    pub diagnostics: Vec<Diagnostic>,
}

/// Renders `doc` as XHTML. Without a calculator no placeholder is
/// evaluated; each shows its source and an info badge instead.
pub fn render_document_html(doc: &Document, calc: Option<&Calculator>) -> RenderedDocument {
    let mut w = Writer {
        out: String::new(),
        calc,
        diags: Vec::new(),
    };
    w.out
        .push_str("<!DOCTYPE html>\n<html xmlns=\"http://www.w3.org/1999/xhtml\" lang=\"en\">\n<head>\n");
    w.out
        .push_str("<meta charset=\"utf-8\"/>\n<title>ExamDown</title>\n<style>");
    w.out.push_str(STYLE);
    w.out.push_str("</style>\n</head>\n<body>\n");
    for b in &doc.blocks {
        w.block(b);
    }
    w.out.push_str("</body>\n</html>\n");

    let mut diagnostics = doc.diagnostics.clone();
    diagnostics.extend(w.diags);
    diagnostics.sort_by_key(|d| (d.span.start, d.span.end));
    RenderedDocument {
        html: w.out,
        diagnostics,
    }
}

/// What a placeholder turned into.
enum Outcome {
    Value(Value),
    Svg(String),
    /// Not evaluated: the calculator is off, or evaluation failed.
    Raw {
        badge: &'static str,
        title: String,
    },
}

struct Writer<'c> {
    out: String,
    calc: Option<&'c Calculator>,
    diags: Vec<Diagnostic>,
}

impl Writer<'_> {
    fn block(&mut self, b: &Block) {
        match &b.kind {
            BlockKind::Heading { level, inlines } => {
                self.out.push_str(&format!("<h{level}>"));
                self.inlines(inlines);
                self.out.push_str(&format!("</h{level}>\n"));
            }
            BlockKind::Paragraph { inlines } => {
                self.out.push_str("<p>");
                self.inlines(inlines);
                self.out.push_str("</p>\n");
            }
            BlockKind::ListItemGroup { ordered, items } => {
                let tag = if *ordered { "ol" } else { "ul" };
                self.out.push_str(&format!("<{tag}>\n"));
                for item in items {
                    self.out.push_str("<li>");
                    self.inlines(item);
                    self.out.push_str("</li>\n");
                }
                self.out.push_str(&format!("</{tag}>\n"));
            }
            BlockKind::CodeFence { info, text } => {
                match info.split_whitespace().next() {
                    Some(lang) => self
                        .out
                        .push_str(&format!("<pre><code class=\"language-{}\">", escape_xml(lang))),
                    None => self.out.push_str("<pre><code>"),
                }
                self.out.push_str(&escape_xml(text));
                self.out.push_str("</code></pre>\n");
            }
            BlockKind::DisplayMath { math } => {
                self.out.push_str("<div class=\"math-display\">");
                self.math(&math.expr, true, &math.placeholders);
                self.out.push_str("</div>\n");
            }
            BlockKind::Derivation { rows } => {
                self.out.push_str("<table class=\"derivation\"><tbody>\n");
                for row in rows {
                    self.deriv_row(row);
                }
                self.out.push_str("</tbody></table>\n");
            }
            BlockKind::AnswerLine { label, math } => self.answer(label.as_deref(), math),
            BlockKind::Blank => {}
        }
    }

    fn deriv_row(&mut self, row: &DerivRow) {
        self.out.push_str("<tr><td class=\"derivation-relator\">");
        if let Some(rel) = row.relator {
            self.out.push_str(&format!(
                "<math xmlns=\"{MATHML_NS}\"><mo>{}</mo></math>",
                escape_xml(rel.glyph())
            ));
        }
        self.out.push_str("</td><td class=\"derivation-expr\">");
        self.math(&row.math.expr, false, &row.math.placeholders);
        self.out.push_str("</td><td class=\"derivation-why\">");
        if let Some(why) = &row.justification {
            self.out.push_str(&escape_xml(why));
        }
        self.out.push_str("</td></tr>\n");
    }

    fn answer(&mut self, label: Option<&str>, math: &Math) {
        self.out.push_str("<div class=\"answer\"><span class=\"answer-label\">");
        match label {
            Some(l) => self.out.push_str(&format!("Answer {}:", escape_xml(l))),
            None => self.out.push_str("Answer:"),
        }
        self.out.push_str("</span>");
        self.math(&math.expr, false, &math.placeholders);
        self.out.push_str("</div>\n");
    }

    fn inlines(&mut self, items: &[Inline]) {
        let mut i = 0;
        while i < items.len() {
            match &items[i] {
                Inline::Text { text } => self.out.push_str(&escape_xml(text)),
                Inline::Emphasis { children } => {
                    self.out.push_str("<em>");
                    self.inlines(children);
                    self.out.push_str("</em>");
                }
                Inline::Strong { children } => {
                    self.out.push_str("<strong>");
                    self.inlines(children);
                    self.out.push_str("</strong>");
                }
                Inline::CodeSpan { text } => {
                    self.out.push_str("<code>");
                    self.out.push_str(&escape_xml(text));
                    self.out.push_str("</code>");
                }
                Inline::InlineMath { expr, display, .. } => {
                    let slotted: Vec<Placeholder> = items[i + 1..]
                        .iter()
                        .map_while(|n| match n {
                            Inline::CalcPlaceholder { slot: Some(_), .. }
                            | Inline::PlotPlaceholder { slot: Some(_), .. } => as_placeholder(n),
                            _ => None,
                        })
                        .collect();
                    self.math(expr, *display, &slotted);
                    i += slotted.len();
                }
                p @ (Inline::CalcPlaceholder { .. } | Inline::PlotPlaceholder { .. }) => {
                    let p = as_placeholder(p).expect("placeholder inline");
                    self.standalone(&p);
                }
            }
            i += 1;
        }
    }

    /// A formula with its placeholders filled in. Plots and badges cannot
    /// live inside MathML, so they follow the formula.
    fn math(&mut self, expr: &Expr, display: bool, placeholders: &[Placeholder]) {
        let mut fills = Vec::with_capacity(placeholders.len());
        let mut trailer = String::new();
        for p in placeholders {
            match self.evaluate(p) {
                Outcome::Value(v) => fills.push(v.to_expr()),
                Outcome::Svg(svg) => {
                    fills.push(Expr::text(p.raw()));
                    trailer.push_str(&format!("<span class=\"plot\">{svg}</span>"));
                }
                Outcome::Raw { badge, title } => {
                    fills.push(Expr::text(p.raw()));
                    trailer.push_str(&badge_html(badge, &title));
                }
            }
        }
        let filled = fill_slots(expr, &fills);
        let mut opts = if display {
            RenderOptions::display(Target::MathmlHtml)
        } else {
            RenderOptions::inline(Target::MathmlHtml)
        };
        // invisible, but tells assistive technology f(x) from x(t+1) products
        opts.show_apply_distinction = true;
        self.out.push_str(&render_presentation(&filled, &opts));
        self.out.push_str(&trailer);
    }

    fn standalone(&mut self, p: &Placeholder) {
        match self.evaluate(p) {
            Outcome::Value(v) => {
                self.out.push_str("<span class=\"calc-value\">");
                self.out.push_str(&render_presentation(
                    &v.to_expr(),
                    &RenderOptions::inline(Target::MathmlHtml),
                ));
                self.out.push_str("</span>");
            }
            Outcome::Svg(svg) => self.out.push_str(&format!("<span class=\"plot\">{svg}</span>")),
            Outcome::Raw { badge, title } => {
                self.out.push_str("<span class=\"calc-raw\">");
                self.out.push_str(&escape_xml(p.raw()));
                self.out.push_str("</span>");
                self.out.push_str(&badge_html(badge, &title));
            }
        }
    }

    fn evaluate(&mut self, p: &Placeholder) -> Outcome {
        let Some(calc) = self.calc else {
            return Outcome::Raw {
                badge: "info",
                title: "calculator disabled".to_string(),
            };
        };
        let failed = |diags: &mut Vec<Diagnostic>, code: Code, message: String| {
            diags.push(Diagnostic::new(code, p.span(), message.clone()));
            Outcome::Raw {
                badge: "warning",
                title: message,
            }
        };
        match p {
            Placeholder::Calc { expr, .. } => match calc.eval_exact(expr, &Env::new()) {
                Ok(v) => {
                    if matches!(v, Value::Approx(_)) {
                        self.diags.push(Diagnostic::new(
                            Code::NumericFallback,
                            p.span(),
                            "no exact value; shown as a decimal approximation",
                        ));
                    }
                    Outcome::Value(v)
                }
                Err(e) => failed(&mut self.diags, e.code(), e.to_string()),
            },
            Placeholder::Plot {
                expr,
                binder,
                lower,
                upper,
                ..
            } => match calc.plot_svg(expr, binder, lower, upper) {
                Ok(svg) => Outcome::Svg(svg),
                Err(e) => failed(&mut self.diags, e.code(), e.to_string()),
            },
        }
    }
}

fn badge_html(kind: &str, title: &str) -> String {
    let label = if kind == "info" {
        "calculator off"
    } else {
        "not evaluated"
    };
    format!(
        "<span class=\"badge badge-{kind}\" title=\"{}\">{label}</span>",
        escape_xml(title)
    )
}

fn as_placeholder(n: &Inline) -> Option<Placeholder> {
    match n.clone() {
        Inline::CalcPlaceholder { expr, raw, span, .. } => Some(Placeholder::Calc { expr, raw, span }),
        Inline::PlotPlaceholder {
            expr,
            binder,
            lower,
            upper,
            raw,
            span,
            ..
        } => Some(Placeholder::Plot {
            expr,
            binder,
            lower,
            upper,
            raw,
            span,
        }),
        _ => None,
    }
}

/// Replaces each `Slot { index }` with `fills[index]`.
pub(crate) fn fill_slots(e: &Expr, fills: &[Expr]) -> Expr {
    if fills.is_empty() {
        return e.clone();
    }
    map_expr(e, &|n| match n {
        Expr::Slot { index } => fills.get(*index).cloned(),
        _ => None,
    })
}

/// Rebuilds `e` bottom-up, replacing any node for which `f` returns a value.
fn map_expr(e: &Expr, f: &dyn Fn(&Expr) -> Option<Expr>) -> Expr {
    if let Some(r) = f(e) {
        return r;
    }
    let m = |x: &Expr| Box::new(map_expr(x, f));
    let mo = |x: &Option<Box<Expr>>| x.as_deref().map(|x| Box::new(map_expr(x, f)));
    let all = |xs: &[Expr]| xs.iter().map(|x| map_expr(x, f)).collect::<Vec<_>>();
    match e {
        Expr::Add { left, right } => Expr::Add {
            left: m(left),
            right: m(right),
        },
        Expr::Sub { left, right } => Expr::Sub {
            left: m(left),
            right: m(right),
        },
        Expr::Neg { arg } => Expr::Neg { arg: m(arg) },
        Expr::Times { left, right, explicit } => Expr::Times {
            left: m(left),
            right: m(right),
            explicit: *explicit,
        },
        Expr::Apply { head, args } => Expr::Apply {
            head: m(head),
            args: all(args),
        },
        Expr::Frac { numerator, denominator } => Expr::Frac {
            numerator: m(numerator),
            denominator: m(denominator),
        },
        Expr::Power { base, exponent } => Expr::Power {
            base: m(base),
            exponent: m(exponent),
        },
        Expr::Subscript { base, index } => Expr::Subscript {
            base: m(base),
            index: m(index),
        },
        Expr::Sqrt { arg } => Expr::Sqrt { arg: m(arg) },
        Expr::Root { index, arg } => Expr::Root {
            index: m(index),
            arg: m(arg),
        },
        Expr::BigOp {
            op,
            binder,
            lower,
            upper,
            body,
        } => Expr::BigOp {
            op: *op,
            binder: mo(binder),
            lower: mo(lower),
            upper: mo(upper),
            body: m(body),
        },
        Expr::Matrix { style, rows } => Expr::Matrix {
            style: *style,
            rows: rows.iter().map(|r| all(r)).collect(),
        },
        Expr::Relation { first, rest } => Expr::Relation {
            first: m(first),
            rest: rest.iter().map(|(r, x)| (*r, map_expr(x, f))).collect(),
        },
        Expr::Logic { op, left, right } => Expr::Logic {
            op: *op,
            left: m(left),
            right: m(right),
        },
        Expr::Bracketed { style, inner } => Expr::Bracketed {
            style: *style,
            inner: m(inner),
        },
        Expr::Tuple { items } => Expr::Tuple { items: all(items) },
        leaf => leaf.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examdown::parse_document;

    fn xhtml(html: &str) -> roxmltree::Document<'_> {
        let opts = roxmltree::ParsingOptions {
            allow_dtd: true,
            ..Default::default()
        };
        roxmltree::Document::parse_with_options(html, opts).expect("well-formed")
    }

    fn visible_text(html: &str) -> String {
        let doc = xhtml(html);
        let body = doc.descendants().find(|n| n.has_tag_name("body")).unwrap();
        body.descendants()
            .filter(|n| n.is_text())
            .filter(|n| !n.ancestors().any(|a| a.has_tag_name("style")))
            .map(|n| n.text().unwrap())
            .collect()
    }

    const CAS: &str = "We calculate \\(6\\times 3={@6*3@}\\).";

    #[test]
    fn calculator_fills_placeholders() {
        let doc = parse_document(CAS);
        let r = render_document_html(&doc, Some(&Calculator::default()));
        let text = visible_text(&r.html);
        assert!(text.contains("6×3=18"), "{text}");
        assert!(!text.contains("{@"));
        assert!(r.diagnostics.is_empty(), "{:?}", r.diagnostics);
    }

    #[test]
    fn calculator_free_shows_source() {
        let doc = parse_document(CAS);
        let r = render_document_html(&doc, None);
        let text = visible_text(&r.html);
        assert!(text.contains("{@6*3@}"), "{text}");
        assert!(r.html.contains("badge-info"));
    }

    #[test]
    fn empty_document_shell() {
        let r = render_document_html(&parse_document(""), None);
        let doc = xhtml(&r.html);
        let body = doc.descendants().find(|n| n.has_tag_name("body")).unwrap();
        assert_eq!(body.children().filter(|n| n.is_element()).count(), 0);
    }

    #[test]
    fn derivation_table_has_three_columns() {
        let src = ":::derivation\nx^2-10x+9=0\n<=> (x-5)^2-16=0 | Complete the square\n:::\n";
        let r = render_document_html(&parse_document(src), None);
        let doc = xhtml(&r.html);
        let rows: Vec<_> = doc.descendants().filter(|n| n.has_tag_name("tr")).collect();
        assert_eq!(rows.len(), 2);
        for row in &rows {
            assert_eq!(row.children().filter(|n| n.has_tag_name("td")).count(), 3);
        }
        assert!(visible_text(&r.html).contains("⇔"));
        assert!(visible_text(&r.html).contains("Complete the square"));
    }

    #[test]
    fn failures_degrade_to_source() {
        let r = render_document_html(&parse_document("{@1/0@} and {@y+1@}"), Some(&Calculator::default()));
        let text = visible_text(&r.html);
        assert!(text.contains("{@1/0@}") && text.contains("{@y+1@}"));
        let codes: Vec<Code> = r.diagnostics.iter().map(|d| d.code).collect();
        assert_eq!(codes, vec![Code::DivisionByZero, Code::UnboundVariable]);
    }

    #[test]
    fn plots_become_svg() {
        let r = render_document_html(
            &parse_document("See {@plot(x^2/(1+x^2),[x,-3,3])@}."),
            Some(&Calculator::default()),
        );
        assert!(r.html.contains("<svg"));
        xhtml(&r.html);
    }

    #[test]
    fn answers_are_highlighted() {
        let r = render_document_html(&parse_document("answer[q2]: 18"), None);
        assert!(r
            .html
            .contains("<div class=\"answer\"><span class=\"answer-label\">Answer q2:</span>"));
    }

    #[test]
    fn numeric_fallback_is_reported() {
        let r = render_document_html(&parse_document("{@sqrt(2)@}"), Some(&Calculator::default()));
        assert!(visible_text(&r.html).contains("1.41421356237"));
        assert_eq!(r.diagnostics[0].code, Code::NumericFallback);
    }
}
