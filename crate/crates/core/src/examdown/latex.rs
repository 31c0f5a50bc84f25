use super::html::fill_slots;
use super::{BlockKind, Document, Inline, Math, Placeholder};
use crate::calcengine::{Calculator, Env};
use crate::mathexpr::Expr;
use crate::mathrender::{escape_text, render_latex, RenderOptions, Target};

const PREAMBLE: &str = "\\documentclass{article}\n\\usepackage{amsmath,amssymb}\n\\begin{document}\n";

/// A standalone LaTeX document. Placeholders are evaluated when `calc` is
/// given; otherwise, or when evaluation fails, their source is shown.
/// Plots have no LaTeX form and always show their source.
pub fn render_document_latex(doc: &Document, calc: Option<&Calculator>) -> String {
    let mut w = Writer {
        out: String::new(),
        calc,
    };
    w.out.push_str(PREAMBLE);
    for b in &doc.blocks {
        match &b.kind {
            BlockKind::Heading { level, inlines } => {
                let cmd = match level {
                    1 => "section",
                    2 => "subsection",
                    3 => "subsubsection",
                    _ => "paragraph",
                };
                w.out.push_str(&format!("\\{cmd}*{{"));
                w.inlines(inlines);
                w.out.push_str("}\n\n");
            }
            BlockKind::Paragraph { inlines } => {
                w.inlines(inlines);
                w.out.push_str("\n\n");
            }
            BlockKind::ListItemGroup { ordered, items } => {
                let env = if *ordered { "enumerate" } else { "itemize" };
                w.out.push_str(&format!("\\begin{{{env}}}\n"));
                for item in items {
                    w.out.push_str("\\item ");
                    w.inlines(item);
                    w.out.push('\n');
                }
                w.out.push_str(&format!("\\end{{{env}}}\n\n"));
            }
            BlockKind::CodeFence { text, .. } => {
                // `\end{verbatim}` inside the code would end the environment early
                let safe = text.replace("\\end{verbatim}", "\\end {verbatim}");
                w.out
                    .push_str(&format!("\\begin{{verbatim}}\n{safe}\n\\end{{verbatim}}\n\n"));
            }
            BlockKind::DisplayMath { math } => {
                w.out.push_str("\\[\n");
                w.math(math);
                w.out.push_str("\n\\]\n\n");
            }
            BlockKind::Derivation { rows } => {
                w.out.push_str("\\[\n\\begin{array}{rll}\n");
                for row in rows {
                    if let Some(r) = row.relator {
                        w.out.push_str(r.latex());
                    }
                    w.out.push_str(" & ");
                    w.math(&row.math);
                    w.out.push_str(" & ");
                    if let Some(why) = &row.justification {
                        w.out.push_str(&format!("\\text{{{}}}", escape_text(why)));
                    }
                    w.out.push_str(" \\\\\n");
                }
                w.out.push_str("\\end{array}\n\\]\n\n");
            }
            BlockKind::AnswerLine { label, math } => {
                w.out.push_str("\\par\\noindent\\fbox{\\textbf{Answer");
                if let Some(l) = label {
                    w.out.push(' ');
                    w.out.push_str(&escape_text(l));
                }
                w.out.push_str(":} \\(");
                w.math(math);
                w.out.push_str("\\)}\n\n");
            }
            BlockKind::Blank => {}
        }
    }
    w.out.push_str("\\end{document}\n");
    w.out
}

struct Writer<'c> {
    out: String,
    calc: Option<&'c Calculator>,
}

impl Writer<'_> {
    fn math(&mut self, m: &Math) {
        let text = self.formula(&m.expr, &m.placeholders);
        self.out.push_str(&text);
    }

    fn formula(&self, expr: &Expr, placeholders: &[Placeholder]) -> String {
        let fills: Vec<Expr> = placeholders.iter().map(|p| self.fill(p)).collect();
        render_latex(&fill_slots(expr, &fills), &RenderOptions::inline(Target::Latex)).text
    }

    fn fill(&self, p: &Placeholder) -> Expr {
        match (p, self.calc) {
            (Placeholder::Calc { expr, .. }, Some(calc)) => match calc.eval_exact(expr, &Env::new()) {
                Ok(v) => v.to_expr(),
                Err(_) => Expr::text(p.raw()),
            },
            _ => Expr::text(p.raw()),
        }
    }

    fn inlines(&mut self, items: &[Inline]) {
        let mut i = 0;
        while i < items.len() {
            match &items[i] {
                Inline::Text { text } => self.out.push_str(&escape_text(text)),
                Inline::Emphasis { children } => {
                    self.out.push_str("\\emph{");
                    self.inlines(children);
                    self.out.push('}');
                }
                Inline::Strong { children } => {
                    self.out.push_str("\\textbf{");
                    self.inlines(children);
                    self.out.push('}');
                }
                Inline::CodeSpan { text } => {
                    self.out.push_str("\\texttt{");
                    self.out.push_str(&escape_text(text));
                    self.out.push('}');
                }
                Inline::InlineMath { expr, display, .. } => {
                    let slotted: Vec<Placeholder> = items[i + 1..]
                        .iter()
                        .map_while(|n| match n.clone() {
                            Inline::CalcPlaceholder {
                                expr,
                                raw,
                                span,
                                slot: Some(_),
                            } => Some(Placeholder::Calc { expr, raw, span }),
                            Inline::PlotPlaceholder {
                                raw,
                                span,
                                slot: Some(_),
                                ..
                            } => Some(Placeholder::Calc {
                                expr: Expr::error(raw.clone()),
                                raw,
                                span,
                            }),
                            _ => None,
                        })
                        .collect();
                    let body = self.formula(expr, &slotted);
                    let (open, close) = if *display { ("\\[", "\\]") } else { ("\\(", "\\)") };
                    self.out.push_str(&format!("{open}{body}{close}"));
                    i += slotted.len();
                }
                Inline::CalcPlaceholder { expr, raw, span, .. } => {
                    let p = Placeholder::Calc {
                        expr: expr.clone(),
                        raw: raw.clone(),
                        span: *span,
                    };
                    match self.fill(&p) {
                        Expr::TextFragment { .. } => self.out.push_str(&format!("\\texttt{{{}}}", escape_text(raw))),
                        value => {
                            let body = render_latex(&value, &RenderOptions::inline(Target::Latex)).text;
                            self.out.push_str(&format!("\\({body}\\)"));
                        }
                    }
                }
                Inline::PlotPlaceholder { raw, .. } => {
                    self.out.push_str(&format!("\\texttt{{{}}}", escape_text(raw)));
                }
            }
            i += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examdown::parse_document;

    #[test]
    fn cas_text_paragraph() {
        let doc = parse_document("We calculate \\(6\\times 3={@6*3@}\\).");
        let on = render_document_latex(&doc, Some(&Calculator::default()));
        assert!(on.contains("We calculate \\(6 \\times 3 = 18\\)."), "{on}");
        let off = render_document_latex(&doc, None);
        assert!(off.contains("\\text{\\{@6*3@\\}}"), "{off}");
        assert!(off.starts_with("\\documentclass"));
        assert!(off.ends_with("\\end{document}\n"));
    }

    #[test]
    fn derivation_array() {
        let doc = parse_document(":::derivation\nx^2-10x+9=0\n<=> (x-1)(x-9)=0 | factorise\n:::\n");
        let tex = render_document_latex(&doc, None);
        assert!(
            tex.contains("\\Leftrightarrow & (x - 1) (x - 9) = 0 & \\text{factorise} \\\\"),
            "{tex}"
        );
    }
}
