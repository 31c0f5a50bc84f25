use super::{contains_tall, fits_script_base, fits_term_left, fits_term_right, prec, Prec, RenderOptions, Rendered};
use crate::mathexpr::{BracketStyle, Category, Expr, LogicOp, SymbolTable};

/// Canonical LaTeX. Scripts are always braced and fractions use `\frac`.
/// `opts` only matters for the surrounding delimiters, which callers add.
pub fn render_latex(expr: &Expr, opts: &RenderOptions) -> Rendered {
    let _ = opts;
    let mut w = Writer {
        out: String::new(),
        lossy: false,
        symbols: SymbolTable::builtin(),
    };
    w.expr(expr);
    Rendered {
        text: w.out,
        lossy: w.lossy,
    }
}

/// Escapes text for `\text{}` / `\texttt{}`.
pub(crate) fn escape_text(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\textbackslash{}"),
            '{' | '}' | '#' | '$' | '%' | '&' | '_' => {
                out.push('\\');
                out.push(c);
            }
            '^' => out.push_str("\\^{}"),
            '~' => out.push_str("\\~{}"),
            _ => out.push(c),
        }
    }
    out
}

struct Writer {
    out: String,
    lossy: bool,
    symbols: &'static SymbolTable,
}

impl Writer {
    fn open(&mut self, style: BracketStyle, tall: bool) {
        if tall {
            self.out.push_str("\\left");
        }
        self.out.push_str(match style {
            BracketStyle::Paren => "(",
            BracketStyle::Square => "[",
            BracketStyle::Brace => "\\{",
        });
    }

    fn close(&mut self, style: BracketStyle, tall: bool) {
        if tall {
            self.out.push_str("\\right");
        }
        self.out.push_str(match style {
            BracketStyle::Paren => ")",
            BracketStyle::Square => "]",
            BracketStyle::Brace => "\\}",
        });
    }

    fn wrapped(&mut self, e: &Expr) {
        let tall = contains_tall(e);
        self.open(BracketStyle::Paren, tall);
        self.expr(e);
        self.close(BracketStyle::Paren, tall);
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

    fn braced(&mut self, e: &Expr) {
        self.out.push('{');
        self.expr(e);
        self.out.push('}');
    }

    fn list(&mut self, items: &[Expr], sep: &str) {
        for (i, item) in items.iter().enumerate() {
            if i > 0 {
                self.out.push_str(sep);
            }
            self.at_least(item, Prec::Logic);
        }
    }

    fn name(&mut self, name: &str) {
        match self.symbols.get(name) {
            Some(entry) if matches!(entry.category, Category::Func | Category::Op) => {
                self.out.push_str(&entry.hint);
            }
            None if name.chars().count() == 1 => self.out.push_str(name),
            _ if name.chars().all(|c| c.is_ascii_alphabetic()) => {
                self.out.push_str("\\operatorname{");
                self.out.push_str(name);
                self.out.push('}');
            }
            _ => {
                self.lossy = true;
                self.out.push_str(name);
            }
        }
    }

    fn hinted(&mut self, name: &str) {
        match self.symbols.get(name) {
            Some(entry) => self.out.push_str(&entry.hint),
            None => {
                self.lossy = true;
                self.out.push_str(name);
            }
        }
    }

    /// Juxtaposition. Digits next to digits get a thin space so `2\,3`
    /// does not read as 23.
    fn juxtapose(&mut self, right: &Expr) {
        let mut probe = Writer {
            out: String::new(),
            lossy: false,
            symbols: self.symbols,
        };
        probe.guarded(right, fits_term_right(right, true, false));
        let left_digit = self.out.ends_with(|c: char| c.is_ascii_digit());
        let right_start = probe.out.chars().next();
        match right_start {
            Some(c) if left_digit && c.is_ascii_digit() => self.out.push_str("\\,"),
            Some(c) if left_digit && c.is_ascii_alphabetic() => {}
            _ => self.out.push(' '),
        }
        self.out.push_str(&probe.out);
        self.lossy |= probe.lossy;
    }

    fn expr(&mut self, e: &Expr) {
        match e {
            Expr::Integer { value } => self.out.push_str(&value.to_string()),
            Expr::Decimal { text } => self.out.push_str(text),
            Expr::Ident { name } => self.name(name),
            Expr::SymbolConst { name } | Expr::Greek { name } => self.hinted(name),
            Expr::BlackboardSet { set } => {
                self.out.push_str("\\mathbb{");
                self.out.push(set.letter());
                self.out.push('}');
            }
            Expr::Add { left, right } => {
                self.at_least(left, Prec::Additive);
                self.out.push_str(" + ");
                self.at_least(right, Prec::Term);
            }
            Expr::Sub { left, right } => {
                self.at_least(left, Prec::Additive);
                self.out.push_str(" - ");
                self.at_least(right, Prec::Term);
            }
            Expr::Neg { arg } => {
                self.out.push('-');
                self.at_least(arg, Prec::Unary);
            }
            Expr::Times { left, right, explicit } => {
                self.guarded(left, fits_term_left(left, true));
                if *explicit {
                    self.out.push_str(" \\times ");
                    self.guarded(right, fits_term_right(right, true, true));
                } else {
                    self.juxtapose(right);
                }
            }
            Expr::Frac { numerator, denominator } => {
                self.out.push_str("\\frac");
                self.braced(numerator);
                self.braced(denominator);
            }
            Expr::Apply { head, args } => {
                let fits = matches!(**head, Expr::Ident { .. } | Expr::Greek { .. } | Expr::Apply { .. });
                self.lossy |= !fits;
                self.guarded(head, fits);
                let tall = args.iter().any(contains_tall);
                self.open(BracketStyle::Paren, tall);
                self.list(args, ", ");
                self.close(BracketStyle::Paren, tall);
            }
            Expr::Power { base, exponent } => {
                self.guarded(base, fits_script_base(base, true));
                self.out.push('^');
                self.braced(exponent);
            }
            Expr::Subscript { base, index } => {
                if matches!(**base, Expr::Subscript { .. }) {
                    // `x_{i}_{j}` is a double subscript error in LaTeX
                    self.braced(base);
                } else {
                    self.guarded(base, fits_script_base(base, true));
                }
                self.out.push('_');
                self.braced(index);
            }
            Expr::Sqrt { arg } => {
                self.out.push_str("\\sqrt");
                self.braced(arg);
            }
            Expr::Root { index, arg } => {
                self.out.push_str("\\sqrt[");
                self.expr(index);
                self.out.push(']');
                self.braced(arg);
            }
            Expr::BigOp {
                op,
                binder,
                lower,
                upper,
                body,
            } => {
                self.out.push('\\');
                self.out.push_str(op.name());
                match (binder, lower) {
                    (Some(b), Some(l)) => {
                        self.out.push_str("_{");
                        self.at_least(b, Prec::Additive);
                        self.out.push('=');
                        self.at_least(l, Prec::Additive);
                        self.out.push('}');
                    }
                    (None, Some(l)) => {
                        self.out.push('_');
                        self.braced(l);
                    }
                    (Some(b), None) => {
                        self.lossy = true;
                        self.out.push('_');
                        self.braced(b);
                    }
                    (None, None) => {}
                }
                if let Some(u) = upper {
                    self.out.push('^');
                    self.braced(u);
                }
                self.out.push(' ');
                self.at_least(body, Prec::Term);
            }
            Expr::Matrix { style, rows } => {
                let env = match style {
                    BracketStyle::Paren => "pmatrix",
                    BracketStyle::Square => "bmatrix",
                    BracketStyle::Brace => {
                        self.lossy = true;
                        "Bmatrix"
                    }
                };
                self.out.push_str("\\begin{");
                self.out.push_str(env);
                self.out.push('}');
                for (i, row) in rows.iter().enumerate() {
                    if i > 0 {
                        self.out.push_str(" \\\\ ");
                    }
                    self.list(row, " & ");
                }
                self.out.push_str("\\end{");
                self.out.push_str(env);
                self.out.push('}');
            }
            Expr::Relation { first, rest } => {
                self.at_least(first, Prec::Additive);
                for (rel, e) in rest {
                    self.out.push(' ');
                    self.out.push_str(rel.latex());
                    self.out.push(' ');
                    self.at_least(e, Prec::Additive);
                }
            }
            Expr::Logic { op, left, right } => {
                self.at_least(left, Prec::Logic);
                self.out.push_str(match op {
                    LogicOp::Or => " \\text{ or } ",
                    LogicOp::And => " \\text{ and } ",
                });
                self.at_least(right, Prec::Relation);
            }
            Expr::Bracketed { style, inner } => {
                let tall = contains_tall(inner);
                self.open(*style, tall);
                self.expr(inner);
                self.close(*style, tall);
            }
            Expr::Tuple { items } => self.list(items, ", "),
            Expr::TextFragment { text } => {
                let escaped = escape_text(text);
                self.lossy |= escaped != *text || LogicOp::from_name(text.trim()).is_some();
                self.out.push_str("\\text{");
                self.out.push_str(&escaped);
                self.out.push('}');
            }
            Expr::Error { raw } => {
                self.lossy = true;
                self.out.push_str("\\texttt{");
                self.out.push_str(&escape_text(raw));
                self.out.push('}');
            }
            Expr::Slot { .. } => {
                self.lossy = true;
                self.out.push_str("\\square");
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mathexpr::{parse_math, parse_str, Dialect};

    fn l(src: &str) -> String {
        render_latex(&parse_str(src), &RenderOptions::default()).text
    }

    #[test]
    fn scripts_are_braced() {
        assert_eq!(l("x"), "x");
        assert_eq!(l("x^23"), "x^{23}");
        assert_eq!(l("x_i^2"), "x_{i}^{2}");
        assert_eq!(l("x_i_j"), "{x_{i}}_{j}");
    }

    #[test]
    fn worked_example_reparses() {
        let e = parse_str("sum_(i=1)^n i^3=((n(n+1))/2)^2");
        let text = render_latex(&e, &RenderOptions::default()).text;
        assert_eq!(text, "\\sum_{i=1}^{n} i^{3} = \\left(\\frac{n(n + 1)}{2}\\right)^{2}");
        let back = parse_math(&text, SymbolTable::builtin());
        assert_eq!(back.dialect, Dialect::Latex);
        assert_eq!(back.expr, e);
        assert_eq!(
            back.expr,
            parse_str("\\sum_{i=1}^n i^3=\\left(\\frac{n(n+1)}{2}\\right)^2")
        );
    }

    #[test]
    fn products_and_names() {
        assert_eq!(l("2 3"), "2\\,3");
        assert_eq!(l("2 x"), "2x");
        assert_eq!(l("a*b"), "a \\times b");
        assert_eq!(l("sin(x)"), "\\sin(x)");
        assert_eq!(l("falling(7,3)"), "\\operatorname{falling}(7, 3)");
        assert_eq!(l("x in RR"), "x \\in \\mathbb{R}");
        assert_eq!(l("x=1 or x=9"), "x = 1 \\text{ or } x = 9");
    }

    #[test]
    fn matrices_use_environments() {
        assert_eq!(l("[[a,b],[c,d]]"), "\\begin{bmatrix}a & b \\\\ c & d\\end{bmatrix}");
    }

    #[test]
    fn errors_use_texttt() {
        let r = render_latex(&Expr::error("a_b{"), &RenderOptions::default());
        assert_eq!(r.text, "\\texttt{a\\_b\\{}");
        assert!(r.lossy);
    }
}
