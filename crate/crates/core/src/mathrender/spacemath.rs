use super::{fits_script_base, fits_term_left, fits_term_right, prec, Prec, Rendered};
use crate::mathexpr::{BracketStyle, Category, Expr, SymbolTable};

/// Space Math text that parses back to `expr`. Brackets are added only
/// where the grammar needs them.
pub fn render_spacemath(expr: &Expr) -> Rendered {
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

fn starts_with_brace(e: &Expr) -> bool {
    match e {
        Expr::Bracketed {
            style: BracketStyle::Brace,
            ..
        } => true,
        Expr::Power { base, .. } | Expr::Subscript { base, .. } => starts_with_brace(base),
        _ => false,
    }
}

struct Writer {
    out: String,
    lossy: bool,
    symbols: &'static SymbolTable,
}

impl Writer {
    fn wrapped(&mut self, e: &Expr) {
        self.out.push('(');
        self.expr(e);
        self.out.push(')');
    }

    fn guarded(&mut self, e: &Expr, fits: bool) {
        if fits {
            self.expr(e)
        } else {
            self.wrapped(e)
        }
    }

    fn at_least(&mut self, e: &Expr, p: Prec) {
        self.guarded(e, prec(e, false) >= p)
    }

    fn item(&mut self, e: &Expr) {
        self.at_least(e, Prec::Logic)
    }

    fn list(&mut self, items: &[Expr]) {
        for (i, item) in items.iter().enumerate() {
            if i > 0 {
                self.out.push_str(", ");
            }
            self.item(item);
        }
    }

    /// Operand of `^` (`sup`) or `_`. Round brackets around a script are
    /// grouping only, so a literal bracket pair needs a second one.
    fn script(&mut self, e: &Expr, sup: bool) {
        match e {
            Expr::Neg { arg } => {
                self.out.push('-');
                self.script(arg, sup);
            }
            Expr::Bracketed {
                style: BracketStyle::Paren,
                ..
            } => self.wrapped(e),
            _ => {
                let p = prec(e, false);
                // `^{` would switch the reader to LaTeX
                let fits = (p == Prec::Atom || (sup && p == Prec::Script)) && !starts_with_brace(e);
                self.guarded(e, fits)
            }
        }
    }

    fn radicand(&mut self, e: &Expr) {
        if matches!(
            e,
            Expr::Bracketed {
                style: BracketStyle::Paren,
                ..
            }
        ) {
            self.out.push('(');
            self.expr(e);
            self.out.push(')');
        } else {
            self.wrapped(e)
        }
    }

    fn ident(&mut self, name: &str) {
        let single = name.chars().count() == 1;
        let lossless = match self.symbols.get(name) {
            Some(entry) => matches!(entry.category, Category::Func | Category::Op),
            None => single,
        };
        self.lossy |= !lossless;
        self.out.push_str(name);
    }

    fn expr(&mut self, e: &Expr) {
        match e {
            Expr::Integer { value } => self.out.push_str(&value.to_string()),
            Expr::Decimal { text } => self.out.push_str(text),
            Expr::Ident { name } => self.ident(name),
            Expr::SymbolConst { name } | Expr::Greek { name } => self.out.push_str(name),
            Expr::BlackboardSet { set } => {
                let c = set.letter();
                self.out.push(c);
                self.out.push(c);
            }
            Expr::Add { left, right } => {
                self.at_least(left, Prec::Additive);
                self.out.push('+');
                self.at_least(right, Prec::Term);
            }
            Expr::Sub { left, right } => {
                self.at_least(left, Prec::Additive);
                self.out.push('-');
                if matches!(**right, Expr::Neg { .. }) {
                    self.out.push(' ');
                }
                self.at_least(right, Prec::Term);
            }
            Expr::Neg { arg } => {
                self.out.push('-');
                self.at_least(arg, Prec::Unary);
            }
            Expr::Times { left, right, explicit } => {
                self.guarded(left, fits_term_left(left, false));
                self.out.push_str(if *explicit { "*" } else { " " });
                self.guarded(right, fits_term_right(right, false, *explicit));
            }
            Expr::Frac { numerator, denominator } => {
                if matches!(
                    **numerator,
                    Expr::Bracketed {
                        style: BracketStyle::Paren,
                        ..
                    }
                ) {
                    self.wrapped(numerator);
                } else {
                    self.guarded(numerator, fits_term_left(numerator, false));
                }
                self.out.push('/');
                if matches!(
                    **denominator,
                    Expr::Bracketed {
                        style: BracketStyle::Paren,
                        ..
                    }
                ) {
                    self.wrapped(denominator);
                } else {
                    self.guarded(denominator, fits_term_right(denominator, false, true));
                }
            }
            Expr::Apply { head, args } => {
                let fits = matches!(**head, Expr::Ident { .. } | Expr::Greek { .. } | Expr::Apply { .. });
                self.lossy |= !fits;
                self.guarded(head, fits);
                self.out.push('(');
                self.list(args);
                self.out.push(')');
            }
            Expr::Power { base, exponent } => {
                self.guarded(base, fits_script_base(base, false));
                self.out.push('^');
                self.script(exponent, true);
            }
            Expr::Subscript { base, index } => {
                self.guarded(base, fits_script_base(base, false));
                self.out.push('_');
                self.script(index, false);
            }
            Expr::Sqrt { arg } => {
                self.out.push_str("sqrt");
                self.radicand(arg);
            }
            Expr::Root { index, arg } => {
                self.out.push_str("root");
                self.radicand(index);
                self.radicand(arg);
            }
            Expr::BigOp {
                op,
                binder,
                lower,
                upper,
                body,
            } => {
                self.out.push_str(op.name());
                match (binder, lower) {
                    (Some(b), Some(l)) => {
                        self.out.push_str("_(");
                        self.at_least(b, Prec::Additive);
                        self.out.push('=');
                        self.at_least(l, Prec::Additive);
                        self.out.push(')');
                    }
                    (None, Some(l)) => {
                        self.out.push('_');
                        self.script(l, false);
                    }
                    (Some(b), None) => {
                        self.lossy = true;
                        self.out.push('_');
                        self.script(b, false);
                    }
                    (None, None) => {}
                }
                if let Some(u) = upper {
                    self.out.push('^');
                    self.script(u, true);
                }
                self.out.push(' ');
                self.at_least(body, Prec::Term);
            }
            Expr::Matrix { style, rows } => {
                self.lossy |= rows.len() < 2 || *style == BracketStyle::Brace;
                let (open, close) = super::bracket_pair(*style);
                self.out.push_str(open);
                for (i, row) in rows.iter().enumerate() {
                    if i > 0 {
                        self.out.push_str(", ");
                    }
                    self.out.push_str(open);
                    self.list(row);
                    self.out.push_str(close);
                }
                self.out.push_str(close);
            }
            Expr::Relation { first, rest } => {
                self.at_least(first, Prec::Additive);
                for (rel, e) in rest {
                    if rel.spelling().chars().all(|c| c.is_ascii_alphabetic()) {
                        self.out.push(' ');
                        self.out.push_str(rel.spelling());
                        self.out.push(' ');
                    } else {
                        self.out.push_str(rel.spelling());
                    }
                    self.at_least(e, Prec::Additive);
                }
            }
            Expr::Logic { op, left, right } => {
                self.at_least(left, Prec::Logic);
                self.out.push(' ');
                self.out.push_str(op.name());
                self.out.push(' ');
                self.at_least(right, Prec::Relation);
            }
            Expr::Bracketed { style, inner } => {
                let (open, close) = super::bracket_pair(*style);
                self.out.push_str(open);
                self.expr(inner);
                self.out.push_str(close);
            }
            Expr::Tuple { items } => self.list(items),
            Expr::TextFragment { text } => {
                self.lossy |= text.contains('"');
                self.out.push('"');
                self.out.push_str(text);
                self.out.push('"');
            }
            Expr::Error { raw } => {
                self.lossy = true;
                self.out.push_str(raw);
            }
            Expr::Slot { .. } => {
                self.lossy = true;
                self.out.push('?');
            }
        }
    }
}
