use std::ops::Range;

use super::{Inline, Math, Placeholder};
use crate::calcengine::{eval_exact, Env, Value};
use crate::diagnostic::{Code, Diagnostic, Span};
use crate::mathexpr::{parse_math, parse_math_with_holes, BracketStyle, Expr, SymbolTable};

/// Unmatched `*` openers looked at when a closer is found.
const MAX_OPEN_DELIMS: usize = 64;

pub(crate) struct Ctx<'a> {
    pub src: &'a str,
    pub symbols: &'a SymbolTable,
    pub diags: Vec<Diagnostic>,
}

#[allow(clippy::large_enum_variant)] // short-lived, one per delimiter run
enum Elem {
    Node(Inline),
    Open(usize),
}

fn is_space_at(s: &str, at: usize) -> bool {
    s[at..].chars().next().is_some_and(char::is_whitespace)
}

fn is_space_before(s: &str, at: usize) -> bool {
    s[..at].chars().next_back().is_some_and(char::is_whitespace)
}

fn line_end(s: &str, from: usize, limit: usize) -> usize {
    s[from..limit].find('\n').map_or(limit, |i| from + i)
}

impl<'a> Ctx<'a> {
    pub(crate) fn new(src: &'a str, symbols: &'a SymbolTable) -> Self {
        Ctx {
            src,
            symbols,
            diags: Vec::new(),
        }
    }

    fn warn(&mut self, code: Code, range: Range<usize>, message: impl Into<String>) {
        self.diags.push(Diagnostic::new(
            code,
            Span::in_text(self.src, range.start, range.end),
            message,
        ));
    }

    /// Inline content of `range`, which lies within one block.
    pub(crate) fn inlines(&mut self, range: Range<usize>) -> Vec<Inline> {
        let s = self.src;
        let b = s.as_bytes();
        let end = range.end;
        let mut out: Vec<Elem> = Vec::new();
        let mut opens: Vec<usize> = Vec::new();
        let mut text = String::new();
        let mut i = range.start;

        while i < end {
            match b[i] {
                b'\\' => {
                    let next = b.get(i + 1).copied().filter(|_| i + 1 < end);
                    match next {
                        Some(open @ (b'(' | b'[')) => {
                            let closer = if open == b'(' { "\\)" } else { "\\]" };
                            match s[i + 2..end].find(closer) {
                                Some(k) => {
                                    flush(&mut text, &mut out);
                                    let close = i + 2 + k;
                                    self.push_math(&mut out, i + 2..close, open == b'[');
                                    i = close + 2;
                                }
                                None => {
                                    self.warn(
                                        Code::UnclosedMath,
                                        i..i + 2,
                                        format!("`{}` is never closed", &s[i..i + 2]),
                                    );
                                    text.push_str(&s[i..i + 2]);
                                    i += 2;
                                }
                            }
                        }
                        Some(c) if c.is_ascii_punctuation() => {
                            text.push(c as char);
                            i += 2;
                        }
                        _ => {
                            text.push('\\');
                            i += 1;
                        }
                    }
                }
                b'`' => {
                    let n = b[i..end].iter().take_while(|&&c| c == b'`').count();
                    match find_backtick_run(&b[..end], i + n, n) {
                        Some(close) => {
                            flush(&mut text, &mut out);
                            let mut code = &s[i + n..close];
                            if code.len() >= 2
                                && code.starts_with(' ')
                                && code.ends_with(' ')
                                && !code.trim().is_empty()
                            {
                                code = &code[1..code.len() - 1];
                            }
                            out.push(Elem::Node(Inline::CodeSpan { text: code.to_string() }));
                            i = close + n;
                        }
                        None => {
                            text.push_str(&s[i..i + n]);
                            i += n;
                        }
                    }
                }
                b'$' if b.get(i + 1) == Some(&b'$') && i + 1 < end => match s[i + 2..end].find("$$") {
                    Some(k) => {
                        flush(&mut text, &mut out);
                        let close = i + 2 + k;
                        self.push_math(&mut out, i + 2..close, true);
                        i = close + 2;
                    }
                    None => {
                        self.lone_dollar(i..i + 2);
                        text.push_str("$$");
                        i += 2;
                    }
                },
                b'$' => match self.dollar_closer(i, end) {
                    Some(close) => {
                        flush(&mut text, &mut out);
                        self.push_math(&mut out, i + 1..close, false);
                        i = close + 1;
                    }
                    None => {
                        self.lone_dollar(i..i + 1);
                        text.push('$');
                        i += 1;
                    }
                },
                b'{' if b.get(i + 1) == Some(&b'@') && i + 1 < end => {
                    flush(&mut text, &mut out);
                    let stop = line_end(s, i, end);
                    let (hole, _) = self.hole_at(i, stop);
                    let p = self.placeholder(hole.clone());
                    out.push(Elem::Node(p.to_inline(None)));
                    i = hole.end;
                }
                b'*' => {
                    let n = b[i..end].iter().take_while(|&&c| c == b'*').count();
                    let can_open = i + n < end && !is_space_at(s, i + n);
                    let can_close = i > range.start && !is_space_before(s, i);
                    let opener = if can_close && n <= 2 {
                        opens
                            .iter()
                            .enumerate()
                            .rev()
                            .take(MAX_OPEN_DELIMS)
                            .find(|(_, &at)| matches!(out[at], Elem::Open(len) if len == n))
                            .map(|(k, &at)| (k, at))
                    } else {
                        None
                    };
                    if let Some((k, at)) = opener {
                        flush(&mut text, &mut out);
                        let children = finish(out.split_off(at + 1));
                        out[at] = Elem::Node(if n == 2 {
                            Inline::Strong { children }
                        } else {
                            Inline::Emphasis { children }
                        });
                        opens.truncate(k);
                    } else if can_open && n <= 2 {
                        flush(&mut text, &mut out);
                        opens.push(out.len());
                        out.push(Elem::Open(n));
                    } else {
                        text.push_str(&s[i..i + n]);
                    }
                    i += n;
                }
                _ => {
                    let stop = s[i..end]
                        .find(['\\', '`', '$', '{', '*'])
                        .map_or(end, |k| i + k)
                        .max(i + 1);
                    let stop = (stop..=end).find(|&k| s.is_char_boundary(k)).unwrap_or(end);
                    text.push_str(&s[i..stop]);
                    i = stop;
                }
            }
        }
        flush(&mut text, &mut out);
        finish(out)
    }

    fn lone_dollar(&mut self, range: Range<usize>) {
        self.diags.push(Diagnostic::new(
            Code::LoneDollar,
            Span::in_text(self.src, range.start, range.end),
            "`$` has no closing partner on this line and is shown as text",
        ));
    }

    /// Closing `$` for an opener at `open`: the opener must be followed by
    /// a non-space, the closer preceded by a non-space and not followed by
    /// a digit; both on the same line.
    fn dollar_closer(&self, open: usize, end: usize) -> Option<usize> {
        let s = self.src;
        let b = s.as_bytes();
        let stop = line_end(s, open, end);
        if open + 1 >= stop || is_space_at(s, open + 1) {
            return None;
        }
        let mut j = open + 1;
        while j < stop {
            match b[j] {
                b'\\' => j += 2,
                b'$' => {
                    let ok = j > open + 1 && !is_space_before(s, j) && !b.get(j + 1).is_some_and(u8::is_ascii_digit);
                    if ok {
                        return Some(j);
                    }
                    j += 1;
                }
                _ => j += 1,
            }
        }
        None
    }

    fn push_math(&mut self, out: &mut Vec<Elem>, range: Range<usize>, display: bool) {
        let math = self.math(range);
        out.push(Elem::Node(Inline::InlineMath {
            expr: math.expr,
            dialect: math.dialect,
            display,
            raw: math.raw,
            span: math.span,
        }));
        for (k, p) in math.placeholders.iter().enumerate() {
            out.push(Elem::Node(p.to_inline(Some(k))));
        }
    }

    /// Parses the formula in `range`, cutting out its placeholders.
    pub(crate) fn math(&mut self, range: Range<usize>) -> Math {
        let s = self.src;
        let mut holes = Vec::new();
        let mut i = range.start;
        while let Some(k) = s[i..range.end].find("{@") {
            let start = i + k;
            let stop = line_end(s, start, range.end);
            let (hole, _) = self.hole_at(start, stop);
            i = hole.end;
            holes.push(hole);
        }
        let placeholders: Vec<Placeholder> = holes.iter().map(|h| self.placeholder(h.clone())).collect();
        let rel: Vec<Range<usize>> = holes
            .iter()
            .map(|h| h.start - range.start..h.end - range.start)
            .collect();
        let parsed = parse_math_with_holes(&s[range.clone()], &rel, self.symbols);
        self.diags
            .extend(parsed.diagnostics.into_iter().map(|d| d.rebase(range.start, s)));
        Math {
            expr: parsed.expr,
            dialect: parsed.dialect,
            raw: s[range.clone()].to_string(),
            span: Span::in_text(s, range.start, range.end),
            placeholders,
        }
    }

    /// Extent of the placeholder opening at `start`, never past `stop`.
    /// Nested openers are counted so the outermost pair wins.
    fn hole_at(&mut self, start: usize, stop: usize) -> (Range<usize>, bool) {
        let b = self.src.as_bytes();
        let mut depth = 0usize;
        let mut nested = false;
        let mut j = start;
        while j + 1 < stop {
            if b[j] == b'{' && b[j + 1] == b'@' {
                depth += 1;
                nested |= depth > 1;
                j += 2;
            } else if b[j] == b'@' && b[j + 1] == b'}' {
                depth -= 1;
                j += 2;
                if depth == 0 {
                    if nested {
                        self.warn(
                            Code::NestedPlaceholder,
                            start..j,
                            "placeholders cannot be nested; the outer one is kept",
                        );
                    }
                    return (start..j, true);
                }
            } else {
                j += 1;
            }
        }
        self.warn(
            Code::UnclosedPlaceholder,
            start..start + 2,
            "`{@` is never closed by `@}`; it runs to the end of the line",
        );
        (start..stop, false)
    }

    fn placeholder(&mut self, hole: Range<usize>) -> Placeholder {
        let s = self.src;
        let raw = &s[hole.clone()];
        let inner_start = hole.start + 2;
        let inner_end = if raw.len() >= 4 && raw.ends_with("@}") {
            hole.end - 2
        } else {
            hole.end
        };
        let inner = &s[inner_start..inner_end.max(inner_start)];
        let parsed = parse_math(inner, self.symbols);
        self.diags
            .extend(parsed.diagnostics.into_iter().map(|d| d.rebase(inner_start, s)));
        let span = Span::in_text(s, hole.start, hole.end);
        if let Some(plot) = self.plot(&parsed.expr, raw, span) {
            return plot;
        }
        Placeholder::Calc {
            expr: parsed.expr,
            raw: raw.to_string(),
            span,
        }
    }

    /// `plot(expr, [x, a, b])` with rational bounds.
    fn plot(&mut self, e: &Expr, raw: &str, span: Span) -> Option<Placeholder> {
        let Expr::Apply { head, args } = e else {
            return None;
        };
        if !matches!(&**head, Expr::Ident { name } if name == "plot") {
            return None;
        }
        let shaped = match args.as_slice() {
            [body, Expr::Bracketed {
                style: BracketStyle::Square,
                inner,
            }] => match &**inner {
                Expr::Tuple { items } => match items.as_slice() {
                    [Expr::Ident { name }, lo, hi] => {
                        match (eval_exact(lo, &Env::new()), eval_exact(hi, &Env::new())) {
                            (Ok(Value::Exact(lower)), Ok(Value::Exact(upper))) => Some(Placeholder::Plot {
                                expr: body.clone(),
                                binder: name.clone(),
                                lower,
                                upper,
                                raw: raw.to_string(),
                                span,
                            }),
                            _ => None,
                        }
                    }
                    _ => None,
                },
                _ => None,
            },
            _ => None,
        };
        if shaped.is_none() {
            self.diags.push(Diagnostic::new(
                Code::MalformedPlot,
                span,
                "expected `plot(expr, [x, a, b])` with rational bounds a and b",
            ));
        }
        shaped
    }
}

fn find_backtick_run(b: &[u8], from: usize, n: usize) -> Option<usize> {
    let mut j = from;
    while j < b.len() {
        if b[j] == b'`' {
            let run = b[j..].iter().take_while(|&&c| c == b'`').count();
            if run == n {
                return Some(j);
            }
            j += run;
        } else {
            j += 1;
        }
    }
    None
}

fn flush(text: &mut String, out: &mut Vec<Elem>) {
    if !text.is_empty() {
        out.push(Elem::Node(Inline::Text {
            text: std::mem::take(text),
        }));
    }
}

/// Unmatched delimiters become text; adjacent texts merge.
fn finish(elems: Vec<Elem>) -> Vec<Inline> {
    let mut out: Vec<Inline> = Vec::with_capacity(elems.len());
    for e in elems {
        let node = match e {
            Elem::Node(n) => n,
            Elem::Open(n) => Inline::Text { text: "*".repeat(n) },
        };
        match (out.last_mut(), node) {
            (Some(Inline::Text { text }), Inline::Text { text: more }) => text.push_str(&more),
            (_, node) => out.push(node),
        }
    }
    out
}
