use std::ops::Range;

use super::inline::Ctx;
use super::{Block, BlockKind, DerivRow};
use crate::diagnostic::{Code, Diagnostic, Span};
use crate::mathexpr::{Relator, SymbolTable};

#[derive(Debug, Clone, Copy)]
struct Line {
    start: usize,
    /// End of the content, before the newline.
    end: usize,
    /// After the newline, if any.
    next: usize,
}

fn split_lines(src: &str) -> Vec<Line> {
    let mut lines = Vec::new();
    let mut start = 0;
    while start < src.len() {
        let (end, next) = match src[start..].find('\n') {
            Some(k) => (start + k, start + k + 1),
            None => (src.len(), src.len()),
        };
        lines.push(Line { start, end, next });
        start = next;
    }
    lines
}

/// Derivation relators, longest spelling first.
const ROW_RELATORS: &[&str] = &["<=>", "=>", "<=", ">=", "!=", "=", "<", ">"];

struct Parser<'a> {
    ctx: Ctx<'a>,
    lines: Vec<Line>,
    blocks: Vec<Block>,
}

pub(crate) fn parse_blocks(src: &str, symbols: &SymbolTable) -> (Vec<Block>, Vec<Diagnostic>) {
    let mut p = Parser {
        ctx: Ctx::new(src, symbols),
        lines: split_lines(src),
        blocks: Vec::new(),
    };
    let mut i = 0;
    while i < p.lines.len() {
        i = p.block(i);
    }
    (p.blocks, p.ctx.diags)
}

fn indent(text: &str) -> usize {
    text.len() - text.trim_start_matches([' ', '\t']).len()
}

fn heading_level(t: &str) -> Option<usize> {
    let n = t.bytes().take_while(|&c| c == b'#').count();
    let after = t[n..].chars().next();
    ((1..=6).contains(&n) && after.is_none_or(|c| c == ' ' || c == '\t')).then_some(n)
}

/// Byte length of a list marker including the following space, and
/// whether it is ordered.
fn list_marker(t: &str) -> Option<(usize, bool)> {
    let b = t.as_bytes();
    let spaced = |k: usize| b.get(k).is_some_and(|&c| c == b' ' || c == b'\t');
    match b.first()? {
        b'-' | b'*' | b'+' if spaced(1) => Some((2, false)),
        c if c.is_ascii_digit() => {
            let digits = b.iter().take_while(|c| c.is_ascii_digit()).count();
            (digits <= 9 && matches!(b.get(digits), Some(b'.' | b')')) && spaced(digits + 1))
                .then_some((digits + 2, true))
        }
        _ => None,
    }
}

/// `answer:` or `answer[label]:`; returns the label and the offset of the
/// expression within `t`.
fn answer_prefix(t: &str) -> Option<(Option<String>, usize)> {
    let rest = t.strip_prefix("answer")?;
    if rest.starts_with(':') {
        return Some((None, 7));
    }
    let inner = rest.strip_prefix('[')?;
    let close = inner.find("]:")?;
    let label = inner[..close].trim();
    if label.contains(['[', ']']) {
        return None;
    }
    Some(((!label.is_empty()).then(|| label.to_string()), 6 + 1 + close + 2))
}

fn fence_marker(t: &str) -> Option<&'static str> {
    if t.starts_with("```") {
        Some("```")
    } else if t.starts_with("~~~") {
        Some("~~~")
    } else {
        None
    }
}

/// Strips `$…$`, `$$…$$`, `\(…\)` or `\[…\]` wrapping all of `r`.
fn unwrap_math(src: &str, r: Range<usize>) -> Range<usize> {
    let t = &src[r.clone()];
    for (open, close) in [("$$", "$$"), ("\\[", "\\]"), ("\\(", "\\)"), ("$", "$")] {
        if t.len() >= open.len() + close.len() && t.starts_with(open) && t.ends_with(close) {
            return r.start + open.len()..r.end - close.len();
        }
    }
    r
}

fn trim_range(src: &str, r: Range<usize>) -> Range<usize> {
    let t = &src[r.clone()];
    let start = r.start + (t.len() - t.trim_start().len());
    let end = r.end - (t.len() - t.trim_end().len());
    start..end.max(start)
}

impl<'a> Parser<'a> {
    fn src(&self) -> &'a str {
        self.ctx.src
    }

    fn text(&self, i: usize) -> &'a str {
        let l = self.lines[i];
        &self.src()[l.start..l.end]
    }

    fn trimmed(&self, i: usize) -> &'a str {
        self.text(i).trim_start_matches([' ', '\t'])
    }

    fn is_blank(&self, i: usize) -> bool {
        self.text(i).trim().is_empty()
    }

    fn push(&mut self, first: usize, last: usize, kind: BlockKind) {
        let span = Span::in_text(self.src(), self.lines[first].start, self.lines[last].next);
        self.blocks.push(Block { span, kind });
    }

    fn warn(&mut self, code: Code, range: Range<usize>, message: impl Into<String>) {
        let d = Diagnostic::new(code, Span::in_text(self.src(), range.start, range.end), message);
        self.ctx.diags.push(d);
    }

    /// Parses the block starting at line `i`; returns the next line index.
    fn block(&mut self, i: usize) -> usize {
        if self.is_blank(i) {
            let mut j = i;
            while j + 1 < self.lines.len() && self.is_blank(j + 1) {
                j += 1;
            }
            self.push(i, j, BlockKind::Blank);
            return j + 1;
        }
        let t = self.trimmed(i);
        let shallow = indent(self.text(i)) <= 3;
        if shallow {
            if let Some(marker) = fence_marker(t) {
                return self.code_fence(i, marker);
            }
            if let Some(name) = t.strip_prefix(":::") {
                let name = name.trim();
                if !name.is_empty() {
                    return self.colon_fence(i, name);
                }
            }
            if let Some(level) = heading_level(t) {
                return self.heading(i, level);
            }
        }
        if let Some((label, offset)) = answer_prefix(t) {
            return self.answer(i, label, offset);
        }
        if list_marker(t).is_some() {
            return self.list(i);
        }
        if let Some(next) = self.display_math(i) {
            return next;
        }
        self.paragraph(i)
    }

    fn starts_block(&self, i: usize) -> bool {
        let t = self.trimmed(i);
        self.is_blank(i)
            || fence_marker(t).is_some()
            || t.starts_with(":::")
            || heading_level(t).is_some()
            || answer_prefix(t).is_some()
            || list_marker(t).is_some()
            || t.starts_with("$$")
            || t.starts_with("\\[")
    }

    fn paragraph(&mut self, i: usize) -> usize {
        let mut j = i;
        while j + 1 < self.lines.len() && !self.starts_block(j + 1) {
            j += 1;
        }
        let range = self.lines[i].start..self.lines[j].end;
        let inlines = self.ctx.inlines(range);
        self.push(i, j, BlockKind::Paragraph { inlines });
        j + 1
    }

    fn heading(&mut self, i: usize, level: usize) -> usize {
        let l = self.lines[i];
        let text = self.text(i);
        let start = l.start + indent(text) + level;
        let mut end = l.end;
        // optional closing run of `#`
        let body = self.src()[start..end].trim_end();
        let without = body.trim_end_matches('#');
        if without.len() < body.len() && (without.is_empty() || without.ends_with([' ', '\t'])) {
            end = start + without.len();
        }
        let range = trim_range(self.src(), start..end);
        let inlines = self.ctx.inlines(range);
        self.push(
            i,
            i,
            BlockKind::Heading {
                level: level as u8,
                inlines,
            },
        );
        i + 1
    }

    fn list(&mut self, i: usize) -> usize {
        let ordered = list_marker(self.trimmed(i)).is_some_and(|(_, o)| o);
        let mut items: Vec<Range<usize>> = Vec::new();
        let mut j = i;
        loop {
            let t = self.trimmed(j);
            let l = self.lines[j];
            match list_marker(t) {
                Some((len, o)) if o == ordered => {
                    let start = l.start + indent(self.text(j)) + len;
                    items.push(start..l.end);
                }
                Some(_) => break,
                // lazy continuation of the current item
                None => items.last_mut().expect("first line is an item").end = l.end,
            }
            let next = j + 1;
            if next >= self.lines.len() {
                break;
            }
            let nt = self.trimmed(next);
            let continues = match list_marker(nt) {
                Some((_, o)) => o == ordered,
                None => !self.starts_block(next),
            };
            if !continues {
                break;
            }
            j = next;
        }
        let items = items
            .into_iter()
            .map(|r| self.ctx.inlines(trim_range(self.src(), r)))
            .collect();
        self.push(i, j, BlockKind::ListItemGroup { ordered, items });
        j + 1
    }

    fn code_fence(&mut self, i: usize, marker: &str) -> usize {
        let info = self.trimmed(i)[marker.len()..].trim().to_string();
        let mut j = i + 1;
        while j < self.lines.len() {
            let t = self.trimmed(j);
            if t.starts_with(marker) && t.trim_end().bytes().all(|c| c == marker.as_bytes()[0]) {
                break;
            }
            j += 1;
        }
        let closed = j < self.lines.len();
        if !closed {
            let l = self.lines[i];
            self.warn(Code::UnclosedFence, l.start..l.end, "code fence is never closed");
        }
        let last = if closed { j } else { self.lines.len() - 1 };
        let text = if i < last {
            let content_end = if closed { self.lines[j].start } else { self.src().len() };
            let t = &self.src()[self.lines[i].next..content_end];
            t.strip_suffix('\n').unwrap_or(t).to_string()
        } else {
            String::new()
        };
        self.push(i, last, BlockKind::CodeFence { info, text });
        last + 1
    }

    /// `:::name` … `:::`. An unclosed fence ends at the first blank line.
    fn colon_fence(&mut self, i: usize, name: &str) -> usize {
        let mut j = i + 1;
        let mut closed = false;
        while j < self.lines.len() {
            if self.trimmed(j).trim_end() == ":::" {
                closed = true;
                break;
            }
            if self.is_blank(j) && name == "derivation" {
                break;
            }
            j += 1;
        }
        let open = self.lines[i];
        if !closed {
            self.warn(
                Code::UnclosedFence,
                open.start..open.end,
                format!("`:::{name}` is never closed by `:::`"),
            );
        }
        let last = if closed { j } else { j - 1 };
        if name != "derivation" {
            self.warn(
                Code::UnknownFence,
                open.start..open.end,
                format!("unknown block `:::{name}`, shown as a paragraph"),
            );
            return self.fallback_paragraph(i, last);
        }
        let body_end = if closed { j } else { last + 1 };
        let mut rows: Vec<DerivRow> = Vec::new();
        for k in i + 1..body_end {
            if !self.is_blank(k) {
                rows.push(self.deriv_row(k));
            }
        }
        if rows.is_empty() {
            self.warn(
                Code::EmptyDerivation,
                open.start..open.end,
                "derivation has no rows, shown as a paragraph",
            );
            return self.fallback_paragraph(i, last);
        }
        self.push(i, last, BlockKind::Derivation { rows });
        last + 1
    }

    fn fallback_paragraph(&mut self, first: usize, last: usize) -> usize {
        let range = self.lines[first].start..self.lines[last].end;
        let inlines = self.ctx.inlines(range);
        self.push(first, last, BlockKind::Paragraph { inlines });
        last + 1
    }

    /// `[relator] expr [| justification]`
    fn deriv_row(&mut self, k: usize) -> DerivRow {
        let src = self.src();
        let l = self.lines[k];
        let body = trim_range(src, l.start..l.end);
        let t = &src[body.clone()];
        let (relator, rel_len) = ROW_RELATORS
            .iter()
            .find(|r| t.starts_with(**r))
            .map_or((None, 0), |r| (Relator::from_spelling(r), r.len()));
        let rest = body.start + rel_len..body.end;
        // the justification separator is a `|` with blanks on both sides
        let sep = src[rest.clone()].char_indices().find_map(|(off, c)| {
            let at = rest.start + off;
            (c == '|' && is_blank_before(src, at, rest.start) && is_blank_after(src, at + 1, rest.end)).then_some(at)
        });
        let (expr_range, justification) = match sep {
            Some(at) => {
                let why = src[at + 1..rest.end].trim();
                (rest.start..at, (!why.is_empty()).then(|| why.to_string()))
            }
            None => (rest.clone(), None),
        };
        let expr_range = unwrap_math(src, trim_range(src, expr_range));
        let math = self.ctx.math(expr_range);
        DerivRow {
            relator,
            math,
            justification,
            span: Span::in_text(src, l.start, l.end),
        }
    }

    fn answer(&mut self, i: usize, label: Option<String>, offset: usize) -> usize {
        let src = self.src();
        let l = self.lines[i];
        let start = l.start + indent(self.text(i)) + offset;
        let range = unwrap_math(src, trim_range(src, start..l.end));
        let math = self.ctx.math(range);
        if math.expr.is_error() {
            self.warn(
                Code::MalformedAnswer,
                l.start..l.end,
                "the answer could not be read as a formula",
            );
        }
        self.push(i, i, BlockKind::AnswerLine { label, math });
        i + 1
    }

    /// `$$ … $$` or `\[ … \]` starting a line and closing at the end of a
    /// line, with no blank line in between.
    fn display_math(&mut self, i: usize) -> Option<usize> {
        let t = self.trimmed(i);
        let (open, close) = if t.starts_with("$$") {
            ("$$", "$$")
        } else if t.starts_with("\\[") {
            ("\\[", "\\]")
        } else {
            return None;
        };
        let src = self.src();
        let content_start = self.lines[i].start + indent(self.text(i)) + open.len();
        let mut j = i;
        loop {
            let l = self.lines[j];
            let from = if j == i { content_start } else { l.start };
            let line = src[from..l.end].trim_end();
            if line.ends_with(close) {
                let close_at = from + line.len() - close.len();
                if j > i || close_at >= content_start {
                    let math = self.ctx.math(content_start..close_at);
                    self.push(i, j, BlockKind::DisplayMath { math });
                    return Some(j + 1);
                }
            }
            j += 1;
            if j >= self.lines.len() || self.is_blank(j) {
                return None;
            }
        }
    }
}

fn is_blank_before(src: &str, at: usize, floor: usize) -> bool {
    at == floor || src[floor..at].ends_with([' ', '\t'])
}

fn is_blank_after(src: &str, at: usize, ceil: usize) -> bool {
    at >= ceil || src[at..ceil].starts_with([' ', '\t'])
}

#[cfg(test)]
mod tests {
    use super::super::{parse_document, Inline};
    use super::*;

    fn kinds(src: &str) -> Vec<BlockKind> {
        parse_document(src).blocks.into_iter().map(|b| b.kind).collect()
    }

    #[test]
    fn blocks_cover_the_source() {
        let src = "# Title\n\nSome *text*\nmore\n\n- a\n- b\n\n```\ncode\n```\n$$x$$\nanswer: 1\n";
        let doc = parse_document(src);
        let mut at = 0;
        for b in &doc.blocks {
            assert_eq!(b.span.start, at);
            at = b.span.end;
        }
        assert_eq!(at, src.len());
        let names: Vec<&str> = doc
            .blocks
            .iter()
            .map(|b| match b.kind {
                BlockKind::Heading { .. } => "h",
                BlockKind::Paragraph { .. } => "p",
                BlockKind::ListItemGroup { .. } => "l",
                BlockKind::CodeFence { .. } => "c",
                BlockKind::DisplayMath { .. } => "m",
                BlockKind::Derivation { .. } => "d",
                BlockKind::AnswerLine { .. } => "a",
                BlockKind::Blank => "_",
            })
            .collect();
        assert_eq!(names.join(""), "h_p_l_cma");
    }

    #[test]
    fn derivation_rows() {
        let src = ":::derivation\n x^2-10x+9=0\n<=> (x-5)^2-16=0 | Complete the square\n:::";
        let k = kinds(src);
        let BlockKind::Derivation { rows } = &k[0] else {
            panic!("{k:?}")
        };
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].relator, None);
        assert_eq!(rows[1].relator, Some(Relator::Iff));
        assert_eq!(rows[1].justification.as_deref(), Some("Complete the square"));
        assert_eq!(rows[1].math.raw, "(x-5)^2-16=0");
    }

    #[test]
    fn absolute_values_are_not_separators() {
        let k = kinds(":::derivation\n= |x| | because\n:::\n");
        let BlockKind::Derivation { rows } = &k[0] else {
            panic!()
        };
        assert_eq!(rows[0].math.raw, "|x|");
        assert_eq!(rows[0].justification.as_deref(), Some("because"));
    }

    #[test]
    fn fence_recovery() {
        let doc = parse_document(":::derivation\nx=1\n\nafter");
        assert!(matches!(doc.blocks[0].kind, BlockKind::Derivation { .. }));
        assert!(matches!(doc.blocks[2].kind, BlockKind::Paragraph { .. }));
        assert_eq!(doc.diagnostics[0].code, Code::UnclosedFence);

        let doc = parse_document(":::theorem\nx\n:::\n");
        assert!(matches!(doc.blocks[0].kind, BlockKind::Paragraph { .. }));
        assert_eq!(doc.diagnostics[0].code, Code::UnknownFence);

        let doc = parse_document("```rust\nlet x = $a$;\n");
        let BlockKind::CodeFence { info, text } = &doc.blocks[0].kind else {
            panic!()
        };
        assert_eq!((info.as_str(), text.as_str()), ("rust", "let x = $a$;"));
    }

    #[test]
    fn answers() {
        let k = kinds("answer: x=1 or x=9\n  answer[q2]: $18$\nanswer[]: 3");
        let BlockKind::AnswerLine { label, math } = &k[0] else {
            panic!()
        };
        assert_eq!(*label, None);
        assert!(matches!(math.expr, crate::mathexpr::Expr::Logic { .. }));
        let BlockKind::AnswerLine { label, math } = &k[1] else {
            panic!()
        };
        assert_eq!(label.as_deref(), Some("q2"));
        assert_eq!(math.raw, "18");
        assert!(matches!(&k[2], BlockKind::AnswerLine { label: None, .. }));
    }

    #[test]
    fn lists_and_headings() {
        let k = kinds("1. one\n2. two\n   still two\n- other\n## Head ##\n#nohead");
        let BlockKind::ListItemGroup { ordered: true, items } = &k[0] else {
            panic!("{k:?}")
        };
        assert_eq!(items.len(), 2);
        assert_eq!(
            items[1],
            vec![Inline::Text {
                text: "two\n   still two".into()
            }]
        );
        assert!(matches!(&k[1], BlockKind::ListItemGroup { ordered: false, .. }));
        let BlockKind::Heading { level: 2, inlines } = &k[2] else {
            panic!()
        };
        assert_eq!(inlines, &vec![Inline::Text { text: "Head".into() }]);
        assert!(matches!(&k[3], BlockKind::Paragraph { .. }));
    }

    #[test]
    fn display_math_blocks() {
        let k = kinds("$$\nsum_(i=1)^n i\n$$\n\\[x^{2}\\]");
        let BlockKind::DisplayMath { math } = &k[0] else {
            panic!("{k:?}")
        };
        assert_eq!(math.raw.trim(), "sum_(i=1)^n i");
        let BlockKind::DisplayMath { math } = &k[1] else {
            panic!("{k:?}")
        };
        assert_eq!(math.dialect, crate::mathexpr::Dialect::Latex);
        // no closer at a line end: inline display math in a paragraph
        assert!(matches!(&kinds("$$a$$ b")[0], BlockKind::Paragraph { .. }));
    }

    #[test]
    fn diagnostics_point_into_the_document() {
        let src = "Intro\n\nThen $x (t$ here";
        let doc = parse_document(src);
        let d = doc
            .diagnostics
            .iter()
            .find(|d| d.code == Code::UnclosedBracket)
            .unwrap();
        assert_eq!(&src[d.span.start..d.span.end], "(");
        assert_eq!(d.span.line, 3);
    }
}
