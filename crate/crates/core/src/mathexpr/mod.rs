//! Math expressions: Unicode normalization, tokenizing and parsing of the
//! Space Math and LaTeX-subset notations into one [`Expr`] tree.

pub mod ast;
pub mod normalize;
mod parser;
pub mod symbols;
pub mod token;

use std::ops::Range;

use serde::Serialize;

pub use ast::{BigOpKind, BracketStyle, Expr, LogicOp, NumberSet, Relator};
pub use normalize::{normalize_unicode, Normalized};
pub use parser::MAX_TOKENS;
pub use symbols::{Category, SymbolEntry, SymbolTable, SymbolTableError};
pub use token::{tokenize, Token, TokenKind};

use crate::diagnostic::{Diagnostic, Span};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Dialect {
    SpaceMath,
    Latex,
}

/// LaTeX if the text uses a backslash command or a braced script.
pub fn classify_dialect(source: &str) -> Dialect {
    if source.contains('\\') || source.contains("^{") || source.contains("_{") {
        Dialect::Latex
    } else {
        Dialect::SpaceMath
    }
}

/// Parses a token stream. Never fails: problems come back as diagnostics
/// and error nodes.
pub fn parse_expression(tokens: &[Token], dialect: Dialect) -> (Expr, Vec<Diagnostic>) {
    parse_expression_with(tokens, dialect, SymbolTable::builtin())
}

pub fn parse_expression_with(tokens: &[Token], dialect: Dialect, symbols: &SymbolTable) -> (Expr, Vec<Diagnostic>) {
    let mut p = parser::Parser::new(tokens, dialect, symbols);
    let e = p.parse_top();
    (e, p.finish())
}

pub fn parse_latex_subset(tokens: &[Token]) -> (Expr, Vec<Diagnostic>) {
    parse_expression(tokens, Dialect::Latex)
}

#[derive(Debug, Clone)]
pub struct MathParse {
    pub expr: Expr,
    pub dialect: Dialect,
    /// Spans are byte offsets into the parsed source.
    pub diagnostics: Vec<Diagnostic>,
}

/// Full pipeline for one math span: normalize, classify, tokenize, parse.
pub fn parse_math(source: &str, symbols: &SymbolTable) -> MathParse {
    parse_math_with_holes(source, &[], symbols)
}

/// Like [`parse_math`], but each range in `holes` (sorted, disjoint) is cut
/// out and parsed as an [`Expr::Slot`], numbered left to right.
pub fn parse_math_with_holes(source: &str, holes: &[Range<usize>], symbols: &SymbolTable) -> MathParse {
    let mut outside = String::new();
    let mut at = 0;
    for h in holes {
        outside.push_str(&source[at..h.start]);
        outside.push(' ');
        at = h.end;
    }
    outside.push_str(&source[at..]);
    let dialect = classify_dialect(&outside);

    let mut tokens = Vec::new();
    let mut diagnostics = Vec::new();
    let mut at = 0;
    for h in holes.iter().cloned().chain(std::iter::once(source.len()..source.len())) {
        lex_segment(source, at..h.start, symbols, &mut tokens, &mut diagnostics);
        if h.start < h.end {
            tokens.push(Token {
                kind: TokenKind::Slot,
                lexeme: source[h.clone()].to_string(),
                span: Span::in_text(source, h.start, h.end),
            });
        }
        at = h.end;
    }
    let (expr, parse_diags) = parse_expression_with(&tokens, dialect, symbols);
    diagnostics.extend(parse_diags);
    MathParse {
        expr,
        dialect,
        diagnostics,
    }
}

fn lex_segment(
    source: &str,
    range: Range<usize>,
    symbols: &SymbolTable,
    tokens: &mut Vec<Token>,
    diagnostics: &mut Vec<Diagnostic>,
) {
    if range.is_empty() {
        return;
    }
    let base = range.start;
    let (norm, norm_diags) = normalize_unicode(&source[range]);
    let remap = |s: Span| {
        let (a, b) = norm.source_range(s.start, s.end);
        Span::in_text(source, a + base, b + base)
    };
    for d in norm_diags {
        diagnostics.push(d.rebase(base, source));
    }
    let (toks, tok_diags) = tokenize(&norm.text, symbols);
    for mut d in tok_diags {
        d.span = remap(d.span);
        diagnostics.push(d);
    }
    tokens.extend(toks.into_iter().map(|mut t| {
        t.span = remap(t.span);
        t
    }));
}

/// Parses with the built-in symbol table, discarding diagnostics.
pub fn parse_str(source: &str) -> Expr {
    parse_math(source, SymbolTable::builtin()).expr
}
