//! ExamDown documents: a Markdown subset with math delimiters, derivation
//! blocks, calculator and plot placeholders, and answer lines.
//!
//! [`parse_document`] never fails. Whatever it cannot make sense of stays
//! in the tree as literal text or error nodes, with a diagnostic.

mod answers;
mod block;
mod html;
mod inline;
mod latex;

use serde::Serialize;

use crate::calcengine::Rational;
use crate::diagnostic::{Diagnostic, Span};
use crate::mathexpr::{Dialect, Expr, Relator, SymbolTable};

pub use answers::{extract_answers, AnswerEntry, AnswerManifest};
pub use html::{render_document_html, RenderedDocument};
pub use latex::render_document_latex;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Document {
    pub source: String,
    /// In source order. Block spans are disjoint and together cover the
    /// whole source; runs of blank lines are [`BlockKind::Blank`] blocks.
    pub blocks: Vec<Block>,
    pub diagnostics: Vec<Diagnostic>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Block {
    pub span: Span,
    #[serde(flatten)]
    pub kind: BlockKind,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "block", rename_all = "snake_case")]
pub enum BlockKind {
    Heading { level: u8, inlines: Vec<Inline> },
    Paragraph { inlines: Vec<Inline> },
    ListItemGroup { ordered: bool, items: Vec<Vec<Inline>> },
    CodeFence { info: String, text: String },
    DisplayMath { math: Math },
    Derivation { rows: Vec<DerivRow> },
    AnswerLine { label: Option<String>, math: Math },
    Blank,
}

/// A parsed formula. Placeholders written inside it are cut out as
/// [`Expr::Slot`]s; `placeholders[i]` fills `Slot { index: i }`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Math {
    pub expr: Expr,
    pub dialect: Dialect,
    pub raw: String,
    pub span: Span,
    pub placeholders: Vec<Placeholder>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "inline", rename_all = "snake_case")]
pub enum Inline {
    Text {
        text: String,
    },
    Emphasis {
        children: Vec<Inline>,
    },
    Strong {
        children: Vec<Inline>,
    },
    /// Verbatim; never parsed as math.
    CodeSpan {
        text: String,
    },
    /// `$…$` or `\(…\)`; `display` for `$$…$$` and `\[…\]` inside a
    /// paragraph. The formula's placeholders follow as sibling
    /// placeholder inlines whose `slot` is set.
    InlineMath {
        expr: Expr,
        dialect: Dialect,
        display: bool,
        raw: String,
        span: Span,
    },
    CalcPlaceholder {
        expr: Expr,
        raw: String,
        span: Span,
        slot: Option<usize>,
    },
    PlotPlaceholder {
        expr: Expr,
        binder: String,
        lower: Rational,
        upper: Rational,
        raw: String,
        span: Span,
        slot: Option<usize>,
    },
}

/// `{@expr@}` or `{@plot(expr,[x,a,b])@}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "placeholder", rename_all = "snake_case")]
pub enum Placeholder {
    Calc {
        expr: Expr,
        raw: String,
        span: Span,
    },
    Plot {
        expr: Expr,
        binder: String,
        lower: Rational,
        upper: Rational,
        raw: String,
        span: Span,
    },
}

impl Placeholder {
    pub fn raw(&self) -> &str {
        match self {
            Placeholder::Calc { raw, .. } | Placeholder::Plot { raw, .. } => raw,
        }
    }

    pub fn span(&self) -> Span {
        match self {
            Placeholder::Calc { span, .. } | Placeholder::Plot { span, .. } => *span,
        }
    }

    /// The inline form, tagged with the slot it fills.
    pub fn to_inline(&self, slot: Option<usize>) -> Inline {
        match self.clone() {
            Placeholder::Calc { expr, raw, span } => Inline::CalcPlaceholder { expr, raw, span, slot },
            Placeholder::Plot {
                expr,
                binder,
                lower,
                upper,
                raw,
                span,
            } => Inline::PlotPlaceholder {
                expr,
                binder,
                lower,
                upper,
                raw,
                span,
                slot,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DerivRow {
    pub relator: Option<Relator>,
    pub math: Math,
    pub justification: Option<String>,
    pub span: Span,
}

/// Parses with the built-in symbol table.
pub fn parse_document(source: &str) -> Document {
    parse_document_with(source, SymbolTable::builtin())
}

pub fn parse_document_with(source: &str, symbols: &SymbolTable) -> Document {
    let (blocks, mut diagnostics) = block::parse_blocks(source, symbols);
    diagnostics.sort_by_key(|d| (d.span.start, d.span.end));
    Document {
        source: source.to_string(),
        blocks,
        diagnostics,
    }
}

impl Document {
    pub fn has_errors(&self) -> bool {
        self.diagnostics.iter().any(Diagnostic::is_error)
    }
}
