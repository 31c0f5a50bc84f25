//! Span-anchored diagnostics shared by every stage.
//!
//! Nothing in this crate fails on bad student input. Problems are
//! reported as [`Diagnostic`]s next to a best-effort result instead.

use std::fmt;

use serde::Serialize;

/// Byte range into a source text plus the 1-based line of `start`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
    pub line: usize,
}

impl Span {
    pub fn new(start: usize, end: usize, line: usize) -> Self {
        debug_assert!(start <= end);
        Span { start, end, line }
    }

    /// Builds a span over `text[start..end]`, computing the line number.
    pub fn in_text(text: &str, start: usize, end: usize) -> Self {
        let start = start.min(text.len());
        let end = end.clamp(start, text.len());
        Span {
            start,
            end,
            line: line_of(text, start),
        }
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }

    /// Smallest span covering both.
    pub fn to(self, other: Span) -> Span {
        if other.start < self.start {
            return other.to(self);
        }
        Span {
            start: self.start,
            end: self.end.max(other.end),
            line: self.line,
        }
    }
}

/// 1-based line number of byte offset `at`.
pub fn line_of(text: &str, at: usize) -> usize {
    let at = at.min(text.len());
    1 + text.as_bytes()[..at].iter().filter(|&&b| b == b'\n').count()
}

/// 1-based column (in characters) of byte offset `at`.
pub fn column_of(text: &str, at: usize) -> usize {
    let mut at = at.min(text.len());
    while !text.is_char_boundary(at) {
        at -= 1;
    }
    let line_start = text[..at].rfind('\n').map_or(0, |i| i + 1);
    1 + text[line_start..at].chars().count()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Info,
    Warning,
    Error,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Info => "info",
            Severity::Warning => "warning",
            Severity::Error => "error",
        })
    }
}

macro_rules! codes {
    ($($variant:ident => $text:literal, $sev:ident;)*) => {
        /// Closed set of diagnostic identifiers. The text form is stable.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
        pub enum Code {
            $($variant,)*
        }

        impl Code {
            pub const ALL: &'static [Code] = &[$(Code::$variant,)*];

            pub fn as_str(self) -> &'static str {
                match self {
                    $(Code::$variant => $text,)*
                }
            }

            /// The severity this code is normally reported with.
            pub fn default_severity(self) -> Severity {
                match self {
                    $(Code::$variant => Severity::$sev,)*
                }
            }
        }
    };
}

codes! {
    UnmappedChar => "unmapped-char", Info;
    UnknownChar => "unknown-char", Warning;
    UnclosedText => "unclosed-text", Warning;
    UnclosedBracket => "unclosed-bracket", Warning;
    StrayCloser => "stray-closer", Warning;
    UnexpectedToken => "unexpected-token", Warning;
    MissingOperand => "missing-operand", Warning;
    UnsupportedLatex => "unsupported-latex", Warning;
    RaggedMatrix => "ragged-matrix", Warning;
    LoneDollar => "lone-dollar", Info;
    UnclosedMath => "unclosed-math", Warning;
    UnclosedPlaceholder => "unclosed-placeholder", Warning;
    NestedPlaceholder => "nested-placeholder", Warning;
    MalformedPlot => "malformed-plot", Warning;
    UnknownFence => "unknown-fence", Warning;
    UnclosedFence => "unclosed-fence", Warning;
    EmptyDerivation => "empty-derivation", Warning;
    MalformedAnswer => "malformed-answer", Warning;
    NumericFallback => "numeric-fallback", Info;
    UnboundVariable => "unbound-variable", Warning;
    DivisionByZero => "division-by-zero", Warning;
    UnsupportedOperation => "unsupported-operation", Warning;
    BudgetExceeded => "budget-exceeded", Warning;
    EmptyPlot => "empty-plot", Warning;
    Internal => "internal", Error;
}

impl fmt::Display for Code {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for Code {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub span: Span,
    pub severity: Severity,
    pub code: Code,
    pub message: String,
}

impl Diagnostic {
    /// A diagnostic at the code's default severity.
    pub fn new(code: Code, span: Span, message: impl Into<String>) -> Self {
        let message = message.into();
        debug_assert!(!message.is_empty());
        Diagnostic {
            span,
            severity: code.default_severity(),
            code,
            message,
        }
    }

    pub fn with_severity(mut self, severity: Severity) -> Self {
        self.severity = severity;
        self
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }

    /// Shifts the span by `base` bytes and recomputes its line in `text`,
    /// the enclosing source the offset refers to.
    pub fn rebase(mut self, base: usize, text: &str) -> Self {
        self.span = Span::in_text(text, self.span.start + base, self.span.end + base);
        self
    }

    /// `line:col severity code message`, the stable one-line form.
    pub fn to_line(&self, source: &str) -> String {
        format!(
            "{}:{} {} {} {}",
            self.span.line,
            column_of(source, self.span.start),
            self.severity,
            self.code,
            self.message
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn codes_are_unique_kebab_case() {
        let mut seen = std::collections::HashSet::new();
        for code in Code::ALL {
            let s = code.as_str();
            assert!(seen.insert(s), "duplicate code {s}");
            assert!(s.chars().all(|c| c.is_ascii_lowercase() || c == '-'));
        }
    }

    #[test]
    fn line_and_column() {
        let text = "ab\ncé\nx";
        assert_eq!(line_of(text, 0), 1);
        assert_eq!(line_of(text, 3), 2);
        assert_eq!(column_of(text, 3), 1);
        // byte 6 is after the two-byte 'é'
        assert_eq!(column_of(text, 6), 3);
        assert_eq!(line_of(text, 7), 3);
    }

    #[test]
    fn diagnostic_line_format() {
        let d = Diagnostic::new(
            Code::UnclosedBracket,
            Span::in_text("x (t", 2, 3),
            "bracket `(` is never closed",
        );
        assert_eq!(
            d.to_line("x (t"),
            "1:3 warning unclosed-bracket bracket `(` is never closed"
        );
    }
}
