use serde::Serialize;

use super::symbols::SymbolTable;
use crate::diagnostic::{Code, Diagnostic, Span};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TokenKind {
    Number,
    Identifier,
    /// A symbol-table word (`sum`, `alpha`) or a LaTeX command (`\frac`).
    SymbolName,
    Operator,
    Bracket,
    Whitespace,
    TextQuote,
    Unknown,
    /// Hole where a calculator placeholder was cut out of a math span.
    /// Never produced by [`tokenize`].
    Slot,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Token {
    pub kind: TokenKind,
    pub lexeme: String,
    pub span: Span,
}

impl Token {
    pub fn is(&self, kind: TokenKind, lexeme: &str) -> bool {
        self.kind == kind && self.lexeme == lexeme
    }

    pub fn is_op(&self, lexeme: &str) -> bool {
        self.is(TokenKind::Operator, lexeme)
    }
}

const OPERATORS: &[&str] = &[
    "<=>", "=>", "<=", ">=", "!=", "->", "*", "/", "+", "-", "=", "<", ">", "^", "_", ",", "&", "|", "!", ".", ":",
    ";", "'",
];

/// Splits normalized math text into tokens. Every byte lands in exactly
/// one token; whitespace runs are kept because they carry meaning.
pub fn tokenize(text: &str, symbols: &SymbolTable) -> (Vec<Token>, Vec<Diagnostic>) {
    let mut tokens = Vec::new();
    let mut diags = Vec::new();
    let mut pos = 0;
    let mut line = 1;
    while pos < text.len() {
        let rest = &text[pos..];
        let c = rest.chars().next().expect("non-empty");
        let (kind, len) = if c.is_whitespace() {
            let len = rest
                .char_indices()
                .find(|(_, ch)| !ch.is_whitespace())
                .map_or(rest.len(), |(i, _)| i);
            (TokenKind::Whitespace, len)
        } else if c.is_ascii_digit() {
            let int = rest.bytes().take_while(u8::is_ascii_digit).count();
            let frac = if rest[int..].starts_with('.') {
                rest[int + 1..].bytes().take_while(u8::is_ascii_digit).count()
            } else {
                0
            };
            (TokenKind::Number, if frac > 0 { int + 1 + frac } else { int })
        } else if c == '\\' {
            let after = &rest[1..];
            match after.chars().next() {
                Some(a) if a.is_ascii_alphabetic() => {
                    let n = after.bytes().take_while(u8::is_ascii_alphabetic).count();
                    (TokenKind::SymbolName, 1 + n)
                }
                Some(a) => (TokenKind::SymbolName, 1 + a.len_utf8()),
                None => {
                    diags.push(Diagnostic::new(
                        Code::UnknownChar,
                        Span::new(pos, pos + 1, line),
                        "lone backslash at end of expression",
                    ));
                    (TokenKind::Unknown, 1)
                }
            }
        } else if c == '"' {
            match rest[1..].find('"') {
                Some(i) => (TokenKind::TextQuote, i + 2),
                None => {
                    diags.push(Diagnostic::new(
                        Code::UnclosedText,
                        Span::new(pos, text.len(), line),
                        "quoted text is never closed",
                    ));
                    (TokenKind::TextQuote, rest.len())
                }
            }
        } else if c.is_ascii_alphabetic() {
            match symbols.longest_match(rest) {
                Some(entry) => (TokenKind::SymbolName, entry.name.len()),
                None => (TokenKind::Identifier, 1),
            }
        } else if "()[]{}".contains(c) {
            (TokenKind::Bracket, 1)
        } else if let Some(op) = OPERATORS.iter().find(|op| rest.starts_with(**op)) {
            (TokenKind::Operator, op.len())
        } else if !c.is_ascii() && c.is_alphabetic() {
            (TokenKind::Identifier, c.len_utf8())
        } else {
            diags.push(Diagnostic::new(
                Code::UnknownChar,
                Span::new(pos, pos + c.len_utf8(), line),
                format!("`{c}` is not part of the math notation"),
            ));
            (TokenKind::Unknown, c.len_utf8())
        };
        let lexeme = &text[pos..pos + len];
        tokens.push(Token {
            kind,
            lexeme: lexeme.to_string(),
            span: Span::new(pos, pos + len, line),
        });
        line += lexeme.bytes().filter(|&b| b == b'\n').count();
        pos += len;
    }
    (tokens, diags)
}

#[cfg(test)]
mod tests {
    use super::*;
    use TokenKind::*;

    fn kinds(s: &str) -> Vec<(TokenKind, String)> {
        tokenize(s, SymbolTable::builtin())
            .0
            .into_iter()
            .map(|t| (t.kind, t.lexeme))
            .collect()
    }

    fn k(kind: TokenKind, s: &str) -> (TokenKind, String) {
        (kind, s.to_string())
    }

    #[test]
    fn big_operator_with_limits() {
        assert_eq!(
            kinds("sum_(i=1)^n"),
            vec![
                k(SymbolName, "sum"),
                k(Operator, "_"),
                k(Bracket, "("),
                k(Identifier, "i"),
                k(Operator, "="),
                k(Number, "1"),
                k(Bracket, ")"),
                k(Operator, "^"),
                k(Identifier, "n"),
            ]
        );
    }

    #[test]
    fn empty_input() {
        assert!(kinds("").is_empty());
    }

    #[test]
    fn whitespace_is_a_token() {
        assert_eq!(
            kinds("x (t"),
            vec![
                k(Identifier, "x"),
                k(Whitespace, " "),
                k(Bracket, "("),
                k(Identifier, "t")
            ]
        );
    }

    #[test]
    fn numbers_and_operators() {
        assert_eq!(
            kinds("3.14<=>2."),
            vec![k(Number, "3.14"), k(Operator, "<=>"), k(Number, "2"), k(Operator, ".")]
        );
        assert_eq!(
            kinds("x->y"),
            vec![k(Identifier, "x"), k(Operator, "->"), k(Identifier, "y")]
        );
    }

    #[test]
    fn latex_commands() {
        assert_eq!(
            kinds("\\frac{1}{2}\\,x"),
            vec![
                k(SymbolName, "\\frac"),
                k(Bracket, "{"),
                k(Number, "1"),
                k(Bracket, "}"),
                k(Bracket, "{"),
                k(Number, "2"),
                k(Bracket, "}"),
                k(SymbolName, "\\,"),
                k(Identifier, "x"),
            ]
        );
    }

    #[test]
    fn unknown_bytes_warn() {
        let (toks, diags) = tokenize("x@y", SymbolTable::builtin());
        assert_eq!(toks[1].kind, Unknown);
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].code, Code::UnknownChar);
    }

    #[test]
    fn text_quotes() {
        assert_eq!(
            kinds("\"hi there\"x"),
            vec![k(TextQuote, "\"hi there\""), k(Identifier, "x")]
        );
        let (toks, diags) = tokenize("\"open", SymbolTable::builtin());
        assert_eq!(toks.len(), 1);
        assert_eq!(diags[0].code, Code::UnclosedText);
    }

    #[test]
    fn lines_are_tracked() {
        let (toks, _) = tokenize("a\nb", SymbolTable::builtin());
        assert_eq!(toks[2].span.line, 2);
    }
}
