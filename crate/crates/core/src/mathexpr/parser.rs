//! Precedence-climbing parser shared by the Space Math and LaTeX-subset
//! front ends.
//!
//! Precedence, loosest first: `or`/`and`; relation chain; `+ -`;
//! multiplicative (`*`, `/`, juxtaposition); unary minus and big
//! operators; `_` and `^`; postfix application; atoms.
//!
//! The parser always produces an [`Expr`]. Unclosed brackets are closed
//! at the end of their expression, stray closers are dropped, and
//! anything else it cannot place becomes an [`Expr::Error`] holding the
//! raw text.

use super::ast::{BigOpKind, BracketStyle, Expr, LogicOp, NumberSet, Relator};
use super::symbols::{Category, SymbolTable};
use super::token::{Token, TokenKind};
use super::Dialect;
use crate::diagnostic::{Code, Diagnostic, Span};

/// Expressions with more significant tokens than this are kept verbatim
/// as a single error node instead of being parsed.
pub const MAX_TOKENS: usize = 1500;
const MAX_NESTING: usize = 160;

const WHITESPACE_COMMANDS: &[&str] = &["\\,", "\\;", "\\:", "\\!", "\\ ", "\\quad", "\\qquad"];

fn latex_relator(cmd: &str) -> Option<Relator> {
    Some(match cmd {
        "\\leq" | "\\le" | "\\leqslant" => Relator::Le,
        "\\geq" | "\\ge" | "\\geqslant" => Relator::Ge,
        "\\neq" | "\\ne" => Relator::Ne,
        "\\lt" => Relator::Lt,
        "\\gt" => Relator::Gt,
        "\\to" | "\\rightarrow" => Relator::To,
        "\\Leftrightarrow" | "\\iff" | "\\Longleftrightarrow" => Relator::Iff,
        "\\Rightarrow" | "\\implies" | "\\Longrightarrow" => Relator::Implies,
        "\\in" => Relator::In,
        _ => return None,
    })
}

fn latex_logic(cmd: &str) -> Option<LogicOp> {
    match cmd {
        "\\lor" | "\\vee" => Some(LogicOp::Or),
        "\\land" | "\\wedge" => Some(LogicOp::And),
        _ => None,
    }
}

fn unparen(e: Expr) -> Expr {
    match e {
        Expr::Bracketed {
            style: BracketStyle::Paren,
            inner,
        } => *inner,
        other => other,
    }
}

/// What kind of multiplicative operator sits at the cursor.
enum MulOp {
    Explicit,
    Divide,
}

pub(crate) struct Parser<'t> {
    toks: Vec<Token>,
    pos: usize,
    dialect: Dialect,
    symbols: &'t SymbolTable,
    diags: Vec<Diagnostic>,
    nesting: usize,
    envs: usize,
    slots: usize,
    bailed: bool,
}

impl<'t> Parser<'t> {
    pub(crate) fn new(tokens: &[Token], dialect: Dialect, symbols: &'t SymbolTable) -> Self {
        let mut p = Parser {
            toks: Vec::with_capacity(tokens.len()),
            pos: 0,
            dialect,
            symbols,
            diags: Vec::new(),
            nesting: 0,
            envs: 0,
            slots: 0,
            bailed: false,
        };
        p.prepare(tokens);
        p
    }

    /// Turns LaTeX spacing commands into whitespace and drops closers that
    /// match no open bracket.
    fn prepare(&mut self, tokens: &[Token]) {
        let mut stack: Vec<&'static str> = Vec::new();
        for tok in tokens {
            let mut tok = tok.clone();
            if tok.kind == TokenKind::SymbolName && WHITESPACE_COMMANDS.contains(&tok.lexeme.as_str()) {
                tok.kind = TokenKind::Whitespace;
            }
            let opener = match (tok.kind, tok.lexeme.as_str()) {
                (TokenKind::Bracket, "(") => Some(")"),
                (TokenKind::Bracket, "[") => Some("]"),
                (TokenKind::Bracket, "{") => Some("}"),
                (TokenKind::SymbolName, "\\{") => Some("\\}"),
                _ => None,
            };
            if let Some(close) = opener {
                stack.push(close);
            } else if matches!(
                (tok.kind, tok.lexeme.as_str()),
                (TokenKind::Bracket, ")" | "]" | "}") | (TokenKind::SymbolName, "\\}")
            ) {
                if let Some(depth) = stack.iter().rposition(|c| *c == tok.lexeme) {
                    stack.truncate(depth);
                } else {
                    self.diags.push(Diagnostic::new(
                        Code::StrayCloser,
                        tok.span,
                        format!("`{}` has no matching opening bracket and was dropped", tok.lexeme),
                    ));
                    // a dangling `\right` before the dropped closer goes too
                    if let Some(prev) = self.toks.iter().rposition(|t| t.kind != TokenKind::Whitespace) {
                        if self.toks[prev].is(TokenKind::SymbolName, "\\right") {
                            self.toks.truncate(prev);
                        }
                    }
                    continue;
                }
            }
            self.toks.push(tok);
        }
    }

    pub(crate) fn finish(self) -> Vec<Diagnostic> {
        self.diags
    }

    // ----- cursor helpers -------------------------------------------------

    fn peek_index_from(&self, from: usize) -> Option<usize> {
        (from..self.toks.len()).find(|&i| self.toks[i].kind != TokenKind::Whitespace)
    }

    fn peek_index(&self) -> Option<usize> {
        self.peek_index_from(self.pos)
    }

    fn peek(&self) -> Option<&Token> {
        self.peek_index().map(|i| &self.toks[i])
    }

    fn peek_at(&self, n: usize) -> Option<&Token> {
        let mut i = self.peek_index()?;
        for _ in 0..n {
            i = self.peek_index_from(i + 1)?;
        }
        Some(&self.toks[i])
    }

    /// The very next token, whitespace included.
    fn adjacent(&self) -> Option<&Token> {
        self.toks.get(self.pos)
    }

    fn bump(&mut self) -> Token {
        let i = self.peek_index().expect("bump past end");
        self.pos = i + 1;
        self.toks[i].clone()
    }

    fn at_op(&self, op: &str) -> bool {
        self.peek().is_some_and(|t| t.is_op(op))
    }

    fn at_cmd(&self, cmd: &str) -> bool {
        self.peek().is_some_and(|t| t.is(TokenKind::SymbolName, cmd))
    }

    fn here(&self) -> Span {
        match self.peek() {
            Some(t) => t.span,
            None => {
                let end = self.toks.last().map_or(Span::default(), |t| t.span);
                Span::new(end.end, end.end, end.line)
            }
        }
    }

    fn warn(&mut self, code: Code, span: Span, msg: impl Into<String>) {
        self.diags.push(Diagnostic::new(code, span, msg));
    }

    fn missing(&mut self, what: &str) -> Expr {
        let span = self.here();
        self.warn(Code::MissingOperand, span, format!("expected {what}"));
        Expr::error("")
    }

    fn category(&self, tok: &Token) -> Option<Category> {
        if tok.kind != TokenKind::SymbolName {
            return None;
        }
        let entry = if tok.lexeme.starts_with('\\') {
            self.symbols.by_hint(&tok.lexeme)
        } else {
            self.symbols.get(&tok.lexeme)
        };
        entry.map(|e| e.category)
    }

    fn enter(&mut self) -> bool {
        self.nesting += 1;
        self.nesting <= MAX_NESTING && !self.bailed
    }

    fn leave(&mut self) {
        self.nesting -= 1;
    }

    /// Gives up on structure: everything left becomes one error node.
    fn bail(&mut self) -> Expr {
        self.nesting -= 1;
        if self.bailed {
            return Expr::error("");
        }
        self.bailed = true;
        let start = self.pos.min(self.toks.len());
        let raw: String = self.toks[start..].iter().map(|t| t.lexeme.as_str()).collect();
        let span = self.toks.get(start).map_or(self.here(), |t| t.span);
        let span = span.to(self.toks.last().map_or(span, |t| t.span));
        self.pos = self.toks.len();
        self.warn(
            Code::UnexpectedToken,
            span,
            "expression is nested too deeply to parse; kept as typed",
        );
        Expr::error(raw)
    }

    // ----- token classes --------------------------------------------------

    /// Closing delimiter at token `i`: the key it closes and whether it is
    /// spelled with `\right`.
    fn closer_at(&self, i: usize) -> Option<&'static str> {
        let t = &self.toks[i];
        match (t.kind, t.lexeme.as_str()) {
            (TokenKind::Bracket, ")") => Some(")"),
            (TokenKind::Bracket, "]") => Some("]"),
            (TokenKind::Bracket, "}") => Some("}"),
            (TokenKind::SymbolName, "\\}") => Some("\\}"),
            (TokenKind::SymbolName, "\\right") => {
                let j = self.peek_index_from(i + 1)?;
                match self.closer_at(j) {
                    Some(k) if !self.toks[j].is(TokenKind::SymbolName, "\\right") => Some(k),
                    _ => None,
                }
            }
            _ => None,
        }
    }

    fn at_closer(&self) -> bool {
        self.peek_index().is_some_and(|i| self.closer_at(i).is_some())
    }

    fn is_env_separator(t: &Token) -> bool {
        t.is_op("&") || t.is(TokenKind::SymbolName, "\\\\") || t.is(TokenKind::SymbolName, "\\end")
    }

    fn at_stop(&self) -> bool {
        match self.peek() {
            None => true,
            Some(t) => self.at_closer() || t.is_op(",") || (self.envs > 0 && Self::is_env_separator(t)),
        }
    }

    fn relator_here(&self) -> Option<Relator> {
        let t = self.peek()?;
        match t.kind {
            TokenKind::Operator => Relator::from_spelling(&t.lexeme).filter(|r| *r != Relator::In),
            TokenKind::SymbolName if t.lexeme.starts_with('\\') => latex_relator(&t.lexeme),
            TokenKind::SymbolName => match self.category(t) {
                Some(Category::Relation) => Relator::from_spelling(&t.lexeme),
                _ => None,
            },
            _ => None,
        }
    }

    /// `\text{ or }` style connective starting at token `i`; returns the
    /// operator and the number of tokens (whitespace included) it spans.
    fn text_connective_at(&self, i: usize) -> Option<(LogicOp, usize)> {
        let t = &self.toks[i];
        if !(t.is(TokenKind::SymbolName, "\\text") || t.is(TokenKind::SymbolName, "\\mbox")) {
            return None;
        }
        let open = self.peek_index_from(i + 1)?;
        if !self.toks[open].is(TokenKind::Bracket, "{") {
            return None;
        }
        let mut content = String::new();
        for j in open + 1..self.toks.len() {
            let tj = &self.toks[j];
            if tj.is(TokenKind::Bracket, "}") {
                return LogicOp::from_name(content.trim()).map(|op| (op, j + 1 - self.pos));
            }
            if tj.kind == TokenKind::Bracket {
                return None;
            }
            content.push_str(&tj.lexeme);
        }
        None
    }

    fn logic_here(&self) -> Option<LogicOp> {
        let i = self.peek_index()?;
        let t = &self.toks[i];
        if t.kind != TokenKind::SymbolName {
            return None;
        }
        if t.lexeme.starts_with('\\') {
            return latex_logic(&t.lexeme).or_else(|| self.text_connective_at(i).map(|(op, _)| op));
        }
        match self.category(t) {
            Some(Category::Logic) => LogicOp::from_name(&t.lexeme),
            _ => None,
        }
    }

    fn bump_logic(&mut self) {
        let i = self.peek_index().expect("logic operator");
        match self.text_connective_at(i) {
            Some((_, n)) => self.pos += n,
            None => self.pos = i + 1,
        }
    }

    fn mul_op_here(&self) -> Option<MulOp> {
        let t = self.peek()?;
        match (t.kind, t.lexeme.as_str()) {
            (TokenKind::Operator, "*") => Some(MulOp::Explicit),
            (TokenKind::Operator, "/") => Some(MulOp::Divide),
            (TokenKind::SymbolName, "\\times" | "\\cdot" | "\\ast") => Some(MulOp::Explicit),
            (TokenKind::SymbolName, "\\div") => Some(MulOp::Divide),
            (TokenKind::SymbolName, _) if self.category(t) == Some(Category::Times) => Some(MulOp::Explicit),
            _ => None,
        }
    }

    /// Whether the token at the cursor can begin an operand, i.e. whether
    /// juxtaposition continues the product.
    fn starts_operand(&self) -> bool {
        let Some(i) = self.peek_index() else {
            return false;
        };
        let t = &self.toks[i];
        match t.kind {
            TokenKind::Number | TokenKind::Identifier | TokenKind::TextQuote | TokenKind::Slot | TokenKind::Unknown => {
                true
            }
            TokenKind::Bracket => matches!(t.lexeme.as_str(), "(" | "[" | "{"),
            TokenKind::Whitespace => false,
            TokenKind::Operator => match t.lexeme.as_str() {
                "!" | "." | ":" | ";" | "'" | "|" => true,
                "&" => self.envs == 0,
                _ => false,
            },
            TokenKind::SymbolName if t.lexeme.starts_with('\\') => {
                let cmd = t.lexeme.as_str();
                if self.closer_at(i).is_some() {
                    return false;
                }
                if matches!(cmd, "\\\\" | "\\end") {
                    return self.envs == 0;
                }
                latex_relator(cmd).is_none()
                    && latex_logic(cmd).is_none()
                    && self.text_connective_at(i).is_none()
                    && !matches!(cmd, "\\times" | "\\cdot" | "\\ast" | "\\div")
                    && !matches!(
                        self.category(t),
                        Some(Category::Relation | Category::Logic | Category::Times)
                    )
            }
            TokenKind::SymbolName => !matches!(
                self.category(t),
                Some(Category::Relation | Category::Logic | Category::Times) | None
            ),
        }
    }

    /// LaTeX reads a single digit as a script or `\frac` argument:
    /// `x^23` is `x^{2}3`.
    fn split_leading_digit(&mut self) {
        if self.dialect != Dialect::Latex {
            return;
        }
        let Some(i) = self.peek_index() else { return };
        let t = &self.toks[i];
        if t.kind != TokenKind::Number || t.lexeme.len() < 2 || !t.lexeme.bytes().all(|b| b.is_ascii_digit()) {
            return;
        }
        let t = t.clone();
        let first = Token {
            kind: TokenKind::Number,
            lexeme: t.lexeme[..1].to_string(),
            span: Span::new(t.span.start, t.span.start + 1, t.span.line),
        };
        let rest = Token {
            kind: TokenKind::Number,
            lexeme: t.lexeme[1..].to_string(),
            span: Span::new(t.span.start + 1, t.span.end, t.span.line),
        };
        self.toks.splice(i..=i, [first, rest]);
    }

    // ----- grammar --------------------------------------------------------

    pub(crate) fn parse_top(&mut self) -> Expr {
        if self.peek().is_none() {
            return self.missing("an expression");
        }
        let significant = self.toks.iter().filter(|t| t.kind != TokenKind::Whitespace).count();
        if significant > MAX_TOKENS {
            self.nesting += 1;
            return self.bail();
        }
        let mut e = self.parse_list();
        while let Some(i) = self.peek_index() {
            // Only reachable for closers of `\left` groups that were never
            // opened; report and keep the text.
            let t = self.toks[i].clone();
            self.pos = i + 1;
            self.warn(Code::UnexpectedToken, t.span, format!("unexpected `{}`", t.lexeme));
            e = Expr::times(e, Expr::error(t.lexeme));
            if self.peek().is_some() {
                let next = self.parse_list();
                e = Expr::times(e, next);
            }
        }
        e
    }

    fn parse_list(&mut self) -> Expr {
        let mut items = vec![self.parse_expr()];
        while self.at_op(",") {
            self.bump();
            items.push(self.parse_expr());
        }
        if items.len() == 1 {
            items.pop().expect("one item")
        } else {
            Expr::Tuple { items }
        }
    }

    fn parse_expr(&mut self) -> Expr {
        let mut left = self.parse_relation();
        while let Some(op) = self.logic_here() {
            self.bump_logic();
            let right = self.parse_relation();
            left = Expr::Logic {
                op,
                left: Box::new(left),
                right: Box::new(right),
            };
        }
        left
    }

    fn parse_relation(&mut self) -> Expr {
        let first = self.parse_additive();
        let mut rest = Vec::new();
        while let Some(rel) = self.relator_here() {
            self.bump();
            rest.push((rel, self.parse_additive()));
        }
        if rest.is_empty() {
            first
        } else {
            Expr::Relation {
                first: Box::new(first),
                rest,
            }
        }
    }

    fn parse_additive(&mut self) -> Expr {
        let mut left = self.parse_term();
        loop {
            if self.at_op("+") {
                self.bump();
                let right = self.parse_term();
                left = Expr::add(left, right);
            } else if self.at_op("-") {
                self.bump();
                let right = self.parse_term();
                left = Expr::sub(left, right);
            } else {
                return left;
            }
        }
    }

    fn parse_term(&mut self) -> Expr {
        let mut left = self.parse_unary();
        loop {
            match self.mul_op_here() {
                Some(MulOp::Explicit) => {
                    self.bump();
                    let right = self.parse_unary();
                    left = Expr::times_explicit(left, right);
                }
                Some(MulOp::Divide) => {
                    self.bump();
                    let right = self.parse_unary();
                    left = Expr::frac(unparen(left), unparen(right));
                }
                None if self.starts_operand() => {
                    let right = self.parse_unary();
                    left = Expr::times(left, right);
                }
                None => return left,
            }
        }
    }

    fn parse_unary(&mut self) -> Expr {
        if !self.enter() {
            return self.bail();
        }
        let e = if self.at_op("-") {
            self.bump();
            Expr::neg(self.parse_unary())
        } else {
            self.parse_power()
        };
        self.leave();
        e
    }

    fn parse_power(&mut self) -> Expr {
        if !self.enter() {
            return self.bail();
        }
        let mut base = self.parse_postfix();
        while self.at_op("_") {
            self.bump();
            let index = self.parse_sub_operand();
            base = Expr::subscript(base, index);
        }
        if self.at_op("^") {
            self.bump();
            let exponent = self.parse_sup_operand();
            base = Expr::power(base, exponent);
        }
        self.leave();
        base
    }

    fn opens_paren_group(&self) -> bool {
        match self.peek() {
            Some(t) if t.is(TokenKind::Bracket, "(") => true,
            Some(t) if t.is(TokenKind::SymbolName, "\\left") => {
                self.peek_at(1).is_some_and(|n| n.is(TokenKind::Bracket, "("))
            }
            _ => false,
        }
    }

    /// Operand of `_`: a postfix expression; one pair of round brackets
    /// around it is grouping only.
    fn parse_sub_operand(&mut self) -> Expr {
        if !self.enter() {
            return self.bail();
        }
        let e = if self.at_op("-") {
            self.bump();
            Expr::neg(self.parse_sub_operand())
        } else {
            self.split_leading_digit();
            let grouped = self.opens_paren_group();
            let e = self.parse_postfix();
            if grouped {
                unparen(e)
            } else {
                e
            }
        };
        self.leave();
        e
    }

    /// Operand of `^`: right-associative, may carry its own scripts.
    fn parse_sup_operand(&mut self) -> Expr {
        if !self.enter() {
            return self.bail();
        }
        let e = if self.at_op("-") {
            self.bump();
            Expr::neg(self.parse_sup_operand())
        } else {
            self.split_leading_digit();
            let grouped = self.opens_paren_group();
            let e = self.parse_power();
            if grouped {
                unparen(e)
            } else {
                e
            }
        };
        self.leave();
        e
    }

    fn is_applicable(&self, e: &Expr) -> bool {
        matches!(e, Expr::Ident { .. } | Expr::Greek { .. } | Expr::Apply { .. })
    }

    fn is_function_name(&self, e: &Expr) -> bool {
        match e {
            Expr::Ident { name } => self.symbols.get(name).is_some_and(|s| s.category == Category::Func),
            _ => false,
        }
    }

    /// An argument list opens right here, with no space in between.
    fn adjacent_paren(&self) -> bool {
        match self.adjacent() {
            Some(t) if t.is(TokenKind::Bracket, "(") => true,
            Some(t) if t.is(TokenKind::SymbolName, "\\left") => {
                self.peek_at(1).is_some_and(|n| n.is(TokenKind::Bracket, "("))
            }
            _ => false,
        }
    }

    fn parse_postfix(&mut self) -> Expr {
        // `{\sin} x` in LaTeX is a product, the braces hide the function
        let braced = self.dialect == Dialect::Latex && self.peek().is_some_and(|t| t.is(TokenKind::Bracket, "{"));
        let mut e = self.parse_atom();
        if braced {
            return e;
        }
        if self.is_function_name(&e) {
            if self.opens_paren_group() {
                let args = self.parse_args();
                e = Expr::apply(e, args);
            } else if self.starts_operand() && !self.at_closer() {
                let arg = self.parse_power();
                e = Expr::apply(e, vec![arg]);
            }
        }
        while self.is_applicable(&e) && self.adjacent_paren() {
            let args = self.parse_args();
            e = Expr::apply(e, args);
        }
        e
    }

    /// `( a, b, ... )` after an application head.
    fn parse_args(&mut self) -> Vec<Expr> {
        let (inner, _) = self.parse_delimited(BracketStyle::Paren);
        match inner {
            Expr::Tuple { items } => items,
            single => vec![single],
        }
    }

    /// Parses from an opening delimiter (`(`, `[`, `{`, `\{`, optionally
    /// preceded by `\left`) to its closer. Returns the inner expression,
    /// empty groups as an empty tuple.
    fn parse_delimited(&mut self, style: BracketStyle) -> (Expr, Span) {
        let sized = self.at_cmd("\\left");
        if sized {
            self.bump();
        }
        let open = self.bump();
        let key = match open.lexeme.as_str() {
            "(" => ")",
            "[" => "]",
            "{" => "}",
            _ => "\\}",
        };
        let inner = if self.peek_index().and_then(|i| self.closer_at(i)) == Some(key) {
            Expr::Tuple { items: vec![] }
        } else {
            self.parse_list()
        };
        match self.peek_index().map(|i| (i, self.closer_at(i))) {
            Some((i, Some(k))) if k == key => {
                if self.toks[i].is(TokenKind::SymbolName, "\\right") {
                    self.bump();
                }
                self.bump();
            }
            _ => {
                let what = if sized {
                    format!("\\left{}", open.lexeme)
                } else {
                    open.lexeme.clone()
                };
                self.warn(
                    Code::UnclosedBracket,
                    open.span,
                    format!("bracket `{what}` is never closed; closed at the end of the expression"),
                );
                let _ = style;
            }
        }
        (inner, open.span)
    }

    fn parse_group(&mut self) -> Expr {
        let opener = self.peek().expect("group opener").clone();
        let sized = opener.is(TokenKind::SymbolName, "\\left");
        let open_tok = if sized {
            self.peek_at(1).cloned()
        } else {
            Some(opener.clone())
        };
        let Some(open_tok) = open_tok else {
            return self.missing("a bracket");
        };
        let style = match open_tok.lexeme.as_str() {
            "(" => BracketStyle::Paren,
            "[" => BracketStyle::Square,
            "{" if self.dialect == Dialect::Latex && !sized => {
                // plain LaTeX braces only group
                let (inner, _) = self.parse_delimited(BracketStyle::Brace);
                return inner;
            }
            _ => BracketStyle::Brace,
        };
        let (inner, span) = self.parse_delimited(style);
        if let Some(m) = self.as_matrix(style, &inner, span) {
            return m;
        }
        Expr::Bracketed {
            style,
            inner: Box::new(inner),
        }
    }

    /// `[[a,b],[c,d]]`: a bracketed list of at least two rows, every row
    /// itself bracketed the same way.
    fn as_matrix(&mut self, style: BracketStyle, inner: &Expr, span: Span) -> Option<Expr> {
        if style == BracketStyle::Brace {
            return None;
        }
        let Expr::Tuple { items } = inner else {
            return None;
        };
        if items.len() < 2 {
            return None;
        }
        let mut rows = Vec::with_capacity(items.len());
        for item in items {
            match item {
                Expr::Bracketed { style: s, inner } if *s == style => rows.push(match inner.as_ref() {
                    Expr::Tuple { items } => items.clone(),
                    single => vec![single.clone()],
                }),
                _ => return None,
            }
        }
        Some(self.rectangular(style, rows, span))
    }

    fn rectangular(&mut self, style: BracketStyle, mut rows: Vec<Vec<Expr>>, span: Span) -> Expr {
        let width = rows.iter().map(Vec::len).max().unwrap_or(0);
        if rows.iter().any(|r| r.len() != width) {
            self.warn(
                Code::RaggedMatrix,
                span,
                format!("matrix rows have different lengths; short rows padded to {width} entries"),
            );
            for r in &mut rows {
                r.resize(width, Expr::error(""));
            }
        }
        Expr::Matrix { style, rows }
    }

    fn parse_atom(&mut self) -> Expr {
        let Some(i) = self.peek_index() else {
            return self.missing("an operand");
        };
        let t = self.toks[i].clone();
        match t.kind {
            TokenKind::Number => {
                self.bump();
                if t.lexeme.contains('.') {
                    Expr::Decimal { text: t.lexeme }
                } else {
                    Expr::Integer {
                        value: t.lexeme.parse().expect("digits"),
                    }
                }
            }
            TokenKind::Identifier => {
                self.bump();
                Expr::Ident { name: t.lexeme }
            }
            TokenKind::TextQuote => {
                self.bump();
                let inner = t.lexeme.strip_prefix('"').unwrap_or(&t.lexeme);
                let inner = inner.strip_suffix('"').unwrap_or(inner);
                Expr::text(inner)
            }
            TokenKind::Slot => {
                self.bump();
                let index = self.slots;
                self.slots += 1;
                Expr::Slot { index }
            }
            TokenKind::Unknown => {
                self.bump();
                Expr::error(t.lexeme)
            }
            TokenKind::Bracket => {
                if matches!(t.lexeme.as_str(), "(" | "[" | "{") {
                    self.parse_group()
                } else {
                    self.missing("an operand")
                }
            }
            TokenKind::SymbolName if t.lexeme.starts_with('\\') => self.parse_command(),
            TokenKind::SymbolName => self.parse_word(),
            TokenKind::Operator => {
                if self.starts_operand() {
                    self.bump();
                    self.warn(
                        Code::UnexpectedToken,
                        t.span,
                        format!("`{}` is not understood here", t.lexeme),
                    );
                    Expr::error(t.lexeme)
                } else {
                    self.missing("an operand")
                }
            }
            TokenKind::Whitespace => unreachable!("peek skips whitespace"),
        }
    }

    fn parse_word(&mut self) -> Expr {
        let t = self.peek().expect("word").clone();
        match self.category(&t) {
            Some(Category::BigOp) => self.parse_bigop(),
            Some(Category::Sqrt) => {
                self.bump();
                Expr::sqrt(self.parse_radicand())
            }
            Some(Category::Root) => {
                self.bump();
                let index = self.parse_radicand();
                let arg = self.parse_radicand();
                Expr::Root {
                    index: Box::new(index),
                    arg: Box::new(arg),
                }
            }
            Some(cat) if !matches!(cat, Category::Relation | Category::Logic | Category::Times) => {
                self.bump();
                self.named_atom(cat, &t.lexeme)
            }
            _ => self.missing("an operand"),
        }
    }

    fn named_atom(&self, cat: Category, name: &str) -> Expr {
        match cat {
            Category::Greek => Expr::Greek { name: name.to_string() },
            Category::Const => Expr::constant(name),
            Category::Set => match name.chars().next().and_then(NumberSet::from_letter) {
                Some(set) => Expr::BlackboardSet { set },
                None => Expr::ident(name),
            },
            _ => Expr::ident(name),
        }
    }

    /// Operand of `sqrt` / `root`: one postfix expression, round brackets
    /// around it are grouping only.
    fn parse_radicand(&mut self) -> Expr {
        if !self.enter() {
            return self.bail();
        }
        let grouped = self.opens_paren_group();
        let e = if self.peek().is_none() || self.at_stop() {
            self.missing("an operand")
        } else {
            self.parse_postfix()
        };
        self.leave();
        if grouped {
            unparen(e)
        } else {
            e
        }
    }

    fn parse_bigop(&mut self) -> Expr {
        let t = self.bump();
        let name = if t.lexeme.starts_with('\\') {
            t.lexeme[1..].to_string()
        } else {
            t.lexeme.clone()
        };
        let op = BigOpKind::from_name(&name).unwrap_or(BigOpKind::Sum);
        let mut lower = None;
        let mut upper = None;
        for _ in 0..2 {
            if lower.is_none() && self.at_op("_") {
                self.bump();
                lower = Some(self.parse_sub_operand());
            } else if upper.is_none() && self.at_op("^") {
                self.bump();
                upper = Some(self.parse_sup_operand());
            }
        }
        let body = if self.starts_operand() || self.at_op("-") {
            if !self.enter() {
                return self.bail();
            }
            let b = self.parse_term();
            self.leave();
            b
        } else {
            self.missing("a summand after the big operator")
        };
        let (binder, lower) = match lower {
            Some(Expr::Relation { first, mut rest })
                if rest.len() == 1
                    && rest[0].0 == Relator::Eq
                    && matches!(*first, Expr::Ident { .. } | Expr::Greek { .. }) =>
            {
                (Some(first), Some(Box::new(rest.pop().expect("one step").1)))
            }
            other => (None, other.map(Box::new)),
        };
        Expr::BigOp {
            op,
            binder,
            lower,
            upper: upper.map(Box::new),
            body: Box::new(body),
        }
    }

    /// Contents of a `{...}` argument, verbatim.
    fn read_brace_raw(&mut self) -> Option<String> {
        if !self.peek().is_some_and(|t| t.is(TokenKind::Bracket, "{")) {
            return None;
        }
        self.bump();
        let mut depth = 1usize;
        let mut out = String::new();
        while self.pos < self.toks.len() {
            let t = &self.toks[self.pos];
            self.pos += 1;
            if t.is(TokenKind::Bracket, "{") {
                depth += 1;
            } else if t.is(TokenKind::Bracket, "}") {
                depth -= 1;
                if depth == 0 {
                    return Some(out);
                }
            }
            out.push_str(&t.lexeme);
        }
        Some(out)
    }

    /// Argument of `\frac` and friends: a brace group, one digit, or one atom.
    fn latex_arg(&mut self) -> Expr {
        if !self.enter() {
            return self.bail();
        }
        self.split_leading_digit();
        let e = match self.peek() {
            None => self.missing("an argument"),
            Some(_) if self.at_stop() => self.missing("an argument"),
            Some(t) if t.is(TokenKind::Bracket, "{") => {
                let (inner, _) = self.parse_delimited(BracketStyle::Brace);
                inner
            }
            Some(_) => self.parse_atom(),
        };
        self.leave();
        e
    }

    fn parse_command(&mut self) -> Expr {
        let t = self.peek().expect("command").clone();
        let cmd = t.lexeme.as_str();
        match cmd {
            "\\frac" | "\\dfrac" | "\\tfrac" => {
                self.bump();
                let n = self.latex_arg();
                let d = self.latex_arg();
                Expr::frac(n, d)
            }
            "\\sqrt" => {
                self.bump();
                if self.peek().is_some_and(|t| t.is(TokenKind::Bracket, "[")) {
                    let (index, _) = self.parse_delimited(BracketStyle::Square);
                    let arg = self.latex_arg();
                    Expr::Root {
                        index: Box::new(index),
                        arg: Box::new(arg),
                    }
                } else {
                    Expr::sqrt(self.latex_arg())
                }
            }
            "\\left" => {
                if self
                    .peek_at(1)
                    .is_some_and(|n| matches!(n.lexeme.as_str(), "(" | "[" | "\\{"))
                {
                    self.parse_group()
                } else {
                    self.bump();
                    let delim = if self.peek().is_some() && !self.at_stop() {
                        self.bump().lexeme
                    } else {
                        String::new()
                    };
                    self.warn(
                        Code::UnsupportedLatex,
                        t.span,
                        format!("`\\left{delim}` is not supported"),
                    );
                    Expr::error(format!("\\left{delim}"))
                }
            }
            "\\{" => self.parse_group(),
            "\\mathbb" => {
                self.bump();
                let letter = match self.read_brace_raw() {
                    Some(s) => s.trim().to_string(),
                    None if self.peek().is_some_and(|t| t.kind == TokenKind::Identifier) => self.bump().lexeme,
                    None => String::new(),
                };
                match letter.chars().next().and_then(NumberSet::from_letter) {
                    Some(set) if letter.len() == 1 => Expr::BlackboardSet { set },
                    _ => {
                        self.warn(
                            Code::UnsupportedLatex,
                            t.span,
                            format!("`\\mathbb{{{letter}}}` is not a supported number set"),
                        );
                        Expr::error(format!("\\mathbb{{{letter}}}"))
                    }
                }
            }
            "\\text" | "\\mbox" | "\\textrm" => {
                self.bump();
                Expr::text(self.read_brace_raw().unwrap_or_default())
            }
            "\\mathrm" | "\\operatorname" => {
                self.bump();
                let name = self.read_brace_raw().unwrap_or_default();
                let name = name.trim();
                if !name.is_empty() && name.chars().all(|c| c.is_ascii_alphabetic()) {
                    Expr::ident(name)
                } else {
                    Expr::text(name)
                }
            }
            "\\begin" => self.parse_environment(),
            _ => {
                if let Some(entry) = self.symbols.by_hint(cmd) {
                    let cat = entry.category;
                    let name = entry.name.clone();
                    match cat {
                        Category::BigOp => return self.parse_bigop(),
                        Category::Relation | Category::Logic | Category::Times => return self.missing("an operand"),
                        Category::Sqrt | Category::Root => {}
                        _ => {
                            self.bump();
                            return self.named_atom(cat, &name);
                        }
                    }
                }
                if latex_relator(cmd).is_some()
                    || latex_logic(cmd).is_some()
                    || self.closer_at(self.peek_index().unwrap_or(0)).is_some()
                {
                    return self.missing("an operand");
                }
                if self.envs > 0 && Self::is_env_separator(&t) {
                    return self.missing("an operand");
                }
                self.unsupported_command()
            }
        }
    }

    /// Unknown command plus its brace arguments, kept verbatim.
    fn unsupported_command(&mut self) -> Expr {
        let t = self.bump();
        let mut raw = t.lexeme.clone();
        while self.adjacent().is_some_and(|n| n.is(TokenKind::Bracket, "{")) {
            let inner = self.read_brace_raw().unwrap_or_default();
            raw.push('{');
            raw.push_str(&inner);
            raw.push('}');
        }
        self.warn(
            Code::UnsupportedLatex,
            t.span,
            format!("LaTeX command `{}` is not supported; kept as typed", t.lexeme),
        );
        Expr::error(raw)
    }

    fn parse_environment(&mut self) -> Expr {
        let begin = self.bump();
        let name = self.read_brace_raw().unwrap_or_default();
        let style = match name.as_str() {
            "pmatrix" => Some(BracketStyle::Paren),
            "bmatrix" | "matrix" => Some(BracketStyle::Square),
            _ => None,
        };
        let Some(style) = style else {
            // keep the whole environment verbatim
            let mut raw = format!("\\begin{{{name}}}");
            let mut depth = 1;
            while self.pos < self.toks.len() {
                let t = self.toks[self.pos].clone();
                self.pos += 1;
                raw.push_str(&t.lexeme);
                if t.is(TokenKind::SymbolName, "\\begin") {
                    depth += 1;
                } else if t.is(TokenKind::SymbolName, "\\end") {
                    depth -= 1;
                    if depth == 0 {
                        if let Some(n) = self.read_brace_raw() {
                            raw.push('{');
                            raw.push_str(&n);
                            raw.push('}');
                        }
                        break;
                    }
                }
            }
            self.warn(
                Code::UnsupportedLatex,
                begin.span,
                format!("environment `{name}` is not supported; kept as typed"),
            );
            return Expr::error(raw);
        };
        self.envs += 1;
        let mut rows = Vec::new();
        loop {
            let mut row = Vec::new();
            loop {
                let empty_cell = self
                    .peek()
                    .is_none_or(|t| Self::is_env_separator(t) || self.at_closer());
                row.push(if empty_cell { Expr::error("") } else { self.parse_expr() });
                if self.at_op("&") {
                    self.bump();
                } else {
                    break;
                }
            }
            rows.push(row);
            if self.at_cmd("\\\\") {
                self.bump();
                if self.at_cmd("\\end") || self.peek().is_none() {
                    break;
                }
            } else {
                break;
            }
        }
        self.envs -= 1;
        if self.at_cmd("\\end") {
            self.bump();
            self.read_brace_raw();
        } else {
            self.warn(
                Code::UnclosedBracket,
                begin.span,
                format!("`\\begin{{{name}}}` is never ended; closed at the end of the expression"),
            );
        }
        self.rectangular(style, rows, begin.span)
    }
}
