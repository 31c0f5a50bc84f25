use std::fmt;

use num_bigint::BigUint;
use serde::{Serialize, Serializer};

/// Semantic expression tree produced by both the Space Math and the
/// LaTeX-subset front ends.
///
/// `Apply` and `Times` are never merged: `x(t+1)` is an application,
/// `x (t+1)` a product.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum Expr {
    Integer {
        #[serde(serialize_with = "ser_biguint")]
        value: BigUint,
    },
    /// Decimal literal, kept exactly as typed.
    Decimal {
        text: String,
    },
    Ident {
        name: String,
    },
    SymbolConst {
        name: String,
    },
    Greek {
        name: String,
    },
    BlackboardSet {
        set: NumberSet,
    },
    Add {
        left: Box<Expr>,
        right: Box<Expr>,
    },
    Sub {
        left: Box<Expr>,
        right: Box<Expr>,
    },
    Neg {
        arg: Box<Expr>,
    },
    Times {
        left: Box<Expr>,
        right: Box<Expr>,
        explicit: bool,
    },
    Apply {
        head: Box<Expr>,
        args: Vec<Expr>,
    },
    Frac {
        numerator: Box<Expr>,
        denominator: Box<Expr>,
    },
    Power {
        base: Box<Expr>,
        exponent: Box<Expr>,
    },
    Subscript {
        base: Box<Expr>,
        index: Box<Expr>,
    },
    Sqrt {
        arg: Box<Expr>,
    },
    Root {
        index: Box<Expr>,
        arg: Box<Expr>,
    },
    BigOp {
        op: BigOpKind,
        binder: Option<Box<Expr>>,
        lower: Option<Box<Expr>>,
        upper: Option<Box<Expr>>,
        body: Box<Expr>,
    },
    Matrix {
        style: BracketStyle,
        rows: Vec<Vec<Expr>>,
    },
    /// `first rel_1 e_1 rel_2 e_2 ...`; `rest` is never empty.
    Relation {
        first: Box<Expr>,
        rest: Vec<(Relator, Expr)>,
    },
    /// `or` / `and` between statements, e.g. `x=1 or x=9`.
    Logic {
        op: LogicOp,
        left: Box<Expr>,
        right: Box<Expr>,
    },
    Bracketed {
        style: BracketStyle,
        inner: Box<Expr>,
    },
    /// Comma-separated list; appears inside brackets or at top level.
    Tuple {
        items: Vec<Expr>,
    },
    TextFragment {
        text: String,
    },
    /// Input that could not be parsed, kept verbatim.
    Error {
        raw: String,
    },
    /// Hole left by a calculator placeholder embedded in math.
    Slot {
        index: usize,
    },
}

fn ser_biguint<S: Serializer>(v: &BigUint, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum NumberSet {
    N,
    Z,
    Q,
    R,
    C,
}

impl NumberSet {
    pub fn from_letter(c: char) -> Option<Self> {
        Some(match c {
            'N' => NumberSet::N,
            'Z' => NumberSet::Z,
            'Q' => NumberSet::Q,
            'R' => NumberSet::R,
            'C' => NumberSet::C,
            _ => return None,
        })
    }

    pub fn letter(self) -> char {
        match self {
            NumberSet::N => 'N',
            NumberSet::Z => 'Z',
            NumberSet::Q => 'Q',
            NumberSet::R => 'R',
            NumberSet::C => 'C',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BigOpKind {
    Sum,
    Prod,
    Int,
}

impl BigOpKind {
    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "sum" => BigOpKind::Sum,
            "prod" => BigOpKind::Prod,
            "int" => BigOpKind::Int,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            BigOpKind::Sum => "sum",
            BigOpKind::Prod => "prod",
            BigOpKind::Int => "int",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BracketStyle {
    Paren,
    Square,
    Brace,
}

impl BracketStyle {
    pub fn from_open(c: char) -> Option<Self> {
        match c {
            '(' => Some(BracketStyle::Paren),
            '[' => Some(BracketStyle::Square),
            '{' => Some(BracketStyle::Brace),
            _ => None,
        }
    }

    pub fn from_close(c: char) -> Option<Self> {
        match c {
            ')' => Some(BracketStyle::Paren),
            ']' => Some(BracketStyle::Square),
            '}' => Some(BracketStyle::Brace),
            _ => None,
        }
    }

    pub fn open(self) -> char {
        match self {
            BracketStyle::Paren => '(',
            BracketStyle::Square => '[',
            BracketStyle::Brace => '{',
        }
    }

    pub fn close(self) -> char {
        match self {
            BracketStyle::Paren => ')',
            BracketStyle::Square => ']',
            BracketStyle::Brace => '}',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Relator {
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = ">")]
    Gt,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "!=")]
    Ne,
    #[serde(rename = "->")]
    To,
    #[serde(rename = "<=>")]
    Iff,
    #[serde(rename = "=>")]
    Implies,
    #[serde(rename = "in")]
    In,
}

impl Relator {
    pub const ALL: [Relator; 10] = [
        Relator::Eq,
        Relator::Lt,
        Relator::Gt,
        Relator::Le,
        Relator::Ge,
        Relator::Ne,
        Relator::To,
        Relator::Iff,
        Relator::Implies,
        Relator::In,
    ];

    pub fn from_spelling(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|r| r.spelling() == s)
    }

    /// Space Math spelling.
    pub fn spelling(self) -> &'static str {
        match self {
            Relator::Eq => "=",
            Relator::Lt => "<",
            Relator::Gt => ">",
            Relator::Le => "<=",
            Relator::Ge => ">=",
            Relator::Ne => "!=",
            Relator::To => "->",
            Relator::Iff => "<=>",
            Relator::Implies => "=>",
            Relator::In => "in",
        }
    }

    pub fn latex(self) -> &'static str {
        match self {
            Relator::Eq => "=",
            Relator::Lt => "<",
            Relator::Gt => ">",
            Relator::Le => "\\leq",
            Relator::Ge => "\\geq",
            Relator::Ne => "\\neq",
            Relator::To => "\\to",
            Relator::Iff => "\\Leftrightarrow",
            Relator::Implies => "\\Rightarrow",
            Relator::In => "\\in",
        }
    }

    /// Display character for presentation markup.
    pub fn glyph(self) -> &'static str {
        match self {
            Relator::Eq => "=",
            Relator::Lt => "<",
            Relator::Gt => ">",
            Relator::Le => "\u{2264}",
            Relator::Ge => "\u{2265}",
            Relator::Ne => "\u{2260}",
            Relator::To => "\u{2192}",
            Relator::Iff => "\u{21D4}",
            Relator::Implies => "\u{21D2}",
            Relator::In => "\u{2208}",
        }
    }
}

impl fmt::Display for Relator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.spelling())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LogicOp {
    And,
    Or,
}

impl LogicOp {
    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "and" => Some(LogicOp::And),
            "or" => Some(LogicOp::Or),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            LogicOp::And => "and",
            LogicOp::Or => "or",
        }
    }
}

/// Shorthand constructors, mostly for tests and for turning calculator
/// values back into expressions.
#[allow(clippy::should_implement_trait)]
impl Expr {
    pub fn int(v: u64) -> Expr {
        Expr::Integer {
            value: BigUint::from(v),
        }
    }

    pub fn ident(name: &str) -> Expr {
        Expr::Ident { name: name.to_string() }
    }

    pub fn constant(name: &str) -> Expr {
        Expr::SymbolConst { name: name.to_string() }
    }

    pub fn decimal(text: &str) -> Expr {
        Expr::Decimal { text: text.to_string() }
    }

    pub fn error(raw: impl Into<String>) -> Expr {
        Expr::Error { raw: raw.into() }
    }

    pub fn text(text: impl Into<String>) -> Expr {
        Expr::TextFragment { text: text.into() }
    }

    pub fn add(l: Expr, r: Expr) -> Expr {
        Expr::Add {
            left: Box::new(l),
            right: Box::new(r),
        }
    }

    pub fn sub(l: Expr, r: Expr) -> Expr {
        Expr::Sub {
            left: Box::new(l),
            right: Box::new(r),
        }
    }

    pub fn neg(a: Expr) -> Expr {
        Expr::Neg { arg: Box::new(a) }
    }

    pub fn times(l: Expr, r: Expr) -> Expr {
        Expr::Times {
            left: Box::new(l),
            right: Box::new(r),
            explicit: false,
        }
    }

    pub fn times_explicit(l: Expr, r: Expr) -> Expr {
        Expr::Times {
            left: Box::new(l),
            right: Box::new(r),
            explicit: true,
        }
    }

    pub fn apply(head: Expr, args: Vec<Expr>) -> Expr {
        Expr::Apply {
            head: Box::new(head),
            args,
        }
    }

    pub fn frac(n: Expr, d: Expr) -> Expr {
        Expr::Frac {
            numerator: Box::new(n),
            denominator: Box::new(d),
        }
    }

    pub fn power(b: Expr, e: Expr) -> Expr {
        Expr::Power {
            base: Box::new(b),
            exponent: Box::new(e),
        }
    }

    pub fn subscript(b: Expr, i: Expr) -> Expr {
        Expr::Subscript {
            base: Box::new(b),
            index: Box::new(i),
        }
    }

    pub fn sqrt(a: Expr) -> Expr {
        Expr::Sqrt { arg: Box::new(a) }
    }

    pub fn paren(inner: Expr) -> Expr {
        Expr::Bracketed {
            style: BracketStyle::Paren,
            inner: Box::new(inner),
        }
    }

    pub fn relation(first: Expr, rel: Relator, second: Expr) -> Expr {
        Expr::Relation {
            first: Box::new(first),
            rest: vec![(rel, second)],
        }
    }

    pub fn is_error(&self) -> bool {
        matches!(self, Expr::Error { .. })
    }

    /// Calls `f` on this node and every descendant, parents first.
    pub fn walk(&self, f: &mut impl FnMut(&Expr)) {
        f(self);
        for child in self.children() {
            child.walk(f);
        }
    }

    pub fn children(&self) -> Vec<&Expr> {
        match self {
            Expr::Integer { .. }
            | Expr::Decimal { .. }
            | Expr::Ident { .. }
            | Expr::SymbolConst { .. }
            | Expr::Greek { .. }
            | Expr::BlackboardSet { .. }
            | Expr::TextFragment { .. }
            | Expr::Error { .. }
            | Expr::Slot { .. } => vec![],
            Expr::Add { left, right }
            | Expr::Sub { left, right }
            | Expr::Times { left, right, .. }
            | Expr::Logic { left, right, .. } => vec![left, right],
            Expr::Frac { numerator, denominator } => vec![numerator, denominator],
            Expr::Power { base, exponent } => vec![base, exponent],
            Expr::Subscript { base, index } => vec![base, index],
            Expr::Root { index, arg } => vec![index, arg],
            Expr::Neg { arg } | Expr::Sqrt { arg } => vec![arg],
            Expr::Bracketed { inner, .. } => vec![inner],
            Expr::Apply { head, args } => {
                let mut v: Vec<&Expr> = vec![head];
                v.extend(args);
                v
            }
            Expr::BigOp {
                binder,
                lower,
                upper,
                body,
                ..
            } => {
                let mut v: Vec<&Expr> = Vec::new();
                v.extend(binder.as_deref());
                v.extend(lower.as_deref());
                v.extend(upper.as_deref());
                v.push(body);
                v
            }
            Expr::Matrix { rows, .. } => rows.iter().flatten().collect(),
            Expr::Relation { first, rest } => {
                let mut v: Vec<&Expr> = vec![first];
                v.extend(rest.iter().map(|(_, e)| e));
                v
            }
            Expr::Tuple { items } => items.iter().collect(),
        }
    }

    pub fn contains_error(&self) -> bool {
        let mut found = false;
        self.walk(&mut |e| found |= e.is_error());
        found
    }

    /// Identifier names appearing anywhere except as an application head.
    pub fn free_identifiers(&self) -> Vec<String> {
        fn go(e: &Expr, out: &mut Vec<String>) {
            match e {
                Expr::Ident { name } => {
                    if !out.contains(name) {
                        out.push(name.clone());
                    }
                }
                Expr::Apply { args, .. } => args.iter().for_each(|a| go(a, out)),
                Expr::BigOp {
                    binder,
                    lower,
                    upper,
                    body,
                    ..
                } => {
                    lower.iter().for_each(|a| go(a, out));
                    upper.iter().for_each(|a| go(a, out));
                    let mut inner = Vec::new();
                    go(body, &mut inner);
                    let bound = match binder.as_deref() {
                        Some(Expr::Ident { name }) => Some(name.as_str()),
                        _ => None,
                    };
                    for n in inner {
                        if Some(n.as_str()) != bound && !out.contains(&n) {
                            out.push(n);
                        }
                    }
                }
                other => other.children().into_iter().for_each(|c| go(c, out)),
            }
        }
        let mut out = Vec::new();
        go(self, &mut out);
        out
    }
}
