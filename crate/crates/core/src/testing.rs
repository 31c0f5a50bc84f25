//! Random expression trees and fuzzed documents for property tests.
//!
//! Trees come out in the shape the parser produces: wherever the grammar
//! would need brackets to express a child, the child is wrapped in a
//! `Bracketed` node, exactly as a student would have typed it. Error and
//! slot nodes are never generated.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::mathexpr::{BigOpKind, BracketStyle, Expr, LogicOp, NumberSet, Relator};

const LETTERS: &[&str] = &["a", "b", "c", "f", "n", "t", "x", "y", "z", "k"];
const HEADS: &[&str] = &["f", "g", "h", "sin", "cos", "ln", "falling"];
const GREEK: &[&str] = &["alpha", "beta", "theta", "Sigma", "omega"];
const CONSTS: &[&str] = &["pi", "e", "oo"];
const WORDS: &[&str] = &["if", "otherwise", "for all n", "hence"];

/// Binding level of a node, loosest first; the parser's levels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Level {
    List,
    Logic,
    Relation,
    Additive,
    Term,
    Unary,
    Script,
    Atom,
}

fn level(e: &Expr) -> Level {
    match e {
        Expr::Tuple { items } if !items.is_empty() => Level::List,
        Expr::Logic { .. } => Level::Logic,
        Expr::Relation { .. } => Level::Relation,
        Expr::Add { .. } | Expr::Sub { .. } => Level::Additive,
        Expr::Times { .. } | Expr::Frac { .. } => Level::Term,
        Expr::Neg { .. } | Expr::BigOp { .. } => Level::Unary,
        Expr::Power { .. } | Expr::Subscript { .. } => Level::Script,
        _ => Level::Atom,
    }
}

/// Ends in a big operator whose body would run on.
fn runs_on(e: &Expr) -> bool {
    match e {
        Expr::BigOp { .. } => true,
        Expr::Neg { arg } => runs_on(arg),
        Expr::Times { right, .. } => runs_on(right),
        Expr::Frac { denominator, .. } => runs_on(denominator),
        _ => false,
    }
}

/// Where a child sits, i.e. what it may be without brackets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Slot {
    Top,
    Item,
    LogicRight,
    Operand,
    AddRight,
    TermLeft,
    TermRight { explicit: bool },
    Unary,
    ScriptBase,
    Exponent,
    Index,
    Anything,
}

fn fits(slot: Slot, e: &Expr) -> bool {
    let l = level(e);
    match slot {
        Slot::Top | Slot::Anything => true,
        Slot::Item => l >= Level::Logic,
        Slot::LogicRight => l >= Level::Relation,
        Slot::Operand => l >= Level::Additive,
        Slot::AddRight => l >= Level::Term,
        Slot::TermLeft => l >= Level::Term && !runs_on(e),
        Slot::TermRight { explicit } => match e {
            Expr::Neg { .. } => explicit,
            _ => l >= Level::Unary,
        },
        Slot::Unary => l >= Level::Unary,
        Slot::ScriptBase => matches!(e, Expr::Subscript { .. }) || l == Level::Atom,
        Slot::Exponent => match e {
            Expr::Neg { arg } => fits(Slot::Exponent, arg),
            _ => l >= Level::Script,
        },
        Slot::Index => match e {
            Expr::Neg { arg } => fits(Slot::Index, arg),
            _ => l == Level::Atom,
        },
    }
}

/// Generator for random, parser-shaped expression trees.
pub struct ExprGen<'r, R: Rng> {
    rng: &'r mut R,
    pub max_depth: usize,
}

impl<'r, R: Rng> ExprGen<'r, R> {
    pub fn new(rng: &'r mut R, max_depth: usize) -> Self {
        ExprGen { rng, max_depth }
    }

    /// A whole expression, as it would appear between math delimiters.
    pub fn expr(&mut self) -> Expr {
        self.at(Slot::Top, 0)
    }

    fn pick<T: Copy>(&mut self, from: &[T]) -> T {
        *from.choose(self.rng).expect("non-empty choice")
    }

    fn at(&mut self, slot: Slot, depth: usize) -> Expr {
        let e = self.node(slot, depth);
        if fits(slot, &e) {
            e
        } else {
            Expr::paren(e)
        }
    }

    fn leaf(&mut self) -> Expr {
        match self.rng.gen_range(0..10) {
            0..=3 => Expr::ident(self.pick(LETTERS)),
            4..=5 => Expr::int(self.rng.gen_range(0..200)),
            6 => Expr::Decimal {
                text: format!("{}.{}", self.rng.gen_range(0..100), self.rng.gen_range(1..100)),
            },
            7 => Expr::Greek {
                name: self.pick(GREEK).to_string(),
            },
            8 => Expr::constant(self.pick(CONSTS)),
            _ => Expr::BlackboardSet {
                set: self.pick(&[NumberSet::N, NumberSet::Z, NumberSet::R]),
            },
        }
    }

    fn node(&mut self, slot: Slot, depth: usize) -> Expr {
        if depth >= self.max_depth || self.rng.gen_ratio(1, 4) {
            return self.leaf();
        }
        let d = depth + 1;
        match self.rng.gen_range(0..22) {
            0 if slot == Slot::Top => {
                let n = self.rng.gen_range(2..4);
                Expr::Tuple {
                    items: (0..n).map(|_| self.at(Slot::Item, d)).collect(),
                }
            }
            0 | 1 => Expr::Logic {
                op: self.pick(&[LogicOp::Or, LogicOp::And]),
                left: Box::new(self.at(Slot::Item, d)),
                right: Box::new(self.at(Slot::LogicRight, d)),
            },
            2 | 3 => {
                let first = self.at(Slot::Operand, d);
                let n = self.rng.gen_range(1..3);
                let rest = (0..n)
                    .map(|_| (self.pick(&Relator::ALL), self.at(Slot::Operand, d)))
                    .collect();
                Expr::Relation {
                    first: Box::new(first),
                    rest,
                }
            }
            4 => Expr::add(self.at(Slot::Operand, d), self.at(Slot::AddRight, d)),
            5 => Expr::sub(self.at(Slot::Operand, d), self.at(Slot::AddRight, d)),
            6 | 7 => {
                let explicit = self.rng.gen_ratio(1, 3);
                Expr::Times {
                    left: Box::new(self.at(Slot::TermLeft, d)),
                    right: Box::new(self.at(Slot::TermRight { explicit }, d)),
                    explicit,
                }
            }
            8 => Expr::frac(self.at(Slot::TermLeft, d), self.at(Slot::Unary, d)),
            9 => Expr::neg(self.at(Slot::Unary, d)),
            10 => Expr::power(self.at(Slot::ScriptBase, d), self.at(Slot::Exponent, d)),
            11 => Expr::subscript(self.at(Slot::ScriptBase, d), self.at(Slot::Index, d)),
            12 | 13 => {
                let head = Expr::ident(self.pick(HEADS));
                let n = self.rng.gen_range(0..3);
                let args = (0..n).map(|_| self.at(Slot::Item, d)).collect();
                Expr::apply(head, args)
            }
            14 => Expr::sqrt(self.at(Slot::Anything, d)),
            15 => Expr::Root {
                index: Box::new(self.at(Slot::Item, d)),
                arg: Box::new(self.at(Slot::Item, d)),
            },
            16 => self.bigop(d),
            17 => self.matrix(d),
            18 | 19 => self.bracketed(d),
            20 => Expr::text(self.pick(WORDS)),
            _ => self.leaf(),
        }
    }

    fn bigop(&mut self, d: usize) -> Expr {
        let op = self.pick(&[BigOpKind::Sum, BigOpKind::Prod, BigOpKind::Int]);
        let (binder, lower) = match self.rng.gen_range(0..3) {
            0 => (None, None),
            1 => (
                Some(Box::new(Expr::ident(self.pick(&["i", "k", "j"])))),
                Some(Box::new(self.at(Slot::Operand, d))),
            ),
            _ => {
                let l = self.at(Slot::Index, d);
                (None, Some(Box::new(l)))
            }
        };
        let upper = if self.rng.gen_bool(0.6) {
            Some(Box::new(self.at(Slot::Exponent, d)))
        } else {
            None
        };
        Expr::BigOp {
            op,
            binder,
            lower,
            upper,
            body: Box::new(self.at(Slot::AddRight, d)),
        }
    }

    fn matrix(&mut self, d: usize) -> Expr {
        let rows = self.rng.gen_range(2..4);
        let cols = self.rng.gen_range(1..4);
        let style = self.pick(&[BracketStyle::Paren, BracketStyle::Square]);
        let rows = (0..rows)
            .map(|_| {
                let mut row: Vec<Expr> = (0..cols).map(|_| self.at(Slot::Item, d)).collect();
                defuse(style, &mut row);
                row
            })
            .collect();
        Expr::Matrix { style, rows }
    }

    fn bracketed(&mut self, d: usize) -> Expr {
        let style = self.pick(&[BracketStyle::Paren, BracketStyle::Square, BracketStyle::Brace]);
        let mut inner = match self.rng.gen_range(0..8) {
            0 => Expr::Tuple { items: vec![] },
            1 | 2 => {
                let n = self.rng.gen_range(2..4);
                Expr::Tuple {
                    items: (0..n).map(|_| self.at(Slot::Item, d)).collect(),
                }
            }
            _ => self.at(Slot::Top, d),
        };
        if let Expr::Tuple { items } = &mut inner {
            defuse(style, items);
        }
        Expr::Bracketed {
            style,
            inner: Box::new(inner),
        }
    }
}

/// A bracketed list whose items are all bracketed the same way reads as a
/// matrix; break the pattern at the first item.
fn defuse(style: BracketStyle, items: &mut [Expr]) {
    if items.len() >= 2 && style != BracketStyle::Brace {
        if let Some(Expr::Bracketed { style: s, .. }) = items.first() {
            if *s == style {
                items[0] = Expr::ident("x");
            }
        }
    }
}

/// Fragments that exercise every construct of the document grammar,
/// including the broken forms students actually produce.
const DOC_PIECES: &[&str] = &[
    "# Question 1\n",
    "## Part (b) ###\n",
    "Prove that $sum_(i=1)^n i^3=((n(n+1))/2)^2$ by induction.\n",
    "We calculate \\(6\\times 3={@6*3@}\\).\n",
    "\\[\\frac{a}{b}\\]",
    "$$\n\\left(\\frac{n(n+1)}{2}\\right)^2\n$$\n",
    ":::derivation\nx^2-10x+9=0\n<=> (x-1)(x-9)=0 | factorise\n=> x=1 or x=9\n:::\n",
    ":::derivation\n",
    ":::proof\nsomething\n:::\n",
    "answer: x=1 or x=9\n",
    "answer[q2]: 18\n",
    "answer: )(\n",
    "- item with `code $x$`\n",
    "1. first *emph* and **strong**\n",
    "```python\nprint('$x$')\n```\n",
    "~~~\nunclosed",
    "{@plot(x^2/(1+x^2),[x,-3,3])@}",
    "{@ 1/0 @}",
    "{@ {@ 2 @} @}",
    "{@ 10^10^10",
    "$[[a,b],[c,d]]$",
    "$[[1,2],[3]]$",
    "$(a+b$",
    "$a+b)]$",
    "\\(x^23 \\alpha\\)",
    "costs $5 and $6",
    "|x| * y",
    "\\sqrt[3]{x",
    "\\begin{pmatrix} 1 & 2 \\\\ 3 \\end{pmatrix}",
    "x(t+1) and x (t+1)",
    "α² + β² ≤ γ²",
    "\n\n",
    "\r\n",
    "\t",
    "\\",
    "$",
    "`",
    "*",
    "{@",
    "@}",
];

const NOISE: &[char] = &[
    '$', '\\', '{', '}', '@', '(', ')', '[', ']', '*', '`', '#', ':', '|', '^', '_', '/', '\n', ' ', 'x', '1', '-',
    '=', '<', '>', 'é', '∑', '\u{0}', '\u{202e}', '\u{fffd}',
];

/// A random document: either raw bytes decoded lossily, or a sequence of
/// grammar fragments with random character-level damage.
pub fn fuzz_document<R: Rng>(rng: &mut R) -> String {
    if rng.gen_bool(0.25) {
        let len = rng.gen_range(0..400);
        let bytes: Vec<u8> = (0..len).map(|_| rng.gen()).collect();
        return String::from_utf8_lossy(&bytes).into_owned();
    }
    let mut doc: Vec<char> = Vec::new();
    for _ in 0..rng.gen_range(0..12) {
        doc.extend(DOC_PIECES.choose(rng).unwrap().chars());
    }
    for _ in 0..rng.gen_range(0..8) {
        let at = rng.gen_range(0..=doc.len());
        match rng.gen_range(0..3) {
            0 => doc.insert(at, *NOISE.choose(rng).unwrap()),
            1 if at < doc.len() => {
                doc.remove(at);
            }
            _ if !doc.is_empty() => {
                let from = rng.gen_range(0..doc.len());
                let to = (from + rng.gen_range(1..20)).min(doc.len());
                let chunk: Vec<char> = doc[from..to].to_vec();
                doc.splice(at..at, chunk);
            }
            _ => {}
        }
    }
    doc.into_iter().collect()
}

/// Nesting depth of a tree; leaves have depth 1.
pub fn depth(e: &Expr) -> usize {
    1 + e.children().into_iter().map(depth).max().unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn respects_depth_and_never_emits_errors() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..500 {
            let e = ExprGen::new(&mut rng, 4).expr();
            assert!(!e.contains_error());
            // one bracket layer per level at most
            assert!(depth(&e) <= 2 * 4 + 2, "{e:?}");
        }
    }
}
