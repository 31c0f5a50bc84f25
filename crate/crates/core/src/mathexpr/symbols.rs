//! The symbol-name table: which words the tokenizer recognises and what
//! role each plays in the grammar.
//!
//! File format, one mapping per line: `name<TAB>category<TAB>render-hint`.
//! Blank lines and lines starting with `#` are ignored. The render hint is
//! the LaTeX spelling; the LaTeX front end uses it to map commands back to
//! names.

use std::collections::HashMap;
use std::path::Path;
use std::str::FromStr;
use std::sync::OnceLock;

use thiserror::Error;

const BUILTIN: &str = include_str!("../../data/symbols.tsv");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Category {
    Greek,
    Const,
    Set,
    BigOp,
    /// Applies to the following operand: `sin x`, `sin(x)`, `falling(7,3)`.
    Func,
    /// Named operator without implicit argument, e.g. `lim`.
    Op,
    Sqrt,
    Root,
    Relation,
    Logic,
    Times,
}

impl FromStr for Category {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        Ok(match s {
            "greek" => Category::Greek,
            "const" => Category::Const,
            "set" => Category::Set,
            "bigop" => Category::BigOp,
            "func" => Category::Func,
            "op" => Category::Op,
            "sqrt" => Category::Sqrt,
            "root" => Category::Root,
            "relation" => Category::Relation,
            "logic" => Category::Logic,
            "times" => Category::Times,
            _ => return Err(()),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolEntry {
    pub name: String,
    pub category: Category,
    pub hint: String,
}

#[derive(Debug, Error)]
pub enum SymbolTableError {
    #[error("line {line}: expected `name<TAB>category<TAB>render-hint`")]
    Shape { line: usize },
    #[error("line {line}: unknown category `{category}`")]
    Category { line: usize, category: String },
    #[error("line {line}: `{name}` is not a valid symbol name")]
    Name { line: usize, name: String },
    #[error("line {line}: duplicate symbol name `{name}`")]
    Duplicate { line: usize, name: String },
    #[error("cannot read symbol table: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone)]
pub struct SymbolTable {
    entries: Vec<SymbolEntry>,
    by_name: HashMap<String, usize>,
    by_hint: HashMap<String, usize>,
    longest: usize,
}

impl SymbolTable {
    /// The table shipped with the crate.
    pub fn builtin() -> &'static SymbolTable {
        static TABLE: OnceLock<SymbolTable> = OnceLock::new();
        TABLE.get_or_init(|| BUILTIN.parse().expect("shipped symbol table is valid"))
    }

    pub fn builtin_source() -> &'static str {
        BUILTIN
    }

    pub fn load(path: impl AsRef<Path>) -> Result<SymbolTable, SymbolTableError> {
        std::fs::read_to_string(path)?.parse()
    }

    pub fn get(&self, name: &str) -> Option<&SymbolEntry> {
        self.by_name.get(name).map(|&i| &self.entries[i])
    }

    /// Entry whose LaTeX hint is exactly `hint` (e.g. `\alpha`).
    pub fn by_hint(&self, hint: &str) -> Option<&SymbolEntry> {
        self.by_hint.get(hint).map(|&i| &self.entries[i])
    }

    pub fn entries(&self) -> &[SymbolEntry] {
        &self.entries
    }

    /// Longest table name that is a prefix of `text`.
    pub fn longest_match(&self, text: &str) -> Option<&SymbolEntry> {
        let mut end = self.longest.min(text.len());
        while end > 0 {
            if text.is_char_boundary(end) {
                if let Some(e) = self.get(&text[..end]) {
                    return Some(e);
                }
            }
            end -= 1;
        }
        None
    }
}

impl FromStr for SymbolTable {
    type Err = SymbolTableError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let mut table = SymbolTable {
            entries: Vec::new(),
            by_name: HashMap::new(),
            by_hint: HashMap::new(),
            longest: 0,
        };
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            if raw.trim().is_empty() || raw.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = raw.split('\t').collect();
            let [name, category, hint] = fields[..] else {
                return Err(SymbolTableError::Shape { line });
            };
            if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphabetic()) {
                return Err(SymbolTableError::Name {
                    line,
                    name: name.to_string(),
                });
            }
            let category = category.parse().map_err(|()| SymbolTableError::Category {
                line,
                category: category.to_string(),
            })?;
            if table.by_name.contains_key(name) {
                return Err(SymbolTableError::Duplicate {
                    line,
                    name: name.to_string(),
                });
            }
            let idx = table.entries.len();
            table.by_name.insert(name.to_string(), idx);
            table.by_hint.entry(hint.to_string()).or_insert(idx);
            table.longest = table.longest.max(name.len());
            table.entries.push(SymbolEntry {
                name: name.to_string(),
                category,
                hint: hint.to_string(),
            });
        }
        Ok(table)
    }
}
