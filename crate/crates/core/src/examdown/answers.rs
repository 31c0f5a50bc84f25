use serde::Serialize;

use super::{BlockKind, Document};
use crate::diagnostic::Span;
use crate::mathrender::{render_latex, render_spacemath, RenderOptions, Target};

/// One `answer:` line. Serializes as
/// `{index, label, spacemath, latex, line}`, plus `malformed: true` for
/// answers that could not be read as a formula.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnswerEntry {
    /// 1-based, in document order.
    pub index: usize,
    pub label: Option<String>,
    pub spacemath: String,
    pub latex: String,
    #[serde(skip)]
    pub span: Span,
    pub line: usize,
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub malformed: bool,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
#[serde(transparent)]
pub struct AnswerManifest {
    pub entries: Vec<AnswerEntry>,
}

impl AnswerManifest {
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    /// Pretty-printed JSON array.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes")
    }
}

pub fn extract_answers(doc: &Document) -> AnswerManifest {
    let entries = doc
        .blocks
        .iter()
        .filter_map(|b| match &b.kind {
            BlockKind::AnswerLine { label, math } => Some((b.span, label, math)),
            _ => None,
        })
        .enumerate()
        .map(|(i, (span, label, math))| AnswerEntry {
            index: i + 1,
            label: label.clone(),
            spacemath: render_spacemath(&math.expr).text,
            latex: render_latex(&math.expr, &RenderOptions::inline(Target::Latex)).text,
            span,
            line: span.line,
            malformed: math.expr.is_error(),
        })
        .collect();
    AnswerManifest { entries }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examdown::parse_document;

    #[test]
    fn manifest_entries() {
        let doc = parse_document("Intro\nanswer: x=1 or x=9\n\nanswer[q2]: 18\nanswer: )\n");
        let m = extract_answers(&doc);
        assert_eq!(m.len(), 3);
        assert_eq!(m.entries[0].latex, "x = 1 \\text{ or } x = 9");
        assert_eq!(m.entries[0].spacemath, "x=1 or x=9");
        assert_eq!(m.entries[0].line, 2);
        assert_eq!(m.entries[1].label.as_deref(), Some("q2"));
        assert_eq!(m.entries[1].spacemath, "18");
        assert!(m.entries[2].malformed);
        let json = m.to_json();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        let first = v[0].as_object().unwrap();
        let keys: Vec<&str> = first.keys().map(String::as_str).collect();
        assert_eq!(keys.len(), 5);
        for k in ["index", "label", "spacemath", "latex", "line"] {
            assert!(first.contains_key(k), "{k}");
        }
        assert_eq!(v[2]["malformed"], serde_json::Value::Bool(true));
    }

    #[test]
    fn empty_manifest() {
        let m = extract_answers(&parse_document("no answers here"));
        assert!(m.is_empty());
        assert_eq!(m.to_json(), "[]");
    }
}
