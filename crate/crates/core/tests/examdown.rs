use std::time::{Duration, Instant};

use examdown::calcengine::Calculator;
use examdown::diagnostic::Code;
use examdown::examdown::{
    extract_answers, parse_document, render_document_html, render_document_latex, BlockKind, Document, Inline,
};
use examdown::testing::fuzz_document;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn xhtml(html: &str) -> roxmltree::Document<'_> {
    let opts = roxmltree::ParsingOptions {
        allow_dtd: true,
        ..Default::default()
    };
    roxmltree::Document::parse_with_options(html, opts).unwrap_or_else(|e| panic!("{e}\n{html}"))
}

fn body_text(html: &str) -> String {
    let doc = xhtml(html);
    let body = doc.descendants().find(|n| n.has_tag_name("body")).unwrap();
    body.descendants()
        .filter(|n| n.is_text())
        .filter_map(|n| n.text())
        .collect()
}

fn assert_covers(doc: &Document) {
    let mut at = 0;
    for b in &doc.blocks {
        assert_eq!(b.span.start, at, "gap or overlap before {:?}", b.span);
        assert!(b.span.end > b.span.start);
        at = b.span.end;
    }
    assert_eq!(at, doc.source.len());
}

fn all_inlines(doc: &Document) -> Vec<&Inline> {
    fn walk<'a>(xs: &'a [Inline], out: &mut Vec<&'a Inline>) {
        for x in xs {
            out.push(x);
            if let Inline::Emphasis { children } | Inline::Strong { children } = x {
                walk(children, out);
            }
        }
    }
    let mut out = Vec::new();
    for b in &doc.blocks {
        match &b.kind {
            BlockKind::Heading { inlines, .. } | BlockKind::Paragraph { inlines } => walk(inlines, &mut out),
            BlockKind::ListItemGroup { items, .. } => items.iter().for_each(|i| walk(i, &mut out)),
            _ => {}
        }
    }
    out
}

#[test]
fn fuzzed_documents_render_to_well_formed_html() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let calc = Calculator {
        step_budget: 20_000,
        ..Calculator::default()
    };
    for i in 0..10_000 {
        let src = fuzz_document(&mut rng);
        let doc = parse_document(&src);
        assert_covers(&doc);
        assert!(doc.diagnostics.iter().all(|d| d.code != Code::Internal), "{src:?}");
        for d in &doc.diagnostics {
            assert!(d.span.end <= src.len() && src.is_char_boundary(d.span.start) && src.is_char_boundary(d.span.end));
        }
        let with_calc = if i % 2 == 0 { Some(&calc) } else { None };
        let r = render_document_html(&doc, with_calc);
        xhtml(&r.html);
        extract_answers(&doc).to_json();
        if i % 10 == 0 {
            render_document_latex(&doc, with_calc);
        }
    }
}

#[test]
fn cas_paragraph_with_and_without_calculator() {
    let doc = parse_document("We calculate \\(6\\times 3={@6*3@}\\).");
    let on = body_text(&render_document_html(&doc, Some(&Calculator::default())).html);
    assert!(on.contains("6×3=18"), "{on}");
    let off = render_document_html(&doc, None).html;
    assert!(body_text(&off).contains("{@6*3@}"));
    assert!(off.contains("class=\"badge badge-info\""));
}

#[test]
fn empty_document_has_empty_body() {
    let doc = parse_document("");
    assert!(doc.blocks.is_empty());
    let html = render_document_html(&doc, None).html;
    let x = xhtml(&html);
    let body = x.descendants().find(|n| n.has_tag_name("body")).unwrap();
    assert!(body
        .children()
        .all(|n| n.is_text() && n.text().unwrap().trim().is_empty()));
    assert_eq!(extract_answers(&doc).to_json(), "[]");
}

#[test]
fn calculator_free_rendering_evaluates_nothing() {
    // Either would run far past any time budget if evaluated.
    let src = "{@ 3^(10^18) @} and $sum_(k=1)^(10^15) k = {@ sum_(k=1)^(10^15) k @}$\n";
    let doc = parse_document(src);
    let start = Instant::now();
    for _ in 0..20 {
        let r = render_document_html(&doc, None);
        assert!(r.diagnostics.is_empty(), "{:?}", r.diagnostics);
        assert!(body_text(&r.html).contains("{@ 3^(10^18) @}"));
        render_document_latex(&doc, None);
    }
    assert!(start.elapsed() < Duration::from_secs(1));
}

#[test]
fn rendering_is_byte_deterministic() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let calc = Calculator::default();
    for _ in 0..200 {
        let src = fuzz_document(&mut rng);
        let a = render_document_html(&parse_document(&src), Some(&calc));
        let b = render_document_html(&parse_document(&src), Some(&calc));
        assert_eq!(a, b);
    }
}

#[test]
fn answer_manifest_fields() {
    let doc = parse_document("answer: x=1 or x=9\n\ntext\n\nanswer[q2]: 18\n");
    let json: serde_json::Value = serde_json::from_str(&extract_answers(&doc).to_json()).unwrap();
    assert_eq!(
        json,
        serde_json::json!([
            {"index": 1, "label": null, "spacemath": "x=1 or x=9", "latex": "x = 1 \\text{ or } x = 9", "line": 1},
            {"index": 2, "label": "q2", "spacemath": "18", "latex": "18", "line": 5},
        ])
    );
}

const MATHY: &[&str] = &["$x^2$", "\\(a\\)", "{@6*3@}", "$$y$$", "sum_(i=1)^n", "\\[z\\]", "*a*"];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn code_spans_are_opaque(
        before in "[a-z ]{0,10}",
        inner in prop::collection::vec(prop::sample::select(MATHY), 1..4),
        after in "[a-z ]{0,10}",
    ) {
        let inner = inner.concat();
        let src = format!("{before}`{inner}`{after}");
        let doc = parse_document(&src);
        let inlines = all_inlines(&doc);
        let codes: Vec<&str> = inlines.iter().filter_map(|i| match i {
            Inline::CodeSpan { text } => Some(text.as_str()),
            _ => None,
        }).collect();
        prop_assert_eq!(codes, vec![inner.as_str()]);
        let parsed = inlines.iter().any(|i| matches!(i,
            Inline::InlineMath { .. } | Inline::CalcPlaceholder { .. } | Inline::PlotPlaceholder { .. }));
        prop_assert!(!parsed);
    }

    #[test]
    fn manifest_keeps_document_order(labels in prop::collection::vec(prop::option::of("[a-z][a-z0-9]{0,3}"), 0..12)) {
        let mut src = String::new();
        for (i, l) in labels.iter().enumerate() {
            match l {
                Some(l) => src.push_str(&format!("answer[{l}]: {i}\n\nfiller {i}\n\n")),
                None => src.push_str(&format!("answer: {i}\n\nfiller {i}\n\n")),
            }
        }
        let m = extract_answers(&parse_document(&src));
        prop_assert_eq!(m.len(), labels.len());
        for (k, e) in m.entries.iter().enumerate() {
            prop_assert_eq!(e.index, k + 1);
            prop_assert_eq!(&e.spacemath, &k.to_string());
            prop_assert_eq!(&e.label, &labels[k]);
            prop_assert_eq!(e.line, 4 * k + 1);
        }
    }

    #[test]
    fn blocks_cover_the_source(seed in any::<u64>()) {
        let src = fuzz_document(&mut ChaCha8Rng::seed_from_u64(seed));
        assert_covers(&parse_document(&src));
    }
}
