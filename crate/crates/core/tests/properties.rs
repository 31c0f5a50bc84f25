use examdown::mathexpr::{normalize_unicode, parse_expression, parse_math, tokenize, Dialect, Expr, SymbolTable};
use examdown::mathrender::{render_presentation, render_spacemath, RenderOptions};
use examdown::testing::ExprGen;
use examdown::Code;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn generated(seed: u64) -> Expr {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ExprGen::new(&mut rng, 5).expr()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn any_text_parses(src in "\\PC{0,80}") {
        let r = parse_math(&src, SymbolTable::builtin());
        for d in &r.diagnostics {
            prop_assert!(d.span.start <= d.span.end && d.span.end <= src.len());
        }
    }

    #[test]
    fn mathy_text_parses(src in "[-+*/^_()\\[\\]{}=<>,a-z0-9 \\\\|!&]{0,60}") {
        let r = parse_math(&src, SymbolTable::builtin());
        prop_assert!(r.diagnostics.iter().all(|d| d.code != Code::Internal));
    }

    #[test]
    fn tokens_cover_normalized_text(src in "\\PC{0,60}") {
        let (norm, _) = normalize_unicode(&src);
        let (tokens, _) = tokenize(&norm.text, SymbolTable::builtin());
        let joined: String = tokens.iter().map(|t| t.lexeme.as_str()).collect();
        prop_assert_eq!(joined, norm.text);
    }

    #[test]
    fn space_decides_application(seed in any::<u64>(), h in "[abcdfghkmnpqrstuvwxyz]") {
        let arg = render_spacemath(&generated(seed)).text;
        let applied = parse_math(&format!("{h}({arg})"), SymbolTable::builtin()).expr;
        prop_assert!(matches!(applied, Expr::Apply { .. }), "{:?}", applied);
        let product = parse_math(&format!("{h} ({arg})"), SymbolTable::builtin()).expr;
        prop_assert!(matches!(product, Expr::Times { explicit: false, .. }), "{:?}", product);
    }

    #[test]
    fn presentation_is_well_formed(seed in any::<u64>()) {
        let e = generated(seed);
        for apply in [false, true] {
            let opts = RenderOptions { show_apply_distinction: apply, ..Default::default() };
            let xml = render_presentation(&e, &opts);
            prop_assert!(roxmltree::Document::parse(&xml).is_ok(), "{}", xml);
        }
    }

    #[test]
    fn presentation_of_broken_input_is_well_formed(src in "\\PC{0,40}") {
        let e = parse_math(&src, SymbolTable::builtin()).expr;
        let xml = render_presentation(&e, &RenderOptions::default());
        prop_assert!(roxmltree::Document::parse(&xml).is_ok(), "{}", xml);
    }

    #[test]
    fn ragged_matrices_are_padded(lens in proptest::collection::vec(1usize..4, 2..5)) {
        let rows: Vec<String> = lens
            .iter()
            .map(|&n| format!("[{}]", vec!["a"; n].join(",")))
            .collect();
        let src = format!("[{}]", rows.join(","));
        let r = parse_math(&src, SymbolTable::builtin());
        let Expr::Matrix { rows, .. } = r.expr else { panic!("{src}") };
        let width = *lens.iter().max().unwrap();
        prop_assert!(rows.iter().all(|row| row.len() == width));
        let ragged = lens.iter().any(|&n| n != width);
        prop_assert_eq!(ragged, r.diagnostics.iter().any(|d| d.code == Code::RaggedMatrix));
    }
}

/// Inputs valid in both notations: no backslashes, no braces, no
/// multi-digit scripts.
const SHARED: &[&str] = &[
    "x",
    "x^2+2x+1",
    "x(t+1)",
    "x (t+1)",
    "a/b/c",
    "-x^2",
    "a^b^c",
    "x_i^2",
    "sum_(i=1)^n i^3=((n(n+1))/2)^2",
    "f(x)=sin(x)/x",
    "sqrt(x+1)",
    "[[a,b],[c,d]]",
    "x=1 or x=9",
    "a<b<=c",
    "x in NN",
    "2 pi r",
    "e^(i pi)+1=0",
    "prod_(k=1)^n k",
    "int_0^1 x dx",
    "(a+b)(a-b)=a^2-b^2",
    "falling(7,3)=7*6*5",
    "alpha+beta",
    "(x,y)",
    "1/(1+x^2)",
    "x_(i+1)=x_i/2",
    "AA n in NN",
];

#[test]
fn dialects_agree_on_shared_inputs() {
    let table = SymbolTable::builtin();
    for src in SHARED {
        let (norm, _) = normalize_unicode(src);
        let (tokens, _) = tokenize(&norm.text, table);
        let (space, d1) = parse_expression(&tokens, Dialect::SpaceMath);
        let (latex, d2) = parse_expression(&tokens, Dialect::Latex);
        assert_eq!(space, latex, "{src}");
        assert!(d1.is_empty() && d2.is_empty(), "{src}: {d1:?} {d2:?}");
    }
}
