use examdown::mathexpr::{parse_math, Dialect, SymbolTable};
use examdown::mathrender::{render_latex, render_spacemath, RenderOptions};
use examdown::testing::ExprGen;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn spacemath_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for i in 0..3000 {
        let e = ExprGen::new(&mut rng, 6).expr();
        let r = render_spacemath(&e);
        assert!(!r.lossy, "case {i}: {}", r.text);
        let back = parse_math(&r.text, SymbolTable::builtin());
        assert_eq!(back.dialect, Dialect::SpaceMath, "case {i}: {}", r.text);
        assert_eq!(back.expr, e, "case {i}: {}", r.text);
    }
}

#[test]
fn latex_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for i in 0..3000 {
        let e = ExprGen::new(&mut rng, 6).expr();
        let r = render_latex(&e, &RenderOptions::default());
        let back = parse_math(&r.text, SymbolTable::builtin());
        assert_eq!(back.expr, e, "case {i}: {}", r.text);
    }
}

#[test]
fn rendering_is_deterministic() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..500 {
        let e = ExprGen::new(&mut rng, 6).expr();
        let opts = RenderOptions::default();
        assert_eq!(render_latex(&e, &opts), render_latex(&e, &opts));
        assert_eq!(render_spacemath(&e), render_spacemath(&e.clone()));
    }
}
