//! One line per acceptance criterion: `PASS` or `FAIL`, its id, the time
//! taken and a short account. Exits non-zero if any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use axum::body::{to_bytes, Body};
use axum::http::{header, Request, StatusCode};
use axum::Router;
use examdown::calcengine::{check_equiv, eval_exact, sample_points, Calculator, Env, Rational, Value, Verdict};
use examdown::diagnostic::Diagnostic;
use examdown::examdown::{parse_document, render_document_html};
use examdown::mathexpr::{parse_math, Dialect, Expr, SymbolTable};
use examdown::mathrender::{render_latex, render_presentation, render_spacemath, RenderOptions, Target};
use examdown::testing::{fuzz_document, ExprGen};
use examdown_previewd::{router, ServiceConfig, JSON_CONTENT_TYPE};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value as Json;
use tower::ServiceExt;

type Outcome = Result<String, String>;

struct Criterion {
    id: &'static str,
    budget: Duration,
    check: fn() -> Outcome,
}

fn main() {
    let criteria = [
        Criterion {
            id: "paper-corpus",
            budget: Duration::from_secs(1),
            check: paper_corpus,
        },
        Criterion {
            id: "round-trip",
            budget: Duration::from_secs(60),
            check: round_trip,
        },
        Criterion {
            id: "calculator-exactness",
            budget: Duration::from_secs(10),
            check: calculator_exactness,
        },
        Criterion {
            id: "equivalence-helper",
            budget: Duration::from_secs(10),
            check: equivalence_helper,
        },
        Criterion {
            id: "forgiveness-fuzz",
            budget: Duration::from_secs(300),
            check: forgiveness_fuzz,
        },
        Criterion {
            id: "plot-check",
            budget: Duration::from_secs(10),
            check: plot_check,
        },
        Criterion {
            id: "wire-goldens",
            budget: Duration::from_secs(10),
            check: wire_goldens,
        },
        Criterion {
            id: "primary-only",
            budget: Duration::from_secs(10),
            check: primary_only,
        },
    ];
    // Panics become FAIL lines, not noise.
    std::panic::set_hook(Box::new(|_| {}));

    let mut failed = 0;
    for (n, c) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(c.check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let took = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if took > c.budget => Err(format!("{detail}; over the {:?} budget", c.budget)),
            other => other,
        };
        let (tag, detail) = match &outcome {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("{tag} [{}] {} ({:.2}s): {detail}", n + 1, c.id, took.as_secs_f64());
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn errors(diags: &[Diagnostic]) -> usize {
    diags.iter().filter(|d| d.is_error()).count()
}

fn paper_corpus() -> Outcome {
    let table = SymbolTable::builtin();
    let parse = |src: &str| {
        let p = parse_math(src, table);
        (p.expr, p.dialect, errors(&p.diagnostics))
    };

    let pairs = [
        (
            "sum_(i=1)^n i^3=((n(n+1))/2)^2",
            "\\sum_{i=1}^n i^3=\\left(\\frac{n(n+1)}{2}\\right)^2",
        ),
        ("x^23", "x^{23}"),
    ];
    for (space, latex) in pairs {
        let (a, da, ea) = parse(space);
        let (b, db, eb) = parse(latex);
        ensure(da == Dialect::SpaceMath && db == Dialect::Latex, || {
            format!("dialects of {space} / {latex}")
        })?;
        ensure(ea + eb == 0, || format!("error diagnostics in {space} / {latex}"))?;
        ensure(a == b, || format!("ASTs differ: {space} vs {latex}"))?;
    }

    let (x23, _, _) = parse("x^23");
    ensure(x23 == Expr::power(Expr::ident("x"), Expr::int(23)), || {
        format!("x^23 parsed as {x23:?}")
    })?;

    let (m, _, e) = parse("[[a,b],[c,d]]");
    let shape_ok = matches!(&m, Expr::Matrix { rows, .. } if rows.len() == 2 && rows.iter().all(|r| r.len() == 2));
    ensure(shape_ok && e == 0, || format!("[[a,b],[c,d]] parsed as {m:?}"))?;

    let (apply, _, _) = parse("x(t+1)");
    let (times, _, _) = parse("x (t+1)");
    ensure(matches!(apply, Expr::Apply { .. }), || {
        format!("x(t+1) parsed as {apply:?}")
    })?;
    ensure(matches!(times, Expr::Times { .. }), || {
        format!("x (t+1) parsed as {times:?}")
    })?;

    // every form also renders, alone and inside a document, without errors
    let corpus = [
        pairs[0].0,
        pairs[0].1,
        "x^23",
        "x^{23}",
        "[[a,b],[c,d]]",
        "x(t+1)",
        "x (t+1)",
    ];
    for src in corpus {
        let (e, _, _) = parse(src);
        ensure(!render_spacemath(&e).lossy, || format!("lossy Space Math for {src}"))?;
        render_latex(&e, &RenderOptions::default());
        let xml = render_presentation(&e, &RenderOptions::inline(Target::MathmlHtml));
        roxmltree::Document::parse(&xml).map_err(|err| format!("MathML for {src}: {err}"))?;
        let doc = parse_document(&format!("Consider \\({src}\\).\n"));
        let rendered = render_document_html(&doc, Some(&Calculator::default()));
        ensure(errors(&rendered.diagnostics) == 0, || {
            format!("document errors for {src}")
        })?;
    }
    Ok(format!(
        "{} forms, Space Math and LaTeX ASTs equal, no errors",
        corpus.len()
    ))
}

fn round_trip() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let table = SymbolTable::builtin();
    for i in 0..10_000 {
        let e = ExprGen::new(&mut rng, 6).expr();
        let r = render_spacemath(&e);
        let back = parse_math(&r.text, table).expr;
        ensure(!r.lossy && back == e, || {
            format!("case {i}: `{}` did not round-trip", r.text)
        })?;
    }
    Ok("10000 generated trees of depth <= 6 survive render_spacemath then parse".into())
}

fn exact(src: &str, env: &Env) -> Result<Value, String> {
    let p = parse_math(src, SymbolTable::builtin());
    eval_exact(&p.expr, env).map_err(|e| format!("{src}: {e}"))
}

fn big(q: &BigRational) -> Value {
    Value::Exact(Rational::new(q.numer().clone(), q.denom().clone()).unwrap())
}

fn calculator_exactness() -> Outcome {
    // the worked placeholder, through the document renderer
    let doc = parse_document("We calculate \\(6\\times 3={@6*3@}\\).");
    let html = render_document_html(&doc, Some(&Calculator::default())).html;
    ensure(html.contains("<mn>18</mn>"), || "{@6*3@} did not render 18".into())?;
    ensure(exact("6*3", &Env::new())? == Value::int(18), || "6*3 != 18".into())?;

    // a^n a^m = a^(n+m), with the oracle computed by repeated multiplication
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for case in 0..500 {
        let mut p: i64 = rng.gen_range(-1000..=1000);
        if p == 0 {
            p = 1;
        }
        let a = BigRational::new(BigInt::from(p), BigInt::from(rng.gen_range(1i64..=1000)));
        let (n, m) = (rng.gen_range(0u32..=20), rng.gen_range(0u32..=20));
        let mut oracle = BigRational::one();
        for _ in 0..n + m {
            oracle *= &a;
        }
        let env = Env::new()
            .with("a", big(&a))
            .with("n", Value::int(n.into()))
            .with("m", Value::int(m.into()));
        let lhs = exact("a^n a^m", &env)?;
        let rhs = exact("a^(n+m)", &env)?;
        ensure(lhs == big(&oracle) && rhs == big(&oracle), || {
            format!("power law case {case}: a={a} n={n} m={m}")
        })?;
    }

    // sum_(k=0)^(n-1) k^(m falling) = n^(m+1 falling)/(m+1), oracle term by term
    let falling = |x: i64, m: i64| (0..m).fold(BigInt::one(), |acc, i| acc * BigInt::from(x - i));
    for m in 1..=6 {
        for n in 1..=50 {
            let oracle: BigInt = (0..n).map(|k| falling(k, m)).fold(BigInt::zero(), |a, b| a + b);
            let want = Value::Exact(Rational::from(oracle));
            let lhs = exact(&format!("sum_(k=0)^({}) falling(k,{m})", n - 1), &Env::new())?;
            let rhs = exact(&format!("1/({}) falling({n},{})", m + 1, m + 1), &Env::new())?;
            ensure(lhs == want && rhs == want, || format!("falling identity m={m} n={n}"))?;
        }
    }

    // De Morgan: the first n odd numbers sum to n^2
    for n in 1..=1000i64 {
        let got = exact("sum_(k=1)^n (2k-1)", &Env::new().with("n", Value::int(n)))?;
        ensure(got == Value::int(n * n), || format!("sum of odds n={n}"))?;
    }
    Ok("18; 500 power-law cases; 300 falling-product cases; odd sums to 1000; all exact".into())
}

fn equivalence_helper() -> Outcome {
    let p = |s: &str| parse_math(s, SymbolTable::builtin()).expr;
    let x = vec!["x".to_string()];

    let v = check_equiv(&p("(x-1)*(x-9)"), &p("x^2-10x+9"), &x, 12, 0);
    ensure(v == Verdict::EquivalentProbably, || {
        format!("(x-1)*(x-9) vs x^2-10x+9: {v:?}")
    })?;

    let v = check_equiv(&p("x+1"), &p("x-1"), &x, 12, 0);
    let Verdict::NotEquivalent { witness } = &v else {
        return Err(format!("x+1 vs x-1: {v:?}"));
    };
    // verify the witness without the engine: x+1 - (x-1) must be nonzero at it
    let w = witness.get("x").ok_or("witness binds no x")?;
    let w = match w {
        Value::Exact(r) => BigRational::new(r.numer().clone(), r.denom().clone()),
        other => return Err(format!("inexact witness {other}")),
    };
    let one = BigRational::one();
    ensure((&w + &one) != (&w - &one), || "witness does not separate".into())?;

    for seed in 0..16 {
        let a = check_equiv(&p("x+1"), &p("x-1"), &x, 12, seed);
        let b = check_equiv(&p("x+1"), &p("x-1"), &x, 12, seed);
        let c = check_equiv(&p("(x-1)*(x-9)"), &p("x^2-10x+9"), &x, 12, seed);
        ensure(a == b && c == Verdict::EquivalentProbably, || {
            format!("seed {seed} not reproducible")
        })?;
    }
    Ok(format!(
        "equivalent-probably; not-equivalent with witness x={w}; 16 seeds reproducible"
    ))
}

fn runtime() -> tokio::runtime::Runtime {
    tokio::runtime::Builder::new_current_thread()
        .enable_all()
        .build()
        .unwrap()
}

async fn post(app: &Router, body: String) -> (StatusCode, Option<String>, String) {
    let req = Request::post("/v1/render")
        .header(header::CONTENT_TYPE, "application/json")
        .body(Body::from(body))
        .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let ctype = resp
        .headers()
        .get(header::CONTENT_TYPE)
        .and_then(|v| v.to_str().ok())
        .map(String::from);
    let bytes = to_bytes(resp.into_body(), usize::MAX).await.unwrap();
    (status, ctype, String::from_utf8_lossy(&bytes).into_owned())
}

fn well_formed(resp: &Json) -> Result<(), String> {
    let html = resp["html"].as_str().ok_or("no html")?;
    let opts = roxmltree::ParsingOptions {
        allow_dtd: true,
        ..Default::default()
    };
    roxmltree::Document::parse_with_options(html, opts).map_err(|e| format!("html: {e}"))?;
    let diags = resp["diagnostics"].as_array().ok_or("no diagnostics")?;
    for d in diags {
        let ok = d["line"].as_u64().is_some_and(|l| l >= 1)
            && d["col"].as_u64().is_some_and(|c| c >= 1)
            && ["error", "warning", "info"].contains(&d["severity"].as_str().unwrap_or(""))
            && d["code"].is_string()
            && d["message"].is_string();
        ensure(ok, || format!("diagnostic {d}"))?;
    }
    ensure(resp["answers"].is_array() && resp["elapsed_ms"].is_number(), || {
        "answers/elapsed_ms".into()
    })
}

fn forgiveness_fuzz() -> Outcome {
    let app = router(ServiceConfig::default());
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut diagnostics = 0;
    runtime().block_on(async {
        for i in 0..10_000 {
            let source = fuzz_document(&mut rng);
            let req = serde_json::json!({
                "source": source,
                "calc_enabled": i % 2 == 0,
                "want": ["html", "diagnostics", "answers"],
            });
            let (status, ctype, body) = post(&app, req.to_string()).await;
            ensure(status == StatusCode::OK, || format!("document {i}: status {status}"))?;
            ensure(ctype.as_deref() == Some(JSON_CONTENT_TYPE), || {
                format!("document {i}: content type")
            })?;
            let v: Json = serde_json::from_str(&body).map_err(|e| format!("document {i}: {e}"))?;
            well_formed(&v).map_err(|e| format!("document {i}: {e}"))?;
            diagnostics += v["diagnostics"].as_array().map_or(0, Vec::len);
        }
        Ok::<_, String>(())
    })?;
    Ok(format!(
        "10000 documents, all 200 and well-formed, {diagnostics} diagnostics reported"
    ))
}

fn plot_check() -> Outcome {
    let calc = Calculator::default();
    let f = parse_math("x^2/(1+x^2)", SymbolTable::builtin()).expr;
    let (lo, hi) = (Rational::from(-3), Rational::from(3));
    let points = sample_points(&calc, &f, "x", &lo, &hi).map_err(|e| e.to_string())?;
    let ys: Vec<f64> = points.iter().map(|p| p.1).collect();
    let min = ys.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    ensure((min - 0.0).abs() <= 1e-9 && (max - 0.9).abs() <= 1e-9, || {
        format!("sampled range [{min}, {max}]")
    })?;
    // each sample against direct evaluation
    for &(x, y) in &points {
        let want = x * x / (1.0 + x * x);
        ensure((y - want).abs() <= 1e-12, || format!("f({x}) = {y}, expected {want}"))?;
    }

    let svg = calc.plot_svg(&f, "x", &lo, &hi).map_err(|e| e.to_string())?;
    let doc = roxmltree::Document::parse(&svg).map_err(|e| format!("svg: {e}"))?;
    let root = doc.root_element();
    ensure(root.has_tag_name(("http://www.w3.org/2000/svg", "svg")), || {
        "root is not svg".into()
    })?;
    let attr = |k: &str| root.attribute(k).and_then(|v| v.parse::<f64>().ok());
    ensure(
        attr("data-y-min") == Some(0.0) && attr("data-y-max") == Some(0.9),
        || "svg y range attributes".into(),
    )?;
    let lines = doc.descendants().filter(|n| n.has_tag_name("polyline")).count();
    ensure(lines == 1, || format!("{lines} polylines"))?;
    Ok(format!(
        "{} samples, min {min}, max {max}, SVG well-formed",
        points.len()
    ))
}

fn previewd_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../previewd/tests")
}

fn mask_elapsed(body: &str) -> String {
    let key = "\"elapsed_ms\":";
    let Some(at) = body.rfind(key) else {
        return body.to_string();
    };
    let from = at + key.len();
    let to = from + body[from..].find('}').unwrap_or(body.len() - from);
    format!("{}0{}", &body[..from], &body[to..])
}

fn wire_goldens() -> Outcome {
    let mut fixtures: Vec<PathBuf> = std::fs::read_dir(previewd_dir().join("fixtures"))
        .map_err(|e| e.to_string())?
        .map(|e| e.unwrap().path())
        .collect();
    fixtures.sort();
    ensure(fixtures.len() == 10, || format!("{} fixtures", fixtures.len()))?;
    let app = router(ServiceConfig::default());
    runtime().block_on(async {
        for f in &fixtures {
            let name = f.file_name().unwrap();
            let golden = std::fs::read_to_string(previewd_dir().join("golden").join(name))
                .map_err(|e| format!("{}: {e}", name.to_string_lossy()))?;
            let (status, _, body) = post(&app, std::fs::read_to_string(f).unwrap()).await;
            ensure(status == StatusCode::OK, || {
                format!("{}: {status}", name.to_string_lossy())
            })?;
            ensure(mask_elapsed(&body) + "\n" == golden, || {
                format!("{} differs", name.to_string_lossy())
            })?;
        }
        Ok::<_, String>(())
    })?;
    Ok("10 responses match byte for byte".into())
}

fn primary_only() -> Outcome {
    // This binary links only Rust crates; nothing from the editor is built.
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../..");
    let editor_artifacts = [
        "editor-ui/node_modules",
        "editor-ui/dist",
        "node_modules",
        "package.json",
    ];
    let present: Vec<&str> = editor_artifacts
        .iter()
        .copied()
        .filter(|p| root.join(p).exists())
        .collect();
    ensure(present.is_empty(), || {
        format!("secondary artifacts present: {present:?}")
    })?;
    Ok("suite ran from the Rust workspace alone".into())
}
