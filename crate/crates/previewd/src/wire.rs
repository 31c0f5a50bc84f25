use std::sync::Arc;
use std::time::Instant;

use examdown::calcengine::Calculator;
use examdown::diagnostic::{column_of, Diagnostic, Severity};
use examdown::examdown::{extract_answers, parse_document_with, render_document_html, AnswerManifest};
use examdown::mathexpr::SymbolTable;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Want {
    Html,
    Diagnostics,
    Answers,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RenderRequest {
    pub source: String,
    #[serde(default = "default_calc")]
    pub calc_enabled: bool,
    #[serde(default = "default_want")]
    pub want: Vec<Want>,
}

fn default_calc() -> bool {
    true
}

fn default_want() -> Vec<Want> {
    vec![Want::Html, Want::Diagnostics]
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WireDiagnostic {
    pub line: usize,
    pub col: usize,
    pub severity: Severity,
    pub code: String,
    pub message: String,
}

impl WireDiagnostic {
    pub fn new(d: &Diagnostic, source: &str) -> Self {
        WireDiagnostic {
            line: d.span.line,
            col: column_of(source, d.span.start),
            severity: d.severity,
            code: d.code.as_str().to_string(),
            message: d.message.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RenderResponse {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub html: Option<String>,
    pub diagnostics: Vec<WireDiagnostic>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub answers: Option<AnswerManifest>,
    pub elapsed_ms: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Health {
    pub status: &'static str,
    pub version: &'static str,
}

impl Health {
    pub fn ok() -> Self {
        Health {
            status: "ok",
            version: env!("CARGO_PKG_VERSION"),
        }
    }
}

/// Read-only settings shared by every request.
#[derive(Debug, Clone)]
pub struct ServiceConfig {
    /// Seed for the calculator's equivalence checks.
    pub seed: u64,
    /// When false the calculator stays off whatever a request asks for.
    pub calc_allowed: bool,
    pub symbols: Arc<SymbolTable>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            seed: 0,
            calc_allowed: true,
            symbols: Arc::new(SymbolTable::builtin().clone()),
        }
    }
}

/// Computes the response from the request alone.
///
/// Evaluation diagnostics only arise while rendering, so they are included
/// whenever `html` or `diagnostics` is wanted; an answers-only request
/// reports parse diagnostics.
pub fn handle_render(req: &RenderRequest, config: &ServiceConfig) -> RenderResponse {
    let start = Instant::now();
    let doc = parse_document_with(&req.source, &config.symbols);
    let calc = (req.calc_enabled && config.calc_allowed).then(|| Calculator::with_seed(config.seed));

    let wants = |w| req.want.contains(&w);
    let (html, diags) = if wants(Want::Html) || wants(Want::Diagnostics) {
        let r = render_document_html(&doc, calc.as_ref());
        (wants(Want::Html).then_some(r.html), r.diagnostics)
    } else {
        (None, doc.diagnostics.clone())
    };
    let answers = wants(Want::Answers).then(|| extract_answers(&doc));
    let diagnostics = diags.iter().map(|d| WireDiagnostic::new(d, &req.source)).collect();

    let elapsed = start.elapsed().as_secs_f64() * 1000.0;
    RenderResponse {
        html,
        diagnostics,
        answers,
        elapsed_ms: (elapsed * 1000.0).round() / 1000.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn req(source: &str, want: &[Want]) -> RenderRequest {
        RenderRequest {
            source: source.into(),
            calc_enabled: true,
            want: want.to_vec(),
        }
    }

    #[test]
    fn defaults() {
        let r: RenderRequest = serde_json::from_str(r#"{"source":"x"}"#).unwrap();
        assert!(r.calc_enabled);
        assert_eq!(r.want, vec![Want::Html, Want::Diagnostics]);
    }

    #[test]
    fn only_wanted_fields_appear() {
        let cfg = ServiceConfig::default();
        let r = handle_render(&req("answer: x=1 or x=9", &[Want::Answers]), &cfg);
        let v = serde_json::to_value(&r).unwrap();
        assert!(v.get("html").is_none());
        assert_eq!(v["diagnostics"], serde_json::json!([]));
        assert_eq!(v["answers"].as_array().unwrap().len(), 1);
    }

    #[test]
    fn simple_equation() {
        let r = handle_render(
            &req("$x^2=4$", &[Want::Html, Want::Diagnostics]),
            &ServiceConfig::default(),
        );
        assert!(r
            .html
            .unwrap()
            .contains("<msup><mi>x</mi><mrow><mn>2</mn></mrow></msup>"));
        assert!(r.diagnostics.is_empty());
    }

    #[test]
    fn server_can_forbid_the_calculator() {
        let cfg = ServiceConfig {
            calc_allowed: false,
            ..ServiceConfig::default()
        };
        let r = handle_render(&req("{@6*3@}", &[Want::Html]), &cfg);
        assert!(r.html.unwrap().contains("{@6*3@}"));
    }

    #[test]
    fn diagnostics_carry_columns_in_characters() {
        let r = handle_render(&req("é $(a+b$", &[Want::Diagnostics]), &ServiceConfig::default());
        let d = &r.diagnostics[0];
        assert_eq!((d.line, d.code.as_str()), (1, "unclosed-bracket"));
        assert_eq!(d.col, 4);
    }
}
