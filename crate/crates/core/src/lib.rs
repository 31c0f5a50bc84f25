//! Exam answers written as Markdown with Space Math or LaTeX formulas:
//! parsing, rendering, an exact calculator and document handling.

pub mod calcengine;
pub mod diagnostic;
pub mod examdown;
pub mod mathexpr;
pub mod mathrender;

#[cfg(feature = "test-support")]
pub mod testing;

pub use diagnostic::{Code, Diagnostic, Severity, Span};
