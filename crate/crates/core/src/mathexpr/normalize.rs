//! Unicode front door: canonical composition, then mathematical symbols
//! rewritten to their keyboard spellings (`≤` → `<=`, `α` → `alpha`,
//! `n²` → `n^(2)`). Every output byte remembers which source bytes it
//! came from so diagnostics can point back at what the student typed.

use unicode_normalization::char::canonical_combining_class;
use unicode_normalization::{is_nfc, UnicodeNormalization};

use crate::diagnostic::{Code, Diagnostic, Span};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Normalized {
    pub text: String,
    /// Source byte range for each output byte.
    map: Vec<(usize, usize)>,
    source_len: usize,
}

impl Normalized {
    /// Identity normalization (already-ASCII text, synthetic input).
    pub fn identity(text: &str) -> Self {
        let mut map = Vec::with_capacity(text.len());
        for (i, c) in text.char_indices() {
            for _ in 0..c.len_utf8() {
                map.push((i, i + c.len_utf8()));
            }
        }
        Normalized {
            text: text.to_string(),
            map,
            source_len: text.len(),
        }
    }

    /// Maps a byte range of the normalized text back to the source.
    pub fn source_range(&self, start: usize, end: usize) -> (usize, usize) {
        let s = self.map.get(start).map_or(self.source_len, |r| r.0);
        if end <= start {
            return (s, s);
        }
        let e = self.map.get(end - 1).map_or(self.source_len, |r| r.1);
        (s, e.max(s))
    }
}

enum Mapping {
    /// Punctuation-like spelling, inserted as is.
    Symbol(&'static str),
    /// Alphabetic spelling, kept apart from neighbouring letters/digits.
    Word(&'static str),
    Super(char),
    Sub(char),
}

fn mapping(c: char) -> Option<Mapping> {
    use Mapping::*;
    Some(match c {
        '\u{00D7}' | '\u{00B7}' | '\u{22C5}' | '\u{2219}' => Symbol("*"),
        '\u{00F7}' | '\u{2215}' => Symbol("/"),
        '\u{2212}' | '\u{2013}' => Symbol("-"),
        '\u{2264}' | '\u{2A7D}' => Symbol("<="),
        '\u{2265}' | '\u{2A7E}' => Symbol(">="),
        '\u{2260}' => Symbol("!="),
        '\u{2192}' | '\u{27F6}' => Symbol("->"),
        '\u{21D2}' | '\u{27F9}' => Symbol("=>"),
        '\u{21D4}' | '\u{27FA}' | '\u{2194}' => Symbol("<=>"),
        '\u{00A0}' | '\u{2009}' | '\u{202F}' => Symbol(" "),
        '\u{2208}' => Word("in"),
        '\u{221E}' => Word("oo"),
        '\u{221A}' => Word("sqrt"),
        '\u{2211}' => Word("sum"),
        '\u{220F}' => Word("prod"),
        '\u{222B}' => Word("int"),
        '\u{2200}' => Word("AA"),
        '\u{2203}' => Word("EE"),
        '\u{2227}' => Word("and"),
        '\u{2228}' => Word("or"),
        '\u{2115}' => Word("NN"),
        '\u{2124}' => Word("ZZ"),
        '\u{211A}' => Word("QQ"),
        '\u{211D}' => Word("RR"),
        '\u{2102}' => Word("CC"),
        '\u{03C0}' => Word("pi"),
        '\u{03B1}' => Word("alpha"),
        '\u{03B2}' => Word("beta"),
        '\u{03B3}' => Word("gamma"),
        '\u{03B4}' => Word("delta"),
        '\u{03B5}' | '\u{03F5}' => Word("epsilon"),
        '\u{03B6}' => Word("zeta"),
        '\u{03B7}' => Word("eta"),
        '\u{03B8}' | '\u{03D1}' => Word("theta"),
        '\u{03B9}' => Word("iota"),
        '\u{03BA}' => Word("kappa"),
        '\u{03BB}' => Word("lambda"),
        '\u{03BC}' | '\u{00B5}' => Word("mu"),
        '\u{03BD}' => Word("nu"),
        '\u{03BE}' => Word("xi"),
        '\u{03C1}' => Word("rho"),
        '\u{03C3}' | '\u{03C2}' => Word("sigma"),
        '\u{03C4}' => Word("tau"),
        '\u{03C5}' => Word("upsilon"),
        '\u{03C6}' | '\u{03D5}' => Word("phi"),
        '\u{03C7}' => Word("chi"),
        '\u{03C8}' => Word("psi"),
        '\u{03C9}' => Word("omega"),
        '\u{0393}' => Word("Gamma"),
        '\u{0394}' | '\u{2206}' => Word("Delta"),
        '\u{0398}' => Word("Theta"),
        '\u{039B}' => Word("Lambda"),
        '\u{039E}' => Word("Xi"),
        '\u{03A0}' => Word("Pi"),
        '\u{03A3}' => Word("Sigma"),
        '\u{03A5}' => Word("Upsilon"),
        '\u{03A6}' => Word("Phi"),
        '\u{03A8}' => Word("Psi"),
        '\u{03A9}' | '\u{2126}' => Word("Omega"),
        // Capitals indistinguishable from Latin letters.
        '\u{0391}' => Word("A"),
        '\u{0392}' => Word("B"),
        '\u{0395}' => Word("E"),
        '\u{0396}' => Word("Z"),
        '\u{0397}' => Word("H"),
        '\u{0399}' => Word("I"),
        '\u{039A}' => Word("K"),
        '\u{039C}' => Word("M"),
        '\u{039D}' => Word("N"),
        '\u{039F}' => Word("O"),
        '\u{03A1}' => Word("P"),
        '\u{03A4}' => Word("T"),
        '\u{03A7}' => Word("X"),
        '\u{2070}' => Super('0'),
        '\u{00B9}' => Super('1'),
        '\u{00B2}' => Super('2'),
        '\u{00B3}' => Super('3'),
        '\u{2074}'..='\u{2079}' => Super(char::from(b'4' + (c as u32 - 0x2074) as u8)),
        '\u{207A}' => Super('+'),
        '\u{207B}' => Super('-'),
        '\u{207F}' => Super('n'),
        '\u{2071}' => Super('i'),
        '\u{2080}'..='\u{2089}' => Sub(char::from(b'0' + (c as u32 - 0x2080) as u8)),
        '\u{208A}' => Sub('+'),
        '\u{208B}' => Sub('-'),
        _ => return None,
    })
}

/// Composed characters with the source range each came from.
fn composed_chars(source: &str) -> Vec<(char, usize, usize)> {
    if is_nfc(source) {
        return source.char_indices().map(|(i, c)| (c, i, i + c.len_utf8())).collect();
    }
    // Compose one starter-plus-combining-marks cluster at a time so each
    // output character still knows its source range.
    let mut out = Vec::new();
    let mut iter = source.char_indices().peekable();
    while let Some((i, _)) = iter.next() {
        let mut end = i + source[i..].chars().next().map_or(0, char::len_utf8);
        while let Some(&(j, c)) = iter.peek() {
            if canonical_combining_class(c) == 0 {
                break;
            }
            end = j + c.len_utf8();
            iter.next();
        }
        for c in source[i..end].nfc() {
            out.push((c, i, end));
        }
    }
    out
}

struct Builder {
    text: String,
    map: Vec<(usize, usize)>,
    space_after_word: bool,
}

impl Builder {
    fn push_str(&mut self, s: &str, range: (usize, usize)) {
        for c in s.chars() {
            self.push(c, range);
        }
    }

    fn push(&mut self, c: char, range: (usize, usize)) {
        for _ in 0..c.len_utf8() {
            self.map.push(range);
        }
        self.text.push(c);
    }

    fn push_plain(&mut self, c: char, range: (usize, usize)) {
        if self.space_after_word && c.is_alphanumeric() {
            self.push(' ', range);
        }
        self.space_after_word = false;
        self.push(c, range);
    }

    fn push_word(&mut self, w: &str, range: (usize, usize)) {
        if self.text.chars().next_back().is_some_and(char::is_alphanumeric) {
            self.push(' ', range);
        }
        self.push_str(w, range);
        self.space_after_word = true;
    }
}

/// Canonically composes `source` and rewrites recognised mathematical
/// characters to their ASCII spellings. Never fails.
pub fn normalize_unicode(source: &str) -> (Normalized, Vec<Diagnostic>) {
    let chars = composed_chars(source);
    let mut b = Builder {
        text: String::with_capacity(source.len()),
        map: Vec::with_capacity(source.len()),
        space_after_word: false,
    };
    let mut diags = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let (c, s, e) = chars[i];
        match mapping(c) {
            Some(Mapping::Symbol(sym)) => {
                b.space_after_word = false;
                b.push_str(sym, (s, e));
            }
            Some(Mapping::Word(w)) => b.push_word(w, (s, e)),
            Some(Mapping::Super(_)) | Some(Mapping::Sub(_)) => {
                let superscript = matches!(mapping(c), Some(Mapping::Super(_)));
                let mut run = String::new();
                let mut j = i;
                let mut last = (s, e);
                while j < chars.len() {
                    let (cj, sj, ej) = chars[j];
                    match (mapping(cj), superscript) {
                        (Some(Mapping::Super(d)), true) | (Some(Mapping::Sub(d)), false) => {
                            run.push(d);
                            last = (sj, ej);
                            j += 1;
                        }
                        _ => break,
                    }
                }
                b.space_after_word = false;
                b.push_str(if superscript { "^(" } else { "_(" }, (s, e));
                for d in run.chars() {
                    b.push(d, (s, last.1));
                }
                b.push(')', last);
                i = j;
                continue;
            }
            None => {
                if !c.is_ascii() && !c.is_whitespace() {
                    diags.push(Diagnostic::new(
                        Code::UnmappedChar,
                        Span::in_text(source, s, e),
                        format!(
                            "character `{c}` (U+{:04X}) has no keyboard spelling and is kept as is",
                            c as u32
                        ),
                    ));
                }
                b.push_plain(c, (s, e));
            }
        }
        i += 1;
    }
    (
        Normalized {
            text: b.text,
            map: b.map,
            source_len: source.len(),
        },
        diags,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn norm(s: &str) -> String {
        normalize_unicode(s).0.text
    }

    #[test]
    fn quantifier_sentence() {
        let (n, d) = normalize_unicode("∀n∈ℕ");
        assert_eq!(n.text, "AA n in NN");
        assert!(d.is_empty());
        // `in` comes from the three bytes of `∈` at offset 4
        let at = n.text.find("in").unwrap();
        assert_eq!(n.source_range(at, at + 2), (4, 7));
    }

    #[test]
    fn identity_on_ascii() {
        let (n, d) = normalize_unicode("x");
        assert_eq!(n.text, "x");
        assert!(d.is_empty());
        assert_eq!(n.source_range(0, 1), (0, 1));
    }

    #[test]
    fn superscript_digits_become_power() {
        // ² is U+00B2 and ³ U+00B3 in the Latin-1 block, the rest in U+207x.
        assert_eq!(norm("n²"), "n^(2)");
        assert_eq!(norm("x¹⁰+y⁻³"), "x^(10)+y^(-3)");
        assert_eq!(norm("a₁₂"), "a_(12)");
    }

    #[test]
    fn operators() {
        assert_eq!(norm("6×3"), "6*3");
        assert_eq!(norm("a÷b"), "a/b");
        assert_eq!(norm("x≤y≥z≠w"), "x<=y>=z!=w");
        assert_eq!(norm("x→∞"), "x->oo");
        assert_eq!(norm("2π r"), "2 pi r");
        assert_eq!(norm("√x"), "sqrt x");
        assert_eq!(norm("∑"), "sum");
        assert_eq!(norm("αβ"), "alpha beta");
        assert_eq!(norm("Σ(x)"), "Sigma(x)");
    }

    #[test]
    fn composition_keeps_offsets() {
        // e + combining acute composes to é
        let (n, d) = normalize_unicode("e\u{301}x");
        assert_eq!(n.text, "éx");
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].code, Code::UnmappedChar);
        assert_eq!(n.source_range(0, 2), (0, 3));
        assert_eq!(n.source_range(2, 3), (3, 4));
    }

    #[test]
    fn exotic_characters_pass_through_with_info() {
        let (n, d) = normalize_unicode("x☃");
        assert_eq!(n.text, "x☃");
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].severity, crate::diagnostic::Severity::Info);
        assert_eq!((d[0].span.start, d[0].span.end), (1, 4));
    }
}
