//! Token normalization: case folding, tag rejection and alphabet filtering.

use std::collections::BTreeSet;

use unicode_script::{Script, UnicodeScript};

/// Which characters a token may consist of.
///
/// Only one policy can be active at a time, so this is an enum rather than a
/// set of flags.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Alphabet {
    /// Alphabetic characters belonging to one Unicode script. Accented
    /// letters such as `ï` pass for [`Script::Latin`].
    Script(Script),
    /// ASCII letters only (`a`–`z`, plus `A`–`Z` when case folding is off).
    AsciiStrict,
    /// An explicit set of accepted code points.
    Codepoints(BTreeSet<char>),
}

impl Alphabet {
    /// Looks up a script by its full Unicode name, e.g. `"Latin"` or `"Cyrillic"`.
    pub fn from_script_name(name: &str) -> Option<Self> {
        Script::from_full_name(name).map(Alphabet::Script)
    }

    fn accepts(&self, c: char) -> bool {
        match self {
            Alphabet::Script(script) => c.is_alphabetic() && c.script() == *script,
            Alphabet::AsciiStrict => c.is_ascii_alphabetic(),
            Alphabet::Codepoints(set) => set.contains(&c),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FilterConfig {
    pub case_fold: bool,
    pub alphabet: Alphabet,
    /// Drop tokens containing `_` (part-of-speech tags such as `run_VERB`
    /// and sentinels such as `_START_`).
    pub reject_tagged: bool,
}

impl Default for FilterConfig {
    /// Case-folded Latin-script letters with tagged entries rejected.
    fn default() -> Self {
        Self {
            case_fold: true,
            alphabet: Alphabet::Script(Script::Latin),
            reject_tagged: true,
        }
    }
}

impl FilterConfig {
    pub fn ascii_strict(mut self) -> Self {
        self.alphabet = Alphabet::AsciiStrict;
        self
    }
}

/// Simple (one-to-one) case folding of a single character.
///
/// Characters whose lowercase mapping expands to several code points (such as
/// `İ`) are left unchanged, matching the behaviour of simple folding.
fn fold_char(c: char) -> char {
    if c.is_ascii() {
        return c.to_ascii_lowercase();
    }
    if c == 'ς' {
        return 'σ';
    }
    let mut lower = c.to_lowercase();
    match (lower.next(), lower.next()) {
        (Some(l), None) => l,
        _ => c,
    }
}

/// Normalizes a raw token, returning `None` when the token is rejected.
pub fn normalize_token(token: &str, cfg: &FilterConfig) -> Option<String> {
    if token.is_empty() {
        return None;
    }
    if cfg.reject_tagged && token.contains('_') {
        return None;
    }
    let mut out = String::with_capacity(token.len());
    for c in token.chars() {
        let c = if cfg.case_fold { fold_char(c) } else { c };
        if !cfg.alphabet.accepts(c) {
            return None;
        }
        out.push(c);
    }
    Some(out)
}
