//! Pronouncing dictionary parser (ARPAbet transcriptions).
//!
//! Accepts the classic format (`ABOUT  AH0 B AW1 T`, uppercase, two-space
//! separated, `;;;` comments) as well as the lowercase single-space variant with
//! trailing `# ...` annotations.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// The 39 stress-free ARPAbet phonemes, in node order.
pub const PHONEMES: [&str; 39] = [
    "AA", "AE", "AH", "AO", "AW", "AY", "B", "CH", "D", "DH", "EH", "ER", "EY", "F", "G", "HH", "IH", "IY", "JH", "K",
    "L", "M", "N", "NG", "OW", "OY", "P", "R", "S", "SH", "T", "TH", "UH", "UW", "V", "W", "Y", "Z", "ZH",
];

/// Headword (uppercase) to primary pronunciation.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PronunciationMap {
    entries: BTreeMap<String, Vec<&'static str>>,
}

impl PronunciationMap {
    pub fn get(&self, word: &str) -> Option<&[&'static str]> {
        self.entries.get(&word.to_ascii_uppercase()).map(Vec::as_slice)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn inventory() -> &'static [&'static str] {
        &PHONEMES
    }

    pub fn parse_str(text: &str, path: &Path) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim_end();
            if line.starts_with(";;;") {
                continue;
            }
            let line = match line.find(" #") {
                Some(pos) => &line[..pos],
                None => line,
            };
            let mut tokens = line.split_whitespace();
            let Some(head) = tokens.next() else { continue };
            if is_alternate(head) {
                continue;
            }
            let mut phones = Vec::new();
            for sym in tokens {
                let bare = sym.trim_end_matches(['0', '1', '2']);
                match PHONEMES.iter().find(|&&p| p == bare) {
                    Some(p) => phones.push(*p),
                    None => {
                        return Err(Error::UnknownPhoneme {
                            path: path.to_path_buf(),
                            line: idx + 1,
                            symbol: sym.to_string(),
                        })
                    }
                }
            }
            if phones.is_empty() {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line: idx + 1,
                    message: format!("no pronunciation for {head:?}"),
                });
            }
            entries.entry(head.to_ascii_uppercase()).or_insert(phones);
        }
        Ok(PronunciationMap { entries })
    }
}

/// `WORD(2)` style headwords mark alternate pronunciations.
fn is_alternate(head: &str) -> bool {
    match head.strip_suffix(')').and_then(|h| h.rsplit_once('(')) {
        Some((word, k)) => !word.is_empty() && !k.is_empty() && k.bytes().all(|b| b.is_ascii_digit()),
        None => false,
    }
}

pub fn parse_pronouncing_dict(path: impl AsRef<Path>) -> Result<PronunciationMap> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    PronunciationMap::parse_str(&String::from_utf8_lossy(&bytes), path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<PronunciationMap> {
        PronunciationMap::parse_str(text, Path::new("dict"))
    }

    #[test]
    fn strips_stress_digits() {
        let d = parse("ABOUT  AH0 B AW1 T\n").unwrap();
        assert_eq!(d.get("about").unwrap(), &["AH", "B", "AW", "T"]);
    }

    #[test]
    fn skips_comments_and_alternates() {
        let d = parse(";;; comment\nA  AH0\nA(1)  EY1\n").unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!(d.get("A").unwrap(), &["AH"]);
    }

    #[test]
    fn lowercase_variant_with_annotations() {
        let d = parse("aalborg AO1 L B AO0 R G # place, danish\nabout(2) AH0 B AW1\n").unwrap();
        assert_eq!(d.get("AALBORG").unwrap(), &["AO", "L", "B", "AO", "R", "G"]);
        assert!(d.get("about").is_none());
    }

    #[test]
    fn punctuation_headwords_are_not_alternates() {
        assert!(!is_alternate("(BEGIN-PARENS"));
        assert!(!is_alternate(")CLOSE-PAREN"));
        assert!(is_alternate("READ(1)"));
    }

    #[test]
    fn unknown_symbol_names_line() {
        match parse("OK  OW1 K EY1\nBAD  AH0 QQ\n") {
            Err(Error::UnknownPhoneme { line, symbol, .. }) => {
                assert_eq!(line, 2);
                assert_eq!(symbol, "QQ");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn inventory_has_39_distinct_symbols() {
        let mut v = PHONEMES.to_vec();
        v.sort();
        v.dedup();
        assert_eq!(v.len(), 39);
    }
}
