use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One letter of a word: a generator index and whether it is inverted.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub struct Letter {
    pub generator: usize,
    pub inverse: bool,
}

impl Letter {
    pub fn inv(self) -> Letter {
        Letter { inverse: !self.inverse, ..self }
    }
}

/// A freely reduced word. `g1 g2` denotes `g1 o g2`: `g2` acts first.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default, Serialize, Deserialize)]
pub struct Word(Vec<Letter>);

impl Word {
    pub fn identity() -> Self {
        Word(Vec::new())
    }

    pub fn generator(g: usize) -> Self {
        Word(vec![Letter { generator: g, inverse: false }])
    }

    pub fn from_letters(letters: impl IntoIterator<Item = Letter>) -> Self {
        let mut out: Vec<Letter> = Vec::new();
        for l in letters {
            if out.last() == Some(&l.inv()) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        Word(out)
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn inverse(&self) -> Word {
        Word(self.0.iter().rev().map(|l| l.inv()).collect())
    }

    /// `self o other`.
    pub fn concat(&self, other: &Word) -> Word {
        Word::from_letters(self.0.iter().chain(&other.0).copied())
    }
}

/// A finitely presented group.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct FPGroup {
    generators: Vec<String>,
    relators: Vec<Word>,
}

impl FPGroup {
    pub fn new<S: AsRef<str>>(generators: &[S], relators: &[S]) -> Result<Self> {
        let generators: Vec<String> = generators.iter().map(|s| s.as_ref().trim().to_string()).collect();
        for (i, g) in generators.iter().enumerate() {
            if g.is_empty() || !g.chars().all(|c| c.is_alphanumeric() || c == '_') {
                return Err(Error::descriptor("generators", format!("invalid generator name `{g}`")));
            }
            if generators[..i].contains(g) {
                return Err(Error::descriptor("generators", format!("duplicate generator `{g}`")));
            }
        }
        let mut group = FPGroup { generators, relators: Vec::new() };
        group.relators = relators.iter().map(|r| group.parse_word(r.as_ref())).collect::<Result<_>>()?;
        Ok(group)
    }

    /// The free group on the given generators.
    pub fn free<S: AsRef<str>>(generators: &[S]) -> Result<Self> {
        FPGroup::new(generators, &[])
    }

    pub fn generators(&self) -> &[String] {
        &self.generators
    }

    pub fn relators(&self) -> &[Word] {
        &self.relators
    }

    pub fn rank(&self) -> usize {
        self.generators.len()
    }

    /// Parses `"g1 g2^-1 g1^2"`; `"1"` or `""` is the identity.
    pub fn parse_word(&self, text: &str) -> Result<Word> {
        let mut letters = Vec::new();
        for tok in text.split_whitespace() {
            if tok == "1" {
                continue;
            }
            let (name, exp) = match tok.split_once('^') {
                Some((n, e)) => {
                    let e: i64 =
                        e.parse().map_err(|_| Error::descriptor("word", format!("bad exponent in `{tok}`")))?;
                    (n, e)
                }
                None => (tok, 1),
            };
            let g = self
                .generators
                .iter()
                .position(|s| s == name)
                .ok_or_else(|| Error::descriptor("word", format!("unknown generator `{name}`")))?;
            let l = Letter { generator: g, inverse: exp < 0 };
            letters.extend(std::iter::repeat_n(l, exp.unsigned_abs() as usize));
        }
        Ok(Word::from_letters(letters))
    }

    pub fn word_text(&self, w: &Word) -> String {
        if w.is_empty() {
            return "1".into();
        }
        w.0.iter()
            .map(|l| {
                let g = &self.generators[l.generator];
                if l.inverse {
                    format!("{g}^-1")
                } else {
                    g.clone()
                }
            })
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// All reduced words of length at most `n`, shortest first.
    pub fn words_up_to(&self, n: usize) -> Vec<Word> {
        let letters: Vec<Letter> =
            (0..self.rank()).flat_map(|g| [false, true].map(|inverse| Letter { generator: g, inverse })).collect();
        let mut out = vec![Word::identity()];
        let mut layer = vec![Word::identity()];
        for _ in 0..n {
            let mut next = Vec::new();
            for w in &layer {
                for &l in &letters {
                    if w.0.last() == Some(&l.inv()) {
                        continue;
                    }
                    let mut v = w.0.clone();
                    v.push(l);
                    next.push(Word(v));
                }
            }
            out.extend(next.iter().cloned());
            layer = next;
        }
        out
    }
}

impl fmt::Display for FPGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rels: Vec<String> = self.relators.iter().map(|r| self.word_text(r)).collect();
        write!(f, "<{} | {}>", self.generators.join(", "), rels.join(", "))
    }
}
