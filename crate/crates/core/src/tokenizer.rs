//! Segmentation with a trained merge list.
//!
//! Merges are replayed in rank order: each rule rewrites all of its adjacent
//! occurrences, leftmost first, before the next rule is considered. This is
//! exactly the evolution the trainer went through, so encoding the training
//! corpus reproduces the trainer's final segmentation.

use std::collections::HashMap;

use rayon::prelude::*;
use unicode_normalization::UnicodeNormalization;

use crate::corpus::{LanguageId, MultilingualCorpus};
use crate::error::{Error, Result};
use crate::vocab::{Vocabulary, UNK_TOKEN};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Sym {
    Known(u32),
    Unknown(char),
}

/// One output token together with the text it covers (marker excluded).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segment {
    /// Index into [`Vocabulary::tokens`], `None` for an unknown character.
    pub id: Option<u32>,
    pub surface: String,
    pub ends_word: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Encoding {
    pub tokens: Vec<String>,
    pub source: String,
    /// Number of characters that fell outside the vocabulary.
    pub unknown: usize,
}

#[derive(Debug, Clone)]
pub struct Tokenizer<'v> {
    vocab: &'v Vocabulary,
    ids: HashMap<&'v str, u32>,
    ranks: HashMap<(u32, u32), (usize, u32)>,
    marker: u32,
    strict: bool,
}

impl<'v> Tokenizer<'v> {
    pub fn new(vocab: &'v Vocabulary) -> Self {
        let ids: HashMap<&str, u32> = vocab
            .tokens()
            .iter()
            .enumerate()
            .map(|(i, t)| (t.as_str(), i as u32))
            .collect();
        let ranks = vocab
            .merges()
            .iter()
            .map(|m| {
                (
                    (ids[m.left.as_str()], ids[m.right.as_str()]),
                    (m.rank, ids[m.merged.as_str()]),
                )
            })
            .collect();
        let marker = ids[vocab.marker()];
        Tokenizer {
            vocab,
            ids,
            ranks,
            marker,
            strict: false,
        }
    }

    /// Unknown characters become errors instead of `⟨unk⟩`.
    pub fn strict(mut self, strict: bool) -> Self {
        self.strict = strict;
        self
    }

    pub fn vocab(&self) -> &'v Vocabulary {
        self.vocab
    }

    fn symbolize(&self, word: &str) -> Result<Vec<Sym>> {
        if word.is_empty() {
            return Err(Error::InvalidParameter("cannot encode an empty word".into()));
        }
        if word.chars().any(char::is_whitespace) || word.contains(self.vocab.marker()) {
            return Err(Error::InvalidParameter(format!(
                "word {word:?} contains whitespace or the end-of-word marker"
            )));
        }
        let mut buf = [0u8; 4];
        let mut syms = Vec::with_capacity(word.len() + 1);
        for c in word.chars() {
            match self.ids.get(&*c.encode_utf8(&mut buf)) {
                Some(&id) => syms.push(Sym::Known(id)),
                None if self.strict => return Err(Error::UnknownCharacter(c)),
                None => syms.push(Sym::Unknown(c)),
            }
        }
        syms.push(Sym::Known(self.marker));
        Ok(syms)
    }

    fn merge_symbols(&self, syms: &mut Vec<Sym>) {
        let mut last: Option<usize> = None;
        loop {
            let mut best: Option<(usize, (u32, u32), u32)> = None;
            for w in syms.windows(2) {
                if let (Sym::Known(l), Sym::Known(r)) = (w[0], w[1]) {
                    if let Some(&(rank, merged)) = self.ranks.get(&(l, r)) {
                        let eligible = last.is_none_or(|q| rank > q);
                        if eligible && best.is_none_or(|b| rank < b.0) {
                            best = Some((rank, (l, r), merged));
                        }
                    }
                }
            }
            let Some((rank, (l, r), merged)) = best else { break };
            let mut out = Vec::with_capacity(syms.len());
            let mut i = 0;
            while i < syms.len() {
                if i + 1 < syms.len() && syms[i] == Sym::Known(l) && syms[i + 1] == Sym::Known(r) {
                    out.push(Sym::Known(merged));
                    i += 2;
                } else {
                    out.push(syms[i]);
                    i += 1;
                }
            }
            *syms = out;
            last = Some(rank);
        }
    }

    fn encode_syms(&self, word: &str) -> Result<Vec<Sym>> {
        let mut syms = self.symbolize(word)?;
        self.merge_symbols(&mut syms);
        Ok(syms)
    }

    /// Token indices for one word; unknown characters map to `None`.
    pub fn encode_word_ids(&self, word: &str) -> Result<Vec<Option<u32>>> {
        Ok(self
            .encode_syms(word)?
            .into_iter()
            .map(|s| match s {
                Sym::Known(id) => Some(id),
                Sym::Unknown(_) => None,
            })
            .collect())
    }

    pub fn encode_word(&self, word: &str) -> Result<Vec<String>> {
        Ok(self.encode_word_detailed(word)?.tokens)
    }

    pub fn encode_word_detailed(&self, word: &str) -> Result<Encoding> {
        let syms = self.encode_syms(word)?;
        let mut unknown = 0;
        let tokens = syms
            .iter()
            .map(|s| match s {
                Sym::Known(id) => self.vocab.tokens()[*id as usize].clone(),
                Sym::Unknown(_) => {
                    unknown += 1;
                    UNK_TOKEN.to_string()
                }
            })
            .collect();
        Ok(Encoding {
            tokens,
            source: word.to_string(),
            unknown,
        })
    }

    /// Segments a word and reports the surface text behind every token.
    pub fn segment(&self, word: &str) -> Result<Vec<Segment>> {
        let marker = self.vocab.marker();
        let syms = self.encode_syms(word)?;
        let last = syms.len() - 1;
        Ok(syms
            .into_iter()
            .enumerate()
            .map(|(i, s)| match s {
                Sym::Known(id) => {
                    let tok = &self.vocab.tokens()[id as usize];
                    let surface = tok.strip_suffix(marker).unwrap_or(tok).to_string();
                    Segment {
                        id: Some(id),
                        surface,
                        ends_word: i == last,
                    }
                }
                Sym::Unknown(c) => Segment {
                    id: None,
                    surface: c.to_string(),
                    ends_word: false,
                },
            })
            .collect())
    }

    /// NFC-normalizes a line and encodes each whitespace-separated word.
    pub fn encode_line(&self, line: &str) -> Result<Vec<String>> {
        let normalized: String = line.nfc().collect();
        let mut out = Vec::new();
        for word in normalized.split_whitespace() {
            out.extend(self.encode_word(word)?);
        }
        Ok(out)
    }

    pub fn detokenize<S: AsRef<str>>(&self, tokens: &[S]) -> Result<String> {
        detokenize(tokens, self.vocab.marker())
    }
}

/// Concatenates tokens, turning each end-of-word marker into a word break.
pub fn detokenize<S: AsRef<str>>(tokens: &[S], marker: &str) -> Result<String> {
    let mut out = String::new();
    let mut current = String::new();
    for (i, tok) in tokens.iter().enumerate() {
        let tok = tok.as_ref();
        if tok.is_empty() || tok == UNK_TOKEN {
            return Err(Error::MalformedTokens(format!(
                "token {i} ({tok:?}) cannot be detokenized"
            )));
        }
        let (stem, ends) = match tok.strip_suffix(marker) {
            Some(stem) => (stem, true),
            None => (tok, false),
        };
        if stem.contains(marker) {
            return Err(Error::MalformedTokens(format!(
                "token {i} ({tok:?}) has a marker before its end"
            )));
        }
        current.push_str(stem);
        if ends {
            if current.is_empty() {
                return Err(Error::MalformedTokens(format!("token {i} closes an empty word")));
            }
            if !out.is_empty() {
                out.push(' ');
            }
            out.push_str(&current);
            current.clear();
        }
    }
    if !current.is_empty() {
        return Err(Error::MalformedTokens(
            "last word has no end-of-word marker".into(),
        ));
    }
    Ok(out)
}

/// Per-token, per-language occurrence mass of a corpus under a vocabulary.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusEncoding {
    pub languages: Vec<LanguageId>,
    /// Indexed like [`Vocabulary::tokens`], then by language.
    pub token_freqs: Vec<Vec<f64>>,
    /// Mass of unknown-character tokens per language.
    pub unknown: Vec<f64>,
    /// Total word weight per language.
    pub words: Vec<f64>,
}

impl CorpusEncoding {
    pub fn tokens_in(&self, lang: usize) -> f64 {
        self.token_freqs.iter().map(|f| f[lang]).sum::<f64>() + self.unknown[lang]
    }
}

/// Encodes every word of every language. Words are encoded in parallel and
/// accumulated in table order.
pub fn encode_corpus(tokenizer: &Tokenizer<'_>, corpus: &MultilingualCorpus) -> Result<CorpusEncoding> {
    let n = corpus.len();
    let mut token_freqs = vec![vec![0.0; n]; tokenizer.vocab.len()];
    let mut unknown = vec![0.0; n];
    let mut words = vec![0.0; n];
    for (lang, table) in corpus.tables().iter().enumerate() {
        let entries: Vec<(&String, &f64)> = table.iter().collect();
        let encoded = entries
            .par_iter()
            .map(|(w, _)| tokenizer.encode_word_ids(w))
            .collect::<Result<Vec<_>>>()?;
        for ((_, &weight), ids) in entries.iter().zip(encoded) {
            words[lang] += weight;
            for id in ids {
                match id {
                    Some(id) => token_freqs[id as usize][lang] += weight,
                    None => unknown[lang] += weight,
                }
            }
        }
    }
    Ok(CorpusEncoding {
        languages: corpus.languages().iter().map(|l| l.id.clone()).collect(),
        token_freqs,
        unknown,
        words,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LanguageSize {
    pub lang: LanguageId,
    pub tokens: f64,
    pub words: f64,
    pub unknown: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EncodedSizes {
    pub per_language: Vec<LanguageSize>,
    pub total_tokens: f64,
    pub total_words: f64,
}

/// Σ weight × encoded length, per language and overall.
pub fn encoded_size(corpus: &MultilingualCorpus, vocab: &Vocabulary) -> Result<EncodedSizes> {
    let tok = Tokenizer::new(vocab);
    let enc = encode_corpus(&tok, corpus)?;
    let per_language: Vec<LanguageSize> = enc
        .languages
        .iter()
        .enumerate()
        .map(|(i, id)| LanguageSize {
            lang: id.clone(),
            tokens: enc.tokens_in(i),
            words: enc.words[i],
            unknown: enc.unknown[i],
        })
        .collect();
    let total_tokens = per_language.iter().map(|s| s.tokens).sum();
    let total_words = per_language.iter().map(|s| s.words).sum();
    Ok(EncodedSizes {
        per_language,
        total_tokens,
        total_words,
    })
}
