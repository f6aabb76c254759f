use std::collections::HashMap;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::ModelError;

pub const PAD_TOKEN: &str = "[PAD]";
pub const UNK_TOKEN: &str = "[UNK]";
pub const CLS_TOKEN: &str = "[CLS]";
pub const SEP_TOKEN: &str = "[SEP]";

/// A token id.
pub type TokenId = u32;

/// Dense token vocabulary with four reserved special tokens.
///
/// Ids are dense in `[0, len)`. A vocabulary built with [`Vocab::new`] places
/// the special tokens at ids 0..=3 (`[PAD]`, `[UNK]`, `[CLS]`, `[SEP]`)
/// followed by the regular tokens in the order given.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vocab {
    tokens: Vec<String>,
    index: HashMap<String, TokenId>,
    pad_id: TokenId,
    unk_id: TokenId,
    cls_id: TokenId,
    sep_id: TokenId,
}

impl Vocab {
    /// Builds a vocabulary from regular tokens. Tokens are lowercased;
    /// duplicates and empty strings are skipped.
    pub fn new<I, S>(tokens: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut all: Vec<String> = [PAD_TOKEN, UNK_TOKEN, CLS_TOKEN, SEP_TOKEN]
            .iter()
            .map(|s| (*s).to_owned())
            .collect();
        let mut index: HashMap<String, TokenId> = all
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as TokenId))
            .collect();
        for tok in tokens {
            let tok = tok.as_ref().to_lowercase();
            if tok.is_empty() || index.contains_key(&tok) {
                continue;
            }
            index.insert(tok.clone(), all.len() as TokenId);
            all.push(tok);
        }
        Self {
            tokens: all,
            index,
            pad_id: 0,
            unk_id: 1,
            cls_id: 2,
            sep_id: 3,
        }
    }

    /// Collects every whitespace-separated token in `texts` into a vocabulary,
    /// sorted lexicographically so the result does not depend on text order.
    pub fn from_corpus<I, S>(texts: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut words: Vec<String> = texts
            .into_iter()
            .flat_map(|t| {
                t.as_ref()
                    .split_whitespace()
                    .map(str::to_lowercase)
                    .collect::<Vec<_>>()
            })
            .collect();
        words.sort();
        words.dedup();
        Self::new(words)
    }

    /// Vocabulary of `size` ids with placeholder tokens `w4`, `w5`, ...
    pub fn synthetic(size: usize) -> Self {
        Self::new((4..size.max(4)).map(|i| format!("w{i}")))
    }

    /// Builds a vocabulary from an explicit id-ordered token list and the
    /// positions of the special tokens.
    pub fn from_parts(
        tokens: Vec<String>,
        pad_id: TokenId,
        unk_id: TokenId,
        cls_id: TokenId,
        sep_id: TokenId,
    ) -> Result<Self, ModelError> {
        let specials = [pad_id, unk_id, cls_id, sep_id];
        for (i, a) in specials.iter().enumerate() {
            if *a as usize >= tokens.len() {
                return Err(ModelError::InvalidVocab(format!(
                    "special id {a} outside vocabulary of size {}",
                    tokens.len()
                )));
            }
            if specials[i + 1..].contains(a) {
                return Err(ModelError::InvalidVocab(format!(
                    "special id {a} assigned twice"
                )));
            }
        }
        let mut index = HashMap::with_capacity(tokens.len());
        for (i, t) in tokens.iter().enumerate() {
            if index.insert(t.clone(), i as TokenId).is_some() {
                return Err(ModelError::InvalidVocab(format!("duplicate token {t:?}")));
            }
        }
        Ok(Self {
            tokens,
            index,
            pad_id,
            unk_id,
            cls_id,
            sep_id,
        })
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn pad_id(&self) -> TokenId {
        self.pad_id
    }

    pub fn unk_id(&self) -> TokenId {
        self.unk_id
    }

    pub fn cls_id(&self) -> TokenId {
        self.cls_id
    }

    pub fn sep_id(&self) -> TokenId {
        self.sep_id
    }

    /// `true` for `[CLS]` and `[SEP]`.
    pub fn is_special(&self, id: TokenId) -> bool {
        id == self.cls_id || id == self.sep_id
    }

    pub fn id(&self, token: &str) -> Option<TokenId> {
        self.index.get(token).copied()
    }

    pub fn token(&self, id: TokenId) -> Option<&str> {
        self.tokens.get(id as usize).map(String::as_str)
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    /// Lowercases, splits on whitespace, maps through the vocabulary
    /// (unknown words become `[UNK]`) and wraps the result in `[CLS] … [SEP]`.
    pub fn tokenize(&self, text: &str) -> TokenSequence {
        let mut ids = Vec::with_capacity(text.len() / 4 + 2);
        ids.push(self.cls_id);
        ids.extend(
            text.split_whitespace()
                .map(|w| self.id(&w.to_lowercase()).unwrap_or(self.unk_id)),
        );
        ids.push(self.sep_id);
        TokenSequence(ids)
    }
}

#[derive(Serialize, Deserialize)]
struct VocabRepr {
    tokens: Vec<String>,
    pad_id: TokenId,
    unk_id: TokenId,
    cls_id: TokenId,
    sep_id: TokenId,
}

impl Serialize for Vocab {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        VocabRepr {
            tokens: self.tokens.clone(),
            pad_id: self.pad_id,
            unk_id: self.unk_id,
            cls_id: self.cls_id,
            sep_id: self.sep_id,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Vocab {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let r = VocabRepr::deserialize(deserializer)?;
        Vocab::from_parts(r.tokens, r.pad_id, r.unk_id, r.cls_id, r.sep_id)
            .map_err(serde::de::Error::custom)
    }
}

/// Non-empty sequence of token ids.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TokenSequence(Vec<TokenId>);

impl TokenSequence {
    /// Returns `None` for an empty id list.
    pub fn new(ids: Vec<TokenId>) -> Option<Self> {
        (!ids.is_empty()).then_some(Self(ids))
    }

    pub fn ids(&self) -> &[TokenId] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    /// Only possible for sequences deserialized from untrusted input.
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<TokenId> {
        self.0
    }
}

impl AsRef<[TokenId]> for TokenSequence {
    fn as_ref(&self) -> &[TokenId] {
        &self.0
    }
}
