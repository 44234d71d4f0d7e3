//! Tokenization, normalization, and vocabulary management.
//!
//! The whole workbench runs on whitespace tokens over normalized text. Six
//! reserved ids occupy the bottom of every vocabulary, in this fixed order:
//!
//! | id | token     | role                                  |
//! |----|-----------|---------------------------------------|
//! | 0  | `<pad>`   | padding (never decoded)               |
//! | 1  | `<s>`     | decoder start (never decoded)         |
//! | 2  | `</s>`    | end of sequence                       |
//! | 3  | `[SEP]`   | query/document/prefix separator       |
//! | 4  | `,`       | facet separator inside joint targets  |
//! | 5  | `<unk>`   | out-of-vocabulary surface token       |
//!
//! Surface text never encodes to a reserved id: the separator tokens are
//! inserted by the input/target builders, and a raw `,` or `[SEP]` appearing
//! in text maps to `<unk>`.

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::QueryRecord;
use crate::error::{Error, Result};

pub const PAD_ID: u32 = 0;
pub const BOS_ID: u32 = 1;
pub const EOS_ID: u32 = 2;
pub const SEP_ID: u32 = 3;
pub const FACET_SEP_ID: u32 = 4;
pub const UNK_ID: u32 = 5;

/// Reserved surface forms, indexed by id.
pub const RESERVED_TOKENS: [&str; 6] = ["<pad>", "<s>", "</s>", "[SEP]", ",", "<unk>"];

/// Lowercase, trim, and collapse internal whitespace runs to single spaces.
pub fn normalize(text: &str) -> String {
    text.split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .to_lowercase()
}

/// Normalize then split on whitespace. The empty string yields an empty list.
pub fn tokenize(text: &str) -> Vec<String> {
    normalize(text)
        .split_whitespace()
        .map(str::to_string)
        .collect()
}

/// A sequence of token ids.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TokenSequence(pub Vec<u32>);

impl TokenSequence {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    pub fn ends_with_eos(&self) -> bool {
        self.0.last() == Some(&EOS_ID)
    }
}

impl From<Vec<u32>> for TokenSequence {
    fn from(ids: Vec<u32>) -> Self {
        TokenSequence(ids)
    }
}

/// Immutable token/id mapping with the six reserved ids at the bottom.
#[derive(Clone, Debug, PartialEq)]
pub struct Vocabulary {
    token_to_id: HashMap<String, u32>,
    id_to_token: Vec<String>,
}

impl Vocabulary {
    /// Build a vocabulary over the queries, documents, and facets of a corpus.
    ///
    /// Tokens with corpus frequency below `min_frequency` are dropped; ids are
    /// assigned by descending frequency, ties broken lexicographically.
    pub fn build(corpus: &[QueryRecord], min_frequency: usize) -> Result<Self> {
        if corpus.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        if min_frequency < 1 {
            return Err(Error::InvalidArgument(
                "min_frequency must be at least 1".into(),
            ));
        }
        let mut counts: HashMap<String, usize> = HashMap::new();
        for record in corpus {
            for text in record.texts() {
                for token in tokenize(text) {
                    *counts.entry(token).or_insert(0) += 1;
                }
            }
        }
        let mut surface: Vec<(String, usize)> = counts
            .into_iter()
            .filter(|(token, count)| {
                *count >= min_frequency && !RESERVED_TOKENS.contains(&token.as_str())
            })
            .collect();
        surface.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));

        let mut id_to_token: Vec<String> = RESERVED_TOKENS.iter().map(|t| t.to_string()).collect();
        id_to_token.extend(surface.into_iter().map(|(token, _)| token));
        Ok(Self::from_tokens(id_to_token))
    }

    fn from_tokens(id_to_token: Vec<String>) -> Self {
        let token_to_id = id_to_token
            .iter()
            .enumerate()
            .map(|(id, token)| (token.clone(), id as u32))
            .collect();
        Vocabulary {
            token_to_id,
            id_to_token,
        }
    }

    pub fn len(&self) -> usize {
        self.id_to_token.len()
    }

    pub fn is_empty(&self) -> bool {
        false // reserved tokens are always present
    }

    /// Id for a surface token, if it is a non-reserved vocabulary entry.
    pub fn surface_id(&self, token: &str) -> Option<u32> {
        match self.token_to_id.get(token) {
            Some(&id) if id >= RESERVED_TOKENS.len() as u32 => Some(id),
            _ => None,
        }
    }

    pub fn token(&self, id: u32) -> Result<&str> {
        self.id_to_token
            .get(id as usize)
            .map(String::as_str)
            .ok_or(Error::InvalidTokenId(id))
    }

    pub fn tokens(&self) -> &[String] {
        &self.id_to_token
    }

    /// Encode surface tokens; anything out of vocabulary (including reserved
    /// surface forms appearing in raw text) maps to `<unk>`.
    pub fn encode(&self, tokens: &[String]) -> TokenSequence {
        TokenSequence(
            tokens
                .iter()
                .map(|t| self.surface_id(t).unwrap_or(UNK_ID))
                .collect(),
        )
    }

    /// Encode raw text: normalize, tokenize, then map to ids.
    pub fn encode_text(&self, text: &str) -> TokenSequence {
        self.encode(&tokenize(text))
    }

    /// Decode ids to a space-joined string, omitting `<pad>` and `<s>`.
    pub fn decode(&self, ids: &[u32]) -> Result<String> {
        let mut parts = Vec::with_capacity(ids.len());
        for &id in ids {
            let token = self.token(id)?;
            if id == PAD_ID || id == BOS_ID {
                continue;
            }
            parts.push(token);
        }
        Ok(parts.join(" "))
    }

    /// One token per line; the line number is the id.
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut out = String::new();
        for token in &self.id_to_token {
            out.push_str(token);
            out.push('\n');
        }
        let mut file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        file.write_all(out.as_bytes())
            .map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let tokens: Vec<String> = text.lines().map(str::to_string).collect();
        if tokens.len() < RESERVED_TOKENS.len() {
            return Err(Error::Format(format!(
                "vocabulary file {} has fewer than {} lines",
                path.display(),
                RESERVED_TOKENS.len()
            )));
        }
        for (id, expected) in RESERVED_TOKENS.iter().enumerate() {
            if tokens[id] != *expected {
                return Err(Error::Format(format!(
                    "vocabulary file {}: line {} is {:?}, expected reserved token {:?}",
                    path.display(),
                    id,
                    tokens[id],
                    expected
                )));
            }
        }
        Ok(Self::from_tokens(tokens))
    }
}
