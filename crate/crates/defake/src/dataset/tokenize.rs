use std::collections::BTreeMap;
use std::path::Path;

use super::{DatasetError, Result};

pub const PAD_ID: i64 = 0;
pub const UNK_ID: i64 = 1;

/// Fixed-length token id sequence with a binary mask marking real tokens.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenSequence {
    pub ids: Vec<i64>,
    pub mask: Vec<i64>,
}

/// Whitespace-token vocabulary. Ids 0 and 1 are reserved for padding and
/// unknown tokens; the on-disk format is one token per line with the line
/// number as id.
#[derive(Debug, Clone)]
pub struct Vocabulary {
    ids: BTreeMap<String, i64>,
    tokens: Vec<String>,
}

impl Vocabulary {
    pub fn new() -> Self {
        let tokens = vec!["<pad>".to_string(), "<unk>".to_string()];
        let mut ids = BTreeMap::new();
        ids.insert(tokens[0].clone(), PAD_ID);
        ids.insert(tokens[1].clone(), UNK_ID);
        Self { ids, tokens }
    }

    /// Build from an explicit token list; the position in the list is the
    /// id, so the first two entries are the pad and unknown tokens.
    pub fn from_tokens(tokens: Vec<String>) -> Self {
        let ids = tokens
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as i64))
            .collect();
        Self { ids, tokens }
    }

    /// Build from a corpus: tokens are added in first-seen order, which
    /// keeps vocabularies deterministic across runs.
    pub fn build<'t>(texts: impl IntoIterator<Item = &'t str>) -> Self {
        let mut vocab = Self::new();
        for text in texts {
            for token in text.split_whitespace() {
                vocab.add(token);
            }
        }
        vocab
    }

    pub fn add(&mut self, token: &str) -> i64 {
        if let Some(&id) = self.ids.get(token) {
            return id;
        }
        let id = self.tokens.len() as i64;
        self.tokens.push(token.to_string());
        self.ids.insert(token.to_string(), id);
        id
    }

    pub fn id_of(&self, token: &str) -> i64 {
        self.ids.get(token).copied().unwrap_or(UNK_ID)
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        // the two reserved ids do not count as content
        self.tokens.len() <= 2
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.tokens.join("\n")).map_err(|source| DatasetError::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let raw = std::fs::read_to_string(path).map_err(|source| DatasetError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let tokens: Vec<String> = raw.lines().map(|l| l.to_string()).collect();
        if tokens.len() < 2 {
            return Err(DatasetError::Parse {
                path: path.to_path_buf(),
                detail: "vocabulary file must reserve lines 0 and 1 for pad/unknown".into(),
            });
        }
        let ids = tokens
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as i64))
            .collect();
        Ok(Self { ids, tokens })
    }
}

impl Default for Vocabulary {
    fn default() -> Self {
        Self::new()
    }
}

/// Whitespace tokenizer: map tokens through the vocabulary (unknown -> unk
/// id), truncate or pad to `max_len`, mask marks real tokens.
pub fn reference_tokenize(text: &str, vocab: &Vocabulary, max_len: usize) -> Result<TokenSequence> {
    if max_len == 0 {
        return Err(DatasetError::BadMaxLen);
    }
    if vocab.is_empty() {
        return Err(DatasetError::EmptyVocabulary);
    }
    let mut ids = Vec::with_capacity(max_len);
    let mut mask = Vec::with_capacity(max_len);
    for token in text.split_whitespace().take(max_len) {
        ids.push(vocab.id_of(token));
        mask.push(1);
    }
    while ids.len() < max_len {
        ids.push(PAD_ID);
        mask.push(0);
    }
    Ok(TokenSequence { ids, mask })
}
