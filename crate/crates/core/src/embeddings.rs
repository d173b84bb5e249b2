//! Word-embedding tables in the word2vec text format, tokenization, and
//! sentence-to-group conversion.
//!
//! The text format is a header line `V d` followed by one entry per line: a
//! token and `d` decimal numbers, space separated, UTF-8. A file whose first
//! line is not a two-integer header is read as headerless (GloVe style) and
//! the dimension is taken from the first entry. Files ending in `.gz` are
//! decompressed on the fly.

use std::collections::hash_map::Entry;
use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use flate2::read::MultiGzDecoder;

use crate::error::{Error, Result};
use crate::linalg::VectorGroup;

#[derive(Debug, Clone)]
pub struct EmbeddingTable {
    dim: usize,
    tokens: Vec<String>,
    vectors: Vec<f64>,
    index: HashMap<String, usize>,
    duplicates: usize,
}

impl EmbeddingTable {
    /// Builds a table in memory. Later duplicates of a token are dropped.
    pub fn from_entries<S, V>(dim: usize, entries: impl IntoIterator<Item = (S, V)>) -> Result<Self>
    where
        S: Into<String>,
        V: AsRef<[f64]>,
    {
        let mut table = EmbeddingTable::empty(dim);
        for (token, vector) in entries {
            let token = token.into();
            let vector = vector.as_ref();
            if token.is_empty() {
                return Err(Error::Empty("embedding token"));
            }
            if vector.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    actual: vector.len(),
                });
            }
            if let Some(index) = vector.iter().position(|x| !x.is_finite()) {
                return Err(Error::NonFinite { index });
            }
            table.insert(token, vector);
        }
        Ok(table)
    }

    fn empty(dim: usize) -> Self {
        EmbeddingTable {
            dim,
            tokens: Vec::new(),
            vectors: Vec::new(),
            index: HashMap::new(),
            duplicates: 0,
        }
    }

    fn insert(&mut self, token: String, vector: &[f64]) {
        match self.index.entry(token) {
            Entry::Occupied(_) => self.duplicates += 1,
            Entry::Vacant(slot) => {
                self.tokens.push(slot.key().clone());
                slot.insert(self.tokens.len() - 1);
                self.vectors.extend_from_slice(vector);
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Vocabulary size.
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Entries dropped because their token had already been seen.
    pub fn duplicates(&self) -> usize {
        self.duplicates
    }

    pub fn get(&self, token: &str) -> Option<&[f64]> {
        self.index
            .get(token)
            .map(|&i| &self.vectors[i * self.dim..(i + 1) * self.dim])
    }

    /// Entries in load order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, &[f64])> + '_ {
        self.tokens
            .iter()
            .zip(self.vectors.chunks_exact(self.dim))
            .map(|(t, v)| (t.as_str(), v))
    }

    /// Writes the table in the text format. Numbers use the shortest
    /// representation that parses back to the same `f64`.
    pub fn write_text<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{} {}", self.len(), self.dim)?;
        for (token, vector) in self.iter() {
            write!(out, "{token}")?;
            for x in vector {
                write!(out, " {x}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

/// Loads at most `limit` distinct entries from `path`.
pub fn load_embeddings(path: impl AsRef<Path>, limit: Option<usize>) -> Result<EmbeddingTable> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let is_gzip = path
        .extension()
        .is_some_and(|ext| ext.eq_ignore_ascii_case("gz"));
    if is_gzip {
        read_embeddings(BufReader::new(MultiGzDecoder::new(file)), path, limit)
    } else {
        read_embeddings(BufReader::new(file), path, limit)
    }
}

/// Reads the text format from any buffered reader. `source` is only used in
/// error messages.
pub fn read_embeddings<R: BufRead>(
    reader: R,
    source: impl AsRef<Path>,
    limit: Option<usize>,
) -> Result<EmbeddingTable> {
    let source = source.as_ref();
    let parse_err = |line: usize, message: String| Error::Parse {
        path: source.to_path_buf(),
        line,
        message,
    };

    let mut table: Option<EmbeddingTable> = None;
    let mut row = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        if limit.is_some_and(|l| table.as_ref().is_some_and(|t| t.len() >= l)) {
            break;
        }
        let line = line.map_err(|e| Error::io(source, e))?;
        let mut fields = line.split_whitespace();
        let Some(token) = fields.next() else { continue };

        if lineno == 1 {
            let rest: Vec<&str> = line.split_whitespace().skip(1).collect();
            if rest.len() == 1 {
                if let (Ok(_), Ok(dim)) = (token.parse::<usize>(), rest[0].parse::<usize>()) {
                    if dim == 0 {
                        return Err(parse_err(lineno, "header declares dimension 0".into()));
                    }
                    table = Some(EmbeddingTable::empty(dim));
                    continue;
                }
            }
        }

        row.clear();
        for field in fields {
            let x: f64 = field
                .parse()
                .map_err(|_| parse_err(lineno, format!("cannot parse {field:?} as a number")))?;
            if !x.is_finite() {
                return Err(parse_err(lineno, format!("non-finite component {field:?}")));
            }
            row.push(x);
        }
        let table = table.get_or_insert_with(|| EmbeddingTable::empty(row.len()));
        if row.len() != table.dim || row.is_empty() {
            return Err(parse_err(
                lineno,
                format!(
                    "expected {} numbers after token {token:?}, found {}",
                    table.dim,
                    row.len()
                ),
            ));
        }
        table.insert(token.to_owned(), &row);
    }

    match table {
        Some(t) if !t.is_empty() => Ok(t),
        _ => Err(Error::EmptyTable(source.to_path_buf())),
    }
}

/// Lowercases (Unicode aware) and splits on every character that is not
/// alphanumeric. Empty pieces are dropped.
pub fn tokenize(text: &str) -> Vec<String> {
    text.to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_owned)
        .collect()
}

/// A sentence's vector group and the bookkeeping of which tokens made it in.
#[derive(Debug, Clone)]
pub struct SentenceVectors {
    pub group: VectorGroup,
    /// One entry per row of `group`, in order.
    pub matched: Vec<String>,
    /// Tokens without a usable embedding, in order.
    pub missing: Vec<String>,
}

/// Looks every token up in `table`. With `dedup`, a repeated token adds one
/// row. Tokens that are absent, or whose stored vector is all zeros, are
/// listed in `missing` and never contribute a row.
pub fn sentence_to_group<S: AsRef<str>>(
    tokens: &[S],
    table: &EmbeddingTable,
    dedup: bool,
) -> Result<SentenceVectors> {
    let mut matched: Vec<String> = Vec::new();
    let mut missing: Vec<String> = Vec::new();
    let mut data = Vec::new();
    for token in tokens {
        let token = token.as_ref();
        match table.get(token).filter(|v| v.iter().any(|&x| x != 0.0)) {
            Some(v) => {
                if dedup && matched.iter().any(|m| m == token) {
                    continue;
                }
                matched.push(token.to_owned());
                data.extend_from_slice(v);
            }
            None => {
                if dedup && missing.iter().any(|m| m == token) {
                    continue;
                }
                missing.push(token.to_owned());
            }
        }
    }
    if matched.is_empty() {
        return Err(Error::EmptySentenceGroup { missing });
    }
    Ok(SentenceVectors {
        group: VectorGroup::from_flat(table.dim(), data)?,
        matched,
        missing,
    })
}
