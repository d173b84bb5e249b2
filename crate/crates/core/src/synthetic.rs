//! Deterministic synthetic paraphrase corpus over an orthogonally coded
//! vocabulary.
//!
//! Each vocabulary word is a scaled standard basis vector, so the projection
//! cosine of a word against a sentence is 1 when the word occurs in it and 0
//! otherwise. SIM of two sentences with word sets `S` and `T` is then
//! `(|S∩T|/|S| + |S∩T|/|T|) / 2`, which lets the generator plant the classes
//! in known bands:
//!
//! | class | construction                                   | SIM          |
//! |-------|------------------------------------------------|--------------|
//! | 1     | same words reordered, maybe one extra          | ≥ 0.9        |
//! | 0     | about half the words shared                    | [0.4, 0.5]   |
//! | -1    | at most one word shared                        | ≤ 0.25       |
//!
//! A small share of pairs has one side made only of out-of-vocabulary words;
//! those pairs cannot be scored.

use crate::corpus::{Lcg, PairRecord};
use crate::embeddings::EmbeddingTable;
use crate::Class;

const ONSETS: [&str; 8] = ["ba", "de", "fi", "go", "ku", "la", "me", "no"];
const CODAS: [&str; 8] = ["ran", "sel", "tom", "vik", "wen", "dal", "pim", "sor"];
const OOV: [&str; 6] = ["qua", "xeb", "quix", "xylo", "qet", "xun"];

pub const VOCABULARY_SIZE: usize = ONSETS.len() * CODAS.len();

/// Lower edge of the class-1 band.
pub const PARAPHRASE_MIN: f64 = 0.9;
/// Band of class 0.
pub const UNSURE_RANGE: (f64, f64) = (0.4, 0.5);
/// Upper edge of the class -1 band.
pub const NOT_PARAPHRASE_MAX: f64 = 0.25;

#[derive(Debug, Clone)]
pub struct SyntheticCorpus {
    pub table: EmbeddingTable,
    pub records: Vec<PairRecord>,
}

/// Word `k` of the vocabulary.
pub fn word(k: usize) -> String {
    format!("{}{}", ONSETS[k / CODAS.len()], CODAS[k % CODAS.len()])
}

/// Table with `VOCABULARY_SIZE` words, word `k` = `(1 + k/16)·e_k`.
pub fn orthogonal_table() -> EmbeddingTable {
    let d = VOCABULARY_SIZE;
    EmbeddingTable::from_entries(
        d,
        (0..d).map(|k| {
            let mut v = vec![0.0; d];
            v[k] = 1.0 + k as f64 / 16.0;
            (word(k), v)
        }),
    )
    .expect("generated entries are well formed")
}

struct Gen(Lcg);

impl Gen {
    fn below(&mut self, n: usize) -> usize {
        self.0.below(n)
    }

    fn range(&mut self, lo: usize, hi: usize) -> usize {
        lo + self.below(hi - lo + 1)
    }

    fn chance(&mut self, percent: usize) -> bool {
        self.below(100) < percent
    }

    /// `n` distinct vocabulary indices not in `exclude`.
    fn distinct(&mut self, n: usize, exclude: &[usize]) -> Vec<usize> {
        let mut out = Vec::with_capacity(n);
        while out.len() < n {
            let k = self.below(VOCABULARY_SIZE);
            if !out.contains(&k) && !exclude.contains(&k) {
                out.push(k);
            }
        }
        out
    }

    fn shuffle<T>(&mut self, xs: &mut [T]) {
        for i in (1..xs.len()).rev() {
            let j = self.below(i + 1);
            xs.swap(i, j);
        }
    }

    /// Renders word indices as a sentence: capitalized, sometimes with a
    /// comma, ending in a period. Optionally mixes in OOV noise words.
    fn sentence(&mut self, words: &[usize], noise: bool) -> String {
        let mut tokens: Vec<String> = words.iter().map(|&k| word(k)).collect();
        if noise && self.chance(20) {
            let at = self.below(tokens.len() + 1);
            tokens.insert(at, OOV[self.below(OOV.len())].to_owned());
        }
        if tokens.len() > 3 && self.chance(30) {
            let at = self.range(1, tokens.len() - 2);
            tokens[at].push(',');
        }
        let mut s = tokens.join(" ");
        if let Some(first) = s.get(..1) {
            s = first.to_uppercase() + &s[1..];
        }
        s.push('.');
        s
    }

    fn oov_sentence(&mut self) -> String {
        let n = self.range(2, 4);
        let words: Vec<&str> = (0..n).map(|_| OOV[self.below(OOV.len())]).collect();
        words.join(" ") + "."
    }
}

/// Generates `n` labelled pairs and the matching table.
pub fn orthogonal_corpus(n: usize, seed: u64) -> SyntheticCorpus {
    let mut g = Gen(Lcg(seed ^ 0x5eed_cafe_f00d_d00d));
    let mut records = Vec::with_capacity(n);
    for i in 0..n {
        let roll = g.below(100);
        let gold = if roll < 35 {
            Class::Paraphrase
        } else if roll < 70 {
            Class::Unsure
        } else {
            Class::NotParaphrase
        };
        let (left, right) = match gold {
            Class::Paraphrase => {
                let len = g.range(4, 8);
                let left = g.distinct(len, &[]);
                let mut right = left.clone();
                g.shuffle(&mut right);
                if g.chance(50) {
                    right.extend(g.distinct(1, &left));
                }
                (left, right)
            }
            Class::Unsure => {
                // k shared out of sizes in {2k, 2k+1}: each ratio in [0.4, 0.5]
                let k = g.range(2, 4);
                let shared = g.distinct(k, &[]);
                let extra_l = k + g.below(2);
                let extra_r = k + g.below(2);
                let only_l = g.distinct(extra_l, &shared);
                let exclude: Vec<usize> = shared.iter().chain(&only_l).copied().collect();
                let only_r = g.distinct(extra_r, &exclude);
                let mut left: Vec<usize> = shared.iter().chain(&only_l).copied().collect();
                let mut right: Vec<usize> = shared.iter().chain(&only_r).copied().collect();
                g.shuffle(&mut left);
                g.shuffle(&mut right);
                (left, right)
            }
            Class::NotParaphrase => {
                let len = g.range(4, 8);
                let left = g.distinct(len, &[]);
                let len = g.range(4, 8);
                let mut right = g.distinct(len, &left);
                if g.chance(50) {
                    let i = g.below(right.len());
                    right[i] = left[g.below(left.len())];
                }
                (left, right)
            }
        };
        let oov_side = if g.chance(2) { 1 + g.below(2) } else { 0 };
        let text1 = if oov_side == 1 {
            g.oov_sentence()
        } else {
            g.sentence(&left, true)
        };
        let text2 = if oov_side == 2 {
            g.oov_sentence()
        } else {
            g.sentence(&right, true)
        };
        records.push(PairRecord {
            id: format!("s{:04}", i + 1),
            text1,
            text2,
            gold,
        });
    }
    SyntheticCorpus {
        table: orthogonal_table(),
        records,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{score_pairs, ScoreOptions};

    #[test]
    fn vocabulary_is_unique() {
        let mut words: Vec<String> = (0..VOCABULARY_SIZE).map(word).collect();
        words.sort();
        words.dedup();
        assert_eq!(words.len(), VOCABULARY_SIZE);
        assert!(OOV.iter().all(|w| !words.contains(&w.to_string())));
    }

    #[test]
    fn deterministic() {
        let a = orthogonal_corpus(50, 7);
        let b = orthogonal_corpus(50, 7);
        assert_eq!(a.records, b.records);
        assert_ne!(a.records, orthogonal_corpus(50, 8).records);
    }

    #[test]
    fn classes_land_in_their_bands() {
        let corpus = orthogonal_corpus(600, 42);
        let scored = score_pairs(&corpus.records, &corpus.table, &ScoreOptions::default());
        let mut skipped = 0;
        let mut seen = [0usize; 3];
        for s in &scored {
            let Some(mu) = s.proximity() else {
                skipped += 1;
                continue;
            };
            seen[(s.record.gold.value() + 1) as usize] += 1;
            match s.record.gold {
                Class::Paraphrase => assert!(mu >= PARAPHRASE_MIN - 1e-12, "{mu} {:?}", s.record),
                Class::Unsure => assert!(
                    mu >= UNSURE_RANGE.0 - 1e-12 && mu <= UNSURE_RANGE.1 + 1e-12,
                    "{mu} {:?}",
                    s.record
                ),
                Class::NotParaphrase => {
                    assert!(mu <= NOT_PARAPHRASE_MAX + 1e-12, "{mu} {:?}", s.record)
                }
            }
        }
        assert!(skipped > 0 && skipped < 40, "{skipped}");
        assert!(seen.iter().all(|&c| c > 100), "{seen:?}");
    }
}
