//! Word operators and worldly contexts built over a taxonomy's leaf space,
//! plus the `LEXICON v1` store format.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::operator::{Operator, TextLines};
use crate::taxonomy::Taxonomy;

/// Hypernym weight decay used when none is configured.
pub const DEFAULT_DECAY: f64 = 0.5;

const STORE_HEADER: &str = "LEXICON v1";

/// One taxonomy's meaning space: a predicate-view operator and a worldly
/// context for every concept, both diagonal in the leaf basis unless injected
/// through a store file.
#[derive(Clone, Debug, PartialEq)]
pub struct Lexicon {
    name: String,
    taxonomy: Taxonomy,
    decay: f64,
    leaves: Vec<String>,
    word_ops: Vec<Operator>,
    wc_ops: Vec<Operator>,
}

fn check_decay(decay: f64) -> Result<()> {
    if decay > 0.0 && decay < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!("decay {decay} must lie in (0, 1)")))
    }
}

/// Normalized hypernym weights `pᵢ ∝ decay^depthᵢ`.
pub fn hypernym_weights(hypernyms: &[(String, usize)], decay: f64) -> Vec<f64> {
    let raw: Vec<f64> = hypernyms.iter().map(|(_, d)| decay.powi(*d as i32)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / total).collect()
}

impl Lexicon {
    pub fn build(name: impl Into<String>, taxonomy: Taxonomy, decay: f64) -> Result<Self> {
        check_decay(decay)?;
        let leaves: Vec<String> = taxonomy.leaves().iter().map(|s| s.to_string()).collect();
        let dim = leaves.len();
        let mut word_ops = Vec::with_capacity(taxonomy.concepts().len());
        for concept in taxonomy.concepts() {
            let mut diag = vec![0.0; dim];
            for pos in taxonomy.descendant_leaves(concept)? {
                diag[pos] = 1.0;
            }
            word_ops.push(Operator::from_diagonal(&diag)?.with_labels(leaves.clone())?);
        }
        let mut lex = Lexicon {
            name: name.into(),
            taxonomy,
            decay,
            leaves,
            word_ops,
            wc_ops: Vec::new(),
        };
        lex.wc_ops = lex
            .taxonomy
            .concepts()
            .iter()
            .map(|c| lex.worldly_context_with_decay(c, decay))
            .collect::<Result<_>>()?;
        Ok(lex)
    }

    /// Read a taxonomy TSV and build its lexicon, named after the file stem.
    pub fn from_taxonomy_file(path: impl AsRef<Path>, decay: f64) -> Result<Self> {
        let path = path.as_ref();
        Self::build(file_stem(path), Taxonomy::load(path)?, decay)
    }

    /// Accept either a taxonomy TSV or a saved lexicon store.
    pub fn load_any(path: impl AsRef<Path>, decay: f64) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        if text.starts_with(STORE_HEADER) {
            Self::from_store_text(file_stem(path), &text)
        } else {
            Self::build(file_stem(path), Taxonomy::parse(&text)?, decay)
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn taxonomy(&self) -> &Taxonomy {
        &self.taxonomy
    }

    pub fn decay(&self) -> f64 {
        self.decay
    }

    pub fn leaves(&self) -> &[String] {
        &self.leaves
    }

    pub fn space_dim(&self) -> usize {
        self.leaves.len()
    }

    pub fn contains(&self, word: &str) -> bool {
        self.taxonomy.contains(word)
    }

    /// Two lexicons describe the same slot space when their leaf bases agree.
    pub fn same_space(&self, other: &Lexicon) -> bool {
        self.leaves == other.leaves
    }

    pub fn word_operator(&self, word: &str) -> Result<&Operator> {
        Ok(&self.word_ops[self.taxonomy.index_of(word)?])
    }

    pub fn worldly_context(&self, word: &str) -> Result<&Operator> {
        Ok(&self.wc_ops[self.taxonomy.index_of(word)?])
    }

    pub fn hypernyms(&self, word: &str) -> Result<Vec<(String, usize)>> {
        self.taxonomy.hypernyms(word)
    }

    /// Recompute a worldly context under a different decay. Roots get the identity.
    pub fn worldly_context_with_decay(&self, word: &str, decay: f64) -> Result<Operator> {
        check_decay(decay)?;
        let hypernyms = self.taxonomy.hypernyms(word)?;
        if hypernyms.is_empty() {
            return Operator::identity(self.space_dim()).with_labels(self.leaves.clone());
        }
        let weights = hypernym_weights(&hypernyms, decay);
        let ops: Vec<&Operator> = hypernyms
            .iter()
            .map(|(h, _)| self.word_operator(h))
            .collect::<Result<_>>()?;
        let terms: Vec<(f64, &Operator)> = weights.into_iter().zip(ops).collect();
        Operator::mix(&terms)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_store_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_store_text(file_stem(path), &text)
    }

    pub fn to_store_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{STORE_HEADER}");
        let _ = writeln!(out, "DECAY {}", self.decay);
        let _ = writeln!(out, "LEAVES {}", self.leaves.join(","));
        for (c, p) in self.taxonomy.edges() {
            let _ = writeln!(out, "EDGE {c}\t{p}");
        }
        for (i, concept) in self.taxonomy.concepts().iter().enumerate() {
            let _ = writeln!(out, "WORD {concept}");
            out.push_str(&self.word_ops[i].to_text());
            let _ = writeln!(out, "WC {concept}");
            out.push_str(&self.wc_ops[i].to_text());
        }
        out
    }

    pub fn from_store_text(name: impl Into<String>, text: &str) -> Result<Self> {
        let mut lines = TextLines::new(text);
        let (n, header) = lines.require("lexicon header")?;
        if header.trim() != STORE_HEADER {
            return Err(Error::parse(n, format!("expected `{STORE_HEADER}`, found {header:?}")));
        }
        let (n, decay_line) = lines.require("DECAY line")?;
        let decay: f64 = decay_line
            .strip_prefix("DECAY ")
            .and_then(|d| d.trim().parse().ok())
            .ok_or_else(|| Error::parse(n, format!("expected `DECAY <real>`, found {decay_line:?}")))?;
        check_decay(decay).map_err(|e| Error::parse(n, e.to_string()))?;
        let (leaf_line_no, leaf_line) = lines.require("LEAVES line")?;
        let leaves: Vec<String> = leaf_line
            .strip_prefix("LEAVES ")
            .ok_or_else(|| Error::parse(leaf_line_no, format!("expected `LEAVES ...`, found {leaf_line:?}")))?
            .split(',')
            .map(|s| s.trim().to_string())
            .collect();

        let mut edges = Vec::new();
        while let Some(line) = lines.peek() {
            let Some(rest) = line.strip_prefix("EDGE ") else { break };
            let (n, _) = lines.next().unwrap();
            let (c, p) = rest
                .split_once('\t')
                .ok_or_else(|| Error::parse(n, format!("expected `EDGE child<TAB>parent`, found {line:?}")))?;
            edges.push((n, c.trim().to_string(), p.trim().to_string()));
        }
        let taxonomy = Taxonomy::from_edges(edges)?;
        if taxonomy.leaves() != leaves.iter().map(String::as_str).collect::<Vec<_>>() {
            return Err(Error::parse(leaf_line_no, "LEAVES does not match the leaves implied by the EDGE lines"));
        }

        let count = taxonomy.concepts().len();
        let mut word_ops: Vec<Option<Operator>> = vec![None; count];
        let mut wc_ops: Vec<Option<Operator>> = vec![None; count];
        while let Some((n, line)) = lines.next_nonblank() {
            let (slot, concept) = if let Some(c) = line.strip_prefix("WORD ") {
                (&mut word_ops, c)
            } else if let Some(c) = line.strip_prefix("WC ") {
                (&mut wc_ops, c)
            } else {
                return Err(Error::parse(n, format!("expected `WORD <name>` or `WC <name>`, found {line:?}")));
            };
            let i = taxonomy
                .index_of(concept.trim())
                .map_err(|e| Error::parse(n, e.to_string()))?;
            let op = Operator::read_block(&mut lines)?;
            if op.dim() != leaves.len() {
                return Err(Error::parse(
                    n,
                    format!("operator for {concept:?} has dimension {}, expected {}", op.dim(), leaves.len()),
                ));
            }
            if slot[i].replace(op).is_some() {
                return Err(Error::parse(n, format!("duplicate block for {concept:?}")));
            }
        }
        let end = text.lines().count();
        let collect = |ops: Vec<Option<Operator>>, kind: &str| -> Result<Vec<Operator>> {
            ops.into_iter()
                .enumerate()
                .map(|(i, op)| {
                    op.ok_or_else(|| {
                        Error::parse(end, format!("missing {kind} block for {:?}", taxonomy.concepts()[i]))
                    })
                })
                .collect()
        };
        let word_ops = collect(word_ops, "WORD")?;
        let wc_ops = collect(wc_ops, "WC")?;
        Ok(Lexicon {
            name: name.into(),
            taxonomy,
            decay,
            leaves,
            word_ops,
            wc_ops,
        })
    }
}

fn file_stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIG1: &str = "hamster\trodent\nguinea_pig\trodent\nrodent\tanimal\ndog\tanimal\nanimal\tentity\nplanet\tentity\n";

    fn fig1() -> Lexicon {
        Lexicon::build("fig1", Taxonomy::parse(FIG1).unwrap(), DEFAULT_DECAY).unwrap()
    }

    fn diag(d: &[f64]) -> Vec<f64> {
        d.to_vec()
    }

    #[test]
    fn word_operators_are_leaf_indicators() {
        let lex = fig1();
        assert_eq!(lex.space_dim(), 4);
        assert_eq!(lex.word_operator("hamster").unwrap().diagonal(), diag(&[1.0, 0.0, 0.0, 0.0]));
        assert_eq!(lex.word_operator("rodent").unwrap().diagonal(), diag(&[1.0, 1.0, 0.0, 0.0]));
        assert_eq!(lex.word_operator("entity").unwrap().diagonal(), diag(&[1.0; 4]));
        assert!(lex.word_operator("rodent").unwrap().is_diagonal());
        assert!(matches!(lex.word_operator("cat"), Err(Error::UnknownWord(_))));
    }

    #[test]
    fn worldly_contexts() {
        let lex = fig1();
        let wc = lex.worldly_context("hamster").unwrap();
        let expected = [1.0, 1.0, 3.0 / 7.0, 1.0 / 7.0];
        for (a, b) in wc.diagonal().iter().zip(expected) {
            assert!((a - b).abs() < 1e-15);
        }
        assert_eq!(lex.worldly_context("entity").unwrap(), &Operator::identity(4).with_labels(lex.leaves().to_vec()).unwrap());
        let two = Lexicon::build("two", Taxonomy::parse("a\troot\nb\troot\n").unwrap(), 0.5).unwrap();
        assert_eq!(two.worldly_context("a").unwrap().diagonal(), vec![1.0, 1.0]);
    }

    #[test]
    fn weights_follow_depth() {
        let lex = fig1();
        let w = hypernym_weights(&lex.hypernyms("hamster").unwrap(), 0.5);
        let expected = [4.0 / 7.0, 2.0 / 7.0, 1.0 / 7.0];
        for (a, b) in w.iter().zip(expected) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn decay_is_validated() {
        let t = Taxonomy::parse(FIG1).unwrap();
        assert!(Lexicon::build("x", t.clone(), 0.0).is_err());
        assert!(Lexicon::build("x", t, 1.0).is_err());
    }

    #[test]
    fn store_round_trip() {
        let lex = Lexicon::build("fig1", Taxonomy::parse(FIG1).unwrap(), 0.3).unwrap();
        let text = lex.to_store_text();
        let back = Lexicon::from_store_text("fig1", &text).unwrap();
        assert_eq!(back, lex);
        assert_eq!(back.to_store_text(), text);
    }

    #[test]
    fn store_rejects_bad_files() {
        let text = fig1().to_store_text();
        let truncated: String = text.lines().take(20).collect::<Vec<_>>().join("\n");
        assert!(matches!(Lexicon::from_store_text("x", &truncated), Err(Error::Parse { .. })));
        // flip one diagonal entry of the first WORD block negative
        let corrupted = text.replacen("\n1 0 0 0\n", "\n-1 0 0 0\n", 1);
        assert_ne!(corrupted, text);
        match Lexicon::from_store_text("x", &corrupted) {
            Err(Error::Parse { message, .. }) => assert!(message.contains("NotPsd")),
            other => panic!("{other:?}"),
        }
        assert!(Lexicon::from_store_text("x", "LEXICON v2\n").is_err());
    }
}
