//! Logical negations and conversational negation of a single word.
//!
//! Conversational negation takes three steps: negate the word's predicate
//! logically, build the word's worldly context, then compose the two so the
//! result weighs plausible alternatives.

use std::fmt;
use std::str::FromStr;

use crate::entailment::{overlap_score, Score, DEFAULT_SIGMA};
use crate::error::{Error, Result};
use crate::lexicon::Lexicon;
use crate::operator::{Normalization, Operator};

/// Largest eigenvalue tolerated by [`logical_not_complement`].
pub const SUBNORMAL_TOL: f64 = 1e-9;
/// Eigenvalue cutoff for the pseudoinverse negation.
pub const DEFAULT_PINV_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum LogicalNegation {
    /// `I − P`
    #[default]
    Complement,
    /// Sup-normalized Moore–Penrose pseudoinverse.
    Pinv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum Composition {
    #[default]
    Hadamard,
    /// `√wc · ¬P · √wc`
    Conjugate,
}

impl FromStr for LogicalNegation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "complement" => Ok(Self::Complement),
            "pinv" => Ok(Self::Pinv),
            other => Err(Error::InvalidConfig(format!("unknown logical negation {other:?}"))),
        }
    }
}

impl FromStr for Composition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hadamard" => Ok(Self::Hadamard),
            "conjugate" => Ok(Self::Conjugate),
            other => Err(Error::InvalidConfig(format!("unknown composition {other:?}"))),
        }
    }
}

impl fmt::Display for LogicalNegation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Complement => "complement",
            Self::Pinv => "pinv",
        })
    }
}

impl fmt::Display for Composition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Hadamard => "hadamard",
            Self::Conjugate => "conjugate",
        })
    }
}

/// The framework's choice points.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NegationConfig {
    pub logical: LogicalNegation,
    pub composition: Composition,
    /// Overrides the lexicon's stored worldly contexts when set.
    pub decay: Option<f64>,
    /// Normalization of the returned negation.
    pub view: Normalization,
    /// Smoothing used when scoring alternatives.
    pub sigma: f64,
    pub pinv_tol: f64,
}

impl Default for NegationConfig {
    fn default() -> Self {
        Self {
            logical: LogicalNegation::Complement,
            composition: Composition::Hadamard,
            decay: None,
            view: Normalization::Sup,
            sigma: DEFAULT_SIGMA,
            pinv_tol: DEFAULT_PINV_TOL,
        }
    }
}

impl fmt::Display for NegationConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}+{}", self.logical, self.composition)?;
        if let Some(d) = self.decay {
            write!(f, " (decay {d})")?;
        }
        Ok(())
    }
}

/// `I − P` for a predicate with largest eigenvalue at most one.
pub fn logical_not_complement(p: &Operator) -> Result<Operator> {
    let top = p.max_eigenvalue();
    if top > 1.0 + SUBNORMAL_TOL {
        return Err(Error::NotSubnormalized { max_eigenvalue: top });
    }
    let complement = Operator::identity(p.dim()).entries() - p.entries();
    Ok(Operator::clamped(complement, p.labels().to_vec()))
}

/// Sup-normalized pseudoinverse.
pub fn logical_not_pinv(a: &Operator, tol: f64) -> Result<Operator> {
    a.pseudoinverse(tol)?.normalize(Normalization::Sup)
}

pub fn logical_not(p: &Operator, cfg: &NegationConfig) -> Result<Operator> {
    match cfg.logical {
        LogicalNegation::Complement => logical_not_complement(p),
        LogicalNegation::Pinv => logical_not_pinv(p, cfg.pinv_tol),
    }
}

pub fn compose(negated: &Operator, context: &Operator, composition: Composition) -> Result<Operator> {
    match composition {
        Composition::Hadamard => negated.hadamard(context),
        Composition::Conjugate => negated.conjugate_update(context),
    }
}

/// Conversational negation of an arbitrary word operator against a worldly
/// context. The input is sup-normalized first, so positive rescaling of it
/// has no effect. Returns `None` when the negation vanishes.
pub fn negate_operator(word_op: &Operator, context: &Operator, cfg: &NegationConfig) -> Result<Option<Operator>> {
    let predicate = word_op.normalize(Normalization::Sup)?;
    let negated = logical_not(&predicate, cfg)?;
    let composed = compose(&negated, context, cfg.composition)?;
    if composed.is_zero() {
        return Ok(None);
    }
    composed.normalize(cfg.view).map(Some)
}

fn context_for(word: &str, lex: &Lexicon, cfg: &NegationConfig) -> Result<Operator> {
    match cfg.decay {
        Some(d) => lex.worldly_context_with_decay(word, d),
        None => lex.worldly_context(word).cloned(),
    }
}

/// Conversational negation `CN(word)` in the configured view.
pub fn cn_word(word: &str, lex: &Lexicon, cfg: &NegationConfig) -> Result<Operator> {
    let p = lex.word_operator(word)?;
    let wc = context_for(word, lex, cfg)?;
    negate_operator(p, &wc, cfg)?.ok_or_else(|| Error::ZeroNegation {
        word: word.to_string(),
        config: cfg.to_string(),
    })
}

/// Rank every leaf of the lexicon against an already negated operator.
pub fn rank_leaves(negation: &Operator, lex: &Lexicon, sigma: f64, top_k: usize) -> Result<Vec<(String, Score)>> {
    if top_k == 0 {
        return Err(Error::InvalidConfig("top_k must be at least 1".into()));
    }
    let mut scored: Vec<(String, Score)> = lex
        .leaves()
        .iter()
        .map(|leaf| Ok((leaf.clone(), overlap_score(negation, leaf, lex, sigma)?)))
        .collect::<Result<_>>()?;
    // stable: ties keep leaf order
    scored.sort_by(|a, b| b.1.value().total_cmp(&a.1.value()));
    scored.truncate(top_k);
    Ok(scored)
}

/// Leaves ranked by how strongly `CN(word)` entails them.
pub fn alternatives(word: &str, lex: &Lexicon, cfg: &NegationConfig, top_k: usize) -> Result<Vec<(String, Score)>> {
    let negation = cn_word(word, lex, cfg)?;
    rank_leaves(&negation, lex, cfg.sigma, top_k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::taxonomy::Taxonomy;

    const FIG1: &str = "hamster\trodent\nguinea_pig\trodent\nrodent\tanimal\ndog\tanimal\nanimal\tentity\nplanet\tentity\n";

    fn lex(text: &str) -> Lexicon {
        Lexicon::build("t", Taxonomy::parse(text).unwrap(), 0.5).unwrap()
    }

    fn diag(d: &[f64]) -> Operator {
        Operator::from_diagonal(d).unwrap()
    }

    fn sigma0() -> NegationConfig {
        NegationConfig { sigma: 0.0, ..Default::default() }
    }

    #[test]
    fn complement_negation() {
        assert_eq!(logical_not_complement(&diag(&[1.0, 0.0, 0.0, 0.0])).unwrap(), diag(&[0.0, 1.0, 1.0, 1.0]));
        assert!(logical_not_complement(&Operator::identity(3)).unwrap().is_zero());
        let p = diag(&[1.0, 0.0, 1.0]);
        let twice = logical_not_complement(&logical_not_complement(&p).unwrap()).unwrap();
        assert!(twice.approx_eq(&p, 1e-12));
        assert!(matches!(
            logical_not_complement(&diag(&[2.0, 0.0])),
            Err(Error::NotSubnormalized { .. })
        ));
    }

    #[test]
    fn pinv_negation() {
        let n = logical_not_pinv(&diag(&[1.0, 0.5, 0.0, 0.0]), 1e-10).unwrap();
        assert_eq!(n, diag(&[0.5, 1.0, 0.0, 0.0]));
        assert_eq!(logical_not_pinv(&Operator::identity(3), 1e-10).unwrap(), Operator::identity(3));
        let a = Operator::from_rows(&[vec![2.0, 0.5], vec![0.5, 1.0]]).unwrap();
        let twice = logical_not_pinv(&logical_not_pinv(&a, 1e-10).unwrap(), 1e-10).unwrap();
        assert!(twice.approx_eq(&a.normalize(Normalization::Sup).unwrap(), 1e-12));
        assert!(logical_not_pinv(&Operator::zeros(2), 1e-10).is_err());
    }

    #[test]
    fn cn_hamster() {
        let l = lex(FIG1);
        let cn = cn_word("hamster", &l, &NegationConfig::default()).unwrap();
        let expected = [0.0, 1.0, 3.0 / 7.0, 1.0 / 7.0];
        for (a, b) in cn.diagonal().iter().zip(expected) {
            assert!((a - b).abs() < 1e-15);
        }
        let conj = NegationConfig { composition: Composition::Conjugate, ..Default::default() };
        assert!(cn_word("hamster", &l, &conj).unwrap().approx_eq(&cn, 1e-15));
        let trace_view = NegationConfig { view: Normalization::Trace, ..Default::default() };
        assert!((cn_word("hamster", &l, &trace_view).unwrap().trace() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn two_leaf_space() {
        let l = lex("a\troot\nb\troot\n");
        assert_eq!(&cn_word("a", &l, &NegationConfig::default()).unwrap(), l.word_operator("b").unwrap());
        assert_eq!(alternatives("a", &l, &sigma0(), 1).unwrap(), vec![("b".to_string(), Score::ONE)]);
    }

    #[test]
    fn root_negation_is_zero() {
        let l = lex(FIG1);
        match cn_word("entity", &l, &NegationConfig::default()) {
            Err(Error::ZeroNegation { word, config }) => {
                assert_eq!(word, "entity");
                assert_eq!(config, "complement+hadamard");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn hamster_alternatives() {
        let l = lex(FIG1);
        let alts = alternatives("hamster", &l, &sigma0(), 3).unwrap();
        let names: Vec<&str> = alts.iter().map(|(n, _)| n.as_str()).collect();
        assert_eq!(names, ["guinea_pig", "dog", "planet"]);
        for ((_, s), e) in alts.iter().zip([7.0 / 11.0, 3.0 / 11.0, 1.0 / 11.0]) {
            assert!((s.value() - e).abs() < 1e-12);
        }
        let all = alternatives("hamster", &l, &sigma0(), 10).unwrap();
        assert_eq!(all.last().unwrap(), &("hamster".to_string(), Score::ZERO));
        assert!(alternatives("hamster", &l, &sigma0(), 0).is_err());
    }

    #[test]
    fn config_parsing() {
        assert_eq!("pinv".parse::<LogicalNegation>().unwrap(), LogicalNegation::Pinv);
        assert_eq!("conjugate".parse::<Composition>().unwrap(), Composition::Conjugate);
        assert!("fuzz".parse::<Composition>().is_err());
    }
}
