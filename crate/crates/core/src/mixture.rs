//! Conversational negation of word strings.
//!
//! Negating `w₁ … wₙ` yields a weighted mixture over every non-empty negation
//! set `S′ ⊆ {0, …, n−1}`: positions in `S′` carry `CN(wᵢ)`, the rest keep
//! their original meaning. Weights come from a follow-up sentence (word-by-word
//! entailment product) times a size prior `λ^{|S′|−1}`.

use std::sync::Arc;

use itertools::Itertools;
use rayon::prelude::*;

use crate::entailment::{overlap_score, Score};
use crate::error::{Error, Result};
use crate::lexicon::Lexicon;
use crate::negation::{cn_word, NegationConfig};
use crate::operator::Operator;

/// Largest string length accepted; the mixture has `2ⁿ − 1` terms.
pub const MAX_WORDS: usize = 20;
/// Size-prior base used when none is configured.
pub const DEFAULT_LAMBDA: f64 = 0.75;

/// Sorted positions negated in one interpretation.
pub type NegationSet = Vec<usize>;

#[derive(Clone, Debug)]
pub struct Position {
    pub word: String,
    pub lexicon: Arc<Lexicon>,
}

/// Pre-tokenized words, each typed by the lexicon whose space it lives in.
#[derive(Clone, Debug)]
pub struct WordString {
    positions: Vec<Position>,
}

/// Find the single lexicon that knows `word`.
pub fn resolve_word(word: &str, lexicons: &[Arc<Lexicon>]) -> Result<Arc<Lexicon>> {
    let hits: Vec<&Arc<Lexicon>> = lexicons.iter().filter(|l| l.contains(word)).collect();
    match hits.as_slice() {
        [] => Err(Error::UnknownWord(word.to_string())),
        [one] => Ok(Arc::clone(one)),
        many => Err(Error::AmbiguousWord {
            word: word.to_string(),
            lexicons: many.iter().map(|l| l.name().to_string()).collect(),
        }),
    }
}

impl WordString {
    pub fn new(positions: Vec<Position>) -> Result<Self> {
        if positions.is_empty() {
            return Err(Error::TooManyWords { n: 0, max: MAX_WORDS });
        }
        for p in &positions {
            if !p.lexicon.contains(&p.word) {
                return Err(Error::UnknownWord(p.word.clone()));
            }
        }
        Ok(Self { positions })
    }

    /// Resolve whitespace-free words against a set of lexicons.
    pub fn resolve<S: AsRef<str>>(words: &[S], lexicons: &[Arc<Lexicon>]) -> Result<Self> {
        let positions = words
            .iter()
            .map(|w| {
                let word = w.as_ref();
                Ok(Position {
                    word: word.to_string(),
                    lexicon: resolve_word(word, lexicons)?,
                })
            })
            .collect::<Result<_>>()?;
        Self::new(positions)
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn positions(&self) -> &[Position] {
        &self.positions
    }

    pub fn words(&self) -> Vec<&str> {
        self.positions.iter().map(|p| p.word.as_str()).collect()
    }

    pub fn word_operator(&self, i: usize) -> Result<&Operator> {
        let p = &self.positions[i];
        p.lexicon.word_operator(&p.word)
    }

    /// Same length and position-wise identical slot spaces.
    pub fn check_aligned(&self, other: &WordString) -> Result<()> {
        if self.len() != other.len() {
            return Err(Error::Alignment(format!(
                "strings have {} and {} words",
                self.len(),
                other.len()
            )));
        }
        for (i, (a, b)) in self.positions.iter().zip(&other.positions).enumerate() {
            if !a.lexicon.same_space(&b.lexicon) {
                return Err(Error::Alignment(format!(
                    "position {i}: {:?} ({}) and {:?} ({}) live in different spaces",
                    a.word,
                    a.lexicon.name(),
                    b.word,
                    b.lexicon.name()
                )));
            }
        }
        Ok(())
    }
}

/// All non-empty subsets of `0..n`, by size then lexicographically.
pub fn enumerate_negation_sets(n: usize) -> Result<Vec<NegationSet>> {
    if n == 0 || n > MAX_WORDS {
        return Err(Error::TooManyWords { n, max: MAX_WORDS });
    }
    Ok((1..=n).flat_map(|k| (0..n).combinations(k)).collect())
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!("lambda {lambda} must lie in (0, 1]")))
    }
}

fn size_factor(set: &[usize], lambda: f64) -> f64 {
    lambda.powi(set.len() as i32 - 1)
}

/// Normalized `λ^{|S′|−1}` over the given sets.
pub fn size_prior(sets: &[NegationSet], lambda: f64) -> Result<Vec<f64>> {
    check_lambda(lambda)?;
    normalized(sets.iter().map(|s| size_factor(s, lambda)).collect())
}

fn normalized(raw: Vec<f64>) -> Result<Vec<f64>> {
    let total: f64 = raw.iter().sum();
    if !total.is_finite() || total <= 0.0 {
        return Err(Error::InvalidWeight("weights must have a positive finite sum".into()));
    }
    Ok(raw.into_iter().map(|w| w / total).collect())
}

#[derive(Clone, Debug)]
pub struct MixtureTerm {
    pub subset: NegationSet,
    pub weight: f64,
    pub states: Vec<Operator>,
}

/// `Σ_{S′} p_{S′} ⨂ᵢ (CN(wᵢ) if i ∈ S′ else wᵢ)`, kept as its terms.
#[derive(Clone, Debug)]
pub struct NegationMixture {
    terms: Vec<MixtureTerm>,
}

impl NegationMixture {
    pub fn terms(&self) -> &[MixtureTerm] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn weights(&self) -> Vec<f64> {
        self.terms.iter().map(|t| t.weight).collect()
    }

    pub fn term(&self, subset: &[usize]) -> Option<&MixtureTerm> {
        self.terms.iter().find(|t| t.subset == subset)
    }

    /// The weighted meaning at one position, summed over all interpretations.
    pub fn position_marginal(&self, position: usize) -> Result<Operator> {
        let terms: Vec<(f64, &Operator)> = self.terms.iter().map(|t| (t.weight, &t.states[position])).collect();
        Operator::mix(&terms)
    }
}

/// `CN(wᵢ)` for every position, `None` where the negation vanishes.
fn word_negations(s: &WordString, cfg: &NegationConfig) -> Result<Vec<Option<Operator>>> {
    s.positions
        .iter()
        .map(|p| match cn_word(&p.word, &p.lexicon, cfg) {
            Ok(op) => Ok(Some(op)),
            Err(Error::ZeroNegation { .. }) => Ok(None),
            Err(e) => Err(e),
        })
        .collect()
}

/// State tuple of one interpretation, or the first position whose negation vanishes.
fn interpretation(
    s: &WordString,
    negations: &[Option<Operator>],
    subset: &[usize],
) -> Result<std::result::Result<Vec<Operator>, usize>> {
    let mut states = Vec::with_capacity(s.len());
    for (i, negation) in negations.iter().enumerate() {
        if subset.contains(&i) {
            match negation {
                Some(op) => states.push(op.clone()),
                None => return Ok(Err(i)),
            }
        } else {
            states.push(s.word_operator(i)?.clone());
        }
    }
    Ok(Ok(states))
}

/// Build the negation mixture for explicit per-subset weights (canonical order,
/// renormalized). Zero-weight interpretations whose negation vanishes keep a
/// zero operator in that slot.
pub fn cn_string(s: &WordString, weights: &[f64], cfg: &NegationConfig) -> Result<NegationMixture> {
    let sets = enumerate_negation_sets(s.len())?;
    if weights.len() != sets.len() {
        return Err(Error::InvalidWeight(format!(
            "expected {} weights for {} words, got {}",
            sets.len(),
            s.len(),
            weights.len()
        )));
    }
    if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
        return Err(Error::InvalidWeight(format!("weight {w} must be nonnegative")));
    }
    let weights = normalized(weights.to_vec())?;
    let negations = word_negations(s, cfg)?;
    let mut terms = Vec::with_capacity(sets.len());
    for (subset, weight) in sets.into_iter().zip(weights) {
        let states = match interpretation(s, &negations, &subset)? {
            Ok(states) => states,
            Err(i) if weight > 0.0 => {
                return Err(Error::ZeroNegationInSubset {
                    word: s.positions[i].word.clone(),
                    subset,
                })
            }
            Err(_) => (0..s.len())
                .map(|i| match (&negations[i], subset.contains(&i)) {
                    (Some(op), true) => Ok(op.clone()),
                    (None, true) => Ok(Operator::zeros(s.positions[i].lexicon.space_dim())),
                    (_, false) => s.word_operator(i).cloned(),
                })
                .collect::<Result<_>>()?,
        };
        terms.push(MixtureTerm { subset, weight, states });
    }
    Ok(NegationMixture { terms })
}

/// `Πᵢ overlap(statesᵢ, targetᵢ)`.
pub fn string_score(states: &[Operator], target: &WordString, sigma: f64) -> Result<Score> {
    if states.len() != target.len() {
        return Err(Error::Alignment(format!(
            "{} states compared against {} target words",
            states.len(),
            target.len()
        )));
    }
    let mut product = 1.0;
    for (i, (state, pos)) in states.iter().zip(target.positions()).enumerate() {
        if state.dim() != pos.lexicon.space_dim() {
            return Err(Error::Alignment(format!(
                "position {i}: state of dimension {} cannot be compared with {:?} ({})",
                state.dim(),
                pos.word,
                pos.lexicon.name()
            )));
        }
        product *= overlap_score(state, &pos.word, &pos.lexicon, sigma)?.value();
    }
    Ok(Score::new(product))
}

/// Unweighted entailment of every interpretation of `¬s` against `target`,
/// in canonical subset order. Interpretations with a vanishing negation score 0.
pub fn interpretation_scores(
    s: &WordString,
    target: &WordString,
    sigma: f64,
    cfg: &NegationConfig,
) -> Result<Vec<(NegationSet, Score)>> {
    s.check_aligned(target)?;
    let sets = enumerate_negation_sets(s.len())?;
    let negations = word_negations(s, cfg)?;
    sets.into_par_iter()
        .map(|subset| {
            let score = match interpretation(s, &negations, &subset)? {
                Ok(states) => string_score(&states, target, sigma)?,
                Err(_) => Score::ZERO,
            };
            Ok((subset, score))
        })
        .collect()
}

/// Per-subset weights `∝ λ^{|S′|−1} · string_score`, falling back to the size
/// prior alone when no interpretation entails the context at all.
pub fn derive_weights(
    s: &WordString,
    context: &WordString,
    lambda: f64,
    sigma: f64,
    cfg: &NegationConfig,
) -> Result<Vec<f64>> {
    check_lambda(lambda)?;
    let scored = interpretation_scores(s, context, sigma, cfg)?;
    let raw: Vec<f64> = scored
        .iter()
        .map(|(set, score)| size_factor(set, lambda) * score.value())
        .collect();
    if raw.iter().all(|w| *w <= 0.0) {
        let sets: Vec<NegationSet> = scored.into_iter().map(|(s, _)| s).collect();
        return size_prior(&sets, lambda);
    }
    normalized(raw)
}

/// The interpretation of `¬s` that best entails `target`, size prior included.
/// Ties go to the earliest subset in canonical order.
pub fn best_interpretation(
    s: &WordString,
    target: &WordString,
    lambda: f64,
    sigma: f64,
    cfg: &NegationConfig,
) -> Result<(NegationSet, Score)> {
    check_lambda(lambda)?;
    let scored = interpretation_scores(s, target, sigma, cfg)?;
    let mut best: Option<(NegationSet, f64)> = None;
    for (set, score) in scored {
        let value = size_factor(&set, lambda) * score.value();
        if best.as_ref().is_none_or(|(_, b)| value > *b) {
            best = Some((set, value));
        }
    }
    let (set, value) = best.expect("at least one negation set");
    Ok((set, Score::new(value)))
}
