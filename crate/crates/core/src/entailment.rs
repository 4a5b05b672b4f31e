//! Graded entailment between operators.
//!
//! Two measures are provided. [`loewner_k`] is the largest `k` with
//! `B − k·A ⪰ 0`. [`overlap_score`] reads `A` as a probability mixture and
//! asks how much of it a (smoothed) predicate for `B` accepts; it is the
//! measure used for negation weights and alternative ranking.

use std::fmt;

use crate::error::{Error, Result};
use crate::lexicon::Lexicon;
use crate::operator::{Normalization, Operator, ZERO_TOL};

/// Projector residual above which `support(A) ⊄ support(B)`.
pub const SUPPORT_TOL: f64 = 1e-8;
/// Default hypernym smoothing strength for [`smoothed_predicate`].
pub const DEFAULT_SIGMA: f64 = 0.5;

const EIGEN_SUPPORT_TOL: f64 = 1e-10;

/// An entailment grade clamped to `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Default)]
pub struct Score(f64);

impl Score {
    pub fn new(value: f64) -> Self {
        Score(if value.is_nan() { 0.0 } else { value.clamp(0.0, 1.0) })
    }

    pub const ZERO: Score = Score(0.0);
    pub const ONE: Score = Score(1.0);

    pub fn value(self) -> f64 {
        self.0
    }
}

impl fmt::Display for Score {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

/// Unclamped `max{k ≥ 0 : B − k·A ⪰ 0}`. Zero when `A` has support outside `B`.
pub fn loewner_k_raw(a: &Operator, b: &Operator) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimMismatch {
            context: "graded Löwner order operand",
            expected: a.dim(),
            found: b.dim(),
        });
    }
    if a.is_zero() {
        return Err(Error::ZeroOperator("graded Löwner order of the zero operator"));
    }
    // residual of A outside support(B), measured on unit-trace A
    let unit = a.normalize(Normalization::Trace)?;
    let support = b.support_projector(EIGEN_SUPPORT_TOL);
    let outside = Operator::identity(b.dim()).entries() - support.entries();
    let residual = &outside * unit.entries() * &outside;
    if residual.iter().any(|v| v.abs() > SUPPORT_TOL) {
        return Ok(0.0);
    }
    let root = b.pseudoinverse(EIGEN_SUPPORT_TOL)?.sqrt();
    let m = Operator::trusted(
        root.entries() * a.entries() * root.entries(),
        Vec::new(),
    );
    let top = m.max_eigenvalue();
    if top <= ZERO_TOL {
        return Ok(0.0);
    }
    Ok(1.0 / top)
}

/// Graded Löwner entailment `A ⊑ B` clamped to `[0, 1]`.
pub fn loewner_k(a: &Operator, b: &Operator) -> Result<Score> {
    loewner_k_raw(a, b).map(Score::new)
}

/// Sup-normalized `P_B + sigma·wc_B`.
pub fn smoothed_predicate(word: &str, lex: &Lexicon, sigma: f64) -> Result<Operator> {
    if !sigma.is_finite() || sigma < 0.0 {
        return Err(Error::InvalidConfig(format!("sigma {sigma} must be nonnegative")));
    }
    let p = lex.word_operator(word)?;
    if sigma == 0.0 {
        return Ok(p.clone());
    }
    let wc = lex.worldly_context(word)?;
    Operator::mix(&[(1.0, p), (sigma, wc)])?.normalize(Normalization::Sup)
}

/// `Tr(ρ_A · predicate)` with `ρ_A` the trace-normalized `A`.
pub fn overlap_with_predicate(a: &Operator, predicate: &Operator) -> Result<Score> {
    let rho = a.normalize(Normalization::Trace)?;
    Ok(Score::new(rho.trace_product(predicate)?))
}

/// How much of the mixture `A` is consistent with the word `B`.
pub fn overlap_score(a: &Operator, word: &str, lex: &Lexicon, sigma: f64) -> Result<Score> {
    let predicate = smoothed_predicate(word, lex, sigma)?;
    if a.dim() != predicate.dim() {
        return Err(Error::DimMismatch {
            context: "overlap score operand",
            expected: predicate.dim(),
            found: a.dim(),
        });
    }
    overlap_with_predicate(a, &predicate)
}
