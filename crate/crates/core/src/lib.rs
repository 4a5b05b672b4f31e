//! Conversational negation over positive-operator word meanings.
//!
//! Words are positive operators over the leaf space of a hypernym taxonomy.
//! Negating a word combines a logical negation with the word's worldly context
//! (a weighted mixture of its hypernyms), so the result ranks plausible
//! alternatives instead of denying everything. Strings of words negate to
//! mixtures over negation sets, and actors in a text circuit negate over every
//! word that shaped them.

pub mod cli;
pub mod entailment;
pub mod error;
pub mod lexicon;
pub mod mixture;
pub mod negation;
pub mod operator;
pub mod taxonomy;
pub mod text;

pub use entailment::{loewner_k, overlap_score, smoothed_predicate, Score};
pub use error::{Error, Result};
pub use lexicon::Lexicon;
pub use mixture::{
    best_interpretation, cn_string, derive_weights, enumerate_negation_sets, string_score, NegationMixture,
    NegationSet, WordString,
};
pub use negation::{alternatives, cn_word, Composition, LogicalNegation, NegationConfig};
pub use operator::{Normalization, Operator, SubsystemShape};
pub use taxonomy::Taxonomy;
pub use text::{ActorWeights, TextCircuit};
