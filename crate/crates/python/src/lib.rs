//! Python bindings for `convneg`.

use std::sync::Arc;

use ::convneg as core;
use core::mixture::{interpretation_scores, size_prior};
use core::text::ActorWeights;
use core::{Composition, LogicalNegation, NegationConfig, Normalization};
use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;

fn err(e: core::Error) -> PyErr {
    match e {
        core::Error::Io { .. } => PyOSError::new_err(e.to_string()),
        e => PyValueError::new_err(e.to_string()),
    }
}

trait IntoPy<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> IntoPy<T> for core::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(err)
    }
}

fn normalization(view: &str) -> PyResult<Normalization> {
    match view {
        "trace" => Ok(Normalization::Trace),
        "sup" => Ok(Normalization::Sup),
        other => Err(PyValueError::new_err(format!("InvalidConfig: unknown normalization {other:?}"))),
    }
}

fn config(neg: &str, comp: &str, sigma: f64, view: &str) -> PyResult<NegationConfig> {
    Ok(NegationConfig {
        logical: neg.parse::<LogicalNegation>().py()?,
        composition: comp.parse::<Composition>().py()?,
        view: normalization(view)?,
        sigma,
        ..NegationConfig::default()
    })
}

/// Real symmetric positive semidefinite operator.
#[pyclass(name = "Operator", module = "convneg", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyOperator {
    inner: core::Operator,
}

impl From<core::Operator> for PyOperator {
    fn from(inner: core::Operator) -> Self {
        PyOperator { inner }
    }
}

#[pymethods]
impl PyOperator {
    #[new]
    #[pyo3(signature = (rows, labels = Vec::new()))]
    fn new(rows: Vec<Vec<f64>>, labels: Vec<String>) -> PyResult<Self> {
        let op = core::Operator::from_rows(&rows).py()?;
        Ok(op.with_labels(labels).py()?.into())
    }

    #[staticmethod]
    fn diagonal(values: Vec<f64>) -> PyResult<Self> {
        Ok(core::Operator::from_diagonal(&values).py()?.into())
    }

    #[staticmethod]
    fn identity(dim: usize) -> Self {
        core::Operator::identity(dim).into()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn labels(&self) -> Vec<String> {
        self.inner.labels().to_vec()
    }

    fn rows(&self) -> Vec<Vec<f64>> {
        self.inner.rows()
    }

    fn diag(&self) -> Vec<f64> {
        self.inner.diagonal()
    }

    fn trace(&self) -> f64 {
        self.inner.trace()
    }

    fn eigenvalues(&self) -> Vec<f64> {
        self.inner.eigenvalues()
    }

    fn tensor(&self, other: &PyOperator) -> Self {
        self.inner.tensor(&other.inner).into()
    }

    fn partial_trace(&self, dims: Vec<usize>, keep: usize) -> PyResult<Self> {
        let shape = core::SubsystemShape::new(dims).py()?;
        Ok(self.inner.partial_trace(&shape, keep).py()?.into())
    }

    fn hadamard(&self, other: &PyOperator) -> PyResult<Self> {
        Ok(self.inner.hadamard(&other.inner).py()?.into())
    }

    fn conjugate_update(&self, effect: &PyOperator) -> PyResult<Self> {
        Ok(self.inner.conjugate_update(&effect.inner).py()?.into())
    }

    #[pyo3(signature = (mode = "trace"))]
    fn normalize(&self, mode: &str) -> PyResult<Self> {
        Ok(self.inner.normalize(normalization(mode)?).py()?.into())
    }

    #[pyo3(signature = (tol = 1e-10))]
    fn pseudoinverse(&self, tol: f64) -> PyResult<Self> {
        Ok(self.inner.pseudoinverse(tol).py()?.into())
    }

    fn sqrt(&self) -> Self {
        self.inner.sqrt().into()
    }

    #[pyo3(signature = (other, tol = 1e-9))]
    fn approx_eq(&self, other: &PyOperator, tol: f64) -> bool {
        self.inner.approx_eq(&other.inner, tol)
    }

    fn __repr__(&self) -> String {
        format!("Operator(dim={}, trace={})", self.inner.dim(), self.inner.trace())
    }
}

/// Word operators and worldly contexts over one taxonomy's leaf space.
#[pyclass(name = "Lexicon", module = "convneg", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyLexicon {
    inner: Arc<core::Lexicon>,
}

impl From<core::Lexicon> for PyLexicon {
    fn from(lex: core::Lexicon) -> Self {
        PyLexicon { inner: Arc::new(lex) }
    }
}

#[pymethods]
impl PyLexicon {
    /// Build from a `child<TAB>parent` file, or load a saved lexicon.
    #[staticmethod]
    #[pyo3(signature = (path, decay = core::lexicon::DEFAULT_DECAY))]
    fn open(path: &str, decay: f64) -> PyResult<Self> {
        Ok(core::Lexicon::load_any(path, decay).py()?.into())
    }

    #[staticmethod]
    #[pyo3(signature = (name, tsv, decay = core::lexicon::DEFAULT_DECAY))]
    fn from_tsv(name: &str, tsv: &str, decay: f64) -> PyResult<Self> {
        let tax = core::Taxonomy::parse(tsv).py()?;
        Ok(core::Lexicon::build(name, tax, decay).py()?.into())
    }

    fn save(&self, path: &str) -> PyResult<()> {
        self.inner.save(path).py()
    }

    #[getter]
    fn name(&self) -> String {
        self.inner.name().to_string()
    }

    #[getter]
    fn leaves(&self) -> Vec<String> {
        self.inner.leaves().to_vec()
    }

    #[getter]
    fn concepts(&self) -> Vec<String> {
        self.inner.taxonomy().concepts().to_vec()
    }

    fn word_operator(&self, word: &str) -> PyResult<PyOperator> {
        Ok(self.inner.word_operator(word).py()?.clone().into())
    }

    fn worldly_context(&self, word: &str) -> PyResult<PyOperator> {
        Ok(self.inner.worldly_context(word).py()?.clone().into())
    }

    fn hypernyms(&self, word: &str) -> PyResult<Vec<(String, usize)>> {
        self.inner.hypernyms(word).py()
    }

    fn __repr__(&self) -> String {
        format!("Lexicon({:?}, dim={})", self.inner.name(), self.inner.space_dim())
    }
}

fn lexicon_arcs(lexicons: &[PyRef<'_, PyLexicon>]) -> Vec<Arc<core::Lexicon>> {
    lexicons.iter().map(|l| Arc::clone(&l.inner)).collect()
}

/// Subset labels, weight and (when a follow-up is given) score.
type StringRow = (Vec<String>, f64, Option<f64>);

fn labels(words: &[&str], subset: &[usize]) -> Vec<String> {
    subset.iter().map(|&k| words[k].to_string()).collect()
}

/// Text circuit of actors, attribute gates and verb gates.
#[pyclass(name = "TextCircuit", module = "convneg", frozen)]
struct PyTextCircuit {
    inner: core::TextCircuit,
}

#[pymethods]
impl PyTextCircuit {
    #[new]
    fn new(script: &str, lexicons: Vec<PyRef<'_, PyLexicon>>) -> PyResult<Self> {
        Ok(PyTextCircuit {
            inner: core::TextCircuit::parse(script, lexicon_arcs(&lexicons)).py()?,
        })
    }

    #[getter]
    fn actors(&self) -> Vec<String> {
        self.inner.actors().iter().map(|a| a.name.clone()).collect()
    }

    fn contributing_words(&self, actor: &str) -> PyResult<Vec<String>> {
        Ok(self.inner.contributing_words(actor).py()?.into_iter().map(|s| s.label).collect())
    }

    fn composed_state(&self, actor: &str) -> PyResult<PyOperator> {
        Ok(self.inner.composed_state(actor).py()?.into())
    }

    fn marginal(&self, actor: &str, lexicon: &str) -> PyResult<PyOperator> {
        Ok(self.inner.marginal(actor, lexicon).py()?.into())
    }

    /// `(subset labels, weight)` per negation set of the actor.
    #[pyo3(signature = (actor, context = None, lam = core::mixture::DEFAULT_LAMBDA, sigma = 0.5, neg = "complement", comp = "hadamard"))]
    fn negate(
        &self,
        actor: &str,
        context: Option<Vec<String>>,
        lam: f64,
        sigma: f64,
        neg: &str,
        comp: &str,
    ) -> PyResult<Vec<(Vec<String>, f64)>> {
        let cfg = config(neg, comp, sigma, "sup")?;
        let weights = match context {
            Some(words) => ActorWeights::Context { words, lambda: lam, sigma },
            None => ActorWeights::SizePrior { lambda: lam },
        };
        let negation = self.inner.cn_actor(actor, &weights, &cfg).py()?;
        let words: Vec<&str> = negation.contributions.iter().map(|s| s.label.as_str()).collect();
        Ok(negation
            .mixture
            .terms()
            .iter()
            .map(|t| (labels(&words, &t.subset), t.weight))
            .collect())
    }

    /// `(actor, best subset labels, score)` sorted by score.
    #[pyo3(signature = (actor, lam = core::mixture::DEFAULT_LAMBDA, sigma = 0.5, neg = "complement", comp = "hadamard"))]
    fn rank_alternatives(
        &self,
        actor: &str,
        lam: f64,
        sigma: f64,
        neg: &str,
        comp: &str,
    ) -> PyResult<Vec<(String, Vec<String>, f64)>> {
        let cfg = config(neg, comp, sigma, "sup")?;
        Ok(self
            .inner
            .rank_alternatives(actor, &cfg, lam, sigma)
            .py()?
            .into_iter()
            .map(|r| (r.actor, r.subset_labels, r.score.value()))
            .collect())
    }
}

#[pyfunction]
#[pyo3(signature = (word, lexicon, neg = "complement", comp = "hadamard", view = "sup"))]
fn cn_word(word: &str, lexicon: &PyLexicon, neg: &str, comp: &str, view: &str) -> PyResult<PyOperator> {
    let cfg = config(neg, comp, 0.5, view)?;
    Ok(core::cn_word(word, &lexicon.inner, &cfg).py()?.into())
}

#[pyfunction]
#[pyo3(signature = (word, lexicon, top = 3, sigma = 0.5, neg = "complement", comp = "hadamard"))]
fn alternatives(
    word: &str,
    lexicon: &PyLexicon,
    top: usize,
    sigma: f64,
    neg: &str,
    comp: &str,
) -> PyResult<Vec<(String, f64)>> {
    let cfg = config(neg, comp, sigma, "sup")?;
    Ok(core::alternatives(word, &lexicon.inner, &cfg, top)
        .py()?
        .into_iter()
        .map(|(w, s)| (w, s.value()))
        .collect())
}

#[pyfunction]
fn loewner_k(a: &PyOperator, b: &PyOperator) -> PyResult<f64> {
    Ok(core::loewner_k(&a.inner, &b.inner).py()?.value())
}

#[pyfunction]
#[pyo3(signature = (a, word, lexicon, sigma = 0.5))]
fn overlap_score(a: &PyOperator, word: &str, lexicon: &PyLexicon, sigma: f64) -> PyResult<f64> {
    Ok(core::overlap_score(&a.inner, word, &lexicon.inner, sigma).py()?.value())
}

/// `(subset words, weight, score or None)` per negation set of `words`.
#[pyfunction]
#[pyo3(signature = (words, lexicons, follow_up = None, lam = core::mixture::DEFAULT_LAMBDA, sigma = 0.5, neg = "complement", comp = "hadamard"))]
fn negate_string(
    words: Vec<String>,
    lexicons: Vec<PyRef<'_, PyLexicon>>,
    follow_up: Option<Vec<String>>,
    lam: f64,
    sigma: f64,
    neg: &str,
    comp: &str,
) -> PyResult<Vec<StringRow>> {
    let lexicons = lexicon_arcs(&lexicons);
    let cfg = config(neg, comp, sigma, "sup")?;
    let s = core::WordString::resolve(&words, &lexicons).py()?;
    let sets = core::enumerate_negation_sets(s.len()).py()?;
    let (weights, scores) = match follow_up {
        Some(f) => {
            let ctx = core::WordString::resolve(&f, &lexicons).py()?;
            (
                core::derive_weights(&s, &ctx, lam, sigma, &cfg).py()?,
                Some(interpretation_scores(&s, &ctx, sigma, &cfg).py()?),
            )
        }
        None => (size_prior(&sets, lam).py()?, None),
    };
    core::cn_string(&s, &weights, &cfg).py()?;
    let refs: Vec<&str> = words.iter().map(String::as_str).collect();
    Ok(sets
        .iter()
        .enumerate()
        .map(|(i, set)| {
            (
                labels(&refs, set),
                weights[i],
                scores.as_ref().map(|sc| sc[i].1.value()),
            )
        })
        .collect())
}

#[pyfunction]
#[pyo3(signature = (words, target, lexicons, lam = core::mixture::DEFAULT_LAMBDA, sigma = 0.5, neg = "complement", comp = "hadamard"))]
fn best_interpretation(
    words: Vec<String>,
    target: Vec<String>,
    lexicons: Vec<PyRef<'_, PyLexicon>>,
    lam: f64,
    sigma: f64,
    neg: &str,
    comp: &str,
) -> PyResult<(Vec<String>, f64)> {
    let lexicons = lexicon_arcs(&lexicons);
    let cfg = config(neg, comp, sigma, "sup")?;
    let s = core::WordString::resolve(&words, &lexicons).py()?;
    let t = core::WordString::resolve(&target, &lexicons).py()?;
    let (set, score) = core::best_interpretation(&s, &t, lam, sigma, &cfg).py()?;
    let refs: Vec<&str> = words.iter().map(String::as_str).collect();
    Ok((labels(&refs, &set), score.value()))
}

#[pymodule]
fn convneg(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyOperator>()?;
    m.add_class::<PyLexicon>()?;
    m.add_class::<PyTextCircuit>()?;
    m.add_function(wrap_pyfunction!(cn_word, m)?)?;
    m.add_function(wrap_pyfunction!(alternatives, m)?)?;
    m.add_function(wrap_pyfunction!(loewner_k, m)?)?;
    m.add_function(wrap_pyfunction!(overlap_score, m)?)?;
    m.add_function(wrap_pyfunction!(negate_string, m)?)?;
    m.add_function(wrap_pyfunction!(best_interpretation, m)?)?;
    Ok(())
}
