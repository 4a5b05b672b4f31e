//! Shared fixtures, generators and the randomized property checks.
//!
//! Each `check_*` function runs its own proptest runner and returns a
//! description of the first failing case, so both the regular test targets
//! and the acceptance runner can drive them.

#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::sync::Arc;

use convneg::mixture::{size_prior, Position};
use convneg::negation::logical_not_complement;
use convneg::entailment::loewner_k_raw;
use convneg::text::Source;
use convneg::{
    cn_string, cn_word, derive_weights, enumerate_negation_sets, Lexicon, NegationConfig, Normalization, Operator,
    SubsystemShape, Taxonomy, TextCircuit, WordString,
};
use nalgebra::DMatrix;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub fn fixture_arg(name: &str) -> String {
    fixture(name).to_string_lossy().into_owned()
}

pub fn lexicon(name: &str) -> Arc<Lexicon> {
    Arc::new(Lexicon::from_taxonomy_file(fixture(&format!("{name}.tsv")), 0.5).unwrap())
}

pub fn inline_lexicon(name: &str, tsv: &str) -> Arc<Lexicon> {
    Arc::new(Lexicon::build(name, Taxonomy::parse(tsv).unwrap(), 0.5).unwrap())
}

pub fn love_lexicons() -> Vec<Arc<Lexicon>> {
    vec![
        inline_lexicon("names", "alice\tperson\nbob\tperson\nclaire\tperson\ndave\tperson\n"),
        inline_lexicon("traits", "evil\tmoral\nvirtuous\tmoral\nold\tage\nyoung\tage\nmoral\ttrait\nage\ttrait\n"),
        inline_lexicon("verbs", "loves\tfeels\nhates\tfeels\n"),
    ]
}

fn runner(cases: u32) -> TestRunner {
    TestRunner::new(Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    })
}

fn run<S, F>(cases: u32, strategy: S, test: F) -> Result<(), String>
where
    S: Strategy,
    S::Value: std::fmt::Debug,
    F: Fn(S::Value) -> Result<(), TestCaseError>,
{
    runner(cases).run(&strategy, test).map_err(|e| e.to_string())
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), TestCaseError> {
    if ok {
        Ok(())
    } else {
        Err(TestCaseError::fail(msg()))
    }
}

fn valid(op: &Operator, what: &str) -> Result<(), TestCaseError> {
    let d = op.validate();
    ensure(d.passes(), || format!("{what} failed validation: {d:?}"))
}

fn lift<T>(r: convneg::Result<T>) -> Result<T, TestCaseError> {
    r.map_err(|e| TestCaseError::fail(e.to_string()))
}

/// Raw material for a random PSD matrix: a seed matrix orthogonalized into a
/// basis, plus a spectrum that is either zero or in `[0.1, 5]`.
#[derive(Clone, Debug)]
pub struct Spectral {
    pub dim: usize,
    pub basis_seed: Vec<f64>,
    pub spectrum: Vec<f64>,
}

impl Spectral {
    fn basis(&self) -> DMatrix<f64> {
        let n = self.dim;
        let mut m = DMatrix::from_row_slice(n, n, &self.basis_seed);
        // keep QR well defined for degenerate seeds
        for i in 0..n {
            m[(i, i)] += 3.0;
        }
        m.qr().q()
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        let q = self.basis();
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(self.spectrum.clone()));
        let m = &q * d * q.transpose();
        (&m + m.transpose()) * 0.5
    }

    pub fn operator(&self) -> Operator {
        Operator::new(self.matrix(), Vec::new()).unwrap()
    }

    /// Orthogonal projector onto the basis vectors with nonzero spectrum.
    pub fn projector(&self) -> Operator {
        let q = self.basis();
        let n = self.dim;
        let mut p = DMatrix::zeros(n, n);
        for (k, v) in self.spectrum.iter().enumerate() {
            if *v > 0.0 {
                let col = q.column(k);
                p += col * col.transpose();
            }
        }
        let p = (&p + p.transpose()) * 0.5;
        Operator::new(p, Vec::new()).unwrap()
    }
}

fn eigen_value(full_rank: bool) -> BoxedStrategy<f64> {
    if full_rank {
        (0.1..5.0f64).boxed()
    } else {
        prop_oneof![1 => Just(0.0), 3 => 0.1..5.0f64].boxed()
    }
}

pub fn spectral(dim: usize, full_rank: bool) -> impl Strategy<Value = Spectral> {
    (
        prop::collection::vec(-1.0..1.0f64, dim * dim),
        prop::collection::vec(eigen_value(full_rank), dim),
    )
        .prop_map(move |(basis_seed, spectrum)| Spectral { dim, basis_seed, spectrum })
}

pub fn psd_pair(max_dim: usize) -> impl Strategy<Value = (Spectral, Spectral)> {
    (1..=max_dim).prop_flat_map(|n| (spectral(n, false), spectral(n, false)))
}

fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
}

/// Every operation of the operator core returns a valid operator.
pub fn check_operator_closure(cases: u32) -> Result<(), String> {
    let strategy = (1usize..=4, 1usize..=3).prop_flat_map(|(n, m)| {
        (
            spectral(n, false),
            spectral(n, false),
            spectral(m, false),
            spectral(m, false),
            0.0..3.0f64,
            0.0..3.0f64,
        )
    });
    run(cases, strategy, |(a, b, c, e, wa, wb)| {
        let (a, b, c, e) = (a.operator(), b.operator(), c.operator(), e.operator());
        let joint = a.tensor(&c);
        valid(&joint, "tensor")?;
        let shape = lift(SubsystemShape::new(vec![a.dim(), c.dim()]))?;
        for keep in 0..2 {
            valid(&lift(joint.partial_trace(&shape, keep))?, "partial_trace")?;
        }
        valid(&lift(a.hadamard(&b))?, "hadamard")?;
        valid(&lift(a.conjugate_update(&b))?, "conjugate_update")?;
        valid(&lift(joint.conjugate_local(&shape, 1, &e))?, "conjugate_local")?;
        valid(&lift(joint.conjugate_local(&shape, 0, &b))?, "conjugate_local")?;
        valid(&a.sqrt(), "sqrt")?;
        valid(&a.support_projector(1e-10), "support_projector")?;
        valid(&lift(Operator::mix(&[(wa, &a), (wb, &b)]))?, "mix")?;
        if !a.is_zero() {
            valid(&lift(a.pseudoinverse(1e-10))?, "pseudoinverse")?;
            valid(&lift(a.normalize(Normalization::Trace))?, "trace normalize")?;
            valid(&lift(a.normalize(Normalization::Sup))?, "sup normalize")?;
        }
        Ok(())
    })
}

/// Schur product theorem.
pub fn check_schur_psd(cases: u32) -> Result<(), String> {
    run(cases, psd_pair(6), |(a, b)| {
        let h = lift(a.operator().hadamard(&b.operator()))?;
        let raw = a.matrix().component_mul(&b.matrix());
        let min = raw.symmetric_eigenvalues().min();
        ensure(min >= -1e-10, || format!("raw Schur product min eigenvalue {min}"))?;
        ensure(h.min_eigenvalue() >= -1e-10, || format!("min eigenvalue {}", h.min_eigenvalue()))
    })
}

/// Partial trace keeps the total trace and recovers product-state factors.
pub fn check_partial_trace(cases: u32) -> Result<(), String> {
    let strategy = prop::collection::vec(1usize..=3, 1..=3).prop_flat_map(|dims| {
        let total: usize = dims.iter().product();
        let factors: Vec<_> = dims.iter().map(|&d| spectral(d, false)).collect();
        (Just(dims), spectral(total, false), factors)
    });
    run(cases, strategy, |(dims, joint, factors)| {
        let shape = lift(SubsystemShape::new(dims.clone()))?;
        let rho = joint.operator();
        for keep in 0..dims.len() {
            let reduced = lift(rho.partial_trace(&shape, keep))?;
            ensure((reduced.trace() - rho.trace()).abs() <= 1e-9, || {
                format!("trace {} became {}", rho.trace(), reduced.trace())
            })?;
        }
        let ops: Vec<Operator> = factors.iter().map(Spectral::operator).collect();
        let product = ops[1..].iter().fold(ops[0].clone(), |acc, f| acc.tensor(f));
        for keep in 0..ops.len() {
            let others: f64 = (0..ops.len()).filter(|&j| j != keep).map(|j| ops[j].trace()).product();
            let expected = lift(ops[keep].scale(others))?;
            let got = lift(product.partial_trace(&shape, keep))?;
            ensure(got.max_abs_diff(&expected) <= 1e-9, || {
                format!("factor {keep} off by {}", got.max_abs_diff(&expected))
            })?;
        }
        Ok(())
    })
}

/// The four Moore–Penrose identities.
pub fn check_moore_penrose(cases: u32) -> Result<(), String> {
    run(cases, (1usize..=6).prop_flat_map(|n| spectral(n, false)), |s| {
        let a = s.operator();
        if a.is_zero() {
            return Ok(());
        }
        let p = lift(a.pseudoinverse(1e-10))?;
        let (a, p) = (a.entries(), p.entries());
        let checks = [
            ("A A+ A = A", max_abs(&(a * p * a - a))),
            ("A+ A A+ = A+", max_abs(&(p * a * p - p))),
            ("(A A+)' = A A+", max_abs(&((a * p).transpose() - a * p))),
            ("(A+ A)' = A+ A", max_abs(&((p * a).transpose() - p * a))),
        ];
        for (name, err) in checks {
            ensure(err <= 1e-8, || format!("{name} violated by {err}"))?;
        }
        Ok(())
    })
}

/// Reflexivity, monotonicity in the upper operand, and the scale law.
pub fn check_loewner(cases: u32) -> Result<(), String> {
    let strategy = (1usize..=5).prop_flat_map(|n| {
        (
            spectral(n, false),
            spectral(n, false),
            spectral(n, false),
            0.2..3.0f64,
            0.2..4.0f64,
            any::<bool>(),
        )
    });
    run(cases, strategy, |(a, d1, d2, c, scale, contain)| {
        let a = a.operator();
        if a.is_zero() {
            return Ok(());
        }
        let reflexive = lift(loewner_k_raw(&a, &a))?;
        ensure((reflexive - 1.0).abs() <= 1e-9, || format!("k(A,A) = {reflexive}"))?;
        let d1 = d1.operator();
        let b = if contain {
            lift(Operator::mix(&[(c, &a), (1.0, &d1)]))?
        } else {
            d1.clone()
        };
        let b2 = lift(Operator::mix(&[(1.0, &b), (1.0, &d2.operator())]))?;
        let k1 = lift(loewner_k_raw(&a, &b))?;
        let k2 = lift(loewner_k_raw(&a, &b2))?;
        ensure(k1 <= k2 * (1.0 + 1e-8) + 1e-8, || format!("B ⪯ B' but k {k1} > {k2}"))?;
        let ks = lift(loewner_k_raw(&lift(a.scale(scale))?, &b))?;
        ensure((ks - k1 / scale).abs() <= 1e-8 * (1.0 + k1), || {
            format!("scale law: k(cA,B) = {ks}, k(A,B)/c = {}", k1 / scale)
        })
    })
}

/// `¬¬P = P` for orthogonal projectors under complement negation.
pub fn check_double_negation(cases: u32) -> Result<(), String> {
    run(cases, (1usize..=6).prop_flat_map(|n| spectral(n, false)), |s| {
        let p = s.projector();
        let twice = lift(logical_not_complement(&lift(logical_not_complement(&p))?))?;
        ensure(twice.max_abs_diff(&p) <= 1e-12, || format!("off by {}", twice.max_abs_diff(&p)))
    })
}

/// `A ⪯ B ⇒ B⁻¹ ⪯ A⁻¹` for full-rank operators, and its indicator form
/// `P_A ⪯ P_B ⇒ ¬P_B ⊑ ¬P_A` with `k = 1`.
pub fn check_inverse_antitonicity(cases: u32) -> Result<(), String> {
    let strategy = (1usize..=5).prop_flat_map(|n| {
        (
            spectral(n, true),
            spectral(n, false),
            prop::collection::vec(any::<bool>(), n),
            prop::collection::vec(any::<bool>(), n),
        )
    });
    run(cases, strategy, |(a, d, lower, extra)| {
        let a = a.operator();
        let b = lift(Operator::mix(&[(1.0, &a), (1.0, &d.operator())]))?;
        let ai = lift(a.pseudoinverse(1e-12))?;
        let bi = lift(b.pseudoinverse(1e-12))?;
        let gap = (ai.entries() - bi.entries()).symmetric_eigenvalues().min();
        ensure(gap >= -1e-8, || format!("A⁻¹ − B⁻¹ has eigenvalue {gap}"))?;

        let pa: Vec<f64> = lower.iter().map(|&x| f64::from(u8::from(x))).collect();
        let pb: Vec<f64> = lower.iter().zip(&extra).map(|(&x, &y)| f64::from(u8::from(x || y))).collect();
        let not_b = lift(logical_not_complement(&lift(Operator::from_diagonal(&pb))?))?;
        let not_a = lift(logical_not_complement(&lift(Operator::from_diagonal(&pa))?))?;
        if not_b.is_zero() {
            return Ok(());
        }
        let k = lift(loewner_k_raw(&not_b, &not_a))?;
        ensure((k - 1.0).abs() <= 1e-8, || format!("k(¬P_B, ¬P_A) = {k}"))
    })
}

/// Canonical subsets straight from bitmasks.
pub fn bitmask_subsets(n: usize) -> Vec<Vec<usize>> {
    let mut sets: Vec<Vec<usize>> = (1u32..(1 << n))
        .map(|mask| (0..n).filter(|i| mask & (1 << i) != 0).collect())
        .collect();
    sets.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    sets
}

/// Exhaustive for `n ≤ 10`.
pub fn check_subset_enumeration() -> Result<(), String> {
    for n in 1..=10 {
        let got = enumerate_negation_sets(n).map_err(|e| e.to_string())?;
        if got.len() != (1 << n) - 1 {
            return Err(format!("n = {n}: {} subsets", got.len()));
        }
        if got != bitmask_subsets(n) {
            return Err(format!("n = {n}: order differs from the bitmask oracle"));
        }
    }
    Ok(())
}

/// Concepts of the toy lexicons that do not cover their whole leaf space, so
/// their negations never vanish.
pub fn vocabulary() -> Vec<(String, Arc<Lexicon>)> {
    let mut out = Vec::new();
    for name in ["fig1", "colors", "drinks", "kinds", "roles"] {
        let lex = lexicon(name);
        for c in lex.taxonomy().concepts() {
            if lex.taxonomy().descendant_leaves(c).unwrap().len() < lex.space_dim() {
                out.push((c.clone(), Arc::clone(&lex)));
            }
        }
    }
    out
}

fn word_string(vocab: &[(String, Arc<Lexicon>)], picks: &[usize]) -> WordString {
    WordString::new(
        picks
            .iter()
            .map(|&i| Position {
                word: vocab[i].0.clone(),
                lexicon: Arc::clone(&vocab[i].1),
            })
            .collect(),
    )
    .unwrap()
}

fn picks(vocab_len: usize, max_len: usize) -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(0..vocab_len, 1..=max_len)
}

/// Mixture weights sum to one and the term count is `2ⁿ − 1`.
pub fn check_weight_normalization(cases: u32) -> Result<(), String> {
    let vocab = vocabulary();
    let strategy = (picks(vocab.len(), 6), picks(vocab.len(), 6), 0.05..1.0f64, 0.0..1.0f64)
        .prop_flat_map(|(s, t, lambda, sigma)| {
            let m = (1usize << s.len()) - 1;
            (Just(s), Just(t), Just(lambda), Just(sigma), prop::collection::vec(0.0..10.0f64, m))
        });
    let cfg = NegationConfig::default();
    run(cases, strategy, |(s, t, lambda, sigma, mut raw)| {
        let s = word_string(&vocab, &s);
        let n = s.len();
        if raw.iter().all(|w| *w == 0.0) {
            raw[0] = 1.0;
        }
        let mixture = lift(cn_string(&s, &raw, &cfg))?;
        ensure(mixture.len() == (1 << n) - 1, || format!("{} terms for n = {n}", mixture.len()))?;
        let sets: Vec<Vec<usize>> = mixture.terms().iter().map(|t| t.subset.clone()).collect();
        ensure(sets == bitmask_subsets(n), || "terms out of canonical order".to_string())?;
        let total: f64 = mixture.weights().iter().sum();
        ensure((total - 1.0).abs() <= 1e-12, || format!("cn_string weights sum to {total}"))?;

        let prior = lift(size_prior(&sets, lambda))?;
        let total: f64 = prior.iter().sum();
        ensure((total - 1.0).abs() <= 1e-12, || format!("size prior sums to {total}"))?;

        let aligned: Vec<Position> = s
            .positions()
            .iter()
            .zip(t.iter().cycle())
            .map(|(p, &k)| {
                let same: Vec<&(String, Arc<Lexicon>)> =
                    vocab.iter().filter(|(_, l)| Arc::ptr_eq(l, &p.lexicon)).collect();
                let (w, l) = same[k % same.len()];
                Position { word: w.clone(), lexicon: Arc::clone(l) }
            })
            .collect();
        let target = lift(WordString::new(aligned))?;
        let derived = lift(derive_weights(&s, &target, lambda, sigma, &cfg))?;
        let total: f64 = derived.iter().sum();
        ensure((total - 1.0).abs() <= 1e-12, || format!("derived weights sum to {total}"))
    })
}

/// All weight on `{i}` reproduces `cn_word` at `i` and the originals elsewhere.
pub fn check_singleton_consistency(cases: u32) -> Result<(), String> {
    let vocab = vocabulary();
    let strategy = picks(vocab.len(), 5).prop_flat_map(|s| {
        let n = s.len();
        (Just(s), 0..n, 0usize..4)
    });
    run(cases, strategy, |(picked, i, config)| {
        let cfg = config_by_index(config);
        let s = word_string(&vocab, &picked);
        let sets = lift(enumerate_negation_sets(s.len()))?;
        let weights: Vec<f64> = sets.iter().map(|set| f64::from(u8::from(set == &vec![i]))).collect();
        let mixture = lift(cn_string(&s, &weights, &cfg))?;
        let term = mixture.term(&[i]).expect("singleton term");
        ensure(term.weight == 1.0, || format!("weight {}", term.weight))?;
        for (j, state) in term.states.iter().enumerate() {
            let expected = if j == i {
                lift(cn_word(&vocab[picked[j]].0, &vocab[picked[j]].1, &cfg))?
            } else {
                lift(s.word_operator(j))?.clone()
            };
            ensure(state.max_abs_diff(&expected) <= 1e-12, || {
                format!("position {j} differs by {}", state.max_abs_diff(&expected))
            })?;
        }
        let marginal = lift(mixture.position_marginal(i))?;
        let cn = lift(cn_word(&vocab[picked[i]].0, &vocab[picked[i]].1, &cfg))?;
        ensure(marginal.max_abs_diff(&cn) <= 1e-12, || "marginal differs from cn_word".to_string())
    })
}

pub fn config_by_index(i: usize) -> NegationConfig {
    use convneg::{Composition, LogicalNegation};
    let logical = if i & 1 == 0 { LogicalNegation::Complement } else { LogicalNegation::Pinv };
    let composition = if i & 2 == 0 { Composition::Hadamard } else { Composition::Conjugate };
    NegationConfig { logical, composition, ..NegationConfig::default() }
}

#[derive(Clone, Debug)]
pub enum Line {
    Attribute(usize, usize),
    Verb(usize, usize, usize),
}

const NAMES: [&str; 4] = ["Alice", "Bob", "Claire", "Dave"];
const TRAITS: [&str; 4] = ["evil", "virtuous", "old", "young"];
const VERBS: [&str; 2] = ["loves", "hates"];

pub fn render_script(actors: usize, lines: &[Line]) -> String {
    let mut script: String = (0..actors).map(|a| format!("actor {}\n", NAMES[a])).collect();
    for line in lines {
        match *line {
            Line::Attribute(a, t) => script.push_str(&format!("{} is {}\n", NAMES[a], TRAITS[t])),
            Line::Verb(a, v, b) => script.push_str(&format!("{} {} {}\n", NAMES[a], VERBS[v], NAMES[b])),
        }
    }
    script
}

pub fn random_lines(actors: usize) -> impl Strategy<Value = Vec<Line>> {
    let line = prop_oneof![
        (0..actors, 0..TRAITS.len()).prop_map(|(a, t)| Line::Attribute(a, t)),
        (0..actors, 0..VERBS.len(), 1..actors.max(2))
            .prop_map(move |(a, v, off)| Line::Verb(a, v, (a + off) % actors.max(2))),
    ];
    prop::collection::vec(line, 0..8)
}

/// Contributing words are exactly the words of the link-closed actor group.
#[allow(clippy::needless_range_loop)]
pub fn check_link_closure(cases: u32) -> Result<(), String> {
    let lexicons = love_lexicons();
    let strategy = (2usize..=4).prop_flat_map(|n| (Just(n), random_lines(n)));
    run(cases, strategy, |(n, lines)| {
        let circuit = lift(TextCircuit::parse(&render_script(n, &lines), lexicons.clone()))?;
        // union-find over verb lines
        let mut group: Vec<usize> = (0..n).collect();
        fn root(g: &mut [usize], x: usize) -> usize {
            let mut x = x;
            while g[x] != x {
                x = g[x];
            }
            x
        }
        for l in &lines {
            if let Line::Verb(a, _, b) = *l {
                let (ra, rb) = (root(&mut group, a), root(&mut group, b));
                group[ra] = rb;
            }
        }
        for a in 0..n {
            let ra = root(&mut group, a);
            let members: BTreeSet<usize> = (0..n).filter(|&b| root(&mut group, b) == ra).collect();
            let mut expected: BTreeSet<Source> = members.iter().map(|&m| Source::Name(m)).collect();
            for (g, l) in lines.iter().enumerate() {
                let touched = match *l {
                    Line::Attribute(x, _) => members.contains(&x),
                    Line::Verb(x, _, y) => members.contains(&x) || members.contains(&y),
                };
                if touched {
                    expected.insert(Source::Gate(g));
                }
            }
            let words = lift(circuit.contributing_words(NAMES[a]))?;
            let got: Vec<Source> = words.iter().map(|s| s.source).collect();
            let got_set: BTreeSet<Source> = got.iter().copied().collect();
            ensure(got.len() == got_set.len(), || format!("{}: duplicate words", NAMES[a]))?;
            ensure(got_set == expected, || format!("{}: {got:?} vs {expected:?}", NAMES[a]))?;
            // text order, each name before that actor's gates
            let mut last_gate = None;
            for (pos, src) in got.iter().enumerate() {
                match *src {
                    Source::Gate(g) => {
                        ensure(last_gate.is_none_or(|p| p < g), || "gates out of text order".to_string())?;
                        last_gate = Some(g);
                    }
                    Source::Name(m) => {
                        let first_gate = got.iter().position(|s| match *s {
                            Source::Gate(g) => match lines[g] {
                                Line::Attribute(x, _) => x == m,
                                Line::Verb(x, _, y) => x == m || y == m,
                            },
                            Source::Name(_) => false,
                        });
                        ensure(first_gate.is_none_or(|f| pos < f), || "name after its gate".to_string())?;
                    }
                }
            }
            for b in &members {
                let other = lift(circuit.contributing_words(NAMES[*b]))?;
                let other: BTreeSet<Source> = other.iter().map(|s| s.source).collect();
                ensure(other == got_set, || "linked actors disagree".to_string())?;
            }
        }
        Ok(())
    })
}
