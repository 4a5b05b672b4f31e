//! Text circuits: actors whose meanings are updated by attribute and verb
//! gates, read either as evolving states or as one long word sequence per
//! actor for negation and comparison.
//!
//! Script grammar, one statement per line; `#` starts a comment and a
//! trailing period is ignored:
//!
//! ```text
//! actor Alice                # optional; first mention also declares
//! Alice is a human           # `is`, `is a`, `is an`
//! Alice loves Bob            # binary verb gate
//! effect loves happy -       # optional verb effect words (subject, object)
//! ```

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::sync::Arc;

use crate::entailment::Score;
use crate::error::{Error, Result};
use crate::lexicon::Lexicon;
use crate::mixture::{
    best_interpretation, cn_string, derive_weights, enumerate_negation_sets, size_prior, NegationMixture,
    NegationSet, Position, WordString, MAX_WORDS,
};
use crate::negation::NegationConfig;
use crate::operator::{Normalization, Operator, SubsystemShape, ZERO_TOL};

/// Largest joint dimension [`TextCircuit::composed_state`] will build.
pub const MAX_COMPOSITE_DIM: usize = 4096;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Actor {
    pub name: String,
    /// Concept naming the actor in its lexicon.
    pub word: String,
    pub lexicon: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GateKind {
    Unary {
        actor: usize,
        word: String,
        lexicon: usize,
    },
    Binary {
        subject: usize,
        verb: String,
        lexicon: usize,
        object: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Gate {
    pub kind: GateKind,
    /// 1-based script line.
    pub line: usize,
}

impl Gate {
    pub fn word(&self) -> &str {
        match &self.kind {
            GateKind::Unary { word, .. } => word,
            GateKind::Binary { verb, .. } => verb,
        }
    }

    fn lexicon(&self) -> usize {
        match self.kind {
            GateKind::Unary { lexicon, .. } | GateKind::Binary { lexicon, .. } => lexicon,
        }
    }

    pub fn touches(&self, actor: usize) -> bool {
        match self.kind {
            GateKind::Unary { actor: a, .. } => a == actor,
            GateKind::Binary { subject, object, .. } => subject == actor || object == actor,
        }
    }

    fn actors(&self) -> Vec<usize> {
        match self.kind {
            GateKind::Unary { actor, .. } => vec![actor],
            GateKind::Binary { subject, object, .. } => vec![subject, object],
        }
    }
}

/// Effect words a verb applies to its subject and object wires.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct VerbEffect {
    pub subject: Option<(String, usize)>,
    pub object: Option<(String, usize)>,
}

/// Where a slot or contributing word comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Source {
    Name(usize),
    Gate(usize),
}

#[derive(Clone, Debug)]
pub struct Slot {
    pub source: Source,
    /// Display form: the actor name for name slots, the word otherwise.
    pub label: String,
    pub word: String,
    pub lexicon: Arc<Lexicon>,
    pub operator: Operator,
}

/// An actor's meaning read as one sentence: name first, then each gate in text order.
#[derive(Clone, Debug)]
pub struct ActorView {
    pub actor: String,
    pub slots: Vec<Slot>,
}

impl ActorView {
    pub fn labels(&self) -> Vec<&str> {
        self.slots.iter().map(|s| s.label.as_str()).collect()
    }

    pub fn word_string(&self) -> Result<WordString> {
        WordString::new(
            self.slots
                .iter()
                .map(|s| Position {
                    word: s.word.clone(),
                    lexicon: Arc::clone(&s.lexicon),
                })
                .collect(),
        )
    }
}

/// How to weight the negation sets of an actor.
#[derive(Clone, Debug)]
pub enum ActorWeights {
    SizePrior { lambda: f64 },
    /// Follow-up words aligned with the actor's contributing words.
    Context { words: Vec<String>, lambda: f64, sigma: f64 },
    Explicit(Vec<f64>),
}

/// An actor's negation together with the words it ranges over.
#[derive(Clone, Debug)]
pub struct ActorNegation {
    pub contributions: Vec<Slot>,
    pub mixture: NegationMixture,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RankedActor {
    pub actor: String,
    pub subset: NegationSet,
    pub subset_labels: Vec<String>,
    pub score: Score,
}

/// Joint state of one connected group of actors after running its gates.
#[derive(Clone, Debug)]
pub struct Evolution {
    /// Actor indices in the group, declaration order.
    pub component: Vec<usize>,
    /// Lexicon indices making up each actor wire.
    pub layout: Vec<usize>,
    pub joint: Operator,
    /// Trace of the joint state after initialization and after each applied gate.
    pub traces: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct TextCircuit {
    lexicons: Vec<Arc<Lexicon>>,
    actors: Vec<Actor>,
    gates: Vec<Gate>,
    links: BTreeSet<(usize, usize)>,
    effects: HashMap<String, VerbEffect>,
}

fn lookup(lexicons: &[Arc<Lexicon>], word: &str) -> Result<Option<usize>> {
    let hits: Vec<usize> = (0..lexicons.len()).filter(|&i| lexicons[i].contains(word)).collect();
    match hits.as_slice() {
        [] => Ok(None),
        [one] => Ok(Some(*one)),
        many => Err(Error::AmbiguousWord {
            word: word.to_string(),
            lexicons: many.iter().map(|&i| lexicons[i].name().to_string()).collect(),
        }),
    }
}

impl TextCircuit {
    pub fn parse(text: &str, lexicons: Vec<Arc<Lexicon>>) -> Result<Self> {
        let mut c = TextCircuit {
            lexicons,
            actors: Vec::new(),
            gates: Vec::new(),
            links: BTreeSet::new(),
            effects: HashMap::new(),
        };
        for (n, raw) in text.lines().enumerate() {
            let line = n + 1;
            let content = raw.split('#').next().unwrap_or_default().trim();
            if content.is_empty() {
                continue;
            }
            let content = content.strip_suffix('.').unwrap_or(content);
            let tokens: Vec<&str> = content.split_whitespace().collect();
            match tokens.as_slice() {
                ["actor", name] => {
                    if c.actor_index(name).is_some() {
                        return Err(Error::parse(line, format!("actor {name:?} declared twice")));
                    }
                    c.declare(name, line)?;
                }
                ["effect", verb, subject, object] => {
                    c.word_lexicon(verb, line)?;
                    let subject = c.effect_word(subject, line)?;
                    let object = c.effect_word(object, line)?;
                    c.effects.insert(verb.to_string(), VerbEffect { subject, object });
                }
                [name, "is", word] | [name, "is", "a" | "an", word] => {
                    let actor = c.actor_or_declare(name, line)?;
                    let lexicon = c.word_lexicon(word, line)?;
                    c.gates.push(Gate {
                        kind: GateKind::Unary {
                            actor,
                            word: word.to_string(),
                            lexicon,
                        },
                        line,
                    });
                }
                [subject, verb, object] => {
                    let subject = c.actor_or_declare(subject, line)?;
                    let object = c.actor_or_declare(object, line)?;
                    if subject == object {
                        return Err(Error::parse(line, "a verb gate needs two distinct actors"));
                    }
                    let lexicon = c.word_lexicon(verb, line)?;
                    c.links.insert((subject.min(object), subject.max(object)));
                    c.gates.push(Gate {
                        kind: GateKind::Binary {
                            subject,
                            verb: verb.to_string(),
                            lexicon,
                            object,
                        },
                        line,
                    });
                }
                _ => return Err(Error::parse(line, format!("unrecognized statement {content:?}"))),
            }
        }
        Ok(c)
    }

    pub fn from_file(path: impl AsRef<std::path::Path>, lexicons: Vec<Arc<Lexicon>>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, lexicons)
    }

    fn actor_index(&self, name: &str) -> Option<usize> {
        self.actors.iter().position(|a| a.name == name)
    }

    fn actor_or_declare(&mut self, name: &str, line: usize) -> Result<usize> {
        match self.actor_index(name) {
            Some(i) => Ok(i),
            None => self.declare(name, line),
        }
    }

    fn declare(&mut self, name: &str, line: usize) -> Result<usize> {
        let lower = name.to_lowercase();
        let (word, lexicon) = match lookup(&self.lexicons, name)? {
            Some(l) => (name.to_string(), l),
            None => match lookup(&self.lexicons, &lower)? {
                Some(l) => (lower, l),
                None => return Err(Error::parse(line, format!("unknown actor {name:?}: no lexicon names it"))),
            },
        };
        self.actors.push(Actor {
            name: name.to_string(),
            word,
            lexicon,
        });
        Ok(self.actors.len() - 1)
    }

    fn word_lexicon(&self, word: &str, line: usize) -> Result<usize> {
        lookup(&self.lexicons, word)?
            .ok_or_else(|| Error::parse(line, format!("unknown word {word:?}: not in any loaded lexicon")))
    }

    fn effect_word(&self, word: &str, line: usize) -> Result<Option<(String, usize)>> {
        if word == "-" {
            return Ok(None);
        }
        Ok(Some((word.to_string(), self.word_lexicon(word, line)?)))
    }

    pub fn lexicons(&self) -> &[Arc<Lexicon>] {
        &self.lexicons
    }

    pub fn actors(&self) -> &[Actor] {
        &self.actors
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    /// Unordered actor pairs (smaller index first) that share a verb gate.
    pub fn links(&self) -> &BTreeSet<(usize, usize)> {
        &self.links
    }

    pub fn verb_effect(&self, verb: &str) -> Option<&VerbEffect> {
        self.effects.get(verb)
    }

    pub fn actor(&self, name: &str) -> Result<usize> {
        self.actor_index(name).ok_or_else(|| Error::UnknownActor(name.to_string()))
    }

    /// Actors reachable from `actor` through links, in declaration order.
    pub fn component(&self, actor: usize) -> Vec<usize> {
        let mut seen = vec![false; self.actors.len()];
        seen[actor] = true;
        let mut queue = VecDeque::from([actor]);
        while let Some(a) = queue.pop_front() {
            for &(x, y) in &self.links {
                let other = if x == a {
                    y
                } else if y == a {
                    x
                } else {
                    continue;
                };
                if !seen[other] {
                    seen[other] = true;
                    queue.push_back(other);
                }
            }
        }
        (0..self.actors.len()).filter(|&i| seen[i]).collect()
    }

    fn name_slot(&self, actor: usize) -> Result<Slot> {
        let a = &self.actors[actor];
        let lexicon = Arc::clone(&self.lexicons[a.lexicon]);
        Ok(Slot {
            source: Source::Name(actor),
            label: a.name.clone(),
            word: a.word.clone(),
            operator: lexicon.word_operator(&a.word)?.clone(),
            lexicon,
        })
    }

    fn gate_slot(&self, index: usize) -> Result<Slot> {
        let gate = &self.gates[index];
        let lexicon = Arc::clone(&self.lexicons[gate.lexicon()]);
        Ok(Slot {
            source: Source::Gate(index),
            label: gate.word().to_string(),
            word: gate.word().to_string(),
            operator: lexicon.word_operator(gate.word())?.clone(),
            lexicon,
        })
    }

    /// Name slot, then one slot per gate on this actor, in text order.
    pub fn actor_view(&self, name: &str) -> Result<ActorView> {
        let actor = self.actor(name)?;
        let mut slots = vec![self.name_slot(actor)?];
        for (i, gate) in self.gates.iter().enumerate() {
            if gate.touches(actor) {
                slots.push(self.gate_slot(i)?);
            }
        }
        Ok(ActorView {
            actor: name.to_string(),
            slots,
        })
    }

    /// Name slot plus attribute (unary) slots only.
    pub fn attribute_view(&self, name: &str) -> Result<ActorView> {
        let mut view = self.actor_view(name)?;
        view.slots
            .retain(|s| !matches!(s.source, Source::Gate(g) if matches!(self.gates[g].kind, GateKind::Binary { .. })));
        Ok(view)
    }

    /// Every word that shaped the actor, directly or through linked actors, in
    /// text order; an actor's name comes right before its first gate.
    pub fn contributing_words(&self, name: &str) -> Result<Vec<Slot>> {
        let actor = self.actor(name)?;
        let component: HashSet<usize> = self.component(actor).into_iter().collect();
        let mut named = HashSet::new();
        let mut out = Vec::new();
        for (i, gate) in self.gates.iter().enumerate() {
            let involved = gate.actors();
            if !involved.iter().any(|a| component.contains(a)) {
                continue;
            }
            for a in involved {
                if named.insert(a) {
                    out.push(self.name_slot(a)?);
                }
            }
            out.push(self.gate_slot(i)?);
        }
        if !named.contains(&actor) {
            out.insert(0, self.name_slot(actor)?);
        }
        Ok(out)
    }

    fn wire_layout(&self) -> Vec<usize> {
        let mut used = BTreeSet::new();
        for a in &self.actors {
            used.insert(a.lexicon);
        }
        for g in &self.gates {
            if let GateKind::Unary { lexicon, .. } = g.kind {
                used.insert(lexicon);
            }
        }
        for e in self.effects.values() {
            for (_, l) in e.subject.iter().chain(e.object.iter()) {
                used.insert(*l);
            }
        }
        used.into_iter().collect()
    }

    /// Run every gate of the actor's linked group on the joint wire space.
    /// Each wire starts as the trace-normalized name state tensored with
    /// maximally mixed states on the other attribute spaces; gates apply
    /// `√P · ρ · √P` on their factor.
    pub fn evolve(&self, name: &str) -> Result<Evolution> {
        let actor = self.actor(name)?;
        let component = self.component(actor);
        let layout = self.wire_layout();
        let factor_dims: Vec<usize> = layout.iter().map(|&l| self.lexicons[l].space_dim()).collect();
        let wire_dim: usize = factor_dims.iter().product();
        let joint_dim = component
            .iter()
            .try_fold(1usize, |acc, _| acc.checked_mul(wire_dim))
            .filter(|d| *d <= MAX_COMPOSITE_DIM)
            .ok_or(Error::TooLarge {
                dim: wire_dim.saturating_pow(component.len() as u32),
                limit: MAX_COMPOSITE_DIM,
            })?;

        let mut joint: Option<Operator> = None;
        for &a in &component {
            let wire = self.initial_wire(a, &layout)?;
            joint = Some(match joint {
                None => wire,
                Some(j) => j.tensor(&wire),
            });
        }
        let mut joint = joint.expect("component contains the actor");
        debug_assert_eq!(joint.dim(), joint_dim);
        let shape = SubsystemShape::new(
            component
                .iter()
                .flat_map(|_| factor_dims.iter().copied())
                .collect(),
        )?;
        let factor_of = |actor: usize, lexicon: usize| -> usize {
            let pos = component.iter().position(|&c| c == actor).unwrap();
            let slot = layout.iter().position(|&l| l == lexicon).unwrap();
            pos * layout.len() + slot
        };

        let mut traces = vec![joint.trace()];
        for gate in &self.gates {
            if !gate.actors().iter().any(|a| component.contains(a)) {
                continue;
            }
            let mut updates: Vec<(usize, &str, usize)> = Vec::new();
            match &gate.kind {
                GateKind::Unary { actor, word, lexicon } => updates.push((*actor, word, *lexicon)),
                GateKind::Binary { subject, verb, object, .. } => {
                    if let Some(effect) = self.effects.get(verb) {
                        if let Some((w, l)) = &effect.subject {
                            updates.push((*subject, w, *l));
                        }
                        if let Some((w, l)) = &effect.object {
                            updates.push((*object, w, *l));
                        }
                    }
                }
            }
            for (who, word, lexicon) in updates {
                let effect = self.lexicons[lexicon].word_operator(word)?;
                joint = joint.conjugate_local(&shape, factor_of(who, lexicon), effect)?;
            }
            let t = joint.trace();
            if t <= ZERO_TOL {
                return Err(Error::EmptyState(name.to_string()));
            }
            traces.push(t);
        }
        Ok(Evolution {
            component,
            layout,
            joint,
            traces,
        })
    }

    fn initial_wire(&self, actor: usize, layout: &[usize]) -> Result<Operator> {
        let a = &self.actors[actor];
        let mut wire: Option<Operator> = None;
        for &l in layout {
            let lex = &self.lexicons[l];
            let factor = if l == a.lexicon {
                lex.word_operator(&a.word)?.normalize(Normalization::Trace)?
            } else {
                Operator::identity(lex.space_dim())
                    .with_labels(lex.leaves().to_vec())?
                    .normalize(Normalization::Trace)?
            };
            wire = Some(match wire {
                None => factor,
                Some(w) => w.tensor(&factor),
            });
        }
        Ok(wire.expect("layout contains the name lexicon"))
    }

    /// The actor's own wire after the circuit runs (trace ≤ 1; other wires traced out).
    pub fn composed_state(&self, name: &str) -> Result<Operator> {
        let actor = self.actor(name)?;
        let evo = self.evolve(name)?;
        if evo.component.len() == 1 {
            return Ok(evo.joint);
        }
        let wire_dim: usize = evo.layout.iter().map(|&l| self.lexicons[l].space_dim()).product();
        let wires = SubsystemShape::new(vec![wire_dim; evo.component.len()])?;
        let pos = evo.component.iter().position(|&c| c == actor).unwrap();
        evo.joint.partial_trace(&wires, pos)
    }

    /// Trace-normalized reduced state of the actor on one lexicon's space.
    pub fn marginal(&self, name: &str, lexicon: &str) -> Result<Operator> {
        let wire = self.composed_state(name)?;
        let layout = self.wire_layout();
        let slot = layout
            .iter()
            .position(|&l| self.lexicons[l].name() == lexicon)
            .ok_or_else(|| Error::InvalidConfig(format!("lexicon {lexicon:?} is not part of the actor wires")))?;
        let shape = SubsystemShape::new(layout.iter().map(|&l| self.lexicons[l].space_dim()).collect())?;
        wire.partial_trace(&shape, slot)?.normalize(Normalization::Trace)
    }

    /// The actor's contributing words as a string, plus the slots they came from.
    pub fn actor_string(&self, name: &str) -> Result<(Vec<Slot>, WordString)> {
        let slots = self.contributing_words(name)?;
        if slots.len() > MAX_WORDS {
            return Err(Error::TooManyWords {
                n: slots.len(),
                max: MAX_WORDS,
            });
        }
        let string = WordString::new(
            slots
                .iter()
                .map(|s| Position {
                    word: s.word.clone(),
                    lexicon: Arc::clone(&s.lexicon),
                })
                .collect(),
        )?;
        Ok((slots, string))
    }

    /// Conversational negation of an actor over its contributing words.
    pub fn cn_actor(&self, name: &str, weights: &ActorWeights, cfg: &NegationConfig) -> Result<ActorNegation> {
        let (contributions, string) = self.actor_string(name)?;
        let weight_vec = match weights {
            ActorWeights::SizePrior { lambda } => size_prior(&enumerate_negation_sets(string.len())?, *lambda)?,
            ActorWeights::Explicit(w) => w.clone(),
            ActorWeights::Context { words, lambda, sigma } => {
                if words.len() != string.len() {
                    return Err(Error::Alignment(format!(
                        "context has {} words but {name:?} has {} contributing words",
                        words.len(),
                        string.len()
                    )));
                }
                let positions = words
                    .iter()
                    .zip(string.positions())
                    .enumerate()
                    .map(|(i, (w, p))| {
                        if p.lexicon.contains(w) {
                            Ok(Position {
                                word: w.clone(),
                                lexicon: Arc::clone(&p.lexicon),
                            })
                        } else {
                            Err(Error::Alignment(format!(
                                "context word {i} {w:?} is not in lexicon {:?} of {:?}",
                                p.lexicon.name(),
                                p.word
                            )))
                        }
                    })
                    .collect::<Result<_>>()?;
                derive_weights(&string, &WordString::new(positions)?, *lambda, *sigma, cfg)?
            }
        };
        let mixture = cn_string(&string, &weight_vec, cfg)?;
        Ok(ActorNegation { contributions, mixture })
    }

    /// Rank the other actors by how well the best interpretation of
    /// "not `name`" entails them, comparing attribute sequences slot by slot.
    pub fn rank_alternatives(
        &self,
        name: &str,
        cfg: &NegationConfig,
        lambda: f64,
        sigma: f64,
    ) -> Result<Vec<RankedActor>> {
        let actor = self.actor(name)?;
        if self.links.iter().any(|&(a, b)| a == actor || b == actor) {
            return Err(Error::Alignment(format!(
                "{name:?} takes part in verb gates; ranking compares attribute sequences only"
            )));
        }
        let view = self.attribute_view(name)?;
        let negated = view.word_string()?;
        let labels = view.labels();
        let mut ranked = Vec::new();
        for (i, other) in self.actors.iter().enumerate() {
            if i == actor {
                continue;
            }
            let target = self.attribute_view(&other.name)?.word_string()?;
            negated.check_aligned(&target).map_err(|e| match e {
                Error::Alignment(m) => Error::Alignment(format!("{name:?} vs {:?}: {m}", other.name)),
                e => e,
            })?;
            let (subset, score) = best_interpretation(&negated, &target, lambda, sigma, cfg)?;
            ranked.push(RankedActor {
                actor: other.name.clone(),
                subset_labels: subset.iter().map(|&k| labels[k].to_string()).collect(),
                subset,
                score,
            });
        }
        // stable: ties keep declaration order
        ranked.sort_by(|a, b| b.score.value().total_cmp(&a.score.value()));
        Ok(ranked)
    }
}
