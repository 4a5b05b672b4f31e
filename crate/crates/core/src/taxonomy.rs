//! Hypernym taxonomies read from `child<TAB>parent` files.

use std::collections::{HashMap, VecDeque};
use std::path::Path;

use crate::error::{Error, Result};

/// A directed acyclic hypernym graph. Concepts are indexed in order of first
/// appearance in the source text; leaves keep that order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Taxonomy {
    concepts: Vec<String>,
    index: HashMap<String, usize>,
    parents: Vec<Vec<usize>>,
    children: Vec<Vec<usize>>,
    edges: Vec<(usize, usize)>,
    leaves: Vec<usize>,
    warnings: Vec<String>,
}

impl Taxonomy {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut pairs = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim_end_matches('\r');
            let content = line.trim();
            if content.is_empty() || content.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').map(str::trim).collect();
            if fields.len() != 2 || fields.iter().any(|f| f.is_empty()) {
                return Err(Error::parse(n + 1, format!("expected `child<TAB>parent`, found {content:?}")));
            }
            for f in &fields {
                check_name(f).map_err(|m| Error::parse(n + 1, m))?;
            }
            pairs.push((n + 1, fields[0].to_string(), fields[1].to_string()));
        }
        Self::from_edges(pairs)
    }

    /// Build from `(line, child, parent)` triples.
    pub(crate) fn from_edges(pairs: Vec<(usize, String, String)>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::parse(1, "taxonomy contains no edges"));
        }
        let mut tax = Taxonomy {
            concepts: Vec::new(),
            index: HashMap::new(),
            parents: Vec::new(),
            children: Vec::new(),
            edges: Vec::new(),
            leaves: Vec::new(),
            warnings: Vec::new(),
        };
        for (line, child, parent) in pairs {
            if child == parent {
                return Err(Error::CyclicTaxonomy {
                    cycle: vec![child.clone(), child],
                });
            }
            let c = tax.intern(&child);
            let p = tax.intern(&parent);
            if tax.parents[c].contains(&p) {
                tax.warnings
                    .push(format!("line {line}: duplicate edge {child} -> {parent} ignored"));
                continue;
            }
            tax.parents[c].push(p);
            tax.children[p].push(c);
            tax.edges.push((c, p));
        }
        if let Some(cycle) = tax.find_cycle() {
            return Err(Error::CyclicTaxonomy {
                cycle: cycle.into_iter().map(|i| tax.concepts[i].clone()).collect(),
            });
        }
        tax.leaves = (0..tax.concepts.len()).filter(|&i| tax.children[i].is_empty()).collect();
        Ok(tax)
    }

    fn intern(&mut self, name: &str) -> usize {
        if let Some(&i) = self.index.get(name) {
            return i;
        }
        let i = self.concepts.len();
        self.concepts.push(name.to_string());
        self.index.insert(name.to_string(), i);
        self.parents.push(Vec::new());
        self.children.push(Vec::new());
        i
    }

    /// Walks child -> parent edges; returns one cycle as a closed path.
    fn find_cycle(&self) -> Option<Vec<usize>> {
        #[derive(Clone, Copy, PartialEq)]
        enum Mark {
            New,
            Open,
            Done,
        }
        let n = self.concepts.len();
        let mut mark = vec![Mark::New; n];
        for start in 0..n {
            if mark[start] != Mark::New {
                continue;
            }
            let mut path = vec![start];
            let mut cursor = vec![0usize];
            mark[start] = Mark::Open;
            while let Some(&node) = path.last() {
                let k = cursor.last_mut().unwrap();
                if let Some(&next) = self.parents[node].get(*k) {
                    *k += 1;
                    match mark[next] {
                        Mark::Open => {
                            let from = path.iter().position(|&v| v == next).unwrap();
                            let mut cycle = path[from..].to_vec();
                            cycle.push(next);
                            return Some(cycle);
                        }
                        Mark::New => {
                            mark[next] = Mark::Open;
                            path.push(next);
                            cursor.push(0);
                        }
                        Mark::Done => {}
                    }
                } else {
                    mark[node] = Mark::Done;
                    path.pop();
                    cursor.pop();
                }
            }
        }
        None
    }

    pub fn concepts(&self) -> &[String] {
        &self.concepts
    }

    pub fn contains(&self, concept: &str) -> bool {
        self.index.contains_key(concept)
    }

    pub fn index_of(&self, concept: &str) -> Result<usize> {
        self.index
            .get(concept)
            .copied()
            .ok_or_else(|| Error::UnknownWord(concept.to_string()))
    }

    pub fn leaves(&self) -> Vec<&str> {
        self.leaves.iter().map(|&i| self.concepts[i].as_str()).collect()
    }

    pub fn roots(&self) -> Vec<&str> {
        (0..self.concepts.len())
            .filter(|&i| self.parents[i].is_empty())
            .map(|i| self.concepts[i].as_str())
            .collect()
    }

    /// `(child, parent)` pairs in file order, duplicates removed.
    pub fn edges(&self) -> Vec<(&str, &str)> {
        self.edges
            .iter()
            .map(|&(c, p)| (self.concepts[c].as_str(), self.concepts[p].as_str()))
            .collect()
    }

    pub fn parents(&self, concept: &str) -> Result<Vec<&str>> {
        let i = self.index_of(concept)?;
        Ok(self.parents[i].iter().map(|&p| self.concepts[p].as_str()).collect())
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// Positions (in leaf order) of the leaves at or below `concept`.
    pub fn descendant_leaves(&self, concept: &str) -> Result<Vec<usize>> {
        let start = self.index_of(concept)?;
        let mut seen = vec![false; self.concepts.len()];
        let mut queue = VecDeque::from([start]);
        seen[start] = true;
        while let Some(node) = queue.pop_front() {
            for &c in &self.children[node] {
                if !seen[c] {
                    seen[c] = true;
                    queue.push_back(c);
                }
            }
        }
        Ok(self
            .leaves
            .iter()
            .enumerate()
            .filter(|(_, &leaf)| seen[leaf])
            .map(|(pos, _)| pos)
            .collect())
    }

    /// Strict ancestors with their shortest edge distance, sorted by `(depth, name)`.
    pub fn hypernyms(&self, concept: &str) -> Result<Vec<(String, usize)>> {
        let start = self.index_of(concept)?;
        let mut depth = vec![usize::MAX; self.concepts.len()];
        depth[start] = 0;
        let mut queue = VecDeque::from([start]);
        while let Some(node) = queue.pop_front() {
            for &p in &self.parents[node] {
                if depth[p] == usize::MAX {
                    depth[p] = depth[node] + 1;
                    queue.push_back(p);
                }
            }
        }
        let mut out: Vec<(String, usize)> = depth
            .iter()
            .enumerate()
            .filter(|&(i, &d)| i != start && d != usize::MAX)
            .map(|(i, &d)| (self.concepts[i].clone(), d))
            .collect();
        out.sort_by(|a, b| a.1.cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
        Ok(out)
    }
}

/// Concept names end up in comma lists and line-oriented files.
fn check_name(name: &str) -> std::result::Result<(), String> {
    if name.contains(',') || name.contains(char::is_whitespace) {
        Err(format!("concept name {name:?} must not contain commas or whitespace"))
    } else {
        Ok(())
    }
}
