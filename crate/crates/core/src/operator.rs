//! Dense real symmetric positive-semidefinite operators.
//!
//! Every word meaning, worldly context, negation and mixture in the crate is an
//! [`Operator`]. Values are immutable; all algebra returns new operators.
//! Spectral functions (square root, pseudoinverse, normalization by the largest
//! eigenvalue) go through a full symmetric eigendecomposition, with an exact
//! fast path for diagonal matrices, which is what the taxonomy builder produces.

use std::collections::HashSet;
use std::fmt::Write as _;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

/// Largest tolerated `|a_ij - a_ji|`.
pub const SYMMETRY_TOL: f64 = 1e-12;
/// Eigenvalues in `[-CLAMP_TOL, 0)` are clamped to zero; anything lower is rejected.
pub const CLAMP_TOL: f64 = 1e-10;
/// Entrywise equality tolerance used across the crate.
pub const EQ_TOL: f64 = 1e-9;
/// Operators whose trace is at or below this are treated as zero.
pub const ZERO_TOL: f64 = 1e-12;

/// Which scale an operator is brought to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Normalization {
    /// Unit trace: the "state" view.
    Trace,
    /// Largest eigenvalue one: the "predicate" view.
    Sup,
}

/// Factor dimensions of a composite space, outermost factor first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubsystemShape {
    factor_dims: Vec<usize>,
}

impl SubsystemShape {
    pub fn new(factor_dims: Vec<usize>) -> Result<Self> {
        if factor_dims.is_empty() || factor_dims.contains(&0) {
            return Err(Error::InvalidConfig(format!(
                "subsystem shape {factor_dims:?} must list positive factor dimensions"
            )));
        }
        Ok(Self { factor_dims })
    }

    pub fn factor_dims(&self) -> &[usize] {
        &self.factor_dims
    }

    pub fn total_dim(&self) -> usize {
        self.factor_dims.iter().product()
    }

    /// `(before, factor, after)` dimensions around factor `k`.
    fn split(&self, k: usize) -> (usize, usize, usize) {
        let before = self.factor_dims[..k].iter().product();
        let after = self.factor_dims[k + 1..].iter().product();
        (before, self.factor_dims[k], after)
    }

    fn check(&self, dim: usize, factor: usize) -> Result<()> {
        if self.total_dim() != dim {
            return Err(Error::DimMismatch {
                context: "subsystem shape product",
                expected: dim,
                found: self.total_dim(),
            });
        }
        if factor >= self.factor_dims.len() {
            return Err(Error::InvalidIndex {
                index: factor,
                dim: self.factor_dims.len(),
            });
        }
        Ok(())
    }
}

/// Result of [`validate`]: the raw numbers behind the operator invariants.
#[derive(Clone, Debug, PartialEq)]
pub struct Diagnostics {
    pub dim: usize,
    pub finite: bool,
    pub symmetry_defect: f64,
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
    pub trace: f64,
    pub labels_valid: bool,
}

impl Diagnostics {
    pub fn passes(&self) -> bool {
        self.finite
            && self.symmetry_defect <= SYMMETRY_TOL
            && self.min_eigenvalue >= -CLAMP_TOL
            && self.labels_valid
    }
}

/// Check a raw square matrix against the operator invariants without building one.
pub fn validate(entries: &DMatrix<f64>, labels: &[String]) -> Diagnostics {
    let dim = entries.nrows();
    let finite = entries.iter().all(|v| v.is_finite());
    let square = entries.is_square();
    let symmetry_defect = if square { symmetry_defect(entries) } else { f64::INFINITY };
    let (min_eigenvalue, max_eigenvalue) = if finite && square && dim > 0 {
        let sym = symmetrized(entries);
        let eig = eigenvalues(&sym);
        (
            eig.iter().copied().fold(f64::INFINITY, f64::min),
            eig.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        )
    } else {
        (f64::NAN, f64::NAN)
    };
    Diagnostics {
        dim,
        finite,
        symmetry_defect,
        min_eigenvalue,
        max_eigenvalue,
        trace: if square { entries.trace() } else { f64::NAN },
        labels_valid: labels_ok(labels, dim).is_ok(),
    }
}

/// A real symmetric PSD matrix with optional basis labels.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    entries: DMatrix<f64>,
    labels: Vec<String>,
}

impl Operator {
    /// Validating constructor: symmetric within [`SYMMETRY_TOL`], PSD up to
    /// [`CLAMP_TOL`]. Slightly negative eigenvalues are clamped to zero.
    pub fn new(entries: DMatrix<f64>, labels: Vec<String>) -> Result<Self> {
        if !entries.is_square() {
            return Err(Error::DimMismatch {
                context: "operator must be square; columns",
                expected: entries.nrows(),
                found: entries.ncols(),
            });
        }
        if entries.nrows() == 0 {
            return Err(Error::InvalidConfig("operator dimension must be positive".into()));
        }
        if !entries.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite);
        }
        labels_ok(&labels, entries.nrows())?;
        let defect = symmetry_defect(&entries);
        if defect > SYMMETRY_TOL {
            return Err(Error::NotSymmetric { defect });
        }
        let sym = symmetrized(&entries);
        let entries = if is_diagonal(&sym) {
            let min = sym.diagonal().min();
            if min < -CLAMP_TOL {
                return Err(Error::NotPsd { min_eigenvalue: min });
            }
            sym.map(|v| v.max(0.0))
        } else {
            let eig = SymmetricEigen::new(sym.clone());
            let min = eig.eigenvalues.min();
            if min < -CLAMP_TOL {
                return Err(Error::NotPsd { min_eigenvalue: min });
            }
            if min < 0.0 {
                reconstruct(&eig, |l| l.max(0.0))
            } else {
                sym
            }
        };
        Ok(Self { entries, labels })
    }

    /// Build from an operation known to preserve symmetry and positivity.
    pub(crate) fn trusted(entries: DMatrix<f64>, labels: Vec<String>) -> Self {
        debug_assert!(entries.is_square());
        let labels = if labels.len() == entries.nrows() { labels } else { Vec::new() };
        Self {
            entries: symmetrized(&entries),
            labels,
        }
    }

    /// Project an arbitrary symmetric matrix onto the PSD cone by zeroing
    /// every negative eigenvalue.
    pub(crate) fn clamped(entries: DMatrix<f64>, labels: Vec<String>) -> Self {
        let sym = symmetrized(&entries);
        let entries = if is_diagonal(&sym) {
            sym.map(|v| v.max(0.0))
        } else {
            let eig = SymmetricEigen::new(sym.clone());
            if eig.eigenvalues.min() < 0.0 {
                reconstruct(&eig, |l| l.max(0.0))
            } else {
                sym
            }
        };
        Self::trusted(entries, labels)
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::DimMismatch {
                context: "row length",
                expected: n,
                found: bad.len(),
            });
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]), Vec::new())
    }

    pub fn from_diagonal(diagonal: &[f64]) -> Result<Self> {
        let n = diagonal.len();
        Self::new(
            DMatrix::from_fn(n, n, |i, j| if i == j { diagonal[i] } else { 0.0 }),
            Vec::new(),
        )
    }

    pub fn identity(dim: usize) -> Self {
        Self::trusted(DMatrix::identity(dim, dim), Vec::new())
    }

    pub fn zeros(dim: usize) -> Self {
        Self::trusted(DMatrix::zeros(dim, dim), Vec::new())
    }

    /// Rank-one projector onto basis vector `index`.
    pub fn pure(index: usize, dim: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::InvalidIndex { index, dim });
        }
        let mut m = DMatrix::zeros(dim, dim);
        m[(index, index)] = 1.0;
        Ok(Self::trusted(m, Vec::new()))
    }

    /// Weighted sum `Σ wᵢ·Aᵢ` with nonnegative weights.
    pub fn mix(terms: &[(f64, &Operator)]) -> Result<Self> {
        let Some((_, first)) = terms.first() else {
            return Err(Error::EmptyMixture);
        };
        let dim = first.dim();
        let mut acc = DMatrix::zeros(dim, dim);
        let mut total = 0.0;
        for (w, op) in terms {
            if !w.is_finite() || *w < 0.0 {
                return Err(Error::InvalidWeight(format!("mixture weight {w} must be nonnegative")));
            }
            if op.dim() != dim {
                return Err(Error::DimMismatch {
                    context: "mixture term",
                    expected: dim,
                    found: op.dim(),
                });
            }
            total += w;
            acc += &op.entries * *w;
        }
        if total <= 0.0 {
            return Err(Error::EmptyMixture);
        }
        let labels = if terms.iter().all(|(_, op)| op.labels == first.labels) {
            first.labels.clone()
        } else {
            Vec::new()
        };
        Ok(Self::trusted(acc, labels))
    }

    pub fn with_labels(self, labels: Vec<String>) -> Result<Self> {
        labels_ok(&labels, self.dim())?;
        Ok(Self { labels, ..self })
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.entries[(row, col)]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn trace(&self) -> f64 {
        self.entries.trace()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        self.entries.diagonal().iter().copied().collect()
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim())
            .map(|i| self.entries.row(i).iter().copied().collect())
            .collect()
    }

    pub fn is_diagonal(&self) -> bool {
        is_diagonal(&self.entries)
    }

    pub fn is_zero(&self) -> bool {
        self.trace() <= ZERO_TOL
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut eig = eigenvalues(&self.entries);
        eig.sort_by(f64::total_cmp);
        eig
    }

    pub fn min_eigenvalue(&self) -> f64 {
        eigenvalues(&self.entries).into_iter().fold(f64::INFINITY, f64::min)
    }

    pub fn max_eigenvalue(&self) -> f64 {
        eigenvalues(&self.entries).into_iter().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn validate(&self) -> Diagnostics {
        validate(&self.entries, &self.labels)
    }

    pub fn scale(&self, factor: f64) -> Result<Self> {
        if !factor.is_finite() || factor < 0.0 {
            return Err(Error::InvalidWeight(format!("scale factor {factor} must be nonnegative")));
        }
        Ok(Self::trusted(&self.entries * factor, self.labels.clone()))
    }

    /// Largest entrywise difference to `other`, or infinity on dimension mismatch.
    pub fn max_abs_diff(&self, other: &Operator) -> f64 {
        if self.dim() != other.dim() {
            return f64::INFINITY;
        }
        self.entries
            .iter()
            .zip(other.entries.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &Operator, tol: f64) -> bool {
        self.max_abs_diff(other) <= tol
    }

    /// Kronecker product. Labels combine as `a⊗b`.
    pub fn tensor(&self, other: &Operator) -> Operator {
        let labels = if self.labels.is_empty() || other.labels.is_empty() {
            Vec::new()
        } else {
            self.labels
                .iter()
                .flat_map(|a| other.labels.iter().map(move |b| format!("{a}⊗{b}")))
                .collect()
        };
        Self::trusted(self.entries.kronecker(&other.entries), labels)
    }

    /// Trace out every factor except `keep`.
    pub fn partial_trace(&self, shape: &SubsystemShape, keep: usize) -> Result<Operator> {
        shape.check(self.dim(), keep)?;
        let (before, d, after) = shape.split(keep);
        let mut out = DMatrix::zeros(d, d);
        for y in 0..d {
            for y2 in y..d {
                let mut acc = 0.0;
                for x in 0..before {
                    for z in 0..after {
                        acc += self.entries[((x * d + y) * after + z, (x * d + y2) * after + z)];
                    }
                }
                out[(y, y2)] = acc;
                out[(y2, y)] = acc;
            }
        }
        let labels = factor_labels(&self.labels, shape, keep, d, after);
        Ok(Self::trusted(out, labels))
    }

    /// Entrywise (Schur) product.
    pub fn hadamard(&self, other: &Operator) -> Result<Operator> {
        self.same_dim(other, "hadamard operand")?;
        Ok(Self::trusted(
            self.entries.component_mul(&other.entries),
            merge_labels(&self.labels, &other.labels),
        ))
    }

    /// `√effect · self · √effect`.
    pub fn conjugate_update(&self, effect: &Operator) -> Result<Operator> {
        self.same_dim(effect, "conjugation effect")?;
        let out = if effect.is_diagonal() {
            let roots: Vec<f64> = effect.diagonal().iter().map(|v| v.max(0.0).sqrt()).collect();
            DMatrix::from_fn(self.dim(), self.dim(), |i, j| {
                roots[i] * self.entries[(i, j)] * roots[j]
            })
        } else {
            let root = effect.sqrt();
            &root.entries * &self.entries * &root.entries
        };
        Ok(Self::trusted(out, merge_labels(&self.labels, &effect.labels)))
    }

    /// Conjugate by `I ⊗ √effect ⊗ I`, with `effect` acting on one factor of `shape`.
    /// Costs `O(dim² · factor_dim)` instead of a full matrix product.
    pub fn conjugate_local(
        &self,
        shape: &SubsystemShape,
        factor: usize,
        effect: &Operator,
    ) -> Result<Operator> {
        shape.check(self.dim(), factor)?;
        let (before, d, after) = shape.split(factor);
        if effect.dim() != d {
            return Err(Error::DimMismatch {
                context: "local effect on subsystem",
                expected: d,
                found: effect.dim(),
            });
        }
        let root = effect.sqrt();
        let r = &root.entries;
        let n = self.dim();
        let index = |x: usize, y: usize, z: usize| (x * d + y) * after + z;
        // left multiply: rows mix within the factor
        let mut left = DMatrix::<f64>::zeros(n, n);
        for x in 0..before {
            for z in 0..after {
                for y in 0..d {
                    let row = index(x, y, z);
                    for y2 in 0..d {
                        let c = r[(y, y2)];
                        if c == 0.0 {
                            continue;
                        }
                        let src = index(x, y2, z);
                        for col in 0..n {
                            left[(row, col)] += c * self.entries[(src, col)];
                        }
                    }
                }
            }
        }
        // right multiply: columns mix within the factor
        let mut out = DMatrix::<f64>::zeros(n, n);
        for x in 0..before {
            for z in 0..after {
                for y in 0..d {
                    let col = index(x, y, z);
                    for y2 in 0..d {
                        let c = r[(y2, y)];
                        if c == 0.0 {
                            continue;
                        }
                        let src = index(x, y2, z);
                        for row in 0..n {
                            out[(row, col)] += left[(row, src)] * c;
                        }
                    }
                }
            }
        }
        Ok(Self::trusted(out, self.labels.clone()))
    }

    pub fn normalize(&self, mode: Normalization) -> Result<Operator> {
        if self.is_zero() {
            return Err(Error::ZeroOperator("cannot normalize the zero operator"));
        }
        let scale = match mode {
            Normalization::Trace => self.trace(),
            Normalization::Sup => self.max_eigenvalue(),
        };
        if scale <= ZERO_TOL {
            return Err(Error::ZeroOperator("cannot normalize the zero operator"));
        }
        Ok(Self::trusted(&self.entries / scale, self.labels.clone()))
    }

    /// Moore–Penrose pseudoinverse; eigenvalues at or below `tol` count as zero.
    pub fn pseudoinverse(&self, tol: f64) -> Result<Operator> {
        if self.max_eigenvalue() <= tol {
            return Err(Error::ZeroOperator("the pseudoinverse of the zero operator is undefined"));
        }
        let m = spectral_map(&self.entries, |l| if l > tol { 1.0 / l } else { 0.0 });
        Ok(Self::trusted(m, self.labels.clone()))
    }

    /// Principal square root.
    pub fn sqrt(&self) -> Operator {
        Self::trusted(
            spectral_map(&self.entries, |l| l.max(0.0).sqrt()),
            self.labels.clone(),
        )
    }

    /// Orthogonal projector onto the eigenvectors with eigenvalue above `tol`.
    pub fn support_projector(&self, tol: f64) -> Operator {
        Self::trusted(
            spectral_map(&self.entries, |l| if l > tol { 1.0 } else { 0.0 }),
            self.labels.clone(),
        )
    }

    /// `Tr(self · other)`.
    pub fn trace_product(&self, other: &Operator) -> Result<f64> {
        self.same_dim(other, "trace product operand")?;
        Ok(self
            .entries
            .iter()
            .zip(other.entries.transpose().iter())
            .map(|(a, b)| a * b)
            .sum())
    }

    fn same_dim(&self, other: &Operator, context: &'static str) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimMismatch {
                context,
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(())
    }

    /// Serialize in the line-based operator text format.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "OPERATOR {}", self.dim());
        if self.labels.is_empty() {
            out.push_str("LABELS -\n");
        } else {
            let _ = writeln!(out, "LABELS {}", self.labels.join(","));
        }
        for i in 0..self.dim() {
            let row: Vec<String> = (0..self.dim()).map(|j| format!("{}", self.entries[(i, j)])).collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Operator> {
        let mut lines = TextLines::new(text);
        let op = Self::read_block(&mut lines)?;
        if let Some((n, line)) = lines.next_nonblank() {
            return Err(Error::parse(n, format!("unexpected trailing content {line:?}")));
        }
        Ok(op)
    }

    pub(crate) fn read_block(lines: &mut TextLines<'_>) -> Result<Operator> {
        let (n, header) = lines.require("OPERATOR header")?;
        let dim: usize = header
            .strip_prefix("OPERATOR ")
            .and_then(|d| d.trim().parse().ok())
            .filter(|d| *d > 0)
            .ok_or_else(|| Error::parse(n, format!("expected `OPERATOR <dim>`, found {header:?}")))?;
        let (n, label_line) = lines.require("LABELS line")?;
        let raw = label_line
            .strip_prefix("LABELS ")
            .ok_or_else(|| Error::parse(n, format!("expected `LABELS ...`, found {label_line:?}")))?
            .trim();
        let labels: Vec<String> = if raw == "-" {
            Vec::new()
        } else {
            raw.split(',').map(str::to_string).collect()
        };
        let mut m = DMatrix::zeros(dim, dim);
        for i in 0..dim {
            let (n, row) = lines.require("operator row")?;
            let values: Vec<&str> = row.split_whitespace().collect();
            if values.len() != dim {
                return Err(Error::parse(n, format!("expected {dim} entries, found {}", values.len())));
            }
            for (j, v) in values.iter().enumerate() {
                m[(i, j)] = v
                    .parse::<f64>()
                    .map_err(|_| Error::parse(n, format!("invalid number {v:?}")))?;
            }
        }
        Self::new(m, labels).map_err(|e| match e {
            Error::Parse { .. } => e,
            other => Error::parse(n, other.to_string()),
        })
    }
}

/// Cursor over numbered lines (1-based) for the text formats.
pub(crate) struct TextLines<'a> {
    lines: Vec<&'a str>,
    pos: usize,
}

impl<'a> TextLines<'a> {
    pub(crate) fn new(text: &'a str) -> Self {
        Self {
            lines: text.lines().collect(),
            pos: 0,
        }
    }

    pub(crate) fn next(&mut self) -> Option<(usize, &'a str)> {
        let line = self.lines.get(self.pos)?;
        self.pos += 1;
        Some((self.pos, line.trim_end_matches('\r')))
    }

    pub(crate) fn peek(&self) -> Option<&'a str> {
        self.lines.get(self.pos).map(|l| l.trim_end_matches('\r'))
    }

    pub(crate) fn next_nonblank(&mut self) -> Option<(usize, &'a str)> {
        while let Some((n, line)) = self.next() {
            if !line.trim().is_empty() {
                return Some((n, line));
            }
        }
        None
    }

    pub(crate) fn require(&mut self, what: &str) -> Result<(usize, &'a str)> {
        let end = self.lines.len() + 1;
        self.next()
            .ok_or_else(|| Error::parse(end, format!("unexpected end of input, expected {what}")))
    }
}

fn labels_ok(labels: &[String], dim: usize) -> Result<()> {
    if labels.is_empty() {
        return Ok(());
    }
    if labels.len() != dim {
        return Err(Error::InvalidLabels(format!(
            "{} labels for dimension {dim}",
            labels.len()
        )));
    }
    let mut seen = HashSet::new();
    for l in labels {
        if !seen.insert(l.as_str()) {
            return Err(Error::InvalidLabels(format!("duplicate label {l:?}")));
        }
    }
    Ok(())
}

fn merge_labels(a: &[String], b: &[String]) -> Vec<String> {
    if b.is_empty() || a == b {
        a.to_vec()
    } else if a.is_empty() {
        b.to_vec()
    } else {
        Vec::new()
    }
}

fn factor_labels(
    labels: &[String],
    shape: &SubsystemShape,
    keep: usize,
    d: usize,
    after: usize,
) -> Vec<String> {
    if labels.is_empty() {
        return Vec::new();
    }
    let factors = shape.factor_dims().len();
    if factors == 1 {
        return labels.to_vec();
    }
    let picked: Option<Vec<String>> = (0..d)
        .map(|y| {
            let label = &labels[y * after];
            let parts: Vec<&str> = label.split('⊗').collect();
            (parts.len() == factors).then(|| parts[keep].to_string())
        })
        .collect();
    match picked {
        Some(p) if labels_ok(&p, d).is_ok() => p,
        _ => Vec::new(),
    }
}

fn symmetry_defect(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    let mut defect: f64 = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            defect = defect.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    defect
}

fn symmetrized(m: &DMatrix<f64>) -> DMatrix<f64> {
    let n = m.nrows();
    DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            m[(i, i)]
        } else {
            0.5 * (m[(i, j)] + m[(j, i)])
        }
    })
}

fn is_diagonal(m: &DMatrix<f64>) -> bool {
    let n = m.nrows();
    (0..n).all(|i| (0..n).all(|j| i == j || m[(i, j)] == 0.0))
}

fn eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    if is_diagonal(m) {
        m.diagonal().iter().copied().collect()
    } else {
        SymmetricEigen::new(symmetrized(m)).eigenvalues.iter().copied().collect()
    }
}

fn reconstruct(eig: &SymmetricEigen<f64, nalgebra::Dyn>, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
    let v = &eig.eigenvectors;
    let mut scaled = v.clone();
    for (k, l) in eig.eigenvalues.iter().enumerate() {
        let fl = f(*l);
        scaled.column_mut(k).scale_mut(fl);
    }
    symmetrized(&(scaled * v.transpose()))
}

fn spectral_map(m: &DMatrix<f64>, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
    if is_diagonal(m) {
        let n = m.nrows();
        DMatrix::from_fn(n, n, |i, j| if i == j { f(m[(i, i)]) } else { 0.0 })
    } else {
        reconstruct(&SymmetricEigen::new(symmetrized(m)), f)
    }
}
