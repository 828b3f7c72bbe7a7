//! Enumeration of `Emb(A, M)` and the sup-metric between embeddings.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::scalar::Scalar;
use crate::structures::{tuples, MetricStructure};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum EmbeddingError {
    #[error("embedding {0} is not a member of this space")]
    NotInSpace(Embedding),
    #[error("source and target use different signatures")]
    SignatureMismatch,
    #[error("embeddings do not compose: inner target differs from outer source")]
    StructureMismatch,
}

/// A point mapping from a source universe into a target universe.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Embedding(pub Vec<usize>);

impl Embedding {
    pub fn identity(n: usize) -> Self {
        Embedding((0..n).collect())
    }

    pub fn image(&self, a: usize) -> usize {
        self.0[a]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    /// `self ∘ inner`: first apply `inner`, then `self`.
    pub fn compose(&self, inner: &Embedding) -> Embedding {
        Embedding(inner.0.iter().map(|&b| self.0[b]).collect())
    }

    /// Injective, isometric and predicate-preserving, checked directly.
    pub fn is_embedding<T: Scalar>(
        &self,
        source: &MetricStructure<T>,
        target: &MetricStructure<T>,
    ) -> bool {
        let n = source.len();
        if self.0.len() != n || self.0.iter().any(|&x| x >= target.len()) {
            return false;
        }
        for i in 0..n {
            for j in 0..n {
                if i != j && self.0[i] == self.0[j] {
                    return false;
                }
                if !target
                    .dist(self.0[i], self.0[j])
                    .approx_eq(source.dist(i, j))
                {
                    return false;
                }
            }
        }
        if source.signature() != target.signature() {
            return false;
        }
        for (k, sym) in source.signature().symbols().iter().enumerate() {
            for t in tuples(n, sym.arity) {
                let image: Vec<usize> = t.iter().map(|&a| self.0[a]).collect();
                if !target
                    .predicate(k, &image)
                    .approx_eq(source.predicate(k, &t))
                {
                    return false;
                }
            }
        }
        true
    }
}

impl fmt::Display for Embedding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, "]")
    }
}

/// The finite set `Emb(A, M)` in lexicographic order with its `ρ_A` matrix.
#[derive(Debug, Clone)]
pub struct EmbeddingSpace<T> {
    source: Arc<MetricStructure<T>>,
    target: Arc<MetricStructure<T>>,
    embeddings: Vec<Embedding>,
    index: HashMap<Embedding, usize>,
    rho: Vec<T>,
}

impl<T: Scalar> EmbeddingSpace<T> {
    /// Enumerate by backtracking; each extension is pruned by distances to
    /// already-placed points and by every predicate tuple it completes.
    pub fn enumerate(
        source: Arc<MetricStructure<T>>,
        target: Arc<MetricStructure<T>>,
    ) -> Result<Self, EmbeddingError> {
        if source.signature() != target.signature() {
            return Err(EmbeddingError::SignatureMismatch);
        }
        let n = source.len();
        // completed[i]: (symbol, tuple) pairs whose largest coordinate is i.
        let mut completed: Vec<Vec<(usize, Vec<usize>)>> = vec![Vec::new(); n];
        for (k, sym) in source.signature().symbols().iter().enumerate() {
            for t in tuples(n, sym.arity) {
                if let Some(&top) = t.iter().max() {
                    completed[top].push((k, t));
                }
            }
        }
        let mut found = Vec::new();
        let mut partial = Vec::with_capacity(n);
        let mut used = vec![false; target.len()];
        extend(
            &source,
            &target,
            &completed,
            &mut partial,
            &mut used,
            &mut found,
        );
        Ok(Self::from_list(source, target, found))
    }

    fn from_list(
        source: Arc<MetricStructure<T>>,
        target: Arc<MetricStructure<T>>,
        embeddings: Vec<Embedding>,
    ) -> Self {
        let m = embeddings.len();
        let mut rho = Vec::with_capacity(m * m);
        for a in &embeddings {
            for b in &embeddings {
                rho.push(sup_distance(&target, a, b));
            }
        }
        let index = embeddings
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, e)| (e, i))
            .collect();
        Self {
            source,
            target,
            embeddings,
            index,
            rho,
        }
    }

    pub fn source(&self) -> &Arc<MetricStructure<T>> {
        &self.source
    }

    pub fn target(&self) -> &Arc<MetricStructure<T>> {
        &self.target
    }

    pub fn len(&self) -> usize {
        self.embeddings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.embeddings.is_empty()
    }

    pub fn embeddings(&self) -> &[Embedding] {
        &self.embeddings
    }

    pub fn get(&self, i: usize) -> &Embedding {
        &self.embeddings[i]
    }

    pub fn index_of(&self, e: &Embedding) -> Option<usize> {
        self.index.get(e).copied()
    }

    /// `ρ_A` between the `i`-th and `j`-th embeddings.
    pub fn rho(&self, i: usize, j: usize) -> &T {
        &self.rho[i * self.len() + j]
    }

    /// `min(ρ_A, 1)`, the cost used for every dual computation.
    pub fn truncated_rho(&self, i: usize, j: usize) -> T {
        T::min_of(self.rho(i, j).clone(), T::one())
    }

    pub fn rho_distance(&self, a: &Embedding, b: &Embedding) -> Result<T, EmbeddingError> {
        let i = self
            .index_of(a)
            .ok_or_else(|| EmbeddingError::NotInSpace(a.clone()))?;
        let j = self
            .index_of(b)
            .ok_or_else(|| EmbeddingError::NotInSpace(b.clone()))?;
        Ok(self.rho(i, j).clone())
    }

    /// Two spaces are the same when they join equal structures.
    pub fn same_as(&self, other: &Self) -> bool {
        (Arc::ptr_eq(&self.source, &other.source) || self.source == other.source)
            && (Arc::ptr_eq(&self.target, &other.target) || self.target == other.target)
    }

    /// Every pair of embeddings sits at truncated distance 1 (or the space
    /// has at most one point).
    pub fn is_discrete(&self) -> bool {
        let m = self.len();
        (0..m).all(|i| (0..m).all(|j| i == j || self.truncated_rho(i, j).approx_eq(&T::one())))
    }
}

fn sup_distance<T: Scalar>(target: &MetricStructure<T>, a: &Embedding, b: &Embedding) -> T {
    a.0.iter()
        .zip(&b.0)
        .map(|(&x, &y)| target.dist(x, y).clone())
        .fold(T::zero(), T::max_of)
}

fn extend<T: Scalar>(
    source: &MetricStructure<T>,
    target: &MetricStructure<T>,
    completed: &[Vec<(usize, Vec<usize>)>],
    partial: &mut Vec<usize>,
    used: &mut [bool],
    found: &mut Vec<Embedding>,
) {
    let i = partial.len();
    if i == source.len() {
        found.push(Embedding(partial.clone()));
        return;
    }
    for x in 0..target.len() {
        if used[x] {
            continue;
        }
        let fits = (0..i).all(|j| target.dist(x, partial[j]).approx_eq(source.dist(i, j)));
        if !fits {
            continue;
        }
        partial.push(x);
        let preserves = completed[i].iter().all(|(k, t)| {
            let image: Vec<usize> = t.iter().map(|&a| partial[a]).collect();
            target
                .predicate(*k, &image)
                .approx_eq(source.predicate(*k, t))
        });
        if preserves {
            used[x] = true;
            extend(source, target, completed, partial, used, found);
            used[x] = false;
        }
        partial.pop();
    }
}

/// Post-compose every embedding of `space` with `outer: M → M'`, returning
/// the images as indices into `into` (which must be `Emb(A, M')`).
pub fn push_forward_indices<T: Scalar>(
    space: &EmbeddingSpace<T>,
    outer: &Embedding,
    into: &EmbeddingSpace<T>,
) -> Result<Vec<usize>, EmbeddingError> {
    space
        .embeddings()
        .iter()
        .map(|e| {
            let c = outer.compose(e);
            into.index_of(&c).ok_or(EmbeddingError::NotInSpace(c))
        })
        .collect()
}
