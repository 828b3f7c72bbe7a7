//! Finitely supported probability measures on embedding spaces and
//! `[0,1]`-valued 1-Lipschitz colorings of those spaces.

use std::collections::BTreeMap;
use std::sync::Arc;

use thiserror::Error;

use crate::embeddings::{Embedding, EmbeddingSpace};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum MeasureError {
    #[error("operands live on different embedding spaces")]
    SpaceMismatch,
    #[error("inner target and outer source are different structures")]
    StructureMismatch,
    #[error("atom index {0} outside the embedding space")]
    NotInSpace(usize),
    #[error("embedding {0} is not a member of the space")]
    UnknownEmbedding(Embedding),
    #[error("weights must be positive")]
    NonPositiveWeight,
    #[error("weights sum to {0}, not 1")]
    MassNotOne(String),
    #[error("coloring has {found} values for a space of {expected} embeddings")]
    WrongLength { expected: usize, found: usize },
    #[error("coloring value at {0} is outside [0,1]")]
    OutOfRange(usize),
    #[error("coloring is not 1-Lipschitz at ({0},{1})")]
    NotLipschitz(usize, usize),
}

/// `Σ λ_i δ_{α_i}` with atoms keyed by their index in the space. Atoms are
/// merged and kept sorted, so structural equality is measure equality.
#[derive(Debug, Clone)]
pub struct Measure<T> {
    space: Arc<EmbeddingSpace<T>>,
    atoms: BTreeMap<usize, T>,
}

impl<T: Scalar> PartialEq for Measure<T> {
    fn eq(&self, other: &Self) -> bool {
        self.space.same_as(&other.space) && self.atoms == other.atoms
    }
}

impl<T: Scalar> Measure<T> {
    pub fn new(
        space: Arc<EmbeddingSpace<T>>,
        atoms: impl IntoIterator<Item = (usize, T)>,
    ) -> Result<Self, MeasureError> {
        let mut merged: BTreeMap<usize, T> = BTreeMap::new();
        for (i, w) in atoms {
            if i >= space.len() {
                return Err(MeasureError::NotInSpace(i));
            }
            if !w.is_pos() {
                return Err(MeasureError::NonPositiveWeight);
            }
            let slot = merged.entry(i).or_insert_with(T::zero);
            *slot = slot.clone() + w;
        }
        let total = merged.values().cloned().fold(T::zero(), |a, b| a + b);
        if !total.approx_eq(&T::one()) {
            return Err(MeasureError::MassNotOne(total.to_string()));
        }
        Ok(Self {
            space,
            atoms: merged,
        })
    }

    /// Built from embeddings rather than indices.
    pub fn from_embeddings(
        space: Arc<EmbeddingSpace<T>>,
        atoms: impl IntoIterator<Item = (Embedding, T)>,
    ) -> Result<Self, MeasureError> {
        let mut indexed = Vec::new();
        for (e, w) in atoms {
            let i = space
                .index_of(&e)
                .ok_or_else(|| MeasureError::UnknownEmbedding(e.clone()))?;
            indexed.push((i, w));
        }
        Self::new(space, indexed)
    }

    pub fn dirac(space: Arc<EmbeddingSpace<T>>, i: usize) -> Result<Self, MeasureError> {
        Self::new(space, [(i, T::one())])
    }

    pub fn uniform(space: Arc<EmbeddingSpace<T>>) -> Result<Self, MeasureError> {
        let w = T::one() / T::from_usize(space.len());
        let n = space.len();
        Self::new(space, (0..n).map(|i| (i, w.clone())))
    }

    pub fn space(&self) -> &Arc<EmbeddingSpace<T>> {
        &self.space
    }

    pub fn atoms(&self) -> impl Iterator<Item = (usize, &T)> {
        self.atoms.iter().map(|(&i, w)| (i, w))
    }

    pub fn support(&self) -> Vec<usize> {
        self.atoms.keys().copied().collect()
    }

    pub fn weight(&self, i: usize) -> T {
        self.atoms.get(&i).cloned().unwrap_or_else(T::zero)
    }

    pub fn total_mass(&self) -> T {
        self.atoms.values().cloned().fold(T::zero(), |a, b| a + b)
    }

    /// Dense weight vector over the whole space.
    pub fn dense(&self) -> Vec<T> {
        (0..self.space.len()).map(|i| self.weight(i)).collect()
    }
}

/// A 1-Lipschitz map `(Emb(A,M), ρ_A) → [0,1]`, stored per embedding.
#[derive(Debug, Clone)]
pub struct Coloring<T> {
    space: Arc<EmbeddingSpace<T>>,
    values: Vec<T>,
}

impl<T: Scalar> Coloring<T> {
    pub fn new(space: Arc<EmbeddingSpace<T>>, values: Vec<T>) -> Result<Self, MeasureError> {
        if values.len() != space.len() {
            return Err(MeasureError::WrongLength {
                expected: space.len(),
                found: values.len(),
            });
        }
        for (i, v) in values.iter().enumerate() {
            if v.is_neg() || !v.approx_le(&T::one()) {
                return Err(MeasureError::OutOfRange(i));
            }
        }
        for i in 0..values.len() {
            for j in i + 1..values.len() {
                let gap = (values[i].clone() - values[j].clone()).abs();
                if !gap.approx_le(space.rho(i, j)) {
                    return Err(MeasureError::NotLipschitz(i, j));
                }
            }
        }
        Ok(Self { space, values })
    }

    pub fn space(&self) -> &Arc<EmbeddingSpace<T>> {
        &self.space
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn value(&self, i: usize) -> &T {
        &self.values[i]
    }
}

/// `κ(ν) = Σ λ_i κ(α_i)`.
pub fn evaluate_coloring<T: Scalar>(
    kappa: &Coloring<T>,
    nu: &Measure<T>,
) -> Result<T, MeasureError> {
    if !kappa.space.same_as(&nu.space) {
        return Err(MeasureError::SpaceMismatch);
    }
    Ok(nu.atoms().fold(T::zero(), |acc, (i, w)| {
        acc + w.clone() * kappa.values[i].clone()
    }))
}

/// `ν' ∘ ν = Σ_j Σ_i λ'_j λ_i δ_{α'_j ∘ α_i}` on `target = Emb(A, M)`, where
/// `inner` lives on `Emb(A,B)` and `outer` on `Emb(B,M)`.
pub fn compose_measures<T: Scalar>(
    inner: &Measure<T>,
    outer: &Measure<T>,
    target: &Arc<EmbeddingSpace<T>>,
) -> Result<Measure<T>, MeasureError> {
    let (is, os) = (inner.space(), outer.space());
    let joins = |x: &Arc<_>, y: &Arc<_>| Arc::ptr_eq(x, y) || x == y;
    if !joins(is.target(), os.source()) {
        return Err(MeasureError::StructureMismatch);
    }
    if !joins(is.source(), target.source()) || !joins(os.target(), target.target()) {
        return Err(MeasureError::SpaceMismatch);
    }
    let mut atoms = Vec::with_capacity(inner.atoms.len() * outer.atoms.len());
    for (j, wj) in outer.atoms() {
        let beta = os.get(j);
        for (i, wi) in inner.atoms() {
            let composite = beta.compose(is.get(i));
            let k = target
                .index_of(&composite)
                .ok_or(MeasureError::UnknownEmbedding(composite))?;
            atoms.push((k, wj.clone() * wi.clone()));
        }
    }
    Measure::new(target.clone(), atoms)
}

/// `{(α, ν ∘ δ_α) : α ∈ Emb(A,B)}` where `nu` lives on `Emb(B,M)`,
/// `family = Emb(A,B)` and `target = Emb(A,M)`.
pub fn pushforward_family<T: Scalar>(
    nu: &Measure<T>,
    family: &Arc<EmbeddingSpace<T>>,
    target: &Arc<EmbeddingSpace<T>>,
) -> Result<Vec<(usize, Measure<T>)>, MeasureError> {
    (0..family.len())
        .map(|a| {
            let delta = Measure::dirac(family.clone(), a)?;
            Ok((a, compose_measures(&delta, nu, target)?))
        })
        .collect()
}

/// Average `nu` (on `Emb(B,M)`) over precomposition with `Aut(B)`, given as
/// the space `Emb(B,B)`.
pub fn symmetrize_measure<T: Scalar>(
    nu: &Measure<T>,
    automorphisms: &Arc<EmbeddingSpace<T>>,
) -> Result<Measure<T>, MeasureError> {
    let uniform = Measure::uniform(automorphisms.clone())?;
    compose_measures(&uniform, nu, nu.space())
}

/// Look up `β ∘ α` for every `β ∈ Emb(B,M)` (rows) and `α ∈ Emb(A,B)`
/// (columns) as an index into `Emb(A,M)`.
pub fn composition_table<T: Scalar>(
    ab: &EmbeddingSpace<T>,
    bm: &EmbeddingSpace<T>,
    am: &EmbeddingSpace<T>,
) -> Result<Vec<Vec<usize>>, MeasureError> {
    bm.embeddings()
        .iter()
        .map(|beta| {
            ab.embeddings()
                .iter()
                .map(|alpha| {
                    let c = beta.compose(alpha);
                    am.index_of(&c).ok_or(MeasureError::UnknownEmbedding(c))
                })
                .collect()
        })
        .collect()
}
