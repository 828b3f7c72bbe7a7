//! Solver-free replay of a witness certificate in exact arithmetic.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

use num_traits::{One, Signed, Zero};

use super::certificate::{parse_certificate, CertMode, WitnessCertificate};
use crate::embeddings::{Embedding, EmbeddingSpace};
use crate::structures::structure_hash;
use crate::{Rational, Structure};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FailureClass {
    Parse,
    Structure,
    Mass,
    Marginal,
    Potential,
    Value,
    LowerBound,
}

impl FailureClass {
    pub fn name(self) -> &'static str {
        match self {
            FailureClass::Parse => "parse",
            FailureClass::Structure => "structure",
            FailureClass::Mass => "mass",
            FailureClass::Marginal => "marginal",
            FailureClass::Potential => "potential",
            FailureClass::Value => "value",
            FailureClass::LowerBound => "lower-bound",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifyFailure {
    pub class: FailureClass,
    pub detail: String,
}

impl fmt::Display for VerifyFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} failure: {}", self.class.name(), self.detail)
    }
}

impl std::error::Error for VerifyFailure {}

fn fail<T>(class: FailureClass, detail: impl Into<String>) -> Result<T, VerifyFailure> {
    Err(VerifyFailure {
        class,
        detail: detail.into(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub mode: CertMode,
    pub eps: Rational,
    /// Certified value of the witness measure.
    pub value: Rational,
    /// Proven lower bound, if the certificate carries one.
    pub lower: Option<Rational>,
    /// `true` when the certificate settles `value ≤ ε` (YES) or, in adaptive
    /// mode, a lower bound above `ε` (NO).
    pub verdict_yes: bool,
}

fn emb(e: &Embedding) -> String {
    let parts: Vec<String> = e.0.iter().map(ToString::to_string).collect();
    format!("[{}]", parts.join(","))
}

struct Replay<'a> {
    c: &'a Structure,
}

impl Replay<'_> {
    fn rho(&self, x: &Embedding, y: &Embedding) -> Rational {
        let d =
            x.0.iter()
                .zip(&y.0)
                .map(|(&p, &q)| self.c.dist(p, q).clone())
                .fold(Rational::zero(), |a, b| a.max(b));
        d.min(Rational::one())
    }

    /// `[0,1]`-valued and 1-Lipschitz for the truncated metric.
    fn check_potential(
        &self,
        values: &[(Embedding, Rational)],
    ) -> Result<HashMap<Embedding, Rational>, String> {
        let mut map = HashMap::new();
        for (e, v) in values {
            if v.is_negative() || *v > Rational::one() {
                return Err(format!("value {v} at {} is outside [0,1]", emb(e)));
            }
            if map.insert(e.clone(), v.clone()).is_some() {
                return Err(format!("{} listed twice", emb(e)));
            }
        }
        for (i, (x, fx)) in values.iter().enumerate() {
            for (y, fy) in &values[i + 1..] {
                if (fx - fy).abs() > self.rho(x, y) {
                    return Err(format!("not 1-Lipschitz between {} and {}", emb(x), emb(y)));
                }
            }
        }
        Ok(map)
    }
}

fn push(nu: &[(Embedding, Rational)], alpha: &Embedding) -> BTreeMap<Embedding, Rational> {
    let mut out: BTreeMap<Embedding, Rational> = BTreeMap::new();
    for (beta, w) in nu {
        *out.entry(beta.compose(alpha))
            .or_insert_with(Rational::zero) += w;
    }
    out
}

pub fn verify_certificate_text(input: &str) -> Result<VerifyReport, VerifyFailure> {
    let cert = parse_certificate(input).map_err(|e| VerifyFailure {
        class: FailureClass::Parse,
        detail: e.to_string(),
    })?;
    verify_certificate(&cert)
}

pub fn verify_certificate(cert: &WitnessCertificate) -> Result<VerifyReport, VerifyFailure> {
    use FailureClass::*;
    for (k, name) in ["A", "B", "C"].iter().enumerate() {
        if structure_hash(&cert.structures[k]) != cert.hashes[k] {
            return fail(Structure, format!("hash of {name} does not match"));
        }
        let s = &cert.structures[k];
        let report = s.validate(s.signature());
        if !report.passed() {
            return fail(
                Structure,
                format!("{name} is invalid: {}", report.describe(s).join("; ")),
            );
        }
    }
    let [a, b, c] = &cert.structures;
    let (a, b, c) = (
        Arc::new(a.clone()),
        Arc::new(b.clone()),
        Arc::new(c.clone()),
    );
    let ab = EmbeddingSpace::enumerate(a.clone(), b.clone()).map_err(|e| VerifyFailure {
        class: Structure,
        detail: e.to_string(),
    })?;
    if ab.embeddings() != cert.source_embeddings.as_slice() {
        return fail(Structure, "listed Emb(A,B) differs from the enumeration");
    }
    let replay = Replay { c: &c };

    // ν is a probability measure on genuine embeddings of B into C.
    let mut seen = HashSet::new();
    for (beta, w) in &cert.nu {
        if !beta.is_embedding(&b, &c) {
            return fail(
                Structure,
                format!("{} is not an embedding of B into C", emb(beta)),
            );
        }
        if !seen.insert(beta) {
            return fail(Structure, format!("{} listed twice in nu", emb(beta)));
        }
        if !w.is_positive() {
            return fail(Mass, format!("weight {w} of {} is not positive", emb(beta)));
        }
    }
    let total: Rational = cert.nu.iter().map(|(_, w)| w).sum();
    if cert.nu.is_empty() && !cert.source_embeddings.is_empty() {
        return fail(Mass, "nu has no atoms");
    }
    if !cert.nu.is_empty() && !total.is_one() {
        return fail(Mass, format!("nu has mass {total}"));
    }

    let k = cert.source_embeddings.len();
    let expected: Vec<(usize, usize)> = (0..k)
        .flat_map(|i| (i + 1..k).map(move |j| (i, j)))
        .collect();
    let listed: Vec<(usize, usize)> = cert.pairs.iter().map(|p| p.pair).collect();
    if listed != expected {
        return fail(
            Structure,
            "pairs do not enumerate every unordered pair of Emb(A,B) once",
        );
    }

    let family: Vec<BTreeMap<Embedding, Rational>> = cert
        .source_embeddings
        .iter()
        .map(|alpha| push(&cert.nu, alpha))
        .collect();
    for p in &cert.pairs {
        let (i, j) = p.pair;
        let name = format!("pair ({i},{j})");
        let (mu, mu2) = (&family[i], &family[j]);
        let mut rows: BTreeMap<Embedding, Rational> = BTreeMap::new();
        let mut cols: BTreeMap<Embedding, Rational> = BTreeMap::new();
        let mut cost = Rational::zero();
        for (x, y, m) in &p.coupling {
            if m.is_negative() {
                return fail(Marginal, format!("{name}: negative coupling entry"));
            }
            *rows.entry(x.clone()).or_insert_with(Rational::zero) += m;
            *cols.entry(y.clone()).or_insert_with(Rational::zero) += m;
            cost += m * replay.rho(x, y);
        }
        rows.retain(|_, v| !v.is_zero());
        cols.retain(|_, v| !v.is_zero());
        if &rows != mu {
            return fail(
                Marginal,
                format!("{name}: first marginal differs from ν∘δ_{i}"),
            );
        }
        if &cols != mu2 {
            return fail(
                Marginal,
                format!("{name}: second marginal differs from ν∘δ_{j}"),
            );
        }
        let phi = replay
            .check_potential(&p.potential)
            .map_err(|d| VerifyFailure {
                class: Potential,
                detail: format!("{name}: {d}"),
            })?;
        let mut net: BTreeMap<Embedding, Rational> = mu.clone();
        for (e, w) in mu2 {
            *net.entry(e.clone()).or_insert_with(Rational::zero) -= w;
        }
        net.retain(|_, v| !v.is_zero());
        if phi.len() != net.len() || net.keys().any(|e| !phi.contains_key(e)) {
            return fail(
                Potential,
                format!("{name}: potential must be listed exactly where the measures differ"),
            );
        }
        let gap: Rational = net.iter().map(|(e, w)| &phi[e] * w).sum();
        if gap != p.bound {
            return fail(
                Potential,
                format!("{name}: potential gap {gap} differs from bound {}", p.bound),
            );
        }
        if cost != p.bound {
            return fail(
                Value,
                format!(
                    "{name}: coupling cost {cost} differs from bound {}",
                    p.bound
                ),
            );
        }
    }
    let max = cert
        .pairs
        .iter()
        .map(|p| p.bound.clone())
        .fold(Rational::zero(), |a, b| a.max(b));
    if max != cert.value {
        return fail(
            Value,
            format!(
                "certified value {} but the largest pair bound is {max}",
                cert.value
            ),
        );
    }

    let needs_bc = cert.lower_bound.is_some() || cert.adaptive.is_some();
    let bc = if needs_bc {
        Some(
            EmbeddingSpace::enumerate(b.clone(), c.clone()).map_err(|e| VerifyFailure {
                class: Structure,
                detail: e.to_string(),
            })?,
        )
    } else {
        None
    };

    let mut lower = None;
    if let Some(cuts) = &cert.lower_bound {
        let bc = bc.as_ref().expect("enumerated above");
        let mut weight_sum = Rational::zero();
        let mut mix = vec![Rational::zero(); bc.len()];
        for cut in cuts {
            let (i, j) = cut.pair;
            if i >= k || j >= k {
                return fail(LowerBound, format!("cut names unknown pair ({i},{j})"));
            }
            if cut.weight.is_negative() {
                return fail(LowerBound, "negative cut weight");
            }
            weight_sum += &cut.weight;
            let phi = replay
                .check_potential(&cut.potential)
                .map_err(|d| VerifyFailure {
                    class: LowerBound,
                    detail: format!("cut ({i},{j}): {d}"),
                })?;
            let (alpha, alpha2) = (&cert.source_embeddings[i], &cert.source_embeddings[j]);
            for (s, beta) in bc.embeddings().iter().enumerate() {
                let (x, y) = (
                    phi.get(&beta.compose(alpha)),
                    phi.get(&beta.compose(alpha2)),
                );
                match (x, y) {
                    (Some(x), Some(y)) => mix[s] += &cut.weight * (x - y),
                    _ => {
                        return fail(
                            LowerBound,
                            format!("cut ({i},{j}) potential misses an image point"),
                        )
                    }
                }
            }
        }
        if !weight_sum.is_one() {
            return fail(LowerBound, format!("cut weights sum to {weight_sum}"));
        }
        if let Some(s) = mix.iter().position(|v| *v < cert.value) {
            return fail(
                LowerBound,
                format!("cuts give only {} on {}", mix[s], emb(bc.get(s))),
            );
        }
        lower = Some(cert.value.clone());
    }

    if let Some(ad) = &cert.adaptive {
        let bc = bc.as_ref().expect("enumerated above");
        let ac = EmbeddingSpace::enumerate(a.clone(), c.clone()).map_err(|e| VerifyFailure {
            class: Structure,
            detail: e.to_string(),
        })?;
        let listed: Vec<&Embedding> = ad.coloring.iter().map(|e| &e.0).collect();
        if listed != ac.embeddings().iter().collect::<Vec<_>>() {
            return fail(
                Structure,
                "adaptive coloring is not listed on Emb(A,C) in order",
            );
        }
        let kappa = replay
            .check_potential(&ad.coloring)
            .map_err(|d| VerifyFailure {
                class: Potential,
                detail: format!("adaptive coloring: {d}"),
            })?;
        let d = |pair: (usize, usize), beta: &Embedding| -> Rational {
            let (alpha, alpha2) = (
                &cert.source_embeddings[pair.0],
                &cert.source_embeddings[pair.1],
            );
            &kappa[&beta.compose(alpha)] - &kappa[&beta.compose(alpha2)]
        };
        if ad
            .weights
            .iter()
            .any(|((i, j), _, _)| *i >= k || *j >= k || i >= j)
        {
            return fail(LowerBound, "adaptive weights name an unknown pair");
        }
        let wsum: Rational = ad.weights.iter().map(|w| &w.2).sum();
        if ad.weights.iter().any(|w| w.2.is_negative()) || (!ad.value.is_zero() && !wsum.is_one()) {
            return fail(LowerBound, "adaptive weights are not a probability vector");
        }
        for beta in bc.embeddings() {
            let s: Rational = ad
                .weights
                .iter()
                .map(|(pair, sign, w)| {
                    let v = w * d(*pair, beta);
                    if *sign {
                        v
                    } else {
                        -v
                    }
                })
                .sum();
            if s < ad.value {
                return fail(
                    LowerBound,
                    format!("adaptive weights give only {s} on {}", emb(beta)),
                );
            }
        }
        // The reported measure attains the bound, so it is exact.
        for (beta, w) in &ad.nu {
            if bc.index_of(beta).is_none() || !w.is_positive() {
                return fail(Mass, "adaptive measure has an invalid atom");
            }
        }
        let nu_mass: Rational = ad.nu.iter().map(|e| &e.1).sum();
        if !nu_mass.is_one() {
            return fail(Mass, format!("adaptive measure has mass {nu_mass}"));
        }
        let attained = cert
            .pairs
            .iter()
            .map(|p| {
                ad.nu
                    .iter()
                    .map(|(beta, w)| w * d(p.pair, beta))
                    .sum::<Rational>()
                    .abs()
            })
            .fold(Rational::zero(), |a, b| a.max(b));
        if attained != ad.value {
            return fail(
                Value,
                format!("adaptive measure attains {attained}, not {}", ad.value),
            );
        }
        if ad.value > cert.value {
            return fail(
                Value,
                "adaptive lower bound exceeds the certified upper bound",
            );
        }
        lower = Some(ad.value.clone());
    }

    let verdict_yes = match cert.mode {
        CertMode::Uniform | CertMode::Point => cert.value <= cert.eps,
        CertMode::AdaptiveLowerBound => {
            let lb = lower.clone().unwrap_or_else(Rational::zero);
            if cert.adaptive.is_none() || lb <= cert.eps {
                return fail(
                    LowerBound,
                    "adaptive mode needs a lower bound above epsilon",
                );
            }
            false
        }
    };
    if cert.mode == CertMode::Uniform && cert.lower_bound.is_none() && !cert.pairs.is_empty() {
        return fail(LowerBound, "uniform mode needs the optimality cuts");
    }
    Ok(VerifyReport {
        mode: cert.mode,
        eps: cert.eps.clone(),
        value: cert.value.clone(),
        lower,
        verdict_yes,
    })
}
