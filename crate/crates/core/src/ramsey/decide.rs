use std::sync::Arc;

use rayon::prelude::*;

use super::certificate::{CertMode, WitnessCertificate};
use super::{
    uniform_lower_bound, value_adaptive_lower, value_uniform, AdaptiveOptions, Degeneracy,
    RamseyError, RamseyInstance, Setup,
};
use crate::{Rational, Structure};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Uniform,
    Adaptive(AdaptiveOptions),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Yes,
    No,
    /// Adaptive mode only: the lower bound is at most ε but the uniform
    /// value is above it.
    Undetermined,
}

impl Verdict {
    pub fn name(self) -> &'static str {
        match self {
            Verdict::Yes => "YES",
            Verdict::No => "NO",
            Verdict::Undetermined => "UNDETERMINED",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Decision {
    pub verdict: Verdict,
    pub degenerate: Option<Degeneracy>,
    pub uniform: Option<Rational>,
    pub adaptive_lower: Option<Rational>,
    pub certificate: Option<WitnessCertificate>,
}

/// Compare against `ε` with `value ≤ ε` meaning YES.
///
/// Uniform mode decides from the uniform value. Adaptive mode answers NO
/// when the certified lower bound exceeds `ε`, YES when the uniform value
/// does not, and otherwise leaves the question open.
pub fn decide_witness(
    inst: &RamseyInstance<Rational>,
    mode: Mode,
) -> Result<Decision, RamseyError> {
    let setup = Setup::new(inst.a.clone(), inst.b.clone(), inst.c.clone())?;
    if let Some(d) = setup.degeneracy() {
        return Ok(Decision {
            verdict: if d == Degeneracy::NoCopiesOfA {
                Verdict::Yes
            } else {
                Verdict::No
            },
            degenerate: Some(d),
            uniform: None,
            adaptive_lower: None,
            certificate: None,
        });
    }
    let witness = value_uniform(&setup)?;
    let cuts = uniform_lower_bound(&setup, &witness)?;
    let uniform = witness.value.clone();
    match mode {
        Mode::Uniform => {
            let certificate = WitnessCertificate::new(
                inst,
                &setup,
                CertMode::Uniform,
                &witness,
                Some(&cuts),
                None,
            );
            Ok(Decision {
                verdict: if uniform <= inst.eps {
                    Verdict::Yes
                } else {
                    Verdict::No
                },
                degenerate: None,
                uniform: Some(uniform),
                adaptive_lower: None,
                certificate: Some(certificate),
            })
        }
        Mode::Adaptive(options) => {
            let bound = value_adaptive_lower(&setup, options)?;
            let (verdict, cert_mode) = if bound.value > inst.eps {
                (Verdict::No, CertMode::AdaptiveLowerBound)
            } else if uniform <= inst.eps {
                (Verdict::Yes, CertMode::Uniform)
            } else {
                (Verdict::Undetermined, CertMode::Uniform)
            };
            let certificate = WitnessCertificate::new(
                inst,
                &setup,
                cert_mode,
                &witness,
                Some(&cuts),
                Some(&bound),
            );
            Ok(Decision {
                verdict,
                degenerate: None,
                uniform: Some(uniform),
                adaptive_lower: Some(bound.value),
                certificate: Some(certificate),
            })
        }
    }
}

#[derive(Debug, Clone)]
pub struct CandidateResult {
    pub index: usize,
    pub size: usize,
    pub verdict: Verdict,
    pub degenerate: Option<Degeneracy>,
    pub uniform: Option<Rational>,
}

#[derive(Debug, Clone)]
pub struct SearchOutcome {
    /// Every candidate examined, in stream order.
    pub trace: Vec<CandidateResult>,
    /// Index into the stream and the decision for the first YES.
    pub found: Option<(usize, Decision)>,
    /// `Emb(A,B)` is empty, so every candidate passes trivially.
    pub vacuous: bool,
}

/// Scan `candidates` in order and stop at the first YES. Candidates are
/// evaluated `jobs` at a time in parallel; the answer depends only on the
/// stream order.
pub fn search_witness(
    a: Arc<Structure>,
    b: Arc<Structure>,
    eps: Rational,
    candidates: &[Arc<Structure>],
    mode: Mode,
    jobs: usize,
) -> Result<SearchOutcome, RamseyError> {
    let ab = crate::embeddings::EmbeddingSpace::enumerate(a.clone(), b.clone())?;
    if ab.is_empty() {
        return Ok(SearchOutcome {
            trace: Vec::new(),
            found: None,
            vacuous: true,
        });
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .expect("thread pool");
    let mut trace = Vec::new();
    for (chunk_no, chunk) in candidates.chunks(jobs.max(1)).enumerate() {
        let decisions: Vec<Result<Decision, RamseyError>> = pool.install(|| {
            chunk
                .par_iter()
                .map(|c| {
                    let inst = RamseyInstance::new(a.clone(), b.clone(), c.clone(), eps.clone())?;
                    decide_witness(&inst, mode)
                })
                .collect()
        });
        for (offset, decision) in decisions.into_iter().enumerate() {
            let decision = decision?;
            let index = chunk_no * jobs.max(1) + offset;
            trace.push(CandidateResult {
                index,
                size: candidates[index].len(),
                verdict: decision.verdict,
                degenerate: decision.degenerate,
                uniform: decision.uniform.clone(),
            });
            if decision.verdict == Verdict::Yes {
                return Ok(SearchOutcome {
                    trace,
                    found: Some((index, decision)),
                    vacuous: false,
                });
            }
        }
    }
    Ok(SearchOutcome {
        trace,
        found: None,
        vacuous: false,
    })
}
