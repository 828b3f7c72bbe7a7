//! Self-contained witness certificates (`crl-cert v1`).
//!
//! The three structures are embedded verbatim with their hashes, and every
//! embedding is written as its list of target point indices, so a
//! certificate can be replayed without any other file.
//!
//! ```text
//! crl-cert v1
//! mode uniform
//! eps 1/4
//! structure A <sha256>
//! crl-structure v1 ... end
//! structure B <sha256> ...
//! structure C <sha256> ...
//! source-embeddings 2 [0] [1]
//! nu 2
//!   [0,1] 1/2
//!   [1,0] 1/2
//! pairs 1
//! pair 0 1 bound 0
//!   coupling 2  [0] [0] 1/2  [1] [1] 1/2
//!   potential 0
//! value 0
//! lower-bound 2
//! cut 0 1 weight 1/2
//!   potential 2  [0] 0  [1] 1
//! cut 0 1 weight 1/2
//!   potential 2  [0] 1  [1] 0
//! adaptive none
//! end
//! ```

use std::fmt::Write as _;
use std::str::FromStr;

use super::{AdaptiveBound, LowerBoundCut, RamseyInstance, Setup, UniformWitness};
use crate::embeddings::Embedding;
use crate::structures::{parse_structure_tokens, structure_hash, write_structure, FormatError};
use crate::text::{TextError, Tokens};
use crate::{Rational, Structure};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CertMode {
    /// `ν` minimizes the worst pair bound (claimed optimal).
    Uniform,
    /// The adaptive section proves a lower bound above `ε`.
    AdaptiveLowerBound,
    /// `ν` is an arbitrary measure; only its own value is certified.
    Point,
}

impl CertMode {
    pub fn name(self) -> &'static str {
        match self {
            CertMode::Uniform => "uniform",
            CertMode::AdaptiveLowerBound => "adaptive-lower-bound",
            CertMode::Point => "point",
        }
    }
}

impl FromStr for CertMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "uniform" => Ok(CertMode::Uniform),
            "adaptive-lower-bound" => Ok(CertMode::AdaptiveLowerBound),
            "point" => Ok(CertMode::Point),
            other => Err(format!("unknown mode `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CertPair {
    /// Indices into `source_embeddings`.
    pub pair: (usize, usize),
    pub bound: Rational,
    /// `(x, y, mass)` with `x` from the first measure.
    pub coupling: Vec<(Embedding, Embedding, Rational)>,
    /// Listed exactly where the two measures differ.
    pub potential: Vec<(Embedding, Rational)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CertCut {
    pub pair: (usize, usize),
    pub weight: Rational,
    /// Values on both image sets of the pair.
    pub potential: Vec<(Embedding, Rational)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CertAdaptive {
    pub value: Rational,
    /// Values on all of `Emb(A,C)`.
    pub coloring: Vec<(Embedding, Rational)>,
    pub nu: Vec<(Embedding, Rational)>,
    pub weights: Vec<((usize, usize), bool, Rational)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WitnessCertificate {
    pub mode: CertMode,
    pub eps: Rational,
    pub structures: [Structure; 3],
    pub hashes: [String; 3],
    pub source_embeddings: Vec<Embedding>,
    pub nu: Vec<(Embedding, Rational)>,
    pub pairs: Vec<CertPair>,
    pub value: Rational,
    pub lower_bound: Option<Vec<CertCut>>,
    pub adaptive: Option<CertAdaptive>,
}

impl WitnessCertificate {
    pub fn new(
        inst: &RamseyInstance<Rational>,
        setup: &Setup<Rational>,
        mode: CertMode,
        witness: &UniformWitness<Rational>,
        cuts: Option<&[LowerBoundCut<Rational>]>,
        adaptive: Option<&AdaptiveBound<Rational>>,
    ) -> Self {
        let structures = [(*inst.a).clone(), (*inst.b).clone(), (*inst.c).clone()];
        let hashes = [
            structure_hash(&structures[0]),
            structure_hash(&structures[1]),
            structure_hash(&structures[2]),
        ];
        let ac = |i: usize| setup.ac.get(i).clone();
        let nu = witness
            .nu
            .atoms()
            .map(|(i, w)| (setup.bc.get(i).clone(), w.clone()))
            .collect();
        let pairs = witness
            .pairs
            .iter()
            .map(|pb| {
                let (i, j) = pb.pair;
                let mu = setup
                    .pushforward_measure(&witness.nu, i)
                    .expect("witness lives on Emb(B,C)");
                let mu2 = setup
                    .pushforward_measure(&witness.nu, j)
                    .expect("witness lives on Emb(B,C)");
                let mut support = mu.support();
                support.extend(mu2.support());
                support.sort_unstable();
                support.dedup();
                // Only points with net mass affect the gap.
                support.retain(|&x| mu.weight(x) != mu2.weight(x));
                CertPair {
                    pair: pb.pair,
                    bound: pb.bound.value.clone(),
                    coupling: pb
                        .bound
                        .coupling
                        .iter()
                        .map(|(x, y, m)| (ac(*x), ac(*y), m.clone()))
                        .collect(),
                    potential: support
                        .into_iter()
                        .map(|x| (ac(x), pb.bound.potential.value(x).clone()))
                        .collect(),
                }
            })
            .collect();
        let lower_bound = cuts.map(|cuts| {
            cuts.iter()
                .map(|c| {
                    let mut support = setup.image(c.pair.0);
                    support.extend(setup.image(c.pair.1));
                    support.sort_unstable();
                    support.dedup();
                    CertCut {
                        pair: c.pair,
                        weight: c.weight.clone(),
                        potential: support
                            .into_iter()
                            .map(|x| (ac(x), c.potential[x].clone()))
                            .collect(),
                    }
                })
                .collect()
        });
        let adaptive = adaptive.map(|ad| CertAdaptive {
            value: ad.value.clone(),
            coloring: ad
                .coloring
                .values()
                .iter()
                .enumerate()
                .map(|(x, v)| (ac(x), v.clone()))
                .collect(),
            nu: ad
                .witness
                .nu
                .iter()
                .map(|(b, w)| (setup.bc.get(*b).clone(), w.clone()))
                .collect(),
            weights: ad.witness.weights.clone(),
        });
        Self {
            mode,
            eps: inst.eps.clone(),
            structures,
            hashes,
            source_embeddings: setup.ab.embeddings().to_vec(),
            nu,
            pairs,
            value: witness.value.clone(),
            lower_bound,
            adaptive,
        }
    }
}

fn emb(e: &Embedding) -> String {
    let parts: Vec<String> = e.0.iter().map(ToString::to_string).collect();
    format!("[{}]", parts.join(","))
}

fn weighted(out: &mut String, label: &str, items: &[(Embedding, Rational)]) {
    let _ = writeln!(out, "  {label} {}", items.len());
    for (e, w) in items {
        let _ = writeln!(out, "    {} {w}", emb(e));
    }
}

pub fn write_certificate(cert: &WitnessCertificate) -> String {
    let mut out = String::from("crl-cert v1\n");
    let _ = writeln!(out, "mode {}", cert.mode.name());
    let _ = writeln!(out, "eps {}", cert.eps);
    for (k, name) in ["A", "B", "C"].iter().enumerate() {
        let _ = writeln!(out, "structure {name} {}", cert.hashes[k]);
        out.push_str(&write_structure(&cert.structures[k]));
    }
    let srcs: Vec<String> = cert.source_embeddings.iter().map(emb).collect();
    let _ = writeln!(out, "source-embeddings {} {}", srcs.len(), srcs.join(" "));
    let _ = writeln!(out, "nu {}", cert.nu.len());
    for (e, w) in &cert.nu {
        let _ = writeln!(out, "  {} {w}", emb(e));
    }
    let _ = writeln!(out, "pairs {}", cert.pairs.len());
    for p in &cert.pairs {
        let _ = writeln!(out, "pair {} {} bound {}", p.pair.0, p.pair.1, p.bound);
        let _ = writeln!(out, "  coupling {}", p.coupling.len());
        for (x, y, m) in &p.coupling {
            let _ = writeln!(out, "    {} {} {m}", emb(x), emb(y));
        }
        weighted(&mut out, "potential", &p.potential);
    }
    let _ = writeln!(out, "value {}", cert.value);
    match &cert.lower_bound {
        None => out.push_str("lower-bound none\n"),
        Some(cuts) => {
            let _ = writeln!(out, "lower-bound {}", cuts.len());
            for c in cuts {
                let _ = writeln!(out, "cut {} {} weight {}", c.pair.0, c.pair.1, c.weight);
                weighted(&mut out, "potential", &c.potential);
            }
        }
    }
    match &cert.adaptive {
        None => out.push_str("adaptive none\n"),
        Some(ad) => {
            let _ = writeln!(out, "adaptive {}", ad.value);
            weighted(&mut out, "coloring", &ad.coloring);
            weighted(&mut out, "nu", &ad.nu);
            let _ = writeln!(out, "  weights {}", ad.weights.len());
            for ((i, j), sign, w) in &ad.weights {
                let _ = writeln!(out, "    {i} {j} {} {w}", if *sign { "+" } else { "-" });
            }
        }
    }
    out.push_str("end\n");
    out
}

fn parse_emb(t: &mut Tokens<'_>) -> Result<Embedding, TextError> {
    let tok = t.next_token("embedding")?;
    let inner = tok
        .strip_prefix('[')
        .and_then(|s| s.strip_suffix(']'))
        .ok_or_else(|| t.invalid(format!("`{tok}` is not an embedding")))?;
    if inner.is_empty() {
        return Ok(Embedding(Vec::new()));
    }
    inner
        .split(',')
        .map(|p| {
            p.parse::<usize>()
                .map_err(|_| t.invalid(format!("bad point index in `{tok}`")))
        })
        .collect::<Result<Vec<_>, _>>()
        .map(Embedding)
}

fn parse_weighted(
    t: &mut Tokens<'_>,
    label: &str,
) -> Result<Vec<(Embedding, Rational)>, TextError> {
    t.expect(label)?;
    let k: usize = t.parse("count")?;
    (0..k).map(|_| Ok((parse_emb(t)?, t.rational()?))).collect()
}

fn parse_pair(t: &mut Tokens<'_>) -> Result<(usize, usize), TextError> {
    Ok((t.parse("pair index")?, t.parse("pair index")?))
}

pub fn parse_certificate(input: &str) -> Result<WitnessCertificate, FormatError> {
    let mut t = Tokens::new(input);
    t.expect("crl-cert")?;
    t.expect("v1")?;
    t.expect("mode")?;
    let mode_tok = t.next_token("mode")?;
    let mode = mode_tok.parse::<CertMode>().map_err(|e| t.invalid(e))?;
    t.expect("eps")?;
    let eps = t.rational()?;
    let mut structures = Vec::with_capacity(3);
    let mut hashes = Vec::with_capacity(3);
    for name in ["A", "B", "C"] {
        t.expect("structure")?;
        t.expect(name)?;
        hashes.push(t.next_token("hash")?.to_string());
        structures.push(parse_structure_tokens(&mut t)?);
    }
    t.expect("source-embeddings")?;
    let k: usize = t.parse("count")?;
    let source_embeddings = (0..k)
        .map(|_| parse_emb(&mut t))
        .collect::<Result<Vec<_>, _>>()?;
    t.expect("nu")?;
    let k: usize = t.parse("count")?;
    let nu = (0..k)
        .map(|_| Ok((parse_emb(&mut t)?, t.rational()?)))
        .collect::<Result<Vec<_>, TextError>>()?;
    t.expect("pairs")?;
    let k: usize = t.parse("count")?;
    let mut pairs = Vec::with_capacity(k);
    for _ in 0..k {
        t.expect("pair")?;
        let pair = parse_pair(&mut t)?;
        t.expect("bound")?;
        let bound = t.rational()?;
        t.expect("coupling")?;
        let c: usize = t.parse("count")?;
        let coupling = (0..c)
            .map(|_| Ok((parse_emb(&mut t)?, parse_emb(&mut t)?, t.rational()?)))
            .collect::<Result<Vec<_>, TextError>>()?;
        let potential = parse_weighted(&mut t, "potential")?;
        pairs.push(CertPair {
            pair,
            bound,
            coupling,
            potential,
        });
    }
    t.expect("value")?;
    let value = t.rational()?;
    t.expect("lower-bound")?;
    let lower_bound = if t.peek() == Some("none") {
        t.next_token("none")?;
        None
    } else {
        let k: usize = t.parse("cut count")?;
        let mut cuts = Vec::with_capacity(k);
        for _ in 0..k {
            t.expect("cut")?;
            let pair = parse_pair(&mut t)?;
            t.expect("weight")?;
            let weight = t.rational()?;
            let potential = parse_weighted(&mut t, "potential")?;
            cuts.push(CertCut {
                pair,
                weight,
                potential,
            });
        }
        Some(cuts)
    };
    t.expect("adaptive")?;
    let adaptive = if t.peek() == Some("none") {
        t.next_token("none")?;
        None
    } else {
        let value = t.rational()?;
        let coloring = parse_weighted(&mut t, "coloring")?;
        let nu = parse_weighted(&mut t, "nu")?;
        t.expect("weights")?;
        let k: usize = t.parse("count")?;
        let weights = (0..k)
            .map(|_| {
                let pair = parse_pair(&mut t)?;
                let sign = match t.next_token("sign")? {
                    "+" => true,
                    "-" => false,
                    other => return Err(t.invalid(format!("bad sign `{other}`"))),
                };
                Ok((pair, sign, t.rational()?))
            })
            .collect::<Result<Vec<_>, TextError>>()?;
        Some(CertAdaptive {
            value,
            coloring,
            nu,
            weights,
        })
    };
    t.expect("end")?;
    if let Some(extra) = t.peek() {
        return Err(TextError::Unexpected {
            index: t.position(),
            expected: "end of input".into(),
            found: extra.into(),
        }
        .into());
    }
    let [a, b, c]: [Structure; 3] = structures.try_into().expect("three structures");
    let [ha, hb, hc]: [String; 3] = hashes.try_into().expect("three hashes");
    Ok(WitnessCertificate {
        mode,
        eps,
        structures: [a, b, c],
        hashes: [ha, hb, hc],
        source_embeddings,
        nu,
        pairs,
        value,
        lower_bound,
        adaptive,
    })
}
