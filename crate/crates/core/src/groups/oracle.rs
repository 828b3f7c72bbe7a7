//! Built-in finitely generated groups with solvable word problem: the free
//! group `F_k` and the free abelian group `Z^k`, both in normal form.

use std::collections::{HashSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use super::{Group, GroupError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleKind {
    Free,
    Abelian,
}

/// Normal form of an element: for `F_k` a freely reduced word with letters
/// `±(i+1)`; for `Z^k` the exponent vector.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(pub Vec<i64>);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FGGroupOracle {
    kind: OracleKind,
    rank: usize,
}

impl FGGroupOracle {
    pub fn free(rank: usize) -> Result<Self, GroupError> {
        if rank == 0 || rank > 26 {
            return Err(GroupError::Spec(format!("free rank {rank} outside 1..=26")));
        }
        Ok(Self {
            kind: OracleKind::Free,
            rank,
        })
    }

    pub fn abelian(rank: usize) -> Result<Self, GroupError> {
        if rank == 0 {
            return Err(GroupError::Spec("abelian rank must be positive".into()));
        }
        Ok(Self {
            kind: OracleKind::Abelian,
            rank,
        })
    }

    pub fn kind(&self) -> OracleKind {
        self.kind
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Bring an arbitrary letter string (free) or exponent vector (abelian)
    /// to normal form.
    pub fn reduce(&self, w: &[i64]) -> Word {
        match self.kind {
            OracleKind::Free => {
                let mut out: Vec<i64> = Vec::with_capacity(w.len());
                for &x in w {
                    if out.last() == Some(&-x) {
                        out.pop();
                    } else {
                        out.push(x);
                    }
                }
                Word(out)
            }
            OracleKind::Abelian => {
                let mut v = w.to_vec();
                v.resize(self.rank, 0);
                Word(v)
            }
        }
    }

    /// Generators followed by their inverses, interleaved: `a, A, b, B, …`.
    pub fn generators(&self) -> Vec<Word> {
        (0..self.rank)
            .flat_map(|i| {
                let g = i as i64 + 1;
                match self.kind {
                    OracleKind::Free => [Word(vec![g]), Word(vec![-g])],
                    OracleKind::Abelian => {
                        let mut e = vec![0; self.rank];
                        e[i] = 1;
                        let pos = Word(e.clone());
                        e[i] = -1;
                        [pos, Word(e)]
                    }
                }
            })
            .collect()
    }

    /// The word-metric ball of radius `r` around the identity, in
    /// breadth-first order with normal-form deduplication.
    pub fn ball(&self, r: usize) -> Vec<Word> {
        let gens = self.generators();
        let mut seen: HashSet<Word> = HashSet::new();
        let mut out = Vec::new();
        let mut queue = VecDeque::new();
        let e = self.identity();
        seen.insert(e.clone());
        queue.push_back((e, 0));
        while let Some((w, d)) = queue.pop_front() {
            out.push(w.clone());
            if d == r {
                continue;
            }
            for g in &gens {
                let next = self.mul(&w, g);
                if seen.insert(next.clone()) {
                    queue.push_back((next, d + 1));
                }
            }
        }
        out
    }
}

impl FromStr for FGGroupOracle {
    type Err = GroupError;

    /// `free k` or `abelian k`.
    fn from_str(s: &str) -> Result<Self, GroupError> {
        let parts: Vec<&str> = s.split_whitespace().collect();
        let bad = || GroupError::Spec(format!("expected `free k` or `abelian k`, found `{s}`"));
        let [kind, k] = parts.as_slice() else {
            return Err(bad());
        };
        let k: usize = k.parse().map_err(|_| bad())?;
        match *kind {
            "free" => Self::free(k),
            "abelian" => Self::abelian(k),
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for FGGroupOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            OracleKind::Free => write!(f, "free {}", self.rank),
            OracleKind::Abelian => write!(f, "abelian {}", self.rank),
        }
    }
}

impl Group for FGGroupOracle {
    type Elem = Word;

    fn identity(&self) -> Word {
        self.reduce(&[])
    }

    fn mul(&self, a: &Word, b: &Word) -> Word {
        match self.kind {
            OracleKind::Free => {
                let joined: Vec<i64> = a.0.iter().chain(&b.0).copied().collect();
                self.reduce(&joined)
            }
            OracleKind::Abelian => Word(a.0.iter().zip(&b.0).map(|(x, y)| x + y).collect()),
        }
    }

    fn inverse(&self, a: &Word) -> Word {
        match self.kind {
            OracleKind::Free => Word(a.0.iter().rev().map(|x| -x).collect()),
            OracleKind::Abelian => Word(a.0.iter().map(|x| -x).collect()),
        }
    }

    /// Free: letters `a…` for generators and `A…` for inverses, `e` for the
    /// identity. Abelian: an integer for rank 1, otherwise exponents joined
    /// by `:`; `e` or `0` is the identity.
    fn parse_element(&self, s: &str) -> Result<Word, GroupError> {
        let bad = || GroupError::Element(s.to_string());
        if s == "e" {
            return Ok(self.identity());
        }
        match self.kind {
            OracleKind::Free => {
                let letters = s
                    .chars()
                    .map(|c| {
                        let (base, sign) = if c.is_ascii_lowercase() {
                            (b'a', 1)
                        } else if c.is_ascii_uppercase() {
                            (b'A', -1)
                        } else {
                            return Err(bad());
                        };
                        let i = (c as u8 - base) as usize;
                        if i >= self.rank {
                            return Err(bad());
                        }
                        Ok(sign * (i as i64 + 1))
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                if letters.is_empty() {
                    return Err(bad());
                }
                Ok(self.reduce(&letters))
            }
            OracleKind::Abelian => {
                if s == "0" {
                    return Ok(self.identity());
                }
                let parts = s
                    .split(':')
                    .map(|p| p.parse::<i64>().map_err(|_| bad()))
                    .collect::<Result<Vec<_>, _>>()?;
                if parts.len() != self.rank {
                    return Err(bad());
                }
                Ok(Word(parts))
            }
        }
    }

    fn format_element(&self, e: &Word) -> String {
        match self.kind {
            OracleKind::Free if e.0.is_empty() => "e".into(),
            OracleKind::Free => {
                e.0.iter()
                    .map(|&x| {
                        let i = (x.unsigned_abs() - 1) as u8;
                        (if x > 0 { b'a' + i } else { b'A' + i }) as char
                    })
                    .collect()
            }
            OracleKind::Abelian => {
                e.0.iter()
                    .map(ToString::to_string)
                    .collect::<Vec<_>>()
                    .join(":")
            }
        }
    }
}
