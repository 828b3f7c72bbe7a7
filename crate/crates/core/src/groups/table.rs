//! Finite groups given by a Cayley table (`crl-group v1`), optionally acting
//! by automorphisms on a metric structure.
//!
//! ```text
//! crl-group v1
//! elements 2
//!   e s
//! table           # row g lists g·h for h in element order
//!   e s
//!   s e
//! action          # or `action none`
//! crl-structure v1 ... end
//!   e 0 1         # the permutation of points induced by each element
//!   s 1 0
//! end
//! ```

use std::fmt::Write as _;
use std::sync::Arc;

use super::{Group, GroupError};
use crate::embeddings::Embedding;
use crate::structures::{parse_structure_tokens, write_structure};
use crate::text::Tokens;
use crate::Structure;

#[derive(Debug, Clone, PartialEq)]
pub struct GroupAction {
    pub structure: Arc<Structure>,
    /// `perms[g][x]` is the image of point `x` under element `g`.
    pub perms: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FiniteGroupTable {
    names: Vec<String>,
    table: Vec<Vec<usize>>,
    identity: usize,
    inverses: Vec<usize>,
    action: Option<GroupAction>,
}

impl FiniteGroupTable {
    /// Checks closure, the identity, inverses and associativity exhaustively.
    pub fn new(names: Vec<String>, table: Vec<Vec<usize>>) -> Result<Self, GroupError> {
        let n = names.len();
        if n == 0 {
            return Err(GroupError::Axiom("a group has at least one element".into()));
        }
        for (i, name) in names.iter().enumerate() {
            if names[..i].contains(name) {
                return Err(GroupError::Axiom(format!("element `{name}` listed twice")));
            }
        }
        if table.len() != n
            || table
                .iter()
                .any(|row| row.len() != n || row.iter().any(|&x| x >= n))
        {
            return Err(GroupError::Axiom(
                "table is not a total operation on the elements".into(),
            ));
        }
        let identity = (0..n)
            .find(|&e| (0..n).all(|g| table[e][g] == g && table[g][e] == g))
            .ok_or_else(|| GroupError::Axiom("no identity element".into()))?;
        let mut inverses = Vec::with_capacity(n);
        for g in 0..n {
            let inv = (0..n)
                .find(|&h| table[g][h] == identity && table[h][g] == identity)
                .ok_or_else(|| GroupError::Axiom(format!("`{}` has no inverse", names[g])))?;
            inverses.push(inv);
        }
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if table[table[a][b]][c] != table[a][table[b][c]] {
                        return Err(GroupError::Axiom(format!(
                            "not associative at ({}, {}, {})",
                            names[a], names[b], names[c]
                        )));
                    }
                }
            }
        }
        Ok(Self {
            names,
            table,
            identity,
            inverses,
            action: None,
        })
    }

    /// Attach an action. Each permutation must be an automorphism of the
    /// structure, the map must be a homomorphism, and it must be faithful.
    pub fn with_action(mut self, action: GroupAction) -> Result<Self, GroupError> {
        let s = &action.structure;
        if action.perms.len() != self.len() {
            return Err(GroupError::Action(format!(
                "{} permutations for {} elements",
                action.perms.len(),
                self.len()
            )));
        }
        for (g, p) in action.perms.iter().enumerate() {
            let mut hit = vec![false; s.len()];
            for &x in p {
                if x < hit.len() {
                    hit[x] = true;
                }
            }
            if p.len() != s.len() || hit.iter().any(|h| !h) {
                return Err(GroupError::Action(format!(
                    "`{}` does not permute the points",
                    self.names[g]
                )));
            }
            if !Embedding(p.clone()).is_embedding(s, s) {
                return Err(GroupError::Action(format!(
                    "`{}` is not an automorphism",
                    self.names[g]
                )));
            }
        }
        for g in 0..self.len() {
            for h in 0..self.len() {
                let gh = &action.perms[self.table[g][h]];
                if (0..s.len()).any(|x| gh[x] != action.perms[g][action.perms[h][x]]) {
                    return Err(GroupError::Action(format!(
                        "action of {}·{} is not the composite",
                        self.names[g], self.names[h]
                    )));
                }
            }
        }
        for g in 0..self.len() {
            if g != self.identity && (0..s.len()).all(|x| action.perms[g][x] == x) {
                return Err(GroupError::Action(format!(
                    "`{}` acts trivially",
                    self.names[g]
                )));
            }
        }
        self.action = Some(action);
        Ok(self)
    }

    /// `S_n` in lexicographic order of one-line notation, composing as
    /// functions (`(gh)(x) = g(h(x))`), acting on `on` when given.
    pub fn symmetric(n: usize, on: Option<Arc<Structure>>) -> Result<Self, GroupError> {
        let perms = permutations(n);
        let index = |p: &[usize]| {
            perms
                .binary_search_by(|q| q.as_slice().cmp(p))
                .expect("closed")
        };
        let table = perms
            .iter()
            .map(|g| {
                perms
                    .iter()
                    .map(|h| index(&h.iter().map(|&x| g[x]).collect::<Vec<_>>()))
                    .collect()
            })
            .collect();
        let names = perms
            .iter()
            .map(|p| {
                p.iter()
                    .map(ToString::to_string)
                    .collect::<Vec<_>>()
                    .join("-")
            })
            .collect();
        let group = Self::new(names, table)?;
        match on {
            None => Ok(group),
            Some(structure) => {
                if structure.len() != n {
                    return Err(GroupError::Action(format!(
                        "S_{n} cannot act on {} points",
                        structure.len()
                    )));
                }
                group.with_action(GroupAction { structure, perms })
            }
        }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn elements(&self) -> Vec<usize> {
        (0..self.len()).collect()
    }

    pub fn action(&self) -> Option<&GroupAction> {
        self.action.as_ref()
    }
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(n);
    let mut used = vec![false; n];
    fn go(n: usize, current: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if current.len() == n {
            out.push(current.clone());
            return;
        }
        for x in 0..n {
            if !used[x] {
                used[x] = true;
                current.push(x);
                go(n, current, used, out);
                current.pop();
                used[x] = false;
            }
        }
    }
    go(n, &mut current, &mut used, &mut out);
    out
}

impl Group for FiniteGroupTable {
    type Elem = usize;

    fn identity(&self) -> usize {
        self.identity
    }

    fn mul(&self, a: &usize, b: &usize) -> usize {
        self.table[*a][*b]
    }

    fn inverse(&self, a: &usize) -> usize {
        self.inverses[*a]
    }

    fn parse_element(&self, s: &str) -> Result<usize, GroupError> {
        self.names
            .iter()
            .position(|n| n == s)
            .ok_or_else(|| GroupError::Element(s.to_string()))
    }

    fn format_element(&self, e: &usize) -> String {
        self.names[*e].clone()
    }

    fn contains(&self, e: &usize) -> bool {
        *e < self.len()
    }

    fn act(&self, g: &usize, x: usize) -> Option<usize> {
        self.action.as_ref().map(|a| a.perms[*g][x])
    }

    fn action_structure(&self) -> Option<&Arc<Structure>> {
        self.action.as_ref().map(|a| &a.structure)
    }
}

pub fn parse_group_table(input: &str) -> Result<FiniteGroupTable, GroupError> {
    let mut t = Tokens::new(input);
    t.expect("crl-group")?;
    t.expect("v1")?;
    t.expect("elements")?;
    let n: usize = t.parse("element count")?;
    let names: Vec<String> = (0..n)
        .map(|_| t.next_token("element name").map(str::to_string))
        .collect::<Result<_, _>>()?;
    let lookup = |t: &Tokens<'_>, s: &str| {
        names
            .iter()
            .position(|x| x == s)
            .ok_or_else(|| GroupError::from(t.invalid(format!("unknown element `{s}`"))))
    };
    t.expect("table")?;
    let mut table = Vec::with_capacity(n);
    for _ in 0..n {
        let mut row = Vec::with_capacity(n);
        for _ in 0..n {
            let s = t.next_token("table entry")?;
            row.push(lookup(&t, s)?);
        }
        table.push(row);
    }
    t.expect("action")?;
    let action = if t.peek() == Some("none") {
        t.next_token("none")?;
        None
    } else {
        let structure = Arc::new(parse_structure_tokens(&mut t)?);
        let mut perms = vec![Vec::new(); n];
        for _ in 0..n {
            let s = t.next_token("element name")?;
            let g = lookup(&t, s)?;
            if !perms[g].is_empty() {
                return Err(t.invalid(format!("action of `{s}` given twice")).into());
            }
            perms[g] = (0..structure.len())
                .map(|_| t.parse::<usize>("point index"))
                .collect::<Result<_, _>>()?;
        }
        Some(GroupAction { structure, perms })
    };
    t.expect("end")?;
    if let Some(extra) = t.peek() {
        return Err(t.invalid(format!("trailing token `{extra}`")).into());
    }
    let group = FiniteGroupTable::new(names, table)?;
    match action {
        None => Ok(group),
        Some(a) => group.with_action(a),
    }
}

pub fn write_group_table(g: &FiniteGroupTable) -> String {
    let mut out = String::from("crl-group v1\n");
    let _ = writeln!(out, "elements {}", g.len());
    let _ = writeln!(out, "  {}", g.names.join(" "));
    out.push_str("table\n");
    for row in &g.table {
        let names: Vec<&str> = row.iter().map(|&x| g.names[x].as_str()).collect();
        let _ = writeln!(out, "  {}", names.join(" "));
    }
    match &g.action {
        None => out.push_str("action none\n"),
        Some(a) => {
            out.push_str("action\n");
            out.push_str(&write_structure(&a.structure));
            for (name, p) in g.names.iter().zip(&a.perms) {
                let pts: Vec<String> = p.iter().map(ToString::to_string).collect();
                let _ = writeln!(out, "  {name} {}", pts.join(" "));
            }
        }
    }
    out.push_str("end\n");
    out
}
