//! Plain-text dump of LP instances for cross-checking with external solvers.
//!
//! ```text
//! crl-lp v1
//! vars 2
//! maximize 1 1
//! bounds 0 inf  0 inf
//! rows 2
//! 1 0 <= 1
//! 0 1 <= 1
//! end
//! ```

use super::{LinearProgram, Relation, Sense};
use crate::text::{TextError, Tokens};
use crate::Rational;

pub fn write_lp(lp: &LinearProgram<Rational>) -> String {
    let join = |v: &[Rational]| {
        v.iter()
            .map(ToString::to_string)
            .collect::<Vec<_>>()
            .join(" ")
    };
    let mut out = format!("crl-lp v1\nvars {}\n", lp.num_vars);
    let sense = match lp.sense {
        Sense::Minimize => "minimize",
        Sense::Maximize => "maximize",
    };
    out.push_str(&format!("{sense} {}\n", join(&lp.objective)));
    let bound =
        |b: &Option<Rational>, inf: &str| b.as_ref().map_or(inf.to_string(), ToString::to_string);
    let bounds: Vec<String> = (0..lp.num_vars)
        .map(|j| {
            format!(
                "{} {}",
                bound(&lp.lower[j], "-inf"),
                bound(&lp.upper[j], "inf")
            )
        })
        .collect();
    out.push_str(&format!("bounds {}\n", bounds.join("  ")));
    out.push_str(&format!("rows {}\n", lp.constraints.len()));
    for c in &lp.constraints {
        let rel = match c.relation {
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ge => ">=",
        };
        out.push_str(&format!("{} {rel} {}\n", join(&c.coeffs), c.rhs));
    }
    out.push_str("end\n");
    out
}

pub fn parse_lp(input: &str) -> Result<LinearProgram<Rational>, TextError> {
    let mut t = Tokens::new(input);
    t.expect("crl-lp")?;
    t.expect("v1")?;
    t.expect("vars")?;
    let n: usize = t.parse("variable count")?;
    let sense = match t.next_token("sense")? {
        "minimize" => Sense::Minimize,
        "maximize" => Sense::Maximize,
        other => return Err(t.invalid(format!("unknown sense `{other}`"))),
    };
    let mut lp = LinearProgram::new(n, sense);
    for j in 0..n {
        lp.objective[j] = t.rational()?;
    }
    t.expect("bounds")?;
    for j in 0..n {
        let lo = match t.peek() {
            Some("-inf") => {
                t.next_token("bound")?;
                None
            }
            _ => Some(t.rational()?),
        };
        let hi = match t.peek() {
            Some("inf") => {
                t.next_token("bound")?;
                None
            }
            _ => Some(t.rational()?),
        };
        lp.set_bounds(j, lo, hi);
    }
    t.expect("rows")?;
    let m: usize = t.parse("row count")?;
    for _ in 0..m {
        let coeffs = (0..n)
            .map(|_| t.rational())
            .collect::<Result<Vec<_>, _>>()?;
        let relation = match t.next_token("relation")? {
            "<=" => Relation::Le,
            "=" => Relation::Eq,
            ">=" => Relation::Ge,
            other => return Err(t.invalid(format!("unknown relation `{other}`"))),
        };
        let rhs = t.rational()?;
        lp.add_constraint(coeffs, relation, rhs);
    }
    t.expect("end")?;
    Ok(lp)
}
