//! Compatibility checks for reduction data.

use std::collections::BTreeSet;
use std::fmt;

use serde_json::{json, Value};

use crate::curves::VertexForm;
use crate::datum::{HalfEdge, ReductionDatum};
use crate::error::{Error, Result};
use crate::psd::psd_zero_test;
use crate::rational::{divisible, fmt_q, q_to_json, Q};
use crate::scalar::ValuedScalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Condition {
    /// Slope equals `−q − ord` on bounded edges.
    C1,
    /// Graded residue matches the point q-residue.
    C2,
    /// q-harmonicity at interior vertices with all slopes divisible by q.
    C3,
    /// Vanishing on edges of slope not divisible by q.
    C4,
    /// Vanishing on legs of negative slope.
    C5,
    /// Antisymmetry `R(e) = (−1)^q R(ē)`.
    A,
    /// Degree identity at interior vertices.
    D,
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

/// Whether antisymmetry failures are violations or warnings.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Strict,
    Permissive,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    pub condition: Condition,
    /// Edge, leg or vertex id.
    pub item: String,
    /// The vertex at which the check was made.
    pub vertex: String,
    pub detail: String,
}

impl Violation {
    pub fn key(&self) -> (Condition, String, String) {
        (self.condition, self.item.clone(), self.vertex.clone())
    }

    fn to_json(&self) -> Value {
        json!({"condition": self.condition.to_string(), "item": self.item, "vertex": self.vertex, "detail": self.detail})
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ViolationReport {
    pub mode: Mode,
    pub precision: Q,
    pub violations: Vec<Violation>,
    pub warnings: Vec<Violation>,
}

impl ViolationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn conditions(&self) -> BTreeSet<Condition> {
        self.violations.iter().map(|v| v.condition).collect()
    }

    pub fn keys(&self) -> BTreeSet<(Condition, String, String)> {
        self.violations.iter().map(Violation::key).collect()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "valid": self.is_empty(),
            "mode": match self.mode { Mode::Strict => "strict", Mode::Permissive => "permissive" },
            "precision": q_to_json(&self.precision),
            "violations": self.violations.iter().map(Violation::to_json).collect::<Vec<_>>(),
            "warnings": self.warnings.iter().map(Violation::to_json).collect::<Vec<_>>(),
        })
    }
}

fn has_term_at_or_below(r: &ValuedScalar, lambda: &Q) -> bool {
    r.valuation().is_some_and(|v| v <= lambda)
}

/// Checks every compatibility condition; violations are data, structural
/// problems are errors.
pub fn validate(g: &ReductionDatum, mode: Mode) -> Result<ViolationReport> {
    g.check_structure()?;
    let lf = g.level_slopes()?;
    let q = g.q;
    let qq = q as i64;
    let mut out: Vec<Violation> = Vec::new();
    let mut warn: Vec<Violation> = Vec::new();
    let push = |list: &mut Vec<Violation>, c: Condition, item: &str, vertex: &str, detail: String| {
        list.push(Violation { condition: c, item: item.to_string(), vertex: vertex.to_string(), detail });
    };

    for h in g.curve.half_edges() {
        let x = g.curve.tail(&h).to_string();
        let form = g.form(&x);
        let ord = g.order(&h)?;
        let slope = lf.slope(&h);
        let r = g.residue(&h);
        // C1
        if !h.is_leg() && *slope != Q::from_integer((-qq - ord).into()) {
            push(
                &mut out,
                Condition::C1,
                h.id(),
                &x,
                format!("slope {} but −q − ord = {}", fmt_q(slope), -qq - ord),
            );
        }
        // C2
        let lambda = &form.level;
        if r.precision().is_some_and(|p| p <= lambda) {
            return Err(Error::MalformedDatum(format!(
                "residue on {h} is known only below O(π^{}), not beyond the level {}",
                fmt_q(r.precision().unwrap()),
                fmt_q(lambda)
            )));
        }
        let res = form
            .residue_at(g.mark(&h), q)
            .map_err(|e| Error::MalformedDatum(format!("residue at the mark of {h}: {e}")))?;
        if let (VertexForm::Abstract(_), true) = (&form.form, ord == -qq && res.is_zero()) {
            push(&mut out, Condition::C2, h.id(), &x, "order −q forces a nonzero q-residue".to_string());
        } else if res.is_zero() {
            if has_term_at_or_below(r, lambda) {
                push(
                    &mut out,
                    Condition::C2,
                    h.id(),
                    &x,
                    format!(
                        "point residue vanishes but ν(R) = {} ≤ level {}",
                        fmt_q(r.valuation().unwrap()),
                        fmt_q(lambda)
                    ),
                );
            }
        } else if r.valuation() != Some(lambda) || r.coeff(lambda) != res {
            push(
                &mut out,
                Condition::C2,
                h.id(),
                &x,
                format!("point residue {res} at level {} is not the reduction of R = {r}", fmt_q(lambda)),
            );
        }
        // C4
        if !divisible(slope, q) && !r.is_zero() {
            push(
                &mut out,
                Condition::C4,
                h.id(),
                &x,
                format!("q = {q} does not divide slope {} but R ≠ 0", fmt_q(slope)),
            );
        }
        // C5
        if h.is_leg() && *slope < Q::from_integer(0.into()) && !r.is_zero() {
            push(&mut out, Condition::C5, h.id(), &x, format!("leg slope {} < 0 but R ≠ 0", fmt_q(slope)));
        }
    }

    // A
    for e in &g.curve.edges {
        let h = HalfEdge::edge(&e.id);
        let o = h.opp().unwrap();
        let expected = if q % 2 == 1 { g.residue(&o).neg() } else { g.residue(&o).clone() };
        if !g.residue(&h).eq_to_precision(&expected) {
            let anchor = std::cmp::min(&e.tail, &e.head);
            let list = if mode == Mode::Strict { &mut out } else { &mut warn };
            push(list, Condition::A, &e.id, anchor, format!("R(e) ≠ (−1)^{q}·R(opposite)"));
        }
    }

    for v in &g.curve.vertices {
        if v.boundary {
            continue;
        }
        let x = &v.id;
        let star = g.curve.star(x);
        // C3
        if !star.is_empty() && star.iter().all(|h| divisible(lf.slope(h), q)) {
            let rs: Vec<ValuedScalar> = star.iter().map(|h| g.residue(h).clone()).collect();
            if !psd_zero_test(&rs, q, g.conductor)? {
                push(
                    &mut out,
                    Condition::C3,
                    x,
                    x,
                    format!("no choice of {q}-th roots of the star residues sums to zero"),
                );
            }
        }
        // D
        let form = g.form(x);
        let star_marks: Vec<_> = star.iter().map(|h| g.mark(h)).collect();
        match &form.form {
            VertexForm::Explicit(f) => {
                let unmarked: Vec<String> = f
                    .divisor_and_orders()?
                    .into_iter()
                    .filter(|(p, m)| {
                        *m != 0 && !star_marks.iter().any(|mk| **mk == crate::curves::Mark::Point(p.clone()))
                    })
                    .map(|(p, m)| format!("{p} (order {m})"))
                    .collect();
                if !unmarked.is_empty() {
                    push(
                        &mut out,
                        Condition::D,
                        x,
                        x,
                        format!("unmarked zeros/poles: {}", unmarked.join(", ")),
                    );
                }
            }
            VertexForm::Abstract(a) => {
                let deg = a.degree();
                let expected = qq * (2 * a.genus as i64 - 2);
                let stray: Vec<&str> = a
                    .marks
                    .iter()
                    .filter(|m| {
                        m.order != 0
                            && !star_marks
                                .iter()
                                .any(|mk| **mk == crate::curves::Mark::Label(m.label.clone()))
                    })
                    .map(|m| m.label.as_str())
                    .collect();
                if deg != expected || !stray.is_empty() {
                    push(
                        &mut out,
                        Condition::D,
                        x,
                        x,
                        format!("degree {deg} vs q(2g−2) = {expected}; unmarked: [{}]", stray.join(", ")),
                    );
                }
            }
        }
    }

    let mut seen = BTreeSet::new();
    out.retain(|v| seen.insert(v.key()));
    out.sort_by_key(Violation::key);
    warn.sort_by_key(Violation::key);
    Ok(ViolationReport { mode, precision: g.precision.clone(), violations: out, warnings: warn })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn reversed(mut g: ReductionDatum, id: &str) -> ReductionDatum {
        let e = g.curve.edges.iter_mut().find(|e| e.id == id).unwrap();
        std::mem::swap(&mut e.tail, &mut e.head);
        let h = HalfEdge::edge(id);
        let o = h.opp().unwrap();
        let (mh, mo) = (g.marks.remove(&h).unwrap(), g.marks.remove(&o).unwrap());
        g.marks.insert(h.clone(), mo);
        g.marks.insert(o.clone(), mh);
        let (rh, ro) = (g.residues.remove(&h).unwrap(), g.residues.remove(&o).unwrap());
        g.residues.insert(h, ro);
        g.residues.insert(o, rh);
        g
    }

    #[test]
    fn odd_slope_edge_flags_c4_at_both_ends() {
        let (_, g) = fixtures::defects().into_iter().find(|(c, _)| *c == Condition::C4).unwrap();
        let rep = validate(&g, Mode::Strict).unwrap();
        let keys: Vec<_> = rep.keys().into_iter().collect();
        assert_eq!(
            keys,
            vec![
                (Condition::C4, "e".to_string(), "y".to_string()),
                (Condition::C4, "e".to_string(), "z".to_string()),
            ]
        );
    }

    #[test]
    fn keys_survive_edge_reversal() {
        for (_, g) in fixtures::defects() {
            let ids: Vec<String> = g.curve.edges.iter().map(|e| e.id.clone()).collect();
            let base = validate(&g, Mode::Strict).unwrap().keys();
            for id in ids {
                let r = validate(&reversed(g.clone(), &id), Mode::Strict).unwrap().keys();
                assert_eq!(r, base, "reversing {id}");
            }
        }
    }

    #[test]
    fn permissive_mode_demotes_antisymmetry() {
        let (_, g) = fixtures::defects().into_iter().find(|(c, _)| *c == Condition::A).unwrap();
        let rep = validate(&g, Mode::Permissive).unwrap();
        assert!(rep.is_empty());
        assert_eq!(rep.warnings.len(), 1);
        assert_eq!(rep.to_json()["valid"], serde_json::json!(true));
    }

    #[test]
    fn leg_residue_off_by_pi_breaks_c2() {
        let mut g = fixtures::f1();
        g.residues.insert(HalfEdge::leg("l2"), ValuedScalar::pi_pow(crate::rational::qi(1)));
        assert!(validate(&g, Mode::Strict).unwrap().conditions().contains(&Condition::C2));
    }
}
