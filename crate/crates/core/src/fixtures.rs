//! Hand-checked reduction data used by tests, the acceptance suite and the CLI.
//!
//! Every datum here validates; [`defects`] derives one broken variant per
//! condition.

use std::collections::BTreeMap;

use crate::curves::{
    AbstractMark, AbstractVertexData, GradedQForm, Mark, ProjPoint, RationalQDifferential, VertexForm,
};
use crate::cyclo::CycloRational;
use crate::datum::{Edge, HalfEdge, Leg, ReductionDatum, TropVertex, TropicalCurve};
use crate::error::Result;
use crate::rational::{q, qi, Q};
use crate::scalar::{ValuedScalar, DEFAULT_PRECISION};
use crate::validate::Condition;

/// Incremental construction of a [`ReductionDatum`].
pub struct DatumBuilder {
    d: ReductionDatum,
}

impl DatumBuilder {
    pub fn new(q_: u32, conductor: u32) -> Self {
        DatumBuilder {
            d: ReductionDatum {
                q: q_,
                conductor,
                precision: qi(DEFAULT_PRECISION),
                curve: TropicalCurve { vertices: vec![], edges: vec![], legs: vec![] },
                forms: BTreeMap::new(),
                marks: BTreeMap::new(),
                compactification: BTreeMap::new(),
                residues: BTreeMap::new(),
            },
        }
    }

    pub fn vertex(mut self, id: &str, form: GradedQForm, boundary: bool) -> Self {
        self.d.curve.vertices.push(TropVertex { id: id.to_string(), boundary });
        self.d.forms.insert(id.to_string(), form);
        self
    }

    pub fn compactify(mut self, id: &str, marks: Vec<Mark>) -> Self {
        self.d.compactification.insert(id.to_string(), marks);
        self
    }

    #[allow(clippy::too_many_arguments)]
    pub fn edge(
        mut self,
        id: &str,
        tail: &str,
        head: &str,
        length: Q,
        marks: (Mark, Mark),
        r: ValuedScalar,
        r_opp: ValuedScalar,
    ) -> Self {
        self.d.curve.edges.push(Edge {
            id: id.to_string(),
            tail: tail.to_string(),
            head: head.to_string(),
            length,
        });
        let h = HalfEdge::edge(id);
        let o = h.opp().unwrap();
        self.d.marks.insert(h.clone(), marks.0);
        self.d.marks.insert(o.clone(), marks.1);
        self.d.residues.insert(h, r);
        self.d.residues.insert(o, r_opp);
        self
    }

    pub fn leg(mut self, id: &str, vertex: &str, mark: Mark, r: ValuedScalar) -> Self {
        self.d.curve.legs.push(Leg { id: id.to_string(), vertex: vertex.to_string() });
        let h = HalfEdge::leg(id);
        self.d.marks.insert(h.clone(), mark);
        self.d.residues.insert(h, r);
        self
    }

    pub fn build(self) -> Result<ReductionDatum> {
        self.d.check_structure()?;
        Ok(self.d)
    }
}

fn at(n: i64) -> Mark {
    Mark::Point(ProjPoint::int(n))
}

fn inf() -> Mark {
    Mark::Point(ProjPoint::Infinity)
}

fn label(l: &str) -> Mark {
    Mark::Label(l.to_string())
}

fn pi(e: Q) -> ValuedScalar {
    ValuedScalar::pi_pow(e)
}

fn int(n: i64) -> ValuedScalar {
    ValuedScalar::from_int(n)
}

fn zero() -> ValuedScalar {
    ValuedScalar::zero()
}

/// `scale·∏(z − a)^m (dz)^q` at level `level`.
fn form(q_: u32, scale: i64, factors: &[(i64, i64)], level: Q) -> GradedQForm {
    let fs = factors.iter().map(|(a, m)| (ProjPoint::int(*a), *m)).collect();
    let f = RationalQDifferential::new(q_, CycloRational::from_int(scale), fs).expect("fixture form");
    GradedQForm::explicit(f, level)
}

/// F1: `z^{−2}(dz)²` with legs at `1, 0, ∞`.
pub fn f1() -> ReductionDatum {
    DatumBuilder::new(2, 1)
        .vertex("x", form(2, 1, &[(0, -2)], qi(0)), false)
        .leg("l1", "x", at(1), zero())
        .leg("l2", "x", at(0), int(1))
        .leg("l3", "x", inf(), int(1))
        .build()
        .unwrap()
}

/// F1 at level 2.
pub fn f1b() -> ReductionDatum {
    DatumBuilder::new(2, 1)
        .vertex("x", form(2, 1, &[(0, -2)], qi(2)), false)
        .leg("l1", "x", at(1), zero())
        .leg("l2", "x", at(0), pi(qi(2)))
        .leg("l3", "x", inf(), pi(qi(2)))
        .build()
        .unwrap()
}

/// F2: `z³(z − 1)^{−1}(dz)²`, a vertex with `d = 2`.
pub fn f2() -> ReductionDatum {
    DatumBuilder::new(2, 1)
        .vertex("x", form(2, 1, &[(0, 3), (1, -1)], qi(0)), false)
        .leg("l0", "x", at(0), zero())
        .leg("l1", "x", at(1), zero())
        .leg("linf", "x", inf(), ValuedScalar::from_rational(q(9, 64)))
        .build()
        .unwrap()
}

/// F3: a boundary vertex with `d = 1`, compactified at `∞`.
pub fn f3() -> ReductionDatum {
    DatumBuilder::new(2, 1)
        .vertex("x", form(2, 1, &[(0, -2)], qi(0)), true)
        .compactify("x", vec![inf()])
        .leg("l0", "x", at(0), int(1))
        .leg("l1", "x", at(1), zero())
        .build()
        .unwrap()
}

/// F4: a boundary vertex with `d = 2`.
pub fn f4() -> ReductionDatum {
    DatumBuilder::new(2, 1)
        .vertex("x", form(2, 1, &[(0, 1)], qi(0)), true)
        .compactify("x", vec![inf()])
        .leg("l0", "x", at(0), zero())
        .leg("l1", "x", at(1), zero())
        .build()
        .unwrap()
}

/// F5: two vertices at levels 0 and 2 joined by an edge of length 1.
pub fn f5() -> ReductionDatum {
    DatumBuilder::new(2, 1)
        .vertex("y", form(2, 1, &[(0, -4)], qi(0)), false)
        .vertex("z", form(2, 1, &[(0, -2)], qi(2)), false)
        .edge("e", "y", "z", qi(1), (at(0), at(1)), zero(), zero())
        .leg("a", "y", at(1), zero())
        .leg("b", "y", inf(), zero())
        .leg("c", "z", at(0), pi(qi(2)))
        .leg("d", "z", inf(), pi(qi(2)))
        .build()
        .unwrap()
}

/// F7: a loop at a single vertex.
pub fn f7() -> ReductionDatum {
    DatumBuilder::new(2, 1)
        .vertex("x", form(2, 1, &[(0, -2)], qi(0)), false)
        .edge("loop", "x", "x", qi(1), (at(0), inf()), int(1), int(1))
        .leg("l", "x", at(1), zero())
        .build()
        .unwrap()
}

/// F8: an edge of odd slope.
pub fn f8() -> ReductionDatum {
    DatumBuilder::new(2, 1)
        .vertex("y", form(2, 1, &[(0, -3)], qi(0)), false)
        .vertex("z", form(2, 1, &[(0, -1)], qi(1)), false)
        .edge("e", "y", "z", qi(1), (at(0), at(0)), zero(), zero())
        .leg("a", "y", inf(), zero())
        .leg("b", "z", inf(), zero())
        .build()
        .unwrap()
}

/// F9: `z(z − 1)(dz)³`, a cubic vertex with `d = 3`.
pub fn f9() -> ReductionDatum {
    DatumBuilder::new(3, 3)
        .vertex("x", form(3, 1, &[(0, 1), (1, 1)], qi(0)), false)
        .leg("l0", "x", at(0), zero())
        .leg("l1", "x", at(1), zero())
        .leg("linf", "x", inf(), zero())
        .build()
        .unwrap()
}

/// F10: `z^{−3}(dz)³` with residues `1` and `−1`.
pub fn f10() -> ReductionDatum {
    DatumBuilder::new(3, 1)
        .vertex("x", form(3, 1, &[(0, -3)], qi(0)), false)
        .leg("l0", "x", at(0), int(1))
        .leg("linf", "x", inf(), int(-1))
        .leg("l1", "x", at(1), zero())
        .build()
        .unwrap()
}

/// F11: `z^{−4}(z − 1)²(dz)⁴` over `Q(i)`, with `l = 2` and `d = 2`.
pub fn f11() -> ReductionDatum {
    DatumBuilder::new(4, 4)
        .vertex("x", form(4, 1, &[(0, -4), (1, 2)], qi(0)), false)
        .leg("l0", "x", at(0), int(1))
        .leg("l1", "x", at(1), zero())
        .leg("linf", "x", inf(), zero())
        .build()
        .unwrap()
}

/// F12: an interior vertex joined to a boundary vertex.
pub fn f12() -> ReductionDatum {
    DatumBuilder::new(2, 1)
        .vertex("y", form(2, 1, &[(0, -2)], qi(0)), false)
        .vertex("z", form(2, 1, &[(0, -2)], qi(0)), true)
        .compactify("z", vec![inf()])
        .edge("e", "y", "z", qi(1), (at(0), at(0)), int(1), int(1))
        .leg("a", "y", inf(), int(1))
        .leg("b", "y", at(1), zero())
        .leg("c", "z", at(1), zero())
        .build()
        .unwrap()
}

/// F13: an abstract genus-one vertex.
pub fn f13() -> ReductionDatum {
    let marks = [("p1", 2, None), ("p2", -2, Some(1)), ("p3", -2, Some(1)), ("p4", 2, None)]
        .into_iter()
        .map(|(l, o, r)| AbstractMark {
            label: l.to_string(),
            order: o,
            residue: r.map(CycloRational::from_int),
        })
        .collect();
    let g = GradedQForm { form: VertexForm::Abstract(AbstractVertexData { genus: 1, marks }), level: qi(0) };
    DatumBuilder::new(2, 1)
        .vertex("x", g, false)
        .leg("a", "x", label("p1"), zero())
        .leg("b", "x", label("p2"), int(1))
        .leg("c", "x", label("p3"), int(1))
        .leg("d", "x", label("p4"), zero())
        .build()
        .unwrap()
}

/// All valid fixtures, by name.
pub fn all() -> Vec<(&'static str, ReductionDatum)> {
    vec![
        ("F1", f1()),
        ("F1b", f1b()),
        ("F2", f2()),
        ("F3", f3()),
        ("F4", f4()),
        ("F5", f5()),
        ("F7", f7()),
        ("F8", f8()),
        ("F9", f9()),
        ("F10", f10()),
        ("F11", f11()),
        ("F12", f12()),
        ("F13", f13()),
    ]
}

pub fn by_name(name: &str) -> Option<ReductionDatum> {
    all().into_iter().find(|(n, _)| n.eq_ignore_ascii_case(name)).map(|(_, d)| d)
}

/// One datum per condition, each breaking exactly that condition.
pub fn defects() -> Vec<(Condition, ReductionDatum)> {
    let set = |mut d: ReductionDatum, h: HalfEdge, r: ValuedScalar| {
        d.residues.insert(h, r);
        d
    };
    let mut c1 = f5();
    c1.curve.edges[0].length = qi(2);
    let c2 = set(set(f1(), HalfEdge::leg("l2"), int(4)), HalfEdge::leg("l3"), int(4));
    let c3 = set(f1(), HalfEdge::leg("l3"), int(1).add(&pi(qi(1))));
    let c4 = {
        let e = HalfEdge::edge("e");
        let o = e.opp().unwrap();
        set(set(f8(), e, pi(qi(5))), o, pi(qi(5)))
    };
    let c5 = set(f4(), HalfEdge::leg("l1"), pi(qi(1)));
    let a = set(f12(), HalfEdge::edge("e").opp().unwrap(), int(1).add(&pi(qi(1))));
    let mut d = f13();
    if let VertexForm::Abstract(ab) = &mut d.forms.get_mut("x").unwrap().form {
        ab.genus = 2;
    }
    vec![
        (Condition::C1, c1),
        (Condition::C2, c2),
        (Condition::C3, c3),
        (Condition::C4, c4),
        (Condition::C5, c5),
        (Condition::A, a),
        (Condition::D, d),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::validate::{validate, Mode};

    #[test]
    fn fixtures_validate() {
        for (name, d) in all() {
            let rep = validate(&d, Mode::Strict).unwrap();
            assert!(rep.is_empty(), "{name}: {:?}", rep.violations);
            d.assemble_level().unwrap();
        }
    }

    #[test]
    fn each_defect_flags_one_condition() {
        for (c, d) in defects() {
            let rep = validate(&d, Mode::Strict).unwrap();
            let got: Vec<_> = rep.conditions().into_iter().collect();
            assert_eq!(got, vec![c], "{:?}", rep.violations);
        }
    }

    #[test]
    fn json_round_trip() {
        for (name, d) in all() {
            let back = ReductionDatum::from_json(&d.to_json()).unwrap();
            assert_eq!(back, d, "{name}");
        }
    }
}
