//! Gluing star charts into a formal model, and reading a datum back from one.
//!
//! Each bounded edge `e: x → y` is glued by `t·s = K` with `ν(K) = −len(e)`,
//! where `t` is the end coordinate at `x` and `s` the one at `y`. The
//! transition is certified by substituting `s = K/t` into the normal form at
//! `y` and comparing with the normal form at `x`, both being exact Laurent
//! polynomials in their coordinates. Loops are glued the same way, with both
//! ends on the same chart.

use serde_json::{json, Value};

use crate::annulus::GoodCase;
use crate::curves::Mark;
use crate::datum::{Edge, HalfEdge, Leg, ReductionDatum, TropVertex, TropicalCurve};
use crate::error::{Error, Result};
use crate::lifting::{complete_boundary, lift_star, ChartEnd, StarChart};
use crate::rational::{fmt_q, q_from_json, q_to_json, qi, Q};
use crate::scalar::ValuedScalar;
use crate::validate::{validate, Mode};

/// The gluing of the two ends of a bounded edge.
#[derive(Clone, Debug, PartialEq)]
pub struct Transition {
    pub edge: String,
    pub tail: String,
    pub head: String,
    pub k: ValuedScalar,
    /// Set when `|n| ≠ q`, where the transition exponent is not `±1`.
    pub generalized: bool,
}

impl Transition {
    pub fn length(&self) -> Result<Q> {
        self.k
            .valuation()
            .map(|v| -v)
            .ok_or_else(|| Error::MalformedDatum(format!("transition on {} has K = 0", self.edge)))
    }

    pub fn to_json(&self) -> Value {
        json!({
            "edge": self.edge, "tail": self.tail, "head": self.head,
            "K": self.k.to_json(), "generalized": self.generalized,
        })
    }

    fn from_json(v: &Value, path: &str) -> Result<Self> {
        let s = |k: &str| -> Result<String> {
            v.get(k)
                .and_then(Value::as_str)
                .map(str::to_string)
                .ok_or_else(|| Error::parse(format!("{path}.{k}"), "expected a string"))
        };
        Ok(Transition {
            edge: s("edge")?,
            tail: s("tail")?,
            head: s("head")?,
            k: ValuedScalar::from_json(
                v.get("K").ok_or_else(|| Error::parse(path, "transition needs \"K\""))?,
                &format!("{path}.K"),
            )?,
            generalized: v.get("generalized").and_then(Value::as_bool).unwrap_or(false),
        })
    }
}

/// A leg capped by a disc carrying the good form of its end.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscCap {
    pub leg: String,
    pub vertex: String,
}

/// Legs added when a boundary vertex was completed.
#[derive(Clone, Debug, PartialEq)]
pub struct Completion {
    pub vertex: String,
    pub legs: Vec<String>,
    pub marks: Vec<Mark>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FormalModel {
    pub q: u32,
    pub conductor: u32,
    pub precision: Q,
    pub charts: Vec<StarChart>,
    pub transitions: Vec<Transition>,
    pub caps: Vec<DiscCap>,
    pub completions: Vec<Completion>,
}

impl FormalModel {
    pub fn chart(&self, x: &str) -> Option<&StarChart> {
        self.charts.iter().find(|c| c.vertex == x)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "q": self.q,
            "conductor": self.conductor,
            "precision": q_to_json(&self.precision),
            "charts": self.charts.iter().map(StarChart::to_json).collect::<Vec<_>>(),
            "transitions": self.transitions.iter().map(Transition::to_json).collect::<Vec<_>>(),
            "caps": self.caps.iter().map(|c| json!({"leg": c.leg, "vertex": c.vertex})).collect::<Vec<_>>(),
            "completions": self.completions.iter().map(|c| json!({
                "vertex": c.vertex,
                "legs": c.legs,
                "marks": c.marks.iter().map(Mark::to_json).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let arr = |k: &str| -> Result<&Vec<Value>> {
            v.get(k).and_then(Value::as_array).ok_or_else(|| Error::parse(k, "expected an array"))
        };
        let uint = |k: &str| -> Result<u32> {
            v.get(k)
                .and_then(Value::as_u64)
                .and_then(|x| u32::try_from(x).ok())
                .ok_or_else(|| Error::parse(k, "expected a positive integer"))
        };
        let str_of = |x: &Value, path: String| -> Result<String> {
            x.as_str().map(str::to_string).ok_or_else(|| Error::parse(path, "expected a string"))
        };
        let charts = arr("charts")?
            .iter()
            .enumerate()
            .map(|(i, c)| StarChart::from_json(c, &format!("charts[{i}]")))
            .collect::<Result<Vec<_>>>()?;
        let transitions = arr("transitions")?
            .iter()
            .enumerate()
            .map(|(i, t)| Transition::from_json(t, &format!("transitions[{i}]")))
            .collect::<Result<Vec<_>>>()?;
        let caps = arr("caps")?
            .iter()
            .enumerate()
            .map(|(i, c)| {
                Ok(DiscCap {
                    leg: str_of(&c["leg"], format!("caps[{i}].leg"))?,
                    vertex: str_of(&c["vertex"], format!("caps[{i}].vertex"))?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let empty = Vec::new();
        let completions = v
            .get("completions")
            .and_then(Value::as_array)
            .unwrap_or(&empty)
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let p = format!("completions[{i}]");
                let list = |k: &str| {
                    c.get(k)
                        .and_then(Value::as_array)
                        .ok_or_else(|| Error::parse(format!("{p}.{k}"), "expected an array"))
                };
                Ok(Completion {
                    vertex: str_of(&c["vertex"], format!("{p}.vertex"))?,
                    legs: list("legs")?
                        .iter()
                        .map(|l| str_of(l, format!("{p}.legs")))
                        .collect::<Result<_>>()?,
                    marks: list("marks")?
                        .iter()
                        .map(|m| Mark::from_json(m, &format!("{p}.marks")))
                        .collect::<Result<_>>()?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(FormalModel {
            q: uint("q")?,
            conductor: uint("conductor")?,
            precision: q_from_json(
                v.get("precision").ok_or_else(|| Error::parse("precision", "missing"))?,
                "precision",
            )?,
            charts,
            transitions,
            caps,
            completions,
        })
    }
}

fn mismatch(edge: &str, residual: impl Into<String>) -> Error {
    Error::GluingMismatch { edge: edge.to_string(), residual: residual.into() }
}

/// `K` with `value = K^k` for a nonzero integer `k`.
fn solve_power(value: &ValuedScalar, k: i64) -> Result<ValuedScalar> {
    let base = if k < 0 { value.inv()? } else { value.clone() };
    base.nth_root(k.unsigned_abs() as u32)
}

/// Solves for the transition constant between two ends and certifies it.
pub fn glue_ends(
    edge: &str,
    q_: u32,
    a: &ChartEnd,
    b: &ChartEnd,
    length: &Q,
) -> Result<(ValuedScalar, bool)> {
    let qq = q_ as i64;
    let n = a.n();
    if b.n() != -n {
        return Err(mismatch(edge, format!("end indices {n} and {} are not opposite", b.n())));
    }
    let sign = ValuedScalar::from_int(if q_.is_multiple_of(2) { 1 } else { -1 });
    let k = match (&a.good.case, &b.good.case) {
        (GoodCase::Monomial { n: 0, .. }, GoodCase::Monomial { n: 0, .. }) => {
            ValuedScalar::pi_pow(-length.clone())
        }
        (GoodCase::Power { c_n: c, c_0: c0, .. }, GoodCase::Power { c_n: c2, c_0: c02, .. }) => {
            // K^{−n/q} = (c_0'/c_0)(c/c')
            let value = c02.mul(c).div(&c0.mul(c2))?;
            solve_power(&value, -n / qq)?
        }
        (GoodCase::Monomial { c_n: c, .. }, GoodCase::Monomial { c_n: c2, .. }) => {
            // K^{−n} = (−1)^q (c/c')^q
            let value = sign.mul(&c.div(c2)?.pow(qq)?);
            solve_power(&value, -n)?
        }
        _ => return Err(mismatch(edge, "one end has a residue and the other does not")),
    };
    if k.valuation() != Some(&-length.clone()) {
        return Err(mismatch(
            edge,
            format!(
                "ν(K) = {} but the edge has length {}",
                k.valuation().map_or("∞".into(), fmt_q),
                fmt_q(length)
            ),
        ));
    }
    let lhs = b.good.normal_series()?.substitute_inversion(&k)?.scale(&sign);
    let residual = lhs.sub(&a.good.normal_series()?);
    if let Some((e, c)) = residual.terms().find(|(_, c)| !c.is_zero()) {
        return Err(mismatch(edge, format!("coefficient of t^{e} differs by {c}")));
    }
    Ok((k, n.abs() != qq && n != 0))
}

/// Glues charts along the edges of `g` and caps its legs.
pub fn glue_model(g: &ReductionDatum, charts: Vec<StarChart>) -> Result<FormalModel> {
    let find = |x: &str, h: &HalfEdge| -> Result<&ChartEnd> {
        charts
            .iter()
            .find(|c| c.vertex == x)
            .ok_or_else(|| Error::MalformedDatum(format!("no chart for {x}")))?
            .end(h)
            .ok_or_else(|| Error::MalformedDatum(format!("chart {x} has no end for {h}")))
    };
    let mut transitions = Vec::new();
    for e in &g.curve.edges {
        let h = HalfEdge::edge(&e.id);
        let a = find(&e.tail, &h)?;
        let b = find(&e.head, &h.opp().unwrap())?;
        let (k, generalized) = glue_ends(&e.id, g.q, a, b, &e.length)?;
        transitions.push(Transition {
            edge: e.id.clone(),
            tail: e.tail.clone(),
            head: e.head.clone(),
            k,
            generalized,
        });
    }
    let mut caps = Vec::new();
    for l in &g.curve.legs {
        find(&l.vertex, &HalfEdge::leg(&l.id))?;
        caps.push(DiscCap { leg: l.id.clone(), vertex: l.vertex.clone() });
    }
    Ok(FormalModel {
        q: g.q,
        conductor: g.conductor,
        precision: g.precision.clone(),
        charts,
        transitions,
        caps,
        completions: vec![],
    })
}

/// Completes boundary vertices, lifts every star and glues.
pub fn lift(g: &ReductionDatum) -> Result<FormalModel> {
    let rep = validate(g, Mode::Strict)?;
    if !rep.is_empty() {
        let keys: Vec<String> =
            rep.violations.iter().map(|v| format!("{} on {} at {}", v.condition, v.item, v.vertex)).collect();
        return Err(Error::Precondition(format!("datum is not compatible: {}", keys.join("; "))));
    }
    let mut full = g.clone();
    let mut completions = Vec::new();
    for v in &g.curve.vertices {
        if v.boundary {
            let marks = g.compactification.get(&v.id).cloned().unwrap_or_default();
            let (next, legs) = complete_boundary(&full, &v.id)?;
            full = next;
            completions.push(Completion { vertex: v.id.clone(), legs, marks });
        }
    }
    let charts = full.curve.vertices.iter().map(|v| lift_star(&full, &v.id)).collect::<Result<Vec<_>>>()?;
    let mut model = glue_model(&full, charts)?;
    model.completions = completions;
    Ok(model)
}

/// Reads the reduction datum off a formal model.
pub fn reduce_model(m: &FormalModel) -> Result<ReductionDatum> {
    if m.charts.is_empty() {
        return Err(Error::MalformedDatum("model has no charts".to_string()));
    }
    let mut forms = std::collections::BTreeMap::new();
    let mut marks = std::collections::BTreeMap::new();
    let mut residues = std::collections::BTreeMap::new();
    for c in &m.charts {
        let mut level: Option<Q> = None;
        for e in &c.ends {
            let l = e.level()?;
            if level.as_ref().is_some_and(|x| x != &l) {
                return Err(Error::InconsistentLevels {
                    edge: e.half_edge.key(),
                    detail: format!("ends of {} disagree on the level", c.vertex),
                });
            }
            level = Some(l);
            marks.insert(e.half_edge.clone(), e.mark.clone());
            residues.insert(e.half_edge.clone(), e.good.residue()?);
        }
        let mut form = c.form.clone();
        form.level = level.unwrap_or_else(|| c.form.level.clone());
        forms.insert(c.vertex.clone(), form);
    }
    let edges = m
        .transitions
        .iter()
        .map(|t| {
            Ok(Edge { id: t.edge.clone(), tail: t.tail.clone(), head: t.head.clone(), length: t.length()? })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut curve = TropicalCurve {
        vertices: m.charts.iter().map(|c| TropVertex { id: c.vertex.clone(), boundary: false }).collect(),
        edges,
        legs: m.caps.iter().map(|c| Leg { id: c.leg.clone(), vertex: c.vertex.clone() }).collect(),
    };
    // slopes must agree with the end indices
    for e in &curve.edges {
        let h = HalfEdge::edge(&e.id);
        let end = m
            .chart(&e.tail)
            .and_then(|c| c.end(&h))
            .ok_or_else(|| Error::MalformedDatum(format!("edge {} has no end at {}", e.id, e.tail)))?;
        let slope = (&forms[&e.head].level - &forms[&e.tail].level) / &e.length;
        if slope != qi(-end.n()) {
            return Err(Error::InconsistentLevels {
                edge: e.id.clone(),
                detail: format!("levels give slope {} but the end index is {}", fmt_q(&slope), end.n()),
            });
        }
    }
    let mut compactification = std::collections::BTreeMap::new();
    for c in &m.completions {
        curve.legs.retain(|l| !c.legs.contains(&l.id));
        for l in &c.legs {
            marks.remove(&HalfEdge::leg(l));
            residues.remove(&HalfEdge::leg(l));
        }
        for v in &mut curve.vertices {
            if v.id == c.vertex {
                v.boundary = true;
            }
        }
        compactification.insert(c.vertex.clone(), c.marks.clone());
    }
    let d = ReductionDatum {
        q: m.q,
        conductor: m.conductor,
        precision: m.precision.clone(),
        curve,
        forms,
        marks,
        compactification,
        residues,
    };
    d.check_structure()?;
    Ok(d)
}
