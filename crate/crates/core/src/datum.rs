//! Tropical curves, metrized curve complexes, reduction data and level functions.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde_json::{json, Map, Value};

use crate::curves::{GradedQForm, Mark, VertexForm};
use crate::error::{Error, Result};
use crate::rational::{fmt_q, q_from_json, q_to_json, qi, Q};
use crate::scalar::{ValuedScalar, DEFAULT_PRECISION};

/// An oriented bounded edge (`reversed` selects `head → tail`) or a leg.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum HalfEdge {
    Edge { id: String, reversed: bool },
    Leg { id: String },
}

impl HalfEdge {
    pub fn edge(id: &str) -> Self {
        HalfEdge::Edge { id: id.to_string(), reversed: false }
    }

    pub fn leg(id: &str) -> Self {
        HalfEdge::Leg { id: id.to_string() }
    }

    pub fn id(&self) -> &str {
        match self {
            HalfEdge::Edge { id, .. } | HalfEdge::Leg { id } => id,
        }
    }

    pub fn is_leg(&self) -> bool {
        matches!(self, HalfEdge::Leg { .. })
    }

    pub fn opp(&self) -> Option<HalfEdge> {
        match self {
            HalfEdge::Edge { id, reversed } => Some(HalfEdge::Edge { id: id.clone(), reversed: !reversed }),
            HalfEdge::Leg { .. } => None,
        }
    }

    /// Key used in residue tables: `e`, `~e` or the leg id.
    pub fn key(&self) -> String {
        match self {
            HalfEdge::Edge { id, reversed: false } | HalfEdge::Leg { id } => id.clone(),
            HalfEdge::Edge { id, reversed: true } => format!("~{id}"),
        }
    }
}

impl fmt::Display for HalfEdge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.key())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TropVertex {
    pub id: String,
    pub boundary: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Edge {
    pub id: String,
    pub tail: String,
    pub head: String,
    pub length: Q,
}

/// A leg at a type-2 vertex; its type-1 endpoint is implicit.
#[derive(Clone, Debug, PartialEq)]
pub struct Leg {
    pub id: String,
    pub vertex: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TropicalCurve {
    pub vertices: Vec<TropVertex>,
    pub edges: Vec<Edge>,
    pub legs: Vec<Leg>,
}

impl TropicalCurve {
    pub fn vertex(&self, id: &str) -> Option<&TropVertex> {
        self.vertices.iter().find(|v| v.id == id)
    }

    pub fn edge(&self, id: &str) -> Option<&Edge> {
        self.edges.iter().find(|e| e.id == id)
    }

    pub fn leg(&self, id: &str) -> Option<&Leg> {
        self.legs.iter().find(|l| l.id == id)
    }

    /// Every oriented edge and leg, in a fixed order.
    pub fn half_edges(&self) -> Vec<HalfEdge> {
        let mut out = Vec::new();
        for e in &self.edges {
            out.push(HalfEdge::Edge { id: e.id.clone(), reversed: false });
            out.push(HalfEdge::Edge { id: e.id.clone(), reversed: true });
        }
        out.extend(self.legs.iter().map(|l| HalfEdge::leg(&l.id)));
        out
    }

    pub fn tail(&self, h: &HalfEdge) -> &str {
        match h {
            HalfEdge::Edge { id, reversed } => {
                let e = self.edge(id).expect("known edge");
                if *reversed {
                    &e.head
                } else {
                    &e.tail
                }
            }
            HalfEdge::Leg { id } => &self.leg(id).expect("known leg").vertex,
        }
    }

    pub fn head(&self, h: &HalfEdge) -> Option<&str> {
        match h {
            HalfEdge::Edge { .. } => Some(self.tail(&h.opp().unwrap())),
            HalfEdge::Leg { .. } => None,
        }
    }

    pub fn length(&self, h: &HalfEdge) -> Option<&Q> {
        match h {
            HalfEdge::Edge { id, .. } => Some(&self.edge(id).expect("known edge").length),
            HalfEdge::Leg { .. } => None,
        }
    }

    /// The half-edges leaving `x`: its star.
    pub fn star(&self, x: &str) -> Vec<HalfEdge> {
        self.half_edges().into_iter().filter(|h| self.tail(h) == x).collect()
    }
}

/// The reduction datum `(C, η^gr, R^q)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ReductionDatum {
    pub q: u32,
    pub conductor: u32,
    pub precision: Q,
    pub curve: TropicalCurve,
    pub forms: BTreeMap<String, GradedQForm>,
    pub marks: BTreeMap<HalfEdge, Mark>,
    /// Points of boundary vertex curves not attached to the star.
    pub compactification: BTreeMap<String, Vec<Mark>>,
    pub residues: BTreeMap<HalfEdge, ValuedScalar>,
}

/// Levels at vertices and slopes along half-edges.
#[derive(Clone, Debug, PartialEq)]
pub struct LevelFunction {
    pub levels: BTreeMap<String, Q>,
    pub slopes: BTreeMap<HalfEdge, Q>,
}

impl LevelFunction {
    pub fn slope(&self, h: &HalfEdge) -> &Q {
        &self.slopes[h]
    }

    pub fn level(&self, x: &str) -> &Q {
        &self.levels[x]
    }

    pub fn star_sum(&self, curve: &TropicalCurve, x: &str) -> Q {
        curve.star(x).iter().map(|h| self.slope(h).clone()).sum()
    }

    /// `Σ slope·length` around each fundamental cycle of a spanning forest.
    pub fn cycle_sums(&self, curve: &TropicalCurve) -> Vec<(String, Q)> {
        // BFS forest with parent half-edges pointing back to the root
        let mut parent: HashMap<&str, Option<HalfEdge>> = HashMap::new();
        let mut tree: BTreeSet<String> = BTreeSet::new();
        for root in &curve.vertices {
            if parent.contains_key(root.id.as_str()) {
                continue;
            }
            parent.insert(&root.id, None);
            let mut queue = vec![root.id.as_str()];
            while let Some(x) = queue.pop() {
                for h in curve.star(x) {
                    if let Some(y) = curve.head(&h) {
                        if !parent.contains_key(y) {
                            parent.insert(y, Some(h.opp().unwrap()));
                            tree.insert(h.id().to_string());
                            queue.push(y);
                        }
                    }
                }
            }
        }
        // path sum from x to its root, following parent half-edges
        let to_root = |x: &str| -> Q {
            let mut acc = qi(0);
            let mut cur = x.to_string();
            while let Some(Some(h)) = parent.get(cur.as_str()) {
                acc += self.slope(h) * curve.length(h).unwrap();
                cur = curve.head(h).unwrap().to_string();
            }
            acc
        };
        curve
            .edges
            .iter()
            .filter(|e| !tree.contains(&e.id))
            .map(|e| {
                let h = HalfEdge::edge(&e.id);
                // tail → head along e, then head → root → tail
                let s = self.slope(&h) * &e.length + to_root(&e.head) - to_root(&e.tail);
                (e.id.clone(), s)
            })
            .collect()
    }
}

impl ReductionDatum {
    pub fn form(&self, x: &str) -> &GradedQForm {
        &self.forms[x]
    }

    pub fn mark(&self, h: &HalfEdge) -> &Mark {
        &self.marks[h]
    }

    pub fn residue(&self, h: &HalfEdge) -> &ValuedScalar {
        &self.residues[h]
    }

    pub fn is_boundary(&self, x: &str) -> bool {
        self.curve.vertex(x).is_some_and(|v| v.boundary)
    }

    /// Order of the vertex form at the mark of `h`.
    pub fn order(&self, h: &HalfEdge) -> Result<i64> {
        self.form(self.curve.tail(h)).order_at(self.mark(h))
    }

    /// Slopes read from vertex levels on bounded edges and from `−q − ord` on legs.
    pub(crate) fn level_slopes(&self) -> Result<LevelFunction> {
        let levels: BTreeMap<String, Q> =
            self.forms.iter().map(|(k, f)| (k.clone(), f.level.clone())).collect();
        let mut slopes = BTreeMap::new();
        for h in self.curve.half_edges() {
            let s = match self.curve.head(&h) {
                Some(y) => (&levels[y] - &levels[self.curve.tail(&h)]) / self.curve.length(&h).unwrap(),
                None => qi(-(self.q as i64) - self.order(&h)?),
            };
            slopes.insert(h, s);
        }
        Ok(LevelFunction { levels, slopes })
    }

    /// Assembles the level function and checks it against the vertex orders.
    pub fn assemble_level(&self) -> Result<LevelFunction> {
        let lf = self.level_slopes()?;
        let q = self.q as i64;
        for e in &self.curve.edges {
            let h = HalfEdge::edge(&e.id);
            let o = h.opp().unwrap();
            let (m1, m2) = (self.order(&h)?, self.order(&o)?);
            if m1 + m2 != -2 * q {
                return Err(Error::InconsistentLevels {
                    edge: e.id.clone(),
                    detail: format!("orders {m1} and {m2} at the two ends do not sum to {}", -2 * q),
                });
            }
            let expected = qi(-q - m1);
            if lf.slope(&h) != &expected {
                return Err(Error::InconsistentLevels {
                    edge: e.id.clone(),
                    detail: format!(
                        "levels give slope {} but the order {m1} forces {}",
                        fmt_q(lf.slope(&h)),
                        fmt_q(&expected)
                    ),
                });
            }
        }
        Ok(lf)
    }

    /// Human-readable differences from `other`: exact on curve and residue
    /// field data, to precision (and to at least `self.precision`) on residues.
    pub fn differences(&self, other: &ReductionDatum) -> Vec<String> {
        let mut out = Vec::new();
        if (self.q, self.conductor) != (other.q, other.conductor) {
            out.push(format!(
                "(q, N) = ({}, {}) vs ({}, {})",
                self.q, self.conductor, other.q, other.conductor
            ));
        }
        if self.curve != other.curve {
            out.push("tropical curves differ".to_string());
        }
        for (x, f) in &self.forms {
            if other.forms.get(x) != Some(f) {
                out.push(format!("vertex form or level at {x}"));
            }
        }
        if self.forms.len() != other.forms.len() {
            out.push("vertex sets differ".to_string());
        }
        if self.marks != other.marks {
            out.push("marks differ".to_string());
        }
        if self.compactification != other.compactification {
            out.push("compactification points differ".to_string());
        }
        for (h, r) in &self.residues {
            match other.residues.get(h) {
                None => out.push(format!("R({h}) missing")),
                Some(s) => {
                    let d = r.sub(s);
                    let enough = d.precision().is_none_or(|p| p >= &self.precision);
                    if !d.is_zero() || !enough {
                        out.push(format!("R({h}) = {r} vs {s}"));
                    }
                }
            }
        }
        if self.residues.len() != other.residues.len() {
            out.push("residue tables have different keys".to_string());
        }
        out
    }

    /// Structural well-formedness: ids, incidences, marks and residue coverage.
    pub fn check_structure(&self) -> Result<()> {
        let bad = |m: String| Err(Error::MalformedDatum(m));
        if self.q == 0 {
            return bad("q must be positive".into());
        }
        let mut ids = BTreeSet::new();
        for v in &self.curve.vertices {
            if !ids.insert(v.id.clone()) {
                return bad(format!("duplicate vertex id {}", v.id));
            }
            if !self.forms.contains_key(&v.id) {
                return bad(format!("vertex {} has no form", v.id));
            }
        }
        let mut eids = BTreeSet::new();
        for e in &self.curve.edges {
            if e.id.starts_with('~') || !eids.insert(e.id.clone()) {
                return bad(format!("invalid or duplicate edge id {}", e.id));
            }
            for end in [&e.tail, &e.head] {
                if !ids.contains(end) {
                    return bad(format!("edge {} refers to unknown vertex {end}", e.id));
                }
            }
            if e.length <= qi(0) {
                return bad(format!("edge {} has non-positive length", e.id));
            }
        }
        for l in &self.curve.legs {
            if l.id.starts_with('~') || !eids.insert(l.id.clone()) {
                return bad(format!("invalid or duplicate leg id {}", l.id));
            }
            if !ids.contains(&l.vertex) {
                return bad(format!("leg {} refers to unknown vertex {}", l.id, l.vertex));
            }
        }
        for (x, f) in &self.forms {
            if !ids.contains(x) {
                return bad(format!("form given for unknown vertex {x}"));
            }
            if let VertexForm::Explicit(r) = &f.form {
                if r.q() != self.q {
                    return bad(format!(
                        "vertex {x} carries a {}-differential, expected q = {}",
                        r.q(),
                        self.q
                    ));
                }
            }
            let mut seen: Vec<&Mark> = Vec::new();
            let star = self.curve.star(x);
            let extra = self.compactification.get(x).map(|v| v.as_slice()).unwrap_or(&[]);
            for h in &star {
                let m = self.marks.get(h).ok_or_else(|| Error::MalformedDatum(format!("{h} has no mark")))?;
                seen.push(m);
            }
            seen.extend(extra.iter());
            for (i, m) in seen.iter().enumerate() {
                if seen[..i].contains(m) {
                    return bad(format!("mark {m} used twice at vertex {x}"));
                }
                f.order_at(m)?;
            }
            if !extra.is_empty() && !self.is_boundary(x) {
                return bad(format!("interior vertex {x} lists compactification points"));
            }
        }
        for h in self.curve.half_edges() {
            if !self.residues.contains_key(&h) {
                return bad(format!("residue function is undefined on {h}"));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Value {
        let vertices: Vec<Value> = self
            .curve
            .vertices
            .iter()
            .map(|v| {
                let mut o = self.forms[&v.id].to_json();
                o["id"] = json!(v.id);
                o["boundary"] = json!(v.boundary);
                if let Some(c) = self.compactification.get(&v.id) {
                    o["compactification"] = Value::Array(c.iter().map(Mark::to_json).collect());
                }
                o
            })
            .collect();
        let edges: Vec<Value> = self
            .curve
            .edges
            .iter()
            .map(|e| {
                let h = HalfEdge::edge(&e.id);
                json!({
                    "id": e.id, "tail": e.tail, "head": e.head, "length": q_to_json(&e.length),
                    "tail_mark": self.marks[&h].to_json(),
                    "head_mark": self.marks[&h.opp().unwrap()].to_json(),
                })
            })
            .collect();
        let legs: Vec<Value> = self
            .curve
            .legs
            .iter()
            .map(|l| json!({"id": l.id, "vertex": l.vertex, "mark": self.marks[&HalfEdge::leg(&l.id)].to_json()}))
            .collect();
        let mut residues = Map::new();
        for h in self.curve.half_edges() {
            if let Some(r) = self.residues.get(&h) {
                residues.insert(h.key(), r.to_json());
            }
        }
        json!({
            "q": self.q,
            "conductor": self.conductor,
            "precision": q_to_json(&self.precision),
            "vertices": vertices,
            "edges": edges,
            "legs": legs,
            "residues": residues,
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let q = v
            .get("q")
            .and_then(Value::as_u64)
            .filter(|&x| x > 0 && x <= 64)
            .ok_or_else(|| Error::parse("$", "datum needs an integer \"q\" in 1..=64"))?
            as u32;
        let conductor = match v.get("conductor") {
            None => 1,
            Some(c) => c
                .as_u64()
                .filter(|&n| (1..=10_000).contains(&n))
                .ok_or_else(|| Error::parse("$.conductor", "conductor must be a positive integer"))?
                as u32,
        };
        let precision = match v.get("precision") {
            None => qi(DEFAULT_PRECISION),
            Some(p) => q_from_json(p, "$.precision")?,
        };
        let arr = |k: &str| -> Result<&Vec<Value>> {
            match v.get(k) {
                None => Ok(EMPTY.get_or_init(Vec::new)),
                Some(a) => a.as_array().ok_or_else(|| Error::parse(format!("$.{k}"), "expected a list")),
            }
        };
        static EMPTY: std::sync::OnceLock<Vec<Value>> = std::sync::OnceLock::new();
        let str_field = |o: &Value, k: &str, path: &str| -> Result<String> {
            o.get(k)
                .and_then(Value::as_str)
                .map(str::to_string)
                .ok_or_else(|| Error::parse(path, format!("missing string \"{k}\"")))
        };
        let mut curve = TropicalCurve { vertices: vec![], edges: vec![], legs: vec![] };
        let mut forms = BTreeMap::new();
        let mut marks = BTreeMap::new();
        let mut compactification = BTreeMap::new();
        for (i, x) in arr("vertices")?.iter().enumerate() {
            let path = format!("$.vertices[{i}]");
            let id = str_field(x, "id", &path)?;
            if let Some(t) = x.get("type") {
                if t.as_u64() != Some(2) {
                    return Err(Error::parse(
                        &path,
                        "only type-2 vertices are listed; legs end at implicit type-1 points",
                    ));
                }
            }
            let boundary = x.get("boundary").and_then(Value::as_bool).unwrap_or(false);
            forms.insert(id.clone(), GradedQForm::from_json(x, &path)?);
            if let Some(c) = x.get("compactification") {
                let c =
                    c.as_array().ok_or_else(|| Error::parse(&path, "\"compactification\" must be a list"))?;
                let ms = c
                    .iter()
                    .enumerate()
                    .map(|(j, m)| Mark::from_json(m, &format!("{path}.compactification[{j}]")))
                    .collect::<Result<Vec<_>>>()?;
                compactification.insert(id.clone(), ms);
            }
            curve.vertices.push(TropVertex { id, boundary });
        }
        for (i, e) in arr("edges")?.iter().enumerate() {
            let path = format!("$.edges[{i}]");
            let id = str_field(e, "id", &path)?;
            let length = q_from_json(
                e.get("length").ok_or_else(|| Error::parse(&path, "edge needs \"length\""))?,
                &format!("{path}.length"),
            )?;
            let mk = |k: &str| {
                Mark::from_json(
                    e.get(k).ok_or_else(|| Error::parse(&path, format!("edge needs \"{k}\"")))?,
                    &format!("{path}.{k}"),
                )
            };
            marks.insert(HalfEdge::edge(&id), mk("tail_mark")?);
            marks.insert(HalfEdge::edge(&id).opp().unwrap(), mk("head_mark")?);
            curve.edges.push(Edge {
                id,
                tail: str_field(e, "tail", &path)?,
                head: str_field(e, "head", &path)?,
                length,
            });
        }
        for (i, l) in arr("legs")?.iter().enumerate() {
            let path = format!("$.legs[{i}]");
            let id = str_field(l, "id", &path)?;
            let m = Mark::from_json(
                l.get("mark").ok_or_else(|| Error::parse(&path, "leg needs \"mark\""))?,
                &format!("{path}.mark"),
            )?;
            marks.insert(HalfEdge::leg(&id), m);
            curve.legs.push(Leg { id, vertex: str_field(l, "vertex", &path)? });
        }
        let mut residues = BTreeMap::new();
        if let Some(r) = v.get("residues") {
            let r = r.as_object().ok_or_else(|| Error::parse("$.residues", "expected an object"))?;
            for (k, val) in r {
                let path = format!("$.residues.{k}");
                let h = match k.strip_prefix('~') {
                    Some(id) if curve.edge(id).is_some() => {
                        HalfEdge::Edge { id: id.to_string(), reversed: true }
                    }
                    None if curve.edge(k).is_some() => HalfEdge::edge(k),
                    None if curve.leg(k).is_some() => HalfEdge::leg(k),
                    _ => return Err(Error::parse(&path, "no such edge or leg")),
                };
                residues.insert(h, ValuedScalar::from_json(val, &path)?);
            }
        }
        let d = ReductionDatum { q, conductor, precision, curve, forms, marks, compactification, residues };
        d.check_structure()?;
        Ok(d)
    }
}
