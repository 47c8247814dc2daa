//! Local lifts of a reduction datum around one vertex.
//!
//! A vertex with `d = 1` lifts through a q-th root `ω̃` of its reduced form,
//! with edge residues chosen as a zero-sum tuple of q-th roots. A vertex with
//! `d > 1` lifts through its canonical cyclic cover, whose leaves above a full
//! fiber carry the residues `ζ_d^j·b_i` and therefore always sum to zero.

use std::fmt::Write as _;

use serde_json::{json, Value};

use crate::annulus::{good_coordinate, AnnulusQForm, AnnulusWindow, GoodCase, GoodForm};
use crate::curves::{nth_root_rational, GradedQForm, Mark, ProjPoint, RationalQDifferential, VertexForm};
use crate::cyclo::CycloRational;
use crate::datum::{HalfEdge, Leg, ReductionDatum};
use crate::error::{Error, Result};
use crate::psd::RootSystem;
use crate::rational::{as_i64, lcm_u32, q_to_json, qi, Q};
use crate::scalar::ValuedScalar;
use crate::series::{ScalarSeries, DEFAULT_WINDOW};
use crate::validate::{validate, Mode};

/// Ramification bookkeeping for the canonical cover of a q-form with orders `m`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoverLedger {
    pub q: u32,
    pub m: Vec<i64>,
    /// `l_i = gcd(q, m_i)`.
    pub l_i: Vec<u32>,
    /// `l = gcd_i l_i`; the form is an `l`-th power.
    pub l: u32,
    /// `d_i = q / l_i`, the ramification index over the i-th point.
    pub d_i: Vec<u32>,
    /// `d = q / l`, the degree of the cover.
    pub d: u32,
    /// `f_i = l_i / l`, the number of cover points above the i-th point.
    pub fibers: Vec<u32>,
}

fn gcd_u32(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd_u32(b, a % b)
    }
}

pub fn cover_ledger(q_: u32, m: &[i64]) -> Result<CoverLedger> {
    if q_ == 0 {
        return Err(Error::Precondition("q must be positive".to_string()));
    }
    let l_i: Vec<u32> = m.iter().map(|mi| gcd_u32(q_, mi.unsigned_abs() as u32)).collect();
    let l = l_i.iter().fold(q_, |a, b| gcd_u32(a, *b));
    Ok(CoverLedger {
        q: q_,
        m: m.to_vec(),
        d_i: l_i.iter().map(|li| q_ / li).collect(),
        d: q_ / l,
        fibers: l_i.iter().map(|li| li / l).collect(),
        l_i,
        l,
    })
}

impl CoverLedger {
    pub fn is_full(&self, i: usize) -> bool {
        self.fibers[i] == self.d
    }

    pub fn to_json(&self) -> Value {
        json!({
            "q": self.q, "m": self.m, "l_i": self.l_i, "l": self.l,
            "d_i": self.d_i, "d": self.d, "fibers": self.fibers,
        })
    }
}

/// One point of the cover above a star element.
#[derive(Clone, Debug, PartialEq)]
pub struct CoverLeaf {
    pub over: HalfEdge,
    pub sheet: u32,
    /// `len(e)/d` for bounded edges; legs stay infinite.
    pub length: Option<Q>,
    pub residue: ValuedScalar,
}

/// The star of the canonical cover above a vertex with `d > 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct CoverStarDatum {
    pub vertex: String,
    /// Level of the cover centre, `ℓ/q`.
    pub level: Q,
    pub ledger: CoverLedger,
    /// The cover as a superelliptic equation.
    pub curve: String,
    /// Free coefficient of the principal d-th root branch above full fibers.
    pub a_tilde: Vec<Option<CycloRational>>,
    pub leaves: Vec<CoverLeaf>,
}

impl CoverStarDatum {
    pub fn residue_sum(&self) -> ValuedScalar {
        self.leaves.iter().fold(ValuedScalar::zero(), |a, l| a.add(&l.residue))
    }

    pub fn to_json(&self) -> Value {
        json!({
            "vertex": self.vertex,
            "level": q_to_json(&self.level),
            "ledger": self.ledger.to_json(),
            "curve": self.curve,
            "a_tilde": self.a_tilde.iter().map(|a| a.as_ref().map_or(Value::Null, CycloRational::to_json)).collect::<Vec<_>>(),
            "leaves": self.leaves.iter().map(|l| json!({
                "over": half_edge_to_json(&l.over),
                "sheet": l.sheet,
                "length": l.length.as_ref().map_or(Value::Null, q_to_json),
                "residue": l.residue.to_json(),
            })).collect::<Vec<_>>(),
            "residue_sum": self.residue_sum().to_json(),
        })
    }
}

pub(crate) fn half_edge_to_json(h: &HalfEdge) -> Value {
    match h {
        HalfEdge::Edge { id, reversed } => json!({"edge": id, "reversed": reversed}),
        HalfEdge::Leg { id } => json!({"leg": id}),
    }
}

pub(crate) fn half_edge_from_json(v: &Value, path: &str) -> Result<HalfEdge> {
    if let Some(id) = v.get("leg").and_then(Value::as_str) {
        return Ok(HalfEdge::leg(id));
    }
    let id = v
        .get("edge")
        .and_then(Value::as_str)
        .ok_or_else(|| Error::parse(path, "half-edge needs \"edge\" or \"leg\""))?;
    let reversed = v.get("reversed").and_then(Value::as_bool).unwrap_or(false);
    Ok(HalfEdge::Edge { id: id.to_string(), reversed })
}

/// A star element as seen from its vertex.
#[derive(Clone, Debug)]
struct StarItem {
    h: HalfEdge,
    mark: Mark,
    ord: i64,
    slope: Q,
    residue: ValuedScalar,
    /// Length used to size the end window (legs use 1).
    length: Q,
}

fn star_items(g: &ReductionDatum, x: &str) -> Result<Vec<StarItem>> {
    let lf = g.assemble_level()?;
    g.curve
        .star(x)
        .into_iter()
        .map(|h| {
            Ok(StarItem {
                mark: g.mark(&h).clone(),
                ord: g.order(&h)?,
                slope: lf.slope(&h).clone(),
                residue: g.residue(&h).clone(),
                length: g.curve.length(&h).cloned().unwrap_or_else(|| qi(1)),
                h,
            })
        })
        .collect()
}

fn point_of(mark: &Mark) -> Result<&ProjPoint> {
    match mark {
        Mark::Point(p) => Ok(p),
        Mark::Label(l) => Err(Error::MalformedDatum(format!("explicit vertex marked by label {l}"))),
    }
}

fn same(a: &CycloRational, b: &CycloRational) -> bool {
    a.sub(b).is_zero()
}

/// A good-form end of a star chart.
#[derive(Clone, Debug, PartialEq)]
pub struct ChartEnd {
    pub half_edge: HalfEdge,
    pub mark: Mark,
    /// Window in `ν(t)`, measured from the vertex.
    pub window: AnnulusWindow,
    pub good: GoodForm,
}

impl ChartEnd {
    pub fn n(&self) -> i64 {
        self.good.n()
    }

    /// Level at the vertex read from the leading coefficient.
    pub fn level(&self) -> Result<Q> {
        let v = self
            .good
            .c_n()
            .valuation()
            .ok_or_else(|| Error::MalformedDatum(format!("end {} has c_n = 0", self.half_edge)))?;
        Ok(v * qi(self.good.q as i64))
    }

    pub fn to_json(&self) -> Value {
        json!({
            "half_edge": half_edge_to_json(&self.half_edge),
            "mark": self.mark.to_json(),
            "window": self.window.to_json(),
            "good": self.good.to_json(),
        })
    }

    pub fn from_json(v: &Value, path: &str) -> Result<Self> {
        let get = |k: &str| v.get(k).ok_or_else(|| Error::parse(path, format!("chart end needs \"{k}\"")));
        Ok(ChartEnd {
            half_edge: half_edge_from_json(get("half_edge")?, &format!("{path}.half_edge"))?,
            mark: Mark::from_json(get("mark")?, &format!("{path}.mark"))?,
            window: AnnulusWindow::from_json(get("window")?, &format!("{path}.window"))?,
            good: GoodForm::from_json(get("good")?, &format!("{path}.good"))?,
        })
    }
}

/// Builds the end `(c_n t^{n/q} + c_0)^q (dt/t)^q` (or its monomial
/// degenerations) with `c_n = π^{ℓ/q}` and certifies it through the annulus
/// normalizer.
fn make_end(q_: u32, item: &StarItem, level: &Q, c0: &ValuedScalar) -> Result<ChartEnd> {
    let qq = q_ as i64;
    let n = as_i64(&-&item.slope)
        .ok_or_else(|| Error::MalformedDatum(format!("non-integral slope on {}", item.h)))?;
    let c_n = ValuedScalar::pi_pow(level / qi(qq));
    let case = if n == 0 {
        if c0.is_zero() {
            return Err(Error::MalformedDatum(format!("{} has order −q but vanishing residue", item.h)));
        }
        GoodCase::Monomial { n: 0, c_n: c0.clone() }
    } else if c0.is_zero() || n % qq != 0 {
        GoodCase::Monomial { n, c_n: c_n.clone() }
    } else {
        GoodCase::Power { n, c_n: c_n.clone(), c_0: c0.clone() }
    };
    let mut hi = &item.length / qi(2);
    if let GoodCase::Power { c_0, .. } = &case {
        if n > 0 {
            // c_n·t^{n/q} must stay dominant: ℓ + n·v < ν(c_0^q)
            let gap = c_0.valuation().unwrap() * qi(qq) - level;
            let bound = gap / qi(2 * n);
            if bound < hi {
                hi = bound;
            }
        }
    }
    let window = AnnulusWindow::new(&hi / qi(2), hi)?;
    let proto = GoodForm { case, q: q_, w: ScalarSeries::one(), rounds: 0, verified_to: qi(0) };
    let form = AnnulusQForm::new(proto.normal_series()?, q_, window.clone())?;
    let good = good_coordinate(&form)?;
    if good.n() != n {
        return Err(Error::MalformedDatum(format!(
            "end {} normalizes with index {} instead of {n}",
            item.h,
            good.n()
        )));
    }
    Ok(ChartEnd { half_edge: item.h.clone(), mark: item.mark.clone(), window, good })
}

/// The lifted chart around one vertex.
#[derive(Clone, Debug, PartialEq)]
pub struct StarChart {
    pub vertex: String,
    pub q: u32,
    pub form: GradedQForm,
    pub ledger: CoverLedger,
    /// The selected q-th root `ω̃` of the reduced form (`d = 1`, explicit).
    pub root_form: Option<RationalQDifferential>,
    /// Chosen `c_0` per end, in star order.
    pub roots: Vec<ValuedScalar>,
    /// Whether the residues were checked against an explicit reduced form.
    pub verified: bool,
    pub cover: Option<CoverStarDatum>,
    pub ends: Vec<ChartEnd>,
}

impl StarChart {
    pub fn level(&self) -> &Q {
        &self.form.level
    }

    pub fn end(&self, h: &HalfEdge) -> Option<&ChartEnd> {
        self.ends.iter().find(|e| &e.half_edge == h)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "vertex": self.vertex,
            "q": self.q,
            "center": self.form.to_json(),
            "ledger": self.ledger.to_json(),
            "root_form": self.root_form.as_ref().map_or(Value::Null, RationalQDifferential::to_json),
            "roots": self.roots.iter().map(ValuedScalar::to_json).collect::<Vec<_>>(),
            "verified": self.verified,
            "cover": self.cover.as_ref().map_or(Value::Null, CoverStarDatum::to_json),
            "ends": self.ends.iter().map(ChartEnd::to_json).collect::<Vec<_>>(),
        })
    }

    /// Reads a chart back. The cover record is informational and is not
    /// reconstructed.
    pub fn from_json(v: &Value, path: &str) -> Result<Self> {
        let get = |k: &str| v.get(k).ok_or_else(|| Error::parse(path, format!("chart needs \"{k}\"")));
        let vertex = get("vertex")?
            .as_str()
            .ok_or_else(|| Error::parse(format!("{path}.vertex"), "expected a string"))?
            .to_string();
        let q_ = get("q")?
            .as_u64()
            .and_then(|x| u32::try_from(x).ok())
            .ok_or_else(|| Error::parse(format!("{path}.q"), "expected a positive integer"))?;
        let form = GradedQForm::from_json(get("center")?, &format!("{path}.center"))?;
        let ends = get("ends")?
            .as_array()
            .ok_or_else(|| Error::parse(format!("{path}.ends"), "expected an array"))?
            .iter()
            .enumerate()
            .map(|(i, e)| ChartEnd::from_json(e, &format!("{path}.ends[{i}]")))
            .collect::<Result<Vec<_>>>()?;
        let m: Vec<i64> = match &form.form {
            VertexForm::Explicit(f) => {
                ends.iter().map(|e| Ok(f.order_at(point_of(&e.mark)?))).collect::<Result<_>>()?
            }
            VertexForm::Abstract(_) => ends.iter().map(|e| form.order_at(&e.mark)).collect::<Result<_>>()?,
        };
        let root_form = match v.get("root_form") {
            Some(Value::Null) | None => None,
            Some(r) => Some(RationalQDifferential::from_json(r, &format!("{path}.root_form"))?),
        };
        let roots = match v.get("roots").and_then(Value::as_array) {
            Some(rs) => rs
                .iter()
                .enumerate()
                .map(|(i, r)| ValuedScalar::from_json(r, &format!("{path}.roots[{i}]")))
                .collect::<Result<_>>()?,
            None => vec![],
        };
        Ok(StarChart {
            vertex,
            q: q_,
            form,
            ledger: cover_ledger(q_, &m)?,
            root_form,
            roots,
            verified: v.get("verified").and_then(Value::as_bool).unwrap_or(false),
            cover: None,
            ends,
        })
    }
}

fn check_star_valid(g: &ReductionDatum, x: &str) -> Result<()> {
    let star: Vec<String> = g.curve.star(x).iter().map(|h| h.id().to_string()).collect();
    let rep = validate(g, Mode::Strict)?;
    let bad: Vec<String> = rep
        .violations
        .iter()
        .filter(|v| v.vertex == x || star.contains(&v.item))
        .map(|v| format!("{} on {} at {}", v.condition, v.item, v.vertex))
        .collect();
    if bad.is_empty() {
        Ok(())
    } else {
        Err(Error::Precondition(format!("star of {x} is not compatible: {}", bad.join("; "))))
    }
}

/// The cover star above an interior vertex with `d > 1`.
pub fn build_cover_star(g: &ReductionDatum, x: &str) -> Result<CoverStarDatum> {
    if g.curve.vertex(x).is_none() {
        return Err(Error::MalformedDatum(format!("unknown vertex {x}")));
    }
    if g.is_boundary(x) {
        return Err(Error::Precondition(format!("{x} is a boundary vertex")));
    }
    let items = star_items(g, x)?;
    let ledger = cover_ledger(g.q, &items.iter().map(|i| i.ord).collect::<Vec<_>>())?;
    if ledger.d == 1 {
        return Err(Error::Precondition(format!("{x} has d = 1; no cover is needed")));
    }
    let xi = g.form(x).explicit_form().ok_or_else(|| {
        Error::ExplicitFormRequired(format!("the cover above {x} needs an explicit genus-0 form"))
    })?;
    let level = &g.form(x).level;
    let n = g.conductor;
    let d = ledger.d;
    let eta = nth_root_rational(xi, ledger.l, n)?.swap_remove(0);
    let phase_field = lcm_u32(n, d);
    let mut a_tilde = Vec::new();
    let mut leaves = Vec::new();
    for (i, it) in items.iter().enumerate() {
        let length = g.curve.length(&it.h).map(|l| l / qi(d as i64));
        if !ledger.is_full(i) {
            a_tilde.push(None);
            for j in 0..ledger.fibers[i] {
                leaves.push(CoverLeaf {
                    over: it.h.clone(),
                    sheet: j,
                    length: length.clone(),
                    residue: ValuedScalar::zero(),
                });
            }
            continue;
        }
        let p = point_of(&it.mark)?;
        let ord = eta.order_at(p) + eta.q() as i64;
        let hi = DEFAULT_WINDOW.max(ord.abs() + 1);
        let local = eta.local_expansion(p, hi)?.map_coeffs(|c| c.lift_to(lcm_u32(c.conductor(), n)));
        let a = local.nth_root(d, 0)?.coeff(0);
        let b = if it.residue.is_zero() {
            ValuedScalar::zero()
        } else {
            let lam = level / qi(g.q as i64);
            it.residue
                .lift_to(n)
                .nth_roots(g.q)?
                .into_iter()
                .find(|b| b.reduce_at(&lam).is_ok_and(|r| same(&r, &a)))
                .ok_or_else(|| {
                    Error::RootNotRepresentable(format!(
                        "no q-th root of R({}) reduces to {a} over Q(ζ_{n})",
                        it.h
                    ))
                })?
        };
        a_tilde.push(Some(a));
        for j in 0..d {
            let z = CycloRational::unity(phase_field, d, j as i64).expect("d divides the phase field");
            leaves.push(CoverLeaf {
                over: it.h.clone(),
                sheet: j,
                length: length.clone(),
                residue: b.scale(&z),
            });
        }
    }
    let mut curve = format!("w^{d} =");
    let mut first = true;
    for (a, m) in eta.factors() {
        let e = m;
        if *e == 0 {
            continue;
        }
        let _ = write!(curve, "{}(z - {a})^{e}", if first { " " } else { "·" });
        first = false;
    }
    if first {
        curve.push_str(" 1");
    }
    Ok(CoverStarDatum {
        vertex: x.to_string(),
        level: level / qi(g.q as i64),
        ledger,
        curve,
        a_tilde,
        leaves,
    })
}

/// Residues of each candidate root form at the star marks.
fn candidate_table(
    xi: &RationalQDifferential,
    items: &[StarItem],
    q_: u32,
    n: u32,
) -> Result<Vec<(RationalQDifferential, Vec<CycloRational>)>> {
    nth_root_rational(xi, q_, n)?
        .into_iter()
        .map(|w| {
            let res = items
                .iter()
                .map(|it| w.classical_residue(point_of(&it.mark)?))
                .collect::<Result<Vec<_>>>()?;
            Ok((w, res))
        })
        .collect()
}

fn describe_table(
    table: &[(RationalQDifferential, Vec<CycloRational>)],
    tried: &[Vec<CycloRational>],
) -> String {
    let fmt_row = |r: &[CycloRational]| r.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(", ");
    let mut s = String::from("candidate residues:");
    for (w, r) in table {
        let _ = write!(s, " [{w}: {}]", fmt_row(r));
    }
    s.push_str("; reduced root tuples:");
    for t in tried.iter().take(16) {
        let _ = write!(s, " ({})", fmt_row(t));
    }
    if tried.is_empty() {
        s.push_str(" none");
    }
    s
}

/// Picks root tuples; `zero_sum` restricts to tuples summing to zero. Returns
/// the tuple and, for explicit forms, the matching root form.
fn select_roots(
    g: &ReductionDatum,
    x: &str,
    items: &[StarItem],
    zero_sum: bool,
) -> Result<(Vec<ValuedScalar>, Option<RationalQDifferential>)> {
    let n = g.conductor;
    let values: Vec<ValuedScalar> = items.iter().map(|i| i.residue.lift_to(n)).collect();
    let rs = RootSystem::new(&values, g.q, n)?;
    let lam = &g.form(x).level / qi(g.q as i64);
    let tuples: Box<dyn Iterator<Item = Vec<usize>>> =
        if zero_sum { Box::new(rs.zero_sum_tuples()) } else { Box::new(rs.phase_tuples()) };
    match g.form(x).explicit_form() {
        None => {
            let p = tuples.into_iter().next().ok_or_else(|| Error::NoRealizableRoots {
                vertex: x.to_string(),
                table: "no zero-sum root tuple".to_string(),
            })?;
            Ok((rs.tuple(&p), None))
        }
        Some(xi) => {
            let table = candidate_table(xi, items, g.q, n)?;
            let mut tried = Vec::new();
            for p in tuples {
                let t = rs.tuple(&p);
                let red = t.iter().map(|r| r.reduce_at(&lam)).collect::<Result<Vec<_>>>()?;
                if let Some((w, _)) =
                    table.iter().find(|(_, res)| res.iter().zip(&red).all(|(a, b)| same(a, b)))
                {
                    return Ok((t, Some(w.clone())));
                }
                tried.push(red);
            }
            Err(Error::NoRealizableRoots { vertex: x.to_string(), table: describe_table(&table, &tried) })
        }
    }
}

/// Lifts the star of an interior vertex to a chart with good-form ends.
pub fn lift_star(g: &ReductionDatum, x: &str) -> Result<StarChart> {
    g.check_structure()?;
    if g.curve.vertex(x).is_none() {
        return Err(Error::MalformedDatum(format!("unknown vertex {x}")));
    }
    if g.is_boundary(x) {
        return Err(Error::Precondition(format!("{x} is a boundary vertex; complete it first")));
    }
    check_star_valid(g, x)?;
    let items = star_items(g, x)?;
    let ledger = cover_ledger(g.q, &items.iter().map(|i| i.ord).collect::<Vec<_>>())?;
    let form = g.form(x).clone();
    let explicit = form.explicit_form().is_some();
    let (roots, root_form, cover) = if ledger.d == 1 {
        let (r, w) = select_roots(g, x, &items, true)?;
        (r, w, None)
    } else if explicit {
        let cover = build_cover_star(g, x)?;
        let roots = items
            .iter()
            .map(|it| {
                cover
                    .leaves
                    .iter()
                    .find(|l| l.over == it.h && l.sheet == 0)
                    .map(|l| l.residue.clone())
                    .unwrap_or_else(ValuedScalar::zero)
            })
            .collect();
        (roots, None, Some(cover))
    } else {
        let roots = items
            .iter()
            .enumerate()
            .map(|(i, it)| {
                if ledger.is_full(i) && !it.residue.is_zero() {
                    it.residue.lift_to(g.conductor).nth_root(g.q)
                } else {
                    Ok(ValuedScalar::zero())
                }
            })
            .collect::<Result<Vec<_>>>()?;
        (roots, None, None)
    };
    let ends = items
        .iter()
        .zip(&roots)
        .map(|(it, r)| make_end(g.q, it, &form.level, r))
        .collect::<Result<Vec<_>>>()?;
    Ok(StarChart {
        vertex: x.to_string(),
        q: g.q,
        verified: explicit,
        form,
        ledger,
        root_form,
        roots,
        cover,
        ends,
    })
}

/// Turns a boundary vertex into an interior one by adding a leg at each
/// compactification point. Returns the new datum and the new leg ids.
pub fn complete_boundary(g: &ReductionDatum, x: &str) -> Result<(ReductionDatum, Vec<String>)> {
    g.check_structure()?;
    if !g.is_boundary(x) {
        return Err(Error::Precondition(format!("{x} is not a boundary vertex")));
    }
    let items = star_items(g, x)?;
    let extra = g.compactification.get(x).cloned().unwrap_or_default();
    let form = g.form(x);
    let mut m: Vec<i64> = items.iter().map(|i| i.ord).collect();
    for mk in &extra {
        m.push(form.order_at(mk)?);
    }
    let ledger = cover_ledger(g.q, &m)?;
    let mut new_r = vec![ValuedScalar::zero(); extra.len()];
    if ledger.d == 1 && !extra.is_empty() {
        let (roots, _) = select_roots(g, x, &items, false)?;
        let sum = roots.iter().fold(ValuedScalar::zero(), |a, b| a.add(b));
        new_r[0] = sum.neg().pow(g.q as i64)?;
    }
    let mut out = g.clone();
    let mut ids = Vec::new();
    for (k, (mk, r)) in extra.into_iter().zip(new_r).enumerate() {
        let mut id = format!("{x}.c{k}");
        while out.curve.leg(&id).is_some() || out.curve.edge(&id).is_some() {
            id.push('\'');
        }
        out.curve.legs.push(Leg { id: id.clone(), vertex: x.to_string() });
        out.marks.insert(HalfEdge::leg(&id), mk);
        out.residues.insert(HalfEdge::leg(&id), r);
        ids.push(id);
    }
    out.compactification.remove(x);
    for v in &mut out.curve.vertices {
        if v.id == x {
            v.boundary = false;
        }
    }
    check_star_valid(&out, x)?;
    Ok((out, ids))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::rational::q;

    #[test]
    fn ledger_examples() {
        let l = cover_ledger(2, &[0, -2, -2]).unwrap();
        assert_eq!((l.l, l.d), (2, 1));
        let l = cover_ledger(2, &[3, -1, -6]).unwrap();
        assert_eq!((l.l, l.d, l.fibers.clone()), (1, 2, vec![1, 1, 2]));
        let l = cover_ledger(4, &[-4, 2, -6]).unwrap();
        assert_eq!((l.l, l.d, l.fibers.clone()), (2, 2, vec![2, 1, 1]));
        assert_eq!(cover_ledger(3, &[1, 1, -8]).unwrap().d, 3);
    }

    #[test]
    fn d1_star_selects_realizable_roots() {
        let c = lift_star(&fixtures::f1(), "x").unwrap();
        assert_eq!(c.ledger.d, 1);
        let got: Vec<_> = c.roots.to_vec();
        assert_eq!(got, vec![ValuedScalar::zero(), ValuedScalar::from_int(1), ValuedScalar::from_int(-1)]);
        assert!(c.verified);
        assert_eq!(c.ends.len(), 3);
    }

    #[test]
    fn cover_star_residues_cancel() {
        for (name, g) in [("F2", fixtures::f2()), ("F9", fixtures::f9()), ("F11", fixtures::f11())] {
            let c = build_cover_star(&g, "x").unwrap();
            assert!(c.ledger.d > 1, "{name}");
            assert!(c.residue_sum().is_zero(), "{name}");
        }
        let c = build_cover_star(&fixtures::f11(), "x").unwrap();
        assert_eq!(c.a_tilde[0], Some(CycloRational::zeta(4, 1)));
        let c = build_cover_star(&fixtures::f2(), "x").unwrap();
        assert_eq!(c.a_tilde[2], Some(CycloRational::from_rational(q(3, 8))));
    }

    #[test]
    fn cover_star_rejects_d1() {
        assert!(matches!(build_cover_star(&fixtures::f1(), "x"), Err(Error::Precondition(_))));
    }

    #[test]
    fn boundary_completion_validates() {
        let (g, ids) = complete_boundary(&fixtures::f3(), "x").unwrap();
        assert_eq!(ids.len(), 1);
        assert_eq!(g.residue(&HalfEdge::leg(&ids[0])), &ValuedScalar::from_int(1));
        let (g, ids) = complete_boundary(&fixtures::f4(), "x").unwrap();
        assert!(g.residue(&HalfEdge::leg(&ids[0])).is_zero());
    }

    #[test]
    fn incompatible_star_is_refused() {
        let (_, g) = fixtures::defects().remove(1);
        assert!(matches!(lift_star(&g, "x"), Err(Error::Precondition(_))));
    }
}
