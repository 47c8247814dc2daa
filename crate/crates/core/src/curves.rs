//! Rational q-differentials on the projective line over the residue field,
//! and abstract records for reduction curves of higher genus.

use std::fmt;

use serde_json::{json, Value};

use crate::cyclo::CycloRational;
use crate::error::{Error, Result};
use crate::rational::{q_from_json, q_to_json, Q};
use crate::series::{ResidueSeries, DEFAULT_WINDOW};

/// A closed point of `P^1`.
#[derive(Clone, Debug, PartialEq)]
pub enum ProjPoint {
    Finite(CycloRational),
    Infinity,
}

impl ProjPoint {
    pub fn at(c: CycloRational) -> Self {
        ProjPoint::Finite(c)
    }

    pub fn int(n: i64) -> Self {
        ProjPoint::Finite(CycloRational::from_int(n))
    }

    pub fn to_json(&self) -> Value {
        match self {
            ProjPoint::Finite(c) => c.to_json(),
            ProjPoint::Infinity => json!("inf"),
        }
    }

    pub fn from_json(v: &Value, path: &str) -> Result<Self> {
        if v.as_str() == Some("inf") {
            return Ok(ProjPoint::Infinity);
        }
        Ok(ProjPoint::Finite(CycloRational::from_json(v, path)?))
    }
}

impl fmt::Display for ProjPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProjPoint::Finite(c) => write!(f, "{c}"),
            ProjPoint::Infinity => write!(f, "inf"),
        }
    }
}

/// `η = c·∏(z − a_i)^{m_i}·(dz)^q` on `P^1`.
#[derive(Clone, Debug, PartialEq)]
pub struct RationalQDifferential {
    q: u32,
    scale: CycloRational,
    factors: Vec<(CycloRational, i64)>,
}

impl RationalQDifferential {
    /// Builds the form; an explicit `∞` entry must carry `−2q − Σ m_i`.
    pub fn new(q: u32, scale: CycloRational, factors: Vec<(ProjPoint, i64)>) -> Result<Self> {
        if q == 0 {
            return Err(Error::MalformedForm("q must be positive".to_string()));
        }
        if scale.is_zero() {
            return Err(Error::MalformedForm("scale must be nonzero".to_string()));
        }
        let mut finite: Vec<(CycloRational, i64)> = Vec::new();
        let mut at_inf = None;
        for (p, m) in factors {
            match p {
                ProjPoint::Infinity => {
                    if at_inf.replace(m).is_some() {
                        return Err(Error::MalformedForm("∞ listed twice".to_string()));
                    }
                }
                ProjPoint::Finite(a) => match finite.iter_mut().find(|(b, _)| *b == a) {
                    Some(slot) => slot.1 += m,
                    None => finite.push((a, m)),
                },
            }
        }
        finite.retain(|(_, m)| *m != 0);
        let form = RationalQDifferential { q, scale, factors: finite };
        if let Some(m) = at_inf {
            let expected = form.order_at_infinity();
            if m != expected {
                return Err(Error::MalformedForm(format!(
                    "order at ∞ is {expected} (total degree must be {}), not {m}",
                    -2 * q as i64
                )));
            }
        }
        Ok(form)
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn scale(&self) -> &CycloRational {
        &self.scale
    }

    pub fn factors(&self) -> &[(CycloRational, i64)] {
        &self.factors
    }

    fn order_at_infinity(&self) -> i64 {
        -2 * self.q as i64 - self.factors.iter().map(|(_, m)| m).sum::<i64>()
    }

    pub fn order_at(&self, p: &ProjPoint) -> i64 {
        match p {
            ProjPoint::Infinity => self.order_at_infinity(),
            ProjPoint::Finite(a) => self.factors.iter().find(|(b, _)| b == a).map(|(_, m)| *m).unwrap_or(0),
        }
    }

    /// Orders at every finite factor and at `∞`; the degree is checked to be `−2q`.
    pub fn divisor_and_orders(&self) -> Result<Vec<(ProjPoint, i64)>> {
        let mut out: Vec<(ProjPoint, i64)> =
            self.factors.iter().map(|(a, m)| (ProjPoint::Finite(a.clone()), *m)).collect();
        out.push((ProjPoint::Infinity, self.order_at_infinity()));
        let deg: i64 = out.iter().map(|(_, m)| m).sum();
        if deg != -2 * self.q as i64 {
            return Err(Error::MalformedForm(format!("divisor degree {deg} ≠ {}", -2 * self.q as i64)));
        }
        Ok(out)
    }

    /// `g` with `η = g(w)(dw/w)^q` for `w = z − p` (or `w = 1/z` at `∞`),
    /// expanded through exponent `hi` when the expansion does not terminate.
    pub fn local_expansion(&self, p: &ProjPoint, hi: i64) -> Result<ResidueSeries> {
        let q = self.q as i64;
        let mut g = ResidueSeries::monomial(self.scale.clone(), 0);
        match p {
            ProjPoint::Finite(a) => {
                // unit factors are needed up to `hi` minus the leading exponent
                let lead = q + self.order_at(p);
                g = g.shift(lead);
                for (b, m) in self.factors.iter().filter(|(b, _)| b != a) {
                    // (w + a − b)^m = (a − b)^m (1 + w/(a − b))^m
                    let d = a.sub(b);
                    let lin = ResidueSeries::exact([(0, CycloRational::one()), (1, d.inv()?)]);
                    g = g.mul(&lin.pow(*m, hi - lead)?).scale(&d.pow(*m)?);
                }
            }
            ProjPoint::Infinity => {
                let sum: i64 = self.factors.iter().map(|(_, m)| m).sum();
                let lead = -q - sum;
                g = g.shift(lead);
                if self.q % 2 == 1 {
                    g = g.neg();
                }
                for (b, m) in &self.factors {
                    let lin = ResidueSeries::exact([(0, CycloRational::one()), (1, b.neg())]);
                    g = g.mul(&lin.pow(*m, hi - lead)?);
                }
            }
        }
        Ok(match g.known_to() {
            Some(h) if h > hi => g.truncate(hi),
            _ => g,
        })
    }

    /// The point q-residue at `p`.
    pub fn q_residue_at(&self, p: &ProjPoint) -> Result<CycloRational> {
        let ord = self.order_at(p) + self.q as i64;
        let hi = DEFAULT_WINDOW.max(ord.abs() + 1);
        q_residue_at_point(&self.local_expansion(p, hi)?, self.q)
    }

    /// Classical residue of a 1-form.
    pub fn classical_residue(&self, p: &ProjPoint) -> Result<CycloRational> {
        if self.q != 1 {
            return Err(Error::Precondition("classical residues need q = 1".to_string()));
        }
        Ok(self.local_expansion(p, 0)?.coeff(0))
    }

    /// Points where the form has a pole (finite ones first, then `∞`).
    pub fn poles(&self) -> Vec<ProjPoint> {
        let mut out: Vec<ProjPoint> =
            self.factors.iter().filter(|(_, m)| *m < 0).map(|(a, _)| ProjPoint::Finite(a.clone())).collect();
        if self.order_at_infinity() < 0 {
            out.push(ProjPoint::Infinity);
        }
        out
    }

    /// `η^k`, a `kq`-differential.
    pub fn pow(&self, k: u32) -> Result<Self> {
        Ok(RationalQDifferential {
            q: self.q * k,
            scale: self.scale.pow(k as i64)?,
            factors: self.factors.iter().map(|(a, m)| (a.clone(), m * k as i64)).collect(),
        })
    }

    pub fn to_json(&self) -> Value {
        json!({
            "q": self.q,
            "scale": self.scale.to_json(),
            "factors": self.factors.iter().map(|(a, m)| json!([a.to_json(), m])).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &Value, path: &str) -> Result<Self> {
        let q = v
            .get("q")
            .and_then(Value::as_u64)
            .filter(|&x| x > 0 && x <= u32::MAX as u64)
            .ok_or_else(|| Error::parse(path, "form needs a positive integer \"q\""))? as u32;
        let scale = match v.get("scale") {
            Some(s) => CycloRational::from_json(s, &format!("{path}.scale"))?,
            None => CycloRational::one(),
        };
        let fs = v
            .get("factors")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::parse(path, "form needs a \"factors\" list"))?;
        let mut factors = Vec::new();
        for (i, f) in fs.iter().enumerate() {
            let fp = format!("{path}.factors[{i}]");
            let a = f
                .as_array()
                .filter(|a| a.len() == 2)
                .ok_or_else(|| Error::parse(&fp, "expected [point, multiplicity]"))?;
            let m = a[1].as_i64().ok_or_else(|| Error::parse(&fp, "multiplicity must be an integer"))?;
            factors.push((ProjPoint::from_json(&a[0], &fp)?, m));
        }
        RationalQDifferential::new(q, scale, factors).map_err(|e| Error::parse(path, e.to_string()))
    }
}

impl fmt::Display for RationalQDifferential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.scale)?;
        for (a, m) in &self.factors {
            if a.is_zero() {
                write!(f, "*z^{m}")?;
            } else {
                write!(f, "*(z - {a})^{m}")?;
            }
        }
        write!(f, "*(dz)^{}", self.q)
    }
}

/// The point q-residue of `η = g(w)(dw/w)^q`: zero unless the order `n` of `g`
/// satisfies `n ≤ 0` and `q | n`; otherwise `(w^0-coefficient of g^{1/q})^q`.
///
/// Writing `g = a·w^n(1 + h)`, the root is `a^{1/q}·w^{n/q}(1 + h)^{1/q}`, so the
/// answer is `a·c^q` with `c` the `w^{−n/q}` coefficient of `(1 + h)^{1/q}`;
/// no root of `a` is needed.
pub fn q_residue_at_point(g: &ResidueSeries, q: u32) -> Result<CycloRational> {
    let n = g.order().ok_or_else(|| Error::PrecisionExhausted("series vanishes to precision".to_string()))?;
    let qq = q as i64;
    if n > 0 || n % qq != 0 {
        return Ok(CycloRational::zero());
    }
    let a = g.coeff(n);
    let unit = g.shift(-n).scale(&a.inv()?);
    let need = -n / qq;
    if unit.known_to().is_some_and(|h| h < need) {
        return Err(Error::PrecisionExhausted(format!(
            "need the expansion through exponent {}, have {}",
            n + need,
            n + unit.known_to().unwrap()
        )));
    }
    let h = unit.sub(&ResidueSeries::one());
    let root = ResidueSeries::unit_power(&h, &crate::rational::q(1, qq), need)?;
    Ok(a.mul(&root.coeff(need).pow(qq)?))
}

/// All `θ` with `θ^n = η` available over `Q(ζ_N)`, `N = conductor`.
pub fn nth_root_rational(
    eta: &RationalQDifferential,
    n: u32,
    conductor: u32,
) -> Result<Vec<RationalQDifferential>> {
    if n == 0 || !eta.q.is_multiple_of(n) {
        return Err(Error::NotAnNthPower(format!("{n} does not divide q = {}", eta.q)));
    }
    if let Some((a, m)) = eta.factors.iter().find(|(_, m)| m % n as i64 != 0) {
        return Err(Error::NotAnNthPower(format!("multiplicity {m} at {a} is not divisible by {n}")));
    }
    let c = eta.scale.lift_to(crate::rational::lcm_u32(conductor, eta.scale.conductor()));
    let roots = c.nth_roots(n)?;
    Ok(roots
        .into_iter()
        .map(|r| RationalQDifferential {
            q: eta.q / n,
            scale: r,
            factors: eta.factors.iter().map(|(a, m)| (a.clone(), m / n as i64)).collect(),
        })
        .collect())
}

/// Genus, marked orders and residues for a reduction curve kept abstract.
#[derive(Clone, Debug, PartialEq)]
pub struct AbstractVertexData {
    pub genus: u32,
    pub marks: Vec<AbstractMark>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AbstractMark {
    pub label: String,
    pub order: i64,
    pub residue: Option<CycloRational>,
}

impl AbstractVertexData {
    pub fn mark(&self, label: &str) -> Option<&AbstractMark> {
        self.marks.iter().find(|m| m.label == label)
    }

    pub fn degree(&self) -> i64 {
        self.marks.iter().map(|m| m.order).sum()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "genus": self.genus,
            "marks": self.marks.iter().map(|m| {
                let mut v = json!({"label": m.label, "order": m.order});
                if let Some(r) = &m.residue {
                    v["residue"] = r.to_json();
                }
                v
            }).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &Value, path: &str) -> Result<Self> {
        let genus = v
            .get("genus")
            .and_then(Value::as_u64)
            .ok_or_else(|| Error::parse(path, "abstract vertex needs \"genus\""))? as u32;
        let ms = v
            .get("marks")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::parse(path, "abstract vertex needs \"marks\""))?;
        let mut marks = Vec::new();
        for (i, m) in ms.iter().enumerate() {
            let mp = format!("{path}.marks[{i}]");
            let label = m
                .get("label")
                .and_then(Value::as_str)
                .ok_or_else(|| Error::parse(&mp, "mark needs a string \"label\""))?
                .to_string();
            let order = m
                .get("order")
                .and_then(Value::as_i64)
                .ok_or_else(|| Error::parse(&mp, "mark needs an integer \"order\""))?;
            let residue = match m.get("residue") {
                None | Some(Value::Null) => None,
                Some(r) => Some(CycloRational::from_json(r, &format!("{mp}.residue"))?),
            };
            marks.push(AbstractMark { label, order, residue });
        }
        Ok(AbstractVertexData { genus, marks })
    }
}

/// A mark on a vertex curve: a point of `P^1` or a label of an abstract record.
#[derive(Clone, Debug, PartialEq)]
pub enum Mark {
    Point(ProjPoint),
    Label(String),
}

impl Mark {
    pub fn to_json(&self) -> Value {
        match self {
            Mark::Point(p) => json!({"at": p.to_json()}),
            Mark::Label(l) => json!({"label": l}),
        }
    }

    pub fn from_json(v: &Value, path: &str) -> Result<Self> {
        if let Some(p) = v.get("at") {
            return Ok(Mark::Point(ProjPoint::from_json(p, &format!("{path}.at"))?));
        }
        if let Some(l) = v.get("label").and_then(Value::as_str) {
            return Ok(Mark::Label(l.to_string()));
        }
        Err(Error::parse(path, "mark must be {\"at\": point} or {\"label\": name}"))
    }
}

impl fmt::Display for Mark {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mark::Point(p) => write!(f, "{p}"),
            Mark::Label(l) => write!(f, "{l}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum VertexForm {
    Explicit(RationalQDifferential),
    Abstract(AbstractVertexData),
}

/// A reduced q-form together with its level.
#[derive(Clone, Debug, PartialEq)]
pub struct GradedQForm {
    pub form: VertexForm,
    pub level: Q,
}

impl GradedQForm {
    pub fn explicit(form: RationalQDifferential, level: Q) -> Self {
        GradedQForm { form: VertexForm::Explicit(form), level }
    }

    pub fn genus(&self) -> u32 {
        match &self.form {
            VertexForm::Explicit(_) => 0,
            VertexForm::Abstract(a) => a.genus,
        }
    }

    pub fn explicit_form(&self) -> Option<&RationalQDifferential> {
        match &self.form {
            VertexForm::Explicit(f) => Some(f),
            VertexForm::Abstract(_) => None,
        }
    }

    pub fn order_at(&self, mark: &Mark) -> Result<i64> {
        match (&self.form, mark) {
            (VertexForm::Explicit(f), Mark::Point(p)) => Ok(f.order_at(p)),
            (VertexForm::Abstract(a), Mark::Label(l)) => a
                .mark(l)
                .map(|m| m.order)
                .ok_or_else(|| Error::MalformedDatum(format!("no mark labelled {l}"))),
            _ => Err(Error::MalformedDatum(format!("mark {mark} does not match the vertex form kind"))),
        }
    }

    /// The point q-residue at a mark. Abstract records must carry it whenever
    /// it can be nonzero.
    pub fn residue_at(&self, mark: &Mark, q: u32) -> Result<CycloRational> {
        match (&self.form, mark) {
            (VertexForm::Explicit(f), Mark::Point(p)) => f.q_residue_at(p),
            (VertexForm::Abstract(a), Mark::Label(l)) => {
                let m = a.mark(l).ok_or_else(|| Error::MalformedDatum(format!("no mark labelled {l}")))?;
                let n = m.order + q as i64;
                if n > 0 || n % q as i64 != 0 {
                    return Ok(CycloRational::zero());
                }
                m.residue.clone().ok_or_else(|| {
                    Error::ExplicitFormRequired(format!("residue at abstract mark {l} is not recorded"))
                })
            }
            _ => Err(Error::MalformedDatum(format!("mark {mark} does not match the vertex form kind"))),
        }
    }

    pub fn to_json(&self) -> Value {
        let mut v = match &self.form {
            VertexForm::Explicit(f) => json!({"form": f.to_json()}),
            VertexForm::Abstract(a) => json!({"abstract": a.to_json()}),
        };
        v["level"] = q_to_json(&self.level);
        v
    }

    pub fn from_json(v: &Value, path: &str) -> Result<Self> {
        let level = q_from_json(v.get("level").unwrap_or(&json!(0)), &format!("{path}.level"))?;
        let form = if let Some(f) = v.get("form") {
            VertexForm::Explicit(RationalQDifferential::from_json(f, &format!("{path}.form"))?)
        } else if let Some(a) = v.get("abstract") {
            VertexForm::Abstract(AbstractVertexData::from_json(a, &format!("{path}.abstract"))?)
        } else {
            return Err(Error::parse(path, "vertex needs \"form\" or \"abstract\""));
        };
        Ok(GradedQForm { form, level })
    }
}
