//! Batch front end. Every verb reads one JSON document and writes one.
//!
//! Exit status: 0 on success, 1 on a negative verdict or a domain error,
//! 2 when the input cannot be read or does not match the schema.

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use crate::annulus::{good_coordinate, q_residue_annulus, verify_substitution, AnnulusQForm, GoodCase};
use crate::curves::{ProjPoint, RationalQDifferential};
use crate::datum::ReductionDatum;
use crate::error::Error;
use crate::fixtures;
use crate::lifting::lift_star;
use crate::model::{lift, reduce_model, FormalModel};
use crate::psd::{psd_value, psd_zero_test};
use crate::rational::{q_to_json, Q};
use crate::scalar::ValuedScalar;
use crate::validate::{validate, Mode};

#[derive(Parser, Debug)]
#[command(name = "qtrop", version, about = "Reduction data of q-differentials over non-Archimedean fields")]
pub struct Command {
    #[command(subcommand)]
    pub verb: Verb,
    /// Override the relative π-adic precision recorded in the input.
    #[arg(long, global = true, value_parser = parse_q)]
    pub precision: Option<Q>,
    /// Override the cyclotomic conductor N.
    #[arg(long, global = true)]
    pub conductor: Option<u32>,
}

#[derive(Subcommand, Debug)]
pub enum Verb {
    /// Check the compatibility conditions of a datum.
    Validate {
        input: PathBuf,
        /// Report antisymmetry failures as warnings.
        #[arg(long)]
        permissive: bool,
    },
    /// Evaluate `P_{s,d}` on `{"d": d, "values": [...]}`.
    Psd { input: PathBuf },
    /// Normalize an annulus q-form to a good coordinate.
    Goodcoord {
        input: PathBuf,
        /// Truncate the coordinate change after this exponent.
        #[arg(long)]
        order: Option<i64>,
    },
    /// q-residue of an annulus form, or of a rational form at `"at"`.
    Residue { input: PathBuf },
    /// Lift the star of one vertex.
    LiftStar {
        input: PathBuf,
        #[arg(long)]
        vertex: String,
    },
    /// Lift a whole datum to a glued formal model.
    Lift { input: PathBuf },
    /// Read the datum back off a model, optionally diffing against a datum.
    Reduce {
        input: PathBuf,
        #[arg(long)]
        against: Option<PathBuf>,
    },
    /// Print a built-in datum, or list the available names.
    Fixture { name: Option<String> },
}

fn parse_q(s: &str) -> Result<Q, String> {
    s.parse::<Q>().map_err(|e| format!("not a rational: {e}"))
}

/// Exit status together with the report to print.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub status: i32,
    pub report: Value,
}

impl Outcome {
    fn ok(report: Value) -> Self {
        Outcome { status: 0, report }
    }

    fn verdict(positive: bool, report: Value) -> Self {
        Outcome { status: if positive { 0 } else { 1 }, report }
    }

    /// The report as pretty JSON with a trailing newline.
    pub fn render(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.report).expect("JSON values serialize");
        s.push('\n');
        s
    }
}

fn error_outcome(e: &Error) -> Outcome {
    let kind = format!("{e:?}");
    let kind = kind.split(['(', ' ', '{']).next().unwrap_or("Error").to_string();
    let status = if matches!(e, Error::Parse { .. }) { 2 } else { 1 };
    Outcome { status, report: json!({"error": kind, "message": e.to_string()}) }
}

fn read_json(path: &PathBuf) -> Result<Value, Error> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::parse(path.display().to_string(), format!("cannot read: {e}")))?;
    serde_json::from_str(&text)
        .map_err(|e| Error::parse(format!("{}:{}:{}", path.display(), e.line(), e.column()), e.to_string()))
}

fn read_datum(cmd: &Command, path: &PathBuf) -> Result<ReductionDatum, Error> {
    let mut d = ReductionDatum::from_json(&read_json(path)?)?;
    if let Some(p) = &cmd.precision {
        d.precision = p.clone();
    }
    if let Some(n) = cmd.conductor {
        d.conductor = n;
    }
    Ok(d)
}

fn dispatch(cmd: &Command) -> Result<Outcome, Error> {
    match &cmd.verb {
        Verb::Validate { input, permissive } => {
            let d = read_datum(cmd, input)?;
            let mode = if *permissive { Mode::Permissive } else { Mode::Strict };
            let rep = validate(&d, mode)?;
            Ok(Outcome::verdict(rep.is_empty(), rep.to_json()))
        }
        Verb::Psd { input } => {
            let v = read_json(input)?;
            let d = v
                .get("d")
                .and_then(Value::as_u64)
                .and_then(|d| u32::try_from(d).ok())
                .ok_or_else(|| Error::parse("d", "expected a positive integer"))?;
            let values = v
                .get("values")
                .and_then(Value::as_array)
                .ok_or_else(|| Error::parse("values", "expected an array of scalars"))?
                .iter()
                .enumerate()
                .map(|(i, x)| ValuedScalar::from_json(x, &format!("values[{i}]")))
                .collect::<Result<Vec<_>, _>>()?;
            let n = cmd
                .conductor
                .or_else(|| v.get("conductor").and_then(Value::as_u64).map(|n| n as u32))
                .unwrap_or(1);
            let value = psd_value(&values, d, n)?;
            let zero = psd_zero_test(&values, d, n)?;
            let prec = value.precision().cloned();
            Ok(Outcome::verdict(
                zero,
                json!({
                    "d": d,
                    "conductor": n,
                    "value": value.to_json(),
                    "zero": zero,
                    "precision": prec.as_ref().map_or(json!("exact"), q_to_json),
                }),
            ))
        }
        Verb::Goodcoord { input, order } => {
            let mut form = AnnulusQForm::from_json(&read_json(input)?, "form")?;
            if let Some(p) = &cmd.precision {
                form = form.with_precision(p.clone());
            }
            let gf = good_coordinate(&form)?;
            let verified = verify_substitution(&form, &gf)?;
            let summary = match &gf.case {
                GoodCase::Power { n, .. } => format!("PowerCase(n={n})"),
                GoodCase::Monomial { n, .. } => format!("MonomialCase(n={n})"),
            };
            let w = match order {
                Some(k) => gf.w.truncate(*k),
                None => gf.w.clone(),
            };
            let mut good = gf.to_json();
            good["w"] = w.to_json();
            Ok(Outcome::ok(json!({
                "summary": summary,
                "good": good,
                "precision": q_to_json(form.precision()),
                "verified_to": q_to_json(&verified),
            })))
        }
        Verb::Residue { input } => {
            let v = read_json(input)?;
            if v.get("series").is_some() {
                let mut form = AnnulusQForm::from_json(&v, "form")?;
                if let Some(p) = &cmd.precision {
                    form = form.with_precision(p.clone());
                }
                let r = q_residue_annulus(&form)?;
                return Ok(Outcome::ok(json!({
                    "kind": "annulus",
                    "residue": r.to_json(),
                    "precision": q_to_json(form.precision()),
                })));
            }
            let f = RationalQDifferential::from_json(
                v.get("form").ok_or_else(|| Error::parse("form", "expected \"series\" or \"form\""))?,
                "form",
            )?;
            let p =
                ProjPoint::from_json(v.get("at").ok_or_else(|| Error::parse("at", "missing point"))?, "at")?;
            let r = f.q_residue_at(&p)?;
            Ok(Outcome::ok(json!({
                "kind": "point",
                "order": f.order_at(&p),
                "residue": r.to_json(),
                "precision": "exact",
            })))
        }
        Verb::LiftStar { input, vertex } => {
            let d = read_datum(cmd, input)?;
            let chart = lift_star(&d, vertex)?;
            let mut out = chart.to_json();
            out["precision"] = q_to_json(&d.precision);
            Ok(Outcome::ok(out))
        }
        Verb::Lift { input } => {
            let d = read_datum(cmd, input)?;
            Ok(Outcome::ok(lift(&d)?.to_json()))
        }
        Verb::Reduce { input, against } => {
            let model = FormalModel::from_json(&read_json(input)?)?;
            let d = reduce_model(&model)?;
            let diff = match against {
                Some(p) => Some(read_datum(cmd, p)?.differences(&d)),
                None => None,
            };
            let agrees = diff.as_ref().is_none_or(Vec::is_empty);
            Ok(Outcome::verdict(
                agrees,
                json!({
                    "datum": d.to_json(),
                    "diff": diff,
                    "precision": q_to_json(&d.precision),
                }),
            ))
        }
        Verb::Fixture { name: None } => {
            let names: Vec<&str> = fixtures::all().into_iter().map(|(n, _)| n).collect();
            Ok(Outcome::ok(json!({ "fixtures": names })))
        }
        Verb::Fixture { name: Some(n) } => fixtures::by_name(n)
            .map(|d| Outcome::ok(d.to_json()))
            .ok_or_else(|| Error::parse("name", format!("no fixture called {n:?}"))),
    }
}

/// Runs one parsed command.
pub fn run(cmd: &Command) -> Outcome {
    dispatch(cmd).unwrap_or_else(|e| error_outcome(&e))
}

/// Parses `args` (including the program name) and runs. Argument errors map
/// to status 2 with clap's message in the report.
pub fn run_args<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Command::try_parse_from(args) {
        Ok(cmd) => run(&cmd),
        Err(e) => {
            let status = if e.use_stderr() { 2 } else { 0 };
            Outcome { status, report: json!({"message": e.to_string()}) }
        }
    }
}
