//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.
//!
//! Randomized criteria draw from a fixed ChaCha seed, so every run sees the
//! same inputs.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qtrop::annulus::{
    good_coordinate_traced, q_residue_annulus, verify_substitution, AnnulusQForm, AnnulusWindow,
};
use qtrop::curves::q_residue_at_point;
use qtrop::datum::{HalfEdge, ReductionDatum};
use qtrop::fixtures;
use qtrop::lifting::{build_cover_star, complete_boundary, cover_ledger};
use qtrop::model::{lift, reduce_model, FormalModel};
use qtrop::psd::{psd_value, psd_value_with_roots, psd_zero_test, RootSystem};
use qtrop::rational::{divisible, lcm_u32, q, qi, Q};
use qtrop::validate::{validate, Mode};
use qtrop::{CycloRational, ResidueSeries, ScalarSeries, ValuedScalar};

/// Relative π-adic precision at which scalar identities are decided.
const PRECISION: i64 = 20;
const SEED: u64 = 0x7472_6f70;
const GOOD_FORMS: usize = 100;
const RESIDUE_FORMS: usize = 100;
const PSD_PAIRS: usize = 50;
const PSD_PHASE_TRIALS: usize = 50;
const LEDGER_SAMPLES: usize = 1000;
const Q_CHOICES: [u32; 5] = [1, 2, 3, 4, 6];
/// Minimum number of fixtures the round trip must cover.
const MIN_FIXTURES: usize = 10;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn pi(e: Q) -> ValuedScalar {
    ValuedScalar::pi_pow(e)
}

fn int(n: i64) -> ValuedScalar {
    ValuedScalar::from_int(n)
}

fn nonzero(rng: &mut ChaCha8Rng, r: i64) -> i64 {
    loop {
        let x = rng.gen_range(-r..=r);
        if x != 0 {
            return x;
        }
    }
}

/// Boundary vertices completed, as the lift sees them.
fn completed(g: &ReductionDatum) -> ReductionDatum {
    let mut full = g.clone();
    for v in &g.curve.vertices {
        if v.boundary {
            full = complete_boundary(&full, &v.id).expect("fixture completes").0;
        }
    }
    full
}

fn windows() -> Vec<(Q, Q)> {
    vec![(qi(0), qi(1)), (q(1, 2), qi(1)), (qi(-1), qi(0)), (qi(0), q(1, 2))]
}

/// Lower bound for `ν(a_i)` keeping `a_n t^n` strictly dominant on `[lo, hi]`.
fn dominance_floor(base: &Q, n: i64, i: i64, lo: &Q, hi: &Q) -> Q {
    let d = qi(n - i);
    let a = &d * lo;
    let b = &d * hi;
    base + if a > b { a } else { b }
}

fn random_form(rng: &mut ChaCha8Rng, q_: u32) -> AnnulusQForm {
    let ws = windows();
    let (lo, hi) = ws[rng.gen_range(0..ws.len())].clone();
    let n = rng.gen_range(-4..=4);
    let base = qi(rng.gen_range(0..=3));
    let c = [1, -1, 2, 3][rng.gen_range(0..4)];
    let mut terms = vec![(n, pi(base.clone()).scale(&CycloRational::from_int(c).pow(q_ as i64).unwrap()))];
    for _ in 0..rng.gen_range(1..=3) {
        let mut off = nonzero(rng, 3);
        if rng.gen_bool(0.3) && n != 0 {
            off = -n;
        }
        let i = n + off;
        let v = dominance_floor(&base, n, i, &lo, &hi) + qi(rng.gen_range(2..=4));
        terms.push((i, pi(v).scale(&CycloRational::from_int(nonzero(rng, 3)))));
    }
    AnnulusQForm::new(ScalarSeries::exact(terms), q_, AnnulusWindow::new(lo, hi).unwrap())
        .unwrap()
        .with_precision(qi(PRECISION))
}

/// Criterion 1: lift, glue and reduce every fixture back to itself.
fn round_trip() -> Outcome {
    let all = fixtures::all();
    ensure(all.len() >= MIN_FIXTURES, || format!("only {} fixtures", all.len()))?;
    let (mut d1, mut dbig, mut boundary, mut loops, mut odd) = (0, 0, 0, 0, 0);
    for (name, g) in &all {
        let model = lift(g).map_err(|e| format!("{name}: lift failed: {e}"))?;
        let text = model.to_json();
        let back = reduce_model(&FormalModel::from_json(&text).map_err(|e| format!("{name}: {e}"))?)
            .map_err(|e| format!("{name}: reduce failed: {e}"))?;
        let diff = g.differences(&back);
        ensure(diff.is_empty(), || format!("{name}: {diff:?}"))?;
        for c in &model.charts {
            if c.ledger.d == 1 {
                d1 += 1;
            } else {
                dbig += 1;
            }
        }
        boundary += model.completions.len();
        loops += g.curve.edges.iter().filter(|e| e.tail == e.head).count();
        let lf = g.assemble_level().map_err(|e| e.to_string())?;
        odd += g.curve.edges.iter().filter(|e| !divisible(lf.slope(&HalfEdge::edge(&e.id)), g.q)).count();
    }
    ensure(d1 > 0 && dbig > 0 && boundary > 0 && loops > 0 && odd > 0, || {
        format!("coverage gap: d=1 {d1}, d>1 {dbig}, boundary {boundary}, loops {loops}, q∤slope {odd}")
    })?;
    Ok(format!(
        "{} fixtures (d=1 charts {d1}, d>1 charts {dbig}, completions {boundary}, loops {loops}, q∤slope edges {odd}) at precision {PRECISION}",
        all.len()
    ))
}

/// Criterion 2: each single defect is reported under exactly its condition.
fn validator_independence() -> Outcome {
    let defects = fixtures::defects();
    for (c, g) in &defects {
        let rep = validate(g, Mode::Strict).map_err(|e| e.to_string())?;
        let got: Vec<_> = rep.conditions().into_iter().collect();
        ensure(got == vec![*c], || format!("{c} defect reported as {got:?}"))?;
    }
    Ok(format!("{} defects, one condition each", defects.len()))
}

/// Criterion 3: the normal form pulled back along the coordinate change
/// reproduces the input, and every round's unit is μ_q-invariant.
fn good_coordinates() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut rounds = 0;
    for k in 0..GOOD_FORMS {
        let q_ = Q_CHOICES[k % Q_CHOICES.len()];
        let xi = random_form(&mut rng, q_);
        let (gf, trace) = good_coordinate_traced(&xi).map_err(|e| format!("form {k} (q={q_}): {e}"))?;
        let reached = verify_substitution(&xi, &gf).map_err(|e| e.to_string())?;
        ensure(reached >= qi(PRECISION), || format!("form {k}: identity only to {reached}"))?;
        for u in &trace {
            ensure(u.terms().all(|(e, _)| e % q_ as i64 == 0), || {
                format!("form {k}: unit with exponent not divisible by {q_}")
            })?;
        }
        rounds += gf.rounds;
    }
    Ok(format!("{GOOD_FORMS} forms, q ∈ {Q_CHOICES:?}, {rounds} rounds in total, identity to relative precision {PRECISION}"))
}

fn random_one_form(rng: &mut ChaCha8Rng) -> (ScalarSeries, ValuedScalar, AnnulusWindow) {
    let ws = windows();
    let (lo, hi) = ws[rng.gen_range(0..ws.len())].clone();
    let m = rng.gen_range(-2..=2);
    let base = qi(rng.gen_range(0..=2));
    let lead = pi(base.clone()).scale(&CycloRational::from_int(nonzero(rng, 2)));
    let mut terms = vec![(m, lead.clone())];
    let b0 = if m == 0 {
        lead
    } else {
        let v = dominance_floor(&base, m, 0, &lo, &hi) + qi(rng.gen_range(1..=3));
        let b = pi(v).scale(&CycloRational::from_rational(q(nonzero(rng, 4), rng.gen_range(1..=3))));
        terms.push((0, b.clone()));
        b
    };
    for _ in 0..rng.gen_range(0..=2) {
        let i = m + nonzero(rng, 2);
        if i == 0 {
            continue;
        }
        let v = dominance_floor(&base, m, i, &lo, &hi) + qi(rng.gen_range(1..=3));
        terms.push((i, pi(v).scale(&CycloRational::from_int(nonzero(rng, 3)))));
    }
    (ScalarSeries::exact(terms), b0, AnnulusWindow::new(lo, hi).unwrap())
}

/// Criterion 4: `Res^q(ω^q) = (free coefficient of ω)^q`.
fn residue_power_law() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 4);
    for k in 0..RESIDUE_FORMS {
        let q_ = Q_CHOICES[k % Q_CHOICES.len()];
        let (omega, b0, w) = random_one_form(&mut rng);
        let xi = AnnulusQForm::new(omega.pow(q_ as i64, 0).unwrap(), q_, w)
            .map_err(|e| format!("form {k}: {e}"))?
            .with_precision(qi(PRECISION));
        let r = q_residue_annulus(&xi).map_err(|e| format!("form {k}: {e}"))?;
        let expected = b0.pow(q_ as i64).unwrap();
        ensure(r.eq_to_precision(&expected), || format!("form {k} (q={q_}): {r} vs {expected}"))?;
        let floor = xi.series().coeff(xi.dominant()).valuation().unwrap() + qi(PRECISION);
        ensure(r.precision().is_none_or(|p| p >= &floor), || format!("form {k}: precision {r}"))?;
    }
    Ok(format!(
        "{RESIDUE_FORMS} forms ω^q, q ∈ {Q_CHOICES:?}, agreement through relative precision {PRECISION}"
    ))
}

/// Criterion 5: reversing the orientation multiplies the residue by `(−1)^q`.
fn orientation_law() -> Outcome {
    let mut forms: Vec<(String, AnnulusQForm)> = Vec::new();
    for (name, g) in fixtures::all() {
        let model = lift(&g).map_err(|e| format!("{name}: {e}"))?;
        for c in &model.charts {
            for e in &c.ends {
                let f = AnnulusQForm::new(e.good.normal_series().unwrap(), c.q, e.window.clone())
                    .map_err(|err| format!("{name}/{}: {err}", e.half_edge))?;
                forms.push((format!("{name}/{}/{}", c.vertex, e.half_edge), f));
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 5);
    for k in 0..20 {
        let q_ = Q_CHOICES[k % Q_CHOICES.len()];
        let (omega, _, w) = random_one_form(&mut rng);
        forms.push((
            format!("random {k}"),
            AnnulusQForm::new(omega.pow(q_ as i64, 0).unwrap(), q_, w).unwrap(),
        ));
    }
    let mut nonzero_count = 0;
    for (name, f) in &forms {
        let r = q_residue_annulus(f).map_err(|e| format!("{name}: {e}"))?;
        let rr = q_residue_annulus(&f.reverse_orientation().map_err(|e| e.to_string())?)
            .map_err(|e| format!("{name} reversed: {e}"))?;
        let expected = if f.q() % 2 == 0 { r.clone() } else { r.neg() };
        ensure(rr.eq_to_precision(&expected), || format!("{name}: {r} reversed to {rr}"))?;
        if !r.is_zero() {
            nonzero_count += 1;
        }
    }
    Ok(format!("{} annulus forms ({nonzero_count} with nonzero residue)", forms.len()))
}

/// Criterion 6: the `s = d = 2` closed form, agreement of the two zero tests,
/// and invariance under changing base roots.
fn psd_oracles() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 6);
    let square = |rng: &mut ChaCha8Rng| {
        let c = q(nonzero(rng, 5), rng.gen_range(1..=4));
        let e = rng.gen_range(0..=2);
        let mut r = pi(qi(2 * e)).scale(&CycloRational::from_rational(&c * &c));
        if rng.gen_bool(0.5) {
            r = r.mul(&int(1).add(&pi(qi(1)).scale(&CycloRational::from_int(nonzero(rng, 3)))));
        }
        r
    };
    for k in 0..PSD_PAIRS {
        let (a, b) = (square(&mut rng), square(&mut rng));
        let v = psd_value(&[a.clone(), b.clone()], 2, 1).map_err(|e| e.to_string())?;
        let expected = a.sub(&b).pow(2).unwrap();
        ensure(v.eq_to_precision(&expected), || format!("pair {k}: {v} vs {expected}"))?;
    }
    let mut grid = 0;
    let mut zeros = 0;
    for d in 1..=4u32 {
        let mut base = vec![ValuedScalar::zero(), int(1), int(2i64.pow(d)), int(1).add(&pi(qi(1)))];
        if d % 2 == 1 {
            base.push(int(-1));
        }
        for s in 1..=3usize {
            let mut idx = vec![0usize; s];
            loop {
                let vals: Vec<ValuedScalar> = idx.iter().map(|i| base[*i].clone()).collect();
                let z = psd_zero_test(&vals, d, 1).map_err(|e| e.to_string())?;
                let v = psd_value(&vals, d, 1).map_err(|e| e.to_string())?;
                ensure(z == v.is_zero(), || format!("d={d} {vals:?}: zero test {z}, value {v}"))?;
                grid += 1;
                zeros += z as usize;
                let mut p = s;
                while p > 0 {
                    idx[p - 1] += 1;
                    if idx[p - 1] < base.len() {
                        break;
                    }
                    idx[p - 1] = 0;
                    p -= 1;
                }
                if p == 0 {
                    break;
                }
            }
        }
    }
    for k in 0..PSD_PHASE_TRIALS {
        let d = rng.gen_range(2..=4u32);
        let s = rng.gen_range(1..=3usize);
        let vals: Vec<ValuedScalar> =
            (0..s).map(|_| int(nonzero(&mut rng, 4)).pow(d as i64).unwrap()).collect();
        let mut rs = RootSystem::new(&vals, d, 1).map_err(|e| e.to_string())?;
        let before = psd_value_with_roots(&rs).map_err(|e| e.to_string())?;
        let i = rng.gen_range(0..s);
        let j = rng.gen_range(0..d as usize);
        rs.roots[i] = rs.roots[i].scale(&rs.phases[j]);
        let after = psd_value_with_roots(&rs).map_err(|e| e.to_string())?;
        ensure(after.eq_to_precision(&before), || format!("trial {k}: {before} became {after}"))?;
    }
    Ok(format!(
        "{PSD_PAIRS} closed-form pairs, {grid} grid inputs ({zeros} zero), {PSD_PHASE_TRIALS} phase changes"
    ))
}

/// Criterion 7: gcd ledger identities and cancellation of cover residues.
fn ledger_identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 7);
    for k in 0..LEDGER_SAMPLES {
        let q_ = rng.gen_range(1..=12u32);
        let s = rng.gen_range(1..=6);
        let m: Vec<i64> = (0..s).map(|_| rng.gen_range(-30..=30)).collect();
        let l = cover_ledger(q_, &m).map_err(|e| e.to_string())?;
        let lcm = l.d_i.iter().fold(1, |a, b| lcm_u32(a, *b));
        ensure(lcm == l.d, || format!("sample {k}: lcm(d_i) = {lcm}, d = {}", l.d))?;
        for i in 0..s {
            ensure(l.fibers[i] * l.d_i[i] == l.d, || format!("sample {k}: f_{i}·d_{i} ≠ d"))?;
            ensure(l.fibers[i] == l.l_i[i] / l.l, || format!("sample {k}: f_{i} ≠ l_{i}/l"))?;
        }
    }
    let mut covers = Vec::new();
    for (name, g) in fixtures::all() {
        let g = completed(&g);
        for v in &g.curve.vertices {
            if g.form(&v.id).explicit_form().is_none() {
                continue;
            }
            let m: Vec<i64> = g.curve.star(&v.id).iter().map(|h| g.order(h).unwrap()).collect();
            if cover_ledger(g.q, &m).unwrap().d == 1 {
                continue;
            }
            let c = build_cover_star(&g, &v.id).map_err(|e| format!("{name}/{}: {e}", v.id))?;
            ensure(c.residue_sum().is_zero(), || {
                format!("{name}/{}: residues sum to {}", v.id, c.residue_sum())
            })?;
            covers.push(format!("{name}/{}", v.id));
        }
    }
    ensure(!covers.is_empty(), || "no d>1 fixture".to_string())?;
    Ok(format!("{LEDGER_SAMPLES} ledgers; zero-sum on {} covers ({})", covers.len(), covers.join(", ")))
}

/// Criterion 8: q-residues of standard forms on the full grid.
fn point_residues() -> Outcome {
    let samples = [
        CycloRational::from_int(1),
        CycloRational::from_int(-2),
        CycloRational::from_rational(q(3, 5)),
        CycloRational::zeta(4, 1),
        CycloRational::zeta(3, 1).add(&CycloRational::from_int(2)),
    ];
    let mut checked = 0;
    for q_ in 1..=4u32 {
        let qq = q_ as i64;
        for n in -12..=12i64 {
            for s in &samples {
                let (g, expected) = if n % qq == 0 && n < 0 {
                    let g = ResidueSeries::exact([(n / qq, CycloRational::one()), (0, s.clone())])
                        .pow(qq, 0)
                        .unwrap();
                    (g, s.pow(qq).unwrap())
                } else if n == 0 {
                    (ResidueSeries::monomial(s.clone(), 0), s.clone())
                } else {
                    let g = ResidueSeries::exact([(n, s.clone()), (n + 1, CycloRational::one())]);
                    (g, CycloRational::zero())
                };
                let r = q_residue_at_point(&g, q_).map_err(|e| format!("q={q_}, n={n}: {e}"))?;
                ensure(r == expected, || format!("q={q_}, n={n}, s={s}: {r} vs {expected}"))?;
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} grid points, q ≤ 4, |n| ≤ 12"))
}

/// Criterion 9: antisymmetry of slopes, the star sum identity and vanishing
/// cycle sums.
fn slope_identities() -> Outcome {
    let mut stars = 0;
    let mut cycles = 0;
    for (name, g) in fixtures::all() {
        let g = completed(&g);
        let lf = g.assemble_level().map_err(|e| format!("{name}: {e}"))?;
        for e in &g.curve.edges {
            let h = HalfEdge::edge(&e.id);
            ensure(lf.slope(&h) == &-lf.slope(&h.opp().unwrap()), || {
                format!("{name}: slope on {} not antisymmetric", e.id)
            })?;
        }
        for v in &g.curve.vertices {
            let star = g.curve.star(&v.id).len() as i64;
            let genus = g.form(&v.id).genus() as i64;
            let expected = qi(g.q as i64 * (2 - 2 * genus - star));
            let got = lf.star_sum(&g.curve, &v.id);
            ensure(got == expected, || format!("{name}/{}: star sum {got}, expected {expected}", v.id))?;
            stars += 1;
        }
        for (e, s) in lf.cycle_sums(&g.curve) {
            ensure(s == qi(0), || format!("{name}: cycle through {e} sums to {s}"))?;
            cycles += 1;
        }
    }
    Ok(format!("{stars} stars, {cycles} cycle(s)"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("round trip", round_trip),
        ("validator independence", validator_independence),
        ("good-coordinate soundness", good_coordinates),
        ("residue power law", residue_power_law),
        ("orientation law", orientation_law),
        ("P_{s,d} oracles", psd_oracles),
        ("ledger identities", ledger_identities),
        ("point-residue oracle", point_residues),
        ("slope/degree identities", slope_identities),
    ];
    let start = Instant::now();
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let r = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".to_string());
            Err(format!("panicked: {msg}"))
        });
        let secs = t.elapsed().as_secs_f64();
        match r {
            Ok(detail) => println!("PASS  {}. {name}: {detail} [{secs:.2}s]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {}. {name}: {detail} [{secs:.2}s]", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed in {:.2}s",
        criteria.len() - failed,
        criteria.len(),
        start.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
