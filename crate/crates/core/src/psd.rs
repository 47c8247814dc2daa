//! `P_{s,d}(R_1, …, R_s) = ∏ (ζ^{j_1} r_1 + … + ζ^{j_s} r_s)` over all phase
//! tuples, where `r_i^d = R_i`.

use crate::cyclo::CycloRational;
use crate::error::{Error, Result};
use crate::rational::lcm_u32;
use crate::scalar::ValuedScalar;

/// Cap on `s·d^s` for enumerations.
pub const MAX_TUPLES: u128 = 1_000_000;

/// One base `d`-th root per value plus the `d`-th roots of unity.
#[derive(Clone, Debug)]
pub struct RootSystem {
    pub d: u32,
    pub roots: Vec<ValuedScalar>,
    pub phases: Vec<CycloRational>,
}

impl RootSystem {
    /// Base roots come from the principal root of each leading coefficient; the
    /// phases live in `Q(ζ_M)` with `M = lcm(N, d)`.
    pub fn new(values: &[ValuedScalar], d: u32, conductor: u32) -> Result<Self> {
        if d == 0 {
            return Err(Error::Precondition("d must be positive".to_string()));
        }
        let s = values.len() as u32;
        let count = (s.max(1) as u128).saturating_mul((d as u128).saturating_pow(s));
        if count > MAX_TUPLES {
            return Err(Error::TooLarge(count));
        }
        let roots = values.iter().map(|r| r.nth_root(d)).collect::<Result<Vec<_>>>()?;
        let m = lcm_u32(conductor.max(1), d);
        let phases =
            (0..d as i64).map(|j| CycloRational::unity(m, d, j).expect("d divides the conductor")).collect();
        Ok(RootSystem { d, roots, phases })
    }

    /// The tuple `(ζ^{j_i} r_i)`.
    pub fn tuple(&self, phase: &[usize]) -> Vec<ValuedScalar> {
        self.roots.iter().zip(phase).map(|(r, j)| r.scale(&self.phases[*j])).collect()
    }

    fn sum(&self, phase: &[usize]) -> ValuedScalar {
        self.tuple(phase).iter().fold(ValuedScalar::zero(), |a, b| a.add(b))
    }

    /// Phase tuples in lexicographic order (first index most significant).
    pub fn phase_tuples(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        let s = self.roots.len();
        let d = self.d as usize;
        let mut next = Some(vec![0usize; s]);
        std::iter::from_fn(move || {
            let cur = next.take()?;
            let mut succ = cur.clone();
            let mut p = s;
            loop {
                if p == 0 {
                    break;
                }
                p -= 1;
                succ[p] += 1;
                if succ[p] < d {
                    next = Some(succ);
                    break;
                }
                succ[p] = 0;
            }
            Some(cur)
        })
    }

    /// Phase tuples whose root sum vanishes to precision.
    pub fn zero_sum_tuples(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        self.phase_tuples().filter(|p| self.sum(p).is_zero())
    }
}

pub fn psd_value(values: &[ValuedScalar], d: u32, conductor: u32) -> Result<ValuedScalar> {
    psd_value_with_roots(&RootSystem::new(values, d, conductor)?)
}

/// `P_{s,d}` from a given choice of base roots.
///
/// Rotating every phase by `k` multiplies a sum by `ζ^k`, so only tuples with
/// `j_1 = 0` are multiplied out: `P = A^d · ζ^{d^{s-1}·d(d-1)/2}`.
pub fn psd_value_with_roots(rs: &RootSystem) -> Result<ValuedScalar> {
    let d = rs.d as u64;
    if rs.roots.is_empty() || d == 1 {
        return Ok(rs.phase_tuples().fold(ValuedScalar::one(), |acc, p| acc.mul(&rs.sum(&p))));
    }
    let a =
        rs.phase_tuples().take_while(|p| p[0] == 0).fold(ValuedScalar::one(), |acc, p| acc.mul(&rs.sum(&p)));
    let orbit = d.pow(rs.roots.len() as u32 - 1) % d;
    let twist = (orbit * (d * (d - 1) / 2 % d)) % d;
    Ok(a.pow(d as i64)?.scale(&rs.phases[twist as usize]))
}

/// Whether some tuple of `d`-th roots sums to zero.
pub fn psd_zero_test(values: &[ValuedScalar], d: u32, conductor: u32) -> Result<bool> {
    let rs = RootSystem::new(values, d, conductor)?;
    let found = rs.zero_sum_tuples().next().is_some();
    Ok(found)
}

/// The lexicographically first zero-sum tuple of roots, if any.
pub fn select_roots_sum_zero(
    values: &[ValuedScalar],
    d: u32,
    conductor: u32,
) -> Result<Option<Vec<ValuedScalar>>> {
    let rs = RootSystem::new(values, d, conductor)?;
    let found = rs.zero_sum_tuples().next();
    Ok(found.map(|p| rs.tuple(&p)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(xs: &[i64]) -> Vec<ValuedScalar> {
        xs.iter().map(|x| ValuedScalar::from_int(*x)).collect()
    }

    #[test]
    fn values() {
        let r = v(&[3, 5]);
        assert_eq!(psd_value(&r, 1, 1).unwrap(), ValuedScalar::from_int(8));
        assert_eq!(psd_value(&v(&[9]), 2, 1).unwrap(), ValuedScalar::from_int(-9));
        assert_eq!(psd_value(&v(&[4, 1]), 2, 1).unwrap(), ValuedScalar::from_int(9));
    }

    #[test]
    fn zero_tests() {
        assert!(psd_zero_test(&v(&[1, 1, 4]), 2, 1).unwrap());
        assert!(!psd_zero_test(&v(&[1, 4]), 2, 1).unwrap());
        assert!(psd_zero_test(&v(&[0]), 3, 1).unwrap());
    }

    #[test]
    fn selection() {
        assert_eq!(select_roots_sum_zero(&v(&[1, 1]), 2, 1).unwrap(), Some(v(&[1, -1])));
        assert_eq!(select_roots_sum_zero(&v(&[1, 1, 4]), 2, 1).unwrap(), Some(v(&[1, 1, -2])));
        assert_eq!(select_roots_sum_zero(&v(&[1, 4]), 2, 1).unwrap(), None);
    }

    #[test]
    fn too_large() {
        let r = v(&[1; 12]);
        assert!(matches!(RootSystem::new(&r, 4, 4), Err(Error::TooLarge(_))));
    }

    #[test]
    fn rotation_shortcut_matches_full_product() {
        let cases: [(&[i64], u32); 6] =
            [(&[7], 2), (&[7], 3), (&[2, 5], 3), (&[1, 3, 2], 2), (&[2, 3], 4), (&[5, -1], 6)];
        for (xs, d) in cases {
            let vals: Vec<_> = v(xs).iter().map(|x| x.pow(d as i64).unwrap()).collect();
            let rs = RootSystem::new(&vals, d, 1).unwrap();
            let full = rs.phase_tuples().fold(ValuedScalar::one(), |acc, p| acc.mul(&rs.sum(&p)));
            assert_eq!(psd_value_with_roots(&rs).unwrap(), full, "{xs:?}, d = {d}");
        }
    }
}
