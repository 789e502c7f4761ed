//! Exponential sums over the p-sets and the Niederreiter-type bounds built
//! from them.
//!
//! Every phase is an `M`-th root of unity `e(k/M)` looked up by its integer
//! index `k mod M`, so sums carry no accumulated angle drift.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::limits::Limits;
use crate::numtheory::{poly_eval_mod, Prime};
use crate::pointset::RationalPointSet;
use crate::subset::{masks_descending, Subset};
use crate::weights::Weights;

/// Absolute slack when comparing a computed magnitude against a bound.
pub const BOUND_TOLERANCE: f64 = 1e-9;

/// `C(M) = (-M/2, M/2] ∩ Z` as the inclusive range `(lo, hi)`.
pub fn centered_range(modulus: u64) -> (i64, i64) {
    let m = modulus as i64;
    (m / 2 - m + 1, m / 2)
}

/// A frequency vector `h` with entries in `C(M)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrequencyVector {
    entries: Vec<i64>,
    modulus: u64,
}

impl FrequencyVector {
    pub fn new(entries: Vec<i64>, modulus: u64) -> Result<Self> {
        if modulus < 2 {
            return Err(Error::invalid("frequency modulus must be at least 2"));
        }
        if entries.is_empty() {
            return Err(Error::invalid("frequency vector has dimension 0"));
        }
        let (lo, hi) = centered_range(modulus);
        if let Some(bad) = entries.iter().find(|&&h| h < lo || h > hi) {
            return Err(Error::invalid(format!(
                "frequency {bad} is outside C({modulus}) = [{lo}, {hi}]"
            )));
        }
        Ok(FrequencyVector { entries, modulus })
    }

    pub fn entries(&self) -> &[i64] {
        &self.entries
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|&h| h == 0)
    }

    /// `r(h) = prod max(1, |h_j|)`.
    pub fn r(&self) -> f64 {
        self.entries.iter().map(|h| h.unsigned_abs().max(1) as f64).product()
    }

    /// True when `d` divides every entry.
    pub fn all_divisible_by(&self, d: u64) -> bool {
        self.entries.iter().all(|h| h.unsigned_abs() % d == 0)
    }
}

impl fmt::Display for FrequencyVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.entries.iter().map(|h| h.to_string()).collect();
        f.write_str(&parts.join(","))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExpSumValue {
    pub re: f64,
    pub im: f64,
    pub terms: u64,
}

impl ExpSumValue {
    pub fn magnitude(&self) -> f64 {
        self.re.hypot(self.im)
    }
}

/// `e(k/M)` for `k in [0, M)`, exact at multiples of a quarter turn.
pub(crate) struct RootTable {
    cos: Vec<f64>,
    sin: Vec<f64>,
}

impl RootTable {
    pub(crate) fn new(modulus: u64) -> Self {
        let m = modulus;
        let (cos, sin) = (0..m)
            .map(|k| {
                if k == 0 {
                    (1.0, 0.0)
                } else if 2 * k == m {
                    (-1.0, 0.0)
                } else if 4 * k == m {
                    (0.0, 1.0)
                } else if 4 * k == 3 * m {
                    (0.0, -1.0)
                } else {
                    let (s, c) = (TAU * (k as f64 / m as f64)).sin_cos();
                    (c, s)
                }
            })
            .unzip();
        RootTable { cos, sin }
    }

    #[inline]
    fn add(&self, acc: &mut (f64, f64), k: u64, weight: f64) {
        acc.0 += weight * self.cos[k as usize];
        acc.1 += weight * self.sin[k as usize];
    }
}

fn check_modulus(h: &FrequencyVector, expected: u64) -> Result<()> {
    if h.modulus != expected {
        return Err(Error::invalid(format!(
            "frequency vector is over C({}), expected C({expected})",
            h.modulus
        )));
    }
    Ok(())
}

/// `sum_{n < M} e((h_1 n + h_2 n^2 + ... + h_s n^s) / M)` with `M = p^power`.
pub fn korobov_sum(h: &FrequencyVector, p: Prime, power: u32) -> Result<ExpSumValue> {
    if !(power == 1 || power == 2) {
        return Err(Error::invalid("modulus power must be 1 or 2"));
    }
    let m = p
        .get()
        .checked_pow(power)
        .ok_or_else(|| Error::Overflow(format!("{p}^{power}")))?;
    check_modulus(h, m)?;
    let table = RootTable::new(m);
    Ok(korobov_sum_with(&table, h.entries(), m))
}

fn korobov_sum_with(table: &RootTable, h: &[i64], m: u64) -> ExpSumValue {
    let mut acc = (0.0, 0.0);
    for n in 0..m {
        // n * (h_1 + h_2 n + ... + h_s n^(s-1))
        let k = (n as u128 * poly_eval_mod(h, n as i64, m) as u128 % m as u128) as u64;
        table.add(&mut acc, k, 1.0);
    }
    ExpSumValue {
        re: acc.0,
        im: acc.1,
        terms: m,
    }
}

/// `sum_{a < p} sum_{k < p} e(k (h_1 + h_2 a + ... + h_s a^(s-1)) / p)`.
pub fn hua_wang_double_sum(h: &FrequencyVector, p: Prime) -> Result<ExpSumValue> {
    check_modulus(h, p.get())?;
    let table = RootTable::new(p.get());
    Ok(hua_wang_sum_with(&table, h.entries(), p.get()))
}

fn hua_wang_sum_with(table: &RootTable, h: &[i64], p: u64) -> ExpSumValue {
    let mut acc = (0.0, 0.0);
    for a in 0..p {
        let g = poly_eval_mod(h, a as i64, p);
        for k in 0..p {
            table.add(&mut acc, (k as u128 * g as u128 % p as u128) as u64, 1.0);
        }
    }
    ExpSumValue {
        re: acc.0,
        im: acc.1,
        terms: p * p,
    }
}

/// Number of `a in [0, p)` with `h_1 + h_2 a + ... + h_s a^(s-1) ≡ 0 (mod p)`.
pub fn root_count(h: &[i64], p: Prime) -> u64 {
    (0..p.get())
        .filter(|&a| poly_eval_mod(h, a as i64, p.get()) == 0)
        .count() as u64
}

/// The three exponential-sum estimates behind the p-set bounds.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SumLemma {
    /// `|sum_{n<p} e(f(n)/p)| <= (s-1) sqrt(p)` (Weil).
    Weil,
    /// `|sum_{n<p^2} e(f(n)/p^2)| <= (s-1) p`.
    PrimeSquare,
    /// Hua–Wang double sum `<= (s-1) p`.
    HuaWang,
}

impl SumLemma {
    pub fn from_number(n: u32) -> Result<Self> {
        match n {
            3 => Ok(SumLemma::Weil),
            5 => Ok(SumLemma::PrimeSquare),
            6 => Ok(SumLemma::HuaWang),
            _ => Err(Error::invalid(format!("unknown lemma {n} (expected 3, 5 or 6)"))),
        }
    }

    pub fn number(self) -> u32 {
        match self {
            SumLemma::Weil => 3,
            SumLemma::PrimeSquare => 5,
            SumLemma::HuaWang => 6,
        }
    }

    pub fn modulus(self, p: u64) -> u64 {
        match self {
            SumLemma::PrimeSquare => p * p,
            SumLemma::Weil | SumLemma::HuaWang => p,
        }
    }

    pub fn bound(self, p: u64, s: usize) -> f64 {
        let k = s.saturating_sub(1) as f64;
        match self {
            SumLemma::Weil => k * (p as f64).sqrt(),
            SumLemma::PrimeSquare | SumLemma::HuaWang => k * p as f64,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundCheck {
    pub lemma: SumLemma,
    pub p: u64,
    pub s: usize,
    pub modulus: u64,
    pub bound: f64,
    pub max_ratio: f64,
    pub max_magnitude: f64,
    pub worst_h: Vec<i64>,
    pub checked: u64,
    pub violations: u64,
    /// False when the frequency space exceeded the cap and was sampled.
    pub exhaustive: bool,
}

/// Checks one of the three sum estimates over every admissible `h in C_s(M)`
/// (all entries divisible by `p` excluded), or over `cap` seeded random
/// vectors when `M^s` exceeds `cap`.
///
/// Frequencies are visited lexicographically with `h_1` slowest; the worst
/// vector is the first whose ratio exceeds the running maximum by more than
/// `1e-12`.
pub fn check_sum_bound(lemma: SumLemma, p: Prime, s: usize, cap: u64, seed: u64) -> Result<BoundCheck> {
    if s < 1 {
        return Err(Error::invalid("dimension must be at least 1"));
    }
    let pv = p.get();
    let m = lemma.modulus(pv);
    let bound = lemma.bound(pv, s);
    let table = RootTable::new(m);
    let (lo, _) = centered_range(m);
    let total = (m as f64).powi(s as i32);

    let mut report = BoundCheck {
        lemma,
        p: pv,
        s,
        modulus: m,
        bound,
        max_ratio: 0.0,
        max_magnitude: 0.0,
        worst_h: Vec::new(),
        checked: 0,
        violations: 0,
        exhaustive: total <= cap as f64,
    };
    let mut visit = |h: &[i64]| {
        if h.iter().all(|x| x.unsigned_abs() % pv == 0) {
            return;
        }
        let v = match lemma {
            SumLemma::Weil | SumLemma::PrimeSquare => korobov_sum_with(&table, h, m),
            SumLemma::HuaWang => hua_wang_sum_with(&table, h, pv),
        };
        let mag = v.magnitude();
        let ratio = if bound > 0.0 {
            mag / bound
        } else if mag <= BOUND_TOLERANCE {
            0.0
        } else {
            f64::INFINITY
        };
        report.checked += 1;
        if mag > bound + BOUND_TOLERANCE {
            report.violations += 1;
        }
        if report.worst_h.is_empty() || ratio > report.max_ratio + 1e-12 {
            report.max_ratio = ratio;
            report.max_magnitude = mag;
            report.worst_h = h.to_vec();
        }
    };

    let mut h = vec![lo; s];
    if report.exhaustive {
        loop {
            visit(&h);
            // odometer, last coordinate fastest
            let mut j = s;
            loop {
                if j == 0 {
                    return Ok(report);
                }
                j -= 1;
                h[j] += 1;
                if h[j] < lo + m as i64 {
                    break;
                }
                h[j] = lo;
            }
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..cap {
            for x in h.iter_mut() {
                *x = lo + rng.gen_range(0..m as i64);
            }
            visit(&h);
        }
        Ok(report)
    }
}

/// Distinct numerator vectors with their multiplicities.
fn grouped_points(ps: &RationalPointSet) -> Vec<(Vec<u64>, f64)> {
    let mut groups: BTreeMap<&[u64], u64> = BTreeMap::new();
    for x in ps.points() {
        *groups.entry(x).or_insert(0) += 1;
    }
    groups
        .into_iter()
        .map(|(x, c)| (x.to_vec(), c as f64))
        .collect()
}

fn frequency_count(modulus: u64, dim: usize) -> f64 {
    (modulus as f64).powi(dim as i32)
}

/// `sum_{h in C_s*(M)} r(h)^(-1) |N^(-1) sum_n e(h . y_n / M)|`.
pub fn frequency_sum(ps: &RationalPointSet, limits: &Limits) -> Result<f64> {
    let m = ps.modulus();
    let s = ps.dim();
    if m < 2 {
        return Err(Error::invalid("modulus must be at least 2"));
    }
    let total = frequency_count(m, s);
    if total > limits.max_frequencies as f64 {
        return Err(Error::CapExceeded {
            what: "frequency-vector enumeration M^s",
            needed: total,
            cap: limits.max_frequencies,
        });
    }
    let table = RootTable::new(m);
    let groups = grouped_points(ps);
    let n = ps.len() as f64;
    let (lo, _) = centered_range(m);
    let inv_r = |h: i64| 1.0 / h.unsigned_abs().max(1) as f64;

    // One slice per value of h_1; partial sums are combined in slice order.
    let slice = |h1: i64| -> f64 {
        let mut h = vec![lo; s];
        h[0] = h1;
        let mut phase: Vec<u64> = groups
            .iter()
            .map(|(y, _)| {
                y.iter().zip(&h).fold(0u64, |acc, (&yj, &hj)| {
                    let t = (hj.rem_euclid(m as i64) as u128 * yj as u128 % m as u128) as u64;
                    (acc + t) % m
                })
            })
            .collect();
        let mut partial = 0.0;
        loop {
            if h.iter().any(|&x| x != 0) {
                let mut acc = (0.0, 0.0);
                for (k, (_, c)) in phase.iter().zip(&groups) {
                    table.add(&mut acc, *k, *c);
                }
                let weight: f64 = h.iter().map(|&x| inv_r(x)).product();
                partial += weight * acc.0.hypot(acc.1) / n;
            }
            // odometer over h_2..h_s; each step adds y_j to the phase (mod M),
            // including the wrap from hi back to lo
            let mut j = s;
            loop {
                j -= 1;
                if j == 0 {
                    return partial;
                }
                h[j] += 1;
                let wrapped = h[j] >= lo + m as i64;
                if wrapped {
                    h[j] = lo;
                }
                for (ph, (y, _)) in phase.iter_mut().zip(&groups) {
                    *ph = (*ph + y[j]) % m;
                }
                if !wrapped {
                    break;
                }
            }
        }
    };

    let partials: Vec<f64> = (lo..lo + m as i64).into_par_iter().map(slice).collect();
    Ok(partials.into_iter().sum())
}

#[derive(Clone, Debug, PartialEq)]
pub struct NiederreiterBound {
    pub value: f64,
    /// `s / M`
    pub count_term: f64,
    /// The frequency sum before the factor `1/2`.
    pub frequency_sum: f64,
}

/// `s/M + (1/2) sum_{h in C_s*(M)} r(h)^(-1) |N^(-1) sum_n e(h . y_n / M)|`,
/// an upper bound for `D*`.
pub fn niederreiter_rhs(ps: &RationalPointSet) -> Result<NiederreiterBound> {
    niederreiter_rhs_with_limits(ps, &Limits::default())
}

pub fn niederreiter_rhs_with_limits(ps: &RationalPointSet, limits: &Limits) -> Result<NiederreiterBound> {
    let count_term = ps.dim() as f64 / ps.modulus() as f64;
    let fs = frequency_sum(ps, limits)?;
    Ok(NiederreiterBound {
        value: count_term + 0.5 * fs,
        count_term,
        frequency_sum: fs,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct WeightedNiederreiter {
    pub value: f64,
    /// `max_u gamma_u |u| / M`
    pub count_term: f64,
    pub count_subset: Option<Subset>,
    /// `max_u gamma_u * frequency_sum(P_u)`
    pub frequency_term: f64,
    pub frequency_subset: Option<Subset>,
}

/// Weighted form of the bound: `max_u gamma_u |u|/M + max_u gamma_u S(P_u)`
/// where `S` is the full frequency sum (no factor `1/2`).
pub fn weighted_niederreiter_rhs(ps: &RationalPointSet, w: &Weights) -> Result<WeightedNiederreiter> {
    weighted_niederreiter_rhs_with_limits(ps, w, &Limits::default())
}

pub fn weighted_niederreiter_rhs_with_limits(
    ps: &RationalPointSet,
    w: &Weights,
    limits: &Limits,
) -> Result<WeightedNiederreiter> {
    let s = ps.dim();
    if s > limits.max_subset_dim {
        return Err(Error::CapExceeded {
            what: "coordinate subset enumeration 2^s",
            needed: 2f64.powi(s as i32),
            cap: 1u64 << limits.max_subset_dim.min(63),
        });
    }
    let active: Vec<(Subset, f64)> = masks_descending(s)
        .map(Subset::from_mask)
        .map(|u| {
            let g = w.gamma_of(&u);
            (u, g)
        })
        .filter(|(_, g)| *g > 0.0)
        .collect();
    let total: f64 = active
        .iter()
        .map(|(u, _)| frequency_count(ps.modulus(), u.len()))
        .sum();
    if total > limits.max_frequencies as f64 {
        return Err(Error::CapExceeded {
            what: "frequency-vector enumeration over all subsets",
            needed: total,
            cap: limits.max_frequencies,
        });
    }
    let m = ps.modulus() as f64;
    let mut out = WeightedNiederreiter {
        value: 0.0,
        count_term: 0.0,
        count_subset: None,
        frequency_term: 0.0,
        frequency_subset: None,
    };
    for (u, g) in active {
        let a = g * u.len() as f64 / m;
        if out.count_subset.is_none() || a > out.count_term {
            out.count_term = a;
            out.count_subset = Some(u.clone());
        }
        let b = g * frequency_sum(&ps.project(&u)?, limits)?;
        if out.frequency_subset.is_none() || b > out.frequency_term {
            out.frequency_term = b;
            out.frequency_subset = Some(u);
        }
    }
    out.value = out.count_term + out.frequency_term;
    Ok(out)
}
