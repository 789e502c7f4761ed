//! Local, star and weighted star discrepancy of rational point multisets.
//!
//! The exact star discrepancy is a maximum over the critical corners
//! `y in prod_j (C_j ∪ {1})`, where `C_j` holds the distinct `j`-th
//! coordinates. At each corner two one-sided limits are compared:
//! `A_closed(y)/N - vol(y)` (points with `x <= y` in every coordinate) and
//! `vol(y) - A_open(y)/N` (points with `x < y`).
//!
//! Values are exact rationals over the common denominator `N * M^s` whenever
//! that fits comfortably in an `i128`; otherwise volumes fall back to `f64`.

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::limits::Limits;
use crate::pointset::RationalPointSet;
use crate::subset::{masks_descending, Subset};
use crate::weights::Weights;

/// Which one-sided limit attained the maximum at the witness corner.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    /// `A_closed(y)/N - vol(y)`: the box `[0, y]`, reached as a limit from above.
    Closed,
    /// `vol(y) - A_open(y)/N`: the half-open box `[0, y)` itself.
    Open,
}

/// Upper corner of an anchored box, as numerators over the point-set modulus.
/// A numerator equal to the modulus is the coordinate 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Corner {
    pub numerators: Vec<u64>,
    pub modulus: u64,
}

impl Corner {
    pub fn to_f64(&self) -> Vec<f64> {
        self.numerators
            .iter()
            .map(|&v| v as f64 / self.modulus as f64)
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DiscrepancyResult {
    pub value: f64,
    /// The same value as a reduced fraction, when exact arithmetic was used.
    pub exact: Option<Ratio<i128>>,
    pub witness: Corner,
    pub side: Side,
}

impl DiscrepancyResult {
    /// Re-evaluates the attaining one-sided limit at the witness corner by
    /// direct counting.
    pub fn recompute(&self, ps: &RationalPointSet) -> Result<f64> {
        let z = self.witness.to_f64();
        match self.side {
            Side::Open => Ok(-local_discrepancy(ps, &z)?),
            Side::Closed => closed_local_discrepancy(ps, &z),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct WeightedDiscrepancy {
    pub value: f64,
    /// `None` only when every weight is zero.
    pub subset: Option<Subset>,
    /// Exact discrepancy of the projection onto `subset`.
    pub projected: Option<DiscrepancyResult>,
}

impl WeightedDiscrepancy {
    /// Witness corner in the full dimension: coordinates outside the subset set to 1.
    pub fn full_witness(&self, s: usize) -> Option<Corner> {
        let (u, r) = (self.subset.as_ref()?, self.projected.as_ref()?);
        let m = r.witness.modulus;
        let mut numerators = vec![m; s];
        for (k, &j) in u.indices().iter().enumerate() {
            numerators[j - 1] = r.witness.numerators[k];
        }
        Some(Corner {
            numerators,
            modulus: m,
        })
    }
}

fn check_box(ps: &RationalPointSet, z: &[f64]) -> Result<()> {
    if z.len() != ps.dim() {
        return Err(Error::DimensionMismatch {
            expected: ps.dim(),
            got: z.len(),
        });
    }
    if let Some(bad) = z.iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return Err(Error::invalid(format!("box corner {bad} is outside [0, 1]")));
    }
    Ok(())
}

/// `A_N(prod [0, z_j)) / N - prod z_j`, counting with multiplicity.
pub fn local_discrepancy(ps: &RationalPointSet, z: &[f64]) -> Result<f64> {
    check_box(ps, z)?;
    let m = ps.modulus() as f64;
    let inside = ps
        .points()
        .filter(|x| x.iter().zip(z).all(|(&v, &zj)| (v as f64 / m) < zj))
        .count();
    Ok(inside as f64 / ps.len() as f64 - z.iter().product::<f64>())
}

/// `A_N(prod [0, z_j]) / N - prod z_j`: the limit of the local discrepancy
/// approaching `z` from above.
pub fn closed_local_discrepancy(ps: &RationalPointSet, z: &[f64]) -> Result<f64> {
    check_box(ps, z)?;
    let m = ps.modulus() as f64;
    let inside = ps
        .points()
        .filter(|x| x.iter().zip(z).all(|(&v, &zj)| (v as f64 / m) <= zj))
        .count();
    Ok(inside as f64 / ps.len() as f64 - z.iter().product::<f64>())
}

/// Exact local discrepancy at a rational corner.
pub fn local_discrepancy_exact(ps: &RationalPointSet, z: &Corner) -> Result<Ratio<i128>> {
    if z.numerators.len() != ps.dim() {
        return Err(Error::DimensionMismatch {
            expected: ps.dim(),
            got: z.numerators.len(),
        });
    }
    if z.modulus != ps.modulus() || z.numerators.iter().any(|&v| v > z.modulus) {
        return Err(Error::invalid("corner must use the point-set modulus and lie in [0, 1]"));
    }
    let arith = ExactArith::new(ps).ok_or_else(|| {
        Error::Overflow("N * M^s does not fit the exact representation".into())
    })?;
    let count = ps
        .points()
        .filter(|x| x.iter().zip(&z.numerators).all(|(v, y)| v < y))
        .count() as u64;
    let vol = z.numerators.iter().fold(arith.one(), |v, &y| arith.mul(v, y));
    Ok(arith.to_ratio(-arith.open(count, vol)))
}

/// `max_u gamma_u |Δ(z_u, 1)|` over nonempty `u` with `gamma_u > 0`.
pub fn weighted_local_discrepancy(ps: &RationalPointSet, w: &Weights, z: &[f64]) -> Result<f64> {
    weighted_local_discrepancy_with_limits(ps, w, z, &Limits::default())
}

pub fn weighted_local_discrepancy_with_limits(
    ps: &RationalPointSet,
    w: &Weights,
    z: &[f64],
    limits: &Limits,
) -> Result<f64> {
    check_box(ps, z)?;
    check_subset_cap(ps.dim(), limits)?;
    let mut best = 0.0f64;
    for mask in masks_descending(ps.dim()) {
        let u = Subset::from_mask(mask);
        let g = w.gamma_of(&u);
        if g == 0.0 {
            continue;
        }
        let zu: Vec<f64> = (0..ps.dim())
            .map(|j| if mask >> j & 1 == 1 { z[j] } else { 1.0 })
            .collect();
        best = best.max(g * local_discrepancy(ps, &zu)?.abs());
    }
    Ok(best)
}

fn check_subset_cap(s: usize, limits: &Limits) -> Result<()> {
    if s > limits.max_subset_dim {
        return Err(Error::CapExceeded {
            what: "coordinate subset enumeration 2^s",
            needed: 2f64.powi(s as i32),
            cap: 1u64 << limits.max_subset_dim.min(63),
        });
    }
    Ok(())
}

// Arithmetic for corner values. `Vol` accumulates the box volume, `Val` is a
// signed one-sided discrepancy.
trait Arith: Sync {
    type Vol: Copy + Send + Sync;
    type Val: Copy + PartialOrd + Send;
    fn one(&self) -> Self::Vol;
    fn mul(&self, v: Self::Vol, numerator: u64) -> Self::Vol;
    /// `A_closed / N - vol`
    fn closed(&self, count: u64, v: Self::Vol) -> Self::Val;
    /// `vol - A_open / N`
    fn open(&self, count: u64, v: Self::Vol) -> Self::Val;
    fn to_f64(&self, v: Self::Val) -> f64;
    fn exact(&self, v: Self::Val) -> Option<Ratio<i128>>;
}

/// Numerators over `N * M^s`.
struct ExactArith {
    n: i128,
    m_pow: i128,
}

impl ExactArith {
    const MAX_BITS: f64 = 124.0;

    fn new(ps: &RationalPointSet) -> Option<Self> {
        let bits = (ps.len() as f64).log2() + ps.dim() as f64 * ((ps.modulus() as f64) + 1.0).log2();
        if bits > Self::MAX_BITS {
            return None;
        }
        let m_pow = (0..ps.dim()).fold(1i128, |acc, _| acc * ps.modulus() as i128);
        Some(ExactArith {
            n: ps.len() as i128,
            m_pow,
        })
    }

    fn to_ratio(&self, v: i128) -> Ratio<i128> {
        Ratio::new(v, self.n * self.m_pow)
    }
}

impl Arith for ExactArith {
    type Vol = i128;
    type Val = i128;
    fn one(&self) -> i128 {
        1
    }
    fn mul(&self, v: i128, numerator: u64) -> i128 {
        v * numerator as i128
    }
    fn closed(&self, count: u64, v: i128) -> i128 {
        count as i128 * self.m_pow - self.n * v
    }
    fn open(&self, count: u64, v: i128) -> i128 {
        self.n * v - count as i128 * self.m_pow
    }
    fn to_f64(&self, v: i128) -> f64 {
        let r = self.to_ratio(v);
        *r.numer() as f64 / *r.denom() as f64
    }
    fn exact(&self, v: i128) -> Option<Ratio<i128>> {
        Some(self.to_ratio(v))
    }
}

struct FloatArith {
    n: f64,
    m: f64,
}

impl Arith for FloatArith {
    type Vol = f64;
    type Val = f64;
    fn one(&self) -> f64 {
        1.0
    }
    fn mul(&self, v: f64, numerator: u64) -> f64 {
        v * (numerator as f64 / self.m)
    }
    fn closed(&self, count: u64, v: f64) -> f64 {
        count as f64 / self.n - v
    }
    fn open(&self, count: u64, v: f64) -> f64 {
        v - count as f64 / self.n
    }
    fn to_f64(&self, v: f64) -> f64 {
        v
    }
    fn exact(&self, _: f64) -> Option<Ratio<i128>> {
        None
    }
}

/// Sorted distinct coordinate values per dimension, each followed by `M`.
fn critical_grid(ps: &RationalPointSet) -> Vec<Vec<u64>> {
    (0..ps.dim())
        .map(|j| {
            let mut c: Vec<u64> = ps.points().map(|x| x[j]).collect();
            c.sort_unstable();
            c.dedup();
            c.push(ps.modulus());
            c
        })
        .collect()
}

#[derive(Clone)]
struct Best<V> {
    val: V,
    corner: Vec<usize>,
    side: Side,
}

fn offer<V: PartialOrd + Copy>(best: &mut Option<Best<V>>, val: V, corner: &[usize], side: Side) {
    if best.as_ref().is_none_or(|b| val > b.val) {
        *best = Some(Best {
            val,
            corner: corner.to_vec(),
            side,
        });
    }
}

// A surviving point: its index and whether every fixed coordinate so far is
// strictly below the corner.
type Survivor = (u32, bool);

struct Search<'a, A: Arith> {
    ps: &'a RationalPointSet,
    grid: &'a [Vec<u64>],
    arith: &'a A,
}

impl<A: Arith> Search<'_, A> {
    fn coord(&self, idx: u32, j: usize) -> u64 {
        self.ps.point(idx as usize)[j]
    }

    /// Depth-first over dimensions `level..s`, survivors filtered per prefix.
    fn descend(
        &self,
        level: usize,
        mut survivors: Vec<Survivor>,
        vol: A::Vol,
        prefix: &mut Vec<usize>,
        best: &mut Option<Best<A::Val>>,
    ) {
        survivors.sort_by_key(|&(i, _)| self.coord(i, level));
        let cands = &self.grid[level];
        let last = level + 1 == self.grid.len();
        let mut le = 0; // survivors[..le] have x <= v
        let mut lt = 0; // survivors[..lt] have x < v
        let mut strict_lt = 0u64;
        for (ci, &v) in cands.iter().enumerate() {
            while le < survivors.len() && self.coord(survivors[le].0, level) <= v {
                le += 1;
            }
            while lt < survivors.len() && self.coord(survivors[lt].0, level) < v {
                strict_lt += survivors[lt].1 as u64;
                lt += 1;
            }
            let vol_here = self.arith.mul(vol, v);
            prefix.push(ci);
            if last {
                offer(best, self.arith.closed(le as u64, vol_here), prefix, Side::Closed);
                offer(best, self.arith.open(strict_lt, vol_here), prefix, Side::Open);
            } else {
                let child = survivors[..le]
                    .iter()
                    .map(|&(i, strict)| (i, strict && self.coord(i, level) < v))
                    .collect();
                self.descend(level + 1, child, vol_here, prefix, best);
            }
            prefix.pop();
        }
    }

    fn run(&self) -> Best<A::Val> {
        let all: Vec<Survivor> = (0..self.ps.len() as u32).map(|i| (i, true)).collect();
        if self.grid.len() == 1 {
            let mut best = None;
            self.descend(0, all, self.arith.one(), &mut Vec::new(), &mut best);
            return best.expect("grid is nonempty");
        }
        // Branch on the first coordinate in parallel; reduce in candidate order
        // so ties resolve to the lexicographically first corner.
        let mut sorted = all;
        sorted.sort_by_key(|&(i, _)| self.coord(i, 0));
        let branches: Vec<Option<Best<A::Val>>> = self.grid[0]
            .par_iter()
            .enumerate()
            .map(|(ci, &v)| {
                let child: Vec<Survivor> = sorted
                    .iter()
                    .take_while(|&&(i, _)| self.coord(i, 0) <= v)
                    .map(|&(i, _)| (i, self.coord(i, 0) < v))
                    .collect();
                let mut best = None;
                let mut prefix = vec![ci];
                self.descend(1, child, self.arith.mul(self.arith.one(), v), &mut prefix, &mut best);
                best
            })
            .collect();
        let mut best: Option<Best<A::Val>> = None;
        for b in branches.into_iter().flatten() {
            if best.as_ref().is_none_or(|cur| b.val > cur.val) {
                best = Some(b);
            }
        }
        best.expect("grid is nonempty")
    }
}

fn finish<A: Arith>(ps: &RationalPointSet, grid: &[Vec<u64>], arith: &A, best: Best<A::Val>) -> DiscrepancyResult {
    DiscrepancyResult {
        value: arith.to_f64(best.val),
        exact: arith.exact(best.val),
        witness: Corner {
            numerators: best
                .corner
                .iter()
                .enumerate()
                .map(|(j, &ci)| grid[j][ci])
                .collect(),
            modulus: ps.modulus(),
        },
        side: best.side,
    }
}

/// Number of critical corners the exact algorithm visits.
pub fn corner_count(ps: &RationalPointSet) -> f64 {
    critical_grid(ps).iter().map(|c| c.len() as f64).product()
}

/// Exact star discrepancy with the default corner budget.
pub fn star_discrepancy_exact(ps: &RationalPointSet) -> Result<DiscrepancyResult> {
    star_discrepancy_exact_with_limits(ps, &Limits::default())
}

pub fn star_discrepancy_exact_with_limits(
    ps: &RationalPointSet,
    limits: &Limits,
) -> Result<DiscrepancyResult> {
    let grid = critical_grid(ps);
    let corners: f64 = grid.iter().map(|c| c.len() as f64).product();
    if corners > limits.max_corner_ops as f64 {
        return Err(Error::CapExceeded {
            what: "exact star discrepancy corner enumeration",
            needed: corners,
            cap: limits.max_corner_ops,
        });
    }
    if let Some(arith) = ExactArith::new(ps) {
        let best = Search { ps, grid: &grid, arith: &arith }.run();
        Ok(finish(ps, &grid, &arith, best))
    } else {
        let arith = FloatArith {
            n: ps.len() as f64,
            m: ps.modulus() as f64,
        };
        let best = Search { ps, grid: &grid, arith: &arith }.run();
        Ok(finish(ps, &grid, &arith, best))
    }
}

/// Exact `max_u gamma_u D*(P_u)` over subsets with nonzero weight.
///
/// Subsets are visited from the full set downwards (bit-mask order); the
/// first strict maximum wins, so with equal weights the full set is reported.
pub fn weighted_star_discrepancy_exact(
    ps: &RationalPointSet,
    w: &Weights,
) -> Result<WeightedDiscrepancy> {
    weighted_star_discrepancy_exact_with_limits(ps, w, &Limits::default())
}

pub fn weighted_star_discrepancy_exact_with_limits(
    ps: &RationalPointSet,
    w: &Weights,
    limits: &Limits,
) -> Result<WeightedDiscrepancy> {
    check_subset_cap(ps.dim(), limits)?;
    let mut out = WeightedDiscrepancy {
        value: 0.0,
        subset: None,
        projected: None,
    };
    for mask in masks_descending(ps.dim()) {
        let u = Subset::from_mask(mask);
        let g = w.gamma_of(&u);
        if g == 0.0 {
            continue;
        }
        let r = star_discrepancy_exact_with_limits(&ps.project(&u)?, limits)?;
        let v = g * r.value;
        if out.subset.is_none() || v > out.value {
            out = WeightedDiscrepancy {
                value: v,
                subset: Some(u),
                projected: Some(r),
            };
        }
    }
    Ok(out)
}

/// Lower bound for `D*` from sampled boxes.
///
/// Evaluates both one-sided limits at every point's own corner, then at
/// `trials` pseudorandom boxes (alternating random critical corners and
/// uniform real corners), and finally improves the best corner by
/// coordinate-wise ascent over the critical grid. Every value evaluated is
/// attained (or approached) by some anchored box, so the result never
/// exceeds `D*`.
pub fn star_discrepancy_sampled_lb(ps: &RationalPointSet, trials: u64, seed: u64) -> Result<f64> {
    if trials == 0 {
        return Err(Error::invalid("trials must be at least 1"));
    }
    match ExactArith::new(ps) {
        Some(arith) => Ok(sampled(ps, trials, seed, &arith)),
        None => {
            let arith = FloatArith {
                n: ps.len() as f64,
                m: ps.modulus() as f64,
            };
            Ok(sampled(ps, trials, seed, &arith))
        }
    }
}

fn corner_values<A: Arith>(ps: &RationalPointSet, arith: &A, y: &[u64]) -> (A::Val, A::Val) {
    let mut closed = 0u64;
    let mut open = 0u64;
    for x in ps.points() {
        let mut le = true;
        let mut lt = true;
        for (v, yj) in x.iter().zip(y) {
            le &= v <= yj;
            lt &= v < yj;
        }
        closed += le as u64;
        open += lt as u64;
    }
    let vol = y.iter().fold(arith.one(), |v, &yj| arith.mul(v, yj));
    (arith.closed(closed, vol), arith.open(open, vol))
}

fn sampled<A: Arith>(ps: &RationalPointSet, trials: u64, seed: u64, arith: &A) -> f64 {
    let grid = critical_grid(ps);
    let s = ps.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut best_val = None::<A::Val>;
    let mut best_corner = vec![0usize; s];
    let consider = |idx: &[usize], best_val: &mut Option<A::Val>, best_corner: &mut Vec<usize>| {
        let y: Vec<u64> = idx.iter().enumerate().map(|(j, &c)| grid[j][c]).collect();
        let (c, o) = corner_values(ps, arith, &y);
        let v = if c > o { c } else { o };
        if best_val.is_none_or(|b| v > b) {
            *best_val = Some(v);
            best_corner.copy_from_slice(idx);
        }
    };

    for x in ps.points() {
        let idx: Vec<usize> = x
            .iter()
            .enumerate()
            .map(|(j, v)| grid[j].binary_search(v).expect("coordinate is on the grid"))
            .collect();
        consider(&idx, &mut best_val, &mut best_corner);
    }

    let mut uniform_best = 0.0f64;
    let mut z = vec![0.0; s];
    let mut idx = vec![0usize; s];
    for t in 0..trials {
        if t % 2 == 0 {
            for (j, i) in idx.iter_mut().enumerate() {
                *i = rng.gen_range(0..grid[j].len());
            }
            consider(&idx, &mut best_val, &mut best_corner);
        } else {
            for zj in z.iter_mut() {
                *zj = rng.gen::<f64>();
            }
            let d = local_discrepancy(ps, &z).expect("box is valid");
            uniform_best = uniform_best.max(d.abs());
        }
    }

    // coordinate ascent from the best corner found
    let mut cur = best_corner.clone();
    loop {
        let before = best_val;
        for j in 0..s {
            for c in 0..grid[j].len() {
                let mut trial = cur.clone();
                trial[j] = c;
                consider(&trial, &mut best_val, &mut best_corner);
            }
            cur.copy_from_slice(&best_corner);
        }
        let improved = match (before, best_val) {
            (Some(b), Some(a)) => a > b,
            _ => false,
        };
        if !improved {
            break;
        }
    }

    let grid_best = best_val.map_or(0.0, |v| arith.to_f64(v));
    grid_best.max(uniform_best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numtheory::Prime;
    use crate::pointset::{generate, PSetKind};
    use crate::weights::Weights;
    use proptest::prelude::*;

    fn kp(p: u64, s: usize) -> RationalPointSet {
        generate(PSetKind::KorobovP, Prime::new(p).unwrap(), s).unwrap()
    }

    /// Brute force over every corner of `{0, 1/M, ..., 1}^s` with both
    /// one-sided limits; independent of the critical-grid search.
    fn brute_force(ps: &RationalPointSet) -> Ratio<i128> {
        let s = ps.dim();
        let m = ps.modulus();
        let n = ps.len() as i128;
        let m_pow = (0..s).fold(1i128, |a, _| a * m as i128);
        let mut best = Ratio::from_integer(0);
        let mut y = vec![0u64; s];
        loop {
            let vol: i128 = y.iter().map(|&v| v as i128).product();
            let closed = ps.points().filter(|x| x.iter().zip(&y).all(|(a, b)| a <= b)).count() as i128;
            let open = ps.points().filter(|x| x.iter().zip(&y).all(|(a, b)| a < b)).count() as i128;
            best = best.max(Ratio::new(closed * m_pow - n * vol, n * m_pow));
            best = best.max(Ratio::new(n * vol - open * m_pow, n * m_pow));
            let mut j = 0;
            loop {
                if j == s {
                    return best;
                }
                y[j] += 1;
                if y[j] <= m {
                    break;
                }
                y[j] = 0;
                j += 1;
            }
        }
    }

    #[test]
    fn local_discrepancy_examples() {
        let ps = kp(5, 2);
        assert_eq!(local_discrepancy(&ps, &[1.0, 1.0]).unwrap(), 0.0);
        let origin = RationalPointSet::new(4, 2, vec![vec![0, 0]]).unwrap();
        assert_eq!(local_discrepancy(&origin, &[0.5, 0.5]).unwrap(), 0.75);
        let line = kp(5, 1);
        assert!((local_discrepancy(&line, &[0.3]).unwrap() - 0.1).abs() < 1e-15);
        assert_eq!(local_discrepancy(&line, &[0.0]).unwrap(), 0.0);
        assert!(local_discrepancy(&line, &[0.3, 0.3]).is_err());
        assert!(local_discrepancy(&line, &[1.5]).is_err());
    }

    #[test]
    fn exact_local_discrepancy_at_corner() {
        let line = kp(5, 1);
        let z = Corner {
            numerators: vec![2],
            modulus: 5,
        };
        // points 0 and 1/5 lie in [0, 2/5)
        assert_eq!(local_discrepancy_exact(&line, &z).unwrap(), Ratio::new(0, 1));
        let z = Corner {
            numerators: vec![3],
            modulus: 5,
        };
        assert_eq!(local_discrepancy_exact(&line, &z).unwrap(), Ratio::new(0, 1));
        let origin = RationalPointSet::new(2, 2, vec![vec![0, 0]]).unwrap();
        let z = Corner {
            numerators: vec![1, 1],
            modulus: 2,
        };
        assert_eq!(local_discrepancy_exact(&origin, &z).unwrap(), Ratio::new(3, 4));
    }

    #[test]
    fn equispaced_line() {
        for p in [2u64, 3, 5, 7, 11, 97] {
            let r = star_discrepancy_exact(&kp(p, 1)).unwrap();
            assert_eq!(r.exact, Some(Ratio::new(1, p as i128)));
            assert_eq!(r.value, 1.0 / p as f64);
        }
    }

    #[test]
    fn single_point_at_origin() {
        let ps = RationalPointSet::new(3, 2, vec![vec![0, 0]]).unwrap();
        let r = star_discrepancy_exact(&ps).unwrap();
        assert_eq!(r.value, 1.0);
        assert_eq!(r.side, Side::Closed);
        assert_eq!(r.witness.numerators, vec![0, 0]);
        assert_eq!(r.recompute(&ps).unwrap(), 1.0);
    }

    #[test]
    fn korobov_5_2_against_brute_force() {
        let ps = kp(5, 2);
        let r = star_discrepancy_exact(&ps).unwrap();
        assert_eq!(r.exact.unwrap(), brute_force(&ps));
        // frozen from an independent rational brute force: D*(P_{5,2}) = 11/25
        assert_eq!(r.exact.unwrap(), Ratio::new(11, 25));
        assert!((r.recompute(&ps).unwrap() - r.value).abs() < 1e-12);
        let lb = star_discrepancy_sampled_lb(&ps, 100_000, 7).unwrap();
        assert!(lb <= r.value);
        assert!(r.value - lb < 1e-2);
    }

    #[test]
    fn all_kinds_match_brute_force() {
        for kind in PSetKind::ALL {
            for (p, s) in [(2u64, 2usize), (3, 2), (3, 3), (5, 2), (2, 4)] {
                let ps = generate(kind, Prime::new(p).unwrap(), s).unwrap();
                let r = star_discrepancy_exact(&ps).unwrap();
                assert_eq!(r.exact.unwrap(), brute_force(&ps), "{kind} p={p} s={s}");
                assert!((r.recompute(&ps).unwrap() - r.value).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn float_mode_agrees_with_exact_mode() {
        let ps = generate(PSetKind::HuaWangR, Prime::new(7).unwrap(), 3).unwrap();
        let grid = critical_grid(&ps);
        let exact = ExactArith::new(&ps).unwrap();
        let float = FloatArith {
            n: ps.len() as f64,
            m: ps.modulus() as f64,
        };
        let a = finish(&ps, &grid, &exact, Search { ps: &ps, grid: &grid, arith: &exact }.run());
        let b = finish(&ps, &grid, &float, Search { ps: &ps, grid: &grid, arith: &float }.run());
        assert!((a.value - b.value).abs() < 1e-12);
        assert!(b.exact.is_none());
    }

    #[test]
    fn corner_budget() {
        // 14 * 8 * 6 = 672 corners: squares and cubes mod 13 take 7 and 5 values
        let ps = kp(13, 3);
        assert_eq!(corner_count(&ps), 672.0);
        let limits = Limits {
            max_corner_ops: 671,
            ..Limits::default()
        };
        assert!(matches!(
            star_discrepancy_exact_with_limits(&ps, &limits),
            Err(Error::CapExceeded { .. })
        ));
    }

    #[test]
    fn sampled_needs_trials() {
        assert!(star_discrepancy_sampled_lb(&kp(5, 2), 0, 1).is_err());
    }

    #[test]
    fn sampled_close_on_p7() {
        let ps = kp(7, 2);
        let exact = star_discrepancy_exact(&ps).unwrap().value;
        let lb = star_discrepancy_sampled_lb(&ps, 100_000, 42).unwrap();
        assert!(lb <= exact && exact - lb < 1e-2, "{lb} vs {exact}");
    }

    #[test]
    fn weighted_examples() {
        let ps = kp(5, 2);
        let ones = Weights::unit(2);
        assert_eq!(weighted_local_discrepancy(&ps, &ones, &[1.0, 1.0]).unwrap(), 0.0);

        let only_first = Weights::general([(Subset::new(vec![1]).unwrap(), 1.0)]).unwrap();
        let z = [0.3, 0.7];
        let got = weighted_local_discrepancy(&ps, &only_first, &z).unwrap();
        assert_eq!(got, local_discrepancy(&ps, &[0.3, 1.0]).unwrap().abs());

        let w = weighted_star_discrepancy_exact(&kp(7, 3), &only_first).unwrap();
        assert_eq!(w.value, 1.0 / 7.0);
        assert_eq!(w.subset.unwrap().indices(), &[1]);
    }

    #[test]
    fn weighted_local_geometric_on_p5() {
        // Oracle: direct counting on each of the three boxes.
        // u = {1}:   box [0, .3) x [0, 1): points with n/5 < .3 -> n in {0, 1}: 2/5 - .3 = .1
        // u = {2}:   box [0, 1) x [0, .3): n^2 mod 5 in {0, 1} -> n in {0, 1, 4}: 3/5 - .3 = .3
        // u = {1,2}: both: n in {0, 1}: 2/5 - .09 = .31
        // weights 1/2, 1/4, 1/8 -> max(.05, .075, .03875) = .075
        let ps = kp(5, 2);
        let w = Weights::geometric(0.5).unwrap();
        let got = weighted_local_discrepancy(&ps, &w, &[0.3, 0.3]).unwrap();
        assert!((got - 0.075).abs() < 1e-15, "{got}");
    }

    #[test]
    fn weighted_exact_geometric_on_p5() {
        let ps = kp(5, 2);
        let w = Weights::geometric(0.5).unwrap();
        let got = weighted_star_discrepancy_exact(&ps, &w).unwrap();
        // Oracle: gamma_u * brute-force D* of each projection.
        let mut oracle = 0.0f64;
        for mask in 1..4u64 {
            let u = Subset::from_mask(mask);
            let d = brute_force(&ps.project(&u).unwrap());
            let d = *d.numer() as f64 / *d.denom() as f64;
            oracle = oracle.max(w.gamma_of(&u) * d);
        }
        assert_eq!(got.value, oracle);
        // projections: D*({1}) = 1/5, D*({2}) = 2/5 (values 0,1,4,4,1), D*({1,2}) = 11/25
        // -> max(0.1, 0.1, 0.055) = 0.1; ties keep the first mask visited, {2}
        assert!((got.value - 0.1).abs() < 1e-15);
        assert_eq!(got.subset.as_ref().unwrap().indices(), &[2]);
        let witness = got.full_witness(2).unwrap();
        assert_eq!(witness.numerators[0], 5);
    }

    #[test]
    fn unit_weights_reduce_to_classical() {
        for kind in PSetKind::ALL {
            let ps = generate(kind, Prime::new(5).unwrap(), 3).unwrap();
            let classical = star_discrepancy_exact(&ps).unwrap().value;
            let w = weighted_star_discrepancy_exact(&ps, &Weights::unit(3)).unwrap();
            assert_eq!(w.value, classical, "{kind}");
            assert_eq!(w.subset.unwrap(), Subset::full(3));
        }
    }

    #[test]
    fn zero_weights() {
        let w = Weights::general(Vec::new()).unwrap();
        let r = weighted_star_discrepancy_exact(&kp(5, 2), &w).unwrap();
        assert_eq!(r.value, 0.0);
        assert!(r.subset.is_none());
    }

    #[test]
    fn subset_cap() {
        let ps = kp(3, 3);
        let limits = Limits {
            max_subset_dim: 2,
            ..Limits::default()
        };
        assert!(weighted_star_discrepancy_exact_with_limits(&ps, &Weights::unit(3), &limits).is_err());
    }

    fn arb_points() -> impl Strategy<Value = RationalPointSet> {
        (2u64..9, 1usize..4).prop_flat_map(|(m, s)| {
            proptest::collection::vec(proptest::collection::vec(0..m, s), 1..9)
                .prop_map(move |rows| RationalPointSet::new(m, s, rows).unwrap())
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn exact_matches_brute_force_on_random_multisets(ps in arb_points()) {
            let r = star_discrepancy_exact(&ps).unwrap();
            prop_assert_eq!(r.exact.unwrap(), brute_force(&ps));
            prop_assert!(r.value > 0.0 && r.value <= 1.0);
            prop_assert!((r.recompute(&ps).unwrap() - r.value).abs() < 1e-12);
        }

        #[test]
        fn sampled_never_exceeds_exact(ps in arb_points(), seed in any::<u64>()) {
            let exact = star_discrepancy_exact(&ps).unwrap().value;
            let lb = star_discrepancy_sampled_lb(&ps, 200, seed).unwrap();
            prop_assert!(lb <= exact, "{} > {}", lb, exact);
        }

        #[test]
        fn projections_never_increase_discrepancy(ps in arb_points(), mask in 1u64..8) {
            let u = Subset::from_mask(mask & ((1 << ps.dim()) - 1) | 1);
            let full = star_discrepancy_exact(&ps).unwrap().exact.unwrap();
            let proj = star_discrepancy_exact(&ps.project(&u).unwrap()).unwrap().exact.unwrap();
            prop_assert!(proj <= full);
        }

        #[test]
        fn weight_scaling_is_linear(ps in arb_points(), lambda_exp in -3i32..4) {
            let lambda = 2f64.powi(lambda_exp);
            let w = Weights::geometric(0.5).unwrap();
            let a = weighted_star_discrepancy_exact(&ps, &w).unwrap();
            let scaled = w.scaled_general(ps.dim(), lambda).unwrap();
            let b = weighted_star_discrepancy_exact(&ps, &scaled).unwrap();
            prop_assert_eq!(b.value, lambda * a.value);
            prop_assert_eq!(a.subset, b.subset);
        }
    }
}
