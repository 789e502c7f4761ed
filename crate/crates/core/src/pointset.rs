//! Exact p-set construction.
//!
//! Points are kept as integer numerators over a common modulus `M`; the
//! coordinate `j` of point `n` is `numerator(n, j) / M`. Duplicate points are
//! preserved, since the Hua–Wang set is a multiset.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::limits::Limits;
use crate::numtheory::Prime;
use crate::subset::Subset;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PSetKind {
    /// `(n, n^2, ..., n^s) / p` for `n < p`.
    KorobovP,
    /// `(n, n^2, ..., n^s) / p^2` for `n < p^2`.
    KorobovQ,
    /// `(k, a k, ..., a^(s-1) k) / p` for `a, k < p`.
    HuaWangR,
}

impl PSetKind {
    pub const ALL: [PSetKind; 3] = [PSetKind::KorobovP, PSetKind::KorobovQ, PSetKind::HuaWangR];

    /// Number of points for prime `p`.
    pub fn point_count(self, p: u64) -> u128 {
        match self {
            PSetKind::KorobovP => p as u128,
            PSetKind::KorobovQ | PSetKind::HuaWangR => p as u128 * p as u128,
        }
    }

    /// Common denominator of the coordinates for prime `p`.
    pub fn modulus(self, p: u64) -> u128 {
        match self {
            PSetKind::KorobovP | PSetKind::HuaWangR => p as u128,
            PSetKind::KorobovQ => p as u128 * p as u128,
        }
    }

    pub fn letter(self) -> char {
        match self {
            PSetKind::KorobovP => 'P',
            PSetKind::KorobovQ => 'Q',
            PSetKind::HuaWangR => 'R',
        }
    }
}

impl fmt::Display for PSetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

impl FromStr for PSetKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "P" | "p" => Ok(PSetKind::KorobovP),
            "Q" | "q" => Ok(PSetKind::KorobovQ),
            "R" | "r" => Ok(PSetKind::HuaWangR),
            other => Err(Error::invalid(format!("unknown p-set kind {other:?} (expected P, Q or R)"))),
        }
    }
}

/// A multiset of `N` points in `[0,1)^s` with coordinates `numerator / modulus`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalPointSet {
    modulus: u64,
    dim: usize,
    // row-major, N * dim entries
    numerators: Vec<u64>,
    kind: Option<PSetKind>,
}

impl RationalPointSet {
    /// Builds a point set from explicit numerator rows.
    pub fn new(modulus: u64, dim: usize, points: Vec<Vec<u64>>) -> Result<Self> {
        let mut flat = Vec::with_capacity(points.len() * dim);
        for row in &points {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: row.len(),
                });
            }
            flat.extend_from_slice(row);
        }
        Self::from_flat(modulus, dim, flat)
    }

    pub fn from_flat(modulus: u64, dim: usize, numerators: Vec<u64>) -> Result<Self> {
        if modulus < 1 {
            return Err(Error::invalid("modulus must be positive"));
        }
        if dim < 1 {
            return Err(Error::invalid("dimension must be at least 1"));
        }
        if numerators.is_empty() || !numerators.len().is_multiple_of(dim) {
            return Err(Error::invalid("point set needs at least one full point"));
        }
        if let Some(bad) = numerators.iter().find(|&&v| v >= modulus) {
            return Err(Error::invalid(format!(
                "numerator {bad} is outside [0, {modulus})"
            )));
        }
        Ok(RationalPointSet {
            modulus,
            dim,
            numerators,
            kind: None,
        })
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.numerators.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.numerators.is_empty()
    }

    pub fn kind(&self) -> Option<PSetKind> {
        self.kind
    }

    pub fn point(&self, n: usize) -> &[u64] {
        &self.numerators[n * self.dim..(n + 1) * self.dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[u64]> + '_ {
        self.numerators.chunks_exact(self.dim)
    }

    /// Coordinate `j` (0-based) of point `n` as a float.
    pub fn coordinate(&self, n: usize, j: usize) -> f64 {
        self.numerators[n * self.dim + j] as f64 / self.modulus as f64
    }

    /// Keeps the coordinates listed in `u` (1-based), in increasing order.
    pub fn project(&self, u: &Subset) -> Result<RationalPointSet> {
        if u.max() > self.dim {
            return Err(Error::invalid(format!(
                "subset {{{u}}} is not contained in [{}]",
                self.dim
            )));
        }
        let cols: Vec<usize> = u.indices().iter().map(|j| j - 1).collect();
        let numerators = self
            .points()
            .flat_map(|x| cols.iter().map(move |&c| x[c]))
            .collect();
        Ok(RationalPointSet {
            modulus: self.modulus,
            dim: cols.len(),
            numerators,
            kind: if cols.len() == self.dim { self.kind } else { None },
        })
    }
}

/// Generates a p-set with the default size cap.
pub fn generate(kind: PSetKind, p: Prime, s: usize) -> Result<RationalPointSet> {
    generate_with_limits(kind, p, s, &Limits::default())
}

pub fn generate_with_limits(
    kind: PSetKind,
    p: Prime,
    s: usize,
    limits: &Limits,
) -> Result<RationalPointSet> {
    if s < 1 {
        return Err(Error::invalid("dimension must be at least 1"));
    }
    let p = p.get();
    let n = kind.point_count(p);
    let entries = n as f64 * s as f64;
    if entries > limits.max_entries as f64 {
        return Err(Error::CapExceeded {
            what: "point set size N*s",
            needed: entries,
            cap: limits.max_entries,
        });
    }
    let n = n as usize;
    let m = kind.modulus(p) as u64;
    let mut numerators = Vec::with_capacity(n * s);
    match kind {
        PSetKind::KorobovP | PSetKind::KorobovQ => {
            for i in 0..m {
                let mut pow = 1u64;
                for _ in 0..s {
                    pow = mul_mod(pow, i, m);
                    numerators.push(pow);
                }
            }
        }
        PSetKind::HuaWangR => {
            for a in 0..p {
                for k in 0..p {
                    let mut v = k % m;
                    for _ in 0..s {
                        numerators.push(v);
                        v = mul_mod(v, a, m);
                    }
                }
            }
        }
    }
    let mut ps = RationalPointSet::from_flat(m, s, numerators)?;
    ps.kind = Some(kind);
    Ok(ps)
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn prime(p: u64) -> Prime {
        Prime::new(p).unwrap()
    }

    fn rows(ps: &RationalPointSet) -> Vec<Vec<u64>> {
        ps.points().map(|x| x.to_vec()).collect()
    }

    #[test]
    fn korobov_p_5_2() {
        let ps = generate(PSetKind::KorobovP, prime(5), 2).unwrap();
        assert_eq!(ps.modulus(), 5);
        assert_eq!(
            rows(&ps),
            vec![vec![0, 0], vec![1, 1], vec![2, 4], vec![3, 4], vec![4, 1]]
        );
    }

    #[test]
    fn korobov_q_2_2() {
        let ps = generate(PSetKind::KorobovQ, prime(2), 2).unwrap();
        assert_eq!(ps.modulus(), 4);
        assert_eq!(rows(&ps), vec![vec![0, 0], vec![1, 1], vec![2, 0], vec![3, 1]]);
    }

    #[test]
    fn hua_wang_2_2() {
        let ps = generate(PSetKind::HuaWangR, prime(2), 2).unwrap();
        assert_eq!(ps.modulus(), 2);
        assert_eq!(rows(&ps), vec![vec![0, 0], vec![1, 0], vec![0, 0], vec![1, 1]]);
    }

    #[test]
    fn projections() {
        let ps = generate(PSetKind::KorobovP, prime(5), 2).unwrap();
        let first = ps.project(&Subset::new(vec![1]).unwrap()).unwrap();
        assert_eq!(rows(&first), vec![vec![0], vec![1], vec![2], vec![3], vec![4]]);
        assert_eq!(ps.project(&Subset::full(2)).unwrap(), ps);

        let r = generate(PSetKind::HuaWangR, prime(2), 2).unwrap();
        let second = r.project(&Subset::new(vec![2]).unwrap()).unwrap();
        assert_eq!(rows(&second), vec![vec![0], vec![0], vec![0], vec![1]]);
        assert_eq!(second.len(), 4);

        assert!(ps.project(&Subset::new(vec![3]).unwrap()).is_err());
    }

    #[test]
    fn nested_projection_composes() {
        let ps = generate(PSetKind::KorobovQ, prime(3), 5).unwrap();
        let u = Subset::new(vec![1, 3, 4, 5]).unwrap();
        // v picks positions 2 and 4 of u, i.e. coordinates 3 and 5
        let v = Subset::new(vec![2, 4]).unwrap();
        let composed = Subset::new(vec![3, 5]).unwrap();
        assert_eq!(
            ps.project(&u).unwrap().project(&v).unwrap(),
            ps.project(&composed).unwrap()
        );
    }

    #[test]
    fn one_dimensional_sets_are_equispaced() {
        for p in [2u64, 3, 5, 7, 11] {
            let ps = generate(PSetKind::KorobovP, prime(p), 1).unwrap();
            assert_eq!(rows(&ps), (0..p).map(|n| vec![n]).collect::<Vec<_>>());
            let q = generate(PSetKind::KorobovQ, prime(p), 1).unwrap();
            assert_eq!(rows(&q), (0..p * p).map(|n| vec![n]).collect::<Vec<_>>());
            let r = generate(PSetKind::HuaWangR, prime(p), 1).unwrap();
            let mut counts = vec![0u64; p as usize];
            for x in r.points() {
                counts[x[0] as usize] += 1;
            }
            assert!(counts.iter().all(|&c| c == p));
        }
    }

    #[test]
    fn numerators_in_range_and_sizes_match_kind() {
        for kind in PSetKind::ALL {
            for p in [2u64, 3, 5, 7, 13] {
                for s in 1..=4 {
                    let ps = generate(kind, prime(p), s).unwrap();
                    assert_eq!(ps.len() as u128, kind.point_count(p));
                    assert_eq!(ps.modulus() as u128, kind.modulus(p));
                    assert!(ps.points().all(|x| x.iter().all(|&v| v < ps.modulus())));
                    if kind == PSetKind::KorobovP {
                        assert!(ps.point(0).iter().all(|&v| v == 0));
                    }
                }
            }
        }
    }

    #[test]
    fn size_cap_is_enforced() {
        let limits = Limits {
            max_entries: 100,
            ..Limits::default()
        };
        assert!(generate_with_limits(PSetKind::KorobovQ, prime(11), 1, &limits).is_err());
        assert!(generate_with_limits(PSetKind::KorobovP, prime(11), 9, &limits).is_ok());
    }

    #[test]
    fn rejects_bad_input() {
        assert!(Prime::new(4).is_err());
        assert!(generate(PSetKind::KorobovP, prime(5), 0).is_err());
        assert!(RationalPointSet::new(5, 2, vec![vec![5, 0]]).is_err());
        assert!(RationalPointSet::new(5, 2, vec![vec![1]]).is_err());
        assert!("X".parse::<PSetKind>().is_err());
        assert_eq!("Q".parse::<PSetKind>().unwrap(), PSetKind::KorobovQ);
    }
}
