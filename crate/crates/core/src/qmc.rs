//! Quasi-Monte Carlo integration of a product test family, checked against
//! the Koksma–Hlawka inequality `|error| <= D* V(f)`.

use crate::bounds::thm1_bound_with_limits;
use crate::discrepancy::star_discrepancy_exact_with_limits;
use crate::error::{Error, Result};
use crate::limits::Limits;
use crate::numtheory::Prime;
use crate::pointset::{generate_with_limits, PSetKind, RationalPointSet};
use crate::weights::Weights;

/// `f(x) = prod_j (1 + c_j (x_j - 1/2))`, whose integral over the unit cube is 1.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductIntegrand {
    coeffs: Vec<f64>,
}

impl ProductIntegrand {
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::invalid("integrand needs at least one coefficient"));
        }
        if let Some(c) = coeffs.iter().find(|c| !c.is_finite()) {
            return Err(Error::invalid(format!("coefficient {c} is not finite")));
        }
        Ok(ProductIntegrand { coeffs })
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.coeffs
            .iter()
            .zip(x)
            .map(|(c, xj)| 1.0 + c * (xj - 0.5))
            .product()
    }

    pub fn integral(&self) -> f64 {
        1.0
    }
}

/// Hardy–Krause variation of the product integrand:
/// `prod_j (|c_j| + 1 + |c_j|/2) - prod_j (1 + |c_j|/2)`.
pub fn hk_variation(f: &ProductIntegrand) -> f64 {
    let full: f64 = f.coeffs.iter().map(|c| 1.5 * c.abs() + 1.0).product();
    let base: f64 = f.coeffs.iter().map(|c| 1.0 + 0.5 * c.abs()).product();
    full - base
}

/// Neumaier's compensated sum.
#[derive(Default)]
struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QmcEstimate {
    pub estimate: f64,
    pub abs_error: f64,
}

/// Equal-weight rule `N^(-1) sum_n f(x_n)`.
pub fn qmc_integrate(ps: &RationalPointSet, f: &ProductIntegrand) -> Result<QmcEstimate> {
    if ps.dim() != f.dim() {
        return Err(Error::DimensionMismatch {
            expected: ps.dim(),
            got: f.dim(),
        });
    }
    let m = ps.modulus() as f64;
    let mut acc = CompensatedSum::default();
    let mut x = vec![0.0; ps.dim()];
    for point in ps.points() {
        for (xj, &num) in x.iter_mut().zip(point) {
            *xj = num as f64 / m;
        }
        acc.add(f.eval(&x));
    }
    let estimate = acc.total() / ps.len() as f64;
    Ok(QmcEstimate {
        estimate,
        abs_error: (estimate - f.integral()).abs(),
    })
}

/// Where the discrepancy factor of the error bound came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KhSource {
    /// Exact star discrepancy.
    Exact,
    /// Closed-form bound with unit weights, used past the enumeration caps.
    ClosedForm,
}

impl KhSource {
    pub fn label(self) -> &'static str {
        match self {
            KhSource::Exact => "exact",
            KhSource::ClosedForm => "thm1",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceRow {
    pub p: u64,
    pub n: usize,
    pub estimate: f64,
    pub abs_error: f64,
    pub dstar: Option<f64>,
    pub kh_bound: f64,
    pub kh_source: KhSource,
}

/// One row per prime: the QMC error next to its Koksma–Hlawka bound.
pub fn convergence_table(
    kind: PSetKind,
    s: usize,
    f: &ProductIntegrand,
    primes: &[Prime],
) -> Result<Vec<ConvergenceRow>> {
    convergence_table_with_limits(kind, s, f, primes, &Limits::default())
}

pub fn convergence_table_with_limits(
    kind: PSetKind,
    s: usize,
    f: &ProductIntegrand,
    primes: &[Prime],
    limits: &Limits,
) -> Result<Vec<ConvergenceRow>> {
    let v = hk_variation(f);
    primes
        .iter()
        .map(|&p| {
            let ps = generate_with_limits(kind, p, s, limits)?;
            let q = qmc_integrate(&ps, f)?;
            let (dstar, kh_bound, kh_source) = match star_discrepancy_exact_with_limits(&ps, limits) {
                Ok(d) => (Some(d.value), d.value * v, KhSource::Exact),
                Err(Error::CapExceeded { .. }) => {
                    let b = thm1_bound_with_limits(kind, p, s, &Weights::unit(s), limits)?;
                    (None, b.value * v, KhSource::ClosedForm)
                }
                Err(e) => return Err(e),
            };
            Ok(ConvergenceRow {
                p: p.get(),
                n: ps.len(),
                estimate: q.estimate,
                abs_error: q.abs_error,
                dstar,
                kh_bound,
                kh_source,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pointset::generate;
    use crate::subset::{masks_descending, Subset};
    use proptest::prelude::*;

    fn prime(p: u64) -> Prime {
        Prime::new(p).unwrap()
    }

    fn integrand(c: &[f64]) -> ProductIntegrand {
        ProductIntegrand::new(c.to_vec()).unwrap()
    }

    fn variation_by_subsets(c: &[f64]) -> f64 {
        masks_descending(c.len())
            .map(Subset::from_mask)
            .map(|u| {
                (1..=c.len())
                    .map(|j| {
                        let a = c[j - 1].abs();
                        if u.contains(j) {
                            a
                        } else {
                            1.0 + a / 2.0
                        }
                    })
                    .product::<f64>()
            })
            .sum()
    }

    #[test]
    fn variation_examples() {
        assert_eq!(hk_variation(&integrand(&[0.0, 0.0, 0.0])), 0.0);
        assert_eq!(hk_variation(&integrand(&[2.0])), 2.0);
        assert_eq!(hk_variation(&integrand(&[1.0, 1.0])), 4.0);
        assert_eq!(variation_by_subsets(&[1.0, 1.0]), 4.0);
    }

    #[test]
    fn constant_integrand_is_exact() {
        for kind in PSetKind::ALL {
            let ps = generate(kind, prime(7), 3).unwrap();
            let q = qmc_integrate(&ps, &integrand(&[0.0, 0.0, 0.0])).unwrap();
            assert_eq!(q.estimate, 1.0);
            assert_eq!(q.abs_error, 0.0);
        }
    }

    #[test]
    fn one_dimensional_error() {
        // mean of n/p over n < p is (p-1)/(2p)
        for p in [2u64, 5, 31, 97] {
            let ps = generate(PSetKind::KorobovP, prime(p), 1).unwrap();
            let c = 1.7;
            let q = qmc_integrate(&ps, &integrand(&[c])).unwrap();
            assert!((q.abs_error - c / (2.0 * p as f64)).abs() < 1e-14);
        }
    }

    #[test]
    fn koksma_hlawka_p31() {
        let ps = generate(PSetKind::KorobovP, prime(31), 3).unwrap();
        let f = integrand(&[1.0, 0.5, 0.25]);
        let q = qmc_integrate(&ps, &f).unwrap();
        let d = star_discrepancy_exact_with_limits(&ps, &Limits::default()).unwrap().value;
        assert!(q.abs_error <= d * hk_variation(&f));
    }

    #[test]
    fn table_cases() {
        let ones = integrand(&[0.0, 0.0]);
        let rows = convergence_table(PSetKind::KorobovP, 2, &ones, &[prime(5)]).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].abs_error, 0.0);
        assert!(convergence_table(PSetKind::KorobovP, 2, &ones, &[]).unwrap().is_empty());

        let f = integrand(&[1.0, -0.5]);
        let primes: Vec<Prime> = [5, 11, 23, 47].into_iter().map(prime).collect();
        for row in convergence_table(PSetKind::KorobovP, 2, &f, &primes).unwrap() {
            assert_eq!(row.kh_source, KhSource::Exact);
            assert!(row.abs_error <= row.kh_bound, "{row:?}");
        }
    }

    #[test]
    fn table_falls_back_past_caps() {
        let limits = Limits {
            max_corner_ops: 10,
            ..Limits::default()
        };
        let f = integrand(&[1.0, 1.0]);
        let rows = convergence_table_with_limits(PSetKind::KorobovP, 2, &f, &[prime(11)], &limits).unwrap();
        assert_eq!(rows[0].kh_source, KhSource::ClosedForm);
        assert!(rows[0].dstar.is_none());
        assert!(rows[0].abs_error <= rows[0].kh_bound);
    }

    #[test]
    fn dimension_mismatch() {
        let ps = generate(PSetKind::KorobovP, prime(5), 2).unwrap();
        assert!(matches!(
            qmc_integrate(&ps, &integrand(&[1.0])),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    proptest! {
        #[test]
        fn variation_closed_form(c in proptest::collection::vec(-4.0f64..4.0, 1..8)) {
            let closed = hk_variation(&integrand(&c));
            let direct = variation_by_subsets(&c);
            prop_assert!((closed - direct).abs() <= 1e-12 * direct.max(1.0));
        }

        #[test]
        fn order_invariant(c in proptest::collection::vec(-2.0f64..2.0, 2), seed in any::<u64>()) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let ps = generate(PSetKind::HuaWangR, prime(7), 2).unwrap();
            let mut rows: Vec<Vec<u64>> = ps.points().map(|x| x.to_vec()).collect();
            rows.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let shuffled = RationalPointSet::new(ps.modulus(), 2, rows).unwrap();
            let f = integrand(&c);
            let a = qmc_integrate(&ps, &f).unwrap().estimate;
            let b = qmc_integrate(&shuffled, &f).unwrap().estimate;
            prop_assert!((a - b).abs() <= 1e-15);
        }

        #[test]
        fn koksma_hlawka_holds(c in proptest::collection::vec(-3.0f64..3.0, 2), kind_idx in 0usize..3, p_idx in 0usize..4) {
            let p = prime([2u64, 3, 5, 7][p_idx]);
            let ps = generate(PSetKind::ALL[kind_idx], p, 2).unwrap();
            let f = integrand(&c);
            let q = qmc_integrate(&ps, &f).unwrap();
            let d = star_discrepancy_exact_with_limits(&ps, &Limits::default()).unwrap().value;
            prop_assert!(q.abs_error <= d * hk_variation(&f) + 1e-14);
        }
    }
}
