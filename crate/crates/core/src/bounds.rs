//! Closed-form discrepancy bounds for the p-sets, the dimension-free
//! constants behind them, and their inversion to point counts.
//!
//! Logarithms are natural throughout.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_traits::{FromPrimitive, ToPrimitive};

use crate::error::{Error, Result};
use crate::limits::Limits;
use crate::numtheory::{next_prime_big, Prime};
use crate::pointset::PSetKind;
use crate::subset::{masks_descending, Subset};
use crate::weights::Weights;

/// `sum_{h in C(M), h != 0} 1/|h|`, summed smallest terms first.
pub fn harmonic_sum_exact(m: u64) -> f64 {
    assert!(m >= 2, "harmonic sum needs M >= 2");
    let pos = m / 2;
    let neg = m - 1 - pos;
    let mut sum = 0.0;
    for h in (1..=pos).rev() {
        sum += 1.0 / h as f64;
        if h <= neg {
            sum += 1.0 / h as f64;
        }
    }
    sum
}

/// `2 (1 + log(M/2))`, an upper bound for [`harmonic_sum_exact`].
pub fn harmonic_sum_estimate(m: u64) -> f64 {
    assert!(m >= 2, "harmonic sum needs M >= 2");
    2.0 * (1.0 + (m as f64 / 2.0).ln())
}

/// Shape of the bound for one p-set family:
/// `lead / scale(p) * max_u gamma_u (max u) (base log p)^|u|`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundShape {
    pub lead: f64,
    pub base: f64,
    /// Exponent of `p` in the denominator: `1/2` for `P`, `1` otherwise.
    pub power: f64,
}

impl BoundShape {
    pub fn of(kind: PSetKind) -> Self {
        match kind {
            PSetKind::KorobovP => BoundShape {
                lead: 2.0,
                base: 4.0,
                power: 0.5,
            },
            PSetKind::KorobovQ => BoundShape {
                lead: 3.0,
                base: 6.0,
                power: 1.0,
            },
            PSetKind::HuaWangR => BoundShape {
                lead: 2.0,
                base: 4.0,
                power: 1.0,
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundReport {
    pub kind: PSetKind,
    pub p: u64,
    pub s: usize,
    pub value: f64,
    pub maximizing_subset: Subset,
    pub constants: BTreeMap<&'static str, f64>,
}

impl BoundReport {
    /// `lead / p^power * gamma_u (max u) (base log p)^|u|` for the reported subset.
    pub fn subset_term(&self, w: &Weights) -> f64 {
        let shape = BoundShape::of(self.kind);
        let bl = shape.base * (self.p as f64).ln();
        let u = &self.maximizing_subset;
        shape.lead / (self.p as f64).powf(shape.power)
            * w.gamma_of(u)
            * u.max() as f64
            * bl.powi(u.len() as i32)
    }
}

fn bound_report(kind: PSetKind, p: Prime, s: usize, log_term: Option<f64>, subset: Subset) -> BoundReport {
    let shape = BoundShape::of(kind);
    let pf = p.get() as f64;
    let prefactor = shape.lead / pf.powf(shape.power);
    let value = log_term.map_or(0.0, |t| prefactor * t.exp());
    let mut constants = BTreeMap::new();
    constants.insert("log_p", pf.ln());
    constants.insert("lead", shape.lead);
    constants.insert("base_log_p", shape.base * pf.ln());
    constants.insert("prefactor", prefactor);
    constants.insert("S_p", harmonic_sum_exact(p.get()));
    BoundReport {
        kind,
        p: p.get(),
        s,
        value,
        maximizing_subset: subset,
        constants,
    }
}

/// Explicit bound on the weighted star discrepancy of the `kind` p-set.
///
/// Product weights use an `O(s)` sweep over `m = max u`: for fixed `m` the
/// objective factorizes, so the best `u` keeps `m` and every `j < m` with
/// `gamma_j base log p > 1`. General weights are enumerated.
pub fn thm1_bound(kind: PSetKind, p: Prime, s: usize, w: &Weights) -> Result<BoundReport> {
    thm1_bound_with_limits(kind, p, s, w, &Limits::default())
}

pub fn thm1_bound_with_limits(
    kind: PSetKind,
    p: Prime,
    s: usize,
    w: &Weights,
    limits: &Limits,
) -> Result<BoundReport> {
    if s < 1 {
        return Err(Error::invalid("dimension must be at least 1"));
    }
    let Some(pw) = w.as_product() else {
        return thm1_bound_enumerated(kind, p, s, w, limits);
    };
    let ln_bl = (BoundShape::of(kind).base * (p.get() as f64).ln()).ln();
    // sum of log(gamma_j b L) over the helpful j < m
    let mut prefix = 0.0;
    let mut helpful: Vec<usize> = Vec::new();
    let mut best: Option<(f64, usize, usize)> = None; // (log term, m, helpful count)
    for m in 1..=s {
        let g = pw.gamma(m);
        if g > 0.0 {
            let t = (m as f64).ln() + g.ln() + ln_bl + prefix;
            if best.is_none_or(|(b, _, _)| t > b) {
                best = Some((t, m, helpful.len()));
            }
            let f = g.ln() + ln_bl;
            if f > 0.0 {
                prefix += f;
                helpful.push(m);
            }
        }
    }
    Ok(match best {
        None => bound_report(kind, p, s, None, Subset::full(1)),
        Some((t, m, k)) => {
            let mut idx = helpful[..k].to_vec();
            idx.push(m);
            bound_report(kind, p, s, Some(t), Subset::new(idx)?)
        }
    })
}

/// The same bound by enumerating every nonempty `u ⊆ [s]`, largest mask first.
pub fn thm1_bound_enumerated(
    kind: PSetKind,
    p: Prime,
    s: usize,
    w: &Weights,
    limits: &Limits,
) -> Result<BoundReport> {
    if s < 1 {
        return Err(Error::invalid("dimension must be at least 1"));
    }
    if s > limits.max_subset_dim {
        return Err(Error::CapExceeded {
            what: "coordinate subset enumeration 2^s",
            needed: 2f64.powi(s as i32),
            cap: 1u64 << limits.max_subset_dim.min(63),
        });
    }
    let ln_bl = (BoundShape::of(kind).base * (p.get() as f64).ln()).ln();
    let mut best: Option<(f64, Subset)> = None;
    for u in masks_descending(s).map(Subset::from_mask) {
        let g = w.gamma_of(&u);
        if g <= 0.0 {
            continue;
        }
        let t = g.ln() + (Subset::max(&u) as f64).ln() + u.len() as f64 * ln_bl;
        if best.as_ref().is_none_or(|(b, _)| t > *b) {
            best = Some((t, u));
        }
    }
    Ok(match best {
        None => bound_report(kind, p, s, None, Subset::full(1)),
        Some((t, u)) => bound_report(kind, p, s, Some(t), u),
    })
}

/// Constants of the dimension-free bounds.
///
/// Without `t` (part 1) `k0` is the least `k` with `Gamma_k < delta/(8e)`,
/// `Gamma_k = sum_{j>k} gamma_j`. With `t` (part 2) `k0` is the least `h`
/// with `sum_{j>h} gamma_j^t <= delta/(8 e^t t)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Thm2Params {
    pub delta: f64,
    pub t: Option<f64>,
    pub k0: usize,
    /// `Gamma_0` in part 1; `gamma_1` in part 2.
    pub gamma0: f64,
    /// `Gamma_{k0}` or `Gamma_{h0,t}`.
    pub gamma_k0: f64,
    pub threshold: f64,
    /// Envelope constant for `P`; see [`Thm2Params::constant`] for the others.
    pub c: f64,
}

impl Thm2Params {
    pub fn is_part2(&self) -> bool {
        self.t.is_some()
    }

    /// `c = sup_{x >= log 2} g(x)` where, with `G = gamma0`, `b` and `lead`
    /// taken from the family,
    ///
    /// - part 1: `g(x) = lead (b G x) max(1, b G x)^k0 e^(-x delta/2)`,
    /// - part 2: `g(x) = lead max(1, b G x)^k0 e^(-x delta/2)`.
    ///
    /// For `b G log 2 >= 1` the part 1 envelope is `lead (b G x)^(k0+1) e^(-x delta/2)`.
    pub fn constant(&self, kind: PSetKind) -> f64 {
        let shape = BoundShape::of(kind);
        envelope_sup(
            shape.lead,
            shape.base * self.gamma0,
            if self.is_part2() { 0 } else { 1 },
            self.k0,
            self.delta,
        )
    }

    /// `log g(x)` for the envelope behind [`Thm2Params::constant`].
    pub fn log_envelope(&self, kind: PSetKind, x: f64) -> f64 {
        let shape = BoundShape::of(kind);
        log_envelope(
            shape.lead,
            shape.base * self.gamma0,
            if self.is_part2() { 0 } else { 1 },
            self.k0,
            self.delta,
            x,
        )
    }
}

fn log_envelope(lead: f64, bg: f64, lin: usize, k: usize, delta: f64, x: f64) -> f64 {
    let l = (bg * x).ln();
    lead.ln() + lin as f64 * l + k as f64 * l.max(0.0) - x * delta / 2.0
}

/// Supremum over `x >= log 2` of `lead (bg x)^lin max(1, bg x)^k e^(-x delta/2)`.
///
/// On each side of `x = 1/bg` the function is `C x^a e^(-x delta/2)`, which
/// rises up to `x = 2a/delta` and falls after, so clamping that point into
/// the piece gives the piece's maximum.
fn envelope_sup(lead: f64, bg: f64, lin: usize, k: usize, delta: f64) -> f64 {
    if bg <= 0.0 {
        return 0.0;
    }
    let lo = std::f64::consts::LN_2;
    let knee = 1.0 / bg;
    let mut best = f64::NEG_INFINITY;
    if knee > lo {
        let x = (2.0 * lin as f64 / delta).clamp(lo, knee);
        best = best.max(log_envelope(lead, bg, lin, k, delta, x));
    }
    let start = knee.max(lo);
    let x = (2.0 * (lin + k) as f64 / delta).max(start);
    best = best.max(log_envelope(lead, bg, lin, k, delta, x));
    best.exp()
}

fn check_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta < 0.5 {
        Ok(())
    } else {
        Err(Error::invalid(format!("delta = {delta} must lie in (0, 1/2)")))
    }
}

/// Computes `k0` (or `h0`), the tail sums and the envelope constant.
pub fn thm2_params(w: &Weights, delta: f64, t: Option<f64>) -> Result<Thm2Params> {
    check_delta(delta)?;
    let pw = w
        .as_product()
        .ok_or_else(|| Error::invalid("dimension-free constants need product weights"))?;
    pw.check_non_increasing()?;
    if let Some(t) = t {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::invalid(format!("t = {t} must be positive")));
        }
    }
    let e = std::f64::consts::E;
    let (exponent, threshold, strict) = match t {
        None => (1.0, delta / (8.0 * e), true),
        Some(t) => (t, delta / (8.0 * e.powf(t) * t), false),
    };
    // Compare with the error bound on the unfavourable side so that the
    // chosen index satisfies the threshold for the true tail.
    let holds = |k: usize| -> Result<bool> {
        let ts = pw.tail_sum(k, exponent)?;
        let hi = ts.value + ts.error_bound;
        Ok(if strict { hi < threshold } else { hi <= threshold })
    };
    let k0 = if holds(0)? {
        0
    } else {
        let mut lo = 0usize; // fails
        let mut hi = 1usize;
        while !holds(hi)? {
            lo = hi;
            hi = hi.checked_mul(2).filter(|&h| h <= 1 << 40).ok_or_else(|| {
                Error::Divergent(format!("tail never drops below {threshold}"))
            })?;
        }
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if holds(mid)? {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    };
    let gamma0 = match t {
        None => pw.tail_sum(0, 1.0)?.value,
        Some(_) => pw.gamma(1),
    };
    let mut params = Thm2Params {
        delta,
        t,
        k0,
        gamma0,
        gamma_k0: pw.tail_sum(k0, exponent)?.value,
        threshold,
        c: 0.0,
    };
    params.c = params.constant(PSetKind::KorobovP);
    Ok(params)
}

/// Exponent of `p` in the dimension-free bound: `1/2 - delta` for `P`, `1 - delta` otherwise.
pub fn thm2_exponent(kind: PSetKind, delta: f64) -> f64 {
    BoundShape::of(kind).power - delta
}

/// `c / p^e` (times `s` in part 2).
pub fn thm2_bound(kind: PSetKind, p: Prime, s: usize, params: &Thm2Params) -> Result<f64> {
    thm2_bound_at(kind, p.get() as f64, s, params)
}

fn thm2_bound_at(kind: PSetKind, p: f64, s: usize, params: &Thm2Params) -> Result<f64> {
    check_delta(params.delta)?;
    let factor = if params.is_part2() { s as f64 } else { 1.0 };
    Ok(factor * params.constant(kind) / p.powf(thm2_exponent(kind, params.delta)))
}

#[derive(Clone, Debug, PartialEq)]
pub struct NMin {
    /// `M = ceil((c'/eps)^(1/e))`.
    pub m: BigUint,
    /// Least prime `>= M`.
    pub p: BigUint,
    /// Number of points of the `kind` set at `p`.
    pub points: BigUint,
    /// Bound value at `p`.
    pub bound: f64,
    pub params: Thm2Params,
}

/// Inverts the dimension-free bound: returns the least prime `p >= M`, where
/// `M` is the smallest integer making the bound at most `eps`. By Bertrand's
/// postulate `p < 2M`.
pub fn n_min_from_bound(
    kind: PSetKind,
    eps: f64,
    s: usize,
    w: &Weights,
    delta: f64,
    t: Option<f64>,
) -> Result<NMin> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::invalid(format!("eps = {eps} must lie in (0, 1)")));
    }
    if s < 1 {
        return Err(Error::invalid("dimension must be at least 1"));
    }
    let params = thm2_params(w, delta, t)?;
    let factor = if params.is_part2() { s as f64 } else { 1.0 };
    let c = factor * params.constant(kind);
    let e = thm2_exponent(kind, delta);
    let target = (c / eps).powf(1.0 / e);
    if !target.is_finite() {
        return Err(Error::Overflow(format!("(c/eps)^(1/e) = {target}")));
    }
    let mut m = BigUint::from_f64(target.ceil())
        .ok_or_else(|| Error::Overflow(format!("cannot represent {target}")))?
        .max(BigUint::from(2u32));
    for _ in 0..64 {
        let p = next_prime_big(&m);
        let pf = p.to_f64().unwrap_or(f64::INFINITY);
        let bound = thm2_bound_at(kind, pf, s, &params)?;
        if bound <= eps {
            if p >= &m * 2u32 {
                return Err(Error::Invariant(format!("prime {p} is outside [{m}, 2*{m})")));
            }
            let points = match kind {
                PSetKind::KorobovP => p.clone(),
                PSetKind::KorobovQ | PSetKind::HuaWangR => &p * &p,
            };
            return Ok(NMin {
                m,
                p,
                points,
                bound,
                params,
            });
        }
        // float rounding left the bound just above eps; nudge M up
        let step = &m / BigUint::from(1u64 << 40) + 1u32;
        m += step;
    }
    Err(Error::Invariant("could not reach the target bound".into()))
}
