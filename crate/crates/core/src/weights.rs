//! Coordinate weights.
//!
//! Product weights are an infinite sequence `gamma_1, gamma_2, ...` given as a
//! finite listed prefix plus a [`TailRule`] for every index past it; the
//! dimension-free constants need the true infinite tail sums, not a truncated
//! list. General weights map coordinate subsets to values, with unlisted
//! subsets weighted 0.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::subset::Subset;

/// How the product weight sequence continues after the listed prefix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TailRule {
    /// `gamma_j = 0` past the prefix.
    Zero,
    /// `gamma_j = gamma_L * ratio^(j - L)`, with `gamma_0 = 1` when nothing is listed.
    Geometric { ratio: f64 },
    /// `gamma_j = scale * j^(-exponent)`.
    PowerLaw { exponent: f64, scale: f64 },
}

impl TailRule {
    fn validate(&self) -> Result<()> {
        match *self {
            TailRule::Zero => Ok(()),
            TailRule::Geometric { ratio } if ratio > 0.0 && ratio < 1.0 => Ok(()),
            TailRule::Geometric { ratio } => Err(Error::invalid(format!(
                "geometric ratio {ratio} must lie in (0, 1)"
            ))),
            TailRule::PowerLaw { exponent, scale }
                if exponent > 0.0 && scale > 0.0 && exponent.is_finite() && scale.is_finite() =>
            {
                Ok(())
            }
            TailRule::PowerLaw { .. } => Err(Error::invalid(
                "power-law exponent and scale must be positive",
            )),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProductWeights {
    listed: Vec<f64>,
    tail: TailRule,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GeneralWeights {
    entries: BTreeMap<Subset, f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Weights {
    Product(ProductWeights),
    General(GeneralWeights),
}

/// A tail sum together with a bound on its numerical error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TailSum {
    pub value: f64,
    pub error_bound: f64,
}

fn check_weight(g: f64) -> Result<()> {
    if g.is_finite() && g >= 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("weight {g} must be finite and nonnegative")))
    }
}

// Direct terms summed before the Euler–Maclaurin remainder takes over.
const POWER_LAW_DIRECT_TERMS: u64 = 128;

impl ProductWeights {
    pub fn new(listed: Vec<f64>, tail: TailRule) -> Result<Self> {
        for &g in &listed {
            check_weight(g)?;
        }
        tail.validate()?;
        Ok(ProductWeights { listed, tail })
    }

    pub fn listed(&self) -> &[f64] {
        &self.listed
    }

    pub fn tail(&self) -> TailRule {
        self.tail
    }

    fn geometric_base(&self) -> f64 {
        self.listed.last().copied().unwrap_or(1.0)
    }

    /// `gamma_j` for 1-based `j`.
    pub fn gamma(&self, j: usize) -> f64 {
        assert!(j >= 1, "weight indices are 1-based");
        let l = self.listed.len();
        if j <= l {
            return self.listed[j - 1];
        }
        match self.tail {
            TailRule::Zero => 0.0,
            TailRule::Geometric { ratio } => {
                self.geometric_base() * ratio.powf((j - l) as f64)
            }
            TailRule::PowerLaw { exponent, scale } => scale * (j as f64).powf(-exponent),
        }
    }

    /// Checks `gamma_1 >= gamma_2 >= ...` over the prefix and across into the tail.
    pub fn check_non_increasing(&self) -> Result<()> {
        let l = self.listed.len();
        for j in 2..=l + 1 {
            if self.gamma(j) > self.gamma(j - 1) {
                return Err(Error::NonMonotone(j));
            }
        }
        Ok(())
    }

    /// `Gamma_{k,t} = (sum_{j > k} gamma_j^t)^(1/t)`.
    pub fn tail_sum(&self, k: usize, t: f64) -> Result<TailSum> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::invalid(format!("tail exponent t = {t} must be positive")));
        }
        let l = self.listed.len();
        let mut sum: f64 = self.listed.iter().skip(k).map(|g| g.powf(t)).sum();
        let mut err = 0.0;
        let m = k.max(l) as u64;
        match self.tail {
            TailRule::Zero => {}
            TailRule::Geometric { ratio } => {
                let rt = ratio.powf(t);
                sum += self.geometric_base().powf(t) * rt.powf((m + 1 - l as u64) as f64)
                    / (1.0 - rt);
            }
            TailRule::PowerLaw { exponent, scale } => {
                let b = exponent * t;
                if b <= 1.0 {
                    return Err(Error::Divergent(format!(
                        "sum of j^(-{b}) diverges (power-law exponent times t must exceed 1)"
                    )));
                }
                let (z, e) = zeta_tail(b, m);
                let ct = scale.powf(t);
                sum += ct * z;
                err += ct * e;
            }
        }
        let value = sum.powf(1.0 / t);
        let error_bound = if err == 0.0 {
            0.0
        } else {
            let hi = (sum + err).powf(1.0 / t) - value;
            let lo = value - (sum - err).max(0.0).powf(1.0 / t);
            hi.max(lo)
        };
        Ok(TailSum { value, error_bound })
    }
}

/// `sum_{j > m} j^(-b)` for `b > 1`, with an error bound.
///
/// Sums a block of terms directly, then applies Euler–Maclaurin through the
/// third derivative. For the completely monotone `x^(-b)` the truncation error
/// is below the first omitted term.
fn zeta_tail(b: f64, m: u64) -> (f64, f64) {
    let direct: f64 = (m + 1..=m + POWER_LAW_DIRECT_TERMS)
        .rev()
        .map(|j| (j as f64).powf(-b))
        .sum();
    let n = (m + POWER_LAW_DIRECT_TERMS + 1) as f64;
    let remainder = n.powf(1.0 - b) / (b - 1.0) + 0.5 * n.powf(-b) + b * n.powf(-b - 1.0) / 12.0
        - b * (b + 1.0) * (b + 2.0) * n.powf(-b - 3.0) / 720.0;
    let err = b * (b + 1.0) * (b + 2.0) * (b + 3.0) * (b + 4.0) * n.powf(-b - 5.0) / 30240.0;
    (direct + remainder, err + f64::EPSILON * (direct + remainder))
}

impl GeneralWeights {
    pub fn new(entries: impl IntoIterator<Item = (Subset, f64)>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (u, g) in entries {
            check_weight(g)?;
            if map.insert(u.clone(), g).is_some() {
                return Err(Error::invalid(format!("duplicate subset {{{u}}}")));
            }
        }
        Ok(GeneralWeights { entries: map })
    }

    pub fn entries(&self) -> &BTreeMap<Subset, f64> {
        &self.entries
    }
}

impl Weights {
    pub fn product(listed: Vec<f64>, tail: TailRule) -> Result<Self> {
        ProductWeights::new(listed, tail).map(Weights::Product)
    }

    pub fn general(entries: impl IntoIterator<Item = (Subset, f64)>) -> Result<Self> {
        GeneralWeights::new(entries).map(Weights::General)
    }

    /// `gamma_j = 1` for `j <= s`, zero beyond: every subset of `[s]` has weight 1.
    pub fn unit(s: usize) -> Self {
        Weights::Product(ProductWeights {
            listed: vec![1.0; s],
            tail: TailRule::Zero,
        })
    }

    /// `gamma_j = ratio^j`.
    pub fn geometric(ratio: f64) -> Result<Self> {
        Weights::product(Vec::new(), TailRule::Geometric { ratio })
    }

    /// General weights on the subsets of `[s]` with `gamma'_u = lambda * gamma_u`.
    pub fn scaled_general(&self, s: usize, lambda: f64) -> Result<Self> {
        let entries = crate::subset::masks_descending(s)
            .map(Subset::from_mask)
            .map(|u| {
                let g = self.gamma_of(&u) * lambda;
                (u, g)
            })
            .collect::<Vec<_>>();
        Weights::general(entries)
    }

    pub fn as_product(&self) -> Option<&ProductWeights> {
        match self {
            Weights::Product(w) => Some(w),
            Weights::General(_) => None,
        }
    }

    /// `gamma_u`.
    pub fn gamma_of(&self, u: &Subset) -> f64 {
        match self {
            Weights::Product(w) => u.indices().iter().map(|&j| w.gamma(j)).product(),
            Weights::General(w) => w.entries.get(u).copied().unwrap_or(0.0),
        }
    }

    /// `Gamma_{k,t}`; product weights only.
    pub fn gamma_tail_sum(&self, k: usize, t: f64) -> Result<TailSum> {
        match self {
            Weights::Product(w) => w.tail_sum(k, t),
            Weights::General(_) => Err(Error::invalid("tail sums need product weights")),
        }
    }
}

impl fmt::Display for Weights {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Weights::Product(w) => {
                writeln!(f, "product")?;
                for (i, g) in w.listed.iter().enumerate() {
                    writeln!(f, "{} {}", i + 1, g)?;
                }
                match w.tail {
                    TailRule::Zero => writeln!(f, "tail zero"),
                    TailRule::Geometric { ratio } => writeln!(f, "tail geometric {ratio}"),
                    TailRule::PowerLaw { exponent, scale } => {
                        writeln!(f, "tail powerlaw {exponent} {scale}")
                    }
                }
            }
            Weights::General(w) => {
                writeln!(f, "general")?;
                for (u, g) in &w.entries {
                    writeln!(f, "{u} {g}")?;
                }
                Ok(())
            }
        }
    }
}

fn parse_f64(tok: &str, line: usize) -> Result<f64> {
    tok.parse::<f64>().map_err(|_| Error::Parse {
        line,
        msg: format!("expected a number, found {tok:?}"),
    })
}

/// Parses the weight-file format.
///
/// ```text
/// product            # or "general"
/// 1 0.5              # j gamma_j, j = 1, 2, ... consecutively
/// 2 0.25
/// tail geometric 0.5 # optional: zero | geometric r | powerlaw a c
/// ```
///
/// General files list `i1,i2,... gamma` lines instead.
pub fn parse_weights(text: &str) -> Result<Weights> {
    let mut lines = text.lines().enumerate().filter_map(|(i, raw)| {
        let content = raw.split('#').next().unwrap_or("").trim();
        (!content.is_empty()).then_some((i + 1, content))
    });
    let (first_line, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        msg: "empty weight file".into(),
    })?;
    match header {
        "product" => {
            let mut listed = Vec::new();
            let mut tail = None;
            for (line, content) in lines {
                if tail.is_some() {
                    return Err(Error::Parse {
                        line,
                        msg: "nothing may follow the tail line".into(),
                    });
                }
                let toks: Vec<&str> = content.split_whitespace().collect();
                if toks[0] == "tail" {
                    let rule = match toks[1..] {
                        ["zero"] => TailRule::Zero,
                        ["geometric", r] => TailRule::Geometric {
                            ratio: parse_f64(r, line)?,
                        },
                        ["powerlaw", a, c] => TailRule::PowerLaw {
                            exponent: parse_f64(a, line)?,
                            scale: parse_f64(c, line)?,
                        },
                        _ => {
                            return Err(Error::Parse {
                                line,
                                msg: format!("bad tail rule {content:?}"),
                            })
                        }
                    };
                    rule.validate().map_err(|e| Error::Parse {
                        line,
                        msg: e.to_string(),
                    })?;
                    tail = Some(rule);
                    continue;
                }
                let [j, g] = toks[..] else {
                    return Err(Error::Parse {
                        line,
                        msg: format!("expected \"<j> <gamma_j>\", found {content:?}"),
                    });
                };
                let j: usize = j.parse().map_err(|_| Error::Parse {
                    line,
                    msg: format!("bad index {j:?}"),
                })?;
                if j != listed.len() + 1 {
                    return Err(Error::Parse {
                        line,
                        msg: format!("expected index {}, found {j}", listed.len() + 1),
                    });
                }
                let g = parse_f64(g, line)?;
                check_weight(g).map_err(|e| Error::Parse {
                    line,
                    msg: e.to_string(),
                })?;
                listed.push(g);
            }
            Weights::product(listed, tail.unwrap_or(TailRule::Zero))
        }
        "general" => {
            let mut entries: BTreeMap<Subset, f64> = BTreeMap::new();
            for (line, content) in lines {
                let toks: Vec<&str> = content.split_whitespace().collect();
                let [u, g] = toks[..] else {
                    return Err(Error::Parse {
                        line,
                        msg: format!("expected \"<i1,i2,...> <gamma>\", found {content:?}"),
                    });
                };
                let u = Subset::parse(u).map_err(|e| Error::Parse {
                    line,
                    msg: e.to_string(),
                })?;
                let g = parse_f64(g, line)?;
                check_weight(g).map_err(|e| Error::Parse {
                    line,
                    msg: e.to_string(),
                })?;
                if entries.insert(u.clone(), g).is_some() {
                    return Err(Error::Parse {
                        line,
                        msg: format!("duplicate subset {{{u}}}"),
                    });
                }
            }
            Ok(Weights::General(GeneralWeights { entries }))
        }
        other => Err(Error::Parse {
            line: first_line,
            msg: format!("first line must be \"product\" or \"general\", found {other:?}"),
        }),
    }
}
