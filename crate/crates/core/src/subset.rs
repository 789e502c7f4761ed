use std::fmt;

use crate::error::{Error, Result};

/// A nonempty set of 1-based coordinate indices, kept sorted and deduplicated.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Subset(Vec<usize>);

impl Subset {
    pub fn new(mut indices: Vec<usize>) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::invalid("coordinate subset must be nonempty"));
        }
        if indices.contains(&0) {
            return Err(Error::invalid("coordinate indices are 1-based"));
        }
        indices.sort_unstable();
        indices.dedup();
        Ok(Subset(indices))
    }

    /// `{1, ..., s}`.
    pub fn full(s: usize) -> Self {
        assert!(s >= 1);
        Subset((1..=s).collect())
    }

    /// Subset encoded by the low `s` bits of `mask` (bit `j - 1` is coordinate `j`).
    pub fn from_mask(mask: u64) -> Self {
        assert!(mask != 0);
        Subset(
            (0..64)
                .filter(|b| mask >> b & 1 == 1)
                .map(|b| b + 1)
                .collect(),
        )
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn max(&self) -> usize {
        *self.0.last().expect("subset is nonempty")
    }

    pub fn contains(&self, j: usize) -> bool {
        self.0.binary_search(&j).is_ok()
    }

    /// Parses `"1,3,4"`.
    pub fn parse(text: &str) -> Result<Self> {
        let indices = text
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::invalid(format!("bad coordinate index {t:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Subset::new(indices)
    }
}

impl fmt::Display for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, j) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{j}")?;
        }
        Ok(())
    }
}

/// Nonempty subsets of `[s]` as bit masks, full set first, then descending.
pub(crate) fn masks_descending(s: usize) -> impl Iterator<Item = u64> {
    let full = if s == 64 { u64::MAX } else { (1u64 << s) - 1 };
    (1..=full).rev()
}
