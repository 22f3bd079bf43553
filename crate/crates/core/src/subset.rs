//! Subsets of users, each naming one capacity constraint.

use std::fmt;

use crate::error::{Error, Result};

/// A set of zero-based user indices.
///
/// Sets whose members are all below 64 are stored as a bitmask, larger ones
/// as a sorted index list. The representation is canonical, so derived
/// equality and hashing agree with set equality. `Display` prints members
/// one-based, e.g. `{1,3}`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct UserSubset(Repr);

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
enum Repr {
    Mask(u64),
    Sorted(Vec<usize>),
}

impl UserSubset {
    pub fn empty() -> Self {
        UserSubset(Repr::Mask(0))
    }

    pub fn singleton(index: usize) -> Self {
        if index < 64 {
            UserSubset(Repr::Mask(1 << index))
        } else {
            UserSubset(Repr::Sorted(vec![index]))
        }
    }

    pub fn from_mask(mask: u64) -> Self {
        UserSubset(Repr::Mask(mask))
    }

    /// All users `0..users`.
    pub fn full(users: usize) -> Self {
        Self::from_sorted_unchecked((0..users).collect())
    }

    /// Builds a subset from indices; duplicates are rejected.
    pub fn from_indices<I: IntoIterator<Item = usize>>(indices: I) -> Result<Self> {
        let mut v: Vec<usize> = indices.into_iter().collect();
        v.sort_unstable();
        if let Some(w) = v.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::DuplicateIndex(w[0]));
        }
        Ok(Self::from_sorted_unchecked(v))
    }

    fn from_sorted_unchecked(v: Vec<usize>) -> Self {
        match v.last() {
            Some(&max) if max >= 64 => UserSubset(Repr::Sorted(v)),
            _ => UserSubset(Repr::Mask(v.iter().fold(0u64, |m, &i| m | (1 << i)))),
        }
    }

    /// Bitmask form, available when every member is below 64.
    pub fn mask(&self) -> Option<u64> {
        match &self.0 {
            Repr::Mask(m) => Some(*m),
            Repr::Sorted(_) => None,
        }
    }

    pub fn len(&self) -> usize {
        match &self.0 {
            Repr::Mask(m) => m.count_ones() as usize,
            Repr::Sorted(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, index: usize) -> bool {
        match &self.0 {
            Repr::Mask(m) => index < 64 && m & (1 << index) != 0,
            Repr::Sorted(v) => v.binary_search(&index).is_ok(),
        }
    }

    /// Smallest member.
    pub fn first(&self) -> Option<usize> {
        self.iter().next()
    }

    /// Members in increasing order.
    pub fn iter(&self) -> Members<'_> {
        match &self.0 {
            Repr::Mask(m) => Members::Mask(*m),
            Repr::Sorted(v) => Members::Sorted(v.iter()),
        }
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }

    pub fn union(&self, other: &Self) -> Self {
        match (&self.0, &other.0) {
            (Repr::Mask(a), Repr::Mask(b)) => UserSubset(Repr::Mask(a | b)),
            _ => {
                let (a, b) = (self.to_vec(), other.to_vec());
                let mut out = Vec::with_capacity(a.len() + b.len());
                let (mut i, mut j) = (0, 0);
                while i < a.len() && j < b.len() {
                    match a[i].cmp(&b[j]) {
                        std::cmp::Ordering::Less => {
                            out.push(a[i]);
                            i += 1;
                        }
                        std::cmp::Ordering::Greater => {
                            out.push(b[j]);
                            j += 1;
                        }
                        std::cmp::Ordering::Equal => {
                            out.push(a[i]);
                            i += 1;
                            j += 1;
                        }
                    }
                }
                out.extend_from_slice(&a[i..]);
                out.extend_from_slice(&b[j..]);
                Self::from_sorted_unchecked(out)
            }
        }
    }

    /// Checks that every member is a valid index for `users` users.
    pub fn check_within(&self, users: usize) -> Result<()> {
        match self.iter().last() {
            Some(index) if index >= users => Err(Error::IndexOutOfRange { index, users }),
            _ => Ok(()),
        }
    }
}

pub enum Members<'a> {
    Mask(u64),
    Sorted(std::slice::Iter<'a, usize>),
}

impl Iterator for Members<'_> {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        match self {
            Members::Mask(m) => {
                if *m == 0 {
                    None
                } else {
                    let i = m.trailing_zeros() as usize;
                    *m &= *m - 1;
                    Some(i)
                }
            }
            Members::Sorted(it) => it.next().copied(),
        }
    }
}

impl fmt::Display for UserSubset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (k, i) in self.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{}", i + 1)?;
        }
        f.write_str("}")
    }
}
