use std::collections::BTreeMap;
use std::fmt;

/// A finite multiset with deterministic (sorted) iteration order.
///
/// Zero counts are never stored, so structural equality is multiset equality.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Multiset<T: Ord>(BTreeMap<T, u32>);

impl<T: Ord> Default for Multiset<T> {
    fn default() -> Self {
        Multiset(BTreeMap::new())
    }
}

impl<T: Ord + Clone> Multiset<T> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, item: T) {
        self.insert_n(item, 1);
    }

    pub fn insert_n(&mut self, item: T, n: u32) {
        if n > 0 {
            *self.0.entry(item).or_insert(0) += n;
        }
    }

    /// Removes one copy of `item`, returning whether it was present.
    pub fn remove_one(&mut self, item: &T) -> bool {
        match self.0.get_mut(item) {
            Some(c) if *c > 1 => {
                *c -= 1;
                true
            }
            Some(_) => {
                self.0.remove(item);
                true
            }
            None => false,
        }
    }

    pub fn count(&self, item: &T) -> u32 {
        self.0.get(item).copied().unwrap_or(0)
    }

    /// Total number of elements, counted with multiplicity.
    pub fn len(&self) -> usize {
        self.0.values().map(|&c| c as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Distinct elements with their multiplicities, in sorted order.
    pub fn iter(&self) -> impl Iterator<Item = (&T, u32)> + '_ {
        self.0.iter().map(|(k, &v)| (k, v))
    }

    /// Elements repeated by multiplicity, in sorted order.
    pub fn elements(&self) -> impl Iterator<Item = &T> + '_ {
        self.0.iter().flat_map(|(k, &v)| std::iter::repeat_n(k, v as usize))
    }

    pub fn distinct(&self) -> impl Iterator<Item = &T> + '_ {
        self.0.keys()
    }

    /// `self ≤ other` pointwise.
    pub fn is_subset_of(&self, other: &Self) -> bool {
        self.0.iter().all(|(k, &v)| other.count(k) >= v)
    }

    pub fn union(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (k, v) in other.iter() {
            out.insert_n(k.clone(), v);
        }
        out
    }

    /// `self − other`, or `None` if `other` is not contained in `self`.
    pub fn checked_sub(&self, other: &Self) -> Option<Self> {
        let mut out = self.clone();
        for (k, v) in other.iter() {
            let c = out.0.get_mut(k)?;
            if *c < v {
                return None;
            }
            *c -= v;
            if *c == 0 {
                out.0.remove(k);
            }
        }
        Some(out)
    }

    pub fn map<U: Ord + Clone>(&self, mut f: impl FnMut(&T) -> U) -> Multiset<U> {
        let mut out = Multiset::new();
        for (k, v) in self.iter() {
            out.insert_n(f(k), v);
        }
        out
    }
}

impl<T: Ord + Clone> FromIterator<T> for Multiset<T> {
    fn from_iter<I: IntoIterator<Item = T>>(iter: I) -> Self {
        let mut m = Multiset::new();
        for x in iter {
            m.insert(x);
        }
        m
    }
}

impl<T: Ord + fmt::Debug> fmt::Debug for Multiset<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.0.iter()).finish()
    }
}

impl<T: Ord + fmt::Display> fmt::Display for Multiset<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (k, v)) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{k}:{v}")?;
        }
        write!(f, "}}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sub_and_subset() {
        let a: Multiset<&str> = ["x", "x", "y"].into_iter().collect();
        let b: Multiset<&str> = ["x", "y"].into_iter().collect();
        assert!(b.is_subset_of(&a));
        assert!(!a.is_subset_of(&b));
        let d = a.checked_sub(&b).unwrap();
        assert_eq!(d.count(&"x"), 1);
        assert_eq!(d.count(&"y"), 0);
        assert_eq!(d.len(), 1);
        assert!(b.checked_sub(&a).is_none());
    }

    #[test]
    fn elements_are_sorted_with_repetition() {
        let a: Multiset<&str> = ["b", "a", "b"].into_iter().collect();
        assert_eq!(a.elements().copied().collect::<Vec<_>>(), ["a", "b", "b"]);
    }
}
