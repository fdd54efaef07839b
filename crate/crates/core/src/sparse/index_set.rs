use crate::error::{Error, Result};

/// Sorted, duplicate-free positions into a parent ordering of size `parent_dim`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct IndexSet {
    indices: Vec<usize>,
}

impl IndexSet {
    pub fn new(indices: Vec<usize>, parent_dim: usize) -> Result<Self> {
        for w in indices.windows(2) {
            if w[0] >= w[1] {
                return Err(Error::InvalidParameter(
                    "index set must be strictly increasing".into(),
                ));
            }
        }
        if let Some(&last) = indices.last() {
            if last >= parent_dim {
                return Err(Error::IndexOutOfRange { index: last, dim: parent_dim });
            }
        }
        Ok(IndexSet { indices })
    }

    pub(crate) fn from_sorted_unchecked(indices: Vec<usize>) -> Self {
        debug_assert!(indices.windows(2).all(|w| w[0] < w[1]));
        IndexSet { indices }
    }

    pub fn all(n: usize) -> Self {
        IndexSet { indices: (0..n).collect() }
    }

    pub fn empty() -> Self {
        IndexSet::default()
    }

    /// Everything in `0..n` not in `self`.
    pub fn complement(&self, n: usize) -> Self {
        let mut out = Vec::with_capacity(n.saturating_sub(self.len()));
        let mut it = self.indices.iter().peekable();
        for i in 0..n {
            if it.peek() == Some(&&i) {
                it.next();
            } else {
                out.push(i);
            }
        }
        IndexSet { indices: out }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.indices
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.indices.iter().copied()
    }

    /// Map from parent position to position within the set (`usize::MAX` if absent).
    pub fn local_map(&self, parent_dim: usize) -> Vec<usize> {
        let mut map = vec![usize::MAX; parent_dim];
        for (k, &i) in self.indices.iter().enumerate() {
            map[i] = k;
        }
        map
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_unsorted_and_out_of_range() {
        assert!(IndexSet::new(vec![2, 1], 5).is_err());
        assert!(IndexSet::new(vec![1, 1], 5).is_err());
        assert!(matches!(IndexSet::new(vec![5], 5), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn complement_partitions() {
        let s = IndexSet::new(vec![0, 3, 4], 6).unwrap();
        assert_eq!(s.complement(6).as_slice(), &[1, 2, 5]);
        assert_eq!(IndexSet::all(3).complement(3).len(), 0);
    }
}
