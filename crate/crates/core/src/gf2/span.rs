use super::bitvec::BitVec;

/// Incrementally built basis of a subspace of GF(2)^n.
///
/// Each stored vector has a distinct pivot, its lowest set bit, so reduction is
/// a single left-to-right pass.
#[derive(Clone, Debug)]
pub struct SpanBasis {
    len: usize,
    // pivot bit -> index into `vectors`
    by_pivot: Vec<Option<usize>>,
    vectors: Vec<BitVec>,
}

impl SpanBasis {
    pub fn new(len: usize) -> Self {
        Self {
            len,
            by_pivot: vec![None; len],
            vectors: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    /// Residue of `v` after eliminating every pivot of the basis.
    pub fn reduce(&self, v: &BitVec) -> BitVec {
        assert_eq!(v.len(), self.len);
        let mut r = v.clone();
        let mut pos = 0;
        while let Some(p) = r.next_one(pos) {
            if let Some(idx) = self.by_pivot[p] {
                // stored vector's lowest bit is p, so only bits above p change
                r.xor_assign(&self.vectors[idx]);
            }
            pos = p + 1;
        }
        r
    }

    pub fn contains(&self, v: &BitVec) -> bool {
        self.reduce(v).is_zero()
    }

    /// Adds `v` to the span; returns false when it was already contained.
    pub fn insert(&mut self, v: &BitVec) -> bool {
        let r = self.reduce(v);
        let Some(p) = r.ones().next() else {
            return false;
        };
        self.by_pivot[p] = Some(self.vectors.len());
        self.vectors.push(r);
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn span_membership() {
        let mut s = SpanBasis::new(6);
        assert!(s.insert(&BitVec::from_support(6, [0, 1])));
        assert!(s.insert(&BitVec::from_support(6, [1, 2])));
        assert!(!s.insert(&BitVec::from_support(6, [0, 2])));
        assert!(s.contains(&BitVec::from_support(6, [0, 2])));
        assert!(!s.contains(&BitVec::from_support(6, [3])));
        assert_eq!(s.dim(), 2);
    }
}
