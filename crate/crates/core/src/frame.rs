//! Bit-parallel Pauli frame propagation.
//!
//! Every qubit carries an X and a Z frame bit per lane, packed 64 lanes to a
//! word. A lane is either an independent Monte Carlo shot or one injected
//! fault, depending on the caller.

/// Pauli frames for `num_qubits` qubits over `words * 64` lanes.
#[derive(Clone, Debug)]
pub struct FrameSim {
    words: usize,
    x: Vec<u64>,
    z: Vec<u64>,
}

impl FrameSim {
    pub fn new(num_qubits: usize, lanes: usize) -> Self {
        let words = lanes.div_ceil(64).max(1);
        Self {
            words,
            x: vec![0; num_qubits * words],
            z: vec![0; num_qubits * words],
        }
    }

    pub fn words(&self) -> usize {
        self.words
    }

    pub fn lanes(&self) -> usize {
        self.words * 64
    }

    pub fn clear(&mut self) {
        self.x.fill(0);
        self.z.fill(0);
    }

    #[inline]
    fn range(&self, q: usize) -> std::ops::Range<usize> {
        q * self.words..(q + 1) * self.words
    }

    pub fn x_words(&self, q: usize) -> &[u64] {
        &self.x[self.range(q)]
    }

    pub fn z_words(&self, q: usize) -> &[u64] {
        &self.z[self.range(q)]
    }

    pub fn x_words_mut(&mut self, q: usize) -> &mut [u64] {
        let r = self.range(q);
        &mut self.x[r]
    }

    pub fn z_words_mut(&mut self, q: usize) -> &mut [u64] {
        let r = self.range(q);
        &mut self.z[r]
    }

    /// Controlled-X: X spreads control → target, Z spreads target → control.
    #[inline]
    pub fn cx(&mut self, control: usize, target: usize) {
        let w = self.words;
        let (c, t) = (control * w, target * w);
        for i in 0..w {
            self.x[t + i] ^= self.x[c + i];
            self.z[c + i] ^= self.z[t + i];
        }
    }

    /// Controlled-Z: an X on either qubit picks up a Z on the other.
    #[inline]
    pub fn cz(&mut self, a: usize, b: usize) {
        let w = self.words;
        let (a, b) = (a * w, b * w);
        for i in 0..w {
            self.z[a + i] ^= self.x[b + i];
            self.z[b + i] ^= self.x[a + i];
        }
    }

    #[inline]
    pub fn reset(&mut self, q: usize) {
        let r = self.range(q);
        self.x[r.clone()].fill(0);
        self.z[r].fill(0);
    }

    /// Flip of an X-basis measurement: the Z frame component.
    #[inline]
    pub fn measure_x_into(&self, q: usize, out: &mut [u64]) {
        out.copy_from_slice(self.z_words(q));
    }

    /// Flip of a Z-basis measurement: the X frame component.
    #[inline]
    pub fn measure_z_into(&self, q: usize, out: &mut [u64]) {
        out.copy_from_slice(self.x_words(q));
    }

    /// Applies Pauli `(x, z)` on qubit `q` in one lane.
    #[inline]
    pub fn apply(&mut self, q: usize, lane: usize, x: bool, z: bool) {
        let idx = q * self.words + lane / 64;
        let bit = 1u64 << (lane % 64);
        if x {
            self.x[idx] ^= bit;
        }
        if z {
            self.z[idx] ^= bit;
        }
    }
}
