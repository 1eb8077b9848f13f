/// Classical register as a packed bit set.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ClassicalBits {
    words: Vec<u64>,
}

impl ClassicalBits {
    pub fn new(len: usize) -> Self {
        Self { words: vec![0; len.div_ceil(64)] }
    }

    pub fn get(&self, i: usize) -> bool {
        self.words.get(i / 64).is_some_and(|w| w >> (i % 64) & 1 == 1)
    }

    pub fn set(&mut self, i: usize, value: bool) {
        let w = i / 64;
        if w >= self.words.len() {
            self.words.resize(w + 1, 0);
        }
        if value {
            self.words[w] |= 1 << (i % 64);
        } else {
            self.words[w] &= !(1 << (i % 64));
        }
    }

    pub fn flip(&mut self, i: usize) {
        let v = self.get(i);
        self.set(i, !v);
    }

    /// Clears every bit not present in `mask`.
    pub fn retain(&mut self, mask: &ClassicalBits) {
        for (i, w) in self.words.iter_mut().enumerate() {
            *w &= mask.words.get(i).copied().unwrap_or(0);
        }
    }

    /// Packs the listed bits into an integer, `bits[0]` least significant.
    pub fn pack(&self, bits: &[usize]) -> u64 {
        bits.iter().enumerate().fold(0, |acc, (k, &b)| acc | (self.get(b) as u64) << k)
    }
}
