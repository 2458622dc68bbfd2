/// One bit per memory request of a queue entry, 64 per word; large I/Os
/// chain further words.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CompletionBitmap {
    words: Vec<u64>,
    set: u32,
}

impl CompletionBitmap {
    pub fn new(pages: usize) -> Self {
        CompletionBitmap { words: vec![0; pages.div_ceil(64).max(1)], set: 0 }
    }

    pub fn set(&mut self, i: usize) {
        let (w, b) = (i / 64, 1u64 << (i % 64));
        assert!(self.words[w] & b == 0, "bit {i} set twice");
        self.words[w] |= b;
        self.set += 1;
    }

    pub fn clear(&mut self, i: usize) {
        let (w, b) = (i / 64, 1u64 << (i % 64));
        assert!(self.words[w] & b != 0, "bit {i} cleared twice");
        self.words[w] &= !b;
        self.set -= 1;
    }

    pub fn is_set(&self, i: usize) -> bool {
        self.words[i / 64] & (1u64 << (i % 64)) != 0
    }

    pub fn is_empty(&self) -> bool {
        self.set == 0
    }

    pub fn count(&self) -> u32 {
        self.set
    }

    pub fn words(&self) -> usize {
        self.words.len()
    }
}
