//! Word-packed bit-vector primitives used by the sumset kernels.

pub const WORD: usize = 64;

#[inline]
pub fn words_for(bits: usize) -> usize {
    bits.div_ceil(WORD)
}

/// A fixed-length bit vector. Bits at positions `>= len` are always zero.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BitVec {
    words: Vec<u64>,
    len: usize,
}

impl BitVec {
    pub fn zeros(len: usize) -> Self {
        BitVec {
            words: vec![0; words_for(len)],
            len,
        }
    }

    pub fn ones(len: usize) -> Self {
        let mut v = BitVec {
            words: vec![!0; words_for(len)],
            len,
        };
        v.clear_tail();
        v
    }

    pub fn from_positions(len: usize, positions: impl IntoIterator<Item = usize>) -> Self {
        let mut v = Self::zeros(len);
        for i in positions {
            v.set(i);
        }
        v
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        i < self.len && (self.words[i / WORD] >> (i % WORD)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize) {
        assert!(i < self.len, "bit {i} out of range {}", self.len);
        self.words[i / WORD] |= 1 << (i % WORD);
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let b = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * WORD + b)
            })
        })
    }

    /// `self |= other`; lengths must match.
    pub fn or_assign(&mut self, other: &BitVec) {
        assert_eq!(self.len, other.len);
        for (d, s) in self.words.iter_mut().zip(&other.words) {
            *d |= *s;
        }
    }

    /// `self |= src << shift`. Bits shifted past `self.len()` must be zero in
    /// `src`; this holds whenever `src.len() - 1 + shift < self.len()`.
    #[inline]
    pub fn or_shifted(&mut self, src: &BitVec, shift: usize) {
        debug_assert!(src.len == 0 || src.len - 1 + shift < self.len);
        or_shifted_words(&mut self.words, &src.words, shift);
        self.clear_tail();
    }

    /// Folds bits `[len, len + len)` of `src` onto `[0, len)` of `self`.
    /// Used to reduce a `2n`-bit scratch sumset modulo `n`.
    pub fn or_folded(&mut self, src: &BitVec) {
        let n = self.len;
        debug_assert!(src.len <= 2 * n);
        let (wq, bs) = (n / WORD, n % WORD);
        let sw = &src.words;
        for (i, d) in self.words.iter_mut().enumerate() {
            let lo = sw.get(i + wq).copied().unwrap_or(0);
            let v = if bs == 0 {
                lo
            } else {
                let hi = sw.get(i + wq + 1).copied().unwrap_or(0);
                (lo >> bs) | (hi << (WORD - bs))
            };
            *d |= v;
        }
        // low half of src
        for (d, s) in self.words.iter_mut().zip(sw.iter()) {
            *d |= *s;
        }
        self.clear_tail();
    }

    /// Number of zero bits in the inclusive range `[lo, hi]`.
    pub fn count_zeros_in(&self, lo: usize, hi: usize) -> usize {
        debug_assert!(lo <= hi && hi < self.len);
        let (wl, wh) = (lo / WORD, hi / WORD);
        let mut ones = 0usize;
        for wi in wl..=wh {
            ones += (self.words[wi] & range_mask(wi, lo, hi)).count_ones() as usize;
        }
        hi - lo + 1 - ones
    }

    /// Positions of zero bits in the inclusive range `[lo, hi]`, ascending.
    pub fn zeros_in(&self, lo: usize, hi: usize) -> Vec<usize> {
        debug_assert!(lo <= hi && hi < self.len);
        let mut out = Vec::new();
        for wi in lo / WORD..=hi / WORD {
            let mut w = !self.words[wi] & range_mask(wi, lo, hi);
            while w != 0 {
                out.push(wi * WORD + w.trailing_zeros() as usize);
                w &= w - 1;
            }
        }
        out
    }

    #[inline]
    fn clear_tail(&mut self) {
        let r = self.len % WORD;
        if r != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << r) - 1;
            }
        }
    }
}

#[inline]
fn range_mask(wi: usize, lo: usize, hi: usize) -> u64 {
    let start = wi * WORD;
    let from = lo.saturating_sub(start).min(WORD);
    let to = (hi + 1 - start).min(WORD); // exclusive, hi >= start
    let upper = if to == WORD { !0 } else { (1u64 << to) - 1 };
    let lower = if from == 0 { !0 } else { !((1u64 << from) - 1) };
    upper & lower
}

/// Hot loop: `dst |= src << shift` on raw words, dropping bits past the end
/// of `dst`.
#[inline]
pub fn or_shifted_words(dst: &mut [u64], src: &[u64], shift: usize) {
    let (ws, bs) = (shift / WORD, shift % WORD);
    if ws >= dst.len() || src.is_empty() {
        return;
    }
    let room = dst.len() - ws;
    let dst = &mut dst[ws..];
    if bs == 0 {
        for (d, s) in dst.iter_mut().zip(src) {
            *d |= *s;
        }
        return;
    }
    let inv = WORD - bs;
    dst[0] |= src[0] << bs;
    let body = room.min(src.len()) - 1;
    for (d, (cur, prev)) in dst[1..=body].iter_mut().zip(src[1..=body].iter().zip(&src[..body])) {
        *d |= (cur << bs) | (prev >> inv);
    }
    if body + 1 < room {
        dst[body + 1] |= src[body] >> inv;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn naive_shift(src: &[usize], len: usize, shift: usize) -> Vec<usize> {
        src.iter().map(|&i| i + shift).filter(|&i| i < len).collect()
    }

    #[test]
    fn range_counts() {
        let v = BitVec::from_positions(200, [0, 5, 63, 64, 127, 130, 199]);
        assert_eq!(v.count_zeros_in(0, 199), 193);
        assert_eq!(v.zeros_in(62, 66), vec![62, 65, 66]);
        assert_eq!(v.count_zeros_in(63, 64), 0);
        assert_eq!(v.zeros_in(199, 199), Vec::<usize>::new());
        assert_eq!(BitVec::ones(70).count_ones(), 70);
    }

    #[test]
    fn fold_reduces_mod_n() {
        let n = 70;
        let src = BitVec::from_positions(2 * n, [3, 69, 70, 75, 139]);
        let mut dst = BitVec::zeros(n);
        dst.or_folded(&src);
        assert_eq!(dst.iter_ones().collect::<Vec<_>>(), vec![0, 3, 5, 69]);
    }

    proptest! {
        #[test]
        fn shifted_or_matches_naive(
            positions in proptest::collection::btree_set(0usize..300, 0..40),
            shift in 0usize..400,
            extra in 0usize..300,
        ) {
            let src_len = 300;
            let src = BitVec::from_positions(src_len, positions.iter().copied());
            let dst_len = src_len + extra;
            let mut dst = BitVec::zeros(dst_len);
            or_shifted_words(&mut dst.words, &src.words, shift);
            dst.clear_tail();
            let expected = naive_shift(&positions.iter().copied().collect::<Vec<_>>(), dst_len, shift);
            prop_assert_eq!(dst.iter_ones().collect::<Vec<_>>(), expected);
        }

        #[test]
        fn zeros_in_matches_naive(
            positions in proptest::collection::btree_set(0usize..500, 0..200),
            a in 0usize..500, b in 0usize..500,
        ) {
            let (lo, hi) = (a.min(b), a.max(b));
            let v = BitVec::from_positions(500, positions.iter().copied());
            let expected: Vec<usize> = (lo..=hi).filter(|i| !positions.contains(i)).collect();
            prop_assert_eq!(v.count_zeros_in(lo, hi), expected.len());
            prop_assert_eq!(v.zeros_in(lo, hi), expected);
        }
    }
}
