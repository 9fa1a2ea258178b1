//! Packed GF(2) vectors of length `N = 2^n`, bit `c` of the vector at bit
//! `c % 64` of word `c / 64`.

const LOW_MASKS: [u64; 6] = [
    0x5555_5555_5555_5555,
    0x3333_3333_3333_3333,
    0x0f0f_0f0f_0f0f_0f0f,
    0x00ff_00ff_00ff_00ff,
    0x0000_ffff_0000_ffff,
    0x0000_0000_ffff_ffff,
];

pub fn word_count(n: u32) -> usize {
    (1usize << n).div_ceil(64)
}

pub fn zeros(n: u32) -> Vec<u64> {
    vec![0; word_count(n)]
}

#[inline]
pub fn get(words: &[u64], c: usize) -> bool {
    words[c >> 6] >> (c & 63) & 1 == 1
}

#[inline]
pub fn flip(words: &mut [u64], c: usize) {
    words[c >> 6] ^= 1 << (c & 63);
}

#[inline]
pub fn set(words: &mut [u64], c: usize) {
    words[c >> 6] |= 1 << (c & 63);
}

pub fn weight(words: &[u64]) -> u64 {
    words.iter().map(|w| w.count_ones() as u64).sum()
}

/// Ascending positions of the ones.
pub fn ones(words: &[u64]) -> Vec<usize> {
    let mut out = Vec::new();
    for (k, &w) in words.iter().enumerate() {
        let mut w = w;
        while w != 0 {
            out.push(k * 64 + w.trailing_zeros() as usize);
            w &= w - 1;
        }
    }
    out
}

pub fn from_ones(n: u32, positions: impl IntoIterator<Item = usize>) -> Vec<u64> {
    let mut words = zeros(n);
    for c in positions {
        flip(&mut words, c);
    }
    words
}

pub fn from_bools(bits: &[bool]) -> Vec<u64> {
    let mut words = vec![0u64; bits.len().div_ceil(64)];
    for (c, _) in bits.iter().enumerate().filter(|(_, &b)| b) {
        set(&mut words, c);
    }
    words
}

pub fn to_bools(words: &[u64], len: usize) -> Vec<bool> {
    (0..len).map(|c| get(words, c)).collect()
}

/// In-place `x <- x G_N` on a packed vector (an involution).
///
/// Column `c` of `x G_N` is the XOR of `x_i` over all `i` whose support
/// contains `S_c`, so each stage folds bit `c | 2^b` into bit `c`.
pub fn transform(words: &mut [u64], n: u32) {
    for (b, mask) in LOW_MASKS.iter().enumerate().take(n.min(6) as usize) {
        let shift = 1u32 << b;
        for w in words.iter_mut() {
            *w ^= (*w >> shift) & mask;
        }
    }
    for b in 6..n {
        let step = 1usize << (b - 6);
        for k in 0..words.len() {
            if k & step == 0 {
                words[k] ^= words[k | step];
            }
        }
    }
}

/// Row `g_i` of `G_N`: ones at every column `c` with `S_c ⊆ S_i`.
pub fn row(i: usize, n: u32) -> Vec<u64> {
    let mut words = zeros(n);
    let mut c = i;
    loop {
        set(&mut words, c);
        if c == 0 {
            break;
        }
        c = (c - 1) & i;
    }
    words
}

/// `⊕_{r∈rows} g_r`, computed by encoding the indicator vector.
pub fn encode_rows(rows: &[usize], n: u32) -> Vec<u64> {
    let mut words = from_ones(n, rows.iter().copied());
    transform(&mut words, n);
    words
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn transform_matches_row_sums() {
        for n in 0..=8 {
            let len = 1usize << n;
            for i in (0..len).step_by(len / 8 + 1) {
                let mut x = from_ones(n, [i]);
                transform(&mut x, n);
                assert_eq!(x, row(i, n), "n={n} i={i}");
            }
        }
    }

    #[test]
    fn transform_is_involution() {
        let n = 9;
        let mut x = zeros(n);
        for c in (0..512).filter(|c| c % 7 == 3 || c % 11 == 1) {
            set(&mut x, c);
        }
        let orig = x.clone();
        transform(&mut x, n);
        assert_ne!(x, orig);
        transform(&mut x, n);
        assert_eq!(x, orig);
    }

    #[test]
    fn ones_round_trip() {
        let v = from_ones(8, [0, 5, 64, 200, 255]);
        assert_eq!(ones(&v), vec![0, 5, 64, 200, 255]);
        assert_eq!(weight(&v), 5);
        assert_eq!(from_bools(&to_bools(&v, 256)), v);
    }
}
