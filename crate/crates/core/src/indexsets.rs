//! Binary-index combinatorics of the polar transform `G_N = G_2^{⊗n}`.
//!
//! Row and column indices are natural-order (no bit reversal). The support of
//! an index `i` is the set of bit positions where `bin(i)` has a one; it is
//! stored as a bitmask, so `S_i` is simply `i` itself viewed as a set. The
//! entry `(i, c)` of `G_N` is one iff `S_c ⊆ S_i`.

use std::collections::{HashSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest number of polarization layers supported by the bitmask encoding.
pub const MAX_LAYERS: u32 = 30;

pub(crate) fn check_layers(n: u32) -> Result<()> {
    if n > MAX_LAYERS {
        return Err(Error::UnsupportedLayers(n));
    }
    Ok(())
}

pub(crate) fn check_index(i: usize, n: u32) -> Result<()> {
    check_layers(n)?;
    if i >> n != 0 {
        return Err(Error::IndexOutOfRange { index: i, n });
    }
    Ok(())
}

/// Number of ones in `bin(i)`, i.e. `|S_i|`.
#[inline]
pub fn popcount(i: usize) -> u32 {
    i.count_ones()
}

/// An index together with its support `S` and the complement `T = [0, n-1] \ S`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct IndexSupport {
    pub index: usize,
    pub n: u32,
    s_mask: u32,
}

impl IndexSupport {
    /// `S_i` as a bitmask.
    pub fn s_mask(&self) -> u32 {
        self.s_mask
    }

    /// `T_i` as a bitmask.
    pub fn t_mask(&self) -> u32 {
        !self.s_mask & low_mask(self.n)
    }

    /// `S_i` as ascending bit positions.
    pub fn s(&self) -> Vec<u32> {
        positions(self.s_mask)
    }

    /// `T_i` as ascending bit positions.
    pub fn t(&self) -> Vec<u32> {
        positions(self.t_mask())
    }

    pub fn weight(&self) -> u32 {
        self.s_mask.count_ones()
    }

    /// Rebuilds the index from its support.
    pub fn reconstruct(&self) -> usize {
        self.s().iter().map(|&a| 1usize << a).sum()
    }
}

#[inline]
pub(crate) fn low_mask(n: u32) -> u32 {
    if n >= 32 {
        u32::MAX
    } else {
        (1u32 << n) - 1
    }
}

/// Ascending positions of the set bits of `mask`.
pub fn positions(mask: u32) -> Vec<u32> {
    let mut out = Vec::with_capacity(mask.count_ones() as usize);
    let mut m = mask;
    while m != 0 {
        out.push(m.trailing_zeros());
        m &= m - 1;
    }
    out
}

pub fn support(i: usize, n: u32) -> Result<IndexSupport> {
    check_index(i, n)?;
    Ok(IndexSupport {
        index: i,
        n,
        s_mask: i as u32,
    })
}

/// Entry `(i, c)` of `G_N`, computed from supports without materializing the matrix.
pub fn transform_entry(i: usize, c: usize, n: u32) -> Result<bool> {
    check_index(i, n)?;
    check_index(c, n)?;
    Ok(c & !i == 0)
}

/// Hamming weight of row `g_i`, which is `2^{|S_i|}`.
pub fn row_weight(i: usize, n: u32) -> Result<u64> {
    check_index(i, n)?;
    Ok(1u64 << popcount(i))
}

/// Hamming weight of `g_i ⊕ g_j` from the supports alone.
pub fn pair_sum_weight(i: usize, j: usize, n: u32) -> Result<u64> {
    check_index(i, n)?;
    check_index(j, n)?;
    let wi = 1u64 << popcount(i);
    let wj = 1u64 << popcount(j);
    let common = 1u64 << popcount(i & j);
    Ok(wi + wj - 2 * common)
}

/// Indices reachable from `i` by one elementary move: adding a one, or moving
/// a one to a higher zero position (left-swap).
pub fn elementary_successors(i: usize, n: u32) -> Vec<usize> {
    let mut out = Vec::new();
    for b in 0..n {
        if i >> b & 1 == 0 {
            out.push(i | 1 << b);
        }
    }
    for a in 0..n {
        if i >> a & 1 == 1 {
            for b in a + 1..n {
                if i >> b & 1 == 0 {
                    out.push(i & !(1 << a) | 1 << b);
                }
            }
        }
    }
    out
}

/// Sufficient condition for `i ⪯ j`: pair the bits of `S_i \ S_j` with the
/// bits of `S_j \ S_i` in ascending order and require each of the former to
/// sit strictly below its partner.
fn matching_criterion(i: usize, j: usize) -> bool {
    let a = positions((i & !j) as u32);
    let b = positions((j & !i) as u32);
    a.len() <= b.len() && a.iter().zip(&b).all(|(x, y)| x < y)
}

/// `i ⪯ j` under the closure of one-bit additions and left-swaps.
///
/// The matching criterion answers most positive queries directly; everything
/// else falls back to a breadth-first search over elementary moves, pruned to
/// indices that can still reach `j` (every move increases the index and never
/// decreases the popcount).
pub fn partial_order_leq(i: usize, j: usize, n: u32) -> Result<bool> {
    check_index(i, n)?;
    check_index(j, n)?;
    if i == j {
        return Ok(true);
    }
    if i > j || popcount(i) > popcount(j) {
        return Ok(false);
    }
    if matching_criterion(i, j) {
        return Ok(true);
    }
    Ok(reachable(i, j, n))
}

fn reachable(i: usize, j: usize, n: u32) -> bool {
    let target_weight = popcount(j);
    let mut seen = HashSet::new();
    let mut queue = VecDeque::from([i]);
    seen.insert(i);
    while let Some(x) = queue.pop_front() {
        for y in elementary_successors(x, n) {
            if y == j {
                return true;
            }
            if y < j && popcount(y) <= target_weight && seen.insert(y) {
                queue.push_back(y);
            }
        }
    }
    false
}

/// The information set of a polar-family code of length `N = 2^n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawProfile", into = "RawProfile")]
pub struct RateProfile {
    n: u32,
    indices: Vec<usize>,
    member: Vec<bool>,
}

#[derive(Serialize, Deserialize)]
struct RawProfile {
    n: u32,
    #[serde(rename = "I")]
    indices: Vec<usize>,
}

impl TryFrom<RawProfile> for RateProfile {
    type Error = Error;

    fn try_from(raw: RawProfile) -> Result<Self> {
        RateProfile::new(raw.n, raw.indices)
    }
}

impl From<RateProfile> for RawProfile {
    fn from(p: RateProfile) -> Self {
        RawProfile {
            n: p.n,
            indices: p.indices,
        }
    }
}

impl RateProfile {
    /// Builds a profile from arbitrary-order indices; duplicates are rejected.
    pub fn new(n: u32, indices: impl IntoIterator<Item = usize>) -> Result<Self> {
        check_layers(n)?;
        let len = 1usize << n;
        let mut member = vec![false; len];
        let mut sorted = Vec::new();
        for i in indices {
            check_index(i, n)?;
            if member[i] {
                return Err(Error::DuplicateIndex(i));
            }
            member[i] = true;
            sorted.push(i);
        }
        sorted.sort_unstable();
        Ok(Self {
            n,
            indices: sorted,
            member,
        })
    }

    /// Reed-Muller code `RM(r, n)`: every row of weight at least `2^{n-r}`.
    pub fn reed_muller(r: u32, n: u32) -> Result<Self> {
        check_layers(n)?;
        let min_ones = n.saturating_sub(r);
        Self::new(n, (0..1usize << n).filter(|&i| popcount(i) >= min_ones))
    }

    pub fn full(n: u32) -> Result<Self> {
        Self::new(n, 0..1usize << n)
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// Code length `N = 2^n`.
    pub fn len(&self) -> usize {
        1 << self.n
    }

    /// Dimension `K = |I|`.
    pub fn dimension(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Information indices in ascending order.
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn contains(&self, i: usize) -> bool {
        self.member.get(i).copied().unwrap_or(false)
    }

    /// Membership mask over `[0, N-1]`.
    pub fn mask(&self) -> &[bool] {
        &self.member
    }

    /// Frozen indices `I^c` in ascending order.
    pub fn frozen(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| !self.member[i]).collect()
    }

    /// Smallest support size over `I`; `d_min = 2^{min_support}` for polar codes.
    pub fn min_support(&self) -> Option<u32> {
        self.indices.iter().map(|&i| popcount(i)).min()
    }

    /// Minimum row weight `w_min` over the information set.
    pub fn min_row_weight(&self) -> Option<u64> {
        self.min_support().map(|s| 1u64 << s)
    }

    /// Information rows of minimum weight (the set `B`).
    pub fn min_weight_rows(&self) -> Vec<usize> {
        match self.min_support() {
            Some(s) => self
                .indices
                .iter()
                .copied()
                .filter(|&i| popcount(i) == s)
                .collect(),
            None => Vec::new(),
        }
    }

    /// Returns `(I \ removed) ∪ added`.
    pub fn swapped(&self, removed: &[usize], added: &[usize]) -> Result<Self> {
        let kept = self
            .indices
            .iter()
            .copied()
            .filter(|i| !removed.contains(i));
        Self::new(self.n, kept.chain(added.iter().copied()))
    }

    /// First pair `(i, j)` with `i ∈ I`, `j ⪰ i`, `j ∉ I`, if any.
    pub fn pop_violation(&self) -> Option<(usize, usize)> {
        // Checking elementary successors suffices: the order is their transitive closure.
        for &i in &self.indices {
            for j in elementary_successors(i, self.n) {
                if !self.member[j] {
                    return Some((i, j));
                }
            }
        }
        None
    }
}

/// Partial Order Property: `I` is closed upward under `⪯`.
pub fn satisfies_pop(profile: &RateProfile) -> bool {
    profile.pop_violation().is_none()
}
