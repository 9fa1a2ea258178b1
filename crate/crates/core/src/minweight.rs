//! Minimum-weight codeword structure of polar-family codes.
//!
//! For a coset leader `i` the rows of `K_i` are exactly those at distance
//! `w(g_i)` from `g_i`. Every subset `J ⊆ K_i`, completed by the reduced
//! multiset `M(J)`, yields one codeword of weight `w(g_i)` in the coset of
//! `g_i`, and these exhaust the coset when the code satisfies the partial
//! order property.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bits;
use crate::error::{Error, Result};
use crate::indexsets::{check_index, low_mask, popcount, RateProfile};
use crate::pac::Precoder;

/// Default cap on the number of `J` subsets evaluated per coset.
pub const DEFAULT_BUDGET: u64 = 1 << 20;

/// Largest dimension accepted by [`brute_force_spectrum`].
pub const MAX_SWEEP_DIMENSION: usize = 24;

/// Largest `|J|` accepted by [`m_construction_reference`].
pub const MAX_REFERENCE_J: usize = 20;

/// The rows `K_i` below `g_i` that sit at distance `w(g_i)` from it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KSet {
    pub i: usize,
    pub n: u32,
    /// One-bit additions to `S_i`.
    pub adds: Vec<usize>,
    /// Left-swaps of a one in `bin(i)` with a higher zero.
    pub swaps: Vec<usize>,
}

impl KSet {
    /// All members in ascending order.
    pub fn members(&self) -> Vec<usize> {
        let mut all: Vec<usize> = self.adds.iter().chain(&self.swaps).copied().collect();
        all.sort_unstable();
        all
    }

    pub fn len(&self) -> usize {
        self.adds.len() + self.swaps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, j: usize) -> bool {
        self.adds.contains(&j) || self.swaps.contains(&j)
    }
}

pub fn k_set(i: usize, n: u32) -> Result<KSet> {
    check_index(i, n)?;
    let mut adds = Vec::new();
    let mut swaps = Vec::new();
    for b in 0..n {
        if i >> b & 1 == 0 {
            adds.push(i | 1 << b);
        }
    }
    for a in 0..n {
        if i >> a & 1 == 1 {
            for b in a + 1..n {
                if i >> b & 1 == 0 {
                    swaps.push(i & !(1 << a) | 1 << b);
                }
            }
        }
    }
    adds.sort_unstable();
    swaps.sort_unstable();
    Ok(KSet { i, n, adds, swaps })
}

/// `|K_i| = |T_i| + Σ_{k∈S_i} #{ℓ > k : ℓ ∈ T_i}`.
pub fn k_size(i: usize, n: u32) -> Result<usize> {
    check_index(i, n)?;
    let t = !(i as u32) & low_mask(n);
    let mut size = t.count_ones() as usize;
    for k in 0..n {
        if i >> k & 1 == 1 {
            size += (t >> k).count_ones() as usize;
        }
    }
    Ok(size)
}

/// Right-swap predecessors of `j`: move one of its ones to a lower zero.
pub fn e_set(j: usize, n: u32) -> Result<Vec<usize>> {
    check_index(j, n)?;
    let mut out = Vec::new();
    for a in 0..n {
        if j >> a & 1 == 1 {
            for b in 0..a {
                if j >> b & 1 == 0 {
                    out.push(j & !(1 << a) | 1 << b);
                }
            }
        }
    }
    out.sort_unstable();
    Ok(out)
}

/// Summary of the minimum-weight codewords of a code.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MinWeightReport {
    pub d_min: u64,
    #[serde(rename = "A_dmin")]
    pub a_dmin: u64,
    /// Coset leader to number of weight-`d_min` codewords in its coset.
    pub per_coset: BTreeMap<usize, u64>,
    /// Leaders whose row weight equals `d_min`.
    #[serde(rename = "B")]
    pub leaders: Vec<usize>,
}

impl MinWeightReport {
    pub(crate) fn from_counts(d_min: u64, per_coset: BTreeMap<usize, u64>) -> Result<Self> {
        let a_dmin = per_coset
            .values()
            .try_fold(0u64, |acc, &v| acc.checked_add(v))
            .ok_or(Error::CountOverflow)?;
        let leaders = per_coset.keys().copied().collect();
        Ok(Self {
            d_min,
            a_dmin,
            per_coset,
            leaders,
        })
    }
}

fn pow2(e: usize) -> Result<u64> {
    if e >= 64 {
        Err(Error::CountOverflow)
    } else {
        Ok(1u64 << e)
    }
}

/// Closed-form error coefficient `A_dmin = Σ_{i∈B} 2^{|K_i|}`.
///
/// Only valid for profiles with the partial order property; anything else is
/// refused and should go through [`coset_report`].
pub fn error_coefficient(profile: &RateProfile) -> Result<MinWeightReport> {
    if let Some((index, successor)) = profile.pop_violation() {
        return Err(Error::PartialOrderViolation { index, successor });
    }
    let w_min = profile.min_row_weight().ok_or(Error::EmptyProfile)?;
    let mut per_coset = BTreeMap::new();
    for i in profile.min_weight_rows() {
        per_coset.insert(i, pow2(k_size(i, profile.n())?)?);
    }
    MinWeightReport::from_counts(w_min, per_coset)
}

fn validate_j(i: usize, j: &[usize], n: u32) -> Result<KSet> {
    let k = k_set(i, n)?;
    for &x in j {
        if !k.contains(x) {
            return Err(Error::NotInKSet {
                leader: i,
                index: x,
            });
        }
    }
    Ok(k)
}

/// The multiset `M` of extra rows for a given `J ⊆ K_i`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MMultiset {
    pub entries: BTreeMap<usize, u32>,
}

impl MMultiset {
    fn push(&mut self, m: usize) {
        *self.entries.entry(m).or_insert(0) += 1;
    }

    /// Entries of odd multiplicity, ascending.
    pub fn reduced(&self) -> Vec<usize> {
        self.entries
            .iter()
            .filter(|(_, &c)| c % 2 == 1)
            .map(|(&m, _)| m)
            .collect()
    }

    /// Total multiplicity.
    pub fn total(&self) -> u64 {
        self.entries.values().map(|&c| c as u64).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// `S_m` for a combination `J′`: the union of the new bits together with
/// the part of `S_i` shared by every member.
fn m_of(i: usize, combo: &[usize]) -> usize {
    let mut union = 0usize;
    let mut common = i;
    for &j in combo {
        union |= j & !i;
        common &= j;
    }
    union | common
}

/// Builds `M(J)` by choosing, for every set of at least two distinct new
/// bits, one member of `J` carrying each bit.
pub fn m_construction(i: usize, j: &[usize], n: u32) -> Result<MMultiset> {
    validate_j(i, j, n)?;
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for &x in j {
        groups.entry(x & !i).or_default().push(x);
    }
    let groups: Vec<Vec<usize>> = groups.into_values().collect();
    let mut out = MMultiset::default();
    let mut combo = Vec::with_capacity(groups.len());
    walk_groups(i, &groups, 0, &mut combo, &mut out);
    Ok(out)
}

fn walk_groups(
    i: usize,
    groups: &[Vec<usize>],
    g: usize,
    combo: &mut Vec<usize>,
    out: &mut MMultiset,
) {
    if g == groups.len() {
        if combo.len() >= 2 {
            out.push(m_of(i, combo));
        }
        return;
    }
    walk_groups(i, groups, g + 1, combo, out);
    for &x in &groups[g] {
        combo.push(x);
        walk_groups(i, groups, g + 1, combo, out);
        combo.pop();
    }
}

/// Reference `M(J)` from the set comprehension over all subsets of `J`.
pub fn m_construction_reference(i: usize, j: &[usize], n: u32) -> Result<MMultiset> {
    validate_j(i, j, n)?;
    if j.len() > MAX_REFERENCE_J {
        return Err(Error::BudgetExceeded {
            budget: 1 << MAX_REFERENCE_J,
        });
    }
    let mut out = MMultiset::default();
    for sel in 0u32..1 << j.len() {
        if sel.count_ones() < 2 {
            continue;
        }
        let combo: Vec<usize> = (0..j.len())
            .filter(|&t| sel >> t & 1 == 1)
            .map(|t| j[t])
            .collect();
        let mut seen = 0usize;
        let distinct = combo.iter().all(|&x| {
            let bit = x & !i;
            let fresh = seen & bit == 0;
            seen |= bit;
            fresh
        });
        if distinct {
            out.push(m_of(i, &combo));
        }
    }
    Ok(out)
}

/// `T*(S)` as a bitmask: XOR of the new bits of every `j ∈ J` with `S ⊆ S_j`.
pub fn t_star(i: usize, j: &[usize], s: u32, n: u32) -> Result<u32> {
    validate_j(i, j, n)?;
    if s & !(i as u32) != 0 {
        return Err(Error::NotSubsetOfLeader {
            leader: i,
            support: s,
        });
    }
    Ok(t_star_unchecked(i, j, s))
}

#[inline]
fn t_star_unchecked(i: usize, j: &[usize], s: u32) -> u32 {
    j.iter()
        .filter(|&&x| s & !(x as u32) == 0)
        .fold(0, |acc, &x| acc ^ (x & !i) as u32)
}

/// The codeword `{S ∪ T*(S) : S ⊆ S_i}` as a packed vector.
fn codeword_words(i: usize, j: &[usize], n: u32) -> Vec<u64> {
    let mut c = bits::zeros(n);
    let si = i as u32;
    let mut s = si;
    loop {
        let col = (s | t_star_unchecked(i, j, s)) as usize;
        bits::set(&mut c, col);
        if s == 0 {
            break;
        }
        s = (s - 1) & si;
    }
    c
}

/// The input pattern `u*` (indicator of `{i} ∪ J ∪ M_red(J)`) recovered from
/// the explicit codeword.
pub(crate) fn pattern_words(i: usize, j: &[usize], n: u32) -> Vec<u64> {
    let mut u = codeword_words(i, j, n);
    bits::transform(&mut u, n);
    u
}

/// One explicit minimum-weight codeword with its generating rows.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MinWeightCodeword {
    pub leader: usize,
    #[serde(rename = "J")]
    pub j: Vec<usize>,
    #[serde(rename = "M")]
    pub m: Vec<usize>,
    pub support: Vec<usize>,
}

/// Explicit support `{S ∪ T*(S) : S ⊆ S_i}` of the codeword generated by
/// `{i} ∪ J ∪ M_red(J)`, sorted ascending.
pub fn min_weight_codeword(i: usize, j: &[usize], profile: &RateProfile) -> Result<Vec<usize>> {
    Ok(min_weight_codeword_full(i, j, profile)?.support)
}

pub fn min_weight_codeword_full(
    i: usize,
    j: &[usize],
    profile: &RateProfile,
) -> Result<MinWeightCodeword> {
    let n = profile.n();
    check_leader(i, profile)?;
    validate_j(i, j, n)?;
    let missing: Vec<usize> = j
        .iter()
        .copied()
        .filter(|&x| !profile.contains(x))
        .collect();
    if !missing.is_empty() {
        return Err(Error::FrozenRowsRequired { rows: missing });
    }
    let m = m_construction(i, j, n)?.reduced();
    let missing: Vec<usize> = m
        .iter()
        .copied()
        .filter(|&x| !profile.contains(x))
        .collect();
    if !missing.is_empty() {
        return Err(Error::FrozenRowsRequired { rows: missing });
    }
    let mut jj = j.to_vec();
    jj.sort_unstable();
    Ok(MinWeightCodeword {
        leader: i,
        j: jj,
        m,
        support: bits::ones(&codeword_words(i, j, n)),
    })
}

fn check_leader(i: usize, profile: &RateProfile) -> Result<u64> {
    check_index(i, profile.n())?;
    if !profile.contains(i) {
        return Err(Error::FrozenRowsRequired { rows: vec![i] });
    }
    let w_min = profile.min_row_weight().ok_or(Error::EmptyProfile)?;
    let weight = 1u64 << popcount(i);
    if weight != w_min {
        return Err(Error::NotMinWeightLeader {
            index: i,
            weight,
            w_min,
        });
    }
    Ok(w_min)
}

/// Subsets of `K_i ∩ I` as index lists, in increasing bitmask order.
fn available_k(i: usize, profile: &RateProfile) -> Result<Vec<usize>> {
    Ok(k_set(i, profile.n())?
        .members()
        .into_iter()
        .filter(|&x| profile.contains(x))
        .collect())
}

fn subset_of(pattern: &[u64], mask: &[u64]) -> bool {
    pattern.iter().zip(mask).all(|(p, m)| p & !m == 0)
}

fn check_budget(avail: usize, budget: u64) -> Result<u64> {
    if avail >= 64 || 1u64 << avail > budget {
        return Err(Error::BudgetExceeded { budget });
    }
    Ok(1u64 << avail)
}

fn select(avail: &[usize], sel: u64) -> Vec<usize> {
    (0..avail.len())
        .filter(|&t| sel >> t & 1 == 1)
        .map(|t| avail[t])
        .collect()
}

/// Number of weight-`w(g_i)` codewords in the coset of `g_i` within the code,
/// i.e. the subsets `J ⊆ K_i ∩ I` whose completion `M_red(J)` lies in `I`.
///
/// Exact for any information set whose rows all have weight at least
/// `w(g_i)`, with or without the partial order property.
pub fn coset_count(i: usize, profile: &RateProfile, budget: u64) -> Result<u64> {
    check_leader(i, profile)?;
    let n = profile.n();
    let avail = available_k(i, profile)?;
    let total = check_budget(avail.len(), budget)?;
    let mask = bits::from_bools(profile.mask());
    let count = (0..total)
        .into_par_iter()
        .filter(|&sel| subset_of(&pattern_words(i, &select(&avail, sel), n), &mask))
        .count();
    Ok(count as u64)
}

/// Per-coset counts over every minimum-weight leader, via [`coset_count`].
pub fn coset_report(profile: &RateProfile, budget: u64) -> Result<MinWeightReport> {
    let w_min = profile.min_row_weight().ok_or(Error::EmptyProfile)?;
    let leaders = profile.min_weight_rows();
    let counts = leaders
        .par_iter()
        .map(|&i| coset_count(i, profile, budget).map(|c| (i, c)))
        .collect::<Result<Vec<_>>>()?;
    MinWeightReport::from_counts(w_min, counts.into_iter().collect())
}

/// Up to `limit` explicit minimum-weight codewords of the coset of `g_i`, in
/// increasing subset order over `K_i ∩ I`.
pub fn coset_codewords(
    i: usize,
    profile: &RateProfile,
    limit: usize,
    budget: u64,
) -> Result<Vec<MinWeightCodeword>> {
    check_leader(i, profile)?;
    let n = profile.n();
    let avail = available_k(i, profile)?;
    let total = check_budget(avail.len(), budget)?;
    let mask = bits::from_bools(profile.mask());
    let mut out = Vec::new();
    for sel in 0..total {
        if out.len() >= limit {
            break;
        }
        let j = select(&avail, sel);
        let u = pattern_words(i, &j, n);
        if !subset_of(&u, &mask) {
            continue;
        }
        let m = bits::ones(&u)
            .into_iter()
            .filter(|x| *x != i && !j.contains(x))
            .collect();
        let mut c = u;
        bits::transform(&mut c, n);
        out.push(MinWeightCodeword {
            leader: i,
            j,
            m,
            support: bits::ones(&c),
        });
    }
    Ok(out)
}

/// Exact weight distribution by sweeping all `2^K` messages, optionally
/// through a convolutional precoder.
pub fn brute_force_spectrum(
    profile: &RateProfile,
    precoder: Option<&Precoder>,
) -> Result<BTreeMap<u64, u64>> {
    let k = profile.dimension();
    if k > MAX_SWEEP_DIMENSION {
        return Err(Error::DimensionTooLarge {
            k,
            max: MAX_SWEEP_DIMENSION,
        });
    }
    let n = profile.n();
    let len = profile.len();
    let rows: Vec<Vec<u64>> = profile
        .indices()
        .iter()
        .map(|&i| {
            let mut u = bits::zeros(n);
            match precoder {
                Some(p) => {
                    for (t, &pt) in p.coefficients().iter().enumerate() {
                        if pt && i + t < len {
                            bits::set(&mut u, i + t);
                        }
                    }
                }
                None => bits::set(&mut u, i),
            }
            bits::transform(&mut u, n);
            u
        })
        .collect();

    // The top `hi` message bits select a chunk; each chunk walks a Gray code
    // over the remaining bits.
    let hi = k.min(8);
    let lo = k - hi;
    let words = bits::word_count(n);
    let partial: Vec<BTreeMap<u64, u64>> = (0u64..1 << hi)
        .into_par_iter()
        .map(|chunk| {
            let mut c = vec![0u64; words];
            for t in 0..hi {
                if chunk >> t & 1 == 1 {
                    xor_into(&mut c, &rows[lo + t]);
                }
            }
            let mut hist = BTreeMap::new();
            *hist.entry(bits::weight(&c)).or_insert(0) += 1;
            for step in 1u64..1 << lo {
                xor_into(&mut c, &rows[step.trailing_zeros() as usize]);
                *hist.entry(bits::weight(&c)).or_insert(0) += 1;
            }
            hist
        })
        .collect();
    let mut spectrum = BTreeMap::new();
    for h in partial {
        for (w, c) in h {
            *spectrum.entry(w).or_insert(0) += c;
        }
    }
    Ok(spectrum)
}

fn xor_into(dst: &mut [u64], src: &[u64]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d ^= s;
    }
}

/// `A_dmin` and `d_min` read off a weight distribution, ignoring weight zero.
pub fn spectrum_min(spectrum: &BTreeMap<u64, u64>) -> Option<(u64, u64)> {
    spectrum.iter().find(|(&w, _)| w > 0).map(|(&w, &c)| (w, c))
}
