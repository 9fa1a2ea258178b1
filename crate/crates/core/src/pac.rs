//! Convolutional precoding and PAC minimum-weight counting.
//!
//! A PAC code sends `v` (data on `I`, zeros on `I^c`) through the rate-1
//! convolution `u_k = ⊕_t p_t v_{k-t}` before the polar transform. Since the
//! convolution is unit upper-triangular, the first one of `u` coincides with
//! the first one of `v`, so codewords still split into cosets by leader.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bits;
use crate::error::{Error, Result};
use crate::indexsets::RateProfile;
use crate::minweight::{k_set, pattern_words, MinWeightReport};

/// Convolution coefficients `p_0 .. p_m` with `p_0 = p_m = 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Precoder {
    p: Vec<bool>,
}

impl Precoder {
    pub fn new(p: Vec<bool>) -> Result<Self> {
        match (p.first(), p.last()) {
            (Some(true), Some(true)) => Ok(Self { p }),
            (None, _) => Err(Error::InvalidPrecoder("empty coefficient list".into())),
            _ => Err(Error::InvalidPrecoder(
                "first and last coefficients must be 1".into(),
            )),
        }
    }

    /// The identity precoder `p = [1]`.
    pub fn identity() -> Self {
        Self { p: vec![true] }
    }

    /// `p = [1,0,1,1,0,1,1]`.
    pub fn standard() -> Self {
        "1011011".parse().expect("valid literal")
    }

    pub fn coefficients(&self) -> &[bool] {
        &self.p
    }

    /// Memory `m`.
    pub fn memory(&self) -> usize {
        self.p.len() - 1
    }

    pub fn is_identity(&self) -> bool {
        self.p.len() == 1
    }

    /// The first `len` coefficients of the power series `1 / p(D)`.
    pub fn inverse_series(&self, len: usize) -> Vec<bool> {
        let mut q = vec![false; len];
        for k in 0..len {
            let mut acc = k == 0;
            for t in 1..=self.memory().min(k) {
                acc ^= self.p[t] & q[k - t];
            }
            q[k] = acc;
        }
        q
    }
}

impl FromStr for Precoder {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let p = s
            .trim()
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(Error::InvalidPrecoder(format!(
                    "unexpected character {c:?}"
                ))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(p)
    }
}

impl fmt::Display for Precoder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.p {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl TryFrom<String> for Precoder {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Precoder> for String {
    fn from(p: Precoder) -> Self {
        p.to_string()
    }
}

/// `u_i = ⊕_t p_t v_{i-t}`, with `v` zero outside its range.
pub fn precode(v: &[bool], p: &Precoder) -> Vec<bool> {
    let mut u = vec![false; v.len()];
    for (i, &vi) in v.iter().enumerate() {
        if vi {
            for (t, &pt) in p.coefficients().iter().enumerate() {
                if pt && i + t < u.len() {
                    u[i + t] ^= true;
                }
            }
        }
    }
    u
}

/// Back-substitution `v_i = u_i ⊕ ⊕_{t≥1} p_t v_{i-t}`.
pub fn precode_inverse(u: &[bool], p: &Precoder) -> Vec<bool> {
    let mut v = vec![false; u.len()];
    let coeffs = p.coefficients();
    for i in 0..u.len() {
        let mut acc = u[i];
        for t in 1..coeffs.len().min(i + 1) {
            acc ^= coeffs[t] & v[i - t];
        }
        v[i] = acc;
    }
    v
}

/// Places `data` on `I` (ascending) and zeros elsewhere.
pub fn embed(data: &[bool], profile: &RateProfile) -> Result<Vec<bool>> {
    if data.len() != profile.dimension() {
        return Err(Error::LengthMismatch {
            expected: profile.dimension(),
            actual: data.len(),
        });
    }
    let mut v = vec![false; profile.len()];
    for (&i, &d) in profile.indices().iter().zip(data) {
        v[i] = d;
    }
    Ok(v)
}

/// Codeword `precode(v, p) · G_N`.
pub fn pac_encode(data: &[bool], profile: &RateProfile, p: &Precoder) -> Result<Vec<bool>> {
    let u = precode(&embed(data, profile)?, p);
    let mut words = bits::from_bools(&u);
    bits::transform(&mut words, profile.n());
    Ok(bits::to_bools(&words, profile.len()))
}

/// Exact minimum-weight count of the PAC code.
///
/// For each leader `i` of minimum row weight, every `u` with first one at
/// `i` and `w(uG) = w(g_i)` is built level by level from the low bits of `i`:
/// a one bit doubles the partial codeword `x -> (x, x)`, a zero bit extends
/// it to `(x ⊕ y, y)` for some `y ⊆ supp(x)`, which fills the next block of
/// `u` with `y G`. Requiring `v_f = 0` on every frozen `f` turns each level
/// into a GF(2) linear system in the bits of `y`; consistent solutions are
/// enumerated until the final level, which is counted in closed form.
pub fn pac_min_weight_count(
    profile: &RateProfile,
    p: &Precoder,
    budget: u64,
) -> Result<MinWeightReport> {
    let w_min = profile.min_row_weight().ok_or(Error::EmptyProfile)?;
    let leaders = profile.min_weight_rows();
    let counts = leaders
        .par_iter()
        .map(|&i| pac_coset_count(i, profile, p, budget).map(|c| (i, c)))
        .collect::<Result<Vec<_>>>()?;
    let report = MinWeightReport::from_counts(w_min, counts.into_iter().collect())?;
    if report.a_dmin == 0 {
        return Err(Error::MinDistanceAboveRowWeight { w_min });
    }
    Ok(report)
}

/// Number of weight-`w(g_i)` PAC codewords whose `v` starts at `i`.
pub fn pac_coset_count(i: usize, profile: &RateProfile, p: &Precoder, budget: u64) -> Result<u64> {
    if !profile.contains(i) {
        return Ok(0);
    }
    let n = profile.n();
    let mut search = LeaderSearch {
        i,
        q: p.inverse_series(profile.len()),
        frozen: profile.mask().iter().map(|&b| !b).collect(),
        last_zero: (0..n).rev().find(|&b| i >> b & 1 == 0),
        budget,
        visited: 0,
    };
    let mut u = bits::zeros(n);
    bits::set(&mut u, i);
    search.level(1, vec![1], &mut u)
}

struct LeaderSearch {
    i: usize,
    q: Vec<bool>,
    frozen: Vec<bool>,
    last_zero: Option<u32>,
    budget: u64,
    visited: u64,
}

impl LeaderSearch {
    /// `x` is the partial codeword of length `2^(level-1)`.
    fn level(&mut self, level: u32, x: Vec<u64>, u: &mut Vec<u64>) -> Result<u64> {
        self.visited += 1;
        if self.visited > self.budget {
            return Err(Error::BudgetExceeded {
                budget: self.budget,
            });
        }
        let Some(last_zero) = self.last_zero else {
            return Ok(1);
        };
        let half = 1usize << (level - 1);
        let bit = level - 1;
        if self.i >> bit & 1 == 1 {
            return self.level(level + 1, doubled(&x, half, &x), u);
        }

        let start = (self.i & !((1usize << level) - 1)) + half;
        let vars = bits::ones(&x);
        let system = self.block_system(start, half, &vars, u);
        let Some((particular, kernel)) = solve(system, vars.len()) else {
            return Ok(0);
        };
        if bit == last_zero {
            return if kernel.len() >= 64 {
                Err(Error::CountOverflow)
            } else {
                Ok(1u64 << kernel.len())
            };
        }
        if kernel.len() >= 63 {
            return Err(Error::BudgetExceeded {
                budget: self.budget,
            });
        }
        let mut total = 0u64;
        let words = half.div_ceil(64);
        for sel in 0u64..1 << kernel.len() {
            let mut alpha = particular.clone();
            for (t, k) in kernel.iter().enumerate() {
                if sel >> t & 1 == 1 {
                    xor_into(&mut alpha, k);
                }
            }
            let mut y = vec![0u64; words];
            for (t, &var) in vars.iter().enumerate() {
                if bits::get(&alpha, t) {
                    bits::set(&mut y, var);
                }
            }
            let mut block = y.clone();
            bits::transform(&mut block, bit);
            let placed = bits::ones(&block);
            for &c in &placed {
                bits::flip(u, start + c);
            }
            let mut left = x.clone();
            xor_into(&mut left, &y);
            let next = doubled(&left, half, &y);
            let count = self.level(level + 1, next, u)?;
            total = total.checked_add(count).ok_or(Error::CountOverflow)?;
            for &c in &placed {
                bits::flip(u, start + c);
            }
        }
        Ok(total)
    }

    /// One equation per frozen index `f` in `[start, start + half)`:
    /// `⊕_t α_t (g_t * q)(f - start) = ⊕_{k<start} u_k q_{f-k}`.
    /// The constant sits in bit `vars.len()` of each row.
    fn block_system(&self, start: usize, half: usize, vars: &[usize], u: &[u64]) -> Vec<Vec<u64>> {
        let cols = vars.len() + 1;
        let words = cols.div_ceil(64);
        let earlier: Vec<usize> = bits::ones(u).into_iter().filter(|&k| k < start).collect();
        // Impulse responses of each variable's row of G, truncated to the block.
        let responses: Vec<Vec<bool>> = vars
            .iter()
            .map(|&t| {
                let mut r = vec![false; half];
                let mut c = t;
                loop {
                    for (d, slot) in r.iter_mut().enumerate().skip(c) {
                        *slot ^= self.q[d - c];
                    }
                    if c == 0 {
                        break;
                    }
                    c = (c - 1) & t;
                }
                r
            })
            .collect();
        let mut rows = Vec::new();
        for off in 0..half {
            let f = start + off;
            if !self.frozen[f] {
                continue;
            }
            let mut row = vec![0u64; words];
            for (t, r) in responses.iter().enumerate() {
                if r[off] {
                    bits::set(&mut row, t);
                }
            }
            let constant = earlier.iter().fold(false, |acc, &k| acc ^ self.q[f - k]);
            if constant {
                bits::set(&mut row, vars.len());
            }
            rows.push(row);
        }
        rows
    }
}

fn doubled(left: &[u64], half: usize, right: &[u64]) -> Vec<u64> {
    let len = 2 * half;
    let mut out = vec![0u64; len.div_ceil(64)];
    for c in bits::ones(left) {
        bits::set(&mut out, c);
    }
    for c in bits::ones(right) {
        bits::set(&mut out, half + c);
    }
    out
}

fn xor_into(dst: &mut [u64], src: &[u64]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d ^= s;
    }
}

/// Solves an augmented GF(2) system over `nvars` unknowns. Returns a
/// particular solution and a kernel basis, or `None` if inconsistent.
fn solve(mut rows: Vec<Vec<u64>>, nvars: usize) -> Option<(Vec<u64>, Vec<Vec<u64>>)> {
    let words = (nvars + 64) / 64;
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..nvars {
        let Some(p) = (r..rows.len()).find(|&k| bits::get(&rows[k], col)) else {
            continue;
        };
        rows.swap(r, p);
        let pivot = rows[r].clone();
        for (k, row) in rows.iter_mut().enumerate() {
            if k != r && bits::get(row, col) {
                xor_into(row, &pivot);
            }
        }
        pivots.push(col);
        r += 1;
    }
    if rows[r..].iter().any(|row| bits::get(row, nvars)) {
        return None;
    }
    let mut particular = vec![0u64; words];
    for (k, &col) in pivots.iter().enumerate() {
        if bits::get(&rows[k], nvars) {
            bits::set(&mut particular, col);
        }
    }
    let mut kernel = Vec::new();
    let mut is_pivot = vec![false; nvars];
    for &c in &pivots {
        is_pivot[c] = true;
    }
    for free in (0..nvars).filter(|&c| !is_pivot[c]) {
        let mut k = vec![0u64; words];
        bits::set(&mut k, free);
        for (row, &col) in pivots.iter().enumerate() {
            if bits::get(&rows[row], free) {
                bits::set(&mut k, col);
            }
        }
        kernel.push(k);
    }
    Some((particular, kernel))
}

/// Counts candidate patterns `{i} ∪ J ∪ M_red(J)`, `J ⊆ K_i`, whose
/// pre-image under the precoder lies in `I`.
///
/// This only sees codewords whose `u` avoids rows lighter than `g_i`, so it
/// is a lower bound on [`pac_min_weight_count`] and coincides with it when
/// the precoder never pulls such rows in.
pub fn pac_candidate_count(
    profile: &RateProfile,
    p: &Precoder,
    budget: u64,
) -> Result<MinWeightReport> {
    let n = profile.n();
    let w_min = profile.min_row_weight().ok_or(Error::EmptyProfile)?;
    let mut per_coset = BTreeMap::new();
    for i in profile.min_weight_rows() {
        let k = k_set(i, n)?.members();
        if k.len() >= 64 || 1u64 << k.len() > budget {
            return Err(Error::BudgetExceeded { budget });
        }
        let count = (0u64..1 << k.len())
            .into_par_iter()
            .filter(|&sel| {
                let j: Vec<usize> = (0..k.len())
                    .filter(|&t| sel >> t & 1 == 1)
                    .map(|t| k[t])
                    .collect();
                let u = pattern_words(i, &j, n);
                let v = precode_inverse(&bits::to_bools(&u, profile.len()), p);
                v.iter()
                    .enumerate()
                    .all(|(idx, &b)| !b || profile.contains(idx))
            })
            .count();
        per_coset.insert(i, count as u64);
    }
    MinWeightReport::from_counts(w_min, per_coset)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::indexsets::popcount;
    use crate::minweight::{brute_force_spectrum, coset_report, spectrum_min, DEFAULT_BUDGET};

    fn baseline() -> RateProfile {
        let mut idx: Vec<usize> = (0..64).filter(|&i| popcount(i) >= 4).collect();
        idx.extend([26, 28, 38, 41, 42, 44, 49, 50, 52, 56]);
        RateProfile::new(6, idx).unwrap()
    }

    #[test]
    fn precoder_parsing() {
        let p: Precoder = "1011011".parse().unwrap();
        assert_eq!(p.memory(), 6);
        assert_eq!(p.to_string(), "1011011");
        assert!("0101".parse::<Precoder>().is_err());
        assert!("110".parse::<Precoder>().is_err());
        assert!("".parse::<Precoder>().is_err());
        assert!("1x1".parse::<Precoder>().is_err());
    }

    #[test]
    fn precode_examples() {
        let p = Precoder::standard();
        let mut v = vec![false; 16];
        v[0] = true;
        let u = precode(&v, &p);
        let ones: Vec<usize> = (0..16).filter(|&k| u[k]).collect();
        assert_eq!(ones, vec![0, 2, 3, 5, 6]);
        assert_eq!(precode(&v, &Precoder::identity()), v);
        assert_eq!(precode(&[false; 8], &p), vec![false; 8]);
        assert_eq!(precode_inverse(&u, &p), v);
    }

    #[test]
    fn inverse_series_inverts() {
        let p = Precoder::standard();
        let q = p.inverse_series(40);
        let qp = precode(&q, &p);
        assert!(qp[0]);
        assert!(qp[1..].iter().all(|&b| !b));
    }

    #[test]
    fn table_counts() {
        let p = Precoder::standard();
        let base = baseline();
        let r = pac_min_weight_count(&base, &p, DEFAULT_BUDGET).unwrap();
        let expect: BTreeMap<usize, u64> = [
            (26, 0),
            (28, 0),
            (38, 128),
            (41, 128),
            (42, 64),
            (44, 32),
            (49, 64),
            (50, 32),
            (52, 16),
            (56, 8),
        ]
        .into_iter()
        .collect();
        assert_eq!(r.per_coset, expect);
        assert_eq!(r.a_dmin, 472);
        let i1 = base.swapped(&[56], &[25]).unwrap();
        assert_eq!(
            pac_min_weight_count(&i1, &p, DEFAULT_BUDGET)
                .unwrap()
                .a_dmin,
            232
        );
        let i2 = base.swapped(&[52, 56], &[22, 25]).unwrap();
        assert_eq!(
            pac_min_weight_count(&i2, &p, DEFAULT_BUDGET)
                .unwrap()
                .a_dmin,
            112
        );
    }

    #[test]
    fn identity_precoder_matches_polar() {
        let base = baseline();
        for prof in [
            base.clone(),
            base.swapped(&[56], &[25]).unwrap(),
            base.swapped(&[52, 56], &[22, 25]).unwrap(),
        ] {
            let a = pac_min_weight_count(&prof, &Precoder::identity(), DEFAULT_BUDGET).unwrap();
            let b = coset_report(&prof, DEFAULT_BUDGET).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn lighter_rows_reachable_through_precoder() {
        // v = e_3 with p = [1,1] gives u = e_3 + e_4 and a weight-4 codeword
        // that no J ⊆ K_3 describes.
        let prof = RateProfile::new(4, [3, 5, 6, 7, 9, 10, 11, 12, 13, 14, 15]).unwrap();
        let p: Precoder = "11".parse().unwrap();
        let exact = pac_min_weight_count(&prof, &p, DEFAULT_BUDGET).unwrap();
        let spectrum = brute_force_spectrum(&prof, Some(&p)).unwrap();
        assert_eq!(spectrum_min(&spectrum), Some((exact.d_min, exact.a_dmin)));
        let candidates = pac_candidate_count(&prof, &p, DEFAULT_BUDGET).unwrap();
        assert!(candidates.a_dmin < exact.a_dmin);
    }

    #[test]
    fn encode_reduces_to_polar() {
        let prof = baseline();
        let data: Vec<bool> = (0..32).map(|k| k % 3 == 1).collect();
        let polar = pac_encode(&data, &prof, &Precoder::identity()).unwrap();
        let mut v = bits::from_bools(&embed(&data, &prof).unwrap());
        bits::transform(&mut v, 6);
        assert_eq!(polar, bits::to_bools(&v, 64));
        assert!(pac_encode(&[true], &prof, &Precoder::identity()).is_err());
    }
}
