//! Encoding and successive-cancellation (list) decoding in natural order.
//!
//! The input vector splits as `u = (a, b)` with codeword `(aG ⊕ bG, bG)`;
//! decoding walks the same recursion, first estimating `aG` from
//! `f(L_left, L_right)` and then `bG` from `L_right + (1 - 2 âG) L_left`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bits;
use crate::error::{Error, Result};
use crate::indexsets::RateProfile;
use crate::pac::{precode, Precoder};

/// `x = u G_N` for a length-`2^n` vector.
pub fn polar_transform(u: &[bool]) -> Result<Vec<bool>> {
    if !u.len().is_power_of_two() {
        return Err(Error::NotPowerOfTwo(u.len()));
    }
    let n = u.len().trailing_zeros();
    let mut words = bits::from_bools(u);
    bits::transform(&mut words, n);
    Ok(bits::to_bools(&words, u.len()))
}

/// CRC generator in Koopman notation: `0xA5` is `x^8 + x^6 + x^3 + x + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Crc {
    koopman: u64,
}

impl Crc {
    pub fn new(koopman: u64) -> Result<Self> {
        if koopman == 0 || koopman >> 62 != 0 {
            return Err(Error::InvalidCrc(format!("{koopman:#x}")));
        }
        Ok(Self { koopman })
    }

    pub fn koopman(&self) -> u64 {
        self.koopman
    }

    /// Number of check bits.
    pub fn degree(&self) -> usize {
        (64 - self.koopman.leading_zeros()) as usize
    }

    /// Generator coefficients below the leading term, bit `t` for `x^t`.
    fn low_terms(&self) -> u64 {
        (self.koopman << 1 | 1) & ((1u64 << self.degree()) - 1)
    }

    /// Remainder of `bits(x) · x^r` modulo the generator, most significant first.
    fn remainder(&self, input: &[bool]) -> u64 {
        let r = self.degree();
        let mask = (1u64 << r) - 1;
        let low = self.low_terms();
        let mut reg = 0u64;
        for &b in input {
            let fb = b ^ (reg >> (r - 1) & 1 == 1);
            reg = (reg << 1) & mask;
            if fb {
                reg ^= low;
            }
        }
        reg
    }
}

impl FromStr for Crc {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        let digits = t
            .strip_prefix("0x")
            .or_else(|| t.strip_prefix("0X"))
            .unwrap_or(t);
        let v = u64::from_str_radix(digits, 16).map_err(|_| Error::InvalidCrc(s.to_string()))?;
        Self::new(v)
    }
}

impl fmt::Display for Crc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "0x{:X}", self.koopman)
    }
}

impl TryFrom<String> for Crc {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Crc> for String {
    fn from(c: Crc) -> Self {
        c.to_string()
    }
}

/// Appends the `r` check bits (zero initial state, no reflection, no final XOR).
pub fn crc_attach(data: &[bool], crc: &Crc) -> Result<Vec<bool>> {
    if data.is_empty() {
        return Err(Error::InvalidCrc("empty payload".into()));
    }
    let r = crc.degree();
    let rem = crc.remainder(data);
    let mut out = data.to_vec();
    out.extend((0..r).rev().map(|t| rem >> t & 1 == 1));
    Ok(out)
}

/// True when `frame` (data followed by check bits) has zero remainder.
pub fn crc_check(frame: &[bool], crc: &Crc) -> Result<bool> {
    if frame.len() <= crc.degree() {
        return Err(Error::InvalidCrc(format!(
            "degree {} is not below the frame length {}",
            crc.degree(),
            frame.len()
        )));
    }
    Ok(crc.remainder(frame) == 0)
}

/// Everything needed to encode and decode one code.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeSpec {
    pub profile: RateProfile,
    #[serde(default)]
    pub precoder: Option<Precoder>,
    #[serde(default)]
    pub crc: Option<Crc>,
}

impl CodeSpec {
    pub fn polar(profile: RateProfile) -> Self {
        Self {
            profile,
            precoder: None,
            crc: None,
        }
    }

    pub fn pac(profile: RateProfile, precoder: Precoder) -> Self {
        Self {
            profile,
            precoder: Some(precoder),
            crc: None,
        }
    }

    pub fn with_crc(mut self, crc: Crc) -> Self {
        self.crc = Some(crc);
        self
    }

    pub fn len(&self) -> usize {
        self.profile.len()
    }

    pub fn is_empty(&self) -> bool {
        self.profile.is_empty()
    }

    pub fn crc_bits(&self) -> usize {
        self.crc.map_or(0, |c| c.degree())
    }

    /// Data bits per frame, excluding the CRC.
    pub fn info_bits(&self) -> usize {
        self.profile.dimension().saturating_sub(self.crc_bits())
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(c) = self.crc {
            if c.degree() >= self.profile.dimension() {
                return Err(Error::InvalidCrc(format!(
                    "degree {} is not below K = {}",
                    c.degree(),
                    self.profile.dimension()
                )));
            }
        }
        Ok(())
    }

    /// Bits carried on `I` in ascending index order: data, then CRC.
    pub fn payload(&self, data: &[bool]) -> Result<Vec<bool>> {
        self.validate()?;
        if data.len() != self.info_bits() {
            return Err(Error::LengthMismatch {
                expected: self.info_bits(),
                actual: data.len(),
            });
        }
        match &self.crc {
            Some(c) => crc_attach(data, c),
            None => Ok(data.to_vec()),
        }
    }

    /// The transform input `u` for a data word.
    pub fn input_vector(&self, data: &[bool]) -> Result<Vec<bool>> {
        let payload = self.payload(data)?;
        let mut v = vec![false; self.len()];
        for (&i, &b) in self.profile.indices().iter().zip(&payload) {
            v[i] = b;
        }
        Ok(match &self.precoder {
            Some(p) => precode(&v, p),
            None => v,
        })
    }

    pub fn encode(&self, data: &[bool]) -> Result<Vec<bool>> {
        polar_transform(&self.input_vector(data)?)
    }
}

/// List decoder settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecoderConfig {
    pub list_size: usize,
    /// Channel LLRs are clipped to `±llr_clamp`.
    pub llr_clamp: f64,
    /// Use `sign·sign·min` instead of the exact check-node update.
    #[serde(default)]
    pub min_sum: bool,
}

impl Default for DecoderConfig {
    fn default() -> Self {
        Self {
            list_size: 32,
            llr_clamp: 100.0,
            min_sum: false,
        }
    }
}

impl DecoderConfig {
    pub fn with_list(list_size: usize) -> Self {
        Self {
            list_size,
            ..Self::default()
        }
    }
}

/// Decoder output.
#[derive(Debug, Clone, PartialEq)]
pub struct Decoded {
    pub data: Vec<bool>,
    pub codeword: Vec<bool>,
    pub metric: f64,
    /// `Some(passed)` when the code carries a CRC.
    pub crc_ok: Option<bool>,
}

#[inline]
fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

#[inline]
fn f_exact(a: f64, b: f64) -> f64 {
    let m = a.abs().min(b.abs());
    let s = if (a < 0.0) != (b < 0.0) { -m } else { m };
    s + (-(a + b).abs()).exp().ln_1p() - (-(a - b).abs()).exp().ln_1p()
}

#[inline]
fn f_min(a: f64, b: f64) -> f64 {
    let m = a.abs().min(b.abs());
    if (a < 0.0) != (b < 0.0) {
        -m
    } else {
        m
    }
}

/// `Σ_{t≥1} p_t v_{i-t}`, the precoder contribution of earlier bits to `u_i`.
#[inline]
fn feedback(p: &Precoder, v: &[bool], i: usize) -> bool {
    p.coefficients()[1..]
        .iter()
        .zip(v[..i].iter().rev())
        .fold(false, |acc, (&c, &b)| acc ^ (c & b))
}

/// Cost of deciding `bit` against an LLR, `ln(1 + e^{-(1-2bit) L})`.
#[inline]
fn penalty(llr: f64, bit: bool) -> f64 {
    softplus(if bit { llr } else { -llr })
}

struct Path {
    /// Node LLRs, depth `d` (length `N >> d`) at offset `2N - 2(N >> d)`.
    alpha: Vec<f64>,
    /// Partial sums of left children, same layout.
    beta: Vec<bool>,
    u: Vec<bool>,
    v: Vec<bool>,
    metric: f64,
}

impl Path {
    fn new(len: usize) -> Self {
        Self {
            alpha: vec![0.0; 2 * len],
            beta: vec![false; 2 * len],
            u: vec![false; len],
            v: vec![false; len],
            metric: 0.0,
        }
    }

    fn copy_from(&mut self, other: &Path) {
        self.alpha.copy_from_slice(&other.alpha);
        self.beta.copy_from_slice(&other.beta);
        self.u.copy_from_slice(&other.u);
        self.v.copy_from_slice(&other.v);
        self.metric = other.metric;
    }
}

/// Reusable SC-list decoder for one code.
pub struct SclDecoder {
    spec: CodeSpec,
    cfg: DecoderConfig,
    n: u32,
    len: usize,
    frozen: Vec<bool>,
    paths: Vec<Path>,
    spare: Vec<Path>,
    scratch: Vec<bool>,
}

impl SclDecoder {
    pub fn new(spec: CodeSpec, cfg: DecoderConfig) -> Result<Self> {
        spec.validate()?;
        if cfg.list_size == 0 {
            return Err(Error::InvalidConfig("list size must be at least 1".into()));
        }
        if cfg.llr_clamp.is_nan() || cfg.llr_clamp <= 0.0 {
            return Err(Error::InvalidConfig("llr_clamp must be positive".into()));
        }
        let len = spec.len();
        let n = spec.profile.n();
        let frozen = spec.profile.mask().iter().map(|&b| !b).collect();
        Ok(Self {
            spec,
            cfg,
            n,
            len,
            frozen,
            paths: Vec::new(),
            spare: Vec::new(),
            scratch: vec![false; len],
        })
    }

    pub fn spec(&self) -> &CodeSpec {
        &self.spec
    }

    #[inline]
    fn offset(&self, depth: u32) -> usize {
        2 * self.len - 2 * (self.len >> depth)
    }

    fn take_path(&mut self) -> Path {
        self.spare.pop().unwrap_or_else(|| Path::new(self.len))
    }

    /// LLRs of leaf `i` along `path`, refreshing every node below the branch point.
    fn descend(&self, path: &mut Path, i: usize) {
        let n = self.n;
        let start = if i == 0 {
            0
        } else {
            n - 1 - i.trailing_zeros()
        };
        let f = if self.cfg.min_sum { f_min } else { f_exact };
        for d in start..n {
            let size = self.len >> d;
            let h = size / 2;
            let (src, dst) = (self.offset(d), self.offset(d + 1));
            let right = d == start && i != 0;
            if right {
                for k in 0..h {
                    let a = path.alpha[src + k];
                    let b = path.alpha[src + h + k];
                    path.alpha[dst + k] = if path.beta[dst + k] { b - a } else { b + a };
                }
            } else {
                for k in 0..h {
                    path.alpha[dst + k] = f(path.alpha[src + k], path.alpha[src + h + k]);
                }
            }
        }
    }

    /// Folds the decision at leaf `i` into the stored partial sums.
    fn ascend(&mut self, path_idx: usize, i: usize, bit: bool) {
        let n = self.n;
        let len = self.len;
        let path = &mut self.paths[path_idx];
        let buf = &mut self.scratch;
        buf[0] = bit;
        let mut size = 1usize;
        let mut d = n;
        // Combine while the current node is a right child.
        while d > 0 && i >> (n - d) & 1 == 1 {
            let off = 2 * len - 2 * (len >> d);
            for k in 0..size {
                buf[size + k] = buf[k];
                buf[k] ^= path.beta[off + k];
            }
            size *= 2;
            d -= 1;
        }
        if d > 0 {
            let off = 2 * len - 2 * (len >> d);
            path.beta[off..off + size].copy_from_slice(&buf[..size]);
        }
    }

    fn u_bit(&self, path: &Path, i: usize, v: bool) -> bool {
        match &self.spec.precoder {
            Some(p) => v ^ feedback(p, &path.v, i),
            None => v,
        }
    }

    /// Decodes one frame of channel LLRs (positive favours bit 0).
    pub fn decode(&mut self, llrs: &[f64]) -> Result<Decoded> {
        if llrs.len() != self.len {
            return Err(Error::LengthMismatch {
                expected: self.len,
                actual: llrs.len(),
            });
        }
        while let Some(p) = self.paths.pop() {
            self.spare.push(p);
        }
        let mut root = self.take_path();
        let clamp = self.cfg.llr_clamp;
        for (a, &l) in root.alpha[..self.len].iter_mut().zip(llrs) {
            *a = l.clamp(-clamp, clamp);
        }
        root.metric = 0.0;
        self.paths.push(root);

        let leaf_off = self.offset(self.n);
        let mut cands: Vec<(f64, usize, bool)> = Vec::with_capacity(2 * self.cfg.list_size);
        for i in 0..self.len {
            let mut paths = std::mem::take(&mut self.paths);
            for p in paths.iter_mut() {
                self.descend(p, i);
            }
            self.paths = paths;
            if self.frozen[i] {
                for k in 0..self.paths.len() {
                    let llr = self.paths[k].alpha[leaf_off];
                    let u = self.u_bit(&self.paths[k], i, false);
                    let p = &mut self.paths[k];
                    p.metric += penalty(llr, u);
                    p.v[i] = false;
                    p.u[i] = u;
                    self.ascend(k, i, u);
                }
                continue;
            }
            cands.clear();
            for (k, p) in self.paths.iter().enumerate() {
                let llr = p.alpha[leaf_off];
                for v in [false, true] {
                    let u = self.u_bit(p, i, v);
                    cands.push((p.metric + penalty(llr, u), k, v));
                }
            }
            // Stable: equal metrics keep the lower path index, then v = 0.
            cands.sort_by(|a, b| a.0.total_cmp(&b.0));
            cands.truncate(self.cfg.list_size);
            let mut keep = vec![[false; 2]; self.paths.len()];
            for &(_, k, v) in &cands {
                keep[k][v as usize] = true;
            }
            let old = std::mem::take(&mut self.paths);
            let mut next = Vec::with_capacity(cands.len());
            let mut old: Vec<Option<Path>> = old.into_iter().map(Some).collect();
            let mut forked = vec![false; old.len()];
            for &(metric, k, v) in &cands {
                let mut p = if keep[k][0] && keep[k][1] && !forked[k] {
                    forked[k] = true;
                    let mut c = self.take_path();
                    c.copy_from(old[k].as_ref().expect("parent present"));
                    c
                } else {
                    old[k].take().expect("parent present")
                };
                p.metric = metric;
                p.v[i] = v;
                next.push(p);
            }
            for p in old.into_iter().flatten() {
                self.spare.push(p);
            }
            self.paths = next;
            for k in 0..self.paths.len() {
                let v = self.paths[k].v[i];
                let u = self.u_bit(&self.paths[k], i, v);
                self.paths[k].u[i] = u;
                self.ascend(k, i, u);
            }
        }

        let mut order: Vec<usize> = (0..self.paths.len()).collect();
        order.sort_by(|&a, &b| self.paths[a].metric.total_cmp(&self.paths[b].metric));
        let payload_of = |p: &Path| -> Vec<bool> {
            self.spec
                .profile
                .indices()
                .iter()
                .map(|&i| p.v[i])
                .collect()
        };
        let (best, crc_ok) = match &self.spec.crc {
            Some(c) => {
                let hit = order
                    .iter()
                    .copied()
                    .find(|&k| crc_check(&payload_of(&self.paths[k]), c).unwrap_or(false));
                match hit {
                    Some(k) => (k, Some(true)),
                    None => (order[0], Some(false)),
                }
            }
            None => (order[0], None),
        };
        let p = &self.paths[best];
        let mut data = payload_of(p);
        data.truncate(self.spec.info_bits());
        Ok(Decoded {
            data,
            codeword: polar_transform(&p.u)?,
            metric: p.metric,
            crc_ok,
        })
    }
}

/// One-shot SC-list decode.
pub fn scl_decode(llrs: &[f64], spec: &CodeSpec, cfg: &DecoderConfig) -> Result<Decoded> {
    SclDecoder::new(spec.clone(), cfg.clone())?.decode(llrs)
}

/// Plain recursive SC decoder used as a reference; returns `(u, v)` estimates.
pub fn sc_decode(llrs: &[f64], spec: &CodeSpec, min_sum: bool) -> Result<(Vec<bool>, Vec<bool>)> {
    let len = spec.len();
    if llrs.len() != len {
        return Err(Error::LengthMismatch {
            expected: len,
            actual: llrs.len(),
        });
    }
    let mut state = ScState {
        frozen: spec.profile.mask().iter().map(|&b| !b).collect(),
        p: spec.precoder.clone(),
        u: vec![false; len],
        v: vec![false; len],
        min_sum,
    };
    state.node(llrs, 0);
    Ok((state.u, state.v))
}

struct ScState {
    frozen: Vec<bool>,
    p: Option<Precoder>,
    u: Vec<bool>,
    v: Vec<bool>,
    min_sum: bool,
}

impl ScState {
    /// Decodes the subtree whose leaves start at `base`; returns its codeword.
    fn node(&mut self, llrs: &[f64], base: usize) -> Vec<bool> {
        if llrs.len() == 1 {
            let i = base;
            let reg = self.p.as_ref().is_some_and(|p| feedback(p, &self.v, i));
            let v = if self.frozen[i] {
                false
            } else {
                // Choose v so that u = v ⊕ reg agrees with the LLR sign.
                (llrs[0] < 0.0) ^ reg
            };
            self.v[i] = v;
            self.u[i] = v ^ reg;
            return vec![self.u[i]];
        }
        let h = llrs.len() / 2;
        let f = if self.min_sum { f_min } else { f_exact };
        let left: Vec<f64> = (0..h).map(|k| f(llrs[k], llrs[h + k])).collect();
        let a = self.node(&left, base);
        let right: Vec<f64> = (0..h)
            .map(|k| {
                if a[k] {
                    llrs[h + k] - llrs[k]
                } else {
                    llrs[h + k] + llrs[k]
                }
            })
            .collect();
        let b = self.node(&right, base + h);
        let mut x: Vec<bool> = a.iter().zip(&b).map(|(p, q)| p ^ q).collect();
        x.extend(b);
        x
    }
}

/// BPSK map `0 -> +1`, `1 -> -1`.
#[inline]
pub fn bpsk(bit: bool) -> f64 {
    if bit {
        -1.0
    } else {
        1.0
    }
}

/// True when the received word is strictly closer to the decoded codeword
/// than to the transmitted one, so no ML decoder could have succeeded.
pub fn ml_lower_bound_flag(y: &[f64], decoded: &[bool], truth: &[bool]) -> bool {
    let d = |c: &[bool]| -> f64 { y.iter().zip(c).map(|(&r, &b)| (r - bpsk(b)).powi(2)).sum() };
    d(truth) > d(decoded)
}

/// Exhaustive maximum-likelihood decoding (maximum correlation) by sweeping
/// every data word; intended for tiny codes only.
pub fn ml_decode(y: &[f64], spec: &CodeSpec) -> Result<Vec<bool>> {
    let k = spec.info_bits();
    if k > 20 {
        return Err(Error::DimensionTooLarge { k, max: 20 });
    }
    let mut best = (f64::NEG_INFINITY, Vec::new());
    for m in 0u64..1 << k {
        let data: Vec<bool> = (0..k).map(|t| m >> t & 1 == 1).collect();
        let c = spec.encode(&data)?;
        let corr: f64 = y.iter().zip(&c).map(|(&r, &b)| r * bpsk(b)).sum();
        if corr > best.0 {
            best = (corr, data);
        }
    }
    Ok(best.1)
}
