//! Base rate profiles from Gaussian-approximation density evolution, and the
//! greedy row swap procedure that lowers the error coefficient at fixed rate.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::indexsets::{check_layers, popcount, RateProfile};
use crate::minweight::{e_set, k_size};

/// Approximation of the check-node LLR-mean update.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckApprox {
    /// Four-piece polynomial fit of the check-node mean map.
    #[default]
    Piecewise,
    /// `φ^{-1}(1 - (1 - φ(x))^2)` with the two-regime `φ` and a bisection inverse.
    Chung,
}

impl CheckApprox {
    pub fn apply(self, x: f64) -> f64 {
        match self {
            CheckApprox::Piecewise => piecewise_check(x),
            CheckApprox::Chung => chung_check(x),
        }
    }
}

fn piecewise_check(x: f64) -> f64 {
    if x > 12.0 {
        0.9861 * x - 2.3152
    } else if x > 3.5 {
        x * (0.009005 * x + 0.7694) - 0.9507
    } else if x > 1.0 {
        x * (0.062883 * x + 0.3678) - 0.1627
    } else {
        x * (0.2202 * x + 0.06448)
    }
}

fn phi(x: f64) -> f64 {
    if x <= 0.0 {
        1.0
    } else if x < 10.0 {
        (-0.4527 * x.powf(0.86) + 0.0218).exp()
    } else {
        (std::f64::consts::PI / x).sqrt() * (-x / 4.0).exp() * (1.0 - 10.0 / (7.0 * x))
    }
}

fn phi_inverse(y: f64) -> f64 {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while phi(hi) > y {
        hi *= 2.0;
        if hi > 1e6 {
            return hi;
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if phi(mid) > y {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn chung_check(x: f64) -> f64 {
    let y = 1.0 - (1.0 - phi(x)).powi(2);
    if y >= 1.0 {
        0.0
    } else if y <= 0.0 {
        // φ underflows far out, where the map is asymptotically linear.
        x - 2.0 * std::f64::consts::LN_2
    } else {
        phi_inverse(y)
    }
}

/// Per-index LLR means and the induced order (most reliable first, smaller
/// index first on ties).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReliabilityOrder {
    pub metric: Vec<f64>,
    pub order: Vec<usize>,
}

/// Mean LLR of every synthetic channel under the Gaussian approximation.
///
/// The channel mean is `2/σ²` with `σ² = 1/(2 R 10^{snr/10})`, `R = K/N`.
/// Bits of the index are consumed from the most significant one down: a one
/// doubles the mean, a zero applies the check-node map.
pub fn dega_reliability(
    n: u32,
    k: usize,
    design_snr_db: f64,
    approx: CheckApprox,
) -> Result<ReliabilityOrder> {
    check_layers(n)?;
    let len = 1usize << n;
    if k > len {
        return Err(Error::InvalidConfig(format!("K = {k} exceeds N = {len}")));
    }
    let rate = k.max(1) as f64 / len as f64;
    let sigma2 = 1.0 / (2.0 * rate * 10f64.powf(design_snr_db / 10.0));
    let m0 = 2.0 / sigma2;
    // Build level by level so shared prefixes are evaluated once; the first
    // bit consumed ends up most significant, so the list is in index order.
    let mut metric = vec![m0];
    for _ in 0..n {
        let mut next = Vec::with_capacity(metric.len() * 2);
        for &m in &metric {
            next.push(approx.apply(m));
            next.push(2.0 * m);
        }
        metric = next;
    }
    let mut order: Vec<usize> = (0..len).collect();
    order.sort_by(|&a, &b| metric[b].total_cmp(&metric[a]).then(a.cmp(&b)));
    Ok(ReliabilityOrder { metric, order })
}

/// The `K` most reliable indices under the default approximation.
pub fn dega_profile(n: u32, k: usize, design_snr_db: f64) -> Result<RateProfile> {
    dega_profile_with(n, k, design_snr_db, CheckApprox::default())
}

pub fn dega_profile_with(
    n: u32,
    k: usize,
    design_snr_db: f64,
    approx: CheckApprox,
) -> Result<RateProfile> {
    let rel = dega_reliability(n, k, design_snr_db, approx)?;
    RateProfile::new(n, rel.order[..k].iter().copied())
}

/// Where an added row came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StepSource {
    /// A frozen row heavier than `w_min`.
    #[serde(rename = "B*")]
    Heavier,
    /// A frozen minimum-weight row that is a right-swap of the removed row.
    #[serde(rename = "E_j∩B^c")]
    RightSwap,
    /// Any other frozen minimum-weight row.
    #[serde(rename = "B^c")]
    Frozen,
}

/// One accepted swap.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImprovementStep {
    pub iteration: usize,
    pub removed_j: usize,
    pub added_i: usize,
    pub minus: u64,
    pub plus: u64,
    pub source: StepSource,
}

fn pow2_sat(e: usize) -> u64 {
    if e >= 64 {
        u64::MAX
    } else {
        1u64 << e
    }
}

/// How the row `j` to drop is chosen from `B`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum JRule {
    /// `argmax_{x∈B} |E_x ∩ B|`, larger index on ties; stops once no row of
    /// `B` has a right-swap inside `B`.
    #[default]
    MaxCover,
    /// The largest index left in `B`, whatever its cover.
    LargestIndex,
}

/// Greedy error-coefficient reduction with the default [`JRule`].
pub fn improve_profile(
    profile: &RateProfile,
    pi_max: usize,
) -> Result<(RateProfile, Vec<ImprovementStep>)> {
    improve_profile_with(profile, pi_max, JRule::default())
}

/// Greedy error-coefficient reduction.
///
/// Each iteration removes a minimum-weight row `j` and adds either the
/// largest heavier frozen row or the cheapest frozen minimum-weight row, as
/// long as the estimated gain `minus` exceeds the estimated cost `plus` and
/// fewer than `pi_max` swaps were made. `B`, `B^c` and `B*` are updated in
/// place after each swap.
pub fn improve_profile_with(
    profile: &RateProfile,
    pi_max: usize,
    rule: JRule,
) -> Result<(RateProfile, Vec<ImprovementStep>)> {
    let n = profile.n();
    let Some(s_min) = profile.min_support() else {
        return Ok((profile.clone(), Vec::new()));
    };
    let mut b: Vec<usize> = profile.min_weight_rows();
    let frozen = profile.frozen();
    let mut bc: Vec<usize> = frozen
        .iter()
        .copied()
        .filter(|&i| popcount(i) == s_min)
        .collect();
    let mut bstar: Vec<usize> = frozen
        .iter()
        .copied()
        .filter(|&i| popcount(i) > s_min)
        .collect();
    let mut current = profile.clone();
    let mut steps = Vec::new();

    while steps.len() < pi_max {
        let covers = b
            .iter()
            .map(|&x| {
                let c: Vec<usize> = e_set(x, n)?.into_iter().filter(|e| b.contains(e)).collect();
                Ok((x, c))
            })
            .collect::<Result<Vec<_>>>()?;
        let best = match rule {
            JRule::MaxCover => covers
                .into_iter()
                .filter(|(_, c)| !c.is_empty())
                .max_by_key(|(x, c)| (c.len(), *x)),
            JRule::LargestIndex => covers.into_iter().last(),
        };
        let Some((j, cover)) = best else {
            break;
        };
        let mut minus = pow2_sat(k_size(j, n)?);
        for &x in &cover {
            minus = minus.saturating_add(pow2_sat(k_size(x, n)? - 1));
        }

        let (i, plus, source) = if let Some(&i) = bstar.iter().max() {
            (i, 0, StepSource::Heavier)
        } else {
            let e_j = e_set(j, n)?;
            let mut pick: Option<(usize, u64, StepSource)> = None;
            let mut best_k = usize::MAX;
            for &x in bc.iter().filter(|x| e_j.contains(x)) {
                let k = k_size(x, n)?;
                if k < best_k {
                    best_k = k;
                    pick = Some((x, pow2_sat(k - 1), StepSource::RightSwap));
                }
            }
            let mut alt: Option<(usize, usize)> = None;
            for &x in &bc {
                let k = k_size(x, n)?;
                if alt.is_none_or(|(_, a)| k < a) {
                    alt = Some((x, k));
                }
            }
            if let Some((x, k)) = alt {
                let cost = pow2_sat(k);
                if pick.is_none_or(|(_, plus, _)| plus > cost) {
                    pick = Some((x, cost, StepSource::Frozen));
                }
            }
            match pick {
                Some(p) if p.1 < minus => p,
                _ => break,
            }
        };

        match source {
            StepSource::Heavier => bstar.retain(|&x| x != i),
            _ => bc.retain(|&x| x != i),
        }
        b.retain(|&x| x != j);
        current = current.swapped(&[j], &[i])?;
        steps.push(ImprovementStep {
            iteration: steps.len() + 1,
            removed_j: j,
            added_i: i,
            minus,
            plus,
            source,
        });
    }
    Ok((current, steps))
}

/// On-disk profile: `{"n", "K", "I", "design_snr_db", "steps"}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileFile {
    pub n: u32,
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "I")]
    pub indices: Vec<usize>,
    #[serde(default)]
    pub design_snr_db: Option<f64>,
    #[serde(default)]
    pub steps: Vec<ImprovementStep>,
}

impl ProfileFile {
    pub fn new(profile: &RateProfile, design_snr_db: Option<f64>) -> Self {
        Self {
            n: profile.n(),
            k: profile.dimension(),
            indices: profile.indices().to_vec(),
            design_snr_db,
            steps: Vec::new(),
        }
    }

    pub fn profile(&self) -> Result<RateProfile> {
        let p = RateProfile::new(self.n, self.indices.iter().copied())?;
        if p.dimension() != self.k {
            return Err(Error::InvalidConfig(format!(
                "K = {} but I has {} entries",
                self.k,
                p.dimension()
            )));
        }
        Ok(p)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let file: Self = serde_json::from_str(&text)?;
        file.profile()?;
        Ok(file)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        fs::write(path, text)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::minweight::{coset_report, error_coefficient, DEFAULT_BUDGET};

    const B64: [usize; 10] = [26, 28, 38, 41, 42, 44, 49, 50, 52, 56];

    #[test]
    fn dega_64_32_matches_reference_sets() {
        let p = dega_profile(6, 32, 4.0).unwrap();
        assert_eq!(p.min_weight_rows(), B64.to_vec());
        let bc: Vec<usize> = p
            .frozen()
            .into_iter()
            .filter(|&i| popcount(i) == 3)
            .collect();
        assert_eq!(bc, vec![7, 11, 13, 14, 19, 21, 22, 25, 35, 37]);
        assert_eq!(error_coefficient(&p).unwrap().a_dmin, 664);
    }

    #[test]
    fn dega_trivial_sizes() {
        assert_eq!(dega_profile(5, 32, 1.0).unwrap().dimension(), 32);
        assert!(dega_profile(5, 0, 1.0).unwrap().is_empty());
        assert!(dega_profile(3, 9, 1.0).is_err());
    }

    #[test]
    fn dega_metric_is_nonnegative_and_ordered() {
        for approx in [CheckApprox::Piecewise, CheckApprox::Chung] {
            let r = dega_reliability(7, 64, 2.0, approx).unwrap();
            assert!(r.metric.iter().all(|&m| m >= 0.0));
            for w in r.order.windows(2) {
                assert!(r.metric[w[0]] >= r.metric[w[1]]);
            }
            // Adding a one to the index can only help.
            for i in 0..128usize {
                for b in 0..7 {
                    if i >> b & 1 == 0 {
                        assert!(r.metric[i | 1 << b] >= r.metric[i]);
                    }
                }
            }
        }
    }

    #[test]
    fn check_maps_are_contractions() {
        for approx in [CheckApprox::Piecewise, CheckApprox::Chung] {
            let mut prev = 0.0;
            for k in 1..400 {
                let x = k as f64 * 0.25;
                let y = approx.apply(x);
                assert!(y <= x && y >= prev - 1e-9, "{approx:?} x={x}");
                prev = y;
            }
        }
    }

    #[test]
    fn replay_64_32() {
        let base = dega_profile(6, 32, 4.0).unwrap();
        let (p1, steps) = improve_profile(&base, 1).unwrap();
        assert_eq!(steps.len(), 1);
        assert_eq!((steps[0].removed_j, steps[0].added_i), (56, 25));
        assert_eq!(steps[0].minus, 8 + 264);
        assert_eq!(steps[0].source, StepSource::RightSwap);
        assert_eq!(p1, base.swapped(&[56], &[25]).unwrap());
        let (p2, steps) = improve_profile(&base, 2).unwrap();
        let pairs: Vec<_> = steps.iter().map(|s| (s.removed_j, s.added_i)).collect();
        assert_eq!(pairs, vec![(56, 25), (52, 22)]);
        assert_eq!(p2.dimension(), 32);
        let a0 = coset_report(&base, DEFAULT_BUDGET).unwrap().a_dmin;
        let a1 = coset_report(&p1, DEFAULT_BUDGET).unwrap().a_dmin;
        let a2 = coset_report(&p2, DEFAULT_BUDGET).unwrap().a_dmin;
        assert!(a0 > a1 && a1 > a2, "{a0} {a1} {a2}");
        let (same, none) = improve_profile(&base, 0).unwrap();
        assert_eq!(same, base);
        assert!(none.is_empty());
    }

    #[test]
    fn largest_index_rule_continues_past_empty_cover() {
        let base = dega_profile(8, 128, 2.0).unwrap();
        let (_, steps) = improve_profile(&base, 2).unwrap();
        assert_eq!(steps.len(), 1);
        let (q, steps) = improve_profile_with(&base, 2, JRule::LargestIndex).unwrap();
        let pairs: Vec<_> = steps.iter().map(|s| (s.removed_j, s.added_i)).collect();
        assert_eq!(pairs, vec![(224, 149), (208, 147)]);
        assert_eq!(q.min_row_weight(), Some(16));
    }

    #[test]
    fn reed_muller_is_left_alone() {
        for (r, n) in [(1, 4), (2, 5), (3, 6)] {
            let p = RateProfile::reed_muller(r, n).unwrap();
            for rule in [JRule::MaxCover, JRule::LargestIndex] {
                let (q, steps) = improve_profile_with(&p, 5, rule).unwrap();
                assert!(steps.is_empty());
                assert_eq!(q, p);
            }
        }
    }

    #[test]
    fn profile_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.json");
        let base = dega_profile(6, 32, 4.0).unwrap();
        let (p, steps) = improve_profile(&base, 2).unwrap();
        let mut file = ProfileFile::new(&p, Some(4.0));
        file.steps = steps;
        file.save(&path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let keys: Vec<usize> = ["\"n\"", "\"K\"", "\"I\"", "\"design_snr_db\"", "\"steps\""]
            .iter()
            .map(|k| text.find(k).unwrap())
            .collect();
        assert!(keys.windows(2).all(|w| w[0] < w[1]));
        let back = ProfileFile::load(&path).unwrap();
        assert_eq!(back, file);
        assert_eq!(back.profile().unwrap(), p);
    }

    #[test]
    fn profile_file_rejects_inconsistent_k() {
        let bad = r#"{"n":3,"K":2,"I":[7]}"#;
        let f: ProfileFile = serde_json::from_str(bad).unwrap();
        assert!(f.profile().is_err());
    }
}
