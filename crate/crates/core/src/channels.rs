//! Explicit discrete memoryless channels and exact channel splitting.
//!
//! Everything here enumerates outputs directly, so it only scales to small
//! instances. It serves as the reference for the erasure density evolution.

use std::collections::HashMap;

use serde::Serialize;

use crate::construction::Layout;
use crate::error::{Error, Result};
use crate::kernels::Kernel;

/// Cap on `|Y|^ℓ * 2^L` enumerated by [`split_channel`].
pub const SPLIT_ENUMERATION_CAP: u64 = 100_000_000;

const ROW_SUM_TOLERANCE: f64 = 1e-12;

/// Quantization step used to identify proportional likelihood vectors.
const MERGE_GRID: f64 = (1u64 << 40) as f64;

/// A channel with input alphabet `{0,1}^width` (symbol values) and a finite output alphabet.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Dmc {
    width: usize,
    /// `probs[x][y] = P(y | x)`.
    probs: Vec<Vec<f64>>,
}

/// The three erasure-channel output letters.
pub const BEC_ZERO: usize = 0;
pub const BEC_ONE: usize = 1;
pub const BEC_ERASURE: usize = 2;

impl Dmc {
    pub fn new(width: usize, probs: Vec<Vec<f64>>) -> Result<Self> {
        if probs.len() != 1 << width {
            return Err(Error::DimensionMismatch {
                expected: 1 << width,
                found: probs.len(),
            });
        }
        let outputs = probs[0].len();
        for row in &probs {
            if row.len() != outputs {
                return Err(Error::DimensionMismatch {
                    expected: outputs,
                    found: row.len(),
                });
            }
            if row.iter().any(|&p| p < 0.0 || !p.is_finite()) {
                return Err(Error::param("transition probabilities must be finite and nonnegative"));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                return Err(Error::param(format!("transition row sums to {sum}, not 1")));
            }
        }
        Ok(Dmc { width, probs })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn inputs(&self) -> usize {
        1 << self.width
    }

    pub fn outputs(&self) -> usize {
        self.probs[0].len()
    }

    pub fn prob(&self, x: usize, y: usize) -> f64 {
        self.probs[x][y]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.probs
    }

    /// Two independent uses of `self` and `other`, as one channel whose input
    /// symbol carries `self`'s bits in the low positions.
    pub fn product(&self, other: &Dmc) -> Dmc {
        let width = self.width + other.width;
        let (ya, yb) = (self.outputs(), other.outputs());
        let probs = (0..1usize << width)
            .map(|x| {
                let (xa, xb) = (x & (self.inputs() - 1), x >> self.width);
                let mut row = Vec::with_capacity(ya * yb);
                for b in 0..yb {
                    for a in 0..ya {
                        row.push(self.probs[xa][a] * other.probs[xb][b]);
                    }
                }
                row
            })
            .collect();
        Dmc { width, probs }
    }

    /// Pairwise Bhattacharyya parameter `Σ_y sqrt(P(y|x) P(y|x'))`.
    pub fn pair_bhattacharyya(&self, x: usize, x2: usize) -> f64 {
        self.probs[x]
            .iter()
            .zip(&self.probs[x2])
            .map(|(a, b)| (a * b).sqrt())
            .sum()
    }
}

/// The binary erasure channel with outputs 0, 1 and erasure.
pub fn make_bec(epsilon: f64) -> Result<Dmc> {
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::param(format!("erasure probability {epsilon} outside [0, 1]")));
    }
    Dmc::new(
        1,
        vec![vec![1.0 - epsilon, 0.0, epsilon], vec![0.0, 1.0 - epsilon, epsilon]],
    )
}

/// Output equals input.
pub fn noiseless(width: usize) -> Dmc {
    let q = 1 << width;
    Dmc {
        width,
        probs: (0..q)
            .map(|x| (0..q).map(|y| if x == y { 1.0 } else { 0.0 }).collect())
            .collect(),
    }
}

/// Output independent of the input.
pub fn useless(width: usize) -> Dmc {
    Dmc {
        width,
        probs: vec![vec![1.0]; 1 << width],
    }
}

/// Symmetric capacity in bits per channel use (uniform input).
pub fn capacity(w: &Dmc) -> f64 {
    let q = w.inputs() as f64;
    let mut total = 0.0;
    for y in 0..w.outputs() {
        let py: f64 = (0..w.inputs()).map(|x| w.probs[x][y]).sum::<f64>() / q;
        if py == 0.0 {
            continue;
        }
        for x in 0..w.inputs() {
            let p = w.probs[x][y];
            if p > 0.0 {
                total += p / q * (p / py).log2();
            }
        }
    }
    total
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Bhattacharyya {
    /// Average over ordered pairs of distinct inputs.
    pub z: f64,
    pub z_max: f64,
    pub z_min: f64,
}

pub fn bhattacharyya(w: &Dmc) -> Bhattacharyya {
    let q = w.inputs();
    let mut sum = 0.0;
    let (mut hi, mut lo) = (f64::NEG_INFINITY, f64::INFINITY);
    for x in 0..q {
        for x2 in 0..q {
            if x == x2 {
                continue;
            }
            let z = w.pair_bhattacharyya(x, x2);
            sum += z;
            hi = hi.max(z);
            lo = lo.min(z);
        }
    }
    if q < 2 {
        return Bhattacharyya {
            z: 0.0,
            z_max: 0.0,
            z_min: 0.0,
        };
    }
    Bhattacharyya {
        z: sum / (q * (q - 1)) as f64,
        z_max: hi,
        z_min: lo,
    }
}

/// The synthesized channel seen by input group `group` of `k` over `ℓ`
/// independent copies of `w`, with earlier groups supplied as part of the output.
///
/// Output letters are indexed `ytuple * 2^prefix_bits + prefix`, where
/// `ytuple` reads the per-copy outputs with copy 0 as the least significant
/// digit. Later groups are marginalized under uniform priors.
pub fn split_channel(k: &Kernel, w: &Dmc, group: usize) -> Result<Dmc> {
    if group >= k.groups() {
        return Err(Error::param(format!("group {group} out of range")));
    }
    if w.width() != k.symbol_width() {
        return Err(Error::DimensionMismatch {
            expected: k.symbol_width(),
            found: w.width(),
        });
    }
    let ell = k.ell();
    let y = w.outputs();
    let ytuples = (y as u64).checked_pow(ell as u32).unwrap_or(u64::MAX);
    let work = ytuples.saturating_mul(1 << k.total_bits());
    if work > SPLIT_ENUMERATION_CAP {
        return Err(Error::capacity(
            format!("split enumeration of {work} terms"),
            SPLIT_ENUMERATION_CAP,
        ));
    }
    let ytuples = ytuples as usize;
    let prefix_bits = k.input_offset(group);
    let width = k.input_width(group);
    let weight = 1.0 / (1u64 << (k.total_bits() - width)) as f64;
    let letters = ytuples << prefix_bits;
    let mut probs = vec![vec![0.0; letters]; 1 << width];

    let mut digits = vec![0usize; ell];
    let mut partial = vec![0.0; ell + 1];
    for u in 0..(1u32 << k.total_bits()) {
        let x = k.apply_packed(u);
        let rows: Vec<&[f64]> = (0..ell)
            .map(|j| w.probs[k.output_symbol(x, j) as usize].as_slice())
            .collect();
        let prefix = (u & ((1 << prefix_bits) - 1)) as usize;
        let target = &mut probs[k.input_symbol(u, group) as usize];
        digits.iter_mut().for_each(|d| *d = 0);
        partial[ell] = weight;
        for j in (0..ell).rev() {
            partial[j] = partial[j + 1] * rows[j][0];
        }
        for t in 0..ytuples {
            target[(t << prefix_bits) | prefix] += partial[0];
            // Odometer increment; digit 0 is least significant.
            let mut j = 0;
            while j < ell {
                digits[j] += 1;
                if digits[j] < y {
                    break;
                }
                digits[j] = 0;
                j += 1;
            }
            if j == ell {
                break;
            }
            for i in (0..=j).rev() {
                partial[i] = partial[i + 1] * rows[i][digits[i]];
            }
        }
    }
    Ok(Dmc {
        width,
        probs,
    })
}

/// Merges output letters with proportional likelihood vectors and drops
/// letters that never occur. Letters keep the order of first occurrence.
pub fn merge_equivalent_outputs(w: &Dmc) -> Dmc {
    let q = w.inputs();
    let mut groups: Vec<Vec<f64>> = Vec::new();
    let mut index: HashMap<Vec<i64>, usize> = HashMap::new();
    for y in 0..w.outputs() {
        let col: Vec<f64> = (0..q).map(|x| w.probs[x][y]).collect();
        let sum: f64 = col.iter().sum();
        if sum == 0.0 {
            continue;
        }
        let key: Vec<i64> = col
            .iter()
            .map(|p| (p / sum * MERGE_GRID).round() as i64)
            .collect();
        match index.get(&key) {
            Some(&g) => groups[g].iter_mut().zip(&col).for_each(|(a, b)| *a += b),
            None => {
                index.insert(key, groups.len());
                groups.push(col);
            }
        }
    }
    let probs = (0..q)
        .map(|x| groups.iter().map(|g| g[x]).collect())
        .collect();
    Dmc {
        width: w.width,
        probs,
    }
}

/// Exact synthesized channels for every node of a layout, by repeated
/// splitting and merging. `levels[d][i]` matches `layout.levels()[d][i]`.
pub fn split_tree(layout: &Layout, base: &Dmc) -> Result<Vec<Vec<Dmc>>> {
    if base.width() != layout.base_width() {
        return Err(Error::DimensionMismatch {
            expected: layout.base_width(),
            found: base.width(),
        });
    }
    let mut levels = vec![vec![merge_equivalent_outputs(base)]];
    for d in 0..layout.depth() {
        let mut next = Vec::with_capacity(layout.levels()[d + 1].len());
        for (node, w) in layout.levels()[d].iter().zip(&levels[d]) {
            let k = layout.kernel(node.kernel.expect("internal node"));
            for g in 0..k.groups() {
                next.push(merge_equivalent_outputs(&split_channel(k, w, g)?));
            }
        }
        levels.push(next);
    }
    Ok(levels)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn bec_basics() {
        for eps in [0.0, 0.3, 0.5, 1.0] {
            let w = make_bec(eps).unwrap();
            assert!(close(capacity(&w), 1.0 - eps, 1e-15));
            let b = bhattacharyya(&w);
            assert!(close(b.z, eps, 1e-15));
            assert_eq!(b.z_max, b.z_min);
        }
        assert!(make_bec(1.5).is_err());
        assert!(make_bec(-0.1).is_err());
    }

    #[test]
    fn noiseless_and_useless() {
        assert!(close(capacity(&noiseless(2)), 2.0, 1e-15));
        assert_eq!(bhattacharyya(&noiseless(2)).z, 0.0);
        assert_eq!(capacity(&useless(1)), 0.0);
        assert!(close(bhattacharyya(&useless(2)).z, 1.0, 1e-15));
    }

    #[test]
    fn uv_split_on_bec_half() {
        let w = make_bec(0.5).unwrap();
        let k = Kernel::arikan();
        let minus = split_channel(&k, &w, 0).unwrap();
        assert_eq!(minus.outputs(), 9);
        let minus = merge_equivalent_outputs(&minus);
        assert_eq!(minus.outputs(), 3);
        assert!(close(capacity(&minus), 0.25, 1e-15));
        assert!(close(bhattacharyya(&minus).z, 0.75, 1e-15));
        let plus = merge_equivalent_outputs(&split_channel(&k, &w, 1).unwrap());
        assert_eq!(plus.outputs(), 3);
        assert!(close(capacity(&plus), 0.75, 1e-15));
        assert!(close(bhattacharyya(&plus).z, 0.25, 1e-15));
    }

    #[test]
    fn g1_on_noiseless_channel() {
        let w = noiseless(1);
        let k = Kernel::g1();
        for g in 0..3 {
            let s = split_channel(&k, &w, g).unwrap();
            assert!(close(capacity(&s), k.input_width(g) as f64, 1e-12));
            assert!(bhattacharyya(&s).z_max < 1e-15);
        }
    }

    #[test]
    fn merge_duplicated_erasure() {
        let w = make_bec(0.4).unwrap();
        assert_eq!(merge_equivalent_outputs(&w), w);
        let split = Dmc::new(1, vec![vec![0.6, 0.0, 0.1, 0.3], vec![0.0, 0.6, 0.1, 0.3]]).unwrap();
        let merged = merge_equivalent_outputs(&split);
        assert_eq!(merged.outputs(), 3);
        assert!(close(merged.prob(0, 2), 0.4, 1e-15));
        assert!(close(capacity(&merged), capacity(&split), 1e-12));
    }

    #[test]
    fn chain_rule_on_splits() {
        let mut bases = vec![make_bec(0.5).unwrap(), make_bec(0.13).unwrap()];
        let bsc = Dmc::new(1, vec![vec![0.89, 0.11], vec![0.11, 0.89]]).unwrap();
        bases.push(bsc.clone());
        let z = Dmc::new(1, vec![vec![1.0, 0.0], vec![0.3, 0.7]]).unwrap();
        bases.push(z);
        for k in [Kernel::g1(), Kernel::arikan()] {
            for w in &bases {
                let total: f64 = (0..k.groups())
                    .map(|g| capacity(&split_channel(&k, w, g).unwrap()))
                    .sum();
                assert!(close(total, k.ell() as f64 * capacity(w), 1e-9));
            }
        }
        let quaternary = [make_bec(0.3).unwrap().product(&make_bec(0.3).unwrap()), bsc.product(&bsc)];
        for k in [Kernel::rs4(), Kernel::quaternary_arikan()] {
            for w in &quaternary {
                let merged = merge_equivalent_outputs(w);
                let total: f64 = (0..k.groups())
                    .map(|g| capacity(&split_channel(&k, &merged, g).unwrap()))
                    .sum();
                assert!(close(total, k.ell() as f64 * capacity(w), 1e-9));
            }
        }
    }

    #[test]
    fn g1_infadd_on_bec_half() {
        let w = make_bec(0.5).unwrap();
        let k = Kernel::g1();
        let total: f64 = (0..3).map(|g| capacity(&split_channel(&k, &w, g).unwrap())).sum();
        assert!(close(total, 2.0, 1e-12));
    }

    #[test]
    fn merge_is_idempotent_and_preserves_metrics() {
        let w = make_bec(0.37).unwrap();
        let k = Kernel::g1();
        for g in 0..3 {
            let raw = split_channel(&k, &w, g).unwrap();
            let once = merge_equivalent_outputs(&raw);
            let twice = merge_equivalent_outputs(&once);
            assert_eq!(once, twice);
            assert!(close(capacity(&raw), capacity(&once), 1e-12));
            let (a, b) = (bhattacharyya(&raw), bhattacharyya(&once));
            assert!(close(a.z, b.z, 1e-12) && close(a.z_max, b.z_max, 1e-12));
            assert!(close(a.z_min, b.z_min, 1e-12));
        }
    }

    #[test]
    fn glued_split_obeys_pairwise_sandwich() {
        let k = Kernel::g1();
        for eps in [0.05, 0.2, 0.5, 0.8, 0.99] {
            let w = make_bec(eps).unwrap();
            let s = split_channel(&k, &w, 1).unwrap();
            let z = bhattacharyya(&w).z;
            for x in 0..4 {
                for x2 in 0..4 {
                    if x == x2 {
                        continue;
                    }
                    let zp = s.pair_bhattacharyya(x, x2);
                    assert!(0.5 * z.powi(2) <= zp + 1e-15, "eps {eps}");
                    assert!(zp <= 2.0 * z.powi(2) + 1e-15, "eps {eps}");
                }
            }
        }
    }

    #[test]
    fn split_cap_enforced() {
        let big = Dmc::new(1, vec![vec![1.0 / 200.0; 200], vec![1.0 / 200.0; 200]]).unwrap();
        assert!(matches!(
            split_channel(&Kernel::g1(), &big, 0),
            Err(Error::CapacityExceeded { .. })
        ));
        assert!(split_channel(&Kernel::rs4(), &make_bec(0.5).unwrap(), 0).is_err());
    }
}
