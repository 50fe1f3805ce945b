//! Successive-cancellation decoding over layout trees and a Monte-Carlo
//! block-error harness for the erasure channel.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::channels::Dmc;
use crate::code_design::InformationSet;
use crate::construction::Layout;
use crate::error::{Error, Result};
use crate::gf_algebra::BitVec;
use crate::kernels::Kernel;

/// Entries within this relative distance of the maximum count as tied.
const TIE_TOLERANCE: f64 = 1e-9;

/// Unnormalized likelihoods `P(observation | symbol)` indexed by symbol value.
#[derive(Clone, Debug, PartialEq)]
pub struct LikelihoodVector {
    values: Vec<f64>,
}

impl LikelihoodVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if !values.len().is_power_of_two() {
            return Err(Error::param("likelihood vector length must be a power of two"));
        }
        if values.iter().any(|v| *v < 0.0 || !v.is_finite()) {
            return Err(Error::param("likelihoods must be finite and nonnegative"));
        }
        if values.iter().all(|&v| v == 0.0) {
            return Err(Error::param("likelihood vector is identically zero"));
        }
        Ok(LikelihoodVector { values })
    }

    pub fn uniform(width: usize) -> Self {
        LikelihoodVector {
            values: vec![1.0; 1 << width],
        }
    }

    pub fn width(&self) -> usize {
        self.values.len().trailing_zeros() as usize
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Scaled so that the largest entry is 1.
    pub fn normalized(&self) -> LikelihoodVector {
        let max = self.values.iter().copied().fold(0.0, f64::max);
        LikelihoodVector {
            values: self.values.iter().map(|v| v / max).collect(),
        }
    }

    /// Most likely symbol (lowest on ties) and whether another symbol ties with it.
    pub fn decide(&self) -> (u32, bool) {
        let max = self.values.iter().copied().fold(0.0, f64::max);
        let threshold = max * (1.0 - TIE_TOLERANCE);
        let best = self.values.iter().position(|&v| v >= threshold).unwrap_or(0);
        let ties = self.values.iter().filter(|&&v| v >= threshold).count();
        (best as u32, ties > 1)
    }

    /// Componentwise product, as for independent observations of one symbol.
    pub fn product(&self, other: &LikelihoodVector) -> Result<LikelihoodVector> {
        if self.values.len() != other.values.len() {
            return Err(Error::DimensionMismatch {
                expected: self.values.len(),
                found: other.values.len(),
            });
        }
        LikelihoodVector::new(self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect())
    }

    /// Likelihoods of a pair of independent symbols, the first in the low bits.
    pub fn pair(low: &LikelihoodVector, high: &LikelihoodVector) -> LikelihoodVector {
        let mut values = Vec::with_capacity(low.values.len() * high.values.len());
        for h in &high.values {
            for l in &low.values {
                values.push(l * h);
            }
        }
        LikelihoodVector { values }
    }
}

/// `P(y | x)` over all inputs `x`.
pub fn symbol_likelihoods(w: &Dmc, y: usize) -> Result<LikelihoodVector> {
    if y >= w.outputs() {
        return Err(Error::UnknownLetter {
            letter: y,
            size: w.outputs(),
        });
    }
    let values = (0..w.inputs()).map(|x| w.prob(x, y)).collect();
    LikelihoodVector::new(values).or_else(|_| Ok(LikelihoodVector::uniform(w.width())))
}

/// Marginal likelihood of input group `group` given the output likelihoods
/// and the decided earlier groups, with later groups uniform.
pub fn kernel_step_likelihood(
    k: &Kernel,
    child_lvs: &[LikelihoodVector],
    prefix: &[u32],
    group: usize,
) -> Result<LikelihoodVector> {
    if prefix.len() != group || group >= k.groups() {
        return Err(Error::DimensionMismatch {
            expected: group,
            found: prefix.len(),
        });
    }
    if child_lvs.len() != k.ell() {
        return Err(Error::DimensionMismatch {
            expected: k.ell(),
            found: child_lvs.len(),
        });
    }
    if let Some(lv) = child_lvs.iter().find(|lv| lv.width() != k.symbol_width()) {
        return Err(Error::DimensionMismatch {
            expected: k.symbol_width(),
            found: lv.width(),
        });
    }
    let refs: Vec<&[f64]> = child_lvs.iter().map(|lv| lv.values.as_slice()).collect();
    Ok(step(k, &refs, prefix, group))
}

fn step(k: &Kernel, lvs: &[&[f64]], prefix: &[u32], group: usize) -> LikelihoodVector {
    let offset = k.input_offset(group);
    let width = k.input_width(group);
    let suffix_bits = k.total_bits() - offset - width;
    let mut packed_prefix = 0u32;
    for (g, &s) in prefix.iter().enumerate() {
        packed_prefix |= s << k.input_offset(g);
    }
    let mut values = vec![0.0; 1 << width];
    for (s, v) in values.iter_mut().enumerate() {
        let head = packed_prefix | (s as u32) << offset;
        for suffix in 0..(1u32 << suffix_bits) {
            let x = k.apply_packed(head | suffix << (offset + width));
            let mut p = 1.0;
            for (j, lv) in lvs.iter().enumerate() {
                p *= lv[k.output_symbol(x, j) as usize];
                if p == 0.0 {
                    break;
                }
            }
            *v += p;
        }
    }
    let max = values.iter().copied().fold(0.0, f64::max);
    if max > 0.0 {
        values.iter_mut().for_each(|v| *v /= max);
    }
    LikelihoodVector { values }
}

/// Decoder output: the message estimate and per-channel ambiguity flags.
#[derive(Clone, Debug, PartialEq)]
pub struct DecodeOutput {
    pub u: BitVec,
    /// Set for information channels whose likelihood had several maximizers
    /// (or vanished entirely after an earlier wrong decision).
    pub ambiguous: Vec<bool>,
}

impl DecodeOutput {
    pub fn any_ambiguous(&self) -> bool {
        self.ambiguous.iter().any(|&a| a)
    }
}

struct Decoder<'a> {
    layout: &'a Layout,
    info: Vec<bool>,
    u: BitVec,
    ambiguous: Vec<bool>,
}

impl Decoder<'_> {
    fn node(&mut self, level: usize, idx: usize, lvs: Vec<LikelihoodVector>) -> Vec<u32> {
        let layout = self.layout;
        let node = &layout.levels()[level][idx];
        let Some(kid) = node.kernel else {
            let lv = &lvs[0];
            let symbol = if self.info[idx] {
                let vanished = lv.values.iter().all(|&v| v == 0.0);
                let (s, tie) = lv.decide();
                self.ambiguous[idx] = tie || vanished;
                s
            } else {
                0
            };
            self.u.set_symbol(node.first_bit, node.width, symbol);
            return vec![symbol];
        };
        let k = layout.kernel(kid);
        let ell = k.ell();
        let positions = lvs.len() / ell;
        let mut decided: Vec<Vec<u32>> = Vec::with_capacity(k.groups());
        let mut prefix = Vec::with_capacity(k.groups());
        for (g, child) in node.children.clone().enumerate() {
            let child_lvs = (0..positions)
                .map(|t| {
                    let refs: Vec<&[f64]> = lvs[t * ell..(t + 1) * ell].iter().map(|lv| lv.values.as_slice()).collect();
                    prefix.clear();
                    prefix.extend(decided.iter().map(|d| d[t]));
                    step(k, &refs, &prefix, g)
                })
                .collect();
            decided.push(self.node(level + 1, child, child_lvs));
        }
        layout.combine(kid, &decided)
    }
}

/// Successive-cancellation decoding; frozen channels carry zeros.
pub fn sc_decode(layout: &Layout, lvs: &[LikelihoodVector], info: &InformationSet) -> Result<DecodeOutput> {
    if lvs.len() != layout.channel_uses() {
        return Err(Error::DimensionMismatch {
            expected: layout.channel_uses(),
            found: lvs.len(),
        });
    }
    if let Some(lv) = lvs.iter().find(|lv| lv.width() != layout.base_width()) {
        return Err(Error::DimensionMismatch {
            expected: layout.base_width(),
            found: lv.width(),
        });
    }
    let mut flags = vec![false; layout.nu()];
    for &p in &info.selected {
        *flags.get_mut(p).ok_or_else(|| Error::param("information channel out of range"))? = true;
    }
    let mut decoder = Decoder {
        layout,
        info: flags,
        u: BitVec::zeros(layout.block_bits()),
        ambiguous: vec![false; layout.nu()],
    };
    decoder.node(0, 0, lvs.iter().map(|lv| lv.normalized()).collect());
    Ok(DecodeOutput {
        u: decoder.u,
        ambiguous: decoder.ambiguous,
    })
}

/// Likelihoods of a codeword sent over the erasure channel with the given erased bits.
pub fn erasure_likelihoods(layout: &Layout, x: &BitVec, erased: &[bool]) -> Vec<LikelihoodVector> {
    let w = layout.base_width();
    (0..layout.channel_uses())
        .map(|t| {
            let bits: Vec<LikelihoodVector> = (0..w)
                .map(|b| {
                    let pos = t * w + b;
                    if erased[pos] {
                        LikelihoodVector::uniform(1)
                    } else if x.get(pos) {
                        LikelihoodVector { values: vec![0.0, 1.0] }
                    } else {
                        LikelihoodVector { values: vec![1.0, 0.0] }
                    }
                })
                .collect();
            bits.into_iter()
                .rev()
                .reduce(|high, low| LikelihoodVector::pair(&low, &high))
                .expect("width at least 1")
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BlerEstimate {
    pub trials: u64,
    pub errors: u64,
    pub bler: f64,
    pub stderr: f64,
}

/// Random generator of one trial: the master seed selects the key and the
/// trial index the stream, so results do not depend on the thread count.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Runs one transmission; returns whether any information bit was decoded wrongly.
pub fn simulate_trial(layout: &Layout, info: &InformationSet, epsilon: f64, rng: &mut ChaCha8Rng) -> Result<bool> {
    let n = layout.block_bits();
    let mut mask = vec![false; n];
    for &p in &info.selected {
        let c = layout.channels()[p];
        mask[c.start..c.start + c.width].iter_mut().for_each(|b| *b = true);
    }
    let mut u = BitVec::zeros(n);
    for (i, &m) in mask.iter().enumerate() {
        if m {
            u.set(i, rng.gen::<bool>());
        }
    }
    let x = layout.encode(&u)?;
    let erased: Vec<bool> = (0..n).map(|_| rng.gen_bool(epsilon)).collect();
    let out = sc_decode(layout, &erasure_likelihoods(layout, &x, &erased), info)?;
    Ok(mask.iter().enumerate().any(|(i, &m)| m && out.u.get(i) != u.get(i)))
}

pub fn simulate_bler(layout: &Layout, info: &InformationSet, epsilon: f64, trials: u64, seed: u64) -> Result<BlerEstimate> {
    if trials == 0 {
        return Err(Error::param("trials must be at least 1"));
    }
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::param(format!("erasure probability {epsilon} outside [0, 1]")));
    }
    let errors = (0..trials)
        .into_par_iter()
        .map(|t| simulate_trial(layout, info, epsilon, &mut trial_rng(seed, t)).map(u64::from))
        .try_reduce(|| 0, |a, b| Ok(a + b))?;
    let p = errors as f64 / trials as f64;
    Ok(BlerEstimate {
        trials,
        errors,
        bler: p,
        stderr: (p * (1.0 - p) / trials as f64).sqrt(),
    })
}
