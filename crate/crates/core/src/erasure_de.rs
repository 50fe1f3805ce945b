//! Exact density evolution on the binary erasure channel.
//!
//! Over the erasure channel a synthesized channel with uniform priors leaves
//! its input uniformly distributed over a coset of some subgroup of
//! `(Z/2)^w`. The channel is fully described by the distribution of that
//! subgroup. Probabilities are stored as natural logarithms so that the
//! extremely reliable and extremely noisy channels at large depth stay
//! representable.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::construction::{Channel, Layout, Scheme};
use crate::error::{Error, Result};
use crate::gf_algebra::{project_solution_subgroup, solve_affine, subgroups, BitMatrix, BitVec, Subgroup};
use crate::kernels::Kernel;

const SUM_TOLERANCE: f64 = 1e-12;

/// Distribution of the ambiguity subgroup of a synthesized erasure channel.
#[derive(Clone, Debug, PartialEq)]
pub struct SubgroupStateDist {
    width: usize,
    /// Natural-log probabilities indexed like [`subgroups`]`(width)`.
    log_probs: Vec<f64>,
}

impl SubgroupStateDist {
    /// Builds a state from plain probabilities listed in canonical subgroup order.
    pub fn from_probs(width: usize, probs: &[f64]) -> Result<Self> {
        let n = subgroups(width)?.len();
        if probs.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: probs.len(),
            });
        }
        if probs.iter().any(|&p| !(0.0..=1.0 + SUM_TOLERANCE).contains(&p)) {
            return Err(Error::param("state probabilities must lie in [0, 1]"));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::param(format!("state probabilities sum to {sum}")));
        }
        Ok(SubgroupStateDist {
            width,
            log_probs: probs.iter().map(|p| p.ln()).collect(),
        })
    }

    /// Builds a state from natural-log probabilities in canonical order.
    pub fn from_log_probs(width: usize, log_probs: Vec<f64>) -> Result<Self> {
        let n = subgroups(width)?.len();
        if log_probs.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: log_probs.len(),
            });
        }
        let sum = log_sum_exp(&log_probs).exp();
        if log_probs.iter().any(|l| l.is_nan() || *l > 0.0) || (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::param("log probabilities do not form a distribution"));
        }
        Ok(SubgroupStateDist { width, log_probs })
    }

    pub fn perfect(width: usize) -> Result<Self> {
        let mut probs = vec![0.0; subgroups(width)?.len()];
        probs[0] = 1.0;
        Self::from_probs(width, &probs)
    }

    pub fn useless(width: usize) -> Result<Self> {
        let mut probs = vec![0.0; subgroups(width)?.len()];
        *probs.last_mut().unwrap() = 1.0;
        Self::from_probs(width, &probs)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn log_probs(&self) -> &[f64] {
        &self.log_probs
    }

    pub fn probs(&self) -> Vec<f64> {
        self.log_probs.iter().map(|l| l.exp()).collect()
    }

    /// `(subgroup, probability)` pairs in canonical order.
    pub fn entries(&self) -> Vec<(Subgroup, f64)> {
        subgroups(self.width)
            .expect("validated width")
            .into_iter()
            .zip(self.probs())
            .collect()
    }

    pub fn prob(&self, h: &Subgroup) -> f64 {
        self.entries()
            .into_iter()
            .find(|(s, _)| s == h)
            .map_or(0.0, |(_, p)| p)
    }

    /// Natural log of `Σ P(H)` over subgroups `H` containing `d`.
    pub fn ln_pair_z(&self, d: u32) -> f64 {
        let terms: Vec<f64> = subgroups(self.width)
            .expect("validated width")
            .iter()
            .zip(&self.log_probs)
            .filter(|(h, _)| h.contains(d))
            .map(|(_, &l)| l)
            .collect();
        log_sum_exp(&terms)
    }
}

fn log_sum_exp(terms: &[f64]) -> f64 {
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + terms.iter().map(|t| (t - max).exp()).sum::<f64>().ln()
}

/// State of `width` independent uses of an erasure channel.
pub fn bec_base_state(epsilon: f64, width: usize) -> Result<SubgroupStateDist> {
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::param(format!("erasure probability {epsilon} outside [0, 1]")));
    }
    let (e, c) = (epsilon, 1.0 - epsilon);
    match width {
        1 => SubgroupStateDist::from_probs(1, &[c, e]),
        2 => {
            // Canonical order: 0, span{e2}, span{e1}, span{e1+e2}, all.
            let probs = [c * c, c * e, e * c, 0.0, e * e];
            SubgroupStateDist::from_probs(2, &probs)
        }
        w => Err(Error::UnsupportedWidth(w)),
    }
}

/// Child ambiguity subgroup for every joint realization of the parent states.
#[derive(Clone, Debug)]
pub struct SplitTable {
    parent_width: usize,
    child_width: usize,
    ell: usize,
    states: usize,
    /// Child subgroup index for each combination; copy 0 is the least significant digit.
    child: Vec<u8>,
}

impl SplitTable {
    pub fn new(k: &Kernel, group: usize) -> Result<Self> {
        if group >= k.groups() {
            return Err(Error::param(format!("group {group} out of range")));
        }
        let w = k.symbol_width();
        let parent_groups = subgroups(w)?;
        let child_width = k.input_width(group);
        let child_groups = subgroups(child_width)?;
        let s = parent_groups.len();
        let ell = k.ell();
        let total = s.pow(ell as u32);
        let l = k.total_bits();

        // Column of G restricted to a parity check h on output symbol j.
        let check_column = |j: usize, h: u32| -> BitVec {
            let mut col = BitVec::zeros(l);
            for r in 0..l {
                let row = k.matrix().row(r);
                let bit = (0..w).fold(false, |acc, t| acc ^ ((h >> t) & 1 == 1 && row.get(k.output_offset(j) + t)));
                col.set(r, bit);
            }
            col
        };
        let duals: Vec<Vec<u32>> = parent_groups
            .iter()
            .map(|h| {
                (1..(1u32 << w))
                    .filter(|&c| h.elements().iter().all(|&x| (x & c).count_ones() % 2 == 0))
                    .collect()
            })
            .collect();

        let mut child = Vec::with_capacity(total);
        for combo in 0..total {
            let mut cols: Vec<BitVec> = (0..k.input_offset(group)).map(|b| BitVec::unit(l, b)).collect();
            let mut rest = combo;
            for j in 0..ell {
                for &h in &duals[rest % s] {
                    cols.push(check_column(j, h));
                }
                rest /= s;
            }
            let mut a = BitMatrix::zeros(l, cols.len());
            for (c, col) in cols.iter().enumerate() {
                for r in 0..l {
                    if col.get(r) {
                        a.set(r, c, true);
                    }
                }
            }
            let sol = solve_affine(&a, &BitVec::zeros(cols.len()))?;
            let h = project_solution_subgroup(&sol, k.input_offset(group), child_width)?;
            let idx = child_groups.iter().position(|g| *g == h).expect("canonical subgroup");
            child.push(idx as u8);
        }
        Ok(SplitTable {
            parent_width: w,
            child_width,
            ell,
            states: s,
            child,
        })
    }

    pub fn child_width(&self) -> usize {
        self.child_width
    }

    pub fn apply(&self, parent: &SubgroupStateDist) -> Result<SubgroupStateDist> {
        if parent.width != self.parent_width {
            return Err(Error::DimensionMismatch {
                expected: self.parent_width,
                found: parent.width,
            });
        }
        let outputs = subgroups(self.child_width)?.len();
        let mut terms: Vec<Vec<f64>> = vec![Vec::new(); outputs];
        let mut digits = vec![0usize; self.ell];
        for &c in &self.child {
            let lp: f64 = digits.iter().map(|&d| parent.log_probs[d]).sum();
            if lp > f64::NEG_INFINITY {
                terms[c as usize].push(lp);
            }
            for d in digits.iter_mut() {
                *d += 1;
                if *d < self.states {
                    break;
                }
                *d = 0;
            }
        }
        let log_probs = terms.iter().map(|t| log_sum_exp(t)).collect();
        Ok(SubgroupStateDist {
            width: self.child_width,
            log_probs,
        })
    }
}

/// The state of input group `group` of `k` driven by independent copies of `parent`.
pub fn de_split(k: &Kernel, parent: &SubgroupStateDist, group: usize) -> Result<SubgroupStateDist> {
    if parent.width != k.symbol_width() {
        return Err(Error::DimensionMismatch {
            expected: k.symbol_width(),
            found: parent.width,
        });
    }
    SplitTable::new(k, group)?.apply(parent)
}

/// Scalar summaries of a channel state.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct StateMetrics {
    /// Mutual information in bits.
    pub i: f64,
    pub z: f64,
    pub z_max: f64,
    pub z_min: f64,
    /// Probability of any residual ambiguity.
    pub pe_ambiguous: f64,
    /// Error probability of a uniform guess within the ambiguity coset.
    pub pe_guess: f64,
    pub ln_z: f64,
    pub ln_z_max: f64,
    pub ln_z_min: f64,
    pub ln_pe_ambiguous: f64,
    pub ln_pe_guess: f64,
}

pub fn state_metrics(s: &SubgroupStateDist) -> StateMetrics {
    let groups = subgroups(s.width).expect("validated width");
    let q = 1u32 << s.width;
    let mut i = s.width as f64;
    let (mut z, mut pe_guess) = (0.0, 0.0);
    for (h, &l) in groups.iter().zip(&s.log_probs) {
        let p = l.exp();
        let order = h.order() as f64;
        i -= p * order.log2();
        z += p * (order - 1.0);
        pe_guess += p * (1.0 - 1.0 / order);
    }
    let ln_pe_ambiguous = log_sum_exp(&s.log_probs[1..]);
    let guess_terms: Vec<f64> = groups
        .iter()
        .zip(&s.log_probs)
        .skip(1)
        .map(|(h, l)| l + (1.0 - 1.0 / h.order() as f64).ln())
        .collect();
    let ln_pe_guess = log_sum_exp(&guess_terms);
    let z_terms: Vec<f64> = groups
        .iter()
        .zip(&s.log_probs)
        .skip(1)
        .map(|(h, l)| l + ((h.order() - 1) as f64).ln())
        .collect();
    let ln_z = log_sum_exp(&z_terms) - ((q.max(2) - 1) as f64).ln();
    let (mut ln_z_max, mut ln_z_min) = (f64::NEG_INFINITY, f64::INFINITY);
    for d in 1..q {
        let lz = s.ln_pair_z(d);
        ln_z_max = ln_z_max.max(lz);
        ln_z_min = ln_z_min.min(lz);
    }
    if q == 1 {
        ln_z_min = f64::NEG_INFINITY;
    }
    StateMetrics {
        i: i.clamp(0.0, s.width as f64),
        z: if q > 1 { (z / (q - 1) as f64).clamp(0.0, 1.0) } else { 0.0 },
        z_max: ln_z_max.exp().min(1.0),
        z_min: ln_z_min.exp().min(1.0),
        pe_ambiguous: ln_pe_ambiguous.exp(),
        pe_guess: pe_guess.clamp(0.0, 1.0),
        ln_z,
        ln_z_max,
        ln_z_min,
        ln_pe_ambiguous,
        ln_pe_guess,
    }
}

/// One leaf channel of a density-evolution run.
#[derive(Clone, Debug)]
pub struct ChannelState {
    pub channel: Channel,
    pub state: SubgroupStateDist,
    pub metrics: StateMetrics,
}

/// Channel states of every node of a layout over the erasure channel.
#[derive(Clone, Debug)]
pub struct DeResult {
    pub scheme: Scheme,
    pub n: usize,
    pub block_bits: usize,
    pub epsilon: f64,
    /// `levels[d][i]` is the state of `layout.levels()[d][i]`.
    pub levels: Vec<Vec<SubgroupStateDist>>,
    pub channels: Vec<ChannelState>,
}

/// Split tables for every (kernel, group) of a layout.
pub fn split_tables(layout: &Layout) -> Result<Vec<Vec<SplitTable>>> {
    layout
        .kernels()
        .iter()
        .map(|k| (0..k.groups()).map(|g| SplitTable::new(k, g)).collect())
        .collect()
}

pub fn de_evolve(layout: &Layout, epsilon: f64) -> Result<DeResult> {
    let tables = split_tables(layout)?;
    let mut levels = vec![vec![bec_base_state(epsilon, layout.base_width())?]];
    for d in 0..layout.depth() {
        let nodes = &layout.levels()[d];
        let next: Vec<Vec<SubgroupStateDist>> = nodes
            .par_iter()
            .zip(&levels[d])
            .map(|(node, state)| {
                let kid = node.kernel.expect("internal node");
                tables[kid].iter().map(|t| t.apply(state)).collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?;
        levels.push(next.into_iter().flatten().collect());
    }
    let channels = layout
        .channels()
        .iter()
        .zip(levels.last().expect("at least one level"))
        .map(|(c, s)| ChannelState {
            channel: *c,
            state: s.clone(),
            metrics: state_metrics(s),
        })
        .collect();
    Ok(DeResult {
        scheme: layout.scheme(),
        n: layout.n(),
        block_bits: layout.block_bits(),
        epsilon,
        levels,
        channels,
    })
}

impl DeResult {
    /// `Σ I / N` over the leaf channels; equals the channel capacity.
    pub fn mean_information(&self) -> f64 {
        self.channels.iter().map(|c| c.metrics.i).sum::<f64>() / self.block_bits as f64
    }

    /// `Σ I / N` over the nodes of level `d` (each node weighted by its bit count).
    pub fn level_mean_information(&self, layout: &Layout, d: usize) -> f64 {
        layout.levels()[d]
            .iter()
            .zip(&self.levels[d])
            .map(|(node, s)| node.bits as f64 / node.width as f64 * state_metrics(s).i)
            .sum::<f64>()
            / self.block_bits as f64
    }

    /// Writes the per-channel dump as CSV.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), csv::Error> {
        let labels: Vec<String> = subgroups(2)
            .expect("width 2")
            .iter()
            .map(|h| h.label())
            .collect();
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec![
            "channel_start_index".to_string(),
            "width".into(),
            "I".into(),
            "Z".into(),
            "P_e_ambiguous".into(),
            "P_e_guess".into(),
        ];
        header.extend(labels.iter().map(|l| format!("p_{l}")));
        w.write_record(&header)?;
        for c in &self.channels {
            let m = &c.metrics;
            let mut row = vec![
                (c.channel.start + 1).to_string(),
                c.channel.width.to_string(),
                fmt(m.i),
                fmt(m.z),
                fmt(m.pe_ambiguous),
                fmt(m.pe_guess),
            ];
            for l in &labels {
                let p = c.state.entries().into_iter().find(|(h, _)| h.label() == *l);
                row.push(p.map_or("NA".to_string(), |(_, p)| fmt(p)));
            }
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn fmt(x: f64) -> String {
    format!("{x:.17e}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{bhattacharyya, capacity, make_bec, split_channel, split_tree};
    use crate::construction::build_layout;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn base_states() {
        let s = bec_base_state(0.0, 2).unwrap();
        assert_eq!(s.probs()[0], 1.0);
        let s = bec_base_state(1.0, 1).unwrap();
        assert_eq!(s.probs(), vec![0.0, 1.0]);
        let s = bec_base_state(0.5, 2).unwrap();
        assert_eq!(s.probs(), vec![0.25, 0.25, 0.25, 0.0, 0.25]);
        assert!(bec_base_state(0.5, 3).is_err());
        assert!(bec_base_state(1.2, 1).is_err());
    }

    #[test]
    fn metrics_formulas() {
        let m = state_metrics(&bec_base_state(0.3, 1).unwrap());
        assert!(close(m.i, 0.7, 1e-15) && close(m.z, 0.3, 1e-15));
        assert!(close(m.pe_ambiguous, 0.3, 1e-15));
        assert!(close(m.ln_z, 0.3f64.ln(), 1e-15));
        let m = state_metrics(&bec_base_state(0.4, 2).unwrap());
        assert!(close(m.ln_z.exp(), m.z, 1e-15));
        let m = state_metrics(&SubgroupStateDist::useless(2).unwrap());
        assert_eq!((m.i, m.z, m.pe_guess), (0.0, 1.0, 0.75));
        let m = state_metrics(&SubgroupStateDist::perfect(2).unwrap());
        assert_eq!((m.i, m.z, m.pe_guess, m.pe_ambiguous), (2.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn uv_recursion_matches_classic_bec() {
        let k = Kernel::arikan();
        for eps in [0.1, 0.37, 0.5, 0.9] {
            let s = bec_base_state(eps, 1).unwrap();
            let minus = state_metrics(&de_split(&k, &s, 0).unwrap());
            let plus = state_metrics(&de_split(&k, &s, 1).unwrap());
            assert!(close(minus.pe_ambiguous, 2.0 * eps - eps * eps, 1e-15));
            assert!(close(plus.pe_ambiguous, eps * eps, 1e-15));
        }
    }

    #[test]
    fn noiseless_parent_gives_noiseless_children() {
        for k in [Kernel::g1(), Kernel::rs4()] {
            let s = SubgroupStateDist::perfect(k.symbol_width()).unwrap();
            for g in 0..k.groups() {
                let c = de_split(&k, &s, g).unwrap();
                assert_eq!(state_metrics(&c).pe_ambiguous, 0.0);
            }
        }
    }

    #[test]
    fn g1_split_matches_oracle() {
        let k = Kernel::g1();
        let w = make_bec(0.5).unwrap();
        let s = bec_base_state(0.5, 1).unwrap();
        for g in 0..3 {
            let oracle = split_channel(&k, &w, g).unwrap();
            let m = state_metrics(&de_split(&k, &s, g).unwrap());
            let b = bhattacharyya(&oracle);
            assert!(close(m.i, capacity(&oracle), 1e-12));
            assert!(close(m.z, b.z, 1e-12));
            assert!(close(m.z_max, b.z_max, 1e-12) && close(m.z_min, b.z_min, 1e-12));
        }
    }

    #[test]
    fn de_matches_oracle_on_small_trees() {
        for scheme in Scheme::ALL {
            for n in 1..=2 {
                let layout = build_layout(scheme, n).unwrap();
                for eps in [0.1, 0.5, 0.9] {
                    let de = de_evolve(&layout, eps).unwrap();
                    let base = make_bec(eps).unwrap();
                    let base = if layout.base_width() == 2 { base.product(&base) } else { base };
                    let oracle = split_tree(&layout, &base).unwrap();
                    for (d, level) in oracle.iter().enumerate() {
                        for (w, s) in level.iter().zip(&de.levels[d]) {
                            let m = state_metrics(s);
                            let b = bhattacharyya(w);
                            assert!(close(m.i, capacity(w), 1e-12), "{scheme} n={n} eps={eps}");
                            assert!(close(m.z, b.z, 1e-12), "{scheme} n={n} eps={eps}");
                            assert!(close(m.z_max, b.z_max, 1e-12));
                            assert!(close(m.z_min, b.z_min, 1e-12));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn channel_states_align_with_leaves() {
        let layout = build_layout(Scheme::Mixed, 3).unwrap();
        let de = de_evolve(&layout, 0.5).unwrap();
        for (c, node) in de.channels.iter().zip(layout.levels().last().unwrap()) {
            assert_eq!(c.channel.start, node.first_bit);
            assert_eq!(c.channel.width, node.width);
            assert_eq!(c.state.width(), node.width);
        }
    }

    #[test]
    fn information_is_conserved_per_level() {
        for scheme in Scheme::ALL {
            let layout = build_layout(scheme, 4).unwrap();
            for eps in [0.0, 0.2, 0.5, 1.0] {
                let de = de_evolve(&layout, eps).unwrap();
                for d in 0..=layout.depth() {
                    assert!(close(de.level_mean_information(&layout, d), 1.0 - eps, 1e-9));
                }
                assert!(close(de.mean_information(), 1.0 - eps, 1e-9));
            }
        }
    }

    #[test]
    fn erasure_free_channel_is_perfect_everywhere() {
        let layout = build_layout(Scheme::Mixed, 3).unwrap();
        let de = de_evolve(&layout, 0.0).unwrap();
        assert!(de.channels.iter().all(|c| c.metrics.pe_ambiguous == 0.0));
    }

    #[test]
    fn log_domain_keeps_tiny_probabilities() {
        let layout = build_layout(Scheme::Arikan, 6).unwrap();
        let de = de_evolve(&layout, 0.5).unwrap();
        let best = de
            .channels
            .iter()
            .map(|c| c.metrics.ln_pe_ambiguous)
            .fold(f64::INFINITY, f64::min);
        // The best channel of a depth-12 binary tree at 1/2 has erasure 2^-4096.
        assert!(close(best, -4096.0 * std::f64::consts::LN_2, 1e-6));
    }

    #[test]
    fn csv_dump_has_header_and_rows() {
        let layout = build_layout(Scheme::Mixed, 1).unwrap();
        let de = de_evolve(&layout, 0.5).unwrap();
        let mut buf = Vec::new();
        de.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 4);
        assert!(lines[0].starts_with("channel_start_index,width,I,Z,P_e_ambiguous,P_e_guess,p_0"));
        assert!(lines[2].starts_with("2,2,"));
    }
}
