//! The random channel tree process of the mixed construction over the
//! erasure channel, and numerical checks of its limit behaviour.
//!
//! A path starts at the physical channel and repeatedly moves to one of the
//! children of the current node. Input group `i` of a kernel with `L` input
//! bits is chosen with probability `m_i / L`, so a node at depth `d` of width
//! `w` is reached with probability `w / 4^d`. Channel states along a path are
//! exact erasure states; only the branch choices are random.

use std::io::Write;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::construction::{build_layout, Layout, Scheme};
use crate::erasure_de::{bec_base_state, de_evolve, state_metrics, DeResult, SplitTable, StateMetrics, SubgroupStateDist};
use crate::error::{Error, Result};
use crate::kernels::{partial_distances, Kernel, PartialDistances};
use crate::sc_codec::trial_rng;

/// Constants of the one-step bounds on `Z_max` and `Z_min`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoundConstants {
    pub c1: f64,
    pub c2: f64,
}

impl Default for BoundConstants {
    fn default() -> Self {
        BoundConstants {
            c1: 64.0,
            c2: 1.0 / 4096.0,
        }
    }
}

/// Largest tree depth handled by the exact checks.
pub const MAX_EXACT_DEPTH: usize = 7;

/// One node visited by a path.
#[derive(Clone, Debug)]
pub struct ProcessStep {
    /// Width of the current channel (`N_n`).
    pub width: usize,
    pub state: SubgroupStateDist,
    /// `I(W_n) / N_n`.
    pub i: f64,
    pub z: f64,
    /// Input group taken from this node; `None` at the final step.
    pub branch: Option<usize>,
    /// Smallest and largest partial distance of the branch taken.
    pub d_hat: Option<usize>,
    pub d_check: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct ProcessPath {
    pub steps: Vec<ProcessStep>,
    /// First step whose branch is a glued group, if any.
    pub t: Option<usize>,
}

/// Kernels, split tables and partial distances of the mixed construction.
pub struct TreeProcess {
    kernels: [Kernel; 2],
    tables: [Vec<SplitTable>; 2],
    distances: [PartialDistances; 2],
}

impl TreeProcess {
    pub fn new() -> Result<Self> {
        let kernels = [Kernel::g1(), Kernel::rs4()];
        let tables = [
            (0..3).map(|g| SplitTable::new(&kernels[0], g)).collect::<Result<Vec<_>>>()?,
            (0..4).map(|g| SplitTable::new(&kernels[1], g)).collect::<Result<Vec<_>>>()?,
        ];
        let distances = [partial_distances(&kernels[0])?, partial_distances(&kernels[1])?];
        Ok(TreeProcess {
            kernels,
            tables,
            distances,
        })
    }

    fn kernel_index(width: usize) -> usize {
        width - 1
    }

    fn choose(&self, width: usize, rng: &mut impl Rng) -> usize {
        let k = &self.kernels[Self::kernel_index(width)];
        let mut r = rng.gen_range(0..k.total_bits());
        for g in 0..k.groups() {
            if r < k.input_width(g) {
                return g;
            }
            r -= k.input_width(g);
        }
        unreachable!("group widths sum to the kernel size")
    }

    /// Samples one path of `n_max` transitions.
    pub fn sample(&self, epsilon: f64, n_max: usize, rng: &mut impl Rng) -> Result<ProcessPath> {
        let mut state = bec_base_state(epsilon, 1)?;
        let mut steps = Vec::with_capacity(n_max + 1);
        let mut t = None;
        for n in 0..=n_max {
            let width = state.width();
            let m = state_metrics(&state);
            let mut step = ProcessStep {
                width,
                state: state.clone(),
                i: m.i / width as f64,
                z: m.z,
                branch: None,
                d_hat: None,
                d_check: None,
            };
            if n < n_max {
                let ki = Self::kernel_index(width);
                let g = self.choose(width, rng);
                step.branch = Some(g);
                step.d_hat = Some(self.distances[ki].min[g]);
                step.d_check = Some(self.distances[ki].max[g]);
                if t.is_none() && self.kernels[ki].input_width(g) > width {
                    t = Some(n);
                }
                state = self.tables[ki][g].apply(&state)?;
            }
            steps.push(step);
        }
        Ok(ProcessPath { steps, t })
    }
}

/// One path drawn from stream 0 of `seed`.
pub fn sample_path(epsilon: f64, n_max: usize, seed: u64) -> Result<ProcessPath> {
    sample_paths(epsilon, n_max, 1, seed).map(|mut p| p.remove(0))
}

/// Independent paths; path `p` uses stream `p` of `seed`.
pub fn sample_paths(epsilon: f64, n_max: usize, paths: u64, seed: u64) -> Result<Vec<ProcessPath>> {
    if n_max == 0 {
        return Err(Error::param("n_max must be at least 1"));
    }
    let process = TreeProcess::new()?;
    (0..paths)
        .into_par_iter()
        .map(|p| process.sample(epsilon, n_max, &mut trial_rng(seed, p)))
        .collect()
}

fn exact_tree(epsilon: f64, n: usize) -> Result<(Layout, DeResult)> {
    if n > MAX_EXACT_DEPTH {
        return Err(Error::param(format!("exact process checks support n <= {MAX_EXACT_DEPTH}")));
    }
    let layout = build_layout(Scheme::Mixed, n.max(1))?;
    let de = de_evolve(&layout, epsilon)?;
    Ok((layout, de))
}

/// `(probability, metrics)` of every node at depth `d`.
pub fn level_distribution(layout: &Layout, de: &DeResult, d: usize) -> Vec<(f64, usize, StateMetrics)> {
    let scale = 4f64.powi(d as i32);
    layout.levels()[d]
        .iter()
        .zip(&de.levels[d])
        .map(|(node, s)| (node.width as f64 / scale, node.width, state_metrics(s)))
        .collect()
}

/// Largest deviation between a node's `I/width` and the branch-weighted mean
/// of its children's, over the exact tree of depth `n`.
pub fn martingale_check(epsilon: f64, n: usize) -> Result<f64> {
    let (layout, de) = exact_tree(epsilon, n)?;
    let mut worst: f64 = 0.0;
    for d in 0..n {
        for (node, s) in layout.levels()[d].iter().zip(&de.levels[d]) {
            let k = layout.kernel(node.kernel.expect("internal node"));
            let own = state_metrics(s).i / node.width as f64;
            let mean: f64 = node
                .children
                .clone()
                .map(|c| {
                    let child = &layout.levels()[d + 1][c];
                    let p = child.width as f64 / k.total_bits() as f64;
                    p * state_metrics(&de.levels[d + 1][c]).i / child.width as f64
                })
                .sum();
            worst = worst.max((own - mean).abs());
        }
    }
    Ok(worst)
}

/// `E[I_n]` at every depth `0..=n`.
pub fn mean_information_by_level(epsilon: f64, n: usize) -> Result<Vec<f64>> {
    let (layout, de) = exact_tree(epsilon, n)?;
    Ok((0..=n)
        .map(|d| {
            level_distribution(&layout, &de, d)
                .iter()
                .map(|(p, w, m)| p * m.i / *w as f64)
                .sum()
        })
        .collect())
}

/// `Pr(δ < I_d < 1 - δ)` for every depth `d` in `0..=n`.
pub fn polarization_profile(epsilon: f64, n: usize, delta: f64) -> Result<Vec<f64>> {
    if !(0.0..=0.5).contains(&delta) {
        return Err(Error::param(format!("delta {delta} outside [0, 0.5]")));
    }
    let (layout, de) = exact_tree(epsilon, n)?;
    Ok((0..=n)
        .map(|d| {
            level_distribution(&layout, &de, d)
                .iter()
                .filter(|(_, w, m)| {
                    let i = m.i / *w as f64;
                    delta < i && i < 1.0 - delta
                })
                .map(|(p, _, _)| p)
                .sum()
        })
        .collect())
}

pub fn polarization_fraction(epsilon: f64, n: usize, delta: f64) -> Result<f64> {
    Ok(polarization_profile(epsilon, n, delta)?[n])
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RateReport {
    pub beta: f64,
    pub n: usize,
    /// `Pr(Z_n <= 2^(-4^(βn)))`.
    pub mass_below_threshold: f64,
    /// `Pr(Z_n >= 2^(-4^(βn)))`.
    pub mass_above_threshold: f64,
    pub capacity: f64,
}

/// Exact mass of channels with `Z_n` below the threshold `2^(-4^(βn))`.
pub fn rate_of_polarization_check(epsilon: f64, n: usize, beta: f64) -> Result<RateReport> {
    Ok(rate_of_polarization_profile(epsilon, n, beta)?.remove(n))
}

/// [`rate_of_polarization_check`] at every depth `0..=n`.
pub fn rate_of_polarization_profile(epsilon: f64, n: usize, beta: f64) -> Result<Vec<RateReport>> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::param(format!("beta {beta} outside (0, 1)")));
    }
    let (layout, de) = exact_tree(epsilon, n)?;
    Ok((0..=n)
        .map(|d| {
            // Compare natural logarithms; the threshold underflows f64 quickly.
            let ln_threshold = -4f64.powf(beta * d as f64) * std::f64::consts::LN_2;
            let (mut below, mut above) = (0.0, 0.0);
            for (p, _, m) in level_distribution(&layout, &de, d) {
                if m.ln_z <= ln_threshold {
                    below += p;
                }
                if m.ln_z >= ln_threshold {
                    above += p;
                }
            }
            RateReport {
                beta,
                n: d,
                mass_below_threshold: below,
                mass_above_threshold: above,
                capacity: 1.0 - epsilon,
            }
        })
        .collect())
}

/// Violations of `Z_max(child) <= c1 Z_max(parent)^D̂` and
/// `Z_min(child) >= c2 Z_min(parent)^Ď` over the exact tree.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ZBoundReport {
    pub edges: usize,
    pub upper_violations: usize,
    pub lower_violations: usize,
}

impl ZBoundReport {
    pub fn violations(&self) -> usize {
        self.upper_violations + self.lower_violations
    }
}

pub fn z_bound_check(epsilon: f64, n: usize) -> Result<ZBoundReport> {
    z_bound_check_with(epsilon, n, BoundConstants::default())
}

pub fn z_bound_check_with(epsilon: f64, n: usize, c: BoundConstants) -> Result<ZBoundReport> {
    let (layout, de) = exact_tree(epsilon, n)?;
    let distances: Vec<PartialDistances> = layout
        .kernels()
        .iter()
        .map(partial_distances)
        .collect::<Result<_>>()?;
    let (ln_c1, ln_c2) = (c.c1.ln(), c.c2.ln());
    // Slack for rounding in the logarithms.
    let slack = 1e-9;
    let mut report = ZBoundReport::default();
    for d in 0..n {
        for (node, s) in layout.levels()[d].iter().zip(&de.levels[d]) {
            let kid = node.kernel.expect("internal node");
            let parent = state_metrics(s);
            for (g, c) in node.children.clone().enumerate() {
                let child = state_metrics(&de.levels[d + 1][c]);
                let d_hat = distances[kid].min[g] as f64;
                let d_check = distances[kid].max[g] as f64;
                report.edges += 1;
                let upper = ln_c1 + d_hat * parent.ln_z_max;
                if child.ln_z_max > upper + slack * upper.abs().max(1.0) {
                    report.upper_violations += 1;
                }
                let lower = ln_c2 + d_check * parent.ln_z_min;
                if child.ln_z_min < lower - slack * lower.abs().max(1.0) {
                    report.lower_violations += 1;
                }
            }
        }
    }
    Ok(report)
}

/// Which law drives the partial-distance sequence.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TailMode {
    /// Branches of the base kernel until gluing, then of the auxiliary kernel.
    Full,
    /// Gluing never takes effect; every step follows the base kernel's law.
    PreGlueOnly,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HistogramBin {
    pub lo: f64,
    pub hi: f64,
    pub count: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SllnReport {
    pub n_steps: usize,
    pub paths: u64,
    /// Mean over paths of `n⁻¹ Σ log₄ D̂_i`.
    pub mean: f64,
    /// Standard deviation of the time averages across paths.
    pub std_dev: f64,
    pub histogram: Vec<HistogramBin>,
}

pub const SLLN_HISTOGRAM_BINS: usize = 50;

/// Time averages of `log₄ D̂` along sampled branch sequences.
pub fn slln_tail_check(n_steps: usize, paths: u64, seed: u64, mode: TailMode) -> Result<SllnReport> {
    if n_steps == 0 || paths == 0 {
        return Err(Error::param("n_steps and paths must be positive"));
    }
    let process = TreeProcess::new()?;
    let log4 = |d: usize| (d as f64).ln() / 4f64.ln();
    let averages: Vec<f64> = (0..paths)
        .into_par_iter()
        .map(|p| {
            let mut rng = trial_rng(seed, p);
            let mut width = 1;
            let mut total = 0.0;
            for _ in 0..n_steps {
                let ki = TreeProcess::kernel_index(width);
                let g = process.choose(width, &mut rng);
                total += log4(process.distances[ki].min[g]);
                if mode == TailMode::Full {
                    width = process.kernels[ki].input_width(g);
                }
            }
            total / n_steps as f64
        })
        .collect();
    let count = averages.len() as f64;
    let mean = averages.iter().sum::<f64>() / count;
    let var = averages.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / count;
    let mut histogram: Vec<HistogramBin> = (0..SLLN_HISTOGRAM_BINS)
        .map(|b| HistogramBin {
            lo: b as f64 / SLLN_HISTOGRAM_BINS as f64,
            hi: (b + 1) as f64 / SLLN_HISTOGRAM_BINS as f64,
            count: 0,
        })
        .collect();
    for a in &averages {
        let b = ((a * SLLN_HISTOGRAM_BINS as f64) as usize).min(SLLN_HISTOGRAM_BINS - 1);
        histogram[b].count += 1;
    }
    Ok(SllnReport {
        n_steps,
        paths,
        mean,
        std_dev: var.sqrt(),
        histogram,
    })
}

pub fn write_rate_csv<W: Write>(reports: &[RateReport], out: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["beta", "n", "mass_below_threshold", "mass_above_threshold", "capacity"])?;
    for r in reports {
        w.write_record([
            r.beta.to_string(),
            r.n.to_string(),
            format!("{:.17e}", r.mass_below_threshold),
            format!("{:.17e}", r.mass_above_threshold),
            r.capacity.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_histogram_csv<W: Write>(report: &SllnReport, out: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["bin_lo", "bin_hi", "count"])?;
    for b in &report.histogram {
        w.write_record([format!("{:.2}", b.lo), format!("{:.2}", b.hi), b.count.to_string()])?;
    }
    w.flush()?;
    Ok(())
}
