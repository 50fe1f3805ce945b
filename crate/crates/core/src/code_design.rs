//! Information-set selection and union bounds on the block error probability.

use std::io::Write;

use serde::Serialize;

use crate::construction::{build_layout, Scheme};
use crate::erasure_de::{de_evolve, DeResult};
use crate::error::{Error, Result};

/// Which per-channel error probability feeds the design.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PeMetric {
    /// Any residual ambiguity counts as an error.
    #[default]
    Ambiguous,
    /// A uniform guess inside the ambiguity coset.
    Guess,
}

impl std::str::FromStr for PeMetric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ambiguous" => Ok(PeMetric::Ambiguous),
            "guess" => Ok(PeMetric::Guess),
            other => Err(Error::param(format!("unknown error metric `{other}`"))),
        }
    }
}

/// Per-channel `(P_e, ln P_e)` under the chosen metric.
pub fn channel_costs(de: &DeResult, metric: PeMetric) -> Vec<(f64, f64)> {
    de.channels
        .iter()
        .map(|c| match metric {
            PeMetric::Ambiguous => (c.metrics.pe_ambiguous, c.metrics.ln_pe_ambiguous),
            PeMetric::Guess => (c.metrics.pe_guess, c.metrics.ln_pe_guess),
        })
        .collect()
}

/// Channels carrying data; glued channels are selected or frozen as a unit.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct InformationSet {
    /// Positions into the layout's channel list, ascending.
    pub selected: Vec<usize>,
    pub frozen: Vec<usize>,
    /// Bits carried by the selected channels.
    pub k: usize,
    pub requested_k: usize,
}

impl InformationSet {
    pub fn is_exact(&self) -> bool {
        self.k == self.requested_k
    }

    /// Builds a set from explicit positions.
    pub fn from_selected(de: &DeResult, mut selected: Vec<usize>) -> Result<Self> {
        selected.sort_unstable();
        selected.dedup();
        if selected.last().is_some_and(|&p| p >= de.channels.len()) {
            return Err(Error::param("selected channel out of range"));
        }
        let k = selected.iter().map(|&p| de.channels[p].channel.width).sum();
        let frozen = (0..de.channels.len())
            .filter(|p| selected.binary_search(p).is_err())
            .collect();
        Ok(InformationSet {
            selected,
            frozen,
            k,
            requested_k: k,
        })
    }

    /// Per-bit information flags over the message vector.
    pub fn info_mask(&self, de: &DeResult) -> Vec<bool> {
        let mut mask = vec![false; de.block_bits];
        for &p in &self.selected {
            let c = de.channels[p].channel;
            mask[c.start..c.start + c.width].iter_mut().for_each(|b| *b = true);
        }
        mask
    }
}

/// Channels of one width sorted by reliability, ties toward lower positions.
fn ranked(de: &DeResult, costs: &[(f64, f64)], width: usize) -> Vec<usize> {
    let mut v: Vec<usize> = (0..de.channels.len())
        .filter(|&p| de.channels[p].channel.width == width)
        .collect();
    v.sort_by(|&a, &b| costs[a].1.total_cmp(&costs[b].1).then(a.cmp(&b)));
    v
}

fn prefix_sums(order: &[usize], costs: &[(f64, f64)]) -> Vec<f64> {
    let mut sums = Vec::with_capacity(order.len() + 1);
    sums.push(0.0);
    for &p in order {
        sums.push(sums.last().unwrap() + costs[p].0);
    }
    sums
}

struct Ranking {
    singles: Vec<usize>,
    doubles: Vec<usize>,
    single_sums: Vec<f64>,
    double_sums: Vec<f64>,
}

impl Ranking {
    fn new(de: &DeResult, metric: PeMetric) -> Result<Self> {
        if let Some(c) = de.channels.iter().find(|c| c.channel.width > 2) {
            return Err(Error::UnsupportedWidth(c.channel.width));
        }
        let costs = channel_costs(de, metric);
        let singles = ranked(de, &costs, 1);
        let doubles = ranked(de, &costs, 2);
        let single_sums = prefix_sums(&singles, &costs);
        let double_sums = prefix_sums(&doubles, &costs);
        Ok(Ranking {
            singles,
            doubles,
            single_sums,
            double_sums,
        })
    }

    /// Cheapest split of `k` bits into `(doubles, singles)`, if any exists.
    fn best(&self, k: usize) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for d in 0..=self.doubles.len().min(k / 2) {
            let s = k - 2 * d;
            if s > self.singles.len() {
                continue;
            }
            let cost = self.double_sums[d] + self.single_sums[s];
            if best.is_none_or(|(_, c)| cost < c) {
                best = Some((d, cost));
            }
        }
        best
    }

    fn total_bits(&self) -> usize {
        self.singles.len() + 2 * self.doubles.len()
    }
}

/// Minimum union-bound information set carrying `k` bits.
///
/// With channel widths 1 and 2 the optimum takes the `d` most reliable glued
/// channels and the `k - 2d` most reliable single channels for some `d`; every
/// `d` is tried. If no set carries exactly `k` bits the nearest smaller
/// achievable size is used and the result is flagged as inexact.
pub fn select_information_set(de: &DeResult, k: usize) -> Result<InformationSet> {
    select_information_set_with(de, k, PeMetric::default())
}

pub fn select_information_set_with(de: &DeResult, k: usize, metric: PeMetric) -> Result<InformationSet> {
    let ranking = Ranking::new(de, metric)?;
    if k > ranking.total_bits() {
        return Err(Error::param(format!(
            "K = {k} exceeds block length {}",
            ranking.total_bits()
        )));
    }
    let (achieved, (d, _)) = (0..=k)
        .rev()
        .find_map(|kk| ranking.best(kk).map(|b| (kk, b)))
        .expect("K = 0 is always achievable");
    let mut selected: Vec<usize> = ranking.doubles[..d].to_vec();
    selected.extend_from_slice(&ranking.singles[..achieved - 2 * d]);
    let mut set = InformationSet::from_selected(de, selected)?;
    set.requested_k = k;
    Ok(set)
}

/// Greedy selection in ascending error probability with a one-bit repair step.
///
/// Channels are taken in order of reliability while they fit. When the
/// next glued channel would overshoot by one bit it is skipped in favour of
/// the best remaining single channel. Kept for comparison: it can be worse
/// than [`select_information_set`].
pub fn greedy_with_repair(de: &DeResult, k: usize, metric: PeMetric) -> Result<InformationSet> {
    let costs = channel_costs(de, metric);
    let mut order: Vec<usize> = (0..de.channels.len()).collect();
    order.sort_by(|&a, &b| costs[a].1.total_cmp(&costs[b].1).then(a.cmp(&b)));
    let mut selected = Vec::new();
    let mut bits = 0;
    for p in order {
        let w = de.channels[p].channel.width;
        if bits + w <= k {
            selected.push(p);
            bits += w;
        }
        if bits == k {
            break;
        }
    }
    let mut set = InformationSet::from_selected(de, selected)?;
    set.requested_k = k;
    Ok(set)
}

/// Sum of the selected channels' error probabilities, one term per channel.
pub fn block_error_bound(de: &DeResult, set: &InformationSet) -> f64 {
    block_error_bound_with(de, set, PeMetric::default())
}

pub fn block_error_bound_with(de: &DeResult, set: &InformationSet, metric: PeMetric) -> f64 {
    let costs = channel_costs(de, metric);
    set.selected.iter().map(|&p| costs[p].0).sum::<f64>()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CurvePoint {
    pub scheme: Scheme,
    #[serde(rename = "N")]
    pub block_bits: usize,
    pub epsilon: f64,
    pub rate: f64,
    #[serde(rename = "K")]
    pub k: usize,
    pub bound: f64,
}

/// Rates 0.05, 0.10, ..., 0.70.
pub fn default_rate_grid() -> Vec<f64> {
    (1..=14).map(|i| i as f64 * 0.05).collect()
}

pub fn rate_curve(scheme: Scheme, n: usize, epsilon: f64, rates: &[f64]) -> Result<Vec<CurvePoint>> {
    let de = de_evolve(&build_layout(scheme, n)?, epsilon)?;
    rate_curve_from(&de, rates)
}

pub fn rate_curve_from(de: &DeResult, rates: &[f64]) -> Result<Vec<CurvePoint>> {
    rates
        .iter()
        .map(|&rate| {
            if !(0.0..=1.0).contains(&rate) {
                return Err(Error::param(format!("rate {rate} outside [0, 1]")));
            }
            let k = (rate * de.block_bits as f64).round() as usize;
            let set = select_information_set(de, k)?;
            Ok(CurvePoint {
                scheme: de.scheme,
                block_bits: de.block_bits,
                epsilon: de.epsilon,
                rate,
                k: set.k,
                bound: block_error_bound(de, &set),
            })
        })
        .collect()
}

/// Largest `K` whose optimal union bound does not exceed `target`.
pub fn max_k_at_bound(de: &DeResult, target: f64) -> Result<usize> {
    let ranking = Ranking::new(de, PeMetric::default())?;
    let mut best = 0;
    for d in 0..=ranking.doubles.len() {
        let base = ranking.double_sums[d];
        if base > target {
            break;
        }
        // Prefix sums are nondecreasing, so the admissible singles form a prefix.
        let s = ranking.single_sums.partition_point(|&c| base + c <= target) - 1;
        best = best.max(2 * d + s);
    }
    Ok(best)
}

/// `R_max(scheme a) - R_max(scheme b)` at the given union-bound target.
pub fn rate_gap(a: Scheme, b: Scheme, n: usize, epsilon: f64, target: f64) -> Result<f64> {
    let rate = |s: Scheme| -> Result<f64> {
        let de = de_evolve(&build_layout(s, n)?, epsilon)?;
        Ok(max_k_at_bound(&de, target)? as f64 / de.block_bits as f64)
    };
    Ok(rate(a)? - rate(b)?)
}

pub fn write_curve_csv<W: Write>(points: &[CurvePoint], out: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["scheme", "N", "epsilon", "rate", "K", "bound"])?;
    for p in points {
        w.write_record([
            p.scheme.to_string(),
            p.block_bits.to_string(),
            p.epsilon.to_string(),
            format!("{:.2}", p.rate),
            p.k.to_string(),
            format!("{:.17e}", p.bound),
        ])?;
    }
    w.flush()?;
    Ok(())
}
