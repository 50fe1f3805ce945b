//! Polarization kernels: GF(2)-linear maps with grouped input and output
//! symbols, kernels induced by nested code chains, partial distances and
//! exponent bounds.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf_algebra::{BitMatrix, BitVec};

/// Kernels are tabulated, so their total bit count is capped.
pub const MAX_KERNEL_BITS: usize = 16;

/// Work budget (symbol-pair distance evaluations) for exhaustive partial distances.
pub const PARTIAL_DISTANCE_BUDGET: u64 = 1 << 28;

/// An invertible GF(2)-linear map `x = uG` with grouped inputs and outputs.
#[derive(Clone, Debug, PartialEq)]
pub struct Kernel {
    name: String,
    matrix: BitMatrix,
    input_widths: Vec<usize>,
    output_widths: Vec<usize>,
    input_offsets: Vec<usize>,
    output_offsets: Vec<usize>,
    table: Vec<u32>,
}

fn offsets(widths: &[usize]) -> Vec<usize> {
    widths
        .iter()
        .scan(0, |acc, &w| {
            let o = *acc;
            *acc += w;
            Some(o)
        })
        .collect()
}

impl Kernel {
    /// Validates and tabulates a kernel. All output symbols must share one width.
    pub fn new(
        name: impl Into<String>,
        matrix: BitMatrix,
        input_widths: Vec<usize>,
        output_widths: Vec<usize>,
    ) -> Result<Self> {
        let total = matrix.nrows();
        if matrix.ncols() != total {
            return Err(Error::InvalidKernel("matrix is not square".into()));
        }
        if total == 0 || total > MAX_KERNEL_BITS {
            return Err(Error::capacity(
                format!("kernel with {total} bits"),
                MAX_KERNEL_BITS as u64,
            ));
        }
        for (side, widths) in [("input", &input_widths), ("output", &output_widths)] {
            if widths.contains(&0) || widths.iter().sum::<usize>() != total {
                return Err(Error::InvalidKernel(format!(
                    "{side} widths {widths:?} do not partition {total} bits"
                )));
            }
        }
        if output_widths.iter().any(|&w| w != output_widths[0]) {
            return Err(Error::InvalidKernel(
                "output symbols must share a single width".into(),
            ));
        }
        if !matrix.is_invertible() {
            return Err(Error::InvalidKernel("matrix is not invertible".into()));
        }
        let row_words: Vec<u32> = matrix.rows().iter().map(|r| r.to_u64() as u32).collect();
        let mut table = vec![0u32; 1 << total];
        for u in 1..table.len() {
            let low = u.trailing_zeros() as usize;
            table[u] = table[u & (u - 1)] ^ row_words[low];
        }
        Ok(Kernel {
            name: name.into(),
            input_offsets: offsets(&input_widths),
            output_offsets: offsets(&output_widths),
            matrix,
            input_widths,
            output_widths,
            table,
        })
    }

    /// The binary kernel induced by the chain (4,4,1)-(4,3,2)-(4,1,4); inputs `(u1, u23, u4)`.
    pub fn g1() -> Self {
        let m = BitMatrix::parse_rows(&["1000", "0101", "0011", "1111"]).expect("g1 rows");
        Kernel::new("g1", m, vec![1, 2, 1], vec![1; 4]).expect("g1 is valid")
    }

    /// Quaternary kernel from the extended Reed-Solomon code of length 4.
    ///
    /// GF(4) symbols are written additively as bit pairs `(a0, a1)` for
    /// `a0 + a1*alpha` with `alpha^2 = alpha + 1`. Output symbol `j` is the
    /// evaluation at point `j` of `(0, 1, alpha, alpha^2)`; input symbol
    /// `i` multiplies the monomial `x^(3-i)`, so the trailing rows span the
    /// nested RS codes of distance 2, 3 and 4.
    pub fn rs4() -> Self {
        const POINTS: [u32; 4] = [0, 1, 2, 3];
        let mut m = BitMatrix::zeros(8, 8);
        for i in 0..4 {
            let degree = 3 - i as u32;
            for (j, &p) in POINTS.iter().enumerate() {
                let c = gf4_pow(p, degree);
                // Row for input bit 2i is the element 1 times c; bit 2i+1 is alpha times c.
                for (b, unit) in [1u32, 2].into_iter().enumerate() {
                    let prod = gf4_mul(unit, c);
                    m.set(2 * i + b, 2 * j, prod & 1 == 1);
                    m.set(2 * i + b, 2 * j + 1, prod & 2 == 2);
                }
            }
        }
        Kernel::new("rs4", m, vec![2; 4], vec![2; 4]).expect("rs4 is valid")
    }

    /// The binary (u+v, v) kernel.
    pub fn arikan() -> Self {
        let m = BitMatrix::parse_rows(&["10", "11"]).expect("arikan rows");
        Kernel::new("uv2", m, vec![1, 1], vec![1, 1]).expect("arikan is valid")
    }

    /// The (u+v, v) kernel acting on bit pairs.
    pub fn quaternary_arikan() -> Self {
        let m = BitMatrix::parse_rows(&["1000", "0100", "1010", "0101"]).expect("quv rows");
        Kernel::new("uv4", m, vec![2, 2], vec![2, 2]).expect("quaternary arikan is valid")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn matrix(&self) -> &BitMatrix {
        &self.matrix
    }

    /// Total number of input (and output) bits, `L`.
    pub fn total_bits(&self) -> usize {
        self.matrix.nrows()
    }

    /// Number of output symbols, `ℓ`.
    pub fn ell(&self) -> usize {
        self.output_widths.len()
    }

    /// Number of input groups, `m`.
    pub fn groups(&self) -> usize {
        self.input_widths.len()
    }

    pub fn input_widths(&self) -> &[usize] {
        &self.input_widths
    }

    pub fn output_widths(&self) -> &[usize] {
        &self.output_widths
    }

    pub fn input_width(&self, group: usize) -> usize {
        self.input_widths[group]
    }

    pub fn input_offset(&self, group: usize) -> usize {
        self.input_offsets[group]
    }

    pub fn output_offset(&self, symbol: usize) -> usize {
        self.output_offsets[symbol]
    }

    /// Width of every output symbol.
    pub fn symbol_width(&self) -> usize {
        self.output_widths[0]
    }

    /// Input groups of width at least two.
    pub fn glued_groups(&self) -> Vec<usize> {
        (0..self.groups())
            .filter(|&i| self.input_widths[i] >= 2)
            .collect()
    }

    /// `x = uG` on packed words (bit `k` of the integer is coordinate `k`).
    #[inline]
    pub fn apply_packed(&self, u: u32) -> u32 {
        self.table[u as usize]
    }

    pub fn apply(&self, v: &BitVec) -> Result<BitVec> {
        if v.len() != self.total_bits() {
            return Err(Error::DimensionMismatch {
                expected: self.total_bits(),
                found: v.len(),
            });
        }
        Ok(BitVec::from_u64(
            self.apply_packed(v.to_u64() as u32) as u64,
            self.total_bits(),
        ))
    }

    /// Packs per-group symbol values into an input word.
    pub fn pack_inputs(&self, symbols: &[u32]) -> u32 {
        symbols
            .iter()
            .zip(&self.input_offsets)
            .fold(0, |acc, (&s, &o)| acc | (s << o))
    }

    #[inline]
    pub fn input_symbol(&self, u: u32, group: usize) -> u32 {
        (u >> self.input_offsets[group]) & ((1 << self.input_widths[group]) - 1)
    }

    #[inline]
    pub fn output_symbol(&self, x: u32, symbol: usize) -> u32 {
        (x >> self.output_offsets[symbol]) & ((1 << self.output_widths[symbol]) - 1)
    }

    /// Number of output symbols in which `x` and `y` differ.
    pub fn symbol_distance(&self, x: u32, y: u32) -> usize {
        let d = x ^ y;
        (0..self.ell())
            .filter(|&j| self.output_symbol(d, j) != 0)
            .count()
    }

    pub fn to_json(&self) -> KernelJson {
        KernelJson {
            name: self.name.clone(),
            total_bits: self.total_bits(),
            input_widths: self.input_widths.clone(),
            output_widths: self.output_widths.clone(),
            matrix_rows: self.matrix.rows().iter().map(BitVec::to_hex).collect(),
        }
    }

    pub fn from_json(json: &KernelJson) -> Result<Self> {
        let rows = json
            .matrix_rows
            .iter()
            .map(|h| BitVec::from_hex(h, json.total_bits))
            .collect::<Result<Vec<_>>>()?;
        if rows.len() != json.total_bits {
            return Err(Error::DimensionMismatch {
                expected: json.total_bits,
                found: rows.len(),
            });
        }
        let m = BitMatrix::from_rows(rows, json.total_bits)?;
        Kernel::new(
            json.name.clone(),
            m,
            json.input_widths.clone(),
            json.output_widths.clone(),
        )
    }
}

/// Serialized kernel. Matrix rows are hex strings whose first digit's most
/// significant bit is coordinate 1 (row-vector convention `x = uG`).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KernelJson {
    pub name: String,
    #[serde(rename = "L")]
    pub total_bits: usize,
    pub input_widths: Vec<usize>,
    pub output_widths: Vec<usize>,
    pub matrix_rows: Vec<String>,
}

fn gf4_mul(a: u32, b: u32) -> u32 {
    let (a0, a1, b0, b1) = (a & 1, a >> 1 & 1, b & 1, b >> 1 & 1);
    let c0 = (a0 & b0) ^ (a1 & b1);
    let c1 = (a0 & b1) ^ (a1 & b0) ^ (a1 & b1);
    c0 | c1 << 1
}

fn gf4_pow(a: u32, e: u32) -> u32 {
    (0..e).fold(1, |acc, _| gf4_mul(acc, a))
}

/// Declared parameters `(n, k, d)` of one level of a code chain.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeParams {
    pub n: usize,
    pub k: usize,
    pub d: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChainLevel {
    pub generator: BitMatrix,
    pub params: CodeParams,
}

/// A validated chain of nested linear codes `C_1 ⊃ C_2 ⊃ ... ⊃ C_m`,
/// with `C_1 = {0,1}^ℓ` and an implicit final level `{0}`.
#[derive(Clone, Debug, PartialEq)]
pub struct CodeChain {
    levels: Vec<ChainLevel>,
}

impl CodeChain {
    pub fn new(levels: Vec<ChainLevel>) -> Result<Self> {
        let Some(first) = levels.first() else {
            return Err(Error::InvalidChain {
                level: 0,
                reason: "empty chain".into(),
            });
        };
        let ell = first.generator.ncols();
        if ell == 0 || ell > MAX_KERNEL_BITS {
            return Err(Error::capacity(
                format!("code length {ell}"),
                MAX_KERNEL_BITS as u64,
            ));
        }
        for (idx, level) in levels.iter().enumerate() {
            let bad = |reason: String| Error::InvalidChain { level: idx + 1, reason };
            let g = &level.generator;
            if g.ncols() != ell || level.params.n != ell {
                return Err(bad(format!("length differs from {ell}")));
            }
            let rank = g.rank();
            if rank != level.params.k {
                return Err(bad(format!(
                    "code has size 2^{rank}, declared 2^{}",
                    level.params.k
                )));
            }
            if idx == 0 && rank != ell {
                return Err(bad("first level must be the whole space".into()));
            }
            if idx > 0 {
                let parent = &levels[idx - 1];
                if level.params.k >= parent.params.k {
                    return Err(bad("level does not shrink the code".into()));
                }
                if let Some(r) = g.rows().iter().find(|r| !parent.generator.row_space_contains(r)) {
                    return Err(bad(format!("row {r} is not in the parent code")));
                }
            }
            let dist = min_distance(g);
            if dist < level.params.d {
                return Err(bad(format!(
                    "minimum distance {dist} below declared {}",
                    level.params.d
                )));
            }
        }
        Ok(CodeChain { levels })
    }

    /// The chain (4,4,1)-(4,3,2)-(4,1,4): whole space, even-weight code, repetition code.
    pub fn g1_chain() -> Self {
        let level = |rows: &[&str], k, d| ChainLevel {
            generator: BitMatrix::parse_rows(rows).expect("chain rows"),
            params: CodeParams { n: 4, k, d },
        };
        CodeChain::new(vec![
            level(&["1000", "0100", "0010", "0001"], 4, 1),
            level(&["0101", "0011", "1111"], 3, 2),
            level(&["1111"], 1, 4),
        ])
        .expect("g1 chain is valid")
    }

    pub fn levels(&self) -> &[ChainLevel] {
        &self.levels
    }

    pub fn length(&self) -> usize {
        self.levels[0].generator.ncols()
    }

    /// Dimension of level `i` (0-based), with `0` past the last level.
    fn dim(&self, i: usize) -> usize {
        self.levels.get(i).map_or(0, |l| l.params.k)
    }

    /// Input group widths `m_i = k_i - k_{i+1}`.
    pub fn group_widths(&self) -> Vec<usize> {
        (0..self.levels.len())
            .map(|i| self.dim(i) - self.dim(i + 1))
            .collect()
    }

    /// True when `x` lies in the code of level `i` (0-based; past the end is `{0}`).
    pub fn level_contains(&self, i: usize, x: &BitVec) -> bool {
        match self.levels.get(i) {
            Some(l) => l.generator.row_space_contains(x),
            None => x.is_zero(),
        }
    }

    /// Checks that `kernel` realizes the coset partition of this chain:
    /// two inputs agreeing on groups `1..=i` map into one coset of level
    /// `i+1`, and inputs differing within those groups map to distinct cosets.
    pub fn verify_kernel(&self, kernel: &Kernel) -> Result<()> {
        let widths = self.group_widths();
        if kernel.input_widths() != widths.as_slice() || kernel.total_bits() != self.length() {
            return Err(Error::InvalidKernel(format!(
                "kernel groups {:?} do not match chain groups {widths:?}",
                kernel.input_widths()
            )));
        }
        let total = kernel.total_bits();
        if total > 10 {
            return Err(Error::capacity("pairwise coset verification", 10));
        }
        let inputs = 1u32 << total;
        for u in 0..inputs {
            let x = BitVec::from_u64(kernel.apply_packed(u) as u64, total);
            if !self.level_contains(0, &x) {
                return Err(Error::InvalidKernel(format!("output {x} outside C_1")));
            }
            for v in 0..inputs {
                let y = BitVec::from_u64(kernel.apply_packed(v) as u64, total);
                let diff = x.xor(&y);
                for level in 1..=widths.len() {
                    let same_prefix =
                        (0..level).all(|g| kernel.input_symbol(u, g) == kernel.input_symbol(v, g));
                    if same_prefix != self.level_contains(level, &diff) {
                        return Err(Error::InvalidChain {
                            level,
                            reason: format!("inputs {u:#b} and {v:#b} break the coset partition"),
                        });
                    }
                }
            }
        }
        Ok(())
    }
}

fn min_distance(g: &BitMatrix) -> usize {
    let k = g.nrows();
    let words: Vec<u32> = g.rows().iter().map(|r| r.to_u64() as u32).collect();
    let mut best = usize::MAX;
    let mut acc = 0u32;
    // Gray-code walk over all nonzero codewords.
    for step in 1u32..(1 << k) {
        acc ^= words[step.trailing_zeros() as usize];
        best = best.min(acc.count_ones() as usize);
    }
    if k == 0 {
        g.ncols() + 1
    } else {
        best
    }
}

/// Builds the kernel induced by a code decomposition.
///
/// For each level, coset representatives are the generator rows of that level
/// that are independent modulo the next level (taken in row order), so the
/// induced map is linear and input group `i` selects the coset of `C_{i+1}`.
pub fn kernel_from_decomposition(name: &str, chain: &CodeChain) -> Result<Kernel> {
    let ell = chain.length();
    let mut rows: Vec<BitVec> = Vec::with_capacity(ell);
    let levels = chain.levels();
    for (i, level) in levels.iter().enumerate() {
        let below: Vec<BitVec> = levels
            .get(i + 1)
            .map(|l| l.generator.rows().to_vec())
            .unwrap_or_default();
        let mut span = below.clone();
        let mut picked = 0;
        let want = chain.group_widths()[i];
        for r in level.generator.rows() {
            if picked == want {
                break;
            }
            let trial = BitMatrix::from_rows(span.clone(), ell)?;
            if !trial.row_space_contains(r) {
                span.push(r.clone());
                rows.push(r.clone());
                picked += 1;
            }
        }
        if picked != want {
            return Err(Error::InvalidChain {
                level: i + 1,
                reason: format!("found {picked} coset representatives, need {want}"),
            });
        }
    }
    let matrix = BitMatrix::from_rows(rows, ell)?;
    if !matrix.is_invertible() {
        return Err(Error::InvalidChain {
            level: levels.len(),
            reason: "assembled matrix is singular".into(),
        });
    }
    let kernel = Kernel::new(name, matrix, chain.group_widths(), vec![1; ell])?;
    chain.verify_kernel(&kernel)?;
    Ok(kernel)
}

/// Per-group minimum and maximum partial distances.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PartialDistances {
    pub min: Vec<usize>,
    pub max: Vec<usize>,
}

/// `D^{(i)}_{x,x'}(prefix)`: least symbol distance between outputs with the
/// given prefix, symbols `x` and `x'` at group `i`, and arbitrary suffixes.
pub fn partial_distance_pair(k: &Kernel, group: usize, prefix: u32, x: u32, y: u32) -> usize {
    let off = k.input_offset(group);
    let suffix_off = off + k.input_width(group);
    let suffixes = 1u32 << (k.total_bits() - suffix_off);
    let prefix = prefix & ((1 << off) - 1);
    let mut best = usize::MAX;
    for s in 0..suffixes {
        let a = k.apply_packed(prefix | x << off | s << suffix_off);
        for t in 0..suffixes {
            let b = k.apply_packed(prefix | y << off | t << suffix_off);
            best = best.min(k.symbol_distance(a, b));
        }
    }
    best
}

/// Exhaustive partial distances, minimizing over prefixes, symbol pairs and suffix pairs.
pub fn partial_distances(k: &Kernel) -> Result<PartialDistances> {
    let total = k.total_bits();
    let mut work: u64 = 0;
    for i in 0..k.groups() {
        let off = k.input_offset(i) as u64;
        let rest = (total - k.input_offset(i)) as u64;
        work = work.saturating_add(1u64.checked_shl((off + 2 * rest) as u32).unwrap_or(u64::MAX));
    }
    if work > PARTIAL_DISTANCE_BUDGET {
        return Err(Error::capacity(
            format!("exhaustive partial distances for {total}-bit kernel"),
            PARTIAL_DISTANCE_BUDGET,
        ));
    }
    let mut min = Vec::with_capacity(k.groups());
    let mut max = Vec::with_capacity(k.groups());
    for i in 0..k.groups() {
        let q = 1u32 << k.input_width(i);
        let prefixes = 1u32 << k.input_offset(i);
        let (mut lo, mut hi) = (usize::MAX, 0);
        for x in 0..q {
            for y in 0..q {
                if x == y {
                    continue;
                }
                let d = (0..prefixes)
                    .map(|p| partial_distance_pair(k, i, p, x, y))
                    .min()
                    .expect("at least one prefix");
                lo = lo.min(d);
                hi = hi.max(d);
            }
        }
        min.push(lo);
        max.push(hi);
    }
    Ok(PartialDistances { min, max })
}

/// Lower and upper exponent bounds (base-ℓ logarithms).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ExponentBounds {
    pub e1: f64,
    pub e2: f64,
}

pub fn exponent_bounds_from(distances: &PartialDistances, ell: usize) -> ExponentBounds {
    let l = ell as f64;
    let avg = |ds: &[usize]| ds.iter().map(|&d| (d as f64).ln() / l.ln()).sum::<f64>() / l;
    ExponentBounds {
        e1: avg(&distances.min),
        e2: avg(&distances.max),
    }
}

pub fn exponent_bounds(k: &Kernel) -> Result<ExponentBounds> {
    Ok(exponent_bounds_from(&partial_distances(k)?, k.ell()))
}

/// A base kernel together with the auxiliary kernels serving its glued groups,
/// keyed by symbol width.
#[derive(Clone, Debug)]
pub struct MixedKernel {
    pub base: Kernel,
    pub auxiliary: BTreeMap<usize, Kernel>,
}

impl MixedKernel {
    pub fn new(base: Kernel, auxiliary: BTreeMap<usize, Kernel>) -> Result<Self> {
        for i in base.glued_groups() {
            let w = base.input_width(i);
            match auxiliary.get(&w) {
                None => {
                    return Err(Error::InvalidKernel(format!(
                        "no auxiliary kernel for glued group {} of width {w}",
                        i + 1
                    )))
                }
                Some(aux) if aux.symbol_width() != w || aux.ell() != base.ell() => {
                    return Err(Error::InvalidKernel(format!(
                        "auxiliary kernel `{}` does not act on {} symbols of width {w}",
                        aux.name(),
                        base.ell()
                    )))
                }
                Some(_) => {}
            }
        }
        Ok(MixedKernel { base, auxiliary })
    }

    /// `g1` with `rs4` serving the glued pair.
    pub fn g1_rs4() -> Self {
        MixedKernel::new(Kernel::g1(), BTreeMap::from([(2, Kernel::rs4())])).expect("valid")
    }

    /// Exponent bounds of the mixed construction: the minimum lower bound and
    /// maximum upper bound over the auxiliary kernels used by glued groups.
    pub fn exponent_bounds(&self) -> Result<ExponentBounds> {
        let glued = self.base.glued_groups();
        if glued.is_empty() {
            return exponent_bounds(&self.base);
        }
        let mut out = ExponentBounds {
            e1: f64::INFINITY,
            e2: f64::NEG_INFINITY,
        };
        for i in glued {
            let b = exponent_bounds(&self.auxiliary[&self.base.input_width(i)])?;
            out.e1 = out.e1.min(b.e1);
            out.e2 = out.e2.max(b.e2);
        }
        Ok(out)
    }
}
