//! Recursive code layouts.
//!
//! A layout is a tree of synthesized channels. The root is the physical
//! channel; each internal node is split by a kernel into one child per input
//! group; the leaves, read left to right, are the channels seen by the
//! successive-cancellation decoder. For the mixed scheme a width-1 node is
//! split by `g1` (children of widths 1, 2, 1) and a width-2 node by `rs4`.
//!
//! Encoding follows the same tree: a node's transform takes the child
//! transforms' output symbols at each position `t`, feeds them through the
//! node's kernel and emits the kernel outputs at positions `t*ℓ .. t*ℓ+ℓ`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf_algebra::{BitMatrix, BitVec};
use crate::kernels::Kernel;

/// Largest block length, in bits, that a layout may describe.
pub const MAX_BLOCK_BITS: usize = 1 << 20;

/// Largest block length for which the equivalent generator matrix is materialized.
pub const MAX_MATRIX_BITS: usize = 1 << 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// `g1` with `rs4` on glued pairs.
    Mixed,
    /// Binary (u+v, v) applied `2n` times.
    Arikan,
    /// Quaternary (u+v, v) on the channel, then two `rs4` towers of depth `n-1`.
    Rs4Top,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [Scheme::Mixed, Scheme::Arikan, Scheme::Rs4Top];

    pub fn as_str(&self) -> &'static str {
        match self {
            Scheme::Mixed => "mixed",
            Scheme::Arikan => "arikan",
            Scheme::Rs4Top => "rs4_top",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mixed" => Ok(Scheme::Mixed),
            "arikan" => Ok(Scheme::Arikan),
            "rs4_top" => Ok(Scheme::Rs4Top),
            other => Err(Error::UnknownScheme(other.to_string())),
        }
    }
}

/// One synthesized channel in the layout tree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Node {
    /// Bits carried by this channel's input symbol.
    pub width: usize,
    /// Index of the parent in the previous level.
    pub parent: Option<usize>,
    /// Input group of the parent's kernel that this node realizes.
    pub group: usize,
    /// Index into [`Layout::kernels`] of the kernel splitting this node; `None` for leaves.
    pub kernel: Option<usize>,
    /// Range of child indices in the next level.
    pub children: std::ops::Range<usize>,
    /// First message bit (0-based) covered by this node's subtree.
    pub first_bit: usize,
    /// Number of message bits covered by this node's subtree.
    pub bits: usize,
}

/// A leaf channel: consecutive message bits decided together.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Channel {
    /// 0-based index of the first bit.
    pub start: usize,
    pub width: usize,
}

impl Channel {
    /// 1-based indices, as used in the printed channel lists.
    pub fn indices(&self) -> Vec<usize> {
        (self.start + 1..=self.start + self.width).collect()
    }
}

#[derive(Clone, Debug)]
pub struct Layout {
    scheme: Scheme,
    n: usize,
    base_width: usize,
    kernels: Vec<Kernel>,
    levels: Vec<Vec<Node>>,
    channels: Vec<Channel>,
}

const G1: usize = 0;
const RS4: usize = 1;
const UV2: usize = 0;
const UV4: usize = 0;

/// Builds the layout of `scheme` for block length `4^n` bits.
pub fn build_layout(scheme: Scheme, n: usize) -> Result<Layout> {
    if n == 0 {
        return Err(Error::param("n must be at least 1"));
    }
    let block_bits = 4usize
        .checked_pow(n as u32)
        .filter(|&b| b <= MAX_BLOCK_BITS)
        .ok_or_else(|| Error::capacity(format!("block length 4^{n}"), MAX_BLOCK_BITS as u64))?;

    let (kernels, base_width, depth): (Vec<Kernel>, usize, usize) = match scheme {
        Scheme::Mixed => (vec![Kernel::g1(), Kernel::rs4()], 1, n),
        Scheme::Arikan => (vec![Kernel::arikan()], 1, 2 * n),
        Scheme::Rs4Top => (vec![Kernel::quaternary_arikan(), Kernel::rs4()], 2, n),
    };
    let choose = |level: usize, width: usize| -> Result<usize> {
        match (scheme, width) {
            (Scheme::Mixed, 1) => Ok(G1),
            (Scheme::Mixed, 2) => Ok(RS4),
            (Scheme::Arikan, 1) => Ok(UV2),
            (Scheme::Rs4Top, 2) if level == 0 => Ok(UV4),
            (Scheme::Rs4Top, 2) => Ok(RS4),
            (_, w) => Err(Error::UnsupportedWidth(w)),
        }
    };

    let mut levels: Vec<Vec<Node>> = vec![vec![Node {
        width: base_width,
        parent: None,
        group: 0,
        kernel: None,
        children: 0..0,
        first_bit: 0,
        bits: 0,
    }]];
    for level in 0..depth {
        let mut next = Vec::new();
        for (idx, node) in levels[level].iter_mut().enumerate() {
            let kid = choose(level, node.width)?;
            let kernel = &kernels[kid];
            if kernel.symbol_width() != node.width {
                return Err(Error::InvalidKernel(format!(
                    "kernel `{}` expects width-{} channels, node has width {}",
                    kernel.name(),
                    kernel.symbol_width(),
                    node.width
                )));
            }
            node.kernel = Some(kid);
            let begin = next.len();
            for group in 0..kernel.groups() {
                let width = kernel.input_width(group);
                if width == 0 || width > 2 {
                    return Err(Error::UnsupportedWidth(width));
                }
                next.push(Node {
                    width,
                    parent: Some(idx),
                    group,
                    kernel: None,
                    children: 0..0,
                    first_bit: 0,
                    bits: 0,
                });
            }
            node.children = begin..next.len();
        }
        levels.push(next);
    }

    // Leaves own consecutive bits in order; internal nodes cover their children.
    let mut start = 0;
    let mut channels = Vec::new();
    for leaf in levels.last_mut().expect("at least one level") {
        leaf.first_bit = start;
        leaf.bits = leaf.width;
        channels.push(Channel {
            start,
            width: leaf.width,
        });
        start += leaf.width;
    }
    for level in (0..depth).rev() {
        let (upper, lower) = levels.split_at_mut(level + 1);
        for node in upper[level].iter_mut() {
            let kids = &lower[0][node.children.clone()];
            node.first_bit = kids[0].first_bit;
            node.bits = kids.iter().map(|k| k.bits).sum();
        }
    }
    if start != block_bits {
        return Err(Error::DimensionMismatch {
            expected: block_bits,
            found: start,
        });
    }

    Ok(Layout {
        scheme,
        n,
        base_width,
        kernels,
        levels,
        channels,
    })
}

impl Layout {
    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Block length `N` in bits.
    pub fn block_bits(&self) -> usize {
        self.levels[0][0].bits
    }

    /// Width of one physical channel use (2 when bit pairs form a quaternary symbol).
    pub fn base_width(&self) -> usize {
        self.base_width
    }

    /// Number of physical channel symbols.
    pub fn channel_uses(&self) -> usize {
        self.block_bits() / self.base_width
    }

    pub fn kernels(&self) -> &[Kernel] {
        &self.kernels
    }

    pub fn kernel(&self, id: usize) -> &Kernel {
        &self.kernels[id]
    }

    /// Levels of the tree; level 0 is the physical channel, the last level the leaves.
    pub fn levels(&self) -> &[Vec<Node>] {
        &self.levels
    }

    pub fn depth(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn channels(&self) -> &[Channel] {
        &self.channels
    }

    /// Number of channels, glued pairs counted once (`ν`).
    pub fn nu(&self) -> usize {
        self.channels.len()
    }

    /// Number of width-2 channels (`γ`).
    pub fn glued_channel_count(&self) -> usize {
        self.channels.iter().filter(|c| c.width == 2).count()
    }

    /// Number of kernel applications (output positions) below a node at `level`.
    fn positions(&self, level: usize) -> usize {
        // Every node at a level has the same remaining tree shape in ℓ.
        let mut count = 1;
        let mut node = &self.levels[level][0];
        let mut l = level;
        while let Some(k) = node.kernel {
            count *= self.kernels[k].ell();
            node = &self.levels[l + 1][node.children.start];
            l += 1;
        }
        count
    }

    /// Encodes the message `u` into the codeword `x` (both `N` bits).
    pub fn encode(&self, u: &BitVec) -> Result<BitVec> {
        if u.len() != self.block_bits() {
            return Err(Error::DimensionMismatch {
                expected: self.block_bits(),
                found: u.len(),
            });
        }
        let symbols = self.encode_node(0, 0, u);
        let mut x = BitVec::zeros(self.block_bits());
        for (t, &s) in symbols.iter().enumerate() {
            x.set_symbol(t * self.base_width, self.base_width, s);
        }
        Ok(x)
    }

    /// Output symbols of a node's transform for the bits of its subtree.
    pub(crate) fn encode_node(&self, level: usize, idx: usize, u: &BitVec) -> Vec<u32> {
        let node = &self.levels[level][idx];
        let Some(kid) = node.kernel else {
            return vec![u.symbol(node.first_bit, node.width)];
        };
        let child_symbols: Vec<Vec<u32>> = node
            .children
            .clone()
            .map(|c| self.encode_node(level + 1, c, u))
            .collect();
        self.combine(kid, &child_symbols)
    }

    /// Applies kernel `kid` position-wise to the children's output symbols.
    pub(crate) fn combine(&self, kid: usize, child_symbols: &[Vec<u32>]) -> Vec<u32> {
        let kernel = &self.kernels[kid];
        let positions = child_symbols[0].len();
        let mut out = Vec::with_capacity(positions * kernel.ell());
        let mut inputs = vec![0u32; kernel.groups()];
        for t in 0..positions {
            for (g, syms) in child_symbols.iter().enumerate() {
                inputs[g] = syms[t];
            }
            let x = kernel.apply_packed(kernel.pack_inputs(&inputs));
            out.extend((0..kernel.ell()).map(|j| kernel.output_symbol(x, j)));
        }
        out
    }

    /// The `N x N` matrix `M` with `encode(u) = uM`.
    pub fn equivalent_generator_matrix(&self) -> Result<BitMatrix> {
        let n = self.block_bits();
        if n > MAX_MATRIX_BITS {
            return Err(Error::capacity(
                format!("generator matrix for N = {n}"),
                MAX_MATRIX_BITS as u64,
            ));
        }
        let rows = (0..n)
            .map(|i| self.encode(&BitVec::unit(n, i)))
            .collect::<Result<Vec<_>>>()?;
        BitMatrix::from_rows(rows, n)
    }

    /// Number of output positions of the root transform.
    pub fn root_positions(&self) -> usize {
        self.positions(0)
    }

    pub fn to_json(&self) -> LayoutJson {
        LayoutJson {
            scheme: self.scheme,
            n: self.n,
            block_bits: self.block_bits(),
            nu: self.nu(),
            gamma: self.glued_channel_count(),
            channels: self
                .channels
                .iter()
                .map(|c| ChannelJson {
                    indices: c.indices(),
                    width: c.width,
                })
                .collect(),
        }
    }
}

/// Closed form for the number of glued channels of the mixed scheme,
/// `(4^n / 2)(1 - 2^-n) = (4^n - 2^n) / 2`.
pub fn glued_count_formula(n: u32) -> u64 {
    (4u64.pow(n) - 2u64.pow(n)) / 2
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ChannelJson {
    pub indices: Vec<usize>,
    pub width: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LayoutJson {
    pub scheme: Scheme,
    pub n: usize,
    #[serde(rename = "N")]
    pub block_bits: usize,
    pub nu: usize,
    pub gamma: usize,
    pub channels: Vec<ChannelJson>,
}
