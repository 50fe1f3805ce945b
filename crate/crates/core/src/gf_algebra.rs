//! Linear algebra over GF(2).
//!
//! Vectors are row vectors and matrices act on the right (`x = uG`). Bit
//! index 0 is the leftmost coordinate. When a group of bits is packed into an
//! integer (a "symbol"), the leftmost bit of the group is the least
//! significant bit of the integer.

use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};

/// Largest symbol width handled by the subgroup machinery.
pub const MAX_SUBGROUP_WIDTH: usize = 2;

const WORD: usize = 64;

/// A fixed-length vector over GF(2).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitVec {
    words: Vec<u64>,
    len: usize,
}

impl BitVec {
    pub fn zeros(len: usize) -> Self {
        BitVec {
            words: vec![0; len.div_ceil(WORD)],
            len,
        }
    }

    pub fn unit(len: usize, index: usize) -> Self {
        let mut v = BitVec::zeros(len);
        v.set(index, true);
        v
    }

    /// Builds a vector from 0/1 values; any nonzero byte counts as 1.
    pub fn from_bits(bits: &[u8]) -> Self {
        let mut v = BitVec::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b != 0 {
                v.set(i, true);
            }
        }
        v
    }

    /// Parses a string of `0`/`1` characters, leftmost character first.
    pub fn parse(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .filter(|c| !c.is_whitespace() && *c != '_')
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                other => Err(Error::param(format!("invalid bit character `{other}`"))),
            })
            .collect::<Result<Vec<u8>>>()?;
        Ok(BitVec::from_bits(&bits))
    }

    /// Unpacks the low `len` bits of `value`; bit 0 of the integer becomes index 0.
    pub fn from_u64(value: u64, len: usize) -> Self {
        assert!(len <= WORD, "from_u64 supports at most 64 bits");
        let mut v = BitVec::zeros(len);
        if len > 0 {
            let mask = if len == WORD { u64::MAX } else { (1 << len) - 1 };
            v.words[0] = value & mask;
        }
        v
    }

    /// Packs the vector into an integer (index 0 = least significant bit).
    pub fn to_u64(&self) -> u64 {
        assert!(self.len <= WORD, "to_u64 supports at most 64 bits");
        self.words.first().copied().unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        (self.words[i / WORD] >> (i % WORD)) & 1 == 1
    }

    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        let mask = 1u64 << (i % WORD);
        if value {
            self.words[i / WORD] |= mask;
        } else {
            self.words[i / WORD] &= !mask;
        }
    }

    pub fn flip(&mut self, i: usize) {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        self.words[i / WORD] ^= 1u64 << (i % WORD);
    }

    pub fn xor_assign(&mut self, other: &BitVec) {
        assert_eq!(self.len, other.len, "length mismatch in xor");
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn xor(&self, other: &BitVec) -> BitVec {
        let mut out = self.clone();
        out.xor_assign(other);
        out
    }

    /// Inner product over GF(2).
    pub fn dot(&self, other: &BitVec) -> bool {
        assert_eq!(self.len, other.len, "length mismatch in dot product");
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones())
            .sum::<u32>()
            % 2
            == 1
    }

    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Copies `width` bits starting at `start` into a new vector.
    pub fn slice(&self, start: usize, width: usize) -> BitVec {
        assert!(start + width <= self.len, "slice out of range");
        let mut out = BitVec::zeros(width);
        for i in 0..width {
            if self.get(start + i) {
                out.set(i, true);
            }
        }
        out
    }

    /// Reads `width <= 32` bits starting at `start` as a symbol value.
    pub fn symbol(&self, start: usize, width: usize) -> u32 {
        assert!(width <= 32);
        (0..width).fold(0u32, |acc, b| acc | ((self.get(start + b) as u32) << b))
    }

    /// Writes the low `width` bits of `value` starting at `start`.
    pub fn set_symbol(&mut self, start: usize, width: usize, value: u32) {
        for b in 0..width {
            self.set(start + b, (value >> b) & 1 == 1);
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    pub fn to_bits(&self) -> Vec<u8> {
        self.iter().map(u8::from).collect()
    }

    /// Hex rendering with index 0 as the most significant bit of the first
    /// digit; the tail is zero-padded to a whole digit.
    pub fn to_hex(&self) -> String {
        let digits = self.len.div_ceil(4);
        (0..digits)
            .map(|d| {
                let nib = (0..4).fold(0u32, |acc, b| {
                    let i = 4 * d + b;
                    let bit = i < self.len && self.get(i);
                    acc | ((bit as u32) << (3 - b))
                });
                char::from_digit(nib, 16).expect("nibble")
            })
            .collect()
    }

    pub fn from_hex(hex: &str, len: usize) -> Result<BitVec> {
        if hex.len() != len.div_ceil(4) {
            return Err(Error::DimensionMismatch {
                expected: len.div_ceil(4),
                found: hex.len(),
            });
        }
        let mut v = BitVec::zeros(len);
        for (d, c) in hex.chars().enumerate() {
            let nib = c
                .to_digit(16)
                .ok_or_else(|| Error::param(format!("invalid hex digit `{c}`")))?;
            for b in 0..4 {
                let i = 4 * d + b;
                let bit = (nib >> (3 - b)) & 1 == 1;
                if i < len {
                    v.set(i, bit);
                } else if bit {
                    return Err(Error::param("nonzero padding bits in hex row"));
                }
            }
        }
        Ok(v)
    }
}

impl fmt::Debug for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVec({self})")
    }
}

impl fmt::Display for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Number of coordinates in which `x` and `y` differ.
pub fn hamming_distance(x: &BitVec, y: &BitVec) -> Result<usize> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            found: y.len(),
        });
    }
    Ok(x.xor(y).weight())
}

/// A dense matrix over GF(2), stored by rows.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitMatrix {
    rows: Vec<BitVec>,
    cols: usize,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        BitMatrix {
            rows: vec![BitVec::zeros(cols); rows],
            cols,
        }
    }

    pub fn identity(n: usize) -> Self {
        BitMatrix {
            rows: (0..n).map(|i| BitVec::unit(n, i)).collect(),
            cols: n,
        }
    }

    pub fn from_rows(rows: Vec<BitVec>, cols: usize) -> Result<Self> {
        if let Some(bad) = rows.iter().find(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch {
                expected: cols,
                found: bad.len(),
            });
        }
        Ok(BitMatrix { rows, cols })
    }

    /// Parses rows given as `0`/`1` strings of equal length.
    pub fn parse_rows(rows: &[&str]) -> Result<Self> {
        let rows = rows
            .iter()
            .map(|r| BitVec::parse(r))
            .collect::<Result<Vec<_>>>()?;
        let cols = rows.first().map_or(0, BitVec::len);
        BitMatrix::from_rows(rows, cols)
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &BitVec {
        &self.rows[i]
    }

    pub fn rows(&self) -> &[BitVec] {
        &self.rows
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.rows[r].get(c)
    }

    pub fn set(&mut self, r: usize, c: usize, value: bool) {
        self.rows[r].set(c, value);
    }

    /// `x * self` for a row vector `x`.
    pub fn mul_left(&self, x: &BitVec) -> Result<BitVec> {
        if x.len() != self.nrows() {
            return Err(Error::DimensionMismatch {
                expected: self.nrows(),
                found: x.len(),
            });
        }
        let mut out = BitVec::zeros(self.cols);
        for (i, row) in self.rows.iter().enumerate() {
            if x.get(i) {
                out.xor_assign(row);
            }
        }
        Ok(out)
    }

    pub fn mul(&self, other: &BitMatrix) -> Result<BitMatrix> {
        let rows = self
            .rows
            .iter()
            .map(|r| other.mul_left(r))
            .collect::<Result<Vec<_>>>()?;
        Ok(BitMatrix {
            rows,
            cols: other.cols,
        })
    }

    pub fn transpose(&self) -> BitMatrix {
        let mut t = BitMatrix::zeros(self.cols, self.nrows());
        for (r, row) in self.rows.iter().enumerate() {
            for c in 0..self.cols {
                if row.get(c) {
                    t.set(c, r, true);
                }
            }
        }
        t
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &BitMatrix) -> BitMatrix {
        let (r1, c1, r2, c2) = (self.nrows(), self.cols, other.nrows(), other.cols);
        let mut out = BitMatrix::zeros(r1 * r2, c1 * c2);
        for i in 0..r1 {
            for j in 0..c1 {
                if !self.get(i, j) {
                    continue;
                }
                for k in 0..r2 {
                    for l in 0..c2 {
                        if other.get(k, l) {
                            out.set(i * r2 + k, j * c2 + l, true);
                        }
                    }
                }
            }
        }
        out
    }

    pub fn rank(&self) -> usize {
        row_echelon(self.rows.clone(), self.cols).len()
    }

    pub fn is_invertible(&self) -> bool {
        self.nrows() == self.cols && self.rank() == self.cols
    }

    /// Gauss-Jordan inverse.
    pub fn inverse(&self) -> Result<BitMatrix> {
        let n = self.nrows();
        if n != self.cols {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: self.cols,
            });
        }
        let mut a = self.rows.clone();
        let mut inv: Vec<BitVec> = (0..n).map(|i| BitVec::unit(n, i)).collect();
        for col in 0..n {
            let pivot = (col..n)
                .find(|&r| a[r].get(col))
                .ok_or(Error::SingularMatrix)?;
            a.swap(col, pivot);
            inv.swap(col, pivot);
            for r in 0..n {
                if r != col && a[r].get(col) {
                    let (pa, pi) = (a[col].clone(), inv[col].clone());
                    a[r].xor_assign(&pa);
                    inv[r].xor_assign(&pi);
                }
            }
        }
        Ok(BitMatrix { rows: inv, cols: n })
    }

    /// True when `x` lies in the row space of `self`.
    pub fn row_space_contains(&self, x: &BitVec) -> bool {
        let basis = row_echelon(self.rows.clone(), self.cols);
        reduce(&basis, x).is_zero()
    }
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BitMatrix {}x{} [", self.nrows(), self.cols)?;
        for r in &self.rows {
            writeln!(f, "  {r}")?;
        }
        write!(f, "]")
    }
}

/// A fully reduced echelon basis of the span of `rows`, pivots ascending.
fn row_echelon(mut rows: Vec<BitVec>, cols: usize) -> Vec<BitVec> {
    let mut basis: Vec<BitVec> = Vec::new();
    let mut pivots: Vec<usize> = Vec::new();
    for col in 0..cols {
        let Some(p) = rows.iter().position(|r| r.get(col)) else {
            continue;
        };
        let pivot = rows.swap_remove(p);
        for r in rows.iter_mut().filter(|r| r.get(col)) {
            r.xor_assign(&pivot);
        }
        for b in basis.iter_mut().filter(|b| b.get(col)) {
            b.xor_assign(&pivot);
        }
        basis.push(pivot);
        pivots.push(col);
    }
    basis
}

/// Reduces `x` against a reduced echelon basis.
fn reduce(basis: &[BitVec], x: &BitVec) -> BitVec {
    let mut x = x.clone();
    for b in basis {
        let lead = (0..b.len()).find(|&i| b.get(i)).expect("nonzero basis row");
        if x.get(lead) {
            x.xor_assign(b);
        }
    }
    x
}

/// An affine subspace `particular + span(kernel)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AffineSpace {
    pub particular: BitVec,
    pub kernel: Vec<BitVec>,
}

impl AffineSpace {
    pub fn ambient_dim(&self) -> usize {
        self.particular.len()
    }

    pub fn dim(&self) -> usize {
        self.kernel.len()
    }

    pub fn contains(&self, x: &BitVec) -> bool {
        if x.len() != self.ambient_dim() {
            return false;
        }
        let basis = row_echelon(self.kernel.clone(), self.ambient_dim());
        reduce(&basis, &x.xor(&self.particular)).is_zero()
    }

    /// Enumerates every element; only sensible for small dimensions.
    pub fn elements(&self) -> Vec<BitVec> {
        let d = self.dim();
        assert!(d < 24, "affine space too large to enumerate");
        (0u64..(1 << d))
            .map(|mask| {
                let mut x = self.particular.clone();
                for (j, k) in self.kernel.iter().enumerate() {
                    if (mask >> j) & 1 == 1 {
                        x.xor_assign(k);
                    }
                }
                x
            })
            .collect()
    }
}

/// Result of solving `xA = b`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolutionSet {
    Inconsistent,
    Affine(AffineSpace),
}

impl SolutionSet {
    pub fn as_affine(&self) -> Option<&AffineSpace> {
        match self {
            SolutionSet::Affine(a) => Some(a),
            SolutionSet::Inconsistent => None,
        }
    }
}

/// Solves `xA = b` for the row vector `x` (length `A.nrows()`).
pub fn solve_affine(a: &BitMatrix, b: &BitVec) -> Result<SolutionSet> {
    if b.len() != a.ncols() {
        return Err(Error::DimensionMismatch {
            expected: a.ncols(),
            found: b.len(),
        });
    }
    let unknowns = a.nrows();
    // One equation per column of A: coefficients then the right-hand side.
    let mut eqs: Vec<BitVec> = (0..a.ncols())
        .map(|c| {
            let mut e = BitVec::zeros(unknowns + 1);
            for r in 0..unknowns {
                if a.get(r, c) {
                    e.set(r, true);
                }
            }
            e.set(unknowns, b.get(c));
            e
        })
        .collect();

    let mut pivot_cols = Vec::new();
    let mut row = 0;
    for col in 0..unknowns {
        let Some(p) = (row..eqs.len()).find(|&r| eqs[r].get(col)) else {
            continue;
        };
        eqs.swap(row, p);
        let pivot = eqs[row].clone();
        for (r, e) in eqs.iter_mut().enumerate() {
            if r != row && e.get(col) {
                e.xor_assign(&pivot);
            }
        }
        pivot_cols.push(col);
        row += 1;
    }
    if eqs[row..].iter().any(|e| e.get(unknowns)) {
        return Ok(SolutionSet::Inconsistent);
    }

    let mut particular = BitVec::zeros(unknowns);
    for (r, &c) in pivot_cols.iter().enumerate() {
        particular.set(c, eqs[r].get(unknowns));
    }
    let kernel = (0..unknowns)
        .filter(|c| !pivot_cols.contains(c))
        .map(|free| {
            let mut k = BitVec::unit(unknowns, free);
            for (r, &c) in pivot_cols.iter().enumerate() {
                if eqs[r].get(free) {
                    k.set(c, true);
                }
            }
            k
        })
        .collect();
    Ok(SolutionSet::Affine(AffineSpace { particular, kernel }))
}

/// A subgroup of `(Z/2)^width`, stored as its membership set.
///
/// Elements are symbol values (bit 0 of the value is the first coordinate).
/// The membership mask is canonical, so equality and hashing are structural.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct Subgroup {
    width: usize,
    members: u16,
}

impl Subgroup {
    pub fn trivial(width: usize) -> Result<Self> {
        check_width(width)?;
        Ok(Subgroup { width, members: 1 })
    }

    pub fn full(width: usize) -> Result<Self> {
        check_width(width)?;
        Ok(Subgroup {
            width,
            members: ((1u32 << (1 << width)) - 1) as u16,
        })
    }

    /// The subgroup generated by the given symbol values.
    pub fn span(width: usize, generators: &[u32]) -> Result<Self> {
        check_width(width)?;
        let mut members: u16 = 1;
        for &g in generators {
            if g >= 1 << width {
                return Err(Error::param(format!(
                    "generator {g} outside (Z/2)^{width}"
                )));
            }
            let mut next = members;
            for x in 0..(1u32 << width) {
                if members >> x & 1 == 1 {
                    next |= 1 << (x ^ g);
                }
            }
            members = next;
        }
        Ok(Subgroup { width, members })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn order(&self) -> usize {
        self.members.count_ones() as usize
    }

    pub fn contains(&self, x: u32) -> bool {
        x < (1 << self.width) && self.members >> x & 1 == 1
    }

    pub fn is_trivial(&self) -> bool {
        self.members == 1
    }

    pub fn is_full(&self) -> bool {
        self.order() == 1 << self.width
    }

    pub fn elements(&self) -> Vec<u32> {
        (0..(1u32 << self.width))
            .filter(|&x| self.contains(x))
            .collect()
    }

    /// Reduced row-echelon basis (pivot on the leftmost coordinate first).
    pub fn basis(&self) -> Vec<BitVec> {
        let gens = self
            .elements()
            .into_iter()
            .map(|x| BitVec::from_u64(x as u64, self.width))
            .collect();
        row_echelon(gens, self.width)
    }

    /// Short label: `0` for the trivial group, `all` for the full group,
    /// otherwise the basis rows joined by `+`.
    pub fn label(&self) -> String {
        if self.is_trivial() {
            "0".to_string()
        } else if self.is_full() {
            "all".to_string()
        } else {
            self.basis()
                .iter()
                .map(|b| b.to_string())
                .collect::<Vec<_>>()
                .join("+")
        }
    }

    fn basis_key(&self) -> Vec<String> {
        self.basis().iter().map(|b| b.to_string()).collect()
    }
}

impl PartialOrd for Subgroup {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Subgroup {
    fn cmp(&self, other: &Self) -> Ordering {
        self.width
            .cmp(&other.width)
            .then(self.order().cmp(&other.order()))
            .then_with(|| self.basis_key().cmp(&other.basis_key()))
    }
}

fn check_width(width: usize) -> Result<()> {
    if width > MAX_SUBGROUP_WIDTH {
        Err(Error::UnsupportedWidth(width))
    } else {
        Ok(())
    }
}

/// All subgroups of `(Z/2)^width`, ordered by order then basis.
pub fn subgroups(width: usize) -> Result<Vec<Subgroup>> {
    check_width(width)?;
    let mut all: Vec<Subgroup> = Vec::new();
    let q = 1u32 << width;
    for a in 0..q {
        for b in 0..q {
            let s = Subgroup::span(width, &[a, b])?;
            if !all.contains(&s) {
                all.push(s);
            }
        }
    }
    all.sort();
    Ok(all)
}

/// `{x_range - x'_range : x, x' in sol}` as a subgroup of `(Z/2)^width`.
pub fn project_solution_subgroup(sol: &SolutionSet, start: usize, width: usize) -> Result<Subgroup> {
    check_width(width)?;
    let space = sol.as_affine().ok_or(Error::EmptySolution)?;
    if start + width > space.ambient_dim() {
        return Err(Error::DimensionMismatch {
            expected: space.ambient_dim(),
            found: start + width,
        });
    }
    let gens: Vec<u32> = space.kernel.iter().map(|k| k.symbol(start, width)).collect();
    Subgroup::span(width, &gens)
}
