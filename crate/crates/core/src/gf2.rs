//! Vectors and subspaces of F₂^m, characters, the Walsh–Hadamard transform
//! and folding of tables over a subspace.
//!
//! A vector of width `m` is packed into the low `m` bits of a `u32`:
//! coordinate `i` (0-based) lives in bit `i`. Tables over F₂^m are indexed by
//! that packed integer, so `table[x]` is the value at the vector whose bits
//! are `x`.

use std::fmt;
use std::ops::Add;

use thiserror::Error;

/// Largest supported vector width.
pub const MAX_VECTOR_WIDTH: usize = 30;
/// Largest width for which full 2^m tables are materialised.
pub const MAX_TABLE_WIDTH: usize = 24;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Gf2Error {
    #[error("width {width} outside 1..={max}")]
    Width { width: usize, max: usize },
    #[error("width mismatch: {0} vs {1}")]
    WidthMismatch(usize, usize),
    #[error("bits {bits:#x} do not fit in width {width}")]
    BitsOutOfRange { bits: u32, width: usize },
    #[error("table has {len} entries, expected 2^{width}")]
    TableLength { len: usize, width: usize },
    #[error("non-finite table entry at index {0}")]
    NonFinite(usize),
    #[error("folded table has {got} entries, expected {expected} (one per coset)")]
    RepKeyMismatch { got: usize, expected: usize },
    #[error("table is not constant on cosets: value at {x:#b} differs from value at {y:#b}")]
    Inconsistent { x: u32, y: u32 },
}

fn check_width(width: usize, max: usize) -> Result<(), Gf2Error> {
    if width == 0 || width > max {
        return Err(Gf2Error::Width { width, max });
    }
    Ok(())
}

#[inline]
fn mask(width: usize) -> u32 {
    if width >= 32 {
        u32::MAX
    } else {
        (1u32 << width) - 1
    }
}

/// Parity of `a & b`: the F₂ inner product of two packed vectors.
#[inline]
pub fn dot_bits(a: u32, b: u32) -> u8 {
    ((a & b).count_ones() & 1) as u8
}

/// χ_α(x) = (−1)^{α·x}.
#[inline]
pub fn character(alpha: u32, x: u32) -> f64 {
    if dot_bits(alpha, x) == 0 {
        1.0
    } else {
        -1.0
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Gf2Vector {
    width: u8,
    bits: u32,
}

impl Gf2Vector {
    pub fn new(width: usize, bits: u32) -> Result<Self, Gf2Error> {
        check_width(width, MAX_VECTOR_WIDTH)?;
        if bits & !mask(width) != 0 {
            return Err(Gf2Error::BitsOutOfRange { bits, width });
        }
        Ok(Self {
            width: width as u8,
            bits,
        })
    }

    pub fn zero(width: usize) -> Result<Self, Gf2Error> {
        Self::new(width, 0)
    }

    /// Standard basis vector e_i (0-based `i`).
    pub fn unit(width: usize, i: usize) -> Result<Self, Gf2Error> {
        if i >= width {
            return Err(Gf2Error::BitsOutOfRange {
                bits: 1u32.checked_shl(i as u32).unwrap_or(0),
                width,
            });
        }
        Self::new(width, 1 << i)
    }

    /// Build from explicit coordinates, each 0 or 1 (anything nonzero counts as 1).
    pub fn from_coords(coords: &[u8]) -> Result<Self, Gf2Error> {
        let bits = coords.iter().enumerate().fold(
            0u32,
            |acc, (i, &c)| if c != 0 { acc | (1 << i) } else { acc },
        );
        Self::new(coords.len(), bits)
    }

    pub fn width(&self) -> usize {
        self.width as usize
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn coord(&self, i: usize) -> u8 {
        ((self.bits >> i) & 1) as u8
    }

    pub fn coords(&self) -> Vec<u8> {
        (0..self.width()).map(|i| self.coord(i)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.bits == 0
    }

    pub fn weight(&self) -> u32 {
        self.bits.count_ones()
    }

    pub fn dot(&self, other: &Gf2Vector) -> Result<u8, Gf2Error> {
        if self.width != other.width {
            return Err(Gf2Error::WidthMismatch(self.width(), other.width()));
        }
        Ok(dot_bits(self.bits, other.bits))
    }

    pub fn checked_add(&self, other: &Gf2Vector) -> Result<Gf2Vector, Gf2Error> {
        if self.width != other.width {
            return Err(Gf2Error::WidthMismatch(self.width(), other.width()));
        }
        Ok(Gf2Vector {
            width: self.width,
            bits: self.bits ^ other.bits,
        })
    }

    /// Bit string with coordinate `m-1` first (big-endian in the packed integer).
    pub fn to_bit_string(&self) -> String {
        bit_string(self.bits, self.width())
    }
}

impl Add for Gf2Vector {
    type Output = Gf2Vector;

    fn add(self, rhs: Gf2Vector) -> Gf2Vector {
        assert_eq!(self.width, rhs.width, "adding vectors of different widths");
        Gf2Vector {
            width: self.width,
            bits: self.bits ^ rhs.bits,
        }
    }
}

impl fmt::Debug for Gf2Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Gf2Vector({})", self.to_bit_string())
    }
}

pub(crate) fn bit_string(bits: u32, width: usize) -> String {
    (0..width)
        .rev()
        .map(|i| if (bits >> i) & 1 == 1 { '1' } else { '0' })
        .collect()
}

/// A subspace H ≤ F₂^m held as a fully reduced echelon basis.
///
/// Each basis vector has a distinct pivot (its highest set bit) and no other
/// basis vector has that bit set. Reducing any `x` against the basis clears
/// all pivot bits and yields the numerically smallest member of `x + H`, which
/// serves as the canonical coset representative. Representatives are exactly
/// the vectors with zeros on the pivot positions, so the free (non-pivot)
/// bits give a dense index `0..2^{m-r}` over cosets.
#[derive(Clone, PartialEq, Eq)]
pub struct Gf2Subspace {
    width: u8,
    basis: Vec<u32>,
    pivot_mask: u32,
}

impl fmt::Debug for Gf2Subspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let basis: Vec<String> = self
            .basis
            .iter()
            .map(|&b| bit_string(b, self.width()))
            .collect();
        f.debug_struct("Gf2Subspace")
            .field("width", &self.width)
            .field("basis", &basis)
            .finish()
    }
}

impl Gf2Subspace {
    /// Span of `vectors` inside F₂^width. The list may be empty or dependent.
    pub fn span(width: usize, vectors: &[Gf2Vector]) -> Result<Self, Gf2Error> {
        check_width(width, MAX_VECTOR_WIDTH)?;
        let mut basis: Vec<u32> = Vec::new();
        for v in vectors {
            if v.width() != width {
                return Err(Gf2Error::WidthMismatch(width, v.width()));
            }
            let mut x = v.bits;
            for &b in &basis {
                let pivot = 31 - b.leading_zeros();
                if (x >> pivot) & 1 == 1 {
                    x ^= b;
                }
            }
            if x != 0 {
                let pivot = 31 - x.leading_zeros();
                for b in basis.iter_mut() {
                    if (*b >> pivot) & 1 == 1 {
                        *b ^= x;
                    }
                }
                basis.push(x);
            }
        }
        basis.sort_unstable_by(|a, b| b.cmp(a));
        let pivot_mask = basis
            .iter()
            .fold(0u32, |acc, &b| acc | (1 << (31 - b.leading_zeros())));
        Ok(Self {
            width: width as u8,
            basis,
            pivot_mask,
        })
    }

    pub fn trivial(width: usize) -> Result<Self, Gf2Error> {
        Self::span(width, &[])
    }

    pub fn full(width: usize) -> Result<Self, Gf2Error> {
        let units: Vec<Gf2Vector> = (0..width)
            .map(|i| Gf2Vector::unit(width, i))
            .collect::<Result<_, _>>()?;
        Self::span(width, &units)
    }

    pub fn width(&self) -> usize {
        self.width as usize
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> Vec<Gf2Vector> {
        self.basis
            .iter()
            .map(|&bits| Gf2Vector {
                width: self.width,
                bits,
            })
            .collect()
    }

    pub fn basis_bits(&self) -> &[u32] {
        &self.basis
    }

    /// Canonical (numerically smallest) representative of `x + H`.
    pub fn reduce(&self, mut x: u32) -> u32 {
        for &b in &self.basis {
            let pivot = 31 - b.leading_zeros();
            if (x >> pivot) & 1 == 1 {
                x ^= b;
            }
        }
        x
    }

    pub fn contains(&self, v: &Gf2Vector) -> bool {
        v.width == self.width && self.reduce(v.bits) == 0
    }

    pub fn num_cosets(&self) -> usize {
        1usize << (self.width() - self.dim())
    }

    /// Dense coset index of `x`, in `0..num_cosets()`.
    pub fn coset_index(&self, x: u32) -> usize {
        let rep = self.reduce(x);
        let mut idx = 0usize;
        let mut out = 0;
        for i in 0..self.width() {
            if (self.pivot_mask >> i) & 1 == 0 {
                if (rep >> i) & 1 == 1 {
                    idx |= 1 << out;
                }
                out += 1;
            }
        }
        idx
    }

    /// Canonical representative with dense index `index`.
    pub fn coset_rep(&self, index: usize) -> u32 {
        let mut rep = 0u32;
        let mut src = 0;
        for i in 0..self.width() {
            if (self.pivot_mask >> i) & 1 == 0 {
                if (index >> src) & 1 == 1 {
                    rep |= 1 << i;
                }
                src += 1;
            }
        }
        rep
    }

    /// All canonical representatives in dense-index order.
    pub fn coset_reps(&self) -> Vec<u32> {
        (0..self.num_cosets()).map(|i| self.coset_rep(i)).collect()
    }

    /// Whether α·y = 0 for every y in H.
    pub fn is_orthogonal(&self, alpha: u32) -> bool {
        self.basis.iter().all(|&b| dot_bits(alpha, b) == 0)
    }
}

/// Real-valued function on F₂^m stored as its full table.
#[derive(Clone, Debug, PartialEq)]
pub struct RealTable {
    width: usize,
    values: Vec<f64>,
}

impl RealTable {
    pub fn new(width: usize, values: Vec<f64>) -> Result<Self, Gf2Error> {
        check_width(width, MAX_TABLE_WIDTH)?;
        if values.len() != 1usize << width {
            return Err(Gf2Error::TableLength {
                len: values.len(),
                width,
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Gf2Error::NonFinite(i));
        }
        Ok(Self { width, values })
    }

    pub fn from_fn(width: usize, f: impl FnMut(u32) -> f64) -> Result<Self, Gf2Error> {
        check_width(width, MAX_TABLE_WIDTH)?;
        Self::new(width, (0..1u32 << width).map(f).collect())
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, x: u32) -> f64 {
        self.values[x as usize]
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn mean_square(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>() / self.values.len() as f64
    }
}

/// Fourier coefficients Â_α = E_x[A(x) χ_α(x)], indexed by packed α.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierSpectrum {
    width: usize,
    coeffs: Vec<f64>,
}

impl FourierSpectrum {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeff(&self, alpha: u32) -> f64 {
        self.coeffs[alpha as usize]
    }

    /// Σ_α Â_α².
    pub fn energy(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum()
    }

    /// CSV with header `alpha,coeff`; α is written as a bit string of
    /// length m, coordinate m-1 first.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.coeffs.len() * (self.width + 24));
        out.push_str("alpha,coeff\n");
        for (alpha, c) in self.coeffs.iter().enumerate() {
            out.push_str(&bit_string(alpha as u32, self.width));
            out.push(',');
            out.push_str(&c.to_string());
            out.push('\n');
        }
        out
    }
}

/// Unnormalised in-place Walsh–Hadamard butterfly: out[α] = Σ_x in[x] χ_α(x).
pub fn fwht_in_place(data: &mut [f64]) {
    let n = data.len();
    debug_assert!(n.is_power_of_two());
    let mut h = 1;
    while h < n {
        for block in data.chunks_exact_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a, *b);
                *a = x + y;
                *b = x - y;
            }
        }
        h *= 2;
    }
}

pub fn fourier_transform(table: &RealTable) -> FourierSpectrum {
    let mut coeffs = table.values.clone();
    fwht_in_place(&mut coeffs);
    let scale = 1.0 / coeffs.len() as f64;
    coeffs.iter_mut().for_each(|c| *c *= scale);
    FourierSpectrum {
        width: table.width,
        coeffs,
    }
}

pub fn inverse_fourier(spectrum: &FourierSpectrum) -> RealTable {
    let mut values = spectrum.coeffs.clone();
    fwht_in_place(&mut values);
    RealTable {
        width: spectrum.width,
        values,
    }
}

/// Expand a coset-keyed table (one value per canonical representative, in
/// dense-index order) to the full table over F₂^m.
pub fn unfold(folded: &[f64], h: &Gf2Subspace) -> Result<RealTable, Gf2Error> {
    if folded.len() != h.num_cosets() {
        return Err(Gf2Error::RepKeyMismatch {
            got: folded.len(),
            expected: h.num_cosets(),
        });
    }
    RealTable::from_fn(h.width(), |x| folded[h.coset_index(x)])
}

/// Inverse of [`unfold`]; rejects tables that are not constant on cosets of `h`.
pub fn fold(table: &RealTable, h: &Gf2Subspace) -> Result<Vec<f64>, Gf2Error> {
    if table.width() != h.width() {
        return Err(Gf2Error::WidthMismatch(table.width(), h.width()));
    }
    for &b in h.basis_bits() {
        for x in 0..(1u32 << table.width()) {
            let y = x ^ b;
            if table.get(x) != table.get(y) {
                return Err(Gf2Error::Inconsistent { x, y });
            }
        }
    }
    Ok(h.coset_reps().iter().map(|&rep| table.get(rep)).collect())
}
