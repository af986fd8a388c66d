//! Core domain types: block sizes, prediction modes, pixel blocks, and the
//! causal reference array shared by every predictor.
//!
//! The canonical reference-vector ordering used by all matrix code is:
//! index 0 = corner `r[-1,-1]`, indices `1..=2N` = top row `r[x,-1]`
//! left-to-right, indices `2N+1..=4N` = left column `r[-1,y]` top-to-bottom.

use crate::error::{Error, Result};
use crate::image::GrayImage;

/// Intra prediction mode index: 0 = planar, 1 = DC, 2..=34 = directional.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PredictionMode(u8);

impl PredictionMode {
    pub const PLANAR: PredictionMode = PredictionMode(0);
    pub const DC: PredictionMode = PredictionMode(1);
    pub const HORIZONTAL: PredictionMode = PredictionMode(10);
    pub const VERTICAL: PredictionMode = PredictionMode(26);

    pub fn new(index: u8) -> Result<Self> {
        if index <= 34 {
            Ok(PredictionMode(index))
        } else {
            Err(Error::InvalidMode(index))
        }
    }

    #[inline]
    pub fn index(self) -> u8 {
        self.0
    }

    #[inline]
    pub fn is_angular(self) -> bool {
        self.0 >= 2
    }

    /// All 35 modes in index order.
    pub fn all() -> impl Iterator<Item = PredictionMode> {
        (0..=34).map(PredictionMode)
    }
}

/// Square intra block size; HEVC luma intra PUs up to 32x32.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BlockSize {
    S4,
    S8,
    S16,
    S32,
}

impl BlockSize {
    pub const ALL: [BlockSize; 4] = [BlockSize::S4, BlockSize::S8, BlockSize::S16, BlockSize::S32];

    pub fn from_n(n: usize) -> Result<Self> {
        match n {
            4 => Ok(BlockSize::S4),
            8 => Ok(BlockSize::S8),
            16 => Ok(BlockSize::S16),
            32 => Ok(BlockSize::S32),
            other => Err(Error::InvalidBlockSize(other)),
        }
    }

    #[inline]
    pub fn n(self) -> usize {
        match self {
            BlockSize::S4 => 4,
            BlockSize::S8 => 8,
            BlockSize::S16 => 16,
            BlockSize::S32 => 32,
        }
    }

    #[inline]
    pub fn log2(self) -> u32 {
        match self {
            BlockSize::S4 => 2,
            BlockSize::S8 => 3,
            BlockSize::S16 => 4,
            BlockSize::S32 => 5,
        }
    }

    /// Length of the canonical reference vector, 4N+1.
    #[inline]
    pub fn ref_len(self) -> usize {
        4 * self.n() + 1
    }
}

/// The 4N+1 causal reference samples around an NxN block: the corner
/// `r[-1,-1]`, the row above extended to 2N (`r[x,-1]`), and the column to
/// the left extended to 2N (`r[-1,y]`).
///
/// Values are kept as `f64` so that filtered (real-valued) reference sets can
/// flow through the same predictors as raw integer samples.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceArray {
    n: BlockSize,
    bit_depth: u8,
    corner: f64,
    top: Vec<f64>,
    left: Vec<f64>,
    substituted: bool,
}

impl ReferenceArray {
    /// Builds a reference array, checking lengths and the sample range.
    pub fn new(
        n: BlockSize,
        bit_depth: u8,
        corner: f64,
        top: Vec<f64>,
        left: Vec<f64>,
    ) -> Result<Self> {
        check_bit_depth(bit_depth)?;
        if top.len() != 2 * n.n() || left.len() != 2 * n.n() {
            return Err(Error::BadReferenceLength {
                got: top.len().min(left.len()),
                expected: 2 * n.n(),
            });
        }
        let max = ((1u32 << bit_depth) - 1) as f64;
        for &v in std::iter::once(&corner).chain(&top).chain(&left) {
            if !v.is_finite() || v < 0.0 || v > max {
                return Err(Error::SampleOutOfRange {
                    value: v as u16,
                    bit_depth,
                });
            }
        }
        Ok(ReferenceArray {
            n,
            bit_depth,
            corner,
            top,
            left,
            substituted: false,
        })
    }

    /// Internal constructor for derived reference sets (filtered values may
    /// sit a rounding error outside the nominal range).
    pub(crate) fn from_parts_unchecked(
        n: BlockSize,
        bit_depth: u8,
        corner: f64,
        top: Vec<f64>,
        left: Vec<f64>,
        substituted: bool,
    ) -> Self {
        debug_assert_eq!(top.len(), 2 * n.n());
        debug_assert_eq!(left.len(), 2 * n.n());
        ReferenceArray {
            n,
            bit_depth,
            corner,
            top,
            left,
            substituted,
        }
    }

    #[inline]
    pub fn n(&self) -> BlockSize {
        self.n
    }

    #[inline]
    pub fn bit_depth(&self) -> u8 {
        self.bit_depth
    }

    #[inline]
    pub fn corner(&self) -> f64 {
        self.corner
    }

    #[inline]
    pub fn top(&self) -> &[f64] {
        &self.top
    }

    #[inline]
    pub fn left(&self) -> &[f64] {
        &self.left
    }

    /// True when any sample had to be filled by availability substitution.
    #[inline]
    pub fn substituted(&self) -> bool {
        self.substituted
    }

    /// Maximum representable sample value for this bit depth.
    #[inline]
    pub fn max_value(&self) -> f64 {
        ((1u32 << self.bit_depth) - 1) as f64
    }

    /// Flattens to the canonical 4N+1 vector: corner, top, left.
    pub fn to_canonical(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.n.ref_len());
        v.push(self.corner);
        v.extend_from_slice(&self.top);
        v.extend_from_slice(&self.left);
        v
    }

    /// Rebuilds a reference array from a canonical vector. Only the length is
    /// validated; callers probing linear maps may pass values outside the
    /// sample range.
    pub fn from_canonical(n: BlockSize, bit_depth: u8, values: &[f64]) -> Result<Self> {
        check_bit_depth(bit_depth)?;
        if values.len() != n.ref_len() {
            return Err(Error::BadReferenceLength {
                got: values.len(),
                expected: n.ref_len(),
            });
        }
        let two_n = 2 * n.n();
        Ok(ReferenceArray {
            n,
            bit_depth,
            corner: values[0],
            top: values[1..=two_n].to_vec(),
            left: values[two_n + 1..].to_vec(),
            substituted: false,
        })
    }

    /// Geometric contour: left column bottom-to-top, corner, top row
    /// left-to-right. This is the 1-D signal the smoothing filters run over.
    pub fn contour(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.n.ref_len());
        v.extend(self.left.iter().rev());
        v.push(self.corner);
        v.extend_from_slice(&self.top);
        v
    }

    pub(crate) fn from_contour(&self, contour: &[f64]) -> Self {
        let two_n = 2 * self.n.n();
        debug_assert_eq!(contour.len(), self.n.ref_len());
        let left: Vec<f64> = contour[..two_n].iter().rev().copied().collect();
        let corner = contour[two_n];
        let top = contour[two_n + 1..].to_vec();
        ReferenceArray {
            n: self.n,
            bit_depth: self.bit_depth,
            corner,
            top,
            left,
            substituted: self.substituted,
        }
    }

    /// Swaps the top and left sequences (corner unchanged). Used by the
    /// angular transpose-symmetry checks.
    pub fn transposed(&self) -> Self {
        ReferenceArray {
            n: self.n,
            bit_depth: self.bit_depth,
            corner: self.corner,
            top: self.left.clone(),
            left: self.top.clone(),
            substituted: self.substituted,
        }
    }
}

/// Canonical-vector index of the corner sample.
#[inline]
pub fn canonical_corner_index() -> usize {
    0
}

/// Canonical-vector index of top sample `r[x,-1]`.
#[inline]
pub fn canonical_top_index(x: usize) -> usize {
    1 + x
}

/// Canonical-vector index of left sample `r[-1,y]`.
#[inline]
pub fn canonical_left_index(n: BlockSize, y: usize) -> usize {
    2 * n.n() + 1 + y
}

/// An NxN block of original image samples with its position in the source.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockView {
    n: BlockSize,
    origin: (usize, usize),
    samples: Vec<u16>,
}

impl BlockView {
    pub fn new(n: BlockSize, origin: (usize, usize), samples: Vec<u16>) -> Result<Self> {
        if samples.len() != n.n() * n.n() {
            return Err(Error::BadReferenceLength {
                got: samples.len(),
                expected: n.n() * n.n(),
            });
        }
        Ok(BlockView { n, origin, samples })
    }

    #[inline]
    pub fn n(&self) -> BlockSize {
        self.n
    }

    #[inline]
    pub fn origin(&self) -> (usize, usize) {
        self.origin
    }

    /// Raster-order samples (index `y*N + x`).
    #[inline]
    pub fn samples(&self) -> &[u16] {
        &self.samples
    }

    #[inline]
    pub fn at(&self, x: usize, y: usize) -> u16 {
        self.samples[y * self.n.n() + x]
    }

    /// Raster-order samples as a real-valued vector.
    pub fn to_vector(&self) -> Vec<f64> {
        self.samples.iter().map(|&s| s as f64).collect()
    }
}

/// NxN real-valued predicted samples in raster order (index `y*N + x`).
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionBlock {
    n: BlockSize,
    values: Vec<f64>,
}

impl PredictionBlock {
    pub fn new(n: BlockSize, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), n.n() * n.n());
        PredictionBlock { n, values }
    }

    pub fn from_fn(n: BlockSize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let dim = n.n();
        let mut values = Vec::with_capacity(dim * dim);
        for y in 0..dim {
            for x in 0..dim {
                values.push(f(x, y));
            }
        }
        PredictionBlock { n, values }
    }

    #[inline]
    pub fn n(&self) -> BlockSize {
        self.n
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn at(&self, x: usize, y: usize) -> f64 {
        self.values[y * self.n.n() + x]
    }

    /// Rounds half away from zero and clips to the sample range. This is the
    /// single place real-valued predictions become integer pixels.
    pub fn finalize(&self, bit_depth: u8) -> Vec<u16> {
        let max = ((1u32 << bit_depth) - 1) as f64;
        self.values
            .iter()
            .map(|&v| v.round().clamp(0.0, max) as u16)
            .collect()
    }

    /// Sum of squared errors against original samples, computed on the
    /// rounded/clipped integer prediction.
    pub fn sse_int(&self, block: &BlockView, bit_depth: u8) -> u64 {
        let pred = self.finalize(bit_depth);
        pred.iter()
            .zip(block.samples())
            .map(|(&p, &o)| {
                let d = p as i64 - o as i64;
                (d * d) as u64
            })
            .sum()
    }
}

fn check_bit_depth(bit_depth: u8) -> Result<()> {
    if bit_depth == 8 || bit_depth == 10 {
        Ok(())
    } else {
        Err(Error::InvalidBitDepth(bit_depth))
    }
}

/// Cuts the NxN block at (x0, y0) out of an image together with its causal
/// reference array, extending references by HEVC-style availability
/// substitution (replicate the nearest available sample along the contour;
/// mid-gray when nothing is available).
///
/// References come from original image pixels: there is no reconstruction
/// loop here, so prediction quality is measured open-loop.
pub fn extract_block(
    image: &GrayImage,
    x0: usize,
    y0: usize,
    n: BlockSize,
) -> Result<(BlockView, ReferenceArray)> {
    let dim = n.n();
    if x0 + dim > image.width() || y0 + dim > image.height() {
        return Err(Error::BlockOutOfBounds {
            x0,
            y0,
            n: dim,
            width: image.width(),
            height: image.height(),
        });
    }

    let mut samples = Vec::with_capacity(dim * dim);
    for y in 0..dim {
        for x in 0..dim {
            samples.push(image.get(x0 + x, y0 + y));
        }
    }
    let block = BlockView::new(n, (x0, y0), samples)?;

    // Contour scan order: left column bottom-to-top, corner, top row
    // left-to-right. Each entry is Some(sample) when the source pixel exists.
    let two_n = 2 * dim;
    let mut scan: Vec<Option<f64>> = Vec::with_capacity(n.ref_len());
    for i in 0..two_n {
        let y = y0 + (two_n - 1 - i);
        scan.push(if x0 > 0 && y < image.height() {
            Some(image.get(x0 - 1, y) as f64)
        } else {
            None
        });
    }
    scan.push(if x0 > 0 && y0 > 0 {
        Some(image.get(x0 - 1, y0 - 1) as f64)
    } else {
        None
    });
    for i in 0..two_n {
        let x = x0 + i;
        scan.push(if y0 > 0 && x < image.width() {
            Some(image.get(x, y0 - 1) as f64)
        } else {
            None
        });
    }

    let substituted = scan.iter().any(Option::is_none);
    let default = (1u32 << (image.bit_depth() - 1)) as f64;
    let mut filled = Vec::with_capacity(scan.len());
    // Seed: the first available sample in scan order, or mid-gray.
    let mut last = scan
        .iter()
        .flatten()
        .next()
        .copied()
        .unwrap_or(default);
    for slot in &scan {
        if let Some(v) = slot {
            last = *v;
        }
        filled.push(last);
    }

    let left: Vec<f64> = filled[..two_n].iter().rev().copied().collect();
    let corner = filled[two_n];
    let top = filled[two_n + 1..].to_vec();
    let refs = ReferenceArray {
        n,
        bit_depth: image.bit_depth(),
        corner,
        top,
        left,
        substituted,
    };
    Ok((block, refs))
}
