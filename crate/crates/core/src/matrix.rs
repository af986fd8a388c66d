//! Dense linear predictors: N^2 x (4N+1) maps from the canonical reference
//! vector to raster-order predicted samples.

use nalgebra::DMatrix;

use crate::block::{BlockSize, PredictionMode};

/// Which predictor family a matrix realizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixKind {
    /// Least-squares optimum solved from trained statistics.
    Oracle,
    /// Position-dependent combination with some parameter set.
    Pdpc,
    /// Plain HEVC prediction (combination at its identity point).
    Hevc,
}

impl MatrixKind {
    pub fn to_u8(self) -> u8 {
        match self {
            MatrixKind::Oracle => 0,
            MatrixKind::Pdpc => 1,
            MatrixKind::Hevc => 2,
        }
    }

    pub fn from_u8(v: u8) -> Option<Self> {
        match v {
            0 => Some(MatrixKind::Oracle),
            1 => Some(MatrixKind::Pdpc),
            2 => Some(MatrixKind::Hevc),
            _ => None,
        }
    }
}

/// A linear predictor for one (mode, block size). Row `y*N + x` holds the
/// weights of pixel (x, y); columns follow the canonical reference ordering
/// (corner, top left-to-right, left top-to-bottom).
#[derive(Debug, Clone, PartialEq)]
pub struct PredictorMatrix {
    n: BlockSize,
    mode: PredictionMode,
    kind: MatrixKind,
    entries: DMatrix<f64>,
}

impl PredictorMatrix {
    pub fn new(
        n: BlockSize,
        mode: PredictionMode,
        kind: MatrixKind,
        entries: DMatrix<f64>,
    ) -> Self {
        debug_assert_eq!(entries.nrows(), n.n() * n.n());
        debug_assert_eq!(entries.ncols(), n.ref_len());
        PredictorMatrix {
            n,
            mode,
            kind,
            entries,
        }
    }

    #[inline]
    pub fn n(&self) -> BlockSize {
        self.n
    }

    #[inline]
    pub fn mode(&self) -> PredictionMode {
        self.mode
    }

    #[inline]
    pub fn kind(&self) -> MatrixKind {
        self.kind
    }

    #[inline]
    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    /// Weight of reference `j` for pixel (x, y).
    #[inline]
    pub fn weight(&self, x: usize, y: usize, j: usize) -> f64 {
        self.entries[(y * self.n.n() + x, j)]
    }

    /// Applies the predictor to a canonical reference vector.
    pub fn apply(&self, refs: &[f64]) -> Vec<f64> {
        debug_assert_eq!(refs.len(), self.n.ref_len());
        let v = nalgebra::DVector::from_column_slice(refs);
        (&self.entries * v).iter().copied().collect()
    }

    /// Row-major copy of the entries, as stored in the matrix file format.
    pub fn entries_row_major(&self) -> Vec<f64> {
        let (rows, cols) = self.entries.shape();
        let mut out = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                out.push(self.entries[(r, c)]);
            }
        }
        out
    }

    pub fn from_row_major(
        n: BlockSize,
        mode: PredictionMode,
        kind: MatrixKind,
        data: &[f64],
    ) -> Self {
        let rows = n.n() * n.n();
        let cols = n.ref_len();
        debug_assert_eq!(data.len(), rows * cols);
        PredictorMatrix::new(n, mode, kind, DMatrix::from_row_slice(rows, cols, data))
    }
}
