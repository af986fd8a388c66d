//! HEVC intra predictors: planar, DC, and the 33 angular modes, plus the
//! mode/size-dependent [1 2 1] reference smoothing and the DC/H/V boundary
//! filters (H.265 8.4.4.2.3 - 8.4.4.2.6).
//!
//! Every predictor is evaluated per pixel so blocks can be filled in any
//! order, and each supports two arithmetic modes: `Rounding::Hevc`
//! reproduces the standard's integer shifts bit-exactly, `Rounding::Exact`
//! replaces them with real division so the predictor is a linear map of the
//! reference vector (position-dependent combination is built on that form).

use crate::block::{BlockSize, PredictionBlock, PredictionMode, ReferenceArray};
use crate::error::{Error, Result};

/// Arithmetic used inside the predictors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rounding {
    /// Integer-faithful: rounding offsets and floor shifts as in H.265.
    Hevc,
    /// Real-valued: no rounding, no clipping; linear in the references.
    Exact,
}

/// Which of HEVC's reference/prediction filters are active.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SmoothingPolicy {
    /// Apply the [1 2 1] reference filter per the mode/size decision table.
    pub enabled: bool,
    /// Apply the DC edge filter and the mode 10/26 boundary filters.
    pub edge_filters: bool,
}

impl SmoothingPolicy {
    /// HEVC luma defaults: smoothing and boundary filters on.
    pub fn hevc() -> Self {
        SmoothingPolicy {
            enabled: true,
            edge_filters: true,
        }
    }

    pub fn off() -> Self {
        SmoothingPolicy {
            enabled: false,
            edge_filters: false,
        }
    }
}

impl Default for SmoothingPolicy {
    fn default() -> Self {
        SmoothingPolicy::hevc()
    }
}

/// intraPredAngle for modes 2..=34 (H.265 Table 8-4). Index 0 and 1 are
/// placeholders for planar and DC.
pub static INTRA_PRED_ANGLE: [i32; 35] = [
    0, 0, // planar, DC
    32, 26, 21, 17, 13, 9, 5, 2, // modes 2-9
    0, // mode 10 (horizontal)
    -2, -5, -9, -13, -17, -21, -26, // modes 11-17
    -32, // mode 18
    -26, -21, -17, -13, -9, -5, -2, // modes 19-25
    0, // mode 26 (vertical)
    2, 5, 9, 13, 17, 21, 26, // modes 27-33
    32, // mode 34
];

/// invAngle = round(8192 / intraPredAngle) for the negative-angle modes
/// 11..=25 (H.265 Table 8-5).
pub static INV_ANGLE: [i32; 15] = [
    -4096, -1638, -910, -630, -482, -390, -315, // modes 11-17
    -256, // mode 18
    -315, -390, -482, -630, -910, -1638, -4096, // modes 19-25
];

#[inline]
fn inv_angle(mode: PredictionMode) -> i32 {
    let m = mode.index();
    debug_assert!((11..=25).contains(&m));
    INV_ANGLE[(m - 11) as usize]
}

/// True when HEVC filters the references for this mode/size
/// (H.265 8.4.4.2.3, intraHorVerDistThres): never for 4x4, DC, or the pure
/// horizontal/vertical modes; otherwise when the mode is far enough from
/// both of those directions for the block size.
pub fn smoothing_decision(mode: PredictionMode, n: BlockSize) -> bool {
    let m = mode.index() as i32;
    if n == BlockSize::S4 || m == 1 || m == 10 || m == 26 {
        return false;
    }
    let min_dist = (m - 26).abs().min((m - 10).abs());
    let threshold = match n {
        BlockSize::S4 => return false,
        BlockSize::S8 => 7,
        BlockSize::S16 => 1,
        BlockSize::S32 => 0,
    };
    min_dist > threshold
}

/// [1 2 1]/4 filter along the reference contour, integer arithmetic as in
/// H.265 8.4.4.2.3. The two contour endpoints are left unchanged.
pub fn smooth_refs_121(refs: &ReferenceArray) -> ReferenceArray {
    let contour = refs.contour();
    let mut out = contour.clone();
    for i in 1..contour.len() - 1 {
        out[i] = ((contour[i - 1] + 2.0 * contour[i] + contour[i + 1] + 2.0) / 4.0).floor();
    }
    refs.from_contour(&out)
}

#[inline]
fn div_floor(v: f64, d: f64, rounding: Rounding, offset: f64) -> f64 {
    match rounding {
        Rounding::Hevc => ((v + offset) / d).floor(),
        Rounding::Exact => v / d,
    }
}

/// Extended main reference line for one angular mode, indices -N..=2N with
/// index 0 at the corner (H.265 8.4.4.2.6).
pub(crate) struct AngularRefs {
    main: Vec<f64>,
    n: usize,
    angle: i32,
    vertical: bool,
}

impl AngularRefs {
    pub(crate) fn build(refs: &ReferenceArray, mode: PredictionMode) -> Self {
        debug_assert!(mode.is_angular());
        let n = refs.n().n();
        let vertical = mode.index() >= 18;
        let angle = INTRA_PRED_ANGLE[mode.index() as usize];
        let (primary, secondary) = if vertical {
            (refs.top(), refs.left())
        } else {
            (refs.left(), refs.top())
        };

        // main[offset + i] holds index i; index 0 is the corner.
        let offset = n;
        let mut main = vec![0.0; 3 * n + 1];
        main[offset] = refs.corner();
        for i in 1..=2 * n {
            main[offset + i] = primary[i - 1];
        }
        if angle < 0 {
            let ext = ((n as i32) * angle) >> 5;
            if ext < -1 {
                let inv = inv_angle(mode);
                for i in ext..=-1 {
                    let j = ((i * inv + 128) >> 8) as usize;
                    debug_assert!(j >= 1 && j <= 2 * n);
                    main[(offset as i32 + i) as usize] = secondary[j - 1];
                }
            }
        }
        AngularRefs {
            main,
            n,
            angle,
            vertical,
        }
    }

    #[inline]
    fn main(&self, i: i32) -> f64 {
        self.main[(self.n as i32 + i) as usize]
    }

    /// One predicted pixel: project (x, y) onto the main reference line with
    /// 1/32-pel precision and interpolate between the two nearest samples.
    pub(crate) fn pixel(&self, x: usize, y: usize, rounding: Rounding) -> f64 {
        let (along, away) = if self.vertical { (x, y) } else { (y, x) };
        let t = (away as i32 + 1) * self.angle;
        let idx = t >> 5;
        let frac = t & 31;
        let base = self.main(along as i32 + idx + 1);
        if frac == 0 {
            base
        } else {
            let next = self.main(along as i32 + idx + 2);
            let acc = (32 - frac) as f64 * base + frac as f64 * next;
            div_floor(acc, 32.0, rounding, 16.0)
        }
    }
}

enum Kernel {
    Planar,
    Dc { dc: f64, edge: bool },
    Angular(AngularRefs),
}

/// Per-pixel prediction engine over one reference array. Owns its data so
/// derived (filtered) reference sets can be embedded in larger evaluators.
pub(crate) struct Predictor {
    refs: ReferenceArray,
    rounding: Rounding,
    /// Mode 10/26 boundary correction, resolved against block size.
    boundary: Option<PredictionMode>,
    kernel: Kernel,
}

impl Predictor {
    pub(crate) fn new(
        refs: &ReferenceArray,
        mode: PredictionMode,
        edge_filters: bool,
        rounding: Rounding,
    ) -> Self {
        let n = refs.n().n();
        let small = n < 32;
        let kernel = match mode.index() {
            0 => Kernel::Planar,
            1 => Kernel::Dc {
                dc: dc_value(refs, rounding),
                edge: edge_filters && small,
            },
            _ => Kernel::Angular(AngularRefs::build(refs, mode)),
        };
        let boundary = (edge_filters
            && small
            && (mode == PredictionMode::HORIZONTAL || mode == PredictionMode::VERTICAL))
            .then_some(mode);
        Predictor {
            refs: refs.clone(),
            rounding,
            boundary,
            kernel,
        }
    }

    #[inline]
    fn clip(&self, v: f64) -> f64 {
        match self.rounding {
            Rounding::Hevc => v.clamp(0.0, self.refs.max_value()),
            Rounding::Exact => v,
        }
    }

    pub(crate) fn pixel(&self, x: usize, y: usize) -> f64 {
        let refs = &self.refs;
        let n = refs.n().n();
        // Boundary filters correct the first column/row by half the
        // reference gradient, clipped to the sample range in integer mode.
        match self.boundary {
            Some(PredictionMode::VERTICAL) if x == 0 => {
                let grad = div_floor(refs.left()[y] - refs.corner(), 2.0, self.rounding, 0.0);
                return self.clip(refs.top()[0] + grad);
            }
            Some(PredictionMode::HORIZONTAL) if y == 0 => {
                let grad = div_floor(refs.top()[x] - refs.corner(), 2.0, self.rounding, 0.0);
                return self.clip(refs.left()[0] + grad);
            }
            _ => {}
        }
        match &self.kernel {
            Kernel::Planar => {
                let acc = (n - 1 - x) as f64 * refs.left()[y]
                    + (x + 1) as f64 * refs.top()[n]
                    + (n - 1 - y) as f64 * refs.top()[x]
                    + (y + 1) as f64 * refs.left()[n];
                div_floor(acc, (2 * n) as f64, self.rounding, n as f64)
            }
            Kernel::Dc { dc, edge } => {
                if !edge {
                    *dc
                } else if x == 0 && y == 0 {
                    div_floor(
                        refs.left()[0] + 2.0 * dc + refs.top()[0],
                        4.0,
                        self.rounding,
                        2.0,
                    )
                } else if y == 0 {
                    div_floor(refs.top()[x] + 3.0 * dc, 4.0, self.rounding, 2.0)
                } else if x == 0 {
                    div_floor(refs.left()[y] + 3.0 * dc, 4.0, self.rounding, 2.0)
                } else {
                    *dc
                }
            }
            Kernel::Angular(ar) => ar.pixel(x, y, self.rounding),
        }
    }

    pub(crate) fn block(&self) -> PredictionBlock {
        PredictionBlock::from_fn(self.refs.n(), |x, y| self.pixel(x, y))
    }
}

fn dc_value(refs: &ReferenceArray, rounding: Rounding) -> f64 {
    let n = refs.n().n();
    let mut acc = 0.0;
    for x in 0..n {
        acc += refs.top()[x];
    }
    for y in 0..n {
        acc += refs.left()[y];
    }
    div_floor(acc, (2 * n) as f64, rounding, n as f64)
}

/// Planar prediction (H.265 8.4.4.2.4).
pub fn predict_planar(refs: &ReferenceArray, rounding: Rounding) -> PredictionBlock {
    Predictor::new(refs, PredictionMode::PLANAR, false, rounding).block()
}

/// DC prediction (H.265 8.4.4.2.5); `edge_filters` enables the boundary
/// blend, which HEVC applies only below 32x32.
pub fn predict_dc(refs: &ReferenceArray, edge_filters: bool, rounding: Rounding) -> PredictionBlock {
    Predictor::new(refs, PredictionMode::DC, edge_filters, rounding).block()
}

/// Angular prediction for modes 2..=34 (H.265 8.4.4.2.6), without the
/// horizontal/vertical boundary correction.
pub fn predict_angular(
    refs: &ReferenceArray,
    mode: PredictionMode,
    rounding: Rounding,
) -> Result<PredictionBlock> {
    if !mode.is_angular() {
        return Err(Error::NotAngular(mode.index()));
    }
    Ok(Predictor::new(refs, mode, false, rounding).block())
}

/// Full HEVC prediction: reference smoothing per the decision table, then
/// the mode's predictor, then the boundary filters where the policy asks.
pub fn predict_hevc(
    refs: &ReferenceArray,
    mode: PredictionMode,
    policy: SmoothingPolicy,
    rounding: Rounding,
) -> PredictionBlock {
    hevc_predictor(refs, mode, policy, rounding).block()
}

pub(crate) fn hevc_predictor(
    refs: &ReferenceArray,
    mode: PredictionMode,
    policy: SmoothingPolicy,
    rounding: Rounding,
) -> Predictor {
    if policy.enabled && smoothing_decision(mode, refs.n()) {
        let smoothed = smooth_refs_121(refs);
        Predictor::new(&smoothed, mode, policy.edge_filters, rounding)
    } else {
        Predictor::new(refs, mode, policy.edge_filters, rounding)
    }
}
