//! Position-dependent prediction combination: blend predictions from
//! unfiltered and binomial-filtered references with weights that decay
//! exponentially away from the block's top and left edges.
//!
//! Two algebraically equivalent forms are provided. The full form mixes the
//! near-edge reference terms with both the unfiltered-reference prediction
//! (weighted by `t[x,y]`) and the filtered-reference prediction. The
//! shortcut form folds everything onto the filtered-reference prediction
//! alone and is the default experimental path. Both are linear in the
//! reference vector, so each parameter set induces a dense predictor matrix
//! that can be realized explicitly for training and visualization.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::DMatrix;

use crate::block::{BlockSize, PredictionBlock, PredictionMode, ReferenceArray};
use crate::error::{Error, Result};
use crate::intra::{hevc_predictor, Predictor, Rounding, SmoothingPolicy};
use crate::matrix::{MatrixKind, PredictorMatrix};

/// One parameter set for the combination: near-edge coefficients, decay
/// denominators, and the reference-filter blend (weight `a`, binomial order
/// `k`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PdpcParams {
    pub c1v: f64,
    pub c2v: f64,
    pub c1h: f64,
    pub c2h: f64,
    pub dv: u8,
    pub dh: u8,
    /// Blend weight of the raw references in `s = a*r + (1-a)*(h_k * r)`.
    pub a: f64,
    /// Binomial filter order, even, 2..=8.
    pub k: u32,
}

impl PdpcParams {
    /// Combination disabled: zero near-edge terms and untouched references.
    pub fn identity(n: BlockSize) -> Self {
        let d = size_rule(n);
        PdpcParams {
            c1v: 0.0,
            c2v: 0.0,
            c1h: 0.0,
            c2h: 0.0,
            dv: d,
            dh: d,
            a: 1.0,
            k: 2,
        }
    }

    pub fn is_identity(&self) -> bool {
        self.c1v == 0.0 && self.c2v == 0.0 && self.c1h == 0.0 && self.c2h == 0.0 && self.a == 1.0
    }

    pub fn validate(&self) -> Result<()> {
        for c in [self.c1v, self.c2v, self.c1h, self.c2h] {
            if !c.is_finite() || c.abs() > 1.0 {
                return Err(Error::NonLatticeCoefficient(c));
            }
        }
        for d in [self.dv, self.dh] {
            if d != 1 && d != 2 {
                return Err(Error::InvalidBlockSize(d as usize));
            }
        }
        if !(0.0..=1.0).contains(&self.a) {
            return Err(Error::InvalidBlendWeight(self.a));
        }
        binomial_kernel(self.k).map(|_| ())
    }
}

/// Decay denominator shared by both directions: 1 up to 16x16, 2 at 32x32.
pub fn size_rule(n: BlockSize) -> u8 {
    match n {
        BlockSize::S4 | BlockSize::S8 | BlockSize::S16 => 1,
        BlockSize::S32 => 2,
    }
}

/// Normalized binomial filter taps: the k+1 coefficients of (1+z)^k over 2^k.
pub fn binomial_kernel(k: u32) -> Result<Vec<f64>> {
    if k % 2 != 0 || !(2..=8).contains(&k) {
        return Err(Error::InvalidKernelOrder(k));
    }
    let mut row = vec![1u64];
    for _ in 0..k {
        let mut next = vec![1u64];
        for w in row.windows(2) {
            next.push(w[0] + w[1]);
        }
        next.push(1);
        row = next;
    }
    let scale = (1u64 << k) as f64;
    Ok(row.into_iter().map(|c| c as f64 / scale).collect())
}

/// Filtered reference set `s = a*r + (1-a)*(h_k * r)`: the binomial kernel
/// runs along the geometric contour (left column reversed, corner, top row)
/// with endpoint replication, and the result stays real-valued.
pub fn make_filtered_refs(refs: &ReferenceArray, a: f64, k: u32) -> Result<ReferenceArray> {
    if !(0.0..=1.0).contains(&a) {
        return Err(Error::InvalidBlendWeight(a));
    }
    let taps = binomial_kernel(k)?;
    let contour = refs.contour();
    let half = (taps.len() / 2) as isize;
    let len = contour.len() as isize;
    let mut out = Vec::with_capacity(contour.len());
    for i in 0..len {
        let mut acc = 0.0;
        for (j, &tap) in taps.iter().enumerate() {
            let src = (i + j as isize - half).clamp(0, len - 1) as usize;
            acc += tap * contour[src];
        }
        out.push(a * contour[i as usize] + (1.0 - a) * acc);
    }
    Ok(refs.from_contour(&out))
}

/// 2^(-coord/d) for d in {1, 2}, computed from exact powers of two so the
/// value is platform-independent.
pub fn decay_weight(coord: usize, d: u8) -> f64 {
    debug_assert!(d == 1 || d == 2);
    let d = d as usize;
    let base = 0.5f64.powi((coord / d) as i32);
    if coord % d == 0 {
        base
    } else {
        base * FRAC_1_SQRT_2
    }
}

/// Weight of the unfiltered-reference prediction in the full form:
/// `(N - min(x, y)) / N`.
pub fn t_weight(x: usize, y: usize, n: BlockSize) -> f64 {
    let n = n.n();
    (n - x.min(y)) as f64 / n as f64
}

/// All per-pixel combination weights, exposed so the normalization
/// identities can be checked directly.
#[derive(Debug, Clone, Copy)]
pub struct PdpcWeights {
    /// c1v scaled by the vertical decay 2^(-y/dv).
    pub wv: f64,
    /// c2v scaled by the vertical decay.
    pub wvc: f64,
    /// c1h scaled by the horizontal decay 2^(-x/dh).
    pub wh: f64,
    /// c2h scaled by the horizontal decay.
    pub whc: f64,
    pub t: f64,
    /// Filtered-prediction weight in the shortcut form.
    pub b_shortcut: f64,
    /// Filtered-prediction weight in the full form (b_shortcut - t).
    pub b_full: f64,
}

pub fn pdpc_weights(params: &PdpcParams, n: BlockSize, x: usize, y: usize) -> PdpcWeights {
    let dy = decay_weight(y, params.dv);
    let dx = decay_weight(x, params.dh);
    let wv = params.c1v * dy;
    let wvc = params.c2v * dy;
    let wh = params.c1h * dx;
    let whc = params.c2h * dx;
    let t = t_weight(x, y, n);
    let b_shortcut = 1.0 - (wv - wvc) - (wh - whc);
    PdpcWeights {
        wv,
        wvc,
        wh,
        whc,
        t,
        b_shortcut,
        b_full: b_shortcut - t,
    }
}

/// Per-block evaluator. Prediction arithmetic is always real-valued here
/// (the combination is defined over reals and must stay linear); the [1 2 1]
/// decision-table smoothing is never applied inside, because the filtered
/// reference set already carries the learned smoothing.
pub struct PdpcEval {
    n: BlockSize,
    params: PdpcParams,
    corner: f64,
    top: Vec<f64>,
    left: Vec<f64>,
    base_s: Predictor,
    base_r: Predictor,
}

impl PdpcEval {
    pub fn new(
        refs: &ReferenceArray,
        mode: PredictionMode,
        params: PdpcParams,
        policy: SmoothingPolicy,
    ) -> Result<Self> {
        params.validate()?;
        let s = make_filtered_refs(refs, params.a, params.k)?;
        let base_s = Predictor::new(&s, mode, policy.edge_filters, Rounding::Exact);
        let base_r = Predictor::new(refs, mode, policy.edge_filters, Rounding::Exact);
        Ok(PdpcEval {
            n: refs.n(),
            params,
            corner: refs.corner(),
            top: refs.top().to_vec(),
            left: refs.left().to_vec(),
            base_s,
            base_r,
        })
    }

    fn near_edge(&self, w: &PdpcWeights, x: usize, y: usize) -> f64 {
        w.wv * self.top[x] - w.wvc * self.corner + w.wh * self.left[y] - w.whc * self.corner
    }

    /// Shortcut form: near-edge terms plus `b'` times the filtered-reference
    /// prediction.
    pub fn pixel_shortcut(&self, x: usize, y: usize) -> f64 {
        let w = pdpc_weights(&self.params, self.n, x, y);
        self.near_edge(&w, x, y) + w.b_shortcut * self.base_s.pixel(x, y)
    }

    /// Full form: near-edge terms plus `t` times the unfiltered-reference
    /// prediction plus `b` times the filtered one.
    pub fn pixel_full(&self, x: usize, y: usize) -> f64 {
        let w = pdpc_weights(&self.params, self.n, x, y);
        self.near_edge(&w, x, y)
            + w.t * self.base_r.pixel(x, y)
            + w.b_full * self.base_s.pixel(x, y)
    }
}

/// Combined prediction, shortcut form. Output is real-valued;
/// `PredictionBlock::finalize` rounds and clips when integer samples are
/// needed.
pub fn predict_pdpc_shortcut(
    refs: &ReferenceArray,
    mode: PredictionMode,
    params: PdpcParams,
    policy: SmoothingPolicy,
) -> Result<PredictionBlock> {
    let eval = PdpcEval::new(refs, mode, params, policy)?;
    Ok(PredictionBlock::from_fn(refs.n(), |x, y| {
        eval.pixel_shortcut(x, y)
    }))
}

/// Combined prediction, full form (kept for analysis; equal to the shortcut
/// form whenever `a = 1`).
pub fn predict_pdpc_full(
    refs: &ReferenceArray,
    mode: PredictionMode,
    params: PdpcParams,
    policy: SmoothingPolicy,
) -> Result<PredictionBlock> {
    let eval = PdpcEval::new(refs, mode, params, policy)?;
    Ok(PredictionBlock::from_fn(refs.n(), |x, y| {
        eval.pixel_full(x, y)
    }))
}

/// One combined pixel in isolation. There is no serial dependence between
/// predicted pixels, so this is bit-identical to the same pixel of the
/// whole-block call.
pub fn predict_pdpc_pixel(
    refs: &ReferenceArray,
    mode: PredictionMode,
    params: PdpcParams,
    policy: SmoothingPolicy,
    x: usize,
    y: usize,
) -> Result<f64> {
    Ok(PdpcEval::new(refs, mode, params, policy)?.pixel_shortcut(x, y))
}

/// Realizes the combination as a dense predictor matrix by probing it with
/// canonical unit reference vectors. Requires exact rounding; the integer
/// form is not a linear map.
pub fn realize_matrix(
    n: BlockSize,
    mode: PredictionMode,
    params: PdpcParams,
    policy: SmoothingPolicy,
    rounding: Rounding,
) -> Result<PredictorMatrix> {
    if rounding != Rounding::Exact {
        return Err(Error::NonlinearRounding);
    }
    params.validate()?;
    let rows = n.n() * n.n();
    let cols = n.ref_len();
    let mut entries = DMatrix::zeros(rows, cols);
    let mut unit = vec![0.0; cols];
    for j in 0..cols {
        unit[j] = 1.0;
        let refs = ReferenceArray::from_canonical(n, 8, &unit)?;
        let col = predict_pdpc_shortcut(&refs, mode, params, policy)?;
        for (i, &v) in col.values().iter().enumerate() {
            entries[(i, j)] = v;
        }
        unit[j] = 0.0;
    }
    let kind = if params.is_identity() {
        MatrixKind::Hevc
    } else {
        MatrixKind::Pdpc
    };
    Ok(PredictorMatrix::new(n, mode, kind, entries))
}

/// Default mode grouping: non-directional, then four directional fans.
pub fn default_mode_groups() -> Vec<Vec<u8>> {
    vec![
        vec![0, 1],
        (2..=9).collect(),
        (10..=17).collect(),
        (18..=25).collect(),
        (26..=34).collect(),
    ]
}

/// A trained collection of parameter sets keyed by (block size, mode group,
/// set index). Set 0 always means "combination off": plain HEVC prediction.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamLibrary {
    num_sets: usize,
    mode_groups: Vec<Vec<u8>>,
    group_of_mode: [usize; 35],
    entries: BTreeMap<(usize, usize, usize), PdpcParams>,
}

impl ParamLibrary {
    pub fn new(num_sets: usize, mode_groups: Vec<Vec<u8>>) -> Result<Self> {
        if num_sets == 0 {
            return Err(Error::InvalidSetCount(num_sets));
        }
        let group_of_mode = validate_groups(&mode_groups)?;
        Ok(ParamLibrary {
            num_sets,
            mode_groups,
            group_of_mode,
            entries: BTreeMap::new(),
        })
    }

    /// Library with set 0 only: every block predicted by plain HEVC.
    pub fn identity_only() -> Self {
        ParamLibrary::new(1, default_mode_groups()).unwrap()
    }

    #[inline]
    pub fn num_sets(&self) -> usize {
        self.num_sets
    }

    #[inline]
    pub fn mode_groups(&self) -> &[Vec<u8>] {
        &self.mode_groups
    }

    #[inline]
    pub fn group_of(&self, mode: PredictionMode) -> usize {
        self.group_of_mode[mode.index() as usize]
    }

    pub fn insert(
        &mut self,
        n: BlockSize,
        group: usize,
        set: usize,
        params: PdpcParams,
    ) -> Result<()> {
        if set == 0 || set >= self.num_sets || group >= self.mode_groups.len() {
            return Err(Error::MissingParams {
                n: n.n(),
                group,
                set,
            });
        }
        params.validate()?;
        self.entries.insert((n.n(), group, set), params);
        Ok(())
    }

    /// Parameters for (size, mode, set); set 0 resolves to the identity.
    pub fn resolve(&self, n: BlockSize, mode: PredictionMode, set: usize) -> Result<PdpcParams> {
        if set == 0 {
            return Ok(PdpcParams::identity(n));
        }
        let group = self.group_of(mode);
        self.entries
            .get(&(n.n(), group, set))
            .copied()
            .ok_or(Error::MissingParams {
                n: n.n(),
                group,
                set,
            })
    }

    pub fn entries(&self) -> impl Iterator<Item = (&(usize, usize, usize), &PdpcParams)> {
        self.entries.iter()
    }

    /// Block sizes the library carries trained entries for.
    pub fn sizes(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.entries.keys().map(|k| k.0).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// Absorbs all trained entries of `other` for sizes/groups this library
    /// shares, keyed under fresh set indices. Used to build nested libraries
    /// whose option set is a superset of another's.
    pub fn with_extra_sets(&self, other: &ParamLibrary) -> Result<ParamLibrary> {
        if other.mode_groups != self.mode_groups {
            return Err(Error::BadModeGroups(
                "cannot nest libraries with different mode groups".into(),
            ));
        }
        let extra = other.num_sets - 1;
        let mut merged = ParamLibrary::new(self.num_sets + extra, self.mode_groups.clone())?;
        for (&(n, g, s), &p) in &self.entries {
            merged.entries.insert((n, g, s), p);
        }
        for (&(n, g, s), &p) in &other.entries {
            merged.entries.insert((n, g, self.num_sets + s - 1), p);
        }
        Ok(merged)
    }

    /// Merges per-size libraries produced by separate training runs.
    pub fn merge_sizes(mut self, other: ParamLibrary) -> Result<ParamLibrary> {
        if other.mode_groups != self.mode_groups || other.num_sets != self.num_sets {
            return Err(Error::BadModeGroups(
                "cannot merge libraries with different shape".into(),
            ));
        }
        self.entries.extend(other.entries);
        Ok(self)
    }

    /// Checks that every trained entry follows the size rule for its block
    /// size.
    pub fn validate_d_rule(&self) -> Result<()> {
        for (&(n, group, set), p) in &self.entries {
            let expected = size_rule(BlockSize::from_n(n)?);
            if p.dv != expected || p.dh != expected {
                return Err(Error::MissingParams { n, group, set });
            }
        }
        Ok(())
    }

    pub(crate) fn from_parts(
        num_sets: usize,
        mode_groups: Vec<Vec<u8>>,
        entries: BTreeMap<(usize, usize, usize), PdpcParams>,
    ) -> Result<Self> {
        let mut lib = ParamLibrary::new(num_sets, mode_groups)?;
        for ((n, g, s), p) in entries {
            lib.insert(BlockSize::from_n(n)?, g, s, p)?;
        }
        Ok(lib)
    }
}

fn validate_groups(groups: &[Vec<u8>]) -> Result<[usize; 35]> {
    let mut owner = [usize::MAX; 35];
    for (g, modes) in groups.iter().enumerate() {
        for &m in modes {
            if m > 34 {
                return Err(Error::BadModeGroups(format!("mode {m} out of range")));
            }
            if owner[m as usize] != usize::MAX {
                return Err(Error::BadModeGroups(format!(
                    "mode {m} appears in groups {} and {g}",
                    owner[m as usize]
                )));
            }
            owner[m as usize] = g;
        }
    }
    if let Some(m) = owner.iter().position(|&g| g == usize::MAX) {
        return Err(Error::BadModeGroups(format!("mode {m} not covered")));
    }
    Ok(owner)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::intra::predict_hevc;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn refs_from(corner: f64, top: Vec<f64>, left: Vec<f64>, n: BlockSize) -> ReferenceArray {
        ReferenceArray::new(n, 8, corner, top, left).unwrap()
    }

    fn random_refs(rng: &mut ChaCha8Rng, n: BlockSize) -> ReferenceArray {
        let dim = 2 * n.n();
        refs_from(
            rng.random_range(0..256) as f64,
            (0..dim).map(|_| rng.random_range(0..256) as f64).collect(),
            (0..dim).map(|_| rng.random_range(0..256) as f64).collect(),
            n,
        )
    }

    fn random_params(rng: &mut ChaCha8Rng, n: BlockSize) -> PdpcParams {
        let d = size_rule(n);
        let lattice = |rng: &mut ChaCha8Rng| rng.random_range(-32..=32) as f64 / 32.0;
        PdpcParams {
            c1v: lattice(rng),
            c2v: lattice(rng),
            c1h: lattice(rng),
            c2h: lattice(rng),
            dv: d,
            dh: d,
            a: rng.random_range(0..=8) as f64 / 8.0,
            k: *[2u32, 4, 6, 8].choose(rng).unwrap(),
        }
    }

    #[test]
    fn size_rule_values() {
        assert_eq!(size_rule(BlockSize::S4), 1);
        assert_eq!(size_rule(BlockSize::S16), 1);
        assert_eq!(size_rule(BlockSize::S32), 2);
    }

    #[test]
    fn binomial_kernel_values() {
        assert_eq!(binomial_kernel(2).unwrap(), vec![0.25, 0.5, 0.25]);
        assert_eq!(
            binomial_kernel(4).unwrap(),
            vec![1.0 / 16.0, 4.0 / 16.0, 6.0 / 16.0, 4.0 / 16.0, 1.0 / 16.0]
        );
        for k in [2, 4, 6, 8] {
            let sum: f64 = binomial_kernel(k).unwrap().iter().sum();
            assert_eq!(sum, 1.0);
        }
        assert!(binomial_kernel(3).is_err());
        assert!(binomial_kernel(0).is_err());
        assert!(binomial_kernel(10).is_err());
    }

    #[test]
    fn filtered_refs_blend_degenerates_at_a_1() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let refs = random_refs(&mut rng, BlockSize::S8);
        for k in [2, 4, 6, 8] {
            let s = make_filtered_refs(&refs, 1.0, k).unwrap();
            assert_eq!(s.to_canonical(), refs.to_canonical());
        }
    }

    #[test]
    fn filtered_refs_preserve_constants() {
        let refs = refs_from(42.0, vec![42.0; 8], vec![42.0; 8], BlockSize::S4);
        for k in [2, 4, 6, 8] {
            let s = make_filtered_refs(&refs, 0.25, k).unwrap();
            for v in s.to_canonical() {
                assert!((v - 42.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn filtered_refs_impulse_matches_convolution_oracle() {
        // Contour [0, 8, 0, ...]: the impulse sits at left[6] (contour idx 1).
        let mut left = vec![0.0; 8];
        left[6] = 8.0;
        let refs = refs_from(0.0, vec![0.0; 8], left, BlockSize::S4);
        let s = make_filtered_refs(&refs, 0.0, 2).unwrap();
        let c = s.contour();
        assert_eq!(c[1], 4.0);
        assert_eq!(c[0], 2.0);
        assert_eq!(c[2], 2.0);
        assert_eq!(c[3], 0.0);

        // Brute-force 1-D convolution with endpoint replication.
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let refs = random_refs(&mut rng, BlockSize::S4);
        for k in [2u32, 4, 6, 8] {
            let taps = binomial_kernel(k).unwrap();
            let contour = refs.contour();
            let pad = taps.len() / 2;
            let mut padded = vec![contour[0]; pad];
            padded.extend_from_slice(&contour);
            padded.extend(std::iter::repeat(contour[contour.len() - 1]).take(pad));
            let expected: Vec<f64> = (0..contour.len())
                .map(|i| {
                    taps.iter()
                        .enumerate()
                        .map(|(j, &t)| t * padded[i + j])
                        .sum()
                })
                .collect();
            let got = make_filtered_refs(&refs, 0.0, k).unwrap().contour();
            for (g, e) in got.iter().zip(&expected) {
                assert!((g - e).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn decay_weight_values() {
        assert_eq!(decay_weight(0, 1), 1.0);
        assert_eq!(decay_weight(3, 1), 0.125);
        assert!((decay_weight(3, 2) - 2f64.powf(-1.5)).abs() < 1e-15);
        assert_eq!(decay_weight(4, 2), 0.25);
    }

    #[test]
    fn t_weight_values() {
        assert_eq!(t_weight(0, 0, BlockSize::S8), 1.0);
        assert_eq!(t_weight(3, 3, BlockSize::S4), 0.25);
        assert_eq!(t_weight(2, 1, BlockSize::S4), 0.75);
    }

    #[test]
    fn identity_params_reproduce_hevc() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for &n in &BlockSize::ALL {
            let refs = random_refs(&mut rng, n);
            let params = PdpcParams::identity(n);
            for mode in PredictionMode::all() {
                for edge in [false, true] {
                    let policy = SmoothingPolicy {
                        enabled: false,
                        edge_filters: edge,
                    };
                    let pdpc = predict_pdpc_shortcut(&refs, mode, params, policy).unwrap();
                    let hevc = predict_hevc(&refs, mode, policy, Rounding::Exact);
                    assert_eq!(pdpc.values(), hevc.values(), "mode {}", mode.index());
                }
            }
        }
    }

    #[test]
    fn constant_references_are_preserved() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for &n in &BlockSize::ALL {
            let c = 173.0;
            let refs = refs_from(c, vec![c; 2 * n.n()], vec![c; 2 * n.n()], n);
            for _ in 0..10 {
                let params = random_params(&mut rng, n);
                let mode = PredictionMode::new(rng.random_range(0..=34)).unwrap();
                let p = predict_pdpc_shortcut(&refs, mode, params, SmoothingPolicy::hevc())
                    .unwrap();
                for &v in p.values() {
                    assert!((v - c).abs() < 1e-9);
                }
                let p = predict_pdpc_full(&refs, mode, params, SmoothingPolicy::hevc()).unwrap();
                for &v in p.values() {
                    assert!((v - c).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn shortcut_hand_example_mode_26() {
        let n = BlockSize::S4;
        let refs = refs_from(60.0, vec![80.0; 8], vec![33.0; 8], n);
        let policy = SmoothingPolicy::off();

        // c1v = 0.5, everything else zero, a = 1.
        let mut params = PdpcParams::identity(n);
        params.c1v = 0.5;
        let p = predict_pdpc_shortcut(&refs, PredictionMode::VERTICAL, params, policy).unwrap();
        assert!((p.at(0, 0) - 80.0).abs() < 1e-12); // 0.5*80 + 0.5*80
        assert!((p.at(0, 3) - 80.0).abs() < 1e-12); // 5 + 75

        // Adding c2v = 0.5 makes b' = 1 and pulls the corner in.
        params.c2v = 0.5;
        let p = predict_pdpc_shortcut(&refs, PredictionMode::VERTICAL, params, policy).unwrap();
        assert!((p.at(0, 0) - 90.0).abs() < 1e-12); // 40 - 30 + 80
    }

    #[test]
    fn full_form_matches_shortcut_when_a_is_1() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = BlockSize::S8;
        let refs = random_refs(&mut rng, n);
        for _ in 0..20 {
            let mut params = random_params(&mut rng, n);
            params.a = 1.0;
            let mode = PredictionMode::new(rng.random_range(0..=34)).unwrap();
            let full = predict_pdpc_full(&refs, mode, params, SmoothingPolicy::hevc()).unwrap();
            let short =
                predict_pdpc_shortcut(&refs, mode, params, SmoothingPolicy::hevc()).unwrap();
            for (f, s) in full.values().iter().zip(short.values()) {
                assert!((f - s).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn full_form_filtered_weight_sign_at_origin() {
        let n = BlockSize::S4;
        let mut params = PdpcParams::identity(n);
        params.c1v = 0.5;
        let w = pdpc_weights(&params, n, 0, 0);
        assert_eq!(w.t, 1.0);
        assert!((w.b_full - (w.b_shortcut - 1.0)).abs() < 1e-15);
        assert!(w.b_full < 0.0);
    }

    #[test]
    fn normalization_identities() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for &n in &BlockSize::ALL {
            for _ in 0..50 {
                let params = random_params(&mut rng, n);
                for y in 0..n.n() {
                    for x in 0..n.n() {
                        let w = pdpc_weights(&params, n, x, y);
                        let short = (w.wv - w.wvc) + (w.wh - w.whc) + w.b_shortcut;
                        let full = (w.wv - w.wvc) + (w.wh - w.whc) + w.t + w.b_full;
                        assert!((short - 1.0).abs() < 1e-12);
                        assert!((full - 1.0).abs() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn pixel_in_isolation_is_bit_identical() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for &n in &[BlockSize::S4, BlockSize::S8] {
            let refs = random_refs(&mut rng, n);
            let params = random_params(&mut rng, n);
            for mode in PredictionMode::all() {
                let block =
                    predict_pdpc_shortcut(&refs, mode, params, SmoothingPolicy::hevc()).unwrap();
                for y in 0..n.n() {
                    for x in 0..n.n() {
                        let lone =
                            predict_pdpc_pixel(&refs, mode, params, SmoothingPolicy::hevc(), x, y)
                                .unwrap();
                        assert_eq!(lone.to_bits(), block.at(x, y).to_bits());
                    }
                }
            }
        }
    }

    #[test]
    fn realize_rejects_integer_rounding() {
        let n = BlockSize::S4;
        assert!(matches!(
            realize_matrix(
                n,
                PredictionMode::VERTICAL,
                PdpcParams::identity(n),
                SmoothingPolicy::off(),
                Rounding::Hevc
            ),
            Err(Error::NonlinearRounding)
        ));
    }

    #[test]
    fn identity_matrix_mode_26_is_a_column_copy() {
        let n = BlockSize::S4;
        let h = realize_matrix(
            n,
            PredictionMode::VERTICAL,
            PdpcParams::identity(n),
            SmoothingPolicy::off(),
            Rounding::Exact,
        )
        .unwrap();
        assert_eq!(h.kind(), MatrixKind::Hevc);
        for y in 0..4 {
            for x in 0..4 {
                for j in 0..h.n().ref_len() {
                    let expected = if j == crate::block::canonical_top_index(x) {
                        1.0
                    } else {
                        0.0
                    };
                    assert_eq!(h.weight(x, y, j), expected);
                }
            }
        }
    }

    #[test]
    fn realized_matrix_agrees_with_direct_evaluation() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for &n in &[BlockSize::S4, BlockSize::S8] {
            for _ in 0..5 {
                let params = random_params(&mut rng, n);
                let mode = PredictionMode::new(rng.random_range(0..=34)).unwrap();
                let policy = SmoothingPolicy::hevc();
                let h = realize_matrix(n, mode, params, policy, Rounding::Exact).unwrap();
                // Rows sum to 1: constant preservation restated.
                for row in 0..n.n() * n.n() {
                    let sum: f64 = (0..n.ref_len()).map(|j| h.entries()[(row, j)]).sum();
                    assert!((sum - 1.0).abs() < 1e-12);
                }
                for _ in 0..20 {
                    let refs = random_refs(&mut rng, n);
                    let direct = predict_pdpc_shortcut(&refs, mode, params, policy).unwrap();
                    let via_matrix = h.apply(&refs.to_canonical());
                    for (m, d) in via_matrix.iter().zip(direct.values()) {
                        let tol = 1e-12 * d.abs().max(1.0);
                        assert!((m - d).abs() <= tol);
                    }
                }
            }
        }
    }

    #[test]
    fn library_validation_and_resolution() {
        let mut lib = ParamLibrary::new(2, default_mode_groups()).unwrap();
        let n = BlockSize::S8;
        let mut p = PdpcParams::identity(n);
        p.c1v = 0.25;
        p.a = 0.5;
        lib.insert(n, 4, 1, p).unwrap();

        // Set 0 is always the identity.
        let id = lib.resolve(n, PredictionMode::VERTICAL, 0).unwrap();
        assert!(id.is_identity());
        let got = lib.resolve(n, PredictionMode::VERTICAL, 1).unwrap();
        assert_eq!(got, p);
        // Mode 2 lives in group 1, which has no trained entry.
        assert!(lib.resolve(n, PredictionMode::new(2).unwrap(), 1).is_err());

        // Overlapping groups rejected.
        assert!(ParamLibrary::new(2, vec![vec![0, 1], (1..=34).collect()]).is_err());
        // Gaps rejected.
        assert!(ParamLibrary::new(2, vec![vec![0], (2..=34).collect()]).is_err());

        lib.validate_d_rule().unwrap();
        let mut bad = PdpcParams::identity(n);
        bad.dv = 2;
        bad.dh = 2;
        lib.insert(n, 3, 1, bad).unwrap();
        assert!(lib.validate_d_rule().is_err());
    }
}
