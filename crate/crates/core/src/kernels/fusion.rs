//! Dual-resolution cross-attention fusion.
//!
//! Pooled high-resolution face descriptors (keys and values) are attended to
//! by every position of a low-resolution global feature map (queries); the
//! result is added back onto the map only inside the faces' spatial masks.

use super::{KernelError, Tensor};
use crate::dataset::BBox;

/// Number of pyramid scales fused.
pub const FUSION_SCALES: usize = 3;

/// Spatial mean of an `N x H x W x C` map, giving `N x C`.
pub fn global_avg_pool(features: &Tensor) -> Result<Tensor, KernelError> {
    let &[n, h, w, c] = features.expect_rank("global_avg_pool", 4)? else { unreachable!() };
    if h == 0 || w == 0 {
        return Err(KernelError::ShapeMismatch { op: "global_avg_pool", detail: "empty spatial extent".into() });
    }
    let x = features.data();
    let mut out = vec![0.0; n * c];
    for face in 0..n {
        let acc = &mut out[face * c..(face + 1) * c];
        for pos in 0..h * w {
            let base = (face * h * w + pos) * c;
            for (a, v) in acc.iter_mut().zip(&x[base..base + c]) {
                *a += v;
            }
        }
        let scale = (h * w) as f64;
        for a in acc.iter_mut() {
            *a /= scale;
        }
    }
    Ok(Tensor::from_parts_unchecked(vec![n, c], out))
}

/// `flatten(F + P)`: an `H x W x C` map to `(H*W) x C`, position `(i, j)` at row `i*W + j`.
pub fn flatten_with_pe(features: &Tensor, encoding: &Tensor) -> Result<Tensor, KernelError> {
    let &[h, w, c] = features.expect_rank("flatten_with_pe", 3)? else { unreachable!() };
    if encoding.shape() != features.shape() {
        return Err(KernelError::ShapeMismatch {
            op: "flatten_with_pe",
            detail: format!("features {:?} vs encoding {:?}", features.shape(), encoding.shape()),
        });
    }
    let data = features.data().iter().zip(encoding.data()).map(|(f, p)| f + p).collect();
    Ok(Tensor::from_parts_unchecked(vec![h * w, c], data))
}

/// Fixed 2D sinusoidal encoding for an `H x W x C` grid.
///
/// The first `ceil(C/2)` channels encode the row, the rest the column. Within
/// an axis block of `m` channels, channel `k` is `sin` (even `k`) or `cos`
/// (odd `k`) of `pos / 10000^(2*(k/2)/m)`.
pub fn sinusoidal_pe(h: usize, w: usize, c: usize) -> Tensor {
    let rows = c.div_ceil(2);
    let cols = c - rows;
    let enc = |pos: usize, k: usize, m: usize| {
        let freq = 10000f64.powf(-2.0 * (k / 2) as f64 / m as f64);
        let angle = pos as f64 * freq;
        if k % 2 == 0 {
            angle.sin()
        } else {
            angle.cos()
        }
    };
    Tensor::from_fn(&[h, w, c], |i| if i[2] < rows { enc(i[0], i[2], rows) } else { enc(i[1], i[2] - rows, cols) })
}

/// Affine projection `x W + b` with `W` stored `in x out`.
#[derive(Debug, Clone, PartialEq)]
pub struct Linear {
    weight: Tensor,
    bias: Option<Tensor>,
}

impl Linear {
    pub fn new(weight: Tensor, bias: Option<Tensor>) -> Result<Self, KernelError> {
        let &[_, out] = weight.expect_rank("linear", 2)? else { unreachable!() };
        if let Some(b) = &bias {
            if b.shape() != [out] {
                return Err(KernelError::ShapeMismatch {
                    op: "linear",
                    detail: format!("bias {:?} for {out} outputs", b.shape()),
                });
            }
        }
        Ok(Self { weight, bias })
    }

    pub fn in_dim(&self) -> usize {
        self.weight.shape()[0]
    }

    pub fn out_dim(&self) -> usize {
        self.weight.shape()[1]
    }

    pub fn weight(&self) -> &Tensor {
        &self.weight
    }

    pub fn bias(&self) -> Option<&Tensor> {
        self.bias.as_ref()
    }

    /// `M x in` to `M x out`.
    pub fn apply(&self, x: &Tensor) -> Result<Tensor, KernelError> {
        let &[m, d_in] = x.expect_rank("linear", 2)? else { unreachable!() };
        if d_in != self.in_dim() {
            return Err(KernelError::ShapeMismatch {
                op: "linear",
                detail: format!("input width {d_in}, weight expects {}", self.in_dim()),
            });
        }
        let d_out = self.out_dim();
        let (xs, ws) = (x.data(), self.weight.data());
        let mut out = vec![0.0; m * d_out];
        for row in 0..m {
            for col in 0..d_out {
                let mut acc = 0.0;
                for k in 0..d_in {
                    acc += xs[row * d_in + k] * ws[k * d_out + col];
                }
                if let Some(b) = &self.bias {
                    acc += b.data()[col];
                }
                out[row * d_out + col] = acc;
            }
        }
        Ok(Tensor::from_parts_unchecked(vec![m, d_out], out))
    }
}

/// Row-wise `softmax(Q K^T / sqrt(d_k))`, `M x N`; each row is shifted by its max.
pub fn attention_weights(q: &Tensor, k: &Tensor) -> Result<Tensor, KernelError> {
    let &[m, d_k] = q.expect_rank("cross_attention", 2)? else { unreachable!() };
    let &[n, kd] = k.expect_rank("cross_attention", 2)? else { unreachable!() };
    if kd != d_k {
        return Err(KernelError::ShapeMismatch { op: "cross_attention", detail: format!("query dim {d_k}, key dim {kd}") });
    }
    if n == 0 {
        return Err(KernelError::EmptyKeys);
    }
    let scale = (d_k as f64).sqrt().recip();
    let (qs, ks) = (q.data(), k.data());
    let mut out = vec![0.0; m * n];
    for row in 0..m {
        let logits = &mut out[row * n..(row + 1) * n];
        for (j, l) in logits.iter_mut().enumerate() {
            let dot: f64 = qs[row * d_k..(row + 1) * d_k].iter().zip(&ks[j * d_k..(j + 1) * d_k]).map(|(a, b)| a * b).sum();
            *l = dot * scale;
        }
        let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut total = 0.0;
        for l in logits.iter_mut() {
            *l = (*l - max).exp();
            total += *l;
        }
        for l in logits.iter_mut() {
            *l /= total;
        }
    }
    Ok(Tensor::from_parts_unchecked(vec![m, n], out))
}

/// `softmax(Q K^T / sqrt(d_k)) V`: `M x d_k`, `N x d_k`, `N x C` to `M x C`.
pub fn cross_attention(q: &Tensor, k: &Tensor, v: &Tensor) -> Result<Tensor, KernelError> {
    let weights = attention_weights(q, k)?;
    let &[n_v, c] = v.expect_rank("cross_attention", 2)? else { unreachable!() };
    let (m, n) = (weights.shape()[0], weights.shape()[1]);
    if n_v != n {
        return Err(KernelError::ShapeMismatch { op: "cross_attention", detail: format!("{n} keys but {n_v} values") });
    }
    let (a, vs) = (weights.data(), v.data());
    let mut out = vec![0.0; m * c];
    for row in 0..m {
        for col in 0..c {
            let mut acc = 0.0;
            for j in 0..n {
                acc += a[row * n + j] * vs[j * c + col];
            }
            out[row * c + col] = acc;
        }
    }
    Ok(Tensor::from_parts_unchecked(vec![m, c], out))
}

/// Binary per-face masks over an `H x W` feature grid, stored `N x H x W`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialMask {
    masks: Tensor,
}

impl SpatialMask {
    /// Accepts any `N x H x W` tensor of zeros and ones.
    pub fn new(masks: Tensor) -> Result<Self, KernelError> {
        masks.expect_rank("spatial_mask", 3)?;
        if masks.data().iter().any(|v| *v != 0.0 && *v != 1.0) {
            return Err(KernelError::InvalidParameter { op: "spatial_mask", detail: "mask values must be 0 or 1".into() });
        }
        Ok(Self { masks })
    }

    /// Rasterizes image-space boxes onto a `grid_h x grid_w` grid.
    ///
    /// A cell is set when the scaled box covers at least half its area; the
    /// cell under the box center is always set, so no face mask is empty.
    pub fn from_bboxes(boxes: &[BBox], image_w: f64, image_h: f64, grid_h: usize, grid_w: usize) -> Self {
        let sx = grid_w as f64 / image_w;
        let sy = grid_h as f64 / image_h;
        let mut data = vec![0.0; boxes.len() * grid_h * grid_w];
        for (n, b) in boxes.iter().enumerate() {
            let (x0, x1) = (b.x * sx, (b.x + b.w) * sx);
            let (y0, y1) = (b.y * sy, (b.y + b.h) * sy);
            let face = &mut data[n * grid_h * grid_w..(n + 1) * grid_h * grid_w];
            for i in 0..grid_h {
                let oy = (y1.min(i as f64 + 1.0) - y0.max(i as f64)).max(0.0);
                for j in 0..grid_w {
                    let ox = (x1.min(j as f64 + 1.0) - x0.max(j as f64)).max(0.0);
                    if ox * oy >= 0.5 {
                        face[i * grid_w + j] = 1.0;
                    }
                }
            }
            let ci = (((y0 + y1) * 0.5).floor().max(0.0) as usize).min(grid_h.saturating_sub(1));
            let cj = (((x0 + x1) * 0.5).floor().max(0.0) as usize).min(grid_w.saturating_sub(1));
            if grid_h > 0 && grid_w > 0 {
                face[ci * grid_w + cj] = 1.0;
            }
        }
        Self { masks: Tensor::from_parts_unchecked(vec![boxes.len(), grid_h, grid_w], data) }
    }

    pub fn faces(&self) -> usize {
        self.masks.shape()[0]
    }

    pub fn grid(&self) -> (usize, usize) {
        (self.masks.shape()[1], self.masks.shape()[2])
    }

    pub fn tensor(&self) -> &Tensor {
        &self.masks
    }

    /// Elementwise max over faces, `H x W`.
    pub fn combined(&self) -> Tensor {
        let (h, w) = self.grid();
        let mut out = vec![0.0f64; h * w];
        for face in self.masks.data().chunks(h * w) {
            for (o, v) in out.iter_mut().zip(face) {
                *o = o.max(*v);
            }
        }
        Tensor::from_parts_unchecked(vec![h, w], out)
    }
}

/// Query/key/value projections and the positional encoding for one scale.
#[derive(Debug, Clone, PartialEq)]
pub struct FusionWeights {
    pub w_q: Linear,
    pub w_k: Linear,
    pub w_v: Linear,
    pub positional_encoding: Tensor,
}

impl FusionWeights {
    /// Checks `w_q: C_l -> d_k`, `w_k: C_h -> d_k`, `w_v: C_h -> C_l` and an
    /// `H x W x C_l` encoding.
    pub fn new(w_q: Linear, w_k: Linear, w_v: Linear, positional_encoding: Tensor) -> Result<Self, KernelError> {
        let mismatch = |detail: String| Err(KernelError::ShapeMismatch { op: "fusion_weights", detail });
        let &[_, _, c_l] = positional_encoding.expect_rank("fusion_weights", 3)? else { unreachable!() };
        if w_q.in_dim() != c_l || w_v.out_dim() != c_l {
            return mismatch(format!("W_Q input {} and W_V output {} must equal C_l = {c_l}", w_q.in_dim(), w_v.out_dim()));
        }
        if w_k.out_dim() != w_q.out_dim() {
            return mismatch(format!("W_Q output {} != W_K output {}", w_q.out_dim(), w_k.out_dim()));
        }
        if w_k.in_dim() != w_v.in_dim() {
            return mismatch(format!("W_K input {} != W_V input {}", w_k.in_dim(), w_v.in_dim()));
        }
        Ok(Self { w_q, w_k, w_v, positional_encoding })
    }

    pub fn key_dim(&self) -> usize {
        self.w_q.out_dim()
    }
}

/// `F_l + M ⊙ Attention(W_Q(flatten(F_l + P)), W_K(F̄_h), W_V(F̄_h))`.
///
/// `features` is `H x W x C_l`, `pooled_faces` is `N x C_h`. The attention
/// output is reshaped back to `H x W x C_l` by inverting the flattening, and
/// the per-face masks are merged by max. Cells with mask 0 are copied untouched.
pub fn fuse_scale(
    features: &Tensor,
    pooled_faces: &Tensor,
    weights: &FusionWeights,
    mask: &SpatialMask,
) -> Result<Tensor, KernelError> {
    let &[h, w, c] = features.expect_rank("fuse_scale", 3)? else { unreachable!() };
    let &[n, _] = pooled_faces.expect_rank("fuse_scale", 2)? else { unreachable!() };
    if mask.grid() != (h, w) || mask.faces() != n {
        return Err(KernelError::ShapeMismatch {
            op: "fuse_scale",
            detail: format!("mask {:?} for {n} faces on a {h}x{w} grid", mask.tensor().shape()),
        });
    }
    let seq = flatten_with_pe(features, &weights.positional_encoding)?;
    let q = weights.w_q.apply(&seq)?;
    let k = weights.w_k.apply(pooled_faces)?;
    let v = weights.w_v.apply(pooled_faces)?;
    let attended = cross_attention(&q, &k, &v)?;
    let m = mask.combined();
    let mut out = features.data().to_vec();
    for (pos, &mv) in m.data().iter().enumerate() {
        if mv == 0.0 {
            continue;
        }
        for ch in 0..c {
            out[pos * c + ch] += mv * attended.data()[pos * c + ch];
        }
    }
    Ok(Tensor::from_parts_unchecked(vec![h, w, c], out))
}

/// Inputs for one pyramid scale.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaleInput {
    pub features: Tensor,
    pub weights: FusionWeights,
    pub mask: SpatialMask,
}

/// Applies [`fuse_scale`] to each of the three scales independently, all
/// sharing the same pooled face descriptors.
pub fn multi_scale_fuse(scales: &[ScaleInput], pooled_faces: &Tensor) -> Result<Vec<Tensor>, KernelError> {
    if scales.len() != FUSION_SCALES {
        return Err(KernelError::MissingScale { found: scales.len() });
    }
    scales.iter().map(|s| fuse_scale(&s.features, pooled_faces, &s.weights, &s.mask)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lcg(shape: &[usize], seed: u64) -> Tensor {
        let mut s = seed;
        Tensor::from_fn(shape, |_| {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        })
    }

    fn weights(h: usize, w: usize, c_l: usize, c_h: usize, d_k: usize, seed: u64) -> FusionWeights {
        FusionWeights::new(
            Linear::new(lcg(&[c_l, d_k], seed), None).unwrap(),
            Linear::new(lcg(&[c_h, d_k], seed + 1), Some(lcg(&[d_k], seed + 2))).unwrap(),
            Linear::new(lcg(&[c_h, c_l], seed + 3), None).unwrap(),
            sinusoidal_pe(h, w, c_l),
        )
        .unwrap()
    }

    #[test]
    fn pooling_examples() {
        let t = Tensor::from_fn(&[1, 3, 2, 2], |_| 4.5);
        assert_eq!(global_avg_pool(&t).unwrap().data(), &[4.5, 4.5]);
        let t = Tensor::new(vec![1, 2, 2, 1], vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(global_avg_pool(&t).unwrap().data(), &[2.5]);
    }

    #[test]
    fn flatten_indexing() {
        let f = lcg(&[3, 4, 2], 1);
        let zero = Tensor::zeros(&[3, 4, 2]);
        let flat = flatten_with_pe(&f, &zero).unwrap();
        assert_eq!(flat.shape(), &[12, 2]);
        assert_eq!(flat.at(&[2 * 4 + 3, 1]), f.at(&[2, 3, 1]));
        let one = Tensor::new(vec![1, 1, 2], vec![1.0, 2.0]).unwrap();
        let p = Tensor::new(vec![1, 1, 2], vec![0.5, 0.25]).unwrap();
        assert_eq!(flatten_with_pe(&one, &p).unwrap().data(), &[1.5, 2.25]);
        assert!(flatten_with_pe(&one, &f).is_err());
    }

    #[test]
    fn single_key_returns_its_value() {
        let q = lcg(&[5, 4], 3);
        let k = lcg(&[1, 4], 4);
        let v = lcg(&[1, 3], 5);
        let out = cross_attention(&q, &k, &v).unwrap();
        for row in 0..5 {
            assert_eq!(&out.data()[row * 3..row * 3 + 3], v.data());
        }
    }

    #[test]
    fn zero_queries_average_values() {
        let q = Tensor::zeros(&[2, 4]);
        let k = lcg(&[3, 4], 1);
        let v = lcg(&[3, 2], 2);
        let out = cross_attention(&q, &k, &v).unwrap();
        for c in 0..2 {
            let mean = (v.at(&[0, c]) + v.at(&[1, c]) + v.at(&[2, c])) / 3.0;
            assert!((out.at(&[1, c]) - mean).abs() < 1e-15);
        }
    }

    #[test]
    fn empty_keys_is_an_error() {
        let q = lcg(&[2, 4], 1);
        assert!(matches!(
            cross_attention(&q, &Tensor::zeros(&[0, 4]), &Tensor::zeros(&[0, 2])),
            Err(KernelError::EmptyKeys)
        ));
    }

    #[test]
    fn large_logits_stay_finite() {
        let q = Tensor::new(vec![1, 1], vec![1e3]).unwrap();
        let k = Tensor::new(vec![2, 1], vec![1e3, -1e3]).unwrap();
        let a = attention_weights(&q, &k).unwrap();
        assert_eq!(a.data(), &[1.0, 0.0]);
    }

    #[test]
    fn mask_rasterization() {
        let b = [BBox::new(0.0, 0.0, 50.0, 50.0), BBox::new(90.0, 90.0, 2.0, 2.0)];
        let m = SpatialMask::from_bboxes(&b, 100.0, 100.0, 4, 4);
        let t = m.tensor();
        // first box covers cells (0..2, 0..2) fully
        let ones: f64 = t.data()[..16].iter().sum();
        assert_eq!(ones, 4.0);
        assert_eq!(t.at(&[0, 1, 1]), 1.0);
        // tiny box still gets its center cell
        assert_eq!(t.data()[16..].iter().sum::<f64>(), 1.0);
        assert_eq!(t.at(&[1, 3, 3]), 1.0);
        assert_eq!(m.combined().data().iter().sum::<f64>(), 5.0);
        assert!(SpatialMask::new(Tensor::new(vec![1, 1, 1], vec![0.5]).unwrap()).is_err());
    }

    #[test]
    fn zero_mask_is_identity() {
        let f = lcg(&[4, 5, 3], 7);
        let pooled = lcg(&[2, 6], 8);
        let w = weights(4, 5, 3, 6, 4, 9);
        let mask = SpatialMask::new(Tensor::zeros(&[2, 4, 5])).unwrap();
        assert_eq!(fuse_scale(&f, &pooled, &w, &mask).unwrap(), f);
    }

    #[test]
    fn single_face_full_mask_adds_projected_value() {
        let f = lcg(&[3, 3, 2], 1);
        let pooled = lcg(&[1, 4], 2);
        let w = weights(3, 3, 2, 4, 3, 3);
        let mask = SpatialMask::new(Tensor::from_fn(&[1, 3, 3], |_| 1.0)).unwrap();
        let out = fuse_scale(&f, &pooled, &w, &mask).unwrap();
        let v = w.w_v.apply(&pooled).unwrap();
        for (i, (o, x)) in out.data().iter().zip(f.data()).enumerate() {
            assert!((o - (x + v.data()[i % 2])).abs() < 1e-15);
        }
    }

    #[test]
    fn fusion_validates_shapes() {
        let f = lcg(&[3, 3, 2], 1);
        let w = weights(3, 3, 2, 4, 3, 3);
        let mask = SpatialMask::new(Tensor::zeros(&[2, 3, 3])).unwrap();
        assert!(matches!(fuse_scale(&f, &lcg(&[1, 4], 1), &w, &mask), Err(KernelError::ShapeMismatch { .. })));
        assert!(FusionWeights::new(w.w_q.clone(), w.w_k.clone(), w.w_v.clone(), sinusoidal_pe(3, 3, 5)).is_err());
    }

    #[test]
    fn multi_scale_requires_three() {
        let pooled = lcg(&[1, 4], 2);
        let scale = |h, seed| ScaleInput {
            features: lcg(&[h, h, 2], seed),
            weights: weights(h, h, 2, 4, 3, seed),
            mask: SpatialMask::from_bboxes(&[BBox::new(0.0, 0.0, 10.0, 10.0)], 32.0, 32.0, h, h),
        };
        let scales = vec![scale(8, 1), scale(4, 2), scale(2, 3)];
        assert!(matches!(multi_scale_fuse(&scales[..2], &pooled), Err(KernelError::MissingScale { found: 2 })));
        let out = multi_scale_fuse(&scales, &pooled).unwrap();
        for (o, s) in out.iter().zip(&scales) {
            assert_eq!(*o, fuse_scale(&s.features, &pooled, &s.weights, &s.mask).unwrap());
        }
    }

    #[test]
    fn sinusoidal_layout() {
        let pe = sinusoidal_pe(3, 4, 5);
        // 3 row channels, 2 column channels
        assert_eq!(pe.at(&[0, 2, 0]), 0.0);
        assert_eq!(pe.at(&[2, 0, 1]), 2f64.cos());
        assert_eq!(pe.at(&[1, 3, 3]), 3f64.sin());
        assert_eq!(pe.at(&[1, 3, 4]), 3f64.cos());
    }
}
