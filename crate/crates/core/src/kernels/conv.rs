//! Plain and rotational 2D convolution over `H x W x C` feature maps.

use super::{KernelError, Tensor};

/// Tolerance on the rotation weights summing to one.
const WEIGHT_SUM_TOLERANCE: f64 = 1e-9;

/// Cross-correlation of `input` (`H x W x C_in`) with `weight`
/// (`C_out x C_in x k x k`), zero padding. Output is `H_out x W_out x C_out`.
pub fn conv2d(input: &Tensor, weight: &Tensor, stride: usize, padding: usize) -> Result<Tensor, KernelError> {
    let &[h, w, c_in] = input.expect_rank("conv2d", 3)? else { unreachable!() };
    let &[c_out, wc_in, kh, kw] = weight.expect_rank("conv2d", 4)? else { unreachable!() };
    if wc_in != c_in {
        return Err(KernelError::ShapeMismatch {
            op: "conv2d",
            detail: format!("input has {c_in} channels, kernel expects {wc_in}"),
        });
    }
    if stride == 0 {
        return Err(KernelError::InvalidParameter { op: "conv2d", detail: "stride must be positive".into() });
    }
    if h + 2 * padding < kh || w + 2 * padding < kw {
        return Err(KernelError::ShapeMismatch { op: "conv2d", detail: "kernel larger than padded input".into() });
    }
    let h_out = (h + 2 * padding - kh) / stride + 1;
    let w_out = (w + 2 * padding - kw) / stride + 1;
    let x = input.data();
    let k = weight.data();
    let mut out = vec![0.0; h_out * w_out * c_out];
    for oy in 0..h_out {
        for ox in 0..w_out {
            for co in 0..c_out {
                let mut acc = 0.0;
                for ky in 0..kh {
                    let iy = (oy * stride + ky) as isize - padding as isize;
                    if iy < 0 || iy >= h as isize {
                        continue;
                    }
                    for kx in 0..kw {
                        let ix = (ox * stride + kx) as isize - padding as isize;
                        if ix < 0 || ix >= w as isize {
                            continue;
                        }
                        let xbase = (iy as usize * w + ix as usize) * c_in;
                        for ci in 0..c_in {
                            acc += x[xbase + ci] * k[((co * c_in + ci) * kh + ky) * kw + kx];
                        }
                    }
                }
                out[(oy * w_out + ox) * c_out + co] = acc;
            }
        }
    }
    Ok(Tensor::from_parts_unchecked(vec![h_out, w_out, c_out], out))
}

/// Rotates the spatial taps of a `C_out x C_in x k x k` kernel by 90 degrees
/// counter-clockwise: `out[i][j] = in[j][k - 1 - i]`.
pub fn rotate_kernel90(weight: &Tensor) -> Result<Tensor, KernelError> {
    let &[c_out, c_in, kh, kw] = weight.expect_rank("rotate_kernel90", 4)? else { unreachable!() };
    if kh != kw {
        return Err(KernelError::ShapeMismatch { op: "rotate_kernel90", detail: format!("kernel {kh}x{kw} is not square") });
    }
    let k = kh;
    Ok(Tensor::from_fn(&[c_out, c_in, k, k], |i| weight.at(&[i[0], i[1], i[3], k - 1 - i[2]])))
}

/// Rotates an `H x W x C` map by 90 degrees counter-clockwise (result `W x H x C`),
/// the same index rule as [`rotate_kernel90`].
pub fn rotate_map90(input: &Tensor) -> Result<Tensor, KernelError> {
    let &[h, w, c] = input.expect_rank("rotate_map90", 3)? else { unreachable!() };
    Ok(Tensor::from_fn(&[w, h, c], |i| input.at(&[i[1], w - 1 - i[0], i[2]])))
}

/// Base kernel plus the averaging weights for its 0/90/180/270 degree copies.
#[derive(Debug, Clone, PartialEq)]
pub struct RotConvKernel {
    base: Tensor,
    rotation_weights: [f64; 4],
}

impl RotConvKernel {
    pub fn new(base: Tensor, rotation_weights: [f64; 4]) -> Result<Self, KernelError> {
        let &[_, _, kh, kw] = base.expect_rank("rot_conv", 4)? else { unreachable!() };
        if kh != kw || kh % 2 == 0 {
            return Err(KernelError::InvalidParameter {
                op: "rot_conv",
                detail: format!("kernel must be square with odd size, got {kh}x{kw}"),
            });
        }
        let sum: f64 = rotation_weights.iter().sum();
        if rotation_weights.iter().any(|w| !(*w >= 0.0)) || (sum - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
            return Err(KernelError::InvalidParameter {
                op: "rot_conv",
                detail: format!("rotation weights {rotation_weights:?} must be nonnegative and sum to 1"),
            });
        }
        Ok(Self { base, rotation_weights })
    }

    /// Equal weight on all four orientations.
    pub fn uniform(base: Tensor) -> Result<Self, KernelError> {
        Self::new(base, [0.25; 4])
    }

    pub fn base(&self) -> &Tensor {
        &self.base
    }

    pub fn rotation_weights(&self) -> [f64; 4] {
        self.rotation_weights
    }

    pub fn kernel_size(&self) -> usize {
        self.base.shape()[2]
    }

    /// Padding that keeps spatial size at stride 1.
    pub fn same_padding(&self) -> usize {
        (self.kernel_size() - 1) / 2
    }
}

/// `sum_r w_r * conv2d(input, rot90^r(base))`.
///
/// The four responses are combined pairwise, `(w0 r0 + w1 r1) + (w2 r2 + w3 r3)`,
/// which is exact when the rotated copies coincide and the weights are uniform.
pub fn rot_conv_forward(input: &Tensor, kernel: &RotConvKernel, stride: usize, padding: usize) -> Result<Tensor, KernelError> {
    let mut rotated = kernel.base.clone();
    let mut responses = Vec::with_capacity(4);
    for r in 0..4 {
        if r > 0 {
            rotated = rotate_kernel90(&rotated)?;
        }
        responses.push(conv2d(input, &rotated, stride, padding)?);
    }
    let w = kernel.rotation_weights;
    let shape = responses[0].shape().to_vec();
    let data = (0..responses[0].len())
        .map(|i| {
            let r = |k: usize| responses[k].data()[i];
            (w[0] * r(0) + w[1] * r(1)) + (w[2] * r(2) + w[3] * r(3))
        })
        .collect();
    Ok(Tensor::from_parts_unchecked(shape, data))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lcg_tensor(shape: &[usize], seed: u64) -> Tensor {
        let mut s = seed;
        Tensor::from_fn(shape, |_| {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        })
    }

    #[test]
    fn conv_shapes_and_identity_kernel() {
        let x = lcg_tensor(&[5, 6, 2], 1);
        // 3x3 identity kernel per channel
        let w = Tensor::from_fn(&[2, 2, 3, 3], |i| if i[0] == i[1] && i[2] == 1 && i[3] == 1 { 1.0 } else { 0.0 });
        let y = conv2d(&x, &w, 1, 1).unwrap();
        assert_eq!(y, x);
        let y = conv2d(&x, &w, 2, 1).unwrap();
        assert_eq!(y.shape(), &[3, 3, 2]);
        assert_eq!(y.at(&[1, 2, 1]), x.at(&[2, 4, 1]));
    }

    #[test]
    fn conv_rejects_channel_mismatch() {
        let x = Tensor::zeros(&[4, 4, 3]);
        let w = Tensor::zeros(&[1, 2, 3, 3]);
        assert!(matches!(conv2d(&x, &w, 1, 1), Err(KernelError::ShapeMismatch { .. })));
        let k = RotConvKernel::uniform(w).unwrap();
        assert!(matches!(rot_conv_forward(&x, &k, 1, 1), Err(KernelError::ShapeMismatch { .. })));
    }

    #[test]
    fn kernel_validation() {
        assert!(RotConvKernel::uniform(Tensor::zeros(&[1, 1, 2, 2])).is_err());
        assert!(RotConvKernel::new(Tensor::zeros(&[1, 1, 3, 3]), [0.5, 0.5, 0.5, -0.5]).is_err());
        assert!(RotConvKernel::new(Tensor::zeros(&[1, 1, 3, 3]), [0.5, 0.5, 0.1, 0.0]).is_err());
        assert_eq!(RotConvKernel::uniform(Tensor::zeros(&[1, 1, 5, 5])).unwrap().same_padding(), 2);
    }

    #[test]
    fn four_kernel_rotations_are_identity() {
        let w = lcg_tensor(&[2, 3, 3, 3], 4);
        let mut r = w.clone();
        for _ in 0..4 {
            r = rotate_kernel90(&r).unwrap();
        }
        assert_eq!(r, w);
        let once = rotate_kernel90(&w).unwrap();
        assert_eq!(once.at(&[1, 2, 0, 0]), w.at(&[1, 2, 0, 2]));
    }

    #[test]
    fn symmetric_kernel_matches_plain_conv_exactly() {
        let x = lcg_tensor(&[7, 7, 2], 9);
        let g = [1.0, 2.0, 1.0];
        let base = Tensor::from_fn(&[3, 2, 3, 3], |i| g[i[2]] * g[i[3]] / 16.0 * (1 + i[0] + i[1]) as f64);
        let plain = conv2d(&x, &base, 1, 1).unwrap();
        let rot = rot_conv_forward(&x, &RotConvKernel::uniform(base.clone()).unwrap(), 1, 1).unwrap();
        assert_eq!(rot, plain);
    }

    #[test]
    fn degenerate_weights_match_plain_conv_exactly() {
        let x = lcg_tensor(&[6, 6, 3], 2);
        let base = lcg_tensor(&[4, 3, 3, 3], 3);
        let plain = conv2d(&x, &base, 1, 1).unwrap();
        let rot = rot_conv_forward(&x, &RotConvKernel::new(base, [1.0, 0.0, 0.0, 0.0]).unwrap(), 1, 1).unwrap();
        assert_eq!(rot, plain);
    }

    #[test]
    fn uniform_weights_are_rotation_equivariant() {
        let x = lcg_tensor(&[6, 6, 2], 5);
        let k = RotConvKernel::uniform(lcg_tensor(&[3, 2, 3, 3], 6)).unwrap();
        let a = rot_conv_forward(&rotate_map90(&x).unwrap(), &k, 1, 1).unwrap();
        let b = rotate_map90(&rot_conv_forward(&x, &k, 1, 1).unwrap()).unwrap();
        assert!(a.max_abs_diff(&b).unwrap() < 1e-12);
    }
}
