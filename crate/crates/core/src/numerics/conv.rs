//! Valid (unpadded) 2-D cross-correlation and max pooling on `C×H×W` maps.

use crate::error::{Error, Result};

use super::Tensor;

/// Shape bookkeeping for one valid convolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConvGeometry {
    pub channels: usize,
    pub height: usize,
    pub width: usize,
    pub kernel: usize,
    pub stride: usize,
    pub out_h: usize,
    pub out_w: usize,
}

impl ConvGeometry {
    pub fn new(channels: usize, height: usize, width: usize, kernel: usize, stride: usize) -> Result<Self> {
        if stride == 0 || kernel == 0 {
            return Err(Error::Parameter(format!(
                "kernel and stride must be positive (kernel {kernel}, stride {stride})"
            )));
        }
        if kernel > height || kernel > width {
            return Err(Error::shape(
                "filter larger than input",
                &[channels, height, width],
                &[kernel, kernel],
            ));
        }
        Ok(ConvGeometry {
            channels,
            height,
            width,
            kernel,
            stride,
            out_h: (height - kernel) / stride + 1,
            out_w: (width - kernel) / stride + 1,
        })
    }

    /// Entries per patch, `C·k·k`.
    pub fn patch_len(&self) -> usize {
        self.channels * self.kernel * self.kernel
    }

    /// Output pixels per map, `H'·W'`.
    pub fn positions(&self) -> usize {
        self.out_h * self.out_w
    }

    pub fn input_len(&self) -> usize {
        self.channels * self.height * self.width
    }
}

/// Unrolls every receptive field into a row: `[H'·W' × C·k·k]`, row-major.
pub fn im2col(input: &[f64], g: &ConvGeometry) -> Vec<f64> {
    let k = g.kernel;
    let mut cols = Vec::with_capacity(g.positions() * g.patch_len());
    for oy in 0..g.out_h {
        for ox in 0..g.out_w {
            let y0 = oy * g.stride;
            let x0 = ox * g.stride;
            for c in 0..g.channels {
                let base = c * g.height * g.width;
                for ky in 0..k {
                    let row = base + (y0 + ky) * g.width + x0;
                    cols.extend_from_slice(&input[row..row + k]);
                }
            }
        }
    }
    cols
}

/// Adds patch-shaped gradients `[H'·W' × C·k·k]` back onto their input positions.
pub fn col2im_accumulate(patch_grads: &[f64], g: &ConvGeometry, out: &mut [f64]) {
    let k = g.kernel;
    let plen = g.patch_len();
    for oy in 0..g.out_h {
        for ox in 0..g.out_w {
            let p = oy * g.out_w + ox;
            let patch = &patch_grads[p * plen..(p + 1) * plen];
            let y0 = oy * g.stride;
            let x0 = ox * g.stride;
            let mut idx = 0;
            for c in 0..g.channels {
                let base = c * g.height * g.width;
                for ky in 0..k {
                    let row = base + (y0 + ky) * g.width + x0;
                    for kx in 0..k {
                        out[row + kx] += patch[idx];
                        idx += 1;
                    }
                }
            }
        }
    }
}

/// Filter bank `[K × C·k·k]` times patches `[P × C·k·k]`ᵀ, written as `[K × P]`.
pub(crate) fn conv_from_cols(filters: &[f64], num_filters: usize, cols: &[f64], g: &ConvGeometry) -> Vec<f64> {
    let plen = g.patch_len();
    let positions = g.positions();
    let mut out = vec![0.0; num_filters * positions];
    // SAFETY: buffers sized [K×plen], [positions×plen], [K×positions].
    unsafe {
        matrixmultiply::dgemm(
            num_filters,
            plen,
            positions,
            1.0,
            filters.as_ptr(),
            plen as isize,
            1,
            cols.as_ptr(),
            1,
            plen as isize,
            0.0,
            out.as_mut_ptr(),
            positions as isize,
            1,
        );
    }
    out
}

/// `[K × P] · [P × C·k·k]` into `out` (accumulating when `beta` is 1).
pub(crate) fn outer_from_cols(
    diff: &[f64],
    num_filters: usize,
    cols: &[f64],
    g: &ConvGeometry,
    alpha: f64,
    out: &mut [f64],
) {
    let plen = g.patch_len();
    let positions = g.positions();
    // SAFETY: buffers sized [K×positions], [positions×plen], [K×plen].
    unsafe {
        matrixmultiply::dgemm(
            num_filters,
            positions,
            plen,
            alpha,
            diff.as_ptr(),
            positions as isize,
            1,
            cols.as_ptr(),
            plen as isize,
            1,
            1.0,
            out.as_mut_ptr(),
            plen as isize,
            1,
        );
    }
}

/// Cross-correlation without padding: `[C×H×W] ⋆ [K×C×k×k] → [K×H'×W']`.
pub fn conv2d_valid(input: &Tensor, filters: &Tensor, stride: usize) -> Result<Tensor> {
    let (c, h, w) = match input.shape() {
        &[c, h, w] => (c, h, w),
        other => return Err(Error::shape("conv2d input must be C×H×W", other, &[0, 0, 0])),
    };
    let (k_out, fc, kh, kw) = match filters.shape() {
        &[k, fc, kh, kw] => (k, fc, kh, kw),
        other => return Err(Error::shape("conv2d filters must be K×C×k×k", other, &[0, 0, 0, 0])),
    };
    if fc != c || kh != kw {
        return Err(Error::shape("conv2d", input.shape(), filters.shape()));
    }
    let g = ConvGeometry::new(c, h, w, kh, stride)?;
    let cols = im2col(input.data(), &g);
    let out = conv_from_cols(filters.data(), k_out, &cols, &g);
    Tensor::new(vec![k_out, g.out_h, g.out_w], out)
}

/// Pooling geometry for `K×H×W` maps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PoolGeometry {
    pub maps: usize,
    pub height: usize,
    pub width: usize,
    pub size: usize,
    pub stride: usize,
    pub out_h: usize,
    pub out_w: usize,
}

impl PoolGeometry {
    pub fn new(maps: usize, height: usize, width: usize, size: usize, stride: usize) -> Result<Self> {
        if size == 0 || stride == 0 {
            return Err(Error::Parameter(format!(
                "pool size and stride must be positive (size {size}, stride {stride})"
            )));
        }
        if size > height || size > width {
            return Err(Error::shape(
                "pool window larger than map",
                &[maps, height, width],
                &[size, size],
            ));
        }
        Ok(PoolGeometry {
            maps,
            height,
            width,
            size,
            stride,
            out_h: (height - size) / stride + 1,
            out_w: (width - size) / stride + 1,
        })
    }

    pub fn output_len(&self) -> usize {
        self.maps * self.out_h * self.out_w
    }
}

/// Pools one sample; `argmax[i]` is the flat input index chosen for output `i`.
pub(crate) fn maxpool_slice(input: &[f64], g: &PoolGeometry, out: &mut [f64], argmax: &mut [usize]) {
    let mut o = 0;
    for m in 0..g.maps {
        let base = m * g.height * g.width;
        for oy in 0..g.out_h {
            for ox in 0..g.out_w {
                let mut best_idx = base + oy * g.stride * g.width + ox * g.stride;
                let mut best = input[best_idx];
                for dy in 0..g.size {
                    for dx in 0..g.size {
                        let idx = base + (oy * g.stride + dy) * g.width + ox * g.stride + dx;
                        // strict comparison keeps the first maximum in scan order
                        if input[idx] > best {
                            best = input[idx];
                            best_idx = idx;
                        }
                    }
                }
                out[o] = best;
                argmax[o] = best_idx;
                o += 1;
            }
        }
    }
}

/// Max pooling on `[K×H×W]`; ties resolve to the first index in row-major scan order.
pub fn maxpool2d(input: &Tensor, size: usize, stride: usize) -> Result<(Tensor, Vec<usize>)> {
    let (k, h, w) = match input.shape() {
        &[k, h, w] => (k, h, w),
        other => return Err(Error::shape("maxpool input must be K×H×W", other, &[0, 0, 0])),
    };
    let g = PoolGeometry::new(k, h, w, size, stride)?;
    let mut out = vec![0.0; g.output_len()];
    let mut argmax = vec![0; g.output_len()];
    maxpool_slice(input.data(), &g, &mut out, &mut argmax);
    Ok((Tensor::new(vec![k, g.out_h, g.out_w], out)?, argmax))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{sample_normal, Rng};

    fn loop_conv(input: &Tensor, filters: &Tensor, stride: usize) -> Tensor {
        let (c, h, w) = (input.shape()[0], input.shape()[1], input.shape()[2]);
        let (kn, k) = (filters.shape()[0], filters.shape()[2]);
        let oh = (h - k) / stride + 1;
        let ow = (w - k) / stride + 1;
        let x = input.data();
        let f = filters.data();
        let mut out = vec![0.0; kn * oh * ow];
        for fi in 0..kn {
            for oy in 0..oh {
                for ox in 0..ow {
                    let mut s = 0.0;
                    for ci in 0..c {
                        for ky in 0..k {
                            for kx in 0..k {
                                s += f[((fi * c + ci) * k + ky) * k + kx]
                                    * x[(ci * h + oy * stride + ky) * w + ox * stride + kx];
                            }
                        }
                    }
                    out[(fi * oh + oy) * ow + ox] = s;
                }
            }
        }
        Tensor::new(vec![kn, oh, ow], out).unwrap()
    }

    #[test]
    fn constant_field() {
        let x = Tensor::full(vec![1, 3, 3], 1.0);
        let f = Tensor::full(vec![1, 1, 2, 2], 1.0);
        let y = conv2d_valid(&x, &f, 1).unwrap();
        assert_eq!(y.shape(), &[1, 2, 2]);
        assert!(y.data().iter().all(|&v| v == 4.0));
    }

    #[test]
    fn selector_kernel() {
        let x = Tensor::new(vec![1, 3, 3], (1..=9).map(f64::from).collect()).unwrap();
        let f = Tensor::new(vec![1, 1, 2, 2], vec![1.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(conv2d_valid(&x, &f, 1).unwrap().data(), &[1.0, 2.0, 4.0, 5.0]);
    }

    #[test]
    fn filter_larger_than_input() {
        let x = Tensor::zeros(vec![1, 3, 3]);
        let f = Tensor::zeros(vec![1, 1, 4, 4]);
        assert!(matches!(conv2d_valid(&x, &f, 1), Err(Error::Shape { .. })));
    }

    #[test]
    fn matches_loop_oracle() {
        let mut rng = Rng::new(100);
        for trial in 0..50 {
            let stride = 1 + trial % 2;
            let x = sample_normal(&mut rng, 0.0, 1.0, &[3, 8, 8]).unwrap();
            let f = sample_normal(&mut rng, 0.0, 1.0, &[4, 3, 5, 5]).unwrap();
            let got = conv2d_valid(&x, &f, stride).unwrap();
            let want = loop_conv(&x, &f, stride);
            assert!(got.max_abs_diff(&want).unwrap() < 1e-12);
        }
    }

    #[test]
    fn col2im_is_adjoint_of_im2col() {
        let mut rng = Rng::new(5);
        let g = ConvGeometry::new(2, 6, 7, 3, 2).unwrap();
        let x = sample_normal(&mut rng, 0.0, 1.0, &[g.input_len()]).unwrap();
        let y = sample_normal(&mut rng, 0.0, 1.0, &[g.positions() * g.patch_len()]).unwrap();
        let lhs: f64 = im2col(x.data(), &g).iter().zip(y.data()).map(|(a, b)| a * b).sum();
        let mut back = vec![0.0; g.input_len()];
        col2im_accumulate(y.data(), &g, &mut back);
        let rhs: f64 = back.iter().zip(x.data()).map(|(a, b)| a * b).sum();
        assert!((lhs - rhs).abs() < 1e-10);
    }

    #[test]
    fn pool_simple() {
        let x = Tensor::new(vec![1, 2, 2], vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let (y, idx) = maxpool2d(&x, 2, 2).unwrap();
        assert_eq!(y.data(), &[4.0]);
        assert_eq!(idx, vec![3]);
    }

    #[test]
    fn pool_ties_take_first() {
        let x = Tensor::full(vec![1, 4, 4], 2.5);
        let (y, idx) = maxpool2d(&x, 2, 2).unwrap();
        assert!(y.data().iter().all(|&v| v == 2.5));
        assert_eq!(idx, vec![0, 2, 8, 10]);
    }

    #[test]
    fn pool_window_too_large() {
        let x = Tensor::zeros(vec![1, 2, 2]);
        assert!(matches!(maxpool2d(&x, 3, 1), Err(Error::Shape { .. })));
    }

    #[test]
    fn pool_matches_window_oracle() {
        let mut rng = Rng::new(8);
        let x = sample_normal(&mut rng, 0.0, 1.0, &[2, 6, 6]).unwrap();
        let (y, idx) = maxpool2d(&x, 2, 2).unwrap();
        let d = x.data();
        for m in 0..2 {
            for oy in 0..3 {
                for ox in 0..3 {
                    let window: Vec<usize> = (0..4)
                        .map(|t| m * 36 + (oy * 2 + t / 2) * 6 + ox * 2 + t % 2)
                        .collect();
                    let best = window.iter().map(|&i| d[i]).fold(f64::MIN, f64::max);
                    let o = (m * 3 + oy) * 3 + ox;
                    assert_eq!(y.data()[o], best);
                    assert_eq!(d[idx[o]], best);
                }
            }
        }
    }
}
