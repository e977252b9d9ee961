//! Convolution kernels: im2col lowering onto `dgemm`.

/// `c = alpha · op(a) · op(b) + beta · c` with `op(a)` of shape `m × k`
/// and `op(b)` of shape `k × n`, all row-major.
#[allow(clippy::too_many_arguments)]
pub(crate) fn gemm(
    m: usize,
    k: usize,
    n: usize,
    a: &[f64],
    transpose_a: bool,
    b: &[f64],
    transpose_b: bool,
    beta: f64,
    c: &mut [f64],
) {
    debug_assert!(a.len() >= m * k && b.len() >= k * n && c.len() >= m * n);
    if m == 0 || n == 0 {
        return;
    }
    let (rsa, csa) = if transpose_a { (1, m as isize) } else { (k as isize, 1) };
    let (rsb, csb) = if transpose_b { (1, k as isize) } else { (n as isize, 1) };
    // SAFETY: the slices cover every index touched for the given extents and
    // strides, and `c` does not alias `a` or `b`.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            1.0,
            a.as_ptr(),
            rsa,
            csa,
            b.as_ptr(),
            rsb,
            csb,
            beta,
            c.as_mut_ptr(),
            n as isize,
            1,
        );
    }
}

/// Output extent and leading pad of a "same" convolution along one axis.
pub fn same_padding(n: usize, kernel: usize, stride: usize) -> (usize, usize) {
    let out = n.div_ceil(stride);
    let total = ((out - 1) * stride + kernel).saturating_sub(n);
    (out, total / 2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct ConvGeometry {
    pub channels: usize,
    pub height: usize,
    pub width: usize,
    pub kh: usize,
    pub kw: usize,
    pub stride: [usize; 2],
    pub pad: [usize; 2],
    pub out_h: usize,
    pub out_w: usize,
}

impl ConvGeometry {
    pub fn new(channels: usize, height: usize, width: usize, kh: usize, kw: usize, stride: [usize; 2]) -> Self {
        let (out_h, pad_h) = same_padding(height, kh, stride[0]);
        let (out_w, pad_w) = same_padding(width, kw, stride[1]);
        ConvGeometry {
            channels,
            height,
            width,
            kh,
            kw,
            stride,
            pad: [pad_h, pad_w],
            out_h,
            out_w,
        }
    }

    pub fn patch(&self) -> usize {
        self.channels * self.kh * self.kw
    }

    pub fn positions(&self) -> usize {
        self.out_h * self.out_w
    }

    /// Input coordinate read by output row `o` at kernel offset `k`, if inside.
    #[inline]
    fn source(o: usize, k: usize, stride: usize, pad: usize, n: usize) -> Option<usize> {
        let i = (o * stride + k) as isize - pad as isize;
        (i >= 0 && (i as usize) < n).then_some(i as usize)
    }

    /// Lowers one `[C, H, W]` image to `[C·kh·kw, out_h·out_w]`.
    pub fn im2col(&self, image: &[f64], cols: &mut [f64]) {
        let p = self.positions();
        for c in 0..self.channels {
            let plane = &image[c * self.height * self.width..(c + 1) * self.height * self.width];
            for ki in 0..self.kh {
                for kj in 0..self.kw {
                    let row = (c * self.kh + ki) * self.kw + kj;
                    let dst = &mut cols[row * p..(row + 1) * p];
                    for oh in 0..self.out_h {
                        let line = &mut dst[oh * self.out_w..(oh + 1) * self.out_w];
                        match Self::source(oh, ki, self.stride[0], self.pad[0], self.height) {
                            None => line.fill(0.0),
                            Some(ih) => {
                                let src = &plane[ih * self.width..(ih + 1) * self.width];
                                for (ow, v) in line.iter_mut().enumerate() {
                                    *v = match Self::source(ow, kj, self.stride[1], self.pad[1], self.width) {
                                        Some(iw) => src[iw],
                                        None => 0.0,
                                    };
                                }
                            }
                        }
                    }
                }
            }
        }
    }

    /// Adjoint of [`im2col`](Self::im2col): accumulates columns into an image gradient.
    pub fn col2im(&self, cols: &[f64], image: &mut [f64]) {
        let p = self.positions();
        for c in 0..self.channels {
            let plane = &mut image[c * self.height * self.width..(c + 1) * self.height * self.width];
            for ki in 0..self.kh {
                for kj in 0..self.kw {
                    let row = (c * self.kh + ki) * self.kw + kj;
                    let src = &cols[row * p..(row + 1) * p];
                    for oh in 0..self.out_h {
                        let Some(ih) = Self::source(oh, ki, self.stride[0], self.pad[0], self.height) else {
                            continue;
                        };
                        let dst = &mut plane[ih * self.width..(ih + 1) * self.width];
                        for (ow, &v) in src[oh * self.out_w..(oh + 1) * self.out_w].iter().enumerate() {
                            if let Some(iw) = Self::source(ow, kj, self.stride[1], self.pad[1], self.width) {
                                dst[iw] += v;
                            }
                        }
                    }
                }
            }
        }
    }
}
