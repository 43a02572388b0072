use rand::Rng;

use super::tensor::Tensor;
use crate::error::{Error, Result};

/// Valid-padding, stride-1 convolution (cross-correlation, no kernel flip).
#[derive(Debug, Clone, PartialEq)]
pub struct ConvLayer {
    pub(crate) filters: usize,
    pub(crate) in_channels: usize,
    pub(crate) kernel: usize,
    /// `[filters, in_channels, kernel, kernel]`
    pub(crate) weights: Tensor,
    /// `[filters]`
    pub(crate) bias: Tensor,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvGrads {
    pub input: Tensor,
    pub weights: Tensor,
    pub bias: Tensor,
}

impl ConvLayer {
    pub fn new(weights: Tensor, bias: Tensor) -> Result<Self> {
        let [filters, in_channels, kh, kw] = weights.shape()[..] else {
            return Err(Error::dim(
                "conv2d",
                format!("weights must be [F, C, k, k], got {:?}", weights.shape()),
            ));
        };
        if kh != kw {
            return Err(Error::dim("conv2d", format!("kernel must be square, got {kh}x{kw}")));
        }
        bias.ensure_shape(&[filters], "conv2d bias")?;
        Ok(ConvLayer {
            filters,
            in_channels,
            kernel: kh,
            weights,
            bias,
        })
    }

    /// Glorot-uniform weights, zero bias.
    pub fn init<R: Rng>(filters: usize, in_channels: usize, kernel: usize, rng: &mut R) -> Self {
        let area = kernel * kernel;
        let bound = super::glorot_bound(in_channels * area, filters * area);
        let shape = [filters, in_channels, kernel, kernel];
        let data = (0..shape.iter().product::<usize>())
            .map(|_| rng.gen_range(-bound..=bound))
            .collect();
        ConvLayer {
            filters,
            in_channels,
            kernel,
            weights: Tensor::from_parts(shape.to_vec(), data),
            bias: Tensor::zeros(&[filters]),
        }
    }

    pub fn filters(&self) -> usize {
        self.filters
    }

    pub fn in_channels(&self) -> usize {
        self.in_channels
    }

    pub fn kernel(&self) -> usize {
        self.kernel
    }

    pub fn weights(&self) -> &Tensor {
        &self.weights
    }

    pub fn bias(&self) -> &Tensor {
        &self.bias
    }

    pub fn output_shape(&self, height: usize, width: usize) -> Result<[usize; 3]> {
        if height < self.kernel || width < self.kernel {
            return Err(Error::dim(
                "conv2d",
                format!("kernel {k}x{k} exceeds input {height}x{width}", k = self.kernel),
            ));
        }
        Ok([self.filters, height - self.kernel + 1, width - self.kernel + 1])
    }

    fn check_input(&self, input: &Tensor) -> Result<(usize, usize, usize)> {
        let (c, h, w) = input.dims3("conv2d input")?;
        if c != self.in_channels {
            return Err(Error::dim(
                "conv2d",
                format!("input has {c} channels, layer expects {}", self.in_channels),
            ));
        }
        Ok((c, h, w))
    }
}

pub fn conv2d_forward(input: &Tensor, layer: &ConvLayer) -> Result<Tensor> {
    let (channels, h, w) = layer.check_input(input)?;
    let [filters, oh, ow] = layer.output_shape(h, w)?;
    let k = layer.kernel;
    let x = input.data();
    let wt = layer.weights.data();
    let mut out = vec![0.0; filters * oh * ow];
    for f in 0..filters {
        let b = layer.bias.data()[f];
        let plane = &mut out[f * oh * ow..(f + 1) * oh * ow];
        plane.fill(b);
        for c in 0..channels {
            let xin = &x[c * h * w..(c + 1) * h * w];
            for i in 0..k {
                for j in 0..k {
                    let wv = wt[((f * channels + c) * k + i) * k + j];
                    for y in 0..oh {
                        let row = &xin[(y + i) * w + j..(y + i) * w + j + ow];
                        let orow = &mut plane[y * ow..(y + 1) * ow];
                        for (o, &v) in orow.iter_mut().zip(row) {
                            *o += wv * v;
                        }
                    }
                }
            }
        }
    }
    Ok(Tensor::from_parts(vec![filters, oh, ow], out))
}

/// Gradients of a loss with respect to the convolution's input, weights
/// and bias, given `upstream` = d loss / d output.
pub fn conv2d_backward(input: &Tensor, layer: &ConvLayer, upstream: &Tensor) -> Result<ConvGrads> {
    let (channels, h, w) = layer.check_input(input)?;
    let out_shape = layer.output_shape(h, w)?;
    upstream.ensure_shape(&out_shape, "conv2d upstream gradient")?;
    let [filters, oh, ow] = out_shape;
    let k = layer.kernel;
    let x = input.data();
    let wt = layer.weights.data();
    let g = upstream.data();

    let mut grad_in = vec![0.0; x.len()];
    let mut grad_w = vec![0.0; wt.len()];
    let mut grad_b = vec![0.0; filters];

    for f in 0..filters {
        let gplane = &g[f * oh * ow..(f + 1) * oh * ow];
        grad_b[f] = gplane.iter().sum();
        for c in 0..channels {
            let xin = &x[c * h * w..(c + 1) * h * w];
            let gin = &mut grad_in[c * h * w..(c + 1) * h * w];
            for i in 0..k {
                for j in 0..k {
                    let widx = ((f * channels + c) * k + i) * k + j;
                    let wv = wt[widx];
                    let mut acc = 0.0;
                    for y in 0..oh {
                        let base = (y + i) * w + j;
                        let grow = &gplane[y * ow..(y + 1) * ow];
                        for (xo, (&gv, &xv)) in grow.iter().zip(&xin[base..base + ow]).enumerate() {
                            acc += gv * xv;
                            gin[base + xo] += gv * wv;
                        }
                    }
                    grad_w[widx] = acc;
                }
            }
        }
    }

    Ok(ConvGrads {
        input: Tensor::from_parts(input.shape().to_vec(), grad_in),
        weights: Tensor::from_parts(layer.weights.shape().to_vec(), grad_w),
        bias: Tensor::from_parts(vec![filters], grad_b),
    })
}
