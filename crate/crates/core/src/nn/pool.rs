use serde::{Deserialize, Serialize};

use super::tensor::Tensor;
use crate::error::{Error, Result};

/// Square max-pooling window. Trailing rows/columns that do not fill a
/// whole window are dropped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PoolSpec {
    pub window: usize,
    pub stride: usize,
}

impl PoolSpec {
    pub fn new(window: usize) -> Self {
        PoolSpec { window, stride: window }
    }

    pub fn with_stride(window: usize, stride: usize) -> Self {
        PoolSpec { window, stride }
    }

    pub fn output_shape(&self, channels: usize, height: usize, width: usize) -> Result<[usize; 3]> {
        if self.window == 0 || self.stride == 0 {
            return Err(Error::Input("pool window and stride must be positive".into()));
        }
        if height < self.window || width < self.window {
            return Err(Error::dim(
                "maxpool2d",
                format!("window {w}x{w} exceeds input {height}x{width}", w = self.window),
            ));
        }
        Ok([
            channels,
            (height - self.window) / self.stride + 1,
            (width - self.window) / self.stride + 1,
        ])
    }
}

/// Flat input index of the winning element for every pooled output.
#[derive(Debug, Clone, PartialEq)]
pub struct ArgmaxMap {
    pub(crate) input_shape: Vec<usize>,
    pub(crate) output_shape: Vec<usize>,
    pub(crate) indices: Vec<usize>,
}

impl ArgmaxMap {
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }
}

pub fn maxpool2d_forward(input: &Tensor, spec: PoolSpec) -> Result<(Tensor, ArgmaxMap)> {
    let (c, h, w) = input.dims3("maxpool2d input")?;
    let out_shape = spec.output_shape(c, h, w)?;
    let [_, oh, ow] = out_shape;
    let x = input.data();
    let mut out = Vec::with_capacity(c * oh * ow);
    let mut indices = Vec::with_capacity(c * oh * ow);
    for ch in 0..c {
        for oy in 0..oh {
            for ox in 0..ow {
                let mut best_idx = (ch * h + oy * spec.stride) * w + ox * spec.stride;
                let mut best = x[best_idx];
                for i in 0..spec.window {
                    for j in 0..spec.window {
                        let idx = (ch * h + oy * spec.stride + i) * w + ox * spec.stride + j;
                        // strict comparison keeps the first maximum in row-major order
                        if x[idx] > best {
                            best = x[idx];
                            best_idx = idx;
                        }
                    }
                }
                out.push(best);
                indices.push(best_idx);
            }
        }
    }
    let map = ArgmaxMap {
        input_shape: input.shape().to_vec(),
        output_shape: out_shape.to_vec(),
        indices,
    };
    Ok((Tensor::from_parts(out_shape.to_vec(), out), map))
}

/// Routes each upstream gradient to the input position that won the max.
pub fn maxpool2d_backward(map: &ArgmaxMap, upstream: &Tensor, input_shape: &[usize]) -> Result<Tensor> {
    if map.input_shape != input_shape {
        return Err(Error::dim(
            "maxpool2d backward",
            format!("argmax map was built for {:?}, not {input_shape:?}", map.input_shape),
        ));
    }
    upstream.ensure_shape(&map.output_shape, "maxpool2d upstream gradient")?;
    let mut grad = Tensor::zeros(input_shape);
    let g = grad.data_mut();
    for (&idx, &u) in map.indices.iter().zip(upstream.data()) {
        g[idx] += u;
    }
    Ok(grad)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn t(shape: &[usize], data: &[f64]) -> Tensor {
        Tensor::new(shape.to_vec(), data.to_vec()).unwrap()
    }

    #[test]
    fn takes_window_maximum() {
        let (out, map) = maxpool2d_forward(&t(&[1, 2, 2], &[1.0, 2.0, 3.0, 4.0]), PoolSpec::new(2)).unwrap();
        assert_eq!(out.data(), &[4.0]);
        assert_eq!(map.indices(), &[3]);
    }

    #[test]
    fn constant_input_passes_through() {
        let (out, _) = maxpool2d_forward(&Tensor::filled(&[2, 4, 6], 1.25), PoolSpec::new(2)).unwrap();
        assert_eq!(out.shape(), &[2, 2, 3]);
        assert!(out.data().iter().all(|&v| v == 1.25));
    }

    #[test]
    fn ties_resolve_to_first_in_row_major_order() {
        let (out, map) = maxpool2d_forward(&Tensor::filled(&[1, 2, 2], 5.0), PoolSpec::new(2)).unwrap();
        assert_eq!(out.data(), &[5.0]);
        assert_eq!(map.indices(), &[0]);
    }

    #[test]
    fn drops_trailing_remainder() {
        let input = t(&[1, 3, 5], &(0..15).map(f64::from).collect::<Vec<_>>());
        let (out, _) = maxpool2d_forward(&input, PoolSpec::new(2)).unwrap();
        assert_eq!(out.shape(), &[1, 1, 2]);
        assert_eq!(out.data(), &[6.0, 8.0]);
    }

    #[test]
    fn window_larger_than_input_is_rejected() {
        let r = maxpool2d_forward(&Tensor::zeros(&[1, 2, 3]), PoolSpec::new(3));
        assert!(matches!(r, Err(Error::Dimension { .. })));
    }

    #[test]
    fn backward_routes_to_argmax() {
        let input = t(&[1, 2, 2], &[1.0, 2.0, 3.0, 4.0]);
        let (_, map) = maxpool2d_forward(&input, PoolSpec::new(2)).unwrap();
        let g = maxpool2d_backward(&map, &t(&[1, 1, 1], &[1.0]), input.shape()).unwrap();
        assert_eq!(g.data(), &[0.0, 0.0, 0.0, 1.0]);
        let g = maxpool2d_backward(&map, &Tensor::zeros(&[1, 1, 1]), input.shape()).unwrap();
        assert!(g.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn stale_map_is_rejected() {
        let (_, map) = maxpool2d_forward(&Tensor::zeros(&[1, 4, 4]), PoolSpec::new(2)).unwrap();
        assert!(maxpool2d_backward(&map, &Tensor::zeros(&[1, 2, 2]), &[1, 6, 6]).is_err());
        assert!(maxpool2d_backward(&map, &Tensor::zeros(&[1, 3, 3]), &[1, 4, 4]).is_err());
    }

    proptest! {
        #[test]
        fn gradient_is_conserved(
            c in 1usize..3, h in 2usize..9, w in 2usize..9, window in 1usize..3,
            seed in any::<u64>(),
        ) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let input = Tensor::new(vec![c, h, w], (0..c * h * w).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap();
            let spec = PoolSpec::new(window);
            let (out, map) = maxpool2d_forward(&input, spec).unwrap();
            prop_assert_eq!(out.shape(), &[c, h / window, w / window][..]);
            let up = Tensor::new(out.shape().to_vec(), (0..out.len()).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap();
            let g = maxpool2d_backward(&map, &up, input.shape()).unwrap();
            // non-overlapping windows: every routed value lands on a distinct cell
            let mut routed: Vec<f64> = g.data().iter().copied().filter(|&v| v != 0.0).collect();
            let mut sent: Vec<f64> = up.data().iter().copied().filter(|&v| v != 0.0).collect();
            routed.sort_by(f64::total_cmp);
            sent.sort_by(f64::total_cmp);
            prop_assert_eq!(routed, sent);
        }
    }
}
