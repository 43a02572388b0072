use rand::Rng;

use super::activation::Activation;
use super::tensor::Tensor;
use crate::error::{Error, Result};

/// Fully connected layer: `y = activation(W x + b)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer {
    /// `[out_units, in_units]`
    pub(crate) weights: Tensor,
    /// `[out_units]`
    pub(crate) bias: Tensor,
    pub(crate) activation: Activation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseGrads {
    pub input: Tensor,
    pub weights: Tensor,
    pub bias: Tensor,
}

impl DenseLayer {
    pub fn new(weights: Tensor, bias: Tensor, activation: Activation) -> Result<Self> {
        let [out_units, _] = weights.shape()[..] else {
            return Err(Error::dim(
                "dense",
                format!("weights must be [out, in], got {:?}", weights.shape()),
            ));
        };
        bias.ensure_shape(&[out_units], "dense bias")?;
        Ok(DenseLayer {
            weights,
            bias,
            activation,
        })
    }

    pub fn init<R: Rng>(in_units: usize, out_units: usize, activation: Activation, rng: &mut R) -> Self {
        let bound = super::glorot_bound(in_units, out_units);
        let data = (0..in_units * out_units)
            .map(|_| rng.gen_range(-bound..=bound))
            .collect();
        DenseLayer {
            weights: Tensor::from_parts(vec![out_units, in_units], data),
            bias: Tensor::zeros(&[out_units]),
            activation,
        }
    }

    pub fn in_units(&self) -> usize {
        self.weights.shape()[1]
    }

    pub fn out_units(&self) -> usize {
        self.weights.shape()[0]
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn weights(&self) -> &Tensor {
        &self.weights
    }

    pub fn bias(&self) -> &Tensor {
        &self.bias
    }

    fn check_input(&self, input: &Tensor) -> Result<()> {
        if input.shape() != [self.in_units()] {
            return Err(Error::dim(
                "dense",
                format!("expected input of length {}, got shape {:?}", self.in_units(), input.shape()),
            ));
        }
        Ok(())
    }
}

/// `z = W x + b`, before the activation.
pub fn dense_pre_activation(input: &Tensor, layer: &DenseLayer) -> Result<Tensor> {
    layer.check_input(input)?;
    let n_in = layer.in_units();
    let x = input.data();
    let z = layer
        .weights
        .data()
        .chunks_exact(n_in)
        .zip(layer.bias.data())
        .map(|(row, &b)| row.iter().zip(x).fold(b, |acc, (w, v)| acc + w * v))
        .collect();
    Ok(Tensor::from_parts(vec![layer.out_units()], z))
}

pub fn dense_forward(input: &Tensor, layer: &DenseLayer) -> Result<Tensor> {
    let mut z = dense_pre_activation(input, layer)?;
    for v in z.data_mut() {
        *v = layer.activation.value(*v);
    }
    Ok(z)
}

/// Chain rule through the activation and the affine map; `upstream` is
/// d loss / d (activated output).
pub fn dense_backward(input: &Tensor, layer: &DenseLayer, upstream: &Tensor) -> Result<DenseGrads> {
    let z = dense_pre_activation(input, layer)?;
    upstream.ensure_shape(z.shape(), "dense upstream gradient")?;
    let delta: Vec<f64> = z
        .data()
        .iter()
        .zip(upstream.data())
        .map(|(&zv, &g)| g * layer.activation.apply(zv).1)
        .collect();
    Ok(affine_backward(input, layer, delta))
}

/// Backward pass through `W x + b` given d loss / d z.
pub(crate) fn affine_backward(input: &Tensor, layer: &DenseLayer, delta: Vec<f64>) -> DenseGrads {
    let n_in = layer.in_units();
    let x = input.data();
    let mut grad_in = vec![0.0; n_in];
    let mut grad_w = vec![0.0; layer.weights.len()];
    for ((&d, wrow), gwrow) in delta
        .iter()
        .zip(layer.weights.data().chunks_exact(n_in))
        .zip(grad_w.chunks_exact_mut(n_in))
    {
        if d == 0.0 {
            continue;
        }
        for ((gi, gw), (&w, &xv)) in grad_in.iter_mut().zip(gwrow.iter_mut()).zip(wrow.iter().zip(x)) {
            *gi += d * w;
            *gw = d * xv;
        }
    }
    DenseGrads {
        input: Tensor::from_parts(vec![n_in], grad_in),
        weights: Tensor::from_parts(layer.weights.shape().to_vec(), grad_w),
        bias: Tensor::from_parts(vec![delta.len()], delta),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn layer(w: &[f64], rows: usize, b: &[f64], act: Activation) -> DenseLayer {
        let cols = w.len() / rows;
        DenseLayer::new(
            Tensor::new(vec![rows, cols], w.to_vec()).unwrap(),
            Tensor::vector(b.to_vec()).unwrap(),
            act,
        )
        .unwrap()
    }

    #[test]
    fn neuron_is_weighted_sum_plus_bias() {
        let l = layer(&[1.0, 2.0], 1, &[5.0], Activation::Relu);
        let x = Tensor::vector(vec![3.0, 4.0]).unwrap();
        assert_eq!(dense_pre_activation(&x, &l).unwrap().data(), &[16.0]);
        assert_eq!(dense_forward(&x, &l).unwrap().data(), &[16.0]);
    }

    #[test]
    fn zero_weights_through_activations() {
        let x = Tensor::vector(vec![3.0, -4.0]).unwrap();
        let s = layer(&[0.0, 0.0], 1, &[0.0], Activation::Sigmoid);
        assert_eq!(dense_forward(&x, &s).unwrap().data(), &[0.5]);
        let r = layer(&[0.0, 0.0], 1, &[-1.0], Activation::Relu);
        assert_eq!(dense_forward(&x, &r).unwrap().data(), &[0.0]);
    }

    #[test]
    fn length_mismatch_is_rejected() {
        let l = layer(&[1.0, 2.0], 1, &[0.0], Activation::Relu);
        let x = Tensor::vector(vec![1.0, 2.0, 3.0]).unwrap();
        assert!(matches!(dense_forward(&x, &l), Err(Error::Dimension { .. })));
        let x = Tensor::vector(vec![1.0, 2.0]).unwrap();
        assert!(dense_backward(&x, &l, &Tensor::zeros(&[2])).is_err());
    }

    #[test]
    fn zero_upstream_gives_zero_gradients() {
        let l = layer(&[0.3, -0.2, 0.1, 0.4], 2, &[0.1, 0.2], Activation::Sigmoid);
        let x = Tensor::vector(vec![1.0, 2.0]).unwrap();
        let g = dense_backward(&x, &l, &Tensor::zeros(&[2])).unwrap();
        assert!(g.input.data().iter().chain(g.weights.data()).chain(g.bias.data()).all(|&v| v == 0.0));
    }

    #[test]
    fn closed_relu_gate_blocks_gradient() {
        let l = layer(&[1.0, 1.0], 1, &[-10.0], Activation::Relu);
        let x = Tensor::vector(vec![1.0, 2.0]).unwrap();
        let g = dense_backward(&x, &l, &Tensor::vector(vec![1.0]).unwrap()).unwrap();
        assert_eq!(g.input.data(), &[0.0, 0.0]);
        assert_eq!(g.weights.data(), &[0.0, 0.0]);
        assert_eq!(g.bias.data(), &[0.0]);
    }

    #[test]
    fn hand_evaluated_gradient() {
        // z = 2*1 + (-1)*3 + 4 = 3, relu open
        let l = layer(&[2.0, -1.0], 1, &[4.0], Activation::Relu);
        let x = Tensor::vector(vec![1.0, 3.0]).unwrap();
        let g = dense_backward(&x, &l, &Tensor::vector(vec![0.5]).unwrap()).unwrap();
        assert_eq!(g.input.data(), &[1.0, -0.5]);
        assert_eq!(g.weights.data(), &[0.5, 1.5]);
        assert_eq!(g.bias.data(), &[0.5]);
    }
}
