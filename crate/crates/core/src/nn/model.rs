use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::activation::Activation;
use super::conv::{conv2d_backward, conv2d_forward, ConvGrads, ConvLayer};
use super::dense::{affine_backward, dense_backward, dense_pre_activation, DenseGrads, DenseLayer};
use super::pool::{maxpool2d_backward, maxpool2d_forward, ArgmaxMap, PoolSpec};
use super::tensor::Tensor;
use crate::error::{Error, Result};

/// Image dimensions the model was built for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InputSpec {
    pub height: usize,
    pub width: usize,
    pub channels: usize,
}

impl InputSpec {
    pub fn new(height: usize, width: usize, channels: usize) -> Self {
        InputSpec { height, width, channels }
    }

    /// Tensor layout `[C, H, W]`.
    pub fn tensor_shape(&self) -> [usize; 3] {
        [self.channels, self.height, self.width]
    }
}

/// Hyperparameters of the reference stack: conv, max-pool, flatten,
/// dense relu, dense sigmoid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Architecture {
    pub input: InputSpec,
    pub filters: usize,
    pub kernel: usize,
    pub pool_window: usize,
    pub hidden_units: usize,
}

impl Default for Architecture {
    fn default() -> Self {
        Architecture {
            input: InputSpec::new(32, 32, 1),
            filters: 8,
            kernel: 3,
            pool_window: 2,
            hidden_units: 128,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    input: InputSpec,
    conv: ConvLayer,
    pool: PoolSpec,
    hidden: DenseLayer,
    output: DenseLayer,
}

/// Intermediate values from one forward pass, kept for backpropagation.
#[derive(Debug, Clone)]
pub struct ForwardTrace {
    pub input: Tensor,
    pub conv_out: Tensor,
    pub argmax: ArgmaxMap,
    pub flat: Tensor,
    pub hidden_out: Tensor,
    pub output_pre: f64,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelGrads {
    pub conv: ConvGrads,
    pub hidden: DenseGrads,
    pub output: DenseGrads,
}

impl ModelGrads {
    /// Parameter gradients in the same order as [`Model::parameters`].
    pub fn parameter_tensors(&self) -> [&Tensor; 6] {
        [
            &self.conv.weights,
            &self.conv.bias,
            &self.hidden.weights,
            &self.hidden.bias,
            &self.output.weights,
            &self.output.bias,
        ]
    }

    pub(crate) fn accumulate(&mut self, other: &ModelGrads) {
        let pairs = [
            (&mut self.conv.weights, &other.conv.weights),
            (&mut self.conv.bias, &other.conv.bias),
            (&mut self.hidden.weights, &other.hidden.weights),
            (&mut self.hidden.bias, &other.hidden.bias),
            (&mut self.output.weights, &other.output.weights),
            (&mut self.output.bias, &other.output.bias),
        ];
        for (acc, g) in pairs {
            for (a, b) in acc.data_mut().iter_mut().zip(g.data()) {
                *a += b;
            }
        }
    }
}

impl Model {
    /// Seeded Glorot-uniform initialisation with zero biases.
    pub fn new(arch: Architecture, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let InputSpec { height, width, channels } = arch.input;
        if height == 0 || width == 0 || channels == 0 {
            return Err(Error::Input("input dimensions must be positive".into()));
        }
        if arch.filters == 0 || arch.kernel == 0 || arch.hidden_units == 0 {
            return Err(Error::Input("filters, kernel and hidden units must be positive".into()));
        }
        let conv = ConvLayer::init(arch.filters, channels, arch.kernel, &mut rng);
        let pool = PoolSpec::new(arch.pool_window);
        let [f, ch, cw] = conv.output_shape(height, width)?;
        let flat: usize = pool.output_shape(f, ch, cw)?.iter().product();
        let hidden = DenseLayer::init(flat, arch.hidden_units, Activation::Relu, &mut rng);
        let output = DenseLayer::init(arch.hidden_units, 1, Activation::Sigmoid, &mut rng);
        Ok(Model {
            input: arch.input,
            conv,
            pool,
            hidden,
            output,
        })
    }

    /// Assembles a model from explicit layers, checking that every stage's
    /// output shape feeds the next.
    pub fn from_layers(
        input: InputSpec,
        conv: ConvLayer,
        pool: PoolSpec,
        hidden: DenseLayer,
        output: DenseLayer,
    ) -> Result<Self> {
        if conv.in_channels() != input.channels {
            return Err(Error::dim(
                "model",
                format!("conv expects {} channels, input has {}", conv.in_channels(), input.channels),
            ));
        }
        let [f, ch, cw] = conv.output_shape(input.height, input.width)?;
        let flat: usize = pool.output_shape(f, ch, cw)?.iter().product();
        if hidden.in_units() != flat {
            return Err(Error::dim(
                "model",
                format!("flatten yields {flat} values, hidden layer expects {}", hidden.in_units()),
            ));
        }
        if hidden.activation() != Activation::Relu {
            return Err(Error::Input("hidden dense layer must use relu".into()));
        }
        if output.in_units() != hidden.out_units() {
            return Err(Error::dim(
                "model",
                format!(
                    "hidden layer yields {} values, output layer expects {}",
                    hidden.out_units(),
                    output.in_units()
                ),
            ));
        }
        if output.out_units() != 1 || output.activation() != Activation::Sigmoid {
            return Err(Error::Input("output layer must be a single sigmoid unit".into()));
        }
        Ok(Model {
            input,
            conv,
            pool,
            hidden,
            output,
        })
    }

    pub fn input_spec(&self) -> InputSpec {
        self.input
    }

    pub fn conv(&self) -> &ConvLayer {
        &self.conv
    }

    pub fn pool(&self) -> PoolSpec {
        self.pool
    }

    pub fn hidden(&self) -> &DenseLayer {
        &self.hidden
    }

    pub fn output(&self) -> &DenseLayer {
        &self.output
    }

    /// Learnable tensors: conv weights, conv bias, hidden weights, hidden
    /// bias, output weights, output bias.
    pub fn parameters(&self) -> [&Tensor; 6] {
        [
            &self.conv.weights,
            &self.conv.bias,
            &self.hidden.weights,
            &self.hidden.bias,
            &self.output.weights,
            &self.output.bias,
        ]
    }

    pub(crate) fn parameters_mut(&mut self) -> [&mut Tensor; 6] {
        [
            &mut self.conv.weights,
            &mut self.conv.bias,
            &mut self.hidden.weights,
            &mut self.hidden.bias,
            &mut self.output.weights,
            &mut self.output.bias,
        ]
    }

    pub fn parameter_count(&self) -> usize {
        self.parameters().iter().map(|t| t.len()).sum()
    }

    pub fn forward(&self, image: &Tensor) -> Result<ForwardTrace> {
        image.ensure_shape(&self.input.tensor_shape(), "model input")?;
        let conv_out = conv2d_forward(image, &self.conv)?;
        let (pooled, argmax) = maxpool2d_forward(&conv_out, self.pool)?;
        let flat = pooled.flatten();
        let mut hidden_out = dense_pre_activation(&flat, &self.hidden)?;
        for v in hidden_out.data_mut() {
            *v = self.hidden.activation.value(*v);
        }
        let output_pre = dense_pre_activation(&hidden_out, &self.output)?.data()[0];
        let probability = open_unit(self.output.activation.value(output_pre));
        Ok(ForwardTrace {
            input: image.clone(),
            conv_out,
            argmax,
            flat,
            hidden_out,
            output_pre,
            probability,
        })
    }

    /// Probability that the image shows fire, strictly inside (0, 1).
    pub fn predict(&self, image: &Tensor) -> Result<f64> {
        Ok(self.forward(image)?.probability)
    }

    /// Backpropagates `dloss_dp` (d loss / d probability) through the stack.
    pub fn backward(&self, trace: &ForwardTrace, dloss_dp: f64) -> Result<ModelGrads> {
        let (_, dsig) = self.output.activation.apply(trace.output_pre);
        let output = affine_backward(&trace.hidden_out, &self.output, vec![dloss_dp * dsig]);
        let hidden = dense_backward(&trace.flat, &self.hidden, &output.input)?;
        let pooled_grad = hidden.input.clone().reshape(trace.argmax.output_shape.clone())?;
        let conv_grad_out = maxpool2d_backward(&trace.argmax, &pooled_grad, trace.conv_out.shape())?;
        let conv = conv2d_backward(&trace.input, &self.conv, &conv_grad_out)?;
        Ok(ModelGrads { conv, hidden, output })
    }

    /// Binary cross-entropy of one labelled image and its parameter gradients.
    pub fn loss_and_grads(&self, image: &Tensor, label: f64) -> Result<(f64, f64, ModelGrads)> {
        let trace = self.forward(image)?;
        let (loss, dloss_dp) = super::loss::bce(label, trace.probability)?;
        let grads = self.backward(&trace, dloss_dp)?;
        Ok((loss, trace.probability, grads))
    }

    /// `param -= step * grad` for every learnable value.
    pub(crate) fn apply_gradients(&mut self, grads: &ModelGrads, step: f64) {
        for (p, g) in self.parameters_mut().into_iter().zip(grads.parameter_tensors()) {
            for (pv, gv) in p.data_mut().iter_mut().zip(g.data()) {
                *pv -= step * gv;
            }
        }
    }

    /// Overwrites every learnable value; `values` follows [`Model::parameters`] order.
    pub fn set_parameters(&mut self, values: &[f64]) -> Result<()> {
        if values.len() != self.parameter_count() {
            return Err(Error::dim(
                "model parameters",
                format!("expected {} values, got {}", self.parameter_count(), values.len()),
            ));
        }
        let mut offset = 0;
        for p in self.parameters_mut() {
            let n = p.len();
            p.data_mut().copy_from_slice(&values[offset..offset + n]);
            offset += n;
        }
        Ok(())
    }

    pub fn flat_parameters(&self) -> Vec<f64> {
        self.parameters().iter().flat_map(|t| t.data().iter().copied()).collect()
    }
}

/// Keeps a saturated sigmoid strictly inside (0, 1).
fn open_unit(p: f64) -> f64 {
    p.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn small_arch() -> Architecture {
        Architecture {
            input: InputSpec::new(8, 8, 1),
            filters: 2,
            kernel: 3,
            pool_window: 2,
            hidden_units: 128,
        }
    }

    fn random_image(spec: InputSpec, seed: u64) -> Tensor {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let shape = spec.tensor_shape();
        Tensor::new(shape.to_vec(), (0..shape.iter().product()).map(|_| rng.gen::<f64>()).collect()).unwrap()
    }

    #[test]
    fn reference_architecture_shapes() {
        let m = Model::new(Architecture::default(), 0).unwrap();
        assert_eq!(m.conv().weights().shape(), &[8, 1, 3, 3]);
        // 32 -> 30 (conv 3x3) -> 15 (pool 2): 8 * 15 * 15
        assert_eq!(m.hidden().weights().shape(), &[128, 1800]);
        assert_eq!(m.output().weights().shape(), &[1, 128]);
        let t = m.forward(&random_image(m.input_spec(), 1)).unwrap();
        assert_eq!(t.conv_out.shape(), &[8, 30, 30]);
        assert_eq!(t.flat.shape(), &[1800]);
        assert_eq!(t.hidden_out.shape(), &[128]);
    }

    #[test]
    fn prediction_is_a_probability() {
        let m = Model::new(small_arch(), 4).unwrap();
        for s in 0..20 {
            let p = m.predict(&random_image(m.input_spec(), s)).unwrap();
            assert!(p > 0.0 && p < 1.0);
        }
    }

    #[test]
    fn zero_parameters_predict_one_half() {
        let mut m = Model::new(small_arch(), 4).unwrap();
        m.set_parameters(&vec![0.0; m.parameter_count()]).unwrap();
        assert_eq!(m.predict(&random_image(m.input_spec(), 9)).unwrap(), 0.5);
    }

    #[test]
    fn same_seed_same_model_and_output() {
        let a = Model::new(small_arch(), 42).unwrap();
        let b = Model::new(small_arch(), 42).unwrap();
        assert_eq!(a, b);
        let img = random_image(a.input_spec(), 3);
        assert_eq!(a.predict(&img).unwrap().to_bits(), b.predict(&img).unwrap().to_bits());
        assert_ne!(a, Model::new(small_arch(), 43).unwrap());
    }

    #[test]
    fn wrong_image_shape_is_rejected() {
        let m = Model::new(small_arch(), 0).unwrap();
        assert!(matches!(m.predict(&Tensor::zeros(&[1, 8, 9])), Err(Error::Dimension { .. })));
    }

    #[test]
    fn from_layers_checks_the_chain() {
        let m = Model::new(small_arch(), 0).unwrap();
        let ok = Model::from_layers(m.input_spec(), m.conv().clone(), m.pool(), m.hidden().clone(), m.output().clone());
        assert_eq!(ok.unwrap(), m);
        let bad = Model::from_layers(InputSpec::new(12, 12, 1), m.conv().clone(), m.pool(), m.hidden().clone(), m.output().clone());
        assert!(bad.is_err());
    }

    #[test]
    fn saturated_output_stays_open() {
        assert!(open_unit(1.0) < 1.0);
        assert!(open_unit(0.0) > 0.0);
        assert_eq!(open_unit(0.25), 0.25);
    }
}
