//! Central-difference verification of analytic gradients.
//!
//! Anything implementing [`GradientProbe`] exposes a flat vector of
//! differentiable values, a scalar loss and the analytic gradient of that
//! loss. [`gradient_check`] perturbs every value by `±h` and reports the
//! worst relative disagreement `|a - n| / max(|a|, |n|, 1e-8)`.

use super::conv::{conv2d_backward, conv2d_forward, ConvLayer};
use super::dense::{dense_backward, dense_forward, DenseLayer};
use super::loss::bce;
use super::model::Model;
use super::pool::{maxpool2d_backward, maxpool2d_forward, PoolSpec};
use super::tensor::Tensor;
use crate::error::{Error, Result};

pub trait GradientProbe {
    fn values(&self) -> Vec<f64>;
    fn set_values(&mut self, values: &[f64]) -> Result<()>;
    fn loss(&self) -> Result<f64>;
    fn gradient(&self) -> Result<Vec<f64>>;
}

const DENOMINATOR_FLOOR: f64 = 1e-8;

pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(DENOMINATOR_FLOOR)
}

/// Worst relative error between analytic and central-difference gradients.
pub fn gradient_check<P: GradientProbe + Clone>(probe: &P, h: f64) -> Result<f64> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::Domain(format!("finite-difference step must be positive, got {h}")));
    }
    let analytic = probe.gradient()?;
    let base = probe.values();
    if analytic.len() != base.len() {
        return Err(Error::dim(
            "gradient check",
            format!("{} gradients for {} values", analytic.len(), base.len()),
        ));
    }
    let mut shifted = probe.clone();
    let mut values = base.clone();
    let mut worst = 0.0f64;
    for i in 0..base.len() {
        values[i] = base[i] + h;
        shifted.set_values(&values)?;
        let plus = finite_loss(&shifted)?;
        values[i] = base[i] - h;
        shifted.set_values(&values)?;
        let minus = finite_loss(&shifted)?;
        values[i] = base[i];
        let numeric = (plus - minus) / (2.0 * h);
        worst = worst.max(relative_error(analytic[i], numeric));
    }
    Ok(worst)
}

fn finite_loss<P: GradientProbe>(probe: &P) -> Result<f64> {
    let l = probe.loss()?;
    if !l.is_finite() {
        return Err(Error::Numeric(format!("non-finite loss {l} while probing")));
    }
    Ok(l)
}

/// Scalar surrogate losses over a layer's output.
#[derive(Debug, Clone, PartialEq)]
pub enum ProbeLoss {
    /// `sum_k r_k * y_k`
    Projection(Vec<f64>),
    /// `0.5 * sum_k (y_k - t_k)^2`
    SquaredError(Vec<f64>),
}

impl ProbeLoss {
    fn check(&self, output: &[f64]) -> Result<()> {
        let n = match self {
            ProbeLoss::Projection(r) | ProbeLoss::SquaredError(r) => r.len(),
        };
        if n != output.len() {
            return Err(Error::dim("probe loss", format!("{n} coefficients for {} outputs", output.len())));
        }
        Ok(())
    }

    fn value(&self, output: &[f64]) -> Result<f64> {
        self.check(output)?;
        Ok(match self {
            ProbeLoss::Projection(r) => r.iter().zip(output).map(|(a, b)| a * b).sum(),
            ProbeLoss::SquaredError(t) => 0.5 * t.iter().zip(output).map(|(a, b)| (b - a) * (b - a)).sum::<f64>(),
        })
    }

    fn grad(&self, output: &Tensor) -> Result<Tensor> {
        self.check(output.data())?;
        let g = match self {
            ProbeLoss::Projection(r) => r.clone(),
            ProbeLoss::SquaredError(t) => output.data().iter().zip(t).map(|(y, t)| y - t).collect(),
        };
        Tensor::new(output.shape().to_vec(), g)
    }
}

fn concat(parts: &[&Tensor]) -> Vec<f64> {
    parts.iter().flat_map(|t| t.data().iter().copied()).collect()
}

fn scatter(values: &[f64], parts: &mut [&mut Tensor]) -> Result<()> {
    let total: usize = parts.iter().map(|t| t.len()).sum();
    if total != values.len() {
        return Err(Error::dim("probe values", format!("expected {total}, got {}", values.len())));
    }
    let mut offset = 0;
    for p in parts.iter_mut() {
        let n = p.len();
        p.data_mut().copy_from_slice(&values[offset..offset + n]);
        offset += n;
    }
    Ok(())
}

/// Dense layer weights, bias and input under a surrogate loss.
#[derive(Debug, Clone)]
pub struct DenseProbe {
    pub layer: DenseLayer,
    pub input: Tensor,
    pub loss: ProbeLoss,
}

impl GradientProbe for DenseProbe {
    fn values(&self) -> Vec<f64> {
        concat(&[&self.layer.weights, &self.layer.bias, &self.input])
    }

    fn set_values(&mut self, values: &[f64]) -> Result<()> {
        scatter(values, &mut [&mut self.layer.weights, &mut self.layer.bias, &mut self.input])
    }

    fn loss(&self) -> Result<f64> {
        self.loss.value(dense_forward(&self.input, &self.layer)?.data())
    }

    fn gradient(&self) -> Result<Vec<f64>> {
        let out = dense_forward(&self.input, &self.layer)?;
        let g = dense_backward(&self.input, &self.layer, &self.loss.grad(&out)?)?;
        Ok(concat(&[&g.weights, &g.bias, &g.input]))
    }
}

/// Convolution weights, bias and input under a surrogate loss.
#[derive(Debug, Clone)]
pub struct ConvProbe {
    pub layer: ConvLayer,
    pub input: Tensor,
    pub loss: ProbeLoss,
}

impl GradientProbe for ConvProbe {
    fn values(&self) -> Vec<f64> {
        concat(&[&self.layer.weights, &self.layer.bias, &self.input])
    }

    fn set_values(&mut self, values: &[f64]) -> Result<()> {
        scatter(values, &mut [&mut self.layer.weights, &mut self.layer.bias, &mut self.input])
    }

    fn loss(&self) -> Result<f64> {
        self.loss.value(conv2d_forward(&self.input, &self.layer)?.data())
    }

    fn gradient(&self) -> Result<Vec<f64>> {
        let out = conv2d_forward(&self.input, &self.layer)?;
        let g = conv2d_backward(&self.input, &self.layer, &self.loss.grad(&out)?)?;
        Ok(concat(&[&g.weights, &g.bias, &g.input]))
    }
}

/// Max-pool input under a surrogate loss (the layer has no parameters).
#[derive(Debug, Clone)]
pub struct PoolProbe {
    pub spec: PoolSpec,
    pub input: Tensor,
    pub loss: ProbeLoss,
}

impl GradientProbe for PoolProbe {
    fn values(&self) -> Vec<f64> {
        self.input.data().to_vec()
    }

    fn set_values(&mut self, values: &[f64]) -> Result<()> {
        scatter(values, &mut [&mut self.input])
    }

    fn loss(&self) -> Result<f64> {
        self.loss.value(maxpool2d_forward(&self.input, self.spec)?.0.data())
    }

    fn gradient(&self) -> Result<Vec<f64>> {
        let (out, map) = maxpool2d_forward(&self.input, self.spec)?;
        let g = maxpool2d_backward(&map, &self.loss.grad(&out)?, self.input.shape())?;
        Ok(g.into_data())
    }
}

/// Every parameter of the full model under binary cross-entropy.
#[derive(Debug, Clone)]
pub struct ModelProbe {
    pub model: Model,
    pub image: Tensor,
    pub fire: bool,
}

impl ModelProbe {
    fn label(&self) -> f64 {
        if self.fire {
            1.0
        } else {
            0.0
        }
    }
}

impl GradientProbe for ModelProbe {
    fn values(&self) -> Vec<f64> {
        self.model.flat_parameters()
    }

    fn set_values(&mut self, values: &[f64]) -> Result<()> {
        self.model.set_parameters(values)
    }

    fn loss(&self) -> Result<f64> {
        Ok(bce(self.label(), self.model.predict(&self.image)?)?.0)
    }

    fn gradient(&self) -> Result<Vec<f64>> {
        let (_, _, g) = self.model.loss_and_grads(&self.image, self.label())?;
        Ok(g.parameter_tensors().iter().flat_map(|t| t.data().iter().copied()).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::activation::Activation;
    use crate::nn::model::{Architecture, InputSpec};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(rng: &mut ChaCha8Rng, shape: &[usize], lo: f64, hi: f64) -> Tensor {
        let n = shape.iter().product();
        Tensor::new(shape.to_vec(), (0..n).map(|_| rng.gen_range(lo..hi)).collect()).unwrap()
    }

    #[test]
    fn affine_layer_is_exact_under_squared_loss() {
        // positive weights, bias and input keep every relu open
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let layer = DenseLayer::new(
            random(&mut rng, &[3, 5], 0.1, 1.0),
            random(&mut rng, &[3], 0.1, 1.0),
            Activation::Relu,
        )
        .unwrap();
        let probe = DenseProbe {
            layer,
            input: random(&mut rng, &[5], 0.5, 1.0),
            loss: ProbeLoss::SquaredError(vec![0.3, -0.2, 1.0]),
        };
        let err = gradient_check(&probe, 1e-5).unwrap();
        assert!(err < 1e-7, "{err}");
    }

    #[test]
    fn random_dense_layers_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for act in [Activation::Relu, Activation::Sigmoid] {
            let probe = DenseProbe {
                layer: DenseLayer::init(8, 4, act, &mut rng),
                input: random(&mut rng, &[8], -1.0, 1.0),
                loss: ProbeLoss::Projection((0..4).map(|_| rng.gen_range(-1.0..1.0)).collect()),
            };
            assert!(gradient_check(&probe, 1e-5).unwrap() < 1e-4);
        }
    }

    #[test]
    fn conv_layer_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let probe = ConvProbe {
            layer: ConvLayer::init(1, 1, 2, &mut rng),
            input: random(&mut rng, &[1, 4, 4], -1.0, 1.0),
            loss: ProbeLoss::Projection((0..9).map(|_| rng.gen_range(-1.0..1.0)).collect()),
        };
        assert!(gradient_check(&probe, 1e-5).unwrap() < 1e-4);
    }

    #[test]
    fn pool_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let probe = PoolProbe {
            spec: PoolSpec::new(2),
            input: random(&mut rng, &[2, 4, 4], -1.0, 1.0),
            loss: ProbeLoss::Projection((0..8).map(|_| rng.gen_range(-1.0..1.0)).collect()),
        };
        assert!(gradient_check(&probe, 1e-5).unwrap() < 1e-4);
    }

    #[test]
    fn full_model_matches_finite_differences() {
        let arch = Architecture {
            input: InputSpec::new(6, 6, 1),
            filters: 2,
            kernel: 3,
            pool_window: 2,
            hidden_units: 128,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let probe = ModelProbe {
            model: Model::new(arch, 5).unwrap(),
            image: random(&mut rng, &[1, 6, 6], 0.0, 1.0),
            fire: true,
        };
        assert!(gradient_check(&probe, 1e-5).unwrap() < 1e-4);
    }

    #[test]
    fn oversized_step_exceeds_tolerance() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let probe = DenseProbe {
            layer: DenseLayer::init(4, 2, Activation::Sigmoid, &mut rng),
            input: random(&mut rng, &[4], -1.0, 1.0),
            loss: ProbeLoss::SquaredError(vec![1.0, 0.0]),
        };
        assert!(gradient_check(&probe, 1.0).unwrap() > 1e-4);
    }

    #[test]
    fn rejects_non_positive_step() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let probe = PoolProbe {
            spec: PoolSpec::new(1),
            input: random(&mut rng, &[1, 2, 2], 0.0, 1.0),
            loss: ProbeLoss::Projection(vec![1.0; 4]),
        };
        assert!(matches!(gradient_check(&probe, 0.0), Err(Error::Domain(_))));
        assert!(matches!(gradient_check(&probe, -1e-5), Err(Error::Domain(_))));
    }
}
