use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::{Activation, ConvLayer, DenseLayer, InputSpec, Model, PoolSpec, Tensor};

pub const MODEL_FILE_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    version: u32,
    /// `[height, width, channels]`
    input_spec: [usize; 3],
    layers: Vec<LayerRecord>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
enum LayerRecord {
    Conv2d {
        filters: usize,
        kernel: usize,
        weights: Vec<f64>,
        bias: Vec<f64>,
    },
    Maxpool {
        window: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        stride: Option<usize>,
    },
    Flatten,
    Dense {
        units: usize,
        activation: Activation,
        weights: Vec<f64>,
        bias: Vec<f64>,
    },
}

fn schema(msg: impl Into<String>) -> Error {
    Error::Schema(msg.into())
}

fn dense_record(layer: &DenseLayer) -> LayerRecord {
    LayerRecord::Dense {
        units: layer.out_units(),
        activation: layer.activation(),
        weights: layer.weights().data().to_vec(),
        bias: layer.bias().data().to_vec(),
    }
}

pub fn model_to_json(model: &Model) -> Result<String> {
    let spec = model.input_spec();
    let conv = model.conv();
    let pool = model.pool();
    let file = ModelFile {
        version: MODEL_FILE_VERSION,
        input_spec: [spec.height, spec.width, spec.channels],
        layers: vec![
            LayerRecord::Conv2d {
                filters: conv.filters(),
                kernel: conv.kernel(),
                weights: conv.weights().data().to_vec(),
                bias: conv.bias().data().to_vec(),
            },
            LayerRecord::Maxpool {
                window: pool.window,
                stride: (pool.stride != pool.window).then_some(pool.stride),
            },
            LayerRecord::Flatten,
            dense_record(model.hidden()),
            dense_record(model.output()),
        ],
    };
    Ok(serde_json::to_string(&file)?)
}

fn dense_from(record: LayerRecord, in_units: usize, expected: Activation, position: usize) -> Result<DenseLayer> {
    let LayerRecord::Dense { units, activation, weights, bias } = record else {
        return Err(schema(format!("layer {position} must be dense")));
    };
    if activation != expected {
        return Err(schema(format!("layer {position} must use {expected:?} activation")));
    }
    if units == 0 || weights.len() != units * in_units {
        return Err(schema(format!(
            "layer {position}: {units} units over {in_units} inputs need {} weights, found {}",
            units * in_units,
            weights.len()
        )));
    }
    if bias.len() != units {
        return Err(schema(format!("layer {position}: expected {units} biases, found {}", bias.len())));
    }
    let w = Tensor::new(vec![units, in_units], weights).map_err(|e| schema(format!("layer {position}: {e}")))?;
    let b = Tensor::new(vec![units], bias).map_err(|e| schema(format!("layer {position}: {e}")))?;
    DenseLayer::new(w, b, activation).map_err(|e| schema(format!("layer {position}: {e}")))
}

pub fn model_from_json(json: &str) -> Result<Model> {
    let value: serde_json::Value = serde_json::from_str(json)?;
    match value.get("version").and_then(serde_json::Value::as_u64) {
        Some(v) if v == u64::from(MODEL_FILE_VERSION) => {}
        Some(v) => return Err(schema(format!("unsupported model file version {v}, expected {MODEL_FILE_VERSION}"))),
        None => return Err(schema("model file has no version")),
    }
    let file: ModelFile = serde_json::from_value(value).map_err(|e| schema(e.to_string()))?;
    let [height, width, channels] = file.input_spec;
    if height == 0 || width == 0 || channels == 0 {
        return Err(schema("input_spec dimensions must be positive"));
    }
    let input = InputSpec::new(height, width, channels);

    let [conv, pool, flatten, hidden, output]: [LayerRecord; 5] = file
        .layers
        .try_into()
        .map_err(|l: Vec<_>| schema(format!("expected 5 layers (conv2d, maxpool, flatten, dense, dense), found {}", l.len())))?;

    let LayerRecord::Conv2d { filters, kernel, weights, bias } = conv else {
        return Err(schema("layer 0 must be conv2d"));
    };
    let expected = filters * channels * kernel * kernel;
    if filters == 0 || kernel == 0 || weights.len() != expected {
        return Err(schema(format!(
            "conv2d with {filters} filters of {kernel}x{kernel} over {channels} channels needs {expected} weights, found {}",
            weights.len()
        )));
    }
    if bias.len() != filters {
        return Err(schema(format!("conv2d expects {filters} biases, found {}", bias.len())));
    }
    let conv = ConvLayer::new(
        Tensor::new(vec![filters, channels, kernel, kernel], weights).map_err(|e| schema(e.to_string()))?,
        Tensor::new(vec![filters], bias).map_err(|e| schema(e.to_string()))?,
    )
    .map_err(|e| schema(e.to_string()))?;

    let LayerRecord::Maxpool { window, stride } = pool else {
        return Err(schema("layer 1 must be maxpool"));
    };
    if window == 0 || stride == Some(0) {
        return Err(schema("maxpool window and stride must be positive"));
    }
    let pool = PoolSpec::with_stride(window, stride.unwrap_or(window));

    if !matches!(flatten, LayerRecord::Flatten) {
        return Err(schema("layer 2 must be flatten"));
    }

    let [f, ch, cw] = conv.output_shape(height, width).map_err(|e| schema(e.to_string()))?;
    let flat: usize = pool.output_shape(f, ch, cw).map_err(|e| schema(e.to_string()))?.iter().product();
    let hidden = dense_from(hidden, flat, Activation::Relu, 3)?;
    let output = dense_from(output, hidden.out_units(), Activation::Sigmoid, 4)?;
    if output.out_units() != 1 {
        return Err(schema("output layer must have exactly 1 unit"));
    }
    Model::from_layers(input, conv, pool, hidden, output).map_err(|e| schema(e.to_string()))
}

pub fn model_save(model: &Model, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, model_to_json(model)?).map_err(|e| Error::from(e).in_file(path))
}

pub fn model_load(path: impl AsRef<Path>) -> Result<Model> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::from(e).in_file(path))?;
    model_from_json(&text).map_err(|e| e.in_file(path))
}
