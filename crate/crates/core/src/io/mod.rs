//! On-disk formats: PGM images, labelled dataset folders, the synthetic
//! dataset generator, model JSON and cognitive-map JSON.

mod dataset;
mod fcm_file;
mod model_file;
mod pgm;
pub mod synth;

pub use dataset::{dataset_load, to_samples, LabeledImage};
pub use fcm_file::{fcm_file_load, load_activation, parse_activation, parse_map, EdgeSpec, MapFile};
pub use model_file::{model_from_json, model_load, model_save, model_to_json, MODEL_FILE_VERSION};
pub use pgm::{pgm_decode, pgm_encode, pgm_load, pgm_save};
pub use synth::{synth_generate, DatasetManifest};

use crate::fcm::Fcm;

/// Source of the bundled sanitary-condition map.
pub const SANITARY_MAP_JSON: &str = include_str!("../../examples/sanitary.json");

/// The seven-concept sanitary-condition cognitive map.
pub fn sanitary_condition_map() -> Fcm {
    parse_map(SANITARY_MAP_JSON).expect("bundled sanitary map is valid")
}
