//! Seeded synthetic stand-in for satellite imagery: dark noisy scenes,
//! half of them with one bright rectangular "fire" blob.

use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::dataset::{FIRE_DIR, NOFIRE_DIR};
use super::pgm::pgm_save;
use crate::error::{Error, Result};
use crate::localize::{BoundingBox, GrayImage};

pub const BACKGROUND_MAX: u8 = 60;
pub const BLOB_MIN: u8 = 200;
pub const MIN_BLOB_SIDE: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetManifest {
    pub root: PathBuf,
    pub fire: Vec<PathBuf>,
    pub nofire: Vec<PathBuf>,
}

impl DatasetManifest {
    pub fn len(&self) -> usize {
        self.fire.len() + self.nofire.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn check_size(size: usize) -> Result<()> {
    if size / 2 < MIN_BLOB_SIDE {
        return Err(Error::Input(format!(
            "image size must be at least {} to fit a fire blob, got {size}",
            2 * MIN_BLOB_SIDE
        )));
    }
    Ok(())
}

/// Square image of uniform noise in `[0, BACKGROUND_MAX]`.
pub fn background_image<R: Rng>(rng: &mut R, size: usize) -> GrayImage {
    let pixels = (0..size * size).map(|_| rng.gen_range(0..=BACKGROUND_MAX)).collect();
    GrayImage::new(size, size, pixels).expect("size is positive")
}

/// Background plus one axis-aligned blob with values in `[BLOB_MIN, 255]`
/// and sides in `MIN_BLOB_SIDE..=size/2`. Returns the blob's rectangle.
pub fn fire_image<R: Rng>(rng: &mut R, size: usize) -> Result<(GrayImage, BoundingBox)> {
    check_size(size)?;
    let bg = background_image(rng, size);
    let w = rng.gen_range(MIN_BLOB_SIDE..=size / 2);
    let h = rng.gen_range(MIN_BLOB_SIDE..=size / 2);
    let x0 = rng.gen_range(0..=size - w);
    let y0 = rng.gen_range(0..=size - h);
    let mut pixels = bg.pixels().to_vec();
    for y in y0..y0 + h {
        for x in x0..x0 + w {
            pixels[y * size + x] = rng.gen_range(BLOB_MIN..=255);
        }
    }
    let bbox = BoundingBox {
        x_min: x0,
        y_min: y0,
        x_max: x0 + w - 1,
        y_max: y0 + h - 1,
    };
    Ok((GrayImage::new(size, size, pixels)?, bbox))
}

/// Writes `count / 2` fire and `count / 2` no-fire PGM files under
/// `out_dir/fire` and `out_dir/nofire`.
pub fn synth_generate(out_dir: impl AsRef<Path>, count: usize, seed: u64, size: usize) -> Result<DatasetManifest> {
    if count < 2 || !count.is_multiple_of(2) {
        return Err(Error::Input(format!("count must be an even number >= 2, got {count}")));
    }
    check_size(size)?;
    let root = out_dir.as_ref().to_path_buf();
    let fire_dir = root.join(FIRE_DIR);
    let nofire_dir = root.join(NOFIRE_DIR);
    for d in [&fire_dir, &nofire_dir] {
        fs::create_dir_all(d).map_err(|e| Error::from(e).in_file(d))?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let half = count / 2;
    let mut manifest = DatasetManifest {
        root,
        fire: Vec::with_capacity(half),
        nofire: Vec::with_capacity(half),
    };
    for i in 0..half {
        let (img, _) = fire_image(&mut rng, size)?;
        let path = fire_dir.join(format!("fire_{i:05}.pgm"));
        pgm_save(&img, &path)?;
        manifest.fire.push(path);
    }
    for i in 0..half {
        let img = background_image(&mut rng, size);
        let path = nofire_dir.join(format!("nofire_{i:05}.pgm"));
        pgm_save(&img, &path)?;
        manifest.nofire.push(path);
    }
    Ok(manifest)
}
