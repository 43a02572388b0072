use std::fs;
use std::path::{Path, PathBuf};

use super::pgm::pgm_load;
use crate::error::{Error, Result};
use crate::localize::GrayImage;
use crate::nn::Sample;

pub const FIRE_DIR: &str = "fire";
pub const NOFIRE_DIR: &str = "nofire";

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledImage {
    pub path: PathBuf,
    pub image: GrayImage,
    pub fire: bool,
}

fn sorted_files(dir: &Path) -> Result<Vec<PathBuf>> {
    if !dir.is_dir() {
        return Err(Error::Input(format!("missing class directory {}", dir.display())));
    }
    let mut files = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::from(e).in_file(dir))? {
        let entry = entry.map_err(|e| Error::from(e).in_file(dir))?;
        let path = entry.path();
        let hidden = entry.file_name().to_string_lossy().starts_with('.');
        if path.is_file() && !hidden {
            files.push(path);
        }
    }
    files.sort_by(|a, b| a.file_name().cmp(&b.file_name()));
    if files.is_empty() {
        return Err(Error::Input(format!("class directory {} has no images", dir.display())));
    }
    Ok(files)
}

/// Reads `root/fire/*` (label fire) then `root/nofire/*`, each in
/// lexicographic file-name order. All images must share one size.
pub fn dataset_load(root: impl AsRef<Path>) -> Result<Vec<LabeledImage>> {
    let root = root.as_ref();
    let mut out: Vec<LabeledImage> = Vec::new();
    for (dir, fire) in [(FIRE_DIR, true), (NOFIRE_DIR, false)] {
        for path in sorted_files(&root.join(dir))? {
            let image = pgm_load(&path)?;
            if let Some(first) = out.first() {
                let (w, h) = (first.image.width(), first.image.height());
                if (image.width(), image.height()) != (w, h) {
                    return Err(Error::Input(format!(
                        "image is {}x{}, dataset images are {w}x{h}",
                        image.width(),
                        image.height()
                    ))
                    .in_file(&path));
                }
            }
            out.push(LabeledImage { path, image, fire });
        }
    }
    Ok(out)
}

/// Normalises every image into a model-ready sample.
pub fn to_samples(images: &[LabeledImage]) -> Vec<Sample> {
    images
        .iter()
        .map(|li| Sample::new(li.image.to_tensor(), li.fire))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::pgm::pgm_save;

    fn write(dir: &Path, name: &str, w: usize, h: usize) {
        fs::create_dir_all(dir).unwrap();
        pgm_save(&GrayImage::new(w, h, vec![9; w * h]).unwrap(), dir.join(name)).unwrap();
    }

    #[test]
    fn labels_follow_directories() {
        let root = tempfile::tempdir().unwrap();
        let r = root.path();
        write(&r.join("fire"), "b.pgm", 4, 4);
        write(&r.join("fire"), "a.pgm", 4, 4);
        for n in ["z.pgm", "m.pgm", "c.pgm"] {
            write(&r.join("nofire"), n, 4, 4);
        }
        let ds = dataset_load(r).unwrap();
        let labels: Vec<bool> = ds.iter().map(|d| d.fire).collect();
        assert_eq!(labels, vec![true, true, false, false, false]);
        let names: Vec<_> = ds.iter().map(|d| d.path.file_name().unwrap().to_str().unwrap().to_owned()).collect();
        assert_eq!(names, vec!["a.pgm", "b.pgm", "c.pgm", "m.pgm", "z.pgm"]);
        let samples = to_samples(&ds);
        assert_eq!(samples[0].image.shape(), &[1, 4, 4]);
    }

    #[test]
    fn empty_or_missing_class_is_an_error() {
        let root = tempfile::tempdir().unwrap();
        let r = root.path();
        write(&r.join("fire"), "a.pgm", 4, 4);
        assert!(matches!(dataset_load(r), Err(Error::Input(_))));
        fs::create_dir_all(r.join("nofire")).unwrap();
        assert!(matches!(dataset_load(r), Err(Error::Input(_))));
    }

    #[test]
    fn size_mismatch_names_the_file() {
        let root = tempfile::tempdir().unwrap();
        let r = root.path();
        write(&r.join("fire"), "a.pgm", 4, 4);
        write(&r.join("nofire"), "odd.pgm", 5, 4);
        let err = dataset_load(r).unwrap_err();
        assert!(err.to_string().contains("odd.pgm"), "{err}");
        assert_eq!(err.exit_code(), 3);
    }

    #[test]
    fn unparsable_file_names_the_file() {
        let root = tempfile::tempdir().unwrap();
        let r = root.path();
        write(&r.join("fire"), "a.pgm", 4, 4);
        fs::create_dir_all(r.join("nofire")).unwrap();
        fs::write(r.join("nofire").join("junk.pgm"), b"garbage").unwrap();
        let err = dataset_load(r).unwrap_err();
        assert!(err.to_string().contains("junk.pgm"), "{err}");
    }
}
