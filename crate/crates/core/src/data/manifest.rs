use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::tensor::{read_tensor_file, write_tensor_file, EventTensor};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Test,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    /// Relative to the manifest's directory.
    pub path: PathBuf,
    pub split: Split,
}

/// Dataset index: example files, their split, and class names by label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub label_names: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub num_channels: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    #[serde(default)]
    pub examples: Vec<ManifestEntry>,
}

impl Manifest {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        toml::from_str(&text).map_err(|e| Error::data(path, e.to_string()))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = toml::to_string(self).map_err(|e| Error::data(path, e.to_string()))?;
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    /// Absolute-or-cwd-relative paths of the entries, resolved against the
    /// manifest location.
    pub fn resolve(&self, manifest_path: &Path) -> Vec<(PathBuf, Split)> {
        let base = manifest_path.parent().unwrap_or(Path::new(""));
        self.examples
            .iter()
            .map(|e| (base.join(&e.path), e.split))
            .collect()
    }
}

/// In-memory train/test tensors.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub num_channels: usize,
    pub steps: usize,
    pub label_names: Vec<String>,
    pub train: Vec<EventTensor>,
    pub test: Vec<EventTensor>,
}

impl Dataset {
    pub fn num_classes(&self) -> usize {
        self.label_names.len()
    }

    /// Reads every tensor listed in a manifest and checks that shapes and
    /// labels agree.
    pub fn load(manifest_path: &Path) -> Result<Self> {
        let manifest = Manifest::load(manifest_path)?;
        let mut train = Vec::new();
        let mut test = Vec::new();
        let mut shape = manifest.num_channels.zip(manifest.steps);
        for (path, split) in manifest.resolve(manifest_path) {
            let t = read_tensor_file(&path)?;
            let this = (t.channels(), t.steps());
            match shape {
                None => shape = Some(this),
                Some(s) if s != this => {
                    return Err(Error::data(
                        &path,
                        format!(
                            "tensor is {}x{}, dataset is {}x{}",
                            this.0, this.1, s.0, s.1
                        ),
                    ))
                }
                _ => {}
            }
            if t.label >= manifest.label_names.len() {
                return Err(Error::data(
                    &path,
                    format!("label {} has no entry in label_names", t.label),
                ));
            }
            match split {
                Split::Train => train.push(t),
                Split::Test => test.push(t),
            }
        }
        let (num_channels, steps) =
            shape.ok_or_else(|| Error::data(manifest_path, "manifest lists no examples"))?;
        Ok(Self {
            num_channels,
            steps,
            label_names: manifest.label_names,
            train,
            test,
        })
    }
}

/// Writes `dir/train/NNNNNN.spk`, `dir/test/NNNNNN.spk` and
/// `dir/manifest.toml`; returns the manifest path.
pub fn write_dataset(dir: &Path, dataset: &Dataset) -> Result<PathBuf> {
    let mut examples = Vec::new();
    for (split, name, items) in [
        (Split::Train, "train", &dataset.train),
        (Split::Test, "test", &dataset.test),
    ] {
        let sub = dir.join(name);
        fs::create_dir_all(&sub).map_err(|e| Error::io(&sub, e))?;
        for (n, t) in items.iter().enumerate() {
            let rel = PathBuf::from(name).join(format!("{n:06}.spk"));
            write_tensor_file(&dir.join(&rel), t)?;
            examples.push(ManifestEntry { path: rel, split });
        }
    }
    let manifest = Manifest {
        label_names: dataset.label_names.clone(),
        num_channels: Some(dataset.num_channels),
        steps: Some(dataset.steps),
        examples,
    };
    let path = dir.join("manifest.toml");
    manifest.save(&path)?;
    Ok(path)
}
