//! Labeled image directories: a `labels.csv` with `filename,label` rows next
//! to the PGM/PPM files it names.

use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::imaging::{decode_pnm, encode_pgm, GrayImage, ImageError, PnmEncoding};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("labels.csv: {0}")]
    Labels(String),
    #[error("{path}: {source}")]
    Image { path: PathBuf, source: ImageError },
    #[error("corpus is empty")]
    Empty,
}

pub const LABELS_FILE: &str = "labels.csv";

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledImage {
    pub name: String,
    pub image: GrayImage,
    pub label: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Corpus {
    pub samples: Vec<LabeledImage>,
}

impl Corpus {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn labels(&self) -> Vec<usize> {
        self.samples.iter().map(|s| s.label).collect()
    }

    pub fn images(&self) -> Vec<&GrayImage> {
        self.samples.iter().map(|s| &s.image).collect()
    }

    /// Number of classes implied by the largest label.
    pub fn class_count(&self) -> usize {
        self.samples.iter().map(|s| s.label + 1).max().unwrap_or(0)
    }

    pub fn load(dir: &Path) -> Result<Self, CorpusError> {
        let labels_path = dir.join(LABELS_FILE);
        let text = fs::read_to_string(&labels_path).map_err(|source| CorpusError::Io {
            path: labels_path.clone(),
            source,
        })?;
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let mut samples = Vec::new();
        for (i, row) in reader.records().enumerate() {
            let row = row.map_err(|e| CorpusError::Labels(e.to_string()))?;
            let (name, label) = match (row.get(0), row.get(1)) {
                (Some(n), Some(l)) if !n.is_empty() => (n.to_string(), l),
                _ => return Err(CorpusError::Labels(format!("row {} needs filename,label", i + 1))),
            };
            let label: usize = label
                .parse()
                .map_err(|_| CorpusError::Labels(format!("row {}: bad label {label:?}", i + 1)))?;
            let path = dir.join(&name);
            let bytes = fs::read(&path).map_err(|source| CorpusError::Io {
                path: path.clone(),
                source,
            })?;
            let image = decode_pnm(&bytes).map_err(|source| CorpusError::Image { path, source })?;
            samples.push(LabeledImage { name, image, label });
        }
        if samples.is_empty() {
            return Err(CorpusError::Empty);
        }
        Ok(Corpus { samples })
    }

    /// Writes every image as binary PGM plus `labels.csv`.
    pub fn save(&self, dir: &Path) -> Result<(), CorpusError> {
        let io = |path: &Path| {
            let path = path.to_path_buf();
            move |source| CorpusError::Io { path, source }
        };
        fs::create_dir_all(dir).map_err(io(dir))?;
        let mut labels = String::from("filename,label\n");
        for s in &self.samples {
            let path = dir.join(&s.name);
            fs::write(&path, encode_pgm(&s.image, PnmEncoding::Binary)).map_err(io(&path))?;
            labels.push_str(&format!("{},{}\n", s.name, s.label));
        }
        let path = dir.join(LABELS_FILE);
        fs::write(&path, labels).map_err(io(&path))
    }
}
