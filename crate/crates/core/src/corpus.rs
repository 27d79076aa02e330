// SPDX-License-Identifier: Apache-2.0

//! Stimulus and response records, their line-delimited file formats, and
//! the grouping of descriptions into (image, duration) cells.
//!
//! Both files hold one JSON object per line. Blank lines are ignored but
//! still count towards the line numbers reported in errors.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use chrono::{DateTime, Utc};
use serde::{de::DeserializeOwned, Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("file not found: {0}")]
    FileNotFound(PathBuf),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("malformed record on line {line}: {reason}")]
    MalformedRecord { line: usize, reason: String },
    #[error("duplicate stimulus id {0:?}")]
    DuplicateId(String),
    #[error("unknown image id {0:?}")]
    UnknownImageId(String),
}

pub type Result<T, E = CorpusError> = std::result::Result<T, E>;

/// Loose design-time label of a stimulus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Category {
    Recognizable,
    Dichotomous,
    Indeterminate,
    Abstract,
    AbstractFlat,
}

impl Category {
    pub const ALL: [Category; 5] = [
        Category::Recognizable,
        Category::Dichotomous,
        Category::Indeterminate,
        Category::Abstract,
        Category::AbstractFlat,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Category::Recognizable => "Recognizable",
            Category::Dichotomous => "Dichotomous",
            Category::Indeterminate => "Indeterminate",
            Category::Abstract => "Abstract",
            Category::AbstractFlat => "AbstractFlat",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Category {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Category::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| format!("unknown category {s:?}"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StimulusImage {
    pub id: String,
    pub path: String,
    pub category: Category,
    #[serde(default)]
    pub source_note: Option<String>,
}

/// Stimuli in file order, indexed by id.
#[derive(Debug, Clone, Default)]
pub struct StimulusSet {
    images: Vec<StimulusImage>,
    index: HashMap<String, usize>,
}

impl StimulusSet {
    pub fn new(images: Vec<StimulusImage>) -> Result<Self> {
        let mut index = HashMap::with_capacity(images.len());
        for (i, image) in images.iter().enumerate() {
            if index.insert(image.id.clone(), i).is_some() {
                return Err(CorpusError::DuplicateId(image.id.clone()));
            }
        }
        Ok(Self { images, index })
    }

    pub fn get(&self, id: &str) -> Option<&StimulusImage> {
        self.index.get(id).map(|&i| &self.images[i])
    }

    pub fn contains(&self, id: &str) -> bool {
        self.index.contains_key(id)
    }

    pub fn iter(&self) -> impl Iterator<Item = &StimulusImage> {
        self.images.iter()
    }

    pub fn images(&self) -> &[StimulusImage] {
        &self.images
    }

    pub fn in_category(&self, category: Category) -> impl Iterator<Item = &StimulusImage> {
        self.images.iter().filter(move |img| img.category == category)
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }
}

/// One participant's description of one image under one viewing duration.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResponseRecord {
    pub participant_id: String,
    pub session_id: String,
    pub image_id: String,
    pub duration_ms: u32,
    pub raw_text: String,
    pub vigilance_passed: bool,
    pub timestamp: DateTime<Utc>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ResponseSet {
    pub records: Vec<ResponseRecord>,
    pub provenance: Vec<PathBuf>,
}

impl ResponseSet {
    pub fn new(records: Vec<ResponseRecord>) -> Self {
        Self {
            records,
            provenance: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CellKey {
    pub image_id: String,
    pub duration_ms: u32,
}

impl CellKey {
    pub fn new(image_id: impl Into<String>, duration_ms: u32) -> Self {
        Self {
            image_id: image_id.into(),
            duration_ms,
        }
    }
}

impl fmt::Display for CellKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}ms", self.image_id, self.duration_ms)
    }
}

/// Descriptions per cell, in record order within each cell.
pub type CellMap = BTreeMap<CellKey, Vec<String>>;

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|source| match source.kind() {
        io::ErrorKind::NotFound => CorpusError::FileNotFound(path.to_path_buf()),
        _ => CorpusError::Io {
            path: path.to_path_buf(),
            source,
        },
    })
}

fn parse_lines<T, R, F>(reader: R, origin: &Path, mut validate: F) -> Result<Vec<T>>
where
    T: DeserializeOwned,
    R: Read,
    F: FnMut(&T) -> Option<String>,
{
    let mut out = Vec::new();
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|source| CorpusError::Io {
            path: origin.to_path_buf(),
            source,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let record: T = serde_json::from_str(&line).map_err(|e| CorpusError::MalformedRecord {
            line: line_no,
            reason: e.to_string(),
        })?;
        if let Some(reason) = validate(&record) {
            return Err(CorpusError::MalformedRecord { line: line_no, reason });
        }
        out.push(record);
    }
    Ok(out)
}

fn write_lines<'a, T, I>(path: &Path, records: I) -> Result<usize>
where
    T: Serialize + 'a,
    I: IntoIterator<Item = &'a T>,
{
    let io_err = |source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut out = BufWriter::new(File::create(path).map_err(io_err)?);
    let mut n = 0;
    for record in records {
        let line = serde_json::to_string(record).expect("record serializes");
        writeln!(out, "{line}").map_err(io_err)?;
        n += 1;
    }
    out.flush().map_err(io_err)?;
    Ok(n)
}

pub fn parse_stimuli<R: Read>(reader: R) -> Result<StimulusSet> {
    let mut seen = std::collections::HashSet::new();
    let mut duplicate = None;
    let images = parse_lines::<StimulusImage, _, _>(reader, Path::new("<stimuli>"), |img| {
        if img.id.is_empty() {
            return Some("empty stimulus id".into());
        }
        if !seen.insert(img.id.clone()) && duplicate.is_none() {
            duplicate = Some(img.id.clone());
        }
        None
    })?;
    if let Some(id) = duplicate {
        return Err(CorpusError::DuplicateId(id));
    }
    StimulusSet::new(images)
}

pub fn load_stimuli(path: impl AsRef<Path>) -> Result<StimulusSet> {
    let path = path.as_ref();
    parse_stimuli(open(path)?).map_err(|e| relocate(e, path))
}

pub fn write_stimuli(path: impl AsRef<Path>, stimuli: &StimulusSet) -> Result<usize> {
    write_lines(path.as_ref(), stimuli.iter())
}

pub fn parse_responses<R: Read>(reader: R) -> Result<Vec<ResponseRecord>> {
    parse_lines::<ResponseRecord, _, _>(reader, Path::new("<responses>"), |r| {
        if r.duration_ms == 0 {
            Some("duration_ms must be positive".into())
        } else if r.image_id.is_empty() {
            Some("empty image_id".into())
        } else {
            None
        }
    })
}

pub fn load_responses(path: impl AsRef<Path>) -> Result<ResponseSet> {
    let path = path.as_ref();
    let records = parse_responses(open(path)?).map_err(|e| relocate(e, path))?;
    Ok(ResponseSet {
        records,
        provenance: vec![path.to_path_buf()],
    })
}

pub fn write_responses<'a, I>(path: impl AsRef<Path>, records: I) -> Result<usize>
where
    I: IntoIterator<Item = &'a ResponseRecord>,
{
    write_lines(path.as_ref(), records)
}

fn relocate(err: CorpusError, path: &Path) -> CorpusError {
    match err {
        CorpusError::Io { source, .. } => CorpusError::Io {
            path: path.to_path_buf(),
            source,
        },
        other => other,
    }
}

/// Keeps only records whose participant passed the vigilance check.
pub fn filter_by_vigilance(responses: &ResponseSet) -> ResponseSet {
    ResponseSet {
        records: responses
            .records
            .iter()
            .filter(|r| r.vigilance_passed)
            .cloned()
            .collect(),
        provenance: responses.provenance.clone(),
    }
}

/// Partitions descriptions by (image, duration). Fails on the first record
/// whose image is not in `stimuli`.
pub fn group_by_cell(responses: &ResponseSet, stimuli: &StimulusSet) -> Result<CellMap> {
    let mut cells = CellMap::new();
    for record in &responses.records {
        if !stimuli.contains(&record.image_id) {
            return Err(CorpusError::UnknownImageId(record.image_id.clone()));
        }
        cells
            .entry(CellKey::new(record.image_id.clone(), record.duration_ms))
            .or_default()
            .push(record.raw_text.clone());
    }
    Ok(cells)
}
