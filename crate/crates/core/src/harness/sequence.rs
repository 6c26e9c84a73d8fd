use std::borrow::Cow;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::imaging::{BoundingBox, Image};

const IMAGE_EXTENSIONS: [&str; 3] = ["png", "jpg", "jpeg"];

#[derive(Debug, Clone)]
pub enum Frames {
    Files(Vec<PathBuf>),
    Memory(Vec<Image>),
}

impl Frames {
    pub fn len(&self) -> usize {
        match self {
            Frames::Files(f) => f.len(),
            Frames::Memory(m) => m.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Ordered frames with one ground-truth box per frame. Boxes that are not
/// [`BoundingBox::is_valid`] mark frames without usable annotation.
#[derive(Debug, Clone)]
pub struct Sequence {
    pub name: String,
    pub frames: Frames,
    pub groundtruth: Vec<BoundingBox>,
}

impl Sequence {
    pub fn new(name: impl Into<String>, frames: Frames, groundtruth: Vec<BoundingBox>) -> Result<Self> {
        if frames.len() < 2 {
            return Err(Error::Sequence(format!("need at least 2 frames, have {}", frames.len())));
        }
        if frames.len() != groundtruth.len() {
            return Err(Error::Sequence(format!(
                "count mismatch: {} frames, {} ground-truth lines",
                frames.len(),
                groundtruth.len()
            )));
        }
        if !groundtruth[0].is_valid() {
            return Err(Error::Sequence("first ground-truth box is not valid".into()));
        }
        Ok(Self {
            name: name.into(),
            frames,
            groundtruth,
        })
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    /// Decoded frame `i` (0-based).
    pub fn frame(&self, i: usize) -> Result<Cow<'_, Image>> {
        match &self.frames {
            Frames::Memory(m) => Ok(Cow::Borrowed(&m[i])),
            Frames::Files(f) => Image::open(&f[i]).map(Cow::Owned),
        }
    }

    pub fn initial_box(&self) -> BoundingBox {
        self.groundtruth[0]
    }
}

/// Axis-aligned bounding rectangle of a 4-corner polygon.
pub fn polygon_to_rect(p: &[f64; 8]) -> Result<BoundingBox> {
    if p.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("polygon has non-finite coordinates".into()));
    }
    let xs = [p[0], p[2], p[4], p[6]];
    let ys = [p[1], p[3], p[5], p[7]];
    let (x0, x1) = min_max(&xs);
    let (y0, y1) = min_max(&ys);
    if x1 - x0 <= 0.0 || y1 - y0 <= 0.0 {
        return Err(Error::InvalidArgument("polygon has zero area".into()));
    }
    Ok(BoundingBox::from_top_left(x0, y0, x1 - x0, y1 - y0))
}

fn min_max(v: &[f64]) -> (f64, f64) {
    v.iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)))
}

/// Parses VOT-style ground truth: `x,y,w,h` (top-left) or an 8-value
/// polygon per line. NaN or zero-size annotations become an invalid box.
pub fn parse_groundtruth(text: &str) -> Result<Vec<BoundingBox>> {
    let mut boxes = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let values: Vec<f64> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .map(|s| s.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Sequence(format!("unparsable ground truth at line {}: {e}", lineno + 1)))?;
        let special = BoundingBox::new(f64::NAN, f64::NAN, 0.0, 0.0);
        let bbox = match values.as_slice() {
            [x, y, w, h] => {
                let b = BoundingBox::from_top_left(*x, *y, *w, *h);
                if b.is_valid() {
                    b
                } else {
                    special
                }
            }
            [_, _, _, _, _, _, _, _] => {
                let poly: [f64; 8] = values.as_slice().try_into().expect("eight values");
                polygon_to_rect(&poly).unwrap_or(special)
            }
            other => {
                return Err(Error::Sequence(format!(
                    "unparsable ground truth at line {}: {} values, expected 4 or 8",
                    lineno + 1,
                    other.len()
                )))
            }
        };
        boxes.push(bbox);
    }
    Ok(boxes)
}

fn image_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| {
            p.is_file()
                && p.extension()
                    .and_then(|e| e.to_str())
                    .is_some_and(|e| IMAGE_EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()))
        })
        .collect();
    files.sort();
    Ok(files)
}

/// Loads a sequence directory: image frames (directly inside `dir`, or in a
/// `color/` subdirectory) plus `groundtruth.txt`. Frames decode lazily.
pub fn load_sequence(dir: &Path) -> Result<Sequence> {
    let gt_path = dir.join("groundtruth.txt");
    let text = fs::read_to_string(&gt_path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::Sequence(format!("missing ground truth {}", gt_path.display())),
        _ => Error::io(&gt_path, e),
    })?;
    let groundtruth = parse_groundtruth(&text)?;
    let mut files = image_files(dir)?;
    if files.is_empty() && dir.join("color").is_dir() {
        files = image_files(&dir.join("color"))?;
    }
    let name = dir
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "sequence".into());
    Sequence::new(name, Frames::Files(files), groundtruth)
}
