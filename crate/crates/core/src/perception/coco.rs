use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;

use super::{BoundingBox, PerceptionError};

#[derive(Deserialize)]
struct CocoFile {
    images: Vec<CocoImage>,
    annotations: Vec<CocoAnnotation>,
}

#[derive(Deserialize)]
struct CocoImage {
    id: u64,
    #[serde(default)]
    file_name: String,
}

#[derive(Deserialize)]
struct CocoAnnotation {
    image_id: u64,
    bbox: [f64; 4],
    #[serde(default)]
    category_id: i64,
    #[serde(default)]
    score: Option<f64>,
}

/// Boxes keyed by frame index.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Annotations {
    pub by_frame: BTreeMap<usize, Vec<BoundingBox>>,
}

impl Annotations {
    pub fn boxes(&self, frame_index: usize) -> &[BoundingBox] {
        self.by_frame.get(&frame_index).map_or(&[], Vec::as_slice)
    }

    pub fn total(&self) -> usize {
        self.by_frame.values().map(Vec::len).sum()
    }
}

/// Frame index of an image: the leading digits of its file name
/// (`12_signal.png` → 12), else the image id.
fn frame_index(img: &CocoImage) -> usize {
    let base = Path::new(&img.file_name)
        .file_name()
        .and_then(|s| s.to_str())
        .unwrap_or("");
    let digits: String = base.chars().take_while(char::is_ascii_digit).collect();
    digits.parse().unwrap_or(img.id as usize)
}

pub fn parse_annotations(text: &str, origin: &str) -> Result<Annotations, PerceptionError> {
    let file: CocoFile = serde_json::from_str(text).map_err(|e| PerceptionError::Parse {
        path: origin.to_string(),
        msg: e.to_string(),
    })?;
    let index: BTreeMap<u64, usize> = file.images.iter().map(|i| (i.id, frame_index(i))).collect();
    let mut out = Annotations::default();
    for a in file.annotations {
        let frame = *index.get(&a.image_id).ok_or_else(|| PerceptionError::Parse {
            path: origin.to_string(),
            msg: format!("annotation refers to unknown image_id {}", a.image_id),
        })?;
        let [x, y, w, h] = a.bbox;
        out.by_frame.entry(frame).or_default().push(BoundingBox {
            x,
            y,
            w,
            h,
            confidence: a.score.unwrap_or(1.0),
            class_id: a.category_id,
        });
    }
    Ok(out)
}

pub fn load_annotations(path: &Path) -> Result<Annotations, PerceptionError> {
    let text = std::fs::read_to_string(path).map_err(|e| PerceptionError::Parse {
        path: path.display().to_string(),
        msg: e.to_string(),
    })?;
    parse_annotations(&text, &path.display().to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_annotation() {
        let text = r#"{
            "images": [{"id": 3, "file_name": "7_reflectivity.png", "width": 1024, "height": 256}],
            "annotations": [{"id": 1, "image_id": 3, "bbox": [10, 5, 20, 15], "category_id": 1}],
            "categories": [{"id": 1, "name": "person"}]
        }"#;
        let ann = parse_annotations(text, "mem").unwrap();
        assert_eq!(ann.total(), 1);
        let b = ann.boxes(7)[0];
        assert_eq!((b.x, b.y, b.w, b.h, b.class_id), (10.0, 5.0, 20.0, 15.0, 1));
        assert_eq!(b.confidence, 1.0);
    }

    #[test]
    fn empty_annotations() {
        let ann = parse_annotations(r#"{"images": [], "annotations": []}"#, "mem").unwrap();
        assert_eq!(ann.total(), 0);
        assert!(ann.boxes(0).is_empty());
    }

    #[test]
    fn image_id_fallback() {
        let text = r#"{"images": [{"id": 4, "file_name": "frame.png"}],
                       "annotations": [{"image_id": 4, "bbox": [0, 0, 1, 1]}]}"#;
        assert_eq!(parse_annotations(text, "mem").unwrap().boxes(4).len(), 1);
    }

    #[test]
    fn errors_carry_the_path() {
        let err = parse_annotations(r#"{"images": []}"#, "ann/coco.json").unwrap_err();
        assert!(err.to_string().starts_with("ann/coco.json"), "{err}");
        let err = load_annotations(Path::new("/nonexistent/coco.json")).unwrap_err();
        assert!(err.to_string().contains("/nonexistent/coco.json"));
    }
}
