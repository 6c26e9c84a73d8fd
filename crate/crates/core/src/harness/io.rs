use std::fs;
use std::io::Write;
use std::path::Path;

use super::runner::RunReport;
use crate::error::{Error, Result};
use crate::featselect::Ranking;
use crate::imaging::BoundingBox;

/// One `x,y,w,h` line per frame, top-left convention, two decimals.
pub fn write_results(boxes: &[BoundingBox], path: &Path) -> Result<()> {
    let mut out = String::with_capacity(boxes.len() * 32);
    for b in boxes {
        let (x, y, w, h) = b.top_left();
        out.push_str(&format!("{x:.2},{y:.2},{w:.2},{h:.2}\n"));
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

pub fn parse_results(text: &str) -> Result<Vec<BoundingBox>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, line)| {
            let v: Vec<f64> = line
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Sequence(format!("results line {}: {e}", i + 1)))?;
            match v.as_slice() {
                [x, y, w, h] => Ok(BoundingBox::from_top_left(*x, *y, *w, *h)),
                _ => Err(Error::Sequence(format!("results line {}: expected 4 values", i + 1))),
            }
        })
        .collect()
}

pub fn read_results(path: &Path) -> Result<Vec<BoundingBox>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_results(&text)
}

pub fn write_report(report: &RunReport, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(report).map_err(|e| Error::Numeric(e.to_string()))?;
    fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

/// Ranking dump, one CSV record per frame.
pub fn write_ranking_csv(rows: &[(usize, Ranking)], path: &Path) -> Result<()> {
    let mut out = Vec::new();
    for (frame, r) in rows {
        writeln!(out, "{}", r.csv_line(*frame)).expect("write to Vec");
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cft::TrackerConfig;
    use proptest::prelude::*;

    #[test]
    fn results_lines_and_report_json() {
        let dir = tempfile::tempdir().unwrap();
        let boxes: Vec<BoundingBox> = (0..7).map(|i| BoundingBox::new(10.0 + i as f64 * 0.333, 5.0, 4.5, 3.25)).collect();
        let path = dir.path().join("results.txt");
        write_results(&boxes, &path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 7);
        assert_eq!(text.lines().next(), Some("7.75,3.38,4.50,3.25"));

        let report = RunReport {
            sequence: "s".into(),
            frames: 7,
            mean_iou: 0.5,
            precision_20: 1.0,
            failures: 0,
            fps: 30.0,
            fps_end_to_end: 25.0,
            config: TrackerConfig::default(),
        };
        let rpath = dir.path().join("report.json");
        write_report(&report, &rpath).unwrap();
        let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&rpath).unwrap()).unwrap();
        assert_eq!(v["mean_iou"], 0.5);
        assert_eq!(v["config"]["num_selected"], 8);
    }

    proptest! {
        #[test]
        fn results_round_trip_within_quantization(
            xs in proptest::collection::vec((0.0..500.0f64, 0.0..500.0f64, 1.0..100.0f64, 1.0..100.0f64), 1..20)
        ) {
            let boxes: Vec<BoundingBox> = xs.iter().map(|&(x, y, w, h)| BoundingBox::from_top_left(x, y, w, h)).collect();
            let dir = tempfile::tempdir().unwrap();
            let path = dir.path().join("r.txt");
            write_results(&boxes, &path).unwrap();
            let back = read_results(&path).unwrap();
            prop_assert_eq!(back.len(), boxes.len());
            for (a, b) in boxes.iter().zip(&back) {
                let (ta, tb) = (a.top_left(), b.top_left());
                prop_assert!((ta.0 - tb.0).abs() <= 0.005 + 1e-9);
                prop_assert!((ta.1 - tb.1).abs() <= 0.005 + 1e-9);
                prop_assert!((ta.2 - tb.2).abs() <= 0.005 + 1e-9);
                prop_assert!((ta.3 - tb.3).abs() <= 0.005 + 1e-9);
            }
        }
    }
}
