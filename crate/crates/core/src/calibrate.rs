//! Threshold calibration: coverage sweeps, labelled samples for precision
//! estimation and elbow selection on the precision/coverage curve.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::minhash::{LshIndex, MatchResult};
use crate::normalize::TokenSet;

/// Size of each labelled sample.
pub const DEFAULT_SAMPLE_SIZE: usize = 100;

/// Distances within this of the maximum count as ties in [`elbow`].
const ELBOW_TIE_EPS: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum CalibrateError {
    #[error("no posts to calibrate on")]
    NoPosts,
    #[error("thresholds must be strictly increasing values in [0, 1]: {0}")]
    BadThresholds(String),
    #[error("cannot parse threshold range {0:?}; expected start:stop:step")]
    BadRange(String),
    #[error("unlabelled pairs for posts: {}", .0.join(", "))]
    Unlabeled(Vec<String>),
    #[error("sample has no labelled pairs")]
    EmptySample,
    #[error("elbow needs at least 3 points with precision, got {0}")]
    TooFewLabeledPoints(usize),
    #[error("unknown label {0:?}; use correct or incorrect")]
    BadLabel(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub threshold: f64,
    pub coverage: f64,
    pub precision: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct CalibrationCurve {
    pub points: Vec<CurvePoint>,
}

/// Parses `start:stop:step` (inclusive of `stop`) into threshold values
/// rounded to 9 decimals.
pub fn parse_thresholds(spec: &str) -> Result<Vec<f64>, CalibrateError> {
    let bad = || CalibrateError::BadRange(spec.to_string());
    let parts: Vec<f64> = spec
        .split(':')
        .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
        .collect::<Result<_, _>>()?;
    let [start, stop, step] = parts[..] else {
        return Err(bad());
    };
    if step.is_nan() || step <= 0.0 || stop < start {
        return Err(bad());
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize;
    let values: Vec<f64> = (0..=count)
        .map(|i| ((start + i as f64 * step) * 1e9).round() / 1e9)
        .collect();
    check_thresholds(&values)?;
    Ok(values)
}

fn check_thresholds(thresholds: &[f64]) -> Result<(), CalibrateError> {
    if thresholds.iter().any(|t| !(0.0..=1.0).contains(t)) {
        return Err(CalibrateError::BadThresholds(format!("{thresholds:?}")));
    }
    if thresholds.windows(2).any(|w| w[0] >= w[1]) {
        return Err(CalibrateError::BadThresholds(format!("{thresholds:?}")));
    }
    Ok(())
}

/// Coverage at every threshold from one matching pass: each post's best
/// exact Jaccard is computed once and compared against all thresholds.
pub fn sweep<S: AsRef<str> + Sync>(
    posts: &[(S, TokenSet)],
    index: &LshIndex,
    thresholds: &[f64],
) -> Result<CalibrationCurve, CalibrateError> {
    if posts.is_empty() {
        return Err(CalibrateError::NoPosts);
    }
    check_thresholds(thresholds)?;
    let best = index.query_batch(posts, 0.0);
    sweep_results(&best, thresholds)
}

/// Like [`sweep`] but over assignments that were already computed.
pub fn sweep_results(best: &[MatchResult], thresholds: &[f64]) -> Result<CalibrationCurve, CalibrateError> {
    if best.is_empty() {
        return Err(CalibrateError::NoPosts);
    }
    check_thresholds(thresholds)?;
    let total = best.len() as f64;
    let points = thresholds
        .iter()
        .map(|&t| {
            let covered = best.iter().filter(|m| m.hadith_id.is_some() && m.jaccard >= t).count();
            CurvePoint {
                threshold: t,
                coverage: covered as f64 / total,
                precision: None,
            }
        })
        .collect();
    Ok(CalibrationCurve { points })
}

impl CalibrationCurve {
    /// Sets precision on the point whose threshold equals `threshold` (to 1e-9).
    pub fn set_precision(&mut self, threshold: f64, precision: f64) -> bool {
        match self.points.iter_mut().find(|p| (p.threshold - threshold).abs() < 1e-9) {
            Some(p) => {
                p.precision = Some(precision);
                true
            }
            None => false,
        }
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), CalibrateError> {
        let with_precision = self.points.iter().any(|p| p.precision.is_some());
        let mut w = csv::Writer::from_writer(out);
        if with_precision {
            w.write_record(["threshold", "coverage", "precision"])?;
        } else {
            w.write_record(["threshold", "coverage"])?;
        }
        for p in &self.points {
            let mut rec = vec![p.threshold.to_string(), p.coverage.to_string()];
            if with_precision {
                rec.push(p.precision.map(|v| v.to_string()).unwrap_or_default());
            }
            w.write_record(&rec)?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self, CalibrateError> {
        let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(input);
        let mut points = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let num = |i: usize| -> Result<Option<f64>, CalibrateError> {
                match rec.get(i).map(str::trim) {
                    None | Some("") => Ok(None),
                    Some(v) => v
                        .parse()
                        .map(Some)
                        .map_err(|_| CalibrateError::BadThresholds(format!("bad number {v:?}"))),
                }
            };
            points.push(CurvePoint {
                threshold: num(0)?.unwrap_or(0.0),
                coverage: num(1)?.unwrap_or(0.0),
                precision: num(2)?,
            });
        }
        Ok(CalibrationCurve { points })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Correct,
    Incorrect,
}

impl std::str::FromStr for Label {
    type Err = CalibrateError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "correct" | "1" | "y" | "yes" | "true" => Ok(Label::Correct),
            "incorrect" | "0" | "n" | "no" | "false" => Ok(Label::Incorrect),
            other => Err(CalibrateError::BadLabel(other.to_string())),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabelPair {
    pub threshold: f64,
    pub post_id: String,
    pub hadith_id: u64,
    pub jaccard: f64,
    pub post_text: String,
    pub matn: String,
    pub label: Option<Label>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct LabelSample {
    pub pairs: Vec<LabelPair>,
    /// Set when fewer matched pairs than requested were available.
    pub warning: Option<String>,
}

/// Draws `n` matched pairs at `threshold` uniformly without replacement.
///
/// The pool is ordered by post id before drawing, so the sample depends only
/// on the matches, the threshold and the seed.
pub fn sample_for_labeling(matches: &[MatchResult], threshold: f64, n: usize, seed: u64) -> LabelSample {
    let mut pool: Vec<&MatchResult> = matches
        .iter()
        .filter(|m| m.hadith_id.is_some() && m.jaccard >= threshold)
        .collect();
    pool.sort_by(|a, b| a.post_id.cmp(&b.post_id));
    pool.dedup_by(|a, b| a.post_id == b.post_id);

    let warning = (pool.len() < n).then(|| {
        format!(
            "only {} matched pairs at threshold {threshold}, fewer than the {n} requested",
            pool.len()
        )
    });
    let mut chosen: Vec<usize> = if pool.len() <= n {
        (0..pool.len()).collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rand::seq::index::sample(&mut rng, pool.len(), n).into_vec()
    };
    chosen.sort_unstable();

    let pairs = chosen
        .into_iter()
        .map(|i| {
            let m = pool[i];
            LabelPair {
                threshold,
                post_id: m.post_id.clone(),
                hadith_id: m.hadith_id.expect("pool holds matched pairs"),
                jaccard: m.jaccard,
                post_text: String::new(),
                matn: String::new(),
                label: None,
            }
        })
        .collect();
    LabelSample { pairs, warning }
}

impl LabelSample {
    /// Fills in the post text and matched matn for human review.
    pub fn with_texts(
        mut self,
        post_text: impl Fn(&str) -> Option<String>,
        matn: impl Fn(u64) -> Option<String>,
    ) -> Self {
        for p in &mut self.pairs {
            p.post_text = post_text(&p.post_id).unwrap_or_default();
            p.matn = matn(p.hadith_id).unwrap_or_default();
        }
        self
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), CalibrateError> {
        let mut w = csv::Writer::from_writer(out);
        for p in &self.pairs {
            w.serialize(p)?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }

    /// Reads a sample back, typically after the `label` column was filled in.
    pub fn read_csv<R: Read>(input: R) -> Result<Self, CalibrateError> {
        #[derive(Deserialize)]
        struct Row {
            threshold: f64,
            post_id: String,
            hadith_id: u64,
            jaccard: f64,
            #[serde(default)]
            post_text: String,
            #[serde(default)]
            matn: String,
            #[serde(default)]
            label: String,
        }
        let mut pairs = Vec::new();
        for row in csv::Reader::from_reader(input).deserialize::<Row>() {
            let row = row?;
            let label = if row.label.trim().is_empty() {
                None
            } else {
                Some(row.label.parse()?)
            };
            pairs.push(LabelPair {
                threshold: row.threshold,
                post_id: row.post_id,
                hadith_id: row.hadith_id,
                jaccard: row.jaccard,
                post_text: row.post_text,
                matn: row.matn,
                label,
            });
        }
        Ok(LabelSample { pairs, warning: None })
    }
}

/// correct / (correct + incorrect); every pair must be labelled.
pub fn precision_from_labels(sample: &LabelSample) -> Result<f64, CalibrateError> {
    let unlabeled: Vec<String> = sample
        .pairs
        .iter()
        .filter(|p| p.label.is_none())
        .map(|p| p.post_id.clone())
        .collect();
    if !unlabeled.is_empty() {
        return Err(CalibrateError::Unlabeled(unlabeled));
    }
    if sample.pairs.is_empty() {
        return Err(CalibrateError::EmptySample);
    }
    let correct = sample.pairs.iter().filter(|p| p.label == Some(Label::Correct)).count();
    Ok(correct as f64 / sample.pairs.len() as f64)
}

/// Precision per threshold for samples that may span several thresholds.
pub fn precision_by_threshold(sample: &LabelSample) -> Result<BTreeMap<String, f64>, CalibrateError> {
    let mut groups: BTreeMap<String, LabelSample> = BTreeMap::new();
    for p in &sample.pairs {
        groups.entry(p.threshold.to_string()).or_default().pairs.push(p.clone());
    }
    groups
        .into_iter()
        .map(|(t, s)| precision_from_labels(&s).map(|p| (t, p)))
        .collect()
}

/// Knee of the precision-versus-coverage curve.
///
/// Among points with a precision value, returns the threshold whose point lies
/// farthest from the chord joining the first and last such points. Ties,
/// including the all-zero distances of a straight line, go to the lowest
/// threshold.
pub fn elbow(curve: &CalibrationCurve) -> Result<f64, CalibrateError> {
    let mut pts: Vec<(f64, f64, f64)> = curve
        .points
        .iter()
        .filter_map(|p| p.precision.map(|prec| (p.threshold, p.coverage, prec)))
        .collect();
    if pts.len() < 3 {
        return Err(CalibrateError::TooFewLabeledPoints(pts.len()));
    }
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (_, x0, y0) = pts[0];
    let (_, x1, y1) = pts[pts.len() - 1];
    let (dx, dy) = (x1 - x0, y1 - y0);
    let norm = dx.hypot(dy);
    let distance = |x: f64, y: f64| {
        if norm == 0.0 {
            (x - x0).hypot(y - y0)
        } else {
            (dy * (x - x0) - dx * (y - y0)).abs() / norm
        }
    };
    let dists: Vec<f64> = pts.iter().map(|&(_, x, y)| distance(x, y)).collect();
    let max = dists.iter().copied().fold(0.0, f64::max);
    let pick = dists
        .iter()
        .position(|&d| d >= max - ELBOW_TIE_EPS)
        .expect("non-empty");
    Ok(pts[pick].0)
}
