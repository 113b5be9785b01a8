//! Assessment records, the weighted composite score and the feature views
//! used for deferred-evaluation experiments.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// One graded component. Declaration order is the chronological order in
/// which the components are sequenced for the recurrent models.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Feature {
    T1,
    T2,
    Cw,
    Mte,
    Ete,
}

impl Feature {
    pub const ALL: [Feature; 5] = [
        Feature::T1,
        Feature::T2,
        Feature::Cw,
        Feature::Mte,
        Feature::Ete,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Feature::T1 => "t1",
            Feature::T2 => "t2",
            Feature::Cw => "cw",
            Feature::Mte => "mte",
            Feature::Ete => "ete",
        }
    }
}

impl fmt::Display for Feature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

impl FromStr for Feature {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Feature::ALL
            .into_iter()
            .find(|f| f.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::InvalidArgument(format!("unknown feature `{s}`")))
    }
}

/// Per-feature maximum attainable points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Maxima(pub [f64; 5]);

impl Default for Maxima {
    fn default() -> Self {
        Maxima([100.0; 5])
    }
}

impl Maxima {
    pub fn get(&self, f: Feature) -> f64 {
        self.0[f.index()]
    }
}

/// A student's raw scores. Absent components are `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct AssessmentRecord {
    pub student_id: String,
    scores: [Option<f64>; 5],
    total: f64,
}

impl AssessmentRecord {
    pub fn new(
        student_id: impl Into<String>,
        scores: [Option<f64>; 5],
        total: f64,
        maxima: &Maxima,
    ) -> Result<Self> {
        for f in Feature::ALL {
            if let Some(v) = scores[f.index()] {
                let max = maxima.get(f);
                if !v.is_finite() || !(0.0..=max).contains(&v) {
                    return Err(Error::Parse(format!("{f} out of range [0, {max}]: {v}")));
                }
            }
        }
        if !total.is_finite() || !(0.0..=100.0).contains(&total) {
            return Err(Error::Parse(format!(
                "total out of range [0, 100]: {total}"
            )));
        }
        Ok(AssessmentRecord {
            student_id: student_id.into(),
            scores,
            total,
        })
    }

    pub fn get(&self, f: Feature) -> Option<f64> {
        self.scores[f.index()]
    }

    pub fn require(&self, f: Feature) -> Result<f64> {
        self.get(f).ok_or(Error::MissingFeature(f))
    }

    pub fn scores(&self) -> &[Option<f64>; 5] {
        &self.scores
    }

    pub fn total(&self) -> f64 {
        self.total
    }
}

/// Non-negative weights summing to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidWeights("no weights".into()));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(Error::InvalidWeights(format!(
                "negative or non-finite weight {w}"
            )));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidWeights(format!(
                "weights sum to {sum}, not 1"
            )));
        }
        Ok(WeightVector(weights))
    }

    /// Default institutional scheme over (t1, t2, cw, mte, ete).
    pub fn institutional_default() -> Self {
        WeightVector(vec![0.15, 0.15, 0.20, 0.20, 0.30])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Weighted composite `Σ wᵢ·xᵢ` over `features`, in the order given.
pub fn composite_score(
    record: &AssessmentRecord,
    weights: &WeightVector,
    features: &[Feature],
) -> Result<f64> {
    if weights.len() != features.len() {
        return Err(Error::DimensionMismatch {
            context: "composite weights",
            expected: features.len(),
            got: weights.len(),
        });
    }
    features
        .iter()
        .zip(weights.as_slice())
        .try_fold(0.0, |acc, (f, w)| Ok(acc + w * record.require(*f)?))
}

/// The three experiment views.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ViewKind {
    #[serde(rename = "d1")]
    D1,
    #[serde(rename = "d2-mte")]
    D2Mte,
    #[serde(rename = "d2-ete")]
    D2Ete,
}

impl ViewKind {
    pub const ALL: [ViewKind; 3] = [ViewKind::D1, ViewKind::D2Mte, ViewKind::D2Ete];

    pub fn features(self) -> &'static [Feature] {
        match self {
            ViewKind::D1 => &[Feature::T1, Feature::T2, Feature::Cw],
            ViewKind::D2Mte => &[Feature::Mte, Feature::Cw],
            ViewKind::D2Ete => &[Feature::Ete, Feature::Cw],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ViewKind::D1 => "d1",
            ViewKind::D2Mte => "d2-mte",
            ViewKind::D2Ete => "d2-ete",
        }
    }
}

impl fmt::Display for ViewKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ViewKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "d1" => Ok(ViewKind::D1),
            "d2-mte" => Ok(ViewKind::D2Mte),
            "d2-ete" => Ok(ViewKind::D2Ete),
            _ => Err(Error::UnknownView(s.to_string())),
        }
    }
}

/// A design matrix over a named feature subset, with the total as target.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetView {
    pub name: String,
    pub feature_names: Vec<Feature>,
    pub student_ids: Vec<String>,
    pub matrix: Matrix,
    pub targets: Vec<f64>,
    /// Rows dropped because a selected feature was absent.
    pub excluded: usize,
}

impl DatasetView {
    /// Selects `features` from every record that has all of them.
    pub fn select(
        name: impl Into<String>,
        records: &[AssessmentRecord],
        features: &[Feature],
    ) -> Result<Self> {
        let name = name.into();
        let mut data = Vec::with_capacity(records.len() * features.len());
        let mut targets = Vec::with_capacity(records.len());
        let mut ids = Vec::with_capacity(records.len());
        let mut excluded = 0;
        for r in records {
            let row: Option<Vec<f64>> = features.iter().map(|f| r.get(*f)).collect();
            match row {
                Some(row) => {
                    data.extend(row);
                    targets.push(r.total());
                    ids.push(r.student_id.clone());
                }
                None => excluded += 1,
            }
        }
        if targets.is_empty() {
            return Err(Error::EmptyView {
                view: name,
                excluded,
            });
        }
        let matrix = Matrix::from_vec(targets.len(), features.len(), data)?;
        Ok(DatasetView {
            name,
            feature_names: features.to_vec(),
            student_ids: ids,
            matrix,
            targets,
            excluded,
        })
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn column(&self, f: Feature) -> Option<Vec<f64>> {
        let j = self.feature_names.iter().position(|g| *g == f)?;
        Some(self.matrix.column(j))
    }

    pub fn subset(&self, idx: &[usize]) -> DatasetView {
        DatasetView {
            name: self.name.clone(),
            feature_names: self.feature_names.clone(),
            student_ids: idx.iter().map(|&i| self.student_ids[i].clone()).collect(),
            matrix: self.matrix.select_rows(idx),
            targets: idx.iter().map(|&i| self.targets[i]).collect(),
            excluded: 0,
        }
    }
}

/// Builds one of the named experiment views (`d1`, `d2-mte`, `d2-ete`).
pub fn build_view(records: &[AssessmentRecord], view_name: &str) -> Result<DatasetView> {
    let kind: ViewKind = view_name.parse()?;
    DatasetView::select(kind.name(), records, kind.features())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(id: &str, s: [Option<f64>; 5], total: f64) -> AssessmentRecord {
        AssessmentRecord::new(id, s, total, &Maxima::default()).unwrap()
    }

    fn full(id: usize, v: f64) -> AssessmentRecord {
        rec(&format!("s{id}"), [Some(v); 5], v)
    }

    #[test]
    fn composite_hand_cases() {
        let r = rec("a", [Some(80.0), Some(60.0), Some(90.0), None, None], 80.0);
        let w = WeightVector::new(vec![0.25, 0.25, 0.5]).unwrap();
        let f = [Feature::T1, Feature::T2, Feature::Cw];
        assert_eq!(composite_score(&r, &w, &f).unwrap(), 80.0);

        let one = WeightVector::new(vec![1.0]).unwrap();
        assert_eq!(composite_score(&r, &one, &[Feature::T2]).unwrap(), 60.0);

        let r = rec("b", [Some(70.0), Some(50.0), Some(62.5), None, None], 61.0);
        let w = WeightVector::new(vec![0.3, 0.3, 0.4]).unwrap();
        let got = composite_score(&r, &w, &f).unwrap();
        assert!((got - 61.0).abs() < 1e-12, "{got}");
    }

    #[test]
    fn composite_errors() {
        let r = rec("a", [Some(80.0), None, Some(90.0), None, None], 80.0);
        let w = WeightVector::new(vec![0.5, 0.5]).unwrap();
        match composite_score(&r, &w, &[Feature::T1, Feature::T2]) {
            Err(Error::MissingFeature(Feature::T2)) => {}
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            composite_score(&r, &w, &[Feature::T1]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn weight_invariants() {
        assert!(WeightVector::new(vec![0.5, 0.6]).is_err());
        assert!(WeightVector::new(vec![-0.5, 1.5]).is_err());
        assert!(WeightVector::new(vec![0.5, 0.5 + 5e-10]).is_ok());
        let sum: f64 = WeightVector::institutional_default()
            .as_slice()
            .iter()
            .sum();
        assert!((sum - 1.0).abs() < 1e-12);
    }

    #[test]
    fn record_invariants() {
        let m = Maxima::default();
        assert!(AssessmentRecord::new("x", [None; 5], 120.0, &m).is_err());
        assert!(
            AssessmentRecord::new("x", [Some(-1.0), None, None, None, None], 10.0, &m).is_err()
        );
        assert!(
            AssessmentRecord::new("x", [Some(f64::NAN), None, None, None, None], 10.0, &m).is_err()
        );
        let small = Maxima([15.0, 15.0, 20.0, 30.0, 50.0]);
        assert!(
            AssessmentRecord::new("x", [Some(16.0), None, None, None, None], 10.0, &small).is_err()
        );
    }

    #[test]
    fn view_d1_complete() {
        let recs: Vec<_> = (0..10).map(|i| full(i, i as f64)).collect();
        let v = build_view(&recs, "D1").unwrap();
        assert_eq!(v.len(), 10);
        assert_eq!(v.matrix.cols(), 3);
        assert_eq!(v.excluded, 0);
    }

    #[test]
    fn view_excludes_missing_rows() {
        let mut recs: Vec<_> = (0..10).map(|i| full(i, i as f64)).collect();
        for i in [3, 7] {
            let mut s = *recs[i].scores();
            s[Feature::Mte.index()] = None;
            recs[i] = rec(&format!("s{i}"), s, i as f64);
        }
        let v = build_view(&recs, "d2-mte").unwrap();
        assert_eq!(v.len(), 8);
        assert_eq!(v.excluded, 2);
        assert!(!v.student_ids.contains(&"s3".to_string()));
    }

    #[test]
    fn view_d2_ete_feature_order() {
        let recs = vec![full(0, 1.0)];
        let v = build_view(&recs, "d2-ete").unwrap();
        assert_eq!(v.feature_names, vec![Feature::Ete, Feature::Cw]);
    }

    #[test]
    fn view_errors() {
        let recs = vec![full(0, 1.0)];
        assert!(matches!(
            build_view(&recs, "d3"),
            Err(Error::UnknownView(_))
        ));
        let missing = vec![rec("a", [None; 5], 1.0)];
        assert!(matches!(
            build_view(&missing, "d1"),
            Err(Error::EmptyView { excluded: 1, .. })
        ));
    }

    #[test]
    fn view_preserves_order() {
        let recs: Vec<_> = (0..6).map(|i| full(i, 10.0 * i as f64)).collect();
        let v = build_view(&recs, "d2-ete").unwrap();
        assert_eq!(v.targets, vec![0.0, 10.0, 20.0, 30.0, 40.0, 50.0]);
        assert_eq!(v, build_view(&recs, "d2-ete").unwrap());
    }
}
