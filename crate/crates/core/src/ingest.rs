//! Cohort CSV files and the seeded synthetic cohort generator.
//!
//! The CSV schema is fixed: header `student_id,t1,t2,cw,mte,ete,total`,
//! `.` as decimal point, `\n` line endings, and an empty cell for an absent
//! component.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use crate::data::{AssessmentRecord, Feature, Maxima, WeightVector};
use crate::error::{Error, Result};
use crate::matrix::{solve, Matrix};
use crate::rng::SeededRng;

pub const CSV_HEADER: &str = "student_id,t1,t2,cw,mte,ete,total";

#[derive(Debug, Clone, PartialEq)]
pub struct Rejection {
    /// 1-based line number in the file (the header is line 1).
    pub line: usize,
    pub reason: String,
}

#[derive(Debug, Clone)]
pub struct CohortFile {
    pub path: PathBuf,
    pub course_id: String,
    pub records: Vec<AssessmentRecord>,
    pub rejections: Vec<Rejection>,
}

pub fn parse_cohort(path: impl AsRef<Path>, maxima: &Maxima) -> Result<CohortFile> {
    let path = path.as_ref();
    let mut text = String::new();
    File::open(path)
        .and_then(|mut f| f.read_to_string(&mut text))
        .map_err(|e| Error::io(path, e))?;
    let (records, rejections) = parse_cohort_str(&text, maxima)?;
    let course_id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    Ok(CohortFile {
        path: path.to_path_buf(),
        course_id,
        records,
        rejections,
    })
}

/// Parses cohort CSV text. Row-level problems become rejections; only a
/// wrong header is fatal.
pub fn parse_cohort_str(
    text: &str,
    maxima: &Maxima,
) -> Result<(Vec<AssessmentRecord>, Vec<Rejection>)> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut rows = reader.records();
    match rows.next() {
        None => return Err(Error::Header("file is empty".into())),
        Some(Err(e)) => return Err(Error::Header(e.to_string())),
        Some(Ok(h)) => {
            let got: Vec<&str> = h.iter().collect();
            if got.join(",") != CSV_HEADER {
                return Err(Error::Header(format!(
                    "expected `{CSV_HEADER}`, got `{}`",
                    got.join(",")
                )));
            }
        }
    }

    let mut records = Vec::new();
    let mut rejections = Vec::new();
    for row in rows {
        let row = match row {
            Ok(r) => r,
            Err(e) => {
                let line = e.position().map_or(0, |p| p.line() as usize);
                rejections.push(Rejection {
                    line,
                    reason: e.to_string(),
                });
                continue;
            }
        };
        let line = row.position().map_or(0, |p| p.line() as usize);
        if row.len() == 1 && row[0].trim().is_empty() {
            continue;
        }
        match parse_row(&row, maxima) {
            Ok(r) => records.push(r),
            Err(reason) => rejections.push(Rejection { line, reason }),
        }
    }
    Ok((records, rejections))
}

fn parse_row(
    row: &csv::StringRecord,
    maxima: &Maxima,
) -> std::result::Result<AssessmentRecord, String> {
    if row.len() != 7 {
        return Err(format!("expected 7 fields, found {}", row.len()));
    }
    let id = row[0].trim();
    if id.is_empty() {
        return Err("empty student_id".into());
    }
    let mut scores = [None; 5];
    for f in Feature::ALL {
        let cell = row[f.index() + 1].trim();
        if cell.is_empty() {
            continue;
        }
        let v: f64 = cell
            .parse()
            .map_err(|_| format!("non-numeric {f} value `{cell}`"))?;
        scores[f.index()] = Some(v);
    }
    let cell = row[6].trim();
    if cell.is_empty() {
        return Err("total missing".into());
    }
    let total: f64 = cell
        .parse()
        .map_err(|_| format!("non-numeric total value `{cell}`"))?;
    AssessmentRecord::new(id, scores, total, maxima).map_err(|e| e.to_string())
}

pub fn write_cohort_to<W: Write>(mut w: W, records: &[AssessmentRecord]) -> std::io::Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for r in records {
        write!(w, "{}", r.student_id)?;
        for v in r.scores() {
            match v {
                Some(v) => write!(w, ",{v}")?,
                None => write!(w, ",")?,
            }
        }
        writeln!(w, ",{}", r.total())?;
    }
    w.flush()
}

pub fn write_cohort(path: impl AsRef<Path>, records: &[AssessmentRecord]) -> Result<()> {
    let path = path.as_ref();
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    write_cohort_to(BufWriter::new(f), records).map_err(|e| Error::io(path, e))
}

/// Parameters of the one-factor synthetic cohort generator.
///
/// Each student draws an ability `a ~ N(0, 1)`. Component `f` is
/// `mean_f + sd_f·(l_f·a + √(1 − l_f²)·e_f)` with independent `e_f ~ N(0, 1)`,
/// clipped to `[0, max_f]`. The total is the weighted composite of the
/// components plus `N(0, noise_sd²)`, clipped to `[0, 100]`. Loadings `l_f`
/// of targeted components are solved so that each component's correlation
/// with the total matches its target; untargeted components use
/// `default_loading`.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub n_students: usize,
    pub seed: u64,
    pub target_correlations: BTreeMap<Feature, f64>,
    /// Weights over all five components in `Feature::ALL` order.
    pub weights: WeightVector,
    pub noise_sd: f64,
    pub means: [f64; 5],
    pub sds: [f64; 5],
    pub default_loading: f64,
    pub maxima: Maxima,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            n_students: 1000,
            seed: 7,
            target_correlations: reference_correlations(),
            weights: WeightVector::institutional_default(),
            noise_sd: 1.0,
            means: [62.0, 60.0, 70.0, 58.0, 55.0],
            sds: [10.0, 10.0, 10.0, 15.0, 20.0],
            default_loading: 0.5,
            maxima: Maxima::default(),
        }
    }
}

/// Component-vs-total correlations of the reference cohort.
pub fn reference_correlations() -> BTreeMap<Feature, f64> {
    BTreeMap::from([
        (Feature::T1, 0.69),
        (Feature::T2, 0.64),
        (Feature::Mte, 0.88),
        (Feature::Ete, 0.96),
    ])
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_students < 2 {
            return Err(Error::InvalidArgument(format!(
                "n_students must be >= 2, got {}",
                self.n_students
            )));
        }
        for (f, r) in &self.target_correlations {
            if !r.is_finite() || r.abs() > 1.0 {
                return Err(Error::InvalidArgument(format!(
                    "correlation for {f} must lie in [-1, 1], got {r}"
                )));
            }
        }
        if self.weights.len() != 5 {
            return Err(Error::DimensionMismatch {
                context: "synthetic weights",
                expected: 5,
                got: self.weights.len(),
            });
        }
        if !(self.noise_sd >= 0.0 && self.noise_sd.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "noise_sd must be >= 0, got {}",
                self.noise_sd
            )));
        }
        if self.sds.iter().any(|s| !(*s >= 0.0 && s.is_finite())) {
            return Err(Error::InvalidArgument(
                "component spreads must be >= 0".into(),
            ));
        }
        if !(self.default_loading.abs() < 1.0) {
            return Err(Error::InvalidArgument(
                "default loading must lie in (-1, 1)".into(),
            ));
        }
        Ok(())
    }

    /// Correlation of every component with the (unclipped) total implied by
    /// `loadings` under the one-factor model.
    pub fn implied_correlations(&self, loadings: &[f64; 5]) -> [f64; 5] {
        let w = self.weights.as_slice();
        let a: Vec<f64> = (0..5).map(|i| w[i] * self.sds[i]).collect();
        let common: f64 = (0..5).map(|i| a[i] * loadings[i]).sum();
        let var = common * common
            + (0..5)
                .map(|i| a[i] * a[i] * (1.0 - loadings[i] * loadings[i]))
                .sum::<f64>()
            + self.noise_sd * self.noise_sd;
        let sd = var.sqrt();
        std::array::from_fn(|i| {
            if sd == 0.0 {
                0.0
            } else {
                (a[i] * (1.0 - loadings[i] * loadings[i]) + loadings[i] * common) / sd
            }
        })
    }

    /// Solves for component loadings reproducing the target correlations.
    pub fn solve_loadings(&self) -> Result<[f64; 5]> {
        self.validate()?;
        let targeted: Vec<(usize, f64)> = self
            .target_correlations
            .iter()
            .map(|(f, r)| (f.index(), *r))
            .collect();
        let mut loadings = [self.default_loading; 5];
        if targeted.is_empty() {
            return Ok(loadings);
        }
        // loadings = tanh(u) keeps every candidate inside (-1, 1)
        let mut u: Vec<f64> = targeted
            .iter()
            .map(|(_, r)| r.clamp(-0.9, 0.9).atanh())
            .collect();
        let residual = |u: &[f64]| -> Vec<f64> {
            let mut l = [self.default_loading; 5];
            for ((i, _), ui) in targeted.iter().zip(u) {
                l[*i] = ui.tanh();
            }
            let c = self.implied_correlations(&l);
            targeted.iter().map(|(i, r)| c[*i] - r).collect()
        };
        let norm = |r: &[f64]| r.iter().map(|v| v * v).sum::<f64>();

        let k = u.len();
        let mut res = residual(&u);
        for _ in 0..500 {
            if res.iter().all(|r| r.abs() < 1e-12) {
                break;
            }
            let h = 1e-7;
            let mut jac = Matrix::zeros(k, k);
            for j in 0..k {
                let mut up = u.clone();
                up[j] += h;
                let mut dn = u.clone();
                dn[j] -= h;
                let (ru, rd) = (residual(&up), residual(&dn));
                for i in 0..k {
                    jac[(i, j)] = (ru[i] - rd[i]) / (2.0 * h);
                }
            }
            // Levenberg–Marquardt step
            let jt = jac.transpose();
            let mut lhs = jt.gram();
            let damping = 1e-9 + norm(&res);
            for i in 0..k {
                lhs[(i, i)] += damping;
            }
            let mut rhs = vec![0.0; k];
            jac.matvec_t_acc(&res, &mut rhs);
            let Some(step) = solve(&lhs, &rhs, 1e-300) else {
                break;
            };
            let mut t = 1.0;
            let current = norm(&res);
            let mut improved = false;
            while t > 1e-6 {
                let cand: Vec<f64> = u.iter().zip(&step).map(|(a, s)| a - t * s).collect();
                let rc = residual(&cand);
                if norm(&rc) < current {
                    u = cand;
                    res = rc;
                    improved = true;
                    break;
                }
                t *= 0.5;
            }
            if !improved {
                break;
            }
        }
        if res.iter().any(|r| r.abs() > 1e-6) || u.iter().any(|v| v.abs() > 15.0) {
            let wanted: Vec<String> = self
                .target_correlations
                .iter()
                .map(|(f, r)| format!("{f}={r}"))
                .collect();
            return Err(Error::Infeasible(format!(
                "no one-factor loadings in (-1, 1) reproduce {} under the given weights, spreads and noise",
                wanted.join(", ")
            )));
        }
        for ((i, _), ui) in targeted.iter().zip(&u) {
            loadings[*i] = ui.tanh();
        }
        Ok(loadings)
    }
}

pub fn generate_synthetic(spec: &SynthSpec) -> Result<Vec<AssessmentRecord>> {
    let loadings = spec.solve_loadings()?;
    let mut rng = SeededRng::new(spec.seed);
    let w = spec.weights.as_slice();
    let width = spec.n_students.to_string().len().max(4);
    let mut out = Vec::with_capacity(spec.n_students);
    for s in 0..spec.n_students {
        let ability = rng.normal();
        let mut scores = [None; 5];
        for f in Feature::ALL {
            let i = f.index();
            let l = loadings[i];
            let z = l * ability + (1.0 - l * l).sqrt() * rng.normal();
            let v = (spec.means[i] + spec.sds[i] * z).clamp(0.0, spec.maxima.get(f));
            scores[i] = Some(v);
        }
        let noise = spec.noise_sd * rng.normal();
        let composite: f64 = (0..5).map(|i| w[i] * scores[i].unwrap_or(0.0)).sum();
        let total = (composite + noise).clamp(0.0, 100.0);
        out.push(AssessmentRecord::new(
            format!("s{:0width$}", s + 1),
            scores,
            total,
            &spec.maxima,
        )?);
    }
    Ok(out)
}
