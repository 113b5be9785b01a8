//! Exploratory statistics: histograms, Pearson correlation matrices and
//! binned gradient maps, plus their CSV encodings.

use std::io::Write;

use crate::data::{AssessmentRecord, DatasetView, Feature};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub feature_name: String,
    pub bin_edges: Vec<f64>,
    pub counts: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    pub labels: Vec<String>,
    /// Row-major `k × k`.
    pub values: Vec<Vec<f64>>,
}

impl CorrelationMatrix {
    pub fn get(&self, a: &str, b: &str) -> Option<f64> {
        let i = self.labels.iter().position(|l| l == a)?;
        let j = self.labels.iter().position(|l| l == b)?;
        Some(self.values[i][j])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradientMap {
    pub x_feature: Feature,
    pub y_feature: Feature,
    pub x_edges: Vec<f64>,
    pub y_edges: Vec<f64>,
    /// `cell_mean[ix][iy]`, `None` for empty cells.
    pub cell_mean: Vec<Vec<Option<f64>>>,
    pub cell_count: Vec<Vec<usize>>,
}

pub const DEFAULT_MAP_BINS: usize = 10;

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample Pearson correlation coefficient.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::DimensionMismatch {
            context: "pearson",
            expected: xs.len(),
            got: ys.len(),
        });
    }
    if xs.len() < 2 {
        return Err(Error::Empty("correlation input (need at least two values)"));
    }
    let (mx, my) = (mean(xs), mean(ys));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return Err(Error::ZeroVariance("x".into()));
    }
    if syy == 0.0 {
        return Err(Error::ZeroVariance("y".into()));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Pairwise correlations over the view's features followed by the total.
pub fn correlation_matrix(view: &DatasetView) -> Result<CorrelationMatrix> {
    if view.is_empty() {
        return Err(Error::Empty("view"));
    }
    let mut labels: Vec<String> = view.feature_names.iter().map(|f| f.to_string()).collect();
    labels.push("total".into());
    let mut cols: Vec<Vec<f64>> = (0..view.n_features())
        .map(|j| view.matrix.column(j))
        .collect();
    cols.push(view.targets.clone());
    labeled_correlations(labels, &cols)
}

pub fn labeled_correlations(labels: Vec<String>, cols: &[Vec<f64>]) -> Result<CorrelationMatrix> {
    let k = cols.len();
    for (label, c) in labels.iter().zip(cols) {
        let m = mean(c);
        if c.iter().all(|v| *v == m) {
            return Err(Error::ZeroVariance(label.clone()));
        }
    }
    let mut values = vec![vec![1.0; k]; k];
    for i in 0..k {
        for j in i + 1..k {
            let r = pearson(&cols[i], &cols[j])?;
            values[i][j] = r;
            values[j][i] = r;
        }
    }
    Ok(CorrelationMatrix { labels, values })
}

/// Like `correlation_matrix`, but undefined entries (constant columns, fewer
/// than two rows) are NaN instead of an error.
pub fn correlation_matrix_lenient(view: &DatasetView) -> CorrelationMatrix {
    let mut labels: Vec<String> = view.feature_names.iter().map(|f| f.to_string()).collect();
    labels.push("total".into());
    let mut cols: Vec<Vec<f64>> = (0..view.n_features())
        .map(|j| view.matrix.column(j))
        .collect();
    cols.push(view.targets.clone());
    let k = cols.len();
    let values = (0..k)
        .map(|i| {
            (0..k)
                .map(|j| match pearson(&cols[i], &cols[j]) {
                    Ok(_) if i == j => 1.0,
                    Ok(r) => r,
                    Err(_) => f64::NAN,
                })
                .collect()
        })
        .collect();
    CorrelationMatrix { labels, values }
}

fn equal_width_edges(lo: f64, hi: f64, n_bins: usize) -> Vec<f64> {
    let width = (hi - lo) / n_bins as f64;
    (0..=n_bins)
        .map(|i| {
            if i == n_bins {
                hi
            } else {
                lo + width * i as f64
            }
        })
        .collect()
}

/// Bin index for `v` among equal-width bins; the last bin is closed on the right.
fn bin_of(v: f64, lo: f64, hi: f64, n_bins: usize) -> usize {
    if hi <= lo {
        return 0;
    }
    let b = ((v - lo) / (hi - lo) * n_bins as f64).floor() as usize;
    b.min(n_bins - 1)
}

fn min_max(xs: &[f64]) -> (f64, f64) {
    xs.iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(*v), hi.max(*v))
        })
}

pub fn histogram(feature_name: &str, values: &[f64], n_bins: usize) -> Result<Histogram> {
    if values.is_empty() {
        return Err(Error::Empty("histogram input"));
    }
    if n_bins == 0 {
        return Err(Error::InvalidArgument(
            "histogram needs at least one bin".into(),
        ));
    }
    let (lo, hi) = min_max(values);
    let mut counts = vec![0; n_bins];
    for v in values {
        counts[bin_of(*v, lo, hi, n_bins)] += 1;
    }
    Ok(Histogram {
        feature_name: feature_name.to_string(),
        bin_edges: equal_width_edges(lo, hi, n_bins),
        counts,
    })
}

/// Mean total over an `n_bins × n_bins` equal-width grid of two components,
/// using every record where both are present.
pub fn gradient_map(
    records: &[AssessmentRecord],
    x_feature: Feature,
    y_feature: Feature,
    n_bins: usize,
) -> Result<GradientMap> {
    if n_bins < 2 {
        return Err(Error::InvalidArgument(
            "gradient map needs at least two bins per axis".into(),
        ));
    }
    let pts: Vec<(f64, f64, f64)> = records
        .iter()
        .filter_map(|r| Some((r.get(x_feature)?, r.get(y_feature)?, r.total())))
        .collect();
    if pts.is_empty() {
        return Err(Error::Empty("gradient map input"));
    }
    let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
    let (xlo, xhi) = min_max(&xs);
    let (ylo, yhi) = min_max(&ys);
    let mut sums = vec![vec![0.0; n_bins]; n_bins];
    let mut counts = vec![vec![0usize; n_bins]; n_bins];
    for (x, y, t) in &pts {
        let i = bin_of(*x, xlo, xhi, n_bins);
        let j = bin_of(*y, ylo, yhi, n_bins);
        sums[i][j] += t;
        counts[i][j] += 1;
    }
    let cell_mean = sums
        .iter()
        .zip(&counts)
        .map(|(sr, cr)| {
            sr.iter()
                .zip(cr)
                .map(|(s, c)| (*c > 0).then(|| s / *c as f64))
                .collect()
        })
        .collect();
    Ok(GradientMap {
        x_feature,
        y_feature,
        x_edges: equal_width_edges(xlo, xhi, n_bins),
        y_edges: equal_width_edges(ylo, yhi, n_bins),
        cell_mean,
        cell_count: counts,
    })
}

impl GradientMap {
    /// Correlation between the x-bin index of each occupied cell and its mean
    /// total: a scalar summary of how strongly the map trends along x.
    pub fn x_trend(&self) -> Result<f64> {
        let mut idx = Vec::new();
        let mut means = Vec::new();
        for (i, row) in self.cell_mean.iter().enumerate() {
            for m in row.iter().flatten() {
                idx.push(i as f64);
                means.push(*m);
            }
        }
        pearson(&idx, &means)
    }
}

pub fn write_histograms<W: Write>(mut w: W, hists: &[Histogram]) -> std::io::Result<()> {
    writeln!(w, "feature,bin,lower,upper,count")?;
    for h in hists {
        for (b, c) in h.counts.iter().enumerate() {
            writeln!(
                w,
                "{},{},{},{},{}",
                h.feature_name,
                b,
                h.bin_edges[b],
                h.bin_edges[b + 1],
                c
            )?;
        }
    }
    w.flush()
}

/// Undefined coefficients are written as `NA`.
pub fn write_correlations<W: Write>(mut w: W, m: &CorrelationMatrix) -> std::io::Result<()> {
    writeln!(w, "label,{}", m.labels.join(","))?;
    for (label, row) in m.labels.iter().zip(&m.values) {
        let cells: Vec<String> = row
            .iter()
            .map(|v| {
                if v.is_finite() {
                    v.to_string()
                } else {
                    "NA".into()
                }
            })
            .collect();
        writeln!(w, "{label},{}", cells.join(","))?;
    }
    w.flush()
}

/// Empty cells carry `NA` in `mean_total`.
pub fn write_gradient_maps<W: Write>(mut w: W, maps: &[GradientMap]) -> std::io::Result<()> {
    writeln!(
        w,
        "x_feature,y_feature,x_bin,y_bin,x_lower,x_upper,y_lower,y_upper,count,mean_total"
    )?;
    for m in maps {
        for (i, row) in m.cell_mean.iter().enumerate() {
            for (j, mean) in row.iter().enumerate() {
                let mean = mean.map_or_else(|| "NA".to_string(), |v| v.to_string());
                writeln!(
                    w,
                    "{},{},{},{},{},{},{},{},{},{}",
                    m.x_feature,
                    m.y_feature,
                    i,
                    j,
                    m.x_edges[i],
                    m.x_edges[i + 1],
                    m.y_edges[j],
                    m.y_edges[j + 1],
                    m.cell_count[i][j],
                    mean
                )?;
            }
        }
    }
    w.flush()
}
