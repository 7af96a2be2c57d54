//! Data model, CSV ingestion, synthetic generation, and corruption injection.
//!
//! A [`Dataset`] is an ordered list of labeled points; the point index is the
//! identity of the source throughout the crate. Datasets are immutable after
//! construction; corruption operations return a modified copy plus a
//! [`CorruptionReport`] naming exactly the affected sources.

use std::collections::HashMap;
use std::path::Path;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{derive_rng, fnv1a64_bytes, sample_indices};

/// One training source: a feature vector and a class label in `[0, K)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledPoint {
    pub features: Vec<f64>,
    pub label: usize,
}

/// Ordered, immutable training/evaluation data. Point index i is player i.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    points: Vec<LabeledPoint>,
    feature_dim: usize,
    num_classes: usize,
    groups: Option<Vec<usize>>,
    num_groups: usize,
    /// Original label strings by class index, when loaded from CSV.
    pub label_names: Option<Vec<String>>,
    /// Original group strings by group index, when loaded from CSV.
    pub group_names: Option<Vec<String>>,
}

impl Dataset {
    pub fn new(points: Vec<LabeledPoint>, feature_dim: usize, num_classes: usize) -> Result<Self> {
        Self::with_groups(points, feature_dim, num_classes, None)
    }

    pub fn with_groups(
        points: Vec<LabeledPoint>,
        feature_dim: usize,
        num_classes: usize,
        groups: Option<Vec<usize>>,
    ) -> Result<Self> {
        if num_classes < 2 {
            return Err(Error::SingleClass(num_classes));
        }
        for (i, p) in points.iter().enumerate() {
            if p.features.len() != feature_dim {
                return Err(Error::DimMismatch {
                    expected: feature_dim,
                    got: p.features.len(),
                });
            }
            if p.label >= num_classes {
                return Err(Error::InvalidArgument(format!(
                    "point {i} has label {} >= num_classes {num_classes}",
                    p.label
                )));
            }
        }
        let num_groups = match &groups {
            None => 0,
            Some(g) => {
                if g.len() != points.len() {
                    return Err(Error::LengthMismatch {
                        a: g.len(),
                        b: points.len(),
                    });
                }
                let count = g.iter().max().map_or(0, |m| m + 1);
                let mut seen = vec![false; count];
                for &gi in g {
                    seen[gi] = true;
                }
                if let Some(missing) = seen.iter().position(|s| !s) {
                    return Err(Error::InvalidArgument(format!(
                        "group index {missing} has no points"
                    )));
                }
                count
            }
        };
        Ok(Self {
            points,
            feature_dim,
            num_classes,
            groups,
            num_groups,
            label_names: None,
            group_names: None,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn feature_dim(&self) -> usize {
        self.feature_dim
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn point(&self, i: usize) -> &LabeledPoint {
        &self.points[i]
    }

    pub fn points(&self) -> &[LabeledPoint] {
        &self.points
    }

    pub fn groups(&self) -> Option<&[usize]> {
        self.groups.as_deref()
    }

    pub fn num_groups(&self) -> usize {
        self.num_groups
    }

    /// Point indices of each group, ascending within each group.
    pub fn group_members(&self) -> Result<Vec<Vec<usize>>> {
        let groups = self.groups.as_ref().ok_or(Error::MissingGroups)?;
        let mut members = vec![Vec::new(); self.num_groups];
        for (i, &g) in groups.iter().enumerate() {
            members[g].push(i);
        }
        Ok(members)
    }

    /// New dataset holding the selected points, order preserved. Group and
    /// name metadata is dropped; the result is a plain point collection.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        let mut points = Vec::with_capacity(indices.len());
        for &i in indices {
            if i >= self.len() {
                return Err(Error::InvalidArgument(format!(
                    "subset index {i} out of range for n={}",
                    self.len()
                )));
            }
            points.push(self.points[i].clone());
        }
        Dataset::new(points, self.feature_dim, self.num_classes)
    }

    /// Concatenate two datasets over the same feature space.
    pub fn concat(a: &Dataset, b: &Dataset) -> Result<Self> {
        if a.feature_dim != b.feature_dim {
            return Err(Error::DimMismatch {
                expected: a.feature_dim,
                got: b.feature_dim,
            });
        }
        let num_classes = a.num_classes.max(b.num_classes);
        let mut points = a.points.clone();
        points.extend(b.points.iter().cloned());
        Dataset::new(points, a.feature_dim, num_classes)
    }

    /// Seeded row shuffle (metadata preserved, groups permuted alongside).
    pub fn shuffled(&self, seed: u64) -> Self {
        let mut rng = derive_rng(seed, "shuffle", 0);
        let perm = crate::rng::permutation(self.len(), &mut rng);
        let points = perm.iter().map(|&i| self.points[i].clone()).collect();
        let groups = self
            .groups
            .as_ref()
            .map(|g| perm.iter().map(|&i| g[i]).collect());
        Self {
            points,
            feature_dim: self.feature_dim,
            num_classes: self.num_classes,
            groups,
            num_groups: self.num_groups,
            label_names: self.label_names.clone(),
            group_names: self.group_names.clone(),
        }
    }

    /// Split by row ranges into consecutive parts of the given sizes.
    pub fn split(&self, sizes: &[usize]) -> Result<Vec<Dataset>> {
        let total: usize = sizes.iter().sum();
        if total > self.len() {
            return Err(Error::InvalidArgument(format!(
                "split sizes sum to {total} > n={}",
                self.len()
            )));
        }
        let mut out = Vec::with_capacity(sizes.len());
        let mut start = 0;
        for &s in sizes {
            let indices: Vec<usize> = (start..start + s).collect();
            out.push(self.subset(&indices)?);
            start += s;
        }
        Ok(out)
    }

    /// Stable content digest over shape, features, labels, and groups.
    pub fn digest(&self) -> String {
        let mut bytes = Vec::with_capacity(self.len() * (self.feature_dim + 1) * 8 + 32);
        bytes.extend_from_slice(&(self.len() as u64).to_le_bytes());
        bytes.extend_from_slice(&(self.feature_dim as u64).to_le_bytes());
        bytes.extend_from_slice(&(self.num_classes as u64).to_le_bytes());
        for p in &self.points {
            for &x in &p.features {
                bytes.extend_from_slice(&x.to_le_bytes());
            }
            bytes.extend_from_slice(&(p.label as u64).to_le_bytes());
        }
        if let Some(g) = &self.groups {
            for &gi in g {
                bytes.extend_from_slice(&(gi as u64).to_le_bytes());
            }
        }
        format!("{:016x}", fnv1a64_bytes(&bytes))
    }
}

/// A coalition: strictly increasing point (or group) indices drawn from a
/// universe of `universe_size` players.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceSet {
    indices: Vec<usize>,
    universe_size: usize,
}

impl SourceSet {
    pub fn new(mut indices: Vec<usize>, universe_size: usize) -> Result<Self> {
        indices.sort_unstable();
        for w in indices.windows(2) {
            if w[0] == w[1] {
                return Err(Error::InvalidArgument(format!(
                    "duplicate index {} in source set",
                    w[0]
                )));
            }
        }
        if let Some(&last) = indices.last() {
            if last >= universe_size {
                return Err(Error::InvalidArgument(format!(
                    "index {last} out of range for universe {universe_size}"
                )));
            }
        }
        Ok(Self {
            indices,
            universe_size,
        })
    }

    pub fn empty(universe_size: usize) -> Self {
        Self {
            indices: Vec::new(),
            universe_size,
        }
    }

    pub fn full(universe_size: usize) -> Self {
        Self {
            indices: (0..universe_size).collect(),
            universe_size,
        }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn universe_size(&self) -> usize {
        self.universe_size
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.indices.binary_search(&i).is_ok()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorruptionKind {
    LabelFlip,
    FeatureNoise,
}

/// Which sources a corruption pass touched, and how.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorruptionReport {
    pub affected: SourceSet,
    pub kind: CorruptionKind,
    /// Standard deviation of the added noise, in feature units. Zero iff the
    /// corruption was a label flip.
    pub noise_sigma: f64,
}

/// Feature-label relation used by the synthetic generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    Linear,
    Poly3,
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

enum LabelRule {
    Linear(Vec<f64>),
    /// (coefficient, distinct variable indices) monomials of degree 1..=3.
    Poly(Vec<(f64, Vec<usize>)>),
}

impl LabelRule {
    fn draw(relation: Relation, dim: usize, rng: &mut impl Rng) -> Self {
        match relation {
            Relation::Linear => {
                let w: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
                LabelRule::Linear(w)
            }
            Relation::Poly3 => {
                // Distinct variables per monomial keep every term zero-mean
                // under standard normal inputs, so classes stay balanced.
                let count = 2 * dim;
                let mut terms = Vec::with_capacity(count);
                for _ in 0..count {
                    let degree = rng.random_range(1..=3usize).min(dim);
                    let vars = sample_indices(dim, degree, rng);
                    let coef: f64 = StandardNormal.sample(rng);
                    terms.push((coef, vars));
                }
                LabelRule::Poly(terms)
            }
        }
    }

    fn eval(&self, x: &[f64]) -> f64 {
        match self {
            LabelRule::Linear(w) => w.iter().zip(x).map(|(a, b)| a * b).sum(),
            LabelRule::Poly(terms) => terms
                .iter()
                .map(|(c, vars)| c * vars.iter().map(|&v| x[v]).product::<f64>())
                .sum(),
        }
    }
}

/// Gaussian-feature binary dataset with a seeded linear or third-order
/// polynomial label rule: P(y = 1 | x) = sigmoid(f(x)).
pub fn generate_synthetic(n: usize, dim: usize, relation: Relation, seed: u64) -> Result<Dataset> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("n must be >= 2, got {n}")));
    }
    if dim < 1 {
        return Err(Error::InvalidArgument("dim must be >= 1".into()));
    }
    let mut rng = derive_rng(seed, "synthetic", 0);
    let rule = LabelRule::draw(relation, dim, &mut rng);
    let mut points = Vec::with_capacity(n);
    for _ in 0..n {
        let features: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
        let p1 = sigmoid(rule.eval(&features));
        let u: f64 = rng.random();
        let label = usize::from(u < p1);
        points.push(LabeledPoint { features, label });
    }
    Dataset::new(points, dim, 2)
}

/// Half-away-from-zero count of corrupted points for a fraction of n.
fn corruption_count(n: usize, fraction: f64) -> Result<usize> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "fraction must lie in (0,1), got {fraction}"
        )));
    }
    Ok((fraction * n as f64).round() as usize)
}

/// Flip labels of a uniformly chosen fraction of a binary dataset.
pub fn flip_labels(ds: &Dataset, fraction: f64, seed: u64) -> Result<(Dataset, CorruptionReport)> {
    if ds.num_classes() != 2 {
        return Err(Error::InvalidArgument(format!(
            "label flipping supports binary tasks only, got K={}",
            ds.num_classes()
        )));
    }
    let n = ds.len();
    let count = corruption_count(n, fraction)?;
    if count == 0 || count == n {
        return Err(Error::InvalidArgument(format!(
            "fraction {fraction} rounds to {count} of {n} points"
        )));
    }
    let mut rng = derive_rng(seed, "flip", 0);
    let affected = sample_indices(n, count, &mut rng);
    let mut points = ds.points.clone();
    for &i in &affected {
        points[i].label = 1 - points[i].label;
    }
    let flipped = Dataset {
        points,
        feature_dim: ds.feature_dim,
        num_classes: ds.num_classes,
        groups: ds.groups.clone(),
        num_groups: ds.num_groups,
        label_names: ds.label_names.clone(),
        group_names: ds.group_names.clone(),
    };
    let report = CorruptionReport {
        affected: SourceSet::new(affected, n)?,
        kind: CorruptionKind::LabelFlip,
        noise_sigma: 0.0,
    };
    Ok((flipped, report))
}

/// Add i.i.d. Gaussian(0, sigma^2) noise to every feature of a uniformly
/// chosen fraction of points.
pub fn add_feature_noise(
    ds: &Dataset,
    fraction: f64,
    sigma: f64,
    seed: u64,
) -> Result<(Dataset, CorruptionReport)> {
    if sigma <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "sigma must be > 0, got {sigma}; copy the dataset for a no-op"
        )));
    }
    let n = ds.len();
    let count = corruption_count(n, fraction)?;
    let mut rng = derive_rng(seed, "noise", 0);
    let affected = sample_indices(n, count, &mut rng);
    let mut points = ds.points.clone();
    for &i in &affected {
        for x in points[i].features.iter_mut() {
            let z: f64 = StandardNormal.sample(&mut rng);
            *x += sigma * z;
        }
    }
    let noisy = Dataset {
        points,
        feature_dim: ds.feature_dim,
        num_classes: ds.num_classes,
        groups: ds.groups.clone(),
        num_groups: ds.num_groups,
        label_names: ds.label_names.clone(),
        group_names: ds.group_names.clone(),
    };
    let report = CorruptionReport {
        affected: SourceSet::new(affected, n)?,
        kind: CorruptionKind::FeatureNoise,
        noise_sigma: sigma,
    };
    Ok((noisy, report))
}

/// Load a dataset from a headered CSV file.
///
/// Feature columns are every column other than the label and optional group
/// column, in file order. Labels that already form a dense integer range
/// 0..K-1 are kept as-is; anything else is mapped by first appearance and the
/// original strings recorded in `label_names`.
pub fn load_csv(
    path: impl AsRef<Path>,
    label_column: &str,
    group_column: Option<&str>,
) -> Result<Dataset> {
    let path = path.as_ref();
    if !path.exists() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_path(path)
        .map_err(|e| Error::CsvFormat(e.to_string()))?;
    let headers = reader
        .headers()
        .map_err(|e| Error::CsvFormat(e.to_string()))?
        .clone();
    let label_idx = headers
        .iter()
        .position(|h| h == label_column)
        .ok_or_else(|| Error::CsvFormat(format!("label column '{label_column}' not found")))?;
    let group_idx = match group_column {
        None => None,
        Some(g) => Some(
            headers
                .iter()
                .position(|h| h == g)
                .ok_or_else(|| Error::CsvFormat(format!("group column '{g}' not found")))?,
        ),
    };
    let feature_cols: Vec<usize> = (0..headers.len())
        .filter(|&i| i != label_idx && Some(i) != group_idx)
        .collect();
    if feature_cols.is_empty() {
        return Err(Error::CsvFormat("no feature columns".into()));
    }

    let mut raw_labels: Vec<String> = Vec::new();
    let mut raw_groups: Vec<String> = Vec::new();
    let mut features: Vec<Vec<f64>> = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| match e.kind() {
            csv::ErrorKind::UnequalLengths { .. } => {
                Error::CsvFormat(format!("ragged row {}: {e}", row + 1))
            }
            _ => Error::CsvFormat(e.to_string()),
        })?;
        let mut fv = Vec::with_capacity(feature_cols.len());
        for &c in &feature_cols {
            let cell = &record[c];
            let v: f64 = cell.trim().parse().map_err(|_| Error::CsvCell {
                row: row + 1,
                column: headers[c].to_string(),
                message: format!("'{cell}' is not numeric"),
            })?;
            fv.push(v);
        }
        features.push(fv);
        raw_labels.push(record[label_idx].trim().to_string());
        if let Some(g) = group_idx {
            raw_groups.push(record[g].trim().to_string());
        }
    }
    if features.is_empty() {
        return Err(Error::CsvFormat("no data rows".into()));
    }

    let (labels, label_names) = map_labels(&raw_labels)?;
    let num_classes = label_names.as_ref().map_or_else(
        || labels.iter().max().unwrap() + 1,
        |names| names.len(),
    );
    if num_classes < 2 {
        return Err(Error::SingleClass(num_classes));
    }

    let (groups, group_names) = if group_idx.is_some() {
        let mut seen: HashMap<String, usize> = HashMap::new();
        let mut names = Vec::new();
        let mut ids = Vec::with_capacity(raw_groups.len());
        for g in &raw_groups {
            let next = seen.len();
            let id = *seen.entry(g.clone()).or_insert(next);
            if id == names.len() {
                names.push(g.clone());
            }
            ids.push(id);
        }
        (Some(ids), Some(names))
    } else {
        (None, None)
    };

    let dim = features[0].len();
    let points = features
        .into_iter()
        .zip(labels)
        .map(|(features, label)| LabeledPoint { features, label })
        .collect();
    let mut ds = Dataset::with_groups(points, dim, num_classes, groups)?;
    ds.label_names = label_names;
    ds.group_names = group_names;
    Ok(ds)
}

/// Dense integer labels pass through; everything else maps by first appearance.
fn map_labels(raw: &[String]) -> Result<(Vec<usize>, Option<Vec<String>>)> {
    let as_ints: Option<Vec<i64>> = raw.iter().map(|s| s.parse::<i64>().ok()).collect();
    if let Some(ints) = as_ints {
        let min = *ints.iter().min().unwrap();
        let max = *ints.iter().max().unwrap();
        if min == 0 {
            let k = (max + 1) as usize;
            let mut seen = vec![false; k];
            for &v in &ints {
                seen[v as usize] = true;
            }
            if seen.iter().all(|&s| s) {
                return Ok((ints.into_iter().map(|v| v as usize).collect(), None));
            }
        }
    }
    let mut seen: HashMap<&str, usize> = HashMap::new();
    let mut names = Vec::new();
    let mut labels = Vec::with_capacity(raw.len());
    for s in raw {
        let next = seen.len();
        let id = *seen.entry(s.as_str()).or_insert(next);
        if id == names.len() {
            names.push(s.clone());
        }
        labels.push(id);
    }
    Ok((labels, Some(names)))
}
