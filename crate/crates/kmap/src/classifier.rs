//! Linear discriminant analysis over complexity features.
//!
//! A trained [`DiscriminantModel`] holds per-group means, a pooled
//! within-group covariance, and the linear score functions derived from
//! them. Classification is argmax of the per-group scores; the squared
//! Mahalanobis distances between group means drive merge suggestions for
//! types the features cannot tell apart.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use nalgebra::{Cholesky, DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::EstimatorId;
use crate::probe::ComplexityMap;

/// Current on-disk model format.
pub const MODEL_FORMAT_VERSION: u32 = 1;

// Ridge strength and the condition number that triggers it.
const RIDGE_LAMBDA: f64 = 1e-6;
const MAX_CONDITION: f64 = 1e10;

/// A semantic type label. Six canonical names ship with the tool; any other
/// well-formed name is accepted as a user-defined type.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct SemanticType(String);

impl SemanticType {
    pub const CANONICAL: [&'static str; 6] = ["Audio", "Doc", "Exe", "Pic", "Txt", "Vid"];

    /// Parses a type name. The canonical six match case-insensitively and
    /// normalize to their canonical capitalization; other names are kept
    /// verbatim. Names are limited to alphanumerics plus `_.-+`.
    pub fn new(name: &str) -> Result<Self> {
        let t = name.trim();
        if t.is_empty() {
            return Err(Error::UnknownType("empty type name".to_string()));
        }
        let ok = t
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '+'));
        if !ok {
            return Err(Error::UnknownType(format!(
                "type name {t:?} contains characters outside [A-Za-z0-9_+-]"
            )));
        }
        for c in Self::CANONICAL {
            if c.eq_ignore_ascii_case(t) {
                return Ok(Self(c.to_string()));
            }
        }
        Ok(Self(t.to_string()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for SemanticType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl FromStr for SemanticType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::new(s)
    }
}

impl TryFrom<String> for SemanticType {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        Self::new(&s)
    }
}

impl From<SemanticType> for String {
    fn from(t: SemanticType) -> String {
        t.0
    }
}

/// Which features a model consumes: one dimension per estimator, plus the
/// sample length in bytes as the final dimension.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureSchema {
    pub estimators: Vec<EstimatorId>,
}

impl FeatureSchema {
    pub fn new(estimators: Vec<EstimatorId>) -> Self {
        Self { estimators }
    }

    pub fn dim(&self) -> usize {
        self.estimators.len() + 1
    }
}

/// One sample's features: mean window complexity per estimator and the
/// sample length in bytes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub complexity: Vec<f64>,
    pub length_bytes: f64,
}

impl FeatureVector {
    pub fn new(complexity: Vec<f64>, length_bytes: f64) -> Self {
        Self {
            complexity,
            length_bytes,
        }
    }

    pub fn dim(&self) -> usize {
        self.complexity.len() + 1
    }

    fn dense(&self) -> DVector<f64> {
        let mut v = DVector::zeros(self.dim());
        for (i, &c) in self.complexity.iter().enumerate() {
            v[i] = c;
        }
        v[self.complexity.len()] = self.length_bytes;
        v
    }
}

/// One group's linear score function: constant + weights · x.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearDiscriminant {
    pub constant: f64,
    pub weights: Vec<f64>,
}

impl LinearDiscriminant {
    pub fn score(&self, x: &[f64]) -> f64 {
        self.constant
            + self
                .weights
                .iter()
                .zip(x)
                .map(|(w, xi)| w * xi)
                .sum::<f64>()
    }
}

/// A trained linear discriminant model.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiscriminantModel {
    pub format_version: u32,
    pub schema: FeatureSchema,
    pub groups: Vec<SemanticType>,
    pub means: Vec<Vec<f64>>,
    pub pooled_cov: Vec<Vec<f64>>,
    pub priors: Vec<f64>,
    pub coefficients: Vec<LinearDiscriminant>,
}

/// Squared Mahalanobis distances between group means.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SquaredDistanceMatrix {
    pub groups: Vec<SemanticType>,
    pub d2: Vec<Vec<f64>>,
}

/// A pair of groups the features barely separate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MergeSuggestion {
    pub a: SemanticType,
    pub b: SemanticType,
    pub d2: f64,
}

/// Confusion counts and accuracy from scoring a labeled test set.
#[derive(Debug, Clone, Serialize)]
pub struct Evaluation {
    /// Model groups first, then any test-only labels.
    pub groups: Vec<SemanticType>,
    /// confusion[actual][predicted].
    pub confusion: Vec<Vec<u64>>,
    /// Fraction of samples classified correctly.
    pub overall: f64,
    /// Per-group fraction correct (diagonal over row total).
    pub per_group: Vec<f64>,
}

/// Fits a model: group means, pooled within-group covariance over N − G
/// degrees of freedom, and the per-group linear coefficients.
pub fn train(
    schema: &FeatureSchema,
    samples: &[(FeatureVector, SemanticType)],
    priors: Option<&BTreeMap<SemanticType, f64>>,
) -> Result<DiscriminantModel> {
    let dim = schema.dim();
    for (fv, ty) in samples {
        if fv.dim() != dim {
            return Err(Error::InvalidConfig(format!(
                "sample labeled {ty} has {} feature dimensions, schema expects {dim}",
                fv.dim()
            )));
        }
        if !fv.complexity.iter().all(|c| c.is_finite()) || !fv.length_bytes.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "sample labeled {ty} has non-finite features"
            )));
        }
    }

    let mut by_type: BTreeMap<&SemanticType, Vec<&FeatureVector>> = BTreeMap::new();
    for (fv, ty) in samples {
        by_type.entry(ty).or_default().push(fv);
    }
    if by_type.len() < 2 {
        return Err(Error::InsufficientSamples(format!(
            "{} group(s) in training data; need at least 2",
            by_type.len()
        )));
    }
    for (ty, list) in &by_type {
        if list.len() < 2 {
            return Err(Error::InsufficientSamples(format!(
                "group {ty} has {} sample(s); need at least 2",
                list.len()
            )));
        }
    }

    let groups: Vec<SemanticType> = by_type.keys().map(|&t| t.clone()).collect();
    let n_total = samples.len();
    let n_groups = groups.len();

    let mut means: Vec<DVector<f64>> = Vec::with_capacity(n_groups);
    let mut scatter = DMatrix::<f64>::zeros(dim, dim);
    for list in by_type.values() {
        let mut mean = DVector::zeros(dim);
        for fv in list {
            mean += fv.dense();
        }
        mean /= list.len() as f64;
        for fv in list {
            let d = fv.dense() - &mean;
            scatter += &d * d.transpose();
        }
        means.push(mean);
    }
    let cov = scatter / (n_total - n_groups) as f64;

    let prior_vec: Vec<f64> = match priors {
        None => by_type
            .values()
            .map(|l| l.len() as f64 / n_total as f64)
            .collect(),
        Some(map) => {
            let mut given = Vec::with_capacity(n_groups);
            for g in &groups {
                let p = *map.get(g).ok_or_else(|| {
                    Error::InvalidConfig(format!("no prior supplied for group {g}"))
                })?;
                if !(p > 0.0 && p.is_finite()) {
                    return Err(Error::InvalidConfig(format!(
                        "prior for group {g} must be positive, got {p}"
                    )));
                }
                given.push(p);
            }
            let total: f64 = given.iter().sum();
            given.into_iter().map(|p| p / total).collect()
        }
    };

    let mean_rows: Vec<Vec<f64>> = means.iter().map(|m| m.iter().copied().collect()).collect();
    let cov_rows: Vec<Vec<f64>> = (0..dim)
        .map(|i| (0..dim).map(|j| cov[(i, j)]).collect())
        .collect();
    let coefficients = coefficients_from(&mean_rows, &cov_rows, &prior_vec)?;

    Ok(DiscriminantModel {
        format_version: MODEL_FORMAT_VERSION,
        schema: schema.clone(),
        groups,
        means: mean_rows,
        pooled_cov: cov_rows,
        priors: prior_vec,
        coefficients,
    })
}

// The pooled covariance is inverted in a per-dimension scaled space.
// Features span wildly different magnitudes (window complexities near 1
// against byte lengths in the tens of thousands) and a dimension can be
// nearly constant, like stream length over fixed-size samples; scaling by
// the larger of each dimension's spread and its mean magnitude keeps the
// solve conditioned and the scores within float range in both cases.
struct ScaledInverse {
    inv: DMatrix<f64>,
    scale: Vec<f64>,
}

impl ScaledInverse {
    fn new(means: &[Vec<f64>], cov: &[Vec<f64>]) -> Result<Self> {
        let dim = cov.len();
        let n_groups = means.len() as f64;
        let scale: Vec<f64> = (0..dim)
            .map(|i| {
                let spread = cov[i][i].max(0.0).sqrt();
                let location =
                    (means.iter().map(|m| m[i] * m[i]).sum::<f64>() / n_groups).sqrt();
                let s = spread.max(location);
                if s > 0.0 {
                    s
                } else {
                    1.0
                }
            })
            .collect();
        let scaled = DMatrix::from_fn(dim, dim, |i, j| cov[i][j] / (scale[i] * scale[j]));
        let scaled = regularize(scaled)?;
        let inv = Cholesky::new(scaled)
            .ok_or_else(|| {
                Error::DegenerateFeatures(
                    "pooled covariance is not positive definite after regularization".to_string(),
                )
            })?
            .inverse();
        Ok(Self { inv, scale })
    }

    // Computes sigma^-1 v through the scaled space.
    fn apply(&self, v: &[f64]) -> DVector<f64> {
        let scaled =
            DVector::from_iterator(v.len(), v.iter().zip(&self.scale).map(|(x, s)| x / s));
        let y = &self.inv * scaled;
        DVector::from_iterator(v.len(), y.iter().zip(&self.scale).map(|(x, s)| x / s))
    }

    // Computes the quadratic form d^T sigma^-1 d.
    fn quad(&self, d: &[f64]) -> f64 {
        let scaled =
            DVector::from_iterator(d.len(), d.iter().zip(&self.scale).map(|(x, s)| x / s));
        (&self.inv * &scaled).dot(&scaled)
    }
}

// Computes every group's linear coefficients from the model statistics.
// Training, validation, and the distance matrix all route through here so
// a model always recomputes against itself.
fn coefficients_from(
    means: &[Vec<f64>],
    cov: &[Vec<f64>],
    priors: &[f64],
) -> Result<Vec<LinearDiscriminant>> {
    let solver = ScaledInverse::new(means, cov)?;
    Ok(means
        .iter()
        .zip(priors)
        .map(|(mean, prior)| {
            let w = solver.apply(mean);
            let c = -0.5 * mean.iter().zip(w.iter()).map(|(a, b)| a * b).sum::<f64>()
                + prior.ln();
            LinearDiscriminant {
                constant: c,
                weights: w.iter().copied().collect(),
            }
        })
        .collect())
}

// Applies a ridge when the scaled covariance is ill-conditioned. Small
// corpora with near-collinear estimator values land here routinely.
fn regularize(cov: DMatrix<f64>) -> Result<DMatrix<f64>> {
    let dim = cov.nrows();
    let eig = cov.clone().symmetric_eigen();
    let lam_max = eig.eigenvalues.iter().cloned().fold(f64::MIN, f64::max);
    let lam_min = eig.eigenvalues.iter().cloned().fold(f64::MAX, f64::min);
    let well_conditioned = lam_min > 0.0 && lam_max / lam_min <= MAX_CONDITION;
    if well_conditioned {
        return Ok(cov);
    }
    let ridge = RIDGE_LAMBDA * cov.trace() / dim as f64;
    if ridge.is_nan() || ridge <= 0.0 {
        return Err(Error::DegenerateFeatures(
            "covariance trace is zero; all features are constant".to_string(),
        ));
    }
    Ok(cov + DMatrix::identity(dim, dim) * ridge)
}

impl DiscriminantModel {
    pub fn dim(&self) -> usize {
        self.schema.dim()
    }

    fn check_input(&self, x: &FeatureVector) -> Result<()> {
        if x.dim() != self.dim() {
            return Err(Error::ModelMismatch(format!(
                "feature vector has {} dimensions, model expects {} ({} estimators + length)",
                x.dim(),
                self.dim(),
                self.schema.estimators.len()
            )));
        }
        Ok(())
    }

    /// Per-group scores c_g + w_g · x, in group order.
    pub fn score(&self, x: &FeatureVector) -> Result<Vec<f64>> {
        self.check_input(x)?;
        let dense: Vec<f64> = x.dense().iter().copied().collect();
        Ok(self.coefficients.iter().map(|c| c.score(&dense)).collect())
    }

    /// The group with the highest score; ties go to the earlier group.
    pub fn classify(&self, x: &FeatureVector) -> Result<&SemanticType> {
        let scores = self.score(x)?;
        let mut best = 0;
        for (i, &s) in scores.iter().enumerate().skip(1) {
            if s > scores[best] {
                best = i;
            }
        }
        Ok(&self.groups[best])
    }

    /// Classifies a whole map: mean window complexity per schema estimator,
    /// length feature = total bytes covered by the map.
    pub fn classify_file(&self, map: &ComplexityMap) -> Result<&SemanticType> {
        self.classify(&features_from_map(map, &self.schema)?)
    }

    /// Squared Mahalanobis distances between all group-mean pairs.
    pub fn squared_distance_matrix(&self) -> Result<SquaredDistanceMatrix> {
        let solver = ScaledInverse::new(&self.means, &self.pooled_cov)?;
        let n = self.groups.len();
        let mut d2 = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in i + 1..n {
                let diff: Vec<f64> = self.means[i]
                    .iter()
                    .zip(&self.means[j])
                    .map(|(a, b)| a - b)
                    .collect();
                let v = solver.quad(&diff);
                d2[i][j] = v;
                d2[j][i] = v;
            }
        }
        Ok(SquaredDistanceMatrix {
            groups: self.groups.clone(),
            d2,
        })
    }

    /// Structural and numerical consistency checks: shapes, priors, and a
    /// recomputation of every coefficient from means, covariance, and
    /// priors. `tol` is the mixed absolute/relative tolerance.
    pub fn validate(&self, tol: f64) -> std::result::Result<(), String> {
        let dim = self.dim();
        let n = self.groups.len();
        if n == 0 {
            return Err("model has no groups".to_string());
        }
        if self.groups.iter().collect::<BTreeSet<_>>().len() != n {
            return Err("duplicate group labels".to_string());
        }
        if self.means.len() != n || self.priors.len() != n || self.coefficients.len() != n {
            return Err("per-group field lengths disagree with group count".to_string());
        }
        if self.means.iter().any(|m| m.len() != dim) {
            return Err("mean vector dimension disagrees with schema".to_string());
        }
        if self.pooled_cov.len() != dim || self.pooled_cov.iter().any(|r| r.len() != dim) {
            return Err("covariance shape disagrees with schema".to_string());
        }
        for i in 0..dim {
            for j in 0..dim {
                let (a, b) = (self.pooled_cov[i][j], self.pooled_cov[j][i]);
                if (a - b).abs() > 1e-9 * (1.0 + a.abs().max(b.abs())) {
                    return Err("covariance is not symmetric".to_string());
                }
            }
        }
        let prior_sum: f64 = self.priors.iter().sum();
        if self.priors.iter().any(|&p| p.is_nan() || p <= 0.0) || (prior_sum - 1.0).abs() > 1e-6 {
            return Err(format!("priors invalid (sum {prior_sum})"));
        }

        let recomputed = coefficients_from(&self.means, &self.pooled_cov, &self.priors)
            .map_err(|e| format!("covariance does not invert: {e}"))?;
        let close = |a: f64, b: f64| (a - b).abs() <= tol * (1.0 + b.abs());
        for (g, (fresh, coef)) in recomputed.iter().zip(&self.coefficients).enumerate() {
            if coef.weights.len() != dim {
                return Err(format!("group {g} weight dimension mismatch"));
            }
            if !close(fresh.constant, coef.constant)
                || fresh
                    .weights
                    .iter()
                    .zip(&coef.weights)
                    .any(|(a, b)| !close(*a, *b))
            {
                return Err(format!(
                    "group {} coefficients do not recompute from means and covariance",
                    self.groups[g]
                ));
            }
        }
        Ok(())
    }

    /// Writes the model as versioned JSON.
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut json = serde_json::to_string_pretty(self)
            .map_err(|e| Error::InvalidConfig(format!("model serialization failed: {e}")))?;
        json.push('\n');
        std::fs::write(path, json).map_err(|e| Error::io(path.display().to_string(), e))
    }

    /// Loads and validates a model file.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::io(path.display().to_string(), e))?;
        let model: DiscriminantModel = serde_json::from_str(&text).map_err(|e| {
            Error::InvalidFile {
                path: path.display().to_string(),
                reason: format!("not a valid model file: {e}"),
            }
        })?;
        if model.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::InvalidFile {
                path: path.display().to_string(),
                reason: format!(
                    "model format version {} unsupported (expected {MODEL_FORMAT_VERSION})",
                    model.format_version
                ),
            });
        }
        model.validate(1e-6).map_err(|reason| Error::InvalidFile {
            path: path.display().to_string(),
            reason,
        })?;
        Ok(model)
    }
}

/// Builds the file-level feature vector a model consumes from a map:
/// per-estimator mean window complexity plus total covered bytes.
pub fn features_from_map(map: &ComplexityMap, schema: &FeatureSchema) -> Result<FeatureVector> {
    if map.records.is_empty() {
        return Err(Error::EmptyInput("complexity map has no records".to_string()));
    }
    let mut complexity = Vec::with_capacity(schema.estimators.len());
    for id in &schema.estimators {
        let mut total = 0.0;
        for rec in &map.records {
            let est = rec
                .estimates
                .iter()
                .find(|e| e.estimator == *id)
                .ok_or_else(|| {
                    Error::ModelMismatch(format!(
                        "model needs estimator {id} but the map does not carry it"
                    ))
                })?;
            total += est.value;
        }
        complexity.push(total / map.records.len() as f64);
    }
    let length: u64 = map.records.iter().map(|r| r.length as u64).sum();
    Ok(FeatureVector::new(complexity, length as f64))
}

/// All unordered group pairs closer than `threshold`, ascending by distance.
pub fn suggest_merges(matrix: &SquaredDistanceMatrix, threshold: f64) -> Vec<MergeSuggestion> {
    let n = matrix.groups.len();
    let mut out = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if matrix.d2[i][j] < threshold {
                out.push(MergeSuggestion {
                    a: matrix.groups[i].clone(),
                    b: matrix.groups[j].clone(),
                    d2: matrix.d2[i][j],
                });
            }
        }
    }
    out.sort_by(|x, y| {
        x.d2.total_cmp(&y.d2)
            .then_with(|| x.a.cmp(&y.a))
            .then_with(|| x.b.cmp(&y.b))
    });
    out
}

/// Relabels samples so each connected set of merge pairs becomes one
/// combined group named by joining its sorted members with `+`.
pub fn merge_types(
    samples: &[(FeatureVector, SemanticType)],
    merges: &[(SemanticType, SemanticType)],
) -> Vec<(FeatureVector, SemanticType)> {
    // Union-find over the types mentioned in the merge list.
    let mut types: Vec<SemanticType> = Vec::new();
    let mut index = BTreeMap::new();
    for (a, b) in merges {
        for t in [a, b] {
            if !index.contains_key(t) {
                index.insert(t.clone(), types.len());
                types.push(t.clone());
            }
        }
    }
    let mut parent: Vec<usize> = (0..types.len()).collect();
    fn find(parent: &mut Vec<usize>, i: usize) -> usize {
        if parent[i] != i {
            let root = find(parent, parent[i]);
            parent[i] = root;
        }
        parent[i]
    }
    for (a, b) in merges {
        let (ia, ib) = (index[a], index[b]);
        let (ra, rb) = (find(&mut parent, ia), find(&mut parent, ib));
        if ra != rb {
            parent[ra] = rb;
        }
    }
    let mut members: BTreeMap<usize, BTreeSet<&SemanticType>> = BTreeMap::new();
    for (i, t) in types.iter().enumerate() {
        members.entry(find(&mut parent, i)).or_default().insert(t);
    }
    let mut relabel: BTreeMap<&SemanticType, SemanticType> = BTreeMap::new();
    for set in members.values() {
        if set.len() < 2 {
            continue;
        }
        let combined = SemanticType(
            set.iter()
                .map(|t| t.as_str())
                .collect::<Vec<_>>()
                .join("+"),
        );
        for t in set {
            relabel.insert(t, combined.clone());
        }
    }
    samples
        .iter()
        .map(|(fv, ty)| {
            let label = relabel.get(ty).cloned().unwrap_or_else(|| ty.clone());
            (fv.clone(), label)
        })
        .collect()
}

/// Scores a labeled test set: confusion counts and accuracy.
pub fn evaluate(
    model: &DiscriminantModel,
    test: &[(FeatureVector, SemanticType)],
) -> Result<Evaluation> {
    if test.is_empty() {
        return Err(Error::EmptyInput("empty test set".to_string()));
    }
    let mut groups = model.groups.clone();
    for (_, ty) in test {
        if !groups.contains(ty) {
            groups.push(ty.clone());
        }
    }
    let gi: BTreeMap<&SemanticType, usize> =
        groups.iter().enumerate().map(|(i, t)| (t, i)).collect();
    let n = groups.len();
    let mut confusion = vec![vec![0u64; n]; n];
    let mut correct = 0u64;
    for (fv, actual) in test {
        let predicted = model.classify(fv)?;
        confusion[gi[actual]][gi[predicted]] += 1;
        if predicted == actual {
            correct += 1;
        }
    }
    let per_group = confusion
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let total: u64 = row.iter().sum();
            if total == 0 {
                0.0
            } else {
                confusion[i][i] as f64 / total as f64
            }
        })
        .collect();
    Ok(Evaluation {
        groups,
        confusion,
        overall: correct as f64 / test.len() as f64,
        per_group,
    })
}

impl fmt::Display for SquaredDistanceMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = self
            .groups
            .iter()
            .map(|g| g.as_str().len())
            .max()
            .unwrap_or(0)
            .max(8);
        write!(f, "{:width$}", "")?;
        for g in &self.groups {
            write!(f, " {:>width$}", g.as_str())?;
        }
        writeln!(f)?;
        for (i, g) in self.groups.iter().enumerate() {
            write!(f, "{:width$}", g.as_str())?;
            for j in 0..self.groups.len() {
                write!(f, " {:>width$.4}", self.d2[i][j])?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}
