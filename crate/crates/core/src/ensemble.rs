//! Problem instances: Gaussian designs, sparse signals and noisy observations.

use rand::seq::index;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{domain, Error, Result};
use crate::rng::{stream_rng, Stream};

/// An `n × p` measurement matrix, stored column-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    n: usize,
    p: usize,
    data: Vec<f64>,
}

impl DesignMatrix {
    /// Builds a matrix from column-major entries.
    pub fn from_col_major(n: usize, p: usize, data: Vec<f64>) -> Result<Self> {
        if n == 0 || p == 0 {
            return domain(format!("design must be non-empty, got {n}x{p}"));
        }
        if data.len() != n * p {
            return Err(Error::DimensionMismatch {
                expected: n * p,
                got: data.len(),
            });
        }
        if data.iter().any(|v| !v.is_finite()) {
            return domain("design entries must be finite");
        }
        Ok(Self { n, p, data })
    }

    /// Builds a matrix from row vectors.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let p = rows.first().map_or(0, Vec::len);
        let mut data = vec![0.0; n * p];
        for (i, row) in rows.iter().enumerate() {
            if row.len() != p {
                return Err(Error::DimensionMismatch {
                    expected: p,
                    got: row.len(),
                });
            }
            for (j, &v) in row.iter().enumerate() {
                data[j * n + i] = v;
            }
        }
        Self::from_col_major(n, p, data)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.data[j * self.n..(j + 1) * self.n]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[j * self.n + i]
    }

    /// `X β` for a sparse `β`.
    pub fn mul_sparse(&self, beta: &SparseSignal) -> Result<Vec<f64>> {
        if beta.p() != self.p {
            return Err(Error::DimensionMismatch {
                expected: self.p,
                got: beta.p(),
            });
        }
        let mut out = vec![0.0; self.n];
        for (j, v) in beta.iter() {
            for (o, x) in out.iter_mut().zip(self.column(j)) {
                *o += v * x;
            }
        }
        Ok(out)
    }

    /// `X_U v` for a coefficient vector aligned with `subset`.
    pub fn mul_subset(&self, subset: &[usize], coef: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for (&j, &c) in subset.iter().zip(coef) {
            for (o, x) in out.iter_mut().zip(self.column(j)) {
                *o += c * x;
            }
        }
        out
    }
}

/// Sorted set of distinct column indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SupportSet(Vec<usize>);

impl SupportSet {
    /// Validates `indices` against dimension `p`; the input must already be
    /// strictly increasing.
    pub fn new(indices: Vec<usize>, p: usize) -> Result<Self> {
        if indices.is_empty() {
            return domain("support must be non-empty");
        }
        if indices.len() > p {
            return domain(format!("support size {} exceeds p = {p}", indices.len()));
        }
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return domain("support indices must be strictly increasing");
        }
        if indices.last().is_some_and(|&i| i >= p) {
            return domain(format!("support index out of range for p = {p}"));
        }
        Ok(Self(indices))
    }

    /// Sorts and validates.
    pub fn from_unsorted(mut indices: Vec<usize>, p: usize) -> Result<Self> {
        indices.sort_unstable();
        Self::new(indices, p)
    }

    pub(crate) fn from_sorted_unchecked(indices: Vec<usize>) -> Self {
        debug_assert!(indices.windows(2).all(|w| w[0] < w[1]));
        Self(indices)
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, j: usize) -> bool {
        self.0.binary_search(&j).is_ok()
    }

    /// `|self ∩ other|`.
    pub fn overlap(&self, other: &SupportSet) -> usize {
        let (mut a, mut b, mut count) = (0, 0, 0);
        while a < self.0.len() && b < other.0.len() {
            match self.0[a].cmp(&other.0[b]) {
                std::cmp::Ordering::Less => a += 1,
                std::cmp::Ordering::Greater => b += 1,
                std::cmp::Ordering::Equal => {
                    count += 1;
                    a += 1;
                    b += 1;
                }
            }
        }
        count
    }

    /// Indices in `self` but not in `other`.
    pub fn difference(&self, other: &SupportSet) -> Vec<usize> {
        self.0.iter().copied().filter(|&j| !other.contains(j)).collect()
    }
}

impl std::fmt::Display for SupportSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{{")?;
        for (i, j) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{j}")?;
        }
        write!(f, "}}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SignMode {
    /// Every support value equals the minimum magnitude.
    AllPositive,
    /// Values are `±M` with independent fair signs.
    #[default]
    RandomSign,
}

impl std::str::FromStr for SignMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all-positive" => Ok(Self::AllPositive),
            "random-sign" => Ok(Self::RandomSign),
            other => domain(format!(
                "unknown sign mode `{other}` (expected all-positive or random-sign)"
            )),
        }
    }
}

impl std::fmt::Display for SignMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::AllPositive => "all-positive",
            Self::RandomSign => "random-sign",
        })
    }
}

/// A vector `β*` with support `S`; off-support coordinates are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSignal {
    p: usize,
    support: SupportSet,
    values: Vec<f64>,
    min_magnitude: f64,
}

impl SparseSignal {
    pub fn new(p: usize, support: SupportSet, values: Vec<f64>) -> Result<Self> {
        if support.indices().last().is_some_and(|&j| j >= p) {
            return domain("support index out of range");
        }
        if values.len() != support.len() {
            return Err(Error::DimensionMismatch {
                expected: support.len(),
                got: values.len(),
            });
        }
        if values.iter().any(|v| *v == 0.0 || !v.is_finite()) {
            return domain("support values must be finite and nonzero");
        }
        let min_magnitude = values.iter().map(|v| v.abs()).fold(f64::INFINITY, f64::min);
        Ok(Self {
            p,
            support,
            values,
            min_magnitude,
        })
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn s(&self) -> usize {
        self.support.len()
    }

    pub fn support(&self) -> &SupportSet {
        &self.support
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `M(β*) = min_{i∈S} |β*_i|`.
    pub fn min_magnitude(&self) -> f64 {
        self.min_magnitude
    }

    /// `(index, value)` pairs over the support.
    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.support.indices().iter().copied().zip(self.values.iter().copied())
    }

    /// Squared norm of the coordinates in `indices` (zero off-support).
    pub fn norm_sq_on(&self, indices: &[usize]) -> f64 {
        self.iter()
            .filter(|(j, _)| indices.contains(j))
            .map(|(_, v)| v * v)
            .sum()
    }
}

/// Observation `y = Xβ* + W`.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationVector {
    pub y: Vec<f64>,
    pub sigma: f64,
}

impl ObservationVector {
    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            y: self.y.iter().map(|v| c * v).collect(),
            sigma: c * self.sigma,
        }
    }
}

/// Draws an `n × p` matrix with i.i.d. `N(0, 1)` entries.
pub fn sample_design(n: usize, p: usize, seed: u64) -> Result<DesignMatrix> {
    if n == 0 || p == 0 {
        return domain(format!("design needs n >= 1 and p >= 1, got n={n}, p={p}"));
    }
    let mut rng = stream_rng(seed, Stream::Design);
    let data = (0..n * p).map(|_| rng.sample(StandardNormal)).collect();
    Ok(DesignMatrix { n, p, data })
}

/// Draws a support uniformly over all `C(p, s)` subsets and attaches values of
/// magnitude `min_magnitude`.
pub fn sample_signal(
    p: usize,
    s: usize,
    min_magnitude: f64,
    sign_mode: SignMode,
    seed: u64,
) -> Result<SparseSignal> {
    if s == 0 || s > p {
        return domain(format!("sparsity must satisfy 1 <= s <= p, got s={s}, p={p}"));
    }
    if !(min_magnitude > 0.0 && min_magnitude.is_finite()) {
        return domain(format!("min_magnitude must be positive, got {min_magnitude}"));
    }
    let mut rng = stream_rng(seed, Stream::Signal);
    let mut indices = index::sample(&mut rng, p, s).into_vec();
    indices.sort_unstable();
    let values = match sign_mode {
        SignMode::AllPositive => vec![min_magnitude; s],
        SignMode::RandomSign => (0..s)
            .map(|_| if rng.gen::<bool>() { min_magnitude } else { -min_magnitude })
            .collect(),
    };
    SparseSignal::new(p, SupportSet::from_sorted_unchecked(indices), values)
}

/// `y = Xβ* + σ W` with `W` i.i.d. standard normal; `σ = 0` is exact.
pub fn observe(
    design: &DesignMatrix,
    beta: &SparseSignal,
    sigma: f64,
    seed: u64,
) -> Result<ObservationVector> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return domain(format!("sigma must be nonnegative, got {sigma}"));
    }
    let mut y = design.mul_sparse(beta)?;
    if sigma > 0.0 {
        let mut rng = stream_rng(seed, Stream::Noise);
        for v in &mut y {
            let w: f64 = rng.sample(StandardNormal);
            *v += sigma * w;
        }
    }
    Ok(ObservationVector { y, sigma })
}
