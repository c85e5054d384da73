//! Causal models over the edge events of an undirected interaction graph.
//!
//! Node features induce edge features by an elementwise product; a
//! skew-symmetric bilinear form squashed through `sin(nu0 * tanh(.))` gives
//! the directed influence of one edge on another. Small influences are
//! thresholded away and a random subset of edges is made non-causal.

use ndarray::{Array1, Array2};
use rand::seq::index::sample as sample_indices;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::causal::{sample_lambdas, CausalModel, DEFAULT_LAMBDA_RANGE, DEFAULT_TAU_BAR};
use crate::error::{Error, Result};
use crate::seed::{derive_seed, rng_from_seed};

/// Canonical indexing of the unordered node pairs of an `n`-node graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeSpace {
    n: usize,
}

impl EdgeSpace {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::param("n", format!("need at least two nodes, got {n}")));
        }
        Ok(Self { n })
    }

    pub fn nodes(&self) -> usize {
        self.n
    }

    /// Number of edges, `n (n - 1) / 2`.
    pub fn len(&self) -> usize {
        self.n * (self.n - 1) / 2
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Lexicographic index of `{a, b}`; symmetric in its arguments.
    pub fn index(&self, a: usize, b: usize) -> Result<usize> {
        edge_index(a, b, self.n)
    }

    /// The pair `(a, b)` with `a < b` at `index`.
    pub fn pair(&self, index: usize) -> Result<(usize, usize)> {
        if index >= self.len() {
            return Err(Error::param("index", format!("{index} >= E = {}", self.len())));
        }
        // rows of the upper triangle have lengths n-1, n-2, ...
        let mut a = 0;
        let mut start = 0;
        loop {
            let row_len = self.n - a - 1;
            if index < start + row_len {
                return Ok((a, a + 1 + index - start));
            }
            start += row_len;
            a += 1;
        }
    }
}

/// `a (2n - a - 1) / 2 + (b - a - 1)` over `(min, max)`.
pub fn edge_index(a: usize, b: usize, n: usize) -> Result<usize> {
    if a == b {
        return Err(Error::param("b", format!("self-loop ({a}, {b}) has no edge index")));
    }
    if a >= n || b >= n {
        return Err(Error::param("a", format!("node ({a}, {b}) outside [0, {n})")));
    }
    let (a, b) = (a.min(b), a.max(b));
    Ok(a * (2 * n - a - 1) / 2 + (b - a - 1))
}

/// `n` i.i.d. standard normal feature vectors of dimension `r`, one per row.
pub fn sample_node_features(n: usize, r: usize, seed: u64) -> Result<Array2<f64>> {
    if n == 0 || r == 0 {
        return Err(Error::param("r", format!("need n, r >= 1, got n={n}, r={r}")));
    }
    let mut rng = rng_from_seed(seed);
    Ok(Array2::from_shape_simple_fn((n, r), || StandardNormal.sample(&mut rng)))
}

/// Elementwise product of two node feature vectors.
pub fn edge_features(x_a: &[f64], x_b: &[f64]) -> Result<Array1<f64>> {
    if x_a.len() != x_b.len() {
        return Err(Error::param(
            "x_b",
            format!("dimension mismatch: {} vs {}", x_a.len(), x_b.len()),
        ));
    }
    Ok(x_a.iter().zip(x_b).map(|(a, b)| a * b).collect())
}

/// A real matrix with `B^T = -B` exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkewMatrix(Array2<f64>);

impl SkewMatrix {
    /// Accepts `b` only if it is exactly skew-symmetric.
    pub fn from_matrix(b: Array2<f64>) -> Result<Self> {
        let (r, c) = b.dim();
        if r != c {
            return Err(Error::param("B", "matrix must be square"));
        }
        for i in 0..r {
            for j in 0..r {
                if b[[i, j]] != -b[[j, i]] {
                    return Err(Error::param("B", format!("B[{i},{j}] != -B[{j},{i}]")));
                }
            }
        }
        Ok(Self(b))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &Array2<f64> {
        &self.0
    }

    /// `z^T B z'`, summed over the upper triangle as
    /// `B_ab (z_a z'_b - z_b z'_a)` so that swapping the arguments flips the
    /// sign exactly and `z^T B z` is exactly zero.
    pub fn bilinear(&self, z: &[f64], z_prime: &[f64]) -> f64 {
        let r = self.dim();
        let mut acc = 0.0;
        for a in 0..r {
            for b in (a + 1)..r {
                acc += self.0[[a, b]] * (z[a] * z_prime[b] - z[b] * z_prime[a]);
            }
        }
        acc
    }
}

/// `B = B_hat - B_hat^T` with the columns of `B_hat` i.i.d. `N(0, I_r)`.
pub fn make_skew_b(r: usize, seed: u64) -> Result<SkewMatrix> {
    if r == 0 {
        return Err(Error::param("r", "feature dimension must be >= 1"));
    }
    let mut rng = rng_from_seed(seed);
    let mut b_hat = Array2::<f64>::zeros((r, r));
    for mut column in b_hat.columns_mut() {
        column.iter_mut().for_each(|v| *v = StandardNormal.sample(&mut rng));
    }
    let b = &b_hat - &b_hat.t();
    SkewMatrix::from_matrix(b)
}

/// `sin(nu0 * tanh(z^T B z'))`, bounded to `[-1, 1]` and antisymmetric.
pub fn influence(z: &[f64], z_prime: &[f64], b: &SkewMatrix, nu0: f64) -> Result<f64> {
    if z.len() != b.dim() || z_prime.len() != b.dim() {
        return Err(Error::param(
            "z",
            format!("feature dimension {} / {} vs B of size {}", z.len(), z_prime.len(), b.dim()),
        ));
    }
    Ok((nu0 * b.bilinear(z, z_prime).tanh()).sin())
}

/// `x` if `|x| >= nu1`, else zero.
pub fn threshold(x: f64, nu1: f64) -> Result<f64> {
    if !(nu1 > 0.0 && nu1 < 1.0) {
        return Err(Error::param("nu1", format!("must lie in (0, 1), got {nu1}")));
    }
    Ok(if x.abs() >= nu1 { x } else { 0.0 })
}

/// Symmetric binary mask with `l` randomly chosen rows and columns zeroed.
pub fn noncausal_mask(e: usize, l: usize, seed: u64) -> Result<(Array2<u8>, Vec<usize>)> {
    if l >= e {
        return Err(Error::param("l", format!("need l < E, got l={l}, E={e}")));
    }
    let mut masked = sample_indices(&mut rng_from_seed(seed), e, l).into_vec();
    masked.sort_unstable();
    let mut m = Array2::<u8>::ones((e, e));
    for &k in &masked {
        m.row_mut(k).fill(0);
        m.column_mut(k).fill(0);
    }
    Ok((m, masked))
}

/// Mixes `x` with fresh standard-normal features: `sqrt(1 - s^2) x + s xi`.
///
/// Entries stay standard normal for every strength `s` in `[0, 1]`, so the
/// result is a valid feature draw whose dependence on `x` fades with `s`.
pub fn blend_node_features(x: &Array2<f64>, strength: f64, seed: u64) -> Result<Array2<f64>> {
    if !(0.0..=1.0).contains(&strength) {
        return Err(Error::param("strength", format!("must lie in [0, 1], got {strength}")));
    }
    let fresh = sample_node_features(x.nrows(), x.ncols(), seed)?;
    let keep = (1.0 - strength * strength).sqrt();
    Ok(x.mapv(|v| keep * v) + fresh.mapv(|v| strength * v))
}

/// Seeds for the independent random pieces of a CTIG construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CtigSeeds {
    pub features: u64,
    pub b: u64,
    pub mask: u64,
    pub lambdas: u64,
}

impl CtigSeeds {
    pub fn from_master(master: u64) -> Self {
        Self {
            features: derive_seed(master, "features", 0),
            b: derive_seed(master, "skew-b", 0),
            mask: derive_seed(master, "mask", 0),
            lambdas: derive_seed(master, "lambdas", 0),
        }
    }
}

/// Recipe for a CTIG causal model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CtigSpec {
    pub n: usize,
    pub r: usize,
    pub nu0: f64,
    pub nu1: f64,
    pub l: usize,
    pub lambda_range: (f64, f64),
    pub tau_bar: f64,
    pub seeds: CtigSeeds,
}

impl CtigSpec {
    /// Five nodes, five features, `nu0 = 100`, `nu1 = 0.55`, two non-causal
    /// edges.
    pub fn reference(master_seed: u64) -> Self {
        Self {
            n: 5,
            r: 5,
            nu0: 100.0,
            nu1: 0.55,
            l: 2,
            lambda_range: DEFAULT_LAMBDA_RANGE,
            tau_bar: DEFAULT_TAU_BAR,
            seeds: CtigSeeds::from_master(master_seed),
        }
    }

    pub fn validate(&self) -> Result<EdgeSpace> {
        let space = EdgeSpace::new(self.n)?;
        if self.r == 0 {
            return Err(Error::param("r", "feature dimension must be >= 1"));
        }
        if !(self.nu1 > 0.0 && self.nu1 < 1.0) {
            return Err(Error::param("nu1", format!("must lie in (0, 1), got {}", self.nu1)));
        }
        if !self.nu0.is_finite() {
            return Err(Error::param("nu0", "must be finite"));
        }
        if self.l >= space.len() {
            return Err(Error::param(
                "l",
                format!("need l < E = {}, got {}", space.len(), self.l),
            ));
        }
        Ok(space)
    }
}

/// Intermediate and final matrices of a CTIG construction, all `E x E`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfluenceMatrices {
    /// Raw influences `h(z_i, z_j)`.
    pub h: Array2<f64>,
    /// Thresholded influences.
    pub theta_tilde: Array2<f64>,
    pub mask: Array2<u8>,
    pub masked_edges: Vec<usize>,
    pub theta: Array2<f64>,
    pub adjacency: Array2<u8>,
}

/// Everything produced by [`build_ctig_model`].
#[derive(Debug, Clone, PartialEq)]
pub struct CtigModel {
    pub model: CausalModel,
    pub matrices: InfluenceMatrices,
    pub node_features: Array2<f64>,
    pub edge_features: Array2<f64>,
    pub b: SkewMatrix,
    pub space: EdgeSpace,
}

/// Thresholded influence matrix for fixed edge features and `B`.
pub fn thresholded_influences(
    edge_feats: &Array2<f64>,
    b: &SkewMatrix,
    nu0: f64,
    nu1: f64,
) -> Result<(Array2<f64>, Array2<f64>)> {
    let e = edge_feats.nrows();
    let rows: Vec<Vec<f64>> = edge_feats.rows().into_iter().map(|r| r.to_vec()).collect();
    let mut h = Array2::<f64>::zeros((e, e));
    for i in 0..e {
        for j in 0..e {
            h[[i, j]] = influence(&rows[i], &rows[j], b, nu0)?;
        }
    }
    let mut theta_tilde = h.clone();
    for v in theta_tilde.iter_mut() {
        *v = threshold(*v, nu1)?;
    }
    Ok((h, theta_tilde))
}

pub fn build_ctig_model(spec: &CtigSpec) -> Result<CtigModel> {
    spec.validate()?;
    let x = sample_node_features(spec.n, spec.r, spec.seeds.features)?;
    build_ctig_with_features(spec, x)
}

/// Builds from given node features; the feature seed of `spec` is unused.
pub fn build_ctig_with_features(spec: &CtigSpec, x: Array2<f64>) -> Result<CtigModel> {
    let space = spec.validate()?;
    let e = space.len();
    if x.dim() != (spec.n, spec.r) {
        return Err(Error::param("x", format!("expected {}x{} features, got {:?}", spec.n, spec.r, x.dim())));
    }
    let mut z = Array2::<f64>::zeros((e, spec.r));
    for k in 0..e {
        let (a, b) = space.pair(k)?;
        let feats = edge_features(
            x.row(a).as_slice().expect("row-major"),
            x.row(b).as_slice().expect("row-major"),
        )?;
        z.row_mut(k).assign(&feats);
    }
    let b = make_skew_b(spec.r, spec.seeds.b)?;
    let (h, theta_tilde) = thresholded_influences(&z, &b, spec.nu0, spec.nu1)?;
    let (mask, masked_edges) = noncausal_mask(e, spec.l, spec.seeds.mask)?;
    let theta = &theta_tilde * &mask.mapv(f64::from);
    let adjacency = theta.mapv(|v| u8::from(v != 0.0));
    let lambdas = sample_lambdas(e, spec.lambda_range, &mut rng_from_seed(spec.seeds.lambdas))?;
    let model = CausalModel::new(lambdas, theta.clone(), spec.tau_bar)?;
    Ok(CtigModel {
        model,
        matrices: InfluenceMatrices {
            h,
            theta_tilde,
            mask,
            masked_edges,
            theta,
            adjacency,
        },
        node_features: x,
        edge_features: z,
        b,
        space,
    })
}
