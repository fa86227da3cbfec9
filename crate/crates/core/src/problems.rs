//! Synthetic instances `y = Xβ0 + w` and the canonical parametrization
//! `θ = (λ/n, Xᵀy/n, XᵀX/n)`.
//!
//! All randomness comes from ChaCha8 seeded with a `u64`; the design, the
//! signal and the noise use separate ChaCha streams of the same seed.

use std::path::Path;

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{check_dim, invalid, Error, Result};
use crate::linalg::SymmetricOperator;
use crate::solver::CanonicalParameters;

const PSD_TOL: f64 = 1e-8;

pub const DESIGN_STREAM: u64 = 0;
pub const SIGNAL_STREAM: u64 = 1;
pub const NOISE_STREAM: u64 = 2;

/// Seeded generator on a given stream.
pub fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

#[derive(Debug, Clone, PartialEq)]
pub enum DesignSpec {
    Explicit { matrix: DMatrix<f64> },
    /// `n` i.i.d. rows `ξ_i ~ N(0, Γ̃)`.
    GaussianRows { covariance: SymmetricOperator, n: usize },
}

impl DesignSpec {
    pub fn dim(&self) -> usize {
        match self {
            DesignSpec::Explicit { matrix } => matrix.ncols(),
            DesignSpec::GaussianRows { covariance, .. } => covariance.dim(),
        }
    }

    pub fn rows(&self) -> usize {
        match self {
            DesignSpec::Explicit { matrix } => matrix.nrows(),
            DesignSpec::GaussianRows { n, .. } => *n,
        }
    }

    /// Same design family with a different number of rows.
    pub fn with_rows(&self, n: usize) -> Result<Self> {
        match self {
            DesignSpec::GaussianRows { covariance, .. } => {
                Ok(DesignSpec::GaussianRows { covariance: covariance.clone(), n })
            }
            DesignSpec::Explicit { .. } => Err(invalid("an explicit design has a fixed number of rows")),
        }
    }

    /// The population covariance `Γ̃` (`XᵀX/n` for an explicit design).
    pub fn covariance(&self) -> SymmetricOperator {
        match self {
            DesignSpec::Explicit { matrix } => SymmetricOperator::gram(matrix),
            DesignSpec::GaussianRows { covariance, .. } => covariance.clone(),
        }
    }
}

/// A square root `R` with `RᵀR = Γ`: Cholesky when positive definite,
/// otherwise from the eigendecomposition. Rejects non-PSD input.
pub fn covariance_root(cov: &SymmetricOperator) -> Result<DMatrix<f64>> {
    let scale = cov.matrix().amax().max(1.0);
    if let Some(ch) = Cholesky::new(cov.matrix().clone()) {
        return Ok(ch.l().transpose());
    }
    let eig = SymmetricEigen::new(cov.matrix().clone());
    if eig.eigenvalues.iter().any(|&l| l < -PSD_TOL * scale) {
        return Err(invalid("covariance is not positive semidefinite"));
    }
    let sqrt = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
    Ok(DMatrix::from_diagonal(&sqrt) * eig.eigenvectors.transpose())
}

/// A deterministic `n × p` design with `XᵀX/n = Γ` exactly (up to rounding).
pub fn design_from_covariance(cov: &SymmetricOperator, n: usize) -> Result<DMatrix<f64>> {
    let p = cov.dim();
    if n < p {
        return Err(invalid(format!("need n >= p rows, got n = {n}, p = {p}")));
    }
    let root = covariance_root(cov)?;
    let mut x = DMatrix::<f64>::zeros(n, p);
    x.view_mut((0, 0), (p, p)).copy_from(&(root * (n as f64).sqrt()));
    Ok(x)
}

pub fn sample_design(design: &DesignSpec, seed: u64) -> Result<DMatrix<f64>> {
    match design {
        DesignSpec::Explicit { matrix } => {
            if matrix.iter().any(|x| !x.is_finite()) {
                return Err(invalid("explicit design has non-finite entries"));
            }
            Ok(matrix.clone())
        }
        DesignSpec::GaussianRows { covariance, n } => {
            let root = covariance_root(covariance)?;
            let p = covariance.dim();
            let mut r = rng(seed, DESIGN_STREAM);
            // row-major draw order so the rows are i.i.d. in sequence
            let mut g = DMatrix::<f64>::zeros(*n, p);
            for i in 0..*n {
                for j in 0..p {
                    g[(i, j)] = r.sample(StandardNormal);
                }
            }
            Ok(g * root)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SignalKind {
    Explicit(DVector<f64>),
    /// `support_size` nonzero coordinates at random positions.
    Sparse { support_size: usize },
    /// `active_groups` blocks of the partition fully active.
    GroupSparse { groups: Vec<Vec<usize>>, active_groups: usize },
    /// A `p0 × p0` matrix (`p = p0²`, column-major) of the given rank.
    LowRank { rank: usize },
    /// Piecewise constant with the given number of segments.
    PiecewiseConstant { segments: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignalSpec {
    pub kind: SignalKind,
    /// Nonzero magnitudes are drawn uniformly in
    /// `[min_amplitude, max_amplitude]` with random sign.
    pub min_amplitude: f64,
    pub max_amplitude: f64,
}

impl SignalSpec {
    pub fn new(kind: SignalKind) -> Self {
        Self { kind, min_amplitude: 1.0, max_amplitude: 2.0 }
    }

    pub fn explicit(beta0: DVector<f64>) -> Self {
        Self::new(SignalKind::Explicit(beta0))
    }
}

fn sample_indices(r: &mut ChaCha8Rng, p: usize, k: usize) -> Vec<usize> {
    rand::seq::index::sample(r, p, k).into_vec()
}

fn random_orthonormal(r: &mut ChaCha8Rng, n: usize, k: usize) -> DMatrix<f64> {
    let mut g = DMatrix::<f64>::zeros(n, k);
    for j in 0..k {
        for i in 0..n {
            g[(i, j)] = r.sample(StandardNormal);
        }
    }
    g.qr().q()
}

pub fn sample_signal(signal: &SignalSpec, p: usize, seed: u64) -> Result<DVector<f64>> {
    let (lo, hi) = (signal.min_amplitude, signal.max_amplitude);
    if !(lo > 0.0 && hi >= lo) {
        return Err(invalid("amplitudes must satisfy 0 < min <= max"));
    }
    let mut r = rng(seed, SIGNAL_STREAM);
    let amp = |r: &mut ChaCha8Rng| {
        let a = if hi > lo { r.random_range(lo..hi) } else { lo };
        if r.random_bool(0.5) { a } else { -a }
    };
    match &signal.kind {
        SignalKind::Explicit(b) => {
            check_dim(p, b.len())?;
            Ok(b.clone())
        }
        SignalKind::Sparse { support_size } => {
            if *support_size > p {
                return Err(invalid(format!("support size {support_size} exceeds p = {p}")));
            }
            let mut idx = sample_indices(&mut r, p, *support_size);
            idx.sort_unstable();
            let mut b = DVector::zeros(p);
            for i in idx {
                b[i] = amp(&mut r);
            }
            Ok(b)
        }
        SignalKind::GroupSparse { groups, active_groups } => {
            check_dim(p, groups.iter().map(Vec::len).sum())?;
            if *active_groups > groups.len() {
                return Err(invalid("more active groups than groups"));
            }
            let mut act = sample_indices(&mut r, groups.len(), *active_groups);
            act.sort_unstable();
            let mut b = DVector::zeros(p);
            for k in act {
                for &i in &groups[k] {
                    b[i] = amp(&mut r);
                }
            }
            Ok(b)
        }
        SignalKind::LowRank { rank } => {
            let side = (p as f64).sqrt().round() as usize;
            if side * side != p {
                return Err(invalid(format!("p = {p} is not a perfect square")));
            }
            if *rank > side {
                return Err(invalid(format!("rank {rank} exceeds matrix side {side}")));
            }
            let u = random_orthonormal(&mut r, side, *rank);
            let v = random_orthonormal(&mut r, side, *rank);
            let s: Vec<f64> = (0..*rank).map(|_| amp(&mut r).abs()).collect();
            let m = &u * DMatrix::from_diagonal(&DVector::from_vec(s)) * v.transpose();
            Ok(DVector::from_column_slice(m.as_slice()))
        }
        SignalKind::PiecewiseConstant { segments } => {
            if *segments == 0 || *segments > p {
                return Err(invalid(format!("segments must be in 1..={p}")));
            }
            let mut cuts = sample_indices(&mut r, p - 1, segments - 1);
            cuts.sort_unstable();
            let mut b = DVector::zeros(p);
            let mut level = amp(&mut r);
            let mut next_cut = cuts.iter().peekable();
            for i in 0..p {
                b[i] = level;
                if next_cut.peek() == Some(&&i) {
                    next_cut.next();
                    level += amp(&mut r);
                }
            }
            Ok(b)
        }
    }
}

pub fn sample_noise(n: usize, sigma: f64, seed: u64) -> Result<DVector<f64>> {
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(invalid(format!("noise level must be finite and >= 0, got {sigma}")));
    }
    if sigma == 0.0 {
        return Ok(DVector::zeros(n));
    }
    let mut r = rng(seed, NOISE_STREAM);
    Ok(DVector::from_fn(n, |_, _| sigma * r.sample::<f64, _>(StandardNormal)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInstance {
    pub x: DMatrix<f64>,
    pub beta0: DVector<f64>,
    pub w: DVector<f64>,
    pub y: DVector<f64>,
    pub seed: u64,
}

#[derive(Serialize)]
struct InstanceExport<'a> {
    seed: u64,
    n: usize,
    p: usize,
    /// row-major
    x: Vec<Vec<f64>>,
    beta0: &'a [f64],
    w: &'a [f64],
    y: &'a [f64],
}

impl ProblemInstance {
    pub fn assemble(x: DMatrix<f64>, beta0: DVector<f64>, w: DVector<f64>, seed: u64) -> Result<Self> {
        check_dim(x.ncols(), beta0.len())?;
        check_dim(x.nrows(), w.len())?;
        let y = &x * &beta0 + &w;
        Ok(Self { x, beta0, w, y, seed })
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    pub fn to_json(&self) -> String {
        let export = InstanceExport {
            seed: self.seed,
            n: self.n(),
            p: self.p(),
            x: self.x.row_iter().map(|r| r.iter().copied().collect()).collect(),
            beta0: self.beta0.as_slice(),
            w: self.w.as_slice(),
            y: self.y.as_slice(),
        };
        serde_json::to_string_pretty(&export).expect("instance serializes")
    }
}

/// Draws `y = Xβ0 + w` with `w ~ N(0, σ²I)` from one seed, each factor on
/// its own stream.
pub fn generate_instance(
    design: &DesignSpec,
    signal: &SignalSpec,
    noise_sigma: f64,
    seed: u64,
) -> Result<ProblemInstance> {
    let x = sample_design(design, seed)?;
    let beta0 = sample_signal(signal, x.ncols(), seed)?;
    let w = sample_noise(x.nrows(), noise_sigma, seed)?;
    ProblemInstance::assemble(x, beta0, w, seed)
}

/// `θ = (λ/n, Xᵀy/n, XᵀX/n)`.
pub fn canonical_parameters(inst: &ProblemInstance, lambda: f64) -> Result<CanonicalParameters> {
    let n = inst.n();
    if n == 0 {
        return Err(invalid("instance has no rows"));
    }
    if !(lambda >= 0.0) {
        return Err(invalid(format!("lambda must be >= 0, got {lambda}")));
    }
    let nf = n as f64;
    let u = inst.x.tr_mul(&inst.y) / nf;
    CanonicalParameters::new(lambda / nf, u, SymmetricOperator::gram(&inst.x))
}

/// `ε = Xᵀw/n`.
pub fn correlation_noise(inst: &ProblemInstance) -> DVector<f64> {
    inst.x.tr_mul(&inst.w) / inst.n().max(1) as f64
}

/// Reads a header-free CSV matrix, one row per line.
pub fn load_matrix_csv(path: &Path) -> Result<DMatrix<f64>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    parse_matrix_csv(&text).map_err(|e| match e {
        Error::InvalidInput(m) => Error::Config(format!("{}: {m}", path.display())),
        other => other,
    })
}

pub fn parse_matrix_csv(text: &str) -> Result<DMatrix<f64>> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|f| {
                f.trim()
                    .parse::<f64>()
                    .map_err(|_| invalid(format!("line {}: cannot parse {:?}", lineno + 1, f.trim())))
            })
            .collect::<Result<Vec<f64>>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(invalid(format!("line {}: ragged row", lineno + 1)));
            }
        }
        rows.push(row);
    }
    let ncols = rows.first().map_or(0, Vec::len);
    Ok(DMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j]))
}
