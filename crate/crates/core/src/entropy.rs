//! Shannon and von Neumann entropies, in bits, and audits of entropy
//! preservation under bistochastic channels.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::cpm::{self, Channel, ClassicalDistribution, CpmError, DensityMatrix};
use crate::linalg::{self, c, CMatrix};
use crate::smatrix::{self, SMatrix, SMatrixError};

/// Logarithm base used by every entropy in this module.
pub const LOG_BASE: &str = "2";

/// Minimum number of sampled states for a preservation report.
pub const MIN_SAMPLES: usize = 10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EntropyError {
    #[error("invalid probability distribution: {0}")]
    InvalidDistribution(String),
    #[error("not a valid density matrix: {0}")]
    NotAState(String),
    #[error("channel is not bistochastic (tp deviation {tp:e}, unital deviation {unital:e})")]
    NotBistochastic { tp: f64, unital: f64 },
    #[error("block specification invalid: {0}")]
    SpecInvariantViolated(String),
    #[error("need at least {MIN_SAMPLES} sample states, got {0}")]
    TooFewSamples(usize),
    #[error("cluster bridge supports at most 3 wires, got {0}")]
    TooManyWires(usize),
    #[error(transparent)]
    SMatrix(#[from] SMatrixError),
}

impl From<CpmError> for EntropyError {
    fn from(e: CpmError) -> Self {
        match e {
            CpmError::InvalidDistribution(m) => EntropyError::InvalidDistribution(m),
            CpmError::NotAState(m) => EntropyError::NotAState(m),
            other => EntropyError::SpecInvariantViolated(other.to_string()),
        }
    }
}

fn plogp_sum(probs: impl IntoIterator<Item = f64>) -> f64 {
    let h: f64 = probs
        .into_iter()
        .filter(|&p| p > 0.0)
        .map(|p| -p * p.log2())
        .sum();
    h.max(0.0)
}

/// `H(p) = -sum p log2 p` with `0 log 0 = 0`.
pub fn shannon_entropy(p: &ClassicalDistribution) -> f64 {
    plogp_sum(p.probs().iter().copied())
}

/// `I(X;Y) = H(X) + H(Y) - H(X,Y)` for a joint table indexed `[x][y]`.
pub fn mutual_information(joint: &[Vec<f64>], atol: f64) -> Result<f64, EntropyError> {
    let cols = joint.first().map(Vec::len).unwrap_or(0);
    if cols == 0 || joint.iter().any(|row| row.len() != cols) {
        return Err(EntropyError::InvalidDistribution("joint table must be rectangular and nonempty".into()));
    }
    let flat: Vec<f64> = joint.iter().flatten().copied().collect();
    ClassicalDistribution::new(flat.clone(), atol)?;
    let px: Vec<f64> = joint.iter().map(|r| r.iter().sum()).collect();
    let py: Vec<f64> = (0..cols).map(|j| joint.iter().map(|r| r[j]).sum()).collect();
    Ok(plogp_sum(px) + plogp_sum(py) - plogp_sum(flat))
}

/// Entropy in bits of a Hermitian PSD matrix from its eigenvalues; slightly
/// negative eigenvalues count as zero.
pub fn matrix_entropy_bits(m: &CMatrix) -> f64 {
    plogp_sum(linalg::hermitian_eigenvalues(m).into_iter().map(|v| v.max(0.0)))
}

/// `S(rho) = -tr(rho log2 rho)`.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    matrix_entropy_bits(rho.matrix())
}

/// Validates `m` as a state, then returns its entropy.
pub fn von_neumann_entropy_checked(m: &CMatrix, atol: f64) -> Result<f64, EntropyError> {
    let rho = DensityMatrix::new(m.clone(), atol)?;
    Ok(von_neumann_entropy(&rho))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PreservationReport {
    pub preserved_on_all: bool,
    pub max_delta: f64,
    pub unitary: bool,
    /// True when `preserved_on_all == unitary`.
    pub agreement: bool,
    pub samples: usize,
    pub seed: u64,
}

/// Samples pure and full-rank states and compares `S(Phi(rho))` with `S(rho)`.
pub fn entropy_preservation_report(
    ch: &Channel,
    samples: usize,
    seed: u64,
    atol: f64,
) -> Result<PreservationReport, EntropyError> {
    if samples < MIN_SAMPLES {
        return Err(EntropyError::TooFewSamples(samples));
    }
    let audit = cpm::channel_audit(ch, atol);
    if !audit.is_bistochastic() {
        return Err(EntropyError::NotBistochastic {
            tp: audit.tp_deviation,
            unital: audit.unital_deviation,
        });
    }
    let dim = ch.dim_in();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_delta: f64 = 0.0;
    for k in 0..samples {
        let rho = if k % 2 == 0 {
            linalg::outer(&linalg::random_state_vector(dim, &mut rng))
        } else {
            linalg::random_density(dim, &mut rng)
        };
        let delta = (matrix_entropy_bits(&ch.apply_operator(&rho)) - matrix_entropy_bits(&rho)).abs();
        max_delta = max_delta.max(delta);
    }
    let preserved_on_all = max_delta <= atol;
    Ok(PreservationReport {
        preserved_on_all,
        max_delta,
        unitary: audit.is_unitary,
        agreement: preserved_on_all == audit.is_unitary,
        samples,
        seed,
    })
}

/// One direct-sum block: `p rho_L (x) 1/d_R` on states, `Ad_U (x) Phi_R` on maps.
#[derive(Debug, Clone)]
pub struct BlockEntry {
    pub weight: f64,
    pub rho_left: DensityMatrix,
    pub unitary: CMatrix,
    pub channel_right: Channel,
}

impl BlockEntry {
    pub fn dim_left(&self) -> usize {
        self.rho_left.dim()
    }

    pub fn dim_right(&self) -> usize {
        self.channel_right.dim_in()
    }
}

#[derive(Debug, Clone)]
pub struct BlockSpec {
    pub blocks: Vec<BlockEntry>,
}

impl BlockSpec {
    pub fn validate(&self, atol: f64) -> Result<(), EntropyError> {
        let bad = |m: String| Err(EntropyError::SpecInvariantViolated(m));
        if self.blocks.is_empty() {
            return bad("no blocks".into());
        }
        let total: f64 = self.blocks.iter().map(|b| b.weight).sum();
        if (total - 1.0).abs() > atol || self.blocks.iter().any(|b| b.weight < 0.0) {
            return bad(format!("weights sum to {total}"));
        }
        for (k, b) in self.blocks.iter().enumerate() {
            if b.unitary.shape() != (b.dim_left(), b.dim_left()) {
                return bad(format!("block {k}: unitary has shape {:?}", b.unitary.shape()));
            }
            let dev = linalg::unitarity_deviation(&b.unitary);
            if dev > atol {
                return bad(format!("block {k}: U is not unitary ({dev:e})"));
            }
            let audit = cpm::channel_audit(&b.channel_right, atol);
            if b.channel_right.dim_out() != b.dim_right() || !audit.is_bistochastic() {
                return bad(format!("block {k}: right channel is not unital and trace preserving"));
            }
        }
        Ok(())
    }
}

/// Assembles the block-diagonal state and channel described by `spec`.
pub fn build_blockform(spec: &BlockSpec, atol: f64) -> Result<(DensityMatrix, Channel), EntropyError> {
    spec.validate(atol)?;
    let mut states = Vec::new();
    let mut channels = Vec::new();
    for b in &spec.blocks {
        let right = DensityMatrix::maximally_mixed(b.dim_right());
        states.push(linalg::kron(b.rho_left.matrix(), right.matrix()) * c(b.weight, 0.0));
        channels.push(Channel::conjugation(b.unitary.clone()).tensor(&b.channel_right));
    }
    let rho = DensityMatrix::new(linalg::direct_sum(&states), atol)?;
    Ok((rho, Channel::direct_sum(&channels)))
}

/// Entropy change of `ch` on one specific state, in bits.
pub fn entropy_delta(ch: &Channel, rho: &DensityMatrix) -> f64 {
    (matrix_entropy_bits(&ch.apply_operator(rho.matrix())) - von_neumann_entropy(rho)).abs()
}

#[derive(Debug, Clone, PartialEq)]
pub struct BridgeTerm {
    pub label: String,
    pub partition: Vec<Vec<usize>>,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterEntropyReport {
    pub terms: Vec<BridgeTerm>,
    /// How term weights were measured.
    pub weight_measure: &'static str,
    pub max_entropy_delta: f64,
    pub preserved: bool,
}

pub const BRIDGE_WEIGHT_MEASURE: &str =
    "squared Frobenius norm of each cluster term divided by the total dimension (maximally mixed input), normalized to sum 1";

/// Maps each cluster term of `S` to a weighted block and checks that the full
/// conjugation channel `Ad_S` preserves entropy on sampled states.
pub fn cluster_entropy_bridge(
    s: &SMatrix,
    samples: usize,
    seed: u64,
    atol: f64,
) -> Result<ClusterEntropyReport, EntropyError> {
    let n = s.wires().len();
    if n > 3 {
        return Err(EntropyError::TooManyWires(n));
    }
    let dim = s.wires().total_dim() as f64;
    let terms = smatrix::connected_parts(s)?;
    let masses: Vec<f64> = terms
        .iter()
        .map(|t| t.operator().norm_squared() / dim)
        .collect();
    let total: f64 = masses.iter().sum();
    let bridge_terms = terms
        .iter()
        .zip(&masses)
        .map(|(t, m)| BridgeTerm {
            label: t.label(),
            partition: t.partition().to_vec(),
            weight: m / total,
        })
        .collect();

    let ch = Channel::conjugation(s.matrix().clone());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_delta: f64 = 0.0;
    for k in 0..samples.max(1) {
        let rho = if k % 2 == 0 {
            linalg::random_density(s.matrix().nrows(), &mut rng)
        } else {
            linalg::outer(&linalg::random_state_vector(s.matrix().nrows(), &mut rng))
        };
        let delta = (matrix_entropy_bits(&ch.apply_operator(&rho)) - matrix_entropy_bits(&rho)).abs();
        max_delta = max_delta.max(delta);
    }
    Ok(ClusterEntropyReport {
        terms: bridge_terms,
        weight_measure: BRIDGE_WEIGHT_MEASURE,
        max_entropy_delta: max_delta,
        preserved: max_delta <= atol,
    })
}
