//! The doubled level: density matrices, completely positive maps, and the
//! classical/quantum interface (preparation, measurement, decoherence).
//!
//! Choi matrices use column-major vectorization of Kraus operators:
//! `choi = sum_k vec(K_k) vec(K_k)^dagger = sum_ij |i><j| (x) Phi(|i><j|)`, with
//! the input factor first.

use thiserror::Error;

use crate::diagram::{validate, Diagram, DiagramError, WireType};
use crate::linalg::{self, c, CMatrix, CVector, ONE, ZERO};
use crate::tensor::{self, EvalError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CpmError {
    #[error(transparent)]
    Diagram(#[from] DiagramError),
    #[error("generator `{0}` has no payload")]
    MissingPayload(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimMismatch { expected: usize, found: usize },
    #[error("operator is not unitary (deviation {0:e})")]
    NotUnitary(f64),
    #[error("not a valid density matrix: {0}")]
    NotAState(String),
    #[error("invalid probability distribution: {0}")]
    InvalidDistribution(String),
    #[error("projectors do not form an orthogonal resolution of the identity: {0}")]
    NotAResolution(String),
    #[error("channel needs at least one Kraus operator")]
    EmptyKraus,
    #[error("Kraus operators have inconsistent shapes")]
    KrausShape,
}

impl From<EvalError> for CpmError {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::Diagram(d) => CpmError::Diagram(d),
            EvalError::MissingPayload(n) => CpmError::MissingPayload(n),
            // Discards never reach pure evaluation from `double`.
            EvalError::DiscardAtPureLevel => unreachable!("discard handled at the CPM level"),
        }
    }
}

/// Hermitian, positive semidefinite, unit-trace matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: CMatrix,
}

impl DensityMatrix {
    pub fn new(matrix: CMatrix, atol: f64) -> Result<Self, CpmError> {
        if !matrix.is_square() {
            return Err(CpmError::NotAState("matrix is not square".into()));
        }
        let herm = linalg::hermitian_deviation(&matrix);
        if herm > atol {
            return Err(CpmError::NotAState(format!("not Hermitian (deviation {herm:e})")));
        }
        let tr = linalg::trace(&matrix);
        if (tr - ONE).norm() > atol {
            return Err(CpmError::NotAState(format!("trace {tr} != 1")));
        }
        let min = linalg::hermitian_eigenvalues(&matrix)[0];
        if min < -atol {
            return Err(CpmError::NotAState(format!("negative eigenvalue {min:e}")));
        }
        Ok(Self { matrix })
    }

    /// Skips validation; used for outputs of trusted constructions.
    pub(crate) fn new_unchecked(matrix: CMatrix) -> Self {
        Self { matrix }
    }

    pub fn from_pure(v: &CVector, atol: f64) -> Result<Self, CpmError> {
        let n = v.norm();
        if (n - 1.0).abs() > atol {
            return Err(CpmError::NotAState(format!("vector norm {n} != 1")));
        }
        Ok(Self {
            matrix: linalg::outer(v),
        })
    }

    pub fn basis(dim: usize, i: usize) -> Self {
        Self {
            matrix: linalg::outer(&linalg::basis_vector(dim, i)),
        }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            matrix: linalg::identity(dim) / c(dim as f64, 0.0),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }
}

/// Nonnegative weights summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalDistribution {
    probs: Vec<f64>,
}

impl ClassicalDistribution {
    pub fn new(probs: Vec<f64>, atol: f64) -> Result<Self, CpmError> {
        if probs.is_empty() {
            return Err(CpmError::InvalidDistribution("empty".into()));
        }
        if let Some(p) = probs.iter().find(|p| !p.is_finite() || **p < -atol) {
            return Err(CpmError::InvalidDistribution(format!("weight {p} is negative")));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > atol {
            return Err(CpmError::InvalidDistribution(format!("weights sum to {total}")));
        }
        Ok(Self { probs })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }
}

/// A CP map in Kraus form with its Choi matrix cached.
#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    dim_in: usize,
    dim_out: usize,
    kraus: Vec<CMatrix>,
    choi: CMatrix,
}

pub fn choi_matrix(kraus: &[CMatrix]) -> CMatrix {
    let (rows, cols) = kraus[0].shape();
    let n = rows * cols;
    let mut choi = CMatrix::zeros(n, n);
    for k in kraus {
        // nalgebra storage is column-major, so this is vec(K).
        let v = CVector::from_column_slice(k.as_slice());
        choi += &v * v.adjoint();
    }
    choi
}

impl Channel {
    pub fn new(kraus: Vec<CMatrix>) -> Result<Self, CpmError> {
        let first = kraus.first().ok_or(CpmError::EmptyKraus)?;
        let shape = first.shape();
        if kraus.iter().any(|k| k.shape() != shape) {
            return Err(CpmError::KrausShape);
        }
        let choi = choi_matrix(&kraus);
        Ok(Self {
            dim_in: shape.1,
            dim_out: shape.0,
            kraus,
            choi,
        })
    }

    pub fn identity(dim: usize) -> Self {
        Self::new(vec![linalg::identity(dim)]).expect("nonempty")
    }

    /// `rho -> U rho U^dagger`.
    pub fn conjugation(u: CMatrix) -> Self {
        Self::new(vec![u]).expect("nonempty")
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn kraus(&self) -> &[CMatrix] {
        &self.kraus
    }

    pub fn choi(&self) -> &CMatrix {
        &self.choi
    }

    /// `self` first, then `next`.
    pub fn then(&self, next: &Channel) -> Result<Channel, CpmError> {
        if self.dim_out != next.dim_in {
            return Err(CpmError::DimMismatch {
                expected: self.dim_out,
                found: next.dim_in,
            });
        }
        let kraus = next
            .kraus
            .iter()
            .flat_map(|b| self.kraus.iter().map(move |a| b * a))
            .collect();
        Channel::new(kraus)
    }

    pub fn tensor(&self, other: &Channel) -> Channel {
        let kraus = self
            .kraus
            .iter()
            .flat_map(|a| other.kraus.iter().map(move |b| linalg::kron(a, b)))
            .collect();
        Channel::new(kraus).expect("nonempty")
    }

    /// Kraus-wise adjoint (the dagger of the CP map).
    pub fn adjoint(&self) -> Channel {
        Channel::new(self.kraus.iter().map(|k| k.adjoint()).collect()).expect("nonempty")
    }

    /// `sum_k K rho K^dagger` on an arbitrary operator.
    pub fn apply_operator(&self, rho: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.dim_out, self.dim_out);
        for k in &self.kraus {
            out += k * rho * k.adjoint();
        }
        out
    }

    /// Direct sum of channels acting on orthogonal blocks.
    pub fn direct_sum(parts: &[Channel]) -> Channel {
        let total_in: usize = parts.iter().map(|p| p.dim_in).sum();
        let total_out: usize = parts.iter().map(|p| p.dim_out).sum();
        let mut kraus = Vec::new();
        let (mut off_in, mut off_out) = (0, 0);
        for p in parts {
            for k in &p.kraus {
                let mut big = CMatrix::zeros(total_out, total_in);
                big.view_mut((off_out, off_in), (p.dim_out, p.dim_in))
                    .copy_from(k);
                kraus.push(big);
            }
            off_in += p.dim_in;
            off_out += p.dim_out;
        }
        Channel::new(kraus).expect("nonempty")
    }
}

/// Doubles a valid diagram into a CP map.
///
/// Pure boxes become single-Kraus channels. `discard` is the trace. On
/// classical wires `copy` and `delete` act as basis-copy (`|i><i| -> |ii><ii|`,
/// off-diagonals dropped) and trace, which agree with the doubled pure maps on
/// every diagonal state and keep classical operations causal.
pub fn double(d: &Diagram) -> Result<Channel, CpmError> {
    validate(d)?;
    double_term(d)
}

fn double_term(d: &Diagram) -> Result<Channel, CpmError> {
    Ok(match d {
        Diagram::Seq(a, b) => double_term(a)?.then(&double_term(b)?)?,
        Diagram::Par(a, b) => double_term(a)?.tensor(&double_term(b)?),
        Diagram::Dagger(inner) => double_term(inner)?.adjoint(),
        Diagram::Discard(a) => trace_channel(*a),
        Diagram::Delete(a) => trace_channel(*a),
        Diagram::Copy(a) => {
            let dim = a.dim();
            let kraus = (0..dim)
                .map(|i| {
                    let mut k = CMatrix::zeros(dim * dim, dim);
                    k[(i * dim + i, i)] = ONE;
                    k
                })
                .collect();
            Channel::new(kraus)?
        }
        pure => Channel::new(vec![tensor::evaluate_matrix(pure)?])?,
    })
}

fn trace_channel(a: WireType) -> Channel {
    let dim = a.dim();
    let kraus = (0..dim)
        .map(|i| {
            let mut k = CMatrix::zeros(1, dim);
            k[(0, i)] = ONE;
            k
        })
        .collect();
    Channel::new(kraus).expect("nonempty")
}

/// `sum_k K rho K^dagger`. The result is a valid state whenever `ch` is
/// trace preserving; otherwise its trace may drop below one.
pub fn apply(ch: &Channel, rho: &DensityMatrix) -> Result<DensityMatrix, CpmError> {
    if rho.dim() != ch.dim_in {
        return Err(CpmError::DimMismatch {
            expected: ch.dim_in,
            found: rho.dim(),
        });
    }
    Ok(DensityMatrix::new_unchecked(ch.apply_operator(rho.matrix())))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelAudit {
    pub is_cp: bool,
    pub is_tp: bool,
    pub is_unital: bool,
    pub is_unitary: bool,
    pub choi_min_eigenvalue: f64,
    pub choi_rank: usize,
    pub tp_deviation: f64,
    pub unital_deviation: f64,
}

impl ChannelAudit {
    pub fn is_bistochastic(&self) -> bool {
        self.is_tp && self.is_unital
    }
}

pub fn channel_audit(ch: &Channel, atol: f64) -> ChannelAudit {
    let eig = linalg::hermitian_eigen(&ch.choi);
    let choi_min_eigenvalue = eig.last().map(|p| p.0).unwrap_or(0.0);
    let choi_rank = eig.iter().filter(|p| p.0 > atol).count();
    let is_cp = linalg::hermitian_deviation(&ch.choi) <= atol && choi_min_eigenvalue >= -atol;

    let mut sum_dk = CMatrix::zeros(ch.dim_in, ch.dim_in);
    for k in &ch.kraus {
        sum_dk += k.adjoint() * k;
    }
    let tp_deviation = linalg::max_abs_diff(&sum_dk, &linalg::identity(ch.dim_in));

    let unital_deviation = if ch.dim_in == ch.dim_out {
        let mut sum_kd = CMatrix::zeros(ch.dim_out, ch.dim_out);
        for k in &ch.kraus {
            sum_kd += k * k.adjoint();
        }
        linalg::max_abs_diff(&sum_kd, &linalg::identity(ch.dim_out))
    } else {
        f64::INFINITY
    };

    let is_unitary = ch.dim_in == ch.dim_out
        && choi_rank == 1
        && {
            let (lambda, v) = &eig[0];
            let k = CMatrix::from_column_slice(ch.dim_out, ch.dim_in, v.as_slice())
                * c(lambda.max(0.0).sqrt(), 0.0);
            linalg::max_abs_diff(&(k.adjoint() * &k), &linalg::identity(ch.dim_in)) <= atol
        };

    ChannelAudit {
        is_cp,
        is_tp: tp_deviation <= atol,
        is_unital: unital_deviation <= atol,
        is_unitary,
        choi_min_eigenvalue,
        choi_rank,
        tp_deviation,
        unital_deviation,
    }
}

/// Full dephasing in the computational basis: measure, then prepare.
pub fn decoherence(dim: usize) -> Channel {
    let kraus = (0..dim)
        .map(|i| linalg::outer(&linalg::basis_vector(dim, i)))
        .collect();
    Channel::new(kraus).expect("dim >= 1")
}

/// `rho -> (1 - lambda) rho + lambda tr(rho) 1/d`, via the Weyl basis.
pub fn depolarizing(dim: usize, lambda: f64) -> Channel {
    let d = dim as f64;
    let omega = std::f64::consts::TAU / d;
    let mut kraus = Vec::with_capacity(dim * dim);
    for a in 0..dim {
        for b in 0..dim {
            let weight = if a == 0 && b == 0 {
                1.0 - lambda + lambda / (d * d)
            } else {
                lambda / (d * d)
            };
            if weight <= 0.0 {
                continue;
            }
            // X^a Z^b
            let mut k = CMatrix::zeros(dim, dim);
            for j in 0..dim {
                let phase = omega * (b * j) as f64;
                k[((j + a) % dim, j)] = c(phase.cos(), phase.sin()) * weight.sqrt();
            }
            kraus.push(k);
        }
    }
    if kraus.is_empty() {
        kraus.push(CMatrix::from_element(dim, dim, ZERO));
    }
    Channel::new(kraus).expect("nonempty")
}

/// `sum_i p_i |i><i|`.
pub fn prepare(p: &ClassicalDistribution) -> DensityMatrix {
    let n = p.len();
    let mut m = CMatrix::zeros(n, n);
    for (i, &pi) in p.probs().iter().enumerate() {
        m[(i, i)] = c(pi.max(0.0), 0.0);
    }
    DensityMatrix::new_unchecked(m)
}

/// Basis-measurement statistics `<i|rho|i>`.
pub fn measure(rho: &DensityMatrix) -> ClassicalDistribution {
    let probs = rho.matrix.diagonal().iter().map(|z| z.re.max(0.0)).collect();
    ClassicalDistribution { probs }
}

/// `tr(S rho_a S^dagger rho_b)`, or `tr(rho_a rho_b)` without `S`.
pub fn transition_probability(
    rho_a: &DensityMatrix,
    rho_b: &DensityMatrix,
    s: Option<&CMatrix>,
    atol: f64,
) -> Result<f64, CpmError> {
    if rho_a.dim() != rho_b.dim() {
        return Err(CpmError::DimMismatch {
            expected: rho_a.dim(),
            found: rho_b.dim(),
        });
    }
    let evolved = match s {
        Some(s) => {
            if s.nrows() != rho_a.dim() || !s.is_square() {
                return Err(CpmError::DimMismatch {
                    expected: rho_a.dim(),
                    found: s.nrows(),
                });
            }
            let dev = linalg::unitarity_deviation(s);
            if dev > atol {
                return Err(CpmError::NotUnitary(dev));
            }
            s * rho_a.matrix() * s.adjoint()
        }
        None => rho_a.matrix().clone(),
    };
    Ok(linalg::trace_product(&evolved, rho_b.matrix()).re)
}

/// Lüders instrument built from an orthogonal projector resolution.
#[derive(Debug, Clone)]
pub struct StateChange {
    pub nonselective: Channel,
    pub selective: Vec<Channel>,
    /// Max entry of `Choi(T) - sum_a Choi(T_a)`.
    pub choi_deviation: f64,
    pub outcome: Option<OutcomeReport>,
}

#[derive(Debug, Clone)]
pub struct OutcomeReport {
    /// `P(a) = tr(P_a rho)`.
    pub weights: Vec<f64>,
    /// Normalized post-measurement states; `None` for impossible outcomes.
    pub posteriors: Vec<Option<DensityMatrix>>,
    /// Max entry of `T(rho) - sum_a P(a) rho_a`.
    pub mixture_deviation: f64,
}

pub fn state_change_decomposition(
    projectors: &[CMatrix],
    rho: Option<&DensityMatrix>,
    atol: f64,
) -> Result<StateChange, CpmError> {
    let first = projectors
        .first()
        .ok_or_else(|| CpmError::NotAResolution("no projectors".into()))?;
    let dim = first.nrows();
    for (a, p) in projectors.iter().enumerate() {
        if p.shape() != (dim, dim) {
            return Err(CpmError::NotAResolution(format!("projector {a} has shape {:?}", p.shape())));
        }
        if linalg::hermitian_deviation(p) > atol || linalg::max_abs_diff(&(p * p), p) > atol {
            return Err(CpmError::NotAResolution(format!("operator {a} is not a projector")));
        }
        for (b, q) in projectors.iter().enumerate().skip(a + 1) {
            if linalg::max_abs(&(p * q)) > atol {
                return Err(CpmError::NotAResolution(format!("projectors {a} and {b} overlap")));
            }
        }
    }
    let total = projectors.iter().fold(CMatrix::zeros(dim, dim), |acc, p| acc + p);
    let dev = linalg::max_abs_diff(&total, &linalg::identity(dim));
    if dev > atol {
        return Err(CpmError::NotAResolution(format!("sum deviates from identity by {dev:e}")));
    }

    let nonselective = Channel::new(projectors.to_vec())?;
    let selective: Vec<Channel> = projectors
        .iter()
        .map(|p| Channel::new(vec![p.clone()]))
        .collect::<Result<_, _>>()?;
    let summed = selective
        .iter()
        .fold(CMatrix::zeros(dim * dim, dim * dim), |acc, t| acc + t.choi());
    let choi_deviation = linalg::max_abs_diff(nonselective.choi(), &summed);

    let outcome = match rho {
        None => None,
        Some(rho) => {
            if rho.dim() != dim {
                return Err(CpmError::DimMismatch {
                    expected: dim,
                    found: rho.dim(),
                });
            }
            let mut weights = Vec::new();
            let mut posteriors = Vec::new();
            let mut mixture = CMatrix::zeros(dim, dim);
            for t in &selective {
                let unnorm = t.apply_operator(rho.matrix());
                let w = linalg::trace(&unnorm).re;
                weights.push(w);
                if w > atol {
                    let post = &unnorm / c(w, 0.0);
                    mixture += &post * c(w, 0.0);
                    posteriors.push(Some(DensityMatrix::new_unchecked(post)));
                } else {
                    posteriors.push(None);
                }
            }
            let after = nonselective.apply_operator(rho.matrix());
            Some(OutcomeReport {
                weights,
                posteriors,
                mixture_deviation: linalg::max_abs_diff(&after, &mixture),
            })
        }
    };

    Ok(StateChange {
        nonselective,
        selective,
        choi_deviation,
        outcome,
    })
}

/// True iff discarding after `ch` equals discarding its input, checked on the
/// Choi matrix: the partial trace over the output must be the identity.
pub fn causality_check(ch: &Channel, atol: f64) -> bool {
    let reduced = linalg::partial_trace(ch.choi(), &[ch.dim_in, ch.dim_out], &[0]);
    linalg::max_abs_diff(&reduced, &linalg::identity(ch.dim_in)) <= atol
}
