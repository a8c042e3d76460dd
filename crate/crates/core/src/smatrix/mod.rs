//! Finite S-matrices and their cluster decomposition.
//!
//! The connected part of `S` on a block `B` of wires is the cumulant of the
//! block moments over the set-partition lattice:
//!
//! ```text
//! m(B)     = <l_Bc| S |k_Bc> / Z          (complement pinned to reference labels)
//! c(B)     = sum_{pi in Partitions(B)} mu(pi, 1) (x)_{b in pi} m(b)
//! S        = sum_{pi in Partitions(all)} (x)_{b in pi} Z^{|b|/n} c(b)
//! ```
//!
//! The reference labels `(k, l)` are the input/output basis states of the
//! largest-modulus entry of `S`, and `Z = <l|S|k>` is that entry. For any
//! product `S = A (x) B` the moments factor, so every block straddling the cut
//! has a vanishing connected part.

mod lattice;

pub use lattice::{mobius_to_top, set_partitions};

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::diagram::{ObjectWord, WireKind};
use crate::entropy;
use crate::linalg::{self, c, CMatrix, CVector, ZERO};
use crate::tensor::ComplexTensor;

/// Largest number of wires the partition lattice is enumerated for.
pub const MAX_WIRES: usize = 4;

/// Block tensors whose entries all fall below this are treated as absent.
pub const ZERO_CUTOFF: f64 = 1e-12;

/// Entropy (bits) above which a state counts as entangled.
pub const ENTANGLEMENT_THRESHOLD: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SMatrixError {
    #[error("cluster decomposition supports at most {MAX_WIRES} wires, got {0}")]
    TooManyWires(usize),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimMismatch { expected: usize, found: usize },
    #[error("matrix is not unitary (deviation {0:e})")]
    NotUnitary(f64),
    #[error("input is not normalized (norm {0})")]
    NotNormalized(f64),
    #[error("cluster terms do not share the wire word {0}")]
    WireWordMismatch(ObjectWord),
    #[error("S-matrix wires must be quantum")]
    ClassicalWire,
    #[error("S-matrix needs at least one wire")]
    NoWires,
}

/// A square operator on a word of quantum wires (same word in and out).
#[derive(Debug, Clone, PartialEq)]
pub struct SMatrix {
    wires: ObjectWord,
    matrix: CMatrix,
}

impl SMatrix {
    /// Checks shape and wire kinds only; unitarity is reported by
    /// [`unitarity_check`] and demanded where an operation needs it.
    pub fn new(wires: ObjectWord, matrix: CMatrix) -> Result<Self, SMatrixError> {
        if wires.is_empty() {
            return Err(SMatrixError::NoWires);
        }
        if wires.wires().iter().any(|w| w.kind() != WireKind::Quantum) {
            return Err(SMatrixError::ClassicalWire);
        }
        let n = wires.total_dim();
        if matrix.shape() != (n, n) {
            return Err(SMatrixError::DimMismatch {
                expected: n,
                found: matrix.nrows(),
            });
        }
        Ok(Self { wires, matrix })
    }

    pub fn from_dims(dims: &[usize], matrix: CMatrix) -> Result<Self, SMatrixError> {
        let wires = dims
            .iter()
            .map(|&d| crate::diagram::WireType::new(WireKind::Quantum, d))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| SMatrixError::DimMismatch { expected: 1, found: 0 })?;
        Self::new(ObjectWord::new(wires), matrix)
    }

    pub fn wires(&self) -> &ObjectWord {
        &self.wires
    }

    pub fn dims(&self) -> Vec<usize> {
        self.wires.dims()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn to_tensor(&self) -> ComplexTensor {
        let d = self.dims();
        ComplexTensor::from_matrix(&self.matrix, &d, &d)
    }
}

/// Max entry of `S S^dagger - 1`.
pub fn unitarity_check(s: &SMatrix) -> f64 {
    linalg::unitarity_deviation(&s.matrix)
}

/// One term of the cluster sum: a partition of the wires and a connected
/// tensor per block.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterTerm {
    wires: ObjectWord,
    partition: Vec<Vec<usize>>,
    blocks: Vec<ComplexTensor>,
}

impl ClusterTerm {
    pub fn new(
        wires: ObjectWord,
        partition: Vec<Vec<usize>>,
        blocks: Vec<ComplexTensor>,
    ) -> Result<Self, SMatrixError> {
        let dims = wires.dims();
        let mut seen: Vec<usize> = partition.iter().flatten().copied().collect();
        seen.sort_unstable();
        if seen != (0..dims.len()).collect::<Vec<_>>() || partition.len() != blocks.len() {
            return Err(SMatrixError::WireWordMismatch(wires));
        }
        for (b, t) in partition.iter().zip(&blocks) {
            let bd: Vec<usize> = b.iter().map(|&w| dims[w]).collect();
            if t.out_dims() != bd.as_slice() || t.in_dims() != bd.as_slice() {
                return Err(SMatrixError::WireWordMismatch(wires));
            }
        }
        Ok(Self {
            wires,
            partition,
            blocks,
        })
    }

    pub fn wires(&self) -> &ObjectWord {
        &self.wires
    }

    pub fn partition(&self) -> &[Vec<usize>] {
        &self.partition
    }

    pub fn blocks(&self) -> &[ComplexTensor] {
        &self.blocks
    }

    /// True when every block is a single wire.
    pub fn is_all_singletons(&self) -> bool {
        self.partition.iter().all(|b| b.len() == 1)
    }

    /// A singleton block carrying the identity (a trivial bubble).
    pub fn is_trivial_bubble(&self, index: usize, atol: f64) -> bool {
        let t = &self.blocks[index];
        self.partition[index].len() == 1
            && linalg::max_abs_diff(&t.to_matrix(), &linalg::identity(t.rows())) <= atol
    }

    /// Full operator of this term on the whole wire word.
    pub fn operator(&self) -> CMatrix {
        let parts: Vec<(Vec<usize>, CMatrix)> = self
            .partition
            .iter()
            .cloned()
            .zip(self.blocks.iter().map(ComplexTensor::to_matrix))
            .collect();
        embed_blocks(&parts, &self.wires.dims())
    }

    /// Text label such as `{0,1}{2}`.
    pub fn label(&self) -> String {
        partition_label(&self.partition)
    }
}

pub fn partition_label(partition: &[Vec<usize>]) -> String {
    partition
        .iter()
        .map(|b| {
            let inner: Vec<String> = b.iter().map(|w| w.to_string()).collect();
            format!("{{{}}}", inner.join(","))
        })
        .collect()
}

/// Tensor product of block operators, each acting on its own (sorted) wires,
/// laid out in canonical wire order.
pub fn embed_blocks(blocks: &[(Vec<usize>, CMatrix)], dims: &[usize]) -> CMatrix {
    let total: usize = dims.iter().product();
    let block_dims: Vec<Vec<usize>> = blocks
        .iter()
        .map(|(b, _)| b.iter().map(|&w| dims[w]).collect())
        .collect();
    let mut out = CMatrix::zeros(total, total);
    for r in 0..total {
        let ri = linalg::unflatten(r, dims);
        for col in 0..total {
            let ci = linalg::unflatten(col, dims);
            let mut v = c(1.0, 0.0);
            for ((b, m), bd) in blocks.iter().zip(&block_dims) {
                let br = linalg::flatten(b.iter().map(|&w| ri[w]), bd);
                let bc = linalg::flatten(b.iter().map(|&w| ci[w]), bd);
                v *= m[(br, bc)];
                if v == ZERO {
                    break;
                }
            }
            out[(r, col)] = v;
        }
    }
    out
}

struct Reference {
    input: Vec<usize>,
    output: Vec<usize>,
    amplitude: Complex64,
}

fn reference(s: &SMatrix) -> Reference {
    let dims = s.dims();
    let mut best = (0, 0);
    let mut best_abs = -1.0;
    for col in 0..s.matrix.ncols() {
        for r in 0..s.matrix.nrows() {
            let a = s.matrix[(r, col)].norm();
            if a > best_abs {
                best_abs = a;
                best = (r, col);
            }
        }
    }
    Reference {
        input: linalg::unflatten(best.1, &dims),
        output: linalg::unflatten(best.0, &dims),
        amplitude: s.matrix[best],
    }
}

/// `S` restricted to `block`, with every other wire pinned to the reference.
fn restrict(s: &SMatrix, block: &[usize], reference: &Reference) -> CMatrix {
    let dims = s.dims();
    let bd: Vec<usize> = block.iter().map(|&w| dims[w]).collect();
    let n: usize = bd.iter().product();
    let mut out = CMatrix::zeros(n, n);
    for r in 0..n {
        let ri = linalg::unflatten(r, &bd);
        let mut full_r = reference.output.clone();
        for (k, &w) in block.iter().enumerate() {
            full_r[w] = ri[k];
        }
        let fr = linalg::flatten(full_r, &dims);
        for col in 0..n {
            let ci = linalg::unflatten(col, &bd);
            let mut full_c = reference.input.clone();
            for (k, &w) in block.iter().enumerate() {
                full_c[w] = ci[k];
            }
            out[(r, col)] = s.matrix[(fr, linalg::flatten(full_c, &dims))];
        }
    }
    out
}

fn check_size(s: &SMatrix) -> Result<usize, SMatrixError> {
    let n = s.wires.len();
    if n > MAX_WIRES {
        return Err(SMatrixError::TooManyWires(n));
    }
    Ok(n)
}

/// Connected tensor for every nonempty block of wires, scaled so that the
/// cluster sum reproduces `S` exactly.
pub fn connected_blocks(s: &SMatrix) -> Result<BTreeMap<Vec<usize>, CMatrix>, SMatrixError> {
    let n = check_size(s)?;
    let dims = s.dims();
    let reference = reference(s);
    let z = reference.amplitude;

    let subsets: Vec<Vec<usize>> = (1u32..(1 << n))
        .map(|mask| (0..n).filter(|w| mask & (1 << w) != 0).collect())
        .collect();
    let moments: BTreeMap<Vec<usize>, CMatrix> = subsets
        .iter()
        .map(|b| (b.clone(), restrict(s, b, &reference) / z))
        .collect();

    let mut out = BTreeMap::new();
    for block in &subsets {
        let local_dims: Vec<usize> = block.iter().map(|&w| dims[w]).collect();
        let local: Vec<usize> = (0..block.len()).collect();
        let size: usize = local_dims.iter().product();
        let mut acc = CMatrix::zeros(size, size);
        for pi in set_partitions(&local) {
            let parts: Vec<(Vec<usize>, CMatrix)> = pi
                .iter()
                .map(|b| {
                    let global: Vec<usize> = b.iter().map(|&k| block[k]).collect();
                    (b.clone(), moments[&global].clone())
                })
                .collect();
            acc += embed_blocks(&parts, &local_dims) * c(mobius_to_top(pi.len()), 0.0);
        }
        let scale = z.powf(block.len() as f64 / n as f64);
        out.insert(block.clone(), acc * scale);
    }
    Ok(out)
}

/// Nonzero terms of the cluster sum, one per set partition of the wires.
pub fn connected_parts(s: &SMatrix) -> Result<Vec<ClusterTerm>, SMatrixError> {
    let n = check_size(s)?;
    let dims = s.dims();
    let blocks = connected_blocks(s)?;
    let wires: Vec<usize> = (0..n).collect();
    let mut terms = Vec::new();
    for pi in set_partitions(&wires) {
        let mut pi = pi;
        pi.sort();
        let mats: Vec<&CMatrix> = pi.iter().map(|b| &blocks[b]).collect();
        if mats.iter().any(|m| linalg::max_abs(m) <= ZERO_CUTOFF) {
            continue;
        }
        let tensors = pi
            .iter()
            .zip(mats)
            .map(|(b, m)| {
                let bd: Vec<usize> = b.iter().map(|&w| dims[w]).collect();
                ComplexTensor::from_matrix(m, &bd, &bd)
            })
            .collect();
        terms.push(ClusterTerm {
            wires: s.wires.clone(),
            partition: pi,
            blocks: tensors,
        });
    }
    Ok(terms)
}

/// Sum of the tensor products of every term's blocks.
pub fn recombine(terms: &[ClusterTerm]) -> Result<SMatrix, SMatrixError> {
    let first = terms
        .first()
        .ok_or_else(|| SMatrixError::WireWordMismatch(ObjectWord::unit()))?;
    let wires = first.wires.clone();
    if let Some(t) = terms.iter().find(|t| t.wires != wires) {
        return Err(SMatrixError::WireWordMismatch(t.wires.clone()));
    }
    let n = wires.total_dim();
    let total = terms
        .iter()
        .fold(CMatrix::zeros(n, n), |acc, t| acc + t.operator());
    SMatrix::new(wires, total)
}

/// `S_B S_Q^dagger S_A`, where `S_Q^dagger` inverts the unitary `S_Q`.
pub fn discontinuity(
    s_a: &SMatrix,
    s_q: &SMatrix,
    s_b: &SMatrix,
    atol: f64,
) -> Result<ComplexTensor, SMatrixError> {
    let n = s_q.matrix.nrows();
    for s in [s_a, s_b] {
        if s.matrix.nrows() != n {
            return Err(SMatrixError::DimMismatch {
                expected: n,
                found: s.matrix.nrows(),
            });
        }
    }
    let dev = unitarity_check(s_q);
    if dev > atol {
        return Err(SMatrixError::NotUnitary(dev));
    }
    let m = &s_b.matrix * s_q.matrix.adjoint() * &s_a.matrix;
    let d = s_q.dims();
    Ok(ComplexTensor::from_matrix(&m, &d, &d))
}

/// Von Neumann entropy (bits) of the reduced state of `wire` in a pure state.
pub fn cut_entropy(state: &CVector, dims: &[usize], wire: usize) -> f64 {
    let rho = linalg::outer(state);
    let reduced = linalg::partial_trace(&rho, dims, &[wire]);
    entropy::matrix_entropy_bits(&reduced)
}

fn product_input(s: &SMatrix, factors: &[CVector], atol: f64) -> Result<CVector, SMatrixError> {
    let dims = s.dims();
    if factors.len() != dims.len() {
        return Err(SMatrixError::DimMismatch {
            expected: dims.len(),
            found: factors.len(),
        });
    }
    for (f, &d) in factors.iter().zip(&dims) {
        if f.len() != d {
            return Err(SMatrixError::DimMismatch {
                expected: d,
                found: f.len(),
            });
        }
        let norm = f.norm();
        if (norm - 1.0).abs() > atol {
            return Err(SMatrixError::NotNormalized(norm));
        }
    }
    Ok(linalg::kron_vectors(factors))
}

/// Scatters a product state and returns `S psi` with the entanglement entropy
/// (bits) between the first wire and the rest.
pub fn entangle_by_scattering(
    s: &SMatrix,
    factors: &[CVector],
    atol: f64,
) -> Result<(CVector, f64), SMatrixError> {
    let psi = product_input(s, factors, atol)?;
    let out = &s.matrix * psi;
    let e = cut_entropy(&out, &s.dims(), 0);
    Ok((out, e))
}

#[derive(Debug, Clone, PartialEq)]
pub struct WitnessReport {
    pub entangling: bool,
    /// Product input that became entangled.
    pub witness: Option<Vec<CVector>>,
    /// Largest single-wire cut entropy observed, in bits.
    pub max_entropy: f64,
    pub inputs_tested: usize,
    /// Set when `S` was recognised as a wire permutation of local unitaries.
    pub structurally_local: bool,
}

/// True when `S` is a tensor product of single-wire operators followed by a
/// wire permutation. Such operators never create entanglement.
pub fn is_local_up_to_permutation(s: &SMatrix, atol: f64) -> Result<bool, SMatrixError> {
    let n = check_size(s)?;
    let dims = s.dims();
    for perm in permutations(n) {
        let permuted: Vec<usize> = {
            let mut out = vec![0; n];
            for (w, &p) in perm.iter().enumerate() {
                out[p] = dims[w];
            }
            out
        };
        if permuted != dims {
            continue;
        }
        let p = linalg::wire_permutation(&dims, &perm);
        let candidate = SMatrix {
            wires: s.wires.clone(),
            matrix: p.adjoint() * &s.matrix,
        };
        let blocks = connected_blocks(&candidate)?;
        if blocks
            .iter()
            .filter(|(b, _)| b.len() >= 2)
            .all(|(_, m)| linalg::max_abs(m) <= atol)
        {
            return Ok(true);
        }
    }
    Ok(false)
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out.sort();
    out
}

/// Searches product inputs for one that `S` maps to an entangled state.
///
/// Inputs are a fixed grid (basis states and the uniform superposition on
/// every wire) followed by `samples` seeded random product states. Every
/// single-wire cut is examined. Whether `S` is local up to a wire permutation
/// is reported alongside, as an independent structural verdict.
pub fn quantumness_witness(
    s: &SMatrix,
    samples: usize,
    seed: u64,
    atol: f64,
) -> Result<WitnessReport, SMatrixError> {
    let structurally_local = is_local_up_to_permutation(s, atol)?;
    let dims = s.dims();
    let n = dims.len();

    let per_wire: Vec<Vec<CVector>> = dims
        .iter()
        .map(|&d| {
            let mut opts: Vec<CVector> = (0..d).map(|i| linalg::basis_vector(d, i)).collect();
            opts.push(CVector::from_element(d, c(1.0 / (d as f64).sqrt(), 0.0)));
            opts
        })
        .collect();
    let mut inputs: Vec<Vec<CVector>> = vec![Vec::new()];
    for opts in &per_wire {
        inputs = inputs
            .into_iter()
            .flat_map(|prefix| {
                opts.iter().map(move |o| {
                    let mut p = prefix.clone();
                    p.push(o.clone());
                    p
                })
            })
            .collect();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..samples {
        inputs.push(dims.iter().map(|&d| linalg::random_state_vector(d, &mut rng)).collect());
    }

    let mut max_entropy: f64 = 0.0;
    let mut witness = None;
    let tested = inputs.len();
    for factors in inputs {
        let out = &s.matrix * linalg::kron_vectors(&factors);
        let e = (0..n)
            .map(|w| cut_entropy(&out, &dims, w))
            .fold(0.0, f64::max);
        if e > max_entropy {
            max_entropy = e;
        }
        if e > ENTANGLEMENT_THRESHOLD && witness.is_none() {
            witness = Some(factors);
        }
    }
    Ok(WitnessReport {
        entangling: witness.is_some(),
        witness,
        max_entropy,
        inputs_tested: tested,
        structurally_local,
    })
}

/// CNOT on two qubits, control on the first wire.
pub fn cnot() -> CMatrix {
    let mut m = CMatrix::zeros(4, 4);
    for (r, col) in [(0, 0), (1, 1), (2, 3), (3, 2)] {
        m[(r, col)] = c(1.0, 0.0);
    }
    m
}
