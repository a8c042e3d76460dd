//! Dense complex tensors and the evaluation of diagrams into them.
//!
//! A tensor's shape lists output dims first, then input dims; entries are
//! row-major over that shape, which makes it the row-major matrix with rows
//! indexed by outputs and columns by inputs.

use num_complex::Complex64;
use thiserror::Error;

use crate::diagram::{validate, Diagram, DiagramError, ObjectWord, WireType};
use crate::linalg::{self, CMatrix, ONE, ZERO};
use crate::DEFAULT_ATOL;

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexTensor {
    shape: Vec<usize>,
    outputs: usize,
    entries: Vec<Complex64>,
    atol: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TensorError {
    #[error("tensor of shape {shape:?} needs {expected} entries, got {found}")]
    EntryCount {
        shape: Vec<usize>,
        expected: usize,
        found: usize,
    },
    #[error("shape entries must be positive")]
    ZeroExtent,
}

impl ComplexTensor {
    /// `outputs` is how many leading entries of `shape` are output legs.
    pub fn new(
        shape: Vec<usize>,
        outputs: usize,
        entries: Vec<Complex64>,
    ) -> Result<Self, TensorError> {
        assert!(outputs <= shape.len());
        if shape.contains(&0) {
            return Err(TensorError::ZeroExtent);
        }
        let expected: usize = shape.iter().product();
        if entries.len() != expected {
            return Err(TensorError::EntryCount {
                shape,
                expected,
                found: entries.len(),
            });
        }
        Ok(Self {
            shape,
            outputs,
            entries,
            atol: DEFAULT_ATOL,
        })
    }

    pub fn from_matrix(m: &CMatrix, out_dims: &[usize], in_dims: &[usize]) -> Self {
        let rows: usize = out_dims.iter().product();
        let cols: usize = in_dims.iter().product();
        assert_eq!((m.nrows(), m.ncols()), (rows, cols), "matrix/legs mismatch");
        let mut entries = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for col in 0..cols {
                entries.push(m[(r, col)]);
            }
        }
        let mut shape = out_dims.to_vec();
        shape.extend_from_slice(in_dims);
        Self {
            shape,
            outputs: out_dims.len(),
            entries,
            atol: DEFAULT_ATOL,
        }
    }

    pub fn scalar(z: Complex64) -> Self {
        Self {
            shape: Vec::new(),
            outputs: 0,
            entries: vec![z],
            atol: DEFAULT_ATOL,
        }
    }

    pub fn with_atol(mut self, atol: f64) -> Self {
        self.atol = atol;
        self
    }

    pub fn atol(&self) -> f64 {
        self.atol
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn out_dims(&self) -> &[usize] {
        &self.shape[..self.outputs]
    }

    pub fn in_dims(&self) -> &[usize] {
        &self.shape[self.outputs..]
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn rows(&self) -> usize {
        self.out_dims().iter().product()
    }

    pub fn cols(&self) -> usize {
        self.in_dims().iter().product()
    }

    pub fn to_matrix(&self) -> CMatrix {
        CMatrix::from_row_slice(self.rows(), self.cols(), &self.entries)
    }

    /// The single entry of a 1x1 tensor.
    pub fn as_scalar(&self) -> Option<Complex64> {
        (self.entries.len() == 1).then(|| self.entries[0])
    }
}

/// True iff the shapes agree and every entry differs by at most `atol`.
pub fn tensors_close(a: &ComplexTensor, b: &ComplexTensor, atol: f64) -> bool {
    a.shape == b.shape
        && a.outputs == b.outputs
        && a
            .entries
            .iter()
            .zip(&b.entries)
            .all(|(x, y)| (x - y).norm() <= atol)
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error(transparent)]
    Diagram(#[from] DiagramError),
    #[error("diagram discards a wire; double it to the CPM level before evaluating")]
    DiscardAtPureLevel,
    #[error("generator `{0}` has no payload")]
    MissingPayload(String),
}

/// Pure-level semantics of a valid diagram.
pub fn evaluate(d: &Diagram) -> Result<ComplexTensor, EvalError> {
    let (dom, cod) = validate(d)?;
    let m = evaluate_matrix(d)?;
    Ok(ComplexTensor::from_matrix(&m, &cod.dims(), &dom.dims()))
}

/// Evaluation as a `cod x dom` matrix. Assumes `d` is valid.
pub fn evaluate_matrix(d: &Diagram) -> Result<CMatrix, EvalError> {
    Ok(match d {
        Diagram::Id(w) => linalg::identity(w.total_dim()),
        Diagram::Gen(g) => g
            .payload()
            .ok_or_else(|| EvalError::MissingPayload(g.name().to_string()))?
            .to_matrix(),
        Diagram::Seq(a, b) => evaluate_matrix(b)? * evaluate_matrix(a)?,
        Diagram::Par(a, b) => linalg::kron(&evaluate_matrix(a)?, &evaluate_matrix(b)?),
        Diagram::Swap(a, b) => swap_matrix(*a, *b),
        Diagram::Cup(a) => cup_matrix(*a),
        Diagram::Cap(a) => cup_matrix(*a).adjoint(),
        Diagram::Copy(a) => copy_matrix(*a),
        Diagram::Delete(a) => delete_matrix(*a),
        Diagram::Discard(_) => return Err(EvalError::DiscardAtPureLevel),
        Diagram::Dagger(inner) => evaluate_matrix(inner)?.adjoint(),
    })
}

/// `|a, b> -> |b, a>`.
pub fn swap_matrix(a: WireType, b: WireType) -> CMatrix {
    linalg::wire_permutation(&[a.dim(), b.dim()], &[1, 0])
}

/// Unnormalized `sum_i |ii>`.
pub fn cup_matrix(a: WireType) -> CMatrix {
    let d = a.dim();
    let mut m = CMatrix::zeros(d * d, 1);
    for i in 0..d {
        m[(i * d + i, 0)] = ONE;
    }
    m
}

/// `sum_i |ii><i|`.
pub fn copy_matrix(a: WireType) -> CMatrix {
    let d = a.dim();
    let mut m = CMatrix::zeros(d * d, d);
    for i in 0..d {
        m[(i * d + i, i)] = ONE;
    }
    m
}

/// `sum_i <i|`.
pub fn delete_matrix(a: WireType) -> CMatrix {
    CMatrix::from_element(1, a.dim(), ONE)
}

/// Generator-free matrix for the identity on a word, convenient in tests.
pub fn identity_tensor(word: &ObjectWord) -> ComplexTensor {
    let dims = word.dims();
    ComplexTensor::from_matrix(&linalg::identity(word.total_dim()), &dims, &dims)
}

pub fn zero_tensor(out_dims: &[usize], in_dims: &[usize]) -> ComplexTensor {
    let rows: usize = out_dims.iter().product();
    let cols: usize = in_dims.iter().product();
    ComplexTensor::from_matrix(&CMatrix::from_element(rows, cols, ZERO), out_dims, in_dims)
}
