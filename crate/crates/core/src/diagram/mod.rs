//! Typed term IR for string diagrams of a dagger compact category.
//!
//! Objects are words of [`WireType`]s; morphisms are [`Diagram`] terms built
//! from generators and structural boxes. The IR is strict: no associators or
//! unitors appear, and the empty word is the monoidal unit.

mod dot;
mod normalize;

pub use dot::export_dot;
pub use normalize::{normalize, normalize_with_stats, NormalizeStats};

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::tensor::ComplexTensor;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum WireKind {
    Quantum,
    Classical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WireType {
    kind: WireKind,
    dim: usize,
}

impl WireType {
    pub fn new(kind: WireKind, dim: usize) -> Result<Self, DiagramError> {
        if dim == 0 {
            return Err(DiagramError::ZeroDimension);
        }
        Ok(Self { kind, dim })
    }

    /// Panics on `dim == 0`.
    pub fn quantum(dim: usize) -> Self {
        Self::new(WireKind::Quantum, dim).expect("wire dimension must be positive")
    }

    /// Panics on `dim == 0`.
    pub fn classical(dim: usize) -> Self {
        Self::new(WireKind::Classical, dim).expect("wire dimension must be positive")
    }

    pub fn kind(&self) -> WireKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_classical(&self) -> bool {
        self.kind == WireKind::Classical
    }
}

impl fmt::Display for WireType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            WireKind::Quantum => write!(f, "q{}", self.dim),
            WireKind::Classical => write!(f, "c{}", self.dim),
        }
    }
}

/// An ordered tensor word of wires. The empty word is the unit `I`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct ObjectWord(Vec<WireType>);

impl ObjectWord {
    pub fn unit() -> Self {
        Self(Vec::new())
    }

    pub fn new(wires: Vec<WireType>) -> Self {
        Self(wires)
    }

    pub fn single(w: WireType) -> Self {
        Self(vec![w])
    }

    pub fn pair(a: WireType, b: WireType) -> Self {
        Self(vec![a, b])
    }

    pub fn wires(&self) -> &[WireType] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.0.iter().map(WireType::dim).collect()
    }

    /// Product of wire dimensions; 1 for the unit.
    pub fn total_dim(&self) -> usize {
        self.0.iter().map(WireType::dim).product()
    }

    pub fn concat(&self, other: &ObjectWord) -> ObjectWord {
        let mut wires = self.0.clone();
        wires.extend_from_slice(&other.0);
        ObjectWord(wires)
    }
}

impl From<Vec<WireType>> for ObjectWord {
    fn from(v: Vec<WireType>) -> Self {
        Self(v)
    }
}

impl fmt::Display for ObjectWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "I");
        }
        for (i, w) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, "*")?;
            }
            write!(f, "{w}")?;
        }
        Ok(())
    }
}

/// A named box with fixed type and an optional matrix payload of shape
/// `cod dims x dom dims`.
#[derive(Debug, Clone, PartialEq)]
pub struct Generator {
    name: String,
    dom: ObjectWord,
    cod: ObjectWord,
    payload: Option<ComplexTensor>,
}

impl Generator {
    pub fn new(
        name: impl Into<String>,
        dom: ObjectWord,
        cod: ObjectWord,
        payload: Option<ComplexTensor>,
    ) -> Result<Self, DiagramError> {
        let name = name.into();
        if let Some(p) = &payload {
            let (rows, cols) = (cod.total_dim(), dom.total_dim());
            if p.rows() != rows || p.cols() != cols {
                return Err(DiagramError::PayloadShape {
                    name,
                    expected: (rows, cols),
                    found: (p.rows(), p.cols()),
                });
            }
        }
        Ok(Self {
            name,
            dom,
            cod,
            payload,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dom(&self) -> &ObjectWord {
        &self.dom
    }

    pub fn cod(&self) -> &ObjectWord {
        &self.cod
    }

    pub fn payload(&self) -> Option<&ComplexTensor> {
        self.payload.as_ref()
    }

    pub fn is_state(&self) -> bool {
        self.dom.is_empty()
    }

    pub fn is_effect(&self) -> bool {
        self.cod.is_empty()
    }
}

/// Term tree of a diagram. `Seq(a, b)` runs `a` first, then `b`.
#[derive(Debug, Clone, PartialEq)]
pub enum Diagram {
    Id(ObjectWord),
    Gen(Arc<Generator>),
    Seq(Box<Diagram>, Box<Diagram>),
    Par(Box<Diagram>, Box<Diagram>),
    Swap(WireType, WireType),
    Cup(WireType),
    Cap(WireType),
    Copy(WireType),
    Delete(WireType),
    Discard(WireType),
    Dagger(Box<Diagram>),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DiagramError {
    #[error("type mismatch at {position}: expected {expected}, found {found}")]
    TypeMismatch {
        position: String,
        expected: ObjectWord,
        found: ObjectWord,
    },
    #[error("copy/delete at {position} requires a classical wire")]
    ClassicalOnly { position: String },
    #[error("payload of generator `{name}` has shape {found:?}, expected {expected:?}")]
    PayloadShape {
        name: String,
        expected: (usize, usize),
        found: (usize, usize),
    },
    #[error("wire dimension must be at least 1")]
    ZeroDimension,
}

impl Diagram {
    pub fn id(word: ObjectWord) -> Self {
        Diagram::Id(word)
    }

    pub fn gen(g: Generator) -> Self {
        Diagram::Gen(Arc::new(g))
    }

    pub fn seq(a: Diagram, b: Diagram) -> Self {
        Diagram::Seq(Box::new(a), Box::new(b))
    }

    pub fn par(a: Diagram, b: Diagram) -> Self {
        Diagram::Par(Box::new(a), Box::new(b))
    }

    pub fn dagger_node(d: Diagram) -> Self {
        Diagram::Dagger(Box::new(d))
    }

    /// Number of nodes in the term tree.
    pub fn size(&self) -> usize {
        match self {
            Diagram::Seq(a, b) | Diagram::Par(a, b) => 1 + a.size() + b.size(),
            Diagram::Dagger(a) => 1 + a.size(),
            _ => 1,
        }
    }

    pub fn contains_discard(&self) -> bool {
        match self {
            Diagram::Discard(_) => true,
            Diagram::Seq(a, b) | Diagram::Par(a, b) => a.contains_discard() || b.contains_discard(),
            Diagram::Dagger(a) => a.contains_discard(),
            _ => false,
        }
    }

    /// Every generator occurring in the term, in left-to-right order.
    pub fn generators(&self) -> Vec<Arc<Generator>> {
        let mut out = Vec::new();
        self.collect_generators(&mut out);
        out
    }

    fn collect_generators(&self, out: &mut Vec<Arc<Generator>>) {
        match self {
            Diagram::Gen(g) => out.push(g.clone()),
            Diagram::Seq(a, b) | Diagram::Par(a, b) => {
                a.collect_generators(out);
                b.collect_generators(out);
            }
            Diagram::Dagger(a) => a.collect_generators(out),
            _ => {}
        }
    }
}

/// Typechecks `d` and returns its `(dom, cod)`.
pub fn validate(d: &Diagram) -> Result<(ObjectWord, ObjectWord), DiagramError> {
    check(d, "root")
}

fn check(d: &Diagram, pos: &str) -> Result<(ObjectWord, ObjectWord), DiagramError> {
    let classical = |w: &WireType| {
        if w.is_classical() {
            Ok(())
        } else {
            Err(DiagramError::ClassicalOnly {
                position: pos.to_string(),
            })
        }
    };
    Ok(match d {
        Diagram::Id(w) => (w.clone(), w.clone()),
        Diagram::Gen(g) => (g.dom.clone(), g.cod.clone()),
        Diagram::Seq(a, b) => {
            let (da, ca) = check(a, &format!("{pos}/seq.0"))?;
            let (db, cb) = check(b, &format!("{pos}/seq.1"))?;
            if ca != db {
                return Err(DiagramError::TypeMismatch {
                    position: pos.to_string(),
                    expected: ca,
                    found: db,
                });
            }
            (da, cb)
        }
        Diagram::Par(a, b) => {
            let (da, ca) = check(a, &format!("{pos}/par.0"))?;
            let (db, cb) = check(b, &format!("{pos}/par.1"))?;
            (da.concat(&db), ca.concat(&cb))
        }
        Diagram::Swap(a, b) => (ObjectWord::pair(*a, *b), ObjectWord::pair(*b, *a)),
        Diagram::Cup(a) => (ObjectWord::unit(), ObjectWord::pair(*a, *a)),
        Diagram::Cap(a) => (ObjectWord::pair(*a, *a), ObjectWord::unit()),
        Diagram::Copy(a) => {
            classical(a)?;
            (ObjectWord::single(*a), ObjectWord::pair(*a, *a))
        }
        Diagram::Delete(a) => {
            classical(a)?;
            (ObjectWord::single(*a), ObjectWord::unit())
        }
        Diagram::Discard(a) => (ObjectWord::single(*a), ObjectWord::unit()),
        Diagram::Dagger(a) => {
            let (da, ca) = check(a, &format!("{pos}/dagger"))?;
            (ca, da)
        }
    })
}

/// Dagger of a valid diagram, pushed through the term structure: sequential
/// order reverses, cups and caps exchange, and double daggers cancel.
pub fn dagger(d: &Diagram) -> Result<Diagram, DiagramError> {
    validate(d)?;
    Ok(dagger_term(d))
}

pub(crate) fn dagger_term(d: &Diagram) -> Diagram {
    match d {
        Diagram::Id(w) => Diagram::Id(w.clone()),
        Diagram::Seq(a, b) => Diagram::seq(dagger_term(b), dagger_term(a)),
        Diagram::Par(a, b) => Diagram::par(dagger_term(a), dagger_term(b)),
        Diagram::Swap(a, b) => Diagram::Swap(*b, *a),
        Diagram::Cup(a) => Diagram::Cap(*a),
        Diagram::Cap(a) => Diagram::Cup(*a),
        Diagram::Dagger(inner) => (**inner).clone(),
        atom @ (Diagram::Gen(_) | Diagram::Copy(_) | Diagram::Delete(_) | Diagram::Discard(_)) => {
            Diagram::dagger_node(atom.clone())
        }
    }
}

/// `d1` followed by `d2`.
pub fn compose_seq(d1: Diagram, d2: Diagram) -> Result<Diagram, DiagramError> {
    let (_, c1) = validate(&d1)?;
    let (dom2, _) = validate(&d2)?;
    if c1 != dom2 {
        return Err(DiagramError::TypeMismatch {
            position: "root".into(),
            expected: c1,
            found: dom2,
        });
    }
    Ok(Diagram::seq(d1, d2))
}

pub fn compose_par(d1: Diagram, d2: Diagram) -> Result<Diagram, DiagramError> {
    validate(&d1)?;
    validate(&d2)?;
    Ok(Diagram::par(d1, d2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, CMatrix};

    fn q(d: usize) -> WireType {
        WireType::quantum(d)
    }

    fn unitary_gen(name: &str, d: usize) -> Diagram {
        let w = ObjectWord::single(q(d));
        let m = CMatrix::from_fn(d, d, |i, j| c((i + 2 * j) as f64, 0.0));
        let t = ComplexTensor::from_matrix(&m, &[d], &[d]);
        Diagram::gen(Generator::new(name, w.clone(), w, Some(t)).unwrap())
    }

    #[test]
    fn zero_dim_rejected() {
        assert_eq!(
            WireType::new(WireKind::Quantum, 0),
            Err(DiagramError::ZeroDimension)
        );
    }

    #[test]
    fn word_unit_and_associativity() {
        let a = ObjectWord::single(q(2));
        let b = ObjectWord::single(q(3));
        let cw = ObjectWord::single(WireType::classical(2));
        assert_eq!(a.concat(&ObjectWord::unit()), a);
        assert_eq!(ObjectWord::unit().concat(&a), a);
        assert_eq!(a.concat(&b).concat(&cw), a.concat(&b.concat(&cw)));
        assert_eq!(ObjectWord::unit().to_string(), "I");
        assert_eq!(a.concat(&cw).to_string(), "q2*c2");
    }

    #[test]
    fn matching_words_compose() {
        let d = Diagram::seq(unitary_gen("U", 2), unitary_gen("V", 2));
        let w = ObjectWord::single(q(2));
        assert_eq!(validate(&d).unwrap(), (w.clone(), w));
    }

    #[test]
    fn mismatched_words_rejected() {
        let d = Diagram::seq(unitary_gen("U", 2), unitary_gen("W", 3));
        assert!(matches!(
            validate(&d),
            Err(DiagramError::TypeMismatch { .. })
        ));
        assert!(compose_seq(unitary_gen("U", 2), unitary_gen("W", 3)).is_err());
    }

    #[test]
    fn copy_requires_classical() {
        assert!(matches!(
            validate(&Diagram::Copy(q(2))),
            Err(DiagramError::ClassicalOnly { .. })
        ));
        assert!(matches!(
            validate(&Diagram::Delete(q(2))),
            Err(DiagramError::ClassicalOnly { .. })
        ));
        assert!(validate(&Diagram::Copy(WireType::classical(2))).is_ok());
    }

    #[test]
    fn cup_on_cup_is_a_type_error() {
        let d = Diagram::seq(Diagram::Cup(q(2)), Diagram::Cup(q(2)));
        assert!(matches!(
            validate(&d),
            Err(DiagramError::TypeMismatch { .. })
        ));
    }

    #[test]
    fn payload_shape_checked() {
        let w = ObjectWord::single(q(2));
        let t = ComplexTensor::from_matrix(&CMatrix::identity(3, 3), &[3], &[3]);
        assert!(matches!(
            Generator::new("bad", w.clone(), w, Some(t)),
            Err(DiagramError::PayloadShape { .. })
        ));
    }

    #[test]
    fn dagger_swaps_types_and_is_involutive() {
        let w = ObjectWord::single(q(2));
        let state = Diagram::gen(Generator::new("psi", ObjectWord::unit(), w.clone(), None).unwrap());
        let eff = dagger(&state).unwrap();
        assert_eq!(validate(&eff).unwrap(), (w, ObjectWord::unit()));
        let u = unitary_gen("U", 2);
        assert_eq!(dagger(&dagger(&u).unwrap()).unwrap(), u);
        assert_eq!(dagger(&Diagram::Cup(q(2))).unwrap(), Diagram::Cap(q(2)));
    }

    #[test]
    fn dagger_distributes() {
        let a = unitary_gen("A", 2);
        let b = unitary_gen("B", 2);
        assert_eq!(
            dagger(&Diagram::seq(a.clone(), b.clone())).unwrap(),
            Diagram::seq(dagger(&b).unwrap(), dagger(&a).unwrap())
        );
        assert_eq!(
            dagger(&Diagram::par(a.clone(), b.clone())).unwrap(),
            Diagram::par(dagger(&a).unwrap(), dagger(&b).unwrap())
        );
    }
}
