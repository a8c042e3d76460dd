//! The categorical equations every wire must satisfy under evaluation:
//! snakes, symmetry, the classical Frobenius structure and the dagger.
//!
//! Copy and delete only type-check on classical wires, so the Frobenius
//! checks for a quantum wire run on the classical wire of the same dimension.

use crate::diagram::{dagger, validate, Diagram, Generator, ObjectWord, WireType};
use crate::linalg::{self, c, CMatrix};
use crate::tensor::{evaluate_matrix, ComplexTensor};

#[derive(Debug, Clone, PartialEq)]
pub struct AxiomCheck {
    pub name: &'static str,
    pub deviation: f64,
    pub passed: bool,
}

fn id(w: WireType) -> Diagram {
    Diagram::Id(ObjectWord::single(w))
}

fn deviation(lhs: &Diagram, rhs: &Diagram) -> f64 {
    let (dl, cl) = validate(lhs).expect("axiom lhs is well typed");
    let (dr, cr) = validate(rhs).expect("axiom rhs is well typed");
    assert_eq!((dl, cl), (dr, cr), "axiom sides have different types");
    let l = evaluate_matrix(lhs).expect("pure axiom");
    let r = evaluate_matrix(rhs).expect("pure axiom");
    linalg::max_abs_diff(&l, &r)
}

/// A fixed generator with no symmetry, used to exercise the dagger.
pub fn probe_generator(w: WireType) -> Diagram {
    let d = w.dim();
    let m = CMatrix::from_fn(d, d, |j, k| c(1.0 + j as f64 - 0.5 * k as f64, (j * k) as f64 - 0.25 * j as f64));
    let word = ObjectWord::single(w);
    let t = ComplexTensor::from_matrix(&m, &[d], &[d]);
    Diagram::gen(Generator::new("probe", word.clone(), word, Some(t)).expect("square payload"))
}

/// Runs every equation on `w`. Deterministic, no randomness.
pub fn axiom_suite(w: WireType, atol: f64) -> Vec<AxiomCheck> {
    let cw = WireType::classical(w.dim());
    let both = |a: Diagram, b: Diagram| Diagram::par(a, b);
    let seq = Diagram::seq;

    let snake_left = (
        seq(both(id(w), Diagram::Cup(w)), both(Diagram::Cap(w), id(w))),
        id(w),
    );
    let snake_right = (
        seq(both(Diagram::Cup(w), id(w)), both(id(w), Diagram::Cap(w))),
        id(w),
    );
    let swap_involution = (
        seq(Diagram::Swap(w, w), Diagram::Swap(w, w)),
        Diagram::Id(ObjectWord::pair(w, w)),
    );
    let cap_symmetry = (seq(Diagram::Swap(w, w), Diagram::Cap(w)), Diagram::Cap(w));
    let cup_symmetry = (seq(Diagram::Cup(w), Diagram::Swap(w, w)), Diagram::Cup(w));
    let speciality = (
        seq(Diagram::Copy(cw), Diagram::dagger_node(Diagram::Copy(cw))),
        id(cw),
    );
    let merge = || Diagram::dagger_node(Diagram::Copy(cw));
    let frobenius_left = (
        seq(both(Diagram::Copy(cw), id(cw)), both(id(cw), merge())),
        seq(merge(), Diagram::Copy(cw)),
    );
    let frobenius_right = (
        seq(both(id(cw), Diagram::Copy(cw)), both(merge(), id(cw))),
        seq(merge(), Diagram::Copy(cw)),
    );
    let counit = (
        seq(Diagram::Copy(cw), both(Diagram::Delete(cw), id(cw))),
        id(cw),
    );
    let p = probe_generator(w);
    let twice = dagger(&dagger(&p).expect("valid")).expect("valid");
    let dagger_involution = (twice, p.clone());
    let dagger_contravariant = (
        dagger(&seq(p.clone(), p.clone())).expect("valid"),
        seq(Diagram::dagger_node(p.clone()), Diagram::dagger_node(p.clone())),
    );

    let mut out = Vec::new();
    let pairs: [(&'static str, (Diagram, Diagram)); 11] = [
        ("snake_left", snake_left),
        ("snake_right", snake_right),
        ("swap_involution", swap_involution),
        ("cap_symmetry", cap_symmetry),
        ("cup_symmetry", cup_symmetry),
        ("speciality", speciality),
        ("frobenius_left", frobenius_left),
        ("frobenius_right", frobenius_right),
        ("counit", counit),
        ("dagger_involution", dagger_involution),
        ("dagger_contravariant", dagger_contravariant),
    ];
    for (name, (lhs, rhs)) in pairs {
        let dev = deviation(&lhs, &rhs);
        out.push(AxiomCheck {
            name,
            deviation: dev,
            passed: dev <= atol,
        });
    }
    let adj = evaluate_matrix(&Diagram::dagger_node(p.clone())).expect("pure");
    let dev = linalg::max_abs_diff(&adj, &evaluate_matrix(&p).expect("pure").adjoint());
    out.push(AxiomCheck {
        name: "dagger_adjoint",
        deviation: dev,
        passed: dev <= atol,
    });
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_passes_for_small_dims() {
        for d in 1..=5 {
            for w in [WireType::quantum(d), WireType::classical(d)] {
                for check in axiom_suite(w, 1e-12) {
                    assert!(check.passed, "{} on {w}: {}", check.name, check.deviation);
                }
            }
        }
    }

    #[test]
    fn probe_is_not_self_adjoint() {
        let p = probe_generator(WireType::quantum(3));
        let m = evaluate_matrix(&p).unwrap();
        assert!(linalg::hermitian_deviation(&m) > 0.1);
    }
}
