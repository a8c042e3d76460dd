//! Rewrite-based normalization.
//!
//! A diagram is flattened into layers of parallel atoms (single-wire
//! identities plus structural and generator boxes with daggers pushed to the
//! leaves). Atoms are slid to the earliest layer the interchange law allows,
//! then local rules fire between adjacent layers until none applies:
//!
//! - double swap: `swap(B,A) . swap(A,B) = id`
//! - symmetry absorption: `cap . swap = cap`, `swap . cup = cup`
//! - snake: `(cap x id) . (id x cup) = id` and its mirror
//! - speciality: `copy^dagger . copy = id`
//! - counit / unit: `(delete x id) . copy = id` and the dagger forms
//!
//! Every rule removes at least one non-identity atom, and every slide moves an
//! atom to a strictly earlier layer, so the procedure terminates.

use std::sync::Arc;

use super::{dagger_term, validate, Diagram, DiagramError, Generator, ObjectWord, WireType};

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Atom {
    Id(WireType),
    Gen { gen: Arc<Generator>, adjoint: bool },
    Swap(WireType, WireType),
    Cup(WireType),
    Cap(WireType),
    Copy(WireType),
    CoCopy(WireType),
    Delete(WireType),
    CoDelete(WireType),
    Discard(WireType),
    CoDiscard(WireType),
}

impl Atom {
    pub(crate) fn dom(&self) -> Vec<WireType> {
        match self {
            Atom::Id(a) | Atom::Copy(a) | Atom::Delete(a) | Atom::Discard(a) => vec![*a],
            Atom::Gen { gen, adjoint } => {
                let w = if *adjoint { gen.cod() } else { gen.dom() };
                w.wires().to_vec()
            }
            Atom::Swap(a, b) => vec![*a, *b],
            Atom::Cup(_) | Atom::CoDelete(_) | Atom::CoDiscard(_) => vec![],
            Atom::Cap(a) | Atom::CoCopy(a) => vec![*a, *a],
        }
    }

    pub(crate) fn cod(&self) -> Vec<WireType> {
        match self {
            Atom::Id(a) | Atom::CoCopy(a) | Atom::CoDelete(a) | Atom::CoDiscard(a) => vec![*a],
            Atom::Gen { gen, adjoint } => {
                let w = if *adjoint { gen.dom() } else { gen.cod() };
                w.wires().to_vec()
            }
            Atom::Swap(a, b) => vec![*b, *a],
            Atom::Cup(a) | Atom::Copy(a) => vec![*a, *a],
            Atom::Cap(_) | Atom::Delete(_) | Atom::Discard(_) => vec![],
        }
    }

    pub(crate) fn is_id(&self) -> bool {
        matches!(self, Atom::Id(_))
    }

    pub(crate) fn label(&self) -> String {
        match self {
            Atom::Id(_) => "id".into(),
            Atom::Gen { gen, adjoint: false } => gen.name().to_string(),
            Atom::Gen { gen, adjoint: true } => format!("{}†", gen.name()),
            Atom::Swap(..) => "swap".into(),
            Atom::Cup(_) => "cup".into(),
            Atom::Cap(_) => "cap".into(),
            Atom::Copy(_) => "copy".into(),
            Atom::CoCopy(_) => "copy†".into(),
            Atom::Delete(_) => "delete".into(),
            Atom::CoDelete(_) => "delete†".into(),
            Atom::Discard(_) => "discard".into(),
            Atom::CoDiscard(_) => "discard†".into(),
        }
    }

    fn to_diagram(&self) -> Diagram {
        match self {
            Atom::Id(a) => Diagram::Id(ObjectWord::single(*a)),
            Atom::Gen { gen, adjoint } => {
                let g = Diagram::Gen(gen.clone());
                if *adjoint {
                    Diagram::dagger_node(g)
                } else {
                    g
                }
            }
            Atom::Swap(a, b) => Diagram::Swap(*a, *b),
            Atom::Cup(a) => Diagram::Cup(*a),
            Atom::Cap(a) => Diagram::Cap(*a),
            Atom::Copy(a) => Diagram::Copy(*a),
            Atom::CoCopy(a) => Diagram::dagger_node(Diagram::Copy(*a)),
            Atom::Delete(a) => Diagram::Delete(*a),
            Atom::CoDelete(a) => Diagram::dagger_node(Diagram::Delete(*a)),
            Atom::Discard(a) => Diagram::Discard(*a),
            Atom::CoDiscard(a) => Diagram::dagger_node(Diagram::Discard(*a)),
        }
    }
}

pub(crate) type Layer = Vec<Atom>;

/// A diagram as a sequence of parallel layers.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Layered {
    pub dom: ObjectWord,
    pub layers: Vec<Layer>,
}

fn layer_cod(layer: &Layer) -> Vec<WireType> {
    layer.iter().flat_map(Atom::cod).collect()
}

fn identity_layer(wires: &[WireType]) -> Layer {
    wires.iter().map(|w| Atom::Id(*w)).collect()
}

impl Layered {
    pub fn cod(&self) -> Vec<WireType> {
        match self.layers.last() {
            Some(l) => layer_cod(l),
            None => self.dom.wires().to_vec(),
        }
    }

    fn single(atom: Atom) -> Self {
        Layered {
            dom: ObjectWord::new(atom.dom()),
            layers: vec![vec![atom]],
        }
    }
}

/// Flattens a valid diagram into layers without rewriting.
pub(crate) fn layer(d: &Diagram) -> Layered {
    match d {
        Diagram::Id(w) => Layered {
            dom: w.clone(),
            layers: Vec::new(),
        },
        Diagram::Gen(g) => Layered::single(Atom::Gen {
            gen: g.clone(),
            adjoint: false,
        }),
        Diagram::Swap(a, b) => Layered::single(Atom::Swap(*a, *b)),
        Diagram::Cup(a) => Layered::single(Atom::Cup(*a)),
        Diagram::Cap(a) => Layered::single(Atom::Cap(*a)),
        Diagram::Copy(a) => Layered::single(Atom::Copy(*a)),
        Diagram::Delete(a) => Layered::single(Atom::Delete(*a)),
        Diagram::Discard(a) => Layered::single(Atom::Discard(*a)),
        Diagram::Dagger(inner) => match &**inner {
            Diagram::Gen(g) => Layered::single(Atom::Gen {
                gen: g.clone(),
                adjoint: true,
            }),
            Diagram::Copy(a) => Layered::single(Atom::CoCopy(*a)),
            Diagram::Delete(a) => Layered::single(Atom::CoDelete(*a)),
            Diagram::Discard(a) => Layered::single(Atom::CoDiscard(*a)),
            Diagram::Dagger(x) => layer(x),
            other => layer(&dagger_term(other)),
        },
        Diagram::Seq(a, b) => {
            let mut la = layer(a);
            la.layers.extend(layer(b).layers);
            la
        }
        Diagram::Par(a, b) => {
            let mut la = layer(a);
            let mut lb = layer(b);
            let n = la.layers.len().max(lb.layers.len());
            for side in [&mut la, &mut lb] {
                let cod = side.cod();
                while side.layers.len() < n {
                    side.layers.push(identity_layer(&cod));
                }
            }
            let layers = la
                .layers
                .into_iter()
                .zip(lb.layers)
                .map(|(mut x, y)| {
                    x.extend(y);
                    x
                })
                .collect();
            Layered {
                dom: la.dom.concat(&lb.dom),
                layers,
            }
        }
    }
}

/// `(input offset, output offset)` of every atom in a layer.
fn offsets(layer: &Layer) -> Vec<(usize, usize)> {
    let mut inp = 0;
    let mut out = 0;
    layer
        .iter()
        .map(|a| {
            let here = (inp, out);
            inp += a.dom().len();
            out += a.cod().len();
            here
        })
        .collect()
}

/// Counters for one normalization run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct NormalizeStats {
    pub slides: usize,
    pub rewrites: usize,
}

impl NormalizeStats {
    pub fn steps(&self) -> usize {
        self.slides + self.rewrites
    }
}

fn strip_identity_layers(layers: &mut Vec<Layer>) {
    layers.retain(|l| !l.iter().all(Atom::is_id));
}

/// Tries to move atom `idx` of layer `i` into layer `i - 1`.
fn slide(layers: &mut [Layer], i: usize, idx: usize) -> bool {
    let atom = layers[i][idx].clone();
    if atom.is_id() {
        return false;
    }
    let s = offsets(&layers[i])[idx].0;
    let w = atom.dom().len();
    let below = &layers[i - 1];
    let below_offsets = offsets(below);
    let total_out: usize = below.iter().map(|a| a.cod().len()).sum();

    let start = below_offsets.iter().position(|&(_, out)| out == s);
    let start = match start {
        Some(j) => j,
        None if w == 0 && total_out == s => below.len(),
        None => return false,
    };
    if w > 0 {
        // skip zero-width atoms sitting at the boundary
        let mut j = start;
        while j < below.len() && below[j].cod().is_empty() && below_offsets[j].1 == s {
            j += 1;
        }
        if j + w > below.len() || !below[j..j + w].iter().all(Atom::is_id) {
            return false;
        }
        let mut new_below = below[..j].to_vec();
        new_below.push(atom.clone());
        new_below.extend_from_slice(&below[j + w..]);
        layers[i - 1] = new_below;
    } else {
        layers[i - 1].insert(start, atom.clone());
    }
    let ids = identity_layer(&atom.cod());
    layers[i].splice(idx..idx + 1, ids);
    true
}

fn compact(layers: &mut Vec<Layer>, stats: &mut NormalizeStats) {
    loop {
        let mut moved = false;
        for i in 1..layers.len() {
            let mut idx = 0;
            while idx < layers[i].len() {
                if slide(layers, i, idx) {
                    stats.slides += 1;
                    moved = true;
                }
                idx += 1;
            }
        }
        strip_identity_layers(layers);
        if !moved {
            break;
        }
    }
}

enum Edit {
    /// Replace the lower atom and the upper atom by the given lists.
    Replace(Vec<Atom>, Vec<Atom>),
}

fn match_pair(lower: &Atom, upper: &Atom, lower_out: usize, upper_in: usize) -> Option<Edit> {
    use Atom::*;
    let ids = |a: &Atom| identity_layer(&a.dom());
    let same = lower_out == upper_in;
    match (lower, upper) {
        (Swap(a, b), Swap(c, d)) if same && a == d && b == c => {
            Some(Edit::Replace(ids(lower), identity_layer(&upper.cod())))
        }
        (Swap(a, b), Cap(c)) if same && a == b && a == c => {
            Some(Edit::Replace(ids(lower), vec![upper.clone()]))
        }
        (Cup(a), Swap(b, c)) if same && a == b && b == c => {
            Some(Edit::Replace(vec![lower.clone()], ids(upper)))
        }
        (Copy(a), CoCopy(b)) if same && a == b => {
            Some(Edit::Replace(vec![Id(*a)], vec![Id(*a)]))
        }
        (Cup(a), Cap(b)) if a == b && (upper_in + 1 == lower_out || upper_in == lower_out + 1) => {
            Some(Edit::Replace(vec![], vec![]))
        }
        (Copy(a), Delete(b)) if a == b && (upper_in == lower_out || upper_in == lower_out + 1) => {
            Some(Edit::Replace(vec![Id(*a)], vec![]))
        }
        (CoDelete(a), CoCopy(b)) if a == b && (upper_in == lower_out || upper_in + 1 == lower_out) => {
            Some(Edit::Replace(vec![], vec![Id(*a)]))
        }
        _ => None,
    }
}

fn rewrite_once(layers: &mut [Layer]) -> bool {
    for i in 0..layers.len().saturating_sub(1) {
        let low_off = offsets(&layers[i]);
        let up_off = offsets(&layers[i + 1]);
        for (li, lower) in layers[i].iter().enumerate() {
            if lower.is_id() {
                continue;
            }
            for (ui, upper) in layers[i + 1].iter().enumerate() {
                if upper.is_id() {
                    continue;
                }
                if let Some(Edit::Replace(new_low, new_up)) =
                    match_pair(lower, upper, low_off[li].1, up_off[ui].0)
                {
                    layers[i + 1].splice(ui..ui + 1, new_up);
                    layers[i].splice(li..li + 1, new_low);
                    return true;
                }
            }
        }
    }
    false
}

fn rebuild_layer(layer: &Layer) -> Diagram {
    let mut parts: Vec<Diagram> = Vec::new();
    let mut run: Vec<WireType> = Vec::new();
    for atom in layer {
        match atom {
            Atom::Id(w) => run.push(*w),
            other => {
                if !run.is_empty() {
                    parts.push(Diagram::Id(ObjectWord::new(std::mem::take(&mut run))));
                }
                parts.push(other.to_diagram());
            }
        }
    }
    if !run.is_empty() {
        parts.push(Diagram::Id(ObjectWord::new(run)));
    }
    parts
        .into_iter()
        .reduce(Diagram::par)
        .unwrap_or(Diagram::Id(ObjectWord::unit()))
}

fn rebuild(layered: &Layered) -> Diagram {
    layered
        .layers
        .iter()
        .map(rebuild_layer)
        .reduce(Diagram::seq)
        .unwrap_or_else(|| Diagram::Id(layered.dom.clone()))
}

/// Normal form of a valid diagram together with the work it took.
pub fn normalize_with_stats(d: &Diagram) -> Result<(Diagram, NormalizeStats), DiagramError> {
    validate(d)?;
    let mut layered = layer(d);
    let mut stats = NormalizeStats::default();
    strip_identity_layers(&mut layered.layers);
    loop {
        compact(&mut layered.layers, &mut stats);
        if !rewrite_once(&mut layered.layers) {
            break;
        }
        stats.rewrites += 1;
        strip_identity_layers(&mut layered.layers);
    }
    Ok((rebuild(&layered), stats))
}

/// Normal form of a valid diagram. Typing and tensor semantics are preserved.
pub fn normalize(d: &Diagram) -> Result<Diagram, DiagramError> {
    normalize_with_stats(d).map(|(n, _)| n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::{compose_par, compose_seq, dagger};
    use crate::tensor::ComplexTensor;
    use crate::linalg::{c, CMatrix};

    fn q2() -> WireType {
        WireType::quantum(2)
    }

    fn gen(name: &str, d: usize) -> Diagram {
        let w = ObjectWord::single(WireType::quantum(d));
        let m = CMatrix::from_fn(d, d, |i, j| c(i as f64, j as f64));
        let t = ComplexTensor::from_matrix(&m, &[d], &[d]);
        Diagram::gen(Generator::new(name, w.clone(), w, Some(t)).unwrap())
    }

    fn id(w: WireType) -> Diagram {
        Diagram::Id(ObjectWord::single(w))
    }

    #[test]
    fn snake_yanks_to_identity() {
        let a = q2();
        let left = Diagram::seq(
            Diagram::par(id(a), Diagram::Cup(a)),
            Diagram::par(Diagram::Cap(a), id(a)),
        );
        assert_eq!(normalize(&left).unwrap(), id(a));
        let right = Diagram::seq(
            Diagram::par(Diagram::Cup(a), id(a)),
            Diagram::par(id(a), Diagram::Cap(a)),
        );
        assert_eq!(normalize(&right).unwrap(), id(a));
    }

    #[test]
    fn snake_through_a_generator() {
        let a = q2();
        let u = gen("U", 2);
        let d = Diagram::seq(
            Diagram::par(u.clone(), Diagram::Cup(a)),
            Diagram::par(Diagram::Cap(a), id(a)),
        );
        assert_eq!(normalize(&d).unwrap(), u);
    }

    #[test]
    fn double_swap_cancels() {
        let a = q2();
        let b = WireType::quantum(3);
        let d = Diagram::seq(Diagram::Swap(a, b), Diagram::Swap(b, a));
        assert_eq!(normalize(&d).unwrap(), Diagram::Id(ObjectWord::pair(a, b)));
    }

    #[test]
    fn double_swap_of_distinct_wires_stays_typed() {
        let a = q2();
        let b = WireType::quantum(3);
        let d = Diagram::seq(
            Diagram::seq(Diagram::Swap(a, b), Diagram::Swap(b, a)),
            Diagram::par(gen("U", 2), id(b)),
        );
        let nf = normalize(&d).unwrap();
        assert_eq!(validate(&nf).unwrap(), validate(&d).unwrap());
        assert_eq!(normalize(&nf).unwrap(), nf);
    }

    #[test]
    fn symmetry_absorbed_into_cup_and_cap() {
        let a = q2();
        assert_eq!(
            normalize(&Diagram::seq(Diagram::Swap(a, a), Diagram::Cap(a))).unwrap(),
            Diagram::Cap(a)
        );
        assert_eq!(
            normalize(&Diagram::seq(Diagram::Cup(a), Diagram::Swap(a, a))).unwrap(),
            Diagram::Cup(a)
        );
    }

    #[test]
    fn speciality_collapses() {
        let a = WireType::classical(2);
        let d = Diagram::seq(Diagram::Copy(a), dagger(&Diagram::Copy(a)).unwrap());
        assert_eq!(normalize(&d).unwrap(), id(a));
    }

    #[test]
    fn counit_collapses() {
        let a = WireType::classical(3);
        let d = Diagram::seq(Diagram::Copy(a), Diagram::par(Diagram::Delete(a), id(a)));
        assert_eq!(normalize(&d).unwrap(), id(a));
        let d = Diagram::seq(Diagram::Copy(a), Diagram::par(id(a), Diagram::Delete(a)));
        assert_eq!(normalize(&d).unwrap(), id(a));
    }

    #[test]
    fn identity_laws() {
        let u = gen("U", 2);
        let d = compose_seq(id(q2()), u.clone()).unwrap();
        assert_eq!(normalize(&d).unwrap(), u);
        let d = compose_par(u.clone(), Diagram::Id(ObjectWord::unit())).unwrap();
        assert_eq!(normalize(&d).unwrap(), u);
    }

    #[test]
    fn interchange_is_canonical() {
        let u = gen("U", 2);
        let v = gen("V", 2);
        let a = Diagram::seq(Diagram::par(u.clone(), id(q2())), Diagram::par(id(q2()), v.clone()));
        let b = Diagram::seq(Diagram::par(id(q2()), v.clone()), Diagram::par(u.clone(), id(q2())));
        let n = normalize(&a).unwrap();
        assert_eq!(n, Diagram::par(u, v));
        assert_eq!(normalize(&b).unwrap(), n);
    }

    #[test]
    fn normal_form_is_a_fixpoint() {
        let a = q2();
        let u = gen("U", 2);
        let d = Diagram::seq(
            Diagram::par(Diagram::par(u.clone(), Diagram::Cup(a)), id(a)),
            Diagram::par(Diagram::Swap(a, a), Diagram::Swap(a, a)),
        );
        let n = normalize(&d).unwrap();
        assert_eq!(normalize(&n).unwrap(), n);
        assert_eq!(validate(&n).unwrap(), validate(&d).unwrap());
    }

    #[test]
    fn double_dagger_eliminated() {
        let u = gen("U", 2);
        let dd = Diagram::dagger_node(Diagram::dagger_node(u.clone()));
        assert_eq!(normalize(&dd).unwrap(), u);
    }

    #[test]
    fn steps_bounded_by_square_of_size() {
        let a = q2();
        let snake = Diagram::seq(
            Diagram::par(id(a), Diagram::Cup(a)),
            Diagram::par(Diagram::Cap(a), id(a)),
        );
        let swaps = Diagram::seq(Diagram::Swap(a, a), Diagram::Swap(a, a));
        let d = Diagram::seq(Diagram::par(snake, id(a)), swaps);
        let (n, stats) = normalize_with_stats(&d).unwrap();
        assert_eq!(n, Diagram::Id(ObjectWord::pair(a, a)));
        assert!(stats.rewrites >= 2);
        assert!(stats.steps() <= d.size() * d.size());
    }
}
