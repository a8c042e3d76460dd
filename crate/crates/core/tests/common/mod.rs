#![allow(dead_code)]

use qdiag::diagram::Diagram;
use qdiag::linalg::{c, CMatrix};
use qdiag::{ComplexTensor, Generator, ObjectWord, WireType};
use rand::Rng;
use rand_distr::StandardNormal;

pub const MAX_WIRES: usize = 4;
pub const MAX_TOTAL_DIM: usize = 64;

pub fn random_wire<R: Rng>(rng: &mut R, max_dim: usize) -> WireType {
    let d = rng.random_range(1..=max_dim);
    if rng.random_bool(0.25) {
        WireType::classical(d)
    } else {
        WireType::quantum(d)
    }
}

pub fn random_word<R: Rng>(rng: &mut R, max_len: usize, max_dim: usize) -> Vec<WireType> {
    let n = rng.random_range(0..=max_len);
    (0..n).map(|_| random_wire(rng, max_dim)).collect()
}

pub fn random_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    let scale = 1.0 / ((rows * cols) as f64).sqrt();
    CMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c(re * scale, im * scale)
    })
}

pub fn random_generator<R: Rng>(rng: &mut R, name: &str, dom: &[WireType], cod: &[WireType]) -> Diagram {
    let (dom, cod) = (ObjectWord::new(dom.to_vec()), ObjectWord::new(cod.to_vec()));
    let m = random_matrix(rng, cod.total_dim(), dom.total_dim());
    let t = ComplexTensor::from_matrix(&m, &cod.dims(), &dom.dims());
    Diagram::gen(Generator::new(name, dom, cod, Some(t)).unwrap())
}

/// Folds `parts` with `join` under a random bracketing.
fn random_bracketing<R: Rng>(rng: &mut R, mut parts: Vec<Diagram>, join: fn(Diagram, Diagram) -> Diagram) -> Diagram {
    while parts.len() > 1 {
        let i = rng.random_range(0..parts.len() - 1);
        let b = parts.remove(i + 1);
        let a = parts.remove(i);
        parts.insert(i, join(a, b));
    }
    parts.pop().unwrap()
}

fn total_dim(word: &[WireType]) -> usize {
    word.iter().map(|w| w.dim()).product()
}

/// One layer acting on `word`; returns the layer and its codomain.
fn random_layer<R: Rng>(rng: &mut R, word: &[WireType], boxes: &mut usize, max_boxes: usize, max_dim: usize) -> (Diagram, Vec<WireType>) {
    let mut pieces = Vec::new();
    let mut cod = Vec::new();
    let mut i = 0;
    let room = |cod: &[WireType], rest: usize, extra: &[WireType]| {
        cod.len() + rest + extra.len() <= MAX_WIRES
            && total_dim(cod) * total_dim(extra) * total_dim(&word[word.len() - rest..]) <= MAX_TOTAL_DIM
    };
    if word.is_empty() || rng.random_bool(0.15) {
        let w = random_wire(rng, max_dim);
        if room(&cod, word.len(), &[w, w]) {
            pieces.push(Diagram::Cup(w));
            cod.extend([w, w]);
        }
    }
    while i < word.len() {
        let w = word[i];
        let rest = word.len() - i - 1;
        let next = word.get(i + 1).copied();
        let roll = rng.random_range(0..10);
        if roll < 3 && *boxes < max_boxes {
            let out = random_word(rng, 2, max_dim);
            if room(&cod, rest, &out) {
                *boxes += 1;
                let name = format!("g{boxes}");
                if rng.random_bool(0.3) {
                    pieces.push(Diagram::dagger_node(random_generator(rng, &name, &out, &[w])));
                } else {
                    pieces.push(random_generator(rng, &name, &[w], &out));
                }
                cod.extend(out);
                i += 1;
                continue;
            }
        }
        if roll == 3 {
            if let Some(v) = next {
                pieces.push(Diagram::Swap(w, v));
                cod.extend([v, w]);
                i += 2;
                continue;
            }
        }
        if roll == 4 && next == Some(w) {
            pieces.push(Diagram::Cap(w));
            i += 2;
            continue;
        }
        if roll == 5 && w.is_classical() {
            if next == Some(w) && rng.random_bool(0.5) {
                pieces.push(Diagram::dagger_node(Diagram::Copy(w)));
                cod.push(w);
                i += 2;
                continue;
            }
            if room(&cod, rest, &[w, w]) {
                pieces.push(Diagram::Copy(w));
                cod.extend([w, w]);
            } else {
                pieces.push(Diagram::Delete(w));
            }
            i += 1;
            continue;
        }
        pieces.push(Diagram::Id(ObjectWord::single(w)));
        cod.push(w);
        i += 1;
    }
    if pieces.is_empty() {
        pieces.push(Diagram::Id(ObjectWord::unit()));
    }
    (random_bracketing(rng, pieces, Diagram::par), cod)
}

/// A well-typed pure diagram with domain `dom` and at most `max_boxes`
/// generators. Returns the diagram and its codomain.
pub fn random_diagram_from<R: Rng>(rng: &mut R, dom: &[WireType], max_boxes: usize, max_dim: usize) -> (Diagram, Vec<WireType>) {
    let layers = rng.random_range(1..=4);
    let mut word = dom.to_vec();
    let mut boxes = 0;
    let mut parts = Vec::new();
    for _ in 0..layers {
        let (layer, cod) = random_layer(rng, &word, &mut boxes, max_boxes, max_dim);
        parts.push(if rng.random_bool(0.1) {
            Diagram::dagger_node(Diagram::dagger_node(layer))
        } else {
            layer
        });
        word = cod;
    }
    (random_bracketing(rng, parts, Diagram::seq), word)
}

pub fn random_diagram<R: Rng>(rng: &mut R, max_boxes: usize, max_dim: usize) -> Diagram {
    let dom = random_word(rng, 3, max_dim);
    let dom = if total_dim(&dom) > MAX_TOTAL_DIM { Vec::new() } else { dom };
    random_diagram_from(rng, &dom, max_boxes, max_dim).0
}
