//! Joint outcome measures, correlators and CHSH values, classical and quantum.
//!
//! Outcomes are `+1` / `-1`. A joint measure assigns a weight to every tuple
//! `(i, i', j, j')` of outcomes for Alice's settings `a, a'` and Bob's `b, b'`.

use std::f64::consts::PI;

use thiserror::Error;

use crate::linalg::{self, c, CMatrix, CVector, ZERO};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BellError {
    #[error("state is not normalized (norm {0})")]
    NotNormalized(f64),
    #[error("observable does not have eigenvalues +-1: {0}")]
    NotPM1Observable(String),
    #[error("expected dimension {expected}, found {found}")]
    DimMismatch { expected: usize, found: usize },
    #[error("grid resolution must be at least {MIN_RESOLUTION}, got {0}")]
    GridTooCoarse(usize),
    #[error("invalid joint measure: {0}")]
    InvalidMeasure(String),
}

pub const MIN_RESOLUTION: usize = 8;

pub type Outcomes = [i8; 4];

fn bit(o: i8) -> usize {
    if o > 0 {
        0
    } else {
        1
    }
}

fn sign(b: usize) -> i8 {
    if b == 0 {
        1
    } else {
        -1
    }
}

/// All 16 tuples `(i, i', j, j')` in index order.
pub fn all_outcomes() -> Vec<Outcomes> {
    (0..16)
        .map(|k| [sign(k >> 3 & 1), sign(k >> 2 & 1), sign(k >> 1 & 1), sign(k & 1)])
        .collect()
}

fn joint_index(o: Outcomes) -> usize {
    bit(o[0]) << 3 | bit(o[1]) << 2 | bit(o[2]) << 1 | bit(o[3])
}

#[derive(Debug, Clone, PartialEq)]
pub struct JointMeasure4 {
    weights: [f64; 16],
}

impl JointMeasure4 {
    /// Unchecked signed measure, weights in [`all_outcomes`] order.
    pub fn new(weights: [f64; 16]) -> Self {
        Self { weights }
    }

    /// A hidden-variable model: nonnegative weights summing to one.
    pub fn lhv(weights: [f64; 16], atol: f64) -> Result<Self, BellError> {
        if let Some(w) = weights.iter().find(|w| **w < -atol || !w.is_finite()) {
            return Err(BellError::InvalidMeasure(format!("negative weight {w}")));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > atol {
            return Err(BellError::InvalidMeasure(format!("weights sum to {total}")));
        }
        Ok(Self { weights })
    }

    pub fn uniform() -> Self {
        Self::new([1.0 / 16.0; 16])
    }

    pub fn point_mass(o: Outcomes) -> Self {
        let mut weights = [0.0; 16];
        weights[joint_index(o)] = 1.0;
        Self::new(weights)
    }

    pub fn weight(&self, o: Outcomes) -> f64 {
        self.weights[joint_index(o)]
    }

    pub fn weights(&self) -> &[f64; 16] {
        &self.weights
    }

    pub fn total(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// Which of Alice's and Bob's settings a pair measure refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SettingPair {
    AB,
    APrimeB,
    ABPrime,
    APrimeBPrime,
}

impl SettingPair {
    pub const ALL: [SettingPair; 4] = [
        SettingPair::AB,
        SettingPair::APrimeB,
        SettingPair::ABPrime,
        SettingPair::APrimeBPrime,
    ];

    /// Positions in the outcome tuple of the selected Alice and Bob outcomes.
    fn slots(self) -> (usize, usize) {
        match self {
            SettingPair::AB => (0, 2),
            SettingPair::APrimeB => (1, 2),
            SettingPair::ABPrime => (0, 3),
            SettingPair::APrimeBPrime => (1, 3),
        }
    }
}

/// Weights over `(i, j)`, stored `[++, +-, -+, --]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairMeasure {
    weights: [f64; 4],
}

impl PairMeasure {
    pub fn new(weights: [f64; 4]) -> Self {
        Self { weights }
    }

    pub fn weight(&self, i: i8, j: i8) -> f64 {
        self.weights[bit(i) << 1 | bit(j)]
    }

    pub fn weights(&self) -> &[f64; 4] {
        &self.weights
    }

    pub fn total(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// `M(ij) = sum over the two unselected outcomes of M(i i' j j')`.
pub fn marginalize(m: &JointMeasure4, pair: SettingPair) -> PairMeasure {
    let (sa, sb) = pair.slots();
    let mut weights = [0.0; 4];
    for o in all_outcomes() {
        weights[bit(o[sa]) << 1 | bit(o[sb])] += m.weight(o);
    }
    PairMeasure::new(weights)
}

/// `X = sum_ij i j M(ij)`.
pub fn correlator(m: &PairMeasure) -> f64 {
    let mut x = 0.0;
    for i in [1i8, -1] {
        for j in [1i8, -1] {
            x += f64::from(i * j) * m.weight(i, j);
        }
    }
    x
}

/// `X(a,b) + X(a',b) + X(a,b') - X(a',b')`.
pub fn chsh_value(x_ab: f64, x_apb: f64, x_abp: f64, x_apbp: f64) -> f64 {
    x_ab + x_apb + x_abp - x_apbp
}

/// CHSH value of the four marginals of one joint measure.
pub fn chsh_of_joint(m: &JointMeasure4) -> f64 {
    let x = SettingPair::ALL.map(|p| correlator(&marginalize(m, p)));
    chsh_value(x[0], x[1], x[2], x[3])
}

#[derive(Debug, Clone, PartialEq)]
pub struct LhvReport {
    pub max: f64,
    pub min: f64,
    pub maximizers: Vec<Outcomes>,
    /// `ij + i'j + ij' - i'j' = (i + i')j + (i - i')j'` on every tuple.
    pub identity_holds: bool,
}

/// Enumerates the 16 deterministic strategies.
pub fn lhv_maximum() -> LhvReport {
    let mut max = f64::NEG_INFINITY;
    let mut min = f64::INFINITY;
    let mut identity_holds = true;
    let values: Vec<(Outcomes, i32)> = all_outcomes()
        .into_iter()
        .map(|o| {
            let [i, ip, j, jp] = o.map(i32::from);
            let lhs = i * j + ip * j + i * jp - ip * jp;
            identity_holds &= lhs == (i + ip) * j + (i - ip) * jp;
            (o, lhs)
        })
        .collect();
    for &(_, v) in &values {
        max = max.max(f64::from(v));
        min = min.min(f64::from(v));
    }
    let maximizers = values
        .iter()
        .filter(|(_, v)| f64::from(*v) == max)
        .map(|(o, _)| *o)
        .collect();
    LhvReport {
        max,
        min,
        maximizers,
        identity_holds,
    }
}

/// A qubit observable with eigenvalues `+-1`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementSetting {
    observable: CMatrix,
}

impl MeasurementSetting {
    pub fn new(observable: CMatrix, atol: f64) -> Result<Self, BellError> {
        if observable.shape() != (2, 2) {
            return Err(BellError::DimMismatch {
                expected: 2,
                found: observable.nrows(),
            });
        }
        if linalg::hermitian_deviation(&observable) > atol {
            return Err(BellError::NotPM1Observable("not Hermitian".into()));
        }
        let ev = linalg::hermitian_eigenvalues(&observable);
        if (ev[0] + 1.0).abs() > atol || (ev[1] - 1.0).abs() > atol {
            return Err(BellError::NotPM1Observable(format!("eigenvalues {ev:?}")));
        }
        Ok(Self { observable })
    }

    /// `cos(theta) Z + sin(theta) X`.
    pub fn planar(theta: f64) -> Self {
        let (s, co) = theta.sin_cos();
        Self {
            observable: CMatrix::from_row_slice(2, 2, &[c(co, 0.0), c(s, 0.0), c(s, 0.0), c(-co, 0.0)]),
        }
    }

    pub fn observable(&self) -> &CMatrix {
        &self.observable
    }
}

fn check_pure(psi: &CVector, atol: f64) -> Result<(), BellError> {
    if psi.len() != 4 {
        return Err(BellError::DimMismatch {
            expected: 4,
            found: psi.len(),
        });
    }
    let norm = psi.norm();
    if (norm - 1.0).abs() > atol {
        return Err(BellError::NotNormalized(norm));
    }
    Ok(())
}

/// `<psi| A (x) B |psi>`.
pub fn quantum_correlator(
    psi: &CVector,
    a: &MeasurementSetting,
    b: &MeasurementSetting,
    atol: f64,
) -> Result<f64, BellError> {
    check_pure(psi, atol)?;
    let ab = linalg::kron(&a.observable, &b.observable);
    Ok((psi.adjoint() * ab * psi)[(0, 0)].re)
}

/// `tr(rho A (x) B)` for a two-qubit density matrix.
pub fn density_correlator(rho: &CMatrix, a: &MeasurementSetting, b: &MeasurementSetting) -> f64 {
    linalg::trace_product(rho, &linalg::kron(&a.observable, &b.observable)).re
}

#[derive(Debug, Clone, PartialEq)]
pub struct TsirelsonReport {
    pub max_chsh: f64,
    /// Angles `(a, a', b, b')` of the maximizing planar observables.
    pub best_settings: [f64; 4],
    pub resolution: usize,
}

pub fn tsirelson_scan(psi: &CVector, resolution: usize, atol: f64) -> Result<TsirelsonReport, BellError> {
    check_pure(psi, atol)?;
    tsirelson_scan_density(&linalg::outer(psi), resolution)
}

/// Scans `resolution` equally spaced angles in `[0, 2 pi)` for each of the
/// four settings.
pub fn tsirelson_scan_density(rho: &CMatrix, resolution: usize) -> Result<TsirelsonReport, BellError> {
    if resolution < MIN_RESOLUTION {
        return Err(BellError::GridTooCoarse(resolution));
    }
    if rho.shape() != (4, 4) {
        return Err(BellError::DimMismatch {
            expected: 4,
            found: rho.nrows(),
        });
    }
    let n = resolution;
    let angle = |k: usize| 2.0 * PI * k as f64 / n as f64;
    let settings: Vec<MeasurementSetting> = (0..n).map(|k| MeasurementSetting::planar(angle(k))).collect();
    let table: Vec<Vec<f64>> = settings
        .iter()
        .map(|a| settings.iter().map(|b| density_correlator(rho, a, b)).collect())
        .collect();

    // For fixed (a, a') the value splits into a b-term and a b'-term.
    let mut best = (f64::NEG_INFINITY, [0usize; 4]);
    for a in 0..n {
        for ap in 0..n {
            let (mut sb, mut kb) = (f64::NEG_INFINITY, 0);
            let (mut sbp, mut kbp) = (f64::NEG_INFINITY, 0);
            for (b, (x, y)) in table[a].iter().zip(&table[ap]).enumerate() {
                let plus = x + y;
                let minus = x - y;
                if plus > sb {
                    (sb, kb) = (plus, b);
                }
                if minus > sbp {
                    (sbp, kbp) = (minus, b);
                }
            }
            if sb + sbp > best.0 {
                best = (sb + sbp, [a, ap, kb, kbp]);
            }
        }
    }
    Ok(TsirelsonReport {
        max_chsh: best.0,
        best_settings: best.1.map(angle),
        resolution,
    })
}

/// `(|01> - |10>) / sqrt 2`.
pub fn singlet() -> CVector {
    let s = 1.0 / 2f64.sqrt();
    CVector::from_vec(vec![ZERO, c(s, 0.0), c(-s, 0.0), ZERO])
}

/// `|00>`.
pub fn product_zero() -> CVector {
    linalg::basis_vector(4, 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const ATOL: f64 = 1e-9;

    fn z() -> MeasurementSetting {
        MeasurementSetting::planar(0.0)
    }

    fn x() -> MeasurementSetting {
        MeasurementSetting::planar(PI / 2.0)
    }

    #[test]
    fn uniform_marginals_are_quarter() {
        for p in SettingPair::ALL {
            assert_eq!(marginalize(&JointMeasure4::uniform(), p).weights(), &[0.25; 4]);
        }
    }

    #[test]
    fn point_mass_marginal() {
        let m = marginalize(&JointMeasure4::point_mass([1, 1, 1, 1]), SettingPair::AB);
        assert_eq!(m.weights(), &[1.0, 0.0, 0.0, 0.0]);
        assert_eq!(correlator(&m), 1.0);
    }

    #[test]
    fn product_measure_marginals_factor() {
        // brute force: M(ii'jj') = p(i) p'(i') q(j) q'(j')
        let ps = [[0.3, 0.7], [0.6, 0.4], [0.9, 0.1], [0.2, 0.8]];
        let mut w = [0.0; 16];
        for o in all_outcomes() {
            w[joint_index(o)] = (0..4).map(|k| ps[k][bit(o[k])]).product();
        }
        let m = JointMeasure4::lhv(w, ATOL).unwrap();
        for p in SettingPair::ALL {
            let (sa, sb) = p.slots();
            let pm = marginalize(&m, p);
            for i in [1i8, -1] {
                for j in [1i8, -1] {
                    let expected = ps[sa][bit(i)] * ps[sb][bit(j)];
                    assert!((pm.weight(i, j) - expected).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn correlator_examples() {
        assert_eq!(correlator(&PairMeasure::new([0.25; 4])), 0.0);
        assert_eq!(correlator(&PairMeasure::new([0.5, 0.0, 0.0, 0.5])), 1.0);
        assert_eq!(chsh_value(0.0, 0.0, 0.0, 0.0), 0.0);
        assert_eq!(chsh_of_joint(&JointMeasure4::point_mass([1, 1, 1, 1])), 2.0);
    }

    #[test]
    fn lhv_enumeration() {
        let r = lhv_maximum();
        assert_eq!(r.max, 2.0);
        assert_eq!(r.min, -2.0);
        assert!(r.identity_holds);
        assert!(r.maximizers.contains(&[1, 1, 1, 1]));
        for o in &r.maximizers {
            assert_eq!(chsh_of_joint(&JointMeasure4::point_mass(*o)), 2.0);
        }
    }

    #[test]
    fn random_joint_measures_obey_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let mut w = [0.0; 16];
            for v in &mut w {
                *v = rng.random::<f64>();
            }
            let t: f64 = w.iter().sum();
            w.iter_mut().for_each(|v| *v /= t);
            let m = JointMeasure4::lhv(w, ATOL).unwrap();
            assert!(chsh_of_joint(&m).abs() <= 2.0 + 1e-12);
        }
    }

    #[test]
    fn lhv_validation() {
        let mut w = [0.0; 16];
        w[0] = 1.5;
        w[1] = -0.5;
        assert!(JointMeasure4::lhv(w, ATOL).is_err());
        assert!(JointMeasure4::lhv([0.1; 16], ATOL).is_err());
    }

    #[test]
    fn quantum_correlator_examples() {
        let s = singlet();
        assert!((quantum_correlator(&s, &z(), &z(), ATOL).unwrap() + 1.0).abs() < 1e-12);
        assert!(quantum_correlator(&s, &z(), &x(), ATOL).unwrap().abs() < 1e-12);
        let p = product_zero();
        assert!((quantum_correlator(&p, &z(), &z(), ATOL).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn quantum_correlator_errors() {
        let bad = CVector::from_element(4, c(1.0, 0.0));
        assert!(matches!(
            quantum_correlator(&bad, &z(), &z(), ATOL),
            Err(BellError::NotNormalized(_))
        ));
        let half = linalg::identity(2) * c(0.5, 0.0);
        assert!(matches!(
            MeasurementSetting::new(half, ATOL),
            Err(BellError::NotPM1Observable(_))
        ));
        assert!(MeasurementSetting::new(x().observable().clone(), ATOL).is_ok());
    }

    #[test]
    fn singlet_scan_reaches_tsirelson() {
        let r = tsirelson_scan(&singlet(), 64, ATOL).unwrap();
        assert!(r.max_chsh >= 2.82 && r.max_chsh <= 2.0 * 2f64.sqrt() + 1e-6);
        // oracle: correlators recomputed at the reported angles
        let [a, ap, b, bp] = r.best_settings.map(MeasurementSetting::planar);
        let e = |p: &MeasurementSetting, q: &MeasurementSetting| {
            quantum_correlator(&singlet(), p, q, ATOL).unwrap()
        };
        let v = chsh_value(e(&a, &b), e(&ap, &b), e(&a, &bp), e(&ap, &bp));
        assert!((v - r.max_chsh).abs() < 1e-12);
    }

    #[test]
    fn product_and_mixed_states_do_not_violate() {
        assert!(tsirelson_scan(&product_zero(), 16, ATOL).unwrap().max_chsh <= 2.0 + ATOL);
        let mixed = linalg::identity(4) * c(0.25, 0.0);
        assert!(tsirelson_scan_density(&mixed, 16).unwrap().max_chsh.abs() < 1e-12);
        assert_eq!(
            tsirelson_scan(&singlet(), 4, ATOL),
            Err(BellError::GridTooCoarse(4))
        );
    }
}
