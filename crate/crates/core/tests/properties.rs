mod common;

use proptest::prelude::*;
use qdiag::bell::{self, JointMeasure4, MeasurementSetting, SettingPair};
use qdiag::cpm::{self, Channel, ClassicalDistribution, DensityMatrix};
use qdiag::diagram::{dagger, normalize, normalize_with_stats, validate, Diagram};
use qdiag::dsl::{self, Expr};
use qdiag::entropy::{self, BlockEntry, BlockSpec};
use qdiag::linalg::{self, c, CMatrix};
use qdiag::smatrix::{self, SMatrix};
use qdiag::tensor::{evaluate, evaluate_matrix};
use qdiag::{tensors_close, ObjectWord};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const ATOL: f64 = 1e-9;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn close(a: &CMatrix, b: &CMatrix) -> bool {
    a.shape() == b.shape() && linalg::max_abs_diff(a, b) <= ATOL
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn normalize_preserves_type_and_value(seed in any::<u64>()) {
        let d = common::random_diagram(&mut rng(seed), 6, 4);
        let (nf, stats) = normalize_with_stats(&d).unwrap();
        prop_assert_eq!(validate(&nf).unwrap(), validate(&d).unwrap());
        prop_assert!(close(&evaluate_matrix(&nf).unwrap(), &evaluate_matrix(&d).unwrap()));
        prop_assert!(stats.steps() <= d.size() * d.size());
    }

    #[test]
    fn normalize_is_idempotent(seed in any::<u64>()) {
        let d = common::random_diagram(&mut rng(seed), 6, 3);
        let nf = normalize(&d).unwrap();
        prop_assert_eq!(normalize(&nf).unwrap(), nf);
    }

    #[test]
    fn dagger_is_an_involution(seed in any::<u64>()) {
        let d = common::random_diagram(&mut rng(seed), 4, 3);
        let twice = dagger(&dagger(&d).unwrap()).unwrap();
        prop_assert_eq!(validate(&twice).unwrap(), validate(&d).unwrap());
        prop_assert!(close(&evaluate_matrix(&twice).unwrap(), &evaluate_matrix(&d).unwrap()));
    }

    #[test]
    fn dagger_evaluates_to_adjoint(seed in any::<u64>()) {
        let d = common::random_diagram(&mut rng(seed), 4, 3);
        let m = evaluate_matrix(&d).unwrap();
        prop_assert!(close(&evaluate_matrix(&dagger(&d).unwrap()).unwrap(), &m.adjoint()));
        prop_assert!(close(&evaluate_matrix(&Diagram::dagger_node(d)).unwrap(), &m.adjoint()));
    }

    #[test]
    fn evaluation_is_functorial(seed in any::<u64>()) {
        let mut r = rng(seed);
        let dom = common::random_word(&mut r, 2, 2);
        let (f, mid) = common::random_diagram_from(&mut r, &dom, 3, 2);
        let (g, cod) = common::random_diagram_from(&mut r, &mid, 3, 2);
        let (h, _) = common::random_diagram_from(&mut r, &cod, 3, 2);
        let (ef, eg, eh) = (evaluate_matrix(&f).unwrap(), evaluate_matrix(&g).unwrap(), evaluate_matrix(&h).unwrap());
        let fg = Diagram::seq(f.clone(), g.clone());
        prop_assert!(close(&evaluate_matrix(&fg).unwrap(), &(&eg * &ef)));
        let left = Diagram::seq(fg, h.clone());
        let right = Diagram::seq(f.clone(), Diagram::seq(g.clone(), h.clone()));
        prop_assert!(close(&evaluate_matrix(&left).unwrap(), &evaluate_matrix(&right).unwrap()));
        let par = Diagram::par(f.clone(), Diagram::par(g.clone(), h.clone()));
        let par2 = Diagram::par(Diagram::par(f, g), h);
        prop_assert!(close(&evaluate_matrix(&par).unwrap(), &linalg::kron(&ef, &linalg::kron(&eg, &eh))));
        prop_assert!(close(&evaluate_matrix(&par).unwrap(), &evaluate_matrix(&par2).unwrap()));
    }

    #[test]
    fn identities_are_units(seed in any::<u64>()) {
        let d = common::random_diagram(&mut rng(seed), 4, 3);
        let (dom, cod) = validate(&d).unwrap();
        let e = evaluate(&d).unwrap();
        let wrapped = Diagram::seq(Diagram::Id(dom), Diagram::seq(d, Diagram::Id(cod)));
        prop_assert!(tensors_close(&evaluate(&wrapped).unwrap(), &e, ATOL));
        let unit = Diagram::par(Diagram::Id(ObjectWord::unit()), wrapped);
        prop_assert!(tensors_close(&evaluate(&unit).unwrap(), &e, ATOL));
    }

    #[test]
    fn doubled_pure_diagram_is_conjugation(seed in any::<u64>()) {
        let d = common::random_diagram(&mut rng(seed), 3, 3);
        let m = evaluate_matrix(&d).unwrap();
        let classical = format!("{d:?}");
        prop_assume!(!classical.contains("Copy(") && !classical.contains("Delete("));
        prop_assume!(!d.contains_discard() && m.nrows() * m.ncols() <= 64);
        let ch = cpm::double(&d).unwrap();
        let audit = cpm::channel_audit(&ch, 1e-8);
        prop_assert!(audit.is_cp);
        let mut r = rng(seed ^ 1);
        let rho = linalg::random_density(m.ncols(), &mut r);
        let direct = &m * &rho * m.adjoint();
        prop_assert!(close(&ch.apply_operator(&rho), &direct));
    }

    #[test]
    fn random_kraus_channels_are_cp_and_causal(seed in any::<u64>(), dim in 1usize..5, n in 1usize..4) {
        let mut r = rng(seed);
        // normalize sum K^dagger K to the identity via its inverse square root
        let raw: Vec<CMatrix> = (0..n).map(|_| common::random_matrix(&mut r, dim, dim)).collect();
        let gram = raw.iter().fold(CMatrix::zeros(dim, dim), |acc, k| acc + k.adjoint() * k);
        let inv_sqrt = linalg::hermitian_eigen(&gram)
            .into_iter()
            .fold(CMatrix::zeros(dim, dim), |acc, (l, v)| acc + &v * v.adjoint() * c(1.0 / l.sqrt(), 0.0));
        let kraus: Vec<CMatrix> = raw.iter().map(|k| k * &inv_sqrt).collect();
        let ch = Channel::new(kraus).unwrap();
        let audit = cpm::channel_audit(&ch, 1e-8);
        prop_assert!(audit.is_cp && audit.is_tp);
        prop_assert!(cpm::causality_check(&ch, 1e-8));
        let rho = DensityMatrix::new(linalg::random_density(dim, &mut r), ATOL).unwrap();
        let out = cpm::apply(&ch, &rho).unwrap();
        prop_assert!((linalg::trace(out.matrix()).re - 1.0).abs() < 1e-9);
        prop_assert!(DensityMatrix::new(out.into_matrix(), 1e-8).is_ok());
    }

    #[test]
    fn transition_probability_is_a_symmetric_probability(seed in any::<u64>(), dim in 1usize..6) {
        let mut r = rng(seed);
        let a = DensityMatrix::new(linalg::random_density(dim, &mut r), ATOL).unwrap();
        let b = DensityMatrix::new(linalg::random_density(dim, &mut r), ATOL).unwrap();
        let ab = cpm::transition_probability(&a, &b, None, ATOL).unwrap();
        let ba = cpm::transition_probability(&b, &a, None, ATOL).unwrap();
        prop_assert!((-ATOL..=1.0 + ATOL).contains(&ab));
        prop_assert!((ab - ba).abs() <= ATOL);
        let u = linalg::random_unitary(dim, &mut r);
        let with_s = cpm::transition_probability(&a, &b, Some(&u), ATOL).unwrap();
        prop_assert!((-ATOL..=1.0 + ATOL).contains(&with_s));
    }

    #[test]
    fn measure_after_prepare_is_identity(probs in prop::collection::vec(0.01f64..1.0, 1..6)) {
        let t: f64 = probs.iter().sum();
        let p = ClassicalDistribution::new(probs.iter().map(|x| x / t).collect(), ATOL).unwrap();
        let back = cpm::measure(&cpm::prepare(&p));
        for (x, y) in back.probs().iter().zip(p.probs()) {
            prop_assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn cluster_round_trip(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = r.random_range(1..=3);
        let dims: Vec<usize> = (0..n).map(|_| r.random_range(1..=3)).collect();
        let total: usize = dims.iter().product();
        let s = SMatrix::from_dims(&dims, linalg::random_unitary(total, &mut r)).unwrap();
        let back = smatrix::recombine(&smatrix::connected_parts(&s).unwrap()).unwrap();
        prop_assert!(linalg::max_abs_diff(back.matrix(), s.matrix()) <= ATOL);
        prop_assert!(smatrix::unitarity_check(&back) <= ATOL);
    }

    #[test]
    fn connected_parts_vanish_across_a_tensor_cut(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (da, db, dc) = (r.random_range(2..=3), r.random_range(2..=3), r.random_range(2..=3));
        let left = linalg::random_unitary(da * db, &mut r);
        let right = linalg::random_unitary(dc, &mut r);
        let s = SMatrix::from_dims(&[da, db, dc], linalg::kron(&left, &right)).unwrap();
        for (block, m) in smatrix::connected_blocks(&s).unwrap() {
            if block.contains(&2) && block.len() > 1 {
                prop_assert!(linalg::max_abs(&m) <= ATOL, "block {:?} = {}", block, linalg::max_abs(&m));
            }
        }
        for term in smatrix::connected_parts(&s).unwrap() {
            prop_assert!(term.partition().iter().all(|b| !(b.contains(&2) && b.len() > 1)));
        }
    }

    #[test]
    fn discontinuity_of_identity(seed in any::<u64>()) {
        let mut r = rng(seed);
        let s = SMatrix::from_dims(&[2, 3], linalg::random_unitary(6, &mut r)).unwrap();
        let id = SMatrix::from_dims(&[2, 3], linalg::identity(6)).unwrap();
        let t = smatrix::discontinuity(&id, &s, &s, ATOL).unwrap();
        prop_assert!(close(&t.to_matrix(), &linalg::identity(6)));
    }

    #[test]
    fn local_operators_never_entangle(seed in any::<u64>()) {
        let mut r = rng(seed);
        let dims = [r.random_range(2..=3), r.random_range(2..=3)];
        let u = linalg::kron(&linalg::random_unitary(dims[0], &mut r), &linalg::random_unitary(dims[1], &mut r));
        let swapped = linalg::wire_permutation(&[dims[0], dims[0]], &[1, 0]);
        for m in [u, swapped] {
            let d = if m.nrows() == dims[0] * dims[0] { [dims[0], dims[0]] } else { dims };
            let s = SMatrix::from_dims(&d, m).unwrap();
            let w = smatrix::quantumness_witness(&s, 8, seed, ATOL).unwrap();
            prop_assert!(!w.entangling && w.structurally_local);
        }
    }

    #[test]
    fn joint_measures_obey_chsh_bound(w in prop::array::uniform16(0.0f64..1.0)) {
        let t: f64 = w.iter().sum();
        prop_assume!(t > 1e-6);
        let m = JointMeasure4::lhv(w.map(|x| x / t), ATOL).unwrap();
        prop_assert!(bell::chsh_of_joint(&m).abs() <= 2.0 + 1e-12);
        for p in SettingPair::ALL {
            let pm = bell::marginalize(&m, p);
            prop_assert!((pm.total() - m.total()).abs() < 1e-12);
            prop_assert!(bell::correlator(&pm).abs() <= pm.total() + 1e-12);
        }
    }

    #[test]
    fn marginalization_is_linear(a in prop::array::uniform16(-1.0f64..1.0), b in prop::array::uniform16(-1.0f64..1.0), s in -2.0f64..2.0) {
        let mut mix = [0.0; 16];
        for k in 0..16 {
            mix[k] = a[k] + s * b[k];
        }
        for p in SettingPair::ALL {
            let lhs = bell::marginalize(&JointMeasure4::new(mix), p);
            let ma = bell::marginalize(&JointMeasure4::new(a), p);
            let mb = bell::marginalize(&JointMeasure4::new(b), p);
            for k in 0..4 {
                prop_assert!((lhs.weights()[k] - (ma.weights()[k] + s * mb.weights()[k])).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn quantum_correlators_are_bounded(seed in any::<u64>(), ta in 0.0f64..7.0, tb in 0.0f64..7.0) {
        let psi = linalg::random_state_vector(4, &mut rng(seed));
        let x = bell::quantum_correlator(&psi, &MeasurementSetting::planar(ta), &MeasurementSetting::planar(tb), ATOL).unwrap();
        prop_assert!(x.abs() <= 1.0 + ATOL);
    }

    #[test]
    fn tsirelson_ceiling(seed in any::<u64>(), grid in 8usize..20) {
        let mut r = rng(seed);
        let rho = linalg::random_density(4, &mut r);
        let rep = bell::tsirelson_scan_density(&rho, grid).unwrap();
        prop_assert!(rep.max_chsh <= 2.0 * 2f64.sqrt() + 1e-6);
        let psi = linalg::random_state_vector(4, &mut r);
        let rep = bell::tsirelson_scan(&psi, grid, ATOL).unwrap();
        prop_assert!(rep.max_chsh <= 2.0 * 2f64.sqrt() + 1e-6);
    }

    #[test]
    fn shannon_and_mutual_information_bounds(rows in 1usize..4, cols in 1usize..4, seed in any::<u64>()) {
        let mut r = rng(seed);
        let raw: Vec<Vec<f64>> = (0..rows).map(|_| (0..cols).map(|_| r.random::<f64>() + 1e-3).collect()).collect();
        let t: f64 = raw.iter().flatten().sum();
        let joint: Vec<Vec<f64>> = raw.iter().map(|row| row.iter().map(|x| x / t).collect()).collect();
        let px = ClassicalDistribution::new(joint.iter().map(|row| row.iter().sum()).collect(), ATOL).unwrap();
        let py = ClassicalDistribution::new((0..cols).map(|j| joint.iter().map(|row| row[j]).sum()).collect(), ATOL).unwrap();
        let (hx, hy) = (entropy::shannon_entropy(&px), entropy::shannon_entropy(&py));
        prop_assert!(hx >= 0.0 && hx <= (rows as f64).log2() + ATOL);
        let i = entropy::mutual_information(&joint, ATOL).unwrap();
        prop_assert!(i >= -ATOL && i <= hx.min(hy) + ATOL);
    }

    #[test]
    fn unitary_conjugation_preserves_entropy(seed in any::<u64>(), dim in 1usize..9) {
        let mut r = rng(seed);
        let ch = Channel::conjugation(linalg::random_unitary(dim, &mut r));
        let rho = DensityMatrix::new(linalg::random_density(dim, &mut r), ATOL).unwrap();
        prop_assert!(entropy::entropy_delta(&ch, &rho) <= ATOL);
        let s = entropy::von_neumann_entropy(&rho);
        prop_assert!(s >= 0.0 && s <= (dim as f64).log2() + ATOL);
    }

    #[test]
    fn block_forms_preserve_entropy(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = r.random_range(1..=3);
        let mut blocks = Vec::new();
        for _ in 0..n {
            let dl = r.random_range(1..=3);
            let dr = r.random_range(1..=3);
            blocks.push(BlockEntry {
                weight: r.random::<f64>() + 0.01,
                rho_left: DensityMatrix::new(linalg::random_density(dl, &mut r), ATOL).unwrap(),
                unitary: linalg::random_unitary(dl, &mut r),
                channel_right: cpm::depolarizing(dr, r.random()),
            });
        }
        let t: f64 = blocks.iter().map(|b| b.weight).sum();
        blocks.iter_mut().for_each(|b| b.weight /= t);
        let (rho, phi) = entropy::build_blockform(&BlockSpec { blocks }, ATOL).unwrap();
        prop_assert!(entropy::entropy_delta(&phi, &rho) <= ATOL);
    }
}

const HEADER: &str = "wire a = quantum 2\nwire b = classical 3\ngen f : a -> a * b\ngen g : I -> a\n";

fn arb_wire() -> impl Strategy<Value = String> {
    prop_oneof![Just("a".to_string()), Just("b".to_string())]
}

fn arb_expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        prop_oneof![Just("f"), Just("g")].prop_map(|n| Expr::Name(n.to_string())),
        prop::collection::vec(arb_wire(), 0..3).prop_map(Expr::Id),
        (arb_wire(), arb_wire()).prop_map(|(x, y)| Expr::Swap(x, y)),
        arb_wire().prop_map(Expr::Cup),
        arb_wire().prop_map(Expr::Cap),
        arb_wire().prop_map(Expr::Copy),
        arb_wire().prop_map(Expr::Delete),
        arb_wire().prop_map(Expr::Discard),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(x, y)| Expr::Seq(Box::new(x), Box::new(y))),
            (inner.clone(), inner.clone()).prop_map(|(x, y)| Expr::Par(Box::new(x), Box::new(y))),
            inner.prop_map(|x| Expr::Dagger(Box::new(x))),
        ]
    })
}

proptest! {
    #[test]
    fn printed_programs_reparse_identically(exprs in prop::collection::vec(arb_expr(), 1..4), lambda in 0.0f64..1.0) {
        let mut src = HEADER.to_string();
        for (k, e) in exprs.iter().enumerate() {
            src.push_str(&format!("diagram d{k} = {e}\n"));
        }
        src.push_str(&format!("channel n = depolarizing(a, {lambda})\nchannel m = double(d0)\n"));
        let p = dsl::parse(&src).unwrap();
        for (k, e) in exprs.iter().enumerate() {
            match p.get(&format!("d{k}")) {
                Some(dsl::Decl::Diagram { expr, .. }) => prop_assert_eq!(expr, e),
                other => prop_assert!(false, "missing d{}: {:?}", k, other),
            }
        }
        let again = dsl::parse(&p.to_string()).unwrap();
        prop_assert_eq!(&again, &p);
        prop_assert_eq!(again.to_string(), p.to_string());
    }
}
