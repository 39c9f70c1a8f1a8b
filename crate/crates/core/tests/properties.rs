use nalgebra::DMatrix;
use num_complex::Complex;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pvqa_core::ansatz::{amplitude_encode, build_ansatz, AnsatzFamily, AnsatzSpec};
use pvqa_core::circuit::{expand_mcx, mcx_vchain, GateInstance, LogicalCircuit};
use pvqa_core::cost::CostModel;
use pvqa_core::matrix::CMatrix;
use pvqa_core::noise::{fidelity_product_logical, NoiseModel};
use pvqa_core::oracle::{cost_lower_bound, solve_classical};
use pvqa_core::pauli::decompose_matrix;
use pvqa_core::poisson::{
    laplacian_matrix_for, laplacian_pauli_for, project_mean_zero, shift_circuit, shift_pauli,
    AncillaMode, BoundaryCondition, PoissonProblem,
};
use pvqa_core::sim::{
    run_density_with_noise, run_statevector, state_fidelity, unitary_matrix, Statevector,
};
use pvqa_core::transpile::{decompose_to_basis, route, transpile, CouplingMap};

fn random_circuit(n: usize, len: usize, seed: u64, basis_only: bool) -> LogicalCircuit {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c = LogicalCircuit::new(n).unwrap();
    for _ in 0..len {
        let q = rng.gen_range(0..n);
        let angle = rng.gen_range(-3.2..3.2);
        let pick = if n == 1 {
            rng.gen_range(0..5)
        } else {
            rng.gen_range(0..if basis_only { 6 } else { 11 })
        };
        let mut other = || loop {
            let p = rng.gen_range(0..n);
            if p != q {
                break p;
            }
        };
        let g = match pick {
            0 => GateInstance::rx(q, angle),
            1 => GateInstance::ry(q, angle),
            2 => GateInstance::rz(q, angle),
            3 => GateInstance::sx(q),
            4 => GateInstance::x(q),
            5 => GateInstance::cx(q, other()),
            6 => GateInstance::h(q),
            7 => GateInstance::cz(q, other()),
            8 => GateInstance::swap(q, other()),
            9 => GateInstance::y(q),
            _ if n >= 3 => {
                let a = other();
                let b = (0..n).find(|&b| b != a && b != q).unwrap();
                GateInstance::ccx(a, b, q)
            }
            _ => GateInstance::z(q),
        };
        c.push(g).unwrap();
    }
    c
}

fn random_matrix(n: usize, rng: &mut ChaCha8Rng) -> CMatrix<f64> {
    CMatrix::from_fn(1 << n, |_, _| {
        Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    })
}

/// Permutation of basis labels placing logical bit `l` at `layout[l]`.
fn relabel(index: usize, layout: &[usize]) -> usize {
    layout
        .iter()
        .enumerate()
        .fold(0, |acc, (l, &p)| acc | ((index >> l) & 1) << p)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn simulated_circuits_are_unitary(n in 1usize..=4, len in 0usize..30, seed: u64) {
        let u: CMatrix<f64> = unitary_matrix(&random_circuit(n, len, seed, false)).unwrap();
        prop_assert!(u.is_unitary(1e-10));
    }

    #[test]
    fn pauli_round_trip(n in 1usize..=3, seed: u64) {
        let m = random_matrix(n, &mut ChaCha8Rng::seed_from_u64(seed));
        let back = decompose_matrix(&m, 0.0).unwrap().to_matrix().unwrap();
        prop_assert!(back.max_abs_diff(&m) < 1e-10);
    }

    #[test]
    fn depth_is_subadditive(n in 1usize..=4, a in 0usize..20, b in 0usize..20, seed: u64) {
        let c1 = random_circuit(n, a, seed, false);
        let c2 = random_circuit(n, b, seed.wrapping_add(1), false);
        let joined = c1.compose(&c2).unwrap();
        prop_assert!(joined.depth() <= c1.depth() + c2.depth());
        prop_assert!(joined.depth() >= c1.depth().max(c2.depth()));
    }

    #[test]
    fn basis_decomposition_preserves_unitary(n in 1usize..=4, len in 0usize..25, seed: u64) {
        let c = random_circuit(n, len, seed, false);
        let d = decompose_to_basis(&c).unwrap();
        let (u, v): (CMatrix<f64>, CMatrix<f64>) = (unitary_matrix(&c).unwrap(), unitary_matrix(&d).unwrap());
        prop_assert!(u.max_abs_diff_up_to_phase(&v) < 1e-9);
    }

    #[test]
    fn routing_preserves_unitary_up_to_permutation(n in 2usize..=5, len in 0usize..25, seed: u64) {
        let c = random_circuit(n, len, seed, true);
        let coupling = CouplingMap::linear(n).unwrap();
        let phys = route(&c, &coupling, None).unwrap();
        for g in phys.gates() {
            if g.qubits.len() == 2 {
                prop_assert!(coupling.are_adjacent(g.qubits[0], g.qubits[1]));
            }
        }
        let one_q = |c: &LogicalCircuit| c.gates().iter().filter(|g| g.qubits.len() == 1).count();
        prop_assert_eq!(one_q(phys.circuit()), one_q(&c));
        prop_assert_eq!(phys.cx_count(), c.multi_qubit_count() + 3 * phys.swap_count());

        let u: CMatrix<f64> = unitary_matrix(&c).unwrap();
        let v: CMatrix<f64> = unitary_matrix(phys.circuit()).unwrap();
        let fin = phys.final_layout();
        let permuted = CMatrix::from_fn(1 << n, |r, col| u[(r, col)]);
        let expected = CMatrix::from_fn(1 << n, |r, col| {
            // v should equal P_final * u; find the logical row feeding physical row r.
            let logical_row = (0..1 << n).find(|&j| relabel(j, fin) == r).unwrap();
            permuted[(logical_row, col)]
        });
        prop_assert!(expected.max_abs_diff_up_to_phase(&v) < 1e-9);
    }

    #[test]
    fn amplitude_encoding_fidelity(n in 1usize..=5, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f: Vec<f64> = (0..1 << n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let s: Statevector<f64> = run_statevector(&amplitude_encode(&f, n).unwrap(), None).unwrap();
        let target = Statevector::from_real(&f).unwrap();
        let fid = target.inner(&s).unwrap().norm_sqr();
        prop_assert!((fid - 1.0).abs() < 1e-10);
    }

    #[test]
    fn ttnpp_equals_ttn_on_powers_of_two(k in 0u32..=3, layers in 1usize..=3) {
        let n = 1usize << k;
        let ttn = build_ansatz(&AnsatzSpec::new(AnsatzFamily::Ttn, n, layers).unwrap()).unwrap();
        let pp = build_ansatz(&AnsatzSpec::new(AnsatzFamily::TtnPlusPlus, n, layers).unwrap()).unwrap();
        prop_assert_eq!(ttn, pp);
    }

    #[test]
    fn parameter_counts(n in 1usize..=8, layers in 1usize..=4) {
        for family in AnsatzFamily::ALL {
            let Ok(spec) = AnsatzSpec::new(family, n, layers) else {
                prop_assert!(family == AnsatzFamily::Ttn && !n.is_power_of_two());
                continue;
            };
            let c = build_ansatz(&spec).unwrap();
            let expected = match family {
                AnsatzFamily::Hea => n * layers,
                _ if n == 1 => layers,
                _ => 2 * (n - 1) * layers,
            };
            prop_assert_eq!(c.num_parameters(), expected);
            prop_assert_eq!(spec.num_parameters(), expected);
        }
    }

    #[test]
    fn fidelity_product_strictly_decreases(n in 1usize..=4, len in 0usize..20, seed: u64, eps in 1e-4f64..0.1) {
        let noise = NoiseModel::new(eps, eps, eps).unwrap();
        let mut c = random_circuit(n, len, seed, false);
        let before = fidelity_product_logical(&c, &noise);
        c.push(GateInstance::x(0)).unwrap();
        prop_assert!(fidelity_product_logical(&c, &noise) < before);
    }

    #[test]
    fn cost_respects_lower_bound(n in 1usize..=3, seed: u64, bc_pick in 0usize..3) {
        let bc = [BoundaryCondition::Dirichlet, BoundaryCondition::Periodic, BoundaryCondition::Neumann][bc_pick];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut f: Vec<f64> = (0..1 << n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        if bc.is_singular() {
            if n == 1 { f = vec![1.0, -1.0]; } else { f = project_mean_zero(&f); }
        }
        let problem = PoissonProblem::with_unit_spacing(n, bc, f).unwrap();
        let bound = cost_lower_bound(&problem).unwrap();
        let spec = AnsatzSpec::new(AnsatzFamily::Hea, n, 2).unwrap();
        let model = CostModel::new(&problem, &spec).unwrap();
        for _ in 0..10 {
            let theta: Vec<f64> = (0..model.num_parameters()).map(|_| rng.gen_range(0.0..6.3)).collect();
            let v = model.objective(&theta).unwrap();
            prop_assert!(v <= 1e-15);
            prop_assert!(v >= bound - 1e-10, "{} < bound {}", v, bound);
        }
    }

    #[test]
    fn shots_agree_with_exact(seed: u64, pick in 0usize..3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = 1 + pick % 2;
        let f: Vec<f64> = (0..1 << n).map(|_| rng.gen_range(0.1..1.0)).collect();
        let problem = PoissonProblem::with_unit_spacing(n, BoundaryCondition::Dirichlet, f).unwrap();
        let spec = AnsatzSpec::new(AnsatzFamily::Mps, n, 1).unwrap();
        let model = CostModel::new(&problem, &spec).unwrap();
        let theta: Vec<f64> = (0..model.num_parameters()).map(|_| rng.gen_range(0.0..6.3)).collect();
        let r = rng.gen_range(0.2..2.0);
        let exact = model.evaluate_exact(&theta, r).unwrap();
        let shots = model.evaluate_shots(&theta, r, 10_000, seed).unwrap();
        let se = shots.value_std_error.unwrap();
        prop_assert!((shots.value - exact.value).abs() <= 5.0 * se, "{} vs {} (se {})", shots.value, exact.value, se);
    }
}

#[test]
fn shift_circuit_matches_operator_and_permutation() {
    for n in 1..=4 {
        let dim = 1 << n;
        let cyclic = CMatrix::<f64>::permutation(dim, |k| (k + 1) % dim);
        let circ: CMatrix<f64> =
            unitary_matrix(&shift_circuit(n, AncillaMode::None).unwrap()).unwrap();
        let ps = shift_pauli::<f64>(n).unwrap().to_matrix().unwrap();
        assert!(circ.max_abs_diff(&cyclic) < 1e-9, "circuit n={n}");
        assert!(ps.max_abs_diff(&cyclic) < 1e-9, "pauli n={n}");

        let vchain = shift_circuit(n, AncillaMode::VChain).unwrap();
        for k in 0..dim {
            let out: Statevector<f64> =
                run_statevector(&vchain, Some(&Statevector::basis(vchain.num_qubits(), k)))
                    .unwrap();
            let expected = Statevector::basis(vchain.num_qubits(), (k + 1) % dim);
            assert!(
                (out.inner(&expected).unwrap().norm() - 1.0).abs() < 1e-9,
                "vchain n={n} k={k}"
            );
        }
    }
}

#[test]
fn vchain_matches_mcx_permutation() {
    for k in 2..=4 {
        let controls: Vec<usize> = (0..k).collect();
        let target = k;
        let ancillae: Vec<usize> = (k + 1..2 * k).collect();
        let frag = mcx_vchain(&controls, target, &ancillae).unwrap();
        let width = frag.num_qubits();
        let mut mcx = LogicalCircuit::new(width).unwrap();
        mcx.push(GateInstance::mcx(&controls, target)).unwrap();
        let all = (1 << k) - 1;
        for idx in 0..1usize << (k + 1) {
            let expected = if idx & all == all {
                idx ^ (1 << target)
            } else {
                idx
            };
            let out: Statevector<f64> =
                run_statevector(&frag, Some(&Statevector::basis(width, idx))).unwrap();
            assert!(
                (out.amplitudes()[expected].re - 1.0).abs() < 1e-12,
                "k={k} idx={idx}"
            );
            let reference: Statevector<f64> =
                run_statevector(&mcx, Some(&Statevector::basis(width, idx))).unwrap();
            assert_eq!(out, reference);
        }
        let ccx = frag.count(pvqa_core::GateTag::Ccx);
        assert_eq!(ccx, if k == 2 { 1 } else { 2 * (k - 1) });
    }
}

#[test]
fn expanded_mcx_matches_on_clean_ancillae() {
    let mut c = LogicalCircuit::new(5).unwrap();
    c.push(GateInstance::h(0)).unwrap();
    c.push(GateInstance::mcx(&[0, 1, 2, 3], 4)).unwrap();
    let (expanded, extra) = expand_mcx(&c).unwrap();
    assert_eq!(extra, 3);
    for k in 0..32 {
        let base: Statevector<f64> = run_statevector(&c, Some(&Statevector::basis(5, k))).unwrap();
        let wide: Statevector<f64> =
            run_statevector(&expanded, Some(&Statevector::basis(8, k))).unwrap();
        let embedded = Statevector::tensor(&Statevector::zero(3), &base);
        assert!((wide.inner(&embedded).unwrap().norm() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn pauli_term_count_scaling() {
    // Sparse but not linear: the multi-controlled layers spread over all
    // subsets of the lower bits, giving 3 * 2^(n-2) periodic terms.
    for n in 2..=6 {
        let a = laplacian_pauli_for::<f64>(n, BoundaryCondition::Periodic, 1.0).unwrap();
        assert_eq!(a.len(), 3 << (n - 2), "n={n}");
        for bc in [BoundaryCondition::Dirichlet, BoundaryCondition::Neumann] {
            let a = laplacian_pauli_for::<f64>(n, bc, 1.0).unwrap();
            assert!(a.len() <= 4 << (n - 1), "n={n} {bc:?}: {}", a.len());
        }
    }
}

#[test]
fn laplacian_pauli_matches_dense_for_all_boundaries() {
    for n in 1..=5 {
        for bc in [
            BoundaryCondition::Dirichlet,
            BoundaryCondition::Periodic,
            BoundaryCondition::Neumann,
        ] {
            let dense = laplacian_matrix_for::<f64>(n, bc, 0.5)
                .unwrap()
                .to_complex();
            let ps = laplacian_pauli_for::<f64>(n, bc, 0.5)
                .unwrap()
                .to_matrix()
                .unwrap();
            assert!(dense.max_abs_diff(&ps) < 1e-10, "n={n} {bc:?}");
        }
    }
}

/// Pseudoinverse quadratic form from a symmetric eigendecomposition.
fn eig_lower_bound(n: usize, bc: BoundaryCondition, f_hat: &[f64]) -> f64 {
    let dim = 1 << n;
    let a = laplacian_matrix_for::<f64>(n, bc, 1.0).unwrap();
    let m = DMatrix::from_row_slice(dim, dim, a.as_slice());
    let eig = m.symmetric_eigen();
    let mut q = 0.0;
    for (i, &lambda) in eig.eigenvalues.iter().enumerate() {
        if lambda.abs() > 1e-10 {
            let c: f64 = eig
                .eigenvectors
                .column(i)
                .iter()
                .zip(f_hat)
                .map(|(v, f)| v * f)
                .sum();
            q += c * c / lambda;
        }
    }
    -0.5 * q
}

#[test]
fn lower_bound_matches_eigendecomposition_and_is_attained() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for n in 1..=3 {
        for bc in [
            BoundaryCondition::Dirichlet,
            BoundaryCondition::Periodic,
            BoundaryCondition::Neumann,
        ] {
            let raw: Vec<f64> = (0..1 << n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let f = if bc.is_singular() {
                project_mean_zero(&raw)
            } else {
                raw
            };
            let problem = PoissonProblem::with_unit_spacing(n, bc, f.clone()).unwrap();
            let bound = cost_lower_bound(&problem).unwrap();
            let norm = f.iter().map(|v| v * v).sum::<f64>().sqrt();
            let f_hat: Vec<f64> = f.iter().map(|v| v / norm).collect();
            assert!(
                (bound - eig_lower_bound(n, bc, &f_hat)).abs() < 1e-10,
                "n={n} {bc:?}"
            );

            // psi proportional to A^+ f reaches the bound.
            let u =
                solve_classical(&PoissonProblem::with_unit_spacing(n, bc, f_hat.clone()).unwrap())
                    .unwrap()
                    .u;
            let psi = Statevector::<f64>::from_real(&u).unwrap();
            let op = laplacian_pauli_for::<f64>(n, bc, 1.0).unwrap();
            let a = pvqa_core::sim::expectation(&psi, &op).unwrap();
            let o: f64 = psi
                .real_parts()
                .iter()
                .zip(&f_hat)
                .map(|(p, f)| p * f)
                .sum();
            assert!((-0.5 * o * o / a - bound).abs() < 1e-10);
        }
    }
}

#[test]
fn noisy_fidelity_decreases_with_depth() {
    let noise = NoiseModel::osaka_like();
    let coupling = CouplingMap::linear(4).unwrap();
    let mut last_sim = 1.0;
    let mut last_proxy = 1.0;
    for layers in 1..=4 {
        let spec = AnsatzSpec::new(AnsatzFamily::Mps, 4, layers).unwrap();
        let theta: Vec<f64> = (0..spec.num_parameters())
            .map(|i| 0.3 + 0.1 * i as f64)
            .collect();
        let bound = build_ansatz(&spec)
            .unwrap()
            .bind_parameters(&theta)
            .unwrap();
        let phys = transpile(&bound, &coupling, true).unwrap();
        let ideal: Statevector<f64> = run_statevector(phys.circuit(), None).unwrap();
        let rho = run_density_with_noise(phys.circuit(), &noise).unwrap();
        let sim = state_fidelity(&ideal, &rho).unwrap();
        let proxy = pvqa_core::noise::fidelity_product(&phys, &noise);
        assert!(sim < last_sim && proxy < last_proxy, "layers={layers}");
        assert!(proxy <= sim + 0.05);
        last_sim = sim;
        last_proxy = proxy;
    }
}

#[test]
fn depolarized_x_fidelity() {
    for p in [0.01, 0.1] {
        let mut c = LogicalCircuit::new(1).unwrap();
        c.push(GateInstance::x(0)).unwrap();
        let noise = NoiseModel::new(p, 0.0, 0.0).unwrap();
        let rho = run_density_with_noise::<f64>(&c, &noise).unwrap();
        let fid = state_fidelity(&Statevector::basis(1, 1), &rho).unwrap();
        assert!((fid - (1.0 - p / 2.0)).abs() < 1e-10);
    }
}
