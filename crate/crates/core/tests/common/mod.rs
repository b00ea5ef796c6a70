//! Property checks shared by the proptest suite and the acceptance run.
#![allow(dead_code)]

use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

use nmrqc::algorithms;
use nmrqc::compiler::{
    circuit_unitary, compile_circuit, sequence_unitary, synthesize_refocus, unitary_distance, CompileOptions, ExecMode,
    Gate, VerifyMode,
};
use nmrqc::decoherence::{self, RelaxationParams};
use nmrqc::linalg::{self, c, CMat};
use nmrqc::pulse::RfModel;
use nmrqc::{DensityMatrix, SpinSystem};

pub type Check = Result<(), TestCaseError>;

/// Random normalized density matrix A A^dag / Tr from 2 * 4^n reals.
pub fn density(n: usize, raw: &[f64]) -> DensityMatrix {
    let d = 1 << n;
    let a = CMat::from_fn(d, d, |i, j| c(raw[2 * (i * d + j)], raw[2 * (i * d + j) + 1]));
    let m = &a * a.adjoint();
    let tr = linalg::trace(&m);
    DensityMatrix { n, mat: m / tr }
}

pub fn density_strategy(max_n: usize) -> impl Strategy<Value = DensityMatrix> {
    (1..=max_n).prop_flat_map(|n| {
        let len = 2 << (2 * n);
        prop::collection::vec(-1.0..1.0f64, len).prop_map(move |raw| density(n, &raw))
    })
}

pub fn relaxation_strategy(n: usize) -> impl Strategy<Value = RelaxationParams> {
    (
        prop::collection::vec(0.1..20.0f64, n),
        prop::collection::vec(0.05..1.0f64, n),
        prop::collection::vec(0.0..1.0f64, n),
    )
        .prop_map(move |(t1, frac, p)| RelaxationParams {
            // T2 <= 2 T1 keeps the pure dephasing rate non-negative
            t2: t1.iter().zip(&frac).map(|(a, f)| 2.0 * a * f).collect(),
            t1,
            p,
            t2_sys: vec![None; n],
        })
}

pub fn state_and_relaxation(max_n: usize) -> impl Strategy<Value = (DensityMatrix, RelaxationParams, f64)> {
    density_strategy(max_n).prop_flat_map(|rho| {
        let n = rho.n;
        (Just(rho), relaxation_strategy(n), 0.0..5.0f64)
    })
}

fn close(a: &CMat, b: &CMat, tol: f64, what: &str) -> Check {
    let e = linalg::max_abs(&(a - b));
    prop_assert!(e < tol, "{what}: deviation {e:e}");
    Ok(())
}

pub fn check_trace_preservation((rho, params, t): (DensityMatrix, RelaxationParams, f64)) -> Check {
    let out = decoherence::decohere_interval(&rho, &params, t).map_err(fail)?;
    prop_assert!((out.trace() - c(1.0, 0.0)).norm() < 1e-12);
    prop_assert!(linalg::is_hermitian(&out.mat, 1e-12));
    let min = linalg::hermitian_eigenvalues(&out.mat).into_iter().fold(f64::INFINITY, f64::min);
    prop_assert!(min > -1e-12, "negative eigenvalue {min}");
    Ok(())
}

pub fn check_kraus_completeness((gamma, p, lambda): (f64, f64, f64)) -> Check {
    let id = linalg::identity(2);
    close(&decoherence::completeness(&decoherence::gad_kraus(gamma, p)), &id, 1e-12, "gad")?;
    close(&decoherence::completeness(&decoherence::pd_kraus(lambda)), &id, 1e-12, "pd")
}

pub fn check_gad_pd_commute((rho, params, t): (DensityMatrix, RelaxationParams, f64)) -> Check {
    for s in 0..rho.n {
        let (t1, t2, p) = (params.t1[s], params.t2[s], params.p[s]);
        let a = decoherence::gad_channel(&rho, s, t, t1, p).map_err(fail)?;
        let a = decoherence::pd_channel(&a, s, t, t2).map_err(fail)?;
        let b = decoherence::pd_channel(&rho, s, t, t2).map_err(fail)?;
        let b = decoherence::gad_channel(&b, s, t, t1, p).map_err(fail)?;
        close(&a.mat, &b.mat, 1e-12, "gad/pd order")?;
    }
    Ok(())
}

pub fn check_order_invariance((rho, params, t): (DensityMatrix, RelaxationParams, f64), seed: u64) -> Check {
    let n = rho.n;
    let forward: Vec<usize> = (0..n).collect();
    let mut shuffled = forward.clone();
    // cheap deterministic shuffle
    for i in (1..n).rev() {
        let j = (seed.wrapping_mul(6364136223846793005).wrapping_add(i as u64) >> 33) as usize % (i + 1);
        shuffled.swap(i, j);
    }
    let a = decoherence::decohere_interval_ordered(&rho, &params, t, &forward).map_err(fail)?;
    let b = decoherence::decohere_interval_ordered(&rho, &params, t, &shuffled).map_err(fail)?;
    close(&a.mat, &b.mat, 1e-12, "spin order")
}

/// Random weakly coupled system with some zero couplings; the chain
/// i, i+1 stays coupled so every pair has a coupling path.
pub fn system_strategy(max_n: usize) -> impl Strategy<Value = SpinSystem> {
    (2..=max_n).prop_flat_map(|n| {
        let pairs = n * (n - 1) / 2;
        (
            prop::collection::vec(-5000.0..5000.0f64, n),
            prop::collection::vec(prop_oneof![Just(0.0), -300.0..-5.0f64, 5.0..300.0f64], pairs),
        )
            .prop_map(move |(off, js)| {
                let mut s = SpinSystem::new(n).with_offsets(&off);
                let mut k = 0;
                for i in 0..n {
                    for j in i + 1..n {
                        let v = if j == i + 1 && js[k] == 0.0 { 40.0 } else { js[k] };
                        s.set_j(i, j, v);
                        k += 1;
                    }
                }
                s
            })
    })
}

pub fn check_refocus_balance(sys: SpinSystem, pick: (usize, usize, bool)) -> Check {
    let n = sys.n;
    let (a, b) = (pick.0 % n, pick.1 % n);
    let active = if a != b && sys.j_hz[a][b] != 0.0 { Some((a, b, if pick.2 { 1 } else { -1 })) } else { None };
    let scheme = synthesize_refocus(&sys, active, 0.01, &[]).map_err(fail)?;
    scheme.check(&sys, &[]).map_err(fail)?;
    let m = scheme.m() as i64;
    for i in 0..n {
        for j in i + 1..n {
            let bal = scheme.pair_balance(i, j);
            match active {
                Some((x, y, s)) if (x.min(y), x.max(y)) == (i, j) => prop_assert_eq!(bal, m * s as i64),
                _ if sys.j_hz[i][j] != 0.0 => prop_assert_eq!(bal, 0),
                _ => {}
            }
        }
    }
    Ok(())
}

pub fn gate_strategy(n: usize) -> impl Strategy<Value = Gate> {
    let angle = -360.0..360.0f64;
    let spin = 0..n;
    let pair = (0..n, 0..n).prop_filter("distinct", |(a, b)| a != b);
    prop_oneof![
        (spin.clone(), angle.clone()).prop_map(|(spin, angle)| Gate::Rx { spin, angle }),
        (spin.clone(), angle.clone()).prop_map(|(spin, angle)| Gate::Ry { spin, angle }),
        (spin.clone(), angle.clone()).prop_map(|(spin, angle)| Gate::Rz { spin, angle }),
        (spin.clone(), angle.clone(), angle.clone()).prop_map(|(spin, phase, angle)| Gate::Rphi { spin, phase, angle }),
        spin.clone().prop_map(Gate::Hadamard),
        spin.prop_map(Gate::Not),
        pair.clone().prop_map(|(control, target)| Gate::Cnot { control, target }),
        (pair.clone(), angle.clone()).prop_map(|((control, target), angle)| Gate::ControlledZ {
            control,
            target,
            angle
        }),
        (pair.clone(), angle).prop_map(|((control, target), angle)| Gate::CPhase { control, target, angle }),
        pair.prop_map(|(a, b)| Gate::Swap(a, b)),
    ]
}

pub fn circuit_strategy(max_n: usize) -> impl Strategy<Value = (SpinSystem, Vec<Gate>)> {
    system_strategy(max_n).prop_flat_map(|sys| {
        let n = sys.n;
        (Just(sys), prop::collection::vec(gate_strategy(n), 0..8))
    })
}

pub fn check_pass_pipeline((sys, gates): (SpinSystem, Vec<Gate>)) -> Check {
    let target = circuit_unitary(&gates, sys.n).map_err(fail)?;
    for opts in [CompileOptions::raw(), CompileOptions::default()] {
        let seq = compile_circuit(&gates, &sys, &opts).map_err(fail)?;
        let u = sequence_unitary(&seq, &sys, ExecMode::Ideal, RfModel::Selective).map_err(fail)?;
        let d = unitary_distance(&u, &target, VerifyMode::GlobalPhase);
        prop_assert!(d < 1e-8, "distance {d:e} with {opts:?}");
    }
    Ok(())
}

pub fn check_grover((n, k): (usize, usize)) -> Check {
    let a = algorithms::grover_amplitude(n, k);
    let x0 = (1 << n) - 1;
    prop_assert!((a - algorithms::grover_statevector(n, x0, k)).abs() < 1e-10);
    if k <= 6 {
        let psi = algorithms::run_pure(&algorithms::grover_circuit(n, x0, k).map_err(fail)?, n, 0).map_err(fail)?;
        prop_assert!((a - psi[x0].norm_sqr()).abs() < 1e-10);
    }
    Ok(())
}

pub fn permutation_strategy() -> impl Strategy<Value = (SpinSystem, Vec<usize>, Vec<usize>)> {
    (2..=3usize)
        .prop_flat_map(|m| {
            let table: Vec<usize> = (0..1 << m).collect();
            (Just(m), Just(table).prop_shuffle(), any::<bool>())
        })
        .prop_map(|(m, table, controlled)| {
            let n = m + controlled as usize;
            let mut s = SpinSystem::new(n).with_offsets(&vec![0.0; n]);
            for i in 0..n {
                for j in i + 1..n {
                    s.set_j(i, j, 50.0 + 10.0 * (i + j) as f64);
                }
            }
            let controls = if controlled { vec![m] } else { Vec::new() };
            (s, controls, table)
        })
}

pub fn check_permutation((sys, controls, table): (SpinSystem, Vec<usize>, Vec<usize>)) -> Check {
    let m = table.len().trailing_zeros() as usize;
    let g = Gate::Permutation { controls, spins: (0..m).collect(), table };
    check_pass_pipeline((sys, vec![g]))
}

pub fn check_qft(psi_raw: Vec<f64>) -> Check {
    let n = (psi_raw.len() / 2).trailing_zeros() as usize;
    let d = 1 << n;
    let psi = nmrqc::linalg::CVec::from_fn(d, |i, _| c(psi_raw[2 * i], psi_raw[2 * i + 1]));
    let u = circuit_unitary(&algorithms::qft_circuit(n, false), n).map_err(fail)?;
    let want = algorithms::dft_matrix(n) * &psi;
    let got = u * &psi;
    let e = (got - want).norm();
    prop_assert!(e < 1e-10, "qft deviation {e:e}");
    Ok(())
}

pub fn qft_input_strategy() -> impl Strategy<Value = Vec<f64>> {
    (1..=4usize).prop_flat_map(|n| prop::collection::vec(-1.0..1.0f64, 2 << n))
}

pub fn fail(e: impl std::fmt::Display) -> TestCaseError {
    TestCaseError::fail(e.to_string())
}
