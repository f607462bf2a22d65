use num_complex::Complex64 as C;
use qudit_krylov::lanczos::{resume_lanczos, LanczosState};
use qudit_krylov::oracle::{chain_cell, dense_build, dense_lanczos, window_lanczos};
use qudit_krylov::{
    apply_liouvillian, build_hamiltonian, build_total_magnetization, moments_from_b, run_lanczos, spin_matrices,
    Extent, LanczosOptions, LatticeSpec, ModelSpec, OperatorVector, Site, SpinValue, Termination, WeylString,
};

fn ising(two_s: u8, extent: Extent) -> ModelSpec {
    ModelSpec::Ising {
        j: 1.0,
        hx: 1.0,
        hz: 1.0,
        spin: SpinValue::from_two_s(two_s).unwrap(),
        lattice: LatticeSpec::chain(extent),
    }
}

fn potts(d: u8, extent: Extent) -> ModelSpec {
    ModelSpec::Potts {
        d,
        j: 1.0,
        h: 1.0,
        lattice: LatticeSpec::chain(extent),
    }
}

fn sparse_b(spec: &ModelSpec, n: usize) -> Vec<f64> {
    let h = build_hamiltonian(spec).unwrap();
    let a = build_total_magnetization(spec.spin(), &spec.lattice()).unwrap();
    run_lanczos(&h, &a, &LanczosOptions::new(n)).unwrap().b
}

fn assert_close(a: &[f64], b: &[f64], tol: f64) {
    assert_eq!(a.len(), b.len(), "{a:?} vs {b:?}");
    for (x, y) in a.iter().zip(b) {
        assert!((x - y).abs() < tol, "{a:?} vs {b:?}");
    }
}

#[test]
fn finite_rings_match_dense_lanczos() {
    for spec in [
        ising(1, Extent::Ring(8)),
        potts(3, Extent::Ring(6)),
        potts(2, Extent::Ring(8)),
    ] {
        let dense = dense_lanczos(&dense_build(&spec).unwrap(), 8).unwrap();
        let sparse = sparse_b(&spec, 8);
        assert_close(&sparse, &dense, 1e-10);
    }
}

#[test]
fn large_rings_agree_with_translation_invariant_mode() {
    // with L ≥ 2n + 3 no operator in the recursion wraps the ring
    let n = 4;
    for spec in [ising(2, Extent::Ring(11)), potts(3, Extent::Ring(11))] {
        let ring = sparse_b(&spec, n);
        let ti = sparse_b(&spec.with_extent(Extent::Thermodynamic), n);
        assert_close(&ring, &ti, 1e-10);
    }
}

#[test]
fn validity_horizon_on_small_rings() {
    let ti = sparse_b(&ising(1, Extent::Thermodynamic), 8);
    for len in [7u16, 9, 11] {
        let ring = sparse_b(&ising(1, Extent::Ring(len)), 8);
        let horizon = (len as usize - 3) / 2;
        assert_close(&ring[..horizon], &ti[..horizon], 1e-10);
    }
}

#[test]
fn window_oracle_agrees_with_translation_invariant_mode() {
    for (spec, n) in [
        (ising(2, Extent::Thermodynamic), 5),
        (potts(3, Extent::Thermodynamic), 5),
        (ising(3, Extent::Thermodynamic), 3),
    ] {
        let (site, bond) = chain_cell(&spec).unwrap();
        let sz = spin_matrices(spec.spin()).sz;
        let window = window_lanczos(&site, &bond, &sz, n).unwrap();
        assert_close(&sparse_b(&spec, n), &window, 1e-10);
    }
}

#[test]
fn moments_match_nested_commutators() {
    let spec = ising(2, Extent::Thermodynamic);
    let h = build_hamiltonian(&spec).unwrap();
    let a = build_total_magnetization(spec.spin(), &spec.lattice()).unwrap();
    let b = run_lanczos(&h, &a, &LanczosOptions::new(5)).unwrap().b;
    let mu = moments_from_b(&b, 5).unwrap();
    let norm = a.norm_sqr();
    let mut cur = a;
    for (k, m) in mu.iter().enumerate().skip(1) {
        cur = apply_liouvillian(&h, &cur).unwrap();
        let direct = cur.norm_sqr() / norm;
        assert!((direct - m).abs() < 1e-10 * m, "k={k}: {direct} vs {m}");
    }
}

#[test]
fn verification_mode_vectors_are_orthonormal() {
    let spec = ising(2, Extent::Thermodynamic);
    let h = build_hamiltonian(&spec).unwrap();
    let a = build_total_magnetization(spec.spin(), &spec.lattice()).unwrap();
    let opts = LanczosOptions {
        verify: true,
        ..LanczosOptions::new(6)
    };
    let res = run_lanczos(&h, &a, &opts).unwrap();
    let plain = run_lanczos(&h, &a, &LanczosOptions::new(6)).unwrap();
    assert_close(&res.b, &plain.b, 1e-9);
    let vs = res.vectors.unwrap();
    for (i, x) in vs.iter().enumerate() {
        for (j, y) in vs.iter().enumerate() {
            let want = if i == j { C::new(1.0, 0.0) } else { C::default() };
            assert!((x.inner(y).unwrap() - want).norm() < 1e-8);
        }
    }
}

#[test]
fn checkpoint_resume_is_seamless() {
    let spec = potts(3, Extent::Thermodynamic);
    let h = build_hamiltonian(&spec).unwrap();
    let a = build_total_magnetization(spec.spin(), &spec.lattice()).unwrap();
    let full = run_lanczos(&h, &a, &LanczosOptions::new(6)).unwrap();

    let mut run = qudit_krylov::lanczos::Lanczos::new(&h, &a, false).unwrap();
    for _ in 0..3 {
        run.step(usize::MAX).unwrap();
    }
    let mut bytes = Vec::new();
    run.state().write_snapshot(&mut bytes).unwrap();
    let state = LanczosState::read_snapshot(&bytes[..]).unwrap();
    let resumed = resume_lanczos(&h, state, &LanczosOptions::new(6)).unwrap();
    assert_eq!(resumed.b, full.b);
    assert_eq!(resumed.terminated, Termination::MaxIterations);
}

#[test]
fn free_model_krylov_space_closes() {
    // d = 2 Potts is a free-fermion chain; Σ X_i is a fermion bilinear and
    // stays in a finite space of bilinears, Σ Z_i does not
    let spec = potts(2, Extent::Ring(8));
    let h = build_hamiltonian(&spec).unwrap();
    let mode = spec.lattice().mode();
    let sx = OperatorVector::from_terms(
        2,
        mode,
        (0..8).map(|i| (WeylString::single(2, Site::new(i), 1, 0), C::new(1.0, 0.0))),
    )
    .unwrap();
    let res = run_lanczos(&h, &sx, &LanczosOptions::new(40)).unwrap();
    assert!(
        matches!(res.terminated, Termination::SubspaceExhausted { n } if n < 20),
        "{:?}",
        res.terminated
    );

    let x = qudit_krylov::oracle::shift_matrix(2);
    let mut sys = dense_build(&spec).unwrap();
    sys.a = qudit_krylov::oracle::assemble(
        2,
        8,
        &(0..8)
            .map(|s| qudit_krylov::oracle::LocalTerm {
                sites: vec![s],
                matrix: x.clone(),
            })
            .collect::<Vec<_>>(),
    )
    .unwrap();
    // the dense recurrence leaves round-off where the space closes
    let dense = dense_lanczos(&sys, res.b.len() + 1).unwrap();
    assert_close(&res.b, &dense[..res.b.len()], 1e-8);
    assert!(dense[res.b.len()] < 1e-6);
}
