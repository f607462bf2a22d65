mod common;

use common::*;
use qudit_krylov::oracle::dense_build;
use qudit_krylov::{
    build_hamiltonian, build_total_magnetization, decompose_local, spin_matrices, Extent, LatticeSpec, ModelSpec, Site,
    SpinValue,
};

fn ising(two_s: u8, lattice: LatticeSpec) -> ModelSpec {
    ModelSpec::Ising {
        j: 0.9,
        hx: 1.1,
        hz: -0.7,
        spin: SpinValue::from_two_s(two_s).unwrap(),
        lattice,
    }
}

fn window_for(lattice: &LatticeSpec) -> Vec<Site> {
    match lattice.extent {
        Extent::Ring(n) | Extent::Open(n) => chain_window(n as usize),
        Extent::Torus(lx, ly) => (0..lx as i16)
            .flat_map(|x| (0..ly as i16).map(move |y| Site::new_2d(x, y)))
            .collect(),
        Extent::Thermodynamic => unreachable!(),
    }
}

fn assert_same_as_oracle(spec: &ModelSpec) {
    let h = build_hamiltonian(spec).unwrap();
    let sys = dense_build(spec).unwrap();
    let w = window_for(&spec.lattice());
    let diff = max_diff(&dense_terms(&h, &w), &sys.h.to_dense());
    assert!(diff < 1e-12, "{}: {diff}", spec.fingerprint());
}

#[test]
fn ising_matches_direct_assembly() {
    for two_s in 1..=3 {
        for n in 2..=4 {
            assert_same_as_oracle(&ising(two_s, LatticeSpec::chain(Extent::Ring(n))));
            assert_same_as_oracle(&ising(two_s, LatticeSpec::chain(Extent::Open(n))));
        }
    }
    assert_same_as_oracle(&ising(1, LatticeSpec::square(Extent::Torus(2, 2))));
    assert_same_as_oracle(&ising(1, LatticeSpec::square(Extent::Torus(2, 3))));
    assert_same_as_oracle(&ising(2, LatticeSpec::square(Extent::Torus(2, 2))));
}

#[test]
fn potts_matches_direct_assembly() {
    for d in 2..=4 {
        for n in 2..=4 {
            assert_same_as_oracle(&ModelSpec::Potts {
                d,
                j: 1.3,
                h: 0.6,
                lattice: LatticeSpec::chain(Extent::Ring(n)),
            });
        }
    }
}

#[test]
fn kitaev_potts_matches_direct_assembly() {
    for d in 2..=4 {
        for hermitian_closure in [true, false] {
            for extent in [Extent::Ring(2), Extent::Ring(4), Extent::Open(3), Extent::Open(4)] {
                assert_same_as_oracle(&ModelSpec::KitaevPotts {
                    d,
                    jx: vec![1.0, 0.4],
                    jy: vec![0.7, 1.2],
                    lattice: LatticeSpec::chain(extent),
                    hermitian_closure,
                });
            }
        }
    }
}

#[test]
fn magnetization_matches_direct_assembly() {
    for two_s in 1..=3 {
        let lattice = LatticeSpec::chain(Extent::Ring(3));
        let spin = SpinValue::from_two_s(two_s).unwrap();
        let a = build_total_magnetization(spin, &lattice).unwrap();
        let sys = dense_build(&ising(two_s, lattice)).unwrap();
        assert!(max_diff(&dense_vector(&a, &chain_window(3)), &sys.a.to_dense()) < 1e-12);
    }
}

#[test]
fn local_decomposition_reconstructs_spin_matrices() {
    for two_s in 1..=9 {
        let spin = SpinValue::from_two_s(two_s).unwrap();
        let m = spin_matrices(spin);
        for op in [&m.sx, &m.sy, &m.sz] {
            let mut back = nalgebra::DMatrix::zeros(op.nrows(), op.ncols());
            for ((v, w), c) in decompose_local(op) {
                let s = qudit_krylov::WeylString::single(spin.d(), Site::ORIGIN, v, w);
                back += dense_of(&s, &[Site::ORIGIN]) * c;
            }
            assert!(max_diff(&back, op) < 1e-12);
        }
    }
}
