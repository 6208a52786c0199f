use dicke_ngs::oracle::{frame_equality_check_with_stagger, full_ground_state_with_stagger, read_dump, write_dump, FockTruncation};
use dicke_ngs::scf::solve_two_branch;
use dicke_ngs::{Backend, Boundary, Exchange, ModelSpec, PhotonFrame, ScfConfig, SolverConfig, SpinState};
use proptest::prelude::*;

fn small_spec() -> impl Strategy<Value = ModelSpec> {
    (2usize..=4, 0.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64, any::<bool>()).prop_map(
        |(n, g, jx, jy, jz, periodic)| {
            let boundary = if periodic && n > 2 { Boundary::Periodic } else { Boundary::Open };
            ModelSpec::new(n, 1.0, 1.0, g, Exchange::new(jx, jy, jz), boundary).unwrap()
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    // the variational energy never undercuts the exact ground state
    #[test]
    fn scf_energy_is_an_upper_bound(spec in small_spec()) {
        let solver = SolverConfig::dense();
        let exact = full_ground_state_with_stagger(&spec, &FockTruncation::new(40), solver.stagger_field).unwrap();
        let two = solve_two_branch(&spec, &ScfConfig::default(), &solver).unwrap();
        let e = two.best().energy;
        prop_assert!(e >= exact.energy - 1e-8 * exact.energy.abs().max(1.0), "scf {e} below exact {}", exact.energy);
        prop_assert!(e - exact.energy < 0.05 * spec.n as f64, "scf {e} far above exact {}", exact.energy);
    }

    #[test]
    fn frame_energy_matches_fock_space(
        spec in small_spec(),
        dx in -1.0..1.0f64, dp in -0.5..0.5f64, r in -0.3..0.3f64, lam in -1.0..0.5f64,
        theta in 0.0..std::f64::consts::PI, phi in 0.0..std::f64::consts::TAU,
    ) {
        let frame = PhotonFrame::new(dx, dp, r, lam);
        let state = SpinState::product(spec.n, Backend::Dense, theta, phi).unwrap();
        let dev = frame_equality_check_with_stagger(&spec, &frame, &state, 60, 1e-3).unwrap();
        prop_assert!(dev < 1e-8, "deviation {dev}");
    }
}

#[test]
fn dicke_small_n_matches_oracle_closely() {
    // deep in the superradiant phase the exact N = 2 state is a cat; one frame misses part of it
    for (g, tol) in [(0.2, 1e-4), (0.5, 2e-3), (0.8, 3e-2)] {
        let spec = ModelSpec::dicke(2, g).unwrap();
        let solver = SolverConfig::dense();
        let exact = full_ground_state_with_stagger(&spec, &FockTruncation::new(40), solver.stagger_field).unwrap();
        let rep = solve_two_branch(&spec, &ScfConfig::default(), &solver).unwrap().into_best();
        assert!(rep.converged);
        let rel = (rep.energy - exact.energy) / exact.energy.abs();
        assert!((0.0..tol).contains(&(rel + 1e-12)), "g={g}: rel excess {rel}");
    }
}

#[test]
fn dump_round_trip() {
    let spec = ModelSpec::dicke(3, 0.4).unwrap();
    let exact = full_ground_state_with_stagger(&spec, &FockTruncation::new(20), 0.0).unwrap();
    let mut buf = Vec::new();
    write_dump(&exact, &mut buf).unwrap();
    let (header, amps) = read_dump(buf.as_slice()).unwrap();
    assert_eq!(header.n, 3);
    assert_eq!(header.n_max, 20);
    assert_eq!(header.dim, 21 * 8);
    assert_eq!(header.energy, exact.energy);
    assert_eq!(amps, exact.state.amplitudes);
    let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
    assert!((norm - 1.0).abs() < 1e-10);
    assert!(read_dump(&buf[..buf.len() - 3]).is_err());
}
