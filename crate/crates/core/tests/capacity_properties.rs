use proptest::prelude::*;
use toric_chords::capacities::{cube_capacity, gromov_width, lagrangian_capacity, min_orbit_period};
use toric_chords::toric_reeb::sup_chord_over_fibers;
use toric_chords::{Execution, MomentRegion};

const GRID: usize = 10_000;

fn region() -> impl Strategy<Value = MomentRegion> {
    prop_oneof![
        (0.5..3.0f64).prop_map(|r| MomentRegion::ball(2, r).unwrap()),
        (0.5..3.0f64, 0.5..3.0f64).prop_map(|(a, b)| MomentRegion::ellipsoid(&[a, b]).unwrap()),
        (0.5..2.0f64, 1.0..10.0f64).prop_map(|(a, p)| MomentRegion::convex_power(2, a, p).unwrap()),
        (0.5..2.0f64).prop_map(|c| MomentRegion::concave_sqrt(2, c).unwrap()),
    ]
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, ..ProptestConfig::default() })]

    #[test]
    fn capacities_scale_linearly(r in region(), s in prop::sample::select(vec![0.5, 2.0])) {
        let big = r.scaled(s).unwrap();
        let exec = Execution::default();
        let gr = gromov_width(&r, GRID, exec).unwrap().value;
        prop_assert!(close(gromov_width(&big, GRID, exec).unwrap().value, s * gr, 1e-6));
        prop_assert!(close(cube_capacity(&big).unwrap(), s * cube_capacity(&r).unwrap(), 1e-9));
        let a = min_orbit_period(&r, 20, exec).unwrap().period;
        prop_assert!(close(min_orbit_period(&big, 20, exec).unwrap().period, s * a, 1e-6));
    }

    #[test]
    fn capacities_respect_inclusion(a in 0.5..2.0f64, b in 0.5..2.0f64, da in 0.0..1.0f64, db in 0.0..1.0f64) {
        let small = MomentRegion::ellipsoid(&[a, b]).unwrap();
        let large = MomentRegion::ellipsoid(&[a + da, b + db]).unwrap();
        let exec = Execution::default();
        prop_assert!(gromov_width(&small, GRID, exec).unwrap().value <= gromov_width(&large, GRID, exec).unwrap().value + 1e-9);
        prop_assert!(cube_capacity(&small).unwrap() <= cube_capacity(&large).unwrap() + 1e-12);
        prop_assert!(
            min_orbit_period(&small, 20, exec).unwrap().period
                <= min_orbit_period(&large, 20, exec).unwrap().period + 1e-9
        );
    }

    #[test]
    fn fiber_chords_stay_below_lagrangian_capacity(r in region()) {
        let lag = lagrangian_capacity(&r).unwrap().value;
        let sup = sup_chord_over_fibers(&r, 10, Execution::default()).unwrap();
        prop_assert!(sup.chord_periods.iter().all(|(_, p)| *p <= lag + 1e-9));
        prop_assert!(close(sup.value, lag, 1e-9));
    }

    #[test]
    fn gap_orders_the_capacities(r in region()) {
        let exec = Execution::default();
        let gr = gromov_width(&r, GRID, exec).unwrap().value;
        let cube = cube_capacity(&r).unwrap();
        let a_min = min_orbit_period(&r, 20, exec).unwrap().period;
        prop_assert!(cube < gr);
        prop_assert!((a_min - gr).abs() <= 1e-6 * gr.max(1.0));
    }
}

#[test]
fn sequential_and_parallel_agree() {
    let r = MomentRegion::convex_power(2, 1.3, 5.0).unwrap();
    let seq = gromov_width(&r, GRID, Execution::Sequential).unwrap();
    let par = gromov_width(&r, GRID, Execution::Parallel).unwrap();
    assert_eq!(seq, par);
    let seq = min_orbit_period(&r, 30, Execution::Sequential).unwrap();
    let par = min_orbit_period(&r, 30, Execution::Parallel).unwrap();
    assert_eq!(seq, par);
}
