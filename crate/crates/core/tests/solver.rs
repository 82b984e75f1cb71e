mod common;

use common::{random_cells, random_config};
use lanesim::diagnostics::{entropy_residual, l1_distance, total_mass};
use lanesim::scenarios::ScenarioPreset;
use lanesim::{
    run, run_with, Cfl, Config, Error, Flux, Grid, InitialCondition, Kernel, KernelFamily, Law, Model, Profile,
    RunConfig, Snapshot, Source, State,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn two_lane(t_final: f64) -> Config {
    RunConfig {
        t_final,
        snapshot_times: vec![],
        ..ScenarioPreset::TwoLaneLocalFlux.configs::<f64>().remove(1)
    }
}

#[test]
fn zero_final_time_returns_initial_data() {
    let c = two_lane(0.0);
    let out = run(&c).unwrap();
    assert_eq!(out.steps, 0);
    assert_eq!(out.snapshots.len(), 1);
    assert_eq!(out.snapshots[0].state, c.initial_state().unwrap());
}

#[test]
fn snapshots_land_exactly() {
    let mut c = two_lane(0.3);
    c.snapshot_times = vec![0.1, 0.0, 0.2345, 0.1];
    let out = run(&c).unwrap();
    let times: Vec<f64> = out.snapshots.iter().map(|s| s.t()).collect();
    assert_eq!(times, vec![0.0, 0.1, 0.2345, 0.3]);
    assert_eq!(out.final_state.t, 0.3);

    c.snapshot_times = vec![0.5];
    assert!(matches!(run(&c), Err(Error::SnapshotTimeOutOfRange { .. })));
    c.snapshot_times = vec![-0.1];
    assert!(matches!(run(&c), Err(Error::SnapshotTimeOutOfRange { .. })));
}

#[test]
fn runs_are_bit_identical() {
    let c = two_lane(0.4);
    let (a, b) = (run(&c).unwrap(), run(&c).unwrap());
    assert_eq!(a.final_state, b.final_state);
    assert_eq!(a.series, b.series);
}

#[test]
fn series_has_one_row_per_step() {
    let c = two_lane(0.05);
    let out = run(&c).unwrap();
    assert_eq!(out.series.len(), out.steps + 1);
    assert_eq!(out.series[0].t, 0.0);
    assert_eq!(out.series.last().unwrap().t, 0.05);

    let sparse = RunConfig { series_every: 7, ..c };
    let out = run(&sparse).unwrap();
    assert_eq!(out.series.len(), 1 + out.steps / 7 + usize::from(out.steps % 7 != 0));
}

#[test]
fn entropy_residual_at_zero_is_the_update_identity() {
    let cfgs = [
        two_lane(0.2),
        RunConfig {
            t_final: 0.2,
            snapshot_times: vec![],
            ..ScenarioPreset::NonlocalFluxBump.configs::<f64>().remove(1)
        },
    ];
    for c in cfgs {
        let scheme = c.scheme().unwrap();
        let mut worst = 0.0f64;
        run_with(&c, |r| {
            for lane in entropy_residual(&scheme, r, 0.0)? {
                for v in lane {
                    worst = worst.max(v.abs());
                }
            }
            Ok(())
        })
        .unwrap();
        assert!(worst <= 1e-15, "{}: {worst}", c.name);
    }
}

#[test]
fn constant_periodic_state_has_zero_entropy_residual() {
    let grid = Grid::periodic(0.0, 1.0, 0.01).unwrap();
    let c = RunConfig {
        name: "flat".into(),
        grid,
        t_final: 0.05,
        velocity: Model::new(vec![Law::Quadratic, Law::Quadratic]),
        flux: Flux::NonlocalDownstream(Kernel::new(KernelFamily::LinearForward, 0.2).unwrap()),
        source: Source::new_nonlocal(Kernel::new(KernelFamily::LinearSymmetric, 0.1).unwrap()),
        cfl: Cfl::adaptive(),
        initial: InitialCondition::Profiles(vec![Profile::Constant { value: 0.375 }; 2]),
        snapshot_times: vec![],
        series_every: 1,
        enforce_support_margin: true,
        output_dir: None,
    };
    let scheme = c.scheme().unwrap();
    run_with(&c, |r| {
        for cc in [0.0, 0.2, 0.375, 0.9] {
            for lane in entropy_residual(&scheme, r, cc)? {
                assert!(lane.iter().all(|v| v.abs() < 1e-15));
            }
        }
        Ok(())
    })
    .unwrap();
}

#[test]
fn random_configs_conserve_mass_when_periodic() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let mut c = random_config(&mut rng);
        c.grid = c.grid.with_boundary(lanesim::Boundary::Periodic);
        c.t_final = 0.2;
        let out = run(&c).unwrap();
        let (m0, m1) = (
            total_mass(&out.initial, c.grid.dx()),
            total_mass(&out.final_state, c.grid.dx()),
        );
        assert!((m1 - m0).abs() <= 1e-12 * m0.max(1e-300), "{m0} -> {m1}");
    }
}

#[test]
fn support_margin_is_enforced() {
    let mut c = ScenarioPreset::NonlocalFluxBump.configs::<f64>().remove(0);
    c.t_final = 3.0;
    c.snapshot_times.clear();
    assert!(matches!(c.validate(), Err(Error::SemanticError(_))));
    c.enforce_support_margin = false;
    assert!(c.validate().is_ok());
}

#[test]
fn generic_scalar_runs_in_f32() {
    let c32 = ScenarioPreset::TwoLaneLocalFlux.configs::<f32>().remove(0);
    let c64 = ScenarioPreset::TwoLaneLocalFlux.configs::<f64>().remove(0);
    let (a, b) = (run(&c32).unwrap(), run(&c64).unwrap());
    let m32 = a.series.last().unwrap().mass.clone();
    let m64 = &b.series.last().unwrap().mass;
    for j in 0..2 {
        assert!((m32[j] as f64 - m64[j]).abs() < 1e-4, "{m32:?} vs {m64:?}");
    }
}

#[test]
fn l1_distance_is_a_metric() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let grid = Grid::new(0.0, 0.8, 0.01).unwrap();
    let snap = |rng: &mut ChaCha8Rng| Snapshot {
        grid,
        state: State::new(0.0, (0..2).map(|_| random_cells(rng, 80)).collect()).unwrap(),
    };
    for _ in 0..200 {
        let (a, b, c) = (snap(&mut rng), snap(&mut rng), snap(&mut rng));
        let d = |x: &Snapshot<f64>, y: &Snapshot<f64>| l1_distance(x, y).unwrap();
        for j in 0..2 {
            assert_eq!(d(&a, &a)[j], 0.0);
            assert!((d(&a, &b)[j] - d(&b, &a)[j]).abs() < 1e-14);
            assert!(d(&a, &c)[j] <= d(&a, &b)[j] + d(&b, &c)[j] + 1e-14);
        }
    }
}

#[test]
fn random_configs_stay_in_range() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..10 {
        let c = random_config(&mut rng);
        let scheme = c.scheme().unwrap();
        let mut state = c.initial_state().unwrap();
        for i in 0..100 {
            let r = scheme.advance(&state, f64::INFINITY, i).unwrap();
            assert!(r.mid.first_out_of_range().is_none() && r.next.first_out_of_range().is_none());
            state = r.next;
        }
        assert!(rng.gen_bool(1.0));
    }
}
