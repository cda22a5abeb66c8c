mod common;

use common::*;
use hvac_mpc::{build_feasibility_lp, relaxation_from, HorizonInput};
use hvac_mpc_core::Mode;
use hvac_mpc_optim::{solve_lp, Status};
use proptest::prelude::*;

#[test]
fn comfortable_start_needs_no_relaxation() {
    let toy = Toy::new(3);
    let (models, devices) = (toy.models(Mode::Heating), toy.devices());
    let m = meas(vec![21.0; 3], 40.0, 40.0, 5.0);
    let fc = forecast(3, 12, 21.0, 0.0);
    let (lo, hi) = bounds(3, 12, 20.0, 23.0);
    let hist = empty_history();
    let inp = HorizonInput {
        k: 0,
        horizon: 12,
        mode: Mode::Heating,
        models: &models,
        devices: &devices,
        meas: &m,
        history: &hist,
        forecast: &fc,
        lower: &lo,
        upper: &hi,
    };
    let (lp, layout) = build_feasibility_lp(&inp, 100.0, None).unwrap();
    let r = solve_lp(&lp).unwrap();
    assert_eq!(r.status, Status::Optimal);
    assert!(r.objective.abs() < 1e-9, "{}", r.objective);
    let relax = relaxation_from(&layout, &r.x);
    assert!(relax.comfort_total() < 1e-9);
}

#[test]
fn forced_violation_costs_exactly_its_size() {
    // Supply equals zone temperature: the fan-coil cannot heat, so the
    // first temperature stays at 20 against a lower bound of 21.
    let toy = Toy::new(1);
    let (models, devices) = (toy.models(Mode::Heating), toy.devices());
    let m = meas(vec![20.0], 20.0, 20.0, 5.0);
    let fc = forecast(1, 1, 20.0, 0.0);
    let (lo, hi) = bounds(1, 1, 21.0, 24.0);
    let hist = empty_history();
    let inp = HorizonInput {
        k: 0,
        horizon: 1,
        mode: Mode::Heating,
        models: &models,
        devices: &devices,
        meas: &m,
        history: &hist,
        forecast: &fc,
        lower: &lo,
        upper: &hi,
    };
    let (lp, layout) = build_feasibility_lp(&inp, 100.0, None).unwrap();
    let r = solve_lp(&lp).unwrap();
    assert!((r.objective - 1.0).abs() < 1e-9, "{}", r.objective);
    let relax = relaxation_from(&layout, &r.x);
    assert!((relax.lower[0][0] - 1.0).abs() < 1e-9);
    assert_eq!(relax.upper[0][0], 0.0);
    assert!(relax.technical_total() < 1e-12);
}

#[test]
fn cooling_violation_is_relaxed_on_the_upper_side() {
    let toy = Toy::new(1);
    let (models, devices) = (toy.models(Mode::Cooling), toy.devices());
    let m = meas(vec![27.0], 27.0, 27.0, 5.0);
    let fc = forecast(1, 2, 27.0, 0.0);
    let (lo, hi) = bounds(1, 2, 22.0, 25.0);
    let hist = empty_history();
    let inp = HorizonInput {
        k: 0,
        horizon: 2,
        mode: Mode::Cooling,
        models: &models,
        devices: &devices,
        meas: &m,
        history: &hist,
        forecast: &fc,
        lower: &lo,
        upper: &hi,
    };
    let (lp, layout) = build_feasibility_lp(&inp, 100.0, None).unwrap();
    let r = solve_lp(&lp).unwrap();
    let relax = relaxation_from(&layout, &r.x);
    // The first step cannot move (chilled water equals the zone); the
    // outlet setpoint reaches the second step.
    assert!((relax.upper[0][0] - 2.0).abs() < 1e-9, "{:?}", relax.upper);
    assert!(relax.upper[1][0] < 2.0);
    assert!(relax.lower.iter().flatten().all(|&v| v == 0.0));
}

#[test]
fn bad_inputs_are_rejected() {
    let toy = Toy::new(2);
    let (models, devices) = (toy.models(Mode::Heating), toy.devices());
    let m = meas(vec![21.0, f64::NAN], 40.0, 40.0, 5.0);
    let fc = forecast(2, 4, 21.0, 0.0);
    let (lo, hi) = bounds(2, 4, 20.0, 23.0);
    let hist = empty_history();
    let mut inp = HorizonInput {
        k: 0,
        horizon: 4,
        mode: Mode::Heating,
        models: &models,
        devices: &devices,
        meas: &m,
        history: &hist,
        forecast: &fc,
        lower: &lo,
        upper: &hi,
    };
    assert!(build_feasibility_lp(&inp, 100.0, None).is_err());
    let good = meas(vec![21.0, 21.0], 40.0, 40.0, 5.0);
    inp.meas = &good;
    inp.horizon = 5;
    assert!(build_feasibility_lp(&inp, 100.0, None).is_err());
    inp.horizon = 4;
    inp.mode = Mode::Cooling;
    assert!(build_feasibility_lp(&inp, 100.0, None).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// Widening by the optimal slacks leaves nothing to relax.
    #[test]
    fn optimal_slacks_are_sufficient(
        temps in prop::collection::vec(14.0f64..28.0, 2),
        loop_t in 15.0f64..50.0,
        ta in -5.0f64..15.0,
        lo in 19.0f64..22.0,
        width in 0.5f64..3.0,
        heating in any::<bool>(),
    ) {
        let mode = if heating { Mode::Heating } else { Mode::Cooling };
        let toy = Toy::new(2);
        let (models, devices) = (toy.models(mode), toy.devices());
        let m = meas(temps, loop_t, loop_t, 5.0);
        let fc = forecast(2, 6, ta, 0.0);
        let (lower, upper) = bounds(2, 6, lo, lo + width);
        let hist = empty_history();
        let inp = HorizonInput {
            k: 0, horizon: 6, mode, models: &models, devices: &devices, meas: &m,
            history: &hist, forecast: &fc, lower: &lower, upper: &upper,
        };
        let (lp, layout) = build_feasibility_lp(&inp, 100.0, None).unwrap();
        let r = solve_lp(&lp).unwrap();
        prop_assert_eq!(r.status, Status::Optimal);
        prop_assert!(r.objective >= -1e-9);
        let relax = relaxation_from(&layout, &r.x);
        let weighted = relax.comfort_total() + 100.0 * relax.technical_total();
        prop_assert!((weighted - r.objective).abs() <= 1e-6 * r.objective.abs().max(1.0));

        let (lp2, _) = build_feasibility_lp(&inp, 100.0, Some(&relax)).unwrap();
        let r2 = solve_lp(&lp2).unwrap();
        prop_assert!(r2.objective.abs() < 1e-6, "residual {}", r2.objective);
    }
}
