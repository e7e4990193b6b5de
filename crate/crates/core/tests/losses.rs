use margin_core::losses::*;
use margin_core::rng;
use proptest::prelude::*;
use rand::Rng;

fn binary_entropy_bits(p: f64) -> f64 {
    let term = |q: f64| if q > 0.0 { -q * q.log2() } else { 0.0 };
    term(p) + term(1.0 - p)
}

/// Closed-form calibration gaps.
fn gap_closed_form(loss: Loss, theta: f64) -> f64 {
    match loss {
        Loss::Hinge => theta,
        Loss::Logistic => 1.0 - binary_entropy_bits((1.0 + theta) / 2.0),
        Loss::Exponential => 1.0 - (1.0 - theta * theta).sqrt(),
        Loss::Quadratic => theta * theta,
    }
}

#[test]
fn subgradient_inequality() {
    let mut r = rng::seeded(17);
    for loss in Loss::ALL {
        for _ in 0..10_000 {
            let a: f64 = r.gen_range(-8.0..8.0);
            let b: f64 = if r.gen_bool(0.05) { 1.0 } else { r.gen_range(-8.0..8.0) };
            let a = if r.gen_bool(0.05) { 1.0 } else { a };
            let sub = loss.subdifferential(a);
            for g in [sub.lo, sub.hi] {
                let slack = loss.value(b) - loss.value(a) - g * (b - a);
                assert!(slack >= -1e-10, "{loss} α={a} β={b} g={g}: {slack}");
            }
        }
    }
}

#[test]
fn minimizer_beats_dense_grid() {
    let grid: Vec<f64> = (0..100_000).map(|i| -30.0 + 60.0 * i as f64 / 99_999.0).collect();
    for loss in Loss::ALL {
        for eta in [0.02, 0.1, 0.3, 0.5, 0.55, 0.8, 0.97] {
            let best = match loss.conditional_minimizer(eta).finite() {
                Some(a) => loss.conditional_risk(eta, a),
                None => loss.optimal_conditional_risk(eta),
            };
            assert!((best - loss.optimal_conditional_risk(eta)).abs() <= 1e-9);
            for &a in &grid {
                assert!(best <= loss.conditional_risk(eta, a) + 1e-9, "{loss} η={eta} α={a}");
            }
        }
    }
}

#[test]
fn psi_matches_closed_forms_and_is_convex_monotone() {
    for loss in Loss::ALL {
        let psi: Vec<f64> = (0..=1000)
            .map(|i| loss.psi_transform(i as f64 / 1000.0).unwrap())
            .collect();
        for (i, &v) in psi.iter().enumerate() {
            let theta = i as f64 / 1000.0;
            assert!((v - gap_closed_form(loss, theta)).abs() <= 1e-9, "{loss} θ={theta}");
        }
        assert!(psi.windows(2).all(|w| w[1] >= w[0] - 1e-15));
        assert!(psi.windows(3).all(|w| w[0] + w[2] - 2.0 * w[1] >= -1e-12));
    }
    for i in 0..=1000 {
        let theta = i as f64 / 1000.0;
        assert!((Loss::Hinge.psi_transform(theta).unwrap() - theta).abs() <= 1e-6);
    }
}

#[test]
fn calibration_gap_needs_no_envelope() {
    for loss in Loss::ALL {
        let gap: Vec<f64> = (0..=2000).map(|i| loss.calibration_gap(i as f64 / 2000.0)).collect();
        assert!(gap.windows(3).all(|w| w[0] + w[2] - 2.0 * w[1] >= -1e-12), "{loss}");
    }
}

#[test]
fn wrong_sign_risk_is_phi_at_zero() {
    for loss in Loss::ALL {
        for eta in [0.0, 0.3, 0.5, 0.9, 1.0] {
            assert_eq!(loss.wrong_sign_conditional_risk(eta), loss.at_zero());
            assert_eq!(loss.at_zero(), 1.0);
        }
    }
}

#[test]
fn hinge_has_no_link() {
    assert_eq!(Loss::Hinge.invert_link(0.3), ProbabilityEstimate::Unavailable);
}

proptest! {
    #[test]
    fn link_inverts_minimizer(eta in 0.01f64..0.99) {
        for loss in [Loss::Logistic, Loss::Exponential, Loss::Quadratic] {
            let a = loss.conditional_minimizer(eta).finite().unwrap();
            let back = loss.invert_link(a).probability().unwrap();
            prop_assert!((back - eta).abs() <= 1e-9);
        }
    }

    #[test]
    fn surrogates_bound_zero_one_loss(a in -50.0f64..50.0) {
        for loss in Loss::ALL {
            let zero_one = if a > 0.0 { 0.0 } else { 1.0 };
            prop_assert!(loss.value(a) >= zero_one);
        }
    }
}
