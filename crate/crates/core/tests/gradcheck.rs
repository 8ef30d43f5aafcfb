mod common;

use aia::models::ArchKind;
use common::grads::{adv_loss_gradient_error, op_errors, parameter_gradient_error};

const TOL: f64 = 1e-4;

#[test]
fn every_op_matches_central_differences() {
    let errors = op_errors();
    assert!(errors.len() >= 17);
    for (name, err) in errors {
        assert!(err < TOL, "{name}: max relative error {err:e}");
    }
}

#[test]
fn adversarial_objective_tcn() {
    for lambda in [0.0, 0.1, 1.0] {
        let err = adv_loss_gradient_error(ArchKind::Tcn, lambda);
        assert!(err < TOL, "lambda {lambda}: {err:e}");
    }
}

#[test]
fn adversarial_objective_gru() {
    for lambda in [0.0, 0.1] {
        let err = adv_loss_gradient_error(ArchKind::Gru, lambda);
        assert!(err < TOL, "lambda {lambda}: {err:e}");
    }
}

#[test]
fn parameter_gradients_of_training_loss() {
    for kind in [ArchKind::Tcn, ArchKind::Gru] {
        let err = parameter_gradient_error(kind);
        assert!(err < TOL, "{kind}: {err:e}");
    }
}
