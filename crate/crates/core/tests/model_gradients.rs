mod common;

use common::{randn, rel_err, FD_EPS};
use tsuq::ndcore::{finite_diff_grad, RngStream};
use tsuq::neural::{build_model, objective, Architecture, LossKind, Model, ModelConfig, UqMethod};

fn check(arch: Architecture, method: UqMethod, seed: u64) -> f64 {
    let mut rng = RngStream::new(seed);
    let mut cfg = ModelConfig::new(arch, method, 2, 2);
    cfg.hidden_units = 4;
    cfg.past = 3;
    cfg.drop_prob = 0.3;
    let mut model = build_model(&cfg, &mut rng).unwrap();
    // zero biases would park dead units exactly on the ReLU corner
    for t in model.params_mut() {
        let jitter = randn(t.shape(), &mut rng).scale(0.1);
        t.axpy(1.0, &jitter).unwrap();
    }
    let x = randn(&[3, 3, 2], &mut rng);
    let y = randn(&[3, 2], &mut rng);
    let noise = model.sample_noise(3, &mut rng).unwrap();
    let loss = LossKind::for_method(method);
    let kl_weight = 0.3;
    let (_, grads) = objective(&model, &x, &y, &noise, loss, kl_weight).unwrap();
    assert_eq!(grads.len(), model.params().len());

    let mut worst: f64 = 0.0;
    for (k, g) in grads.iter().enumerate() {
        let base = model.params()[k].clone();
        let fd = finite_diff_grad(
            |t| {
                let mut probe: Model = model.clone();
                *probe.params_mut()[k] = t.clone();
                objective(&probe, &x, &y, &noise, loss, kl_weight)
                    .unwrap()
                    .0
            },
            &base,
            FD_EPS,
        )
        .unwrap();
        worst = worst.max(rel_err(g, &fd));
    }
    worst
}

#[test]
fn full_objective_matches_finite_differences() {
    for arch in Architecture::ALL {
        for method in UqMethod::ALL {
            for seed in 0..3 {
                let err = check(arch, method, seed);
                assert!(
                    err < 1e-4,
                    "{arch} {method} seed {seed}: relative error {err:e}"
                );
            }
        }
    }
}

#[test]
fn kl_only_touches_variational_models() {
    let mut rng = RngStream::new(1);
    for method in UqMethod::ALL {
        let cfg = ModelConfig::new(Architecture::Mlp, method, 1, 1);
        let model = build_model(&cfg, &mut rng).unwrap();
        let (kl, grads) = model.kl_with_grad().unwrap();
        if method.is_variational() {
            assert!(kl > 0.0);
        } else {
            assert_eq!(kl, 0.0);
            assert!(grads.iter().all(|g| g.data().iter().all(|v| *v == 0.0)));
        }
    }
}
