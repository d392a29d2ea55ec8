use physprop_core::gru::{gru_backward, gru_forward, train, GruParams, LossKind, TrainConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const EPS: f64 = 1e-5;

fn prediction(p: &GruParams, seq: &[f64]) -> f64 {
    gru_forward(p, seq).unwrap().0
}

#[test]
fn analytic_gradients_match_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    for draw in 0..24 {
        let hidden = rng.random_range(1..=6);
        let len = rng.random_range(1..=12);
        let mut p = GruParams::init(hidden, draw);
        for v in p.as_mut_slice() {
            *v *= 3.0;
        }
        let seq: Vec<f64> = (0..len).map(|_| rng.random_range(-1.5..1.5)).collect();
        let (_, cache) = gru_forward(&p, &seq).unwrap();
        let analytic = gru_backward(&p, &cache, 1.0).unwrap();
        for k in 0..p.as_slice().len() {
            let mut plus = p.clone();
            plus.as_mut_slice()[k] += EPS;
            let mut minus = p.clone();
            minus.as_mut_slice()[k] -= EPS;
            let numeric = (prediction(&plus, &seq) - prediction(&minus, &seq)) / (2.0 * EPS);
            let a = analytic.as_slice()[k];
            let scale = a.abs().max(numeric.abs());
            // Below this magnitude the difference quotient is pure rounding.
            if scale < 1e-7 {
                assert!(
                    (a - numeric).abs() < 1e-10,
                    "draw {draw} param {k}: {a} vs {numeric}"
                );
                continue;
            }
            let rel = (a - numeric).abs() / scale;
            worst = worst.max(rel);
            assert!(rel < 1e-4, "draw {draw} param {k}: {a} vs {numeric}");
        }
    }
    eprintln!("worst relative gradient error {worst:.3e}");
}

fn bounce_like(e: f64, len: usize) -> Vec<f64> {
    // Falling parabola to contact at a third of the clip, then one rebound.
    let tc = len as f64 / 3.0;
    (0..len)
        .map(|i| {
            let t = i as f64;
            if t <= tc {
                1.0 - (t / tc).powi(2)
            } else {
                let u = (t - tc) / tc;
                (e * e - (e - u).powi(2)).max(0.0) / 1.0
            }
        })
        .collect()
}

#[test]
fn single_example_overfits() {
    let data = vec![(bounce_like(0.6, 40), 0.6)];
    let config = TrainConfig {
        learning_rate: 0.005,
        batch_size: 1,
        epochs: 2000,
        seed: 5,
        loss: LossKind::L1,
        hidden: 16,
    };
    let out = train(&config, &data).unwrap();
    assert_eq!(out.model.steps, 2000);
    let loss = LossKind::L1.value(out.model.predict(&data[0].0).unwrap(), 0.6);
    eprintln!("final overfit loss {loss:.3e}");
    assert!(loss < 1e-3, "loss {loss}");
}

#[test]
fn noiseless_training_loss_does_not_increase() {
    let data: Vec<(Vec<f64>, f64)> = (1..=32)
        .map(|k| {
            let e = f64::from(k) / 33.0;
            (bounce_like(e, 30), e)
        })
        .collect();
    let config = TrainConfig {
        learning_rate: 0.05,
        batch_size: 8,
        epochs: 60,
        seed: 1,
        loss: LossKind::L1,
        hidden: 8,
    };
    let losses = train(&config, &data).unwrap().epoch_losses;
    eprintln!("losses {:?}", &losses[..5]);
    for w in losses.windows(2) {
        assert!(w[1] <= w[0] * 1.05, "{} -> {}", w[0], w[1]);
    }
    assert!(losses.last().unwrap() < &losses[0]);
}
