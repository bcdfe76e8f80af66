//! Adam, norm clipping and the plateau learning-rate scheduler.

use serde::{Deserialize, Serialize};

use super::TrainError;

pub const BETA1: f64 = 0.9;
pub const BETA2: f64 = 0.999;
pub const EPSILON: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub struct Adam {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub step: u64,
}

impl Adam {
    pub fn new(n: usize) -> Self {
        Self {
            m: vec![0.0; n],
            v: vec![0.0; n],
            step: 0,
        }
    }

    /// Bias-corrected Adam update in place.
    pub fn step(&mut self, params: &mut [f64], grads: &[f64], lr: f64) -> Result<(), TrainError> {
        if params.len() != grads.len() || params.len() != self.m.len() {
            return Err(TrainError::Length {
                params: params.len(),
                grads: grads.len(),
                state: self.m.len(),
            });
        }
        if let Some(index) = grads.iter().position(|g| !g.is_finite()) {
            return Err(TrainError::NonFiniteGradient {
                index,
                value: grads[index],
            });
        }
        self.step += 1;
        let b1 = 1.0 - BETA1.powi(self.step as i32);
        let b2 = 1.0 - BETA2.powi(self.step as i32);
        for i in 0..params.len() {
            let g = grads[i];
            self.m[i] = BETA1 * self.m[i] + (1.0 - BETA1) * g;
            self.v[i] = BETA2 * self.v[i] + (1.0 - BETA2) * g * g;
            let m_hat = self.m[i] / b1;
            let v_hat = self.v[i] / b2;
            params[i] -= lr * m_hat / (v_hat.sqrt() + EPSILON);
        }
        Ok(())
    }
}

pub fn l2_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Rescale so the norm is at most `max_norm`. Returns the norm before
/// clipping.
pub fn clip_gradients(grads: &mut [f64], max_norm: f64) -> f64 {
    assert!(max_norm > 0.0, "max_norm must be positive");
    let norm = l2_norm(grads);
    if norm > max_norm {
        let s = max_norm / norm;
        for g in grads.iter_mut() {
            *g *= s;
        }
    }
    norm
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlateauConfig {
    pub factor: f64,
    pub patience: usize,
    pub min_lr: f64,
}

/// Reduce-on-plateau: an epoch improves only if its loss is strictly below
/// the best seen.
#[derive(Clone, Debug, PartialEq)]
pub struct Plateau {
    pub config: PlateauConfig,
    pub lr: f64,
    pub best: f64,
    pub stagnant: usize,
}

impl Plateau {
    pub fn new(lr: f64, config: PlateauConfig) -> Self {
        Self {
            config,
            lr,
            best: f64::INFINITY,
            stagnant: 0,
        }
    }

    /// Feed one epoch loss; returns the learning rate for the next step.
    pub fn step(&mut self, loss: f64) -> f64 {
        if loss < self.best {
            self.best = loss;
            self.stagnant = 0;
        } else {
            self.stagnant += 1;
            if self.stagnant >= self.config.patience {
                self.lr = (self.lr * self.config.factor).max(self.config.min_lr).min(self.lr);
                self.stagnant = 0;
            }
        }
        self.lr
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn adam_examples() {
        let mut p = vec![1.0, -2.0];
        let mut a = Adam::new(2);
        a.step(&mut p, &[0.0, 0.0], 0.1).unwrap();
        assert_eq!(p, vec![1.0, -2.0]);

        let mut p = vec![0.0, 0.0, 0.0];
        let mut a = Adam::new(3);
        a.step(&mut p, &[0.3, -5.0, 0.3], 0.01).unwrap();
        // m_hat = g, v_hat = g^2, so the step is lr * g / (|g| + eps)
        assert!((p[0] + 0.01 * 0.3 / (0.3 + 1e-8)).abs() < 1e-15);
        assert!((p[1] - 0.01 * 5.0 / (5.0 + 1e-8)).abs() < 1e-15);
        a.step(&mut p, &[0.1, 0.2, 0.1], 0.01).unwrap();
        assert_eq!(a.m[0], a.m[2]);
        assert_eq!(a.v[0], a.v[2]);
        assert_eq!(p[0], p[2]);

        let err = a.step(&mut p, &[0.0, f64::NAN, 0.0], 0.01).unwrap_err();
        assert!(matches!(err, TrainError::NonFiniteGradient { index: 1, .. }));
        assert!(a.step(&mut p, &[0.0], 0.01).is_err());
    }

    #[test]
    fn clipping_examples() {
        let mut g = vec![0.0, 2.0];
        assert_eq!(clip_gradients(&mut g, 1.0), 2.0);
        assert_eq!(g, vec![0.0, 1.0]);
        let mut g = vec![0.3, 0.4];
        clip_gradients(&mut g, 1.0);
        assert_eq!(g, vec![0.3, 0.4]);
    }

    proptest! {
        #[test]
        fn clipped_norm_is_min_of_norm_and_limit(
            g in proptest::collection::vec(-100.0f64..100.0, 1..50), max in 0.01f64..10.0
        ) {
            let before = l2_norm(&g);
            let mut c = g.clone();
            clip_gradients(&mut c, max);
            prop_assert!((l2_norm(&c) - before.min(max)).abs() < 1e-12);
        }

        #[test]
        fn scheduler_lr_is_non_increasing_and_bounded(
            losses in proptest::collection::vec(0.0f64..1.0, 1..300), patience in 1usize..10
        ) {
            let mut s = Plateau::new(1e-3, PlateauConfig { factor: 0.5, patience, min_lr: 1e-6 });
            let mut last = s.lr;
            for l in losses {
                let lr = s.step(l);
                prop_assert!(lr <= last && lr >= 1e-6);
                last = lr;
            }
        }
    }

    #[test]
    fn plateau_examples() {
        let dv = PlateauConfig {
            factor: 0.9,
            patience: 1000,
            min_lr: 1e-6,
        };
        let mut s = Plateau::new(0.005, dv);
        s.step(1.0);
        for _ in 0..999 {
            assert_eq!(s.step(1.0), 0.005);
        }
        assert!((s.step(1.0) - 0.0045).abs() < 1e-15);

        let cv = PlateauConfig {
            factor: 0.5,
            patience: 20,
            min_lr: 1e-6,
        };
        let mut s = Plateau::new(1e-4, cv);
        s.step(1.0);
        for _ in 0..20 {
            s.step(2.0);
        }
        assert_eq!(s.lr, 5e-5);

        let mut s = Plateau::new(1e-6, cv);
        for _ in 0..100 {
            s.step(1.0);
        }
        assert_eq!(s.lr, 1e-6);

        // a strictly lower loss resets the counter
        let mut s = Plateau::new(1e-4, cv);
        s.step(1.0);
        for i in 0..40 {
            s.step(if i == 15 { 0.5 } else { 1.0 });
        }
        assert_eq!(s.lr, 5e-5);
    }
}
