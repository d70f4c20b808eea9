use super::Tensor;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl AdamConfig {
    pub fn with_lr(lr: f64) -> Self {
        Self {
            lr,
            ..Self::default()
        }
    }
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// Adam with bias-corrected moments. Moment buffers are created lazily on
/// the first step and are matched to parameters by position.
#[derive(Clone, Debug)]
pub struct Adam<S> {
    cfg: AdamConfig,
    step: u64,
    m: Vec<Vec<S>>,
    v: Vec<Vec<S>>,
}

impl<S: Scalar> Adam<S> {
    pub fn new(cfg: AdamConfig) -> Result<Self> {
        if !(cfg.lr > 0.0) || !cfg.lr.is_finite() {
            return Err(Error::Parameter(format!("learning rate {} must be > 0", cfg.lr)));
        }
        Ok(Self {
            cfg,
            step: 0,
            m: Vec::new(),
            v: Vec::new(),
        })
    }

    pub fn steps_taken(&self) -> u64 {
        self.step
    }

    /// Applies one update to every parameter using its `grad` buffer; a
    /// missing buffer counts as a zero gradient.
    pub fn step(&mut self, params: &mut [&mut Tensor<S>]) -> Result<()> {
        if self.m.is_empty() {
            self.m = params.iter().map(|p| vec![S::zero(); p.len()]).collect();
            self.v = self.m.clone();
        }
        if self.m.len() != params.len() {
            return Err(Error::Usage(format!(
                "optimizer tracks {} parameters, got {}",
                self.m.len(),
                params.len()
            )));
        }
        self.step += 1;
        let t = self.step as f64;
        let (b1, b2) = (S::lit(self.cfg.beta1), S::lit(self.cfg.beta2));
        let bc1 = S::lit(1.0 - self.cfg.beta1.powf(t));
        let bc2 = S::lit(1.0 - self.cfg.beta2.powf(t));
        let lr = S::lit(self.cfg.lr);
        let eps = S::lit(self.cfg.eps);
        for ((p, m), v) in params.iter_mut().zip(&mut self.m).zip(&mut self.v) {
            if m.len() != p.len() {
                return Err(Error::Dimension("parameter size changed between steps".into()));
            }
            let Some(grad) = p.grad.take() else {
                // zero gradient: moments still decay
                for (mi, vi) in m.iter_mut().zip(v.iter_mut()) {
                    *mi *= b1;
                    *vi *= b2;
                }
                apply(p.data_mut(), m, v, lr, bc1, bc2, eps);
                continue;
            };
            for ((mi, vi), &g) in m.iter_mut().zip(v.iter_mut()).zip(&grad) {
                *mi = b1 * *mi + (S::one() - b1) * g;
                *vi = b2 * *vi + (S::one() - b2) * g * g;
            }
            apply(p.data_mut(), m, v, lr, bc1, bc2, eps);
            p.grad = Some(grad);
        }
        Ok(())
    }
}

fn apply<S: Scalar>(data: &mut [S], m: &[S], v: &[S], lr: S, bc1: S, bc2: S, eps: S) {
    for ((x, &mi), &vi) in data.iter_mut().zip(m).zip(v) {
        let mhat = mi / bc1;
        let vhat = vi / bc2;
        *x -= lr * mhat / (vhat.sqrt() + eps);
    }
}
