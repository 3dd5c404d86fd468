//! Deep-cut ellipsoid method for convex minimization over a convex set
//! described by a separation oracle.
//!
//! The ellipsoid `{x : (x - c)^T P^{-1} (x - c) <= 1}` is stored through its
//! center `c` and shape matrix `P`. Each step either cuts away an infeasible
//! center or, at a feasible center with subgradient `s`, keeps the half space
//! `s^T (x - c) <= best - f(c)` that must contain every better point.

/// What the caller learned about the current center.
pub enum Probe {
    /// The center violates `a^T x <= b`; `excess = a^T c - b > 0`.
    Infeasible { normal: Vec<f64>, excess: f64 },
    /// The center is feasible with objective `value` and a subgradient.
    Feasible { value: f64, subgradient: Vec<f64> },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipsoidSettings {
    /// Stop once `sqrt(s^T P s)` at a feasible center drops below this.
    pub tolerance: f64,
    pub max_iter: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EllipsoidOutcome {
    /// Best feasible center visited, if any.
    pub best: Option<Vec<f64>>,
    pub best_value: f64,
    pub iterations: usize,
    pub converged: bool,
    /// `sqrt(s^T P s)` at the last feasible center; bounds `f(c) - f*`.
    pub last_width: f64,
}

#[derive(Debug, Clone)]
pub struct Ellipsoid {
    dim: usize,
    center: Vec<f64>,
    shape: Vec<f64>,
}

impl Ellipsoid {
    /// Ball of the given radius around `center`.
    pub fn ball(center: Vec<f64>, radius: f64) -> Self {
        let dim = center.len();
        let mut shape = vec![0.0; dim * dim];
        for i in 0..dim {
            shape[i * dim + i] = radius * radius;
        }
        Ellipsoid { dim, center, shape }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    fn shape_times(&self, a: &[f64]) -> Vec<f64> {
        let n = self.dim;
        (0..n)
            .map(|i| {
                let row = &self.shape[i * n..(i + 1) * n];
                row.iter().zip(a).map(|(p, x)| p * x).sum()
            })
            .collect()
    }

    /// `sqrt(a^T P a)`: half-width of the ellipsoid along `a`.
    pub fn width(&self, a: &[f64]) -> f64 {
        let pa = self.shape_times(a);
        pa.iter().zip(a).map(|(x, y)| x * y).sum::<f64>().max(0.0).sqrt()
    }

    /// Keeps `{x : a^T (x - c) <= -depth}`. Returns `false` when the cut
    /// leaves nothing (depth at least the full width) or the shape has
    /// numerically degenerated.
    pub fn cut(&mut self, a: &[f64], depth: f64) -> bool {
        let n = self.dim;
        let pa = self.shape_times(a);
        let apa: f64 = pa.iter().zip(a).map(|(x, y)| x * y).sum();
        if apa.is_nan() || apa <= 0.0 || !apa.is_finite() {
            return false;
        }
        let width = apa.sqrt();
        let alpha = (depth / width).max(0.0);
        if alpha >= 1.0 {
            return false;
        }
        let b: Vec<f64> = pa.iter().map(|v| v / width).collect();

        if n == 1 {
            self.center[0] -= 0.5 * (1.0 + alpha) * b[0];
            self.shape[0] *= 0.25 * (1.0 - alpha) * (1.0 - alpha);
            return true;
        }

        let nf = n as f64;
        let tau = (1.0 + nf * alpha) / (nf + 1.0);
        let sigma = 2.0 * (1.0 + nf * alpha) / ((nf + 1.0) * (1.0 + alpha));
        let delta = nf * nf * (1.0 - alpha * alpha) / (nf * nf - 1.0);
        for (c, bi) in self.center.iter_mut().zip(&b) {
            *c -= tau * bi;
        }
        for i in 0..n {
            for j in i..n {
                let v = delta * (self.shape[i * n + j] - sigma * b[i] * b[j]);
                self.shape[i * n + j] = v;
                self.shape[j * n + i] = v;
            }
        }
        true
    }

    /// Runs the method until the width test passes or the budget runs out.
    pub fn minimize<F>(mut self, settings: EllipsoidSettings, mut probe: F) -> EllipsoidOutcome
    where
        F: FnMut(&[f64]) -> Probe,
    {
        let mut best: Option<Vec<f64>> = None;
        let mut best_value = f64::INFINITY;
        let mut last_width = f64::INFINITY;
        let mut converged = false;
        let mut iterations = 0;

        while iterations < settings.max_iter {
            iterations += 1;
            let ok = match probe(&self.center) {
                Probe::Infeasible { normal, excess } => self.cut(&normal, excess.max(0.0)),
                Probe::Feasible { value, subgradient } => {
                    if value < best_value {
                        best_value = value;
                        best = Some(self.center.clone());
                    }
                    last_width = self.width(&subgradient);
                    if last_width <= settings.tolerance {
                        converged = true;
                        break;
                    }
                    self.cut(&subgradient, value - best_value)
                }
            };
            if !ok {
                // The cut emptied the ellipsoid: no better point remains
                // beyond floating-point resolution.
                converged = last_width.is_finite();
                break;
            }
        }

        EllipsoidOutcome {
            best,
            best_value,
            iterations,
            converged,
            last_width,
        }
    }
}
