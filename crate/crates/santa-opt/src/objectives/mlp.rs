//! Feedforward ReLU classifier with softmax cross-entropy loss and
//! minibatch likelihood scaling.
//!
//! Parameters are stored flattened as [W1 (in×h1, row-major), b1, W2, b2, ...].
//! The potential on a minibatch of m indices is
//!
//!   Ũ(θ) = (τ/2)·θᵀθ + (N/m)·Σ_j CE(x_ij, y_ij)
//!
//! where τ is the prior precision (0 by default, pure loss) and N the
//! training-set size, so ∇Ũ is an unbiased estimator of the full-data ∇U.

use super::{Dataset, Objective, ObjectiveError};
use crate::core::{NoiseSource, ParamVector};

#[derive(Debug, Clone)]
pub struct MlpClassifier {
    layers: Vec<usize>,
    dataset: Dataset,
    prior_precision: f64,
    dim: usize,
}

impl MlpClassifier {
    /// `layers` gives every layer width including input and output, e.g.
    /// [784, 100, 10]. The output width must match the dataset's class count
    /// and the input width its feature dimension.
    pub fn new(
        layers: Vec<usize>,
        dataset: Dataset,
        prior_precision: f64,
    ) -> Result<Self, ObjectiveError> {
        if layers.len() < 2 {
            return Err(ObjectiveError::DimMismatch {
                expected: 2,
                got: layers.len(),
            });
        }
        if layers[0] != dataset.feature_dim() {
            return Err(ObjectiveError::DimMismatch {
                expected: dataset.feature_dim(),
                got: layers[0],
            });
        }
        if *layers.last().unwrap() != dataset.classes() {
            return Err(ObjectiveError::DimMismatch {
                expected: dataset.classes(),
                got: *layers.last().unwrap(),
            });
        }
        let dim = layers.windows(2).map(|w| w[0] * w[1] + w[1]).sum::<usize>();
        Ok(Self {
            layers,
            dataset,
            prior_precision,
            dim,
        })
    }

    pub fn layers(&self) -> &[usize] {
        &self.layers
    }

    pub fn dataset(&self) -> &Dataset {
        &self.dataset
    }

    /// Glorot-uniform initial parameters: W ~ U(±√(6/(fan_in+fan_out))),
    /// biases zero. Uniform variates come from a 2^24-level grid on the
    /// shared noise stream.
    pub fn init_params(&self, noise: &mut dyn NoiseSource) -> ParamVector {
        let mut values = Vec::with_capacity(self.dim);
        for w in self.layers.windows(2) {
            let (fan_in, fan_out) = (w[0], w[1]);
            let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
            for _ in 0..fan_in * fan_out {
                let u = noise.index_below(1 << 24) as f64 / (1 << 24) as f64;
                values.push(bound * (2.0 * u - 1.0));
            }
            values.resize(values.len() + fan_out, 0.0);
        }
        ParamVector::from_vec(values).expect("initialization values are finite")
    }

    fn check_theta(&self, theta: &ParamVector) -> Result<(), ObjectiveError> {
        if theta.len() != self.dim {
            return Err(ObjectiveError::DimMismatch {
                expected: self.dim,
                got: theta.len(),
            });
        }
        Ok(())
    }

    /// Forward pass over a stacked input batch (m rows of `layers[0]`
    /// features); returns per-layer post-activation values (activations[0]
    /// is the input) and the final logits.
    fn forward(&self, theta: &[f64], input: Vec<f64>, m: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
        let mut activations: Vec<Vec<f64>> = Vec::with_capacity(self.layers.len());
        activations.push(input);

        let mut offset = 0usize;
        let n_links = self.layers.len() - 1;
        for (l, w) in self.layers.windows(2).enumerate() {
            let (din, dout) = (w[0], w[1]);
            let weights = &theta[offset..offset + din * dout];
            let biases = &theta[offset + din * dout..offset + din * dout + dout];
            offset += din * dout + dout;

            let prev = activations.last().unwrap();
            let mut out = vec![0.0f64; m * dout];
            for s in 0..m {
                let x = &prev[s * din..(s + 1) * din];
                let z = &mut out[s * dout..(s + 1) * dout];
                z.copy_from_slice(biases);
                for (i, &xi) in x.iter().enumerate() {
                    if xi == 0.0 {
                        continue;
                    }
                    let wrow = &weights[i * dout..(i + 1) * dout];
                    for (zj, &wij) in z.iter_mut().zip(wrow) {
                        *zj += xi * wij;
                    }
                }
            }
            if l + 1 < n_links {
                for z in out.iter_mut() {
                    if *z < 0.0 {
                        *z = 0.0;
                    }
                }
            }
            activations.push(out);
        }
        let logits = activations.pop().unwrap();
        (activations, logits)
    }

    /// Class predictions (argmax of logits) for the given rows of `data`.
    pub fn predict(&self, theta: &ParamVector, data: &Dataset, rows: &[usize]) -> Vec<usize> {
        let m = rows.len();
        let classes = *self.layers.last().unwrap();
        let mut input = Vec::with_capacity(m * data.feature_dim());
        for &r in rows {
            input.extend_from_slice(data.row(r));
        }
        let (_, logits) = self.forward(theta.as_slice(), input, m);
        (0..m)
            .map(|s| {
                let z = &logits[s * classes..(s + 1) * classes];
                let mut best = 0usize;
                for (j, &v) in z.iter().enumerate() {
                    if v > z[best] {
                        best = j;
                    }
                }
                best
            })
            .collect()
    }

    /// Fraction of misclassified examples over an entire dataset.
    pub fn test_error(&self, theta: &ParamVector, data: &Dataset) -> f64 {
        let rows: Vec<usize> = (0..data.len()).collect();
        let preds = self.predict(theta, data, &rows);
        let wrong = preds
            .iter()
            .zip(rows.iter())
            .filter(|(&p, &r)| p != data.label(r))
            .count();
        wrong as f64 / data.len().max(1) as f64
    }
}

impl Objective for MlpClassifier {
    fn dim(&self) -> usize {
        self.dim
    }

    fn n_data(&self) -> usize {
        self.dataset.len()
    }

    fn eval_batch(
        &self,
        theta: &ParamVector,
        batch: &[usize],
    ) -> Result<(f64, ParamVector), ObjectiveError> {
        self.check_theta(theta)?;
        let n = self.dataset.len();
        for &i in batch {
            if i >= n {
                return Err(ObjectiveError::IndexOutOfRange { index: i, n });
            }
        }
        let m = batch.len().max(1);
        let scale = n as f64 / m as f64;
        let classes = *self.layers.last().unwrap();
        let th = theta.as_slice();

        let mut input = Vec::with_capacity(batch.len() * self.layers[0]);
        for &r in batch {
            input.extend_from_slice(self.dataset.row(r));
        }
        let (activations, logits) = self.forward(th, input, batch.len());

        // Softmax cross-entropy and the output delta (N/m)·(softmax − onehot).
        let mut loss = 0.0f64;
        let mut delta = vec![0.0f64; batch.len() * classes];
        for (s, &row) in batch.iter().enumerate() {
            let z = &logits[s * classes..(s + 1) * classes];
            let zmax = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let mut sum = 0.0;
            for &v in z {
                sum += (v - zmax).exp();
            }
            let log_sum = sum.ln() + zmax;
            let y = self.dataset.label(row);
            loss += log_sum - z[y];
            let d = &mut delta[s * classes..(s + 1) * classes];
            for (j, &v) in z.iter().enumerate() {
                d[j] = scale * ((v - log_sum).exp() - if j == y { 1.0 } else { 0.0 });
            }
        }

        // Backpropagate through the stack, writing gradients layer by layer.
        let mut grad = vec![0.0f64; self.dim];
        let layer_offsets: Vec<usize> = {
            let mut off = vec![0usize];
            for w in self.layers.windows(2) {
                off.push(off.last().unwrap() + w[0] * w[1] + w[1]);
            }
            off
        };
        let mut current_delta = delta;
        for l in (0..self.layers.len() - 1).rev() {
            let (din, dout) = (self.layers[l], self.layers[l + 1]);
            let offset = layer_offsets[l];
            let prev = &activations[l];
            let weights = &th[offset..offset + din * dout];
            {
                let (gw, gb) = grad[offset..offset + din * dout + dout].split_at_mut(din * dout);
                for s in 0..batch.len() {
                    let x = &prev[s * din..(s + 1) * din];
                    let d = &current_delta[s * dout..(s + 1) * dout];
                    for (i, &xi) in x.iter().enumerate() {
                        if xi == 0.0 {
                            continue;
                        }
                        let grow = &mut gw[i * dout..(i + 1) * dout];
                        for (gij, &dj) in grow.iter_mut().zip(d) {
                            *gij += xi * dj;
                        }
                    }
                    for (gbj, &dj) in gb.iter_mut().zip(d) {
                        *gbj += dj;
                    }
                }
            }
            if l > 0 {
                // delta_prev = (delta · Wᵀ) ⊙ relu'(prev)
                let mut next_delta = vec![0.0f64; batch.len() * din];
                for s in 0..batch.len() {
                    let d = &current_delta[s * dout..(s + 1) * dout];
                    let nd = &mut next_delta[s * din..(s + 1) * din];
                    let x = &prev[s * din..(s + 1) * din];
                    for i in 0..din {
                        if x[i] <= 0.0 {
                            continue; // ReLU gate: gradient flows only where active
                        }
                        let wrow = &weights[i * dout..(i + 1) * dout];
                        let mut acc = 0.0;
                        for (wij, &dj) in wrow.iter().zip(d) {
                            acc += wij * dj;
                        }
                        nd[i] = acc;
                    }
                }
                current_delta = next_delta;
            }
        }

        let mut potential = scale * loss;
        if self.prior_precision != 0.0 {
            potential += 0.5 * self.prior_precision * theta.dot(theta);
            for (g, &t) in grad.iter_mut().zip(th) {
                *g += self.prior_precision * t;
            }
        }
        if !potential.is_finite() {
            return Err(ObjectiveError::Core(crate::core::CoreError::NonFinite {
                context: "mlp potential".to_string(),
                index: 0,
            }));
        }
        Ok((potential, ParamVector::from_vec(grad)?))
    }
}
