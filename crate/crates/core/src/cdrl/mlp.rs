//! Fully connected networks with batched forward and reverse passes.
//!
//! Parameters live in one flat vector, layer by layer: the weight matrix
//! (row-major, `out × in`) followed by the bias. Hidden layers use ReLU.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::RngStream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Activation {
    Identity,
    Relu,
    Sigmoid,
}

impl Activation {
    fn apply(self, v: &mut [f64]) {
        match self {
            Activation::Identity => {}
            Activation::Relu => v.iter_mut().for_each(|x| *x = x.max(0.0)),
            Activation::Sigmoid => v.iter_mut().for_each(|x| *x = sigmoid(*x)),
        }
    }

    /// Multiplies `grad` by the derivative, expressed through the output `y`.
    fn backprop(self, y: &[f64], grad: &mut [f64]) {
        match self {
            Activation::Identity => {}
            Activation::Relu => grad.iter_mut().zip(y).for_each(|(g, y)| {
                if *y <= 0.0 {
                    *g = 0.0
                }
            }),
            Activation::Sigmoid => grad.iter_mut().zip(y).for_each(|(g, y)| *g *= y * (1.0 - y)),
        }
    }
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    sizes: Vec<usize>,
    output: Activation,
    params: Vec<f64>,
}

/// Activations of every layer for one batch, input first.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    batch: usize,
    acts: Vec<Vec<f64>>,
}

impl ForwardCache {
    pub fn output(&self) -> &[f64] {
        self.acts.last().expect("cache holds at least the input")
    }

    pub fn batch(&self) -> usize {
        self.batch
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0; 4];
    let ca = a.chunks_exact(4);
    let cb = b.chunks_exact(4);
    let tail: f64 = ca.remainder().iter().zip(cb.remainder()).map(|(x, y)| x * y).sum();
    for (x, y) in ca.zip(cb) {
        for k in 0..4 {
            acc[k] += x[k] * y[k];
        }
    }
    (acc[0] + acc[2]) + (acc[1] + acc[3]) + tail
}

/// Four dot products sharing `w`; each lane sums in the same order as
/// [`dot`], so blocked and single-row passes agree bit for bit.
#[inline]
fn dot4(w: &[f64], x: [&[f64]; 4]) -> [f64; 4] {
    let mut acc = [[0.0; 4]; 4];
    let n = w.len() / 4 * 4;
    let mut i = 0;
    while i < n {
        let wc = &w[i..i + 4];
        for (s, a) in acc.iter_mut().enumerate() {
            let xc = &x[s][i..i + 4];
            for k in 0..4 {
                a[k] += wc[k] * xc[k];
            }
        }
        i += 4;
    }
    let mut out = [0.0; 4];
    for (s, a) in acc.iter().enumerate() {
        let tail: f64 = w[n..].iter().zip(&x[s][n..]).map(|(p, q)| p * q).sum();
        out[s] = (a[0] + a[2]) + (a[1] + a[3]) + tail;
    }
    out
}

#[inline]
fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    for (y, x) in y.iter_mut().zip(x) {
        *y += a * x;
    }
}

/// `y += Σₖ a[k]·x[k]`.
#[inline]
fn axpy4(y: &mut [f64], a: [f64; 4], x: [&[f64]; 4]) {
    for (i, y) in y.iter_mut().enumerate() {
        *y += (a[0] * x[0][i] + a[1] * x[1][i]) + (a[2] * x[2][i] + a[3] * x[3][i]);
    }
}

/// `y += Σ coef[j]·rows[j]` over the listed `(coef, row)` pairs, four at a time.
#[inline]
fn accumulate(y: &mut [f64], pairs: &[(f64, &[f64])]) {
    let mut blocks = pairs.chunks_exact(4);
    for b in &mut blocks {
        axpy4(y, [b[0].0, b[1].0, b[2].0, b[3].0], [b[0].1, b[1].1, b[2].1, b[3].1]);
    }
    for (a, x) in blocks.remainder() {
        axpy(y, *a, x);
    }
}

impl Mlp {
    /// Fan-in uniform initialization, `U(±1/√in)`; the last layer uses
    /// `U(±final_init)` when `final_init > 0`.
    pub fn new(sizes: &[usize], output: Activation, final_init: f64, rng: &mut RngStream) -> Self {
        assert!(sizes.len() >= 2, "an MLP needs input and output sizes");
        assert!(sizes.iter().all(|s| *s > 0), "layer sizes must be positive");
        let n: usize = sizes.windows(2).map(|w| w[1] * (w[0] + 1)).sum();
        let mut params = Vec::with_capacity(n);
        let layers = sizes.len() - 1;
        for (l, w) in sizes.windows(2).enumerate() {
            let bound = if l + 1 == layers && final_init > 0.0 {
                final_init
            } else {
                1.0 / (w[0] as f64).sqrt()
            };
            for _ in 0..w[1] * (w[0] + 1) {
                params.push(rng.uniform(-bound, bound));
            }
        }
        Self {
            sizes: sizes.to_vec(),
            output,
            params,
        }
    }

    pub fn from_params(sizes: &[usize], output: Activation, params: Vec<f64>) -> Result<Self> {
        let n: usize = sizes.windows(2).map(|w| w[1] * (w[0] + 1)).sum();
        if sizes.len() < 2 || params.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "layer sizes {sizes:?} need {n} parameters, got {}",
                params.len()
            )));
        }
        Ok(Self {
            sizes: sizes.to_vec(),
            output,
            params,
        })
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn input_dim(&self) -> usize {
        self.sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.sizes.last().unwrap()
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn n_params(&self) -> usize {
        self.params.len()
    }

    fn layer_offsets(&self) -> Vec<usize> {
        let mut off = Vec::with_capacity(self.sizes.len());
        let mut o = 0;
        off.push(0);
        for w in self.sizes.windows(2) {
            o += w[1] * (w[0] + 1);
            off.push(o);
        }
        off
    }

    /// Forward pass over a row-major `batch × input_dim` block.
    pub fn forward(&self, input: &[f64], batch: usize) -> Result<ForwardCache> {
        let d = self.input_dim();
        if input.len() != batch * d {
            return Err(Error::DimensionMismatch(format!(
                "input of length {} is not {batch} × {d}",
                input.len()
            )));
        }
        let offsets = self.layer_offsets();
        let layers = self.sizes.len() - 1;
        let mut acts = Vec::with_capacity(layers + 1);
        acts.push(input.to_vec());
        for l in 0..layers {
            let (n_in, n_out) = (self.sizes[l], self.sizes[l + 1]);
            let w = &self.params[offsets[l]..offsets[l] + n_out * n_in];
            let b = &self.params[offsets[l] + n_out * n_in..offsets[l + 1]];
            let prev = &acts[l];
            let mut out = vec![0.0; batch * n_out];
            let full = batch / 4 * 4;
            for r in (0..full).step_by(4) {
                let x = [0, 1, 2, 3].map(|k| &prev[(r + k) * n_in..(r + k + 1) * n_in]);
                for o in 0..n_out {
                    let z = dot4(&w[o * n_in..(o + 1) * n_in], x);
                    for k in 0..4 {
                        out[(r + k) * n_out + o] = b[o] + z[k];
                    }
                }
            }
            for r in full..batch {
                let x = &prev[r * n_in..(r + 1) * n_in];
                for o in 0..n_out {
                    out[r * n_out + o] = b[o] + dot(&w[o * n_in..(o + 1) * n_in], x);
                }
            }
            let act = if l + 1 == layers { self.output } else { Activation::Relu };
            act.apply(&mut out);
            acts.push(out);
        }
        Ok(ForwardCache { batch, acts })
    }

    /// Single-sample convenience wrapper.
    pub fn predict(&self, input: &[f64]) -> Result<Vec<f64>> {
        Ok(self.forward(input, 1)?.output().to_vec())
    }

    /// Reverse pass from `grad_out` (∂L/∂output, `batch × output_dim`).
    ///
    /// Returns `(∂L/∂params, ∂L/∂input)`. Parameter gradients are skipped
    /// (empty vector) when `want_params` is false.
    pub fn backward(
        &self,
        cache: &ForwardCache,
        grad_out: &[f64],
        want_params: bool,
    ) -> Result<(Vec<f64>, Vec<f64>)> {
        self.backward_with(cache, grad_out, want_params, true)
    }

    /// As [`backward`](Self::backward); `want_input` false skips the input
    /// gradient and returns it empty.
    pub fn backward_with(
        &self,
        cache: &ForwardCache,
        grad_out: &[f64],
        want_params: bool,
        want_input: bool,
    ) -> Result<(Vec<f64>, Vec<f64>)> {
        let batch = cache.batch;
        let layers = self.sizes.len() - 1;
        if cache.acts.len() != layers + 1 || cache.acts[0].len() != batch * self.input_dim() {
            return Err(Error::DimensionMismatch("cache does not belong to this network".into()));
        }
        if grad_out.len() != batch * self.output_dim() {
            return Err(Error::DimensionMismatch(format!(
                "upstream gradient of length {} is not {batch} × {}",
                grad_out.len(),
                self.output_dim()
            )));
        }
        let offsets = self.layer_offsets();
        let mut grads = if want_params { vec![0.0; self.params.len()] } else { Vec::new() };
        let mut delta = grad_out.to_vec();
        for l in (0..layers).rev() {
            let (n_in, n_out) = (self.sizes[l], self.sizes[l + 1]);
            let act = if l + 1 == layers { self.output } else { Activation::Relu };
            act.backprop(&cache.acts[l + 1], &mut delta);
            let x = &cache.acts[l];
            // zero deltas (inactive ReLUs) are skipped
            let mut pairs: Vec<(f64, &[f64])> = Vec::with_capacity(batch.max(n_out));
            if want_params {
                let (gw, gb) = grads[offsets[l]..offsets[l + 1]].split_at_mut(n_out * n_in);
                for o in 0..n_out {
                    pairs.clear();
                    for (b, xrow) in x.chunks_exact(n_in).enumerate() {
                        let d = delta[b * n_out + o];
                        gb[o] += d;
                        if d != 0.0 {
                            pairs.push((d, xrow));
                        }
                    }
                    accumulate(&mut gw[o * n_in..(o + 1) * n_in], &pairs);
                }
            }
            if l == 0 && !want_input {
                delta = Vec::new();
                break;
            }
            let w = &self.params[offsets[l]..offsets[l] + n_out * n_in];
            let mut prev = vec![0.0; batch * n_in];
            for (prow, drow) in prev.chunks_exact_mut(n_in).zip(delta.chunks_exact(n_out)) {
                pairs.clear();
                for (o, d) in drow.iter().enumerate() {
                    if *d != 0.0 {
                        pairs.push((*d, &w[o * n_in..(o + 1) * n_in]));
                    }
                }
                accumulate(prow, &pairs);
            }
            delta = prev;
        }
        Ok((grads, delta))
    }

    /// `θ ← ρ·source + (1 − ρ)·θ`.
    pub fn soft_update_from(&mut self, source: &Mlp, rho: f64) {
        assert_eq!(self.sizes, source.sizes, "soft update between different shapes");
        for (t, s) in self.params.iter_mut().zip(&source.params) {
            *t = rho * s + (1.0 - rho) * *t;
        }
    }

    pub fn is_finite(&self) -> bool {
        self.params.iter().all(|p| p.is_finite())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_net_gives_zero_preactivation() {
        let net = Mlp::from_params(&[3, 4, 2], Activation::Identity, vec![0.0; 4 * 4 + 2 * 5]).unwrap();
        assert_eq!(net.predict(&[1.0, -2.0, 3.0]).unwrap(), vec![0.0, 0.0]);
        let sig = Mlp::from_params(&[3, 2], Activation::Sigmoid, vec![0.0; 8]).unwrap();
        assert_eq!(sig.predict(&[1.0, 2.0, 3.0]).unwrap(), vec![0.5, 0.5]);
    }

    #[test]
    fn single_linear_layer_is_matvec() {
        // W = [[1,2],[3,4],[5,6]], b = [0.5,-1,2]
        let p = vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 0.5, -1.0, 2.0];
        let net = Mlp::from_params(&[2, 3], Activation::Identity, p).unwrap();
        let y = net.forward(&[1.0, -1.0, 2.0, 0.5], 2).unwrap();
        assert_eq!(y.output(), &[-0.5, -2.0, 1.0, 3.5, 7.0, 15.0]);
    }

    #[test]
    fn shape_errors() {
        let mut rng = RngStream::new(1);
        let net = Mlp::new(&[3, 5, 2], Activation::Identity, 0.0, &mut rng);
        assert!(net.forward(&[1.0, 2.0], 1).is_err());
        let c = net.forward(&[1.0, 2.0, 3.0], 1).unwrap();
        assert!(net.backward(&c, &[1.0], true).is_err());
        assert!(Mlp::from_params(&[3, 2], Activation::Identity, vec![0.0; 3]).is_err());
    }

    #[test]
    fn final_layer_init_is_small() {
        let mut rng = RngStream::new(2);
        let net = Mlp::new(&[11, 256, 128, 5], Activation::Sigmoid, 3e-3, &mut rng);
        let n_last = 5 * 129;
        let tail = &net.params()[net.n_params() - n_last..];
        assert!(tail.iter().all(|p| p.abs() <= 3e-3));
        let head = &net.params()[..11 * 256];
        assert!(head.iter().any(|p| p.abs() > 0.1));
    }

    #[test]
    fn soft_update_contracts_by_one_minus_rho() {
        let mut rng = RngStream::new(3);
        let a = Mlp::new(&[4, 8, 2], Activation::Identity, 0.0, &mut rng);
        let mut b = Mlp::new(&[4, 8, 2], Activation::Identity, 0.0, &mut rng);
        let dist = |x: &Mlp, y: &Mlp| {
            x.params()
                .iter()
                .zip(y.params())
                .map(|(p, q)| (p - q).powi(2))
                .sum::<f64>()
                .sqrt()
        };
        let before = dist(&a, &b);
        b.soft_update_from(&a, 0.005);
        assert!((dist(&a, &b) - 0.995 * before).abs() < 1e-12 * before);
    }

    #[test]
    fn batched_matches_single() {
        let mut rng = RngStream::new(4);
        let net = Mlp::new(&[5, 16, 9, 3], Activation::Sigmoid, 0.0, &mut rng);
        let xs: Vec<f64> = (0..5 * 7).map(|_| rng.uniform(-1.0, 1.0)).collect();
        let batch = net.forward(&xs, 7).unwrap();
        for (b, x) in xs.chunks(5).enumerate() {
            let y = net.predict(x).unwrap();
            assert_eq!(&batch.output()[b * 3..(b + 1) * 3], y.as_slice());
        }
    }
}
