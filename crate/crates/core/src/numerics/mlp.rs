use serde::{Deserialize, Serialize};

use super::rng::Rng;
use super::scalar::Scalar;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Tanh,
    Relu,
}

impl Activation {
    fn apply<S: Scalar>(self, x: S) -> S {
        match self {
            Activation::Tanh => x.tanh(),
            Activation::Relu => x.relu(),
        }
    }

    /// Derivative expressed through the activation's output `y`.
    fn slope(self, y: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - y * y,
            Activation::Relu => {
                if y > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

/// Layer widths and hidden activations of a fully connected network.
///
/// `sizes = [in, h1, ..., out]`; one activation per hidden layer, the output
/// layer is affine.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MlpShape {
    sizes: Vec<usize>,
    activations: Vec<Activation>,
}

impl MlpShape {
    pub fn new(sizes: Vec<usize>, activations: Vec<Activation>) -> Result<Self> {
        if sizes.len() < 2 || sizes.contains(&0) {
            return Err(Error::config(format!("invalid layer sizes {sizes:?}")));
        }
        if activations.len() != sizes.len() - 2 {
            return Err(Error::config(format!(
                "{} hidden layers need {} activations, got {}",
                sizes.len() - 2,
                sizes.len() - 2,
                activations.len()
            )));
        }
        Ok(MlpShape { sizes, activations })
    }

    /// Hidden layers all using `activation`.
    pub fn uniform(input: usize, hidden: &[usize], output: usize, activation: Activation) -> Result<Self> {
        let mut sizes = Vec::with_capacity(hidden.len() + 2);
        sizes.push(input);
        sizes.extend_from_slice(hidden);
        sizes.push(output);
        Self::new(sizes, vec![activation; hidden.len()])
    }

    pub fn input_dim(&self) -> usize {
        self.sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.sizes.last().unwrap()
    }

    pub fn num_layers(&self) -> usize {
        self.sizes.len() - 1
    }

    pub fn num_params(&self) -> usize {
        self.sizes.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
    }

    /// `(weight offset, bias offset, fan_in, fan_out)` of layer `l`.
    fn layer_layout(&self, l: usize) -> (usize, usize, usize, usize) {
        let offset: usize = self.sizes[..=l].windows(2).map(|w| w[0] * w[1] + w[1]).sum();
        let (fan_in, fan_out) = (self.sizes[l], self.sizes[l + 1]);
        (offset, offset + fan_in * fan_out, fan_in, fan_out)
    }

    /// Forward pass with parameters and input in any scalar context.
    pub fn forward<S: Scalar>(&self, params: &[S], input: &[S]) -> Result<Vec<S>> {
        if params.len() != self.num_params() {
            return Err(Error::config(format!(
                "expected {} parameters, got {}",
                self.num_params(),
                params.len()
            )));
        }
        if input.len() != self.input_dim() {
            return Err(Error::config(format!(
                "network input has dimension {}, expected {}",
                input.len(),
                self.input_dim()
            )));
        }
        let mut h = input.to_vec();
        for l in 0..self.num_layers() {
            let (w, b, fan_in, fan_out) = self.layer_layout(l);
            let mut next = Vec::with_capacity(fan_out);
            for o in 0..fan_out {
                let row = &params[w + o * fan_in..w + (o + 1) * fan_in];
                let mut acc = params[b + o];
                for (wi, xi) in row.iter().zip(&h) {
                    acc = acc + *wi * *xi;
                }
                next.push(match self.activations.get(l) {
                    Some(act) => act.apply(acc),
                    None => acc,
                });
            }
            h = next;
        }
        Ok(h)
    }

    /// Forward pass in `f64` that also adds `∇_θ ⟨cotangent, f_θ(input)⟩`
    /// into `grad`. Returns the network output.
    pub fn backward(&self, params: &[f64], input: &[f64], cotangent: &[f64], grad: &mut [f64]) -> Result<Vec<f64>> {
        if grad.len() != params.len() || cotangent.len() != self.output_dim() {
            return Err(Error::config(format!(
                "backward needs {} gradient slots and {} cotangents",
                params.len(),
                self.output_dim()
            )));
        }
        let mut acts = vec![input.to_vec()];
        for l in 0..self.num_layers() {
            let next = self.forward_layer(params, l, &acts[l])?;
            acts.push(next);
        }
        let mut delta = cotangent.to_vec();
        for l in (0..self.num_layers()).rev() {
            let (w, b, fan_in, fan_out) = self.layer_layout(l);
            if let Some(act) = self.activations.get(l) {
                for (d, y) in delta.iter_mut().zip(&acts[l + 1]) {
                    *d *= act.slope(*y);
                }
            }
            let x = &acts[l];
            let mut back = vec![0.0; fan_in];
            for o in 0..fan_out {
                let d = delta[o];
                if d == 0.0 {
                    continue;
                }
                grad[b + o] += d;
                let row = w + o * fan_in;
                for i in 0..fan_in {
                    grad[row + i] += d * x[i];
                    back[i] += d * params[row + i];
                }
            }
            delta = back;
        }
        Ok(acts.pop().unwrap_or_default())
    }

    fn forward_layer(&self, params: &[f64], l: usize, h: &[f64]) -> Result<Vec<f64>> {
        if params.len() != self.num_params() || h.len() != self.sizes[l] {
            return Err(Error::config(format!(
                "layer {l} expects {} inputs and {} parameters in total",
                self.sizes[l],
                self.num_params()
            )));
        }
        let (w, b, fan_in, fan_out) = self.layer_layout(l);
        Ok((0..fan_out)
            .map(|o| {
                let row = &params[w + o * fan_in..w + (o + 1) * fan_in];
                let acc = params[b + o] + row.iter().zip(h).map(|(a, x)| a * x).sum::<f64>();
                match self.activations.get(l) {
                    Some(act) => act.apply(acc),
                    None => acc,
                }
            })
            .collect())
    }
}

/// Parameters of a fully connected network, stored flat layer by layer
/// (row-major weights followed by biases).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MlpParams {
    shape: MlpShape,
    params: Vec<f64>,
}

impl MlpParams {
    pub fn zeros(shape: MlpShape) -> Self {
        let params = vec![0.0; shape.num_params()];
        MlpParams { shape, params }
    }

    /// Uniform `±1/√fan_in` weights, zero biases; the last layer is scaled
    /// by `output_scale`.
    pub fn init(shape: MlpShape, output_scale: f64, rng: &mut Rng) -> Self {
        let mut p = Self::zeros(shape);
        let layers = p.shape.num_layers();
        for l in 0..layers {
            let (w, _, fan_in, fan_out) = p.shape.layer_layout(l);
            let bound = 1.0 / (fan_in as f64).sqrt();
            let scale = if l + 1 == layers { output_scale } else { 1.0 };
            for v in &mut p.params[w..w + fan_in * fan_out] {
                *v = scale * rng.uniform_range(-bound, bound);
            }
        }
        p
    }

    /// A single affine layer with identity weights.
    pub fn identity(dim: usize) -> Result<Self> {
        let mut p = Self::zeros(MlpShape::new(vec![dim, dim], vec![])?);
        for i in 0..dim {
            p.params[i * dim + i] = 1.0;
        }
        Ok(p)
    }

    pub fn from_flat(shape: MlpShape, params: Vec<f64>) -> Result<Self> {
        if params.len() != shape.num_params() {
            return Err(Error::config(format!(
                "expected {} parameters, got {}",
                shape.num_params(),
                params.len()
            )));
        }
        Ok(MlpParams { shape, params })
    }

    pub fn shape(&self) -> &MlpShape {
        &self.shape
    }

    pub fn flat(&self) -> &[f64] {
        &self.params
    }

    pub fn flat_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    /// Weight matrix (row-major, `fan_out × fan_in`) and bias of layer `l`.
    pub fn layer(&self, l: usize) -> (&[f64], &[f64]) {
        let (w, b, fan_in, fan_out) = self.shape.layer_layout(l);
        (&self.params[w..w + fan_in * fan_out], &self.params[b..b + fan_out])
    }

    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>> {
        self.shape.forward(&self.params, input)
    }

    /// `θ ← θ + step·direction`.
    pub fn add_scaled(&mut self, direction: &[f64], step: f64) {
        debug_assert_eq!(direction.len(), self.params.len());
        for (p, d) in self.params.iter_mut().zip(direction) {
            *p += step * d;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{finite_diff, relative_error, Tape};

    #[test]
    fn zero_network_outputs_zero() {
        let shape = MlpShape::uniform(3, &[4, 4], 2, Activation::Tanh).unwrap();
        let p = MlpParams::zeros(shape);
        assert_eq!(p.forward(&[1.0, -2.0, 3.0]).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn identity_layer_echoes_input() {
        let p = MlpParams::identity(3).unwrap();
        assert_eq!(p.forward(&[1.5, -2.0, 0.25]).unwrap(), vec![1.5, -2.0, 0.25]);
    }

    #[test]
    fn dimension_mismatch_is_config_error() {
        let p = MlpParams::identity(3).unwrap();
        assert!(matches!(p.forward(&[1.0]), Err(Error::Config(_))));
        assert!(MlpShape::new(vec![2, 3, 1], vec![]).is_err());
    }

    #[test]
    fn layer_views_follow_layout() {
        let shape = MlpShape::uniform(2, &[3], 1, Activation::Relu).unwrap();
        assert_eq!(shape.num_params(), 2 * 3 + 3 + 3 + 1);
        let p = MlpParams::from_flat(shape, (0..13).map(f64::from).collect()).unwrap();
        let (w0, b0) = p.layer(0);
        assert_eq!(w0, &[0.0, 1.0, 2.0, 3.0, 4.0, 5.0]);
        assert_eq!(b0, &[6.0, 7.0, 8.0]);
        let (w1, b1) = p.layer(1);
        assert_eq!(w1, &[9.0, 10.0, 11.0]);
        assert_eq!(b1, &[12.0]);
    }

    #[test]
    fn weight_gradient_matches_finite_differences() {
        let mut rng = Rng::new(3);
        let shape = MlpShape::uniform(3, &[5, 4], 1, Activation::Tanh).unwrap();
        let p = MlpParams::init(shape.clone(), 1.0, &mut rng);
        let input = [0.3, -0.8, 1.1];
        let tape = Tape::new();
        let vars = tape.vars(p.flat());
        let x = tape.constants(&input);
        let out = shape.forward(&vars, &x).unwrap()[0];
        let g = tape.gradient(out, &vars);
        let fd = finite_diff(|q| shape.forward(q, &input).unwrap()[0], p.flat(), 1e-5);
        assert!(relative_error(&g, &fd, 1e-8) < 1e-5);
    }

    #[test]
    fn backward_matches_the_tape() {
        let mut rng = Rng::new(4);
        for act in [Activation::Tanh, Activation::Relu] {
            let shape = MlpShape::uniform(4, &[6, 5], 3, act).unwrap();
            let p = MlpParams::init(shape.clone(), 1.0, &mut rng);
            let input = rng.normals(4);
            let cot = rng.normals(3);
            let tape = Tape::new();
            let vars = tape.vars(p.flat());
            let out = shape.forward(&vars, &tape.constants(&input)).unwrap();
            let dot = out.iter().zip(&cot).fold(tape.constant(0.0), |acc, (o, c)| acc + *o * *c);
            let expected = tape.gradient(dot, &vars);
            let mut g = vec![0.5; p.len()];
            let y = shape.backward(p.flat(), &input, &cot, &mut g).unwrap();
            assert_eq!(y, p.forward(&input).unwrap());
            for (a, b) in g.iter().zip(&expected) {
                assert!((a - 0.5 - b).abs() <= 1e-12 * (1.0 + b.abs()));
            }
        }
    }
}
