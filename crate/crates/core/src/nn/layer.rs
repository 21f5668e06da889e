use serde::{Deserialize, Serialize};

use super::Matrix;
use crate::error::{Error, Result};
use crate::rng::RngStream;

/// Fully connected layer computing `x·Wᵀ + b` with `W` stored out×in.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LinearLayer {
    pub weights: Matrix,
    pub bias: Vec<f64>,
    #[serde(skip)]
    cache: Option<Matrix>,
}

#[derive(Debug, Clone)]
pub struct LinearGrads {
    pub weights: Matrix,
    pub bias: Vec<f64>,
}

impl LinearLayer {
    pub fn new(weights: Matrix, bias: Vec<f64>) -> Result<Self> {
        if bias.len() != weights.rows() {
            return Err(Error::dim("LinearLayer::new", weights.rows(), bias.len()));
        }
        Ok(Self {
            weights,
            bias,
            cache: None,
        })
    }

    /// Glorot-uniform weights, zero bias.
    pub fn init(in_dim: usize, out_dim: usize, rng: &mut RngStream) -> Self {
        let limit = (6.0 / (in_dim + out_dim) as f64).sqrt();
        let data = (0..in_dim * out_dim)
            .map(|_| rng.uniform_range(-limit, limit))
            .collect();
        Self {
            weights: Matrix::from_vec(out_dim, in_dim, data).expect("sized by construction"),
            bias: vec![0.0; out_dim],
            cache: None,
        }
    }

    pub fn in_dim(&self) -> usize {
        self.weights.cols()
    }

    pub fn out_dim(&self) -> usize {
        self.weights.rows()
    }

    pub fn has_cache(&self) -> bool {
        self.cache.is_some()
    }

    pub fn clear_cache(&mut self) {
        self.cache = None;
    }

    /// Forward pass; the input is kept for [`LinearLayer::backward`] only when `train` is set.
    pub fn forward(&mut self, x: &Matrix, train: bool) -> Result<Matrix> {
        let out = self.apply(x)?;
        self.cache = if train { Some(x.clone()) } else { None };
        Ok(out)
    }

    /// Stateless forward pass.
    pub fn apply(&self, x: &Matrix) -> Result<Matrix> {
        if x.cols() != self.in_dim() {
            return Err(Error::dim("linear_forward", self.in_dim(), x.cols()));
        }
        let mut out = x.matmul_t(&self.weights)?;
        for r in 0..out.rows() {
            for (o, b) in out.row_mut(r).iter_mut().zip(&self.bias) {
                *o += b;
            }
        }
        Ok(out)
    }

    /// Returns the gradient wrt the input and the parameter gradients.
    pub fn backward(&mut self, grad_out: &Matrix) -> Result<(Matrix, LinearGrads)> {
        let x = self
            .cache
            .take()
            .ok_or_else(|| Error::State("linear backward without a cached training forward".into()))?;
        if grad_out.cols() != self.out_dim() || grad_out.rows() != x.rows() {
            return Err(Error::dim(
                "linear_backward",
                format!("{}x{}", x.rows(), self.out_dim()),
                format!("{}x{}", grad_out.rows(), grad_out.cols()),
            ));
        }
        let dw = grad_out.t_matmul(&x)?;
        let mut db = vec![0.0; self.out_dim()];
        for row in grad_out.row_iter() {
            for (d, g) in db.iter_mut().zip(row) {
                *d += g;
            }
        }
        let dx = grad_out.matmul(&self.weights)?;
        Ok((
            dx,
            LinearGrads {
                weights: dw,
                bias: db,
            },
        ))
    }
}

/// Inverted dropout: survivors are scaled by `1/(1-p)` so evaluation is the identity.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DropoutLayer {
    p: f64,
    #[serde(skip)]
    mask: Option<Vec<f64>>,
}

impl DropoutLayer {
    pub fn new(p: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&p) {
            return Err(Error::Argument(format!("dropout probability {p} outside [0, 1)")));
        }
        Ok(Self { p, mask: None })
    }

    pub fn probability(&self) -> f64 {
        self.p
    }

    pub fn forward(&mut self, x: &Matrix, active: bool, rng: &mut RngStream) -> Matrix {
        if !active || self.p == 0.0 {
            self.mask = None;
            return x.clone();
        }
        let scale = 1.0 / (1.0 - self.p);
        let mask: Vec<f64> = (0..x.data().len())
            .map(|_| if rng.uniform() < self.p { 0.0 } else { scale })
            .collect();
        let mut out = x.clone();
        for (o, m) in out.data_mut().iter_mut().zip(&mask) {
            *o *= m;
        }
        self.mask = Some(mask);
        out
    }

    pub fn backward(&mut self, grad: &Matrix) -> Matrix {
        match self.mask.take() {
            None => grad.clone(),
            Some(mask) => {
                let mut out = grad.clone();
                for (o, m) in out.data_mut().iter_mut().zip(&mask) {
                    *o *= m;
                }
                out
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_and_affine_examples() {
        let mut id = LinearLayer::new(Matrix::from_rows(&[[1.0, 0.0], [0.0, 1.0]]).unwrap(), vec![0.0, 0.0]).unwrap();
        let out = id.forward(&Matrix::from_rows(&[[3.0, 4.0]]).unwrap(), false).unwrap();
        assert_eq!(out.row(0), &[3.0, 4.0]);
        assert!(!id.has_cache());

        let mut l = LinearLayer::new(Matrix::from_rows(&[[2.0]]).unwrap(), vec![1.0]).unwrap();
        let out = l.forward(&Matrix::from_rows(&[[3.0]]).unwrap(), true).unwrap();
        assert_eq!(out.row(0), &[7.0]);
        assert!(l.has_cache());
    }

    #[test]
    fn random_layer_matches_naive_oracle() {
        let mut rng = RngStream::new(9);
        let layer = LinearLayer::init(5, 3, &mut rng);
        let x = Matrix::from_vec(4, 5, (0..20).map(|_| rng.uniform_range(-2.0, 2.0)).collect()).unwrap();
        let got = layer.apply(&x).unwrap();
        for i in 0..4 {
            for o in 0..3 {
                let mut s = layer.bias[o];
                for k in 0..5 {
                    s += x.get(i, k) * layer.weights.get(o, k);
                }
                assert!((got.get(i, o) - s).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn shape_mismatch_and_missing_cache() {
        let mut rng = RngStream::new(1);
        let mut layer = LinearLayer::init(3, 2, &mut rng);
        assert!(matches!(layer.forward(&Matrix::zeros(1, 4), true), Err(Error::Dimension { .. })));
        assert!(matches!(layer.backward(&Matrix::zeros(1, 2)), Err(Error::State(_))));
    }

    #[test]
    fn dropout_identity_cases() {
        let mut rng = RngStream::new(2);
        let x = Matrix::from_rows(&[[1.5, -2.0, 3.0]]).unwrap();
        let mut zero = DropoutLayer::new(0.0).unwrap();
        assert_eq!(zero.forward(&x, true, &mut rng), x);
        let mut d = DropoutLayer::new(0.5).unwrap();
        assert_eq!(d.forward(&x, false, &mut rng), x);
        assert!(DropoutLayer::new(1.0).is_err());
        assert!(DropoutLayer::new(-0.1).is_err());
    }

    #[test]
    fn inverted_dropout_is_unbiased() {
        let mut rng = RngStream::new(3);
        let x = Matrix::from_vec(1, 100_000, vec![1.0; 100_000]).unwrap();
        let mut d = DropoutLayer::new(0.1).unwrap();
        let out = d.forward(&x, true, &mut rng);
        let mean = out.data().iter().sum::<f64>() / 100_000.0;
        assert!((0.99..=1.01).contains(&mean), "mean {mean}");
    }
}
