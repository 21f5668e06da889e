use super::Matrix;

pub fn relu(x: &Matrix) -> Matrix {
    x.map(|v| v.max(0.0))
}

/// Gradient through ReLU given the pre-activation.
pub fn relu_backward(pre: &Matrix, grad: &Matrix) -> Matrix {
    let mut out = grad.clone();
    for (g, &p) in out.data_mut().iter_mut().zip(pre.data()) {
        if p <= 0.0 {
            *g = 0.0;
        }
    }
    out
}

/// `ln(1 + e^x)` without overflow for large `x`.
#[inline]
pub fn softplus_scalar(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

pub fn softplus(x: &Matrix) -> Matrix {
    x.map(softplus_scalar)
}

/// Numerically stable softmax of one logit row, written into `out`.
pub fn softmax_into(z: &[f64], out: &mut [f64]) {
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for (o, &v) in out.iter_mut().zip(z) {
        *o = (v - max).exp();
        sum += *o;
    }
    for o in out.iter_mut() {
        *o /= sum;
    }
}

/// Log-sum-exp of a slice.
pub fn log_sum_exp(z: &[f64]) -> f64 {
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + z.iter().map(|&v| (v - max).exp()).sum::<f64>().ln()
}

/// Row-wise softmax.
pub fn softmax(z: &Matrix) -> Matrix {
    let mut out = Matrix::zeros(z.rows(), z.cols());
    for r in 0..z.rows() {
        softmax_into(z.row(r), out.row_mut(r));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn fixed_values() {
        let s = softmax(&Matrix::from_rows(&[[0.0, 0.0]]).unwrap());
        assert_eq!(s.row(0), &[0.5, 0.5]);
        let r = relu(&Matrix::from_rows(&[[-1.0, 2.0]]).unwrap());
        assert_eq!(r.row(0), &[0.0, 2.0]);
        assert!((softplus_scalar(0.0) - std::f64::consts::LN_2).abs() < 1e-15);
        assert_eq!(softplus_scalar(1000.0), 1000.0);
        assert!(softplus_scalar(-1000.0) >= 0.0);
    }

    proptest! {
        #[test]
        fn softmax_rows_are_shift_invariant_distributions(
            row in prop::collection::vec(-50.0f64..50.0, 2..6),
            shift in -100.0f64..100.0,
        ) {
            let mut p = vec![0.0; row.len()];
            softmax_into(&row, &mut p);
            let shifted: Vec<f64> = row.iter().map(|v| v + shift).collect();
            let mut q = vec![0.0; row.len()];
            softmax_into(&shifted, &mut q);
            prop_assert!(p.iter().all(|&v| v >= 0.0));
            prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            for (a, b) in p.iter().zip(&q) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }
    }
}
