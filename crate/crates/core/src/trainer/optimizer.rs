use crate::error::{Error, Result};
use crate::network::{NetworkParams, TENSOR_NAMES};
use crate::scalar::Scalar;

/// `v <- momentum * v - lr * g; p <- p + v`, element-wise.
pub fn momentum_update<T: Scalar>(params: &mut [T], grads: &[T], velocity: &mut [T], lr: T, momentum: T) {
    for ((p, &g), v) in params.iter_mut().zip(grads).zip(velocity.iter_mut()) {
        *v = momentum * *v - lr * g;
        *p += *v;
    }
}

/// Steepest descent with momentum over every tensor. `clip`, when set,
/// bounds each gradient component to `[-clip, clip]` first.
pub fn sgd_momentum_step<T: Scalar>(
    params: &mut NetworkParams<T>,
    grads: &NetworkParams<T>,
    velocity: &mut NetworkParams<T>,
    lr: T,
    momentum: T,
    clip: Option<T>,
) -> Result<()> {
    if !params.same_shape(grads) || !params.same_shape(velocity) {
        return Err(Error::Shape("parameter, gradient and velocity shapes differ".into()));
    }
    let mut clipped = Vec::new();
    for (i, ((p, g), v)) in params
        .tensors_mut()
        .into_iter()
        .zip(grads.tensors())
        .zip(velocity.tensors_mut())
        .enumerate()
    {
        let g = match clip {
            Some(c) => {
                clipped.clear();
                clipped.extend(g.iter().map(|&x| x.max(-c).min(c)));
                &clipped[..]
            }
            None => g,
        };
        momentum_update(p, g, v, lr, momentum);
        if let Some(pos) = p.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFiniteUpdate(format!(
                "{}[{pos}] became {} (gradient {}, velocity {})",
                TENSOR_NAMES[i], p[pos], g[pos], v[pos]
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{init_params, NetworkDims};

    fn dims() -> NetworkDims {
        NetworkDims::new(2, 3, 3).unwrap()
    }

    #[test]
    fn zero_gradient_zero_velocity_is_a_no_op() {
        let mut p = init_params::<f64>(dims(), 1);
        let before = p.clone();
        let g = p.zeros_like();
        let mut v = p.zeros_like();
        sgd_momentum_step(&mut p, &g, &mut v, 1e-4, 0.9, None).unwrap();
        assert_eq!(p, before);
    }

    #[test]
    fn no_momentum_is_plain_descent() {
        let mut p = vec![1.0f64, -2.0];
        let mut v = vec![0.0; 2];
        momentum_update(&mut p, &[0.5, -4.0], &mut v, 0.1, 0.0);
        assert_eq!(p, vec![1.0 - 0.05, -2.0 + 0.4]);
    }

    #[test]
    fn two_constant_steps_match_closed_form() {
        let (alpha, beta, g) = (1e-4f64, 0.9f64, 2.5f64);
        let mut p = vec![0.0];
        let mut v = vec![0.0];
        momentum_update(&mut p, &[g], &mut v, alpha, beta);
        momentum_update(&mut p, &[g], &mut v, alpha, beta);
        // v1 = -a g; v2 = -b a g - a g; total = -a g (1 + (1 + b))
        let expected = -alpha * g * (1.0 + (1.0 + beta));
        assert!((p[0] - expected).abs() < 1e-18);
    }

    #[test]
    fn clipping_bounds_components() {
        let mut p = NetworkParams::<f64>::zeros(dims());
        let mut g = p.zeros_like();
        g.output_bias[0] = 50.0;
        g.output_bias[1] = -0.5;
        let mut v = p.zeros_like();
        sgd_momentum_step(&mut p, &g, &mut v, 0.1, 0.0, Some(1.0)).unwrap();
        assert!((p.output_bias[0] + 0.1).abs() < 1e-15);
        assert!((p.output_bias[1] - 0.05).abs() < 1e-15);
    }

    #[test]
    fn non_finite_update_aborts() {
        let mut p = NetworkParams::<f64>::zeros(dims());
        let mut g = p.zeros_like();
        g.output_bias[2] = f64::INFINITY;
        let mut v = p.zeros_like();
        let err = sgd_momentum_step(&mut p, &g, &mut v, 0.1, 0.9, None).unwrap_err();
        assert!(matches!(err, Error::NonFiniteUpdate(ref m) if m.contains("output.bias[2]")));
    }
}
