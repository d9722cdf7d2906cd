use crate::error::{ensure_finite, Result};

use super::tape::{Tape, Var};

/// Value and exact reverse-mode gradient of `f` at `x`.
///
/// `f` must be built from the tape primitives. If any intermediate value is
/// not finite the returned error names the offending primitive.
pub fn value_and_grad<F>(f: F, x: &[f64]) -> Result<(f64, Vec<f64>)>
where
    F: for<'t> Fn(&[Var<'t>]) -> Var<'t>,
{
    let tape = Tape::new();
    let vars = tape.vars(x);
    let out = f(&vars);
    tape.check_finite()?;
    let g = tape.gradient(out, &vars);
    ensure_finite("backward", &g)?;
    Ok((out.value(), g))
}

/// Exact reverse-mode gradient of `f` at `x`.
///
/// ```
/// use ftnpl::numerics::grad;
///
/// let g = grad(|x| x[0] * x[0], &[3.0]).unwrap();
/// assert_eq!(g, vec![6.0]);
/// ```
pub fn grad<F>(f: F, x: &[f64]) -> Result<Vec<f64>>
where
    F: for<'t> Fn(&[Var<'t>]) -> Var<'t>,
{
    value_and_grad(f, x).map(|(_, g)| g)
}

/// Central-difference gradient estimate with step `h`.
pub fn finite_diff<F>(f: F, x: &[f64], h: f64) -> Vec<f64>
where
    F: Fn(&[f64]) -> f64,
{
    assert!(h > 0.0, "finite_diff step must be positive");
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            let xi = probe[i];
            probe[i] = xi + h;
            let up = f(&probe);
            probe[i] = xi - h;
            let down = f(&probe);
            probe[i] = xi;
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// `‖a − b‖ / max(‖a‖, ‖b‖, floor)`: the relative gap used by gradient checks.
pub fn relative_error(a: &[f64], b: &[f64], floor: f64) -> f64 {
    let diff = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    diff / na.max(nb).max(floor)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    #[test]
    fn constant_function_has_zero_gradient() {
        let g = grad(|x| x[0].tape().constant(4.0) + x[1] * 0.0, &[1.0, 2.0]).unwrap();
        assert_eq!(g, vec![0.0, 0.0]);
        assert_eq!(finite_diff(|_| 4.0, &[1.0, 2.0], 1e-5), vec![0.0, 0.0]);
    }

    #[test]
    fn central_difference_is_exact_for_quadratics() {
        let g = finite_diff(|x| x[0] * x[0], &[1.0], 1e-5);
        assert!((g[0] - 2.0).abs() < 1e-8);
    }

    #[test]
    fn non_finite_intermediate_is_signalled() {
        let err = grad(|x| (x[0] * 1000.0).exp(), &[1.0]).unwrap_err();
        assert!(matches!(err, Error::Numeric { op: "exp", .. }), "{err}");
    }

    #[test]
    fn relative_error_uses_floor_near_zero() {
        assert_eq!(relative_error(&[0.0], &[0.0], 1e-8), 0.0);
        assert!(relative_error(&[1.0], &[1.0 + 1e-9], 1e-8) < 1e-8);
    }
}
