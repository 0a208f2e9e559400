use super::field::VectorField;
use crate::scalar::Ring;

/// Taylor jet of a polynomial field at `base_point`, stored in the
/// recentered coordinates `u = x − base_point` and truncated at order K.
#[derive(Clone, Debug, PartialEq)]
pub struct Jet<R> {
    pub base_point: Vec<R>,
    pub order: u32,
    /// Coefficients as a field in `u`.
    pub coefficients: VectorField<R>,
}

impl<R: Ring> Jet<R> {
    pub fn is_zero(&self) -> bool {
        self.coefficients.is_zero()
    }

    /// The truncated field written back in the original coordinates.
    pub fn to_field(&self) -> VectorField<R> {
        let back: Vec<R> = self.base_point.iter().map(|c| -c.clone()).collect();
        self.coefficients.recenter(&back)
    }
}

pub fn jet_at<R: Ring>(x: &VectorField<R>, p: &[R], k: u32) -> Jet<R> {
    assert_eq!(p.len(), x.dim(), "point dimension mismatch");
    Jet { base_point: p.to_vec(), order: k, coefficients: x.recenter(p).truncate(k) }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyfield::parse::parse_field;
    use crate::scalar::int;

    #[test]
    fn quadratic_vanishes_at_order_one() {
        let x = parse_field("x^2*dx", 1).unwrap();
        assert!(jet_at(&x, &[int(0)], 1).is_zero());
        assert_eq!(jet_at(&x, &[int(0)], 2).to_field(), x);
    }

    #[test]
    fn recentered_linear_field() {
        let x = parse_field("x*dx", 1).unwrap();
        let j = jet_at(&x, &[int(1)], 1);
        // (1 + u)∂, with u = x − 1
        assert_eq!(j.coefficients, parse_field("(1 + x)*dx", 1).unwrap());
        assert_eq!(j.to_field(), x);
    }

    #[test]
    fn float_points_work_too() {
        let x = parse_field("x^2*dx", 1).unwrap().to_f64();
        let j: Jet<f64> = jet_at(&x, &[0.5], 1);
        let c = j.coefficients.component(0);
        assert_eq!(c.eval(&[0.0]), 0.25);
    }
}
