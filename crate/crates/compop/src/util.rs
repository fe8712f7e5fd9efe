//! Small shared helpers: deterministic summation and JSON encodings.

use num_complex::Complex64;

/// Sum with a fixed pairwise (binary-tree) order.
///
/// Used for every quadrature and histogram reduction so that results are
/// reproducible bit-for-bit regardless of thread count: parallel stages
/// collect into an indexed buffer first, then reduce through this tree.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        2 => values[0] + values[1],
        3 => (values[0] + values[1]) + values[2],
        n => {
            let mid = n / 2;
            pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
        }
    }
}

/// Pairwise sum of complex values (same fixed tree as [`pairwise_sum`]).
pub fn pairwise_sum_complex(values: &[Complex64]) -> Complex64 {
    match values.len() {
        0 => Complex64::new(0.0, 0.0),
        1 => values[0],
        2 => values[0] + values[1],
        3 => (values[0] + values[1]) + values[2],
        n => {
            let mid = n / 2;
            pairwise_sum_complex(&values[..mid]) + pairwise_sum_complex(&values[mid..])
        }
    }
}

pub fn cx(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Serde adapters encoding `Complex64` as a two-element `[re, im]` array,
/// which is the wire format used by every JSON schema in this crate.
pub mod complex_pair {
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &Complex64, s: S) -> Result<S::Ok, S::Error> {
        [v.re, v.im].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Complex64, D::Error> {
        let [re, im] = <[f64; 2]>::deserialize(d)?;
        Ok(Complex64::new(re, im))
    }
}

/// `Vec<Complex64>` counterpart of [`complex_pair`].
pub mod complex_pair_vec {
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[Complex64], s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(|c| [c.re, c.im]).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Complex64>, D::Error> {
        let raw = Vec::<[f64; 2]>::deserialize(d)?;
        Ok(raw.into_iter().map(|[re, im]| Complex64::new(re, im)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_matches_naive_on_smooth_data() {
        let xs: Vec<f64> = (0..1000).map(|i| (i as f64 * 0.37).sin()).collect();
        let naive: f64 = xs.iter().sum();
        assert!((pairwise_sum(&xs) - naive).abs() < 1e-9);
    }

    #[test]
    fn pairwise_is_order_fixed() {
        let xs: Vec<f64> = (0..777).map(|i| 1.0 / (1.0 + i as f64)).collect();
        assert_eq!(pairwise_sum(&xs), pairwise_sum(&xs));
    }
}
