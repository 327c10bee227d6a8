//! Pointwise and L₂ relative errors.

use crate::error::{invalid, Result, SinnError};

/// An error value; `absolute` is set when the reference was zero and the
/// absolute error is reported instead.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Measured {
    pub value: f64,
    pub absolute: bool,
}

/// `|exact − numeric| / |exact|`.
pub fn relative_error(exact: f64, numeric: f64) -> Measured {
    let diff = (exact - numeric).abs();
    if exact == 0.0 {
        Measured {
            value: diff,
            absolute: true,
        }
    } else {
        Measured {
            value: diff / exact.abs(),
            absolute: false,
        }
    }
}

/// `‖exact − numeric‖₂ / ‖exact‖₂`.
pub fn l2_relative_error(exact: &[f64], numeric: &[f64]) -> Result<Measured> {
    if exact.len() != numeric.len() {
        return Err(SinnError::LengthMismatch {
            expected: exact.len(),
            actual: numeric.len(),
        });
    }
    if exact.is_empty() {
        return Err(invalid("L2 error of empty vectors"));
    }
    let diff = exact
        .iter()
        .zip(numeric)
        .map(|(e, n)| (e - n) * (e - n))
        .sum::<f64>()
        .sqrt();
    let norm = exact.iter().map(|e| e * e).sum::<f64>().sqrt();
    Ok(if norm == 0.0 {
        Measured {
            value: diff,
            absolute: true,
        }
    } else {
        Measured {
            value: diff / norm,
            absolute: false,
        }
    })
}
