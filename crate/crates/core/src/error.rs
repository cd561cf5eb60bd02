use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("stabilizer generators {first} and {second} anti-commute")]
    InvalidStabilizer { first: usize, second: usize },

    #[error("row {x_row} of H_X and row {z_row} of H_Z have odd overlap")]
    InvalidCss { x_row: usize, z_row: usize },

    #[error("column {column} has weight {weight}, expected 2")]
    NotIncidence { column: usize, weight: usize },

    #[error("{what} = {found} exceeds the enumeration cap {limit}")]
    CapExceeded {
        what: &'static str,
        limit: usize,
        found: usize,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("no crossing of the bound with rate {rate} in (0, 1/2]")]
    NoCrossing { rate: f64 },

    #[error("infeasible augmentation: {0}")]
    InfeasibleAugmentation(String),

    #[error("augmentation failed to reach the target distance after {attempts} draws")]
    AugmentationFailed { attempts: usize },

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::LengthMismatch { expected, found })
    }
}

pub(crate) fn check_probability(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "probability {p} outside [0, 1]"
        )))
    }
}
