use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("elevation angle must lie in (0, 90] degrees, got {0}")]
    InvalidElevation(f64),
    #[error("distance must be positive, got {0} m")]
    NonPositiveDistance(f64),
    #[error("3D distance {0} m is below the 1 m validity floor of the terrestrial model")]
    DistanceBelowModel(f64),
    #[error("carrier frequency {0} GHz outside the supported (0, 6] GHz range")]
    FrequencyOutOfRange(f64),
    #[error("load fraction {0} outside [0, 1]")]
    LoadOutOfRange(f64),
    #[error("base station {0} is switched off but carries load")]
    LoadOnInactive(usize),
    #[error("serving base station {0} is not in the active set")]
    ServingNotActive(usize),
    #[error("base station {bs} has {users} users but only {capacity} channels")]
    ColumnOverCapacity { bs: usize, users: usize, capacity: usize },
    #[error("reference energy must be positive, got {0} J")]
    NonPositiveEnergy(f64),
    #[error("policy vectors must keep the HAPS (index 0) active")]
    HapsInactive,
    #[error("invalid value for `{key}`: {reason}")]
    InvalidConfig { key: &'static str, reason: &'static str },
    #[error("table data line {line}: {reason}")]
    TableParse { line: usize, reason: &'static str },
}
