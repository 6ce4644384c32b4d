use thiserror::Error;

/// Engine-wide error type. Diagnostic payloads are carried as `f64`
/// regardless of the working scalar so messages stay printable.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("series did not converge within {terms} terms (last term {last_term:e})")]
    SeriesDivergence { terms: usize, last_term: f64 },

    #[error(
        "quadrature on [{a}, {b}] stalled at error {error:e} (value {value:e}); \
         worst panel [{worst_a}, {worst_b}] contributes {worst_error:e}"
    )]
    Quadrature {
        a: f64,
        b: f64,
        value: f64,
        error: f64,
        worst_a: f64,
        worst_b: f64,
        worst_error: f64,
    },

    #[error("integrand returned a non-finite value at {at}")]
    NonFiniteIntegrand { at: f64 },

    #[error("threshold {gamma_w} W is at or above the rectifier ceiling {p_max_w} W")]
    ThresholdAboveCeiling { gamma_w: f64, p_max_w: f64 },

    #[error("truncation point {cut} leaves survival mass below {floor:e}; conditional law is degenerate")]
    DegenerateTruncation { cut: f64, floor: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
