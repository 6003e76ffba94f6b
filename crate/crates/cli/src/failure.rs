use std::process::ExitCode;

use gift_core::Error;
use serde::Serialize;

/// Exit statuses. Each failure class has its own code so scripts can branch
/// without parsing the message.
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_INPUT_FILE: u8 = 3;
pub const EXIT_BUDGET: u8 = 4;
pub const EXIT_INVALID: u8 = 5;
pub const EXIT_OUTPUT: u8 = 6;

/// A fatal error, printed to stderr as `{"error": {...}}`.
#[derive(Debug, Serialize)]
pub struct Failure {
    pub kind: String,
    pub message: String,
    pub exit_code: u8,
}

#[derive(Serialize)]
struct Envelope<'a> {
    error: &'a Failure,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            kind: "usage".into(),
            message: message.into(),
            exit_code: EXIT_USAGE,
        }
    }

    pub fn output(e: Error) -> Self {
        Self {
            kind: "output".into(),
            message: e.to_string(),
            exit_code: EXIT_OUTPUT,
        }
    }

    pub fn report(&self) -> ExitCode {
        let json = serde_json::to_string(&Envelope { error: self })
            .unwrap_or_else(|_| format!("{{\"error\":{{\"message\":{:?}}}}}", self.message));
        eprintln!("{json}");
        ExitCode::from(self.exit_code)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let (kind, exit_code) = match &e {
            Error::Io { .. } => ("io", EXIT_INPUT_FILE),
            Error::Format(_) => ("format", EXIT_INPUT_FILE),
            Error::BudgetExceedsPool { .. } => ("budget-exceeds-pool", EXIT_BUDGET),
            Error::DimensionMismatch { .. } => ("dimension-mismatch", EXIT_INVALID),
            Error::ZeroNormVector(_) | Error::ZeroNormRow(_) => ("zero-norm", EXIT_INVALID),
            Error::NonFinite(_) => ("non-finite", EXIT_INVALID),
            Error::InvalidInput(_) => ("invalid-input", EXIT_INVALID),
            Error::Cell { .. } => ("sweep-cell", EXIT_INVALID),
        };
        Self {
            kind: kind.into(),
            message: e.to_string(),
            exit_code,
        }
    }
}

/// Writes `text` to stdout, reporting a closed or failing stream as an output
/// error instead of panicking.
pub fn emit(text: &str) -> Result<(), Failure> {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    out.write_all(text.as_bytes())
        .and_then(|()| out.flush())
        .map_err(|source| {
            Failure::output(Error::Io {
                path: "<stdout>".into(),
                source,
            })
        })
}
