use std::fmt;

/// Exit codes: 0 success, 1 invariant breach, 2 guarded abort, 64 usage.
pub const EXIT_OK: i32 = 0;
pub const EXIT_BREACH: i32 = 1;
pub const EXIT_GUARD: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(besov_mhd::Error),
    Io(std::io::Error),
}

impl CliError {
    pub fn usage(e: besov_mhd::Error) -> Self {
        CliError::Usage(e.to_string())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Core(besov_mhd::Error::GuardTripped { .. }) => EXIT_GUARD,
            CliError::Core(
                besov_mhd::Error::Config(_)
                | besov_mhd::Error::Precondition(_)
                | besov_mhd::Error::Exponent { .. }
                | besov_mhd::Error::GridSize { .. },
            ) => EXIT_USAGE,
            CliError::Core(_) | CliError::Io(_) => EXIT_BREACH,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl From<besov_mhd::Error> for CliError {
    fn from(e: besov_mhd::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Core(e.into())
    }
}
