//! Command implementations behind the `polyproj` binary. The binary's
//! argument parsing lives in main.rs; everything here takes plain values
//! so the commands are callable from tests.

pub mod commands;
pub mod svg;

/// Error class for problems with how the tool was invoked (bad method
/// list, malformed size string). The binary maps these to exit code 2,
/// everything else to 3.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for UsageError {}
