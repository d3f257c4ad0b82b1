//! Process exit codes.

use std::fmt;

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_INCONSISTENT: i32 = 4;
pub const EXIT_NUMERICAL: i32 = 5;
pub const EXIT_OTHER: i32 = 1;

pub const EXIT_CODES_HELP: &str = "\
Exit codes:
  0  success
  1  unexpected internal error
  2  usage error: bad flag or config value, or malformed input file
  3  I/O error: unreadable input or unwritable output
  4  inconsistent inputs, e.g. a truth whose N or T differs from the result
  5  numerical failure: zero-degree node-time, eigensolver non-convergence,
     or no valid scale range

Environment:
  TEMPOWAVE_CACHE_DIR  directory for cached eigendecompositions (off when unset)
  RUST_LOG             log filter, overriding -v";

/// A command-line or configuration mistake.
#[derive(Debug)]
pub struct Usage(pub String);

impl fmt::Display for Usage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

pub fn code_for(err: &anyhow::Error) -> i32 {
    use tempowave::Error as E;
    for cause in err.chain() {
        if cause.is::<Usage>() {
            return EXIT_USAGE;
        }
        if let Some(e) = cause.downcast_ref::<E>() {
            return match e.root() {
                E::Parse { .. } | E::Range { .. } | E::SelfLoop { .. } | E::Duplicate { .. } | E::Json(_) | E::Domain(_) => {
                    EXIT_USAGE
                }
                E::Io(_) => EXIT_IO,
                E::Consistency(_) => EXIT_INCONSISTENT,
                E::DegenerateDegree { .. } | E::NoConvergence { .. } | E::NoScaleRange(_) | E::Precondition(_) => EXIT_NUMERICAL,
                E::Stage { .. } => EXIT_OTHER,
            };
        }
        if cause.is::<std::io::Error>() {
            return EXIT_IO;
        }
    }
    EXIT_OTHER
}
