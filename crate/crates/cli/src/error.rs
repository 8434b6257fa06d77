//! Exit-code classification.

use std::fmt;

/// Bad arguments, files or configuration (exit code 2).
#[derive(Debug)]
pub struct InputError(pub String);

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InputError {}

/// A solver or trainer ran out of budget (exit code 3).
#[derive(Debug)]
pub struct BudgetExhausted(pub String);

impl fmt::Display for BudgetExhausted {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for BudgetExhausted {}

pub const EXIT_INPUT: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;

pub fn exit_code(err: &anyhow::Error) -> i32 {
    for cause in err.chain() {
        if cause.is::<InputError>() {
            return EXIT_INPUT;
        }
        if cause.is::<BudgetExhausted>() {
            return EXIT_BUDGET;
        }
        if let Some(e) = cause.downcast_ref::<ltx_core::Error>() {
            use ltx_core::Error as E;
            return match e {
                E::NoConvergence(_) | E::Diverged { .. } => EXIT_BUDGET,
                _ => EXIT_INPUT,
            };
        }
        if cause.is::<std::io::Error>()
            || cause.is::<csv::Error>()
            || cause.is::<serde_json::Error>()
        {
            return EXIT_INPUT;
        }
    }
    1
}
