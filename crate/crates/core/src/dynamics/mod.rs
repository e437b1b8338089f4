//! Process matrix χ(T), the secular Redfield oracle and the operator-sum construction.

mod kraus;
mod process;
mod redfield;

pub use kraus::{chi_from_kraus, KrausSet};
pub use process::{
    validate_constraints, ConstraintReport, Level, ProcessMatrix, TimeViolations, COLUMNS, ROWS,
};
pub use redfield::{
    analytic_chi_table4, propagate_chi, propagate_chi_rk4, OhmicBath, RedfieldModel, RedfieldRates,
    DETAILED_BALANCE_TOL,
};
