//! Optimization drivers: single-subinterval solves, time marching, the
//! inverse problem and the PINN baseline.

mod optim;
mod solve;
mod state;

pub use optim::{optimize, optimize_scaled, AdamConfig, LbfgsConfig, Objective, OptimResult, Optimizer};
pub use solve::{
    field_errors, march, pinn_jets, solve, solve_inverse, solve_pinn, solve_subinterval, test_points, FieldErrors,
    InverseConfig, InverseOutcome, MarchReport, OutputScale, TrainConfig, TrainReport,
};
pub use state::{advance_state, CarriedState, ExactNodal, NodalField, PrevJets, Step};
