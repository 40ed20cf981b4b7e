//! The continuation engine: optimality residual, forward-difference
//! operator and the per-step update of the stacked unknown `U`.

mod engine;
mod fdmap;
mod ocp;
mod residual;

pub use engine::{
    initial_solve, ContinuationEngine, InitialSolution, NewtonSettings, SolverKind, SolverSettings,
    StepDiagnostics,
};
pub use fdmap::{assemble_jacobian, assemble_jacobian_sequential, symmetrize, FdMap};
pub use ocp::{DecisionVector, OcpDims, OcpSpec, Stage};
pub use residual::{
    backward_costates, eval_residual, forward_states, horizon_trajectory, HorizonTrajectory,
};
