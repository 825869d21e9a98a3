#![no_std]
extern crate alloc;
#[cfg(feature = "std")]
extern crate std;

pub mod graph;
pub mod inf_float;
pub mod ipro;
pub mod oracle;
pub mod pareto;
pub mod gppe;
pub mod session;
pub mod simulate;
pub mod user;

pub use graph::{GraphBuilder, GraphError, MultiObjectiveGraph, NodeIndex, Path};
pub use ipro::{IproError, IproState, OracleError, OracleOutcome, ParetoOracle, Solution};
pub use oracle::{FrontLookupOracle, GuidanceMode, ModfsOracle};
pub use pareto::{ObjectiveVector, ParetoError, Region};
pub use session::{Direction, Heuristic, Session, SessionError, SteerRequest};
pub use user::UserModel;
