//! Reconstruction and diagnosis of quantum processes that start from
//! system-environment correlated states.
//!
//! The crate covers dynamical maps built from a joint unitary and an initial
//! bipartite state, preparation maps, linear process tomography, the
//! preparation-dependent M-map and its sum-rule diagnostics, and a catalog of
//! reproducible scenarios on a Heisenberg-coupled qubit pair.

pub mod bipartite;
pub mod error;
pub mod io;
pub mod linalg;
pub mod maps;
pub mod mmap;
pub mod models;
pub mod prep;
pub mod random;
pub mod scenarios;
pub mod tolerance;
pub mod tomo;

pub use bipartite::{BipartiteState, TwoQubitParams};
pub use error::{Error, Result};
pub use linalg::{BlochVector, CMatrix, CVector, DensityMatrix, UnitaryOperator};
pub use maps::{Form, KrausSet, PositivityClass, PositivityTag, SuperOp};
pub use mmap::{MMapProtocol, MMapTensor, PartialMMap, SumRuleReport, Verdict};
pub use prep::{PreparationKind, PreparationMap};
pub use scenarios::{run_scenario, ScenarioResult, CATALOG};
pub use tolerance::ToleranceConfig;
pub use tomo::{Protocol, TomographyRecord, TomographyRow};
