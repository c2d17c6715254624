//! Numerical escaping-set experiments for finitely generated semigroups of
//! transcendental entire functions.

pub mod conjugacy;
pub mod error;
pub mod escape;
pub mod harness;
pub mod maps;
pub mod postsingular;
pub mod render;
pub mod topology;
pub mod words;

pub use error::{Error, Result};
pub use escape::{Budget, Cell, OrbitRecord, OrbitStatus, Raster, Subject, Window};
pub use harness::{run_scenario, Config, ScenarioReport, Verdict};
pub use maps::{AffineMap, ComplexValue, EntireMap};
pub use words::{NormalForm, Semigroup, Word};
