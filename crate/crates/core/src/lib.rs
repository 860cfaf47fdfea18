//! Numerical toolkit for slice regular functions on the quaternionic unit ball.

pub mod io;
pub mod lipschitz;
pub mod majorant;
pub mod poisson;
pub mod quaternion;
pub mod series;
pub mod verify;

pub use io::{emit_report, load_function_spec, Format, ReportDocument};
pub use lipschitz::{NormEstimate, SamplePlan};
pub use majorant::{check_regular, LogGrid, Majorant, RegularityCertificate};
pub use quaternion::{ImaginaryUnit, Quaternion};
pub use series::{ComplexSeries, SliceSeries};
pub use verify::{run_suite, Corpus, FunctionRecord, RunConfig, Suite, Tolerances, VerificationReport};
