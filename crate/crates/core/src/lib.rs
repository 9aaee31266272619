//! Travelling waves for bistable reaction–diffusion equations whose reaction
//! term may fail to be Lipschitz at the stable states.
//!
//! The crate covers the whole pipeline:
//!
//! * [`reaction`]: parametric reaction terms `f`, their potential `F`, and
//!   numerical checks of the structural hypotheses (sign pattern, one-sided
//!   Lipschitz bound, secant constants).
//! * [`wave`]: the first-order boundary value problem for `y(r) = U'(z)^2`
//!   seen as a function of `r = U`, and the bisection for the unique speed.
//! * [`profile`]: the normalised profile `U(z)` with `U(0) = s0`, including
//!   detection of finite front endpoints.
//! * [`pde`]: time stepping of the moving-frame Cauchy problem
//!   `v_t = v_zz + c v_z + f(v)` with two independent schemes.
//! * [`diagnostics`]: sub/supersolution envelopes, the weighted Lyapunov
//!   functional, shift tracking and convergence reports.
//! * [`io`]: CSV, JSON and binary encodings of all results.

pub mod diagnostics;
pub mod error;
pub mod exec;
pub mod io;
pub mod pde;
pub mod profile;
pub mod quadrature;
pub mod reaction;
pub mod wave;

pub use error::{Error, Result};
pub use exec::Execution;
pub use profile::{Endpoint, ProfileControl, ProfileTable};
pub use reaction::{HypothesisReport, ReactionKind, ReactionSpec, SecantConstants};
pub use wave::{SpeedResult, StepControl, Terminal, TravellingWave, YSolution};
