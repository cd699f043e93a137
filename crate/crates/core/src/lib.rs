//! Automatic upper-limb rehabilitation assessment from wrist accelerometry.
//!
//! The crate covers two halves of one pipeline:
//!
//! 1. **Classification.** Fixed-length tri-axial acceleration epochs are sorted
//!    into the four key movements M1..M4 by a shallow network (four 1-D
//!    convolutions, a unidirectional LSTM and a dense head) that is trained
//!    from scratch with hand-derived backpropagation and Adam ([`nn`],
//!    [`classifier`]).
//! 2. **Smoothness.** Annotated movement segments are differentiated into jerk
//!    and squared jerk, summarised per axis, compared across cohorts and
//!    tracked across a patient's rehabilitation sessions ([`signal`],
//!    [`smoothness`]).
//!
//! [`dataset`] holds the recording model and its CSV formats, [`synth`] a
//! deterministic generator of minimum-jerk "healthy" and jerkified "patient"
//! movements, and [`cli`] the `neurorehab` command-line front end.
//!
//! Runnable walkthroughs of each capability live in `examples/`:
//!
//! ```bash
//! cargo run --release --example derivative_chain
//! cargo run --release --example synthetic_cohort
//! cargo run --release --example published_tables
//! cargo run --release --example gradient_check
//! cargo run --release --example train_classifier
//! ```

pub mod classifier;
pub mod cli;
pub mod dataset;
pub mod error;
pub mod nn;
pub mod signal;
pub mod smoothness;
pub mod synth;

pub use error::{Error, Result};
