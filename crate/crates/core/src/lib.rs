//! Eyelid droop (ptosis) measurement and classification primitives.
//!
//! The crate is `no_std` with `alloc`; everything here is a pure function of
//! its inputs. File formats, reports and the command-line tool live in the
//! `ptosis-tools` companion crate.
//!
//! Modules:
//! - [`image`]: the 8-bit raster, eye-region cropping and mirroring.
//! - [`filters`]: gamma, histogram equalization, Canny, Harris, DoG and the
//!   seven-channel feature stack.
//! - [`geometry`]: polygon area, circle–polygon intersection area,
//!   point-to-polyline distance.
//! - [`clinical`]: corneal light reflex detection, MRD1, iris ratio and
//!   pixel-to-millimetre calibration.
//! - [`classify`]: threshold sweep, CART tree, logistic regression, ensemble
//!   averaging, two-threshold fusion and face-level aggregation.
//! - [`synth`]: a synthetic eye renderer with analytic ground truth.
//! - [`eval`]: confusion matrices, rate metrics, ROC AUC and method tables.
#![cfg_attr(not(any(feature = "std", test)), no_std)]

extern crate alloc;

pub mod classify;
pub mod clinical;
pub mod error;
pub mod eval;
pub mod filters;
pub mod geometry;
pub mod image;
pub mod synth;

pub use classify::{Feature, Label, Observation};
pub use clinical::{CalibrationModel, ClinicalMeasurements, EyeLandmarks, Side};
pub use error::{Error, Result};
pub use geometry::{Circle, Point2, Polygon};
pub use image::GrayImage;
