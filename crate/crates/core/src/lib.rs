//! Non-model machinery for visual-centric forgery reasoning.
//!
//! The crate covers everything around a tool-using multimodal detector
//! except the model itself:
//!
//! - [`toolbox`]: forensic image operators (ELA, FFT, noise residual, zoom-in)
//! - [`parser`]: completion and trajectory text formats
//! - [`rewards`]: classification / localization / tool-utility rewards and
//!   group-relative advantages
//! - [`trajectory`]: gain-driven tool selection and multi-path trajectory synthesis
//! - [`evalkit`]: detection and localization metrics, mask-to-box extraction and
//!   the degradation suite
//!
//! Model outputs enter through plain files (score records, completions,
//! predictions), see [`manifest`].

pub mod codec;
pub mod evalkit;
pub mod geometry;
pub mod manifest;
pub mod parser;
pub mod raster;
pub mod rewards;
pub mod synth;
pub mod toolbox;
pub mod trajectory;

mod label;

pub use geometry::{box_iou, clamp_box, BoundingBox, GeometryError};
pub use label::{Label, ToolId, UnknownLabel, UnknownTool};
pub use raster::{BinaryMask, GrayMap, RasterError, RasterImage};
