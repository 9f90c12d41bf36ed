//! Synthesis of sharp/blurred training pairs with segmentation-driven,
//! piecewise-constant motion blur.
//!
//! The crate is organised bottom-up:
//!
//! * [`kernel`] samples camera-motion trajectories and rasterizes them into
//!   canonical blur kernels.
//! * [`blur`] holds the image-formation model: gamma response, convolution,
//!   soft region masks, noise, clipping and [`blur::blur_pair`].
//! * [`photometric`] implements the HSV illumination augmentations.
//! * [`pipeline`] turns a manifest of segmented images into a reproducible
//!   on-disk dataset and verifies it.
//! * [`metrics`] provides PSNR and SSIM.

// Parameter checks are written `!(x > 0.0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod blur;
pub mod error;
pub mod image;
pub mod io;
pub mod kernel;
pub mod metrics;
pub mod photometric;
pub mod pipeline;

pub use error::{Error, Result};
pub use image::Image;
