//! Image formation: gamma response, convolution, region blending, noise and
//! pair synthesis.

mod compose;
mod convolve;
mod gamma;
mod noise;
mod pair;

pub use compose::{
    compose_nonuniform, partition_error, smooth_region_masks, RegionSet, PARTITION_TOLERANCE,
};
pub use convolve::{
    convolve, convolve_plane, convolve_plane_direct, convolve_plane_fft, convolve_with, Backend,
    Boundary,
};
pub use gamma::{average_frames, decode_value, encode_value, gamma_decode, gamma_encode};
pub use noise::{add_noise, saturate};
pub use pair::{
    blur_pair, BlurConfig, BlurredPair, Illumination, ILLUM_STREAM, KERNEL_STREAM, NOISE_STREAM,
};
