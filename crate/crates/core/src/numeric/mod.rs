//! Dense arrays, seeded randomness and the radix-2 FFT used by everything else.

pub(crate) mod array;
mod fft;
mod rng;

pub use array::NdArray;
pub use fft::{fft, fft_in_place, is_power_of_two, ComplexSeq};
pub use rng::{standard_normal, SeededRng};
