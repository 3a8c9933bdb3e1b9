//! Polar source coding: transform, entropy profiles, index sets, SC decoding.

pub mod bits;
pub mod cache;
pub mod decoder;
pub mod profile;
pub mod sets;
pub mod transform;

pub use bits::{pack_bits, unpack_bits, BitBlock};
pub use cache::ProfileCache;
pub use decoder::{channel_llrs, sc_decode, KnownBits, ScDecoder};
pub use profile::{entropy_profile_exact, entropy_profile_mc, EntropyProfile, ProfileMethod};
pub use sets::{build_index_sets, delta_n, PolarIndexSets, DEFAULT_BETA};
pub use transform::{polar_transform, polar_transform_in_place};
