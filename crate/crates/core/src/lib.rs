//! Maximum-distance-profile convolutional codes over GF(2^m).

pub mod cdp;
pub mod codec;
pub mod construct;
pub mod erasure;
pub mod gf;
pub mod minors;
pub mod rareness;
pub mod search;
pub mod tables;
