//! Identification of block-scrambled (encryption-then-compression) JPEG
//! images that survives recompression and re-encryption.
//!
//! * [`jpeg`]: baseline JPEG codec and pixel-domain luminance DC values.
//! * [`cipher`]: two-layer block-scrambling encryption and its inverse.
//! * [`feature`]: `|DC|` feature vectors, threshold matching, and the
//!   `ETCF` feature file format.
//! * [`bench`]: dataset generation and precision/recall scoring.

pub mod bench;
pub mod cipher;
mod error;
pub mod feature;
pub mod image;
pub mod jpeg;

pub use cipher::{
    decrypt, derive_keys, encrypt, re_encrypt, EncryptionParams, KeyFile, KeySet,
};
pub use error::{Error, Result};
pub use feature::{
    compare, extract_feature, extract_sign_feature, identify, FeatureVector,
    IdentificationParams, MatchVerdict,
};
pub use image::PixelImage;
pub use jpeg::{decode_jpeg, encode_jpeg, extract_dc_luma, DcVector, QualityFactor};
