use std::fs;
use std::path::Path;

use aqnn_core::codec::{decode, encode};
use aqnn_core::data::NormStats;
use aqnn_core::nn::Network;

use crate::error::{io_err, Result};

/// Encodes and writes the model; returns the number of bytes written.
pub fn save_model(net: &Network, norm: &NormStats, path: impl AsRef<Path>) -> Result<usize> {
    let path = path.as_ref();
    let bytes = encode(net, norm)?;
    fs::write(path, &bytes).map_err(io_err(path))?;
    Ok(bytes.len())
}

pub fn load_model(path: impl AsRef<Path>) -> Result<(Network, NormStats)> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(io_err(path))?;
    Ok(decode(&bytes)?)
}
