//! Versioned binary model format.
//!
//! All integers and floats are little-endian.
//!
//! ```text
//! offset  size  field
//! 0       4     magic "AQNN"
//! 4       2     format version (u16)
//! 6       4     descriptor length in bytes (u32)
//! 10      D     descriptor: layer records, each a kind byte then u32 fields
//! 10+D    48    normalization: 6 × f32 mean, 6 × f32 std
//! 58+D    4     parameter count (u32)
//! 62+D    4·P   parameters (f32, canonical network order)
//! 62+D+4P 4     CRC-32 (IEEE) of bytes 10 .. 62+D+4P
//! ```
//!
//! Descriptor record kinds:
//!
//! | kind | layer   | fields                                |
//! |------|---------|---------------------------------------|
//! | 0    | input   | length, channels                      |
//! | 1    | conv1d  | filters, kernel_size, in_channels     |
//! | 2    | relu    |                                       |
//! | 3    | flatten |                                       |
//! | 4    | dense   | in_dim, out_dim                       |
//! | 5    | softmax |                                       |
//!
//! The input record comes first and exactly once. The checksum is verified
//! before any field after the header is interpreted.

use alloc::string::String;
use alloc::vec::Vec;

use crate::data::NormStats;
use crate::error::invalid;
use crate::nn::{Architecture, Layer, LayerSpec, Network};
use crate::{Error, Result, NUM_SENSORS};

pub const MAGIC: [u8; 4] = *b"AQNN";
pub const FORMAT_VERSION: u16 = 1;

const HEADER_LEN: usize = 10;
const NORM_LEN: usize = NUM_SENSORS * 2 * 4;

const KIND_INPUT: u8 = 0;
const KIND_CONV1D: u8 = 1;
const KIND_RELU: u8 = 2;
const KIND_FLATTEN: u8 = 3;
const KIND_DENSE: u8 = 4;
const KIND_SOFTMAX: u8 = 5;

fn put_u32(out: &mut Vec<u8>, v: usize) -> Result<()> {
    let v = u32::try_from(v).map_err(|_| invalid!("value {v} does not fit in u32"))?;
    out.extend_from_slice(&v.to_le_bytes());
    Ok(())
}

fn encode_descriptor(net: &Network) -> Result<Vec<u8>> {
    let (length, channels) = net.input_shape();
    let mut d = Vec::new();
    d.push(KIND_INPUT);
    put_u32(&mut d, length)?;
    put_u32(&mut d, channels)?;
    for layer in net.layers() {
        match layer {
            Layer::Conv1d(c) => {
                d.push(KIND_CONV1D);
                put_u32(&mut d, c.filters)?;
                put_u32(&mut d, c.kernel_size)?;
                put_u32(&mut d, c.in_channels)?;
            }
            Layer::Relu => d.push(KIND_RELU),
            Layer::Flatten => d.push(KIND_FLATTEN),
            Layer::Dense(l) => {
                d.push(KIND_DENSE);
                put_u32(&mut d, l.in_dim)?;
                put_u32(&mut d, l.out_dim)?;
            }
            Layer::Softmax => d.push(KIND_SOFTMAX),
        }
    }
    Ok(d)
}

/// Serializes the network and its normalization statistics.
pub fn encode(net: &Network, norm: &NormStats) -> Result<Vec<u8>> {
    if net.layers().is_empty() {
        return Err(invalid!("refusing to encode an empty layer stack"));
    }
    norm.validate()?;
    let descriptor = encode_descriptor(net)?;
    let params = net.params();
    let mut out = Vec::with_capacity(HEADER_LEN + descriptor.len() + NORM_LEN + 8 + params.len() * 4);
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    put_u32(&mut out, descriptor.len())?;
    out.extend_from_slice(&descriptor);
    for v in norm.mean.iter().chain(&norm.std) {
        out.extend_from_slice(&v.to_le_bytes());
    }
    put_u32(&mut out, params.len())?;
    for p in &params {
        out.extend_from_slice(&p.to_le_bytes());
    }
    let crc = crc32fast::hash(&out[HEADER_LEN..]);
    out.extend_from_slice(&crc.to_le_bytes());
    Ok(out)
}

fn corrupt(msg: &str) -> Error {
    Error::Corrupt(String::from(msg))
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len()).ok_or_else(|| corrupt("truncated"))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<usize> {
        let b = self.take(4)?;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]) as usize)
    }

    fn f32(&mut self) -> Result<f32> {
        let b = self.take(4)?;
        Ok(f32::from_le_bytes([b[0], b[1], b[2], b[3]]))
    }

    fn is_done(&self) -> bool {
        self.pos == self.bytes.len()
    }
}

fn decode_descriptor(bytes: &[u8]) -> Result<(Architecture, Vec<[usize; 3]>)> {
    let mut cur = Cursor { bytes, pos: 0 };
    if cur.u8()? != KIND_INPUT {
        return Err(corrupt("descriptor must start with the input record"));
    }
    let input_length = cur.u32()?;
    let input_channels = cur.u32()?;
    let mut layers = Vec::new();
    // declared (a, b, c) shape fields per layer, cross-checked after validation
    let mut declared = Vec::new();
    while !cur.is_done() {
        let (spec, fields) = match cur.u8()? {
            KIND_CONV1D => {
                let (filters, kernel_size, in_channels) = (cur.u32()?, cur.u32()?, cur.u32()?);
                (LayerSpec::Conv1d { filters, kernel_size }, [filters, kernel_size, in_channels])
            }
            KIND_RELU => (LayerSpec::Relu, [0; 3]),
            KIND_FLATTEN => (LayerSpec::Flatten, [0; 3]),
            KIND_DENSE => {
                let (in_dim, out_dim) = (cur.u32()?, cur.u32()?);
                (LayerSpec::Dense { units: out_dim }, [in_dim, out_dim, 0])
            }
            KIND_SOFTMAX => (LayerSpec::Softmax, [0; 3]),
            _ => return Err(corrupt("unknown layer kind in descriptor")),
        };
        layers.push(spec);
        declared.push(fields);
    }
    if layers.is_empty() {
        return Err(corrupt("descriptor has no layers"));
    }
    Ok((Architecture { input_length, input_channels, layers }, declared))
}

/// Parses and validates a model file image. Nothing is returned unless the
/// checksum and every structural check pass.
pub fn decode(bytes: &[u8]) -> Result<(Network, NormStats)> {
    if bytes.len() < 4 || bytes[..4] != MAGIC {
        return Err(Error::Format);
    }
    if bytes.len() < HEADER_LEN + 4 {
        return Err(corrupt("truncated header"));
    }
    let version = u16::from_le_bytes([bytes[4], bytes[5]]);
    if version > FORMAT_VERSION {
        return Err(Error::Version { found: version, supported: FORMAT_VERSION });
    }
    if version == 0 {
        return Err(corrupt("format version 0 is not valid"));
    }
    let (body, crc_bytes) = bytes.split_at(bytes.len() - 4);
    let stored = u32::from_le_bytes([crc_bytes[0], crc_bytes[1], crc_bytes[2], crc_bytes[3]]);
    if crc32fast::hash(&body[HEADER_LEN..]) != stored {
        return Err(corrupt("checksum mismatch"));
    }

    let mut cur = Cursor { bytes: body, pos: 6 };
    let desc_len = cur.u32()?;
    let (arch, declared) = decode_descriptor(cur.take(desc_len)?)?;
    let mut net = Network::zeros(&arch).map_err(|_| corrupt("descriptor is not a valid architecture"))?;
    for (layer, fields) in net.layers().iter().zip(&declared) {
        let ok = match layer {
            Layer::Conv1d(c) => [c.filters, c.kernel_size, c.in_channels] == *fields,
            Layer::Dense(d) => [d.in_dim, d.out_dim, 0] == *fields,
            _ => true,
        };
        if !ok {
            return Err(corrupt("descriptor shape fields are inconsistent"));
        }
    }

    let mut mean = [0.0f32; NUM_SENSORS];
    let mut std = [0.0f32; NUM_SENSORS];
    for v in mean.iter_mut().chain(std.iter_mut()) {
        *v = cur.f32()?;
    }
    let norm = NormStats { mean, std };
    norm.validate().map_err(|_| corrupt("invalid normalization statistics"))?;

    let count = cur.u32()?;
    if count != net.count_params() {
        return Err(corrupt("parameter count does not match the descriptor"));
    }
    let raw = cur.take(count.checked_mul(4).ok_or_else(|| corrupt("parameter count overflow"))?)?;
    if !cur.is_done() {
        return Err(corrupt("trailing bytes after parameters"));
    }
    let params: Vec<f32> = raw.chunks_exact(4).map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]])).collect();
    if params.iter().any(|p| !p.is_finite()) {
        return Err(corrupt("non-finite parameter"));
    }
    net.set_params(&params)?;
    Ok((net, norm))
}
