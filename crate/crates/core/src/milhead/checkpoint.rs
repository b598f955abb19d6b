//! Checkpoint layout (little-endian):
//!
//! | offset | field                                   |
//! |--------|-----------------------------------------|
//! | 0      | magic `MILC`                            |
//! | 4      | version `u32` = 1                       |
//! | 8      | L, M, C as `u32`                        |
//! | 20     | FNV-1a 64 checksum of the payload bytes |
//! | 28     | `f64` payload: w2 (row-major), w1, wc (row-major), bc |

use alloc::format;
use alloc::vec::Vec;

use super::MilParams;
use crate::error::{Error, Result};

pub const CHECKPOINT_MAGIC: [u8; 4] = *b"MILC";
pub const CHECKPOINT_VERSION: u32 = 1;
const HEADER_LEN: usize = 28;

pub fn encoded_checkpoint_len(attention_dim: usize, embed_dim: usize, classes: usize) -> usize {
    HEADER_LEN + 8 * (attention_dim * embed_dim + attention_dim + classes * embed_dim + classes)
}

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, &b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

pub fn encode_checkpoint(params: &MilParams) -> Vec<u8> {
    let mut payload = Vec::with_capacity(8 * params.num_params());
    for t in params.tensors() {
        for v in t {
            payload.extend_from_slice(&v.to_le_bytes());
        }
    }
    let mut out = Vec::with_capacity(HEADER_LEN + payload.len());
    out.extend_from_slice(&CHECKPOINT_MAGIC);
    out.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
    for d in [params.attention_dim(), params.embed_dim(), params.classes()] {
        out.extend_from_slice(&(d as u32).to_le_bytes());
    }
    out.extend_from_slice(&fnv1a(&payload).to_le_bytes());
    out.extend_from_slice(&payload);
    out
}

pub fn decode_checkpoint(bytes: &[u8]) -> Result<MilParams> {
    if bytes.len() < 4 || bytes[..4] != CHECKPOINT_MAGIC {
        return Err(Error::BadMagic);
    }
    if bytes.len() < HEADER_LEN {
        return Err(Error::CorruptPayload(format!(
            "checkpoint header truncated at {} bytes",
            bytes.len()
        )));
    }
    let word = |at: usize| u32::from_le_bytes(bytes[at..at + 4].try_into().expect("4 bytes"));
    let version = word(4);
    if version != CHECKPOINT_VERSION {
        return Err(Error::VersionUnsupported(version));
    }
    let (l, m, c) = (word(8) as usize, word(12) as usize, word(16) as usize);
    if l == 0 || m == 0 || c == 0 {
        return Err(Error::CorruptPayload(format!("zero dimension in L={l} M={m} C={c}")));
    }
    if bytes.len() != encoded_checkpoint_len(l, m, c) {
        return Err(Error::CorruptPayload(format!(
            "L={l} M={m} C={c} needs {} bytes, file has {}",
            encoded_checkpoint_len(l, m, c),
            bytes.len()
        )));
    }
    let checksum = u64::from_le_bytes(bytes[20..28].try_into().expect("8 bytes"));
    let payload = &bytes[HEADER_LEN..];
    if fnv1a(payload) != checksum {
        return Err(Error::CorruptPayload("checksum mismatch".into()));
    }
    let flat: Vec<f64> = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    MilParams::from_flat(l, m, c, &flat).map_err(|e| Error::CorruptPayload(format!("{e}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::milhead::init_params;
    use crate::numerics::RngStream;

    fn sample() -> MilParams {
        init_params(4, 8, 4, &mut RngStream::new(3, 3)).unwrap()
    }

    #[test]
    fn size_matches_layout() {
        let bytes = encode_checkpoint(&sample());
        assert_eq!(bytes.len(), 28 + (4 * 8 + 4 + 4 * 8 + 4) * 8);
    }

    #[test]
    fn roundtrip_is_bit_exact() {
        let p = sample();
        let back = decode_checkpoint(&encode_checkpoint(&p)).unwrap();
        let bits = |q: &MilParams| q.to_flat().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&back), bits(&p));
    }

    #[test]
    fn damaged_files_are_rejected() {
        let bytes = encode_checkpoint(&sample());
        assert_eq!(decode_checkpoint(b"MILE"), Err(Error::BadMagic));
        assert!(matches!(
            decode_checkpoint(&bytes[..bytes.len() - 8]),
            Err(Error::CorruptPayload(_))
        ));
        assert!(matches!(decode_checkpoint(&bytes[..20]), Err(Error::CorruptPayload(_))));
        let mut flipped = bytes.clone();
        flipped[40] ^= 0x10;
        assert!(matches!(decode_checkpoint(&flipped), Err(Error::CorruptPayload(_))));
        let mut v2 = bytes.clone();
        v2[4] = 9;
        assert_eq!(decode_checkpoint(&v2), Err(Error::VersionUnsupported(9)));
    }
}
