//! Lossless size oracles.
//!
//! Compressed size stands in for the entropy of a raster. Sizes are always
//! taken over the canonical raw payload (see [`serialize`]), never over a
//! container format.

mod bits;
pub mod rle_huffman;

use std::fmt;
use std::str::FromStr;

use crate::error::{invalid_arg, Error, Result};
use crate::raster::{GrayRaster, BLACK};

/// DEFLATE effort level handed to miniz_oxide; 10 is its maximum.
pub const DEFLATE_LEVEL: u8 = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Codec {
    /// Raw DEFLATE (RFC 1951) at [`DEFLATE_LEVEL`].
    Deflate,
    /// Foreground-gap run lengths coded with a canonical Huffman table.
    RleHuffman,
    /// Identity; wraps uncompressed bytes as a blob.
    Stored,
}

impl Codec {
    pub fn name(self) -> &'static str {
        match self {
            Codec::Deflate => "deflate",
            Codec::RleHuffman => "rle_huffman",
            Codec::Stored => "stored",
        }
    }

    pub fn level(self) -> u8 {
        match self {
            Codec::Deflate => DEFLATE_LEVEL,
            Codec::RleHuffman | Codec::Stored => 0,
        }
    }
}

impl fmt::Display for Codec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Codec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "deflate" => Ok(Codec::Deflate),
            "rle_huffman" | "rlehuff" => Ok(Codec::RleHuffman),
            "stored" | "raw" => Ok(Codec::Stored),
            other => Err(invalid_arg(format!("unknown codec {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompressedBlob {
    pub bytes: Vec<u8>,
    pub original_len: usize,
    pub codec: Codec,
}

impl CompressedBlob {
    /// Wraps bytes that were never compressed.
    pub fn stored(data: &[u8]) -> Self {
        compress(data, Codec::Stored)
    }

    pub fn len(&self) -> usize {
        self.bytes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bytes.is_empty()
    }

    pub fn decompress(&self) -> Result<Vec<u8>> {
        let out = match self.codec {
            Codec::Deflate => miniz_oxide::inflate::decompress_to_vec(&self.bytes)
                .map_err(|e| Error::Corrupt(format!("inflate failed: {e:?}")))?,
            Codec::RleHuffman => rle_huffman::decode_bytes(&self.bytes)?,
            Codec::Stored => self.bytes.clone(),
        };
        if out.len() != self.original_len {
            return Err(Error::Corrupt(format!(
                "decoded {} bytes, expected {}",
                out.len(),
                self.original_len
            )));
        }
        Ok(out)
    }
}

pub fn compress(data: &[u8], codec: Codec) -> CompressedBlob {
    let bytes = match codec {
        Codec::Deflate => miniz_oxide::deflate::compress_to_vec(data, DEFLATE_LEVEL),
        Codec::RleHuffman => rle_huffman::encode_bytes(data),
        Codec::Stored => data.to_vec(),
    };
    CompressedBlob { bytes, original_len: data.len(), codec }
}

/// Canonical raw payload of a raster.
///
/// Gray rasters are `width * height` bytes, row-major. Mono rasters pack each
/// row MSB-first into `ceil(width / 8)` bytes with bit 1 for a black
/// (foreground) pixel; trailing pad bits are 0.
pub fn serialize(r: &GrayRaster) -> Vec<u8> {
    if !r.is_mono() {
        return r.pixels().to_vec();
    }
    let stride = r.width().div_ceil(8);
    let mut out = vec![0u8; stride * r.height()];
    for (row, dst) in r.rows().zip(out.chunks_exact_mut(stride)) {
        for (x, &p) in row.iter().enumerate() {
            if p == BLACK {
                dst[x / 8] |= 0x80 >> (x % 8);
            }
        }
    }
    out
}

/// Compressed payload size in bytes.
pub fn compressed_size(r: &GrayRaster, codec: Codec) -> usize {
    compress(&serialize(r), codec).len()
}

/// Size of the gap-coded foreground positions of a mono raster, with rows
/// concatenated into one bit sequence (no row padding).
pub fn rle_huffman_size(r: &GrayRaster) -> Result<usize> {
    if !r.is_mono() {
        return Err(invalid_arg("rle_huffman_size requires a mono raster"));
    }
    let bits = r.pixels().iter().map(|&p| p == BLACK);
    Ok(rle_huffman::encode_bits(bits, r.pixel_count() as u64).len())
}

/// Ratio of the size after a second DEFLATE pass to the blob size.
///
/// Close to 1 when the first pass already reached the entropy limit; well
/// below 1 when the first pass left redundancy behind. An empty blob reports 1.
pub fn double_compression_ratio(blob: &CompressedBlob) -> f64 {
    if blob.is_empty() {
        return 1.0;
    }
    compress(&blob.bytes, Codec::Deflate).len() as f64 / blob.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{RngCore, SeedableRng};

    const MIB: usize = 1 << 20;

    fn random_bytes(n: usize, seed: u64) -> Vec<u8> {
        let mut buf = vec![0u8; n];
        rand_chacha::ChaCha8Rng::seed_from_u64(seed).fill_bytes(&mut buf);
        buf
    }

    #[test]
    fn empty_roundtrip() {
        for codec in [Codec::Deflate, Codec::RleHuffman, Codec::Stored] {
            let blob = compress(&[], codec);
            assert_eq!(blob.decompress().unwrap(), Vec::<u8>::new());
        }
    }

    #[test]
    fn zeros_collapse() {
        let blob = compress(&vec![0u8; 1_000_000], Codec::Deflate);
        assert!(blob.len() < 5_000, "{}", blob.len());
        // golden, miniz_oxide level 10
        assert_eq!(blob.len(), GOLDEN_ZEROS_1E6);
    }

    #[test]
    fn random_does_not_compress() {
        let data = random_bytes(1_000_000, 7);
        let blob = compress(&data, Codec::Deflate);
        assert!(blob.len() as f64 > 0.99 * data.len() as f64);
        assert_eq!(blob.len(), GOLDEN_RANDOM_1E6);
    }

    #[test]
    fn deterministic_output() {
        let data = random_bytes(50_000, 3);
        assert_eq!(compress(&data, Codec::Deflate), compress(&data, Codec::Deflate));
    }

    #[test]
    fn raster_sizes() {
        let one = GrayRaster::filled(1, 1, 0).unwrap();
        assert_eq!(compressed_size(&one, Codec::Deflate), GOLDEN_ONE_PIXEL);

        let white = GrayRaster::filled(1000, 1000, 255).unwrap();
        assert!(compressed_size(&white, Codec::Deflate) < 5000);

        let gray = GrayRaster::filled(13, 5, 0).unwrap();
        let mono = gray.to_monochrome(128);
        assert_eq!(serialize(&gray).len(), 65);
        assert_eq!(serialize(&mono).len(), 2 * 5);
    }

    #[test]
    fn mono_packing_is_msb_first() {
        let mut px = vec![255u8; 10];
        px[0] = 0;
        px[9] = 0;
        let r = GrayRaster::new_mono(10, 1, px).unwrap();
        assert_eq!(serialize(&r), vec![0b1000_0000, 0b0100_0000]);
    }

    #[test]
    fn rle_huffman_requires_mono() {
        let r = GrayRaster::filled(2, 2, 0).unwrap();
        assert!(matches!(rle_huffman_size(&r), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn rle_huffman_examples() {
        // Header only: total bits, zero gaps, zero symbols.
        let white = GrayRaster::filled(8, 8, 255).unwrap().to_monochrome(128);
        assert_eq!(rle_huffman_size(&white).unwrap(), 3);

        // 64 gaps of 1, single symbol coded in 1 bit: 3 header bytes,
        // 2 table bytes, 64 bits of stream.
        let black = GrayRaster::filled(8, 8, 0).unwrap().to_monochrome(128);
        assert_eq!(rle_huffman_size(&black).unwrap(), 3 + 2 + 8);

        // Diagonal: positions 0, 9, ..., 63 give gaps [1, 9 x7]. Two symbols,
        // one bit each: 3 header + 2*2 table bytes + 8 stream bits.
        let diag: Vec<u8> = (0..64).map(|i| if i % 9 == 0 { 0 } else { 255 }).collect();
        let diag = GrayRaster::new_mono(8, 8, diag).unwrap();
        assert_eq!(rle_huffman_size(&diag).unwrap(), 8);
    }

    #[test]
    fn double_compression_examples() {
        let random = compress(&random_bytes(MIB, 11), Codec::Deflate);
        assert!(double_compression_ratio(&random) >= 0.99);

        // Long zero runs deflate to a train of identical max-length match
        // codes, which a second pass still squeezes hard.
        let zeros = compress(&vec![0u8; MIB], Codec::Deflate);
        let r = double_compression_ratio(&zeros);
        assert!((r - GOLDEN_ZEROS_DOUBLE).abs() < 1e-12, "{r}");

        let raw = CompressedBlob::stored(&vec![0u8; MIB]);
        assert!(double_compression_ratio(&raw) < 0.01);
        assert_eq!(double_compression_ratio(&CompressedBlob::stored(&[])), 1.0);
    }

    #[test]
    fn random_pixels_stay_near_entropy() {
        let r = GrayRaster::new(300, 200, random_bytes(60_000, 5)).unwrap();
        let bound = 0.98 * r.order0_entropy() * r.pixel_count() as f64 / 8.0;
        assert!(compressed_size(&r, Codec::Deflate) as f64 >= bound);
    }

    #[test]
    fn rle_huffman_within_packed_bound() {
        let px: Vec<u8> = random_bytes(40 * 30, 9).iter().map(|&b| if b < 40 { 0 } else { 255 }).collect();
        let r = GrayRaster::new_mono(40, 30, px).unwrap();
        let table = rle_huffman::table_overhead(r.pixels().iter().map(|&p| p == BLACK), r.pixel_count() as u64);
        let packed = serialize(&r).len();
        assert!(rle_huffman_size(&r).unwrap() <= packed + table + 16);
    }

    const GOLDEN_ZEROS_1E6: usize = 985;
    const GOLDEN_RANDOM_1E6: usize = 1_000_160;
    const GOLDEN_ONE_PIXEL: usize = 3;
    const GOLDEN_ZEROS_DOUBLE: f64 = 0.041626331074540175;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(256))]
        #[test]
        fn roundtrip(data in proptest::collection::vec(any::<u8>(), 0..2048), sparse in any::<bool>()) {
            let data: Vec<u8> = if sparse { data.iter().map(|b| b & 0x11).collect() } else { data };
            for codec in [Codec::Deflate, Codec::RleHuffman, Codec::Stored] {
                let blob = compress(&data, codec);
                prop_assert_eq!(blob.decompress().unwrap(), data.clone());
            }
        }
    }
}
