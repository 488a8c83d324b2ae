//! Run-length position coding of a bit sequence followed by Huffman coding.
//!
//! The sequence is reduced to the gaps between successive set bits, the first
//! gap measured from a virtual set bit at position -1. Gaps are coded with a
//! canonical Huffman code built with ties broken by ascending symbol value; a
//! single-symbol alphabet gets a 1-bit code.
//!
//! Stream layout (varints are LEB128):
//!
//! ```text
//! varint total_bits
//! varint gap_count
//! varint symbol_count
//! symbol_count x { varint gap_value, u8 code_length }   ascending gap_value
//! coded gaps, MSB-first, zero padded to a byte
//! ```

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap};

use super::bits::{read_varint, varint_len, write_varint, BitReader, BitWriter};
use crate::error::{Error, Result};

fn gaps(bits: impl Iterator<Item = bool>) -> Vec<u64> {
    let mut out = Vec::new();
    let mut last: i64 = -1;
    for (i, b) in bits.enumerate() {
        if b {
            out.push((i as i64 - last) as u64);
            last = i as i64;
        }
    }
    out
}

fn frequencies(gaps: &[u64]) -> BTreeMap<u64, u64> {
    let mut freq = BTreeMap::new();
    for &g in gaps {
        *freq.entry(g).or_insert(0u64) += 1;
    }
    freq
}

/// Huffman code lengths, indexed like `freq` (ascending symbol).
fn code_lengths(freq: &[(u64, u64)]) -> Vec<u32> {
    match freq.len() {
        0 => return Vec::new(),
        1 => return vec![1],
        _ => {}
    }
    // Nodes 0..n are leaves; internal nodes are appended. Heap key is
    // (weight, smallest symbol in subtree), so ties resolve by symbol value.
    let mut parent: Vec<usize> = vec![usize::MAX; freq.len()];
    let mut heap: BinaryHeap<Reverse<(u64, u64, usize)>> =
        freq.iter().enumerate().map(|(i, &(sym, w))| Reverse((w, sym, i))).collect();
    while heap.len() > 1 {
        let Reverse((w1, s1, a)) = heap.pop().unwrap();
        let Reverse((w2, s2, b)) = heap.pop().unwrap();
        let id = parent.len();
        parent.push(usize::MAX);
        parent[a] = id;
        parent[b] = id;
        heap.push(Reverse((w1 + w2, s1.min(s2), id)));
    }
    (0..freq.len())
        .map(|leaf| {
            let mut depth = 0;
            let mut n = leaf;
            while parent[n] != usize::MAX {
                n = parent[n];
                depth += 1;
            }
            depth
        })
        .collect()
}

/// Canonical codes for `(symbol, length)` pairs. Lengths stay well under 64
/// for any input shorter than ~10^13 bits.
fn canonical_codes(table: &[(u64, u32)]) -> Vec<(u64, u64, u32)> {
    let mut order: Vec<(u32, u64)> = table.iter().map(|&(s, l)| (l, s)).collect();
    order.sort_unstable();
    let mut out = Vec::with_capacity(order.len());
    let mut code = 0u64;
    let mut prev_len = 0u32;
    for (i, &(len, sym)) in order.iter().enumerate() {
        if i > 0 {
            code = (code + 1) << (len - prev_len);
        } else {
            code = 0;
        }
        prev_len = len;
        out.push((sym, code, len));
    }
    out
}

struct Table {
    symbols: Vec<(u64, u32)>,
    gap_count: u64,
}

fn build_table(gaps: &[u64]) -> Table {
    let freq: Vec<(u64, u64)> = frequencies(gaps).into_iter().collect();
    let lengths = code_lengths(&freq);
    let symbols = freq.iter().zip(lengths).map(|(&(s, _), l)| (s, l)).collect();
    Table { symbols, gap_count: gaps.len() as u64 }
}

fn write_header(total_bits: u64, table: &Table) -> Vec<u8> {
    let mut out = Vec::new();
    write_varint(&mut out, total_bits);
    write_varint(&mut out, table.gap_count);
    write_varint(&mut out, table.symbols.len() as u64);
    for &(sym, len) in &table.symbols {
        write_varint(&mut out, sym);
        out.push(len as u8);
    }
    out
}

/// Encodes `total_bits` bits from `bits`.
pub fn encode_bits(bits: impl Iterator<Item = bool>, total_bits: u64) -> Vec<u8> {
    let gaps = gaps(bits.take(total_bits as usize));
    let table = build_table(&gaps);
    let codes: BTreeMap<u64, (u64, u32)> =
        canonical_codes(&table.symbols).into_iter().map(|(s, c, l)| (s, (c, l))).collect();
    let mut w = BitWriter::with_prefix(write_header(total_bits, &table));
    for g in &gaps {
        let (code, len) = codes[g];
        w.push_code(code, len);
    }
    w.finish()
}

/// Header plus code table size in bytes, excluding the coded stream.
pub fn table_overhead(bits: impl Iterator<Item = bool>, total_bits: u64) -> usize {
    let table = build_table(&gaps(bits.take(total_bits as usize)));
    write_header(total_bits, &table).len()
}

fn byte_bits(data: &[u8]) -> impl Iterator<Item = bool> + '_ {
    data.iter().flat_map(|&b| (0..8).rev().map(move |i| (b >> i) & 1 == 1))
}

pub fn encode_bytes(data: &[u8]) -> Vec<u8> {
    encode_bits(byte_bits(data), data.len() as u64 * 8)
}

/// Decodes a stream back to `(total_bits, set bit positions)`.
pub fn decode_positions(data: &[u8]) -> Result<(u64, Vec<u64>)> {
    let mut pos = 0usize;
    let total_bits = read_varint(data, &mut pos)?;
    let gap_count = read_varint(data, &mut pos)?;
    let n = read_varint(data, &mut pos)?;
    let mut table = Vec::new();
    for _ in 0..n {
        let sym = read_varint(data, &mut pos)?;
        let len = *data.get(pos).ok_or_else(|| Error::Corrupt("code table truncated".into()))? as u32;
        pos += 1;
        if len == 0 || len > 64 {
            return Err(Error::Corrupt(format!("bad code length {len}")));
        }
        table.push((sym, len));
    }
    let lookup: BTreeMap<(u32, u64), u64> =
        canonical_codes(&table).into_iter().map(|(s, c, l)| ((l, c), s)).collect();
    let max_len = table.iter().map(|&(_, l)| l).max().unwrap_or(0);

    let mut reader = BitReader::new(&data[pos..]);
    let mut positions = Vec::with_capacity(gap_count as usize);
    let mut last: i64 = -1;
    for _ in 0..gap_count {
        let mut code = 0u64;
        let mut len = 0u32;
        let gap = loop {
            code = (code << 1) | reader.read_bit()? as u64;
            len += 1;
            if let Some(&s) = lookup.get(&(len, code)) {
                break s;
            }
            if len >= max_len {
                return Err(Error::Corrupt("invalid Huffman code".into()));
            }
        };
        last += gap as i64;
        if last as u64 >= total_bits {
            return Err(Error::Corrupt("gap runs past end of sequence".into()));
        }
        positions.push(last as u64);
    }
    Ok((total_bits, positions))
}

pub fn decode_bytes(data: &[u8]) -> Result<Vec<u8>> {
    let (total_bits, positions) = decode_positions(data)?;
    if total_bits % 8 != 0 {
        return Err(Error::Corrupt(format!("{total_bits} bits is not a whole number of bytes")));
    }
    let mut out = vec![0u8; (total_bits / 8) as usize];
    for p in positions {
        out[(p / 8) as usize] |= 0x80 >> (p % 8);
    }
    Ok(out)
}

/// Exact encoded size without materialising the stream.
pub fn encoded_len(bits: impl Iterator<Item = bool>, total_bits: u64) -> usize {
    let gaps = gaps(bits.take(total_bits as usize));
    let table = build_table(&gaps);
    let lengths: BTreeMap<u64, u32> = table.symbols.iter().copied().collect();
    let stream_bits: u64 = gaps.iter().map(|g| lengths[g] as u64).sum();
    let header = varint_len(total_bits)
        + varint_len(table.gap_count)
        + varint_len(table.symbols.len() as u64)
        + table.symbols.iter().map(|&(s, _)| varint_len(s) + 1).sum::<usize>();
    header + stream_bits.div_ceil(8) as usize
}
