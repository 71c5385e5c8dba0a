//! Canonical, length-limited Huffman coding shared by the DEFLATE and
//! block-sorting codecs.
//!
//! Code lengths are built from symbol frequencies with the two-queue
//! algorithm, then rebalanced to the requested depth limit. Codes are
//! assigned canonically (by length, then symbol), so a decoder needs only
//! the length table.

use crate::error::{Error, Result};
use crate::estimators::bits::BitReader;

/// Computes code lengths for `freqs`, none exceeding `max_len`.
///
/// Symbols with zero frequency get length 0. A single used symbol gets
/// length 1.
pub fn build_code_lengths(freqs: &[u64], max_len: u8) -> Vec<u8> {
    let used: Vec<usize> = (0..freqs.len()).filter(|&s| freqs[s] > 0).collect();
    let mut lengths = vec![0u8; freqs.len()];
    match used.len() {
        0 => return lengths,
        1 => {
            lengths[used[0]] = 1;
            return lengths;
        }
        _ => {}
    }

    // Two-queue Huffman over leaves sorted by (freq, symbol). Merged nodes
    // are produced in nondecreasing weight order, so a second FIFO queue
    // keeps the whole merge loop linear.
    let mut leaves = used.clone();
    leaves.sort_by_key(|&s| (freqs[s], s));

    #[derive(Clone)]
    enum Node {
        Leaf(usize),
        Internal(usize, usize),
    }
    let mut nodes: Vec<(u64, Node)> = leaves
        .iter()
        .map(|&s| (freqs[s], Node::Leaf(s)))
        .collect();
    let mut q1: std::collections::VecDeque<usize> = (0..nodes.len()).collect();
    let mut q2: std::collections::VecDeque<usize> = std::collections::VecDeque::new();

    let pop_min = |q1: &mut std::collections::VecDeque<usize>,
                       q2: &mut std::collections::VecDeque<usize>,
                       nodes: &Vec<(u64, Node)>| {
        match (q1.front(), q2.front()) {
            (Some(&a), Some(&b)) => {
                if nodes[a].0 <= nodes[b].0 {
                    q1.pop_front().unwrap()
                } else {
                    q2.pop_front().unwrap()
                }
            }
            (Some(_), None) => q1.pop_front().unwrap(),
            (None, Some(_)) => q2.pop_front().unwrap(),
            (None, None) => unreachable!("huffman merge queues exhausted"),
        }
    };

    let mut root = 0;
    while q1.len() + q2.len() > 1 {
        let a = pop_min(&mut q1, &mut q2, &nodes);
        let b = pop_min(&mut q1, &mut q2, &nodes);
        let merged = (nodes[a].0 + nodes[b].0, Node::Internal(a, b));
        nodes.push(merged);
        root = nodes.len() - 1;
        q2.push_back(root);
    }

    // Depth-first walk assigns raw (unlimited) depths.
    let mut raw = vec![0u8; freqs.len()];
    let mut stack = vec![(root, 0u32)];
    while let Some((idx, depth)) = stack.pop() {
        match nodes[idx].1 {
            Node::Leaf(sym) => raw[sym] = depth.min(255) as u8,
            Node::Internal(a, b) => {
                stack.push((a, depth + 1));
                stack.push((b, depth + 1));
            }
        }
    }

    // Rebalance depths that exceed the limit, keeping the Kraft sum exact,
    // then hand lengths back to symbols ordered by descending frequency.
    let mut count_per_len = vec![0usize; usize::from(max_len) + 1];
    for &s in &used {
        let l = raw[s].min(max_len) as usize;
        count_per_len[l] += 1;
    }
    let cap = 1u64 << max_len;
    let mut total: u64 = (1..=usize::from(max_len))
        .map(|l| (count_per_len[l] as u64) << (usize::from(max_len) - l))
        .sum();
    while total > cap {
        count_per_len[usize::from(max_len)] -= 1;
        for l in (1..usize::from(max_len)).rev() {
            if count_per_len[l] > 0 {
                count_per_len[l] -= 1;
                count_per_len[l + 1] += 2;
                break;
            }
        }
        total -= 1;
    }

    let mut by_freq = used;
    by_freq.sort_by(|&a, &b| freqs[b].cmp(&freqs[a]).then(a.cmp(&b)));
    let mut iter = by_freq.into_iter();
    for len in 1..=usize::from(max_len) {
        for _ in 0..count_per_len[len] {
            let sym = iter.next().expect("length histogram matches symbol count");
            lengths[sym] = len as u8;
        }
    }
    lengths
}

/// Assigns canonical codes to a length table (RFC 1951 ordering: shorter
/// codes first, ties by symbol index).
pub fn canonical_codes(lengths: &[u8]) -> Result<Vec<u16>> {
    let max_len = usize::from(*lengths.iter().max().unwrap_or(&0));
    let mut bl_count = vec![0u32; max_len + 1];
    for &l in lengths {
        if l > 0 {
            bl_count[usize::from(l)] += 1;
        }
    }
    let mut code = 0u32;
    let mut next_code = vec![0u32; max_len + 2];
    for len in 1..=max_len {
        code = (code + bl_count[len - 1]) << 1;
        next_code[len] = code;
    }
    let mut codes = vec![0u16; lengths.len()];
    for (sym, &l) in lengths.iter().enumerate() {
        if l > 0 {
            let c = next_code[usize::from(l)];
            if c >= (1 << l) {
                return Err(Error::CorruptStream("oversubscribed code lengths".into()));
            }
            codes[sym] = c as u16;
            next_code[usize::from(l)] += 1;
        }
    }
    Ok(codes)
}

/// Canonical Huffman decoder driven by a code-length table.
#[derive(Debug, Clone)]
pub struct CanonicalDecoder {
    // Per length: first canonical code, index of its first symbol, count.
    first_code: Vec<u32>,
    first_index: Vec<u32>,
    counts: Vec<u32>,
    symbols: Vec<u16>,
    max_len: usize,
}

impl CanonicalDecoder {
    pub fn new(lengths: &[u8]) -> Result<Self> {
        let max_len = usize::from(*lengths.iter().max().unwrap_or(&0));
        if max_len == 0 {
            return Err(Error::CorruptStream("empty code length table".into()));
        }
        let mut counts = vec![0u32; max_len + 1];
        for &l in lengths {
            if l > 0 {
                counts[usize::from(l)] += 1;
            }
        }
        // Kraft check: a decodable table must not be oversubscribed.
        let mut kraft = 0u64;
        for len in 1..=max_len {
            kraft += u64::from(counts[len]) << (max_len - len);
        }
        if kraft > (1u64 << max_len) {
            return Err(Error::CorruptStream("oversubscribed code lengths".into()));
        }

        let mut symbols: Vec<u16> = (0..lengths.len() as u16)
            .filter(|&s| lengths[usize::from(s)] > 0)
            .collect();
        symbols.sort_by_key(|&s| (lengths[usize::from(s)], s));

        let mut first_code = vec![0u32; max_len + 1];
        let mut first_index = vec![0u32; max_len + 1];
        let mut code = 0u32;
        let mut index = 0u32;
        for len in 1..=max_len {
            code <<= 1;
            first_code[len] = code;
            first_index[len] = index;
            code += counts[len];
            index += counts[len];
        }
        Ok(Self {
            first_code,
            first_index,
            counts,
            symbols,
            max_len,
        })
    }

    /// Decodes one symbol, pulling bits MSB-first semantics from the
    /// LSB-first reader (codes were written bit-reversed).
    pub fn decode(&self, reader: &mut BitReader<'_>) -> Result<u16> {
        let mut code = 0u32;
        for len in 1..=self.max_len {
            code = (code << 1) | reader.read_bit()?;
            let offset = code.wrapping_sub(self.first_code[len]);
            if offset < self.counts[len] {
                return Ok(self.symbols[(self.first_index[len] + offset) as usize]);
            }
        }
        Err(Error::CorruptStream("invalid huffman code".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::bits::BitWriter;

    fn roundtrip_symbols(freqs: &[u64], max_len: u8, stream: &[u16]) {
        let lengths = build_code_lengths(freqs, max_len);
        let codes = canonical_codes(&lengths).unwrap();
        let mut w = BitWriter::new();
        for &s in stream {
            let l = lengths[usize::from(s)];
            assert!(l > 0, "symbol {s} has no code");
            w.write_code(codes[usize::from(s)], u32::from(l));
        }
        let bytes = w.into_bytes();
        let dec = CanonicalDecoder::new(&lengths).unwrap();
        let mut r = BitReader::new(&bytes);
        for &s in stream {
            assert_eq!(dec.decode(&mut r).unwrap(), s);
        }
    }

    #[test]
    fn kraft_equality_holds() {
        let freqs = [5u64, 9, 12, 13, 16, 45, 0, 3];
        let lengths = build_code_lengths(&freqs, 15);
        let kraft: f64 = lengths
            .iter()
            .filter(|&&l| l > 0)
            .map(|&l| 0.5f64.powi(i32::from(l)))
            .sum();
        assert!((kraft - 1.0).abs() < 1e-12, "kraft sum {kraft}");
    }

    #[test]
    fn single_symbol_gets_one_bit() {
        let lengths = build_code_lengths(&[0, 7, 0], 15);
        assert_eq!(lengths, vec![0, 1, 0]);
    }

    #[test]
    fn depth_limit_enforced() {
        // Fibonacci-ish frequencies force deep unbalanced trees.
        let freqs: Vec<u64> = {
            let mut v = vec![1u64, 1];
            for i in 2..30 {
                let next = v[i - 1] + v[i - 2];
                v.push(next);
            }
            v
        };
        let lengths = build_code_lengths(&freqs, 9);
        assert!(lengths.iter().all(|&l| l <= 9));
        let kraft: u64 = lengths
            .iter()
            .filter(|&&l| l > 0)
            .map(|&l| 1u64 << (9 - u32::from(l)))
            .sum();
        assert!(kraft <= 1 << 9);
        // Still decodable.
        canonical_codes(&lengths).unwrap();
        CanonicalDecoder::new(&lengths).unwrap();
    }

    #[test]
    fn encode_decode_roundtrip() {
        let freqs = [40u64, 1, 1, 2, 30, 9, 9, 9, 0, 0, 4];
        let stream: Vec<u16> = (0..200).map(|i| [0u16, 4, 5, 6, 7, 10, 1, 2, 3][i % 9]).collect();
        roundtrip_symbols(&freqs, 15, &stream);
    }

    #[test]
    fn oversubscribed_table_rejected() {
        assert!(CanonicalDecoder::new(&[1, 1, 1]).is_err());
    }
}
