//! Block-sorting compressor in the bzip2 family: Burrows-Wheeler transform,
//! move-to-front, zero-run coding, then a single canonical Huffman table.
//!
//! The container is minimal and self-describing rather than bzip2
//! compatible; the point is a faithful block-sorting pipeline whose exact
//! output bit count feeds the BZ estimator, with the transform itself
//! switchable so its contribution can be measured.
//!
//! Layout, all bit fields LSB-first:
//!
//! ```text
//! flags:8        bit 0 = BWT applied, bit 1 = stored verbatim
//! n:32           payload byte length
//! primary:32     only when BWT applied: row of the sentinel in the L column
//! n_syms:16      code length table size (symbol stream only)
//! lengths:4*n    code lengths, then Huffman-coded symbols ending with EOB
//! ```

use crate::error::{Error, Result};
use crate::estimators::bits::{BitReader, BitWriter};
use crate::estimators::huffman::{build_code_lengths, canonical_codes, CanonicalDecoder};

const FLAG_BWT: u32 = 1;
const FLAG_STORED: u32 = 2;

// Symbol space for the entropy stage: two run digits, the nonzero
// move-to-front values shifted by one, and a terminator.
const RUN_A: u16 = 0;
const RUN_B: u16 = 1;
const EOB: u16 = 257;
const N_SYMS: usize = 258;

/// Burrows-Wheeler transform with a virtual sentinel smaller than every
/// byte. Returns the last column (sentinel entry removed) and the row index
/// the sentinel occupied.
pub fn bwt(data: &[u8]) -> (Vec<u8>, u32) {
    let n = data.len();
    let mut t: Vec<u32> = data.iter().map(|&b| u32::from(b) + 1).collect();
    t.push(0);
    let sa = suffix_array(&t);
    let mut out = Vec::with_capacity(n);
    let mut primary = 0u32;
    for (row, &j) in sa.iter().enumerate() {
        if j == 0 {
            primary = row as u32;
        } else {
            out.push(data[j as usize - 1]);
        }
    }
    (out, primary)
}

/// Inverts [`bwt`].
pub fn inverse_bwt(last: &[u8], primary: u32) -> Result<Vec<u8>> {
    let n = last.len();
    let m = n + 1;
    let p = primary as usize;
    if p >= m {
        return Err(Error::CorruptStream("sentinel row out of range".into()));
    }
    // Symbol at row i of the L column, sentinel mapped to 0, bytes to b+1.
    let sym = |i: usize| -> usize {
        if i == p {
            0
        } else if i < p {
            usize::from(last[i]) + 1
        } else {
            usize::from(last[i - 1]) + 1
        }
    };
    let mut counts = [0u32; 257];
    for i in 0..m {
        counts[sym(i)] += 1;
    }
    let mut starts = [0u32; 258];
    for s in 0..257 {
        starts[s + 1] = starts[s] + counts[s];
    }
    let mut occ = [0u32; 257];
    let mut lf = vec![0u32; m];
    for (i, slot) in lf.iter_mut().enumerate() {
        let s = sym(i);
        *slot = starts[s] + occ[s];
        occ[s] += 1;
    }
    // Row 0 starts with the sentinel; following LF collects the input
    // back-to-front, ending on the sentinel itself.
    let mut out = Vec::with_capacity(m);
    let mut row = 0usize;
    for _ in 0..m {
        out.push(sym(row));
        row = lf[row] as usize;
    }
    if out.pop() != Some(0) || row != 0 {
        return Err(Error::CorruptStream("inconsistent transform state".into()));
    }
    out.reverse();
    Ok(out.into_iter().map(|s| (s - 1) as u8).collect())
}

// Suffix array by prefix doubling. The input already carries a unique
// smallest sentinel, so ranks always separate fully.
fn suffix_array(t: &[u32]) -> Vec<u32> {
    let m = t.len();
    let mut sa: Vec<u32> = (0..m as u32).collect();
    let mut rank: Vec<u32> = t.to_vec();
    let mut tmp = vec![0u32; m];
    let mut k = 1usize;
    loop {
        let key = |i: u32| {
            let i = i as usize;
            let r2 = if i + k < m { rank[i + k] + 1 } else { 0 };
            (rank[i], r2)
        };
        sa.sort_unstable_by_key(|&i| key(i));
        tmp[sa[0] as usize] = 0;
        for j in 1..m {
            let bump = u32::from(key(sa[j]) != key(sa[j - 1]));
            tmp[sa[j] as usize] = tmp[sa[j - 1] as usize] + bump;
        }
        rank.copy_from_slice(&tmp);
        if rank[sa[m - 1] as usize] as usize == m - 1 {
            return sa;
        }
        k *= 2;
    }
}

pub(crate) fn mtf(data: &[u8]) -> Vec<u8> {
    let mut table: [u8; 256] = std::array::from_fn(|i| i as u8);
    data.iter()
        .map(|&b| {
            let idx = table.iter().position(|&x| x == b).unwrap();
            table.copy_within(..idx, 1);
            table[0] = b;
            idx as u8
        })
        .collect()
}

pub(crate) fn inverse_mtf(data: &[u8]) -> Vec<u8> {
    let mut table: [u8; 256] = std::array::from_fn(|i| i as u8);
    data.iter()
        .map(|&idx| {
            let idx = usize::from(idx);
            let b = table[idx];
            table.copy_within(..idx, 1);
            table[0] = b;
            b
        })
        .collect()
}

// Zero runs become run digits in bijective base 2 (RUN_A = 1, RUN_B = 2),
// nonzero values shift up by one.
fn run_encode(mtf_data: &[u8]) -> Vec<u16> {
    let mut out = Vec::with_capacity(mtf_data.len() / 2 + 8);
    let mut run = 0u64;
    let flush = |run: &mut u64, out: &mut Vec<u16>| {
        let mut l = *run;
        while l > 0 {
            if l & 1 == 1 {
                out.push(RUN_A);
                l = (l - 1) / 2;
            } else {
                out.push(RUN_B);
                l = (l - 2) / 2;
            }
        }
        *run = 0;
    };
    for &v in mtf_data {
        if v == 0 {
            run += 1;
        } else {
            flush(&mut run, &mut out);
            out.push(u16::from(v) + 1);
        }
    }
    flush(&mut run, &mut out);
    out.push(EOB);
    out
}

fn run_decode(syms: &[u16]) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    let mut run = 0u64;
    let mut place = 0u32;
    let flush = |run: &mut u64, place: &mut u32, out: &mut Vec<u8>| {
        for _ in 0..*run {
            out.push(0);
        }
        *run = 0;
        *place = 0;
    };
    for &s in syms {
        match s {
            RUN_A => {
                run += 1u64 << place;
                place += 1;
            }
            RUN_B => {
                run += 2u64 << place;
                place += 1;
            }
            2..=256 => {
                flush(&mut run, &mut place, &mut out);
                out.push((s - 1) as u8);
            }
            _ => return Err(Error::CorruptStream("invalid run symbol".into())),
        }
        if out.len() > (1 << 31) {
            return Err(Error::CorruptStream("run expansion too large".into()));
        }
    }
    flush(&mut run, &mut place, &mut out);
    Ok(out)
}

/// Compresses `data`, optionally skipping the block-sorting transform.
/// Returns the container and its exact length in bits before padding.
pub fn compress(data: &[u8], use_bwt: bool) -> (Vec<u8>, u64) {
    let (payload, primary) = if use_bwt {
        let (l, p) = bwt(data);
        (l, Some(p))
    } else {
        (data.to_vec(), None)
    };
    let syms = run_encode(&mtf(&payload));

    let mut freq = [0u64; N_SYMS];
    for &s in &syms {
        freq[usize::from(s)] += 1;
    }
    let lengths = build_code_lengths(&freq, 15);
    let n_used = lengths.iter().rposition(|&l| l > 0).map_or(0, |p| p + 1);
    let codes = canonical_codes(&lengths).expect("freq-built table is canonical");

    let mut body_bits = 16 + 4 * n_used as u64;
    for &s in &syms {
        body_bits += u64::from(lengths[usize::from(s)]);
    }
    if primary.is_some() {
        body_bits += 32;
    }
    let stored_bits = 8 * data.len() as u64;

    let mut w = BitWriter::with_capacity(data.len() / 2 + 16);
    if stored_bits < body_bits {
        w.write_bits(FLAG_STORED, 8);
        w.write_bits(data.len() as u32, 32);
        for &b in data {
            w.write_aligned_byte(b);
        }
    } else {
        let flags = if use_bwt { FLAG_BWT } else { 0 };
        w.write_bits(flags, 8);
        w.write_bits(data.len() as u32, 32);
        if let Some(p) = primary {
            w.write_bits(p, 32);
        }
        w.write_bits(n_used as u32, 16);
        for &l in &lengths[..n_used] {
            w.write_bits(u32::from(l), 4);
        }
        for &s in &syms {
            let i = usize::from(s);
            w.write_code(codes[i], u32::from(lengths[i]));
        }
    }
    let bits = w.bit_len();
    (w.into_bytes(), bits)
}

/// Decompresses a container produced by [`compress`].
pub fn decompress(data: &[u8]) -> Result<Vec<u8>> {
    let mut r = BitReader::new(data);
    let flags = r.read_bits(8)?;
    let n = r.read_bits(32)? as usize;
    if flags & FLAG_STORED != 0 {
        let mut out = Vec::with_capacity(n);
        for _ in 0..n {
            out.push(r.read_aligned_byte()?);
        }
        return Ok(out);
    }
    let primary = if flags & FLAG_BWT != 0 {
        Some(r.read_bits(32)?)
    } else {
        None
    };
    let n_used = r.read_bits(16)? as usize;
    if n_used > N_SYMS {
        return Err(Error::CorruptStream("code table too large".into()));
    }
    let mut lengths = vec![0u8; n_used];
    for l in &mut lengths {
        *l = r.read_bits(4)? as u8;
    }
    let dec = CanonicalDecoder::new(&lengths)?;
    let mut syms = Vec::new();
    loop {
        let s = dec.decode(&mut r)?;
        if s == EOB {
            break;
        }
        syms.push(s);
        if syms.len() > 16 * (n + 16) {
            return Err(Error::CorruptStream("symbol stream overrun".into()));
        }
    }
    let payload = inverse_mtf(&run_decode(&syms)?);
    let out = match primary {
        Some(p) => inverse_bwt(&payload, p)?,
        None => payload,
    };
    if out.len() != n {
        return Err(Error::CorruptStream(format!(
            "expected {n} bytes, reconstructed {}",
            out.len()
        )));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn banana_transform() {
        let (last, primary) = bwt(b"banana");
        assert_eq!(last, b"annbaa");
        assert_eq!(primary, 4);
        assert_eq!(inverse_bwt(&last, primary).unwrap(), b"banana");
    }

    #[test]
    fn transform_roundtrips_on_edge_shapes() {
        let cases: Vec<Vec<u8>> = vec![
            vec![],
            vec![0],
            vec![255],
            vec![7; 100],
            b"abababababab".to_vec(),
            b"mississippi".to_vec(),
            (0u8..=255).collect(),
        ];
        for data in cases {
            let (last, primary) = bwt(&data);
            assert_eq!(inverse_bwt(&last, primary).unwrap(), data, "data={data:?}");
        }
    }

    #[test]
    fn transform_roundtrips_on_random_inputs() {
        let mut rng = rand_xoshiro::Xoshiro256StarStar::seed_from_u64(21);
        for _ in 0..50 {
            let len = rng.gen_range(0..2000);
            // Small alphabets provoke long repeats and rank ties.
            let alpha = rng.gen_range(2..=8u8);
            let data: Vec<u8> = (0..len).map(|_| rng.gen_range(0..alpha)).collect();
            let (last, primary) = bwt(&data);
            assert_eq!(inverse_bwt(&last, primary).unwrap(), data);
        }
    }

    #[test]
    fn transform_groups_symbols() {
        // On strongly periodic input the last column is more clumped than
        // the input itself; count adjacent equal pairs as a proxy.
        let data = b"the quick brown fox ".repeat(50);
        let (last, _) = bwt(&data);
        let clumps = |s: &[u8]| s.windows(2).filter(|w| w[0] == w[1]).count();
        assert!(clumps(&last) > 2 * clumps(&data));
    }

    #[test]
    fn mtf_fixture() {
        assert_eq!(mtf(&[1, 1, 0, 0]), vec![1, 0, 1, 0]);
        let data = b"caaab".to_vec();
        assert_eq!(inverse_mtf(&mtf(&data)), data);
    }

    #[test]
    fn run_coding_handles_all_lengths() {
        for run_len in 1..=40usize {
            let mut data = vec![0u8; run_len];
            data.push(3);
            let syms = run_encode(&data);
            assert_eq!(run_decode(&syms[..syms.len() - 1]).unwrap(), data);
        }
    }

    #[test]
    fn roundtrip_with_and_without_transform() {
        let mut rng = rand_xoshiro::Xoshiro256StarStar::seed_from_u64(22);
        let mut cases: Vec<Vec<u8>> = vec![
            vec![],
            vec![0; 4096],
            b"to be or not to be, that is the question".repeat(30),
        ];
        cases.push((0..3000).map(|_| rng.gen_range(b'a'..=b'f')).collect());
        cases.push((0..5000).map(|_| rng.gen()).collect());
        for data in cases {
            for use_bwt in [true, false] {
                let (stream, bits) = compress(&data, use_bwt);
                assert!(bits <= 8 * stream.len() as u64);
                assert_eq!(decompress(&stream).unwrap(), data, "bwt={use_bwt}");
            }
        }
    }

    #[test]
    fn transform_helps_on_text() {
        let data = b"She had been watching him the last hour, as he walked up and \
                     down the gravel path with his head bent and his hands behind him."
            .repeat(40);
        let (_, with) = compress(&data, true);
        let (_, without) = compress(&data, false);
        assert!(with < without, "with={with} without={without}");
    }

    #[test]
    fn constant_input_compresses_hard() {
        let (_, bits) = compress(&[0u8; 4096], true);
        assert!(bits < 4096 * 8 / 20, "got {bits} bits");
    }

    #[test]
    fn random_input_falls_back_to_stored() {
        let mut rng = rand_xoshiro::Xoshiro256StarStar::seed_from_u64(23);
        let data: Vec<u8> = (0..4096).map(|_| rng.gen()).collect();
        let (_, bits) = compress(&data, true);
        assert!(bits <= 4096 * 8 + 48, "got {bits} bits");
    }

    #[test]
    fn deterministic_across_calls() {
        let data = b"deterministic block sort".repeat(25);
        assert_eq!(compress(&data, true), compress(&data, true));
    }

    #[test]
    fn corrupt_streams_error() {
        let (stream, _) = compress(b"hello block sort world", true);
        assert!(decompress(&stream[..stream.len() - 1]).is_err());
        assert!(decompress(&[]).is_err());
        let mut bad = stream.clone();
        // Sentinel row far out of range.
        bad[1] = 0xEE;
        assert!(decompress(&bad).is_err());
    }
}
