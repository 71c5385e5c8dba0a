//! A DEFLATE (RFC 1951) codec.
//!
//! The compressor reports the exact pre-padding bit length of the stream it
//! produces, which is what the ZIP estimator needs; general-purpose
//! libraries only hand back whole bytes and fix their own effort ladder.
//! The matcher depth scales with an effort level from 1 to 9, mirroring the
//! usual zlib knob.
//!
//! Streams are raw deflate (no zlib/gzip wrapper) and interoperate with
//! other inflaters, which the tests check against flate2.

use crate::error::{Error, Result};
use crate::estimators::bits::{BitReader, BitWriter};
use crate::estimators::huffman::{build_code_lengths, canonical_codes, CanonicalDecoder};

const MIN_MATCH: usize = 3;
const MAX_MATCH: usize = 258;
const MAX_DIST: usize = 32768;
const HASH_BITS: u32 = 15;
const NO_POS: u32 = u32::MAX;

// Length codes 257..=285: base length and extra bit count.
const LENGTH_BASE: [u16; 29] = [
    3, 4, 5, 6, 7, 8, 9, 10, 11, 13, 15, 17, 19, 23, 27, 31, 35, 43, 51, 59, 67, 83, 99, 115,
    131, 163, 195, 227, 258,
];
const LENGTH_EXTRA: [u8; 29] = [
    0, 0, 0, 0, 0, 0, 0, 0, 1, 1, 1, 1, 2, 2, 2, 2, 3, 3, 3, 3, 4, 4, 4, 4, 5, 5, 5, 5, 0,
];

// Distance codes 0..=29.
const DIST_BASE: [u16; 30] = [
    1, 2, 3, 4, 5, 7, 9, 13, 17, 25, 33, 49, 65, 97, 129, 193, 257, 385, 513, 769, 1025, 1537,
    2049, 3073, 4097, 6145, 8193, 12289, 16385, 24577,
];
const DIST_EXTRA: [u8; 30] = [
    0, 0, 0, 0, 1, 1, 2, 2, 3, 3, 4, 4, 5, 5, 6, 6, 7, 7, 8, 8, 9, 9, 10, 10, 11, 11, 12, 12,
    13, 13,
];

// Transmission order of code length code lengths.
const CLC_ORDER: [usize; 19] = [16, 17, 18, 0, 8, 7, 9, 6, 10, 5, 11, 4, 12, 3, 13, 2, 14, 1, 15];

#[derive(Debug, Clone, Copy)]
enum Token {
    Literal(u8),
    Match { len: u16, dist: u16 },
}

fn length_symbol(len: u16) -> (u16, u8, u16) {
    debug_assert!((MIN_MATCH as u16..=MAX_MATCH as u16).contains(&len));
    let mut idx = 0;
    for i in (0..LENGTH_BASE.len()).rev() {
        if LENGTH_BASE[i] <= len {
            idx = i;
            break;
        }
    }
    // Length 258 has its own code; do not encode it as 227 + 31.
    if len == 258 {
        idx = 28;
    }
    (257 + idx as u16, LENGTH_EXTRA[idx], len - LENGTH_BASE[idx])
}

fn dist_symbol(dist: u16) -> (u16, u8, u16) {
    debug_assert!((1..=MAX_DIST as u16 as u32).contains(&u32::from(dist)) || dist as usize == MAX_DIST);
    let mut idx = 0;
    for i in (0..DIST_BASE.len()).rev() {
        if DIST_BASE[i] <= dist {
            idx = i;
            break;
        }
    }
    (idx as u16, DIST_EXTRA[idx], dist - DIST_BASE[idx])
}

fn fixed_lit_lengths() -> [u8; 288] {
    let mut l = [0u8; 288];
    for (i, slot) in l.iter_mut().enumerate() {
        *slot = match i {
            0..=143 => 8,
            144..=255 => 9,
            256..=279 => 7,
            _ => 8,
        };
    }
    l
}

// Per-effort search bounds, the zlib configuration table: when the
// previous match reaches good_len the follow-up search runs on a quarter
// budget, matches of max_lazy or longer skip the lazy probe entirely, and
// scanning stops outright at nice_len.
struct EffortParams {
    good_len: usize,
    max_lazy: usize,
    nice_len: usize,
    max_chain: u32,
}

const EFFORT_TABLE: [EffortParams; 9] = [
    EffortParams { good_len: 4, max_lazy: 4, nice_len: 8, max_chain: 4 },
    EffortParams { good_len: 4, max_lazy: 5, nice_len: 16, max_chain: 8 },
    EffortParams { good_len: 4, max_lazy: 6, nice_len: 32, max_chain: 32 },
    EffortParams { good_len: 4, max_lazy: 4, nice_len: 16, max_chain: 16 },
    EffortParams { good_len: 8, max_lazy: 16, nice_len: 32, max_chain: 32 },
    EffortParams { good_len: 8, max_lazy: 16, nice_len: 128, max_chain: 128 },
    EffortParams { good_len: 8, max_lazy: 32, nice_len: 128, max_chain: 256 },
    EffortParams { good_len: 32, max_lazy: 128, nice_len: 258, max_chain: 1024 },
    EffortParams { good_len: 32, max_lazy: 258, nice_len: 258, max_chain: 4096 },
];

fn params(effort: u8) -> &'static EffortParams {
    &EFFORT_TABLE[usize::from(effort) - 1]
}

struct Matcher<'a> {
    data: &'a [u8],
    head: Vec<u32>,
    prev: Vec<u32>,
    good_len: usize,
    nice_len: usize,
    max_chain: u32,
}

impl<'a> Matcher<'a> {
    fn new(data: &'a [u8], effort: u8) -> Self {
        let p = params(effort);
        Self {
            data,
            head: vec![NO_POS; 1 << HASH_BITS],
            prev: vec![NO_POS; data.len()],
            good_len: p.good_len,
            nice_len: p.nice_len,
            max_chain: p.max_chain,
        }
    }

    fn hash(&self, pos: usize) -> usize {
        let v = u32::from(self.data[pos])
            | u32::from(self.data[pos + 1]) << 8
            | u32::from(self.data[pos + 2]) << 16;
        (v.wrapping_mul(0x9E37_79B1) >> (32 - HASH_BITS)) as usize
    }

    fn insert(&mut self, pos: usize) {
        if pos + MIN_MATCH <= self.data.len() {
            let h = self.hash(pos);
            self.prev[pos] = self.head[h];
            self.head[h] = pos as u32;
        }
    }

    // Finds a match longer than prev_len, the length already secured at
    // the previous position when probing lazily.
    fn find(&self, pos: usize, prev_len: usize) -> Option<(u16, u16)> {
        if pos + MIN_MATCH > self.data.len() {
            return None;
        }
        let max_len = (self.data.len() - pos).min(MAX_MATCH);
        let mut best_len = prev_len.max(MIN_MATCH - 1);
        if best_len >= max_len {
            return None;
        }
        let mut best_dist = 0usize;
        let mut cand = self.head[self.hash(pos)];
        let mut chain = self.max_chain;
        if prev_len >= self.good_len {
            chain >>= 2;
        }
        while cand != NO_POS && chain > 0 {
            let cpos = cand as usize;
            if pos - cpos > MAX_DIST {
                break;
            }
            // Candidates sharing a hash bucket may still differ; verify the
            // tail byte of the current best first to skip cheap mismatches.
            if self.data[cpos + best_len] == self.data[pos + best_len] {
                let mut l = 0;
                while l < max_len && self.data[cpos + l] == self.data[pos + l] {
                    l += 1;
                }
                if l > best_len {
                    best_len = l;
                    best_dist = pos - cpos;
                    if l >= self.nice_len || l >= max_len {
                        break;
                    }
                }
            }
            cand = self.prev[cpos];
            chain -= 1;
        }
        if best_dist > 0 {
            Some((best_len as u16, best_dist as u16))
        } else {
            None
        }
    }
}

fn tokenize(data: &[u8], effort: u8) -> Vec<Token> {
    let lazy = effort >= 4;
    let max_lazy = params(effort).max_lazy;
    let mut m = Matcher::new(data, effort);
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < data.len() {
        let found = m.find(i, 0);
        match found {
            Some((len, dist)) => {
                if lazy && usize::from(len) < max_lazy && i + 1 < data.len() {
                    m.insert(i);
                    if let Some((len2, _)) = m.find(i + 1, usize::from(len)) {
                        if len2 > len {
                            tokens.push(Token::Literal(data[i]));
                            i += 1;
                            continue;
                        }
                    }
                    tokens.push(Token::Match { len, dist });
                    for p in i + 1..i + usize::from(len) {
                        m.insert(p);
                    }
                    i += usize::from(len);
                } else {
                    tokens.push(Token::Match { len, dist });
                    for p in i..i + usize::from(len) {
                        m.insert(p);
                    }
                    i += usize::from(len);
                }
            }
            None => {
                tokens.push(Token::Literal(data[i]));
                m.insert(i);
                i += 1;
            }
        }
    }
    tokens
}

// Run-length encoding of the combined code length array for the dynamic
// block header: symbol, extra bit count, extra value.
fn rle_code_lengths(lengths: &[u8]) -> Vec<(u8, u8, u16)> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < lengths.len() {
        let v = lengths[i];
        let mut run = 1;
        while i + run < lengths.len() && lengths[i + run] == v {
            run += 1;
        }
        i += run;
        if v == 0 {
            while run >= 11 {
                let r = run.min(138);
                out.push((18, 7, (r - 11) as u16));
                run -= r;
            }
            if run >= 3 {
                out.push((17, 3, (run - 3) as u16));
                run = 0;
            }
            for _ in 0..run {
                out.push((0, 0, 0));
            }
        } else {
            out.push((v, 0, 0));
            run -= 1;
            while run >= 3 {
                let r = run.min(6);
                out.push((16, 2, (r - 3) as u16));
                run -= r;
            }
            for _ in 0..run {
                out.push((v, 0, 0));
            }
        }
    }
    out
}

struct DynamicPlan {
    hlit: usize,
    hdist: usize,
    hclen: usize,
    clc_lengths: [u8; 19],
    rle: Vec<(u8, u8, u16)>,
    header_bits: u64,
}

fn plan_dynamic(lit_lengths: &[u8], dist_lengths: &[u8]) -> DynamicPlan {
    let hlit = lit_lengths
        .iter()
        .rposition(|&l| l > 0)
        .map_or(257, |p| (p + 1).max(257));
    let hdist = dist_lengths
        .iter()
        .rposition(|&l| l > 0)
        .map_or(1, |p| p + 1);

    let mut combined = Vec::with_capacity(hlit + hdist);
    combined.extend_from_slice(&lit_lengths[..hlit]);
    combined.extend_from_slice(&dist_lengths[..hdist]);
    let rle = rle_code_lengths(&combined);

    let mut clc_freq = [0u64; 19];
    for &(sym, _, _) in &rle {
        clc_freq[usize::from(sym)] += 1;
    }
    let mut clc_lengths_vec = build_code_lengths(&clc_freq, 7);
    // A one-symbol code length code would be incomplete, which strict
    // inflaters reject for this table; pad with a second 1-bit code.
    if clc_lengths_vec.iter().filter(|&&l| l > 0).count() == 1 {
        let unused = (0..19).find(|&s| clc_lengths_vec[s] == 0).unwrap();
        clc_lengths_vec[unused] = 1;
    }
    let mut clc_lengths = [0u8; 19];
    clc_lengths.copy_from_slice(&clc_lengths_vec);

    let hclen = CLC_ORDER
        .iter()
        .rposition(|&s| clc_lengths[s] > 0)
        .map_or(4, |p| (p + 1).max(4));

    let mut header_bits = 5 + 5 + 4 + 3 * hclen as u64;
    for &(sym, extra, _) in &rle {
        header_bits += u64::from(clc_lengths[usize::from(sym)]) + u64::from(extra);
    }
    DynamicPlan {
        hlit,
        hdist,
        hclen,
        clc_lengths,
        rle,
        header_bits,
    }
}

fn body_bits(tokens: &[Token], lit_lengths: &[u8], dist_lengths: &[u8]) -> u64 {
    let mut bits = u64::from(lit_lengths[256]);
    for t in tokens {
        match *t {
            Token::Literal(b) => bits += u64::from(lit_lengths[usize::from(b)]),
            Token::Match { len, dist } => {
                let (ls, le, _) = length_symbol(len);
                let (ds, de, _) = dist_symbol(dist);
                bits += u64::from(lit_lengths[usize::from(ls)])
                    + u64::from(le)
                    + u64::from(dist_lengths[usize::from(ds)])
                    + u64::from(de);
            }
        }
    }
    bits
}

fn write_tokens(
    w: &mut BitWriter,
    tokens: &[Token],
    lit_codes: &[u16],
    lit_lengths: &[u8],
    dist_codes: &[u16],
    dist_lengths: &[u8],
) {
    for t in tokens {
        match *t {
            Token::Literal(b) => {
                let s = usize::from(b);
                w.write_code(lit_codes[s], u32::from(lit_lengths[s]));
            }
            Token::Match { len, dist } => {
                let (ls, le, lv) = length_symbol(len);
                let s = usize::from(ls);
                w.write_code(lit_codes[s], u32::from(lit_lengths[s]));
                w.write_bits(u32::from(lv), u32::from(le));
                let (ds, de, dv) = dist_symbol(dist);
                let s = usize::from(ds);
                w.write_code(dist_codes[s], u32::from(dist_lengths[s]));
                w.write_bits(u32::from(dv), u32::from(de));
            }
        }
    }
    w.write_code(lit_codes[256], u32::from(lit_lengths[256]));
}

/// Compresses `data` as a raw deflate stream. Returns the stream and its
/// exact length in bits before byte padding.
pub fn compress(data: &[u8], effort: u8) -> (Vec<u8>, u64) {
    assert!((1..=9).contains(&effort), "effort must be 1..=9");
    let tokens = tokenize(data, effort);

    let mut lit_freq = [0u64; 286];
    let mut dist_freq = [0u64; 30];
    lit_freq[256] = 1;
    for t in &tokens {
        match *t {
            Token::Literal(b) => lit_freq[usize::from(b)] += 1,
            Token::Match { len, dist } => {
                lit_freq[usize::from(length_symbol(len).0)] += 1;
                dist_freq[usize::from(dist_symbol(dist).0)] += 1;
            }
        }
    }

    let dyn_lit_lengths = build_code_lengths(&lit_freq, 15);
    let dyn_dist_lengths = build_code_lengths(&dist_freq, 15);
    let plan = plan_dynamic(&dyn_lit_lengths, &dyn_dist_lengths);
    let fixed_lit = fixed_lit_lengths();
    let fixed_dist = [5u8; 30];

    let cost_dynamic = 3 + plan.header_bits + body_bits(&tokens, &dyn_lit_lengths, &dyn_dist_lengths);
    let cost_fixed = 3 + body_bits(&tokens, &fixed_lit, &fixed_dist);
    let chunks = data.len().div_ceil(65535).max(1) as u64;
    let cost_stored = chunks * 40 + 8 * data.len() as u64;

    let mut w = BitWriter::new();
    if cost_stored <= cost_fixed && cost_stored <= cost_dynamic {
        let mut rest = data;
        loop {
            let take = rest.len().min(65535);
            let (chunk, tail) = rest.split_at(take);
            let last = tail.is_empty();
            w.write_bits(u32::from(last), 1);
            w.write_bits(0, 2);
            w.align_byte();
            let len = take as u16;
            w.write_aligned_byte((len & 0xFF) as u8);
            w.write_aligned_byte((len >> 8) as u8);
            w.write_aligned_byte((!len & 0xFF) as u8);
            w.write_aligned_byte((!len >> 8) as u8);
            for &b in chunk {
                w.write_aligned_byte(b);
            }
            if last {
                break;
            }
            rest = tail;
        }
    } else if cost_fixed <= cost_dynamic {
        w.write_bits(1, 1);
        w.write_bits(1, 2);
        let lit_codes = canonical_codes(&fixed_lit).expect("fixed table is canonical");
        let dist_codes = canonical_codes(&fixed_dist).expect("fixed table is canonical");
        write_tokens(&mut w, &tokens, &lit_codes, &fixed_lit, &dist_codes, &fixed_dist);
    } else {
        w.write_bits(1, 1);
        w.write_bits(2, 2);
        w.write_bits((plan.hlit - 257) as u32, 5);
        w.write_bits((plan.hdist - 1) as u32, 5);
        w.write_bits((plan.hclen - 4) as u32, 4);
        for &s in CLC_ORDER.iter().take(plan.hclen) {
            w.write_bits(u32::from(plan.clc_lengths[s]), 3);
        }
        let clc_codes = canonical_codes(&plan.clc_lengths).expect("clc table is canonical");
        for &(sym, extra, val) in &plan.rle {
            let s = usize::from(sym);
            w.write_code(clc_codes[s], u32::from(plan.clc_lengths[s]));
            w.write_bits(u32::from(val), u32::from(extra));
        }
        let lit_codes = canonical_codes(&dyn_lit_lengths).expect("freq-built table is canonical");
        let dist_codes = canonical_codes(&dyn_dist_lengths).expect("freq-built table is canonical");
        write_tokens(
            &mut w,
            &tokens,
            &lit_codes,
            &dyn_lit_lengths,
            &dist_codes,
            &dyn_dist_lengths,
        );
    }
    let bits = w.bit_len();
    (w.into_bytes(), bits)
}

fn read_dynamic_tables(r: &mut BitReader<'_>) -> Result<(CanonicalDecoder, Option<CanonicalDecoder>)> {
    let hlit = r.read_bits(5)? as usize + 257;
    let hdist = r.read_bits(5)? as usize + 1;
    let hclen = r.read_bits(4)? as usize + 4;
    let mut clc_lengths = [0u8; 19];
    for &s in CLC_ORDER.iter().take(hclen) {
        clc_lengths[s] = r.read_bits(3)? as u8;
    }
    let clc = CanonicalDecoder::new(&clc_lengths)?;
    let mut lengths = Vec::with_capacity(hlit + hdist);
    while lengths.len() < hlit + hdist {
        let sym = clc.decode(r)?;
        match sym {
            0..=15 => lengths.push(sym as u8),
            16 => {
                let &prev = lengths
                    .last()
                    .ok_or_else(|| Error::CorruptStream("repeat with no previous length".into()))?;
                let rep = 3 + r.read_bits(2)? as usize;
                lengths.resize(lengths.len() + rep, prev);
            }
            17 => {
                let rep = 3 + r.read_bits(3)? as usize;
                lengths.resize(lengths.len() + rep, 0);
            }
            18 => {
                let rep = 11 + r.read_bits(7)? as usize;
                lengths.resize(lengths.len() + rep, 0);
            }
            _ => return Err(Error::CorruptStream("invalid code length symbol".into())),
        }
    }
    if lengths.len() != hlit + hdist {
        return Err(Error::CorruptStream("code length overrun".into()));
    }
    let lit = CanonicalDecoder::new(&lengths[..hlit])?;
    let dist = CanonicalDecoder::new(&lengths[hlit..]).ok();
    Ok((lit, dist))
}

fn inflate_block(
    r: &mut BitReader<'_>,
    out: &mut Vec<u8>,
    lit: &CanonicalDecoder,
    dist: Option<&CanonicalDecoder>,
) -> Result<()> {
    loop {
        let sym = lit.decode(r)?;
        match sym {
            0..=255 => out.push(sym as u8),
            256 => return Ok(()),
            257..=285 => {
                let li = usize::from(sym - 257);
                let len = usize::from(LENGTH_BASE[li]) + r.read_bits(u32::from(LENGTH_EXTRA[li]))? as usize;
                let dd = dist.ok_or_else(|| Error::CorruptStream("match with no distance code".into()))?;
                let dsym = dd.decode(r)?;
                if dsym >= 30 {
                    return Err(Error::CorruptStream("invalid distance symbol".into()));
                }
                let di = usize::from(dsym);
                let d = usize::from(DIST_BASE[di]) + r.read_bits(u32::from(DIST_EXTRA[di]))? as usize;
                if d > out.len() {
                    return Err(Error::CorruptStream("distance past stream start".into()));
                }
                let from = out.len() - d;
                for k in 0..len {
                    let b = out[from + k];
                    out.push(b);
                }
            }
            _ => return Err(Error::CorruptStream("invalid literal/length symbol".into())),
        }
    }
}

/// Decompresses a raw deflate stream.
pub fn decompress(data: &[u8]) -> Result<Vec<u8>> {
    let mut r = BitReader::new(data);
    let mut out = Vec::new();
    loop {
        let bfinal = r.read_bits(1)?;
        let btype = r.read_bits(2)?;
        match btype {
            0 => {
                r.align_byte();
                let len = u16::from(r.read_aligned_byte()?) | u16::from(r.read_aligned_byte()?) << 8;
                let nlen = u16::from(r.read_aligned_byte()?) | u16::from(r.read_aligned_byte()?) << 8;
                if len != !nlen {
                    return Err(Error::CorruptStream("stored length check failed".into()));
                }
                for _ in 0..len {
                    out.push(r.read_aligned_byte()?);
                }
            }
            1 => {
                let lit = CanonicalDecoder::new(&fixed_lit_lengths())?;
                let dist = CanonicalDecoder::new(&[5u8; 30])?;
                inflate_block(&mut r, &mut out, &lit, Some(&dist))?;
            }
            2 => {
                let (lit, dist) = read_dynamic_tables(&mut r)?;
                inflate_block(&mut r, &mut out, &lit, dist.as_ref())?;
            }
            _ => return Err(Error::CorruptStream("reserved block type".into())),
        }
        if bfinal == 1 {
            break;
        }
    }
    Ok(out)
}
