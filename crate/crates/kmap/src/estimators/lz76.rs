//! Lempel-Ziv 1976 production complexity over the bit expansion of a byte
//! string.
//!
//! The exhaustive history decomposes the input into phrases: each phrase is
//! the longest prefix of the remaining input that already occurs starting at
//! an earlier position (self-overlap allowed), plus one fresh bit. The final
//! phrase may be a pure copy. The phrase count c drives the estimate.
//!
//! A naive scan is quadratic at best; a suffix automaton over the whole bit
//! string gives each phrase in time linear in its length. For a phrase
//! starting at `start`, the candidate prefix of length l+1 ends at bit index
//! `start + l`, and it re-occurs earlier iff the automaton state reached by
//! spelling it has an occurrence ending strictly before that index.

use crate::estimators::bits::bytes_to_bits;

const NONE: u32 = u32::MAX;

#[derive(Clone)]
struct State {
    next: [u32; 2],
    link: u32,
    len: u32,
    // Bit index of the last character of the earliest occurrence of the
    // strings this state represents.
    first_end: u32,
}

struct SuffixAutomaton {
    states: Vec<State>,
    last: u32,
}

impl SuffixAutomaton {
    fn build(bits: &[u8]) -> Self {
        let mut sam = Self {
            states: Vec::with_capacity(2 * bits.len() + 2),
            last: 0,
        };
        sam.states.push(State {
            next: [NONE; 2],
            link: NONE,
            len: 0,
            first_end: NONE,
        });
        for (pos, &b) in bits.iter().enumerate() {
            sam.extend(usize::from(b), pos as u32);
        }
        sam
    }

    fn extend(&mut self, ch: usize, pos: u32) {
        let cur = self.states.len() as u32;
        let last_len = self.states[self.last as usize].len;
        self.states.push(State {
            next: [NONE; 2],
            link: 0,
            len: last_len + 1,
            first_end: pos,
        });
        let mut p = self.last;
        while p != NONE && self.states[p as usize].next[ch] == NONE {
            self.states[p as usize].next[ch] = cur;
            p = self.states[p as usize].link;
        }
        if p != NONE {
            let q = self.states[p as usize].next[ch];
            if self.states[p as usize].len + 1 == self.states[q as usize].len {
                self.states[cur as usize].link = q;
            } else {
                let clone = self.states.len() as u32;
                let mut cl = self.states[q as usize].clone();
                cl.len = self.states[p as usize].len + 1;
                self.states.push(cl);
                while p != NONE && self.states[p as usize].next[ch] == q {
                    self.states[p as usize].next[ch] = clone;
                    p = self.states[p as usize].link;
                }
                self.states[q as usize].link = clone;
                self.states[cur as usize].link = clone;
            }
        }
        self.last = cur;
    }
}

/// Counts exhaustive-history phrases in a 0/1 bit slice.
pub fn phrase_count_of_bits(bits: &[u8]) -> u64 {
    let n = bits.len();
    if n == 0 {
        return 0;
    }
    let sam = SuffixAutomaton::build(bits);
    let mut c = 0u64;
    let mut start = 0usize;
    while start < n {
        c += 1;
        let mut l = 0usize;
        let mut state = 0u32;
        while start + l < n {
            let ch = usize::from(bits[start + l]);
            let next = sam.states[state as usize].next[ch];
            if next != NONE && (sam.states[next as usize].first_end as usize) < start + l {
                state = next;
                l += 1;
            } else {
                break;
            }
        }
        if start + l < n {
            l += 1;
        }
        start += l;
    }
    c
}

/// Counts exhaustive-history phrases in the bit expansion of `data`.
pub fn phrase_count(data: &[u8]) -> u64 {
    phrase_count_of_bits(&bytes_to_bits(data))
}
