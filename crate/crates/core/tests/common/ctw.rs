//! Naive decomposed CTW recomputed from the raw event list on every query.
//!
//! Shares nothing with the library model: KT block probabilities are the
//! sequential product, weighting recurses over explicit context filters, and
//! the binary decomposition descends by halving index ranges.

pub struct Events {
    pub n: usize,
    pub depth: usize,
    /// (context most recent first, symbol)
    pub events: Vec<(Vec<usize>, usize)>,
}

fn kt(zeros: usize, ones: usize) -> f64 {
    // build the block probability one symbol at a time, zeros first
    let mut p = 1.0;
    let (mut a, mut b) = (0.0, 0.0);
    for _ in 0..zeros {
        p *= (a + 0.5) / (a + b + 1.0);
        a += 1.0;
    }
    for _ in 0..ones {
        p *= (b + 0.5) / (a + b + 1.0);
        b += 1.0;
    }
    p
}

fn weighted(bits: &[(&[usize], u8)], suffix_len: usize, depth: usize, n: usize) -> f64 {
    let zeros = bits.iter().filter(|(_, b)| *b == 0).count();
    let pe = kt(zeros, bits.len() - zeros);
    if suffix_len == depth {
        return pe;
    }
    let mut prod = 1.0;
    for sym in 0..=n {
        let sub: Vec<(&[usize], u8)> = bits
            .iter()
            .filter(|(c, _)| c[suffix_len] == sym)
            .cloned()
            .collect();
        if !sub.is_empty() {
            prod *= weighted(&sub, suffix_len + 1, depth, n);
        }
    }
    0.5 * pe + 0.5 * prod
}

impl Events {
    pub fn from_sequences(seqs: &[Vec<usize>], n: usize, depth: usize) -> Events {
        let mut events = Vec::new();
        for s in seqs {
            for t in 0..s.len() {
                events.push((Self::context(&s[..t], n, depth), s[t]));
            }
        }
        Events { n, depth, events }
    }

    pub fn context(history: &[usize], n: usize, depth: usize) -> Vec<usize> {
        (0..depth)
            .map(|i| {
                if i < history.len() {
                    history[history.len() - 1 - i]
                } else {
                    n
                }
            })
            .collect()
    }

    /// Probability of `symbol` after `ctx`: descend the balanced halving of
    /// the index range, the upper half taking the smaller share.
    pub fn prob(&self, ctx: &[usize], symbol: usize) -> f64 {
        let mut p = 1.0;
        let (mut lo, mut hi) = (0usize, self.n);
        while hi - lo > 1 {
            let mid = lo + (hi - lo).div_ceil(2);
            let bit = (symbol >= mid) as u8;
            // events that reached this decision node
            let here: Vec<(&[usize], u8)> = self
                .events
                .iter()
                .filter(|(_, s)| *s >= lo && *s < hi)
                .map(|(c, s)| (c.as_slice(), (*s >= mid) as u8))
                .collect();
            let before = weighted(&here, 0, self.depth, self.n);
            let mut with = here.clone();
            with.push((ctx, bit));
            p *= weighted(&with, 0, self.depth, self.n) / before;
            if bit == 1 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        p
    }
}
