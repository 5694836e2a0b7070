//! Set partitions as restricted-growth strings.

/// Restricted-growth strings of length `n` using at most `max_blocks`
/// labels, in lexicographic order. Each partition of `{0..n}` into at most
/// `max_blocks` blocks appears exactly once.
#[derive(Debug, Clone)]
pub struct RestrictedGrowth {
    max_blocks: usize,
    current: Vec<usize>,
    /// `prefix_max[i] = max(current[..=i])`.
    prefix_max: Vec<usize>,
    started: bool,
    done: bool,
}

impl RestrictedGrowth {
    pub fn new(n: usize, max_blocks: usize) -> Self {
        Self {
            max_blocks,
            current: vec![0; n],
            prefix_max: vec![0; n],
            started: false,
            done: n == 0 || max_blocks == 0,
        }
    }

    fn advance(&mut self) -> bool {
        let n = self.current.len();
        for i in (1..n).rev() {
            let v = self.current[i];
            if v + 1 < self.max_blocks && v <= self.prefix_max[i - 1] {
                self.current[i] = v + 1;
                self.prefix_max[i] = self.prefix_max[i - 1].max(v + 1);
                for t in i + 1..n {
                    self.current[t] = 0;
                    self.prefix_max[t] = self.prefix_max[i];
                }
                return true;
            }
        }
        false
    }
}

impl Iterator for RestrictedGrowth {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        if self.started && !self.advance() {
            self.done = true;
            return None;
        }
        self.started = true;
        Some(self.current.clone())
    }
}

/// Stirling numbers of the second kind `S(n, j)` for `j = 0..=n`,
/// saturating at `u128::MAX`.
pub fn stirling2_row(n: usize) -> Vec<u128> {
    let mut row = vec![1u128];
    for i in 1..=n {
        let mut next = vec![0u128; i + 1];
        for j in 1..=i {
            let keep = if j < i { row[j].saturating_mul(j as u128) } else { 0 };
            next[j] = keep.saturating_add(row[j - 1]);
        }
        row = next;
    }
    row
}

/// Number of partitions of an `n`-set into at most `k` blocks.
pub fn partition_count(n: usize, k: usize) -> u128 {
    if n == 0 {
        return 1;
    }
    stirling2_row(n)
        .iter()
        .take(k.min(n) + 1)
        .fold(0u128, |acc, &s| acc.saturating_add(s))
}
