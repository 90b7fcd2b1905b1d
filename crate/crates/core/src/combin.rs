//! Subset enumeration and exact binomial coefficients.

/// Exact `C(m, k)`, or `None` on `u128` overflow. `C(m, k) = 0` for `k > m`.
pub fn binomial(m: u64, k: u64) -> Option<u128> {
    if k > m {
        return Some(0);
    }
    let k = k.min(m - k);
    let mut acc: u128 = 1;
    for i in 1..=k as u128 {
        // acc * (m - k + i) is divisible by i at every step.
        acc = acc.checked_mul(m as u128 - k as u128 + i)? / i;
    }
    Some(acc)
}

/// `C(m, k)` as a float; saturates to infinity past `u128`.
pub fn binomial_f64(m: u64, k: u64) -> f64 {
    binomial(m, k).map_or(f64::INFINITY, |v| v as f64)
}

/// Revolving-door enumeration of the `t`-subsets of `{0, …, n−1}`.
///
/// Consecutive subsets differ by exactly one swap (one index leaves, one
/// enters). [`RevolvingDoor::current`] gives the first subset and every call
/// to [`RevolvingDoor::next_swap`] applies and reports the next swap as
/// `(out, in)`. This is Knuth's Algorithm R (TAOCP 7.2.1.3).
#[derive(Debug, Clone)]
pub struct RevolvingDoor {
    t: usize,
    // 1-based: c[1..=t] in increasing order, c[t+1] = n sentinel.
    c: Vec<usize>,
    done: bool,
}

#[derive(Clone, Copy)]
enum Step {
    Decrease,
    Increase,
}

impl RevolvingDoor {
    /// Panics unless `1 <= t <= n`.
    pub fn new(n: usize, t: usize) -> Self {
        assert!(t >= 1 && t <= n, "need 1 <= t <= n, got t={t}, n={n}");
        let mut c = vec![0; t + 2];
        for (j, cj) in c.iter_mut().enumerate().take(t + 1).skip(1) {
            *cj = j - 1;
        }
        c[t + 1] = n;
        Self { t, c, done: false }
    }

    /// Current subset in increasing order.
    pub fn current(&self) -> &[usize] {
        &self.c[1..=self.t]
    }

    pub fn next_swap(&mut self) -> Option<(usize, usize)> {
        if self.done {
            return None;
        }
        let t = self.t;
        let c = &mut self.c;
        let mut step = if t % 2 == 1 {
            if c[1] + 1 < c[2] {
                let out = c[1];
                c[1] += 1;
                return Some((out, c[1]));
            }
            Step::Decrease
        } else {
            if c[1] > 0 {
                let out = c[1];
                c[1] -= 1;
                return Some((out, c[1]));
            }
            Step::Increase
        };
        let mut j = 2;
        while j <= t {
            match step {
                Step::Decrease => {
                    if c[j] >= j {
                        let out = c[j];
                        c[j] = c[j - 1];
                        c[j - 1] = j - 2;
                        return Some((out, j - 2));
                    }
                    step = Step::Increase;
                }
                Step::Increase => {
                    if c[j] + 1 < c[j + 1] {
                        let out = c[j - 1];
                        c[j - 1] = c[j];
                        c[j] += 1;
                        return Some((out, c[j]));
                    }
                    step = Step::Decrease;
                }
            }
            j += 1;
        }
        self.done = true;
        None
    }
}
