//! Log-space accumulation and the few special functions the samplers need
//! beyond what `statrs` exports.

/// Streaming log-sum-exp accumulator.
///
/// Keeps a running maximum so arbitrarily scaled log-weights can be folded in
/// one at a time without overflow. `-inf` terms are ignored.
#[derive(Debug, Clone, Copy)]
pub struct LogSumExp {
    max: f64,
    sum: f64,
}

impl LogSumExp {
    pub fn new() -> Self {
        LogSumExp {
            max: f64::NEG_INFINITY,
            sum: 0.0,
        }
    }

    #[inline]
    pub fn add(&mut self, term: f64) {
        if term == f64::NEG_INFINITY {
            return;
        }
        if term <= self.max {
            self.sum += (term - self.max).exp();
        } else {
            self.sum = self.sum * (self.max - term).exp() + 1.0;
            self.max = term;
        }
    }

    /// Current value of the accumulated log-sum; `-inf` if nothing was added.
    #[inline]
    pub fn value(&self) -> f64 {
        if self.max == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            self.max + self.sum.ln()
        }
    }

    /// Running maximum of the terms added so far.
    #[inline]
    pub fn max_term(&self) -> f64 {
        self.max
    }
}

impl Default for LogSumExp {
    fn default() -> Self {
        Self::new()
    }
}

/// Log-sum-exp over a slice.
pub fn logsumexp(terms: &[f64]) -> f64 {
    let mut acc = LogSumExp::new();
    for &t in terms {
        acc.add(t);
    }
    acc.value()
}

/// `ln(exp(a) + exp(b))` without overflow.
#[inline]
pub fn logaddexp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// SplitMix64 finalizer; used to derive child RNG seeds deterministically.
#[inline]
pub fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Trigamma function ψ'(x) for x > 0.
///
/// Recurrence ψ'(x) = ψ'(x+1) + 1/x² shifts the argument above 6, where the
/// asymptotic expansion is accurate to ~1e-12.
pub fn trigamma(x: f64) -> f64 {
    assert!(x > 0.0, "trigamma requires x > 0");
    let mut x = x;
    let mut acc = 0.0;
    while x < 10.0 {
        acc += 1.0 / (x * x);
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    // ψ'(x) ≈ 1/x + 1/(2x²) + Σ B_{2k} / x^{2k+1}
    acc + inv * (1.0 + inv * (0.5 + inv * (1.0 / 6.0 - inv2 * (1.0 / 30.0 - inv2 * (1.0 / 42.0 - inv2 / 30.0)))))
}

/// Mean of a slice.
pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Population variance (divides by n).
pub fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / xs.len() as f64
}
