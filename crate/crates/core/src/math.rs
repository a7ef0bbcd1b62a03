//! Small numeric helpers shared across the crate.

/// Floor applied to probability-vector entries before normalization.
///
/// MAP numerators can go negative when a Dirichlet prior entry is below 1;
/// flooring keeps every estimated simplex strictly positive.
pub const PROB_FLOOR: f64 = 1e-12;

/// Natural log of the gamma function (Lanczos approximation, g = 7).
pub fn ln_gamma(x: f64) -> f64 {
    const COEFFS: [f64; 8] = [
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        // Reflection: Γ(x)Γ(1−x) = π / sin(πx)
        let s = (std::f64::consts::PI * x).sin();
        return std::f64::consts::PI.ln() - s.abs().ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = 0.999_999_999_999_809_9;
    for (i, c) in COEFFS.iter().enumerate() {
        acc += c / (x + (i + 1) as f64);
    }
    let t = x + 7.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// Log of the Dirichlet density normalizer: ln Γ(Σa) − Σ ln Γ(a_i).
pub fn ln_dirichlet_const(alpha: &[f64]) -> f64 {
    let total: f64 = alpha.iter().sum();
    ln_gamma(total) - alpha.iter().map(|&a| ln_gamma(a)).sum::<f64>()
}

/// Floors entries to [`PROB_FLOOR`] and rescales so the slice sums to 1.
pub fn clamp_normalize(v: &mut [f64]) {
    let mut sum = 0.0;
    for x in v.iter_mut() {
        if *x < PROB_FLOOR {
            *x = PROB_FLOOR;
        }
        sum += *x;
    }
    for x in v.iter_mut() {
        *x /= sum;
    }
}

/// Kahan compensated accumulator.
///
/// Objective sums run over every token in the corpus; plain summation noise
/// would eat into the monotonicity slack at large scale.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    carry: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let y = x - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn total(&self) -> f64 {
        self.sum
    }
}

/// FNV-1a over the IEEE-754 bits of a float sequence; used for run-trace
/// checksums (bit-exact reproducibility probes).
pub fn checksum_f64s<'a>(values: impl IntoIterator<Item = &'a f64>) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for v in values {
        for b in v.to_bits().to_le_bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
    h
}
