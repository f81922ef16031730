//! Continued fraction sources, convergents and high-precision values of α.

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fixed::FixedPointFraction;

/// Default number of random bits drawn for a `GaussRandom` source.
pub const DEFAULT_RANDOM_BITS: u32 = 4096;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SourceKind {
    /// Eventually periodic quotients: `preperiod` then `period` repeated forever.
    Quadratic { preperiod: Vec<u64>, period: Vec<u64> },
    /// `1, 2, 1, 1, 4, 1, 1, 6, ...`, the quotients of Euler's number.
    EFamily,
    Explicit(Vec<u64>),
    /// A uniformly random α drawn as a `precision_bits`-bit binary fraction.
    GaussRandom { seed: u64, precision_bits: u32 },
}

/// An irrational α described by its partial quotients `[a0; a1, a2, ...]`.
///
/// Only the fractional part enters the downstream computations; `a0` is kept
/// for convergent numerators and display.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartialQuotientSource {
    pub kind: SourceKind,
    pub a0: i64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Convergent {
    pub k: usize,
    pub p: BigInt,
    pub q: BigUint,
}

/// Convergents `0..=k+1` together with the index `k` such that `q_k <= M < q_{k+1}`.
#[derive(Clone, Debug)]
pub struct IndexedConvergents {
    pub k: usize,
    pub convergents: Vec<Convergent>,
}

impl PartialQuotientSource {
    pub fn quadratic(a0: i64, preperiod: Vec<u64>, period: Vec<u64>) -> Result<Self> {
        if period.is_empty() {
            return Err(Error::InvalidArgument("quadratic period must be nonempty".into()));
        }
        if preperiod.iter().chain(period.iter()).any(|&a| a == 0) {
            return Err(Error::InvalidArgument("partial quotients must be positive".into()));
        }
        Ok(Self {
            kind: SourceKind::Quadratic { preperiod, period },
            a0,
        })
    }

    /// The golden ratio `[1; 1, 1, ...]`.
    pub fn golden() -> Self {
        Self::quadratic(1, vec![], vec![1]).expect("valid period")
    }

    /// `sqrt(d)` for a positive non-square `d`.
    pub fn sqrt(d: u64) -> Result<Self> {
        let a0 = d.isqrt();
        if a0 * a0 == d {
            return Err(Error::InvalidArgument(format!("{d} is a perfect square")));
        }
        // Standard recurrence m' = d a - m, d' = (D - m'^2)/d, a' = (a0 + m')/d'.
        let (mut m, mut den, mut a) = (0u64, 1u64, a0);
        let mut period = Vec::new();
        loop {
            m = den * a - m;
            den = (d - m * m) / den;
            a = (a0 + m) / den;
            period.push(a);
            if a == 2 * a0 {
                break;
            }
        }
        Self::quadratic(a0 as i64, vec![], period)
    }

    /// Euler's number `e = [2; 1, 2, 1, 1, 4, ...]`.
    pub fn e() -> Self {
        Self {
            kind: SourceKind::EFamily,
            a0: 2,
        }
    }

    pub fn explicit(a0: i64, quotients: Vec<u64>) -> Result<Self> {
        if quotients.is_empty() {
            return Err(Error::InvalidArgument("explicit quotient list must be nonempty".into()));
        }
        if quotients.iter().any(|&a| a == 0) {
            return Err(Error::InvalidArgument("partial quotients must be positive".into()));
        }
        Ok(Self {
            kind: SourceKind::Explicit(quotients),
            a0,
        })
    }

    pub fn gauss_random(seed: u64, precision_bits: u32) -> Result<Self> {
        if precision_bits == 0 {
            return Err(Error::InvalidArgument("precision_bits must be positive".into()));
        }
        Ok(Self {
            kind: SourceKind::GaussRandom {
                seed,
                precision_bits,
            },
            a0: 0,
        })
    }

    /// Lazy stream of `a_1, a_2, ...`; ends only for finite or exhausted sources.
    pub fn quotients(&self) -> QuotientStream {
        match &self.kind {
            SourceKind::Quadratic { preperiod, period } => QuotientStream::Periodic {
                preperiod: preperiod.clone(),
                period: period.clone(),
                index: 0,
            },
            SourceKind::EFamily => QuotientStream::E { index: 0 },
            SourceKind::Explicit(list) => QuotientStream::Finite {
                list: list.clone(),
                index: 0,
            },
            SourceKind::GaussRandom {
                seed,
                precision_bits,
            } => QuotientStream::Random(Box::new(RandomQuotients::new(*seed, *precision_bits))),
        }
    }

    /// Polynomial growth degree `d` with `a_k <= c k^d`, when the source declares one.
    pub fn growth_degree(&self) -> Option<u32> {
        match self.kind {
            SourceKind::Quadratic { .. } | SourceKind::Explicit(_) => Some(0),
            SourceKind::EFamily => Some(1),
            SourceKind::GaussRandom { .. } => None,
        }
    }

    pub fn is_quadratic(&self) -> bool {
        matches!(self.kind, SourceKind::Quadratic { .. })
    }
}

pub enum QuotientStream {
    Periodic {
        preperiod: Vec<u64>,
        period: Vec<u64>,
        index: usize,
    },
    E {
        index: u64,
    },
    Finite {
        list: Vec<u64>,
        index: usize,
    },
    Random(Box<RandomQuotients>),
}

impl Iterator for QuotientStream {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        match self {
            QuotientStream::Periodic {
                preperiod,
                period,
                index,
            } => {
                let i = *index;
                *index += 1;
                Some(if i < preperiod.len() {
                    preperiod[i]
                } else {
                    period[(i - preperiod.len()) % period.len()]
                })
            }
            QuotientStream::E { index } => {
                *index += 1;
                let i = *index;
                Some(if i % 3 == 2 { 2 * (i + 1) / 3 } else { 1 })
            }
            QuotientStream::Finite { list, index } => {
                let a = list.get(*index).copied();
                *index += 1;
                a
            }
            QuotientStream::Random(r) => r.next(),
        }
    }
}

/// Continued fraction digits of a random dyadic interval `[m, m + 1] / 2^bits`.
///
/// Both endpoints are expanded independently and a quotient is emitted only
/// while they agree, so every emitted quotient is shared by all reals in the
/// interval.
pub struct RandomQuotients {
    lo: Expansion,
    hi: Expansion,
    done: bool,
}

impl RandomQuotients {
    fn new(seed: u64, bits: u32) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let mut bytes = vec![0u8; bits.div_ceil(8) as usize];
        rng.fill_bytes(&mut bytes);
        let excess = bytes.len() as u32 * 8 - bits;
        if excess > 0 {
            let last = bytes.len() - 1;
            bytes[last] &= 0xff >> excess;
        }
        let m = BigUint::from_bytes_le(&bytes);
        let den = BigUint::one() << bits as usize;
        let m1 = &m + 1u32;
        Self {
            done: m.is_zero() || m1 == den,
            lo: Expansion::new(den.clone(), m),
            hi: Expansion::new(den, m1),
        }
    }
}

impl Iterator for RandomQuotients {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        if self.done {
            return None;
        }
        match (self.lo.next(), self.hi.next()) {
            (Some(a), Some(b)) if a == b => Some(a),
            _ => {
                self.done = true;
                None
            }
        }
    }
}

/// Quotients of the Euclidean algorithm on `(u, v)`, produced with Lehmer's
/// single-precision acceleration. Stops at the first quotient exceeding `u64`.
struct Expansion {
    u: BigUint,
    v: BigUint,
    buf: std::collections::VecDeque<u64>,
    finished: bool,
}

impl Expansion {
    fn new(u: BigUint, v: BigUint) -> Self {
        Self {
            finished: v.is_zero(),
            u,
            v,
            buf: Default::default(),
        }
    }

    /// One Lehmer round; appends at least one quotient or finishes.
    fn refill(&mut self) {
        let n = self.u.bits();
        if n <= 64 {
            let (mut u, mut v) = (self.u.to_u64().expect("fits"), self.v.to_u64().expect("fits"));
            while v != 0 {
                self.buf.push_back(u / v);
                (u, v) = (v, u % v);
            }
            self.finished = true;
            return;
        }
        let shift = (n - 63) as usize;
        let mut uh = (&self.u >> shift).to_i128().expect("63 bits");
        let mut vh = (&self.v >> shift).to_i128().expect("63 bits");
        let (mut a, mut b, mut c, mut d) = (1i128, 0i128, 0i128, 1i128);
        loop {
            if vh + c == 0 || vh + d == 0 {
                break;
            }
            let q = (uh + a) / (vh + c);
            if q != (uh + b) / (vh + d) {
                break;
            }
            self.buf.push_back(q as u64);
            (a, c) = (c, a - q * c);
            (b, d) = (d, b - q * d);
            (uh, vh) = (vh, uh - q * vh);
        }
        if b == 0 {
            let (q, r) = self.u.div_rem(&self.v);
            self.u = std::mem::replace(&mut self.v, r);
            match q.to_u64() {
                Some(q) => self.buf.push_back(q),
                None => self.finished = true,
            }
        } else {
            let u = BigInt::from(std::mem::take(&mut self.u));
            let v = BigInt::from(std::mem::take(&mut self.v));
            let nu = &u * a + &v * b;
            let nv = &u * c + &v * d;
            self.u = nu.to_biguint().expect("nonnegative");
            self.v = nv.to_biguint().expect("nonnegative");
        }
        if self.v.is_zero() {
            self.finished = true;
        }
    }
}

impl Iterator for Expansion {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        while self.buf.is_empty() && !self.finished {
            self.refill();
        }
        self.buf.pop_front()
    }
}

fn exhausted(src: &PartialQuotientSource, produced: usize, requested: usize) -> Error {
    match src.kind {
        SourceKind::Explicit(ref list) => Error::ListExhausted {
            available: list.len(),
            requested,
        },
        _ => Error::PrecisionExhausted {
            produced,
            requested,
        },
    }
}

/// The first `k` partial quotients `a_1..a_k`.
pub fn partial_quotients(src: &PartialQuotientSource, k: usize) -> Result<Vec<u64>> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    let out: Vec<u64> = src.quotients().take(k).collect();
    if out.len() < k {
        return Err(exhausted(src, out.len(), k));
    }
    Ok(out)
}

/// Incremental convergent recurrence.
struct ConvergentBuilder {
    p_prev: BigInt,
    p: BigInt,
    q_prev: BigUint,
    q: BigUint,
    k: usize,
}

impl ConvergentBuilder {
    fn new(a0: i64) -> Self {
        // p_{-1} = 1, q_{-1} = 0, p_0 = a0, q_0 = 1.
        Self {
            p_prev: BigInt::one(),
            p: BigInt::from(a0),
            q_prev: BigUint::zero(),
            q: BigUint::one(),
            k: 0,
        }
    }

    fn current(&self) -> Convergent {
        Convergent {
            k: self.k,
            p: self.p.clone(),
            q: self.q.clone(),
        }
    }

    fn push(&mut self, a: u64) {
        let p_next = &self.p * a + &self.p_prev;
        let q_next = &self.q * a + &self.q_prev;
        self.p_prev = std::mem::replace(&mut self.p, p_next);
        self.q_prev = std::mem::replace(&mut self.q, q_next);
        self.k += 1;
    }
}

/// Convergents `p_j / q_j` for `j = 0..=k`.
pub fn convergents(src: &PartialQuotientSource, k: usize) -> Result<Vec<Convergent>> {
    let quotients = partial_quotients(src, k)?;
    let mut b = ConvergentBuilder::new(src.a0);
    let mut out = Vec::with_capacity(k + 1);
    out.push(b.current());
    for a in quotients {
        b.push(a);
        out.push(b.current());
    }
    Ok(out)
}

/// The fractional part `{α}` to `bits` binary digits with `err_ulp <= 2`.
///
/// Uses the first convergent with `q_k q_{k+1} > 2^(bits+2)`, so the
/// approximation error is below a quarter ulp before the final truncation.
pub fn alpha_value(src: &PartialQuotientSource, bits: u32) -> Result<FixedPointFraction> {
    if bits < 64 {
        return Err(Error::InvalidArgument("alpha_value needs at least 64 bits".into()));
    }
    let threshold = BigUint::one() << (bits as usize + 2);
    let mut b = ConvergentBuilder::new(0);
    let mut stream = src.quotients();
    let mut produced = 0usize;
    loop {
        let Some(a) = stream.next() else {
            if let SourceKind::Explicit(_) = src.kind {
                // A finite list denotes the rational [0; a_1, ..., a_n] exactly.
                break;
            }
            return Err(Error::PrecisionExhausted {
                produced,
                requested: produced + 1,
            });
        };
        let q_prev = b.q.clone();
        let p_prev = b.p.clone();
        b.push(a);
        produced += 1;
        if &q_prev * &b.q > threshold {
            return Ok(fraction_of(&p_prev, &q_prev, bits, 2));
        }
    }
    Ok(fraction_of(&b.p, &b.q, bits, 1))
}

fn fraction_of(p: &BigInt, q: &BigUint, bits: u32, err_ulp: u64) -> FixedPointFraction {
    let (sign, mag) = p.clone().into_parts();
    let r = mag.mod_floor(q);
    let r = if sign == Sign::Minus && !r.is_zero() {
        q - r
    } else {
        r
    };
    let mantissa = (r << bits as usize) / q;
    FixedPointFraction::from_biguint(&mantissa, bits, err_ulp)
}

/// Beck's centering constant `lim (1/(12 log q_k)) Σ_{l<=k} (-1)^l a_l` for
/// eventually periodic quotients.
pub fn e_alpha(src: &PartialQuotientSource) -> Result<f64> {
    let SourceKind::Quadratic { preperiod, period } = &src.kind else {
        return Err(Error::NotQuadratic);
    };
    // Work over an even number of quotients so the sign pattern repeats.
    let cycle: Vec<u64> = if period.len() % 2 == 0 {
        period.clone()
    } else {
        period.iter().chain(period.iter()).copied().collect()
    };
    let first_index = preperiod.len() + 1;
    let alternating: i128 = cycle
        .iter()
        .enumerate()
        .map(|(j, &a)| {
            if (first_index + j) % 2 == 0 {
                a as i128
            } else {
                -(a as i128)
            }
        })
        .sum();
    if alternating == 0 {
        return Ok(0.0);
    }
    let growth = transfer_log_growth(&cycle);
    Ok(alternating as f64 / (12.0 * growth))
}

/// Log of the dominant eigenvalue of `Π [[a, 1], [1, 0]]` over `cycle`.
fn transfer_log_growth(cycle: &[u64]) -> f64 {
    // The product has determinant ±1 and positive entries; only the trace is
    // needed, computed exactly in big integers.
    let (mut m00, mut m01, mut m10, mut m11) =
        (BigUint::one(), BigUint::zero(), BigUint::zero(), BigUint::one());
    for &a in cycle {
        let n00 = &m00 * a + &m01;
        let n10 = &m10 * a + &m11;
        m01 = std::mem::replace(&mut m00, n00);
        m11 = std::mem::replace(&mut m10, n10);
    }
    let trace = &m00 + &m11;
    let det_positive = cycle.len() % 2 == 0;
    let ln_trace = big_ln(&trace);
    // λ = (t + sqrt(t^2 - 4 det)) / 2, so log λ = log t + log((1 + sqrt(1 - 4 det/t^2)) / 2).
    let inv_t2 = (-2.0 * ln_trace).exp();
    let disc = if det_positive {
        1.0 - 4.0 * inv_t2
    } else {
        1.0 + 4.0 * inv_t2
    };
    ln_trace + ((1.0 + disc.sqrt()) / 2.0).ln()
}

/// Natural log of a big unsigned integer.
pub(crate) fn big_ln(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().expect("fits in f64").ln();
    }
    let shift = bits - 64;
    let top = (x >> shift as usize).to_f64().expect("fits");
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// The index `k` with `q_k <= M < q_{k+1}`, along with convergents `0..=k+1`.
pub fn index_of(src: &PartialQuotientSource, m: u64) -> Result<IndexedConvergents> {
    if m == 0 {
        return Err(Error::InvalidArgument("M must be at least 1".into()));
    }
    let bound = BigUint::from(m);
    let mut b = ConvergentBuilder::new(src.a0);
    let mut out = vec![b.current()];
    let mut stream = src.quotients();
    loop {
        let Some(a) = stream.next() else {
            return Err(exhausted(src, out.len() - 1, out.len()));
        };
        b.push(a);
        out.push(b.current());
        if b.q > bound {
            // q_1 = a_1 may equal q_0 = 1; take the largest index with q <= M.
            let k = out.len() - 2;
            return Ok(IndexedConvergents { k, convergents: out });
        }
    }
}

/// Convergent denominators `q_0..=q_k` as machine integers, stopping before overflow.
pub fn denominators_up_to(src: &PartialQuotientSource, limit: u64) -> Result<Vec<u64>> {
    let idx = index_of(src, limit)?;
    Ok(idx.convergents[..=idx.k]
        .iter()
        .map(|c| c.q.to_u64().expect("bounded by limit"))
        .collect())
}
