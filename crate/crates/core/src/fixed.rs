//! Binary fixed-point fractions in `[0, 1)` with a tracked absolute error bound.
//!
//! A value is `mantissa * 2^-bits`, the mantissa stored as little-endian
//! 64-bit limbs. Addition and multiplication by an integer are exact modulo 1
//! on the mantissa; only the error bound bookkeeping grows.

use num_bigint::BigUint;
use smallvec::SmallVec;

type Limbs = SmallVec<[u64; 4]>;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FixedPointFraction {
    limbs: Limbs,
    bits: u32,
    err_ulp: u64,
}

#[inline]
fn limb_count(bits: u32) -> usize {
    bits.div_ceil(64) as usize
}

/// Number of significant bits held in the top limb, in `1..=64`.
#[inline]
fn top_width(bits: u32) -> u32 {
    bits - 64 * (limb_count(bits) as u32 - 1)
}

#[inline]
fn top_mask(bits: u32) -> u64 {
    let w = top_width(bits);
    if w == 64 {
        u64::MAX
    } else {
        (1u64 << w) - 1
    }
}

/// `2^e` for any exponent representable as a normal or subnormal double.
fn pow2(e: i32) -> f64 {
    if (-1022..=1023).contains(&e) {
        f64::from_bits(((e + 1023) as u64) << 52)
    } else {
        let half = e / 2;
        pow2(half) * pow2(e - half)
    }
}

/// Converts `limbs * 2^-bits` to the nearest double (up to 2^-63 relative error).
fn limbs_to_f64(limbs: &[u64], bits: u32) -> f64 {
    let Some(top) = limbs.iter().rposition(|&l| l != 0) else {
        return 0.0;
    };
    let hi = limbs[top] as u128;
    let lo = if top > 0 { limbs[top - 1] as u128 } else { 0 };
    let v = (hi << 64) | lo;
    // v carries limbs top and top-1, so its unit is 2^(64*(top-1)).
    (v as f64) * pow2(64 * top as i32 - 64 - bits as i32)
}

impl FixedPointFraction {
    pub fn zero(bits: u32) -> Self {
        assert!(bits > 0, "fixed-point width must be positive");
        Self {
            limbs: smallvec::smallvec![0; limb_count(bits)],
            bits,
            err_ulp: 0,
        }
    }

    /// Builds `mantissa * 2^-bits`, reducing the mantissa mod `2^bits`.
    pub fn from_biguint(mantissa: &BigUint, bits: u32, err_ulp: u64) -> Self {
        let mut limbs: Limbs = mantissa.iter_u64_digits().collect();
        limbs.resize(limb_count(bits), 0);
        limbs.truncate(limb_count(bits));
        let n = limbs.len();
        limbs[n - 1] &= top_mask(bits);
        Self {
            limbs,
            bits,
            err_ulp,
        }
    }

    /// Rounds `value` (taken mod 1) down to the grid; exact inputs keep `err_ulp = 0`.
    pub fn from_f64(value: f64, bits: u32) -> Self {
        assert!(value.is_finite(), "fixed-point value must be finite");
        let frac = value - value.floor();
        // frac = m * 2^e exactly with a 53-bit integer m.
        let (m, e) = if frac == 0.0 {
            (0u64, 0i32)
        } else {
            let raw = frac.to_bits();
            let exp = ((raw >> 52) & 0x7ff) as i32;
            let man = raw & ((1u64 << 52) - 1);
            if exp == 0 {
                (man, -1074)
            } else {
                (man | (1u64 << 52), exp - 1075)
            }
        };
        let shift = e + bits as i32;
        let mantissa = if shift >= 0 {
            BigUint::from(m) << shift as usize
        } else {
            BigUint::from(m) >> (-shift) as usize
        };
        let exact = m == 0 || shift >= 0 || (-shift < 64 && m & ((1u64 << -shift) - 1) == 0);
        Self::from_biguint(&mantissa, bits, if exact { 0 } else { 1 })
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn err_ulp(&self) -> u64 {
        self.err_ulp
    }

    pub fn with_err_ulp(mut self, err_ulp: u64) -> Self {
        self.err_ulp = err_ulp;
        self
    }

    pub fn limbs(&self) -> &[u64] {
        &self.limbs
    }

    pub fn mantissa(&self) -> BigUint {
        BigUint::from_slice(
            &self
                .limbs
                .iter()
                .flat_map(|&l| [l as u32, (l >> 32) as u32])
                .collect::<Vec<_>>(),
        )
    }

    pub fn is_zero(&self) -> bool {
        self.limbs.iter().all(|&l| l == 0)
    }

    /// Absolute error bound as a real number.
    pub fn error_bound(&self) -> f64 {
        self.err_ulp as f64 * self.ulp()
    }

    pub fn ulp(&self) -> f64 {
        pow2(-(self.bits as i32))
    }

    pub fn to_f64(&self) -> f64 {
        limbs_to_f64(&self.limbs, self.bits)
    }

    /// True when the value is at least 1/2.
    #[inline]
    pub fn upper_half(&self) -> bool {
        let n = self.limbs.len();
        let w = top_width(self.bits);
        (self.limbs[n - 1] >> (w - 1)) & 1 == 1
    }

    /// Distance to the nearest integer, `min(x, 1 - x)`, with full relative accuracy.
    pub fn dist_to_int_f64(&self) -> f64 {
        if !self.upper_half() {
            return self.to_f64();
        }
        // 2^bits - x, computed limb-wise as (!x + 1) under the width mask.
        let mut comp: Limbs = self.limbs.iter().map(|&l| !l).collect();
        let n = comp.len();
        comp[n - 1] &= top_mask(self.bits);
        for l in comp.iter_mut() {
            let (v, carry) = l.overflowing_add(1);
            *l = v;
            if !carry {
                break;
            }
        }
        limbs_to_f64(&comp, self.bits)
    }

    /// In-place `self += other (mod 1)`; the error bound grows by `other.err_ulp + 1`.
    #[inline]
    pub fn add_assign_mod1(&mut self, other: &FixedPointFraction) {
        debug_assert_eq!(self.bits, other.bits);
        let mut carry = false;
        for (a, &b) in self.limbs.iter_mut().zip(other.limbs.iter()) {
            let (s1, c1) = a.overflowing_add(b);
            let (s2, c2) = s1.overflowing_add(carry as u64);
            *a = s2;
            carry = c1 | c2;
        }
        let n = self.limbs.len();
        self.limbs[n - 1] &= top_mask(self.bits);
        self.err_ulp = self
            .err_ulp
            .saturating_add(other.err_ulp)
            .saturating_add(1);
    }

    pub fn add_mod1(&self, other: &FixedPointFraction) -> FixedPointFraction {
        let mut out = self.clone();
        out.add_assign_mod1(other);
        out
    }

    /// Returns `({n x}, floor(n x))`. The mantissa product is exact; the
    /// error bound becomes `n * (err_ulp + 1)`.
    pub fn mul_u64(&self, n: u64) -> (FixedPointFraction, u64) {
        let mut limbs: Limbs = SmallVec::with_capacity(self.limbs.len());
        let mut carry: u64 = 0;
        for &l in &self.limbs {
            let p = l as u128 * n as u128 + carry as u128;
            limbs.push(p as u64);
            carry = (p >> 64) as u64;
        }
        let w = top_width(self.bits);
        let last = limbs.len() - 1;
        let int_part = if w == 64 {
            carry
        } else {
            (limbs[last] >> w) | (carry << (64 - w))
        };
        limbs[last] &= top_mask(self.bits);
        let err_ulp = n.saturating_mul(self.err_ulp.saturating_add(1));
        (
            FixedPointFraction {
                limbs,
                bits: self.bits,
                err_ulp,
            },
            int_part,
        )
    }

    /// Compares against the real `value` in `[0, 1]`, reporting `None` when the
    /// two are closer than this fraction's error bound plus one ulp.
    pub fn compare_with_margin(&self, value: &FixedPointFraction) -> Option<std::cmp::Ordering> {
        debug_assert_eq!(self.bits, value.bits);
        let diff = self.sub_mod1(value);
        let dist = diff.dist_to_int_f64();
        let margin = (self.err_ulp + value.err_ulp + 1) as f64 * self.ulp();
        if dist <= margin {
            return None;
        }
        Some(self.limbs.iter().rev().cmp(value.limbs.iter().rev()))
    }

    /// Circular distance `‖self - other‖`.
    pub fn circular_distance(&self, other: &FixedPointFraction) -> f64 {
        self.sub_mod1(other).dist_to_int_f64()
    }

    fn sub_mod1(&self, other: &FixedPointFraction) -> FixedPointFraction {
        let mut limbs = self.limbs.clone();
        let mut borrow = false;
        for (a, &b) in limbs.iter_mut().zip(other.limbs.iter()) {
            let (d1, b1) = a.overflowing_sub(b);
            let (d2, b2) = d1.overflowing_sub(borrow as u64);
            *a = d2;
            borrow = b1 | b2;
        }
        let n = limbs.len();
        limbs[n - 1] &= top_mask(self.bits);
        FixedPointFraction {
            limbs,
            bits: self.bits,
            err_ulp: self.err_ulp + other.err_ulp,
        }
    }
}
