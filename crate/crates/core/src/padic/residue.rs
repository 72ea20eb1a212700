//! Residues modulo `p^k`.
//!
//! Three representations, picked from the size of `p^k`: a `u64` with `u128`
//! products, a `u128` with Montgomery multiplication for moduli below
//! `2^126`, and `BigUint` above that. Every residue handed out by [`Modulus`]
//! is canonical for its modulus, which keeps derived equality meaningful.

use std::cell::RefCell;
use std::collections::HashMap;
use std::rc::Rc;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};

const WIDE_LIMIT: u128 = 1 << 126;

thread_local! {
    static BIG_MODULI: RefCell<HashMap<(u32, u32), Rc<BigUint>>> = RefCell::new(HashMap::new());
    static WIDE_MODULI: RefCell<HashMap<(u32, u32), Montgomery>> = RefCell::new(HashMap::new());
}

fn big_modulus(p: u32, k: u32) -> Rc<BigUint> {
    BIG_MODULI.with(|cache| {
        cache
            .borrow_mut()
            .entry((p, k))
            .or_insert_with(|| Rc::new(BigUint::from(p).pow(k)))
            .clone()
    })
}

fn wide_modulus(p: u32, k: u32, m: u128) -> Montgomery {
    WIDE_MODULI.with(|cache| {
        *cache
            .borrow_mut()
            .entry((p, k))
            .or_insert_with(|| Montgomery::new(m))
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub(crate) enum Residue {
    Word(u64),
    Wide(u128),
    Big(BigUint),
}

impl Residue {
    pub(crate) fn is_zero(&self) -> bool {
        match self {
            Residue::Word(w) => *w == 0,
            Residue::Wide(w) => *w == 0,
            Residue::Big(b) => b.is_zero(),
        }
    }

    pub(crate) fn to_biguint(&self) -> BigUint {
        match self {
            Residue::Word(w) => BigUint::from(*w),
            Residue::Wide(w) => BigUint::from(*w),
            Residue::Big(b) => b.clone(),
        }
    }

    /// Remainder modulo the small integer `d`.
    pub(crate) fn rem_small(&self, d: u32) -> u32 {
        match self {
            Residue::Word(w) => (*w % d as u64) as u32,
            Residue::Wide(w) => (*w % d as u128) as u32,
            Residue::Big(b) => (b % d).to_u32().unwrap_or(0),
        }
    }

    /// Little-endian base-`p` digits, exactly `k` of them.
    pub(crate) fn digits(&self, p: u32, k: u32) -> Vec<u32> {
        let mut out = Vec::with_capacity(k as usize);
        match self.as_u128() {
            Some(mut w) => {
                for _ in 0..k {
                    out.push((w % p as u128) as u32);
                    w /= p as u128;
                }
            }
            None => {
                let mut b = self.to_biguint();
                for _ in 0..k {
                    let (q, r) = b.div_rem(&BigUint::from(p));
                    out.push(r.to_u32().unwrap_or(0));
                    b = q;
                }
            }
        }
        out
    }

    fn as_u128(&self) -> Option<u128> {
        match self {
            Residue::Word(w) => Some(*w as u128),
            Residue::Wide(w) => Some(*w),
            Residue::Big(b) => b.to_u128(),
        }
    }
}

/// Montgomery constants for an odd `m < 2^126`, with `R = 2^128`.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Montgomery {
    m: u128,
    /// `-m^{-1} mod R`
    neg_inv: u128,
    /// `R^2 mod m`
    r2: u128,
}

impl Montgomery {
    fn new(m: u128) -> Self {
        let mut inv: u128 = 1;
        for _ in 0..7 {
            inv = inv.wrapping_mul(2u128.wrapping_sub(m.wrapping_mul(inv)));
        }
        let r2 = (BigUint::from(1u32) << 256u32) % BigUint::from(m);
        Self {
            m,
            neg_inv: inv.wrapping_neg(),
            r2: r2.to_u128().expect("reduced below m"),
        }
    }

    /// `(hi * R + lo) / R mod m` for inputs below `m * R`.
    fn redc(&self, hi: u128, lo: u128) -> u128 {
        let k = lo.wrapping_mul(self.neg_inv);
        let (h2, l2) = mul_wide(k, self.m);
        let carry = lo.overflowing_add(l2).1 as u128;
        // below 2m < 2^127
        let r = hi + h2 + carry;
        if r >= self.m {
            r - self.m
        } else {
            r
        }
    }

    fn mul(&self, a: u128, b: u128) -> u128 {
        let (hi, lo) = mul_wide(a, b);
        let t = self.redc(hi, lo);
        let (hi, lo) = mul_wide(t, self.r2);
        self.redc(hi, lo)
    }
}

/// Full 256-bit product as `(hi, lo)`.
fn mul_wide(a: u128, b: u128) -> (u128, u128) {
    const MASK: u128 = u64::MAX as u128;
    let (a1, a0) = (a >> 64, a & MASK);
    let (b1, b0) = (b >> 64, b & MASK);
    let p00 = a0 * b0;
    let p01 = a0 * b1;
    let p10 = a1 * b0;
    let p11 = a1 * b1;
    let mid = (p00 >> 64) + (p01 & MASK) + (p10 & MASK);
    let lo = (p00 & MASK) | (mid << 64);
    let hi = p11 + (p01 >> 64) + (p10 >> 64) + (mid >> 64);
    (hi, lo)
}

/// The modulus `p^k` together with the prime.
#[derive(Clone, Debug)]
pub(crate) enum Modulus {
    Word { p: u64, m: u64 },
    Wide { p: u128, mont: Montgomery },
    Big { p: u32, m: Rc<BigUint> },
}

impl Modulus {
    pub(crate) fn new(p: u32, k: u32) -> Self {
        if let Some(m) = (p as u64).checked_pow(k) {
            return Modulus::Word { p: p as u64, m };
        }
        match (p as u128).checked_pow(k) {
            Some(m) if m < WIDE_LIMIT => Modulus::Wide {
                p: p as u128,
                mont: wide_modulus(p, k, m),
            },
            _ => Modulus::Big {
                p,
                m: big_modulus(p, k),
            },
        }
    }

    pub(crate) fn value(&self) -> BigUint {
        match self {
            Modulus::Word { m, .. } => BigUint::from(*m),
            Modulus::Wide { mont, .. } => BigUint::from(mont.m),
            Modulus::Big { m, .. } => (**m).clone(),
        }
    }

    pub(crate) fn reduce_big(&self, n: &BigUint) -> Residue {
        match self {
            Modulus::Word { m, .. } => Residue::Word((n % *m).to_u64().unwrap_or(0)),
            Modulus::Wide { mont, .. } => Residue::Wide((n % mont.m).to_u128().unwrap_or(0)),
            Modulus::Big { m, .. } => Residue::Big(n % &**m),
        }
    }

    pub(crate) fn reduce_u64(&self, n: u64) -> Residue {
        match self {
            Modulus::Word { m, .. } => Residue::Word(n % *m),
            Modulus::Wide { mont, .. } => Residue::Wide(n as u128 % mont.m),
            Modulus::Big { m, .. } => Residue::Big(BigUint::from(n) % &**m),
        }
    }

    pub(crate) fn one(&self) -> Residue {
        self.reduce_u64(1)
    }

    /// Reduces a residue known modulo a higher (or equal) power of `p`.
    pub(crate) fn reduce(&self, r: &Residue) -> Residue {
        match self {
            Modulus::Word { .. } => Residue::Word(self.word(r)),
            Modulus::Wide { .. } => Residue::Wide(self.wide(r)),
            Modulus::Big { m, .. } => match r {
                Residue::Big(b) if b < &**m => Residue::Big(b.clone()),
                Residue::Big(b) => Residue::Big(b % &**m),
                other => Residue::Big(other.to_biguint() % &**m),
            },
        }
    }

    pub(crate) fn mul(&self, a: &Residue, b: &Residue) -> Residue {
        match self {
            Modulus::Word { m, .. } => {
                let a = self.word(a);
                let b = self.word(b);
                Residue::Word(((a as u128 * b as u128) % *m as u128) as u64)
            }
            Modulus::Wide { mont, .. } => Residue::Wide(mont.mul(self.wide(a), self.wide(b))),
            Modulus::Big { m, .. } => {
                let prod = match (a, b) {
                    (Residue::Big(x), Residue::Big(y)) => x * y,
                    (Residue::Big(x), Residue::Word(y)) | (Residue::Word(y), Residue::Big(x)) => {
                        x * *y
                    }
                    (x, y) => x.to_biguint() * y.to_biguint(),
                };
                Residue::Big(prod % &**m)
            }
        }
    }

    pub(crate) fn add(&self, a: &Residue, b: &Residue) -> Residue {
        match self {
            Modulus::Word { m, .. } => {
                let s = self.word(a) as u128 + self.word(b) as u128;
                Residue::Word((s % *m as u128) as u64)
            }
            Modulus::Wide { mont, .. } => {
                let s = self.wide(a) + self.wide(b);
                Residue::Wide(if s >= mont.m { s - mont.m } else { s })
            }
            Modulus::Big { m, .. } => Residue::Big((a.to_biguint() + b.to_biguint()) % &**m),
        }
    }

    pub(crate) fn neg(&self, a: &Residue) -> Residue {
        match self {
            Modulus::Word { m, .. } => {
                let a = self.word(a);
                Residue::Word(if a == 0 { 0 } else { *m - a })
            }
            Modulus::Wide { mont, .. } => {
                let a = self.wide(a);
                Residue::Wide(if a == 0 { 0 } else { mont.m - a })
            }
            Modulus::Big { m, .. } => {
                let a = a.to_biguint() % &**m;
                if a.is_zero() {
                    Residue::Big(a)
                } else {
                    Residue::Big(&**m - a)
                }
            }
        }
    }

    /// `a * p^shift + b`.
    pub(crate) fn shifted_add(&self, a: &Residue, shift: u32, b: &Residue) -> Residue {
        if shift == 0 {
            return self.add(a, b);
        }
        match self {
            Modulus::Word { p, m } => {
                // p^shift < m whenever the shifted term survives; otherwise it vanishes
                let scaled = match p.checked_pow(shift) {
                    Some(ps) if ps < *m => (self.word(a) as u128 * ps as u128) % *m as u128,
                    _ => 0,
                };
                let s = scaled + self.word(b) as u128;
                Residue::Word((s % *m as u128) as u64)
            }
            Modulus::Wide { p, mont } => {
                let scaled = match p.checked_pow(shift) {
                    Some(ps) if ps < mont.m => mont.mul(self.wide(a), ps),
                    _ => 0,
                };
                let s = scaled + self.wide(b);
                Residue::Wide(if s >= mont.m { s - mont.m } else { s })
            }
            Modulus::Big { p, m } => {
                let scaled = a.to_biguint() * BigUint::from(*p).pow(shift);
                Residue::Big((scaled + b.to_biguint()) % &**m)
            }
        }
    }

    /// Inverse of a unit residue.
    pub(crate) fn inv(&self, a: &Residue) -> Option<Residue> {
        match self {
            Modulus::Word { m, .. } => {
                inv_euclid(self.word(a) as i128, *m as i128).map(|v| Residue::Word(v as u64))
            }
            // m < 2^126 keeps the Euclid cofactors inside i128
            Modulus::Wide { mont, .. } => {
                inv_euclid(self.wide(a) as i128, mont.m as i128).map(|v| Residue::Wide(v as u128))
            }
            Modulus::Big { m, .. } => {
                let a = a.to_biguint() % &**m;
                a.modinv(m).map(Residue::Big)
            }
        }
    }

    pub(crate) fn pow(&self, a: &Residue, mut e: u64) -> Residue {
        let mut base = self.reduce(a);
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            e >>= 1;
            if e > 0 {
                base = self.mul(&base, &base);
            }
        }
        acc
    }

    fn word(&self, r: &Residue) -> u64 {
        match (self, r) {
            (Modulus::Word { m, .. }, Residue::Word(w)) => *w % *m,
            (Modulus::Word { m, .. }, Residue::Wide(w)) => (*w % *m as u128) as u64,
            (Modulus::Word { m, .. }, Residue::Big(b)) => (b % *m).to_u64().unwrap_or(0),
            _ => unreachable!("word view of a wider modulus"),
        }
    }

    fn wide(&self, r: &Residue) -> u128 {
        match (self, r) {
            (Modulus::Wide { mont, .. }, Residue::Word(w)) => *w as u128 % mont.m,
            (Modulus::Wide { mont, .. }, Residue::Wide(w)) => *w % mont.m,
            (Modulus::Wide { mont, .. }, Residue::Big(b)) => {
                (b % mont.m).to_u128().unwrap_or(0)
            }
            _ => unreachable!("wide view of another modulus"),
        }
    }
}

/// Strips factors of `p` from a nonzero residue modulo `p^k`; returns the
/// number of factors removed and the cofactor reduced modulo `p^(k - count)`.
pub(crate) fn strip_p(r: &Residue, p: u32, k: u32) -> (u32, Residue) {
    debug_assert!(!r.is_zero());
    let mut count = 0u32;
    match r.as_u128() {
        Some(mut w) => {
            while w % p as u128 == 0 {
                w /= p as u128;
                count += 1;
            }
            (count, Modulus::new(p, k - count).reduce(&Residue::Wide(w)))
        }
        None => {
            let mut b = r.to_biguint();
            loop {
                let (q, rem) = b.div_rem(&BigUint::from(p));
                if !rem.is_zero() {
                    break;
                }
                b = q;
                count += 1;
            }
            (count, Modulus::new(p, k - count).reduce_big(&b))
        }
    }
}

fn inv_euclid(a: i128, m: i128) -> Option<i128> {
    if m == 1 {
        return Some(0);
    }
    let (mut t, mut new_t) = (0i128, 1i128);
    let (mut r, mut new_r) = (m, a);
    while new_r != 0 {
        let q = r / new_r;
        (t, new_t) = (new_t, t - q * new_t);
        (r, new_r) = (new_r, r - q * new_r);
    }
    if r != 1 {
        return None;
    }
    if t < 0 {
        t += m;
    }
    Some(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn word_wide_and_big_paths_agree() {
        // 3^40 < 2^64 < 3^45 < 2^126 < 3^90
        let small = Modulus::new(3, 40);
        let wide = Modulus::new(3, 45);
        let big = Modulus::new(3, 90);
        assert!(matches!(small, Modulus::Word { .. }));
        assert!(matches!(wide, Modulus::Wide { .. }));
        assert!(matches!(big, Modulus::Big { .. }));
        let a = big.reduce_big(&BigUint::from(123_456_789_012_345u64).pow(4));
        let b = big.reduce_big(&BigUint::from(987_654_321_987u64).pow(5));
        let prod_big = big.mul(&a, &b);
        let prod_wide = wide.mul(&wide.reduce(&a), &wide.reduce(&b));
        let prod_small = small.mul(&small.reduce(&a), &small.reduce(&b));
        assert_eq!(wide.reduce(&prod_big), prod_wide);
        assert_eq!(small.reduce(&prod_wide), prod_small);
        let sum_big = big.add(&big.neg(&a), &b);
        let sum_wide = wide.add(&wide.neg(&wide.reduce(&a)), &wide.reduce(&b));
        assert_eq!(wide.reduce(&sum_big), sum_wide);
    }

    #[test]
    fn montgomery_matches_bigint() {
        let m = 7u128.pow(44);
        let mont = Montgomery::new(m);
        let mut a: u128 = 0x1234_5678_9abc_def0_1357_9bdf_2468_ace0 % m;
        let mut b: u128 = m - 1;
        for _ in 0..500 {
            let expected = (BigUint::from(a) * BigUint::from(b)) % BigUint::from(m);
            assert_eq!(BigUint::from(mont.mul(a, b)), expected);
            a = (mont.mul(a, a) + 12_345) % m;
            b = (b / 3 + a) % m;
        }
    }

    #[test]
    fn inverse_of_five_mod_nine() {
        let m = Modulus::new(3, 2);
        assert_eq!(m.inv(&m.reduce_u64(5)), Some(Residue::Word(2)));
        assert_eq!(m.inv(&m.reduce_u64(3)), None);
        let w = Modulus::new(5, 50);
        let x = w.reduce_u64(123_456_789);
        assert_eq!(w.mul(&x, &w.inv(&x).unwrap()), w.one());
    }

    #[test]
    fn strip_counts_factors() {
        let (c, u) = strip_p(&Residue::Word(45), 3, 5);
        assert_eq!(c, 2);
        assert_eq!(u, Residue::Word(5));
        let wide = Modulus::new(3, 50);
        let r = wide.shifted_add(&wide.reduce_u64(7), 44, &Residue::Wide(0));
        let (c, u) = strip_p(&r, 3, 50);
        assert_eq!(c, 44);
        assert_eq!(u, Residue::Word(7));
    }

    #[test]
    fn digits_little_endian() {
        assert_eq!(Residue::Word(7).digits(5, 3), vec![2, 1, 0]);
        assert_eq!(Residue::Wide(7).digits(5, 3), vec![2, 1, 0]);
    }
}
