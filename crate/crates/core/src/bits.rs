// SPDX-License-Identifier: Apache-2.0

//! Fixed-width bit vectors.
//!
//! Every value flowing along a graph edge is a [`Bits`]: an unsigned integer
//! of an exact width between 1 and [`MAX_WIDTH`] bits. Bit 0 is the least
//! significant bit. Storage is little-endian 64-bit limbs, and bits above the
//! width are always zero.

use std::cmp::Ordering;
use std::fmt;

/// Largest width any edge may carry.
pub const MAX_WIDTH: u32 = 1024;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Bits {
    width: u32,
    limbs: Vec<u64>,
}

fn limb_count(width: u32) -> usize {
    width.div_ceil(64) as usize
}

impl Bits {
    pub fn zero(width: u32) -> Self {
        assert!(width >= 1 && width <= MAX_WIDTH, "width {width} out of range");
        Bits { width, limbs: vec![0; limb_count(width)] }
    }

    pub fn ones(width: u32) -> Self {
        let mut b = Bits::zero(width);
        for l in &mut b.limbs {
            *l = u64::MAX;
        }
        b.mask();
        b
    }

    /// Truncating constructor.
    pub fn from_u64(width: u32, value: u64) -> Self {
        let mut b = Bits::zero(width);
        b.limbs[0] = value;
        b.mask();
        b
    }

    pub fn from_u128(width: u32, value: u128) -> Self {
        let mut b = Bits::zero(width);
        b.limbs[0] = value as u64;
        if b.limbs.len() > 1 {
            b.limbs[1] = (value >> 64) as u64;
        }
        b.mask();
        b
    }

    pub fn from_bool(v: bool) -> Self {
        Bits::from_u64(1, v as u64)
    }

    /// Packs `bytes` so that byte `i` occupies bits `8i..8i+8`. Missing bytes are
    /// zero, surplus bytes are dropped.
    pub fn from_bytes_le(width: u32, bytes: &[u8]) -> Self {
        let mut b = Bits::zero(width);
        for (i, &byte) in bytes.iter().enumerate() {
            let bit = i as u64 * 8;
            if bit >= width as u64 {
                break;
            }
            b.limbs[(bit / 64) as usize] |= (byte as u64) << (bit % 64);
        }
        b.mask();
        b
    }

    /// Inverse of [`Bits::from_bytes_le`], producing exactly `n` bytes.
    pub fn to_bytes_le(&self, n: usize) -> Vec<u8> {
        (0..n)
            .map(|i| {
                let bit = i * 8;
                if bit >= self.width as usize {
                    0
                } else {
                    (self.limbs[bit / 64] >> (bit % 64)) as u8
                }
            })
            .collect()
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn limbs(&self) -> &[u64] {
        &self.limbs
    }

    fn mask(&mut self) {
        let rem = self.width % 64;
        if rem != 0 {
            let last = self.limbs.len() - 1;
            self.limbs[last] &= (1u64 << rem) - 1;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.limbs.iter().all(|&l| l == 0)
    }

    pub fn bit(&self, i: u32) -> bool {
        if i >= self.width {
            return false;
        }
        (self.limbs[(i / 64) as usize] >> (i % 64)) & 1 == 1
    }

    fn set_bit(&mut self, i: u32, v: bool) {
        let l = &mut self.limbs[(i / 64) as usize];
        if v {
            *l |= 1 << (i % 64);
        } else {
            *l &= !(1 << (i % 64));
        }
    }

    pub fn msb(&self) -> bool {
        self.bit(self.width - 1)
    }

    /// Low 64 bits.
    pub fn low_u64(&self) -> u64 {
        self.limbs[0]
    }

    /// The value as `u64` if it fits.
    pub fn to_u64(&self) -> Option<u64> {
        if self.limbs[1..].iter().any(|&l| l != 0) {
            None
        } else {
            Some(self.limbs[0])
        }
    }

    /// Reinterprets the value at a new width (truncating or zero-filling).
    pub fn resize(&self, width: u32) -> Bits {
        let mut b = Bits::zero(width);
        let n = b.limbs.len().min(self.limbs.len());
        b.limbs[..n].copy_from_slice(&self.limbs[..n]);
        b.mask();
        b
    }

    pub fn zext(&self, width: u32) -> Bits {
        debug_assert!(width >= self.width);
        self.resize(width)
    }

    pub fn sext(&self, width: u32) -> Bits {
        debug_assert!(width >= self.width);
        let mut b = self.resize(width);
        if self.msb() {
            for i in self.width..width {
                b.set_bit(i, true);
            }
        }
        b
    }

    /// Bits `offset..offset+width` of `self`.
    pub fn slice(&self, offset: u32, width: u32) -> Bits {
        self.shr_by(offset).resize(width)
    }

    /// Concatenation: the first part occupies the least significant bits.
    pub fn concat<'a>(parts: impl IntoIterator<Item = &'a Bits>) -> Bits {
        let parts: Vec<&Bits> = parts.into_iter().collect();
        let total: u32 = parts.iter().map(|p| p.width).sum();
        let mut out = Bits::zero(total);
        let mut at = 0;
        for p in parts {
            let shifted = p.resize(total).shl_by(at);
            out = out.or(&shifted);
            at += p.width;
        }
        out
    }

    fn shl_by(&self, amount: u32) -> Bits {
        let mut out = Bits::zero(self.width);
        if amount >= self.width {
            return out;
        }
        let limb_shift = (amount / 64) as usize;
        let bit_shift = amount % 64;
        for i in (limb_shift..self.limbs.len()).rev() {
            let src = i - limb_shift;
            let mut v = self.limbs[src] << bit_shift;
            if bit_shift != 0 && src > 0 {
                v |= self.limbs[src - 1] >> (64 - bit_shift);
            }
            out.limbs[i] = v;
        }
        out.mask();
        out
    }

    fn shr_by(&self, amount: u32) -> Bits {
        let mut out = Bits::zero(self.width);
        if amount >= self.width {
            return out;
        }
        let limb_shift = (amount / 64) as usize;
        let bit_shift = amount % 64;
        let n = self.limbs.len();
        for i in 0..n - limb_shift {
            let src = i + limb_shift;
            let mut v = self.limbs[src] >> bit_shift;
            if bit_shift != 0 && src + 1 < n {
                v |= self.limbs[src + 1] << (64 - bit_shift);
            }
            out.limbs[i] = v;
        }
        out
    }

    fn shift_amount(&self) -> u32 {
        match self.to_u64() {
            Some(v) if v < MAX_WIDTH as u64 => v as u32,
            _ => MAX_WIDTH,
        }
    }

    pub fn shl(&self, amount: &Bits) -> Bits {
        self.shl_by(amount.shift_amount())
    }

    pub fn shr(&self, amount: &Bits) -> Bits {
        self.shr_by(amount.shift_amount())
    }

    fn zip_limbs(&self, other: &Bits, f: impl Fn(u64, u64) -> u64) -> Bits {
        debug_assert_eq!(self.width, other.width);
        let mut out = Bits::zero(self.width);
        for (i, o) in out.limbs.iter_mut().enumerate() {
            *o = f(self.limbs[i], other.limbs.get(i).copied().unwrap_or(0));
        }
        out.mask();
        out
    }

    pub fn and(&self, other: &Bits) -> Bits {
        self.zip_limbs(other, |a, b| a & b)
    }

    pub fn or(&self, other: &Bits) -> Bits {
        self.zip_limbs(other, |a, b| a | b)
    }

    pub fn xor(&self, other: &Bits) -> Bits {
        self.zip_limbs(other, |a, b| a ^ b)
    }

    pub fn not(&self) -> Bits {
        let mut out = self.clone();
        for l in &mut out.limbs {
            *l = !*l;
        }
        out.mask();
        out
    }

    pub fn add(&self, other: &Bits) -> Bits {
        debug_assert_eq!(self.width, other.width);
        let mut out = Bits::zero(self.width);
        let mut carry = 0u64;
        for i in 0..self.limbs.len() {
            let (s1, c1) = self.limbs[i].overflowing_add(other.limbs[i]);
            let (s2, c2) = s1.overflowing_add(carry);
            out.limbs[i] = s2;
            carry = (c1 as u64) + (c2 as u64);
        }
        out.mask();
        out
    }

    pub fn neg(&self) -> Bits {
        self.not().add(&Bits::from_u64(self.width, 1))
    }

    pub fn sub(&self, other: &Bits) -> Bits {
        self.add(&other.neg())
    }

    /// Schoolbook product truncated to the operand width.
    pub fn mul(&self, other: &Bits) -> Bits {
        debug_assert_eq!(self.width, other.width);
        let n = self.limbs.len();
        let mut acc = vec![0u64; n];
        for i in 0..n {
            let mut carry = 0u128;
            for j in 0..n - i {
                let cur = acc[i + j] as u128
                    + (self.limbs[i] as u128) * (other.limbs[j] as u128)
                    + carry;
                acc[i + j] = cur as u64;
                carry = cur >> 64;
            }
        }
        let mut out = Bits { width: self.width, limbs: acc };
        out.mask();
        out
    }

    pub fn cmp_unsigned(&self, other: &Bits) -> Ordering {
        for i in (0..self.limbs.len().max(other.limbs.len())).rev() {
            let a = self.limbs.get(i).copied().unwrap_or(0);
            let b = other.limbs.get(i).copied().unwrap_or(0);
            match a.cmp(&b) {
                Ordering::Equal => continue,
                o => return o,
            }
        }
        Ordering::Equal
    }

    pub fn cmp_signed(&self, other: &Bits) -> Ordering {
        match (self.msb(), other.msb()) {
            (true, false) => Ordering::Less,
            (false, true) => Ordering::Greater,
            _ => self.cmp_unsigned(other),
        }
    }

    /// `0x`-prefixed lowercase hex, no leading zeros.
    pub fn to_hex(&self) -> String {
        let mut s = String::new();
        let mut started = false;
        for l in self.limbs.iter().rev() {
            if started {
                s.push_str(&format!("{l:016x}"));
            } else if *l != 0 {
                s.push_str(&format!("{l:x}"));
                started = true;
            }
        }
        if !started {
            s.push('0');
        }
        format!("0x{s}")
    }

    /// Parses decimal or `0x` hex text; fails if the value exceeds `width`.
    pub fn parse(width: u32, text: &str) -> Result<Bits, String> {
        let text = text.trim();
        let mut b = Bits::zero(width);
        if let Some(hex) = text.strip_prefix("0x").or_else(|| text.strip_prefix("0X")) {
            if hex.is_empty() {
                return Err(format!("empty hex literal {text:?}"));
            }
            let digits: Vec<u32> = hex
                .chars()
                .filter(|c| *c != '_')
                .map(|c| c.to_digit(16).ok_or_else(|| format!("bad hex digit {c:?}")))
                .collect::<Result<_, _>>()?;
            for (i, d) in digits.iter().rev().enumerate() {
                let bit = i as u32 * 4;
                if *d == 0 {
                    continue;
                }
                if bit + (32 - d.leading_zeros()) > width {
                    return Err(format!("{text} does not fit in {width} bits"));
                }
                b.limbs[(bit / 64) as usize] |= (*d as u64) << (bit % 64);
            }
            Ok(b)
        } else {
            let v: u128 = text.parse().map_err(|_| format!("bad integer literal {text:?}"))?;
            if width < 128 && v >> width != 0 {
                return Err(format!("{text} does not fit in {width} bits"));
            }
            Ok(Bits::from_u128(width, v))
        }
    }
}

impl fmt::Debug for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}'{}", self.width, self.to_hex())
    }
}

impl fmt::Display for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn add_wraps() {
        let a = Bits::from_u64(8, 200);
        let b = Bits::from_u64(8, 100);
        assert_eq!(a.add(&b).low_u64(), 44);
    }

    #[test]
    fn carries_across_limbs() {
        let a = Bits::from_u128(128, u64::MAX as u128);
        let b = Bits::from_u128(128, 1);
        assert_eq!(a.add(&b), Bits::from_u128(128, 1u128 << 64));
        assert_eq!(Bits::zero(128).sub(&b), Bits::ones(128));
    }

    #[test]
    fn slice_and_concat() {
        let lo = Bits::from_u64(8, 0xab);
        let hi = Bits::from_u64(4, 0x5);
        let m = Bits::concat([&lo, &hi]);
        assert_eq!(m.width(), 12);
        assert_eq!(m.low_u64(), 0x5ab);
        assert_eq!(m.slice(4, 8).low_u64(), 0x5a);
        let wide = Bits::concat([&Bits::from_u64(60, 1), &Bits::from_u64(10, 0x3ff)]);
        assert_eq!(wide.slice(60, 10).low_u64(), 0x3ff);
    }

    #[test]
    fn bytes_round_trip() {
        let bytes = [1u8, 2, 3, 4, 5, 6, 7, 8, 9, 10];
        let b = Bits::from_bytes_le(128, &bytes);
        assert_eq!(b.to_bytes_le(10), bytes);
        assert_eq!(b.slice(8, 8).low_u64(), 2);
        assert_eq!(b.to_bytes_le(12)[10..], [0, 0]);
    }

    #[test]
    fn extend() {
        let v = Bits::from_u64(4, 0b1010);
        assert_eq!(v.zext(8).low_u64(), 0b1010);
        assert_eq!(v.sext(8).low_u64(), 0b1111_1010);
    }

    #[test]
    fn hex_round_trip() {
        let v = Bits::from_u128(100, 0x1234_5678_9abc_def0_1122_3344);
        assert_eq!(Bits::parse(100, &v.to_hex()).unwrap(), v);
        assert_eq!(Bits::zero(3).to_hex(), "0x0");
        assert!(Bits::parse(4, "0x10").is_err());
        assert!(Bits::parse(4, "16").is_err());
        assert_eq!(Bits::parse(4, "15").unwrap().low_u64(), 15);
    }

    #[test]
    fn signed_compare() {
        let m1 = Bits::from_u64(4, 0xf);
        let one = Bits::from_u64(4, 1);
        assert_eq!(m1.cmp_signed(&one), Ordering::Less);
        assert_eq!(m1.cmp_unsigned(&one), Ordering::Greater);
    }
}
