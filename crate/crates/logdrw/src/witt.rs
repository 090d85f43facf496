//! Truncated Witt vectors over small base rings.
//!
//! A base ring is either the integers (used as a torsion-free lift, where the
//! ghost map is injective and serves as the arithmetic oracle), or the
//! integers modulo p^N (N = 1 gives the prime field), in each case with an
//! optional Laurent-monomial part: elements are sparse Laurent polynomials in
//! `rank` variables. Arithmetic on Witt coordinates is performed by lifting
//! to the integers, adding/multiplying ghost components there, and inverting
//! the ghost map; the inversion divides exactly because the result is a
//! genuine Witt vector of the lift.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use std::collections::BTreeMap;

/// Sparse Laurent polynomial with `BigInt` coefficients; `rank = 0` means a
/// plain integer constant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ZPoly {
    pub rank: usize,
    pub terms: BTreeMap<Vec<i64>, BigInt>,
}

impl ZPoly {
    pub fn zero(rank: usize) -> Self {
        ZPoly { rank, terms: BTreeMap::new() }
    }

    pub fn constant(rank: usize, c: i64) -> Self {
        Self::from_big(rank, BigInt::from(c))
    }

    pub fn from_big(rank: usize, c: BigInt) -> Self {
        let mut t = BTreeMap::new();
        if !c.is_zero() {
            t.insert(vec![0; rank], c);
        }
        ZPoly { rank, terms: t }
    }

    pub fn monomial(rank: usize, c: i64, expo: &[i64]) -> Self {
        assert_eq!(expo.len(), rank);
        let mut t = BTreeMap::new();
        if c != 0 {
            t.insert(expo.to_vec(), BigInt::from(c));
        }
        ZPoly { rank, terms: t }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.rank, other.rank);
        let mut t = self.terms.clone();
        for (e, c) in &other.terms {
            let entry = t.entry(e.clone()).or_insert_with(BigInt::zero);
            *entry += c;
            if entry.is_zero() {
                t.remove(e);
            }
        }
        ZPoly { rank: self.rank, terms: t }
    }

    pub fn neg(&self) -> Self {
        ZPoly {
            rank: self.rank,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.rank, other.rank);
        let mut t: BTreeMap<Vec<i64>, BigInt> = BTreeMap::new();
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                let e: Vec<i64> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                let entry = t.entry(e.clone()).or_insert_with(BigInt::zero);
                *entry += c1 * c2;
                if entry.is_zero() {
                    t.remove(&e);
                }
            }
        }
        ZPoly { rank: self.rank, terms: t }
    }

    pub fn pow(&self, n: u64) -> Self {
        let mut acc = Self::constant(self.rank, 1);
        let mut base = self.clone();
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&base);
            }
            n >>= 1;
            if n > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    pub fn scale(&self, c: &BigInt) -> Self {
        if c.is_zero() {
            return Self::zero(self.rank);
        }
        ZPoly {
            rank: self.rank,
            terms: self.terms.iter().map(|(e, k)| (e.clone(), k * c)).collect(),
        }
    }

    /// Reduce every coefficient into `[0, modulus)`.
    pub fn reduce_mod(&self, modulus: &BigInt) -> Self {
        let mut t = BTreeMap::new();
        for (e, c) in &self.terms {
            let mut r = c % modulus;
            if r.is_negative() {
                r += modulus;
            }
            if !r.is_zero() {
                t.insert(e.clone(), r);
            }
        }
        ZPoly { rank: self.rank, terms: t }
    }

    /// Exact division of every coefficient; panics when not divisible.
    pub fn div_exact(&self, divisor: &BigInt) -> Self {
        let mut t = BTreeMap::new();
        for (e, c) in &self.terms {
            let (q, r) = num_integer::Integer::div_rem(c, divisor);
            assert!(r.is_zero(), "inexact coefficient division");
            if !q.is_zero() {
                t.insert(e.clone(), q);
            }
        }
        ZPoly { rank: self.rank, terms: t }
    }
}

/// Base ring descriptor. `pow = 0` means the integers (torsion-free lift);
/// `pow = N >= 1` means integers modulo p^N (N = 1: the prime field).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BaseRing {
    pub p: i64,
    pub pow: u32,
    pub rank: usize,
}

impl BaseRing {
    pub fn integers(p: i64, rank: usize) -> Self {
        BaseRing { p, pow: 0, rank }
    }

    pub fn prime_field(p: i64, rank: usize) -> Self {
        BaseRing { p, pow: 1, rank }
    }

    pub fn modulus(&self) -> Option<BigInt> {
        if self.pow == 0 {
            None
        } else {
            Some(BigInt::from(self.p).pow(self.pow))
        }
    }

    fn reduce(&self, x: ZPoly) -> ZPoly {
        match self.modulus() {
            Some(m) => x.reduce_mod(&m),
            None => x,
        }
    }
}

/// Length-m Witt vector with coordinates in a base ring.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WittVector {
    pub base: BaseRing,
    pub coords: Vec<ZPoly>,
}

impl WittVector {
    pub fn zero(base: BaseRing, m: usize) -> Self {
        WittVector { base, coords: vec![ZPoly::zero(base.rank); m] }
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }
}

/// Ghost components over the given lift: component j is
/// sum over i <= j of p^i * a_i^(p^(j-i)).
pub fn ghost(p: i64, coords: &[ZPoly]) -> Vec<ZPoly> {
    let m = coords.len();
    let rank = coords.first().map_or(0, |c| c.rank);
    let mut out = Vec::with_capacity(m);
    for j in 0..m {
        let mut w = ZPoly::zero(rank);
        for (i, a) in coords.iter().enumerate().take(j + 1) {
            let e = (p as u64).pow((j - i) as u32);
            let pi = BigInt::from(p).pow(i as u32);
            w = w.add(&a.pow(e).scale(&pi));
        }
        out.push(w);
    }
    out
}

/// Invert the ghost map over a torsion-free lift. Panics when the input is
/// not the ghost vector of an integral Witt vector.
pub fn unghost(p: i64, ghosts: &[ZPoly]) -> Vec<ZPoly> {
    let m = ghosts.len();
    let rank = ghosts.first().map_or(0, |c| c.rank);
    let mut coords: Vec<ZPoly> = Vec::with_capacity(m);
    for n in 0..m {
        let mut acc = ghosts[n].clone();
        for (i, a) in coords.iter().enumerate().take(n) {
            let e = (p as u64).pow((n - i) as u32);
            let pi = BigInt::from(p).pow(i as u32);
            acc = acc.sub(&a.pow(e).scale(&pi));
        }
        let pn = BigInt::from(p).pow(n as u32);
        coords.push(acc.div_exact(&pn));
        let _ = rank;
    }
    coords
}

fn binary_op(a: &WittVector, b: &WittVector, f: impl Fn(&ZPoly, &ZPoly) -> ZPoly) -> WittVector {
    assert_eq!(a.base, b.base, "base ring mismatch");
    assert_eq!(a.len(), b.len(), "length mismatch");
    let p = a.base.p;
    let ga = ghost(p, &a.coords);
    let gb = ghost(p, &b.coords);
    let gc: Vec<ZPoly> = ga.iter().zip(&gb).map(|(x, y)| f(x, y)).collect();
    let coords = unghost(p, &gc)
        .into_iter()
        .map(|c| a.base.reduce(c))
        .collect();
    WittVector { base: a.base, coords }
}

/// Witt-vector addition. Over a modular base the computation runs on the
/// canonical integer lifts; universal polynomial identities make the result
/// independent of the lift choice.
pub fn witt_add(a: &WittVector, b: &WittVector) -> WittVector {
    binary_op(a, b, |x, y| x.add(y))
}

pub fn witt_mul(a: &WittVector, b: &WittVector) -> WittVector {
    binary_op(a, b, |x, y| x.mul(y))
}

pub fn witt_neg(a: &WittVector) -> WittVector {
    let p = a.base.p;
    let ga = ghost(p, &a.coords);
    let gc: Vec<ZPoly> = ga.iter().map(|x| x.neg()).collect();
    let coords = unghost(p, &gc)
        .into_iter()
        .map(|c| a.base.reduce(c))
        .collect();
    WittVector { base: a.base, coords }
}

pub fn witt_sub(a: &WittVector, b: &WittVector) -> WittVector {
    witt_add(a, &witt_neg(b))
}

/// Teichmueller representative: (a, 0, ..., 0).
pub fn teichmuller(base: BaseRing, a: &ZPoly, m: usize) -> WittVector {
    let mut coords = vec![ZPoly::zero(base.rank); m];
    if m > 0 {
        coords[0] = base.reduce(a.clone());
    }
    WittVector { base, coords }
}

/// Verschiebung: length m to length m + 1, shifting coordinates right.
pub fn verschiebung(a: &WittVector) -> WittVector {
    let mut coords = vec![ZPoly::zero(a.base.rank)];
    coords.extend(a.coords.iter().cloned());
    WittVector { base: a.base, coords }
}

/// Frobenius: length m + 1 to length m, characterized on lifts by shifting
/// the ghost vector left one slot.
pub fn frobenius(a: &WittVector) -> WittVector {
    assert!(a.len() >= 1);
    let p = a.base.p;
    let ga = ghost(p, &a.coords);
    let shifted: Vec<ZPoly> = ga[1..].to_vec();
    let coords = unghost(p, &shifted)
        .into_iter()
        .map(|c| a.base.reduce(c))
        .collect();
    WittVector { base: a.base, coords }
}

fn mod_pow(mut base: i128, mut exp: u64, modulus: i128) -> i128 {
    let mut acc = 1i128 % modulus;
    base %= modulus;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % modulus;
        }
        base = base * base % modulus;
        exp >>= 1;
    }
    acc
}

/// Ring isomorphism from length-m Witt vectors over the prime field to the
/// integers modulo p^m: (a_0, ..., a_{m-1}) maps to
/// sum over i of p^i * lift(a_i)^(p^(m-1-i)).
pub fn fp_witt_to_int(w: &WittVector) -> i64 {
    assert_eq!(w.base.pow, 1, "prime-field base required");
    assert_eq!(w.base.rank, 0, "scalar base required");
    let p = w.base.p as i128;
    let m = w.len() as u32;
    let modulus = p.pow(m);
    let mut n = 0i128;
    for (i, c) in w.coords.iter().enumerate() {
        let a: i128 = c
            .terms
            .get(&vec![])
            .map(|b| {
                let m = BigInt::from(w.base.p);
                let mut r = b % &m;
                if r.is_negative() {
                    r += &m;
                }
                i64::try_from(&r).unwrap() as i128
            })
            .unwrap_or(0);
        let e = (w.base.p as u64).pow(m - 1 - i as u32);
        n = (n + p.pow(i as u32) * mod_pow(a, e, modulus)) % modulus;
    }
    n as i64
}

/// Inverse of `fp_witt_to_int`.
pub fn int_to_fp_witt(p: i64, m: usize, n: i64) -> WittVector {
    let base = BaseRing::prime_field(p, 0);
    let modulus = (p as i128).pow(m as u32);
    let mut n = (n as i128).rem_euclid(modulus);
    let mut coords = Vec::with_capacity(m);
    for i in 0..m {
        let a = (n % p as i128) as i64;
        coords.push(ZPoly::constant(0, a));
        let e = (p as u64).pow((m - 1 - i) as u32);
        let level_mod = (p as i128).pow((m - i) as u32);
        let t = mod_pow(a as i128, e, level_mod);
        n = (n - t).rem_euclid(level_mod) / p as i128;
    }
    WittVector { base, coords }
}
