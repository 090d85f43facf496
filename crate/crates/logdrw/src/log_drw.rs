//! Complex elements in context: absolute (over one monoid), relative (over a
//! monoid homomorphism with split torsion-free quotient), and ideal-quotient
//! variants, built on the rewriting engine of [`crate::drw_basis`].
//!
//! Provides the degree-0 bridge to truncated Witt vectors of the monoid
//! algebra, weight-graded decomposition, the change between the monomial
//! basis presentation and the group-side atom presentation, base change from
//! the absolute to the relative complex along a splitting, and the
//! projection onto ideal-minimal weights.

use crate::drw_basis::{
    d_elem, normalize_word, term_to_word, wedge_elem, BasicKey,
    DRWElement, Factor, Frac, FracWeight, Params, TermKey,
};
use crate::monoid::{
    is_j_minimal, is_p_saturated_hom, split_quotient, u_of, AffineMonoid, FracPoint,
    MonoidHom, MonoidIdeal, Splitting, Verdict,
};
use crate::witt::{
    int_to_fp_witt, teichmuller, verschiebung, witt_add, witt_mul, witt_sub, BaseRing,
    WittVector, ZPoly,
};
use std::collections::BTreeMap;

/// Absolute context: the complex of one affine monoid at a fixed prime and
/// level.
#[derive(Clone, Debug)]
pub struct AbsoluteCtx {
    pub p: i64,
    pub m: u32,
    pub monoid: AffineMonoid,
}

impl AbsoluteCtx {
    pub fn new(p: i64, m: u32, monoid: AffineMonoid) -> Self {
        AbsoluteCtx { p, m, monoid }
    }

    pub fn params(&self) -> Params {
        Params::absolute(self.p, self.m, self.monoid.rank)
    }

    pub fn zero(&self) -> DRWElement {
        DRWElement::zero(self.params())
    }
}

/// Relative context: a homomorphism of affine monoids whose lattice quotient
/// is free, together with the chosen splitting and the windowed saturation
/// certification.
#[derive(Clone, Debug)]
pub struct RelativeCtx {
    pub p: i64,
    pub m: u32,
    pub q_mon: AffineMonoid,
    pub p_mon: AffineMonoid,
    pub hom: MonoidHom,
    pub split: Splitting,
    /// Windowed verdict of the saturation hypotheses; contexts with a
    /// failing verdict are still usable (that is the point of the
    /// counterexample probe) but carry the witness.
    pub certification: Verdict,
}

impl RelativeCtx {
    pub fn new(
        p: i64,
        m: u32,
        q_mon: AffineMonoid,
        p_mon: AffineMonoid,
        hom: MonoidHom,
        window: i64,
    ) -> Result<Self, String> {
        let split = split_quotient(&hom)
            .map_err(|d| format!("lattice quotient has torsion (elementary divisor {})", d))?;
        let certification = is_p_saturated_hom(p, &hom, &q_mon, &p_mon, window);
        Ok(RelativeCtx { p, m, q_mon, p_mon, hom, split, certification })
    }

    pub fn params(&self) -> Params {
        Params {
            p: self.p,
            m: self.m,
            s: self.split.s,
            rm: self.split.r - self.split.s,
        }
    }

    pub fn zero(&self) -> DRWElement {
        DRWElement::zero(self.params())
    }

    /// Express a full-lattice exponent vector in split coordinates
    /// (base part, then complement part).
    pub fn split_coords(&self, x: &[i64]) -> Vec<i64> {
        let (q, mm) = self.split.split(x);
        let mut out = q;
        out.extend(mm);
        out
    }
}

/// Total weight of a normal-form term in the coordinates of the ambient
/// lattice (identity for absolute contexts, unsplitting for relative ones).
pub fn abs_term_weight(p: i64, rank: usize, tk: &TermKey) -> FracPoint {
    let den = tk.key.u_key();
    let mut num = vec![0i64; rank];
    for (i, f) in &tk.key.weight.entries {
        num[*i] = f.scaled(p, den as i32);
    }
    canon_point(p, num, den)
}

pub fn rel_term_weight(ctx: &RelativeCtx, tk: &TermKey) -> FracPoint {
    let den = tk.depth();
    let s = ctx.split.s;
    let mut qv = vec![0i64; s];
    for (i, f) in &tk.q {
        qv[*i] = f.scaled(ctx.p, den as i32);
    }
    let mut mv = vec![0i64; ctx.split.r - s];
    for (i, f) in &tk.key.weight.entries {
        mv[*i] = f.scaled(ctx.p, den as i32);
    }
    canon_point(ctx.p, ctx.split.unsplit(&qv, &mv), den)
}

fn canon_point(p: i64, num: Vec<i64>, den: u32) -> FracPoint {
    let free = AffineMonoid::group(num.len());
    FracPoint::new_canonical(p, &free, num, den)
}

/// Split an element into its weight-homogeneous parts; the parts sum back to
/// the element.
pub fn decompose(
    e: &DRWElement,
    weight_of: impl Fn(&TermKey) -> FracPoint,
) -> BTreeMap<FracPoint, DRWElement> {
    let mut out: BTreeMap<FracPoint, DRWElement> = BTreeMap::new();
    for (tk, c) in &e.terms {
        let w = weight_of(tk);
        out.entry(w)
            .or_insert_with(|| DRWElement::zero(e.pr))
            .add_term(tk.clone(), *c as i128);
    }
    out
}

/// True when every term's weight lies in the fractional monoid of the
/// context.
pub fn weights_admissible(ctx: &AbsoluteCtx, e: &DRWElement) -> bool {
    e.terms
        .keys()
        .all(|tk| u_of(ctx.p, &ctx.monoid, &abs_term_weight(ctx.p, ctx.monoid.rank, tk)).is_some())
}

// ---------------------------------------------------------------------------
// Degree-0 bridge to Witt vectors of the monoid algebra.
// ---------------------------------------------------------------------------

/// Integer scalar as a length-m Witt vector over the rank-r prime-field
/// Laurent algebra.
fn int_witt(p: i64, m: usize, rank: usize, n: i64) -> WittVector {
    let scalar = int_to_fp_witt(p, m, n);
    let coords: Vec<ZPoly> = scalar
        .coords
        .iter()
        .map(|c| {
            let v = c
                .terms
                .get(&vec![])
                .map(|b| i64::try_from(b).unwrap())
                .unwrap_or(0);
            ZPoly::constant(rank, v)
        })
        .collect();
    WittVector { base: BaseRing::prime_field(p, rank), coords }
}

/// Degree-0 part of an absolute element as a Witt vector of the prime-field
/// monoid algebra: each term contributes V^D(eta * [T^(p^D x)]).
pub fn degree0_to_witt(ctx: &AbsoluteCtx, e: &DRWElement) -> WittVector {
    let rank = ctx.monoid.rank;
    let base = BaseRing::prime_field(ctx.p, rank);
    let mut acc = WittVector::zero(base, ctx.m as usize);
    for (tk, eta) in &e.terms {
        if tk.key.degree() != 0 {
            continue;
        }
        let d = tk.depth();
        let inner_len = (ctx.m - d) as usize;
        let expo: Vec<i64> = {
            let mut x = vec![0i64; rank];
            for (i, f) in &tk.key.weight.entries {
                x[i + ctx.params().s] = f.scaled(ctx.p, d as i32);
            }
            x
        };
        let t = teichmuller(base, &ZPoly::monomial(rank, 1, &expo), inner_len);
        let mut w = witt_mul(&int_witt(ctx.p, inner_len, rank, *eta), &t);
        for _ in 0..d {
            w = verschiebung(&w);
        }
        acc = witt_add(&acc, &w);
    }
    acc
}

/// Inverse of the degree-0 bridge: peel Teichmueller parts coordinate by
/// coordinate. At recursion depth j, a monomial a T^y contributes the term
/// with weight y / p^j and coefficient value p^j a.
pub fn witt_to_degree0(ctx: &AbsoluteCtx, w: &WittVector) -> DRWElement {
    let mut out = ctx.zero();
    peel(ctx, w, 0, &mut out);
    out
}

fn peel(ctx: &AbsoluteCtx, w: &WittVector, j: u32, out: &mut DRWElement) {
    if w.is_empty() || w.coords.iter().all(|c| c.is_zero()) {
        return;
    }
    let rank = ctx.monoid.rank;
    let base = w.base;
    let p_big = num_bigint::BigInt::from(ctx.p);
    let mut sub = WittVector::zero(base, w.len());
    for (y, c) in &w.coords[0].terms {
        let a = {
            let mut r = c % &p_big;
            if num_traits::Signed::is_negative(&r) {
                r += &p_big;
            }
            i64::try_from(&r).unwrap()
        };
        if a == 0 {
            continue;
        }
        // Record the term: weight y / p^j, coefficient value p^j * a.
        let entries: Vec<(usize, Frac)> = y
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0)
            .map(|(i, &c)| (i, Frac::canon(ctx.p, c, j)))
            .collect();
        let n = entries.len() as u32;
        let tk = TermKey {
            q: vec![],
            key: BasicKey {
                weight: FracWeight { entries, inf: vec![] },
                blocks: vec![n],
            },
        };
        out.add_term_cv(tk, a as i128 * ctx.params().ppow(j));
        sub = witt_add(&sub, &teichmuller(base, &ZPoly::monomial(rank, a, y), w.len()));
    }
    let rem = witt_sub(w, &sub);
    assert!(rem.coords[0].is_zero(), "Teichmueller peel left a residue");
    let shifted = WittVector { base, coords: rem.coords[1..].to_vec() };
    peel(ctx, &shifted, j + 1, out);
}

// ---------------------------------------------------------------------------
// Group-side atom presentation.
// ---------------------------------------------------------------------------

/// Element presented over the group-side generators: an atom
/// `(x, I)` with `x` a fractional weight and `I` a sorted subset of
/// `{0, 1, ..., r}` stands for the generator of weight x, differentiated
/// when `0` is in `I`, wedged with `dlog X_i` for the positive `i` in `I`
/// (coordinates shifted up by one). Coefficients are reduced modulo
/// p^(m - den(x)).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AtomPresentation {
    pub p: i64,
    pub m: u32,
    pub rank: usize,
    pub terms: BTreeMap<(FracPoint, Vec<usize>), i64>,
}

impl AtomPresentation {
    pub fn zero(p: i64, m: u32, rank: usize) -> Self {
        AtomPresentation { p, m, rank, terms: BTreeMap::new() }
    }

    pub fn add_atom(&mut self, x: FracPoint, i_set: Vec<usize>, c: i128) {
        if x.den >= self.m {
            return;
        }
        let modulus = (self.p as i128).pow(self.m - x.den);
        let key = (x, i_set);
        let cur = self.terms.get(&key).copied().unwrap_or(0) as i128;
        let v = (cur + c).rem_euclid(modulus);
        if v == 0 {
            self.terms.remove(&key);
        } else {
            self.terms.insert(key, v as i64);
        }
    }
}

/// Single atom as a normal-form element.
pub fn atom_to_elem(ctx: &AbsoluteCtx, x: &FracPoint, i_set: &[usize], c: i64) -> DRWElement {
    let pr = ctx.params();
    let entries: Vec<(usize, Frac)> = x
        .num
        .iter()
        .enumerate()
        .filter(|(_, &v)| v != 0)
        .map(|(i, &v)| (i, Frac::canon(ctx.p, v, x.den)))
        .collect();
    let n = entries.len() as u32;
    let tk = TermKey {
        q: vec![],
        key: BasicKey {
            weight: FracWeight { entries, inf: vec![] },
            blocks: vec![n],
        },
    };
    let mut e = DRWElement::zero(pr);
    e.add_term(tk, c as i128);
    if i_set.contains(&0) {
        e = d_elem(&e);
    }
    for &i in i_set.iter().filter(|&&i| i > 0) {
        e = wedge_elem(&e, i - 1);
    }
    e
}

pub fn atoms_to_elem(ctx: &AbsoluteCtx, a: &AtomPresentation) -> DRWElement {
    let mut out = ctx.zero();
    for ((x, i_set), c) in &a.terms {
        out = out.add(&atom_to_elem(ctx, x, i_set, *c));
    }
    out
}

fn sort_sign(mut v: Vec<usize>) -> (Vec<usize>, i128) {
    let mut sign = 1i128;
    let n = v.len();
    for i in 0..n {
        for j in 0..n.saturating_sub(1 + i) {
            if v[j] > v[j + 1] {
                v.swap(j, j + 1);
                sign = -sign;
            }
        }
    }
    (v, sign)
}

/// Expand a normal-form element over the group-side atoms: each derivation
/// block of a term splits as a sum over its members, contributing the member
/// weight times the block scale to the coefficient.
pub fn elem_to_atoms(ctx: &AbsoluteCtx, e: &DRWElement) -> AtomPresentation {
    let pr = ctx.params();
    let mut out = AtomPresentation::zero(ctx.p, ctx.m, ctx.monoid.rank);
    for (tk, eta) in &e.terms {
        let members = tk.key.block_members(ctx.p);
        let l = tk.key.blocks.len() - 1;
        let x = abs_term_weight(ctx.p, ctx.monoid.rank, tk);
        let case_b =
            tk.key.blocks[0] == 0 && l >= 1 && tk.key.t_of(ctx.p, &members[1]) >= 1;
        let first_block = if case_b { 2 } else { 1 };
        // Cartesian product over one member choice per expanded block.
        let mut choice: Vec<usize> = vec![0; l + 1 - first_block];
        loop {
            let mut coeff = *eta as i128;
            let mut wedge: Vec<usize> = Vec::new();
            if case_b {
                wedge.push(0);
            }
            let mut inner: Vec<usize> = Vec::new();
            for (slot, j) in (first_block..=l).enumerate() {
                let i = members[j][choice[slot]];
                let t = tk.key.t_of(ctx.p, &members[j]);
                coeff *= tk.key.weight.get(i).unwrap().scaled(ctx.p, t) as i128;
                inner.push(i + 1);
            }
            inner.extend(tk.key.weight.inf.iter().map(|&i| i + 1));
            let (sorted, sign) = sort_sign(inner);
            wedge.extend(sorted);
            out.add_atom(x.clone(), wedge, coeff * sign);
            // next choice
            let mut k = 0;
            loop {
                if k == choice.len() {
                    // done with this term
                    break;
                }
                choice[k] += 1;
                if choice[k] < members[first_block + k].len() {
                    break;
                }
                choice[k] = 0;
                k += 1;
            }
            if k == choice.len() {
                break;
            }
        }
        let _ = pr;
    }
    out
}

// ---------------------------------------------------------------------------
// Base change to the relative complex and the ideal quotient.
// ---------------------------------------------------------------------------

/// Push an absolute element (over the target monoid of the context) into the
/// relative complex: rewrite the defining words in split coordinates, where
/// base-coordinate dlog factors vanish and a full-lattice dlog expands over
/// the split basis.
pub fn to_relative(ctx: &RelativeCtx, abs: &DRWElement) -> DRWElement {
    assert_eq!(abs.pr.s, 0);
    assert_eq!(abs.pr.r(), ctx.split.r);
    assert_eq!(abs.pr.m, ctx.m);
    let rel_pr = ctx.params();
    let s = ctx.split.s;
    let r = ctx.split.r;
    // Split image of each standard basis vector, for dlog expansion.
    let basis_images: Vec<Vec<i64>> = (0..r)
        .map(|i| {
            let mut e = vec![0i64; r];
            e[i] = 1;
            ctx.split_coords(&e)
        })
        .collect();
    let mut out = ctx.zero();
    for (tk, eta) in &abs.terms {
        let word = term_to_word(abs.pr, tk, *eta);
        // Transform exponents; collect dlog expansion alternatives.
        let mut fixed: Vec<Factor> = Vec::new();
        let mut dlog_slots: Vec<Vec<(usize, i64)>> = Vec::new();
        for f in word {
            match f {
                Factor::V { n, c, x } => {
                    fixed.push(Factor::V { n, c, x: ctx.split_coords(&x) })
                }
                Factor::DV { n, c, x } => {
                    fixed.push(Factor::DV { n, c, x: ctx.split_coords(&x) })
                }
                Factor::Fd { a, x } => fixed.push(Factor::Fd { a, x: ctx.split_coords(&x) }),
                Factor::Dlog { i } => {
                    let alts: Vec<(usize, i64)> = (s..r)
                        .filter(|&k| basis_images[i][k] != 0)
                        .map(|k| (k, basis_images[i][k]))
                        .collect();
                    fixed.push(Factor::Dlog { i: usize::MAX });
                    dlog_slots.push(alts);
                }
            }
        }
        // Distribute the dlog expansions.
        let mut choice = vec![0usize; dlog_slots.len()];
        'outer: loop {
            if dlog_slots.iter().any(|a| a.is_empty()) {
                break;
            }
            let mut scalar = 1i128;
            let mut slot = 0usize;
            let w: Vec<Factor> = fixed
                .iter()
                .map(|f| match f {
                    Factor::Dlog { i } if *i == usize::MAX => {
                        let (k, c) = dlog_slots[slot][choice[slot]];
                        slot += 1;
                        scalar *= c as i128;
                        Factor::Dlog { i: k }
                    }
                    other => other.clone(),
                })
                .collect();
            out = out.add(&normalize_word(rel_pr, &w, scalar));
            let mut k = 0;
            loop {
                if k == choice.len() {
                    break 'outer;
                }
                choice[k] += 1;
                if choice[k] < dlog_slots[k].len() {
                    break;
                }
                choice[k] = 0;
                k += 1;
            }
        }
        if dlog_slots.is_empty() {
            // handled by the loop above (single empty choice)
        }
    }
    out
}

/// Projection of a relative element onto the weights that are minimal for
/// the ideal: terms whose weight can absorb an ideal element are dropped.
pub fn to_quotient(ctx: &RelativeCtx, ideal: &MonoidIdeal, e: &DRWElement) -> DRWElement {
    let mut out = ctx.zero();
    for (tk, c) in &e.terms {
        let x = rel_term_weight(ctx, tk);
        if is_j_minimal(ctx.p, &ctx.p_mon, &ctx.hom, ideal, &x) {
            out.add_term(tk.clone(), *c as i128);
        }
    }
    out
}
