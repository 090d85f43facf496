//! The classical-differential side, weight-graded finite complexes, exact
//! homology over p-power moduli, the comparison maps on generators, the
//! verification engine, and the counterexample probe.
//!
//! Both sides of the comparison decompose over fractional weights. Per
//! weight x the normal-form side is a finite complex of cyclic p-power
//! modules indexed by partition/marker data, and the classical side (when x
//! is a valid label) is a Koszul-type complex on an integer vector. The
//! verifier checks, weight by weight on a bounded enumeration: the
//! generator-wise comparison map is an isomorphism of complexes onto the
//! weight part for label weights, homology agrees, and off-label weight
//! parts are acyclic.

use crate::drw_basis::{d_term, DRWElement, Factor, Frac, FracWeight, BasicKey, TermKey};
use crate::drw_basis::normalize_word;
use crate::log_drw::{rel_term_weight, AbsoluteCtx, RelativeCtx};
use crate::monoid::{is_j_minimal, u_of, FracPoint, MonoidIdeal};
use crate::snf::{adjugate, det, identity, mat_mul, mat_vec, smith_normal_form, Mat};
use std::collections::BTreeMap;

// ---------------------------------------------------------------------------
// Finite complexes and homology.
// ---------------------------------------------------------------------------

/// Finitely generated complex of direct sums of Z/p^e modules with integer
/// differential matrices. `gens[n]` lists (label, modulus exponent) in
/// degree n; `d[n]` maps degree n to n+1 (rows indexed by target
/// generators).
#[derive(Clone, Debug)]
pub struct FiniteComplex {
    pub p: i64,
    pub gens: Vec<Vec<(String, u32)>>,
    pub d: Vec<Mat>,
}

/// Per-degree invariant factors (> 1) of the homology groups.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HomologyReport {
    pub factors: Vec<Vec<i128>>,
}

impl HomologyReport {
    pub fn is_trivial(&self) -> bool {
        self.factors.iter().all(|f| f.is_empty())
    }
}

impl FiniteComplex {
    pub fn top(&self) -> usize {
        self.gens.len().saturating_sub(1)
    }

    pub fn rank(&self, n: usize) -> usize {
        self.gens.get(n).map(|g| g.len()).unwrap_or(0)
    }

    pub fn ranks(&self) -> Vec<usize> {
        self.gens.iter().map(|g| g.len()).collect()
    }

    /// Validate that the matrices define a complex: entries respect the
    /// moduli and consecutive differentials compose to zero modulo the
    /// target moduli.
    pub fn check(&self) -> Result<(), String> {
        let pw = |e: u32| (self.p as i128).pow(e);
        for n in 0..self.d.len() {
            let a = &self.d[n];
            if a.len() != self.rank(n + 1) || a.iter().any(|r| r.len() != self.rank(n)) {
                return Err(format!("degree {} matrix has wrong shape", n));
            }
            for (j, row) in a.iter().enumerate() {
                for (i, &v) in row.iter().enumerate() {
                    let src = pw(self.gens[n][i].1);
                    let tgt = pw(self.gens[n + 1][j].1);
                    if (v * src) % tgt != 0 {
                        return Err(format!(
                            "degree {} entry ({}, {}) does not respect moduli",
                            n, j, i
                        ));
                    }
                }
            }
        }
        for n in 0..self.d.len().saturating_sub(1) {
            let ab = mat_mul(&self.d[n + 1], &self.d[n]);
            for (j, row) in ab.iter().enumerate() {
                let tgt = pw(self.gens[n + 2][j].1);
                if row.iter().any(|&v| v % tgt != 0) {
                    return Err(format!("d o d nonzero from degree {}", n));
                }
            }
        }
        Ok(())
    }

    /// Homology by integer lift: per degree, the kernel lattice of the
    /// outgoing map (through the target moduli) modulo the incoming image
    /// and the source moduli, with invariant factors from Smith normal form.
    pub fn homology(&self) -> HomologyReport {
        self.check().expect("not a complex");
        let pw = |e: u32| (self.p as i128).pow(e);
        let mut out = Vec::new();
        for n in 0..self.gens.len() {
            let g = self.rank(n);
            if g == 0 {
                out.push(vec![]);
                continue;
            }
            // Kernel lattice of d_n into the target moduli.
            let kernel_basis: Mat = if n < self.d.len() && self.rank(n + 1) > 0 {
                let h = self.rank(n + 1);
                // Stack [A | diag(target moduli)] and take the kernel.
                let mut stacked = vec![vec![0i128; g + h]; h];
                for j in 0..h {
                    for i in 0..g {
                        stacked[j][i] = self.d[n][j][i];
                    }
                    stacked[j][g + j] = pw(self.gens[n + 1][j].1);
                }
                let (_, dd, v) = smith_normal_form(&stacked);
                let w = g + h;
                let mut cols: Mat = Vec::new();
                for j in 0..w {
                    let diag = if j < h.min(w) { dd[j][j] } else { 0 };
                    if diag == 0 {
                        cols.push((0..g).map(|i| v[i][j]).collect());
                    }
                }
                lattice_basis(g, &cols)
            } else {
                identity(g)
            };
            // Relations: image of the incoming differential plus the source
            // moduli, expressed in kernel-lattice coordinates.
            let mut rels: Mat = Vec::new();
            if n >= 1 && self.rank(n - 1) > 0 {
                for i in 0..self.rank(n - 1) {
                    rels.push((0..g).map(|j| self.d[n - 1][j][i]).collect());
                }
            }
            for i in 0..g {
                let mut e = vec![0i128; g];
                e[i] = pw(self.gens[n][i].1);
                rels.push(e);
            }
            let dk = det(&kernel_basis);
            assert!(dk != 0, "kernel lattice not full rank");
            let adj = adjugate(&kernel_basis);
            let rel_cols: Mat = rels
                .iter()
                .map(|b| {
                    let num = mat_vec(&adj, b);
                    num.iter()
                        .map(|&x| {
                            assert!(x % dk == 0, "relation outside kernel lattice");
                            x / dk
                        })
                        .collect()
                })
                .collect();
            // Columns of the presentation matrix.
            let mut pres = vec![vec![0i128; rel_cols.len()]; g];
            for (c, col) in rel_cols.iter().enumerate() {
                for j in 0..g {
                    pres[j][c] = col[j];
                }
            }
            let (_, dd, _) = smith_normal_form(&pres);
            let mut factors = Vec::new();
            for j in 0..g {
                let v = if j < dd.len() && j < dd[j].len() { dd[j][j] } else { 0 };
                if v != 1 {
                    factors.push(v);
                }
            }
            out.push(factors);
        }
        HomologyReport { factors: out }
    }
}

/// Basis of the lattice spanned by the given columns inside Z^g (the span
/// must have full rank g).
fn lattice_basis(g: usize, cols: &Mat) -> Mat {
    // M = g x k matrix of the columns; its column span equals the span of
    // U^{-1} D where U M V = D.
    let k = cols.len();
    let mut m = vec![vec![0i128; k]; g];
    for (c, col) in cols.iter().enumerate() {
        for j in 0..g {
            m[j][c] = col[j];
        }
    }
    let (u, d, _) = smith_normal_form(&m);
    let du = det(&u);
    assert!(du.abs() == 1);
    let mut u_inv = adjugate(&u);
    if du == -1 {
        for row in u_inv.iter_mut() {
            for x in row.iter_mut() {
                *x = -*x;
            }
        }
    }
    let mut basis = vec![vec![0i128; g]; g];
    for j in 0..g {
        let diag = if j < k { d[j][j] } else { 0 };
        assert!(diag != 0, "column span is not full rank");
        for i in 0..g {
            basis[i][j] = u_inv[i][j] * diag;
        }
    }
    basis
}

/// Koszul-type complex on an integer vector w over Z/p^pow: degree-n basis
/// indexed by n-subsets of the coordinates, differential wedging with
/// sum of w_i dlog_i.
pub fn koszul_complex(p: i64, pow: u32, w: &[i64]) -> FiniteComplex {
    let r = w.len();
    let subsets = subsets_by_size(r);
    let gens: Vec<Vec<(String, u32)>> = subsets
        .iter()
        .map(|level| {
            level
                .iter()
                .map(|s| (format!("dlog{:?}", s), pow))
                .collect()
        })
        .collect();
    let mut d = Vec::new();
    for n in 0..r {
        let src = &subsets[n];
        let tgt = &subsets[n + 1];
        let index: BTreeMap<&Vec<usize>, usize> =
            tgt.iter().enumerate().map(|(i, s)| (s, i)).collect();
        let mut mat = vec![vec![0i128; src.len()]; tgt.len()];
        for (c, s) in src.iter().enumerate() {
            for i in 0..r {
                if s.contains(&i) {
                    continue;
                }
                let mut t = s.clone();
                let pos = t.iter().position(|&j| j > i).unwrap_or(t.len());
                t.insert(pos, i);
                let sign = if pos % 2 == 0 { 1 } else { -1 };
                mat[index[&t]][c] += sign * w[i] as i128;
            }
        }
        d.push(mat);
    }
    FiniteComplex { p, gens, d }
}

fn subsets_by_size(r: usize) -> Vec<Vec<Vec<usize>>> {
    let mut by_size: Vec<Vec<Vec<usize>>> = vec![Vec::new(); r + 1];
    for mask in 0u32..(1 << r) {
        let s: Vec<usize> = (0..r).filter(|i| mask >> i & 1 == 1).collect();
        by_size[s.len()].push(s);
    }
    by_size
}

// ---------------------------------------------------------------------------
// Weight parts of the normal-form side.
// ---------------------------------------------------------------------------

/// All normal-form keys of a fixed weight: the base part and nonzero weight
/// entries are pinned by the weight; the free choices are the partition of
/// the support and the marker set on zero coordinates.
pub fn weight_part_keys(
    p: i64,
    m: u32,
    rm: usize,
    q_part: &[(usize, Frac)],
    entries: &[(usize, Frac)],
) -> Vec<Vec<TermKey>> {
    let n = entries.len();
    let zero_coords: Vec<usize> = (0..rm)
        .filter(|i| entries.iter().all(|(j, _)| j != i))
        .collect();
    let mut by_degree: Vec<Vec<TermKey>> = vec![Vec::new(); rm + 1];
    for marker_mask in 0u32..(1 << zero_coords.len()) {
        let inf: Vec<usize> = zero_coords
            .iter()
            .enumerate()
            .filter(|(b, _)| marker_mask >> b & 1 == 1)
            .map(|(_, &i)| i)
            .collect();
        for cut_mask in 0u32..(1 << n) {
            // Bits mark positions (in canonical order) that start a new
            // derivation block; the prefix before the first start is the
            // leading block, possibly empty.
            let starts: Vec<usize> = (0..n).filter(|i| cut_mask >> i & 1 == 1).collect();
            let mut blocks: Vec<u32> = Vec::new();
            let first = starts.first().copied().unwrap_or(n);
            blocks.push(first as u32);
            for (bi, &s) in starts.iter().enumerate() {
                let e = starts.get(bi + 1).copied().unwrap_or(n);
                blocks.push((e - s) as u32);
            }
            let key = TermKey {
                q: q_part.to_vec(),
                key: BasicKey {
                    weight: FracWeight { entries: entries.to_vec(), inf: inf.clone() },
                    blocks,
                },
            };
            if key.depth() >= m {
                continue;
            }
            let deg = key.key.degree();
            by_degree[deg].push(key);
        }
    }
    for level in by_degree.iter_mut() {
        level.sort();
    }
    let _ = p;
    by_degree
}

/// The weight-x part of the normal-form complex as a finite complex,
/// together with the per-degree key lists for coordinate lookups.
pub fn weight_part_complex(
    p: i64,
    m: u32,
    rm: usize,
    q_part: &[(usize, Frac)],
    entries: &[(usize, Frac)],
    pr: crate::drw_basis::Params,
) -> (FiniteComplex, Vec<Vec<TermKey>>) {
    let keys = weight_part_keys(p, m, rm, q_part, entries);
    let top = rm;
    let gens: Vec<Vec<(String, u32)>> = keys
        .iter()
        .map(|level| {
            level
                .iter()
                .map(|k| (format!("{:?}|{:?}", k.key.blocks, k.key.weight.inf), m - k.depth()))
                .collect()
        })
        .collect();
    let mut d = Vec::new();
    for n in 0..top {
        let index: BTreeMap<&TermKey, usize> =
            keys[n + 1].iter().enumerate().map(|(i, k)| (k, i)).collect();
        let mut mat = vec![vec![0i128; keys[n].len()]; keys[n + 1].len()];
        for (c, k) in keys[n].iter().enumerate() {
            let img = d_term(pr, k, 1);
            for (tk, coeff) in &img.terms {
                let row = *index
                    .get(tk)
                    .expect("differential left the weight part");
                mat[row][c] += *coeff as i128;
            }
        }
        d.push(mat);
    }
    (FiniteComplex { p, gens, d }, keys)
}

/// Weight entries of a fractional point, coordinate by coordinate.
pub fn point_entries(p: i64, x: &FracPoint) -> Vec<(usize, Frac)> {
    x.num
        .iter()
        .enumerate()
        .filter(|(_, &v)| v != 0)
        .map(|(i, &v)| (i, Frac::canon(p, v, x.den)))
        .collect()
}

// ---------------------------------------------------------------------------
// Label decomposition for the relative side.
// ---------------------------------------------------------------------------

/// Search for a decomposition x = f(q) + r with q in Q[1/p] and r in P,
/// over a bounded window of integral shifts. Returns (q, r) when found.
pub fn label_decomposition(
    ctx: &RelativeCtx,
    x: &FracPoint,
    window: i64,
) -> Option<(FracPoint, Vec<i64>)> {
    let den = x.den;
    let pden = ctx.p.pow(den);
    let (qv, mv) = ctx.split.split(&x.num);
    if mv.iter().any(|&c| c % pden != 0) {
        return None;
    }
    let m_int: Vec<i64> = mv.iter().map(|&c| c / pden).collect();
    let s = ctx.split.s;
    let mut z = vec![-window; s];
    loop {
        let q_num: Vec<i64> = qv.iter().zip(&z).map(|(&a, &b)| a - pden * b).collect();
        let q = FracPoint::new_canonical(ctx.p, &ctx.q_mon, q_num, den);
        if u_of(ctx.p, &ctx.q_mon, &q).is_some() {
            let r = ctx.split.unsplit(&z, &m_int);
            if ctx.p_mon.contains(&r) {
                return Some((q, r));
            }
        }
        // next z
        let mut i = 0;
        loop {
            if i == s {
                return None;
            }
            z[i] += 1;
            if z[i] <= window {
                break;
            }
            z[i] = -window;
            i += 1;
        }
    }
}

// ---------------------------------------------------------------------------
// Verification engine.
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub enum ComparisonContext<'a> {
    Absolute(&'a AbsoluteCtx),
    Relative(&'a RelativeCtx),
    Quotient(&'a RelativeCtx, &'a MonoidIdeal),
}

#[derive(Clone, Debug)]
pub struct WeightCheck {
    pub weight: FracPoint,
    pub in_image: bool,
    /// Comparison matrices square and invertible modulo p (vacuously true
    /// off the label set).
    pub injective: bool,
    pub normal_ranks: Vec<usize>,
    pub classical_ranks: Vec<usize>,
    pub homology_normal: Vec<Vec<i128>>,
    pub homology_classical: Vec<Vec<i128>>,
    pub ok: bool,
    pub witness: Option<String>,
}

#[derive(Clone, Debug)]
pub struct ComparisonReport {
    pub checks: Vec<WeightCheck>,
    pub pass: bool,
}

/// Enumerate canonical fractional weights of the monoid with numerators in
/// the box and denominator exponent below the level.
pub fn enumerate_weights(
    p: i64,
    m: u32,
    mon: &crate::monoid::AffineMonoid,
    box_bound: i64,
) -> Vec<FracPoint> {
    let r = mon.rank;
    let mut out: std::collections::BTreeSet<FracPoint> = std::collections::BTreeSet::new();
    for den in 0..m {
        let mut num = vec![-box_bound; r];
        loop {
            let x = FracPoint::new_canonical(p, mon, num.clone(), den);
            if x.den == den && u_of(p, mon, &x).is_some() {
                out.insert(x);
            }
            let mut i = 0;
            loop {
                if i == r {
                    break;
                }
                num[i] += 1;
                if num[i] <= box_bound {
                    break;
                }
                num[i] = -box_bound;
                i += 1;
            }
            if num.iter().all(|&c| c == -box_bound) {
                break;
            }
        }
    }
    out.into_iter().collect()
}

/// Expand an element over a degree-indexed key basis into an integer
/// coefficient column; panics when a term leaves the basis.
fn expand_in_basis(e: &DRWElement, keys: &[Vec<TermKey>], degree: usize) -> Vec<i128> {
    let index: BTreeMap<&TermKey, usize> =
        keys[degree].iter().enumerate().map(|(i, k)| (k, i)).collect();
    let mut col = vec![0i128; keys[degree].len()];
    for (tk, c) in &e.terms {
        let i = *index.get(tk).expect("image term outside the weight part");
        col[i] += *c as i128;
    }
    col
}

fn check_one_weight(ctx: &ComparisonContext, x: &FracPoint, window: i64) -> WeightCheck {
    let (p, m) = match ctx {
        ComparisonContext::Absolute(a) => (a.p, a.m),
        ComparisonContext::Relative(r) | ComparisonContext::Quotient(r, _) => (r.p, r.m),
    };
    let mut check = WeightCheck {
        weight: x.clone(),
        in_image: false,
        injective: true,
        normal_ranks: vec![],
        classical_ranks: vec![],
        homology_normal: vec![],
        homology_classical: vec![],
        ok: true,
        witness: None,
    };
    // Build the normal-form weight part.
    let (complex, keys, classical): (FiniteComplex, Vec<Vec<TermKey>>, Option<(FiniteComplex, Vec<Vec<Vec<usize>>>, u32)>);
    match ctx {
        ComparisonContext::Absolute(a) => {
            let pr = a.params();
            let entries = point_entries(p, x);
            let (c, k) = weight_part_complex(p, m, a.monoid.rank, &[], &entries, pr);
            complex = c;
            keys = k;
            let integral = x.den == 0 && a.monoid.contains(&x.num);
            check.in_image = integral;
            classical = if integral {
                Some((koszul_complex(p, m, &x.num), subsets_by_size(a.monoid.rank), 0))
            } else {
                None
            };
        }
        ComparisonContext::Relative(r) | ComparisonContext::Quotient(r, _) => {
            let pr = r.params();
            let den = x.den;
            let pden = p.pow(den);
            let (qv, mv) = r.split.split(&x.num);
            let q_part: Vec<(usize, Frac)> = qv
                .iter()
                .enumerate()
                .filter(|(_, &v)| v != 0)
                .map(|(i, &v)| (i, Frac::canon(p, v, den)))
                .collect();
            let entries: Vec<(usize, Frac)> = mv
                .iter()
                .enumerate()
                .filter(|(_, &v)| v != 0)
                .map(|(i, &v)| (i, Frac::canon(p, v, den)))
                .collect();
            let (c, k) = weight_part_complex(p, m, pr.rm, &q_part, &entries, pr);
            complex = c;
            keys = k;
            let label = label_decomposition(r, x, window);
            check.in_image = label.is_some();
            classical = if label.is_some() {
                let u = u_of(p, &r.p_mon, x).expect("weight not in the fractional monoid");
                if u >= m {
                    None
                } else {
                    let w: Vec<i64> = mv.iter().map(|&c| c / pden).collect();
                    Some((koszul_complex(p, m - u, &w), subsets_by_size(pr.rm), u))
                }
            } else {
                None
            };
        }
    }
    check.normal_ranks = complex.ranks();
    if let Err(e) = complex.check() {
        check.ok = false;
        check.witness = Some(format!("weight part is not a complex: {}", e));
        return check;
    }
    check.homology_normal = complex.homology().factors;
    match classical {
        Some((cl, subsets, u)) => {
            check.classical_ranks = cl.ranks();
            check.homology_classical = cl.homology().factors;
            // Comparison matrices per degree must be square and invertible
            // modulo p.
            for n in 0..cl.gens.len() {
                if cl.rank(n) != keys[n].len() {
                    check.ok = false;
                    check.injective = false;
                    check.witness =
                        Some(format!("rank mismatch in degree {}", n));
                    return check;
                }
                if cl.rank(n) == 0 {
                    continue;
                }
                let mut mat = vec![vec![0i128; cl.rank(n)]; keys[n].len()];
                for (c, i_set) in subsets[n].iter().enumerate() {
                    let img = c_map_generator(ctx, x, i_set, u);
                    let col = expand_in_basis(&img, &keys, n);
                    for (j, v) in col.iter().enumerate() {
                        mat[j][c] = *v;
                    }
                }
                let dm = det(&mat);
                if dm.rem_euclid(p as i128) == 0 {
                    check.ok = false;
                    check.injective = false;
                    check.witness = Some(format!(
                        "comparison matrix not invertible in degree {}",
                        n
                    ));
                    return check;
                }
            }
            if check.homology_normal != check.homology_classical {
                check.ok = false;
                check.witness = Some(format!(
                    "homology mismatch: {:?} vs {:?}",
                    check.homology_normal, check.homology_classical
                ));
            }
        }
        None => {
            // Off-label weights must be acyclic.
            let trivial = check.homology_normal.iter().all(|f| f.is_empty());
            if check.in_image {
                // Label weight whose classical side is empty only when the
                // level bound kills it entirely.
                if !keys.iter().all(|k| k.is_empty()) && !trivial {
                    check.ok = false;
                    check.witness = Some("label weight with empty classical side".into());
                }
            } else if !trivial {
                check.ok = false;
                check.witness = Some(format!(
                    "off-label weight part not acyclic: {:?}",
                    check.homology_normal
                ));
            }
        }
    }
    check
}

/// Image of one classical generator of weight x and wedge set `i_set`
/// (complement coordinates) under the comparison map, in normal form.
fn c_map_generator(
    ctx: &ComparisonContext,
    x: &FracPoint,
    i_set: &[usize],
    u: u32,
) -> DRWElement {
    match ctx {
        ComparisonContext::Absolute(a) => {
            let pr = a.params();
            let mut w = vec![Factor::V { n: 0, c: 1, x: x.num.clone() }];
            w.extend(i_set.iter().map(|&i| Factor::Dlog { i }));
            normalize_word(pr, &w, 1)
        }
        ComparisonContext::Relative(r) | ComparisonContext::Quotient(r, _) => {
            let pr = r.params();
            let scaled = x.scaled(r.p, u);
            let mut w = vec![Factor::V { n: u, c: 1, x: r.split_coords(&scaled) }];
            w.extend(i_set.iter().map(|&i| Factor::Dlog { i: r.split.s + i }));
            normalize_word(pr, &w, 1)
        }
    }
}

/// Run the weight-by-weight verification over the bounded enumeration.
pub fn verify_comparison(
    ctx: &ComparisonContext,
    box_bound: i64,
    window: i64,
) -> ComparisonReport {
    let (p, m, mon) = match ctx {
        ComparisonContext::Absolute(a) => (a.p, a.m, &a.monoid),
        ComparisonContext::Relative(r) | ComparisonContext::Quotient(r, _) => {
            (r.p, r.m, &r.p_mon)
        }
    };
    let weights = enumerate_weights(p, m, mon, box_bound);
    let mut checks = Vec::new();
    for x in weights {
        if let ComparisonContext::Quotient(r, ideal) = ctx {
            if !is_j_minimal(p, &r.p_mon, &r.hom, ideal, &x) {
                continue;
            }
        }
        checks.push(check_one_weight(ctx, &x, window));
    }
    let pass = checks.iter().all(|c| c.ok);
    ComparisonReport { checks, pass }
}

// ---------------------------------------------------------------------------
// Counterexample probe.
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct CounterexampleWitness {
    pub weight: FracPoint,
    pub nonzero: bool,
    pub d_vanishes: bool,
    pub in_label_set: bool,
    pub h0_factors: Vec<i128>,
    pub confirmed: bool,
    pub description: String,
}

/// Probe the non-saturated pair at the given parameters: the degree-0
/// element V(p X Y^(p^k + 1)) is a nonzero cocycle whose weight admits no
/// label decomposition, so the weight part fails the acyclicity required
/// for the comparison to be a quasi-isomorphism.
pub fn counterexample_probe(
    p: i64,
    k: u32,
    m: u32,
) -> Result<CounterexampleWitness, String> {
    if !(k > m && m >= 3) {
        return Err(format!("need k > m >= 3, got k = {}, m = {}", k, m));
    }
    let (p_mon, q_mon, hom) = crate::monoid::counterexample_pair(p, k);
    let ctx = RelativeCtx::new(p, m, q_mon, p_mon, hom, 2)
        .map_err(|e| format!("context construction failed: {}", e))?;
    let pr = ctx.params();
    let y_exp = p.pow(k) + 1;
    let abs_pr = crate::drw_basis::Params::absolute(p, m, 2);
    let abs = normalize_word(
        abs_pr,
        &[Factor::V { n: 1, c: p as i128, x: vec![1, y_exp] }],
        1,
    );
    let rel = crate::log_drw::to_relative(&ctx, &abs);
    let nonzero = !rel.is_zero();
    let d_vanishes = crate::drw_basis::d_elem(&rel).is_zero();
    let (tk, _) = rel
        .terms
        .iter()
        .next()
        .ok_or_else(|| "witness element vanished".to_string())?;
    let weight = rel_term_weight(&ctx, tk);
    let window = y_exp + 2;
    let in_label_set = label_decomposition(&ctx, &weight, window).is_some();
    // Homology of the weight part in degree 0.
    let den = weight.den;
    let (qv, mv) = ctx.split.split(&weight.num);
    let q_part: Vec<(usize, Frac)> = qv
        .iter()
        .enumerate()
        .filter(|(_, &v)| v != 0)
        .map(|(i, &v)| (i, Frac::canon(p, v, den)))
        .collect();
    let entries: Vec<(usize, Frac)> = mv
        .iter()
        .enumerate()
        .filter(|(_, &v)| v != 0)
        .map(|(i, &v)| (i, Frac::canon(p, v, den)))
        .collect();
    let (complex, _) = weight_part_complex(p, m, pr.rm, &q_part, &entries, pr);
    let h = complex.homology();
    let h0 = h.factors.first().cloned().unwrap_or_default();
    let confirmed = nonzero && d_vanishes && !in_label_set && !h0.is_empty();
    Ok(CounterexampleWitness {
        weight: weight.clone(),
        nonzero,
        d_vanishes,
        in_label_set,
        h0_factors: h0,
        confirmed,
        description: format!(
            "degree-0 cocycle of weight {:?}/p^{} outside the label set",
            weight.num, weight.den
        ),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::monoid::{AffineMonoid, MonoidHom};

    #[test]
    fn homology_hand_examples() {
        // 0 -> Z/p^2 --p--> Z/p^2 -> 0
        let c = FiniteComplex {
            p: 2,
            gens: vec![vec![("a".into(), 2)], vec![("b".into(), 2)]],
            d: vec![vec![vec![2]]],
        };
        let h = c.homology();
        assert_eq!(h.factors, vec![vec![2], vec![2]]);
        // Unit Koszul: acyclic.
        let c = koszul_complex(2, 3, &[1]);
        assert!(c.homology().is_trivial());
        // Multiplication by p on rank 1.
        let c = koszul_complex(2, 3, &[2]);
        assert_eq!(c.homology().factors, vec![vec![2], vec![2]]);
        // Zero weight: zero differential.
        let c = koszul_complex(2, 2, &[0, 0]);
        assert_eq!(c.homology().factors, vec![vec![4], vec![4, 4], vec![4]]);
    }

    #[test]
    fn homology_vs_brute_force() {
        // Small complexes where the homology order can be counted directly.
        let samples = vec![
            koszul_complex(2, 2, &[2, 1]),
            koszul_complex(2, 2, &[2, 2]),
            koszul_complex(3, 2, &[3, 6]),
            koszul_complex(2, 3, &[4, 6]),
        ];
        for c in samples {
            let h = c.homology();
            for n in 0..c.gens.len() {
                let expect: i128 = h.factors[n]
                    .iter()
                    .map(|&f| if f == 0 { panic!("free part") } else { f })
                    .product();
                assert_eq!(brute_homology_order(&c, n), expect, "degree {}", n);
            }
        }
    }

    fn brute_homology_order(c: &FiniteComplex, n: usize) -> i128 {
        let pw = |e: u32| (c.p as i128).pow(e);
        let enumerate = |gens: &Vec<(String, u32)>| -> Vec<Vec<i128>> {
            let mut out = vec![vec![]];
            for (_, e) in gens {
                let mut next = Vec::new();
                for v in &out {
                    for a in 0..pw(*e) {
                        let mut w = v.clone();
                        w.push(a);
                        next.push(w);
                    }
                }
                out = next;
            }
            out
        };
        let apply = |mat: &Mat, v: &[i128], tgt: &Vec<(String, u32)>| -> Vec<i128> {
            mat.iter()
                .zip(tgt)
                .map(|(row, (_, e))| {
                    row.iter().zip(v).map(|(a, b)| a * b).sum::<i128>().rem_euclid(pw(*e))
                })
                .collect()
        };
        let kernel: Vec<Vec<i128>> = enumerate(&c.gens[n])
            .into_iter()
            .filter(|v| {
                if n < c.d.len() && !c.gens[n + 1].is_empty() {
                    apply(&c.d[n], v, &c.gens[n + 1]).iter().all(|&x| x == 0)
                } else {
                    true
                }
            })
            .collect();
        let image: std::collections::BTreeSet<Vec<i128>> = if n >= 1 {
            enumerate(&c.gens[n - 1])
                .into_iter()
                .map(|v| apply(&c.d[n - 1], &v, &c.gens[n]))
                .collect()
        } else {
            [vec![0i128; c.gens[n].len()]].into_iter().collect()
        };
        kernel.len() as i128 / image.len() as i128
    }

    #[test]
    fn weight_part_shapes() {
        // Zero weight over rank 2: binomial ranks, zero differential.
        let pr = crate::drw_basis::Params::absolute(2, 2, 2);
        let (c, _) = weight_part_complex(2, 2, 2, &[], &[], pr);
        assert_eq!(c.ranks(), vec![1, 2, 1]);
        assert!(c.d.iter().all(|m| m.iter().all(|r| r.iter().all(|&v| v == 0))));
        // Weight 1 over rank 1 at level 2: one generator in each degree.
        let entries = vec![(0usize, Frac::integral(1))];
        let pr = crate::drw_basis::Params::absolute(2, 2, 1);
        let (c, _) = weight_part_complex(2, 2, 1, &[], &entries, pr);
        assert_eq!(c.ranks(), vec![1, 1]);
    }

    #[test]
    fn fractional_weight_parts_are_acyclic() {
        let pr = crate::drw_basis::Params::absolute(2, 3, 1);
        for num in [1i64, 3] {
            for den in [1u32, 2] {
                let entries = vec![(0usize, Frac::canon(2, num, den))];
                let (c, _) = weight_part_complex(2, 3, 1, &[], &entries, pr);
                assert!(
                    c.homology().is_trivial(),
                    "weight {}/2^{} part not acyclic",
                    num,
                    den
                );
            }
        }
    }

    #[test]
    fn absolute_verification_small() {
        let ctx = AbsoluteCtx::new(2, 2, AffineMonoid::free(1));
        let cc = ComparisonContext::Absolute(&ctx);
        let report = verify_comparison(&cc, 3, 3);
        assert!(report.pass, "failures: {:?}", report
            .checks
            .iter()
            .filter(|c| !c.ok)
            .collect::<Vec<_>>());
        // The enumeration covers integral and fractional weights.
        assert!(report.checks.iter().any(|c| c.in_image));
        assert!(report.checks.iter().any(|c| !c.in_image));
    }

    #[test]
    fn relative_verification_small() {
        let hom = MonoidHom { q_rank: 1, p_rank: 2, matrix: vec![vec![1], vec![1]] };
        let ctx = RelativeCtx::new(2, 2, AffineMonoid::free(1), AffineMonoid::free(2), hom, 3)
            .unwrap();
        assert!(ctx.certification.holds());
        let cc = ComparisonContext::Relative(&ctx);
        let report = verify_comparison(&cc, 2, 4);
        assert!(report.pass, "failures: {:?}", report
            .checks
            .iter()
            .filter(|c| !c.ok)
            .collect::<Vec<_>>());
    }

    #[test]
    fn counterexample_probe_confirms() {
        let w = counterexample_probe(2, 4, 3).unwrap();
        assert!(w.nonzero);
        assert!(w.d_vanishes);
        assert!(!w.in_label_set);
        assert!(w.confirmed, "witness: {:?}", w);
        // Parameter precondition.
        assert!(counterexample_probe(2, 3, 3).is_err());
    }
}
