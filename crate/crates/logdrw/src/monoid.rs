//! Affine (fine, saturated) monoids and their fractional points.
//!
//! A monoid is represented as the set of lattice points of a rational cone:
//! `P = { v in L : l_i(v) >= 0 for all facets l_i }` where `L` is a
//! finite-index-or-full sublattice of Z^r. Saturation is structural in this
//! representation. Predicates that quantify over infinitely many elements
//! (integrality of a morphism, quasi-saturation, radicality of an ideal) are
//! windowed semi-decision procedures returning three-valued verdicts with
//! witnesses.

use crate::snf::{adjugate, det, identity, mat_vec, smith_normal_form, Mat};

/// Fine saturated monoid: lattice points of a cone.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffineMonoid {
    pub rank: usize,
    /// Basis rows of the lattice L inside Z^rank; `None` means L = Z^rank.
    pub lattice: Option<Vec<Vec<i64>>>,
    /// Integer linear functionals; P = { v in L : l(v) >= 0 }.
    pub facets: Vec<Vec<i64>>,
    /// Optional generator list (input convenience; not required).
    pub gens: Option<Vec<Vec<i64>>>,
}

impl AffineMonoid {
    pub fn free(rank: usize) -> Self {
        // N^rank: one coordinate facet per axis.
        let facets = (0..rank)
            .map(|i| (0..rank).map(|j| if i == j { 1 } else { 0 }).collect())
            .collect();
        AffineMonoid { rank, lattice: None, facets, gens: None }
    }

    /// The groupification viewed as a monoid (no facets).
    pub fn group(rank: usize) -> Self {
        AffineMonoid { rank, lattice: None, facets: Vec::new(), gens: None }
    }

    fn lattice_mat(&self) -> Option<Mat> {
        self.lattice.as_ref().map(|rows| {
            // Columns of the returned matrix are the basis vectors.
            let r = self.rank;
            (0..r)
                .map(|i| (0..r).map(|j| rows[j][i] as i128).collect())
                .collect()
        })
    }

    pub fn lattice_contains(&self, v: &[i64]) -> bool {
        match self.lattice_mat() {
            None => true,
            Some(b) => {
                let d = det(&b);
                assert!(d != 0, "lattice basis must have full rank");
                let adj = adjugate(&b);
                let w: Vec<i128> = v.iter().map(|&x| x as i128).collect();
                mat_vec(&adj, &w).iter().all(|x| x % d == 0)
            }
        }
    }

    pub fn in_cone(&self, v: &[i64]) -> bool {
        self.facets
            .iter()
            .all(|l| l.iter().zip(v).map(|(a, b)| (*a as i128) * (*b as i128)).sum::<i128>() >= 0)
    }

    /// True iff v lies in the monoid.
    pub fn contains(&self, v: &[i64]) -> bool {
        assert_eq!(v.len(), self.rank);
        self.lattice_contains(v) && self.in_cone(v)
    }

    /// All monoid points with coordinates in [-window, window].
    pub fn window_points(&self, window: i64) -> Vec<Vec<i64>> {
        let mut out = Vec::new();
        let mut cur = vec![-window; self.rank];
        if self.rank == 0 {
            return vec![vec![]];
        }
        loop {
            if self.contains(&cur) {
                out.push(cur.clone());
            }
            let mut i = 0;
            loop {
                cur[i] += 1;
                if cur[i] <= window {
                    break;
                }
                cur[i] = -window;
                i += 1;
                if i == self.rank {
                    return out;
                }
            }
        }
    }
}

/// Point of P[1/p]: `num / p^den`. Canonical when `den == 0` or `num` is not
/// p times a lattice point.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FracPoint {
    pub num: Vec<i64>,
    pub den: u32,
}

impl FracPoint {
    pub fn integral(num: Vec<i64>) -> Self {
        FracPoint { num, den: 0 }
    }

    pub fn new_canonical(p: i64, monoid_lattice: &AffineMonoid, num: Vec<i64>, den: u32) -> Self {
        let mut x = FracPoint { num, den };
        while x.den > 0 && x.num.iter().all(|&c| c % p == 0) {
            let half: Vec<i64> = x.num.iter().map(|&c| c / p).collect();
            if monoid_lattice.lattice_contains(&half) {
                x = FracPoint { num: half, den: x.den - 1 };
            } else {
                break;
            }
        }
        x
    }

    pub fn is_zero(&self) -> bool {
        self.num.iter().all(|&c| c == 0)
    }

    /// p^e times the point, as an integer vector; requires e >= den.
    pub fn scaled(&self, p: i64, e: u32) -> Vec<i64> {
        assert!(e >= self.den);
        let f = p.pow(e - self.den);
        self.num.iter().map(|&c| c * f).collect()
    }
}

/// Least n >= 0 with p^n x in P, or None when x is not in P[1/p].
pub fn u_of(p: i64, mon: &AffineMonoid, x: &FracPoint) -> Option<u32> {
    if !mon.in_cone(&x.num) {
        return None;
    }
    for n in 0..=(x.den + 64) {
        if n >= x.den {
            let v = x.scaled(p, n);
            if mon.lattice_contains(&v) {
                return Some(n);
            }
        } else {
            let f = p.pow(x.den - n);
            if x.num.iter().all(|&c| c % f == 0) {
                let v: Vec<i64> = x.num.iter().map(|&c| c / f).collect();
                if mon.lattice_contains(&v) && mon.in_cone(&v) {
                    return Some(n);
                }
            }
        }
    }
    None
}

/// Injective monoid homomorphism given by its integer matrix on
/// groupifications (rows indexed by the target coordinates).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonoidHom {
    pub q_rank: usize,
    pub p_rank: usize,
    /// p_rank rows, q_rank columns.
    pub matrix: Vec<Vec<i64>>,
}

impl MonoidHom {
    pub fn apply(&self, q: &[i64]) -> Vec<i64> {
        assert_eq!(q.len(), self.q_rank);
        self.matrix
            .iter()
            .map(|row| row.iter().zip(q).map(|(a, b)| a * b).sum())
            .collect()
    }
}

/// Finitely generated ideal of a monoid: union of g + Q over generators g.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonoidIdeal {
    pub gens: Vec<Vec<i64>>,
}

impl MonoidIdeal {
    pub fn contains(&self, q_mon: &AffineMonoid, v: &[i64]) -> bool {
        self.gens.iter().any(|g| {
            let diff: Vec<i64> = v.iter().zip(g).map(|(a, b)| a - b).collect();
            q_mon.contains(&diff)
        })
    }
}

/// Outcome of a windowed predicate check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    HoldsOnWindow,
    Fails { witness: String },
    Inconclusive,
}

impl Verdict {
    pub fn holds(&self) -> bool {
        matches!(self, Verdict::HoldsOnWindow)
    }
}

fn add_vec(a: &[i64], b: &[i64]) -> Vec<i64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

fn sub_vec(a: &[i64], b: &[i64]) -> Vec<i64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Windowed check of integrality (the exchange condition): whenever
/// f(a1) + b1 = f(a2) + b2 with a_i in Q, b_i in P, there exist a3, a4 in Q
/// and b in P with b1 = f(a3) + b, b2 = f(a4) + b, a1 + a3 = a2 + a4.
pub fn is_integral_hom(
    f: &MonoidHom,
    q_mon: &AffineMonoid,
    p_mon: &AffineMonoid,
    window: i64,
) -> Verdict {
    let q_pts = q_mon.window_points(window);
    let p_pts = p_mon.window_points(window);
    use std::collections::HashMap;
    let mut buckets: HashMap<Vec<i64>, Vec<(usize, usize)>> = HashMap::new();
    for (qi, a) in q_pts.iter().enumerate() {
        let fa = f.apply(a);
        for (pi, b) in p_pts.iter().enumerate() {
            buckets.entry(add_vec(&fa, b)).or_default().push((qi, pi));
        }
    }
    for pairs in buckets.values() {
        for &(q1, p1) in pairs {
            for &(q2, p2) in pairs {
                let (a1, b1) = (&q_pts[q1], &p_pts[p1]);
                let (a2, b2) = (&q_pts[q2], &p_pts[p2]);
                let mut found = false;
                for a3 in &q_pts {
                    let b = sub_vec(b1, &f.apply(a3));
                    if !p_mon.contains(&b) {
                        continue;
                    }
                    let a4 = sub_vec(&add_vec(a1, a3), a2);
                    if a4.iter().any(|&c| c.abs() > 4 * window) || !q_mon.contains(&a4) {
                        continue;
                    }
                    if add_vec(&f.apply(&a4), &b) == *b2 {
                        found = true;
                        break;
                    }
                }
                if !found {
                    return Verdict::Fails {
                        witness: format!(
                            "integrality: a1={:?} b1={:?} a2={:?} b2={:?}",
                            a1, b1, a2, b2
                        ),
                    };
                }
            }
        }
    }
    Verdict::HoldsOnWindow
}

/// Windowed check of quasi-p-saturation: whenever a in P^gp, b in Q^gp with
/// p*a + f(b) in P, there is x in Q^gp with a + f(x) in P and b - p*x in Q.
pub fn is_quasi_p_saturated(
    p: i64,
    f: &MonoidHom,
    q_mon: &AffineMonoid,
    p_mon: &AffineMonoid,
    window: i64,
) -> Verdict {
    let a_box = AffineMonoid {
        rank: p_mon.rank,
        lattice: p_mon.lattice.clone(),
        facets: Vec::new(),
        gens: None,
    }
    .window_points(window);
    let b_box = AffineMonoid {
        rank: q_mon.rank,
        lattice: q_mon.lattice.clone(),
        facets: Vec::new(),
        gens: None,
    }
    .window_points(window);
    let x_box = AffineMonoid {
        rank: q_mon.rank,
        lattice: q_mon.lattice.clone(),
        facets: Vec::new(),
        gens: None,
    }
    .window_points(2 * window);
    for a in &a_box {
        for b in &b_box {
            let pa: Vec<i64> = a.iter().map(|&c| c * p).collect();
            let lhs = add_vec(&pa, &f.apply(b));
            if !p_mon.contains(&lhs) {
                continue;
            }
            let ok = x_box.iter().any(|x| {
                let px: Vec<i64> = x.iter().map(|&c| c * p).collect();
                p_mon.contains(&add_vec(a, &f.apply(x))) && q_mon.contains(&sub_vec(b, &px))
            });
            if !ok {
                return Verdict::Fails {
                    witness: format!("quasi-saturation: a={:?} b={:?}", a, b),
                };
            }
        }
    }
    Verdict::HoldsOnWindow
}

/// p-saturation = integrality + quasi-p-saturation, both on the window.
pub fn is_p_saturated_hom(
    p: i64,
    f: &MonoidHom,
    q_mon: &AffineMonoid,
    p_mon: &AffineMonoid,
    window: i64,
) -> Verdict {
    match is_integral_hom(f, q_mon, p_mon, window) {
        Verdict::HoldsOnWindow => {}
        v => return v,
    }
    is_quasi_p_saturated(p, f, q_mon, p_mon, window)
}

/// Search for a decomposition x = p^n * r + f(q) with r in P, q in Q.
pub fn star_decompose(
    p: i64,
    f: &MonoidHom,
    q_mon: &AffineMonoid,
    p_mon: &AffineMonoid,
    x: &[i64],
    n: u32,
    window: i64,
) -> Option<(Vec<i64>, Vec<i64>)> {
    let bound = window + x.iter().map(|c| c.abs()).max().unwrap_or(0);
    let pn = p.pow(n);
    for q in q_mon.window_points(bound) {
        let diff = sub_vec(x, &f.apply(&q));
        if diff.iter().all(|&c| c % pn == 0) {
            let r: Vec<i64> = diff.iter().map(|&c| c / pn).collect();
            if p_mon.contains(&r) {
                return Some((r, q));
            }
        }
    }
    None
}

/// Windowed check of the power-decomposition property: every x in P whose
/// class in P^gp/Q^gp is divisible by p^n decomposes as x = p^n r + q.
/// Returns a witness x when the decomposition search fails.
pub fn star_star_check(
    p: i64,
    f: &MonoidHom,
    q_mon: &AffineMonoid,
    p_mon: &AffineMonoid,
    n: u32,
    window: i64,
) -> Verdict {
    let pn = p.pow(n);
    let q_gp_box = AffineMonoid {
        rank: q_mon.rank,
        lattice: q_mon.lattice.clone(),
        facets: Vec::new(),
        gens: None,
    }
    .window_points(2 * window);
    for x in p_mon.window_points(window) {
        let divisible = q_gp_box.iter().any(|z| {
            let diff = sub_vec(&x, &f.apply(z));
            diff.iter().all(|&c| c % pn == 0)
                && p_mon.lattice_contains(&diff.iter().map(|&c| c / pn).collect::<Vec<_>>())
        });
        if !divisible {
            continue;
        }
        if star_decompose(p, f, q_mon, p_mon, &x, n, window).is_none() {
            return Verdict::Fails {
                witness: format!("no decomposition x = p^{} r + q for x = {:?}", n, x),
            };
        }
    }
    Verdict::HoldsOnWindow
}

/// J-minimality: x (fractional) cannot be written as r + f(j) with j in the
/// ideal J of Q and r in P. Fractional points are tested at p^{u(x)} x.
pub fn is_j_minimal(
    p: i64,
    p_mon: &AffineMonoid,
    f: &MonoidHom,
    j: &MonoidIdeal,
    x: &FracPoint,
) -> bool {
    let u = u_of(p, p_mon, x).expect("x must lie in P[1/p]");
    let v = x.scaled(p, u);
    !j.gens.iter().any(|g| p_mon.contains(&sub_vec(&v, &f.apply(g))))
}

/// Windowed radicality: n*x in J implies x in J, for n up to the window.
pub fn is_radical_ideal(q_mon: &AffineMonoid, j: &MonoidIdeal, window: i64) -> Verdict {
    if j.gens.is_empty() {
        return Verdict::HoldsOnWindow;
    }
    for x in q_mon.window_points(window) {
        if j.contains(q_mon, &x) {
            continue;
        }
        for n in 2..=window.max(2) {
            let nx: Vec<i64> = x.iter().map(|&c| c * n).collect();
            if j.contains(q_mon, &nx) {
                return Verdict::Fails {
                    witness: format!("radicality: {}*{:?} in ideal but {:?} is not", n, x, x),
                };
            }
        }
    }
    Verdict::HoldsOnWindow
}

/// Explicit splitting of a lattice inclusion with torsion-free cokernel.
#[derive(Clone, Debug)]
pub struct Splitting {
    pub s: usize,
    pub r: usize,
    u: Mat,
    u_inv: Mat,
    v: Mat,
    matrix: Mat,
}

impl Splitting {
    /// Split an integer vector of the target into (base part, complement part).
    pub fn split(&self, x: &[i64]) -> (Vec<i64>, Vec<i64>) {
        let w: Vec<i128> = x.iter().map(|&c| c as i128).collect();
        let c = mat_vec(&self.u, &w);
        let head = mat_vec(&self.v, &c[..self.s].to_vec());
        let q: Vec<i64> = head.iter().map(|&c| i64::try_from(c).unwrap()).collect();
        let m: Vec<i64> = c[self.s..].iter().map(|&c| i64::try_from(c).unwrap()).collect();
        (q, m)
    }

    pub fn unsplit(&self, q: &[i64], m: &[i64]) -> Vec<i64> {
        let fq = mat_vec(&self.matrix, &q.iter().map(|&c| c as i128).collect::<Vec<_>>());
        let mut tail = vec![0i128; self.s];
        tail.extend(m.iter().map(|&c| c as i128));
        let sec = mat_vec(&self.u_inv, &tail);
        fq.iter()
            .zip(&sec)
            .map(|(a, b)| i64::try_from(a + b).unwrap())
            .collect()
    }

    /// Image of the j-th complement basis vector inside the target lattice.
    pub fn section_basis(&self, j: usize) -> Vec<i64> {
        let mut m = vec![0i64; self.r - self.s];
        m[j] = 1;
        self.unsplit(&vec![0; self.s], &m)
    }
}

/// Compute a splitting target = image + complement for an injective lattice
/// map with torsion-free cokernel; returns the offending elementary divisor
/// otherwise.
pub fn split_quotient(f: &MonoidHom) -> Result<Splitting, i128> {
    let a: Mat = f
        .matrix
        .iter()
        .map(|row| row.iter().map(|&c| c as i128).collect())
        .collect();
    let (u, d, v) = smith_normal_form(&a);
    let (r, s) = (f.p_rank, f.q_rank);
    for k in 0..s {
        let dk = if k < r { d[k][k] } else { 0 };
        if dk != 1 {
            return Err(dk);
        }
    }
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
    let _ = identity(0);
    Ok(Splitting { s, r, u, u_inv, v, matrix: a })
}

/// Convert a generator list into a facet description of the cone it spans:
/// enumerate (r-1)-subsets, take primitive integer kernels, keep those
/// nonnegative on every generator.
pub fn gens_to_facets(rank: usize, gens: &[Vec<i64>]) -> Vec<Vec<i64>> {
    fn gcd(a: i64, b: i64) -> i64 {
        if b == 0 { a.abs() } else { gcd(b, a % b) }
    }
    if rank == 1 {
        let pos = gens.iter().any(|g| g[0] > 0);
        let neg = gens.iter().any(|g| g[0] < 0);
        return match (pos, neg) {
            (true, false) => vec![vec![1]],
            (false, true) => vec![vec![-1]],
            _ => vec![],
        };
    }
    let mut facets: Vec<Vec<i64>> = Vec::new();
    let n = gens.len();
    let mut idx: Vec<usize> = (0..rank - 1).collect();
    if n < rank - 1 {
        return facets;
    }
    loop {
        let a: Mat = idx
            .iter()
            .map(|&i| gens[i].iter().map(|&c| c as i128).collect())
            .collect();
        let (_, d, v) = smith_normal_form(&a);
        let rank_d = (0..(rank - 1).min(rank)).filter(|&k| d[k][k] != 0).count();
        if rank_d == rank - 1 {
            let col: Vec<i64> = (0..rank)
                .map(|i| i64::try_from(v[i][rank - 1]).unwrap())
                .collect();
            let g = col.iter().fold(0, |acc, &c| gcd(acc, c));
            if g != 0 {
                let mut l: Vec<i64> = col.iter().map(|&c| c / g).collect();
                let vals: Vec<i64> = gens
                    .iter()
                    .map(|gv| gv.iter().zip(&l).map(|(a, b)| a * b).sum())
                    .collect();
                if vals.iter().all(|&x| x >= 0) || vals.iter().all(|&x| x <= 0) {
                    if vals.iter().all(|&x| x <= 0) {
                        for c in l.iter_mut() {
                            *c = -*c;
                        }
                    }
                    if !facets.contains(&l) {
                        facets.push(l);
                    }
                }
            }
        }
        // next combination
        let mut i = rank - 1 - 1;
        loop {
            idx[i] += 1;
            if idx[i] <= n - (rank - 1 - i) {
                for j in i + 1..rank - 1 {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
            if i == 0 {
                return facets;
            }
            i -= 1;
        }
    }
}

/// Parsed contents of a line-oriented monoid definition file.
#[derive(Clone, Debug, Default)]
pub struct ParsedMonoidFile {
    pub rank: usize,
    pub lattice: Vec<Vec<i64>>,
    pub facets: Vec<Vec<i64>>,
    pub gens: Vec<Vec<i64>>,
    pub hom_rows: Vec<Vec<i64>>,
    pub ideal_gens: Vec<Vec<i64>>,
}

impl ParsedMonoidFile {
    pub fn monoid(&self) -> AffineMonoid {
        let facets = if self.facets.is_empty() && !self.gens.is_empty() {
            gens_to_facets(self.rank, &self.gens)
        } else {
            self.facets.clone()
        };
        AffineMonoid {
            rank: self.rank,
            lattice: if self.lattice.is_empty() { None } else { Some(self.lattice.clone()) },
            facets,
            gens: if self.gens.is_empty() { None } else { Some(self.gens.clone()) },
        }
    }
}

/// Parse the line-oriented format: `rank r`, `lattice <row>`, `facet <coeffs>`,
/// `gen <coeffs>`, `hom <row>`, `ideal <gen>`; `#` starts a comment.
pub fn parse_monoid_file(text: &str) -> Result<ParsedMonoidFile, String> {
    let mut out = ParsedMonoidFile::default();
    let mut saw_rank = false;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let mut it = line.split_whitespace();
        let key = it.next().unwrap();
        let nums: Result<Vec<i64>, _> = it.map(|t| t.parse::<i64>()).collect();
        let nums = nums.map_err(|e| format!("line {}: {}", lineno + 1, e))?;
        match key {
            "rank" => {
                if nums.len() != 1 || nums[0] < 0 {
                    return Err(format!("line {}: rank needs one nonnegative integer", lineno + 1));
                }
                out.rank = nums[0] as usize;
                saw_rank = true;
            }
            "lattice" | "facet" | "gen" | "hom" | "ideal" => {
                if !saw_rank {
                    return Err(format!("line {}: rank must come first", lineno + 1));
                }
                if key != "hom" && nums.len() != out.rank {
                    return Err(format!(
                        "line {}: expected {} coordinates, got {}",
                        lineno + 1,
                        out.rank,
                        nums.len()
                    ));
                }
                match key {
                    "lattice" => out.lattice.push(nums),
                    "facet" => out.facets.push(nums),
                    "gen" => out.gens.push(nums),
                    "hom" => out.hom_rows.push(nums),
                    "ideal" => out.ideal_gens.push(nums),
                    _ => unreachable!(),
                }
            }
            other => return Err(format!("line {}: unknown keyword '{}'", lineno + 1, other)),
        }
    }
    if !saw_rank {
        return Err("missing 'rank' line".into());
    }
    Ok(out)
}

/// The two-variable cone monoid { (a,b) in N^2 : b <= c*a, a <= c*b } used in
/// the comparison counterexample, with c = p^(2k), together with the diagonal
/// embedding of N.
pub fn counterexample_pair(p: i64, k: u32) -> (AffineMonoid, AffineMonoid, MonoidHom) {
    let c = p.pow(2 * k);
    let p_mon = AffineMonoid {
        rank: 2,
        lattice: None,
        facets: vec![vec![c, -1], vec![-1, c]],
        gens: None,
    };
    let q_mon = AffineMonoid::free(1);
    let hom = MonoidHom { q_rank: 1, p_rank: 2, matrix: vec![vec![1], vec![1]] };
    (p_mon, q_mon, hom)
}
