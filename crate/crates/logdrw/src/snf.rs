//! Smith normal form of integer matrices with unimodular transform tracking.
//!
//! `smith_normal_form(a)` returns `(u, d, v)` with `u * a * v = d`, where `u`
//! and `v` are unimodular and `d` is diagonal with `d[0][0] | d[1][1] | ...`,
//! all entries nonnegative. Matrices are dense `Vec<Vec<i128>>`; sizes are
//! desk-scale (rank at most a handful), so the classical elimination with a
//! divisibility fix-up pass is plenty.

pub type Mat = Vec<Vec<i128>>;

pub fn identity(n: usize) -> Mat {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1 } else { 0 }).collect())
        .collect()
}

pub fn mat_mul(a: &Mat, b: &Mat) -> Mat {
    let (n, k) = (a.len(), b.len());
    let m = if k == 0 { 0 } else { b[0].len() };
    let mut c = vec![vec![0i128; m]; n];
    for i in 0..n {
        for t in 0..k {
            if a[i][t] == 0 {
                continue;
            }
            for j in 0..m {
                c[i][j] += a[i][t] * b[t][j];
            }
        }
    }
    c
}

pub fn mat_vec(a: &Mat, v: &[i128]) -> Vec<i128> {
    a.iter()
        .map(|row| row.iter().zip(v).map(|(x, y)| x * y).sum())
        .collect()
}

/// Determinant by fraction-free Gaussian elimination (Bareiss). Panics on
/// non-square input.
pub fn det(a: &Mat) -> i128 {
    let n = a.len();
    assert!(a.iter().all(|r| r.len() == n), "det needs a square matrix");
    if n == 0 {
        return 1;
    }
    let mut m = a.clone();
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n - 1 {
        if m[k][k] == 0 {
            let piv = (k + 1..n).find(|&i| m[i][k] != 0);
            match piv {
                Some(i) => {
                    m.swap(i, k);
                    sign = -sign;
                }
                None => return 0,
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) / prev;
            }
            m[i][k] = 0;
        }
        prev = m[k][k];
    }
    sign * m[n - 1][n - 1]
}

/// Adjugate matrix, satisfying `a * adj(a) = det(a) * I`. Cofactor expansion;
/// fine for the small ranks used here.
pub fn adjugate(a: &Mat) -> Mat {
    let n = a.len();
    let minor = |r: usize, c: usize| -> Mat {
        (0..n)
            .filter(|&i| i != r)
            .map(|i| {
                (0..n)
                    .filter(|&j| j != c)
                    .map(|j| a[i][j])
                    .collect::<Vec<_>>()
            })
            .collect()
    };
    let mut adj = vec![vec![0i128; n]; n];
    for i in 0..n {
        for j in 0..n {
            let s = if (i + j) % 2 == 0 { 1 } else { -1 };
            adj[j][i] = s * det(&minor(i, j));
        }
    }
    adj
}

fn swap_rows(m: &mut Mat, u: &mut Mat, i: usize, j: usize) {
    m.swap(i, j);
    u.swap(i, j);
}

fn swap_cols(m: &mut Mat, v: &mut Mat, i: usize, j: usize) {
    for row in m.iter_mut() {
        row.swap(i, j);
    }
    for row in v.iter_mut() {
        row.swap(i, j);
    }
}

fn add_row(m: &mut Mat, u: &mut Mat, src: usize, dst: usize, c: i128) {
    for j in 0..m[0].len() {
        m[dst][j] += c * m[src][j];
    }
    for j in 0..u[0].len() {
        u[dst][j] += c * u[src][j];
    }
}

fn add_col(m: &mut Mat, v: &mut Mat, src: usize, dst: usize, c: i128) {
    for row in m.iter_mut() {
        row[dst] += c * row[src];
    }
    for row in v.iter_mut() {
        row[dst] += c * row[src];
    }
}

fn negate_row(m: &mut Mat, u: &mut Mat, i: usize) {
    for x in m[i].iter_mut() {
        *x = -*x;
    }
    for x in u[i].iter_mut() {
        *x = -*x;
    }
}

/// Smith normal form: returns `(u, d, v)` with `u * a * v = d`.
pub fn smith_normal_form(a: &Mat) -> (Mat, Mat, Mat) {
    let n = a.len();
    let m = if n == 0 { 0 } else { a[0].len() };
    let mut d = a.clone();
    let mut u = identity(n);
    let mut v = identity(m);
    let mut k = 0;
    while k < n.min(m) {
        // Find the smallest nonzero entry of the trailing block as pivot.
        let mut piv: Option<(usize, usize)> = None;
        for i in k..n {
            for j in k..m {
                if d[i][j] != 0
                    && piv.map_or(true, |(pi, pj)| d[i][j].abs() < d[pi][pj].abs())
                {
                    piv = Some((i, j));
                }
            }
        }
        let (pi, pj) = match piv {
            Some(p) => p,
            None => break,
        };
        swap_rows(&mut d, &mut u, k, pi);
        swap_cols(&mut d, &mut v, k, pj);
        // Reduce the pivot row and column. Each pass leaves remainders
        // strictly smaller than the pivot; re-picking the minimal entry then
        // strictly shrinks the pivot, so the loop terminates without entry
        // growth.
        let mut cleared = false;
        while !cleared {
            for i in k + 1..n {
                if d[i][k] != 0 {
                    let q = d[i][k].div_euclid(d[k][k]);
                    add_row(&mut d, &mut u, k, i, -q);
                }
            }
            for j in k + 1..m {
                if d[k][j] != 0 {
                    let q = d[k][j].div_euclid(d[k][k]);
                    add_col(&mut d, &mut v, k, j, -q);
                }
            }
            let residual_row = (k + 1..n).find(|&i| d[i][k] != 0);
            let residual_col = (k + 1..m).find(|&j| d[k][j] != 0);
            match (residual_row, residual_col) {
                (None, None) => cleared = true,
                (Some(i), _) => swap_rows(&mut d, &mut u, k, i),
                (None, Some(j)) => swap_cols(&mut d, &mut v, k, j),
            }
        }
        // Divisibility fix-up: pivot must divide the trailing block.
        let mut fixed = true;
        'scan: for i in k + 1..n {
            for j in k + 1..m {
                if d[i][j] % d[k][k] != 0 {
                    add_row(&mut d, &mut u, i, k, 1);
                    fixed = false;
                    break 'scan;
                }
            }
        }
        if !fixed {
            continue;
        }
        if d[k][k] < 0 {
            negate_row(&mut d, &mut u, k);
        }
        k += 1;
    }
    (u, d, v)
}
