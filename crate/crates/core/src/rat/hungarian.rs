//! Maximum-weight bipartite matching (Hungarian method with potentials).

#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    /// `(row, col)` pairs in row order.
    pub pairs: Vec<(usize, usize)>,
    /// Sum of the matched entries, accumulated in row order.
    pub weight: f64,
}

/// Reusable buffers for repeated square solves.
#[derive(Debug, Default, Clone)]
pub struct HungarianWorkspace {
    u: Vec<f64>,
    v: Vec<f64>,
    p: Vec<usize>,
    way: Vec<usize>,
    minv: Vec<f64>,
    used: Vec<bool>,
    cols: Vec<usize>,
}

impl HungarianWorkspace {
    pub fn new() -> Self {
        Self::default()
    }

    /// Solves the `n x n` row-major weight matrix `w` for maximum weight.
    /// Returns the matched weight; `cols()` then holds the column of each row.
    pub fn max_weight(&mut self, w: &[f64], n: usize) -> f64 {
        debug_assert_eq!(w.len(), n * n);
        if n == 0 {
            self.cols.clear();
            return 0.0;
        }
        for buf in [&mut self.u, &mut self.v, &mut self.minv] {
            buf.clear();
            buf.resize(n + 1, 0.0);
        }
        self.p.clear();
        self.p.resize(n + 1, 0);
        self.way.clear();
        self.way.resize(n + 1, 0);
        let (u, v, p, way, minv) = (&mut self.u, &mut self.v, &mut self.p, &mut self.way, &mut self.minv);
        for i in 1..=n {
            p[0] = i;
            let mut j0 = 0;
            minv.iter_mut().for_each(|m| *m = f64::INFINITY);
            self.used.clear();
            self.used.resize(n + 1, false);
            loop {
                self.used[j0] = true;
                let i0 = p[j0];
                let mut delta = f64::INFINITY;
                let mut j1 = 0;
                let row = &w[(i0 - 1) * n..i0 * n];
                for j in 1..=n {
                    if !self.used[j] {
                        let cur = -row[j - 1] - u[i0] - v[j];
                        if cur < minv[j] {
                            minv[j] = cur;
                            way[j] = j0;
                        }
                        if minv[j] < delta {
                            delta = minv[j];
                            j1 = j;
                        }
                    }
                }
                for j in 0..=n {
                    if self.used[j] {
                        u[p[j]] += delta;
                        v[j] -= delta;
                    } else {
                        minv[j] -= delta;
                    }
                }
                j0 = j1;
                if p[j0] == 0 {
                    break;
                }
            }
            loop {
                let j1 = way[j0];
                p[j0] = p[j1];
                j0 = j1;
                if j0 == 0 {
                    break;
                }
            }
        }
        self.cols.clear();
        self.cols.resize(n, 0);
        for j in 1..=n {
            self.cols[p[j] - 1] = j - 1;
        }
        self.cols.iter().enumerate().map(|(i, &j)| w[i * n + j]).sum()
    }

    pub fn cols(&self) -> &[usize] {
        &self.cols
    }
}

fn pad(matrix: &[Vec<f64>]) -> (Vec<f64>, usize, usize, usize) {
    let rows = matrix.len();
    let cols = matrix.first().map_or(0, Vec::len);
    let n = rows.max(cols);
    let mut w = vec![0.0; n * n];
    for (i, row) in matrix.iter().enumerate() {
        w[i * n..i * n + row.len()].copy_from_slice(row);
    }
    (w, n, rows, cols)
}

/// Maximum-weight matching of a rectangular non-negative matrix, saturating
/// `min(rows, cols)`. Among optimal matchings the lexicographically smallest
/// column sequence is returned.
pub fn hungarian(matrix: &[Vec<f64>]) -> Assignment {
    let (w, n, rows, cols) = pad(matrix);
    if rows == 0 || cols == 0 {
        return Assignment { pairs: Vec::new(), weight: 0.0 };
    }
    let mut ws = HungarianWorkspace::new();
    let opt = ws.max_weight(&w, n);
    let tol = 1e-9 * opt.abs().max(1.0);

    let mut chosen: Vec<usize> = Vec::with_capacity(n);
    let mut free: Vec<usize> = (0..n).collect();
    let mut fixed = 0.0;
    let mut sub = Vec::with_capacity(n * n);
    for i in 0..n {
        let mut pick = None;
        for (k, &j) in free.iter().enumerate() {
            let rest_cols: Vec<usize> = free.iter().copied().filter(|&c| c != j).collect();
            let m = rest_cols.len();
            sub.clear();
            for r in i + 1..n {
                sub.extend(rest_cols.iter().map(|&c| w[r * n + c]));
            }
            let value = fixed + w[i * n + j] + ws.max_weight(&sub, m);
            if value >= opt - tol {
                pick = Some(k);
                break;
            }
        }
        // the optimum is always reachable; fall back to the first column defensively
        let k = pick.unwrap_or(0);
        let j = free.remove(k);
        fixed += w[i * n + j];
        chosen.push(j);
    }
    let pairs: Vec<(usize, usize)> =
        chosen.iter().enumerate().filter(|&(i, &j)| i < rows && j < cols).map(|(i, &j)| (i, j)).collect();
    let weight = pairs.iter().map(|&(i, j)| matrix[i][j]).sum();
    Assignment { pairs, weight }
}

/// Exhaustive maximum over all injective row-to-column maps; used as an oracle.
pub fn brute_force_max(matrix: &[Vec<f64>]) -> f64 {
    let rows = matrix.len();
    let cols = matrix.first().map_or(0, Vec::len);
    fn rec(matrix: &[Vec<f64>], i: usize, used: &mut Vec<bool>, acc: f64, best: &mut f64, left: usize) {
        if i == matrix.len() || left == 0 {
            if acc > *best {
                *best = acc;
            }
            return;
        }
        let rows_left = matrix.len() - i;
        if rows_left > left {
            // this row may stay unmatched
            rec(matrix, i + 1, used, acc, best, left);
        }
        for j in 0..used.len() {
            if !used[j] {
                used[j] = true;
                rec(matrix, i + 1, used, acc + matrix[i][j], best, left - 1);
                used[j] = false;
            }
        }
    }
    let mut best = if rows == 0 || cols == 0 { 0.0 } else { f64::NEG_INFINITY };
    rec(matrix, 0, &mut vec![false; cols], 0.0, &mut best, rows.min(cols));
    best
}
