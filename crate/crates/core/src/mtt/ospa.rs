use super::motion::{position, CtState};

/// Minimum-cost assignment of every row to a distinct column (`rows ≤ cols`).
/// Returns the column of each row. Shortest augmenting paths with potentials,
/// `O(rows² · cols)`.
pub fn hungarian(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    if n == 0 {
        return Vec::new();
    }
    let m = cost[0].len();
    assert!(n <= m, "more rows than columns");
    // 1-based arrays, column 0 is the virtual start
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; m + 1];
    let mut owner = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    for i in 1..=n {
        owner[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=m {
                if used[j] {
                    continue;
                }
                let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut out = vec![0; n];
    for j in 1..=m {
        if owner[j] > 0 {
            out[owner[j] - 1] = j - 1;
        }
    }
    out
}

/// OSPA distance of order `p` with cut-off `c` between two sets of planar
/// points.
pub fn ospa_points(x: &[[f64; 2]], y: &[[f64; 2]], c: f64, p: f64) -> f64 {
    if x.len() == y.len() {
        // rounding depends on which set indexes the rows; take both for exact symmetry
        return ospa_ordered(x, y, c, p).min(ospa_ordered(y, x, c, p));
    }
    if x.len() < y.len() {
        ospa_ordered(x, y, c, p)
    } else {
        ospa_ordered(y, x, c, p)
    }
}

fn ospa_ordered(small: &[[f64; 2]], large: &[[f64; 2]], c: f64, p: f64) -> f64 {
    let (m, n) = (small.len(), large.len());
    if n == 0 {
        return 0.0;
    }
    let cost: Vec<Vec<f64>> = small
        .iter()
        .map(|a| {
            large
                .iter()
                .map(|b| (a[0] - b[0]).hypot(a[1] - b[1]).min(c).powf(p))
                .collect()
        })
        .collect();
    let assign = hungarian(&cost);
    let matched: f64 = assign.iter().enumerate().map(|(i, &j)| cost[i][j]).sum();
    ((matched + c.powf(p) * (n - m) as f64) / n as f64).powf(1.0 / p)
}

/// OSPA on the position dimensions of two state sets.
pub fn ospa(x: &[CtState], y: &[CtState], c: f64, p: f64) -> f64 {
    let px: Vec<[f64; 2]> = x.iter().map(position).collect();
    let py: Vec<[f64; 2]> = y.iter().map(position).collect();
    ospa_points(&px, &py, c, p)
}
