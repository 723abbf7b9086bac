//! Local maxima of fields sampled on refined grids.

use crate::manifold::RefinedGrid;

/// Local maxima of `values` over the `3^D - 1` neighbourhood of existing grid
/// points, one representative (the lowest point number) per connected
/// plateau of equal values. A plateau is a maximum when no point adjacent to
/// it has a larger value.
pub fn local_maxima(grid: &RefinedGrid, values: &[f64]) -> Vec<usize> {
    assert_eq!(values.len(), grid.len(), "one value per grid point");
    let mut visited = vec![false; grid.len()];
    let mut out = Vec::new();
    let mut stack = Vec::new();
    for i in 0..grid.len() {
        if visited[i] {
            continue;
        }
        let v = values[i];
        if grid.neighbors(i).any(|n| values[n] > v) {
            continue;
        }
        // Flood the plateau of equal values through i.
        let mut is_max = true;
        visited[i] = true;
        stack.push(i);
        while let Some(p) = stack.pop() {
            for n in grid.neighbors(p) {
                if values[n] > v {
                    is_max = false;
                } else if values[n] == v && !visited[n] {
                    visited[n] = true;
                    stack.push(n);
                }
            }
        }
        if is_max {
            out.push(i);
        }
    }
    out
}

/// Number of local maxima with value strictly above `u`.
pub fn count_local_maxima_above(grid: &RefinedGrid, values: &[f64], u: f64) -> usize {
    local_maxima(grid, values).into_iter().filter(|&i| values[i] > u).count()
}

/// The `k` highest local maxima, in decreasing order of value (ties by point number).
pub fn top_local_maxima(grid: &RefinedGrid, values: &[f64], k: usize) -> Vec<usize> {
    let mut m = local_maxima(grid, values);
    m.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    m.truncate(k);
    m
}
