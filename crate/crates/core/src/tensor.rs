//! Separable evaluation of kernel sums on tensor-product query grids.
//!
//! A Gaussian kernel factorizes over axes, so a sum `sum_v prod_d m_d(q_d, v_d) A(v)`
//! over a dense data box reduces to three successive matrix contractions.
//! The two trailing contractions are shared between requests with the same
//! trailing factors; the leading one can be restricted to a slab of query
//! rows so memory stays bounded on large grids.

use std::ops::Range;

use crate::kernel::GaussianKernel;
use crate::lattice::MAX_DIM;

/// One per-axis factor of a separable sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Factor {
    /// Derivative of the kernel factor of the given order.
    Deriv(u8),
    /// Product of two kernel-factor derivatives, with orders sorted.
    Product(u8, u8),
}

impl Factor {
    pub fn product(a: u8, b: u8) -> Self {
        Factor::Product(a.min(b), a.max(b))
    }

    fn eval(self, kernel: &GaussianKernel, axis: usize, t: f64) -> f64 {
        match self {
            Factor::Deriv(o) => kernel.axis_factor(axis, o, t),
            Factor::Product(a, b) => kernel.axis_factor(axis, a, t) * kernel.axis_factor(axis, b, t),
        }
    }
}

/// A per-axis factor request: one factor for each of the three axes.
pub type Request = [Factor; MAX_DIM];

/// Dense row-major matrix of factor values, `rows = query points`,
/// `cols = data coordinates`.
#[derive(Debug, Clone)]
struct AxisMatrix {
    cols: usize,
    data: Vec<f64>,
    /// For each row, the range of columns holding non-zero entries.
    support: Vec<Range<usize>>,
}

impl AxisMatrix {
    fn build(kernel: &GaussianKernel, axis: usize, factor: Factor, query: &[f64], data: &[f64]) -> Self {
        let cols = data.len();
        let mut values = Vec::with_capacity(query.len() * cols);
        let mut support = Vec::with_capacity(query.len());
        for &q in query {
            let start = values.len();
            values.extend(data.iter().map(
                |&v| {
                    if axis < kernel.dim() {
                        factor.eval(kernel, axis, q - v)
                    } else {
                        1.0
                    }
                },
            ));
            let row = &values[start..];
            let lo = row.iter().position(|&x| x != 0.0).unwrap_or(0);
            let hi = row.iter().rposition(|&x| x != 0.0).map_or(lo, |i| i + 1);
            support.push(lo..hi);
        }
        AxisMatrix { cols, data: values, support }
    }

    #[inline]
    fn row(&self, q: usize) -> &[f64] {
        &self.data[q * self.cols..(q + 1) * self.cols]
    }
}

/// Contracts the middle axis of a `[outer, n, inner]` tensor with `m`.
fn contract(a: &[f64], outer: usize, n: usize, inner: usize, m: &AxisMatrix, rows: Range<usize>) -> Vec<f64> {
    debug_assert_eq!(a.len(), outer * n * inner);
    debug_assert_eq!(m.cols, n);
    let qn = rows.len();
    let mut out = vec![0.0; outer * qn * inner];
    for o in 0..outer {
        let src = &a[o * n * inner..(o + 1) * n * inner];
        for (qi, q) in rows.clone().enumerate() {
            let dst = &mut out[(o * qn + qi) * inner..(o * qn + qi + 1) * inner];
            let row = m.row(q);
            if inner == 1 {
                let mut s = 0.0;
                for j in m.support[q].clone() {
                    s += row[j] * src[j];
                }
                dst[0] = s;
            } else {
                for j in m.support[q].clone() {
                    let w = row[j];
                    let s = &src[j * inner..(j + 1) * inner];
                    for (d, x) in dst.iter_mut().zip(s) {
                        *d += w * x;
                    }
                }
            }
        }
    }
    out
}

/// Factor matrices for a fixed kernel, query grid and data box.
#[derive(Debug, Clone)]
pub struct Contractor {
    data_shape: [usize; MAX_DIM],
    query_shape: [usize; MAX_DIM],
    matrices: Vec<(usize, Factor, AxisMatrix)>,
}

/// Trailing-axis contractions of one data array, shared between requests.
#[derive(Debug, Clone)]
pub struct Partials {
    entries: Vec<((Factor, Factor), Vec<f64>)>,
}

impl Contractor {
    /// Prepares the factor matrices needed by `requests`.
    ///
    /// `query[d]` and `data[d]` are the coordinates along axis `d`; unused
    /// axes carry a single coordinate.
    pub fn new(
        kernel: &GaussianKernel,
        query: &[Vec<f64>; MAX_DIM],
        data: &[Vec<f64>; MAX_DIM],
        requests: &[Request],
    ) -> Self {
        let mut matrices: Vec<(usize, Factor, AxisMatrix)> = Vec::new();
        for req in requests {
            for (axis, &f) in req.iter().enumerate() {
                if !matrices.iter().any(|(a, g, _)| *a == axis && *g == f) {
                    matrices.push((axis, f, AxisMatrix::build(kernel, axis, f, &query[axis], &data[axis])));
                }
            }
        }
        Contractor {
            data_shape: [data[0].len(), data[1].len(), data[2].len()],
            query_shape: [query[0].len(), query[1].len(), query[2].len()],
            matrices,
        }
    }

    pub fn query_shape(&self) -> [usize; MAX_DIM] {
        self.query_shape
    }

    fn matrix(&self, axis: usize, f: Factor) -> &AxisMatrix {
        &self.matrices.iter().find(|(a, g, _)| *a == axis && *g == f).expect("factor prepared at construction").2
    }

    /// Contracts axes 2 and 1 of `data` (a dense `[n0, n1, n2]` array).
    pub fn partials(&self, data: &[f64], requests: &[Request]) -> Partials {
        let [n0, n1, n2] = self.data_shape;
        let [_, q1, q2] = self.query_shape;
        debug_assert_eq!(data.len(), n0 * n1 * n2);
        let mut stage2: Vec<(Factor, Vec<f64>)> = Vec::new();
        let mut entries: Vec<((Factor, Factor), Vec<f64>)> = Vec::new();
        for req in requests {
            let key = (req[1], req[2]);
            if entries.iter().any(|(k, _)| *k == key) {
                continue;
            }
            if !stage2.iter().any(|(f, _)| *f == req[2]) {
                let m = self.matrix(2, req[2]);
                stage2.push((req[2], contract(data, n0 * n1, n2, 1, m, 0..q2)));
            }
            let t2 = &stage2.iter().find(|(f, _)| *f == req[2]).unwrap().1;
            let m = self.matrix(1, req[1]);
            let t1 = contract(t2, n0, n1, q2, m, 0..q1);
            entries.push((key, t1));
        }
        Partials { entries }
    }

    /// Completes the contraction along axis 0 for query rows `rows`.
    ///
    /// Each output is laid out `[rows.len(), q1, q2]`.
    pub fn finish(&self, partials: &Partials, requests: &[Request], rows: Range<usize>) -> Vec<Vec<f64>> {
        let [n0, _, _] = self.data_shape;
        let [_, q1, q2] = self.query_shape;
        requests
            .iter()
            .map(|req| {
                let p = &partials
                    .entries
                    .iter()
                    .find(|(k, _)| *k == (req[1], req[2]))
                    .expect("partials computed for every request")
                    .1;
                contract(p, 1, n0, q1 * q2, self.matrix(0, req[0]), rows.clone())
            })
            .collect()
    }
}

/// Multi-index derivative orders: the value, the `D` first derivatives and,
/// for `level >= 2`, the `D(D+1)/2` second derivatives `(d, e)` with `d <= e`.
pub fn jet_orders(dim: usize, level: u8) -> Vec<[u8; MAX_DIM]> {
    let mut out = vec![[0u8; MAX_DIM]];
    if level >= 1 {
        for d in 0..dim {
            let mut o = [0u8; MAX_DIM];
            o[d] = 1;
            out.push(o);
        }
    }
    if level >= 2 {
        for d in 0..dim {
            for e in d..dim {
                let mut o = [0u8; MAX_DIM];
                o[d] += 1;
                o[e] += 1;
                out.push(o);
            }
        }
    }
    out
}

/// Requests for the kernel jets of a single field.
pub fn field_requests(orders: &[[u8; MAX_DIM]]) -> Vec<Request> {
    orders.iter().map(|o| [Factor::Deriv(o[0]), Factor::Deriv(o[1]), Factor::Deriv(o[2])]).collect()
}

/// Requests for all products `K_a K_b` with `a <= b`, packed row by row.
pub fn gram_requests(orders: &[[u8; MAX_DIM]]) -> Vec<Request> {
    let mut out = Vec::new();
    for a in 0..orders.len() {
        for b in a..orders.len() {
            out.push([
                Factor::product(orders[a][0], orders[b][0]),
                Factor::product(orders[a][1], orders[b][1]),
                Factor::product(orders[a][2], orders[b][2]),
            ]);
        }
    }
    out
}

/// Position of pair `(a, b)` in a packed upper triangle of size `n`.
#[inline]
pub fn packed_index(n: usize, a: usize, b: usize) -> usize {
    let (a, b) = if a <= b { (a, b) } else { (b, a) };
    a * n - a * (a + 1) / 2 + b
}
