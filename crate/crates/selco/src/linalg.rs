//! Banded symmetric storage, Cholesky factorization with pinned rows, and
//! small dense helpers shared by the condensation and eigen layers.
//!
//! Stiffness matrices of regular quad grids have a small, known bandwidth
//! once the degrees of freedom are numbered along the shorter grid axis.
//! A banded Cholesky factorization is then cheap enough to refactor in every
//! Newton iteration, and a failed pivot doubles as the non-positive-definite
//! detector that triggers increment subdivision.

use nalgebra::{DMatrix, DVector};
use std::sync::Arc;

use crate::error::{Error, Result};

/// Maps external (free-DoF) indices to an internal band-friendly ordering.
#[derive(Debug, Clone)]
pub struct DofOrdering {
    /// external index -> band row
    pub to_band: Vec<usize>,
    /// band row -> external index
    pub from_band: Vec<usize>,
}

impl DofOrdering {
    pub fn identity(n: usize) -> Self {
        DofOrdering {
            to_band: (0..n).collect(),
            from_band: (0..n).collect(),
        }
    }

    pub fn from_ranks(ranks: &[usize]) -> Self {
        let n = ranks.len();
        let mut idx: Vec<usize> = (0..n).collect();
        idx.sort_by_key(|&i| ranks[i]);
        let mut to_band = vec![0usize; n];
        for (row, &ext) in idx.iter().enumerate() {
            to_band[ext] = row;
        }
        DofOrdering {
            to_band,
            from_band: idx,
        }
    }

    pub fn len(&self) -> usize {
        self.to_band.len()
    }

    pub fn is_empty(&self) -> bool {
        self.to_band.is_empty()
    }
}

/// Lower-band row-major storage: row `i` holds columns `i-band ..= i`.
#[derive(Debug, Clone)]
struct BandStorage {
    n: usize,
    band: usize,
    data: Vec<f64>,
}

impl BandStorage {
    fn new(n: usize, band: usize) -> Self {
        BandStorage {
            n,
            band,
            data: vec![0.0; n * (band + 1)],
        }
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> usize {
        debug_assert!(j <= i && i - j <= self.band);
        i * (self.band + 1) + (self.band - (i - j))
    }

    #[inline]
    fn get(&self, i: usize, j: usize) -> f64 {
        let (r, c) = if i >= j { (i, j) } else { (j, i) };
        if r - c > self.band {
            0.0
        } else {
            self.data[self.slot(r, c)]
        }
    }

    #[inline]
    fn add(&mut self, i: usize, j: usize, v: f64) {
        let (r, c) = if i >= j { (i, j) } else { (j, i) };
        let s = self.slot(r, c);
        self.data[s] += v;
    }

    #[inline]
    fn set(&mut self, i: usize, j: usize, v: f64) {
        let (r, c) = if i >= j { (i, j) } else { (j, i) };
        let s = self.slot(r, c);
        self.data[s] = v;
    }
}

/// Symmetric matrix over free DoFs, stored banded under an internal ordering.
///
/// All public indices are external (free-DoF) indices; the ordering is applied
/// on entry. Entries outside the band are structurally zero.
#[derive(Debug, Clone)]
pub struct SystemMatrix {
    storage: BandStorage,
    order: Arc<DofOrdering>,
}

impl SystemMatrix {
    pub fn new(order: Arc<DofOrdering>, band: usize) -> Self {
        let n = order.len();
        SystemMatrix {
            storage: BandStorage::new(n, band),
            order,
        }
    }

    /// Identity-ordered matrix, mainly for tests and small hand-built systems.
    pub fn dense_ordered(n: usize) -> Self {
        Self::new(Arc::new(DofOrdering::identity(n)), n.saturating_sub(1))
    }

    pub fn n(&self) -> usize {
        self.storage.n
    }

    pub fn band(&self) -> usize {
        self.storage.band
    }

    pub fn order(&self) -> &Arc<DofOrdering> {
        &self.order
    }

    pub fn reset(&mut self) {
        self.storage.data.fill(0.0);
    }

    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let bi = self.order.to_band[i];
        let bj = self.order.to_band[j];
        self.storage.add(bi, bj, v);
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let bi = self.order.to_band[i];
        let bj = self.order.to_band[j];
        self.storage.get(bi, bj)
    }

    /// y = A x (external ordering).
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.storage.n;
        let band = self.storage.band;
        let mut yb = vec![0.0; n];
        let mut xb = vec![0.0; n];
        for e in 0..n {
            xb[self.order.to_band[e]] = x[e];
        }
        for i in 0..n {
            let j0 = i.saturating_sub(band);
            for j in j0..=i {
                let v = self.storage.data[self.storage.slot(i, j)];
                if v != 0.0 {
                    yb[i] += v * xb[j];
                    if i != j {
                        yb[j] += v * xb[i];
                    }
                }
            }
        }
        let mut y = vec![0.0; n];
        for b in 0..n {
            y[self.order.from_band[b]] = yb[b];
        }
        y
    }

    /// x' A x without forming intermediates.
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        self.mul_vec(x).iter().zip(x).map(|(a, b)| a * b).sum()
    }

    /// Cholesky factorization with `pinned` rows replaced by identity.
    ///
    /// Pinned rows and columns are detached from the rest of the system; the
    /// factor solves `A* y = b` where `A*` equals `A` with pinned rows/columns
    /// set to the identity. A non-positive pivot reports the external index.
    pub fn factor(&self, pinned: &[bool]) -> Result<FactoredMatrix> {
        let n = self.storage.n;
        let band = self.storage.band;
        assert_eq!(pinned.len(), n);

        let mut work = self.storage.clone();
        let mut pinned_band = vec![false; n];
        for e in 0..n {
            pinned_band[self.order.to_band[e]] = pinned[e];
        }
        // Detach pinned rows/columns.
        for i in 0..n {
            let j0 = i.saturating_sub(band);
            for j in j0..=i {
                if pinned_band[i] || pinned_band[j] {
                    work.set(i, j, if i == j { 1.0 } else { 0.0 });
                }
            }
        }

        // In-place banded LL^T.
        for i in 0..n {
            let j0 = i.saturating_sub(band);
            for j in j0..=i {
                let mut sum = work.data[work.slot(i, j)];
                let k0 = j0.max(j.saturating_sub(band));
                for k in k0..j {
                    sum -= work.data[work.slot(i, k)] * work.data[work.slot(j, k)];
                }
                if j < i {
                    let s = work.slot(i, j);
                    work.data[s] = sum / work.data[work.slot(j, j)];
                } else {
                    if sum <= 0.0 {
                        return Err(Error::NotPositiveDefinite {
                            index: self.order.from_band[i],
                            pivot: sum,
                        });
                    }
                    let s = work.slot(i, i);
                    work.data[s] = sum.sqrt();
                }
            }
        }

        Ok(FactoredMatrix {
            storage: work,
            order: Arc::clone(&self.order),
        })
    }
}

/// Banded Cholesky factor; solves in external ordering.
#[derive(Debug, Clone)]
pub struct FactoredMatrix {
    storage: BandStorage,
    order: Arc<DofOrdering>,
}

impl FactoredMatrix {
    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.storage.n;
        let band = self.storage.band;
        let mut y = vec![0.0; n];
        for e in 0..n {
            y[self.order.to_band[e]] = rhs[e];
        }
        // Forward: L z = b
        for i in 0..n {
            let j0 = i.saturating_sub(band);
            let mut sum = y[i];
            for j in j0..i {
                sum -= self.storage.data[self.storage.slot(i, j)] * y[j];
            }
            y[i] = sum / self.storage.data[self.storage.slot(i, i)];
        }
        // Backward: L^T x = z
        for i in (0..n).rev() {
            let mut sum = y[i];
            let i1 = (i + band + 1).min(n);
            for k in (i + 1)..i1 {
                sum -= self.storage.data[self.storage.slot(k, i)] * y[k];
            }
            y[i] = sum / self.storage.data[self.storage.slot(i, i)];
        }
        let mut x = vec![0.0; n];
        for b in 0..n {
            x[self.order.from_band[b]] = y[b];
        }
        x
    }
}

/// Flips `v` so its largest-magnitude component (lowest index on ties)
/// is positive. Gives eigenvectors and base vectors a reproducible sign.
pub fn fix_sign(v: &mut DVector<f64>) {
    let mut idx = 0;
    let mut best = 0.0;
    for (i, &x) in v.iter().enumerate() {
        if x.abs() > best {
            best = x.abs();
            idx = i;
        }
    }
    if v[idx] < 0.0 {
        v.neg_mut();
    }
}

/// Full symmetric eigen-decomposition, eigenvalues ascending, deterministic
/// eigenvector signs.
pub fn symmetric_eigen_sorted(m: &DMatrix<f64>) -> (Vec<f64>, Vec<DVector<f64>>) {
    let sym = (m + m.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let q = m.nrows();
    let mut order: Vec<usize> = (0..q).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
    let mut values = Vec::with_capacity(q);
    let mut vectors = Vec::with_capacity(q);
    for &k in &order {
        values.push(eig.eigenvalues[k]);
        let mut v: DVector<f64> = eig.eigenvectors.column(k).into_owned();
        fix_sign(&mut v);
        vectors.push(v);
    }
    (values, vectors)
}

/// Orthonormal (Euclidean) basis of the common null space of `rows`.
///
/// Returns `None` when the rows are rank-deficient, i.e. the null space is
/// larger than `dim - rows.len()`.
pub fn orthonormal_nullspace(rows: &[DVector<f64>], dim: usize) -> Option<Vec<DVector<f64>>> {
    let k = rows.len();
    assert!(k > 0 && k < dim);
    let mut c = DMatrix::<f64>::zeros(k, dim);
    for (i, r) in rows.iter().enumerate() {
        c.row_mut(i).copy_from(&r.transpose());
    }
    let svd = c.svd(false, true);
    let v_t = svd.v_t.as_ref().expect("requested V^T");
    let smax = svd.singular_values.iter().cloned().fold(0.0_f64, f64::max);
    let tol = smax.max(1.0) * 1e-12 * (dim as f64);
    let rank = svd.singular_values.iter().filter(|&&s| s > tol).count();
    if rank < k {
        return None;
    }
    // Rows rank..dim of V^T span the null space and are orthonormal.
    let mut basis = Vec::with_capacity(dim - rank);
    for r in rank..v_t.nrows() {
        basis.push(v_t.row(r).transpose().into_owned());
    }
    if basis.len() != dim - k {
        return None;
    }
    Some(basis)
}
