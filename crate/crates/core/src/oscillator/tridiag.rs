//! Symmetric tridiagonal eigensolvers.
//!
//! - [`SymTridiagonal::eig_full`]: implicit-shift QL with optional
//!   accumulation of the eigenvector transforms.
//! - [`SymTridiagonal::eig_range`] / [`SymTridiagonal::eig_lowest`]: Sturm
//!   sequence bisection for selected eigenvalues, then inverse iteration
//!   with a pivoted tridiagonal LU for the vectors.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::{Error, Result};

/// Off-diagonal deflation threshold relative to `|d_i| + |d_{i+1}|`.
pub const QL_DEFLATE: f64 = 1e-14;
/// QL iterations allowed per eigenvalue before giving up.
pub const QL_MAX_ITER: usize = 60;
/// Bisection stops once the bracket is this narrow relative to its magnitude.
pub const BISECT_REL_WIDTH: f64 = 4.0 * f64::EPSILON;
/// Eigenvalues closer than this fraction of `‖T‖` are reorthogonalized.
const CLUSTER_REL: f64 = 1e-3;
const INVIT_MAX_ITER: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiagonal {
    diag: Vec<f64>,
    off: Vec<f64>,
}

#[derive(Debug, Clone, Default)]
pub struct Eigen {
    /// Ascending.
    pub values: Vec<f64>,
    /// `vectors[k]` belongs to `values[k]`, unit norm.
    pub vectors: Option<Vec<Vec<f64>>>,
}

impl SymTridiagonal {
    /// `off[i]` couples rows `i` and `i+1`.
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Result<Self> {
        if diag.is_empty() {
            return Err(Error::invalid("empty tridiagonal matrix"));
        }
        if off.len() + 1 != diag.len() {
            return Err(Error::invalid(format!(
                "off-diagonal length {} does not match dimension {}",
                off.len(),
                diag.len()
            )));
        }
        if diag.iter().chain(&off).any(|v| !v.is_finite()) {
            return Err(Error::invalid("non-finite matrix entry"));
        }
        Ok(Self { diag, off })
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn off(&self) -> &[f64] {
        &self.off
    }

    /// Gershgorin interval containing the whole spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.dim();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let r = if i > 0 { self.off[i - 1].abs() } else { 0.0 }
                + if i + 1 < n { self.off[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    /// Infinity norm (max absolute row sum).
    pub fn norm_inf(&self) -> f64 {
        let n = self.dim();
        (0..n)
            .map(|i| {
                self.diag[i].abs()
                    + if i > 0 { self.off[i - 1].abs() } else { 0.0 }
                    + if i + 1 < n { self.off[i].abs() } else { 0.0 }
            })
            .fold(0.0, f64::max)
    }

    pub fn matvec(&self, v: &[f64], out: &mut [f64]) {
        let n = self.dim();
        assert!(v.len() == n && out.len() == n);
        for i in 0..n {
            let mut s = self.diag[i] * v[i];
            if i > 0 {
                s += self.off[i - 1] * v[i - 1];
            }
            if i + 1 < n {
                s += self.off[i] * v[i + 1];
            }
            out[i] = s;
        }
    }

    /// `‖T v − λ v‖₂`.
    pub fn residual(&self, lambda: f64, v: &[f64]) -> f64 {
        let mut tv = vec![0.0; v.len()];
        self.matvec(v, &mut tv);
        tv.iter()
            .zip(v)
            .map(|(a, b)| (a - lambda * b).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    fn pivmin(&self) -> f64 {
        let emax = self.off.iter().fold(1.0_f64, |m, e| m.max(e * e));
        f64::MIN_POSITIVE * emax
    }

    /// Number of eigenvalues strictly below `x`.
    pub fn sturm_count(&self, x: f64) -> usize {
        sturm_count_with(&self.diag, &self.off, x, self.pivmin())
    }

    /// All eigenvalues by implicit QL, optionally with eigenvectors.
    pub fn eig_full(&self, vectors: bool) -> Result<Eigen> {
        let n = self.dim();
        let mut d = self.diag.clone();
        let mut e = self.off.clone();
        e.push(0.0);
        // z is row-major; column k is the k-th eigenvector
        let mut z = if vectors {
            let mut z = vec![0.0; n * n];
            for i in 0..n {
                z[i * n + i] = 1.0;
            }
            Some(z)
        } else {
            None
        };

        for l in 0..n {
            let mut iter = 0;
            loop {
                let mut m = l;
                while m + 1 < n {
                    let dd = d[m].abs() + d[m + 1].abs();
                    if e[m].abs() <= QL_DEFLATE * dd {
                        break;
                    }
                    m += 1;
                }
                if m == l {
                    break;
                }
                iter += 1;
                if iter > QL_MAX_ITER {
                    return Err(Error::NoConvergence { iterations: iter });
                }
                let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
                let mut r = g.hypot(1.0);
                g = d[m] - d[l] + e[l] / (g + r.copysign(g));
                let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
                let mut underflow = false;
                let mut i = m;
                while i > l {
                    i -= 1;
                    let f = s * e[i];
                    let b = c * e[i];
                    r = f.hypot(g);
                    e[i + 1] = r;
                    if r == 0.0 {
                        d[i + 1] -= p;
                        e[m] = 0.0;
                        underflow = true;
                        break;
                    }
                    s = f / r;
                    c = g / r;
                    g = d[i + 1] - p;
                    r = (d[i] - g) * s + 2.0 * c * b;
                    p = s * r;
                    d[i + 1] = g + p;
                    g = c * r - b;
                    if let Some(z) = z.as_mut() {
                        for k in 0..n {
                            let row = k * n;
                            let f = z[row + i + 1];
                            z[row + i + 1] = s * z[row + i] + c * f;
                            z[row + i] = c * z[row + i] - s * f;
                        }
                    }
                }
                if underflow {
                    continue;
                }
                d[l] -= p;
                e[l] = g;
                e[m] = 0.0;
            }
        }

        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
        let values = order.iter().map(|&k| d[k]).collect();
        let vectors = z.map(|z| {
            order
                .iter()
                .map(|&k| (0..n).map(|i| z[i * n + k]).collect())
                .collect()
        });
        Ok(Eigen { values, vectors })
    }

    /// The `count` smallest eigenvalues (and vectors).
    pub fn eig_lowest(&self, count: usize, vectors: bool) -> Result<Eigen> {
        self.eig_range(0, count, vectors)
    }

    /// Eigenvalues with ascending indices `first..first+count`.
    pub fn eig_range(&self, first: usize, count: usize, vectors: bool) -> Result<Eigen> {
        let n = self.dim();
        if count == 0 || first + count > n {
            return Err(Error::OutOfRange(format!(
                "requested eigenvalues {first}..{} of a {n}x{n} block",
                first + count
            )));
        }
        let (gl, gu) = self.gershgorin();
        let norm = gl.abs().max(gu.abs());
        let pivmin = self.pivmin();
        let abs_floor = 2.0 * f64::EPSILON * norm;
        // widen slightly so the Gershgorin ends are strict brackets
        let pad = abs_floor.max(f64::MIN_POSITIVE) + 2.0 * pivmin;
        let (lo0, hi0) = (gl - pad, gu + pad);

        let values: Vec<f64> = (first..first + count)
            .into_par_iter()
            .map(|k| {
                let (mut lo, mut hi) = (lo0, hi0);
                loop {
                    let width = hi - lo;
                    let tol = (BISECT_REL_WIDTH * lo.abs().max(hi.abs())).max(abs_floor);
                    if width <= tol {
                        break;
                    }
                    let mid = 0.5 * (lo + hi);
                    if mid <= lo || mid >= hi {
                        break;
                    }
                    if sturm_count_with(&self.diag, &self.off, mid, pivmin) > k {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                0.5 * (lo + hi)
            })
            .collect();

        let vectors = if vectors {
            Some(self.inverse_iteration(&values, first, norm)?)
        } else {
            None
        };
        Ok(Eigen { values, vectors })
    }

    /// Eigenvectors for known eigenvalues by inverse iteration; vectors whose
    /// eigenvalues lie within `CLUSTER_REL·‖T‖` of each other are kept
    /// mutually orthogonal.
    fn inverse_iteration(&self, values: &[f64], seed: usize, norm: f64) -> Result<Vec<Vec<f64>>> {
        let n = self.dim();
        if n == 1 {
            return Ok(vec![vec![1.0]]);
        }
        let scale = norm.max(f64::MIN_POSITIVE);
        let cluster = CLUSTER_REL * scale;
        let accept = 1e-11 * scale;
        let mut out: Vec<Vec<f64>> = Vec::with_capacity(values.len());
        let mut shifts: Vec<f64> = Vec::with_capacity(values.len());
        for (idx, &lambda) in values.iter().enumerate() {
            // separate coincident shifts so each solve sees a distinct matrix
            let mut shift = lambda;
            if let Some(&prev) = shifts.last() {
                let pertol = 10.0 * f64::EPSILON * lambda.abs().max(scale * f64::EPSILON);
                if shift - prev < pertol {
                    shift = prev + pertol;
                }
            }
            shifts.push(shift);
            let lu = TridiagLu::factor(self, shift, f64::EPSILON * scale);
            let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0000 + (seed + idx) as u64);
            let mut x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let neighbors: Vec<usize> = (0..idx)
                .filter(|&j| (values[idx] - values[j]).abs() <= cluster)
                .collect();
            normalize(&mut x);
            let mut converged = false;
            for _ in 0..INVIT_MAX_ITER {
                lu.solve(&mut x);
                for &j in &neighbors {
                    let dot: f64 = x.iter().zip(&out[j]).map(|(a, b)| a * b).sum();
                    x.iter_mut().zip(&out[j]).for_each(|(a, b)| *a -= dot * b);
                }
                if !normalize(&mut x) {
                    return Err(Error::Numerical("inverse iteration produced a zero vector".into()));
                }
                if self.residual(lambda, &x) <= accept {
                    converged = true;
                    break;
                }
            }
            if !converged && self.residual(lambda, &x) > 1e-8 * scale {
                return Err(Error::NoConvergence {
                    iterations: INVIT_MAX_ITER,
                });
            }
            out.push(x);
        }
        Ok(out)
    }
}

fn normalize(x: &mut [f64]) -> bool {
    let nrm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if !(nrm > 0.0 && nrm.is_finite()) {
        return false;
    }
    x.iter_mut().for_each(|v| *v /= nrm);
    true
}

#[inline]
fn sturm_count_with(diag: &[f64], off: &[f64], x: f64, pivmin: f64) -> usize {
    let mut count = 0;
    let mut q = diag[0] - x;
    if q.abs() < pivmin {
        q = -pivmin;
    }
    if q < 0.0 {
        count += 1;
    }
    for i in 1..diag.len() {
        q = (diag[i] - x) - off[i - 1] * off[i - 1] / q;
        if q.abs() < pivmin {
            q = -pivmin;
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// LU factorization of `T − σI` with partial pivoting (two superdiagonals in U).
struct TridiagLu {
    d: Vec<f64>,
    dl: Vec<f64>,
    du: Vec<f64>,
    du2: Vec<f64>,
    swap: Vec<bool>,
}

impl TridiagLu {
    fn factor(t: &SymTridiagonal, shift: f64, tiny: f64) -> Self {
        let n = t.dim();
        let mut d: Vec<f64> = t.diag.iter().map(|v| v - shift).collect();
        let mut dl = t.off.clone();
        let mut du = t.off.clone();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut swap = vec![false; n.saturating_sub(1)];
        for i in 0..n - 1 {
            if d[i].abs() >= dl[i].abs() {
                if d[i] != 0.0 {
                    let fact = dl[i] / d[i];
                    dl[i] = fact;
                    d[i + 1] -= fact * du[i];
                } else {
                    dl[i] = 0.0;
                }
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] *= -fact;
                }
                swap[i] = true;
            }
        }
        let tiny = tiny.max(f64::MIN_POSITIVE);
        for v in d.iter_mut() {
            if v.abs() < tiny {
                *v = if *v < 0.0 { -tiny } else { tiny };
            }
        }
        Self {
            d,
            dl,
            du,
            du2,
            swap,
        }
    }

    fn solve(&self, b: &mut [f64]) {
        let n = self.d.len();
        for i in 0..n - 1 {
            if self.swap[i] {
                let temp = b[i] - self.dl[i] * b[i + 1];
                b[i] = b[i + 1];
                b[i + 1] = temp;
            } else {
                b[i + 1] -= self.dl[i] * b[i];
            }
        }
        b[n - 1] /= self.d[n - 1];
        if n > 1 {
            b[n - 2] = (b[n - 2] - self.du[n - 2] * b[n - 1]) / self.d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - self.du[i] * b[i + 1] - self.du2[i] * b[i + 2]) / self.d[i];
        }
        // keep the iterate bounded when the shift is an exact eigenvalue
        let big = b.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        if big > 1e150 {
            b.iter_mut().for_each(|v| *v /= big);
        }
    }
}
