//! The finite oscillator Hamiltonian `H = (K/2)(Lx² + κ²Ly²)` and its spectrum.
//!
//! In the `Lz` basis `H` is pentadiagonal with nonzero entries only on the
//! main diagonal and at distance 2, so it splits into two independent
//! symmetric tridiagonal blocks: `m ≡ l (mod 2)` and `m ≡ l+1 (mod 2)`.
//! Band entries come from closed-form matrix elements; memory is `O(N)`.

mod tridiag;

use nalgebra::DMatrix;
use serde::Serialize;

pub use tridiag::{Eigen, SymTridiagonal, BISECT_REL_WIDTH, QL_DEFLATE, QL_MAX_ITER};

use crate::su2rep::{RepData, MAX_L};
use crate::{Error, Result};

/// Largest dimension for which [`BandedHamiltonian::to_dense`] is allowed.
pub const DENSE_THRESHOLD: usize = 4097;

/// Most eigenvectors a single spectrum request may return.
pub const MAX_VECTORS: usize = 64;

/// Default degeneracy grouping tolerance, relative to `(K/2)(1+κ²)·l(l+1)`.
pub const GROUP_REL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn of(m: i64) -> Self {
        if m.rem_euclid(2) == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Parity::Even => "even",
            Parity::Odd => "odd",
        }
    }
}

#[derive(Debug, Clone)]
pub struct BandedHamiltonian {
    l: u64,
    n: usize,
    k_energy: f64,
    kappa: f64,
    /// `diag[j] = (K/4)(1+κ²)(l(l+1) − m²)`, `m = l − j`.
    pub diag: Vec<f64>,
    /// `offdiag2[j]` couples `j ↔ j+2` (`m ↔ m−2`).
    pub offdiag2: Vec<f64>,
    /// Basis indices with even `m`.
    pub parity_even: Vec<usize>,
    /// Basis indices with odd `m`.
    pub parity_odd: Vec<usize>,
}

/// Closed-form `⟨m−2| H |m⟩`.
fn coupling(l: u64, m: i64, k_energy: f64, kappa: f64) -> f64 {
    let l = l as i64;
    // (l(l+1) − m(m−1))(l(l+1) − (m−1)(m−2)) = (l+m)(l−m+1)(l+m−1)(l−m+2)
    let a = ((l + m) * (l - m + 1)) as f64;
    let b = ((l + m - 1) * (l - m + 2)) as f64;
    0.125 * k_energy * (1.0 - kappa * kappa) * (a * b).sqrt()
}

/// Assembles `H` for the irrep `rep`.
pub fn build_hamiltonian(rep: &RepData, k_energy: f64, kappa: f64) -> Result<BandedHamiltonian> {
    BandedHamiltonian::new(rep.l(), k_energy, kappa)
}

impl BandedHamiltonian {
    /// Band form of `H` without constructing the generators.
    pub fn new(l: u64, k_energy: f64, kappa: f64) -> Result<Self> {
        if l == 0 || l > MAX_L {
            return Err(Error::invalid(format!("l must be in 1..={MAX_L}, got {l}")));
        }
        if !(k_energy > 0.0 && k_energy.is_finite()) {
            return Err(Error::invalid(format!("K must be finite and > 0, got {k_energy}")));
        }
        if !(kappa >= 0.0 && kappa.is_finite()) {
            return Err(Error::invalid(format!("kappa must be finite and >= 0, got {kappa}")));
        }
        let n = (2 * l + 1) as usize;
        let li = l as i64;
        let ll = (l * (l + 1)) as f64;
        let dscale = 0.25 * k_energy * (1.0 + kappa * kappa);
        let diag = (0..n)
            .map(|j| {
                let m = li - j as i64;
                dscale * (ll - (m * m) as f64)
            })
            .collect();
        let offdiag2 = if kappa == 1.0 {
            vec![0.0; n - 2]
        } else {
            (0..n - 2)
                .map(|j| coupling(l, li - j as i64, k_energy, kappa))
                .collect()
        };
        let (parity_even, parity_odd) = (0..n).partition(|&j| Parity::of(li - j as i64) == Parity::Even);
        Ok(Self {
            l,
            n,
            k_energy,
            kappa,
            diag,
            offdiag2,
            parity_even,
            parity_odd,
        })
    }

    pub fn l(&self) -> u64 {
        self.l
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn k_energy(&self) -> f64 {
        self.k_energy
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// Coarse spectral bound `(K/2)(1+κ²)·l(l+1)` from the operator norms.
    pub fn upper_bound(&self) -> f64 {
        0.5 * self.k_energy * (1.0 + self.kappa * self.kappa) * (self.l * (self.l + 1)) as f64
    }

    /// `out = H·v`.
    pub fn apply(&self, v: &[f64], out: &mut [f64]) {
        let n = self.n;
        assert!(v.len() == n && out.len() == n);
        for j in 0..n {
            let mut s = self.diag[j] * v[j];
            if j >= 2 {
                s += self.offdiag2[j - 2] * v[j - 2];
            }
            if j + 2 < n {
                s += self.offdiag2[j] * v[j + 2];
            }
            out[j] = s;
        }
    }

    /// `⟨v|H|v⟩`.
    pub fn expectation(&self, v: &[f64]) -> f64 {
        let mut hv = vec![0.0; self.n];
        self.apply(v, &mut hv);
        hv.iter().zip(v).map(|(a, b)| a * b).sum()
    }

    /// `‖Hv − Ev‖₂`.
    pub fn residual(&self, energy: f64, v: &[f64]) -> f64 {
        let mut hv = vec![0.0; self.n];
        self.apply(v, &mut hv);
        hv.iter()
            .zip(v)
            .map(|(a, b)| (a - energy * b).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// Infinity norm of the band matrix.
    pub fn norm_inf(&self) -> f64 {
        let n = self.n;
        (0..n)
            .map(|j| {
                self.diag[j].abs()
                    + if j >= 2 { self.offdiag2[j - 2].abs() } else { 0.0 }
                    + if j + 2 < n { self.offdiag2[j].abs() } else { 0.0 }
            })
            .fold(0.0, f64::max)
    }

    pub fn to_dense(&self) -> Result<DMatrix<f64>> {
        if self.n > DENSE_THRESHOLD {
            return Err(Error::invalid(format!(
                "refusing to materialize a dense {0}x{0} Hamiltonian",
                self.n
            )));
        }
        let mut h = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&self.diag));
        for (j, &v) in self.offdiag2.iter().enumerate() {
            h[(j, j + 2)] = v;
            h[(j + 2, j)] = v;
        }
        Ok(h)
    }
}

#[derive(Debug, Clone)]
pub struct ParityBlock {
    pub parity: Parity,
    /// `index[k]` is the basis index of block row `k`.
    pub index: Vec<usize>,
    pub matrix: SymTridiagonal,
}

#[derive(Debug, Clone)]
pub struct ParityBlocks {
    pub even: ParityBlock,
    /// Empty only for `l = 0`, which is never built.
    pub odd: ParityBlock,
}

impl ParityBlocks {
    pub fn iter(&self) -> impl Iterator<Item = &ParityBlock> {
        [&self.even, &self.odd].into_iter()
    }
}

/// Splits `H` into its even-`m` and odd-`m` tridiagonal chains.
pub fn parity_blocks(h: &BandedHamiltonian) -> Result<ParityBlocks> {
    let make = |parity: Parity, index: &[usize]| -> Result<ParityBlock> {
        let diag = index.iter().map(|&j| h.diag[j]).collect();
        let off = index.windows(2).map(|w| h.offdiag2[w[0]]).collect();
        Ok(ParityBlock {
            parity,
            index: index.to_vec(),
            matrix: SymTridiagonal::new(diag, off)?,
        })
    };
    Ok(ParityBlocks {
        even: make(Parity::Even, &h.parity_even)?,
        odd: make(Parity::Odd, &h.parity_odd)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DegeneracyGroup {
    /// Lowest eigenvalue in the group.
    pub value: f64,
    pub multiplicity: usize,
    /// Position of `value` in the sorted eigenvalue list.
    pub first_index: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct EigenState {
    /// Position in the sorted eigenvalue list.
    pub index: usize,
    pub energy: f64,
    pub parity: Parity,
    /// Components in the `Lz` basis (`m = l` first), unit norm.
    pub components: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumResult {
    pub l: u64,
    pub k_energy: f64,
    pub kappa: f64,
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    pub parities: Vec<Parity>,
    pub groups: Vec<DegeneracyGroup>,
    /// `group_of[k]` indexes `groups` for eigenvalue `k`.
    pub group_of: Vec<usize>,
    pub group_tol: f64,
    pub vectors: Vec<EigenState>,
    /// True when every eigenvalue of `H` was computed.
    pub complete: bool,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SpectrumOptions {
    /// Only the lowest `n` eigenvalues (bisection); `None` for the full spectrum (QL).
    pub lowest: Option<usize>,
    /// Eigenvectors for this many of the lowest states (≤ [`MAX_VECTORS`]).
    pub vectors: usize,
    /// Absolute degeneracy grouping tolerance; defaults to
    /// `GROUP_REL_TOL · (K/2)(1+κ²)·l(l+1)`.
    pub group_tol: Option<f64>,
}

/// Groups consecutive sorted values whose gap is at most `tol`.
pub fn group_degeneracies(sorted: &[f64], tol: f64) -> (Vec<DegeneracyGroup>, Vec<usize>) {
    let mut groups: Vec<DegeneracyGroup> = Vec::new();
    let mut group_of = Vec::with_capacity(sorted.len());
    for (k, &v) in sorted.iter().enumerate() {
        match groups.last_mut() {
            Some(g) if v - sorted[k - 1] <= tol => g.multiplicity += 1,
            _ => groups.push(DegeneracyGroup {
                value: v,
                multiplicity: 1,
                first_index: k,
            }),
        }
        group_of.push(groups.len() - 1);
    }
    (groups, group_of)
}

/// Full or partial spectrum of `H`, merged over both parity blocks.
pub fn spectrum(h: &BandedHamiltonian, opts: SpectrumOptions) -> Result<SpectrumResult> {
    if opts.vectors > MAX_VECTORS {
        return Err(Error::OutOfRange(format!(
            "at most {MAX_VECTORS} eigenvectors per request, got {}",
            opts.vectors
        )));
    }
    if opts.vectors > h.n {
        return Err(Error::OutOfRange(format!(
            "{} eigenvectors requested from a {}-dimensional space",
            opts.vectors, h.n
        )));
    }
    if let Some(k) = opts.lowest {
        if k == 0 || k > h.n {
            return Err(Error::OutOfRange(format!(
                "lowest = {k} outside 1..={}",
                h.n
            )));
        }
        if opts.vectors > k {
            return Err(Error::OutOfRange(format!(
                "{} eigenvectors requested but only the lowest {k} eigenvalues",
                opts.vectors
            )));
        }
    }
    let blocks = parity_blocks(h)?;

    let solve = |block: &ParityBlock| -> Result<(Eigen, Eigen)> {
        let size = block.matrix.dim();
        if size == 0 {
            return Ok((Eigen::default(), Eigen::default()));
        }
        let values = match opts.lowest {
            Some(k) => block.matrix.eig_lowest(k.min(size), false)?,
            None => block.matrix.eig_full(false)?,
        };
        let vecs = if opts.vectors > 0 {
            block.matrix.eig_lowest(opts.vectors.min(size), true)?
        } else {
            Eigen::default()
        };
        Ok((values, vecs))
    };
    let (even, odd) = rayon::join(|| solve(&blocks.even), || solve(&blocks.odd));
    let (even, odd) = (even?, odd?);

    let mut merged: Vec<(f64, Parity)> = even
        .0
        .values
        .iter()
        .map(|&v| (v, Parity::Even))
        .chain(odd.0.values.iter().map(|&v| (v, Parity::Odd)))
        .collect();
    merged.sort_by(|a, b| a.0.total_cmp(&b.0));
    if let Some(k) = opts.lowest {
        merged.truncate(k);
    }
    let eigenvalues: Vec<f64> = merged.iter().map(|p| p.0).collect();
    let parities: Vec<Parity> = merged.iter().map(|p| p.1).collect();

    let group_tol = opts.group_tol.unwrap_or(GROUP_REL_TOL * h.upper_bound());
    let (groups, group_of) = group_degeneracies(&eigenvalues, group_tol);

    // the k-th vector of a block belongs to the k-th merged entry of that parity
    let mut vectors = Vec::with_capacity(opts.vectors);
    for (block, (_, vecs)) in [(&blocks.even, &even), (&blocks.odd, &odd)] {
        let Some(vs) = &vecs.vectors else { continue };
        let slots = (0..opts.vectors.min(eigenvalues.len())).filter(|&k| parities[k] == block.parity);
        for ((index, &e), v) in slots.zip(&vecs.values).zip(vs) {
            let mut full = vec![0.0; h.n];
            for (k, &j) in block.index.iter().enumerate() {
                full[j] = v[k];
            }
            vectors.push(EigenState {
                index,
                energy: e,
                parity: block.parity,
                components: full,
            });
        }
    }
    vectors.sort_by_key(|s| s.index);

    Ok(SpectrumResult {
        l: h.l,
        k_energy: h.k_energy,
        kappa: h.kappa,
        complete: eigenvalues.len() == h.n,
        eigenvalues,
        parities,
        groups,
        group_of,
        group_tol,
        vectors,
    })
}

impl SpectrumResult {
    pub fn ground_energy(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn max_energy(&self) -> Option<f64> {
        self.complete.then(|| *self.eigenvalues.last().expect("nonempty"))
    }

    /// Lowest value of each degeneracy group, ascending.
    pub fn levels(&self) -> Vec<f64> {
        self.groups.iter().map(|g| g.value).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::su2rep::build_generators;
    use approx::assert_relative_eq;
    use nalgebra::SymmetricEigen;

    /// `(K/2)(Sx² + κ²AᵀA)` from dense generator products.
    fn dense_oracle(l: u64, k: f64, kappa: f64) -> DMatrix<f64> {
        let rep = build_generators(l).unwrap();
        let s = rep.dense_sx().unwrap();
        let a = rep.dense_ay().unwrap();
        (&s * &s + a.transpose() * &a * (kappa * kappa)) * (0.5 * k)
    }

    fn sorted_eigs(m: DMatrix<f64>) -> Vec<f64> {
        let mut v: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
        v.sort_by(f64::total_cmp);
        v
    }

    #[test]
    fn spin_one_soft_limit() {
        let h = BandedHamiltonian::new(1, 1.0, 0.0).unwrap();
        assert_eq!(h.diag, vec![0.25, 0.5, 0.25]);
        assert_eq!(h.offdiag2.len(), 1);
        assert_relative_eq!(h.offdiag2[0], 0.25, max_relative = 1e-15);
        let s = spectrum(&h, SpectrumOptions::default()).unwrap();
        let expect = [0.0, 0.5, 0.5];
        for (a, b) in s.eigenvalues.iter().zip(expect) {
            assert!((a - b).abs() < 1e-15);
        }
        let oracle = sorted_eigs(dense_oracle(1, 1.0, 0.0));
        for (a, b) in s.eigenvalues.iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn medium_l2_is_diagonal() {
        let h = BandedHamiltonian::new(2, 1.0, 1.0).unwrap();
        assert_eq!(h.diag, vec![1.0, 2.5, 3.0, 2.5, 1.0]);
        assert!(h.offdiag2.iter().all(|v| *v == 0.0));
        let s = spectrum(&h, SpectrumOptions::default()).unwrap();
        assert_eq!(s.eigenvalues, vec![1.0, 1.0, 2.5, 2.5, 3.0]);
        let groups: Vec<(f64, usize)> = s.groups.iter().map(|g| (g.value, g.multiplicity)).collect();
        assert_eq!(groups, vec![(1.0, 2), (2.5, 2), (3.0, 1)]);
        assert_eq!(s.max_energy(), Some(3.0));
    }

    #[test]
    fn band_entries_match_dense_products() {
        for l in [1u64, 2, 5, 12] {
            for kappa in [0.0, 0.3, 1.0, 2.5] {
                let h = BandedHamiltonian::new(l, 1.7, kappa).unwrap();
                let dense = dense_oracle(l, 1.7, kappa);
                let diff = (h.to_dense().unwrap() - &dense).amax();
                assert!(diff <= 1e-12 * dense.amax(), "l={l} κ={kappa}: {diff}");
            }
        }
    }

    #[test]
    fn closed_form_diagonal() {
        let (l, k, kappa) = (9u64, 2.0, 0.7);
        let h = BandedHamiltonian::new(l, k, kappa).unwrap();
        for j in 0..h.dim() {
            let m = l as f64 - j as f64;
            let expect = k / 4.0 * (1.0 + kappa * kappa) * ((l * (l + 1)) as f64 - m * m);
            assert_relative_eq!(h.diag[j], expect, max_relative = 1e-15);
        }
    }

    #[test]
    fn parity_block_sizes() {
        let h = BandedHamiltonian::new(2, 1.0, 0.5).unwrap();
        let b = parity_blocks(&h).unwrap();
        assert_eq!(b.even.index, vec![0, 2, 4]); // m = 2, 0, −2
        assert_eq!(b.odd.index, vec![1, 3]); // m = 1, −1
        let b1 = parity_blocks(&BandedHamiltonian::new(2, 1.0, 1.0).unwrap()).unwrap();
        assert!(b1.iter().all(|blk| blk.matrix.off().iter().all(|v| *v == 0.0)));
        // odd l: m = l is odd
        let b3 = parity_blocks(&BandedHamiltonian::new(3, 1.0, 0.5).unwrap()).unwrap();
        assert_eq!(b3.odd.index, vec![0, 2, 4, 6]);
    }

    #[test]
    fn block_union_equals_dense() {
        for (l, kappa) in [(3u64, 0.2), (6, 0.5), (7, 3.0), (10, 0.0)] {
            let h = BandedHamiltonian::new(l, 1.0, kappa).unwrap();
            let b = parity_blocks(&h).unwrap();
            let mut union: Vec<f64> = b
                .iter()
                .flat_map(|blk| blk.matrix.eig_full(false).unwrap().values)
                .collect();
            union.sort_by(f64::total_cmp);
            let dense = sorted_eigs(h.to_dense().unwrap());
            let scale = h.upper_bound();
            for (a, e) in union.iter().zip(&dense) {
                assert!((a - e).abs() <= 1e-10 * scale);
            }
        }
    }

    #[test]
    fn blocks_match_textbook_solver_at_l6() {
        let h = BandedHamiltonian::new(6, 1.0, 0.5).unwrap();
        let s = spectrum(&h, SpectrumOptions::default()).unwrap();
        let dense = sorted_eigs(dense_oracle(6, 1.0, 0.5));
        for (a, e) in s.eigenvalues.iter().zip(&dense) {
            assert!((a - e).abs() <= 1e-10 * e.abs().max(1.0));
        }
    }

    #[test]
    fn lowest_matches_full() {
        let h = BandedHamiltonian::new(20, 1.0, 0.4).unwrap();
        let full = spectrum(&h, SpectrumOptions::default()).unwrap();
        let low = spectrum(
            &h,
            SpectrumOptions {
                lowest: Some(h.dim()),
                ..Default::default()
            },
        )
        .unwrap();
        let scale = h.upper_bound();
        for (a, b) in full.eigenvalues.iter().zip(&low.eigenvalues) {
            assert!((a - b).abs() <= 1e-10 * scale);
        }
        let part = spectrum(
            &h,
            SpectrumOptions {
                lowest: Some(7),
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(part.eigenvalues.len(), 7);
        assert!(!part.complete);
        assert_eq!(part.max_energy(), None);
    }

    #[test]
    fn medium_large_l_lowest_doublets() {
        let l = 1000u64;
        let h = BandedHamiltonian::new(l, 1.0, 1.0).unwrap();
        let s = spectrum(
            &h,
            SpectrumOptions {
                lowest: Some(4),
                ..Default::default()
            },
        )
        .unwrap();
        let lf = l as f64;
        let e = |m: f64| 0.5 * (lf * (lf + 1.0) - m * m);
        let expect = [e(lf), e(lf), e(lf - 1.0), e(lf - 1.0)];
        for (a, b) in s.eigenvalues.iter().zip(expect) {
            assert_relative_eq!(*a, b, max_relative = 1e-12);
        }
        assert_relative_eq!(s.eigenvalues[0], lf / 2.0, max_relative = 1e-12);
    }

    #[test]
    fn vectors_have_small_residuals() {
        for kappa in [0.0, 0.3, 1.0, 1.3, 4.0] {
            let h = BandedHamiltonian::new(30, 1.0, kappa).unwrap();
            let s = spectrum(
                &h,
                SpectrumOptions {
                    vectors: 6,
                    ..Default::default()
                },
            )
            .unwrap();
            assert_eq!(s.vectors.len(), 6);
            let hn = h.norm_inf();
            for st in &s.vectors {
                let nrm: f64 = st.components.iter().map(|v| v * v).sum::<f64>().sqrt();
                assert_relative_eq!(nrm, 1.0, max_relative = 1e-12);
                assert!(h.residual(st.energy, &st.components) <= 1e-8 * hn);
                assert!((st.energy - s.eigenvalues[st.index]).abs() <= 1e-9 * hn);
                assert_eq!(st.parity, s.parities[st.index]);
            }
            let idx: Vec<usize> = s.vectors.iter().map(|v| v.index).collect();
            assert_eq!(idx, (0..6).collect::<Vec<_>>(), "kappa {kappa} {:?} {:?}", &s.eigenvalues[..8], s.parities);
        }
    }

    #[test]
    fn spectrum_bounds_and_count() {
        for (l, kappa) in [(5u64, 0.0), (8, 0.7), (11, 5.0)] {
            let h = BandedHamiltonian::new(l, 2.0, kappa).unwrap();
            let s = spectrum(&h, SpectrumOptions::default()).unwrap();
            assert_eq!(s.eigenvalues.len(), h.dim());
            let tol = 1e-12 * h.upper_bound();
            assert!(s.eigenvalues.iter().all(|&e| e >= -tol && e <= h.upper_bound() + tol));
        }
    }

    #[test]
    fn bad_inputs_rejected() {
        assert!(BandedHamiltonian::new(3, 0.0, 1.0).is_err());
        assert!(BandedHamiltonian::new(3, -1.0, 1.0).is_err());
        assert!(BandedHamiltonian::new(3, 1.0, -0.1).is_err());
        assert!(BandedHamiltonian::new(0, 1.0, 1.0).is_err());
        let h = BandedHamiltonian::new(3, 1.0, 0.5).unwrap();
        let too_many = SpectrumOptions {
            vectors: MAX_VECTORS + 1,
            ..Default::default()
        };
        assert!(spectrum(&h, too_many).is_err());
        let zero = SpectrumOptions {
            lowest: Some(0),
            ..Default::default()
        };
        assert!(spectrum(&h, zero).is_err());
        let big = BandedHamiltonian::new(5000, 1.0, 0.5).unwrap();
        assert!(big.to_dense().is_err());
    }

    #[test]
    fn grouping() {
        let (g, of) = group_degeneracies(&[1.0, 1.0 + 1e-12, 2.0, 3.0, 3.0], 1e-9);
        assert_eq!(g.len(), 3);
        assert_eq!(g[0].multiplicity, 2);
        assert_eq!(g[2].first_index, 3);
        assert_eq!(of, vec![0, 0, 1, 2, 2]);
    }
}
