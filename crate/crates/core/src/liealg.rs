//! Finite-dimensional Lie brackets given by structure constants.
//!
//! A bracket on an `n`-dimensional space is stored as the rank-3 array
//! `c[i][j][k]`, the coefficient of `e_k` in `[e_i, e_j]`. On top of that
//! this module provides the Jacobi defect, the Killing form, a
//! Cartan-criterion verdict (semisimple vs. compound) and the one-parameter
//! family that deforms the Heisenberg algebra h(1) into so(3), together with
//! its contraction back to h(1).

use std::path::Path;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Relative singular-value threshold below which the Killing form is rank deficient.
pub const RANK_TOL: f64 = 1e-10;

/// Jacobi defect accepted by [`killing_form`], relative to `max|c|²`.
pub const JACOBI_REL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct StructureConstants {
    dim: usize,
    c: Vec<f64>,
}

impl StructureConstants {
    pub fn zeros(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidStructure("dimension must be positive".into()));
        }
        Ok(Self {
            dim,
            c: vec![0.0; dim * dim * dim],
        })
    }

    /// Builds constants from `(i, j, k, value)` triples meaning
    /// `c[i][j][k] = value`. The antisymmetric partner `c[j][i][k]` is filled
    /// in automatically; an entry that contradicts an earlier one is an error.
    pub fn from_entries(dim: usize, entries: &[(usize, usize, usize, f64)]) -> Result<Self> {
        let mut sc = Self::zeros(dim)?;
        let mut seen = vec![false; dim * dim * dim];
        for &(i, j, k, v) in entries {
            if i >= dim || j >= dim || k >= dim {
                return Err(Error::InvalidStructure(format!(
                    "index ({i}, {j}, {k}) out of range for dimension {dim}"
                )));
            }
            if !v.is_finite() {
                return Err(Error::InvalidStructure(format!(
                    "non-finite value at ({i}, {j}, {k})"
                )));
            }
            if i == j {
                if v != 0.0 {
                    return Err(Error::InvalidStructure(format!(
                        "[e{i}, e{i}] must vanish, got coefficient {v} on e{k}"
                    )));
                }
                continue;
            }
            let a = sc.idx(i, j, k);
            let b = sc.idx(j, i, k);
            if seen[a] && sc.c[a] != v {
                return Err(Error::InvalidStructure(format!(
                    "conflicting values for c[{i}][{j}][{k}]: {} vs {v}",
                    sc.c[a]
                )));
            }
            seen[a] = true;
            seen[b] = true;
            sc.c[a] = v;
            sc.c[b] = -v;
        }
        Ok(sc)
    }

    /// Totally antisymmetric `ε_ijk`, the structure constants of so(3).
    pub fn so3() -> Self {
        Self::from_entries(3, &[(0, 1, 2, 1.0), (1, 2, 0, 1.0), (2, 0, 1, 1.0)])
            .expect("so(3) constants are well formed")
    }

    #[inline]
    fn idx(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.dim + j) * self.dim + k
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.c[self.idx(i, j, k)]
    }

    pub fn max_abs(&self) -> f64 {
        self.c.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Nonzero entries with `i < j`, the minimal description of the bracket.
    pub fn entries(&self) -> Vec<(usize, usize, usize, f64)> {
        let n = self.dim;
        let mut out = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                for k in 0..n {
                    let v = self.get(i, j, k);
                    if v != 0.0 {
                        out.push((i, j, k, v));
                    }
                }
            }
        }
        out
    }

    /// Constants in the basis `e'_i = s_i e_i`.
    pub fn rescale_basis(&self, factors: &[f64]) -> Result<Self> {
        if factors.len() != self.dim {
            return Err(Error::invalid(format!(
                "expected {} scale factors, got {}",
                self.dim,
                factors.len()
            )));
        }
        if factors.iter().any(|s| !s.is_finite() || *s == 0.0) {
            return Err(Error::invalid("scale factors must be finite and nonzero"));
        }
        let mut out = self.clone();
        let n = self.dim;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let a = self.idx(i, j, k);
                    out.c[a] = self.c[a] * factors[i] * factors[j] / factors[k];
                }
            }
        }
        Ok(out)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let file: StructureConstantsFile = serde_json::from_str(text)?;
        let entries: Vec<_> = file
            .entries
            .iter()
            .map(|e| (e.0, e.1, e.2, e.3))
            .collect();
        Self::from_entries(file.dim, &entries)
    }

    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json_str(&text)
    }

    pub fn to_json_string(&self) -> Result<String> {
        let file = StructureConstantsFile {
            dim: self.dim,
            entries: self
                .entries()
                .into_iter()
                .map(|(i, j, k, v)| Entry(i, j, k, v))
                .collect(),
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }
}

/// On-disk form: `{"dim": n, "entries": [[i, j, k, value], ...]}`, 0-based.
#[derive(Debug, Serialize, Deserialize)]
struct StructureConstantsFile {
    dim: usize,
    entries: Vec<Entry>,
}

#[derive(Debug, Serialize, Deserialize)]
struct Entry(usize, usize, usize, f64);

/// Max-norm residual of the cyclic Jacobi sum over all index quadruples.
pub fn jacobi_defect(sc: &StructureConstants) -> f64 {
    let n = sc.dim;
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for m in 0..n {
                    let mut s = 0.0;
                    for a in 0..n {
                        s += sc.get(i, j, a) * sc.get(a, k, m)
                            + sc.get(j, k, a) * sc.get(a, i, m)
                            + sc.get(k, i, a) * sc.get(a, j, m);
                    }
                    worst = worst.max(s.abs());
                }
            }
        }
    }
    worst
}

/// `K[a][b] = Σ_ij c[a][i][j] c[b][j][i]`, exactly symmetric.
///
/// Rejects brackets whose Jacobi defect exceeds `JACOBI_REL_TOL · max|c|²`.
pub fn killing_form(sc: &StructureConstants) -> Result<DMatrix<f64>> {
    let scale = sc.max_abs();
    let tol = JACOBI_REL_TOL * scale * scale;
    let defect = jacobi_defect(sc);
    if defect > tol {
        return Err(Error::JacobiViolation { defect, tol });
    }
    Ok(killing_unchecked(sc))
}

fn killing_unchecked(sc: &StructureConstants) -> DMatrix<f64> {
    let n = sc.dim;
    let mut k = DMatrix::zeros(n, n);
    for a in 0..n {
        for b in a..n {
            let mut s = 0.0;
            for i in 0..n {
                for j in 0..n {
                    s += sc.get(a, i, j) * sc.get(b, j, i);
                }
            }
            k[(a, b)] = s;
            k[(b, a)] = s;
        }
    }
    k
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Semisimple,
    Compound,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Semisimple => "semisimple",
            Verdict::Compound => "compound",
        })
    }
}

/// Inertia of the Killing form at the rank tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Signature {
    pub positive: usize,
    pub negative: usize,
    pub zero: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct StabilityReport {
    pub jacobi_defect: f64,
    pub killing: Vec<Vec<f64>>,
    pub killing_det: f64,
    pub killing_rank: usize,
    pub verdict: Verdict,
    pub radical_dim_estimate: usize,
    pub signature: Signature,
}

/// Cartan's criterion: semisimple iff the Killing form is nondegenerate.
///
/// Rank counts singular values above `tol · σ_max`.
pub fn semisimplicity_report(sc: &StructureConstants, tol: f64) -> StabilityReport {
    let n = sc.dim;
    let killing = killing_unchecked(sc);
    let killing_det = killing.determinant();
    // symmetric, so singular values are |eigenvalues|
    let eig = SymmetricEigen::new(killing.clone()).eigenvalues;
    let sigma_max = eig.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let cut = tol * sigma_max;
    let mut sig = Signature {
        positive: 0,
        negative: 0,
        zero: 0,
    };
    for &v in eig.iter() {
        if sigma_max == 0.0 || v.abs() <= cut {
            sig.zero += 1;
        } else if v > 0.0 {
            sig.positive += 1;
        } else {
            sig.negative += 1;
        }
    }
    let killing_rank = n - sig.zero;
    StabilityReport {
        jacobi_defect: jacobi_defect(sc),
        killing: (0..n)
            .map(|a| (0..n).map(|b| killing[(a, b)]).collect())
            .collect(),
        killing_det,
        killing_rank,
        verdict: if killing_rank == n {
            Verdict::Semisimple
        } else {
            Verdict::Compound
        },
        radical_dim_estimate: n - killing_rank,
        signature: sig,
    }
}

/// The three quantum constants `(ħ, ħ′, ħ″)` of the deformed Heisenberg bracket.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlexParams {
    pub hbar: f64,
    pub hbar1: f64,
    pub hbar2: f64,
}

impl FlexParams {
    pub fn new(hbar: f64, hbar1: f64, hbar2: f64) -> Self {
        Self { hbar, hbar1, hbar2 }
    }

    fn validate(&self) -> Result<()> {
        if !(self.hbar > 0.0 && self.hbar.is_finite()) {
            return Err(Error::invalid(format!("hbar must be > 0, got {}", self.hbar)));
        }
        for (name, v) in [("hbar1", self.hbar1), ("hbar2", self.hbar2)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("{name} must be >= 0, got {v}")));
            }
        }
        Ok(())
    }
}

/// Basis `(q̆, p̆, ı̆)` with `[q̆,p̆] = ħ ı̆`, `[ı̆,q̆] = ħ′ p̆`, `[p̆,ı̆] = ħ″ q̆`.
///
/// `ħ′ = ħ″ = 0` is the Heisenberg algebra; any `ħ′ħ″ > 0` is so(3).
pub fn flex_heisenberg(params: FlexParams) -> Result<StructureConstants> {
    params.validate()?;
    let FlexParams { hbar, hbar1, hbar2 } = params;
    StructureConstants::from_entries(3, &[(0, 1, 2, hbar), (2, 0, 1, hbar1), (1, 2, 0, hbar2)])
}

/// The noncompact sign pattern `[p,x] = −ħ i`, `[i,p] = −ħ′ x`, `[x,i] = ħ″ p`,
/// in the same `(x, p, i)` basis order. Isomorphic to so(2,1) for `ħ′ħ″ > 0`.
pub fn segal_variant(params: FlexParams) -> Result<StructureConstants> {
    params.validate()?;
    let FlexParams { hbar, hbar1, hbar2 } = params;
    // [x,p] = ħ i, [p,i] = ħ′ x, [x,i] = ħ″ p
    StructureConstants::from_entries(3, &[(0, 1, 2, hbar), (1, 2, 0, hbar1), (0, 2, 1, hbar2)])
}

#[derive(Debug, Clone, Serialize)]
pub struct ContractionStep {
    pub scale_hbar1: f64,
    pub scale_hbar2: f64,
    pub killing_det: f64,
    pub killing_rank: usize,
    pub verdict: Verdict,
}

/// `[1, 10⁻¹, …, 10^-(steps-2), 0]`.
pub fn decade_scales(steps: usize) -> Result<Vec<f64>> {
    if steps < 2 {
        return Err(Error::invalid("a contraction needs at least 2 steps"));
    }
    let mut t: Vec<f64> = (0..steps - 1)
        .map(|s| format!("1e-{s}").parse().expect("valid float"))
        .collect();
    t.push(0.0);
    Ok(t)
}

/// Contracts `ħ′` and `ħ″` together by the scale sequence `t`.
pub fn contraction_trajectory(base: FlexParams, scales: &[f64]) -> Result<Vec<ContractionStep>> {
    contraction_trajectory_split(base, scales, scales)
}

/// As [`contraction_trajectory`] with independent scale lists for `ħ′` and `ħ″`.
pub fn contraction_trajectory_split(
    base: FlexParams,
    scales1: &[f64],
    scales2: &[f64],
) -> Result<Vec<ContractionStep>> {
    base.validate()?;
    if scales1.len() != scales2.len() {
        return Err(Error::invalid("scale lists differ in length"));
    }
    if scales1.is_empty() {
        return Err(Error::invalid("empty scale list"));
    }
    for list in [scales1, scales2] {
        if list.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
            return Err(Error::invalid("scales must be finite and nonnegative"));
        }
        if list.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::invalid("scales must be non-increasing"));
        }
    }
    scales1
        .iter()
        .zip(scales2)
        .map(|(&t1, &t2)| {
            let sc = flex_heisenberg(FlexParams::new(base.hbar, t1 * base.hbar1, t2 * base.hbar2))?;
            let rep = semisimplicity_report(&sc, RANK_TOL);
            Ok(ContractionStep {
                scale_hbar1: t1,
                scale_hbar2: t2,
                killing_det: rep.killing_det,
                killing_rank: rep.killing_rank,
                verdict: rep.verdict,
            })
        })
        .collect()
}
