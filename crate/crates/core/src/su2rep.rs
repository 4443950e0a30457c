//! Spin-l generators in real split form and the finite quantum constants.
//!
//! All matrices are real. With `Ly = −i·Ay`:
//!
//! - `Sx = Lx` is symmetric tridiagonal with zero diagonal,
//! - `Ay = i·Ly` is antisymmetric tridiagonal,
//! - `Dz = Lz` is diagonal, `m = l, l−1, …, −l` in basis order.
//!
//! They obey `[S, A] = −D`, `[A, D] = −S`, `[D, S] = A` and the Casimir
//! identity `S² − A² + D² = l(l+1)·I`.
//!
//! Physical axes follow the oscillator Hamiltonian `(K/2)(Lx² + κ²Ly²)`:
//! momentum is `P·Lx`, position is `Q·Ly`, and the regulator `ı̆` is
//! `−J·L̆z`. The relabeling `(L̆y, L̆x, −L̆z)` is a proper rotation of the
//! skew generators `L̆ = −iL`, so the deformed Heisenberg relations
//! `[q̆,p̆] = ħ ı̆`, `[ı̆,q̆] = ħ′ p̆`, `[p̆,ı̆] = ħ″ q̆` hold exactly.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::{Error, Result};

/// Largest `l` for which `l(l+1)` and all ladder products are exact in `f64`.
pub const MAX_L: u64 = 1 << 26;

/// Largest dimension for which dense matrices are materialized.
pub const DENSE_LIMIT: usize = 4097;

#[derive(Debug, Clone, PartialEq)]
pub struct RepData {
    l: u64,
    n: usize,
    /// `Sx[j][j+1] = Sx[j+1][j]`
    pub(crate) sx_off: Vec<f64>,
    /// `Ay[j][j+1] = −Ay[j+1][j]`
    pub(crate) ay_off: Vec<f64>,
    pub(crate) dz: Vec<f64>,
}

/// Ladder coefficient `½√(l(l+1) − m(m−1))` for the pair `(m, m−1)`.
#[inline]
pub(crate) fn half_ladder(l: u64, m: i64) -> f64 {
    let l = l as i64;
    // l(l+1) − m(m−1) = (l+m)(l−m+1), exact for l ≤ MAX_L
    let prod = ((l + m) * (l - m + 1)) as f64;
    0.5 * prod.sqrt()
}

/// Builds the three generators of the spin-`l` irrep.
pub fn build_generators(l: u64) -> Result<RepData> {
    if l == 0 {
        return Err(Error::invalid("l = 0 is a degenerate rotator; need l >= 1"));
    }
    if l > MAX_L {
        return Err(Error::invalid(format!(
            "l = {l} exceeds {MAX_L}; l(l+1) would lose integer exactness"
        )));
    }
    let n = (2 * l + 1) as usize;
    let li = l as i64;
    let dz: Vec<f64> = (0..n).map(|j| (li - j as i64) as f64).collect();
    let sx_off: Vec<f64> = (0..n - 1)
        .map(|j| half_ladder(l, li - j as i64))
        .collect();
    let ay_off = sx_off.clone();
    Ok(RepData {
        l,
        n,
        sx_off,
        ay_off,
        dz,
    })
}

impl RepData {
    pub fn l(&self) -> u64 {
        self.l
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// `m` quantum number of basis index `j`.
    #[inline]
    pub fn m_of(&self, j: usize) -> i64 {
        self.l as i64 - j as i64
    }

    #[inline]
    pub fn index_of(&self, m: i64) -> Option<usize> {
        let j = self.l as i64 - m;
        (0..self.n as i64).contains(&j).then_some(j as usize)
    }

    pub fn sx_offdiag(&self) -> &[f64] {
        &self.sx_off
    }

    pub fn ay_offdiag(&self) -> &[f64] {
        &self.ay_off
    }

    pub fn dz(&self) -> &[f64] {
        &self.dz
    }

    /// `out = Sx·v`.
    pub fn apply_sx(&self, v: &[f64], out: &mut [f64]) {
        let n = self.n;
        assert!(v.len() == n && out.len() == n);
        for j in 0..n {
            let mut s = 0.0;
            if j > 0 {
                s += self.sx_off[j - 1] * v[j - 1];
            }
            if j + 1 < n {
                s += self.sx_off[j] * v[j + 1];
            }
            out[j] = s;
        }
    }

    /// `out = Ay·v`.
    pub fn apply_ay(&self, v: &[f64], out: &mut [f64]) {
        let n = self.n;
        assert!(v.len() == n && out.len() == n);
        for j in 0..n {
            let mut s = 0.0;
            if j > 0 {
                s -= self.ay_off[j - 1] * v[j - 1];
            }
            if j + 1 < n {
                s += self.ay_off[j] * v[j + 1];
            }
            out[j] = s;
        }
    }

    fn check_dense(&self) -> Result<()> {
        if self.n > DENSE_LIMIT {
            return Err(Error::invalid(format!(
                "dense matrices are limited to dimension {DENSE_LIMIT}, got {}",
                self.n
            )));
        }
        Ok(())
    }

    pub fn dense_sx(&self) -> Result<DMatrix<f64>> {
        self.check_dense()?;
        Ok(self.sx_band().to_dense())
    }

    pub fn dense_ay(&self) -> Result<DMatrix<f64>> {
        self.check_dense()?;
        Ok(self.ay_band().to_dense())
    }

    pub fn dense_dz(&self) -> Result<DMatrix<f64>> {
        self.check_dense()?;
        Ok(DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&self.dz)))
    }

    /// Dense matrix as CSV rows, 17 significant digits.
    pub fn dense_csv(&self, which: Generator) -> Result<String> {
        let m = match which {
            Generator::Sx => self.dense_sx()?,
            Generator::Ay => self.dense_ay()?,
            Generator::Dz => self.dense_dz()?,
        };
        let mut out = String::new();
        for r in 0..m.nrows() {
            let row: Vec<String> = (0..m.ncols())
                .map(|c| crate::output::fmt_f64(m[(r, c)]))
                .collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        Ok(out)
    }

    fn sx_band(&self) -> Band {
        let mut b = Band::zeros(self.n, 1);
        for (j, &v) in self.sx_off.iter().enumerate() {
            b.set(j, j + 1, v);
            b.set(j + 1, j, v);
        }
        b
    }

    fn ay_band(&self) -> Band {
        let mut b = Band::zeros(self.n, 1);
        for (j, &v) in self.ay_off.iter().enumerate() {
            b.set(j, j + 1, v);
            b.set(j + 1, j, -v);
        }
        b
    }

    fn dz_band(&self) -> Band {
        let mut b = Band::zeros(self.n, 0);
        for (j, &v) in self.dz.iter().enumerate() {
            b.set(j, j, v);
        }
        b
    }

    /// `max |S² − A² + D² − l(l+1)I|`.
    pub fn casimir_residual(&self) -> f64 {
        let s = self.sx_band();
        let a = self.ay_band();
        let d = self.dz_band();
        let mut c = s.mul(&s);
        c.axpy(-1.0, &a.mul(&a));
        c.axpy(1.0, &d.mul(&d));
        let ll = (self.l * (self.l + 1)) as f64;
        for j in 0..self.n {
            c.set(j, j, c.get(j, j) - ll);
        }
        c.max_abs()
    }

    /// Max-norm residuals of `[S,A] = −D`, `[A,D] = −S`, `[D,S] = A`.
    pub fn so3_residuals(&self) -> [f64; 3] {
        let s = self.sx_band();
        let a = self.ay_band();
        let d = self.dz_band();
        let mut r1 = s.commutator(&a);
        r1.axpy(1.0, &d);
        let mut r2 = a.commutator(&d);
        r2.axpy(1.0, &s);
        let mut r3 = d.commutator(&s);
        r3.axpy(-1.0, &a);
        [r1.max_abs(), r2.max_abs(), r3.max_abs()]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Generator {
    Sx,
    Ay,
    Dz,
}

/// Square band matrix with half-bandwidth `w`, stored row by row.
#[derive(Debug, Clone)]
struct Band {
    n: usize,
    w: usize,
    data: Vec<f64>,
}

impl Band {
    fn zeros(n: usize, w: usize) -> Self {
        Self {
            n,
            w,
            data: vec![0.0; n * (2 * w + 1)],
        }
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> Option<usize> {
        let off = j as isize - i as isize;
        (off.unsigned_abs() <= self.w).then(|| i * (2 * self.w + 1) + (off + self.w as isize) as usize)
    }

    fn get(&self, i: usize, j: usize) -> f64 {
        self.slot(i, j).map_or(0.0, |s| self.data[s])
    }

    fn set(&mut self, i: usize, j: usize, v: f64) {
        let s = self.slot(i, j).expect("entry outside band");
        self.data[s] = v;
    }

    fn widened(&self, w: usize) -> Self {
        let mut out = Band::zeros(self.n, w.max(self.w));
        for i in 0..self.n {
            for j in i.saturating_sub(self.w)..(i + self.w + 1).min(self.n) {
                out.set(i, j, self.get(i, j));
            }
        }
        out
    }

    fn mul(&self, other: &Band) -> Band {
        let w = self.w + other.w;
        let mut out = Band::zeros(self.n, w);
        for i in 0..self.n {
            for k in i.saturating_sub(self.w)..(i + self.w + 1).min(self.n) {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in k.saturating_sub(other.w)..(k + other.w + 1).min(self.n) {
                    let s = out.slot(i, j).unwrap();
                    out.data[s] += a * other.get(k, j);
                }
            }
        }
        out
    }

    fn commutator(&self, other: &Band) -> Band {
        let mut c = self.mul(other);
        c.axpy(-1.0, &other.mul(self));
        c
    }

    /// `self += alpha·other`, widening as needed.
    fn axpy(&mut self, alpha: f64, other: &Band) {
        if other.w > self.w {
            *self = self.widened(other.w);
        }
        for i in 0..self.n {
            for j in i.saturating_sub(other.w)..(i + other.w + 1).min(self.n) {
                let s = self.slot(i, j).unwrap();
                self.data[s] += alpha * other.get(i, j);
            }
        }
    }

    fn scaled(&self, alpha: f64) -> Band {
        let mut b = self.clone();
        b.data.iter_mut().for_each(|v| *v *= alpha);
        b
    }

    fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    fn to_dense(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j))
    }
}

/// Quantum constants of the finite oscillator.
///
/// `ħ′` and `ħ″` are stored after rescaling so that `J·l = 1` exactly.
#[derive(Debug, Clone, Serialize)]
pub struct OscillatorConstants {
    pub hbar: f64,
    pub hbar1: f64,
    pub hbar2: f64,
    pub mass: f64,
    pub stiffness: f64,
    pub q: f64,
    pub p: f64,
    pub j: f64,
    pub l: u64,
    /// Energy scale `K = P²/m`.
    pub k_energy: f64,
    pub kappa: f64,
    pub omega: f64,
    /// Factor applied to `ħ′` and `ħ″` to make `1/√(ħ′ħ″)` an integer.
    pub rescale: f64,
    pub warning: Option<String>,
}

/// Relative rescaling of `ħ′, ħ″` beyond which a warning is attached.
pub const RESCALE_WARN: f64 = 1e-6;

pub fn make_constants(
    hbar: f64,
    hbar1: f64,
    hbar2: f64,
    mass: f64,
    stiffness: f64,
) -> Result<OscillatorConstants> {
    for (name, v) in [
        ("hbar", hbar),
        ("hbar1", hbar1),
        ("hbar2", hbar2),
        ("mass", mass),
        ("stiffness", stiffness),
    ] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::invalid(format!("{name} must be finite and > 0, got {v}")));
        }
    }
    let raw_j = (hbar1 * hbar2).sqrt();
    let raw_l = (1.0 / raw_j).round();
    if raw_l < 1.0 {
        return Err(Error::invalid(format!(
            "sqrt(hbar1*hbar2) = {raw_j} rounds to l = 0; need hbar1*hbar2 <= 4"
        )));
    }
    if raw_l > MAX_L as f64 {
        return Err(Error::invalid(format!("l = {raw_l} exceeds {MAX_L}")));
    }
    let l = raw_l as u64;
    let rescale = 1.0 / (raw_l * raw_j);
    let hbar1 = hbar1 * rescale;
    let hbar2 = hbar2 * rescale;
    let warning = ((rescale - 1.0).abs() > RESCALE_WARN).then(|| {
        format!(
            "1/sqrt(hbar1*hbar2) = {} is not an integer; hbar1, hbar2 rescaled by {rescale} to give l = {l}",
            1.0 / raw_j
        )
    });
    let q = (hbar * hbar1).sqrt();
    let p = (hbar * hbar2).sqrt();
    Ok(OscillatorConstants {
        hbar,
        hbar1,
        hbar2,
        mass,
        stiffness,
        q,
        p,
        j: 1.0 / raw_l,
        l,
        k_energy: p * p / mass,
        kappa: (hbar1 * mass * stiffness / hbar2).sqrt(),
        omega: (stiffness / mass).sqrt(),
        rescale,
        warning,
    })
}

impl OscillatorConstants {
    /// Symmetric constants realizing a given `(l, K, κ)`: `ħ′ = ħ″ = 1/l`,
    /// mass from `K = P²/m`, stiffness from `κ² = mk`. `κ = 0` is allowed here.
    pub fn from_model(l: u64, k_energy: f64, kappa: f64, hbar: f64) -> Result<Self> {
        if l == 0 || l > MAX_L {
            return Err(Error::invalid(format!("l must be in 1..={MAX_L}, got {l}")));
        }
        if !(k_energy > 0.0 && k_energy.is_finite()) {
            return Err(Error::invalid(format!("K must be > 0, got {k_energy}")));
        }
        if !(kappa >= 0.0 && kappa.is_finite()) {
            return Err(Error::invalid(format!("kappa must be >= 0, got {kappa}")));
        }
        if !(hbar > 0.0 && hbar.is_finite()) {
            return Err(Error::invalid(format!("hbar must be > 0, got {hbar}")));
        }
        let lf = l as f64;
        let hbar1 = 1.0 / lf;
        let q = (hbar * hbar1).sqrt();
        let p = q;
        let mass = p * p / k_energy;
        let stiffness = kappa * kappa / mass;
        Ok(Self {
            hbar,
            hbar1,
            hbar2: hbar1,
            mass,
            stiffness,
            q,
            p,
            j: 1.0 / lf,
            l,
            k_energy,
            kappa,
            omega: (stiffness / mass).sqrt(),
            rescale: 1.0,
            warning: None,
        })
    }

    pub fn hbar_omega(&self) -> f64 {
        self.hbar * self.omega
    }
}

/// Hermitian observable `scale · L_axis` on a representation, without copying.
#[derive(Debug, Clone, Copy)]
pub struct ScaledOperator<'a> {
    pub rep: &'a RepData,
    pub generator: Generator,
    pub scale: f64,
}

impl ScaledOperator<'_> {
    /// Exact spectrum, ascending: each of `Lx`, `Ly`, `Lz` has eigenvalues `−l..=l`.
    pub fn spectrum(&self) -> Vec<f64> {
        let l = self.rep.l as i64;
        let mut v: Vec<f64> = (-l..=l).map(|m| self.scale * m as f64).collect();
        v.sort_by(f64::total_cmp);
        v
    }

    pub fn spacing(&self) -> f64 {
        self.scale.abs()
    }

    pub fn max_abs_eigenvalue(&self) -> f64 {
        self.scale.abs() * self.rep.l as f64
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ScaledOperators<'a> {
    /// `q = Q·Ly`
    pub position: ScaledOperator<'a>,
    /// `p = P·Lx`
    pub momentum: ScaledOperator<'a>,
    /// Hermitian form of `ı̆`: `−J·Lz`
    pub regulator: ScaledOperator<'a>,
}

fn check_match(rep: &RepData, consts: &OscillatorConstants) -> Result<()> {
    if rep.l != consts.l {
        return Err(Error::invalid(format!(
            "representation has l = {} but constants give l = {}",
            rep.l, consts.l
        )));
    }
    Ok(())
}

pub fn scaled_operators<'a>(
    rep: &'a RepData,
    consts: &OscillatorConstants,
) -> Result<ScaledOperators<'a>> {
    check_match(rep, consts)?;
    Ok(ScaledOperators {
        position: ScaledOperator {
            rep,
            generator: Generator::Ay,
            scale: consts.q,
        },
        momentum: ScaledOperator {
            rep,
            generator: Generator::Sx,
            scale: consts.p,
        },
        regulator: ScaledOperator {
            rep,
            generator: Generator::Dz,
            scale: -consts.j,
        },
    })
}

/// Residuals of the deformed Heisenberg relations with
/// `q̆ = −Q·A`, `p̆ = −iP·S`, `ı̆ = iJ·D`, common factors of `i` removed:
///
/// 1. `QP·[A,S] − ħJ·D`
/// 2. `JQ·[D,A] − ħ′P·S`
/// 3. `PJ·[S,D] + ħ″Q·A`
pub fn commutator_residuals(rep: &RepData, consts: &OscillatorConstants) -> Result<[f64; 3]> {
    check_match(rep, consts)?;
    let s = rep.sx_band();
    let a = rep.ay_band();
    let d = rep.dz_band();
    let (q, p, j) = (consts.q, consts.p, consts.j);

    let mut r1 = a.commutator(&s).scaled(q * p);
    r1.axpy(-consts.hbar * j, &d);
    let mut r2 = d.commutator(&a).scaled(j * q);
    r2.axpy(-consts.hbar1 * p, &s);
    let mut r3 = s.commutator(&d).scaled(p * j);
    r3.axpy(consts.hbar2 * q, &a);
    Ok([r1.max_abs(), r2.max_abs(), r3.max_abs()])
}
