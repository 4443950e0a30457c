//! Closed-form, perturbative and limiting results for the finite oscillator,
//! each paired with a numerical counterpart from [`crate::oscillator`].

use std::ops::RangeInclusive;

use rayon::prelude::*;
use serde::Serialize;

use crate::oscillator::{spectrum, BandedHamiltonian, SpectrumOptions, SymTridiagonal};
use crate::su2rep::{OscillatorConstants, RepData};
use crate::{Error, Result};

/// Allowed deviation of a state's norm from 1.
pub const NORM_TOL: f64 = 1e-10;

/// Level grouping for excitation ladders, as a fraction of the dominant
/// unperturbed quantum `(K/2)·max(1, κ²)`.
pub const LEVEL_REL_TOL: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Soft,
    Medium,
    Hard,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::Soft => "soft",
            Regime::Medium => "medium",
            Regime::Hard => "hard",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FrozenAxis {
    None,
    Momentum,
    Position,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegimeThresholds {
    /// Soft if `κ ≤ soft`.
    pub soft: f64,
    /// Hard if `κ ≥ hard`.
    pub hard: f64,
}

impl RegimeThresholds {
    /// `κ ≤ 1/l` keeps the largest potential energy `(K/2)κ²l²` below one
    /// kinetic quantum `K/2`; `κ ≥ l` is the mirror condition.
    pub fn for_l(l: u64) -> Self {
        let l = l as f64;
        Self {
            soft: 1.0 / l,
            hard: l,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegimeDiagnostics {
    pub kappa: f64,
    pub regime: Regime,
    pub frozen_axis: FrozenAxis,
    pub thresholds: RegimeThresholds,
}

pub fn classify_kappa(kappa: f64, thresholds: RegimeThresholds) -> RegimeDiagnostics {
    let (regime, frozen_axis) = if kappa <= thresholds.soft {
        (Regime::Soft, FrozenAxis::Momentum)
    } else if kappa >= thresholds.hard {
        (Regime::Hard, FrozenAxis::Position)
    } else {
        (Regime::Medium, FrozenAxis::None)
    };
    RegimeDiagnostics {
        kappa,
        regime,
        frozen_axis,
        thresholds,
    }
}

/// Regime of an oscillator; `None` uses [`RegimeThresholds::for_l`].
pub fn classify_regime(
    consts: &OscillatorConstants,
    thresholds: Option<RegimeThresholds>,
) -> RegimeDiagnostics {
    classify_kappa(
        consts.kappa,
        thresholds.unwrap_or_else(|| RegimeThresholds::for_l(consts.l)),
    )
}

fn check_lk(l: u64, k_energy: f64) -> Result<()> {
    if l == 0 {
        return Err(Error::invalid("l must be >= 1"));
    }
    if !(k_energy > 0.0 && k_energy.is_finite()) {
        return Err(Error::invalid(format!("K must be > 0, got {k_energy}")));
    }
    Ok(())
}

/// `E_n = (K/2)(l(l+1) − (n−l)²) = lK(n + ½ − n²/2l)` for `n = 0..=n_max`.
pub fn medium_closed_form(l: u64, k_energy: f64, n_max: u64) -> Result<Vec<f64>> {
    check_lk(l, k_energy)?;
    if n_max > 2 * l {
        return Err(Error::OutOfRange(format!("n_max = {n_max} exceeds 2l = {}", 2 * l)));
    }
    let ll = (l * (l + 1)) as f64;
    Ok((0..=n_max)
        .map(|n| {
            let d = n as f64 - l as f64;
            0.5 * k_energy * (ll - d * d)
        })
        .collect())
}

/// First-order perturbative spectrum labeled by the unperturbed quantum number.
#[derive(Debug, Clone, Serialize)]
pub struct PerturbativeSpectrum {
    /// `(m, E_m)` pairs.
    pub levels: Vec<(i64, f64)>,
    pub e_max: f64,
    pub e0: f64,
    pub warning: Option<String>,
}

/// Soft oscillator: unperturbed `(K/2)Lx²` plus first-order `(K/2)κ²Ly²`:
/// `E_m = (K/2)m² + (K/4)κ²(l(l+1) − m²)`.
pub fn soft_perturbative(
    l: u64,
    k_energy: f64,
    kappa: f64,
    m_range: RangeInclusive<i64>,
) -> Result<PerturbativeSpectrum> {
    check_lk(l, k_energy)?;
    if !(kappa >= 0.0 && kappa.is_finite()) {
        return Err(Error::invalid(format!("kappa must be >= 0, got {kappa}")));
    }
    let li = l as i64;
    if *m_range.start() < -li || *m_range.end() > li {
        return Err(Error::OutOfRange(format!(
            "m range {m_range:?} outside [-{l}, {l}]"
        )));
    }
    let ll = (l * (l + 1)) as f64;
    let k2 = kappa * kappa;
    let level = |m: i64| {
        let m2 = (m * m) as f64;
        0.5 * k_energy * m2 + 0.25 * k_energy * k2 * (ll - m2)
    };
    let lf = l as f64;
    Ok(PerturbativeSpectrum {
        levels: m_range.map(|m| (m, level(m))).collect(),
        e_max: 0.5 * k_energy * lf * lf * (1.0 + k2 / (2.0 * lf)),
        e0: 0.25 * k2 * k_energy * ll,
        warning: (kappa > 1.0).then(|| {
            format!("soft perturbation theory extrapolated to kappa = {kappa} > 1")
        }),
    })
}

/// Hard oscillator: the soft result with `κ → 1/κ`, `K → Kκ²`.
pub fn hard_perturbative(
    l: u64,
    k_energy: f64,
    kappa: f64,
    m_range: RangeInclusive<i64>,
) -> Result<PerturbativeSpectrum> {
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(Error::invalid(format!("hard regime needs kappa > 0, got {kappa}")));
    }
    let mut out = soft_perturbative(l, k_energy * kappa * kappa, 1.0 / kappa, m_range)?;
    out.warning = (kappa < 1.0).then(|| {
        format!("hard perturbation theory extrapolated to kappa = {kappa} < 1")
    });
    Ok(out)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct VariationalBound {
    /// `⟨Lz=l|H|Lz=l⟩` evaluated with the band matrix.
    pub numerical: f64,
    /// `(K/4)(1+κ²)·l`.
    pub closed_form: f64,
}

/// Upper bound on the ground energy from the trial state `|Lz = l⟩`.
pub fn variational_bound(l: u64, k_energy: f64, kappa: f64) -> Result<VariationalBound> {
    let h = BandedHamiltonian::new(l, k_energy, kappa)?;
    let mut trial = vec![0.0; h.dim()];
    trial[0] = 1.0;
    let numerical = h.expectation(&trial);
    let closed_form = 0.25 * k_energy * (1.0 + kappa * kappa) * l as f64;
    if (numerical - closed_form).abs() > 1e-12 * closed_form.abs() {
        return Err(Error::Numerical(format!(
            "trial expectation {numerical} differs from (K/4)(1+kappa^2)l = {closed_form}"
        )));
    }
    Ok(VariationalBound {
        numerical,
        closed_form,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct UncertaintyReport {
    pub state: String,
    pub mean_lx: f64,
    pub mean_lz: f64,
    /// `ΔLx`, `ΔLy` in units of the generators.
    pub delta_lx: f64,
    pub delta_ly: f64,
    /// `Δp = P·ΔLx`, `Δq = Q·ΔLy`.
    pub delta_p: f64,
    pub delta_q: f64,
    pub product: f64,
    pub product_raw: f64,
    /// `½|⟨Lz⟩|`.
    pub robertson_raw: f64,
    /// `½|⟨[q,p]⟩| = ½ħJ|⟨Lz⟩|`.
    pub robertson_bound: f64,
    /// `Δp·Δq / (ħ/2)`.
    pub hbar_half_ratio: f64,
}

fn norm_sq(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn check_state(rep: &RepData, state: &[f64]) -> Result<()> {
    if state.len() != rep.dim() {
        return Err(Error::invalid(format!(
            "state has {} components, representation has {}",
            state.len(),
            rep.dim()
        )));
    }
    let nrm = norm_sq(state).sqrt();
    if (nrm - 1.0).abs() > NORM_TOL {
        return Err(Error::invalid(format!("state norm {nrm} is not 1")));
    }
    Ok(())
}

/// Position and momentum spreads of a real state.
///
/// For real states `⟨Ly⟩ = 0` identically and `⟨Ly²⟩ = ‖Ay·v‖²`.
pub fn uncertainty_product(
    rep: &RepData,
    consts: &OscillatorConstants,
    label: &str,
    state: &[f64],
) -> Result<UncertaintyReport> {
    check_state(rep, state)?;
    if rep.l() != consts.l {
        return Err(Error::invalid(format!(
            "representation has l = {} but constants give l = {}",
            rep.l(),
            consts.l
        )));
    }
    let n = rep.dim();
    let mut sv = vec![0.0; n];
    let mut av = vec![0.0; n];
    rep.apply_sx(state, &mut sv);
    rep.apply_ay(state, &mut av);
    let mean_lx = dot(state, &sv);
    let var_lx = (norm_sq(&sv) - mean_lx * mean_lx).max(0.0);
    let var_ly = norm_sq(&av);
    let mean_lz: f64 = state.iter().zip(rep.dz()).map(|(v, m)| v * v * m).sum();
    let delta_lx = var_lx.sqrt();
    let delta_ly = var_ly.sqrt();
    let delta_p = consts.p * delta_lx;
    let delta_q = consts.q * delta_ly;
    let product = delta_p * delta_q;
    Ok(UncertaintyReport {
        state: label.to_string(),
        mean_lx,
        mean_lz,
        delta_lx,
        delta_ly,
        delta_p,
        delta_q,
        product,
        product_raw: delta_lx * delta_ly,
        robertson_raw: 0.5 * mean_lz.abs(),
        robertson_bound: 0.5 * consts.hbar * consts.j * mean_lz.abs(),
        hbar_half_ratio: product / (0.5 * consts.hbar),
    })
}

/// `⟨(K/2)Lx²⟩ / ⟨(Kκ²/2)Ly²⟩`; `+∞` when the potential expectation vanishes.
pub fn equipartition_ratio(rep: &RepData, k_energy: f64, kappa: f64, state: &[f64]) -> Result<f64> {
    check_state(rep, state)?;
    check_lk(rep.l(), k_energy)?;
    let n = rep.dim();
    let mut sv = vec![0.0; n];
    let mut av = vec![0.0; n];
    rep.apply_sx(state, &mut sv);
    rep.apply_ay(state, &mut av);
    let kinetic = 0.5 * k_energy * norm_sq(&sv);
    let potential = 0.5 * k_energy * kappa * kappa * norm_sq(&av);
    Ok(if potential == 0.0 {
        f64::INFINITY
    } else {
        kinetic / potential
    })
}

/// Basis state `|Lz = m⟩`.
pub fn lz_state(rep: &RepData, m: i64) -> Result<Vec<f64>> {
    let j = rep
        .index_of(m)
        .ok_or_else(|| Error::OutOfRange(format!("m = {m} outside [-{0}, {0}]", rep.l())))?;
    let mut v = vec![0.0; rep.dim()];
    v[j] = 1.0;
    Ok(v)
}

/// Eigenstate `|Lx = 0⟩`, sign fixed by a positive `m = l` component.
pub fn lx_zero_state(rep: &RepData) -> Result<Vec<f64>> {
    let t = SymTridiagonal::new(vec![0.0; rep.dim()], rep.sx_offdiag().to_vec())?;
    let e = t.eig_range(rep.l() as usize, 1, true)?;
    let mut v = e.vectors.expect("vectors requested").remove(0);
    let pivot = v.iter().copied().find(|x| x.abs() > 1e-12).unwrap_or(1.0);
    if pivot < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
    Ok(v)
}

/// Numerical ground state of `H` (energy, components).
pub fn ground_state(l: u64, k_energy: f64, kappa: f64) -> Result<(f64, Vec<f64>)> {
    let h = BandedHamiltonian::new(l, k_energy, kappa)?;
    let s = spectrum(
        &h,
        SpectrumOptions {
            lowest: Some(1),
            vectors: 1,
            group_tol: None,
        },
    )?;
    let st = s.vectors.into_iter().next().expect("one vector requested");
    Ok((st.energy, st.components))
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct LimitRow {
    pub n: u64,
    pub closed_form: f64,
    /// `ħω(n + ½)` with `ħω = Kl`.
    pub qho: f64,
    pub deviation: f64,
    /// `(n²/2l)/(n + ½)`.
    pub predicted: f64,
    pub numerical: Option<f64>,
    pub numerical_deviation: Option<f64>,
}

/// Relative deviation of the medium spectrum from the uniform ladder.
pub fn qho_limit_deviation(l: u64, k_energy: f64, n_max: u64) -> Result<Vec<LimitRow>> {
    check_lk(l, k_energy)?;
    let root = (l as f64).sqrt().floor() as u64;
    if n_max > root {
        return Err(Error::OutOfRange(format!(
            "n_max = {n_max} exceeds sqrt(l) = {root}; the uniform-ladder limit needs n << sqrt(l)"
        )));
    }
    let levels = medium_closed_form(l, k_energy, n_max)?;
    let hw = k_energy * l as f64;
    Ok(levels
        .iter()
        .enumerate()
        .map(|(n, &e)| {
            let nf = n as f64;
            let qho = hw * (nf + 0.5);
            LimitRow {
                n: n as u64,
                closed_form: e,
                qho,
                deviation: (e - qho).abs() / qho,
                predicted: nf * nf / (2.0 * l as f64) / (nf + 0.5),
                numerical: None,
                numerical_deviation: None,
            }
        })
        .collect())
}

/// As [`qho_limit_deviation`], with levels also read from the `κ = 1`
/// numerical spectrum (one doublet per level).
pub fn qho_limit_numerical(l: u64, k_energy: f64, n_max: u64) -> Result<Vec<LimitRow>> {
    let mut rows = qho_limit_deviation(l, k_energy, n_max)?;
    let h = BandedHamiltonian::new(l, k_energy, 1.0)?;
    let want = (2 * (n_max as usize + 1)).min(h.dim());
    let s = spectrum(
        &h,
        SpectrumOptions {
            lowest: Some(want),
            ..Default::default()
        },
    )?;
    let levels = s.levels();
    for row in rows.iter_mut() {
        if let Some(&e) = levels.get(row.n as usize) {
            row.numerical = Some(e);
            row.numerical_deviation = Some((e - row.qho).abs() / row.qho);
        }
    }
    Ok(rows)
}

/// `(E_{n1+n2} − E_0) − (E_{n1} − E_0) − (E_{n2} − E_0)`.
pub fn excitation_interaction(levels: &[f64], n1: usize, n2: usize) -> Result<f64> {
    let top = n1 + n2;
    if top >= levels.len() {
        return Err(Error::OutOfRange(format!(
            "level {top} requested, {} available",
            levels.len()
        )));
    }
    let e0 = levels[0];
    Ok((levels[top] - e0) - (levels[n1] - e0) - (levels[n2] - e0))
}

/// First-order splitting of the `m = ±1` doublet is widened by this factor
/// when grouping soft or hard ladders.
pub const DOUBLET_SPLIT_FACTOR: f64 = 1.2;

/// Grouping tolerance for excitation ladders: `LEVEL_REL_TOL·(K/2)·max(1, κ²)`,
/// plus the first-order `±1` doublet splitting in the soft (`(K/4)κ²l(l+1)`)
/// and hard (`(K/4)l(l+1)`) regimes.
pub fn level_tolerance(l: u64, k_energy: f64, kappa: f64, regime: Regime) -> f64 {
    let ll = (l * (l + 1)) as f64;
    let split = match regime {
        Regime::Soft => 0.25 * k_energy * kappa * kappa * ll,
        Regime::Hard => 0.25 * k_energy * ll,
        Regime::Medium => 0.0,
    };
    LEVEL_REL_TOL * 0.5 * k_energy * (kappa * kappa).max(1.0) + DOUBLET_SPLIT_FACTOR * split
}

/// Excitation levels: the lowest value of each group of sorted eigenvalues
/// separated by gaps larger than `tol`.
pub fn excitation_levels(sorted: &[f64], tol: f64) -> Vec<f64> {
    crate::oscillator::group_degeneracies(sorted, tol)
        .0
        .iter()
        .map(|g| g.value)
        .collect()
}

/// Lowest `count` excitation levels of `H` from the numerical spectrum,
/// grouped with [`level_tolerance`] at the default regime thresholds.
pub fn numerical_levels(l: u64, k_energy: f64, kappa: f64, count: usize) -> Result<Vec<f64>> {
    numerical_levels_with(l, k_energy, kappa, count, RegimeThresholds::for_l(l))
}

pub fn numerical_levels_with(
    l: u64,
    k_energy: f64,
    kappa: f64,
    count: usize,
    thresholds: RegimeThresholds,
) -> Result<Vec<f64>> {
    let h = BandedHamiltonian::new(l, k_energy, kappa)?;
    // each level holds at most two states
    let want = (2 * count + 2).min(h.dim());
    let s = spectrum(
        &h,
        SpectrumOptions {
            lowest: Some(want),
            ..Default::default()
        },
    )?;
    let regime = classify_kappa(kappa, thresholds).regime;
    let mut levels = excitation_levels(&s.eigenvalues, level_tolerance(l, k_energy, kappa, regime));
    if want < h.dim() {
        // the last group may be cut short
        levels.pop();
    }
    levels.truncate(count);
    Ok(levels)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ZeroPointRow {
    pub kappa: f64,
    pub regime: Regime,
    pub numerical: f64,
    pub formula: f64,
    /// `ħω/2 = Klκ/2`.
    pub hbar_omega_half: f64,
    /// `numerical / (ħω/2)`.
    pub ratio: f64,
}

/// Zero-point energy formula by regime: soft `(K/4)κ²l(l+1)`, hard
/// `(K/4)l(l+1)`, medium `ħω/2 = Klκ/2`.
pub fn zero_point_formula(l: u64, k_energy: f64, kappa: f64, regime: Regime) -> f64 {
    let ll = (l * (l + 1)) as f64;
    match regime {
        Regime::Soft => 0.25 * k_energy * kappa * kappa * ll,
        Regime::Hard => 0.25 * k_energy * ll,
        Regime::Medium => 0.5 * k_energy * l as f64 * kappa,
    }
}

pub fn zero_point_sweep(
    l: u64,
    k_energy: f64,
    kappa_grid: &[f64],
    thresholds: Option<RegimeThresholds>,
) -> Result<Vec<ZeroPointRow>> {
    check_lk(l, k_energy)?;
    if kappa_grid.is_empty() {
        return Err(Error::invalid("empty kappa grid"));
    }
    let thresholds = thresholds.unwrap_or_else(|| RegimeThresholds::for_l(l));
    kappa_grid
        .par_iter()
        .map(|&kappa| {
            let h = BandedHamiltonian::new(l, k_energy, kappa)?;
            let s = spectrum(
                &h,
                SpectrumOptions {
                    lowest: Some(1),
                    ..Default::default()
                },
            )?;
            let numerical = s.ground_energy();
            let regime = classify_kappa(kappa, thresholds).regime;
            let hbar_omega_half = 0.5 * k_energy * l as f64 * kappa;
            Ok(ZeroPointRow {
                kappa,
                regime,
                numerical,
                formula: zero_point_formula(l, k_energy, kappa, regime),
                hbar_omega_half,
                ratio: numerical / hbar_omega_half,
            })
        })
        .collect()
}
