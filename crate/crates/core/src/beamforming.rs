//! Beamformer designs for a full-duplex base station serving one uplink and one
//! downlink user.
//!
//! Naming follows the link roles: `f_ue` is the uplink user's precoder, `w_bs` the
//! BS receive combiner, `f_bs` the BS transmit precoder and `w_ue` the downlink
//! user's combiner. Channel orientation is receiver × transmitter:
//! `H_u` is `N_BS,RX × N_UE`, `H_d` is `N_UE × N_BS,TX`, `H_s` is `N_BS,RX × N_BS,TX`.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::channel::{array_response, ArrayGeometry, FrequencyChannel, RayParams};
use crate::error::{Error, Result};
use crate::numerics::{
    self, complete_orthonormal, dominant_left_singular_vectors, left_basis, nearest_orthonormal,
    null_projector, numerical_rank, phase_only, svd, CMatrix, PINV_RTOL,
};

/// Columns of every full-digital beamformer are orthonormal to this tolerance.
pub const DIGITAL_ORTHONORMAL_TOL: f64 = 1e-8;
/// Tolerance on orthonormality of composed hybrid beamformers.
pub const HYBRID_ORTHONORMAL_TOL: f64 = 1e-6;
/// Unit-modulus tolerance on RF entries.
pub const UNIT_MODULUS_TOL: f64 = 1e-12;
/// Minimum singular-value ratio accepted for an RF matrix in [`digital_factor`].
pub const RF_RANK_RTOL: f64 = 1e-10;
/// Angle-search grid step.
pub const ANGLE_GRID_STEP_DEG: f64 = 2.0;

/// The three frequency-domain channels of one realization.
#[derive(Debug, Clone)]
pub struct LinkChannels {
    pub uplink: FrequencyChannel,
    pub downlink: FrequencyChannel,
    pub si: FrequencyChannel,
}

impl LinkChannels {
    pub fn n_subcarriers(&self) -> usize {
        self.uplink.n_subcarriers()
    }

    pub fn n_ue_tx(&self) -> usize {
        self.uplink.n_tx()
    }

    pub fn n_bs_rx(&self) -> usize {
        self.uplink.n_rx()
    }

    pub fn n_bs_tx(&self) -> usize {
        self.downlink.n_tx()
    }

    pub fn n_ue_rx(&self) -> usize {
        self.downlink.n_rx()
    }

    pub fn validate(&self) -> Result<()> {
        const OP: &str = "LinkChannels";
        let k = self.uplink.n_subcarriers();
        if k == 0 || self.downlink.n_subcarriers() != k || self.si.n_subcarriers() != k {
            return Err(Error::dim(OP, "subcarrier counts differ or are zero"));
        }
        let consistent = |f: &FrequencyChannel| f.subcarriers.iter().all(|h| h.shape() == f.subcarriers[0].shape());
        if !consistent(&self.uplink) || !consistent(&self.downlink) || !consistent(&self.si) {
            return Err(Error::dim(OP, "subcarrier matrices of one link differ in shape"));
        }
        if self.si.n_rx() != self.n_bs_rx() || self.si.n_tx() != self.n_bs_tx() {
            return Err(Error::dim(
                OP,
                format!(
                    "SI channel {}x{} vs BS arrays {}x{}",
                    self.si.n_rx(),
                    self.si.n_tx(),
                    self.n_bs_rx(),
                    self.n_bs_tx()
                ),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Initialization {
    /// Dominant right singular vectors of each link's channel.
    Svd,
    /// Seeded random orthonormal (or random-phase RF) starting points.
    RandomUnitary { seed: u64 },
}

/// Which SI channel the analog stage of the hybrid design must null.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AnalogNullTarget {
    /// Only the lowest-energy SI subcarrier `G_s`.
    WeakestSubcarrier,
    /// The SI seen through the RF factors on every subcarrier.
    AllSubcarriers,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub n_outer: usize,
    pub n_inner: usize,
    pub n_streams: usize,
    /// RF chains at the BS (each of its TX and RX arrays).
    pub n_rf: usize,
    /// RF chains at the users; defaults to `min(n_rf, user antennas)`.
    pub n_rf_ue: Option<usize>,
    pub init: Initialization,
    pub null_target: AnalogNullTarget,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            n_outer: 10,
            n_inner: 50,
            n_streams: 2,
            n_rf: 2,
            n_rf_ue: None,
            init: Initialization::Svd,
            null_target: AnalogNullTarget::AllSubcarriers,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self, ch: &LinkChannels) -> Result<()> {
        const OP: &str = "SolverConfig";
        if self.n_outer == 0 || self.n_inner == 0 {
            return Err(Error::arg(OP, "n_outer and n_inner must be >= 1"));
        }
        if self.n_streams == 0 || self.n_streams > self.n_rf {
            return Err(Error::arg(OP, format!("need 1 <= N_s ({}) <= N_RF ({})", self.n_streams, self.n_rf)));
        }
        let bs = ch.n_bs_rx().min(ch.n_bs_tx());
        if self.n_rf > bs {
            return Err(Error::arg(OP, format!("N_RF {} exceeds BS antennas {bs}", self.n_rf)));
        }
        let ue = ch.n_ue_tx().min(ch.n_ue_rx());
        let rf_ue = self.rf_chains_ue(ue);
        if self.n_streams > rf_ue || rf_ue > ue {
            return Err(Error::arg(
                OP,
                format!("user side needs N_s ({}) <= N_RF,UE ({rf_ue}) <= antennas ({ue})", self.n_streams),
            ));
        }
        Ok(())
    }

    pub fn rf_chains_ue(&self, ue_antennas: usize) -> usize {
        self.n_rf_ue.unwrap_or_else(|| self.n_rf.min(ue_antennas))
    }
}

/// Per-subcarrier beamformers, each `antennas × N_s`.
#[derive(Debug, Clone, PartialEq)]
pub struct DigitalBeamformerSet {
    pub f_ue: Vec<CMatrix>,
    pub w_bs: Vec<CMatrix>,
    pub f_bs: Vec<CMatrix>,
    pub w_ue: Vec<CMatrix>,
}

impl DigitalBeamformerSet {
    pub fn n_subcarriers(&self) -> usize {
        self.w_bs.len()
    }

    /// Largest `‖X*X - I‖_F` over all beamformers.
    pub fn max_orthonormality_error(&self) -> f64 {
        [&self.f_ue, &self.w_bs, &self.f_bs, &self.w_ue]
            .iter()
            .flat_map(|set| set.iter())
            .map(numerics::orthonormality_error)
            .fold(0.0, f64::max)
    }

    /// `‖W_BS[k]* H_s[k] F_BS[k]‖_F` per subcarrier.
    pub fn residual_si(&self, si: &FrequencyChannel) -> Vec<f64> {
        (0..self.n_subcarriers())
            .map(|k| (self.w_bs[k].adjoint() * &si.subcarriers[k] * &self.f_bs[k]).norm())
            .collect()
    }

    fn uniform(k: usize, f_ue: CMatrix, w_bs: CMatrix, f_bs: CMatrix, w_ue: CMatrix) -> Self {
        DigitalBeamformerSet { f_ue: vec![f_ue; k], w_bs: vec![w_bs; k], f_bs: vec![f_bs; k], w_ue: vec![w_ue; k] }
    }
}

/// Frequency-flat RF factors plus per-subcarrier baseband factors.
#[derive(Debug, Clone, PartialEq)]
pub struct HybridBeamformerSet {
    pub f_rf_ue: CMatrix,
    pub w_rf_bs: CMatrix,
    pub f_rf_bs: CMatrix,
    pub w_rf_ue: CMatrix,
    pub f_bb_ue: Vec<CMatrix>,
    pub w_bb_bs: Vec<CMatrix>,
    pub f_bb_bs: Vec<CMatrix>,
    pub w_bb_ue: Vec<CMatrix>,
    pub composed: DigitalBeamformerSet,
}

impl HybridBeamformerSet {
    /// Largest `||x| - 1|` over all RF entries.
    pub fn max_unit_modulus_error(&self) -> f64 {
        [&self.f_rf_ue, &self.w_rf_bs, &self.f_rf_bs, &self.w_rf_ue]
            .iter()
            .flat_map(|m| m.iter())
            .map(|z| (z.norm() - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

/// Diagnostics gathered while designing one realization.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DesignReport {
    /// Baseband calls where `N_s > M - rank(C)`, so exact ZF was impossible.
    pub zf_infeasible: usize,
    /// Analog ZF steps where the SI constraint left fewer than `N_RF` free dimensions.
    pub analog_null_truncated: usize,
    /// Zero entries hit during unit-modulus normalization.
    pub degenerate_phase_entries: usize,
    /// `‖W_BS[k]* H_s[k] F_BS[k]‖_F` per subcarrier of the returned design.
    pub residual_si: Vec<f64>,
    /// `‖W_BS,RF* G_s F_BS,RF‖_F` for hybrid designs.
    pub analog_residual_si: Option<f64>,
    /// `(uplink, downlink, SI)` subcarriers chosen as `G_u`, `G_d`, `G_s`.
    pub selected_subcarriers: Option<(usize, usize, usize)>,
}

#[derive(Debug, Clone)]
pub struct DigitalDesign {
    pub beams: DigitalBeamformerSet,
    pub report: DesignReport,
}

#[derive(Debug, Clone)]
pub struct HybridDesign {
    pub beams: HybridBeamformerSet,
    pub report: DesignReport,
}

/// Result of [`baseband_zf`].
#[derive(Debug, Clone)]
pub struct ZfBeamformer {
    pub x: CMatrix,
    /// False when `n > M - rank(C)`; the returned `X` then leaks SI.
    pub feasible: bool,
}

/// `n` dominant left singular vectors of `P⊥ A`, with `P⊥ = I - C C†`.
///
/// When `P⊥ A` has fewer than `n` significant directions the basis is completed
/// inside `range(P⊥)` first, so ZF holds whenever it is feasible at all.
pub fn baseband_zf(a: &CMatrix, c: &CMatrix, n: usize) -> Result<ZfBeamformer> {
    const OP: &str = "baseband_zf";
    let m = a.nrows();
    if c.nrows() != m {
        return Err(Error::dim(OP, format!("A has {m} rows, C has {}", c.nrows())));
    }
    if n == 0 || n > m {
        return Err(Error::arg(OP, format!("cannot build {n} columns in dimension {m}")));
    }
    let p = null_projector(c)?;
    let feasible = n + numerical_rank(c)? <= m;
    let pa = &p * a;
    let dec = svd(&pa)?;
    let floor = 1e-10 * a.norm().max(f64::MIN_POSITIVE);
    let keep = dec.s.iter().take_while(|&&s| s > floor).count().min(n);
    let head = dec.u.columns(0, keep).into_owned();
    let x = if keep == n { head } else { complete_orthonormal(&head, &p, n)? };
    Ok(ZfBeamformer { x, feasible })
}

fn initial_digital(h: &CMatrix, n: usize, init: Initialization, salt: u64) -> Result<CMatrix> {
    match init {
        Initialization::Svd => numerics::dominant_right_singular_vectors(h, n),
        Initialization::RandomUnitary { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15));
            nearest_orthonormal(&random_gaussian(h.ncols(), n, &mut rng))
        }
    }
}

fn random_gaussian(m: usize, n: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    CMatrix::from_fn(m, n, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        num_complex::Complex64::new(re, im)
    })
}

/// Cyclic ZF maximization with full-digital beamformers.
pub fn full_digital_design(ch: &LinkChannels, cfg: &SolverConfig) -> Result<DigitalDesign> {
    full_digital_design_traced(ch, cfg, |_, _| {})
}

/// [`full_digital_design`] with a callback after every outer iteration.
///
/// Subcarriers are independent, so iterating `t` outside `k` yields the same
/// beamformers as the per-subcarrier order while exposing whole-band snapshots.
pub fn full_digital_design_traced(
    ch: &LinkChannels,
    cfg: &SolverConfig,
    mut observer: impl FnMut(usize, &DigitalBeamformerSet),
) -> Result<DigitalDesign> {
    ch.validate()?;
    let ns = cfg.n_streams;
    if ns == 0 || ns > ch.n_ue_tx().min(ch.n_ue_rx()) || ns > ch.n_bs_rx().min(ch.n_bs_tx()) {
        return Err(Error::arg("full_digital_design", format!("{ns} streams do not fit the arrays")));
    }
    if cfg.n_outer == 0 {
        return Err(Error::arg("full_digital_design", "n_outer must be >= 1"));
    }
    let kk = ch.n_subcarriers();
    let mut f_bs = Vec::with_capacity(kk);
    let mut f_ue = Vec::with_capacity(kk);
    for k in 0..kk {
        f_bs.push(initial_digital(&ch.downlink.subcarriers[k], ns, cfg.init, 2 * k as u64)?);
        f_ue.push(initial_digital(&ch.uplink.subcarriers[k], ns, cfg.init, 2 * k as u64 + 1)?);
    }
    let mut beams = DigitalBeamformerSet {
        w_bs: vec![CMatrix::zeros(ch.n_bs_rx(), ns); kk],
        w_ue: vec![CMatrix::zeros(ch.n_ue_rx(), ns); kk],
        f_bs,
        f_ue,
    };
    let mut report = DesignReport::default();
    for t in 0..cfg.n_outer {
        for k in 0..kk {
            let hu = &ch.uplink.subcarriers[k];
            let hd = &ch.downlink.subcarriers[k];
            let hs = &ch.si.subcarriers[k];
            let w = baseband_zf(&(hu * &beams.f_ue[k]), &(hs * &beams.f_bs[k]), ns)?;
            report.zf_infeasible += usize::from(!w.feasible);
            beams.w_bs[k] = w.x;
            beams.f_ue[k] = dominant_left_singular_vectors(&(hu.adjoint() * &beams.w_bs[k]), ns)?;
            beams.w_ue[k] = dominant_left_singular_vectors(&(hd * &beams.f_bs[k]), ns)?;
            let f = baseband_zf(&(hd.adjoint() * &beams.w_ue[k]), &(hs.adjoint() * &beams.w_bs[k]), ns)?;
            report.zf_infeasible += usize::from(!f.feasible);
            beams.f_bs[k] = f.x;
        }
        observer(t, &beams);
    }
    report.residual_si = beams.residual_si(&ch.si);
    Ok(DigitalDesign { beams, report })
}

/// Result of [`analog_alternating_projection`].
#[derive(Debug, Clone)]
pub struct AnalogBeamformer {
    pub x_rf: CMatrix,
    pub degenerate_entries: usize,
    /// Set when only the strongest directions of `C` were nulled.
    pub truncated: bool,
}

/// Alternates between the ZF subspace `range(I - C C†)` and the unit-modulus set,
/// starting from the `l` dominant left singular vectors of `a`.
///
/// Unit-modulus vectors generically exist in a subspace only when its dimension is
/// at least `(M + 1) / 2`, so at most `M - max(l, ⌈(M + 1) / 2⌉)` of the strongest
/// left singular directions of `C` are nulled.
pub fn analog_alternating_projection(a: &CMatrix, c: &CMatrix, l: usize, n_inner: usize) -> Result<AnalogBeamformer> {
    const OP: &str = "analog_alternating_projection";
    let m = a.nrows();
    if c.nrows() != m {
        return Err(Error::dim(OP, format!("A has {m} rows, C has {}", c.nrows())));
    }
    if n_inner == 0 {
        return Err(Error::arg(OP, "n_inner must be >= 1"));
    }
    if l == 0 || l > m {
        return Err(Error::arg(OP, format!("{l} RF chains for {m} antennas")));
    }
    let mut x_rf = left_basis(a, l)?;
    let (basis, truncated) = if c.ncols() == 0 {
        (CMatrix::zeros(m, 0), false)
    } else {
        let dec = svd(c)?;
        let r = dec.rank(PINV_RTOL);
        let keep = r.min(m - l.max(m / 2 + 1));
        (dec.u.columns(0, keep).into_owned(), r > keep)
    };
    let basis_h = basis.adjoint();
    let mut degenerate_entries = 0;
    for _ in 0..n_inner {
        let y = &x_rf - &basis * (&basis_h * &x_rf);
        let (next, zeros) = phase_only(&y);
        degenerate_entries += zeros;
        x_rf = next;
    }
    Ok(AnalogBeamformer { x_rf, degenerate_entries, truncated })
}

/// Closed-form baseband factor `V_RF S_RF⁻¹ Q` for a given RF matrix, where `Q`
/// holds the `n` dominant left singular vectors of `U_RF* A`.
pub fn digital_factor(x_rf: &CMatrix, a: &CMatrix, n: usize) -> Result<CMatrix> {
    const OP: &str = "digital_factor";
    if x_rf.nrows() != a.nrows() {
        return Err(Error::dim(OP, format!("X_RF has {} rows, A has {}", x_rf.nrows(), a.nrows())));
    }
    let dec = svd(x_rf)?;
    let smax = dec.s.first().copied().unwrap_or(0.0);
    let smin = dec.s.last().copied().unwrap_or(0.0);
    if x_rf.ncols() > x_rf.nrows() || smax == 0.0 || smin <= RF_RANK_RTOL * smax {
        let ratio = if smax > 0.0 { smin / smax } else { 0.0 };
        return Err(Error::RankDeficient { op: OP, ratio });
    }
    let proj = dec.u.adjoint() * a;
    let q = left_basis(&proj, n)?;
    let mut v_sinv = dec.v.clone();
    for (j, s) in dec.s.iter().enumerate() {
        v_sinv.column_mut(j).scale_mut(1.0 / s);
    }
    Ok(v_sinv * q)
}

/// Unit-modulus projection of the `l` dominant left singular vectors of `a`.
fn phase_projected_basis(a: &CMatrix, l: usize, report: &mut DesignReport) -> Result<CMatrix> {
    let (x, zeros) = phase_only(&left_basis(a, l)?);
    report.degenerate_phase_entries += zeros;
    Ok(x)
}

fn random_phase_matrix(m: usize, n: usize, seed: u64) -> CMatrix {
    use rand::Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    CMatrix::from_fn(m, n, |_, _| num_complex::Complex64::from_polar(1.0, rng.random_range(0.0..2.0 * PI)))
}

/// Hybrid design: alternating-projection analog factors nested in the cyclic ZF
/// maximization, with closed-form baseband factors.
pub fn hybrid_design(ch: &LinkChannels, cfg: &SolverConfig) -> Result<HybridDesign> {
    ch.validate()?;
    cfg.validate(ch)?;
    let kk = ch.n_subcarriers();
    let ns = cfg.n_streams;
    let n_rf = cfg.n_rf;
    let n_rf_ue = cfg.rf_chains_ue(ch.n_ue_tx().min(ch.n_ue_rx()));
    let mut report = DesignReport::default();

    let ku = ch.uplink.strongest_subcarrier();
    let kd = ch.downlink.strongest_subcarrier();
    let ks = ch.si.weakest_subcarrier();
    report.selected_subcarriers = Some((ku, kd, ks));
    let gu = &ch.uplink.subcarriers[ku];
    let gd = &ch.downlink.subcarriers[kd];
    let gs = &ch.si.subcarriers[ks];
    let hu = &ch.uplink.subcarriers;
    let hd = &ch.downlink.subcarriers;
    let hs = &ch.si.subcarriers;

    let (mut f_rf_bs, mut f_rf_ue) = match cfg.init {
        Initialization::Svd => (
            phase_projected_basis(&gd.adjoint(), n_rf, &mut report)?,
            phase_projected_basis(&gu.adjoint(), n_rf_ue, &mut report)?,
        ),
        Initialization::RandomUnitary { seed } => (
            random_phase_matrix(ch.n_bs_tx(), n_rf, seed),
            random_phase_matrix(ch.n_ue_tx(), n_rf_ue, seed ^ 0x5555_5555),
        ),
    };
    let mut w_rf_bs = CMatrix::zeros(ch.n_bs_rx(), n_rf);
    let mut w_rf_ue = CMatrix::zeros(ch.n_ue_rx(), n_rf_ue);

    let mut f_bb_bs = Vec::with_capacity(kk);
    let mut f_bb_ue = Vec::with_capacity(kk);
    for k in 0..kk {
        f_bb_bs.push(digital_factor(&f_rf_bs, &hd[k].adjoint(), ns)?);
        f_bb_ue.push(digital_factor(&f_rf_ue, &hu[k].adjoint(), ns)?);
    }
    let mut w_bb_bs = vec![CMatrix::zeros(n_rf, ns); kk];
    let mut w_bb_ue = vec![CMatrix::zeros(n_rf_ue, ns); kk];
    let mut f_bs: Vec<CMatrix> = (0..kk).map(|k| &f_rf_bs * &f_bb_bs[k]).collect();
    let mut f_ue: Vec<CMatrix> = (0..kk).map(|k| &f_rf_ue * &f_bb_ue[k]).collect();
    let mut w_bs = vec![CMatrix::zeros(ch.n_bs_rx(), ns); kk];
    let mut w_ue = vec![CMatrix::zeros(ch.n_ue_rx(), ns); kk];

    let si_span = match cfg.null_target {
        AnalogNullTarget::WeakestSubcarrier => vec![gs.clone()],
        AnalogNullTarget::AllSubcarriers => delay_taps(hs),
    };
    let si_through = |rf: &CMatrix, adjoint: bool| -> CMatrix {
        let blocks: Vec<CMatrix> =
            si_span.iter().map(|h| if adjoint { h.adjoint() * rf } else { h * rf }).collect();
        hstack(&blocks)
    };

    for k in 0..kk {
        for _ in 0..cfg.n_outer {
            let w = analog_alternating_projection(&(gu * &f_ue[k]), &si_through(&f_rf_bs, false), n_rf, cfg.n_inner)?;
            report.degenerate_phase_entries += w.degenerate_entries;
            report.analog_null_truncated += usize::from(w.truncated);
            w_rf_bs = w.x_rf;
            w_bb_bs[k] = digital_factor(&w_rf_bs, &(&hu[k] * &f_ue[k]), ns)?;
            w_bs[k] = &w_rf_bs * &w_bb_bs[k];

            w_rf_ue = phase_projected_basis(&(gd * &f_bs[k]), n_rf_ue, &mut report)?;
            w_bb_ue[k] = digital_factor(&w_rf_ue, &(&hd[k] * &f_bs[k]), ns)?;
            w_ue[k] = &w_rf_ue * &w_bb_ue[k];

            f_rf_ue = phase_projected_basis(&(gu.adjoint() * &w_bs[k]), n_rf_ue, &mut report)?;
            f_bb_ue[k] = digital_factor(&f_rf_ue, &(hu[k].adjoint() * &w_bs[k]), ns)?;
            f_ue[k] = &f_rf_ue * &f_bb_ue[k];

            let f = analog_alternating_projection(
                &(gd.adjoint() * &w_ue[k]),
                &si_through(&w_rf_bs, true),
                n_rf,
                cfg.n_inner,
            )?;
            report.degenerate_phase_entries += f.degenerate_entries;
            report.analog_null_truncated += usize::from(f.truncated);
            f_rf_bs = f.x_rf;
            f_bb_bs[k] = digital_factor(&f_rf_bs, &(hd[k].adjoint() * &w_ue[k]), ns)?;
            f_bs[k] = &f_rf_bs * &f_bb_bs[k];
        }
    }

    // The RF factors kept changing while later subcarriers were processed, so the
    // baseband factors of earlier subcarriers are re-derived against the final RF.
    for k in 0..kk {
        for _ in 0..cfg.n_outer {
            w_bb_bs[k] = digital_factor(&w_rf_bs, &(&hu[k] * &f_ue[k]), ns)?;
            w_bs[k] = &w_rf_bs * &w_bb_bs[k];
            w_bb_ue[k] = digital_factor(&w_rf_ue, &(&hd[k] * &f_bs[k]), ns)?;
            w_ue[k] = &w_rf_ue * &w_bb_ue[k];
            f_bb_ue[k] = digital_factor(&f_rf_ue, &(hu[k].adjoint() * &w_bs[k]), ns)?;
            f_ue[k] = &f_rf_ue * &f_bb_ue[k];
            f_bb_bs[k] = digital_factor(&f_rf_bs, &(hd[k].adjoint() * &w_ue[k]), ns)?;
            f_bs[k] = &f_rf_bs * &f_bb_bs[k];
        }
    }

    let composed = DigitalBeamformerSet { f_ue, w_bs, f_bs, w_ue };
    report.residual_si = composed.residual_si(&ch.si);
    report.analog_residual_si = Some((w_rf_bs.adjoint() * gs * &f_rf_bs).norm());
    let beams = HybridBeamformerSet { f_rf_ue, w_rf_bs, f_rf_bs, w_rf_ue, f_bb_ue, w_bb_bs, f_bb_bs, w_bb_ue, composed };
    Ok(HybridDesign { beams, report })
}

/// Nonzero inverse-DFT taps of `hs`. Since the inverse DFT is invertible,
/// `[T_l X]_l` spans the same column space as `[H[k] X]_k` for any `X`.
fn delay_taps(hs: &[CMatrix]) -> Vec<CMatrix> {
    let kk = hs.len();
    let taps: Vec<CMatrix> = (0..kk)
        .map(|l| {
            let mut acc = CMatrix::zeros(hs[0].nrows(), hs[0].ncols());
            for (k, h) in hs.iter().enumerate() {
                let phase = 2.0 * PI * ((k * l) % kk) as f64 / kk as f64;
                acc += h * num_complex::Complex64::from_polar(1.0, phase);
            }
            acc
        })
        .collect();
    let max = taps.iter().map(|t| t.norm()).fold(0.0, f64::max);
    if max == 0.0 {
        return vec![hs[0].clone()];
    }
    taps.into_iter().filter(|t| t.norm() > PINV_RTOL * max).collect()
}

fn hstack(blocks: &[CMatrix]) -> CMatrix {
    let rows = blocks[0].nrows();
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = CMatrix::zeros(rows, cols);
    let mut at = 0;
    for b in blocks {
        out.view_mut((0, at), b.shape()).copy_from(b);
        at += b.ncols();
    }
    out
}

/// Array layout and per-link ray parameters needed by the geometric baselines.
#[derive(Debug, Clone)]
pub struct LinkGeometry {
    pub ue: ArrayGeometry,
    pub bs_tx: ArrayGeometry,
    pub bs_rx: ArrayGeometry,
    pub uplink_rays: RayParams,
    pub downlink_rays: RayParams,
}

fn analog_only(x_rf: &CMatrix) -> Result<CMatrix> {
    nearest_orthonormal(x_rf)
}

fn baseline_report(beams: &DigitalBeamformerSet, ch: &LinkChannels) -> DesignReport {
    DesignReport { residual_si: beams.residual_si(&ch.si), ..DesignReport::default() }
}

fn steering_matrix(geom: &ArrayGeometry, angles: &[f64]) -> CMatrix {
    let cols: Vec<CMatrix> = angles.iter().map(|&a| array_response(geom, a)).collect();
    hstack(&cols) * numerics::c64((geom.n_elements as f64).sqrt())
}

/// Beams pointed at the `n_s` strongest clusters of each link (phase-only).
pub fn baseline_beamsteering(ch: &LinkChannels, geo: &LinkGeometry, cfg: &SolverConfig) -> Result<DigitalDesign> {
    ch.validate()?;
    let ns = cfg.n_streams;
    let pick = |rays: &RayParams| -> Vec<usize> {
        let order = rays.clusters_by_power();
        (0..ns).map(|i| order[i % order.len()]).collect()
    };
    let up = pick(&geo.uplink_rays);
    let down = pick(&geo.downlink_rays);
    let aoa = |rays: &RayParams, idx: &[usize]| idx.iter().map(|&i| rays.clusters[i].aoa).collect::<Vec<_>>();
    let aod = |rays: &RayParams, idx: &[usize]| idx.iter().map(|&i| rays.clusters[i].aod).collect::<Vec<_>>();
    let w_bs = analog_only(&steering_matrix(&geo.bs_rx, &aoa(&geo.uplink_rays, &up)))?;
    let f_ue = analog_only(&steering_matrix(&geo.ue, &aod(&geo.uplink_rays, &up)))?;
    let f_bs = analog_only(&steering_matrix(&geo.bs_tx, &aod(&geo.downlink_rays, &down)))?;
    let w_ue = analog_only(&steering_matrix(&geo.ue, &aoa(&geo.downlink_rays, &down)))?;
    let beams = DigitalBeamformerSet::uniform(ch.n_subcarriers(), f_ue, w_bs, f_bs, w_ue);
    let report = baseline_report(&beams, ch);
    Ok(DigitalDesign { beams, report })
}

/// Entrywise phases of the dominant singular vectors of each link's strongest subcarrier.
pub fn baseline_svd(ch: &LinkChannels, cfg: &SolverConfig) -> Result<DigitalDesign> {
    ch.validate()?;
    let ns = cfg.n_streams;
    let gu = &ch.uplink.subcarriers[ch.uplink.strongest_subcarrier()];
    let gd = &ch.downlink.subcarriers[ch.downlink.strongest_subcarrier()];
    let phase = |x: CMatrix| phase_only(&x).0;
    let w_bs = analog_only(&phase(dominant_left_singular_vectors(gu, ns)?))?;
    let f_ue = analog_only(&phase(numerics::dominant_right_singular_vectors(gu, ns)?))?;
    let w_ue = analog_only(&phase(dominant_left_singular_vectors(gd, ns)?))?;
    let f_bs = analog_only(&phase(numerics::dominant_right_singular_vectors(gd, ns)?))?;
    let beams = DigitalBeamformerSet::uniform(ch.n_subcarriers(), f_ue, w_bs, f_bs, w_ue);
    let report = baseline_report(&beams, ch);
    Ok(DigitalDesign { beams, report })
}

/// Uniform steering grid over `[-90°, 90°]` with [`ANGLE_GRID_STEP_DEG`] spacing.
pub fn angle_grid() -> Vec<f64> {
    let n = (180.0 / ANGLE_GRID_STEP_DEG).round() as usize;
    (0..=n).map(|i| (-90.0 + i as f64 * ANGLE_GRID_STEP_DEG).to_radians()).collect()
}

/// Greedy exhaustive search of (receive, transmit) steering pairs maximizing
/// `Σ_k |a_rx* H[k] a_tx|²`; later streams skip angles already in use.
fn search_link(h: &FrequencyChannel, rx: &ArrayGeometry, tx: &ArrayGeometry, ns: usize) -> (Vec<f64>, Vec<f64>) {
    let grid = angle_grid();
    let a_rx = steering_matrix(rx, &grid) * numerics::c64(1.0 / (rx.n_elements as f64).sqrt());
    let a_tx = steering_matrix(tx, &grid) * numerics::c64(1.0 / (tx.n_elements as f64).sqrt());
    let n = grid.len();
    let mut gain = nalgebra::DMatrix::<f64>::zeros(n, n);
    for hk in &h.subcarriers {
        let b = a_rx.adjoint() * hk * &a_tx;
        gain += b.map(|z| z.norm_sqr());
    }
    let mut used_rx: Vec<usize> = Vec::new();
    let mut used_tx: Vec<usize> = Vec::new();
    for _ in 0..ns {
        let mut best = None;
        for i in 0..n {
            if used_rx.contains(&i) {
                continue;
            }
            for j in 0..n {
                if used_tx.contains(&j) {
                    continue;
                }
                if best.is_none_or(|(_, _, g)| gain[(i, j)] > g) {
                    best = Some((i, j, gain[(i, j)]));
                }
            }
        }
        let (i, j, _) = best.expect("grid larger than stream count");
        used_rx.push(i);
        used_tx.push(j);
    }
    (used_rx.iter().map(|&i| grid[i]).collect(), used_tx.iter().map(|&j| grid[j]).collect())
}

/// Exhaustive steering-grid search per link, ignoring SI.
pub fn baseline_anglesearch(ch: &LinkChannels, geo: &LinkGeometry, cfg: &SolverConfig) -> Result<DigitalDesign> {
    ch.validate()?;
    let ns = cfg.n_streams;
    let (up_rx, up_tx) = search_link(&ch.uplink, &geo.bs_rx, &geo.ue, ns);
    let (down_rx, down_tx) = search_link(&ch.downlink, &geo.ue, &geo.bs_tx, ns);
    let w_bs = analog_only(&steering_matrix(&geo.bs_rx, &up_rx))?;
    let f_ue = analog_only(&steering_matrix(&geo.ue, &up_tx))?;
    let w_ue = analog_only(&steering_matrix(&geo.ue, &down_rx))?;
    let f_bs = analog_only(&steering_matrix(&geo.bs_tx, &down_tx))?;
    let beams = DigitalBeamformerSet::uniform(ch.n_subcarriers(), f_ue, w_bs, f_bs, w_ue);
    let report = baseline_report(&beams, ch);
    Ok(DigitalDesign { beams, report })
}

/// Interference-free bound `(1/K) Σ_k Σ_{ℓ<N_s} log2(1 + SNR/(K N_s) σ_ℓ(H[k])²)`.
pub fn upper_bound_rate(h: &FrequencyChannel, snr: f64, n_s: usize) -> Result<f64> {
    let kk = h.n_subcarriers();
    if kk == 0 {
        return Err(Error::arg("upper_bound_rate", "no subcarriers"));
    }
    if n_s > h.n_rx().min(h.n_tx()) {
        return Err(Error::arg("upper_bound_rate", format!("{n_s} streams exceed channel rank bound")));
    }
    let scale = snr / (kk * n_s) as f64;
    let mut total = 0.0;
    for hk in &h.subcarriers {
        let dec = svd(hk)?;
        total += dec.s.iter().take(n_s).map(|s| (1.0 + scale * s * s).log2()).sum::<f64>();
    }
    Ok(total / kk as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{Cluster, Ray};
    use crate::numerics::{c64, identity, orthonormality_error};
    use rand_chacha::ChaCha8Rng;

    fn random(m: usize, n: usize, seed: u64) -> CMatrix {
        random_gaussian(m, n, &mut ChaCha8Rng::seed_from_u64(seed))
    }

    fn channels(m_bs: usize, m_ue: usize, kk: usize, seed: u64) -> LinkChannels {
        let mk = |r, c, s| FrequencyChannel { subcarriers: (0..kk).map(|k| random(r, c, s * 100 + k as u64)).collect() };
        LinkChannels { uplink: mk(m_bs, m_ue, seed), downlink: mk(m_ue, m_bs, seed + 1), si: mk(m_bs, m_bs, seed + 2) }
    }

    #[test]
    fn baseband_zf_without_interference_is_plain_svd() {
        let a = random(6, 2, 1);
        let x = baseband_zf(&a, &CMatrix::zeros(6, 2), 2).unwrap();
        assert!(x.feasible);
        assert!((x.x - dominant_left_singular_vectors(&a, 2).unwrap()).norm() < 1e-12);
    }

    #[test]
    fn baseband_zf_target_inside_interference() {
        let a = random(2, 1, 2);
        let x = baseband_zf(&a, &a, 1).unwrap();
        assert!(x.feasible);
        assert!((x.x.adjoint() * &a).norm() < 1e-12 * a.norm());
        assert!(orthonormality_error(&x.x) < 1e-12);
    }

    #[test]
    fn baseband_zf_seeded_residual() {
        let a = random(16, 2, 3);
        let c = random(16, 2, 4);
        let x = baseband_zf(&a, &c, 2).unwrap();
        assert!((x.x.adjoint() * &c).norm() <= 1e-8 * c.norm());
        assert!(orthonormality_error(&x.x) <= 1e-10);
    }

    #[test]
    fn baseband_zf_flags_infeasible() {
        let a = random(4, 2, 5);
        let c = random(4, 3, 6);
        let x = baseband_zf(&a, &c, 2).unwrap();
        assert!(!x.feasible);
        assert!(orthonormality_error(&x.x) < 1e-10);
    }

    #[test]
    fn full_digital_small_instance_nulls_si() {
        let ch = channels(4, 2, 2, 10);
        let cfg = SolverConfig { n_streams: 1, n_rf: 1, ..SolverConfig::default() };
        let d = full_digital_design(&ch, &cfg).unwrap();
        assert_eq!(d.report.zf_infeasible, 0);
        for (k, r) in d.report.residual_si.iter().enumerate() {
            assert!(*r <= 1e-8 * ch.si.subcarriers[k].norm());
        }
        assert!(d.beams.max_orthonormality_error() <= DIGITAL_ORTHONORMAL_TOL);
    }

    #[test]
    fn full_digital_rejects_mismatched_dimensions() {
        let mut ch = channels(4, 2, 2, 11);
        ch.si = FrequencyChannel { subcarriers: vec![random(3, 4, 1), random(3, 4, 2)] };
        assert!(full_digital_design(&ch, &SolverConfig::default()).is_err());
    }

    #[test]
    fn random_init_is_seeded() {
        let ch = channels(6, 3, 2, 12);
        let cfg = SolverConfig { init: Initialization::RandomUnitary { seed: 4 }, ..SolverConfig::default() };
        let a = full_digital_design(&ch, &cfg).unwrap();
        let b = full_digital_design(&ch, &cfg).unwrap();
        assert_eq!(a.beams, b.beams);
    }

    #[test]
    fn analog_projection_without_interference() {
        let a = random(8, 2, 20);
        let one = analog_alternating_projection(&a, &CMatrix::zeros(8, 2), 2, 1).unwrap();
        let expected = phase_only(&dominant_left_singular_vectors(&a, 2).unwrap()).0;
        assert!((&one.x_rf - &expected).norm() < 1e-14);
        let many = analog_alternating_projection(&a, &CMatrix::zeros(8, 2), 2, 7).unwrap();
        assert!((&many.x_rf - &expected).norm() < 1e-14);
    }

    #[test]
    fn analog_projection_unit_modulus() {
        let a = random(16, 2, 21);
        let c = random(16, 2, 22);
        let x = analog_alternating_projection(&a, &c, 2, 13).unwrap();
        assert!(x.x_rf.iter().all(|z| (z.norm() - 1.0).abs() <= UNIT_MODULUS_TOL));
        // l beyond the column count of A
        let x = analog_alternating_projection(&a, &c, 4, 3).unwrap();
        assert_eq!(x.x_rf.shape(), (16, 4));
    }

    #[test]
    fn analog_projection_truncates_oversized_constraint() {
        let a = random(8, 2, 23);
        // rank 3 leaves 5 free dimensions: enough, nothing truncated
        let x = analog_alternating_projection(&a, &random(8, 3, 24), 2, 4).unwrap();
        assert!(!x.truncated);
        // rank 6 would leave 2 < 8 / 2 + 1: only the 3 strongest directions are nulled
        let c = random(8, 6, 25);
        let x = analog_alternating_projection(&a, &c, 2, 200).unwrap();
        assert!(x.truncated);
        let u = svd(&c).unwrap().u.columns(0, 3).into_owned();
        assert!((u.adjoint() * &x.x_rf).norm() < 1e-3 * x.x_rf.norm());
        assert!(numerical_rank(&x.x_rf).unwrap() == 2);
    }

    #[test]
    fn delay_taps_span_matches_subcarrier_stack() {
        let taps: Vec<CMatrix> = (0..3).map(|l| random(10, 10, 70 + l)).collect();
        let hs: Vec<CMatrix> = (0..8).map(|k| numerics::dft_taps(&taps, k, 8).unwrap()).collect();
        let reduced = delay_taps(&hs);
        assert_eq!(reduced.len(), 3);
        let x = random(10, 2, 80);
        let full = hstack(&hs.iter().map(|h| h * &x).collect::<Vec<_>>());
        let short = hstack(&reduced.iter().map(|h| h * &x).collect::<Vec<_>>());
        let gram = |m: &CMatrix| {
            let g = m * m.adjoint();
            let n = g.norm();
            g / c64(n)
        };
        assert!((gram(&full) - gram(&short)).norm() < 1e-12);
    }

    #[test]
    fn digital_factor_cases() {
        let q = nearest_orthonormal(&random(8, 3, 30)).unwrap();
        let a = random(8, 2, 31);
        let bb = digital_factor(&q, &a, 2).unwrap();
        // both span the dominant directions of A inside range(Q)
        let expected = &q * left_basis(&(q.adjoint() * &a), 2).unwrap();
        let composed = &q * &bb;
        let proj = |x: &CMatrix| x * x.adjoint();
        assert!((proj(&composed) - proj(&expected)).norm() < 1e-10);

        let (rf, _) = phase_only(&random(16, 2, 32));
        let a = random(16, 2, 33);
        let bb = digital_factor(&rf, &a, 2).unwrap();
        assert!(orthonormality_error(&(&rf * &bb)) <= HYBRID_ORTHONORMAL_TOL);

        let mut rank1 = CMatrix::from_element(4, 2, c64(1.0));
        rank1[(0, 0)] = c64(1.0);
        assert!(matches!(digital_factor(&rank1, &random(4, 1, 1), 1), Err(Error::RankDeficient { .. })));
    }

    #[test]
    fn digital_factor_beats_phase_only_capacity() {
        let a = random(16, 2, 40);
        let (rf, _) = phase_only(&left_basis(&a, 2).unwrap());
        let bb = digital_factor(&rf, &a, 2).unwrap();
        let composed = &rf * &bb;
        let phase_cols = &rf * c64(1.0 / 4.0);
        let cap = |x: &CMatrix| {
            let e = (x.adjoint() * &a).adjoint();
            let q = x.adjoint() * x;
            numerics::logdet_capacity(&e, &q, 1.0).unwrap()
        };
        let (c1, c2) = (cap(&composed), cap(&phase_cols));
        assert!(c1 >= c2 - 1e-9 * c2, "{c1} vs {c2}");
    }

    #[test]
    fn hybrid_invariants_on_random_channels() {
        let ch = channels(8, 3, 3, 50);
        for target in [AnalogNullTarget::WeakestSubcarrier, AnalogNullTarget::AllSubcarriers] {
            let cfg = SolverConfig { n_outer: 3, n_inner: 5, null_target: target, ..SolverConfig::default() };
            let d = hybrid_design(&ch, &cfg).unwrap();
            assert!(d.beams.max_unit_modulus_error() <= UNIT_MODULUS_TOL);
            assert!(d.beams.composed.max_orthonormality_error() <= HYBRID_ORTHONORMAL_TOL);
            assert_eq!(d.report.residual_si.len(), 3);
        }
    }

    #[test]
    fn hybrid_downlink_without_si_is_phase_svd() {
        let mut ch = channels(8, 3, 2, 60);
        for h in ch.si.subcarriers.iter_mut() {
            *h = CMatrix::zeros(8, 8);
        }
        let cfg = SolverConfig { n_outer: 2, n_inner: 1, ..SolverConfig::default() };
        let d = hybrid_design(&ch, &cfg).unwrap();
        let gd = &ch.downlink.subcarriers[ch.downlink.strongest_subcarrier()];
        assert!(d.report.residual_si.iter().all(|&r| r == 0.0));
        assert!(d.beams.max_unit_modulus_error() <= UNIT_MODULUS_TOL);
        // with P⊥ = I a single inner pass is the phase of the dominant singular vectors
        let again = analog_alternating_projection(&(gd.adjoint() * &d.beams.composed.w_ue[1]), &CMatrix::zeros(8, 1), 2, 1)
            .unwrap();
        let expected = phase_only(&left_basis(&(gd.adjoint() * &d.beams.composed.w_ue[1]), 2).unwrap()).0;
        assert!((again.x_rf - expected).norm() < 1e-14);
    }

    #[test]
    fn single_ray_steering_matches_svd_phases() {
        let tx = ArrayGeometry::half_wavelength(6);
        let rx = ArrayGeometry::half_wavelength(8);
        let ue = ArrayGeometry::half_wavelength(4);
        let ray = |aoa: f64, aod: f64| RayParams {
            clusters: vec![Cluster { aoa, aod, delay: 0.0, rays: vec![Ray { aoa, aod, delay: 0.0, gain: c64(1.0) }] }],
        };
        let up = ray(0.3, -0.7);
        let down = ray(1.1, 0.2);
        let one = |r: &ArrayGeometry, t: &ArrayGeometry, p: &RayParams| {
            let c = &p.clusters[0];
            FrequencyChannel {
                subcarriers: vec![array_response(r, c.aoa) * array_response(t, c.aod).adjoint() * c64(3.0); 2],
            }
        };
        let ch = LinkChannels {
            uplink: one(&rx, &ue, &up),
            downlink: one(&ue, &tx, &down),
            si: FrequencyChannel { subcarriers: vec![CMatrix::zeros(8, 6); 2] },
        };
        let geo = LinkGeometry { ue, bs_tx: tx, bs_rx: rx, uplink_rays: up, downlink_rays: down };
        let cfg = SolverConfig { n_streams: 1, n_rf: 1, ..SolverConfig::default() };
        let bs = baseline_beamsteering(&ch, &geo, &cfg).unwrap();
        let sv = baseline_svd(&ch, &cfg).unwrap();
        for (x, y) in [(&bs.beams.w_bs[0], &sv.beams.w_bs[0]), (&bs.beams.f_bs[0], &sv.beams.f_bs[0])] {
            let overlap = (x.adjoint() * y)[(0, 0)].norm();
            assert!((overlap - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn angle_search_hits_on_grid_ray() {
        let rx = ArrayGeometry::half_wavelength(8);
        let ue = ArrayGeometry::half_wavelength(4);
        let tx = ArrayGeometry::half_wavelength(8);
        let (aoa, aod) = (20f64.to_radians(), (-36f64).to_radians());
        let rays = RayParams {
            clusters: vec![Cluster { aoa, aod, delay: 0.0, rays: vec![Ray { aoa, aod, delay: 0.0, gain: c64(1.0) }] }],
        };
        let h = |r: &ArrayGeometry, t: &ArrayGeometry| FrequencyChannel {
            subcarriers: vec![array_response(r, aoa) * array_response(t, aod).adjoint(); 2],
        };
        let ch = LinkChannels {
            uplink: h(&rx, &ue),
            downlink: h(&ue, &tx),
            si: FrequencyChannel { subcarriers: vec![CMatrix::zeros(8, 8); 2] },
        };
        let geo = LinkGeometry { ue, bs_tx: tx, bs_rx: rx, uplink_rays: rays.clone(), downlink_rays: rays };
        let cfg = SolverConfig { n_streams: 1, n_rf: 1, ..SolverConfig::default() };
        let search = baseline_anglesearch(&ch, &geo, &cfg).unwrap();
        let steer = baseline_beamsteering(&ch, &geo, &cfg).unwrap();
        let gain = |d: &DigitalDesign| (d.beams.w_bs[0].adjoint() * &ch.uplink.subcarriers[0] * &d.beams.f_ue[0]).norm();
        assert!((gain(&search) - gain(&steer)).abs() < 1e-12);
        assert!((gain(&steer) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn upper_bound_cases() {
        let eye = FrequencyChannel { subcarriers: vec![identity(2); 4] };
        // SNR / (K N_s) = 1
        assert!((upper_bound_rate(&eye, 8.0, 2).unwrap() - 2.0).abs() < 1e-14);
        let zero = FrequencyChannel { subcarriers: vec![CMatrix::zeros(3, 2); 4] };
        assert_eq!(upper_bound_rate(&zero, 10.0, 2).unwrap(), 0.0);

        let h = FrequencyChannel { subcarriers: (0..4).map(|k| random(5, 3, 70 + k)).collect() };
        let mut oracle = 0.0;
        for hk in &h.subcarriers {
            // eigenvalues of H*H are the squared singular values
            let g = hk.adjoint() * hk;
            let eig = nalgebra::DMatrix::<f64>::from_fn(6, 6, |i, j| {
                let (bi, bj) = (i / 3, j / 3);
                let z = g[(i % 3, j % 3)];
                match (bi, bj) {
                    (0, 0) | (1, 1) => z.re,
                    (0, 1) => -z.im,
                    _ => z.im,
                }
            })
            .symmetric_eigen();
            let mut ev: Vec<f64> = eig.eigenvalues.iter().copied().collect();
            ev.sort_by(|a, b| b.partial_cmp(a).unwrap());
            // real embedding duplicates each eigenvalue
            oracle += (1.0 + 3.0 / 8.0 * ev[0]).log2() + (1.0 + 3.0 / 8.0 * ev[2]).log2();
        }
        oracle /= 4.0;
        assert!((upper_bound_rate(&h, 3.0, 2).unwrap() - oracle).abs() < 1e-10);
    }
}
