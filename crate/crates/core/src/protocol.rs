//! Reversible telecloning channels and the protocols that run over them.
//!
//! The channel splits each half of one EPR pair into `M` modes through a
//! cascade of `M − 1` beam splitters, giving a primed set (from the first EPR
//! mode) and an unprimed set (from the second). A sender Bell-measures its
//! input against one or more modes of one set and broadcasts the results.
//! Modes of the other set become clones after feedforward; the remaining
//! modes of the sender's own set become phase-conjugate anticlones.

use serde::{Deserialize, Serialize};

use crate::analysis::{fidelity_vs_coherent, FidelityReport, ModeLabel};
use crate::analytic::{analytic_fidelities, AnalyticFidelities};
use crate::error::{Error, Result};
use crate::measure::combine_signals;
use crate::quad::{check_squeezing, LinearForm, ModeExpr, Network};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Primed,
    Unprimed,
}

impl Side {
    pub fn opposite(self) -> Side {
        match self {
            Side::Primed => Side::Unprimed,
            Side::Unprimed => Side::Primed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Clone,
    Anticlone,
}

/// The 2M-partite channel.
#[derive(Debug, Clone)]
pub struct TelecloneState<T> {
    pub m: usize,
    pub r: T,
    /// Squeezing of the auxiliary pair in the asymmetric variant.
    pub r_b: Option<T>,
    pub primed: Vec<ModeExpr<T>>,
    pub unprimed: Vec<ModeExpr<T>>,
    /// The EPR pair feeding the primed and unprimed cascades, in that order.
    pub epr: (ModeExpr<T>, ModeExpr<T>),
    pub aux_epr: Option<(ModeExpr<T>, ModeExpr<T>)>,
}

impl<T: Scalar> TelecloneState<T> {
    pub fn set(&self, side: Side) -> &[ModeExpr<T>] {
        match side {
            Side::Primed => &self.primed,
            Side::Unprimed => &self.unprimed,
        }
    }

    /// Largest coefficient mismatch in `Σ_j a_{RTSj} = √M · a_EPR` over both sets.
    pub fn cascade_residual(&self) -> T {
        let root_m = T::from_usize(self.m).unwrap().sqrt();
        let mut worst = T::zero();
        for (set, source) in [(&self.primed, &self.epr.0), (&self.unprimed, &self.epr.1)] {
            for (sum_of, target) in [
                (set.iter().fold(LinearForm::zero(), |acc, m| acc.axpy(T::one(), &m.x)), &source.x),
                (set.iter().fold(LinearForm::zero(), |acc, m| acc.axpy(T::one(), &m.y)), &source.y),
            ] {
                let diff = sum_of.axpy(-root_m, target);
                for (_, _, c) in diff.terms() {
                    worst = worst.max(c.abs());
                }
                worst = worst.max(diff.constant().abs());
            }
        }
        worst
    }
}

/// Splits `source` into `m` modes with equal shares via `m − 1` splitters.
fn cascade<T: Scalar>(net: &mut Network<T>, source: &ModeExpr<T>, m: usize) -> Result<Vec<ModeExpr<T>>> {
    let mut out = Vec::with_capacity(m);
    let mut carry = source.clone();
    for j in 1..m {
        let remaining = T::from_usize(m - j + 1).unwrap();
        let t = (T::one() / remaining).sqrt();
        let s = ((remaining - T::one()) / remaining).sqrt();
        let v = net.new_vacuum();
        let (tap, next) = net.mix(&carry, &v, t, s)?;
        out.push(tap);
        carry = next;
    }
    out.push(carry);
    Ok(out)
}

fn check_m(m: usize) -> Result<()> {
    if m < 2 {
        return Err(Error::InvalidParameter(format!("M must be at least 2, got {m}")));
    }
    Ok(())
}

fn verify_cascade<T: Scalar>(ts: &TelecloneState<T>) -> Result<()> {
    let residual = ts.cascade_residual();
    if residual > T::INVARIANT_TOL {
        return Err(Error::Invariant(format!("cascade modes do not sum to the EPR source (residual {residual})")));
    }
    Ok(())
}

/// Builds the symmetric 2M-partite reversible telecloning channel.
pub fn build_rts<T: Scalar>(net: &mut Network<T>, m: usize, r: T) -> Result<TelecloneState<T>> {
    check_m(m)?;
    check_squeezing(r, "r")?;
    let (e1, e2) = net.new_epr_pair(r)?;
    let primed = cascade(net, &e1, m)?;
    let unprimed = cascade(net, &e2, m)?;
    let ts = TelecloneState { m, r, r_b: None, primed, unprimed, epr: (e1, e2), aux_epr: None };
    verify_cascade(&ts)?;
    Ok(ts)
}

/// The M = 2 channel with the splitter vacua replaced by a second EPR pair
/// of squeezing `r_b`.
pub fn build_asymmetric_rts<T: Scalar>(net: &mut Network<T>, r: T, r_b: T) -> Result<TelecloneState<T>> {
    check_squeezing(r, "r")?;
    check_squeezing(r_b, "r_b")?;
    let (e1, e2) = net.new_epr_pair(r)?;
    let (b1, b2) = net.new_epr_pair(r_b)?;
    let h = T::lit(0.5).sqrt();
    let (p1, p2) = net.mix(&e1, &b1, h, h)?;
    let (u1, u2) = net.mix(&e2, &b2, h, h)?;
    Ok(TelecloneState {
        m: 2,
        r,
        r_b: Some(r_b),
        primed: vec![p1, p2],
        unprimed: vec![u1, u2],
        epr: (e1, e2),
        aux_epr: Some((b1, b2)),
    })
}

/// Feedforward gains for one output role.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GainSet<T> {
    pub g_x: T,
    pub g_p: T,
    pub role: Role,
}

impl<T: Scalar> GainSet<T> {
    /// Gains applied to the raw Bell results in the single-input protocols.
    pub fn single_input(role: Role) -> Self {
        let s = T::SQRT_2();
        match role {
            Role::Clone => GainSet { g_x: -s, g_p: s, role },
            Role::Anticlone => GainSet { g_x: -s, g_p: -s, role },
        }
    }

    /// Gains applied to the combined signals `(√2/N) Σ x_k`, `(√2/N) Σ p_k`.
    pub fn multi_input(role: Role) -> Self {
        let one = T::one();
        match role {
            Role::Clone => GainSet { g_x: -one, g_p: one, role },
            Role::Anticlone => GainSet { g_x: -one, g_p: -one, role },
        }
    }
}

/// Which channel modes the sender holds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Sender {
    pub side: Side,
    /// Zero-based positions in the sender's set, one per input replica.
    pub modes: Vec<usize>,
}

impl Sender {
    pub fn single(side: Side, index: usize) -> Self {
        Sender { side, modes: vec![index] }
    }

    /// The first `n` modes of `side`.
    pub fn leading(side: Side, n: usize) -> Self {
        Sender { side, modes: (0..n).collect() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProtocolParams<T> {
    pub n: usize,
    pub m: usize,
    pub r: T,
    pub r_b: Option<T>,
    pub mean_x: T,
    pub mean_y: T,
    pub sender: Sender,
}

#[derive(Debug, Clone)]
pub struct ProtocolResult<T> {
    pub network: Network<T>,
    pub channel: TelecloneState<T>,
    /// The coherent input replicas as they were before measurement.
    pub inputs: Vec<ModeExpr<T>>,
    pub clones: Vec<ModeExpr<T>>,
    pub anticlones: Vec<ModeExpr<T>>,
    /// Channel mode each clone was produced from.
    pub clone_sources: Vec<ModeLabel>,
    pub anticlone_sources: Vec<ModeLabel>,
    pub input_mean: (T, T),
    pub clone_reports: Vec<FidelityReport<T>>,
    pub anticlone_reports: Vec<FidelityReport<T>>,
    pub clone_gains: GainSet<T>,
    pub anticlone_gains: GainSet<T>,
    pub params: ProtocolParams<T>,
}

impl<T: Scalar> ProtocolResult<T> {
    pub fn fidelities_clone(&self) -> Vec<T> {
        self.clone_reports.iter().map(|r| r.value).collect()
    }

    pub fn fidelities_anticlone(&self) -> Vec<T> {
        self.anticlone_reports.iter().map(|r| r.value).collect()
    }

    /// Coherent target of an output: the input for clones, its conjugate for anticlones.
    pub fn target(&self, role: Role) -> (T, T) {
        let (mx, my) = self.input_mean;
        match role {
            Role::Clone => (mx, my),
            Role::Anticlone => (mx, -my),
        }
    }

    /// Outputs in reporting order: clones first, then anticlones.
    pub fn outputs(&self) -> impl Iterator<Item = (Role, usize, &ModeExpr<T>)> {
        self.clones
            .iter()
            .enumerate()
            .map(|(i, m)| (Role::Clone, i, m))
            .chain(self.anticlones.iter().enumerate().map(|(i, m)| (Role::Anticlone, i, m)))
    }

    pub fn analytic(&self) -> Result<AnalyticFidelities<T>> {
        analytic_fidelities(self.params.n, self.params.m, self.params.r, self.params.r_b)
    }
}

struct Feedforward<T> {
    signal_scale: T,
    clone: GainSet<T>,
    anticlone: GainSet<T>,
}

fn check_mean<T: Scalar>(mean_x: T, mean_y: T) -> Result<()> {
    if !mean_x.is_finite() || !mean_y.is_finite() {
        return Err(Error::InvalidParameter(format!("input mean must be finite, got ({mean_x}, {mean_y})")));
    }
    Ok(())
}

fn execute<T: Scalar>(
    mut net: Network<T>,
    channel: TelecloneState<T>,
    sender: Sender,
    (mean_x, mean_y): (T, T),
    ff: Feedforward<T>,
) -> Result<ProtocolResult<T>> {
    let m = channel.m;
    let n = sender.modes.len();
    let mut seen = vec![false; m];
    for &k in &sender.modes {
        if k >= m || std::mem::replace(&mut seen[k], true) {
            return Err(Error::InvalidParameter(format!(
                "sender modes {:?} must be distinct indices below M={m}",
                sender.modes
            )));
        }
    }
    if n == 0 || n >= m {
        return Err(Error::InvalidParameter(format!("need 1 <= N < M (got N={n}, M={m})")));
    }

    let inputs = (0..n)
        .map(|_| net.new_coherent(mean_x, mean_y))
        .collect::<Result<Vec<_>>>()?;
    let mut xs = Vec::with_capacity(n);
    let mut ps = Vec::with_capacity(n);
    for (&k, input) in sender.modes.iter().zip(&inputs) {
        let (x, p) = net.bell_measure(&channel.set(sender.side)[k], input)?;
        xs.push(x);
        ps.push(p);
    }
    let x_s = combine_signals(&xs, ff.signal_scale)?;
    let p_s = combine_signals(&ps, ff.signal_scale)?;

    let mut clones = Vec::with_capacity(m);
    let mut clone_sources = Vec::with_capacity(m);
    let receiver_side = sender.side.opposite();
    for (index, mode) in channel.set(receiver_side).iter().enumerate() {
        clones.push(net.displace(mode, &x_s, ff.clone.g_x, &p_s, ff.clone.g_p)?);
        clone_sources.push(ModeLabel { side: receiver_side, index });
    }
    let mut anticlones = Vec::with_capacity(m - n);
    let mut anticlone_sources = Vec::with_capacity(m - n);
    for (index, mode) in channel.set(sender.side).iter().enumerate() {
        if seen[index] {
            continue;
        }
        anticlones.push(net.displace(mode, &x_s, ff.anticlone.g_x, &p_s, ff.anticlone.g_p)?);
        anticlone_sources.push(ModeLabel { side: sender.side, index });
    }

    let clone_reports = clones
        .iter()
        .map(|c| fidelity_vs_coherent(c, mean_x, mean_y, &net))
        .collect::<Result<Vec<_>>>()?;
    let anticlone_reports = anticlones
        .iter()
        .map(|a| fidelity_vs_coherent(a, mean_x, -mean_y, &net))
        .collect::<Result<Vec<_>>>()?;

    let params = ProtocolParams { n, m, r: channel.r, r_b: channel.r_b, mean_x, mean_y, sender };
    Ok(ProtocolResult {
        network: net,
        channel,
        inputs,
        clones,
        anticlones,
        clone_sources,
        anticlone_sources,
        input_mean: (mean_x, mean_y),
        clone_reports,
        anticlone_reports,
        clone_gains: ff.clone,
        anticlone_gains: ff.anticlone,
        params,
    })
}

fn single_input_feedforward<T: Scalar>() -> Feedforward<T> {
    Feedforward {
        signal_scale: T::one(),
        clone: GainSet::single_input(Role::Clone),
        anticlone: GainSet::single_input(Role::Anticlone),
    }
}

/// 1 → M + (M − 1) telecloning with the sender on the first primed mode.
pub fn run_1_to_m<T: Scalar>(m: usize, r: T, mean_x: T, mean_y: T) -> Result<ProtocolResult<T>> {
    run_1_to_m_from(m, r, mean_x, mean_y, Sender::single(Side::Primed, 0))
}

/// 1 → M + (M − 1) telecloning with the sender on any of the 2M channel modes.
pub fn run_1_to_m_from<T: Scalar>(m: usize, r: T, mean_x: T, mean_y: T, sender: Sender) -> Result<ProtocolResult<T>> {
    check_mean(mean_x, mean_y)?;
    if sender.modes.len() != 1 {
        return Err(Error::InvalidParameter(format!(
            "single-input telecloning needs exactly one sender mode, got {}",
            sender.modes.len()
        )));
    }
    let mut net = Network::new();
    let channel = build_rts(&mut net, m, r)?;
    execute(net, channel, sender, (mean_x, mean_y), single_input_feedforward())
}

/// N → M + (M − N) telecloning from `n` replicas of the coherent input.
pub fn run_n_to_m<T: Scalar>(n: usize, m: usize, r: T, mean_x: T, mean_y: T) -> Result<ProtocolResult<T>> {
    run_n_to_m_from(n, m, r, mean_x, mean_y, Side::Primed)
}

/// As [`run_n_to_m`], with the sender holding the first `n` modes of `side`.
pub fn run_n_to_m_from<T: Scalar>(
    n: usize,
    m: usize,
    r: T,
    mean_x: T,
    mean_y: T,
    side: Side,
) -> Result<ProtocolResult<T>> {
    check_mean(mean_x, mean_y)?;
    if n < 1 || n >= m {
        return Err(Error::InvalidParameter(format!("need 1 <= N < M (got N={n}, M={m})")));
    }
    let mut net = Network::new();
    let channel = build_rts(&mut net, m, r)?;
    let ff = Feedforward {
        signal_scale: T::SQRT_2() / T::from_usize(n).unwrap(),
        clone: GainSet::multi_input(Role::Clone),
        anticlone: GainSet::multi_input(Role::Anticlone),
    };
    execute(net, channel, Sender::leading(side, n), (mean_x, mean_y), ff)
}

/// Asymmetric 1 → 2 + 1 telecloning; clones are `[Bob, Claire]`, the anticlone is Dan.
pub fn run_asymmetric<T: Scalar>(r: T, r_b: T, mean_x: T, mean_y: T) -> Result<ProtocolResult<T>> {
    check_mean(mean_x, mean_y)?;
    let mut net = Network::new();
    let channel = build_asymmetric_rts(&mut net, r, r_b)?;
    execute(net, channel, Sender::single(Side::Primed, 0), (mean_x, mean_y), single_input_feedforward())
}

/// Linear forms `X_B + X_C − X_D − X_in` and `Y_B + Y_C + Y_D − Y_in`.
///
/// Adding both clones to the conjugated anticlone cancels every splitter
/// noise term, leaving the input plus EPR residuals that vanish with
/// infinite squeezing.
pub fn reversibility_forms<T: Scalar>(result: &ProtocolResult<T>) -> Result<(LinearForm<T>, LinearForm<T>)> {
    if result.params.n != 1 || result.params.m != 2 || result.clones.len() != 2 || result.anticlones.len() != 1 {
        return Err(Error::Usage(format!(
            "reversibility residual needs a 1→2+1 run, got N={} M={}",
            result.params.n, result.params.m
        )));
    }
    let (b, c, d, input) = (&result.clones[0], &result.clones[1], &result.anticlones[0], &result.inputs[0]);
    let fx = (&(&b.x + &c.x) - &d.x).axpy(-T::one(), &input.x);
    let fy = (&(&b.y + &c.y) + &d.y).axpy(-T::one(), &input.y);
    Ok((fx, fy))
}

/// Variances of the [`reversibility_forms`]; `4e^{-2r}` each on the symmetric channel.
pub fn reversibility_residual<T: Scalar>(result: &ProtocolResult<T>) -> Result<(T, T)> {
    let (fx, fy) = reversibility_forms(result)?;
    Ok((result.network.variance(&fx)?, result.network.variance(&fy)?))
}

/// A fully parameterised protocol, as driven from the command line or the oracle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "protocol", rename_all = "snake_case")]
pub enum Protocol<T> {
    Symmetric { n: usize, m: usize, r: T },
    Asymmetric { r: T, r_b: T },
}

impl<T: Scalar> Protocol<T> {
    pub fn name(&self) -> String {
        match self {
            Protocol::Symmetric { n, m, .. } => format!("{n}->{m}+{}", m - n.min(m)),
            Protocol::Asymmetric { .. } => "asymmetric 1->2+1".to_string(),
        }
    }

    pub fn run(&self, mean_x: T, mean_y: T) -> Result<ProtocolResult<T>> {
        match *self {
            Protocol::Symmetric { n: 1, m, r } => run_1_to_m(m, r, mean_x, mean_y),
            Protocol::Symmetric { n, m, r } => run_n_to_m(n, m, r, mean_x, mean_y),
            Protocol::Asymmetric { r, r_b } => run_asymmetric(r, r_b, mean_x, mean_y),
        }
    }

    pub fn analytic(&self) -> Result<AnalyticFidelities<T>> {
        match *self {
            Protocol::Symmetric { n, m, r } => analytic_fidelities(n, m, r, None),
            Protocol::Asymmetric { r, r_b } => analytic_fidelities(1, 2, r, Some(r_b)),
        }
    }
}
