//! Fidelity and entanglement diagnostics for Gaussian modes.
//!
//! All quantities use the vacuum-variance-1 convention, so the Duan
//! separability bound is 4 and the vacuum covariance block is the identity.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::protocol::{Side, TelecloneState};
use crate::quad::{ModeExpr, Network};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FidelityReport<T> {
    pub value: T,
    pub variance_x: T,
    pub variance_y: T,
    pub mean_offset_x: T,
    pub mean_offset_y: T,
    pub target: (T, T),
}

/// Overlap of a coherent state with an uncorrelated Gaussian state of
/// quadrature variances `(vx, vy)` whose means are displaced by `(dx, dy)`.
pub fn gaussian_fidelity<T: Scalar>(vx: T, vy: T, dx: T, dy: T) -> T {
    let one = T::one();
    let two = T::lit(2.0);
    let prefactor = two / ((one + vx) * (one + vy)).sqrt();
    prefactor * (-(dx * dx) / (two * (one + vx)) - (dy * dy) / (two * (one + vy))).exp()
}

/// Fidelity of `mode` with the coherent state of quadrature means `target`.
///
/// Requires the mode's `X` and `Y` fluctuations to be uncorrelated.
pub fn fidelity_vs_coherent<T: Scalar>(
    mode: &ModeExpr<T>,
    target_x: T,
    target_y: T,
    net: &Network<T>,
) -> Result<FidelityReport<T>> {
    let cross = net.covariance(&mode.x, &mode.y)?;
    if cross.abs() > T::CROSS_TOL {
        return Err(Error::UnsupportedState(format!(
            "X/Y cross covariance {cross} is nonzero; coherent-state fidelity formula does not apply"
        )));
    }
    let variance_x = net.variance(&mode.x)?;
    let variance_y = net.variance(&mode.y)?;
    let mean_offset_x = net.mean(&mode.x)? - target_x;
    let mean_offset_y = net.mean(&mode.y)? - target_y;
    Ok(FidelityReport {
        value: gaussian_fidelity(variance_x, variance_y, mean_offset_x, mean_offset_y),
        variance_x,
        variance_y,
        mean_offset_x,
        mean_offset_y,
        target: (target_x, target_y),
    })
}

/// Second moments of `n` modes, ordered `(X₁, Y₁, …, X_n, Y_n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix<T> {
    n: usize,
    entries: Vec<T>,
}

impl<T: Scalar> CovarianceMatrix<T> {
    pub fn from_entries(n: usize, entries: Vec<T>) -> Result<Self> {
        if entries.len() != 4 * n * n {
            return Err(Error::InvalidParameter(format!(
                "{} entries do not form a {0}x{0} matrix",
                entries.len()
            )));
        }
        Ok(CovarianceMatrix { n, entries })
    }

    pub fn modes(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        2 * self.n
    }

    pub fn get(&self, row: usize, col: usize) -> T {
        self.entries[row * self.dim() + col]
    }

    pub fn entries(&self) -> &[T] {
        &self.entries
    }

    /// 2×2 block between modes `i` and `j`.
    pub fn block(&self, i: usize, j: usize) -> [[T; 2]; 2] {
        [
            [self.get(2 * i, 2 * j), self.get(2 * i, 2 * j + 1)],
            [self.get(2 * i + 1, 2 * j), self.get(2 * i + 1, 2 * j + 1)],
        ]
    }

    pub fn is_symmetric(&self, tol: T) -> bool {
        let d = self.dim();
        (0..d).all(|i| (0..i).all(|j| (self.get(i, j) - self.get(j, i)).abs() <= tol))
    }

    /// Checks `σ + iΩ ≥ 0` through the real embedding `[[σ, −Ω], [Ω, σ]]`,
    /// with `tol` relative to the largest entry.
    pub fn is_physical(&self, tol: T) -> bool {
        let d = self.dim();
        let big = 2 * d;
        let omega = |i: usize, j: usize| -> T {
            // Ω = ⊕ [[0, 1], [−1, 0]]
            match (i / 2 == j / 2, i % 2, j % 2) {
                (true, 0, 1) => T::one(),
                (true, 1, 0) => -T::one(),
                _ => T::zero(),
            }
        };
        let mut m = vec![T::zero(); big * big];
        for i in 0..d {
            for j in 0..d {
                let s = self.get(i, j);
                let o = omega(i, j);
                m[i * big + j] = s;
                m[(i + d) * big + (j + d)] = s;
                m[i * big + (j + d)] = -o;
                m[(i + d) * big + j] = o;
            }
        }
        let scale = self.entries.iter().fold(T::one(), |acc, v| acc.max(v.abs()));
        for i in 0..big {
            m[i * big + i] = m[i * big + i] + tol * scale;
        }
        cholesky_succeeds(&mut m, big)
    }
}

fn cholesky_succeeds<T: Scalar>(m: &mut [T], n: usize) -> bool {
    for j in 0..n {
        let mut diag = m[j * n + j];
        for k in 0..j {
            diag = diag - m[j * n + k] * m[j * n + k];
        }
        // NaN also fails here.
        if diag.partial_cmp(&T::zero()) != Some(std::cmp::Ordering::Greater) {
            return false;
        }
        let l = diag.sqrt();
        m[j * n + j] = l;
        for i in (j + 1)..n {
            let mut v = m[i * n + j];
            for k in 0..j {
                v = v - m[i * n + k] * m[j * n + k];
            }
            m[i * n + j] = v / l;
        }
    }
    true
}

pub fn covariance_matrix<T: Scalar>(modes: &[&ModeExpr<T>], net: &Network<T>) -> Result<CovarianceMatrix<T>> {
    let forms: Vec<_> = modes.iter().flat_map(|m| [&m.x, &m.y]).collect();
    let d = forms.len();
    let mut entries = vec![T::zero(); d * d];
    for i in 0..d {
        for j in i..d {
            let c = net.covariance(forms[i], forms[j])?;
            entries[i * d + j] = c;
            entries[j * d + i] = c;
        }
    }
    CovarianceMatrix::from_entries(modes.len(), entries)
}

/// `Var(X_a − X_b) + Var(Y_a + Y_b)`; below 4 witnesses entanglement.
pub fn duan_sum<T: Scalar>(a: &ModeExpr<T>, b: &ModeExpr<T>, net: &Network<T>) -> Result<T> {
    Ok(net.variance(&(&a.x - &b.x))? + net.variance(&(&a.y + &b.y))?)
}

/// Duan sum read off a two-mode covariance matrix.
pub fn duan_sum_from_cm<T: Scalar>(cm: &CovarianceMatrix<T>) -> Result<T> {
    if cm.modes() != 2 {
        return Err(Error::InvalidParameter(format!("expected 2 modes, got {}", cm.modes())));
    }
    let two = T::lit(2.0);
    let vx = cm.get(0, 0) + cm.get(2, 2) - two * cm.get(0, 2);
    let vy = cm.get(1, 1) + cm.get(3, 3) + two * cm.get(1, 3);
    Ok(vx + vy)
}

fn det2<T: Scalar>(b: [[T; 2]; 2]) -> T {
    b[0][0] * b[1][1] - b[0][1] * b[1][0]
}

/// Smaller symplectic eigenvalue from the two-mode invariants `Δ` and `det σ`.
fn smaller_symplectic_eigenvalue<T: Scalar>(delta: T, det: T) -> T {
    // ν₋²ν₊² = det σ, so take ν₊² from the stable root and divide.
    let two = T::lit(2.0);
    let four = T::lit(4.0);
    let disc = (delta * delta - four * det).max(T::zero());
    let nu_plus_sq = (delta + disc.sqrt()) / two;
    if nu_plus_sq <= T::zero() {
        return T::zero();
    }
    (det / nu_plus_sq).max(T::zero()).sqrt()
}

fn four_by_four_det<T: Scalar>(cm: &CovarianceMatrix<T>) -> T {
    let mut m: Vec<T> = cm.entries().to_vec();
    let n = 4;
    let mut det = T::one();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&a, &b| m[a * n + col].abs().partial_cmp(&m[b * n + col].abs()).unwrap())
            .unwrap();
        if m[pivot * n + col] == T::zero() {
            return T::zero();
        }
        if pivot != col {
            for k in 0..n {
                m.swap(col * n + k, pivot * n + k);
            }
            det = -det;
        }
        let p = m[col * n + col];
        det = det * p;
        for row in (col + 1)..n {
            let f = m[row * n + col] / p;
            for k in col..n {
                m[row * n + k] = m[row * n + k] - f * m[col * n + k];
            }
        }
    }
    det
}

/// Logarithmic negativity `max(0, −ln ν̃₋)` of a two-mode Gaussian state.
///
/// `ν̃₋` is the smaller symplectic eigenvalue after flipping the sign of the
/// second mode's `Y` quadrature.
pub fn log_negativity_two_mode<T: Scalar>(cm: &CovarianceMatrix<T>) -> Result<T> {
    if cm.modes() != 2 {
        return Err(Error::InvalidParameter(format!("expected 2 modes, got {}", cm.modes())));
    }
    if !cm.is_symmetric(T::INVARIANT_TOL) {
        return Err(Error::InvalidState("covariance matrix is not symmetric".into()));
    }
    let (a, b, c) = (det2(cm.block(0, 0)), det2(cm.block(1, 1)), det2(cm.block(0, 1)));
    let det = four_by_four_det(cm);
    let nu_minus = smaller_symplectic_eigenvalue(a + b + T::lit(2.0) * c, det);
    if a <= T::zero() || b <= T::zero() || nu_minus < T::one() - T::PHYSICAL_TOL {
        return Err(Error::InvalidState(format!(
            "covariance matrix violates the uncertainty relation (smallest symplectic eigenvalue {nu_minus})"
        )));
    }
    let nu_pt = smaller_symplectic_eigenvalue(a + b - T::lit(2.0) * c, det);
    Ok((-nu_pt.ln()).max(T::zero()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PairRelation {
    Intra,
    Inter,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ModeLabel {
    pub side: Side,
    /// Zero-based position inside its set.
    pub index: usize,
}

impl std::fmt::Display for ModeLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.side {
            Side::Primed => write!(f, "RTS{}'", self.index + 1),
            Side::Unprimed => write!(f, "RTS{}", self.index + 1),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairReport<T> {
    pub a: ModeLabel,
    pub b: ModeLabel,
    pub relation: PairRelation,
    pub duan_sum: T,
    pub log_negativity: T,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StructureReport<T> {
    pub m: usize,
    pub r: T,
    pub pairs: Vec<PairReport<T>>,
}

impl<T: Scalar> StructureReport<T> {
    pub fn all_pass(&self) -> bool {
        self.pairs.iter().all(|p| p.pass)
    }

    pub fn intra(&self) -> impl Iterator<Item = &PairReport<T>> {
        self.pairs.iter().filter(|p| p.relation == PairRelation::Intra)
    }

    pub fn inter(&self) -> impl Iterator<Item = &PairReport<T>> {
        self.pairs.iter().filter(|p| p.relation == PairRelation::Inter)
    }
}

/// Pairwise entanglement scan of a telecloning channel.
///
/// Intra-set pairs pass when their negativity is zero; inter-set pairs pass
/// when they are entangled (Duan sum below 4, positive negativity), or, with
/// no squeezing, when they are not.
pub fn structure_report<T: Scalar>(ts: &TelecloneState<T>, net: &Network<T>) -> Result<StructureReport<T>> {
    let zero_tol = T::lit(1e-9).max(T::PHYSICAL_TOL);
    let squeezed = ts.r > T::zero();
    let four = T::lit(4.0);
    let labelled: Vec<(ModeLabel, &ModeExpr<T>)> = [Side::Primed, Side::Unprimed]
        .into_iter()
        .flat_map(|side| {
            ts.set(side)
                .iter()
                .enumerate()
                .map(move |(index, m)| (ModeLabel { side, index }, m))
        })
        .collect();
    let mut pairs = Vec::new();
    for i in 0..labelled.len() {
        for j in (i + 1)..labelled.len() {
            let (la, ma) = labelled[i];
            let (lb, mb) = labelled[j];
            let relation = if la.side == lb.side { PairRelation::Intra } else { PairRelation::Inter };
            let duan = duan_sum(ma, mb, net)?;
            let cm = covariance_matrix(&[ma, mb], net)?;
            let ln = log_negativity_two_mode(&cm)?;
            let pass = match relation {
                PairRelation::Intra => ln <= zero_tol,
                PairRelation::Inter if squeezed => duan < four && ln > T::zero(),
                PairRelation::Inter => ln <= zero_tol,
            };
            pairs.push(PairReport { a: la, b: lb, relation, duan_sum: duan, log_negativity: ln, pass });
        }
    }
    Ok(StructureReport { m: ts.m, r: ts.r, pairs })
}
