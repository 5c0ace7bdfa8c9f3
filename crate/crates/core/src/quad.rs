//! Heisenberg-picture algebra for Gaussian optical modes.
//!
//! Every mode is tracked as a pair of real linear forms, one for the amplitude
//! quadrature `X` and one for the phase quadrature `Y`, over a set of mutually
//! independent Gaussian *primitives* (vacua, squeezed vacua and coherent
//! inputs). Passive optics, homodyne signals and feedforward are all linear in
//! these variables, so first and second moments of any output are exact sums
//! over coefficients.
//!
//! Quadratures follow `a = (X + iY) / 2` with `[X, Y] = 2i`: the vacuum has
//! unit variance in each quadrature and a conjugated mode `a†` differs from
//! `a` only by the sign of its `Y` form.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PrimitiveId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
}

impl Axis {
    pub fn other(self) -> Axis {
        match self {
            Axis::X => Axis::Y,
            Axis::Y => Axis::X,
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Axis::X => f.write_str("X"),
            Axis::Y => f.write_str("Y"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PrimitiveKind<T> {
    Vacuum,
    /// Squeezed vacuum; `axis` is the quadrature whose variance is `e^{-2r}`.
    Squeezed { r: T, axis: Axis },
    /// Coherent state with the given quadrature means.
    CoherentInput { mean_x: T, mean_y: T },
}

/// An independent Gaussian noise source.
///
/// Its `X` and `Y` quadratures are uncorrelated for every supported kind, and
/// the means of a coherent input live here rather than in form constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Primitive<T> {
    pub id: PrimitiveId,
    pub kind: PrimitiveKind<T>,
    pub var_x: T,
    pub var_y: T,
    pub mean_x: T,
    pub mean_y: T,
}

impl<T: Scalar> Primitive<T> {
    pub fn variance(&self, axis: Axis) -> T {
        match axis {
            Axis::X => self.var_x,
            Axis::Y => self.var_y,
        }
    }

    pub fn mean(&self, axis: Axis) -> T {
        match axis {
            Axis::X => self.mean_x,
            Axis::Y => self.mean_y,
        }
    }

    pub fn is_vacuum(&self) -> bool {
        matches!(self.kind, PrimitiveKind::Vacuum)
    }
}

/// `constant + Σ coeff · Q(p, axis)` over primitive quadratures.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearForm<T> {
    constant: T,
    coeffs: BTreeMap<(PrimitiveId, Axis), T>,
}

impl<T: Scalar> Default for LinearForm<T> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<T: Scalar> LinearForm<T> {
    pub fn zero() -> Self {
        LinearForm { constant: T::zero(), coeffs: BTreeMap::new() }
    }

    pub fn constant_only(c: T) -> Self {
        LinearForm { constant: c, coeffs: BTreeMap::new() }
    }

    /// The bare quadrature `Q(p, axis)`.
    pub fn quadrature(p: PrimitiveId, axis: Axis) -> Self {
        let mut coeffs = BTreeMap::new();
        coeffs.insert((p, axis), T::one());
        LinearForm { constant: T::zero(), coeffs }
    }

    pub fn constant(&self) -> T {
        self.constant
    }

    pub fn coeff(&self, p: PrimitiveId, axis: Axis) -> T {
        self.coeffs.get(&(p, axis)).copied().unwrap_or_else(T::zero)
    }

    /// Non-zero terms in deterministic `(primitive, axis)` order.
    pub fn terms(&self) -> impl Iterator<Item = (PrimitiveId, Axis, T)> + '_ {
        self.coeffs.iter().map(|(&(p, a), &c)| (p, a, c))
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn primitives(&self) -> BTreeSet<PrimitiveId> {
        self.coeffs.keys().map(|&(p, _)| p).collect()
    }

    pub fn scale(&self, k: T) -> Self {
        let mut out = LinearForm {
            constant: self.constant * k,
            coeffs: self.coeffs.iter().map(|(&key, &c)| (key, c * k)).collect(),
        };
        out.prune();
        out
    }

    /// `self + k · other`.
    pub fn axpy(&self, k: T, other: &Self) -> Self {
        let mut out = self.clone();
        out.constant = out.constant + k * other.constant;
        for (&key, &c) in &other.coeffs {
            let entry = out.coeffs.entry(key).or_insert_with(T::zero);
            *entry = *entry + k * c;
        }
        out.prune();
        out
    }

    /// Drops coefficients below [`Scalar::PRUNE`].
    pub fn prune(&mut self) {
        self.coeffs.retain(|_, c| c.abs() >= T::PRUNE);
    }

    /// Evaluates the form for concrete primitive quadrature values.
    pub fn eval(&self, mut value: impl FnMut(PrimitiveId, Axis) -> T) -> T {
        self.coeffs
            .iter()
            .fold(self.constant, |acc, (&(p, a), &c)| acc + c * value(p, a))
    }

    /// Commutator weight `[f, g] / 2i`: `Σ_p f[p,X]·g[p,Y] − f[p,Y]·g[p,X]`.
    pub fn symplectic_pairing(&self, other: &Self) -> T {
        self.coeffs
            .iter()
            .map(|(&(p, a), &c)| {
                let partner = other.coeff(p, a.other());
                match a {
                    Axis::X => c * partner,
                    Axis::Y => -c * partner,
                }
            })
            .sum()
    }
}

impl<T: Scalar> Add for &LinearForm<T> {
    type Output = LinearForm<T>;
    fn add(self, rhs: Self) -> LinearForm<T> {
        self.axpy(T::one(), rhs)
    }
}

impl<T: Scalar> Sub for &LinearForm<T> {
    type Output = LinearForm<T>;
    fn sub(self, rhs: Self) -> LinearForm<T> {
        self.axpy(-T::one(), rhs)
    }
}

impl<T: Scalar> Neg for &LinearForm<T> {
    type Output = LinearForm<T>;
    fn neg(self) -> LinearForm<T> {
        self.scale(-T::one())
    }
}

impl<T: Scalar> Mul<T> for &LinearForm<T> {
    type Output = LinearForm<T>;
    fn mul(self, k: T) -> LinearForm<T> {
        self.scale(k)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ModeHandle(pub u64);

/// An optical mode as its `(X, Y)` quadrature forms.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeExpr<T> {
    pub handle: ModeHandle,
    pub x: LinearForm<T>,
    pub y: LinearForm<T>,
}

impl<T: Scalar> ModeExpr<T> {
    /// Equals 1 for every physical mode (`[X, Y] = 2i`).
    pub fn symplectic_invariant(&self) -> T {
        self.x.symplectic_pairing(&self.y)
    }

    pub fn form(&self, axis: Axis) -> &LinearForm<T> {
        match axis {
            Axis::X => &self.x,
            Axis::Y => &self.y,
        }
    }
}

/// Owner of the primitives and mode bookkeeping for one optical network.
#[derive(Debug, Clone)]
pub struct Network<T> {
    primitives: Vec<Primitive<T>>,
    live: BTreeSet<ModeHandle>,
    consumed: BTreeSet<ModeHandle>,
    produced: Vec<ModeExpr<T>>,
    next_handle: u64,
}

impl<T: Scalar> Default for Network<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Scalar> Network<T> {
    pub fn new() -> Self {
        Network {
            primitives: Vec::new(),
            live: BTreeSet::new(),
            consumed: BTreeSet::new(),
            produced: Vec::new(),
            next_handle: 0,
        }
    }

    pub fn primitives(&self) -> &[Primitive<T>] {
        &self.primitives
    }

    pub fn primitive(&self, id: PrimitiveId) -> Result<&Primitive<T>> {
        self.primitives
            .get(id.0)
            .ok_or_else(|| Error::Integrity(format!("primitive {} does not exist", id.0)))
    }

    /// Every mode ever created in this network, in creation order.
    pub fn produced_modes(&self) -> &[ModeExpr<T>] {
        &self.produced
    }

    pub fn is_live(&self, mode: &ModeExpr<T>) -> bool {
        self.live.contains(&mode.handle)
    }

    pub fn is_consumed(&self, mode: &ModeExpr<T>) -> bool {
        self.consumed.contains(&mode.handle)
    }

    fn push_primitive(&mut self, kind: PrimitiveKind<T>, var_x: T, var_y: T, mean_x: T, mean_y: T) -> PrimitiveId {
        let id = PrimitiveId(self.primitives.len());
        self.primitives.push(Primitive { id, kind, var_x, var_y, mean_x, mean_y });
        id
    }

    /// Wraps forms into a fresh live mode after checking `[X, Y] = 2i`.
    pub(crate) fn register(&mut self, x: LinearForm<T>, y: LinearForm<T>) -> Result<ModeExpr<T>> {
        let handle = ModeHandle(self.next_handle);
        self.next_handle += 1;
        let mode = ModeExpr { handle, x, y };
        let inv = mode.symplectic_invariant();
        if (inv - T::one()).abs() > T::INVARIANT_TOL {
            return Err(Error::Invariant(format!(
                "mode {} has symplectic invariant {inv}, expected 1",
                handle.0
            )));
        }
        self.live.insert(handle);
        self.produced.push(mode.clone());
        Ok(mode)
    }

    fn fresh_mode(&mut self, p: PrimitiveId) -> ModeExpr<T> {
        self.register(LinearForm::quadrature(p, Axis::X), LinearForm::quadrature(p, Axis::Y))
            .expect("single-primitive mode has unit invariant")
    }

    pub(crate) fn ensure_live(&self, mode: &ModeExpr<T>) -> Result<()> {
        if self.consumed.contains(&mode.handle) {
            return Err(Error::Usage(format!("mode {} was already consumed", mode.handle.0)));
        }
        if !self.live.contains(&mode.handle) {
            return Err(Error::Usage(format!("mode {} does not belong to this network", mode.handle.0)));
        }
        Ok(())
    }

    pub(crate) fn ensure_pair(&self, a: &ModeExpr<T>, b: &ModeExpr<T>) -> Result<()> {
        if a.handle == b.handle {
            return Err(Error::Usage(format!("mode {} used twice in one operation", a.handle.0)));
        }
        self.ensure_live(a)?;
        self.ensure_live(b)
    }

    pub(crate) fn consume(&mut self, mode: &ModeExpr<T>) {
        self.live.remove(&mode.handle);
        self.consumed.insert(mode.handle);
    }

    pub fn new_vacuum(&mut self) -> ModeExpr<T> {
        let (one, zero) = (T::one(), T::zero());
        let p = self.push_primitive(PrimitiveKind::Vacuum, one, one, zero, zero);
        self.fresh_mode(p)
    }

    /// Squeezed vacuum with variance `e^{-2r}` along `axis` and `e^{2r}` across it.
    pub fn new_squeezed(&mut self, r: T, axis: Axis) -> Result<ModeExpr<T>> {
        check_squeezing(r, "r")?;
        let two = T::lit(2.0);
        let (low, high) = ((-two * r).exp(), (two * r).exp());
        let (var_x, var_y) = match axis {
            Axis::X => (low, high),
            Axis::Y => (high, low),
        };
        let p = self.push_primitive(PrimitiveKind::Squeezed { r, axis }, var_x, var_y, T::zero(), T::zero());
        Ok(self.fresh_mode(p))
    }

    pub fn new_coherent(&mut self, mean_x: T, mean_y: T) -> Result<ModeExpr<T>> {
        if !mean_x.is_finite() || !mean_y.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "coherent amplitude must be finite, got ({mean_x}, {mean_y})"
            )));
        }
        let one = T::one();
        let p = self.push_primitive(PrimitiveKind::CoherentInput { mean_x, mean_y }, one, one, mean_x, mean_y);
        Ok(self.fresh_mode(p))
    }

    /// Two-mode squeezed (EPR) pair with `Var(X₁ − X₂) = Var(Y₁ + Y₂) = 2e^{-2r}`.
    ///
    /// Built by mixing a `Y`-squeezed and an `X`-squeezed vacuum on a 50/50
    /// splitter. The `X`-squeezed input enters the port that adds to the first
    /// output and subtracts from the second, so the `X` difference and `Y` sum
    /// are the squeezed combinations.
    pub fn new_epr_pair(&mut self, r: T) -> Result<(ModeExpr<T>, ModeExpr<T>)> {
        let y_sq = self.new_squeezed(r, Axis::Y)?;
        let x_sq = self.new_squeezed(r, Axis::X)?;
        let half = T::lit(0.5).sqrt();
        self.mix(&y_sq, &x_sq, half, half)
    }

    /// Lossless beam splitter with mixing angle `theta`:
    /// `out1 = cosθ·a + sinθ·b`, `out2 = sinθ·a − cosθ·b`.
    pub fn beam_splitter(
        &mut self,
        a: &ModeExpr<T>,
        b: &ModeExpr<T>,
        theta: T,
    ) -> Result<(ModeExpr<T>, ModeExpr<T>)> {
        if !theta.is_finite() {
            return Err(Error::InvalidParameter(format!("mixing angle must be finite, got {theta}")));
        }
        self.mix(a, b, theta.cos(), theta.sin())
    }

    /// Beam splitter given amplitude transmission `t = cosθ` and reflection
    /// `s = sinθ` directly, avoiding trigonometric round-off.
    pub fn mix(
        &mut self,
        a: &ModeExpr<T>,
        b: &ModeExpr<T>,
        t: T,
        s: T,
    ) -> Result<(ModeExpr<T>, ModeExpr<T>)> {
        if !t.is_finite() || !s.is_finite() || (t * t + s * s - T::one()).abs() > T::INVARIANT_TOL {
            return Err(Error::InvalidParameter(format!(
                "beam splitter amplitudes ({t}, {s}) are not a unit vector"
            )));
        }
        self.ensure_pair(a, b)?;
        let combine = |fa: &LinearForm<T>, fb: &LinearForm<T>, ka: T, kb: T| fa.scale(ka).axpy(kb, fb);
        let out1 = (combine(&a.x, &b.x, t, s), combine(&a.y, &b.y, t, s));
        let out2 = (combine(&a.x, &b.x, s, -t), combine(&a.y, &b.y, s, -t));
        self.consume(a);
        self.consume(b);
        let m1 = self.register(out1.0, out1.1)?;
        let m2 = self.register(out2.0, out2.1)?;
        Ok((m1, m2))
    }

    /// `Σ coeff² · Var(primitive, axis)`; constants are ignored.
    pub fn variance(&self, f: &LinearForm<T>) -> Result<T> {
        self.covariance(f, f)
    }

    pub fn covariance(&self, f: &LinearForm<T>, g: &LinearForm<T>) -> Result<T> {
        let (small, large) = if f.len() <= g.len() { (f, g) } else { (g, f) };
        let mut acc = T::zero();
        for (p, axis, c) in small.terms() {
            let prim = self.primitive(p)?;
            let d = large.coeff(p, axis);
            acc = acc + c * d * prim.variance(axis);
        }
        // Validate the other side's references too.
        for p in large.primitives() {
            self.primitive(p)?;
        }
        Ok(acc)
    }

    pub fn mean(&self, f: &LinearForm<T>) -> Result<T> {
        let mut acc = f.constant();
        for (p, axis, c) in f.terms() {
            acc = acc + c * self.primitive(p)?.mean(axis);
        }
        Ok(acc)
    }
}

pub(crate) fn check_squeezing<T: Scalar>(r: T, name: &str) -> Result<()> {
    if !r.is_finite() || r < T::zero() {
        return Err(Error::InvalidParameter(format!(
            "squeezing factor {name} must be finite and non-negative, got {r}"
        )));
    }
    Ok(())
}
