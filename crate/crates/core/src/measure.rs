//! Joint homodyne (Bell) measurement and classical feedforward.
//!
//! Measured results are kept as linear forms over the same primitives as the
//! modes they came from. No conditional state is needed: every downstream
//! quantity is a moment of a linear combination that already contains the
//! measured observables.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{LinearForm, ModeExpr, ModeHandle, Network};
use crate::scalar::Scalar;

/// Which displacement quadrature a classical signal drives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SignalAxis {
    X,
    Y,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalSignal<T> {
    pub form: LinearForm<T>,
    pub axis: SignalAxis,
    /// Modes consumed to produce this signal.
    pub provenance: Vec<ModeHandle>,
}

impl<T: Scalar> Network<T> {
    /// Bell measurement returning `x = (X_e − X_in)/√2` and `p = (Y_e + Y_in)/√2`.
    ///
    /// Both operands are consumed.
    pub fn bell_measure(
        &mut self,
        entangled: &ModeExpr<T>,
        input: &ModeExpr<T>,
    ) -> Result<(ClassicalSignal<T>, ClassicalSignal<T>)> {
        self.ensure_pair(entangled, input)?;
        let h = T::lit(0.5).sqrt();
        let provenance = vec![entangled.handle, input.handle];
        let x = ClassicalSignal {
            form: (&entangled.x - &input.x).scale(h),
            axis: SignalAxis::X,
            provenance: provenance.clone(),
        };
        let p = ClassicalSignal {
            form: (&entangled.y + &input.y).scale(h),
            axis: SignalAxis::Y,
            provenance,
        };
        self.consume(entangled);
        self.consume(input);
        Ok((x, p))
    }

    /// Feedforward: `X → X + g_x·x`, `Y → Y + g_p·p`. The input mode is consumed.
    pub fn displace(
        &mut self,
        mode: &ModeExpr<T>,
        x_sig: &ClassicalSignal<T>,
        g_x: T,
        p_sig: &ClassicalSignal<T>,
        g_p: T,
    ) -> Result<ModeExpr<T>> {
        if x_sig.axis != SignalAxis::X || p_sig.axis != SignalAxis::Y {
            return Err(Error::Usage(format!(
                "displacement needs an X-type and a Y-type signal, got {:?} and {:?}",
                x_sig.axis, p_sig.axis
            )));
        }
        if !g_x.is_finite() || !g_p.is_finite() {
            return Err(Error::InvalidParameter(format!("gains must be finite, got ({g_x}, {g_p})")));
        }
        self.ensure_live(mode)?;
        let x = mode.x.axpy(g_x, &x_sig.form);
        let y = mode.y.axpy(g_p, &p_sig.form);
        self.consume(mode);
        self.register(x, y)
    }
}

/// `scale · Σ parts`, e.g. `x_s = (√2/N)(x₁ + … + x_N)`.
pub fn combine_signals<T: Scalar>(parts: &[ClassicalSignal<T>], scale: T) -> Result<ClassicalSignal<T>> {
    let first = parts
        .first()
        .ok_or_else(|| Error::Usage("cannot combine an empty set of signals".into()))?;
    if let Some(bad) = parts.iter().find(|s| s.axis != first.axis) {
        return Err(Error::Usage(format!(
            "cannot combine {:?}-type and {:?}-type signals",
            first.axis, bad.axis
        )));
    }
    let sum = parts.iter().fold(LinearForm::zero(), |acc, s| acc.axpy(T::one(), &s.form));
    let mut provenance: Vec<ModeHandle> = parts.iter().flat_map(|s| s.provenance.iter().copied()).collect();
    provenance.sort();
    provenance.dedup();
    Ok(ClassicalSignal { form: sum.scale(scale), axis: first.axis, provenance })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::Axis;
    use approx::assert_abs_diff_eq;

    #[test]
    fn bell_measurement_of_coherent_input() {
        let mut net = Network::<f64>::new();
        let e = net.new_vacuum();
        let input = net.new_coherent(1.5, -0.5).unwrap();
        let (x, p) = net.bell_measure(&e, &input).unwrap();
        let h = 0.5f64.sqrt();
        assert_abs_diff_eq!(net.mean(&x.form).unwrap(), -1.5 * h, epsilon = 1e-15);
        assert_abs_diff_eq!(net.mean(&p.form).unwrap(), -0.5 * h, epsilon = 1e-15);
        assert_abs_diff_eq!(net.variance(&x.form).unwrap(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(net.variance(&p.form).unwrap(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(x.form.symplectic_pairing(&p.form), 0.0, epsilon = 1e-15);
        assert!(net.is_consumed(&e) && net.is_consumed(&input));
        assert_eq!(x.provenance, vec![e.handle, input.handle]);
    }

    #[test]
    fn measured_modes_cannot_be_reused() {
        let mut net = Network::<f64>::new();
        let a = net.new_vacuum();
        let b = net.new_vacuum();
        assert!(matches!(net.bell_measure(&a, &a), Err(Error::Usage(_))));
        let (x, p) = net.bell_measure(&a, &b).unwrap();
        assert!(matches!(net.bell_measure(&a, &b), Err(Error::Usage(_))));
        assert!(matches!(net.displace(&a, &x, 1.0, &p, 1.0), Err(Error::Usage(_))));
        let c = net.new_vacuum();
        assert!(matches!(net.beam_splitter(&a, &c, 0.1), Err(Error::Usage(_))));
    }

    #[test]
    fn combine_scales_and_sums() {
        let mut net = Network::<f64>::new();
        let mut xs = Vec::new();
        for _ in 0..4 {
            let a = net.new_vacuum();
            let b = net.new_vacuum();
            xs.push(net.bell_measure(&a, &b).unwrap().0);
        }
        let single = combine_signals(&xs[..1], 2.0f64.sqrt()).unwrap();
        assert_eq!(single.form, xs[0].form.scale(2.0f64.sqrt()));
        let n = xs.len() as f64;
        let all = combine_signals(&xs, 2.0f64.sqrt() / n).unwrap();
        assert_abs_diff_eq!(net.variance(&all.form).unwrap(), 2.0 / n, epsilon = 1e-15);
        assert_eq!(all.provenance.len(), 8);
    }

    #[test]
    fn combine_rejects_empty_and_mixed() {
        assert!(matches!(combine_signals::<f64>(&[], 1.0), Err(Error::Usage(_))));
        let mut net = Network::<f64>::new();
        let a = net.new_vacuum();
        let b = net.new_vacuum();
        let (x, p) = net.bell_measure(&a, &b).unwrap();
        assert!(matches!(combine_signals(&[x, p], 1.0), Err(Error::Usage(_))));
    }

    #[test]
    fn zero_gain_displacement_is_identity() {
        let mut net = Network::<f64>::new();
        let a = net.new_vacuum();
        let b = net.new_vacuum();
        let m = net.new_coherent(0.3, 0.4).unwrap();
        let (x, p) = net.bell_measure(&a, &b).unwrap();
        let out = net.displace(&m, &x, 0.0, &p, 0.0).unwrap();
        assert_eq!(out.x, m.x);
        assert_eq!(out.y, m.y);
        assert_ne!(out.handle, m.handle);
    }

    #[test]
    fn displacement_checks_signal_axes() {
        let mut net = Network::<f64>::new();
        let a = net.new_vacuum();
        let b = net.new_vacuum();
        let m = net.new_vacuum();
        let (x, p) = net.bell_measure(&a, &b).unwrap();
        assert!(matches!(net.displace(&m, &p, 1.0, &x, 1.0), Err(Error::Usage(_))));
        assert!(net.is_live(&m));
    }

    #[test]
    fn anticlone_style_feedforward_conjugates_phase() {
        // Dan's branch of the 1→2+1 protocol with the vacuum on the entangled side.
        let mut net = Network::<f64>::new();
        let e = net.new_vacuum();
        let v = net.new_vacuum();
        let (own, alice) = net.mix(&e, &v, 0.5f64.sqrt(), 0.5f64.sqrt()).unwrap();
        let input = net.new_coherent(1.0, 2.0).unwrap();
        let (x, p) = net.bell_measure(&own, &input).unwrap();
        let s2 = 2.0f64.sqrt();
        let out = net.displace(&alice, &x, -s2, &p, -s2).unwrap();
        assert_abs_diff_eq!(net.mean(&out.x).unwrap(), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(net.mean(&out.y).unwrap(), -2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(out.x.coeff(input.x.terms().next().unwrap().0, Axis::X), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(out.symplectic_invariant(), 1.0, epsilon = 1e-12);
    }
}
