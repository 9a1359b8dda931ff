//! The two-bit error-verification counterexample.
//!
//! Reconciled keys `A = xy`, `B = zx`, Eve holds `[z]` (she resent the second
//! qubit after measuring it and swapped the pair). Keeping the first bit gives
//! `K_A = x`, which is perfectly secret against `E` alone. Adding the check
//! `b₁ = b₂` (i.e. `z = x`) and publishing its outcome hands Eve the key on
//! the `V = 0` branch: the real distance to ideal is 1/4 while the naive bound
//! `d(ρ_{K_A E}|E) + Pr[K_A ≠ K_B]` is 0.

use alloc::vec;
use alloc::vec::Vec;

use crate::bits::{BitString, Symbol};
use crate::block::HermitianBlock;
use crate::cq_state::{CqState, Register};
use crate::error::Result;
use crate::hashing::ToeplitzHash;
use crate::metrics::{secrecy_distance, trace_distance};
use crate::protocol::{
    abort_collapse, privacy_amplification, prob_keys_differ, verify_with_predicate, PaMode, Verdict,
    VERDICT_REGISTER,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CounterexampleReport {
    /// `d(ρ_{K_A E}|E)` without verification.
    pub d_no_verification: f64,
    /// `Pr[K_A ≠ K_B]` after verification and abort.
    pub pr_keys_differ: f64,
    /// `‖ρ_{K_A K_B E V} − ideal‖₁`.
    pub trace_distance_with_v: f64,
    /// `d(ρ^{V=0}_{K_A E}|E)`.
    pub secrecy_v0: f64,
    /// `secrecy_v0 + pr_keys_differ`.
    pub lemma2_rhs: f64,
}

impl CounterexampleReport {
    /// `d_no_verification + pr_keys_differ`, the bound that wrongly ignores `V`.
    pub fn naive_rhs(&self) -> f64 {
        self.d_no_verification + self.pr_keys_differ
    }

    pub fn lemma2_holds(&self, tolerance: f64) -> bool {
        self.trace_distance_with_v <= self.lemma2_rhs + tolerance
    }

    /// True when the naive bound is strictly violated.
    pub fn naive_bound_violated(&self, tolerance: f64) -> bool {
        self.trace_distance_with_v > self.naive_rhs() + tolerance
    }
}

/// `⅛ Σ_{x,y,z} [xy]_A ⊗ [zx]_B ⊗ [z]_E` with a two-dimensional diagonal Eve.
pub fn build_state() -> CqState {
    let mut terms = Vec::with_capacity(8);
    for x in 0..2u64 {
        for y in 0..2u64 {
            for z in 0..2u64 {
                let a = Symbol::Bits(BitString::new(x << 1 | y, 2).expect("2-bit value"));
                let b = Symbol::Bits(BitString::new(z << 1 | x, 2).expect("2-bit value"));
                terms.push((vec![a, b], HermitianBlock::projector(2, z as usize).scale(0.125)));
            }
        }
    }
    CqState::build(vec![Register::bits("A", 2), Register::bits("B", 2)], 2, terms)
        .expect("counterexample state is valid")
}

/// The public linear map `a ↦ a₁` as a Toeplitz hash (seed `"10"`).
pub fn first_bit_map() -> ToeplitzHash {
    ToeplitzHash::new(2, 1, BitString::new(0b10, 2).expect("2-bit seed")).expect("valid shape")
}

pub fn run() -> Result<CounterexampleReport> {
    let rho = build_state();
    let pa = PaMode::Fixed(first_bit_map());
    let keyed = privacy_amplification(&rho, "A", "KA", 1, &pa)?;
    let keyed = privacy_amplification(&keyed, "B", "KB", 1, &pa)?;

    let ka_e = keyed.restrict_to(&["KA"])?;
    let d_no_verification = secrecy_distance(&ka_e, "KA")?;

    let ib = keyed.register_index("B")?;
    let outcome = verify_with_predicate(&keyed, |k| {
        let b = k[ib].as_bits().expect("B holds bits");
        if b.bit(0) == b.bit(1) {
            Verdict::Continue
        } else {
            Verdict::Abort
        }
    })?;
    let final_state = abort_collapse(&outcome, &["KA", "KB"])?.marginalize(&["A", "B"])?;

    let pr_keys_differ = prob_keys_differ(&final_state, "KA", "KB")?;
    let ideal = final_state.ideal_state(&["KA", "KB"])?;
    let trace_distance_with_v = trace_distance(&final_state, &ideal)?;
    let v0 = final_state.condition(VERDICT_REGISTER, &Verdict::Continue.symbol())?.restrict_to(&["KA"])?;
    let secrecy_v0 = secrecy_distance(&v0, "KA")?;

    Ok(CounterexampleReport {
        d_no_verification,
        pr_keys_differ,
        trace_distance_with_v,
        secrecy_v0,
        lemma2_rhs: secrecy_v0 + pr_keys_differ,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::min_entropy;
    use alloc::collections::BTreeMap;

    #[test]
    fn state_shape() {
        let s = build_state();
        assert_eq!(s.num_terms(), 8);
        assert_eq!(s.total_trace(), 1.0);
        let a: BTreeMap<_, _> = s.restrict_to(&["A"]).unwrap().trace_out_eve();
        assert_eq!(a.len(), 4);
        assert!(a.values().all(|&w| w == 0.25));
    }

    #[test]
    fn alice_min_entropy() {
        // E = z is independent of A = xy: Σ_e max_a p(a, e) = 2 · 1/8.
        let ae = build_state().marginalize(&["B"]).unwrap();
        assert_eq!(min_entropy(&ae, "A").unwrap(), 2.0);
        // B = zx additionally reveals x: Σ_{b,e} max_a p(a, b, e) = 4 · 1/8.
        assert_eq!(min_entropy(&build_state(), "A").unwrap(), 1.0);
    }

    #[test]
    fn reported_values() {
        let r = run().unwrap();
        assert!(r.d_no_verification.abs() <= 1e-12);
        assert!(r.pr_keys_differ.abs() <= 1e-12);
        assert!((r.trace_distance_with_v - 0.25).abs() <= 1e-12);
        assert!((r.secrecy_v0 - 0.25).abs() <= 1e-12);
        assert!(r.lemma2_holds(1e-12));
        assert!(r.naive_bound_violated(1e-12));
    }
}
