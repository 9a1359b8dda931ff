//! Distances and entropies on [`CqState`]s.
//!
//! All trace norms use the half-normalized convention
//! `‖σ‖₁ = ½ tr √(σσ†) = ½ Σ|λᵢ|`. Entropies are in bits.

pub mod eigen;

use alloc::collections::BTreeMap;
use alloc::string::ToString;
use alloc::vec::Vec;

use crate::bits::Symbol;
use crate::block::HermitianBlock;
use crate::cq_state::CqState;
use crate::error::{Error, Result};

pub use eigen::{hermitian_eigenvalues, SpectrumResult};

/// Weights at or below this count as outside the support.
pub const SUPPORT_THRESHOLD: f64 = 1e-12;

/// `½ Σ|λᵢ|` for a Hermitian block.
pub fn trace_norm(block: &HermitianBlock) -> Result<f64> {
    if let Some(d) = block.diagonal_slice() {
        return Ok(0.5 * d.iter().map(|x| x.abs()).fold(0.0, |acc, x| acc + x));
    }
    let spectrum = hermitian_eigenvalues(block)?;
    Ok(0.5 * spectrum.eigenvalues.iter().map(|x| x.abs()).fold(0.0, |acc, x| acc + x))
}

/// `‖ρ − σ‖₁`, decomposed exactly over classical assignments.
pub fn trace_distance(rho: &CqState, sigma: &CqState) -> Result<f64> {
    if rho.registers() != sigma.registers() || rho.eve_dim() != sigma.eve_dim() {
        return Err(Error::ShapeMismatch);
    }
    let mut left = rho.terms().peekable();
    let mut right = sigma.terms().peekable();
    let mut total = 0.0;
    loop {
        let step = match (left.peek(), right.peek()) {
            (None, None) => break,
            (Some(_), None) => Side::Left,
            (None, Some(_)) => Side::Right,
            (Some((a, _)), Some((b, _))) => match a.cmp(b) {
                core::cmp::Ordering::Less => Side::Left,
                core::cmp::Ordering::Greater => Side::Right,
                core::cmp::Ordering::Equal => Side::Both,
            },
        };
        total += match step {
            Side::Left => trace_norm(left.next().unwrap().1)?,
            Side::Right => trace_norm(right.next().unwrap().1)?,
            Side::Both => trace_norm(&left.next().unwrap().1.sub(right.next().unwrap().1))?,
        };
    }
    Ok(total)
}

enum Side {
    Left,
    Right,
    Both,
}

/// Eve-side branches of a state: assignment without the key, mapped to the
/// key-indexed blocks and their sum.
type Branch<'a> = (HermitianBlock, Vec<(Symbol, &'a HermitianBlock)>);

struct KeyBranches<'a> {
    groups: BTreeMap<Vec<Symbol>, Branch<'a>>,
    key_count: f64,
}

fn key_branches<'a>(state: &'a CqState, key_register: &str) -> Result<KeyBranches<'a>> {
    let idx = state.register_index(key_register)?;
    let mut groups: BTreeMap<Vec<Symbol>, Branch<'_>> = BTreeMap::new();
    for (k, b) in state.terms() {
        if k[idx].is_abort() {
            return Err(Error::AbortSymbolPresent(key_register.to_string()));
        }
        let mut rest = k.to_vec();
        let key = rest.remove(idx);
        let entry = groups.entry(rest).or_insert_with(|| (HermitianBlock::zeros(state.eve_dim()), Vec::new()));
        entry.0.add_scaled(b, 1.0);
        entry.1.push((key, b));
    }
    let key_count = state.registers()[idx].alphabet.key_count();
    Ok(KeyBranches { groups, key_count })
}

/// `2^{-ℓ} 𝟙_K ⊗ ρ_rest`, where `rest` is Eve plus every other classical
/// register.
pub fn secrecy_ideal(state: &CqState, key_register: &str) -> Result<CqState> {
    let idx = state.register_index(key_register)?;
    let branches = key_branches(state, key_register)?;
    let keys: Vec<Symbol> = state.registers()[idx].alphabet.keys().collect();
    let mut terms = BTreeMap::new();
    for (rest, (sum, _)) in branches.groups {
        let block = sum.scale(1.0 / branches.key_count);
        for key in &keys {
            let mut full = rest.clone();
            full.insert(idx, *key);
            terms.insert(full, block.clone());
        }
    }
    Ok(CqState::from_parts(state.registers().to_vec(), state.eve_dim(), terms, state.tolerances()))
}

/// `d(ρ_{K R}|R) = ‖ρ_{K R} − 2^{-ℓ} 𝟙_K ⊗ ρ_R‖₁` with `R` = Eve and every
/// other classical register of `state`. Sub-normalized states are used as
/// they are, without renormalization.
pub fn secrecy_distance(state: &CqState, key_register: &str) -> Result<f64> {
    let branches = key_branches(state, key_register)?;
    let n = branches.key_count;
    let mut total = 0.0;
    for (sum, keyed) in branches.groups.values() {
        let target = sum.scale(1.0 / n);
        for (_, block) in keyed {
            total += trace_norm(&block.sub(&target))?;
        }
        let absent = n - keyed.len() as f64;
        if absent > 0.0 {
            total += absent * trace_norm(&target)?;
        }
    }
    Ok(total)
}

/// `Σ_{side, e} max_a p(a, side, e)` for a classical-Eve state.
pub fn guessing_probability(state: &CqState, target_register: &str) -> Result<f64> {
    let idx = state.register_index(target_register)?;
    let tolerance = state.tolerances().validation;
    let mut best: BTreeMap<Vec<Symbol>, Vec<f64>> = BTreeMap::new();
    for (k, b) in state.terms() {
        let off = b.max_off_diagonal();
        if off > tolerance {
            return Err(Error::NonDiagonalEve { off_diagonal: off });
        }
        let mut side = k.to_vec();
        side.remove(idx);
        let maxima = best.entry(side).or_insert_with(|| alloc::vec![0.0; state.eve_dim()]);
        for (m, p) in maxima.iter_mut().zip(b.diagonal_entries()) {
            *m = m.max(p);
        }
    }
    Ok(best.values().flat_map(|v| v.iter()).fold(0.0, |acc, x| acc + x))
}

/// `H_min(T | E, rest) = −log₂ Σ_{side,e} max_t p(t, side, e)`.
///
/// Eve must be diagonal in the computational basis (classical side
/// information). A zero state has guessing probability 0 and yields `+∞`.
pub fn min_entropy(state: &CqState, target_register: &str) -> Result<f64> {
    let p = guessing_probability(state, target_register)?;
    // `0.0 - x` rather than `-x` so p = 1 gives +0
    Ok(if p > 0.0 { 0.0 - libm::log2(p) } else { f64::INFINITY })
}

/// `log₂` of the support size of the named registers' joint marginal.
///
/// Returns 0 when the support is empty.
pub fn max_entropy(state: &CqState, registers: &[&str]) -> Result<f64> {
    let idx: Vec<usize> = registers.iter().map(|n| state.register_index(n)).collect::<Result<_>>()?;
    let mut weights: BTreeMap<Vec<Symbol>, f64> = BTreeMap::new();
    for (k, b) in state.terms() {
        let key: Vec<Symbol> = idx.iter().map(|&i| k[i]).collect();
        *weights.entry(key).or_insert(0.0) += b.trace();
    }
    let support = weights.values().filter(|&&w| w > SUPPORT_THRESHOLD).count();
    Ok(if support == 0 { 0.0 } else { libm::log2(support as f64) })
}
