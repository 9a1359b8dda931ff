//! The `simulate` pipeline: hash verification, optional privacy
//! amplification, abort collapse, and every distance and entropy along the
//! way, with a transcript of each step.
//!
//! The input state must carry bit-string registers `A` and `B` of equal
//! width.

use serde::Serialize;
use serde_json::json;
use veriloop_core::metrics::{min_entropy, secrecy_distance, trace_distance};
use veriloop_core::protocol::{
    abort_collapse, privacy_amplification, prob_keys_differ, verify_with_hash, PaMode, Verdict, VERDICT_REGISTER,
};
use veriloop_core::{CqState, ToeplitzHash};

use crate::error::{Error, Result};
use crate::state_file::parse_seed;
use crate::transcript::Transcript;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SimulateOptions {
    /// Verification hash seed, hex.
    pub hash_seed: String,
    /// Tag length `|H|`.
    pub out_bits: usize,
    /// Privacy-amplification output length; `None` keeps the reconciled strings as keys.
    pub pa_bits: Option<usize>,
    /// Fixed PA seed, hex; `None` averages over the whole Toeplitz family.
    pub pa_seed: Option<String>,
    /// Also report the secrecy distance of the virtual no-abort state with `V` kept.
    pub unconditioned: bool,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct SimulateReport {
    pub input_trace: f64,
    pub tag_bits: usize,
    pub pr_continue: f64,
    /// `None` when Eve's blocks are not diagonal.
    pub hmin_a_given_e: Option<f64>,
    pub hmin_a_given_ehv: Option<f64>,
    pub key_registers: [String; 2],
    pub key_bits: usize,
    pub pr_keys_differ: f64,
    /// `‖ρ_{K_A K_B E…V} − ideal‖₁`, the left side of the separation bound.
    pub distance_to_ideal: f64,
    /// `d(ρ^{V=0}_{K_A E…}|E…)` with every public register except `V` on Eve's side.
    pub secrecy_v0: f64,
    pub separation_rhs: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub secrecy_virtual: Option<f64>,
    pub transcript: Transcript,
}

fn key_width(state: &CqState) -> Result<usize> {
    let wa = state.register("A")?.alphabet.bit_width();
    let wb = state.register("B")?.alphabet.bit_width();
    match (wa, wb) {
        (Some(a), Some(b)) if a == b => Ok(a),
        _ => Err(Error::InvalidSpec("registers A and B must hold bit-strings of one width".into())),
    }
}

pub fn simulate(rho: &CqState, opts: &SimulateOptions) -> Result<SimulateReport> {
    let n = key_width(rho)?;
    if opts.out_bits == 0 || opts.out_bits > n {
        return Err(Error::InvalidSpec(format!("--out-bits must be in 1..={n}")));
    }
    let seed = parse_seed(&opts.hash_seed, ToeplitzHash::seed_bits(n, opts.out_bits))?;
    let hv = ToeplitzHash::new(n, opts.out_bits, seed)?;
    let mut transcript = Transcript::new();

    let hmin_a_given_e = min_entropy(&rho.restrict_to(&["A"])?, "A").ok();
    let outcome = verify_with_hash(rho, "A", "B", &hv)?;
    transcript.record(
        "verify",
        rho,
        &outcome.state,
        [("hash_seed", json!(hv.seed().to_hex())), ("n_in", json!(n)), ("n_out", json!(opts.out_bits))],
    );
    let pr_continue = outcome.continue_probability()?;
    let hmin_a_given_ehv = min_entropy(&outcome.state.marginalize(&["B"])?, "A").ok();

    let (mut virtual_state, keys, key_bits) = match opts.pa_bits {
        None => (outcome.state.clone(), ["A", "B"], n),
        Some(m) => {
            let (mode, label) = match &opts.pa_seed {
                Some(hex) => {
                    let seed = parse_seed(hex, ToeplitzHash::seed_bits(n, m))?;
                    let h = ToeplitzHash::new(n, m, seed)?;
                    let label = json!(h.seed().to_hex());
                    (PaMode::Fixed(h), label)
                }
                None => (PaMode::Averaged, json!("averaged")),
            };
            let mut state = outcome.state.clone();
            for (src, dst) in [("A", "KA"), ("B", "KB")] {
                let next = privacy_amplification(&state, src, dst, m, &mode)?;
                transcript.record(
                    "privacy_amplification",
                    &state,
                    &next,
                    [("source", json!(src)), ("output_bits", json!(m)), ("pa_seed", label.clone())],
                );
                state = next;
            }
            let dropped = state.marginalize(&["A", "B"])?;
            transcript.record("discard_raw", &state, &dropped, [("registers", json!(["A", "B"]))]);
            (dropped, ["KA", "KB"], m)
        }
    };

    let outcome = veriloop_core::VerificationOutcome { state: virtual_state.clone(), tag_bits: opts.out_bits };
    let actual = abort_collapse(&outcome, &keys)?;
    transcript.record("abort_collapse", &outcome.state, &actual, [("keys", json!(keys))]);

    let pr_keys_differ = prob_keys_differ(&actual, keys[0], keys[1])?;
    let distance_to_ideal = trace_distance(&actual, &actual.ideal_state(&keys)?)?;
    let v0 = actual.condition(VERDICT_REGISTER, &Verdict::Continue.symbol())?.marginalize(&[keys[1]])?;
    let secrecy_v0 = secrecy_distance(&v0, keys[0])?;
    let secrecy_virtual = if opts.unconditioned {
        virtual_state = virtual_state.marginalize(&[keys[1]])?;
        Some(secrecy_distance(&virtual_state, keys[0])?)
    } else {
        None
    };

    Ok(SimulateReport {
        input_trace: rho.total_trace(),
        tag_bits: opts.out_bits,
        pr_continue,
        hmin_a_given_e,
        hmin_a_given_ehv,
        key_registers: keys.map(str::to_owned),
        key_bits,
        pr_keys_differ,
        distance_to_ideal,
        secrecy_v0,
        separation_rhs: secrecy_v0 + pr_keys_differ,
        secrecy_virtual,
        transcript,
    })
}
