//! Circuit compiler: gates to pulse programs for a given spin system.

pub mod exec;
pub mod gate;
pub mod lower;
pub mod passes;
pub mod refocus;
pub mod sequence;
pub mod text;
pub mod verify;

pub use exec::{sequence_unitary, ExecMode, Executor};
pub use gate::{circuit_unitary, circuit_unitary_in, Gate};
pub use lower::{lower_gate, CompileOptions, Emitter, Primitive};
pub use refocus::{synthesize_refocus, RefocusScheme};
pub use sequence::{CompiledSequence, PulseLibrary, SequenceElement};
pub use text::{format_circuit, parse_circuit};
pub use verify::{unitary_distance, verify, VerifyMode};

use crate::error::Result;
use crate::spin::SpinSystem;

/// Lower every gate, then run the passes enabled in `opts`.
pub fn compile_circuit(gates: &[Gate], system: &SpinSystem, opts: &CompileOptions) -> Result<CompiledSequence> {
    system.validate()?;
    for g in gates {
        g.validate(system.n)?;
    }
    let mut em = Emitter::new(system, opts);
    for g in gates {
        em.gate(g, opts.phase_exact)?;
    }
    let mut seq = em.seq;
    if opts.absorb_z {
        seq = passes::absorb_z(&seq, opts.diagonal_input);
    }
    if opts.simplify {
        seq = passes::simplify(&seq);
    }
    if opts.bs_corrections {
        seq = passes::insert_bs_corrections(&seq, system)?;
        if opts.absorb_z {
            seq = passes::absorb_z(&seq, opts.diagonal_input);
            seq = passes::simplify(&seq);
        }
    }
    if opts.unwind {
        seq = passes::apply_unwinding(&seq, &mut passes::UnwindCache::default())?;
    }
    Ok(seq)
}

pub fn compile_gate(g: &Gate, system: &SpinSystem, opts: &CompileOptions) -> Result<CompiledSequence> {
    compile_circuit(std::slice::from_ref(g), system, opts)
}
