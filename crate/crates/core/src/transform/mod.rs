//! Morphisms of guarded nets and operations built from them.

pub mod compose;
pub mod functor;

pub use compose::{
    add_generators, add_guarded, erase_generators, identify, lift_identification, lifted_add, lifted_erase,
    lifted_identify, lifted_synchronize, rename_guarded, synchronize, LiftedIdentification, QuotientResult,
};
pub use functor::{
    check_flags, check_morphism, guard_difference, lift, morphism_mismatch, naturality_check, pullback_guard,
    square_commutes, Flags, NetFunctor,
};
