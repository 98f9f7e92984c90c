//! Deontic reasoning with logic programs and neural networks: answer-set
//! semantics for extended programs, three-valued Kleene programs, deontic
//! operations on answer sets, propositional input/output logic, a compiler
//! from normative codes to logic programs, and their translation into
//! trainable feed-forward networks.

pub mod ansio;
pub mod compiler;
pub mod experiment;
pub mod kleene;
pub mod logic;
pub mod neural;
pub mod syntax;
pub mod training;
pub mod truth;
