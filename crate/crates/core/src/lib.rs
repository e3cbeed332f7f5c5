//! Structured matrix families, block and Schwarz preconditioners, Krylov
//! solvers and spectral diagnostics for GLT-style eigenvalue studies.

pub mod assembly;
pub mod dense;
pub mod krylov;
pub mod matrices;
pub mod mm;
pub mod partition;
pub mod schwarz;
pub mod spectra;
pub mod symbols;
