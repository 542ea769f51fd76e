//! Acceptance checks for the transport solvers.
//!
//! The checks live in `tests/acceptance.rs` and run with
//! `cargo test -p tdtransport-validation --test acceptance`. Each prints one
//! `PASS` or `FAIL` line; the target exits nonzero if any check fails.
