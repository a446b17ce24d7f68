//! Holds no code; the acceptance suite lives in `tests/acceptance.rs`.
