//! Holds the `acceptance` test target, which checks the engine against its
//! exit criteria. Run it with `cargo test -p ppq-acceptance`.
