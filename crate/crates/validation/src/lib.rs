//! Holds the acceptance suite (`cargo test -p fal-validation --test acceptance`).
